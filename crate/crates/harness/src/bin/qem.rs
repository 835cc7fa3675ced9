use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use qem_core::circuits::{amplify, build_trotter_tfi, ScaleFactor, TfiParams};
use qem_core::estimator::{empirical_distribution, sample_counts};
use qem_core::extrapolate::{mitigate_distribution, postprocess, BinFlag, ScaledDistributions, Strategy};
use qem_core::select::{consistency_select_per_bin, nversion_select};
use qem_core::simcore::{output_distribution, simulate, NoiseModel};
use qem_core::Distribution;
use qem_harness::config::{ExperimentConfig, Preset, ShotMode};
use qem_harness::io::{format_distribution, read_distribution};
use qem_harness::report::{
    parse_records_json, records_csv, records_json, render, summary_csv, summary_json, summary_table, ReportFormat,
};
use qem_harness::{run_sweep, summarize};

#[derive(Parser)]
#[command(name = "qem", version, about = "Zero-noise extrapolation and strategy selection for output distributions")]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "table")]
    format: ReportFormat,
    #[arg(long, global = true)]
    preset: Option<Preset>,
    /// Starts from the 10-qubit, 600-run configuration instead of the desk-scale one.
    #[arg(long, global = true)]
    full_scale: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulates one Trotter circuit and writes its output distribution.
    Simulate {
        #[arg(long = "j")]
        coupling: f64,
        #[arg(long = "b")]
        field: f64,
        #[arg(long = "m")]
        trotter_steps: u32,
        #[arg(long, default_value_t = 1)]
        lambda: u32,
        /// Noiseless simulation without readout error.
        #[arg(long)]
        ideal: bool,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extrapolates per-scale-factor distribution files to zero noise.
    Mitigate {
        #[arg(long)]
        strategy: Strategy,
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compares three or more distributions and picks the most central one.
    SelectNversion {
        #[arg(required = true, num_args = 3..)]
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chooses an extrapolation strategy per bin by subset consistency.
    SelectConsistency {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Subset size; the configured value when omitted.
        #[arg(long)]
        subset_size: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the (J, B, M) sweep.
    Sweep {
        /// Directory for records.json, records.csv, summary.json and summary.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Renders records written by `sweep`.
    Report {
        records: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None if cli.full_scale => ExperimentConfig::full_scale(),
        None => ExperimentConfig::default(),
    };
    if let Some(preset) = cli.preset {
        config = config.with_preset(preset);
    }
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_scaled(files: &[PathBuf]) -> Result<ScaledDistributions> {
    let mut dists = ScaledDistributions::new();
    for path in files {
        let file = read_distribution(path)?;
        if file.lambda.fract() != 0.0 || file.lambda > f64::from(u32::MAX) {
            bail!("{}: lambda {} is not an odd integer", path.display(), file.lambda);
        }
        let lambda = ScaleFactor::new(file.lambda as u32)?;
        let dist = file.to_distribution().with_context(|| path.display().to_string())?;
        if dists.insert(lambda, dist).is_some() {
            bail!("lambda {} given twice", lambda.get());
        }
    }
    Ok(dists)
}

fn simulate_cmd(cli: &Cli, coupling: f64, field: f64, steps: u32, lambda: u32, ideal: bool) -> Result<String> {
    let config = load_config(cli)?;
    let scale = ScaleFactor::new(lambda)?;
    let params = TfiParams::new(config.n_qubits, coupling, field, config.time, steps).with_boundary(config.boundary);
    let circuit = build_trotter_tfi(&params)?;
    let noise = if ideal { NoiseModel::noiseless() } else { config.noise };
    let (amplified, noise) = amplify(&circuit, &noise, scale, config.amplification)?;
    let mut dist = output_distribution(&simulate(&amplified, &noise)?, noise.readout_flip)?;
    if config.shot_mode == ShotMode::Sampled && !ideal {
        dist = empirical_distribution(&sample_counts(&dist, config.n_meas, config.master_seed))?;
    }
    Ok(format_distribution(&dist, scale.as_f64()))
}

fn mitigate_cmd(cli: &Cli, strategy: Strategy, files: &[PathBuf]) -> Result<String> {
    let config = load_config(cli)?;
    let dists = read_scaled(files)?;
    let (quasi, flags) = mitigate_distribution(strategy, &dists, config.fallback)?;
    let fallback = flags.iter().filter(|&&f| f == BinFlag::Fallback).count();
    if fallback > 0 {
        eprintln!("{strategy}: {fallback} bin(s) used the {} fallback", config.fallback);
    }
    Ok(format_distribution(&postprocess(&quasi, config.postprocess)?, 0.0))
}

fn nversion_cmd(cli: &Cli, files: &[PathBuf]) -> Result<String> {
    let candidates = files
        .iter()
        .map(|p| Ok((p.display().to_string(), read_distribution(p)?.to_distribution()?)))
        .collect::<Result<Vec<(String, Distribution)>>>()?;
    let report = nversion_select(&candidates)?;
    Ok(match cli.format {
        ReportFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
        ReportFormat::Csv => {
            let mut text = String::from("candidate,tvd_sum,selected,outlier\n");
            for (i, name) in report.names.iter().enumerate() {
                text += &format!(
                    "{name},{:.12e},{},{}\n",
                    report.row_sums[i],
                    i == report.selected_index,
                    i == report.outlier_index
                );
            }
            text
        }
        ReportFormat::Table => {
            let mut text = String::new();
            for (i, name) in report.names.iter().enumerate() {
                text += &format!("{:.6}  {name}\n", report.row_sums[i]);
            }
            text + &format!("selected: {}\noutlier:  {}\n", report.selected_name(), report.outlier_name())
        }
    })
}

fn consistency_cmd(cli: &Cli, files: &[PathBuf], subset_size: Option<usize>) -> Result<String> {
    let config = load_config(cli)?;
    let dists = read_scaled(files)?;
    let l = subset_size.unwrap_or(config.subset_size);
    let sel = consistency_select_per_bin(&dists, l, &config.strategies, config.report_value)?;
    let n_bits = sel.quasi.n_bits();
    Ok(match cli.format {
        ReportFormat::Json => serde_json::to_string_pretty(&sel)? + "\n",
        ReportFormat::Csv => {
            let mut text = String::from("bitstring,strategy,value\n");
            for (z, choice) in sel.choices.iter().enumerate() {
                if let Some(s) = choice {
                    let bits = qem_core::distribution::format_bitstring(z, n_bits);
                    text += &format!("{bits},{s},{:.12e}\n", sel.distribution.get(z));
                }
            }
            text
        }
        ReportFormat::Table => {
            let mut text = format_distribution(&sel.distribution, 0.0);
            for (s, n) in sel.choice_counts() {
                text += &format!("# {s}: {n} bin(s)\n");
            }
            text
        }
    })
}

fn sweep_cmd(cli: &Cli, out: Option<&Path>) -> Result<String> {
    let config = load_config(cli)?;
    let records = run_sweep(&config)?;
    let summary = summarize(&records);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("records.json"), records_json(&records)?)?;
        std::fs::write(dir.join("records.csv"), records_csv(&records)?)?;
        std::fs::write(dir.join("summary.json"), summary_json(&summary)?)?;
        std::fs::write(dir.join("summary.csv"), summary_csv(&summary)?)?;
    }
    Ok(match cli.format {
        ReportFormat::Table => summary_table(&summary)?,
        ReportFormat::Csv => summary_csv(&summary)?,
        ReportFormat::Json => summary_json(&summary)?,
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (text, out) = match &cli.command {
        Command::Simulate {
            coupling,
            field,
            trotter_steps,
            lambda,
            ideal,
            out,
        } => (simulate_cmd(&cli, *coupling, *field, *trotter_steps, *lambda, *ideal)?, out),
        Command::Mitigate { strategy, files, out } => (mitigate_cmd(&cli, *strategy, files)?, out),
        Command::SelectNversion { files, out } => (nversion_cmd(&cli, files)?, out),
        Command::SelectConsistency { files, subset_size, out } => (consistency_cmd(&cli, files, *subset_size)?, out),
        Command::Sweep { out } => {
            let text = sweep_cmd(&cli, out.as_deref())?;
            print!("{text}");
            return Ok(());
        }
        Command::Report { records, out } => {
            let text = std::fs::read_to_string(records).with_context(|| format!("reading {}", records.display()))?;
            (render(&parse_records_json(&text)?, cli.format)?, out)
        }
    };
    emit(out.as_deref(), &text)
}
