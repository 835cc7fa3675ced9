use qem_core::circuits::{Amplification, ScaleFactor};
use qem_core::select::tvd;
use qem_core::simcore::NoiseModel;
use qem_harness::config::{IntRange, Preset};
use qem_harness::report::{parse_records_json, records_csv, records_json, render, summary_csv, ReportFormat};
use qem_harness::run::{run_seed, CONSISTENCY};
use qem_harness::{run_single, run_sweep, summarize, ExperimentConfig, ShotMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tiny() -> ExperimentConfig {
    ExperimentConfig {
        n_qubits: 3,
        j_range: IntRange::new(1, 2),
        b_range: IntRange::new(1, 2),
        m_range: IntRange::new(2, 2),
        ..ExperimentConfig::default()
    }
}

#[test]
fn two_by_two_grid_gives_four_records() {
    let records = run_sweep(&tiny()).unwrap();
    assert_eq!(records.len(), 4);
    let summary = summarize(&records);
    for method in summary.methods() {
        assert_eq!(summary.row(method, None).unwrap().total(), 4, "{method}");
        assert_eq!(summary.row(method, Some(2)).unwrap().total(), 4, "{method}");
    }
    for r in &records {
        let mut ranks: Vec<_> = r.candidates.iter().map(|c| c.rank).collect();
        ranks.sort();
        assert_eq!(ranks, (1..=r.candidates.len()).collect::<Vec<_>>());
        assert!(r.candidates.iter().all(|c| (0.0..=1.0).contains(&c.tvd)));
        assert_eq!(r.seed, run_seed(2024, r.coupling, r.field, r.trotter_steps));
    }
}

#[test]
fn csv_has_one_row_per_candidate_and_run() {
    let config = tiny().with_preset(Preset::ConsistencyExperiment);
    let records = run_sweep(&config).unwrap();
    let csv = records_csv(&records[..1]).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "J,B,M,candidate,tvd,rank,nversion_selected");
    assert_eq!(lines.len(), 1 + 4);
    assert!(lines[4].starts_with(&format!("1,1,2,{CONSISTENCY},")));
    assert_eq!(lines.iter().filter(|l| l.ends_with(",true")).count(), 1);

    let summary = summary_csv(&summarize(&records)).unwrap();
    assert!(summary.starts_with("method,rank,count,M\nLinear,1,"));
    assert!(summary.contains("\nNVersion,4,"));
    assert!(summary.trim_end().ends_with(",all"));
}

#[test]
fn json_round_trip_reproduces_the_summary() {
    let config = ExperimentConfig {
        shot_mode: ShotMode::Sampled,
        ..tiny()
    };
    let records = run_sweep(&config).unwrap();
    let back = parse_records_json(&records_json(&records).unwrap()).unwrap();
    assert_eq!(back, records);
    assert_eq!(summarize(&back), summarize(&records));
    for format in [ReportFormat::Table, ReportFormat::Csv, ReportFormat::Json] {
        assert_eq!(render(&back, format).unwrap(), render(&records, format).unwrap());
    }
}

#[test]
fn sweeps_are_byte_identical_across_executions() {
    let config = ExperimentConfig {
        shot_mode: ShotMode::Sampled,
        ..tiny().with_preset(Preset::ConsistencyExperiment)
    };
    let a = run_sweep(&config).unwrap();
    let b = run_sweep(&config).unwrap();
    assert_eq!(records_json(&a).unwrap(), records_json(&b).unwrap());
    assert_eq!(records_csv(&a).unwrap(), records_csv(&b).unwrap());
    let other = run_sweep(&ExperimentConfig { master_seed: 7, ..config }).unwrap();
    assert_ne!(records_json(&a).unwrap(), records_json(&other).unwrap());
}

#[test]
fn rate_scaled_noise_is_monotone_in_lambda() {
    let config = ExperimentConfig {
        n_qubits: 4,
        amplification: Amplification::RateScale,
        scale_factors: [1, 3, 5, 7].map(|l| ScaleFactor::new(l).unwrap()).to_vec(),
        ..ExperimentConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let (j, b, m) = (rng.random_range(0.0..4.0), rng.random_range(0.0..4.0), rng.random_range(1..=10));
        let r = run_single(&config, j, b, m, 0).unwrap();
        for w in r.noisy.windows(2) {
            assert!(
                w[1].tvd_to_ideal >= w[0].tvd_to_ideal - 1e-9,
                "J={j} B={b} M={m}: {} then {}",
                w[0].tvd_to_ideal,
                w[1].tvd_to_ideal
            );
        }
    }
}

#[test]
fn zero_hamiltonian_mitigation_approaches_the_ground_state() {
    // Readout flips are not amplified by folding, so they are switched off to
    // isolate the gate noise.
    let config = ExperimentConfig {
        n_qubits: 3,
        noise: NoiseModel::new(0.001, 0.01, 0.0).unwrap(),
        ..ExperimentConfig::default()
    };
    let r = run_single(&config, 0.0, 0.0, 1, 0).unwrap();
    assert_eq!(r.ideal.probs()[0], 1.0);
    let raw = r.noisy[0].tvd_to_ideal;
    for c in &r.candidates {
        assert!(c.tvd < raw, "{}: {} vs unmitigated {}", c.name, c.tvd, raw);
    }
    let richardson = r.candidate("Richardson").unwrap();
    assert!(richardson.tvd < raw / 100.0, "{}", richardson.tvd);
}

#[test]
fn sampled_runs_approach_exact_runs_with_more_shots() {
    let exact = tiny();
    let r_exact = run_single(&exact, 1.0, 2.0, 3, 5).unwrap();
    let mut last = f64::INFINITY;
    for shots in [1_000, 100_000] {
        let sampled = ExperimentConfig {
            shot_mode: ShotMode::Sampled,
            n_meas: shots,
            ..tiny()
        };
        let r = run_single(&sampled, 1.0, 2.0, 3, 5).unwrap();
        let d = tvd(&r.noisy[0].distribution, &r_exact.noisy[0].distribution).unwrap();
        assert!(d < last);
        last = d;
    }
    assert!(last < 0.01);
}
