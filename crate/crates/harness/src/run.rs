//! One `(J, B, M)` experiment: simulate, mitigate with every strategy, select,
//! and rank by distance to the noiseless distribution.

use qem_core::circuits::{amplify, build_trotter_tfi, ScaleFactor, TfiParams};
use qem_core::distribution::Distribution;
use qem_core::estimator::{empirical_distribution, sample_counts};
use qem_core::extrapolate::{mitigate_distribution, postprocess, BinFlag, Processed, ScaledDistributions, Strategy};
use qem_core::select::{consistency_select_per_bin, nversion_select, tvd, NvReport};
use qem_core::simcore::{output_distribution, simulate, NoiseModel};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ShotMode};
use crate::error::Result;

/// Candidate name of the per-bin consistency output.
pub const CONSISTENCY: &str = "Consistency";

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Folds `(J, B, M)` into the master seed with SplitMix64:
/// `h ← splitmix(master)`, then `h ← splitmix(h ⊕ x)` for `x` in
/// `J.to_bits(), B.to_bits(), M`.
pub fn run_seed(master_seed: u64, coupling: f64, field: f64, trotter_steps: u32) -> u64 {
    [coupling.to_bits(), field.to_bits(), u64::from(trotter_steps)]
        .into_iter()
        .fold(splitmix64(master_seed), |h, x| splitmix64(h ^ x))
}

/// Sampling seed for one scale factor within a run.
pub fn scale_seed(run_seed: u64, scale: ScaleFactor) -> u64 {
    splitmix64(run_seed ^ u64::from(scale.get()).rotate_left(32))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledDistribution {
    pub lambda: ScaleFactor,
    pub distribution: Distribution,
    pub tvd_to_ideal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub name: String,
    pub tvd: f64,
    /// 1 is closest to the ideal distribution.
    pub rank: usize,
    /// Bins where the fallback strategy replaced this one.
    pub fallback_bins: usize,
    pub output: Processed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyOutcome {
    /// Chosen strategy per bin; `None` for bins that are zero everywhere.
    pub choices: Vec<Option<Strategy>>,
    pub choice_counts: Vec<(Strategy, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub coupling: f64,
    pub field: f64,
    pub trotter_steps: u32,
    pub seed: u64,
    pub ideal: Distribution,
    pub noisy: Vec<ScaledDistribution>,
    /// Strategies in configuration order, then the consistency output if enabled.
    pub candidates: Vec<CandidateResult>,
    /// Selection over the strategy outputs.
    pub nversion: NvReport,
    /// Rank of the N-version pick among all candidates.
    pub nversion_rank: usize,
    pub consistency: Option<ConsistencyOutcome>,
}

impl RunRecord {
    pub fn candidate(&self, name: &str) -> Option<&CandidateResult> {
        self.candidates.iter().find(|c| c.name == name)
    }

    pub fn worst_rank(&self) -> usize {
        self.candidates.len()
    }
}

/// Ranks by ascending TVD; equal TVDs keep candidate order.
pub fn rank_by_tvd(tvds: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..tvds.len()).collect();
    order.sort_by(|&a, &b| tvds[a].total_cmp(&tvds[b]).then(a.cmp(&b)));
    let mut ranks = vec![0; tvds.len()];
    for (place, &i) in order.iter().enumerate() {
        ranks[i] = place + 1;
    }
    ranks
}

pub fn simulate_scaled(
    config: &ExperimentConfig,
    params: &TfiParams,
    seed: u64,
) -> Result<(Distribution, ScaledDistributions)> {
    let circuit = build_trotter_tfi(params)?;
    let ideal = output_distribution(&simulate(&circuit, &NoiseModel::noiseless())?, 0.0)?;
    let mut noisy = ScaledDistributions::new();
    for &lambda in &config.scale_factors {
        let (amplified, noise) = amplify(&circuit, &config.noise, lambda, config.amplification)?;
        let exact = output_distribution(&simulate(&amplified, &noise)?, noise.readout_flip)?;
        let dist = match config.shot_mode {
            ShotMode::Exact => exact,
            ShotMode::Sampled => {
                empirical_distribution(&sample_counts(&exact, config.n_meas, scale_seed(seed, lambda)))?
            }
        };
        noisy.insert(lambda, dist);
    }
    Ok((ideal, noisy))
}

pub fn run_single(
    config: &ExperimentConfig,
    coupling: f64,
    field: f64,
    trotter_steps: u32,
    seed: u64,
) -> Result<RunRecord> {
    config.validate()?;
    let params = TfiParams::new(config.n_qubits, coupling, field, config.time, trotter_steps)
        .with_boundary(config.boundary);
    let (ideal, noisy) = simulate_scaled(config, &params, seed)?;

    let mut outputs: Vec<(String, Processed, usize)> = Vec::new();
    for &strategy in &config.strategies {
        let (quasi, flags) = mitigate_distribution(strategy, &noisy, config.fallback)?;
        let fallback_bins = flags.iter().filter(|&&f| f == BinFlag::Fallback).count();
        outputs.push((strategy.name().to_string(), postprocess(&quasi, config.postprocess)?, fallback_bins));
    }

    let named: Vec<(String, Processed)> = outputs.iter().map(|(n, p, _)| (n.clone(), p.clone())).collect();
    let nversion = nversion_select(&named)?;

    let consistency = if config.include_consistency {
        let sel = consistency_select_per_bin(&noisy, config.subset_size, &config.strategies, config.report_value)?;
        let output = postprocess(&sel.quasi, config.postprocess)?;
        outputs.push((CONSISTENCY.to_string(), output, 0));
        Some(ConsistencyOutcome {
            choice_counts: sel.choice_counts(),
            choices: sel.choices,
        })
    } else {
        None
    };

    let tvds = outputs
        .iter()
        .map(|(_, p, _)| tvd(p, &ideal))
        .collect::<qem_core::Result<Vec<_>>>()?;
    let ranks = rank_by_tvd(&tvds);
    let candidates: Vec<CandidateResult> = outputs
        .into_iter()
        .zip(tvds.iter().zip(&ranks))
        .map(|((name, output, fallback_bins), (&tvd, &rank))| CandidateResult {
            name,
            tvd,
            rank,
            fallback_bins,
            output,
        })
        .collect();
    let nversion_rank = candidates[nversion.selected_index].rank;

    let noisy = noisy
        .into_iter()
        .map(|(lambda, distribution)| {
            let tvd_to_ideal = tvd(&distribution, &ideal)?;
            Ok(ScaledDistribution {
                lambda,
                distribution,
                tvd_to_ideal,
            })
        })
        .collect::<qem_core::Result<Vec<_>>>()?;

    Ok(RunRecord {
        coupling,
        field,
        trotter_steps,
        seed,
        ideal,
        noisy,
        candidates,
        nversion,
        nversion_rank,
        consistency,
    })
}
