//! Data-driven choice among mitigated distributions.
//!
//! Two selectors are implemented. [`nversion_select`] compares candidate
//! distributions pairwise by total variation distance and keeps the one
//! closest to all others. [`consistency_select`] re-runs each extrapolation
//! strategy on every `L`-subset of the `K` measured scale factors and prefers
//! the strategy whose subset results agree best (smallest variance);
//! [`consistency_select_per_bin`] does this independently for each bitstring.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::distribution::{BinValues, Distribution, QuasiDistribution};
use crate::error::{QemError, Result};
use crate::extrapolate::{
    bin_is_all_zero, bin_points, check_scaled, clip_renormalize, MeasuredPoint, ScaledDistributions,
    Strategy,
};

/// Subset variances within this of the minimum count as tied.
pub const VARIANCE_TIE_TOL: f64 = 1e-18;

/// `½ Σ_z |p_z − q_z|`.
pub fn tvd<P: BinValues + ?Sized, Q: BinValues + ?Sized>(p: &P, q: &Q) -> Result<f64> {
    if p.n_bits() != q.n_bits() {
        return Err(QemError::WidthMismatch {
            left: p.n_bits(),
            right: q.n_bits(),
        });
    }
    Ok(0.5
        * p.values()
            .iter()
            .zip(q.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NvReport {
    pub names: Vec<String>,
    pub tvd_matrix: Vec<Vec<f64>>,
    pub row_sums: Vec<f64>,
    /// Candidate with the smallest summed distance to the others.
    pub selected_index: usize,
    /// Candidate with the largest summed distance.
    pub outlier_index: usize,
}

impl NvReport {
    pub fn selected_name(&self) -> &str {
        &self.names[self.selected_index]
    }

    pub fn outlier_name(&self) -> &str {
        &self.names[self.outlier_index]
    }
}

/// Ties resolve to the earliest candidate.
pub fn nversion_select<D: BinValues>(candidates: &[(String, D)]) -> Result<NvReport> {
    if candidates.len() < 3 {
        return Err(QemError::TooFewCandidates {
            needed: 3,
            got: candidates.len(),
        });
    }
    let n = candidates.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = tvd(&candidates[i].1, &candidates[j].1)?;
            matrix[i][j] = d;
            matrix[j][i] = d;
        }
    }
    let row_sums: Vec<f64> = matrix.iter().map(|row| row.iter().sum()).collect();
    let mut selected = 0;
    let mut outlier = 0;
    for (i, &s) in row_sums.iter().enumerate() {
        if s < row_sums[selected] {
            selected = i;
        }
        if s > row_sums[outlier] {
            outlier = i;
        }
    }
    Ok(NvReport {
        names: candidates.iter().map(|(name, _)| name.clone()).collect(),
        tvd_matrix: matrix,
        row_sums,
        selected_index: selected,
        outlier_index: outlier,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyConsistency {
    pub strategy: Strategy,
    /// One extrapolated value per subset, in lexicographic subset order.
    /// Empty when the strategy was disqualified.
    pub values: Vec<f64>,
    /// Population variance of `values`.
    pub variance: Option<f64>,
    pub applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub k: usize,
    pub l: usize,
    pub strategies: Vec<StrategyConsistency>,
    pub chosen: Strategy,
}

impl ConsistencyReport {
    pub fn entry(&self, strategy: Strategy) -> Option<&StrategyConsistency> {
        self.strategies.iter().find(|s| s.strategy == strategy)
    }
}

fn validate_consistency_inputs(k: usize, l: usize, strategies: &[Strategy]) -> Result<()> {
    if l < 2 || l >= k {
        return Err(QemError::SubsetSizeOutOfRange { l, k });
    }
    if strategies.is_empty() {
        return Err(QemError::NoApplicableStrategy);
    }
    for &s in strategies {
        if s.min_points() > l {
            return Err(QemError::NotEnoughPoints {
                strategy: s.name(),
                needed: s.min_points(),
                got: l,
            });
        }
    }
    Ok(())
}

fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Evaluates each strategy on all `C(K, L)` subsets of `points`. A strategy
/// that is inapplicable on any subset is disqualified. The chosen strategy
/// has the smallest variance; ties go to the earlier of Linear, Richardson,
/// Exponential, PolyExp.
pub fn consistency_select(
    points: &[MeasuredPoint],
    l: usize,
    strategies: &[Strategy],
) -> Result<ConsistencyReport> {
    let k = points.len();
    validate_consistency_inputs(k, l, strategies)?;
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    for w in sorted.windows(2) {
        if w[0].lambda == w[1].lambda {
            return Err(QemError::DuplicateLambda(w[0].lambda));
        }
    }
    if sorted[0].lambda != 1.0 {
        return Err(QemError::MissingLambda(1.0));
    }

    let mut ordered = strategies.to_vec();
    ordered.sort();
    ordered.dedup();

    let mut entries = Vec::with_capacity(ordered.len());
    for &strategy in &ordered {
        let mut values = Vec::new();
        let mut applicable = true;
        for subset in sorted.iter().copied().combinations(l) {
            let fit = strategy.extrapolate(&subset)?;
            if !fit.applicable() {
                applicable = false;
                break;
            }
            values.push(fit.mitigated);
        }
        if !applicable {
            values.clear();
        }
        let variance = applicable.then(|| population_variance(&values));
        entries.push(StrategyConsistency {
            strategy,
            values,
            variance,
            applicable,
        });
    }

    let best = entries
        .iter()
        .filter_map(|e| e.variance)
        .fold(f64::INFINITY, f64::min);
    let chosen = entries
        .iter()
        .find(|e| e.variance.is_some_and(|v| v <= best + VARIANCE_TIE_TOL))
        .map(|e| e.strategy)
        .ok_or(QemError::NoApplicableStrategy)?;
    Ok(ConsistencyReport {
        k,
        l,
        strategies: entries,
        chosen,
    })
}

/// Which value represents a bin once its strategy is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportValue {
    /// The chosen strategy's standalone value, on the scale factors it uses in
    /// [`crate::extrapolate::mitigate_distribution`].
    #[default]
    FullFit,
    /// Mean of the subset results.
    SubsetMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerBinSelection {
    /// Clipped and renormalized output.
    pub distribution: Distribution,
    /// Values before postprocessing.
    pub quasi: QuasiDistribution,
    /// Chosen strategy per bin; `None` for bins that are zero everywhere.
    pub choices: Vec<Option<Strategy>>,
    pub reports: Vec<Option<ConsistencyReport>>,
}

impl PerBinSelection {
    /// Number of bins that chose each strategy, in precedence order.
    pub fn choice_counts(&self) -> Vec<(Strategy, usize)> {
        Strategy::ALL
            .iter()
            .map(|&s| (s, self.choices.iter().filter(|c| **c == Some(s)).count()))
            .filter(|(_, n)| *n > 0)
            .collect()
    }
}

fn final_value(
    report: &ConsistencyReport,
    points: &[MeasuredPoint],
    mode: ReportValue,
) -> Result<f64> {
    let entry = report.entry(report.chosen).expect("chosen strategy has an entry");
    let subset_mean = entry.values.iter().sum::<f64>() / entry.values.len() as f64;
    if mode == ReportValue::SubsetMean {
        return Ok(subset_mean);
    }
    let available: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    let used = report.chosen.select_lambdas(&available)?;
    let subset: Vec<MeasuredPoint> = points.iter().filter(|p| used.contains(&p.lambda)).cloned().collect();
    let fit = report.chosen.extrapolate(&subset)?;
    Ok(if fit.applicable() {
        fit.mitigated
    } else {
        subset_mean
    })
}

/// Runs [`consistency_select`] on every bin's per-scale-factor values. Bins
/// that are zero at every scale factor are left at zero.
pub fn consistency_select_per_bin(
    dists: &ScaledDistributions,
    l: usize,
    strategies: &[Strategy],
    mode: ReportValue,
) -> Result<PerBinSelection> {
    let n_bits = check_scaled(dists)?;
    let lambdas: Vec<_> = dists.keys().copied().collect();
    validate_consistency_inputs(lambdas.len(), l, strategies)?;

    let size = 1usize << n_bits;
    let mut values = vec![0.0; size];
    let mut choices = vec![None; size];
    let mut reports = vec![None; size];
    for z in 0..size {
        if bin_is_all_zero(dists, z) {
            continue;
        }
        let points = bin_points(dists, &lambdas, z);
        let report = consistency_select(&points, l, strategies)?;
        values[z] = final_value(&report, &points, mode)?;
        choices[z] = Some(report.chosen);
        reports[z] = Some(report);
    }
    let quasi = QuasiDistribution::new(n_bits, values)?;
    Ok(PerBinSelection {
        distribution: clip_renormalize(&quasi)?,
        quasi,
        choices,
        reports,
    })
}
