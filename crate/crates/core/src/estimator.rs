//! Finite-shot sampling and linear-ansatz estimation of mitigated
//! distributions.
//!
//! A [`LinearAnsatz`] writes the mitigated state as `Σ_k c_k ρ_k`. Two
//! estimators are provided: the Monte-Carlo one, which draws term `k` with
//! probability `|c_k|/Γ` per shot and accumulates `sgn(c_k)`, and the direct
//! one, which measures every term with its own shot budget and combines the
//! empirical distributions linearly. No clipping happens at this layer.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};

use crate::circuits::{amplify, Amplification, ScaleFactor};
use crate::distribution::{Counts, Distribution, QuasiDistribution};
use crate::error::{QemError, Result};
use crate::simcore::{output_distribution, simulate, Circuit, NoiseModel};

/// Deterministic RNG used for every sampling routine.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sample_counts(dist: &Distribution, n_shots: u64, seed: u64) -> Counts {
    sample_counts_with(dist, n_shots, &mut rng_from_seed(seed))
}

/// Multinomial draw via sequential conditional binomials.
pub fn sample_counts_with<R: Rng + ?Sized>(dist: &Distribution, n_shots: u64, rng: &mut R) -> Counts {
    let probs = dist.probs();
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = n_shots;
    let mut mass_left = 1.0_f64;
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (z, &p) in probs.iter().enumerate().take(last) {
        if remaining == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let conditional = (p / mass_left).clamp(0.0, 1.0);
        let drawn = Binomial::new(remaining, conditional)
            .expect("conditional probability lies in [0, 1]")
            .sample(rng);
        counts[z] = drawn;
        remaining -= drawn;
        mass_left -= p;
    }
    counts[last] += remaining;
    Counts::new(dist.n_bits(), counts).expect("bin count matches the distribution")
}

pub fn empirical_distribution(counts: &Counts) -> Result<Distribution> {
    let total = counts.total();
    if total == 0 {
        return Err(QemError::ZeroShots);
    }
    let probs = counts
        .counts()
        .iter()
        .map(|&c| c as f64 / total as f64)
        .collect();
    Distribution::new(counts.n_bits(), probs)
}

/// Where a term's noisy distribution comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Source {
    /// A precomputed distribution.
    Distribution(Distribution),
    /// A circuit simulated on demand with its noise amplified by `scale`.
    Circuit {
        circuit: Circuit,
        noise: NoiseModel,
        scale: ScaleFactor,
        amplification: Amplification,
    },
}

impl Source {
    pub fn resolve(&self) -> Result<Distribution> {
        match self {
            Source::Distribution(d) => Ok(d.clone()),
            Source::Circuit {
                circuit,
                noise,
                scale,
                amplification,
            } => {
                let (amplified, scaled_noise) = amplify(circuit, noise, *scale, *amplification)?;
                let rho = simulate(&amplified, &scaled_noise)?;
                output_distribution(&rho, scaled_noise.readout_flip)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzTerm {
    pub coefficient: f64,
    pub source: Source,
}

/// `ρ_QEM = Σ_k c_k ρ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearAnsatz {
    terms: Vec<AnsatzTerm>,
}

impl LinearAnsatz {
    pub fn new(terms: Vec<AnsatzTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(QemError::InvalidAnsatz("no terms".into()));
        }
        if terms.iter().any(|t| !t.coefficient.is_finite()) {
            return Err(QemError::InvalidAnsatz("non-finite coefficient".into()));
        }
        let ansatz = Self { terms };
        if ansatz.gamma() <= 0.0 {
            return Err(QemError::InvalidAnsatz("all coefficients are zero".into()));
        }
        Ok(ansatz)
    }

    /// Ansatz over precomputed distributions.
    pub fn from_distributions(coefficients: &[f64], dists: &[Distribution]) -> Result<Self> {
        if coefficients.len() != dists.len() {
            return Err(QemError::InvalidAnsatz(format!(
                "{} coefficients for {} distributions",
                coefficients.len(),
                dists.len()
            )));
        }
        Self::new(
            coefficients
                .iter()
                .zip(dists)
                .map(|(&c, d)| AnsatzTerm {
                    coefficient: c,
                    source: Source::Distribution(d.clone()),
                })
                .collect(),
        )
    }

    pub fn terms(&self) -> &[AnsatzTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coefficient).collect()
    }

    /// `Γ = Σ_k |c_k|`.
    pub fn gamma(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// Sampling probabilities `|c_k| / Γ`.
    pub fn term_probabilities(&self) -> Vec<f64> {
        let gamma = self.gamma();
        self.terms.iter().map(|t| t.coefficient.abs() / gamma).collect()
    }

    /// Resolves every source and checks that their widths agree.
    pub fn resolve(&self) -> Result<Vec<Distribution>> {
        let dists = self
            .terms
            .iter()
            .map(|t| t.source.resolve())
            .collect::<Result<Vec<_>>>()?;
        let width = dists[0].n_bits();
        if let Some(d) = dists.iter().find(|d| d.n_bits() != width) {
            return Err(QemError::WidthMismatch {
                left: width,
                right: d.n_bits(),
            });
        }
        Ok(dists)
    }

    /// `Σ_k c_k p^(k)` evaluated on exact distributions.
    pub fn exact_value(&self) -> Result<QuasiDistribution> {
        let dists = self.resolve()?;
        combine(&self.coefficients(), &dists)
    }
}

fn combine(coefficients: &[f64], dists: &[Distribution]) -> Result<QuasiDistribution> {
    let n_bits = dists[0].n_bits();
    let mut values = vec![0.0; 1 << n_bits];
    for (c, d) in coefficients.iter().zip(dists) {
        for (v, p) in values.iter_mut().zip(d.probs()) {
            *v += c * p;
        }
    }
    QuasiDistribution::new(n_bits, values)
}

/// Monte-Carlo estimate `p̂_z = Γ · (1/N) Σ_rounds sgn(c_k) [outcome = z]`.
/// Returns the estimate together with `Γ`.
pub fn mc_estimate(ansatz: &LinearAnsatz, n_meas: u64, seed: u64) -> Result<(QuasiDistribution, f64)> {
    if n_meas == 0 {
        return Err(QemError::ZeroShots);
    }
    let dists = ansatz.resolve()?;
    let gamma = ansatz.gamma();
    let term_picker =
        WeightedIndex::new(ansatz.term_probabilities()).map_err(|e| QemError::InvalidAnsatz(e.to_string()))?;
    let outcome_pickers = dists
        .iter()
        .map(|d| WeightedIndex::new(d.probs()).map_err(|e| QemError::InvalidDistribution(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let signs: Vec<f64> = ansatz.terms().iter().map(|t| t.coefficient.signum()).collect();

    let mut rng = rng_from_seed(seed);
    let mut accumulator = vec![0.0_f64; dists[0].len()];
    for _ in 0..n_meas {
        let k = term_picker.sample(&mut rng);
        let z = outcome_pickers[k].sample(&mut rng);
        accumulator[z] += signs[k];
    }
    let scale = gamma / n_meas as f64;
    let values = accumulator.into_iter().map(|a| a * scale).collect();
    Ok((QuasiDistribution::new(dists[0].n_bits(), values)?, gamma))
}

/// Per-term shot budget `N^(k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub allocations: Vec<u64>,
}

impl ShotPlan {
    pub fn new(allocations: Vec<u64>) -> Self {
        Self { allocations }
    }

    pub fn total(&self) -> u64 {
        self.allocations.iter().sum()
    }

    /// `Σ_k c_k² / N^(k)`.
    pub fn variance_bound(&self, ansatz: &LinearAnsatz) -> f64 {
        ansatz
            .terms()
            .iter()
            .zip(&self.allocations)
            .map(|(t, &n)| t.coefficient * t.coefficient / n as f64)
            .sum()
    }

    fn check_against(&self, ansatz: &LinearAnsatz) -> Result<()> {
        if self.allocations.len() != ansatz.len() {
            return Err(QemError::PlanLengthMismatch {
                plan: self.allocations.len(),
                terms: ansatz.len(),
            });
        }
        if self.allocations.contains(&0) {
            return Err(QemError::TooFewShots {
                total: self.total(),
                terms: ansatz.len(),
            });
        }
        Ok(())
    }
}

/// Samples `N^(k)` shots from each term and returns `Σ_k c_k p̂^(k)`.
pub fn direct_estimate(ansatz: &LinearAnsatz, plan: &ShotPlan, seed: u64) -> Result<QuasiDistribution> {
    plan.check_against(ansatz)?;
    let dists = ansatz.resolve()?;
    let mut rng = rng_from_seed(seed);
    let empirical = dists
        .iter()
        .zip(&plan.allocations)
        .map(|(d, &n)| empirical_distribution(&sample_counts_with(d, n, &mut rng)))
        .collect::<Result<Vec<_>>>()?;
    combine(&ansatz.coefficients(), &empirical)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectVariance {
    /// `Var[p̂_z] = Σ_k c_k² (p_z^(k) − (p_z^(k))²) / N^(k)`.
    pub per_bin: Vec<f64>,
    pub total: f64,
    /// `Σ_k c_k² / N^(k)`; always at least `total`.
    pub bound: f64,
}

pub fn variance_direct(
    ansatz: &LinearAnsatz,
    plan: &ShotPlan,
    dists: &[Distribution],
) -> Result<DirectVariance> {
    plan.check_against(ansatz)?;
    if dists.len() != ansatz.len() {
        return Err(QemError::PlanLengthMismatch {
            plan: dists.len(),
            terms: ansatz.len(),
        });
    }
    let width = dists[0].len();
    let mut per_bin = vec![0.0; width];
    for ((term, d), &n) in ansatz.terms().iter().zip(dists).zip(&plan.allocations) {
        let weight = term.coefficient * term.coefficient / n as f64;
        for (v, &p) in per_bin.iter_mut().zip(d.probs()) {
            *v += weight * (p - p * p);
        }
    }
    let total = per_bin.iter().sum();
    Ok(DirectVariance {
        per_bin,
        total,
        bound: plan.variance_bound(ansatz),
    })
}

/// Shots proportional to `|c_k|`, rounded by largest remainder with ties
/// going to the lower term index. A term whose quota rounds to zero is
/// raised to one shot, taken from the largest allocation.
pub fn optimal_shot_allocation(ansatz: &LinearAnsatz, n_total: u64) -> Result<ShotPlan> {
    let terms = ansatz.len();
    if n_total < terms as u64 {
        return Err(QemError::TooFewShots {
            total: n_total,
            terms,
        });
    }
    let quotas: Vec<f64> = ansatz
        .term_probabilities()
        .iter()
        .map(|p| p * n_total as f64)
        .collect();
    let mut allocations: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = allocations.iter().sum();
    let mut order: Vec<usize> = (0..terms).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take((n_total - assigned) as usize) {
        allocations[k] += 1;
    }
    while let Some(k) = allocations.iter().position(|&n| n == 0) {
        let donor = (0..terms)
            .max_by(|&a, &b| allocations[a].cmp(&allocations[b]).then(b.cmp(&a)))
            .expect("at least one term");
        allocations[donor] -= 1;
        allocations[k] = 1;
    }
    Ok(ShotPlan { allocations })
}
