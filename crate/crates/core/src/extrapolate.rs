//! Zero-noise extrapolation of per-scale-factor values, applied bin by bin to
//! whole distributions.
//!
//! Each strategy works on an arbitrary set of distinct scale factors. On the
//! two-point set `{1, 3}` linear extrapolation reduces to `(3p₁ − p₃)/2` and
//! exponential extrapolation to `p₁^{3/2} p₃^{−1/2}`; Richardson on `{1, 3, 5}`
//! uses the weights `{15/8, −5/4, 3/8}`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::circuits::ScaleFactor;
use crate::distribution::{BinValues, Distribution, QuasiDistribution};
use crate::error::{QemError, Result};

/// One noisy estimate at scale factor `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredPoint {
    pub lambda: f64,
    pub value: f64,
    /// Shots behind `value`; 0 marks an exact value. Not used for weighting.
    #[serde(default)]
    pub shots: u64,
}

impl MeasuredPoint {
    pub fn exact(lambda: f64, value: f64) -> Self {
        Self {
            lambda,
            value,
            shots: 0,
        }
    }
}

/// Extrapolation strategies, declared in tie-break precedence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Linear,
    Richardson,
    Exponential,
    PolyExp,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Linear,
        Strategy::Richardson,
        Strategy::Exponential,
        Strategy::PolyExp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Linear => "Linear",
            Strategy::Richardson => "Richardson",
            Strategy::Exponential => "Exponential",
            Strategy::PolyExp => "PolyExp",
        }
    }

    /// Fewest points the strategy accepts.
    pub fn min_points(self) -> usize {
        match self {
            Strategy::Linear | Strategy::Richardson | Strategy::Exponential => 2,
            Strategy::PolyExp => 3,
        }
    }

    /// Extrapolates to `λ = 0`. Richardson uses every point, so its order is
    /// `points.len() − 1`.
    pub fn extrapolate(self, points: &[MeasuredPoint]) -> Result<FitResult> {
        match self {
            Strategy::Linear => extrapolate_linear(points),
            Strategy::Richardson => extrapolate_richardson(points),
            Strategy::Exponential => extrapolate_exponential(points),
            Strategy::PolyExp => extrapolate_polyexp(points),
        }
    }

    /// Scale factors used when mitigating a distribution: the two smallest
    /// for Linear and Exponential, all of them for Richardson and PolyExp.
    pub fn select_lambdas(self, available: &[f64]) -> Result<Vec<f64>> {
        let mut sorted = available.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted.first() != Some(&1.0) {
            return Err(QemError::MissingLambda(1.0));
        }
        if sorted.len() < self.min_points() {
            return Err(QemError::NotEnoughPoints {
                strategy: self.name(),
                needed: self.min_points(),
                got: sorted.len(),
            });
        }
        match self {
            Strategy::Linear | Strategy::Exponential => Ok(sorted[..2].to_vec()),
            Strategy::Richardson | Strategy::PolyExp => Ok(sorted),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Strategy::Linear),
            "richardson" => Ok(Strategy::Richardson),
            "exponential" | "exp" => Ok(Strategy::Exponential),
            "polyexp" | "poly_exp" | "poly-exp" => Ok(Strategy::PolyExp),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inapplicable {
    NonPositiveValue,
    NonFiniteResult,
}

impl fmt::Display for Inapplicable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inapplicable::NonPositiveValue => f.write_str("nonpositive value"),
            Inapplicable::NonFiniteResult => f.write_str("non-finite result"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Extrapolated value at `λ = 0`; meaningful only when applicable.
    pub mitigated: f64,
    /// `(θ₀, θ₁, θ₂)` for the polynomial-exponential model.
    pub params: Option<[f64; 3]>,
    pub inapplicable: Option<Inapplicable>,
}

impl FitResult {
    fn value(mitigated: f64) -> Self {
        if mitigated.is_finite() {
            Self {
                mitigated,
                params: None,
                inapplicable: None,
            }
        } else {
            Self::not_applicable(Inapplicable::NonFiniteResult)
        }
    }

    fn not_applicable(reason: Inapplicable) -> Self {
        Self {
            mitigated: f64::NAN,
            params: None,
            inapplicable: Some(reason),
        }
    }

    pub fn applicable(&self) -> bool {
        self.inapplicable.is_none()
    }
}

fn check_points(strategy: Strategy, points: &[MeasuredPoint]) -> Result<()> {
    if points.len() < strategy.min_points() {
        return Err(QemError::NotEnoughPoints {
            strategy: strategy.name(),
            needed: strategy.min_points(),
            got: points.len(),
        });
    }
    for (i, p) in points.iter().enumerate() {
        if points[..i].iter().any(|q| q.lambda == p.lambda) {
            return Err(QemError::DuplicateLambda(p.lambda));
        }
    }
    Ok(())
}

/// Least-squares polynomial coefficients (constant term first).
fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    let design = DMatrix::from_fn(xs.len(), degree + 1, |r, c| xs[r].powi(c as i32));
    let rhs = DVector::from_column_slice(ys);
    let coeffs = if xs.len() == degree + 1 {
        design.lu().solve(&rhs)
    } else {
        design.svd(true, true).solve(&rhs, 1e-14).ok()
    };
    coeffs
        .map(|c| c.iter().copied().collect())
        .unwrap_or_else(|| vec![f64::NAN; degree + 1])
}

/// With two points, the line through them evaluated at `λ = 0`; with more,
/// the intercept of the least-squares line.
pub fn extrapolate_linear(points: &[MeasuredPoint]) -> Result<FitResult> {
    check_points(Strategy::Linear, points)?;
    if let [a, b] = points {
        let v = (b.lambda * a.value - a.lambda * b.value) / (b.lambda - a.lambda);
        return Ok(FitResult::value(v));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|p| (p.lambda, p.value)).unzip();
    Ok(FitResult::value(polyfit(&xs, &ys, 1)[0]))
}

/// `C_λ = ∏_{λ′ ≠ λ} λ′ / (λ′ − λ)`.
pub fn richardson_coefficients(lambdas: &[f64]) -> Result<Vec<f64>> {
    for (i, l) in lambdas.iter().enumerate() {
        if lambdas[..i].contains(l) {
            return Err(QemError::DuplicateLambda(*l));
        }
    }
    Ok(lambdas
        .iter()
        .map(|&l| {
            lambdas
                .iter()
                .filter(|&&other| other != l)
                .map(|&other| other / (other - l))
                .product()
        })
        .collect())
}

pub fn extrapolate_richardson(points: &[MeasuredPoint]) -> Result<FitResult> {
    check_points(Strategy::Richardson, points)?;
    let lambdas: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    let coeffs = richardson_coefficients(&lambdas)?;
    Ok(FitResult::value(
        coeffs.iter().zip(points).map(|(c, p)| c * p.value).sum(),
    ))
}

/// Fits `v = A e^{βλ}` through `log v` and returns `A`.
pub fn extrapolate_exponential(points: &[MeasuredPoint]) -> Result<FitResult> {
    check_points(Strategy::Exponential, points)?;
    if points.iter().any(|p| p.value <= 0.0) {
        return Ok(FitResult::not_applicable(Inapplicable::NonPositiveValue));
    }
    if let [a, b] = points {
        let span = b.lambda - a.lambda;
        let v = a.value.powf(b.lambda / span) * b.value.powf(-a.lambda / span);
        return Ok(FitResult::value(v));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|p| (p.lambda, p.value.ln())).unzip();
    Ok(FitResult::value(polyfit(&xs, &ys, 1)[0].exp()))
}

/// Fits `v = θ₀ exp(θ₁λ + θ₂λ²)` by least squares on `log v`; exact
/// interpolation with three points.
pub fn extrapolate_polyexp(points: &[MeasuredPoint]) -> Result<FitResult> {
    check_points(Strategy::PolyExp, points)?;
    if points.iter().any(|p| p.value <= 0.0) {
        return Ok(FitResult::not_applicable(Inapplicable::NonPositiveValue));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|p| (p.lambda, p.value.ln())).unzip();
    let c = polyfit(&xs, &ys, 2);
    let theta0 = c[0].exp();
    let mut fit = FitResult::value(theta0);
    if fit.applicable() {
        fit.params = Some([theta0, c[1], c[2]]);
    }
    Ok(fit)
}

/// Outcome of mitigating one bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinFlag {
    Ok,
    /// The bin is zero at every scale factor; its value is 0.
    AllZero,
    /// The requested strategy was inapplicable; the fallback was used.
    Fallback,
}

/// Noisy distributions keyed by scale factor.
pub type ScaledDistributions = BTreeMap<ScaleFactor, Distribution>;

pub(crate) fn check_scaled(dists: &ScaledDistributions) -> Result<usize> {
    let first = dists.values().next().ok_or(QemError::MissingLambda(1.0))?;
    if !dists.contains_key(&ScaleFactor::ONE) {
        return Err(QemError::MissingLambda(1.0));
    }
    let n_bits = first.n_bits();
    if let Some(d) = dists.values().find(|d| d.n_bits() != n_bits) {
        return Err(QemError::WidthMismatch {
            left: n_bits,
            right: d.n_bits(),
        });
    }
    Ok(n_bits)
}

/// Points for bin `z` at the given scale factors.
pub(crate) fn bin_points(dists: &ScaledDistributions, lambdas: &[ScaleFactor], z: usize) -> Vec<MeasuredPoint> {
    lambdas
        .iter()
        .map(|l| MeasuredPoint::exact(l.as_f64(), dists[l].get(z)))
        .collect()
}

/// Keys of `dists` chosen by `strategy`.
pub(crate) fn strategy_lambdas(strategy: Strategy, dists: &ScaledDistributions) -> Result<Vec<ScaleFactor>> {
    let available: Vec<f64> = dists.keys().map(|l| l.as_f64()).collect();
    let chosen = strategy.select_lambdas(&available)?;
    Ok(dists
        .keys()
        .copied()
        .filter(|l| chosen.contains(&l.as_f64()))
        .collect())
}

pub(crate) fn bin_is_all_zero(dists: &ScaledDistributions, z: usize) -> bool {
    dists.values().all(|d| d.get(z) == 0.0)
}

/// Mitigates each bin independently. Bins that are zero at every scale
/// factor stay zero without running any strategy.
pub fn mitigate_distribution(
    strategy: Strategy,
    dists: &ScaledDistributions,
    fallback: Strategy,
) -> Result<(QuasiDistribution, Vec<BinFlag>)> {
    let n_bits = check_scaled(dists)?;
    let primary_lambdas = strategy_lambdas(strategy, dists)?;
    let fallback_lambdas = strategy_lambdas(fallback, dists)?;

    let size = 1usize << n_bits;
    let mut values = vec![0.0; size];
    let mut flags = vec![BinFlag::Ok; size];
    for z in 0..size {
        if bin_is_all_zero(dists, z) {
            flags[z] = BinFlag::AllZero;
            continue;
        }
        let fit = strategy.extrapolate(&bin_points(dists, &primary_lambdas, z))?;
        if fit.applicable() {
            values[z] = fit.mitigated;
            continue;
        }
        let fit = fallback.extrapolate(&bin_points(dists, &fallback_lambdas, z))?;
        if !fit.applicable() {
            return Err(QemError::NoApplicableStrategy);
        }
        values[z] = fit.mitigated;
        flags[z] = BinFlag::Fallback;
    }
    Ok((QuasiDistribution::new(n_bits, values)?, flags))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostprocessMode {
    /// Clamp to `[0, 1]` and renormalize.
    #[default]
    ClipRenorm,
    /// Keep the quasi-distribution as is.
    Raw,
}

impl FromStr for PostprocessMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "clip_renorm" => Ok(PostprocessMode::ClipRenorm),
            "raw" => Ok(PostprocessMode::Raw),
            other => Err(format!("unknown postprocess mode {other:?}")),
        }
    }
}

/// A postprocessed mitigation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Processed {
    Normalized(Distribution),
    Raw(QuasiDistribution),
}

impl BinValues for Processed {
    fn n_bits(&self) -> usize {
        match self {
            Processed::Normalized(d) => d.n_bits(),
            Processed::Raw(q) => q.n_bits(),
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            Processed::Normalized(d) => d.probs(),
            Processed::Raw(q) => q.values(),
        }
    }
}

pub fn clip_renormalize(quasi: &QuasiDistribution) -> Result<Distribution> {
    let clipped: Vec<f64> = quasi.values().iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let sum: f64 = clipped.iter().sum();
    if sum <= 0.0 {
        return Err(QemError::AllZeroAfterClipping);
    }
    Distribution::new(quasi.n_bits(), clipped.into_iter().map(|v| v / sum).collect())
}

pub fn postprocess(quasi: &QuasiDistribution, mode: PostprocessMode) -> Result<Processed> {
    match mode {
        PostprocessMode::ClipRenorm => Ok(Processed::Normalized(clip_renormalize(quasi)?)),
        PostprocessMode::Raw => Ok(Processed::Raw(quasi.clone())),
    }
}
