//! Acceptance checks. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any fails.

use std::time::Instant;

use qem_core::circuits::{fold_circuit, trotter_defect, ScaleFactor, TfiParams};
use qem_core::estimator::{optimal_shot_allocation, LinearAnsatz};
use qem_core::extrapolate::{
    extrapolate_exponential, extrapolate_linear, richardson_coefficients, MeasuredPoint, ScaledDistributions,
    Strategy as Fit,
};
use qem_core::select::{consistency_select_per_bin, tvd, ReportValue};
use qem_core::simcore::{exact_unitary, operator_norm, Circuit, Gate};
use qem_core::Distribution;
use qem_harness::config::Preset;
use qem_harness::report::{records_csv, records_json, summary_csv, summary_json};
use qem_harness::run::CONSISTENCY;
use qem_harness::{run_sweep, summarize, ExperimentConfig, RunRecord, ShotMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RICHARDSON_TOL: f64 = 1e-12;
const SPECIALIZATION_TOL: f64 = 1e-12;
const EXACTNESS_TOL: f64 = 1e-9;
const ENUMERATION_TOL: f64 = 1e-12;
const ALLOCATION_TOL: f64 = 1e-18;
const FOLDING_TOL: f64 = 1e-10;
const DEFECT_RATIO_RANGE: (f64, f64) = (1.5, 2.5);
const DESK_RUNS: usize = 96;
const FAMILY_HIT_RATE: f64 = 0.95;
const TRIANGLE_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;
type Family = (Fit, Box<dyn Fn(f64) -> f64>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xACCE_0000 + tag)
}

fn pts(lambdas: &[f64], f: impl Fn(f64) -> f64) -> Vec<MeasuredPoint> {
    lambdas.iter().map(|&l| MeasuredPoint::exact(l, f(l))).collect()
}

fn random_dist(r: &mut ChaCha8Rng, n_bits: usize) -> Distribution {
    let w: Vec<f64> = (0..1 << n_bits).map(|_| r.random_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    Distribution::new(n_bits, w.iter().map(|v| v / s).collect()).unwrap()
}

fn richardson_coefficients_match() -> Outcome {
    let c = richardson_coefficients(&[1.0, 3.0, 5.0]).map_err(|e| e.to_string())?;
    let expected = [15.0 / 8.0, -5.0 / 4.0, 3.0 / 8.0];
    let worst = c.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let moments: Vec<f64> = (0..3)
        .map(|j| c.iter().zip([1.0f64, 3.0, 5.0]).map(|(c, l)| c * l.powi(j)).sum())
        .collect();
    let moment_err = (moments[0] - 1.0).abs().max(moments[1].abs()).max(moments[2].abs());
    check(
        worst <= RICHARDSON_TOL && moment_err <= RICHARDSON_TOL,
        format!("coefficients {c:?}, max error {worst:.1e}, moment error {moment_err:.1e}"),
    )
}

fn two_point_formulas_specialize() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (p1, p3): (f64, f64) = (r.random_range(1e-3..1.0), r.random_range(1e-3..1.0));
        let points = pts(&[1.0, 3.0], |l| if l == 1.0 { p1 } else { p3 });
        let lin = extrapolate_linear(&points).unwrap().mitigated;
        let exp = extrapolate_exponential(&points).unwrap().mitigated;
        let lin_ref = (3.0 * p1 - p3) / 2.0;
        let exp_ref = p1.powf(1.5) * p3.powf(-0.5);
        worst = worst
            .max((lin - lin_ref).abs() / lin_ref.abs().max(1.0))
            .max((exp - exp_ref).abs() / exp_ref.abs().max(1.0));
    }
    check(worst <= SPECIALIZATION_TOL, format!("1000 pairs, max relative error {worst:.1e}"))
}

fn exactness_classes() -> Outcome {
    let mut r = rng(3);
    let ls = [1.0, 3.0, 5.0];
    let mut worst = [0.0f64; 4];
    for _ in 0..200 {
        let a: f64 = r.random_range(0.05..1.0);
        let (b, c) = (r.random_range(-0.1..0.1), r.random_range(-0.01..0.01));
        let cases: [Family; 4] = [
            (Fit::Linear, Box::new(move |l| a + b * l)),
            (Fit::Richardson, Box::new(move |l| a + b * l + c * l * l)),
            (Fit::Exponential, Box::new(move |l| a * (b * l).exp())),
            (Fit::PolyExp, Box::new(move |l| a * (b * l + c * l * l).exp())),
        ];
        for (i, (s, f)) in cases.iter().enumerate() {
            let got = s.extrapolate(&pts(&ls, f)).unwrap().mitigated;
            worst[i] = worst[i].max((got - a).abs());
        }
    }
    check(
        worst.iter().all(|&w| w <= EXACTNESS_TOL),
        format!("200 instances per family, max errors {}", sci(&worst)),
    )
}

/// Mean and total variance of the one-round sign estimator by enumeration.
fn enumerate_one_round(coeffs: &[f64], dists: &[Distribution]) -> (Vec<f64>, f64, f64) {
    let gamma: f64 = coeffs.iter().map(|c| c.abs()).sum();
    let bins = dists[0].len();
    let mut mean = vec![0.0; bins];
    let mut second = vec![0.0; bins];
    for (c, d) in coeffs.iter().zip(dists) {
        for z in 0..bins {
            let prob = c.abs() / gamma * d.get(z);
            let value = gamma * c.signum();
            mean[z] += prob * value;
            second[z] += prob * value * value;
        }
    }
    let var = (0..bins).map(|z| second[z] - mean[z] * mean[z]).sum();
    (mean, var, gamma)
}

fn mc_estimator_unbiased() -> Outcome {
    let mut r = rng(4);
    let n_meas = 5000.0;
    let mut worst_bias: f64 = 0.0;
    let mut bound_ok = true;
    for _ in 0..50 {
        let k = r.random_range(2..=4);
        let coeffs: Vec<f64> = (0..k).map(|_| r.random_range(-2.0..2.0)).collect();
        let dists: Vec<Distribution> = (0..k).map(|_| random_dist(&mut r, 2)).collect();
        let ansatz = LinearAnsatz::from_distributions(&coeffs, &dists).unwrap();
        let exact = ansatz.exact_value().unwrap();
        let (mean, var_one_round, gamma) = enumerate_one_round(&coeffs, &dists);
        for (z, m) in mean.iter().enumerate() {
            let direct: f64 = coeffs.iter().zip(&dists).map(|(c, d)| c * d.get(z)).sum();
            worst_bias = worst_bias.max((m - direct).abs()).max((exact.get(z) - direct).abs());
        }
        // N independent rounds divide the single-round variance by N.
        bound_ok &= var_one_round / n_meas <= gamma * gamma / n_meas + ENUMERATION_TOL;
        bound_ok &= (gamma - ansatz.gamma()).abs() <= ENUMERATION_TOL;
    }
    check(
        worst_bias <= ENUMERATION_TOL && bound_ok,
        format!("50 instances, max bias {worst_bias:.1e}, variance bound held: {bound_ok}"),
    )
}

fn optimal_allocation() -> Outcome {
    let d = Distribution::uniform(1).unwrap();
    let ansatz = LinearAnsatz::from_distributions(&[1.5, -0.5], &[d.clone(), d]).unwrap();
    let plan = optimal_shot_allocation(&ansatz, 5000).map_err(|e| e.to_string())?;
    let bound = plan.variance_bound(&ansatz);
    let gamma_bound = ansatz.gamma().powi(2) / 5000.0;
    check(
        plan.allocations == [3750, 1250] && (bound - 8e-4).abs() <= ALLOCATION_TOL && (gamma_bound - 8e-4).abs() <= ALLOCATION_TOL,
        format!("plan {:?}, bound {bound:e}, Γ²/N {gamma_bound:e}", plan.allocations),
    )
}

fn random_circuit(r: &mut ChaCha8Rng) -> Circuit {
    let width = r.random_range(1..=4);
    let mut c = Circuit::new(width).unwrap();
    for _ in 0..r.random_range(1..=12) {
        let q = r.random_range(0..width);
        let theta = r.random_range(-3.2..3.2);
        let gate = match (r.random_range(0..6), width) {
            (0, _) => Gate::rx(theta, q),
            (1, _) => Gate::rz(theta, q),
            (2, _) => Gate::sx(q),
            (3, _) => Gate::x(q),
            (4, w) if w > 1 => Gate::cnot(q, (q + r.random_range(1..w)) % w),
            (_, w) if w > 1 => Gate::rzz(theta, q, (q + r.random_range(1..w)) % w),
            _ => Gate::sx(q).dagger(),
        };
        c.push(gate).unwrap();
    }
    c
}

fn folding_preserves_unitaries() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let c = random_circuit(&mut r);
        let u = exact_unitary(&c).unwrap();
        for l in [3, 5] {
            let folded = fold_circuit(&c, ScaleFactor::new(l).unwrap()).unwrap();
            worst = worst.max(operator_norm(&(exact_unitary(&folded).unwrap() - &u)));
        }
    }
    check(worst <= FOLDING_TOL, format!("30 circuits, λ ∈ {{3, 5}}, max operator-norm gap {worst:.1e}"))
}

fn trotter_defect_shrinks() -> Outcome {
    let defect = |m| trotter_defect(&TfiParams::new(3, 1.0, 1.0, 1.0, m)).unwrap();
    let ds: Vec<f64> = [1, 2, 4, 8, 16, 32].into_iter().map(defect).collect();
    let monotone = ds.windows(2).all(|w| w[1] <= w[0]);
    let ratio = ds[5] / defect(64);
    check(
        monotone && (DEFECT_RATIO_RANGE.0..=DEFECT_RATIO_RANGE.1).contains(&ratio),
        format!("defects {}, defect(32)/defect(64) = {ratio:.4}", sci(&ds)),
    )
}

fn desk_config(preset: Preset) -> ExperimentConfig {
    ExperimentConfig::default().with_preset(preset)
}

fn nversion_never_worst(records: &[RunRecord]) -> Outcome {
    let worst: Vec<String> = records
        .iter()
        .filter(|r| r.nversion_rank == r.worst_rank())
        .map(|r| format!("(J={}, B={}, M={})", r.coupling, r.field, r.trotter_steps))
        .collect();
    let hist = summarize(records).row(qem_harness::sweep::NVERSION, None).unwrap().counts.clone();
    check(
        records.len() == DESK_RUNS && worst.is_empty(),
        format!("{} runs, N-version rank histogram {hist:?}, worst in {}", records.len(), worst.join(" ")),
    )
}

fn synthetic_family_identification() -> (usize, usize) {
    let mut r = rng(9);
    let lambdas = [1u32, 3, 5, 7, 9];
    let (mut hits, mut total) = (0, 0);
    for _ in 0..50 {
        // Seven bins follow one family each; the last bin absorbs the remainder.
        let families: Vec<Family> = (0..7)
            .map(|_| {
                let a: f64 = r.random_range(0.04..0.08);
                let f: Family = match r.random_range(0..4) {
                    0 => {
                        let b = r.random_range(0.0005..0.003) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
                        (Fit::Linear, Box::new(move |l| a + b * l))
                    }
                    1 => {
                        let b = r.random_range(-0.003..0.0);
                        let c = r.random_range(0.0002..0.0005);
                        (Fit::Richardson, Box::new(move |l| a + b * l + c * l * l))
                    }
                    2 => {
                        let beta = r.random_range(-0.2..-0.01);
                        (Fit::Exponential, Box::new(move |l| a * (beta * l).exp()))
                    }
                    _ => {
                        let t1 = r.random_range(-0.15..0.0);
                        let t2 = r.random_range(0.003..0.006) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
                        (Fit::PolyExp, Box::new(move |l| a * (t1 * l + t2 * l * l).exp()))
                    }
                };
                f
            })
            .collect();
        let mut dists = ScaledDistributions::new();
        for l in lambdas {
            let mut probs: Vec<f64> = families.iter().map(|(_, f)| f(f64::from(l))).collect();
            probs.push(1.0 - probs.iter().sum::<f64>());
            dists.insert(ScaleFactor::new(l).unwrap(), Distribution::new(3, probs).unwrap());
        }
        let sel = consistency_select_per_bin(&dists, 3, &Fit::ALL, ReportValue::FullFit).unwrap();
        for (z, (family, _)) in families.iter().enumerate() {
            total += 1;
            hits += usize::from(sel.choices[z] == Some(*family));
        }
    }
    (hits, total)
}

fn consistency_plurality(records: &[RunRecord]) -> Outcome {
    let summary = summarize(records);
    let firsts = |m: &str| summary.row(m, None).map_or(0, |r| r.firsts());
    let ours = firsts(CONSISTENCY);
    let best_fixed = [Fit::Linear, Fit::Richardson, Fit::Exponential]
        .into_iter()
        .map(|s| (s.name(), firsts(s.name())))
        .max_by_key(|(_, n)| *n)
        .unwrap();
    let (hits, total) = synthetic_family_identification();
    let rate = hits as f64 / total as f64;
    let table: Vec<String> = summary
        .methods()
        .iter()
        .filter(|m| **m != qem_harness::sweep::NVERSION)
        .map(|m| format!("{m}={}", firsts(m)))
        .collect();
    check(
        records.len() == DESK_RUNS && ours > best_fixed.1 && rate >= FAMILY_HIT_RATE,
        format!(
            "first places {}; synthetic per-bin identification {hits}/{total} = {:.1}%",
            table.join(" "),
            100.0 * rate
        ),
    )
}

fn tvd_metric() -> Outcome {
    let mut r = rng(10);
    let mut ok = true;
    let mut worst_excess: f64 = f64::NEG_INFINITY;
    for _ in 0..500 {
        let [p, q, s] = [0, 1, 2].map(|_| random_dist(&mut r, 3));
        let pq = tvd(&p, &q).unwrap();
        ok &= pq == tvd(&q, &p).unwrap();
        ok &= tvd(&p, &p).unwrap() == 0.0;
        let excess = pq - tvd(&p, &s).unwrap() - tvd(&s, &q).unwrap();
        worst_excess = worst_excess.max(excess);
    }
    check(
        ok && worst_excess <= TRIANGLE_TOL,
        format!("500 triples, symmetry and identity exact: {ok}, worst triangle excess {worst_excess:.1e}"),
    )
}

fn persisted(records: &[RunRecord]) -> Vec<String> {
    let summary = summarize(records);
    vec![
        records_csv(records).unwrap(),
        records_json(records).unwrap(),
        summary_csv(&summary).unwrap(),
        summary_json(&summary).unwrap(),
    ]
}

fn deterministic_sweeps(nversion: &[RunRecord], consistency: &[RunRecord]) -> Outcome {
    let mut identical = persisted(nversion) == persisted(&run_sweep(&desk_config(Preset::NversionExperiment)).unwrap());
    identical &= persisted(consistency) == persisted(&run_sweep(&desk_config(Preset::ConsistencyExperiment)).unwrap());
    let sampled = ExperimentConfig {
        shot_mode: ShotMode::Sampled,
        ..desk_config(Preset::ConsistencyExperiment)
    };
    identical &= persisted(&run_sweep(&sampled).unwrap()) == persisted(&run_sweep(&sampled).unwrap());
    check(identical, format!("exact and sampled desk sweeps reproduced byte for byte: {identical}"))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {id:>2} {name} ({secs:.2}s): {detail}");
    };

    report(1, "Richardson coefficients", &mut richardson_coefficients_match);
    report(2, "two-point formula specialization", &mut two_point_formulas_specialize);
    report(3, "exactness classes", &mut exactness_classes);
    report(4, "MC estimator unbiased and bounded", &mut mc_estimator_unbiased);
    report(5, "optimal shot allocation", &mut optimal_allocation);
    report(6, "folding preserves unitaries", &mut folding_preserves_unitaries);
    report(7, "Trotter defect shrinks with M", &mut trotter_defect_shrinks);

    let mut nversion = Vec::new();
    report(8, "N-version pick never ranked worst", &mut || {
        nversion = run_sweep(&desk_config(Preset::NversionExperiment)).map_err(|e| e.to_string())?;
        nversion_never_worst(&nversion)
    });
    let mut consistency = Vec::new();
    report(9, "consistency method has the most first places", &mut || {
        consistency = run_sweep(&desk_config(Preset::ConsistencyExperiment)).map_err(|e| e.to_string())?;
        consistency_plurality(&consistency)
    });
    report(10, "TVD is a metric", &mut tvd_metric);
    report(11, "sweep determinism", &mut || deterministic_sweeps(&nversion, &consistency));

    println!("{} of 11 criteria passed", 11 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
