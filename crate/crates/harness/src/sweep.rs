//! Parameter sweeps over the `(J, B, M)` grid and rank summaries.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::run::{run_seed, run_single, RunRecord};

/// Method name under which the N-version pick's rank is tallied.
pub const NVERSION: &str = "NVersion";

/// Runs every grid point in parallel. Records are ordered by `(J, B, M)`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let grid: Vec<(u32, u32, u32)> = config
        .j_range
        .values()
        .flat_map(|j| config.b_range.values().map(move |b| (j, b)))
        .flat_map(|(j, b)| config.m_range.values().map(move |m| (j, b, m)))
        .collect();
    grid.into_par_iter()
        .map(|(j, b, m)| {
            let (j, b) = (f64::from(j), f64::from(b));
            run_single(config, j, b, m, run_seed(config.master_seed, j, b, m))
        })
        .collect()
}

/// Rank histogram for one method, optionally restricted to one `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRow {
    pub method: String,
    /// `None` aggregates over all Trotter step counts.
    pub trotter_steps: Option<u32>,
    /// `counts[r - 1]` is the number of runs where the method placed `r`.
    pub counts: Vec<usize>,
}

impl RankRow {
    pub fn firsts(&self) -> usize {
        self.counts.first().copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub runs: usize,
    pub n_candidates: usize,
    pub rows: Vec<RankRow>,
}

impl SweepSummary {
    pub fn row(&self, method: &str, trotter_steps: Option<u32>) -> Option<&RankRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.trotter_steps == trotter_steps)
    }

    /// Methods in candidate order, followed by [`NVERSION`].
    pub fn methods(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.method.as_str()) {
                seen.push(&r.method);
            }
        }
        seen
    }
}

pub fn summarize(records: &[RunRecord]) -> SweepSummary {
    let n_candidates = records.iter().map(RunRecord::worst_rank).max().unwrap_or(0);
    let mut methods: Vec<String> = Vec::new();
    for r in records {
        for c in &r.candidates {
            if !methods.contains(&c.name) {
                methods.push(c.name.clone());
            }
        }
    }
    methods.push(NVERSION.to_string());

    let mut table: BTreeMap<(usize, Option<u32>), Vec<usize>> = BTreeMap::new();
    let mut tally = |method: usize, m: u32, rank: usize| {
        for key in [(method, Some(m)), (method, None)] {
            table.entry(key).or_insert_with(|| vec![0; n_candidates])[rank - 1] += 1;
        }
    };
    for r in records {
        for c in &r.candidates {
            let i = methods.iter().position(|m| *m == c.name).expect("collected above");
            tally(i, r.trotter_steps, c.rank);
        }
        tally(methods.len() - 1, r.trotter_steps, r.nversion_rank);
    }

    let rows = table
        .into_iter()
        .map(|((i, m), counts)| RankRow {
            method: methods[i].clone(),
            trotter_steps: m,
            counts,
        })
        .collect();
    SweepSummary {
        runs: records.len(),
        n_candidates,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::IntRange;

    #[test]
    fn small_sweep_is_ordered_and_tallied() {
        let config = ExperimentConfig {
            n_qubits: 3,
            j_range: IntRange::new(1, 2),
            b_range: IntRange::new(1, 1),
            m_range: IntRange::new(2, 3),
            ..ExperimentConfig::default()
        };
        let records = run_sweep(&config).unwrap();
        let keys: Vec<_> = records.iter().map(|r| (r.coupling, r.field, r.trotter_steps)).collect();
        assert_eq!(keys, vec![(1.0, 1.0, 2), (1.0, 1.0, 3), (2.0, 1.0, 2), (2.0, 1.0, 3)]);

        let s = summarize(&records);
        assert_eq!(s.runs, 4);
        assert_eq!(s.n_candidates, 4);
        assert_eq!(s.methods(), vec!["Linear", "Richardson", "Exponential", "PolyExp", NVERSION]);
        for method in s.methods() {
            assert_eq!(s.row(method, None).unwrap().total(), 4);
            assert_eq!(s.row(method, Some(2)).unwrap().total(), 2);
        }
        let firsts: usize = s.methods()[..4].iter().map(|m| s.row(m, None).unwrap().firsts()).sum();
        assert_eq!(firsts, 4);
    }
}
