//! Monte-Carlo sweeps over instances, policies, intensities and seeds.
//!
//! Seeds are paired across policies: for a given `(instance, q, seed)` every
//! policy sees the same disturbance realization.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::disturbance::{allstop_expectation, lower_bound_expectation, DisturbanceProcess};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::policies::Policy;
use crate::simulator::{metrics, run, RunConfig};

/// First line of every results file.
pub const CSV_VERSION: &str = "# rmtrack bench v1";

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub policies: Vec<Policy>,
    pub intensities: Vec<f64>,
    /// Seeds `seed_base .. seed_base + seeds` per cell.
    pub seeds: u64,
    pub seed_base: u64,
    pub block_len: usize,
    pub max_steps: Option<usize>,
    /// Worker threads; `None` uses rayon's default pool.
    pub workers: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            policies: Policy::ALL.to_vec(),
            intensities: crate::disturbance::default_intensity_grid(),
            seeds: 100,
            seed_base: 0,
            block_len: 1,
            max_steps: None,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub policy: String,
    pub q: f64,
    pub seed: u64,
    pub completed: bool,
    /// Empty when some robot never arrived.
    pub makespan: Option<usize>,
    /// Mean over the robots that arrived.
    pub mean_travel_time: Option<f64>,
    /// `mean_i(c_i) / (1 − q)`, with `c_i` robot `i`'s planned arrival.
    pub lower_bound: f64,
    /// `T / (1 − q)^n`.
    pub allstop_expectation: f64,
    pub collisions: usize,
}

/// Planned mean travel time `mean_i(c_i)`.
pub fn planned_mean_travel(inst: &Instance) -> f64 {
    let c = inst.completion_indices();
    c.iter().sum::<usize>() as f64 / c.len().max(1) as f64
}

fn run_cell(
    inst: &Instance,
    policy: Policy,
    q: f64,
    seed: u64,
    cfg: &BenchConfig,
) -> Result<BenchRow> {
    let noise = DisturbanceProcess::bernoulli_blocks(q, cfg.block_len, seed)?;
    let mut run_cfg = RunConfig::default().unrecorded();
    run_cfg.max_steps = cfg.max_steps;
    let trace = run(inst, policy, &noise, &run_cfg)?;
    let m = metrics(&trace);
    Ok(BenchRow {
        instance: inst.name.clone(),
        policy: policy.name().to_string(),
        q,
        seed,
        completed: m.completed,
        makespan: m.makespan,
        mean_travel_time: m.mean_travel_time(),
        lower_bound: lower_bound_expectation(planned_mean_travel(inst), q)?,
        allstop_expectation: allstop_expectation(inst.horizon() as f64, q, inst.robots())?,
        collisions: m.collisions.unwrap_or(0),
    })
}

/// Runs every `(instance, policy, q, seed)` cell. Rows come back sorted by
/// instance name, policy name, intensity and seed.
pub fn run_bench(instances: &[Instance], cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.seeds == 0 {
        return Err(Error::Config(
            "at least one seed per cell is required".into(),
        ));
    }
    if cfg.workers == Some(0) {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let mut cells = Vec::new();
    for inst in instances {
        for &policy in &cfg.policies {
            for &q in &cfg.intensities {
                for seed in cfg.seed_base..cfg.seed_base + cfg.seeds {
                    cells.push((inst, policy, q, seed));
                }
            }
        }
    }
    cells.sort_by(|a, b| {
        a.0.name
            .cmp(&b.0.name)
            .then(a.1.name().cmp(b.1.name()))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    let work = || {
        cells
            .par_iter()
            .map(|&(inst, policy, q, seed)| run_cell(inst, policy, q, seed, cfg))
            .collect::<Result<Vec<_>>>()
    };
    match cfg.workers {
        None => work(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
    }
}

/// Aggregate over the seeds of one `(instance, policy, q)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub instance: String,
    pub policy: String,
    pub q: f64,
    pub runs: usize,
    pub completed: usize,
    /// Over completed runs.
    pub mean_makespan: Option<f64>,
    /// Over completed runs.
    pub mean_travel_time: Option<f64>,
    pub lower_bound: f64,
    pub allstop_expectation: f64,
    /// Standard deviation of `mean_travel_time − lower_bound` over completed runs.
    pub sd_diff_lower_bound: Option<f64>,
    pub collisions: usize,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn sample_sd(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    if values.len() < 2 {
        return Some(0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

/// Groups sorted rows into per-cell aggregates.
pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for group in
        rows.chunk_by(|a, b| a.instance == b.instance && a.policy == b.policy && a.q == b.q)
    {
        let head = &group[0];
        let done: Vec<&BenchRow> = group.iter().filter(|r| r.completed).collect();
        let makespans: Vec<f64> = done
            .iter()
            .filter_map(|r| r.makespan)
            .map(|m| m as f64)
            .collect();
        let travel: Vec<f64> = done.iter().filter_map(|r| r.mean_travel_time).collect();
        let diffs: Vec<f64> = travel.iter().map(|t| t - head.lower_bound).collect();
        out.push(SummaryRow {
            instance: head.instance.clone(),
            policy: head.policy.clone(),
            q: head.q,
            runs: group.len(),
            completed: done.len(),
            mean_makespan: mean(&makespans),
            mean_travel_time: mean(&travel),
            lower_bound: head.lower_bound,
            allstop_expectation: head.allstop_expectation,
            sd_diff_lower_bound: sample_sd(&diffs),
            collisions: group.iter().map(|r| r.collisions).sum(),
        });
    }
    out
}

/// Writes the version comment, the per-run rows, a blank line and the
/// summary block.
pub fn write_csv<W: Write>(mut out: W, rows: &[BenchRow]) -> Result<()> {
    writeln!(out, "{CSV_VERSION}")?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for row in rows {
            w.serialize(row).map_err(csv_error)?;
        }
        if rows.is_empty() {
            w.write_record(RUN_COLUMNS).map_err(csv_error)?;
        }
        w.flush()?;
    }
    writeln!(out)?;
    writeln!(out, "# summary")?;
    let summary = summarize(rows);
    let mut w = csv::Writer::from_writer(&mut out);
    for row in &summary {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub const RUN_COLUMNS: [&str; 10] = [
    "instance",
    "policy",
    "q",
    "seed",
    "completed",
    "makespan",
    "mean_travel_time",
    "lower_bound",
    "allstop_expectation",
    "collisions",
];

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    fn small() -> BenchConfig {
        BenchConfig {
            intensities: vec![0.0, 0.25, 0.5],
            seeds: 5,
            ..Default::default()
        }
    }

    #[test]
    fn row_count_and_order() {
        let rows = run_bench(&[bundled::cross2()], &small()).unwrap();
        assert_eq!(rows.len(), 3 * 3 * 5);
        assert_eq!(rows[0].policy, "allstop");
        assert_eq!(rows[0].q, 0.0);
        assert_eq!(rows.last().unwrap().policy, "rmtrack");
        assert!(rows
            .windows(2)
            .all(|w| (w[0].policy.as_str(), w[0].q, w[0].seed)
                <= (w[1].policy.as_str(), w[1].q, w[1].seed)));
    }

    #[test]
    fn undisturbed_rows_match_the_plan() {
        let rows = run_bench(&[bundled::cross2()], &small()).unwrap();
        for r in rows.iter().filter(|r| r.q == 0.0) {
            assert_eq!(r.makespan, Some(16));
            assert_eq!(r.mean_travel_time, Some(13.0));
            assert_eq!(r.lower_bound, 13.0);
            assert_eq!(r.allstop_expectation, 16.0);
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let inst = [bundled::cross2(), bundled::mini_cross()];
        let mut a = Vec::new();
        let mut b = Vec::new();
        let one = BenchConfig {
            workers: Some(1),
            ..small()
        };
        let four = BenchConfig {
            workers: Some(4),
            ..small()
        };
        write_csv(&mut a, &run_bench(&inst, &one).unwrap()).unwrap();
        write_csv(&mut b, &run_bench(&inst, &four).unwrap()).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_VERSION));
        assert_eq!(lines.next(), Some(RUN_COLUMNS.join(",").as_str()));
        assert!(text.contains("\n\n# summary\n"));
    }

    #[test]
    fn summary_statistics() {
        assert_eq!(sample_sd(&[1.0, 3.0]), Some(2f64.sqrt()));
        assert_eq!(sample_sd(&[]), None);
        let rows = run_bench(&[bundled::cross2()], &small()).unwrap();
        let summary = summarize(&rows);
        assert_eq!(summary.len(), 9);
        assert!(summary.iter().all(|s| s.runs == 5));
    }
}
