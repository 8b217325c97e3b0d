//! Delaying disturbances `δ_i(t)` and the closed-form travel-time
//! expectations they induce.
//!
//! `true` means the robot is free to move during step `t`; `false` forces it
//! to hold its plan position.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default sweep grid of disturbance intensities, 0 % to 50 % in 5 % steps.
pub fn default_intensity_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum DisturbanceProcess {
    /// No disturbance at all.
    None,
    /// Every `block_len` steps each robot is independently stopped for the
    /// whole block with probability `q`.
    BernoulliBlock { q: f64, block_len: usize, seed: u64 },
    /// Fixed table, all-ones past its end.
    Scripted(Script),
}

impl DisturbanceProcess {
    pub fn bernoulli(q: f64, seed: u64) -> Result<Self> {
        Self::bernoulli_blocks(q, 1, seed)
    }

    pub fn bernoulli_blocks(q: f64, block_len: usize, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::Intensity(q));
        }
        if block_len == 0 {
            return Err(Error::Disturbance("block_len must be at least 1".into()));
        }
        Ok(DisturbanceProcess::BernoulliBlock { q, block_len, seed })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DisturbanceProcess::None => "none",
            DisturbanceProcess::BernoulliBlock { .. } => "bernoulli_block",
            DisturbanceProcess::Scripted(_) => "scripted",
        }
    }

    /// Intensity for reporting; zero for non-random processes.
    pub fn intensity(&self) -> f64 {
        match self {
            DisturbanceProcess::BernoulliBlock { q, .. } => *q,
            _ => 0.0,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            DisturbanceProcess::BernoulliBlock { seed, .. } => *seed,
            _ => 0,
        }
    }

    /// `δ_i(t)`.
    pub fn delta(&self, i: usize, t: usize) -> bool {
        match self {
            DisturbanceProcess::None => true,
            DisturbanceProcess::BernoulliBlock { q, block_len, seed } => {
                block_passes(*seed, i, t / block_len, *q)
            }
            DisturbanceProcess::Scripted(script) => script.get(i, t),
        }
    }

    /// Signals of all `n` robots at step `t`.
    pub fn deltas(&self, n: usize, t: usize) -> Vec<bool> {
        (0..n).map(|i| self.delta(i, t)).collect()
    }

    /// Sufficient check that no robot is stopped forever: every row ends in
    /// an all-ones suffix that starts before `horizon`.
    pub fn is_non_prohibitive(&self, horizon: usize) -> Result<bool> {
        match self {
            DisturbanceProcess::None => Ok(true),
            DisturbanceProcess::Scripted(script) => {
                Ok(script
                    .rows
                    .iter()
                    .all(|row| match row.iter().rposition(|&d| !d) {
                        None => true,
                        Some(last_stop) => last_stop + 1 < horizon,
                    }))
            }
            DisturbanceProcess::BernoulliBlock { .. } => Err(Error::Disturbance(
                "bernoulli disturbances are non-prohibitive only almost surely".into(),
            )),
        }
    }
}

/// Counter-based draw: the ChaCha stream is keyed by the seed and robot
/// index, and the block index selects the position inside the stream, so any
/// `(seed, i, block)` can be evaluated independently.
fn block_passes(seed: u64, robot: usize, block: usize, q: f64) -> bool {
    if q <= 0.0 {
        return true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(robot as u64);
    rng.set_word_pos(block as u128 * 2);
    let u: f64 = rng.gen();
    u >= q
}

/// Scripted disturbance table; rows are robots, columns steps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Script {
    rows: Vec<Vec<bool>>,
}

impl Script {
    pub fn new(rows: Vec<Vec<bool>>) -> Result<Self> {
        if let Some(first) = rows.first() {
            if rows.iter().any(|r| r.len() != first.len()) {
                return Err(Error::Disturbance(
                    "scripted table rows differ in length".into(),
                ));
            }
        }
        Ok(Self { rows })
    }

    /// Script stopping `robot` for steps `0..steps` among `n` robots.
    pub fn block_robot(n: usize, robot: usize, steps: usize) -> Self {
        let mut rows = vec![vec![true; steps]; n];
        rows[robot].iter_mut().for_each(|d| *d = false);
        Self { rows }
    }

    pub fn robots(&self) -> usize {
        self.rows.len()
    }

    /// Number of scripted steps.
    pub fn len(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn get(&self, i: usize, t: usize) -> bool {
        self.rows
            .get(i)
            .and_then(|r| r.get(t))
            .copied()
            .unwrap_or(true)
    }

    /// Parses a grid of `0`/`1` characters, one row per robot. Blank lines
    /// and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|line| {
                line.chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(Error::Parse(format!(
                            "unexpected character {other:?} in disturbance script"
                        ))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Script::new(rows)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let line: String = row.iter().map(|&d| if d { '1' } else { '0' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn check_intensity(q: f64) -> Result<()> {
    if (0.0..1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::Intensity(q))
    }
}

/// Expected travel time when robots never wait for each other:
/// `E(t_f) / (1 − q)`.
pub fn lower_bound_expectation(expected_travel: f64, q: f64) -> Result<f64> {
    check_intensity(q)?;
    Ok(expected_travel / (1.0 - q))
}

/// Expected travel time when the whole team stops whenever any of its `n`
/// robots is stopped: `E(t_f) / (1 − q)^n`.
pub fn allstop_expectation(expected_travel: f64, q: f64, n: usize) -> Result<f64> {
    check_intensity(q)?;
    if n == 0 {
        return Err(Error::Disturbance(
            "allstop expectation needs n >= 1".into(),
        ));
    }
    Ok(expected_travel / (1.0 - q).powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn none_always_passes() {
        let p = DisturbanceProcess::None;
        assert!((0..50).all(|t| p.delta(3, t)));
    }

    #[test]
    fn script_lookup_and_suffix() {
        let script = Script::parse("111\n001\n").unwrap();
        let p = DisturbanceProcess::Scripted(script);
        assert!(!p.delta(1, 1));
        assert!(p.delta(1, 2));
        assert!(p.delta(1, 5));
        assert!(p.delta(7, 0));
    }

    #[test]
    fn script_rejects_ragged_and_garbage() {
        assert!(Script::parse("11\n1\n").is_err());
        assert!(Script::parse("1x\n").is_err());
    }

    #[test]
    fn script_text_roundtrip() {
        let s = Script::block_robot(2, 0, 6);
        assert_eq!(s.to_text(), "000000\n111111\n");
        assert_eq!(Script::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn non_prohibitive_checks() {
        assert!(DisturbanceProcess::None.is_non_prohibitive(10).unwrap());
        let ok = Script::parse("0011111\n1111111\n").unwrap();
        assert!(DisturbanceProcess::Scripted(ok)
            .is_non_prohibitive(10)
            .unwrap());
        let stuck = Script::parse("0000000000\n1111111111\n").unwrap();
        assert!(!DisturbanceProcess::Scripted(stuck)
            .is_non_prohibitive(10)
            .unwrap());
        let p = DisturbanceProcess::bernoulli(0.2, 1).unwrap();
        assert!(p.is_non_prohibitive(10).is_err());
    }

    #[test]
    fn bernoulli_frequency() {
        let p = DisturbanceProcess::bernoulli(0.3, 42).unwrap();
        let draws = 100_000;
        let stopped = (0..draws).filter(|&t| !p.delta(0, t)).count();
        let freq = stopped as f64 / draws as f64;
        assert!((freq - 0.3).abs() < 0.01, "{freq}");
    }

    #[test]
    fn bernoulli_blocks_are_constant() {
        let p = DisturbanceProcess::bernoulli_blocks(0.5, 4, 9).unwrap();
        for i in 0..3 {
            for block in 0..200 {
                let first = p.delta(i, block * 4);
                assert!((1..4).all(|k| p.delta(i, block * 4 + k) == first));
            }
        }
    }

    #[test]
    fn bernoulli_rejects_bad_parameters() {
        assert!(DisturbanceProcess::bernoulli(1.0, 0).is_err());
        assert!(DisturbanceProcess::bernoulli(-0.1, 0).is_err());
        assert!(DisturbanceProcess::bernoulli_blocks(0.1, 0, 0).is_err());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(lower_bound_expectation(25.0, 0.0).unwrap(), 25.0);
        assert_eq!(lower_bound_expectation(25.0, 0.5).unwrap(), 50.0);
        assert!((lower_bound_expectation(10.0, 0.2).unwrap() - 12.5).abs() < 1e-12);
        assert_eq!(allstop_expectation(25.0, 0.5, 2).unwrap(), 100.0);
        assert!((allstop_expectation(10.0, 0.1, 3).unwrap() - 13.717421124828531).abs() < 1e-9);
        for q in [0.0, 0.1, 0.37] {
            assert_eq!(
                allstop_expectation(17.0, q, 1).unwrap(),
                lower_bound_expectation(17.0, q).unwrap()
            );
        }
        assert!(lower_bound_expectation(1.0, 1.0).is_err());
        assert!(allstop_expectation(1.0, 1.2, 2).is_err());
    }
}
