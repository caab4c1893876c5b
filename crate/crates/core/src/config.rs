//! Solver parameters and the key=value config-file format.
//!
//! None of the limits below come from a published parameter set; they are
//! desk-scale defaults and every one can be overridden.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Default global seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_2010_0031;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "twostage")]
    TwoStage,
    #[serde(rename = "backtrack")]
    Backtrack,
    #[serde(rename = "tabu")]
    Tabu,
    #[serde(rename = "exhaustive")]
    Exhaustive,
}

impl SolverKind {
    pub const PIPELINE: [SolverKind; 3] = [SolverKind::TwoStage, SolverKind::Backtrack, SolverKind::Tabu];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::TwoStage => "twostage",
            SolverKind::Backtrack => "backtrack",
            SolverKind::Tabu => "tabu",
            SolverKind::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "twostage" => Ok(SolverKind::TwoStage),
            "backtrack" => Ok(SolverKind::Backtrack),
            "tabu" => Ok(SolverKind::Tabu),
            "exhaustive" => Ok(SolverKind::Exhaustive),
            other => Err(format!("unknown solver `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Backtrack events allowed per backtracking run.
    pub backtrack_limit: u64,
    /// Number of backtracking runs, each from a fresh random root label.
    pub restarts: u32,
    /// Probability per forward step of swapping two pending candidates.
    pub perturbation: f64,
    /// Non-tabu pairs sampled per tabu iteration.
    pub sample_pairs: usize,
    /// Iterations a swapped pair stays forbidden.
    pub tenure: u64,
    /// Tabu iteration cap; `None` means `20000 * n`.
    pub max_iters: Option<u64>,
    pub twostage_runs: u32,
    pub stage1_budget: u64,
    pub stage2_budget: u64,
    pub order: [SolverKind; 3],
    pub global_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backtrack_limit: 50_000,
            restarts: 100,
            perturbation: 0.01,
            sample_pairs: 30,
            tenure: 8,
            max_iters: None,
            twostage_runs: 1_000,
            stage1_budget: 2_000,
            stage2_budget: 5_000,
            order: SolverKind::PIPELINE,
            global_seed: DEFAULT_SEED,
        }
    }
}

impl SolverConfig {
    pub fn tabu_max_iters(&self, n: usize) -> u64 {
        self.max_iters.unwrap_or(20_000 * n as u64)
    }

    /// Every search limit set to zero. No solver can succeed for `n ≥ 2`.
    pub fn zero_limits(self) -> Self {
        SolverConfig {
            backtrack_limit: 0,
            restarts: 0,
            sample_pairs: 0,
            tenure: 0,
            max_iters: Some(0),
            twostage_runs: 0,
            stage1_budget: 0,
            stage2_budget: 0,
            ..self
        }
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.trim().parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
            })
        }
        match key.trim() {
            "backtrack_limit" => self.backtrack_limit = num(key, value)?,
            "restarts" => self.restarts = num(key, value)?,
            "perturbation" => {
                let p: f64 = num(key, value)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(ConfigError::BadValue {
                        key: key.to_string(),
                        value: value.to_string(),
                    });
                }
                self.perturbation = p;
            }
            "sample_pairs" => self.sample_pairs = num(key, value)?,
            "tenure" => self.tenure = num(key, value)?,
            "max_iters" => self.max_iters = Some(num(key, value)?),
            "twostage_runs" => self.twostage_runs = num(key, value)?,
            "stage1_budget" => self.stage1_budget = num(key, value)?,
            "stage2_budget" => self.stage2_budget = num(key, value)?,
            "order" => self.order = parse_order(value)?,
            "global_seed" | "seed" => self.global_seed = num(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Reads `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(key, value)?;
        }
        Ok(())
    }
}

pub fn parse_order(text: &str) -> Result<[SolverKind; 3], ConfigError> {
    let kinds = text
        .split(',')
        .map(|s| s.parse::<SolverKind>().map_err(|_| ConfigError::BadOrder))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sorted = kinds.clone();
    sorted.sort();
    if sorted != SolverKind::PIPELINE {
        return Err(ConfigError::BadOrder);
    }
    Ok([kinds[0], kinds[1], kinds[2]])
}
