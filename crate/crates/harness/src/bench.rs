//! Scaling benchmarks: the same configuration at increasing round counts,
//! with the reindeer cycle budget held at one fifth of the rounds so the
//! delivery-to-help mix stays constant across levels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use santa_scenario::{run_backend, BackendId, ConfigError, ScenarioConfig};

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("bench needs at least one level")]
    NoLevels,
    #[error("levels must be strictly increasing, got {prev} before {next}")]
    UnorderedLevels { prev: u64, next: u64 },
    #[error("runs per level must be at least one")]
    NoRuns,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// One measured round count. Timing fields are absent when any run at this
/// level deadlocked, and `spread_s` is reported only for repeated runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchLevel {
    pub rounds: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_wall_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread_s: Option<f64>,
    pub deliveries: u64,
    pub help_sessions: u64,
    pub deadlocked: bool,
}

/// Wall-time scaling across levels. `ratios[i]` relates level `i + 1` to
/// level `i` and is null when either side has no timing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub backend: BackendId,
    pub reindeer: usize,
    pub elves: usize,
    pub barrier: usize,
    pub group: usize,
    pub runs: usize,
    pub levels: Vec<BenchLevel>,
    pub ratios: Vec<Option<f64>>,
}

/// Cycle budget that keeps one delivery per five rounds.
pub fn cycles_for(rounds: u64) -> u64 {
    (rounds / 5).max(1)
}

pub fn run_bench(
    backend: BackendId,
    base: &ScenarioConfig,
    levels: &[u64],
    runs: usize,
) -> Result<BenchReport, BenchError> {
    if levels.is_empty() {
        return Err(BenchError::NoLevels);
    }
    if runs == 0 {
        return Err(BenchError::NoRuns);
    }
    for pair in levels.windows(2) {
        if pair[1] <= pair[0] {
            return Err(BenchError::UnorderedLevels { prev: pair[0], next: pair[1] });
        }
    }

    let mut out = Vec::with_capacity(levels.len());
    for &rounds in levels {
        let cfg = ScenarioConfig {
            santa_rounds: rounds,
            reindeer_cycles: Some(cycles_for(rounds)),
            ..base.clone()
        };
        let mut walls = Vec::with_capacity(runs);
        let mut deadlocked = false;
        let mut counts = (0, 0);
        for i in 0..runs {
            let run = run_backend(backend, &cfg, false)?;
            walls.push(run.stats.wall_s);
            deadlocked |= run.stats.deadlocked;
            if i == 0 {
                counts = (run.stats.deliveries, run.stats.help_sessions);
            }
        }
        walls.sort_by(|a, b| a.total_cmp(b));
        let median = if deadlocked {
            None
        } else if walls.len() % 2 == 1 {
            Some(walls[walls.len() / 2])
        } else {
            Some((walls[walls.len() / 2 - 1] + walls[walls.len() / 2]) / 2.0)
        };
        let spread = (runs > 1 && !deadlocked).then(|| walls[walls.len() - 1] - walls[0]);
        out.push(BenchLevel {
            rounds,
            median_wall_s: median,
            spread_s: spread,
            deliveries: counts.0,
            help_sessions: counts.1,
            deadlocked,
        });
    }

    let ratios = out
        .windows(2)
        .map(|pair| match (pair[0].median_wall_s, pair[1].median_wall_s) {
            (Some(a), Some(b)) if a > 0.0 => Some(b / a),
            _ => None,
        })
        .collect();

    Ok(BenchReport {
        backend,
        reindeer: base.reindeer_count,
        elves: base.elf_count,
        barrier: base.barrier_size,
        group: base.group_size,
        runs,
        levels: out,
        ratios,
    })
}
