use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Population and termination knobs for one scenario run.
///
/// The default reproduces the classic 9-reindeer, 20-elf shop with groups of
/// three: ten thousand Santa rounds, two thousand full cycles per reindeer,
/// elves never retiring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub reindeer_count: usize,
    pub elf_count: usize,
    /// Reindeer needed at the sleigh before Santa is woken.
    pub barrier_size: usize,
    /// Elves per consultation group.
    pub group_size: usize,
    /// Santa retires after this many completed sessions.
    pub santa_rounds: u64,
    /// Full back/harness/pull cycles per reindeer; `None` means unbounded.
    pub reindeer_cycles: Option<u64>,
    /// Full puzzled/enter/consult cycles per elf; `None` means unbounded.
    pub elf_cycles: Option<u64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            reindeer_count: 9,
            elf_count: 20,
            barrier_size: 9,
            group_size: 3,
            santa_rounds: 10_000,
            reindeer_cycles: Some(2_000),
            elf_cycles: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let reject = |what: &str| Err(ConfigError { reason: what.to_string() });
        if self.barrier_size == 0 {
            return reject("barrier_size must be positive");
        }
        if self.group_size == 0 {
            return reject("group_size must be positive");
        }
        if self.santa_rounds == 0 {
            return reject("santa_rounds must be positive");
        }
        if self.reindeer_cycles == Some(0) {
            return reject("reindeer_cycles must be positive when bounded");
        }
        if self.elf_cycles == Some(0) {
            return reject("elf_cycles must be positive when bounded");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scenario config: {}", self.reason)
    }
}

impl std::error::Error for ConfigError {}

/// The four interchangeable synchronization strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendId {
    Guards,
    Semaphores,
    Channels,
    Monitor,
}

impl BackendId {
    pub const ALL: [BackendId; 4] =
        [BackendId::Guards, BackendId::Semaphores, BackendId::Channels, BackendId::Monitor];

    pub fn name(self) -> &'static str {
        match self {
            BackendId::Guards => "guards",
            BackendId::Semaphores => "semaphores",
            BackendId::Channels => "channels",
            BackendId::Monitor => "monitor",
        }
    }
}

impl fmt::Display for BackendId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackendId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "guards" => Ok(BackendId::Guards),
            "semaphores" => Ok(BackendId::Semaphores),
            "channels" => Ok(BackendId::Channels),
            "monitor" => Ok(BackendId::Monitor),
            other => Err(format!("unknown backend `{other}` (expected guards, semaphores, channels, or monitor)")),
        }
    }
}
