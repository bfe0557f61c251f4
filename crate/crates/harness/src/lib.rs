//! Workbench around the scenario crates: trace validation against the four
//! behavioral properties, scaling benchmarks, JSONL trace files, and the
//! `santa` command that fronts all of it.

pub mod bench;
pub mod cli;
pub mod jsonl;
pub mod validate;
