//! Time-to-modification (TTM) mining for Git histories.
//!
//! The engine walks a repository oldest to newest, registers every hunk a
//! commit introduces, and records the first later commit that deletes or
//! replaces any of its lines. [`stats`] aggregates the resulting per-hunk
//! durations; [`cost_model`] fits processing time against history size.

pub mod bench;
pub mod cost_model;
pub mod engine;
pub mod export;
pub mod gate;
pub mod hunk_index;
pub mod repo_source;
pub mod stats;
pub mod synth;
