//! Match orchestration: turn-based and batched games, transcripts, replay and sweeps.

mod batched;
mod replay;
mod runner;
mod sweep;
mod transcript;

pub use batched::{longest_free_run, run_batched, BatchedBreaker, BatchedConfig, BatchedMaker, BatchedResult};
pub use replay::{replay_verify, Replay, ReplayMismatch};
pub use runner::{run_match, run_match_specs, MatchConfig, MatchError, MatchResult, StepSummary};
pub use sweep::{replication_seed, run_sweep, write_sweep_csv, SweepConfig, SweepRow, SWEEP_COLUMNS};
pub use transcript::{MoveRecord, Outcome, Transcript, TranscriptError, TranscriptHeader};
