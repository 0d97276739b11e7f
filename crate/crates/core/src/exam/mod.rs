//! The examination loop: select a batch, ask, verify, update, repeat until
//! the running metrics settle or the iteration cap is reached.

mod config;
mod convergence;
mod log;
mod run;
mod verify;

pub use config::{ConvergenceConfig, RunConfig};
pub use convergence::check_convergence;
pub use log::{
    read_log, AbortRecord, ExamRecord, JsonlLog, LogHeader, LogRecord, LogSink, NullLog, SkipRecord, SkipStage,
    LOG_FORMAT,
};
pub use run::{run_evaluation, Evaluation, IterationReport, MetricPoint, Roles, RunAbort, RunError, RunOutcome, StopReason};
pub use verify::{first_word, parse_yes_no, verify_wh, verify_yes_no, Verdict, VerdictReason, VerificationMode};
