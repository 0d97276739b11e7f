//! Adaptive evaluation of a language model's factual knowledge over a
//! parameterized knowledge graph.
//!
//! The loop: draw the edges most likely to be answered wrong from their Beta
//! posteriors, turn them into questions, verify the examinee's answers, and
//! feed the outcomes back into the posteriors of the examined edges and their
//! one-degree neighbors.

pub mod error;
pub mod exam;
pub mod gateway;
pub mod ingest;
pub mod metrics;
pub mod pkg;
pub mod prompts;
pub mod question;
pub mod registry;
pub mod rng;
pub mod synth;
pub mod testing;

pub use error::FormatError;
