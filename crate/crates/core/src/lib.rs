//! Meta-evaluation of machine translation metrics against MQM annotations.
//!
//! The pipeline runs in this order: parse annotations and metric scores
//! ([`corpus`]), compute gold MQM scores and quality classes ([`mqm`]),
//! correlate metrics with gold under different groupings ([`stats`]), and
//! check whether metrics recognise error-free translations ([`detect`]).
//! [`synth`] generates corpora with known structure for testing.

pub mod cli;
pub mod corpus;
pub mod detect;
pub mod error;
pub mod mqm;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
