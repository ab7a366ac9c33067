//! Learning-outcome alignment engine.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! * [`catalog`] parses the curriculum framework (LO codes, subjects, grades).
//! * [`textprep`] tokenizes outcome statements.
//! * [`embed`] turns token lists into unit-norm dense vectors.
//! * [`topics`] reduces, clusters and labels the vectors with c-TF-IDF keywords.
//! * [`alignment`] derives matched LO pairs and the curriculum analytics
//!   (asymmetric subject matrices, grade drill-downs, topic distributions,
//!   spirality, subject dendrograms).
//! * [`validation`] scores matches against the framework hierarchy and expert labels.
//! * [`runstore`] publishes immutable, checksummed run bundles.
//! * [`service`] hosts the read-only JSON API and the command-line driver glue.

pub mod alignment;
pub mod catalog;
pub mod embed;
mod error;
pub mod pipeline;
pub mod runstore;
pub mod service;
pub mod synth;
pub mod textprep;
pub mod topics;
pub mod validation;

pub use error::{Error, Result};
