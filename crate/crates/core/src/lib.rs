//! Digital twin maturity assessment.
//!
//! A subject is first gated on two fundamental conditions ([`gatekeeper`]),
//! then classified on the dimensions of a [`schema::MaturityModel`], then
//! scored ([`scorer`]). [`analysis`] interprets scores, [`store`] persists
//! them and [`report`] exports charts. All arithmetic is exact.

pub mod analysis;
pub mod batch;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod gatekeeper;
pub mod report;
pub mod schema;
pub mod scorer;
pub mod store;

pub use error::{Error, Result};
pub use exact::Rational;
pub use gatekeeper::{evaluate_gates, gate_report, GateChecklist, GateVerdict, Taxonomy};
pub use schema::{builtin_paper_model, load_model, validate_model, MaturityModel, ModelRef};
pub use scorer::{
    normalize_weights, overall_score, score_assessment, Assessment, RoundingPolicy, ScoreReport,
    WeightVector,
};
pub use store::Workspace;
