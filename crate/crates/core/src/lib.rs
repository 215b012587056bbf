//! Explicit reciprocity laboratory: p-adic fields, Laurent towers,
//! Lubin-Tate formal groups and explicit formulas for Hilbert-type pairings.

pub mod derivations;
pub mod error;
pub mod formal_groups;
pub mod json;
pub mod laurent_tower;
pub mod linalg;
pub mod local_field;
pub mod oracle;
pub mod pairing;
pub mod series;
pub mod suites;
pub mod symbols;

pub use error::{Error, Result};
pub use local_field::{BaseElement, Field, FieldDesc, Step, StepKind};
