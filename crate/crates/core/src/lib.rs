//! Numerical analysis of Riemannian submersions `F: R^m → R^n` from flat
//! Kähler space.
//!
//! The pipeline at a point is
//! `jacobian → ker F_* ⊕ (ker F_*)^⊥ → Kähler-angle spectrum → D1 ⊕ D2 →
//! structure operators`, followed by O'Neill-tensor based residual checks.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod oneill;
pub mod report;
pub mod structure;
pub mod subspace;
pub mod tolerance;

pub use error::{ExprError, GeometryError, ParseError};
pub use expr::{MapDefinition, Params};
pub use subspace::{ComplexStructure, Frame};
pub use tolerance::Tolerances;
pub use classify::{classify, classify_points, CheckSelection, ClassificationReport, Sampler, Verdict};
pub use oneill::{ProjectorField, StructureField};
