//! O'Neill tensors and the covariant machinery of a submersion from flat
//! space. `∇` is the coordinate directional derivative; derivatives of the
//! point-dependent projectors come from finite differences.

pub mod curvature;
pub mod field;
pub mod identities;
pub mod jet;
pub mod tensors;

pub use curvature::{curvature_check, default_planes, BracketExtension, CurvatureRecord, PlaneKind, PlaneSpec};
pub use field::{projector_derivative, projector_derivative_exact, PointFrames, ProjectorField, StructureField};
pub use identities::{covariant_residuals, CovariantResiduals};
pub use jet::{Along, MatJet, PointJet};
pub use tensors::{
    hat_nabla, mean_curvature, oneill_data, second_fundamental_form, second_fundamental_form_exact, tensor_a,
    tensor_extended, tensor_t, umbilical_residual, ONeillData,
};

#[cfg(test)]
mod tests;
