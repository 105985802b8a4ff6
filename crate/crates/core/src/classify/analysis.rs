use nalgebra::{DMatrix, DVector};

use crate::error::GeometryError;
use crate::expr::{MapDefinition, Params};
use crate::oneill::{ProjectorField, StructureField};
use crate::structure::StructureOperators;
use crate::subspace::{submersion_residual, AngleSpectrum, ComplexStructure, Frame};
use crate::tolerance::Tolerances;

/// Everything known about the map at one sample point.
#[derive(Clone, Debug)]
pub struct PointAnalysis {
    pub point: DVector<f64>,
    pub jacobian: Option<DMatrix<f64>>,
    pub spectrum: Option<AngleSpectrum>,
    pub ops: Option<StructureOperators>,
    /// `‖(Jac·H)ᵀ(Jac·H) − I‖_F`; `None` when the Jacobian is rank deficient.
    pub submersion_residual: Option<f64>,
    pub rank_deficient: bool,
    pub multiple_angles: bool,
    pub cluster_width: f64,
    /// Set when the pipeline failed for another reason (domain error, ...).
    pub error: Option<GeometryError>,
}

impl PointAnalysis {
    pub fn is_valid(&self) -> bool {
        self.ops.is_some()
    }

    pub fn theta(&self) -> Option<f64> {
        self.ops.as_ref().and_then(|o| o.theta)
    }

    pub fn vertical(&self) -> Option<&Frame> {
        self.ops.as_ref().map(|o| &o.vertical)
    }

    pub fn horizontal(&self) -> Option<&Frame> {
        self.ops.as_ref().map(|o| &o.horizontal)
    }

    pub fn d1(&self) -> Option<&Frame> {
        self.ops.as_ref().map(|o| &o.d1)
    }

    pub fn d2(&self) -> Option<&Frame> {
        self.ops.as_ref().map(|o| &o.d2)
    }

    pub fn sigma_sq(&self) -> Vec<f64> {
        self.spectrum.as_ref().map(|s| s.sigma_sq.clone()).unwrap_or_default()
    }
}

/// Run the pointwise pipeline with an already bound field.
pub fn analyze_with(field: &ProjectorField<'_>, point: &DVector<f64>) -> PointAnalysis {
    let mut out = PointAnalysis {
        point: point.clone(),
        jacobian: None,
        spectrum: None,
        ops: None,
        submersion_residual: None,
        rank_deficient: false,
        multiple_angles: false,
        cluster_width: 0.0,
        error: None,
    };
    match field.frames_at(point) {
        Ok(frames) => {
            out.submersion_residual = Some(submersion_residual(&frames.jacobian, &frames.ops.horizontal));
            out.multiple_angles = frames.split.multiple_angles;
            out.cluster_width = frames.split.cluster_width;
            out.jacobian = Some(frames.jacobian);
            out.spectrum = Some(frames.spectrum);
            out.ops = Some(frames.ops);
        }
        Err(e) => {
            out.rank_deficient = matches!(e, GeometryError::RankDeficient { .. });
            out.jacobian = field.jacobian(point).ok();
            out.error = Some(e);
        }
    }
    out
}

/// Bind `map` with `params` under the constant structure `j` and analyze
/// one point.
pub fn analyze_point(
    map: &MapDefinition,
    j: &ComplexStructure,
    params: &Params,
    point: &[f64],
    tols: Tolerances,
) -> Result<PointAnalysis, GeometryError> {
    let field = ProjectorField::new(map, params, StructureField::Constant(j.clone()), tols)?;
    if point.len() != map.domain_dim {
        return Err(crate::error::ExprError::WrongLength {
            what: "point",
            expected: map.domain_dim,
            found: point.len(),
        }
        .into());
    }
    Ok(analyze_with(&field, &DVector::from_column_slice(point)))
}
