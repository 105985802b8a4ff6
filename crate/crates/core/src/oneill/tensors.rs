//! Pointwise O'Neill tensors computed straight from projector
//! derivatives, without building a full [`PointJet`](super::PointJet).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::field::{projector_derivative, richardson, ProjectorField};
use super::jet::PointJet;
use crate::error::GeometryError;
use crate::subspace::{horizontal_space, vertical_space};
use crate::tolerance::fd_step;

fn step_at(point: &DVector<f64>) -> f64 {
    fd_step(point.norm())
}

fn vh(field: &ProjectorField<'_>, point: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>), GeometryError> {
    let v = field.vertical_projector(point)?;
    let h = DMatrix::identity(v.nrows(), v.ncols()) - &v;
    Ok((v, h))
}

/// `𝒯_E F` with constant extension of `F`.
pub fn tensor_t(
    field: &ProjectorField<'_>,
    point: &DVector<f64>,
    e: &DVector<f64>,
    f: &DVector<f64>,
) -> Result<DVector<f64>, GeometryError> {
    let (v, h) = vh(field, point)?;
    let ve = &v * e;
    if ve.norm() == 0.0 {
        return Ok(DVector::zeros(point.len()));
    }
    let dv = projector_derivative(field, point, &ve, step_at(point))?;
    Ok((h - v) * (dv * f))
}

/// `𝒜_E F` with constant extension of `F`.
pub fn tensor_a(
    field: &ProjectorField<'_>,
    point: &DVector<f64>,
    e: &DVector<f64>,
    f: &DVector<f64>,
) -> Result<DVector<f64>, GeometryError> {
    let (v, h) = vh(field, point)?;
    let he = &h * e;
    if he.norm() == 0.0 {
        return Ok(DVector::zeros(point.len()));
    }
    let dv = projector_derivative(field, point, &he, step_at(point))?;
    Ok((h - v) * (dv * f))
}

/// `∇̂_X Y = V·D_X[V(·)Y]`.
pub fn hat_nabla(
    field: &ProjectorField<'_>,
    point: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>, GeometryError> {
    let v = field.vertical_projector(point)?;
    if x.norm() == 0.0 {
        return Ok(DVector::zeros(point.len()));
    }
    let dv = projector_derivative(field, point, x, step_at(point))?;
    Ok(&v * (dv * y))
}

/// `(∇F_*)(X, Y) = D_X[Jac(·)·Y]` for constant `Y` in flat space, by
/// Richardson-extrapolated differences of the exact Jacobian.
pub fn second_fundamental_form(
    field: &ProjectorField<'_>,
    point: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>, GeometryError> {
    if x.norm() == 0.0 {
        return Ok(DVector::zeros(field.map.codomain_dim()));
    }
    let d = richardson(
        |q| Ok(DMatrix::from_column_slice(field.map.codomain_dim(), 1, (field.jacobian(q)? * y).as_slice())),
        point,
        x,
        step_at(point),
    )?;
    Ok(d.column(0).into_owned())
}

/// `D²F(p)[X, Y]` from nested duals; the second path for
/// [`second_fundamental_form`].
pub fn second_fundamental_form_exact(
    field: &ProjectorField<'_>,
    point: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>, GeometryError> {
    Ok(field.map.hessian_form(point.as_slice(), x, y)?)
}

/// Mean curvature of the fiber from the standalone tensor path.
pub fn mean_curvature(field: &ProjectorField<'_>, point: &DVector<f64>) -> Result<DVector<f64>, GeometryError> {
    let vertical = vertical_space(&field.jacobian(point)?, field.tols.rank)?;
    if vertical.is_empty() {
        return Err(GeometryError::TrivialFiber);
    }
    let mut sum = DVector::zeros(point.len());
    for e in vertical.columns() {
        sum += tensor_t(field, point, &e, &e)?;
    }
    Ok(sum / vertical.dim() as f64)
}

/// `max |𝒯_X Y − g(X, Y)·H|` over vertical frame pairs.
pub fn umbilical_residual(field: &ProjectorField<'_>, point: &DVector<f64>) -> Result<f64, GeometryError> {
    PointJet::new(field, point)?.umbilical_residual()
}

/// `𝒯` or `𝒜` evaluated with the non-constant extension
/// `F̃(q) = F + S·(q − p)`, differentiating the vector fields
/// `V(q)F̃(q)` and `H(q)F̃(q)` directly. Tensoriality means the result
/// agrees with the constant-extension value.
pub fn tensor_extended(
    field: &ProjectorField<'_>,
    point: &DVector<f64>,
    e: &DVector<f64>,
    f: &DVector<f64>,
    slope: &DMatrix<f64>,
    vertical_slot: bool,
) -> Result<DVector<f64>, GeometryError> {
    let (v, h) = vh(field, point)?;
    let dir = if vertical_slot { &v * e } else { &h * e };
    let m = point.len();
    if dir.norm() == 0.0 {
        return Ok(DVector::zeros(m));
    }
    let ext = |q: &DVector<f64>| f + slope * (q - point);
    let col = |x: DVector<f64>| DMatrix::from_column_slice(m, 1, x.as_slice());
    let step = step_at(point);
    let dvert = richardson(|q| Ok(col(field.vertical_projector(q)? * ext(q))), point, &dir, step)?;
    let dhor = richardson(
        |q| {
            let vq = field.vertical_projector(q)?;
            Ok(col((DMatrix::identity(m, m) - vq) * ext(q)))
        },
        point,
        &dir,
        step,
    )?;
    Ok(&h * dvert.column(0) + &v * dhor.column(0))
}

/// Tables of `𝒯` and `𝒜` on the frame `vertical ⊕ horizontal`, plus the
/// fiber's mean curvature.
#[derive(Clone, Debug, Serialize)]
pub struct ONeillData {
    pub point: Vec<f64>,
    /// `t[i][k] = 𝒯_{eᵢ} e_k`.
    pub t: Vec<Vec<Vec<f64>>>,
    pub a: Vec<Vec<Vec<f64>>>,
    pub h_mean: Option<Vec<f64>>,
}

type Bilinear<'a> = dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + 'a;

pub fn oneill_data(jet: &PointJet<'_, '_>) -> ONeillData {
    let ops = jet.ops();
    let frame: Vec<DVector<f64>> = ops.vertical.columns().chain(ops.horizontal.columns()).collect();
    let table = |g: &Bilinear<'_>| {
        frame
            .iter()
            .map(|e| frame.iter().map(|f| g(e, f).as_slice().to_vec()).collect())
            .collect()
    };
    ONeillData {
        point: jet.point.as_slice().to_vec(),
        t: table(&|e, f| jet.tensor_t(e, f)),
        a: table(&|e, f| jet.tensor_a(e, f)),
        h_mean: jet.mean_curvature().ok().map(|h| h.as_slice().to_vec()),
    }
}

/// Horizontal frame at a point, convenience for callers of the free
/// functions.
pub fn horizontal_frame(field: &ProjectorField<'_>, point: &DVector<f64>) -> Result<crate::subspace::Frame, GeometryError> {
    Ok(horizontal_space(&vertical_space(&field.jacobian(point)?, field.tols.rank)?))
}
