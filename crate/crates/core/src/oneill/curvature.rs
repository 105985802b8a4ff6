//! Holomorphic sectional curvature relations for `J`-invariant planes in
//! `μ`, in `D2 ⊕ BD2`, and in `D1`.
//!
//! The ambient space and the target are flat, so `K(P)`, `K_*(P)` and every
//! ambient `K(X ∧ ·)` vanish; each formula's imbalance is the absolute value
//! of its right-hand side minus zero.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::field::richardson;
use super::jet::PointJet;
use super::tensors::tensor_a;
use crate::error::GeometryError;
use crate::subspace::Frame;
use crate::tolerance::nested_fd_step;

const PLANE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaneKind {
    /// `P ⊂ μ`.
    Mu,
    /// `P ⊂ D2 ⊕ BD2`, spanned by `X ∈ D2` and `JX`.
    Slant,
    /// `P ⊂ D1`.
    Complex,
}

/// A plane given by two spanning vectors; the first, normalized, is `X`.
#[derive(Clone, Debug)]
pub struct PlaneSpec {
    pub kind: PlaneKind,
    pub u: DVector<f64>,
    pub w: DVector<f64>,
}

impl PlaneSpec {
    /// The plane `{x, Jx}`.
    pub fn holomorphic(kind: PlaneKind, x: DVector<f64>, j: &DMatrix<f64>) -> PlaneSpec {
        let w = j * &x;
        PlaneSpec { kind, u: x, w }
    }
}

/// How `X` is extended off the point in the bracket `[JX, X]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketExtension {
    /// `X̃(q) = Π_μ(q)x`; `JX̃` stays in `μ`.
    Mu,
    /// `X̃(q) = V(q)x`.
    Vertical,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureRecord {
    pub kind: PlaneKind,
    /// Named right-hand-side terms.
    pub terms: Vec<(&'static str, f64)>,
    /// `K(P)` of the flat ambient space.
    pub lhs: f64,
    pub rhs: f64,
    pub imbalance: f64,
}

fn validate(jet: &PointJet<'_, '_>, plane: &PlaneSpec) -> Result<DVector<f64>, GeometryError> {
    let ops = jet.ops();
    let frame = Frame::span_of_vectors(jet.dim(), &[plane.u.clone(), plane.w.clone()]);
    if frame.dim() != 2 {
        return Err(GeometryError::Shape("plane needs two independent vectors".into()));
    }
    let pi = frame.projector();
    let id = DMatrix::<f64>::identity(jet.dim(), jet.dim());
    let inv = ((&id - &pi) * &ops.j * &pi).norm();
    if inv > PLANE_TOL {
        return Err(GeometryError::PlaneNotInvariant(inv));
    }
    let x = plane.u.normalize();
    let outside = match plane.kind {
        PlaneKind::Mu => ((&id - ops.pmu()) * &pi).norm(),
        PlaneKind::Complex => ((&id - &ops.p) * &pi).norm(),
        PlaneKind::Slant => {
            let target = &ops.q + ops.b_d2.projector();
            ((&id - &ops.q) * &x).norm().max(((&id - target) * &pi).norm())
        }
    };
    if outside > PLANE_TOL {
        return Err(GeometryError::PlaneOutsideSubspace(outside));
    }
    Ok(x)
}

/// Evaluate the formula that matches `plane.kind`.
pub fn curvature_check(
    jet: &PointJet<'_, '_>,
    plane: &PlaneSpec,
    extension: BracketExtension,
) -> Result<CurvatureRecord, GeometryError> {
    let x = validate(jet, plane)?;
    match plane.kind {
        PlaneKind::Mu => mu_plane(jet, &x, extension),
        PlaneKind::Slant => slant_plane(jet, &x),
        PlaneKind::Complex => complex_plane(jet, &x),
    }
}

/// `[JX̃, X̃]` at the point for the chosen extension.
pub fn bracket_jx_x(
    jet: &PointJet<'_, '_>,
    x: &DVector<f64>,
    extension: BracketExtension,
) -> Result<DVector<f64>, GeometryError> {
    let jx = &jet.ops().j * x;
    let along_jx = jet.along(&jx);
    let along_x = jet.along(x);
    let (ext_jx, ext_x) = match extension {
        BracketExtension::Mu => (along_jx.mu()?.clone(), along_x.mu()?.clone()),
        BracketExtension::Vertical => (along_jx.v.clone(), along_x.v.clone()),
    };
    let d_x_along_jx = ext_jx.derivative(x);
    let d_jx_along_x = (&along_x.j * &ext_x).derivative(x);
    Ok(d_x_along_jx - d_jx_along_x)
}

fn mu_plane(
    jet: &PointJet<'_, '_>,
    x: &DVector<f64>,
    extension: BracketExtension,
) -> Result<CurvatureRecord, GeometryError> {
    let j = &jet.ops().j;
    let jx = j * x;
    let t_xx = jet.tensor_t(x, x);
    let t_jxjx = jet.tensor_t(&jx, &jx);
    let t_xjx = jet.tensor_t(x, &jx);
    let k_hat = t_xx.dot(&t_jxjx) - t_xjx.norm_squared();
    let bracket = bracket_jx_x(jet, x, extension)?;
    let bracket_term = t_xx.dot(&(j * bracket));
    let rhs = k_hat + t_xx.norm_squared() - t_xjx.norm_squared() - bracket_term;
    Ok(CurvatureRecord {
        kind: PlaneKind::Mu,
        terms: vec![
            ("fiber-curvature", k_hat),
            ("t-xx-squared", t_xx.norm_squared()),
            ("t-xjx-squared", t_xjx.norm_squared()),
            ("bracket", bracket_term),
        ],
        lhs: 0.0,
        rhs,
        imbalance: rhs.abs(),
    })
}

fn slant_plane(jet: &PointJet<'_, '_>, x: &DVector<f64>) -> Result<CurvatureRecord, GeometryError> {
    let ops = jet.ops();
    let theta = ops.theta.ok_or(GeometryError::ThetaAbsent)?;
    let bx = &ops.b * x;
    let cx = &ops.c * x;
    let field = jet.field;
    let p = &jet.point;
    let m = jet.dim();
    let outer = nested_fd_step(p.norm());
    let nabla_a = richardson(
        |q| Ok(DMatrix::from_column_slice(m, 1, tensor_a(field, q, x, &cx)?.as_slice())),
        p,
        x,
        outer,
    )?
    .column(0)
    .into_owned();
    let t_bx_x = jet.tensor_t(&bx, x);
    let t1 = nabla_a.dot(&bx);
    let t2 = jet.tensor_a(x, &cx).dot(&t_bx_x);
    let t3 = jet.tensor_a(&cx, x).dot(&t_bx_x);
    let t4 = jet.tensor_a(x, x).dot(&jet.tensor_t(&bx, &cx));
    // the ambient sectional curvatures K(X ∧ BX), K(X ∧ CX) vanish
    let (k_xbx, k_xcx) = (0.0, 0.0);
    let rhs = theta.sin().powi(2) * k_xbx + 2.0 * (t1 + t2 - t3 - t4) + theta.cos().powi(2) * k_xcx;
    Ok(CurvatureRecord {
        kind: PlaneKind::Slant,
        terms: vec![
            ("derivative-of-a", t1),
            ("a-x-cx-on-t", t2),
            ("a-cx-x-on-t", t3),
            ("a-x-x-on-t", t4),
        ],
        lhs: 0.0,
        rhs,
        imbalance: rhs.abs(),
    })
}

fn complex_plane(jet: &PointJet<'_, '_>, x: &DVector<f64>) -> Result<CurvatureRecord, GeometryError> {
    let ops = jet.ops();
    let a = jet.along(x);
    let nabla_xx = a.p()?.derivative(x);
    let term = 3.0 * (&ops.pv * &ops.j * nabla_xx).norm_squared();
    // K_*(P) = 0 on the flat target
    let rhs = 0.0 - term;
    Ok(CurvatureRecord {
        kind: PlaneKind::Complex,
        terms: vec![("vertical-j-nabla-squared", term)],
        lhs: 0.0,
        rhs,
        imbalance: rhs.abs(),
    })
}

/// Pick one admissible plane per kind from the computed frames; `None`
/// where the subspace cannot host a `J`-invariant plane.
pub fn default_planes(jet: &PointJet<'_, '_>) -> [(PlaneKind, Option<PlaneSpec>); 3] {
    let ops = jet.ops();
    let first = |f: &Frame| (f.dim() > 0).then(|| f.column(0));
    let mu = (ops.mu.dim() >= 2)
        .then(|| first(&ops.mu))
        .flatten()
        .map(|x| PlaneSpec::holomorphic(PlaneKind::Mu, x, &ops.j));
    let slant = first(&ops.d2).map(|x| PlaneSpec::holomorphic(PlaneKind::Slant, x, &ops.j));
    let complex = first(&ops.d1).map(|x| PlaneSpec::holomorphic(PlaneKind::Complex, x, &ops.j));
    [
        (PlaneKind::Mu, mu),
        (PlaneKind::Slant, slant),
        (PlaneKind::Complex, complex),
    ]
}
