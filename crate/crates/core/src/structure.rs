//! Pointwise matrix realizations of the decomposition operators of `J`
//! relative to `ker F_* ⊕ (ker F_*)^⊥ = ker F_* ⊕ D1 ⊕ D2`.
//!
//! Every operator is a full `m×m` matrix, zero outside its domain subspace:
//!
//! ```text
//! P = D1·D1ᵀ      Q = D2·D2ᵀ
//! φ = Π_V J Π_V   ω = Π_H J Π_V
//! B = Π_V J Π_H   C = Π_H J Π_H
//! ```

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;

use crate::error::GeometryError;
use crate::subspace::{null_space, ComplexStructure, Frame};

#[derive(Clone, Debug)]
pub struct StructureOperators {
    pub j: DMatrix<f64>,
    pub vertical: Frame,
    pub horizontal: Frame,
    pub d1: Frame,
    pub d2: Frame,
    /// Orthonormalized `B·D2`.
    pub b_d2: Frame,
    /// Orthogonal complement of `B·D2` inside `ker F_*`.
    pub mu: Frame,
    pub pv: DMatrix<f64>,
    pub ph: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub phi: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub theta: Option<f64>,
}

const ORTHO_TOL: f64 = 1e-8;

fn concat(a: &Frame, b: &Frame) -> DMatrix<f64> {
    let m = a.ambient_dim();
    let mut out = DMatrix::zeros(m, a.dim() + b.dim());
    out.columns_mut(0, a.dim()).copy_from(a.basis());
    out.columns_mut(a.dim(), b.dim()).copy_from(b.basis());
    out
}

/// Orthogonal complement of `sub` inside `within` (both orthonormal, `sub ⊂ within`).
pub fn complement_within(within: &Frame, sub: &Frame) -> Frame {
    if sub.is_empty() {
        return within.clone();
    }
    if within.is_empty() {
        return within.clone();
    }
    let coords = within.basis().transpose() * sub.basis();
    let (n, _) = null_space(&coords.transpose(), 0.5);
    Frame::span_of(&(within.basis() * n.basis()))
}

impl StructureOperators {
    pub fn new(
        vertical: &Frame,
        d1: &Frame,
        d2: &Frame,
        j: &ComplexStructure,
        theta: Option<f64>,
    ) -> Result<StructureOperators, GeometryError> {
        let m = vertical.ambient_dim();
        if d1.ambient_dim() != m || d2.ambient_dim() != m || j.dim() != m {
            return Err(GeometryError::Shape(format!(
                "frames and J must live in R^{m}"
            )));
        }
        if vertical.dim() + d1.dim() + d2.dim() != m {
            return Err(GeometryError::Shape(format!(
                "dim V + dim D1 + dim D2 = {} ≠ {m}",
                vertical.dim() + d1.dim() + d2.dim()
            )));
        }
        let cross = [
            (vertical.basis().transpose() * d1.basis()).norm(),
            (vertical.basis().transpose() * d2.basis()).norm(),
            (d1.basis().transpose() * d2.basis()).norm(),
        ];
        let worst = cross.iter().copied().fold(0.0, f64::max);
        if worst > ORTHO_TOL {
            return Err(GeometryError::FramesNotOrthogonal(worst));
        }

        let horizontal = Frame::from_orthonormal(concat(d1, d2))?;
        let jm = j.matrix().clone();
        let pv = vertical.projector();
        let ph = horizontal.projector();
        let phi = &pv * &jm * &pv;
        let omega = &ph * &jm * &pv;
        let b = &pv * &jm * &ph;
        let c = &ph * &jm * &ph;
        let b_d2 = if d2.is_empty() {
            Frame::empty(m)
        } else {
            Frame::span_of(&(&b * d2.basis()))
        };
        let mu = complement_within(vertical, &b_d2);
        Ok(StructureOperators {
            p: d1.projector(),
            q: d2.projector(),
            j: jm,
            vertical: vertical.clone(),
            horizontal,
            d1: d1.clone(),
            d2: d2.clone(),
            b_d2,
            mu,
            pv,
            ph,
            phi,
            omega,
            b,
            c,
            theta,
        })
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    /// Projector onto `μ`.
    pub fn pmu(&self) -> DMatrix<f64> {
        self.mu.projector()
    }
}

/// Residuals of the algebraic identity block, one Frobenius norm each,
/// evaluated on the subspace where the identity is asserted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdentityResiduals {
    /// `(φ² + Bω + id)` on `ker F_*`.
    pub phi_sq_plus_b_omega: f64,
    /// `(C² + ωB + id)` on `(ker F_*)^⊥`.
    pub c_sq_plus_omega_b: f64,
    /// `(ωφ + Cω)` on `ker F_*`.
    pub omega_phi_plus_c_omega: f64,
    /// `(BC + φB)` on `(ker F_*)^⊥`.
    pub b_c_plus_phi_b: f64,
    /// `C·D1 = D1`: leakage out of `D1` plus loss of length.
    pub c_preserves_d1: f64,
    /// `B·D1 = 0`.
    pub b_kills_d1: f64,
    /// `C·D2 ⊂ D2`.
    pub c_preserves_d2: f64,
    /// `ω(ker F_*) = D2`: distance between the projector onto the range of
    /// `ω` and `Q`.
    pub omega_onto_d2: f64,
    /// `ker F_* = B·D2 ⊕ μ`.
    pub vertical_split: f64,
    /// `J·μ ⊂ μ`.
    pub mu_j_invariant: f64,
    /// `g(φX, Y) = −g(X, φY)` on vertical pairs.
    pub phi_skew: f64,
    /// `g(ωX, Z) = −g(X, BZ)`.
    pub omega_b_adjoint: f64,
    /// `P + Q = Π_H` and `PQ = 0`.
    pub projector_split: f64,
    /// `‖CX‖ = cos θ ‖X‖` on unit `X ∈ D2`; 0 when `θ` is absent.
    pub c_scales_d2: f64,
}

impl IdentityResiduals {
    pub fn entries(&self) -> [(&'static str, f64); 14] {
        [
            ("phi_sq_plus_b_omega", self.phi_sq_plus_b_omega),
            ("c_sq_plus_omega_b", self.c_sq_plus_omega_b),
            ("omega_phi_plus_c_omega", self.omega_phi_plus_c_omega),
            ("b_c_plus_phi_b", self.b_c_plus_phi_b),
            ("c_preserves_d1", self.c_preserves_d1),
            ("b_kills_d1", self.b_kills_d1),
            ("c_preserves_d2", self.c_preserves_d2),
            ("omega_onto_d2", self.omega_onto_d2),
            ("vertical_split", self.vertical_split),
            ("mu_j_invariant", self.mu_j_invariant),
            ("phi_skew", self.phi_skew),
            ("omega_b_adjoint", self.omega_b_adjoint),
            ("projector_split", self.projector_split),
            ("c_scales_d2", self.c_scales_d2),
        ]
    }

    pub fn max(&self) -> f64 {
        self.entries().iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

pub fn identity_residuals(ops: &StructureOperators) -> IdentityResiduals {
    let m = ops.dim();
    let id = DMatrix::<f64>::identity(m, m);
    let v = ops.vertical.basis();
    let h = ops.horizontal.basis();
    let d1 = ops.d1.basis();
    let d2 = ops.d2.basis();

    let phi_sq_plus_b_omega = ((&ops.phi * &ops.phi + &ops.b * &ops.omega) * v + v).norm();
    let c_sq_plus_omega_b = ((&ops.c * &ops.c + &ops.omega * &ops.b) * h + h).norm();
    let omega_phi_plus_c_omega = ((&ops.omega * &ops.phi + &ops.c * &ops.omega) * v).norm();
    let b_c_plus_phi_b = ((&ops.b * &ops.c + &ops.phi * &ops.b) * h).norm();

    let cd1 = &ops.c * d1;
    let c_preserves_d1 =
        ((&id - &ops.p) * &cd1).norm() + (cd1.norm_squared() - ops.d1.dim() as f64).abs();
    let b_kills_d1 = (&ops.b * d1).norm();
    let c_preserves_d2 = ((&id - &ops.q) * (&ops.c * d2)).norm();

    // columns come from unit vectors, so an absolute floor separates a
    // vanishing ω from rounding noise
    let omega_v = &ops.omega * v;
    let omega_range = if omega_v.amax() < 1e-10 { Frame::empty(m) } else { Frame::span_of(&omega_v) };
    let omega_onto_d2 = (omega_range.projector() - &ops.q).norm();

    let p_bd2 = ops.b_d2.projector();
    let p_mu = ops.pmu();
    let vertical_split = (&p_bd2 + &p_mu - &ops.pv).norm() + (&p_bd2 * &p_mu).norm();
    let mu_j_invariant = ((&id - &p_mu) * (&ops.j * ops.mu.basis())).norm();

    let phi_c = v.transpose() * &ops.phi * v;
    let phi_skew = (&phi_c + phi_c.transpose()).norm();
    let omega_b_adjoint =
        (h.transpose() * &ops.omega * v + (v.transpose() * &ops.b * h).transpose()).norm();
    let projector_split = (&ops.p + &ops.q - &ops.ph).norm() + (&ops.p * &ops.q).norm();

    let c_scales_d2 = match ops.theta {
        Some(theta) => ops
            .d2
            .columns()
            .map(|x| ((&ops.c * x).norm() - theta.cos()).abs())
            .fold(0.0, f64::max),
        None => 0.0,
    };

    IdentityResiduals {
        phi_sq_plus_b_omega,
        c_sq_plus_omega_b,
        omega_phi_plus_c_omega,
        b_c_plus_phi_b,
        c_preserves_d1,
        b_kills_d1,
        c_preserves_d2,
        omega_onto_d2,
        vertical_split,
        mu_j_invariant,
        phi_skew,
        omega_b_adjoint,
        projector_split,
        c_scales_d2,
    }
}

/// `‖(C² + cos²θ·I)·D2‖_F`; vacuously 0 when `D2` is empty.
pub fn c_square_residual(ops: &StructureOperators) -> Result<f64, GeometryError> {
    if ops.d2.is_empty() {
        return Ok(0.0);
    }
    let theta = ops.theta.ok_or(GeometryError::ThetaAbsent)?;
    let d2 = ops.d2.basis();
    let cos2 = theta.cos().powi(2);
    Ok((&ops.c * &ops.c * d2 + d2 * cos2).norm())
}

/// `Ĵ = J·P + (1/cos θ)·C·Q` with its defect `‖(Ĵ² + I)·H‖_F`.
#[derive(Clone, Debug)]
pub struct JHat {
    pub matrix: DMatrix<f64>,
    pub residual: f64,
}

pub fn j_hat(ops: &StructureOperators) -> Result<JHat, GeometryError> {
    let jp = &ops.j * &ops.p;
    let matrix = if ops.d2.is_empty() {
        jp
    } else {
        let theta = ops.theta.ok_or(GeometryError::ThetaAbsent)?;
        if theta >= FRAC_PI_2 - 1e-12 {
            return Err(GeometryError::JHatUndefined);
        }
        jp + (&ops.c * &ops.q) / theta.cos()
    };
    let h = ops.horizontal.basis();
    let residual = (&matrix * &matrix * h + h).norm();
    Ok(JHat { matrix, residual })
}
