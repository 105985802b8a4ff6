//! Covariant-derivative identities that follow from `∇J = 0`, and the
//! foliation and totally-geodesic expressions assembled from them.
//!
//! Extensions: vertical `Y` as `V(q)y`, horizontal `Z` as `H(q)z`. Tensors
//! (`𝒯`, `𝒜`, and the operators `φ, ω, B, C` outside derivatives) act
//! pointwise.

use nalgebra::DVector;
use serde::Serialize;

use super::jet::PointJet;

/// The two sides of each equation are computed term by term; the record
/// holds the max deviation over orthonormal frame pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CovariantResiduals {
    /// vertical × vertical, vertical part
    pub vv_vertical: f64,
    /// vertical × vertical, horizontal part
    pub vv_horizontal: f64,
    pub hh_vertical: f64,
    pub hh_horizontal: f64,
    pub vh_vertical: f64,
    pub vh_horizontal: f64,
}

impl CovariantResiduals {
    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("vv-vertical", self.vv_vertical),
            ("vv-horizontal", self.vv_horizontal),
            ("hh-vertical", self.hh_vertical),
            ("hh-horizontal", self.hh_horizontal),
            ("vh-vertical", self.vh_vertical),
            ("vh-horizontal", self.vh_horizontal),
        ]
    }

    pub fn max(&self) -> f64 {
        self.entries().iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

/// Left-hand sides of the vertical-pair equations, returned as
/// `(∇̂_X φY + 𝒯_X ωY, 𝒯_X φY + H∇_X ωY)` together with the right-hand
/// sides `(φ∇̂_X Y + B𝒯_X Y, ω∇̂_X Y + C𝒯_X Y)`.
pub struct Sides {
    pub lhs: (DVector<f64>, DVector<f64>),
    pub rhs: (DVector<f64>, DVector<f64>),
}

/// `X, Y` vertical.
pub fn vertical_pair(jet: &PointJet<'_, '_>, x: &DVector<f64>, y: &DVector<f64>) -> Sides {
    let ops = jet.ops();
    let a = jet.along(x);
    let phi_y = a.phi();
    let omega_y = a.omega();
    let hat_phi = &ops.pv * phi_y.derivative(y);
    let t_omega = jet.tensor_t(x, &omega_y.value(y));
    let t_phi = jet.tensor_t(x, &phi_y.value(y));
    let h_omega = &ops.ph * omega_y.derivative(y);
    let hat_y = jet.hat_nabla(x, y);
    let t_y = jet.tensor_t(x, y);
    Sides {
        lhs: (hat_phi + t_omega, t_phi + h_omega),
        rhs: (&ops.phi * &hat_y + &ops.b * &t_y, &ops.omega * &hat_y + &ops.c * &t_y),
    }
}

/// `Z, W` horizontal: `(V∇_Z BW + 𝒜_Z CW, 𝒜_Z BW + H∇_Z CW)` against
/// `(φ𝒜_Z W + BH∇_Z W, ω𝒜_Z W + CH∇_Z W)`.
pub fn horizontal_pair(jet: &PointJet<'_, '_>, z: &DVector<f64>, w: &DVector<f64>) -> Sides {
    let ops = jet.ops();
    let a = jet.along(z);
    let bw = a.b();
    let cw = a.c();
    let v_bw = &ops.pv * bw.derivative(w);
    let a_cw = jet.tensor_a(z, &cw.value(w));
    let a_bw = jet.tensor_a(z, &bw.value(w));
    let h_cw = &ops.ph * cw.derivative(w);
    let a_w = jet.tensor_a(z, w);
    let h_w = &ops.ph * a.h.derivative(w);
    Sides {
        lhs: (v_bw + a_cw, a_bw + h_cw),
        rhs: (&ops.phi * &a_w + &ops.b * &h_w, &ops.omega * &a_w + &ops.c * &h_w),
    }
}

/// `X` vertical, `Z` horizontal: `(∇̂_X BZ + 𝒯_X CZ, 𝒯_X BZ + H∇_X CZ)`
/// against `(φ𝒯_X Z + BH∇_X Z, ω𝒯_X Z + CH∇_X Z)`.
pub fn mixed_pair(jet: &PointJet<'_, '_>, x: &DVector<f64>, z: &DVector<f64>) -> Sides {
    let ops = jet.ops();
    let a = jet.along(x);
    let bz = a.b();
    let cz = a.c();
    let hat_bz = &ops.pv * bz.derivative(z);
    let t_cz = jet.tensor_t(x, &cz.value(z));
    let t_bz = jet.tensor_t(x, &bz.value(z));
    let h_cz = &ops.ph * cz.derivative(z);
    let t_z = jet.tensor_t(x, z);
    let h_z = &ops.ph * a.h.derivative(z);
    Sides {
        lhs: (hat_bz + t_cz, t_bz + h_cz),
        rhs: (&ops.phi * &t_z + &ops.b * &h_z, &ops.omega * &t_z + &ops.c * &h_z),
    }
}

fn deviation(s: &Sides) -> (f64, f64) {
    ((&s.lhs.0 - &s.rhs.0).norm(), (&s.lhs.1 - &s.rhs.1).norm())
}

/// All six identities over orthonormal frame pairs of the vertical and
/// horizontal spaces.
pub fn covariant_residuals(jet: &PointJet<'_, '_>) -> CovariantResiduals {
    let ops = jet.ops();
    let vert: Vec<_> = ops.vertical.columns().collect();
    let hor: Vec<_> = ops.horizontal.columns().collect();
    let mut out = CovariantResiduals::default();
    let bump = |slot: &mut f64, v: f64| *slot = slot.max(v);
    for x in &vert {
        for y in &vert {
            let (a, b) = deviation(&vertical_pair(jet, x, y));
            bump(&mut out.vv_vertical, a);
            bump(&mut out.vv_horizontal, b);
        }
        for z in &hor {
            let (a, b) = deviation(&mixed_pair(jet, x, z));
            bump(&mut out.vh_vertical, a);
            bump(&mut out.vh_horizontal, b);
        }
    }
    for z in &hor {
        for w in &hor {
            let (a, b) = deviation(&horizontal_pair(jet, z, w));
            bump(&mut out.hh_vertical, a);
            bump(&mut out.hh_horizontal, b);
        }
    }
    out
}

/// `|ω(∇̂_X φY + 𝒯_X ωY) + C(𝒯_X φY + H∇_X ωY)|`, the horizontal part of
/// `−∇_X Y` for vertical `X, Y`.
pub fn vertical_foliation_term(jet: &PointJet<'_, '_>, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let ops = jet.ops();
    let s = vertical_pair(jet, x, y);
    &ops.omega * &s.lhs.0 + &ops.c * &s.lhs.1
}

/// `φ(V∇_X BY + 𝒜_X CY) + B(𝒜_X BY + H∇_X CY)` for horizontal `X, Y`.
pub fn horizontal_foliation_term(jet: &PointJet<'_, '_>, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let ops = jet.ops();
    let s = horizontal_pair(jet, x, y);
    &ops.phi * &s.lhs.0 + &ops.b * &s.lhs.1
}

/// `ω(∇̂_X BZ + 𝒯_X CZ) + C(𝒯_X BZ + H∇_X CZ)` for vertical `X`,
/// horizontal `Z`.
pub fn mixed_geodesic_term(jet: &PointJet<'_, '_>, x: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
    let ops = jet.ops();
    let s = mixed_pair(jet, x, z);
    &ops.omega * &s.lhs.0 + &ops.c * &s.lhs.1
}
