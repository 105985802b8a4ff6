//! First-order jets of the projector fields at a point.
//!
//! A [`PointJet`] differentiates `V`, `P`, `Π_μ` and `J` along every
//! coordinate axis once; derivatives along other directions follow by
//! linearity. Vector fields built as products of these fields applied to a
//! constant vector (`φỸ = V J V y`, `CỸ = H J Q y`, ...) are differentiated
//! with the product rule through [`MatJet`].

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use super::field::{richardson, PointFrames, ProjectorField};
use crate::error::GeometryError;
use crate::structure::StructureOperators;
use crate::subspace::Frame;
use crate::tolerance::fd_step;

/// A matrix-valued field reduced to its value and one directional
/// derivative at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct MatJet {
    pub val: DMatrix<f64>,
    pub der: DMatrix<f64>,
}

impl MatJet {
    pub fn new(val: DMatrix<f64>, der: DMatrix<f64>) -> MatJet {
        MatJet { val, der }
    }

    pub fn constant(val: DMatrix<f64>) -> MatJet {
        let der = DMatrix::zeros(val.nrows(), val.ncols());
        MatJet { val, der }
    }

    /// Value of the field `q ↦ M(q)·y` at the point.
    pub fn value(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.val * y
    }

    /// Directional derivative of the field `q ↦ M(q)·y`.
    pub fn derivative(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.der * y
    }
}

impl Mul<&MatJet> for &MatJet {
    type Output = MatJet;
    fn mul(self, rhs: &MatJet) -> MatJet {
        MatJet {
            val: &self.val * &rhs.val,
            der: &self.der * &rhs.val + &self.val * &rhs.der,
        }
    }
}

impl Add<&MatJet> for &MatJet {
    type Output = MatJet;
    fn add(self, rhs: &MatJet) -> MatJet {
        MatJet {
            val: &self.val + &rhs.val,
            der: &self.der + &rhs.der,
        }
    }
}

impl Sub<&MatJet> for &MatJet {
    type Output = MatJet;
    fn sub(self, rhs: &MatJet) -> MatJet {
        MatJet {
            val: &self.val - &rhs.val,
            der: &self.der - &rhs.der,
        }
    }
}

/// All projector jets along one direction.
#[derive(Clone, Debug)]
pub struct Along {
    pub direction: DVector<f64>,
    pub v: MatJet,
    pub h: MatJet,
    pub j: MatJet,
    split: Result<[MatJet; 3], GeometryError>,
}

impl Along {
    pub fn p(&self) -> Result<&MatJet, GeometryError> {
        self.split.as_ref().map(|s| &s[0]).map_err(Clone::clone)
    }

    pub fn q(&self) -> Result<&MatJet, GeometryError> {
        self.split.as_ref().map(|s| &s[1]).map_err(Clone::clone)
    }

    pub fn mu(&self) -> Result<&MatJet, GeometryError> {
        self.split.as_ref().map(|s| &s[2]).map_err(Clone::clone)
    }

    /// `V J V`, the field whose action on `Ỹ = V y` is `φỸ`.
    pub fn phi(&self) -> MatJet {
        &(&self.v * &self.j) * &self.v
    }

    pub fn omega(&self) -> MatJet {
        &(&self.h * &self.j) * &self.v
    }

    pub fn b(&self) -> MatJet {
        &(&self.v * &self.j) * &self.h
    }

    pub fn c(&self) -> MatJet {
        &(&self.h * &self.j) * &self.h
    }
}

/// Derivatives of the split-dependent projectors per coordinate axis:
/// `(dP, dΠ_μ)`.
type SplitDerivatives = Vec<(DMatrix<f64>, DMatrix<f64>)>;

/// Projector fields and their coordinate derivatives at one point.
#[derive(Clone, Debug)]
pub struct PointJet<'f, 'a> {
    pub field: &'f ProjectorField<'a>,
    pub point: DVector<f64>,
    pub frames: PointFrames,
    pub step: f64,
    dv: Vec<DMatrix<f64>>,
    dj: Vec<DMatrix<f64>>,
    dsplit: Result<SplitDerivatives, GeometryError>,
}

fn combine(samples: &[DMatrix<f64>; 4], h: f64) -> DMatrix<f64> {
    // samples at p + h, p − h, p + h/2, p − h/2
    let coarse = (&samples[0] - &samples[1]) / (2.0 * h);
    let fine = (&samples[2] - &samples[3]) / h;
    (fine * 4.0 - coarse) / 3.0
}

impl<'f, 'a> PointJet<'f, 'a> {
    pub fn new(field: &'f ProjectorField<'a>, point: &DVector<f64>) -> Result<Self, GeometryError> {
        Self::with_step(field, point, fd_step(point.norm()))
    }

    pub fn with_step(
        field: &'f ProjectorField<'a>,
        point: &DVector<f64>,
        step: f64,
    ) -> Result<Self, GeometryError> {
        let frames = field.frames_at(point)?;
        let m = field.dim();
        let (d1_dim, mu_dim) = (frames.ops.d1.dim(), frames.ops.mu.dim());
        let offsets = [step, -step, step / 2.0, -step / 2.0];
        let mut dv = Vec::with_capacity(m);
        let mut dsplit: Result<SplitDerivatives, GeometryError> = Ok(Vec::with_capacity(m));
        for i in 0..m {
            let mut vs: Vec<DMatrix<f64>> = Vec::with_capacity(4);
            let mut ps = Vec::with_capacity(4);
            let mut mus = Vec::with_capacity(4);
            let mut consistent = true;
            for &o in &offsets {
                let mut q = point.clone();
                q[i] += o;
                let f = field.frames_at(&q).map_err(|e| match e {
                    GeometryError::RankDeficient { .. } => GeometryError::NotSmooth(e.to_string()),
                    other => other,
                })?;
                consistent &= f.ops.d1.dim() == d1_dim && f.ops.mu.dim() == mu_dim;
                vs.push(f.ops.pv.clone());
                ps.push(f.ops.p.clone());
                mus.push(f.ops.pmu());
            }
            let arr = |v: Vec<DMatrix<f64>>| -> [DMatrix<f64>; 4] { v.try_into().expect("four samples") };
            dv.push(combine(&arr(vs), step));
            if let Ok(list) = dsplit.as_mut() {
                if consistent {
                    list.push((combine(&arr(ps), step), combine(&arr(mus), step)));
                } else {
                    dsplit = Err(GeometryError::NotSmooth(
                        "D1/μ dimensions change inside the stencil".into(),
                    ));
                }
            }
        }
        let dj = if field.j.is_constant() {
            vec![DMatrix::zeros(m, m); m]
        } else {
            (0..m)
                .map(|i| {
                    let mut e = DVector::zeros(m);
                    e[i] = 1.0;
                    richardson(|q| Ok(field.j.at(q).matrix().clone()), point, &e, step)
                })
                .collect::<Result<_, _>>()?
        };
        Ok(PointJet {
            field,
            point: point.clone(),
            frames,
            step,
            dv,
            dj,
            dsplit,
        })
    }

    pub fn ops(&self) -> &StructureOperators {
        &self.frames.ops
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    fn lin(list: &[DMatrix<f64>], u: &DVector<f64>) -> DMatrix<f64> {
        let m = u.len();
        let mut out = DMatrix::zeros(m, m);
        for (i, d) in list.iter().enumerate() {
            if u[i] != 0.0 {
                out += d * u[i];
            }
        }
        out
    }

    /// `D_u V` at the point.
    pub fn dv(&self, u: &DVector<f64>) -> DMatrix<f64> {
        Self::lin(&self.dv, u)
    }

    pub fn along(&self, u: &DVector<f64>) -> Along {
        let ops = self.ops();
        let dv = self.dv(u);
        let v = MatJet::new(ops.pv.clone(), dv.clone());
        let h = MatJet::new(ops.ph.clone(), -&dv);
        let j = MatJet::new(ops.j.clone(), Self::lin(&self.dj, u));
        let split = match &self.dsplit {
            Ok(list) => {
                let dps: Vec<DMatrix<f64>> = list.iter().map(|(p, _)| p.clone()).collect();
                let dmus: Vec<DMatrix<f64>> = list.iter().map(|(_, mu)| mu.clone()).collect();
                let dp = Self::lin(&dps, u);
                let dq = -&dv - &dp;
                Ok([
                    MatJet::new(ops.p.clone(), dp),
                    MatJet::new(ops.q.clone(), dq),
                    MatJet::new(ops.pmu(), Self::lin(&dmus, u)),
                ])
            }
            Err(e) => Err(e.clone()),
        };
        Along {
            direction: u.clone(),
            v,
            h,
            j,
            split,
        }
    }

    /// `𝒯_E F = (H − V)·(D_{VE} V)·F`.
    pub fn tensor_t(&self, e: &DVector<f64>, f: &DVector<f64>) -> DVector<f64> {
        let ops = self.ops();
        let ve = &ops.pv * e;
        (&ops.ph - &ops.pv) * (self.dv(&ve) * f)
    }

    /// `𝒜_E F = (H − V)·(D_{HE} V)·F`.
    pub fn tensor_a(&self, e: &DVector<f64>, f: &DVector<f64>) -> DVector<f64> {
        let ops = self.ops();
        let he = &ops.ph * e;
        (&ops.ph - &ops.pv) * (self.dv(&he) * f)
    }

    /// `∇̂_X Y = V·D_X[V(·)y]` for vertical `X`, `Y`.
    pub fn hat_nabla(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let ops = self.ops();
        &ops.pv * (self.dv(x) * y)
    }

    /// `(1/s)·Σ 𝒯_{eᵢ} eᵢ` over the computed vertical frame.
    pub fn mean_curvature(&self) -> Result<DVector<f64>, GeometryError> {
        self.mean_curvature_in(&self.ops().vertical)
    }

    /// Mean curvature using a caller-supplied orthonormal vertical frame.
    pub fn mean_curvature_in(&self, frame: &Frame) -> Result<DVector<f64>, GeometryError> {
        let s = frame.dim();
        if s == 0 {
            return Err(GeometryError::TrivialFiber);
        }
        let mut sum = DVector::zeros(self.dim());
        for e in frame.columns() {
            sum += self.tensor_t(&e, &e);
        }
        Ok(sum / s as f64)
    }

    /// `max |𝒯_X Y − g(X, Y)·H|` over vertical frame pairs.
    pub fn umbilical_residual(&self) -> Result<f64, GeometryError> {
        let hm = self.mean_curvature()?;
        let frame = &self.ops().vertical;
        let mut worst: f64 = 0.0;
        for (i, x) in frame.columns().enumerate() {
            for (k, y) in frame.columns().enumerate() {
                let mut r = self.tensor_t(&x, &y);
                if i == k {
                    r -= &hm;
                }
                worst = worst.max(r.norm());
            }
        }
        Ok(worst)
    }
}
