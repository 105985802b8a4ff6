//! Point-dependent projector fields `q ↦ V(q), P(q), Π_μ(q)` and their
//! directional derivatives.

use nalgebra::{DMatrix, DVector};

use crate::error::GeometryError;
use crate::expr::{BoundMap, MapDefinition, Params};
use crate::structure::StructureOperators;
use crate::subspace::{
    horizontal_space, kaehler_angle_spectrum, split_d1_d2, vertical_space, AngleSpectrum,
    ComplexStructure, SlantSplit,
};
use crate::tolerance::Tolerances;

/// The complex structure as a field on `R^m`.
#[derive(Clone, Debug)]
pub enum StructureField {
    Constant(ComplexStructure),
    /// `J(q) = R(t) J₀ R(t)ᵀ` with `R(t)` the rotation by `t = ⟨rate, q⟩`
    /// in the coordinate plane `(i, k)`. Orthogonal with `J² = −I` at every
    /// point but not parallel; a deliberately non-Kähler control.
    Twisted {
        base: ComplexStructure,
        plane: (usize, usize),
        rate: DVector<f64>,
    },
}

impl StructureField {
    pub fn at(&self, q: &DVector<f64>) -> ComplexStructure {
        match self {
            StructureField::Constant(j) => j.clone(),
            StructureField::Twisted { base, plane, rate } => {
                let t = rate.dot(q);
                let m = base.dim();
                let mut r = DMatrix::<f64>::identity(m, m);
                let (i, k) = *plane;
                r[(i, i)] = t.cos();
                r[(k, k)] = t.cos();
                r[(i, k)] = -t.sin();
                r[(k, i)] = t.sin();
                ComplexStructure::from_matrix_unchecked(&r * base.matrix() * r.transpose())
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, StructureField::Constant(_))
    }

    pub fn dim(&self) -> usize {
        match self {
            StructureField::Constant(j) | StructureField::Twisted { base: j, .. } => j.dim(),
        }
    }
}

/// Everything the pointwise pipeline produces at one point.
#[derive(Clone, Debug)]
pub struct PointFrames {
    pub jacobian: DMatrix<f64>,
    pub spectrum: AngleSpectrum,
    pub split: SlantSplit,
    pub ops: StructureOperators,
}

/// A map with bound parameters and a complex-structure field; evaluates the
/// vertical/horizontal/slant decomposition at any regular point.
#[derive(Clone, Debug)]
pub struct ProjectorField<'a> {
    pub map: BoundMap<'a>,
    pub j: StructureField,
    pub tols: Tolerances,
}

impl<'a> ProjectorField<'a> {
    pub fn new(
        map: &'a MapDefinition,
        params: &Params,
        j: StructureField,
        tols: Tolerances,
    ) -> Result<ProjectorField<'a>, GeometryError> {
        if j.dim() != map.domain_dim {
            return Err(GeometryError::Shape(format!(
                "J is {}×{} but the domain is R^{}",
                j.dim(),
                j.dim(),
                map.domain_dim
            )));
        }
        Ok(ProjectorField {
            map: map.bind(params)?,
            j,
            tols,
        })
    }

    pub fn dim(&self) -> usize {
        self.map.domain_dim()
    }

    pub fn jacobian(&self, q: &DVector<f64>) -> Result<DMatrix<f64>, GeometryError> {
        Ok(self.map.jacobian(q.as_slice())?)
    }

    /// `V(q) = Π_{ker F_*(q)}`.
    pub fn vertical_projector(&self, q: &DVector<f64>) -> Result<DMatrix<f64>, GeometryError> {
        Ok(vertical_space(&self.jacobian(q)?, self.tols.rank)?.projector())
    }

    pub fn frames_at(&self, q: &DVector<f64>) -> Result<PointFrames, GeometryError> {
        let jacobian = self.jacobian(q)?;
        let vertical = vertical_space(&jacobian, self.tols.rank)?;
        let horizontal = horizontal_space(&vertical);
        let j = self.j.at(q);
        let spectrum = kaehler_angle_spectrum(&horizontal, &j);
        let split = split_d1_d2(&spectrum, self.tols.cluster);
        let ops = StructureOperators::new(&vertical, &split.d1, &split.d2, &j, split.theta)?;
        Ok(PointFrames {
            jacobian,
            spectrum,
            split,
            ops,
        })
    }
}

fn not_smooth(e: GeometryError) -> GeometryError {
    match e {
        GeometryError::RankDeficient { .. } => GeometryError::NotSmooth(e.to_string()),
        other => other,
    }
}

/// Central difference along `u` with one Richardson step:
/// `(4·D(h/2) − D(h)) / 3`.
pub fn richardson<F>(f: F, p: &DVector<f64>, u: &DVector<f64>, h: f64) -> Result<DMatrix<f64>, GeometryError>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>, GeometryError>,
{
    let central = |step: f64| -> Result<DMatrix<f64>, GeometryError> {
        let plus = f(&(p + u * step))?;
        let minus = f(&(p - u * step))?;
        Ok((plus - minus) / (2.0 * step))
    };
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// `D_u V(p)` by Richardson-extrapolated central differences.
pub fn projector_derivative(
    field: &ProjectorField<'_>,
    point: &DVector<f64>,
    direction: &DVector<f64>,
    h: f64,
) -> Result<DMatrix<f64>, GeometryError> {
    richardson(|q| field.vertical_projector(q).map_err(not_smooth), point, direction, h)
}

/// `D_u V(p)` from second derivatives of `F`, an independent route.
///
/// With `A = Jac`, `Π_H = A⁺A` and
/// `D Π_H = (I − Π_H) dAᵀ (AAᵀ)⁻¹ A + transpose`, `D V = −D Π_H`.
pub fn projector_derivative_exact(
    field: &ProjectorField<'_>,
    point: &DVector<f64>,
    direction: &DVector<f64>,
) -> Result<DMatrix<f64>, GeometryError> {
    let m = field.dim();
    let a = field.jacobian(point)?;
    let n = a.nrows();
    let mut da = DMatrix::zeros(n, m);
    for k in 0..m {
        let mut ek = DVector::zeros(m);
        ek[k] = 1.0;
        let col = field.map.hessian_form(point.as_slice(), direction, &ek)?;
        da.set_column(k, &col);
    }
    let gram = &a * a.transpose();
    let gram_inv = gram
        .try_inverse()
        .ok_or(GeometryError::RankDeficient { rank: 0, expected: n })?;
    let ph = a.transpose() * &gram_inv * &a;
    let id = DMatrix::<f64>::identity(m, m);
    let half = (&id - &ph) * da.transpose() * gram_inv * &a;
    Ok(-(&half + half.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const RADIAL: &str = "domain 4\ncodomain 1\nF1 = sqrt(x1*x1 + x2*x2 + x3*x3 + x4*x4)\n";

    fn field(map: &MapDefinition) -> ProjectorField<'_> {
        let j = ComplexStructure::standard(map.domain_dim).unwrap();
        ProjectorField::new(map, &Params::new(), StructureField::Constant(j), Tolerances::default()).unwrap()
    }

    /// `D_u (I − x xᵀ/|x|²) = −(u xᵀ + x uᵀ)/|x|² + 2 (x·u) x xᵀ/|x|⁴`.
    fn sphere_projector_derivative(x: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
        let r2 = x.norm_squared();
        -(u * x.transpose() + x * u.transpose()) / r2 + (x * x.transpose()) * (2.0 * x.dot(u) / (r2 * r2))
    }

    #[test]
    fn affine_projector_is_constant() {
        let map = MapDefinition::parse("domain 4\ncodomain 2\nF1 = x1\nF2 = (x2 + x3)/sqrt(2)").unwrap();
        let f = field(&map);
        let p = DVector::from_vec(vec![0.3, -1.0, 0.5, 2.0]);
        let u = DVector::from_vec(vec![1.0, 0.5, -0.2, 0.1]);
        let d = projector_derivative(&f, &p, &u, 1e-4).unwrap();
        assert_eq!(d.norm(), 0.0);
        assert!(projector_derivative_exact(&f, &p, &u).unwrap().norm() < 1e-15);
    }

    #[test]
    fn radial_projector_derivative_matches_analytic_form() {
        let map = MapDefinition::parse(RADIAL).unwrap();
        let f = field(&map);
        let p = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let u = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        let analytic = sphere_projector_derivative(&p, &u);
        let fd = projector_derivative(&f, &p, &u, 1e-4).unwrap();
        let exact = projector_derivative_exact(&f, &p, &u).unwrap();
        assert!((&fd - &analytic).norm() < 1e-9, "{}", (&fd - &analytic).norm());
        assert!((&exact - &analytic).norm() < 1e-14);
        assert!((&fd - fd.transpose()).norm() < 1e-12);
    }

    #[test]
    fn richardson_improves_on_plain_central_differences() {
        let map = MapDefinition::parse(RADIAL).unwrap();
        let f = field(&map);
        let p = DVector::from_vec(vec![0.4, -0.3, 0.2, 0.5]);
        let u = DVector::from_vec(vec![0.3, 0.8, -0.1, 0.2]);
        let analytic = sphere_projector_derivative(&p, &u);
        let plain = |h: f64| {
            let a = f.vertical_projector(&(&p + &u * h)).unwrap();
            let b = f.vertical_projector(&(&p - &u * h)).unwrap();
            ((a - b) / (2.0 * h) - &analytic).norm()
        };
        // second-order convergence of the plain stencil: halving h quarters the error
        let (e1, e2) = (plain(1e-2), plain(5e-3));
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
        let rich = (projector_derivative(&f, &p, &u, 1e-2).unwrap() - &analytic).norm();
        assert!(rich < e2 / 100.0, "richardson {rich} vs plain {e2}");
    }

    #[test]
    fn rank_drop_inside_stencil_is_reported() {
        let map = MapDefinition::parse("domain 2\ncodomain 1\nF1 = x1*x1").unwrap();
        let f = field(&map);
        let p = DVector::from_vec(vec![1e-5, 0.0]);
        let u = DVector::from_vec(vec![1.0, 0.0]);
        assert!(matches!(
            projector_derivative(&f, &p, &u, 1e-5),
            Err(GeometryError::NotSmooth(_))
        ));
    }

    #[test]
    fn twisted_structure_is_pointwise_complex() {
        let base = ComplexStructure::standard(4).unwrap();
        let tw = StructureField::Twisted {
            base,
            plane: (0, 2),
            rate: DVector::from_vec(vec![1.0, 0.0, 0.5, 0.0]),
        };
        let q = DVector::from_vec(vec![0.3, 0.2, -0.4, 1.0]);
        let j = tw.at(&q);
        assert!(ComplexStructure::new(j.matrix().clone()).is_ok());
    }
}
