use nalgebra::{DMatrix, DVector};

use super::*;
use crate::expr::{MapDefinition, Params};
use crate::subspace::{ComplexStructure, Frame};
use crate::tolerance::Tolerances;

const RADIAL: &str = "domain 4\ncodomain 1\nF1 = sqrt(x1*x1 + x2*x2 + x3*x3 + x4*x4)\n";
const EX44: &str = "domain 8\ncodomain 4\nF1 = x4\nF2 = x3\nF3 = (x5 - x8)/sqrt(2)\nF4 = x6\n";
const EX46: &str = "domain 10\ncodomain 6\nF1 = (x3 - x5)/sqrt(2)\nF2 = x6\nF3 = (x7 + x9)/sqrt(2)\nF4 = x8\nF5 = x1\nF6 = x2\n";
const ELLIPSOID: &str = "domain 4\ncodomain 1\nF1 = sqrt(x1*x1 + x2*x2 + 4*x3*x3 + 4*x4*x4)\n";

fn field(map: &MapDefinition) -> ProjectorField<'_> {
    let j = ComplexStructure::standard(map.domain_dim).unwrap();
    ProjectorField::new(map, &Params::new(), StructureField::Constant(j), Tolerances::default()).unwrap()
}

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn radial_point(r: f64) -> DVector<f64> {
    v(&[0.3, -0.5, 0.7, 0.4]).normalize() * r
}

fn unit_vertical(jet: &PointJet<'_, '_>) -> DVector<f64> {
    jet.ops().vertical.column(0)
}

#[test]
fn affine_tensors_vanish_identically() {
    for src in [EX44, EX46] {
        let map = MapDefinition::parse(src).unwrap();
        let f = field(&map);
        let p = DVector::from_fn(map.domain_dim, |i, _| 0.3 * i as f64 - 1.0);
        let jet = PointJet::new(&f, &p).unwrap();
        let basis: Vec<_> = (0..map.domain_dim)
            .map(|i| DVector::from_fn(map.domain_dim, |k, _| if k == i { 1.0 } else { 0.0 }))
            .collect();
        for e in &basis {
            for g in &basis {
                assert!(jet.tensor_t(e, g).norm() < 1e-10);
                assert!(jet.tensor_a(e, g).norm() < 1e-10);
                assert!(second_fundamental_form(&f, &p, e, g).unwrap().norm() < 1e-10);
            }
        }
        assert!(jet.mean_curvature().unwrap().norm() < 1e-10);
        assert!(jet.umbilical_residual().unwrap() < 1e-10);
        assert!(covariant_residuals(&jet).max() < 1e-10);
    }
}

#[test]
fn radial_t_tensor_matches_sphere_curvature() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    for r in [0.5, 1.0, 2.0] {
        let p = radial_point(r);
        let jet = PointJet::new(&f, &p).unwrap();
        let x = unit_vertical(&jet);
        assert!((jet.tensor_t(&x, &x).norm() - 1.0 / r).abs() < 1e-6);
        // the standalone path agrees
        let t = tensor_t(&f, &p, &x, &x).unwrap();
        assert!((&t - jet.tensor_t(&x, &x)).norm() < 1e-8);
        // mean curvature is −x̂/r
        let hm = jet.mean_curvature().unwrap();
        assert!((&hm + &p / (r * r)).norm() < 1e-6, "r={r}");
        assert!(jet.umbilical_residual().unwrap() < 1e-6);
        // H lies in D2 = span{x̂}
        let q = &jet.ops().q;
        assert!((&hm - q * &hm).norm() < 1e-8);
    }
}

#[test]
fn radial_t_is_symmetric_and_horizontal_on_vertical_pairs() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    let p = v(&[0.9, 0.2, -1.1, 0.5]);
    let jet = PointJet::new(&f, &p).unwrap();
    let vert: Vec<_> = jet.ops().vertical.columns().collect();
    for x in &vert {
        for y in &vert {
            let txy = jet.tensor_t(x, y);
            assert!((&txy - jet.tensor_t(y, x)).norm() < 1e-6);
            assert!((&jet.ops().pv * &txy).norm() < 1e-8);
        }
    }
}

#[test]
fn radial_a_tensor_vanishes_on_the_line_of_horizontals() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    let p = radial_point(1.3);
    let jet = PointJet::new(&f, &p).unwrap();
    let z = jet.ops().horizontal.column(0);
    assert!(jet.tensor_a(&z, &z).norm() < 1e-6);
    assert!(tensor_a(&f, &p, &z, &z).unwrap().norm() < 1e-6);
}

#[test]
fn hat_nabla_is_metric_and_torsion_free_on_spheres() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    let p = v(&[0.4, 1.2, -0.3, 0.8]);
    let jet = PointJet::new(&f, &p).unwrap();
    let vert: Vec<_> = jet.ops().vertical.columns().collect();
    let h = 1e-4;
    for x in &vert {
        for y in &vert {
            for z in &vert {
                let a = jet.hat_nabla(x, y).dot(z) + jet.hat_nabla(x, z).dot(y);
                assert!(a.abs() < 1e-6);
            }
            // bracket of V(q)x and V(q)y by a direct difference of the fields
            let field_at = |q: &DVector<f64>, w: &DVector<f64>| f.vertical_projector(q).unwrap() * w;
            let dy_x = (field_at(&(&p + x * h), y) - field_at(&(&p - x * h), y)) / (2.0 * h);
            let dx_y = (field_at(&(&p + y * h), x) - field_at(&(&p - y * h), x)) / (2.0 * h);
            let bracket = &jet.ops().pv * (dy_x - dx_y);
            let torsion = jet.hat_nabla(x, y) - jet.hat_nabla(y, x) - bracket;
            assert!(torsion.norm() < 1e-6);
        }
    }
}

#[test]
fn second_fundamental_form_agrees_with_nested_duals() {
    for src in [RADIAL, ELLIPSOID, EX44] {
        let map = MapDefinition::parse(src).unwrap();
        let f = field(&map);
        let p = DVector::from_fn(map.domain_dim, |i, _| 0.7 - 0.25 * i as f64);
        let x = DVector::from_fn(map.domain_dim, |i, _| (i as f64 + 1.0).sin());
        let y = DVector::from_fn(map.domain_dim, |i, _| (2.0 * i as f64).cos());
        let fd = second_fundamental_form(&f, &p, &x, &y).unwrap();
        let exact = second_fundamental_form_exact(&f, &p, &x, &y).unwrap();
        assert!((fd - exact).norm() < 1e-8, "{src}");
    }
}

#[test]
fn radial_second_fundamental_form_is_the_distance_hessian() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    for r in [0.5, 1.0, 2.0] {
        let p = radial_point(r);
        let jet = PointJet::new(&f, &p).unwrap();
        let x = unit_vertical(&jet);
        let z = jet.ops().horizontal.column(0);
        assert!((second_fundamental_form(&f, &p, &x, &x).unwrap()[0] - 1.0 / r).abs() < 1e-8);
        assert!(second_fundamental_form(&f, &p, &z, &z).unwrap().norm() < 1e-8);
        assert!(second_fundamental_form(&f, &p, &x, &z).unwrap().norm() < 1e-8);
    }
}

#[test]
fn mean_curvature_ignores_the_fiber_frame() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    let p = v(&[-0.6, 0.9, 0.2, 1.4]);
    let jet = PointJet::new(&f, &p).unwrap();
    let theta: f64 = 0.83;
    let mut rot = DMatrix::<f64>::identity(3, 3);
    rot[(0, 0)] = theta.cos();
    rot[(1, 1)] = theta.cos();
    rot[(0, 1)] = -theta.sin();
    rot[(1, 0)] = theta.sin();
    let rotated = jet.ops().vertical.rotated(&rot);
    let a = jet.mean_curvature().unwrap();
    let b = jet.mean_curvature_in(&rotated).unwrap();
    assert!((a - b).norm() < 1e-8);
    assert!((mean_curvature(&f, &p).unwrap() - jet.mean_curvature().unwrap()).norm() < 1e-8);
}

#[test]
fn trivial_fiber_has_no_mean_curvature() {
    let map = MapDefinition::parse("domain 2\ncodomain 2\nF1 = x1\nF2 = x2").unwrap();
    let f = field(&map);
    let jet = PointJet::new(&f, &v(&[0.1, 0.2])).unwrap();
    assert_eq!(jet.mean_curvature(), Err(crate::GeometryError::TrivialFiber));
}

#[test]
fn covariant_identities_hold_on_spheres() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    for r in [0.5, 1.0, 2.0] {
        let jet = PointJet::new(&f, &radial_point(r)).unwrap();
        let res = covariant_residuals(&jet);
        assert!(res.max() < 1e-5, "r={r}: {res:?}");
    }
}

#[test]
fn covariant_identities_break_for_a_twisted_structure() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let j = StructureField::Twisted {
        base: ComplexStructure::standard(4).unwrap(),
        plane: (0, 2),
        rate: v(&[0.0, 1.0, 0.0, 1.0]),
    };
    let f = ProjectorField::new(&map, &Params::new(), j, Tolerances::default()).unwrap();
    let jet = PointJet::new(&f, &v(&[0.8, 0.3, -0.5, 0.6])).unwrap();
    assert!(covariant_residuals(&jet).max() > 1e-3);
}

#[test]
fn vertical_foliation_term_is_the_fiber_second_fundamental_form() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    let r = 1.0;
    let jet = PointJet::new(&f, &radial_point(r)).unwrap();
    let x = unit_vertical(&jet);
    let term = identities::vertical_foliation_term(&jet, &x, &x);
    assert!((term.norm() - 1.0 / r).abs() < 1e-6);
    // horizontal lines are geodesics
    let z = jet.ops().horizontal.column(0);
    assert!(identities::horizontal_foliation_term(&jet, &z, &z).norm() < 1e-6);
}

#[test]
fn ellipsoid_fibers_are_not_umbilical() {
    let map = MapDefinition::parse(ELLIPSOID).unwrap();
    let f = field(&map);
    let p = v(&[0.7, -0.2, 0.4, 0.3]);
    let jet = PointJet::new(&f, &p).unwrap();
    // shape operator oracle: −Hess g / |∇g| restricted to the tangent space
    let g = (p[0] * p[0] + p[1] * p[1] + 4.0 * p[2] * p[2] + 4.0 * p[3] * p[3]).sqrt();
    let grad = v(&[p[0], p[1], 4.0 * p[2], 4.0 * p[3]]) / g;
    let dmat = DMatrix::from_diagonal(&v(&[1.0, 1.0, 4.0, 4.0]));
    let hess = (&dmat - &grad * grad.transpose()) / g;
    let tangent = Frame::span_of(&(DMatrix::identity(4, 4) - &grad * grad.transpose() / grad.norm_squared()));
    let tb = tangent.basis();
    let shape = -(tb.transpose() * &hess * tb) / grad.norm();
    let kappas = shape.symmetric_eigenvalues();
    let mean = kappas.mean();
    let spread: f64 = kappas.iter().map(|k| (k - mean).abs()).fold(0.0, f64::max);
    let frob = kappas.iter().map(|k| (k - mean).powi(2)).sum::<f64>().sqrt();
    let res = jet.umbilical_residual().unwrap();
    assert!(res > 1e-2);
    assert!(res <= spread + 1e-6, "{res} vs {spread}");
    assert!(res >= frob / 3.0 - 1e-6);
    // the mean curvature magnitude is the mean principal curvature
    assert!((jet.mean_curvature().unwrap().norm() - mean.abs()).abs() < 1e-6);
}

#[test]
fn tensors_do_not_depend_on_the_extension() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    let slope = DMatrix::from_fn(4, 4, |i, k| ((i * 4 + k) as f64 * 0.7).sin());
    let p = v(&[0.5, -0.8, 1.1, 0.3]);
    let jet = PointJet::new(&f, &p).unwrap();
    let e = v(&[0.2, 0.9, -0.4, 0.1]);
    let g = v(&[-0.3, 0.5, 0.6, 1.0]);
    let t2 = tensor_extended(&f, &p, &e, &g, &slope, true).unwrap();
    let a2 = tensor_extended(&f, &p, &e, &g, &slope, false).unwrap();
    assert!((t2 - jet.tensor_t(&e, &g)).norm() < 1e-6);
    assert!((a2 - jet.tensor_a(&e, &g)).norm() < 1e-6);
}

#[test]
fn mu_plane_balances_with_the_mu_extension() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    for r in [0.5, 1.0, 2.0] {
        let jet = PointJet::new(&f, &radial_point(r)).unwrap();
        let [(_, mu), (_, slant), (_, complex)] = default_planes(&jet);
        let rec = curvature_check(&jet, &mu.unwrap(), BracketExtension::Mu).unwrap();
        let k_hat = rec.terms.iter().find(|t| t.0 == "fiber-curvature").unwrap().1;
        assert!((k_hat - 1.0 / (r * r)).abs() < 1e-6);
        assert!(rec.imbalance < 1e-4, "r={r}: {rec:?}");
        let rec2 = curvature_check(&jet, &slant.unwrap(), BracketExtension::Mu).unwrap();
        assert!(rec2.imbalance < 1e-4);
        assert!(complex.is_none());
    }
}

#[test]
fn vertical_extension_leaves_an_inverse_square_gap() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    for r in [0.5, 1.0, 2.0] {
        let jet = PointJet::new(&f, &radial_point(r)).unwrap();
        let plane = default_planes(&jet)[0].1.clone().unwrap();
        let rec = curvature_check(&jet, &plane, BracketExtension::Vertical).unwrap();
        assert!((rec.imbalance - 1.0 / (r * r)).abs() < 1e-4, "r={r}: {}", rec.imbalance);
    }
}

#[test]
fn affine_curvature_formulas_are_all_zero() {
    let map = MapDefinition::parse(EX46).unwrap();
    let f = field(&map);
    let p = DVector::from_fn(10, |i, _| 0.1 * i as f64);
    let jet = PointJet::new(&f, &p).unwrap();
    for (kind, plane) in default_planes(&jet) {
        if let Some(plane) = plane {
            let rec = curvature_check(&jet, &plane, BracketExtension::Mu).unwrap();
            assert!(rec.imbalance < 1e-10, "{kind:?}");
        }
    }
}

#[test]
fn planes_are_validated() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    let p = radial_point(1.0);
    let jet = PointJet::new(&f, &p).unwrap();
    let ops = jet.ops();
    let x = ops.mu.column(0);
    let not_invariant = PlaneSpec {
        kind: PlaneKind::Mu,
        u: x.clone(),
        w: ops.horizontal.column(0),
    };
    assert!(matches!(
        curvature_check(&jet, &not_invariant, BracketExtension::Mu),
        Err(crate::GeometryError::PlaneNotInvariant(_))
    ));
    let wrong_kind = PlaneSpec::holomorphic(PlaneKind::Mu, ops.horizontal.column(0), &ops.j);
    assert!(matches!(
        curvature_check(&jet, &wrong_kind, BracketExtension::Mu),
        Err(crate::GeometryError::PlaneOutsideSubspace(_))
    ));
}

#[test]
fn oneill_table_is_sized_by_the_frame() {
    let map = MapDefinition::parse(RADIAL).unwrap();
    let f = field(&map);
    let jet = PointJet::new(&f, &radial_point(1.0)).unwrap();
    let data = oneill_data(&jet);
    assert_eq!(data.t.len(), 4);
    assert_eq!(data.a[0].len(), 4);
    assert!(data.h_mean.is_some());
}
