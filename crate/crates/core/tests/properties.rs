use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use sublab::classify::{analyze_with, classify_points, CheckSelection, SamplingInfo, Strategy as SampleStrategy};
use sublab::corpus::{builtin_corpus, fixture, Fixture};
use sublab::oneill::{second_fundamental_form_exact, PointJet, ProjectorField, StructureField};
use sublab::structure::StructureOperators;
use sublab::subspace::{
    horizontal_space, kaehler_angle_spectrum, principal_angles, split_d1_d2, subspace_distance, vertical_space,
    ComplexStructure, Frame,
};
use sublab::{MapDefinition, Params, Tolerances};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn point(m: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0f64..2.0, m).prop_map(DVector::from_vec)
}

/// Random orthogonal k×k matrix from the QR factor of a random matrix.
fn orthogonal(k: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, k * k).prop_filter_map("singular sample", move |v| {
        let a = DMatrix::from_vec(k, k, v);
        if a.determinant().abs() < 1e-3 {
            return None;
        }
        Some(a.qr().q())
    })
}

fn field_for(f: &Fixture, params: &Params) -> (MapDefinition, Params, StructureField) {
    (f.map(), f.params(params), StructureField::Constant(f.structure()))
}

fn radial_point() -> impl Strategy<Value = DVector<f64>> {
    point(4).prop_filter("outside the singular core", |p| p.norm_squared() > 0.25)
}

fn fixture_and_point() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (0..builtin_corpus().len(), prop::collection::vec(-2.0f64..2.0, 12))
}

fn usable(f: &Fixture, raw: &[f64]) -> Option<DVector<f64>> {
    let m = f.map().domain_dim;
    let p = DVector::from_column_slice(&raw[..m]);
    match f.regular {
        Some(ok) if !ok(p.as_slice()) => None,
        _ => Some(p),
    }
}

fn angle_params() -> impl Strategy<Value = Params> {
    (0.05f64..1.5, 0.05f64..1.5).prop_map(|(a, b)| Params::from([("alpha".to_string(), a), ("beta".to_string(), b)]))
}

const NONLINEAR: &str = "\
domain 3
codomain 2
F1 = sin(x1)*exp(x2) + x3*x3*x1
F2 = sqrt(1 + x1*x1 + x2*x2) / (2 + cos(x3))
";

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn jacobian_matches_central_differences((idx, raw) in fixture_and_point()) {
        let f = &builtin_corpus()[idx];
        let Some(p) = usable(f, &raw) else { return Ok(()) };
        let map = f.map();
        let params = f.params(&Params::new());
        let jac = map.jacobian(p.as_slice(), &params).unwrap();
        let h = 1e-6;
        for k in 0..p.len() {
            let mut up = p.clone();
            let mut dn = p.clone();
            up[k] += h;
            dn[k] -= h;
            let fu = map.eval(up.as_slice(), &params).unwrap();
            let fd = map.eval(dn.as_slice(), &params).unwrap();
            for i in 0..fu.len() {
                let fdv = (fu[i] - fd[i]) / (2.0 * h);
                let scale = jac[(i, k)].abs().max(1.0);
                prop_assert!((fdv - jac[(i, k)]).abs() / scale < 1e-6, "{} d{}/dx{}", f.name, i, k);
            }
        }
    }

    #[test]
    fn directional_second_is_symmetric(p in point(3), u in point(3), v in point(3)) {
        let map = MapDefinition::parse(NONLINEAR).unwrap();
        let params = Params::new();
        let uv = map.directional_second(p.as_slice(), &params, u.as_slice(), v.as_slice()).unwrap();
        let vu = map.directional_second(p.as_slice(), &params, v.as_slice(), u.as_slice()).unwrap();
        for (a, b) in uv.iter().zip(&vu) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        let again = map.directional_second(p.as_slice(), &params, u.as_slice(), v.as_slice()).unwrap();
        prop_assert_eq!(uv.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), again.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn compressed_structure_is_skew(cols in prop::collection::vec(-1.0f64..1.0, 6 * 3)) {
        let h = Frame::span_of(&DMatrix::from_vec(6, 3, cols));
        let j = ComplexStructure::standard(6).unwrap();
        let m = h.basis().transpose() * j.matrix() * h.basis();
        prop_assert!((&m + m.transpose()).amax() < 1e-12);
        let spec = kaehler_angle_spectrum(&h, &j);
        for s in &spec.sigma_sq {
            prop_assert!((0.0..=1.0).contains(s));
        }
        let g = spec.frame.basis().transpose() * spec.frame.basis();
        prop_assert!((g - DMatrix::identity(h.dim(), h.dim())).amax() < 1e-12);
    }

    #[test]
    fn split_is_frame_independent(params in angle_params(), p in point(8), q in orthogonal(4)) {
        let f = fixture("ex4_7").unwrap();
        let map = f.map();
        let jac = map.jacobian(p.as_slice(), &f.params(&params)).unwrap();
        let horizontal = horizontal_space(&vertical_space(&jac, 1e-8).unwrap());
        let j = f.structure();
        let a = split_d1_d2(&kaehler_angle_spectrum(&horizontal, &j), 1e-6);
        let b = split_d1_d2(&kaehler_angle_spectrum(&horizontal.rotated(&q), &j), 1e-6);
        prop_assert!(subspace_distance(&a.d1, &b.d1) < 1e-8);
        prop_assert!(subspace_distance(&a.d2, &b.d2) < 1e-8);
        match (a.theta, b.theta) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-8),
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn split_structure_on_fixtures((idx, raw) in fixture_and_point(), params in angle_params()) {
        let f = &builtin_corpus()[idx];
        let Some(p) = usable(f, &raw) else { return Ok(()) };
        let (map, params, j) = field_for(f, &params);
        let field = ProjectorField::new(&map, &params, j, Tolerances::default()).unwrap();
        let a = analyze_with(&field, &p);
        prop_assert!(a.is_valid());
        let ops = a.ops.as_ref().unwrap();
        let n = map.codomain_dim;
        prop_assert_eq!(ops.d1.dim() + ops.d2.dim(), n);
        prop_assert_eq!(ops.vertical.dim() + ops.horizontal.dim(), map.domain_dim);

        let jm = ops.j.clone();
        if !ops.d1.is_empty() {
            let jd1 = Frame::span_of(&(&jm * ops.d1.basis()));
            for c in principal_angles(&jd1, &ops.d1) {
                prop_assert!(c >= 1.0 - 1e-10);
            }
        }
        if !ops.mu.is_empty() {
            let jmu = Frame::span_of(&(&jm * ops.mu.basis()));
            for c in principal_angles(&jmu, &ops.mu) {
                prop_assert!(c >= 1.0 - 1e-10);
            }
        }
        prop_assert_eq!(ops.mu.dim() + ops.b_d2.dim(), ops.vertical.dim());
        prop_assert!((ops.mu.basis().transpose() * ops.b_d2.basis()).amax() < 1e-10);

        if let Some(theta) = ops.theta {
            prop_assert!(theta > 0.0 && theta <= FRAC_PI_2);
            if theta < FRAC_PI_2 {
                prop_assert_eq!(ops.d2.dim() % 2, 0);
                prop_assert_eq!(n % 2, 0);
            }
            for x in ops.d2.columns() {
                prop_assert!(((&ops.c * &x).norm() - theta.cos()).abs() < 1e-10);
            }
        }

        let v = ops.vertical.basis();
        let h = ops.horizontal.basis();
        let phi = v.transpose() * &ops.phi * v;
        prop_assert!((&phi + phi.transpose()).amax() < 1e-10);
        let adj = h.transpose() * &ops.omega * v + (v.transpose() * &ops.b * h).transpose();
        prop_assert!(adj.amax() < 1e-10);
    }

    #[test]
    fn operators_respect_frame_rotation(params in angle_params(), p in point(8), q in orthogonal(4)) {
        let f = fixture("ex4_7").unwrap();
        let (map, params, j) = field_for(&f, &params);
        let field = ProjectorField::new(&map, &params, j, Tolerances::default()).unwrap();
        let a = analyze_with(&field, &p);
        let ops = a.ops.as_ref().unwrap();
        let rotated = StructureOperators::new(
            &ops.vertical.rotated(&q),
            &ops.d1,
            &ops.d2,
            &f.structure(),
            ops.theta,
        ).unwrap();
        prop_assert!((&rotated.phi - &ops.phi).amax() < 1e-12);
        prop_assert!((rotated.pmu() - ops.pmu()).amax() < 1e-10);
    }
}

proptest! {
    #![proptest_config(config(20))]

    #[test]
    fn radial_tensor_symmetries(p in radial_point(), a in point(4), b in point(4)) {
        let f = fixture("radial").unwrap();
        let (map, params, j) = field_for(&f, &Params::new());
        let field = ProjectorField::new(&map, &params, j, Tolerances::default()).unwrap();
        let jet = PointJet::new(&field, &p).unwrap();
        let ops = jet.ops();
        let (x, y) = (&ops.pv * &a, &ops.pv * &b);
        let (z, w) = (&ops.ph * &a, &ops.ph * &b);

        let txy = jet.tensor_t(&x, &y);
        prop_assert!((&txy - jet.tensor_t(&y, &x)).norm() < 1e-6);
        prop_assert!((&ops.pv * &txy).norm() < 1e-8);
        let azw = jet.tensor_a(&z, &w);
        prop_assert!((&azw + jet.tensor_a(&w, &z)).norm() < 1e-6);
        prop_assert!((&ops.ph * &azw).norm() < 1e-8);

        // metric compatibility of the fiber connection
        let c = &ops.pv * DVector::from_fn(4, |i, _| (i as f64 + 1.0).sin());
        let lhs = jet.hat_nabla(&x, &y).dot(&c) + y.dot(&jet.hat_nabla(&x, &c));
        prop_assert!(lhs.abs() < 1e-6 * (1.0 + x.norm() * y.norm() * c.norm()));
    }

    #[test]
    fn second_fundamental_form_two_paths(p in radial_point(), a in point(4), b in point(4)) {
        let f = fixture("radial").unwrap();
        let (map, params, j) = field_for(&f, &Params::new());
        let field = ProjectorField::new(&map, &params, j, Tolerances::default()).unwrap();
        let fd = sublab::oneill::second_fundamental_form(&field, &p, &a, &b).unwrap();
        let exact = second_fundamental_form_exact(&field, &p, &a, &b).unwrap();
        prop_assert!((fd - exact).norm() < 1e-8 * (1.0 + a.norm() * b.norm()));
    }

    #[test]
    fn mean_curvature_is_frame_independent(p in radial_point(), q in orthogonal(3)) {
        let f = fixture("radial").unwrap();
        let (map, params, j) = field_for(&f, &Params::new());
        let field = ProjectorField::new(&map, &params, j, Tolerances::default()).unwrap();
        let jet = PointJet::new(&field, &p).unwrap();
        let h = jet.mean_curvature().unwrap();
        let hr = jet.mean_curvature_in(&jet.ops().vertical.rotated(&q)).unwrap();
        prop_assert!((h - hr).norm() < 1e-8);
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn verdict_ignores_sample_order(
        idx in 0..builtin_corpus().len(),
        seed in any::<u64>(),
        shuffle in Just(()).prop_perturb(|_, mut rng| {
            let mut order: Vec<usize> = (0..12).collect();
            for i in (1..order.len()).rev() {
                order.swap(i, (rng.next_u32() as usize) % (i + 1));
            }
            order
        }),
    ) {
        let f = &builtin_corpus()[idx];
        let (map, params, j) = field_for(f, &Params::new());
        let field = ProjectorField::new(&map, &params, j, Tolerances::default()).unwrap();
        let sampler = sublab::Sampler::random(12, seed).with_regular(f.regular);
        let pts = sampler.points(map.domain_dim);
        let permuted: Vec<_> = shuffle.iter().map(|&i| pts[i].clone()).collect();
        let info = SamplingInfo { strategy: SampleStrategy::Random, n: 12, seed };
        let a = classify_points(&field, &pts, info.clone(), &CheckSelection::None).unwrap();
        let b = classify_points(&field, &permuted, info, &CheckSelection::None).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.theta, b.theta);
        prop_assert_eq!(a.dims, b.dims);
        prop_assert_eq!(a.verdict, f.expected_verdict(&params));
        if let Some(theta) = a.theta {
            for pa in &a.analyses {
                prop_assert!((pa.theta().unwrap() - theta).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn classification_is_deterministic() {
    for f in builtin_corpus() {
        let (map, params, j) = field_for(&f, &Params::new());
        let sampler = sublab::Sampler::random(6, 7).with_regular(f.regular);
        let run = || {
            sublab::classify(&map, &j, &params, &sampler, Tolerances::default(), &CheckSelection::All).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.points, b.points, "{}", f.name);
        assert_eq!(a.checks, b.checks);
    }
}
