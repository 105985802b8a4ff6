//! Builtin fixtures: the worked examples with their stated angles and
//! spans, two analytic fixtures, and negative controls.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::DVector;

use crate::classify::{RegularPredicate, Verdict};
use crate::expr::{MapDefinition, Params};
use crate::subspace::ComplexStructure;

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Stated in the published example.
    Published,
    /// Derived by hand for an analytic fixture.
    Analytic,
    /// Immediate from the construction.
    Trivial,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Published => "published",
            Provenance::Analytic => "analytic",
            Provenance::Trivial => "trivial",
        }
    }
}

/// Spanning vectors of the expected `(D1, D2)` at a point.
pub type SpanFn = fn(&Params, &DVector<f64>) -> (Vec<DVector<f64>>, Vec<DVector<f64>>);

#[derive(Clone, Debug)]
pub struct Expected {
    pub verdict: fn(&Params) -> Verdict,
    pub theta: fn(&Params) -> Option<f64>,
    pub theta_formula: &'static str,
    pub spans: Option<SpanFn>,
    pub provenance: Provenance,
}

/// An open or closed parameter interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamRange {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub open: bool,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub source: &'static str,
    pub default_params: Params,
    pub ranges: Vec<ParamRange>,
    pub regular: Option<RegularPredicate>,
    pub expected: Expected,
    /// Checks whose hypotheses fail on this fixture, so they are expected
    /// to exceed tolerance.
    pub expected_failures: &'static [&'static str],
}

impl Fixture {
    pub fn map(&self) -> MapDefinition {
        MapDefinition::parse(self.source).expect("builtin fixture parses")
    }

    pub fn structure(&self) -> ComplexStructure {
        ComplexStructure::standard(self.map().domain_dim).expect("even domain")
    }

    /// Defaults overlaid with `overrides`.
    pub fn params(&self, overrides: &Params) -> Params {
        let mut p = self.default_params.clone();
        p.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
        p
    }

    pub fn validate_params(&self, params: &Params) -> Result<(), String> {
        for r in &self.ranges {
            let Some(&v) = params.get(r.name) else { continue };
            let inside = if r.open { v > r.lo && v < r.hi } else { v >= r.lo && v <= r.hi };
            if !inside {
                let (l, h) = if r.open { ('(', ')') } else { ('[', ']') };
                return Err(format!("{} = {v} outside {l}{}, {}{h}", r.name, r.lo, r.hi));
            }
        }
        Ok(())
    }

    pub fn expected_verdict(&self, params: &Params) -> Verdict {
        (self.expected.verdict)(params)
    }

    pub fn expected_theta(&self, params: &Params) -> Option<f64> {
        (self.expected.theta)(params)
    }
}

fn e(m: usize, idx: &[(usize, f64)]) -> DVector<f64> {
    let mut v = DVector::zeros(m);
    for &(i, c) in idx {
        v[i - 1] = c;
    }
    v
}

fn param(p: &Params, name: &str) -> f64 {
    p.get(name).copied().unwrap_or(f64::NAN)
}

fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

const EX4_3: &str = "\
domain 6
codomain 4
param alpha
F1 = x1
F2 = sin(alpha)*x3 - cos(alpha)*x5
F3 = x6
F4 = x2
";

const EX4_4: &str = "\
domain 8
codomain 4
F1 = x4
F2 = x3
F3 = (x5 - x8)/sqrt(2)
F4 = x6
";

const EX4_5: &str = "\
domain 12
codomain 5
F1 = x2
F2 = (x5 + x6)/sqrt(2)
F3 = (x7 + x9)/sqrt(2)
F4 = (x8 + x10)/sqrt(2)
F5 = x1
";

const EX4_6: &str = "\
domain 10
codomain 6
F1 = (x3 - x5)/sqrt(2)
F2 = x6
F3 = (x7 + x9)/sqrt(2)
F4 = x8
F5 = x1
F6 = x2
";

const EX4_7: &str = "\
domain 8
codomain 4
param alpha
param beta
F1 = x1
F2 = cos(alpha)*x3 - sin(alpha)*x5
F3 = x2
F4 = sin(beta)*x4 + cos(beta)*x6
";

const TRIVIAL_INVARIANT: &str = "\
domain 4
codomain 2
F1 = x1
F2 = x2
";

const RADIAL: &str = "\
domain 4
codomain 1
F1 = sqrt(x1*x1 + x2*x2 + x3*x3 + x4*x4)
";

fn outside_small_ball(x: &[f64]) -> bool {
    x.iter().map(|c| c * c).sum::<f64>() > 0.01
}

fn ex4_7_theta(p: &Params) -> f64 {
    (param(p, "alpha") - param(p, "beta")).sin().abs().clamp(0.0, 1.0).acos()
}

/// The seven builtin fixtures, in a fixed order.
pub fn builtin_corpus() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "ex4_3",
            description: "R^6 → R^4, F = (x1, x3 sin α − x5 cos α, x6, x2)",
            source: EX4_3,
            default_params: params(&[("alpha", 0.7)]),
            ranges: vec![ParamRange {
                name: "alpha",
                lo: 0.0,
                hi: FRAC_PI_2,
                open: true,
            }],
            regular: None,
            expected: Expected {
                verdict: |_| Verdict::VSemiSlant,
                theta: |p| Some(param(p, "alpha")),
                theta_formula: "θ = α",
                spans: Some(|p, _| {
                    let a = param(p, "alpha");
                    (
                        vec![e(6, &[(1, 1.0)]), e(6, &[(2, 1.0)])],
                        vec![e(6, &[(6, 1.0)]), e(6, &[(3, a.sin()), (5, -a.cos())])],
                    )
                }),
                provenance: Provenance::Published,
            },
            expected_failures: &[],
        },
        Fixture {
            name: "ex4_4",
            description: "R^8 → R^4, F = (x4, x3, (x5 − x8)/√2, x6)",
            source: EX4_4,
            default_params: Params::new(),
            ranges: vec![],
            regular: None,
            expected: Expected {
                verdict: |_| Verdict::VSemiSlant,
                theta: |_| Some(FRAC_PI_4),
                theta_formula: "θ = π/4",
                spans: Some(|_, _| {
                    (
                        vec![e(8, &[(3, 1.0)]), e(8, &[(4, 1.0)])],
                        vec![e(8, &[(6, 1.0)]), e(8, &[(5, 1.0), (8, -1.0)])],
                    )
                }),
                provenance: Provenance::Published,
            },
            expected_failures: &[],
        },
        Fixture {
            name: "ex4_5",
            description: "R^12 → R^5, F = (x2, (x5 + x6)/√2, (x7 + x9)/√2, (x8 + x10)/√2, x1)",
            source: EX4_5,
            default_params: Params::new(),
            ranges: vec![],
            regular: None,
            expected: Expected {
                verdict: |_| Verdict::VSemiInvariant,
                theta: |_| Some(FRAC_PI_2),
                theta_formula: "θ = π/2",
                spans: Some(|_, _| {
                    (
                        vec![
                            e(12, &[(1, 1.0)]),
                            e(12, &[(2, 1.0)]),
                            e(12, &[(7, 1.0), (9, 1.0)]),
                            e(12, &[(8, 1.0), (10, 1.0)]),
                        ],
                        vec![e(12, &[(5, 1.0), (6, 1.0)])],
                    )
                }),
                provenance: Provenance::Published,
            },
            expected_failures: &[],
        },
        Fixture {
            name: "ex4_6",
            description: "R^10 → R^6, F = ((x3 − x5)/√2, x6, (x7 + x9)/√2, x8, x1, x2)",
            source: EX4_6,
            default_params: Params::new(),
            ranges: vec![],
            regular: None,
            expected: Expected {
                verdict: |_| Verdict::VSemiSlant,
                theta: |_| Some(FRAC_PI_4),
                theta_formula: "θ = π/4",
                spans: Some(|_, _| {
                    (
                        vec![e(10, &[(1, 1.0)]), e(10, &[(2, 1.0)])],
                        vec![
                            e(10, &[(6, 1.0)]),
                            e(10, &[(8, 1.0)]),
                            e(10, &[(3, 1.0), (5, -1.0)]),
                            e(10, &[(7, 1.0), (9, 1.0)]),
                        ],
                    )
                }),
                provenance: Provenance::Published,
            },
            expected_failures: &[],
        },
        Fixture {
            name: "ex4_7",
            description: "R^8 → R^4, F = (x1, x3 cos α − x5 sin α, x2, x4 sin β + x6 cos β); \
                          α = β gives θ = π/2",
            source: EX4_7,
            default_params: params(&[("alpha", 0.9), ("beta", 0.2)]),
            ranges: vec![],
            regular: None,
            expected: Expected {
                verdict: |p| {
                    let c = (param(p, "alpha") - param(p, "beta")).sin().abs();
                    if c < 1e-12 {
                        Verdict::VSemiInvariant
                    } else if c > 1.0 - 1e-12 {
                        Verdict::VInvariant
                    } else {
                        Verdict::VSemiSlant
                    }
                },
                theta: |p| Some(ex4_7_theta(p)),
                theta_formula: "cos θ = |sin(α − β)|",
                spans: Some(|p, _| {
                    let (a, b) = (param(p, "alpha"), param(p, "beta"));
                    (
                        vec![e(8, &[(1, 1.0)]), e(8, &[(2, 1.0)])],
                        vec![e(8, &[(3, a.cos()), (5, -a.sin())]), e(8, &[(4, b.sin()), (6, b.cos())])],
                    )
                }),
                provenance: Provenance::Published,
            },
            expected_failures: &[],
        },
        Fixture {
            name: "trivial_invariant",
            description: "R^4 → R^2, F = (x1, x2); the horizontal plane is J-invariant",
            source: TRIVIAL_INVARIANT,
            default_params: Params::new(),
            ranges: vec![],
            regular: None,
            expected: Expected {
                verdict: |_| Verdict::VInvariant,
                theta: |_| None,
                theta_formula: "none (D2 = 0)",
                spans: Some(|_, _| (vec![e(4, &[(1, 1.0)]), e(4, &[(2, 1.0)])], vec![])),
                provenance: Provenance::Trivial,
            },
            expected_failures: &[],
        },
        Fixture {
            name: "radial",
            description: "R^4 \\ {0} → R, F = |x|; fibers are round 3-spheres, |𝒯_X X| = 1/r",
            source: RADIAL,
            default_params: Params::new(),
            ranges: vec![],
            regular: Some(outside_small_ball),
            expected: Expected {
                verdict: |_| Verdict::VSlant,
                theta: |_| Some(FRAC_PI_2),
                theta_formula: "θ = π/2 (J∂r ⟂ ∂r)",
                spans: Some(|_, x| (vec![], vec![x.normalize()])),
                provenance: Provenance::Analytic,
            },
            expected_failures: &["totally-geodesic-map", "second-fundamental-form", "vertical-foliation"],
        },
    ]
}

pub fn fixture(name: &str) -> Option<Fixture> {
    builtin_corpus().into_iter().find(|f| f.name == name)
}

/// A plain submersion `R^4 → R^2`, `F = (x1, x3 + x1·x2)`, whose horizontal
/// planes twist: at the origin `𝒜_{e1} e3 = e2`. Not a Riemannian
/// submersion away from the origin.
pub const TWISTED_PLANES: &str = "\
domain 4
codomain 2
F1 = x1
F2 = x3 + x1*x2
";

/// `F = sqrt(x1² + x2² + 4x3² + 4x4²)`: ellipsoidal, non-umbilical fibers.
pub const ELLIPSOID: &str = "\
domain 4
codomain 1
F1 = sqrt(x1*x1 + x2*x2 + 4*x3*x3 + 4*x4*x4)
";

/// The radial fixture's analytic data at radius `r`.
pub mod radial_oracle {
    /// `|𝒯_X X|` for unit vertical `X`.
    pub fn t_norm(r: f64) -> f64 {
        1.0 / r
    }

    /// Sectional curvature of the 3-sphere of radius `r`.
    pub fn fiber_curvature(r: f64) -> f64 {
        1.0 / (r * r)
    }
}
