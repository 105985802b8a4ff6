//! Sample-based classification of a submersion and the table of residual
//! checks.

mod analysis;
pub mod checks;
mod sampling;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use analysis::{analyze_point, analyze_with, PointAnalysis};
pub use checks::{
    check_names, default_tolerance, evaluate_point, foliation_checks, integrability_d1, integrability_d2,
    totally_geodesic_at, umbilical_at, FoliationRecord, GeodesicRecord, IntegrabilityRecord, PointChecks,
    UmbilicalRecord, CHECKS,
};
pub use sampling::{RegularPredicate, Sampler, Strategy};

use crate::error::GeometryError;
use crate::expr::{MapDefinition, Params};
use crate::oneill::{ProjectorField, StructureField};
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "v-invariant")]
    VInvariant,
    #[serde(rename = "v-slant")]
    VSlant,
    #[serde(rename = "v-semi-invariant")]
    VSemiInvariant,
    #[serde(rename = "v-semi-slant")]
    VSemiSlant,
    #[serde(rename = "not-classified")]
    NotClassified,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::VInvariant => "v-invariant",
            Verdict::VSlant => "v-slant",
            Verdict::VSemiInvariant => "v-semi-invariant",
            Verdict::VSemiSlant => "v-semi-slant",
            Verdict::NotClassified => "not-classified",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which checks to run beyond the verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckSelection {
    /// Verdict and submersion test only.
    None,
    All,
    Only(BTreeSet<String>),
}

impl CheckSelection {
    pub fn wants(&self, name: &str) -> bool {
        match self {
            CheckSelection::None => name == "submersion",
            CheckSelection::All => true,
            CheckSelection::Only(set) => name == "submersion" || set.contains(name),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    /// `null` in JSON when a computation failed.
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub applicable: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
    pub vertical: usize,
    #[serde(rename = "D1")]
    pub d1: usize,
    #[serde(rename = "D2")]
    pub d2: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub point: Vec<f64>,
    pub theta: Option<f64>,
    pub sigma_sq: Vec<f64>,
    pub residuals: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingInfo {
    pub strategy: Strategy,
    pub n: usize,
    pub seed: u64,
}

/// Outcome of [`classify`]. All statements are relative to the sampled
/// points.
#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    /// Extra label, e.g. when `D1 = 0` and `θ = π/2` both apply.
    pub annotation: Option<String>,
    pub theta: Option<f64>,
    pub dims: Dims,
    pub points: Vec<PointRecord>,
    pub analyses: Vec<PointAnalysis>,
    pub checks: BTreeMap<String, CheckSummary>,
    pub sampling: SamplingInfo,
    pub tolerances: Tolerances,
    /// Why the verdict is what it is when it is not a clean label.
    pub diagnostics: Vec<String>,
    /// Disagreements between a characterization and its direct test.
    pub findings: Vec<String>,
}

impl ClassificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|(_, c)| !c.pass).map(|(k, _)| k.as_str()).collect()
    }
}

/// Per-check ceilings; unknown names fall back to the built-in table.
pub fn check_tolerances() -> BTreeMap<String, f64> {
    CHECKS.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

struct VerdictOutcome {
    verdict: Verdict,
    theta: Option<f64>,
    annotation: Option<String>,
    diagnostics: Vec<String>,
}

fn decide(valid: &[&PointAnalysis], dims: Option<Dims>, tols: &Tolerances) -> VerdictOutcome {
    let mut out = VerdictOutcome {
        verdict: Verdict::NotClassified,
        theta: None,
        annotation: None,
        diagnostics: Vec::new(),
    };
    let Some(dims) = dims else {
        out.diagnostics
            .push(if valid.is_empty() { "no sampled point is regular" } else { "D1/D2 dimensions vary across points" }.into());
        return out;
    };
    let worst_sub = valid
        .iter()
        .filter_map(|a| a.submersion_residual)
        .fold(0.0, f64::max);
    if worst_sub > tols.submersion {
        out.diagnostics.push(format!(
            "not a Riemannian submersion: horizontal isometry defect {worst_sub:.3e}"
        ));
        return out;
    }
    if valid.iter().any(|a| a.multiple_angles) {
        let w = valid.iter().map(|a| a.cluster_width).fold(0.0, f64::max);
        out.diagnostics
            .push(format!("more than one Kähler angle on D2 (cluster width {w:.3e})"));
        return out;
    }
    if dims.d2 == 0 {
        out.verdict = Verdict::VInvariant;
        return out;
    }
    let thetas: Vec<f64> = valid.iter().filter_map(|a| a.theta()).collect();
    if thetas.len() != valid.len() {
        out.diagnostics.push("slant angle missing at some point".into());
        return out;
    }
    let lo = thetas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = thetas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > tols.angle {
        out.diagnostics
            .push(format!("slant angle varies across points: [{lo:.12}, {hi:.12}]"));
        return out;
    }
    // midpoint of the range: independent of sample order
    let theta = if lo == hi { lo } else { 0.5 * (lo + hi) };
    out.theta = Some(theta);
    let right = theta == FRAC_PI_2;
    out.verdict = if dims.d1 == 0 {
        if right {
            out.annotation = Some("also v-semi-invariant (θ = π/2)".into());
        }
        Verdict::VSlant
    } else if right {
        Verdict::VSemiInvariant
    } else {
        Verdict::VSemiSlant
    };
    out
}

/// Analyze every sample point, decide the verdict and evaluate the
/// selected checks.
pub fn classify(
    map: &MapDefinition,
    j: &StructureField,
    params: &Params,
    sampler: &Sampler,
    tols: Tolerances,
    selection: &CheckSelection,
) -> Result<ClassificationReport, GeometryError> {
    let field = ProjectorField::new(map, params, j.clone(), tols)?;
    classify_field(&field, sampler, selection)
}

pub fn classify_field(
    field: &ProjectorField<'_>,
    sampler: &Sampler,
    selection: &CheckSelection,
) -> Result<ClassificationReport, GeometryError> {
    let samples = sampler.points(field.dim());
    let info = SamplingInfo {
        strategy: sampler.strategy,
        n: sampler.n,
        seed: sampler.seed,
    };
    classify_points(field, &samples, info, selection)
}

/// Classification over an explicit list of sample points. `sampling`
/// is recorded as given; `sampling.n` is the number of points that were
/// requested.
pub fn classify_points(
    field: &ProjectorField<'_>,
    samples: &[DVector<f64>],
    sampling: SamplingInfo,
    selection: &CheckSelection,
) -> Result<ClassificationReport, GeometryError> {
    let tols = field.tols;
    let m = field.dim();
    let n = field.map.codomain_dim();
    let analyses: Vec<PointAnalysis> = samples.iter().map(|p| analyze_with(field, p)).collect();
    let valid: Vec<&PointAnalysis> = analyses.iter().filter(|a| a.is_valid()).collect();

    let dims_of = |a: &PointAnalysis| {
        let o = a.ops.as_ref().expect("valid");
        Dims {
            m,
            n,
            vertical: o.vertical.dim(),
            d1: o.d1.dim(),
            d2: o.d2.dim(),
        }
    };
    let dims = valid.first().map(|a| dims_of(a));
    let consistent = dims.filter(|d| valid.iter().all(|a| dims_of(a) == *d));
    let outcome = decide(&valid, consistent, &tols);

    let mut diagnostics = outcome.diagnostics;
    let skipped = analyses.len() - valid.len();
    if skipped > 0 {
        diagnostics.push(format!("{skipped} sampled point(s) skipped: pipeline failed"));
    }
    if samples.len() < sampling.n {
        diagnostics.push(format!(
            "only {} of {} requested points lie in the regular domain",
            samples.len(),
            sampling.n
        ));
    }

    let wanted = |name: &str| selection.wants(name);
    let mut values: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    let mut points = Vec::with_capacity(analyses.len());
    let mut findings = BTreeSet::new();
    for a in &analyses {
        let pc = evaluate_point(field, a, &wanted);
        let mut residuals: BTreeMap<String, f64> = pc.values.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        residuals.extend(pc.details.clone());
        for (k, v) in &pc.values {
            values.entry(k).or_default().push(*v);
        }
        for f in pc.findings {
            findings.insert(f);
        }
        for e in pc.errors {
            diagnostics.push(format!("at {:?}: {e}", a.point.as_slice()));
        }
        points.push(PointRecord {
            point: a.point.as_slice().to_vec(),
            theta: a.theta(),
            sigma_sq: a.sigma_sq(),
            residuals,
        });
    }

    let mut checks = BTreeMap::new();
    for &(name, tol) in CHECKS {
        if !wanted(name) {
            continue;
        }
        let tol = if name == "submersion" { tols.submersion } else { tol };
        let summary = if name == "even-dimension" {
            even_dimension(&valid, n, tol)
        } else {
            match values.get(name) {
                Some(vs) => {
                    let worst = vs.iter().copied().fold(0.0, |acc: f64, v| if v.is_nan() { f64::INFINITY } else { acc.max(v) });
                    CheckSummary {
                        max_residual: worst,
                        tolerance: tol,
                        pass: worst <= tol,
                        applicable: true,
                    }
                }
                None => CheckSummary {
                    max_residual: 0.0,
                    tolerance: tol,
                    pass: true,
                    applicable: false,
                },
            }
        };
        checks.insert(name.to_string(), summary);
    }

    Ok(ClassificationReport {
        verdict: outcome.verdict,
        annotation: outcome.annotation,
        theta: outcome.theta,
        dims: consistent.or(dims).unwrap_or(Dims {
            m,
            n,
            ..Dims::default()
        }),
        points,
        analyses,
        checks,
        sampling,
        tolerances: tols,
        diagnostics,
        findings: findings.into_iter().collect(),
    })
}

/// A proper slant angle forces an even target and an even `D2`.
fn even_dimension(valid: &[&PointAnalysis], n: usize, tol: f64) -> CheckSummary {
    let slanted: Vec<_> = valid
        .iter()
        .filter(|a| a.theta().is_some_and(|t| t < FRAC_PI_2))
        .collect();
    let bad = slanted
        .iter()
        .any(|a| !n.is_multiple_of(2) || a.d2().is_some_and(|d| !d.dim().is_multiple_of(2)));
    let r = if bad { 1.0 } else { 0.0 };
    CheckSummary {
        max_residual: r,
        tolerance: tol,
        pass: r <= tol,
        applicable: !slanted.is_empty(),
    }
}
