//! Pointwise residual checks. Each returns `None` when its hypothesis
//! (a nonempty distribution, umbilical fibers, ...) does not hold at the
//! point.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::analysis::PointAnalysis;
use crate::error::GeometryError;
use crate::oneill::identities::{mixed_geodesic_term, vertical_foliation_term};
use crate::oneill::{
    covariant_residuals, curvature_check, default_planes, projector_derivative_exact, second_fundamental_form,
    second_fundamental_form_exact, tensor_extended, BracketExtension, PlaneKind, PointJet, ProjectorField,
};
use crate::structure::{c_square_residual, identity_residuals, j_hat};
use crate::subspace::Frame;
use crate::tolerance::{fd_step, EXACT, NESTED_FD, SINGLE_FD};

/// Every check the classifier knows, with its pass ceiling.
pub const CHECKS: &[(&str, f64)] = &[
    ("submersion", 1e-8),
    ("operator-identities", EXACT),
    ("slant-square", EXACT),
    ("j-hat", EXACT),
    ("even-dimension", EXACT),
    ("covariant-identities", 1e-5),
    ("integrability-d1", SINGLE_FD),
    ("integrability-d2", SINGLE_FD),
    ("vertical-foliation", SINGLE_FD),
    ("horizontal-foliation", SINGLE_FD),
    ("d1-foliation", SINGLE_FD),
    ("d2-foliation", SINGLE_FD),
    ("totally-geodesic-map", SINGLE_FD),
    ("second-fundamental-form", SINGLE_FD),
    ("horizontal-second-fundamental-form", SINGLE_FD),
    ("totally-geodesic-equivalence", SINGLE_FD),
    ("umbilical-fibers", SINGLE_FD),
    ("mean-curvature-in-d2", 1e-8),
    ("curvature-mu", NESTED_FD),
    ("curvature-slant-plane", NESTED_FD),
    ("curvature-d1", NESTED_FD),
    ("tensoriality", SINGLE_FD),
    ("jacobian-cross-check", SINGLE_FD),
    ("hessian-cross-check", 1e-8),
    ("projector-derivative-cross-check", SINGLE_FD),
];

pub fn check_names() -> impl Iterator<Item = &'static str> {
    CHECKS.iter().map(|c| c.0)
}

pub fn default_tolerance(name: &str) -> Option<f64> {
    CHECKS.iter().find(|c| c.0 == name).map(|c| c.1)
}

/// Checks that need projector derivatives, and so a [`PointJet`].
const JET_CHECKS: &[&str] = &[
    "covariant-identities",
    "integrability-d1",
    "integrability-d2",
    "vertical-foliation",
    "horizontal-foliation",
    "d1-foliation",
    "d2-foliation",
    "totally-geodesic-map",
    "totally-geodesic-equivalence",
    "umbilical-fibers",
    "mean-curvature-in-d2",
    "curvature-mu",
    "curvature-slant-plane",
    "curvature-d1",
    "tensoriality",
    "projector-derivative-cross-check",
];

fn pairs(a: &Frame, b: &Frame) -> Vec<(DVector<f64>, DVector<f64>)> {
    let bs: Vec<_> = b.columns().collect();
    a.columns()
        .flat_map(|x| bs.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Integrability residuals of `D1` or `D2` on frame pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IntegrabilityRecord {
    /// `max |𝒜_X Y|`.
    pub a_tensor: f64,
    /// `|B[X,Y]|` for `D1`, `|PC[X,Y]|` for `D2`.
    pub bracket_condition: f64,
    /// `|P((𝒜_X BY − 𝒜_Y BX) + H(∇_X CY − ∇_Y CX))|`, `D2` only.
    pub second_condition: Option<f64>,
    /// Frobenius residual: the component of `[X,Y]` leaving the
    /// distribution.
    pub direct: f64,
}

impl IntegrabilityRecord {
    pub fn conditions(&self) -> f64 {
        self.a_tensor.max(self.bracket_condition).max(self.second_condition.unwrap_or(0.0))
    }

    pub fn max(&self) -> f64 {
        self.conditions().max(self.direct)
    }

    /// True when the characterization and the direct test disagree at `tol`.
    pub fn disagrees(&self, tol: f64) -> bool {
        (self.conditions() <= tol) != (self.direct <= tol)
    }
}

/// `D1`, with extensions `P(q)x`; `None` when `dim D1 < 2`.
pub fn integrability_d1(jet: &PointJet<'_, '_>) -> Result<Option<IntegrabilityRecord>, GeometryError> {
    let ops = jet.ops();
    if ops.d1.dim() < 2 {
        return Ok(None);
    }
    let id = DMatrix::<f64>::identity(jet.dim(), jet.dim());
    let mut rec = IntegrabilityRecord::default();
    for (x, y) in pairs(&ops.d1, &ops.d1) {
        let bracket = jet.along(&x).p()?.derivative(&y) - jet.along(&y).p()?.derivative(&x);
        rec.a_tensor = rec.a_tensor.max(jet.tensor_a(&x, &y).norm());
        rec.bracket_condition = rec.bracket_condition.max((&ops.b * &bracket).norm());
        rec.direct = rec.direct.max(((&id - &ops.p) * &bracket).norm());
    }
    Ok(Some(rec))
}

/// `D2`, with extensions `Q(q)x`; `None` when `dim D2 < 2`.
pub fn integrability_d2(jet: &PointJet<'_, '_>) -> Result<Option<IntegrabilityRecord>, GeometryError> {
    let ops = jet.ops();
    if ops.d2.dim() < 2 {
        return Ok(None);
    }
    let id = DMatrix::<f64>::identity(jet.dim(), jet.dim());
    let mut rec = IntegrabilityRecord {
        second_condition: Some(0.0),
        ..Default::default()
    };
    for (x, y) in pairs(&ops.d2, &ops.d2) {
        let ax = jet.along(&x);
        let ay = jet.along(&y);
        let bracket = ax.q()?.derivative(&y) - ay.q()?.derivative(&x);
        let cq_x = &(&ax.h * &ax.j) * ax.q()?;
        let cq_y = &(&ay.h * &ay.j) * ay.q()?;
        let h_part = &ops.ph * (cq_x.derivative(&y) - cq_y.derivative(&x));
        let second = &ops.p * (jet.tensor_a(&x, &(&ops.b * &y)) - jet.tensor_a(&y, &(&ops.b * &x)) + h_part);
        rec.a_tensor = rec.a_tensor.max(jet.tensor_a(&x, &y).norm());
        rec.bracket_condition = rec.bracket_condition.max((&ops.p * &ops.c * &bracket).norm());
        rec.second_condition = Some(rec.second_condition.unwrap_or(0.0).max(second.norm()));
        rec.direct = rec.direct.max(((&id - &ops.q) * &bracket).norm());
    }
    Ok(Some(rec))
}

/// Totally-geodesic-foliation residuals; `None` for empty distributions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FoliationRecord {
    pub vertical: Option<f64>,
    pub horizontal: Option<f64>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
}

pub fn foliation_checks(jet: &PointJet<'_, '_>) -> Result<FoliationRecord, GeometryError> {
    let ops = jet.ops();
    let mut rec = FoliationRecord::default();
    if !ops.vertical.is_empty() {
        rec.vertical = Some(max_of(
            pairs(&ops.vertical, &ops.vertical)
                .iter()
                .map(|(x, y)| vertical_foliation_term(jet, x, y).norm()),
        ));
    }
    if !ops.horizontal.is_empty() {
        rec.horizontal = Some(max_of(pairs(&ops.horizontal, &ops.horizontal).iter().map(|(x, y)| {
            crate::oneill::identities::horizontal_foliation_term(jet, x, y).norm()
        })));
    }
    if !ops.d1.is_empty() {
        let mut worst: f64 = 0.0;
        for (x, y) in pairs(&ops.d1, &ops.d1) {
            let a = jet.along(&x);
            let jp = &a.j * a.p()?;
            let a_jy = jet.tensor_a(&x, &(&ops.j * &y));
            let h_jy = &ops.ph * jp.derivative(&y);
            let first = &ops.phi * &a_jy + &ops.b * &h_jy;
            let second = &ops.q * (&ops.omega * &a_jy + &ops.c * &h_jy);
            worst = worst.max(first.norm()).max(second.norm());
        }
        rec.d1 = Some(worst);
    }
    if !ops.d2.is_empty() {
        let mut worst: f64 = 0.0;
        for (x, y) in pairs(&ops.d2, &ops.d2) {
            let a = jet.along(&x);
            let q = a.q()?;
            let bq = &(&a.v * &a.j) * q;
            let cq = &(&a.h * &a.j) * q;
            let v_by = &ops.pv * bq.derivative(&y);
            let a_cy = jet.tensor_a(&x, &(&ops.c * &y));
            let a_by = jet.tensor_a(&x, &(&ops.b * &y));
            let h_cy = &ops.ph * cq.derivative(&y);
            let vpart = v_by + a_cy;
            let hpart = a_by + h_cy;
            let first = &ops.phi * &vpart + &ops.b * &hpart;
            let second = &ops.p * (&ops.omega * &vpart + &ops.c * &hpart);
            worst = worst.max(first.norm()).max(second.norm());
        }
        rec.d2 = Some(worst);
    }
    Ok(rec)
}

/// Characterization of totally geodesic maps versus the Hessian of `F`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct GeodesicRecord {
    /// Max of the vertical-pair and mixed-pair conditions.
    pub conditions: f64,
    /// `max |(∇F_*)(·,·)|` over vertical and mixed pairs.
    pub direct: f64,
    /// `max |(∇F_*)(Z₁, Z₂)|` over horizontal pairs.
    pub horizontal_direct: f64,
    /// `max | |condition| − |(∇F_*)| |` pairwise; zero for a Riemannian
    /// submersion because `F_*` is isometric on horizontal vectors.
    pub equivalence: f64,
}

pub fn totally_geodesic_at(jet: &PointJet<'_, '_>) -> Result<GeodesicRecord, GeometryError> {
    let ops = jet.ops();
    let field = jet.field;
    let p = &jet.point;
    let hess = |x: &DVector<f64>, y: &DVector<f64>| second_fundamental_form_exact(field, p, x, y).map(|v| v.norm());
    let mut rec = GeodesicRecord::default();
    for (x, y) in pairs(&ops.vertical, &ops.vertical) {
        let c = vertical_foliation_term(jet, &x, &y).norm();
        let d = hess(&x, &y)?;
        rec.conditions = rec.conditions.max(c);
        rec.direct = rec.direct.max(d);
        rec.equivalence = rec.equivalence.max((c - d).abs());
    }
    for (x, z) in pairs(&ops.vertical, &ops.horizontal) {
        let c = mixed_geodesic_term(jet, &x, &z).norm();
        let d = hess(&x, &z)?;
        rec.conditions = rec.conditions.max(c);
        rec.direct = rec.direct.max(d);
        rec.equivalence = rec.equivalence.max((c - d).abs());
    }
    for (z, w) in pairs(&ops.horizontal, &ops.horizontal) {
        rec.horizontal_direct = rec.horizontal_direct.max(hess(&z, &w)?);
    }
    Ok(rec)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UmbilicalRecord {
    pub residual: f64,
    pub mean_curvature: Vec<f64>,
    /// `|(I − Q)H|`; evaluated only when the fibers are umbilical here.
    /// With `D2` empty this is `|H|`, the minimality statement.
    pub outside_d2: Option<f64>,
}

/// `None` for zero-dimensional fibers.
pub fn umbilical_at(jet: &PointJet<'_, '_>) -> Result<Option<UmbilicalRecord>, GeometryError> {
    if jet.ops().vertical.is_empty() {
        return Ok(None);
    }
    let h = jet.mean_curvature()?;
    let residual = jet.umbilical_residual()?;
    let outside = (residual <= SINGLE_FD).then(|| (&h - &jet.ops().q * &h).norm());
    Ok(Some(UmbilicalRecord {
        residual,
        mean_curvature: h.as_slice().to_vec(),
        outside_d2: outside,
    }))
}

/// Fixed, point-independent probe vectors for extension tests.
fn probe(m: usize, a: f64, b: f64) -> DVector<f64> {
    DVector::from_fn(m, |i, _| (a * i as f64 + b).sin())
}

fn tensoriality_at(jet: &PointJet<'_, '_>) -> Result<f64, GeometryError> {
    let m = jet.dim();
    let slope = DMatrix::from_fn(m, m, |i, k| (0.7 * (i * m + k) as f64).sin());
    let mut worst: f64 = 0.0;
    for (a, b) in [(1.3, 0.7), (2.1, 0.2)] {
        let e = probe(m, a, b);
        let f = probe(m, b + 0.5, a);
        let t = tensor_extended(jet.field, &jet.point, &e, &f, &slope, true)?;
        let at = tensor_extended(jet.field, &jet.point, &e, &f, &slope, false)?;
        worst = worst.max((t - jet.tensor_t(&e, &f)).norm());
        worst = worst.max((at - jet.tensor_a(&e, &f)).norm());
    }
    Ok(worst)
}

fn jacobian_cross_check(field: &ProjectorField<'_>, p: &DVector<f64>, jac: &DMatrix<f64>) -> Result<f64, GeometryError> {
    let m = p.len();
    let h = fd_step(p.norm());
    let f = |q: &DVector<f64>| -> Result<DVector<f64>, GeometryError> {
        Ok(DVector::from_vec(field.map.eval(q.as_slice())?))
    };
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let mut e = DVector::zeros(m);
        e[i] = 1.0;
        let central = |s: f64| -> Result<DVector<f64>, GeometryError> { Ok((f(&(p + &e * s))? - f(&(p - &e * s))?) / (2.0 * s)) };
        let d = (central(h / 2.0)? * 4.0 - central(h)?) / 3.0;
        worst = worst.max((d - jac.column(i)).amax());
    }
    Ok(worst)
}

fn hessian_cross_check(field: &ProjectorField<'_>, p: &DVector<f64>, frame: &[DVector<f64>]) -> Result<f64, GeometryError> {
    let mut worst: f64 = 0.0;
    for x in frame {
        for y in frame {
            let a = second_fundamental_form(field, p, x, y)?;
            let b = second_fundamental_form_exact(field, p, x, y)?;
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

fn projector_cross_check(jet: &PointJet<'_, '_>) -> Result<f64, GeometryError> {
    let m = jet.dim();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let mut e = DVector::zeros(m);
        e[i] = 1.0;
        let exact = projector_derivative_exact(jet.field, &jet.point, &e)?;
        worst = worst.max((jet.dv(&e) - exact).norm());
    }
    Ok(worst)
}

/// Per-point outcome: headline residual per check plus named
/// sub-residuals.
#[derive(Clone, Debug, Default)]
pub struct PointChecks {
    pub values: BTreeMap<&'static str, f64>,
    pub details: BTreeMap<String, f64>,
    pub findings: Vec<String>,
    pub errors: Vec<String>,
}

impl PointChecks {
    fn put(&mut self, name: &'static str, value: f64) {
        self.values.insert(name, value);
    }

    fn detail(&mut self, name: &str, value: f64) {
        self.details.insert(name.to_string(), value);
    }
}

/// Evaluate the selected checks at one valid point. Checks whose
/// computation fails record `+∞` and an error message.
pub fn evaluate_point(
    field: &ProjectorField<'_>,
    analysis: &PointAnalysis,
    wanted: &dyn Fn(&str) -> bool,
) -> PointChecks {
    let mut out = PointChecks::default();
    let Some(ops) = analysis.ops.as_ref() else {
        return out;
    };
    let p = &analysis.point;
    if let Some(r) = analysis.submersion_residual {
        out.put("submersion", r);
    }
    if wanted("operator-identities") {
        let res = identity_residuals(ops);
        for (name, v) in res.entries() {
            out.detail(&format!("operator-identities.{name}"), v);
        }
        out.put("operator-identities", res.max());
    }
    if wanted("slant-square") && !ops.d2.is_empty() {
        if let Ok(r) = c_square_residual(ops) {
            out.put("slant-square", r);
        }
    }
    let jhat_applicable = ops.d2.is_empty() || ops.theta.is_some_and(|t| t < FRAC_PI_2);
    if wanted("j-hat") && jhat_applicable {
        match j_hat(ops) {
            Ok(jh) => out.put("j-hat", jh.residual),
            Err(e) => out.errors.push(format!("j-hat: {e}")),
        }
    }
    if wanted("jacobian-cross-check") {
        if let Some(jac) = analysis.jacobian.as_ref() {
            match jacobian_cross_check(field, p, jac) {
                Ok(v) => out.put("jacobian-cross-check", v),
                Err(e) => out.errors.push(format!("jacobian-cross-check: {e}")),
            }
        }
    }
    if wanted("hessian-cross-check") {
        let frame: Vec<_> = ops.vertical.columns().chain(ops.horizontal.columns()).collect();
        match hessian_cross_check(field, p, &frame) {
            Ok(v) => out.put("hessian-cross-check", v),
            Err(e) => out.errors.push(format!("hessian-cross-check: {e}")),
        }
    }
    if wanted("second-fundamental-form") || wanted("horizontal-second-fundamental-form") {
        let hess = |a: &Frame, b: &Frame| -> Result<f64, GeometryError> {
            let mut w: f64 = 0.0;
            for (x, y) in pairs(a, b) {
                w = w.max(second_fundamental_form_exact(field, p, &x, &y)?.norm());
            }
            Ok(w)
        };
        let both = hess(&ops.vertical, &ops.vertical).and_then(|a| Ok(a.max(hess(&ops.vertical, &ops.horizontal)?)));
        match (both, hess(&ops.horizontal, &ops.horizontal)) {
            (Ok(a), Ok(b)) => {
                if !ops.vertical.is_empty() {
                    out.put("second-fundamental-form", a);
                }
                out.put("horizontal-second-fundamental-form", b);
            }
            (Err(e), _) | (_, Err(e)) => out.errors.push(format!("second-fundamental-form: {e}")),
        }
    }

    if !JET_CHECKS.iter().any(|c| wanted(c)) {
        return out;
    }
    let jet = match PointJet::new(field, p) {
        Ok(j) => j,
        Err(e) => {
            for c in JET_CHECKS.iter().filter(|c| wanted(c)) {
                out.put(c, f64::INFINITY);
            }
            out.errors.push(format!("projector derivatives: {e}"));
            return out;
        }
    };
    let run = |name: &'static str, out: &mut PointChecks, f: &mut dyn FnMut(&mut PointChecks) -> Result<(), GeometryError>| {
        if wanted(name) {
            if let Err(e) = f(out) {
                out.put(name, f64::INFINITY);
                out.errors.push(format!("{name}: {e}"));
            }
        }
    };
    run("covariant-identities", &mut out, &mut |out| {
        let r = covariant_residuals(&jet);
        for (n, v) in r.entries() {
            out.detail(&format!("covariant-identities.{n}"), v);
        }
        out.put("covariant-identities", r.max());
        Ok(())
    });
    run("integrability-d1", &mut out, &mut |out| {
        if let Some(r) = integrability_d1(&jet)? {
            out.detail("integrability-d1.a-tensor", r.a_tensor);
            out.detail("integrability-d1.bracket-condition", r.bracket_condition);
            out.detail("integrability-d1.direct", r.direct);
            if r.disagrees(SINGLE_FD) {
                out.findings.push("integrability-d1: conditions and direct bracket test disagree".into());
            }
            out.put("integrability-d1", r.max());
        }
        Ok(())
    });
    run("integrability-d2", &mut out, &mut |out| {
        if let Some(r) = integrability_d2(&jet)? {
            out.detail("integrability-d2.a-tensor", r.a_tensor);
            out.detail("integrability-d2.bracket-condition", r.bracket_condition);
            out.detail("integrability-d2.second-condition", r.second_condition.unwrap_or(0.0));
            out.detail("integrability-d2.direct", r.direct);
            if r.disagrees(SINGLE_FD) {
                out.findings.push("integrability-d2: conditions and direct bracket test disagree".into());
            }
            out.put("integrability-d2", r.max());
        }
        Ok(())
    });
    let wants_foliation = ["vertical-foliation", "horizontal-foliation", "d1-foliation", "d2-foliation"]
        .iter()
        .any(|c| wanted(c));
    if wants_foliation {
        match foliation_checks(&jet) {
            Ok(r) => {
                for (name, v) in [
                    ("vertical-foliation", r.vertical),
                    ("horizontal-foliation", r.horizontal),
                    ("d1-foliation", r.d1),
                    ("d2-foliation", r.d2),
                ] {
                    if let (true, Some(v)) = (wanted(name), v) {
                        out.put(name, v);
                    }
                }
            }
            Err(e) => out.errors.push(format!("foliation: {e}")),
        }
    }
    if wanted("totally-geodesic-map") || wanted("totally-geodesic-equivalence") {
        match totally_geodesic_at(&jet) {
            Ok(r) if !ops.vertical.is_empty() => {
                out.detail("totally-geodesic-map.direct", r.direct);
                out.put("totally-geodesic-map", r.conditions);
                out.put("totally-geodesic-equivalence", r.equivalence);
                if (r.conditions <= SINGLE_FD) != (r.direct <= SINGLE_FD) {
                    out.findings.push("totally-geodesic-map: conditions and Hessian disagree".into());
                }
            }
            Ok(_) => {}
            Err(e) => out.errors.push(format!("totally-geodesic-map: {e}")),
        }
    }
    run("umbilical-fibers", &mut out, &mut |out| {
        if let Some(r) = umbilical_at(&jet)? {
            out.detail("umbilical-fibers.mean-curvature", DVector::from_vec(r.mean_curvature.clone()).norm());
            out.put("umbilical-fibers", r.residual);
            if let (true, Some(v)) = (wanted("mean-curvature-in-d2"), r.outside_d2) {
                out.put("mean-curvature-in-d2", v);
            }
        }
        Ok(())
    });
    if wanted("mean-curvature-in-d2") && !wanted("umbilical-fibers") {
        if let Ok(Some(r)) = umbilical_at(&jet) {
            if let Some(v) = r.outside_d2 {
                out.put("mean-curvature-in-d2", v);
            }
        }
    }
    for (kind, plane) in default_planes(&jet) {
        let name = match kind {
            PlaneKind::Mu => "curvature-mu",
            PlaneKind::Slant => "curvature-slant-plane",
            PlaneKind::Complex => "curvature-d1",
        };
        if !wanted(name) {
            continue;
        }
        if let Some(plane) = plane {
            match curvature_check(&jet, &plane, BracketExtension::Mu) {
                Ok(rec) => {
                    for (t, v) in &rec.terms {
                        out.detail(&format!("{name}.{t}"), *v);
                    }
                    out.put(name, rec.imbalance);
                }
                Err(e) => {
                    out.put(name, f64::INFINITY);
                    out.errors.push(format!("{name}: {e}"));
                }
            }
        }
    }
    run("tensoriality", &mut out, &mut |out| {
        out.put("tensoriality", tensoriality_at(&jet)?);
        Ok(())
    });
    run("projector-derivative-cross-check", &mut out, &mut |out| {
        out.put("projector-derivative-cross-check", projector_cross_check(&jet)?);
        Ok(())
    });
    out
}
