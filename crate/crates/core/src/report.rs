//! Machine-readable report of a classification run.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classify::{Strategy, CheckSummary, ClassificationReport, Dims, PointRecord, SamplingInfo, Verdict};
use crate::subspace::ComplexStructure;
use crate::tolerance::Tolerances;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapInfo {
    /// Fixture name, or the file name of a user map.
    pub name: String,
    pub source: String,
}

/// The JSON document. Field order is fixed and every map is a `BTreeMap`,
/// so identical inputs serialize to identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub map: MapInfo,
    pub params: BTreeMap<String, f64>,
    #[serde(rename = "J")]
    pub j: Vec<Vec<f64>>,
    pub sampling: SamplingInfo,
    pub tolerances: Tolerances,
    pub verdict: Verdict,
    pub theta: Option<f64>,
    pub dims: Dims,
    pub points: Vec<PointRecord>,
    pub checks: BTreeMap<String, CheckSummary>,
}

impl Report {
    pub fn new(map: MapInfo, params: &BTreeMap<String, f64>, j: &ComplexStructure, c: &ClassificationReport) -> Report {
        let jm = j.matrix();
        Report {
            version: VERSION.to_string(),
            map,
            params: params.clone(),
            j: (0..jm.nrows()).map(|i| jm.row(i).iter().copied().collect()).collect(),
            sampling: c.sampling.clone(),
            tolerances: c.tolerances,
            verdict: c.verdict,
            theta: c.theta,
            dims: c.dims,
            points: c.points.clone(),
            checks: c.checks.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<Report> {
        serde_json::from_str(text)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }
}

/// Human-readable summary; includes the annotation, diagnostics and
/// findings that the JSON leaves out.
pub fn render_text(report: &Report, c: &ClassificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "map       {}", report.map.name);
    if !report.params.is_empty() {
        let ps: Vec<String> = report.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "params    {}", ps.join(" "));
    }
    let d = &report.dims;
    let _ = writeln!(
        s,
        "dims      m={} n={} vertical={} D1={} D2={}",
        d.m, d.n, d.vertical, d.d1, d.d2
    );
    let _ = write!(s, "verdict   {}", report.verdict);
    if let Some(a) = &c.annotation {
        let _ = write!(s, "; {a}");
    }
    let _ = writeln!(s);
    match report.theta {
        Some(t) => {
            let _ = writeln!(s, "theta     {t:.12}");
        }
        None => {
            let _ = writeln!(s, "theta     -");
        }
    }
    let _ = writeln!(
        s,
        "sampling  {} n={} seed={} ({} points)",
        match report.sampling.strategy {
            Strategy::Random => "random",
            Strategy::Grid => "grid",
        },
        report.sampling.n,
        report.sampling.seed,
        report.points.len()
    );
    let _ = writeln!(s, "checks");
    for (name, ch) in &report.checks {
        let status = match (ch.applicable, ch.pass) {
            (false, _) => "n/a ",
            (true, true) => "pass",
            (true, false) => "FAIL",
        };
        if ch.applicable {
            let _ = writeln!(s, "  {status}  {name:<36} {:.3e} (tol {:.0e})", ch.max_residual, ch.tolerance);
        } else {
            let _ = writeln!(s, "  {status}  {name}");
        }
    }
    for line in &c.diagnostics {
        let _ = writeln!(s, "note      {line}");
    }
    for line in &c.findings {
        let _ = writeln!(s, "finding   {line}");
    }
    s
}
