use std::collections::BTreeSet;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use sublab::classify::{CheckSelection, ClassificationReport, Sampler};
use sublab::corpus::{builtin_corpus, fixture, Fixture};
use sublab::oneill::StructureField;
use sublab::subspace::{principal_angles, Frame};
use sublab::{classify, Params, Tolerances};

use crate::analyze::tolerances;
use crate::VerifyArgs;

const THETA_TOL: f64 = 1e-9;
const SPAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub name: String,
    pub values: Vec<f64>,
}

pub fn parse_sweep(s: &str) -> Result<Sweep> {
    let (name, range) = s.split_once('=').with_context(|| format!("--sweep `{s}`: expected k=a:b:step"))?;
    let parts: Vec<f64> = range
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("--sweep `{s}`: bad number"))?;
    let [a, b, step] = parts[..] else {
        bail!("--sweep `{s}`: expected k=a:b:step");
    };
    if !(step > 0.0 && b >= a) {
        bail!("--sweep `{s}`: need step > 0 and a ≤ b");
    }
    // inclusive of b up to rounding in the step count
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok(Sweep {
        name: name.trim().to_string(),
        values: (0..count).map(|i| a + step * i as f64).collect(),
    })
}

fn classify_fixture(f: &Fixture, params: &Params, n: usize, seed: u64, tols: Tolerances, sel: &CheckSelection) -> Result<ClassificationReport> {
    let sampler = Sampler::random(n, seed).with_regular(f.regular);
    Ok(classify(&f.map(), &StructureField::Constant(f.structure()), params, &sampler, tols, sel)?)
}

/// Verdict and angle against the fixture's expectations.
fn compare_label(f: &Fixture, params: &Params, r: &ClassificationReport, problems: &mut Vec<String>) -> f64 {
    let want = f.expected_verdict(params);
    if r.verdict != want {
        problems.push(format!("verdict {} (expected {want})", r.verdict));
    }
    match (f.expected_theta(params), r.theta) {
        (Some(w), Some(t)) => {
            let d = (t - w).abs();
            if d > THETA_TOL {
                problems.push(format!("θ = {t:.12} (expected {w:.12})"));
            }
            return d;
        }
        (None, None) => {}
        (w, t) => problems.push(format!("θ = {t:?} (expected {w:?})")),
    }
    0.0
}

fn compare_spans(f: &Fixture, params: &Params, r: &ClassificationReport, problems: &mut Vec<String>) {
    let Some(spans) = f.expected.spans else { return };
    let mut worst: f64 = 1.0;
    for a in r.analyses.iter().filter(|a| a.is_valid()) {
        let (d1, d2) = spans(params, &a.point);
        let m = a.point.len();
        for (label, want, got) in [("D1", d1, a.d1()), ("D2", d2, a.d2())] {
            let want = Frame::span_of_vectors(m, &want);
            let Some(got) = got else { continue };
            if want.dim() != got.dim() {
                problems.push(format!("dim {label} = {} (expected {})", got.dim(), want.dim()));
                return;
            }
            worst = principal_angles(&want, got).into_iter().fold(worst, f64::min);
        }
    }
    if worst < 1.0 - SPAN_TOL {
        problems.push(format!("spans off: smallest principal cosine {worst:.12}"));
    }
}

fn compare_checks(f: &Fixture, r: &ClassificationReport, problems: &mut Vec<String>) {
    let expected: BTreeSet<&str> = f.expected_failures.iter().copied().collect();
    let failing: BTreeSet<&str> = r.failing().into_iter().collect();
    for c in failing.difference(&expected) {
        let s = r.checks[*c];
        problems.push(format!("{c} failed: {:.3e} > {:.0e}", s.max_residual, s.tolerance));
    }
    for c in expected.difference(&failing) {
        problems.push(format!("{c} expected to fail but passed"));
    }
}

fn verify_fixture(f: &Fixture, args: &VerifyArgs, tols: Tolerances) -> Result<bool> {
    let params = f.params(&Params::new());
    let r = classify_fixture(f, &params, args.n, args.seed, tols, &CheckSelection::All)?;
    let mut problems = Vec::new();
    compare_label(f, &params, &r, &mut problems);
    compare_spans(f, &params, &r, &mut problems);
    compare_checks(f, &r, &mut problems);
    let theta = r.theta.map_or("-".to_string(), |t| format!("{t:.12}"));
    if problems.is_empty() {
        println!("ok    {:<18} {:<17} θ = {theta}", f.name, r.verdict.as_str());
    } else {
        println!("FAIL  {:<18} {}", f.name, problems.join("; "));
    }
    Ok(problems.is_empty())
}

fn verify_sweep(f: &Fixture, sweeps: &[Sweep], args: &VerifyArgs, tols: Tolerances) -> Result<bool> {
    for s in sweeps {
        if !f.map().params.contains(&s.name) {
            bail!("{} has no parameter `{}`", f.name, s.name);
        }
    }
    let mut cells: Vec<Params> = vec![Params::new()];
    for s in sweeps {
        cells = cells
            .into_iter()
            .flat_map(|c| {
                s.values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.insert(s.name.clone(), *v);
                    c
                })
            })
            .collect();
    }
    let (mut failed, mut worst) = (0usize, 0.0f64);
    for overrides in &cells {
        let params = f.params(overrides);
        f.validate_params(&params).map_err(anyhow::Error::msg)?;
        let r = classify_fixture(f, &params, args.n, args.seed, tols, &CheckSelection::None)?;
        let mut problems = Vec::new();
        worst = worst.max(compare_label(f, &params, &r, &mut problems));
        if !problems.is_empty() {
            failed += 1;
            let at: Vec<String> = overrides.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("FAIL  {} {}: {}", f.name, at.join(" "), problems.join("; "));
        }
    }
    let status = if failed == 0 { "ok  " } else { "FAIL" };
    println!(
        "{status}  {} sweep: {} cells, {failed} failed, max |Δθ| = {worst:.1e} ({})",
        f.name,
        cells.len(),
        f.expected.theta_formula
    );
    Ok(failed == 0)
}

pub fn run(args: &VerifyArgs) -> Result<bool> {
    let start = Instant::now();
    let tols = tolerances(None, args.tol_cluster, None)?;
    let sweeps = args.sweeps.iter().map(|s| parse_sweep(s)).collect::<Result<Vec<_>>>()?;
    let fixtures = match &args.example {
        Some(name) => vec![fixture(name).with_context(|| format!("no builtin fixture `{name}`"))?],
        None if !sweeps.is_empty() => bail!("--sweep needs --example"),
        None => builtin_corpus(),
    };
    let mut ok = true;
    for f in &fixtures {
        ok &= if sweeps.is_empty() {
            verify_fixture(f, args, tols)?
        } else {
            verify_sweep(f, &sweeps, args, tols)?
        };
    }
    eprintln!("elapsed {:.3} s", start.elapsed().as_secs_f64());
    Ok(ok)
}
