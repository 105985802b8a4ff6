use std::collections::BTreeSet;
use std::fs;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use sublab::classify::{check_names, CheckSelection, Sampler, Strategy};
use sublab::corpus::fixture;
use sublab::oneill::StructureField;
use sublab::report::{render_text, MapInfo, Report};
use sublab::{classify, ComplexStructure, MapDefinition, Params, Tolerances};

use crate::{AnalyzeArgs, Format, Points};

pub fn parse_param(s: &str) -> Result<(String, f64)> {
    let (k, v) = s.split_once('=').with_context(|| format!("--param `{s}`: expected k=v"))?;
    let v: f64 = v.trim().parse().with_context(|| format!("--param `{s}`: `{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

pub fn selection(checks: &[String]) -> Result<CheckSelection> {
    if checks.is_empty() {
        return Ok(CheckSelection::None);
    }
    if checks.iter().any(|c| c == "all") {
        return Ok(CheckSelection::All);
    }
    let known: BTreeSet<&str> = check_names().collect();
    for c in checks {
        if !known.contains(c.as_str()) {
            bail!("unknown check `{c}`; known checks: all, {}", known.into_iter().collect::<Vec<_>>().join(", "));
        }
    }
    Ok(CheckSelection::Only(checks.iter().cloned().collect()))
}

pub fn tolerances(rank: Option<f64>, cluster: Option<f64>, angle: Option<f64>) -> Result<Tolerances> {
    let mut t = Tolerances::default();
    for (slot, value, flag) in [
        (&mut t.rank, rank, "--tol-rank"),
        (&mut t.cluster, cluster, "--tol-cluster"),
        (&mut t.angle, angle, "--tol-angle"),
    ] {
        if let Some(v) = value {
            if !(v.is_finite() && v >= 0.0) {
                bail!("{flag} must be a non-negative number");
            }
            *slot = v;
        }
    }
    Ok(t)
}

fn structure(arg: &str, m: usize) -> Result<ComplexStructure> {
    let j = if arg == "standard" {
        ComplexStructure::standard(m)?
    } else {
        let text = fs::read_to_string(arg).with_context(|| format!("reading J file {arg}"))?;
        ComplexStructure::parse_text(&text).with_context(|| format!("J file {arg}"))?
    };
    if j.dim() != m {
        bail!("J is {}×{} but the domain is R^{m}", j.dim(), j.dim());
    }
    Ok(j)
}

pub fn run(args: &AnalyzeArgs) -> Result<bool> {
    let start = Instant::now();
    let mut overrides = Params::new();
    for p in &args.params {
        let (k, v) = parse_param(p)?;
        overrides.insert(k, v);
    }

    let (map, info, params, regular) = match (&args.map, &args.example) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let map = MapDefinition::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
            let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
            (map, MapInfo { name, source: text }, overrides, None)
        }
        (None, Some(name)) => {
            let f = fixture(name).with_context(|| format!("no builtin fixture `{name}` (see `sublab corpus`)"))?;
            let params = f.params(&overrides);
            f.validate_params(&params).map_err(anyhow::Error::msg)?;
            let info = MapInfo {
                name: f.name.to_string(),
                source: f.source.to_string(),
            };
            (f.map(), info, params, f.regular)
        }
        (None, None) => bail!("one of --map or --example is required"),
    };
    for k in params.keys() {
        if !map.params.contains(k) {
            bail!("parameter `{k}` is not declared by the map");
        }
    }

    let j = structure(&args.j, map.domain_dim)?;
    let tols = tolerances(args.tol_rank, args.tol_cluster, args.tol_angle)?;
    let sel = selection(&args.checks)?;
    let mut sampler = match args.points {
        Points::Random => Sampler::random(args.n, args.seed),
        Points::Grid => Sampler::grid(args.n),
    };
    if sampler.strategy == Strategy::Grid {
        sampler.seed = args.seed;
    }
    let sampler = sampler.with_regular(regular);

    let result = classify(&map, &StructureField::Constant(j.clone()), &params, &sampler, tols, &sel)?;
    let report = Report::new(info, &params, &j, &result);
    let body = match args.format {
        Format::Json => report.to_json(),
        Format::Text => render_text(&report, &result),
    };
    match &args.report {
        Some(path) => fs::write(path, &body).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{body}"),
    }
    if args.format == Format::Json {
        if let Some(a) = &result.annotation {
            eprintln!("verdict {} ({a})", result.verdict);
        }
        for d in &result.diagnostics {
            eprintln!("note: {d}");
        }
        for f in &result.findings {
            eprintln!("finding: {f}");
        }
    }
    let failing = result.failing();
    if !failing.is_empty() {
        eprintln!("failing checks: {}", failing.join(", "));
    }
    eprintln!("elapsed {:.3} s", start.elapsed().as_secs_f64());
    Ok(failing.is_empty())
}
