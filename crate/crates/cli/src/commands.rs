use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use expsum::bounds::{bound_table, BoundReport};
use expsum::gale::line_sweep;
use expsum::spectrum::parse_coefficients;
use expsum::zeroset::{
    chamber_census, count_components_1d, count_components_2d, path_experiment, CensusOptions, ExpSum, PathOptions,
};
use expsum::{BoxRegion, ContourCloud, ContourSampler, NullBasis, SignVector, Spectrum};
use serde::Serialize;

use crate::manifest::Run;
use crate::{
    BoundsArgs, CensusArgs, ChambersArgs, ComponentsArgs, ContourArgs, Failure, GaleArgs, Global, PathArgs,
};

/// Library errors that report a failed check rather than bad input.
pub fn core_err(e: expsum::Error) -> Failure {
    match e {
        expsum::Error::NotStabilized { .. } | expsum::Error::InconsistentChamber { .. } => {
            Failure::Assertion(vec![e.to_string()])
        }
        other => Failure::Input(other.into()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    Ok(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

pub fn load_spectrum(path: &Path) -> Result<(Spectrum, NullBasis), Failure> {
    let spec = Spectrum::parse(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let basis = spec.null_basis().with_context(|| format!("in {}", path.display()))?;
    Ok((spec, basis))
}

fn load_coefficients(path: &Path, spec: &Spectrum) -> Result<Vec<f64>, Failure> {
    Ok(parse_coefficients(&read(path)?, spec.len()).with_context(|| format!("in {}", path.display()))?)
}

pub fn parse_sigma(s: &str, len: usize) -> Result<SignVector, Failure> {
    let sigma: SignVector = s.parse().with_context(|| format!("sign class {s:?}"))?;
    if sigma.len() != len {
        return Err(anyhow!("sign class {s:?} has {} entries, the spectrum has {len} columns", sigma.len()).into());
    }
    Ok(sigma)
}

fn parse_box(s: &str) -> Result<BoxRegion, Failure> {
    Ok(BoxRegion::parse(s).with_context(|| format!("box {s:?}"))?)
}

fn require_planar(basis: &NullBasis) -> Result<(), Failure> {
    if basis.dim() != 2 {
        return Err(anyhow!("this command needs a two-dimensional reduced space, got {}", basis.dim()).into());
    }
    Ok(())
}

/// Points of the cloud inside the box.
pub fn clipped(mut cloud: ContourCloud, bbox: BoxRegion) -> ContourCloud {
    cloud.points.retain(|p| p.coords.len() != 2 || bbox.contains(p.coords[0], p.coords[1]));
    cloud
}

pub fn contour(global: &Global, a: &ContourArgs) -> Result<(), Failure> {
    let (spec, basis) = load_spectrum(&a.spectrum)?;
    let bbox = parse_box(&a.bbox)?;
    let sigma = match a.sigma.as_str() {
        "all" => None,
        s => Some(parse_sigma(s, spec.len())?),
    };
    if a.resolution < 2 {
        return Err(anyhow!("resolution must be at least 2").into());
    }
    let mut run = Run::new(global, "contour", Some(&a.spectrum));
    run.param("sigma", &a.sigma);
    run.param("resolution", a.resolution);
    run.param("box", bbox.as_array());
    run.param("completed", a.completed);
    let radius = bbox.as_array().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let sampler = ContourSampler::new(a.resolution).seed(global.seed).box_radius(radius);
    let cloud = match (&sigma, a.completed) {
        (Some(s), true) => sampler.completed(&spec, &basis, s).map_err(core_err)?,
        (Some(s), false) => sampler.main(&basis, s),
        (None, true) => sampler.completed_all(&spec, &basis).map_err(core_err)?,
        (None, false) => sampler.main_all(&basis),
    };
    let cloud = clipped(cloud, bbox);
    run.write(&a.out, &cloud.to_csv())?;
    let classes: Vec<String> = cloud.classes().iter().map(|s| s.to_string()).collect();
    run.say(format!("{} points in {} sign classes -> {}", cloud.len(), classes.len(), a.out.display()));
    run.print_json(&serde_json::json!({ "points": cloud.len(), "classes": classes }))?;
    run.finish()
}

pub fn chambers(global: &Global, a: &ChambersArgs) -> Result<(), Failure> {
    let (spec, basis) = load_spectrum(&a.spectrum)?;
    require_planar(&basis)?;
    let sigma = parse_sigma(&a.sigma, spec.len())?;
    let bbox = parse_box(&a.bbox)?;
    let mut run = Run::new(global, "chambers", Some(&a.spectrum));
    run.param("sigma", sigma.to_string());
    run.param("resolution", a.resolution);
    run.param("grid", a.grid);
    run.param("box", bbox.as_array());
    run.param("main_only", a.main_only);
    let radius = bbox.as_array().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let sampler = ContourSampler::new(a.resolution).seed(global.seed).box_radius(radius);
    let cloud = if a.main_only {
        sampler.main(&basis, &sigma)
    } else {
        sampler.completed(&spec, &basis, &sigma).map_err(core_err)?
    };
    let map = expsum::chambers(&cloud, bbox, a.grid).map_err(core_err)?;
    let summary = map.summary();
    run.write_json(&a.out, &summary)?;
    run.check(map.stable, format!("chamber count for {sigma} changes across resolution doublings"));
    run.say(format!(
        "{sigma}: {} chambers ({} inner), stable: {}",
        map.count(),
        map.inner_count(),
        map.stable
    ));
    run.print_json(&summary)?;
    run.finish()
}

pub fn gale(global: &Global, a: &GaleArgs) -> Result<(), Failure> {
    let (spec, basis) = load_spectrum(&a.spectrum)?;
    let mut run = Run::new(global, "gale", Some(&a.spectrum));
    run.param("lines", a.lines);
    run.param("completed", a.completed);
    run.param("resolution", a.resolution);
    run.param("box_radius", a.box_radius);
    let report = line_sweep(&spec, &basis, a.lines, global.seed, a.completed, a.resolution, a.box_radius)
        .map_err(core_err)?;
    run.write_json(&a.report, &report)?;
    for line in report.lines.iter().filter(|l| !l.pass) {
        run.check(false, format!("line {} meets a contour {} times, bound {}", line.seed, line.max_count, line.bound));
    }
    let worst = report.lines.iter().map(|l| l.max_count).max().unwrap_or(0);
    run.say(format!(
        "{} lines, largest intersection count {worst}, bound {}",
        report.lines.len(),
        report.bound
    ));
    run.print_json(&report)?;
    run.finish()
}

fn markdown(rows: &[BoundReport]) -> String {
    let opt = |v: Option<u128>| v.map_or("-".to_string(), |x| x.to_string());
    let mut out = String::from("| n | k | theorem1 | outer | simplicial | general | T(n,k) |\n|---|---|---|---|---|---|---|\n");
    for r in rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} |\n",
            r.n,
            r.k,
            r.theorem1,
            r.outer,
            opt(r.simplicial_refined),
            opt(r.general_refined),
            r.t_bound.map_or("-".to_string(), |t| format!("{t:.3}"))
        ));
    }
    out
}

pub fn bounds(global: &Global, a: &BoundsArgs) -> Result<(), Failure> {
    let mut run = Run::new(global, "bounds", None);
    let rows = match (&a.table, a.n, a.k) {
        (Some(t), _, _) => {
            if t[0] == 0 || t[1] == 0 {
                return Err(anyhow!("table limits must be positive").into());
            }
            run.param("table", t);
            bound_table(t[0], t[1])
        }
        (None, Some(n), Some(k)) => {
            if n == 0 || k == 0 {
                return Err(anyhow!("n and k must be positive").into());
            }
            run.param("n", n);
            run.param("k", k);
            vec![BoundReport::new(n, k)]
        }
        _ => return Err(anyhow!("give --n and --k, or --table NMAX KMAX").into()),
    };
    #[derive(Serialize)]
    struct Table<'a> {
        schema_version: &'static str,
        rows: &'a [BoundReport],
    }
    let table = Table {
        schema_version: "1",
        rows: &rows,
    };
    if let Some(out) = &a.out {
        run.write_json(out, &table)?;
    }
    if rows.len() == 1 && !global.json {
        let r = &rows[0];
        run.say(format!("theorem1 = {}", r.theorem1));
        run.say(format!("outer = {}", r.outer));
    } else {
        run.say(markdown(&rows).trim_end());
    }
    run.print_json(&table)?;
    run.finish()
}

pub fn components(global: &Global, a: &ComponentsArgs) -> Result<(), Failure> {
    let spec = Spectrum::parse(&read(&a.spectrum)?).with_context(|| format!("in {}", a.spectrum.display()))?;
    let c = load_coefficients(&a.coeffs, &spec)?;
    let mut run = Run::new(global, "components", Some(&a.spectrum));
    run.param("coeffs", a.coeffs.display().to_string());
    run.param("resolution", a.resolution);
    run.param("r0", a.r0);
    let g = ExpSum::new(spec.clone(), c).map_err(core_err)?;
    let count = match spec.n() {
        1 => {
            let count = count_components_1d(&g).map_err(core_err)?;
            let changes = g.sign_changes();
            run.check(
                count.count <= changes && changes <= spec.k(),
                format!("{} zeros, {changes} sign changes, k = {}", count.count, spec.k()),
            );
            count
        }
        2 => count_components_2d(&g, a.resolution, a.r0).map_err(core_err)?,
        n => return Err(anyhow!("component counting supports n <= 2, got n = {n}").into()),
    };
    run.say(format!(
        "N = {} (radius {}, stabilized: {}, {} touching the box)",
        count.count, count.box_radius, count.stabilized, count.boundary_touching
    ));
    run.print_json(&count)?;
    run.finish()
}

pub fn census(global: &Global, a: &CensusArgs) -> Result<(), Failure> {
    let (spec, basis) = load_spectrum(&a.spectrum)?;
    require_planar(&basis)?;
    if spec.n() != 2 {
        return Err(anyhow!("the census needs n = 2, got n = {}", spec.n()).into());
    }
    let mut run = Run::new(global, "census", Some(&a.spectrum));
    run.param("samples", a.samples);
    run.param("grid", a.grid);
    let opts = CensusOptions {
        samples_per_chamber: a.samples,
        seed: global.seed,
        chamber_resolution: a.grid,
        ..CensusOptions::default()
    };
    let report = chamber_census(&spec, &basis, &opts).map_err(core_err)?;
    run.write_json(&a.out, &report)?;
    run.check(
        report.max_count as u128 <= report.theorem1_bound,
        format!("N = {} exceeds {}", report.max_count, report.theorem1_bound),
    );
    run.check(
        report.max_outer_count as u128 <= report.outer_bound,
        format!("outer-chamber N = {} exceeds {}", report.max_outer_count, report.outer_bound),
    );
    run.check(report.unstable == 0, format!("{} counts did not stabilize", report.unstable));
    run.say(format!(
        "{} samples, max N = {} (bound {}), max outer N = {} (bound {})",
        report.rows.len(),
        report.max_count,
        report.theorem1_bound,
        report.max_outer_count,
        report.outer_bound
    ));
    run.print_json(&report)?;
    run.finish()
}

pub fn path(global: &Global, a: &PathArgs) -> Result<(), Failure> {
    let (spec, basis) = load_spectrum(&a.spectrum)?;
    if spec.n() != 2 {
        return Err(anyhow!("path experiments need n = 2, got n = {}", spec.n()).into());
    }
    require_planar(&basis)?;
    let from = load_coefficients(&a.from, &spec)?;
    let to = load_coefficients(&a.to, &spec)?;
    if a.steps == 0 {
        return Err(anyhow!("steps must be positive").into());
    }
    let mut run = Run::new(global, "path", Some(&a.spectrum));
    run.param("from", a.from.display().to_string());
    run.param("to", a.to.display().to_string());
    run.param("steps", a.steps);
    let opts = PathOptions {
        steps: a.steps,
        seed: global.seed,
        ..PathOptions::default()
    };
    let report = path_experiment(&spec, &basis, &from, &to, &opts).map_err(core_err)?;
    run.write_json(&a.out, &report)?;
    for v in &report.violations {
        run.check(false, v.clone());
    }
    let counts: Vec<String> = report.steps.iter().map(|s| s.count.count.to_string()).collect();
    run.say(format!(
        "{} steps, {} crossing windows, N: {}",
        report.steps.len(),
        report.windows.len(),
        dedup_runs(&counts).join(" -> ")
    ));
    run.print_json(&report)?;
    run.finish()
}

fn dedup_runs(v: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in v {
        if out.last() != Some(s) {
            out.push(s.clone());
        }
    }
    out
}
