//! Coefficient-path walks and per-chamber component census.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{count_components_2d, ComponentCount, ExpSum, DEFAULT_GRID};
use crate::bounds::{outer_chamber_bound, theorem1_bound};
use crate::contour::{chambers, locate, BoxRegion, ContourCloud, ContourSampler, SignVector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::spectrum::{NullBasis, Spectrum};

/// Coefficients `sigma * exp(B p + A_hat^T w)`: reduced point `p`, moved
/// along the torus action by `w`.
pub fn lift_reduced_point(spec: &Spectrum, basis: &NullBasis, sigma: &SignVector, p: &[f64], w: &[f64]) -> Vec<f64> {
    let ahat = spec.lift().ahat;
    (0..spec.len())
        .map(|j| {
            let mut l = linalg::dot(basis.row(j), p);
            l += (0..ahat.nrows()).map(|r| ahat[(r, j)] * w.get(r).copied().unwrap_or(0.0)).sum::<f64>();
            f64::from(sigma.as_slice()[j]) * l.exp()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PathOptions {
    pub steps: usize,
    /// Resolution of the contour used to detect crossings.
    pub contour_resolution: usize,
    /// Half-width of the box the contour fibers are swept over.
    pub box_radius: f64,
    /// Distance to the sampled contour that opens a crossing window.
    pub window: f64,
    pub grid_resolution: usize,
    pub r0: f64,
    pub seed: u64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            steps: 100,
            contour_resolution: 2000,
            box_radius: 4.0,
            // two cells of a 400-cell raster on [-4, 4]
            window: 0.04,
            grid_resolution: DEFAULT_GRID,
            r0: 8.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathStep {
    pub t: f64,
    pub point: Vec<f64>,
    pub count: ComponentCount,
    /// Index of the crossing window the step lies in.
    pub window: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossingWindow {
    pub first_step: usize,
    pub last_step: usize,
    /// Chords of the sampled contour crossed inside the window.
    pub crossings: usize,
    /// `N` after the window minus `N` before it.
    pub delta: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathReport {
    pub sigma: SignVector,
    pub steps: Vec<PathStep>,
    pub windows: Vec<CrossingWindow>,
    /// Human-readable descriptions of violated expectations.
    pub violations: Vec<String>,
    pub pass: bool,
}

/// Walk the coefficients whose reduced points run along the segment from
/// `(Log|c_start|)B` to `(Log|c_end|)B`, counting components at each step.
pub fn path_experiment(
    spec: &Spectrum,
    basis: &NullBasis,
    c_start: &[f64],
    c_end: &[f64],
    opts: &PathOptions,
) -> Result<PathReport> {
    if spec.n() != 2 {
        return Err(Error::Dimension(format!("path experiments need n = 2, got {}", spec.n())));
    }
    if basis.dim() != 2 {
        return Err(Error::Dimension("path experiments need a planar reduced space".into()));
    }
    let sigma = SignVector::of_values(c_start)?;
    if SignVector::of_values(c_end)? != sigma {
        return Err(Error::Precondition("endpoints must have the same sign class".into()));
    }
    let steps = opts.steps.max(1);
    let cloud = ContourSampler::new(opts.contour_resolution)
        .seed(opts.seed)
        .box_radius(opts.box_radius)
        .completed(spec, basis, &sigma)?;
    let p0 = crate::contour::reduced_point(basis, c_start)?;
    let p1 = crate::contour::reduced_point(basis, c_end)?;
    let log0: Vec<f64> = c_start.iter().map(|c| c.abs().ln()).collect();
    let log1: Vec<f64> = c_end.iter().map(|c| c.abs().ln()).collect();
    if cloud.distance_to(&p0) < opts.window || cloud.distance_to(&p1) < opts.window {
        return Err(Error::Precondition("path endpoint lies on the contour".into()));
    }
    let points: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..=steps)
        .map(|i| {
            let t = i as f64 / steps as f64;
            let p: Vec<f64> = p0.iter().zip(&p1).map(|(a, b)| (1.0 - t) * a + t * b).collect();
            let c: Vec<f64> = log0
                .iter()
                .zip(&log1)
                .zip(sigma.as_slice())
                .map(|((a, b), s)| f64::from(*s) * ((1.0 - t) * a + t * b).exp())
                .collect();
            (t, p, c)
        })
        .collect();
    let counts: Vec<Result<ComponentCount>> = points
        .par_iter()
        .map(|(_, _, c)| {
            let g = ExpSum::new(spec.clone(), c.clone())?;
            count_components_2d(&g, opts.grid_resolution, opts.r0)?.require_stable()
        })
        .collect();
    let mut report_steps = Vec::with_capacity(points.len());
    let mut windows: Vec<CrossingWindow> = Vec::new();
    let mut open: Option<usize> = None;
    for (i, ((t, p, _), count)) in points.iter().zip(counts).enumerate() {
        let near = cloud.distance_to(p) < opts.window;
        let window = if near {
            let idx = match open {
                Some(w) => w,
                None => {
                    windows.push(CrossingWindow {
                        first_step: i,
                        last_step: i,
                        crossings: 0,
                        delta: 0,
                    });
                    windows.len() - 1
                }
            };
            windows[idx].last_step = i;
            open = Some(idx);
            Some(idx)
        } else {
            open = None;
            None
        };
        report_steps.push(PathStep {
            t: *t,
            point: p.clone(),
            count: count?,
            window,
        });
    }
    let mut violations = Vec::new();
    for w in windows.iter_mut() {
        let before = w.first_step - 1;
        let after = w.last_step + 1;
        w.crossings = (before..after)
            .map(|s| cloud.crossings(&report_steps[s].point, &report_steps[s + 1].point))
            .sum();
        if w.crossings > 1 {
            return Err(Error::Precondition(format!(
                "{} crossings inside one window near t = {:.4}; raise the step count",
                w.crossings, report_steps[w.first_step].t
            )));
        }
        w.delta = report_steps[after].count.count as i64 - report_steps[before].count.count as i64;
        if w.delta.abs() > 1 {
            violations.push(format!(
                "component count jumps by {} across the crossing at t = {:.4}",
                w.delta, report_steps[w.first_step].t
            ));
        }
    }
    for pair in report_steps.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.window.is_none() && b.window.is_none() && a.count.count != b.count.count {
            let crossed = cloud.crossings(&a.point, &b.point);
            violations.push(format!(
                "component count changes from {} to {} between t = {:.4} and t = {:.4} away from the contour ({crossed} chords crossed)",
                a.count.count, b.count.count, a.t, b.t
            ));
        }
    }
    Ok(PathReport {
        sigma,
        pass: violations.is_empty(),
        steps: report_steps,
        windows,
        violations,
    })
}

#[derive(Debug, Clone)]
pub struct CensusOptions {
    pub samples_per_chamber: usize,
    pub seed: u64,
    pub contour_resolution: usize,
    pub chamber_resolution: usize,
    pub box_radius: f64,
    /// Minimum distance of a sample to the contour.
    pub margin: f64,
    /// Standard deviation of the torus-action offset added to `Log|c|`.
    pub torus_scale: f64,
    pub grid_resolution: usize,
    pub r0: f64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            samples_per_chamber: 10,
            seed: 0,
            contour_resolution: 2000,
            chamber_resolution: 800,
            box_radius: 4.0,
            margin: 0.1,
            torus_scale: 0.5,
            grid_resolution: DEFAULT_GRID,
            r0: 8.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusRow {
    pub sigma: SignVector,
    pub chamber: usize,
    pub inner: bool,
    pub point: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub count: usize,
    pub stabilized: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusReport {
    pub schema_version: &'static str,
    pub rows: Vec<CensusRow>,
    pub theorem1_bound: u128,
    pub outer_bound: u128,
    pub max_count: usize,
    pub max_outer_count: usize,
    pub unstable: usize,
    pub pass: bool,
}

struct Sample {
    sigma: SignVector,
    chamber: usize,
    inner: bool,
    point: Vec<f64>,
    coefficients: Vec<f64>,
}

fn draw_samples(
    spec: &Spectrum,
    basis: &NullBasis,
    sigma: &SignVector,
    cloud: &ContourCloud,
    opts: &CensusOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Sample>> {
    let bbox = BoxRegion::square(opts.box_radius)?;
    let map = chambers(cloud, bbox, opts.chamber_resolution)?;
    let cell = bbox.width() / opts.chamber_resolution as f64;
    let mut out = Vec::new();
    for chamber in &map.chambers {
        let mut got = 0;
        let mut tries = 0;
        while got < opts.samples_per_chamber && tries < 200 * opts.samples_per_chamber.max(1) {
            tries += 1;
            let Some((x, y)) = map.sample_in(chamber.id, rng) else { break };
            let p = vec![
                x + rng.gen_range(-0.5..0.5) * cell,
                y + rng.gen_range(-0.5..0.5) * cell,
            ];
            if cloud.distance_to(&p) < opts.margin {
                continue;
            }
            let w: Vec<f64> = (0..=spec.n())
                .map(|_| opts.torus_scale * linalg::sample_standard_normal(rng))
                .collect();
            let coefficients = lift_reduced_point(spec, basis, sigma, &p, &w);
            // The lifted point must land in the chamber it was drawn from.
            match locate(spec, basis, &coefficients, &map) {
                Ok(loc) if loc.chamber == chamber.id => {}
                _ => continue,
            }
            out.push(Sample {
                sigma: sigma.clone(),
                chamber: chamber.id,
                inner: chamber.inner,
                point: p,
                coefficients,
            });
            got += 1;
        }
    }
    Ok(out)
}

/// Count components for sampled coefficient vectors in every signed chamber
/// and check constancy within each chamber against the bounds.
pub fn chamber_census(spec: &Spectrum, basis: &NullBasis, opts: &CensusOptions) -> Result<CensusReport> {
    if spec.n() != 2 || !(3..=4).contains(&spec.k()) || basis.dim() != 2 {
        return Err(Error::Precondition(
            "the census needs n = 2 and a planar reduced space".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let sampler = ContourSampler::new(opts.contour_resolution)
        .seed(opts.seed)
        .box_radius(opts.box_radius);
    let mut samples = Vec::new();
    for sigma in SignVector::all(spec.len()) {
        let cloud = sampler.completed(spec, basis, &sigma)?;
        samples.extend(draw_samples(spec, basis, &sigma, &cloud, opts, &mut rng)?);
    }
    let counts: Vec<Result<ComponentCount>> = samples
        .par_iter()
        .map(|s| {
            let g = ExpSum::new(spec.clone(), s.coefficients.clone())?;
            count_components_2d(&g, opts.grid_resolution, opts.r0)
        })
        .collect();
    let mut rows = Vec::with_capacity(samples.len());
    for (s, c) in samples.into_iter().zip(counts) {
        let c = c?;
        rows.push(CensusRow {
            sigma: s.sigma,
            chamber: s.chamber,
            inner: s.inner,
            point: s.point,
            coefficients: s.coefficients,
            count: c.count,
            stabilized: c.stabilized,
        });
    }
    let mut first: BTreeMap<(SignVector, usize), usize> = BTreeMap::new();
    for r in &rows {
        let key = (r.sigma.clone(), r.chamber);
        match first.get(&key) {
            Some(&n) if n != r.count => {
                return Err(Error::InconsistentChamber {
                    sigma: r.sigma.to_string(),
                    chamber: r.chamber,
                    first: n,
                    second: r.count,
                });
            }
            Some(_) => {}
            None => {
                first.insert(key, r.count);
            }
        }
    }
    let (n, k) = (spec.n() as u64, spec.k() as u64);
    let theorem1 = theorem1_bound(n, k);
    let outer = outer_chamber_bound(n, k);
    let max_count = rows.iter().map(|r| r.count).max().unwrap_or(0);
    let max_outer_count = rows.iter().filter(|r| !r.inner).map(|r| r.count).max().unwrap_or(0);
    let unstable = rows.iter().filter(|r| !r.stabilized).count();
    Ok(CensusReport {
        schema_version: "1",
        pass: max_count as u128 <= theorem1 && max_outer_count as u128 <= outer && unstable == 0,
        rows,
        theorem1_bound: theorem1,
        outer_bound: outer,
        max_count,
        max_outer_count,
        unstable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn quick() -> PathOptions {
        PathOptions {
            steps: 40,
            grid_resolution: 256,
            r0: 4.0,
            ..PathOptions::default()
        }
    }

    #[test]
    fn circles_path_crosses_once() {
        let spec = fixtures::parallelogram();
        let basis = spec.null_basis().unwrap();
        let report = path_experiment(&spec, &basis, &fixtures::circles_g2(), &fixtures::circles_g1(), &quick()).unwrap();
        assert!(report.pass, "{:?}", report.violations);
        assert_eq!(report.steps.first().unwrap().count.count, 0);
        assert_eq!(report.steps.last().unwrap().count.count, 1);
        assert_eq!(report.windows.len(), 1);
        assert_eq!((report.windows[0].crossings, report.windows[0].delta), (1, 1));
    }

    #[test]
    fn constant_path_has_constant_count() {
        let spec = fixtures::parallelogram();
        let basis = spec.null_basis().unwrap();
        let g1 = fixtures::circles_g1();
        let report = path_experiment(&spec, &basis, &g1, &g1, &quick()).unwrap();
        assert!(report.windows.is_empty());
        assert!(report.steps.iter().all(|s| s.count.count == 1));
    }

    #[test]
    fn mismatched_signs_rejected() {
        let spec = fixtures::parallelogram();
        let basis = spec.null_basis().unwrap();
        let mut other = fixtures::circles_g1();
        other[0] = -other[0];
        assert!(matches!(
            path_experiment(&spec, &basis, &fixtures::circles_g1(), &other, &quick()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lifted_point_reduces_back() {
        let spec = fixtures::pentagon();
        let basis = spec.null_basis().unwrap();
        let sigma: SignVector = "+--++".parse().unwrap();
        let c = lift_reduced_point(&spec, &basis, &sigma, &[0.3, -1.2], &[0.7, -0.4, 1.1]);
        assert_eq!(SignVector::of_values(&c).unwrap(), sigma);
        let p = crate::contour::reduced_point(&basis, &c).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-12 && (p[1] + 1.2).abs() < 1e-12);
    }

    #[test]
    fn small_census_is_consistent() {
        let spec = fixtures::parallelogram();
        let basis = spec.null_basis().unwrap();
        let opts = CensusOptions {
            samples_per_chamber: 2,
            contour_resolution: 500,
            chamber_resolution: 100,
            grid_resolution: 128,
            r0: 4.0,
            ..CensusOptions::default()
        };
        let report = chamber_census(&spec, &basis, &opts).unwrap();
        assert!(report.pass);
        assert!(report.max_count <= 13 && report.max_outer_count <= 10);
        assert!(!report.rows.is_empty());
    }
}
