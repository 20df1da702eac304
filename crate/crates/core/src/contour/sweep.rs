//! Sweeps of real projective space through log-linear maps
//! `lambda -> sum_j log|f_j . lambda| d_j`.
//!
//! The reduced discriminant map uses `f_j = d_j = beta_j`; face fibers use the
//! rows of a face null basis as forms and the matching rows of the full basis
//! as directions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sign::{SignReading, SignVector};
use crate::linalg::{dot, norm, sample_standard_normal};

/// Forms with max-norm below this are treated as zero rows and skipped.
const ZERO_FORM_TOL: f64 = 1e-9;
/// Bisection steps used to push a strand end up to its class boundary.
const BOUNDARY_BISECTIONS: usize = 60;
/// Maximum recursive refinement depth between two samples.
const MAX_REFINE_DEPTH: u32 = 24;

#[derive(Debug, Clone)]
pub(crate) struct LogLinearMap {
    pub forms: Vec<Vec<f64>>,
    pub dirs: Vec<Vec<f64>>,
    pub active: Vec<bool>,
    form_norms: Vec<f64>,
    pub ambient: usize,
}

pub(crate) enum Eval {
    /// Off the tube; carries the form values and the image point.
    Point { values: Vec<f64>, image: Vec<f64> },
    /// Inside the tube around some hyperplane.
    Tube,
}

impl LogLinearMap {
    pub fn new(forms: Vec<Vec<f64>>, dirs: Vec<Vec<f64>>) -> Self {
        let ambient = dirs.first().map_or(0, |d| d.len());
        let form_norms: Vec<f64> = forms.iter().map(|f| norm(f)).collect();
        let active = forms
            .iter()
            .map(|f| f.iter().fold(0.0_f64, |m, v| m.max(v.abs())) >= ZERO_FORM_TOL)
            .collect();
        Self {
            forms,
            dirs,
            active,
            form_norms,
            ambient,
        }
    }

    pub fn param_dim(&self) -> usize {
        self.forms.first().map_or(0, |f| f.len())
    }

    pub fn values(&self, lambda: &[f64]) -> Vec<f64> {
        self.forms.iter().map(|f| dot(f, lambda)).collect()
    }

    /// Index of the first active form with `|f . lambda| <= rel * |f| |lambda|`.
    pub fn hit(&self, values: &[f64], lambda_norm: f64, rel: f64) -> Option<usize> {
        (0..self.forms.len())
            .find(|&j| self.active[j] && values[j].abs() <= rel * self.form_norms[j] * lambda_norm)
    }

    pub fn image(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient];
        for (j, dir) in self.dirs.iter().enumerate() {
            if !self.active[j] {
                continue;
            }
            let l = values[j].abs().ln();
            for (o, d) in out.iter_mut().zip(dir) {
                *o += l * d;
            }
        }
        out
    }

    pub fn eval(&self, lambda: &[f64], tube: f64) -> Eval {
        let values = self.values(lambda);
        if self.hit(&values, norm(lambda), tube).is_some() {
            return Eval::Tube;
        }
        let image = self.image(&values);
        Eval::Point { values, image }
    }

    /// Asymptotic direction of the image as `lambda` approaches the
    /// hyperplanes crossed between `inside` and `outside`.
    fn tail_direction(&self, inside: &[f64], outside: &[f64], tube: f64) -> Option<Vec<f64>> {
        let vi = self.values(inside);
        let vo = self.values(outside);
        let no = norm(outside);
        let mut dir = vec![0.0; self.ambient];
        let mut any = false;
        for j in 0..self.forms.len() {
            if !self.active[j] {
                continue;
            }
            let crossed = vi[j].signum() != vo[j].signum()
                || vo[j].abs() <= tube * self.form_norms[j] * no;
            if crossed {
                any = true;
                for (o, d) in dir.iter_mut().zip(&self.dirs[j]) {
                    *o -= d;
                }
            }
        }
        let len = norm(&dir);
        (any && len > 1e-12).then(|| dir.iter().map(|v| v / len).collect())
    }
}

/// One connected run of samples; consecutive samples are joined by a chord.
#[derive(Debug, Clone, Default)]
pub(crate) struct Strand {
    pub lambdas: Vec<Vec<f64>>,
    pub images: Vec<Vec<f64>>,
    /// Unbounded continuation before the first sample, as a unit direction.
    pub head_tail: Option<Vec<f64>>,
    /// Unbounded continuation after the last sample.
    pub end_tail: Option<Vec<f64>>,
    /// `true` when the strand is a sampled curve (consecutive samples connect).
    pub connected: bool,
}

pub(crate) struct SweepOptions {
    pub resolution: usize,
    pub seed: u64,
    pub tube: f64,
    pub max_gap: f64,
    pub reading: SignReading,
}

fn lambda_at(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

/// Sweep `map` over its projective parameter space and keep the samples whose
/// form values match `sigma` (restricted to the active forms).
pub(crate) fn sweep(map: &LogLinearMap, sigma: &SignVector, opts: &SweepOptions) -> Vec<Strand> {
    let mask = map.active.clone();
    let accept = |lambda: &[f64]| -> Option<Vec<f64>> {
        match map.eval(lambda, opts.tube) {
            Eval::Point { values, image } if opts.reading.matches(&values, sigma, &mask) => Some(image),
            _ => None,
        }
    };
    match map.param_dim() {
        0 => Vec::new(),
        1 => {
            let lambda = vec![1.0];
            accept(&lambda)
                .map(|image| Strand {
                    lambdas: vec![lambda],
                    images: vec![image],
                    ..Default::default()
                })
                .into_iter()
                .collect()
        }
        2 => sweep_circle(map, &accept, opts),
        p => scatter(p, opts)
            .into_iter()
            .filter_map(|lambda| {
                accept(&lambda).map(|image| Strand {
                    lambdas: vec![lambda],
                    images: vec![image],
                    ..Default::default()
                })
            })
            .collect(),
    }
}

fn sweep_circle(
    map: &LogLinearMap,
    accept: &dyn Fn(&[f64]) -> Option<Vec<f64>>,
    opts: &SweepOptions,
) -> Vec<Strand> {
    let res = opts.resolution.max(4);
    let phase: f64 = ChaCha8Rng::seed_from_u64(opts.seed).gen();
    let step = PI / res as f64;
    let thetas: Vec<f64> = (0..res).map(|i| (i as f64 + phase) * step).collect();
    let hits: Vec<Option<Vec<f64>>> = thetas.iter().map(|&t| accept(&lambda_at(t))).collect();

    // Maximal runs of accepted grid indices.
    let mut runs: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for (i, h) in hits.iter().enumerate() {
        if h.is_some() {
            current.push(i);
        } else if !current.is_empty() {
            runs.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    // theta and theta + pi are the same projective point.
    let wraps = runs.len() > 1 && runs[0][0] == 0 && runs.last().unwrap().last() == Some(&(res - 1));
    let mut unwrapped: Vec<Vec<f64>> = Vec::new();
    if runs.len() == 1 && runs[0].len() == res {
        // The class covers every sample; no hyperplane inside the sweep.
        let mut ts: Vec<f64> = thetas.clone();
        ts.push(thetas[0] + PI);
        unwrapped.push(ts);
    } else {
        let mut runs = runs;
        if wraps {
            let first = runs.remove(0);
            let last = runs.last_mut().unwrap();
            last.extend(first.iter().map(|&i| i + res));
        }
        for run in runs {
            unwrapped.push(run.iter().map(|&i| (i as f64 + phase) * step).collect());
        }
    }

    let mut strands = Vec::new();
    for ts in unwrapped {
        strands.extend(build_strand(map, accept, &ts, step, opts));
    }
    strands
}

/// Refine, extend to the class boundary on both sides, and attach tails.
fn build_strand(
    map: &LogLinearMap,
    accept: &dyn Fn(&[f64]) -> Option<Vec<f64>>,
    ts: &[f64],
    step: f64,
    opts: &SweepOptions,
) -> Vec<Strand> {
    let closed = (ts[ts.len() - 1] - ts[0] - PI).abs() < 1e-12;
    let mut head: Vec<f64> = Vec::new();
    let mut tail: Vec<f64> = Vec::new();
    let mut head_dir = None;
    let mut end_dir = None;
    if !closed {
        let (pts, dir) = extend(map, accept, ts[0], ts[0] - step, opts.tube);
        head = pts;
        head.reverse();
        head_dir = dir;
        let (pts, dir) = extend(map, accept, ts[ts.len() - 1], ts[ts.len() - 1] + step, opts.tube);
        tail = pts;
        end_dir = dir;
    }
    let all: Vec<f64> = head.into_iter().chain(ts.iter().copied()).chain(tail).collect();

    // Refine gaps; split when a midpoint falls out of the class.
    let mut pieces: Vec<Vec<(f64, Vec<f64>)>> = Vec::new();
    let mut current: Vec<(f64, Vec<f64>)> = Vec::new();
    for &t in &all {
        let Some(img) = accept(&lambda_at(t)) else {
            continue;
        };
        if let Some((pt, pimg)) = current.last().cloned() {
            let mut mids = Vec::new();
            let ok = refine(accept, pt, &pimg, t, &img, opts.max_gap, 0, &mut mids);
            current.extend(mids);
            if !ok {
                pieces.push(std::mem::take(&mut current));
            }
        }
        current.push((t, img));
    }
    if !current.is_empty() {
        pieces.push(current);
    }
    pieces.retain(|p| !p.is_empty());
    let count = pieces.len();
    pieces
        .into_iter()
        .enumerate()
        .map(|(i, piece)| Strand {
            lambdas: piece.iter().map(|(t, _)| lambda_at(*t)).collect(),
            images: piece.into_iter().map(|(_, img)| img).collect(),
            head_tail: if i == 0 { head_dir.clone() } else { None },
            end_tail: if i + 1 == count { end_dir.clone() } else { None },
            connected: true,
        })
        .collect()
}

/// Insert midpoints between `(ta, a)` and `(tb, b)` until chords are shorter
/// than `max_gap`. Returns `false` if the class is left in between.
#[allow(clippy::too_many_arguments)]
fn refine(
    accept: &dyn Fn(&[f64]) -> Option<Vec<f64>>,
    ta: f64,
    a: &[f64],
    tb: f64,
    b: &[f64],
    max_gap: f64,
    depth: u32,
    out: &mut Vec<(f64, Vec<f64>)>,
) -> bool {
    let gap = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    if gap <= max_gap || depth >= MAX_REFINE_DEPTH {
        return true;
    }
    let tm = 0.5 * (ta + tb);
    let Some(m) = accept(&lambda_at(tm)) else {
        return false;
    };
    if !refine(accept, ta, a, tm, &m, max_gap, depth + 1, out) {
        return false;
    }
    out.push((tm, m.clone()));
    refine(accept, tm, &m, tb, b, max_gap, depth + 1, out)
}

/// Walk from an accepted angle towards a rejected one. Returns angles that
/// approach the boundary geometrically (excluding `inside`) and, when the
/// boundary is a hyperplane, the asymptotic direction beyond it.
fn extend(
    map: &LogLinearMap,
    accept: &dyn Fn(&[f64]) -> Option<Vec<f64>>,
    inside: f64,
    outside: f64,
    tube: f64,
) -> (Vec<f64>, Option<Vec<f64>>) {
    let (mut lo, mut hi) = (inside, outside);
    for _ in 0..BOUNDARY_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if accept(&lambda_at(mid)).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut pts = Vec::new();
    let span = lo - inside;
    let mut frac = 0.5;
    while frac > 1e-18 {
        let t = lo - span * frac;
        if (t - inside).abs() > 0.0 {
            pts.push(t);
        }
        frac *= 0.5;
    }
    pts.push(lo);
    pts.dedup();
    let dir = map.tail_direction(&lambda_at(lo), &lambda_at(hi), tube * 10.0);
    (pts, dir)
}

/// Points on the upper half of the unit sphere in `R^p`.
fn scatter(p: usize, opts: &SweepOptions) -> Vec<Vec<f64>> {
    let count = opts.resolution.max(1);
    if p == 3 {
        // Fibonacci lattice on the hemisphere z > 0.
        let golden = PI * (3.0 - 5f64.sqrt());
        return (0..count)
            .map(|i| {
                let z = 1.0 - (i as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                vec![r * phi.cos(), r * phi.sin(), z]
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..count)
        .map(|_| {
            let mut v: Vec<f64> = (0..p).map(|_| sample_standard_normal(&mut rng)).collect();
            let len = norm(&v);
            let flip = if v[p - 1] < 0.0 { -1.0 } else { 1.0 };
            v.iter_mut().for_each(|x| *x *= flip / len);
            v
        })
        .collect()
}
