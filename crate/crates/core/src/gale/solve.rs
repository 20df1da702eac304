//! Root finding for Gale dual systems written in log form,
//! `sum_l e_{l,i} log|u_{l,0} + u_l . y| = log t_i`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const DEDUP: f64 = 1e-8;
const RESIDUAL: f64 = 1e-10;
const BISECT: f64 = 1e-12;
/// Parameter range of the interval substitutions for `j = 1`.
const T_MAX: f64 = 40.0;

/// A root of a log-form system together with the sign pattern of its factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub y: Vec<f64>,
    pub signs: Vec<i8>,
    /// Max-norm of the log-form residual (a relative residual of the
    /// product form).
    pub residual: f64,
    /// Smallest singular value of the log-form Jacobian, scaled by
    /// `max(1, |y|)`. Small values indicate a degenerate root.
    pub conditioning: f64,
}

impl Root {
    pub fn is_degenerate(&self) -> bool {
        self.conditioning < 1e-8
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LogSystem {
    /// Rows `(u_0, u_1, .., u_j)`.
    pub factors: Vec<Vec<f64>>,
    /// Rows `(e_{l,1}, .., e_{l,j})`, one per factor.
    pub exps: Vec<Vec<f64>>,
    pub log_targets: Vec<f64>,
}

impl LogSystem {
    pub fn j(&self) -> usize {
        self.log_targets.len()
    }

    fn factor(&self, l: usize, y: &[f64]) -> f64 {
        let f = &self.factors[l];
        f[0] + f[1..].iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
    }

    fn values(&self, y: &[f64]) -> Vec<f64> {
        (0..self.factors.len()).map(|l| self.factor(l, y)).collect()
    }

    fn signs_of(values: &[f64]) -> Vec<i8> {
        values.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect()
    }

    fn residual_from(&self, values: &[f64]) -> Option<Vec<f64>> {
        if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return None;
        }
        let mut r: Vec<f64> = self.log_targets.iter().map(|t| -t).collect();
        for (v, e) in values.iter().zip(&self.exps) {
            let l = v.abs().ln();
            r.iter_mut().zip(e).for_each(|(ri, ei)| *ri += ei * l);
        }
        Some(r)
    }

    pub fn residual(&self, y: &[f64]) -> Option<Vec<f64>> {
        self.residual_from(&self.values(y))
    }

    fn jacobian(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let j = self.j();
        let mut jac = vec![vec![0.0; j]; j];
        for l in 0..self.factors.len() {
            let f = self.factor(l, y);
            for (i, row) in jac.iter_mut().enumerate() {
                for (k, cell) in row.iter_mut().enumerate() {
                    *cell += self.exps[l][i] * self.factors[l][k + 1] / f;
                }
            }
        }
        jac
    }

    fn conditioning(&self, y: &[f64]) -> f64 {
        let jac = self.jacobian(y);
        let scale = y.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let smin = match jac.len() {
            1 => jac[0][0].abs(),
            2 => {
                let m = nalgebra::Matrix2::new(jac[0][0], jac[0][1], jac[1][0], jac[1][1]);
                m.singular_values().min()
            }
            _ => 0.0,
        };
        smin * scale
    }

    fn make_root(&self, y: Vec<f64>) -> Option<Root> {
        let values = self.values(&y);
        let r = self.residual_from(&values)?;
        let residual = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Some(Root {
            signs: Self::signs_of(&values),
            residual,
            conditioning: self.conditioning(&y),
            y,
        })
    }

    /// Roots in every sign cell of the factor arrangement, or only in the
    /// cell where all factors are positive.
    pub fn solve(&self, resolution: usize, positive_only: bool, seed: u64) -> Result<Vec<Root>> {
        let roots = match self.j() {
            1 => self.solve_1d(resolution.max(16), positive_only),
            2 => self.solve_2d(resolution.max(16), positive_only, seed),
            j => return Err(Error::UnsupportedJ(j)),
        };
        Ok(dedup(roots))
    }

    fn solve_1d(&self, resolution: usize, positive_only: bool) -> Vec<Root> {
        let mut breaks: Vec<f64> = self
            .factors
            .iter()
            .filter(|f| f[1] != 0.0)
            .map(|f| -f[0] / f[1])
            .collect();
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        let mut bounds: Vec<Option<f64>> = vec![None];
        bounds.extend(breaks.iter().map(|&b| Some(b)));
        bounds.push(None);
        let mut out = Vec::new();
        for w in bounds.windows(2) {
            let piece = Interval::new(w[0], w[1], &self.factors);
            if positive_only && piece.signs.iter().any(|&s| s < 0) {
                continue;
            }
            let f = |t: f64| piece.log_residual(t, self);
            let ts: Vec<f64> = (0..resolution)
                .map(|i| -T_MAX + 2.0 * T_MAX * i as f64 / (resolution - 1) as f64)
                .collect();
            let vals: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
            for i in 0..resolution - 1 {
                let (a, b) = (vals[i], vals[i + 1]);
                if !(a.is_finite() && b.is_finite()) {
                    continue;
                }
                let t = if a == 0.0 {
                    ts[i]
                } else if a * b < 0.0 {
                    bisect(&f, &|t| piece.y(t), ts[i], ts[i + 1], a)
                } else {
                    continue;
                };
                if let Some(root) = self.make_root(vec![piece.y(t)]) {
                    if root.residual < 1e-8 && root.signs == piece.signs {
                        out.push(root);
                    }
                }
            }
        }
        out
    }

    fn solve_2d(&self, resolution: usize, positive_only: bool, seed: u64) -> Vec<Root> {
        let m = self.factors.len().saturating_sub(2);
        let g = if m > 4 { resolution * m / 4 } else { resolution };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let half = std::f64::consts::FRAC_PI_2;
        let coord = |i: usize, s: f64| (-half + std::f64::consts::PI * (i as f64 + s) / (g as f64 + 1.0)).tan();
        // Node data: sign mask and residual.
        let mut nodes: Vec<Option<(u64, [f64; 2])>> = Vec::with_capacity(g * g);
        for jy in 0..g {
            let y1 = coord(jy, shift.1 + 0.5);
            for ix in 0..g {
                let y0 = coord(ix, shift.0 + 0.5);
                let values = self.values(&[y0, y1]);
                let node = self.residual_from(&values).map(|r| (mask_of(&values), [r[0], r[1]]));
                nodes.push(node);
            }
        }
        let all_pos = if self.factors.len() >= 64 { u64::MAX } else { (1u64 << self.factors.len()) - 1 };
        let y_at = |ix: usize, jy: usize, dx: f64| [coord(ix, shift.0 + dx), coord(jy, shift.1 + dx)];
        let mut starts: Vec<([f64; 2], u64)> = Vec::new();
        for jy in 0..g - 1 {
            for ix in 0..g - 1 {
                let corners = [
                    nodes[jy * g + ix],
                    nodes[jy * g + ix + 1],
                    nodes[(jy + 1) * g + ix],
                    nodes[(jy + 1) * g + ix + 1],
                ];
                let Some(first) = corners[0] else { continue };
                let mask = first.0;
                if positive_only && mask != all_pos {
                    continue;
                }
                if corners.iter().any(|c| c.is_none_or(|c| c.0 != mask)) {
                    continue;
                }
                let change = |k: usize| {
                    let lo = corners.iter().map(|c| c.unwrap().1[k]).fold(f64::INFINITY, f64::min);
                    let hi = corners.iter().map(|c| c.unwrap().1[k]).fold(f64::NEG_INFINITY, f64::max);
                    lo <= 0.0 && hi >= 0.0
                };
                if change(0) && change(1) {
                    starts.push((y_at(ix, jy, 1.0), mask));
                }
            }
        }
        // Local minima of the residual norm catch tangential near-misses of
        // the corner test.
        let norm_at = |idx: usize| nodes[idx].map(|n| n.1[0].hypot(n.1[1]));
        for jy in 1..g - 1 {
            for ix in 1..g - 1 {
                let idx = jy * g + ix;
                let (Some(centre), Some(node)) = (norm_at(idx), nodes[idx]) else { continue };
                if positive_only && node.0 != all_pos {
                    continue;
                }
                let is_min = (-1i64..=1).all(|dj| {
                    (-1i64..=1).all(|di| {
                        let n = ((jy as i64 + dj) as usize) * g + (ix as i64 + di) as usize;
                        n == idx || nodes[n].is_some_and(|m| m.0 == node.0) && norm_at(n).unwrap() > centre
                    })
                });
                if is_min {
                    starts.push((y_at(ix, jy, 0.5), node.0));
                }
            }
        }
        starts
            .into_iter()
            .filter_map(|(y, mask)| self.newton(y, mask))
            .filter(|r| r.residual < RESIDUAL)
            .collect()
    }

    /// Damped Newton iteration confined to the sign cell `mask`.
    fn newton(&self, start: [f64; 2], mask: u64) -> Option<Root> {
        let mut y = start.to_vec();
        let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut r = self.residual(&y)?;
        for _ in 0..80 {
            let cur = norm(&r);
            if cur < 1e-14 {
                break;
            }
            let jac = self.jacobian(&y);
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let step = [
                -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
                -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
            ];
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-12 {
                let trial = vec![y[0] + alpha * step[0], y[1] + alpha * step[1]];
                let values = self.values(&trial);
                if mask_of(&values) == mask {
                    if let Some(tr) = self.residual_from(&values) {
                        if norm(&tr) < cur {
                            y = trial;
                            r = tr;
                            accepted = true;
                            break;
                        }
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
            if alpha * step[0].hypot(step[1]) < 1e-15 * (1.0 + y[0].hypot(y[1])) {
                break;
            }
        }
        self.make_root(y)
    }
}

fn mask_of(values: &[f64]) -> u64 {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .fold(0u64, |m, (i, _)| m | (1u64 << i.min(63)))
}

fn bisect(f: &dyn Fn(f64) -> f64, y: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_sign = f_lo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // The substitution resolves gaps to factor roots far below the
        // absolute tolerance in y, so both criteria must hold.
        let (ya, yb) = (y(lo), y(hi));
        if (yb - ya).abs() <= BISECT * ya.abs().max(1.0) && hi - lo <= 1e-14 * lo.abs().max(1.0) {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn dedup(mut roots: Vec<Root>) -> Vec<Root> {
    roots.sort_by(|a, b| a.y.iter().zip(&b.y).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<Root> = Vec::new();
    for r in roots {
        let scale = r.y.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let dup = out.iter_mut().find(|o| {
            o.y.iter().zip(&r.y).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())) <= DEDUP * scale
        });
        match dup {
            Some(o) if r.residual < o.residual => *o = r,
            Some(_) => {}
            None => out.push(r),
        }
    }
    out
}

/// One interval of `R` minus the factor roots, with a substitution `y(t)`
/// over `t in R` that resolves the neighbourhood of its endpoints.
struct Interval {
    lo: Option<f64>,
    hi: Option<f64>,
    /// For each factor: `Some(true)` if it vanishes at `lo`, `Some(false)` at
    /// `hi`, `None` otherwise.
    attached: Vec<Option<bool>>,
    signs: Vec<i8>,
}

fn log_sigmoid(t: f64) -> f64 {
    // log(1 / (1 + e^-t))
    if t > 0.0 {
        -(-t).exp().ln_1p()
    } else {
        t - t.exp().ln_1p()
    }
}

impl Interval {
    fn new(lo: Option<f64>, hi: Option<f64>, factors: &[Vec<f64>]) -> Self {
        let near = |r: f64, b: Option<f64>| b.is_some_and(|b| (r - b).abs() <= 1e-12 * b.abs().max(1.0));
        let attached: Vec<Option<bool>> = factors
            .iter()
            .map(|f| {
                if f[1] == 0.0 {
                    return None;
                }
                let r = -f[0] / f[1];
                if near(r, lo) {
                    Some(true)
                } else if near(r, hi) {
                    Some(false)
                } else {
                    None
                }
            })
            .collect();
        let mut piece = Self {
            lo,
            hi,
            attached,
            signs: Vec::new(),
        };
        let y0 = piece.y(0.0);
        piece.signs = factors
            .iter()
            .zip(&piece.attached)
            .map(|(f, a)| {
                let s = match a {
                    Some(true) => f[1],
                    Some(false) => -f[1],
                    None => f[0] + f[1] * y0,
                };
                if s > 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        piece
    }

    fn y(&self, t: f64) -> f64 {
        match (self.lo, self.hi) {
            (Some(a), Some(b)) => a + (b - a) * log_sigmoid(t).exp(),
            (Some(a), None) => a + t.exp(),
            (None, Some(b)) => b - t.exp(),
            (None, None) => t.sinh(),
        }
    }

    /// `log(y - lo)` and `log(hi - y)` computed without cancellation.
    fn log_gap(&self, t: f64, lower: bool) -> f64 {
        match (self.lo, self.hi, lower) {
            (Some(a), Some(b), true) => (b - a).ln() + log_sigmoid(t),
            (Some(a), Some(b), false) => (b - a).ln() + log_sigmoid(-t),
            (Some(_), None, true) | (None, Some(_), false) => t,
            _ => unreachable!("factor attached to a missing endpoint"),
        }
    }

    fn log_residual(&self, t: f64, sys: &LogSystem) -> f64 {
        let y = self.y(t);
        let mut r = -sys.log_targets[0];
        for ((f, e), a) in sys.factors.iter().zip(&sys.exps).zip(&self.attached) {
            let l = match a {
                Some(lower) => f[1].abs().ln() + self.log_gap(t, *lower),
                None => (f[0] + f[1] * y).abs().ln(),
            };
            r += e[0] * l;
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(factors: &[[f64; 2]], exps: &[f64], target: f64) -> LogSystem {
        LogSystem {
            factors: factors.iter().map(|f| f.to_vec()).collect(),
            exps: exps.iter().map(|e| vec![*e]).collect(),
            log_targets: vec![target.ln()],
        }
    }

    #[test]
    fn hand_solved_ratio() {
        // (1 + y) / (2 - y) = 1 at y = 1/2
        let s = sys(&[[1.0, 1.0], [2.0, -1.0]], &[1.0, -1.0], 1.0);
        let roots = s.solve(1000, true, 0).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].y[0] - 0.5).abs() < 1e-11);
    }

    #[test]
    fn roots_near_breakpoints_are_resolved() {
        // y^1 (1 - y)^-1 = 1e-9  =>  y ~ 1e-9
        let s = sys(&[[0.0, 1.0], [1.0, -1.0]], &[1.0, -1.0], 1e-9);
        let roots = s.solve(2000, true, 0).unwrap();
        assert_eq!(roots.len(), 1);
        let y = roots[0].y[0];
        assert!((y / (1.0 - y) - 1e-9).abs() < 1e-18);
    }

    #[test]
    fn all_cells() {
        // |y| = 2 has one root in each half line.
        let s = sys(&[[0.0, 1.0]], &[1.0], 2.0);
        let roots = s.solve(500, false, 0).unwrap();
        assert_eq!(roots.len(), 2);
        assert_eq!(s.solve(500, true, 0).unwrap().len(), 1);
    }

    #[test]
    fn two_variables() {
        // y1 / y2 = 2, y1 * y2 = 8 in the positive quadrant: (4, 2)
        let s = LogSystem {
            factors: vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            exps: vec![vec![1.0, 1.0], vec![-1.0, 1.0]],
            log_targets: vec![2f64.ln(), 8f64.ln()],
        };
        let roots = s.solve(200, true, 3).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].y[0] - 4.0).abs() < 1e-9 && (roots[0].y[1] - 2.0).abs() < 1e-9);
        // Every quadrant has a root of |y1/y2| = 2, |y1 y2| = 8.
        assert_eq!(s.solve(200, false, 3).unwrap().len(), 4);
    }
}
