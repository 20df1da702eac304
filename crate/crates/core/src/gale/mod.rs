//! Gale dual systems and line/contour intersection counts.

mod solve;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use solve::Root;
use solve::LogSystem;

use crate::contour::{face_fibers, xi, SignVector, Source};
use crate::error::{Error, Result};
use crate::linalg;
use crate::spectrum::{NullBasis, Spectrum};

/// Exponent magnitude below which a factor is dropped from a system.
const EXP_TOL: f64 = 1e-12;

/// The bound `S(m, j)` on non-degenerate roots of a `j`-variate Gale dual
/// system with `m + j` factors. `S(m, j) = 1` for `j <= 0`.
pub fn s_bound(m: u64, j: i64) -> f64 {
    match j {
        j if j <= 0 => 1.0,
        1 => m as f64 + 1.0,
        j => {
            let c = (std::f64::consts::E.powi(2) + 3.0) / 4.0;
            let jf = j as f64;
            let log = c.ln() + jf * (jf - 1.0) / 2.0 * std::f64::consts::LN_2 + jf * (m as f64).ln();
            if m == 0 {
                0.0
            } else {
                log.exp()
            }
        }
    }
}

/// `prod_l (u_{l,0} + u_l . y)^{e_{l,i}} = targets_i`, `i = 1..j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaleSystem {
    pub m: usize,
    pub j: usize,
    /// Rows `(u_{l,0}, u_l)`.
    pub u: Vec<Vec<f64>>,
    /// Rows `(e_{l,1}, .., e_{l,j})`.
    pub e: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    /// Original index of each kept factor.
    pub factor_index: Vec<usize>,
    /// Condition number of the null basis block used to build the system.
    pub condition: f64,
}

impl GaleSystem {
    pub fn new(u: Vec<Vec<f64>>, e: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        let j = targets.len();
        if j == 0 || u.len() != e.len() || u.len() < j {
            return Err(Error::Dimension(format!(
                "{} factors, {} exponent rows, {} targets",
                u.len(),
                e.len(),
                j
            )));
        }
        if u.iter().any(|r| r.len() != j + 1) || e.iter().any(|r| r.len() != j) {
            return Err(Error::Dimension("factor or exponent row has the wrong length".into()));
        }
        Ok(Self {
            m: u.len() - j,
            factor_index: (0..u.len()).collect(),
            u,
            e,
            targets,
            j,
            condition: 1.0,
        })
    }

    /// `H(y)`: products minus targets, or `None` off the factor domain.
    pub fn eval(&self, y: &[f64]) -> Option<Vec<f64>> {
        let mut prods = vec![1.0; self.j];
        for (row, e) in self.u.iter().zip(&self.e) {
            let f = row[0] + row[1..].iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
            if f <= 0.0 {
                return None;
            }
            prods.iter_mut().zip(e).for_each(|(p, ei)| *p *= f.powf(*ei));
        }
        Some(prods.iter().zip(&self.targets).map(|(p, t)| p - t).collect())
    }

    /// Is `y` in the positivity domain `Delta`?
    pub fn in_delta(&self, y: &[f64]) -> bool {
        self.u
            .iter()
            .all(|row| row[0] + row[1..].iter().zip(y).map(|(a, b)| a * b).sum::<f64>() > 0.0)
    }

    fn log_system(&self) -> Option<LogSystem> {
        if self.targets.iter().any(|t| *t <= 0.0) {
            return None;
        }
        Some(LogSystem {
            factors: self.u.clone(),
            exps: self.e.clone(),
            log_targets: self.targets.iter().map(|t| t.ln()).collect(),
        })
    }
}

/// An affine line in `R^(k-1)` cut out by `k - 2` equations
/// `L_{i,1} x_1 + .. + L_{i,k-1} x_{k-1} = L_{i,0}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineLine {
    /// Rows `(L_{i,0}, L_{i,1}, .., L_{i,k-1})`.
    pub l: Vec<Vec<f64>>,
    pub seed: Option<u64>,
}

impl AffineLine {
    pub fn new(l: Vec<Vec<f64>>) -> Result<Self> {
        let ambient = l.first().map_or(0, |r| r.len().saturating_sub(1));
        if l.iter().any(|r| r.len() != ambient + 1) || l.len() + 1 != ambient {
            return Err(Error::Dimension(format!(
                "a line in R^{ambient} needs {} constraints of length {}",
                ambient.saturating_sub(1),
                ambient + 1
            )));
        }
        let m = DMatrix::from_fn(l.len(), ambient, |i, c| l[i][c + 1]);
        if linalg::numerical_rank(&m) != l.len() {
            return Err(Error::Precondition("line constraints are linearly dependent".into()));
        }
        Ok(Self { l, seed: None })
    }

    /// The line through `point` with direction `dir` (ambient dimension at
    /// least 2).
    pub fn through(point: &[f64], dir: &[f64]) -> Result<Self> {
        if point.len() != dir.len() || point.len() < 2 {
            return Err(Error::Dimension("line needs matching point and direction in R^2 or more".into()));
        }
        let v = DMatrix::from_row_slice(1, dir.len(), dir);
        let normals = linalg::nullspace(&v);
        if normals.ncols() + 1 != dir.len() {
            return Err(Error::Precondition("line direction must be nonzero".into()));
        }
        let l = (0..normals.ncols())
            .map(|c| {
                let w: Vec<f64> = normals.column(c).iter().copied().collect();
                let mut row = vec![linalg::dot(&w, point)];
                row.extend(w);
                row
            })
            .collect();
        Self::new(l)
    }

    /// Seeded random line through a uniform point of `[-radius, radius]^dim`
    /// with a uniformly random direction.
    pub fn random(dim: usize, radius: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let point: Vec<f64> = (0..dim).map(|_| rng.gen_range(-radius..radius)).collect();
        let dir: Vec<f64> = (0..dim).map(|_| linalg::sample_standard_normal(&mut rng)).collect();
        let mut line = Self::through(&point, &dir)?;
        line.seed = Some(seed);
        Ok(line)
    }

    pub fn ambient_dim(&self) -> usize {
        self.l.first().map_or(1, |r| r.len() - 1)
    }

    fn coefficients(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.l.len(), self.ambient_dim(), |i, c| self.l[i][c + 1])
    }

    fn offsets(&self) -> Vec<f64> {
        self.l.iter().map(|r| r[0]).collect()
    }

    /// Max-norm residual of the constraints at `x`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.l
            .iter()
            .map(|r| (linalg::dot(&r[1..], x) - r[0]).abs())
            .fold(0.0, f64::max)
    }
}

/// The Gale dual system whose roots (with `lambda_{k-1} = 1`) are the
/// parameters of points where `line` meets the reduced contour.
pub fn build_gale_system(spec: &Spectrum, basis: &NullBasis, line: &AffineLine) -> Result<GaleSystem> {
    let d = spec.affine_dim();
    if d != spec.n() {
        return Err(Error::DefectiveSpectrum { d, n: spec.n() });
    }
    if spec.k() < 3 {
        return Err(Error::Precondition("Gale systems need k >= 3".into()));
    }
    let dim = basis.dim();
    if line.ambient_dim() != dim {
        return Err(Error::Dimension(format!(
            "line lives in R^{}, reduced space is R^{dim}",
            line.ambient_dim()
        )));
    }
    let j = dim - 1;
    let lmat = line.coefficients();
    let mut u = Vec::new();
    let mut e = Vec::new();
    let mut factor_index = Vec::new();
    for (r, beta) in basis.rows().iter().enumerate() {
        let ex: Vec<f64> = (0..j).map(|i| linalg::dot(beta, lmat.row(i).iter().copied().collect::<Vec<_>>().as_slice())).collect();
        if ex.iter().all(|v| v.abs() < EXP_TOL) {
            continue;
        }
        let mut row = vec![beta[dim - 1]];
        row.extend_from_slice(&beta[..dim - 1]);
        u.push(row);
        e.push(ex);
        factor_index.push(r);
    }
    let sv = linalg::singular_values(basis.matrix());
    let condition = sv.first().copied().unwrap_or(0.0) / sv.last().copied().unwrap_or(0.0);
    let targets = line.offsets().iter().map(|t| t.exp()).collect();
    let mut sys = GaleSystem::new(u, e, targets)?;
    sys.factor_index = factor_index;
    sys.condition = condition;
    Ok(sys)
}

/// Roots of `sys` in `Delta`.
pub fn gale_roots(sys: &GaleSystem, resolution: usize, seed: u64) -> Result<Vec<Root>> {
    if sys.j > 2 {
        return Err(Error::UnsupportedJ(sys.j));
    }
    match sys.log_system() {
        Some(ls) => ls.solve(resolution, true, seed),
        None => Ok(Vec::new()),
    }
}

/// Number of distinct roots of `sys` in `Delta`.
pub fn count_gale_roots(sys: &GaleSystem, resolution: usize, seed: u64) -> Result<usize> {
    Ok(gale_roots(sys, resolution, seed)?.len())
}

/// A point where a line meets a (completed) signed contour.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Intersection {
    pub point: Vec<f64>,
    pub lambda: Vec<f64>,
    #[serde(serialize_with = "serialize_source")]
    pub source: Source,
    /// Conditioning of the underlying root; `f64::INFINITY` for linear solves.
    pub conditioning: f64,
}

fn serialize_source<S: serde::Serializer>(s: &Source, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_str(s)
}

impl Intersection {
    pub fn is_degenerate(&self) -> bool {
        self.conditioning < 1e-8
    }
}

fn signs_match(values: &[f64], rows: &[Vec<f64>], sigma: &SignVector) -> bool {
    let mask: Vec<bool> = rows.iter().map(|r| r.iter().any(|v| v.abs() >= 1e-9)).collect();
    let signs: Vec<i8> = values.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect();
    sigma.matches_masked(&signs, &mask)
}

/// Points of `line` on `Gamma_sigma`, plus the face fibers when `completed`.
pub fn line_intersections(
    spec: &Spectrum,
    basis: &NullBasis,
    sigma: &SignVector,
    line: &AffineLine,
    completed: bool,
    resolution: usize,
) -> Result<Vec<Intersection>> {
    if sigma.len() != basis.len() {
        return Err(Error::Dimension(format!(
            "sign vector has {} entries for {} columns",
            sigma.len(),
            basis.len()
        )));
    }
    let dim = basis.dim();
    let rows = basis.rows();
    let mut out = Vec::new();
    if dim == 1 {
        let lambda = vec![1.0];
        let values: Vec<f64> = rows.iter().map(|b| b[0]).collect();
        if signs_match(&values, rows, sigma) {
            out.push(Intersection {
                point: xi(basis, &lambda)?,
                lambda,
                source: Source::Main,
                conditioning: f64::INFINITY,
            });
        }
    } else {
        let sys = build_gale_system(spec, basis, line)?;
        let ls = LogSystem {
            factors: sys.u.clone(),
            exps: sys.e.clone(),
            log_targets: line.offsets(),
        };
        for root in ls.solve(resolution, false, line.seed.unwrap_or(0))? {
            let mut lambda = root.y.clone();
            lambda.push(1.0);
            let values: Vec<f64> = rows.iter().map(|b| linalg::dot(b, &lambda)).collect();
            if values.iter().zip(rows).any(|(v, b)| *v == 0.0 && b.iter().any(|x| *x != 0.0)) {
                continue;
            }
            if signs_match(&values, rows, sigma) {
                out.push(Intersection {
                    point: xi(basis, &lambda)?,
                    lambda,
                    source: Source::Main,
                    conditioning: root.conditioning,
                });
            }
        }
    }
    if completed {
        out.extend(fiber_intersections(spec, basis, sigma, line, resolution)?);
    }
    Ok(out)
}

fn fiber_intersections(
    spec: &Spectrum,
    basis: &NullBasis,
    sigma: &SignVector,
    line: &AffineLine,
    resolution: usize,
) -> Result<Vec<Intersection>> {
    let dim = basis.dim();
    let lmat = if dim >= 2 { line.coefficients() } else { DMatrix::zeros(0, dim) };
    let l0 = if dim >= 2 { line.offsets() } else { Vec::new() };
    let mut out = Vec::new();
    for fiber in face_fibers(spec, basis)? {
        let p = fiber.param_dim();
        let local = sigma.project(&fiber.columns);
        let nfree = fiber.free.len();
        let v = DMatrix::from_fn(dim, nfree, |r, c| fiber.free[c][r]);
        let lv = &lmat * &v;
        // Rows w with w (L V) = 0 eliminate the free coordinates.
        let w = if lv.nrows() == 0 {
            DMatrix::zeros(0, 0)
        } else if nfree == 0 {
            DMatrix::identity(lv.nrows(), lv.nrows())
        } else {
            linalg::nullspace(&lv.transpose())
        };
        let jw = w.ncols();
        if jw + 1 != p {
            // Non-generic dimension count: the fiber does not meet the line
            // in isolated points.
            continue;
        }
        let base_point = |mu: &[f64]| -> Vec<f64> {
            let mut x = vec![0.0; dim];
            for (f, d) in fiber.forms.iter().zip(&fiber.dirs) {
                let l = linalg::dot(f, mu).abs().ln();
                x.iter_mut().zip(d).for_each(|(xi, di)| *xi += l * di);
            }
            x
        };
        let mus: Vec<(Vec<f64>, f64)> = if p == 1 {
            vec![(vec![1.0], f64::INFINITY)]
        } else {
            // Gale system in the face parameters.
            let lb: Vec<Vec<f64>> = fiber
                .dirs
                .iter()
                .map(|d| {
                    let ld = &lmat * DMatrix::from_column_slice(dim, 1, d);
                    (0..jw).map(|i| (0..ld.nrows()).map(|r| w[(r, i)] * ld[(r, 0)]).sum()).collect()
                })
                .collect();
            let targets: Vec<f64> = (0..jw).map(|i| (0..l0.len()).map(|r| w[(r, i)] * l0[r]).sum()).collect();
            let factors: Vec<Vec<f64>> = fiber
                .forms
                .iter()
                .map(|f| {
                    let mut row = vec![f[p - 1]];
                    row.extend_from_slice(&f[..p - 1]);
                    row
                })
                .collect();
            let ls = LogSystem {
                factors,
                exps: lb,
                log_targets: targets,
            };
            ls.solve(resolution, false, line.seed.unwrap_or(0))?
                .into_iter()
                .map(|r| {
                    let mut mu = r.y.clone();
                    mu.push(1.0);
                    (mu, r.conditioning)
                })
                .collect()
        };
        for (mu, conditioning) in mus {
            let values: Vec<f64> = fiber.forms.iter().map(|f| linalg::dot(f, &mu)).collect();
            if values.contains(&0.0) || !signs_match(&values, &fiber.forms, &local) {
                continue;
            }
            let x0 = base_point(&mu);
            let point = if nfree == 0 {
                x0
            } else if lv.nrows() == 0 {
                continue;
            } else {
                let rhs: Vec<f64> = (0..lv.nrows())
                    .map(|i| l0[i] - linalg::dot(&lmat.row(i).iter().copied().collect::<Vec<_>>(), &x0))
                    .collect();
                let rhs = nalgebra::DVector::from_vec(rhs);
                let svd = lv.clone().svd(true, true);
                let Ok(t) = svd.solve(&rhs, 1e-12) else { continue };
                if (&lv * &t - &rhs).amax() > 1e-9 * (1.0 + rhs.amax()) {
                    continue;
                }
                (0..dim).map(|r| x0[r] + (0..nfree).map(|c| v[(r, c)] * t[c]).sum::<f64>()).collect()
            };
            if dim >= 2 && line.residual(&point) > 1e-6 * (1.0 + point.iter().fold(0.0_f64, |m, x| m.max(x.abs()))) {
                continue;
            }
            out.push(Intersection {
                point,
                lambda: mu,
                source: Source::Face(fiber.face_index),
                conditioning,
            });
        }
    }
    Ok(out)
}

/// Bound on `|L cap Gamma_sigma|` for a generic line.
pub fn main_line_bound(n: u64, k: u64) -> u64 {
    if k <= 2 {
        1
    } else {
        s_bound(n + 2, k as i64 - 2).floor() as u64
    }
}

/// Bound on `|L cap completed Gamma_sigma|` for a generic line.
pub fn completed_line_bound(n: u64, k: u64) -> u64 {
    match k {
        0..=2 => 1,
        3 => n + 5,
        _ => {
            let mm = (n + 1).min((k - 2) / 3);
            let sum: f64 = (0..=mm)
                .map(|i| s_bound(n + 2 - i, k as i64 - 2 - 3 * i as i64))
                .sum::<f64>()
                + mm as f64;
            sum.floor() as u64
        }
    }
}

/// Intersection counts of one line with every signed contour.
#[derive(Debug, Clone, Serialize)]
pub struct LineReport {
    pub seed: u64,
    pub redraws: Vec<u64>,
    /// `(sigma, count)` for classes the line meets.
    pub counts: Vec<(SignVector, usize)>,
    pub max_count: usize,
    pub bound: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub schema_version: &'static str,
    pub completed: bool,
    pub bound: u64,
    pub lines: Vec<LineReport>,
    pub pass: bool,
}

/// Intersect `lines` seeded random lines with `Gamma_sigma` for every class.
/// A line producing a degenerate root is redrawn with the next seed.
pub fn line_sweep(
    spec: &Spectrum,
    basis: &NullBasis,
    lines: usize,
    seed: u64,
    completed: bool,
    resolution: usize,
    box_radius: f64,
) -> Result<SweepReport> {
    let (n, k) = (spec.n() as u64, spec.k() as u64);
    let bound = if completed {
        completed_line_bound(n, k)
    } else {
        main_line_bound(n, k)
    };
    let classes = SignVector::all(basis.len());
    let mut next = seed;
    let mut reports = Vec::new();
    for _ in 0..lines {
        let mut redraws = Vec::new();
        let report = loop {
            let s = next;
            next += 1;
            let line = if basis.dim() >= 2 {
                AffineLine::random(basis.dim(), box_radius, s)?
            } else {
                AffineLine { l: Vec::new(), seed: Some(s) }
            };
            let mut counts = Vec::new();
            let mut degenerate = false;
            for sigma in &classes {
                let hits = line_intersections(spec, basis, sigma, &line, completed, resolution)?;
                degenerate |= hits.iter().any(Intersection::is_degenerate);
                if !hits.is_empty() {
                    counts.push((sigma.clone(), hits.len()));
                }
            }
            if degenerate && redraws.len() < 16 {
                redraws.push(s);
                continue;
            }
            let max_count = counts.iter().map(|c| c.1).max().unwrap_or(0);
            break LineReport {
                seed: s,
                redraws,
                counts,
                max_count,
                bound,
                pass: max_count as u64 <= bound,
            };
        };
        reports.push(report);
    }
    let pass = reports.iter().all(|r| r.pass);
    Ok(SweepReport {
        schema_version: "1",
        completed,
        bound,
        lines: reports,
        pass,
    })
}

/// Exhaustive check of both inequalities of the sum lemma for
/// `k' + k'' <= max_k` and all partitions of `k - 1` with `k <= max_k`.
pub fn check_sum_lemma(n: u64, max_k: u64) -> Result<bool> {
    if n < 2 || max_k > 12 {
        return Err(Error::Precondition("sum lemma check needs n >= 2 and max_k <= 12".into()));
    }
    let s = |j: i64| s_bound(n + 1, j);
    let ge = |a: f64, b: f64| a >= b * (1.0 - 1e-12);
    for k1 in 2..=max_k as i64 {
        for k2 in 2..=max_k as i64 - k1 {
            if !ge(s(k1 + k2 - 2), s(k1 - 2) + s(k2 - 2)) {
                return Ok(false);
            }
        }
    }
    for k in 5..=max_k as i64 {
        let lhs = s(k - 5) + 1.0;
        let mut ok = true;
        for_each_partition(k - 1, 2, &mut Vec::new(), &mut |parts| {
            if parts.len() >= 2 {
                let rhs: f64 = parts.iter().map(|&p| s(p - 2)).sum();
                ok &= ge(lhs, rhs);
            }
        });
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Calls `f` on every partition of `total` into parts `>= min`, in
/// nondecreasing order.
fn for_each_partition(total: i64, min: i64, parts: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
    if total == 0 {
        f(parts);
        return;
    }
    for p in min..=total {
        parts.push(p);
        for_each_partition(total - p, p, parts, f);
        parts.pop();
    }
}
