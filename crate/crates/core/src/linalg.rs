//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr_lite::standard_normal;

/// Relative singular-value cutoff used for every rank decision in the crate.
pub const RANK_TOL: f64 = 1e-9;

/// Singular values sorted in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Rank with singular values below `RANK_TOL * sigma_max` treated as zero.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&v| v > RANK_TOL * top).count(),
        _ => 0,
    }
}

/// Orthonormal basis (as columns) of the right nullspace of `m`.
///
/// The matrix is transposed and zero-padded to a square so that the full set
/// of left singular vectors is available; the trailing ones span the kernel.
pub fn nullspace(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let rank = numerical_rank(m);
    let dim = cols - rank.min(cols);
    if dim == 0 {
        return DMatrix::zeros(cols, 0);
    }
    let size = cols.max(rows);
    let mut padded = DMatrix::<f64>::zeros(cols, size);
    padded.view_mut((0, 0), (cols, rows)).copy_from(&m.transpose());
    let svd = padded.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut basis = DMatrix::<f64>::zeros(cols, dim);
    for (out, &idx) in order[rank..rank + dim].iter().enumerate() {
        let mut col = u.column(idx).clone_owned();
        if let Some(first) = col.iter().find(|v| v.abs() > 1e-12) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        basis.set_column(out, &col);
    }
    basis
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let rank = numerical_rank(m);
    if rank == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let size = rows.max(cols);
    let mut padded = DMatrix::<f64>::zeros(rows, size);
    padded.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = padded.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut basis = DMatrix::<f64>::zeros(rows, rank);
    for (out, &idx) in order[..rank].iter().enumerate() {
        basis.set_column(out, &u.column(idx));
    }
    basis
}

/// Haar-ish random orthogonal matrix via QR of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| standard_normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..dim {
        if r[(i, i)] < 0.0 {
            let mut col = q.column_mut(i);
            col.neg_mut();
        }
    }
    q
}

/// Frobenius norm.
pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn to_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Minimal Gaussian sampler so the crate does not need `rand_distr`.
mod rand_distr_lite {
    use rand::Rng;

    pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        // Box-Muller
        let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

pub use rand_distr_lite::standard_normal as sample_standard_normal;
