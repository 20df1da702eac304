//! Spectra (exponent matrices), their lift, null bases and face data.

mod faces;
mod io;

pub use faces::Face;
pub use io::parse_coefficients;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;

/// Distinct-column tolerance in the max norm.
const DISTINCT_TOL: f64 = 1e-12;
/// Rows of a null basis below this max-norm count as zero rows.
const ZERO_ROW_TOL: f64 = 1e-9;
/// Cross-product tolerance when identifying rows projectively.
const PROJECTIVE_TOL: f64 = 1e-8;

/// An `n x (n+k)` real exponent matrix; column `j` is the exponent vector `a_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    n: usize,
    k: usize,
    a: DMatrix<f64>,
}

/// The lifted matrix with a prepended all-ones row and its affine dimension.
#[derive(Debug, Clone)]
pub struct LiftedSpectrum {
    pub ahat: DMatrix<f64>,
    pub d: usize,
}

/// Orthonormal basis of the right nullspace of the lifted matrix.
///
/// Rows `beta_i` index the columns of the spectrum; they define the
/// hyperplane arrangement `{lambda : beta_i . lambda = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullBasis {
    b: DMatrix<f64>,
    rows: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let cols = a.ncols();
        if n == 0 {
            return Err(Error::InvalidSpectrum("n must be at least 1".into()));
        }
        if cols <= n {
            return Err(Error::InvalidSpectrum(format!(
                "need n + k columns with k >= 1; got {cols} columns for n = {n}"
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum("entries must be finite".into()));
        }
        for i in 0..cols {
            for j in i + 1..cols {
                let gap = (a.column(i) - a.column(j)).amax();
                if gap < DISTINCT_TOL {
                    return Err(Error::InvalidSpectrum(format!(
                        "columns {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { n, k: cols - n, a })
    }

    /// Build from row slices, e.g. `&[&[0., 1., 2.]]`.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidSpectrum("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(DMatrix::from_row_slice(n, cols, &flat))
    }

    pub fn parse(text: &str) -> Result<Self> {
        io::parse_spectrum(text)
    }

    pub fn to_text(&self) -> String {
        io::format_spectrum(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of terms `n + k`.
    pub fn len(&self) -> usize {
        self.n + self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.a.column(j).iter().copied().collect()
    }

    pub fn lift(&self) -> LiftedSpectrum {
        let cols = self.len();
        let mut ahat = DMatrix::<f64>::zeros(self.n + 1, cols);
        ahat.row_mut(0).fill(1.0);
        ahat.view_mut((1, 0), (self.n, cols)).copy_from(&self.a);
        let d = linalg::numerical_rank(&ahat) - 1;
        LiftedSpectrum { ahat, d }
    }

    /// Affine dimension `d(A) = rank(Ahat) - 1`.
    pub fn affine_dim(&self) -> usize {
        self.lift().d
    }

    /// Dimension of the reduced space, `n + k - d(A) - 1`.
    pub fn reduced_dim(&self) -> usize {
        self.len() - self.affine_dim() - 1
    }

    pub fn null_basis(&self) -> Result<NullBasis> {
        let lifted = self.lift();
        let b = linalg::nullspace(&lifted.ahat);
        if b.ncols() == 0 {
            return Err(Error::ZeroNullspace);
        }
        Ok(NullBasis::from_matrix_unchecked(b))
    }

    /// A spectrum is pyramidal iff its null basis has a zero row.
    pub fn is_pyramidal(&self) -> Result<bool> {
        Ok(self.null_basis()?.has_zero_row())
    }

    pub fn faces(&self) -> Result<Vec<Face>> {
        faces::enumerate(self)
    }

    pub fn non_simplicial_faces(&self) -> Result<Vec<Face>> {
        let d = self.affine_dim();
        Ok(self
            .faces()?
            .into_iter()
            .filter(|f| f.is_non_simplicial(d))
            .collect())
    }

    pub fn is_combinatorially_simplicial(&self) -> Result<bool> {
        Ok(self.faces()?.iter().all(|f| f.columns.len() == f.dim + 1))
    }

    /// Numerical surrogate for defectiveness: the Jacobian of the reduced
    /// Horn-Kapranov map has deficient rank at every sampled `lambda`.
    pub fn is_defective_heuristic(&self, samples: usize, seed: u64) -> Result<bool> {
        let basis = self.null_basis()?;
        let dim = basis.dim();
        if dim <= 1 {
            return Ok(false);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut taken = 0;
        let mut attempts = 0;
        while taken < samples.max(1) {
            attempts += 1;
            if attempts > 1000 * samples.max(1) {
                return Err(Error::Precondition(
                    "could not sample lambda off the hyperplane arrangement".into(),
                ));
            }
            let mut lambda: Vec<f64> = (0..dim).map(|_| linalg::sample_standard_normal(&mut rng)).collect();
            let norm = linalg::norm(&lambda);
            lambda.iter_mut().for_each(|v| *v /= norm);
            if basis.rows().iter().any(|row| {
                let r = linalg::norm(row);
                r > ZERO_ROW_TOL && linalg::dot(row, &lambda).abs() < 1e-3 * r
            }) {
                continue;
            }
            taken += 1;
            let jac = finite_difference_jacobian(&basis, &lambda)?;
            let s = linalg::singular_values(&jac);
            let top = s.first().copied().unwrap_or(0.0);
            let rank = s.iter().filter(|&&v| v > 1e-6 * top.max(1e-300)).count();
            if rank >= dim - 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn finite_difference_jacobian(basis: &NullBasis, lambda: &[f64]) -> Result<DMatrix<f64>> {
    const STEP: f64 = 1e-6;
    let dim = lambda.len();
    let mut jac = DMatrix::<f64>::zeros(dim, dim);
    for c in 0..dim {
        let mut plus = lambda.to_vec();
        let mut minus = lambda.to_vec();
        plus[c] += STEP;
        minus[c] -= STEP;
        let fp = crate::contour::xi(basis, &plus)?;
        let fm = crate::contour::xi(basis, &minus)?;
        for r in 0..dim {
            jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * STEP);
        }
    }
    Ok(jac)
}

impl LiftedSpectrum {
    pub fn norm(&self) -> f64 {
        linalg::frobenius(&self.ahat)
    }
}

impl NullBasis {
    /// Wrap an arbitrary matrix whose columns are meant to span the nullspace.
    /// No orthonormality or kernel check is performed.
    pub fn from_matrix_unchecked(b: DMatrix<f64>) -> Self {
        let rows = (0..b.nrows())
            .map(|i| b.row(i).iter().copied().collect())
            .collect();
        Self { b, rows }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let cols = rows.first().map_or(0, |r| r.len());
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_matrix_unchecked(DMatrix::from_row_slice(n, cols, &flat))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Number of rows `n + k`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of columns `n + k - d - 1`, i.e. the reduced dimension.
    pub fn dim(&self) -> usize {
        self.b.ncols()
    }

    /// Mix the columns by an orthogonal matrix; the span is unchanged.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Self {
        Self::from_matrix_unchecked(&self.b * q)
    }

    pub fn has_zero_row(&self) -> bool {
        self.rows
            .iter()
            .any(|r| r.iter().fold(0.0_f64, |m, v| m.max(v.abs())) < ZERO_ROW_TOL)
    }

    /// `max |Ahat B|` divided by `|Ahat|`.
    pub fn kernel_residual(&self, lifted: &LiftedSpectrum) -> f64 {
        (&lifted.ahat * &self.b).amax() / lifted.norm().max(f64::MIN_POSITIVE)
    }

    pub fn orthonormality_residual(&self) -> f64 {
        let k = self.dim();
        (self.b.transpose() * &self.b - DMatrix::<f64>::identity(k, k)).amax()
    }

    /// Distinct points `[beta_i1 : beta_i2]` of the projective line.
    pub fn projective_row_classes(&self) -> Result<Vec<[f64; 2]>> {
        self.projective_row_classes_with(PROJECTIVE_TOL)
    }

    /// As [`Self::projective_row_classes`] with an explicit cross-product
    /// tolerance (useful for bases given to a few digits).
    pub fn projective_row_classes_with(&self, tol: f64) -> Result<Vec<[f64; 2]>> {
        if self.dim() != 2 {
            return Err(Error::WrongColumnCount(self.dim()));
        }
        let mut classes: Vec<[f64; 2]> = Vec::new();
        for row in &self.rows {
            let r = linalg::norm(row);
            if row.iter().fold(0.0_f64, |m, v| m.max(v.abs())) < ZERO_ROW_TOL {
                continue;
            }
            let p = [row[0] / r, row[1] / r];
            if !classes
                .iter()
                .any(|q| (p[0] * q[1] - p[1] * q[0]).abs() < tol)
            {
                classes.push(p);
            }
        }
        Ok(classes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    /// Gaussian elimination rank, independent of the SVD path.
    fn elimination_rank(mut m: Vec<Vec<f64>>) -> usize {
        let rows = m.len();
        let cols = m[0].len();
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..rows).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())) else {
                break;
            };
            if m[p][c].abs() < 1e-10 {
                continue;
            }
            m.swap(rank, p);
            for r in 0..rows {
                if r != rank {
                    let f = m[r][c] / m[rank][c];
                    for cc in 0..cols {
                        m[r][cc] -= f * m[rank][cc];
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn lift_rows(s: &Spectrum) -> Vec<Vec<f64>> {
        let l = s.lift();
        (0..l.ahat.nrows())
            .map(|i| l.ahat.row(i).iter().copied().collect())
            .collect()
    }

    #[test]
    fn affine_dim_examples() {
        let pent = fixtures::pentagon();
        assert_eq!(pent.affine_dim(), 2);
        assert_eq!(elimination_rank(lift_rows(&pent)) - 1, 2);
        let line = Spectrum::from_rows(&[&[0.0, 1.0, 2.0]]).unwrap();
        assert_eq!(line.affine_dim(), 1);
        let pyr = Spectrum::from_rows(&[&[0.0, 1.0, 0.0, 2.0], &[0.0, 0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(pyr.affine_dim(), 2);
        assert_eq!(elimination_rank(lift_rows(&pyr)) - 1, 2);
    }

    #[test]
    fn pyramid_basis_is_hand_solution() {
        let pyr = Spectrum::from_rows(&[&[0.0, 1.0, 0.0, 2.0], &[0.0, 0.0, 1.0, 0.0]]).unwrap();
        let b = pyr.null_basis().unwrap();
        assert_eq!(b.dim(), 1);
        let expected = [1.0, -2.0, 0.0, 1.0];
        let en = linalg::norm(&expected);
        let col: Vec<f64> = b.matrix().column(0).iter().copied().collect();
        let cos = linalg::dot(&col, &expected) / en;
        assert!((cos.abs() - 1.0).abs() < 1e-9);
        assert!(pyr.is_pyramidal().unwrap());
    }

    #[test]
    fn reference_bases_are_approximate_kernels() {
        for (spec, b) in [
            (fixtures::pentagon(), fixtures::pentagon_reference_basis()),
            (fixtures::parallelogram(), fixtures::parallelogram_reference_basis()),
        ] {
            let lifted = spec.lift();
            assert!((&lifted.ahat * b.matrix()).amax() < 1e-3);
        }
    }

    #[test]
    fn computed_bases_satisfy_invariants() {
        for spec in [fixtures::pentagon(), fixtures::parallelogram()] {
            let lifted = spec.lift();
            let b = spec.null_basis().unwrap();
            assert!(b.kernel_residual(&lifted) < 1e-10);
            assert!(b.orthonormality_residual() < 1e-10);
            for c in 0..b.dim() {
                assert!(b.matrix().column(c).sum().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pyramidality() {
        assert!(!fixtures::pentagon().is_pyramidal().unwrap());
        assert!(!fixtures::parallelogram().is_pyramidal().unwrap());
        assert!(!fixtures::parallelogram_reference_basis().has_zero_row());
    }

    #[test]
    fn zero_nullspace_is_an_error() {
        let simplex = Spectrum::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(simplex.null_basis(), Err(Error::ZeroNullspace));
        assert_eq!(simplex.is_pyramidal(), Err(Error::ZeroNullspace));
    }

    #[test]
    fn duplicate_columns_rejected() {
        let err = Spectrum::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 2.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidSpectrum(_)));
    }

    #[test]
    fn projective_classes() {
        // The reference basis is rounded to four digits.
        let classes = fixtures::parallelogram_reference_basis()
            .projective_row_classes_with(1e-3)
            .unwrap();
        assert_eq!(classes.len(), 3);
        let strict = fixtures::parallelogram_reference_basis()
            .projective_row_classes()
            .unwrap();
        assert_eq!(strict.len(), 5);
        let computed = fixtures::parallelogram()
            .null_basis()
            .unwrap()
            .projective_row_classes()
            .unwrap();
        assert_eq!(computed.len(), 3);
        let pent = fixtures::pentagon_reference_basis()
            .projective_row_classes()
            .unwrap();
        assert_eq!(pent.len(), 5);
        let twin = NullBasis::from_rows(&[&[1.0, 2.0], &[1.0, 2.0], &[-1.0, 0.5]]);
        assert_eq!(twin.projective_row_classes().unwrap().len(), 2);
        let thin = NullBasis::from_rows(&[&[1.0], &[-1.0]]);
        assert_eq!(thin.projective_row_classes(), Err(Error::WrongColumnCount(1)));
    }

    #[test]
    fn defectiveness_heuristic() {
        assert!(!fixtures::pentagon().is_defective_heuristic(8, 1).unwrap());
        assert!(!fixtures::parallelogram().is_defective_heuristic(8, 1).unwrap());
        let k2 = Spectrum::from_rows(&[&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 0.0, 2.0]]).unwrap();
        assert!(!k2.is_defective_heuristic(4, 0).unwrap());
    }
}
