//! Reduced discriminant contours, signed and completed contours, and their
//! rasterized chamber decompositions.

mod chambers;
mod cloud;
mod sign;
pub(crate) mod sweep;

pub use chambers::{chambers, locate, reduced_point, BoxRegion, Chamber, ChamberMap, ChamberSummary, Location};
pub use cloud::{
    completed_contour, face_fibers, sample_contour, CloudPoint, ContourCloud, ContourSampler, FaceFiber,
    Source, Tail,
};
pub use sign::{SignReading, SignVector};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::spectrum::NullBasis;

/// Relative threshold below which `beta_i . lambda` counts as zero.
const HYPERPLANE_TOL: f64 = 1e-12;
const ZERO_ROW_TOL: f64 = 1e-9;

fn is_zero_row(row: &[f64]) -> bool {
    row.iter().fold(0.0_f64, |m, v| m.max(v.abs())) < ZERO_ROW_TOL
}

fn checked_forms(basis: &NullBasis, lambda: &[f64]) -> Result<Vec<f64>> {
    if lambda.len() != basis.dim() {
        return Err(Error::Dimension(format!(
            "lambda has {} entries, basis has {} columns",
            lambda.len(),
            basis.dim()
        )));
    }
    let ln = norm(lambda);
    basis
        .rows()
        .iter()
        .enumerate()
        .map(|(row, beta)| {
            let v = dot(beta, lambda);
            if !is_zero_row(beta) && v.abs() <= HYPERPLANE_TOL * norm(beta) * ln {
                Err(Error::HyperplaneHit { row })
            } else {
                Ok(v)
            }
        })
        .collect()
}

/// The reduced Horn-Kapranov map `lambda -> (Log|lambda B^T|) B`.
///
/// Zero rows of `B` (pyramidal spectra) contribute nothing.
pub fn xi(basis: &NullBasis, lambda: &[f64]) -> Result<Vec<f64>> {
    let values = checked_forms(basis, lambda)?;
    let mut out = vec![0.0; basis.dim()];
    for (beta, v) in basis.rows().iter().zip(&values) {
        if is_zero_row(beta) {
            continue;
        }
        let l = v.abs().ln();
        for (o, b) in out.iter_mut().zip(beta) {
            *o += l * b;
        }
    }
    Ok(out)
}

/// Canonical signs of the linear forms `beta_i . lambda`. Zero rows get `+`
/// before canonicalization.
pub fn sign_class(basis: &NullBasis, lambda: &[f64]) -> Result<SignVector> {
    sign_class_with(basis, lambda, SignReading::Linear)
}

/// Sign class under either reading. `LogMagnitude` uses the literal signs of
/// `log|beta_i . lambda|` for the representative passed in.
pub fn sign_class_with(basis: &NullBasis, lambda: &[f64], reading: SignReading) -> Result<SignVector> {
    let values = checked_forms(basis, lambda)?;
    let raw: Vec<Option<i8>> = basis
        .rows()
        .iter()
        .zip(&values)
        .map(|(beta, &v)| {
            if is_zero_row(beta) {
                return None;
            }
            let x = match reading {
                SignReading::Linear => v,
                SignReading::LogMagnitude => v.abs().ln(),
            };
            Some(if x > 0.0 { 1 } else { -1 })
        })
        .collect();
    // Zero rows carry no sign; orient by the first nonzero row so that they
    // read `+` for both lambda and -lambda.
    let flip = raw.iter().flatten().next().copied().unwrap_or(1);
    let signs: Vec<i8> = raw.iter().map(|s| s.map_or(1, |s| s * flip)).collect();
    SignVector::new(&signs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn xi_is_projectively_invariant() {
        let b = fixtures::pentagon().null_basis().unwrap();
        let lambda = [0.3, -1.7];
        let scaled = [0.6, -3.4];
        let p = xi(&b, &lambda).unwrap();
        let q = xi(&b, &scaled).unwrap();
        assert!(p.iter().zip(&q).all(|(a, c)| (a - c).abs() < 1e-10));
        let neg = xi(&b, &[-0.3, 1.7]).unwrap();
        assert!(p.iter().zip(&neg).all(|(a, c)| (a - c).abs() < 1e-10));
    }

    #[test]
    fn xi_matches_hand_evaluation_on_reference_basis() {
        let b = fixtures::pentagon_reference_basis();
        // Independent arithmetic: forms at lambda = (1, 1) are the row sums.
        let rows: [[f64; 2]; 5] = [
            [0.5079, 0.5420],
            [-0.8069, 0.1199],
            [0.1721, -0.7974],
            [0.2267, -0.0851],
            [-0.0997, 0.2206],
        ];
        let mut expect = [0.0; 2];
        for r in rows {
            let l = (r[0] + r[1]).abs().ln();
            expect[0] += l * r[0];
            expect[1] += l * r[1];
        }
        let got = xi(&b, &[1.0, 1.0]).unwrap();
        assert!((got[0] - expect[0]).abs() < 1e-12 && (got[1] - expect[1]).abs() < 1e-12);
    }

    #[test]
    fn hyperplane_hit() {
        let b = fixtures::pentagon_reference_basis();
        // beta_1 . (0.5420, -0.5079) = 0
        assert_eq!(xi(&b, &[0.5420, -0.5079]), Err(Error::HyperplaneHit { row: 0 }));
        assert!(matches!(xi(&b, &[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn sign_classes_match_reference_labels() {
        let b = fixtures::pentagon_reference_basis();
        let s = sign_class(&b, &[1.0, 0.0]).unwrap();
        assert_eq!(s, "+-++-".parse().unwrap());
        let t = sign_class(&b, &[0.0, 1.0]).unwrap();
        assert_eq!(t, "++--+".parse().unwrap());
        assert_eq!(sign_class(&b, &[-1.0, 0.0]).unwrap(), s);
    }

    #[test]
    fn log_magnitude_reading_is_literal() {
        let b = fixtures::pentagon_reference_basis();
        // |forms| at (1, 0) are all below one, so every log is negative.
        let s = sign_class_with(&b, &[1.0, 0.0], SignReading::LogMagnitude).unwrap();
        assert_eq!(s.to_string(), "+++++");
    }
}
