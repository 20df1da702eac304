//! Face lattice of `Conv{a_1, ..., a_{n+k}}` for low dimensions.
//!
//! Facets come from brute-force enumeration of supporting hyperplanes through
//! affinely independent column subsets; lower faces are intersections of
//! facets. Work happens in coordinates of the affine hull, and normals are
//! mapped back by orthogonal inclusion, so for `d(A) < n` every normal lies
//! in the direction space of the hull.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use super::Spectrum;
use crate::error::{Error, Result};
use crate::linalg;

/// A proper face `A^w` together with one canonical outer normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Unit outer normal in `R^n`.
    pub normal: Vec<f64>,
    /// Zero-based column indices `j` with `a_j . w` maximal.
    pub columns: Vec<usize>,
    /// Affine dimension of the face.
    pub dim: usize,
}

impl Face {
    /// Co-cardinality defect `k_w = r - d(A^w)`.
    pub fn k_w(&self) -> usize {
        self.columns.len() - self.dim
    }

    pub fn is_non_simplicial(&self, ambient_dim: usize) -> bool {
        self.dim < ambient_dim && self.columns.len() >= self.dim + 2
    }
}

pub(super) fn enumerate(spec: &Spectrum) -> Result<Vec<Face>> {
    if spec.n() > 3 {
        return Err(Error::UnsupportedDimension(spec.n()));
    }
    let count = spec.len();
    let origin = spec.matrix().column(0).clone_owned();
    let mut diffs = DMatrix::<f64>::zeros(spec.n(), count);
    for j in 0..count {
        diffs.set_column(j, &(spec.matrix().column(j) - &origin));
    }
    // Orthonormal frame of the direction space of the affine hull.
    let frame = linalg::column_space(&diffs);
    let d = frame.ncols();
    let local: Vec<DVector<f64>> = (0..count)
        .map(|j| frame.transpose() * diffs.column(j))
        .collect();
    let scale = local.iter().map(|p| p.amax()).fold(1.0_f64, f64::max);
    let tol = 1e-9 * scale;

    let facets = facets(&local, d, tol);
    let mut sets: BTreeSet<Vec<usize>> = facets.iter().map(|(cols, _)| cols.clone()).collect();
    loop {
        let current: Vec<Vec<usize>> = sets.iter().cloned().collect();
        let mut grew = false;
        for (i, a) in current.iter().enumerate() {
            for b in &current[i + 1..] {
                let meet: Vec<usize> = a.iter().filter(|j| b.contains(j)).copied().collect();
                if !meet.is_empty() && sets.insert(meet) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }

    let mut faces = Vec::with_capacity(sets.len());
    for cols in sets {
        let mut w = DVector::<f64>::zeros(d);
        for (fcols, normal) in &facets {
            if cols.iter().all(|j| fcols.contains(j)) {
                w += normal;
            }
        }
        let w = w.normalize();
        let heights: Vec<f64> = local.iter().map(|p| p.dot(&w)).collect();
        let top = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exposed: Vec<usize> = (0..count).filter(|&j| heights[j] > top - tol).collect();
        debug_assert_eq!(exposed, cols, "summed facet normals must expose the face");
        let normal: Vec<f64> = (&frame * &w).iter().copied().collect();
        let dim = affine_dim_of(&local, &cols);
        faces.push(Face {
            normal,
            columns: exposed,
            dim,
        });
    }
    faces.sort_by(|a, b| b.dim.cmp(&a.dim).then_with(|| a.columns.cmp(&b.columns)));
    Ok(faces)
}

/// Facets of the full-dimensional point set `local` in `R^d`.
fn facets(local: &[DVector<f64>], d: usize, tol: f64) -> Vec<(Vec<usize>, DVector<f64>)> {
    let count = local.len();
    let mut out: Vec<(Vec<usize>, DVector<f64>)> = Vec::new();
    for subset in combinations(count, d) {
        let base = &local[subset[0]];
        let mut m = DMatrix::<f64>::zeros(d - 1, d);
        for (r, &j) in subset[1..].iter().enumerate() {
            m.set_row(r, &(&local[j] - base).transpose());
        }
        let kernel = linalg::nullspace(&m);
        if kernel.ncols() != 1 {
            continue;
        }
        let w: DVector<f64> = kernel.column(0).clone_owned();
        for orient in [1.0, -1.0] {
            let w = &w * orient;
            let h0 = base.dot(&w);
            let heights: Vec<f64> = local.iter().map(|p| p.dot(&w)).collect();
            if heights.iter().all(|&h| h <= h0 + tol) {
                let cols: Vec<usize> = (0..count).filter(|&j| heights[j] > h0 - tol).collect();
                if !out.iter().any(|(c, _)| *c == cols) {
                    out.push((cols, w));
                }
            }
        }
    }
    out
}

fn affine_dim_of(local: &[DVector<f64>], cols: &[usize]) -> usize {
    if cols.len() <= 1 {
        return 0;
    }
    let d = local[0].len();
    let base = &local[cols[0]];
    let mut m = DMatrix::<f64>::zeros(d, cols.len() - 1);
    for (c, &j) in cols[1..].iter().enumerate() {
        m.set_column(c, &(&local[j] - base));
    }
    linalg::numerical_rank(&m)
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::with_capacity(r), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn has_normal(f: &Face, w: [f64; 2]) -> bool {
        (f.normal[0] - w[0]).abs() < 1e-9 && (f.normal[1] - w[1]).abs() < 1e-9
    }

    #[test]
    fn parallelogram_faces() {
        let spec = fixtures::parallelogram();
        let faces = spec.faces().unwrap();
        let facets: Vec<&Face> = faces.iter().filter(|f| f.dim == 1).collect();
        assert_eq!(facets.len(), 3);
        let left = facets.iter().find(|f| has_normal(f, [-1.0, 0.0])).unwrap();
        let bottom = facets.iter().find(|f| has_normal(f, [0.0, -1.0])).unwrap();
        assert_eq!(left.columns, vec![0, 2, 4]);
        assert_eq!(bottom.columns, vec![0, 1, 3]);
        let ns = spec.non_simplicial_faces().unwrap();
        assert_eq!(ns.len(), 2);
        assert!(ns.len() <= spec.len() - spec.affine_dim() - 1);
        assert!(!spec.is_combinatorially_simplicial().unwrap());
        assert_eq!(left.k_w(), 2);
    }

    #[test]
    fn simplex_faces() {
        let spec = Spectrum::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap();
        let faces = spec.faces().unwrap();
        let edges: Vec<&Face> = faces.iter().filter(|f| f.dim == 1).collect();
        assert_eq!(edges.len(), 3);
        assert!(edges.iter().all(|e| e.columns.len() == 2));
        assert_eq!(faces.len(), 6);
        assert!(spec.non_simplicial_faces().unwrap().is_empty());
        assert!(spec.is_combinatorially_simplicial().unwrap());
    }

    #[test]
    fn pentagon_faces() {
        let spec = fixtures::pentagon();
        let faces = spec.faces().unwrap();
        let edges: Vec<&Face> = faces.iter().filter(|f| f.dim == 1).collect();
        assert_eq!(edges.len(), 5);
        assert!(edges.iter().all(|e| e.columns.len() == 2));
        assert!(spec.non_simplicial_faces().unwrap().is_empty());
        assert!(spec.is_combinatorially_simplicial().unwrap());
    }

    #[test]
    fn normals_attain_maximum() {
        for spec in [fixtures::pentagon(), fixtures::parallelogram()] {
            for face in spec.faces().unwrap() {
                let h: Vec<f64> = (0..spec.len())
                    .map(|j| linalg::dot(&spec.column(j), &face.normal))
                    .collect();
                let top = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                for &j in &face.columns {
                    assert!((h[j] - top).abs() < 1e-9);
                }
                assert!((linalg::norm(&face.normal) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lower_dimensional_hull_uses_in_hull_normals() {
        // Collinear points in the plane: faces are the two endpoints.
        let spec = Spectrum::from_rows(&[&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]]).unwrap();
        let faces = spec.faces().unwrap();
        assert_eq!(faces.len(), 2);
        for f in &faces {
            assert_eq!(f.columns.len(), 1);
            assert!((f.normal[0] - f.normal[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn three_dimensional_cube_corner() {
        let spec = Spectrum::from_rows(&[
            &[0.0, 1.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let faces = spec.faces().unwrap();
        // Square pyramid over the unit square with apex (0,0,1).
        let facets = faces.iter().filter(|f| f.dim == 2).count();
        let edges = faces.iter().filter(|f| f.dim == 1).count();
        let vertices = faces.iter().filter(|f| f.dim == 0).count();
        assert_eq!((facets, edges, vertices), (5, 8, 5));
        assert_eq!(spec.non_simplicial_faces().unwrap().len(), 1);
    }

    #[test]
    fn four_variables_unsupported() {
        let spec = Spectrum::from_rows(&[
            &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0, 1.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(spec.faces(), Err(Error::UnsupportedDimension(4)));
    }
}
