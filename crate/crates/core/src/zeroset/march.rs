//! Streaming marching squares with a per-row union-find over crossing edges.

use super::ExpSum;

/// Largest exponent magnitude for which the separable evaluation is used.
const SEPARABLE_LIMIT: f64 = 600.0;

struct Dsu {
    parent: Vec<u32>,
    touching: Vec<bool>,
}

impl Dsu {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb as usize] = ra;
            let t = self.touching[rb as usize];
            self.touching[ra as usize] |= t;
        }
    }
}

/// Row evaluator for signs of `g` on the node grid.
struct Rows<'a> {
    g: &'a ExpSum,
    xs: Vec<f64>,
    /// `exp(a_{1j} x_i)` per term, when the separable path is safe.
    sep: Option<Vec<Vec<f64>>>,
}

impl<'a> Rows<'a> {
    fn new(g: &'a ExpSum, xs: Vec<f64>, radius: f64) -> Self {
        let a = g.spectrum().matrix();
        let worst = (0..g.coefficients().len())
            .map(|j| (a[(0, j)].abs() + a[(1, j)].abs()) * radius + g.coefficients()[j].abs().ln().abs())
            .fold(0.0_f64, f64::max);
        let sep = (worst < SEPARABLE_LIMIT).then(|| {
            (0..g.coefficients().len())
                .map(|j| xs.iter().map(|x| (a[(0, j)] * x).exp()).collect())
                .collect()
        });
        Self { g, xs, sep }
    }

    fn signs(&self, y: f64, out: &mut Vec<bool>) {
        out.clear();
        match &self.sep {
            Some(sep) => {
                let a = self.g.spectrum().matrix();
                let w: Vec<f64> = self
                    .g
                    .coefficients()
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * (a[(1, j)] * y).exp())
                    .collect();
                for i in 0..self.xs.len() {
                    let v: f64 = w.iter().zip(sep).map(|(wj, s)| wj * s[i]).sum();
                    out.push(v > 0.0);
                }
            }
            None => out.extend(self.xs.iter().map(|&x| self.g.eval_scaled(&[x, y]).0 > 0.0)),
        }
    }
}

/// `(components, components touching the boundary)` of the zero set on
/// `[-r, r]^2` sampled on a `grid x grid` cell raster.
pub(super) fn count(g: &ExpSum, r: f64, grid: usize) -> (usize, usize) {
    let gn = grid;
    let coord = |i: usize| -r + 2.0 * r * i as f64 / gn as f64;
    let xs: Vec<f64> = (0..=gn).map(coord).collect();
    let rows = Rows::new(g, xs.clone(), r);
    // Edge ids within one cell row: bottom horizontals [0, G), top
    // horizontals [G, 2G), verticals [2G, 3G + 1).
    let (top0, vert0) = (gn as u32, 2 * gn as u32);
    let size = 3 * gn + 1;
    let mut dsu = Dsu {
        parent: (0..size as u32).collect(),
        touching: vec![false; size],
    };
    // Only edges touched in the current row are reset afterwards.
    let mut active = vec![false; size];
    let mut touched: Vec<u32> = Vec::new();
    let mut lower = Vec::with_capacity(gn + 1);
    let mut upper = Vec::with_capacity(gn + 1);
    rows.signs(coord(0), &mut lower);
    // Carry-over from the previous row: bottom edge i -> (representative, touching).
    let mut carried: Vec<(u32, u32, bool)> = Vec::new();
    let mut next_carried: Vec<(u32, u32, bool)> = Vec::new();
    let mut components = 0;
    let mut touching = 0;
    let mut continuing = vec![false; size];
    let mut seen = vec![false; size];
    let mut rep_of = vec![u32::MAX; size];
    for k in 0..gn {
        rows.signs(coord(k + 1), &mut upper);
        for &(i, rep, t) in &carried {
            dsu.parent[i as usize] = rep;
            dsu.touching[rep as usize] |= t;
            touched.push(i);
            touched.push(rep);
        }
        let mut activate = |e: u32, boundary: bool, dsu: &mut Dsu, touched: &mut Vec<u32>| {
            if !active[e as usize] {
                active[e as usize] = true;
                touched.push(e);
            }
            if boundary {
                let root = dsu.find(e);
                dsu.touching[root as usize] = true;
            }
        };
        for i in 0..gn {
            let (s00, s10, s01, s11) = (lower[i], lower[i + 1], upper[i], upper[i + 1]);
            let eb = s00 != s10;
            let et = s01 != s11;
            let el = s00 != s01;
            let er = s10 != s11;
            if !(eb || et || el || er) {
                continue;
            }
            let b = i as u32;
            let t = top0 + i as u32;
            let l = vert0 + i as u32;
            let rr = vert0 + i as u32 + 1;
            let edges = [(b, eb, k == 0), (t, et, k + 1 == gn), (l, el, i == 0), (rr, er, i + 1 == gn)];
            for &(e, on, boundary) in &edges {
                if on {
                    activate(e, boundary, &mut dsu, &mut touched);
                }
            }
            if eb && et && el && er {
                let centre = g.eval_scaled(&[0.5 * (xs[i] + xs[i + 1]), 0.5 * (coord(k) + coord(k + 1))]).0 > 0.0;
                if centre == s00 {
                    dsu.union(b, rr);
                    dsu.union(t, l);
                } else {
                    dsu.union(b, l);
                    dsu.union(t, rr);
                }
            } else {
                // Outside saddles a cell has zero or two crossing edges.
                let mut first = None;
                for &(e, on, _) in &edges {
                    if on {
                        match first {
                            None => first = Some(e),
                            Some(f) => dsu.union(f, e),
                        }
                    }
                }
            }
        }
        let last = k + 1 == gn;
        // Roots continuing into the next row.
        if !last {
            for &e in &touched {
                if e >= top0 && e < vert0 && active[e as usize] {
                    let root = dsu.find(e);
                    continuing[root as usize] = true;
                }
            }
        }
        for idx in 0..touched.len() {
            let e = touched[idx];
            let carried_edge = e < top0 && carried.iter().any(|c| c.0 == e);
            if !active[e as usize] && !carried_edge {
                continue;
            }
            let root = dsu.find(e);
            if continuing[root as usize] || seen[root as usize] {
                continue;
            }
            seen[root as usize] = true;
            touched.push(root);
            components += 1;
            if dsu.touching[root as usize] {
                touching += 1;
            }
        }
        // Compact the top row into the next row's bottom ids.
        next_carried.clear();
        if !last {
            let mut tops: Vec<u32> = touched
                .iter()
                .copied()
                .filter(|&e| e >= top0 && e < vert0 && active[e as usize])
                .collect();
            tops.sort_unstable();
            tops.dedup();
            for e in tops {
                let root = dsu.find(e) as usize;
                let i = e - top0;
                if rep_of[root] == u32::MAX {
                    rep_of[root] = i;
                    touched.push(root as u32);
                }
                next_carried.push((i, rep_of[root], dsu.touching[root]));
            }
        }
        for &e in &touched {
            let e = e as usize;
            dsu.parent[e] = e as u32;
            dsu.touching[e] = false;
            active[e] = false;
            continuing[e] = false;
            seen[e] = false;
            rep_of[e] = u32::MAX;
        }
        touched.clear();
        std::mem::swap(&mut carried, &mut next_carried);
        std::mem::swap(&mut lower, &mut upper);
    }
    (components, touching)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::Spectrum;

    fn circles(cx: f64, cy: f64, rad: f64) -> ExpSum {
        // (e^y1 - cx)^2 + (e^y2 - cy)^2 - rad^2
        let spec = Spectrum::from_rows(&[&[0.0, 1.0, 0.0, 2.0, 0.0], &[0.0, 0.0, 1.0, 0.0, 2.0]]).unwrap();
        ExpSum::new(spec, vec![cx * cx + cy * cy - rad * rad, -2.0 * cx, -2.0 * cy, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn closed_oval_is_one_component() {
        let g = circles(3.0, 3.0, 1.0);
        assert_eq!(count(&g, 4.0, 256), (1, 0));
    }

    #[test]
    fn oval_cut_by_axis_touches_boundary() {
        let g = circles(0.5, 3.0, 1.0);
        assert_eq!(count(&g, 4.0, 256), (1, 1));
    }

    #[test]
    fn two_curves() {
        // (e^y1 - 1)(e^y1 - 4) = 0: two vertical lines
        let spec = Spectrum::from_rows(&[&[0.0, 1.0, 2.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]).unwrap();
        // 4 - 5 e^y1 + e^{2 y1} + 1e-30 e^y2: the last term is negligible on the box
        let g = ExpSum::new(spec, vec![4.0, -5.0, 1.0, 1e-30]).unwrap();
        assert_eq!(count(&g, 4.0, 256), (2, 2));
    }
}
