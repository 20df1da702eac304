//! Raster chamber decomposition of the plane minus a thickened contour.

use serde::Serialize;

use super::cloud::ContourCloud;
use super::sign::SignVector;
use crate::error::{Error, Result};
use crate::spectrum::{NullBasis, Spectrum};

/// Thickening radius of the contour, in grid cells.
const THICKENING: f64 = 1.5;
const STAMP_STEP: f64 = 0.5;
const CONTOUR: u32 = u32::MAX;
/// Pockets with fewer cells than one stamp disc (about pi * 1.5^2) are below
/// raster resolution, typically wedges at cusp tips, and are merged into the
/// contour.
const MIN_CHAMBER_CELLS: usize = 7;

/// Axis-aligned box `[xmin, xmax] x [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxRegion {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl BoxRegion {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let b = Self { xmin, xmax, ymin, ymax };
        let finite = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite());
        if !finite || xmax <= xmin || ymax <= ymin {
            return Err(Error::DegenerateBox(b.as_array()));
        }
        Ok(b)
    }

    pub fn square(radius: f64) -> Result<Self> {
        Self::new(-radius, radius, -radius, radius)
    }

    /// Parse `"a,b,c,d"` as `xmin,xmax,ymin,ymax`.
    pub fn parse(s: &str) -> Result<Self> {
        let vals: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Precondition(format!("box `{s}` must be four comma-separated reals")))?;
        if vals.len() != 4 {
            return Err(Error::Precondition(format!("box `{s}` must have four entries")));
        }
        Self::new(vals[0], vals[1], vals[2], vals[3])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.xmin, self.xmax, self.ymin, self.ymax]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.xmin && x <= self.xmax && y >= self.ymin && y <= self.ymax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chamber {
    pub id: usize,
    pub inner: bool,
    pub cell_count: usize,
}

/// Serializable summary written by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct ChamberSummary {
    pub schema_version: &'static str,
    pub sigma: Option<String>,
    pub chambers: Vec<Chamber>,
    #[serde(rename = "box")]
    pub bbox: [f64; 4],
    pub resolution: usize,
    pub stable: bool,
}

/// Labelled raster of the complement of a thickened contour.
#[derive(Debug, Clone)]
pub struct ChamberMap {
    pub bbox: BoxRegion,
    pub resolution: usize,
    pub chambers: Vec<Chamber>,
    /// Whether the chamber count and inner/outer flags agree at `2x` and `4x`
    /// the resolution.
    pub stable: bool,
    pub sigma: Option<SignVector>,
    labels: Vec<u32>,
}

impl ChamberMap {
    /// Single-resolution raster (no stability check; `stable` is `false`).
    pub fn build(cloud: &ContourCloud, bbox: BoxRegion, resolution: usize) -> Result<Self> {
        if cloud.dim != 2 && !cloud.is_empty() {
            return Err(Error::Dimension(format!(
                "chambers need a planar contour, got dimension {}",
                cloud.dim
            )));
        }
        if resolution < 2 {
            return Err(Error::Precondition("grid resolution must be at least 2".into()));
        }
        let mut raster = Raster::new(bbox, resolution);
        raster.draw(cloud);
        let (labels, chambers) = raster.flood();
        Ok(Self {
            bbox,
            resolution,
            chambers,
            stable: false,
            sigma: cloud.sigma.clone(),
            labels,
        })
    }

    pub fn count(&self) -> usize {
        self.chambers.len()
    }

    pub fn inner_count(&self) -> usize {
        self.chambers.iter().filter(|c| c.inner).count()
    }

    fn cell_of(&self, x: f64, y: f64) -> Result<(usize, usize)> {
        if !self.bbox.contains(x, y) {
            return Err(Error::OutsideBox { x, y });
        }
        let g = self.resolution;
        let i = (((x - self.bbox.xmin) / self.bbox.width()) * g as f64).floor() as usize;
        let j = (((y - self.bbox.ymin) / self.bbox.height()) * g as f64).floor() as usize;
        Ok((i.min(g - 1), j.min(g - 1)))
    }

    /// Chamber id of the cell containing `(x, y)`.
    pub fn chamber_at(&self, x: f64, y: f64) -> Result<usize> {
        let (i, j) = self.cell_of(x, y)?;
        match self.labels[j * self.resolution + i] {
            CONTOUR => Err(Error::OnContour { x, y }),
            id => Ok(id as usize),
        }
    }

    pub fn chamber(&self, id: usize) -> Option<&Chamber> {
        self.chambers.get(id)
    }

    /// Center of a uniformly random cell of the given chamber.
    pub fn sample_in<R: rand::Rng + ?Sized>(&self, id: usize, rng: &mut R) -> Option<(f64, f64)> {
        let count = self.chambers.get(id)?.cell_count;
        let target = rng.gen_range(0..count);
        let idx = self
            .labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == id as u32)
            .nth(target)?
            .0;
        let g = self.resolution as f64;
        let (i, j) = ((idx % self.resolution) as f64, (idx / self.resolution) as f64);
        Some((
            self.bbox.xmin + (i + 0.5) / g * self.bbox.width(),
            self.bbox.ymin + (j + 0.5) / g * self.bbox.height(),
        ))
    }

    pub fn summary(&self) -> ChamberSummary {
        ChamberSummary {
            schema_version: "1",
            sigma: self.sigma.as_ref().map(|s| s.to_string()),
            chambers: self.chambers.clone(),
            bbox: self.bbox.as_array(),
            resolution: self.resolution,
            stable: self.stable,
        }
    }
}

/// Chamber map at `grid_resolution`, checked against two resolution doublings.
pub fn chambers(cloud: &ContourCloud, bbox: BoxRegion, grid_resolution: usize) -> Result<ChamberMap> {
    let mut base = ChamberMap::build(cloud, bbox, grid_resolution)?;
    let signature = |m: &ChamberMap| (m.count(), m.inner_count());
    let twice = ChamberMap::build(cloud, bbox, grid_resolution * 2)?;
    let four = ChamberMap::build(cloud, bbox, grid_resolution * 4)?;
    base.stable = signature(&base) == signature(&twice) && signature(&twice) == signature(&four);
    Ok(base)
}

/// Result of placing a coefficient vector in a chamber map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Location {
    pub sigma: SignVector,
    pub point: Vec<f64>,
    pub chamber: usize,
}

/// `sign(c)`, the reduced point `(Log|c|) B`, and the chamber containing it.
pub fn locate(_spec: &Spectrum, basis: &NullBasis, c: &[f64], map: &ChamberMap) -> Result<Location> {
    if c.len() != basis.len() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} columns",
            c.len(),
            basis.len()
        )));
    }
    let sigma = SignVector::of_values(c)?;
    if let Some(expected) = &map.sigma {
        if *expected != sigma {
            return Err(Error::Precondition(format!(
                "chamber map was built for class {expected}, coefficients have class {sigma}"
            )));
        }
    }
    let point = reduced_point(basis, c)?;
    if point.len() != 2 {
        return Err(Error::Dimension("locate needs a planar reduced space".into()));
    }
    let chamber = map.chamber_at(point[0], point[1])?;
    Ok(Location { sigma, point, chamber })
}

/// `(Log|c|) B`.
pub fn reduced_point(basis: &NullBasis, c: &[f64]) -> Result<Vec<f64>> {
    if let Some(index) = c.iter().position(|v| *v == 0.0) {
        return Err(Error::ZeroCoefficient { index });
    }
    let mut out = vec![0.0; basis.dim()];
    for (row, v) in basis.rows().iter().zip(c) {
        let l = v.abs().ln();
        out.iter_mut().zip(row).for_each(|(o, b)| *o += l * b);
    }
    Ok(out)
}

struct Raster {
    bbox: BoxRegion,
    g: usize,
    blocked: Vec<bool>,
}

impl Raster {
    fn new(bbox: BoxRegion, g: usize) -> Self {
        Self {
            bbox,
            g,
            blocked: vec![false; g * g],
        }
    }

    fn to_grid(&self, p: &[f64]) -> (f64, f64) {
        (
            (p[0] - self.bbox.xmin) / self.bbox.width() * self.g as f64,
            (p[1] - self.bbox.ymin) / self.bbox.height() * self.g as f64,
        )
    }

    fn draw(&mut self, cloud: &ContourCloud) {
        let mut strand_sizes = std::collections::HashMap::new();
        for p in &cloud.points {
            if let Some(s) = p.strand {
                *strand_sizes.entry(s).or_insert(0usize) += 1;
            }
        }
        for p in &cloud.points {
            if p.strand.is_none_or(|s| strand_sizes[&s] == 1) {
                let q = self.to_grid(&p.coords);
                self.stamp(q);
            }
        }
        for (a, b) in cloud.segments() {
            self.segment(self.to_grid(a), self.to_grid(b));
        }
        for t in &cloud.tails {
            let a = self.to_grid(&t.origin);
            let far: Vec<f64> = {
                let reach = 4.0
                    * (self.bbox.width() + self.bbox.height()
                        + t.origin[0].abs()
                        + t.origin[1].abs());
                t.origin.iter().zip(&t.direction).map(|(o, d)| o + reach * d).collect()
            };
            self.segment(a, self.to_grid(&far));
        }
    }

    fn stamp(&mut self, (x, y): (f64, f64)) {
        let g = self.g as i64;
        let r = THICKENING;
        let i0 = (x - r - 0.5).floor() as i64;
        let i1 = (x + r - 0.5).ceil() as i64;
        let j0 = (y - r - 0.5).floor() as i64;
        let j1 = (y + r - 0.5).ceil() as i64;
        if i1 < 0 || j1 < 0 || i0 >= g || j0 >= g {
            return;
        }
        for j in j0.max(0)..=j1.min(g - 1) {
            for i in i0.max(0)..=i1.min(g - 1) {
                let dx = i as f64 + 0.5 - x;
                let dy = j as f64 + 0.5 - y;
                if dx * dx + dy * dy <= r * r {
                    self.blocked[j as usize * self.g + i as usize] = true;
                }
            }
        }
    }

    fn segment(&mut self, a: (f64, f64), b: (f64, f64)) {
        let lo = -THICKENING - 1.0;
        let hi = self.g as f64 + THICKENING + 1.0;
        let Some((a, b)) = clip(a, b, lo, hi) else {
            return;
        };
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let steps = (len / STAMP_STEP).ceil().max(1.0) as usize;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            self.stamp((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }

    fn flood(&self) -> (Vec<u32>, Vec<Chamber>) {
        let g = self.g;
        let mut labels: Vec<u32> = self.blocked.iter().map(|&b| if b { CONTOUR } else { u32::MAX - 1 }).collect();
        let unvisited = u32::MAX - 1;
        let mut chambers = Vec::new();
        let mut stack = Vec::new();
        for start in 0..g * g {
            if labels[start] != unvisited {
                continue;
            }
            let id = chambers.len() as u32;
            let mut cells = 0usize;
            let mut touches = false;
            labels[start] = id;
            stack.push(start);
            while let Some(c) = stack.pop() {
                cells += 1;
                let (i, j) = (c % g, c / g);
                if i == 0 || j == 0 || i == g - 1 || j == g - 1 {
                    touches = true;
                }
                let mut visit = |n: usize| {
                    if labels[n] == unvisited {
                        labels[n] = id;
                        stack.push(n);
                    }
                };
                if i > 0 {
                    visit(c - 1);
                }
                if i + 1 < g {
                    visit(c + 1);
                }
                if j > 0 {
                    visit(c - g);
                }
                if j + 1 < g {
                    visit(c + g);
                }
            }
            chambers.push(Chamber {
                id: id as usize,
                inner: !touches,
                cell_count: cells,
            });
        }
        if chambers.iter().any(|c| c.cell_count >= MIN_CHAMBER_CELLS) {
            let mut remap = vec![CONTOUR; chambers.len()];
            let mut kept = Vec::new();
            for c in chambers {
                if c.cell_count >= MIN_CHAMBER_CELLS {
                    remap[c.id] = kept.len() as u32;
                    kept.push(Chamber { id: kept.len(), ..c });
                }
            }
            for l in labels.iter_mut().filter(|l| **l != CONTOUR) {
                *l = remap[*l as usize];
            }
            chambers = kept;
        }
        (labels, chambers)
    }
}

/// Liang-Barsky clip of segment `a -> b` to the square `[lo, hi]^2`.
fn clip(a: (f64, f64), b: (f64, f64), lo: f64, hi: f64) -> Option<((f64, f64), (f64, f64))> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    for (p, q) in [
        (-dx, a.0 - lo),
        (dx, hi - a.0),
        (-dy, a.1 - lo),
        (dy, hi - a.1),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some(((a.0 + t0 * dx, a.1 + t0 * dy), (a.0 + t1 * dx, a.1 + t1 * dy)))
}
