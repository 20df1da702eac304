use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::sign::{SignReading, SignVector};
use super::sweep::{sweep, LogLinearMap, Strand, SweepOptions};
use crate::error::{Error, Result};
use crate::linalg;
use crate::spectrum::{NullBasis, Spectrum};

/// Where a cloud point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    /// The reduced contour itself.
    Main,
    /// The fiber over the non-simplicial face with this index.
    Face(usize),
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::Main => f.write_str("main"),
            Source::Face(i) => write!(f, "face:{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloudPoint {
    pub coords: Vec<f64>,
    pub sigma: SignVector,
    pub source: Source,
    /// The projective parameter that produced the point (the face parameter
    /// for fiber points).
    pub lambda: Vec<f64>,
    /// Points sharing a strand id are consecutive samples of one curve.
    pub strand: Option<usize>,
}

/// Straight continuation of a strand to infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct Tail {
    pub strand: usize,
    pub origin: Vec<f64>,
    pub direction: Vec<f64>,
}

/// Finite sample of a (signed, possibly completed) reduced contour.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContourCloud {
    pub dim: usize,
    pub resolution: usize,
    pub points: Vec<CloudPoint>,
    pub tails: Vec<Tail>,
    /// The sign class the cloud was sampled for; `None` for the union.
    pub sigma: Option<SignVector>,
}

impl ContourCloud {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Sign classes present in the cloud.
    pub fn classes(&self) -> BTreeSet<SignVector> {
        self.points.iter().map(|p| p.sigma.clone()).collect()
    }

    pub fn sources(&self) -> BTreeSet<Source> {
        self.points.iter().map(|p| p.source).collect()
    }

    /// Restrict to one source.
    pub fn filter_source(&self, keep: impl Fn(Source) -> bool) -> ContourCloud {
        let points: Vec<CloudPoint> = self.points.iter().filter(|p| keep(p.source)).cloned().collect();
        let strands: BTreeSet<usize> = points.iter().filter_map(|p| p.strand).collect();
        ContourCloud {
            dim: self.dim,
            resolution: self.resolution,
            points,
            tails: self.tails.iter().filter(|t| strands.contains(&t.strand)).cloned().collect(),
            sigma: self.sigma.clone(),
        }
    }

    /// Chords between consecutive samples of each strand.
    pub fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64])> + '_ {
        self.points.windows(2).filter_map(|w| match (w[0].strand, w[1].strand) {
            (Some(a), Some(b)) if a == b => Some((w[0].coords.as_slice(), w[1].coords.as_slice())),
            _ => None,
        })
    }

    /// Distance from `p` to the sampled contour (chords, isolated points and
    /// tails), in the ambient metric.
    pub fn distance_to(&self, p: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        let mut strand_len = std::collections::HashMap::new();
        for pt in &self.points {
            if let Some(s) = pt.strand {
                *strand_len.entry(s).or_insert(0usize) += 1;
            }
        }
        for pt in &self.points {
            let lone = pt.strand.is_none_or(|s| strand_len[&s] == 1);
            if lone {
                best = best.min(dist(&pt.coords, p));
            }
        }
        for (a, b) in self.segments() {
            best = best.min(point_segment_distance(p, a, b));
        }
        for t in &self.tails {
            let rel: Vec<f64> = p.iter().zip(&t.origin).map(|(x, o)| x - o).collect();
            let s = linalg::dot(&rel, &t.direction).max(0.0);
            let foot: Vec<f64> = t.origin.iter().zip(&t.direction).map(|(o, d)| o + s * d).collect();
            best = best.min(dist(&foot, p));
        }
        best
    }

    /// Number of chords and tails of a planar cloud crossed by the segment
    /// `a -> b`.
    pub fn crossings(&self, a: &[f64], b: &[f64]) -> usize {
        let mut count = self.segments().filter(|(p, q)| segments_cross(a, b, p, q)).count();
        for t in &self.tails {
            let reach = 1e6 * (1.0 + linalg::norm(&t.origin));
            let far: Vec<f64> = t.origin.iter().zip(&t.direction).map(|(o, d)| o + reach * d).collect();
            if segments_cross(a, b, &t.origin, &far) {
                count += 1;
            }
        }
        count
    }

    /// CSV with header `u,v,sigma,source` (for two-dimensional clouds).
    pub fn to_csv(&self) -> String {
        let names = ["u", "v", "w", "x", "y", "z"];
        let mut out = String::new();
        for i in 0..self.dim {
            out.push_str(names.get(i).copied().unwrap_or("c"));
            if names.get(i).is_none() {
                let _ = write!(out, "{i}");
            }
            out.push(',');
        }
        out.push_str("sigma,source\n");
        for p in &self.points {
            for c in &p.coords {
                let _ = write!(out, "{c},");
            }
            let _ = writeln!(out, "{},{}", p.sigma, p.source);
        }
        out
    }

    fn push_strand(&mut self, strand: Strand, sigma: &SignVector, source: Source, next_id: &mut usize) {
        let id = *next_id;
        *next_id += 1;
        if let Some(dir) = strand.head_tail {
            self.tails.push(Tail {
                strand: id,
                origin: strand.images[0].clone(),
                direction: dir,
            });
        }
        if let Some(dir) = strand.end_tail {
            self.tails.push(Tail {
                strand: id,
                origin: strand.images[strand.images.len() - 1].clone(),
                direction: dir,
            });
        }
        let connected = strand.connected;
        for (lambda, coords) in strand.lambdas.into_iter().zip(strand.images) {
            self.points.push(CloudPoint {
                coords,
                sigma: sigma.clone(),
                source,
                lambda,
                strand: connected.then_some(id),
            });
        }
    }
}

fn segments_cross(a: &[f64], b: &[f64], p: &[f64], q: &[f64]) -> bool {
    let orient = |o: &[f64], u: &[f64], v: &[f64]| (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0]);
    let d1 = orient(p, q, a);
    let d2 = orient(p, q, b);
    let d3 = orient(a, b, p);
    let d4 = orient(a, b, q);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let ap: Vec<f64> = p.iter().zip(a).map(|(x, y)| x - y).collect();
    let len2 = linalg::dot(&ab, &ab);
    let t = if len2 > 0.0 {
        (linalg::dot(&ap, &ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let foot: Vec<f64> = a.iter().zip(&ab).map(|(x, d)| x + t * d).collect();
    dist(&foot, p)
}

/// The affine fiber family over one non-simplicial face.
///
/// A point of the fiber is `sum_{j in J} log|f_j . lambda| beta_j + V t` where
/// `f_j` are rows of a null basis of the lifted face matrix, `beta_j` rows of
/// the full basis, and `V` spans the rows `beta_j` with `j` off the face.
#[derive(Debug, Clone)]
pub struct FaceFiber {
    pub face_index: usize,
    pub columns: Vec<usize>,
    /// Rows of the face null basis, one per face column.
    pub forms: Vec<Vec<f64>>,
    /// Matching rows of the full null basis.
    pub dirs: Vec<Vec<f64>>,
    /// Orthonormal basis of the free directions.
    pub free: Vec<Vec<f64>>,
}

impl FaceFiber {
    pub(crate) fn map(&self) -> LogLinearMap {
        LogLinearMap::new(self.forms.clone(), self.dirs.clone())
    }

    pub fn param_dim(&self) -> usize {
        self.forms.first().map_or(0, |f| f.len())
    }
}

/// Fibers over every non-simplicial face, indexed like
/// [`Spectrum::non_simplicial_faces`].
pub fn face_fibers(spec: &Spectrum, basis: &NullBasis) -> Result<Vec<FaceFiber>> {
    let faces = spec.non_simplicial_faces()?;
    let mut out = Vec::new();
    for (face_index, face) in faces.iter().enumerate() {
        let cols = &face.columns;
        let mut sub = DMatrix::<f64>::zeros(spec.n() + 1, cols.len());
        for (c, &j) in cols.iter().enumerate() {
            sub[(0, c)] = 1.0;
            for r in 0..spec.n() {
                sub[(r + 1, c)] = spec.matrix()[(r, j)];
            }
        }
        let face_basis = linalg::nullspace(&sub);
        if face_basis.ncols() == 0 {
            continue;
        }
        let forms: Vec<Vec<f64>> = (0..cols.len())
            .map(|r| face_basis.row(r).iter().copied().collect())
            .collect();
        let dirs: Vec<Vec<f64>> = cols.iter().map(|&j| basis.row(j).to_vec()).collect();
        let off: Vec<usize> = (0..spec.len()).filter(|j| !cols.contains(j)).collect();
        let mut span = DMatrix::<f64>::zeros(basis.dim(), off.len());
        for (c, &j) in off.iter().enumerate() {
            for r in 0..basis.dim() {
                span[(r, c)] = basis.row(j)[r];
            }
        }
        let free_m = linalg::column_space(&span);
        let free = (0..free_m.ncols())
            .map(|c| free_m.column(c).iter().copied().collect())
            .collect();
        out.push(FaceFiber {
            face_index,
            columns: cols.clone(),
            forms,
            dirs,
            free,
        });
    }
    Ok(out)
}

/// Sampling parameters shared by the main and completed contours.
#[derive(Debug, Clone)]
pub struct ContourSampler {
    /// Grid points on the projective parameter space (half-circle angles
    /// for two-column bases).
    pub resolution: usize,
    pub seed: u64,
    pub reading: SignReading,
    /// Relative tube radius around the hyperplane arrangement.
    pub tube: f64,
    /// Chords longer than this are refined.
    pub max_gap: f64,
    /// Fiber sweep half-width `R_fiber`.
    pub fiber_radius: f64,
}

impl ContourSampler {
    pub fn new(resolution: usize) -> Self {
        Self {
            resolution,
            seed: 0,
            reading: SignReading::Linear,
            tube: 1e-7,
            max_gap: 0.02,
            fiber_radius: 8.0,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn reading(mut self, reading: SignReading) -> Self {
        self.reading = reading;
        self
    }

    pub fn max_gap(mut self, gap: f64) -> Self {
        self.max_gap = gap;
        self
    }

    /// Sets `R_fiber` to twice the given box radius.
    pub fn box_radius(mut self, radius: f64) -> Self {
        self.fiber_radius = 2.0 * radius;
        self
    }

    fn options(&self) -> SweepOptions {
        SweepOptions {
            resolution: self.resolution,
            seed: self.seed,
            tube: self.tube,
            max_gap: self.max_gap,
            reading: self.reading,
        }
    }

    fn main_into(&self, basis: &NullBasis, sigma: &SignVector, cloud: &mut ContourCloud, next: &mut usize) {
        let rows = basis.rows().to_vec();
        let map = LogLinearMap::new(rows.clone(), rows);
        for strand in sweep(&map, sigma, &self.options()) {
            cloud.push_strand(strand, sigma, Source::Main, next);
        }
    }

    fn fibers_into(
        &self,
        fibers: &[FaceFiber],
        sigma: &SignVector,
        cloud: &mut ContourCloud,
        next: &mut usize,
    ) {
        let opts = self.options();
        let line_res = self.resolution.clamp(16, 4096);
        for fiber in fibers {
            let local_sigma = sigma.project(&fiber.columns);
            let source = Source::Face(fiber.face_index);
            for base in sweep(&fiber.map(), &local_sigma, &opts) {
                match fiber.free.len() {
                    0 => cloud.push_strand(base, sigma, source, next),
                    1 => {
                        let v = &fiber.free[0];
                        for (lambda, origin) in base.lambdas.iter().zip(&base.images) {
                            let r = self.fiber_radius;
                            let ts = (0..line_res).map(|i| -r + 2.0 * r * i as f64 / (line_res - 1) as f64);
                            let images: Vec<Vec<f64>> = ts
                                .map(|t| origin.iter().zip(v).map(|(o, d)| o + t * d).collect())
                                .collect();
                            let strand = Strand {
                                lambdas: vec![lambda.clone(); images.len()],
                                images,
                                head_tail: Some(v.iter().map(|d| -d).collect()),
                                end_tail: Some(v.clone()),
                                connected: true,
                            };
                            cloud.push_strand(strand, sigma, source, next);
                        }
                    }
                    m => {
                        let side = ((line_res as f64).powf(1.0 / m as f64).ceil() as usize).max(2);
                        let r = self.fiber_radius;
                        for (lambda, origin) in base.lambdas.iter().zip(&base.images) {
                            for idx in 0..side.pow(m as u32) {
                                let mut p = origin.clone();
                                let mut rem = idx;
                                for v in &fiber.free {
                                    let t = -r + 2.0 * r * (rem % side) as f64 / (side - 1) as f64;
                                    rem /= side;
                                    p.iter_mut().zip(v).for_each(|(x, d)| *x += t * d);
                                }
                                cloud.push_strand(
                                    Strand {
                                        lambdas: vec![lambda.clone()],
                                        images: vec![p],
                                        ..Default::default()
                                    },
                                    sigma,
                                    source,
                                    next,
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    /// Signed contour for one class.
    pub fn main(&self, basis: &NullBasis, sigma: &SignVector) -> ContourCloud {
        let mut cloud = self.empty(basis, Some(sigma.clone()));
        let mut next = 0;
        self.main_into(basis, sigma, &mut cloud, &mut next);
        cloud
    }

    /// Union of the signed contours over all canonical classes; each point is
    /// tagged with its class.
    pub fn main_all(&self, basis: &NullBasis) -> ContourCloud {
        let mut cloud = self.empty(basis, None);
        let mut next = 0;
        for sigma in SignVector::all(basis.len()) {
            self.main_into(basis, &sigma, &mut cloud, &mut next);
        }
        cloud
    }

    /// Classes whose signed contour has at least one sample.
    pub fn nonempty_classes(&self, basis: &NullBasis) -> Vec<SignVector> {
        SignVector::all(basis.len())
            .into_iter()
            .filter(|s| !self.main(basis, s).is_empty())
            .collect()
    }

    /// Signed contour plus the fibers over non-simplicial faces.
    pub fn completed(&self, spec: &Spectrum, basis: &NullBasis, sigma: &SignVector) -> Result<ContourCloud> {
        let fibers = face_fibers(spec, basis)?;
        let mut cloud = self.main(basis, sigma);
        let mut next = cloud.points.iter().filter_map(|p| p.strand).max().map_or(0, |m| m + 1);
        self.fibers_into(&fibers, sigma, &mut cloud, &mut next);
        Ok(cloud)
    }

    pub fn completed_all(&self, spec: &Spectrum, basis: &NullBasis) -> Result<ContourCloud> {
        let fibers = face_fibers(spec, basis)?;
        let mut cloud = self.empty(basis, None);
        let mut next = 0;
        for sigma in SignVector::all(basis.len()) {
            self.main_into(basis, &sigma, &mut cloud, &mut next);
            self.fibers_into(&fibers, &sigma, &mut cloud, &mut next);
        }
        Ok(cloud)
    }

    fn empty(&self, basis: &NullBasis, sigma: Option<SignVector>) -> ContourCloud {
        ContourCloud {
            dim: basis.dim(),
            resolution: self.resolution,
            sigma,
            ..Default::default()
        }
    }
}

fn check_contour_preconditions(spec: &Spectrum, basis: &NullBasis, sigma: &SignVector) -> Result<()> {
    if spec.k() < 2 {
        return Err(Error::Precondition("contours need k >= 2".into()));
    }
    if basis.len() != spec.len() || sigma.len() != spec.len() {
        return Err(Error::Dimension(format!(
            "spectrum has {} columns, basis {} rows, sign vector {} entries",
            spec.len(),
            basis.len(),
            sigma.len()
        )));
    }
    Ok(())
}

/// Signed reduced contour `Gamma_sigma` sampled at `resolution`.
pub fn sample_contour(
    spec: &Spectrum,
    basis: &NullBasis,
    sigma: &SignVector,
    resolution: usize,
    seed: u64,
) -> Result<ContourCloud> {
    check_contour_preconditions(spec, basis, sigma)?;
    Ok(ContourSampler::new(resolution).seed(seed).main(basis, sigma))
}

/// Completed signed contour: `Gamma_sigma` plus the face fibers.
pub fn completed_contour(
    spec: &Spectrum,
    basis: &NullBasis,
    sigma: &SignVector,
    resolution: usize,
    seed: u64,
) -> Result<ContourCloud> {
    check_contour_preconditions(spec, basis, sigma)?;
    ContourSampler::new(resolution).seed(seed).completed(spec, basis, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::xi;
    use crate::fixtures;

    #[test]
    fn pentagon_has_five_nonempty_classes() {
        let basis = fixtures::pentagon().null_basis().unwrap();
        let classes = ContourSampler::new(10_000).nonempty_classes(&basis);
        assert_eq!(classes.len(), 5);
        let expected: BTreeSet<SignVector> = fixtures::PENTAGON_CLASS_ORDER
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(classes.into_iter().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn empty_class_gives_empty_cloud() {
        let spec = fixtures::pentagon();
        let basis = spec.null_basis().unwrap();
        let cloud = sample_contour(&spec, &basis, &"+++++".parse().unwrap(), 10_000, 0).unwrap();
        assert!(cloud.is_empty());
        let cloud = sample_contour(&spec, &basis, &"++--+".parse().unwrap(), 1000, 0).unwrap();
        assert!(!cloud.is_empty());
    }

    #[test]
    fn main_points_reproduce() {
        let basis = fixtures::pentagon().null_basis().unwrap();
        let cloud = ContourSampler::new(500).main_all(&basis);
        for p in &cloud.points {
            let q = xi(&basis, &p.lambda).unwrap();
            assert!(dist(&p.coords, &q) < 1e-12);
            assert_eq!(crate::contour::sign_class(&basis, &p.lambda).unwrap(), p.sigma);
        }
    }

    #[test]
    fn pentagon_completed_equals_main() {
        let spec = fixtures::pentagon();
        let basis = spec.null_basis().unwrap();
        let sampler = ContourSampler::new(400);
        for sigma in SignVector::all(5) {
            let main = sampler.main(&basis, &sigma);
            let done = sampler.completed(&spec, &basis, &sigma).unwrap();
            assert_eq!(main, done);
        }
    }

    #[test]
    fn parallelogram_fibers_are_two_lines() {
        let spec = fixtures::parallelogram();
        let basis = spec.null_basis().unwrap();
        let fibers = face_fibers(&spec, &basis).unwrap();
        assert_eq!(fibers.len(), 2);
        assert!(fibers.iter().all(|f| f.param_dim() == 1 && f.free.len() == 1));
        let cloud = ContourSampler::new(400).completed_all(&spec, &basis).unwrap();
        let lines = cloud.filter_source(|s| s != Source::Main);
        let strands: BTreeSet<(Source, usize)> =
            lines.points.iter().map(|p| (p.source, p.strand.unwrap())).collect();
        // One strand per (face, class) pair that matches; geometrically two lines.
        let sources: BTreeSet<Source> = strands.iter().map(|(s, _)| *s).collect();
        assert_eq!(sources.len(), 2);
    }

    #[test]
    fn circles_class_readings() {
        let spec = fixtures::parallelogram();
        let basis = spec.null_basis().unwrap();
        let sigma: SignVector = "1,1,-1,1,1".parse().unwrap();
        let linear = ContourSampler::new(2000).completed(&spec, &basis, &sigma).unwrap();
        assert!(linear.filter_source(|s| s == Source::Main).is_empty());
        assert_eq!(linear.sources().len(), 1);
        let literal = ContourSampler::new(2000)
            .reading(SignReading::LogMagnitude)
            .completed(&spec, &basis, &sigma)
            .unwrap();
        let face_sources: BTreeSet<Source> =
            literal.sources().into_iter().filter(|s| *s != Source::Main).collect();
        assert_eq!(face_sources.len(), 2);
    }

    #[test]
    fn csv_header() {
        let basis = fixtures::pentagon().null_basis().unwrap();
        let cloud = ContourSampler::new(64).main(&basis, &"++--+".parse().unwrap());
        let csv = cloud.to_csv();
        assert!(csv.starts_with("u,v,sigma,source\n"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",++--+,main"));
    }
}
