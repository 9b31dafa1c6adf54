//! Directions, finite sampled domains with projection-level grouping, and the
//! 2-D linear change of variables between a projection box and point space.

use serde::Serialize;
use thiserror::Error;

/// Relative factor for the automatic level-grouping tolerance.
const AUTO_TOL_FACTOR: f64 = 1e-9;

/// Relative threshold below which two 2-D directions count as parallel.
const SINGULAR_DET_FACTOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("directions must be nonzero vectors")]
    ZeroDirection,
    #[error("coordinates must be finite")]
    NotFinite,
    #[error("direction dimension mismatch: a has {a}, b has {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("point {index} has {found} coordinates, expected {expected}")]
    PointDimension {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("points {first} and {second} are identical")]
    DuplicatePoint { first: usize, second: usize },
    #[error("domain must contain at least one point")]
    EmptyDomain,
    #[error("directions are parallel or nearly parallel; the change of variables is undefined")]
    SingularDirections,
    #[error("box bounds must satisfy c1 < d1 and c2 < d2")]
    InvalidBox,
    #[error("box sampling needs a grid of at least 2 per axis, got {0}")]
    GridTooSmall(usize),
    #[error("operation requires dimension 2, domain has dimension {0}")]
    NotPlanar(usize),
}

/// The two fixed weight directions.
///
/// Both vectors must be nonzero; they may be parallel or even equal (a single
/// fixed weight), in which case only the operations needing independence
/// reject them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionPair {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl DirectionPair {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self, GeometryError> {
        if a.len() != b.len() {
            return Err(GeometryError::DimensionMismatch {
                a: a.len(),
                b: b.len(),
            });
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(GeometryError::NotFinite);
        }
        if a.is_empty() || !a.iter().any(|v| *v != 0.0) || !b.iter().any(|v| *v != 0.0) {
            return Err(GeometryError::ZeroDirection);
        }
        Ok(Self { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn project_a(&self, x: &[f64]) -> f64 {
        dot(&self.a, x)
    }

    pub fn project_b(&self, x: &[f64]) -> f64 {
        dot(&self.b, x)
    }

    /// Determinant `a1*b2 - a2*b1` of the 2-D transform.
    pub fn det2(&self) -> f64 {
        debug_assert_eq!(self.dim(), 2);
        self.a[0] * self.b[1] - self.a[1] * self.b[0]
    }

    /// Whether the 2-D change of variables is well defined.
    pub fn independent2(&self) -> bool {
        if self.dim() != 2 {
            return false;
        }
        let scale = norm(&self.a).max(norm(&self.b));
        self.det2().abs() > SINGULAR_DET_FACTOR * scale * scale
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Groups projection values into levels by single-linkage: after sorting, a
/// new level starts whenever the gap to the previous value exceeds `tol`.
/// Level ids are assigned in ascending value order, so the output depends only
/// on the multiset of values, not on their input order.
pub fn quantize_levels(projections: &[f64], tol: f64) -> Vec<usize> {
    assert!(tol >= 0.0, "level tolerance must be nonnegative");
    if projections.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..projections.len()).collect();
    order.sort_by(|&i, &j| projections[i].total_cmp(&projections[j]));
    let mut levels = vec![0usize; projections.len()];
    let mut level = 0usize;
    let mut prev = projections[order[0]];
    for &idx in &order {
        let v = projections[idx];
        if v - prev > tol {
            level += 1;
        }
        levels[idx] = level;
        prev = v;
    }
    levels
}

fn auto_tol(projections: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in projections {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi > lo {
        AUTO_TOL_FACTOR * (hi - lo)
    } else {
        0.0
    }
}

/// A finite point set standing in for a compact domain, with its points
/// grouped into a-levels and b-levels (equal projections up to tolerance).
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct SampledDomain {
    points: Vec<Vec<f64>>,
    dirs: DirectionPair,
    a_tol: f64,
    b_tol: f64,
    a_level: Vec<usize>,
    b_level: Vec<usize>,
    a_level_count: usize,
    b_level_count: usize,
    a_level_values: Vec<f64>,
    b_level_values: Vec<f64>,
}

impl SampledDomain {
    /// Builds a domain with the default relative tolerance
    /// (1e-9 times the projection span, per direction).
    pub fn new(points: Vec<Vec<f64>>, dirs: DirectionPair) -> Result<Self, GeometryError> {
        Self::build(points, dirs, None)
    }

    /// Builds a domain with an explicit absolute grouping tolerance applied
    /// to both directions.
    pub fn with_tol(
        points: Vec<Vec<f64>>,
        dirs: DirectionPair,
        tol: f64,
    ) -> Result<Self, GeometryError> {
        assert!(tol >= 0.0, "level tolerance must be nonnegative");
        Self::build(points, dirs, Some(tol))
    }

    fn build(
        points: Vec<Vec<f64>>,
        dirs: DirectionPair,
        tol: Option<f64>,
    ) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptyDomain);
        }
        let d = dirs.dim();
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(GeometryError::PointDimension {
                    index: i,
                    found: p.len(),
                    expected: d,
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(GeometryError::NotFinite);
            }
        }
        // Duplicate points would make the "consecutive points differ" path
        // condition undecidable by index, so they are rejected outright.
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| {
            points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                return Err(GeometryError::DuplicatePoint {
                    first: w[0].min(w[1]),
                    second: w[0].max(w[1]),
                });
            }
        }

        let a_proj: Vec<f64> = points.iter().map(|p| dirs.project_a(p)).collect();
        let b_proj: Vec<f64> = points.iter().map(|p| dirs.project_b(p)).collect();
        let a_tol = tol.unwrap_or_else(|| auto_tol(&a_proj));
        let b_tol = tol.unwrap_or_else(|| auto_tol(&b_proj));
        let a_level = quantize_levels(&a_proj, a_tol);
        let b_level = quantize_levels(&b_proj, b_tol);
        let a_level_count = a_level.iter().max().map_or(0, |m| m + 1);
        let b_level_count = b_level.iter().max().map_or(0, |m| m + 1);
        let a_level_values = level_means(&a_level, &a_proj, a_level_count);
        let b_level_values = level_means(&b_level, &b_proj, b_level_count);

        Ok(Self {
            points,
            dirs,
            a_tol,
            b_tol,
            a_level,
            b_level,
            a_level_count,
            b_level_count,
            a_level_values,
            b_level_values,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dirs.dim()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dirs(&self) -> &DirectionPair {
        &self.dirs
    }

    pub fn a_tol(&self) -> f64 {
        self.a_tol
    }

    pub fn b_tol(&self) -> f64 {
        self.b_tol
    }

    pub fn a_level(&self, i: usize) -> usize {
        self.a_level[i]
    }

    pub fn b_level(&self, i: usize) -> usize {
        self.b_level[i]
    }

    pub fn a_levels(&self) -> &[usize] {
        &self.a_level
    }

    pub fn b_levels(&self) -> &[usize] {
        &self.b_level
    }

    pub fn a_level_count(&self) -> usize {
        self.a_level_count
    }

    pub fn b_level_count(&self) -> usize {
        self.b_level_count
    }

    /// Mean a-projection of the points in each a-level.
    pub fn a_level_values(&self) -> &[f64] {
        &self.a_level_values
    }

    pub fn b_level_values(&self) -> &[f64] {
        &self.b_level_values
    }

    pub fn a_projection(&self, i: usize) -> f64 {
        self.dirs.project_a(&self.points[i])
    }

    pub fn b_projection(&self, i: usize) -> f64 {
        self.dirs.project_b(&self.points[i])
    }

    /// Point indices grouped by a-level, each group ascending.
    pub fn a_level_members(&self) -> Vec<Vec<usize>> {
        group_members(&self.a_level, self.a_level_count)
    }

    pub fn b_level_members(&self) -> Vec<Vec<usize>> {
        group_members(&self.b_level, self.b_level_count)
    }

    /// Evaluates an expression-like function at every point.
    pub fn tabulate<F, E>(&self, mut f: F) -> Result<Vec<f64>, E>
    where
        F: FnMut(&[f64]) -> Result<f64, E>,
    {
        self.points.iter().map(|p| f(p)).collect()
    }
}

fn level_means(levels: &[usize], values: &[f64], count: usize) -> Vec<f64> {
    let mut sums = vec![0.0; count];
    let mut counts = vec![0usize; count];
    for (&level, &v) in levels.iter().zip(values) {
        sums[level] += v;
        counts[level] += 1;
    }
    sums.iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect()
}

fn group_members(levels: &[usize], count: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); count];
    for (i, &level) in levels.iter().enumerate() {
        groups[level].push(i);
    }
    groups
}

/// Projection bounds defining the box `K = [c1,d1] x [c2,d2]` in the
/// transformed plane, together with the (independent) directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDomainSpec {
    pub c1: f64,
    pub d1: f64,
    pub c2: f64,
    pub d2: f64,
    dirs: DirectionPair,
}

impl BoxDomainSpec {
    pub fn new(
        c1: f64,
        d1: f64,
        c2: f64,
        d2: f64,
        dirs: DirectionPair,
    ) -> Result<Self, GeometryError> {
        if dirs.dim() != 2 {
            return Err(GeometryError::NotPlanar(dirs.dim()));
        }
        if !(c1 < d1 && c2 < d2)
            || !(c1.is_finite() && d1.is_finite() && c2.is_finite() && d2.is_finite())
        {
            return Err(GeometryError::InvalidBox);
        }
        if !dirs.independent2() {
            return Err(GeometryError::SingularDirections);
        }
        Ok(Self {
            c1,
            d1,
            c2,
            d2,
            dirs,
        })
    }

    pub fn dirs(&self) -> &DirectionPair {
        &self.dirs
    }
}

/// `(a.x, b.x)`: maps a point to its projection coordinates.
pub fn forward_transform(x: &[f64], dirs: &DirectionPair) -> (f64, f64) {
    (dirs.project_a(x), dirs.project_b(x))
}

/// Inverts the 2-D projection map: the unique `x` with `a.x = y1, b.x = y2`.
pub fn inverse_transform(y: (f64, f64), dirs: &DirectionPair) -> Result<(f64, f64), GeometryError> {
    if dirs.dim() != 2 {
        return Err(GeometryError::NotPlanar(dirs.dim()));
    }
    if !dirs.independent2() {
        return Err(GeometryError::SingularDirections);
    }
    let det = dirs.det2();
    let (a, b) = (dirs.a(), dirs.b());
    let x1 = (y.0 * b[1] - y.1 * a[1]) / det;
    let x2 = (y.1 * a[0] - y.0 * b[0]) / det;
    Ok((x1, x2))
}

/// Endpoint-exact uniform grid of `m` values over `[lo, hi]`.
fn linspace(lo: f64, hi: f64, m: usize, i: usize) -> f64 {
    if i == 0 {
        lo
    } else if i == m - 1 {
        hi
    } else {
        lo + (hi - lo) * (i as f64) / ((m - 1) as f64)
    }
}

/// Samples the box spec on an `m x m` grid of the projection rectangle `K`,
/// mapped back to point space. The four corners of `K` are always included.
/// Point index `i*m + j` sits at grid row `i` (the `y1` axis) and column `j`,
/// and its a-level and b-level ids equal `i` and `j`.
pub fn sample_box(spec: &BoxDomainSpec, m: usize) -> Result<SampledDomain, GeometryError> {
    if m < 2 {
        return Err(GeometryError::GridTooSmall(m));
    }
    let mut points = Vec::with_capacity(m * m);
    for i in 0..m {
        let y1 = linspace(spec.c1, spec.d1, m, i);
        for j in 0..m {
            let y2 = linspace(spec.c2, spec.d2, m, j);
            let (x1, x2) = inverse_transform((y1, y2), &spec.dirs)?;
            points.push(vec![x1, x2]);
        }
    }
    SampledDomain::new(points, spec.dirs.clone())
}
