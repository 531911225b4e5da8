//! Planar convex bodies represented as counterclockwise vertex lists.
//!
//! Every [`ConvexPolygon`] is kept in canonical form: strictly convex,
//! counterclockwise, and rotated so that the lexicographically smallest
//! vertex comes first. Equality of bodies is then a per-coordinate check
//! (see [`ConvexPolygon::approx_eq`]).

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{AipError, Result};

pub type Point = Vector2<f64>;

/// On-edge classification tolerance used by the clipper.
pub const CLIP_EPS: f64 = 1e-12;
/// Intersection areas below this are reported as zero.
pub const AREA_FLOOR: f64 = 1e-14;
/// Per-coordinate tolerance for polygon equality.
pub const EQ_TOL: f64 = 1e-9;

#[inline]
fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

#[inline]
fn lex_less(a: &Point, b: &Point) -> bool {
    a.x < b.x || (a.x == b.x && a.y < b.y)
}

/// General invertible affine map `a ↦ linear·a + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: Matrix2<f64>,
    pub translation: Vector2<f64>,
}

impl AffineMap {
    pub fn new(linear: Matrix2<f64>, translation: Vector2<f64>) -> Self {
        Self { linear, translation }
    }

    pub fn identity() -> Self {
        Self::new(Matrix2::identity(), Vector2::zeros())
    }

    pub fn translation(t: Vector2<f64>) -> Self {
        Self::new(Matrix2::identity(), t)
    }

    #[inline]
    pub fn apply(&self, p: &Point) -> Point {
        self.linear * p + self.translation
    }

    pub fn det(&self) -> f64 {
        self.linear.determinant()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap::new(
            self.linear * other.linear,
            self.linear * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let det = self.det();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(AipError::SingularMap { det });
        }
        let inv = self
            .linear
            .try_inverse()
            .ok_or(AipError::SingularMap { det })?;
        Ok(AffineMap::new(inv, -(inv * self.translation)))
    }
}

/// Hausdorff distance between two bodies, in length units.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct HausdorffDistance(pub f64);

impl HausdorffDistance {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// A nondegenerate convex polygon in canonical counterclockwise form.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct PolygonJson {
    vertices: Vec<[f64; 2]>,
}

impl ConvexPolygon {
    /// Convex hull of `raw` in canonical form. Collinear points are dropped.
    pub fn from_points(raw: &[Point]) -> Result<Self> {
        if raw.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(AipError::DegenerateBody("non-finite coordinate".into()));
        }
        if raw.len() < 3 {
            return Err(AipError::DegenerateBody(format!(
                "need at least 3 points, got {}",
                raw.len()
            )));
        }
        let mut pts: Vec<Point> = raw.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();

        let scale = pts
            .iter()
            .fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()))
            .max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale * scale;

        // Andrew's monotone chain, strict turns only.
        let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
        for p in pts.iter() {
            while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= tol {
                hull.pop();
            }
            hull.push(*p);
        }
        let lower_len = hull.len() + 1;
        for p in pts.iter().rev().skip(1) {
            while hull.len() >= lower_len
                && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= tol
            {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();

        if hull.len() < 3 {
            return Err(AipError::DegenerateBody("hull has zero area".into()));
        }
        let poly = ConvexPolygon { vertices: hull };
        if poly.area() <= 0.0 {
            return Err(AipError::DegenerateBody("hull has zero area".into()));
        }
        Ok(poly)
    }

    /// Builds from a vertex sequence already known to be convex. Fixes the
    /// orientation and rotates to canonical start, nothing else.
    fn from_convex_sequence(mut vertices: Vec<Point>) -> Self {
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let start = vertices
            .iter()
            .enumerate()
            .fold(0, |best, (i, p)| if lex_less(p, &vertices[best]) { i } else { best });
        vertices.rotate_left(start);
        ConvexPolygon { vertices }
    }

    pub fn from_xy(raw: &[(f64, f64)]) -> Result<Self> {
        let pts: Vec<Point> = raw.iter().map(|&(x, y)| Point::new(x, y)).collect();
        Self::from_points(&pts)
    }

    /// Regular `n`-gon inscribed in the circle of the given radius and center.
    pub fn regular(n: usize, radius: f64, center: Point) -> Result<Self> {
        let pts: Vec<Point> = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                center + radius * Point::new(a.cos(), a.sin())
            })
            .collect();
        Self::from_points(&pts)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area.
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Area-weighted barycenter.
    pub fn centroid(&self) -> Point {
        let v = &self.vertices;
        let o = v[0];
        let mut a2 = 0.0;
        let mut c = Point::zeros();
        for i in 1..v.len() - 1 {
            let (p, q) = (v[i] - o, v[i + 1] - o);
            let w = p.x * q.y - p.y * q.x;
            a2 += w;
            c += w * (p + q);
        }
        o + c / (3.0 * a2)
    }

    /// Second central moment matrix `(1/|P|) ∫ (p−g)(p−g)ᵀ dp`.
    pub fn covariance(&self) -> Matrix2<f64> {
        let g = self.centroid();
        let v = &self.vertices;
        let mut m = Matrix2::zeros();
        let mut area = 0.0;
        for i in 0..v.len() {
            let (p, q) = (v[i] - g, v[(i + 1) % v.len()] - g);
            let w = p.x * q.y - p.y * q.x;
            area += w / 2.0;
            // triangle (0, p, q): ∫ x xᵀ = w/24 (2ppᵀ + 2qqᵀ + pqᵀ + qpᵀ)
            m += (w / 24.0) * (2.0 * p * p.transpose() + 2.0 * q * q.transpose() + p * q.transpose() + q * p.transpose());
        }
        m / area
    }

    /// Largest distance from `center` to a vertex.
    pub fn circumradius_about(&self, center: &Point) -> f64 {
        self.vertices.iter().map(|p| (p - center).norm()).fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max((v[i] - v[j]).norm());
            }
        }
        d
    }

    /// Image under an invertible affine map, re-canonicalized.
    pub fn apply_affine(&self, map: &AffineMap) -> Result<Self> {
        let det = map.det();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(AipError::SingularMap { det });
        }
        Ok(self.map_unchecked(map))
    }

    pub(crate) fn map_unchecked(&self, map: &AffineMap) -> Self {
        Self::from_convex_sequence(self.vertices.iter().map(|p| map.apply(p)).collect())
    }

    pub fn translate(&self, t: Vector2<f64>) -> Self {
        self.map_unchecked(&AffineMap::translation(t))
    }

    /// Homothety about the origin.
    pub fn scale(&self, c: f64) -> Result<Self> {
        self.apply_affine(&AffineMap::new(Matrix2::identity() * c, Vector2::zeros()))
    }

    /// Returns `(P / s, s)` with `s = area(P)^{1/2}`, scaling about the origin.
    pub fn normalize_to_unit_area(&self) -> (Self, f64) {
        let s = self.area().sqrt();
        let vertices = self.vertices.iter().map(|p| p / s).collect();
        (ConvexPolygon { vertices }, s)
    }

    /// `true` when `p` is inside or on the boundary (tolerance `CLIP_EPS`).
    pub fn contains(&self, p: &Point) -> bool {
        self.edges().all(|(a, b)| cross(&a, &b, p) >= -CLIP_EPS)
    }

    /// Euclidean distance from `p` to the body (0 inside).
    pub fn distance_to(&self, p: &Point) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        self.edges()
            .map(|(a, b)| segment_distance(p, &a, &b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Per-coordinate equality up to `tol`, insensitive to the starting vertex.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let n = self.vertices.len();
        if n != other.vertices.len() {
            return false;
        }
        (0..n).any(|shift| {
            (0..n).all(|i| {
                let (p, q) = (self.vertices[i], other.vertices[(i + shift) % n]);
                (p.x - q.x).abs() <= tol && (p.y - q.y).abs() <= tol
            })
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: PolygonJson = serde_json::from_str(s).map_err(|e| AipError::Parse(e.to_string()))?;
        let pts: Vec<Point> = raw.vertices.iter().map(|v| Point::new(v[0], v[1])).collect();
        if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(AipError::Parse("non-finite coordinate".into()));
        }
        Self::from_points(&pts)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(PolygonJson {
            vertices: self.vertices.iter().map(|p| [p.x, p.y]).collect(),
        })
        .expect("polygon json")
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let (p, q) = (v[i], v[(i + 1) % n]);
        s += p.x * q.y - p.y * q.x;
    }
    s / 2.0
}

fn segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + t * ab)).norm()
}

/// Clips `subject` to the closed left half-plane of the directed line `a → b`.
fn clip_half_plane(subject: &[Point], a: &Point, b: &Point, out: &mut Vec<Point>) {
    out.clear();
    let n = subject.len();
    if n == 0 {
        return;
    }
    let d = b - a;
    let side = |p: &Point| d.x * (p.y - a.y) - d.y * (p.x - a.x);
    let mut prev = subject[n - 1];
    let mut sp = side(&prev);
    for &cur in subject {
        let sc = side(&cur);
        let cur_in = sc >= -CLIP_EPS;
        let prev_in = sp >= -CLIP_EPS;
        if cur_in {
            if !prev_in && sc > CLIP_EPS {
                out.push(prev + (cur - prev) * (sp / (sp - sc)));
            }
            out.push(cur);
        } else if prev_in && sp > CLIP_EPS {
            out.push(prev + (cur - prev) * (sp / (sp - sc)));
        }
        prev = cur;
        sp = sc;
    }
}

/// Area of `P ∩ Q` by successive half-plane clipping of `P` by the edges of `Q`.
pub fn intersection_area(p: &ConvexPolygon, q: &ConvexPolygon) -> f64 {
    let mut cur: Vec<Point> = Vec::with_capacity(p.len() + q.len());
    let mut next: Vec<Point> = Vec::with_capacity(p.len() + q.len());
    intersection_area_with(p.vertices(), q.vertices(), &mut cur, &mut next)
}

/// Allocation-free variant for hot loops; `cur`/`next` are scratch buffers.
pub(crate) fn intersection_area_with(
    p: &[Point],
    q: &[Point],
    cur: &mut Vec<Point>,
    next: &mut Vec<Point>,
) -> f64 {
    cur.clear();
    cur.extend_from_slice(p);
    let m = q.len();
    for i in 0..m {
        clip_half_plane(cur, &q[i], &q[(i + 1) % m], next);
        std::mem::swap(cur, next);
        if cur.len() < 3 {
            return 0.0;
        }
    }
    let a = signed_area(cur);
    if a < AREA_FLOOR {
        0.0
    } else {
        a
    }
}

/// Hausdorff distance of convex polygons: the largest vertex-to-body distance
/// in either direction.
pub fn hausdorff_distance(p: &ConvexPolygon, q: &ConvexPolygon) -> HausdorffDistance {
    let d1 = p.vertices().iter().map(|v| q.distance_to(v)).fold(0.0, f64::max);
    let d2 = q.vertices().iter().map(|v| p.distance_to(v)).fold(0.0, f64::max);
    HausdorffDistance(d1.max(d2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    fn triangle() -> ConvexPolygon {
        ConvexPolygon::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).unwrap()
    }

    #[test]
    fn canonicalize_square() {
        let sq = unit_square();
        assert_eq!(sq.len(), 4);
        assert_eq!(sq.vertices()[0], Point::new(0.0, 0.0));
        assert_abs_diff_eq!(sq.area(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn canonicalize_drops_collinear() {
        let t = ConvexPolygon::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.5, 0.0), (0.0, 1.0)]).unwrap();
        assert!(t.approx_eq(&triangle(), 0.0));
    }

    #[test]
    fn canonicalize_rejects_degenerate() {
        let err = ConvexPolygon::from_xy(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap_err();
        assert!(matches!(err, AipError::DegenerateBody(_)));
        assert!(ConvexPolygon::from_xy(&[(0.0, 0.0), (1.0, 1.0)]).is_err());
        assert!(ConvexPolygon::from_xy(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]).is_err());
    }

    #[test]
    fn ccw_and_strict() {
        let p = ConvexPolygon::from_xy(&[(0.0, 1.0), (1.0, 1.0), (1.0, 0.0), (0.0, 0.0), (0.5, 0.5)]).unwrap();
        let v = p.vertices();
        for i in 0..v.len() {
            assert!(cross(&v[i], &v[(i + 1) % v.len()], &v[(i + 2) % v.len()]) > 0.0);
        }
    }

    #[test]
    fn areas_and_centroids() {
        assert_abs_diff_eq!(triangle().area(), 0.5, epsilon = 1e-15);
        let c = unit_square().centroid();
        assert_abs_diff_eq!(c.x, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.y, 0.5, epsilon = 1e-15);
        let c = triangle().centroid();
        assert_abs_diff_eq!(c.x, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.y, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn square_covariance() {
        let c = unit_square().covariance();
        assert_abs_diff_eq!(c[(0, 0)], 1.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[(1, 1)], 1.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[(0, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn identity_and_reflection() {
        let sq = unit_square();
        assert!(sq.apply_affine(&AffineMap::identity()).unwrap().approx_eq(&sq, 0.0));
        let refl = AffineMap::new(Matrix2::new(-1.0, 0.0, 0.0, 1.0), Vector2::zeros());
        let img = sq.apply_affine(&refl).unwrap();
        let expect = ConvexPolygon::from_xy(&[(-1.0, 0.0), (0.0, 0.0), (0.0, 1.0), (-1.0, 1.0)]).unwrap();
        assert!(img.approx_eq(&expect, EQ_TOL));
        assert!(img.area() > 0.0);
    }

    #[test]
    fn singular_map_rejected() {
        let m = AffineMap::new(Matrix2::new(1.0, 2.0, 2.0, 4.0), Vector2::zeros());
        assert!(matches!(unit_square().apply_affine(&m), Err(AipError::SingularMap { .. })));
    }

    #[test]
    fn trivial_intersections() {
        let sq = unit_square();
        let shifted = sq.translate(Vector2::new(0.5, 0.0));
        assert_abs_diff_eq!(intersection_area(&sq, &shifted), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(intersection_area(&sq, &sq), 1.0, epsilon = 1e-12);
        let far = sq.translate(Vector2::new(3.0, 0.0));
        assert_eq!(intersection_area(&sq, &far), 0.0);
        // edge contact is degenerate
        let touching = sq.translate(Vector2::new(1.0, 0.0));
        assert_eq!(intersection_area(&sq, &touching), 0.0);
    }

    #[test]
    fn hausdorff_trivial() {
        let sq = unit_square();
        assert_eq!(hausdorff_distance(&sq, &sq).value(), 0.0);
        let t = 0.37;
        let d = hausdorff_distance(&sq, &sq.translate(Vector2::new(t, 0.0))).value();
        assert_abs_diff_eq!(d, t, epsilon = 1e-12);
    }

    #[test]
    fn normalization() {
        let (n, s) = unit_square().normalize_to_unit_area();
        assert_eq!(s, 1.0);
        assert!(n.approx_eq(&unit_square(), 0.0));
        let big = ConvexPolygon::from_xy(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]).unwrap();
        let (n, s) = big.normalize_to_unit_area();
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n.area(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn json_reader_canonicalizes() {
        let p = ConvexPolygon::from_json_str(r#"{"vertices": [[1,1],[0,1],[0,0],[1,0]]}"#).unwrap();
        assert!(p.approx_eq(&unit_square(), 0.0));
        assert!(ConvexPolygon::from_json_str(r#"{"vertices": [[0,0]]}"#).is_err());
        assert!(matches!(ConvexPolygon::from_json_str("not json"), Err(AipError::Parse(_))));
    }
}
