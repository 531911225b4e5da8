//! Shared bodies and independent oracles for the integration tests.
#![allow(dead_code)]

use aip_core::{ConvexPolygon, Point};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::f64::consts::TAU;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn unit_square() -> ConvexPolygon {
    ConvexPolygon::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap()
}

pub fn triangle() -> ConvexPolygon {
    ConvexPolygon::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).unwrap()
}

pub fn q0_raw() -> ConvexPolygon {
    ConvexPolygon::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.3, 0.8), (0.2, 1.1)]).unwrap()
}

/// The generic quadrilateral scaled about the origin to unit area.
pub fn q0() -> ConvexPolygon {
    q0_raw().normalize_to_unit_area().0
}

pub fn q0_anchor() -> Point {
    Point::new(0.55, 0.45)
}

/// Shoelace area of a counter-clockwise vertex list.
pub fn shoelace(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].x * v[(i + 1) % n].y - v[(i + 1) % n].x * v[i].y).sum::<f64>() / 2.0
}

/// Point-in-convex-polygon by edge cross products (counter-clockwise input).
pub fn inside(v: &[Point], p: &Point) -> bool {
    let n = v.len();
    (0..n).all(|i| {
        let (a, b) = (v[i], v[(i + 1) % n]);
        (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0
    })
}

/// Jarvis march; returns the counter-clockwise hull, strict corners only.
pub fn gift_wrap(pts: &[Point]) -> Vec<Point> {
    let start = (0..pts.len())
        .min_by(|&i, &j| pts[i].x.total_cmp(&pts[j].x).then(pts[i].y.total_cmp(&pts[j].y)))
        .unwrap();
    let mut hull = vec![pts[start]];
    let mut cur = start;
    loop {
        let mut next = (cur + 1) % pts.len();
        for j in 0..pts.len() {
            let (a, b, c) = (pts[cur], pts[next], pts[j]);
            let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
            let farther = (c - a).norm() > (b - a).norm();
            if cross < 0.0 || (cross == 0.0 && farther) {
                next = j;
            }
        }
        if next == start {
            break;
        }
        hull.push(pts[next]);
        cur = next;
    }
    hull
}

/// Convex polygon from `n` jittered points on a random ellipse.
pub fn random_polygon<R: Rng>(rng: &mut R, n: usize, center: Point) -> ConvexPolygon {
    let (a, b) = (rng.random_range(0.4..1.5), rng.random_range(0.4..1.5));
    let tilt: f64 = rng.random_range(0.0..TAU);
    let (s, c) = tilt.sin_cos();
    let pts: Vec<Point> = (0..n)
        .map(|_| {
            let t: f64 = rng.random_range(0.0..TAU);
            let r: f64 = rng.random_range(0.8..1.0);
            let (x, y) = (a * r * t.cos(), b * r * t.sin());
            center + Point::new(c * x - s * y, s * x + c * y)
        })
        .collect();
    ConvexPolygon::from_points(&pts).unwrap()
}

/// Monte Carlo estimate of `area(P ∩ Q)` from `n` uniform draws on the
/// bounding box of `P`.
pub struct RejectionArea {
    pub estimate: f64,
    pub box_area: f64,
    pub n: usize,
}

impl RejectionArea {
    /// Binomial standard error of the estimate when the true area is `area`.
    pub fn std_error_at(&self, area: f64) -> f64 {
        let f = (area / self.box_area).clamp(0.0, 1.0);
        self.box_area * (f * (1.0 - f) / self.n as f64).sqrt()
    }

    /// `|estimate − area|` in standard errors under the hypothesis `area`.
    pub fn z_score(&self, area: f64) -> f64 {
        let d = (self.estimate - area).abs();
        match self.std_error_at(area) {
            se if se > 0.0 => d / se,
            _ if d == 0.0 => 0.0,
            _ => f64::INFINITY,
        }
    }
}

pub fn rejection_intersection<R: Rng>(p: &ConvexPolygon, q: &ConvexPolygon, n: usize, rng: &mut R) -> RejectionArea {
    let v = p.vertices();
    let (x0, x1) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (y0, y1) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));
    let box_area = (x1 - x0) * (y1 - y0);
    let mut hits = 0usize;
    for _ in 0..n {
        let s = Point::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        if inside(v, &s) && inside(q.vertices(), &s) {
            hits += 1;
        }
    }
    RejectionArea { estimate: box_area * hits as f64 / n as f64, box_area, n }
}

/// Rejection-sampled centroid with per-coordinate standard errors.
pub fn rejection_centroid<R: Rng>(p: &ConvexPolygon, n: usize, rng: &mut R) -> (Point, Point) {
    let v = p.vertices();
    let (x0, x1) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (y0, y1) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));
    let mut acc = Vec::new();
    while acc.len() < n {
        let s = Point::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        if inside(v, &s) {
            acc.push(s);
        }
    }
    let m = acc.iter().sum::<Point>() / n as f64;
    let var = acc.iter().map(|s| (s - m).component_mul(&(s - m))).sum::<Point>() / (n - 1) as f64;
    (m, var.map(|x| (x / n as f64).sqrt()))
}

/// Hausdorff distance between boundaries sampled at `per_edge` points per
/// edge, measured against the exact polygons by point-to-segment distance.
pub fn sampled_hausdorff(p: &ConvexPolygon, q: &ConvexPolygon, per_edge: usize) -> f64 {
    fn seg_dist(p: &Point, a: &Point, b: &Point) -> f64 {
        let d = b - a;
        let t = ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
        (p - (a + d * t)).norm()
    }
    fn dist_to_body(x: &Point, body: &ConvexPolygon) -> f64 {
        if inside(body.vertices(), x) {
            return 0.0;
        }
        body.edges().map(|(a, b)| seg_dist(x, &a, &b)).fold(f64::INFINITY, f64::min)
    }
    let one_way = |a: &ConvexPolygon, b: &ConvexPolygon| {
        a.edges()
            .flat_map(|(s, e)| (0..per_edge).map(move |i| s + (e - s) * (i as f64 / per_edge as f64)))
            .map(|x| dist_to_body(&x, b))
            .fold(0.0, f64::max)
    };
    one_way(p, q).max(one_way(q, p))
}
