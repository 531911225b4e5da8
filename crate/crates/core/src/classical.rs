//! Classical affine invariant points: the centroid and the center of the
//! maximum-area inscribed (John) ellipse.

use nalgebra::{Matrix2, SMatrix, SVector};

use crate::error::{AipError, Result};
use crate::geometry::{ConvexPolygon, Point};

/// A named rule assigning a point to every body.
#[derive(Clone, Copy)]
pub struct AffineInvariantPointRule {
    pub name: &'static str,
    pub evaluate: fn(&ConvexPolygon) -> Result<Point>,
}

impl std::fmt::Debug for AffineInvariantPointRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AffineInvariantPointRule").field("name", &self.name).finish()
    }
}

impl AffineInvariantPointRule {
    pub fn apply(&self, p: &ConvexPolygon) -> Result<Point> {
        (self.evaluate)(p)
    }
}

pub fn centroid_rule() -> AffineInvariantPointRule {
    AffineInvariantPointRule {
        name: "centroid",
        evaluate: |p| Ok(p.centroid()),
    }
}

pub fn john_rule() -> AffineInvariantPointRule {
    AffineInvariantPointRule {
        name: "john",
        evaluate: john_center,
    }
}

/// Inscribed ellipse `{c + A u : |u| ≤ 1}` with symmetric positive definite `A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub center: Point,
    pub shape: Matrix2<f64>,
}

impl Ellipse {
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.shape.determinant()
    }

    /// Largest violation `n·c + |A n| − b` over the edges of `p` (≤ 0 inside).
    pub fn max_violation(&self, p: &ConvexPolygon) -> f64 {
        halfplanes(p)
            .iter()
            .map(|(n, b)| n.dot(&self.center) + (self.shape * n).norm() - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Outward unit normals and offsets `n·x ≤ b` of the edges.
fn halfplanes(p: &ConvexPolygon) -> Vec<(Point, f64)> {
    p.edges()
        .map(|(a, b)| {
            let d = b - a;
            let n = Point::new(d.y, -d.x).normalize();
            (n, n.dot(&a))
        })
        .collect()
}

/// Iteration cap shared by all Newton steps of the solver.
pub const JOHN_MAX_ITERATIONS: usize = 10_000;

type V5 = SVector<f64, 5>;
type M5 = SMatrix<f64, 5, 5>;

struct Barrier {
    planes: Vec<(Point, f64)>,
}

impl Barrier {
    fn shape(z: &V5) -> Matrix2<f64> {
        Matrix2::new(z[2], z[3], z[3], z[4])
    }

    fn feasible(&self, z: &V5) -> bool {
        let a = Self::shape(z);
        if z[2] <= 0.0 || a.determinant() <= 0.0 {
            return false;
        }
        let c = Point::new(z[0], z[1]);
        self.planes.iter().all(|(n, b)| b - n.dot(&c) - (a * n).norm() > 0.0)
    }

    /// `t·(−log det A) − Σ log sᵢ` with gradient and Hessian.
    fn eval(&self, z: &V5, t: f64) -> (f64, V5, M5) {
        let (p, q, r) = (z[2], z[3], z[4]);
        let det = p * r - q * q;
        let mut val = -t * det.ln();
        let gd = V5::new(0.0, 0.0, r, -2.0 * q, p);
        let mut hd = M5::zeros();
        hd[(2, 4)] = 1.0;
        hd[(4, 2)] = 1.0;
        hd[(3, 3)] = -2.0;
        let mut grad = -t * gd / det;
        let mut hess = -t * (hd / det - gd * gd.transpose() / (det * det));

        let a = Self::shape(z);
        let c = Point::new(z[0], z[1]);
        for (n, b) in &self.planes {
            let w = a * n;
            let wn = w.norm();
            let s = b - n.dot(&c) - wn;
            val -= s.ln();
            // ds/dz
            let jac = SMatrix::<f64, 2, 3>::new(n.x, n.y, 0.0, 0.0, n.x, n.y);
            let dw = jac.transpose() * w / wn;
            let gs = V5::new(-n.x, -n.y, -dw[0], -dw[1], -dw[2]);
            let proj = Matrix2::identity() / wn - w * w.transpose() / (wn * wn * wn);
            let h_aa = -(jac.transpose() * proj * jac);
            let mut hs = M5::zeros();
            hs.fixed_view_mut::<3, 3>(2, 2).copy_from(&h_aa);
            grad -= gs / s;
            hess += -hs / s + gs * gs.transpose() / (s * s);
        }
        (val, grad, hess)
    }
}

/// Maximum-area inscribed ellipse by a log-barrier interior point method.
pub fn john_ellipse(poly: &ConvexPolygon) -> Result<Ellipse> {
    let planes = halfplanes(poly);
    let m = planes.len() as f64;
    let c0 = poly.centroid();
    let inr = planes.iter().map(|(n, b)| b - n.dot(&c0)).fold(f64::INFINITY, f64::min);
    let mut z = V5::new(c0.x, c0.y, 0.5 * inr, 0.0, 0.5 * inr);
    let barrier = Barrier { planes };

    let mut t = 1.0;
    let mut iterations = 0;
    loop {
        // centering
        loop {
            iterations += 1;
            if iterations > JOHN_MAX_ITERATIONS {
                return Err(AipError::ConvergenceFailure { iterations });
            }
            let (val, g, h) = barrier.eval(&z, t);
            let step = match h.cholesky() {
                Some(ch) => -ch.solve(&g),
                None => match h.lu().solve(&(-g)) {
                    Some(s) => s,
                    None => -g,
                },
            };
            let decrement = -g.dot(&step);
            if decrement / 2.0 < 1e-14 * (1.0 + t) {
                break;
            }
            let mut alpha = 1.0;
            loop {
                let cand = z + alpha * step;
                if barrier.feasible(&cand) && barrier.eval(&cand, t).0 <= val - 0.25 * alpha * decrement {
                    z = cand;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-20 {
                    break;
                }
            }
            if alpha < 1e-20 {
                break;
            }
        }
        if m / t < 1e-12 {
            break;
        }
        t *= 8.0;
    }
    Ok(Ellipse {
        center: Point::new(z[0], z[1]),
        shape: Barrier::shape(&z),
    })
}

/// Center of the John ellipse.
pub fn john_center(poly: &ConvexPolygon) -> Result<Point> {
    john_ellipse(poly).map(|e| e.center)
}
