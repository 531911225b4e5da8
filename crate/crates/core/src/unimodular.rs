//! The group `SL±(2)` of 2×2 maps with determinant ±1 and its affine
//! extension `SAff(2)`.
//!
//! Singular values and the polar decomposition use the closed-form
//! rotation-angle formulas for 2×2 matrices.

use nalgebra::{Matrix2, Vector2};

use crate::error::{AipError, Result};
use crate::geometry::{AffineMap, Point};

/// Inputs whose `|det|` is within this of 1 are rescaled onto the group.
pub const DET_TOLERANCE: f64 = 1e-6;

pub fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Reflection `diag(1, −1)`.
pub fn flip() -> Matrix2<f64> {
    Matrix2::new(1.0, 0.0, 0.0, -1.0)
}

/// A linear map with `|det| = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnimodularMap(Matrix2<f64>);

/// Ordered singular values `λ₁ ≥ λ₂ > 0`; `λ₁λ₂ = 1` for unimodular input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularPair {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl UnimodularMap {
    /// Accepts `m` when `||det| − 1| ≤ DET_TOLERANCE`, then divides by `|det|^{1/2}`.
    pub fn new(m: Matrix2<f64>) -> Result<Self> {
        let det = m.determinant();
        if !det.is_finite() || (det.abs() - 1.0).abs() > DET_TOLERANCE {
            return Err(AipError::NotUnimodular { det: det.abs() });
        }
        Ok(Self(m / det.abs().sqrt()))
    }

    /// Rescales any invertible `m` onto `SL±(2)`.
    pub fn normalized(m: Matrix2<f64>) -> Result<Self> {
        let det = m.determinant();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(AipError::SingularMap { det });
        }
        Ok(Self(m / det.abs().sqrt()))
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix2<f64>) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn rotation(angle: f64) -> Self {
        Self(rotation(angle))
    }

    pub fn diag(s: f64) -> Self {
        Self(Matrix2::new(s, 0.0, 0.0, 1.0 / s))
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn compose(&self, other: &UnimodularMap) -> UnimodularMap {
        Self(self.0 * other.0)
    }

    /// Exact inverse via the adjugate (`det = ±1`).
    pub fn inverse(&self) -> UnimodularMap {
        let m = &self.0;
        let d = m.determinant();
        Self(Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / d)
    }

    pub fn transpose(&self) -> UnimodularMap {
        Self(self.0.transpose())
    }

    #[inline]
    pub fn apply(&self, p: &Point) -> Point {
        self.0 * p
    }

    /// Operator norm `λ₁`.
    pub fn norm(&self) -> f64 {
        singular_values_of(&self.0).0
    }

    pub fn singular_values(&self) -> SingularPair {
        let (lambda1, lambda2) = singular_values_of(&self.0);
        SingularPair { lambda1, lambda2 }
    }

    /// `M = U·P` with `U` orthogonal and `P` symmetric positive definite.
    pub fn polar_decompose(&self) -> (Matrix2<f64>, UnimodularMap) {
        let (u, p) = polar_of(&self.0);
        (u, UnimodularMap(p))
    }

    /// `U·P^s`; the complementary factor is `P^{1−s}`.
    pub fn fractional_polar_factor(&self, s: f64) -> Result<UnimodularMap> {
        if !(s.abs() <= 1.0) {
            return Err(AipError::Config(format!("polar exponent {s} outside [-1, 1]")));
        }
        let (u, p) = polar_of(&self.0);
        Ok(UnimodularMap(u * spd_power(&p, s)))
    }

    /// Membership in the ball `S_R = {‖M‖ ≤ R}`.
    pub fn in_ball(&self, radius: f64) -> Result<bool> {
        if !(radius >= 1.0) {
            return Err(AipError::InvalidRadius(radius));
        }
        Ok(self.norm() <= radius)
    }
}

/// Closed-form singular values of a 2×2 matrix.
pub fn singular_values_of(m: &Matrix2<f64>) -> (f64, f64) {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let e = (a + d) / 2.0;
    let f = (a - d) / 2.0;
    let g = (c + b) / 2.0;
    let h = (c - b) / 2.0;
    let q = e.hypot(h);
    let r = f.hypot(g);
    (q + r, (q - r).abs())
}

/// Polar decomposition of an invertible 2×2 matrix.
fn polar_of(m: &Matrix2<f64>) -> (Matrix2<f64>, Matrix2<f64>) {
    if m.determinant() > 0.0 {
        let u = rotation((m[(1, 0)] - m[(0, 1)]).atan2(m[(0, 0)] + m[(1, 1)]));
        let p = symmetrize(&(u.transpose() * m));
        (u, p)
    } else {
        // F·M has positive determinant; M = (F·U')·P
        let fm = flip() * m;
        let u = rotation((fm[(1, 0)] - fm[(0, 1)]).atan2(fm[(0, 0)] + fm[(1, 1)]));
        let p = symmetrize(&(u.transpose() * fm));
        (flip() * u, p)
    }
}

fn symmetrize(m: &Matrix2<f64>) -> Matrix2<f64> {
    let off = (m[(0, 1)] + m[(1, 0)]) / 2.0;
    Matrix2::new(m[(0, 0)], off, off, m[(1, 1)])
}

/// `P^s` for symmetric positive definite `P`, by closed-form eigendecomposition.
pub fn spd_power(p: &Matrix2<f64>, s: f64) -> Matrix2<f64> {
    let (a, b, d) = (p[(0, 0)], p[(0, 1)], p[(1, 1)]);
    let mean = (a + d) / 2.0;
    let rad = ((a - d) / 2.0).hypot(b);
    let (l1, l2) = (mean + rad, mean - rad);
    // eigenvector angle of the larger eigenvalue
    let theta = 0.5 * (2.0 * b).atan2(a - d);
    let r = rotation(theta);
    r * Matrix2::new(l1.powf(s), 0.0, 0.0, l2.powf(s)) * r.transpose()
}

/// Volume-preserving affine map `(r, x): a ↦ r(a) + x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumePreservingAffineMap {
    pub r: UnimodularMap,
    pub x: Vector2<f64>,
}

impl VolumePreservingAffineMap {
    pub fn new(r: UnimodularMap, x: Vector2<f64>) -> Self {
        Self { r, x }
    }

    pub fn identity() -> Self {
        Self::new(UnimodularMap::identity(), Vector2::zeros())
    }

    pub fn translation(x: Vector2<f64>) -> Self {
        Self::new(UnimodularMap::identity(), x)
    }

    pub fn linear(r: UnimodularMap) -> Self {
        Self::new(r, Vector2::zeros())
    }

    #[inline]
    pub fn apply(&self, a: &Point) -> Point {
        self.r.apply(a) + self.x
    }

    /// `(r₁,x₁)∘(r₂,x₂) = (r₁r₂, r₁x₂ + x₁)`.
    pub fn compose(&self, other: &VolumePreservingAffineMap) -> VolumePreservingAffineMap {
        Self::new(self.r.compose(&other.r), self.r.apply(&other.x) + self.x)
    }

    pub fn inverse(&self) -> VolumePreservingAffineMap {
        let ri = self.r.inverse();
        Self::new(ri, -ri.apply(&self.x))
    }

    pub fn to_affine(&self) -> AffineMap {
        AffineMap::new(*self.r.matrix(), self.x)
    }
}

impl From<VolumePreservingAffineMap> for AffineMap {
    fn from(m: VolumePreservingAffineMap) -> Self {
        m.to_affine()
    }
}
