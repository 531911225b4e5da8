//! The overlap weight `F_K(L)(φ) = m(φ⁻¹(L) ∩ K)` and its envelopes.

use crate::error::{AipError, Result};
use crate::geometry::{intersection_area_with, ConvexPolygon, Point};
use crate::unimodular::{UnimodularMap, VolumePreservingAffineMap};

/// Allowed deviation of the body areas from 1.
pub const UNIT_AREA_TOL: f64 = 1e-9;

/// Reference body `K` and argument body `L`, both of unit area, with their
/// circumradii about the origin.
#[derive(Clone, Debug)]
pub struct WeightContext {
    pub k_body: ConvexPolygon,
    pub l_body: ConvexPolygon,
    pub r_k: f64,
    pub r_l: f64,
}

impl WeightContext {
    pub fn new(k_body: ConvexPolygon, l_body: ConvexPolygon) -> Result<Self> {
        for (name, body) in [("K", &k_body), ("L", &l_body)] {
            let a = body.area();
            if (a - 1.0).abs() > UNIT_AREA_TOL {
                return Err(AipError::Config(format!("body {name} has area {a}, expected 1")));
            }
        }
        let origin = Point::zeros();
        let r_k = k_body.circumradius_about(&origin);
        let r_l = l_body.circumradius_about(&origin);
        Ok(Self { k_body, l_body, r_k, r_l })
    }

    /// `m(φ⁻¹(L) ∩ K)`, in `[0, 1]`.
    pub fn evaluate_weight(&self, phi: &VolumePreservingAffineMap) -> f64 {
        WeightScratch::new().evaluate(self, phi)
    }

    /// Radius `ρ(M) = λ₁(M)(R_K + R_L)` beyond which the weight vanishes in `x`.
    pub fn translation_support_radius(&self, m: &UnimodularMap) -> f64 {
        m.norm() * (self.r_k + self.r_l)
    }

    /// Upper bound `min(1, c·λ₂(M))` on the weight over all translations, with
    /// `c = 4·max(R_K, R_L)²` (slab of width `2λ₂R_L` through a disk of
    /// diameter `2R_K`).
    pub fn slab_envelope(&self, m: &UnimodularMap) -> f64 {
        let r = self.r_k.max(self.r_l);
        let c = 2.0 * (2.0 * r) * r;
        (c * m.singular_values().lambda2).min(1.0)
    }
}

/// Reusable buffers for repeated weight evaluation on one worker.
#[derive(Debug, Default)]
pub struct WeightScratch {
    image: Vec<Point>,
    cur: Vec<Point>,
    next: Vec<Point>,
}

impl WeightScratch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Weight at `φ`, computed as the overlap of `φ⁻¹(L)` with `K`.
    pub fn evaluate(&mut self, ctx: &WeightContext, phi: &VolumePreservingAffineMap) -> f64 {
        self.evaluate_inverse(ctx, &phi.inverse())
    }

    /// Weight at `φ`, given `φ⁻¹`.
    pub fn evaluate_inverse(&mut self, ctx: &WeightContext, phi_inv: &VolumePreservingAffineMap) -> f64 {
        self.image.clear();
        self.image.extend(ctx.l_body.vertices().iter().map(|p| phi_inv.apply(p)));
        if phi_inv.r.det() < 0.0 {
            self.image.reverse();
        }
        intersection_area_with(&self.image, ctx.k_body.vertices(), &mut self.cur, &mut self.next).min(1.0)
    }
}
