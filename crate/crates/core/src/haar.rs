//! Haar measure on `SL±(2)` and translation proposals.
//!
//! The reference measure is the pushforward of `sinh(2t) dt dθ₁ dθ₂` under
//! the Cartan chart `(θ₁, t, θ₂) ↦ R(θ₁)·diag(eᵗ, e⁻ᵗ)·R(θ₂)`, with
//! `θ₁, θ₂ ∈ [0, 2π)`, on each of the two determinant components. In the
//! exponential chart `A ↦ eᴬ` (traceless `A = [[a, b], [c, −a]]`) the same
//! measure has density `J(A)` w.r.t. `da db dc`, where
//! `J(A) = (sinh μ / μ)²` with `μ² = a² + bc` (analytically continued to
//! `(sin ω / ω)²` when `μ² = −ω² < 0`).

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{AipError, Result};
use crate::stats::MeanAccumulator;
use crate::unimodular::{flip, rotation, UnimodularMap, VolumePreservingAffineMap};

/// Independent random stream `stream` of the run seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Radial Haar density in Cartan coordinates.
pub fn haar_density_cartan(t: f64) -> f64 {
    (2.0 * t).sinh()
}

/// `∫₀^{ln R} sinh(2t) dt = sinh²(ln R)`.
pub fn cartan_radial_mass(radius: f64) -> f64 {
    let s = (radius - 1.0 / radius) / 2.0;
    s * s
}

/// Haar mass of `S_R` (both determinant components).
pub fn ball_mass(radius: f64) -> f64 {
    2.0 * TAU * TAU * cartan_radial_mass(radius)
}

/// CDF of the radial coordinate under the truncated Haar measure on `S_R`.
pub fn radial_cdf(t: f64, radius: f64) -> f64 {
    let tmax = radius.ln();
    if t <= 0.0 {
        0.0
    } else if t >= tmax {
        1.0
    } else {
        (t.sinh() / tmax.sinh()).powi(2)
    }
}

/// Coordinates on `SL±(2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartanCoordinates {
    pub theta1: f64,
    pub t: f64,
    pub theta2: f64,
    pub reflect: bool,
}

impl CartanCoordinates {
    pub fn decode(&self) -> UnimodularMap {
        let d = Matrix2::new(self.t.exp(), 0.0, 0.0, (-self.t).exp());
        let mut m = rotation(self.theta1) * d * rotation(self.theta2);
        if self.reflect {
            m *= flip();
        }
        UnimodularMap::from_matrix_unchecked(m)
    }
}

/// A group element with its importance weight relative to the Haar measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HaarSample {
    pub phi: VolumePreservingAffineMap,
    pub base_weight: f64,
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 1.0) || !radius.is_finite() {
        return Err(AipError::InvalidRadius(radius));
    }
    Ok(())
}

/// Draws Cartan coordinates from the Haar measure truncated to `S_R`.
pub fn sample_cartan<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> CartanCoordinates {
    let theta1 = TAU * rng.random::<f64>();
    let theta2 = TAU * rng.random::<f64>();
    let u: f64 = rng.random();
    // inverse of sinh²(t)/sinh²(T)
    let t = (u.sqrt() * radius.ln().sinh()).asinh();
    let reflect = rng.random::<bool>();
    CartanCoordinates { theta1, t, theta2, reflect }
}

/// Haar sample on `S_R` with zero translation. The proposal equals the
/// truncated target, so the weight is the constant `meas(S_R)`.
pub fn sample_sl2pm<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> Result<HaarSample> {
    check_radius(radius)?;
    let m = sample_cartan(radius, rng).decode();
    Ok(HaarSample {
        phi: VolumePreservingAffineMap::linear(m),
        base_weight: ball_mass(radius),
    })
}

/// Uniform point of the disk of radius `rho` and the Lebesgue mass `πρ²` of
/// the disk.
pub fn sample_translation<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> (Vector2<f64>, f64) {
    let r = rho * rng.random::<f64>().sqrt();
    let a = TAU * rng.random::<f64>();
    (Vector2::new(r * a.cos(), r * a.sin()), PI * rho * rho)
}

/// `exp` of the traceless matrix `[[a, b], [c, −a]]`.
pub fn exp_traceless(a: f64, b: f64, c: f64) -> Matrix2<f64> {
    let mu2 = a * a + b * c;
    let (ch, sh_over) = if mu2 > 1e-12 {
        let mu = mu2.sqrt();
        (mu.cosh(), mu.sinh() / mu)
    } else if mu2 < -1e-12 {
        let w = (-mu2).sqrt();
        (w.cos(), w.sin() / w)
    } else {
        (1.0 + mu2 / 2.0 + mu2 * mu2 / 24.0, 1.0 + mu2 / 6.0 + mu2 * mu2 / 120.0)
    };
    Matrix2::new(ch + sh_over * a, sh_over * b, sh_over * c, ch - sh_over * a)
}

/// Principal logarithm of `m ∈ SL(2)` with `tr m > −2`, as `(a, b, c)`.
/// Returns `None` outside the injectivity domain of the exponential chart.
pub fn log_sl2(m: &Matrix2<f64>) -> Option<[f64; 3]> {
    let det = m.determinant();
    if det <= 0.0 {
        return None;
    }
    let half_tr = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    if half_tr <= -1.0 {
        return None;
    }
    let f = if half_tr > 1.0 {
        let d = half_tr - 1.0;
        let sh = (d * (2.0 + d)).sqrt();
        (d + sh).ln_1p() / sh
    } else if half_tr < 1.0 {
        let d = 1.0 - half_tr;
        let w = 2.0 * (d / 2.0).sqrt().asin();
        w / (d * (2.0 - d)).sqrt()
    } else {
        1.0
    };
    // m − half_tr·I is traceless
    let a = f * (m[(0, 0)] - m[(1, 1)]) / 2.0;
    Some([a, f * m[(0, 1)], f * m[(1, 0)]])
}

/// Haar density of the exponential chart at `(a, b, c)`.
pub fn exp_chart_jacobian(a: f64, b: f64, c: f64) -> f64 {
    let mu2 = a * a + b * c;
    if mu2 > 1e-12 {
        let mu = mu2.sqrt();
        (mu.sinh() / mu).powi(2)
    } else if mu2 < -1e-12 {
        let w = (-mu2).sqrt();
        (w.sin() / w).powi(2)
    } else {
        1.0 + mu2 / 3.0
    }
}

/// Outcome of a left-invariance probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvarianceReport {
    /// `|Ê[h(g·M)] − Ê[h(M)]|`, both integrals w.r.t. the Haar measure.
    pub discrepancy: f64,
    /// Standard error of the difference of the two independent estimates.
    pub std_error: f64,
    pub integral: f64,
}

/// Compares `∫ h(g·M) dM` with `∫ h(M) dM` on two independent Haar sample
/// sets drawn from `S_{truncation}`. `h` must vanish outside `S_{r0}`.
pub fn invariance_check<H>(
    g: &UnimodularMap,
    h: H,
    r0: f64,
    truncation: f64,
    samples: usize,
    seed: u64,
) -> Result<InvarianceReport>
where
    H: Fn(&UnimodularMap) -> f64 + Sync,
{
    check_radius(truncation)?;
    if !(r0 >= 1.0) {
        return Err(AipError::InvalidRadius(r0));
    }
    let required = g.norm() * r0;
    if required > truncation {
        return Err(AipError::TruncationTooSmall { required, truncation });
    }
    let mass = ball_mass(truncation);
    let estimate = |stream_base: u64, shifted: bool| -> (f64, f64) {
        let acc = chunked(samples, |chunk, n| {
            let mut rng = stream_rng(seed, stream_base + chunk as u64);
            let mut acc = MeanAccumulator::default();
            for _ in 0..n {
                let m = sample_cartan(truncation, &mut rng).decode();
                let arg = if shifted { g.compose(&m) } else { m };
                acc.push(h(&arg));
            }
            acc
        });
        (mass * acc.mean(), mass * acc.std_error())
    };
    // disjoint stream ranges for the two sample sets
    let (base, se_base) = estimate(0, false);
    let (moved, se_moved) = estimate(1 << 32, true);
    Ok(InvarianceReport {
        discrepancy: (moved - base).abs(),
        std_error: se_base.hypot(se_moved),
        integral: base,
    })
}

/// Samples per random stream; fixed so results do not depend on thread count.
pub const CHUNK: usize = 4096;

/// Runs `work(chunk_index, chunk_len)` over `total` items split into fixed
/// chunks and merges the results in chunk order.
pub(crate) fn chunked<T, W>(total: usize, work: W) -> T
where
    T: Merge + Send,
    W: Fn(usize, usize) -> T + Sync,
{
    let chunks = total.div_ceil(CHUNK);
    let parts: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|i| work(i, CHUNK.min(total - i * CHUNK)))
        .collect();
    T::merge_all(parts)
}

pub(crate) trait Merge: Sized + Default {
    fn merge(self, other: Self) -> Self;

    /// Pairwise (tree) reduction in index order.
    fn merge_all(mut parts: Vec<Self>) -> Self {
        while parts.len() > 1 {
            let mut next = Vec::with_capacity(parts.len().div_ceil(2));
            let mut it = parts.into_iter();
            while let Some(a) = it.next() {
                next.push(match it.next() {
                    Some(b) => a.merge(b),
                    None => a,
                });
            }
            parts = next;
        }
        parts.pop().unwrap_or_default()
    }
}

impl Merge for MeanAccumulator {
    fn merge(self, other: Self) -> Self {
        MeanAccumulator::merge(self, other)
    }
}
