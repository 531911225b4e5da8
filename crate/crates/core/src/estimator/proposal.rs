//! Mixture proposal over `SAff(2)` for the overlap-weighted integrals.
//!
//! One component is the truncated Haar measure on `S_R` paired with a
//! uniform disk of translations covering the support of the weight. The
//! remaining components are Gaussians in an exponential chart centred at
//! the modes of the weight, at several scales. All densities are taken with
//! respect to the Haar measure `dM·dx`, so an importance weight is simply
//! `1[M ∈ S_R] / q(φ)`.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::estimator::optimize::nelder_mead;
use crate::geometry::Point;
use crate::haar::{ball_mass, exp_chart_jacobian, exp_traceless, log_sl2, sample_cartan};
use crate::symmetry::WhiteningFrame;
use crate::unimodular::{flip, rotation, UnimodularMap, VolumePreservingAffineMap};
use crate::weightfn::{WeightContext, WeightScratch};

/// Tuning of the mixture proposal.
#[derive(Clone, Debug, PartialEq)]
pub struct ProposalConfig {
    /// Probability of drawing from the Haar component.
    pub haar_fraction: f64,
    /// Angular resolution of the whitened-frame mode scan.
    pub angle_grid: usize,
    /// Modes with `(F/F_max)^k` below this are dropped.
    pub mode_threshold: f64,
    pub max_modes: usize,
    /// Translation scales of the local components, in units of `1/k`.
    pub scales: Vec<f64>,
    /// Ratio of the chart scale for the linear part to the translation scale.
    pub linear_scale_ratio: f64,
    /// Cap on the linear chart scale (keeps the chart injective in practice).
    pub max_linear_scale: f64,
}

impl Default for ProposalConfig {
    fn default() -> Self {
        Self {
            haar_fraction: 0.3,
            angle_grid: 720,
            mode_threshold: 1e-3,
            max_modes: 16,
            scales: vec![0.5, 1.0, 2.0, 4.0],
            linear_scale_ratio: 2.0,
            max_linear_scale: 0.5,
        }
    }
}

/// A local maximum of the weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub center: VolumePreservingAffineMap,
    pub weight: f64,
}

#[derive(Clone, Debug)]
struct LocalComponent {
    center: VolumePreservingAffineMap,
    center_inv: VolumePreservingAffineMap,
    sigma_a: f64,
    sigma_x: f64,
    log_norm: f64,
}

/// The mixture proposal for one `(K, L, k, R)` problem.
#[derive(Clone, Debug)]
pub struct MixtureProposal {
    radius: f64,
    haar_fraction: f64,
    pivot: Point,
    l_centroid: Point,
    r_k: f64,
    r_l: f64,
    components: Vec<LocalComponent>,
    /// cumulative probabilities of the local components, ending at 1 − haar_fraction
    cumulative: Vec<f64>,
    modes: Vec<Mode>,
}

/// Chart around `pivot`: `ψ(p) = eᴬ(p − g) + g + x'`.
fn chart(z: &[f64; 5], pivot: &Point) -> VolumePreservingAffineMap {
    let m = exp_traceless(z[0], z[1], z[2]);
    let x = Vector2::new(z[3], z[4]) + pivot - m * pivot;
    VolumePreservingAffineMap::new(UnimodularMap::from_matrix_unchecked(m), x)
}

fn chart_inverse(psi: &VolumePreservingAffineMap, pivot: &Point) -> Option<[f64; 5]> {
    let [a, b, c] = log_sl2(psi.r.matrix())?;
    let xp = psi.x - pivot + psi.r.apply(pivot);
    Some([a, b, c, xp.x, xp.y])
}

/// Locates the modes of `φ ↦ F_K(L)(φ)`: a scan over the maps
/// `W_L⁻¹ O W_K` for orthogonal `O` in whitened frames, followed by
/// Nelder–Mead refinement of every local maximum found on the scan.
pub fn find_modes(ctx: &WeightContext, k: u32, cfg: &ProposalConfig) -> Vec<Mode> {
    let fk = WhiteningFrame::of(&ctx.k_body);
    let fl = WhiteningFrame::of(&ctx.l_body);
    let pivot = fk.centroid;
    let mut scratch = WeightScratch::new();
    let n = cfg.angle_grid.max(8);

    let frame_map = |o: nalgebra::Matrix2<f64>| {
        let m = UnimodularMap::normalized(fl.unwhiten * o * fk.whiten).expect("whitening is invertible");
        VolumePreservingAffineMap::new(m, fl.centroid - m.apply(&fk.centroid))
    };

    let mut candidates = Vec::new();
    for reflect in [false, true] {
        let vals: Vec<(VolumePreservingAffineMap, f64)> = (0..n)
            .map(|i| {
                let mut o = rotation(TAU * i as f64 / n as f64);
                if reflect {
                    o *= flip();
                }
                let phi = frame_map(o);
                (phi, scratch.evaluate(ctx, &phi))
            })
            .collect();
        for i in 0..n {
            let (prev, cur, next) = (vals[(i + n - 1) % n].1, vals[i].1, vals[(i + 1) % n].1);
            if cur > 0.0 && cur >= prev && cur > next {
                candidates.push(vals[i].0);
            }
        }
    }

    let mut modes: Vec<Mode> = Vec::new();
    for c in candidates {
        let objective = |z: &[f64; 5]| -> f64 {
            if z[0].abs().max(z[1].abs()).max(z[2].abs()) > 1.0 {
                return 0.0;
            }
            -scratch_eval(ctx, &c.compose(&chart(z, &pivot)))
        };
        let (z, v) = nelder_mead(objective, [0.0; 5], 0.02, 3000, 1e-10);
        let center = c.compose(&chart(&z, &pivot));
        let weight = -v;
        let duplicate = modes.iter().any(|m| {
            (m.center.r.matrix() - center.r.matrix()).norm() + (m.center.x - center.x).norm() < 1e-4
        });
        if !duplicate && weight > 0.0 {
            modes.push(Mode { center, weight });
        }
    }
    modes.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    if let Some(best) = modes.first().map(|m| m.weight) {
        modes.retain(|m| (m.weight / best).powi(k as i32) >= cfg.mode_threshold);
    }
    modes.truncate(cfg.max_modes);
    modes
}

fn scratch_eval(ctx: &WeightContext, phi: &VolumePreservingAffineMap) -> f64 {
    thread_local! {
        static SCRATCH: std::cell::RefCell<WeightScratch> = std::cell::RefCell::new(WeightScratch::new());
    }
    SCRATCH.with(|s| s.borrow_mut().evaluate(ctx, phi))
}

impl MixtureProposal {
    pub fn new(ctx: &WeightContext, k: u32, radius: f64, cfg: &ProposalConfig) -> Self {
        let modes = find_modes(ctx, k, cfg);
        Self::with_modes(ctx, k, radius, cfg, modes)
    }

    pub fn with_modes(ctx: &WeightContext, k: u32, radius: f64, cfg: &ProposalConfig, modes: Vec<Mode>) -> Self {
        let pivot = ctx.k_body.centroid();
        let l_centroid = ctx.l_body.centroid();
        let r_k = ctx.k_body.circumradius_about(&pivot);
        let r_l = ctx.l_body.circumradius_about(&l_centroid);
        let haar_fraction = if modes.is_empty() { 1.0 } else { cfg.haar_fraction };

        let best = modes.first().map(|m| m.weight).unwrap_or(1.0);
        let rel: Vec<f64> = modes.iter().map(|m| (m.weight / best).powi(k as i32)).collect();
        let rel_sum: f64 = rel.iter().sum();
        let base = 1.0 / k as f64;

        let mut components = Vec::new();
        let mut probs = Vec::new();
        for (m, r) in modes.iter().zip(&rel) {
            for &s in &cfg.scales {
                let sigma_x = s * base;
                let sigma_a = (cfg.linear_scale_ratio * sigma_x).min(cfg.max_linear_scale);
                // log of the Gaussian normalization in 3 + 2 dimensions
                let log_norm = -1.5 * (TAU * sigma_a * sigma_a).ln() - (TAU * sigma_x * sigma_x).ln();
                components.push(LocalComponent {
                    center: m.center,
                    center_inv: m.center.inverse(),
                    sigma_a,
                    sigma_x,
                    log_norm,
                });
                probs.push((1.0 - haar_fraction) * r / rel_sum / cfg.scales.len() as f64);
            }
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self {
            radius,
            haar_fraction,
            pivot,
            l_centroid,
            r_k,
            r_l,
            components,
            cumulative,
            modes,
        }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Same modes, different truncation radius.
    pub fn with_radius(&self, radius: f64) -> Self {
        Self { radius, ..self.clone() }
    }

    fn disk(&self, m: &UnimodularMap) -> (Point, f64) {
        (self.l_centroid - m.apply(&self.pivot), m.norm() * self.r_k + self.r_l)
    }

    fn component_probability(&self, j: usize) -> f64 {
        if j == 0 {
            self.cumulative[0]
        } else {
            self.cumulative[j] - self.cumulative[j - 1]
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> VolumePreservingAffineMap {
        let u: f64 = rng.random();
        let local_mass = 1.0 - self.haar_fraction;
        if u >= local_mass || self.components.is_empty() {
            let m = sample_cartan(self.radius, rng).decode();
            let (center, rad) = self.disk(&m);
            let r = rad * rng.random::<f64>().sqrt();
            let a = TAU * rng.random::<f64>();
            return VolumePreservingAffineMap::new(m, center + r * Vector2::new(a.cos(), a.sin()));
        }
        let j = self.cumulative.partition_point(|&c| c <= u).min(self.components.len() - 1);
        let comp = &self.components[j];
        loop {
            let mut z = [0.0; 5];
            for (i, zi) in z.iter_mut().enumerate() {
                let g: f64 = rng.sample(StandardNormal);
                *zi = g * if i < 3 { comp.sigma_a } else { comp.sigma_x };
            }
            // stay inside the injectivity domain of the chart (elliptic angle < π)
            if z[0] * z[0] + z[1] * z[2] > -PI * PI {
                return comp.center.compose(&chart(&z, &self.pivot));
            }
        }
    }

    /// Density of the proposal at `φ` w.r.t. `dM·dx`.
    pub fn density(&self, phi: &VolumePreservingAffineMap) -> f64 {
        let mut q = 0.0;
        let lambda1 = phi.r.norm();
        if lambda1 <= self.radius {
            let (center, rad) = self.disk(&phi.r);
            if (phi.x - center).norm() <= rad {
                q += self.haar_fraction / (ball_mass(self.radius) * PI * rad * rad);
            }
        }
        for (j, comp) in self.components.iter().enumerate() {
            let psi = comp.center_inv.compose(phi);
            if psi.r.det() <= 0.0 {
                continue;
            }
            let Some(z) = chart_inverse(&psi, &self.pivot) else { continue };
            if z[0] * z[0] + z[1] * z[2] <= -PI * PI {
                continue;
            }
            let qa = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) / (comp.sigma_a * comp.sigma_a);
            let qx = (z[3] * z[3] + z[4] * z[4]) / (comp.sigma_x * comp.sigma_x);
            let g = (comp.log_norm - 0.5 * (qa + qx)).exp();
            q += self.component_probability(j) * g / exp_chart_jacobian(z[0], z[1], z[2]);
        }
        q
    }
}
