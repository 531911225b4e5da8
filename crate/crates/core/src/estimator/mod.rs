//! Self-normalized importance-sampling estimation of the weighted-average
//! point
//!
//! ```text
//! T_{k,K,v}(L) = ∫ Fᵏ(φ) φ(v) dφ / ∫ Fᵏ(φ) dφ,   F(φ) = m(φ⁻¹(L) ∩ K),
//! ```
//!
//! with the group integrals taken over `S_R × ℝ²`. Bodies of arbitrary area
//! are handled by `T(L) = |L|^{1/2} T(L / |L|^{1/2})`.
//!
//! Sampling is split into fixed chunks of [`crate::haar::CHUNK`] draws, each on its own
//! ChaCha stream, and partial sums are merged pairwise in chunk order. The
//! result is therefore bitwise identical for a fixed seed regardless of the
//! number of worker threads.

pub mod optimize;
pub mod proposal;
pub mod quadrature;

use serde::Serialize;

use crate::error::{AipError, Result};
use crate::geometry::{ConvexPolygon, Point};
use crate::haar::{chunked, stream_rng, Merge};
use crate::symmetry::{automorphism_group, fixed_points};
use crate::weightfn::{WeightContext, WeightScratch};

pub use proposal::{find_modes, MixtureProposal, Mode, ProposalConfig};
pub use quadrature::power_ratio_limit;

/// Fewer samples with positive overlap than this fail the run.
pub const MIN_HITS: usize = 100;

/// Stream offset between the base run and each R-doubling round.
const ROUND_STREAM_STRIDE: u64 = 1 << 40;

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    /// Weight exponent.
    pub k: u32,
    pub samples: usize,
    /// Truncation radius of the linear part (`S_R`).
    pub radius: f64,
    pub seed: u64,
    /// Number of `R → 2R` reruns used to measure truncation stability.
    pub r_doubling_rounds: u32,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub proposal: ProposalConfig,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            k: 8,
            samples: 200_000,
            radius: 16.0,
            seed: 0,
            r_doubling_rounds: 1,
            threads: None,
            proposal: ProposalConfig::default(),
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(AipError::Config("k must be at least 1".into()));
        }
        if !(self.radius > 1.0) || !self.radius.is_finite() {
            return Err(AipError::InvalidRadius(self.radius));
        }
        if self.samples == 0 {
            return Err(AipError::Config("samples must be positive".into()));
        }
        let hf = self.proposal.haar_fraction;
        if !(hf > 0.0 && hf <= 1.0) {
            return Err(AipError::Config(format!("haar fraction {hf} outside (0, 1]")));
        }
        if self.threads == Some(0) {
            return Err(AipError::Config("threads must be positive".into()));
        }
        Ok(())
    }
}

/// A 2-vector estimate with per-coordinate standard errors and diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointEstimate {
    pub value: [f64; 2],
    pub std_error: [f64; 2],
    /// Effective sample size `(Σw)² / Σw²` of the self-normalized weights.
    pub ess: f64,
    /// Shift of the value under the final `R → 2R` doubling (0 when not run).
    pub r_stability: f64,
    /// Samples with positive overlap.
    pub hits: usize,
    pub samples: usize,
}

impl PointEstimate {
    pub fn point(&self) -> Point {
        Point::new(self.value[0], self.value[1])
    }

    /// Euclidean norm of the standard-error vector.
    pub fn sigma(&self) -> f64 {
        self.std_error[0].hypot(self.std_error[1])
    }

    fn scaled(&self, c: f64) -> Self {
        Self {
            value: [c * self.value[0], c * self.value[1]],
            std_error: [c * self.std_error[0], c * self.std_error[1]],
            r_stability: c * self.r_stability,
            ..*self
        }
    }
}

/// Running sums of one chunk.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Sums {
    w: f64,
    wy: [f64; 2],
    w2: f64,
    w2y: [f64; 2],
    w2yy: [f64; 2],
    hits: usize,
    n: usize,
}

impl Merge for Sums {
    fn merge(self, o: Self) -> Self {
        Sums {
            w: self.w + o.w,
            wy: [self.wy[0] + o.wy[0], self.wy[1] + o.wy[1]],
            w2: self.w2 + o.w2,
            w2y: [self.w2y[0] + o.w2y[0], self.w2y[1] + o.w2y[1]],
            w2yy: [self.w2yy[0] + o.w2yy[0], self.w2yy[1] + o.w2yy[1]],
            hits: self.hits + o.hits,
            n: self.n + o.n,
        }
    }
}

impl Sums {
    fn push(&mut self, w: f64, y: Point) {
        let w2 = w * w;
        self.w += w;
        self.w2 += w2;
        for i in 0..2 {
            self.wy[i] += w * y[i];
            self.w2y[i] += w2 * y[i];
            self.w2yy[i] += w2 * y[i] * y[i];
        }
    }

    fn finish(&self) -> Result<PointEstimate> {
        if self.hits < MIN_HITS || !(self.w > 0.0) {
            return Err(AipError::DegenerateWeights { hits: self.hits, required: MIN_HITS });
        }
        let mut value = [0.0; 2];
        let mut std_error = [0.0; 2];
        for i in 0..2 {
            let v = self.wy[i] / self.w;
            // delta method: Σ wᵢ²(yᵢ − v)² / (Σ wᵢ)²
            let num = self.w2yy[i] - 2.0 * v * self.w2y[i] + v * v * self.w2;
            value[i] = v;
            std_error[i] = (num.max(0.0)).sqrt() / self.w;
        }
        Ok(PointEstimate {
            value,
            std_error,
            ess: self.w * self.w / self.w2,
            r_stability: 0.0,
            hits: self.hits,
            samples: self.n,
        })
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// One pass of the sampler at the proposal's radius.
fn run_pass(ctx: &WeightContext, anchor: &Point, k: u32, samples: usize, proposal: &MixtureProposal, seed: u64, stream_base: u64) -> Sums {
    let radius = proposal.radius();
    chunked(samples, |chunk, n| {
        let mut rng = stream_rng(seed, stream_base + chunk as u64);
        let mut scratch = WeightScratch::new();
        let mut sums = Sums { n, ..Sums::default() };
        for _ in 0..n {
            let phi = proposal.sample(&mut rng);
            if phi.r.norm() > radius {
                continue;
            }
            let f = scratch.evaluate(ctx, &phi);
            if f <= 0.0 {
                continue;
            }
            let q = proposal.density(&phi);
            if !(q > 0.0) {
                continue;
            }
            sums.hits += 1;
            sums.push(f.powi(k as i32) / q, phi.apply(anchor));
        }
        sums
    })
}

/// Estimates `T_{k,K,v}(L)` for unit-area `K` and `L`.
pub fn estimate_tk_unit(k_body: &ConvexPolygon, anchor: &Point, l_body: &ConvexPolygon, cfg: &EstimatorConfig) -> Result<PointEstimate> {
    cfg.validate()?;
    let ctx = WeightContext::new(k_body.clone(), l_body.clone())?;
    with_threads(cfg.threads, || {
        let proposal = MixtureProposal::new(&ctx, cfg.k, cfg.radius, &cfg.proposal);
        let mut estimate = run_pass(&ctx, anchor, cfg.k, cfg.samples, &proposal, cfg.seed, 0).finish()?;
        let mut previous = estimate.point();
        for round in 1..=cfg.r_doubling_rounds {
            let radius = cfg.radius * 2f64.powi(round as i32);
            let doubled = proposal.with_radius(radius);
            let next = run_pass(&ctx, anchor, cfg.k, cfg.samples, &doubled, cfg.seed, round as u64 * ROUND_STREAM_STRIDE).finish()?;
            estimate.r_stability = (next.point() - previous).norm();
            previous = next.point();
        }
        Ok(estimate)
    })
}

/// Grid for the normalized argument body, so that `L` and `cL` normalize to
/// bitwise identical polygons.
const NORMALIZED_GRID: f64 = 1.0 / (1u64 << 40) as f64;

/// Estimates `T_{k,K,v}(L)` for `L` of any area: normalize `L` about the
/// origin, estimate, and scale back.
pub fn estimate_tk(k_body: &ConvexPolygon, anchor: &Point, l_body: &ConvexPolygon, cfg: &EstimatorConfig) -> Result<PointEstimate> {
    let (unit, scale) = l_body.normalize_to_unit_area();
    let snapped: Vec<Point> = unit
        .vertices()
        .iter()
        .map(|p| (p / NORMALIZED_GRID).map(f64::round) * NORMALIZED_GRID)
        .collect();
    let unit = ConvexPolygon::from_points(&snapped)?;
    Ok(estimate_tk_unit(k_body, anchor, &unit, cfg)?.scaled(scale))
}

/// One row of a convergence sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: u32,
    pub estimate: PointEstimate,
    pub err_to_anchor: f64,
}

/// `T_k(K)` for each `k` in `ks`, with the distance to the anchor. The
/// anchor must lie in the fixed set of `K`.
pub fn convergence_sweep(k_body: &ConvexPolygon, anchor: &Point, ks: &[u32], cfg: &EstimatorConfig) -> Result<Vec<SweepRow>> {
    let report = automorphism_group(k_body);
    if !fixed_points(&report, anchor) {
        return Err(AipError::Config(format!(
            "anchor ({}, {}) is not fixed by the automorphisms of the body",
            anchor.x, anchor.y
        )));
    }
    convergence_sweep_unchecked(k_body, anchor, ks, cfg)
}

/// [`convergence_sweep`] without the fixed-set check.
pub fn convergence_sweep_unchecked(k_body: &ConvexPolygon, anchor: &Point, ks: &[u32], cfg: &EstimatorConfig) -> Result<Vec<SweepRow>> {
    ks.iter()
        .map(|&k| {
            let c = EstimatorConfig { k, ..cfg.clone() };
            let estimate = estimate_tk_unit(k_body, anchor, k_body, &c)?;
            Ok(SweepRow {
                k,
                err_to_anchor: (estimate.point() - anchor).norm(),
                estimate,
            })
        })
        .collect()
}
