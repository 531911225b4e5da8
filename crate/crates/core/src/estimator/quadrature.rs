//! Adaptive Gauss–Kronrod (7/15) quadrature and the power-ratio utility
//! `∫ fᵏ g / ∫ fᵏ`.

use std::collections::BinaryHeap;

use crate::error::{AipError, Result};

const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate and `|K15 − G7|` on `[a, b]`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XK[i]) + f(c + h * XK[i]);
        k += WK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive integration of `f` over `[a, b]`, starting from
/// `initial` equal pieces and bisecting the worst piece until the summed
/// error estimate is within `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, initial: usize, rel_tol: f64, abs_tol: f64, max_pieces: usize) -> Result<f64> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(AipError::Config(format!("invalid interval [{a}, {b}]")));
    }
    let mut heap = BinaryHeap::new();
    let n = initial.max(1);
    for i in 0..n {
        let lo = a + (b - a) * i as f64 / n as f64;
        let hi = a + (b - a) * (i + 1) as f64 / n as f64;
        let (value, error) = gk15(&f, lo, hi);
        heap.push(Piece { a: lo, b: hi, value, error });
    }
    loop {
        let total: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.error).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(AipError::QuadratureFailure("non-finite integrand".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if heap.len() >= max_pieces {
            return Err(AipError::QuadratureFailure(format!(
                "error {err:e} above tolerance after {} pieces",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&f, lo, hi);
            heap.push(Piece { a: lo, b: hi, value, error });
        }
    }
}

/// `∫ fᵏ g dx / ∫ fᵏ dx` over `domain`, by adaptive quadrature.
///
/// `f` must satisfy `0 ≤ f ≤ 1` on the domain; the ratio tends to `g(x₀)`
/// as `k → ∞` when `x₀` is the unique maximizer with `f(x₀) = 1`.
pub fn power_ratio_limit<F, G>(f: F, g: G, domain: (f64, f64), k: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let (a, b) = domain;
    if !(k > 0.0) {
        return Err(AipError::Config(format!("exponent k = {k} must be positive")));
    }
    for i in 0..=1000 {
        let x = a + (b - a) * i as f64 / 1000.0;
        let v = f(x);
        if !(0.0..=1.0).contains(&v) {
            return Err(AipError::Config(format!("f({x}) = {v} outside [0, 1]")));
        }
    }
    let pieces = 64;
    let den = integrate(|x| f(x).powf(k), a, b, pieces, 1e-13, 1e-300, 50_000)?;
    if den <= 0.0 {
        return Err(AipError::QuadratureFailure("denominator vanished".into()));
    }
    let num = integrate(|x| f(x).powf(k) * g(x), a, b, pieces, 1e-13, 1e-15 * den, 50_000)?;
    Ok(num / den)
}
