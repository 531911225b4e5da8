//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::time::Instant;

use aip_core::classical::{john_center, john_ellipse};
use aip_core::cli::{audit, audit_map, Rule};
use aip_core::estimator::{estimate_tk, estimate_tk_unit, power_ratio_limit, EstimatorConfig};
use aip_core::geometry::intersection_area;
use aip_core::haar::{invariance_check, sample_cartan, sample_sl2pm, stream_rng};
use aip_core::stats::ks_test;
use aip_core::symmetry::{automorphism_group, fixed_points, FixedSet, SymmetryKind};
use aip_core::unimodular::spd_power;
use aip_core::weightfn::WeightContext;
use aip_core::{ConvexPolygon, Point, UnimodularMap, VolumePreservingAffineMap};
use common::*;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn geometry_oracle() -> Outcome {
    let sq = unit_square();
    let shifted = sq.translate(Point::new(0.5, 0.0));
    let far = sq.translate(Point::new(3.0, 0.0));
    let q = q0_raw();
    let trivial_err = [
        (intersection_area(&sq, &shifted) - 0.5).abs(),
        (intersection_area(&q, &q) - q.area()).abs(),
        intersection_area(&sq, &far),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    let mut misses = 0;
    for _ in 0..200 {
        let n1 = r.random_range(3..9);
        let n2 = r.random_range(3..9);
        let p = random_polygon(&mut r, n1, Point::zeros());
        let off = Point::new(r.random_range(-0.8..0.8), r.random_range(-0.8..0.8));
        let q = random_polygon(&mut r, n2, off);
        let exact = intersection_area(&p, &q);
        let z = rejection_intersection(&p, &q, 1_000_000, &mut r).z_score(exact);
        worst = worst.max(z);
        if z > 3.0 {
            misses += 1;
        }
    }
    outcome(
        trivial_err <= 1e-12 && misses == 0,
        format!("trivial max error {trivial_err:.1e}; 200 random pairs, {misses} beyond 3 se (worst {worst:.2} se)"),
    )
}

fn weight_bounds() -> Outcome {
    let mut r = rng(202);
    let ctx = WeightContext::new(q0(), unit_square().translate(Point::new(-0.5, -0.5))).unwrap();
    let (mut support_violations, mut slab_violations, mut zero_checks) = (0, 0, 0);
    for i in 0..1000 {
        let m = sample_sl2pm(8.0, &mut stream_rng(202, i)).unwrap().phi.r;
        let rho = ctx.translation_support_radius(&m);
        let a: f64 = r.random_range(0.0..std::f64::consts::TAU);
        let len = rho * r.random_range(0.0..2.0);
        let x = Point::new(len * a.cos(), len * a.sin());
        let w = ctx.evaluate_weight(&VolumePreservingAffineMap::new(m, x));
        if len > rho {
            zero_checks += 1;
            if w != 0.0 {
                support_violations += 1;
            }
        }
        if w > ctx.slab_envelope(&m) {
            slab_violations += 1;
        }
    }
    outcome(
        support_violations == 0 && slab_violations == 0,
        format!("{support_violations} support violations in {zero_checks} far draws, {slab_violations} slab violations in 1000"),
    )
}

fn haar_correctness() -> Outcome {
    let radius = 16.0;
    let mut r = stream_rng(303, 0);
    let ts: Vec<f64> = (0..100_000).map(|_| sample_cartan(radius, &mut r).t).collect();
    // closed form, written out independently of the library's CDF
    let tmax = f64::ln(radius);
    let (d, p) = ks_test(&ts, |t| (t.clamp(0.0, tmax).sinh() / tmax.sinh()).powi(2));

    let h = |m: &UnimodularMap| {
        let a = m.matrix();
        let bump = (1.0 - m.norm() / 2.0).max(0.0);
        bump * (2.0 + a[(0, 1)] + 0.5 * a[(0, 0)] * a[(1, 1)] + if a[(1, 0)] > 0.0 { 1.0 } else { 0.0 })
    };
    let mut worst: f64 = 0.0;
    let mut fails = 0;
    for i in 0..10 {
        let g = sample_sl2pm(4.0, &mut stream_rng(304, i)).unwrap().phi.r;
        let rep = invariance_check(&g, h, 2.0, 8.0, 200_000, 305 + i).unwrap();
        let z = rep.discrepancy / rep.std_error;
        worst = worst.max(z);
        if z >= 3.0 {
            fails += 1;
        }
    }
    outcome(
        p > 0.01 && fails == 0,
        format!("KS D = {d:.4}, p = {p:.3}; invariance worst {worst:.2} se over 10 g ({fails} failures)"),
    )
}

fn ball_semigroup() -> Outcome {
    let mut r = rng(404);
    let slack = 1e-9;
    let mut worst_incl: f64 = f64::NEG_INFINITY;
    let mut worst_fact: f64 = 0.0;
    for i in 0..1000 {
        let (r1, r2): (f64, f64) = (r.random_range(1.01..5.0), r.random_range(1.01..5.0));
        let m1 = sample_sl2pm(r1, &mut stream_rng(404, 2 * i)).unwrap().phi.r;
        let m2 = sample_sl2pm(r2, &mut stream_rng(404, 2 * i + 1)).unwrap().phi.r;
        worst_incl = worst_incl.max(m1.compose(&m2).norm() - r1 * r2);

        let a = sample_sl2pm(r1 * r2, &mut stream_rng(405, i)).unwrap().phi.r;
        let s = r1.ln() / (r1 * r2).ln();
        let left = a.fractional_polar_factor(s).unwrap();
        let (_, p) = a.polar_decompose();
        let right = spd_power(p.matrix(), 1.0 - s);
        let rebuilt = (left.matrix() * right - a.matrix()).abs().max();
        let excess = (left.norm() - r1).max(UnimodularMap::normalized(right).unwrap().norm() - r2);
        worst_fact = worst_fact.max(rebuilt).max(excess);
    }
    outcome(
        worst_incl <= slack && worst_fact <= slack,
        format!("max(‖M₁M₂‖ − R₁R₂) = {worst_incl:.2e}; factorization worst excess {worst_fact:.2e}"),
    )
}

fn power_ratio() -> Outcome {
    let f = |x: f64| (-x * x).exp();
    let mut worst: f64 = 0.0;
    for k in [1.0, 4.0, 16.0] {
        let v = power_ratio_limit(f, |x| x * x, (-10.0, 10.0), k).unwrap();
        worst = worst.max((v - 1.0 / (2.0 * k)).abs());
    }
    let lim = power_ratio_limit(f, |x| x + 2.0, (-10.0, 10.0), 1e4).unwrap();
    outcome(
        worst <= 1e-6 && (lim - 2.0).abs() <= 1e-3,
        format!("max |ratio − 1/(2k)| = {worst:.1e}; k = 1e4 ratio {lim:.9}"),
    )
}

fn equivariance() -> Outcome {
    let cfg = EstimatorConfig::default();
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, body, anchor) in [("square", unit_square(), Point::new(0.5, 0.5)), ("Q0", q0(), q0_anchor())] {
        let base = estimate_tk_unit(&body, &anchor, &body, &cfg).unwrap();
        let mut ok = 0;
        for j in 0..20 {
            let tau = audit_map(606, j);
            let image = body.apply_affine(&tau.to_affine()).unwrap();
            let c = EstimatorConfig { seed: 1 + j as u64, ..cfg.clone() };
            let moved = estimate_tk_unit(&body, &anchor, &image, &c).unwrap();
            let lam = tau.r.norm();
            let residual = (moved.point() - tau.apply(&base.point())).norm();
            let sigma = moved.sigma().hypot(lam * base.sigma());
            if residual <= 3.0 * sigma + moved.r_stability + lam * base.r_stability {
                ok += 1;
            }
        }
        pass &= ok >= 19;
        lines.push(format!("{name} {ok}/20"));
    }
    outcome(pass, format!("within 3σ + r_stability: {}", lines.join(", ")))
}

fn convergence() -> Outcome {
    let (k_body, v) = (q0(), q0_anchor());
    let err = |k| {
        let cfg = EstimatorConfig { k, ..Default::default() };
        let e = estimate_tk_unit(&k_body, &v, &k_body, &cfg).unwrap();
        ((e.point() - v).norm(), e.sigma())
    };
    let report = automorphism_group(&k_body);
    let trivial = report.kind == SymmetryKind::Trivial && fixed_points(&report, &v);
    let (e2, s2) = err(2);
    let (e16, s16) = err(16);
    outcome(
        trivial && e16 < e2 && e16 < 0.05,
        format!("|T_k − v| = {e2:.4} (σ {s2:.4}) at k = 2, {e16:.4} (σ {s16:.4}) at k = 16; need decrease and < 0.05"),
    )
}

fn homogeneity() -> Outcome {
    let cfg = EstimatorConfig { r_doubling_rounds: 0, ..Default::default() };
    let k_body = q0();
    let mut worst: f64 = 0.0;
    for l in [q0_raw(), unit_square().translate(Point::new(-0.2, 0.1))] {
        let base = estimate_tk(&k_body, &q0_anchor(), &l, &cfg).unwrap();
        for c in [0.5, 3.0] {
            let scaled = estimate_tk(&k_body, &q0_anchor(), &l.scale(c).unwrap(), &cfg).unwrap();
            worst = worst.max((scaled.point() - base.point() * c).amax());
        }
    }
    outcome(worst <= 1e-12, format!("max |value(cL) − c·value(L)| = {worst:.1e}"))
}

fn symmetry_module() -> Outcome {
    let sq = automorphism_group(&unit_square());
    let tri = automorphism_group(&triangle());
    let q = automorphism_group(&q0());
    let point_is = |fs: &FixedSet, p: Point| matches!(fs, FixedSet::SinglePoint(c) if (c - p).norm() <= 1e-9);
    let pass = sq.kind == SymmetryKind::Dihedral(4)
        && sq.order == 8
        && point_is(&sq.fixed_set, Point::new(0.5, 0.5))
        && tri.order == 6
        && point_is(&tri.fixed_set, Point::new(1.0 / 3.0, 1.0 / 3.0))
        && q.kind == SymmetryKind::Trivial
        && q.order == 1
        && q.fixed_set == FixedSet::WholePlane;
    outcome(pass, format!("square {} (order {}), triangle {} (order {}), Q0 {} (order {})", sq.kind, sq.order, tri.kind, tri.order, q.kind, q.order))
}

fn classical_points() -> Outcome {
    let js = john_center(&unit_square()).unwrap();
    let jt = john_center(&triangle()).unwrap();
    let e_sq = (js - Point::new(0.5, 0.5)).amax();
    let e_tri = (jt - Point::new(1.0 / 3.0, 1.0 / 3.0)).amax();
    let bodies = vec![("square".to_string(), unit_square()), ("triangle".to_string(), triangle()), ("Q0".to_string(), q0_raw())];
    let rows = audit(&bodies, &[Rule::Centroid, Rule::John], 20, &EstimatorConfig { seed: 1010, ..Default::default() });
    let worst = |rule| rows.iter().filter(|r| r.rule == rule).map(|r| r.residual.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let (wc, wj) = (worst(Rule::Centroid), worst(Rule::John));
    let inscribed = john_ellipse(&q0_raw()).unwrap().max_violation(&q0_raw());
    outcome(
        e_sq <= 1e-6 && e_tri <= 1e-6 && wj < 1e-5 && wc < 1e-10,
        format!("john errors {e_sq:.1e} (square), {e_tri:.1e} (triangle); audit max residual centroid {wc:.1e}, john {wj:.1e}; Q0 ellipse violation {inscribed:.1e}"),
    )
}

fn continuity() -> Outcome {
    let cfg = EstimatorConfig::default();
    let k_body = q0();
    let mut r = rng(1111);
    let moved: Vec<Point> = k_body
        .vertices()
        .iter()
        .map(|p| {
            let a: f64 = r.random_range(0.0..std::f64::consts::TAU);
            p + 1e-2 * Point::new(a.cos(), a.sin())
        })
        .collect();
    let perturbed = ConvexPolygon::from_points(&moved).unwrap();
    let a = estimate_tk(&k_body, &q0_anchor(), &k_body, &cfg).unwrap();
    let b = estimate_tk(&k_body, &q0_anchor(), &perturbed, &cfg).unwrap();
    let shift = (a.point() - b.point()).norm();
    let sigma = a.sigma().hypot(b.sigma());
    outcome(shift < 0.1 + 3.0 * sigma, format!("shift {shift:.4}, bound {:.4}", 0.1 + 3.0 * sigma))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("geometry oracle equivalence", geometry_oracle),
        ("weight support and slab bounds", weight_bounds),
        ("Haar sampler correctness", haar_correctness),
        ("ball semigroup property", ball_semigroup),
        ("power-ratio limit utility", power_ratio),
        ("statistical equivariance", equivariance),
        ("convergence to the anchor", convergence),
        ("homogeneity under scaling", homogeneity),
        ("symmetry classification", symmetry_module),
        ("classical points", classical_points),
        ("continuity smoke test", continuity),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {name}: {} [{:.1}s]", i + 1, o.detail, t.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
