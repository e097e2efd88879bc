use hypgeo::hyptrig::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Root of `f` on `[lo, hi]` by plain bisection.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f(lo) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn regular_pentagon_side_is_golden_root() {
    let x = bisect(|x| x * x - x - 1.0, 1.0, 2.0);
    let s = regular_pentagon_side::<f64>();
    assert!((s.cosh() - x).abs() < 1e-12);
    let p = pentagon_from_legs(s, s).unwrap();
    for side in p.sides() {
        assert!((side - 1.061_275_061_905_035_7).abs() < 1e-12);
    }
}

#[test]
fn regular_hexagon_side_is_quadratic_root() {
    let x = bisect(|x| x * x - x - 2.0, 1.0, 3.0);
    let s = regular_hexagon_side::<f64>();
    assert!((s.cosh() - x).abs() < 1e-12);
    let h = hexagon_solve(s, s, s).unwrap();
    for side in h.sides() {
        assert!((side - 1.316_957_896_924_816_7).abs() < 1e-12);
    }
    assert!(h.altitude_bound_holds(1e-12));
}

#[test]
fn collar_width_reference_values() {
    // 40-digit references: asinh(1/sinh 1) and twice that.
    assert!((collar_width(2.0_f64) - 0.771_936_832_905_304_7).abs() < 1e-14);
    assert!((crossing_length_bound(2.0_f64) - 1.543_873_665_810_609_5).abs() < 1e-14);
}

#[test]
fn collar_width_strictly_decreasing() {
    let mut prev = f64::INFINITY;
    for i in 1..2000 {
        let w = collar_width(i as f64 * 0.01);
        assert!(w < prev);
        prev = w;
    }
}

#[test]
fn random_pentagons_satisfy_identities() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    let mut n = 0;
    while n < 10_000 {
        let a: f64 = rng.gen_range(0.1..3.0);
        let b: f64 = rng.gen_range(0.1..3.0);
        if f64::sinh(a) * f64::sinh(b) < 1.05 {
            continue;
        }
        let p = pentagon_from_legs(a, b).unwrap();
        assert!(max_residual(&p.residuals()) < 1e-10, "{p:?} {:?}", p.residuals());
        n += 1;
    }
}

#[test]
fn random_hexagons_satisfy_identities_and_round_trip() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(12);
    for _ in 0..10_000 {
        let (a, b, c): (f64, f64, f64) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        let h = hexagon_solve(a, b, c).unwrap();
        assert!(max_residual(&h.residuals()) < 1e-9, "{h:?} {:?}", h.residuals());
        assert!(h.altitude_bound_holds(1e-12));
        let r = h.rotated().unwrap();
        // solving from (gamma, alpha, beta) gives back (b, c, a) on the other triple
        assert!((r.gamma - b).abs() < 1e-10 * b.max(1.0));
        assert!((r.alpha - c).abs() < 1e-10 * c.max(1.0));
        assert!((r.beta - a).abs() < 1e-10 * a.max(1.0));
    }
}
