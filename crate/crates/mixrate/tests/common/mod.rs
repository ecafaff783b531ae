#![allow(dead_code)]

use mixrate::measures::{Family, MeasureSpec, SeqSpec, Sign};
use mixrate::seqspace::{dual_norm, DualFunctional, IndexDomain};
use mixrate::shifts::{Direction, WeightRule, WeightedShiftOperator};
use mixrate::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn sup(f: &DualFunctional) -> f64 {
    dual_norm(f, f64::INFINITY).unwrap()
}

/// Single atom `2π e_0` under the identity.
pub fn cp_resonant() -> (MeasureSpec, WeightedShiftOperator) {
    let m = MeasureSpec::new(Family::CompoundPoisson {
        lambda: SeqSpec::Explicit {
            start: 0,
            values: vec![2.0 * std::f64::consts::PI],
            tail: None,
        },
        p: 1.0,
    });
    (m, WeightedShiftOperator::identity())
}

/// `λ_n = (n+1)^{-3/2}` on ℓ¹(ℕ) with the backward shift that leaves it invariant.
pub fn cp_powerlaw() -> (MeasureSpec, WeightedShiftOperator) {
    let m = MeasureSpec::new(Family::CompoundPoisson {
        lambda: SeqSpec::PowerLaw {
            lambda0: 1.0,
            gamma: 1.5,
            p: 1.0,
        },
        p: 1.0,
    });
    let t = WeightedShiftOperator::new(Direction::BackwardN, WeightRule::PowerLawP6 { gamma: 1.5, p: 1.0 }).unwrap();
    (m, t)
}

pub fn two_sided(left: f64, right: f64) -> WeightedShiftOperator {
    WeightedShiftOperator::new(
        Direction::ForwardZ,
        WeightRule::TwoSided {
            left,
            right,
            head: vec![],
        },
    )
    .unwrap()
}

/// α = 1.5 on ℓ^{1.6}(ℤ), forward shift with both tail ratios 1/2.
pub fn stable_forward() -> (MeasureSpec, WeightedShiftOperator) {
    let t = two_sided(2.0, 0.5);
    let m = MeasureSpec::new(Family::SymmetricAlphaStable {
        alpha: 1.5,
        k: SeqSpec::FromShift {
            k0: 1.0,
            operator: t.clone(),
        },
        p: 1.6,
    });
    (m, t)
}

/// α = 1/2, unit tilts and weights, `k_l = 2^{-l}`, backward shift with weight 2.
pub fn tempered_geometric() -> (MeasureSpec, WeightedShiftOperator) {
    let m = MeasureSpec::new(Family::TemperedStable {
        alpha: 0.5,
        a_minus: 1.0,
        a_plus: 1.0,
        lam_minus: 1.0,
        lam_plus: 1.0,
        k: SeqSpec::Geometric { c: 1.0, r: 0.5 },
        p: 1.0,
    });
    let t = WeightedShiftOperator::new(Direction::BackwardN, WeightRule::Constant { c: 2.0 }).unwrap();
    (m, t)
}

pub fn invariant_pairs() -> Vec<(&'static str, MeasureSpec, WeightedShiftOperator)> {
    let (a, b) = cp_powerlaw();
    let (c, d) = stable_forward();
    let (e, f) = tempered_geometric();
    vec![("compound Poisson", a, b), ("stable", c, d), ("tempered", e, f)]
}

/// Random functional with up to `max_len` complex entries in `[-2, 2]²`.
pub fn random_functional(rng: &mut ChaCha8Rng, domain: IndexDomain, max_len: usize) -> DualFunctional {
    let len = rng.random_range(1..=max_len);
    let (lo, hi) = match domain {
        IndexDomain::Naturals => (0, 20),
        IndexDomain::Integers => (-10, 10),
    };
    let entries: Vec<(i64, Complex64)> = (0..len)
        .map(|_| {
            let i = rng.random_range(lo..=hi);
            (
                i,
                Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            )
        })
        .collect();
    let f = DualFunctional::new(domain, entries).unwrap();
    if f.is_empty() {
        DualFunctional::unit(domain, lo.max(0)).unwrap()
    } else {
        f
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `∫₀^∞ (e^{i s t u} - 1) a e^{-λu} u^{-1-α} du` by tanh-sinh quadrature, with
/// `s = ±1` for the side, on pieces short against the oscillation. The first
/// piece is integrated in `v = u^{1-α}`, where the integrand is smooth.
pub fn tempered_exponent_quad(a: f64, lam: f64, alpha: f64, side: Sign, t: f64) -> Complex64 {
    let t = match side {
        Sign::Plus => t,
        Sign::Minus => -t,
    };
    let density = |u: f64| a * (-lam * u).exp() * u.powf(-1.0 - alpha);
    let re = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            -2.0 * (0.5 * t * u).sin().powi(2) * density(u)
        }
    };
    let im = |u: f64| if u == 0.0 { 0.0 } else { (t * u).sin() * density(u) };
    let upper = 1.0 + 70.0 / lam;
    let step = (1.0 / t.abs().max(1.0)).min(0.5);
    let k = 1.0 / (1.0 - alpha);
    let jac = |v: f64| k * v.powf(k - 1.0);
    let vmax = step.powf(1.0 / k);
    let r = quadrature::integrate(|v| re(v.powf(k)) * jac(v), 0.0, vmax, 1e-15).integral;
    let i = quadrature::integrate(|v| im(v.powf(k)) * jac(v), 0.0, vmax, 1e-15).integral;
    let mut acc = Complex64::new(r, i);
    let mut lo = step;
    while lo < upper {
        let hi = (lo + step).min(upper);
        let r = quadrature::integrate(re, lo, hi, 1e-15).integral;
        let i = quadrature::integrate(im, lo, hi, 1e-15).integral;
        acc += Complex64::new(r, i);
        lo = hi;
    }
    acc
}

/// Least-squares slope and r² of `ln v` against `n`; the geometric ratio is `exp(slope)`.
pub fn log_linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(n, v)| (n, v.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope.exp(), sxy * sxy / (sxx * syy))
}
