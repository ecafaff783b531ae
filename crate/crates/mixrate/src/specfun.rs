//! Gamma, beta and incomplete gamma functions.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_7e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    a
}

/// `sin(πx)` with exact argument reduction.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    (PI * r).sin()
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Γ(x) for real non-pole `x`.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() || is_pole(x) {
        return Err(invalid(format!("gamma has a pole at {x}")));
    }
    if x < 0.5 {
        return Ok(PI / (sin_pi(x) * gamma(1.0 - x)?));
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let a = lanczos_sum(z);
    let v = if z < 140.0 {
        SQRT_2PI * t.powf(z + 0.5) * (-t).exp() * a
    } else {
        let h = t.powf(0.5 * (z + 0.5));
        SQRT_2PI * h * ((-t).exp() * h) * a
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("gamma({x}) overflows")))
    }
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(invalid(format!("ln_gamma needs a positive argument, got {x}")));
    }
    if x < 0.5 {
        return Ok((PI / sin_pi(x)).ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// B(a, b) for `a, b > 0`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(invalid(format!("beta needs positive arguments, got ({a}, {b})")));
    }
    if a + b < 170.0 {
        Ok(gamma(a)? * gamma(b)? / gamma(a + b)?)
    } else {
        Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
    }
}

fn check_inc_args(s: f64, x: f64) -> Result<()> {
    if !(s > 0.0) || !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!(
            "incomplete gamma needs s > 0 and finite x >= 0, got ({s}, {x})"
        )));
    }
    Ok(())
}

fn lower_series(s: f64, x: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    for n in 1..10_000 {
        term *= x / (s + n as f64);
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    (s * x.ln() - x).exp() * sum
}

fn upper_continued_fraction(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (s * x.ln() - x).exp() * h
}

/// Unregularized lower incomplete gamma `γ(s, x) = ∫₀^x t^{s-1} e^{-t} dt`.
pub fn inc_gamma_lower(s: f64, x: f64) -> Result<f64> {
    check_inc_args(s, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < s + 1.0 {
        Ok(lower_series(s, x))
    } else {
        Ok(gamma(s)? - upper_continued_fraction(s, x))
    }
}

/// Unregularized upper incomplete gamma `Γ(s, x) = ∫_x^∞ t^{s-1} e^{-t} dt`.
pub fn inc_gamma_upper(s: f64, x: f64) -> Result<f64> {
    check_inc_args(s, x)?;
    if x < s + 1.0 {
        Ok(gamma(s)? - lower_series(s, x))
    } else {
        Ok(upper_continued_fraction(s, x))
    }
}
