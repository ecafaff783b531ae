//! One-sided tempered stable exponents and the κ-compensated two-sided law.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_ext::{cexpm1, cln1p};
use crate::error::{invalid, Result};
use crate::specfun::{gamma, inc_gamma_lower, inc_gamma_upper};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperedExponentParams {
    pub a: f64,
    pub lam: f64,
    pub alpha: f64,
    pub side: Sign,
}

impl TemperedExponentParams {
    fn check(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!(
                "tempered exponent needs alpha in (0,1), got {}",
                self.alpha
            )));
        }
        if !(self.a > 0.0 && self.lam > 0.0) || !self.a.is_finite() || !self.lam.is_finite() {
            return Err(invalid("tempered exponent needs a > 0 and lam > 0"));
        }
        Ok(())
    }
}

/// `a Γ(-α) λ^α [(1 - i t/λ)^α - 1]` for jumps on the positive half-line;
/// the minus side is the same expression at `-t`.
pub fn tempered_exponent(params: &TemperedExponentParams, t: f64) -> Result<Complex64> {
    params.check()?;
    let g = gamma(-params.alpha)?;
    Ok(one_sided(params.a * g, params.lam, params.alpha, params.side, t))
}

fn one_sided(a_gamma: f64, lam: f64, alpha: f64, side: Sign, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let t = match side {
        Sign::Plus => t,
        Sign::Minus => -t,
    };
    let z = cln1p(Complex64::new(0.0, -t / lam)) * alpha;
    cexpm1(z) * (a_gamma * lam.powf(alpha))
}

/// `∫ u κ(u) a e^{-λu} u^{-1-α} du` over `u > 0` with
/// `κ(u) = 1_{u<1} + u^{-1} 1_{u≥1}`.
fn kappa_drift(a: f64, lam: f64, alpha: f64) -> Result<f64> {
    let lower = inc_gamma_lower(1.0 - alpha, lam)?;
    let upper_neg = (lam.powf(-alpha) * (-lam).exp() - inc_gamma_upper(1.0 - alpha, lam)?) / alpha;
    Ok(a * (lam.powf(alpha - 1.0) * lower + lam.powf(alpha) * upper_neg))
}

/// Two-sided tempered stable law with Lévy density
/// `a₋ e^{-λ₋|u|}|u|^{-1-α}` on `u < 0` and `a₊ e^{-λ₊u}u^{-1-α}` on `u > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemperedLaw {
    pub alpha: f64,
    pub a_minus: f64,
    pub a_plus: f64,
    pub lam_minus: f64,
    pub lam_plus: f64,
    gamma_neg_alpha: f64,
    drift: f64,
}

impl TemperedLaw {
    pub fn new(alpha: f64, a_minus: f64, a_plus: f64, lam_minus: f64, lam_plus: f64) -> Result<Self> {
        for (side, a, lam) in [(Sign::Minus, a_minus, lam_minus), (Sign::Plus, a_plus, lam_plus)] {
            TemperedExponentParams { a, lam, alpha, side }.check()?;
        }
        let drift = kappa_drift(a_plus, lam_plus, alpha)? - kappa_drift(a_minus, lam_minus, alpha)?;
        Ok(Self {
            alpha,
            a_minus,
            a_plus,
            lam_minus,
            lam_plus,
            gamma_neg_alpha: gamma(-alpha)?,
            drift,
        })
    }

    /// The κ-drift `∫ u κ(u) ρ(du)` (plus side minus minus side).
    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn gamma_neg_alpha(&self) -> f64 {
        self.gamma_neg_alpha
    }

    /// Uncompensated exponent `ψ₊(t) + ψ₋(t)`.
    pub fn exponent_drift_free(&self, t: f64) -> Complex64 {
        let g = self.gamma_neg_alpha;
        one_sided(self.a_plus * g, self.lam_plus, self.alpha, Sign::Plus, t)
            + one_sided(self.a_minus * g, self.lam_minus, self.alpha, Sign::Minus, t)
    }

    /// κ-compensated exponent `ψ₊(t) + ψ₋(t) - i t d`.
    pub fn exponent_full(&self, t: f64) -> Complex64 {
        self.exponent_drift_free(t) - Complex64::new(0.0, t * self.drift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_examples() {
        let plus = TemperedExponentParams {
            a: 1.0,
            lam: 1.0,
            alpha: 0.5,
            side: Sign::Plus,
        };
        assert_eq!(tempered_exponent(&plus, 0.0).unwrap(), Complex64::new(0.0, 0.0));
        let v = tempered_exponent(&plus, 1.0).unwrap();
        assert!((v.re + 0.34981).abs() < 1e-4 && (v.im - 1.61327).abs() < 1e-4, "{v}");
        // quadrature of the defining integral at 30 digits
        let quad = Complex64::new(-0.349_826_073_878_433_3, 1.613_251_551_723_148_3);
        assert!((v - quad).norm() < 1e-13 * quad.norm());
        let minus = TemperedExponentParams {
            side: Sign::Minus,
            ..plus
        };
        let w = tempered_exponent(&minus, 1.0).unwrap();
        let mirrored = tempered_exponent(&plus, -1.0).unwrap();
        assert_eq!(w, mirrored);
        assert!((w - v.conj()).norm() < 1e-15);
        assert!(tempered_exponent(&TemperedExponentParams { alpha: 1.2, ..plus }, 1.0).is_err());
    }

    #[test]
    fn symmetric_law_has_no_drift() {
        let law = TemperedLaw::new(0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(law.drift(), 0.0);
        let e = law.exponent_full(0.7);
        assert!(e.im.abs() < 1e-15 && e.re < 0.0);
    }

    #[test]
    fn drift_matches_direct_integral() {
        // ∫₀^1 u^{-α} e^{-λu} du + ∫₁^∞ u^{-1-α} e^{-λu} du by composite Simpson
        // after u = v^{1/(1-α)} on the first piece and u = 1/w on the second.
        let (a, lam, alpha) = (1.3, 0.8, 0.4);
        let simpson = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
            let m = 20_000;
            let h = (hi - lo) / m as f64;
            let mut s = f(lo) + f(hi);
            for i in 1..m {
                let x = lo + i as f64 * h;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
            }
            s * h / 3.0
        };
        let e = 1.0 / (1.0 - alpha);
        let first = simpson(&|v: f64| e * (-lam * v.powf(e)).exp(), 0.0, 1.0);
        let second = simpson(
            &|w: f64| {
                if w == 0.0 {
                    0.0
                } else {
                    w.powf(alpha - 1.0) * (-lam / w).exp()
                }
            },
            0.0,
            1.0,
        );
        let want = a * (first + second);
        let law = TemperedLaw::new(alpha, 0.1, a, 2.0, lam).unwrap();
        let got = law.drift() + kappa_drift(0.1, 2.0, alpha).unwrap();
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
    }
}
