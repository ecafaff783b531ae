//! Compound Poisson, symmetric α-stable and tempered stable measures on
//! sequence spaces, their validity conditions and characteristic functionals.

mod seq;
mod tempered;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use seq::{SeqSpec, SeriesBracket, Side, Tail, MAX_TERMS, REL_TOL};
pub use tempered::{tempered_exponent, Sign, TemperedExponentParams, TemperedLaw};

use crate::complex_ext::expm1_i;
use crate::error::{Error, Result};
use crate::seqspace::{DualFunctional, IndexDomain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Drift {
    /// Include every term linear in the functional.
    Full,
    /// Drop linear terms; exact inside codifferences.
    DriftFree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "camelCase")]
pub enum Family {
    /// Lévy measure `Σ_n δ_{λ_n e_n}` on ℓ^p(ℕ).
    CompoundPoisson { lambda: SeqSpec, p: f64 },
    /// Control measure `½ Σ_n k_n^α (δ_{e_n} + δ_{i e_n})` on ℓ^p(ℤ).
    SymmetricAlphaStable { alpha: f64, k: SeqSpec, p: f64 },
    /// Series `Σ_n k_n (θ_{1,n} + i θ_{2,n}) e_n` on ℓ^p(ℕ) with i.i.d.
    /// tempered stable θ's.
    TemperedStable {
        alpha: f64,
        a_minus: f64,
        a_plus: f64,
        lam_minus: f64,
        lam_plus: f64,
        k: SeqSpec,
        p: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(flatten)]
    pub family: Family,
    /// Diagonal of the Gaussian covariance `R`; absent means `R = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian_diag: Option<SeqSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub valid: bool,
    pub failures: Vec<String>,
}

impl MeasureSpec {
    pub fn new(family: Family) -> Self {
        MeasureSpec {
            family,
            gaussian_diag: None,
        }
    }

    pub fn with_gaussian(mut self, diag: SeqSpec) -> Self {
        self.gaussian_diag = Some(diag);
        self
    }

    pub fn domain(&self) -> IndexDomain {
        match self.family {
            Family::SymmetricAlphaStable { .. } => IndexDomain::Integers,
            _ => IndexDomain::Naturals,
        }
    }

    pub fn p(&self) -> f64 {
        match self.family {
            Family::CompoundPoisson { p, .. }
            | Family::SymmetricAlphaStable { p, .. }
            | Family::TemperedStable { p, .. } => p,
        }
    }

    /// `λ` for compound Poisson, `k` otherwise.
    pub fn sequence(&self) -> &SeqSpec {
        match &self.family {
            Family::CompoundPoisson { lambda, .. } => lambda,
            Family::SymmetricAlphaStable { k, .. } | Family::TemperedStable { k, .. } => k,
        }
    }

    /// Stability index of the stable and tempered families.
    pub fn alpha(&self) -> Option<f64> {
        match self.family {
            Family::CompoundPoisson { .. } => None,
            Family::SymmetricAlphaStable { alpha, .. } | Family::TemperedStable { alpha, .. } => Some(alpha),
        }
    }

    pub fn tempered_law(&self) -> Result<Option<TemperedLaw>> {
        match self.family {
            Family::TemperedStable {
                alpha,
                a_minus,
                a_plus,
                lam_minus,
                lam_plus,
                ..
            } => Ok(Some(TemperedLaw::new(alpha, a_minus, a_plus, lam_minus, lam_plus)?)),
            _ => Ok(None),
        }
    }

    /// Diagonal covariance entry `R_nn`.
    pub fn gaussian(&self, n: i64) -> f64 {
        self.gaussian_diag.as_ref().and_then(|r| r.value(n)).unwrap_or(0.0)
    }

    /// Total mass `ξ(E) = Σ_n k_n^α` of the stable control measure, as an
    /// upper bound.
    pub fn stable_xi_total(&self) -> Result<f64> {
        match &self.family {
            Family::SymmetricAlphaStable { alpha, k, .. } => Ok(k.series_sum(IndexDomain::Integers, *alpha)?.upper),
            _ => Err(Error::Unsupported("control mass of a non-stable family".into())),
        }
    }

    pub fn validate(&self) -> ValidityReport {
        let mut failures = Vec::new();
        let domain = self.domain();
        let check_seq = |name: &str, s: &SeqSpec, power: f64, failures: &mut Vec<String>| {
            if let Err(e) = s.validate(domain) {
                failures.push(format!("{name}: {e}"));
                return;
            }
            match s.in_ell(domain, power) {
                Ok(true) => {}
                Ok(false) => failures.push(format!("{name} is not in l^{power}")),
                Err(e) => failures.push(format!("{name}: {e}")),
            }
        };
        match &self.family {
            Family::CompoundPoisson { lambda, p } => {
                if !(*p >= 1.0 && *p < 2.0) {
                    failures.push(format!("p must lie in [1,2), got {p}"));
                }
                check_seq("lambda", lambda, *p, &mut failures);
            }
            Family::SymmetricAlphaStable { alpha, k, p } => {
                if !(*alpha > 0.0 && *alpha < 2.0) || *alpha == 1.0 {
                    failures.push(format!("alpha must lie in (0,2) without 1, got {alpha}"));
                }
                if !(*p >= 1.0 && *p <= 2.0) {
                    failures.push(format!("p must lie in [1,2], got {p}"));
                }
                check_seq("k", k, *alpha, &mut failures);
            }
            Family::TemperedStable {
                alpha,
                a_minus,
                a_plus,
                lam_minus,
                lam_plus,
                k,
                p,
            } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    failures.push(format!("alpha must lie in (0,1), got {alpha}"));
                }
                for (name, v) in [
                    ("a_minus", a_minus),
                    ("a_plus", a_plus),
                    ("lam_minus", lam_minus),
                    ("lam_plus", lam_plus),
                ] {
                    if !(*v > 0.0 && v.is_finite()) {
                        failures.push(format!("{name} must be positive, got {v}"));
                    }
                }
                if !(*p >= 1.0 && *p <= 2.0) {
                    failures.push(format!("p must lie in [1,2], got {p}"));
                }
                check_seq("k", k, *alpha, &mut failures);
            }
        }
        if let Some(r) = &self.gaussian_diag {
            check_seq("gaussian_diag", r, 1.0, &mut failures);
        }
        ValidityReport {
            valid: failures.is_empty(),
            failures,
        }
    }

    pub(crate) fn check_domain(&self, f: &DualFunctional) -> Result<()> {
        if f.domain() != self.domain() {
            return Err(Error::DomainMismatch(format!(
                "functional on {} used with a measure on {}",
                f.domain(),
                self.domain()
            )));
        }
        Ok(())
    }
}

/// `-¼ ⟨R f, f⟩` for the diagonal Gaussian part.
pub(crate) fn gaussian_log_cf(m: &MeasureSpec, f: &DualFunctional) -> f64 {
    if m.gaussian_diag.is_none() {
        return 0.0;
    }
    -0.25 * f.iter().map(|(n, c)| m.gaussian(n) * c.norm_sqr()).sum::<f64>()
}

/// Logarithm of the characteristic functional at `f`.
pub fn log_cf(m: &MeasureSpec, f: &DualFunctional, drift: Drift) -> Result<Complex64> {
    m.check_domain(f)?;
    let seq = m.sequence();
    let mut acc = Complex64::new(gaussian_log_cf(m, f), 0.0);
    match &m.family {
        Family::CompoundPoisson { .. } => {
            for (n, c) in f.iter() {
                if let Some(l) = seq.value(n) {
                    acc += expm1_i(l * c.re);
                }
            }
        }
        Family::SymmetricAlphaStable { alpha, .. } => {
            let mut s = 0.0;
            for (n, c) in f.iter() {
                if let Some(k) = seq.value(n) {
                    s += k.powf(*alpha) * (c.re.abs().powf(*alpha) + c.im.abs().powf(*alpha));
                }
            }
            acc -= 0.5 * s;
        }
        Family::TemperedStable { .. } => {
            let law = m.tempered_law()?.expect("tempered family");
            let psi = |t: f64| match drift {
                Drift::Full => law.exponent_full(t),
                Drift::DriftFree => law.exponent_drift_free(t),
            };
            for (n, c) in f.iter() {
                if let Some(k) = seq.value(n) {
                    acc += psi(k * c.re) + psi(-k * c.im);
                }
            }
        }
    }
    if !(acc.re.is_finite() && acc.im.is_finite()) {
        return Err(Error::Numerical("log characteristic functional is not finite".into()));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn single_atom_cp() -> MeasureSpec {
        MeasureSpec::new(Family::CompoundPoisson {
            lambda: SeqSpec::Explicit {
                start: 0,
                values: vec![2.0 * PI],
                tail: None,
            },
            p: 1.0,
        })
    }

    #[test]
    fn validity_examples() {
        let good = MeasureSpec::new(Family::CompoundPoisson {
            lambda: SeqSpec::PowerLaw {
                lambda0: 1.0,
                gamma: 1.5,
                p: 1.0,
            },
            p: 1.0,
        });
        assert!(good.validate().valid);
        let harmonic = MeasureSpec::new(Family::CompoundPoisson {
            lambda: SeqSpec::PowerLaw {
                lambda0: 1.0,
                gamma: 1.0,
                p: 1.0,
            },
            p: 1.0,
        });
        let r = harmonic.validate();
        assert!(!r.valid);
        assert!(r.failures[0].contains("not in l^1"));
        let tempered = MeasureSpec::new(Family::TemperedStable {
            alpha: 0.5,
            a_minus: 1.0,
            a_plus: 1.0,
            lam_minus: 1.0,
            lam_plus: 1.0,
            k: SeqSpec::Geometric { c: 1.0, r: 0.5 },
            p: 1.0,
        });
        assert!(tempered.validate().valid);
        let bad_alpha = MeasureSpec::new(Family::SymmetricAlphaStable {
            alpha: 1.0,
            k: SeqSpec::Geometric { c: 1.0, r: 0.5 },
            p: 1.5,
        });
        assert!(!bad_alpha.validate().valid);
    }

    #[test]
    fn log_cf_examples() {
        let m = single_atom_cp();
        let f = DualFunctional::real(IndexDomain::Naturals, [(0, 0.5)]).unwrap();
        let v = log_cf(&m, &f, Drift::Full).unwrap();
        assert!((v - Complex64::new(-2.0, 0.0)).norm() < 1e-15);
        assert!((v.exp().re - (-2f64).exp()).abs() < 1e-15);

        let stable = MeasureSpec::new(Family::SymmetricAlphaStable {
            alpha: 1.5,
            k: SeqSpec::Explicit {
                start: 0,
                values: vec![1.0],
                tail: None,
            },
            p: 1.6,
        });
        let g = DualFunctional::real(IndexDomain::Integers, [(0, 1.0)]).unwrap();
        assert_eq!(log_cf(&stable, &g, Drift::Full).unwrap(), Complex64::new(-0.5, 0.0));
        for m in [m, stable] {
            let z = DualFunctional::zero(m.domain());
            assert_eq!(log_cf(&m, &z, Drift::Full).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn gaussian_part_and_domain_checks() {
        let m = single_atom_cp().with_gaussian(SeqSpec::Geometric { c: 2.0, r: 0.5 });
        let f = DualFunctional::real(IndexDomain::Naturals, [(1, 2.0)]).unwrap();
        assert_eq!(log_cf(&m, &f, Drift::Full).unwrap(), Complex64::new(-1.0, 0.0));
        let wrong = DualFunctional::real(IndexDomain::Integers, [(0, 1.0)]).unwrap();
        assert!(matches!(log_cf(&m, &wrong, Drift::Full), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn measure_json_round_trip() {
        let m = MeasureSpec::new(Family::TemperedStable {
            alpha: 0.5,
            a_minus: 1.0,
            a_plus: 2.0,
            lam_minus: 1.0,
            lam_plus: 0.5,
            k: SeqSpec::Geometric { c: 1.0, r: 0.5 },
            p: 1.0,
        });
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"family\":\"temperedStable\""));
        let back: MeasureSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
