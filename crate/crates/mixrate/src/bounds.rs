//! Codifference upper bounds and explicit decay rates for shifted orbits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measures::{Family, MeasureSpec, SeqSpec, TemperedLaw};
use crate::seqspace::{dual_norm, DualFunctional, IndexDomain};
use crate::shifts::{RateParams, WeightedShiftOperator};

pub use crate::specfun::{beta, gamma, inc_gamma_lower, inc_gamma_upper, ln_gamma};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BoundKind {
    Equal,
    NotEqual,
}

/// Truncation level `c` of the control-measure bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Cutoff {
    Value(f64),
    /// Stable: `c = (‖x‖‖y‖)^{-1/2}`. Tempered: the `c → ∞` limit.
    Auto,
    /// Stable: the cutoff tuned to the pair `(x, T*ⁿy)` for a forward shift,
    /// where `norms = ‖x‖_∞‖y‖_∞` refers to the unshifted `y`.
    Schedule {
        rate: RateParams,
        n: u32,
        norms: f64,
    },
}

fn check_p(p: f64, lo: f64, hi: f64) -> Result<()> {
    if !(p >= lo && p <= hi) {
        return Err(invalid(format!("p must lie in [{lo},{hi}], got {p}")));
    }
    Ok(())
}

/// `½|Re Σ_n R_nn conj(x_n) y_n|` (imaginary part for `NotEqual`).
fn gaussian_term(m: &MeasureSpec, x: &DualFunctional, y: &DualFunctional, kind: BoundKind) -> f64 {
    if m.gaussian_diag.is_none() {
        return 0.0;
    }
    let s = x
        .iter()
        .map(|(n, c)| c.conj() * y.get(n) * m.gaussian(n))
        .sum::<num_complex::Complex64>();
    0.5 * match kind {
        BoundKind::Equal => s.re.abs(),
        BoundKind::NotEqual => s.im.abs(),
    }
}

/// Pairs `(s, t)` of projections of `x` and `y` that enter the two atom sums
/// at index `n`: the real atom and the imaginary atom.
fn atom_pairs(x: num_complex::Complex64, y: num_complex::Complex64, kind: BoundKind) -> [(f64, f64); 2] {
    match kind {
        BoundKind::Equal => [(x.re, y.re), (x.im, y.im)],
        BoundKind::NotEqual => [(x.re, y.im), (x.im, y.re)],
    }
}

fn check_pair(m: &MeasureSpec, x: &DualFunctional, y: &DualFunctional) -> Result<()> {
    m.check_domain(x)?;
    m.check_domain(y)
}

/// Lévy-measure bound for compound Poisson measures.
pub fn levy_bound(m: &MeasureSpec, x: &DualFunctional, y: &DualFunctional, p: f64, kind: BoundKind) -> Result<f64> {
    check_p(p, 0.0, 2.0)?;
    check_pair(m, x, y)?;
    let Family::CompoundPoisson { lambda, .. } = &m.family else {
        return Err(Error::Unsupported("levy_bound needs a compound Poisson measure".into()));
    };
    let mut s = 0.0;
    for n in x.joint_support(y) {
        let Some(l) = lambda.value(n) else { continue };
        let (xn, yn) = (x.get(n), y.get(n));
        let t = match kind {
            BoundKind::Equal => yn.re,
            BoundKind::NotEqual => yn.im,
        };
        s += (l * xn.re * l * t).abs().powf(p / 2.0);
    }
    Ok(gaussian_term(m, x, y, kind) + 2f64.powf(4.0 - p) * s)
}

/// Closed-form stable control bound
/// `2^{5-p} c^{p-α}/(p-α) · J + 32 ξ(E)/(α c^α)`.
pub fn stable_control_closed_form(alpha: f64, p: f64, c: f64, j: f64, xi_total: f64) -> Result<f64> {
    if !(p > alpha) {
        return Err(invalid(format!(
            "stable control bound needs p > alpha, got p={p}, alpha={alpha}"
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("cutoff must be positive and finite, got {c}")));
    }
    Ok(2f64.powf(5.0 - p) * c.powf(p - alpha) / (p - alpha) * j + 32.0 * xi_total / (alpha * c.powf(alpha)))
}

/// `Σ_n w_n Σ_atoms |s t|^{p/2}` with `w_n = k_n^{power}`.
fn weighted_atom_sum(k: &SeqSpec, power: f64, x: &DualFunctional, y: &DualFunctional, p: f64, kind: BoundKind) -> f64 {
    let mut s = 0.0;
    for n in x.joint_support(y) {
        let Some(kn) = k.value(n) else { continue };
        let w = kn.powf(power);
        for (a, b) in atom_pairs(x.get(n), y.get(n), kind) {
            s += w * (a * b).abs().powf(p / 2.0);
        }
    }
    s
}

/// Cutoff `c_n` of the stable schedule.
fn schedule_cutoff(rate: &RateParams, alpha: f64, p: f64, n: u32, norm_prod: f64) -> Result<f64> {
    let b = rate.eta_plus.powf(p / 2.0);
    let a = rate.eta_minus.powf(alpha - p / 2.0);
    let n = n as f64;
    let base = norm_prod.powf(-0.5);
    if b > a {
        Ok(base * rate.eta_plus.powf(-n / 2.0))
    } else if b < a {
        Ok(base * rate.eta_minus.powf((0.5 - alpha / p) * n))
    } else {
        Err(invalid(
            "cutoff schedule is singular when eta_plus^{p/2} = eta_minus^{alpha-p/2}",
        ))
    }
}

/// Control-measure bound for the stable and tempered families.
pub fn control_bound(
    m: &MeasureSpec,
    x: &DualFunctional,
    y: &DualFunctional,
    p: f64,
    cutoff: Cutoff,
    kind: BoundKind,
) -> Result<f64> {
    check_p(p, 0.0, 2.0)?;
    check_pair(m, x, y)?;
    let g = gaussian_term(m, x, y, kind);
    match &m.family {
        Family::SymmetricAlphaStable { alpha, k, .. } => {
            let j = 0.5 * weighted_atom_sum(k, *alpha, x, y, p, kind);
            let xi = m.stable_xi_total()?;
            let norm_prod = dual_norm(x, f64::INFINITY)? * dual_norm(y, f64::INFINITY)?;
            let c = match cutoff {
                Cutoff::Value(c) => c,
                _ if norm_prod == 0.0 => return Ok(g),
                Cutoff::Auto => norm_prod.powf(-0.5),
                Cutoff::Schedule { rate, n, norms } => schedule_cutoff(&rate, *alpha, p, n, norms)?,
            };
            Ok(g + stable_control_closed_form(*alpha, p, c, j, xi)?)
        }
        Family::TemperedStable {
            alpha,
            a_minus,
            a_plus,
            lam_minus,
            lam_plus,
            k,
            ..
        } => {
            check_p(p, 1.0, 2.0)?;
            let law = m.tempered_law()?.expect("tempered family");
            match cutoff {
                Cutoff::Auto => {
                    Ok(g + 2f64.powf(4.0 - p) * temp_prefactor(&law, p)? * weighted_atom_sum(k, p, x, y, p, kind))
                }
                Cutoff::Value(c) => {
                    if !(c > 0.0 && c.is_finite()) {
                        return Err(invalid(format!("cutoff must be positive and finite, got {c}")));
                    }
                    // ∫_{|u| ≤ c} |u|^p ρ(z,du) with ρ(z,du) = a e^{-λ|u|/k}|u|^{-1-α}du per side
                    let mut inner = 0.0;
                    for n in x.joint_support(y) {
                        let Some(kn) = k.value(n) else { continue };
                        let mut trunc = 0.0;
                        for (a, lam) in [(*a_minus, *lam_minus), (*a_plus, *lam_plus)] {
                            let rate = lam / kn;
                            trunc += a * rate.powf(alpha - p) * inc_gamma_lower(p - alpha, rate * c)?;
                        }
                        for (s, t) in atom_pairs(x.get(n), y.get(n), kind) {
                            inner += kn.powf(*alpha) * trunc * (s * t).abs().powf(p / 2.0);
                        }
                    }
                    let mass = k.series_sum(IndexDomain::Naturals, *alpha)?.upper;
                    let tail = 64.0 * (a_minus + a_plus) / (alpha * c.powf(*alpha)) * mass;
                    Ok(g + 2f64.powf(4.0 - p) * inner + tail)
                }
                Cutoff::Schedule { .. } => Err(Error::Unsupported(
                    "cutoff schedules are defined for the stable family".into(),
                )),
            }
        }
        Family::CompoundPoisson { .. } => Err(Error::Unsupported("compound Poisson measures use levy_bound".into())),
    }
}

/// `2^{4-p} Σ_l (λ_l λ_{l+n})^{p/2}`.
pub fn poisson_shift_bound(lambda: &SeqSpec, p: f64, n: u64) -> Result<f64> {
    if !(1.0..2.0).contains(&p) {
        return Err(invalid(format!("p must lie in [1,2), got {p}")));
    }
    lambda.validate(IndexDomain::Naturals)?;
    Ok(2f64.powf(4.0 - p) * lambda.pair_sum(p / 2.0, n)?.upper)
}

/// `B(1-γ/2, γ-1) n^{-(γ-1)}` for `1 < γ < 2`, `B(ε/2, 1-ε) n^{-(1-ε)}` for `γ ≥ 2`.
fn power_law_pair_rate(gamma: f64, n: u64, epsilon: f64) -> Result<f64> {
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(invalid(format!("gamma must exceed 1, got {gamma}")));
    }
    if n == 0 {
        return Err(invalid("rate formulas need n >= 1"));
    }
    let n = n as f64;
    if gamma < 2.0 {
        Ok(beta(1.0 - gamma / 2.0, gamma - 1.0)? * n.powf(1.0 - gamma))
    } else {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(invalid(format!("epsilon must lie in (0,1), got {epsilon}")));
        }
        Ok(beta(epsilon / 2.0, 1.0 - epsilon)? * n.powf(epsilon - 1.0))
    }
}

/// Explicit rate `2^{4-p} λ₀^p B(·,·) n^{-(·)}` for `λ_l = λ₀(l+1)^{-γ/p}`.
pub fn poisson_rate(lambda0: f64, gamma: f64, p: f64, n: u64, epsilon: f64) -> Result<f64> {
    check_p(p, 1.0, 2.0)?;
    Ok(2f64.powf(4.0 - p) * lambda0.powf(p) * power_law_pair_rate(gamma, n, epsilon)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableShiftRate {
    /// `max(η₋^{2α/p-1}, η₊)^{αn/2}`.
    pub envelope: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// `K₁ B^n + K₂ η₋^{(α+p/2)n} + K₃ A^n` with `B = η₊^{p/2}`, `A = η₋^{α-p/2}`.
    pub pre_rate: f64,
    /// `K₁ B^n + (K₂ + K₃) A^n`, an upper bound for `k₀^{-α} Σ_l k_l^α Π_{j=l+1}^{l+n} ω_j^{p/2}`.
    pub pre_rate_certified: f64,
}

pub fn stable_shift_rate(rp: &RateParams, alpha: f64, p: f64, n: u32) -> Result<StableShiftRate> {
    if !(alpha > 0.0 && alpha < 2.0) || alpha == 1.0 {
        return Err(invalid(format!("alpha must lie in (0,2) without 1, got {alpha}")));
    }
    check_p(p, 1.0, 2.0)?;
    if !(p > alpha) {
        return Err(invalid(format!("p must exceed alpha, got p={p}, alpha={alpha}")));
    }
    for (name, eta) in [("eta_minus", rp.eta_minus), ("eta_plus", rp.eta_plus)] {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(invalid(format!("{name} must lie in (0,1), got {eta}")));
        }
    }
    let (em, ep) = (rp.eta_minus, rp.eta_plus);
    let b = ep.powf(p / 2.0);
    let a = em.powf(alpha - p / 2.0);
    if ((b - a) / b.max(a)).abs() < 1e-12 {
        return Err(invalid(format!(
            "eta_plus^(p/2) = eta_minus^(alpha-p/2) = {b}: the constants K1 and K3 are singular"
        )));
    }
    let k1 = 1.0 / (1.0 - ep.powf(alpha)) + a / (b - a);
    let k2 = 1.0 / (1.0 - em.powf(alpha));
    let k3 = -a / (b - a) * (a / b);
    let nf = n as f64;
    let envelope = em.powf(2.0 * alpha / p - 1.0).max(ep).powf(alpha * nf / 2.0);
    let (bn, an) = (b.powf(nf), a.powf(nf));
    Ok(StableShiftRate {
        envelope,
        k1,
        k2,
        k3,
        pre_rate: k1 * bn + k2 * em.powf((alpha + p / 2.0) * nf) + k3 * an,
        pre_rate_certified: k1 * bn + (k2 + k3) * an,
    })
}

/// Bound on `sup |C(x, T*ⁿy)| / (‖x‖_∞‖y‖_∞)^{α/2}` for a stable measure whose
/// weights `k` are generated by the forward shift `t` itself.
pub fn stable_shift_bound(m: &MeasureSpec, t: &WeightedShiftOperator, n: u32) -> Result<f64> {
    let Family::SymmetricAlphaStable { alpha, k, p } = &m.family else {
        return Err(Error::Unsupported("stable_shift_bound needs a stable measure".into()));
    };
    let k0 = match k {
        SeqSpec::FromShift { k0, operator } if operator == t => *k0,
        _ => {
            return Err(Error::Unsupported(
                "stable_shift_bound needs k generated by the same forward shift".into(),
            ))
        }
    };
    let rp = t.rate_params()?;
    if rp.q_minus != 0 || rp.q_plus != 1 {
        return Err(Error::Unsupported(
            "stable_shift_bound needs weights without head exceptions".into(),
        ));
    }
    let (alpha, p) = (*alpha, *p);
    let r = stable_shift_rate(&rp, alpha, p, n)?;
    let xi = m.stable_xi_total()?;
    let nf = n as f64;
    let lead = 2f64.powf(5.0 - p) / (p - alpha) * k0.powf(alpha) * r.pre_rate_certified;
    let tail = 32.0 * xi / alpha;
    let b = rp.eta_plus.powf(p / 2.0);
    let a = rp.eta_minus.powf(alpha - p / 2.0);
    if b > a {
        let e = rp.eta_plus;
        Ok(lead * e.powf(-(p - alpha) * nf / 2.0) + tail * e.powf(alpha * nf / 2.0))
    } else {
        let e = rp.eta_minus;
        let s = alpha / p - 0.5;
        Ok(lead * e.powf(-s * (p - alpha) * nf) + tail * e.powf(s * alpha * nf))
    }
}

/// `(a₋λ₋^{α-p} + a₊λ₊^{α-p}) Γ(p-α)`.
pub fn temp_prefactor(law: &TemperedLaw, p: f64) -> Result<f64> {
    let e = law.alpha - p;
    Ok((law.a_minus * law.lam_minus.powf(e) + law.a_plus * law.lam_plus.powf(e)) * gamma(p - law.alpha)?)
}

/// Tempered stable bound in the `c → ∞` limit.
pub fn temp_bound(m: &MeasureSpec, x: &DualFunctional, y: &DualFunctional, kind: BoundKind) -> Result<f64> {
    if !matches!(m.family, Family::TemperedStable { .. }) {
        return Err(Error::Unsupported("temp_bound needs a tempered stable measure".into()));
    }
    control_bound(m, x, y, m.p(), Cutoff::Auto, kind)
}

/// `2^{5-p} (a₋λ₋^{α-p} + a₊λ₊^{α-p}) Γ(p-α) Σ_l (k_l k_{l+n})^{p/2}`.
pub fn temp_shift_bound(k: &SeqSpec, law: &TemperedLaw, p: f64, n: u64) -> Result<f64> {
    check_p(p, 1.0, 2.0)?;
    k.validate(IndexDomain::Naturals)?;
    Ok(2f64.powf(5.0 - p) * temp_prefactor(law, p)? * k.pair_sum(p / 2.0, n)?.upper)
}

/// Explicit rate for `k_l = k₀(l+1)^{-γ/p}`.
pub fn temp_rate(k0: f64, gamma: f64, p: f64, n: u64, epsilon: f64, law: &TemperedLaw) -> Result<f64> {
    check_p(p, 1.0, 2.0)?;
    Ok(2f64.powf(5.0 - p) * temp_prefactor(law, p)? * k0.powf(p) * power_law_pair_rate(gamma, n, epsilon)?)
}
