//! Codifferences `C^=`, `C^≠`, `C^{φ,ψ}` and the correlation sequence
//! `I_n(f, g)` of exponential-series observables.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_ext::{cexpm1, expm1_i};
use crate::error::{invalid, Error, Result};
use crate::measures::{log_cf, Drift, Family, MeasureSpec};
use crate::seqspace::{pairing, BasisAtom, DualFunctional, Phase};
use crate::shifts::{Direction, WeightedShiftOperator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One of `±Re`, `±Im`, applied to a complex pairing value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Proj {
    #[serde(rename = "+Re")]
    PlusRe,
    #[serde(rename = "-Re")]
    MinusRe,
    #[serde(rename = "+Im")]
    PlusIm,
    #[serde(rename = "-Im")]
    MinusIm,
}

impl Proj {
    /// The unit `u` with `φ(w) = Re(u·w)`.
    pub fn unit(self) -> Complex64 {
        match self {
            Proj::PlusRe => Complex64::new(1.0, 0.0),
            Proj::MinusRe => Complex64::new(-1.0, 0.0),
            Proj::PlusIm => Complex64::new(0.0, -1.0),
            Proj::MinusIm => Complex64::new(0.0, 1.0),
        }
    }

    pub fn apply(self, w: Complex64) -> f64 {
        match self {
            Proj::PlusRe => w.re,
            Proj::MinusRe => -w.re,
            Proj::PlusIm => w.im,
            Proj::MinusIm => -w.im,
        }
    }

    /// `u·f`, exact in floating point.
    pub fn rotate(self, f: &DualFunctional) -> DualFunctional {
        match self {
            Proj::PlusRe => f.clone(),
            Proj::MinusRe => f.neg(),
            Proj::PlusIm => f.mul_neg_i(),
            Proj::MinusIm => f.mul_i(),
        }
    }
}

impl fmt::Display for Proj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Proj::PlusRe => "+Re",
            Proj::MinusRe => "-Re",
            Proj::PlusIm => "+Im",
            Proj::MinusIm => "-Im",
        };
        f.write_str(s)
    }
}

/// Argument transformation applied before evaluating `C^=` or `C^≠`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rot {
    Id,
    Neg,
    NegI,
    I,
}

impl Rot {
    fn apply(self, f: &DualFunctional) -> DualFunctional {
        match self {
            Rot::Id => f.clone(),
            Rot::Neg => f.neg(),
            Rot::NegI => f.mul_neg_i(),
            Rot::I => f.mul_i(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Base {
    Equal,
    NotEqual,
}

const TABLE: [(Proj, Proj, Base, Rot); 12] = [
    (Proj::PlusRe, Proj::MinusRe, Base::Equal, Rot::Id),
    (Proj::MinusRe, Proj::PlusRe, Base::Equal, Rot::Neg),
    (Proj::PlusIm, Proj::MinusIm, Base::Equal, Rot::NegI),
    (Proj::MinusIm, Proj::PlusIm, Base::Equal, Rot::I),
    (Proj::PlusRe, Proj::MinusIm, Base::NotEqual, Rot::Id),
    (Proj::MinusRe, Proj::PlusIm, Base::NotEqual, Rot::Neg),
    (Proj::PlusIm, Proj::PlusRe, Base::NotEqual, Rot::NegI),
    (Proj::MinusIm, Proj::MinusRe, Base::NotEqual, Rot::I),
    (Proj::MinusIm, Proj::PlusRe, Base::NotEqual, Rot::Id),
    (Proj::PlusIm, Proj::MinusRe, Base::NotEqual, Rot::Neg),
    (Proj::PlusRe, Proj::PlusIm, Base::NotEqual, Rot::NegI),
    (Proj::MinusRe, Proj::MinusIm, Base::NotEqual, Rot::I),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhiPsi {
    pub phi: Proj,
    pub psi: Proj,
}

impl PhiPsi {
    pub fn new(phi: Proj, psi: Proj) -> Result<Self> {
        let pair = PhiPsi { phi, psi };
        pair.row()?;
        Ok(pair)
    }

    /// The twelve admissible pairs in table order.
    pub fn all() -> Vec<PhiPsi> {
        TABLE.iter().map(|&(phi, psi, _, _)| PhiPsi { phi, psi }).collect()
    }

    fn row(&self) -> Result<(Base, Rot)> {
        TABLE
            .iter()
            .find(|(phi, psi, _, _)| *phi == self.phi && *psi == self.psi)
            .map(|&(_, _, b, r)| (b, r))
            .ok_or_else(|| Error::Unsupported(format!("pair ({}, {}) has no table row", self.phi, self.psi)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CodiffKind {
    Equal,
    NotEqual,
    General(PhiPsi),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodifferenceValue {
    pub value: Complex64,
    pub kind: CodiffKind,
}

/// `|a|^α + |b|^α - |a-b|^α` without cancellation when `|b| ≪ |a|`.
pub(crate) fn stable_g(a: f64, b: f64, alpha: f64) -> f64 {
    let (a, b) = if a.abs() >= b.abs() { (a, b) } else { (b, a) };
    if a == 0.0 {
        return 0.0;
    }
    let r = b / a;
    b.abs().powf(alpha) - a.abs().powf(alpha) * (alpha * (-r).ln_1p()).exp_m1()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Second {
    Re,
    Im,
}

/// Atom-wise evaluation of `log E e^{i(Re⟨X,x⟩ - χ⟨X,y⟩)}` minus the two
/// marginals, with `χ = Re` or `Im`.
fn atom_codiff(m: &MeasureSpec, x: &DualFunctional, y: &DualFunctional, second: Second) -> Result<Complex64> {
    m.check_domain(x)?;
    m.check_domain(y)?;
    let seq = m.sequence();
    let law = m.tempered_law()?;
    let mut acc = ZERO;
    let mut gauss = ZERO;
    for n in x.joint_support(y) {
        if m.gaussian_diag.is_some() {
            gauss += x.get(n).conj() * y.get(n) * m.gaussian(n);
        }
        let Some(w) = seq.value(n) else { continue };
        let st = |phase: Phase, scale: f64| -> Result<(f64, f64)> {
            let z = BasisAtom::new(n, phase, scale)?;
            let t = pairing(&z, y);
            Ok((
                pairing(&z, x).re,
                match second {
                    Second::Re => t.re,
                    Second::Im => t.im,
                },
            ))
        };
        match &m.family {
            Family::CompoundPoisson { .. } => {
                let (s, t) = st(Phase::Real, w)?;
                acc += expm1_i(s) * expm1_i(-t);
            }
            Family::SymmetricAlphaStable { alpha, .. } => {
                let (s1, t1) = st(Phase::Real, 1.0)?;
                let (s2, t2) = st(Phase::Imaginary, 1.0)?;
                let g = stable_g(s1, t1, *alpha) + stable_g(s2, t2, *alpha);
                acc += 0.5 * w.powf(*alpha) * g;
            }
            Family::TemperedStable { .. } => {
                let law = law.as_ref().expect("tempered family");
                for phase in [Phase::Real, Phase::Imaginary] {
                    let (s, t) = st(phase, w)?;
                    if s == 0.0 || t == 0.0 {
                        continue;
                    }
                    acc += law.exponent_drift_free(s - t) - law.exponent_drift_free(s) - law.exponent_drift_free(-t);
                }
            }
        }
    }
    acc += match second {
        Second::Re => 0.5 * gauss.re,
        Second::Im => 0.5 * gauss.im,
    };
    if !(acc.re.is_finite() && acc.im.is_finite()) {
        return Err(Error::Numerical("codifference is not finite".into()));
    }
    Ok(acc)
}

/// `C^=(x, y) = log φ(x - y) - log φ(x) - log φ(-y)`.
pub fn codiff_equal(m: &MeasureSpec, x: &DualFunctional, y: &DualFunctional) -> Result<CodifferenceValue> {
    Ok(CodifferenceValue {
        value: atom_codiff(m, x, y, Second::Re)?,
        kind: CodiffKind::Equal,
    })
}

/// `C^≠(x, y)`, through `Im⟨z,y⟩ = Re⟨z,-iy⟩`.
pub fn codiff_notequal(m: &MeasureSpec, x: &DualFunctional, y: &DualFunctional) -> Result<CodifferenceValue> {
    Ok(CodifferenceValue {
        value: atom_codiff(m, x, &y.mul_neg_i(), Second::Re)?,
        kind: CodiffKind::NotEqual,
    })
}

/// `C^≠(x, y)` from the atom formula with `e^{-i Im⟨z,y⟩} - 1` factors.
pub fn codiff_notequal_direct(m: &MeasureSpec, x: &DualFunctional, y: &DualFunctional) -> Result<Complex64> {
    atom_codiff(m, x, y, Second::Im)
}

/// `C^=` as a difference of three log-characteristic functionals.
pub fn codiff_equal_by_log_cf(m: &MeasureSpec, x: &DualFunctional, y: &DualFunctional) -> Result<Complex64> {
    let diff = crate::seqspace::combine(Complex64::new(1.0, 0.0), x, Complex64::new(-1.0, 0.0), y)?;
    Ok(log_cf(m, &diff, Drift::DriftFree)? - log_cf(m, x, Drift::DriftFree)? - log_cf(m, &y.neg(), Drift::DriftFree)?)
}

/// `C^{φ,ψ}(x, y)` read off the function-codifference table.
pub fn codiff_general(
    m: &MeasureSpec,
    pair: PhiPsi,
    x: &DualFunctional,
    y: &DualFunctional,
) -> Result<CodifferenceValue> {
    let (base, rot) = pair.row()?;
    let (x, y) = (rot.apply(x), rot.apply(y));
    let v = match base {
        Base::Equal => codiff_equal(m, &x, &y)?,
        Base::NotEqual => codiff_notequal(m, &x, &y)?,
    };
    Ok(CodifferenceValue {
        value: v.value,
        kind: CodiffKind::General(pair),
    })
}

/// `C^{φ,ψ}(x, y)` straight from its definition: `C^=(u_φ x, -u_ψ y)`.
/// Coincides with `codiff_general` on measures invariant under `z ↦ iz` and
/// `z ↦ z̄` when the functionals are real.
pub fn codiff_phipsi(
    m: &MeasureSpec,
    phi: Proj,
    psi: Proj,
    x: &DualFunctional,
    y: &DualFunctional,
) -> Result<Complex64> {
    atom_codiff(m, &phi.rotate(x), &psi.rotate(y).neg(), Second::Re)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Coeffs {
    /// `a_{start}, a_{start+1}, …`
    Finite { values: Vec<Complex64> },
    /// `a_j = a0 · ratio^{j - start}`.
    Geometric { a0: Complex64, ratio: f64 },
}

impl Coeffs {
    fn get(&self, i: usize) -> Complex64 {
        match self {
            Coeffs::Finite { values } => values.get(i).copied().unwrap_or(ZERO),
            Coeffs::Geometric { a0, ratio } => a0 * ratio.powi(i as i32),
        }
    }

    fn len(&self) -> Option<usize> {
        match self {
            Coeffs::Finite { values } => Some(values.len()),
            Coeffs::Geometric { .. } => None,
        }
    }

    /// `Σ_{i ≥ from} |a_i|`.
    fn tail_abs(&self, from: usize) -> f64 {
        match self {
            Coeffs::Finite { values } => values.iter().skip(from).map(|c| c.norm()).sum(),
            Coeffs::Geometric { a0, ratio } => a0.norm() * ratio.abs().powi(from as i32) / (1.0 - ratio.abs()),
        }
    }
}

/// `Σ_j a_j e^{iφ⟨z, T*ʲ x⟩}` with `j` running from `start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpSeries {
    pub phi: Proj,
    pub base: DualFunctional,
    #[serde(default)]
    pub start: u32,
    pub coeffs: Coeffs,
}

/// A finite sum of exponential series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpSeriesObservable {
    pub families: Vec<ExpSeries>,
}

impl ExpSeriesObservable {
    /// `a e^{iφ⟨z, x⟩}`.
    pub fn single(a: Complex64, phi: Proj, base: DualFunctional) -> Self {
        Self::from_terms(vec![(a, phi, base, 0)])
    }

    /// `Σ_k a_k e^{iφ_k⟨z, T*^{j_k} x_k⟩}`.
    pub fn from_terms(terms: Vec<(Complex64, Proj, DualFunctional, u32)>) -> Self {
        ExpSeriesObservable {
            families: terms
                .into_iter()
                .map(|(a, phi, base, start)| ExpSeries {
                    phi,
                    base,
                    start,
                    coeffs: Coeffs::Finite { values: vec![a] },
                })
                .collect(),
        }
    }

    /// `Σ_j a0 r^j e^{iφ⟨z, T*ʲ x⟩}`.
    pub fn geometric(a0: Complex64, ratio: f64, phi: Proj, base: DualFunctional) -> Self {
        ExpSeriesObservable {
            families: vec![ExpSeries {
                phi,
                base,
                start: 0,
                coeffs: Coeffs::Geometric { a0, ratio },
            }],
        }
    }

    /// Checks `Σ_j |a_j| ‖T‖^{jp/2} < ∞`.
    pub fn validate(&self, t: &WeightedShiftOperator, p: f64) -> Result<()> {
        let growth = t.operator_norm_bound().powf(p / 2.0);
        for fam in &self.families {
            if let Coeffs::Geometric { a0, ratio } = &fam.coeffs {
                if !(a0.re.is_finite() && a0.im.is_finite() && ratio.is_finite()) {
                    return Err(invalid("non-finite series coefficient"));
                }
                if ratio.abs() * growth >= 1.0 {
                    return Err(Error::Divergent(format!(
                        "coefficient ratio {ratio} against operator growth {growth}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn total_abs(&self) -> f64 {
        self.families.iter().map(|f| f.coeffs.tail_abs(0)).sum()
    }
}

/// Relative accuracy targeted by `exact_in`.
pub const IN_REL_TOL: f64 = 1e-13;
const IN_MAX_TERMS: usize = 1_000_000;

/// Memoized `k ↦ (u_φ T*ᵏ x, E e^{iφ⟨X, T*ᵏ x⟩})`.
struct Orbit<'a> {
    m: &'a MeasureSpec,
    t: &'a WeightedShiftOperator,
    proj: Proj,
    base: &'a DualFunctional,
    memo: HashMap<usize, (DualFunctional, Complex64)>,
}

impl<'a> Orbit<'a> {
    fn new(m: &'a MeasureSpec, t: &'a WeightedShiftOperator, proj: Proj, base: &'a DualFunctional) -> Self {
        Orbit {
            m,
            t,
            proj,
            base,
            memo: HashMap::new(),
        }
    }

    fn at(&mut self, k: usize) -> Result<(DualFunctional, Complex64)> {
        if let Some(v) = self.memo.get(&k) {
            return Ok(v.clone());
        }
        let power = u32::try_from(k).map_err(|_| Error::TruncationCap(k))?;
        let rotated = self.proj.rotate(&self.t.adjoint_power(power, self.base)?);
        let cf = log_cf(self.m, &rotated, Drift::Full)?.exp();
        self.memo.insert(k, (rotated.clone(), cf));
        Ok((rotated, cf))
    }
}

/// Range of `j - (n + l)` for which `T*ʲ x` and `T*^{n+l} y` can share an index.
fn overlap_window(t: &WeightedShiftOperator, x: &DualFunctional, y: &DualFunctional) -> Option<(i64, i64)> {
    let (xlo, xhi) = x.support_range()?;
    let (ylo, yhi) = y.support_range()?;
    match t.direction {
        Direction::BackwardN => Some((ylo - xhi, yhi - xlo)),
        Direction::ForwardZ => Some((xlo - yhi, xhi - ylo)),
        Direction::Identity => Some((i64::MIN / 4, i64::MAX / 4)),
    }
}

/// `I_n(f, g) = ∫ f(z) g(Tⁿz) μ(dz) - ∫ f dμ ∫ g dμ`, summed term by term
/// as `Σ a_j b_l (e^{C^{φ,ψ}(T*ʲx, T*^{n+l}y)} - 1) E_j E_l`.
pub fn exact_in(
    m: &MeasureSpec,
    t: &WeightedShiftOperator,
    fobs: &ExpSeriesObservable,
    gobs: &ExpSeriesObservable,
    n: u32,
) -> Result<Complex64> {
    let p = m.p();
    fobs.validate(t, p)?;
    gobs.validate(t, p)?;
    let f_total = fobs.total_abs();
    let mut acc = ZERO;
    for ff in &fobs.families {
        m.check_domain(&ff.base)?;
        let mut forbit = Orbit::new(m, t, ff.phi, &ff.base);
        for gf in &gobs.families {
            m.check_domain(&gf.base)?;
            PhiPsi::new(ff.phi, gf.phi)?;
            let mut gorbit = Orbit::new(m, t, gf.phi, &gf.base);
            let Some((wlo, whi)) = overlap_window(t, &ff.base, &gf.base) else {
                continue;
            };
            let mut l = 0usize;
            loop {
                if let Some(len) = gf.coeffs.len() {
                    if l >= len {
                        break;
                    }
                }
                let b = gf.coeffs.get(l);
                let g_power = n as usize + gf.start as usize + l;
                if b != ZERO {
                    // j - g_power ∈ [wlo, whi], j ≥ start
                    let jlo = (g_power as i64).saturating_add(wlo).max(ff.start as i64) as usize;
                    let jhi_window = (g_power as i64).saturating_add(whi);
                    if jhi_window >= jlo as i64 {
                        let mut j = jlo;
                        loop {
                            if j as i64 > jhi_window {
                                break;
                            }
                            let ji = j - ff.start as usize;
                            if let Some(len) = ff.coeffs.len() {
                                if ji >= len {
                                    break;
                                }
                            }
                            let a = ff.coeffs.get(ji);
                            if t.direction == Direction::Identity && ff.coeffs.tail_abs(ji) <= 1e-17 * f_total {
                                break;
                            }
                            if a != ZERO {
                                let (xj, ef) = forbit.at(j)?;
                                let (yl, eg) = gorbit.at(g_power)?;
                                let c = atom_codiff(m, &xj, &yl.neg(), Second::Re)?;
                                acc += a * b * cexpm1(c) * ef * eg;
                            }
                            j += 1;
                            if j - jlo > IN_MAX_TERMS {
                                return Err(Error::TruncationCap(IN_MAX_TERMS));
                            }
                        }
                    }
                }
                l += 1;
                let rest = 2.0 * gf.coeffs.tail_abs(l) * f_total;
                if rest <= IN_REL_TOL * acc.norm() || rest < 1e-300 {
                    break;
                }
                if l > IN_MAX_TERMS {
                    return Err(Error::TruncationCap(IN_MAX_TERMS));
                }
            }
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum DecayModel {
    /// `|v_n| ≈ C r^n`.
    Geometric { rate: f64 },
    /// `|v_n| ≈ C n^{exponent}`.
    PowerLaw { exponent: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: DecayModel,
    pub r2: f64,
    pub geometric_rate: f64,
    pub geometric_r2: f64,
    pub power_exponent: f64,
    pub power_r2: f64,
}

/// Least squares slope and r² of `ys` against `xs`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (my + slope * (x - mx));
            e * e
        })
        .sum();
    let r2 = if syy <= 1e-300 * k { 1.0 } else { 1.0 - ss_res / syy };
    (slope, r2)
}

/// Fits `log|v|` against `n` (geometric) and against `log n` (power law),
/// keeping the model with the larger r²; ties go to the geometric model.
pub fn fit_decay(values: &[(f64, f64)]) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .copied()
        .filter(|(n, v)| *v > 0.0 && v.is_finite() && *n > 0.0)
        .collect();
    if pts.len() < 5 {
        return Err(Error::TooFewPoints {
            needed: 5,
            got: pts.len(),
        });
    }
    let ns: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let logn: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let logv: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (gs, gr2) = linear_fit(&ns, &logv);
    let (ps, pr2) = linear_fit(&logn, &logv);
    let (model, r2) = if gr2 >= pr2 {
        (DecayModel::Geometric { rate: gs.exp() }, gr2)
    } else {
        (DecayModel::PowerLaw { exponent: ps }, pr2)
    };
    Ok(FitResult {
        model,
        r2,
        geometric_rate: gs.exp(),
        geometric_r2: gr2,
        power_exponent: ps,
        power_r2: pr2,
    })
}
