//! Admissible scalings and numeric mixing verdicts from codifference decay.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::codiff::{codiff_equal, codiff_notequal, fit_decay, DecayModel, FitResult};
use crate::error::{invalid, Error, Result};
use crate::measures::{Family, MeasureSpec};
use crate::seqspace::DualFunctional;
use crate::shifts::WeightedShiftOperator;

/// Relative slack when deciding whether `a·s/2π` is an integer.
const RESONANCE_TOL: f64 = 1e-12;

/// Atomic Lévy measure on ℝ. `tail_bound`, when present, stands for
/// countably many further atoms with `0 < |s| ≤ tail_bound`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomicLevyMeasure1D {
    pub atoms: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
}

fn near_integer(q: f64) -> bool {
    (q - q.round()).abs() <= RESONANCE_TOL * q.abs().max(1.0)
}

impl AtomicLevyMeasure1D {
    pub fn validate(&self) -> Result<()> {
        for &(s, w) in &self.atoms {
            if s == 0.0 || !s.is_finite() {
                return Err(invalid(format!("atom location must be finite and nonzero, got {s}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(invalid(format!("atom mass must be positive, got {w}")));
            }
        }
        if let Some(b) = self.tail_bound {
            if !(b > 0.0 && b.is_finite()) {
                return Err(invalid(format!("tail location bound must be positive, got {b}")));
            }
        }
        Ok(())
    }

    /// Whether some atom may sit in `2πℤ \ {0}`.
    fn resonant(&self) -> bool {
        self.atoms.iter().any(|&(s, _)| near_integer(s / TAU)) || self.tail_bound.is_some_and(|b| b >= TAU)
    }
}

/// Pushforward of a compound Poisson Lévy measure under `z ↦ Re⟨z, f⟩`.
pub fn pushforward_levy(m: &MeasureSpec, f: &DualFunctional) -> Result<AtomicLevyMeasure1D> {
    m.check_domain(f)?;
    let Family::CompoundPoisson { lambda, .. } = &m.family else {
        return Err(Error::Unsupported(
            "pushforwards of stable and tempered measures are not atomic".into(),
        ));
    };
    let atoms = f
        .iter()
        .filter_map(|(n, c)| lambda.value(n).map(|l| l * c.re))
        .filter(|s| *s != 0.0)
        .map(|s| (s, 1.0))
        .collect();
    Ok(AtomicLevyMeasure1D {
        atoms,
        tail_bound: None,
    })
}

/// Membership in `Z₁(ν)`. Unlisted tail atoms are treated conservatively:
/// any `a` with `|a|·tail_bound ≥ 2π` counts as a member.
pub fn in_z1(nu: &AtomicLevyMeasure1D, a: f64) -> bool {
    if !nu.resonant() {
        return a != 1.0;
    }
    if nu.atoms.iter().any(|&(s, _)| near_integer(a * s / TAU)) {
        return true;
    }
    nu.tail_bound.is_some_and(|b| a.abs() * b >= TAU)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Some `a ∈ (0, 1]` outside `Z₁(ν)`, scanning `1, 1/2, 1/3, 2/3, 1/4, …`.
pub fn pick_admissible_scale(nu: &AtomicLevyMeasure1D) -> f64 {
    for q in 1_u64.. {
        for p in 1..=q {
            if gcd(p, q) != 1 {
                continue;
            }
            let a = p as f64 / q as f64;
            if !in_z1(nu, a) {
                return a;
            }
        }
    }
    unreachable!("Z1 misses all sufficiently small 1/q")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    MixingEvidence,
    NotMixing,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub probe: DualFunctional,
    pub a: f64,
    /// The constant value of `C^=(a x*, a T*ⁿ x*)`.
    pub value: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe: DualFunctional,
    pub a: f64,
    pub verdict: Verdict,
    /// `max(|C^=|, |C^≠|)` over the last quarter of the orbit.
    pub tail_max: f64,
    pub fit: Option<FitResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingVerdict {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub probes: Vec<ProbeReport>,
}

/// Minimum r² of the decay fit behind a `MixingEvidence` verdict.
pub const MIN_FIT_R2: f64 = 0.98;

fn scale_for(m: &MeasureSpec, x: &DualFunctional) -> Result<f64> {
    match m.family {
        Family::CompoundPoisson { .. } => Ok(pick_admissible_scale(&pushforward_levy(m, x)?)),
        _ => Ok(1.0),
    }
}

fn judge_probe(
    m: &MeasureSpec,
    t: &WeightedShiftOperator,
    x: &DualFunctional,
    n_max: u32,
    tol: f64,
) -> Result<(ProbeReport, Option<Witness>)> {
    let a = scale_for(m, x)?;
    let ax = x.scale_real(a);
    let mut values = Vec::with_capacity(n_max as usize + 1);
    let mut constant_orbit = true;
    let mut orbit = ax.clone();
    for n in 0..=n_max {
        if n > 0 {
            orbit = t.adjoint_power(1, &orbit)?;
            constant_orbit &= orbit == ax;
        }
        let ce = codiff_equal(m, &ax, &orbit)?.value;
        let cn = codiff_notequal(m, &ax, &orbit)?.value;
        values.push((ce, ce.norm().max(cn.norm())));
    }
    let start = (n_max - n_max / 4) as usize;
    let tail_max = values[start..].iter().map(|v| v.1).fold(0.0, f64::max);
    let report = |verdict, fit| ProbeReport {
        probe: x.clone(),
        a,
        verdict,
        tail_max,
        fit,
    };
    if constant_orbit && n_max > 0 && values[0].1 > 0.0 {
        let witness = Witness {
            probe: x.clone(),
            a,
            value: values[0].0,
        };
        return Ok((report(Verdict::NotMixing, None), Some(witness)));
    }
    if tail_max == 0.0 && n_max > 0 {
        return Ok((report(Verdict::MixingEvidence, None), None));
    }
    let first = (n_max / 12).max(1) as usize;
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .skip(first)
        .map(|(n, v)| (n as f64, v.1))
        .collect();
    let fit = fit_decay(&pts).ok();
    let decaying = fit.is_some_and(|f| {
        f.r2 >= MIN_FIT_R2
            && match f.model {
                DecayModel::Geometric { rate } => rate < 1.0,
                DecayModel::PowerLaw { exponent } => exponent < 0.0,
            }
    });
    let verdict = if tail_max < tol && decaying {
        Verdict::MixingEvidence
    } else {
        Verdict::Inconclusive
    };
    Ok((report(verdict, fit), None))
}

/// Evaluates `C^=` and `C^≠` at `(a x*, a T*ⁿ x*)` for `n ≤ n_max` and every
/// probe, with `a` admissible for the probe. Weak mixing is never decided.
pub fn mixing_verdict(
    m: &MeasureSpec,
    t: &WeightedShiftOperator,
    probes: &[DualFunctional],
    n_max: u32,
    tol: f64,
) -> Result<MixingVerdict> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let report = m.validate();
    if !report.valid {
        return Err(invalid(report.failures.join("; ")));
    }
    let mut probes_out = Vec::with_capacity(probes.len());
    let mut witness = None;
    for x in probes {
        let (r, w) = judge_probe(m, t, x, n_max, tol)?;
        if witness.is_none() {
            witness = w;
        }
        probes_out.push(r);
    }
    let verdict = if witness.is_some() {
        Verdict::NotMixing
    } else if !probes_out.is_empty() && probes_out.iter().all(|r| r.verdict == Verdict::MixingEvidence) {
        Verdict::MixingEvidence
    } else {
        Verdict::Inconclusive
    };
    Ok(MixingVerdict {
        verdict,
        witness,
        probes: probes_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::SeqSpec;
    use crate::seqspace::IndexDomain;
    use crate::shifts::{Direction, WeightRule};
    use std::f64::consts::PI;

    fn atom_2pi() -> MeasureSpec {
        MeasureSpec::new(Family::CompoundPoisson {
            lambda: SeqSpec::Explicit {
                start: 0,
                values: vec![2.0 * PI],
                tail: None,
            },
            p: 1.0,
        })
    }

    fn nu(atoms: &[f64]) -> AtomicLevyMeasure1D {
        AtomicLevyMeasure1D {
            atoms: atoms.iter().map(|&s| (s, 1.0)).collect(),
            tail_bound: None,
        }
    }

    #[test]
    fn pushforward_examples() {
        let m = atom_2pi();
        let e0 = DualFunctional::unit(IndexDomain::Naturals, 0).unwrap();
        assert_eq!(pushforward_levy(&m, &e0).unwrap(), nu(&[2.0 * PI]));
        let two = MeasureSpec::new(Family::CompoundPoisson {
            lambda: SeqSpec::Explicit {
                start: 0,
                values: vec![1.5, 0.5],
                tail: None,
            },
            p: 1.0,
        });
        assert_eq!(pushforward_levy(&two, &e0).unwrap(), nu(&[1.5]));
        let imag = DualFunctional::new(
            IndexDomain::Naturals,
            [(0, Complex64::new(0.0, 1.0)), (1, Complex64::new(2.0, 0.0))],
        )
        .unwrap();
        assert_eq!(pushforward_levy(&two, &imag).unwrap(), nu(&[1.0]));
    }

    #[test]
    fn z1_examples() {
        let n = nu(&[2.0 * PI]);
        assert!(in_z1(&n, 1.0));
        assert!(!in_z1(&n, 0.5));
        assert!(in_z1(&n, 3.0));
        assert_eq!(pick_admissible_scale(&n), 0.5);
        let plain = nu(&[1.0, 2.5]);
        assert!(!in_z1(&plain, 1.0));
        assert!(in_z1(&plain, 0.5));
        assert_eq!(pick_admissible_scale(&plain), 1.0);
        let crowded = nu(&[2.0 * PI, 4.0 * PI, 6.0 * PI]);
        let a = pick_admissible_scale(&crowded);
        assert_eq!(a, 0.25);
        let tail = AtomicLevyMeasure1D {
            atoms: vec![],
            tail_bound: Some(20.0),
        };
        let a = pick_admissible_scale(&tail);
        assert!(!in_z1(&tail, a) && a * 20.0 < TAU);
    }

    #[test]
    fn example_identity_is_not_mixing() {
        let m = atom_2pi();
        let e0 = DualFunctional::unit(IndexDomain::Naturals, 0).unwrap();
        let v = mixing_verdict(&m, &WeightedShiftOperator::identity(), &[e0], 100, 1e-3).unwrap();
        assert_eq!(v.verdict, Verdict::NotMixing);
        let w = v.witness.unwrap();
        assert_eq!(w.a, 0.5);
        assert!((w.value - Complex64::new(4.0, 0.0)).norm() < 1e-12);
        let json = serde_json::to_string(&v.verdict).unwrap();
        assert_eq!(json, "\"NotMixing\"");
    }

    #[test]
    fn power_law_backward_shift_mixes() {
        let m = MeasureSpec::new(Family::CompoundPoisson {
            lambda: SeqSpec::PowerLaw {
                lambda0: 1.0,
                gamma: 1.5,
                p: 1.0,
            },
            p: 1.0,
        });
        let t =
            WeightedShiftOperator::new(Direction::BackwardN, WeightRule::PowerLawP6 { gamma: 1.5, p: 1.0 }).unwrap();
        let e0 = DualFunctional::unit(IndexDomain::Naturals, 0).unwrap();
        let e03 = DualFunctional::real(IndexDomain::Naturals, [(0, 1.0), (3, 1.0)]).unwrap();
        let v = mixing_verdict(&m, &t, &[e0, e03], 200, 1e-3).unwrap();
        assert_eq!(v.verdict, Verdict::MixingEvidence);
        assert!(v.witness.is_none());
    }

    #[test]
    fn stable_forward_shift_mixes_geometrically() {
        let t = WeightedShiftOperator::new(
            Direction::ForwardZ,
            WeightRule::TwoSided {
                left: 2.0,
                right: 0.5,
                head: vec![],
            },
        )
        .unwrap();
        let m = MeasureSpec::new(Family::SymmetricAlphaStable {
            alpha: 1.5,
            k: SeqSpec::FromShift {
                k0: 1.0,
                operator: t.clone(),
            },
            p: 1.6,
        });
        let x = DualFunctional::real(IndexDomain::Integers, (-80..=80).map(|l| (l, 1.0))).unwrap();
        let v = mixing_verdict(&m, &t, &[x], 60, 1e-3).unwrap();
        assert_eq!(v.verdict, Verdict::MixingEvidence);
        let fit = v.probes[0].fit.unwrap();
        assert!(matches!(fit.model, DecayModel::Geometric { .. }), "{fit:?}");
    }

    #[test]
    fn vanishing_orbits_and_strict_tolerances() {
        let m = atom_2pi();
        let e0 = DualFunctional::unit(IndexDomain::Naturals, 0).unwrap();
        let t = WeightedShiftOperator::new(Direction::BackwardN, WeightRule::Constant { c: 1.0 }).unwrap();
        // the orbit leaves the single atom immediately, so the codifferences vanish
        let v = mixing_verdict(&m, &t, std::slice::from_ref(&e0), 10, 1e-3).unwrap();
        assert_eq!(v.verdict, Verdict::MixingEvidence);
        assert_eq!(
            mixing_verdict(&m, &t, &[], 10, 1e-3).unwrap().verdict,
            Verdict::Inconclusive
        );
        let stable = MeasureSpec::new(Family::SymmetricAlphaStable {
            alpha: 1.5,
            k: SeqSpec::Geometric { c: 1.0, r: 0.5 },
            p: 1.6,
        });
        let shift = WeightedShiftOperator::new(Direction::ForwardZ, WeightRule::Constant { c: 1.0 }).unwrap();
        let x = DualFunctional::real(IndexDomain::Integers, (-40..=40).map(|l| (l, 1.0))).unwrap();
        let v = mixing_verdict(&stable, &shift, &[x], 20, 1e-300).unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive);
    }
}
