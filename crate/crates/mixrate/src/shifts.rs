//! Weighted backward shifts on ℕ, forward shifts on ℤ, and their adjoint powers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seqspace::{BasisAtom, DualFunctional, IndexDomain};

/// Longest run of weights multiplied directly; longer products go through logs.
const DIRECT_PRODUCT_MAX: i64 = 64;

/// Closed-form weight sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum WeightRule {
    /// `ω_0 = 1`, `ω_n = (1 + 1/n)^{γ/p}` for `n ≥ 1`.
    PowerLawP4 {
        gamma: f64,
        p: f64,
    },
    /// `ω_n = ((n+2)/(n+1))^{γ/p}`.
    PowerLawP6 {
        gamma: f64,
        p: f64,
    },
    Constant {
        c: f64,
    },
    /// `ω_n = head[n]` for `n < head.len()`, then `tail`.
    ExplicitHead {
        head: Vec<f64>,
        tail: f64,
    },
    /// `ω_l = left` for `l ≤ 0` and `right` for `l ≥ 1`, except at the listed indices.
    TwoSided {
        left: f64,
        right: f64,
        #[serde(default)]
        head: Vec<(i64, f64)>,
    },
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl WeightRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightRule::PowerLawP4 { gamma, p } | WeightRule::PowerLawP6 { gamma, p } => {
                if !(*gamma > 1.0 && gamma.is_finite()) {
                    return Err(invalid(format!("gamma must exceed 1, got {gamma}")));
                }
                if !(1.0..=2.0).contains(p) {
                    return Err(invalid(format!("p must lie in [1,2], got {p}")));
                }
                Ok(())
            }
            WeightRule::Constant { c } => check_positive("constant weight", *c),
            WeightRule::ExplicitHead { head, tail } => {
                for w in head {
                    check_positive("head weight", *w)?;
                }
                check_positive("tail weight", *tail)
            }
            WeightRule::TwoSided { left, right, head } => {
                check_positive("left weight", *left)?;
                check_positive("right weight", *right)?;
                let mut seen: Vec<i64> = head.iter().map(|(l, _)| *l).collect();
                seen.sort_unstable();
                if seen.windows(2).any(|w| w[0] == w[1]) {
                    return Err(invalid("duplicate index in two-sided weight head"));
                }
                for (_, w) in head {
                    check_positive("head weight", *w)?;
                }
                Ok(())
            }
        }
    }

    /// Whether the rule assigns weights to negative indices.
    pub fn defined_on_integers(&self) -> bool {
        matches!(self, WeightRule::Constant { .. } | WeightRule::TwoSided { .. })
    }

    fn power_exponent(gamma: f64, p: f64) -> f64 {
        gamma / p
    }

    fn two_sided_default(left: f64, right: f64, l: i64) -> f64 {
        if l <= 0 {
            left
        } else {
            right
        }
    }

    /// `ω_l`, or `None` where the rule is undefined.
    pub fn at(&self, l: i64) -> Option<f64> {
        match self {
            WeightRule::PowerLawP4 { gamma, p } => {
                if l < 0 {
                    None
                } else if l == 0 {
                    Some(1.0)
                } else {
                    let e = Self::power_exponent(*gamma, *p);
                    Some((e * (1.0 / l as f64).ln_1p()).exp())
                }
            }
            WeightRule::PowerLawP6 { gamma, p } => {
                if l < 0 {
                    None
                } else {
                    let e = Self::power_exponent(*gamma, *p);
                    Some((e * (1.0 / (l as f64 + 1.0)).ln_1p()).exp())
                }
            }
            WeightRule::Constant { c } => Some(*c),
            WeightRule::ExplicitHead { head, tail } => {
                if l < 0 {
                    None
                } else {
                    Some(head.get(l as usize).copied().unwrap_or(*tail))
                }
            }
            WeightRule::TwoSided { left, right, head } => Some(
                head.iter()
                    .find(|(i, _)| *i == l)
                    .map(|(_, w)| *w)
                    .unwrap_or_else(|| Self::two_sided_default(*left, *right, l)),
            ),
        }
    }

    fn check_range(&self, a: i64) -> Result<()> {
        if a < 0 && !self.defined_on_integers() {
            Err(Error::DomainMismatch(format!(
                "weight rule undefined at negative index {a}"
            )))
        } else {
            Ok(())
        }
    }

    /// `Σ_{l=a}^{b} ln ω_l` in closed form (zero for an empty range).
    pub fn log_sum(&self, a: i64, b: i64) -> Result<f64> {
        if b < a {
            return Ok(0.0);
        }
        self.check_range(a)?;
        let count = |lo: i64, hi: i64| -> f64 {
            if hi < lo {
                0.0
            } else {
                (hi - lo + 1) as f64
            }
        };
        Ok(match self {
            WeightRule::PowerLawP4 { gamma, p } => {
                let a1 = a.max(1);
                if b < a1 {
                    0.0
                } else {
                    let e = Self::power_exponent(*gamma, *p);
                    e * ((b + 1 - a1) as f64 / a1 as f64).ln_1p()
                }
            }
            WeightRule::PowerLawP6 { gamma, p } => {
                let e = Self::power_exponent(*gamma, *p);
                e * ((b + 1 - a) as f64 / (a as f64 + 1.0)).ln_1p()
            }
            WeightRule::Constant { c } => count(a, b) * c.ln(),
            WeightRule::ExplicitHead { head, tail } => {
                let h = head.len() as i64;
                let head_part: f64 = (a..=b.min(h - 1)).map(|l| head[l as usize].ln()).sum();
                head_part + count(a.max(h), b) * tail.ln()
            }
            WeightRule::TwoSided { left, right, head } => {
                let mut s = count(a, b.min(0)) * left.ln() + count(a.max(1), b) * right.ln();
                for (l, w) in head {
                    if (a..=b).contains(l) {
                        s += w.ln() - Self::two_sided_default(*left, *right, *l).ln();
                    }
                }
                s
            }
        })
    }

    /// `Π_{l=a}^{b} ω_l`; short runs are multiplied directly, long runs in log space.
    pub fn product(&self, a: i64, b: i64) -> Result<f64> {
        if b < a {
            return Ok(1.0);
        }
        self.check_range(a)?;
        let v = if b - a < DIRECT_PRODUCT_MAX {
            let mut prod = 1.0;
            for l in a..=b {
                prod *= self.at(l).expect("range checked");
            }
            prod
        } else {
            self.log_sum(a, b)?.exp()
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numerical(format!("weight product over [{a}, {b}] overflows")))
        }
    }

    /// `sup_l ω_l` over the rule's natural domain.
    pub fn sup(&self) -> f64 {
        match self {
            WeightRule::PowerLawP4 { gamma, p } => (Self::power_exponent(*gamma, *p) * 2f64.ln()).exp().max(1.0),
            WeightRule::PowerLawP6 { gamma, p } => (Self::power_exponent(*gamma, *p) * 2f64.ln()).exp(),
            WeightRule::Constant { c } => *c,
            WeightRule::ExplicitHead { head, tail } => head.iter().copied().fold(*tail, f64::max),
            WeightRule::TwoSided { left, right, head } => head.iter().map(|(_, w)| *w).fold(left.max(*right), f64::max),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// `Te_0 = 0`, `Te_{n+1} = ω_n e_n` on ℓ^p(ℕ).
    #[serde(rename = "backwardN")]
    BackwardN,
    /// `Te_n = ω_{n+1} e_{n+1}` on ℓ^p(ℤ).
    #[serde(rename = "forwardZ")]
    ForwardZ,
    #[serde(rename = "identity")]
    Identity,
}

fn unit_weights() -> WeightRule {
    WeightRule::Constant { c: 1.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedShiftOperator {
    pub direction: Direction,
    #[serde(default = "unit_weights")]
    pub weights: WeightRule,
}

/// Tail parameters of a two-sided forward shift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub q_minus: i64,
    pub q_plus: i64,
}

impl WeightedShiftOperator {
    pub fn new(direction: Direction, weights: WeightRule) -> Result<Self> {
        let op = WeightedShiftOperator { direction, weights };
        op.validate()?;
        Ok(op)
    }

    pub fn identity() -> Self {
        WeightedShiftOperator {
            direction: Direction::Identity,
            weights: unit_weights(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.direction == Direction::ForwardZ && !self.weights.defined_on_integers() {
            return Err(Error::DomainMismatch(
                "forward shift on Z needs a weight rule defined on all integers".into(),
            ));
        }
        Ok(())
    }

    /// Index domain the operator acts on; `None` for the identity.
    pub fn domain(&self) -> Option<IndexDomain> {
        match self.direction {
            Direction::BackwardN => Some(IndexDomain::Naturals),
            Direction::ForwardZ => Some(IndexDomain::Integers),
            Direction::Identity => None,
        }
    }

    fn check_domain(&self, f: &DualFunctional) -> Result<()> {
        match self.domain() {
            Some(d) if d != f.domain() => Err(Error::DomainMismatch(format!(
                "operator acts on {d}, functional lives on {}",
                f.domain()
            ))),
            _ => Ok(()),
        }
    }

    pub fn weight(&self, index: i64) -> Result<f64> {
        match self.direction {
            Direction::Identity => Ok(1.0),
            Direction::BackwardN if index < 0 => Err(Error::NegativeIndex(index)),
            _ => self
                .weights
                .at(index)
                .ok_or_else(|| Error::DomainMismatch(format!("no weight at index {index}"))),
        }
    }

    /// `T*ⁿ f`.
    pub fn adjoint_power(&self, n: u32, f: &DualFunctional) -> Result<DualFunctional> {
        self.check_domain(f)?;
        if n == 0 || self.direction == Direction::Identity {
            return Ok(f.clone());
        }
        let n = n as i64;
        let mut out = Vec::with_capacity(f.len());
        for (k, c) in f.iter() {
            let (target, factor) = match self.direction {
                Direction::BackwardN => (k + n, self.weights.product(k, k + n - 1)?),
                Direction::ForwardZ => (k - n, self.weights.product(k - n + 1, k)?),
                Direction::Identity => unreachable!(),
            };
            out.push((target, c * factor));
        }
        Ok(DualFunctional::from_canonical_iter(f.domain(), out))
    }

    /// `T z` for a basis atom; `None` when the image is zero.
    pub fn apply_atom(&self, z: &BasisAtom) -> Result<Option<BasisAtom>> {
        let (index, w) = match self.direction {
            Direction::Identity => return Ok(Some(*z)),
            Direction::BackwardN => {
                if z.index < 0 {
                    return Err(Error::NegativeIndex(z.index));
                }
                if z.index == 0 {
                    return Ok(None);
                }
                (z.index - 1, self.weight(z.index - 1)?)
            }
            Direction::ForwardZ => (z.index + 1, self.weight(z.index + 1)?),
        };
        Ok(Some(BasisAtom::new(index, z.phase, z.scale * w)?))
    }

    /// Coordinate `k` of `Tⁿ v` equals `factor · v[source]`.
    pub fn forward_power_source(&self, n: u32, k: i64) -> Result<(i64, f64)> {
        let n = n as i64;
        match self.direction {
            Direction::Identity => Ok((k, 1.0)),
            Direction::BackwardN => {
                if k < 0 {
                    return Err(Error::NegativeIndex(k));
                }
                Ok((k + n, self.weights.product(k, k + n - 1)?))
            }
            Direction::ForwardZ => Ok((k - n, self.weights.product(k - n + 1, k)?)),
        }
    }

    /// Applies `Tⁿ` to the dense vector `v` indexed from `lo`, returning only
    /// the coordinates listed in `at`. Coordinates whose source falls outside
    /// `v` are reported as errors.
    pub fn forward_power_coords(&self, n: u32, v: &[Complex64], lo: i64, at: &[i64]) -> Result<Vec<Complex64>> {
        at.iter()
            .map(|&k| {
                let (src, factor) = self.forward_power_source(n, k)?;
                let pos = src - lo;
                if pos < 0 || pos >= v.len() as i64 {
                    return Err(Error::Numerical(format!("sample does not cover source index {src}")));
                }
                Ok(v[pos as usize] * factor)
            })
            .collect()
    }

    /// `sup_l ω_l`, which is the operator norm for these shifts.
    pub fn operator_norm_bound(&self) -> f64 {
        match self.direction {
            Direction::Identity => 1.0,
            _ => self.weights.sup(),
        }
    }

    /// `η₋ = sup_{l ≤ -q₋} 1/ω_l` and `η₊ = sup_{l ≥ q₊} ω_l`, with `q₋, q₊`
    /// chosen past every head exception.
    pub fn rate_params(&self) -> Result<RateParams> {
        if self.direction != Direction::ForwardZ {
            return Err(Error::Unsupported(
                "rate parameters are defined for forward shifts on Z".into(),
            ));
        }
        let (left, right, q_minus, q_plus) = match &self.weights {
            WeightRule::Constant { c } => (*c, *c, 0, 1),
            WeightRule::TwoSided { left, right, head } => {
                let q_minus = head
                    .iter()
                    .filter(|(l, _)| *l <= 0)
                    .map(|(l, _)| -l + 1)
                    .max()
                    .unwrap_or(0);
                let q_plus = head
                    .iter()
                    .filter(|(l, _)| *l >= 1)
                    .map(|(l, _)| l + 1)
                    .max()
                    .unwrap_or(1);
                (*left, *right, q_minus, q_plus)
            }
            _ => unreachable!("validated forward shifts use integer-wide rules"),
        };
        let eta_minus = 1.0 / left;
        let eta_plus = right;
        if eta_minus >= 1.0 {
            return Err(invalid(format!("eta_minus = {eta_minus} is not below 1")));
        }
        if eta_plus >= 1.0 {
            return Err(invalid(format!("eta_plus = {eta_plus} is not below 1")));
        }
        Ok(RateParams {
            eta_minus,
            eta_plus,
            q_minus,
            q_plus,
        })
    }
}
