//! Positive coefficient sequences (λ_n, k_n, diagonal covariances) with
//! analytically known tails.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seqspace::IndexDomain;
use crate::shifts::{Direction, WeightRule, WeightedShiftOperator};

/// Hard cap on explicitly summed terms.
pub const MAX_TERMS: usize = 10_000_000;
/// Relative width of the certified tail bracket at which summation stops.
pub const REL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SeqSpec {
    /// `λ₀ / (|n|+1)^{γ/p}`.
    PowerLaw { lambda0: f64, gamma: f64, p: f64 },
    /// `c · r^{|n|}`.
    Geometric { c: f64, r: f64 },
    /// The invariant sequence of a shift: `k_n = k₀ Π_{l<n} 1/ω_l` for a
    /// backward shift on ℕ, `k_{l+1} = ω_{l+1} k_l` for a forward shift on ℤ.
    FromShift { k0: f64, operator: WeightedShiftOperator },
    /// `values[i]` at index `start + i`; outside that window the optional
    /// `tail` spec applies, otherwise there is no atom.
    Explicit {
        start: i64,
        values: Vec<f64>,
        #[serde(default)]
        tail: Option<Box<SeqSpec>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Indices `n = m ≥ 0`.
    Right,
    /// Indices `n = -m ≤ 0`.
    Left,
}

impl Side {
    fn index(self, m: i64) -> i64 {
        match self {
            Side::Right => m,
            Side::Left => -m,
        }
    }
}

/// Exact form of `s_{±m}` for all `m` past some point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    /// No atoms.
    Empty,
    /// `s = value · r^{m - anchor}`.
    Geometric { anchor: i64, value: f64, r: f64 },
    /// `s = c · (m + offset)^{-e}`.
    PowerLaw { c: f64, e: f64, offset: f64 },
}

/// Upper and lower bounds on an infinite sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesBracket {
    pub lower: f64,
    pub upper: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl SeqSpec {
    pub fn validate(&self, domain: IndexDomain) -> Result<()> {
        match self {
            SeqSpec::PowerLaw { lambda0, gamma, p } => {
                positive("lambda0", *lambda0)?;
                positive("gamma", *gamma)?;
                positive("p", *p)
            }
            SeqSpec::Geometric { c, r } => {
                positive("c", *c)?;
                if !(*r > 0.0 && *r < 1.0) {
                    return Err(invalid(format!("geometric ratio must lie in (0,1), got {r}")));
                }
                Ok(())
            }
            SeqSpec::FromShift { k0, operator } => {
                positive("k0", *k0)?;
                operator.validate()?;
                match (operator.direction, domain) {
                    (Direction::BackwardN, IndexDomain::Naturals) | (Direction::ForwardZ, IndexDomain::Integers) => {
                        Ok(())
                    }
                    (Direction::Identity, _) => Err(invalid("the identity does not generate a coefficient sequence")),
                    _ => Err(Error::DomainMismatch(format!(
                        "shift direction {:?} does not act on {domain}",
                        operator.direction
                    ))),
                }
            }
            SeqSpec::Explicit { start, values, tail } => {
                if !domain.contains(*start) {
                    return Err(Error::NegativeIndex(*start));
                }
                for v in values {
                    positive("explicit entry", *v)?;
                }
                if let Some(t) = tail {
                    t.validate(domain)?;
                }
                Ok(())
            }
        }
    }

    /// `s_n`, or `None` when there is no atom at `n`.
    pub fn value(&self, n: i64) -> Option<f64> {
        match self {
            SeqSpec::PowerLaw { lambda0, gamma, p } => {
                Some(lambda0 * (-(gamma / p) * ((n.unsigned_abs() as f64) + 1.0).ln()).exp())
            }
            SeqSpec::Geometric { c, r } => Some(match i32::try_from(n.unsigned_abs()) {
                Ok(m) => c * r.powi(m),
                Err(_) => c * (n.unsigned_abs() as f64 * r.ln()).exp(),
            }),
            SeqSpec::FromShift { k0, operator } => {
                let w = &operator.weights;
                match operator.direction {
                    Direction::BackwardN => {
                        if n < 0 {
                            None
                        } else {
                            Some(k0 * (-w.log_sum(0, n - 1).ok()?).exp())
                        }
                    }
                    Direction::ForwardZ => {
                        if n >= 0 {
                            Some(k0 * w.log_sum(1, n).ok()?.exp())
                        } else {
                            Some(k0 * (-w.log_sum(n + 1, 0).ok()?).exp())
                        }
                    }
                    Direction::Identity => None,
                }
            }
            SeqSpec::Explicit { start, values, tail } => {
                if n >= *start && n < start + values.len() as i64 {
                    Some(values[(n - start) as usize])
                } else {
                    tail.as_ref().and_then(|t| t.value(n))
                }
            }
        }
    }

    /// `(m₀, tail)`: for every `m ≥ m₀` the entry at index `±m` follows `tail`.
    pub fn tail(&self, side: Side) -> Result<(i64, Tail)> {
        match self {
            SeqSpec::PowerLaw { lambda0, gamma, p } => Ok((
                0,
                Tail::PowerLaw {
                    c: *lambda0,
                    e: gamma / p,
                    offset: 1.0,
                },
            )),
            SeqSpec::Geometric { c, r } => Ok((
                0,
                Tail::Geometric {
                    anchor: 0,
                    value: *c,
                    r: *r,
                },
            )),
            SeqSpec::FromShift { k0, operator } => self.shift_tail(*k0, operator, side),
            SeqSpec::Explicit { start, values, tail } => {
                let head_end = match side {
                    Side::Right => start + values.len() as i64,
                    Side::Left => 1 - start,
                }
                .max(0);
                match tail {
                    None => Ok((head_end, Tail::Empty)),
                    Some(t) => {
                        let (m0, tl) = t.tail(side)?;
                        Ok((m0.max(head_end), tl))
                    }
                }
            }
        }
    }

    fn shift_tail(&self, k0: f64, op: &WeightedShiftOperator, side: Side) -> Result<(i64, Tail)> {
        let geometric_from = |anchor: i64, r: f64| -> Result<(i64, Tail)> {
            let value = self
                .value(side.index(anchor))
                .ok_or_else(|| invalid("coefficient sequence undefined at its tail anchor"))?;
            Ok((anchor, Tail::Geometric { anchor, value, r }))
        };
        match (op.direction, side) {
            (Direction::BackwardN, Side::Left) => Ok((1, Tail::Empty)),
            (Direction::BackwardN, Side::Right) => match &op.weights {
                WeightRule::PowerLawP4 { gamma, p } => Ok((
                    1,
                    Tail::PowerLaw {
                        c: k0,
                        e: gamma / p,
                        offset: 0.0,
                    },
                )),
                WeightRule::PowerLawP6 { gamma, p } => Ok((
                    0,
                    Tail::PowerLaw {
                        c: k0,
                        e: gamma / p,
                        offset: 1.0,
                    },
                )),
                WeightRule::Constant { c } => geometric_from(0, 1.0 / c),
                WeightRule::ExplicitHead { head, tail } => geometric_from(head.len() as i64, 1.0 / tail),
                WeightRule::TwoSided { right, head, .. } => {
                    let last = head.iter().map(|(l, _)| *l).max().unwrap_or(0);
                    geometric_from(last.max(0) + 1, 1.0 / right)
                }
            },
            (Direction::ForwardZ, _) => {
                let (left, right, head): (f64, f64, &[(i64, f64)]) = match &op.weights {
                    WeightRule::Constant { c } => (*c, *c, &[]),
                    WeightRule::TwoSided { left, right, head } => (*left, *right, head),
                    _ => return Err(invalid("forward shift needs an integer-wide weight rule")),
                };
                match side {
                    Side::Right => {
                        let last = head.iter().map(|(l, _)| *l).filter(|l| *l >= 1).max();
                        geometric_from(last.unwrap_or(0).max(0), right)
                    }
                    Side::Left => {
                        let last = head.iter().map(|(l, _)| -*l).filter(|m| *m >= 0).max();
                        geometric_from(last.map(|m| m + 1).unwrap_or(0), 1.0 / left)
                    }
                }
            }
            (Direction::Identity, _) => Err(invalid("identity has no invariant sequence")),
        }
    }

    fn sides(domain: IndexDomain) -> &'static [Side] {
        match domain {
            IndexDomain::Naturals => &[Side::Right],
            IndexDomain::Integers => &[Side::Right, Side::Left],
        }
    }

    /// Whether `Σ_n s_n^power < ∞` over the domain.
    pub fn in_ell(&self, domain: IndexDomain, power: f64) -> Result<bool> {
        for &side in Self::sides(domain) {
            let (_, tail) = self.tail(side)?;
            let ok = match tail {
                Tail::Empty => true,
                Tail::Geometric { r, .. } => r < 1.0,
                Tail::PowerLaw { e, .. } => e * power > 1.0,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn side_value(&self, side: Side, m: i64) -> f64 {
        self.value(side.index(m)).unwrap_or(0.0)
    }

    /// Certified bracket for `Σ_{m ≥ start} s_{±m}^power`.
    pub fn tail_bracket(&self, side: Side, power: f64, start: i64) -> Result<SeriesBracket> {
        let (m0, tail) = self.tail(side)?;
        let start = start.max(0);
        let mut head = 0.0;
        for m in start..m0 {
            head += self.side_value(side, m).powf(power);
        }
        let from = start.max(m0);
        let (lower, upper) = match tail {
            Tail::Empty => (0.0, 0.0),
            Tail::Geometric { anchor, value, r } => {
                if r >= 1.0 {
                    return Err(Error::Divergent(format!(
                        "geometric tail with ratio {r} at power {power}"
                    )));
                }
                let first = (value.ln() + (from - anchor) as f64 * r.ln()).exp().powf(power);
                let s = first / (1.0 - r.powf(power));
                (s, s)
            }
            Tail::PowerLaw { c, e, offset } => {
                let big_e = e * power;
                if big_e <= 1.0 {
                    return Err(Error::Divergent(format!(
                        "power-law tail with exponent {big_e} is not summable"
                    )));
                }
                let cp = c.powf(power);
                let x = from as f64 + offset;
                let lo = cp * (x.powf(1.0 - big_e) / (big_e - 1.0) + 0.5 * x.powf(-big_e));
                let hi = cp * (x - 0.5).powf(1.0 - big_e) / (big_e - 1.0);
                (lo, hi)
            }
        };
        Ok(SeriesBracket {
            lower: head + lower,
            upper: head + upper,
        })
    }

    /// Rigorous upper bound on `Σ_{n ≥ start} s_n^power`.
    pub fn series_tail_bound(&self, power: f64, start: i64) -> Result<f64> {
        Ok(self.tail_bracket(Side::Right, power, start)?.upper)
    }

    /// Rigorous upper bound on `Σ_{n ≤ -start} s_n^power`.
    pub fn series_tail_bound_left(&self, power: f64, start: i64) -> Result<f64> {
        Ok(self.tail_bracket(Side::Left, power, start)?.upper)
    }

    /// `Σ_n s_n^power` over the whole domain, summed explicitly until the
    /// certified tail bracket is narrower than `REL_TOL` of the running sum.
    pub fn series_sum(&self, domain: IndexDomain, power: f64) -> Result<SeriesBracket> {
        let mut total = SeriesBracket { lower: 0.0, upper: 0.0 };
        for &side in Self::sides(domain) {
            let first = if side == Side::Left { 1 } else { 0 };
            let (m0, _) = self.tail(side)?;
            let mut acc = 0.0;
            let mut m = first;
            let mut checkpoint = m0.max(first);
            loop {
                while m < checkpoint {
                    acc += self.side_value(side, m).powf(power);
                    m += 1;
                }
                let b = self.tail_bracket(side, power, m)?;
                if b.upper - b.lower <= REL_TOL * (acc + b.lower) || b.upper == 0.0 {
                    total.lower += acc + b.lower;
                    total.upper += acc + b.upper;
                    break;
                }
                if (m - first) as usize >= MAX_TERMS {
                    return Err(Error::TruncationCap(MAX_TERMS));
                }
                checkpoint = (2 * m).max(m + 64).min(first + MAX_TERMS as i64);
            }
        }
        Ok(total)
    }

    /// `Σ_{l ≥ 0} (s_l s_{l+n})^beta` on the right half-line.
    pub fn pair_sum(&self, beta: f64, n: u64) -> Result<SeriesBracket> {
        let n = n as i64;
        let (m0, tail) = self.tail(Side::Right)?;
        let pair = |l: i64| -> f64 {
            let a = self.side_value(Side::Right, l);
            let b = self.side_value(Side::Right, l + n);
            (a * b).powf(beta)
        };
        let mut acc = 0.0;
        let mut l = 0;
        let mut checkpoint = m0.max(0);
        if let Tail::PowerLaw { .. } = tail {
            checkpoint = checkpoint.max(4 * n + 2).max(64);
        }
        loop {
            while l < checkpoint {
                acc += pair(l);
                l += 1;
            }
            let (lo, hi) = match tail {
                Tail::Empty => (0.0, 0.0),
                Tail::Geometric { r, .. } => {
                    if r >= 1.0 {
                        return Err(Error::Divergent(format!("geometric ratio {r}")));
                    }
                    let s = pair(l) / (1.0 - r.powf(2.0 * beta));
                    (s, s)
                }
                Tail::PowerLaw { c, e, offset } => {
                    let a = e * beta;
                    if 2.0 * a <= 1.0 {
                        return Err(Error::Divergent(format!(
                            "pair sum with exponent {} is not summable",
                            2.0 * a
                        )));
                    }
                    let c2 = c.powf(2.0 * beta);
                    let lo = c2 * pair_tail_integral(l as f64 + offset, n as f64, a) + 0.5 * pair(l);
                    let hi = c2 * pair_tail_integral(l as f64 - 0.5 + offset, n as f64, a);
                    (lo, hi)
                }
            };
            if hi - lo <= REL_TOL * (acc + lo) || hi == 0.0 {
                return Ok(SeriesBracket {
                    lower: acc + lo,
                    upper: acc + hi,
                });
            }
            if l as usize >= MAX_TERMS {
                return Err(Error::TruncationCap(MAX_TERMS));
            }
            checkpoint = (2 * l).min(MAX_TERMS as i64);
        }
    }
}

/// `∫_{y0}^∞ (y(y+n))^{-a} dy` for `y0 ≥ 4n`, by the binomial series in `n/y`.
fn pair_tail_integral(y0: f64, n: f64, a: f64) -> f64 {
    let mut coef = 1.0;
    let mut ratio_pow = 1.0;
    let base = y0.powf(1.0 - 2.0 * a);
    let mut sum = 0.0;
    let q = n / y0;
    for k in 0..200 {
        let kf = k as f64;
        let term = coef * ratio_pow * base / (2.0 * a - 1.0 + kf);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        coef *= (-a - kf) / (kf + 1.0);
        ratio_pow *= q;
    }
    sum
}
