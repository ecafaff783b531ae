//! Finitely supported dual functionals on ℓ^p and the bilinear dual pairing.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexDomain {
    #[serde(rename = "N")]
    Naturals,
    #[serde(rename = "Z")]
    Integers,
}

impl IndexDomain {
    pub fn contains(self, index: i64) -> bool {
        match self {
            IndexDomain::Naturals => index >= 0,
            IndexDomain::Integers => true,
        }
    }
}

impl fmt::Display for IndexDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexDomain::Naturals => write!(f, "N"),
            IndexDomain::Integers => write!(f, "Z"),
        }
    }
}

/// A finitely supported element of ℓ^q, stored without zero entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFunctional {
    domain: IndexDomain,
    coeffs: BTreeMap<i64, Complex64>,
}

impl DualFunctional {
    pub fn zero(domain: IndexDomain) -> Self {
        DualFunctional {
            domain,
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds a functional from `(index, coefficient)` pairs. Repeated
    /// indices are summed.
    pub fn new<I>(domain: IndexDomain, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut coeffs = BTreeMap::new();
        for (i, c) in entries {
            if !domain.contains(i) {
                return Err(Error::NegativeIndex(i));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidParameter(format!("non-finite coefficient at index {i}")));
            }
            *coeffs.entry(i).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(DualFunctional { domain, coeffs })
    }

    pub fn real<I>(domain: IndexDomain, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        Self::new(domain, entries.into_iter().map(|(i, v)| (i, Complex64::new(v, 0.0))))
    }

    /// The coordinate functional `e_index^*`.
    pub fn unit(domain: IndexDomain, index: i64) -> Result<Self> {
        Self::real(domain, [(index, 1.0)])
    }

    /// Assembles a functional from coefficients already known to be finite,
    /// in-domain and free of duplicates.
    pub(crate) fn from_canonical_iter<I>(domain: IndexDomain, entries: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let coeffs = entries
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        DualFunctional { domain, coeffs }
    }

    pub fn domain(&self) -> IndexDomain {
        self.domain
    }

    pub fn get(&self, index: i64) -> Complex64 {
        self.coeffs.get(&index).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&i, &c)| (i, c))
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest and largest index of the support.
    pub fn support_range(&self) -> Option<(i64, i64)> {
        let lo = *self.coeffs.keys().next()?;
        let hi = *self.coeffs.keys().next_back()?;
        Some((lo, hi))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self::from_canonical_iter(self.domain, self.iter().map(|(i, c)| (i, a * c)))
    }

    pub fn scale_real(&self, a: f64) -> Self {
        self.scale(Complex64::new(a, 0.0))
    }

    pub fn neg(&self) -> Self {
        Self::from_canonical_iter(self.domain, self.iter().map(|(i, c)| (i, -c)))
    }

    /// Multiplication by `i`, exact in floating point.
    pub fn mul_i(&self) -> Self {
        Self::from_canonical_iter(self.domain, self.iter().map(|(i, c)| (i, Complex64::new(-c.im, c.re))))
    }

    /// Multiplication by `-i`, exact in floating point.
    pub fn mul_neg_i(&self) -> Self {
        Self::from_canonical_iter(self.domain, self.iter().map(|(i, c)| (i, Complex64::new(c.im, -c.re))))
    }

    /// Union of both supports, sorted and deduplicated.
    pub fn joint_support(&self, other: &DualFunctional) -> Vec<i64> {
        let mut idx: Vec<i64> = self.indices().chain(other.indices()).collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }
}

/// `a·f + b·g` in canonical form.
pub fn combine(a: Complex64, f: &DualFunctional, b: Complex64, g: &DualFunctional) -> Result<DualFunctional> {
    if f.domain != g.domain {
        return Err(Error::DomainMismatch(format!(
            "cannot combine {} and {} functionals",
            f.domain, g.domain
        )));
    }
    let mut out: BTreeMap<i64, Complex64> = BTreeMap::new();
    for (i, c) in f.iter() {
        out.insert(i, a * c);
    }
    for (i, c) in g.iter() {
        let e = out.entry(i).or_insert(Complex64::new(0.0, 0.0));
        *e += b * c;
    }
    Ok(DualFunctional::from_canonical_iter(f.domain, out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Real,
    Imaginary,
}

/// `scale·e_index` or `scale·i·e_index`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisAtom {
    pub index: i64,
    pub phase: Phase,
    pub scale: f64,
}

impl BasisAtom {
    pub fn new(index: i64, phase: Phase, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "atom scale must be positive and finite, got {scale}"
            )));
        }
        Ok(BasisAtom { index, phase, scale })
    }

    pub fn real(index: i64, scale: f64) -> Result<Self> {
        Self::new(index, Phase::Real, scale)
    }

    pub fn imaginary(index: i64, scale: f64) -> Result<Self> {
        Self::new(index, Phase::Imaginary, scale)
    }
}

/// `⟨z, f⟩` for a basis atom `z`; linear in both slots.
pub fn pairing(atom: &BasisAtom, f: &DualFunctional) -> Complex64 {
    let c = f.get(atom.index);
    match atom.phase {
        Phase::Real => c * atom.scale,
        Phase::Imaginary => Complex64::new(-c.im, c.re) * atom.scale,
    }
}

pub fn re_part(c: Complex64) -> f64 {
    c.re
}

pub fn im_part(c: Complex64) -> f64 {
    c.im
}

/// ℓ^q norm of the coefficient sequence; `q = ∞` gives the max modulus.
pub fn dual_norm(f: &DualFunctional, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "norm exponent must be at least 1, got {q}"
        )));
    }
    let max = f.iter().map(|(_, c)| c.norm()).fold(0.0_f64, f64::max);
    if q.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    let s: f64 = f.iter().map(|(_, c)| (c.norm() / max).powf(q)).sum();
    Ok(max * s.powf(1.0 / q))
}

/// Conjugate exponent `q = p/(p-1)`, with `q = ∞` at `p = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p <= 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

#[derive(Serialize, Deserialize)]
struct DualFunctionalRepr {
    domain: IndexDomain,
    coeffs: Vec<(i64, f64, f64)>,
}

impl Serialize for DualFunctional {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DualFunctionalRepr {
            domain: self.domain,
            coeffs: self.iter().map(|(i, c)| (i, c.re, c.im)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DualFunctional {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = DualFunctionalRepr::deserialize(d)?;
        DualFunctional::new(
            repr.domain,
            repr.coeffs.into_iter().map(|(i, re, im)| (i, Complex64::new(re, im))),
        )
        .map_err(de::Error::custom)
    }
}
