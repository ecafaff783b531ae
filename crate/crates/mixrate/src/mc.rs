//! Seeded samplers for the three measure families and Monte Carlo estimators
//! of characteristic functionals and of `I_n(f, g)`.
//!
//! Every coordinate of every sample draws from its own ChaCha8 stream keyed by
//! `(seed, stream, sample, coordinate)`, so a coordinate's value does not
//! depend on the truncation or on which other coordinates are sampled.
//! Estimators evaluate samples in fixed blocks of `BLOCK` on the rayon pool
//! and reduce the per-sample values sequentially in sample order, which makes
//! the result independent of the worker count.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codiff::{Coeffs, ExpSeriesObservable};
use crate::error::{invalid, Error, Result};
use crate::measures::{Family, MeasureSpec, Sign, TemperedExponentParams, TemperedLaw};
use crate::seqspace::{DualFunctional, IndexDomain};
use crate::shifts::WeightedShiftOperator;
use crate::specfun::gamma;

pub const BLOCK: usize = 4096;
pub const MIN_SAMPLES: usize = 100;
/// Attempts allowed per draw in the tilting rejection sampler.
pub const REJECTION_CAP: usize = 1_000_000;
/// Relative size of the dropped tail targeted by `choose_truncation`.
pub const TRUNCATION_TOL: f64 = 1e-4;
/// Coefficient tail of an infinite observable family left out of an MC sample.
const OBSERVABLE_TAIL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    /// Generator for one coordinate of one sample.
    pub fn coordinate_rng(&self, sample: u64, coord: i64) -> ChaCha8Rng {
        let mut h = splitmix(self.seed);
        for w in [self.stream, sample, coord as u64] {
            h = splitmix(h ^ w);
        }
        ChaCha8Rng::seed_from_u64(h)
    }
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleVector {
    /// Index of `coords[0]`: `0` on ℕ, `-N` on ℤ.
    pub lo: i64,
    pub coords: Vec<Complex64>,
    /// Expected mass of the dropped coordinates.
    pub tail_bound: f64,
}

impl SampleVector {
    pub fn truncation(&self) -> usize {
        match self.lo {
            0 => self.coords.len(),
            lo => (-lo) as usize,
        }
    }

    pub fn get(&self, index: i64) -> Complex64 {
        let pos = index - self.lo;
        if pos < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coords.get(pos as usize).copied().unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: Complex64,
    pub stderr: f64,
    pub samples: usize,
}

/// Standard symmetric α-stable variable times `scale`, with
/// `E e^{itS} = e^{-scale^α |t|^α}` (Chambers–Mallows–Stuck).
pub fn sample_sas<R: Rng + ?Sized>(alpha: f64, scale: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    let s = (alpha * v).sin() / v.cos().powf(1.0 / alpha) * ((v * (1.0 - alpha)).cos() / w).powf((1.0 - alpha) / alpha);
    scale * s
}

/// Positive α-stable variable with `E e^{-sS} = e^{-s^α}`, `0 < α < 1` (Kanter).
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = PI * rng.random::<f64>();
    let w: f64 = Exp1.sample(rng);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * u).sin() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Laplace constant `c = aΓ(1-α)/α` of the untempered one-sided law.
fn laplace_constant(a: f64, alpha: f64) -> Result<f64> {
    Ok(a * gamma(1.0 - alpha)? / alpha)
}

/// Probability that one draw of the tilting sampler is accepted,
/// `E e^{-λY} = e^{-cλ^α}`.
pub fn tilting_acceptance(params: &TemperedExponentParams) -> Result<f64> {
    Ok((-laplace_constant(params.a, params.alpha)? * params.lam.powf(params.alpha)).exp())
}

/// Number of independent pieces the one-sided law is split into so that each
/// piece is accepted with probability at least `e^{-1}`.
pub fn tilting_pieces(params: &TemperedExponentParams) -> Result<usize> {
    let load = laplace_constant(params.a, params.alpha)? * params.lam.powf(params.alpha);
    Ok(load.ceil().max(1.0) as usize)
}

/// One-sided tempered stable variable with Lévy density `a e^{-λu} u^{-1-α}`
/// on `u > 0`, negated for the minus side. Sums `tilting_pieces` independent
/// draws with density `(a/m) e^{-λu} u^{-1-α}`, each obtained by accepting a
/// positive stable draw `Y` with probability `e^{-λY}`.
pub fn sample_tempered_one_sided<R: Rng + ?Sized>(params: &TemperedExponentParams, rng: &mut R) -> Result<f64> {
    let pieces = tilting_pieces(params)?;
    let scale = (laplace_constant(params.a, params.alpha)? / pieces as f64).powf(1.0 / params.alpha);
    let mut total = 0.0;
    for _ in 0..pieces {
        let mut accepted = false;
        for _ in 0..REJECTION_CAP {
            let y = scale * sample_positive_stable(params.alpha, rng);
            if rng.random::<f64>() < (-params.lam * y).exp() {
                total += y;
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::RejectionCap(REJECTION_CAP));
        }
    }
    Ok(match params.side {
        Sign::Plus => total,
        Sign::Minus => -total,
    })
}

/// `θ = θ₊ - θ₋ - d`, whose characteristic exponent is the κ-compensated one.
pub fn sample_tempered<R: Rng + ?Sized>(law: &TemperedLaw, rng: &mut R) -> Result<f64> {
    let plus = TemperedExponentParams {
        a: law.a_plus,
        lam: law.lam_plus,
        alpha: law.alpha,
        side: Sign::Plus,
    };
    let minus = TemperedExponentParams {
        a: law.a_minus,
        lam: law.lam_minus,
        alpha: law.alpha,
        side: Sign::Minus,
    };
    Ok(sample_tempered_one_sided(&plus, rng)? + sample_tempered_one_sided(&minus, rng)? - law.drift())
}

/// Draws coordinates of samples from one measure.
pub struct Sampler<'a> {
    m: &'a MeasureSpec,
    law: Option<TemperedLaw>,
    rng: RngSpec,
}

impl<'a> Sampler<'a> {
    pub fn new(m: &'a MeasureSpec, rng: RngSpec) -> Result<Self> {
        let report = m.validate();
        if !report.valid {
            return Err(invalid(report.failures.join("; ")));
        }
        Ok(Sampler {
            m,
            law: m.tempered_law()?,
            rng,
        })
    }

    /// Coordinate `n` of sample `sample`.
    pub fn coordinate(&self, sample: u64, n: i64) -> Result<Complex64> {
        if !self.m.domain().contains(n) {
            return Err(Error::NegativeIndex(n));
        }
        let mut rng = self.rng.coordinate_rng(sample, n);
        let w = self.m.sequence().value(n).unwrap_or(0.0);
        let mut z = match &self.m.family {
            Family::CompoundPoisson { .. } => {
                let count: f64 = Poisson::new(1.0).expect("unit rate").sample(&mut rng);
                Complex64::new(w * count, 0.0)
            }
            Family::SymmetricAlphaStable { alpha, .. } => {
                let s = w * 2f64.powf(-1.0 / alpha);
                let s1 = sample_sas(*alpha, s, &mut rng);
                let s2 = sample_sas(*alpha, s, &mut rng);
                Complex64::new(s1, s2)
            }
            Family::TemperedStable { .. } => {
                let law = self.law.as_ref().expect("tempered family");
                let t1 = sample_tempered(law, &mut rng)?;
                let t2 = sample_tempered(law, &mut rng)?;
                Complex64::new(w * t1, w * t2)
            }
        };
        let r = self.m.gaussian(n);
        if r > 0.0 {
            let g1: f64 = StandardNormal.sample(&mut rng);
            let g2: f64 = StandardNormal.sample(&mut rng);
            z += Complex64::new(g1, g2) * (r / 2.0).sqrt();
        }
        Ok(z)
    }

    /// Coordinates `0..N` on ℕ or `-N..=N` on ℤ of sample `sample`.
    pub fn series(&self, truncation: usize, sample: u64) -> Result<SampleVector> {
        let n = truncation as i64;
        let (lo, hi) = match self.m.domain() {
            IndexDomain::Naturals => (0, n - 1),
            IndexDomain::Integers => (-n, n),
        };
        let coords = (lo..=hi).map(|i| self.coordinate(sample, i)).collect::<Result<_>>()?;
        Ok(SampleVector {
            lo,
            coords,
            tail_bound: dropped_mass(self.m, truncation)?,
        })
    }
}

/// Power in which the dropped mass is measured: `λ_n` for compound Poisson,
/// `k_n^α` for the stable and tempered families.
fn mass_power(m: &MeasureSpec) -> f64 {
    m.alpha().unwrap_or(1.0)
}

fn dropped_mass(m: &MeasureSpec, truncation: usize) -> Result<f64> {
    let seq = m.sequence();
    let power = mass_power(m);
    let n = truncation as i64;
    match m.domain() {
        IndexDomain::Naturals => seq.series_tail_bound(power, n),
        IndexDomain::Integers => Ok(seq.series_tail_bound(power, n + 1)? + seq.series_tail_bound_left(power, n + 1)?),
    }
}

/// Smallest truncation whose dropped mass is below `TRUNCATION_TOL` of the total.
pub fn choose_truncation(m: &MeasureSpec) -> Result<usize> {
    let total = m.sequence().series_sum(m.domain(), mass_power(m))?.upper;
    let ok = |n: usize| -> Result<bool> { Ok(dropped_mass(m, n)? <= TRUNCATION_TOL * total) };
    let mut hi = 1;
    while !ok(hi)? {
        hi *= 2;
        if hi > crate::measures::MAX_TERMS {
            return Err(Error::TruncationCap(crate::measures::MAX_TERMS));
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub fn sample_poisson_cp(m: &MeasureSpec, truncation: usize, rng: RngSpec, sample: u64) -> Result<SampleVector> {
    expect_family(
        m,
        matches!(m.family, Family::CompoundPoisson { .. }),
        "compound Poisson",
    )?;
    Sampler::new(m, rng)?.series(truncation, sample)
}

pub fn sample_stable_series(m: &MeasureSpec, truncation: usize, rng: RngSpec, sample: u64) -> Result<SampleVector> {
    expect_family(m, matches!(m.family, Family::SymmetricAlphaStable { .. }), "stable")?;
    Sampler::new(m, rng)?.series(truncation, sample)
}

pub fn sample_tempered_series(m: &MeasureSpec, truncation: usize, rng: RngSpec, sample: u64) -> Result<SampleVector> {
    expect_family(m, matches!(m.family, Family::TemperedStable { .. }), "tempered stable")?;
    Sampler::new(m, rng)?.series(truncation, sample)
}

fn expect_family(m: &MeasureSpec, ok: bool, name: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "expected a {name} measure, got {:?}",
            m.family
        )))
    }
}

/// Evaluates `values(i)` for `i < samples` in blocks on the rayon pool and
/// returns them in sample order.
fn collect_samples<T, F>(samples: usize, values: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    if samples < MIN_SAMPLES {
        return Err(invalid(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    let blocks = samples.div_ceil(BLOCK);
    let per_block: Vec<Result<Vec<T>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(samples);
            (lo..hi).map(|i| values(i as u64)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(samples);
    for block in per_block {
        out.extend(block?);
    }
    Ok(out)
}

fn mean(zs: &[Complex64]) -> Complex64 {
    zs.iter().sum::<Complex64>() / zs.len() as f64
}

/// `√(Σ|ψ_i|² / (M(M-1)))` for centered influence values `ψ_i`.
fn stderr_of(psi: impl Iterator<Item = Complex64>, m: usize) -> f64 {
    let ss: f64 = psi.map(|z| z.norm_sqr()).sum();
    (ss / (m as f64 * (m as f64 - 1.0))).sqrt()
}

/// A functional flattened onto positions of a sampled coordinate list.
type Flat = Vec<(usize, Complex64)>;

fn pair_flat(coords: &[Complex64], f: &Flat) -> Complex64 {
    f.iter().map(|&(i, c)| coords[i] * c).sum()
}

/// `E e^{i Re⟨X, f⟩}`.
pub fn estimate_cf(m: &MeasureSpec, f: &DualFunctional, samples: usize, rng: RngSpec) -> Result<McEstimate> {
    m.check_domain(f)?;
    let sampler = Sampler::new(m, rng)?;
    let entries: Vec<(i64, Complex64)> = f.iter().collect();
    let zs = collect_samples(samples, |i| {
        let mut s = 0.0;
        for &(n, c) in &entries {
            s += (sampler.coordinate(i, n)? * c).re;
        }
        Ok(Complex64::new(0.0, s).exp())
    })?;
    let v = mean(&zs);
    Ok(McEstimate {
        value: v,
        stderr: stderr_of(zs.iter().map(|z| z - v), samples),
        samples,
    })
}

/// `C^=(x, y) = log φ(x - y) - log φ(x) - log φ(-y)` from one set of
/// samples, with a delta-method standard error.
pub fn estimate_codiff_equal(
    m: &MeasureSpec,
    x: &DualFunctional,
    y: &DualFunctional,
    samples: usize,
    rng: RngSpec,
) -> Result<McEstimate> {
    m.check_domain(x)?;
    m.check_domain(y)?;
    let sampler = Sampler::new(m, rng)?;
    let support = x.joint_support(y);
    let zs = collect_samples(samples, |i| {
        let (mut sx, mut sy) = (0.0, 0.0);
        for &n in &support {
            let v = sampler.coordinate(i, n)?;
            sx += (v * x.get(n)).re;
            sy += (v * y.get(n)).re;
        }
        let e = |t: f64| Complex64::new(0.0, t).exp();
        Ok([e(sx - sy), e(sx), e(-sy)])
    })?;
    let phi: Vec<Complex64> = (0..3)
        .map(|k| zs.iter().map(|z| z[k]).sum::<Complex64>() / samples as f64)
        .collect();
    if phi.iter().any(|p| p.norm() == 0.0) {
        return Err(Error::Numerical("empirical characteristic function vanished".into()));
    }
    let value = phi[0].ln() - phi[1].ln() - phi[2].ln();
    let psi = zs
        .iter()
        .map(|z| (z[0] - phi[0]) / phi[0] - (z[1] - phi[1]) / phi[1] - (z[2] - phi[2]) / phi[2]);
    Ok(McEstimate {
        value,
        stderr: stderr_of(psi, samples),
        samples,
    })
}

/// Observable terms `(a, φ, functional)` with the functional flattened onto
/// the sampled coordinates.
struct FlatObservable {
    terms: Vec<(Complex64, crate::codiff::Proj, Flat)>,
}

impl FlatObservable {
    fn eval(&self, coords: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(a, phi, f)| a * Complex64::new(0.0, phi.apply(pair_flat(coords, f))).exp())
            .sum()
    }
}

/// `(a_j, φ, T*ʲ x)` for every retained term of the observable.
fn expand_terms(
    obs: &ExpSeriesObservable,
    t: &WeightedShiftOperator,
) -> Result<Vec<(Complex64, crate::codiff::Proj, DualFunctional)>> {
    let total: f64 = obs
        .families
        .iter()
        .map(|f| match &f.coeffs {
            Coeffs::Finite { values } => values.iter().map(|c| c.norm()).sum(),
            Coeffs::Geometric { a0, ratio } => a0.norm() / (1.0 - ratio.abs()),
        })
        .sum();
    let mut out = Vec::new();
    for fam in &obs.families {
        let count = match &fam.coeffs {
            Coeffs::Finite { values } => values.len(),
            Coeffs::Geometric { a0, ratio } => {
                let r = ratio.abs();
                if r == 0.0 {
                    1
                } else {
                    // a0 r^J/(1-r) ≤ OBSERVABLE_TAIL·total
                    let j = ((OBSERVABLE_TAIL * total * (1.0 - r) / a0.norm().max(1e-300)).ln() / r.ln()).ceil();
                    (j.max(1.0) as usize).min(10_000)
                }
            }
        };
        let mut f = t.adjoint_power(fam.start, &fam.base)?;
        for j in 0..count {
            let a = match &fam.coeffs {
                Coeffs::Finite { values } => values[j],
                Coeffs::Geometric { a0, ratio } => a0 * ratio.powi(j as i32),
            };
            if j > 0 {
                f = t.adjoint_power(1, &f)?;
            }
            out.push((a, fam.phi, f.clone()));
        }
    }
    Ok(out)
}

/// `I_n(f, g)` from `f(X) g(TⁿX)` with `TⁿX` formed coordinate by coordinate
/// from the sampled `X`. The standard error comes from the influence function
/// of `mean(FG) - mean(F) mean(G)`.
pub fn estimate_in(
    m: &MeasureSpec,
    t: &WeightedShiftOperator,
    fobs: &ExpSeriesObservable,
    gobs: &ExpSeriesObservable,
    n: u32,
    samples: usize,
    rng: RngSpec,
) -> Result<McEstimate> {
    let p = m.p();
    fobs.validate(t, p)?;
    gobs.validate(t, p)?;
    let fterms = expand_terms(fobs, t)?;
    let gterms = expand_terms(gobs, t)?;
    for (_, _, f) in fterms.iter().chain(&gterms) {
        m.check_domain(f)?;
    }
    // coordinates of X needed by f(X), and sources of the coordinates of TⁿX needed by g
    let mut needed: BTreeMap<i64, usize> = BTreeMap::new();
    let mut g_sources = Vec::with_capacity(gterms.len());
    for (_, _, f) in &fterms {
        for k in f.indices() {
            needed.insert(k, 0);
        }
    }
    for (_, _, g) in &gterms {
        let mut src = Vec::with_capacity(g.len());
        for (k, c) in g.iter() {
            let (s, factor) = t.forward_power_source(n, k)?;
            if m.domain().contains(s) {
                needed.insert(s, 0);
                src.push((s, c * factor));
            }
        }
        g_sources.push(src);
    }
    for (pos, v) in needed.values_mut().enumerate() {
        *v = pos;
    }
    let indices: Vec<i64> = needed.keys().copied().collect();
    let flat_f = FlatObservable {
        terms: fterms
            .iter()
            .map(|(a, phi, f)| (*a, *phi, f.iter().map(|(k, c)| (needed[&k], c)).collect()))
            .collect(),
    };
    let flat_g = FlatObservable {
        terms: gterms
            .iter()
            .zip(&g_sources)
            .map(|((b, psi, _), src)| (*b, *psi, src.iter().map(|&(s, c)| (needed[&s], c)).collect()))
            .collect(),
    };
    let sampler = Sampler::new(m, rng)?;
    let fg = collect_samples(samples, |i| {
        let coords: Vec<Complex64> = indices
            .iter()
            .map(|&k| sampler.coordinate(i, k))
            .collect::<Result<_>>()?;
        Ok((flat_f.eval(&coords), flat_g.eval(&coords)))
    })?;
    let mf = mean(&fg.iter().map(|z| z.0).collect::<Vec<_>>());
    let mg = mean(&fg.iter().map(|z| z.1).collect::<Vec<_>>());
    let mfg = mean(&fg.iter().map(|z| z.0 * z.1).collect::<Vec<_>>());
    let psi = fg.iter().map(|&(f, g)| (f * g - mfg) - mg * (f - mf) - mf * (g - mg));
    Ok(McEstimate {
        value: mfg - mf * mg,
        stderr: stderr_of(psi, samples),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{log_cf, Drift, SeqSpec};

    fn single_2pi() -> MeasureSpec {
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
    fn single_atom_sample_shape() {
        let m = single_2pi();
        let rng = RngSpec::new(7, 0);
        for s in 0..20 {
            let v = sample_poisson_cp(&m, 4, rng, s).unwrap();
            assert_eq!(v.coords.len(), 4);
            let k = v.coords[0].re / (2.0 * PI);
            assert!((k - k.round()).abs() < 1e-12 && k >= 0.0);
            assert!(v.coords[1..].iter().all(|c| *c == Complex64::new(0.0, 0.0)));
            assert_eq!(v, sample_poisson_cp(&m, 4, rng, s).unwrap());
        }
    }

    #[test]
    fn coordinates_ignore_truncation() {
        let m = MeasureSpec::new(Family::SymmetricAlphaStable {
            alpha: 1.5,
            k: SeqSpec::Geometric { c: 1.0, r: 0.5 },
            p: 1.6,
        });
        let rng = RngSpec::new(3, 1);
        let a = sample_stable_series(&m, 5, rng, 11).unwrap();
        let b = sample_stable_series(&m, 9, rng, 11).unwrap();
        for i in -5..=5 {
            assert_eq!(a.get(i), b.get(i));
        }
        assert_eq!(a.truncation(), 5);
        assert!(a.tail_bound > b.tail_bound);
        assert_ne!(sample_stable_series(&m, 5, RngSpec::new(3, 2), 11).unwrap(), a);
    }

    #[test]
    fn cf_of_single_atom() {
        let m = single_2pi();
        let f = DualFunctional::real(IndexDomain::Naturals, [(0, 0.5)]).unwrap();
        let est = estimate_cf(&m, &f, 20_000, RngSpec::new(1, 0)).unwrap();
        let want = (-2f64).exp();
        assert!((est.value - want).norm() <= 4.0 * est.stderr, "{est:?}");
        assert!(estimate_cf(&m, &f, 50, RngSpec::new(1, 0)).is_err());
    }

    #[test]
    fn tempered_series_matches_log_cf() {
        let m = MeasureSpec::new(Family::TemperedStable {
            alpha: 0.5,
            a_minus: 1.0,
            a_plus: 2.0,
            lam_minus: 1.0,
            lam_plus: 1.5,
            k: SeqSpec::Geometric { c: 1.0, r: 0.5 },
            p: 1.0,
        });
        let f = DualFunctional::new(
            IndexDomain::Naturals,
            [(0, Complex64::new(0.7, -0.4)), (2, Complex64::new(1.0, 1.0))],
        )
        .unwrap();
        let est = estimate_cf(&m, &f, 20_000, RngSpec::new(5, 0)).unwrap();
        let want = log_cf(&m, &f, Drift::Full).unwrap().exp();
        assert!((est.value - want).norm() <= 4.0 * est.stderr, "{est:?} vs {want}");
    }

    #[test]
    fn acceptance_rate_matches_tilting_identity() {
        let params = TemperedExponentParams {
            a: 0.5,
            lam: 0.8,
            alpha: 0.6,
            side: Sign::Plus,
        };
        let want = tilting_acceptance(&params).unwrap();
        let scale = laplace_constant(params.a, params.alpha)
            .unwrap()
            .powf(1.0 / params.alpha);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = 200_000;
        let hits: f64 = (0..m)
            .map(|_| (-params.lam * scale * sample_positive_stable(params.alpha, &mut rng)).exp())
            .sum();
        let rate = hits / m as f64;
        assert!((rate - want).abs() < 0.01, "{rate} vs {want}");
    }

    #[test]
    fn truncation_choice() {
        let m = MeasureSpec::new(Family::CompoundPoisson {
            lambda: SeqSpec::Geometric { c: 1.0, r: 0.5 },
            p: 1.0,
        });
        // Σ_{n ≥ N} 2^{-n} = 2^{1-N} ≤ 2e-4
        assert_eq!(choose_truncation(&m).unwrap(), 14);
    }

    #[test]
    fn codiff_estimate_matches_closed_form() {
        let m = MeasureSpec::new(Family::SymmetricAlphaStable {
            alpha: 1.5,
            k: SeqSpec::Geometric { c: 1.0, r: 0.5 },
            p: 1.6,
        });
        let x = DualFunctional::real(IndexDomain::Integers, [(0, 1.0), (1, 0.5)]).unwrap();
        let y = DualFunctional::new(
            IndexDomain::Integers,
            [(0, Complex64::new(0.3, 0.8)), (1, Complex64::new(-1.0, 0.0))],
        )
        .unwrap();
        let est = estimate_codiff_equal(&m, &x, &y, 20_000, RngSpec::new(2, 0)).unwrap();
        let want = crate::codiff::codiff_equal(&m, &x, &y).unwrap().value;
        assert!((est.value - want).norm() <= 4.0 * est.stderr, "{est:?} vs {want}");
    }

    #[test]
    fn zero_observable_gives_zero_in() {
        let t = WeightedShiftOperator::identity();
        let m = single_2pi();
        let zero = DualFunctional::zero(IndexDomain::Naturals);
        let e0 = DualFunctional::unit(IndexDomain::Naturals, 0).unwrap();
        let f = ExpSeriesObservable::single(Complex64::new(1.0, 0.0), crate::codiff::Proj::PlusRe, zero);
        let g = ExpSeriesObservable::single(Complex64::new(1.0, 0.0), crate::codiff::Proj::MinusRe, e0);
        let est = estimate_in(&m, &t, &f, &g, 2, 1000, RngSpec::new(0, 0)).unwrap();
        assert!(est.value.norm() < 1e-12);
    }
}
