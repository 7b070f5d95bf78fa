//! Independent verification paths.
//!
//! [`series_pmf`] expands a probability generating function as a truncated
//! power series in double-double arithmetic and reads the pmf off its
//! coefficients. It shares no code with the coefficient tables of
//! [`crate::analytic`], so the two can check each other.
//!
//! The Monte-Carlo helpers (`chi_square_gof`, `empirical_pgf`,
//! `empirical_laplace`, `total_variation`) compare sampler output against
//! exact laws.

use std::ops::{Add, Mul, Sub};

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analytic::PmfTable;
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::params::{sgn, AuxParams, Family};
use crate::sampler::{SampleBatch, SampleValues};

/// Largest truncation order accepted by [`series_pmf`].
pub const MAX_SERIES_ORDER: usize = 200;

/// Smallest sample accepted by the Monte-Carlo helpers.
pub const MIN_SAMPLE: usize = 1000;

/// Truncated power series `Σ_{k<=K} c_k s^k` with double-double coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Dd>,
}

impl TruncatedSeries {
    pub fn zero(order: usize) -> Self {
        TruncatedSeries {
            coeffs: vec![Dd::ZERO; order + 1],
        }
    }

    pub fn constant(x: Dd, order: usize) -> Self {
        let mut s = TruncatedSeries::zero(order);
        s.coeffs[0] = x;
        s
    }

    /// Series from leading coefficients, zero-padded up to `order`.
    pub fn from_coeffs(c: &[f64], order: usize) -> Self {
        let mut s = TruncatedSeries::zero(order);
        for (dst, &v) in s.coeffs.iter_mut().zip(c) {
            *dst = Dd::from_f64(v);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Dd {
        self.coeffs[k]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64()).collect()
    }

    /// `alpha + beta * self`.
    pub fn affine(&self, alpha: Dd, beta: Dd) -> Self {
        let mut coeffs: Vec<Dd> = self.coeffs.iter().map(|&c| beta * c).collect();
        coeffs[0] += alpha;
        TruncatedSeries { coeffs }
    }

    pub fn scale(&self, f: Dd) -> Self {
        self.affine(Dd::ZERO, f)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let k = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..=k).map(|i| self.coeffs[i] + rhs.coeffs[i]).collect(),
        }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let k = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..=k).map(|i| self.coeffs[i] - rhs.coeffs[i]).collect(),
        }
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let k = self.order().min(rhs.order());
        let coeffs = (0..=k)
            .map(|n| {
                let mut acc = Dd::ZERO;
                for j in 0..=n {
                    acc += self.coeffs[j] * rhs.coeffs[n - j];
                }
                acc
            })
            .collect();
        TruncatedSeries { coeffs }
    }
}

/// Expansion of `(1 - cs)^a` to order `K`: coefficients `binom(a,k)(-c)^k`.
pub fn series_binomial_power(c: f64, a: f64, order: usize) -> Result<TruncatedSeries> {
    if !(c.abs() <= 1.0) || !a.is_finite() {
        return Err(Error::domain(format!("need |c| <= 1 and finite a, got c={c}, a={a}")));
    }
    let a = Dd::from_f64(a);
    let mc = Dd::from_f64(-c);
    let mut s = TruncatedSeries::zero(order);
    let mut t = Dd::ONE;
    s.coeffs[0] = t;
    for k in 1..=order {
        let kk = Dd::from_f64(k as f64);
        t = t * (a - kk + Dd::ONE) / kk * mc;
        s.coeffs[k] = t;
    }
    Ok(s)
}

/// Outer function applied by [`series_compose_outer`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeriesOuter {
    Power(Dd),
    Exp,
}

/// Taylor coefficients of `outer(inner(s))`.
///
/// Uses the recurrences obtained from `f' u = p u' f` (power) and
/// `f' = u' f` (exponential).
pub fn series_compose_outer(inner: &TruncatedSeries, outer: SeriesOuter) -> Result<TruncatedSeries> {
    let order = inner.order();
    let u = &inner.coeffs;
    let mut f = vec![Dd::ZERO; order + 1];
    match outer {
        SeriesOuter::Exp => {
            f[0] = u[0].exp();
            for k in 1..=order {
                let mut acc = Dd::ZERO;
                for j in 1..=k {
                    acc += Dd::from_f64(j as f64) * u[j] * f[k - j];
                }
                f[k] = acc / Dd::from_f64(k as f64);
            }
        }
        SeriesOuter::Power(p) => {
            let u0 = u[0];
            if u0.hi() <= 0.0 {
                return Err(Error::SingularComposition(u0.to_f64()));
            }
            f[0] = u0.powf(p);
            for k in 1..=order {
                let mut acc = Dd::ZERO;
                for j in 1..=k {
                    let w = p * Dd::from_f64(j as f64) - Dd::from_f64((k - j) as f64);
                    acc += w * u[j] * f[k - j];
                }
                f[k] = acc / (Dd::from_f64(k as f64) * u0);
            }
        }
    }
    Ok(TruncatedSeries { coeffs: f })
}

fn dd(x: f64) -> Dd {
    Dd::from_f64(x)
}

/// `(1 - c)^a` in double-double, with `0^a = 0` for `a > 0`.
fn tempered_level(c: f64, a: f64) -> Dd {
    (Dd::ONE - dd(c)).powf(dd(a))
}

/// p.g.f. of an integer law as a truncated series.
pub fn pgf_series(law: &Family, order: usize) -> Result<TruncatedSeries> {
    match *law {
        Family::Tdl(p) => {
            if p.a == 0.0 || p.c == 0.0 {
                return Ok(TruncatedSeries::constant(Dd::ONE, order));
            }
            let inner = series_binomial_power(p.c, p.a, order)?;
            let sg = dd(sgn(p.a));
            let lvl = tempered_level(p.c, p.a);
            if p.d == 0.0 {
                let b = dd(p.b);
                let u = inner.affine(sg * b * lvl, -(sg * b));
                return series_compose_outer(&u, SeriesOuter::Exp);
            }
            let bd = dd(p.b) * dd(p.d);
            let u = inner.affine(Dd::ONE - sg * bd * lvl, sg * bd);
            series_compose_outer(&u, SeriesOuter::Power(-(Dd::ONE / dd(p.d))))
        }
        Family::Tds(p) => {
            if p.is_degenerate() {
                return Ok(TruncatedSeries::constant(Dd::ONE, order));
            }
            let inner = series_binomial_power(p.c, p.a, order)?;
            let sg = dd(sgn(p.a));
            let b = dd(p.b);
            let u = inner.affine(sg * b * tempered_level(p.c, p.a), -(sg * b));
            series_compose_outer(&u, SeriesOuter::Exp)
        }
        Family::DiscreteStable(p) => {
            let u = series_binomial_power(1.0, p.gamma, order)?.scale(-dd(p.lambda));
            series_compose_outer(&u, SeriesOuter::Exp)
        }
        Family::DiscreteLinnik(p) => {
            let inner = series_binomial_power(1.0, p.gamma, order)?;
            let u = inner.affine(Dd::ONE, dd(p.lambda) / dd(p.delta));
            series_compose_outer(&u, SeriesOuter::Power(-dd(p.delta)))
        }
        Family::Aux(AuxParams::NegativeBinomial { pi, delta }) => {
            let s = series_binomial_power(pi, -delta, order)?;
            Ok(s.scale(tempered_level(pi, delta)))
        }
        Family::Aux(AuxParams::Poisson { lambda }) => {
            let u = TruncatedSeries::from_coeffs(&[-lambda, lambda], order);
            series_compose_outer(&u, SeriesOuter::Exp)
        }
        Family::Aux(AuxParams::Sibuya { gamma }) => {
            Ok(series_binomial_power(1.0, gamma, order)?.affine(Dd::ONE, -Dd::ONE))
        }
        Family::Aux(AuxParams::GdsSibuya { gamma, tau }) => {
            let s = series_binomial_power(tau, gamma, order)?;
            Ok(s.affine(Dd::ONE + tempered_level(tau, gamma), -Dd::ONE))
        }
        _ => Err(Error::UnknownLaw(law.tag().to_string())),
    }
}

/// Pmf of an integer law from the Taylor coefficients of its p.g.f.
pub fn series_pmf(law: &Family, order: usize) -> Result<PmfTable> {
    if order > MAX_SERIES_ORDER {
        return Err(Error::domain(format!(
            "series order {order} exceeds {MAX_SERIES_ORDER}"
        )));
    }
    let s = pgf_series(law, order)?;
    PmfTable::from_raw(*law, s.to_f64())
}

/// One pooled bin of a goodness-of-fit test; `hi = None` is the open upper tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofBin {
    pub lo: u64,
    pub hi: Option<u64>,
    pub observed: u64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins: Vec<GofBin>,
    pub n: usize,
}

/// Pools consecutive cells so every bin expects at least 5 draws.
fn pooled_bins(pmf: &PmfTable, counts: &[u64], n: f64) -> Vec<GofBin> {
    let mut bins: Vec<GofBin> = Vec::new();
    let mut cur = GofBin {
        lo: 0,
        hi: Some(0),
        observed: 0,
        expected: 0.0,
    };
    for (k, &p) in pmf.p.iter().enumerate() {
        cur.hi = Some(k as u64);
        cur.observed += counts[k];
        cur.expected += n * p;
        if cur.expected >= 5.0 {
            bins.push(cur.clone());
            cur = GofBin {
                lo: k as u64 + 1,
                hi: Some(k as u64 + 1),
                observed: 0,
                expected: 0.0,
            };
        }
    }
    // everything beyond the table joins the last open bin
    cur.hi = None;
    cur.observed += counts[pmf.p.len()];
    cur.expected += n * pmf.tail_mass.max(0.0);
    if cur.expected >= 5.0 || bins.is_empty() {
        bins.push(cur);
    } else {
        let last = bins.last_mut().unwrap();
        last.hi = None;
        last.observed += cur.observed;
        last.expected += cur.expected;
    }
    bins
}

/// Pearson chi-square test of integer draws against a pmf table.
pub fn chi_square_gof(samples: &SampleBatch, pmf: &PmfTable) -> Result<GofReport> {
    let xs = match &samples.values {
        SampleValues::Int(v) => v,
        SampleValues::Real(_) => return Err(Error::UnknownLaw(samples.law.tag().to_string())),
    };
    let n = xs.len();
    if n < MIN_SAMPLE {
        return Err(Error::InsufficientSample {
            need: MIN_SAMPLE,
            got: n,
        });
    }
    let kmax = pmf.p.len();
    let mut counts = vec![0u64; kmax + 1];
    for &x in xs {
        counts[(x as usize).min(kmax)] += 1;
    }
    let bins = pooled_bins(pmf, &counts, n as f64);
    let mut statistic = 0.0;
    for b in &bins {
        let diff = b.observed as f64 - b.expected;
        if b.expected > 0.0 {
            statistic += diff * diff / b.expected;
        } else if b.observed > 0 {
            statistic = f64::INFINITY;
        }
    }
    let dof = bins.len().saturating_sub(1).max(1);
    let p_value = if statistic == 0.0 {
        1.0
    } else if statistic.is_infinite() {
        0.0
    } else {
        ChiSquared::new(dof as f64)
            .map_err(|e| Error::domain(e.to_string()))?
            .sf(statistic)
            .clamp(0.0, 1.0)
    };
    Ok(GofReport {
        statistic,
        dof,
        p_value,
        bins,
        n,
    })
}

fn mean_and_se(values: impl Iterator<Item = f64>, n: usize) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let m = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}

fn check_sample(n: usize) -> Result<()> {
    if n < MIN_SAMPLE {
        Err(Error::InsufficientSample {
            need: MIN_SAMPLE,
            got: n,
        })
    } else {
        Ok(())
    }
}

/// Sample mean of `s^X` and its standard error.
pub fn empirical_pgf(samples: &SampleBatch, s: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::domain(format!("s must lie in [0,1], got {s}")));
    }
    let xs = samples
        .ints()
        .ok_or_else(|| Error::UnknownLaw(samples.law.tag().to_string()))?;
    check_sample(xs.len())?;
    Ok(mean_and_se(
        xs.iter().map(|&x| if x == 0 { 1.0 } else { s.powf(x as f64) }),
        xs.len(),
    ))
}

/// Sample mean of `exp(-tX)` and its standard error.
pub fn empirical_laplace(samples: &SampleBatch, t: f64) -> Result<(f64, f64)> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!("t must be finite and >= 0, got {t}")));
    }
    let xs = samples.values.as_f64();
    check_sample(xs.len())?;
    Ok(mean_and_se(xs.iter().map(|&x| (-t * x).exp()), xs.len()))
}

fn frequencies(xs: &[u64], cells: usize) -> Vec<f64> {
    let mut f = vec![0.0; cells + 1];
    for &x in xs {
        f[(x as usize).min(cells)] += 1.0;
    }
    let n = xs.len() as f64;
    f.iter_mut().for_each(|v| *v /= n);
    f
}

/// Total-variation distance between the empirical laws of two integer samples.
pub fn total_variation(x: &[u64], y: &[u64]) -> f64 {
    let cells = x.iter().chain(y).copied().max().unwrap_or(0) as usize;
    let fx = frequencies(x, cells);
    let fy = frequencies(y, cells);
    0.5 * fx.iter().zip(&fy).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Approximate expected total-variation distance between two independent
/// samples of sizes `n1`, `n2` from the law `pmf`, under the normal
/// approximation of each cell difference.
pub fn expected_tv_fluctuation(pmf: &PmfTable, n1: usize, n2: usize) -> f64 {
    let scale = 1.0 / n1 as f64 + 1.0 / n2 as f64;
    let cell = |p: f64| {
        let sd = (p * (1.0 - p) * scale).sqrt();
        sd * (2.0 / std::f64::consts::PI).sqrt()
    };
    let body: f64 = pmf.p.iter().map(|&p| cell(p)).sum();
    0.5 * (body + cell(pmf.tail_mass.max(0.0)))
}
