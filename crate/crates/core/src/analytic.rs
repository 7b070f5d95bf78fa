//! Closed-form generating functions, Laplace transforms and exact pmfs.

use std::str::FromStr;

use serde::Serialize;

use crate::coeffs::{build_inner_powers, coeff_c, tempering_gap, CoeffTable, InnerPowers};
use crate::error::{Error, Result};
use crate::params::{sgn, AuxParams, Family, TdlParams, TdsParams};

/// Pre-clamp slack tolerated before a probability is declared unstable.
pub const INSTABILITY_SLACK: f64 = 1e-6;

/// Default truncation point of a pmf table.
pub const DEFAULT_KMAX: usize = 60;

/// Probabilities `p[0..=kmax]` of an integer law plus the mass beyond `kmax`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmfTable {
    pub law: Family,
    pub kmax: usize,
    pub p: Vec<f64>,
    pub tail_mass: f64,
}

impl PmfTable {
    /// Clamps raw probabilities into `[0,1]` after checking they are sane,
    /// then books the remainder as tail mass.
    pub fn from_raw(law: Family, raw: Vec<f64>) -> Result<Self> {
        let mut p = raw;
        for (k, v) in p.iter_mut().enumerate() {
            if !v.is_finite() || *v < -INSTABILITY_SLACK || *v > 1.0 + INSTABILITY_SLACK {
                return Err(Error::NumericalInstability { k, value: *v });
            }
            *v = v.clamp(0.0, 1.0);
        }
        let total: f64 = p.iter().sum();
        let kmax = p.len().saturating_sub(1);
        Ok(PmfTable {
            law,
            kmax,
            p,
            tail_mass: 1.0 - total,
        })
    }

    pub fn cumulative(&self) -> Vec<f64> {
        self.p
            .iter()
            .scan(0.0, |acc, &v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }

    /// `Σ_k p[k] s^k` over the table.
    pub fn partial_pgf(&self, s: f64) -> f64 {
        self.p.iter().rev().fold(0.0, |acc, &v| acc * s + v)
    }
}

fn check_unit(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::domain(format!("s must lie in [0,1], got {s}")))
    }
}

fn check_positive_arg(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("t must be a finite non-negative real, got {t}")))
    }
}

/// `(1-cs)^a - (1-c)^a`, evaluated without cancellation for `c < 1`.
fn tempered_difference(a: f64, c: f64, s: f64) -> f64 {
    if c == 1.0 {
        return (a * (-s).ln_1p()).exp();
    }
    let l1 = (-c).ln_1p();
    let ls = (-c * s).ln_1p();
    (a * l1).exp() * (a * (ls - l1)).exp_m1()
}

/// Tempered discrete Linnik p.g.f., `d > 0` branch.
pub fn tdl_pgf(p: &TdlParams, s: f64) -> Result<f64> {
    check_unit(s)?;
    if p.d == 0.0 {
        return Err(Error::domain(
            "d = 0 is the Poisson-Tweedie branch; use tds_pgf",
        ));
    }
    if p.a == 0.0 || p.c == 0.0 {
        return Ok(1.0);
    }
    let u = sgn(p.a) * p.b * p.d * tempered_difference(p.a, p.c, s);
    Ok((-u.ln_1p() / p.d).exp())
}

/// Poisson-Tweedie (tempered discrete stable) p.g.f.
pub fn tds_pgf(p: &TdsParams, s: f64) -> Result<f64> {
    check_unit(s)?;
    if p.is_degenerate() {
        return Ok(1.0);
    }
    Ok((-sgn(p.a) * p.b * tempered_difference(p.a, p.c, s)).exp())
}

/// P.g.f. of any integer-valued law of the family.
pub fn family_pgf(law: &Family, s: f64) -> Result<f64> {
    check_unit(s)?;
    let v = match *law {
        Family::Tdl(p) => {
            if p.d == 0.0 {
                tds_pgf(&p.tds(), s)?
            } else {
                tdl_pgf(&p, s)?
            }
        }
        Family::Tds(p) => tds_pgf(&p, s)?,
        Family::DiscreteStable(p) => (-p.lambda * (1.0 - s).powf(p.gamma)).exp(),
        Family::DiscreteLinnik(p) => {
            (-p.delta * (p.lambda * (1.0 - s).powf(p.gamma) / p.delta).ln_1p()).exp()
        }
        Family::Aux(AuxParams::Sibuya { gamma }) => 1.0 - (1.0 - s).powf(gamma),
        Family::Aux(AuxParams::GdsSibuya { gamma, tau }) => {
            1.0 + (1.0 - tau).powf(gamma) - (1.0 - tau * s).powf(gamma)
        }
        Family::Aux(AuxParams::NegativeBinomial { pi, delta }) => {
            ((1.0 - pi) / (1.0 - pi * s)).powf(delta)
        }
        Family::Aux(AuxParams::Poisson { lambda }) => (-lambda * (1.0 - s)).exp(),
        other => return Err(Error::UnknownLaw(other.tag().to_string())),
    };
    Ok(v)
}

/// Laplace transform `E[exp(-tX)]` of the positive continuous laws.
pub fn family_laplace(law: &Family, t: f64) -> Result<f64> {
    check_positive_arg(t)?;
    let v = match *law {
        Family::PositiveStable(p) => (-p.lambda * t.powf(p.gamma)).exp(),
        Family::TemperedPositiveStable(p) => {
            if p.gamma == 0.0 {
                1.0
            } else {
                let th = p.theta.powf(p.gamma);
                (sgn(p.gamma) * p.lambda * (th - (p.theta + t).powf(p.gamma))).exp()
            }
        }
        Family::PositiveLinnik(p) => (1.0 + p.lambda * t.powf(p.gamma) / p.delta).powf(-p.delta),
        Family::TemperedPositiveLinnik(p) => {
            if p.gamma == 0.0 {
                1.0
            } else {
                let inc = (p.theta + t).powf(p.gamma) - p.theta.powf(p.gamma);
                (1.0 + sgn(p.gamma) * p.lambda * inc / p.delta).powf(-p.delta)
            }
        }
        Family::Aux(AuxParams::Gamma { scale, shape }) => (1.0 + scale * t).powf(-shape),
        other => return Err(Error::UnknownLaw(other.tag().to_string())),
    };
    Ok(v)
}

fn require_table(table: &CoeffTable, a: f64, k: usize) -> Result<()> {
    if table.covers(a, k) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "coefficient table (gamma={}, kmax={}) does not cover gamma={a}, k={k}",
            table.gamma, table.kmax
        )))
    }
}

/// Finite-sum pmf of the tempered discrete Linnik law, `d > 0`.
pub fn tdl_pmf(p: &TdlParams, k: usize, table: &CoeffTable) -> Result<f64> {
    if p.d == 0.0 {
        return Err(Error::domain(
            "d = 0 is the Poisson-Tweedie branch; use tds_pmf",
        ));
    }
    if p.a == 0.0 || p.c == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    require_table(table, p.a, k)?;
    let bd = p.b * p.d;
    let u0 = 1.0 + bd * tempering_gap(p.a, p.c);
    let r = 1.0 / p.d;
    // binom(-1/d, m) (-sgn(a) bd)^m u0^{-m}
    let step = -sgn(p.a) * bd / u0;
    let mut factor = 1.0;
    let mut sum = 0.0;
    for m in 0..=k {
        if m > 0 {
            factor *= (-r - (m - 1) as f64) / m as f64 * step;
        }
        sum += factor * table.get(m, k);
    }
    Ok((-p.c).powi(k as i32) * sum * (-r * u0.ln()).exp())
}

/// Finite-sum pmf of the Poisson-Tweedie law.
pub fn tds_pmf(p: &TdsParams, k: usize, table: &CoeffTable) -> Result<f64> {
    if p.is_degenerate() {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    require_table(table, p.a, k)?;
    let sb = sgn(p.a) * p.b;
    let mut factor = 1.0;
    let mut sum = 0.0;
    for m in 0..=k {
        if m > 0 {
            factor *= sb / m as f64;
        }
        sum += factor * table.get(m, k);
    }
    let lead = (-p.b * tempering_gap(p.a, p.c)).exp();
    Ok(lead * (-p.c).powi(k as i32) * sum)
}

/// Outer function `φ` of a p.g.f. of the form `φ(α + β(1 - ϕs)^γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterFunction {
    /// `x^p`
    Power(f64),
    Exp,
}

impl OuterFunction {
    /// `φ^{(m)}(x) / m!`
    fn scaled_derivative(&self, m: usize, x: f64) -> f64 {
        match *self {
            OuterFunction::Power(p) => crate::coeffs::gen_binom(p, m) * x.powf(p - m as f64),
            OuterFunction::Exp => {
                let fact: f64 = (1..=m).map(|i| i as f64).product();
                x.exp() / fact
            }
        }
    }
}

impl FromStr for OuterFunction {
    type Err = Error;

    /// Accepts `exp` or `power:<p>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "exp" {
            return Ok(OuterFunction::Exp);
        }
        if let Some(p) = s.strip_prefix("power:") {
            if let Ok(v) = p.parse::<f64>() {
                return Ok(OuterFunction::Power(v));
            }
        }
        Err(Error::UnsupportedOuterFunction(s.to_string()))
    }
}

/// `P(X = k)` for `g(s) = φ(α + β(1 - ϕs)^γ)`, by the finite double sum over
/// derivatives of `φ` at `α + β` and the coefficients `C_{γ,m}(k)`.
pub fn general_pmf_coefficient_form(
    outer: OuterFunction,
    alpha: f64,
    beta: f64,
    gamma: f64,
    phi: f64,
    k: usize,
) -> Result<f64> {
    check_unit(phi)?;
    let x0 = alpha + beta;
    if let OuterFunction::Power(p) = outer {
        if x0 <= 0.0 && p.fract() != 0.0 {
            return Err(Error::domain(format!(
                "x^{p} is not analytic at alpha + beta = {x0}"
            )));
        }
    }
    let mut sum = 0.0;
    for m in 0..=k {
        sum += (-beta).powi(m as i32) * outer.scaled_derivative(m, x0) * coeff_c(gamma, m, k);
    }
    Ok((-phi).powi(k as i32) * sum)
}

/// Log-weights of the outer mixture in the positive-term form of the pmf.
fn log_weights(law: &Family, rho: f64, kmax: usize) -> Vec<f64> {
    let mut lw = Vec::with_capacity(kmax + 1);
    match *law {
        Family::Tdl(p) if p.d > 0.0 => {
            // Negative Binomial(x, 1/d) with x = bdρ/(1+bdρ)
            let z = p.b * p.d * rho;
            let r = 1.0 / p.d;
            let lx = z.ln() - z.ln_1p();
            let mut acc = -r * z.ln_1p();
            lw.push(acc);
            for m in 1..=kmax {
                acc += ((m as f64 - 1.0 + r) / m as f64).ln() + lx;
                lw.push(acc);
            }
        }
        Family::Tdl(TdlParams { b, .. }) | Family::Tds(TdsParams { b, .. }) => {
            // Poisson(bρ)
            let mean = b * rho;
            let lm = mean.ln();
            let mut acc = -mean;
            lw.push(acc);
            for m in 1..=kmax {
                acc += lm - (m as f64).ln();
                lw.push(acc);
            }
        }
        _ => unreachable!("log_weights called for a non-tempered law"),
    }
    lw
}

fn degenerate_table(law: Family, kmax: usize) -> PmfTable {
    let mut p = vec![0.0; kmax + 1];
    p[0] = 1.0;
    PmfTable {
        law,
        kmax,
        p,
        tail_mass: 0.0,
    }
}

/// Pmf table of a tempered discrete Linnik or Poisson-Tweedie law.
///
/// The finite sum is evaluated as `Σ_m w_m [s^k] v(s)^m`, with `w_m` the
/// Negative Binomial (resp. Poisson) weights absorbing `binom(-1/d,m)`, the
/// power of the constant term and `ρ^m`; see [`InnerPowers`]. All terms are
/// non-negative.
pub fn build_pmf_table(law: &Family, kmax: usize) -> Result<PmfTable> {
    let (a, c) = match *law {
        Family::Tdl(p) => (p.a, p.c),
        Family::Tds(p) => (p.a, p.c),
        ref other => return Err(Error::UnknownLaw(other.tag().to_string())),
    };
    if a == 0.0 || c == 0.0 {
        return Ok(degenerate_table(*law, kmax));
    }
    let inner = build_inner_powers(a, c, kmax);
    pmf_from_inner(law, &inner)
}

/// Same as [`build_pmf_table`] with a prebuilt inner-power table, which only
/// depends on `(a, c)` and can be shared across `(b, d)`.
pub fn pmf_from_inner(law: &Family, inner: &InnerPowers) -> Result<PmfTable> {
    let kmax = inner.kmax;
    let lw = log_weights(law, inner.rho, kmax);
    let w: Vec<f64> = lw.iter().map(|v| v.exp()).collect();
    let raw = (0..=kmax)
        .map(|k| (0..=k).map(|m| w[m] * inner.get(m, k)).sum())
        .collect();
    PmfTable::from_raw(*law, raw)
}

/// Pmf table of any integer-valued law of the family.
pub fn family_pmf_table(law: &Family, kmax: usize) -> Result<PmfTable> {
    match *law {
        Family::Tdl(p) if p.d == 0.0 => {
            let t = build_pmf_table(&Family::Tds(p.tds()), kmax)?;
            Ok(PmfTable { law: *law, ..t })
        }
        Family::Tdl(_) | Family::Tds(_) => build_pmf_table(law, kmax),
        Family::DiscreteStable(p) => {
            let t = build_pmf_table(&Family::Tds(TdsParams::new(p.gamma, p.lambda, 1.0)?), kmax)?;
            Ok(PmfTable { law: *law, ..t })
        }
        Family::DiscreteLinnik(p) => {
            let tdl = TdlParams::new(p.gamma, p.lambda, 1.0, 1.0 / p.delta)?;
            let t = build_pmf_table(&Family::Tdl(tdl), kmax)?;
            Ok(PmfTable { law: *law, ..t })
        }
        Family::Aux(AuxParams::NegativeBinomial { pi, delta }) => {
            let mut v = delta * (-pi).ln_1p();
            let raw = (0..=kmax)
                .map(|k| {
                    if k > 0 {
                        v += ((k as f64 - 1.0 + delta) / k as f64 * pi).ln();
                    }
                    v.exp()
                })
                .collect();
            PmfTable::from_raw(*law, raw)
        }
        Family::Aux(AuxParams::Poisson { lambda }) => {
            let mut v = -lambda;
            let raw = (0..=kmax)
                .map(|k| {
                    if k > 0 {
                        v += (lambda / k as f64).ln();
                    }
                    v.exp()
                })
                .collect();
            PmfTable::from_raw(*law, raw)
        }
        Family::Aux(AuxParams::Sibuya { gamma }) => {
            PmfTable::from_raw(*law, gds_probabilities(gamma, 1.0, kmax))
        }
        Family::Aux(AuxParams::GdsSibuya { gamma, tau }) => {
            PmfTable::from_raw(*law, gds_probabilities(gamma, tau, kmax))
        }
        ref other => Err(Error::UnknownLaw(other.tag().to_string())),
    }
}

/// `P(0) = (1-τ)^γ`, `P(k) = τ^k q_k` with Sibuya probabilities
/// `q_1 = γ`, `q_{k+1} = q_k (k-γ)/(k+1)`.
pub(crate) fn gds_probabilities(gamma: f64, tau: f64, kmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push((1.0 - tau).powf(gamma));
    let mut q = gamma * tau;
    for k in 1..=kmax {
        if k > 1 {
            q *= (k as f64 - 1.0 - gamma) / k as f64 * tau;
        }
        out.push(q);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::build_table;
    use crate::params::{LinnikParams, StableParams, TemperedStableParams};

    fn tdl(a: f64, b: f64, c: f64, d: f64) -> TdlParams {
        TdlParams::new(a, b, c, d).unwrap()
    }

    fn tds(a: f64, b: f64, c: f64) -> TdsParams {
        TdsParams::new(a, b, c).unwrap()
    }

    const S_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

    #[test]
    fn tdl_pgf_examples() {
        for p in [tdl(0.5, 1.0, 0.5, 1.0), tdl(-2.0, 2.0, 0.9, 4.0), tdl(1.0, 0.5, 1.0, 0.25)] {
            assert!((tdl_pgf(&p, 1.0).unwrap() - 1.0).abs() < 1e-15);
        }
        let v = tdl_pgf(&tdl(1.0, 1.0, 0.5, 1.0), 0.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        for s in S_GRID {
            assert_eq!(tdl_pgf(&tdl(0.0, 3.0, 0.5, 2.0), s).unwrap(), 1.0);
        }
        assert!(tdl_pgf(&tdl(0.5, 1.0, 0.5, 0.0), 0.5).is_err());
        assert!(tdl_pgf(&tdl(0.5, 1.0, 0.5, 1.0), 1.5).is_err());
    }

    #[test]
    fn tds_pgf_examples() {
        assert!((tds_pgf(&tds(0.3, 2.0, 0.2), 1.0).unwrap() - 1.0).abs() < 1e-15);
        let v = tds_pgf(&tds(1.0, 2.0, 0.5), 0.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        let ds = Family::DiscreteStable(StableParams::new(0.6, 1.5).unwrap());
        for s in S_GRID {
            let a = tds_pgf(&tds(0.6, 1.5, 1.0), s).unwrap();
            let b = family_pgf(&ds, s).unwrap();
            assert!((a - b).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn family_pgf_examples() {
        let sib = Family::Aux(AuxParams::sibuya(1.0).unwrap());
        assert!((family_pgf(&sib, 0.3).unwrap() - 0.3).abs() < 1e-15);
        let nb = Family::Aux(AuxParams::negative_binomial(1.0 / 3.0, 1.0).unwrap());
        assert!((family_pgf(&nb, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let dl = Family::DiscreteLinnik(LinnikParams::new(0.7, 1.3, 1e6).unwrap());
        let ds = Family::DiscreteStable(StableParams::new(0.7, 1.3).unwrap());
        for s in S_GRID {
            let diff = family_pgf(&dl, s).unwrap() - family_pgf(&ds, s).unwrap();
            assert!(diff.abs() < 1e-5);
        }
        let ps = Family::PositiveStable(StableParams::new(0.5, 1.0).unwrap());
        assert!(matches!(family_pgf(&ps, 0.5), Err(Error::UnknownLaw(_))));
    }

    #[test]
    fn family_laplace_examples() {
        let ps = Family::PositiveStable(StableParams::new(1.0, 2.0).unwrap());
        assert!((family_laplace(&ps, 1.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        for &(g, l) in &[(0.5, 1.0), (0.8, 2.5), (1.0, 0.3)] {
            let ps = Family::PositiveStable(StableParams::new(g, l).unwrap());
            let tps0 = Family::TemperedPositiveStable(TemperedStableParams::new(g, l, 0.0).unwrap());
            for t in [0.1, 0.5, 1.0, 3.0] {
                assert!(
                    (family_laplace(&ps, t).unwrap() - family_laplace(&tps0, t).unwrap()).abs()
                        < 1e-15
                );
            }
            let theta = 0.7;
            let tps =
                Family::TemperedPositiveStable(TemperedStableParams::new(g, l, theta).unwrap());
            for t in [0.1, 0.5, 1.0, 3.0] {
                let lhs = family_laplace(&tps, t).unwrap();
                let rhs =
                    family_laplace(&ps, theta + t).unwrap() / family_laplace(&ps, theta).unwrap();
                assert!((lhs - rhs).abs() < 1e-14, "γ={g} t={t}");
            }
        }
        let nb = Family::Aux(AuxParams::negative_binomial(0.5, 1.0).unwrap());
        assert!(matches!(family_laplace(&nb, 1.0), Err(Error::UnknownLaw(_))));
        let g = Family::Aux(AuxParams::gamma(2.0, 3.0).unwrap());
        assert!((family_laplace(&g, 0.5).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn tdl_pmf_examples() {
        let p = tdl(0.5, 1.0, 0.5, 1.0);
        let table = build_table(0.5, 10);
        let p0 = tdl_pmf(&p, 0, &table).unwrap();
        assert!((p0 - tdl_pgf(&p, 0.0).unwrap()).abs() < 1e-15);

        let g = tdl(1.0, 1.0, 0.5, 1.0);
        let table = build_table(1.0, 5);
        let p1 = tdl_pmf(&g, 1, &table).unwrap();
        assert!((p1 - 2.0 / 9.0).abs() < 1e-15);

        assert!(tdl_pmf(&tdl(0.5, 1.0, 0.5, 0.0), 1, &build_table(0.5, 3)).is_err());
        assert!(tdl_pmf(&p, 4, &build_table(0.25, 10)).is_err());
        assert!(tdl_pmf(&p, 40, &build_table(0.5, 10)).is_err());
    }

    #[test]
    fn tds_pmf_examples() {
        let p = tds(1.0, 2.0, 0.5);
        let table = build_table(1.0, 10);
        let mut fact = 1.0;
        for k in 0..=10 {
            if k > 0 {
                fact *= k as f64;
            }
            let exact = (-1.0f64).exp() / fact;
            assert!((tds_pmf(&p, k, &table).unwrap() - exact).abs() < 1e-15, "k={k}");
        }
        let q = tds(0.3, 1.2, 0.6);
        let p0 = tds_pmf(&q, 0, &build_table(0.3, 0)).unwrap();
        assert!((p0 - tds_pgf(&q, 0.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn general_form_specializes() {
        for &(a, b, c, d) in &[(0.5, 1.0, 0.5, 1.0), (-1.0, 2.0, 0.3, 0.25), (0.25, 0.5, 0.9, 4.0)] {
            let p = tdl(a, b, c, d);
            let table = build_table(a, 12);
            let s = sgn(a);
            let pow_a = (1.0 - c).powf(a);
            for k in 0..=12 {
                let g = general_pmf_coefficient_form(
                    OuterFunction::Power(-1.0 / d),
                    1.0 - s * b * d * pow_a,
                    s * b * d,
                    a,
                    c,
                    k,
                )
                .unwrap();
                let direct = tdl_pmf(&p, k, &table).unwrap();
                assert!((g - direct).abs() <= 1e-12 * direct.abs() + 1e-15, "k={k}");

                let g = general_pmf_coefficient_form(
                    OuterFunction::Exp,
                    s * b * pow_a,
                    -s * b,
                    a,
                    c,
                    k,
                )
                .unwrap();
                let direct = tds_pmf(&p.tds(), k, &table).unwrap();
                assert!((g - direct).abs() <= 1e-12 * direct.abs() + 1e-15, "k={k}");
            }
        }
        let v = general_pmf_coefficient_form(OuterFunction::Exp, 0.3, -1.0, 0.4, 0.5, 0).unwrap();
        assert!((v - (-0.7f64).exp()).abs() < 1e-15);
        assert!(matches!(
            "log".parse::<OuterFunction>(),
            Err(Error::UnsupportedOuterFunction(_))
        ));
        assert_eq!("power:-2".parse::<OuterFunction>().unwrap(), OuterFunction::Power(-2.0));
    }

    #[test]
    fn pmf_table_examples() {
        let t = build_pmf_table(&Family::Tdl(tdl(0.0, 1.0, 0.5, 1.0)), 10).unwrap();
        assert_eq!(t.p[0], 1.0);
        assert!(t.p[1..].iter().all(|&v| v == 0.0));
        assert_eq!(t.tail_mass, 0.0);

        let t = build_pmf_table(&Family::Tdl(tdl(1.0, 1.0, 0.5, 1.0)), 20).unwrap();
        for (k, &v) in t.p.iter().enumerate() {
            let exact = 2.0 / 3.0 * (1.0f64 / 3.0).powi(k as i32);
            assert!((v - exact).abs() <= 1e-15 * exact.max(1e-300) + 1e-17, "k={k}");
        }
        let tail = (1.0f64 / 3.0).powi(21);
        assert!((t.tail_mass - tail).abs() < 1e-14);
    }

    #[test]
    fn positive_form_matches_direct_sum() {
        for &(a, b, c, d) in &[
            (0.5, 1.0, 0.5, 1.0),
            (-1.0, 2.0, 0.3, 0.25),
            (0.25, 0.5, 0.9, 4.0),
            (-2.0, 2.0, 0.9, 4.0),
            (0.75, 1.0, 1.0, 1.0),
        ] {
            let p = tdl(a, b, c, d);
            let table = build_table(a, 30);
            let fast = build_pmf_table(&Family::Tdl(p), 30).unwrap();
            let fast_tds = build_pmf_table(&Family::Tds(p.tds()), 30).unwrap();
            for k in 0..=30 {
                let direct = tdl_pmf(&p, k, &table).unwrap();
                assert!(
                    (fast.p[k] - direct).abs() <= 1e-11 * direct,
                    "({a},{b},{c},{d}) k={k}: {} vs {direct}",
                    fast.p[k]
                );
                let direct = tds_pmf(&p.tds(), k, &table).unwrap();
                assert!((fast_tds.p[k] - direct).abs() <= 1e-11 * direct, "tds k={k}");
            }
        }
    }

    #[test]
    fn pgf_and_table_consistency() {
        let laws = [
            Family::Tdl(tdl(0.5, 1.0, 0.5, 1.0)),
            Family::Tdl(tdl(-1.0, 0.5, 0.1, 4.0)),
            Family::Tds(tds(0.25, 2.0, 0.9)),
            Family::Aux(AuxParams::gds_sibuya(0.4, 0.6).unwrap()),
            Family::Aux(AuxParams::poisson(3.0).unwrap()),
            Family::Aux(AuxParams::negative_binomial(0.4, 2.5).unwrap()),
            Family::DiscreteLinnik(LinnikParams::new(0.9, 1.0, 2.0).unwrap()),
        ];
        for law in &laws {
            let t = family_pmf_table(law, 200).unwrap();
            assert!(t.tail_mass >= -1e-9);
            for s in [0.0, 0.25, 0.5, 0.75] {
                let exact = family_pgf(law, s).unwrap();
                let approx = t.partial_pgf(s);
                assert!(
                    (exact - approx).abs() <= 1e-8 + t.tail_mass.max(0.0),
                    "{law:?} s={s}"
                );
            }
        }
    }

    #[test]
    fn special_case_identities() {
        for &(b, c, d) in &[(1.0, 0.5, 1.0), (2.0, 0.1, 0.25), (0.5, 0.9, 4.0)] {
            let p = tdl(1.0, b, c, d);
            let bcd = b * c * d;
            let nb = Family::Aux(AuxParams::negative_binomial(bcd / (1.0 + bcd), 1.0 / d).unwrap());
            for s in S_GRID {
                let diff = tdl_pgf(&p, s).unwrap() - family_pgf(&nb, s).unwrap();
                assert!(diff.abs() < 1e-12);
            }
        }
        for &(a, b, d) in &[(0.25, 1.0, 1.0), (0.75, 2.0, 0.25), (1.0, 0.5, 4.0)] {
            let p = tdl(a, b, 1.0, d);
            let dl = Family::DiscreteLinnik(LinnikParams::new(a, b, 1.0 / d).unwrap());
            for s in S_GRID {
                let diff = tdl_pgf(&p, s).unwrap() - family_pgf(&dl, s).unwrap();
                assert!(diff.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_d_approaches_poisson_tweedie() {
        for &(a, b, c) in &[(0.5, 1.0, 0.5), (-1.0, 2.0, 0.9), (0.25, 0.5, 1.0)] {
            let p = tdl(a, b, c, 1e-8);
            for i in 0..=100 {
                let s = i as f64 / 100.0;
                let diff = tdl_pgf(&p, s).unwrap() - tds_pgf(&p.tds(), s).unwrap();
                assert!(diff.abs() < 1e-6);
            }
        }
    }

    #[test]
    fn compound_representations() {
        for &(a, b, c, d) in &[(0.5, 1.0, 0.5, 1.0), (0.25, 2.0, 0.9, 0.25), (0.75, 0.5, 1.0, 4.0)] {
            let p = tdl(a, b, c, d);
            let bd = b * d;
            let z = Family::Aux(AuxParams::negative_binomial(bd / (1.0 + bd), 1.0 / d).unwrap());
            let w = Family::Aux(AuxParams::gds_sibuya(a, c).unwrap());
            for s in S_GRID {
                let inner = family_pgf(&w, s).unwrap();
                let diff = tdl_pgf(&p, s).unwrap() - family_pgf(&z, inner).unwrap();
                assert!(diff.abs() < 1e-12, "s={s}");
            }
        }
        for &(a, b, c, d) in &[(-1.0, 1.0, 0.5, 1.0), (-2.0, 0.5, 0.1, 4.0), (-0.5, 2.0, 0.9, 0.25)] {
            let p = tdl(a, b, c, d);
            let w = Family::Aux(AuxParams::negative_binomial(c, -a).unwrap());
            let scale = b * d * (1.0 - c).powf(a);
            for s in S_GRID {
                let inner = family_pgf(&w, s).unwrap();
                let rhs = (1.0 + scale * (1.0 - inner)).powf(-1.0 / d);
                assert!((tdl_pgf(&p, s).unwrap() - rhs).abs() < 1e-12, "s={s}");
            }
        }
    }
}
