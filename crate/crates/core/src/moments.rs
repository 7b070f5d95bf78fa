//! Mean, variance, dispersion, third and fourth central moments, skewness and
//! kurtosis of the tempered discrete Linnik law, and the `(α₃, α₄)` traces
//! plotted over `(c, d)` grids.

use serde::Serialize;

use crate::analytic::PmfTable;
use crate::error::{Error, Result};
use crate::params::{sgn, TdlParams};

/// Largest tail mass for which table moments are trusted.
pub const MAX_TAIL_MASS: f64 = 1e-9;

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mu: f64,
    pub sigma2: f64,
    pub D: f64,
    pub m3: f64,
    pub m4: f64,
    pub alpha3: f64,
    pub alpha4: f64,
}

/// Closed-form moments. Requires `c < 1`; `a = 0` or `c = 0` is the point
/// mass at zero, for which the shape indexes are undefined.
pub fn tdl_moments(p: &TdlParams) -> Result<MomentSummary> {
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    if c >= 1.0 {
        return Err(Error::domain("moments need c < 1"));
    }
    if a == 0.0 || c == 0.0 {
        return Err(Error::DegenerateDistribution(format!(
            "a={a}, c={c} is the point mass at 0"
        )));
    }
    let q = 1.0 - c;
    let mu = sgn(a) * a * b * c * q.powf(a - 1.0);
    let sigma2 = d * mu * mu + (1.0 - a * c) * mu / q;
    let dispersion = d * mu + (1.0 - a * c) / q;
    let m3 = sigma2 * sigma2 / mu + d * mu * sigma2 + c * (1.0 - a) * mu / (q * q);
    let m4 = 3.0 * (2.0 * d + 1.0) * sigma2 * sigma2
        + (4.0 * c * (1.0 - a) + (1.0 - a * c).powi(2)) * sigma2 / (q * q)
        + c * c * (1.0 - a * a) * mu / (q * q * q);
    Ok(MomentSummary {
        mu,
        sigma2,
        D: dispersion,
        m3,
        m4,
        alpha3: m3 / sigma2.powf(1.5),
        alpha4: m4 / (sigma2 * sigma2),
    })
}

/// Moments by direct summation over a pmf table.
///
/// Shape indexes of a zero-variance table are `NaN`, as is `D` when `μ = 0`.
pub fn moments_from_pmf(table: &PmfTable) -> Result<MomentSummary> {
    if !(table.tail_mass.abs() < MAX_TAIL_MASS) {
        return Err(Error::TailTooHeavy(table.tail_mass));
    }
    let mu: f64 = table.p.iter().enumerate().map(|(k, &p)| k as f64 * p).sum();
    let central = |j: i32| -> f64 {
        table
            .p
            .iter()
            .enumerate()
            .map(|(k, &p)| (k as f64 - mu).powi(j) * p)
            .sum()
    };
    let sigma2 = central(2);
    let m3 = central(3);
    let m4 = central(4);
    let nan_unless = |ok: bool, v: f64| if ok { v } else { f64::NAN };
    Ok(MomentSummary {
        mu,
        sigma2,
        D: nan_unless(mu > 0.0, sigma2 / mu),
        m3,
        m4,
        alpha3: nan_unless(sigma2 > 0.0, m3 / sigma2.powf(1.5)),
        alpha4: nan_unless(sigma2 > 0.0, m4 / (sigma2 * sigma2)),
    })
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub c: f64,
    pub d: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub D: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewKurtTrace {
    pub a: f64,
    pub b: f64,
    pub rows: Vec<TracePoint>,
    /// Notes about grid values that were dropped.
    pub warnings: Vec<String>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        _ if lo == hi => vec![lo],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `(α₃, α₄)` over a rectangular `(c, d)` grid. Negative `d` values are
/// dropped with a warning.
pub fn skew_kurt_trace(
    a: f64,
    b: f64,
    c_range: (f64, f64),
    d_range: (f64, f64),
    grid: (usize, usize),
) -> Result<SkewKurtTrace> {
    let cs = linspace(c_range.0, c_range.1, grid.0);
    let all_d = linspace(d_range.0, d_range.1, grid.1);
    let ds: Vec<f64> = all_d.iter().copied().filter(|&d| d >= 0.0).collect();
    let mut warnings = Vec::new();
    let dropped = all_d.len() - ds.len();
    if dropped > 0 {
        warnings.push(format!(
            "skipped {dropped} grid value(s) with d < 0; the law is only defined here for d >= 0"
        ));
    }
    if cs.is_empty() || ds.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(cs.len() * ds.len());
    for &c in &cs {
        for &d in &ds {
            let m = tdl_moments(&TdlParams::new(a, b, c, d)?)?;
            rows.push(TracePoint {
                c,
                d,
                alpha3: m.alpha3,
                alpha4: m.alpha4,
                D: m.D,
            });
        }
    }
    Ok(SkewKurtTrace { a, b, rows, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::build_pmf_table;
    use crate::params::Family;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn negative_binomial_mean() {
        let m = tdl_moments(&TdlParams::new(1.0, 1.0, 0.5, 1.0).unwrap()).unwrap();
        assert!(rel(m.mu, 0.5) < 1e-15);
        assert!(rel(m.sigma2, 0.75) < 1e-15);
    }

    #[test]
    fn degenerate_and_boundary() {
        assert!(matches!(
            tdl_moments(&TdlParams::new(0.0, 1.0, 0.5, 1.0).unwrap()),
            Err(Error::DegenerateDistribution(_))
        ));
        assert!(matches!(
            tdl_moments(&TdlParams::new(0.5, 1.0, 1.0, 1.0).unwrap()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn poisson_tweedie_overdispersed() {
        for (a, c) in [(0.5, 0.3), (-1.0, 0.7), (1.0, 0.2), (0.9, 0.99)] {
            let m = tdl_moments(&TdlParams::new(a, 2.0, c, 0.0).unwrap()).unwrap();
            assert!(rel(m.D, (1.0 - a * c) / (1.0 - c)) < 1e-15);
            assert!(m.D >= 1.0);
        }
    }

    #[test]
    fn degenerate_table() {
        let t = PmfTable::from_raw(
            Family::Tdl(TdlParams::new(0.0, 1.0, 0.5, 1.0).unwrap()),
            vec![1.0, 0.0, 0.0],
        )
        .unwrap();
        let m = moments_from_pmf(&t).unwrap();
        assert_eq!((m.mu, m.sigma2, m.m3, m.m4), (0.0, 0.0, 0.0, 0.0));
        assert!(m.alpha3.is_nan());
    }

    #[test]
    fn geometric_table() {
        let law = Family::Tdl(TdlParams::new(1.0, 1.0, 0.5, 1.0).unwrap());
        let t = build_pmf_table(&law, 60).unwrap();
        let m = moments_from_pmf(&t).unwrap();
        assert!(rel(m.mu, 0.5) < 1e-12);
        assert!(rel(m.sigma2, 0.75) < 1e-12);
        let short = build_pmf_table(&law, 5).unwrap();
        assert!(matches!(moments_from_pmf(&short), Err(Error::TailTooHeavy(_))));
    }

    #[test]
    fn formulas_match_tables() {
        for (a, b, c, d) in [
            (0.5, 1.0, 0.5, 1.0),
            (-1.0, 1.0, 0.3, 0.5),
            (0.25, 2.0, 0.4, 2.0),
            (-0.5, 0.7, 0.2, 0.0),
            (0.8, 1.5, 0.3, 0.3),
        ] {
            let p = TdlParams::new(a, b, c, d).unwrap();
            let f = tdl_moments(&p).unwrap();
            let t = moments_from_pmf(&build_pmf_table(&Family::Tdl(p), 300).unwrap()).unwrap();
            assert!(rel(t.mu, f.mu) < 1e-7, "{p:?}");
            assert!(rel(t.sigma2, f.sigma2) < 1e-7, "{p:?}");
            assert!(rel(t.m3, f.m3) < 1e-5, "{p:?}");
            assert!(rel(t.m4, f.m4) < 1e-5, "{p:?}");
        }
    }

    #[test]
    fn trace_examples() {
        let t = skew_kurt_trace(0.25, 1.0, (0.3, 0.7), (0.0, 3.0), (50, 50)).unwrap();
        assert_eq!(t.rows.len(), 2500);
        assert!(t.warnings.is_empty());
        assert!(t.rows.iter().all(|r| r.alpha4 >= r.alpha3 * r.alpha3 + 1.0));

        let t = skew_kurt_trace(0.25, 1.0, (0.3, 0.7), (-1.0, 3.0), (5, 5)).unwrap();
        assert_eq!(t.rows.len(), 20);
        assert_eq!(t.warnings.len(), 1);

        let one = skew_kurt_trace(-1.0, 1.0, (0.4, 0.4), (1.0, 1.0), (10, 10)).unwrap();
        assert_eq!(one.rows.len(), 1);
        let m = tdl_moments(&TdlParams::new(-1.0, 1.0, 0.4, 1.0).unwrap()).unwrap();
        assert_eq!(one.rows[0].alpha4, m.alpha4);

        assert_eq!(
            skew_kurt_trace(0.25, 1.0, (0.3, 0.7), (-3.0, -1.0), (5, 5)),
            Err(Error::EmptyGrid)
        );
        assert_eq!(
            skew_kurt_trace(0.25, 1.0, (0.3, 0.7), (0.0, 1.0), (0, 5)),
            Err(Error::EmptyGrid)
        );
    }

    #[test]
    fn mean_ignores_d() {
        let m1 = tdl_moments(&TdlParams::new(0.3, 1.2, 0.6, 0.1).unwrap()).unwrap();
        let m2 = tdl_moments(&TdlParams::new(0.3, 1.2, 0.6, 7.0).unwrap()).unwrap();
        assert_eq!(m1.mu.to_bits(), m2.mu.to_bits());
    }
}
