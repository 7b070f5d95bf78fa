//! Generalized binomial coefficients and the `C_{γ,m}(k)` family
//!
//! `C_{γ,m}(k) = Σ_{j=0}^{m} (-1)^j binom(m,j) binom(γj,k)`, equivalently
//! `(-1)^{m+k} [s^k] ((1-s)^γ - 1)^m`. The second form is what the tables use:
//! for `γ ∈ (0,1]` every coefficient of `(1-s)^γ - 1` past the constant is
//! non-positive and for `γ < 0` non-negative, so repeated convolution never
//! cancels. The alternating sum itself is kept as [`coeff_c`] and evaluated
//! in double-double arithmetic.

use crate::dd::Dd;

/// `x (x-1) ··· (x-k+1) / k!` by running product.
pub fn gen_binom(x: f64, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (x - i as f64) / (i + 1) as f64;
    }
    acc
}

fn gen_binom_dd(x: Dd, k: usize) -> Dd {
    let mut acc = Dd::ONE;
    for i in 0..k {
        acc = acc * (x - Dd::from_f64(i as f64)) / Dd::from_f64((i + 1) as f64);
    }
    acc
}

/// Ordinary binomial coefficient as `f64`, zero outside `0 <= j <= n`.
fn choose(n: i64, j: i64) -> f64 {
    if j < 0 || n < 0 || j > n {
        return 0.0;
    }
    let j = j.min(n - j);
    let mut acc = 1.0;
    for i in 0..j {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// The alternating sum `C_{γ,m}(k)`, accumulated in double-double precision.
pub fn coeff_c(gamma: f64, m: usize, k: usize) -> f64 {
    let mut sum = Dd::ZERO;
    let mut mj = Dd::ONE; // binom(m, j)
    for j in 0..=m {
        let term = mj * gen_binom_dd(Dd::mul_f64(gamma, j as f64), k);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        mj = mj * Dd::from_f64((m - j) as f64) / Dd::from_f64((j + 1) as f64);
    }
    sum.to_f64()
}

fn kronecker_k0(m: usize) -> f64 {
    if m == 0 {
        1.0
    } else {
        0.0
    }
}

/// Closed form of `C_{1/2,m}(k)`.
///
/// `C_{1/2,m}(0)` is `1` only for `m = 0`; the direct sum vanishes otherwise.
pub fn coeff_half(m: usize, k: usize) -> f64 {
    if k == 0 {
        return kronecker_k0(m);
    }
    if m == 0 || m > k {
        return 0.0;
    }
    let n = 2 * k - m;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * 2f64.powi(m as i32 - 2 * k as i32) * m as f64 / n as f64 * choose(n as i64, k as i64)
}

/// Advances `C_{1/2,m}(k)` to `C_{1/2,m}(k+1)`.
///
/// The ratio is `-(2k-m)(2k-m+1) / (4(k+1)(k-m+1))`, read off the closed form.
pub fn coeff_half_step(m: usize, k: usize, prev: f64) -> f64 {
    if m == 0 || m > k + 1 {
        return 0.0;
    }
    if m == k + 1 {
        // first nonzero entry of the row, not reachable by stepping
        return coeff_half(m, k + 1);
    }
    let (m, k) = (m as f64, k as f64);
    -prev * (2.0 * k - m) * (2.0 * k - m + 1.0) / (4.0 * (k + 1.0) * (k - m + 1.0))
}

/// Closed form `C_{-1,m}(k) = (-1)^{k+m} binom(k-1, m-1)`.
pub fn coeff_neg1(m: usize, k: usize) -> f64 {
    if k == 0 {
        return kronecker_k0(m);
    }
    let sign = if (k + m).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * choose(k as i64 - 1, m as i64 - 1)
}

/// Advances `C_{-1,m}(k)` to `C_{-1,m}(k+1)` with ratio `-k/(k-m+1)`, `k >= 1`.
pub fn coeff_neg1_step(m: usize, k: usize, prev: f64) -> f64 {
    if m == 0 || m > k + 1 {
        return 0.0;
    }
    if m == k + 1 {
        return coeff_neg1(m, k + 1);
    }
    -prev * k as f64 / (k - m + 1) as f64
}

/// `P[m][k] = [s^k] h(s)^m` for `0 <= m <= k <= kmax`, where `h[0] = 0`.
///
/// Row `m` stores entries for `k = m..=kmax`.
fn series_powers(h: &[f64], kmax: usize) -> Vec<Vec<f64>> {
    debug_assert!(h.is_empty() || h[0] == 0.0);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(kmax + 1);
    let mut first = vec![0.0; kmax + 1];
    first[0] = 1.0;
    rows.push(first);
    for m in 1..=kmax {
        let prev = &rows[m - 1];
        let mut row = vec![0.0; kmax + 1 - m];
        for (idx, slot) in row.iter_mut().enumerate() {
            let k = m + idx;
            // [s^k] h^m = Σ_{j=1}^{k-m+1} h_j [s^{k-j}] h^{m-1}
            let mut acc = 0.0;
            for j in 1..=(k - m + 1) {
                acc += h[j] * prev[k - j - (m - 1)];
            }
            *slot = acc;
        }
        rows.push(row);
    }
    rows
}

/// Cached `C_{γ,m}(k)` for `0 <= m <= k <= kmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    pub gamma: f64,
    pub kmax: usize,
    /// `values[m][k - m]`.
    values: Vec<Vec<f64>>,
}

impl CoeffTable {
    /// `C_{γ,m}(k)`; zero when `m > k`.
    pub fn get(&self, m: usize, k: usize) -> f64 {
        assert!(k <= self.kmax, "k={k} beyond table kmax={}", self.kmax);
        if m > k {
            0.0
        } else {
            self.values[m][k - m]
        }
    }

    pub fn covers(&self, gamma: f64, k: usize) -> bool {
        self.gamma == gamma && k <= self.kmax
    }

    /// Test hook: overwrite one entry.
    #[doc(hidden)]
    pub fn set(&mut self, m: usize, k: usize, v: f64) {
        self.values[m][k - m] = v;
    }
}

pub fn build_table(gamma: f64, kmax: usize) -> CoeffTable {
    let values = if gamma == 0.5 {
        closed_form_rows(kmax, coeff_half, coeff_half_step)
    } else if gamma == -1.0 {
        closed_form_rows(kmax, coeff_neg1, coeff_neg1_step)
    } else {
        let mut h = vec![0.0; kmax + 1];
        let mut b = 1.0;
        for (k, slot) in h.iter_mut().enumerate().skip(1) {
            b *= (gamma - (k - 1) as f64) / k as f64;
            *slot = if k % 2 == 0 { b } else { -b };
        }
        let mut rows = series_powers(&h, kmax);
        for (m, row) in rows.iter_mut().enumerate() {
            for (idx, v) in row.iter_mut().enumerate() {
                if (2 * m + idx) % 2 == 1 {
                    *v = -*v;
                }
            }
        }
        rows
    };
    CoeffTable {
        gamma,
        kmax,
        values,
    }
}

fn closed_form_rows(
    kmax: usize,
    closed: fn(usize, usize) -> f64,
    step: fn(usize, usize, f64) -> f64,
) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(kmax + 1);
    for m in 0..=kmax {
        let mut row = Vec::with_capacity(kmax + 1 - m);
        let mut v = closed(m, m);
        row.push(v);
        for k in m..kmax {
            v = if m == 0 { 0.0 } else { step(m, k, v) };
            row.push(v);
        }
        rows.push(row);
    }
    rows
}

/// Powers of the normalized inner p.g.f. of the tempered laws.
///
/// With `h(s) = (1-cs)^a - 1` and `ρ = |(1-c)^a - 1|`, the series
/// `w(s) = -sgn(a) h(s) / ρ` has non-negative coefficients and `w(1) = 1`.
/// `rows[m][k-m] = [s^k] w^m`, and `(-c)^k C_{a,m}(k) = sgn(a)^m ρ^m [s^k] w^m`,
/// so every entry stays in `[0, 1]` and nothing overflows at large `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerPowers {
    pub a: f64,
    pub c: f64,
    pub rho: f64,
    pub kmax: usize,
    rows: Vec<Vec<f64>>,
}

impl InnerPowers {
    pub fn get(&self, m: usize, k: usize) -> f64 {
        if m > k {
            0.0
        } else {
            self.rows[m][k - m]
        }
    }
}

/// `ρ = |(1-c)^a - 1|` without cancellation.
pub fn tempering_gap(a: f64, c: f64) -> f64 {
    if c == 1.0 {
        1.0
    } else {
        (a * (-c).ln_1p()).exp_m1().abs()
    }
}

/// Builds [`InnerPowers`] for `a != 0`, `0 < c <= 1` (with `c < 1` for `a < 0`).
///
/// `a = 1/2` and `a = -1` are filled from the closed forms, stepping along `k`
/// so the geometric factor `c^k` is folded in one multiplication at a time.
pub fn build_inner_powers(a: f64, c: f64, kmax: usize) -> InnerPowers {
    assert!(a != 0.0 && c > 0.0, "inner powers need a != 0 and c > 0");
    let rho = tempering_gap(a, c);
    let rows = if a == 0.5 {
        let lead = c / (2.0 * rho);
        stepped_rows(kmax, lead, |m, k| {
            let (m, k) = (m as f64, k as f64);
            c * (2.0 * k - m) * (2.0 * k - m + 1.0) / (4.0 * (k + 1.0) * (k - m + 1.0))
        })
    } else if a == -1.0 {
        stepped_rows(kmax, 1.0 - c, |m, k| c * k as f64 / (k - m + 1) as f64)
    } else {
        let sa = if a > 0.0 { 1.0 } else { -1.0 };
        let mut w = vec![0.0; kmax + 1];
        let mut t = 1.0; // binom(a,k) (-c)^k
        for (k, slot) in w.iter_mut().enumerate().skip(1) {
            t *= (a - (k - 1) as f64) / k as f64 * (-c);
            *slot = -sa * t / rho;
        }
        series_powers(&w, kmax)
    };
    InnerPowers {
        a,
        c,
        rho,
        kmax,
        rows,
    }
}

fn stepped_rows(kmax: usize, lead: f64, ratio: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(kmax + 1);
    let mut first = vec![0.0; kmax + 1];
    first[0] = 1.0;
    rows.push(first);
    let mut diag = 1.0;
    for m in 1..=kmax {
        diag *= lead;
        let mut row = Vec::with_capacity(kmax + 1 - m);
        let mut v = diag;
        row.push(v);
        for k in m..kmax {
            v *= ratio(m, k);
            row.push(v);
        }
        rows.push(row);
    }
    rows
}
