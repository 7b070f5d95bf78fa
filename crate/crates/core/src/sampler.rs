//! Random variate generation for every law of the family.
//!
//! Integer laws are generated through their Poisson-mixture and compound
//! representations; the tempered positive stable law uses exponential
//! rejection on top of Kanter's representation of the positive stable law
//! (for `γ ∈ (0,1)`) or the compound Poisson-Gamma form (for `γ < 0`).
//!
//! Poisson, Gamma and Binomial variates come from `rand_distr`. Their
//! correctness, like that of every sampler here, is enforced by the
//! goodness-of-fit tests rather than by the choice of classical algorithm.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution, Exp1, Gamma, Open01, Poisson};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::{AuxParams, Family, StableParams, TdlParams, TdsParams, TemperedStableParams};

/// Default cap on rejection trials before a draw gives up.
pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

/// Largest Sibuya variate produced before reporting overflow.
pub const SIBUYA_CAP: u64 = 1_000_000_000_000_000_000;

/// Largest Poisson intensity accepted.
const MAX_POISSON_MEAN: f64 = 1e18;

/// Number of survival-product steps tried before switching to bisection.
const SIBUYA_SEQUENTIAL_STEPS: u64 = 1024;

/// Deterministic random stream.
///
/// A stream is identified by `(seed, stream)`; streams with the same seed and
/// different ids are independent ChaCha20 keystreams, which is how parallel
/// workers are expected to split work.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rejection_cap: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream {
            seed,
            stream,
            rejection_cap: DEFAULT_REJECTION_CAP,
            rng,
        }
    }

    /// Fresh stream `id` under the same seed.
    pub fn split(&self, id: u64) -> Self {
        RngStream::with_stream(self.seed, id).with_rejection_cap(self.rejection_cap)
    }

    pub fn with_rejection_cap(mut self, cap: u64) -> Self {
        self.rejection_cap = cap.max(1);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn rejection_cap(&self) -> u64 {
        self.rejection_cap
    }

    fn open01(&mut self) -> f64 {
        Open01.sample(self)
    }

    fn exp1(&mut self) -> f64 {
        Exp1.sample(self)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Generation route for the tempered discrete Linnik law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    /// Poisson mixture over a tempered positive stable law with Gamma scale.
    A,
    /// Poisson-Gamma-Poisson-Gamma chain, `a < 0`.
    B,
    /// Negative Binomial with Negative Binomial shape, `a < 0`.
    C,
    /// Compound Negative Binomial of geometric down-weighted Sibuya, `a ∈ (0,1]`.
    D,
}

impl Route {
    pub fn letter(&self) -> char {
        match self {
            Route::A => 'a',
            Route::B => 'b',
            Route::C => 'c',
            Route::D => 'd',
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Route::A),
            "b" => Ok(Route::B),
            "c" => Ok(Route::C),
            "d" => Ok(Route::D),
            _ => Err(Error::domain(format!("unknown route `{s}` (expected a, b, c or d)"))),
        }
    }
}

pub fn draw_poisson(r: &mut RngStream, lambda: f64) -> Result<u64> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::domain(format!("Poisson mean must be finite and >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    if lambda > MAX_POISSON_MEAN {
        return Err(Error::VariateOverflow(format!("Poisson mean {lambda:e}")));
    }
    let d = Poisson::new(lambda).map_err(|e| Error::domain(e.to_string()))?;
    Ok(d.sample(r) as u64)
}

/// Gamma variate with Laplace transform `(1 + scale·t)^{-shape}`; shape 0 gives 0.
pub fn draw_gamma(r: &mut RngStream, scale: f64, shape: f64) -> Result<f64> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::domain(format!("Gamma scale must be > 0, got {scale}")));
    }
    if !(shape.is_finite() && shape >= 0.0) {
        return Err(Error::domain(format!("Gamma shape must be >= 0, got {shape}")));
    }
    if shape == 0.0 {
        return Ok(0.0);
    }
    let d = Gamma::new(shape, scale).map_err(|e| Error::domain(e.to_string()))?;
    Ok(d.sample(r))
}

/// Negative Binomial `NB(π, δ)` as a Poisson-Gamma mixture; `δ = 0` gives 0.
pub fn draw_negative_binomial(r: &mut RngStream, pi: f64, delta: f64) -> Result<u64> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::domain(format!("pi must lie in (0,1), got {pi}")));
    }
    if delta == 0.0 {
        return Ok(0);
    }
    let g = draw_gamma(r, pi / (1.0 - pi), delta)?;
    draw_poisson(r, g)
}

/// `ln P(X > k) = ln Γ(k+1-γ) - ln Γ(k+1) - ln Γ(1-γ)` for a Sibuya variate.
///
/// The gamma ratio uses its large-argument expansion
/// `ln Γ(x+α)/Γ(x) = α ln x + Σ_n (-1)^{n+1} (B_{n+1}(α) - B_{n+1}(0)) / (n(n+1) x^n)`,
/// accurate to about `x^-4` for the `k` where it is called.
fn sibuya_log_survival(gamma: f64, k: u64) -> f64 {
    let x = k as f64 + 1.0;
    let t = -gamma;
    let b2 = t * t - t;
    let b3 = t * t * t - 1.5 * t * t + 0.5 * t;
    let b4 = t * t * t * t - 2.0 * t * t * t + t * t;
    let ratio = t * x.ln() + b2 / (2.0 * x) - b3 / (6.0 * x * x) + b4 / (12.0 * x * x * x);
    ratio - ln_gamma(1.0 - gamma)
}

/// Sibuya variate by inversion of the survival function
/// `P(X > k) = Π_{j<=k} (1 - γ/j)`.
///
/// The product is stepped directly for the first values of `k`; the far tail
/// is located by bisection on its log-gamma form.
pub fn draw_sibuya(r: &mut RngStream, gamma: f64) -> Result<u64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::domain(format!("gamma must lie in (0,1], got {gamma}")));
    }
    let v = r.open01();
    let mut surv = 1.0;
    for k in 1..=SIBUYA_SEQUENTIAL_STEPS {
        surv *= 1.0 - gamma / k as f64;
        if surv < v {
            return Ok(k);
        }
    }
    let lv = v.ln();
    let mut lo = SIBUYA_SEQUENTIAL_STEPS; // survival(lo) >= v
    let mut hi = lo * 2;
    while sibuya_log_survival(gamma, hi) >= lv {
        if hi >= SIBUYA_CAP {
            return Err(Error::VariateOverflow(format!(
                "Sibuya({gamma}) variate beyond {SIBUYA_CAP}"
            )));
        }
        lo = hi;
        hi = hi.saturating_mul(2).min(SIBUYA_CAP);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if sibuya_log_survival(gamma, mid) < lv {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Geometric down-weighted Sibuya variate by sequential inversion of
/// `P(0) = (1-τ)^γ`, `P(k) = τ^k P_Sibuya(k)`.
pub fn draw_gds_sibuya(r: &mut RngStream, gamma: f64, tau: f64) -> Result<u64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::domain(format!("gamma must lie in (0,1], got {gamma}")));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::domain(format!("tau must lie in (0,1], got {tau}")));
    }
    if tau == 1.0 {
        return draw_sibuya(r, gamma);
    }
    let u: f64 = r.random();
    let mut cdf = (1.0 - tau).powf(gamma);
    if u < cdf {
        return Ok(0);
    }
    let mut q = gamma * tau;
    let mut k = 1u64;
    loop {
        cdf += q;
        if u < cdf || q == 0.0 {
            return Ok(k);
        }
        q *= (k as f64 - gamma) / (k + 1) as f64 * tau;
        k += 1;
        if k > SIBUYA_CAP {
            return Err(Error::VariateOverflow(format!(
                "GDS-Sibuya({gamma},{tau}) variate beyond {SIBUYA_CAP}"
            )));
        }
    }
}

/// Kanter's representation of the standard positive stable law,
/// `E[exp(-tX)] = exp(-t^γ)`, `γ ∈ (0,1)`.
fn kanter_unit(r: &mut RngStream, gamma: f64) -> f64 {
    let u = PI * r.open01();
    let e = r.exp1();
    let ln_a = (gamma * u).sin().ln() - u.sin().ln() / gamma
        + (1.0 - gamma) / gamma * (((1.0 - gamma) * u).sin().ln() - e.ln());
    ln_a.exp()
}

/// Positive stable variate with scale `lambda` (which may be any value >= 0).
fn positive_stable_scaled(r: &mut RngStream, gamma: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    if gamma == 1.0 {
        return lambda;
    }
    lambda.powf(1.0 / gamma) * kanter_unit(r, gamma)
}

/// Positive stable variate; `γ = 1` is the point mass at `λ`.
pub fn draw_positive_stable(r: &mut RngStream, p: &StableParams) -> f64 {
    positive_stable_scaled(r, p.gamma, p.lambda)
}

/// Tempered positive stable variate for any `lambda >= 0`.
///
/// For `γ ∈ (0,1)` and `θ > 0` the law is infinitely divisible into `n`
/// copies with scale `λ/n`; each copy is drawn by exponential rejection of a
/// positive stable proposal, and `n = ⌈λθ^γ⌉` keeps the per-copy acceptance
/// rate `exp(-λθ^γ/n)` above `1/e`.
fn tempered_stable_scaled(r: &mut RngStream, gamma: f64, lambda: f64, theta: f64) -> Result<f64> {
    if lambda == 0.0 || gamma == 0.0 {
        return Ok(0.0);
    }
    if gamma < 0.0 {
        let n = draw_poisson(r, lambda * theta.powf(gamma))?;
        return draw_gamma(r, 1.0 / theta, -gamma * n as f64);
    }
    if gamma == 1.0 {
        return Ok(lambda);
    }
    if theta == 0.0 {
        return Ok(positive_stable_scaled(r, gamma, lambda));
    }
    let cap = r.rejection_cap();
    let load = lambda * theta.powf(gamma);
    let pieces = load.ceil().max(1.0);
    if pieces > cap as f64 {
        return Err(Error::RejectionBudgetExceeded { cap });
    }
    let pieces = pieces as u64;
    let scale = (lambda / pieces as f64).powf(1.0 / gamma);
    let mut total = 0.0;
    for _ in 0..pieces {
        let mut trials = 0u64;
        loop {
            trials += 1;
            if trials > cap {
                return Err(Error::RejectionBudgetExceeded { cap });
            }
            let x = scale * kanter_unit(r, gamma);
            if r.exp1() > theta * x {
                total += x;
                break;
            }
        }
    }
    Ok(total)
}

pub fn draw_tempered_positive_stable(r: &mut RngStream, p: &TemperedStableParams) -> Result<f64> {
    tempered_stable_scaled(r, p.gamma, p.lambda, p.theta)
}

/// `α ⊙ x`: a Binomial(x, α) draw.
pub fn binomial_thin(r: &mut RngStream, alpha: f64, x: u64) -> Result<u64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("thinning probability must lie in [0,1], got {alpha}")));
    }
    if x == 0 || alpha == 0.0 {
        return Ok(0);
    }
    if alpha == 1.0 {
        return Ok(x);
    }
    let d = Binomial::new(x, alpha).map_err(|e| Error::domain(e.to_string()))?;
    Ok(d.sample(r))
}

/// Poisson-Tweedie variate as a Poisson mixture over a tempered positive stable law.
pub fn draw_tds(r: &mut RngStream, p: &TdsParams) -> Result<u64> {
    if p.is_degenerate() {
        return Ok(0);
    }
    let x = tempered_stable_scaled(r, p.a, p.b * p.c.powf(p.a), 1.0 / p.c - 1.0)?;
    draw_poisson(r, x)
}

pub fn check_route(p: &TdlParams, route: Route) -> Result<()> {
    let ok = match route {
        Route::A => true,
        Route::B | Route::C => p.a < 0.0,
        Route::D => p.a > 0.0 && p.a <= 1.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::IncompatibleRoute {
            route: route.letter(),
            a: p.a,
        })
    }
}

/// Tempered discrete Linnik variate through the chosen representation.
pub fn draw_tdl(r: &mut RngStream, p: &TdlParams, route: Route) -> Result<u64> {
    if p.a == 0.0 || p.c == 0.0 {
        return Ok(0);
    }
    check_route(p, route)?;
    if p.d == 0.0 {
        return draw_tds(r, &p.tds());
    }
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let bd = b * d;
    match route {
        Route::A => {
            let v = draw_gamma(r, bd * c.powf(a), 1.0 / d)?;
            let x = tempered_stable_scaled(r, a, v, 1.0 / c - 1.0)?;
            draw_poisson(r, x)
        }
        Route::B => {
            let g = draw_gamma(r, bd * (1.0 - c).powf(a), 1.0 / d)?;
            let n = draw_poisson(r, g)?;
            let x = draw_gamma(r, c / (1.0 - c), -a * n as f64)?;
            draw_poisson(r, x)
        }
        Route::C => {
            let z = bd * (1.0 - c).powf(a);
            let n = draw_negative_binomial(r, z / (1.0 + z), 1.0 / d)?;
            draw_negative_binomial(r, c, -a * n as f64)
        }
        Route::D => {
            let z = draw_negative_binomial(r, bd / (1.0 + bd), 1.0 / d)?;
            let mut total = 0u64;
            for _ in 0..z {
                total = total
                    .checked_add(draw_gds_sibuya(r, a, c)?)
                    .ok_or_else(|| Error::VariateOverflow("compound sum".into()))?;
            }
            Ok(total)
        }
    }
}

/// One variate of any law of the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variate {
    Int(u64),
    Real(f64),
}

/// Draws one variate; `route` only matters for the tempered discrete Linnik law.
pub fn draw(r: &mut RngStream, law: &Family, route: Route) -> Result<Variate> {
    use Variate::{Int, Real};
    Ok(match *law {
        Family::Tdl(p) => Int(draw_tdl(r, &p, route)?),
        Family::Tds(p) => Int(draw_tds(r, &p)?),
        Family::DiscreteStable(p) => {
            let x = positive_stable_scaled(r, p.gamma, p.lambda);
            Int(draw_poisson(r, x)?)
        }
        Family::DiscreteLinnik(p) => {
            let v = draw_gamma(r, p.lambda / p.delta, p.delta)?;
            let x = positive_stable_scaled(r, p.gamma, v);
            Int(draw_poisson(r, x)?)
        }
        Family::PositiveStable(p) => Real(draw_positive_stable(r, &p)),
        Family::TemperedPositiveStable(p) => Real(draw_tempered_positive_stable(r, &p)?),
        Family::PositiveLinnik(p) => {
            let v = draw_gamma(r, p.lambda / p.delta, p.delta)?;
            Real(positive_stable_scaled(r, p.gamma, v))
        }
        Family::TemperedPositiveLinnik(p) => {
            let v = draw_gamma(r, p.lambda / p.delta, p.delta)?;
            Real(tempered_stable_scaled(r, p.gamma, v, p.theta)?)
        }
        Family::Aux(AuxParams::NegativeBinomial { pi, delta }) => {
            Int(draw_negative_binomial(r, pi, delta)?)
        }
        Family::Aux(AuxParams::Gamma { scale, shape }) => Real(draw_gamma(r, scale, shape)?),
        Family::Aux(AuxParams::Poisson { lambda }) => Int(draw_poisson(r, lambda)?),
        Family::Aux(AuxParams::Sibuya { gamma }) => Int(draw_sibuya(r, gamma)?),
        Family::Aux(AuxParams::GdsSibuya { gamma, tau }) => Int(draw_gds_sibuya(r, gamma, tau)?),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SampleValues {
    Int(Vec<u64>),
    Real(Vec<f64>),
}

impl SampleValues {
    pub fn len(&self) -> usize {
        match self {
            SampleValues::Int(v) => v.len(),
            SampleValues::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Values as reals, whatever their kind.
    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            SampleValues::Int(v) => v.iter().map(|&x| x as f64).collect(),
            SampleValues::Real(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub law: Family,
    pub route: Route,
    pub n: usize,
    pub seed: u64,
    pub values: SampleValues,
}

impl SampleBatch {
    pub fn ints(&self) -> Option<&[u64]> {
        match &self.values {
            SampleValues::Int(v) => Some(v),
            SampleValues::Real(_) => None,
        }
    }
}

/// `n` draws from stream 0 of `seed`.
pub fn sample_batch(law: &Family, route: Route, n: usize, seed: u64) -> Result<SampleBatch> {
    let mut r = RngStream::new(seed);
    sample_batch_from(&mut r, law, route, n)
}

pub fn sample_batch_from(
    r: &mut RngStream,
    law: &Family,
    route: Route,
    n: usize,
) -> Result<SampleBatch> {
    if let Family::Tdl(p) = law {
        if p.a != 0.0 && p.c != 0.0 {
            check_route(p, route)?;
        }
    }
    let values = if law.is_discrete() {
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            match draw(r, law, route)? {
                Variate::Int(x) => v.push(x),
                Variate::Real(_) => unreachable!(),
            }
        }
        SampleValues::Int(v)
    } else {
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            match draw(r, law, route)? {
                Variate::Real(x) => v.push(x),
                Variate::Int(_) => unreachable!(),
            }
        }
        SampleValues::Real(v)
    };
    Ok(SampleBatch {
        law: *law,
        route,
        n,
        seed: r.seed(),
        values,
    })
}
