//! Parameter records and domain validation for every law in the family.
//!
//! All records are plain `Copy` values; constructors are the only way to
//! obtain one, so a record in hand is always inside its admissible domain.

use serde::Serialize;

use crate::error::{Error, Result};

/// Sign function with `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    finite(name, x)?;
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be > 0, got {x}")))
    }
}

fn in_unit_closed(name: &str, x: f64) -> Result<()> {
    finite(name, x)?;
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in [0,1], got {x}")))
    }
}

/// Checks the shared `(a, c)` constraints of the tempered discrete laws.
fn tail_and_tempering(a: f64, c: f64) -> Result<()> {
    finite("a", a)?;
    if a > 1.0 {
        return Err(Error::domain(format!("a must be <= 1, got {a}")));
    }
    in_unit_closed("c", c)?;
    if a <= 0.0 && c >= 1.0 {
        return Err(Error::domain(format!(
            "c must be < 1 when a <= 0, got a={a}, c={c}"
        )));
    }
    Ok(())
}

/// Which closed form governs a [`TdlParams`] point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TdlBranch {
    /// `a = 0` or `c = 0`: point mass at zero.
    DegenerateAtZero,
    /// `d = 0`: the Poisson-Tweedie law.
    PoissonTweedie,
    General,
}

/// Tempered discrete Linnik parameters `(a, b, c, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TdlParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TdlParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        tail_and_tempering(a, c)?;
        positive("b", b)?;
        finite("d", d)?;
        if d < 0.0 {
            return Err(Error::domain(format!(
                "d must be >= 0 (negative shape is not supported), got {d}"
            )));
        }
        Ok(TdlParams { a, b, c, d })
    }

    pub fn branch(&self) -> TdlBranch {
        if self.a == 0.0 || self.c == 0.0 {
            TdlBranch::DegenerateAtZero
        } else if self.d == 0.0 {
            TdlBranch::PoissonTweedie
        } else {
            TdlBranch::General
        }
    }

    /// The Poisson-Tweedie law sharing `(a, b, c)`.
    pub fn tds(&self) -> TdsParams {
        TdsParams {
            a: self.a,
            b: self.b,
            c: self.c,
        }
    }
}

/// Validates a tempered discrete Linnik point.
pub fn validate_tdl(a: f64, b: f64, c: f64, d: f64) -> Result<TdlParams> {
    TdlParams::new(a, b, c, d)
}

/// Tempered discrete stable (Poisson-Tweedie) parameters `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TdsParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TdsParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        tail_and_tempering(a, c)?;
        positive("b", b)?;
        Ok(TdsParams { a, b, c })
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == 0.0 || self.c == 0.0
    }
}

/// Positive stable / discrete stable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StableParams {
    pub gamma: f64,
    pub lambda: f64,
}

impl StableParams {
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        finite("gamma", gamma)?;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::domain(format!("gamma must lie in (0,1], got {gamma}")));
        }
        positive("lambda", lambda)?;
        Ok(StableParams { gamma, lambda })
    }
}

/// Tempered positive stable (Tweedie) parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemperedStableParams {
    pub gamma: f64,
    pub lambda: f64,
    pub theta: f64,
}

impl TemperedStableParams {
    pub fn new(gamma: f64, lambda: f64, theta: f64) -> Result<Self> {
        finite("gamma", gamma)?;
        if gamma > 1.0 {
            return Err(Error::domain(format!("gamma must be <= 1, got {gamma}")));
        }
        positive("lambda", lambda)?;
        finite("theta", theta)?;
        if theta < 0.0 {
            return Err(Error::domain(format!("theta must be >= 0, got {theta}")));
        }
        if theta == 0.0 && gamma <= 0.0 {
            return Err(Error::domain(format!(
                "theta must be > 0 when gamma <= 0, got gamma={gamma}"
            )));
        }
        Ok(TemperedStableParams {
            gamma,
            lambda,
            theta,
        })
    }
}

/// Linnik parameters, shared by the discrete and positive Linnik laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinnikParams {
    pub gamma: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl LinnikParams {
    pub fn new(gamma: f64, lambda: f64, delta: f64) -> Result<Self> {
        let s = StableParams::new(gamma, lambda)?;
        positive("delta", delta)?;
        Ok(LinnikParams {
            gamma: s.gamma,
            lambda: s.lambda,
            delta,
        })
    }
}

/// Tempered positive Linnik parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemperedLinnikParams {
    pub gamma: f64,
    pub lambda: f64,
    pub theta: f64,
    pub delta: f64,
}

impl TemperedLinnikParams {
    pub fn new(gamma: f64, lambda: f64, theta: f64, delta: f64) -> Result<Self> {
        let t = TemperedStableParams::new(gamma, lambda, theta)?;
        positive("delta", delta)?;
        Ok(TemperedLinnikParams {
            gamma: t.gamma,
            lambda: t.lambda,
            theta: t.theta,
            delta,
        })
    }
}

/// Auxiliary building-block laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum AuxParams {
    NegativeBinomial { pi: f64, delta: f64 },
    Gamma { scale: f64, shape: f64 },
    Poisson { lambda: f64 },
    Sibuya { gamma: f64 },
    GdsSibuya { gamma: f64, tau: f64 },
}

impl AuxParams {
    pub fn negative_binomial(pi: f64, delta: f64) -> Result<Self> {
        finite("pi", pi)?;
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::domain(format!("pi must lie in (0,1), got {pi}")));
        }
        positive("delta", delta)?;
        Ok(AuxParams::NegativeBinomial { pi, delta })
    }

    pub fn gamma(scale: f64, shape: f64) -> Result<Self> {
        positive("scale", scale)?;
        positive("shape", shape)?;
        Ok(AuxParams::Gamma { scale, shape })
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        Ok(AuxParams::Poisson { lambda })
    }

    pub fn sibuya(gamma: f64) -> Result<Self> {
        finite("gamma", gamma)?;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::domain(format!("gamma must lie in (0,1], got {gamma}")));
        }
        Ok(AuxParams::Sibuya { gamma })
    }

    pub fn gds_sibuya(gamma: f64, tau: f64) -> Result<Self> {
        AuxParams::sibuya(gamma)?;
        finite("tau", tau)?;
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::domain(format!("tau must lie in (0,1], got {tau}")));
        }
        Ok(AuxParams::GdsSibuya { gamma, tau })
    }
}

/// Any law of the family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", content = "params", rename_all = "snake_case")]
pub enum Family {
    Tdl(TdlParams),
    Tds(TdsParams),
    DiscreteStable(StableParams),
    DiscreteLinnik(LinnikParams),
    PositiveStable(StableParams),
    TemperedPositiveStable(TemperedStableParams),
    PositiveLinnik(LinnikParams),
    TemperedPositiveLinnik(TemperedLinnikParams),
    Aux(AuxParams),
}

impl Family {
    /// Short CLI tag of the law.
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Tdl(_) => "tdl",
            Family::Tds(_) => "tds",
            Family::DiscreteStable(_) => "ds",
            Family::DiscreteLinnik(_) => "dl",
            Family::PositiveStable(_) => "ps",
            Family::TemperedPositiveStable(_) => "tps",
            Family::PositiveLinnik(_) => "pl",
            Family::TemperedPositiveLinnik(_) => "tpl",
            Family::Aux(AuxParams::NegativeBinomial { .. }) => "nb",
            Family::Aux(AuxParams::Gamma { .. }) => "gamma",
            Family::Aux(AuxParams::Poisson { .. }) => "poisson",
            Family::Aux(AuxParams::Sibuya { .. }) => "sibuya",
            Family::Aux(AuxParams::GdsSibuya { .. }) => "gds",
        }
    }

    /// Integer-valued laws have a p.g.f.; the rest have a Laplace transform.
    pub fn is_discrete(&self) -> bool {
        !matches!(
            self,
            Family::PositiveStable(_)
                | Family::TemperedPositiveStable(_)
                | Family::PositiveLinnik(_)
                | Family::TemperedPositiveLinnik(_)
                | Family::Aux(AuxParams::Gamma { .. })
        )
    }
}

/// Named special case a [`TdlParams`] point reduces to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reduction {
    NegativeBinomial { pi: f64, delta: f64 },
    DegenerateAtZero,
    DiscreteLinnik(LinnikParams),
    PoissonTweedie(TdsParams),
    None,
}

/// Classifies a tempered discrete Linnik point by the law it coincides with.
pub fn reduce_special_case(p: &TdlParams) -> Reduction {
    if p.a == 0.0 || p.c == 0.0 {
        return Reduction::DegenerateAtZero;
    }
    if p.d == 0.0 {
        return Reduction::PoissonTweedie(p.tds());
    }
    if p.a == 1.0 {
        let bcd = p.b * p.c * p.d;
        return Reduction::NegativeBinomial {
            pi: bcd / (1.0 + bcd),
            delta: 1.0 / p.d,
        };
    }
    if p.c == 1.0 {
        return Reduction::DiscreteLinnik(LinnikParams {
            gamma: p.a,
            lambda: p.b,
            delta: 1.0 / p.d,
        });
    }
    Reduction::None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interior_point_is_valid() {
        let p = validate_tdl(0.5, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(p.branch(), TdlBranch::General);
    }

    #[test]
    fn negative_tail_with_unit_tempering_is_rejected() {
        let err = validate_tdl(-1.0, 1.0, 1.0, 1.0).unwrap_err();
        match err {
            Error::Domain(msg) => assert!(msg.contains("c must be < 1 when a <= 0"), "{msg}"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn tail_above_one_is_rejected() {
        assert!(validate_tdl(1.5, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn non_finite_and_sign_violations() {
        assert!(validate_tdl(f64::NAN, 1.0, 0.5, 1.0).is_err());
        assert!(validate_tdl(0.5, 0.0, 0.5, 1.0).is_err());
        assert!(validate_tdl(0.5, 1.0, -0.1, 1.0).is_err());
        assert!(validate_tdl(0.5, 1.0, 1.1, 1.0).is_err());
        assert!(validate_tdl(0.5, 1.0, 0.5, -0.5).is_err());
        assert!(validate_tdl(0.5, 1.0, 0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn branch_flags() {
        assert_eq!(
            validate_tdl(0.0, 1.0, 0.5, 1.0).unwrap().branch(),
            TdlBranch::DegenerateAtZero
        );
        assert_eq!(
            validate_tdl(0.5, 1.0, 0.5, 0.0).unwrap().branch(),
            TdlBranch::PoissonTweedie
        );
    }

    #[test]
    fn reductions() {
        let p = validate_tdl(1.0, 1.0, 0.5, 1.0).unwrap();
        match reduce_special_case(&p) {
            Reduction::NegativeBinomial { pi, delta } => {
                assert!((pi - 1.0 / 3.0).abs() < 1e-15);
                assert_eq!(delta, 1.0);
            }
            r => panic!("{r:?}"),
        }
        for (b, c, d) in [(1.0, 0.5, 1.0), (3.0, 0.1, 0.0), (0.2, 0.9, 4.0)] {
            let p = validate_tdl(0.0, b, c, d).unwrap();
            assert_eq!(reduce_special_case(&p), Reduction::DegenerateAtZero);
        }
        let p = validate_tdl(0.5, 1.0, 0.5, 0.0).unwrap();
        assert_eq!(
            reduce_special_case(&p),
            Reduction::PoissonTweedie(TdsParams {
                a: 0.5,
                b: 1.0,
                c: 0.5
            })
        );
        let p = validate_tdl(0.5, 2.0, 1.0, 0.25).unwrap();
        assert_eq!(
            reduce_special_case(&p),
            Reduction::DiscreteLinnik(LinnikParams {
                gamma: 0.5,
                lambda: 2.0,
                delta: 4.0
            })
        );
        let p = validate_tdl(0.5, 2.0, 0.3, 0.25).unwrap();
        assert_eq!(reduce_special_case(&p), Reduction::None);
    }

    #[test]
    fn auxiliary_ranges() {
        assert!(AuxParams::negative_binomial(1.0, 1.0).is_err());
        assert!(AuxParams::negative_binomial(0.5, 0.0).is_err());
        assert!(AuxParams::sibuya(0.0).is_err());
        assert!(AuxParams::sibuya(1.0).is_ok());
        assert!(AuxParams::gds_sibuya(0.5, 0.0).is_err());
        assert!(AuxParams::gds_sibuya(0.5, 1.0).is_ok());
        assert!(TemperedStableParams::new(-1.0, 1.0, 0.0).is_err());
        assert!(TemperedStableParams::new(0.5, 1.0, 0.0).is_ok());
        assert!(TemperedStableParams::new(-3.0, 1.0, 0.5).is_ok());
    }

    fn in_domain(a: f64, b: f64, c: f64, d: f64) -> bool {
        let first = a <= 0.0 && b > 0.0 && (0.0..1.0).contains(&c) && d >= 0.0;
        let second = a > 0.0 && a <= 1.0 && b > 0.0 && (0.0..=1.0).contains(&c) && d >= 0.0;
        first || second
    }

    #[test]
    fn grid_straddling_every_boundary() {
        let avals = [-3.0, -1e-12, 0.0, 1e-12, 0.5, 1.0, 1.0 + 1e-12, 2.0];
        let bvals = [-1.0, 0.0, 1e-12, 1.0];
        let cvals = [-1e-12, 0.0, 0.5, 1.0 - 1e-12, 1.0, 1.0 + 1e-12];
        let dvals = [-1e-12, 0.0, 1e-12, 2.0];
        for &a in &avals {
            for &b in &bvals {
                for &c in &cvals {
                    for &d in &dvals {
                        assert_eq!(
                            validate_tdl(a, b, c, d).is_ok(),
                            in_domain(a, b, c, d),
                            "({a},{b},{c},{d})"
                        );
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn validation_matches_union_domain(
            a in -4.0f64..2.0, b in -1.0f64..3.0, c in -0.2f64..1.2, d in -1.0f64..5.0
        ) {
            prop_assert_eq!(validate_tdl(a, b, c, d).is_ok(), in_domain(a, b, c, d));
        }
    }
}
