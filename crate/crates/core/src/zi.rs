//! Explicit zero alteration of a base pmf, and the implicit zero inflation
//! induced by the negative binomial variants.
//!
//! An altered pmf keeps the base shape for positive counts and replaces the
//! zero probability `π₀` by `π̃₀(π₀, γ)`:
//!
//! ```text
//! π̃_0 = π̃₀(π₀, γ),      π̃_y = ρ π_y (y > 0),      ρ = (1 - π̃₀) / (1 - π₀)
//! ```
//!
//! | type | link                                   |
//! |------|----------------------------------------|
//! | A    | `logit(π̃₀) = γ`                        |
//! | B    | `log(-log π̃₀) = γ + log(-log π₀)`      |
//! | C    | `log(1 - π̃₀) = γ + log(1 - π₀)`        |
//! | D    | `logit(π̃₀) = γ + logit(π₀)`            |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::{BaseModel, Family};
use crate::error::{Error, Result};
use crate::roots::brent;
use crate::special::{ln_1m_exp, logit, softplus};

/// Lower/upper clamp applied to `π̃₀` before logs are taken in likelihoods.
pub const PIT0_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZiType {
    None,
    A,
    B,
    C,
    D,
}

impl ZiType {
    pub const EXPLICIT: [ZiType; 4] = [ZiType::A, ZiType::B, ZiType::C, ZiType::D];

    pub fn has_gamma(self) -> bool {
        !matches!(self, ZiType::None)
    }

    pub fn label(self) -> &'static str {
        match self {
            ZiType::None => "none",
            ZiType::A => "Type A",
            ZiType::B => "Type B",
            ZiType::C => "Type C",
            ZiType::D => "Type D",
        }
    }
}

impl fmt::Display for ZiType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ZiType::None => "none",
            ZiType::A => "a",
            ZiType::B => "b",
            ZiType::C => "c",
            ZiType::D => "d",
        })
    }
}

impl FromStr for ZiType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(ZiType::None),
            "a" => Ok(ZiType::A),
            "b" => Ok(ZiType::B),
            "c" => Ok(ZiType::C),
            "d" => Ok(ZiType::D),
            other => Err(Error::InvalidParameter(format!("unknown zero-inflation type '{other}'"))),
        }
    }
}

/// A base distribution together with a scalar zero alteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZiModel {
    pub base: BaseModel,
    pub zi: ZiType,
    pub gamma: f64,
}

impl ZiModel {
    pub fn new(base: BaseModel, zi: ZiType, gamma: f64) -> Result<Self> {
        base.validate()?;
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be finite, got {gamma}")));
        }
        Ok(Self { base, zi, gamma })
    }

    /// `(log π̃₀, log(1 - π̃₀), log(1 - π₀))`, with `π̃₀` clamped.
    pub(crate) fn zero_logs(&self) -> Result<(f64, f64, f64)> {
        let ln_pi0 = self.base.ln_zero_prob_unchecked();
        let (a, b) = clamp_logs(alter_zero_logs(self.zi, ln_pi0, self.gamma)?);
        Ok((a, b, ln_1m_exp(ln_pi0)))
    }
}

/// `(log π̃₀, log(1 - π̃₀))` from `log π₀`, unclamped.
pub(crate) fn alter_zero_logs(zi: ZiType, ln_pi0: f64, gamma: f64) -> Result<(f64, f64)> {
    Ok(match zi {
        ZiType::None => (ln_pi0, ln_1m_exp(ln_pi0)),
        ZiType::A => (-softplus(-gamma), -softplus(gamma)),
        ZiType::B => {
            let a = gamma.exp() * ln_pi0;
            (a, ln_1m_exp(a))
        }
        ZiType::C => {
            let ln_pos = gamma + ln_1m_exp(ln_pi0);
            if ln_pos >= 0.0 {
                return Err(Error::DeflationInfeasible { gamma, pi0: ln_pi0.exp() });
            }
            (ln_1m_exp(ln_pos), ln_pos)
        }
        ZiType::D => {
            let l = gamma + ln_pi0 - ln_1m_exp(ln_pi0);
            (-softplus(-l), -softplus(l))
        }
    })
}

/// As [`alter_zero_logs`], but an infeasible Type C deflation saturates at
/// `π̃₀ = 0` instead of failing. Likelihood evaluation clamps the result.
pub(crate) fn alter_zero_logs_saturating(zi: ZiType, ln_pi0: f64, gamma: f64) -> (f64, f64) {
    alter_zero_logs(zi, ln_pi0, gamma).unwrap_or((f64::NEG_INFINITY, 0.0))
}

pub(crate) fn clamp_logs((a, b): (f64, f64)) -> (f64, f64) {
    let floor = PIT0_FLOOR.ln();
    if a < floor {
        (floor, (-PIT0_FLOOR).ln_1p())
    } else if b < floor {
        ((-PIT0_FLOOR).ln_1p(), floor)
    } else {
        (a, b)
    }
}

fn check_open_prob(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {p}")))
    }
}

/// Altered zero probability `π̃₀(π₀, γ)`.
pub fn zi_zero_prob(zi: ZiType, pi0: f64, gamma: f64) -> Result<f64> {
    check_open_prob("pi0", pi0)?;
    if zi == ZiType::None {
        return Ok(pi0);
    }
    Ok(alter_zero_logs(zi, pi0.ln(), gamma)?.0.exp())
}

/// Inverse link: the `γ` that maps `pi0` to `pit0`. Type C is restricted to
/// inflation (`γ <= 0`) and fails when `pit0 < pi0`.
pub fn zi_gamma_from_point(zi: ZiType, pi0: f64, pit0: f64) -> Result<f64> {
    let g = zi_gamma_from_point_with_deflation(zi, pi0, pit0)?;
    if zi == ZiType::C && g > 0.0 {
        return Err(Error::NoSolution(format!(
            "Type C cannot deflate {pi0} to {pit0} with deflation disabled"
        )));
    }
    Ok(g)
}

/// As [`zi_gamma_from_point`], but Type C may return `γ > 0`.
pub fn zi_gamma_from_point_with_deflation(zi: ZiType, pi0: f64, pit0: f64) -> Result<f64> {
    check_open_prob("pi0", pi0)?;
    check_open_prob("pit0", pit0)?;
    match zi {
        ZiType::None => {
            if pi0 == pit0 {
                Ok(0.0)
            } else {
                Err(Error::NoSolution("no zero alteration cannot move pi0".into()))
            }
        }
        ZiType::A => Ok(logit(pit0)),
        ZiType::B => Ok((pit0.ln() / pi0.ln()).ln()),
        ZiType::C => Ok((-pit0).ln_1p() - (-pi0).ln_1p()),
        ZiType::D => Ok(logit(pit0) - logit(pi0)),
    }
}

/// `ρ = (1 - π̃₀) / (1 - π₀)`.
pub fn renormalizer(pi0: f64, pit0: f64) -> Result<f64> {
    for (name, p) in [("pi0", pi0), ("pit0", pit0)] {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain(format!("{name} must lie in [0, 1), got {p}")));
        }
    }
    Ok((1.0 - pit0) / (1.0 - pi0))
}

/// Log-pmf of the altered distribution.
pub fn zi_logpmf(model: &ZiModel, y: u64) -> Result<f64> {
    model.base.validate()?;
    let (ln_pit0, ln_1m_pit0, ln_1m_pi0) = model.zero_logs()?;
    if y == 0 {
        Ok(ln_pit0)
    } else {
        Ok(ln_1m_pit0 - ln_1m_pi0 + model.base.ln_pmf_unchecked(y))
    }
}

/// Mean of the altered distribution, `ρλ`.
pub fn zi_mean(model: &ZiModel) -> Result<f64> {
    model.base.validate()?;
    let (_, ln_1m_pit0, ln_1m_pi0) = model.zero_logs()?;
    Ok((ln_1m_pit0 - ln_1m_pi0).exp() * model.base.lambda)
}

/// Zero probability of an NB model expressed against the Poisson zero
/// probability `π₀ᴾ = e^{-μ}` at the same mean.
pub fn implicit_zi_curve(family: Family, pi0_poisson: f64, phi: f64) -> Result<f64> {
    check_open_prob("pi0", pi0_poisson)?;
    if !(phi > 0.0 && phi.is_finite()) {
        return Err(Error::Domain(format!("phi must be positive, got {phi}")));
    }
    let ln_p = pi0_poisson.ln();
    let ln_pit0 = match family {
        Family::NbLin => phi.ln_1p() / phi * ln_p,
        Family::NbQuad => -(-phi * ln_p).ln_1p() / phi,
        Family::Poisson => {
            return Err(Error::Unsupported("implicit zero inflation needs an NB family".into()))
        }
    };
    Ok(ln_pit0.exp())
}

/// Dispersion `φ` whose implicit curve passes through `(pi0_poisson, pit0)`.
pub fn match_dispersion_through_point(family: Family, pi0_poisson: f64, pit0: f64) -> Result<f64> {
    check_open_prob("pi0", pi0_poisson)?;
    check_open_prob("pit0", pit0)?;
    if pit0 <= pi0_poisson {
        return Err(Error::NoSolution(format!(
            "over-dispersion only inflates zeros: need pit0 > pi0, got ({pi0_poisson}, {pit0})"
        )));
    }
    let resid = |t: f64| implicit_zi_curve(family, pi0_poisson, t.exp()).map(|v| v - pit0);
    let lo = (1e-15f64).ln();
    let mut hi = 0.0f64;
    while resid(hi)? <= 0.0 {
        hi += 2.0;
        if hi > 690.0 {
            return Err(Error::NoSolution("dispersion bracket overflow".into()));
        }
    }
    let t = brent(|t| resid(t).unwrap_or(f64::NAN), lo, hi, 1e-15, 500)?;
    let phi = t.exp();
    let r = resid(t)?;
    if r.abs() >= 1e-10 {
        return Err(Error::NoSolution(format!("dispersion match residual {r}")));
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(zi: ZiType, p: f64) -> f64 {
        match zi {
            ZiType::B => (-p.ln()).ln(),
            ZiType::C => (-p).ln_1p(),
            ZiType::A | ZiType::D => logit(p),
            ZiType::None => p,
        }
    }

    #[test]
    fn matched_curves_pass_through_point() {
        assert!((zi_zero_prob(ZiType::D, 0.2, 0.981).unwrap() - 0.4).abs() < 1e-3);
        assert!((zi_zero_prob(ZiType::B, 0.2, -0.563).unwrap() - 0.4).abs() < 1e-3);
        assert!((zi_zero_prob(ZiType::C, 0.2, -0.288).unwrap() - 0.4).abs() < 1e-3);
        assert_eq!(zi_zero_prob(ZiType::D, 0.37, 0.0).unwrap(), 0.37);
    }

    #[test]
    fn gamma_from_point() {
        assert!((zi_gamma_from_point(ZiType::A, 0.2, 0.4).unwrap() + 0.405).abs() < 1e-3);
        assert!((zi_gamma_from_point(ZiType::B, 0.2, 0.4).unwrap() + 0.563).abs() < 1e-3);
        assert!((zi_gamma_from_point(ZiType::C, 0.2, 0.4).unwrap() + 0.288).abs() < 1e-3);
        assert!((zi_gamma_from_point(ZiType::D, 0.2, 0.4).unwrap() - 0.981).abs() < 1e-3);
        for p in [0.01, 0.3, 0.77] {
            assert_eq!(zi_gamma_from_point(ZiType::D, p, p).unwrap(), 0.0);
        }
        assert!(zi_gamma_from_point(ZiType::C, 0.4, 0.2).is_err());
        let g = zi_gamma_from_point_with_deflation(ZiType::C, 0.4, 0.2).unwrap();
        assert!(g > 0.0);
    }

    #[test]
    fn domain_and_deflation_errors() {
        assert!(zi_zero_prob(ZiType::B, 0.0, 0.1).is_err());
        assert!(zi_zero_prob(ZiType::B, 1.0, 0.1).is_err());
        assert!(matches!(
            zi_zero_prob(ZiType::C, 0.2, 1.0),
            Err(Error::DeflationInfeasible { .. })
        ));
        // feasible deflation
        let v = zi_zero_prob(ZiType::C, 0.5, 0.5).unwrap();
        assert!((v - (1.0 - 0.5f64.exp() * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn renormalizer_cases() {
        assert_eq!(renormalizer(0.2, 0.2).unwrap(), 1.0);
        assert!((renormalizer(0.2, 0.4).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(renormalizer(0.5, 0.0).unwrap(), 2.0);
        assert!(renormalizer(1.0, 0.3).is_err());
    }

    #[test]
    fn logpmf_cases() {
        let base = BaseModel::poisson(2.0).unwrap();
        let none = ZiModel::new(base, ZiType::None, 0.0).unwrap();
        for y in 0..30 {
            let a = zi_logpmf(&none, y).unwrap();
            let b = base.ln_pmf(y).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
        let a = ZiModel::new(base, ZiType::A, logit(0.3)).unwrap();
        assert!((zi_logpmf(&a, 0).unwrap() - 0.3f64.ln()).abs() < 1e-14);

        let d = ZiModel::new(base, ZiType::D, 0.5).unwrap();
        let pi0 = (-2.0f64).exp();
        let pit0 = zi_zero_prob(ZiType::D, pi0, 0.5).unwrap();
        let rho = renormalizer(pi0, pit0).unwrap();
        let expect = rho.ln() + (8.0 * (-2.0f64).exp() / 6.0).ln();
        assert!((zi_logpmf(&d, 3).unwrap() - expect).abs() < 1e-13);
        let total: f64 = (0..100).map(|y| zi_logpmf(&d, y).unwrap().exp()).sum();
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn mean_cases() {
        let base = BaseModel::poisson(3.3).unwrap();
        for zi in [ZiType::B, ZiType::C, ZiType::D] {
            let m = ZiModel::new(base, zi, 0.0).unwrap();
            assert!((zi_mean(&m).unwrap() - 3.3).abs() < 1e-12);
        }
        let c = ZiModel::new(base, ZiType::C, -0.5).unwrap();
        assert!((zi_mean(&c).unwrap() - (-0.5f64).exp() * 3.3).abs() < 1e-12);
        let d = ZiModel::new(BaseModel::poisson(2.0).unwrap(), ZiType::D, 1.0).unwrap();
        let brute: f64 = (0..120).map(|y| y as f64 * zi_logpmf(&d, y).unwrap().exp()).sum();
        assert!((zi_mean(&d).unwrap() - brute).abs() < 1e-8);
    }

    #[test]
    fn implicit_curves() {
        let lin = implicit_zi_curve(Family::NbLin, 0.2, 1.82).unwrap();
        let quad = implicit_zi_curve(Family::NbQuad, 0.2, 1.13).unwrap();
        assert!((lin - 0.4).abs() < 5e-3, "{lin}");
        assert!((quad - 0.4).abs() < 5e-3, "{quad}");
        for fam in [Family::NbLin, Family::NbQuad] {
            let v = implicit_zi_curve(fam, 0.2, 1e-10).unwrap();
            assert!((v - 0.2).abs() < 1e-9);
            for &phi in &[0.01, 0.5, 3.0] {
                for &p in &[0.01f64, 0.3, 0.9] {
                    let nb = BaseModel::new(fam, -p.ln(), phi).unwrap();
                    let z = crate::dist::base_zero_prob(&nb).unwrap();
                    assert!((implicit_zi_curve(fam, p, phi).unwrap() - z).abs() < 1e-12);
                }
            }
        }
        assert!(implicit_zi_curve(Family::Poisson, 0.2, 1.0).is_err());
        assert!(implicit_zi_curve(Family::NbLin, 0.2, 0.0).is_err());
    }

    #[test]
    fn dispersion_matching() {
        let lin = match_dispersion_through_point(Family::NbLin, 0.2, 0.4).unwrap();
        let quad = match_dispersion_through_point(Family::NbQuad, 0.2, 0.4).unwrap();
        assert!((lin - 1.82).abs() < 0.01, "{lin}");
        assert!((quad - 1.13).abs() < 0.01, "{quad}");
        let tiny = match_dispersion_through_point(Family::NbLin, 0.2, 0.2 + 1e-9).unwrap();
        assert!(tiny < 1e-6);
        assert!(match_dispersion_through_point(Family::NbLin, 0.2, 0.2).is_err());
        assert!(match_dispersion_through_point(Family::NbQuad, 0.3, 0.1).is_err());
    }

    #[test]
    fn boundary_behaviour() {
        let tiny = 1e-300;
        let near_one = 1.0 - 1e-15;
        let gam = -0.7;
        assert!(zi_zero_prob(ZiType::B, tiny, gam).unwrap() < 1e-100);
        assert!(zi_zero_prob(ZiType::D, tiny, gam).unwrap() < 1e-100);
        assert!((zi_zero_prob(ZiType::A, tiny, gam).unwrap() - crate::special::sigmoid(gam)).abs() < 1e-15);
        assert!((zi_zero_prob(ZiType::C, tiny, gam).unwrap() - (1.0 - gam.exp())).abs() < 1e-15);
        for zi in [ZiType::B, ZiType::C, ZiType::D] {
            assert!(zi_zero_prob(zi, near_one, gam).unwrap() > 1.0 - 1e-13);
        }
    }

    #[test]
    fn unknown_type_string() {
        assert_eq!("D".parse::<ZiType>().unwrap(), ZiType::D);
        assert!("e".parse::<ZiType>().is_err());
    }

    proptest! {
        #[test]
        fn link_equation_holds(p in 0.001f64..0.999, gam in -3.0f64..3.0) {
            for zi in [ZiType::B, ZiType::D] {
                let q = zi_zero_prob(zi, p, gam).unwrap();
                prop_assert!((g(zi, q) - g(zi, p) - gam).abs() < 1e-10);
            }
            let neg = -gam.abs();
            let q = zi_zero_prob(ZiType::C, p, neg).unwrap();
            prop_assert!((g(ZiType::C, q) - g(ZiType::C, p) - neg).abs() < 1e-10);
            let q = zi_zero_prob(ZiType::A, p, gam).unwrap();
            prop_assert!((logit(q) - gam).abs() < 1e-10);
        }

        #[test]
        fn neutral_gamma_is_identity(p in 0.001f64..0.999) {
            for zi in [ZiType::B, ZiType::C, ZiType::D] {
                prop_assert!((zi_zero_prob(zi, p, 0.0).unwrap() - p).abs() < 1e-15);
            }
        }

        #[test]
        fn type_d_symmetry(p in 0.001f64..0.999, gam in -4.0f64..4.0) {
            let a = zi_zero_prob(ZiType::D, p, gam).unwrap();
            let b = 1.0 - zi_zero_prob(ZiType::D, 1.0 - p, -gam).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn nblin_is_type_b(p in 0.0001f64..0.9999, phi in 0.01f64..10.0) {
            let gam = (phi.ln_1p() / phi).ln();
            let b = zi_zero_prob(ZiType::B, p, gam).unwrap();
            let lin = implicit_zi_curve(Family::NbLin, p, phi).unwrap();
            prop_assert!((b - lin).abs() < 1e-12);
        }

        #[test]
        fn inverse_round_trip(p in 0.01f64..0.99, q in 0.01f64..0.99) {
            for zi in ZiType::EXPLICIT {
                let gam = zi_gamma_from_point_with_deflation(zi, p, q).unwrap();
                let back = zi_zero_prob(zi, p, gam).unwrap();
                prop_assert!((back - q).abs() < 1e-12, "{:?} {} {} {}", zi, p, q, back);
            }
        }

        #[test]
        fn truncated_shape_is_preserved(lam in 0.1f64..20.0, gam in -2.0f64..2.0, y1 in 1u64..40, dy in 1u64..20) {
            let base = BaseModel::poisson(lam).unwrap();
            for zi in [ZiType::A, ZiType::B, ZiType::D] {
                let m = ZiModel::new(base, zi, gam).unwrap();
                let y2 = y1 + dy;
                let lhs = zi_logpmf(&m, y2).unwrap() - zi_logpmf(&m, y1).unwrap();
                let rhs = base.ln_pmf(y2).unwrap() - base.ln_pmf(y1).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
            }
        }
    }
}
