//! Base count distributions: Poisson and the two negative binomial
//! parameterisations, plus the zero-truncated Poisson.
//!
//! Both negative binomial variants share the Gamma-form pmf
//!
//! ```text
//! π_y(μ, k) = Γ(k+y) / (y! Γ(k)) · (k/(k+μ))^k · (μ/(k+μ))^y
//! ```
//!
//! with `k = 1/φ` for [`Family::NbQuad`] (variance `μ + φμ²`) and `k = μ/φ` for
//! [`Family::NbLin`] (variance `μ(1 + φ)`). Everything is evaluated in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_1m_exp, ln_factorial, ln_rising};

/// Dispersion values below this are evaluated on the Poisson branch.
pub const PHI_POISSON_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Poisson,
    #[serde(rename = "nbquad")]
    NbQuad,
    #[serde(rename = "nblin")]
    NbLin,
}

impl Family {
    pub fn has_dispersion(self) -> bool {
        !matches!(self, Family::Poisson)
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::Poisson => "Poisson",
            Family::NbQuad => "NB-quad",
            Family::NbLin => "NB-lin",
        }
    }
}

/// A base count distribution with mean `lambda` and dispersion `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseModel {
    pub family: Family,
    pub lambda: f64,
    pub phi: f64,
}

impl BaseModel {
    pub fn new(family: Family, lambda: f64, phi: f64) -> Result<Self> {
        let m = Self { family, lambda, phi };
        m.validate()?;
        Ok(m)
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::new(Family::Poisson, lambda, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if self.family.has_dispersion() && !(self.phi >= 0.0 && self.phi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "phi must be non-negative and finite, got {}",
                self.phi
            )));
        }
        Ok(())
    }

    fn is_poisson_branch(&self) -> bool {
        !self.family.has_dispersion() || self.phi < PHI_POISSON_CUTOFF
    }

    /// Gamma-form size parameter `k`, or `None` on the Poisson branch.
    pub fn size(&self) -> Option<f64> {
        if self.is_poisson_branch() {
            return None;
        }
        Some(match self.family {
            Family::NbQuad => 1.0 / self.phi,
            Family::NbLin => self.lambda / self.phi,
            Family::Poisson => unreachable!(),
        })
    }

    /// `log π_y` assuming the parameters are valid.
    pub(crate) fn ln_pmf_unchecked(&self, y: u64) -> f64 {
        let mu = self.lambda;
        let yf = y as f64;
        match self.size() {
            None => yf * mu.ln() - mu - ln_factorial(y),
            Some(k) => {
                let tail = if y == 0 { 0.0 } else { yf * (mu.ln() - (k + mu).ln()) };
                ln_rising(k, y) - ln_factorial(y) - k * (mu / k).ln_1p() + tail
            }
        }
    }

    /// `log π_0`.
    pub(crate) fn ln_zero_prob_unchecked(&self) -> f64 {
        let mu = self.lambda;
        match self.family {
            _ if self.is_poisson_branch() => -mu,
            Family::NbQuad => -(self.phi * mu).ln_1p() / self.phi,
            Family::NbLin => -mu * self.phi.ln_1p() / self.phi,
            Family::Poisson => unreachable!(),
        }
    }

    pub fn ln_pmf(&self, y: u64) -> Result<f64> {
        self.validate()?;
        Ok(self.ln_pmf_unchecked(y))
    }

    pub fn ln_zero_prob(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.ln_zero_prob_unchecked())
    }

    pub fn mean(&self) -> f64 {
        self.lambda
    }

    pub fn variance(&self) -> Result<f64> {
        self.validate()?;
        let mu = self.lambda;
        Ok(match self.family {
            Family::Poisson => mu,
            Family::NbQuad => mu + self.phi * mu * mu,
            Family::NbLin => mu * (1.0 + self.phi),
        })
    }

    /// Ratio `π_{y+1} / π_y`.
    pub(crate) fn pmf_ratio(&self, y: u64) -> f64 {
        let mu = self.lambda;
        let yf = y as f64;
        match self.size() {
            None => mu / (yf + 1.0),
            Some(k) => (k + yf) / (yf + 1.0) * (mu / (k + mu)),
        }
    }
}

/// `log π_y` of the base distribution.
pub fn base_logpmf(model: &BaseModel, y: u64) -> Result<f64> {
    model.ln_pmf(y)
}

/// Zero probability `π_0` of the base distribution.
pub fn base_zero_prob(model: &BaseModel) -> Result<f64> {
    Ok(model.ln_zero_prob()?.exp())
}

pub fn base_variance(model: &BaseModel) -> Result<f64> {
    model.variance()
}

/// `log[π_y(λ) / (1 - e^{-λ})]` for the zero-truncated Poisson, `y >= 1`.
pub fn truncated_poisson_logpmf(lambda: f64, y: u64) -> Result<f64> {
    if y == 0 {
        return Err(Error::Domain("zero-truncated pmf is undefined at y = 0".into()));
    }
    let base = BaseModel::poisson(lambda)?;
    Ok(base.ln_pmf_unchecked(y) - ln_1m_exp(-lambda))
}

/// Mean of the zero-truncated Poisson, `λ / (1 - e^{-λ})`.
pub fn truncated_poisson_mean(lambda: f64) -> f64 {
    if lambda < 1e-300 {
        return 1.0;
    }
    lambda / -(-lambda).exp_m1()
}
