//! Log-likelihood of zero-altered count regressions.
//!
//! Parameter vectors follow a fixed layout: mean coefficients `β` (log link on
//! `λ`), then `γ` coefficients (identity link on `γ`), then `log φ` when the
//! base is a negative binomial with free dispersion. Type C in its default
//! inflation-only mode replaces the `γ` block by `θ` with `γ = -exp(zᵀθ)`.

use serde::{Deserialize, Serialize};

use crate::data::CountDataset;
use crate::design::{DesignMatrix, DesignSpec};
use crate::dist::{truncated_poisson_mean, BaseModel, Family};
use crate::error::{Error, Result};
use crate::special::{ln_1m_exp, ln_factorial, ln_rising, CompensatedSum};
use crate::zi::{alter_zero_logs, alter_zero_logs_saturating, clamp_logs, ZiType, PIT0_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum PhiMode {
    Fixed(f64),
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub base: Family,
    pub zi: ZiType,
    pub mean_design: DesignSpec,
    pub gamma_design: DesignSpec,
    pub phi_mode: PhiMode,
    /// Lets Type C take `γ > 0` (zero deflation); otherwise `γ = -exp(zᵀθ)`.
    #[serde(default)]
    pub type_c_deflation: bool,
}

impl ModelSpec {
    /// Constant mean and constant `γ`, free dispersion.
    pub fn new(base: Family, zi: ZiType) -> Self {
        Self {
            base,
            zi,
            mean_design: DesignSpec::constant(),
            gamma_design: DesignSpec::constant(),
            phi_mode: PhiMode::Free,
            type_c_deflation: false,
        }
    }

    pub fn mean_design(mut self, d: DesignSpec) -> Self {
        self.mean_design = d;
        self
    }

    pub fn gamma_design(mut self, d: DesignSpec) -> Self {
        self.gamma_design = d;
        self
    }

    pub fn phi(mut self, mode: PhiMode) -> Self {
        self.phi_mode = mode;
        self
    }

    pub fn deflation(mut self, allow: bool) -> Self {
        self.type_c_deflation = allow;
        self
    }

    pub fn label(&self) -> String {
        match self.zi {
            ZiType::None => self.base.label().to_string(),
            zi if self.base == Family::Poisson => zi.label().to_string(),
            zi => format!("{} ({})", zi.label(), self.base.label()),
        }
    }

    pub(crate) fn free_phi(&self) -> bool {
        self.base.has_dispersion() && self.phi_mode == PhiMode::Free
    }

    /// Whether `γ` is stored as `θ` with `γ = -exp(zᵀθ)`.
    pub fn inflation_only_c(&self) -> bool {
        self.zi == ZiType::C && !self.type_c_deflation
    }

    pub fn bind(&self, data: &CountDataset) -> Result<BoundModel> {
        BoundModel::new(self.clone(), data)
    }
}

/// A [`ModelSpec`] with its design matrices built against a dataset.
#[derive(Debug, Clone)]
pub struct BoundModel {
    pub spec: ModelSpec,
    pub y: Vec<u64>,
    pub x: DesignMatrix,
    pub z: Option<DesignMatrix>,
    ln_fact: Vec<f64>,
}

/// Per-observation fitted quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsFit {
    pub lambda: f64,
    pub gamma: f64,
    pub pi0: f64,
    pub pit0: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub zero_part: f64,
    pub positive_part: f64,
}

impl Decomposition {
    pub fn total(&self) -> f64 {
        self.zero_part + self.positive_part
    }
}

impl BoundModel {
    pub fn new(spec: ModelSpec, data: &CountDataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Data("empty dataset".into()));
        }
        let x = spec.mean_design.build(data)?;
        if x.ncols == 0 {
            return Err(Error::Data("mean design has no columns".into()));
        }
        let z = if spec.zi.has_gamma() {
            let z = spec.gamma_design.build(data)?;
            if z.ncols == 0 {
                return Err(Error::Data("gamma design has no columns".into()));
            }
            Some(z)
        } else {
            None
        };
        if let PhiMode::Fixed(phi) = spec.phi_mode {
            if spec.base.has_dispersion() && !(phi >= 0.0 && phi.is_finite()) {
                return Err(Error::InvalidParameter(format!("fixed phi must be >= 0, got {phi}")));
            }
        }
        let ln_fact = data.y.iter().map(|&y| ln_factorial(y)).collect();
        Ok(Self { spec, y: data.y.clone(), x, z, ln_fact })
    }

    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn n_beta(&self) -> usize {
        self.x.ncols
    }

    pub fn n_gamma(&self) -> usize {
        self.z.as_ref().map_or(0, |z| z.ncols)
    }

    pub fn n_params(&self) -> usize {
        self.n_beta() + self.n_gamma() + usize::from(self.spec.free_phi())
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.x.names.iter().map(|n| format!("mean:{n}")).collect();
        if let Some(z) = &self.z {
            let prefix = if self.spec.inflation_only_c() { "theta" } else { "gamma" };
            names.extend(z.names.iter().map(|n| format!("{prefix}:{n}")));
        }
        if self.spec.free_phi() {
            names.push("log_phi".into());
        }
        names
    }

    fn check_len(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::DimensionMismatch { expected: self.n_params(), got: params.len() });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("parameter vector".into()));
        }
        Ok(())
    }

    pub fn phi(&self, params: &[f64]) -> f64 {
        match self.spec.phi_mode {
            _ if !self.spec.base.has_dispersion() => 0.0,
            PhiMode::Fixed(phi) => phi,
            PhiMode::Free => params[params.len() - 1].exp(),
        }
    }

    pub fn gamma_at(&self, i: usize, params: &[f64]) -> f64 {
        match &self.z {
            None => 0.0,
            Some(z) => {
                let coef = &params[self.n_beta()..self.n_beta() + z.ncols];
                let lin = z.dot(i, coef);
                if self.spec.inflation_only_c() {
                    -lin.exp()
                } else {
                    lin
                }
            }
        }
    }

    fn base_at(&self, i: usize, params: &[f64], phi: f64) -> Result<BaseModel> {
        let eta = self.x.dot(i, &params[..self.n_beta()]);
        let lambda = eta.exp();
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::NonFinite(format!("lambda = exp({eta}) at row {i}")));
        }
        Ok(BaseModel { family: self.spec.base, lambda, phi })
    }

    /// `(zero term, positive term)` for observation `i`.
    fn obs_terms(&self, i: usize, params: &[f64], phi: f64) -> Result<(f64, f64)> {
        let base = self.base_at(i, params, phi)?;
        let y = self.y[i];
        let ln_pi0 = base.ln_zero_prob_unchecked();
        let ln_1m_pi0 = ln_1m_exp(ln_pi0);
        let (ln_pit0, ln_1m_pit0) = if self.spec.zi == ZiType::None {
            (ln_pi0, ln_1m_pi0)
        } else {
            clamp_logs(alter_zero_logs_saturating(self.spec.zi, ln_pi0, self.gamma_at(i, params)))
        };
        if y == 0 {
            return Ok((ln_pit0, 0.0));
        }
        let ln_pmf = match base.size() {
            None => y as f64 * base.lambda.ln() - base.lambda - self.ln_fact[i],
            Some(_) => base.ln_pmf_unchecked(y),
        };
        Ok((ln_1m_pit0, ln_pmf - ln_1m_pi0))
    }

    pub fn decomposed(&self, params: &[f64]) -> Result<Decomposition> {
        self.check_len(params)?;
        let phi = self.phi(params);
        let mut zero_sum = CompensatedSum::default();
        let mut positive_sum = CompensatedSum::default();
        for i in 0..self.n_obs() {
            let (z, p) = self.obs_terms(i, params, phi)?;
            zero_sum.add(z);
            positive_sum.add(p);
        }
        let (zero_part, positive_part) = (zero_sum.value(), positive_sum.value());
        if !(zero_part.is_finite() && positive_part.is_finite()) {
            return Err(Error::NonFinite(format!("loglik parts ({zero_part}, {positive_part})")));
        }
        Ok(Decomposition { zero_part, positive_part })
    }

    pub fn loglik(&self, params: &[f64]) -> Result<f64> {
        self.check_len(params)?;
        let phi = self.phi(params);
        let mut sum = CompensatedSum::default();
        for i in 0..self.n_obs() {
            let (z, p) = self.obs_terms(i, params, phi)?;
            sum.add(z);
            sum.add(p);
        }
        let total = sum.value();
        if !total.is_finite() {
            return Err(Error::NonFinite(format!("loglik = {total}")));
        }
        Ok(total)
    }

    /// Rows where a Type C deflation would push `π̃₀` below zero; the
    /// likelihood saturates these at the clamp floor.
    pub fn infeasible_rows(&self, params: &[f64]) -> Result<usize> {
        self.check_len(params)?;
        if self.spec.zi != ZiType::C {
            return Ok(0);
        }
        let phi = self.phi(params);
        let mut count = 0;
        for i in 0..self.n_obs() {
            let ln_pi0 = self.base_at(i, params, phi)?.ln_zero_prob_unchecked();
            count += usize::from(alter_zero_logs(ZiType::C, ln_pi0, self.gamma_at(i, params)).is_err());
        }
        Ok(count)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.spec.base == Family::Poisson && matches!(self.spec.zi, ZiType::None | ZiType::A | ZiType::D)
    }

    /// Closed-form score for the Poisson base with no alteration, Type A or Type D.
    pub fn analytic_gradient(&self, params: &[f64]) -> Option<Result<Vec<f64>>> {
        if !self.has_analytic_gradient() {
            return None;
        }
        Some(self.poisson_score(params))
    }

    fn poisson_score(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.check_len(params)?;
        let nb = self.n_beta();
        let mut grad = vec![0.0; self.n_params()];
        let floor = PIT0_FLOOR.ln();
        for i in 0..self.n_obs() {
            let base = self.base_at(i, params, 0.0)?;
            let lambda = base.lambda;
            let y = self.y[i];
            let yf = y as f64;
            let (d_eta, d_gamma) = match self.spec.zi {
                ZiType::None => (yf - lambda, 0.0),
                zi => {
                    let gamma = self.gamma_at(i, params);
                    let (a, b) = alter_zero_logs(zi, -lambda, gamma)?;
                    let clamped = a < floor || b < floor;
                    let ind = f64::from(u8::from(y == 0));
                    let d_gamma = if clamped { 0.0 } else { ind - a.exp() };
                    let d_eta = match (zi, clamped, y) {
                        (_, _, 0) if zi == ZiType::A || clamped => 0.0,
                        (ZiType::A, _, _) | (_, true, _) => yf - truncated_poisson_mean(lambda),
                        // Type D: y - ρλ, with ρλ = λ / (1 + (e^γ - 1) e^{-λ})
                        _ => yf - (b - ln_1m_exp(-lambda)).exp() * lambda,
                    };
                    (d_eta, d_gamma)
                }
            };
            for (g, x) in grad[..nb].iter_mut().zip(self.x.row(i)) {
                *g += d_eta * x;
            }
            if let Some(z) = &self.z {
                for (g, zv) in grad[nb..].iter_mut().zip(z.row(i)) {
                    *g += d_gamma * zv;
                }
            }
        }
        Ok(grad)
    }

    /// Central-difference score with step `step · max(1, |θ_j|)` per coordinate.
    pub fn numeric_gradient(&self, params: &[f64], step: f64) -> Result<Vec<f64>> {
        if step.is_nan() || step <= 0.0 {
            return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
        }
        self.check_len(params)?;
        let mut p = params.to_vec();
        let mut grad = Vec::with_capacity(p.len());
        for j in 0..p.len() {
            let h = step * params[j].abs().max(1.0);
            p[j] = params[j] + h;
            let up = self.loglik(&p)?;
            p[j] = params[j] - h;
            let down = self.loglik(&p)?;
            p[j] = params[j];
            let g = (up - down) / (2.0 * h);
            if !g.is_finite() {
                return Err(Error::NonFinite(format!("score component {j}")));
            }
            grad.push(g);
        }
        Ok(grad)
    }

    /// Analytic score where available, otherwise central differences with step 1e-6.
    pub fn gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        match self.analytic_gradient(params) {
            Some(g) => g,
            None => self.numeric_gradient(params, 1e-6),
        }
    }

    pub fn fitted(&self, params: &[f64]) -> Result<Vec<ObsFit>> {
        self.check_len(params)?;
        let phi = self.phi(params);
        (0..self.n_obs())
            .map(|i| {
                let base = self.base_at(i, params, phi)?;
                let ln_pi0 = base.ln_zero_prob_unchecked();
                let gamma = self.gamma_at(i, params);
                let (ln_pit0, ln_1m_pit0) = if self.spec.zi == ZiType::None {
                    (ln_pi0, ln_1m_exp(ln_pi0))
                } else {
                    clamp_logs(alter_zero_logs_saturating(self.spec.zi, ln_pi0, gamma))
                };
                let rho = (ln_1m_pit0 - ln_1m_exp(ln_pi0)).exp();
                Ok(ObsFit {
                    lambda: base.lambda,
                    gamma,
                    pi0: ln_pi0.exp(),
                    pit0: ln_pit0.exp(),
                    mu: rho * base.lambda,
                })
            })
            .collect()
    }
}

pub fn loglik(spec: &ModelSpec, data: &CountDataset, params: &[f64]) -> Result<f64> {
    spec.bind(data)?.loglik(params)
}

/// Zero/positive split: `Σ [I log π̃₀ + (1-I) log(1-π̃₀)]` and `Σ_{y>0} log π⁺_y`.
pub fn loglik_decomposed(spec: &ModelSpec, data: &CountDataset, params: &[f64]) -> Result<Decomposition> {
    spec.bind(data)?.decomposed(params)
}

pub fn score_numeric(spec: &ModelSpec, data: &CountDataset, params: &[f64], step: f64) -> Result<Vec<f64>> {
    spec.bind(data)?.numeric_gradient(params, step)
}

/// Type D written in exponential-family form,
/// `log π̃_y = y η + I(y=0) γ - Ã + c(y)` with `Ã = γ - log π̃₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeDNaturals {
    pub eta: f64,
    pub cumulant: f64,
    pub gamma: f64,
    base: BaseModel,
}

impl TypeDNaturals {
    /// Carrier `c(y)`, normalised so that `c(0) = 0`.
    pub fn carrier(&self, y: u64) -> f64 {
        match self.base.size() {
            None => -ln_factorial(y),
            Some(k) => ln_rising(k, y) - ln_factorial(y),
        }
    }

    pub fn logpmf(&self, y: u64) -> f64 {
        let ind = if y == 0 { self.gamma } else { 0.0 };
        y as f64 * self.eta + ind - self.cumulant + self.carrier(y)
    }
}

pub fn typed_naturals(base: &BaseModel, gamma: f64) -> Result<TypeDNaturals> {
    base.validate()?;
    let mu = base.lambda;
    let eta = match (base.family, base.size()) {
        (Family::NbLin, _) => {
            return Err(Error::Unsupported("NB-lin is not an exponential family".into()))
        }
        (_, None) => mu.ln(),
        (_, Some(k)) => (mu / (k + mu)).ln(),
    };
    let (ln_pit0, _) = alter_zero_logs(ZiType::D, base.ln_zero_prob_unchecked(), gamma)?;
    Ok(TypeDNaturals { eta, cumulant: gamma - ln_pit0, gamma, base: *base })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{trajan, Categorical, Column};
    use crate::dist::base_logpmf;
    use crate::special::logit;
    use crate::zi::{zi_logpmf, zi_zero_prob, ZiModel};

    fn iid(y: Vec<u64>) -> CountDataset {
        CountDataset::new("y", y)
    }

    #[test]
    fn type_a_single_zero() {
        let spec = ModelSpec::new(Family::Poisson, ZiType::A);
        for beta in [-1.0, 0.3, 2.0] {
            let ll = loglik(&spec, &iid(vec![0]), &[beta, logit(0.3)]).unwrap();
            assert!((ll - 0.3f64.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn iid_poisson_matches_pmf_sum() {
        let y = vec![0, 3, 1, 4, 2, 2, 7, 0, 1];
        let spec = ModelSpec::new(Family::Poisson, ZiType::None);
        let lam: f64 = 1.7;
        let ll = loglik(&spec, &iid(y.clone()), &[lam.ln()]).unwrap();
        let m = BaseModel::poisson(lam).unwrap();
        let oracle: f64 = y.iter().map(|&v| base_logpmf(&m, v).unwrap()).sum();
        assert!((ll - oracle).abs() < 1e-10);
    }

    #[test]
    fn loglik_is_sum_of_zi_logpmf() {
        let y = vec![0, 0, 5, 1, 3, 9];
        let spec = ModelSpec::new(Family::NbQuad, ZiType::B);
        let params = [1.1f64, -0.4, 0.7f64.ln()];
        let ll = loglik(&spec, &iid(y.clone()), &params).unwrap();
        let m = ZiModel::new(BaseModel::new(Family::NbQuad, 1.1f64.exp(), 0.7).unwrap(), ZiType::B, -0.4).unwrap();
        let oracle: f64 = y.iter().map(|&v| zi_logpmf(&m, v).unwrap()).sum();
        assert!((ll - oracle).abs() < 1e-10);
    }

    #[test]
    fn dimension_and_nonfinite_errors() {
        let spec = ModelSpec::new(Family::Poisson, ZiType::D);
        let d = iid(vec![1, 2]);
        assert!(matches!(loglik(&spec, &d, &[0.0]), Err(Error::DimensionMismatch { .. })));
        assert!(loglik(&spec, &d, &[f64::NAN, 0.0]).is_err());
        assert!(loglik(&spec, &d, &[800.0, 0.0]).is_err());
    }

    #[test]
    fn decomposition_properties() {
        let all_zero = iid(vec![0, 0, 0]);
        let spec = ModelSpec::new(Family::Poisson, ZiType::D);
        let dec = loglik_decomposed(&spec, &all_zero, &[0.2, 0.5]).unwrap();
        assert_eq!(dec.positive_part, 0.0);

        let d = iid(vec![0, 2, 0, 1, 5]);
        let spec = ModelSpec::new(Family::Poisson, ZiType::A);
        let a = loglik_decomposed(&spec, &d, &[0.4, -0.3]).unwrap();
        let b = loglik_decomposed(&spec, &d, &[0.4, 1.2]).unwrap();
        assert_eq!(a.positive_part, b.positive_part);
        assert_ne!(a.zero_part, b.zero_part);

        let t = trajan();
        for zi in ZiType::EXPLICIT {
            let spec = ModelSpec::new(Family::Poisson, zi).mean_design(DesignSpec::cells("photoperiod:bap"));
            let bound = spec.bind(&t).unwrap();
            let params: Vec<f64> = (0..bound.n_params()).map(|j| 0.8 + 0.1 * j as f64).collect();
            let params = if zi == ZiType::A || zi == ZiType::C {
                let mut p = params;
                *p.last_mut().unwrap() = -1.0;
                p
            } else {
                params
            };
            let dec = bound.decomposed(&params).unwrap();
            assert!((dec.total() - bound.loglik(&params).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn analytic_matches_numeric() {
        let mut y = Vec::new();
        let mut x = Vec::new();
        for i in 0..60u64 {
            y.push((i * 7 + 3) % 9 * u64::from(i % 4 != 0));
            x.push((i as f64 / 60.0) - 0.5);
        }
        let d = iid(y).with_column("x", Column::Numeric(x)).unwrap();
        for zi in [ZiType::None, ZiType::A, ZiType::D] {
            let spec = ModelSpec::new(Family::Poisson, zi)
                .mean_design(DesignSpec::constant().numeric("x"))
                .gamma_design(DesignSpec::constant().numeric("x"));
            let b = spec.bind(&d).unwrap();
            let p: Vec<f64> = [0.9, -0.6, 0.4, 0.8][..b.n_params()].to_vec();
            let a = b.analytic_gradient(&p).unwrap().unwrap();
            let n = b.numeric_gradient(&p, 1e-6).unwrap();
            for (u, v) in a.iter().zip(&n) {
                assert!((u - v).abs() < 1e-5 * u.abs().max(1.0), "{zi:?} {a:?} {n:?}");
            }
        }
    }

    #[test]
    fn quadratic_calibration() {
        // log-likelihood of a N(μ, 1) sample is quadratic in μ: score = Σ(x - μ)
        let f = |m: f64| -0.5 * [1.0f64, 2.0, 4.5].iter().map(|x| (x - m).powi(2)).sum::<f64>();
        let m = 0.7;
        let h = 1e-6 * f64::max(1.0, m);
        let num = (f(m + h) - f(m - h)) / (2.0 * h);
        assert!((num - (7.5 - 3.0 * m)).abs() < 1e-6);
    }

    #[test]
    fn gamma_score_is_zero_count_residual() {
        let t = trajan();
        let spec = ModelSpec::new(Family::Poisson, ZiType::D).mean_design(DesignSpec::cells("photoperiod:bap"));
        let b = spec.bind(&t).unwrap();
        let mut p = vec![1.5; b.n_params()];
        *p.last_mut().unwrap() = 0.7;
        let num = b.numeric_gradient(&p, 1e-6).unwrap();
        let fits = b.fitted(&p).unwrap();
        let n = t.len() as f64;
        let mean_pit0 = fits.iter().map(|f| f.pit0).sum::<f64>() / n;
        let expect = n * (t.zero_proportion() - mean_pit0);
        assert!((num.last().unwrap() - expect).abs() < 1e-5);
    }

    #[test]
    fn type_d_natural_form() {
        let base = BaseModel::poisson(2.0).unwrap();
        let nat = typed_naturals(&base, 0.0).unwrap();
        assert!((nat.cumulant - 2.0).abs() < 1e-14);

        let nat = typed_naturals(&base, 1.0).unwrap();
        let total: f64 = (0..100).map(|y| nat.logpmf(y).exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let z = zi_zero_prob(ZiType::D, (-2.0f64).exp(), 1.0).unwrap();
        assert!((nat.logpmf(0) - z.ln()).abs() < 1e-14);
        let m = ZiModel::new(base, ZiType::D, 1.0).unwrap();
        for y in 0..30 {
            assert!((nat.logpmf(y) - zi_logpmf(&m, y).unwrap()).abs() < 1e-12);
        }

        let nbq = BaseModel::new(Family::NbQuad, 2.5, 0.6).unwrap();
        let nat = typed_naturals(&nbq, -0.4).unwrap();
        let m = ZiModel::new(nbq, ZiType::D, -0.4).unwrap();
        for y in 0..30 {
            assert!((nat.logpmf(y) - zi_logpmf(&m, y).unwrap()).abs() < 1e-12);
        }
        let lin = BaseModel::new(Family::NbLin, 2.0, 0.5).unwrap();
        assert!(matches!(typed_naturals(&lin, 0.1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn type_d_loglik_depends_on_cell_sufficient_statistics() {
        // swapping values within a cell but across zero/positive strata keeps Σy and ΣI
        let labels = ["a", "a", "a", "a", "b", "b", "b"];
        let mk = |y: Vec<u64>| {
            iid(y)
                .with_column("g", Column::Categorical(Categorical::from_labels(&labels)))
                .unwrap()
        };
        let d1 = mk(vec![0, 2, 5, 1, 0, 0, 4]);
        let d2 = mk(vec![3, 0, 1, 4, 0, 4, 0]);
        let spec = ModelSpec::new(Family::Poisson, ZiType::D).mean_design(DesignSpec::cells("g"));
        let p = [0.4, 1.1, 0.9];
        let a = loglik(&spec, &d1, &p).unwrap();
        let b = loglik(&spec, &d2, &p).unwrap();
        // Σ log y! differs between the two samples; compare the data-dependent kernel
        let c1: f64 = d1.y.iter().map(|&v| ln_factorial(v)).sum();
        let c2: f64 = d2.y.iter().map(|&v| ln_factorial(v)).sum();
        assert!(((a + c1) - (b + c2)).abs() < 1e-12);
    }
}
