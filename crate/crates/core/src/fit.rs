//! Maximum-likelihood fitting and post-fit quantities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::CountDataset;
use crate::design::DesignSpec;
use crate::dist::{truncated_poisson_mean, Family};
use crate::error::{Error, Result};
use crate::likelihood::{BoundModel, ModelSpec, PhiMode};
use crate::optim::{bfgs, newton_polish, numeric_hessian, MinimizeOptions, Minimum, Objective};
use crate::roots::brent;
use crate::special::logit;
use crate::zi::{match_dispersion_through_point, ZiType, PIT0_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub gradient_tol: f64,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iterations: 500, gradient_tol: 1e-6, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub params: Vec<f64>,
    pub param_names: Vec<String>,
    pub loglik_value: f64,
    pub aic: f64,
    pub fitted_mu: Vec<f64>,
    pub fitted_pi0: Vec<f64>,
    pub fitted_pit0: Vec<f64>,
    pub vcov: Option<Vec<Vec<f64>>>,
    pub converged: bool,
    pub iterations: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl FitResult {
    fn build(model: &BoundModel, params: Vec<f64>, iterations: usize, converged: bool, warnings: Vec<String>) -> Result<Self> {
        let loglik_value = model.loglik(&params)?;
        let fits = model.fitted(&params)?;
        Ok(Self {
            spec: model.spec.clone(),
            param_names: model.param_names(),
            aic: 2.0 * params.len() as f64 - 2.0 * loglik_value,
            loglik_value,
            fitted_mu: fits.iter().map(|f| f.mu).collect(),
            fitted_pi0: fits.iter().map(|f| f.pi0).collect(),
            fitted_pit0: fits.iter().map(|f| f.pit0).collect(),
            params,
            vcov: None,
            converged,
            iterations,
            warnings,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.fitted_mu.len()
    }

    /// Standard errors from the diagonal of `vcov`.
    pub fn std_errors(&self) -> Option<Vec<f64>> {
        self.vcov.as_ref().map(|v| v.iter().enumerate().map(|(i, row)| row[i].sqrt()).collect())
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.param_names.iter().position(|n| n == name).map(|i| self.params[i])
    }

    /// Dispersion `φ` on the natural scale, if the base has one.
    pub fn phi(&self) -> Option<f64> {
        match self.spec.phi_mode {
            _ if !self.spec.base.has_dispersion() => None,
            PhiMode::Fixed(phi) => Some(phi),
            PhiMode::Free => self.params.last().map(|v| v.exp()),
        }
    }

    /// Overall fitted probability of a zero, averaged over observations.
    pub fn mean_fitted_zero(&self) -> f64 {
        self.fitted_pit0.iter().sum::<f64>() / self.n_obs() as f64
    }
}

/// `-loglik · scale` as a minimisation target.
struct NegLoglik<'a> {
    model: &'a BoundModel,
    scale: f64,
}

impl Objective for NegLoglik<'_> {
    fn value(&self, x: &[f64]) -> Option<f64> {
        self.model.loglik(x).ok().map(|v| -v * self.scale)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let g = self.model.gradient(x).ok()?;
        Some(g.into_iter().map(|v| -v * self.scale).collect())
    }
}

/// Poisson log-linear coefficients by Newton-Raphson with step halving.
pub fn poisson_start(model: &BoundModel) -> Vec<f64> {
    let x = &model.x;
    let y: Vec<f64> = model.y.iter().map(|&v| v as f64).collect();
    let targets: Vec<f64> = y.iter().map(|v| (v + 0.5).ln()).collect();
    let mut beta = x.least_squares(&targets);
    let ll = |b: &[f64]| -> f64 {
        (0..x.nrows)
            .map(|i| {
                let eta = x.dot(i, b).clamp(-50.0, 50.0);
                y[i] * eta - eta.exp()
            })
            .sum()
    };
    let mut current = ll(&beta);
    let xm = x.to_matrix();
    for _ in 0..50 {
        let lam: Vec<f64> = (0..x.nrows).map(|i| x.dot(i, &beta).clamp(-50.0, 50.0).exp()).collect();
        let resid = nalgebra::DVector::from_iterator(x.nrows, (0..x.nrows).map(|i| y[i] - lam[i]));
        let grad = xm.tr_mul(&resid);
        let mut weighted = xm.clone();
        for (i, mut row) in weighted.row_iter_mut().enumerate() {
            row *= lam[i];
        }
        let info = xm.tr_mul(&weighted);
        let Some(chol) = info.cholesky() else { break };
        let step = chol.solve(&grad);
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| (b + t * s).max(-30.0)).collect();
            let v = ll(&trial);
            if v >= current {
                moved = v > current;
                beta = trial;
                current = v;
                break;
            }
            t *= 0.5;
        }
        if !moved || step.amax() * t < 1e-10 {
            break;
        }
    }
    beta
}

fn default_start(model: &BoundModel, data: &CountDataset) -> Vec<f64> {
    let mut start = poisson_start(model);
    if let Some(z) = &model.z {
        let n = data.len() as f64;
        let gamma = match model.spec.zi {
            ZiType::A => z.constant_fit(logit(data.zero_proportion().max(0.5 / n))),
            ZiType::C if model.spec.inflation_only_c() => z.constant_fit(0.1f64.ln()),
            _ => vec![0.0; z.ncols],
        };
        start.extend(gamma);
    }
    if model.spec.free_phi() {
        start.push(0.5f64.ln());
    }
    start
}

/// Lower loglik first; ties within 1e-9 go to the lexicographically smaller vector.
fn better(a: &Minimum, b: &Minimum, scale: f64) -> bool {
    let (la, lb) = (-a.value / scale, -b.value / scale);
    if (la - lb).abs() > 1e-9 {
        return la > lb;
    }
    a.x.iter().zip(&b.x).find(|(u, v)| u != v).is_some_and(|(u, v)| u < v)
}

fn check_fit_data(spec: &ModelSpec, data: &CountDataset) -> Result<Vec<String>> {
    if data.is_empty() {
        return Err(Error::Data("empty dataset".into()));
    }
    if data.y.iter().all(|&y| y == 0) {
        return Err(Error::Data("all counts are zero; the mean parameters are not identified".into()));
    }
    let mut warnings = Vec::new();
    if spec.zi == ZiType::A {
        if let Some(cell) = &data.cell {
            let cat = data.categorical(cell)?;
            let mut positives = vec![0usize; cat.levels.len()];
            for (&c, &y) in cat.codes.iter().zip(&data.y) {
                positives[c] += usize::from(y > 0);
            }
            for (level, &p) in cat.levels.iter().zip(&positives) {
                if p == 0 {
                    warnings.push(format!("separation: cell '{level}' has only zeros"));
                }
            }
        }
    }
    Ok(warnings)
}

/// Maximum-likelihood fit by BFGS with a Newton polish and seeded restarts.
///
/// A fit that never meets the convergence test is returned inside
/// [`Error::NotConverged`].
pub fn fit_mle(spec: &ModelSpec, data: &CountDataset, options: &FitOptions) -> Result<FitResult> {
    let mut warnings = check_fit_data(spec, data)?;
    let model = spec.bind(data)?;
    let scale = 1.0 / data.len() as f64;
    let obj = NegLoglik { model: &model, scale };
    let opts = MinimizeOptions {
        max_iterations: options.max_iterations,
        gradient_tol: options.gradient_tol,
        ..MinimizeOptions::default()
    };
    let run = |x0: &[f64]| bfgs(&obj, x0, &opts).map(|m| newton_polish(&obj, m, &opts, 8));

    let start = default_start(&model, data);
    let mut best = run(&start);
    let total_iters = |b: &Option<Minimum>| b.as_ref().map_or(0, |m| m.iterations);
    let mut iterations = total_iters(&best);
    if !best.as_ref().is_some_and(|m| m.converged) {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        for _ in 0..3 {
            let x0: Vec<f64> = start.iter().map(|v| v + rng.random_range(-0.5..0.5) * v.abs().max(1.0)).collect();
            let Some(candidate) = run(&x0) else { continue };
            iterations += candidate.iterations;
            best = match best {
                Some(b) if !better(&candidate, &b, scale) => Some(b),
                _ => Some(candidate),
            };
        }
    }
    let best = best.ok_or_else(|| Error::NonFinite("loglik is not finite at any starting point".into()))?;

    let infeasible = model.infeasible_rows(&best.x)?;
    if infeasible > 0 {
        warnings.push(format!("{infeasible} rows at the Type C deflation limit (fitted zero probability clamped)"));
    }
    let mut fit = FitResult::build(&model, best.x, iterations, best.converged, warnings)?;
    if fit.converged {
        match vcov_for(&model, &fit.params) {
            Ok(v) => fit.vcov = Some(v),
            Err(e) => fit.warnings.push(format!("no covariance: {e}")),
        }
        Ok(fit)
    } else {
        Err(Error::NotConverged(Box::new(fit)))
    }
}

fn vcov_for(model: &BoundModel, params: &[f64]) -> Result<Vec<Vec<f64>>> {
    let obj = NegLoglik { model, scale: 1.0 };
    let hess = numeric_hessian(&obj, params, 1e-4)
        .ok_or_else(|| Error::SingularHessian("Hessian is not finite".into()))?;
    let eig = hess.clone().symmetric_eigen();
    let max = eig.eigenvalues.amax();
    let min = eig.eigenvalues.min();
    if min.is_nan() || min <= 1e-9 * max {
        return Err(Error::SingularHessian(format!("eigenvalues span [{min:e}, {max:e}]")));
    }
    let inv = hess
        .cholesky()
        .ok_or_else(|| Error::SingularHessian("Hessian is not positive definite".into()))?
        .inverse();
    let n = params.len();
    Ok((0..n).map(|i| (0..n).map(|j| 0.5 * (inv[(i, j)] + inv[(j, i)])).collect()).collect())
}

/// Inverse of the central-difference Hessian of `-loglik` at the fitted parameters.
pub fn vcov_numeric(fit: &FitResult, data: &CountDataset) -> Result<Vec<Vec<f64>>> {
    if !fit.converged {
        return Err(Error::InvalidParameter("covariance requires a converged fit".into()));
    }
    let model = fit.spec.bind(data)?;
    vcov_for(&model, &fit.params)
}

/// Closed-form Type A (hurdle) fit with constant `γ` and one Poisson mean per
/// level of `cell_factor`.
pub fn fit_type_a_twopart(data: &CountDataset, cell_factor: &str) -> Result<FitResult> {
    let mut warnings = check_fit_data(&ModelSpec::new(Family::Poisson, ZiType::A), data)?;
    let spec = ModelSpec::new(Family::Poisson, ZiType::A).mean_design(DesignSpec::cells(cell_factor));
    let model = spec.bind(data)?;
    let cat = data.categorical(cell_factor)?;
    let mut sum = vec![0.0; cat.levels.len()];
    let mut positives = vec![0usize; cat.levels.len()];
    for (&c, &y) in cat.codes.iter().zip(&data.y) {
        if y > 0 {
            sum[c] += y as f64;
            positives[c] += 1;
        }
    }
    let mut params = Vec::with_capacity(cat.levels.len() + 1);
    for (k, level) in cat.levels.iter().enumerate() {
        if positives[k] == 0 {
            return Err(Error::Data(format!("cell '{level}' has no positive counts")));
        }
        let trunc_mean = sum[k] / positives[k] as f64;
        let lambda = if trunc_mean - 1.0 < 1e-12 {
            warnings.push(format!("cell '{level}': all positive counts are 1, lambda set to its lower limit"));
            1e-10
        } else {
            brent(|l| truncated_poisson_mean(l) - trunc_mean, 1e-12, trunc_mean, 1e-14, 200)?
        };
        params.push(lambda.ln());
    }
    let p0 = data.zero_proportion();
    let gamma = if p0 == 0.0 {
        warnings.push("no zeros: gamma clamped at the lower zero-probability limit".into());
        logit(PIT0_FLOOR)
    } else {
        logit(p0)
    };
    params.push(gamma);
    let mut fit = FitResult::build(&model, params, 0, true, warnings)?;
    match vcov_for(&model, &fit.params) {
        Ok(v) => fit.vcov = Some(v),
        Err(e) => fit.warnings.push(format!("no covariance: {e}")),
    }
    Ok(fit)
}

/// The three NB-quad dispersion estimates for an iid sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiEstimates {
    /// `(s² - ȳ) / ȳ²`.
    pub moment: f64,
    /// Solves `(1 + φȳ)^{-1/φ} = p₀`; `None` when `p₀ <= e^{-ȳ}`.
    pub zero_frequency: Option<f64>,
    pub mle: f64,
}

impl PhiEstimates {
    /// Whether the MLE lies between the other two.
    pub fn mle_between(&self) -> Option<bool> {
        let z = self.zero_frequency?;
        let (lo, hi) = if z < self.moment { (z, self.moment) } else { (self.moment, z) };
        Some(lo <= self.mle && self.mle <= hi)
    }
}

pub fn phi_moment(data: &CountDataset) -> Result<f64> {
    let n = data.len();
    if n < 2 {
        return Err(Error::Data("need at least two observations".into()));
    }
    let mean = data.mean();
    if mean <= 0.0 {
        return Err(Error::Data("mean is zero".into()));
    }
    let var = data.y.iter().map(|&y| (y as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((var - mean) / (mean * mean))
}

pub fn phi_zero_frequency(data: &CountDataset) -> Result<f64> {
    let mean = data.mean();
    if mean <= 0.0 {
        return Err(Error::Data("mean is zero".into()));
    }
    match_dispersion_through_point(Family::NbQuad, (-mean).exp(), data.zero_proportion())
}

pub fn phi_estimates(data: &CountDataset, options: &FitOptions) -> Result<PhiEstimates> {
    let fit = fit_mle(&ModelSpec::new(Family::NbQuad, ZiType::None), data, options)?;
    Ok(PhiEstimates {
        moment: phi_moment(data)?,
        zero_frequency: phi_zero_frequency(data).ok(),
        mle: fit.phi().unwrap_or(0.0),
    })
}
