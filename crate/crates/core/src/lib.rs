//! Zero-altered count regression: Poisson and negative binomial bases with four
//! explicit zero-alteration links, maximum-likelihood fitting, simulation and
//! fitted-versus-observed diagnostics.
//!
//! ```
//! use zicount::{fit_mle, trajan, DesignSpec, Family, FitOptions, ModelSpec, ZiType};
//!
//! let data = trajan();
//! let spec = ModelSpec::new(Family::Poisson, ZiType::D).mean_design(DesignSpec::cells("photoperiod:bap"));
//! let fit = fit_mle(&spec, &data, &FitOptions::default()).unwrap();
//! assert!((fit.mean_fitted_zero() - data.zero_proportion()).abs() < 1e-6);
//! ```

pub mod cli;
pub mod data;
pub mod design;
pub mod diagnostics;
pub mod dist;
pub mod error;
pub mod fit;
pub mod likelihood;
pub mod optim;
pub mod roots;
pub mod simulate;
pub mod special;
pub mod zi;

pub use data::{cell_summaries, read_csv, trajan, write_csv, CellSummaries, CellSummary, Column, CountDataset, CsvSchema};
pub use design::{DesignMatrix, DesignSpec, Term};
pub use dist::{base_logpmf, base_variance, base_zero_prob, BaseModel, Family};
pub use error::{Error, Result};
pub use fit::{fit_mle, fit_type_a_twopart, vcov_numeric, FitOptions, FitResult};
pub use likelihood::{loglik, loglik_decomposed, score_numeric, typed_naturals, ModelSpec, PhiMode};
pub use simulate::{simulate, SimPlan};
pub use zi::{
    implicit_zi_curve, match_dispersion_through_point, renormalizer, zi_gamma_from_point, zi_logpmf, zi_mean,
    zi_zero_prob, ZiModel, ZiType,
};
