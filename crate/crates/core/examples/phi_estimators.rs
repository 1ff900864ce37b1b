//! Moment, zero-frequency and maximum-likelihood estimates of the NB-quad
//! dispersion on zero-inflated Poisson data.

use zicount::fit::phi_estimates;
use zicount::*;

fn main() -> Result<()> {
    // 30% structural zeros: gamma = ln 0.7, theta = ln(-gamma)
    let theta = (-(0.7f64.ln())).ln();
    let spec = ModelSpec::new(Family::Poisson, ZiType::C);
    for seed in 1..=3 {
        let data = simulate(&SimPlan::new(spec.clone(), vec![2f64.ln(), theta], 5000, seed))?;
        let e = phi_estimates(&data, &FitOptions::default())?;
        println!(
            "seed {seed}: moment {:.4}  zero-frequency {}  MLE {:.4}  MLE between: {:?}",
            e.moment,
            e.zero_frequency.map_or("n/a".into(), |z| format!("{z:.4}")),
            e.mle,
            e.mle_between()
        );
    }
    Ok(())
}
