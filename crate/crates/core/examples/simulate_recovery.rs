//! Simulate from an NB-quad Type C regression and refit it.

use zicount::simulate::uniform_covariate;
use zicount::*;

fn main() -> Result<()> {
    let spec = ModelSpec::new(Family::NbQuad, ZiType::C).mean_design(DesignSpec::constant().numeric("x"));
    // mean: 0.5 + 0.6x; theta = ln 0.5 (gamma = -0.5); log phi = ln 0.4
    let truth = vec![0.5, 0.6, 0.5f64.ln(), 0.4f64.ln()];
    let template = uniform_covariate(5000, -1.0, 1.0, 3);
    let data = simulate(&SimPlan::new(spec.clone(), truth.clone(), 5000, 11).template(template))?;
    println!("n = {}, zero proportion {:.3}", data.len(), data.zero_proportion());

    let fit = fit_mle(&spec, &data, &FitOptions::default())?;
    let se = fit.std_errors().expect("covariance available");
    println!("{:<14} {:>8} {:>8} {:>7}", "param", "true", "est", "se");
    for i in 0..truth.len() {
        println!("{:<14} {:>8.4} {:>8.4} {:>7.4}", fit.param_names[i], truth[i], fit.params[i], se[i]);
    }
    Ok(())
}
