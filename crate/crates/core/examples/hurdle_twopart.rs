//! The Type A (hurdle) model splits into a binary part and a zero-truncated
//! part, so it can be fitted cell by cell without an optimiser. Both routes
//! give the same maximum.

use zicount::*;

fn main() -> Result<()> {
    let data = trajan();
    let direct = fit_type_a_twopart(&data, "photoperiod:bap")?;
    let spec = ModelSpec::new(Family::Poisson, ZiType::A).mean_design(DesignSpec::cells("photoperiod:bap"));
    let mle = fit_mle(&spec, &data, &FitOptions::default())?;
    println!("two-part loglik {:.8}", direct.loglik_value);
    println!("BFGS loglik     {:.8}", mle.loglik_value);
    println!("fitted zero proportion {:.6}", mle.mean_fitted_zero());
    for w in &direct.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
