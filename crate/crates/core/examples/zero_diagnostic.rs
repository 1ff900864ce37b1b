//! Bin rows by fitted zero probability and compare with the observed zero
//! fraction. A plain Poisson fit to the rooting data misses badly; Type D does not.

use zicount::diagnostics::{empirical_zero_diagnostic, zero_diagnostic_csv};
use zicount::*;

fn main() -> Result<()> {
    let data = trajan();
    for zi in [ZiType::None, ZiType::D] {
        let spec = ModelSpec::new(Family::Poisson, zi).mean_design(DesignSpec::cells("photoperiod:bap"));
        let fit = fit_mle(&spec, &data, &FitOptions::default())?;
        let d = empirical_zero_diagnostic(&fit, &data, 4)?;
        println!("{}: max |z| {:.2}, beyond 3 sigma: {}", spec.label(), d.max_abs_z, d.excess_beyond_3sigma());
        print!("{}", zero_diagnostic_csv(&d));
    }
    Ok(())
}
