//! Rank the seven reference models on the rooting data by AIC.

use zicount::cli::reference_specs;
use zicount::diagnostics::{aic_csv, aic_table};
use zicount::*;

fn main() -> Result<()> {
    let data = trajan();
    let fits = reference_specs("photoperiod:bap")
        .iter()
        .map(|spec| fit_mle(spec, &data, &FitOptions::default()))
        .collect::<Result<Vec<_>>>()?;
    print!("{}", aic_csv(&aic_table(&fits)));
    Ok(())
}
