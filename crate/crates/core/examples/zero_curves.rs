//! Zero-probability curves for the four alteration types and the two negative
//! binomial variants, all forced through one (π₀, π̃₀) point.
//!
//! cargo run --example zero_curves -- 0.2 0.4

use zicount::cli::matched_curves;
use zicount::diagnostics::{curves_svg, GridSpec};

fn main() -> zicount::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (pi0, pit0) = match args.as_slice() {
        [a, b] => (*a, *b),
        _ => (0.2, 0.4),
    };
    let tables = matched_curves(pi0, pit0, &GridSpec::default())?;
    for t in &tables {
        let mid = t.grid.len() / 2;
        println!("{:<24} pit0({:.3}) = {:.4}", t.label, t.grid[mid], t.pit0[mid]);
    }
    std::fs::write("zero_curves.svg", curves_svg(&tables, &format!("matched at ({pi0}, {pit0})")))?;
    println!("wrote zero_curves.svg");
    Ok(())
}
