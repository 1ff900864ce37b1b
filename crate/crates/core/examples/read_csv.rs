//! Load a CSV with a schema, summarise the cells and write it back out.
//!
//! cargo run --example read_csv -- path/to/file.csv response cell

use zicount::*;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let data = match args.as_slice() {
        [path, response, cell] => read_csv(path, &CsvSchema::new(response).categorical([cell.as_str()]).cell(cell))?,
        _ => trajan(),
    };
    let cell = data.cell.clone().unwrap_or_else(|| "photoperiod:bap".into());
    let s = cell_summaries(&data, &cell)?;
    println!("{} rows, overall zero proportion {:.6}", s.n, s.overall_p0);
    for c in &s.cells {
        let tm = c.trunc_mean.map_or("-".into(), |m| format!("{m:.3}"));
        println!("{:<10} n={:<3} zeros={:<3} mean={:.3} positive mean={tm}", c.cell, c.n, c.n_zero, c.mean);
    }
    write_csv(&data, std::io::sink())?;
    Ok(())
}
