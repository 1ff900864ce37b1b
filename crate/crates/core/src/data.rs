//! Count datasets, CSV ingestion and per-cell summaries.
//!
//! CSV dialect: comma separated, UTF-8, header row required. The response
//! column must hold non-negative integers; every other column is a covariate.
//! A covariate is numeric when all of its values parse as `f64` and it is not
//! listed as categorical in the [`CsvSchema`]. Categorical levels keep their
//! order of first appearance.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    pub levels: Vec<String>,
    pub codes: Vec<usize>,
}

impl Categorical {
    /// Builds level codes from raw labels, levels in first-appearance order.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut levels = Vec::new();
        let mut codes = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            let code = *index.entry(l).or_insert_with(|| {
                levels.push(l.to_string());
                levels.len() - 1
            });
            codes.push(code);
        }
        Self { levels, codes }
    }

    pub fn label(&self, row: usize) -> &str {
        &self.levels[self.codes[row]]
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Categorical(Categorical),
    Numeric(Vec<f64>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Categorical(c) => c.len(),
            Column::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn value_string(&self, row: usize) -> String {
        match self {
            Column::Categorical(c) => c.label(row).to_string(),
            Column::Numeric(v) => v[row].to_string(),
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        match self {
            Column::Categorical(c) => {
                // keep the original level order, dropping levels that no longer occur
                let mut used = vec![false; c.levels.len()];
                for &r in rows {
                    used[c.codes[r]] = true;
                }
                let mut remap = vec![usize::MAX; c.levels.len()];
                let mut levels = Vec::new();
                for (k, level) in c.levels.iter().enumerate().filter(|(k, _)| used[*k]) {
                    remap[k] = levels.len();
                    levels.push(level.clone());
                }
                let codes = rows.iter().map(|&r| remap[c.codes[r]]).collect();
                Column::Categorical(Categorical { levels, codes })
            }
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
        }
    }
}

/// Response counts plus named covariate columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDataset {
    pub response: String,
    pub y: Vec<u64>,
    columns: Vec<(String, Column)>,
    /// Default cell column; may name an interaction such as `"photoperiod:bap"`.
    pub cell: Option<String>,
}

impl CountDataset {
    pub fn new(response: impl Into<String>, y: Vec<u64>) -> Self {
        Self { response: response.into(), y, columns: Vec::new(), cell: None }
    }

    pub fn with_column(mut self, name: impl Into<String>, column: Column) -> Result<Self> {
        self.push_column(name, column)?;
        Ok(self)
    }

    pub fn push_column(&mut self, name: impl Into<String>, column: Column) -> Result<()> {
        let name = name.into();
        if column.len() != self.y.len() {
            return Err(Error::Data(format!(
                "column '{name}' has {} rows, response has {}",
                column.len(),
                self.y.len()
            )));
        }
        if name == self.response || self.columns.iter().any(|(n, _)| *n == name) {
            return Err(Error::Data(format!("duplicate column '{name}'")));
        }
        self.columns.push((name, column));
        Ok(())
    }

    pub fn with_cell(mut self, cell: impl Into<String>) -> Self {
        self.cell = Some(cell.into());
        self
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &Column)> {
        self.columns.iter().map(|(n, c)| (n.as_str(), c))
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    /// A categorical view of `name`. `a:b` builds the interaction of `a` and `b`;
    /// numeric columns are treated as labels.
    pub fn categorical(&self, name: &str) -> Result<Categorical> {
        let parts: Vec<&str> = name.split(':').collect();
        let mut cols = Vec::with_capacity(parts.len());
        for p in &parts {
            cols.push(self.column(p).ok_or_else(|| Error::MissingColumn(p.to_string()))?);
        }
        if let [Column::Categorical(c)] = cols.as_slice() {
            return Ok(c.clone());
        }
        let labels: Vec<String> = (0..self.len())
            .map(|r| cols.iter().map(|c| c.value_string(r)).collect::<Vec<_>>().join(":"))
            .collect();
        Ok(Categorical::from_labels(&labels))
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match self.column(name) {
            Some(Column::Numeric(v)) => Ok(v),
            Some(Column::Categorical(_)) => {
                Err(Error::Data(format!("column '{name}' is categorical, expected numeric")))
            }
            None => Err(Error::MissingColumn(name.to_string())),
        }
    }

    /// Rows reordered/subset by `rows`. Categorical levels keep their order.
    pub fn select_rows(&self, rows: &[usize]) -> CountDataset {
        CountDataset {
            response: self.response.clone(),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            columns: self.columns.iter().map(|(n, c)| (n.clone(), c.select(rows))).collect(),
            cell: self.cell.clone(),
        }
    }

    /// Same covariates, new response.
    pub fn with_response(&self, y: Vec<u64>) -> Result<CountDataset> {
        if y.len() != self.len() {
            return Err(Error::Data(format!(
                "response has {} rows, dataset has {}",
                y.len(),
                self.len()
            )));
        }
        Ok(CountDataset { y, ..self.clone() })
    }

    pub fn mean(&self) -> f64 {
        self.y.iter().map(|&v| v as f64).sum::<f64>() / self.len() as f64
    }

    pub fn zero_proportion(&self) -> f64 {
        self.y.iter().filter(|&&v| v == 0).count() as f64 / self.len() as f64
    }
}

/// How to interpret the columns of a CSV file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub response: String,
    pub cell: Option<String>,
    /// Columns forced to be categorical even when every value is numeric.
    pub categorical: Vec<String>,
}

impl CsvSchema {
    pub fn new(response: impl Into<String>) -> Self {
        Self { response: response.into(), ..Default::default() }
    }

    pub fn cell(mut self, cell: impl Into<String>) -> Self {
        self.cell = Some(cell.into());
        self
    }

    pub fn categorical<I, S>(mut self, cols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.categorical.extend(cols.into_iter().map(Into::into));
        self
    }
}

pub fn read_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<CountDataset> {
    let file = std::fs::File::open(path)?;
    read_csv_from(file, schema)
}

pub fn read_csv_from<R: Read>(reader: R, schema: &CsvSchema) -> Result<CountDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let resp_idx = headers
        .iter()
        .position(|h| *h == schema.response)
        .ok_or_else(|| Error::MissingColumn(schema.response.clone()))?;

    let mut y = Vec::new();
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != headers.len() {
            return Err(Error::Parse {
                row: line,
                column: String::new(),
                message: format!("expected {} fields, found {}", headers.len(), rec.len()),
            });
        }
        let cell = &rec[resp_idx];
        let value = match cell.parse::<u64>() {
            Ok(v) => v,
            Err(_) => {
                let message = match cell.parse::<f64>() {
                    Ok(v) if v < 0.0 => format!("negative count {cell}"),
                    _ => format!("'{cell}' is not a non-negative integer count"),
                };
                return Err(Error::Parse { row: line, column: schema.response.clone(), message });
            }
        };
        y.push(value);
        for (i, field) in rec.iter().enumerate() {
            if i != resp_idx {
                raw[i].push(field.to_string());
            }
        }
    }

    let mut data = CountDataset::new(schema.response.clone(), y);
    for (i, name) in headers.iter().enumerate() {
        if i == resp_idx {
            continue;
        }
        let values = std::mem::take(&mut raw[i]);
        let forced = schema.categorical.iter().any(|c| c == name);
        let parsed: Option<Vec<f64>> = if forced {
            None
        } else {
            values.iter().map(|v| v.parse::<f64>().ok()).collect()
        };
        let col = match parsed {
            Some(v) => Column::Numeric(v),
            None => Column::Categorical(Categorical::from_labels(&values)),
        };
        data.push_column(name.clone(), col)?;
    }
    for c in &schema.categorical {
        if data.column(c).is_none() {
            return Err(Error::MissingColumn(c.clone()));
        }
    }
    if let Some(cell) = &schema.cell {
        data.categorical(cell)?;
        data.cell = Some(cell.clone());
    }
    Ok(data)
}

/// Writes `data` in the same dialect [`read_csv`] accepts.
pub fn write_csv<W: Write>(data: &CountDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![data.response.clone()];
    header.extend(data.columns.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    for r in 0..data.len() {
        let mut rec = vec![data.y[r].to_string()];
        rec.extend(data.columns.iter().map(|(_, c)| c.value_string(r)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

const TRAJAN_CSV: &str = include_str!("../data/trajan.csv");

/// The embedded Trajan apple rooting data, with cell `photoperiod:bap`.
/// See `data/TRAJAN.md` for provenance.
pub fn trajan() -> CountDataset {
    let schema = CsvSchema::new("roots").categorical(["photoperiod", "bap"]).cell("photoperiod:bap");
    read_csv_from(TRAJAN_CSV.as_bytes(), &schema).expect("embedded fixture parses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: String,
    pub n: usize,
    pub n_zero: usize,
    pub mean: f64,
    pub zero_prop: f64,
    /// Mean of the positive counts; absent when the cell is all zeros.
    pub trunc_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummaries {
    pub cells: Vec<CellSummary>,
    pub n: usize,
    pub n_zero: usize,
    pub overall_p0: f64,
}

impl CellSummaries {
    pub fn get(&self, cell: &str) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.cell == cell)
    }
}

pub fn cell_summaries(data: &CountDataset, cell_column: &str) -> Result<CellSummaries> {
    let cat = data.categorical(cell_column)?;
    let k = cat.levels.len();
    let mut n = vec![0usize; k];
    let mut nz = vec![0usize; k];
    let mut sum = vec![0u64; k];
    for (r, &code) in cat.codes.iter().enumerate() {
        n[code] += 1;
        sum[code] += data.y[r];
        if data.y[r] == 0 {
            nz[code] += 1;
        }
    }
    let cells = (0..k)
        .map(|c| CellSummary {
            cell: cat.levels[c].clone(),
            n: n[c],
            n_zero: nz[c],
            mean: sum[c] as f64 / n[c] as f64,
            zero_prop: nz[c] as f64 / n[c] as f64,
            trunc_mean: (nz[c] < n[c]).then(|| sum[c] as f64 / (n[c] - nz[c]) as f64),
        })
        .collect();
    let total_zero: usize = nz.iter().sum();
    Ok(CellSummaries {
        cells,
        n: data.len(),
        n_zero: total_zero,
        overall_p0: total_zero as f64 / data.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_file_round_trip() {
        let text = "y,group,x\n0,a,1.5\n3,b,2\n1,a,-0.25\n";
        let schema = CsvSchema::new("y");
        let d = read_csv_from(text.as_bytes(), &schema).unwrap();
        assert_eq!(d.y, vec![0, 3, 1]);
        assert_eq!(d.numeric("x").unwrap(), &[1.5, 2.0, -0.25]);
        let g = d.categorical("group").unwrap();
        assert_eq!(g.levels, vec!["a", "b"]);
        let mut out = Vec::new();
        write_csv(&d, &mut out).unwrap();
        let back = read_csv_from(out.as_slice(), &schema).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn fractional_response_is_located() {
        let text = "y,x\n1,0\n2.5,1\n";
        match read_csv_from(text.as_bytes(), &CsvSchema::new("y")) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "y");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_response_rejected() {
        let text = "y\n1\n-2\n";
        let err = read_csv_from(text.as_bytes(), &CsvSchema::new("y")).unwrap_err();
        assert!(err.to_string().contains("negative"), "{err}");
    }

    #[test]
    fn missing_columns() {
        let text = "y,x\n1,0\n";
        assert!(matches!(
            read_csv_from(text.as_bytes(), &CsvSchema::new("z")),
            Err(Error::MissingColumn(_))
        ));
        assert!(read_csv_from(text.as_bytes(), &CsvSchema::new("y").cell("g")).is_err());
    }

    #[test]
    fn trajan_shape() {
        let d = trajan();
        assert_eq!(d.len(), 270);
        let s = cell_summaries(&d, d.cell.as_deref().unwrap()).unwrap();
        assert_eq!(s.cells.len(), 8);
        assert!((s.overall_p0 - 0.237).abs() < 0.002);
    }

    #[test]
    fn all_positive_cell() {
        let d = CountDataset::new("y", vec![1, 2, 3, 6])
            .with_column("g", Column::Categorical(Categorical::from_labels(&["x"; 4])))
            .unwrap();
        let s = cell_summaries(&d, "g").unwrap();
        assert_eq!(s.cells[0].zero_prop, 0.0);
        assert_eq!(s.cells[0].trunc_mean, Some(s.cells[0].mean));
        assert!(cell_summaries(&d, "h").is_err());
    }

    #[test]
    fn interaction_levels() {
        let d = CountDataset::new("y", vec![0, 1, 2, 3])
            .with_column("a", Column::Categorical(Categorical::from_labels(&["p", "p", "q", "q"])))
            .unwrap()
            .with_column("b", Column::Numeric(vec![1.0, 2.0, 1.0, 2.0]))
            .unwrap();
        let c = d.categorical("a:b").unwrap();
        assert_eq!(c.levels, vec!["p:1", "p:2", "q:1", "q:2"]);
    }
}
