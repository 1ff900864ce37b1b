//! Design-matrix descriptions for the mean (`log λ`) and zero-alteration (`γ`)
//! linear predictors.

use serde::{Deserialize, Serialize};

use crate::data::{Column, CountDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "column", rename_all = "lowercase")]
pub enum Term {
    /// Treatment-coded factor; the first level is the reference.
    Factor(String),
    Numeric(String),
    /// One indicator per level (cell-means coding). Use without an intercept.
    Cells(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub intercept: bool,
    pub terms: Vec<Term>,
}

impl Default for DesignSpec {
    fn default() -> Self {
        Self::constant()
    }
}

impl DesignSpec {
    /// Intercept only.
    pub fn constant() -> Self {
        Self { intercept: true, terms: Vec::new() }
    }

    /// Saturated over the levels of `column` (which may be an `a:b` interaction).
    pub fn cells(column: impl Into<String>) -> Self {
        Self { intercept: false, terms: vec![Term::Cells(column.into())] }
    }

    pub fn factor(mut self, column: impl Into<String>) -> Self {
        self.terms.push(Term::Factor(column.into()));
        self
    }

    pub fn numeric(mut self, column: impl Into<String>) -> Self {
        self.terms.push(Term::Numeric(column.into()));
        self
    }

    pub fn build(&self, data: &CountDataset) -> Result<DesignMatrix> {
        let n = data.len();
        let mut names = Vec::new();
        let mut cols: Vec<Vec<f64>> = Vec::new();
        if self.intercept {
            names.push("(Intercept)".to_string());
            cols.push(vec![1.0; n]);
        }
        for term in &self.terms {
            match term {
                Term::Numeric(name) => {
                    names.push(name.clone());
                    cols.push(data.numeric(name)?.to_vec());
                }
                Term::Factor(name) | Term::Cells(name) => {
                    if let (Term::Factor(_), Some(Column::Numeric(_))) = (term, data.column(name)) {
                        return Err(Error::Data(format!("factor '{name}' is numeric; use a numeric term")));
                    }
                    let cat = data.categorical(name)?;
                    let skip = usize::from(matches!(term, Term::Factor(_)));
                    for (lvl, label) in cat.levels.iter().enumerate().skip(skip) {
                        names.push(format!("{name}[{label}]"));
                        cols.push(cat.codes.iter().map(|&c| f64::from(u8::from(c == lvl))).collect());
                    }
                }
            }
        }
        let ncols = cols.len();
        let mut values = vec![0.0; n * ncols];
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                values[i * ncols + j] = v;
            }
        }
        Ok(DesignMatrix { names, nrows: n, ncols, values })
    }
}

/// Dense row-major design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    pub nrows: usize,
    pub ncols: usize,
    values: Vec<f64>,
}

impl DesignMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    /// `x_iᵀ β`.
    pub fn dot(&self, i: usize, beta: &[f64]) -> f64 {
        self.row(i).iter().zip(beta).map(|(x, b)| x * b).sum()
    }

    pub fn predictor(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.nrows).map(|i| self.dot(i, beta)).collect()
    }

    pub fn to_matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.nrows, self.ncols, &self.values)
    }

    /// Least-squares coefficients reproducing the constant predictor `value`.
    pub fn constant_fit(&self, value: f64) -> Vec<f64> {
        self.least_squares(&vec![value; self.nrows])
    }

    /// Minimum-norm least-squares coefficients for `targets`.
    pub fn least_squares(&self, targets: &[f64]) -> Vec<f64> {
        if self.ncols == 0 {
            return Vec::new();
        }
        let rhs = nalgebra::DVector::from_column_slice(targets);
        match self.to_matrix().svd(true, true).solve(&rhs, 1e-10) {
            Ok(b) => b.iter().copied().collect(),
            Err(_) => vec![0.0; self.ncols],
        }
    }
}
