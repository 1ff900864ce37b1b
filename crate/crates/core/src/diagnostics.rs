//! Fitted-versus-observed tables, zero-probability curves, a binned check for
//! excess zeros, AIC tables, and SVG/CSV rendering of the curves.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::CountDataset;
use crate::dist::Family;
use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::zi::{implicit_zi_curve, zi_zero_prob, ZiType};

/// Per-cell comparison of sample and fitted quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFit {
    pub cell: String,
    pub n: usize,
    pub observed_mean: f64,
    pub fitted_mean: f64,
    pub observed_p0: f64,
    pub fitted_p0: f64,
    /// Base (unaltered) zero probability at the fitted mean parameter.
    pub fitted_pi0: f64,
}

pub fn fitted_vs_observed(fit: &FitResult, data: &CountDataset, cell_column: &str) -> Result<Vec<CellFit>> {
    if fit.n_obs() != data.len() {
        return Err(Error::DimensionMismatch { expected: data.len(), got: fit.n_obs() });
    }
    let cat = data.categorical(cell_column)?;
    let k = cat.levels.len();
    let mut acc = vec![[0.0f64; 5]; k];
    let mut counts = vec![0usize; k];
    for (i, &c) in cat.codes.iter().enumerate() {
        let a = &mut acc[c];
        a[0] += data.y[i] as f64;
        a[1] += fit.fitted_mu[i];
        a[2] += f64::from(u8::from(data.y[i] == 0));
        a[3] += fit.fitted_pit0[i];
        a[4] += fit.fitted_pi0[i];
        counts[c] += 1;
    }
    Ok(cat
        .levels
        .iter()
        .zip(acc.iter().zip(&counts))
        .map(|(cell, (a, &n))| {
            let m = n as f64;
            CellFit {
                cell: cell.clone(),
                n,
                observed_mean: a[0] / m,
                fitted_mean: a[1] / m,
                observed_p0: a[2] / m,
                fitted_p0: a[3] / m,
                fitted_pi0: a[4] / m,
            }
        })
        .collect())
}

pub fn cell_fit_csv(rows: &[CellFit]) -> String {
    let mut out = String::from("cell,n,observed_mean,fitted_mean,observed_p0,fitted_p0,fitted_pi0\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.cell, r.n, r.observed_mean, r.fitted_mean, r.observed_p0, r.fitted_p0, r.fitted_pi0
        );
    }
    out
}

/// Overlay points `(π₀(λ̂ᵏ), p₀ᵏ)` using the model's own fitted mean parameters.
pub fn overlay_points(fit: &FitResult, data: &CountDataset, cell_column: &str) -> Result<Vec<(f64, f64)>> {
    Ok(fitted_vs_observed(fit, data, cell_column)?.iter().map(|r| (r.fitted_pi0, r.observed_p0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub eps: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: 512, eps: 1e-4 }
    }
}

impl GridSpec {
    /// Evenly spaced values from `eps` to `1 - eps`.
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(Error::InvalidParameter("grid needs at least two points".into()));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::Domain(format!("grid eps must lie in (0, 0.5), got {}", self.eps)));
        }
        let span = 1.0 - 2.0 * self.eps;
        let last = (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.eps + span * i as f64 / last).collect())
    }
}

/// Which zero-probability curve to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum CurveModel {
    /// An alteration type with parameter `γ`.
    Explicit(ZiType),
    /// The zero probability implied by an over-dispersed base with parameter `φ`.
    Implicit(Family),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub label: String,
    pub grid: Vec<f64>,
    pub pit0: Vec<f64>,
    #[serde(default)]
    pub points: Vec<(f64, f64)>,
}

pub fn zero_curve(
    label: impl Into<String>,
    model: CurveModel,
    param: f64,
    grid: &GridSpec,
    points: Vec<(f64, f64)>,
) -> Result<CurveTable> {
    let grid = grid.values()?;
    let pit0 = grid
        .iter()
        .map(|&p| match model {
            CurveModel::Explicit(zi) => zi_zero_prob(zi, p, param),
            CurveModel::Implicit(Family::Poisson) => Ok(p),
            CurveModel::Implicit(family) => implicit_zi_curve(family, p, param),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveTable { label: label.into(), grid, pit0, points })
}

/// CSV with columns `pi0,pit0[,point_pi0,point_p0]`; point cells are blank
/// past the last overlay point.
pub fn curve_csv(table: &CurveTable) -> String {
    let with_points = !table.points.is_empty();
    let mut out = String::from(if with_points { "pi0,pit0,point_pi0,point_p0\n" } else { "pi0,pit0\n" });
    let rows = table.grid.len().max(table.points.len());
    for i in 0..rows {
        let cell = |v: Option<&f64>| v.map_or(String::new(), |x| format!("{x}"));
        let _ = write!(out, "{},{}", cell(table.grid.get(i)), cell(table.pit0.get(i)));
        if with_points {
            let p = table.points.get(i);
            let _ = write!(out, ",{},{}", cell(p.map(|p| &p.0)), cell(p.map(|p| &p.1)));
        }
        out.push('\n');
    }
    out
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const SIZE: f64 = 420.0;
const MARGIN: f64 = 50.0;

fn sx(v: f64) -> f64 {
    MARGIN + v * SIZE
}

fn sy(v: f64) -> f64 {
    MARGIN + (1.0 - v) * SIZE
}

fn svg_frame(out: &mut String, title: &str, xlabel: &str, ylabel: &str, legend_rows: usize) {
    let width = 2.0 * MARGIN + SIZE + 170.0;
    let height = (2.0 * MARGIN + SIZE).max(MARGIN + 20.0 * legend_rows as f64);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#, sx(0.5), MARGIN / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let v = k as f64 / 5.0;
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{v:.1}</text>"#, sx(v), sy(0.0) + 16.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#, sx(0.0) - 6.0, sy(v) + 4.0);
    }
    let _ = writeln!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbbbbb" stroke-dasharray="4 4"/>"##,
        sx(0.0),
        sy(0.0),
        sx(1.0),
        sy(1.0)
    );
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(0.5), sy(0.0) + 36.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        MARGIN - 34.0,
        sy(0.5),
        MARGIN - 34.0,
        sy(0.5),
        escape(ylabel)
    );
}

fn legend(out: &mut String, row: usize, colour: &str, label: &str) {
    let x = sx(1.0) + 16.0;
    let y = MARGIN + 10.0 + 20.0 * row as f64;
    let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{colour}" stroke-width="2"/>"#, x + 20.0);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 26.0, y + 4.0, escape(label));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// All curves on one unit-square panel, with their overlay points.
pub fn curves_svg(tables: &[CurveTable], title: &str) -> String {
    let mut out = String::new();
    svg_frame(&mut out, title, "base zero probability", "altered zero probability", tables.len());
    for (k, t) in tables.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = t.grid.iter().zip(&t.pit0).map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        for &(x, y) in &t.points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, sx(x), sy(y));
        }
        legend(&mut out, k, colour, &t.label);
    }
    out.push_str("</svg>\n");
    out
}

/// Fitted against observed values (one series per model) on the unit square
/// scaled by `upper`.
pub fn scatter_svg(series: &[(String, Vec<(f64, f64)>)], upper: f64, title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut out = String::new();
    svg_frame(&mut out, title, xlabel, ylabel, series.len());
    let scale = if upper > 0.0 { upper } else { 1.0 };
    if scale != 1.0 {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">axes scaled to {scale}</text>"#, sx(1.0), sy(0.0) + 36.0);
    }
    for (k, (label, pts)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        for &(x, y) in pts {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, sx(x / scale), sy(y / scale));
        }
        legend(&mut out, k, colour, label);
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroBin {
    /// Mean fitted zero probability of the rows in the bin.
    pub midpoint: f64,
    pub observed: f64,
    pub n: usize,
    /// Binomial standard error of the observed fraction under the fit.
    pub std_error: f64,
}

impl ZeroBin {
    pub fn z_score(&self) -> f64 {
        if self.std_error > 0.0 {
            (self.observed - self.midpoint) / self.std_error
        } else if self.observed == self.midpoint {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroDiagnostic {
    pub bins: Vec<ZeroBin>,
    pub max_abs_deviation: f64,
    pub max_abs_z: f64,
}

impl ZeroDiagnostic {
    /// Whether any bin departs from the unit line by more than three standard errors.
    pub fn excess_beyond_3sigma(&self) -> bool {
        self.max_abs_z > 3.0
    }
}

/// Rows sorted by fitted zero probability and cut into `bins` equal-count groups.
pub fn empirical_zero_diagnostic(fit: &FitResult, data: &CountDataset, bins: usize) -> Result<ZeroDiagnostic> {
    if bins < 2 {
        return Err(Error::InvalidParameter("need at least two bins".into()));
    }
    let n = data.len();
    if fit.n_obs() != n {
        return Err(Error::DimensionMismatch { expected: n, got: fit.n_obs() });
    }
    if n / bins < 5 {
        return Err(Error::Data(format!("{n} rows cannot fill {bins} bins with at least 5 each")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fit.fitted_pit0[a].total_cmp(&fit.fitted_pit0[b]).then(a.cmp(&b)));
    let mut out = Vec::with_capacity(bins);
    for b in 0..bins {
        let rows = &order[b * n / bins..(b + 1) * n / bins];
        let m = rows.len() as f64;
        let expected: f64 = rows.iter().map(|&i| fit.fitted_pit0[i]).sum::<f64>() / m;
        let var: f64 = rows.iter().map(|&i| fit.fitted_pit0[i] * (1.0 - fit.fitted_pit0[i])).sum::<f64>() / (m * m);
        let observed = rows.iter().filter(|&&i| data.y[i] == 0).count() as f64 / m;
        out.push(ZeroBin { midpoint: expected, observed, n: rows.len(), std_error: var.sqrt() });
    }
    let max_abs_deviation = out.iter().map(|b| (b.observed - b.midpoint).abs()).fold(0.0, f64::max);
    let max_abs_z = out.iter().map(|b| b.z_score().abs()).fold(0.0, f64::max);
    Ok(ZeroDiagnostic { bins: out, max_abs_deviation, max_abs_z })
}

pub fn zero_diagnostic_csv(d: &ZeroDiagnostic) -> String {
    let mut out = String::from("midpoint,observed,n,std_error,z\n");
    for b in &d.bins {
        let _ = writeln!(out, "{},{},{},{},{}", b.midpoint, b.observed, b.n, b.std_error, b.z_score());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AicRow {
    pub label: String,
    pub n_params: usize,
    pub loglik: f64,
    pub aic: f64,
    pub delta_aic: f64,
}

/// Fits ordered by AIC (stable for ties), with the gap to the best.
pub fn aic_table(fits: &[FitResult]) -> Vec<AicRow> {
    let mut rows: Vec<AicRow> = fits
        .iter()
        .map(|f| AicRow {
            label: f.spec.label(),
            n_params: f.params.len(),
            loglik: f.loglik_value,
            aic: f.aic,
            delta_aic: 0.0,
        })
        .collect();
    rows.sort_by(|a, b| a.aic.total_cmp(&b.aic));
    let best = rows.first().map_or(0.0, |r| r.aic);
    for r in &mut rows {
        r.delta_aic = r.aic - best;
    }
    rows
}

pub fn aic_csv(rows: &[AicRow]) -> String {
    let mut out = String::from("model,n_params,loglik,aic,delta_aic\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.label, r.n_params, r.loglik, r.aic, r.delta_aic);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = GridSpec::default().values().unwrap();
        assert_eq!(g.len(), 512);
        assert_eq!(g[0], 1e-4);
        assert!((g[511] - (1.0 - 1e-4)).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(GridSpec { points: 1, eps: 1e-4 }.values().is_err());
        assert!(GridSpec { points: 10, eps: 0.0 }.values().is_err());
    }

    #[test]
    fn reference_curves() {
        let g = GridSpec::default();
        let a = zero_curve("A", CurveModel::Explicit(ZiType::A), -0.405, &g, vec![]).unwrap();
        assert!(a.pit0.iter().all(|p| (p - 0.4).abs() < 0.001));
        let none = zero_curve("none", CurveModel::Explicit(ZiType::None), 0.0, &g, vec![]).unwrap();
        assert!(none.grid.iter().zip(&none.pit0).all(|(x, y)| x == y));
        let q = zero_curve("q", CurveModel::Implicit(Family::NbQuad), 1.13, &GridSpec { points: 3, eps: 0.2 }, vec![]).unwrap();
        assert!((q.pit0[0] - 0.40).abs() < 0.005);
    }

    #[test]
    fn csv_layout() {
        let t = CurveTable { label: "x".into(), grid: vec![0.25, 0.75], pit0: vec![0.5, 0.8], points: vec![(0.1, 0.2)] };
        assert_eq!(curve_csv(&t), "pi0,pit0,point_pi0,point_p0\n0.25,0.5,0.1,0.2\n0.75,0.8,,\n");
        let t = CurveTable { points: vec![], ..t };
        assert_eq!(curve_csv(&t), "pi0,pit0\n0.25,0.5\n0.75,0.8\n");
    }
}
