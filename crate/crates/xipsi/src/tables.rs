//! Reproduction of the two reference tables: per-family extremizers of the
//! gap ψ − ξ (table 1) and of the sum ξ + ψ (table 2), located by dense
//! parameter grid search.

use crate::families::ParametricFamily;
use crate::optimize::{grid_search_extremizer, ExtremizerRow, SearchFamily, SearchObjective};
use crate::Result;

/// A labelled table row; failed family evaluations are carried as errors so
/// the rest of the table can still be produced.
pub struct TableRow {
    pub family: &'static str,
    pub row: Result<ExtremizerRow>,
}

/// Families maximizing the gap ψ − ξ. Closed forms locate the Fréchet and
/// Gaussian rows; the Archimedean rows use an n×n measure grid.
pub fn table1(n: usize) -> Vec<TableRow> {
    use SearchFamily::*;
    use SearchObjective::MaxPsiMinusXi as Gap;
    let rows: Vec<(&'static str, SearchFamily, f64, f64, f64)> = vec![
        ("clayton", Parametric(ParametricFamily::Clayton), 1.2, 1.7, 0.005),
        ("frank", Parametric(ParametricFamily::Frank), 4.0, 5.0, 0.005),
        ("frechet", FrechetUpper, 0.0, 1.0, 0.002),
        ("gaussian", Parametric(ParametricFamily::Gaussian), 0.0, 0.998, 0.002),
        ("gumbel-hougaard", Parametric(ParametricFamily::Gumbel), 1.55, 2.05, 0.005),
        ("joe", Parametric(ParametricFamily::Joe), 1.9, 2.9, 0.005),
    ];
    rows.into_iter()
        .map(|(family, fam, lo, hi, step)| TableRow {
            family,
            row: grid_search_extremizer(fam, Gap, lo, hi, step, n),
        })
        .collect()
}

/// Families minimizing the sum ξ + ψ.
pub fn table2(n: usize) -> Vec<TableRow> {
    use SearchFamily::*;
    use SearchObjective::MinXiPlusPsi as Sum;
    let rows: Vec<(&'static str, SearchFamily, f64, f64, f64)> = vec![
        ("c_down", CDown, 0.0, 2.0, 0.002),
        ("strip_path", StripPath, 0.9, 1.6, 0.005),
        ("clayton", Parametric(ParametricFamily::Clayton), -0.7, -0.15, 0.004),
        ("frank", Parametric(ParametricFamily::Frank), -3.6, -2.0, 0.01),
        ("gaussian", Parametric(ParametricFamily::Gaussian), -0.998, -0.002, 0.002),
        ("gumbel-hougaard", Parametric(ParametricFamily::Gumbel), 1.0, 2.0, 0.01),
        ("joe", Parametric(ParametricFamily::Joe), 1.0, 2.0, 0.01),
        ("lower_frechet", FrechetLower, 0.0, 1.0, 0.002),
    ];
    rows.into_iter()
        .map(|(family, fam, lo, hi, step)| TableRow {
            family,
            row: grid_search_extremizer(fam, Sum, lo, hi, step, n),
        })
        .collect()
}

/// Renders rows as CSV (`family,parameter,xi,psi,value`); failed rows carry
/// the literal marker `error`.
pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("family,parameter,xi,psi,value\n");
    for r in rows {
        match &r.row {
            Ok(x) => out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6}\n",
                r.family, x.param, x.xi, x.psi, x.value
            )),
            Err(e) => out.push_str(&format!("{},error,error,error,error # {e}\n", r.family)),
        }
    }
    out
}

/// Renders rows as an aligned text table.
pub fn table_text(rows: &[TableRow], value_label: &str) -> String {
    let mut out = format!(
        "{:<16} {:>10} {:>9} {:>9} {:>9}\n",
        "family", "parameter", "xi", "psi", value_label
    );
    for r in rows {
        match &r.row {
            Ok(x) => out.push_str(&format!(
                "{:<16} {:>10.3} {:>9.3} {:>9.3} {:>9.3}\n",
                r.family, x.param, x.xi, x.psi, x.value
            )),
            Err(e) => out.push_str(&format!("{:<16} error ({e})\n", r.family)),
        }
    }
    out
}
