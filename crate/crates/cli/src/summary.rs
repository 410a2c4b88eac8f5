//! Joins the per-experiment outputs into one comparison table.
//!
//! Expected files in the input directory:
//! `fourier.csv` (from `qft --table`), `search.csv` (from `baseline`) and
//! `walk_scaling.csv` (from `walk --mode scaling`).

use std::collections::BTreeMap;
use std::path::Path;

use wavefactor::fit::fit_with_burn_in;

use crate::output::{Document, Value};
use crate::CliError;

pub const FOURIER_FILE: &str = "fourier.csv";
pub const SEARCH_FILE: &str = "search.csv";
pub const WALK_FILE: &str = "walk_scaling.csv";

/// Rows keyed by column name; empty cells are absent.
type Table = Vec<BTreeMap<String, String>>;

fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?
        .clone();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        rows.push(
            headers
                .iter()
                .zip(record.iter())
                .filter(|(_, v)| !v.is_empty())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect(),
        );
    }
    Ok(rows)
}

fn number(row: &BTreeMap<String, String>, column: &str, file: &str) -> Result<Option<f64>, CliError> {
    row.get(column)
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| CliError::validation(format!("{file}: column {column} holds `{v}`, not a number")))
        })
        .transpose()
}

fn required(row: &BTreeMap<String, String>, column: &str, file: &str) -> Result<f64, CliError> {
    number(row, column, file)?.ok_or_else(|| CliError::validation(format!("{file}: row without {column}")))
}

struct Rows(Vec<Vec<Value>>);

impl Rows {
    fn push(&mut self, claim: &str, key: String, quantity: &str, value: Value, unit: &str, source: String) {
        self.0.push(vec![claim.into(), key.into(), quantity.into(), value, unit.into(), source.into()]);
    }
}

pub fn summary_table(input: &Path, burn_in: f64) -> Result<Document, CliError> {
    let mut doc = Document::new("summary");
    doc.config.push(("input", input.display().to_string().into()));
    doc.config.push(("burn_in", burn_in.into()));

    let missing: Vec<String> = [FOURIER_FILE, SEARCH_FILE, WALK_FILE]
        .iter()
        .filter(|f| !input.join(f).is_file())
        .map(|f| f.to_string())
        .collect();
    if !missing.is_empty() {
        let mut err = CliError::new(
            "missing_input",
            format!("missing experiment outputs in {}: {}", input.display(), missing.join(", ")),
        );
        err.missing = missing;
        return Err(err);
    }

    let mut rows = Rows(Vec::new());

    for row in read_table(&input.join(FOURIER_FILE))? {
        let n = required(&row, "n", FOURIER_FILE)?;
        let source = format!("{FOURIER_FILE}#n={n}");
        for (quantity, unit) in [("naive_ops", "multiply_adds"), ("fft_ops", "butterflies"), ("qft_gates", "gates")] {
            let v = required(&row, quantity, FOURIER_FILE)?;
            rows.push("fourier", format!("n={n}"), quantity, v.into(), unit, source.clone());
        }
    }

    for row in read_table(&input.join(SEARCH_FILE))? {
        let n = required(&row, "N", SEARCH_FILE)?;
        let source = format!("{SEARCH_FILE}#N={n}");
        for quantity in ["random", "sorted", "grover", "hybrid"] {
            let v = required(&row, quantity, SEARCH_FILE)?;
            rows.push("search", format!("N={n}"), quantity, v.into(), "oracle_queries", source.clone());
        }
    }

    let mut by_dim: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for row in read_table(&input.join(WALK_FILE))? {
        let d = required(&row, "d", WALK_FILE)? as u64;
        let side = required(&row, "L", WALK_FILE)?;
        let n = required(&row, "N", WALK_FILE)?;
        let key = format!("d={d},L={side}");
        let source = format!("{WALK_FILE}#{key}");
        let t_eff = number(&row, "T_eff", WALK_FILE)?;
        rows.push("walk", key.clone(), "T_eff", t_eff.into(), "walk_steps", source.clone());
        rows.push("walk", key, "T_eff_over_sqrt_N", t_eff.map(|t| t / n.sqrt()).into(), "walk_steps", source);
        let points = by_dim.entry(d).or_default();
        if let Some(t) = t_eff {
            points.push((n, t));
        }
    }
    for (d, points) in &by_dim {
        let source = format!("{WALK_FILE}#d={d}");
        let fit = fit_with_burn_in(points, burn_in).ok();
        rows.push("walk", format!("d={d}"), "exponent", fit.map(|f| f.exponent).into(), "", source.clone());
        rows.push("walk", format!("d={d}"), "r_squared", fit.map(|f| f.r_squared).into(), "", source.clone());
        let mut sorted = points.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ratios: Vec<f64> = sorted.iter().map(|(n, t)| t / n.sqrt()).collect();
        let increasing = ratios.len() >= 2 && ratios.windows(2).all(|w| w[1] > w[0]);
        rows.push("walk", format!("d={d}"), "T_eff_over_sqrt_N_increasing", increasing.into(), "", source);
    }

    doc.columns = vec!["claim", "key", "quantity", "value", "unit", "source"];
    doc.rows = rows.0;
    Ok(doc)
}
