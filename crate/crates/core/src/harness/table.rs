//! Result tables: named numeric/string columns, CSV round trip, and the
//! order-invariant summary.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// One table cell; method labels are the only string-valued column.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Str(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Str(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableMeta {
    pub spec_hash: String,
    pub artifact_version: String,
}

/// Per-seed rows of named columns plus run metadata. Timestamps are kept
/// out of the table on purpose: two runs of the same spec must serialize
/// to identical bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: TableMeta,
}

impl ResultTable {
    pub fn new(columns: Vec<String>, meta: TableMeta) -> Self {
        Self { columns, rows: Vec::new(), meta }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column, in row order.
    pub fn numeric_column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        let mut out = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            match &row[idx] {
                Cell::Num(v) => out.push(*v),
                Cell::Str(_) => return None,
            }
        }
        Some(out)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# spec_hash={}\n", self.meta.spec_hash));
        out.push_str(&format!("# artifact_version={}\n", self.meta.artifact_version));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut spec_hash = String::new();
        let mut artifact_version = String::new();
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# ") {
                if let Some(v) = rest.strip_prefix("spec_hash=") {
                    spec_hash = v.to_string();
                } else if let Some(v) = rest.strip_prefix("artifact_version=") {
                    artifact_version = v.to_string();
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            match &columns {
                None => columns = Some(line.split(',').map(str::to_string).collect()),
                Some(cols) => {
                    let cells: Vec<Cell> = line
                        .split(',')
                        .map(|field| match field.parse::<f64>() {
                            Ok(v) => Cell::Num(v),
                            Err(_) => Cell::Str(field.to_string()),
                        })
                        .collect();
                    if cells.len() != cols.len() {
                        return Err(Error::InvalidConfig(format!(
                            "CSV row has {} fields, header has {}",
                            cells.len(),
                            cols.len()
                        )));
                    }
                    rows.push(cells);
                }
            }
        }
        let columns =
            columns.ok_or_else(|| Error::InvalidConfig("CSV has no header row".into()))?;
        Ok(Self { columns, rows, meta: TableMeta { spec_hash, artifact_version } })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub n_finite: usize,
    pub n_nonfinite: usize,
}

/// Summary document: overall per-column statistics, per-method column
/// means when a `method` column is present, delivery success rates, and
/// the brute-force-vs-greedy gap when both selectors are in the table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub spec_hash: String,
    pub artifact_version: String,
    pub n_rows: usize,
    pub columns: BTreeMap<String, ColumnStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_method_means: Option<BTreeMap<String, BTreeMap<String, f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_rates: Option<BTreeMap<String, f64>>,
    /// Mean of (BF - TA) / BF over seeds, when both methods are present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_relative_gap_bf_ta: Option<f64>,
}

/// Sorted-order statistics so permuting rows cannot change a single bit
/// of the output.
fn stats_of(values: &[f64]) -> ColumnStats {
    let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let n_nonfinite = values.len() - finite.len();
    finite.sort_by(f64::total_cmp);
    let n = finite.len();
    if n == 0 {
        return ColumnStats {
            mean: f64::NAN,
            median: f64::NAN,
            std: f64::NAN,
            min: f64::NAN,
            max: f64::NAN,
            n_finite: 0,
            n_nonfinite,
        };
    }
    let mean = finite.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 { finite[n / 2] } else { 0.5 * (finite[n / 2 - 1] + finite[n / 2]) };
    let std = if n > 1 {
        (finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    ColumnStats { mean, median, std, min: finite[0], max: finite[n - 1], n_finite: n, n_nonfinite }
}

pub fn summarize(table: &ResultTable) -> Result<Summary> {
    if table.rows.is_empty() {
        return Err(Error::ContractViolation("cannot summarize an empty table".into()));
    }
    let method_idx = table.column_index("method");

    let mut columns = BTreeMap::new();
    let mut per_method: BTreeMap<String, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for (ci, name) in table.columns.iter().enumerate() {
        let mut values = Vec::with_capacity(table.rows.len());
        let mut numeric = true;
        for row in &table.rows {
            match &row[ci] {
                Cell::Num(v) => values.push(*v),
                Cell::Str(_) => {
                    numeric = false;
                    break;
                }
            }
        }
        if !numeric {
            continue;
        }
        columns.insert(name.clone(), stats_of(&values));
        if let Some(mi) = method_idx {
            for row in &table.rows {
                let Cell::Str(method) = &row[mi] else { continue };
                if let Cell::Num(v) = &row[ci] {
                    per_method
                        .entry(method.clone())
                        .or_default()
                        .entry(name.clone())
                        .or_default()
                        .push(*v);
                }
            }
        }
    }

    let per_method_means = method_idx.map(|_| {
        per_method
            .into_iter()
            .map(|(method, cols)| {
                let means = cols
                    .into_iter()
                    .map(|(name, vals)| (name, stats_of(&vals).mean))
                    .collect();
                (method, means)
            })
            .collect::<BTreeMap<String, BTreeMap<String, f64>>>()
    });

    let success_rates = per_method_means.as_ref().and_then(|pm| {
        let rates: BTreeMap<String, f64> = pm
            .iter()
            .filter_map(|(m, cols)| cols.get("success_rate").map(|v| (m.clone(), *v)))
            .collect();
        (!rates.is_empty()).then_some(rates)
    });

    // gap between the exhaustive oracle and the greedy selector, per seed
    let mean_relative_gap_bf_ta = (|| {
        let mi = method_idx?;
        let si = table.column_index("seed")?;
        let oi = table.column_index("scalar_objective")?;
        let mut bf: BTreeMap<u64, f64> = BTreeMap::new();
        let mut ta: BTreeMap<u64, f64> = BTreeMap::new();
        for row in &table.rows {
            let (Cell::Str(m), Cell::Num(seed), Cell::Num(obj)) = (&row[mi], &row[si], &row[oi])
            else {
                continue;
            };
            let seed = *seed as u64;
            match m.as_str() {
                "brute_force" => {
                    bf.insert(seed, *obj);
                }
                "topology_aware" => {
                    ta.insert(seed, *obj);
                }
                _ => {}
            }
        }
        if bf.is_empty() {
            return None;
        }
        let mut gaps: Vec<f64> = bf
            .iter()
            .filter_map(|(seed, b)| ta.get(seed).map(|t| if *b > 0.0 { (b - t) / b } else { 0.0 }))
            .collect();
        gaps.sort_by(f64::total_cmp);
        (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64)
    })();

    Ok(Summary {
        spec_hash: table.meta.spec_hash.clone(),
        artifact_version: table.meta.artifact_version.clone(),
        n_rows: table.rows.len(),
        columns,
        per_method_means,
        success_rates,
        mean_relative_gap_bf_ta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> ResultTable {
        let mut t = ResultTable::new(
            vec!["seed".into(), "method".into(), "value".into()],
            TableMeta { spec_hash: "abc".into(), artifact_version: "0.1.0".into() },
        );
        t.push_row(vec![Cell::Num(0.0), Cell::Str("x".into()), Cell::Num(1.0)]);
        t.push_row(vec![Cell::Num(0.0), Cell::Str("y".into()), Cell::Num(3.0)]);
        t.push_row(vec![Cell::Num(1.0), Cell::Str("x".into()), Cell::Num(2.0)]);
        t.push_row(vec![Cell::Num(1.0), Cell::Str("y".into()), Cell::Num(5.0)]);
        t
    }

    #[test]
    fn csv_round_trip_preserves_everything() {
        let t = sample_table();
        let csv = t.to_csv();
        let back = ResultTable::from_csv(&csv).unwrap();
        assert_eq!(t, back);
        assert_eq!(back.meta.spec_hash, "abc");
    }

    #[test]
    fn single_row_summary_is_degenerate() {
        let mut t = ResultTable::new(
            vec!["value".into()],
            TableMeta { spec_hash: String::new(), artifact_version: String::new() },
        );
        t.push_row(vec![Cell::Num(7.0)]);
        let s = summarize(&t).unwrap();
        let c = &s.columns["value"];
        assert_eq!(c.mean, 7.0);
        assert_eq!(c.std, 0.0);
        assert_eq!(c.min, 7.0);
        assert_eq!(c.max, 7.0);
    }

    #[test]
    fn summary_is_row_order_invariant() {
        let t = sample_table();
        let mut permuted = t.clone();
        permuted.rows.reverse();
        let a = serde_json::to_string(&summarize(&t).unwrap()).unwrap();
        let b = serde_json::to_string(&summarize(&permuted).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn per_method_means_group_correctly() {
        let s = summarize(&sample_table()).unwrap();
        let pm = s.per_method_means.unwrap();
        assert_eq!(pm["x"]["value"], 1.5);
        assert_eq!(pm["y"]["value"], 4.0);
    }

    #[test]
    fn nonfinite_values_are_counted_not_poisoning() {
        let mut t = ResultTable::new(
            vec!["v".into()],
            TableMeta { spec_hash: String::new(), artifact_version: String::new() },
        );
        t.push_row(vec![Cell::Num(1.0)]);
        t.push_row(vec![Cell::Num(f64::NEG_INFINITY)]);
        t.push_row(vec![Cell::Num(3.0)]);
        let s = summarize(&t).unwrap();
        let c = &s.columns["v"];
        assert_eq!(c.mean, 2.0);
        assert_eq!(c.n_nonfinite, 1);
    }

    #[test]
    fn empty_table_is_rejected() {
        let t = ResultTable::new(
            vec!["v".into()],
            TableMeta { spec_hash: String::new(), artifact_version: String::new() },
        );
        assert!(summarize(&t).is_err());
    }

    #[test]
    fn delivery_shaped_tables_report_success_rates() {
        let mut t = ResultTable::new(
            vec!["seed".into(), "method".into(), "success_rate".into()],
            TableMeta { spec_hash: String::new(), artifact_version: String::new() },
        );
        t.push_row(vec![Cell::Num(0.0), Cell::Str("greedy_local".into()), Cell::Num(0.05)]);
        t.push_row(vec![Cell::Num(0.0), Cell::Str("ta_dijkstra".into()), Cell::Num(0.40)]);
        t.push_row(vec![Cell::Num(1.0), Cell::Str("greedy_local".into()), Cell::Num(0.07)]);
        t.push_row(vec![Cell::Num(1.0), Cell::Str("ta_dijkstra".into()), Cell::Num(0.44)]);
        let s = summarize(&t).unwrap();
        let rates = s.success_rates.unwrap();
        assert!((rates["greedy_local"] - 0.06).abs() < 1e-12);
        assert!((rates["ta_dijkstra"] - 0.42).abs() < 1e-12);
        // the oracle gap only appears when both selectors are present
        assert!(s.mean_relative_gap_bf_ta.is_none());
    }
}
