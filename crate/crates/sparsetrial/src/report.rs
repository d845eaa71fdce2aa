//! Cross-validation reports as CSV, TSV or an aligned text table.
//!
//! Output depends only on accuracies and variant names, never on timings.

use std::fmt;
use std::str::FromStr;

use sparsetrial_core::pipeline::CvReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Tsv,
    Table,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "tsv" => Ok(Format::Tsv),
            "table" => Ok(Format::Table),
            _ => Err(format!("unknown report format `{s}` (csv, tsv, table)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
            Format::Table => "table",
        })
    }
}

/// Six decimals with trailing zeros dropped: `0.75`, `1`, `0.833333`.
fn acc(x: f64) -> String {
    let s = format!("{x:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn render(rows: &[Vec<String>], format: Format) -> String {
    let sep = match format {
        Format::Csv => ",",
        Format::Tsv => "\t",
        Format::Table => return table(rows),
    };
    let mut out = String::new();
    for r in rows {
        out.push_str(&r.join(sep));
        out.push('\n');
    }
    out
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(String::len)
                .max()
                .unwrap_or(0)
        })
        .collect();
    let rule: String = widths
        .iter()
        .map(|w| "-".repeat(*w))
        .collect::<Vec<_>>()
        .join("-+-");
    let mut out = String::new();
    for (i, r) in rows.iter().enumerate() {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
        if i == 0 {
            out.push_str(&rule);
            out.push('\n');
        }
    }
    out
}

/// One row per fold followed by a `mean` row.
pub fn emit_report(report: &CvReport, format: Format) -> String {
    let mut rows = vec![vec![
        "variant".to_string(),
        "fold".into(),
        "accuracy".into(),
    ]];
    let name = report.variant.name().to_string();
    for (i, a) in report.per_fold_accuracy.iter().enumerate() {
        rows.push(vec![name.clone(), (i + 1).to_string(), acc(*a)]);
    }
    rows.push(vec![name, "mean".into(), acc(report.mean_accuracy)]);
    render(&rows, format)
}

/// One row per variant with fold accuracies and the mean last.
pub fn emit_comparison(reports: &[CvReport], format: Format) -> String {
    let folds = reports
        .iter()
        .map(|r| r.per_fold_accuracy.len())
        .max()
        .unwrap_or(0);
    let mut header = vec!["method".to_string()];
    header.extend((1..=folds).map(|i| format!("fold{i}")));
    header.push("mean".into());
    let mut rows = vec![header];
    for r in reports {
        let mut row = vec![r.variant.name().to_string()];
        row.extend((0..folds).map(|i| {
            r.per_fold_accuracy
                .get(i)
                .map_or(String::new(), |a| acc(*a))
        }));
        row.push(acc(r.mean_accuracy));
        rows.push(row);
    }
    render(&rows, format)
}
