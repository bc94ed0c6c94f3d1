//! Report emission: the fixed-schema CSV and the appendix-style markdown
//! table with per-column best markers and the GSA-vs-best gap row.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::runner::{GridReport, MetricsRecord};

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("cannot emit a report from zero records")]
    Empty,
    #[error("CSV line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

pub const CSV_HEADER: &str =
    "dataset,optimizer,hyperparams,seed,pass,loss,precision,auc,elapsed_ms,diverged";

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Serializes records to the fixed CSV schema. Optional metrics render as
/// empty cells; floats use the shortest round-trip decimal form.
pub fn records_to_csv(records: &[MetricsRecord]) -> Result<String, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.dataset,
            r.optimizer,
            r.hyperparams,
            r.seed,
            r.pass,
            r.loss,
            opt_f64(r.precision),
            opt_f64(r.auc),
            r.elapsed_ms,
            r.diverged
        ));
    }
    Ok(out)
}

/// Parses the CSV schema back into records (round-trip inverse of
/// [`records_to_csv`] up to float re-rendering, which is exact).
pub fn parse_csv(text: &str) -> Result<Vec<MetricsRecord>, ReportError> {
    let mut lines = text.lines().enumerate();
    let (_, header) =
        lines.next().ok_or(ReportError::Csv { line: 1, reason: "missing header".into() })?;
    if header != CSV_HEADER {
        return Err(ReportError::Csv { line: 1, reason: format!("unexpected header {header:?}") });
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let err = |reason: String| ReportError::Csv { line: lineno, reason };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(err(format!("expected 10 fields, found {}", fields.len())));
        }
        let parse_f64 = |s: &str| s.parse::<f64>().map_err(|e| err(format!("{s:?}: {e}")));
        let parse_opt = |s: &str| -> Result<Option<f64>, ReportError> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse_f64(s).map(Some)
            }
        };
        records.push(MetricsRecord {
            dataset: fields[0].to_string(),
            optimizer: fields[1].to_string(),
            hyperparams: fields[2].to_string(),
            seed: fields[3].parse().map_err(|e| err(format!("seed: {e}")))?,
            pass: fields[4].parse().map_err(|e| err(format!("pass: {e}")))?,
            loss: parse_f64(fields[5])?,
            precision: parse_opt(fields[6])?,
            auc: parse_opt(fields[7])?,
            elapsed_ms: fields[8].parse().map_err(|e| err(format!("elapsed_ms: {e}")))?,
            diverged: fields[9].parse().map_err(|e| err(format!("diverged: {e}")))?,
        });
    }
    if records.is_empty() {
        return Err(ReportError::Empty);
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Metric {
    Loss,
    Precision,
    Auc,
}

impl Metric {
    fn label(self) -> &'static str {
        match self {
            Metric::Loss => "loss",
            Metric::Precision => "prec.",
            Metric::Auc => "auc",
        }
    }

    fn lower_is_better(self) -> bool {
        matches!(self, Metric::Loss)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Agg {
    sum: f64,
    sum_sq: f64,
    n: u32,
    any_diverged: bool,
}

impl Agg {
    fn push(&mut self, v: f64, diverged: bool) {
        if diverged || v.is_nan() {
            self.any_diverged = true;
            return;
        }
        self.sum += v;
        self.sum_sq += v * v;
        self.n += 1;
    }

    fn mean(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / f64::from(self.n))
    }

    /// Sample standard deviation (n - 1); 0 for a single observation.
    fn std(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = f64::from(self.n);
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        var.max(0.0).sqrt()
    }
}

struct Cell {
    optimizer: String,
    hyperparams: String,
    by_column: BTreeMap<(Metric, u32), Agg>,
}

fn collect_cells(records: &[MetricsRecord]) -> (Vec<Cell>, Vec<u32>, Vec<Metric>) {
    let mut cells: Vec<Cell> = Vec::new();
    let mut passes: Vec<u32> = Vec::new();
    let mut has_prec = false;
    let mut has_auc = false;
    for r in records {
        if !passes.contains(&r.pass) {
            passes.push(r.pass);
        }
        let key = (r.optimizer.clone(), r.hyperparams.clone());
        let cell =
            match cells.iter_mut().find(|c| (c.optimizer.clone(), c.hyperparams.clone()) == key) {
                Some(c) => c,
                None => {
                    cells.push(Cell {
                        optimizer: key.0,
                        hyperparams: key.1,
                        by_column: BTreeMap::new(),
                    });
                    cells.last_mut().unwrap()
                }
            };
        cell.by_column.entry((Metric::Loss, r.pass)).or_default().push(r.loss, r.diverged);
        if let Some(p) = r.precision {
            has_prec = true;
            cell.by_column.entry((Metric::Precision, r.pass)).or_default().push(p, r.diverged);
        }
        if let Some(a) = r.auc {
            has_auc = true;
            cell.by_column.entry((Metric::Auc, r.pass)).or_default().push(a, r.diverged);
        }
    }
    passes.sort_unstable();
    let mut metrics = vec![Metric::Loss];
    if has_prec {
        metrics.push(Metric::Precision);
    }
    if has_auc {
        metrics.push(Metric::Auc);
    }
    (cells, passes, metrics)
}

fn fmt_value(agg: &Agg) -> String {
    match agg.mean() {
        None => "nan".to_string(),
        Some(mean) => {
            if agg.n >= 2 {
                format!("{mean:.3}±{:.3}", agg.std())
            } else {
                format!("{mean:.3}")
            }
        }
    }
}

/// Appendix-style markdown: one row per optimizer/hyperparameter cell,
/// column groups metric x pass, the best value per column bolded, and a
/// final `Err(GSA-best)` row with the gap between GSA and the best other
/// cell per column.
pub fn grid_markdown(report: &GridReport) -> Result<String, ReportError> {
    if report.records.is_empty() {
        return Err(ReportError::Empty);
    }
    let (cells, passes, metrics) = collect_cells(&report.records);
    let columns: Vec<(Metric, u32)> =
        metrics.iter().flat_map(|&m| passes.iter().map(move |&p| (m, p))).collect();

    // Best cell per column (ignoring diverged/absent values).
    let mut best: BTreeMap<(Metric, u32), usize> = BTreeMap::new();
    for &(metric, pass) in &columns {
        let mut best_idx: Option<(usize, f64)> = None;
        for (idx, cell) in cells.iter().enumerate() {
            let Some(agg) = cell.by_column.get(&(metric, pass)) else { continue };
            let Some(mean) = agg.mean() else { continue };
            let better = match best_idx {
                None => true,
                Some((_, cur)) => {
                    if metric.lower_is_better() {
                        mean < cur
                    } else {
                        mean > cur
                    }
                }
            };
            if better {
                best_idx = Some((idx, mean));
            }
        }
        if let Some((idx, _)) = best_idx {
            best.insert((metric, pass), idx);
        }
    }

    let mut out = String::new();
    out.push_str(&format!("# {}\n\n", report.dataset));
    out.push_str("| Algo. | hyper-para. |");
    for &(metric, pass) in &columns {
        out.push_str(&format!(" {}@{} |", metric.label(), pass));
    }
    out.push('\n');
    out.push_str("|---|---|");
    for _ in &columns {
        out.push_str("---|");
    }
    out.push('\n');

    for (idx, cell) in cells.iter().enumerate() {
        let hyper = if cell.hyperparams.is_empty() { "/" } else { &cell.hyperparams };
        out.push_str(&format!("| {} | {} |", cell.optimizer, hyper));
        for &(metric, pass) in &columns {
            let text = match cell.by_column.get(&(metric, pass)) {
                Some(agg) => fmt_value(agg),
                None => String::from("/"),
            };
            if best.get(&(metric, pass)) == Some(&idx) {
                out.push_str(&format!(" **{text}** |"));
            } else {
                out.push_str(&format!(" {text} |"));
            }
        }
        out.push('\n');
    }

    // GSA-vs-best gap, mirroring the mean(Err) summary: GSA minus the best
    // non-GSA cell, per column.
    if let Some(gsa_idx) = cells.iter().position(|c| c.optimizer == "gsa") {
        if cells.len() > 1 {
            out.push_str("| Err(GSA-best) | |");
            for &(metric, pass) in &columns {
                let gsa_mean = cells[gsa_idx].by_column.get(&(metric, pass)).and_then(Agg::mean);
                let best_other = cells
                    .iter()
                    .enumerate()
                    .filter(|&(idx, _)| idx != gsa_idx)
                    .filter_map(|(_, c)| c.by_column.get(&(metric, pass)).and_then(Agg::mean))
                    .fold(None, |acc: Option<f64>, v| {
                        Some(match acc {
                            None => v,
                            Some(cur) => {
                                if metric.lower_is_better() {
                                    cur.min(v)
                                } else {
                                    cur.max(v)
                                }
                            }
                        })
                    });
                match (gsa_mean, best_other) {
                    (Some(g), Some(b)) => out.push_str(&format!(" {:+.3} |", g - b)),
                    _ => out.push_str(" / |"),
                }
            }
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(
        optimizer: &str,
        hyper: &str,
        seed: u64,
        pass: u32,
        loss: f64,
        prec: f64,
    ) -> MetricsRecord {
        MetricsRecord {
            dataset: "toy".into(),
            optimizer: optimizer.into(),
            hyperparams: hyper.into(),
            seed,
            pass,
            loss,
            precision: Some(prec),
            auc: Some(prec),
            elapsed_ms: 3,
            diverged: false,
        }
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![
            record("gsa", "", 1, 1, 0.125, 0.9),
            record("sgd", "r=0.1", 1, 1, 0.25, 0.8),
            MetricsRecord {
                dataset: "toy".into(),
                optimizer: "scsg".into(),
                hyperparams: "r=0.1;B=50".into(),
                seed: 2,
                pass: 2,
                loss: f64::NAN,
                precision: None,
                auc: None,
                elapsed_ms: 0,
                diverged: true,
            },
        ];
        let csv = records_to_csv(&records).unwrap();
        assert!(csv.starts_with(CSV_HEADER));
        let parsed = parse_csv(&csv).unwrap();
        assert_eq!(parsed.len(), 3);
        assert_eq!(parsed[0], records[0]);
        assert_eq!(parsed[1], records[1]);
        assert!(parsed[2].loss.is_nan() && parsed[2].diverged);
        assert_eq!(parsed[2].precision, None);
    }

    #[test]
    fn csv_rejects_empty_and_malformed() {
        assert_eq!(records_to_csv(&[]).unwrap_err(), ReportError::Empty);
        assert!(matches!(parse_csv("bogus header\n"), Err(ReportError::Csv { line: 1, .. })));
        let bad = format!("{CSV_HEADER}\nonly,three,fields\n");
        assert!(matches!(parse_csv(&bad), Err(ReportError::Csv { line: 2, .. })));
    }

    #[test]
    fn markdown_layout_three_cells() {
        let records = vec![
            record("gsa", "", 1, 1, 0.35, 0.91),
            record("sgd", "r=1", 1, 1, 0.30, 0.91),
            record("sgd", "r=0.1", 1, 1, 0.40, 0.85),
        ];
        let report = GridReport { dataset: "toy".into(), eval_passes: vec![1], records };
        let md = grid_markdown(&report).unwrap();

        let data_rows: Vec<&str> =
            md.lines().filter(|l| l.starts_with("| gsa") || l.starts_with("| sgd")).collect();
        assert_eq!(data_rows.len(), 3, "{md}");

        // exactly one bold best marker per column (split on '|' leaves a
        // leading empty cell, so metric columns start at index 3)
        for (col, metric) in [(3, "loss"), (4, "prec"), (5, "auc")] {
            let bolds = data_rows
                .iter()
                .filter(|row| {
                    let cells: Vec<&str> = row.split('|').collect();
                    cells[col].contains("**")
                })
                .count();
            assert_eq!(bolds, 1, "column {metric}: {md}");
        }

        // best loss is the sgd r=1 row; gsa wins precision tie-free columns
        assert!(md.contains("| sgd | r=1 | **0.300**"), "{md}");
        // err row: gsa loss minus best other = 0.35 - 0.30
        assert!(md.contains("Err(GSA-best)"), "{md}");
        assert!(md.contains("+0.050"), "{md}");
        // GSA never carries hyperparameters
        assert!(md.contains("| gsa | / |"), "{md}");
    }

    #[test]
    fn markdown_aggregates_repeats() {
        let records = vec![
            record("gsa", "", 1, 1, 0.30, 0.9),
            record("gsa", "", 2, 1, 0.40, 0.9),
            record("sgd", "r=1", 1, 1, 0.50, 0.8),
            record("sgd", "r=1", 2, 1, 0.60, 0.8),
        ];
        let report = GridReport { dataset: "toy".into(), eval_passes: vec![1], records };
        let md = grid_markdown(&report).unwrap();
        assert!(md.contains("0.350±0.071"), "{md}");
    }
}
