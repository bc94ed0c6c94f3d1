//! LIBSVM-format ingestion, label normalization, and deterministic
//! train/test splitting and per-pass shuffling.
//!
//! # Format
//!
//! One sample per line: `<label> <index>:<value> <index>:<value> ...`
//! Indices in the file are 1-based and strictly increasing within a line;
//! they are mapped to 0-based on load. Anything from `#` to end of line is
//! a comment; blank lines are skipped. Values may use decimal or scientific
//! notation. A duplicated index within a line is an error rather than
//! last-wins, since it usually signals data corruption.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::linalg::SparseVec;
use crate::rng::{stream_rng, STREAM_SPLIT};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("empty dataset: no samples found")]
    Empty,
    #[error("degenerate dataset: need at least 2 distinct labels, found {0}")]
    TooFewLabels(usize),
    #[error("regression target {0:?} is not a finite number")]
    BadTarget(String),
    #[error("test fraction must lie strictly inside (0, 1), got {0}")]
    BadFraction(f64),
    #[error("split would leave the {0} set empty")]
    EmptySplit(&'static str),
    #[error(
        "bzip2 input is not supported by the loader; decompress {0} first (e.g. with bunzip2)"
    )]
    Bzip2(String),
}

fn parse_err(line: usize, reason: impl Into<String>) -> DataError {
    DataError::Parse { line, reason: reason.into() }
}

/// Whether raw labels are normalized to class indices or parsed as real targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Task {
    #[default]
    Classification,
    Regression,
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub add_bias: bool,
    pub task: Task,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { add_bias: true, task: Task::Classification }
    }
}

/// One training instance. For classification `target` mirrors `label` as a
/// real; for regression `label` is always 0 and `target` holds the value.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: SparseVec,
    pub label: usize,
    pub target: f64,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub n_features: usize,
    /// Number of classes; exactly 1 for regression targets.
    pub n_classes: usize,
    /// Raw text label -> class index; empty for regression.
    pub label_map: BTreeMap<String, usize>,
    pub has_bias: bool,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn task(&self) -> Task {
        if self.n_classes == 1 {
            Task::Regression
        } else {
            Task::Classification
        }
    }

    /// Inverse of the label map, indexed by class.
    pub fn class_names(&self) -> Vec<&str> {
        let mut names = vec![""; self.n_classes];
        for (raw, &idx) in &self.label_map {
            names[idx] = raw.as_str();
        }
        names
    }

    /// Renders the samples back to LIBSVM text (1-based indices, raw labels).
    /// The bias column, when present, is stripped so the output re-parses to
    /// the same samples.
    pub fn to_libsvm_string(&self) -> String {
        let names = self.class_names();
        let bias_index = if self.has_bias { Some(self.n_features - 1) } else { None };
        let mut out = String::new();
        for s in &self.samples {
            match self.task() {
                Task::Classification => out.push_str(names[s.label]),
                Task::Regression => {
                    let _ = write!(out, "{}", s.target);
                }
            }
            for &(i, v) in s.features.entries() {
                if Some(i) == bias_index {
                    continue;
                }
                let _ = write!(out, " {}:{}", i + 1, v);
            }
            out.push('\n');
        }
        out
    }
}

struct RawLine {
    label: String,
    entries: Vec<(usize, f64)>,
}

fn parse_lines<R: BufRead>(reader: R) -> Result<Vec<RawLine>, DataError> {
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let mut tokens = content.split_whitespace();
        let label = match tokens.next() {
            Some(t) => t.to_string(),
            None => continue, // blank or comment-only line
        };
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (idx_str, val_str) = tok.split_once(':').ok_or_else(|| {
                parse_err(lineno, format!("malformed pair {tok:?}, expected index:value"))
            })?;
            let file_index: usize = idx_str
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid feature index {idx_str:?}")))?;
            if file_index == 0 {
                return Err(parse_err(lineno, "feature indices are 1-based; found index 0"));
            }
            let value: f64 = val_str
                .parse()
                .map_err(|_| parse_err(lineno, format!("non-numeric feature value {val_str:?}")))?;
            if !value.is_finite() {
                return Err(parse_err(lineno, format!("non-finite feature value {val_str:?}")));
            }
            let index = file_index - 1;
            if let Some(&(prev, _)) = entries.last() {
                if index <= prev {
                    return Err(parse_err(
                        lineno,
                        format!(
                            "indices must be strictly increasing; {} follows {}",
                            file_index,
                            prev + 1
                        ),
                    ));
                }
            }
            entries.push((index, value));
        }
        rows.push(RawLine { label, entries });
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    Ok(rows)
}

/// Maps distinct raw labels to class indices `0..L-1`.
///
/// When every label parses as a finite number the ordering is numeric
/// (so `{-1,+1}` maps to `{-1:0, +1:1}`), otherwise lexicographic.
pub fn normalize_labels<S: AsRef<str>>(raw: &[S]) -> Result<BTreeMap<String, usize>, DataError> {
    let distinct: BTreeSet<&str> = raw.iter().map(|s| s.as_ref()).collect();
    if distinct.len() < 2 {
        return Err(DataError::TooFewLabels(distinct.len()));
    }
    let mut ordered: Vec<&str> = distinct.into_iter().collect();
    let numeric: Option<Vec<f64>> =
        ordered.iter().map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite())).collect();
    if let Some(values) = numeric {
        let mut keyed: Vec<(f64, &str)> = values.into_iter().zip(ordered).collect();
        keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(b.1)));
        ordered = keyed.into_iter().map(|(_, s)| s).collect();
    }
    Ok(ordered.into_iter().enumerate().map(|(i, s)| (s.to_string(), i)).collect())
}

/// Parses LIBSVM text from a reader.
///
/// `n_features` is one past the maximum 0-based index seen, plus one more
/// when `add_bias` appends the constant-1 intercept column at the end.
pub fn parse_libsvm<R: BufRead>(reader: R, opts: &ParseOptions) -> Result<Dataset, DataError> {
    let rows = parse_lines(reader)?;
    build_dataset(rows, opts)
}

fn max_base_index(rows: &[RawLine]) -> usize {
    rows.iter().flat_map(|r| r.entries.last().map(|&(i, _)| i + 1)).max().unwrap_or(0)
}

fn resolve_labels(
    rows: &[RawLine],
    task: Task,
) -> Result<(BTreeMap<String, usize>, usize), DataError> {
    match task {
        Task::Classification => {
            let raws: Vec<&str> = rows.iter().map(|r| r.label.as_str()).collect();
            let map = normalize_labels(&raws)?;
            let n = map.len();
            Ok((map, n))
        }
        Task::Regression => Ok((BTreeMap::new(), 1)),
    }
}

fn assemble(
    rows: Vec<RawLine>,
    n_features: usize,
    label_map: &BTreeMap<String, usize>,
    n_classes: usize,
    opts: &ParseOptions,
) -> Result<Dataset, DataError> {
    let mut samples = Vec::with_capacity(rows.len());
    for row in rows {
        let (label, target) = match opts.task {
            Task::Classification => {
                let label = label_map[&row.label];
                (label, label as f64)
            }
            Task::Regression => {
                let target: f64 = row
                    .label
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| DataError::BadTarget(row.label.clone()))?;
                (0, target)
            }
        };
        let mut entries = row.entries;
        if opts.add_bias {
            entries.push((n_features - 1, 1.0));
        }
        // Entries are strictly increasing, finite, and in range by parse-time
        // validation, so this cannot fail.
        let features = SparseVec::new(entries, n_features).expect("validated entries");
        samples.push(Sample { features, label, target });
    }
    Ok(Dataset {
        samples,
        n_features,
        n_classes,
        label_map: label_map.clone(),
        has_bias: opts.add_bias,
    })
}

fn build_dataset(rows: Vec<RawLine>, opts: &ParseOptions) -> Result<Dataset, DataError> {
    let n_features = max_base_index(&rows) + usize::from(opts.add_bias);
    let (label_map, n_classes) = resolve_labels(&rows, opts.task)?;
    assemble(rows, n_features, &label_map, n_classes, opts)
}

/// Opens a LIBSVM file, transparently gunzipping `.gz` paths and rejecting
/// `.bz2` with a pointer to decompress first.
fn open_reader(path: &Path) -> Result<BufReader<Box<dyn Read>>, DataError> {
    let name = path.to_string_lossy().to_string();
    if name.ends_with(".bz2") {
        return Err(DataError::Bzip2(name));
    }
    let file = File::open(path)?;
    let reader: Box<dyn Read> = if name.ends_with(".gz") {
        Box::new(flate2::read::GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(BufReader::new(reader))
}

/// Loads a LIBSVM file from disk, transparently gunzipping `.gz` paths.
/// `.bz2` paths are rejected with a pointer to decompress them first.
pub fn load_libsvm_path(path: &Path, opts: &ParseOptions) -> Result<Dataset, DataError> {
    parse_libsvm(open_reader(path)?, opts)
}

/// Loads a train/test file pair with a shared feature space and label map.
///
/// Feature counts are unified to the maximum of the two files before the
/// bias column is appended, and class indices come from the union of labels,
/// so weights learned on the train side apply to the test side unchanged.
pub fn load_libsvm_pair(
    train_path: &Path,
    test_path: &Path,
    opts: &ParseOptions,
) -> Result<(Dataset, Dataset), DataError> {
    let train_rows = parse_lines(open_reader(train_path)?)?;
    let test_rows = parse_lines(open_reader(test_path)?)?;

    let base_features = max_base_index(&train_rows).max(max_base_index(&test_rows));
    let n_features = base_features + usize::from(opts.add_bias);

    let (label_map, n_classes) = {
        let combined: Vec<&str> =
            train_rows.iter().chain(test_rows.iter()).map(|r| r.label.as_str()).collect();
        match opts.task {
            Task::Classification => {
                let map = normalize_labels(&combined)?;
                let n = map.len();
                (map, n)
            }
            Task::Regression => (BTreeMap::new(), 1),
        }
    };

    let train = assemble(train_rows, n_features, &label_map, n_classes, opts)?;
    let test = assemble(test_rows, n_features, &label_map, n_classes, opts)?;
    Ok((train, test))
}

/// Deterministic train/test split: a seeded permutation of the sample
/// indices, the first `ceil(n * (1 - test_fraction))` of which become the
/// training set.
pub fn split_train_test(
    ds: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::BadFraction(test_fraction));
    }
    let n = ds.len();
    let n_train = ((n as f64) * (1.0 - test_fraction)).ceil() as usize;
    if n_train == 0 {
        return Err(DataError::EmptySplit("train"));
    }
    if n_train >= n {
        return Err(DataError::EmptySplit("test"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(seed, STREAM_SPLIT);
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let pick = |indices: &[usize]| Dataset {
        samples: indices.iter().map(|&i| ds.samples[i].clone()).collect(),
        n_features: ds.n_features,
        n_classes: ds.n_classes,
        label_map: ds.label_map.clone(),
        has_bias: ds.has_bias,
    };
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

/// Fisher-Yates permutation of `0..n` keyed on `(seed, epoch)`.
pub fn epoch_permutation(n: usize, seed: u64, epoch: u64) -> Vec<usize> {
    assert!(n >= 1, "permutation needs at least one element");
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(seed, epoch);
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    order
}
