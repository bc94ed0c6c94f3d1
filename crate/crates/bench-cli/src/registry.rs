//! Built-in dataset registry: the 16 LIBSVM datasets the benchmark tables
//! cover, with canonical download URLs and per-dataset defaults.
//!
//! Datasets that ship an official test file use it; the rest are split
//! 80/20 with the run seed. Checksums are recorded on first download into a
//! `.sha256` sidecar next to the cached file and verified on every
//! subsequent resolve; entries may additionally pin an expected digest here.

use gsa_core::models::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Binary,
    Multiclass,
}

impl TaskKind {
    pub fn default_model(self) -> ModelKind {
        match self {
            TaskKind::Binary => ModelKind::Logistic,
            TaskKind::Multiclass => ModelKind::Softmax,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DatasetSpec {
    pub name: &'static str,
    pub url: &'static str,
    /// Official test-split URL, when the benchmark protocol uses one.
    pub test_url: Option<&'static str>,
    pub kind: TaskKind,
    /// Pinned sha256 of the decompressed train file, when known.
    pub sha256: Option<&'static str>,
    pub test_sha256: Option<&'static str>,
    /// Excluded from default fetching/benchmark sweeps; enabled by `--full`.
    pub large: bool,
    pub default_passes: u32,
    /// Pass indices reported in the reference tables.
    pub eval_passes: &'static [u32],
}

macro_rules! ds {
    ($name:literal, $url:expr, $test:expr, $kind:expr, $large:expr, $passes:expr, $evals:expr) => {
        DatasetSpec {
            name: $name,
            url: $url,
            test_url: $test,
            kind: $kind,
            sha256: None,
            test_sha256: None,
            large: $large,
            default_passes: $passes,
            eval_passes: $evals,
        }
    };
}

pub const REGISTRY: &[DatasetSpec] = &[
    ds!(
        "w1a",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/w1a",
        Some("https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/w1a.t"),
        TaskKind::Binary,
        false,
        5,
        &[1, 2, 5]
    ),
    ds!(
        "breast-cancer_scale",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/breast-cancer_scale",
        None,
        TaskKind::Binary,
        false,
        5,
        &[1, 2, 5]
    ),
    ds!(
        "a9a",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/a9a",
        None,
        TaskKind::Binary,
        false,
        5,
        &[1, 2, 5]
    ),
    ds!(
        "madelon",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/madelon",
        Some("https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/madelon.t"),
        TaskKind::Binary,
        false,
        20,
        &[1, 5, 20]
    ),
    ds!(
        "cod-rna",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/cod-rna",
        None,
        TaskKind::Binary,
        false,
        5,
        &[1, 2, 5]
    ),
    ds!(
        "gisette_scale",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/gisette_scale.bz2",
        Some("https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/gisette_scale.t.bz2"),
        TaskKind::Binary,
        false,
        5,
        &[1, 2, 5]
    ),
    ds!(
        "url",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/url_combined.bz2",
        None,
        TaskKind::Binary,
        true,
        5,
        &[1, 2, 5]
    ),
    ds!(
        "mnist.scale",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/mnist.scale.bz2",
        None,
        TaskKind::Multiclass,
        true,
        5,
        &[1, 2, 5]
    ),
    ds!(
        "news20.scale",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/news20.scale.bz2",
        Some("https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/news20.t.scale.bz2"),
        TaskKind::Multiclass,
        true,
        5,
        &[1, 2, 5]
    ),
    ds!(
        "aloi.scale",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/aloi.scale.bz2",
        None,
        TaskKind::Multiclass,
        true,
        5,
        &[1, 2, 5]
    ),
    ds!(
        "letter.scale",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/letter.scale",
        Some("https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/letter.scale.t"),
        TaskKind::Multiclass,
        false,
        10,
        &[1, 2, 10]
    ),
    ds!(
        "dna.scale",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/dna.scale",
        Some("https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/dna.scale.t"),
        TaskKind::Multiclass,
        false,
        10,
        &[1, 2, 10]
    ),
    ds!(
        "sector.scale",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/sector/sector.scale.bz2",
        Some("https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/sector/sector.t.scale.bz2"),
        TaskKind::Multiclass,
        true,
        10,
        &[1, 2, 10]
    ),
    ds!(
        "usps",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/usps.bz2",
        Some("https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/usps.t.bz2"),
        TaskKind::Multiclass,
        false,
        5,
        &[1, 2, 5]
    ),
    ds!(
        "protein",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/protein.bz2",
        Some("https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/protein.t.bz2"),
        TaskKind::Multiclass,
        false,
        5,
        &[1, 2, 5]
    ),
    ds!(
        "rcv1.multiclass",
        "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/rcv1_train.multiclass.bz2",
        Some("https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/rcv1_test.multiclass.bz2"),
        TaskKind::Multiclass,
        true,
        5,
        &[1, 2, 5]
    ),
];

pub fn lookup(name: &str) -> Option<&'static DatasetSpec> {
    REGISTRY.iter().find(|d| d.name == name)
}
