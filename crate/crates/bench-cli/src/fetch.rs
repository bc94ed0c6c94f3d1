//! Dataset download and cache management.
//!
//! Files land in the cache directory under their decompressed name
//! (`.gz`/`.bz2` archives are unpacked during download). A `<file>.sha256`
//! sidecar records the digest of the stored content; every later resolve
//! re-verifies it, and a registry-pinned digest, when present, is checked
//! as well. A cached file whose digest no longer matches is refused.
//!
//! The HTTP client honors the standard `HTTPS_PROXY`/`HTTP_PROXY`
//! environment variables; `GSA_BENCH_CACHE` overrides the cache location.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::registry::{lookup, DatasetSpec};

pub const CACHE_ENV: &str = "GSA_BENCH_CACHE";

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("unknown dataset {0:?}; see `gsa-bench fetch --list`")]
    UnknownDataset(String),
    #[error("dataset file {0} is not cached and downloads are disabled (--offline)")]
    NotCached(PathBuf),
    #[error(
        "checksum mismatch for {path}: expected {expected}, got {got}; refusing to use the file"
    )]
    ChecksumMismatch { path: PathBuf, expected: String, got: String },
    #[error("download of {url} failed: {source}")]
    Http { url: String, source: reqwest::Error },
    #[error("download of {url} failed with status {status}")]
    HttpStatus { url: String, status: u16 },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FetchError + '_ {
    move |source| FetchError::Io { path: path.to_path_buf(), source }
}

/// Train/test file locations after a successful resolve.
#[derive(Debug, Clone)]
pub struct ResolvedDataset {
    pub train: PathBuf,
    pub test: Option<PathBuf>,
}

/// Cache directory: `$GSA_BENCH_CACHE`, else `$HOME/.cache/gsa-bench`,
/// else `./gsa-cache`.
pub fn default_cache_dir() -> PathBuf {
    if let Ok(dir) = std::env::var(CACHE_ENV) {
        return PathBuf::from(dir);
    }
    match std::env::var("HOME") {
        Ok(home) => Path::new(&home).join(".cache").join("gsa-bench"),
        Err(_) => PathBuf::from("gsa-cache"),
    }
}

/// File name a URL is stored under: the last path segment minus any
/// compression suffix.
fn stored_name(url: &str) -> String {
    let last = url.rsplit('/').next().unwrap_or(url);
    last.trim_end_matches(".gz").trim_end_matches(".bz2").to_string()
}

fn sha256_file(path: &Path) -> Result<String, FetchError> {
    let mut file = fs::File::open(path).map_err(io_err(path))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(io_err(path))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn verify_or_record(path: &Path, pinned: Option<&str>) -> Result<(), FetchError> {
    let digest = sha256_file(path)?;
    if let Some(expected) = pinned {
        if digest != expected {
            return Err(FetchError::ChecksumMismatch {
                path: path.to_path_buf(),
                expected: expected.to_string(),
                got: digest,
            });
        }
    }
    let sidecar = sidecar_path(path);
    if sidecar.exists() {
        let expected = fs::read_to_string(&sidecar).map_err(io_err(&sidecar))?.trim().to_string();
        if digest != expected {
            return Err(FetchError::ChecksumMismatch {
                path: path.to_path_buf(),
                expected,
                got: digest,
            });
        }
    } else {
        fs::write(&sidecar, format!("{digest}\n")).map_err(io_err(&sidecar))?;
    }
    Ok(())
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".sha256");
    path.with_file_name(name)
}

/// Unpacks a downloaded payload according to the URL's compression suffix.
fn decompress_payload(url: &str, bytes: &[u8]) -> std::io::Result<Vec<u8>> {
    if url.ends_with(".gz") {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(bytes).read_to_end(&mut out)?;
        Ok(out)
    } else if url.ends_with(".bz2") {
        let mut out = Vec::new();
        bzip2::read::BzDecoder::new(bytes).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(bytes.to_vec())
    }
}

fn download(url: &str, dest: &Path) -> Result<(), FetchError> {
    let client = reqwest::blocking::Client::builder()
        .connect_timeout(Duration::from_secs(20))
        .timeout(Duration::from_secs(600))
        .build()
        .map_err(|source| FetchError::Http { url: url.to_string(), source })?;
    let response = client
        .get(url)
        .send()
        .map_err(|source| FetchError::Http { url: url.to_string(), source })?;
    if !response.status().is_success() {
        return Err(FetchError::HttpStatus {
            url: url.to_string(),
            status: response.status().as_u16(),
        });
    }
    let bytes =
        response.bytes().map_err(|source| FetchError::Http { url: url.to_string(), source })?;

    let tmp = dest.with_extension("part");
    let payload = decompress_payload(url, &bytes).map_err(io_err(&tmp))?;
    fs::write(&tmp, payload).map_err(io_err(&tmp))?;
    fs::rename(&tmp, dest).map_err(io_err(dest))?;
    Ok(())
}

/// Resolves one file of a dataset: cache hit with digest verification, or
/// download (unless `offline`).
fn resolve_file(
    url: &str,
    pinned: Option<&str>,
    cache: &Path,
    offline: bool,
) -> Result<PathBuf, FetchError> {
    fs::create_dir_all(cache).map_err(io_err(cache))?;
    let path = cache.join(stored_name(url));
    if !path.exists() {
        if offline {
            return Err(FetchError::NotCached(path));
        }
        eprintln!("fetching {url}");
        download(url, &path)?;
    }
    verify_or_record(&path, pinned)?;
    Ok(path)
}

/// Fetches (or reuses from cache) the named registry dataset.
pub fn fetch_dataset(
    name: &str,
    cache: &Path,
    offline: bool,
) -> Result<ResolvedDataset, FetchError> {
    let spec: &DatasetSpec =
        lookup(name).ok_or_else(|| FetchError::UnknownDataset(name.to_string()))?;
    let train = resolve_file(spec.url, spec.sha256, cache, offline)?;
    let test = match spec.test_url {
        Some(url) => Some(resolve_file(url, spec.test_sha256, cache, offline)?),
        None => None,
    };
    Ok(ResolvedDataset { train, test })
}
