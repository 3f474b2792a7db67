//! Output files of one run: tracked, checksummed, removed again on failure.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rmabm_core::economy::MetricsFrame;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, IoContext};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Relative to the manifest's output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub command: String,
    pub argv: Vec<String>,
    pub cell: String,
    pub output_dir: PathBuf,
    /// Every seed the run consumed, in use order.
    pub seeds: Vec<u64>,
    /// Fully resolved configuration (TOML); also written next to the manifest.
    pub config: String,
    pub inputs: Vec<FileRecord>,
    pub files: Vec<FileRecord>,
    pub jobs: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_seconds: f64,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

pub fn sha256_file(path: &Path) -> Result<(u64, String), Error> {
    let mut file = File::open(path).at(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = file.read(&mut buf).at(path)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        bytes += n as u64;
    }
    let hex = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok((bytes, hex))
}

pub fn record(root: &Path, rel: &str) -> Result<FileRecord, Error> {
    let (bytes, sha256) = sha256_file(&root.join(rel))?;
    Ok(FileRecord { path: rel.to_string(), bytes, sha256 })
}

/// Files written under one directory. Unless [`Artifacts::commit`] runs,
/// dropping it deletes every file it handed out and any directory it made.
#[derive(Debug)]
pub struct Artifacts {
    root: PathBuf,
    files: Vec<String>,
    made_dirs: Vec<PathBuf>,
    committed: bool,
}

impl Artifacts {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self, Error> {
        let mut a = Self { root: root.into(), files: Vec::new(), made_dirs: Vec::new(), committed: false };
        let root = a.root.clone();
        a.mkdirs(&root)?;
        Ok(a)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn mkdirs(&mut self, dir: &Path) -> Result<(), Error> {
        let mut missing = Vec::new();
        let mut d = Some(dir);
        while let Some(p) = d {
            if p.as_os_str().is_empty() || p.exists() {
                break;
            }
            missing.push(p.to_path_buf());
            d = p.parent();
        }
        for p in missing.into_iter().rev() {
            match fs::create_dir(&p) {
                Ok(()) => self.made_dirs.push(p),
                // Another run in the same process got there first.
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {}
                Err(e) => return Err(Error::Io { path: p, source: e }),
            }
        }
        Ok(())
    }

    /// Claims `rel` (slash-separated) and returns its absolute path.
    pub fn reserve(&mut self, rel: &str) -> Result<PathBuf, Error> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            self.mkdirs(parent)?;
        }
        if !self.files.iter().any(|f| f == rel) {
            self.files.push(rel.to_string());
        }
        Ok(path)
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf, Error> {
        let path = self.reserve(rel)?;
        fs::write(&path, bytes).at(&path)?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<PathBuf, Error> {
        let path = self.reserve(rel)?;
        let mut text = serde_json::to_string_pretty(value).at(&path)?;
        text.push('\n');
        fs::write(&path, text).at(&path)?;
        Ok(path)
    }

    /// Checksums every claimed file and writes `manifest/<command>.json` and
    /// the resolved config `manifest/<command>.toml`.
    pub fn commit(mut self, mut manifest: RunManifest) -> Result<RunManifest, Error> {
        let config_rel = format!("manifest/{}.toml", manifest.command);
        self.write(&config_rel, manifest.config.as_bytes())?;
        manifest.files = self
            .files
            .iter()
            .map(|rel| record(&self.root, rel))
            .collect::<Result<_, _>>()?;
        manifest.output_dir = self.root.clone();
        manifest.finished_unix = unix_now();
        manifest.wall_seconds = manifest.finished_unix - manifest.started_unix;
        let rel = format!("manifest/{}.json", manifest.command);
        self.write_json(&rel, &manifest)?;
        self.committed = true;
        Ok(manifest)
    }
}

impl Drop for Artifacts {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for rel in &self.files {
            let _ = fs::remove_file(self.root.join(rel));
        }
        for dir in self.made_dirs.iter().rev() {
            let _ = fs::remove_dir(dir);
        }
    }
}

/// Checks every listed file against its recorded checksum.
pub fn verify(manifest: &RunManifest) -> Result<(), Error> {
    for f in &manifest.files {
        let path = manifest.output_dir.join(&f.path);
        let again = record(&manifest.output_dir, &f.path)?;
        if &again != f {
            return Err(Error::Io {
                path,
                source: std::io::Error::other("checksum differs from the manifest"),
            });
        }
    }
    Ok(())
}

pub const AGGREGATE_HEADER: [&str; 7] =
    ["step", "avg_price", "nominal_gdp", "real_gdp", "price_index", "employment", "consumption"];

pub const FIRM_HEADER: [&str; 12] = [
    "step", "firm", "rl", "price", "log_price_delta", "output", "demand", "sales", "profit", "reward", "assets",
    "bankrupt",
];

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, Error> {
    let file = File::create(path).at(path)?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

/// One row per step with the economy-wide series.
pub fn write_aggregate_frames(path: &Path, frames: &[MetricsFrame]) -> Result<(), Error> {
    let mut w = csv_writer(path)?;
    w.write_record(AGGREGATE_HEADER).at(path)?;
    for f in frames {
        w.write_record([
            f.step.to_string(),
            f.avg_price.to_string(),
            f.nominal_gdp.to_string(),
            f.real_gdp.to_string(),
            f.price_index.to_string(),
            f.employment.to_string(),
            f.consumption.to_string(),
        ])
        .at(path)?;
    }
    w.flush().at(path)
}

/// One row per step and C-firm. `num_rl` leading firms are the RL agents
/// (from the step after `burn_in` on).
pub fn write_firm_frames(path: &Path, frames: &[MetricsFrame], num_rl: usize, burn_in: usize) -> Result<(), Error> {
    let mut w = csv_writer(path)?;
    w.write_record(FIRM_HEADER).at(path)?;
    for f in frames {
        let rl_window = f.step > burn_in as u64;
        for (i, m) in f.firms.iter().enumerate() {
            w.write_record([
                f.step.to_string(),
                i.to_string(),
                u8::from(rl_window && i < num_rl).to_string(),
                m.price.to_string(),
                (m.price / f.avg_price).ln().to_string(),
                m.output.to_string(),
                m.demand.to_string(),
                m.sales.to_string(),
                m.profit.to_string(),
                m.reward.map(|r| r.to_string()).unwrap_or_default(),
                m.assets.to_string(),
                u8::from(m.bankrupt).to_string(),
            ])
            .at(path)?;
        }
    }
    w.flush().at(path)
}

/// Writes `rows` under `header` as CSV.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), Error> {
    let mut w = csv_writer(path)?;
    w.write_record(header).at(path)?;
    for row in rows {
        w.write_record(&row).at(path)?;
    }
    w.flush().at(path)?;
    let mut inner = w.into_inner().map_err(|e| Error::Io { path: path.into(), source: e.into_error() })?;
    inner.flush().at(path)
}
