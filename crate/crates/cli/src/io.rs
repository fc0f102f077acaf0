use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use zani_core::rng::RNG_ALGORITHM;
use zani_core::{CountDataset, CountVector};

/// Provenance block written at the top of every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub rng: &'static str,
    pub config_hash: String,
}

impl Metadata {
    pub fn new<C: Serialize>(seed: u64, config: &C) -> Result<Self> {
        Ok(Self {
            tool: "zani",
            version: env!("CARGO_PKG_VERSION"),
            seed,
            rng: RNG_ALGORITHM,
            config_hash: config_hash(config)?,
        })
    }

    /// `# key: value` lines for CSV files.
    pub fn comment_block(&self) -> String {
        format!(
            "# tool: {} {}\n# seed: {}\n# rng: {}\n# config_hash: {}\n",
            self.tool, self.version, self.seed, self.rng, self.config_hash
        )
    }
}

/// SHA-256 of the JSON form of a configuration.
pub fn config_hash<C: Serialize>(config: &C) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(format!("sha256:{:x}", Sha256::digest(&bytes)))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// A CSV document, optionally preceded by a metadata comment block.
pub struct Table {
    buf: Vec<u8>,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(meta: Option<&Metadata>, header: &[S]) -> Result<Self> {
        let buf = meta.map(|m| m.comment_block().into_bytes()).unwrap_or_default();
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header.iter().map(AsRef::as_ref))?;
        Ok(Self { buf, writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn into_bytes(mut self) -> Result<Vec<u8>> {
        let body = self.writer.into_inner().map_err(|e| e.into_error())?;
        self.buf.extend_from_slice(&body);
        Ok(self.buf)
    }

    pub fn write(self, path: &Path) -> Result<()> {
        write_atomic(path, &self.into_bytes()?)
    }
}

/// Shortest round-trip text for a float.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_else(|| "NA".into())
}

/// Dataset CSV: header `y1..yd`, one row of counts per observation.
pub fn dataset_csv(rows: &[CountVector]) -> Result<Vec<u8>> {
    let d = rows.first().map(CountVector::dim).context("no rows to write")?;
    let header: Vec<String> = (1..=d).map(|j| format!("y{j}")).collect();
    let mut t = Table::new(None, &header)?;
    for y in rows {
        t.row(y.counts().iter().map(u64::to_string))?;
    }
    t.into_bytes()
}

/// Reads a dataset CSV. Lines starting with `#` are ignored.
pub fn read_dataset(path: &Path) -> Result<CountDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening dataset {}", path.display()))?;
    let header = reader.headers()?.clone();
    let d = header.len();
    if d < 2 {
        bail!("dataset {} needs at least 2 columns, found {d}", path.display());
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading row {}", i + 1))?;
        if record.len() != d {
            bail!("row {}: has {} cells, expected {d}", i + 1, record.len());
        }
        let mut row = Vec::with_capacity(d);
        for (j, cell) in record.iter().enumerate() {
            let v: u64 = cell.parse().map_err(|_| {
                anyhow::anyhow!(
                    "row {}, column {} ({}): {cell:?} is not a non-negative integer",
                    i + 1,
                    j + 1,
                    &header[j]
                )
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("dataset {} has no rows", path.display());
    }
    Ok(CountDataset::from_rows(rows)?)
}
