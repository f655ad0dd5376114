//! Interchange formats: edge lists, feature matrices and latents.
//!
//! * `edges.csv`: header `u,v`, one undirected edge per row, 0-based ids, `u < v`.
//! * `features.csv`: header `node,f0,…,f{d−1}`, one row per node.
//! * `features.bin`: little-endian `u64` n, `u64` d, then `n·d` little-endian
//!   `f64` values in row-major order.
//! * `latents.csv`: header `node,u`.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::GraphSample;
use crate::signal::FeatureMatrix;

/// Feature file encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureFormat {
    Csv,
    Bin,
}

impl FeatureFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            FeatureFormat::Csv => "csv",
            FeatureFormat::Bin => "bin",
        }
    }

    /// `.bin` files are binary, everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => FeatureFormat::Bin,
            _ => FeatureFormat::Csv,
        }
    }
}

impl std::str::FromStr for FeatureFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(FeatureFormat::Csv),
            "bin" => Ok(FeatureFormat::Bin),
            other => Err(Error::InvalidArgument(format!("unknown feature format {other:?}"))),
        }
    }
}

pub fn write_edges(sample: &GraphSample, mut out: impl Write) -> Result<()> {
    writeln!(out, "u,v")?;
    for (u, v) in sample.edges() {
        writeln!(out, "{u},{v}")?;
    }
    Ok(())
}

pub fn read_edges(input: impl Read) -> Result<Vec<(usize, usize)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "u" || &headers[1] != "v" {
        return Err(Error::Malformed(format!("edge file header must be u,v, got {headers:?}")));
    }
    let mut edges = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |k: usize| -> Result<usize> {
            record[k]
                .parse()
                .map_err(|_| Error::Malformed(format!("edge row {}: bad node id {:?}", line + 1, &record[k])))
        };
        edges.push((parse(0)?, parse(1)?));
    }
    Ok(edges)
}

// Adding +0.0 turns -0.0 into 0.0 so zero features print as "0".
fn fmt_value(v: f64) -> f64 {
    v + 0.0
}

pub fn write_features_csv(x: &FeatureMatrix, out: impl Write) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    write!(out, "node")?;
    for c in 0..x.d() {
        write!(out, ",f{c}")?;
    }
    writeln!(out)?;
    for i in 0..x.n() {
        write!(out, "{i}")?;
        for &v in x.row(i) {
            write!(out, ",{}", fmt_value(v))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_features_csv(input: impl Read) -> Result<FeatureMatrix> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.is_empty() || &headers[0] != "node" {
        return Err(Error::Malformed("feature file header must start with node".into()));
    }
    let d = headers.len() - 1;
    let mut values = Vec::new();
    let mut n = 0;
    for record in reader.records() {
        let record = record?;
        if record.len() != d + 1 {
            return Err(Error::Malformed(format!("feature row {n} has {} fields", record.len())));
        }
        let node: usize = record[0]
            .parse()
            .map_err(|_| Error::Malformed(format!("bad node id {:?}", &record[0])))?;
        if node != n {
            return Err(Error::Malformed(format!("feature rows out of order at node {node}")));
        }
        for field in record.iter().skip(1) {
            values.push(
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Malformed(format!("bad feature value {field:?}")))?,
            );
        }
        n += 1;
    }
    FeatureMatrix::from_row_major(n, d, values)
}

pub fn write_features_bin(x: &FeatureMatrix, out: impl Write) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    out.write_all(&(x.n() as u64).to_le_bytes())?;
    out.write_all(&(x.d() as u64).to_le_bytes())?;
    for &v in x.values() {
        out.write_all(&fmt_value(v).to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_features_bin(input: impl Read) -> Result<FeatureMatrix> {
    let mut reader = BufReader::new(input);
    let mut word = [0u8; 8];
    reader.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    reader.read_exact(&mut word)?;
    let d = u64::from_le_bytes(word) as usize;
    let count = n
        .checked_mul(d)
        .ok_or_else(|| Error::Malformed(format!("header {n}×{d} overflows")))?;
    let mut values = Vec::with_capacity(count.min(1 << 28));
    for _ in 0..count {
        reader
            .read_exact(&mut word)
            .map_err(|_| Error::Malformed(format!("binary feature file shorter than {n}×{d}")))?;
        values.push(f64::from_le_bytes(word));
    }
    if !reader.fill_buf()?.is_empty() {
        return Err(Error::Malformed("trailing bytes after binary feature data".into()));
    }
    FeatureMatrix::from_row_major(n, d, values)
}

pub fn write_features(x: &FeatureMatrix, format: FeatureFormat, out: impl Write) -> Result<()> {
    match format {
        FeatureFormat::Csv => write_features_csv(x, out),
        FeatureFormat::Bin => write_features_bin(x, out),
    }
}

/// Reads a feature file, choosing the decoder from the extension.
pub fn read_features_file(path: &Path) -> Result<FeatureMatrix> {
    let file = std::fs::File::open(path)?;
    match FeatureFormat::from_path(path) {
        FeatureFormat::Csv => read_features_csv(file),
        FeatureFormat::Bin => read_features_bin(file),
    }
}

pub fn write_latents(latents: &[f64], mut out: impl Write) -> Result<()> {
    writeln!(out, "node,u")?;
    for (i, u) in latents.iter().enumerate() {
        writeln!(out, "{i},{u}")?;
    }
    Ok(())
}

pub fn read_latents(input: impl Read) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut latents = Vec::new();
    for record in reader.records() {
        let record = record?;
        latents.push(
            record
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Malformed("bad latent row".into()))?,
        );
    }
    Ok(latents)
}
