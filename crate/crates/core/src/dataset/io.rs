use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::{EmbeddingSet, ProbabilityMatrix, WeightVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    /// One point per line, comma-separated decimals.
    #[default]
    Csv,
    /// Little-endian `f32`, row-major; needs an explicit dimension.
    RawF32,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "raw-float32" | "raw-f32" | "raw" => Ok(Format::RawF32),
            other => Err(Error::InvalidConfig(format!("unknown format {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::RawF32 => "raw-float32",
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub format: Format,
    /// Row width for raw files. Ignored for CSV.
    pub dim: Option<usize>,
    /// Skip the first CSV line.
    pub header: bool,
}

impl LoadOptions {
    pub fn csv() -> Self {
        Self::default()
    }

    pub fn raw(dim: usize) -> Self {
        Self {
            format: Format::RawF32,
            dim: Some(dim),
            header: false,
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a matrix as `(flat values, row width)`.
fn read_matrix(path: &Path, opts: &LoadOptions) -> Result<(Vec<f64>, usize)> {
    let bytes = read_bytes(path)?;
    match opts.format {
        Format::Csv => parse_csv(&String::from_utf8_lossy(&bytes), opts.header),
        Format::RawF32 => {
            let dim = opts
                .dim
                .filter(|&d| d > 0)
                .ok_or_else(|| Error::InvalidConfig("raw-float32 input needs --dim".into()))?;
            parse_raw_f32(&bytes, dim)
        }
    }
}

pub(crate) fn parse_csv(text: &str, header: bool) -> Result<(Vec<f64>, usize)> {
    let mut flat = Vec::new();
    let mut dim = None;
    let lines = text
        .lines()
        .skip(usize::from(header))
        .filter(|l| !l.trim().is_empty());
    for (row, line) in lines.enumerate() {
        let mut count = 0;
        for (col, token) in line.split(',').enumerate() {
            let token = token.trim();
            let v: f64 = token.parse().map_err(|_| Error::Parse {
                row,
                col,
                token: token.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
            flat.push(v);
            count += 1;
        }
        match dim {
            None => dim = Some(count),
            Some(expected) if expected != count => {
                return Err(Error::RaggedRow {
                    row,
                    expected,
                    found: count,
                })
            }
            _ => {}
        }
    }
    match dim {
        Some(d) => Ok((flat, d)),
        None => Err(Error::EmptyInput {
            what: "csv file".into(),
        }),
    }
}

pub(crate) fn parse_raw_f32(bytes: &[u8], dim: usize) -> Result<(Vec<f64>, usize)> {
    if bytes.is_empty() {
        return Err(Error::EmptyInput {
            what: "raw-float32 file".into(),
        });
    }
    if bytes.len() % (4 * dim) != 0 {
        return Err(Error::RawLength {
            bytes: bytes.len(),
            dim,
        });
    }
    let mut flat = Vec::with_capacity(bytes.len() / 4);
    for (pos, chunk) in bytes.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        flat.push(f64::from(v));
    }
    Ok((flat, dim))
}

fn convert<T: Scalar>(flat: Vec<f64>) -> Vec<T> {
    flat.into_iter().map(T::lit).collect()
}

pub fn load_embeddings<T: Scalar>(
    path: impl AsRef<Path>,
    opts: &LoadOptions,
) -> Result<EmbeddingSet<T>> {
    let (flat, dim) = read_matrix(path.as_ref(), opts)?;
    EmbeddingSet::from_flat(convert(flat), dim)
}

pub fn load_probabilities<T: Scalar>(
    path: impl AsRef<Path>,
    opts: &LoadOptions,
    tolerance: f64,
) -> Result<ProbabilityMatrix<T>> {
    let (flat, classes) = read_matrix(path.as_ref(), opts)?;
    ProbabilityMatrix::new(convert(flat), classes, tolerance)
}

/// Weights are a single column (CSV) or a flat run of floats (raw).
pub fn load_weights<T: Scalar>(
    path: impl AsRef<Path>,
    opts: &LoadOptions,
) -> Result<WeightVector<T>> {
    let opts = LoadOptions {
        dim: Some(1),
        ..*opts
    };
    let (flat, width) = read_matrix(path.as_ref(), &opts)?;
    if width != 1 {
        return Err(Error::RaggedRow {
            row: 0,
            expected: 1,
            found: width,
        });
    }
    WeightVector::new(convert(flat))
}

/// Writes rows as CSV using shortest round-trip decimal formatting.
pub fn write_csv<T: Scalar>(
    path: impl AsRef<Path>,
    rows: impl Iterator<Item = Vec<T>>,
) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(out.as_bytes()).map_err(io_err)
}
