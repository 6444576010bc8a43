//! MatrixMarket and CSV interchange.
//!
//! These are the oracle-exchange formats for cross-language validation:
//! MatrixMarket `coordinate real general` with 1-based indices, dense CSV
//! (RFC 4180, `.` decimal), and plain one-value-per-line vectors. Values are
//! printed with Rust's shortest round-trip formatting, so rewriting the same
//! data is byte-identical.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DVector;

use crate::centro::CentroBlocks;
use crate::error::{Error, Result};
use crate::matrix::{CooMatrix, SystemMatrix};

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

fn sorted_entries(matrix: &SystemMatrix) -> Vec<(usize, usize, f64)> {
    match matrix {
        SystemMatrix::Dense(m) => {
            let mut entries = Vec::new();
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    if m[(r, c)] != 0.0 {
                        entries.push((r, c, m[(r, c)]));
                    }
                }
            }
            entries
        }
        SystemMatrix::Coo(m) => m
            .entry_map()
            .into_iter()
            .map(|((r, c), v)| (r, c, v))
            .collect(),
    }
}

/// Writes a matrix in MatrixMarket coordinate format (1-based, row-major
/// entry order).
pub fn write_matrix_market<W: Write>(writer: &mut W, matrix: &SystemMatrix) -> Result<()> {
    let entries = sorted_entries(matrix);
    writeln!(writer, "{HEADER}")?;
    writeln!(
        writer,
        "{} {} {}",
        matrix.nrows(),
        matrix.ncols(),
        entries.len()
    )?;
    for (r, c, v) in entries {
        writeln!(writer, "{} {} {}", r + 1, c + 1, v)?;
    }
    Ok(())
}

pub fn write_matrix_market_file(path: &Path, matrix: &SystemMatrix) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_matrix_market(&mut writer, matrix)?;
    writer.flush()?;
    Ok(())
}

/// Reads a MatrixMarket `coordinate real general` file into triplet storage.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<CooMatrix> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedMatrixFile("empty file".to_string()))??;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::MalformedMatrixFile(format!(
            "unrecognized header: {header}"
        )));
    }
    if tokens[2] != "coordinate"
        || !(tokens[3] == "real" || tokens[3] == "integer")
        || tokens[4] != "general"
    {
        return Err(Error::MalformedMatrixFile(format!(
            "only 'coordinate real general' matrices are supported, got: {header}"
        )));
    }

    let mut size_line = None;
    for line in lines.by_ref() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some(trimmed.to_string());
        break;
    }
    let size_line =
        size_line.ok_or_else(|| Error::MalformedMatrixFile("missing size line".to_string()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::MalformedMatrixFile(format!("bad size token '{t}'")))
        })
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(Error::MalformedMatrixFile(format!(
            "size line must be 'rows cols nnz', got: {size_line}"
        )));
    }
    let (nrows, ncols, nnz) = (dims[0], dims[1], dims[2]);

    let mut coo = CooMatrix::new(nrows, ncols);
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let row: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::MalformedMatrixFile(format!("bad entry line: {trimmed}")))?;
        let col: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::MalformedMatrixFile(format!("bad entry line: {trimmed}")))?;
        let value: f64 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::MalformedMatrixFile(format!("bad entry line: {trimmed}")))?;
        if row == 0 || col == 0 || row > nrows || col > ncols {
            return Err(Error::MalformedMatrixFile(format!(
                "entry ({row}, {col}) outside the declared {nrows}x{ncols} shape (indices are 1-based)"
            )));
        }
        coo.push(row - 1, col - 1, value);
    }
    if coo.nnz() != nnz {
        return Err(Error::MalformedMatrixFile(format!(
            "header declares {nnz} entries but the file holds {}",
            coo.nnz()
        )));
    }
    Ok(coo)
}

pub fn read_matrix_market_file(path: &Path) -> Result<CooMatrix> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

/// Writes the dense CSV form: one row per line, comma-separated, CRLF line
/// endings per RFC 4180. Refused above [`crate::assembly::DENSE_STORAGE_LIMIT`].
pub fn write_dense_csv<W: Write>(writer: &mut W, matrix: &SystemMatrix) -> Result<()> {
    if matrix.nrows() > crate::assembly::DENSE_STORAGE_LIMIT {
        return Err(Error::Config(format!(
            "dense CSV export is capped at rank {}, got {}",
            crate::assembly::DENSE_STORAGE_LIMIT,
            matrix.nrows()
        )));
    }
    let dense = matrix.to_dense();
    for r in 0..dense.nrows() {
        let row: Vec<String> = (0..dense.ncols())
            .map(|c| format!("{}", dense[(r, c)]))
            .collect();
        write!(writer, "{}\r\n", row.join(","))?;
    }
    Ok(())
}

pub fn write_dense_csv_file(path: &Path, matrix: &SystemMatrix) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_dense_csv(&mut writer, matrix)?;
    writer.flush()?;
    Ok(())
}

/// Writes a vector as one value per line, in index order.
pub fn write_vector<W: Write>(writer: &mut W, vector: &DVector<f64>) -> Result<()> {
    for v in vector.iter() {
        writeln!(writer, "{v}")?;
    }
    Ok(())
}

pub fn write_vector_file(path: &Path, vector: &DVector<f64>) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_vector(&mut writer, vector)?;
    writer.flush()?;
    Ok(())
}

pub fn read_vector<R: BufRead>(reader: R) -> Result<DVector<f64>> {
    let mut values = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        values.push(
            trimmed
                .parse::<f64>()
                .map_err(|_| Error::MalformedMatrixFile(format!("bad vector value '{trimmed}'")))?,
        );
    }
    Ok(DVector::from_vec(values))
}

pub fn read_vector_file(path: &Path) -> Result<DVector<f64>> {
    read_vector(BufReader::new(File::open(path)?))
}

/// Writes the blocks of a centrosymmetric matrix as `<base>.B.mtx` and
/// `<base>.C.mtx` next to each other; returns both paths.
pub fn write_centro_blocks(base: &Path, blocks: &CentroBlocks) -> Result<(PathBuf, PathBuf)> {
    let with_suffix = |suffix: &str| -> PathBuf {
        let mut name = base
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "blocks".to_string());
        name.push_str(suffix);
        base.with_file_name(name)
    };
    let b_path = with_suffix(".B.mtx");
    let c_path = with_suffix(".C.mtx");
    write_matrix_market_file(&b_path, &SystemMatrix::Dense(blocks.b().clone()))?;
    write_matrix_market_file(&c_path, &SystemMatrix::Dense(blocks.c().clone()))?;
    Ok((b_path, c_path))
}
