//! File formats for matrices and simulated instances.
//!
//! # Binary container
//!
//! Little-endian throughout:
//!
//! ```text
//! magic      8 bytes   b"PSVDMAT1"
//! count      u32       number of matrices
//! repeated `count` times:
//!   name_len u32
//!   name     name_len bytes, UTF-8
//!   rows     u64
//!   cols     u64
//!   data     rows·cols f64, column-major
//! ```
//!
//! # CSV matrix
//!
//! One file per matrix. The first line is `rows,cols`; each following line is
//! one matrix row, entries separated by `,` and written in scientific notation
//! with 17 significant digits (`{:.16e}`), which round-trips every `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{ObservedPanel, PanelInstance};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub const CONTAINER_MAGIC: &[u8; 8] = b"PSVDMAT1";

/// Formats a float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_container<W: Write>(mut w: W, matrices: &[(&str, &DenseMatrix)]) -> Result<()> {
    w.write_all(CONTAINER_MAGIC)?;
    w.write_all(&(matrices.len() as u32).to_le_bytes())?;
    for (name, m) in matrices {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(m.n_rows() as u64).to_le_bytes())?;
        w.write_all(&(m.n_cols() as u64).to_le_bytes())?;
        for v in m.to_col_major() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_container<R: Read>(mut r: R) -> Result<Vec<(String, DenseMatrix)>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CONTAINER_MAGIC {
        return Err(Error::Parse("not a matrix container (bad magic)".into()));
    }
    let count = read_u32(&mut r)? as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name).map_err(|e| Error::Parse(format!("matrix name: {e}")))?;
        let rows = read_u64(&mut r)? as usize;
        let cols = read_u64(&mut r)? as usize;
        let mut data = Vec::with_capacity(rows * cols);
        let mut buf = [0u8; 8];
        for _ in 0..rows * cols {
            r.read_exact(&mut buf)?;
            data.push(f64::from_le_bytes(buf));
        }
        out.push((name, DenseMatrix::from_col_major(rows, cols, &data)?));
    }
    Ok(out)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Named matrices of an instance, in container order.
pub fn instance_matrices<'a>(
    instance: &'a PanelInstance,
    observed: &'a ObservedPanel,
) -> Vec<(&'static str, &'a DenseMatrix)> {
    vec![
        ("propensity", instance.design.propensity()),
        ("a0", &instance.signal.a0),
        ("a1", &instance.signal.a1),
        ("e0", &instance.noise.e0),
        ("e1", &instance.noise.e1),
        ("y0", &instance.y0),
        ("y1", &instance.y1),
        ("d", &instance.assignments),
        ("y_obs", observed.y_obs()),
    ]
}

pub fn instance_to_bytes(instance: &PanelInstance, observed: &ObservedPanel) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_container(&mut buf, &instance_matrices(instance, observed))?;
    Ok(buf)
}

pub fn write_instance(path: &Path, instance: &PanelInstance, observed: &ObservedPanel) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    write_container(file, &instance_matrices(instance, observed))
}

/// Writes each matrix of the instance to `<dir>/<name>.csv`.
pub fn write_instance_csv(dir: &Path, instance: &PanelInstance, observed: &ObservedPanel) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, m) in instance_matrices(instance, observed) {
        write_matrix_csv_file(&dir.join(format!("{name}.csv")), m)?;
    }
    Ok(())
}

pub fn read_container_file(path: &Path) -> Result<Vec<(String, DenseMatrix)>> {
    read_container(BufReader::new(File::open(path)?))
}

pub fn write_matrix_csv<W: Write>(w: W, m: &DenseMatrix) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(w);
    wtr.write_record([m.n_rows().to_string(), m.n_cols().to_string()])?;
    for row in m.rows_iter() {
        wtr.write_record(row.iter().map(|&v| format_f64(v)))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(r: R) -> Result<DenseMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(r);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))??;
    if header.len() != 2 {
        return Err(Error::Parse("header must be `rows,cols`".into()));
    }
    let parse_dim = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad dimension {s:?}: {e}")))
    };
    let rows = parse_dim(&header[0])?;
    let cols = parse_dim(&header[1])?;
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for rec in records {
        let rec = rec?;
        if rec.len() != cols {
            return Err(Error::Parse(format!(
                "row {seen} has {} entries, expected {cols}",
                rec.len()
            )));
        }
        for field in rec.iter() {
            data.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad entry {field:?}: {e}")))?,
            );
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::Parse(format!("expected {rows} rows, found {seen}")));
    }
    DenseMatrix::from_row_major(rows, cols, data)
}

pub fn write_matrix_csv_file(path: &Path, m: &DenseMatrix) -> Result<()> {
    write_matrix_csv(BufWriter::new(File::create(path)?), m)
}

pub fn read_matrix_csv_file(path: &Path) -> Result<DenseMatrix> {
    read_matrix_csv(BufReader::new(File::open(path)?))
}
