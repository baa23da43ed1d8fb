//! Dense matrices as comma-separated text.
//!
//! A first line that does not parse as numbers is taken as a header and
//! skipped. Values are written in scientific notation with 17 significant
//! digits so a save/load round trip is exact.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

pub fn read_matrix<R: Read>(reader: R) -> Result<Array2<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut ncols = None;
    let mut nrows = 0usize;
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(idx + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<std::result::Result<f64, _>> = rec.iter().map(str::parse::<f64>).collect();
        if idx == 0 && parsed.iter().any(|p| p.is_err()) {
            continue;
        }
        match ncols {
            None => ncols = Some(rec.len()),
            Some(n) if n != rec.len() => {
                return Err(Error::RaggedRow {
                    row: line,
                    expected: n,
                    found: rec.len(),
                })
            }
            _ => {}
        }
        for (col, (p, raw)) in parsed.into_iter().zip(rec.iter()).enumerate() {
            match p {
                Ok(x) => data.push(x),
                Err(e) => {
                    return Err(Error::Parse {
                        row: line,
                        column: col + 1,
                        message: format!("{raw:?}: {e}"),
                    })
                }
            }
        }
        nrows += 1;
    }
    let ncols = ncols.ok_or(Error::EmptyMatrix)?;
    if nrows == 0 || ncols == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(Array2::from_shape_vec((nrows, ncols), data).expect("row lengths checked"))
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    read_matrix(File::open(path)?)
}

pub fn write_matrix<W: Write>(writer: W, m: ArrayView2<'_, f64>) -> Result<()> {
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let mut w = csv::Writer::from_writer(writer);
    for row in m.rows() {
        w.write_record(row.iter().map(|x| format!("{x:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_matrix(path: impl AsRef<Path>, m: ArrayView2<'_, f64>) -> Result<()> {
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    write_matrix(File::create(path)?, m)
}
