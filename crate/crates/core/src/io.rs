//! CSV and JSON artifacts. Floats are written with 17 significant digits
//! so every value reads back bit-exact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::FilterCoefficients;
use crate::graph::Graph;
use crate::pipeline::DenoiseReport;
use crate::transform::TimeVertexSignal;

/// Shortest fixed-width form that round-trips an `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn reader(path: &Path, headers: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_err(path: &Path, row: usize, column: Option<usize>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message: message.into(),
    }
}

fn csv_err(path: &Path, row: usize, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => parse_err(path, row, None, format!("{other:?}")),
    }
}

fn parse_cell(path: &Path, row: usize, col: usize, cell: &str) -> Result<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| parse_err(path, row, Some(col), format!("`{cell}` is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(path, row, Some(col), format!("`{cell}` is not finite")));
    }
    Ok(v)
}

/// Reads an `N x T` headerless CSV; row `i` is vertex `i`. Rows and columns
/// in errors are 1-based.
pub fn load_signal(path: &Path) -> Result<TimeVertexSignal> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader(path, false)?.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_err(path, row, e))?;
        let vals = rec
            .iter()
            .enumerate()
            .map(|(j, c)| parse_cell(path, row, j + 1, c))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if vals.len() != first.len() {
                return Err(parse_err(
                    path,
                    row,
                    None,
                    format!("ragged row: {} values, expected {}", vals.len(), first.len()),
                ));
            }
        }
        rows.push(vals);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(parse_err(path, 0, None, "empty signal file"));
    }
    let (n, t) = (rows.len(), rows[0].len());
    TimeVertexSignal::new(DMatrix::from_fn(n, t, |i, j| rows[i][j]))
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file)))
}

fn write_rows<I, R>(path: &Path, header: Option<&[&str]>, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = create(path)?;
    let wrap = |e: csv::Error| csv_err(path, 0, e);
    if let Some(h) = header {
        w.write_record(h).map_err(wrap)?;
    }
    for r in rows {
        w.write_record(r.into_iter().collect::<Vec<_>>()).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Inverse of [`load_signal`].
pub fn write_signal(path: &Path, x: &DMatrix<f64>) -> Result<()> {
    write_rows(
        path,
        None,
        x.row_iter().map(|r| r.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>()),
    )
}

/// `id,lat,lon` with a header row; ids must be `0..n` in order.
pub fn load_coordinates(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, rec) in reader(path, true)?.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| csv_err(path, row, e))?;
        if rec.len() != 3 {
            return Err(parse_err(path, row, None, format!("expected 3 fields, got {}", rec.len())));
        }
        let id: usize = rec[0]
            .parse()
            .map_err(|_| parse_err(path, row, Some(1), format!("`{}` is not a vertex id", &rec[0])))?;
        if id != out.len() {
            return Err(parse_err(path, row, Some(1), format!("expected id {}, got {id}", out.len())));
        }
        out.push((parse_cell(path, row, 2, &rec[1])?, parse_cell(path, row, 3, &rec[2])?));
    }
    if out.is_empty() {
        return Err(parse_err(path, 0, None, "no coordinates"));
    }
    Ok(out)
}

pub fn write_coordinates(path: &Path, coords: &[(f64, f64)]) -> Result<()> {
    write_rows(
        path,
        Some(&["id", "lat", "lon"]),
        coords
            .iter()
            .enumerate()
            .map(|(i, &(la, lo))| vec![i.to_string(), fmt_f64(la), fmt_f64(lo)]),
    )
}

/// `src,dst,weight`, one line per undirected edge with `src < dst`.
pub fn write_edges(path: &Path, g: &Graph) -> Result<()> {
    write_rows(
        path,
        Some(&["src", "dst", "weight"]),
        g.edges()
            .into_iter()
            .map(|(s, d, w)| vec![s.to_string(), d.to_string(), fmt_f64(w)]),
    )
}

/// `segment,p,q,re,im` for a list of per-segment coefficient sets.
pub fn write_coefficients(path: &Path, coefs: &[FilterCoefficients]) -> Result<()> {
    let rows = coefs.iter().enumerate().flat_map(|(s, c)| {
        (0..c.p()).flat_map(move |p| {
            (0..c.q()).map(move |q| {
                let z = c.get(p, q);
                vec![s.to_string(), p.to_string(), q.to_string(), fmt_f64(z.re), fmt_f64(z.im)]
            })
        })
    });
    write_rows(path, Some(&["segment", "p", "q", "re", "im"]), rows)
}

/// `a,b,<metric>,is_best`, one row per grid point in grid order.
pub fn write_surface(path: &Path, report: &DenoiseReport) -> Result<()> {
    let best = report.best_index();
    let header = ["a", "b", report.surface_metric.as_str(), "is_best"];
    write_rows(
        path,
        Some(&header),
        report.surface.iter().enumerate().map(|(i, p)| {
            vec![
                fmt_f64(p.a),
                fmt_f64(p.b),
                fmt_f64(p.value),
                u8::from(i == best).to_string(),
            ]
        }),
    )
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::input(format!("cannot serialize {}: {e}", path.display())))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
