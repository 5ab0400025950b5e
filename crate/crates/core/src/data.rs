//! The `T × n` observation matrix carried through every stage, plus CSV I/O.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observations in rows, variables in columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesMatrix {
    pub values: DMatrix<f64>,
    pub names: Vec<String>,
    /// Date labels from a leading non-numeric column, kept for output only.
    pub dates: Option<Vec<String>>,
}

impl TimeSeriesMatrix {
    pub fn new(values: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if names.len() != values.ncols() {
            return Err(Error::Dimension(format!(
                "{} names for {} columns",
                names.len(),
                values.ncols()
            )));
        }
        Ok(Self { values, names, dates: None })
    }

    /// Columns named `prefix1..prefixn`.
    pub fn from_matrix(values: DMatrix<f64>, prefix: &str) -> Self {
        let names = (1..=values.ncols()).map(|i| format!("{prefix}{i}")).collect();
        Self { values, names, dates: None }
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let t = self.values.nrows();
        &self.values.as_slice()[j * t..(j + 1) * t]
    }

    /// Rows `start..end`, keeping names and the matching dates.
    pub fn rows(&self, start: usize, end: usize) -> Self {
        Self {
            values: self.values.rows(start, end - start).into_owned(),
            names: self.names.clone(),
            dates: self.dates.as_ref().map(|d| d[start..end].to_vec()),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = Vec::with_capacity(self.dim() + 1);
        if self.dates.is_some() {
            header.push("date".to_string());
        }
        header.extend(self.names.iter().cloned());
        out.write_record(&header)?;
        for t in 0..self.len() {
            let mut rec = Vec::with_capacity(header.len());
            if let Some(d) = &self.dates {
                rec.push(d[t].clone());
            }
            rec.extend((0..self.dim()).map(|j| fmt_num(self.values[(t, j)])));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Shortest representation that round-trips the `f64`.
pub fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

fn looks_like_date_header(h: &str) -> bool {
    let h = h.trim().to_ascii_lowercase();
    matches!(h.as_str(), "date" | "time" | "period" | "month" | "quarter" | "year" | "sasdate" | "t")
}

/// Reads a header-first CSV into a [`TimeSeriesMatrix`].
///
/// A leading column whose header is date-like, or whose first cell is not a
/// number, is carried as `dates`. Every other cell must parse as a finite
/// number; line numbers in errors are 1-based and count the header.
pub fn read_csv<R: Read>(input: R) -> Result<TimeSeriesMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(input);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let records: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
    if records.is_empty() {
        return Err(Error::Parse { line: 2, column: 1, message: "no data rows".into() });
    }
    let first_is_date = looks_like_date_header(&headers[0])
        || records[0].get(0).map(|c| c.parse::<f64>().is_err() && !c.is_empty()).unwrap_or(false);
    let skip = usize::from(first_is_date);
    let names: Vec<String> = headers[skip..].to_vec();
    if names.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: format!("need at least 2 numeric columns, found {}", names.len()),
        });
    }
    let n = names.len();
    let mut data = Vec::with_capacity(records.len() * n);
    let mut dates = Vec::new();
    for (r, rec) in records.iter().enumerate() {
        let line = r + 2;
        if rec.len() != headers.len() {
            return Err(Error::Parse {
                line,
                column: rec.len().min(headers.len()) + 1,
                message: format!("expected {} fields, found {}", headers.len(), rec.len()),
            });
        }
        if first_is_date {
            dates.push(rec[0].to_string());
        }
        for (j, cell) in rec.iter().enumerate().skip(skip) {
            if cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan") {
                return Err(Error::Parse {
                    line,
                    column: j + 1,
                    message: format!("missing value in column '{}'", headers[j]),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                column: j + 1,
                message: format!("non-numeric cell '{cell}' in column '{}'", headers[j]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, column: j + 1, message: "non-finite value".into() });
            }
            data.push(v);
        }
    }
    let values = DMatrix::from_row_slice(records.len(), n, &data);
    Ok(TimeSeriesMatrix { values, names, dates: first_is_date.then_some(dates) })
}

pub fn ingest_csv(path: &Path) -> Result<TimeSeriesMatrix> {
    read_csv(std::fs::File::open(path)?)
}

/// Writes a plain matrix with the given header.
pub fn write_matrix_csv<W: Write>(w: W, header: &[String], m: &DMatrix<f64>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for i in 0..m.nrows() {
        out.write_record(m.row(i).iter().map(|&v| fmt_num(v)))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_numeric_file() {
        let mut s = String::from("a,b,c\n");
        for t in 0..480 {
            s.push_str(&format!("{t},{}.5,-{t}e-3\n", t * 2));
        }
        let m = read_csv(s.as_bytes()).unwrap();
        assert_eq!((m.len(), m.dim()), (480, 3));
        assert_eq!(m.values[(10, 1)], 20.5);
        assert!(m.dates.is_none());
    }

    #[test]
    fn date_column_is_metadata() {
        let s = "date,x,y,z\n1980-01,1,2,3\n1980-02,4,5,6\n";
        let m = read_csv(s.as_bytes()).unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.names, vec!["x", "y", "z"]);
        assert_eq!(m.dates.as_ref().unwrap()[1], "1980-02");
        let s = "when,x,y\n1980m1,1,2\n1980m2,4,5\n";
        assert_eq!(read_csv(s.as_bytes()).unwrap().dim(), 2);
    }

    #[test]
    fn missing_cell_names_row_and_column() {
        let s = "x,y,z\n1,2,3\n4,,6\n";
        match read_csv(s.as_bytes()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_and_non_numeric_rejected() {
        assert!(matches!(read_csv("x,y\n1,2\n3\n".as_bytes()), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(read_csv("x,y\n1,2\n3,abc\n".as_bytes()), Err(Error::Parse { line: 3, column: 2, .. })));
        assert!(read_csv("x\n1\n2\n".as_bytes()).is_err());
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let m = TimeSeriesMatrix::from_matrix(DMatrix::from_fn(5, 2, |i, j| (i as f64 + 0.1) / (j as f64 + 3.0)), "y");
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values, m.values);
        assert_eq!(back.names, m.names);
    }
}
