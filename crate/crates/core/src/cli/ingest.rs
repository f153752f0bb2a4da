use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linear::Dataset;

pub const INTERCEPT_NAME: &str = "(Intercept)";

/// Which header column holds the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseColumn {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for ResponseColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ResponseColumn::Index(i),
            Err(_) => ResponseColumn::Name(s.to_string()),
        })
    }
}

/// What to do when no covariate column is identically one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterceptPolicy {
    Prepend,
    Require,
}

pub fn ingest_csv(path: &Path, response: &ResponseColumn, policy: InterceptPolicy) -> Result<Dataset> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(format!("cannot open {}: {e}", path.display())))?;
    ingest_reader(file, response, policy)
}

/// Parse a header-plus-numeric-rows CSV into a validated dataset.
///
/// Row numbers in parse errors are file lines (the header is line 1);
/// column numbers are 1-based.
pub fn ingest_reader<R: Read>(
    reader: R,
    response: &ResponseColumn,
    policy: InterceptPolicy,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(Error::Parse {
            row: 1,
            column: 1,
            message: "missing header row".into(),
        });
    }
    let y_col = match response {
        ResponseColumn::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("no column named '{name}' in header")))?,
        ResponseColumn::Index(i) if *i < headers.len() => *i,
        ResponseColumn::Index(i) => {
            return Err(Error::IndexOutOfRange {
                index: *i,
                len: headers.len(),
            })
        }
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let line = r + 2;
        let record = record.map_err(|e| csv_error(e, line))?;
        let parsed = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row: line,
                        column: c + 1,
                        message: format!("non-numeric cell '{cell}' in column '{}'", headers[c]),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(parsed);
    }

    let n = rows.len();
    let y = DVector::from_fn(n, |r, _| rows[r][y_col]);
    let mut cov: Vec<usize> = (0..headers.len()).filter(|&c| c != y_col).collect();
    let has_intercept = match cov.iter().position(|&c| rows.iter().all(|row| row[c] == 1.0)) {
        Some(p) => {
            let c = cov.remove(p);
            cov.insert(0, c);
            true
        }
        None if policy == InterceptPolicy::Require => {
            return Err(Error::Config(
                "no all-ones intercept column and intercept insertion is disabled".into(),
            ));
        }
        None => false,
    };
    let mut names: Vec<String> = Vec::new();
    if !has_intercept {
        names.push(INTERCEPT_NAME.to_string());
    }
    names.extend(cov.iter().map(|&c| headers[c].clone()));
    let k = names.len();
    if n < k + 2 {
        return Err(Error::Shape(format!(
            "{n} data rows for {k} design columns; need at least {}",
            k + 2
        )));
    }
    let offset = usize::from(!has_intercept);
    let x = DMatrix::from_fn(n, k, |r, c| {
        if c < offset {
            1.0
        } else {
            rows[r][cov[c - offset]]
        }
    });
    Dataset::new(y, x, names)
}

fn csv_error(e: csv::Error, fallback_line: usize) -> Error {
    let row = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_line);
    Error::Parse {
        row,
        column: 0,
        message: e.to_string(),
    }
}

/// Write a dataset as `y` followed by the non-intercept covariates.
pub fn write_dataset_csv<W: Write>(dataset: &Dataset, response_name: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let names = dataset.column_names();
    let mut header = vec![response_name.to_string()];
    header.extend(names[1..].iter().cloned());
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for r in 0..dataset.n() {
        let mut rec = vec![dataset.y()[r].to_string()];
        rec.extend((1..dataset.k()).map(|c| dataset.x()[(r, c)].to_string()));
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest(text: &str) -> Result<Dataset> {
        ingest_reader(
            text.as_bytes(),
            &ResponseColumn::Name("y".into()),
            InterceptPolicy::Prepend,
        )
    }

    #[test]
    fn prepends_intercept_and_keeps_names() {
        let ds = ingest("a,y,b\n1,2,0.5\n2,3,0.1\n3,5,0.9\n4,4,0.3\n5,7,0.2\n").unwrap();
        assert_eq!(ds.k(), 3);
        assert_eq!(ds.column_names(), &["(Intercept)", "a", "b"]);
        assert_eq!(ds.y()[2], 5.0);
    }

    #[test]
    fn existing_ones_column_moves_to_front() {
        let ds = ingest("a,const,y\n1,1,2\n2,1,3\n3,1,5\n5,1,4\n").unwrap();
        assert_eq!(ds.column_names(), &["const", "a"]);
    }

    #[test]
    fn require_policy_rejects_missing_intercept() {
        let r = ingest_reader(
            "a,y\n1,2\n2,3\n3,5\n4,4\n".as_bytes(),
            &ResponseColumn::Index(1),
            InterceptPolicy::Require,
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn non_numeric_cell_reports_position() {
        match ingest("a,y\n1,2\n2,oops\n3,5\n4,4\n") {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (3, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_column_is_singular() {
        match ingest("a,b,y\n1,1,2\n2,2,3\n3,3,5\n4,4,4\n5,5,1\n") {
            Err(Error::SingularDesign(msg)) => assert!(msg.contains('a') && msg.contains('b')),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(ingest("a,y\n1,2\n2,3\n"), Err(Error::Shape(_))));
    }

    #[test]
    fn round_trip_through_writer() {
        let ds = ingest("a,y,b\n1,2,0.5\n2,3,0.1\n3,5,0.9\n4,4,0.3\n5,7,0.2\n").unwrap();
        let mut buf = Vec::new();
        write_dataset_csv(&ds, "y", &mut buf).unwrap();
        let back = ingest(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.x(), ds.x());
        assert_eq!(back.y(), ds.y());
    }
}
