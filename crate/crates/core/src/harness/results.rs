//! Result tables and their CSV form.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of the results CSV.
pub const CSV_HEADER: [&str; 14] = [
    "study",
    "mode",
    "snr_db",
    "model",
    "boundary_set",
    "trial",
    "ber",
    "data_rate",
    "resets",
    "occ_p1",
    "occ_p2",
    "occ_p3",
    "occ_p4",
    "seed",
];

/// One aggregated point of a study.
///
/// `trial` holds the number of pooled trials; `model` and `boundary_set` are
/// empty when the point used an explicit profile or boundary set (or, for
/// fixed-pattern rows, no boundaries at all).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub study: String,
    pub mode: String,
    pub snr_db: f64,
    pub model: Option<usize>,
    pub boundary_set: Option<usize>,
    pub trial: usize,
    pub ber: f64,
    pub data_rate: f64,
    pub resets: u64,
    pub occ_p1: f64,
    pub occ_p2: f64,
    pub occ_p3: f64,
    pub occ_p4: f64,
    pub seed: u64,
}

impl ResultRow {
    pub fn occupancy(&self) -> [f64; 4] {
        [self.occ_p1, self.occ_p2, self.occ_p3, self.occ_p4]
    }

    /// Label of the series the row belongs to in a chart.
    pub fn series(&self) -> String {
        match (self.mode.as_str(), self.study.as_str()) {
            ("adaptive", "boundaries") => match self.boundary_set {
                Some(b) => format!("boundary set {b}"),
                None => "custom boundaries".to_string(),
            },
            ("adaptive", "models") => match self.model {
                Some(m) => format!("model {m}"),
                None => "custom channel".to_string(),
            },
            (mode, _) => mode.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new(rows: Vec<ResultRow>) -> Self {
        ResultTable { rows }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Distinct series labels in first-seen order.
    pub fn series(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            let s = r.series();
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }

    pub fn find(&self, pred: impl Fn(&ResultRow) -> bool) -> Option<&ResultRow> {
        self.rows.iter().find(|r| pred(r))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        let fail = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
        w.write_record(CSV_HEADER).map_err(fail)?;
        for row in &self.rows {
            w.serialize(row).map_err(fail)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let parse = |e: csv::Error| Error::Parse {
            path: "<csv>".into(),
            message: e.to_string(),
        };
        let header = rdr.headers().map_err(parse)?.clone();
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::Parse {
                path: "<csv>".into(),
                message: format!("unexpected header {header:?}"),
            });
        }
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>().map_err(parse)?;
        Ok(ResultTable { rows })
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| with_path(e, path))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file)).map_err(|e| with_path(e, path))
    }
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        Error::Parse { message, .. } => Error::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(snr: f64) -> ResultRow {
        ResultRow {
            study: "adaptive-vs-fixed".into(),
            mode: "adaptive".into(),
            snr_db: snr,
            model: Some(2),
            boundary_set: None,
            trial: 20,
            ber: 0.012_345_678_9,
            data_rate: 0.75,
            resets: 3,
            occ_p1: 0.1,
            occ_p2: 0.2,
            occ_p3: 0.3,
            occ_p4: 0.4,
            seed: u64::MAX,
        }
    }

    #[test]
    fn single_row_has_header_and_one_line() {
        let t = ResultTable::new(vec![row(5.0)]);
        let s = t.to_csv_string().unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("adaptive-vs-fixed,adaptive,5.0,2,,20,"));
    }

    #[test]
    fn round_trip() {
        let t = ResultTable::new(vec![row(0.0), row(f64::INFINITY), row(-3.5)]);
        let s = t.to_csv_string().unwrap();
        let back = ResultTable::read_csv(s.as_bytes()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(ResultTable::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
