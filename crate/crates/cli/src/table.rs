//! Result tables and their CSV form.
//!
//! A table file starts with `# key: value` metadata lines, followed by an
//! RFC 4180 body whose header names every numeric column and, last, one
//! free-text column. Numbers are written in Rust's shortest round-trip
//! notation, so reading a file back gives the same bits.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default)]
pub struct Row {
    pub values: Vec<f64>,
    pub note: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepTable {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    /// Header of the trailing text column.
    pub note_column: String,
    pub rows: Vec<Row>,
}

impl PartialEq for Row {
    fn eq(&self, other: &Self) -> bool {
        self.note == other.note
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl PartialEq for SweepTable {
    fn eq(&self, other: &Self) -> bool {
        self.metadata == other.metadata
            && self.columns == other.columns
            && self.note_column == other.note_column
            && self.rows == other.rows
    }
}

impl SweepTable {
    pub fn new(columns: Vec<String>, note_column: &str) -> Self {
        SweepTable {
            columns,
            note_column: note_column.to_string(),
            ..Default::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace('\n', " ");
        self.metadata.push((key.to_string(), value));
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, values: Vec<f64>, note: impl Into<String>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(Row {
            values,
            note: note.into(),
        });
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}").map_err(|e| CliError::io("output", e))?;
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.columns.clone();
        header.push(self.note_column.clone());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record: Vec<String> = row.values.iter().map(|v| format!("{v:?}")).collect();
            record.push(row.note.clone());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| CliError::io("output", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| CliError::Csv(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut metadata = Vec::new();
        let mut line = String::new();
        let mut body = String::new();
        loop {
            line.clear();
            let n = reader
                .read_line(&mut line)
                .map_err(|e| CliError::io("input", e))?;
            if n == 0 {
                break;
            }
            match line.strip_prefix("# ") {
                Some(meta) => {
                    let meta = meta.trim_end_matches(['\n', '\r']);
                    let (k, v) = meta.split_once(": ").ok_or_else(|| {
                        CliError::Csv(format!("metadata line without `: `: {meta}"))
                    })?;
                    metadata.push((k.to_string(), v.to_string()));
                }
                None => {
                    body.push_str(&line);
                    reader
                        .read_to_string(&mut body)
                        .map_err(|e| CliError::io("input", e))?;
                    break;
                }
            }
        }
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let mut columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let note_column = columns
            .pop()
            .ok_or_else(|| CliError::Csv("empty header".into()))?;
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            let n = columns.len();
            let values = (0..n)
                .map(|i| {
                    record[i]
                        .parse::<f64>()
                        .map_err(|e| CliError::Csv(format!("`{}`: {e}", &record[i])))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(Row {
                values,
                note: record[n].to_string(),
            });
        }
        Ok(SweepTable {
            metadata,
            columns,
            note_column,
            rows,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| CliError::io(path.display(), e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path.display(), e))?;
        Self::read_csv(file)
    }
}
