use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::sim::TimeSeriesRecord;

/// First line of every time-series file.
pub const CSV_SCHEMA: &str = "#schema=1";

/// Streaming time-series writer. Floats use Rust's shortest round-trip
/// formatting, so output is byte-stable for identical runs.
pub struct CsvSink<W: Write> {
    inner: csv::Writer<W>,
    rows: usize,
}

impl<W: Write> CsvSink<W> {
    pub fn new(mut w: W) -> Result<Self> {
        writeln!(w, "{CSV_SCHEMA}")?;
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(TimeSeriesRecord::columns()).map_err(csv_err)?;
        Ok(CsvSink { inner, rows: 0 })
    }

    pub fn push(&mut self, r: &TimeSeriesRecord) -> Result<()> {
        let row = r.values().iter().map(|v| format!("{}", v + 0.0)).collect::<Vec<_>>();
        self.inner.write_record(&row).map_err(csv_err)?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(self) -> Result<W> {
        self.inner.into_inner().map_err(|e| crate::Error::Io(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(e.to_string())
}

pub fn write_csv(path: &Path, records: &[TimeSeriesRecord]) -> Result<()> {
    let mut sink = CsvSink::new(BufWriter::new(File::create(path)?))?;
    for r in records {
        sink.push(r)?;
    }
    sink.finish()?.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_shortest_floats() {
        let s = crate::sim::Scenario::preset("bench").unwrap();
        let mut sink = CsvSink::new(Vec::new()).unwrap();
        let out = crate::sim::run_scenario_with(
            &crate::sim::Scenario { duration: 0.001, events: vec![], ..s },
            |r| sink.push(r).unwrap(),
        )
        .unwrap();
        assert!(out.fault.is_none());
        assert_eq!(sink.rows(), 11);
        let text = String::from_utf8(sink.finish().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_SCHEMA));
        assert!(lines.next().unwrap().starts_with("time,v1_a,v1_b,v1_c,"));
        let t: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(t[0], 0.0);
        assert!((t[1] - 1e-4).abs() < 1e-15);
    }
}
