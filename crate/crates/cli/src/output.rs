//! CSV emission: '.' decimals, '\n' terminators, UTF-8, one header row.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

/// Opens `path`, or wraps `fallback` when no path is given.
pub fn sink<'a>(path: Option<&Path>, fallback: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(fallback),
    })
}

pub struct CsvTable<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvTable<W> {
    pub fn new(out: W, header: &[&str]) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        inner.write_record(header)?;
        Ok(Self { inner })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields)?;
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        let mut out = self.inner.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
        out.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal form, never in exponent notation.
pub fn real(x: f64) -> String {
    x.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unix_lines_and_point_decimals() {
        let mut buf = Vec::new();
        let mut t = CsvTable::new(&mut buf, &["a", "b"]).unwrap();
        t.row([real(0.5), real(1e-7)]).unwrap();
        t.row([real(1.0), real(0.0)]).unwrap();
        t.finish().unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n0.5,0.0000001\n1,0\n");
    }
}
