//! CSV tables, number formatting and atomic file output.

use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, x);
        trim(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim(mant))
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// An in-memory CSV table.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("write to memory");
        Table { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("write to memory");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("flush to memory")
    }
}

/// Write to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> std::io::Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(std::f64::consts::PI * std::f64::consts::PI), "9.86960440109");
        assert_eq!(num(0.740173883), "0.740173883");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-2.5e-9), "-2.5e-9");
        assert_eq!(num(123456789012345.0), "1.23456789012e14");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(1e-5), "0.00001");
    }

    #[test]
    fn table_quotes_fields() {
        let mut t = Table::new(&["a", "b"]);
        t.row(["x,y", "1"]);
        assert_eq!(String::from_utf8(t.into_bytes()).unwrap(), "a,b\n\"x,y\",1\n");
    }
}
