//! Delimited output with `%g`-style six-significant-digit numbers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::config::Format;
use crate::error::CliError;

/// Formats `x` with six significant digits, like C's `%g`: fixed notation for
/// decimal exponents in `[-4, 6)`, scientific otherwise, trailing zeros dropped.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Opens the output: the named file, or standard output.
pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Header-first table writer over a byte sink; '\n' line terminator.
pub struct Table<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> Table<W> {
    pub fn new(sink: W, format: Format, header: &[&str]) -> Result<Self, CliError> {
        let mut inner = csv::WriterBuilder::new()
            .delimiter(format.delimiter())
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(sink);
        inner.write_record(header)?;
        Ok(Self { inner })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        self.inner.write_record(fields)?;
        Ok(())
    }

    /// Flushes the table and hands back the sink, e.g. to append comments.
    pub fn finish(self) -> Result<W, CliError> {
        self.inner
            .into_inner()
            .map_err(|e| CliError::Io(io::Error::new(e.error().kind(), e.error().to_string())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(20.0), "20");
        assert_eq!(sig6(0.1875), "0.1875");
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(7.093_712_3), "7.09371");
        assert_eq!(sig6(123_456.7), "123457");
        assert_eq!(sig6(1_234_567.0), "1.23457e6");
        assert_eq!(sig6(9.999_999), "10");
        assert_eq!(sig6(0.000_012_345_67), "1.23457e-5");
        assert_eq!(sig6(0.000_123_456_7), "0.000123457");
        assert_eq!(sig6(-2.5), "-2.5");
        assert_eq!(sig6(f64::INFINITY), "inf");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(Vec::new(), Format::Tsv, &["a", "b"]).unwrap();
        t.row(&["1".into(), "2.5".into()]).unwrap();
        let bytes = t.finish().unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "a\tb\n1\t2.5\n");
    }
}
