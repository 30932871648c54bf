//! Locale-free numeric formatting and delimited writers.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::CliError;

pub const SIG_DIGITS: usize = 12;

/// Formats `x` with 12 significant digits, `%g` style: fixed notation for
/// exponents in `[-5, 12)`, scientific otherwise, trailing zeros removed.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
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

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_g).unwrap_or_default()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Tsv,
}

impl Format {
    pub fn delimiter(self) -> u8 {
        match self {
            Format::Csv => b',',
            Format::Tsv => b'\t',
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "tsv" => Ok(Format::Tsv),
            other => Err(CliError::config(format!(
                "format = {other:?}, expected csv or tsv"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
        })
    }
}

/// Writes a header and rows of pre-formatted cells.
pub fn write_table<W: Write>(
    out: W,
    format: Format,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(format.delimiter())
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_g(0.113_109_531_25), "0.11310953125");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_g(0.5), "0.5");
        assert_eq!(fmt_g(-0.8), "-0.8");
        assert_eq!(fmt_g(20.0), "20");
        assert_eq!(fmt_g(123_456_789_012.0), "123456789012");
        assert_eq!(fmt_g(1.5e12), "1.5e12");
        assert_eq!(fmt_g(1e-5), "0.00001");
        assert_eq!(fmt_g(1.234e-7), "1.234e-7");
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(-0.0), "0");
        assert_eq!(fmt_g(f64::NAN), "NaN");
    }

    #[test]
    fn rounding_carries_into_exponent() {
        assert_eq!(fmt_g(0.999_999_999_999_9), "1");
        assert_eq!(fmt_g(9.999_999_999_999_9e-6), "0.00001");
    }

    #[test]
    fn round_trips_to_twelve_digits() {
        for x in [std::f64::consts::PI, 1e-9 / 7.0, 0.002_561_3, 6.02e23] {
            let back: f64 = fmt_g(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-12, "{x}");
        }
    }

    #[test]
    fn writes_tsv() {
        let mut buf = Vec::new();
        let header = vec!["a".to_string(), "b".to_string()];
        write_table(
            &mut buf,
            Format::Tsv,
            &header,
            &[vec!["1".into(), "".into()]],
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a\tb\n1\t\n");
    }
}
