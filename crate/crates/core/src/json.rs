//! JSON output with a fixed float format: every `f64` is written with 17
//! significant digits in exponent form, which round-trips exactly and makes
//! identical values produce identical bytes.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

#[derive(Clone, Copy, Debug, Default)]
pub struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", format_f64(value))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_f64(2.0 / 3.0), "6.6666666666666663e-1");
        assert_eq!(to_string(&[1.0f64, -2.5]).unwrap(), "[1.0000000000000000e0,-2.5000000000000000e0]");
    }

    #[test]
    fn round_trips_exactly() {
        let values = [0.1, 1.0 / 3.0, -7.123456789e-200, 6.02e23, f64::MIN_POSITIVE, 0.0];
        let text = to_string(&values).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, values);
    }

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(to_string(&[f64::NAN]).unwrap(), "[null]");
    }
}
