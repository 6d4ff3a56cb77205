//! Locale-independent numeric output at 17 significant digits.

use serde::Serialize;
use serde_json::ser::Formatter;
use std::io;

/// `x` in scientific notation with 17 significant digits, e.g.
/// `8.8750000000000000e0`. Non-finite values print as `NaN`, `inf`, `-inf`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON formatter that writes every float with 17 significant digits and
/// non-finite floats as `null`.
#[derive(Debug, Default, Clone, Copy)]
pub struct Sig17Formatter;

impl Formatter for Sig17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(sig17(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}
