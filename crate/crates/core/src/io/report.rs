//! Deterministic JSON output: pretty-printed, struct field order, map keys
//! sorted, every float written with 17 significant digits.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::{Error, Result};

/// Pretty formatter with fixed-precision floats.
struct FixedFloat<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    forward! {
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloat(PrettyFormatter::with_indent(b"  ")));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::invalid("report", e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_bytes(value)?).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Appends one compact JSON document per line.
pub struct JsonLines<W: Write> {
    out: W,
}

impl<W: Write> JsonLines<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn append<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer(&mut self.out, value).map_err(|e| Error::invalid("log", e.to_string()))?;
        self.out
            .write_all(b"\n")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io("appending log line", e))
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        let mut m = BTreeMap::new();
        m.insert("b", 0.1);
        m.insert("a", 26.091);
        let text = String::from_utf8(to_json_bytes(&m).unwrap()).unwrap();
        assert_eq!(text, "{\n  \"a\": 2.6091000000000001e1,\n  \"b\": 1.0000000000000001e-1\n}\n");
        let back: BTreeMap<String, f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"], 26.091);
        assert_eq!(back["b"], 0.1);
    }

    #[test]
    fn json_lines_are_compact() {
        let mut log = JsonLines::new(Vec::new());
        log.append(&[1, 2]).unwrap();
        log.append(&"x").unwrap();
        assert_eq!(log.into_inner(), b"[1,2]\n\"x\"\n");
    }
}
