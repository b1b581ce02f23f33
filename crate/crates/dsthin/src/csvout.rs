//! Fixed-format CSV writing.

use std::fmt::Write as _;

/// Levels below this are written as `-inf`.
pub const DB_FLOOR: f64 = -200.0;

/// C `%.6e`: six fraction digits and an exponent of at least two digits.
pub fn fmt_e6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.6e}");
    let (mant, exp) = s.split_once('e').expect("exponent");
    let e: i32 = exp.parse().expect("exponent digits");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

pub fn fmt_db(x: f64) -> String {
    if x < DB_FLOOR {
        "-inf".into()
    } else {
        fmt_e6(x)
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), fmt_e6)
}

/// Header line plus rows, `\n` terminated.
pub struct Table {
    buf: String,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { buf: columns.join(",") + "\n" }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let mut first = true;
        for c in cells {
            if !first {
                self.buf.push(',');
            }
            first = false;
            self.buf.push_str(&c);
        }
        self.buf.push('\n');
    }

    pub fn comment(&mut self, text: &str) {
        let _ = writeln!(self.buf, "#{text}");
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}
