//! Text format for difference sets: a `P Q H gamma` header, then one `p q`
//! line per index. Lines starting with `#` are skipped.

use std::fmt::Write as _;
use std::path::Path;

use dsthin_core::diffsets::{validate, DifferenceSet};

use crate::CliError;

pub fn parse(text: &str) -> Result<DifferenceSet, CliError> {
    let bad = |line: usize, what: &str| CliError::Config(format!("DS file line {line}: {what}"));
    let mut rows =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = rows.next().ok_or_else(|| CliError::Config("DS file is empty".into()))?;
    let head: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| bad(hl, "expected `P Q H gamma`"))?;
    let [p, q, h, gamma] = head[..] else {
        return Err(bad(hl, "expected `P Q H gamma`"));
    };
    let mut idx = Vec::with_capacity(h);
    for (n, line) in rows {
        let v: Vec<usize> =
            line.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| bad(n, "expected `p q`"))?;
        let [a, b] = v[..] else {
            return Err(bad(n, "expected `p q`"));
        };
        idx.push((a, b));
    }
    if idx.len() != h {
        return Err(CliError::Config(format!("DS file lists {} indices, header says {h}", idx.len())));
    }
    let (hh, gg) = validate(p, q, &idx)?;
    if (hh, gg) != (h, gamma) {
        return Err(CliError::Config(format!("DS file header ({h}, {gamma}) does not match the set ({hh}, {gg})")));
    }
    Ok(DifferenceSet::new(p, q, idx)?)
}

pub fn format(ds: &DifferenceSet) -> String {
    let d = ds.descriptors();
    let mut s = format!("{} {} {} {}\n", d.p, d.q, d.h, d.gamma);
    for &(a, b) in ds.indices() {
        let _ = writeln!(s, "{a} {b}");
    }
    s
}

pub fn load(path: &Path) -> Result<DifferenceSet, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}

pub fn save(path: &Path, ds: &DifferenceSet) -> Result<(), CliError> {
    std::fs::write(path, format(ds)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsthin_core::diffsets::twin_prime;

    #[test]
    fn round_trip() {
        let ds = twin_prime(3, 5).unwrap();
        let text = format(&ds);
        assert!(text.starts_with("3 5 7 3\n"));
        assert_eq!(parse(&text).unwrap(), ds);
        assert_eq!(format(&parse(&text).unwrap()), text);
    }

    #[test]
    fn comments_and_errors() {
        let ok = "# singer m=2\n3 1 2 1\n# body\n0 0\n1 0\n";
        assert_eq!(parse(ok).unwrap().indices(), &[(0, 0), (1, 0)]);
        assert!(parse("").is_err());
        assert!(parse("3 1 2 1\n0 0\n").is_err());
        assert!(parse("3 1 2 0\n0 0\n1 0\n").is_err());
        assert!(parse("7 1 3 1\n0 0\n1 0\n2 0\n").is_err());
        assert!(parse("3 1 2 1\n0 x\n1 0\n").is_err());
    }
}
