//! Text and JSON serialization of Jacobi matrices and discrete measures.
//!
//! Text formats:
//!
//! ```text
//! jacobi v1 <n>
//! <j> <a_j> <b_j>        (n rows, j = 0..n-1, b_0 written as 0 and ignored)
//!
//! atoms v1 <m>
//! <node> <weight>        (m rows)
//! ```
//!
//! Numbers are written with 17 significant digits, which round-trips `f64`
//! exactly. Blank lines and lines starting with `#` are skipped on read.
//!
//! JSON: `{"size": n, "a": [...], "b": [...]}` with `b` of length `n` and
//! `b[0] = 0`, and `{"size": m, "nodes": [...], "weights": [...]}`.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::discrete::DiscreteMeasure;
use crate::error::{Error, Result};
use crate::jacobi::JacobiMatrix;
use crate::scalar::Scalar;

/// On-disk encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Serialize, Deserialize)]
struct JacobiJson {
    size: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AtomsJson {
    size: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Formats a number with 17 significant digits.
pub fn fmt_num<T: Scalar>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Non-blank, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_header(line: Option<(usize, &str)>, kind: &str) -> Result<(usize, usize)> {
    let (no, text) = line.ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<&str> = text.split_whitespace().collect();
    match fields.as_slice() {
        [k, "v1", n] if *k == kind => {
            let n = n.parse::<usize>().map_err(|e| parse_err(no, format!("bad size: {e}")))?;
            Ok((no, n))
        }
        _ => Err(parse_err(no, format!("expected header `{kind} v1 <n>`"))),
    }
}

fn parse_num<T: Scalar>(no: usize, field: &str, what: &str) -> Result<T> {
    let v: f64 = field.parse().map_err(|e| parse_err(no, format!("bad {what} `{field}`: {e}")))?;
    if !v.is_finite() {
        return Err(parse_err(no, format!("{what} is not finite")));
    }
    Ok(T::lit(v))
}

/// Keeps normalized weights bit-exact.
fn measure_from<T: Scalar>(atoms: Vec<(T, T)>) -> Result<DiscreteMeasure<T>> {
    DiscreteMeasure::new(atoms.iter().copied()).or_else(|_| DiscreteMeasure::normalized(atoms))
}

/// Writes the text format.
pub fn write_jacobi<T: Scalar, W: Write>(j: &JacobiMatrix<T>, mut w: W) -> Result<()> {
    writeln!(w, "jacobi v1 {}", j.size())?;
    for k in 0..j.size() {
        writeln!(w, "{k} {} {}", fmt_num(j.a(k)), fmt_num(j.b(k)))?;
    }
    Ok(())
}

/// Parses the text format.
pub fn parse_jacobi<T: Scalar>(text: &str) -> Result<JacobiMatrix<T>> {
    let mut lines = content_lines(text);
    let (header_no, n) = parse_header(lines.next(), "jacobi")?;
    if n == 0 {
        return Err(parse_err(header_no, "size must be >= 1"));
    }
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n.saturating_sub(1));
    let mut last_no = header_no;
    for k in 0..n {
        let (no, line) = lines.next().ok_or_else(|| parse_err(last_no + 1, format!("expected {n} rows, found {k}")))?;
        last_no = no;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [idx, av, bv] = fields.as_slice() else {
            return Err(parse_err(no, "expected `<j> <a_j> <b_j>`"));
        };
        if idx.parse::<usize>().ok() != Some(k) {
            return Err(parse_err(no, format!("expected row index {k}, found `{idx}`")));
        }
        a.push(parse_num::<T>(no, av, "a")?);
        let bj = parse_num::<T>(no, bv, "b")?;
        if k > 0 {
            if !(bj > T::zero()) {
                return Err(parse_err(no, format!("b_{k} = {bj} must be strictly positive")));
            }
            b.push(bj);
        }
    }
    if let Some((no, _)) = lines.next() {
        return Err(parse_err(no, format!("more than {n} rows")));
    }
    JacobiMatrix::new(a, b)
}

/// Writes the atoms text format.
pub fn write_atoms<T: Scalar, W: Write>(m: &DiscreteMeasure<T>, mut w: W) -> Result<()> {
    writeln!(w, "atoms v1 {}", m.len())?;
    for (x, p) in m.atoms() {
        writeln!(w, "{} {}", fmt_num(x), fmt_num(p))?;
    }
    Ok(())
}

/// Parses the atoms text format; weights are renormalized unless they
/// already sum to one within rounding.
pub fn parse_atoms<T: Scalar>(text: &str) -> Result<DiscreteMeasure<T>> {
    let mut lines = content_lines(text);
    let (header_no, m) = parse_header(lines.next(), "atoms")?;
    if m == 0 {
        return Err(parse_err(header_no, "atom count must be >= 1"));
    }
    let mut atoms = Vec::with_capacity(m);
    let mut last_no = header_no;
    for k in 0..m {
        let (no, line) =
            lines.next().ok_or_else(|| parse_err(last_no + 1, format!("expected {m} atoms, found {k}")))?;
        last_no = no;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [x, p] = fields.as_slice() else {
            return Err(parse_err(no, "expected `<node> <weight>`"));
        };
        let w = parse_num::<T>(no, p, "weight")?;
        if !(w > T::zero()) {
            return Err(parse_err(no, format!("weight {w} must be strictly positive")));
        }
        atoms.push((parse_num::<T>(no, x, "node")?, w));
    }
    if let Some((no, _)) = lines.next() {
        return Err(parse_err(no, format!("more than {m} atoms")));
    }
    measure_from(atoms)
}

/// Writes the JSON form.
pub fn write_jacobi_json<T: Scalar, W: Write>(j: &JacobiMatrix<T>, mut w: W) -> Result<()> {
    let doc = JacobiJson {
        size: j.size(),
        a: j.diag().iter().map(|x| x.as_f64()).collect(),
        b: j.b_slice().iter().map(|x| x.as_f64()).collect(),
    };
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    Ok(())
}

/// Parses the JSON form.
pub fn parse_jacobi_json<T: Scalar>(text: &str) -> Result<JacobiMatrix<T>> {
    let doc: JacobiJson = serde_json::from_str(text)?;
    if doc.a.len() != doc.size || doc.b.len() != doc.size {
        return Err(parse_err(
            1,
            format!("size {} but a has {} and b has {} entries", doc.size, doc.a.len(), doc.b.len()),
        ));
    }
    if doc.size == 0 {
        return Err(parse_err(1, "size must be >= 1"));
    }
    if let Some(k) = (1..doc.size).find(|&k| !(doc.b[k] > 0.0)) {
        return Err(parse_err(1, format!("b_{k} = {} must be strictly positive", doc.b[k])));
    }
    JacobiMatrix::new(doc.a.into_iter().map(T::lit).collect(), doc.b[1..].iter().map(|x| T::lit(*x)).collect())
}

/// Writes the atoms JSON form.
pub fn write_atoms_json<T: Scalar, W: Write>(m: &DiscreteMeasure<T>, mut w: W) -> Result<()> {
    let doc = AtomsJson {
        size: m.len(),
        nodes: m.nodes().iter().map(|x| x.as_f64()).collect(),
        weights: m.weights().iter().map(|x| x.as_f64()).collect(),
    };
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    Ok(())
}

/// Parses the atoms JSON form; weights are treated as in [`parse_atoms`].
pub fn parse_atoms_json<T: Scalar>(text: &str) -> Result<DiscreteMeasure<T>> {
    let doc: AtomsJson = serde_json::from_str(text)?;
    if doc.nodes.len() != doc.size || doc.weights.len() != doc.size {
        return Err(parse_err(
            1,
            format!("size {} but {} nodes and {} weights", doc.size, doc.nodes.len(), doc.weights.len()),
        ));
    }
    measure_from(doc.nodes.into_iter().zip(doc.weights).map(|(x, w)| (T::lit(x), T::lit(w))).collect())
}

/// Detects JSON by a leading `{`.
pub fn detect_format(text: &str) -> Format {
    if text.trim_start().starts_with('{') {
        Format::Json
    } else {
        Format::Text
    }
}

/// Parses either encoding of a Jacobi matrix.
pub fn parse_jacobi_any<T: Scalar>(text: &str) -> Result<JacobiMatrix<T>> {
    match detect_format(text) {
        Format::Json => parse_jacobi_json(text),
        Format::Text => parse_jacobi(text),
    }
}

/// Parses either encoding of a discrete measure.
pub fn parse_atoms_any<T: Scalar>(text: &str) -> Result<DiscreteMeasure<T>> {
    match detect_format(text) {
        Format::Json => parse_atoms_json(text),
        Format::Text => parse_atoms(text),
    }
}

/// Reads a Jacobi matrix in either encoding from a stream.
pub fn read_jacobi<T: Scalar, R: Read>(r: R) -> Result<JacobiMatrix<T>> {
    let mut text = String::new();
    BufReader::new(r).read_to_string(&mut text)?;
    parse_jacobi_any(&text)
}

/// Reads a discrete measure in either encoding from a stream.
pub fn read_atoms<T: Scalar, R: BufRead>(mut r: R) -> Result<DiscreteMeasure<T>> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    parse_atoms_any(&text)
}

pub fn load_jacobi<T: Scalar>(path: impl AsRef<Path>) -> Result<JacobiMatrix<T>> {
    parse_jacobi_any(&fs::read_to_string(path)?)
}

pub fn load_atoms<T: Scalar>(path: impl AsRef<Path>) -> Result<DiscreteMeasure<T>> {
    parse_atoms_any(&fs::read_to_string(path)?)
}

/// Serializes in the requested encoding.
pub fn jacobi_to_string<T: Scalar>(j: &JacobiMatrix<T>, format: Format) -> String {
    let mut buf = Vec::new();
    match format {
        Format::Text => write_jacobi(j, &mut buf),
        Format::Json => write_jacobi_json(j, &mut buf),
    }
    .expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Serializes in the requested encoding.
pub fn atoms_to_string<T: Scalar>(m: &DiscreteMeasure<T>, format: Format) -> String {
    let mut buf = Vec::new();
    match format {
        Format::Text => write_atoms(m, &mut buf),
        Format::Json => write_atoms_json(m, &mut buf),
    }
    .expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::jacobi_lebesgue;

    #[test]
    fn json_round_trip_hard_values() {
        let j = JacobiMatrix::new(vec![9.454977685494153, -0.1], vec![0.30000000000000004]).unwrap();
        assert_eq!(parse_jacobi_json::<f64>(&jacobi_to_string(&j, Format::Json)).unwrap(), j);
    }

    #[test]
    fn text_round_trip_bit_identical() {
        let j = jacobi_lebesgue::<f64>(100).unwrap();
        let s = jacobi_to_string(&j, Format::Text);
        assert!(s.starts_with("jacobi v1 100\n0 0.0000000000000000e0 0.0000000000000000e0\n"));
        assert_eq!(parse_jacobi::<f64>(&s).unwrap(), j);
    }

    #[test]
    fn json_round_trip_bit_identical() {
        let j = jacobi_lebesgue::<f64>(50).unwrap();
        let s = jacobi_to_string(&j, Format::Json);
        assert_eq!(parse_jacobi_any::<f64>(&s).unwrap(), j);
    }

    #[test]
    fn rejects_zero_offdiag() {
        let err = parse_jacobi::<f64>("jacobi v1 2\n0 0 0\n1 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_short_file() {
        let err = parse_jacobi::<f64>("jacobi v1 3\n0 0 0\n1 0 0.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_header_and_extra_rows() {
        assert!(matches!(parse_jacobi::<f64>("jacobi v2 1\n0 0 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_jacobi::<f64>("jacobi v1 1\n0 0 0\n1 0 1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_jacobi::<f64>("jacobi v1 2\n0 0 0\n2 0 1\n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn ignores_b0_and_comments() {
        let j = parse_jacobi::<f64>("# comment\njacobi v1 2\n\n0 0.5 7\n1 0.25 0.5\n").unwrap();
        assert_eq!(j.diag(), &[0.5, 0.25]);
        assert_eq!(j.offdiag(), &[0.5]);
    }

    #[test]
    fn atoms_round_trip() {
        let m = DiscreteMeasure::new([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        for f in [Format::Text, Format::Json] {
            let s = atoms_to_string(&m, f);
            assert_eq!(parse_atoms_any::<f64>(&s).unwrap(), m);
        }
        assert!(parse_atoms::<f64>("atoms v1 1\n0.5 0\n").is_err());
    }
}
