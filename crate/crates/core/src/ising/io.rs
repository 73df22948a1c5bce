//! Plain-text instance format.
//!
//! ```text
//! ising <N>
//! J <i> <j> <value>     (0-based, i < j, lexicographic)
//! h <i> <value>
//! ```
//!
//! Omitted entries are zero. Values are written with 17 significant digits.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::problem::IsingProblem;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn write_instance<T: Scalar, W: Write>(problem: &IsingProblem<T>, mut out: W) -> Result<()> {
    writeln!(out, "ising {}", problem.n_sites())?;
    for (i, j, v) in problem.upper_pairs() {
        writeln!(out, "J {i} {j} {:.16e}", v.as_f64())?;
    }
    for (i, h) in problem.fields().iter().enumerate() {
        if *h != T::zero() {
            writeln!(out, "h {i} {:.16e}", h.as_f64())?;
        }
    }
    Ok(())
}

pub fn save_instance<T: Scalar>(problem: &IsingProblem<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_instance(problem, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_instance<T: Scalar>(path: impl AsRef<Path>) -> Result<IsingProblem<T>> {
    read_instance(File::open(path)?)
}

/// Parses an instance. Blank lines and lines starting with `#` are ignored.
pub fn read_instance<T: Scalar, R: Read>(input: R) -> Result<IsingProblem<T>> {
    let reader = BufReader::new(input);
    let mut n: Option<usize> = None;
    let mut pairs = Vec::new();
    let mut seen_pairs = HashSet::new();
    let mut fields: Vec<T> = Vec::new();
    let mut seen_fields = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: lineno, msg };
        let tokens: Vec<&str> = text.split_whitespace().collect();
        match (n, tokens.as_slice()) {
            (None, ["ising", size]) => {
                let size: usize = size.parse().map_err(|_| err(format!("bad site count `{size}`")))?;
                n = Some(size);
                fields = vec![T::zero(); size];
            }
            (None, _) => return Err(err("expected header `ising <N>`".into())),
            (Some(size), ["J", i, j, v]) => {
                let i = parse_index(i, size).map_err(&err)?;
                let j = parse_index(j, size).map_err(&err)?;
                if i >= j {
                    return Err(err(format!("coupling ({i}, {j}) must have i < j")));
                }
                if !seen_pairs.insert((i, j)) {
                    return Err(err(format!("duplicate coupling ({i}, {j})")));
                }
                pairs.push((i, j, parse_value::<T>(v).map_err(&err)?));
            }
            (Some(size), ["h", i, v]) => {
                let i = parse_index(i, size).map_err(&err)?;
                if !seen_fields.insert(i) {
                    return Err(err(format!("duplicate field {i}")));
                }
                fields[i] = parse_value::<T>(v).map_err(&err)?;
            }
            (Some(_), _) => return Err(err(format!("unrecognized line `{text}`"))),
        }
    }
    let n = n.ok_or(Error::Parse {
        line: 0,
        msg: "missing header `ising <N>`".into(),
    })?;
    IsingProblem::from_pairs(n, pairs, fields)
}

fn parse_index(tok: &str, n: usize) -> std::result::Result<usize, String> {
    let i: usize = tok.parse().map_err(|_| format!("bad index `{tok}`"))?;
    if i >= n {
        return Err(format!("index {i} out of range for {n} sites"));
    }
    Ok(i)
}

fn parse_value<T: Scalar>(tok: &str) -> std::result::Result<T, String> {
    let v: f64 = tok.parse().map_err(|_| format!("bad value `{tok}`"))?;
    if !v.is_finite() {
        return Err(format!("value `{tok}` is not finite"));
    }
    Ok(T::of(v))
}
