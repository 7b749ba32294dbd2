//! Input format of `prodstate reduce`:
//!
//! ```text
//! n m
//! kappa m00 m01 m02 m10 m11 m12 m20 m21 m22 r0 r1 r2 s0 s1 s2
//! i j w        (m lines)
//! ```
//!
//! `#` starts a comment line. The coefficient line is the Pauli expansion
//! of the two-qubit term shared by every edge.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use prodstate_core::pauli::{FanoForm, TermGraph};

#[derive(Debug, PartialEq)]
pub struct InputError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

impl std::error::Error for InputError {}

fn err(line: usize, msg: impl Into<String>) -> InputError {
    InputError { line, msg: msg.into() }
}

fn numbers<T: std::str::FromStr>(line: usize, text: &str, want: usize) -> Result<Vec<T>, InputError>
where
    T::Err: fmt::Display,
{
    let out: Vec<T> = text
        .split_whitespace()
        .map(|f| f.parse::<T>().map_err(|e| err(line, format!("`{f}`: {e}"))))
        .collect::<Result<_, _>>()?;
    if out.len() != want {
        return Err(err(line, format!("expected {want} fields, found {}", out.len())));
    }
    Ok(out)
}

pub fn parse(text: &str) -> Result<TermGraph, InputError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let nm = numbers::<usize>(ln, header, 2)?;
    let (n, m) = (nm[0], nm[1]);
    if n == 0 {
        return Err(err(ln, "n must be positive"));
    }

    let (ln, coeff_line) = lines.next().ok_or_else(|| err(ln + 1, "missing coefficient line"))?;
    let c = numbers::<f64>(ln, coeff_line, 16)?;
    let term = FanoForm {
        kappa: c[0],
        m: Matrix3::from_row_slice(&c[1..10]),
        r: Vector3::from_row_slice(&c[10..13]),
        s: Vector3::from_row_slice(&c[13..16]),
    };

    let mut pairs = Vec::with_capacity(m);
    for (ln, line) in lines.by_ref().take(m) {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err(ln, format!("expected `i j w`, found {} fields", f.len())));
        }
        let i: usize = f[0].parse().map_err(|e| err(ln, format!("`{}`: {e}", f[0])))?;
        let j: usize = f[1].parse().map_err(|e| err(ln, format!("`{}`: {e}", f[1])))?;
        let w: f64 = f[2].parse().map_err(|e| err(ln, format!("`{}`: {e}", f[2])))?;
        if i >= n || j >= n || i == j {
            return Err(err(ln, format!("edge ({i}, {j}) invalid for n = {n}")));
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(err(ln, format!("weight {w} must be finite and non-negative")));
        }
        pairs.push((i.min(j), i.max(j), w));
    }
    if pairs.len() != m {
        return Err(err(0, format!("expected {m} edges, found {}", pairs.len())));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "unexpected trailing content"));
    }
    Ok(TermGraph::uniform(n, &pairs, term))
}
