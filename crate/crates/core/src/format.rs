//! Plain-text instance files.
//!
//! Energy (`.pwe`): a header `n l m`, then `n` lines of `l` unary costs, `l`
//! lines of `l` pairwise costs, and `m` edge lines `i j w` with `0 <= i < j < n`.
//!
//! Affinity (`.aff`): a header `n`, then one `i j w` line per stored entry.
//!
//! Blank lines are ignored. Values are written with the shortest decimal
//! form that reads back to the same number.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::str::FromStr;

use ndarray::Array2;

use crate::corrclust::AffinityMatrix;
use crate::energy::Energy;
use crate::error::{Error, Result};
use crate::multiscale::InterpolationMatrix;
use crate::scalar::Real;

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn new(r: R) -> Self {
        Lines { inner: r.lines(), line: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    /// Next non-blank line split into fields, or `None` at end of input.
    fn next_fields(&mut self) -> Result<Option<Vec<String>>> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l?;
            let fields: Vec<String> = l.split_whitespace().map(str::to_owned).collect();
            if !fields.is_empty() {
                return Ok(Some(fields));
            }
        }
        Ok(None)
    }

    fn expect_fields(&mut self, count: usize, what: &str) -> Result<Vec<String>> {
        match self.next_fields()? {
            None => Err(Error::Parse { line: self.line + 1, msg: format!("unexpected end of input, expected {what}") }),
            Some(f) if f.len() != count => {
                Err(self.err(format!("expected {count} fields for {what}, found {}", f.len())))
            }
            Some(f) => Ok(f),
        }
    }

    fn parse<V: FromStr>(&self, field: &str, what: &str) -> Result<V> {
        field.parse().map_err(|_| self.err(format!("cannot parse {what} from {field:?}")))
    }

    fn value<T: Real>(&self, field: &str) -> Result<T> {
        let x: f64 = self.parse(field, "a number")?;
        if !x.is_finite() {
            return Err(self.err(format!("non-finite value {field:?}")));
        }
        Ok(T::of(x))
    }

    fn finish(&mut self) -> Result<()> {
        match self.next_fields()? {
            Some(_) => Err(self.err("trailing content after the last record")),
            None => Ok(()),
        }
    }
}

fn parse_edge<T: Real, R: BufRead>(
    lines: &Lines<R>,
    f: &[String],
    n: usize,
    seen: &mut HashSet<(usize, usize)>,
) -> Result<(usize, usize, T)> {
    let i: usize = lines.parse(&f[0], "an index")?;
    let j: usize = lines.parse(&f[1], "an index")?;
    let w = lines.value(&f[2])?;
    if i >= n || j >= n {
        return Err(lines.err(format!("edge ({i}, {j}) out of range 0..{n}")));
    }
    if i == j {
        return Err(lines.err(format!("self-loop at {i}")));
    }
    if i > j {
        return Err(lines.err(format!("edge ({i}, {j}) must have i < j")));
    }
    if !seen.insert((i, j)) {
        return Err(lines.err(format!("duplicate edge ({i}, {j})")));
    }
    Ok((i, j, w))
}

pub fn read_energy<T: Real, R: BufRead>(reader: R) -> Result<Energy<T>> {
    let mut lines = Lines::new(reader);
    let h = lines.expect_fields(3, "the header `n l m`")?;
    let n: usize = lines.parse(&h[0], "n")?;
    let l: usize = lines.parse(&h[1], "l")?;
    let m: usize = lines.parse(&h[2], "m")?;
    if l == 0 {
        return Err(lines.err("need at least one label"));
    }
    let mut unary = Array2::zeros((n, l));
    for i in 0..n {
        let f = lines.expect_fields(l, "a unary row")?;
        for (a, x) in f.iter().enumerate() {
            unary[[i, a]] = lines.value(x)?;
        }
    }
    let mut pairwise = Array2::zeros((l, l));
    for a in 0..l {
        let f = lines.expect_fields(l, "a row of V")?;
        for (b, x) in f.iter().enumerate() {
            pairwise[[a, b]] = lines.value(x)?;
        }
    }
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let f = lines.expect_fields(3, "an edge `i j w`")?;
        edges.push(parse_edge(&lines, &f, n, &mut seen)?);
    }
    lines.finish()?;
    Energy::new(unary, pairwise, edges)
}

pub fn parse_energy<T: Real>(text: &str) -> Result<Energy<T>> {
    read_energy(text.as_bytes())
}

fn join<T: Real>(values: impl Iterator<Item = T>) -> String {
    values.map(|x| x.as_f64().to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_energy<T: Real, W: Write>(mut out: W, energy: &Energy<T>) -> Result<()> {
    writeln!(out, "{} {} {}", energy.num_vars(), energy.num_labels(), energy.edges().len())?;
    for row in energy.unary().rows() {
        writeln!(out, "{}", join(row.iter().copied()))?;
    }
    for row in energy.pairwise().rows() {
        writeln!(out, "{}", join(row.iter().copied()))?;
    }
    for e in energy.edges() {
        writeln!(out, "{} {} {}", e.i, e.j, e.weight.as_f64())?;
    }
    Ok(())
}

pub fn energy_to_string<T: Real>(energy: &Energy<T>) -> String {
    let mut buf = Vec::new();
    write_energy(&mut buf, energy).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn read_affinity<T: Real, R: BufRead>(reader: R) -> Result<AffinityMatrix<T>> {
    let mut lines = Lines::new(reader);
    let h = lines.expect_fields(1, "the header `n`")?;
    let n: usize = lines.parse(&h[0], "n")?;
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    while let Some(f) = lines.next_fields()? {
        if f.len() != 3 {
            return Err(lines.err(format!("expected 3 fields for an entry `i j w`, found {}", f.len())));
        }
        entries.push(parse_edge(&lines, &f, n, &mut seen)?);
    }
    AffinityMatrix::from_triplets(n, entries)
}

pub fn parse_affinity<T: Real>(text: &str) -> Result<AffinityMatrix<T>> {
    read_affinity(text.as_bytes())
}

pub fn write_affinity<T: Real, W: Write>(mut out: W, w: &AffinityMatrix<T>) -> Result<()> {
    writeln!(out, "{}", w.num_vars())?;
    for e in w.edges() {
        writeln!(out, "{} {} {}", e.i, e.j, e.weight.as_f64())?;
    }
    Ok(())
}

/// Sparse interpolation as `i j v` lines, row-major.
pub fn write_interpolation<T: Real, W: Write>(mut out: W, p: &InterpolationMatrix<T>) -> Result<()> {
    for (i, j, v) in p.triplets() {
        writeln!(out, "{i} {j} {}", v.as_f64())?;
    }
    Ok(())
}
