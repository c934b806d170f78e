//! Diagrams: sequences of particle pairs with no immediate repeats.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_PARTICLES: usize = 5;
pub const MAX_LENGTH: usize = 8;
/// Materialized enumerations beyond this size are refused; use [`DiagramIter`].
pub const MAX_MATERIALIZED: u64 = 10_000_000;

/// An unordered pair `{i, j}`, `1 ≤ i < j ≤ n`.
pub type Pair = (u8, u8);

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagram {
    pub n: usize,
    pub pairs: Vec<Pair>,
}

impl Diagram {
    pub fn new(n: usize, pairs: Vec<Pair>) -> Result<Self> {
        if n < 2 || pairs.is_empty() {
            return Err(Error::Domain("diagram needs n ≥ 2 and at least one pair".into()));
        }
        for &(i, j) in &pairs {
            if !(1 <= i && i < j && (j as usize) <= n) {
                return Err(Error::Domain(format!("pair ({i}{j}) is not a pair of {{1..{n}}}")));
            }
        }
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("consecutive pairs must differ".into()));
        }
        Ok(Diagram { n, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Whether the pairs together touch every particle.
    pub fn covers_all(&self) -> bool {
        let mut seen = 0u32;
        for &(i, j) in &self.pairs {
            seen |= 1 << i | 1 << j;
        }
        seen == ((1u32 << (self.n + 1)) - 2)
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, (i, j)) in self.pairs.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "({i}{j})")?;
        }
        write!(f, ")")
    }
}

pub fn all_pairs(n: usize) -> Vec<Pair> {
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..=n {
        for j in i + 1..=n {
            out.push((i as u8, j as u8));
        }
    }
    out
}

fn check_guard(n: usize, max_len: usize) -> Result<()> {
    if !(2..=MAX_PARTICLES).contains(&n) || !(1..=MAX_LENGTH).contains(&max_len) {
        return Err(Error::Guard(format!(
            "diagram enumeration needs 2 ≤ n ≤ {MAX_PARTICLES} and 1 ≤ max_len ≤ {MAX_LENGTH}, got n = {n}, max_len = {max_len}"
        )));
    }
    Ok(())
}

/// `Σ_{m=1}^{max_len} P (P − 1)^{m−1}` with `P = n(n−1)/2`.
pub fn count_diagrams(n: usize, max_len: usize) -> Result<u64> {
    check_guard(n, max_len)?;
    let p = (n * (n - 1) / 2) as u64;
    Ok((1..=max_len).map(|m| p * (p - 1).pow(m as u32 - 1)).sum())
}

/// Lazy enumeration in order of length, then lexicographically by pair index.
pub struct DiagramIter {
    n: usize,
    pairs: Vec<Pair>,
    max_len: usize,
    starred: bool,
    idx: Vec<usize>,
    done: bool,
}

impl DiagramIter {
    pub fn new(n: usize, max_len: usize, starred: bool) -> Result<Self> {
        check_guard(n, max_len)?;
        let pairs = all_pairs(n);
        Ok(DiagramIter { n, pairs, max_len, starred, idx: vec![0], done: false })
    }

    fn valid(&self) -> bool {
        self.idx.windows(2).all(|w| w[0] != w[1])
    }

    /// Advance `idx` as an odometer; grow the length when it wraps.
    fn step(&mut self) {
        let p = self.pairs.len();
        let mut k = self.idx.len();
        loop {
            if k == 0 {
                if self.idx.len() == self.max_len {
                    self.done = true;
                    return;
                }
                let m = self.idx.len() + 1;
                self.idx = vec![0; m];
                return;
            }
            k -= 1;
            self.idx[k] += 1;
            if self.idx[k] < p {
                return;
            }
            self.idx[k] = 0;
        }
    }
}

impl Iterator for DiagramIter {
    type Item = Diagram;

    fn next(&mut self) -> Option<Diagram> {
        while !self.done {
            let ok = self.valid();
            let d = ok.then(|| Diagram { n: self.n, pairs: self.idx.iter().map(|&i| self.pairs[i]).collect() });
            self.step();
            if let Some(d) = d {
                if !self.starred || d.covers_all() {
                    return Some(d);
                }
            }
        }
        None
    }
}

/// All diagrams over `n` particles of length `1..=max_len`; with `starred`, only
/// those whose pairs cover every particle.
pub fn enumerate_diagrams(n: usize, max_len: usize, starred: bool) -> Result<Vec<Diagram>> {
    let total = count_diagrams(n, max_len)?;
    if total > MAX_MATERIALIZED {
        return Err(Error::Guard(format!(
            "{total} diagrams exceed the materialization limit {MAX_MATERIALIZED}; iterate instead"
        )));
    }
    Ok(DiagramIter::new(n, max_len, starred)?.collect())
}
