//! Finitely generated abelian groups and the mod 2 reduction sequence
//! `0 → G_n ⊗ Z/2 → K(1)_n → Tor(G_{n-1}, Z/2)`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("cannot parse group `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("relation row {row} has {got} entries, expected {expected}")]
    RowLength { row: usize, got: usize, expected: usize },
    #[error("integer overflow during normalization")]
    Overflow,
}

/// `Z^rank ⊕ Z/d_1 ⊕ ... ⊕ Z/d_k` with `d_1 | d_2 | ... | d_k`, every `d_i >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FinAbGroup {
    rank: u32,
    torsion: Vec<u64>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl FinAbGroup {
    pub fn zero() -> Self {
        FinAbGroup::default()
    }

    pub fn free(rank: u32) -> Self {
        FinAbGroup { rank, torsion: vec![] }
    }

    pub fn cyclic(order: u64) -> Self {
        Self::new(0, &[order])
    }

    /// Normalizes arbitrary cyclic orders; `Z/0` counts as `Z`, `Z/1` vanishes.
    pub fn new(rank: u32, orders: &[u64]) -> Self {
        let mut rank = rank;
        let mut diag = Vec::new();
        for &d in orders {
            match d {
                0 => rank += 1,
                1 => {}
                d => diag.push(d),
            }
        }
        FinAbGroup {
            rank,
            torsion: invariant_factors(diag),
        }
    }

    /// The cokernel of the integer relation matrix `rows` on `generators` free
    /// generators; each row is one relation.
    pub fn from_relations(generators: usize, rows: &[Vec<i64>]) -> Result<Self, GroupError> {
        let mut m: Vec<Vec<i128>> = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != generators {
                return Err(GroupError::RowLength {
                    row: i,
                    got: r.len(),
                    expected: generators,
                });
            }
            m.push(r.iter().map(|&x| x as i128).collect());
        }
        let diag = smith_diagonal(&mut m, generators)?;
        let mut orders: Vec<u64> = diag.iter().map(|&d| d.unsigned_abs() as u64).collect();
        orders.extend(std::iter::repeat_n(0, generators - diag.len()));
        Ok(Self::new(0, &orders))
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn torsion(&self) -> &[u64] {
        &self.torsion
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn direct_sum(&self, other: &FinAbGroup) -> FinAbGroup {
        let mut orders = self.torsion.clone();
        orders.extend_from_slice(&other.torsion);
        Self::new(self.rank + other.rank, &orders)
    }

    /// `dim_F2 (G ⊗ Z/2)`.
    pub fn tensor_z2(&self) -> usize {
        self.rank as usize + self.torsion.iter().filter(|&&d| d % 2 == 0).count()
    }

    /// `dim_F2 Tor(G, Z/2)`.
    pub fn tor_z2(&self) -> usize {
        self.torsion.iter().filter(|&&d| d % 2 == 0).count()
    }

    /// Parses `0`, `Z`, `Z^3`, `Z/6`, and sums such as `Z^2 + Z/4 + Z/6`.
    pub fn parse(s: &str) -> Result<Self, GroupError> {
        let err = |reason: &str| GroupError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let mut rank = 0u32;
        let mut orders = Vec::new();
        for part in s.split(['+', ',']) {
            let part: String = part.chars().filter(|c| !c.is_whitespace()).collect();
            if part == "0" {
                continue;
            }
            if let Some(rest) = part.strip_prefix("Z/") {
                let d: u64 = rest.parse().map_err(|_| err("bad cyclic order"))?;
                if d == 0 {
                    return Err(err("Z/0 is ambiguous, write Z"));
                }
                orders.push(d);
            } else if part == "Z" {
                rank += 1;
            } else if let Some(rest) = part.strip_prefix("Z^") {
                rank += rest.parse::<u32>().map_err(|_| err("bad rank"))?;
            } else if part.is_empty() {
                return Err(err("empty summand"));
            } else {
                return Err(err("expected 0, Z, Z^r or Z/d"));
            }
        }
        Ok(Self::new(rank, &orders))
    }
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        write!(f, "{}", parts.join(" + "))
    }
}

/// Invariant factors of a diagonal group, each `>= 2`.
fn invariant_factors(mut diag: Vec<u64>) -> Vec<u64> {
    // repeatedly replace (a, b) by (gcd, lcm) until the chain divides
    let n = diag.len();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (diag[i], diag[j]);
            let g = gcd(a, b);
            diag[i] = g;
            diag[j] = a / g * b;
        }
    }
    diag.retain(|&d| d != 1);
    diag
}

/// Nonzero diagonal entries of the Smith form of `m` (`rows x cols`).
fn smith_diagonal(m: &mut [Vec<i128>], cols: usize) -> Result<Vec<i128>, GroupError> {
    let rows = m.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            let q = m[i][t] / m[t][t];
            if q != 0 {
                for j in t..cols {
                    m[i][j] = m[i][j].checked_sub(q.checked_mul(m[t][j]).ok_or(GroupError::Overflow)?).ok_or(GroupError::Overflow)?;
                }
            }
            clean &= m[i][t] == 0;
        }
        for j in t + 1..cols {
            let q = m[t][j] / m[t][t];
            if q != 0 {
                for row in m.iter_mut().skip(t) {
                    row[j] = row[j].checked_sub(q.checked_mul(row[t]).ok_or(GroupError::Overflow)?).ok_or(GroupError::Overflow)?;
                }
            }
            clean &= m[t][j] == 0;
        }
        if !clean {
            continue;
        }
        // the pivot must divide the rest of the block
        let p = m[t][t];
        let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| m[i][j] % p != 0));
        if let Some(i) = offender {
            for j in t..cols {
                m[t][j] = m[t][j].checked_add(m[i][j]).ok_or(GroupError::Overflow)?;
            }
            continue;
        }
        diag.push(p.abs());
        t += 1;
    }
    Ok(diag)
}

/// Bounds on `dim_F2 K(1)_n(X; H)` from the integral groups `G_n`, `G_{n-1}`.
///
/// The sequence is not known to be right exact, so only bounds are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sandwich {
    pub lower: usize,
    pub upper: usize,
}

impl Sandwich {
    pub fn exact(&self) -> Option<usize> {
        (self.lower == self.upper).then_some(self.lower)
    }

    pub fn contains(&self, value: usize) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn add(&self, other: &Sandwich) -> Sandwich {
        Sandwich {
            lower: self.lower + other.lower,
            upper: self.upper + other.upper,
        }
    }
}

impl fmt::Display for Sandwich {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

pub fn k1_sandwich(g_n: &FinAbGroup, g_n_minus_1: &FinAbGroup) -> Sandwich {
    let lower = g_n.tensor_z2();
    Sandwich {
        lower,
        upper: lower + g_n_minus_1.tor_z2(),
    }
}

/// Bounds in both parities of the 2-periodic theory, `(even, odd)`.
pub fn k1_sandwich_periodic(even: &FinAbGroup, odd: &FinAbGroup) -> (Sandwich, Sandwich) {
    (k1_sandwich(even, odd), k1_sandwich(odd, even))
}

/// Twisted integral K-homology of `S^3` with twist `k`: `0` in even degree,
/// `Z/k` in odd degree.
pub fn s3_twisted_k(k: u64) -> (FinAbGroup, FinAbGroup) {
    (FinAbGroup::zero(), FinAbGroup::new(0, &[k]))
}
