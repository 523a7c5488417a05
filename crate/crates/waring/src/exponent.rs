//! Exponent vectors and graded lexicographic monomial enumeration.
//!
//! Exponents are dehomogenized: an `Exponent` holds the powers of `x_1..x_n`
//! and the power of `x_0` is implicit as `d - size`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

/// Exponent vector of a monomial in `n` variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exponent(pub Vec<u32>);

impl Exponent {
    pub fn zero(n: usize) -> Self {
        Exponent(vec![0; n])
    }

    /// Unit exponent `e_i` with `i` 1-based.
    pub fn unit(n: usize, i: usize) -> Self {
        assert!((1..=n).contains(&i));
        let mut v = vec![0; n];
        v[i - 1] = 1;
        Exponent(v)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// Total degree.
    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Multiplies by `x_i` (1-based).
    pub fn shift(&self, i: usize) -> Exponent {
        let mut v = self.0.clone();
        v[i - 1] += 1;
        Exponent(v)
    }

    pub fn divides(&self, other: &Exponent) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &Exponent) -> Option<Exponent> {
        if other.divides(self) {
            Some(Exponent(
                self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
            ))
        } else {
            None
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.size() == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if a == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, a)?;
            }
        }
        Ok(())
    }
}

/// Graded lexicographic order: total degree first, then lexicographic with
/// `x_1 > x_2 > ... > x_n`, larger variables first within a degree.
/// This lists e.g. `1, x1, x2, x1^2, x1*x2, x2^2, ...`.
impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.size().cmp(&other.size()) {
            Ordering::Equal => {
                for (a, b) in self.0.iter().zip(&other.0) {
                    match b.cmp(a) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            }
            ord => ord,
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponents of size at most `k` in `n` variables, graded-lex sorted.
/// The returned list has length `C(n+k, n)`.
pub fn monomials_up_to(n: usize, k: u32) -> Vec<Exponent> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(binomial(n as u64 + k as u64, n as u64) as usize);
    for deg in 0..=k {
        let mut cur = vec![0u32; n];
        gen_degree(&mut out, &mut cur, 0, deg);
    }
    out
}

fn gen_degree(out: &mut Vec<Exponent>, cur: &mut Vec<u32>, pos: usize, rem: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = rem;
        out.push(Exponent(cur.clone()));
        cur[pos] = 0;
        return;
    }
    // larger power on the earlier variable comes first
    for a in (0..=rem).rev() {
        cur[pos] = a;
        gen_degree(out, cur, pos + 1, rem - a);
        cur[pos] = 0;
    }
}

/// Ordered monomial list with O(1) position lookup.
#[derive(Debug, Clone)]
pub struct MonomialTable {
    pub list: Vec<Exponent>,
    pos: HashMap<Exponent, usize>,
}

impl MonomialTable {
    pub fn up_to(n: usize, k: u32) -> Self {
        Self::from_list(monomials_up_to(n, k))
    }

    pub fn from_list(list: Vec<Exponent>) -> Self {
        let pos = list
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        MonomialTable { list, pos }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn position(&self, e: &Exponent) -> Option<usize> {
        self.pos.get(e).copied()
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.pos.contains_key(e)
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Binomial coefficient with a real upper argument, `x(x-1)...(x-k+1)/k!`.
/// Matches `binomial` on integer inputs.
pub fn binomial_real(x: f64, k: u64) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (x - i as f64) / (i as f64 + 1.0);
    }
    acc
}
