//! Exact finite-field rank certificates: the linear-relation coefficient
//! matrix is rebuilt from explicit point sets over F_p and its rank computed
//! by exact Gaussian elimination. Full column rank over F_p implies full
//! column rank over C for the same symbolic matrix.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exponent::{monomials_up_to, Exponent};
use crate::hankel::MonomialBasis;
use crate::linsys::{build_recipe, MinorId};
use crate::rng::SeededRng;

/// Default modulus: Mersenne prime 2^31 - 1; products fit in 64 bits before
/// reduction.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Arithmetic mod an odd prime.
#[derive(Debug, Clone, Copy)]
pub struct Fp {
    pub p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Fp { p })
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        b %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0);
        self.pow(a, self.p - 2)
    }

    /// Reduction of a signed integer.
    pub fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
}

/// Row-major matrix of residues.
#[derive(Debug, Clone)]
pub struct FFMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl FFMatrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        FFMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.p;
    }
}

/// Exact rank over F_p by Gaussian elimination with modular inverses.
pub fn ff_rank(m: &FFMatrix) -> Result<usize> {
    let f = Fp::new(m.p)?;
    let mut a = m.data.clone();
    let (rows, cols) = (m.rows, m.cols);
    let at = |a: &Vec<u64>, i: usize, j: usize| a[i * cols + j];
    let mut rank = 0usize;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let pivot = match (rank..rows).find(|&r| at(&a, r, col) != 0) {
            Some(r) => r,
            None => continue,
        };
        if pivot != rank {
            for j in 0..cols {
                a.swap(rank * cols + j, pivot * cols + j);
            }
        }
        let inv = f.inv(at(&a, rank, col));
        for r in (rank + 1)..rows {
            let factor = f.mul(at(&a, r, col), inv);
            if factor == 0 {
                continue;
            }
            for j in col..cols {
                let v = f.sub(at(&a, r, j), f.mul(factor, at(&a, rank, j)));
                a[r * cols + j] = v;
            }
        }
        rank += 1;
    }
    Ok(rank)
}

/// Exact determinant of a square residue matrix.
fn ff_det(f: &Fp, mat: &mut [Vec<u64>]) -> u64 {
    let n = mat.len();
    let mut det = 1u64;
    for col in 0..n {
        let pivot = match (col..n).find(|&r| mat[r][col] != 0) {
            Some(r) => r,
            None => return 0,
        };
        if pivot != col {
            mat.swap(col, pivot);
            det = f.sub(0, det);
        }
        det = f.mul(det, mat[col][col]);
        let inv = f.inv(mat[col][col]);
        for r in (col + 1)..n {
            let factor = f.mul(mat[r][col], inv);
            if factor == 0 {
                continue;
            }
            for j in col..n {
                mat[r][j] = f.sub(mat[r][j], f.mul(factor, mat[col][j]));
            }
        }
    }
    det
}

/// Points over F_p, first column all ones.
#[derive(Debug, Clone)]
pub struct FFPointSet {
    pub p: u64,
    pub points: Vec<Vec<u64>>,
}

impl FFPointSet {
    /// Seeded uniform draw of `r` points in `F_p^{n+1}` with leading 1,
    /// nonzero affine part, pairwise distinct rows.
    pub fn random(n: usize, r: usize, p: u64, seed: u64) -> Result<Self> {
        Fp::new(p)?;
        let mut rng = SeededRng::new(seed);
        let mut points: Vec<Vec<u64>> = Vec::with_capacity(r);
        while points.len() < r {
            let mut row = vec![1u64];
            for _ in 0..n {
                row.push(rng.below(p));
            }
            if points.iter().all(|q| q != &row) {
                points.push(row);
            }
        }
        Ok(FFPointSet { p, points })
    }

    fn eval(&self, f: &Fp, i: usize, e: &Exponent) -> u64 {
        let mut acc = 1u64;
        for (j, &a) in e.0.iter().enumerate() {
            if a > 0 {
                acc = f.mul(acc, f.pow(self.points[i][j + 1], a as u64));
            }
        }
        acc
    }
}

/// Tensor values `sum_i z_i^e mod p` (unit weights) for all sizes at most 4.
fn ff_tensor(f: &Fp, points: &FFPointSet, n: usize) -> HashMap<Exponent, u64> {
    let mut map = HashMap::new();
    for e in monomials_up_to(n, 4) {
        let mut acc = 0u64;
        for i in 0..points.points.len() {
            acc = f.add(acc, points.eval(f, i, &e));
        }
        map.insert(e, acc);
    }
    map
}

/// Shared assembly core: evaluates the linear-system recipe over F_p for the
/// first-`r` graded-lex basis. Returns the matrix with all linear rows or
/// only the single-determinant rows.
fn ff_assemble_inner(n: usize, r: usize, points: &FFPointSet, e1_only: bool) -> Result<FFMatrix> {
    let f = Fp::new(points.p)?;
    let basis = MonomialBasis::first_r(n, r);
    let phi = ff_tensor(&f, points, n);
    let coeff = |e: &Exponent| -> u64 { *phi.get(e).expect("size at most 4") };
    let recipe = build_recipe(&basis, n, 4);
    // principal block determinant must be nonzero
    let block_of = |cols: &[Exponent]| -> Vec<Vec<u64>> {
        basis
            .exponents()
            .iter()
            .map(|row| cols.iter().map(|col| coeff(&row.add(col))).collect())
            .collect()
    };
    let mut principal_mat = block_of(basis.exponents());
    let principal = ff_det(&f, &mut principal_mat);
    if principal == 0 {
        return Err(Error::SingularPrincipalBlock);
    }
    let mut minor_cache: HashMap<(usize, Exponent), u64> = HashMap::new();
    let mut eval_minor = |mid: &MinorId| -> u64 {
        match mid {
            MinorId::Principal => principal,
            MinorId::Bordered { removed, border } => *minor_cache
                .entry((*removed, border.clone()))
                .or_insert_with(|| {
                    let mut cols: Vec<Exponent> = basis.exponents().to_vec();
                    cols.remove(*removed);
                    cols.push(border.clone());
                    let mut mat = block_of(&cols);
                    ff_det(&f, &mut mat)
                }),
        }
    };
    let nrows = if e1_only {
        recipe.e1_rows
    } else {
        recipe.rows.len()
    };
    let mut a = FFMatrix::zeros(points.p, nrows, recipe.vars.len());
    for (row, rr) in recipe.rows.iter().take(nrows).enumerate() {
        for (pos, sign, mid) in &rr.terms {
            let v = eval_minor(mid);
            let idx = row * a.cols + pos;
            a.data[idx] = if *sign >= 0 {
                f.add(a.data[idx], v)
            } else {
                f.sub(a.data[idx], v)
            };
        }
    }
    Ok(a)
}

/// The full linear coefficient matrix over F_p for the first-`r` basis and
/// the tensor `sum z_i^{(x)4}`.
pub fn ff_assemble(n: usize, r: usize, points: &FFPointSet) -> Result<FFMatrix> {
    ff_assemble_inner(n, r, points, false)
}

/// Same matrix restricted to the single-determinant rows.
pub fn ff_assemble_e1(n: usize, r: usize, points: &FFPointSet) -> Result<FFMatrix> {
    ff_assemble_inner(n, r, points, true)
}

/// Re-verifiable full-column-rank witness.
#[derive(Debug, Clone)]
pub struct FfCertificate {
    pub p: u64,
    pub n: usize,
    pub r: usize,
    pub points: Vec<Vec<u64>>,
    pub rank: usize,
    pub columns: usize,
}

/// Outcome of a format verification.
#[derive(Debug, Clone)]
pub enum FormatVerdict {
    /// The matrix is full column rank over F_p, hence over C: the format is
    /// efficient for generic tensors.
    FullColumnRank(FfCertificate),
    /// Rank fell short at the tested points; certifies nothing.
    Deficient { rank: usize, columns: usize },
    /// Structurally fewer equations than variables.
    NotEnoughEquations { rows: usize, columns: usize },
}

/// Point source for a verification run.
pub enum PointSource {
    Seed(u64),
    Explicit(FFPointSet),
}

fn verify_with(n: usize, r: usize, points: &FFPointSet, e1_only: bool) -> Result<FormatVerdict> {
    let a = if e1_only {
        ff_assemble_e1(n, r, points)?
    } else {
        ff_assemble(n, r, points)?
    };
    if a.rows < a.cols {
        return Ok(FormatVerdict::NotEnoughEquations {
            rows: a.rows,
            columns: a.cols,
        });
    }
    let rank = ff_rank(&a)?;
    if rank == a.cols {
        Ok(FormatVerdict::FullColumnRank(FfCertificate {
            p: points.p,
            n,
            r,
            points: points.points.clone(),
            rank,
            columns: a.cols,
        }))
    } else {
        Ok(FormatVerdict::Deficient {
            rank,
            columns: a.cols,
        })
    }
}

/// Verifies that format `(n, r)` has a generically full-column-rank linear
/// system, over one seeded or explicit point draw (with one redraw when the
/// principal block degenerates).
pub fn verify_format(n: usize, r: usize, p: u64, source: PointSource) -> Result<FormatVerdict> {
    verify_format_inner(n, r, p, source, false)
}

/// Same verification restricted to the single-determinant rows.
pub fn verify_format_e1(n: usize, r: usize, p: u64, source: PointSource) -> Result<FormatVerdict> {
    verify_format_inner(n, r, p, source, true)
}

fn verify_format_inner(
    n: usize,
    r: usize,
    p: u64,
    source: PointSource,
    e1_only: bool,
) -> Result<FormatVerdict> {
    if n < 2 || r <= n + 1 {
        return Err(Error::OutOfRange(format!(
            "need n >= 2 and r > n + 1, got n={n}, r={r}"
        )));
    }
    match source {
        PointSource::Explicit(points) => verify_with(n, r, &points, e1_only),
        PointSource::Seed(seed) => {
            let points = FFPointSet::random(n, r, p, seed)?;
            match verify_with(n, r, &points, e1_only) {
                Err(Error::SingularPrincipalBlock) => {
                    let retry = FFPointSet::random(n, r, p, seed.wrapping_add(0x5eed))?;
                    verify_with(n, r, &retry, e1_only)
                }
                other => other,
            }
        }
    }
}

/// Re-runs the assembly and rank computation recorded in a certificate.
pub fn reverify(cert: &FfCertificate) -> Result<bool> {
    let points = FFPointSet {
        p: cert.p,
        points: cert.points.clone(),
    };
    let a = ff_assemble(cert.n, cert.r, &points)?;
    Ok(a.cols == cert.columns && ff_rank(&a)? == cert.rank)
}

/// One row of the reproduction table.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub n: usize,
    /// largest `r` with a full-column-rank linear system over the seeds
    pub r_max: usize,
    /// largest full stratum `c` whose single-determinant rows suffice
    pub c_e1: usize,
    /// the stratum size at `c_e1`
    pub r_e1: usize,
}

/// For each `n`, walks `r` upward while some seed certifies full column
/// rank, and finds the largest full stratum verified by the
/// single-determinant rows alone.
pub fn reproduce_table(n_min: usize, n_max: usize, p: u64, seeds: &[u64]) -> Result<Vec<TableRow>> {
    let mut out = Vec::new();
    for n in n_min..=n_max {
        let try_format = |r: usize, e1_only: bool| -> Result<bool> {
            for &seed in seeds {
                match verify_format_inner(n, r, p, PointSource::Seed(seed), e1_only)? {
                    FormatVerdict::FullColumnRank(_) => return Ok(true),
                    _ => continue,
                }
            }
            Ok(false)
        };
        let mut r_max = n + 1; // simultaneous-diagonalization regime needs no system
        let mut r = n + 2;
        while try_format(r, false)? {
            r_max = r;
            r += 1;
        }
        let mut c_e1 = 0usize;
        let mut r_e1 = n + 1;
        for cstr in 1..=n {
            let r = crate::linsys::stratum_rank(n, cstr);
            if try_format(r, true)? {
                c_e1 = cstr;
                r_e1 = r;
            } else {
                break;
            }
        }
        out.push(TableRow {
            n,
            r_max,
            c_e1,
            r_e1,
        });
    }
    Ok(out)
}
