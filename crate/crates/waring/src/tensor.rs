//! Symmetric tensor storage, catalecticants, Hilbert functions, regularity,
//! conciseness reduction and the GL change-of-basis action.
//!
//! A tensor of order `d` in `n+1` homogeneous variables is stored
//! dehomogenized: one coefficient per exponent of size at most `d` in the `n`
//! variables `x_1..x_n`. Coefficients are "moment" values, so a weighted
//! point set reproduces them as `phi_a = sum_i lambda_i z_i^a` with no
//! multinomial factors.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exponent::{monomials_up_to, Exponent, MonomialTable};
use crate::linalg::{c, numerical_rank, singular_values, C64};

/// Dehomogenized symmetric tensor with dense graded-lex coefficient storage.
#[derive(Debug, Clone)]
pub struct SymTensor {
    n: usize,
    d: u32,
    table: MonomialTable,
    coeffs: Vec<C64>,
}

impl SymTensor {
    pub fn zeros(n: usize, d: u32) -> Self {
        let table = MonomialTable::up_to(n, d);
        let coeffs = vec![c(0.0, 0.0); table.len()];
        SymTensor {
            n,
            d,
            table,
            coeffs,
        }
    }

    pub fn from_map(n: usize, d: u32, map: &HashMap<Exponent, C64>) -> Result<Self> {
        let mut t = SymTensor::zeros(n, d);
        for (e, v) in map {
            if e.n() != n || e.size() > d {
                return Err(Error::OutOfRange(format!(
                    "coefficient key {e} does not fit n={n}, d={d}"
                )));
            }
            t.set(e, *v);
        }
        Ok(t)
    }

    /// Tensor of the single monomial `x0^(d-|e|) * x^e` with coefficient 1.
    pub fn monomial(n: usize, d: u32, e: &Exponent) -> Self {
        let mut t = SymTensor::zeros(n, d);
        t.set(e, c(1.0, 0.0));
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Coefficient at `e`; exponents beyond degree `d` read as absent.
    pub fn coeff(&self, e: &Exponent) -> C64 {
        match self.table.position(e) {
            Some(p) => self.coeffs[p],
            None => c(0.0, 0.0),
        }
    }

    pub fn set(&mut self, e: &Exponent, v: C64) {
        let p = self
            .table
            .position(e)
            .unwrap_or_else(|| panic!("exponent {e} out of range for n={}, d={}", self.n, self.d));
        self.coeffs[p] = v;
    }

    /// Graded-lex ordered exponents of size at most `d`.
    pub fn support_table(&self) -> &MonomialTable {
        &self.table
    }

    /// Nonzero coefficients in graded-lex order.
    pub fn nonzero(&self) -> Vec<(Exponent, C64)> {
        self.table
            .list
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, v)| v.norm() != 0.0)
            .map(|(e, v)| (e.clone(), *v))
            .collect()
    }

    /// Coefficient vector in graded-lex order.
    pub fn coeff_vector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.coeffs)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &SymTensor) -> SymTensor {
        assert_eq!((self.n, self.d), (other.n, other.d));
        let mut t = self.clone();
        for (a, b) in t.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= *b;
        }
        t
    }

    /// Relative distance `|self - other| / max(|self|, 1e-300)`.
    pub fn relative_distance(&self, other: &SymTensor) -> f64 {
        self.sub(other).norm() / self.norm().max(1e-300)
    }
}

/// Rows are points in `C^{n+1}`, first coordinate expected 1 after
/// dehomogenization.
#[derive(Debug, Clone)]
pub struct PointSet {
    pub mat: DMatrix<C64>,
}

impl PointSet {
    pub fn new(mat: DMatrix<C64>) -> Self {
        assert!(mat.ncols() >= 1);
        PointSet { mat }
    }

    /// Stacks dehomogenized points given without the leading 1.
    pub fn from_affine(rows: &[Vec<C64>]) -> Self {
        let s = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        let mat = DMatrix::from_fn(
            s,
            n + 1,
            |i, j| {
                if j == 0 {
                    c(1.0, 0.0)
                } else {
                    rows[i][j - 1]
                }
            },
        );
        PointSet { mat }
    }

    pub fn len(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.mat.nrows() == 0
    }

    pub fn n(&self) -> usize {
        self.mat.ncols() - 1
    }

    /// Evaluates `z_i^e` over the dehomogenized coordinates.
    pub fn eval(&self, i: usize, e: &Exponent) -> C64 {
        let mut acc = c(1.0, 0.0);
        for (j, &a) in e.0.iter().enumerate() {
            for _ in 0..a {
                acc *= self.mat[(i, j + 1)];
            }
        }
        acc
    }

    pub fn point(&self, i: usize) -> Vec<C64> {
        (0..self.mat.ncols()).map(|j| self.mat[(i, j)]).collect()
    }
}

/// Weighted point set reproducing a tensor.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub points: PointSet,
    pub weights: Vec<C64>,
}

impl Decomposition {
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn tensor(&self, d: u32) -> Result<SymTensor> {
        tensor_from_points(&self.points, &self.weights, d)
    }
}

/// `phi_a = sum_i lambda_i z_i^a` over all sizes at most `d`.
pub fn tensor_from_points(points: &PointSet, weights: &[C64], d: u32) -> Result<SymTensor> {
    if weights.len() != points.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} points",
            weights.len(),
            points.len()
        )));
    }
    let n = points.n();
    let mut t = SymTensor::zeros(n, d);
    for (pos, e) in t.table.list.clone().iter().enumerate() {
        let mut acc = c(0.0, 0.0);
        for (i, w) in weights.iter().enumerate() {
            acc += *w * points.eval(i, e);
        }
        t.coeffs[pos] = acc;
    }
    Ok(t)
}

/// `s x |S|` matrix with entry `(i, a) = z_i^a` over dehomogenized points.
pub fn vandermonde(points: &PointSet, monomials: &[Exponent]) -> DMatrix<C64> {
    DMatrix::from_fn(points.len(), monomials.len(), |i, j| {
        points.eval(i, &monomials[j])
    })
}

/// The `k`-th catalecticant: rows indexed by sizes at most `d-k`, columns by
/// sizes at most `k`, entry `(a, b) = phi_{a+b}`.
pub fn catalecticant(phi: &SymTensor, k: u32) -> Result<DMatrix<C64>> {
    if k > phi.d() {
        return Err(Error::OutOfRange(format!(
            "catalecticant index {k} exceeds order {}",
            phi.d()
        )));
    }
    let rows = monomials_up_to(phi.n(), phi.d() - k);
    let cols = monomials_up_to(phi.n(), k);
    Ok(DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        phi.coeff(&rows[i].add(&cols[j]))
    }))
}

/// Numerical ranks of all catalecticants, `k = 0..=d`.
pub fn hilbert_function(phi: &SymTensor, tol: f64) -> Vec<usize> {
    (0..=phi.d())
        .map(|k| numerical_rank(&catalecticant(phi, k).expect("k <= d"), tol))
        .collect()
}

/// Smallest `k` at which the degree-`k` Vandermonde matrix reaches full row
/// rank `s`.
pub fn regularity(points: &PointSet, tol: f64) -> Result<u32> {
    if points.is_empty() {
        return Err(Error::OutOfRange("empty point set".into()));
    }
    let s = points.len();
    for k in 0..=(s as u32) {
        let m = vandermonde(points, &monomials_up_to(points.n(), k));
        if numerical_rank(&m, tol) == s {
            return Ok(k);
        }
    }
    Err(Error::Unreachable)
}

/// Essential-variable count, an orthonormal basis of the `Cat_1` row space
/// and the tensor re-expressed in that basis (truncated to the essential
/// coordinates). When the tensor is concise the input is returned unchanged.
pub fn essential_vars(phi: &SymTensor, tol: f64) -> Result<(usize, DMatrix<C64>, SymTensor)> {
    let (count, full, reduced) = concise_reduction(phi, tol)?;
    let basis = full.rows(0, count).into_owned();
    Ok((count, basis, reduced))
}

/// Conciseness reduction with the full rotating unitary: the first `count`
/// rows span the `Cat_1` row space, and the reduced tensor is the rotation
/// truncated to the essential coordinates. Concise inputs return the
/// identity rotation and the tensor unchanged.
pub fn concise_reduction(phi: &SymTensor, tol: f64) -> Result<(usize, DMatrix<C64>, SymTensor)> {
    let cat1 = catalecticant(phi, 1)?;
    let count = numerical_rank(&cat1, tol);
    if count == phi.n() + 1 || count == 0 {
        return Ok((
            count,
            DMatrix::identity(phi.n() + 1, phi.n() + 1),
            phi.clone(),
        ));
    }
    // orthonormal row-space basis: leading pivoted-QR columns of the transpose
    let qr = crate::linalg::pivoted_qr(&cat1.transpose());
    let basis = qr.q.columns(0, count).adjoint().into_owned();
    let full = complete_unitary(&basis, phi.n() + 1);
    let rotated = apply_gl(phi, &full)?;
    let reduced = truncate_vars(&rotated, count.saturating_sub(1));
    Ok((count, full, reduced))
}

fn complete_unitary(rows: &DMatrix<C64>, dim: usize) -> DMatrix<C64> {
    let mut basis: Vec<DVector<C64>> = (0..rows.nrows()).map(|i| rows.row(i).adjoint()).collect();
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for (i, b) in basis.iter().enumerate() {
        out.row_mut(i).copy_from(&b.adjoint());
    }
    let mut next = rows.nrows();
    for j in 0..dim {
        if next == dim {
            break;
        }
        let mut v = DVector::<C64>::zeros(dim);
        v[j] = c(1.0, 0.0);
        for _ in 0..2 {
            for q in &basis {
                let coef = q.dotc(&v);
                v -= q * coef;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= c(norm, 0.0);
            out.row_mut(next).copy_from(&v.adjoint());
            basis.push(v);
            next += 1;
        }
    }
    assert_eq!(next, dim, "unitary completion failed");
    out
}

/// Keeps coefficients supported on the first `n_new` dehomogenized variables.
fn truncate_vars(phi: &SymTensor, n_new: usize) -> SymTensor {
    let mut out = SymTensor::zeros(n_new, phi.d());
    for e in monomials_up_to(n_new, phi.d()) {
        let mut padded = e.0.clone();
        padded.resize(phi.n(), 0);
        out.set(&e, phi.coeff(&Exponent(padded)));
    }
    out
}

/// Induced action of an invertible `(n+1) x (n+1)` matrix on coefficients:
/// if `phi = sum lambda_i z_i^{(x)d}` then the result is
/// `sum lambda_i (M z_i)^{(x)d}`, computed without any decomposition.
pub fn apply_gl(phi: &SymTensor, m: &DMatrix<C64>) -> Result<SymTensor> {
    let n = phi.n();
    let d = phi.d();
    assert_eq!(m.nrows(), n + 1);
    assert_eq!(m.ncols(), n + 1);
    let sv = singular_values(m);
    if sv.min() <= (n as f64 + 1.0) * f64::EPSILON * sv.max() {
        return Err(Error::Singular);
    }
    let mut out = SymTensor::zeros(n, d);
    for e in out.table.list.clone() {
        // homogeneous exponent of the output coefficient
        let mut hom = vec![d - e.size()];
        hom.extend_from_slice(&e.0);
        // expand prod_t (row_t . x)^{hom_t} over homogeneous degree-d exponents
        let mut poly: HashMap<Vec<u32>, C64> = HashMap::new();
        poly.insert(vec![0u32; n + 1], c(1.0, 0.0));
        for (t, &reps) in hom.iter().enumerate() {
            for _ in 0..reps {
                let mut next: HashMap<Vec<u32>, C64> = HashMap::with_capacity(poly.len() * (n + 1));
                for (expo, coef) in &poly {
                    for s in 0..=n {
                        let w = m[(t, s)];
                        if w.norm() == 0.0 {
                            continue;
                        }
                        let mut e2 = expo.clone();
                        e2[s] += 1;
                        *next.entry(e2).or_insert(c(0.0, 0.0)) += *coef * w;
                    }
                }
                poly = next;
            }
        }
        // contract against phi: the homogeneous entry at B reads the stored
        // dehomogenized coefficient at (B_1..B_n)
        let mut acc = c(0.0, 0.0);
        for (expo, coef) in &poly {
            acc += *coef * phi.coeff(&Exponent(expo[1..].to_vec()));
        }
        out.set(&e, acc);
    }
    Ok(out)
}

/// Seeded random invertible matrix for basis randomization, identity plus a
/// small Gaussian perturbation to keep conditioning mild.
pub fn random_gl(n_plus_1: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = crate::rng::SeededRng::new(seed);
    let mut m = DMatrix::<C64>::identity(n_plus_1, n_plus_1);
    for i in 0..n_plus_1 {
        for j in 0..n_plus_1 {
            m[(i, j)] += rng.cnormal() * c(0.35, 0.0);
        }
    }
    m
}

/// Seeded generic points (dehomogenized) and weights.
pub fn random_instance(n: usize, s: usize, seed: u64) -> (PointSet, Vec<C64>) {
    let mut rng = crate::rng::SeededRng::new(seed);
    let mat = DMatrix::from_fn(
        s,
        n + 1,
        |_, j| {
            if j == 0 {
                c(1.0, 0.0)
            } else {
                rng.cnormal()
            }
        },
    );
    let weights = (0..s).map(|_| rng.cnormal()).collect();
    (PointSet::new(mat), weights)
}
