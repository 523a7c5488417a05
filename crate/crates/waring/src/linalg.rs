//! Dense complex linear algebra helpers: numerical rank, pseudoinverse,
//! least squares, nullspaces and a nonsymmetric eigensolver built on the
//! complex Schur form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Singular values of `m`, descending.
pub fn singular_values(m: &DMatrix<C64>) -> DVector<f64> {
    m.clone().svd(false, false).singular_values
}

fn rank_threshold(m: &DMatrix<C64>, tol: f64, sigma_max: f64) -> f64 {
    let rel = if tol > 0.0 {
        tol
    } else {
        m.nrows().max(m.ncols()) as f64 * f64::EPSILON
    };
    rel * sigma_max
}

/// Count of singular values above the threshold. `tol` is relative to the
/// largest singular value; `tol = 0` selects `max(rows, cols) * eps`.
pub fn numerical_rank(m: &DMatrix<C64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = singular_values(m);
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    let thresh = rank_threshold(m, tol, smax);
    sv.iter().filter(|&&s| s > thresh).count()
}

/// Householder QR with column pivoting: `A P = Q R` with `Q` unitary `m x m`
/// and `|R[k,k]|` nonincreasing. `perm[j]` is the original column placed at
/// position `j`.
pub struct PivotedQr {
    pub q: DMatrix<C64>,
    pub r: DMatrix<C64>,
    pub perm: Vec<usize>,
}

pub fn pivoted_qr(a: &DMatrix<C64>) -> PivotedQr {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut q = DMatrix::<C64>::identity(m, m);
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);
    for k in 0..steps {
        // pivot: remaining column with the largest trailing norm
        let mut best = k;
        let mut best_norm = 0.0f64;
        for j in k..n {
            let norm: f64 = (k..m).map(|i| r[(i, j)].norm_sqr()).sum();
            if norm > best_norm {
                best_norm = norm;
                best = j;
            }
        }
        if best != k {
            r.swap_columns(k, best);
            perm.swap(k, best);
        }
        if best_norm == 0.0 {
            break;
        }
        // complex Householder reflector zeroing below the diagonal
        let x0 = r[(k, k)];
        let xnorm = best_norm.sqrt();
        let phase = if x0.norm() > 0.0 {
            x0 / c(x0.norm(), 0.0)
        } else {
            c(1.0, 0.0)
        };
        let alpha = -phase * c(xnorm, 0.0);
        let mut v = DVector::<C64>::zeros(m - k);
        for i in k..m {
            v[i - k] = r[(i, k)];
        }
        v[0] -= alpha;
        let vn = v.norm_squared();
        if vn > 0.0 {
            let beta = c(2.0 / vn, 0.0);
            // R[k.., k..] -= beta v (v^H R)
            for j in k..n {
                let mut dot = c(0.0, 0.0);
                for i in k..m {
                    dot += v[i - k].conj() * r[(i, j)];
                }
                let s = beta * dot;
                for i in k..m {
                    r[(i, j)] -= v[i - k] * s;
                }
            }
            // Q[.., k..] -= beta (Q v) v^H
            for i in 0..m {
                let mut dot = c(0.0, 0.0);
                for l in k..m {
                    dot += q[(i, l)] * v[l - k];
                }
                let s = beta * dot;
                for l in k..m {
                    q[(i, l)] -= s * v[l - k].conj();
                }
            }
        }
        r[(k, k)] = alpha;
        for i in (k + 1)..m {
            r[(i, k)] = c(0.0, 0.0);
        }
    }
    PivotedQr { q, r, perm }
}

impl PivotedQr {
    /// Numerical rank from the pivoted diagonal of `R`.
    pub fn rank(&self, tol: f64) -> usize {
        let steps = self.r.nrows().min(self.r.ncols());
        if steps == 0 {
            return 0;
        }
        let top = self.r[(0, 0)].norm();
        if top == 0.0 {
            return 0;
        }
        let rel = if tol > 0.0 {
            tol
        } else {
            self.r.nrows().max(self.r.ncols()) as f64 * f64::EPSILON
        };
        (0..steps)
            .take_while(|&k| self.r[(k, k)].norm() > rel * top)
            .count()
    }
}

/// Basic least-squares solution of `A x = b` via the pivoted QR: free
/// (non-pivot) coordinates are set to zero.
pub fn lstsq(a: &DMatrix<C64>, b: &DVector<C64>, tol: f64) -> DVector<C64> {
    let qr = pivoted_qr(a);
    let rank = qr.rank(tol);
    let n = a.ncols();
    let y = qr.q.adjoint() * b;
    let mut z = DVector::<C64>::zeros(n);
    for k in (0..rank).rev() {
        let mut s = y[k];
        for j in (k + 1)..rank {
            s -= qr.r[(k, j)] * z[j];
        }
        z[k] = s / qr.r[(k, k)];
    }
    let mut x = DVector::<C64>::zeros(n);
    for (pos, &orig) in qr.perm.iter().enumerate() {
        x[orig] = z[pos];
    }
    x
}

/// Pseudoinverse substitute built column-by-column from the QR least-squares
/// solve; agrees with the Moore-Penrose inverse on the row space.
pub fn pinv(m: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    let qr = pivoted_qr(m);
    let rank = qr.rank(tol);
    let (rows, n) = m.shape();
    let qh = qr.q.adjoint();
    let mut out = DMatrix::<C64>::zeros(n, rows);
    for col in 0..rows {
        let y = qh.column(col);
        let mut z = DVector::<C64>::zeros(n);
        for k in (0..rank).rev() {
            let mut s = y[k];
            for j in (k + 1)..rank {
                s -= qr.r[(k, j)] * z[j];
            }
            z[k] = s / qr.r[(k, k)];
        }
        for (pos, &orig) in qr.perm.iter().enumerate() {
            out[(orig, col)] = z[pos];
        }
    }
    out
}

/// Orthonormal basis of the column space (first `rank` pivoted Q columns).
pub fn colspace_basis(m: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    let qr = pivoted_qr(m);
    let rank = qr.rank(tol);
    qr.q.columns(0, rank).into_owned()
}

/// Orthonormal basis of the (numerical) right nullspace, one column per
/// vector, from the pivoted QR: each free column contributes the solution of
/// `R11 w = -R12[:, f]`.
pub fn nullspace(m: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    let n = m.ncols();
    let qr = pivoted_qr(m);
    let rank = qr.rank(tol);
    let mut basis: Vec<DVector<C64>> = Vec::with_capacity(n - rank);
    for f in rank..n {
        let mut w = DVector::<C64>::zeros(rank);
        for k in (0..rank).rev() {
            let mut s = -qr.r[(k, f)];
            for j in (k + 1)..rank {
                s -= qr.r[(k, j)] * w[j];
            }
            w[k] = s / qr.r[(k, k)];
        }
        let mut v = DVector::<C64>::zeros(n);
        for k in 0..rank {
            v[qr.perm[k]] = w[k];
        }
        v[qr.perm[f]] = c(1.0, 0.0);
        // orthonormalize against the running basis
        for _ in 0..2 {
            for q in &basis {
                let coef = q.dotc(&v);
                v -= q * coef;
            }
        }
        let norm = v.norm();
        if norm > 1e-12 {
            v /= c(norm, 0.0);
            basis.push(v);
        }
    }
    let mut out = DMatrix::<C64>::zeros(n, basis.len());
    for (j, v) in basis.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

/// Right eigenpairs of a general complex matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    /// Unit-norm eigenvectors, one column per eigenvalue.
    pub vectors: DMatrix<C64>,
}

/// Eigendecomposition via complex Schur form plus triangular back-substitution.
pub fn eigen(m: &DMatrix<C64>) -> Result<Eigen> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let scale = m.norm().max(1.0);
    let schur =
        m.clone()
            .try_schur(f64::EPSILON * 16.0, 100_000)
            .ok_or(Error::InternalMismatch(
                "schur iteration did not converge".into(),
            ))?;
    let (q, t) = schur.unpack();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    let small = f64::EPSILON * scale;
    for k in 0..n {
        let lambda = t[(k, k)];
        values.push(lambda);
        let mut y = DVector::<C64>::zeros(n);
        y[k] = c(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = c(0.0, 0.0);
            for l in (j + 1)..=k {
                s += t[(j, l)] * y[l];
            }
            let mut den = t[(j, j)] - lambda;
            if den.norm() < small {
                den = c(small, 0.0);
            }
            y[j] = -s / den;
        }
        let mut v = &q * y;
        let norm = v.norm();
        v /= c(norm, 0.0);
        vectors.set_column(k, &v);
    }
    Ok(Eigen { values, vectors })
}

/// True when the eigensystem shows a (near-)repeated eigenvalue whose
/// eigenvectors have collapsed onto each other, i.e. a defective matrix.
pub fn is_defective(eig: &Eigen, tol: f64) -> bool {
    let n = eig.values.len();
    if n < 2 {
        return false;
    }
    let scale = eig
        .values
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let cluster = tol.max(1e-6);
    for i in 0..n {
        for j in (i + 1)..n {
            if (eig.values[i] - eig.values[j]).norm() < cluster * scale {
                let overlap = eig.vectors.column(i).dotc(&eig.vectors.column(j)).norm();
                if 1.0 - overlap < cluster {
                    return true;
                }
            }
        }
    }
    // hard floor on the independence of the whole eigenbasis
    let smin = singular_values(&eig.vectors).min();
    smin < 1e-8
}

/// Greedy rank-revealing column selection: scans `candidates` (column indices
/// into `m`) in the given order and keeps those that enlarge the span of the
/// previously kept columns. Earlier candidates win ties, so a graded-lex
/// candidate order yields the graded-lex-least independent subset. A single
/// pass suffices: extending the basis only shrinks later residuals.
pub fn select_independent_columns(
    m: &DMatrix<C64>,
    candidates: &[usize],
    basis: &mut Vec<DVector<C64>>,
    thresh: f64,
) -> Vec<usize> {
    let mut kept = Vec::new();
    for &col in candidates {
        let mut v: DVector<C64> = m.column(col).into();
        // two-pass Gram-Schmidt
        for _ in 0..2 {
            for q in basis.iter() {
                let coef = q.dotc(&v);
                v -= q * coef;
            }
        }
        let norm = v.norm();
        if norm > thresh {
            kept.push(col);
            basis.push(v / c(norm, 0.0));
        }
    }
    kept
}
