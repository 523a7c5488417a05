//! Simultaneous diagonalization: decomposition through a random combination
//! of slice quotients, for tensors whose most-square catalecticant already
//! has full decomposition rank.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exponent::{monomials_up_to, Exponent};
use crate::linalg::{c, eigen, is_defective, numerical_rank, pinv, C64};
use crate::rng::SeededRng;
use crate::tensor::{tensor_from_points, vandermonde, Decomposition, PointSet, SymTensor};

/// The `n+1` matricized slices of a tensor of order `d >= 3`, each of shape
/// `C(n+D, n) x C(n+d-1-D, n)` with `D = floor((d-1)/2)`.
#[derive(Debug, Clone)]
pub struct SliceSet {
    pub d_rows: u32,
    pub mats: Vec<DMatrix<C64>>,
}

/// Slice `j` has entry `(a, b) = phi_{a+b+e_j}`, with `e_0` contributing
/// nothing to the dehomogenized index.
pub fn slices(phi: &SymTensor) -> Result<SliceSet> {
    let d = phi.d();
    if d < 3 {
        return Err(Error::OrderTooSmall);
    }
    let n = phi.n();
    let dr = (d - 1) / 2;
    let rows = monomials_up_to(n, dr);
    let cols = monomials_up_to(n, d - 1 - dr);
    let mut mats = Vec::with_capacity(n + 1);
    for j in 0..=n {
        mats.push(DMatrix::from_fn(rows.len(), cols.len(), |a, b| {
            let mut e = rows[a].add(&cols[b]);
            if j >= 1 {
                e = e.shift(j);
            }
            phi.coeff(&e)
        }));
    }
    Ok(SliceSet { d_rows: dr, mats })
}

/// Least-squares weights for a candidate point set: solves
/// `vandermonde(points, <= d)^T lambda = coefficients` and reports the
/// relative residual alongside.
pub fn solve_weights(phi: &SymTensor, points: &PointSet) -> (Vec<C64>, f64) {
    let monos = monomials_up_to(phi.n(), phi.d());
    let zt = vandermonde(points, &monos).transpose();
    let b = phi.coeff_vector();
    let lambda = crate::linalg::lstsq(&zt, &b, 0.0);
    let residual = (&zt * &lambda - &b).norm() / b.norm().max(1e-300);
    (lambda.iter().copied().collect(), residual)
}

/// Decomposes via an eigendecomposition of `sum_j a_j S_j S_0^+` with seeded
/// Gaussian coefficients. Succeeds when the target rank is reached by the
/// most-square catalecticant; the decomposition is then unique.
pub fn jennrich_decompose(phi: &SymTensor, seed: u64, tol: f64) -> Result<Decomposition> {
    let slice_set = slices(phi)?;
    let n = phi.n();
    let s0 = &slice_set.mats[0];
    let s = numerical_rank(s0, 0.0);
    if s == 0 {
        return Ok(Decomposition {
            points: PointSet::new(DMatrix::zeros(0, n + 1)),
            weights: vec![],
        });
    }
    // restrict to the column space of S_0 so the zero eigenvalues of the
    // quotient never mix with genuine ones
    let qr = crate::linalg::pivoted_qr(s0);
    let basis = qr.q.columns(0, s).into_owned();
    let p0 = pinv(s0, 0.0);
    let quotients: Vec<DMatrix<C64>> = (1..=n).map(|j| &slice_set.mats[j] * &p0).collect();

    let mut rng = SeededRng::new(seed);
    let mut last_err = Error::DefectiveSpectrum;
    for _attempt in 0..2 {
        let coeffs: Vec<C64> = (0..n).map(|_| rng.cnormal()).collect();
        let mut g = DMatrix::<C64>::zeros(s0.nrows(), s0.nrows());
        for (j, q) in quotients.iter().enumerate() {
            g += q * coeffs[j];
        }
        let small = basis.adjoint() * &g * &basis;
        let eig = eigen(&small)?;
        if is_defective(&eig, tol) {
            last_err = Error::DefectiveSpectrum;
            continue;
        }
        let vectors = &basis * &eig.vectors;
        match read_points(&vectors, n, slice_set.d_rows) {
            Ok(points) => {
                let (weights, residual) = solve_weights(phi, &points);
                if residual > tol {
                    return Err(Error::ResidualTooLarge { residual, tol });
                }
                return Ok(Decomposition { points, weights });
            }
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// Reads dehomogenized coordinates out of eigenvectors indexed by monomials
/// of size at most `deg`: normalize at the constant monomial, then take the
/// entries at `x_1..x_n`.
pub fn read_points(vectors: &DMatrix<C64>, n: usize, deg: u32) -> Result<PointSet> {
    let monos = monomials_up_to(n, deg);
    debug_assert_eq!(monos.len(), vectors.nrows());
    let one = 0usize; // constant monomial is first in graded lex
    let coord = |i: usize| {
        monos
            .iter()
            .position(|e| *e == Exponent::unit(n, i))
            .expect("degree >= 1")
    };
    let coords: Vec<usize> = (1..=n).map(coord).collect();
    let s = vectors.ncols();
    let mut mat = DMatrix::<C64>::zeros(s, n + 1);
    for k in 0..s {
        let v: DVector<C64> = vectors.column(k).into();
        let pivot = v[one];
        if pivot.norm() < 1e-10 * v.norm() {
            return Err(Error::NormalizationFailure);
        }
        mat[(k, 0)] = c(1.0, 0.0);
        for (i, &p) in coords.iter().enumerate() {
            mat[(k, i + 1)] = v[p] / pivot;
        }
    }
    Ok(PointSet::new(mat))
}

/// Matches each recovered point to its closest generator; returns the largest
/// coordinate error over the best assignment, or `None` if sizes differ.
pub fn match_points(recovered: &PointSet, generators: &PointSet) -> Option<f64> {
    if recovered.len() != generators.len() {
        return None;
    }
    let s = recovered.len();
    let mut used = vec![false; s];
    let mut worst = 0.0f64;
    for i in 0..s {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..s {
            if used[j] {
                continue;
            }
            let mut dist = 0.0f64;
            for k in 0..recovered.mat.ncols() {
                dist = dist.max((recovered.mat[(i, k)] - generators.mat[(j, k)]).norm());
            }
            if best.map_or(true, |(_, bd)| dist < bd) {
                best = Some((j, dist));
            }
        }
        let (j, dist) = best?;
        used[j] = true;
        worst = worst.max(dist);
    }
    Some(worst)
}

/// Reconstruction residual of a decomposition against a target tensor.
pub fn reconstruction_residual(phi: &SymTensor, dec: &Decomposition) -> f64 {
    match tensor_from_points(&dec.points, &dec.weights, phi.d()) {
        Ok(t) => phi.relative_distance(&t),
        Err(_) => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random_instance;

    #[test]
    fn slices_of_rank_one() {
        let z = PointSet::from_affine(&[vec![c(2.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0)]]);
        let t = tensor_from_points(&z, &[c(1.0, 0.0)], 3).unwrap();
        let ss = slices(&t).unwrap();
        assert_eq!(ss.mats.len(), 4);
        for m in &ss.mats {
            assert!(numerical_rank(m, 0.0) <= 1);
        }
        // entries factor through z_j * z^{a+b}
        let coords = [c(1.0, 0.0), c(2.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0)];
        for (j, m) in ss.mats.iter().enumerate() {
            let expect = &ss.mats[0] * coords[j];
            assert!((m - &expect).norm() < 1e-12 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn slices_match_vandermonde_product() {
        let n = 4;
        let (points, weights) = random_instance(n, 4, 19);
        let t = tensor_from_points(&points, &weights, 3).unwrap();
        let ss = slices(&t).unwrap();
        let z1 = vandermonde(&points, &monomials_up_to(n, 1));
        for j in 0..=n {
            let lam: Vec<C64> = weights
                .iter()
                .enumerate()
                .map(|(i, w)| if j == 0 { *w } else { *w * points.mat[(i, j)] })
                .collect();
            let diag = DMatrix::from_diagonal(&DVector::from_vec(lam));
            let expect = z1.transpose() * diag * &z1;
            assert!((&ss.mats[j] - &expect).norm() < 1e-10 * expect.norm());
        }
    }

    #[test]
    fn slice_shapes_for_odd_order() {
        let t = SymTensor::zeros(2, 5);
        let ss = slices(&t).unwrap();
        assert_eq!(ss.d_rows, 2);
        for m in &ss.mats {
            assert_eq!((m.nrows(), m.ncols()), (6, 6));
        }
        assert!(matches!(
            slices(&SymTensor::zeros(2, 2)),
            Err(Error::OrderTooSmall)
        ));
    }

    #[test]
    fn recovers_single_power() {
        let z = PointSet::from_affine(&[vec![c(2.0, 0.0), c(-1.0, 0.0)]]);
        let t = tensor_from_points(&z, &[c(1.0, 0.0)], 3).unwrap();
        let dec = jennrich_decompose(&t, 1, 1e-8).unwrap();
        assert_eq!(dec.size(), 1);
        assert!(match_points(&dec.points, &z).unwrap() < 1e-9);
        assert!((dec.weights[0] - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn recovers_generic_six_points() {
        let (points, weights) = random_instance(5, 6, 100);
        let t = tensor_from_points(&points, &weights, 3).unwrap();
        let dec = jennrich_decompose(&t, 2, 1e-8).unwrap();
        assert!(match_points(&dec.points, &points).unwrap() < 1e-8);
        assert!(reconstruction_residual(&t, &dec) < 1e-8);
    }

    #[test]
    fn overcomplete_rank_fails() {
        let (points, weights) = random_instance(5, 8, 200);
        let t = tensor_from_points(&points, &weights, 3).unwrap();
        let err = jennrich_decompose(&t, 3, 1e-8).unwrap_err();
        assert!(matches!(
            err,
            Error::DefectiveSpectrum | Error::ResidualTooLarge { .. }
        ));
    }

    #[test]
    fn solve_weights_examples() {
        let z = PointSet::from_affine(&[vec![c(1.5, 0.0), c(0.5, 0.0)]]);
        let t3 = tensor_from_points(&z, &[c(3.0, 0.0)], 4).unwrap();
        let (w, r) = solve_weights(&t3, &z);
        assert!((w[0] - c(3.0, 0.0)).norm() < 1e-10);
        assert!(r < 1e-12);

        let (points, weights) = random_instance(3, 4, 77);
        let t = tensor_from_points(&points, &weights, 4).unwrap();
        let (w, r) = solve_weights(&t, &points);
        assert!(r < 1e-10);
        for (a, b) in w.iter().zip(&weights) {
            assert!((a - b).norm() < 1e-9);
        }

        // unrelated points: large residual, no error
        let (other, _) = random_instance(3, 4, 78);
        let (_, r) = solve_weights(&t, &other);
        assert!(r > 1e-3);
    }

    #[test]
    fn eigen_pairing_invariant() {
        // each quotient applied to a recovered point's moment vector scales
        // it by the matching coordinate
        let n = 3;
        let (points, weights) = random_instance(n, 4, 55);
        let t = tensor_from_points(&points, &weights, 3).unwrap();
        let dec = jennrich_decompose(&t, 5, 1e-8).unwrap();
        let ss = slices(&t).unwrap();
        let p0 = pinv(&ss.mats[0], 0.0);
        let monos = monomials_up_to(n, 1);
        for i in 0..dec.size() {
            let v = DVector::from_fn(monos.len(), |r, _| dec.points.eval(i, &monos[r]));
            for j in 1..=n {
                let lhs = &ss.mats[j] * &p0 * &v;
                let rhs = &v * dec.points.mat[(i, j)];
                assert!((lhs - rhs).norm() < 1e-7 * (1.0 + v.norm()));
            }
        }
    }

    #[test]
    fn slice_quotients_commute_on_column_space() {
        let n = 3;
        let (points, weights) = random_instance(n, 4, 57);
        let t = tensor_from_points(&points, &weights, 3).unwrap();
        let ss = slices(&t).unwrap();
        let p0 = pinv(&ss.mats[0], 0.0);
        let quotients: Vec<DMatrix<C64>> = (1..=n).map(|j| &ss.mats[j] * &p0).collect();
        // projector onto the column space of the base slice
        let basis = crate::linalg::colspace_basis(&ss.mats[0], 0.0);
        let proj = &basis * basis.adjoint();
        let scale = quotients.iter().map(|q| q.norm()).fold(1.0f64, f64::max);
        for i in 0..quotients.len() {
            for j in (i + 1)..quotients.len() {
                let comm = (&quotients[i] * &quotients[j] - &quotients[j] * &quotients[i]) * &proj;
                assert!(comm.norm() < 1e-9 * scale * scale, "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn permutation_equivariance() {
        let n = 3;
        let (points, weights) = random_instance(n, 3, 61);
        let t = tensor_from_points(&points, &weights, 3).unwrap();
        // swap variables x1 <-> x2 via the GL action
        let mut m = DMatrix::<C64>::identity(n + 1, n + 1);
        m.swap_rows(1, 2);
        let swapped = crate::tensor::apply_gl(&t, &m).unwrap();
        let dec = jennrich_decompose(&swapped, 9, 1e-8).unwrap();
        let mut expect = points.mat.clone();
        expect.swap_columns(1, 2);
        assert!(match_points(&dec.points, &PointSet::new(expect)).unwrap() < 1e-8);
    }
}
