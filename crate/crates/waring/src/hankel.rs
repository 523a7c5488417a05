//! Hankel matrix with formal moment variables, valid basis search,
//! determinantal and commuting relations, multiplication matrices and the
//! eigendecomposition-based point recovery, including the binary path.

use std::collections::{BTreeSet, HashMap, HashSet};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exponent::{monomials_up_to, Exponent, MonomialTable};
use crate::jennrich::solve_weights;
use crate::linalg::{c, eigen, is_defective, singular_values, C64};
use crate::rng::SeededRng;
use crate::tensor::{catalecticant, Decomposition, SymTensor};

/// One Hankel entry: a tensor value when the index fits inside the order,
/// a formal moment variable otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum HankelEntry {
    Known(C64),
    Moment(Exponent),
}

/// The full Hankel matrix of a tensor: rows indexed by sizes at most `d`,
/// columns by sizes at most `d+1`, entry depending only on the index sum.
#[derive(Debug, Clone)]
pub struct HankelMatrix {
    tensor: SymTensor,
    pub rows: Vec<Exponent>,
    pub cols: Vec<Exponent>,
}

pub fn hankel(phi: &SymTensor) -> HankelMatrix {
    HankelMatrix {
        rows: monomials_up_to(phi.n(), phi.d()),
        cols: monomials_up_to(phi.n(), phi.d() + 1),
        tensor: phi.clone(),
    }
}

impl HankelMatrix {
    pub fn n(&self) -> usize {
        self.tensor.n()
    }

    pub fn d(&self) -> u32 {
        self.tensor.d()
    }

    pub fn tensor(&self) -> &SymTensor {
        &self.tensor
    }

    pub fn entry(&self, row: &Exponent, col: &Exponent) -> HankelEntry {
        self.entry_at(&row.add(col))
    }

    pub fn entry_at(&self, sum: &Exponent) -> HankelEntry {
        if sum.size() <= self.tensor.d() {
            HankelEntry::Known(self.tensor.coeff(sum))
        } else {
            HankelEntry::Moment(sum.clone())
        }
    }

    /// Numeric block for arbitrary row/column index sets; moment entries are
    /// taken from the assignment.
    pub fn eval_block(
        &self,
        rows: &[Exponent],
        cols: &[Exponent],
        assignment: &MomentAssignment,
    ) -> Result<DMatrix<C64>> {
        let mut out = DMatrix::zeros(rows.len(), cols.len());
        for (i, r) in rows.iter().enumerate() {
            for (j, cl) in cols.iter().enumerate() {
                out[(i, j)] = match self.entry(r, cl) {
                    HankelEntry::Known(v) => v,
                    HankelEntry::Moment(e) => assignment
                        .get(&e)
                        .ok_or_else(|| Error::UnresolvedMoment(e.to_string()))?,
                };
            }
        }
        Ok(out)
    }

    /// Same as `eval_block` but unresolved moment entries read as zero.
    /// Used by the graded monomial solve, where such entries provably have
    /// identically vanishing cofactors.
    pub fn eval_block_defaulting(
        &self,
        rows: &[Exponent],
        cols: &[Exponent],
        assignment: &MomentAssignment,
    ) -> DMatrix<C64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            match self.entry(&rows[i], &cols[j]) {
                HankelEntry::Known(v) => v,
                HankelEntry::Moment(e) => assignment.get(&e).unwrap_or(c(0.0, 0.0)),
            }
        })
    }
}

/// Ordered monomial set, connected to 1, indexing principal Hankel blocks.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    table: MonomialTable,
    set: HashSet<Exponent>,
}

impl MonomialBasis {
    pub fn new(mut exponents: Vec<Exponent>) -> Self {
        exponents.sort();
        let set = exponents.iter().cloned().collect();
        MonomialBasis {
            table: MonomialTable::from_list(exponents),
            set,
        }
    }

    /// First `r` monomials of the graded lexicographic order.
    pub fn first_r(n: usize, r: usize) -> Self {
        let mut k = 0u32;
        loop {
            let m = monomials_up_to(n, k);
            if m.len() >= r {
                return MonomialBasis::new(m[..r].to_vec());
            }
            k += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn exponents(&self) -> &[Exponent] {
        &self.table.list
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.set.contains(e)
    }

    pub fn position(&self, e: &Exponent) -> Option<usize> {
        self.table.position(e)
    }

    pub fn degree(&self) -> u32 {
        self.table.list.iter().map(|e| e.size()).max().unwrap_or(0)
    }

    /// Elements of the given degree.
    pub fn layer(&self, k: u32) -> Vec<Exponent> {
        self.table
            .list
            .iter()
            .filter(|e| e.size() == k)
            .cloned()
            .collect()
    }

    /// Sizes |B_0|, |B_1|, ... up to the top degree.
    pub fn sizes_by_degree(&self) -> Vec<usize> {
        let top = self.degree();
        (0..=top).map(|k| self.layer(k).len()).collect()
    }

    /// Every element is 1 or a one-variable shift of another element.
    pub fn is_connected_to_one(&self) -> bool {
        self.table.list.iter().all(|e| {
            e.size() == 0
                || (1..=e.n()).any(|i| {
                    e.0[i - 1] > 0
                        && self
                            .set
                            .contains(&e.checked_sub(&Exponent::unit(e.n(), i)).unwrap())
                })
        })
    }

    /// The shifted index set `x_i * B`.
    pub fn shifted(&self, i: usize) -> Vec<Exponent> {
        self.table.list.iter().map(|e| e.shift(i)).collect()
    }
}

/// Values for moment variables, keyed by exponent.
#[derive(Debug, Clone, Default)]
pub struct MomentAssignment {
    values: HashMap<Exponent, C64>,
}

impl MomentAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, e: Exponent, v: C64) {
        self.values.insert(e, v);
    }

    pub fn get(&self, e: &Exponent) -> Option<C64> {
        self.values.get(e).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries sorted by exponent for deterministic output.
    pub fn sorted(&self) -> Vec<(Exponent, C64)> {
        let mut v: Vec<_> = self.values.iter().map(|(e, x)| (e.clone(), *x)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}

/// Exact set of moment variables reachable from a basis:
/// `{a + a' + e_i : a, a' in B, |a + a' + e_i| > d}`, graded-lex sorted.
pub fn moment_variables(basis: &MonomialBasis, n: usize, d: u32) -> Vec<Exponent> {
    let mut out = BTreeSet::new();
    for a in basis.exponents() {
        for b in basis.exponents() {
            let s = a.add(b);
            for i in 1..=n {
                let e = s.shift(i);
                if e.size() > d {
                    out.insert(e);
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Valid-basis search: greedy degree-by-degree column selection on the
/// most-square catalecticant, pivoting by residual norm with graded-lex
/// tie-breaking. The result is connected to 1 with the degree-wise sizes
/// matching the restricted-column ranks.
pub fn find_basis(phi: &SymTensor, tol: f64) -> Result<MonomialBasis> {
    let n = phi.n();
    let half = phi.d() / 2;
    let cat = catalecticant(phi, half)?;
    let cols = monomials_up_to(n, half);
    let col_table = MonomialTable::from_list(cols.clone());
    let smax = singular_values(&cat).max();
    if smax == 0.0 {
        // the zero tensor has the empty decomposition
        return Ok(MonomialBasis::new(vec![]));
    }
    let rel = if tol > 0.0 {
        tol
    } else {
        cat.nrows().max(cat.ncols()) as f64 * f64::EPSILON
    };
    let thresh = rel.sqrt().max(rel) * smax; // greedy pivots want a sturdier floor
    let mut basis_cols: Vec<DVector<C64>> = Vec::new();
    let mut chosen = vec![Exponent::zero(n)];
    {
        let col0: DVector<C64> = cat.column(0).into();
        let nrm = col0.norm();
        if nrm > 0.0 {
            basis_cols.push(col0 / c(nrm, 0.0));
        }
    }
    let mut prev_layer = vec![Exponent::zero(n)];
    for _k in 1..=half {
        let mut candidates = BTreeSet::new();
        for e in &prev_layer {
            for i in 1..=n {
                candidates.insert(e.shift(i));
            }
        }
        let cand: Vec<Exponent> = candidates.into_iter().collect();
        let idx: Vec<usize> = cand
            .iter()
            .map(|e| col_table.position(e).expect("candidate within degree"))
            .collect();
        let kept = crate::linalg::select_independent_columns(&cat, &idx, &mut basis_cols, thresh);
        let mut layer: Vec<Exponent> = kept.iter().map(|&p| cols[p].clone()).collect();
        layer.sort();
        chosen.extend(layer.iter().cloned());
        prev_layer = layer;
        if prev_layer.is_empty() {
            break;
        }
    }
    let basis = MonomialBasis::new(chosen);
    // the principal block must be fully specified and invertible
    let h = hankel(phi);
    let block = h.eval_block(
        basis.exponents(),
        basis.exponents(),
        &MomentAssignment::new(),
    )?;
    let sv = singular_values(&block);
    if sv.min() <= rel * sv.max() || sv.max() == 0.0 {
        return Err(Error::SingularPrincipalBlock);
    }
    Ok(basis)
}

/// Bordered matrix index sets for one determinantal relation side:
/// rows `B + {eta}`, columns `B + {theta}` with the border appended last.
fn bordered(
    basis: &MonomialBasis,
    eta: &Exponent,
    theta: &Exponent,
) -> (Vec<Exponent>, Vec<Exponent>) {
    let mut rows = basis.exponents().to_vec();
    rows.push(eta.clone());
    let mut cols = basis.exponents().to_vec();
    cols.push(theta.clone());
    (rows, cols)
}

/// Residual moduli of every determinantal relation at an assignment, plus
/// the largest determinant magnitude encountered (the natural scale).
#[derive(Debug, Clone)]
pub struct RelationResiduals {
    pub residuals: Vec<f64>,
    pub scale: f64,
}

impl RelationResiduals {
    pub fn max(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Evaluates `det H_{B+{a x_i}, B+{b x_j}} - det H_{B+{a x_j}, B+{b x_i}}`
/// over all canonical tuples `pos(a) <= pos(b)`, `i < j`. The corner entry of
/// a bordered determinant may fall outside the variable set of the basis; it
/// carries the same principal-minor coefficient on both sides of the
/// difference, so both sides read it as zero and the difference is unchanged.
pub fn determinantal_residuals(
    h: &HankelMatrix,
    basis: &MonomialBasis,
    assignment: &MomentAssignment,
) -> Result<RelationResiduals> {
    let n = h.n();
    let elems = basis.exponents();
    let mut residuals = Vec::new();
    let mut scale: f64 = 0.0;
    for (pa, a) in elems.iter().enumerate() {
        for b in &elems[pa..] {
            if a == b {
                continue; // transpose-symmetric, identically zero
            }
            for i in 1..=n {
                for j in (i + 1)..=n {
                    let (r1, c1) = bordered(basis, &a.shift(i), &b.shift(j));
                    let (r2, c2) = bordered(basis, &a.shift(j), &b.shift(i));
                    let d1 = h
                        .eval_block_defaulting(&r1, &c1, assignment)
                        .lu()
                        .determinant();
                    let d2 = h
                        .eval_block_defaulting(&r2, &c2, assignment)
                        .lu()
                        .determinant();
                    scale = scale.max(d1.norm()).max(d2.norm());
                    residuals.push((d1 - d2).norm());
                }
            }
        }
    }
    Ok(RelationResiduals {
        residuals,
        scale: scale.max(1e-300),
    })
}

/// The `n` multiplication matrices `H_{B, B_i} H_{B, B}^{-1}` at a fully
/// resolved assignment, computed by linear solves.
#[derive(Debug, Clone)]
pub struct MultiplicationMatrices {
    pub mats: Vec<DMatrix<C64>>,
}

pub fn multiplication_matrices(
    h: &HankelMatrix,
    basis: &MonomialBasis,
    assignment: &MomentAssignment,
) -> Result<MultiplicationMatrices> {
    let n = h.n();
    let principal = h.eval_block(basis.exponents(), basis.exponents(), assignment)?;
    let sv = singular_values(&principal);
    if sv.max() == 0.0 || sv.min() <= principal.nrows() as f64 * f64::EPSILON * sv.max() {
        return Err(Error::SingularPrincipalBlock);
    }
    let lu = principal.transpose().lu();
    let mut mats = Vec::with_capacity(n);
    for i in 1..=n {
        let shifted = h.eval_block(basis.exponents(), &basis.shifted(i), assignment)?;
        // M_i^T = P^{-T} S, so M_i = (solve(P^T, S))^T ... careful with sides:
        // M_i = S_i P^{-1}  <=>  P^T M_i^T = S_i^T
        let mt = lu
            .solve(&shifted.transpose())
            .ok_or(Error::SingularPrincipalBlock)?;
        mats.push(mt.transpose());
    }
    Ok(MultiplicationMatrices { mats })
}

/// Largest entry modulus over all pairwise commutators.
pub fn commuting_residuals(m: &MultiplicationMatrices) -> f64 {
    let n = m.mats.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let comm = &m.mats[i] * &m.mats[j] - &m.mats[j] * &m.mats[i];
            worst = worst.max(comm.iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
    }
    worst
}

/// Joint eigenvector extraction: eigendecompose a seeded random combination
/// of the multiplication matrices, normalize at the constant monomial, read
/// coordinates at `x_1..x_n` and cross-check against each matrix separately.
pub fn extract_decomposition(
    m: &MultiplicationMatrices,
    basis: &MonomialBasis,
    seed: u64,
    tol: f64,
) -> Result<crate::tensor::PointSet> {
    let n = m.mats.len();
    let size = basis.len();
    let mut rng = SeededRng::new(seed);
    let mut g = DMatrix::<C64>::zeros(size, size);
    for mat in &m.mats {
        g += mat * rng.cnormal();
    }
    let eig = eigen(&g)?;
    if is_defective(&eig, tol) {
        return Err(Error::Defective);
    }
    // eigenvectors live on the basis monomials; recover points
    let one_pos = basis
        .position(&Exponent::zero(basis.exponents()[0].n()))
        .ok_or(Error::NormalizationFailure)?;
    let nvars = basis.exponents()[0].n();
    let coord_pos: Vec<usize> = (1..=nvars)
        .map(|i| {
            basis
                .position(&Exponent::unit(nvars, i))
                .ok_or(Error::NormalizationFailure)
        })
        .collect::<Result<_>>()?;
    debug_assert_eq!(nvars, n);
    let mut mat = DMatrix::<C64>::zeros(size, nvars + 1);
    for k in 0..size {
        let v: DVector<C64> = eig.vectors.column(k).into();
        let pivot = v[one_pos];
        if pivot.norm() < 1e-10 * v.norm() {
            return Err(Error::NormalizationFailure);
        }
        mat[(k, 0)] = c(1.0, 0.0);
        for (i, &p) in coord_pos.iter().enumerate() {
            mat[(k, i + 1)] = v[p] / pivot;
        }
        // cross-check each coordinate against the matching eigenvalue
        let scale = m.mats.iter().map(|mm| mm.norm()).fold(1.0f64, f64::max);
        for (i, mm) in m.mats.iter().enumerate() {
            let lhs = mm * &v;
            let rhs = &v * mat[(k, i + 1)];
            if (lhs - rhs).norm() > tol.max(1e-9) * scale * v.norm() * 100.0 {
                return Err(Error::EigenvalueMismatch);
            }
        }
    }
    Ok(crate::tensor::PointSet::new(mat))
}

/// Moment-variable exponents of the binary basis `{1, x, .., x^{s-1}}`:
/// all sizes `d+1 ..= 2s-1`. Empty when `2s - 1 <= d`.
pub fn binary_moment_exponents(d: u32, s: usize) -> Vec<Exponent> {
    let top = 2 * s as u32 - 1;
    (d + 1..=top).map(|k| Exponent(vec![k])).collect()
}

/// Free parameters for a binary size-`s` attempt: seeded Gaussians or an
/// explicit assignment.
pub enum BinaryParams {
    Seed(u64),
    Explicit(MomentAssignment),
}

/// Size-`s` decomposition of a binary tensor. The only connected-to-1 basis
/// is `{1, x, .., x^{s-1}}`; moment variables beyond the order are free
/// parameters constrained only by invertibility and nondefectiveness.
pub fn binary_decompose(
    phi: &SymTensor,
    s: usize,
    params: BinaryParams,
    tol: f64,
) -> Result<Decomposition> {
    assert_eq!(phi.n(), 1, "binary path requires n = 1");
    assert!(s >= 1);
    let basis = MonomialBasis::new((0..s as u32).map(|k| Exponent(vec![k])).collect());
    let exponents = binary_moment_exponents(phi.d(), s);
    let assignment = match params {
        BinaryParams::Explicit(a) => a,
        BinaryParams::Seed(seed) => {
            let mut rng = SeededRng::new(seed);
            let mut a = MomentAssignment::new();
            for e in &exponents {
                a.set(e.clone(), rng.cnormal());
            }
            a
        }
    };
    let h = hankel(phi);
    let mats = multiplication_matrices(&h, &basis, &assignment)?;
    let points = extract_decomposition(&mats, &basis, 1, tol)?;
    let (weights, residual) = solve_weights(phi, &points);
    if residual > tol {
        return Err(Error::ResidualTooLarge { residual, tol });
    }
    Ok(Decomposition { points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jennrich::{match_points, reconstruction_residual};
    use crate::tensor::{random_instance, tensor_from_points, PointSet};

    fn binary_sextic() -> SymTensor {
        let mut t = SymTensor::zeros(1, 6);
        t.set(&Exponent(vec![1]), c(1.0, 0.0));
        t.set(&Exponent(vec![2]), c(1.0, 0.0));
        t
    }

    #[test]
    fn hankel_of_binary_sextic_matches_display() {
        let h = hankel(&binary_sextic());
        assert_eq!(h.rows.len(), 7);
        assert_eq!(h.cols.len(), 8);
        let known: Vec<f64> = (0..7)
            .map(|j| match h.entry(&Exponent(vec![0]), &Exponent(vec![j])) {
                HankelEntry::Known(v) => v.re,
                HankelEntry::Moment(_) => panic!("row 0 is fully known up to degree 6"),
            })
            .collect();
        assert_eq!(known, vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        match h.entry(&Exponent(vec![6]), &Exponent(vec![1])) {
            HankelEntry::Moment(e) => assert_eq!(e, Exponent(vec![7])),
            _ => panic!("degree 7 must be a moment variable"),
        }
    }

    #[test]
    fn hankel_known_region_matches_tensor() {
        let (points, weights) = random_instance(2, 3, 5);
        let t = tensor_from_points(&points, &weights, 4).unwrap();
        let h = hankel(&t);
        for r in &h.rows {
            for cl in &h.cols {
                let sum = r.add(cl);
                match h.entry(r, cl) {
                    HankelEntry::Known(v) => {
                        assert!(sum.size() <= 4);
                        assert_eq!(v, t.coeff(&sum));
                    }
                    HankelEntry::Moment(e) => {
                        assert!(sum.size() >= 5);
                        assert_eq!(e, sum);
                    }
                }
            }
        }
    }

    #[test]
    fn hankel_moment_exponents_by_enumeration() {
        // n = 2, d = 4: moment entries are exactly the sums of size 5..9
        let t = SymTensor::zeros(2, 4);
        let h = hankel(&t);
        let mut seen = BTreeSet::new();
        for r in &h.rows {
            for cl in &h.cols {
                if let HankelEntry::Moment(e) = h.entry(r, cl) {
                    seen.insert(e);
                }
            }
        }
        let expect: BTreeSet<Exponent> = monomials_up_to(2, 9)
            .into_iter()
            .filter(|e| e.size() >= 5)
            .collect();
        assert_eq!(seen, expect);
    }

    #[test]
    fn find_basis_binary_sextic() {
        let b = find_basis(&binary_sextic(), 0.0).unwrap();
        assert_eq!(
            b.exponents(),
            &[Exponent(vec![0]), Exponent(vec![1]), Exponent(vec![2])]
        );
        assert!(b.is_connected_to_one());
    }

    #[test]
    fn find_basis_generic_rank_four() {
        let (points, weights) = random_instance(2, 4, 91);
        let t = tensor_from_points(&points, &weights, 4).unwrap();
        let b = find_basis(&t, 0.0).unwrap();
        let names: Vec<String> = b.exponents().iter().map(|e| e.to_string()).collect();
        assert_eq!(names, vec!["1", "x1", "x2", "x1^2"]);
    }

    #[test]
    fn find_basis_skips_dependent_columns() {
        // seven points with the last coordinate zero on the first six force
        // the search off the first-r monomials
        let n = 3;
        let mut rng = SeededRng::new(123);
        let mut mat = DMatrix::<C64>::zeros(7, n + 1);
        for i in 0..7 {
            mat[(i, 0)] = c(1.0, 0.0);
            for j in 1..=n {
                mat[(i, j)] = if j == 3 && i < 6 {
                    c(0.0, 0.0)
                } else {
                    rng.cnormal()
                };
            }
        }
        let weights = vec![c(1.0, 0.0); 7];
        let t = tensor_from_points(&PointSet::new(mat), &weights, 4).unwrap();
        let b = find_basis(&t, 0.0).unwrap();
        let names: Vec<String> = b.exponents().iter().map(|e| e.to_string()).collect();
        assert_eq!(names, vec!["1", "x1", "x2", "x3", "x1^2", "x1*x2", "x2^2"]);
        assert!(b.is_connected_to_one());
    }

    #[test]
    fn find_basis_monomial_is_singular() {
        // the constant column of a monomial catalecticant vanishes, so the
        // principal block cannot be inverted: the caller must switch to the
        // monomial path
        let t = SymTensor::monomial(2, 4, &Exponent(vec![1, 2]));
        assert!(matches!(
            find_basis(&t, 0.0),
            Err(Error::SingularPrincipalBlock)
        ));
    }

    #[test]
    fn basis_size_identity_against_direct_ranks() {
        for seed in [3u64, 8, 21] {
            let (points, weights) = random_instance(3, 6, seed);
            let t = tensor_from_points(&points, &weights, 4).unwrap();
            let b = find_basis(&t, 0.0).unwrap();
            let cat = catalecticant(&t, 2).unwrap();
            let cols = monomials_up_to(3, 2);
            let sizes = b.sizes_by_degree();
            for k in 0..sizes.len() {
                let upto: usize = sizes[..=k].iter().sum();
                let keep: Vec<usize> = cols
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.size() <= k as u32)
                    .map(|(i, _)| i)
                    .collect();
                let sub = cat.select_columns(keep.iter());
                assert_eq!(crate::linalg::numerical_rank(&sub, 0.0), upto);
            }
        }
    }

    #[test]
    fn moment_variable_sets() {
        // low-degree basis needs no variables at all
        let b = MonomialBasis::first_r(2, 3);
        assert!(moment_variables(&b, 2, 4).is_empty());

        // the rank-4 first-r basis at (n, d) = (2, 4)
        let b = MonomialBasis::first_r(2, 4);
        let y = moment_variables(&b, 2, 4);
        assert_eq!(y, vec![Exponent(vec![5, 0]), Exponent(vec![4, 1])]);

        // first-(2n+1) basis: |Y| = C(n+2, 3)
        for n in 2..=6usize {
            let b = MonomialBasis::first_r(n, 2 * n + 1);
            let y = moment_variables(&b, n, 4);
            assert_eq!(y.len() as u64, crate::exponent::binomial(n as u64 + 2, 3));
        }
    }

    #[test]
    fn residuals_vanish_without_moment_variables() {
        // deg(B) small relative to d: fully known relations must hold
        let (points, weights) = random_instance(2, 3, 44);
        let t = tensor_from_points(&points, &weights, 6).unwrap();
        let b = find_basis(&t, 0.0).unwrap();
        assert!(moment_variables(&b, 2, 6).is_empty());
        let h = hankel(&t);
        let res = determinantal_residuals(&h, &b, &MomentAssignment::new()).unwrap();
        assert!(res.max() <= 1e-9 * res.scale.max(1.0));
    }

    #[test]
    fn random_assignment_breaks_relations() {
        let (points, weights) = random_instance(2, 4, 45);
        let t = tensor_from_points(&points, &weights, 4).unwrap();
        let b = find_basis(&t, 0.0).unwrap();
        let h = hankel(&t);
        let mut a = MomentAssignment::new();
        let mut rng = SeededRng::new(7);
        for e in moment_variables(&b, 2, 4) {
            a.set(e, rng.cnormal());
        }
        let res = determinantal_residuals(&h, &b, &a).unwrap();
        assert!(res.max() > 1e-3 * res.scale);
    }

    #[test]
    fn multiplication_matrix_rank_one() {
        let z = PointSet::from_affine(&[vec![c(1.7, -0.4), c(0.3, 0.9)]]);
        let t = tensor_from_points(&z, &[c(1.0, 0.0)], 4).unwrap();
        let b = MonomialBasis::new(vec![Exponent::zero(2)]);
        let h = hankel(&t);
        let m = multiplication_matrices(&h, &b, &MomentAssignment::new()).unwrap();
        assert!((m.mats[0][(0, 0)] - z.mat[(0, 1)]).norm() < 1e-12);
        assert!((m.mats[1][(0, 0)] - z.mat[(0, 2)]).norm() < 1e-12);
    }

    #[test]
    fn binary_sextic_multiplication_matrix_matches_display() {
        // at size 5 the matrix is companion-shaped; its last row carries the
        // solved moment expressions
        let t = binary_sextic();
        let s = 5;
        let basis = MonomialBasis::new((0..s).map(|k| Exponent(vec![k])).collect());
        let mut a = MomentAssignment::new();
        let (y7, y8, y9) = (c(1.3, 0.2), c(-0.4, 0.8), c(0.9, -0.1));
        a.set(Exponent(vec![7]), y7);
        a.set(Exponent(vec![8]), y8);
        a.set(Exponent(vec![9]), y9);
        let h = hankel(&t);
        let m = &multiplication_matrices(&h, &basis, &a).unwrap().mats[0];
        // upper block is a shift
        for r in 0..4 {
            for cidx in 0..5 {
                let want = if cidx == r + 1 { 1.0 } else { 0.0 };
                assert!((m[(r, cidx)] - c(want, 0.0)).norm() < 1e-10);
            }
        }
        let last: Vec<C64> = (0..5).map(|j| m[(4, j)]).collect();
        let expect = [y7, -y7, y7, y9 / y7 - y8 * y8 / (y7 * y7), y8 / y7];
        for (got, want) in last.iter().zip(expect) {
            assert!((got - want).norm() < 1e-9 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn commuting_residuals_cases() {
        // n = 1: no pairs
        let m1 = MultiplicationMatrices {
            mats: vec![DMatrix::<C64>::identity(3, 3)],
        };
        assert_eq!(commuting_residuals(&m1), 0.0);

        // valid assignment commutes
        let (points, weights) = random_instance(2, 4, 50);
        let t = tensor_from_points(&points, &weights, 4).unwrap();
        let b = find_basis(&t, 0.0).unwrap();
        let h = hankel(&t);
        // derive the true moments from the generating points
        let mut a = MomentAssignment::new();
        for e in moment_variables(&b, 2, 4) {
            let mut v = c(0.0, 0.0);
            for (i, w) in weights.iter().enumerate() {
                v += *w * points.eval(i, &e);
            }
            a.set(e, v);
        }
        let mats = multiplication_matrices(&h, &b, &a).unwrap();
        let scale = mats.mats.iter().map(|m| m.norm()).fold(1.0f64, f64::max);
        assert!(commuting_residuals(&mats) <= 1e-7 * scale * scale);

        // random matrices do not commute
        let mut rng = SeededRng::new(3);
        let bad = MultiplicationMatrices {
            mats: vec![rng.cmatrix(4, 4), rng.cmatrix(4, 4)],
        };
        assert!(commuting_residuals(&bad) > 1e-2);
    }

    #[test]
    fn binary_rank_probe_matches_example() {
        let t = binary_sextic();
        // size 3: principal block inverts but the matrix is defective
        let err = binary_decompose(&t, 3, BinaryParams::Seed(0), 1e-8).unwrap_err();
        assert!(matches!(err, Error::Defective | Error::EigenvalueMismatch));
        // size 4: the known principal block is singular
        let err = binary_decompose(&t, 4, BinaryParams::Seed(0), 1e-8).unwrap_err();
        assert!(matches!(err, Error::SingularPrincipalBlock));
        // size 5: three free parameters, generic values decompose
        assert_eq!(binary_moment_exponents(6, 5).len(), 3);
        let dec = binary_decompose(&t, 5, BinaryParams::Seed(1), 1e-8).unwrap();
        assert_eq!(dec.size(), 5);
        assert!(reconstruction_residual(&t, &dec) < 1e-8);
        // size 6: five free parameters
        assert_eq!(binary_moment_exponents(6, 6).len(), 5);
        let dec = binary_decompose(&t, 6, BinaryParams::Seed(2), 1e-8).unwrap();
        assert_eq!(dec.size(), 6);
        assert!(reconstruction_residual(&t, &dec) < 1e-8);
    }

    #[test]
    fn binary_explicit_parameters() {
        let t = binary_sextic();
        let mut params = MomentAssignment::new();
        params.set(Exponent(vec![7]), c(1.0, 0.5));
        params.set(Exponent(vec![8]), c(-0.25, 0.75));
        params.set(Exponent(vec![9]), c(0.4, -1.1));
        let dec = binary_decompose(&t, 5, BinaryParams::Explicit(params), 1e-8).unwrap();
        assert_eq!(dec.size(), 5);
        assert!(reconstruction_residual(&t, &dec) < 1e-8);
    }

    #[test]
    fn full_pipeline_on_generic_quartic() {
        // find basis, assign exact moments, extract, re-solve weights
        let n = 3;
        let (points, weights) = random_instance(n, 6, 77);
        let t = tensor_from_points(&points, &weights, 4).unwrap();
        let b = find_basis(&t, 0.0).unwrap();
        assert_eq!(b.len(), 6);
        let mut a = MomentAssignment::new();
        for e in moment_variables(&b, n, 4) {
            let mut v = c(0.0, 0.0);
            for (i, w) in weights.iter().enumerate() {
                v += *w * points.eval(i, &e);
            }
            a.set(e, v);
        }
        let h = hankel(&t);
        let mats = multiplication_matrices(&h, &b, &a).unwrap();
        let got = extract_decomposition(&mats, &b, 5, 1e-7).unwrap();
        assert!(match_points(&got, &points).unwrap() < 1e-7);
        let (w, r) = solve_weights(&t, &got);
        assert!(r < 1e-8);
        let dec = Decomposition {
            points: got,
            weights: w,
        };
        assert!(reconstruction_residual(&t, &dec) < 1e-8);
    }

    #[test]
    fn hankel_consistency_invariant() {
        // the solved blocks factor through the recovered points
        let n = 2;
        let (points, weights) = random_instance(n, 4, 83);
        let t = tensor_from_points(&points, &weights, 4).unwrap();
        let b = find_basis(&t, 0.0).unwrap();
        let mut a = MomentAssignment::new();
        for e in moment_variables(&b, n, 4) {
            let mut v = c(0.0, 0.0);
            for (i, w) in weights.iter().enumerate() {
                v += *w * points.eval(i, &e);
            }
            a.set(e, v);
        }
        let h = hankel(&t);
        let lambda = DMatrix::from_diagonal(&DVector::from_vec(weights.clone()));
        let zb = crate::tensor::vandermonde(&points, b.exponents());
        for i in 0..=n {
            let cols: Vec<Exponent> = if i == 0 {
                b.exponents().to_vec()
            } else {
                b.shifted(i)
            };
            let block = h.eval_block(b.exponents(), &cols, &a).unwrap();
            let zc = crate::tensor::vandermonde(&points, &cols);
            let expect = zb.transpose() * &lambda * zc;
            assert!((&block - &expect).norm() <= 1e-8 * expect.norm().max(1.0));
        }
    }
}
