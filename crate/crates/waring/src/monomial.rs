//! Efficient decomposition of monomials in canonical form: the box basis,
//! the graded moment variables with their free parameters, the grade-by-grade
//! linear solve, the roots-of-unity canonical decomposition, and the
//! dimension of the space of decompositions.

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::hankel::{
    extract_decomposition, hankel, moment_variables, multiplication_matrices, MomentAssignment,
    MonomialBasis,
};
use crate::jennrich::solve_weights;
use crate::linalg::{c, C64};
use crate::rng::SeededRng;
use crate::tensor::{Decomposition, PointSet, SymTensor};

/// A monomial `x0^{d0} x1^{d1} .. xn^{dn}` with `1 <= d0 <= d1 <= .. <= dn`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialSpec {
    degrees: Vec<u32>,
}

impl MonomialSpec {
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        if degrees.len() < 2 {
            return Err(Error::OutOfRange(
                "a monomial spec needs at least two variables".into(),
            ));
        }
        if degrees[0] == 0 {
            return Err(Error::OutOfRange(
                "the distinguished variable must appear (d0 >= 1)".into(),
            ));
        }
        if degrees.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::OutOfRange(
                "degrees must be sorted ascending (canonical form)".into(),
            ));
        }
        Ok(MonomialSpec { degrees })
    }

    /// Number of dehomogenized variables.
    pub fn n(&self) -> usize {
        self.degrees.len() - 1
    }

    pub fn d0(&self) -> u32 {
        self.degrees[0]
    }

    /// Total order.
    pub fn d(&self) -> u32 {
        self.degrees.iter().sum()
    }

    /// The dehomogenized exponent `(d1, .., dn)`.
    pub fn tail(&self) -> Exponent {
        Exponent(self.degrees[1..].to_vec())
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// The tensor with a single coefficient 1 at the tail exponent.
    pub fn tensor(&self) -> SymTensor {
        SymTensor::monomial(self.n(), self.d(), &self.tail())
    }
}

/// `prod_{j=1..n} (d_j + 1)`, the rank of the monomial.
pub fn monomial_rank(spec: &MonomialSpec) -> usize {
    spec.degrees[1..].iter().map(|&d| d as usize + 1).product()
}

/// The box basis `{x^a : 0 <= a_i <= d_i}`; its principal Hankel block is
/// lower anti-triangular with ones on the antidiagonal.
pub fn monomial_basis(spec: &MonomialSpec) -> MonomialBasis {
    let n = spec.n();
    let mut list = Vec::with_capacity(monomial_rank(spec));
    let mut cur = vec![0u32; n];
    loop {
        list.push(Exponent(cur.clone()));
        // odometer over the box
        let mut idx = 0;
        loop {
            if idx == n {
                return MonomialBasis::new(list);
            }
            cur[idx] += 1;
            if cur[idx] <= spec.degrees[idx + 1] {
                break;
            }
            cur[idx] = 0;
            idx += 1;
        }
    }
}

/// Moment variables stratified by grade, with the per-grade free parameters
/// (exponents exceeding the degree box in exactly one coordinate).
#[derive(Debug, Clone)]
pub struct GradedVarSet {
    /// all moment variables, graded-lex
    pub all: Vec<Exponent>,
    /// grade of each variable, parallel to `all`
    pub grades: Vec<u32>,
    /// the free parameters, graded-lex
    pub params: Vec<Exponent>,
}

impl GradedVarSet {
    pub fn grade_count(&self) -> u32 {
        self.grades.iter().copied().max().unwrap_or(0)
    }

    pub fn is_param(&self, e: &Exponent) -> bool {
        self.params.contains(e)
    }
}

fn exceed_count(spec: &MonomialSpec, e: &Exponent) -> usize {
    e.0.iter()
        .zip(&spec.degrees[1..])
        .filter(|(a, d)| **a > **d)
        .count()
}

fn grade_of(spec: &MonomialSpec, e: &Exponent) -> u32 {
    let over = e.size() - spec.d();
    over.div_ceil(spec.d0() + 1)
}

/// Enumerates the moment variables of the box basis and grades them.
pub fn parameter_set(spec: &MonomialSpec) -> GradedVarSet {
    let basis = monomial_basis(spec);
    let all = moment_variables(&basis, spec.n(), spec.d());
    let grades: Vec<u32> = all.iter().map(|e| grade_of(spec, e)).collect();
    let params: Vec<Exponent> = all
        .iter()
        .filter(|e| exceed_count(spec, e) == 1)
        .cloned()
        .collect();
    GradedVarSet {
        all,
        grades,
        params,
    }
}

/// Hilbert function of `C[a_0..a_n] / (a_1^{d_1+1}, .., a_n^{d_n+1})` at
/// degree `k`: monomials of degree `k` whose tail exponents stay inside the
/// degree box (the leftover degree is absorbed by the unconstrained `a_0`).
fn box_hilbert(spec: &MonomialSpec, k: u32) -> usize {
    fn count(degrees: &[u32], pos: usize, rem: u32) -> usize {
        if pos == degrees.len() {
            return 1;
        }
        let mut acc = 0;
        for a in 0..=degrees[pos].min(rem) {
            acc += count(degrees, pos + 1, rem - a);
        }
        acc
    }
    count(&spec.degrees[1..], 0, k)
}

/// Dimension of the space of minimal decompositions: the free-parameter
/// count, cross-checked against the Hilbert-function sum.
pub fn vsp_dimension(spec: &MonomialSpec) -> Result<usize> {
    let params = parameter_set(spec).params.len();
    let dual: usize = spec.degrees[1..]
        .iter()
        .map(|&dj| box_hilbert(spec, dj - spec.d0()))
        .sum();
    if params != dual {
        return Err(Error::InternalMismatch(format!(
            "free parameters {params} vs Hilbert sum {dual}"
        )));
    }
    Ok(params)
}

/// All single-determinant equations determining a non-parameter variable:
/// tuples `(alpha, i, beta, j)` with both borders outside the basis, one
/// cross shift inside, and corner exactly the variable.
fn representations(
    spec: &MonomialSpec,
    basis: &MonomialBasis,
    gamma: &Exponent,
) -> Vec<(Exponent, usize, Exponent, usize)> {
    let n = spec.n();
    let mut out = Vec::new();
    for alpha in basis.exponents() {
        for i in 1..=n {
            let ai = alpha.shift(i);
            if basis.contains(&ai) {
                continue;
            }
            let Some(rest) = gamma.checked_sub(&ai) else {
                continue;
            };
            for j in 1..=n {
                if i == j {
                    continue;
                }
                let Some(beta) = rest.checked_sub(&Exponent::unit(n, j)) else {
                    continue;
                };
                if !basis.contains(&beta) || basis.contains(&beta.shift(j)) {
                    continue;
                }
                if basis.contains(&alpha.shift(j)) || basis.contains(&beta.shift(i)) {
                    out.push((alpha.clone(), i, beta.clone(), j));
                }
            }
        }
    }
    out
}

/// Solves one bordered-determinant equation for its top-grade variable: the
/// determinant is affine in it with the principal determinant (a unit for the
/// box basis) as the leading coefficient. Entries of even higher grade carry
/// identically vanishing cofactors and read as zero.
fn solve_single(
    phi: &SymTensor,
    basis: &MonomialBasis,
    assignment: &MomentAssignment,
    gamma: &Exponent,
    rep: &(Exponent, usize, Exponent, usize),
) -> Result<C64> {
    let (alpha, i, beta, j) = rep;
    let h = hankel(phi);
    let mut rows = basis.exponents().to_vec();
    rows.push(alpha.shift(*i));
    let mut cols = basis.exponents().to_vec();
    cols.push(beta.shift(*j));
    let probe = |v: C64| -> C64 {
        let mut a = assignment.clone();
        a.set(gamma.clone(), v);
        h.eval_block_defaulting(&rows, &cols, &a).lu().determinant()
    };
    let at0 = probe(c(0.0, 0.0));
    let at1 = probe(c(1.0, 0.0));
    let lead = at1 - at0;
    if lead.norm() < 1e-12 {
        return Err(Error::InternalMismatch(format!(
            "equation for {gamma} is not affine with unit leading coefficient"
        )));
    }
    Ok(-at0 / lead)
}

/// Grade-by-grade resolution of all non-parameter moment variables from the
/// chosen parameter values.
pub fn solve_moments(spec: &MonomialSpec, params: &MomentAssignment) -> Result<MomentAssignment> {
    let basis = monomial_basis(spec);
    let phi = spec.tensor();
    let vars = parameter_set(spec);
    let mut assignment = MomentAssignment::new();
    for e in &vars.params {
        assignment.set(
            e.clone(),
            params
                .get(e)
                .ok_or_else(|| Error::UnresolvedMoment(e.to_string()))?,
        );
    }
    let top = vars.grade_count();
    for k in 1..=top {
        for (e, g) in vars.all.iter().zip(&vars.grades) {
            if *g != k || vars.is_param(e) {
                continue;
            }
            let reps = representations(spec, &basis, e);
            let rep = reps
                .first()
                .ok_or_else(|| Error::InternalMismatch(format!("no equation determines {e}")))?;
            let v = solve_single(&phi, &basis, &assignment, e, rep)?;
            assignment.set(e.clone(), v);
        }
    }
    Ok(assignment)
}

/// The canonical parameter values: 1 on the `n` exponents exceeding a single
/// coordinate maximally, 0 on every other parameter.
pub fn canonical_parameters(spec: &MonomialSpec) -> MomentAssignment {
    let n = spec.n();
    let vars = parameter_set(spec);
    let mut special = Vec::new();
    for i in 1..=n {
        let mut e = spec.tail();
        e.0[i - 1] = 2 * spec.degrees[i] + 1;
        special.push(e);
    }
    let mut a = MomentAssignment::new();
    for e in &vars.params {
        let v = if special.contains(e) { 1.0 } else { 0.0 };
        a.set(e.clone(), c(v, 0.0));
    }
    a
}

/// Canonical parameters pushed through the graded solve; every non-parameter
/// variable resolves to zero.
pub fn canonical_assignment(spec: &MonomialSpec) -> Result<MomentAssignment> {
    solve_moments(spec, &canonical_parameters(spec))
}

/// Parameter source for a monomial decomposition.
pub enum ParamChoice {
    Canonical,
    Seed(u64),
    Explicit(MomentAssignment),
}

/// The roots-of-unity grid `z = (1, w_1^{a_1}, .., w_n^{a_n})` with `w_i` the
/// primitive `(d_i+1)`-th root `exp(2 pi i / (d_i+1))`.
pub fn canonical_grid(spec: &MonomialSpec) -> PointSet {
    let n = spec.n();
    let r = monomial_rank(spec);
    let mut rows: Vec<Vec<C64>> = Vec::with_capacity(r);
    let mut idx = vec![0u32; n];
    loop {
        let mut row = Vec::with_capacity(n);
        for (i, &a) in idx.iter().enumerate() {
            let order = spec.degrees[i + 1] as f64 + 1.0;
            let theta = 2.0 * std::f64::consts::PI * a as f64 / order;
            row.push(c(theta.cos(), theta.sin()));
        }
        rows.push(row);
        let mut pos = 0;
        loop {
            if pos == n {
                return PointSet::from_affine(&rows);
            }
            idx[pos] += 1;
            if idx[pos] <= spec.degrees[pos + 1] {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Decomposes the monomial for a parameter choice. Canonical values go
/// through the closed-form grid; anything else runs the graded solve and the
/// joint eigendecomposition.
pub fn monomial_decompose(spec: &MonomialSpec, choice: ParamChoice) -> Result<Decomposition> {
    let phi = spec.tensor();
    let params = match choice {
        ParamChoice::Canonical => {
            let points = canonical_grid(spec);
            let (weights, _) = solve_weights(&phi, &points);
            return Ok(Decomposition { points, weights });
        }
        ParamChoice::Seed(seed) => {
            let vars = parameter_set(spec);
            let mut rng = SeededRng::new(seed);
            let mut a = MomentAssignment::new();
            for e in &vars.params {
                a.set(e.clone(), rng.cnormal());
            }
            a
        }
        ParamChoice::Explicit(a) => a,
    };
    let basis = monomial_basis(spec);
    let assignment = solve_moments(spec, &params)?;
    let h = hankel(&phi);
    let mats = multiplication_matrices(&h, &basis, &assignment)?;
    let points = extract_decomposition(&mats, &basis, 1, 1e-8)?;
    let (weights, _) = solve_weights(&phi, &points);
    Ok(Decomposition { points, weights })
}

/// Decides whether two parameter assignments give decompositions related by
/// scaling the variables: extracts candidate scalings from the `n` maximal
/// parameters and verifies every other constraint over all root branches.
/// Returns the scalings on success, `None` when provably unrelated.
pub fn torus_equivalent(
    spec: &MonomialSpec,
    p1: &MomentAssignment,
    p2: &MomentAssignment,
    tol: f64,
) -> Result<Option<Vec<C64>>> {
    let n = spec.n();
    let vars = parameter_set(spec);
    let scale = vars
        .params
        .iter()
        .flat_map(|e| {
            [
                p1.get(e).unwrap_or(c(0.0, 0.0)),
                p2.get(e).unwrap_or(c(0.0, 0.0)),
            ]
        })
        .map(|v| v.norm())
        .fold(1.0f64, f64::max);
    let zero = tol.max(1e-12) * scale;
    // zero pattern must match outright
    for e in &vars.params {
        let a = p1.get(e).unwrap_or(c(0.0, 0.0));
        let b = p2.get(e).unwrap_or(c(0.0, 0.0));
        if (a.norm() < zero) != (b.norm() < zero) {
            return Ok(None);
        }
    }
    let tail = spec.tail();
    // binding parameters: gamma_i = tail + (d_i + 1) e_i
    let mut ratios = Vec::with_capacity(n);
    for i in 1..=n {
        let mut e = tail.clone();
        e.0[i - 1] = 2 * spec.degrees[i] + 1;
        let a = p1.get(&e).unwrap_or(c(0.0, 0.0));
        let b = p2.get(&e).unwrap_or(c(0.0, 0.0));
        if a.norm() < zero || b.norm() < zero {
            return Err(Error::ZeroParameter(e.to_string()));
        }
        ratios.push(b / a);
    }
    // enumerate root branches tau_i^(d_i+1) = ratio_i
    let orders: Vec<u32> = spec.degrees[1..].iter().map(|&d| d + 1).collect();
    let combos: usize = orders.iter().map(|&o| o as usize).product();
    if combos > 4096 {
        return Err(Error::OutOfRange(
            "too many root branches to enumerate".into(),
        ));
    }
    let root = |v: C64, order: u32, branch: u32| -> C64 {
        let r = v.norm().powf(1.0 / order as f64);
        let theta = (v.im.atan2(v.re) + 2.0 * std::f64::consts::PI * branch as f64) / order as f64;
        c(r * theta.cos(), r * theta.sin())
    };
    let powi = |v: C64, e: u32| -> C64 {
        let mut acc = c(1.0, 0.0);
        for _ in 0..e {
            acc *= v;
        }
        acc
    };
    for combo in 0..combos {
        let mut rem = combo;
        let mut tau = Vec::with_capacity(n);
        for (i, &o) in orders.iter().enumerate() {
            let branch = (rem % o as usize) as u32;
            rem /= o as usize;
            tau.push(root(ratios[i], o, branch));
        }
        // verify every parameter constraint tau^gamma p1 = tau^tail p2
        let tau_pow = |e: &Exponent| -> C64 {
            e.0.iter()
                .enumerate()
                .fold(c(1.0, 0.0), |acc, (i, &a)| acc * powi(tau[i], a))
        };
        let t_tail = tau_pow(&tail);
        let ok = vars.params.iter().all(|e| {
            let a = p1.get(e).unwrap_or(c(0.0, 0.0));
            let b = p2.get(e).unwrap_or(c(0.0, 0.0));
            (tau_pow(e) * a - t_tail * b).norm() <= tol.max(1e-9) * scale.max(1.0) * 10.0
        });
        if ok {
            return Ok(Some(tau));
        }
    }
    Ok(None)
}
