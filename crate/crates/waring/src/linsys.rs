//! Order-4 efficient path: classification of determinantal relations,
//! assembly of the induced linear system over the moment variables, the
//! solve/substitute loop, the full decomposition pipeline with its
//! certificate, and the equation/variable count formulas with the threshold
//! constant of the asymptotic rank bound.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exponent::{binomial, binomial_real, Exponent};
use crate::hankel::{
    determinantal_residuals, extract_decomposition, find_basis, hankel, moment_variables,
    multiplication_matrices, HankelMatrix, MomentAssignment, MonomialBasis,
};
use crate::jennrich::solve_weights;
use crate::linalg::{c, lstsq, nullspace, singular_values, C64};
use crate::rng::SeededRng;
use crate::tensor::{Decomposition, PointSet, SymTensor};

/// Classification of one determinantal relation in the moment variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationClass {
    Zero,
    Linear,
    Quadratic,
}

/// Degree trichotomy for order 4: identically zero by index bookkeeping,
/// linear when exactly one border carries moment entries, quadratic when
/// both do.
pub fn classify_equation(
    basis: &MonomialBasis,
    d: u32,
    alpha: &Exponent,
    i: usize,
    beta: &Exponent,
    j: usize,
) -> Result<EquationClass> {
    if d != 4 {
        return Err(Error::OrderUnsupported(d as usize));
    }
    debug_assert!(basis.contains(alpha) && basis.contains(beta) && i != j);
    if alpha.add(beta).size() <= d - 2 || alpha == beta {
        return Ok(EquationClass::Zero);
    }
    let (ai, aj) = (alpha.shift(i), alpha.shift(j));
    let (bi, bj) = (beta.shift(i), beta.shift(j));
    if (basis.contains(&ai) || basis.contains(&bj)) && (basis.contains(&aj) || basis.contains(&bi))
    {
        return Ok(EquationClass::Zero);
    }
    let half = d / 2;
    let (sa, sb) = (alpha.size(), beta.size());
    if (sa == half && sb == half - 1) || (sa == half - 1 && sb == half) {
        Ok(EquationClass::Linear)
    } else {
        Ok(EquationClass::Quadratic)
    }
}

/// Index of one linear relation. `E1` relations are single bordered
/// determinants; `E2` relations are the difference of the determinant at
/// `(alpha x_i, beta x_j)` and the one at `(alpha x_j, beta x_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquationIndex {
    E1 {
        alpha: Exponent,
        i: usize,
        beta: Exponent,
        j: usize,
    },
    E2 {
        alpha: Exponent,
        i: usize,
        beta: Exponent,
        j: usize,
    },
}

impl EquationIndex {
    /// Row/column borders of the determinant(s) behind this equation.
    pub fn borders(&self) -> ((Exponent, Exponent), Option<(Exponent, Exponent)>) {
        match self {
            EquationIndex::E1 { alpha, i, beta, j } => ((alpha.shift(*i), beta.shift(*j)), None),
            EquationIndex::E2 { alpha, i, beta, j } => (
                (alpha.shift(*i), beta.shift(*j)),
                Some((alpha.shift(*j), beta.shift(*i))),
            ),
        }
    }
}

/// Minor identifiers shared by the float and finite-field evaluators: every
/// coefficient of the linear system is a signed determinant of a fully known
/// Hankel block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MinorId {
    /// `det H_{B, B}`
    Principal,
    /// `det H_{B, (B with the column at `removed` deleted) ++ [border]}`
    Bordered { removed: usize, border: Exponent },
}

#[derive(Debug, Clone)]
pub struct RecipeRow {
    pub index: EquationIndex,
    /// variable position, sign, minor
    pub terms: Vec<(usize, i8, MinorId)>,
    /// tensor exponent, sign, minor; moved to the right-hand side
    pub consts: Vec<(Exponent, i8, MinorId)>,
}

/// Evaluator-independent description of the linear subsystem.
#[derive(Debug, Clone)]
pub struct LinSystemRecipe {
    pub vars: Vec<Exponent>,
    pub rows: Vec<RecipeRow>,
    pub e1_rows: usize,
}

fn laplace_sign(r: usize, pos: usize) -> i8 {
    // (-1)^{r+1+pos} with 1-based column position
    if (r + 1 + (pos + 1)) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// One side of a relation expanded along its border row: the corner moment
/// carries the principal minor, degree-`d/2` columns give variable terms,
/// lower-degree columns give constants.
#[allow(clippy::too_many_arguments)]
fn det_side(
    basis: &MonomialBasis,
    d: u32,
    var_pos: &HashMap<Exponent, usize>,
    eta: &Exponent,
    theta: &Exponent,
    sign: i8,
    include_corner: bool,
    terms: &mut Vec<(usize, i8, MinorId)>,
    consts: &mut Vec<(Exponent, i8, MinorId)>,
) {
    let r = basis.len();
    let half = d / 2;
    if include_corner {
        let corner = eta.add(theta);
        let pos = var_pos
            .get(&corner)
            .copied()
            .expect("corner of a linear relation is a recognized moment variable");
        terms.push((pos, sign, MinorId::Principal));
    }
    for (gpos, gamma) in basis.exponents().iter().enumerate() {
        let minor = MinorId::Bordered {
            removed: gpos,
            border: theta.clone(),
        };
        let s = sign * laplace_sign(r, gpos);
        let entry = eta.add(gamma);
        if gamma.size() == half {
            let pos = var_pos
                .get(&entry)
                .copied()
                .expect("degree-d/2 column entry of a border row is a moment variable");
            terms.push((pos, s, minor));
        } else {
            consts.push((entry, s, minor));
        }
    }
}

/// Builds the linear rows for an even-order basis of degree at most `d/2`:
/// `E1` single determinants first in graded-lex border order, then `E2`
/// differences. Rows are deduplicated by their determinant borders.
pub fn build_recipe(basis: &MonomialBasis, n: usize, d: u32) -> LinSystemRecipe {
    let half = d / 2;
    let vars = moment_variables(basis, n, d);
    let var_pos: HashMap<Exponent, usize> = vars
        .iter()
        .cloned()
        .enumerate()
        .map(|(p, e)| (e, p))
        .collect();
    let hi: Vec<Exponent> = basis.layer(half);
    let lo: Vec<Exponent> = basis.layer(half - 1);

    // E1: dedup by the (eta, theta) border pair, keep the first tuple found
    let mut e1: BTreeMap<(Exponent, Exponent), (Exponent, usize, Exponent, usize)> =
        BTreeMap::new();
    for alpha in &hi {
        for i in 1..=n {
            for beta in &lo {
                for j in 1..=n {
                    if i == j {
                        continue;
                    }
                    let theta = beta.shift(j);
                    if basis.contains(&theta) || !basis.contains(&beta.shift(i)) {
                        continue;
                    }
                    let eta = alpha.shift(i);
                    e1.entry((eta, theta))
                        .or_insert_with(|| (alpha.clone(), i, beta.clone(), j));
                }
            }
        }
    }

    // E2: both beta shifts outside the basis, dedup by the border pair set
    #[allow(clippy::type_complexity)]
    let mut e2: BTreeMap<
        ((Exponent, Exponent), (Exponent, Exponent)),
        (Exponent, usize, Exponent, usize),
    > = BTreeMap::new();
    for alpha in &hi {
        for beta in &lo {
            for i in 1..=n {
                for j in (i + 1)..=n {
                    if basis.contains(&beta.shift(i)) || basis.contains(&beta.shift(j)) {
                        continue;
                    }
                    let first = (alpha.shift(i), beta.shift(j));
                    let second = (alpha.shift(j), beta.shift(i));
                    let key = if first <= second {
                        (first, second)
                    } else {
                        (second, first)
                    };
                    e2.entry(key)
                        .or_insert_with(|| (alpha.clone(), i, beta.clone(), j));
                }
            }
        }
    }

    let mut rows = Vec::with_capacity(e1.len() + e2.len());
    for ((eta, theta), (alpha, i, beta, j)) in &e1 {
        let mut terms = Vec::new();
        let mut consts = Vec::new();
        det_side(
            basis,
            d,
            &var_pos,
            eta,
            theta,
            1,
            true,
            &mut terms,
            &mut consts,
        );
        rows.push(RecipeRow {
            index: EquationIndex::E1 {
                alpha: alpha.clone(),
                i: *i,
                beta: beta.clone(),
                j: *j,
            },
            terms,
            consts,
        });
    }
    let e1_rows = rows.len();
    for (((eta1, theta1), (eta2, theta2)), (alpha, i, beta, j)) in &e2 {
        let mut terms = Vec::new();
        let mut consts = Vec::new();
        // corners of both sides share the principal coefficient and cancel
        det_side(
            basis,
            d,
            &var_pos,
            eta1,
            theta1,
            1,
            false,
            &mut terms,
            &mut consts,
        );
        det_side(
            basis,
            d,
            &var_pos,
            eta2,
            theta2,
            -1,
            false,
            &mut terms,
            &mut consts,
        );
        rows.push(RecipeRow {
            index: EquationIndex::E2 {
                alpha: alpha.clone(),
                i: *i,
                beta: beta.clone(),
                j: *j,
            },
            terms,
            consts,
        });
    }
    LinSystemRecipe {
        vars,
        rows,
        e1_rows,
    }
}

/// Assembled linear system `A Y = b` over the complex numbers.
#[derive(Debug, Clone)]
pub struct LinSystem {
    pub a: DMatrix<C64>,
    pub b: DVector<C64>,
    pub var_index: Vec<Exponent>,
    pub eq_index: Vec<EquationIndex>,
    pub e1_rows: usize,
}

impl LinSystem {
    /// Row position of the single-determinant equation with these borders.
    pub fn find_e1(&self, eta: &Exponent, theta: &Exponent) -> Option<usize> {
        self.eq_index.iter().position(|e| match e {
            EquationIndex::E1 { .. } => {
                let ((a, b), _) = e.borders();
                &a == eta && &b == theta
            }
            _ => false,
        })
    }

    /// Row position of the difference equation with these border pairs, in
    /// either order.
    pub fn find_e2(
        &self,
        first: &(Exponent, Exponent),
        second: &(Exponent, Exponent),
    ) -> Option<usize> {
        self.eq_index.iter().position(|e| match e {
            EquationIndex::E2 { .. } => {
                let (a, b) = e.borders();
                let b = b.expect("E2 has two sides");
                (&a == first && &b == second) || (&a == second && &b == first)
            }
            _ => false,
        })
    }
}

/// Evaluates the recipe numerically: every minor is a determinant of a fully
/// known Hankel block of the input tensor.
pub fn assemble_linear_system(
    phi: &SymTensor,
    basis: &MonomialBasis,
    _tol: f64,
) -> Result<LinSystem> {
    let d = phi.d();
    if d % 2 != 0 {
        return Err(Error::OrderUnsupported(d as usize));
    }
    if basis.degree() > d / 2 {
        return Err(Error::OutOfRange(
            "basis degree exceeds d/2; principal block is not fully known".into(),
        ));
    }
    let n = phi.n();
    let recipe = build_recipe(basis, n, d);
    let h = hankel(phi);
    let empty = MomentAssignment::new();
    let block = h.eval_block(basis.exponents(), basis.exponents(), &empty)?;
    let sv = singular_values(&block);
    if sv.max() == 0.0 || sv.min() <= block.nrows() as f64 * f64::EPSILON * sv.max() {
        return Err(Error::SingularPrincipalBlock);
    }
    let principal = block.lu().determinant();
    let mut minor_cache: HashMap<(usize, Exponent), C64> = HashMap::new();
    let mut eval_minor = |mid: &MinorId| -> C64 {
        match mid {
            MinorId::Principal => principal,
            MinorId::Bordered { removed, border } => *minor_cache
                .entry((*removed, border.clone()))
                .or_insert_with(|| {
                    let mut cols: Vec<Exponent> = basis.exponents().to_vec();
                    cols.remove(*removed);
                    cols.push(border.clone());
                    h.eval_block(basis.exponents(), &cols, &empty)
                        .expect("bordered minors of a half-degree basis are fully known")
                        .lu()
                        .determinant()
                }),
        }
    };
    let mut a = DMatrix::<C64>::zeros(recipe.rows.len(), recipe.vars.len());
    let mut b = DVector::<C64>::zeros(recipe.rows.len());
    for (row, rr) in recipe.rows.iter().enumerate() {
        for (pos, sign, mid) in &rr.terms {
            a[(row, *pos)] += eval_minor(mid) * c(*sign as f64, 0.0);
        }
        for (e, sign, mid) in &rr.consts {
            b[row] -= eval_minor(mid) * phi.coeff(e) * c(*sign as f64, 0.0);
        }
    }
    Ok(LinSystem {
        a,
        b,
        var_index: recipe.vars,
        eq_index: recipe.rows.into_iter().map(|r| r.index).collect(),
        e1_rows: recipe.e1_rows,
    })
}

/// Result of the extension solve.
#[derive(Debug, Clone)]
pub enum ExtensionResult {
    /// Full-column-rank linear system with vanishing quadratics.
    Unique(MomentAssignment),
    /// Rank-deficient linear system whose solution space satisfies the
    /// quadratics along sampled members.
    Family {
        particular: MomentAssignment,
        /// nullspace vectors over the order of `var_index`
        nullspace: Vec<Vec<C64>>,
        var_index: Vec<Exponent>,
    },
    Fail(String),
}

/// Solve metadata carried into certificates.
#[derive(Debug, Clone)]
pub struct ExtensionOutcome {
    pub result: ExtensionResult,
    pub rank_a: usize,
    pub y_count: usize,
    pub eq_count: usize,
    pub lin_residual: f64,
}

fn assignment_from(vars: &[Exponent], values: &DVector<C64>) -> MomentAssignment {
    let mut a = MomentAssignment::new();
    for (e, v) in vars.iter().zip(values.iter()) {
        a.set(e.clone(), *v);
    }
    a
}

/// One determinantal relation evaluated at an assignment (difference of two
/// bordered determinants, unresolved corners reading as zero on both sides).
fn relation_value(
    h: &HankelMatrix,
    basis: &MonomialBasis,
    assignment: &MomentAssignment,
    alpha: &Exponent,
    i: usize,
    beta: &Exponent,
    j: usize,
) -> C64 {
    let mk = |eta: &Exponent, theta: &Exponent| -> C64 {
        let mut rows = basis.exponents().to_vec();
        rows.push(eta.clone());
        let mut cols = basis.exponents().to_vec();
        cols.push(theta.clone());
        h.eval_block_defaulting(&rows, &cols, assignment)
            .lu()
            .determinant()
    };
    mk(&alpha.shift(i), &beta.shift(j)) - mk(&alpha.shift(j), &beta.shift(i))
}

/// Canonical list of quadratic relations for a degree-`d/2` basis.
fn quadratic_tuples(
    basis: &MonomialBasis,
    n: usize,
    d: u32,
) -> Vec<(Exponent, usize, Exponent, usize)> {
    let hi = basis.layer(d / 2);
    let mut out = Vec::new();
    for (pa, a) in hi.iter().enumerate() {
        for b in &hi[pa + 1..] {
            for i in 1..=n {
                for j in (i + 1)..=n {
                    out.push((a.clone(), i, b.clone(), j));
                    out.push((a.clone(), j, b.clone(), i));
                }
            }
        }
    }
    out
}

/// Solves the linear subsystem, then iterates: a full-column-rank solution
/// must satisfy the quadratics (`Unique`); otherwise a seeded family member
/// is substituted, vanishing quadratics give `Family`, quadratics that turn
/// affine in the remaining frees contribute new linear rows for the next
/// round, and anything else is a `Fail` value.
pub fn solve_extension(
    phi: &SymTensor,
    basis: &MonomialBasis,
    seed: u64,
    tol: f64,
    max_rounds: usize,
) -> Result<ExtensionOutcome> {
    let sys = assemble_linear_system(phi, basis, tol)?;
    let y_count = sys.var_index.len();
    let eq_count = sys.a.nrows();
    let h = hankel(phi);
    let tol_eff = if tol > 0.0 { tol } else { 1e-8 };
    let quad_ok = |assignment: &MomentAssignment| -> Result<bool> {
        let res = determinantal_residuals(&h, basis, assignment)?;
        Ok(res.max() <= tol_eff.max(1e-7) * res.scale.max(1.0))
    };
    if y_count == 0 {
        let assignment = MomentAssignment::new();
        let ok = quad_ok(&assignment)?;
        return Ok(ExtensionOutcome {
            result: if ok {
                ExtensionResult::Unique(assignment)
            } else {
                ExtensionResult::Fail("fully specified relations do not vanish".into())
            },
            rank_a: 0,
            y_count,
            eq_count,
            lin_residual: 0.0,
        });
    }

    let rank_a = crate::linalg::numerical_rank(&sys.a, tol_eff);
    let particular = lstsq(&sys.a, &sys.b, tol_eff);
    let scale_b = sys.b.norm().max(sys.a.norm()).max(1.0);
    let lin_residual = (&sys.a * &particular - &sys.b).norm() / scale_b;
    if lin_residual > tol_eff.max(1e-7) {
        return Ok(ExtensionOutcome {
            result: ExtensionResult::Fail("linear subsystem is inconsistent".into()),
            rank_a,
            y_count,
            eq_count,
            lin_residual,
        });
    }
    if rank_a == y_count {
        let assignment = assignment_from(&sys.var_index, &particular);
        let result = if quad_ok(&assignment)? {
            ExtensionResult::Unique(assignment)
        } else {
            ExtensionResult::Fail("quadratic relations remain".into())
        };
        return Ok(ExtensionOutcome {
            result,
            rank_a,
            y_count,
            eq_count,
            lin_residual,
        });
    }

    // rank-deficient: explore the affine solution space
    let mut rng = SeededRng::new(seed);
    let mut base = particular.clone();
    let mut dirs = nullspace(&sys.a, tol_eff);
    let quads = quadratic_tuples(basis, phi.n(), phi.d());
    let eval_at =
        |point: &DVector<C64>| -> MomentAssignment { assignment_from(&sys.var_index, point) };
    for _round in 0..max_rounds {
        if dirs.ncols() == 0 {
            let assignment = eval_at(&base);
            let result = if quad_ok(&assignment)? {
                ExtensionResult::Unique(assignment)
            } else {
                ExtensionResult::Fail("quadratic relations remain".into())
            };
            return Ok(ExtensionOutcome {
                result,
                rank_a,
                y_count,
                eq_count,
                lin_residual,
            });
        }
        // two independent seeded members; both must satisfy the quadratics
        let g1 = rng.cvector(dirs.ncols());
        let g2 = rng.cvector(dirs.ncols());
        let member = |g: &DVector<C64>| -> DVector<C64> { &base + &dirs * g };
        if quad_ok(&eval_at(&member(&g1)))? && quad_ok(&eval_at(&member(&g2)))? {
            let nullspace_cols: Vec<Vec<C64>> = (0..dirs.ncols())
                .map(|j| dirs.column(j).iter().copied().collect())
                .collect();
            return Ok(ExtensionOutcome {
                result: ExtensionResult::Family {
                    particular: eval_at(&base),
                    nullspace: nullspace_cols,
                    var_index: sys.var_index.clone(),
                },
                rank_a,
                y_count,
                eq_count,
                lin_residual,
            });
        }
        // probe each quadratic restricted to the affine frees; affine ones
        // become new linear rows in the free coordinates
        let dim = dirs.ncols();
        let mut new_rows: Vec<DVector<C64>> = Vec::new();
        let mut new_rhs: Vec<C64> = Vec::new();
        let mut probe_scale: f64 = 0.0;
        for (alpha, i, beta, j) in &quads {
            let value = |t: &DVector<C64>| -> C64 {
                relation_value(
                    &h,
                    basis,
                    &eval_at(&(&base + &dirs * t)),
                    alpha,
                    *i,
                    beta,
                    *j,
                )
            };
            let q0 = value(&DVector::zeros(dim));
            let mut lin = DVector::<C64>::zeros(dim);
            let mut quad_part: f64 = 0.0;
            let mut mags: f64 = q0.norm();
            for k in 0..dim {
                let mut e = DVector::<C64>::zeros(dim);
                e[k] = c(1.0, 0.0);
                let qp = value(&e);
                e[k] = c(-1.0, 0.0);
                let qm = value(&e);
                lin[k] = (qp - qm) * c(0.5, 0.0);
                quad_part = quad_part.max((qp + qm - q0 * c(2.0, 0.0)).norm());
                mags = mags.max(qp.norm()).max(qm.norm());
            }
            if dim <= 8 {
                for k in 0..dim {
                    for l in (k + 1)..dim {
                        let mut e = DVector::<C64>::zeros(dim);
                        e[k] = c(1.0, 0.0);
                        e[l] = c(1.0, 0.0);
                        let qkl = value(&e);
                        let mut ek = DVector::<C64>::zeros(dim);
                        ek[k] = c(1.0, 0.0);
                        let mut el = DVector::<C64>::zeros(dim);
                        el[l] = c(1.0, 0.0);
                        let cross = qkl - value(&ek) - value(&el) + q0;
                        quad_part = quad_part.max(cross.norm());
                    }
                }
            }
            probe_scale = probe_scale.max(mags);
            let affine = quad_part <= 1e-7 * mags.max(1.0);
            let touched = q0.norm() + lin.norm() > 1e-9 * mags.max(1.0);
            if touched {
                if !affine {
                    return Ok(ExtensionOutcome {
                        result: ExtensionResult::Fail("quadratic relations remain".into()),
                        rank_a,
                        y_count,
                        eq_count,
                        lin_residual,
                    });
                }
                new_rows.push(lin);
                new_rhs.push(-q0);
            }
        }
        if new_rows.is_empty() {
            break;
        }
        let m = DMatrix::from_rows(&new_rows.iter().map(|r| r.transpose()).collect::<Vec<_>>());
        let rhs = DVector::from_vec(new_rhs);
        let t0 = lstsq(&m, &rhs, tol_eff);
        if (&m * &t0 - &rhs).norm() > tol_eff.max(1e-7) * probe_scale.max(1.0) {
            return Ok(ExtensionOutcome {
                result: ExtensionResult::Fail("linearized quadratic rows are inconsistent".into()),
                rank_a,
                y_count,
                eq_count,
                lin_residual,
            });
        }
        base = &base + &dirs * &t0;
        let inner = nullspace(&m, tol_eff);
        if inner.ncols() == dirs.ncols() {
            break; // no progress
        }
        dirs = &dirs * inner;
    }
    Ok(ExtensionOutcome {
        result: ExtensionResult::Fail("quadratic relations remain".into()),
        rank_a,
        y_count,
        eq_count,
        lin_residual,
    })
}

/// Decomposition certificate: size of the linear system, its rank, whether
/// the extension was uniquely determined (the effective identifiability
/// criterion) and the reconstruction residual.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub n: usize,
    pub r: usize,
    pub y_count: usize,
    pub e_lin_count: usize,
    pub rank_a: usize,
    pub unique: bool,
    pub residual: f64,
}

impl std::fmt::Display for Certificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "format n={} r={} |Y|={} |E_lin|={} rankA={} unique={} residual={:e}",
            self.n, self.r, self.y_count, self.e_lin_count, self.rank_a, self.unique, self.residual
        )
    }
}

/// End-to-end order-4 pipeline: valid basis, linear extension solve,
/// multiplication matrices, joint eigenvectors, weights.
pub fn decompose4(phi: &SymTensor, seed: u64, tol: f64) -> Result<(Decomposition, Certificate)> {
    if phi.d() != 4 {
        return Err(Error::OrderUnsupported(phi.d() as usize));
    }
    decompose_even(phi, seed, tol)
}

/// Same pipeline for general even order; the count theory is order-4 only
/// but the assembly rules carry over.
pub fn decompose_even(
    phi: &SymTensor,
    seed: u64,
    tol: f64,
) -> Result<(Decomposition, Certificate)> {
    let tol_eff = if tol > 0.0 { tol } else { 1e-8 };
    let basis = find_basis(phi, tol).map_err(|e| {
        if phi.nonzero().len() == 1 {
            Error::staged(
                "basis search (input is a single monomial; use the monomial decomposition path)",
                e,
            )
        } else {
            Error::staged("basis search", e)
        }
    })?;
    if basis.is_empty() {
        return Ok((
            Decomposition {
                points: PointSet::new(DMatrix::zeros(0, phi.n() + 1)),
                weights: vec![],
            },
            Certificate {
                n: phi.n(),
                r: 0,
                y_count: 0,
                e_lin_count: 0,
                rank_a: 0,
                unique: true,
                residual: 0.0,
            },
        ));
    }
    let outcome = solve_extension(phi, &basis, seed, tol, 4)
        .map_err(|e| Error::staged("extension solve", e))?;
    let assignment = match &outcome.result {
        ExtensionResult::Unique(a) => a.clone(),
        ExtensionResult::Family {
            particular,
            nullspace,
            var_index,
        } => {
            // one seeded member of the family
            let mut rng = SeededRng::new(seed ^ 0x9e37_79b9_7f4a_7c15);
            let mut values: Vec<C64> = var_index
                .iter()
                .map(|e| particular.get(e).unwrap())
                .collect();
            for dir in nullspace {
                let g = rng.cnormal();
                for (v, d) in values.iter_mut().zip(dir) {
                    *v += *d * g;
                }
            }
            assignment_from(var_index, &DVector::from_vec(values))
        }
        ExtensionResult::Fail(reason) => {
            return Err(Error::staged(
                "extension solve",
                Error::InternalMismatch(reason.clone()),
            ))
        }
    };
    let h = hankel(phi);
    let mats = multiplication_matrices(&h, &basis, &assignment)
        .map_err(|e| Error::staged("multiplication matrices", e))?;
    let points = extract_decomposition(&mats, &basis, seed.wrapping_add(1), tol_eff)
        .map_err(|e| Error::staged("eigendecomposition", e))?;
    let (weights, _) = solve_weights(phi, &points);
    let dec = Decomposition { points, weights };
    let residual = crate::jennrich::reconstruction_residual(phi, &dec);
    if residual > tol_eff {
        return Err(Error::staged(
            "reconstruction",
            Error::ResidualTooLarge {
                residual,
                tol: tol_eff,
            },
        ));
    }
    let cert = Certificate {
        n: phi.n(),
        r: basis.len(),
        y_count: outcome.y_count,
        e_lin_count: outcome.eq_count,
        rank_a: outcome.rank_a,
        unique: matches!(outcome.result, ExtensionResult::Unique(_)),
        residual,
    };
    Ok((dec, cert))
}

/// Closed-form counts of moment variables and single-determinant linear
/// equations at the full stratum `r = sum_{j=0..c} (n-j+1)`.
pub fn count_y_e1(n: usize, cstr: usize) -> Result<(u64, u64)> {
    if cstr < 1 || cstr > n {
        return Err(Error::OutOfRange(format!(
            "need 1 <= c <= n, got c={cstr}, n={n}"
        )));
    }
    let (n, cc) = (n as u64, cstr as u64);
    let y = binomial(cc + 4, 5)
        + (n - cc) * binomial(cc + 3, 4)
        + binomial(n - cc + 1, 2) * binomial(cc + 2, 3)
        + binomial(n - cc + 2, 3) * binomial(cc + 1, 2);
    let e1 = binomial(n - cc + 1, 2) * (binomial(cc + 2, 3) + (n - cc) * binomial(cc + 1, 2));
    Ok((y, e1))
}

/// The stratum size `sum_{j=0..c} (n-j+1)`.
pub fn stratum_rank(n: usize, cstr: usize) -> usize {
    (0..=cstr).map(|j| n + 1 - j).sum()
}

/// Count formulas evaluated at a real-valued stratum parameter `c = t n`,
/// the form used by the asymptotic analysis.
pub fn count_y_e1_real(n: f64, cstr: f64) -> (f64, f64) {
    let y = binomial_real(cstr + 4.0, 5)
        + (n - cstr) * binomial_real(cstr + 3.0, 4)
        + binomial_real(n - cstr + 1.0, 2) * binomial_real(cstr + 2.0, 3)
        + binomial_real(n - cstr + 2.0, 3) * binomial_real(cstr + 1.0, 2);
    let e1 = binomial_real(n - cstr + 1.0, 2)
        * (binomial_real(cstr + 2.0, 3) + (n - cstr) * binomial_real(cstr + 1.0, 2));
    (y, e1)
}

/// The positive root of `-(2/15)t^3 + (11/24)t^2 - t/2 + 1/6` in (0, 1):
/// below it the equation count asymptotically dominates the variable count.
pub fn tstar() -> f64 {
    let p =
        |t: f64| -> f64 { (-2.0 / 15.0) * t * t * t + (11.0 / 24.0) * t * t - 0.5 * t + 1.0 / 6.0 };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    debug_assert!(p(lo) > 0.0 && p(hi) < 0.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest `n` such that the equation count dominates the variable count at
/// `c = t n` for every probed `n'` from `n` up to a 64-wide verification
/// horizon.
pub fn count_threshold(t: f64) -> Result<usize> {
    if !(t > 0.0 && t < tstar()) {
        return Err(Error::OutOfRange(format!(
            "need 0 < t < t* ~ 0.633, got {t}"
        )));
    }
    let dominates = |n: usize| -> bool {
        let (y, e1) = count_y_e1_real(n as f64, t * n as f64);
        e1 >= y
    };
    let cap = 5000usize;
    'outer: for n in 2..=cap {
        for probe in n..=(n + 64) {
            if !dominates(probe) {
                continue 'outer;
            }
        }
        return Ok(n);
    }
    Err(Error::Unverifiable)
}

// ---------------------------------------------------------------------------
// explicit specializations used by the rank arguments
// ---------------------------------------------------------------------------

/// The explicit integer point family behind the `r = 2n+1` full-column-rank
/// argument: `e0`, then `e0 + e_k`, then points with a growing block of -1
/// entries padded by 2s.
pub fn specialization_points(n: usize) -> Vec<Vec<i64>> {
    let r = 2 * n + 1;
    let mut rows = Vec::with_capacity(r);
    let mut z1 = vec![0i64; n + 1];
    z1[0] = 1;
    rows.push(z1);
    for k in 2..=(n + 1) {
        let mut z = vec![0i64; n + 1];
        z[0] = 1;
        z[k - 1] = 1;
        rows.push(z);
    }
    for k in (n + 2)..=r {
        let mut z = vec![2i64; n + 1];
        z[0] = 1;
        for idx in 1..=(k - (n + 1)) {
            z[idx] = -1;
        }
        rows.push(z);
    }
    rows
}

/// The basis `{1, x_1..x_n, x_1^2, x_1 x_2, .., x_1 x_n}` paired with the
/// integer specialization.
pub fn specialization_basis(n: usize) -> Vec<Exponent> {
    let mut b = vec![Exponent::zero(n)];
    for i in 1..=n {
        b.push(Exponent::unit(n, i));
    }
    let x1 = Exponent::unit(n, 1);
    for i in 1..=n {
        b.push(x1.shift(i));
    }
    b
}

/// Exact integer determinant by fraction-free (Bareiss) elimination.
pub fn int_det(mat: &[Vec<i64>]) -> i128 {
    let n = mat.len();
    if n == 0 {
        return 1;
    }
    let mut m: Vec<Vec<i128>> = mat
        .iter()
        .map(|row| row.iter().map(|&v| v as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

fn int_eval(point: &[i64], e: &Exponent) -> i128 {
    let mut acc = 1i128;
    for (j, &a) in e.0.iter().enumerate() {
        for _ in 0..a {
            acc *= point[j + 1] as i128;
        }
    }
    acc
}

/// Exact Vandermonde minor `det Z_{(B minus gamma) ++ [delta]}` of the
/// integer specialization.
pub fn specialization_minor(n: usize, gamma: &Exponent, delta: &Exponent) -> i128 {
    let points = specialization_points(n);
    let basis = specialization_basis(n);
    let mut cols: Vec<Exponent> = basis.iter().filter(|e| *e != gamma).cloned().collect();
    assert_eq!(cols.len() + 1, basis.len(), "gamma must be a basis element");
    cols.push(delta.clone());
    let mat: Vec<Vec<i64>> = points
        .iter()
        .map(|p| cols.iter().map(|e| int_eval(p, e) as i64).collect())
        .collect();
    int_det(&mat)
}

/// Exact determinant `det Z_B` of the integer specialization.
pub fn specialization_det(n: usize) -> i128 {
    let points = specialization_points(n);
    let basis = specialization_basis(n);
    let mat: Vec<Vec<i64>> = points
        .iter()
        .map(|p| basis.iter().map(|e| int_eval(p, e) as i64).collect())
        .collect();
    int_det(&mat)
}

/// Seeded tensor with three collinear points at format `(n, n+2)` and unit
/// weights: the first `n+1` points generic, the last on the line through the
/// first two.
pub fn collinear_instance(n: usize, seed: u64) -> (SymTensor, PointSet) {
    let mut rng = SeededRng::new(seed);
    let mut mat = DMatrix::<C64>::zeros(n + 2, n + 1);
    for i in 0..(n + 1) {
        mat[(i, 0)] = c(1.0, 0.0);
        for j in 1..=n {
            mat[(i, j)] = rng.cnormal();
        }
    }
    let t = c(0.25 + 0.5 * rng.uniform01(), 0.0);
    mat[(n + 1, 0)] = c(1.0, 0.0);
    for j in 1..=n {
        mat[(n + 1, j)] = t * mat[(0, j)] + (c(1.0, 0.0) - t) * mat[(1, j)];
    }
    let points = PointSet::new(mat);
    let weights = vec![c(1.0, 0.0); n + 2];
    let phi = crate::tensor::tensor_from_points(&points, &weights, 4).expect("sizes match");
    (phi, points)
}

/// Rows of the dependent-equation fixture at format (3, 7): six single
/// determinants plus the two differences they dominate.
pub fn dependent_fixture_rows(sys: &LinSystem) -> Option<Vec<usize>> {
    let e = Exponent;
    let mut rows = Vec::new();
    for (eta, theta) in [
        (e(vec![3, 0, 0]), e(vec![0, 2, 0])),
        (e(vec![3, 0, 0]), e(vec![0, 0, 2])),
        (e(vec![2, 1, 0]), e(vec![0, 2, 0])),
        (e(vec![2, 1, 0]), e(vec![0, 0, 2])),
        (e(vec![2, 0, 1]), e(vec![0, 2, 0])),
        (e(vec![2, 0, 1]), e(vec![0, 0, 2])),
    ] {
        rows.push(sys.find_e1(&eta, &theta)?);
    }
    rows.push(sys.find_e2(
        &(e(vec![1, 2, 0]), e(vec![0, 0, 2])),
        &(e(vec![1, 1, 1]), e(vec![0, 1, 1])),
    )?);
    rows.push(sys.find_e2(
        &(e(vec![1, 1, 1]), e(vec![0, 1, 1])),
        &(e(vec![1, 0, 2]), e(vec![0, 2, 0])),
    )?);
    Some(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jennrich::{match_points, reconstruction_residual};
    use crate::tensor::{random_instance, tensor_from_points, vandermonde};

    fn exact_assignment(points: &PointSet, weights: &[C64], vars: &[Exponent]) -> MomentAssignment {
        let mut a = MomentAssignment::new();
        for e in vars {
            let mut v = c(0.0, 0.0);
            for (i, w) in weights.iter().enumerate() {
                v += *w * points.eval(i, e);
            }
            a.set(e.clone(), v);
        }
        a
    }

    #[test]
    fn classification_trichotomy() {
        let basis = MonomialBasis::first_r(2, 4);
        let x1sq = Exponent(vec![2, 0]);
        let x1 = Exponent(vec![1, 0]);
        let x2 = Exponent(vec![0, 1]);
        assert_eq!(
            classify_equation(&basis, 4, &x1, 1, &x2, 2).unwrap(),
            EquationClass::Zero
        );
        // degree (2, 1) with one shift inside the basis
        assert_eq!(
            classify_equation(&basis, 4, &x1sq, 1, &x1, 2).unwrap(),
            EquationClass::Linear
        );
        // degree (2, 1) with both shifts outside
        assert_eq!(
            classify_equation(&basis, 4, &x1sq, 1, &x2, 2).unwrap(),
            EquationClass::Linear
        );
        assert_eq!(
            classify_equation(&basis, 4, &x1sq, 1, &x1sq, 2).unwrap(),
            EquationClass::Zero
        );
        let b5 = MonomialBasis::first_r(2, 5);
        let x1x2 = Exponent(vec![1, 1]);
        assert_eq!(
            classify_equation(&b5, 4, &x1sq, 1, &x1x2, 2).unwrap(),
            EquationClass::Quadratic
        );
        assert!(matches!(
            classify_equation(&basis, 6, &x1sq, 1, &x1, 2),
            Err(Error::OrderUnsupported(6))
        ));
    }

    #[test]
    fn recipe_matches_displayed_two_by_two() {
        // (n, r) = (2, 4): A = [[-m^{x1x2}_{x1^2}, m], [-m^{x2^2}_{x1^2}, m^{x1x2}_{x1^2}]]
        let n = 2;
        let (points, weights) = random_instance(n, 4, 5);
        let phi = tensor_from_points(&points, &weights, 4).unwrap();
        let basis = MonomialBasis::first_r(n, 4);
        let sys = assemble_linear_system(&phi, &basis, 0.0).unwrap();
        assert_eq!(sys.a.shape(), (2, 2));
        assert_eq!(sys.e1_rows, 1);
        assert_eq!(
            sys.var_index,
            vec![Exponent(vec![5, 0]), Exponent(vec![4, 1])]
        );
        let zb = vandermonde(&points, basis.exponents());
        let zbdet = zb.clone().lu().determinant();
        let front = zbdet * weights.iter().fold(c(1.0, 0.0), |acc, w| acc * *w);
        let minor = |gamma: &Exponent, delta: &Exponent| -> C64 {
            let mut cols: Vec<Exponent> = basis
                .exponents()
                .iter()
                .filter(|e| *e != gamma)
                .cloned()
                .collect();
            cols.push(delta.clone());
            vandermonde(&points, &cols).lu().determinant()
        };
        let x1sq = Exponent(vec![2, 0]);
        let x1x2 = Exponent(vec![1, 1]);
        let x2sq = Exponent(vec![0, 2]);
        let close = |a: C64, b: C64| (a - b).norm() < 1e-8 * (1.0 + b.norm());
        assert!(close(sys.a[(0, 0)], -front * minor(&x1sq, &x1x2)));
        assert!(close(sys.a[(0, 1)], front * zbdet));
        assert!(close(sys.a[(1, 0)], -front * minor(&x1sq, &x2sq)));
        assert!(close(sys.a[(1, 1)], front * minor(&x1sq, &x1x2)));
    }

    #[test]
    fn coefficient_factorization_general() {
        // every A entry is a signed Hankel minor that factors through the
        // Vandermonde minors times the weight determinant
        let n = 3;
        let r = 6;
        let (points, weights) = random_instance(n, r, 23);
        let phi = tensor_from_points(&points, &weights, 4).unwrap();
        let basis = find_basis(&phi, 0.0).unwrap();
        let sys = assemble_linear_system(&phi, &basis, 0.0).unwrap();
        let recipe = build_recipe(&basis, n, 4);
        let zb = vandermonde(&points, basis.exponents());
        let lam = weights.iter().fold(c(1.0, 0.0), |acc, w| acc * *w);
        let front = zb.clone().lu().determinant() * lam;
        for (row, rr) in recipe.rows.iter().enumerate() {
            let mut expect = vec![c(0.0, 0.0); sys.var_index.len()];
            for (pos, sign, mid) in &rr.terms {
                let v = match mid {
                    MinorId::Principal => front * zb.clone().lu().determinant(),
                    MinorId::Bordered { removed, border } => {
                        let mut cols: Vec<Exponent> = basis.exponents().to_vec();
                        cols.remove(*removed);
                        cols.push(border.clone());
                        front * vandermonde(&points, &cols).lu().determinant()
                    }
                };
                expect[*pos] += v * c(*sign as f64, 0.0);
            }
            for (col, want) in expect.iter().enumerate() {
                let got = sys.a[(row, col)];
                assert!(
                    (got - want).norm() <= 1e-8 * (1.0 + want.norm()),
                    "entry ({row},{col})"
                );
            }
        }
    }

    #[test]
    fn classification_agrees_with_relation_values() {
        // oracle: zero-class tuples evaluate to zero at random assignments,
        // linear-class tuples appear among the assembled rows, and the
        // classification is exhaustive
        let n = 3;
        let (points, weights) = random_instance(n, 7, 55);
        let phi = tensor_from_points(&points, &weights, 4).unwrap();
        let basis = MonomialBasis::first_r(n, 7);
        let sys = assemble_linear_system(&phi, &basis, 0.0).unwrap();
        let h = hankel(&phi);
        let mut rng = SeededRng::new(5);
        let mut assignment = MomentAssignment::new();
        for e in moment_variables(&basis, n, 4) {
            assignment.set(e, rng.cnormal());
        }
        let det_of = |eta: &Exponent, theta: &Exponent, assignment: &MomentAssignment| -> C64 {
            let mut rows = basis.exponents().to_vec();
            rows.push(eta.clone());
            let mut cols = basis.exponents().to_vec();
            cols.push(theta.clone());
            h.eval_block_defaulting(&rows, &cols, assignment)
                .lu()
                .determinant()
        };
        // generic bordered determinant magnitude as the cancellation scale
        let scale_ref = det_of(
            &Exponent(vec![3, 0, 0]),
            &Exponent(vec![0, 2, 0]),
            &assignment,
        )
        .norm()
        .max(1.0);
        let mut linear_borders = std::collections::BTreeSet::new();
        for (pa, a) in basis.exponents().iter().enumerate() {
            for b in &basis.exponents()[pa..] {
                for i in 1..=n {
                    for j in 1..=n {
                        if i == j || (a == b && i > j) {
                            continue;
                        }
                        let class = classify_equation(&basis, 4, a, i, b, j).unwrap();
                        match class {
                            EquationClass::Zero => {
                                let d1 = det_of(&a.shift(i), &b.shift(j), &assignment);
                                let d2 = det_of(&a.shift(j), &b.shift(i), &assignment);
                                assert!(
                                    (d1 - d2).norm() < 1e-9 * scale_ref,
                                    "{a} {i} {b} {j} -> {:.2e} at scale {scale_ref:.2e}",
                                    (d1 - d2).norm()
                                );
                            }
                            EquationClass::Linear => {
                                // orient each border pair row-first (larger degree)
                                let orient = |x: Exponent, y: Exponent| {
                                    if x.size() >= y.size() {
                                        (x, y)
                                    } else {
                                        (y, x)
                                    }
                                };
                                let key1 = orient(a.shift(i), b.shift(j));
                                let key2 = orient(a.shift(j), b.shift(i));
                                let found = sys.find_e1(&key1.0, &key1.1).is_some()
                                    || sys.find_e1(&key2.0, &key2.1).is_some()
                                    || sys.find_e2(&key1, &key2).is_some();
                                assert!(found, "linear relation {a} {i} {b} {j} missing");
                                let (lo, hi) = if key1 <= key2 {
                                    (key1, key2)
                                } else {
                                    (key2, key1)
                                };
                                linear_borders.insert((lo, hi));
                            }
                            EquationClass::Quadratic => {
                                assert_eq!(a.size(), 2);
                                assert_eq!(b.size(), 2);
                            }
                        }
                    }
                }
            }
        }
        // every assembled row comes from some linear-classified tuple
        assert!(linear_borders.len() >= sys.eq_index.len());
    }

    #[test]
    fn zero_tensor_has_empty_decomposition() {
        let phi = SymTensor::zeros(3, 4);
        let (dec, cert) = decompose4(&phi, 0, 1e-8).unwrap();
        assert_eq!(dec.size(), 0);
        assert_eq!(cert.r, 0);
        assert!(reconstruction_residual(&phi, &dec) == 0.0);
    }

    #[test]
    fn counts_match_recipe_enumeration() {
        for n in 2..=6usize {
            for cstr in 1..=n {
                let r = stratum_rank(n, cstr);
                let basis = MonomialBasis::first_r(n, r);
                let recipe = build_recipe(&basis, n, 4);
                let (y, e1) = count_y_e1(n, cstr).unwrap();
                assert_eq!(recipe.vars.len() as u64, y, "Y at ({n},{cstr})");
                assert_eq!(recipe.e1_rows as u64, e1, "E1 at ({n},{cstr})");
            }
        }
    }

    #[test]
    fn solve_extension_unique_generic() {
        let n = 4;
        let r = 2 * n + 1;
        let (points, weights) = random_instance(n, r, 31);
        let phi = tensor_from_points(&points, &weights, 4).unwrap();
        let basis = find_basis(&phi, 0.0).unwrap();
        assert_eq!(basis.len(), r);
        let out = solve_extension(&phi, &basis, 0, 0.0, 4).unwrap();
        assert_eq!(out.rank_a, out.y_count);
        match &out.result {
            ExtensionResult::Unique(a) => {
                let truth = exact_assignment(&points, &weights, &moment_variables(&basis, n, 4));
                for (e, v) in truth.sorted() {
                    let got = a.get(&e).unwrap();
                    assert!((got - v).norm() < 1e-6 * (1.0 + v.norm()), "var {e}");
                }
            }
            other => panic!("expected Unique, got {other:?}"),
        }
    }

    #[test]
    fn solve_extension_underdetermined_fails() {
        // (2, 5): four moment variables but only two linear equations
        let n = 2;
        let (points, weights) = random_instance(n, 5, 37);
        let phi = tensor_from_points(&points, &weights, 4).unwrap();
        let basis = find_basis(&phi, 0.0).unwrap();
        assert_eq!(basis.len(), 5);
        let sys = assemble_linear_system(&phi, &basis, 0.0).unwrap();
        assert_eq!(sys.var_index.len(), 4);
        assert_eq!(sys.a.nrows(), 2);
        let out = solve_extension(&phi, &basis, 0, 0.0, 4).unwrap();
        assert!(matches!(out.result, ExtensionResult::Fail(_)));
    }

    #[test]
    fn collinear_family_has_rank_drop() {
        let (phi, _) = collinear_instance(2, 3);
        let basis = find_basis(&phi, 0.0).unwrap();
        let out = solve_extension(&phi, &basis, 0, 0.0, 4).unwrap();
        assert_eq!(out.y_count, 2);
        assert_eq!(out.rank_a, 1);
        match out.result {
            ExtensionResult::Family { nullspace, .. } => assert_eq!(nullspace.len(), 1),
            other => panic!("expected Family, got {other:?}"),
        }
    }

    #[test]
    fn decompose4_recovers_efficient_formats() {
        for (n, r, seed) in [(3usize, 6usize, 41u64), (4, 9, 42)] {
            let (points, weights) = random_instance(n, r, seed);
            let phi = tensor_from_points(&points, &weights, 4).unwrap();
            let (dec, cert) = decompose4(&phi, 7, 1e-8).unwrap();
            assert!(cert.unique, "({n},{r})");
            assert_eq!(cert.rank_a, cert.y_count);
            assert!(match_points(&dec.points, &points).unwrap() < 1e-7);
            assert!(reconstruction_residual(&phi, &dec) < 1e-8);
        }
    }

    #[test]
    fn decompose4_rejects_monomials_with_guidance() {
        let phi = SymTensor::monomial(2, 4, &Exponent(vec![1, 2]));
        let err = decompose4(&phi, 0, 1e-8).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("monomial"), "message: {msg}");
        assert!(matches!(err.root(), Error::SingularPrincipalBlock));
    }

    #[test]
    fn decompose4_collinear_family_members() {
        let (phi, gens) = collinear_instance(4, 11);
        for seed in 0..5u64 {
            let (dec, cert) = decompose4(&phi, seed, 1e-8).unwrap();
            assert!(!cert.unique);
            assert!(reconstruction_residual(&phi, &dec) < 1e-8);
            // fixed generic points appear in every member
            for fixed in 2..5usize {
                let mut best = f64::INFINITY;
                for i in 0..dec.points.len() {
                    let mut dist = 0.0f64;
                    for k in 0..=4 {
                        dist = dist.max((dec.points.mat[(i, k)] - gens.mat[(fixed, k)]).norm());
                    }
                    best = best.min(dist);
                }
                assert!(best < 1e-7, "fixed point {fixed} missing: {best:.2e}");
            }
        }
    }

    #[test]
    fn counts_c1_and_table_values() {
        for n in 2..=10usize {
            let (y, e1) = count_y_e1(n, 1).unwrap();
            assert_eq!(y, binomial(n as u64 + 2, 3));
            assert_eq!(e1, n as u64 * binomial(n as u64, 2));
        }
        assert_eq!(count_y_e1(4, 1).unwrap(), (20, 24));
        assert!(count_y_e1(4, 5).is_err());
    }

    #[test]
    fn tstar_value_and_root() {
        let t = tstar();
        assert!(t > 0.63296 && t < 0.63298, "t* = {t}");
        let p = (-2.0 / 15.0) * t.powi(3) + (11.0 / 24.0) * t * t - 0.5 * t + 1.0 / 6.0;
        assert!(p.abs() < 1e-10);
        let (y, e1) = count_y_e1_real(1000.0, 500.0);
        assert!(e1 > y);
    }

    #[test]
    fn count_threshold_reference_values() {
        assert_eq!(count_threshold(0.4).unwrap(), 5);
        assert_eq!(count_threshold(0.5).unwrap(), 8);
        assert_eq!(count_threshold(0.6).unwrap(), 31);
        assert!(count_threshold(0.7).is_err());
    }

    #[test]
    fn specialization_determinant_and_minors() {
        for n in 2..=6usize {
            let m = specialization_det(n);
            assert_eq!(m, 2 * 3i128.pow(n as u32 - 1), "n = {n}");
            let x1 = |i: usize| Exponent::unit(n, 1).shift(i);
            let pair = |j: usize, k: usize| Exponent::unit(n, j).shift(k);
            for j in 2..=n {
                for k in j..=n {
                    let sign = if (n + 1) % 2 == 0 { 1 } else { -1 };
                    assert_eq!(
                        specialization_minor(n, &x1(1), &pair(j, k)),
                        sign * m,
                        "minor (x1^2 -> x{j}x{k}) at n={n}"
                    );
                }
            }
            for j in 2..=n {
                for k in (j + 1)..=n {
                    let s1 = if (n + j + 1) % 2 == 0 { 1 } else { -1 };
                    assert_eq!(specialization_minor(n, &x1(j), &pair(j, k)), s1 * 2 * m);
                    let s2 = if (n + k) % 2 == 0 { 1 } else { -1 };
                    assert_eq!(specialization_minor(n, &x1(k), &pair(j, k)), s2 * m);
                    for i in 2..=n {
                        if i != j && i != k {
                            assert_eq!(specialization_minor(n, &x1(i), &pair(j, k)), 0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn collinear_vandermonde_products_vanish() {
        let n = 4;
        let (_, points) = collinear_instance(n, 9);
        let base: Vec<Exponent> = specialization_basis(n)[..n + 1].to_vec();
        let minor = |delta: &Exponent| -> C64 {
            let mut cols = base.clone();
            cols.push(delta.clone());
            vandermonde(&points, &cols).lu().determinant()
        };
        let pair = |i: usize, j: usize| Exponent::unit(n, i).shift(j);
        let (i, j, k, l) = (1, 2, 3, 4);
        let lhs = minor(&pair(i, j)) * minor(&pair(k, l)) - minor(&pair(i, k)) * minor(&pair(j, l));
        let scale = [pair(i, j), pair(k, l), pair(i, k), pair(j, l)]
            .iter()
            .map(|p| minor(p).norm())
            .fold(0.0f64, f64::max);
        assert!(lhs.norm() < 1e-9 * scale.max(1.0) * scale.max(1.0));
    }

    #[test]
    fn dependent_rows_fixture() {
        // the 8-equation, 10-variable submatrix has rank at most 7
        let n = 3;
        for seed in 0..4u64 {
            let (points, weights) = random_instance(n, 7, 100 + seed);
            let phi = tensor_from_points(&points, &weights, 4).unwrap();
            let basis = MonomialBasis::first_r(n, 7);
            let sys = assemble_linear_system(&phi, &basis, 0.0).unwrap();
            assert_eq!(sys.var_index.len(), 10);
            let rows = dependent_fixture_rows(&sys).expect("fixture rows present");
            assert_eq!(rows.len(), 8);
            let sub = sys.a.select_rows(rows.iter());
            assert!(crate::linalg::numerical_rank(&sub, 1e-9) <= 7);
        }
    }
}
