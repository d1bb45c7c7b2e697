//! Generalized Artin–Schreier systems
//! `x_i = c_i + sum c_{i,j,m} x_j^{p^m}` (all `m >= 1`) with coefficients
//! polynomial in parameters `t_1..t_k` over `F_q`.
//!
//! Counting flattens each unknown over `F_{p^D}` into `D` coordinates over
//! `F_p`; the p-power map is `F_p`-linear, so the solution set is an affine
//! `F_p`-subspace.

use crate::arith::{add_mod, mul_mod};
use crate::crystal::Crystal;
use crate::field::{make_field, Embedding, FfElem, FiniteField};
use crate::linalg::{self, FqMat};
use crate::{Error, Result};
use num::BigUint;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Largest absolute degree of a confirmation level in [`geometric_count`].
pub const LEVEL_CAP: u32 = 1024;

/// Largest flattened dimension (unknowns times level degree) used when
/// confirming a geometric count by direct counting.
pub const FLATTEN_CAP: usize = 480;

/// Polynomial in the parameters with coefficients in the base field.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BasePoly {
    pub terms: BTreeMap<Vec<u32>, FfElem>,
}

impl BasePoly {
    pub fn zero() -> Self {
        BasePoly::default()
    }

    pub fn constant(k: &FiniteField, params: usize, c: FfElem) -> Self {
        let mut terms = BTreeMap::new();
        if !k.is_zero(&c) {
            terms.insert(vec![0; params], c);
        }
        BasePoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value at `point`, coordinates in the field of `emb.target`.
    pub fn eval(&self, emb: &Embedding, point: &[FfElem]) -> Result<FfElem> {
        let l = &emb.target;
        let mut acc = l.zero();
        for (mono, c) in &self.terms {
            let mut t = emb.embed(c)?;
            for (x, &e) in point.iter().zip(mono) {
                t = l.mul(&t, &l.pow(x, e as u128));
            }
            acc = l.add(&acc, &t);
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsTerm {
    pub var: usize,
    /// The monomial is `x_var^{p^exp}`.
    pub exp: u32,
    pub coeff: BasePoly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsEquation {
    pub constant: BasePoly,
    pub terms: Vec<AsTerm>,
}

/// Equation `i` reads `x_i = constant_i + sum terms_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsSystem {
    base: FiniteField,
    params: usize,
    equations: Vec<AsEquation>,
}

/// Number of solutions over one finite level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberCount {
    pub p: u64,
    /// Absolute degree of the field the solutions were counted in.
    pub level: u32,
    /// `log_p` of the count; `None` when there is no solution at this level.
    pub log_p: Option<u32>,
}

impl FiberCount {
    pub fn count(&self) -> BigUint {
        match self.log_p {
            None => BigUint::from(0u32),
            Some(e) => BigUint::from(self.p).pow(e),
        }
    }
}

/// The geometric fiber size `p^log_p` with the direct counts that confirm it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometricCount {
    pub p: u64,
    pub log_p: u32,
    /// Degree over the point field after which every solution is rational.
    pub rationality_degree: u32,
    pub confirmations: Vec<FiberCount>,
}

impl GeometricCount {
    pub fn count(&self) -> BigUint {
        BigUint::from(self.p).pow(self.log_p)
    }
}

impl AsSystem {
    pub fn new(base: &FiniteField, params: usize, equations: Vec<AsEquation>) -> Result<Self> {
        let r = equations.len();
        let check_poly = |poly: &BasePoly, at: &str| -> Result<()> {
            for (mono, c) in &poly.terms {
                if mono.len() != params {
                    return Err(Error::MalformedSystem(format!(
                        "{at}: monomial has {} exponents, expected {params}",
                        mono.len()
                    )));
                }
                if !base.contains(c) {
                    return Err(Error::MalformedSystem(format!("{at}: coefficient outside the base field")));
                }
            }
            Ok(())
        };
        for (i, eq) in equations.iter().enumerate() {
            check_poly(&eq.constant, &format!("equation {i} constant"))?;
            for (t, term) in eq.terms.iter().enumerate() {
                let at = format!("equation {i} term {t}");
                if term.var >= r {
                    return Err(Error::MalformedSystem(format!("{at}: variable {} out of range", term.var)));
                }
                if term.exp == 0 {
                    return Err(Error::MalformedSystem(format!(
                        "{at}: exponent p^0 is not allowed on the right-hand side"
                    )));
                }
                check_poly(&term.coeff, &at)?;
            }
        }
        Ok(AsSystem { base: base.clone(), params, equations })
    }

    pub fn base(&self) -> &FiniteField {
        &self.base
    }

    pub fn p(&self) -> u64 {
        self.base.p()
    }

    pub fn params(&self) -> usize {
        self.params
    }

    pub fn num_vars(&self) -> usize {
        self.equations.len()
    }

    pub fn equations(&self) -> &[AsEquation] {
        &self.equations
    }

    /// `max_i e_i`, where `e_i` is the largest `m` with a nonzero term
    /// `x^{p^m}` in equation `i` (zero when the equation is constant).
    pub fn degree(&self) -> u32 {
        self.equations
            .iter()
            .flat_map(|eq| eq.terms.iter())
            .filter(|t| !t.coeff.is_zero())
            .map(|t| t.exp)
            .max()
            .unwrap_or(0)
    }

    /// Adds `y = x_j^p` for every variable carrying a term of exponent
    /// `m >= 2` and rewrites those terms as `y^{p^{m-1}}`, until the degree
    /// is at most one. The new variables are appended after the old ones.
    pub fn reduce_degree(&self) -> AsSystem {
        let mut eqs = self.equations.clone();
        let one = BasePoly::constant(&self.base, self.params, self.base.one());
        loop {
            let mut fresh: BTreeMap<usize, usize> = BTreeMap::new();
            let mut next_var = eqs.len();
            for eq in eqs.iter_mut() {
                for term in eq.terms.iter_mut().filter(|t| t.exp >= 2 && !t.coeff.is_zero()) {
                    let y = *fresh.entry(term.var).or_insert_with(|| {
                        next_var += 1;
                        next_var - 1
                    });
                    term.var = y;
                    term.exp -= 1;
                }
            }
            if fresh.is_empty() {
                break;
            }
            let mut by_new: Vec<(usize, usize)> = fresh.into_iter().map(|(x, y)| (y, x)).collect();
            by_new.sort();
            for (_, x) in by_new {
                eqs.push(AsEquation {
                    constant: BasePoly::zero(),
                    terms: vec![AsTerm { var: x, exp: 1, coeff: one.clone() }],
                });
            }
        }
        AsSystem { base: self.base.clone(), params: self.params, equations: eqs }
    }

    /// The formal Jacobian of `x_i - sum P_{ij}(x_j^p)` is the identity:
    /// every right-hand monomial is a p-th power, so its derivative vanishes.
    pub fn jacobian_is_identity(&self) -> Result<bool> {
        let p = self.p();
        for (i, eq) in self.equations.iter().enumerate() {
            for term in &eq.terms {
                if term.exp == 0 {
                    return Err(Error::MalformedSystem(format!("equation {i} has a non p-power monomial")));
                }
                // d/dx x^{p^m} = p^m x^{p^m - 1}, and p^m = 0 in characteristic p
                let multiplier = p.checked_pow(term.exp).map_or(0, |v| v % p);
                if multiplier != 0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Substitutes a point with coordinates in `point_field`.
    pub fn specialize(&self, point_field: &FiniteField, point: &[FfElem]) -> Result<Specialized> {
        if point.len() != self.params {
            return Err(Error::Shape(format!("point has {} coordinates, expected {}", point.len(), self.params)));
        }
        if let Some(x) = point.iter().find(|x| !point_field.contains(x)) {
            let _ = x;
            return Err(Error::ForeignElement);
        }
        let emb = Embedding::new(&self.base, point_field)?;
        let mut constants = Vec::with_capacity(self.num_vars());
        let mut terms = Vec::with_capacity(self.num_vars());
        for eq in &self.equations {
            constants.push(eq.constant.eval(&emb, point)?);
            let mut row = Vec::new();
            for t in &eq.terms {
                let c = t.coeff.eval(&emb, point)?;
                if !point_field.is_zero(&c) {
                    row.push((t.var, t.exp, c));
                }
            }
            terms.push(row);
        }
        Ok(Specialized { field: point_field.clone(), constants, terms })
    }
}

/// A system with coefficients evaluated in a finite field.
#[derive(Debug, Clone)]
pub struct Specialized {
    pub field: FiniteField,
    pub constants: Vec<FfElem>,
    /// `(var, exp, coeff)` per equation.
    pub terms: Vec<Vec<(usize, u32, FfElem)>>,
}

impl Specialized {
    pub fn num_vars(&self) -> usize {
        self.constants.len()
    }

    /// Checks a candidate solution with coordinates in `level`.
    pub fn is_solution(&self, emb: &Embedding, x: &[FfElem]) -> Result<bool> {
        let l = &emb.target;
        for (i, (c, row)) in self.constants.iter().zip(&self.terms).enumerate() {
            let mut rhs = emb.embed(c)?;
            for (j, m, coeff) in row {
                let t = l.mul(&emb.embed(coeff)?, &l.frobenius(&x[*j], *m as u64));
                rhs = l.add(&rhs, &t);
            }
            if rhs != x[i] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact count over `level` by `F_p`-flattening.
    pub fn count_at(&self, level: &FiniteField) -> Result<FiberCount> {
        let emb = Embedding::new(&self.field, level)?;
        let p = level.p();
        let dd = level.deg() as usize;
        let r = self.num_vars();
        let dim = r * dd;
        let mut mat = vec![vec![0u64; dim]; dim];
        for i in 0..r {
            for a in 0..dd {
                mat[i * dd + a][i * dd + a] = 1;
            }
        }
        // products of residues are summed unreduced in blocks of 1024
        let small = p < (1 << 26);
        for (i, row) in self.terms.iter().enumerate() {
            for (j, m, coeff) in row {
                // block (i, j) -= [c] [Frob^m]
                let cm = level.mul_matrix(&emb.embed(coeff)?);
                let fm = level.frobenius_matrix(*m as u64);
                for a in 0..dd {
                    let out = &mut mat[i * dd + a][j * dd..(j + 1) * dd];
                    let mut acc = vec![0u64; dd];
                    for (k, &c) in cm[a].iter().enumerate() {
                        if c == 0 {
                            continue;
                        }
                        if small {
                            for (x, &y) in acc.iter_mut().zip(&fm[k]) {
                                *x += c * y;
                            }
                        } else {
                            for (x, &y) in acc.iter_mut().zip(&fm[k]) {
                                *x = add_mod(*x, mul_mod(c, y, p), p);
                            }
                        }
                        if k % 1024 == 1023 {
                            acc.iter_mut().for_each(|x| *x %= p);
                        }
                    }
                    for (cell, x) in out.iter_mut().zip(acc) {
                        *cell = (*cell + p - x % p) % p;
                    }
                }
            }
        }
        let rhs: Vec<u64> = self
            .constants
            .iter()
            .map(|c| emb.embed(c).map(|e| e.coeffs))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        let log_p = linalg::fp_solve_affine(p, &mat, &rhs).map(|k| k as u32);
        Ok(FiberCount { p, level: level.deg(), log_p })
    }

    /// For a degree-one system `x = M x^{(p)} + c`, returns `M`.
    fn linear_part(&self) -> Result<FqMat> {
        let k = &self.field;
        let r = self.num_vars();
        let mut m = vec![vec![k.zero(); r]; r];
        for (i, row) in self.terms.iter().enumerate() {
            for (j, e, c) in row {
                if *e != 1 {
                    return Err(Error::PreconditionViolated("system must have degree at most one".into()));
                }
                m[i][*j] = k.add(&m[i][*j], c);
            }
        }
        Ok(m)
    }
}

fn fq_sigma(k: &FiniteField, m: &FqMat) -> FqMat {
    linalg::fq_mat_frobenius(k, m, 1)
}

/// Stable rank of `x -> M x^{(p)}` and the matrix of that map on its stable
/// image, in a basis of the image.
fn stable_part(k: &FiniteField, m: &FqMat) -> (usize, FqMat) {
    let r = m.len();
    let mut acc = m.clone();
    let mut sig = m.clone();
    let mut rank = linalg::fq_rank(k, &acc);
    for _ in 0..r {
        sig = fq_sigma(k, &sig);
        let next = linalg::fq_mat_mul(k, &acc, &sig);
        let nr = linalg::fq_rank(k, &next);
        acc = next;
        if nr == rank {
            break;
        }
        rank = nr;
    }
    if rank == 0 {
        return (0, Vec::new());
    }
    let basis = linalg::fq_column_basis(k, &acc);
    // f(B v) = M sigma(B) sigma(v) = B N sigma(v)
    let image = linalg::fq_mat_mul(k, m, &fq_sigma(k, &basis));
    let n = linalg::fq_solve(k, &basis, &image).expect("stable image is invariant");
    (rank, n)
}

fn multiplicative_order(k: &FiniteField, g: &FqMat, cap: u64) -> Option<u64> {
    let id = linalg::fq_identity(k, g.len());
    let mut acc = g.clone();
    for o in 1..=cap {
        if acc == id {
            return Some(o);
        }
        acc = linalg::fq_mat_mul(k, &acc, g);
    }
    None
}

/// Builds the fiber system of a crystal: `x_i = sum_j Abar_{ij} x_j^{p^n}`.
pub fn crystal_fiber_system(c: &Crystal) -> Result<AsSystem> {
    let k = c.field();
    let abar = c.mod_p_matrix();
    let n = u32::try_from(c.n()).map_err(|_| Error::Shape("twist too large".into()))?;
    let equations = abar
        .iter()
        .map(|row| AsEquation {
            constant: BasePoly::zero(),
            terms: row
                .iter()
                .enumerate()
                .filter(|(_, a)| !k.is_zero(a))
                .map(|(j, a)| AsTerm { var: j, exp: n, coeff: BasePoly::constant(k, 0, a.clone()) })
                .collect(),
        })
        .collect();
    AsSystem::new(k, 0, equations)
}

/// Counts solutions of `sys` at `point` over the field `level`.
pub fn count_solutions(
    sys: &AsSystem,
    point_field: &FiniteField,
    point: &[FfElem],
    level: &FiniteField,
) -> Result<FiberCount> {
    sys.reduce_degree().specialize(point_field, point)?.count_at(level)
}

/// The number of geometric points in the fiber over `point`.
///
/// After degree reduction the fiber is `x = M x^{(p)} + c` over the point
/// field `L0` of degree `d`. Its geometric size is `p^rho` with `rho` the
/// stable rank of `x -> M x^{(p)}`; every solution is rational over the
/// extension of `L0` of degree `o * p` (`o` when `c = 0`), where `o` is the
/// order of the `d`-fold twisted product of that map on its stable image. The count is
/// confirmed by flattening at that level and at twice that level whenever
/// the flattened system stays within [`FLATTEN_CAP`].
pub fn geometric_count(sys: &AsSystem, point_field: &FiniteField, point: &[FfElem]) -> Result<GeometricCount> {
    let spec = sys.reduce_degree().specialize(point_field, point)?;
    let k = point_field;
    let p = k.p();
    let d = k.deg() as u64;
    let m = spec.linear_part()?;
    let (rho, n) = stable_part(k, &m);
    let order = if rho == 0 {
        1
    } else {
        let mut g = n.clone();
        let mut sig = n.clone();
        for _ in 1..d {
            sig = fq_sigma(k, &sig);
            g = linalg::fq_mat_mul(k, &g, &sig);
        }
        let cap = (LEVEL_CAP as u64 / d / p).max(1);
        multiplicative_order(k, &g, cap).ok_or_else(|| {
            Error::NoStabilization(format!("Frobenius order on the fixed space exceeds {cap} (level cap {LEVEL_CAP})"))
        })?
    };
    // the solutions form a torsor under the fixed space; Frobenius translates
    // it by an element of order dividing p, which vanishes when c = 0
    let homogeneous = spec.constants.iter().all(|c| k.is_zero(c));
    let rel = match (rho, homogeneous) {
        (0, _) => 1,
        (_, true) => order,
        (_, false) => order * p,
    };
    let level = d * rel;
    if level > LEVEL_CAP as u64 {
        return Err(Error::NoStabilization(format!("rationality level {level} exceeds {LEVEL_CAP}")));
    }
    let mut confirmations = Vec::new();
    for lv in [level, 2 * level] {
        if lv as usize * spec.num_vars() > FLATTEN_CAP {
            continue;
        }
        let field = make_field(p, lv as u32, 0)?;
        let fc = spec.count_at(&field)?;
        if fc.log_p != Some(rho as u32) {
            return Err(Error::NoStabilization(format!(
                "count at level {lv} is {} but the fixed space has dimension {rho}",
                fc.count()
            )));
        }
        confirmations.push(fc);
    }
    Ok(GeometricCount { p, log_p: rho as u32, rationality_degree: rel as u32, confirmations })
}

/// `log_p` of the geometric fiber count divided by `n`.
pub fn p_rank_via_fiber_count(c: &Crystal) -> Result<usize> {
    let sys = crystal_fiber_system(c)?;
    let gc = geometric_count(&sys, c.field(), &[])?;
    let n = c.n() as u32;
    if gc.log_p % n != 0 {
        return Err(Error::PreconditionViolated(format!("fiber has p^{} points, not a power of p^{n}", gc.log_p)));
    }
    Ok((gc.log_p / n) as usize)
}

/// Convenience: a system over a base field with constant coefficients,
/// given as `(constant, [(var, exp, coeff)])` rows of base-field elements.
pub fn constant_system(k: &FiniteField, rows: Vec<(FfElem, Vec<(usize, u32, FfElem)>)>) -> Result<AsSystem> {
    let eqs = rows
        .into_iter()
        .map(|(c, terms)| AsEquation {
            constant: BasePoly::constant(k, 0, c),
            terms: terms
                .into_iter()
                .map(|(var, exp, coeff)| AsTerm { var, exp, coeff: BasePoly::constant(k, 0, coeff) })
                .collect(),
        })
        .collect();
    AsSystem::new(k, 0, eqs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::WittRing;

    fn fp(p: u64) -> FiniteField {
        make_field(p, 1, 0).unwrap()
    }

    fn count(sys: &AsSystem, level_deg: u32) -> Option<u32> {
        let k = sys.base().clone();
        let l = make_field(k.p(), level_deg, 0).unwrap();
        count_solutions(sys, &k, &[], &l).unwrap().log_p
    }

    #[test]
    fn degree_examples() {
        let k = fp(2);
        let c = constant_system(&k, vec![(k.one(), vec![])]).unwrap();
        assert_eq!(c.degree(), 0);
        let x = constant_system(&k, vec![(k.zero(), vec![(0, 1, k.one())])]).unwrap();
        assert_eq!(x.degree(), 1);
        let x2 = constant_system(&k, vec![(k.zero(), vec![(0, 2, k.one())])]).unwrap();
        assert_eq!(x2.degree(), 2);
        assert!(matches!(constant_system(&k, vec![(k.zero(), vec![(0, 0, k.one())])]), Err(Error::MalformedSystem(_))));
    }

    #[test]
    fn reduce_degree_examples() {
        let k = fp(3);
        let x = constant_system(&k, vec![(k.zero(), vec![(0, 1, k.one())])]).unwrap();
        assert_eq!(x.reduce_degree(), x);
        let x2 = constant_system(&k, vec![(k.zero(), vec![(0, 2, k.one())])]).unwrap();
        let r2 = x2.reduce_degree();
        let expect =
            constant_system(&k, vec![(k.zero(), vec![(1, 1, k.one())]), (k.zero(), vec![(0, 1, k.one())])]).unwrap();
        assert_eq!(r2, expect);
        let x3 = constant_system(&k, vec![(k.zero(), vec![(0, 3, k.one())])]).unwrap();
        let r3 = x3.reduce_degree();
        assert_eq!(r3.num_vars(), 3);
        assert_eq!(r3.degree(), 1);
        assert!(r3.jacobian_is_identity().unwrap());
    }

    #[test]
    fn reduce_degree_numbers_new_variables_consistently() {
        // x0 = x1^{p^2}, x1 = c x0^{p^2}: the helper for x1 is created first
        let k = make_field(3, 2, 0).unwrap();
        let c = k.elem(vec![2, 1]).unwrap();
        let sys = constant_system(&k, vec![(k.zero(), vec![(1, 2, k.one())]), (k.zero(), vec![(0, 2, c)])]).unwrap();
        let red = sys.reduce_degree();
        assert_eq!(red.equations()[2].terms[0].var, 1);
        assert_eq!(red.equations()[3].terms[0].var, 0);
        assert_eq!(count(&sys, 2), Some(0));
    }

    #[test]
    fn count_examples() {
        let k = fp(2);
        let x = constant_system(&k, vec![(k.zero(), vec![(0, 1, k.one())])]).unwrap();
        assert_eq!(count(&x, 1), Some(1));
        let zero = constant_system(&k, vec![(k.zero(), vec![])]).unwrap();
        assert_eq!(count(&zero, 1), Some(0));
        let chain = constant_system(&k, vec![(k.zero(), vec![]), (k.zero(), vec![(0, 1, k.one())])]).unwrap();
        for d in 1..4 {
            assert_eq!(count(&chain, d), Some(0));
        }
    }

    #[test]
    fn artin_schreier_needs_an_extension() {
        // x = x^2 + 1 has trace obstruction over F_2, two roots in F_4
        let k = fp(2);
        let sys = constant_system(&k, vec![(k.one(), vec![(0, 1, k.one())])]).unwrap();
        assert_eq!(count(&sys, 1), None);
        assert_eq!(count(&sys, 2), Some(1));
        let gc = geometric_count(&sys, &k, &[]).unwrap();
        assert_eq!(gc.log_p, 1);
        assert!(!gc.confirmations.is_empty());
    }

    #[test]
    fn odd_degree_field_of_definition() {
        // x1 = x2^2, x2 = x3^2, x3 = x1^2 + c: solutions live in F_8 for c = 0
        // and require an odd-degree extension that doubling never reaches
        let k = fp(2);
        let sys = constant_system(
            &k,
            vec![
                (k.zero(), vec![(1, 1, k.one())]),
                (k.zero(), vec![(2, 1, k.one())]),
                (k.zero(), vec![(0, 1, k.one())]),
            ],
        )
        .unwrap();
        assert_eq!(count(&sys, 1), Some(1));
        assert_eq!(count(&sys, 2), Some(1));
        assert_eq!(count(&sys, 4), Some(1));
        assert_eq!(count(&sys, 3), Some(3));
        assert_eq!(geometric_count(&sys, &k, &[]).unwrap().log_p, 3);
    }

    #[test]
    fn fiber_systems() {
        let w = WittRing::new(&fp(2), 3).unwrap();
        let c = Crystal::from_int_matrix(&w, 1, &[vec![0, 2], vec![1, 0]]).unwrap();
        let sys = crystal_fiber_system(&c).unwrap();
        // x1 = 0, x2 = x1^p
        assert!(sys.equations()[0].terms.is_empty());
        assert_eq!(sys.equations()[1].terms[0].var, 0);
        assert!(sys.jacobian_is_identity().unwrap());
        assert_eq!(geometric_count(&sys, &fp(2), &[]).unwrap().log_p, 0);
        assert_eq!(p_rank_via_fiber_count(&c).unwrap(), 0);
        let ord = Crystal::from_int_matrix(&w, 1, &[vec![1, 0], vec![0, 2]]).unwrap();
        assert_eq!(p_rank_via_fiber_count(&ord).unwrap(), 1);
        let e0 = crate::crystal::slope_line_crystal(0, &w, 1).unwrap();
        assert_eq!(p_rank_via_fiber_count(&ord.direct_sum(&e0).unwrap()).unwrap(), 2);
        let unit = Crystal::from_int_matrix(&w, 1, &[vec![1]]).unwrap();
        let s = crystal_fiber_system(&unit).unwrap();
        assert_eq!(count(&s, 1), Some(1));
    }

    #[test]
    fn fiber_count_with_twist_counts_in_powers_of_p_to_the_n() {
        let f4 = make_field(2, 2, 0).unwrap();
        let w = WittRing::new(&f4, 3).unwrap();
        let c = Crystal::from_int_matrix(&w, 2, &[vec![1, 0], vec![0, 2]]).unwrap();
        let gc = geometric_count(&crystal_fiber_system(&c).unwrap(), &f4, &[]).unwrap();
        assert_eq!(gc.log_p, 2);
        assert_eq!(p_rank_via_fiber_count(&c).unwrap(), 1);
    }
}
