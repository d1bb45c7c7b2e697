//! Matrices over `W_s(F_q)`, over `F_q` and over `F_p`.
//!
//! Witt matrices are plain `Vec<Vec<WittElement>>` interpreted through a
//! [`WittRing`]. Determinants and characteristic polynomials are division
//! free (Berkowitz), so they stay exact in the non-domain `W_s`.

use crate::arith::{inv_mod_prime, mul_mod, sub_mod, Valuation};
use crate::field::{FfElem, FiniteField};
use crate::witt::{WittElement, WittRing};
use crate::{Error, Result};
use itertools::Itertools;

pub type WMat = Vec<Vec<WittElement>>;
pub type FqMat = Vec<Vec<FfElem>>;

pub fn identity(w: &WittRing, r: usize) -> WMat {
    (0..r).map(|i| (0..r).map(|j| if i == j { w.one() } else { w.zero() }).collect()).collect()
}

pub fn zeros(w: &WittRing, rows: usize, cols: usize) -> WMat {
    vec![vec![w.zero(); cols]; rows]
}

pub fn is_square(m: &WMat) -> bool {
    m.iter().all(|row| row.len() == m.len())
}

pub fn mat_mul(w: &WittRing, a: &WMat, b: &WMat) -> WMat {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(w.zero(), |acc, k| {
                        if w.is_zero(&row[k]) {
                            acc
                        } else {
                            w.add(&acc, &w.mul(&row[k], &b[k][j]))
                        }
                    })
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(w: &WittRing, a: &WMat, v: &[WittElement]) -> Vec<WittElement> {
    a.iter().map(|row| row.iter().zip(v).fold(w.zero(), |acc, (x, y)| w.add(&acc, &w.mul(x, y)))).collect()
}

/// Entrywise `sigma^k`.
pub fn mat_sigma(w: &WittRing, a: &WMat, k: u64) -> WMat {
    if w.deg() == 1 || k.is_multiple_of(w.deg() as u64) {
        return a.clone();
    }
    a.iter().map(|row| row.iter().map(|x| w.frobenius_lift(x, k)).collect()).collect()
}

pub fn vec_sigma(w: &WittRing, v: &[WittElement], k: u64) -> Vec<WittElement> {
    v.iter().map(|x| w.frobenius_lift(x, k)).collect()
}

/// `A sigma^n(A) sigma^{2n}(A) ... sigma^{(count-1)n}(A)`.
pub fn twisted_product(w: &WittRing, a: &WMat, n: u64, count: u64) -> WMat {
    let mut acc = identity(w, a.len());
    for i in 0..count {
        acc = mat_mul(w, &acc, &mat_sigma(w, a, i * n));
    }
    acc
}

pub fn block_diag(w: &WittRing, a: &WMat, b: &WMat) -> WMat {
    let (ra, rb) = (a.len(), b.len());
    let mut out = zeros(w, ra + rb, ra + rb);
    for i in 0..ra {
        out[i][..ra].clone_from_slice(&a[i]);
    }
    for i in 0..rb {
        out[ra + i][ra..].clone_from_slice(&b[i]);
    }
    out
}

pub fn transpose<T: Clone>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Coefficients `c_0..c_r` of `det(x I - A)`, low-to-high (so `c_r = 1`).
pub fn char_poly(w: &WittRing, a: &WMat) -> Vec<WittElement> {
    let r = a.len();
    // v holds the coefficients of the leading k x k block, high-to-low.
    let mut v = vec![w.one()];
    for k in 0..r {
        let col: Vec<WittElement> = (0..k).map(|i| a[i][k].clone()).collect();
        let row: Vec<WittElement> = (0..k).map(|j| a[k][j].clone()).collect();
        let sub: WMat = (0..k).map(|i| a[i][..k].to_vec()).collect();
        // Toeplitz column t = [1, -a_kk, -R C, -R A C, ..., -R A^{k-1} C]
        let mut t = vec![w.one(), w.neg(&a[k][k])];
        let mut y = col;
        for _ in 0..k {
            let rc = row.iter().zip(&y).fold(w.zero(), |acc, (x, z)| w.add(&acc, &w.mul(x, z)));
            t.push(w.neg(&rc));
            y = mat_vec(w, &sub, &y);
        }
        let mut next = vec![w.zero(); k + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            for j in 0..v.len().min(i + 1) {
                if i - j < t.len() {
                    *slot = w.add(slot, &w.mul(&t[i - j], &v[j]));
                }
            }
        }
        v = next;
    }
    v.reverse();
    v
}

pub fn det(w: &WittRing, a: &WMat) -> WittElement {
    let c0 = char_poly(w, a).swap_remove(0);
    if a.len() % 2 == 1 {
        w.neg(&c0)
    } else {
        c0
    }
}

/// The `k`-th compound matrix: `k x k` minors indexed by sorted subsets in
/// lexicographic order.
pub fn compound(w: &WittRing, a: &WMat, k: usize) -> WMat {
    let subsets: Vec<Vec<usize>> = (0..a.len()).combinations(k).collect();
    subsets
        .iter()
        .map(|rows| {
            subsets
                .iter()
                .map(|cols| {
                    let minor: WMat = rows.iter().map(|&i| cols.iter().map(|&j| a[i][j].clone()).collect()).collect();
                    det(w, &minor)
                })
                .collect()
        })
        .collect()
}

/// Inverse over `W_s`, defined exactly when the determinant is a unit.
pub fn inverse(w: &WittRing, a: &WMat) -> Option<WMat> {
    let r = a.len();
    let mut m: WMat = a.to_vec();
    let mut inv = identity(w, r);
    for k in 0..r {
        let piv = (k..r).find(|&i| w.is_unit(&m[i][k]))?;
        m.swap(k, piv);
        inv.swap(k, piv);
        let u = w.inv(&m[k][k])?;
        for j in 0..r {
            m[k][j] = w.mul(&m[k][j], &u);
            inv[k][j] = w.mul(&inv[k][j], &u);
        }
        for i in 0..r {
            if i != k && !w.is_zero(&m[i][k]) {
                let f = m[i][k].clone();
                for j in 0..r {
                    let (mk, ik) = (m[k][j].clone(), inv[k][j].clone());
                    m[i][j] = w.sub(&m[i][j], &w.mul(&f, &mk));
                    inv[i][j] = w.sub(&inv[i][j], &w.mul(&f, &ik));
                }
            }
        }
    }
    Some(inv)
}

/// Smith form `L A R = D` over the local ring `W_s`, with both transforms
/// and their inverses. `diag[i]` is the valuation of the `i`-th pivot;
/// [`Valuation::Infinite`] marks pivots that vanish in `W_s`.
#[derive(Debug, Clone)]
pub struct Smith {
    pub diag: Vec<Valuation>,
    pub left: WMat,
    pub left_inv: WMat,
    pub right: WMat,
    pub right_inv: WMat,
}

pub fn smith(w: &WittRing, a: &WMat) -> Smith {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m = a.to_vec();
    let (mut l, mut li) = (identity(w, rows), identity(w, rows));
    let (mut r, mut ri) = (identity(w, cols), identity(w, cols));
    let mut diag = Vec::with_capacity(rows.min(cols));
    for k in 0..rows.min(cols) {
        let best = (k..rows).cartesian_product(k..cols).min_by_key(|&(i, j)| w.valuation(&m[i][j]));
        let (pi, pj) = best.unwrap();
        let v = w.valuation(&m[pi][pj]);
        let Valuation::Finite(v) = v else {
            diag.extend(std::iter::repeat_n(Valuation::Infinite, rows.min(cols) - k));
            break;
        };
        m.swap(k, pi);
        l.swap(k, pi);
        for row in li.iter_mut() {
            row.swap(k, pi);
        }
        for row in m.iter_mut().chain(r.iter_mut()) {
            row.swap(k, pj);
        }
        ri.swap(k, pj);
        // normalise the pivot to exactly p^v
        let unit = w.div_p_pow(&m[k][k], v).expect("pivot valuation");
        let unit_inv = w.inv(&unit).expect("unit part of pivot");
        for row in m.iter_mut().chain(r.iter_mut()) {
            row[k] = w.mul(&row[k], &unit_inv);
        }
        for x in ri[k].iter_mut() {
            *x = w.mul(x, &unit);
        }
        for i in k + 1..rows {
            if w.is_zero(&m[i][k]) {
                continue;
            }
            let f = w.div_p_pow(&m[i][k], v).expect("pivot has least valuation");
            for j in 0..cols {
                let t = w.mul(&f, &m[k][j]);
                m[i][j] = w.sub(&m[i][j], &t);
            }
            for j in 0..rows {
                let t = w.mul(&f, &l[k][j]);
                l[i][j] = w.sub(&l[i][j], &t);
            }
            for row in li.iter_mut() {
                let t = w.mul(&f, &row[i]);
                row[k] = w.add(&row[k], &t);
            }
        }
        for j in k + 1..cols {
            if w.is_zero(&m[k][j]) {
                continue;
            }
            let f = w.div_p_pow(&m[k][j], v).expect("pivot has least valuation");
            for row in m.iter_mut().chain(r.iter_mut()) {
                let t = w.mul(&f, &row[k]);
                row[j] = w.sub(&row[j], &t);
            }
            for c in 0..cols {
                let t = w.mul(&f, &ri[j][c]);
                ri[k][c] = w.add(&ri[k][c], &t);
            }
        }
        diag.push(Valuation::Finite(v));
    }
    Smith { diag, left: l, left_inv: li, right: r, right_inv: ri }
}

// ---------------------------------------------------------------------------
// Matrices over F_q

pub fn fq_mat_mul(k: &FiniteField, a: &FqMat, b: &FqMat) -> FqMat {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).fold(k.zero(), |acc, (x, brow)| k.add(&acc, &k.mul(x, &brow[j]))))
                .collect()
        })
        .collect()
}

pub fn fq_mat_frobenius(k: &FiniteField, a: &FqMat, e: u64) -> FqMat {
    a.iter().map(|row| row.iter().map(|x| k.frobenius(x, e)).collect()).collect()
}

pub fn fq_rank(k: &FiniteField, a: &FqMat) -> usize {
    let mut m = a.to_vec();
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| !k.is_zero(&m[i][c])) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = k.inv(&m[rank][c]).unwrap();
        for i in rank + 1..rows {
            if k.is_zero(&m[i][c]) {
                continue;
            }
            let f = k.mul(&m[i][c], &inv);
            for j in c..cols {
                let t = k.mul(&f, &m[rank][j]);
                m[i][j] = k.sub(&m[i][j], &t);
            }
        }
        rank += 1;
    }
    rank
}

pub fn fq_identity(k: &FiniteField, r: usize) -> FqMat {
    (0..r).map(|i| (0..r).map(|j| if i == j { k.one() } else { k.zero() }).collect()).collect()
}

/// Reduced row echelon form over `F_q`; returns the pivot columns.
pub fn fq_row_reduce(k: &FiniteField, m: &mut [Vec<FfElem>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    for c in 0..cols {
        let rank = pivots.len();
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&i| !k.is_zero(&m[i][c])) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = k.inv(&m[rank][c]).unwrap();
        for x in m[rank].iter_mut() {
            *x = k.mul(x, &inv);
        }
        let prow = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == rank || k.is_zero(&row[c]) {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                *x = k.sub(x, &k.mul(&f, y));
            }
        }
        pivots.push(c);
    }
    pivots
}

/// A maximal set of linearly independent columns of `m`, as a matrix.
pub fn fq_column_basis(k: &FiniteField, m: &FqMat) -> FqMat {
    let mut work = m.clone();
    let pivots = fq_row_reduce(k, &mut work);
    m.iter().map(|row| pivots.iter().map(|&j| row[j].clone()).collect()).collect()
}

/// Solves `B X = Y` for `B` of full column rank; `None` if inconsistent.
pub fn fq_solve(k: &FiniteField, b: &FqMat, y: &FqMat) -> Option<FqMat> {
    let rho = b.first().map_or(0, |r| r.len());
    let c = y.first().map_or(0, |r| r.len());
    let mut aug: FqMat = b.iter().zip(y).map(|(br, yr)| br.iter().chain(yr).cloned().collect()).collect();
    let pivots = fq_row_reduce(k, &mut aug);
    if pivots.iter().any(|&p| p >= rho) || pivots.len() < rho {
        return None;
    }
    Some((0..rho).map(|i| aug[i][rho..rho + c].to_vec()).collect())
}

// ---------------------------------------------------------------------------
// Matrices over F_p

/// Row-reduces `m` in place over `F_p`; returns the pivot columns.
pub fn fp_row_reduce(p: u64, m: &mut [Vec<u64>], cols: usize) -> Vec<usize> {
    fp_eliminate(p, m, cols, true)
}

/// Echelon form only: clears entries below each pivot.
pub fn fp_echelon(p: u64, m: &mut [Vec<u64>], cols: usize) -> Vec<usize> {
    fp_eliminate(p, m, cols, false)
}

fn fp_eliminate(p: u64, m: &mut [Vec<u64>], cols: usize, reduced: bool) -> Vec<usize> {
    let rows = m.len();
    // entries may be left unreduced: each update adds below p^2, so with
    // `lazy` they stay below p + rows * p^2 < 2^63
    let lazy = (p as u128).pow(2) * (rows as u128 + 1) < (1u128 << 62);
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| !m[i][c].is_multiple_of(p)) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = inv_mod_prime(m[rank][c] % p, p);
        for x in m[rank].iter_mut() {
            *x = mul_mod(*x % p, inv, p);
        }
        let (above, rest) = m.split_at_mut(rank);
        let (prow, below) = rest.split_first_mut().expect("pivot row");
        let targets = below.iter_mut().chain(above.iter_mut().filter(|_| reduced));
        for row in targets {
            let f = row[c] % p;
            if f == 0 {
                continue;
            }
            let nf = p - f;
            if lazy {
                for (x, &y) in row[c..].iter_mut().zip(&prow[c..]) {
                    *x += nf * y;
                }
            } else {
                for (x, &y) in row[c..].iter_mut().zip(&prow[c..]) {
                    *x = sub_mod(*x % p, mul_mod(f, y, p), p);
                }
            }
        }
        pivots.push(c);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x %= p;
        }
    }
    pivots
}

pub fn fp_rank(p: u64, m: &[Vec<u64>]) -> usize {
    let cols = m.first().map_or(0, |r| r.len());
    let mut m = m.to_vec();
    fp_echelon(p, &mut m, cols).len()
}

/// Solves `M x = rhs` over `F_p`. Returns the kernel dimension when the
/// system is consistent.
pub fn fp_solve_affine(p: u64, m: &[Vec<u64>], rhs: &[u64]) -> Option<usize> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<u64>> = m
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b % p);
            r
        })
        .collect();
    let pivots = fp_echelon(p, &mut aug, cols + 1);
    if pivots.last() == Some(&cols) {
        return None;
    }
    Some(cols - pivots.len())
}

/// Shape check for user-supplied matrices.
pub fn check_square<T>(m: &[Vec<T>]) -> Result<usize> {
    let r = m.len();
    if r == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    if let Some(i) = m.iter().position(|row| row.len() != r) {
        return Err(Error::Shape(format!("row {i} has length {} but the matrix has {r} rows", m[i].len())));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(p: u64, deg: u32, s: u32) -> WittRing {
        WittRing::new(&make_field(p, deg, 0).unwrap(), s).unwrap()
    }

    fn int_mat(w: &WittRing, rows: &[&[i64]]) -> WMat {
        rows.iter().map(|r| r.iter().map(|&c| w.from_int(c)).collect()).collect()
    }

    /// Cofactor expansion, for comparison.
    fn det_naive(w: &WittRing, a: &WMat) -> WittElement {
        if a.len() == 1 {
            return a[0][0].clone();
        }
        let mut acc = w.zero();
        for j in 0..a.len() {
            let minor: WMat = a[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect())
                .collect();
            let term = w.mul(&a[0][j], &det_naive(w, &minor));
            acc = if j % 2 == 0 { w.add(&acc, &term) } else { w.sub(&acc, &term) };
        }
        acc
    }

    #[test]
    fn char_poly_small() {
        let w = ring(2, 1, 3);
        // [[0,p],[1,0]] has char poly x^2 - p
        let a = int_mat(&w, &[&[0, 2], &[1, 0]]);
        assert_eq!(char_poly(&w, &a), vec![w.from_int(-2), w.zero(), w.one()]);
        let b = int_mat(&w, &[&[1, 1], &[0, 2]]);
        assert_eq!(char_poly(&w, &b), vec![w.from_int(2), w.from_int(-3), w.one()]);
    }

    #[test]
    fn char_poly_by_cayley_hamilton_and_det() {
        let w = ring(3, 2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for r in 1..=5 {
            let a: WMat = (0..r).map(|_| (0..r).map(|_| w.random(&mut rng)).collect()).collect();
            let c = char_poly(&w, &a);
            let mut acc = zeros(&w, r, r);
            let mut pw = identity(&w, r);
            for coeff in &c {
                for i in 0..r {
                    for j in 0..r {
                        acc[i][j] = w.add(&acc[i][j], &w.mul(coeff, &pw[i][j]));
                    }
                }
                pw = mat_mul(&w, &pw, &a);
            }
            assert!(acc.iter().flatten().all(|x| w.is_zero(x)));
            assert_eq!(det(&w, &a), det_naive(&w, &a));
        }
    }

    #[test]
    fn smith_transforms_are_consistent() {
        let w = ring(2, 2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a: WMat = (0..3).map(|_| (0..3).map(|_| w.mul(&w.random(&mut rng), &w.p_power(1))).collect()).collect();
            let sm = smith(&w, &a);
            let d = mat_mul(&w, &mat_mul(&w, &sm.left, &a), &sm.right);
            for i in 0..3 {
                for j in 0..3 {
                    let expect = match (i == j, sm.diag[i]) {
                        (true, Valuation::Finite(v)) => w.p_power(v),
                        _ => w.zero(),
                    };
                    assert_eq!(d[i][j], expect);
                }
            }
            assert_eq!(mat_mul(&w, &sm.left, &sm.left_inv), identity(&w, 3));
            assert_eq!(mat_mul(&w, &sm.right, &sm.right_inv), identity(&w, 3));
            assert!(sm.diag.windows(2).all(|x| x[0] <= x[1]));
        }
    }

    #[test]
    fn compound_of_diagonal() {
        let w = ring(2, 1, 6);
        let a = int_mat(&w, &[&[1, 0, 0], &[0, 2, 0], &[0, 0, 4]]);
        assert_eq!(compound(&w, &a, 2), int_mat(&w, &[&[2, 0, 0], &[0, 4, 0], &[0, 0, 8]]));
        assert_eq!(compound(&w, &a, 3), int_mat(&w, &[&[8]]));
    }

    #[test]
    fn inverse_round_trip() {
        let w = ring(3, 1, 4);
        let a = int_mat(&w, &[&[1, 3], &[2, 1]]);
        let inv = inverse(&w, &a).unwrap();
        assert_eq!(mat_mul(&w, &a, &inv), identity(&w, 2));
        assert!(inverse(&w, &int_mat(&w, &[&[3, 0], &[0, 1]])).is_none());
    }

    #[test]
    fn fp_affine_solver() {
        // x + y = 1, x + y = 0 over F_2: inconsistent
        assert_eq!(fp_solve_affine(2, &[vec![1, 1], vec![1, 1]], &[1, 0]), None);
        assert_eq!(fp_solve_affine(3, &[vec![1, 2, 0]], &[1]), Some(2));
        assert_eq!(fp_rank(5, &[vec![1, 2], vec![2, 4]]), 1);
    }

    #[test]
    fn fq_solve_and_basis() {
        let k = make_field(3, 2, 0).unwrap();
        let g = k.generator();
        let b = vec![vec![k.one(), g.clone()], vec![g.clone(), k.one()], vec![k.zero(), k.one()]];
        let x = vec![vec![g.clone()], vec![k.constant(2)]];
        let y = fq_mat_mul(&k, &b, &x);
        assert_eq!(fq_solve(&k, &b, &y).unwrap(), x);
        let dup = vec![vec![k.one(), k.one()], vec![g.clone(), g.clone()]];
        assert_eq!(fq_column_basis(&k, &dup), vec![vec![k.one()], vec![g.clone()]]);
    }

    #[test]
    fn fq_rank_small() {
        let k = make_field(2, 2, 0).unwrap();
        let g = k.generator();
        let m = vec![vec![k.one(), g.clone()], vec![g.clone(), k.mul(&g, &g)]];
        assert_eq!(fq_rank(&k, &m), 1);
    }
}
