//! σ^n-F-crystals over finite fields, stored as matrices over `W_s(F_q)`.
//!
//! A crystal built from user data keeps the integer entries it was given so
//! it can be re-read at a higher precision when a computation cannot be
//! certified at the current one. Crystals produced by other operations
//! (iterates, exterior powers, fibers, splitting summands) carry no such
//! provenance; those operations pick an adequate precision up front.

use crate::arith::Valuation;
use crate::field::FiniteField;
use crate::linalg::{self, FqMat, WMat};
use crate::newton::{NewtonPolygon, Slope};
use crate::witt::{max_precision, WittElement, WittRing};
use crate::{Error, Result};
use num::integer::{binomial, gcd};
use num::rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Integer coefficient vectors of every matrix entry.
pub type IntMatrix = Vec<Vec<Vec<i64>>>;

/// Largest rank of an exterior power.
pub const EXTERIOR_RANK_CAP: usize = 70;

#[derive(Debug, Clone)]
pub struct Crystal {
    ring: WittRing,
    n: u64,
    matrix: WMat,
    source: Option<IntMatrix>,
}

/// Elementary-divisor exponents, nondecreasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HodgePolygon {
    pub slopes: Vec<u32>,
}

impl HodgePolygon {
    pub fn to_polygon(&self) -> NewtonPolygon {
        let s: Vec<u64> = self.slopes.iter().map(|&x| x as u64).collect();
        NewtonPolygon::from_integers(&s).expect("integral slopes")
    }
}

/// A finite abelian p-group `prod Z/p^{k_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomGroup {
    pub p: u64,
    /// Exponents `k_i >= 1`, nondecreasing.
    pub exponents: Vec<u32>,
}

impl HomGroup {
    /// `log_p` of the group order.
    pub fn log_order(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn order(&self) -> Option<u128> {
        (self.p as u128).checked_pow(self.log_order())
    }
}

fn lower_hull_slopes(heights: &[Option<u32>]) -> Vec<Slope> {
    let pts: Vec<(i64, i64)> =
        heights.iter().enumerate().filter_map(|(j, h)| h.map(|h| (j as i64, h as i64))).collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it is on or above the segment a -> pt
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut slopes = Vec::new();
    for w in hull.windows(2) {
        let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        slopes.extend(std::iter::repeat_n(Ratio::new(dy, dx), dx as usize));
    }
    slopes
}

impl Crystal {
    /// A crystal whose entries are the given exact integer data.
    pub fn from_ints(ring: &WittRing, n: u64, source: IntMatrix) -> Result<Self> {
        let r = linalg::check_square(&source)?;
        if n == 0 {
            return Err(Error::Shape("Frobenius twist n must be positive".into()));
        }
        let deg = ring.deg() as usize;
        for (i, row) in source.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if e.len() != deg {
                    return Err(Error::Shape(format!("entry ({i},{j}) has {} coefficients, expected {deg}", e.len())));
                }
            }
        }
        let matrix = Self::read(ring, &source);
        debug_assert_eq!(matrix.len(), r);
        Ok(Crystal { ring: ring.clone(), n, matrix, source: Some(source) })
    }

    /// Integer matrix over `W_s(F_p)`-constants, e.g. `[[0, p], [1, 0]]`.
    pub fn from_int_matrix(ring: &WittRing, n: u64, m: &[Vec<i64>]) -> Result<Self> {
        let deg = ring.deg() as usize;
        let src = m
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&c| {
                        let mut v = vec![0i64; deg];
                        v[0] = c;
                        v
                    })
                    .collect()
            })
            .collect();
        Self::from_ints(ring, n, src)
    }

    /// Declares the current residues to be the exact integer entries.
    pub fn from_witt_matrix(ring: &WittRing, n: u64, m: WMat) -> Result<Self> {
        let src =
            m.iter().map(|row| row.iter().map(|e| e.coeffs.iter().map(|&c| c as i64).collect()).collect()).collect();
        Self::from_ints(ring, n, src)
    }

    /// A crystal known only modulo `p^s`.
    pub fn derived(ring: &WittRing, n: u64, matrix: WMat) -> Self {
        Crystal { ring: ring.clone(), n, matrix, source: None }
    }

    fn read(ring: &WittRing, source: &IntMatrix) -> WMat {
        let m = ring.modulus() as i128;
        source
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| WittElement::new(e.iter().map(|&c| (c as i128).rem_euclid(m) as u64).collect()))
                    .collect()
            })
            .collect()
    }

    pub fn ring(&self) -> &WittRing {
        &self.ring
    }

    pub fn field(&self) -> &FiniteField {
        self.ring.field()
    }

    pub fn p(&self) -> u64 {
        self.ring.p()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn s(&self) -> u32 {
        self.ring.s()
    }

    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &WMat {
        &self.matrix
    }

    pub fn is_exact(&self) -> bool {
        self.source.is_some()
    }

    pub fn source(&self) -> Option<&IntMatrix> {
        self.source.as_ref()
    }

    /// The same exact crystal read at precision `s`.
    pub fn relift(&self, s: u32) -> Result<Self> {
        let src = self.source.as_ref().ok_or_else(|| Error::PrecisionTooSmall {
            s: self.s(),
            reason: "only crystals with exact entries can be re-lifted".into(),
        })?;
        let ring = self.ring.with_precision(s)?;
        Ok(Crystal { matrix: Self::read(&ring, src), ring, n: self.n, source: self.source.clone() })
    }

    /// Runs `f`, re-lifting exact crystals to twice the precision whenever
    /// `f` reports that the current precision cannot certify its answer.
    pub fn with_adaptive_precision<T>(&self, f: impl Fn(&Crystal) -> Result<T>) -> Result<T> {
        let max_s = max_precision(self.p());
        let mut cur = self.clone();
        loop {
            match f(&cur) {
                Err(Error::PrecisionTooSmall { s, reason }) => {
                    if !cur.is_exact() {
                        return Err(Error::PrecisionTooSmall { s, reason });
                    }
                    if cur.s() >= max_s {
                        return Err(Error::NotIsogeny { max_s });
                    }
                    cur = cur.relift((2 * cur.s()).min(max_s))?;
                }
                other => return other,
            }
        }
    }

    /// `e = deg / gcd(n, deg)`, the least `e` with `sigma^{ne} = id`.
    pub fn linearization_order(&self) -> u64 {
        let deg = self.ring.deg() as u64;
        deg / gcd(self.n, deg)
    }

    /// `A sigma^n(A) ... sigma^{(e-1)n}(A)`.
    pub fn linearize(&self) -> WMat {
        linalg::twisted_product(&self.ring, &self.matrix, self.n, self.linearization_order())
    }

    /// Newton polygon at the current precision, without re-lifting.
    pub fn newton_slopes_fixed(&self) -> Result<NewtonPolygon> {
        let w = &self.ring;
        let e = self.linearization_order() as i64;
        let cp = linalg::char_poly(w, &self.linearize());
        if self.rank() > 0 && w.is_zero(&cp[0]) {
            return Err(Error::PrecisionTooSmall {
                s: self.s(),
                reason: "determinant of the linearized Frobenius vanishes mod p^s".into(),
            });
        }
        // Points (j, v(c_{r-j})); unknown valuations are >= s > v(c_0) and
        // never reach the lower hull.
        let heights: Vec<Option<u32>> = cp.iter().rev().map(|c| w.valuation(c).finite()).collect();
        let slopes = lower_hull_slopes(&heights).into_iter().map(|s| s / e).collect();
        NewtonPolygon::from_slopes(slopes)
    }

    pub fn newton_slopes(&self) -> Result<NewtonPolygon> {
        self.with_adaptive_precision(|c| c.newton_slopes_fixed())
    }

    /// `v(det A)`, equal to the total Newton height.
    pub fn det_valuation(&self) -> Result<u32> {
        self.with_adaptive_precision(|c| {
            let d = linalg::det(&c.ring, &c.matrix);
            c.ring
                .valuation(&d)
                .finite()
                .ok_or_else(|| Error::PrecisionTooSmall { s: c.s(), reason: "determinant vanishes mod p^s".into() })
        })
    }

    pub fn hodge_polygon(&self) -> Result<HodgePolygon> {
        self.with_adaptive_precision(|c| {
            let sm = linalg::smith(&c.ring, &c.matrix);
            let slopes = sm
                .diag
                .iter()
                .map(|v| {
                    v.finite().ok_or_else(|| Error::PrecisionTooSmall {
                        s: c.s(),
                        reason: "an elementary divisor vanishes mod p^s".into(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(HodgePolygon { slopes })
        })
    }

    pub fn divisible_by(&self, b: u32) -> bool {
        self.matrix.iter().flatten().all(|x| self.ring.valuation(x) >= Valuation::Finite(b))
    }

    /// The matrix reduced mod p.
    pub fn mod_p_matrix(&self) -> FqMat {
        self.matrix.iter().map(|row| row.iter().map(|x| self.ring.residue(x)).collect()).collect()
    }

    /// Rank of the stable image of the mod-p semilinear Frobenius.
    pub fn p_rank_stable(&self) -> usize {
        semilinear_stable_rank(self.field(), &self.mod_p_matrix(), self.n)
    }

    fn precision_for(&self, e: u64, height: u64) -> Result<u32> {
        let need = e * height + 1;
        let max_s = max_precision(self.p()) as u64;
        if need > max_s {
            return Err(Error::PrecisionTooSmall {
                s: self.s(),
                reason: format!("certifying height {height} needs precision {need}, above the cap {max_s}"),
            });
        }
        Ok((need as u32).max(self.s()))
    }

    /// Re-lifts an exact crystal so that an object of total height `height`
    /// and linearization order `e` derived from it is certifiable.
    fn at_precision_for(&self, e: u64, height: u64) -> Result<Crystal> {
        if !self.is_exact() {
            return Ok(self.clone());
        }
        let s = self.precision_for(e, height)?;
        if s == self.s() {
            Ok(self.clone())
        } else {
            self.relift(s)
        }
    }

    pub fn exterior_power(&self, a: usize) -> Result<Crystal> {
        let r = self.rank();
        if a == 0 || a > r {
            return Err(Error::BadIndex { index: a, max: r });
        }
        let rank = binomial(r, a);
        if rank > EXTERIOR_RANK_CAP {
            return Err(Error::RankCapExceeded { rank, cap: EXTERIOR_RANK_CAP });
        }
        if a == 1 {
            return Ok(self.clone());
        }
        let d = self.det_valuation()? as u64;
        let c = self.at_precision_for(self.linearization_order(), binomial(r - 1, a - 1) as u64 * d)?;
        Ok(Crystal::derived(&c.ring, c.n, linalg::compound(&c.ring, &c.matrix, a)))
    }

    /// The `q`-th iterate: twist `nq`, matrix `A sigma^n(A) ... sigma^{(q-1)n}(A)`.
    pub fn iterate(&self, q: u64) -> Result<Crystal> {
        if q == 0 {
            return Err(Error::Shape("iterate count must be positive".into()));
        }
        if q == 1 {
            return Ok(self.clone());
        }
        let d = self.det_valuation()? as u64;
        let deg = self.ring.deg() as u64;
        let nq = self.n * q;
        let e = deg / gcd(nq, deg);
        let c = self.at_precision_for(e, q * d)?;
        let m = linalg::twisted_product(&c.ring, &c.matrix, c.n, q);
        Ok(Crystal::derived(&c.ring, nq, m))
    }

    pub fn direct_sum(&self, other: &Crystal) -> Result<Crystal> {
        if self.ring != other.ring || self.n != other.n {
            return Err(Error::RingMismatch);
        }
        let matrix = linalg::block_diag(&self.ring, &self.matrix, &other.matrix);
        let source = match (&self.source, &other.source) {
            (Some(a), Some(b)) => {
                let deg = self.ring.deg() as usize;
                let (ra, rb) = (a.len(), b.len());
                let zero = vec![0i64; deg];
                let mut m = vec![vec![zero; ra + rb]; ra + rb];
                for i in 0..ra {
                    m[i][..ra].clone_from_slice(&a[i]);
                }
                for i in 0..rb {
                    m[ra + i][ra..].clone_from_slice(&b[i]);
                }
                Some(m)
            }
            _ => None,
        };
        Ok(Crystal { ring: self.ring.clone(), n: self.n, matrix, source })
    }

    /// Splits off the part on which `phi / p^b` is bijective.
    ///
    /// Returns `(slope-b part, remainder)`; the first summand has rank zero
    /// when `phi / p^b` is topologically nilpotent.
    pub fn slope_splitting(&self, b: u32) -> Result<(Crystal, Crystal)> {
        if !self.divisible_by(b) {
            return Err(Error::NoSplit(format!("matrix entries are not all divisible by p^{b}")));
        }
        let src = self
            .source
            .as_ref()
            .ok_or_else(|| Error::PrecisionTooSmall { s: self.s(), reason: "splitting needs exact entries".into() })?;
        let w = &self.ring;
        let (r, s) = (self.rank(), self.s());
        // p^b | c mod p^s with b < s forces p^b | c for the integer c
        let pb = self.p().pow(b);
        let psi_src: IntMatrix =
            src.iter().map(|row| row.iter().map(|e| e.iter().map(|c| c / pb as i64).collect()).collect()).collect();
        let psi = Self::read(w, &psi_src);
        let big_n = s as u64 * r as u64;
        let pn = linalg::twisted_product(w, &psi, self.n, big_n);
        let sm = linalg::smith(w, &pn);
        if sm.diag.iter().any(|v| matches!(v, Valuation::Finite(k) if *k > 0)) {
            return Err(Error::PrecisionTooSmall {
                s,
                reason: "stable image is not a direct summand at this precision".into(),
            });
        }
        let rho = sm.diag.iter().filter(|v| **v == Valuation::Finite(0)).count();
        let deg = w.deg() as u64;
        let back = (deg - (big_n * self.n) % deg) % deg;
        let mut q = linalg::zeros(w, r, r);
        for i in 0..r {
            for j in 0..rho {
                q[i][j] = sm.left_inv[i][j].clone();
            }
            for j in rho..r {
                q[i][j] = w.frobenius_lift(&sm.right[i][j], back);
            }
        }
        let qinv = linalg::inverse(w, &q)
            .ok_or_else(|| Error::PrecisionTooSmall { s, reason: "image and kernel do not span".into() })?;
        let a2 = linalg::mat_mul(w, &linalg::mat_mul(w, &qinv, &self.matrix), &linalg::mat_sigma(w, &q, self.n));
        for i in 0..r {
            for j in 0..r {
                if (i < rho) != (j < rho) && !w.is_zero(&a2[i][j]) {
                    return Err(Error::PrecisionTooSmall {
                        s,
                        reason: "summands are not Frobenius stable at this precision".into(),
                    });
                }
            }
        }
        let block = |lo: usize, hi: usize| -> WMat { (lo..hi).map(|i| a2[i][lo..hi].to_vec()).collect() };
        Ok((Crystal::derived(w, self.n, block(0, rho)), Crystal::derived(w, self.n, block(rho, r))))
    }

    /// Solutions `v` of `A sigma^n(v) = p^b v`, i.e. the morphisms from the
    /// slope-b line into this crystal, as a finite abelian group.
    pub fn hom_group(&self, b: u32) -> Result<HomGroup> {
        let w = &self.ring;
        let s = self.s();
        if b >= s {
            return Err(Error::PrecisionTooSmall { s, reason: format!("b = {b} needs s > b") });
        }
        let r = self.rank();
        let deg = w.deg() as usize;
        let pb = w.p_power(b);
        let dim = r * deg;
        let zp = WittRing::new(&crate::field::make_field(self.p(), 1, 0)?, s)?;
        // column (i, j) = image of X^j in slot i
        let mut m = vec![vec![zp.zero(); dim]; dim];
        for i in 0..r {
            for j in 0..deg {
                let mut basis = vec![0u64; deg];
                basis[j] = 1;
                let x = WittElement::new(basis);
                let sx = w.frobenius_lift(&x, self.n);
                for (row, entry) in self.matrix.iter().enumerate() {
                    let mut val = w.mul(&entry[i], &sx);
                    if row == i {
                        val = w.sub(&val, &w.mul(&pb, &x));
                    }
                    for (c, &coeff) in val.coeffs.iter().enumerate() {
                        m[row * deg + c][i * deg + j] = WittElement::new(vec![coeff]);
                    }
                }
            }
        }
        let sm = linalg::smith(&zp, &m);
        let mut exponents: Vec<u32> = sm
            .diag
            .iter()
            .filter_map(|v| match v {
                Valuation::Finite(0) => None,
                Valuation::Finite(k) => Some(*k),
                Valuation::Infinite => Some(s),
            })
            .collect();
        exponents.sort();
        Ok(HomGroup { p: self.p(), exponents })
    }

    /// Random crystal `U diag(p^{h_i}) V` with unimodular `U`, `V`.
    pub fn random<R: Rng + ?Sized>(ring: &WittRing, n: u64, hodge: &[u32], rng: &mut R) -> Result<Crystal> {
        let r = hodge.len();
        let unimodular = |rng: &mut R| loop {
            let m: WMat = (0..r).map(|_| (0..r).map(|_| ring.random(rng)).collect()).collect();
            if ring.is_unit(&linalg::det(ring, &m)) {
                return m;
            }
        };
        let u = unimodular(rng);
        let v = unimodular(rng);
        let mut d = linalg::zeros(ring, r, r);
        for (i, &h) in hodge.iter().enumerate() {
            d[i][i] = ring.p_power(h);
        }
        let m = linalg::mat_mul(ring, &linalg::mat_mul(ring, &u, &d), &v);
        Crystal::from_witt_matrix(ring, n, m)
    }
}

/// Stable rank of `x -> abar sigma^n(x)` over `k`: the rank of
/// `abar sigma^n(abar) ... sigma^{(j-1)n}(abar)` once it stops dropping.
pub fn semilinear_stable_rank(k: &FiniteField, abar: &FqMat, n: u64) -> usize {
    let r = abar.len();
    let mut m = abar.clone();
    let mut rank = linalg::fq_rank(k, &m);
    for step in 1..=r as u64 {
        if rank == 0 {
            break;
        }
        let next = linalg::fq_mat_mul(k, &m, &linalg::fq_mat_frobenius(k, abar, step * n));
        let next_rank = linalg::fq_rank(k, &next);
        if next_rank == rank {
            break;
        }
        m = next;
        rank = next_rank;
    }
    rank
}

/// The rank-1 crystal `(p^b)`.
pub fn slope_line_crystal(b: u32, ring: &WittRing, n: u64) -> Result<Crystal> {
    if b >= ring.s() {
        return Err(Error::PrecisionTooSmall { s: ring.s(), reason: format!("p^{b} vanishes mod p^s") });
    }
    Crystal::from_int_matrix(ring, n, &[vec![ring.p().pow(b) as i64]])
}

/// Residue-field entries as an `F_q` matrix.
pub fn fq_matrix(k: &FiniteField, entries: &[Vec<u64>]) -> FqMat {
    entries.iter().map(|row| row.iter().map(|&c| k.constant(c)).collect()).collect()
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

    fn crys(p: u64, deg: u32, s: u32, n: u64, m: &[&[i64]]) -> Crystal {
        let rows: Vec<Vec<i64>> = m.iter().map(|r| r.to_vec()).collect();
        Crystal::from_int_matrix(&ring(p, deg, s), n, &rows).unwrap()
    }

    fn poly(s: &[&str]) -> NewtonPolygon {
        NewtonPolygon::parse(s).unwrap()
    }

    #[test]
    fn slope_lines() {
        let w = ring(2, 1, 3);
        assert_eq!(slope_line_crystal(0, &w, 1).unwrap().newton_slopes().unwrap(), poly(&["0"]));
        let line = slope_line_crystal(1, &w, 1).unwrap();
        assert_eq!(line.newton_slopes().unwrap(), poly(&["1"]));
        assert_eq!(line.hodge_polygon().unwrap().slopes, vec![1]);
        assert!(slope_line_crystal(2, &ring(2, 1, 2), 1).is_err());
    }

    #[test]
    fn linearization_order() {
        assert_eq!(crys(2, 1, 3, 1, &[&[1]]).linearization_order(), 1);
        assert_eq!(crys(2, 2, 3, 1, &[&[1]]).linearization_order(), 2);
        assert_eq!(crys(2, 2, 3, 2, &[&[1]]).linearization_order(), 1);
        assert_eq!(crys(2, 6, 2, 4, &[&[1]]).linearization_order(), 3);
    }

    #[test]
    fn newton_examples() {
        assert_eq!(crys(2, 1, 3, 1, &[&[1, 0], &[0, 2]]).newton_slopes().unwrap(), poly(&["0", "1"]));
        assert_eq!(crys(2, 1, 3, 1, &[&[0, 2], &[1, 0]]).newton_slopes().unwrap(), poly(&["1/2", "1/2"]));
        let c = crys(2, 2, 3, 1, &[&[0, 1], &[2, 0]]);
        let b = c.linearize();
        let w = c.ring();
        assert_eq!(b, vec![vec![w.from_int(2), w.zero()], vec![w.zero(), w.from_int(2)]]);
        assert_eq!(c.newton_slopes().unwrap(), poly(&["1/2", "1/2"]));
    }

    #[test]
    fn adaptive_relift_recovers_slopes() {
        // det = p^3 is invisible at s = 2
        let c = crys(2, 1, 2, 1, &[&[0, 8], &[1, 0]]);
        assert!(c.newton_slopes_fixed().is_err());
        assert_eq!(c.newton_slopes().unwrap(), poly(&["3/2", "3/2"]));
        let z = crys(2, 1, 2, 1, &[&[0, 0], &[1, 0]]);
        assert!(matches!(z.newton_slopes(), Err(Error::NotIsogeny { .. })));
    }

    #[test]
    fn hodge_examples() {
        assert_eq!(crys(2, 1, 3, 1, &[&[1, 0], &[0, 2]]).hodge_polygon().unwrap().slopes, vec![0, 1]);
        assert_eq!(crys(2, 1, 3, 1, &[&[0, 2], &[1, 0]]).hodge_polygon().unwrap().slopes, vec![0, 1]);
        assert_eq!(crys(2, 1, 3, 1, &[&[2, 0], &[0, 2]]).hodge_polygon().unwrap().slopes, vec![1, 1]);
    }

    #[test]
    fn divisibility_and_prank() {
        let ord = crys(2, 1, 3, 1, &[&[1, 0], &[0, 2]]);
        assert!(ord.divisible_by(0));
        assert!(!ord.divisible_by(1));
        assert!(crys(2, 1, 3, 1, &[&[2, 0], &[0, 2]]).divisible_by(1));
        assert_eq!(ord.p_rank_stable(), 1);
        assert_eq!(crys(2, 1, 3, 1, &[&[0, 2], &[1, 0]]).p_rank_stable(), 0);
        assert_eq!(crys(2, 1, 3, 1, &[&[1, 1], &[0, 2]]).p_rank_stable(), 1);
    }

    #[test]
    fn exterior_powers() {
        let c = crys(2, 1, 8, 1, &[&[1, 0, 0], &[0, 2, 0], &[0, 0, 4]]);
        assert_eq!(c.exterior_power(1).unwrap().matrix(), c.matrix());
        let e2 = c.exterior_power(2).unwrap();
        assert_eq!(e2.newton_slopes().unwrap(), poly(&["1", "2", "3"]));
        let top = c.exterior_power(3).unwrap();
        assert_eq!(top.newton_slopes().unwrap(), poly(&["3"]));
    }

    #[test]
    fn iterates() {
        let ss = crys(2, 1, 3, 1, &[&[0, 2], &[1, 0]]);
        let it = ss.iterate(2).unwrap();
        let w = it.ring().clone();
        assert_eq!(it.matrix(), &vec![vec![w.from_int(2), w.zero()], vec![w.zero(), w.from_int(2)]]);
        assert_eq!(it.newton_slopes().unwrap(), poly(&["1", "1"]));
        let ord = crys(2, 1, 3, 1, &[&[1, 0], &[0, 2]]);
        let it3 = ord.iterate(3).unwrap();
        assert_eq!(it3.n(), 3);
        assert_eq!(it3.newton_slopes().unwrap(), poly(&["0", "3"]));
    }

    #[test]
    fn direct_sums() {
        let w = ring(2, 1, 4);
        let e0 = slope_line_crystal(0, &w, 1).unwrap();
        let line = slope_line_crystal(1, &w, 1).unwrap();
        assert_eq!(line.direct_sum(&line).unwrap().newton_slopes().unwrap(), poly(&["1", "1"]));
        let ss = Crystal::from_int_matrix(&w, 1, &[vec![0, 2], vec![1, 0]]).unwrap();
        assert_eq!(ss.direct_sum(&e0).unwrap().newton_slopes().unwrap(), poly(&["0", "1/2", "1/2"]));
        let other = slope_line_crystal(0, &ring(2, 1, 3), 1).unwrap();
        assert!(matches!(e0.direct_sum(&other), Err(Error::RingMismatch)));
    }

    #[test]
    fn splitting_examples() {
        let (a, b) = crys(2, 1, 4, 1, &[&[1, 0], &[0, 2]]).slope_splitting(0).unwrap();
        assert_eq!((a.rank(), b.rank()), (1, 1));
        let (a, b) = crys(2, 1, 4, 1, &[&[1, 1], &[0, 2]]).slope_splitting(0).unwrap();
        assert_eq!((a.rank(), b.rank()), (1, 1));
        assert_eq!(b.newton_slopes().unwrap(), poly(&["1"]));
        let (a, b) = crys(2, 1, 4, 1, &[&[0, 2], &[1, 0]]).slope_splitting(0).unwrap();
        assert_eq!((a.rank(), b.rank()), (0, 2));
        assert!(matches!(crys(2, 1, 4, 1, &[&[1, 0], &[0, 2]]).slope_splitting(1), Err(Error::NoSplit(_))));
    }

    /// Counts solutions of `A sigma^n(v) = p^b v` by trying every vector.
    fn brute_hom_order(c: &Crystal, b: u32) -> u128 {
        let w = c.ring();
        let r = c.rank();
        let deg = w.deg() as usize;
        let m = w.modulus();
        let total = (m as u128).pow((r * deg) as u32);
        let mut count = 0;
        for idx in 0..total {
            let mut x = idx;
            let v: Vec<WittElement> = (0..r)
                .map(|_| {
                    WittElement::new(
                        (0..deg)
                            .map(|_| {
                                let d = (x % m as u128) as u64;
                                x /= m as u128;
                                d
                            })
                            .collect(),
                    )
                })
                .collect();
            let lhs = linalg::mat_vec(w, c.matrix(), &linalg::vec_sigma(w, &v, c.n()));
            let rhs: Vec<WittElement> = v.iter().map(|y| w.mul(&w.p_power(b), y)).collect();
            if lhs == rhs {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn hom_group_examples() {
        let w = ring(3, 1, 2);
        let e0 = slope_line_crystal(0, &w, 1).unwrap();
        assert_eq!(e0.hom_group(0).unwrap().exponents, vec![2]);
        let line = slope_line_crystal(1, &ring(2, 1, 4), 1).unwrap();
        assert_eq!(line.hom_group(0).unwrap().exponents, Vec::<u32>::new());
        let c = crys(2, 1, 3, 1, &[&[1, 0], &[0, 2]]);
        let h = c.hom_group(1).unwrap();
        assert_eq!(h.order().unwrap(), brute_hom_order(&c, 1));
    }

    #[test]
    fn hom_group_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, deg, s) in [(2u64, 1u32, 3u32), (2, 2, 2), (3, 1, 2), (2, 1, 2)] {
            let w = ring(p, deg, s);
            for _ in 0..6 {
                let hodge: Vec<u32> = (0..2).map(|_| rng.gen_range(0..s)).collect();
                let c = Crystal::random(&w, 1, &hodge, &mut rng).unwrap();
                for b in 0..s {
                    let h = c.hom_group(b).unwrap();
                    assert_eq!(h.order().unwrap(), brute_hom_order(&c, b), "{:?} b={b}", c.matrix());
                }
            }
        }
    }

    #[test]
    fn random_crystal_has_requested_hodge_polygon() {
        let w = ring(3, 2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = Crystal::random(&w, 1, &[2, 0, 1], &mut rng).unwrap();
        assert_eq!(c.hodge_polygon().unwrap().slopes, vec![0, 1, 2]);
        assert!(c.newton_slopes().unwrap().lies_above(&c.hodge_polygon().unwrap().to_polygon()).unwrap());
    }
}
