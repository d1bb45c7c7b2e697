//! Truncated Witt vectors of finite fields.
//!
//! `W_s(F_{p^deg})` is realised as the unramified ring `(Z/p^s)[X]/(f~)`
//! where `f~` is the defining polynomial of the residue field read mod
//! `p^s`. The Frobenius lift sends `X` to the Hensel-lifted root of `f~`
//! congruent to `X^p`.
//!
//! [`GenericWittVector`] is an independent coordinate-wise backend over the
//! prime field, driven by the universal Witt structure polynomials.

use crate::arith::{checked_prime_power, int_valuation, mul_mod, PolyQuotient, Valuation};
use crate::field::{Embedding, FfElem, FiniteField};
use crate::{Error, Result};
use num::bigint::BigInt;
use num::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

struct RingData {
    field: FiniteField,
    s: u32,
    ring: PolyQuotient,
    /// `sigma^k` as a `deg x deg` matrix over `Z/p^s`, column `j` = image
    /// of `X^j`, for `k in 0..deg`.
    frob: Vec<Vec<Vec<u64>>>,
}

/// The ring `W_s(F_{p^deg})`. Cheap to clone.
#[derive(Clone)]
pub struct WittRing {
    data: Arc<RingData>,
}

impl PartialEq for WittRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data) || (self.data.s == other.data.s && self.data.field == other.data.field)
    }
}
impl Eq for WittRing {}

impl fmt::Debug for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W_{}({:?})", self.s(), self.field())
    }
}

/// Element of `W_s(F_{p^deg})`: `deg` residues mod `p^s`, low-to-high
/// powers of `X`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WittElement {
    pub coeffs: Vec<u64>,
}

impl WittElement {
    pub fn new(coeffs: Vec<u64>) -> Self {
        WittElement { coeffs }
    }
}

/// Largest precision supported for a given prime (`p^s <= 2^62`).
pub fn max_precision(p: u64) -> u32 {
    let mut s = 1;
    while checked_prime_power(p, s + 1).is_some() {
        s += 1;
    }
    s
}

impl WittRing {
    pub fn new(field: &FiniteField, s: u32) -> Result<Self> {
        let p = field.p();
        if s == 0 {
            return Err(Error::Shape("precision must be positive".into()));
        }
        let modulus = checked_prime_power(p, s).ok_or(Error::PrecisionTooLarge { p, s })?;
        let ring = PolyQuotient::new(modulus, field.defining_poly().to_vec());
        let deg = field.deg() as usize;
        let theta = hensel_root(&ring, field.defining_poly(), ring.pow(&ring.generator(), p as u128), p);
        // sigma(X^j) = theta^j
        let mut sigma = vec![vec![0u64; deg]; deg];
        let mut pw = ring.one();
        for col in sigma.iter_mut() {
            col.clone_from(&pw);
            pw = ring.mul(&pw, &theta);
        }
        let mut frob = Vec::with_capacity(deg);
        let mut cur: Vec<Vec<u64>> = (0..deg).map(|j| ring.reduce(unit_vec(deg, j))).collect();
        for _ in 0..deg {
            frob.push(cur.clone());
            cur = cur.iter().map(|c| apply_cols(&ring, &sigma, c)).collect();
        }
        Ok(WittRing { data: Arc::new(RingData { field: field.clone(), s, ring, frob }) })
    }

    pub fn field(&self) -> &FiniteField {
        &self.data.field
    }

    pub fn p(&self) -> u64 {
        self.data.field.p()
    }

    pub fn deg(&self) -> u32 {
        self.data.field.deg()
    }

    pub fn s(&self) -> u32 {
        self.data.s
    }

    pub fn modulus(&self) -> u64 {
        self.data.ring.modulus
    }

    pub fn lifted_poly(&self) -> &[u64] {
        &self.data.ring.poly
    }

    /// Same residue field, new precision.
    pub fn with_precision(&self, s: u32) -> Result<Self> {
        WittRing::new(&self.data.field, s)
    }

    pub fn zero(&self) -> WittElement {
        WittElement::new(self.data.ring.zero())
    }

    pub fn one(&self) -> WittElement {
        WittElement::new(self.data.ring.one())
    }

    pub fn from_int(&self, c: i64) -> WittElement {
        let m = self.modulus() as i128;
        let v = (c as i128).rem_euclid(m) as u64;
        WittElement::new(self.data.ring.constant(v))
    }

    /// `p^k` (zero once `k >= s`).
    pub fn p_power(&self, k: u32) -> WittElement {
        if k >= self.s() {
            return self.zero();
        }
        WittElement::new(self.data.ring.constant(self.p().pow(k)))
    }

    /// Validates and reduces integer coefficients into the ring.
    pub fn elem(&self, coeffs: Vec<u64>) -> Result<WittElement> {
        if coeffs.len() != self.deg() as usize {
            return Err(Error::ForeignElement);
        }
        let m = self.modulus();
        Ok(WittElement::new(coeffs.into_iter().map(|c| c % m).collect()))
    }

    pub fn contains(&self, x: &WittElement) -> bool {
        x.coeffs.len() == self.deg() as usize && x.coeffs.iter().all(|&c| c < self.modulus())
    }

    pub fn is_zero(&self, x: &WittElement) -> bool {
        x.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &WittElement, b: &WittElement) -> WittElement {
        WittElement::new(self.data.ring.add(&a.coeffs, &b.coeffs))
    }

    pub fn sub(&self, a: &WittElement, b: &WittElement) -> WittElement {
        WittElement::new(self.data.ring.sub(&a.coeffs, &b.coeffs))
    }

    pub fn neg(&self, a: &WittElement) -> WittElement {
        WittElement::new(self.data.ring.neg(&a.coeffs))
    }

    pub fn mul(&self, a: &WittElement, b: &WittElement) -> WittElement {
        WittElement::new(self.data.ring.mul(&a.coeffs, &b.coeffs))
    }

    pub fn scale(&self, a: &WittElement, c: u64) -> WittElement {
        WittElement::new(self.data.ring.scale(&a.coeffs, c))
    }

    pub fn pow(&self, a: &WittElement, e: u128) -> WittElement {
        WittElement::new(self.data.ring.pow(&a.coeffs, e))
    }

    /// `k`-th power of the Frobenius automorphism; `k` is taken mod `deg`.
    pub fn frobenius_lift(&self, x: &WittElement, k: u64) -> WittElement {
        let deg = self.deg() as u64;
        if deg == 1 {
            return x.clone();
        }
        let mat = &self.data.frob[(k % deg) as usize];
        WittElement::new(apply_cols(&self.data.ring, mat, &x.coeffs))
    }

    /// Reduction mod p.
    pub fn residue(&self, x: &WittElement) -> FfElem {
        let p = self.p();
        FfElem::new(x.coeffs.iter().map(|c| c % p).collect())
    }

    /// Naive lift of a residue: same digits read in `Z/p^s`.
    pub fn lift(&self, c: &FfElem) -> WittElement {
        WittElement::new(c.coeffs.clone())
    }

    /// The multiplicative (Teichmüller) lift of `c`.
    pub fn teichmuller(&self, c: &FfElem) -> Result<WittElement> {
        if !self.field().contains(c) {
            return Err(Error::ForeignElement);
        }
        // a == b mod p implies a^(q^k) == b^(q^k) mod p^(k+1); with c^q = c
        // the (s-1)-fold q-th power of any lift is [c].
        let mut t = self.lift(c);
        for _ in 0..(self.s() - 1) * self.deg() {
            t = self.pow(&t, self.p() as u128);
        }
        Ok(t)
    }

    pub fn valuation(&self, x: &WittElement) -> Valuation {
        let p = self.p();
        x.coeffs.iter().filter_map(|&c| int_valuation(c, p)).min().map_or(Valuation::Infinite, Valuation::Finite)
    }

    pub fn is_unit(&self, x: &WittElement) -> bool {
        self.valuation(x) == Valuation::Finite(0)
    }

    /// Exact division by `p^v`. The result is determined modulo `p^{s-v}`;
    /// the representative with vanishing top digits is returned.
    pub fn div_p_pow(&self, x: &WittElement, v: u32) -> Result<WittElement> {
        if self.valuation(x) < Valuation::Finite(v) {
            return Err(Error::PreconditionViolated(format!("element not divisible by p^{v}")));
        }
        let d = self.p().pow(v.min(self.s()));
        Ok(WittElement::new(x.coeffs.iter().map(|&c| c / d).collect()))
    }

    pub fn inv(&self, x: &WittElement) -> Option<WittElement> {
        if !self.is_unit(x) {
            return None;
        }
        let k = self.field();
        let y0 = k.inv(&self.residue(x))?;
        let mut y = self.lift(&y0);
        let two = self.from_int(2);
        for _ in 0..=(32 - self.s().leading_zeros()) + 1 {
            y = self.mul(&y, &self.sub(&two, &self.mul(x, &y)));
        }
        debug_assert_eq!(self.mul(x, &y), self.one());
        Some(y)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> WittElement {
        let m = self.modulus();
        WittElement::new((0..self.deg()).map(|_| rng.gen_range(0..m)).collect())
    }

    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> WittElement {
        loop {
            let x = self.random(rng);
            if self.is_unit(&x) {
                return x;
            }
        }
    }
}

fn unit_vec(n: usize, j: usize) -> Vec<u64> {
    let mut v = vec![0u64; n.max(j + 1)];
    v[j] = 1;
    v
}

fn apply_cols(ring: &PolyQuotient, cols: &[Vec<u64>], x: &[u64]) -> Vec<u64> {
    let m = ring.modulus;
    let mut out = vec![0u64; x.len()];
    for (j, &c) in x.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for (o, &v) in out.iter_mut().zip(&cols[j]) {
            *o = (*o + mul_mod(c, v, m)) % m;
        }
    }
    out
}

fn derivative(poly: &[u64], m: u64) -> Vec<u64> {
    poly.iter().enumerate().skip(1).map(|(i, &c)| mul_mod(c, i as u64, m)).collect()
}

fn ring_inv(ring: &PolyQuotient, p: u64, x: &[u64], residue_field: &FiniteField) -> Vec<u64> {
    let r = FfElem::new(x.iter().map(|c| c % p).collect());
    let y0 = residue_field.inv(&r).expect("Hensel derivative is a unit");
    let mut y = y0.coeffs;
    let two = ring.constant(2);
    for _ in 0..64 {
        let next = ring.mul(&y, &ring.sub(&two, &ring.mul(x, &y)));
        if next == y {
            break;
        }
        y = next;
    }
    y
}

/// Newton iteration for a simple root of `poly` (integer coefficients) in
/// `ring`, starting from `start`.
fn hensel_root(ring: &PolyQuotient, poly: &[u64], start: Vec<u64>, p: u64) -> Vec<u64> {
    let deg = ring.deg();
    if deg == 1 && poly.len() == 2 && poly[0] == 0 {
        return vec![0];
    }
    let residue = FiniteField::with_poly(p, ring.poly.iter().map(|c| c % p).collect())
        .expect("residue polynomial is irreducible");
    hensel_root_in(ring, poly, start, p, &residue)
}

fn hensel_root_in(ring: &PolyQuotient, poly: &[u64], mut theta: Vec<u64>, p: u64, residue: &FiniteField) -> Vec<u64> {
    let dpoly = derivative(poly, ring.modulus);
    for _ in 0..64 {
        let val = ring.eval_int_poly(poly, &theta);
        if ring.is_zero(&val) {
            return theta;
        }
        let d = ring.eval_int_poly(&dpoly, &theta);
        let dinv = ring_inv(ring, p, &d, residue);
        theta = ring.sub(&theta, &ring.mul(&val, &dinv));
    }
    panic!("Hensel iteration failed to converge");
}

/// Ring embedding `W_s(k) -> W_s(K)` lifting a field embedding `k -> K`.
#[derive(Clone, Debug)]
pub struct WittEmbedding {
    pub source: WittRing,
    pub target: WittRing,
    pub image_of_generator: WittElement,
}

impl WittEmbedding {
    pub fn new(source: &WittRing, target: &WittRing) -> Result<Self> {
        if source.s() != target.s() {
            return Err(Error::Shape("Witt embedding needs equal precision".into()));
        }
        let emb = Embedding::new(source.field(), target.field())?;
        let image = if source.deg() == 1 {
            target.zero()
        } else {
            let start = target.lift(&emb.image_of_generator).coeffs;
            let root = hensel_root_in(&target.data.ring, source.lifted_poly(), start, target.p(), target.field());
            WittElement::new(root)
        };
        Ok(WittEmbedding { source: source.clone(), target: target.clone(), image_of_generator: image })
    }

    pub fn embed(&self, x: &WittElement) -> Result<WittElement> {
        if !self.source.contains(x) {
            return Err(Error::ForeignElement);
        }
        if self.source.deg() == 1 {
            return Ok(self.target.from_int(x.coeffs[0] as i64));
        }
        Ok(WittElement::new(self.target.data.ring.eval_int_poly(&x.coeffs, &self.image_of_generator.coeffs)))
    }
}

// ---------------------------------------------------------------------------
// Coordinate-wise backend

/// A Witt vector of length `s` over `F_p` in Witt coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GenericWittVector {
    pub p: u64,
    pub components: Vec<u64>,
}

/// Evaluates the structure polynomials at integer lifts of the coordinates
/// through the ghost recursion
/// `S_n = (w_n(x) op w_n(y) - sum_{i<n} p^i S_i^{p^(n-i)}) / p^n`.
fn ghost_combine(p: u64, x: &[u64], y: &[u64], product: bool) -> Vec<u64> {
    let s = x.len();
    let pb = BigInt::from(p);
    let ghost = |v: &[u64], n: usize| -> BigInt {
        (0..=n).map(|i| num::pow(pb.clone(), i) * num::pow(BigInt::from(v[i]), p.pow((n - i) as u32) as usize)).sum()
    };
    let mut vals: Vec<BigInt> = Vec::with_capacity(s);
    for n in 0..s {
        let target = if product { ghost(x, n) * ghost(y, n) } else { ghost(x, n) + ghost(y, n) };
        let lower: BigInt =
            (0..n).map(|i| num::pow(pb.clone(), i) * num::pow(vals[i].clone(), p.pow((n - i) as u32) as usize)).sum();
        let num_ = target - lower;
        let den = num::pow(pb.clone(), n);
        debug_assert!((&num_ % &den).is_zero());
        vals.push(num_ / den);
    }
    let pb2 = BigInt::from(p);
    vals.iter()
        .map(|v| {
            let r = ((v % &pb2) + &pb2) % &pb2;
            r.to_u64().unwrap()
        })
        .collect()
}

impl GenericWittVector {
    pub fn new(p: u64, components: Vec<u64>) -> Self {
        GenericWittVector { p, components }
    }

    pub fn s(&self) -> usize {
        self.components.len()
    }

    pub fn add(&self, other: &Self) -> Self {
        GenericWittVector::new(self.p, ghost_combine(self.p, &self.components, &other.components, false))
    }

    pub fn mul(&self, other: &Self) -> Self {
        GenericWittVector::new(self.p, ghost_combine(self.p, &self.components, &other.components, true))
    }

    /// The canonical bijection `W_s(F_p) -> Z/p^s`, `(a_i) -> sum p^i [a_i]`.
    pub fn to_integer(&self) -> u64 {
        let s = self.s() as u32;
        let m = self.p.pow(s);
        let mut acc = 0u64;
        for (i, &a) in self.components.iter().enumerate() {
            let t = teichmuller_int(a, self.p, s);
            acc = (acc + mul_mod(self.p.pow(i as u32), t, m)) % m;
        }
        acc
    }

    pub fn from_integer(p: u64, s: u32, x: u64) -> Self {
        let m = p.pow(s);
        let mut rest = x % m;
        let mut comps = Vec::with_capacity(s as usize);
        for i in 0..s {
            let pi = p.pow(i);
            let a = (rest / pi) % p;
            comps.push(a);
            let t = mul_mod(pi, teichmuller_int(a, p, s), m);
            rest = (rest + m - t) % m;
        }
        GenericWittVector::new(p, comps)
    }
}

fn teichmuller_int(a: u64, p: u64, s: u32) -> u64 {
    let m = p.pow(s);
    let mut t = a % m;
    for _ in 1..s {
        t = crate::arith::pow_mod(t, p, m);
    }
    t
}

/// Integer polynomial in `2s` variables `x_0..x_{s-1}, y_0..y_{s-1}`.
pub type IntPoly = BTreeMap<Vec<u32>, BigInt>;

/// Universal Witt addition and multiplication polynomials.
#[derive(Debug, Clone)]
pub struct WittTables {
    pub p: u64,
    pub s: usize,
    pub sum: Vec<IntPoly>,
    pub product: Vec<IntPoly>,
}

const TABLE_TERM_BUDGET: usize = 400_000;
pub const TABLE_MAX_PRECISION: u32 = 6;

fn poly_mul(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let mut out: IntPoly = BTreeMap::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_pow(a: &IntPoly, mut e: u64, nvars: usize) -> IntPoly {
    let mut acc: IntPoly = BTreeMap::from([(vec![0; nvars], BigInt::one())]);
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = poly_mul(&base, &base);
        }
    }
    acc
}

fn poly_add_assign(a: &mut IntPoly, b: &IntPoly, sign: i32) {
    for (e, c) in b {
        let entry = a.entry(e.clone()).or_insert_with(BigInt::zero);
        if sign >= 0 {
            *entry += c;
        } else {
            *entry -= c;
        }
    }
    a.retain(|_, c| !c.is_zero());
}

fn table_cache() -> &'static Mutex<HashMap<(u64, u32), Arc<WittTables>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<WittTables>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Structure polynomials `S_0..S_{s-1}`, `P_0..P_{s-1}` over the integers,
/// solved from the ghost equations. Cached per `(p, s)`.
pub fn generic_witt_ops(p: u64, s: u32) -> Result<Arc<WittTables>> {
    if s == 0 || s > TABLE_MAX_PRECISION {
        return Err(Error::PrecisionTooLarge { p, s });
    }
    if let Some(t) = table_cache().lock().unwrap().get(&(p, s)) {
        return Ok(t.clone());
    }
    let nv = 2 * s as usize;
    let var = |i: usize| -> IntPoly {
        let mut e = vec![0u32; nv];
        e[i] = 1;
        BTreeMap::from([(e, BigInt::one())])
    };
    let ghost = |offset: usize, n: usize| -> IntPoly {
        let mut g = IntPoly::new();
        for i in 0..=n {
            let mut term = poly_pow(&var(offset + i), p.pow((n - i) as u32), nv);
            let c = num::pow(BigInt::from(p), i);
            for v in term.values_mut() {
                *v *= &c;
            }
            poly_add_assign(&mut g, &term, 1);
        }
        g
    };
    let solve = |product: bool| -> Result<Vec<IntPoly>> {
        let mut out: Vec<IntPoly> = Vec::new();
        for n in 0..s as usize {
            let (gx, gy) = (ghost(0, n), ghost(s as usize, n));
            let mut target = if product {
                poly_mul(&gx, &gy)
            } else {
                let mut t = gx;
                poly_add_assign(&mut t, &gy, 1);
                t
            };
            for (i, prev) in out.iter().enumerate() {
                let mut term = poly_pow(prev, p.pow((n - i) as u32), nv);
                let c = num::pow(BigInt::from(p), i);
                for v in term.values_mut() {
                    *v *= &c;
                }
                poly_add_assign(&mut target, &term, -1);
                if target.len() > TABLE_TERM_BUDGET {
                    return Err(Error::PrecisionTooLarge { p, s });
                }
            }
            let den = num::pow(BigInt::from(p), n);
            for v in target.values_mut() {
                debug_assert!((&*v % &den).is_zero());
                *v /= &den;
            }
            out.push(target);
        }
        Ok(out)
    };
    let tables = Arc::new(WittTables { p, s: s as usize, sum: solve(false)?, product: solve(true)? });
    table_cache().lock().unwrap().insert((p, s), tables.clone());
    Ok(tables)
}

impl WittTables {
    /// Coefficients reduced into `[0, p)`, zero terms dropped.
    pub fn reduce_mod_p(poly: &IntPoly, p: u64) -> BTreeMap<Vec<u32>, u64> {
        let pb = BigInt::from(p);
        poly.iter()
            .filter_map(|(e, c)| {
                let r = ((c % &pb) + &pb) % &pb;
                let r = r.to_u64().unwrap();
                (r != 0).then(|| (e.clone(), r))
            })
            .collect()
    }

    /// Evaluates `polys[n]` over `F_p` at the given coordinates.
    pub fn eval_mod_p(poly: &IntPoly, p: u64, x: &[u64], y: &[u64]) -> u64 {
        let vals: Vec<u64> = x.iter().chain(y).copied().collect();
        let mut acc = 0u64;
        for (e, c) in Self::reduce_mod_p(poly, p) {
            let mut t = c;
            for (v, &k) in vals.iter().zip(&e) {
                t = mul_mod(t, crate::arith::pow_mod(*v, k as u64, p), p);
            }
            acc = (acc + t) % p;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrosscheckReport {
    pub p: u64,
    pub s: u32,
    pub trials: usize,
    pub mismatches: Vec<(Vec<u64>, Vec<u64>)>,
}

/// Adds and multiplies random pairs in both backends and compares them under
/// the canonical bijection with `Z/p^s`.
pub fn crosscheck_backends(p: u64, s: u32, trials: usize, seed: u64) -> Result<CrosscheckReport> {
    if s == 0 || s > 5 {
        return Err(Error::PrecisionTooLarge { p, s });
    }
    let field = crate::field::make_field(p, 1, 0)?;
    let ring = WittRing::new(&field, s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = ring.modulus();
    for _ in 0..trials {
        let (a, b) = (rng.gen_range(0..m), rng.gen_range(0..m));
        let (ga, gb) = (GenericWittVector::from_integer(p, s, a), GenericWittVector::from_integer(p, s, b));
        let (wa, wb) = (ring.from_int(a as i64), ring.from_int(b as i64));
        let sum_ok = ga.add(&gb).to_integer() == ring.add(&wa, &wb).coeffs[0];
        let prod_ok = ga.mul(&gb).to_integer() == ring.mul(&wa, &wb).coeffs[0];
        if !sum_ok || !prod_ok {
            return Err(Error::BackendMismatch {
                op: if sum_ok { "product" } else { "sum" },
                lhs: ga.components,
                rhs: gb.components,
            });
        }
    }
    Ok(CrosscheckReport { p, s, trials, mismatches: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    #[test]
    fn prime_field_rings_are_integers_mod_prime_power() {
        let f2 = make_field(2, 1, 0).unwrap();
        let w = WittRing::new(&f2, 3).unwrap();
        assert_eq!(w.modulus(), 8);
        assert_eq!(w.mul(&w.from_int(3), &w.from_int(5)), w.from_int(7));
        let f3 = make_field(3, 1, 0).unwrap();
        assert_eq!(WittRing::new(&f3, 1).unwrap().modulus(), 3);
    }

    #[test]
    fn frobenius_lift_over_f4() {
        let f4 = make_field(2, 2, 0).unwrap();
        let w = WittRing::new(&f4, 2).unwrap();
        let x = WittElement::new(vec![0, 1]);
        let fx = w.frobenius_lift(&x, 1);
        // root of X^2 + X + 1 mod 4, congruent to X^2 = X + 1 mod 2
        assert_eq!(w.residue(&fx), f4.frobenius(&f4.generator(), 1));
        let f_at = w.add(&w.add(&w.mul(&fx, &fx), &fx), &w.one());
        assert!(w.is_zero(&f_at));
        assert_eq!(w.frobenius_lift(&fx, 1), x);
        assert_eq!(w.frobenius_lift(&w.from_int(2), 1), w.from_int(2));
    }

    #[test]
    fn frobenius_lift_is_ring_automorphism_of_order_deg() {
        let k = make_field(3, 3, 0).unwrap();
        let w = WittRing::new(&k, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (a, b) = (w.random(&mut rng), w.random(&mut rng));
            let f = |x: &WittElement| w.frobenius_lift(x, 1);
            assert_eq!(f(&w.add(&a, &b)), w.add(&f(&a), &f(&b)));
            assert_eq!(f(&w.mul(&a, &b)), w.mul(&f(&a), &f(&b)));
            assert_eq!(w.frobenius_lift(&a, 3), a);
            assert_eq!(w.residue(&f(&a)), k.pow(&w.residue(&a), 3));
        }
    }

    #[test]
    fn teichmuller_examples() {
        let f3 = make_field(3, 1, 0).unwrap();
        let w = WittRing::new(&f3, 2).unwrap();
        assert_eq!(w.teichmuller(&f3.constant(2)).unwrap(), w.from_int(8));
        assert_eq!(w.teichmuller(&f3.zero()).unwrap(), w.zero());
        assert_eq!(w.teichmuller(&f3.one()).unwrap(), w.one());
    }

    #[test]
    fn teichmuller_is_multiplicative_section() {
        for (p, d, s) in [(2u64, 3u32, 4u32), (3, 2, 3), (3, 4, 2)] {
            let k = make_field(p, d, 0).unwrap();
            let w = WittRing::new(&k, s).unwrap();
            let elems = k.enumerate().unwrap();
            let lifts: Vec<WittElement> = elems.iter().map(|c| w.teichmuller(c).unwrap()).collect();
            for (c, t) in elems.iter().zip(&lifts) {
                assert_eq!(&w.residue(t), c);
            }
            for (i, a) in elems.iter().enumerate().step_by(3) {
                for (j, b) in elems.iter().enumerate().step_by(5) {
                    let prod = w.teichmuller(&k.mul(a, b)).unwrap();
                    assert_eq!(prod, w.mul(&lifts[i], &lifts[j]));
                }
            }
        }
    }

    #[test]
    fn valuation_examples() {
        let f2 = make_field(2, 1, 0).unwrap();
        let w = WittRing::new(&f2, 3).unwrap();
        assert_eq!(w.valuation(&w.zero()), Valuation::Infinite);
        assert_eq!(w.valuation(&w.one()), Valuation::Finite(0));
        assert_eq!(w.valuation(&w.from_int(4)), Valuation::Finite(2));
        assert_eq!(w.div_p_pow(&w.from_int(4), 2).unwrap(), w.one());
    }

    #[test]
    fn unit_inverse() {
        let k = make_field(2, 3, 0).unwrap();
        let w = WittRing::new(&k, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let u = w.random_unit(&mut rng);
            assert_eq!(w.mul(&u, &w.inv(&u).unwrap()), w.one());
        }
        assert!(w.inv(&w.from_int(2)).is_none());
    }

    #[test]
    fn witt_embedding_is_ring_map() {
        let f4 = make_field(2, 2, 0).unwrap();
        let f16 = make_field(2, 4, 0).unwrap();
        let (a, b) = (WittRing::new(&f4, 3).unwrap(), WittRing::new(&f16, 3).unwrap());
        let e = WittEmbedding::new(&a, &b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (x, y) = (a.random(&mut rng), a.random(&mut rng));
            assert_eq!(e.embed(&a.mul(&x, &y)).unwrap(), b.mul(&e.embed(&x).unwrap(), &e.embed(&y).unwrap()));
            assert_eq!(e.embed(&a.frobenius_lift(&x, 1)).unwrap(), b.frobenius_lift(&e.embed(&x).unwrap(), 1));
        }
    }

    #[test]
    fn structure_polynomials_small() {
        let t = generic_witt_ops(2, 2).unwrap();
        // S_0 = x0 + y0, P_0 = x0 y0
        let s0 = WittTables::reduce_mod_p(&t.sum[0], 2);
        assert_eq!(s0.len(), 2);
        assert_eq!(s0.get(&vec![1, 0, 0, 0]), Some(&1));
        assert_eq!(s0.get(&vec![0, 0, 1, 0]), Some(&1));
        let p0 = WittTables::reduce_mod_p(&t.product[0], 2);
        assert_eq!(p0.into_iter().collect::<Vec<_>>(), vec![(vec![1, 0, 1, 0], 1)]);
        // S_1 = x1 + y1 - x0 y0 over Z, i.e. x1 + y1 + x0 y0 mod 2
        assert_eq!(t.sum[1].get(&vec![1, 0, 1, 0]), Some(&BigInt::from(-1)));
        let s1 = WittTables::reduce_mod_p(&t.sum[1], 2);
        assert_eq!(s1.keys().cloned().collect::<Vec<_>>(), vec![vec![0, 0, 0, 1], vec![0, 1, 0, 0], vec![1, 0, 1, 0]]);
        assert!(matches!(generic_witt_ops(2, 7), Err(Error::PrecisionTooLarge { .. })));
    }

    #[test]
    fn tables_agree_with_ghost_recursion() {
        for (p, s) in [(2u64, 3u32), (3, 2), (2, 4)] {
            let t = generic_witt_ops(p, s).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(p * 10 + s as u64);
            for _ in 0..30 {
                let x: Vec<u64> = (0..s).map(|_| rng.gen_range(0..p)).collect();
                let y: Vec<u64> = (0..s).map(|_| rng.gen_range(0..p)).collect();
                let (gx, gy) = (GenericWittVector::new(p, x.clone()), GenericWittVector::new(p, y.clone()));
                let sum = gx.add(&gy);
                let prod = gx.mul(&gy);
                for n in 0..s as usize {
                    assert_eq!(WittTables::eval_mod_p(&t.sum[n], p, &x, &y), sum.components[n]);
                    assert_eq!(WittTables::eval_mod_p(&t.product[n], p, &x, &y), prod.components[n]);
                }
            }
        }
    }

    #[test]
    fn bijection_round_trip() {
        for (p, s) in [(2u64, 4u32), (3, 3)] {
            for x in 0..p.pow(s) {
                assert_eq!(GenericWittVector::from_integer(p, s, x).to_integer(), x);
            }
        }
    }

    #[test]
    fn backends_agree() {
        assert_eq!(crosscheck_backends(2, 1, 50, 0).unwrap().mismatches.len(), 0);
        assert!(crosscheck_backends(2, 3, 1000, 1).is_ok());
        assert!(crosscheck_backends(3, 2, 1000, 2).is_ok());
    }
}
