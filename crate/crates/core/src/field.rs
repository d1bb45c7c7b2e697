//! Finite fields `F_{p^deg} = F_p[X]/(f)` built from scratch over the prime
//! field, with Frobenius and canonical embeddings.

use crate::arith::{inv_mod_prime, is_prime, mul_mod, sub_mod, PolyQuotient};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// Default cap on exhaustive enumeration of field elements.
pub const ENUMERATION_CAP: u128 = 1 << 20;

/// Targets up to this size locate embedding roots by scanning; larger ones
/// split the polynomial and minimise over the Frobenius orbit, which selects
/// the same root.
pub const SCAN_CAP: u128 = 1 << 12;

/// Dense polynomials over `F_p`, low-to-high, without trailing zeros.
pub(crate) mod fp_poly {
    use super::*;

    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let out = (0..n).map(|i| sub_mod(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), p)).collect();
        trim(out)
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
            }
        }
        trim(out)
    }

    /// Returns `(quotient, remainder)`; `b` must be nonzero.
    pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let b = trim(b.to_vec());
        let mut r = trim(a.to_vec());
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let lead_inv = inv_mod_prime(*b.last().unwrap(), p);
        let mut q = vec![0u64; r.len() - b.len() + 1];
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let c = mul_mod(*r.last().unwrap(), lead_inv, p);
            q[shift] = c;
            for (j, &bj) in b.iter().enumerate() {
                r[shift + j] = sub_mod(r[shift + j], mul_mod(c, bj, p), p);
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        divrem(a, b, p).1
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        monic(a, p)
    }

    pub fn monic(a: Vec<u64>, p: u64) -> Vec<u64> {
        match a.last() {
            None => a,
            Some(&l) => {
                let li = inv_mod_prime(l, p);
                a.into_iter().map(|c| mul_mod(c, li, p)).collect()
            }
        }
    }

    /// Inverse of `a` modulo `f`, assuming `gcd(a, f) = 1`.
    pub fn inv_mod(a: &[u64], f: &[u64], p: u64) -> Option<Vec<u64>> {
        // extended Euclid tracking the coefficient of a
        let (mut r0, mut r1) = (trim(f.to_vec()), rem(a, f, p));
        let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
        while !r1.is_empty() {
            let (q, r) = divrem(&r0, &r1, p);
            let s2 = sub(&s0, &mul(&q, &s1, p), p);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
        }
        if r0.len() != 1 {
            return None;
        }
        let c = inv_mod_prime(r0[0], p);
        Some(rem(&s0.iter().map(|&x| mul_mod(x, c, p)).collect::<Vec<_>>(), f, p))
    }

    pub fn powmod(a: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut base = rem(a, f, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &base, p), f, p);
            }
            e >>= 1;
            if e > 0 {
                base = rem(&mul(&base, &base, p), f, p);
            }
        }
        acc
    }

    /// Irreducibility by distinct-degree testing: `f` has no factor of degree
    /// `i <= deg/2`, i.e. `gcd(X^{p^i} - X, f) = 1` for those `i`.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let d = f.len() - 1;
        if d == 1 {
            return true;
        }
        if f[0] == 0 {
            return false;
        }
        let x = vec![0u64, 1];
        let mut h = x.clone();
        for _ in 1..=d / 2 {
            h = powmod(&h, p, f, p);
            let g = gcd(f, &sub(&h, &x, p), p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

struct FieldData {
    p: u64,
    deg: u32,
    ring: PolyQuotient,
}

/// The finite field `F_p[X]/(defining_poly)`. Cheap to clone.
#[derive(Clone)]
pub struct FiniteField {
    data: Arc<FieldData>,
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data) || self.data.ring == other.data.ring
    }
}
impl Eq for FiniteField {}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}{:?}", self.p(), self.deg(), self.defining_poly())
    }
}

/// Element of a [`FiniteField`]: `deg` residues mod p, low-to-high powers of
/// the generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FfElem {
    pub coeffs: Vec<u64>,
}

impl FfElem {
    pub fn new(coeffs: Vec<u64>) -> Self {
        FfElem { coeffs }
    }
}

fn field_cache() -> &'static Mutex<HashMap<(u64, u32, u64), FiniteField>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32, u64), FiniteField>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Builds `F_{p^deg}` with a deterministically searched irreducible
/// polynomial. The same `(p, deg, seed)` always yields the same polynomial.
///
/// Degree one uses the defining polynomial `X`.
pub fn make_field(p: u64, deg: u32, seed: u64) -> Result<FiniteField> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if deg == 0 {
        return Err(Error::Shape("field degree must be positive".into()));
    }
    if let Some(f) = field_cache().lock().unwrap().get(&(p, deg, seed)) {
        return Ok(f.clone());
    }
    let poly = if deg == 1 { vec![0, 1] } else { search_irreducible(p, deg, seed)? };
    let field = FiniteField::from_poly_unchecked(p, poly);
    field_cache().lock().unwrap().insert((p, deg, seed), field.clone());
    Ok(field)
}

fn search_irreducible(p: u64, deg: u32, seed: u64) -> Result<Vec<u64>> {
    let d = deg as usize;
    // candidate = X^deg + sum digits[i] X^i, digits as a little-endian
    // base-p counter starting at a seed-dependent offset
    let mut digits = vec![0u64; d];
    if seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in digits.iter_mut() {
            *c = rng.gen_range(0..p);
        }
    }
    let start = digits.clone();
    loop {
        let mut f = digits.clone();
        f.push(1);
        if fp_poly::is_irreducible(&f, p) {
            return Ok(f);
        }
        // increment
        let mut i = 0;
        loop {
            if i == d {
                break;
            }
            digits[i] += 1;
            if digits[i] == p {
                digits[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
        if digits == start {
            return Err(Error::SearchExhausted { p, deg });
        }
    }
}

impl FiniteField {
    fn from_poly_unchecked(p: u64, poly: Vec<u64>) -> Self {
        let deg = (poly.len() - 1) as u32;
        FiniteField { data: Arc::new(FieldData { p, deg, ring: PolyQuotient::new(p, poly) }) }
    }

    /// Builds a field from an explicit monic defining polynomial, verifying
    /// irreducibility. Degree one must be `X`.
    pub fn with_poly(p: u64, poly: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if poly.len() < 2 || *poly.last().unwrap() != 1 || poly.iter().any(|&c| c >= p) {
            return Err(Error::Shape("defining polynomial must be monic with residues mod p".into()));
        }
        if poly.len() == 2 && poly[0] != 0 {
            return Err(Error::Shape("prime fields use the defining polynomial X".into()));
        }
        if !fp_poly::is_irreducible(&poly, p) {
            return Err(Error::Shape(format!("{poly:?} is not irreducible over F_{p}")));
        }
        Ok(Self::from_poly_unchecked(p, poly))
    }

    pub fn p(&self) -> u64 {
        self.data.p
    }

    pub fn deg(&self) -> u32 {
        self.data.deg
    }

    pub fn defining_poly(&self) -> &[u64] {
        &self.data.ring.poly
    }

    pub fn ring(&self) -> &PolyQuotient {
        &self.data.ring
    }

    /// `p^deg`, or `None` past `u128`.
    pub fn cardinality(&self) -> Option<u128> {
        (self.p() as u128).checked_pow(self.deg())
    }

    pub fn zero(&self) -> FfElem {
        FfElem::new(self.data.ring.zero())
    }

    pub fn one(&self) -> FfElem {
        FfElem::new(self.data.ring.one())
    }

    pub fn constant(&self, c: u64) -> FfElem {
        FfElem::new(self.data.ring.constant(c))
    }

    /// Class of `X`; in a prime field this is `0`.
    pub fn generator(&self) -> FfElem {
        FfElem::new(self.data.ring.generator())
    }

    pub fn elem(&self, coeffs: Vec<u64>) -> Result<FfElem> {
        if coeffs.len() != self.deg() as usize || coeffs.iter().any(|&c| c >= self.p()) {
            return Err(Error::ForeignElement);
        }
        Ok(FfElem::new(coeffs))
    }

    pub fn contains(&self, x: &FfElem) -> bool {
        x.coeffs.len() == self.deg() as usize && x.coeffs.iter().all(|&c| c < self.p())
    }

    pub fn is_zero(&self, x: &FfElem) -> bool {
        x.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FfElem, b: &FfElem) -> FfElem {
        FfElem::new(self.data.ring.add(&a.coeffs, &b.coeffs))
    }

    pub fn sub(&self, a: &FfElem, b: &FfElem) -> FfElem {
        FfElem::new(self.data.ring.sub(&a.coeffs, &b.coeffs))
    }

    pub fn neg(&self, a: &FfElem) -> FfElem {
        FfElem::new(self.data.ring.neg(&a.coeffs))
    }

    pub fn mul(&self, a: &FfElem, b: &FfElem) -> FfElem {
        FfElem::new(self.data.ring.mul(&a.coeffs, &b.coeffs))
    }

    pub fn pow(&self, a: &FfElem, e: u128) -> FfElem {
        FfElem::new(self.data.ring.pow(&a.coeffs, e))
    }

    pub fn inv(&self, a: &FfElem) -> Option<FfElem> {
        if self.is_zero(a) {
            return None;
        }
        let p = self.p();
        if self.deg() == 1 {
            return Some(self.constant(inv_mod_prime(a.coeffs[0], p)));
        }
        let inv = fp_poly::inv_mod(&fp_poly::trim(a.coeffs.clone()), self.defining_poly(), p)?;
        let mut c = inv;
        c.resize(self.deg() as usize, 0);
        Some(FfElem::new(c))
    }

    /// `F_p`-matrix of `x -> x^{p^k}` in the power basis: column `b` holds
    /// the coordinates of `(X^b)^{p^k}`. Cached per field and `k`.
    pub fn frobenius_matrix(&self, k: u64) -> Arc<Vec<Vec<u64>>> {
        type Key = (u64, Vec<u64>, u64);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Vec<Vec<u64>>>>>> = OnceLock::new();
        let k = k % self.deg() as u64;
        let key = (self.p(), self.defining_poly().to_vec(), k);
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(m) = cache.lock().unwrap().get(&key) {
            return m.clone();
        }
        let d = self.deg() as usize;
        let mut m = vec![vec![0u64; d]; d];
        let xp = self.frobenius(&self.generator(), k);
        let mut col = self.one();
        for b in 0..d {
            for (a, &v) in col.coeffs.iter().enumerate() {
                m[a][b] = v;
            }
            col = self.mul(&col, &xp);
        }
        let m = Arc::new(m);
        cache.lock().unwrap().insert(key, m.clone());
        m
    }

    /// `F_p`-matrix of multiplication by `c`: column `k` holds `c X^k`.
    pub fn mul_matrix(&self, c: &FfElem) -> Vec<Vec<u64>> {
        let d = self.deg() as usize;
        let p = self.p();
        let f = self.defining_poly();
        let mut m = vec![vec![0u64; d]; d];
        let mut v = c.coeffs.clone();
        for k in 0..d {
            for (a, &x) in v.iter().enumerate() {
                m[a][k] = x;
            }
            // v <- v X mod f, with f monic of degree d
            let top = v[d - 1];
            for i in (1..d).rev() {
                v[i] = sub_mod(v[i - 1], mul_mod(top, f[i], p), p);
            }
            v[0] = sub_mod(0, mul_mod(top, f[0], p), p);
        }
        m
    }

    /// `x^{p^k}`; `k` is reduced modulo `deg`.
    pub fn frobenius(&self, x: &FfElem, k: u64) -> FfElem {
        if self.deg() == 1 {
            return x.clone();
        }
        let k = k % self.deg() as u64;
        let mut y = x.clone();
        for _ in 0..k {
            y = self.pow(&y, self.p() as u128);
        }
        y
    }

    /// Position of `x` in [`FiniteField::enumerate`] order (base-p digits,
    /// coefficient of `X^0` least significant).
    pub fn index(&self, x: &FfElem) -> u128 {
        x.coeffs.iter().rev().fold(0u128, |acc, &c| acc * self.p() as u128 + c as u128)
    }

    pub fn from_index(&self, mut idx: u128) -> FfElem {
        let p = self.p() as u128;
        let coeffs = (0..self.deg())
            .map(|_| {
                let c = (idx % p) as u64;
                idx /= p;
                c
            })
            .collect();
        FfElem::new(coeffs)
    }

    /// Total order matching the enumeration order, valid at any field size.
    pub fn enumeration_key(x: &FfElem) -> Vec<u64> {
        x.coeffs.iter().rev().copied().collect()
    }

    pub fn enumerate(&self) -> Result<Vec<FfElem>> {
        self.enumerate_with_cap(ENUMERATION_CAP)
    }

    pub fn enumerate_with_cap(&self, cap: u128) -> Result<Vec<FfElem>> {
        let size = self.cardinality().unwrap_or(u128::MAX);
        if size > cap {
            return Err(Error::TooLarge { what: "field", size, cap });
        }
        Ok((0..size).map(|i| self.from_index(i)).collect())
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FfElem {
        FfElem::new((0..self.deg()).map(|_| rng.gen_range(0..self.p())).collect())
    }

    /// Absolute trace to `F_p`.
    pub fn trace(&self, x: &FfElem) -> u64 {
        let mut acc = self.zero();
        let mut y = x.clone();
        for _ in 0..self.deg() {
            acc = self.add(&acc, &y);
            y = self.pow(&y, self.p() as u128);
        }
        acc.coeffs[0]
    }

    /// Evaluates a polynomial over `F_p` (low-to-high) at `x`.
    pub fn eval_fp_poly(&self, coeffs: &[u64], x: &FfElem) -> FfElem {
        FfElem::new(self.data.ring.eval_int_poly(coeffs, &x.coeffs))
    }
}

/// Polynomials over a finite field, used to locate roots in large targets.
mod fq_poly {
    use super::*;

    pub type Poly = Vec<FfElem>;

    pub fn trim(k: &FiniteField, mut a: Poly) -> Poly {
        while a.last().is_some_and(|c| k.is_zero(c)) {
            a.pop();
        }
        a
    }

    pub fn mul(k: &FiniteField, a: &Poly, b: &Poly) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![k.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = k.add(&out[i + j], &k.mul(x, y));
            }
        }
        trim(k, out)
    }

    pub fn rem(k: &FiniteField, a: &Poly, b: &Poly) -> Poly {
        let b = trim(k, b.clone());
        let mut r = trim(k, a.clone());
        let lead_inv = k.inv(b.last().unwrap()).unwrap();
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let c = k.mul(r.last().unwrap(), &lead_inv);
            for (j, bj) in b.iter().enumerate() {
                r[shift + j] = k.sub(&r[shift + j], &k.mul(&c, bj));
            }
            r = trim(k, r);
        }
        r
    }

    pub fn monic(k: &FiniteField, a: Poly) -> Poly {
        match a.last() {
            None => a,
            Some(l) => {
                let li = k.inv(l).unwrap();
                a.iter().map(|c| k.mul(c, &li)).collect()
            }
        }
    }

    pub fn gcd(k: &FiniteField, a: &Poly, b: &Poly) -> Poly {
        let mut a = trim(k, a.clone());
        let mut b = trim(k, b.clone());
        while !b.is_empty() {
            let r = rem(k, &a, &b);
            a = b;
            b = r;
        }
        monic(k, a)
    }

    pub fn div_exact(k: &FiniteField, a: &Poly, b: &Poly) -> Poly {
        let b = trim(k, b.clone());
        let mut r = trim(k, a.clone());
        let lead_inv = k.inv(b.last().unwrap()).unwrap();
        let mut q = vec![k.zero(); r.len() + 1 - b.len()];
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let c = k.mul(r.last().unwrap(), &lead_inv);
            for (j, bj) in b.iter().enumerate() {
                r[shift + j] = k.sub(&r[shift + j], &k.mul(&c, bj));
            }
            q[shift] = c;
            r = trim(k, r);
        }
        trim(k, q)
    }

    pub fn powmod(k: &FiniteField, a: &Poly, mut e: u64, g: &Poly) -> Poly {
        let mut acc = vec![k.one()];
        let mut base = rem(k, a, g);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(k, &mul(k, &acc, &base), g);
            }
            e >>= 1;
            if e > 0 {
                base = rem(k, &mul(k, &base, &base), g);
            }
        }
        acc
    }

    /// One root of a squarefree `g` that splits into linear factors over `k`,
    /// by equal-degree splitting with seeded random shifts.
    pub fn find_root(k: &FiniteField, g: &Poly) -> FfElem {
        let mut g = monic(k, trim(k, g.clone()));
        let p = k.p();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        while g.len() > 2 {
            // a linear h with a random leading coefficient separates
            // Galois-conjugate roots, which X + b alone would not
            let h: Poly = trim(k, vec![k.random(&mut rng), k.random(&mut rng)]);
            if h.len() < 2 {
                continue;
            }
            // p = 2: absolute trace map; odd p: h^((p^deg - 1)/2)
            let split = if p == 2 {
                let mut acc: Poly = Vec::new();
                let mut y = rem(k, &h, &g);
                for _ in 0..k.deg() {
                    acc = add(k, &acc, &y);
                    y = rem(k, &mul(k, &y, &y), &g);
                }
                acc
            } else {
                let a = powmod(k, &h, (p - 1) / 2, &g);
                let mut prod: Poly = vec![k.one()];
                let mut b = a;
                for _ in 0..k.deg() {
                    prod = rem(k, &mul(k, &prod, &b), &g);
                    b = powmod(k, &b, p, &g);
                }
                add(k, &prod, &vec![k.neg(&k.one())])
            };
            let d = gcd(k, &g, &split);
            if d.len() > 1 && d.len() < g.len() {
                g = if d.len() <= g.len() - d.len() + 1 { d } else { div_exact(k, &g, &d) };
                g = monic(k, g);
            }
        }
        k.neg(&g[0])
    }

    pub fn add(k: &FiniteField, a: &Poly, b: &Poly) -> Poly {
        let n = a.len().max(b.len());
        let z = k.zero();
        trim(k, (0..n).map(|i| k.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect())
    }
}

fn scan_least_root(source: &FiniteField, target: &FiniteField) -> FfElem {
    let f = source.defining_poly();
    (0..target.cardinality().expect("scanned targets are small"))
        .map(|i| target.from_index(i))
        .find(|x| target.is_zero(&target.eval_fp_poly(f, x)))
        .expect("irreducible polynomial of degree dividing the target splits")
}

fn split_least_root(source: &FiniteField, target: &FiniteField) -> FfElem {
    let g: Vec<FfElem> = source.defining_poly().iter().map(|&c| target.constant(c)).collect();
    let root = fq_poly::find_root(target, &g);
    // the roots form one Frobenius orbit; choose the least
    let mut best = root.clone();
    let mut y = root;
    for _ in 1..source.deg() {
        y = target.frobenius(&y, 1);
        if FiniteField::enumeration_key(&y) < FiniteField::enumeration_key(&best) {
            best = y.clone();
        }
    }
    best
}

/// A field embedding `source -> target`, determined by the image of the
/// source generator. The image is the least root of the source defining
/// polynomial in enumeration order, so embeddings are canonical.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub source: FiniteField,
    pub target: FiniteField,
    pub image_of_generator: FfElem,
}

impl Embedding {
    pub fn new(source: &FiniteField, target: &FiniteField) -> Result<Self> {
        if source.p() != target.p() {
            return Err(Error::Shape("embedding between fields of different characteristic".into()));
        }
        if !target.deg().is_multiple_of(source.deg()) {
            return Err(Error::DegreeMismatch { source_deg: source.deg(), target_deg: target.deg() });
        }
        type Key = (u64, Vec<u64>, Vec<u64>);
        static CACHE: OnceLock<Mutex<HashMap<Key, FfElem>>> = OnceLock::new();
        let key = (source.p(), source.defining_poly().to_vec(), target.defining_poly().to_vec());
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(img) = cache.lock().unwrap().get(&key) {
            return Ok(Embedding { source: source.clone(), target: target.clone(), image_of_generator: img.clone() });
        }
        let image = if source.deg() == 1 {
            // prime field: the generator class is 0
            target.zero()
        } else if target.cardinality().is_some_and(|c| c <= SCAN_CAP) {
            scan_least_root(source, target)
        } else {
            split_least_root(source, target)
        };
        cache.lock().unwrap().insert(key, image.clone());
        Ok(Embedding { source: source.clone(), target: target.clone(), image_of_generator: image })
    }

    pub fn embed(&self, x: &FfElem) -> Result<FfElem> {
        if !self.source.contains(x) {
            return Err(Error::ForeignElement);
        }
        Ok(self.target.eval_fp_poly(&x.coeffs, &self.image_of_generator))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_irreducible(p: u64, f: &[u64]) -> bool {
        // no root and no factor of lower degree: enumerate monic divisors
        let d = f.len() - 1;
        for dd in 1..=d / 2 {
            let count = p.pow(dd as u32);
            for idx in 0..count {
                let mut g: Vec<u64> = (0..dd).map(|i| (idx / p.pow(i as u32)) % p).collect();
                g.push(1);
                if fp_poly::rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn prime_field_convention() {
        let f2 = make_field(2, 1, 0).unwrap();
        assert_eq!(f2.defining_poly(), &[0, 1]);
        assert_eq!(f2.enumerate().unwrap().len(), 2);
        let f3 = make_field(3, 1, 0).unwrap();
        assert_eq!(f3.cardinality(), Some(3));
    }

    #[test]
    fn f4_defining_poly_is_unique_quadratic() {
        // enumerate the 4 monic quadratics over F_2 and test irreducibility
        let irreducible: Vec<Vec<u64>> =
            (0..4u64).map(|i| vec![i & 1, (i >> 1) & 1, 1]).filter(|f| brute_irreducible(2, f)).collect();
        assert_eq!(irreducible, vec![vec![1, 1, 1]]);
        let f4 = make_field(2, 2, 0).unwrap();
        assert_eq!(f4.defining_poly(), &[1, 1, 1]);
    }

    #[test]
    fn irreducibility_matches_brute_force() {
        for p in [2u64, 3] {
            for d in 2..=4u32 {
                for idx in 0..p.pow(d) {
                    let mut f: Vec<u64> = (0..d).map(|i| (idx / p.pow(i)) % p).collect();
                    f.push(1);
                    assert_eq!(fp_poly::is_irreducible(&f, p), brute_irreducible(p, &f), "{f:?}");
                }
            }
        }
    }

    #[test]
    fn seeded_search_is_deterministic() {
        let a = make_field(3, 5, 17).unwrap();
        let b = make_field(3, 5, 17).unwrap();
        assert_eq!(a.defining_poly(), b.defining_poly());
        assert!(FiniteField::with_poly(3, a.defining_poly().to_vec()).is_ok());
        assert_eq!(make_field(4, 1, 0).unwrap_err(), Error::NotPrime(4));
    }

    #[test]
    fn frobenius_in_f4() {
        let f4 = make_field(2, 2, 0).unwrap();
        let g = f4.generator();
        assert_eq!(f4.frobenius(&g, 1), f4.elem(vec![1, 1]).unwrap());
        assert_eq!(f4.frobenius(&g, 0), g);
        assert_eq!(f4.frobenius(&g, 2), g);
        let f2 = make_field(2, 1, 0).unwrap();
        assert_eq!(f2.frobenius(&f2.one(), 1), f2.one());
    }

    #[test]
    fn every_element_is_fixed_by_full_frobenius() {
        for (p, d) in [(2u64, 3u32), (3, 2), (5, 2), (2, 4)] {
            let k = make_field(p, d, 0).unwrap();
            for x in k.enumerate().unwrap() {
                assert_eq!(k.pow(&x, k.cardinality().unwrap()), x);
                assert_eq!(k.frobenius(&x, d as u64), x);
            }
        }
    }

    #[test]
    fn inverses() {
        let k = make_field(3, 3, 0).unwrap();
        for x in k.enumerate().unwrap().into_iter().skip(1) {
            let y = k.inv(&x).unwrap();
            assert_eq!(k.mul(&x, &y), k.one());
        }
        assert!(k.inv(&k.zero()).is_none());
    }

    #[test]
    fn enumeration_sizes_and_cap() {
        assert_eq!(make_field(2, 2, 0).unwrap().enumerate().unwrap().len(), 4);
        assert_eq!(make_field(3, 2, 0).unwrap().enumerate().unwrap().len(), 9);
        let big = make_field(2, 21, 0).unwrap();
        assert!(matches!(big.enumerate(), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn embeddings_small_and_large() {
        let f2 = make_field(2, 1, 0).unwrap();
        let f4 = make_field(2, 2, 0).unwrap();
        let f16 = make_field(2, 4, 0).unwrap();
        let e = Embedding::new(&f2, &f4).unwrap();
        assert_eq!(e.embed(&f2.one()).unwrap(), f4.one());
        assert_eq!(e.embed(&f2.zero()).unwrap(), f4.zero());
        let e = Embedding::new(&f4, &f16).unwrap();
        // root of x^2 + x + 1 in F_16, least in scan order
        let roots: Vec<FfElem> =
            f16.enumerate().unwrap().into_iter().filter(|x| f16.is_zero(&f16.eval_fp_poly(&[1, 1, 1], x))).collect();
        assert_eq!(roots.len(), 2);
        assert_eq!(e.image_of_generator, roots[0]);
        let f8 = make_field(2, 3, 0).unwrap();
        assert!(matches!(Embedding::new(&f4, &f8), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn linear_maps_match_field_operations() {
        let k = make_field(3, 5, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let (c, x) = (k.random(&mut rng), k.random(&mut rng));
            let apply = |m: &[Vec<u64>], v: &FfElem| -> FfElem {
                FfElem::new(
                    m.iter().map(|row| row.iter().zip(&v.coeffs).map(|(a, b)| a * b).sum::<u64>() % 3).collect(),
                )
            };
            assert_eq!(apply(&k.mul_matrix(&c), &x), k.mul(&c, &x));
            assert_eq!(apply(&k.frobenius_matrix(2), &x), k.frobenius(&x, 2));
        }
    }

    #[test]
    fn scan_and_split_select_the_same_root() {
        for (p, a, b) in [(2u64, 2u32, 8u32), (2, 4, 8), (2, 3, 12), (3, 2, 6), (3, 3, 6)] {
            let (s, t) = (make_field(p, a, 0).unwrap(), make_field(p, b, 0).unwrap());
            assert_eq!(scan_least_root(&s, &t), split_least_root(&s, &t), "p={p} {a}->{b}");
        }
    }

    #[test]
    fn large_target_uses_orbit_refinement() {
        // F_9 into F_{3^14} is too large to scan
        let f9 = make_field(3, 2, 0).unwrap();
        let big = make_field(3, 14, 0).unwrap();
        let e = Embedding::new(&f9, &big).unwrap();
        let img = &e.image_of_generator;
        assert!(big.is_zero(&big.eval_fp_poly(f9.defining_poly(), img)));
        let conj = big.frobenius(img, 1);
        assert!(FiniteField::enumeration_key(img) < FiniteField::enumeration_key(&conj));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (a, b) = (f9.random(&mut rng), f9.random(&mut rng));
            assert_eq!(e.embed(&f9.mul(&a, &b)).unwrap(), big.mul(&e.embed(&a).unwrap(), &e.embed(&b).unwrap()));
        }
    }
}
