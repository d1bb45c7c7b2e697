//! Word-sized modular arithmetic and the quotient rings `(Z/m)[X]/(f)` that
//! back both finite fields and truncated Witt rings.

use serde::{Deserialize, Serialize};
use std::fmt;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + m - b
    }
}

pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Inverse of `a` modulo a prime `p`; `a` must be nonzero mod `p`.
pub fn inv_mod_prime(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

/// `p^s`, or `None` on overflow past `2^62`.
pub fn checked_prime_power(p: u64, s: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..s {
        acc = acc.checked_mul(p)?;
        if acc > (1u64 << 62) {
            return None;
        }
    }
    Some(acc)
}

/// p-adic valuation of an integer; `None` for zero.
pub fn int_valuation(mut x: u64, p: u64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    Some(v)
}

/// A p-adic valuation inside a truncated ring. Zero has valuation
/// [`Valuation::Infinite`], which orders above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// The ring `(Z/m)[X]/(f)` for a monic `f` of degree `deg >= 1`.
///
/// Elements are coefficient vectors of length `deg`, low-to-high. With
/// `f = X` (degree 1) the ring is `Z/m` itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyQuotient {
    pub modulus: u64,
    /// Monic, length `deg + 1`.
    pub poly: Vec<u64>,
}

impl PolyQuotient {
    pub fn new(modulus: u64, poly: Vec<u64>) -> Self {
        debug_assert!(poly.len() >= 2 && *poly.last().unwrap() == 1 % modulus);
        PolyQuotient { modulus, poly }
    }

    #[inline]
    pub fn deg(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.deg()]
    }

    pub fn one(&self) -> Vec<u64> {
        self.constant(1)
    }

    pub fn constant(&self, c: u64) -> Vec<u64> {
        let mut v = self.zero();
        v[0] = c % self.modulus;
        v
    }

    /// The class of `X`.
    pub fn generator(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.deg().max(2)];
        v[1] = 1;
        self.reduce(v)
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| add_mod(x, y, self.modulus)).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| sub_mod(x, y, self.modulus)).collect()
    }

    pub fn neg(&self, a: &[u64]) -> Vec<u64> {
        a.iter().map(|&x| sub_mod(0, x, self.modulus)).collect()
    }

    pub fn scale(&self, a: &[u64], c: u64) -> Vec<u64> {
        let c = c % self.modulus;
        a.iter().map(|&x| mul_mod(x, c, self.modulus)).collect()
    }

    /// Reduces an arbitrary-length coefficient vector modulo `f`.
    pub fn reduce(&self, mut v: Vec<u64>) -> Vec<u64> {
        let d = self.deg();
        let m = self.modulus;
        for c in v.iter_mut() {
            *c %= m;
        }
        let mut i = v.len();
        while i > d {
            i -= 1;
            let c = v[i];
            if c != 0 {
                // subtract c * X^(i-d) * f
                for j in 0..d {
                    let t = mul_mod(c, self.poly[j], m);
                    v[i - d + j] = sub_mod(v[i - d + j], t, m);
                }
                v[i] = 0;
            }
        }
        v.truncate(d);
        v.resize(d, 0);
        v
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let d = self.deg();
        if d == 1 {
            return vec![mul_mod(a[0], b[0], self.modulus)];
        }
        let m = self.modulus as u128;
        let mut acc = vec![0u128; 2 * d - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                acc[i + j] = (acc[i + j] + x as u128 * y as u128) % m;
            }
        }
        self.reduce(acc.into_iter().map(|c| c as u64).collect())
    }

    pub fn pow(&self, a: &[u64], mut e: u128) -> Vec<u64> {
        let mut acc = self.one();
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Evaluates a polynomial with coefficients in `Z/m` (low-to-high) at `x`.
    pub fn eval_int_poly(&self, coeffs: &[u64], x: &[u64]) -> Vec<u64> {
        let mut acc = self.zero();
        for &c in coeffs.iter().rev() {
            acc = self.mul(&acc, x);
            acc[0] = add_mod(acc[0], c % self.modulus, self.modulus);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let ps: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn valuation_order() {
        assert!(Valuation::Finite(1000) < Valuation::Infinite);
        assert!(Valuation::Finite(1) < Valuation::Finite(2));
        assert_eq!(int_valuation(12, 2), Some(2));
        assert_eq!(int_valuation(0, 2), None);
    }

    #[test]
    fn quotient_ring_f4() {
        // F_2[X]/(X^2+X+1): X^2 = X + 1
        let r = PolyQuotient::new(2, vec![1, 1, 1]);
        let g = r.generator();
        assert_eq!(r.mul(&g, &g), vec![1, 1]);
        assert_eq!(r.pow(&g, 3), vec![1, 0]);
    }

    #[test]
    fn degree_one_is_integers_mod_m() {
        let r = PolyQuotient::new(8, vec![0, 1]);
        assert_eq!(r.mul(&[3], &[5]), vec![7]);
        assert_eq!(r.generator(), vec![0]);
    }

    #[test]
    fn prime_power_guard() {
        assert_eq!(checked_prime_power(2, 3), Some(8));
        assert_eq!(checked_prime_power(2, 63), None);
        assert!(checked_prime_power(3, 39).is_some());
    }
}
