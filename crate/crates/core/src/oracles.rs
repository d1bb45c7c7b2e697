//! Brute-force verifiers. Each oracle recomputes its answer with a separate
//! naive method (subset sums, tuple enumeration, a hand-rolled Smith form)
//! and compares it with the library path under test.

use crate::artin_schreier::{self, AsSystem, FiberCount};
use crate::crystal::Crystal;
use crate::family::{self, StratumKey, SweepOptions, DEFAULT_POINT_BUDGET, DIMENSION_TOLERANCE};
use crate::field::{make_field, Embedding, FfElem, FiniteField};
use crate::newton::{self, BreakPoint};
use crate::witt::{self, WittRing};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

/// Failures kept verbatim in a report; the rest are only counted.
const KEPT_FAILURES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub name: String,
    pub cases: u64,
    pub failure_count: u64,
    pub failures: Vec<String>,
    /// Wall-clock time; left out of serialized reports so they stay reproducible.
    #[serde(skip_serializing, default)]
    pub elapsed_ms: u64,
}

impl OracleReport {
    pub fn pass(&self) -> bool {
        self.failure_count == 0
    }
}

struct Run {
    name: String,
    cases: u64,
    failure_count: u64,
    failures: Vec<String>,
    start: Instant,
}

impl Run {
    fn new(name: &str) -> Self {
        Run { name: name.into(), cases: 0, failure_count: 0, failures: Vec::new(), start: Instant::now() }
    }

    fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.fail(witness());
        }
    }

    fn fail(&mut self, msg: String) {
        self.failure_count += 1;
        if self.failures.len() < KEPT_FAILURES {
            self.failures.push(msg);
        }
    }

    fn finish(self) -> OracleReport {
        OracleReport {
            name: self.name,
            cases: self.cases,
            failure_count: self.failure_count,
            failures: self.failures,
            elapsed_ms: self.start.elapsed().as_millis() as u64,
        }
    }
}

/// Coordinate descent: repeatedly replaces one coordinate by a smaller
/// candidate while `fails` still holds.
fn shrink<T: Clone>(mut x: Vec<T>, smaller: impl Fn(&T) -> Vec<T>, fails: impl Fn(&[T]) -> bool) -> Vec<T> {
    loop {
        let mut improved = false;
        for i in 0..x.len() {
            for cand in smaller(&x[i]) {
                let mut y = x.clone();
                y[i] = cand;
                if fails(&y) {
                    x = y;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            return x;
        }
    }
}

// ---------------------------------------------------------------------------
// Break points of exterior powers

/// For every integral polygon of rank `<= max_r` with slopes `<= max_slope`
/// and every `0 < a < r`: `(a, nu(a))` is a break point exactly when
/// `(1, nu(a))` is one for the `a`-th exterior power, and the second
/// smallest `a`-subset sum exceeds the smallest by `alpha_{a+1} - alpha_a`.
pub fn exterior_break_oracle(max_r: usize, max_slope: u64) -> Result<OracleReport> {
    let mut run = Run::new("exterior-breaks");
    for r in 2..=max_r {
        for nu in newton::integral_polygons(r, max_slope) {
            let alpha: Vec<i64> = nu.slopes().iter().map(|s| s.to_integer()).collect();
            for a in 1..r {
                let mut sums: Vec<i64> = (0u32..1 << r)
                    .filter(|m| m.count_ones() as usize == a)
                    .map(|m| (0..r).filter(|i| m >> i & 1 == 1).map(|i| alpha[i]).sum())
                    .collect();
                sums.sort();
                let b = alpha[..a].iter().sum::<i64>();
                let (beta1, beta2) = (sums[0], sums[1]);
                let naive_lhs = alpha[a - 1] < alpha[a];
                let naive_rhs = beta1 < beta2;
                let ext = nu.exterior_power(a)?;
                let lhs = nu.has_break(BreakPoint::new(a, b as u64));
                let rhs = ext.has_break(BreakPoint::new(1, b as u64));
                let ext_ok = ext.slopes().iter().map(|s| s.to_integer()).eq(sums.iter().copied());
                run.check(lhs == rhs && lhs == naive_lhs && rhs == naive_rhs && ext_ok && beta1 == b, || {
                    format!("{nu}, a={a}: break {lhs}, exterior break {rhs}, naive {naive_lhs}/{naive_rhs}")
                });
                run.check(beta2 - beta1 == alpha[a] - alpha[a - 1], || {
                    format!("{nu}, a={a}: beta2 - beta1 = {}, alpha gap {}", beta2 - beta1, alpha[a] - alpha[a - 1])
                });
            }
        }
    }
    Ok(run.finish())
}

// ---------------------------------------------------------------------------
// Primitive vectors under isogenies over Z/p^s

fn vmod(x: i128, m: u64) -> u64 {
    x.rem_euclid(m as i128) as u64
}

fn val(x: u64, p: u64, s: u32) -> u32 {
    if x == 0 {
        return s;
    }
    let (mut v, mut y) = (0, x);
    while y % p == 0 {
        y /= p;
        v += 1;
    }
    v
}

/// Elementary-divisor exponents over `Z/p^s` by plain pivoting; `s` marks a
/// zero divisor.
fn naive_smith_exponents(p: u64, s: u32, mat: &[Vec<u64>]) -> Vec<u32> {
    let m = p.pow(s);
    let mut a: Vec<Vec<u64>> = mat.to_vec();
    let r = a.len();
    let mut out = Vec::new();
    for k in 0..r {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in k..r {
            for j in k..r {
                let v = val(a[i][j], p, s);
                if best.is_none_or(|b| v < b.0) {
                    best = Some((v, i, j));
                }
            }
        }
        let (v, bi, bj) = best.expect("nonempty");
        if v == s {
            out.extend(std::iter::repeat_n(s, r - k));
            break;
        }
        a.swap(k, bi);
        for row in a.iter_mut() {
            row.swap(k, bj);
        }
        let unit = a[k][k] / p.pow(v);
        let inv = crate::arith::pow_mod(unit % m, phi_minus_one(p, s), m);
        for i in k + 1..r {
            let f = (a[i][k] / p.pow(v)) as u128 * inv as u128 % m as u128;
            for j in k..r {
                a[i][j] = vmod(a[i][j] as i128 - (f * a[k][j] as u128 % m as u128) as i128, m);
            }
        }
        for j in k + 1..r {
            let f = (a[k][j] / p.pow(v)) as u128 * inv as u128 % m as u128;
            for row in a.iter_mut().skip(k) {
                row[j] = vmod(row[j] as i128 - (f * row[k] as u128 % m as u128) as i128, m);
            }
        }
        out.push(v);
    }
    out.sort();
    out
}

/// Exponent giving the inverse of a unit mod `p^s` by Euler's theorem.
fn phi_minus_one(p: u64, s: u32) -> u64 {
    p.pow(s - 1) * (p - 1) - 1
}

fn mat_mul_mod(a: &[Vec<u64>], b: &[Vec<u64>], m: u64) -> Vec<Vec<u64>> {
    let r = a.len();
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| ((0..r).map(|k| a[i][k] as u128 * b[k][j] as u128).sum::<u128>() % m as u128) as u64)
                .collect()
        })
        .collect()
}

/// For `p` in {2, 3}, `s <= max_s`, `r <= max_r`: samples `trials`
/// matrices whose cokernel is killed by `p^t` (certified by Smith form) and
/// checks that every primitive vector has image of valuation `<= t`.
pub fn primitive_vector_oracle(p: u64, max_s: u32, max_r: usize, trials: usize, seed: u64) -> Result<OracleReport> {
    let mut run = Run::new("primitive-vectors");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p);
    for s in 1..=max_s {
        let m = p.pow(s);
        for r in 1..=max_r {
            let mut certified = 0;
            while certified < trials {
                let unimodular = |rng: &mut ChaCha8Rng| loop {
                    let u: Vec<Vec<u64>> = (0..r).map(|_| (0..r).map(|_| rng.gen_range(0..m)).collect()).collect();
                    if naive_smith_exponents(p, s, &u).iter().all(|&e| e == 0) {
                        return u;
                    }
                };
                let u = unimodular(&mut rng);
                let v = unimodular(&mut rng);
                let mut d = vec![vec![0u64; r]; r];
                for (i, row) in d.iter_mut().enumerate() {
                    row[i] = p.pow(rng.gen_range(0..s));
                }
                let g = mat_mul_mod(&mat_mul_mod(&u, &d, m), &v, m);
                let exps = naive_smith_exponents(p, s, &g);
                let t = *exps.last().expect("r >= 1");
                if t >= s {
                    continue;
                }
                certified += 1;
                check_primitive_images(&mut run, p, s, t, &g);
            }
        }
    }
    Ok(run.finish())
}

fn check_primitive_images(run: &mut Run, p: u64, s: u32, t: u32, g: &[Vec<u64>]) {
    let m = p.pow(s);
    let r = g.len();
    let pt1 = p.pow(t + 1);
    let image = |x: &[u64]| -> Vec<u64> {
        (0..r).map(|i| ((0..r).map(|j| g[i][j] as u128 * x[j] as u128).sum::<u128>() % m as u128) as u64).collect()
    };
    let fails = |x: &[u64]| x.iter().any(|c| c % p != 0) && image(x).iter().all(|c| c % pt1 == 0);
    // odometer over (Z/p^s)^r; bumping x_k by one adds column k
    let mut x = vec![0u64; r];
    let mut y = vec![0u64; r];
    let mut bad: Option<Vec<u64>> = None;
    let mut count = 0u64;
    'outer: loop {
        if x.iter().any(|c| c % p != 0) {
            count += 1;
            if y.iter().all(|c| c % pt1 == 0) && bad.is_none() {
                bad = Some(x.clone());
            }
        }
        for k in 0..r {
            x[k] += 1;
            for (yi, row) in y.iter_mut().zip(g) {
                *yi = (*yi + row[k]) % m;
            }
            if x[k] < m {
                continue 'outer;
            }
            x[k] = 0;
        }
        break;
    }
    run.cases += count;
    if let Some(x) = bad {
        let w = shrink(x, |&c| (0..c).collect(), fails);
        run.fail(format!("p={p} s={s} t={t} g={g:?}: primitive {w:?} maps to {:?}", image(&w)));
    }
}

// ---------------------------------------------------------------------------
// Generalized Artin–Schreier systems by tuple enumeration

/// `F_{p^deg}` with log tables, for enumerating every tuple quickly.
/// Elements are dense indices; sums use packed 4-bit lanes (p <= 7).
struct TupleField {
    p: u64,
    q: usize,
    field: FiniteField,
    exp: Vec<u32>,
    log: Vec<u32>,
    pack: Vec<u64>,
}

const LANES: u64 = 0x1111_1111_1111_1111;

impl TupleField {
    fn get(p: u64, deg: u32) -> Result<Arc<TupleField>> {
        static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<TupleField>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().unwrap().get(&(p, deg)) {
            return Ok(t.clone());
        }
        let t = Arc::new(Self::build(p, deg)?);
        cache.lock().unwrap().insert((p, deg), t.clone());
        Ok(t)
    }

    fn build(p: u64, deg: u32) -> Result<TupleField> {
        if p > 7 || deg > 16 {
            return Err(Error::TooLarge { what: "tuple field", size: p.pow(deg) as u128, cap: 1 << 16 });
        }
        let field = make_field(p, deg, 0)?;
        let q = p.pow(deg) as usize;
        let pack: Vec<u64> = (0..q)
            .map(|i| {
                let mut v = 0u64;
                let mut idx = i as u64;
                for lane in 0..deg {
                    v |= (idx % p) << (4 * lane);
                    idx /= p;
                }
                v
            })
            .collect();
        let one = field.one();
        let mut exp = Vec::new();
        for cand in 1..q {
            let g = field.from_index(cand as u128);
            exp.clear();
            let mut x = one.clone();
            loop {
                exp.push(field.index(&x) as u32);
                x = field.mul(&x, &g);
                if x == one || exp.len() >= q {
                    break;
                }
            }
            if exp.len() == q - 1 {
                break;
            }
        }
        let mut log = vec![0u32; q];
        for (e, &x) in exp.iter().enumerate() {
            log[x as usize] = e as u32;
        }
        Ok(TupleField { p, q, field, exp, log, pack })
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        let t = s + (8 - self.p) * LANES;
        let hi = (t >> 3) & LANES;
        s - self.p * hi
    }

    /// `c * y^{p^m}` as a packed element, for dense `c`, `y`.
    fn term(&self, c: usize, y: usize, m: u32) -> u64 {
        if c == 0 || y == 0 {
            return 0;
        }
        let order = (self.q - 1) as u128;
        let pm = (self.p as u128).pow(m) % order;
        let e = (self.log[c] as u128 + self.log[y] as u128 * pm) % order;
        self.pack[self.exp[e as usize] as usize]
    }
}

/// Counts solutions of a parameter-free system over `level` by trying every
/// tuple.
fn brute_force_count(sys: &AsSystem, tf: &TupleField) -> Result<u64> {
    let emb = Embedding::new(sys.base(), &tf.field)?;
    let r = sys.num_vars();
    let dense = |c: &FfElem| -> Result<usize> { Ok(tf.field.index(&emb.embed(c)?) as usize) };
    let mut constants = Vec::with_capacity(r);
    // table[i][j][y] = packed sum over the terms of equation i in x_j
    let mut tables = vec![vec![vec![0u64; tf.q]; r]; r];
    for (i, eq) in sys.equations().iter().enumerate() {
        let c = eq.constant.terms.values().next().map(&dense).transpose()?.unwrap_or(0);
        constants.push(tf.pack[c]);
        for term in &eq.terms {
            let Some(coeff) = term.coeff.terms.values().next() else { continue };
            let c = dense(coeff)?;
            let table = &mut tables[i][term.var];
            for (y, slot) in table.iter_mut().enumerate() {
                *slot = tf.add(*slot, tf.term(c, y, term.exp));
            }
        }
    }
    let total = tf.q.pow(r as u32);
    let mut count = 0u64;
    let mut x = vec![0usize; r];
    for _ in 0..total {
        let ok = (0..r).all(|i| {
            let rhs = (0..r).fold(constants[i], |acc, j| tf.add(acc, tables[i][j][x[j]]));
            rhs == tf.pack[x[i]]
        });
        if ok {
            count += 1;
        }
        for xi in x.iter_mut() {
            *xi += 1;
            if *xi < tf.q {
                break;
            }
            *xi = 0;
        }
    }
    Ok(count)
}

fn random_system(rng: &mut ChaCha8Rng, k: &FiniteField, r: usize) -> Result<AsSystem> {
    let mut rows = Vec::with_capacity(r);
    let nonzero = |rng: &mut ChaCha8Rng| loop {
        let c = k.random(rng);
        if !k.is_zero(&c) {
            return c;
        }
    };
    for _ in 0..r {
        let constant = if rng.gen_bool(0.5) { nonzero(rng) } else { k.zero() };
        let mut terms = Vec::new();
        for j in 0..r {
            for m in 1..=2 {
                if rng.gen_bool(0.5) {
                    terms.push((j, m, nonzero(rng)));
                }
            }
        }
        rows.push((constant, terms));
    }
    artin_schreier::constant_system(k, rows)
}

fn power_of(p: u64, mut n: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut e = 0;
    while n.is_multiple_of(p) {
        n /= p;
        e += 1;
    }
    (n == 1).then_some(e)
}

fn fiber_u64(fc: &FiberCount) -> Option<u64> {
    u64::try_from(fc.count()).ok()
}

/// One random system: structural Jacobian, geometric count, and agreement
/// of the linear-algebra count with tuple enumeration at every level with
/// at most `2^16` tuples.
fn as_count_case(run: &mut Run, sys: &AsSystem) -> Result<()> {
    let k = sys.base();
    let (p, deg, r) = (k.p(), k.deg(), sys.num_vars() as u32);
    run.check(sys.jacobian_is_identity()?, || format!("{sys:?}: Jacobian is not the identity"));
    let geo = match artin_schreier::geometric_count(sys, k, &[]) {
        Ok(g) => g,
        Err(e) => {
            run.fail(format!("{sys:?}: geometric count failed: {e}"));
            return Ok(());
        }
    };
    let mut m = 1u32;
    while (p as u128).pow(deg * m * r) <= 1 << 16 {
        let tf = TupleField::get(p, deg * m)?;
        let brute = brute_force_count(sys, &tf)?;
        let linear = artin_schreier::count_solutions(sys, k, &[], &tf.field)?;
        let lin = fiber_u64(&linear);
        let rational = m.is_multiple_of(geo.rationality_degree);
        let expected_geo = p.pow(geo.log_p);
        let ok = lin == Some(brute)
            && (brute == 0 || power_of(p, brute).is_some())
            && brute <= expected_geo
            && (!rational || brute == expected_geo);
        run.check(ok, || {
            format!(
                "{sys:?} over F_{p}^{}: brute force {brute}, linear algebra {lin:?}, geometric p^{}",
                deg * m,
                geo.log_p
            )
        });
        m += 1;
    }
    Ok(())
}

/// `trials` random systems of degree at most two in at most `max_r`
/// unknowns over `F_p` and `F_{p^2}`.
pub fn as_count_oracle(p: u64, max_r: usize, trials: usize, seed: u64) -> Result<OracleReport> {
    let mut run = Run::new("as-counts");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (p << 8));
    let fields = [make_field(p, 1, 0)?, make_field(p, 2, 0)?];
    for trial in 0..trials {
        let k = &fields[trial % 2];
        let r = rng.gen_range(1..=max_r);
        let sys = random_system(&mut rng, k, r)?;
        let before = run.failure_count;
        as_count_case(&mut run, &sys)?;
        if run.failure_count > before {
            let smaller = minimal_failing_system(&sys)?;
            run.failures.push(format!("minimal witness: {smaller:?}"));
        }
    }
    Ok(run.finish())
}

/// Drops terms and constants while the system still fails.
fn minimal_failing_system(sys: &AsSystem) -> Result<AsSystem> {
    let fails = |s: &AsSystem| -> bool {
        let mut probe = Run::new("probe");
        as_count_case(&mut probe, s).is_err() || probe.failure_count > 0
    };
    let mut cur = sys.clone();
    loop {
        let mut improved = false;
        let eqs = cur.equations().to_vec();
        'search: for i in 0..eqs.len() {
            for t in 0..=eqs[i].terms.len() {
                let mut e2 = eqs.clone();
                if t == eqs[i].terms.len() {
                    if e2[i].constant.is_zero() {
                        continue;
                    }
                    e2[i].constant = artin_schreier::BasePoly::zero();
                } else {
                    e2[i].terms.remove(t);
                }
                let cand = AsSystem::new(cur.base(), 0, e2)?;
                if fails(&cand) {
                    cur = cand;
                    improved = true;
                    break 'search;
                }
            }
        }
        if !improved {
            return Ok(cur);
        }
    }
}

// ---------------------------------------------------------------------------
// p-rank by three methods

fn prank_triple(run: &mut Run, c: &Crystal, label: impl Fn() -> String) -> Result<()> {
    let slope0 = match c.newton_slopes() {
        Ok(nu) => nu.multiplicity(0.into()),
        Err(e) => {
            run.fail(format!("{}: Newton polygon failed: {e}", label()));
            return Ok(());
        }
    };
    let stable = c.p_rank_stable();
    let via_fiber = artin_schreier::p_rank_via_fiber_count(c);
    run.check(via_fiber.as_ref().ok() == Some(&slope0) && stable == slope0, || {
        format!("{}: slope-0 multiplicity {slope0}, stable rank {stable}, fiber count {via_fiber:?}", label())
    });
    Ok(())
}

/// Integer coefficient vector of a residue plus `p` times a fixed lift.
fn lifted_entry(x: &FfElem, lift: &[i64], p: u64) -> Vec<i64> {
    x.coeffs.iter().zip(lift).map(|(&c, &l)| c as i64 + p as i64 * l).collect()
}

/// Exhaustive over all 2x2 matrices mod p over `F_p` and `F_{p^2}` with
/// `n` in {1, 2}, plus `random` crystals of rank up to 4.
pub fn prank_crosscheck(p: u64, s: u32, random: usize, seed: u64) -> Result<OracleReport> {
    let mut run = Run::new("prank");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (p << 16));
    for deg in 1..=2u32 {
        let k = make_field(p, deg, 0)?;
        let w = WittRing::new(&k, s)?;
        let elems = k.enumerate()?;
        let q = elems.len();
        for n in 1..=2u64 {
            let lifts: Vec<Vec<Vec<i64>>> = (0..4)
                .map(|_| (0..8).map(|_| (0..deg).map(|_| rng.gen_range(0..p.pow(s) as i64)).collect()).collect())
                .collect();
            for idx in 0..q.pow(4) {
                let abar: Vec<&FfElem> = (0..4).map(|i| &elems[idx / q.pow(i) % q]).collect();
                // the first lift giving an isogeny is the fixed lift of this matrix
                let mut done = false;
                for lift in &lifts {
                    let src = vec![
                        vec![lifted_entry(abar[0], &lift[0], p), lifted_entry(abar[1], &lift[1], p)],
                        vec![lifted_entry(abar[2], &lift[2], p), lifted_entry(abar[3], &lift[3], p)],
                    ];
                    let c = Crystal::from_ints(&w, n, src)?;
                    if c.det_valuation().is_ok() {
                        prank_triple(&mut run, &c, || format!("deg {deg}, n={n}, mod-p matrix {abar:?}"))?;
                        done = true;
                        break;
                    }
                }
                if !done {
                    run.fail(format!("deg {deg}, n={n}, {abar:?}: no isogeny among the fixed lifts"));
                }
            }
        }
    }
    for _ in 0..random {
        let deg = rng.gen_range(1..=2);
        let n = rng.gen_range(1..=2);
        let r = rng.gen_range(1..=4usize);
        let w = WittRing::new(&make_field(p, deg, 0)?, s)?;
        let hodge: Vec<u32> = (0..r).map(|_| rng.gen_range(0..=2)).collect();
        let c = Crystal::random(&w, n, &hodge, &mut rng)?;
        prank_triple(&mut run, &c, || format!("random deg {deg}, n={n}, {:?}", c.matrix()))?;
    }
    Ok(run.finish())
}

// ---------------------------------------------------------------------------
// Crystal-level checks

fn random_crystal(rng: &mut ChaCha8Rng, p: u64, max_r: usize, max_h: u32, s: u32) -> Result<Crystal> {
    let deg = rng.gen_range(1..=2);
    let n = rng.gen_range(1..=2);
    let r = rng.gen_range(1..=max_r);
    let w = WittRing::new(&make_field(p, deg, 0)?, s)?;
    let hodge: Vec<u32> = (0..r).map(|_| rng.gen_range(0..=max_h)).collect();
    Crystal::random(&w, n, &hodge, rng)
}

/// Newton polygons commute with exterior powers and iterates.
pub fn functor_oracle(count: usize, seed: u64) -> Result<OracleReport> {
    let mut run = Run::new("functor");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf0);
    for i in 0..count {
        let p = [2, 3][i % 2];
        let c = random_crystal(&mut rng, p, 4, 2, 4)?;
        let nu = c.newton_slopes()?;
        for a in 1..=c.rank() {
            let lhs = c.exterior_power(a)?.newton_slopes()?;
            let rhs = nu.exterior_power(a)?;
            run.check(lhs == rhs, || format!("{:?}: wedge {a} gives {lhs}, expected {rhs}", c.matrix()));
        }
        for q in 1..=3 {
            let lhs = c.iterate(q)?.newton_slopes()?;
            let rhs = nu.scale_iterate(q);
            run.check(lhs == rhs, || format!("{:?}: iterate {q} gives {lhs}, expected {rhs}", c.matrix()));
        }
    }
    Ok(run.finish())
}

/// `(1, b)`-break membership through the comparison polygons against the
/// slopes themselves, over every integral polygon with `r <= max_r`,
/// height `<= max_d` and `b <= max_b` meeting the preconditions.
pub fn break_locus_oracle(max_r: usize, max_d: u64, max_b: u64) -> Result<OracleReport> {
    let mut run = Run::new("break-locus");
    for r in 2..=max_r {
        for nu in newton::integral_polygons(r, max_d) {
            let d = nu.total_height();
            if d > max_d {
                continue;
            }
            let alpha: Vec<i64> = nu.slopes().iter().map(|s| s.to_integer()).collect();
            for b in 0..=max_b {
                let Ok(n1) = newton::nu1(r, b, d) else { continue };
                if !nu.lies_above(&n1)? {
                    continue;
                }
                let via = newton::t_membership_via_nu(&nu, b)?;
                let naive = alpha[0] == b as i64 && alpha[1] > b as i64;
                let direct = nu.has_break(BreakPoint::new(1, b));
                run.check(via == naive && via == direct, || {
                    format!("{nu}, b={b}: via comparison {via}, slopes {naive}, break test {direct}")
                });
            }
        }
    }
    Ok(run.finish())
}

/// Newton polygons lie above Hodge polygons with the same end point.
pub fn mazur_oracle(count: usize, seed: u64) -> Result<OracleReport> {
    let mut run = Run::new("mazur");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3a);
    for i in 0..count {
        let p = [2, 3][i % 2];
        let c = random_crystal(&mut rng, p, 4, 3, 4)?;
        let nu = c.newton_slopes()?;
        let hodge = c.hodge_polygon()?.to_polygon();
        let ok = nu.lies_above(&hodge)? && nu.total_height() == hodge.total_height();
        run.check(ok, || format!("{:?}: Newton {nu}, Hodge {hodge}", c.matrix()));
    }
    Ok(run.finish())
}

/// Cross-checks the coordinate-wise Witt backend against `Z/p^s` for
/// `p` in {2, 3} and `s <= 5`.
pub fn witt_oracle(trials: usize, seed: u64) -> Result<OracleReport> {
    let mut run = Run::new("witt");
    for p in [2, 3] {
        for s in 1..=5 {
            match witt::crosscheck_backends(p, s, trials, seed ^ (p << 4) ^ s as u64) {
                Ok(rep) => {
                    run.cases += rep.trials as u64;
                    for m in rep.mismatches {
                        run.fail(format!("p={p} s={s}: {m:?}"));
                    }
                }
                Err(e) => run.fail(format!("p={p} s={s}: {e}")),
            }
        }
    }
    Ok(run.finish())
}

/// Builds `Q^{-1} p^b diag(U, B) sigma^n(Q)` with `U` unimodular and `B`
/// divisible by `p`, splits it at `b`, and checks the summands.
pub fn splitting_oracle(count: usize, seed: u64) -> Result<OracleReport> {
    use crate::linalg;
    let mut run = Run::new("split");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5b);
    for i in 0..count {
        let p = [2u64, 3][i % 2];
        let s = if p == 2 { 24 } else { 20 };
        let deg = rng.gen_range(1..=2);
        let n = rng.gen_range(1..=2);
        let b = rng.gen_range(0..=1u32);
        let (r1, r2) = (rng.gen_range(1..=2usize), rng.gen_range(1..=2usize));
        let w = WittRing::new(&make_field(p, deg, 0)?, s)?;
        let u = Crystal::random(&w, n, &vec![0; r1], &mut rng)?;
        let hb: Vec<u32> = (0..r2).map(|_| rng.gen_range(1..=2)).collect();
        let bpart = Crystal::random(&w, n, &hb, &mut rng)?;
        let q = Crystal::random(&w, n, &vec![0; r1 + r2], &mut rng)?;
        let pb = w.p_power(b);
        let block = u.direct_sum(&bpart)?;
        let scaled: linalg::WMat =
            block.matrix().iter().map(|row| row.iter().map(|x| w.mul(x, &pb)).collect()).collect();
        let qinv = linalg::inverse(&w, q.matrix()).expect("unimodular");
        let a = linalg::mat_mul(&w, &linalg::mat_mul(&w, &qinv, &scaled), &linalg::mat_sigma(&w, q.matrix(), n));
        let c = Crystal::from_witt_matrix(&w, n, a)?;
        let label = || format!("p={p} deg={deg} n={n} b={b} ranks ({r1},{r2})");
        let (e, k) = match c.slope_splitting(b) {
            Ok(x) => x,
            Err(err) => {
                run.fail(format!("{}: {err}", label()));
                continue;
            }
        };
        let nu = c.newton_slopes()?;
        let (ne, nk) = (e.newton_slopes()?, k.newton_slopes()?);
        let constant_b = ne.rank() == r1 && ne.slopes().iter().all(|x| *x == (b as i64).into());
        let above_b = nk.rank() == r2 && nk.slopes().iter().all(|x| *x > (b as i64).into());
        run.check(constant_b && above_b && ne.direct_sum(&nk) == nu, || {
            format!("{}: summands {ne} and {nk}, whole {nu}", label())
        });
    }
    Ok(run.finish())
}

// ---------------------------------------------------------------------------
// Families

/// Semicontinuity and constant end point on every shipped family.
pub fn semicontinuity_oracle(p: u64, max_m: u32) -> Result<OracleReport> {
    let mut run = Run::new("semicontinuity");
    for f in family::shipped_families(p)? {
        let rep = family::semicontinuity_check(&f, max_m)?;
        let cofinite_ok = f.params() != 1 || rep.cofinite == Some(true);
        run.check(rep.pass && cofinite_ok, || format!("{}: {:?}", f.name(), rep.witness));
    }
    Ok(run.finish())
}

/// Boundary codimension of the ordinary locus of the one-parameter family
/// and dimension of the non-generic p-rank locus of the two-parameter
/// family, plus the purity report on every shipped family.
pub fn purity_oracle(p: u64, max_m: u32) -> Result<OracleReport> {
    let mut run = Run::new("purity");
    let opts = SweepOptions { prank: true, ..Default::default() };
    for f in family::shipped_families(p)? {
        let rep = f.sweep(max_m, &opts, DEFAULT_POINT_BUDGET)?;
        let generic = rep
            .strata
            .values()
            .filter_map(|s| match s.key {
                StratumKey::Prank { value } => Some(value),
                _ => None,
            })
            .max()
            .expect("some stratum");
        let target = StratumKey::Prank { value: generic };
        let pr = family::purity_from_sweep(&rep, &target)?;
        run.check(pr.pass, || format!("{}: {}", f.name(), pr.verdict));
        if f.name() == "legendre" {
            let codim = pr.codimension.unwrap_or(0.0);
            run.check((codim - 1.0).abs() <= DIMENSION_TOLERANCE, || format!("legendre: codimension {codim}"));
        }
        if f.name() == "two-parameter" {
            for s in rep.strata.values() {
                if s.key == target {
                    continue;
                }
                let d = family::estimate_dimension(&rep, &s.key)?;
                let want = f.params() as f64 - 1.0;
                run.check((d.value - want).abs() <= DIMENSION_TOLERANCE, || {
                    format!("two-parameter: {} has dimension {:.3}", s.key.label(), d.value)
                });
            }
        }
    }
    Ok(run.finish())
}

/// Fiber-count strata of the fiber system against p-rank strata.
pub fn fiber_strata_oracle(p: u64, max_m: u32, max_m_two_param: u32) -> Result<OracleReport> {
    let mut run = Run::new("fiber-strata");
    for f in family::shipped_families(p)? {
        let m = if f.params() > 1 { max_m_two_param } else { max_m };
        let rep = family::as_equivalence(&f, m)?;
        run.cases += rep.checked as u64;
        for w in rep.mismatches {
            run.fail(format!("{}: {w}", f.name()));
        }
    }
    Ok(run.finish())
}

// ---------------------------------------------------------------------------
// Suites

pub const SUITES: &[&str] = &[
    "exterior-breaks",
    "primitive-vectors",
    "as-counts",
    "prank",
    "semicontinuity",
    "functor",
    "break-locus",
    "mazur",
    "purity",
    "fiber-strata",
    "witt",
    "split",
];

/// Runs a named suite at the sizes used for acceptance.
pub fn run_suite(name: &str, seed: u64) -> Result<OracleReport> {
    let merge = |name: &str, parts: Vec<OracleReport>| -> OracleReport {
        let mut out =
            OracleReport { name: name.into(), cases: 0, failure_count: 0, failures: Vec::new(), elapsed_ms: 0 };
        for p in parts {
            out.cases += p.cases;
            out.failure_count += p.failure_count;
            out.elapsed_ms += p.elapsed_ms;
            out.failures.extend(p.failures);
        }
        out.failures.truncate(KEPT_FAILURES);
        out
    };
    Ok(match name {
        "exterior-breaks" => exterior_break_oracle(6, 3)?,
        "primitive-vectors" => merge(
            "primitive-vectors",
            vec![primitive_vector_oracle(2, 4, 3, 500, seed)?, primitive_vector_oracle(3, 4, 3, 500, seed)?],
        ),
        "as-counts" => merge("as-counts", vec![as_count_oracle(2, 2, 500, seed)?, as_count_oracle(3, 2, 500, seed)?]),
        "prank" => merge("prank", vec![prank_crosscheck(2, 4, 100, seed)?, prank_crosscheck(3, 4, 100, seed)?]),
        "semicontinuity" => semicontinuity_oracle(2, 8)?,
        "functor" => functor_oracle(200, seed)?,
        "break-locus" => break_locus_oracle(5, 8, 2)?,
        "mazur" => mazur_oracle(500, seed)?,
        "purity" => purity_oracle(2, 8)?,
        "fiber-strata" => merge("fiber-strata", vec![fiber_strata_oracle(2, 8, 4)?, fiber_strata_oracle(3, 4, 2)?]),
        "witt" => witt_oracle(1000, seed)?,
        "split" => splitting_oracle(100, seed)?,
        other => return Err(Error::PreconditionViolated(format!("unknown suite {other}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exterior_break_small() {
        let rep = exterior_break_oracle(3, 2).unwrap();
        assert!(rep.pass(), "{:?}", rep.failures);
        assert!(rep.cases > 0);
    }

    #[test]
    fn naive_smith_examples() {
        assert_eq!(naive_smith_exponents(2, 3, &[vec![1, 0], vec![0, 2]]), vec![0, 1]);
        assert_eq!(naive_smith_exponents(3, 2, &[vec![3, 0], vec![0, 0]]), vec![1, 2]);
        assert_eq!(naive_smith_exponents(2, 2, &[vec![2, 2], vec![2, 0]]), vec![1, 1]);
    }

    #[test]
    fn primitive_vector_small() {
        let rep = primitive_vector_oracle(2, 3, 2, 20, 1).unwrap();
        assert!(rep.pass(), "{:?}", rep.failures);
    }

    #[test]
    fn primitive_check_catches_a_bad_claim() {
        // diag(1, 4) over Z/8 needs t = 2; claiming t = 1 must fail at (0, 1)
        let mut run = Run::new("probe");
        check_primitive_images(&mut run, 2, 3, 1, &[vec![1, 0], vec![0, 4]]);
        assert_eq!(run.failure_count, 1);
        assert!(run.failures[0].contains("[0, 1]"), "{:?}", run.failures);
    }

    #[test]
    fn tuple_field_arithmetic() {
        for (p, d) in [(2, 4), (3, 3)] {
            let tf = TupleField::get(p, d).unwrap();
            let k = &tf.field;
            for a in 0..tf.q {
                for b in [1, tf.q / 2, tf.q - 1] {
                    let sum = k.add(&k.from_index(a as u128), &k.from_index(b as u128));
                    assert_eq!(tf.add(tf.pack[a], tf.pack[b]), tf.pack[k.index(&sum) as usize]);
                    let prod = k.mul(&k.from_index(b as u128), &k.frobenius(&k.from_index(a as u128), 1));
                    assert_eq!(tf.term(b, a, 1), tf.pack[k.index(&prod) as usize]);
                }
            }
        }
    }

    #[test]
    fn brute_force_examples() {
        let k = make_field(2, 1, 0).unwrap();
        let one = k.one();
        let x_eq_xp = artin_schreier::constant_system(&k, vec![(k.zero(), vec![(0, 1, one.clone())])]).unwrap();
        let tf = TupleField::get(2, 3).unwrap();
        assert_eq!(brute_force_count(&x_eq_xp, &tf).unwrap(), 2);
        let chain = artin_schreier::constant_system(
            &k,
            vec![(one.clone(), vec![(1, 1, one.clone())]), (k.zero(), vec![(0, 1, one.clone())])],
        )
        .unwrap();
        let mut run = Run::new("probe");
        as_count_case(&mut run, &chain).unwrap();
        assert!(run.failure_count == 0, "{:?}", run.failures);
    }

    #[test]
    fn as_count_small() {
        let rep = as_count_oracle(3, 2, 10, 3).unwrap();
        assert!(rep.pass(), "{:?}", rep.failures);
    }

    #[test]
    fn break_locus_small() {
        let rep = break_locus_oracle(3, 4, 1).unwrap();
        assert!(rep.pass(), "{:?}", rep.failures);
        assert!(rep.cases > 0);
    }
}
