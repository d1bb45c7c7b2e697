//! Crystals over affine space `A^k` over `F_q`, given by matrices whose
//! entries are polynomials in `t_1..t_k` with integral Witt coefficients.
//! Fibers substitute Teichmüller lifts of the point coordinates.

use crate::artin_schreier::{geometric_count, AsEquation, AsSystem, AsTerm, BasePoly};
use crate::crystal::{semilinear_stable_rank, Crystal};
use crate::field::{make_field, Embedding, FfElem, FiniteField};
use crate::linalg::{self, FqMat, WMat};
use crate::newton::{BreakPoint, NewtonPolygon, Slope};
use crate::witt::{max_precision, WittEmbedding, WittRing};
use crate::{Error, Result};
use num::integer::gcd;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Default bound on the number of points a sweep may visit.
pub const DEFAULT_POINT_BUDGET: u128 = 1 << 20;

/// Tolerance for calling a dimension estimate an integer.
pub const DIMENSION_TOLERANCE: f64 = 0.2;

/// Monomial exponents to integer coefficient vector in the power basis of
/// the base Witt ring.
pub type FamilyEntry = BTreeMap<Vec<u32>, Vec<i64>>;

#[derive(Debug, Clone)]
pub struct CrystalFamily {
    name: String,
    ring: WittRing,
    n: u64,
    params: usize,
    matrix: Vec<Vec<FamilyEntry>>,
    mod_p: Vec<Vec<BasePoly>>,
    det_valuation: u32,
}

/// A point of `A^k` with coordinates in the degree-`level` extension of the
/// base field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point {
    pub level: u32,
    pub coords: Vec<FfElem>,
}

impl Point {
    pub fn label(&self) -> String {
        let cs: Vec<String> = self
            .coords
            .iter()
            .map(|c| c.coeffs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .map(|s| format!("[{s}]"))
            .collect();
        format!("m={} t=({})", self.level, cs.join(", "))
    }
}

/// Per-level data shared by every point of a sweep.
struct Level {
    m: u32,
    field: FiniteField,
    emb: Embedding,
    det_ring: WittRing,
    det_emb: WittEmbedding,
    newton: Option<(WittRing, WittEmbedding)>,
}

impl CrystalFamily {
    /// `det_valuation` defaults to the valuation at the origin.
    pub fn new(
        name: &str,
        ring: &WittRing,
        n: u64,
        params: usize,
        matrix: Vec<Vec<FamilyEntry>>,
        det_valuation: Option<u32>,
    ) -> Result<Self> {
        let r = linalg::check_square(&matrix)?;
        if n == 0 {
            return Err(Error::Shape("Frobenius twist n must be positive".into()));
        }
        let k = ring.field();
        let deg = ring.deg() as usize;
        let mut mod_p = Vec::with_capacity(r);
        for (i, row) in matrix.iter().enumerate() {
            let mut prow = Vec::with_capacity(r);
            for (j, e) in row.iter().enumerate() {
                let mut poly = BasePoly::zero();
                for (mono, c) in e {
                    if mono.len() != params {
                        return Err(Error::Shape(format!(
                            "entry ({i},{j}): monomial has {} exponents, expected {params}",
                            mono.len()
                        )));
                    }
                    if c.len() != deg {
                        return Err(Error::Shape(format!(
                            "entry ({i},{j}): coefficient has {} components, expected {deg}",
                            c.len()
                        )));
                    }
                    let res = FfElem::new(c.iter().map(|&x| x.rem_euclid(k.p() as i64) as u64).collect());
                    if !k.is_zero(&res) {
                        poly.terms.insert(mono.clone(), res);
                    }
                }
                prow.push(poly);
            }
            mod_p.push(prow);
        }
        let mut fam =
            CrystalFamily { name: name.to_string(), ring: ring.clone(), n, params, matrix, mod_p, det_valuation: 0 };
        fam.det_valuation = match det_valuation {
            Some(d) => d,
            None => {
                let origin = Point { level: 1, coords: vec![k.zero(); params] };
                let w = ring.clone();
                let emb = WittEmbedding::new(&w, &w)?;
                let d = linalg::det(&w, &fam.eval_witt(&w, &emb, &origin.coords)?);
                w.valuation(&d).finite().ok_or_else(|| Error::NotIsogenyAtPoint {
                    point: origin.label(),
                    found: None,
                    expected: 0,
                })?
            }
        };
        if fam.det_valuation + 1 > max_precision(k.p()) {
            return Err(Error::PrecisionTooLarge { p: k.p(), s: fam.det_valuation + 1 });
        }
        Ok(fam)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ring(&self) -> &WittRing {
        &self.ring
    }

    pub fn base_field(&self) -> &FiniteField {
        self.ring.field()
    }

    pub fn p(&self) -> u64 {
        self.ring.p()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn params(&self) -> usize {
        self.params
    }

    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    pub fn det_valuation(&self) -> u32 {
        self.det_valuation
    }

    pub fn entries(&self) -> &[Vec<FamilyEntry>] {
        &self.matrix
    }

    /// Base field cardinality `q`.
    pub fn q(&self) -> u64 {
        self.p().pow(self.ring.deg())
    }

    /// The degree-`m` extension of the base field; the base field itself for `m = 1`.
    pub fn level_field(&self, m: u32) -> Result<FiniteField> {
        if m == 0 {
            return Err(Error::Shape("extension degree must be positive".into()));
        }
        if m == 1 {
            return Ok(self.base_field().clone());
        }
        make_field(self.p(), self.ring.deg() * m, 0)
    }

    fn eval_witt(&self, w: &WittRing, emb: &WittEmbedding, coords: &[FfElem]) -> Result<WMat> {
        let base = &emb.source;
        let teich = coords.iter().map(|c| w.teichmuller(c)).collect::<Result<Vec<_>>>()?;
        let modulus = base.modulus() as i64;
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .map(|entry| {
                        let mut acc = w.zero();
                        for (mono, c) in entry {
                            let coeff = base.elem(c.iter().map(|&x| x.rem_euclid(modulus) as u64).collect())?;
                            let mut t = emb.embed(&coeff)?;
                            for (x, &e) in teich.iter().zip(mono) {
                                t = w.mul(&t, &w.pow(x, e as u128));
                            }
                            acc = w.add(&acc, &t);
                        }
                        Ok(acc)
                    })
                    .collect()
            })
            .collect()
    }

    /// Precision at which the Newton polygon of a fiber over a field of
    /// absolute degree `abs_deg` is certified.
    fn newton_precision(&self, abs_deg: u32) -> Result<u32> {
        let abs = abs_deg as u64;
        let e = abs / gcd(self.n, abs);
        let need = e * self.det_valuation as u64 + 1;
        let cap = max_precision(self.p()) as u64;
        if need > cap {
            return Err(Error::PrecisionTooLarge { p: self.p(), s: need.min(u32::MAX as u64) as u32 });
        }
        Ok((need as u32).max(self.ring.s()))
    }

    fn level(&self, field: &FiniteField, m: u32, with_newton: bool) -> Result<Level> {
        let emb = Embedding::new(self.base_field(), field)?;
        let ds = self.det_valuation + 1;
        let det_ring = WittRing::new(field, ds)?;
        let det_emb = WittEmbedding::new(&self.ring.with_precision(ds)?, &det_ring)?;
        let newton = if with_newton {
            let s = self.newton_precision(field.deg())?;
            let w = WittRing::new(field, s)?;
            let e = WittEmbedding::new(&self.ring.with_precision(s)?, &w)?;
            Some((w, e))
        } else {
            None
        };
        Ok(Level { m, field: field.clone(), emb, det_ring, det_emb, newton })
    }

    fn check_coords(&self, field: &FiniteField, coords: &[FfElem]) -> Result<()> {
        if coords.len() != self.params {
            return Err(Error::Shape(format!("point has {} coordinates, expected {}", coords.len(), self.params)));
        }
        if coords.iter().any(|c| !field.contains(c)) {
            return Err(Error::ForeignElement);
        }
        Ok(())
    }

    fn check_det(&self, lv: &Level, point: &Point) -> Result<()> {
        let a = self.eval_witt(&lv.det_ring, &lv.det_emb, &point.coords)?;
        let v = lv.det_ring.valuation(&linalg::det(&lv.det_ring, &a)).finite();
        if v != Some(self.det_valuation) {
            return Err(Error::NotIsogenyAtPoint { point: point.label(), found: v, expected: self.det_valuation });
        }
        Ok(())
    }

    /// The fiber at a point with coordinates in `field`, at a precision
    /// that certifies its Newton polygon.
    pub fn fiber(&self, field: &FiniteField, coords: &[FfElem]) -> Result<Crystal> {
        self.check_coords(field, coords)?;
        let m = field.deg() / self.ring.deg();
        let lv = self.level(field, m, true)?;
        let point = Point { level: m, coords: coords.to_vec() };
        self.check_det(&lv, &point)?;
        let (w, emb) = lv.newton.as_ref().expect("newton level");
        Crystal::from_witt_matrix(w, self.n, self.eval_witt(w, emb, coords)?)
    }

    /// The fiber reduced mod p.
    pub fn fiber_mod_p(&self, field: &FiniteField, coords: &[FfElem]) -> Result<FqMat> {
        self.check_coords(field, coords)?;
        let emb = Embedding::new(self.base_field(), field)?;
        self.eval_mod_p(&emb, coords)
    }

    fn eval_mod_p(&self, emb: &Embedding, coords: &[FfElem]) -> Result<FqMat> {
        self.mod_p.iter().map(|row| row.iter().map(|e| e.eval(emb, coords)).collect()).collect()
    }

    /// The fiber system over the parameter ring:
    /// `x_i = sum_j Abar_{ij}(t) x_j^{p^n}`.
    pub fn fiber_system(&self) -> Result<AsSystem> {
        let n = u32::try_from(self.n).map_err(|_| Error::Shape("twist too large".into()))?;
        let equations = self
            .mod_p
            .iter()
            .map(|row| AsEquation {
                constant: BasePoly::zero(),
                terms: row
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(j, c)| AsTerm { var: j, exp: n, coeff: c.clone() })
                    .collect(),
            })
            .collect();
        AsSystem::new(self.base_field(), self.params, equations)
    }
}

// ---------------------------------------------------------------------------
// Sweeps

/// Which invariants a sweep computes at every point.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SweepOptions {
    pub newton: bool,
    pub prank: bool,
    pub breaks: Vec<BreakPoint>,
    pub as_count: bool,
}

impl SweepOptions {
    pub fn all() -> Self {
        SweepOptions { newton: true, prank: true, breaks: Vec::new(), as_count: true }
    }

    fn needs_newton(&self) -> bool {
        self.newton || !self.breaks.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointRecord {
    pub point: Point,
    pub newton: Option<NewtonPolygon>,
    pub prank: Option<usize>,
    /// `log_p` of the geometric fiber count.
    pub as_log: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StratumKey {
    Newton {
        polygon: NewtonPolygon,
    },
    Prank {
        value: usize,
    },
    /// Points whose Newton polygon has the given break point.
    Break {
        point: BreakPoint,
    },
    /// Points whose fiber has `p^log_p` geometric points.
    AsCount {
        log_p: u32,
    },
}

impl StratumKey {
    pub fn label(&self) -> String {
        match self {
            StratumKey::Newton { polygon } => format!("newton:{polygon}"),
            StratumKey::Prank { value } => format!("prank:{value}"),
            StratumKey::Break { point } => format!("break:{},{}", point.a, point.b),
            StratumKey::AsCount { log_p } => format!("as:{log_p}"),
        }
    }

    fn contains(&self, rec: &PointRecord) -> bool {
        match self {
            StratumKey::Newton { polygon } => rec.newton.as_ref() == Some(polygon),
            StratumKey::Prank { value } => rec.prank == Some(*value),
            StratumKey::Break { point } => rec.newton.as_ref().is_some_and(|nu| nu.has_break(*point)),
            StratumKey::AsCount { log_p } => rec.as_log == Some(*log_p),
        }
    }

    /// Membership in the closed set containing the closure of the stratum,
    /// read off from the specialization order: Newton polygons only rise,
    /// p-rank and fiber counts only drop.
    fn closure_contains(&self, rec: &PointRecord) -> bool {
        match self {
            StratumKey::Newton { polygon } => {
                rec.newton.as_ref().is_some_and(|nu| nu.lies_above(polygon).unwrap_or(false))
            }
            StratumKey::Prank { value } => rec.prank.is_some_and(|v| v <= *value),
            StratumKey::Break { point } => {
                rec.newton.as_ref().is_some_and(|nu| nu.value_at(point.a) >= Slope::from_integer(point.b as i64))
            }
            StratumKey::AsCount { log_p } => rec.as_log.is_some_and(|v| v <= *log_p),
        }
    }
}

/// Accepts the labels produced by [`StratumKey::label`]; a Newton polygon may
/// also be written without braces, e.g. `newton:1/2,1/2`.
impl std::str::FromStr for StratumKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::PreconditionViolated(format!("cannot parse stratum key {s:?}"));
        let (kind, value) = s.trim().split_once(':').ok_or_else(bad)?;
        let value = value.trim();
        match kind.trim() {
            "newton" => {
                let inner = value.trim_start_matches('{').trim_end_matches('}');
                let slopes: Vec<&str> = inner.split(',').collect();
                Ok(StratumKey::Newton { polygon: NewtonPolygon::parse(&slopes)? })
            }
            "prank" => Ok(StratumKey::Prank { value: value.parse().map_err(|_| bad())? }),
            "as" => Ok(StratumKey::AsCount { log_p: value.parse().map_err(|_| bad())? }),
            "break" => {
                let (a, b) = value.split_once(',').ok_or_else(bad)?;
                let a = a.trim().parse().map_err(|_| bad())?;
                let b = b.trim().parse().map_err(|_| bad())?;
                Ok(StratumKey::Break { point: BreakPoint::new(a, b) })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub nearest: i64,
    pub confident: bool,
    /// The two extension degrees the estimate was taken from.
    pub levels: (u32, u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub key: StratumKey,
    /// Extension degree to number of rational points.
    pub counts: BTreeMap<u32, u64>,
    pub dimension: Option<DimensionEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrataReport {
    pub family: String,
    pub p: u64,
    pub q: u64,
    pub params: usize,
    pub max_m: u32,
    pub det_valuation: u32,
    pub points_per_level: BTreeMap<u32, u64>,
    pub strata: BTreeMap<String, Stratum>,
    pub flags: Vec<String>,
    #[serde(skip)]
    pub records: Vec<PointRecord>,
}

/// Number of points of `A^k(F_{q^m})` for `m = 1..=max_m`.
pub fn sweep_size(q: u64, params: usize, max_m: u32) -> u128 {
    (1..=max_m)
        .map(|m| (q as u128).checked_pow(m * params as u32).unwrap_or(u128::MAX))
        .fold(0u128, |a, b| a.saturating_add(b))
}

fn point_from_index(elems: &[FfElem], params: usize, mut idx: usize) -> Vec<FfElem> {
    let n = elems.len();
    let mut coords = Vec::with_capacity(params);
    for _ in 0..params {
        coords.push(elems[idx % n].clone());
        idx /= n;
    }
    coords
}

impl CrystalFamily {
    fn record(
        &self,
        lv: &Level,
        via_fiber: Option<&AsSystem>,
        opts: &SweepOptions,
        coords: Vec<FfElem>,
    ) -> Result<PointRecord> {
        let point = Point { level: lv.m, coords };
        self.check_det(lv, &point)?;
        let newton = match &lv.newton {
            Some((w, emb)) => {
                let c = Crystal::from_witt_matrix(w, self.n, self.eval_witt(w, emb, &point.coords)?)?;
                Some(c.newton_slopes_fixed()?)
            }
            None => None,
        };
        let prank = if opts.prank {
            let abar = self.eval_mod_p(&lv.emb, &point.coords)?;
            Some(semilinear_stable_rank(&lv.field, &abar, self.n))
        } else {
            None
        };
        let as_log = match via_fiber {
            Some(sys) => Some(geometric_count(sys, &lv.field, &point.coords)?.log_p),
            None => None,
        };
        Ok(PointRecord { point, newton, prank, as_log })
    }

    /// Computes the requested invariants at every point of `A^k(F_{q^m})`,
    /// `m = 1..=max_m`, and buckets the points into strata.
    pub fn sweep(&self, max_m: u32, opts: &SweepOptions, budget: u128) -> Result<StrataReport> {
        let total = sweep_size(self.q(), self.params, max_m);
        if total > budget {
            return Err(Error::BudgetExceeded { points: total, budget });
        }
        let via_fiber = if opts.as_count { Some(self.fiber_system()?) } else { None };
        let mut records = Vec::new();
        let mut points_per_level = BTreeMap::new();
        for m in 1..=max_m {
            let field = self.level_field(m)?;
            let lv = self.level(&field, m, opts.needs_newton())?;
            let elems = field.enumerate()?;
            let count = elems.len().pow(self.params as u32);
            let level_records = (0..count)
                .into_par_iter()
                .map(|idx| self.record(&lv, via_fiber.as_ref(), opts, point_from_index(&elems, self.params, idx)))
                .collect::<Result<Vec<_>>>()?;
            points_per_level.insert(m, count as u64);
            records.extend(level_records);
        }
        let mut keys: Vec<StratumKey> = Vec::new();
        for rec in &records {
            if let Some(nu) = &rec.newton {
                if opts.newton {
                    keys.push(StratumKey::Newton { polygon: nu.clone() });
                }
            }
            if let Some(v) = rec.prank {
                keys.push(StratumKey::Prank { value: v });
            }
            if let Some(l) = rec.as_log {
                keys.push(StratumKey::AsCount { log_p: l });
            }
        }
        keys.extend(opts.breaks.iter().map(|&point| StratumKey::Break { point }));
        keys.sort();
        keys.dedup();
        let mut report = StrataReport {
            family: self.name.clone(),
            p: self.p(),
            q: self.q(),
            params: self.params,
            max_m,
            det_valuation: self.det_valuation,
            points_per_level,
            strata: BTreeMap::new(),
            flags: Vec::new(),
            records,
        };
        for key in keys {
            let counts = report.count_where(|r| key.contains(r));
            let mut stratum = Stratum { key: key.clone(), counts, dimension: None };
            match estimate_counts(report.q, &stratum.counts) {
                Ok(d) => {
                    if !d.confident {
                        report.flags.push(format!("inconclusive dimension for {}", key.label()));
                    }
                    stratum.dimension = Some(d);
                }
                Err(_) => report.flags.push(format!("too few levels to estimate the dimension of {}", key.label())),
            }
            report.strata.insert(key.label(), stratum);
        }
        Ok(report)
    }
}

impl StrataReport {
    /// Points per extension degree satisfying `pred`, with zero entries kept.
    pub fn count_where(&self, pred: impl Fn(&PointRecord) -> bool) -> BTreeMap<u32, u64> {
        let mut counts: BTreeMap<u32, u64> = self.points_per_level.keys().map(|&m| (m, 0)).collect();
        for r in self.records.iter().filter(|r| pred(r)) {
            *counts.entry(r.point.level).or_default() += 1;
        }
        counts
    }

    pub fn stratum(&self, key: &StratumKey) -> Option<&Stratum> {
        self.strata.get(&key.label())
    }

    /// Checks that the strata of each kind partition the points and that
    /// every break-point stratum is the union of the Newton strata whose
    /// polygon has that break point.
    pub fn check_partition(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for rec in &self.records {
            for (kind, present) in
                [("newton", rec.newton.is_some()), ("prank", rec.prank.is_some()), ("as", rec.as_log.is_some())]
            {
                if !present {
                    continue;
                }
                let hits = self
                    .strata
                    .values()
                    .filter(|s| s.key.label().starts_with(&format!("{kind}:")) && s.key.contains(rec))
                    .count();
                if hits != 1 {
                    problems.push(format!("{} lies in {hits} {kind} strata", rec.point.label()));
                }
            }
        }
        for s in self.strata.values() {
            if let StratumKey::Break { point } = s.key {
                let union: u64 = self
                    .strata
                    .values()
                    .filter_map(|t| match &t.key {
                        StratumKey::Newton { polygon } if polygon.has_break(point) => {
                            Some(t.counts.values().sum::<u64>())
                        }
                        _ => None,
                    })
                    .sum();
                let direct: u64 = s.counts.values().sum();
                if self.records.iter().all(|r| r.newton.is_some()) && union != direct {
                    problems.push(format!("{} has {direct} points, Newton strata give {union}", s.key.label()));
                }
            }
        }
        problems
    }
}

fn estimate_counts(q: u64, counts: &BTreeMap<u32, u64>) -> Result<DimensionEstimate> {
    let nonzero: Vec<(u32, u64)> = counts.iter().filter(|(_, &c)| c > 0).map(|(&m, &c)| (m, c)).collect();
    if nonzero.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "stratum is nonempty at {} extension degree(s); two are needed",
            nonzero.len()
        )));
    }
    let (m1, n1) = nonzero[nonzero.len() - 2];
    let (m2, n2) = nonzero[nonzero.len() - 1];
    let value = ((n2 as f64) / (n1 as f64)).ln() / (q as f64).ln() / (m2 - m1) as f64;
    let nearest = value.round() as i64;
    Ok(DimensionEstimate {
        value,
        nearest,
        confident: (value - nearest as f64).abs() <= DIMENSION_TOLERANCE,
        levels: (m1, m2),
    })
}

/// `log_q(N_{m2} / N_{m1}) / (m2 - m1)` over the two largest extension
/// degrees at which the stratum has points.
pub fn estimate_dimension(report: &StrataReport, key: &StratumKey) -> Result<DimensionEstimate> {
    let counts = match report.stratum(key) {
        Some(s) => s.counts.clone(),
        None => report.count_where(|r| key.contains(r)),
    };
    estimate_counts(report.q, &counts)
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub family: String,
    pub target: String,
    pub target_counts: BTreeMap<u32, u64>,
    pub closure_counts: BTreeMap<u32, u64>,
    pub boundary_counts: BTreeMap<u32, u64>,
    pub closure_dimension: Option<DimensionEstimate>,
    pub boundary_dimension: Option<DimensionEstimate>,
    pub codimension: Option<f64>,
    pub pass: bool,
    pub verdict: String,
}

/// Boundary of a stratum inside its closure, with the closure read off
/// from the specialization order. Passes when the boundary is empty or has
/// estimated codimension within tolerance of one.
pub fn purity_from_sweep(report: &StrataReport, target: &StratumKey) -> Result<PurityReport> {
    let target_counts = report.count_where(|r| target.contains(r));
    if target_counts.values().all(|&c| c == 0) {
        return Err(Error::InsufficientData(format!("stratum {} is empty", target.label())));
    }
    let closure_counts = report.count_where(|r| target.closure_contains(r));
    let boundary_counts = report.count_where(|r| target.closure_contains(r) && !target.contains(r));
    let closure_dimension = estimate_counts(report.q, &closure_counts).ok();
    let boundary_empty = boundary_counts.values().all(|&c| c == 0);
    let (boundary_dimension, codimension, pass, verdict) = if boundary_empty {
        (None, None, true, "boundary empty".to_string())
    } else {
        let cd = closure_dimension
            .clone()
            .ok_or_else(|| Error::InsufficientData(format!("closure of {} has too few levels", target.label())))?;
        let bd = estimate_counts(report.q, &boundary_counts)?;
        let codim = cd.value - bd.value;
        let pass = (codim - 1.0).abs() <= DIMENSION_TOLERANCE;
        let verdict = format!("boundary codimension {codim:.3}");
        (Some(bd), Some(codim), pass, verdict)
    };
    Ok(PurityReport {
        family: report.family.clone(),
        target: target.label(),
        target_counts,
        closure_counts,
        boundary_counts,
        closure_dimension,
        boundary_dimension,
        codimension,
        pass,
        verdict,
    })
}

fn options_for(key: &StratumKey) -> SweepOptions {
    match key {
        StratumKey::Newton { .. } => SweepOptions { newton: true, ..Default::default() },
        StratumKey::Prank { .. } => SweepOptions { prank: true, ..Default::default() },
        StratumKey::Break { point } => SweepOptions { breaks: vec![*point], ..Default::default() },
        StratumKey::AsCount { .. } => SweepOptions { as_count: true, ..Default::default() },
    }
}

pub fn purity_report(f: &CrystalFamily, target: &StratumKey, max_m: u32) -> Result<PurityReport> {
    let report = f.sweep(max_m, &options_for(target), DEFAULT_POINT_BUDGET)?;
    purity_from_sweep(&report, target)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemicontinuityReport {
    pub family: String,
    pub generic: Option<NewtonPolygon>,
    pub det_valuation: u32,
    /// Points per level whose polygon is not the generic one.
    pub exceptions: BTreeMap<u32, u64>,
    /// Whether the exceptional locus looks finite; only assessed for `k = 1`.
    pub cofinite: Option<bool>,
    pub pass: bool,
    pub witness: Option<String>,
}

/// Checks that one polygon lies below every sampled polygon, that it is
/// attained away from a finite set when `k = 1`, and that the end point of
/// the polygons is constant.
pub fn semicontinuity_check(f: &CrystalFamily, max_m: u32) -> Result<SemicontinuityReport> {
    let opts = SweepOptions { newton: true, ..Default::default() };
    let report = f.sweep(max_m, &opts, DEFAULT_POINT_BUDGET)?;
    Ok(semicontinuity_from_sweep(f, &report))
}

pub fn semicontinuity_from_sweep(f: &CrystalFamily, report: &StrataReport) -> SemicontinuityReport {
    let mut out = SemicontinuityReport {
        family: f.name.clone(),
        generic: None,
        det_valuation: f.det_valuation,
        exceptions: BTreeMap::new(),
        cofinite: None,
        pass: false,
        witness: None,
    };
    let polys: Vec<&NewtonPolygon> = report
        .strata
        .values()
        .filter_map(|s| match &s.key {
            StratumKey::Newton { polygon } => Some(polygon),
            _ => None,
        })
        .collect();
    if let Some(rec) =
        report.records.iter().find(|r| r.newton.as_ref().is_some_and(|nu| nu.total_height() != f.det_valuation as u64))
    {
        out.witness = Some(format!("{}: end point moved", rec.point.label()));
        return out;
    }
    let generic = polys.iter().find(|g| polys.iter().all(|nu| nu.lies_above(g).unwrap_or(false))).map(|g| (*g).clone());
    let Some(generic) = generic else {
        let rec = report.records.iter().find(|r| r.newton.is_some());
        out.witness = rec.map(|r| format!("{}: no polygon lies below all others", r.point.label()));
        return out;
    };
    out.exceptions = report.count_where(|r| r.newton.as_ref() != Some(&generic));
    if f.params == 1 {
        let top = *report.points_per_level.keys().max().unwrap_or(&0);
        let exc_top = out.exceptions.get(&top).copied().unwrap_or(0);
        let pts_top = report.points_per_level.get(&top).copied().unwrap_or(0);
        let finite = match estimate_counts(report.q, &out.exceptions) {
            Ok(d) => d.confident && d.nearest == 0,
            Err(_) => true,
        };
        let cofinite = finite && 2 * exc_top < pts_top.max(1);
        out.cofinite = Some(cofinite);
        if !cofinite {
            out.witness = Some(format!("{exc_top} of {pts_top} points at level {top} are not generic"));
            out.generic = Some(generic);
            return out;
        }
    }
    out.generic = Some(generic);
    out.pass = true;
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub family: String,
    pub polygon: NewtonPolygon,
    pub checked: usize,
    pub stratum_counts: BTreeMap<u32, u64>,
    pub mismatches: Vec<String>,
    pub pass: bool,
}

/// Pointwise check of `x in S_nu <=> nu_x above nu and nu_x passes through
/// every break point of nu`.
pub fn strata_intersection_snu(f: &CrystalFamily, nu: &NewtonPolygon, max_m: u32) -> Result<IntersectionReport> {
    if nu.rank() != f.rank() {
        return Err(Error::RankMismatch(nu.rank(), f.rank()));
    }
    let opts = SweepOptions { newton: true, ..Default::default() };
    let report = f.sweep(max_m, &opts, DEFAULT_POINT_BUDGET)?;
    let breaks = nu.break_points();
    let mut mismatches = Vec::new();
    for rec in &report.records {
        let nx = rec.newton.as_ref().expect("newton sweep");
        let lhs = nx == nu;
        let rhs = nx.lies_above(nu)? && breaks.iter().all(|&bp| nx.has_break(bp));
        if lhs != rhs {
            mismatches.push(format!("{}: S_nu {lhs}, intersection {rhs}", rec.point.label()));
        }
    }
    Ok(IntersectionReport {
        family: f.name.clone(),
        polygon: nu.clone(),
        checked: report.records.len(),
        stratum_counts: report.count_where(|r| r.newton.as_ref() == Some(nu)),
        pass: mismatches.is_empty(),
        mismatches,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsEquivalenceReport {
    pub family: String,
    pub checked: usize,
    /// p-rank of the stratum with the most points at the top level.
    pub generic_prank: usize,
    /// `log_p` of the fiber count on that stratum.
    pub generic_log_mu: u32,
    pub mismatches: Vec<String>,
    pub pass: bool,
}

/// The fiber-count strata of the fiber system against the p-rank strata:
/// `log_p mu(x) = n * prank(x)` at every point, and the dense stratum has
/// `log_p mu_1 = m n` for the generic p-rank `m`.
pub fn as_equivalence(f: &CrystalFamily, max_m: u32) -> Result<AsEquivalenceReport> {
    let opts = SweepOptions { prank: true, as_count: true, ..Default::default() };
    let report = f.sweep(max_m, &opts, DEFAULT_POINT_BUDGET)?;
    let n = f.n as u32;
    let mut mismatches = Vec::new();
    for rec in &report.records {
        let (pr, mu) = (rec.prank.expect("prank"), rec.as_log.expect("as count"));
        if mu != n * pr as u32 {
            mismatches.push(format!("{}: fiber count p^{mu}, p-rank {pr}", rec.point.label()));
        }
    }
    let top = max_m;
    let dense = |pred: &dyn Fn(&PointRecord) -> Option<u64>| -> u64 {
        let mut tally: BTreeMap<u64, u64> = BTreeMap::new();
        for r in report.records.iter().filter(|r| r.point.level == top) {
            if let Some(v) = pred(r) {
                *tally.entry(v).or_default() += 1;
            }
        }
        tally.into_iter().max_by_key(|&(v, c)| (c, v)).map(|(v, _)| v).unwrap_or(0)
    };
    let generic_prank = dense(&|r| r.prank.map(|v| v as u64)) as usize;
    let generic_log_mu = dense(&|r| r.as_log.map(|v| v as u64)) as u32;
    if generic_log_mu != n * generic_prank as u32 {
        mismatches.push(format!("dense stratum has mu = p^{generic_log_mu}, expected p^{}", n * generic_prank as u32));
    }
    Ok(AsEquivalenceReport {
        family: f.name.clone(),
        checked: report.records.len(),
        generic_prank,
        generic_log_mu,
        pass: mismatches.is_empty(),
        mismatches,
    })
}

// ---------------------------------------------------------------------------
// Shipped families

/// Builds an entry from `(monomial, integer)` pairs over `F_p`-constants.
pub fn int_entry(deg: usize, terms: &[(&[u32], i64)]) -> FamilyEntry {
    let mut e = FamilyEntry::new();
    for (mono, c) in terms {
        let mut v = vec![0i64; deg];
        v[0] = *c;
        let slot = e.entry(mono.to_vec()).or_insert_with(|| vec![0; deg]);
        for (a, b) in slot.iter_mut().zip(&v) {
            *a += b;
        }
    }
    e.retain(|_, v| v.iter().any(|&x| x != 0));
    e
}

fn witt_fp(p: u64) -> Result<WittRing> {
    WittRing::new(&make_field(p, 1, 0)?, 2)
}

/// `[[t, 1], [p, 0]]`: ordinary away from `t = 0`, supersingular at `t = 0`.
pub fn legendre_family(p: u64) -> Result<CrystalFamily> {
    let w = witt_fp(p)?;
    let pi = p as i64;
    let m = vec![
        vec![int_entry(1, &[(&[1], 1)]), int_entry(1, &[(&[0], 1)])],
        vec![int_entry(1, &[(&[0], pi)]), int_entry(1, &[])],
    ];
    CrystalFamily::new("legendre", &w, 1, 1, m, Some(1))
}

/// `[[t u, 1 + p u], [p, 0]]` over `A^2`: determinant `-p (1 + p u)` has
/// constant valuation; the p-rank drops on the curve `t u = 0`.
pub fn two_parameter_family(p: u64) -> Result<CrystalFamily> {
    let w = witt_fp(p)?;
    let pi = p as i64;
    let m = vec![
        vec![int_entry(1, &[(&[1, 1], 1)]), int_entry(1, &[(&[0, 0], 1), (&[0, 1], pi)])],
        vec![int_entry(1, &[(&[0, 0], pi)]), int_entry(1, &[])],
    ];
    CrystalFamily::new("two-parameter", &w, 1, 2, m, Some(1))
}

/// `[[t, 1, 0], [0, 0, 1], [p, 0, 0]]`: slopes `{0, 1/2, 1/2}` generically,
/// `{1/3, 1/3, 1/3}` at `t = 0`.
pub fn rank_three_family(p: u64) -> Result<CrystalFamily> {
    let w = witt_fp(p)?;
    let pi = p as i64;
    let z = || int_entry(1, &[]);
    let one = || int_entry(1, &[(&[0], 1)]);
    let m = vec![
        vec![int_entry(1, &[(&[1], 1)]), one(), z()],
        vec![z(), z(), one()],
        vec![int_entry(1, &[(&[0], pi)]), z(), z()],
    ];
    CrystalFamily::new("rank-three", &w, 1, 1, m, Some(1))
}

fn constant_family(name: &str, p: u64, m: &[Vec<i64>]) -> Result<CrystalFamily> {
    let w = witt_fp(p)?;
    let mat = m.iter().map(|row| row.iter().map(|&c| int_entry(1, &[(&[0], c)])).collect()).collect();
    CrystalFamily::new(name, &w, 1, 1, mat, None)
}

pub fn constant_ordinary_family(p: u64) -> Result<CrystalFamily> {
    constant_family("constant-ordinary", p, &[vec![1, 0], vec![0, p as i64]])
}

pub fn constant_supersingular_family(p: u64) -> Result<CrystalFamily> {
    constant_family("constant-supersingular", p, &[vec![0, p as i64], vec![1, 0]])
}

/// The rank-one family `(p^b)`.
pub fn slope_line_family(p: u64, b: u32) -> Result<CrystalFamily> {
    constant_family("slope-line", p, &[vec![(p as i64).pow(b)]])
}

/// Every validated family shipped with the library, over `F_p`.
pub fn shipped_families(p: u64) -> Result<Vec<CrystalFamily>> {
    Ok(vec![
        legendre_family(p)?,
        two_parameter_family(p)?,
        rank_three_family(p)?,
        constant_ordinary_family(p)?,
        constant_supersingular_family(p)?,
        slope_line_family(p, 1)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slopes(v: &[&str]) -> NewtonPolygon {
        NewtonPolygon::parse(v).unwrap()
    }

    #[test]
    fn legendre_fibers() {
        let f = legendre_family(2).unwrap();
        let k = f.base_field().clone();
        let c1 = f.fiber(&k, &[k.one()]).unwrap();
        assert_eq!(c1.newton_slopes().unwrap(), slopes(&["0", "1"]));
        let c0 = f.fiber(&k, &[k.zero()]).unwrap();
        assert_eq!(c0.newton_slopes().unwrap(), slopes(&["1/2", "1/2"]));
    }

    #[test]
    fn constant_family_fibers_are_constant() {
        let f = constant_ordinary_family(3).unwrap();
        let l = f.level_field(2).unwrap();
        for x in l.enumerate().unwrap() {
            let c = f.fiber(&l, &[x]).unwrap();
            assert_eq!(c.newton_slopes().unwrap(), slopes(&["0", "1"]));
        }
    }

    #[test]
    fn invalid_family_is_rejected() {
        let w = witt_fp(2).unwrap();
        let m = vec![vec![int_entry(1, &[(&[1], 1)])]];
        let f = CrystalFamily::new("bad", &w, 1, 1, m.clone(), Some(0)).unwrap();
        let err = f.sweep(2, &SweepOptions::all(), DEFAULT_POINT_BUDGET).unwrap_err();
        assert!(matches!(err, Error::NotIsogenyAtPoint { found: None, expected: 0, .. }));
        assert!(CrystalFamily::new("bad", &w, 1, 1, m, None).is_err());
    }

    #[test]
    fn legendre_sweep_strata() {
        let f = legendre_family(2).unwrap();
        let r = f.sweep(2, &SweepOptions::all(), DEFAULT_POINT_BUDGET).unwrap();
        let ord = &r.strata["newton:{0,1}"].counts;
        let ss = &r.strata["newton:{1/2,1/2}"].counts;
        assert_eq!(ord[&1], 1);
        assert_eq!(ord[&2], 3);
        assert_eq!(ss[&1], 1);
        assert_eq!(ss[&2], 1);
        assert!(r.check_partition().is_empty());
    }

    #[test]
    fn budget_is_enforced() {
        let f = two_parameter_family(2).unwrap();
        assert!(matches!(
            f.sweep(12, &SweepOptions::default(), DEFAULT_POINT_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn single_strata_families() {
        let f = slope_line_family(2, 1).unwrap();
        let r = f.sweep(3, &SweepOptions::all(), DEFAULT_POINT_BUDGET).unwrap();
        let newton: Vec<_> = r.strata.keys().filter(|k| k.starts_with("newton")).collect();
        assert_eq!(newton, vec!["newton:{1}"]);
    }

    #[test]
    fn dimension_estimates() {
        let f = legendre_family(2).unwrap();
        let r = f.sweep(6, &SweepOptions { newton: true, ..Default::default() }, DEFAULT_POINT_BUDGET).unwrap();
        let open = estimate_dimension(&r, &StratumKey::Newton { polygon: slopes(&["0", "1"]) }).unwrap();
        assert!(open.confident && open.nearest == 1);
        let pt = estimate_dimension(&r, &StratumKey::Newton { polygon: slopes(&["1/2", "1/2"]) }).unwrap();
        assert!(pt.confident && pt.nearest == 0);
        let empty = StratumKey::Newton { polygon: slopes(&["1", "1"]) };
        assert!(matches!(estimate_dimension(&r, &empty), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn purity_and_semicontinuity() {
        let f = legendre_family(2).unwrap();
        let pr = purity_report(&f, &StratumKey::Prank { value: 1 }, 6).unwrap();
        assert!(pr.pass, "{pr:?}");
        let c = constant_ordinary_family(2).unwrap();
        let pc = purity_report(&c, &StratumKey::Prank { value: 1 }, 3).unwrap();
        assert!(pc.pass && pc.codimension.is_none());
        let sc = semicontinuity_check(&f, 5).unwrap();
        assert!(sc.pass && sc.cofinite == Some(true));
        assert_eq!(sc.generic, Some(slopes(&["0", "1"])));
    }

    #[test]
    fn intersection_identity() {
        let f = legendre_family(2).unwrap();
        for nu in [slopes(&["0", "1"]), slopes(&["1/2", "1/2"]), slopes(&["1", "1"])] {
            let rep = strata_intersection_snu(&f, &nu, 4).unwrap();
            assert!(rep.pass, "{:?}", rep.mismatches);
        }
        let ss = strata_intersection_snu(&f, &slopes(&["1/2", "1/2"]), 3).unwrap();
        assert!(ss.stratum_counts.values().all(|&c| c == 1));
    }

    #[test]
    fn fiber_counts_match_prank() {
        let f = legendre_family(3).unwrap();
        let rep = as_equivalence(&f, 3).unwrap();
        assert!(rep.pass, "{:?}", rep.mismatches);
        assert_eq!((rep.generic_prank, rep.generic_log_mu), (1, 1));
    }

    #[test]
    fn stratum_keys_round_trip_through_labels() {
        let keys = [
            StratumKey::Newton { polygon: NewtonPolygon::parse(&["1/2", "1/2"]).unwrap() },
            StratumKey::Prank { value: 1 },
            StratumKey::Break { point: BreakPoint::new(1, 0) },
            StratumKey::AsCount { log_p: 2 },
        ];
        for k in keys {
            assert_eq!(k.label().parse::<StratumKey>().unwrap(), k);
        }
        assert_eq!("newton:0,1".parse::<StratumKey>().unwrap().label(), "newton:{0,1}");
        assert!("prank:x".parse::<StratumKey>().is_err());
        assert!("slope:1".parse::<StratumKey>().is_err());
    }
}
