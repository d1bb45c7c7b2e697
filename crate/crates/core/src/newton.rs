//! Newton polygons as sorted multisets of nonnegative rational slopes.

use crate::{Error, Result};
use itertools::Itertools;
use num::rational::Ratio;
use num::{Integer, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

pub type Slope = Ratio<i64>;

/// A vertex `(a, b)` with natural coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BreakPoint {
    pub a: usize,
    pub b: u64,
}

impl BreakPoint {
    pub fn new(a: usize, b: u64) -> Self {
        BreakPoint { a, b }
    }
}

impl fmt::Display for BreakPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// Canonical Newton polygon: slopes sorted nondecreasing, every vertex on
/// the integer lattice.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NewtonPolygon {
    slopes: Vec<Slope>,
}

pub fn parse_slope(s: &str) -> Result<Slope> {
    let bad = || Error::InvalidPolygon(format!("cannot parse slope {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Ratio::new(n, d))
        }
        None => Ok(Ratio::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl NewtonPolygon {
    pub fn from_slopes(mut slopes: Vec<Slope>) -> Result<Self> {
        if let Some(neg) = slopes.iter().find(|s| **s < Slope::zero()) {
            return Err(Error::InvalidPolygon(format!("negative slope {neg}")));
        }
        slopes.sort();
        let mut height = Slope::zero();
        for (i, s) in slopes.iter().enumerate() {
            height += s;
            let run_ends = i + 1 == slopes.len() || slopes[i + 1] != *s;
            if run_ends && !height.is_integer() {
                return Err(Error::NonIntegralBreakPoint { a: i + 1, height: height.to_string() });
            }
        }
        Ok(NewtonPolygon { slopes })
    }

    pub fn from_integers(slopes: &[u64]) -> Result<Self> {
        Self::from_slopes(slopes.iter().map(|&s| Ratio::from_integer(s as i64)).collect())
    }

    pub fn parse(slopes: &[&str]) -> Result<Self> {
        Self::from_slopes(slopes.iter().map(|s| parse_slope(s)).collect::<Result<_>>()?)
    }

    pub fn slopes(&self) -> &[Slope] {
        &self.slopes
    }

    pub fn rank(&self) -> usize {
        self.slopes.len()
    }

    /// `nu(r)`, a natural number by the vertex invariant.
    pub fn total_height(&self) -> u64 {
        self.value_at(self.rank()).to_integer() as u64
    }

    /// `nu(i)`: sum of the `i` smallest slopes.
    pub fn value_at(&self, i: usize) -> Slope {
        self.slopes[..i].iter().copied().sum()
    }

    pub fn multiplicity(&self, slope: Slope) -> usize {
        self.slopes.iter().filter(|&&s| s == slope).count()
    }

    pub fn is_integral(&self) -> bool {
        self.slopes.iter().all(|s| s.is_integer())
    }

    pub fn break_points(&self) -> Vec<BreakPoint> {
        let mut out = vec![BreakPoint::new(0, 0)];
        let mut h = Slope::zero();
        for (i, s) in self.slopes.iter().enumerate() {
            h += s;
            if i + 1 == self.slopes.len() || self.slopes[i + 1] != *s {
                out.push(BreakPoint::new(i + 1, h.to_integer() as u64));
            }
        }
        out
    }

    /// Rebuilds the slope multiset from a vertex list.
    pub fn from_break_points(points: &[BreakPoint]) -> Result<Self> {
        let mut slopes = Vec::new();
        for (u, v) in points.iter().tuple_windows() {
            if v.a <= u.a || v.b < u.b {
                return Err(Error::InvalidPolygon(format!("vertices {u} and {v} out of order")));
            }
            let s = Ratio::new((v.b - u.b) as i64, (v.a - u.a) as i64);
            slopes.extend(std::iter::repeat_n(s, v.a - u.a));
        }
        Self::from_slopes(slopes)
    }

    pub fn has_break(&self, bp: BreakPoint) -> bool {
        self.break_points().contains(&bp)
    }

    /// Pointwise comparison of the graphs on `[0, r]`. Every vertex sits at
    /// an integer abscissa, so comparing at `0..=r` is exact.
    pub fn lies_above(&self, other: &NewtonPolygon) -> Result<bool> {
        graph_lies_above(&self.slopes, &other.slopes)
    }

    /// Slopes of the `a`-th exterior power: all `a`-element sub-multiset sums.
    pub fn exterior_power(&self, a: usize) -> Result<Self> {
        if a == 0 || a > self.rank() {
            return Err(Error::BadIndex { index: a, max: self.rank() });
        }
        let sums = (0..self.rank()).combinations(a).map(|idx| idx.iter().map(|&i| self.slopes[i]).sum()).collect();
        Self::from_slopes(sums)
    }

    pub fn scale_iterate(&self, q: u64) -> Self {
        let q = Ratio::from_integer(q as i64);
        NewtonPolygon { slopes: self.slopes.iter().map(|s| s * q).collect() }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut slopes = self.slopes.clone();
        slopes.extend_from_slice(&other.slopes);
        slopes.sort();
        NewtonPolygon { slopes }
    }

    /// Least `q` making every slope an integer.
    pub fn denominator_lcm(&self) -> u64 {
        self.slopes.iter().fold(1i64, |acc, s| acc.lcm(s.denom())) as u64
    }
}

impl fmt::Display for NewtonPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.slopes.iter().join(","))
    }
}

#[derive(Serialize, Deserialize)]
struct PolygonWire {
    slopes: Vec<String>,
}

impl Serialize for NewtonPolygon {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        PolygonWire { slopes: self.slopes.iter().map(|s| s.to_string()).collect() }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for NewtonPolygon {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let w = PolygonWire::deserialize(de)?;
        let slopes =
            w.slopes.iter().map(|s| parse_slope(s)).collect::<Result<Vec<_>>>().map_err(serde::de::Error::custom)?;
        NewtonPolygon::from_slopes(slopes).map_err(serde::de::Error::custom)
    }
}

/// Graph comparison for raw sorted slope sequences, which need not have
/// integral vertices. Both graphs are linear between consecutive integers.
pub fn graph_lies_above(upper: &[Slope], lower: &[Slope]) -> Result<bool> {
    if upper.len() != lower.len() {
        return Err(Error::RankMismatch(upper.len(), lower.len()));
    }
    let mut sorted = [upper.to_vec(), lower.to_vec()];
    for v in sorted.iter_mut() {
        v.sort();
    }
    let (mut a, mut b) = (Slope::zero(), Slope::zero());
    for (x, y) in sorted[0].iter().zip(&sorted[1]) {
        a += x;
        b += y;
        if a < b {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One slope `b`, then `r-2` slopes `b+1`, then the remainder up to height `d`.
pub fn nu1(r: usize, b: u64, d: u64) -> Result<NewtonPolygon> {
    if r < 2 {
        return Err(Error::Infeasible(format!("nu1 needs rank >= 2, got {r}")));
    }
    let used = b + (r as u64 - 2) * (b + 1);
    if d < used + b + 1 {
        return Err(Error::Infeasible(format!("final slope below {} for r={r}, b={b}, d={d}", b + 1)));
    }
    let mut slopes = vec![b];
    slopes.extend(std::iter::repeat_n(b + 1, r - 2));
    slopes.push(d - used);
    NewtonPolygon::from_integers(&slopes)
}

/// `r-1` slopes `b+1`, then the remainder up to height `d`.
pub fn nu2(r: usize, b: u64, d: u64) -> Result<NewtonPolygon> {
    if r == 0 || (r as u64) * (b + 1) > d {
        return Err(Error::Infeasible(format!("r(b+1) > d for r={r}, b={b}, d={d}")));
    }
    let mut slopes = vec![b + 1; r - 1];
    slopes.push(d - (r as u64 - 1) * (b + 1));
    NewtonPolygon::from_integers(&slopes)
}

/// Decides `(1, b)`-break membership through the two comparison polygons:
/// inside `S_{>=nu1}` the break set is the complement of `S_{>=nu2}`, and it
/// is everything when `nu2` does not exist.
pub fn t_membership_via_nu(nu_x: &NewtonPolygon, b: u64) -> Result<bool> {
    if !nu_x.is_integral() {
        return Err(Error::PreconditionViolated(format!("slopes of {nu_x} are not all integral")));
    }
    let (r, d) = (nu_x.rank(), nu_x.total_height());
    let n1 = nu1(r, b, d).map_err(|e| Error::PreconditionViolated(e.to_string()))?;
    if !nu_x.lies_above(&n1)? {
        return Err(Error::PreconditionViolated(format!("{nu_x} does not lie above {n1}")));
    }
    match nu2(r, b, d) {
        Ok(n2) => Ok(!nu_x.lies_above(&n2)?),
        Err(_) => Ok(true),
    }
}

/// All integral-slope polygons of rank `r` with slopes in `0..=max_slope`.
pub fn integral_polygons(r: usize, max_slope: u64) -> Vec<NewtonPolygon> {
    (0..=max_slope)
        .combinations_with_replacement(r)
        .map(|s| NewtonPolygon::from_integers(&s).expect("integral slopes"))
        .collect()
}
