//! JSON input and output formats. Integers may be given as JSON numbers or
//! decimal strings and are always written as strings; field elements over
//! `F_{p^deg}` with `deg > 1` are arrays of residues in the power basis.
//! Validation errors carry a JSON pointer to the offending value.

use crate::artin_schreier::{AsEquation, AsSystem, AsTerm, BasePoly};
use crate::crystal::{Crystal, IntMatrix};
use crate::family::{CrystalFamily, FamilyEntry};
use crate::field::{make_field, FfElem, FiniteField};
use crate::witt::{max_precision, WittRing};
use crate::{Error, Result};
use serde_json::{json, Map, Value};

const DEFAULT_CRYSTAL_PRECISION: u32 = 4;
const DEFAULT_FAMILY_PRECISION: u32 = 2;

fn input(pointer: &str, message: impl Into<String>) -> Error {
    Error::Input { pointer: if pointer.is_empty() { "/".into() } else { pointer.into() }, message: message.into() }
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn child(ptr: &str, key: impl std::fmt::Display) -> String {
    format!("{ptr}/{}", escape(&key.to_string()))
}

fn object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| input(ptr, "expected an object"))
}

fn array<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| input(ptr, "expected an array"))
}

fn int(v: &Value, ptr: &str) -> Result<i64> {
    match v {
        Value::Number(n) => n.as_i64().ok_or_else(|| input(ptr, "expected an integer within 64 bits")),
        Value::String(s) => s.trim().parse::<i64>().map_err(|_| input(ptr, format!("'{s}' is not an integer"))),
        _ => Err(input(ptr, "expected an integer (number or decimal string)")),
    }
}

fn uint(v: &Value, ptr: &str) -> Result<u64> {
    let x = int(v, ptr)?;
    u64::try_from(x).map_err(|_| input(ptr, "expected a nonnegative integer"))
}

fn small(v: &Value, ptr: &str) -> Result<u32> {
    u32::try_from(uint(v, ptr)?).map_err(|_| input(ptr, "value too large"))
}

fn field_of<'a>(obj: &'a Map<String, Value>, key: &str, ptr: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| input(&child(ptr, key), "missing field"))
}

fn optional<T>(
    obj: &Map<String, Value>,
    key: &str,
    ptr: &str,
    f: impl Fn(&Value, &str) -> Result<T>,
) -> Result<Option<T>> {
    obj.get(key).map(|v| f(v, &child(ptr, key))).transpose()
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], ptr: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(input(&child(ptr, k), "unknown field")),
        None => Ok(()),
    }
}

/// Reads the field either from a nested `"field": {"p", "deg", "defining_poly"}`
/// object or from the same keys at top level. A top-level `p` next to a
/// nested field must agree with it.
fn base_field(obj: &Map<String, Value>, ptr: &str) -> Result<FiniteField> {
    let Some(f) = obj.get("field") else {
        return field_from(obj, ptr);
    };
    let fp = child(ptr, "field");
    let fo = object(f, &fp)?;
    reject_unknown(fo, &["p", "deg", "defining_poly"], &fp)?;
    let k = field_from(fo, &fp)?;
    if let Some(p) = obj.get("p") {
        if uint(p, &child(ptr, "p"))? != k.p() {
            return Err(input(&child(ptr, "p"), "disagrees with field.p"));
        }
    }
    Ok(k)
}

fn field_from(obj: &Map<String, Value>, ptr: &str) -> Result<FiniteField> {
    let p = uint(field_of(obj, "p", ptr)?, &child(ptr, "p"))?;
    let deg = optional(obj, "deg", ptr, small)?.unwrap_or(1);
    let relabel = |e: Error, key: &str| match e {
        Error::Input { .. } => e,
        other => input(&child(ptr, key), other.to_string()),
    };
    match obj.get("defining_poly") {
        Some(v) => {
            let pp = child(ptr, "defining_poly");
            let poly =
                array(v, &pp)?.iter().enumerate().map(|(i, c)| uint(c, &child(&pp, i))).collect::<Result<Vec<_>>>()?;
            if poly.len() != deg as usize + 1 {
                return Err(input(&pp, format!("expected {} coefficients for degree {deg}", deg + 1)));
            }
            FiniteField::with_poly(p, poly).map_err(|e| relabel(e, "defining_poly"))
        }
        None => make_field(p, deg, 0).map_err(|e| {
            let key = if matches!(e, Error::NotPrime(_)) { "p" } else { "deg" };
            relabel(e, key)
        }),
    }
}

/// An integer coefficient vector of length `deg`.
fn int_vector(v: &Value, deg: usize, ptr: &str) -> Result<Vec<i64>> {
    match v {
        Value::Array(items) => {
            if items.len() != deg {
                return Err(input(ptr, format!("expected {deg} coefficients, got {}", items.len())));
            }
            items.iter().enumerate().map(|(i, x)| int(x, &child(ptr, i))).collect()
        }
        _ => {
            let mut out = vec![0; deg];
            out[0] = int(v, ptr)?;
            Ok(out)
        }
    }
}

fn ff_elem(k: &FiniteField, v: &Value, ptr: &str) -> Result<FfElem> {
    let p = k.p() as i64;
    let coeffs = int_vector(v, k.deg() as usize, ptr)?;
    Ok(FfElem::new(coeffs.into_iter().map(|c| c.rem_euclid(p) as u64).collect()))
}

fn int_vector_json(v: &[i64]) -> Value {
    if v.len() == 1 {
        Value::String(v[0].to_string())
    } else {
        Value::Array(v.iter().map(|c| Value::String(c.to_string())).collect())
    }
}

fn ff_json(x: &FfElem) -> Value {
    let v: Vec<i64> = x.coeffs.iter().map(|&c| c as i64).collect();
    int_vector_json(&v)
}

fn field_json(k: &FiniteField) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("p".into(), json!(k.p()));
    m.insert("field".into(), json!({"p": k.p(), "deg": k.deg(), "defining_poly": k.defining_poly()}));
    m
}

fn square_rows<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>> {
    let rows = array(v, ptr)?;
    if rows.is_empty() {
        return Err(input(ptr, "matrix is empty"));
    }
    for (i, row) in rows.iter().enumerate() {
        let rp = child(ptr, i);
        let len = array(row, &rp)?.len();
        if len != rows.len() {
            return Err(input(
                ptr,
                format!("matrix is not square: row {i} has {len} entries, expected {}", rows.len()),
            ));
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Crystals

/// `{"p", "field"?, "s"?, "n"?, "matrix": [[entry]]}`.
pub fn parse_crystal(v: &Value) -> Result<Crystal> {
    let obj = object(v, "")?;
    reject_unknown(obj, &["p", "field", "deg", "defining_poly", "s", "n", "matrix", "name"], "")?;
    let k = base_field(obj, "")?;
    let s = optional(obj, "s", "", small)?.unwrap_or(DEFAULT_CRYSTAL_PRECISION);
    if s == 0 || s > max_precision(k.p()) {
        return Err(input("/s", format!("precision must lie in 1..={}", max_precision(k.p()))));
    }
    let n = optional(obj, "n", "", uint)?.unwrap_or(1);
    if n == 0 {
        return Err(input("/n", "Frobenius twist must be positive"));
    }
    let rows = square_rows(field_of(obj, "matrix", "")?, "/matrix")?;
    let deg = k.deg() as usize;
    let src: IntMatrix = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let rp = child("/matrix", i);
            array(row, &rp)?.iter().enumerate().map(|(j, e)| int_vector(e, deg, &child(&rp, j))).collect()
        })
        .collect::<Result<_>>()?;
    let w = WittRing::new(&k, s).map_err(|e| input("/s", e.to_string()))?;
    Crystal::from_ints(&w, n, src)
}

pub fn crystal_to_json(c: &Crystal) -> Value {
    let mut m = field_json(c.field());
    m.insert("s".into(), json!(c.s()));
    m.insert("n".into(), json!(c.n()));
    let rows: Vec<Value> = match c.source() {
        Some(src) => src.iter().map(|row| Value::Array(row.iter().map(|e| int_vector_json(e)).collect())).collect(),
        None => c
            .matrix()
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|e| int_vector_json(&e.coeffs.iter().map(|&x| x as i64).collect::<Vec<_>>()))
                        .collect(),
                )
            })
            .collect(),
    };
    m.insert("matrix".into(), Value::Array(rows));
    Value::Object(m)
}

// ---------------------------------------------------------------------------
// Polynomials in the parameters

/// `{"terms": [{"monomial": [..], "coeff": ..}]}`, or a bare constant.
fn terms_of<'a>(v: &'a Value, ptr: &str) -> Result<Option<&'a Vec<Value>>> {
    match v {
        Value::Object(obj) => {
            reject_unknown(obj, &["terms"], ptr)?;
            Ok(Some(array(field_of(obj, "terms", ptr)?, &child(ptr, "terms"))?))
        }
        _ => Ok(None),
    }
}

fn monomial(term: &Map<String, Value>, params: usize, ptr: &str) -> Result<Vec<u32>> {
    match term.get("monomial") {
        None => Ok(vec![0; params]),
        Some(m) => {
            let mp = child(ptr, "monomial");
            let exps =
                array(m, &mp)?.iter().enumerate().map(|(i, e)| small(e, &child(&mp, i))).collect::<Result<Vec<_>>>()?;
            if exps.len() != params {
                return Err(input(&mp, format!("expected {params} exponents, got {}", exps.len())));
            }
            Ok(exps)
        }
    }
}

fn family_entry(v: &Value, params: usize, deg: usize, ptr: &str) -> Result<FamilyEntry> {
    let mut out = FamilyEntry::new();
    let mut add = |mono: Vec<u32>, c: Vec<i64>| {
        let slot = out.entry(mono).or_insert_with(|| vec![0; deg]);
        for (a, b) in slot.iter_mut().zip(c) {
            *a += b;
        }
    };
    match terms_of(v, ptr)? {
        None => add(vec![0; params], int_vector(v, deg, ptr)?),
        Some(terms) => {
            for (t, term) in terms.iter().enumerate() {
                let tp = child(&child(ptr, "terms"), t);
                let obj = object(term, &tp)?;
                reject_unknown(obj, &["monomial", "coeff"], &tp)?;
                let c = int_vector(field_of(obj, "coeff", &tp)?, deg, &child(&tp, "coeff"))?;
                add(monomial(obj, params, &tp)?, c);
            }
        }
    }
    out.retain(|_, c| c.iter().any(|&x| x != 0));
    Ok(out)
}

fn base_poly(k: &FiniteField, v: &Value, params: usize, ptr: &str) -> Result<BasePoly> {
    let mut out = BasePoly::zero();
    let mut add = |mono: Vec<u32>, c: FfElem| {
        let cur = out.terms.remove(&mono).unwrap_or_else(|| k.zero());
        let sum = k.add(&cur, &c);
        if !k.is_zero(&sum) {
            out.terms.insert(mono, sum);
        }
    };
    match terms_of(v, ptr)? {
        None => add(vec![0; params], ff_elem(k, v, ptr)?),
        Some(terms) => {
            for (t, term) in terms.iter().enumerate() {
                let tp = child(&child(ptr, "terms"), t);
                let obj = object(term, &tp)?;
                reject_unknown(obj, &["monomial", "coeff"], &tp)?;
                let c = ff_elem(k, field_of(obj, "coeff", &tp)?, &child(&tp, "coeff"))?;
                add(monomial(obj, params, &tp)?, c);
            }
        }
    }
    Ok(out)
}

fn terms_json(terms: impl Iterator<Item = (Vec<u32>, Value)>) -> Value {
    let list: Vec<Value> = terms.map(|(m, c)| json!({"monomial": m, "coeff": c})).collect();
    json!({ "terms": list })
}

// ---------------------------------------------------------------------------
// Families

/// `{"name"?, "p", "field"?, "s"?, "n"?, "params", "det_valuation"?,
/// "matrix": [[{"terms": [{"monomial", "coeff"}]}]]}`.
pub fn parse_family(v: &Value) -> Result<CrystalFamily> {
    let obj = object(v, "")?;
    reject_unknown(
        obj,
        &["name", "p", "field", "deg", "defining_poly", "s", "n", "params", "det_valuation", "matrix"],
        "",
    )?;
    let k = base_field(obj, "")?;
    let name = match obj.get("name") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(input("/name", "expected a string")),
        None => "family".into(),
    };
    let s = optional(obj, "s", "", small)?.unwrap_or(DEFAULT_FAMILY_PRECISION);
    if s == 0 || s > max_precision(k.p()) {
        return Err(input("/s", format!("precision must lie in 1..={}", max_precision(k.p()))));
    }
    let n = optional(obj, "n", "", uint)?.unwrap_or(1);
    if n == 0 {
        return Err(input("/n", "Frobenius twist must be positive"));
    }
    let params = uint(field_of(obj, "params", "")?, "/params")? as usize;
    let det = optional(obj, "det_valuation", "", small)?;
    let rows = square_rows(field_of(obj, "matrix", "")?, "/matrix")?;
    let deg = k.deg() as usize;
    let matrix = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let rp = child("/matrix", i);
            array(row, &rp)?.iter().enumerate().map(|(j, e)| family_entry(e, params, deg, &child(&rp, j))).collect()
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    let w = WittRing::new(&k, s).map_err(|e| input("/s", e.to_string()))?;
    CrystalFamily::new(&name, &w, n, params, matrix, det)
}

pub fn family_to_json(f: &CrystalFamily) -> Value {
    let mut m = field_json(f.base_field());
    m.insert("name".into(), json!(f.name()));
    m.insert("s".into(), json!(f.ring().s()));
    m.insert("n".into(), json!(f.n()));
    m.insert("params".into(), json!(f.params()));
    m.insert("det_valuation".into(), json!(f.det_valuation()));
    let rows: Vec<Value> = f
        .entries()
        .iter()
        .map(|row| {
            Value::Array(
                row.iter().map(|e| terms_json(e.iter().map(|(mono, c)| (mono.clone(), int_vector_json(c))))).collect(),
            )
        })
        .collect();
    m.insert("matrix".into(), Value::Array(rows));
    Value::Object(m)
}

// ---------------------------------------------------------------------------
// Artin–Schreier systems

/// `{"p", "field"?, "params"?, "equations": [{"constant"?, "terms":
/// [{"var", "exp", "coeff"}]}]}`; equation `i` reads
/// `x_i = constant + sum coeff * x_var^{p^exp}`.
pub fn parse_as_system(v: &Value) -> Result<AsSystem> {
    let obj = object(v, "")?;
    reject_unknown(obj, &["name", "p", "field", "deg", "defining_poly", "params", "equations"], "")?;
    let k = base_field(obj, "")?;
    let params = optional(obj, "params", "", uint)?.unwrap_or(0) as usize;
    let eqs = array(field_of(obj, "equations", "")?, "/equations")?;
    let r = eqs.len();
    let mut equations = Vec::with_capacity(r);
    for (i, eq) in eqs.iter().enumerate() {
        let ep = child("/equations", i);
        let eo = object(eq, &ep)?;
        reject_unknown(eo, &["constant", "terms"], &ep)?;
        let constant = match eo.get("constant") {
            Some(c) => base_poly(&k, c, params, &child(&ep, "constant"))?,
            None => BasePoly::zero(),
        };
        let mut terms = Vec::new();
        if let Some(ts) = eo.get("terms") {
            let tsp = child(&ep, "terms");
            for (t, term) in array(ts, &tsp)?.iter().enumerate() {
                let tp = child(&tsp, t);
                let to = object(term, &tp)?;
                reject_unknown(to, &["var", "exp", "coeff"], &tp)?;
                let var = uint(field_of(to, "var", &tp)?, &child(&tp, "var"))? as usize;
                if var >= r {
                    return Err(input(&child(&tp, "var"), format!("variable index must be below {r}")));
                }
                let exp = small(field_of(to, "exp", &tp)?, &child(&tp, "exp"))?;
                if exp == 0 {
                    return Err(input(&child(&tp, "exp"), "exponent m of x^{p^m} must be at least 1"));
                }
                let coeff = base_poly(&k, field_of(to, "coeff", &tp)?, params, &child(&tp, "coeff"))?;
                terms.push(AsTerm { var, exp, coeff });
            }
        }
        equations.push(AsEquation { constant, terms });
    }
    AsSystem::new(&k, params, equations)
}

pub fn as_system_to_json(sys: &AsSystem) -> Value {
    let mut m = field_json(sys.base());
    m.insert("params".into(), json!(sys.params()));
    let poly = |p: &BasePoly| terms_json(p.terms.iter().map(|(mono, c)| (mono.clone(), ff_json(c))));
    let eqs: Vec<Value> = sys
        .equations()
        .iter()
        .map(|eq| {
            let terms: Vec<Value> =
                eq.terms.iter().map(|t| json!({"var": t.var, "exp": t.exp, "coeff": poly(&t.coeff)})).collect();
            json!({"constant": poly(&eq.constant), "terms": terms})
        })
        .collect();
    m.insert("equations".into(), Value::Array(eqs));
    Value::Object(m)
}

// ---------------------------------------------------------------------------
// Points

/// Parses `"t=3"` or `"t1=0,t2=5"` (or bare comma-separated values). Each
/// value is the index of a field element in enumeration order, i.e. the
/// base-p digits of its power-basis coordinates.
pub fn parse_point(k: &FiniteField, params: usize, text: &str) -> Result<Vec<FfElem>> {
    let text = text.trim();
    let parts: Vec<&str> = if text.is_empty() { Vec::new() } else { text.split(',').map(str::trim).collect() };
    if parts.len() != params {
        return Err(input("point", format!("expected {params} coordinates, got {}", parts.len())));
    }
    let q = k.cardinality().unwrap_or(u128::MAX);
    let mut coords = vec![None; params];
    for (pos, part) in parts.iter().enumerate() {
        let (slot, value) = match part.split_once('=') {
            None => (pos, *part),
            Some((name, value)) => {
                let name = name.trim();
                let slot = if name == "t" && params == 1 {
                    0
                } else {
                    name.strip_prefix('t')
                        .and_then(|i| i.parse::<usize>().ok())
                        .filter(|&i| (1..=params).contains(&i))
                        .map(|i| i - 1)
                        .ok_or_else(|| input("point", format!("unknown parameter name '{name}'")))?
                };
                (slot, value.trim())
            }
        };
        let idx: u128 = value.parse().map_err(|_| input("point", format!("'{value}' is not a field element index")))?;
        if idx >= q {
            return Err(input("point", format!("index {idx} exceeds the field size {q}")));
        }
        if coords[slot].is_some() {
            return Err(input("point", format!("coordinate t{} given twice", slot + 1)));
        }
        coords[slot] = Some(k.from_index(idx));
    }
    Ok(coords.into_iter().map(|c| c.expect("every slot filled")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family;

    fn pointer(e: Error) -> String {
        match e {
            Error::Input { pointer, .. } => pointer,
            other => panic!("expected an input error, got {other}"),
        }
    }

    #[test]
    fn crystal_round_trip() {
        let v = json!({"p": 2, "s": 3, "matrix": [["0", "2"], [1, "0"]]});
        let c = parse_crystal(&v).unwrap();
        assert_eq!(c.newton_slopes().unwrap().to_string(), "{1/2,1/2}");
        let back = parse_crystal(&crystal_to_json(&c)).unwrap();
        assert_eq!(back.source(), c.source());
    }

    #[test]
    fn crystal_errors_point_at_the_culprit() {
        assert_eq!(pointer(parse_crystal(&json!({"p": 2, "matrix": [[1, 0]]})).unwrap_err()), "/matrix");
        assert_eq!(pointer(parse_crystal(&json!({"p": 4, "matrix": [[1]]})).unwrap_err()), "/p");
        assert_eq!(pointer(parse_crystal(&json!({"p": 2, "matrix": [[1, "x"], [0, 1]]})).unwrap_err()), "/matrix/0/1");
        assert_eq!(pointer(parse_crystal(&json!({"p": 2, "deg": 2, "matrix": [[[1]]]})).unwrap_err()), "/matrix/0/0");
        assert_eq!(pointer(parse_crystal(&json!({"p": 2, "matrix": [[1]], "extra": 0})).unwrap_err()), "/extra");
        assert_eq!(pointer(parse_crystal(&json!({"p": 2})).unwrap_err()), "/matrix");
    }

    #[test]
    fn family_round_trip() {
        let f = family::two_parameter_family(2).unwrap();
        let g = parse_family(&family_to_json(&f)).unwrap();
        assert_eq!(g.entries(), f.entries());
        assert_eq!(g.params(), 2);
        let bad = json!({"p": 2, "params": 1, "matrix": [[{"terms": [{"monomial": [1, 1], "coeff": 1}]}]]});
        assert_eq!(pointer(parse_family(&bad).unwrap_err()), "/matrix/0/0/terms/0/monomial");
    }

    #[test]
    fn as_system_round_trip_and_points() {
        let f = family::legendre_family(3).unwrap();
        let sys = f.fiber_system().unwrap();
        let back = parse_as_system(&as_system_to_json(&sys)).unwrap();
        assert_eq!(back, sys);
        let k = sys.base();
        assert_eq!(parse_point(k, 1, "t=2").unwrap(), vec![k.constant(2)]);
        assert_eq!(parse_point(k, 1, "1").unwrap(), vec![k.one()]);
        assert!(parse_point(k, 1, "t=3").is_err());
        assert!(parse_point(k, 1, "").is_err());
        let bad = json!({"p": 2, "equations": [{"terms": [{"var": 0, "exp": 0, "coeff": 1}]}]});
        assert_eq!(pointer(parse_as_system(&bad).unwrap_err()), "/equations/0/terms/0/exp");
    }
}
