//! Text input format and serialization helpers.
//!
//! One TOML document serves every command. Top-level keys `m`, `d` and the
//! component list `A` describe the bundle; the optional tables `[real]`,
//! `[structure]`, `[blocks]` and `[conjugation]` are read only when present.
//! Rational entries may be integers, decimal numbers, or strings such as
//! `"-3/4"` and `"0.125"`. Errors name the offending field and entry.

use std::fmt::Display;
use std::path::Path;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::Zero;
use toml::{Table, Value};

use crate::complex::ComplexStructurePair;
use crate::error::{Error, Result};
use crate::exact::{q_to_f64, QMat, Q};
use crate::lattice::BundleDatum;
use crate::orbifold::ConjugationData;
use crate::real::RealStructureData;
use crate::solver::ConstraintSystem;

/// A parsed input document; absent sections are `None`.
#[derive(Clone, Debug)]
pub struct Input {
    pub m: usize,
    pub d: usize,
    pub datum: Option<BundleDatum>,
    pub real: Option<RealStructureData>,
    pub structure: Option<ComplexStructurePair>,
    pub blocks: Option<ConstraintSystem>,
    pub conjugation: Option<ConjugationData>,
}

fn err(path: &str, msg: impl Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

/// Parses `"p/q"`, `"-12"` or a plain decimal such as `"-0.125"`.
pub fn parse_rational(text: &str) -> Option<Q> {
    let t = text.trim();
    if let Ok(x) = t.parse::<Q>() {
        return Some(x);
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.')?;
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let x = Q::new(digits, scale);
    Some(if neg { -x } else { x })
}

fn rational(v: &Value, path: &str) -> Result<Q> {
    match v {
        Value::Integer(n) => Ok(Q::from_integer((*n).into())),
        // Display prints the shortest round-tripping decimal, never exponents
        Value::Float(x) if x.is_finite() => parse_rational(&x.to_string()).ok_or_else(|| err(path, "bad number")),
        Value::String(s) => parse_rational(s).ok_or_else(|| err(path, format!("cannot read {s:?} as a rational"))),
        other => Err(err(path, format!("expected a number, found {}", other.type_str()))),
    }
}

fn integer(v: &Value, path: &str) -> Result<Q> {
    let x = rational(v, path)?;
    if x.is_integer() {
        Ok(x)
    } else {
        Err(err(path, format!("expected an integer, found {x}")))
    }
}

fn real(v: &Value, path: &str) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        _ => rational(v, path).map(|x| q_to_f64(&x)),
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, format!("expected an array, found {}", v.type_str())))
}

fn vector<T>(v: &Value, path: &str, len: usize, f: fn(&Value, &str) -> Result<T>) -> Result<Vec<T>> {
    let a = array(v, path)?;
    if a.len() != len {
        return Err(err(path, format!("expected {len} entries, found {}", a.len())));
    }
    a.iter().enumerate().map(|(i, x)| f(x, &format!("{path}[{i}]"))).collect()
}

fn matrix<T>(v: &Value, path: &str, rows: usize, cols: usize, f: fn(&Value, &str) -> Result<T>) -> Result<Vec<Vec<T>>> {
    let a = array(v, path)?;
    if a.len() != rows {
        return Err(err(path, format!("expected {rows} rows, found {}", a.len())));
    }
    a.iter().enumerate().map(|(i, r)| vector(r, &format!("{path}[{i}]"), cols, f)).collect()
}

fn qmat(v: &Value, path: &str, rows: usize, cols: usize, f: fn(&Value, &str) -> Result<Q>) -> Result<QMat> {
    let m = matrix(v, path, rows, cols, f)?;
    Ok(QMat::from_fn(rows, cols, |i, j| m[i][j].clone()))
}

fn fmat(v: &Value, path: &str, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    let m = matrix(v, path, rows, cols, real)?;
    Ok(DMatrix::from_fn(rows, cols, |i, j| m[i][j]))
}

fn field<'a>(t: &'a Table, key: &str, prefix: &str) -> Result<&'a Value> {
    t.get(key).ok_or_else(|| err(&format!("{prefix}{key}"), "missing field"))
}

fn table<'a>(t: &'a Table, key: &str) -> Result<Option<&'a Table>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Table(s)) => Ok(Some(s)),
        Some(other) => Err(err(key, format!("expected a table, found {}", other.type_str()))),
    }
}

fn reject_unknown(t: &Table, prefix: &str, known: &[&str]) -> Result<()> {
    match t.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(err(&format!("{prefix}{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn dimension(t: &Table, key: &str) -> Result<usize> {
    let v = field(t, key, "")?;
    match v.as_integer() {
        Some(n) if n > 0 => Ok(n as usize),
        _ => Err(err(key, "expected a positive integer")),
    }
}

fn parse_datum(root: &Table, m: usize, d: usize) -> Result<Option<BundleDatum>> {
    let Some(v) = root.get("A") else {
        return Ok(None);
    };
    let comps = array(v, "A")?;
    if comps.len() != 2 * d {
        return Err(err("A", format!("expected {} component matrices (one per basis vector of the fibre lattice), found {}", 2 * d, comps.len())));
    }
    let mats = comps
        .iter()
        .enumerate()
        .map(|(k, c)| qmat(c, &format!("A[{k}]"), 2 * m, 2 * m, integer))
        .collect::<Result<Vec<_>>>()?;
    match BundleDatum::new(m, d, mats) {
        Err(Error::NotAntisymmetric { component, row, col }) => {
            Err(err(&format!("A[{component}][{row}][{col}]"), format!("not antisymmetric: entry ({row}, {col}) differs from minus entry ({col}, {row})")))
        }
        other => other.map(Some),
    }
}

fn parse_real(t: &Table, m: usize, d: usize) -> Result<RealStructureData> {
    reject_unknown(t, "real.", &["A1", "A2", "L", "d1", "d2"])?;
    let (f, b) = (2 * d, 2 * m);
    let a1 = qmat(field(t, "A1", "real.")?, "real.A1", f, f, integer)?;
    let a2 = qmat(field(t, "A2", "real.")?, "real.A2", b, b, integer)?;
    let l = match t.get("L") {
        Some(v) => qmat(v, "real.L", f, b, rational)?,
        None => QMat::zeros(f, b),
    };
    let d1 = t.get("d1").map_or(Ok(vec![Q::zero(); f]), |v| vector(v, "real.d1", f, rational))?;
    let d2 = t.get("d2").map_or(Ok(vec![Q::zero(); b]), |v| vector(v, "real.d2", b, rational))?;
    RealStructureData::new(a1, a2, l, d1, d2).map_err(|e| err("real", e))
}

fn parse_structure(t: &Table, m: usize, d: usize) -> Result<ComplexStructurePair> {
    reject_unknown(t, "structure.", &["J1", "J2"])?;
    let j1 = fmat(field(t, "J1", "structure.")?, "structure.J1", 2 * d, 2 * d)?;
    let j2 = fmat(field(t, "J2", "structure.")?, "structure.J2", 2 * m, 2 * m)?;
    ComplexStructurePair::new(j1, j2).map_err(|e| err("structure", e))
}

fn parse_blocks(t: &Table, m: usize, d: usize) -> Result<ConstraintSystem> {
    reject_unknown(t, "blocks.", &["a_plus", "a_minus", "D", "L_pp", "L_pm", "L_mp", "L_mm"])?;
    if d != 1 {
        return Err(err("blocks", format!("blocks describe fibre dimension d = 1, got d = {d}")));
    }
    let scalar = |key: &str| t.get(key).map_or(Ok(0.0), |v| real(v, &format!("blocks.{key}")));
    let (a_plus, a_minus) = (scalar("a_plus")?, scalar("a_minus")?);
    let dm = fmat(field(t, "D", "blocks.")?, "blocks.D", m, m)?;
    let row = |key: &str| vector(field(t, key, "blocks.")?, &format!("blocks.{key}"), m, real);
    let l = [row("L_pp")?, row("L_pm")?, row("L_mp")?, row("L_mm")?];
    match m {
        1 => {
            if a_plus != 0.0 || a_minus != 0.0 {
                return Err(err("blocks", "a_plus and a_minus vanish for m = 1"));
            }
            ConstraintSystem::kodaira(l[0][0], l[1][0], l[2][0], l[3][0], dm[(0, 0)])
        }
        2 => {
            let r = |v: &Vec<f64>| [v[0], v[1]];
            let dd = [[dm[(0, 0)], dm[(0, 1)]], [dm[(1, 0)], dm[(1, 1)]]];
            ConstraintSystem::threefold(a_plus, a_minus, dd, [r(&l[0]), r(&l[1]), r(&l[2]), r(&l[3])])
        }
        _ => Err(Error::UnsupportedBaseDimension { m }),
    }
    .map_err(|e| err("blocks", e))
}

fn parse_conjugation(t: &Table, m: usize, d: usize) -> Result<ConjugationData> {
    let p = "conjugation.";
    reject_unknown(t, p, &["A1", "A2", "d2", "generator_translations", "square_translation", "generator_lifts"])?;
    let (f, b) = (2 * d, 2 * m);
    let a1 = qmat(field(t, "A1", p)?, "conjugation.A1", f, f, integer)?;
    let a2 = qmat(field(t, "A2", p)?, "conjugation.A2", b, b, integer)?;
    let d2 = t.get("d2").map_or(Ok(vec![Q::zero(); b]), |v| vector(v, "conjugation.d2", b, rational))?;
    let generator_translations = matrix(field(t, "generator_translations", p)?, "conjugation.generator_translations", b, f + b, rational)?;
    let square_translation = vector(field(t, "square_translation", p)?, "conjugation.square_translation", f + b, rational)?;
    let generator_lifts = match t.get("generator_lifts") {
        Some(v) => matrix(v, "conjugation.generator_lifts", b, f, rational)?,
        None => vec![vec![Q::zero(); f]; b],
    };
    Ok(ConjugationData { a1, a2, d2, generator_lifts, generator_linear: None, generator_translations, square_translation })
}

/// Parses an input document. Syntax errors carry the TOML line and column;
/// semantic errors carry the field path, e.g. `real.L[1][0]`.
pub fn parse_input(text: &str) -> Result<Input> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string().trim_end().to_string()))?;
    reject_unknown(&root, "", &["m", "d", "A", "real", "structure", "blocks", "conjugation"])?;
    let m = dimension(&root, "m")?;
    let d = dimension(&root, "d")?;
    let datum = parse_datum(&root, m, d)?;
    let real = table(&root, "real")?.map(|t| parse_real(t, m, d)).transpose()?;
    let structure = table(&root, "structure")?.map(|t| parse_structure(t, m, d)).transpose()?;
    let blocks = table(&root, "blocks")?.map(|t| parse_blocks(t, m, d)).transpose()?;
    let conjugation = table(&root, "conjugation")?.map(|t| parse_conjugation(t, m, d)).transpose()?;
    Ok(Input { m, d, datum, real, structure, blocks, conjugation })
}

pub fn read_input(path: &Path) -> Result<Input> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_input(&text)
}

/// Serializes rational vectors as lists of strings such as `"-3/4"`.
pub mod qvec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::exact::Q;

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(ToString::to_string).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|t| t.trim().parse::<Q>().map_err(serde::de::Error::custom))
            .collect()
    }
}
