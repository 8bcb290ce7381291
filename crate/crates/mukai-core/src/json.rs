//! JSON encoding of vectors, triples, moves and certificates.
//!
//! Integers are written as JSON numbers of arbitrary size.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Number, Value};

use crate::arith::{Int, Rat};
use crate::lattice::{DivisorClass, SurfaceClass};
use crate::moves::{Check, Move, StepCertificate};
use crate::mukai::{MukaiVector, Triple};
use crate::walls::{Provenance, Wall};

/// Decoding failure with the JSON path of the offending field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JsonError {
    pub path: String,
    pub message: String,
}

impl JsonError {
    pub fn new(path: &str, message: impl Into<String>) -> Self {
        JsonError { path: path.to_string(), message: message.into() }
    }
}

impl fmt::Display for JsonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "$" } else { &self.path };
        write!(f, "{}: {}", path, self.message)
    }
}

impl std::error::Error for JsonError {}

pub trait ToJson {
    fn to_json(&self) -> Value;
}

pub trait FromJson: Sized {
    fn from_json(v: &Value, path: &str) -> Result<Self, JsonError>;
}

/// Parses a JSON document and decodes it.
pub fn parse<T: FromJson>(text: &str) -> Result<T, JsonError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| JsonError::new("", format!("line {} column {}: {}", e.line(), e.column(), e)))?;
    T::from_json(&v, "")
}

pub fn to_pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

pub fn int_json(n: &Int) -> Value {
    Value::Number(Number::from_str(&n.to_string()).expect("integer literal"))
}

pub fn rat_json(q: &Rat) -> Value {
    if q.is_integer() {
        int_json(q.numer())
    } else {
        json!(format!("{}/{}", q.numer(), q.denom()))
    }
}

pub fn class_json(d: &DivisorClass) -> Value {
    Value::Array(d.coords().iter().map(int_json).collect())
}

pub fn vector_json(v: &MukaiVector) -> Value {
    v.to_json()
}

fn child(path: &str, key: &str) -> String {
    format!("{path}.{key}")
}

fn field<'a>(v: &'a Value, path: &str, key: &str) -> Result<&'a Value, JsonError> {
    let obj = v.as_object().ok_or_else(|| JsonError::new(path, "expected an object"))?;
    obj.get(key).ok_or_else(|| JsonError::new(&child(path, key), "missing field"))
}

pub fn int_from(v: &Value, path: &str) -> Result<Int, JsonError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        _ => return Err(JsonError::new(path, "expected an integer")),
    };
    Int::from_str(&text).map_err(|_| JsonError::new(path, format!("`{text}` is not an integer")))
}

impl ToJson for Int {
    fn to_json(&self) -> Value {
        int_json(self)
    }
}

impl FromJson for Int {
    fn from_json(v: &Value, path: &str) -> Result<Self, JsonError> {
        int_from(v, path)
    }
}

impl ToJson for DivisorClass {
    fn to_json(&self) -> Value {
        class_json(self)
    }
}

impl FromJson for DivisorClass {
    fn from_json(v: &Value, path: &str) -> Result<Self, JsonError> {
        let arr = v.as_array().ok_or_else(|| JsonError::new(path, "expected an array of integers"))?;
        let coords = arr
            .iter()
            .enumerate()
            .map(|(i, x)| int_from(x, &format!("{path}[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DivisorClass::new(coords))
    }
}

impl ToJson for MukaiVector {
    fn to_json(&self) -> Value {
        json!({ "v0": int_json(&self.v0), "v1": class_json(&self.v1), "v2": int_json(&self.v2) })
    }
}

/// Accepts `{"v0","v1","v2"}` or the shorthand `[v0, [..], v2]`.
impl FromJson for MukaiVector {
    fn from_json(v: &Value, path: &str) -> Result<Self, JsonError> {
        if let Some(arr) = v.as_array() {
            if arr.len() != 3 {
                return Err(JsonError::new(path, "expected [v0, v1, v2]"));
            }
            return Ok(MukaiVector::new(
                int_from(&arr[0], &format!("{path}[0]"))?,
                DivisorClass::from_json(&arr[1], &format!("{path}[1]"))?,
                int_from(&arr[2], &format!("{path}[2]"))?,
            ));
        }
        Ok(MukaiVector::new(
            int_from(field(v, path, "v0")?, &child(path, "v0"))?,
            DivisorClass::from_json(field(v, path, "v1")?, &child(path, "v1"))?,
            int_from(field(v, path, "v2")?, &child(path, "v2"))?,
        ))
    }
}

impl ToJson for SurfaceClass {
    fn to_json(&self) -> Value {
        json!(self.spec_string())
    }
}

impl FromJson for SurfaceClass {
    fn from_json(v: &Value, path: &str) -> Result<Self, JsonError> {
        let s = v.as_str().ok_or_else(|| JsonError::new(path, "expected a preset name or inline TOML string"))?;
        SurfaceClass::resolve(s).map_err(|e| JsonError::new(path, e.to_string()))
    }
}

impl ToJson for Triple {
    fn to_json(&self) -> Value {
        json!({ "surface": self.surface.to_json(), "v": self.v.to_json(), "H": class_json(&self.h) })
    }
}

/// Decodes the raw data of a triple; validation is left to the caller.
impl FromJson for Triple {
    fn from_json(v: &Value, path: &str) -> Result<Self, JsonError> {
        let surface = SurfaceClass::from_json(field(v, path, "surface")?, &child(path, "surface"))?;
        let vec = MukaiVector::from_json(field(v, path, "v")?, &child(path, "v"))?;
        let h = DivisorClass::from_json(field(v, path, "H")?, &child(path, "H"))?;
        surface.check_len(&vec.v1).map_err(|e| JsonError::new(&child(path, "v.v1"), e.to_string()))?;
        surface.check_len(&h).map_err(|e| JsonError::new(&child(path, "H"), e.to_string()))?;
        Ok(Triple::unchecked(surface, vec, h))
    }
}

impl ToJson for Move {
    fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("type".into(), json!(self.type_name()));
        match self {
            Move::TensorLineBundle { c1l } => {
                obj.insert("c1L".into(), class_json(c1l));
            }
            Move::TensorPowerOfH { d } => {
                obj.insert("d".into(), int_json(d));
            }
            Move::ChangePolarization { h_new } => {
                obj.insert("H_new".into(), class_json(h_new));
            }
            Move::RetargetLattice { surface, v, h } => {
                obj.insert("target_surface".into(), surface.to_json());
                obj.insert("v_new".into(), v.to_json());
                obj.insert("H_new".into(), class_json(h));
            }
            Move::FmDualK3 | Move::FmDualAbelian | Move::FmDualRank0 | Move::CanonicalizeSign => {}
        }
        Value::Object(obj)
    }
}

impl FromJson for Move {
    fn from_json(v: &Value, path: &str) -> Result<Self, JsonError> {
        let ty = field(v, path, "type")?
            .as_str()
            .ok_or_else(|| JsonError::new(&child(path, "type"), "expected a string"))?;
        Ok(match ty {
            "TensorLineBundle" => Move::TensorLineBundle {
                c1l: DivisorClass::from_json(field(v, path, "c1L")?, &child(path, "c1L"))?,
            },
            "TensorPowerOfH" => Move::TensorPowerOfH { d: int_from(field(v, path, "d")?, &child(path, "d"))? },
            "FMDualK3" => Move::FmDualK3,
            "FMDualAbelian" => Move::FmDualAbelian,
            "FMDualRank0" => Move::FmDualRank0,
            "ChangePolarization" => Move::ChangePolarization {
                h_new: DivisorClass::from_json(field(v, path, "H_new")?, &child(path, "H_new"))?,
            },
            "RetargetLattice" => Move::RetargetLattice {
                surface: SurfaceClass::from_json(field(v, path, "target_surface")?, &child(path, "target_surface"))?,
                v: MukaiVector::from_json(field(v, path, "v_new")?, &child(path, "v_new"))?,
                h: DivisorClass::from_json(field(v, path, "H_new")?, &child(path, "H_new"))?,
            },
            "CanonicalizeSign" => Move::CanonicalizeSign,
            other => return Err(JsonError::new(&child(path, "type"), format!("unknown move type `{other}`"))),
        })
    }
}

impl ToJson for Check {
    fn to_json(&self) -> Value {
        json!({ "name": self.name, "witness": self.witness, "ok": self.ok })
    }
}

impl FromJson for Check {
    fn from_json(v: &Value, path: &str) -> Result<Self, JsonError> {
        let name = field(v, path, "name")?
            .as_str()
            .ok_or_else(|| JsonError::new(&child(path, "name"), "expected a string"))?
            .to_string();
        let witness = v.get("witness").cloned().unwrap_or(Value::Null);
        let ok = field(v, path, "ok")?
            .as_bool()
            .ok_or_else(|| JsonError::new(&child(path, "ok"), "expected a boolean"))?;
        Ok(Check { name, witness, ok })
    }
}

fn strings_from(v: &Value, path: &str) -> Result<Vec<String>, JsonError> {
    let arr = v.as_array().ok_or_else(|| JsonError::new(path, "expected an array of strings"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_str().map(str::to_string).ok_or_else(|| JsonError::new(&format!("{path}[{i}]"), "expected a string"))
        })
        .collect()
}

pub fn list_from<T: FromJson>(v: &Value, path: &str) -> Result<Vec<T>, JsonError> {
    let arr = v.as_array().ok_or_else(|| JsonError::new(path, "expected an array"))?;
    arr.iter().enumerate().map(|(i, x)| T::from_json(x, &format!("{path}[{i}]"))).collect()
}

impl ToJson for StepCertificate {
    fn to_json(&self) -> Value {
        json!({
            "move": self.mv.to_json(),
            "input": self.input.to_json(),
            "output": self.output.to_json(),
            "checks": self.checks.iter().map(ToJson::to_json).collect::<Vec<_>>(),
            "assumptions": self.assumptions,
        })
    }
}

impl FromJson for StepCertificate {
    fn from_json(v: &Value, path: &str) -> Result<Self, JsonError> {
        Ok(StepCertificate {
            mv: Move::from_json(field(v, path, "move")?, &child(path, "move"))?,
            input: Triple::from_json(field(v, path, "input")?, &child(path, "input"))?,
            output: Triple::from_json(field(v, path, "output")?, &child(path, "output"))?,
            checks: list_from(field(v, path, "checks")?, &child(path, "checks"))?,
            assumptions: strings_from(field(v, path, "assumptions")?, &child(path, "assumptions"))?,
        })
    }
}

pub fn assumptions_from(v: &Value, path: &str) -> Result<Vec<String>, JsonError> {
    strings_from(v, path)
}

impl ToJson for Wall {
    fn to_json(&self) -> Value {
        let provenance = match &self.provenance {
            Provenance::RankPositiveBound => json!({ "type": "RankPositiveBound" }),
            Provenance::RankZeroPair { u1, u2 } => {
                json!({ "type": "RankZeroPair", "u1": class_json(u1), "u2": int_json(u2) })
            }
        };
        json!({ "D": class_json(&self.d), "dsq": int_json(&self.dsq), "provenance": provenance })
    }
}
