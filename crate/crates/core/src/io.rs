//! JSON encodings of structures.
//!
//! ```json
//! {"signature":[{"name":"E","arity":2}], "elements":["0","1","2"],
//!  "relations":{"E":[["0","1"],["1","2"]]}}
//! ```
//!
//! Element ids may be given as strings or integers and are always written
//! back as strings. A symbol missing from `"relations"` is empty.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::structure::{Signature, Structure, Symbol};

pub fn parse_structure(text: &str) -> Result<Structure> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    structure_from_value(&value, "$")
}

pub fn structure_to_json(s: &Structure) -> String {
    serde_json::to_string(&structure_to_value(s)).expect("json values serialize")
}

pub fn structure_to_value(s: &Structure) -> Value {
    let signature: Vec<Value> = s
        .signature()
        .symbols()
        .iter()
        .map(|sym| json!({"name": sym.name, "arity": sym.arity}))
        .collect();
    let mut relations = Map::new();
    for (i, sym) in s.signature().symbols().iter().enumerate() {
        let tuples: Vec<Value> = s
            .named_tuples(i)
            .into_iter()
            .map(|t| Value::from(t.into_iter().map(Value::from).collect::<Vec<_>>()))
            .collect();
        relations.insert(sym.name.clone(), Value::Array(tuples));
    }
    json!({
        "signature": signature,
        "elements": s.elements(),
        "relations": relations,
    })
}

pub(crate) fn element_id(v: &Value, at: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) if n.is_u64() || n.is_i64() => Ok(n.to_string()),
        _ => Err(Error::parse(at, "element id must be a string or an integer")),
    }
}

pub fn signature_from_value(v: &Value, at: &str) -> Result<Signature> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::parse(at, "signature must be an array"))?;
    let mut symbols = Vec::with_capacity(arr.len());
    for (i, s) in arr.iter().enumerate() {
        let here = format!("{at}[{i}]");
        let name = s
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::parse(&here, "missing string field `name`"))?;
        let arity = s
            .get("arity")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse(&here, "missing integer field `arity`"))?;
        symbols.push(Symbol::new(name, arity as usize));
    }
    Signature::new(symbols)
}

pub fn signature_to_value(sig: &Signature) -> Value {
    Value::Array(
        sig.symbols()
            .iter()
            .map(|s| json!({"name": s.name, "arity": s.arity}))
            .collect(),
    )
}

pub fn structure_from_value(v: &Value, at: &str) -> Result<Structure> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::parse(at, "structure must be an object"))?;
    let signature = signature_from_value(
        obj.get("signature")
            .ok_or_else(|| Error::parse(at, "missing field `signature`"))?,
        &format!("{at}.signature"),
    )?;
    let elements = obj
        .get("elements")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse(at, "missing array field `elements`"))?
        .iter()
        .enumerate()
        .map(|(i, e)| element_id(e, &format!("{at}.elements[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let mut relations: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    if let Some(rels) = obj.get("relations") {
        let rels = rels
            .as_object()
            .ok_or_else(|| Error::parse(format!("{at}.relations"), "must be an object"))?;
        for (name, tuples) in rels {
            let here = format!("{at}.relations.{name}");
            let tuples = tuples
                .as_array()
                .ok_or_else(|| Error::parse(&here, "must be an array of tuples"))?;
            let mut list = Vec::with_capacity(tuples.len());
            for (i, t) in tuples.iter().enumerate() {
                let there = format!("{here}[{i}]");
                let t = t
                    .as_array()
                    .ok_or_else(|| Error::parse(&there, "tuple must be an array"))?;
                list.push(
                    t.iter()
                        .enumerate()
                        .map(|(j, e)| element_id(e, &format!("{there}[{j}]")))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            relations.push((name.clone(), list));
        }
    }
    Structure::new(signature, elements, &relations)
}
