//! Typed reading of input documents with JSON-pointer error paths, and
//! the matching writers.

use std::collections::BTreeMap;
use std::str::FromStr;

use mdcrt::{BigInt, IntMatrix, IntVector, Matrix, Vector};
use num_traits::ToPrimitive;
use serde_json::{Map, Value};

/// Largest integer magnitude written as a JSON number.
const SAFE_MAX: i64 = (1 << 53) - 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

pub type Parsed<T> = Result<T, SchemaError>;

/// A value together with its location in the input document.
#[derive(Clone, Copy)]
pub struct Node<'a> {
    pub value: &'a Value,
    pointer: &'a str,
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

impl<'a> Node<'a> {
    pub fn root(value: &'a Value) -> Self {
        Node { value, pointer: "" }
    }

    pub fn pointer(&self) -> &str {
        if self.pointer.is_empty() {
            "/"
        } else {
            self.pointer
        }
    }

    pub fn error<T>(&self, message: impl Into<String>) -> Parsed<T> {
        Err(SchemaError { pointer: self.pointer().to_string(), message: message.into() })
    }

    fn child<R>(&self, token: &str, value: &Value, f: impl FnOnce(Node<'_>) -> Parsed<R>) -> Parsed<R> {
        let pointer = format!("{}/{}", self.pointer, escape(token));
        f(Node { value, pointer: &pointer })
    }

    /// Checks that this is an object holding only `allowed` keys.
    pub fn object(&self, allowed: &[&str]) -> Parsed<&'a Map<String, Value>> {
        let Value::Object(map) = self.value else {
            return self.error("expected an object");
        };
        if let Some(key) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            let pointer = format!("{}/{}", self.pointer, escape(key));
            return Err(SchemaError { pointer, message: "unknown property".into() });
        }
        Ok(map)
    }

    pub fn field<R>(&self, key: &str, f: impl FnOnce(Node<'_>) -> Parsed<R>) -> Parsed<R> {
        match self.value.get(key) {
            Some(v) => self.child(key, v, f),
            None => Err(SchemaError {
                pointer: format!("{}/{}", self.pointer, escape(key)),
                message: "required property is missing".into(),
            }),
        }
    }

    pub fn optional<R>(&self, key: &str, f: impl FnOnce(Node<'_>) -> Parsed<R>) -> Parsed<Option<R>> {
        match self.value.get(key) {
            Some(Value::Null) | None => Ok(None),
            Some(v) => self.child(key, v, f).map(Some),
        }
    }

    pub fn items<R>(&self, mut f: impl FnMut(Node<'_>) -> Parsed<R>) -> Parsed<Vec<R>> {
        let Value::Array(items) = self.value else {
            return self.error("expected an array");
        };
        items.iter().enumerate().map(|(i, v)| self.child(&i.to_string(), v, &mut f)).collect()
    }

    pub fn non_empty_items<R>(&self, f: impl FnMut(Node<'_>) -> Parsed<R>) -> Parsed<Vec<R>> {
        let out = self.items(f)?;
        if out.is_empty() {
            return self.error("expected a non-empty array");
        }
        Ok(out)
    }
}

/// An integer given as a JSON number or a decimal string.
pub fn int(n: Node<'_>) -> Parsed<BigInt> {
    let text = match n.value {
        Value::Number(num) => num.to_string(),
        Value::String(s) => s.clone(),
        _ => return n.error("expected an integer"),
    };
    let digits = text.strip_prefix('-').unwrap_or(&text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return n.error(format!("expected an integer, got {text}"));
    }
    BigInt::from_str(&text).or_else(|_| n.error(format!("expected an integer, got {text}")))
}

pub fn usize_value(n: Node<'_>) -> Parsed<usize> {
    let v = int(n)?;
    v.to_usize().map_or_else(|| n.error(format!("expected a nonnegative integer, got {v}")), Ok)
}

pub fn real(n: Node<'_>) -> Parsed<f64> {
    match n.value {
        Value::Number(num) => num.as_f64().map_or_else(|| n.error("expected a finite number"), Ok),
        _ => n.error("expected a number"),
    }
}

pub fn boolean(n: Node<'_>) -> Parsed<bool> {
    n.value.as_bool().map_or_else(|| n.error("expected a boolean"), Ok)
}

pub fn vector(n: Node<'_>) -> Parsed<IntVector> {
    Ok(Vector::new(n.non_empty_items(int)?))
}

/// A vector of the given dimension.
pub fn vector_of(dim: usize) -> impl Fn(Node<'_>) -> Parsed<IntVector> {
    move |n| {
        let v = vector(n)?;
        if v.dim() != dim {
            return n.error(format!("expected {dim} entries, got {}", v.dim()));
        }
        Ok(v)
    }
}

/// A square matrix given row by row.
pub fn matrix(n: Node<'_>) -> Parsed<IntMatrix> {
    let rows = n.non_empty_items(|r| r.non_empty_items(int))?;
    let size = rows.len();
    if let Some(i) = rows.iter().position(|r| r.len() != rows[0].len()) {
        return n.child(&i.to_string(), &n.value[i], |r| r.error(format!("row has {} entries, expected {}", rows[i].len(), rows[0].len())));
    }
    if rows[0].len() != size {
        return n.error(format!("matrix must be square, got {size}x{}", rows[0].len()));
    }
    Ok(Matrix::new(size, size, rows.into_iter().flatten().collect()).expect("dimensions checked"))
}

/// A non-empty list of square matrices of one common size.
pub fn moduli(n: Node<'_>) -> Parsed<Vec<IntMatrix>> {
    let ms = n.non_empty_items(matrix)?;
    let dim = ms[0].rows();
    if let Some(i) = ms.iter().position(|m| m.rows() != dim) {
        return n.child(&i.to_string(), &n.value[i], |m| m.error(format!("expected a {dim}x{dim} matrix")));
    }
    Ok(ms)
}

/// `[{"subset": [0, 1], "lcrm": [[...]]}, ...]` keyed by subset.
pub fn overrides(n: Node<'_>) -> Parsed<BTreeMap<Vec<usize>, IntMatrix>> {
    let entries = n.items(|e| {
        e.object(&["subset", "lcrm"])?;
        Ok((e.field("subset", |s| s.items(usize_value))?, e.field("lcrm", matrix)?))
    })?;
    let mut out = BTreeMap::new();
    for (i, (subset, m)) in entries.into_iter().enumerate() {
        if out.insert(subset, m).is_some() {
            return n.child(&i.to_string(), &n.value[i], |e| e.error("duplicate subset"));
        }
    }
    Ok(out)
}

pub fn write_int(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(x) if x.abs() <= SAFE_MAX => Value::from(x),
        _ => Value::String(v.to_string()),
    }
}

pub fn write_usize(v: usize) -> Value {
    write_int(&BigInt::from(v))
}

pub fn write_vector(v: &IntVector) -> Value {
    Value::Array(v.iter().map(write_int).collect())
}

pub fn write_vectors<'a>(vs: impl IntoIterator<Item = &'a IntVector>) -> Value {
    Value::Array(vs.into_iter().map(write_vector).collect())
}

pub fn write_matrix(m: &IntMatrix) -> Value {
    Value::Array(m.row_vecs().iter().map(|r| Value::Array(r.iter().map(write_int).collect())).collect())
}

pub fn write_indices(xs: &[usize]) -> Value {
    Value::Array(xs.iter().map(|&x| write_usize(x)).collect())
}
