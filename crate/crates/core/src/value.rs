//! Field values, schemas, and the records that hold agent state and message
//! payloads.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::graph::NodeId;
use crate::number::Number;

/// Absolute tolerance for deciding whether a floating field changed.
pub const FLOAT_CHANGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Int,
    /// Integer or floating number.
    Number,
    Bool,
    Node,
    NodeList,
    /// Collection of (node, number) pairs.
    WeightedNodes,
    Text,
    /// Number or `Unreachable`.
    Distance,
    MaybeInt,
    MaybeNode,
    MaybeNumber,
}

impl ValueKind {
    pub fn describe(self) -> &'static str {
        match self {
            ValueKind::Int => "integer",
            ValueKind::Number => "number",
            ValueKind::Bool => "boolean (True/False)",
            ValueKind::Node => "node id",
            ValueKind::NodeList => "list of node ids, e.g. [0, 3]",
            ValueKind::WeightedNodes => "list of (node id, number) pairs, e.g. [(0, 2), (3, 1)]",
            ValueKind::Text => "text",
            ValueKind::Distance => "number or \\infinity",
            ValueKind::MaybeInt => "integer or unset",
            ValueKind::MaybeNode => "node id or unset",
            ValueKind::MaybeNumber => "number or unset",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Node(NodeId),
    Nodes(Vec<NodeId>),
    Pairs(Vec<(NodeId, Number)>),
    Text(String),
    /// Distance to a node no path reaches. Saturates under addition.
    #[serde(serialize_with = "ser_unreachable")]
    Unreachable,
    /// Absent optional value.
    #[serde(serialize_with = "ser_unset")]
    Unset,
}

fn ser_unreachable<S: serde::Serializer>(s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str("unreachable")
}

fn ser_unset<S: serde::Serializer>(s: S) -> Result<S::Ok, S::Error> {
    s.serialize_none()
}

impl From<Number> for Value {
    fn from(n: Number) -> Self {
        match n {
            Number::Int(i) => Value::Int(i),
            Number::Float(f) => Value::Float(f),
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl Value {
    pub fn conforms_to(&self, kind: ValueKind) -> bool {
        use Value as V;
        use ValueKind as K;
        match (kind, self) {
            (K::Int, V::Int(_)) => true,
            (K::Number, V::Int(_)) => true,
            (K::Number, V::Float(f)) => f.is_finite(),
            (K::Bool, V::Bool(_)) => true,
            (K::Node, V::Node(_)) => true,
            (K::NodeList, V::Nodes(_)) => true,
            (K::WeightedNodes, V::Pairs(ps)) => ps.iter().all(|(_, n)| n.is_finite()),
            (K::Text, V::Text(_)) => true,
            (K::Distance, V::Int(_) | V::Unreachable) => true,
            (K::Distance, V::Float(f)) => f.is_finite(),
            (K::MaybeInt, V::Int(_) | V::Unset) => true,
            (K::MaybeNode, V::Node(_) | V::Unset) => true,
            (K::MaybeNumber, V::Int(_) | V::Unset) => true,
            (K::MaybeNumber, V::Float(f)) => f.is_finite(),
            _ => false,
        }
    }

    pub fn as_number(&self) -> Option<Number> {
        match *self {
            Value::Int(i) => Some(Number::Int(i)),
            Value::Float(f) => Some(Number::Float(f)),
            _ => None,
        }
    }

    /// Structural equality with floats compared to within `tol`.
    pub fn approx_eq(&self, other: &Value, tol: f64) -> bool {
        match (self, other) {
            (Value::Float(a), Value::Float(b)) => (a - b).abs() <= tol,
            (Value::Pairs(a), Value::Pairs(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|((u, x), (v, y))| u == v && x.approx_eq(*y, tol))
            }
            _ => self == other,
        }
    }

    /// Parses the textual form used in prompts and replies.
    pub fn parse(kind: ValueKind, text: &str) -> Result<Value, String> {
        let t = text.trim().trim_matches('`').trim();
        let lower = t.to_ascii_lowercase();
        let is_unset = matches!(lower.as_str(), "unset" | "none" | "null" | "-");
        let err = || format!("`{t}` is not a valid {}", kind.describe());
        let node = |s: &str| s.trim().parse::<NodeId>().map_err(|_| err());
        let number = |s: &str| s.trim().parse::<Number>().map_err(|_| err());
        match kind {
            ValueKind::Int => t.parse::<i64>().map(Value::Int).map_err(|_| err()),
            ValueKind::Number => number(t).map(Value::from),
            ValueKind::Bool => match lower.as_str() {
                "true" | "yes" => Ok(Value::Bool(true)),
                "false" | "no" => Ok(Value::Bool(false)),
                _ => Err(err()),
            },
            ValueKind::Node => node(t).map(Value::Node),
            ValueKind::NodeList => {
                let inner = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or_else(err)?;
                if inner.trim().is_empty() {
                    return Ok(Value::Nodes(Vec::new()));
                }
                inner.split(',').map(node).collect::<Result<_, _>>().map(Value::Nodes)
            }
            ValueKind::WeightedNodes => {
                let inner = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or_else(err)?;
                let mut pairs = Vec::new();
                for chunk in inner.split(')') {
                    let chunk = chunk.trim().trim_start_matches(',').trim();
                    if chunk.is_empty() {
                        continue;
                    }
                    let body = chunk.strip_prefix('(').ok_or_else(err)?;
                    let (a, b) = body.split_once(',').ok_or_else(err)?;
                    pairs.push((node(a)?, number(b)?));
                }
                Ok(Value::Pairs(pairs))
            }
            ValueKind::Text => Ok(Value::Text(t.to_string())),
            ValueKind::Distance => match lower.trim_start_matches('\\') {
                "infinity" | "inf" | "∞" | "unreachable" => Ok(Value::Unreachable),
                _ => number(t).map(Value::from),
            },
            ValueKind::MaybeInt if is_unset => Ok(Value::Unset),
            ValueKind::MaybeInt => t.parse::<i64>().map(Value::Int).map_err(|_| err()),
            ValueKind::MaybeNode if is_unset => Ok(Value::Unset),
            ValueKind::MaybeNode => node(t).map(Value::Node),
            ValueKind::MaybeNumber if is_unset => Ok(Value::Unset),
            ValueKind::MaybeNumber => number(t).map(Value::from),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{}", Number::Float(*x)),
            Value::Bool(true) => f.write_str("True"),
            Value::Bool(false) => f.write_str("False"),
            Value::Node(v) => write!(f, "{v}"),
            Value::Nodes(vs) => {
                f.write_str("[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::Pairs(ps) => {
                f.write_str("[")?;
                for (i, (v, n)) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "({v}, {n})")?;
                }
                f.write_str("]")
            }
            Value::Text(s) => f.write_str(s),
            Value::Unreachable => f.write_str("\\infinity"),
            Value::Unset => f.write_str("unset"),
        }
    }
}

/// Saturating distance arithmetic over `Value::Unreachable`.
pub fn distance_plus(d: &Value, w: Number) -> Value {
    match d.as_number() {
        Some(n) => Value::from(n + w),
        None => Value::Unreachable,
    }
}

/// Orders distances with `Unreachable` above every number.
pub fn distance_lt(a: &Value, b: &Value) -> bool {
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => x.cmp_numeric(y).is_lt(),
        (Some(_), None) => true,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSpec {
    pub name: &'static str,
    pub kind: ValueKind,
    pub doc: &'static str,
}

/// Ordered field declarations for a state or message.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Schema {
    fields: Vec<FieldSpec>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemaMismatch {
    #[error("missing field `{0}`")]
    Missing(String),
    #[error("undeclared field `{0}`")]
    Undeclared(String),
    #[error("field `{field}` = {value} is not a {expected}")]
    WrongKind { field: String, value: String, expected: &'static str },
}

impl Schema {
    pub fn new(fields: Vec<FieldSpec>) -> Self {
        Schema { fields }
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    pub fn kind_of(&self, name: &str) -> Option<ValueKind> {
        self.fields.iter().find(|f| f.name == name).map(|f| f.kind)
    }

    pub fn validate(&self, record: &Record) -> Result<(), SchemaMismatch> {
        for f in &self.fields {
            let v = record.get(f.name).ok_or_else(|| SchemaMismatch::Missing(f.name.into()))?;
            if !v.conforms_to(f.kind) {
                return Err(SchemaMismatch::WrongKind {
                    field: f.name.into(),
                    value: v.to_string(),
                    expected: f.kind.describe(),
                });
            }
        }
        if let Some(extra) = record.0.keys().find(|k| self.kind_of(k).is_none()) {
            return Err(SchemaMismatch::Undeclared(extra.clone()));
        }
        Ok(())
    }

    /// Numbered `field: value` lines in declaration order.
    pub fn render(&self, record: &Record) -> String {
        self.render_with(record, "\n")
    }

    pub fn render_inline(&self, record: &Record) -> String {
        self.render_with(record, " ")
    }

    fn render_with(&self, record: &Record, sep: &str) -> String {
        self.fields
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let v = record.get(f.name).map(Value::to_string).unwrap_or_default();
                format!("{}. {}: {}", i + 1, f.name, v)
            })
            .collect::<Vec<_>>()
            .join(sep)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("field `{field}`: {reason}")]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

/// A named-field value map: an agent's state or a message payload.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct Record(BTreeMap<String, Value>);

pub type VertexState = Record;
pub type Payload = Record;

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: impl Into<Value>) {
        self.0.insert(name.to_string(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn field(&self, name: &str) -> Result<&Value, FieldError> {
        self.0.get(name).ok_or_else(|| FieldError { field: name.into(), reason: "missing".into() })
    }

    fn wrong(name: &str, v: &Value, what: &str) -> FieldError {
        FieldError { field: name.into(), reason: format!("expected {what}, found {v}") }
    }

    pub fn value(&self, name: &str) -> Result<&Value, FieldError> {
        self.field(name)
    }

    pub fn int(&self, name: &str) -> Result<i64, FieldError> {
        match self.field(name)? {
            Value::Int(i) => Ok(*i),
            v => Err(Self::wrong(name, v, "integer")),
        }
    }

    pub fn number(&self, name: &str) -> Result<Number, FieldError> {
        let v = self.field(name)?;
        v.as_number().ok_or_else(|| Self::wrong(name, v, "number"))
    }

    pub fn float(&self, name: &str) -> Result<f64, FieldError> {
        self.number(name).map(Number::as_f64)
    }

    pub fn boolean(&self, name: &str) -> Result<bool, FieldError> {
        match self.field(name)? {
            Value::Bool(b) => Ok(*b),
            v => Err(Self::wrong(name, v, "boolean")),
        }
    }

    pub fn node(&self, name: &str) -> Result<NodeId, FieldError> {
        match self.field(name)? {
            Value::Node(n) => Ok(*n),
            v => Err(Self::wrong(name, v, "node id")),
        }
    }

    pub fn nodes(&self, name: &str) -> Result<&[NodeId], FieldError> {
        match self.field(name)? {
            Value::Nodes(n) => Ok(n),
            v => Err(Self::wrong(name, v, "node list")),
        }
    }

    pub fn maybe_int(&self, name: &str) -> Result<Option<i64>, FieldError> {
        match self.field(name)? {
            Value::Int(i) => Ok(Some(*i)),
            Value::Unset => Ok(None),
            v => Err(Self::wrong(name, v, "integer or unset")),
        }
    }

    pub fn maybe_node(&self, name: &str) -> Result<Option<NodeId>, FieldError> {
        match self.field(name)? {
            Value::Node(n) => Ok(Some(*n)),
            Value::Unset => Ok(None),
            v => Err(Self::wrong(name, v, "node id or unset")),
        }
    }

    pub fn maybe_number(&self, name: &str) -> Result<Option<Number>, FieldError> {
        match self.field(name)? {
            Value::Unset => Ok(None),
            v => v.as_number().map(Some).ok_or_else(|| Self::wrong(name, v, "number or unset")),
        }
    }

    /// Same field set, each value equal within `tol` for floats.
    pub fn approx_eq(&self, other: &Record, tol: f64) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(other.0.iter()).all(|((ka, va), (kb, vb))| ka == kb && va.approx_eq(vb, tol))
    }
}

impl FromIterator<(String, Value)> for Record {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        Record(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_parse_round_trip_per_kind() {
        let cases = [
            (ValueKind::Int, Value::Int(-4)),
            (ValueKind::Number, Value::Float(0.125)),
            (ValueKind::Number, Value::Float(2.0)),
            (ValueKind::Bool, Value::Bool(false)),
            (ValueKind::Node, Value::Node(7)),
            (ValueKind::NodeList, Value::Nodes(vec![1, 5, 9])),
            (ValueKind::NodeList, Value::Nodes(vec![])),
            (ValueKind::WeightedNodes, Value::Pairs(vec![(0, Number::Int(2)), (3, Number::Float(1.5))])),
            (ValueKind::Distance, Value::Unreachable),
            (ValueKind::Distance, Value::Int(14)),
            (ValueKind::MaybeInt, Value::Unset),
            (ValueKind::MaybeNode, Value::Node(3)),
            (ValueKind::MaybeNumber, Value::Int(11)),
        ];
        for (kind, v) in cases {
            assert!(v.conforms_to(kind));
            assert_eq!(Value::parse(kind, &v.to_string()).unwrap(), v, "{kind:?}");
        }
    }

    #[test]
    fn appendix_spellings_parse() {
        assert_eq!(Value::parse(ValueKind::Distance, "\\infinity").unwrap(), Value::Unreachable);
        assert_eq!(Value::parse(ValueKind::Bool, "True").unwrap(), Value::Bool(true));
        assert_eq!(Value::parse(ValueKind::Bool, "`False`").unwrap(), Value::Bool(false));
        assert!(Value::parse(ValueKind::Int, "seven").is_err());
    }

    #[test]
    fn distance_arithmetic_saturates() {
        assert_eq!(distance_plus(&Value::Unreachable, Number::Int(3)), Value::Unreachable);
        assert_eq!(distance_plus(&Value::Int(4), Number::Int(3)), Value::Int(7));
        assert!(distance_lt(&Value::Int(1_000_000), &Value::Unreachable));
        assert!(!distance_lt(&Value::Unreachable, &Value::Unreachable));
    }

    #[test]
    fn schema_validation() {
        let schema = Schema::new(vec![FieldSpec { name: "distance", kind: ValueKind::Distance, doc: "" }]);
        assert!(schema.validate(&Record::new().with("distance", Value::Unreachable)).is_ok());
        assert_eq!(schema.validate(&Record::new()), Err(SchemaMismatch::Missing("distance".into())));
        assert!(matches!(
            schema.validate(&Record::new().with("distance", true)),
            Err(SchemaMismatch::WrongKind { .. })
        ));
        assert!(matches!(
            schema.validate(&Record::new().with("distance", Value::Int(1)).with("x", Value::Int(1))),
            Err(SchemaMismatch::Undeclared(_))
        ));
        assert_eq!(schema.render(&Record::new().with("distance", Value::Int(7))), "1. distance: 7");
    }

    #[test]
    fn float_tolerance_in_change_detection() {
        let a = Record::new().with("rank", Value::Float(0.25));
        let b = Record::new().with("rank", Value::Float(0.25 + 1e-13));
        let c = Record::new().with("rank", Value::Float(0.25 + 1e-9));
        assert!(a.approx_eq(&b, FLOAT_CHANGE_TOLERANCE));
        assert!(!a.approx_eq(&c, FLOAT_CHANGE_TOLERANCE));
    }
}
