//! Exit codes and the error document.

use ocasync::formula::ParseError;
use ocasync::formula::UnknownAtom;
use ocasync::lps::LpsError;
use ocasync::mc::{CheckError, LabelError};
use ocasync::oca::{DslError, OcaError};
use ocasync::oracle::lemma11::Lemma11Error;
use ocasync::oracle::mine::MineError;
use ocasync::oracle::OracleError;
use ocasync::periodicity::PeriodicityError;
use ocasync::quantity::QuantityError;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Input,
    Budget,
    Internal,
}

impl Kind {
    pub fn code(self) -> i32 {
        match self {
            Kind::Input => 1,
            Kind::Budget => 2,
            Kind::Internal => 3,
        }
    }
}

/// An error raised on purpose with a fixed kind and extra JSON fields.
#[derive(Debug)]
pub struct Tagged {
    pub kind: Kind,
    pub message: String,
    pub extra: Value,
}

impl std::fmt::Display for Tagged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Tagged {}

pub fn input(message: impl Into<String>) -> anyhow::Error {
    Tagged { kind: Kind::Input, message: message.into(), extra: Value::Null }.into()
}

pub fn internal(message: impl Into<String>) -> anyhow::Error {
    Tagged { kind: Kind::Internal, message: message.into(), extra: Value::Null }.into()
}

fn quantity_kind(e: &QuantityError) -> Kind {
    match e {
        QuantityError::Symbolic(_) | QuantityError::NotMonomial | QuantityError::Unfactorable(_) => Kind::Budget,
        QuantityError::BaseMismatch(..) => Kind::Internal,
    }
}

fn periodicity_kind(e: &PeriodicityError) -> Kind {
    match e {
        PeriodicityError::Quantity(q) => quantity_kind(q),
        PeriodicityError::UeUnsupported(_)
        | PeriodicityError::ZeroPeriod
        | PeriodicityError::NoStates
        | PeriodicityError::PeriodNotAboveThreshold { .. } => Kind::Input,
        _ => Kind::Internal,
    }
}

fn position(line: usize, col: usize) -> Value {
    json!({ "line": line, "column": col })
}

/// Kind and positional details of the innermost recognised cause.
fn inspect(err: &anyhow::Error) -> (Kind, Value) {
    for cause in err.chain() {
        if let Some(t) = cause.downcast_ref::<Tagged>() {
            return (t.kind, t.extra.clone());
        }
        if let Some(e) = cause.downcast_ref::<ParseError>() {
            return (Kind::Input, position(e.line, e.col));
        }
        if let Some(e) = cause.downcast_ref::<DslError>() {
            return (Kind::Input, position(e.line, e.col));
        }
        if let Some(e) = cause.downcast_ref::<OcaError>() {
            return match e {
                OcaError::Dsl(d) => (Kind::Input, position(d.line, d.col)),
                OcaError::Invalid(diags) => (Kind::Input, json!({ "diagnostics": diags })),
                _ => (Kind::Input, Value::Null),
            };
        }
        if cause.downcast_ref::<UnknownAtom>().is_some() {
            return (Kind::Input, Value::Null);
        }
        if let Some(e) = cause.downcast_ref::<CheckError>() {
            return match e {
                CheckError::Budget { required, budget } => {
                    (Kind::Budget, json!({ "required": required, "budget": budget }))
                }
                CheckError::Sync(_) => (Kind::Budget, Value::Null),
                CheckError::Quantity(q) => (quantity_kind(q), Value::Null),
                CheckError::Periodicity(p) => (periodicity_kind(p), Value::Null),
                CheckError::Mining(MineError::Oracle(OracleError::CapTooLarge(_))) => (Kind::Budget, Value::Null),
                CheckError::Mining(_) | CheckError::ZeroPeriod | CheckError::UnknownAtom(_) | CheckError::Oca(_) => {
                    (Kind::Input, Value::Null)
                }
            };
        }
        if cause.downcast_ref::<LabelError>().is_some() {
            return (Kind::Budget, Value::Null);
        }
        if let Some(e) = cause.downcast_ref::<OracleError>() {
            return match e {
                OracleError::CapTooLarge(_) => (Kind::Budget, Value::Null),
                _ => (Kind::Input, Value::Null),
            };
        }
        if let Some(e) = cause.downcast_ref::<MineError>() {
            return match e {
                MineError::Oracle(OracleError::CapTooLarge(_)) => (Kind::Budget, Value::Null),
                MineError::Overflow(_) => (Kind::Budget, Value::Null),
                _ => (Kind::Input, Value::Null),
            };
        }
        if let Some(e) = cause.downcast_ref::<Lemma11Error>() {
            return match e {
                Lemma11Error::TooLarge(_) => (Kind::Budget, Value::Null),
                Lemma11Error::Periodicity(p) => (periodicity_kind(p), Value::Null),
            };
        }
        if let Some(e) = cause.downcast_ref::<PeriodicityError>() {
            return (periodicity_kind(e), Value::Null);
        }
        if let Some(e) = cause.downcast_ref::<QuantityError>() {
            return (quantity_kind(e), Value::Null);
        }
        if cause.downcast_ref::<LpsError>().is_some() {
            return (Kind::Input, Value::Null);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() || cause.downcast_ref::<serde_json::Error>().is_some() {
            return (Kind::Input, Value::Null);
        }
    }
    (Kind::Internal, Value::Null)
}

/// The error document and its exit code.
pub fn report(err: &anyhow::Error) -> (Value, i32) {
    let (kind, extra) = inspect(err);
    let mut body = json!({ "kind": kind, "message": format!("{err:#}") });
    if let Value::Object(fields) = extra {
        body.as_object_mut().expect("object").extend(fields);
    }
    (json!({ "error": body }), kind.code())
}
