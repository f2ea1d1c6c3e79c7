//! Path expressions: the intermediate language between ConQuer text and relational algebra.

mod ast;
mod ops;
mod translate;
mod typing;
mod visit;

pub use ast::*;
pub use ops::*;
pub use translate::*;
pub use typing::*;

use crate::relalg::EvalError;
use crate::schema::{AttrName, SchemaError, TypeId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("incompatible variable typing: {attr} is typed both {x} and {y}, which are unrelated")]
    IncompatibleTyping { attr: AttrName, x: TypeId, y: TypeId },
    #[error("untyped attribute {0}")]
    Untyped(AttrName),
    #[error("unbound attribute {0}")]
    Unbound(AttrName),
    #[error("attribute {0} is not in the header of the shuffled path")]
    ShuffleAttr(AttrName),
    #[error("a path shuffle needs at least two attributes")]
    ShuffleArity,
    #[error("grouping attribute {0} is not in the header")]
    GroupAttr(AttrName),
    #[error("attribute {0} is not a relationship instance")]
    NotRelationship(AttrName),
    #[error("the empty path cannot be evaluated")]
    EmptyPath,
    #[error("{0}")]
    Denotation(String),
    #[error("{0}")]
    Macro(String),
    #[error("{0}")]
    Derivation(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
