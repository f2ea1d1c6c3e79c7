//! ConQuer-92: a conceptual query language over ORM schemas.
//!
//! Queries are parsed into path expressions, translated into a bag-valued relational
//! algebra and evaluated against a population. Path expressions verbalise back into
//! query text.

pub mod front;
pub mod multiset;
pub mod path;
pub mod relalg;
pub mod schema;
pub mod session;
pub mod value;
pub mod verbal;
