//! ConQuer text to path expressions: tokens, record trees, lowering, and the
//! handling of ambiguous and incorrect queries.

pub mod lexer;
pub mod lower;
mod parser;
pub mod records;

use std::collections::BTreeSet;

pub use lexer::{tokenize, LexError, Tok, Token};
pub use lower::{LowerError, Lowerer};
pub use records::{dump_list, dump_records, normalise_listing, parse_dump, DumpError, ListRec, OrderWord, Rec};

use crate::path::{expand_macros, head_tail_combos, infer_typing, normalise, Order, PathError, PathExpr, PeScalar, Typing};
use crate::schema::{AttrName, Idf, Schema};
use crate::value::Value;
use parser::{Names, Parser};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrontError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{line}:{col}: syntax error at {found}; expected {}", expected.join(", "))]
    Syntax { line: usize, col: usize, found: String, expected: Vec<String> },
    #[error("{line}:{col}: unknown name '{name}'{}", suggest(candidates))]
    UnknownName { name: String, line: usize, col: usize, candidates: Vec<String> },
    #[error("incorrect query: {}", diagnostics.join("; "))]
    Incorrect { diagnostics: Vec<String> },
    #[error("no interpretation: {}", .0.join("; "))]
    NoInterpretation(Vec<String>),
    #[error("{0}")]
    Order(String),
    #[error(transparent)]
    Dump(#[from] DumpError),
}

fn suggest(c: &[String]) -> String {
    if c.is_empty() {
        String::new()
    } else {
        format!(" (did you mean {}?)", c.iter().map(|x| format!("'{x}'")).collect::<Vec<_>>().join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    pub record: Rec,
    pub path: PathExpr,
    pub typing: Typing,
    /// Set when the interpretation is one of several survivors.
    pub verbalisation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseResult {
    pub interpretations: Vec<Interpretation>,
    /// Why the discarded readings were discarded.
    pub diagnostics: Vec<String>,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ListOrder {
    None,
    WholeAsc,
    WholeDesc,
    PerVar(Vec<(AttrName, Order)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListStatement {
    pub projection: Option<Vec<PeScalar>>,
    pub body: ParseResult,
    pub order: ListOrder,
    pub records: Vec<ListRec>,
}

fn syntax_error(toks: &[Token], p: &Parser<'_>, names: &Names) -> FrontError {
    let at = toks.get(p.furthest);
    let (line, col) = match (at, toks.last()) {
        (Some(t), _) => (t.line, t.col),
        (None, Some(t)) => (t.line, t.col + t.tok.to_string().chars().count()),
        (None, None) => (1, 1),
    };
    // a capitalised word no name contains is more likely a misspelling than a syntax slip
    for t in toks {
        if let Tok::Word(w) = &t.tok {
            if w.chars().next().is_some_and(char::is_uppercase) && !names.words.contains(w) {
                let mut cands: Vec<(usize, String)> = names
                    .phrases
                    .iter()
                    .map(|ph| (strsim::levenshtein(w, ph), ph.clone()))
                    .filter(|(d, _)| *d <= 2)
                    .collect();
                cands.sort();
                return FrontError::UnknownName {
                    name: w.clone(),
                    line: t.line,
                    col: t.col,
                    candidates: cands.into_iter().map(|(_, c)| c).collect(),
                };
            }
        }
    }
    FrontError::Syntax {
        line,
        col,
        found: at.map_or("end of input".into(), |t| format!("'{}'", t.tok)),
        expected: p.expected.iter().cloned().collect(),
    }
}

/// Lowers, expands and types each record tree; failures become diagnostics.
pub fn interpret(schema: &Schema, recs: Vec<Rec>) -> ParseResult {
    let mut interpretations: Vec<Interpretation> = Vec::new();
    let mut diagnostics = Vec::new();
    for record in recs {
        let lowered = Lowerer::new(schema).path(&record).map_err(|e| e.to_string()).and_then(|p| {
            let p = expand_macros(schema, &p).map_err(|e| e.to_string())?;
            let t = infer_typing(schema, &p).map_err(|e| e.to_string())?;
            Ok((p, t))
        });
        match lowered {
            Ok((path, typing)) => {
                if !interpretations.iter().any(|i| i.path == path) {
                    interpretations.push(Interpretation { record, path, typing, verbalisation: None });
                }
            }
            Err(e) => {
                if !diagnostics.contains(&e) {
                    diagnostics.push(e);
                }
            }
        }
    }
    ParseResult { interpretations, diagnostics, ambiguous: false }
}

/// Every reading of `text`, before structural filtering.
pub fn parse_all(text: &str, schema: &Schema) -> Result<ParseResult, FrontError> {
    let toks = tokenize(text)?;
    let names = Names::new(schema);
    let mut p = Parser::new(&toks, schema, &names);
    if toks.is_empty() {
        p.expect_here(0, "a descriptor");
        return Err(syntax_error(&toks, &p, &names));
    }
    let recs = p.descriptors();
    if recs.is_empty() {
        p.note_trailing();
        return Err(syntax_error(&toks, &p, &names));
    }
    let mut r = interpret(schema, recs);
    if p.truncated {
        r.diagnostics.push("too many readings; some were not considered".into());
    }
    Ok(r)
}

pub fn parse(text: &str, schema: &Schema) -> Result<ParseResult, FrontError> {
    disambiguate(schema, parse_all(text, schema)?)
}

/// Drops structurally empty readings; several survivors are verbalised so the user can choose.
pub fn disambiguate(schema: &Schema, mut r: ParseResult) -> Result<ParseResult, FrontError> {
    let mut kept = Vec::new();
    for i in r.interpretations {
        match head_tail_combos(schema, &i.path, &i.typing) {
            Ok(c) if !c.is_empty() => match empty_part(schema, &i) {
                None => kept.push(i),
                Some(q) => r.diagnostics.push(format!("structurally empty part {q} in reading: {}", i.path)),
            },
            Ok(_) => r.diagnostics.push(format!("structurally empty reading: {}", i.path)),
            Err(e) => r.diagnostics.push(e.to_string()),
        }
    }
    if kept.is_empty() {
        return Err(if r.diagnostics.is_empty() {
            FrontError::NoInterpretation(vec!["no reading".into()])
        } else {
            FrontError::Incorrect { diagnostics: r.diagnostics }
        });
    }
    r.ambiguous = kept.len() > 1;
    if r.ambiguous {
        for i in &mut kept {
            let n = normalise(schema, &i.path);
            let ctx = crate::verbal::VerbalisationContext::root(schema, i.typing.clone());
            i.verbalisation = crate::verbal::verbalise(schema, &n, &ctx).ok();
        }
    }
    r.interpretations = kept;
    Ok(r)
}

/// A concatenation anywhere in the reading, operands of conditions and aggregates
/// included, that can never yield a tuple.
fn empty_part(schema: &Schema, i: &Interpretation) -> Option<PathExpr> {
    let mut found = None;
    i.path.for_each_path(&mut |q| {
        if found.is_none() && matches!(q, PathExpr::Concat(..)) {
            if let Ok(c) = head_tail_combos(schema, q, &i.typing) {
                if c.is_empty() {
                    found = Some(q.clone());
                }
            }
        }
    });
    found
}

fn order_of(w: OrderWord) -> Order {
    match w {
        OrderWord::Ascending => Order::Asc,
        OrderWord::Descending => Order::Desc,
    }
}

/// Parses a `LIST` statement. Readings are grouped by projection and ordering; the
/// first group that has a structurally sound body wins.
pub fn parse_list(text: &str, schema: &Schema) -> Result<ListStatement, FrontError> {
    let toks = tokenize(text)?;
    let names = Names::new(schema);
    let mut p = Parser::new(&toks, schema, &names);
    let recs = p.list_statements();
    if recs.is_empty() {
        return Err(syntax_error(&toks, &p, &names));
    }
    let mut groups: Vec<(Option<Vec<Rec>>, Option<Vec<(Option<String>, OrderWord)>>, Vec<ListRec>)> = Vec::new();
    for r in recs {
        match groups.iter_mut().find(|(s, o, _)| *s == r.scalars && *o == r.order) {
            Some(g) => g.2.push(r),
            None => groups.push((r.scalars.clone(), r.order.clone(), vec![r])),
        }
    }
    let mut last_err = None;
    for (scalars, order, records) in groups {
        let body = interpret(schema, records.iter().map(|r| r.body.clone()).collect());
        let body = match disambiguate(schema, body) {
            Ok(b) => b,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let projection = match &scalars {
            Some(xs) => {
                let mut lw = Lowerer::new(schema);
                match xs.iter().map(|x| lw.scalar(x)).collect::<Result<Vec<_>, _>>() {
                    Ok(v) => Some(v),
                    Err(e) => {
                        last_err = Some(FrontError::Incorrect { diagnostics: vec![e.to_string()] });
                        continue;
                    }
                }
            }
            None => None,
        };
        let order = match order {
            None => ListOrder::None,
            Some(items) => match items.as_slice() {
                [(None, OrderWord::Ascending)] => ListOrder::WholeAsc,
                [(None, OrderWord::Descending)] => ListOrder::WholeDesc,
                _ => {
                    let attrs: BTreeSet<AttrName> = body.interpretations.iter().flat_map(|i| i.path.attrs()).collect();
                    let mut spec = Vec::new();
                    for (v, w) in &items {
                        let a = lower::attr(v.as_deref().unwrap_or("HEAD"));
                        if !a.is_hd_or_tl() && !attrs.contains(&a) {
                            return Err(FrontError::Order(format!("ordering variable {a} does not occur in the query")));
                        }
                        spec.push((a, order_of(*w)));
                    }
                    ListOrder::PerVar(spec)
                }
            },
        };
        return Ok(ListStatement { projection, body, order, records });
    }
    Err(last_err.unwrap_or_else(|| FrontError::NoInterpretation(vec!["no reading".into()])))
}

/// The values that denote an instance in query text, identifying components first.
pub fn denote_instance(v: &Value, schema: &Schema) -> Result<Vec<Value>, PathError> {
    match v {
        Value::Abstract { key, .. } if key.is_empty() => Err(PathError::Denotation("undenotable instance".into())),
        Value::Abstract { key, .. } => {
            let mut out = Vec::new();
            for k in key {
                out.extend(denote_instance(k, schema)?);
            }
            Ok(out)
        }
        Value::Rel(m) => {
            let fact = m.keys().next().and_then(|r| schema.rel(r));
            let order: Vec<_> = match fact.and_then(|f| schema.idf.get(f)) {
                Some(Idf::Roles(rs)) => rs.clone(),
                _ => m.keys().cloned().collect(),
            };
            let mut out = Vec::new();
            for r in order {
                match m.get(&r) {
                    Some(x) => out.extend(denote_instance(x, schema)?),
                    None => return Err(PathError::Denotation(format!("relationship instance lacks role {r}"))),
                }
            }
            Ok(out)
        }
        other => Ok(vec![other.clone()]),
    }
}
