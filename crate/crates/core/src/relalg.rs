//! Bag relational algebra: expressions, schema function and evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use crate::multiset::{AggError, Bag, Freq};
use crate::schema::{AttrName, RoleId, TypeId};
use crate::value::{Population, Relation, Truth, Tuple, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub const ALL: [CmpOp; 6] = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BagCmp {
    ProperSub,
    Sub,
    Eq,
    Ne,
    Sup,
    ProperSup,
}

impl BagCmp {
    pub fn holds<E: Ord + Clone>(self, a: &Bag<E>, b: &Bag<E>) -> bool {
        match self {
            BagCmp::ProperSub => a.is_subbag(b) && a != b,
            BagCmp::Sub => a.is_subbag(b),
            BagCmp::Eq => a == b,
            BagCmp::Ne => a != b,
            BagCmp::Sup => b.is_subbag(a),
            BagCmp::ProperSup => b.is_subbag(a) && a != b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Logic {
    And,
    Or,
    Xor,
    Implies,
    Iff,
}

impl Logic {
    pub fn apply(self, a: Truth, b: Truth) -> Truth {
        match self {
            Logic::And => a.and(b),
            Logic::Or => a.or(b),
            Logic::Xor => a.xor(b),
            Logic::Implies => a.implies(b),
            Logic::Iff => a.iff(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RaScalar {
    Const(Value),
    Attr(AttrName),
    AttrRole(AttrName, RoleId),
    Count(Box<RelExpr>),
    Sum(Box<RelExpr>, AttrName),
    Min(Box<RelExpr>, AttrName),
    Max(Box<RelExpr>, AttrName),
    Avg(Box<RelExpr>, AttrName),
    Apply(String, Vec<RaScalar>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RaCond {
    Const(Truth),
    Compare(RaScalar, CmpOp, RaScalar),
    BagCompare(Box<RelExpr>, BagCmp, Box<RelExpr>),
    Member(RaScalar, Box<RelExpr>, AttrName),
    Not(Box<RaCond>),
    Connect(Box<RaCond>, Logic, Box<RaCond>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RelExpr {
    Project(BTreeMap<AttrName, RaScalar>, Box<RelExpr>),
    Extend(BTreeMap<AttrName, RaScalar>, Box<RelExpr>),
    /// new name → old name
    Rename(BTreeMap<AttrName, AttrName>, Box<RelExpr>),
    DropAttrs(BTreeSet<AttrName>, Box<RelExpr>),
    Select(RaCond, Box<RelExpr>),
    TypeTable(AttrName, TypeId),
    Distinct(Box<RelExpr>),
    Group(BTreeSet<AttrName>, Box<RelExpr>),
    Join(Box<RelExpr>, Box<RelExpr>),
    LeftJoin(Box<RelExpr>, Box<RelExpr>),
    Union(Box<RelExpr>, Box<RelExpr>),
    Intersect(Box<RelExpr>, Box<RelExpr>),
    Diff(Box<RelExpr>, Box<RelExpr>),
    ScalarTable(AttrName, RaScalar),
}

/// Small constructor helpers, used heavily by the path translation.
impl RelExpr {
    pub fn project<I: IntoIterator<Item = (AttrName, RaScalar)>>(r: I, e: RelExpr) -> Self {
        RelExpr::Project(r.into_iter().collect(), Box::new(e))
    }
    pub fn extend<I: IntoIterator<Item = (AttrName, RaScalar)>>(r: I, e: RelExpr) -> Self {
        RelExpr::Extend(r.into_iter().collect(), Box::new(e))
    }
    pub fn rename<I: IntoIterator<Item = (AttrName, AttrName)>>(r: I, e: RelExpr) -> Self {
        RelExpr::Rename(r.into_iter().collect(), Box::new(e))
    }
    pub fn drop<I: IntoIterator<Item = AttrName>>(a: I, e: RelExpr) -> Self {
        RelExpr::DropAttrs(a.into_iter().collect(), Box::new(e))
    }
    pub fn select(c: RaCond, e: RelExpr) -> Self {
        RelExpr::Select(c, Box::new(e))
    }
    pub fn distinct(e: RelExpr) -> Self {
        RelExpr::Distinct(Box::new(e))
    }
    pub fn join(a: RelExpr, b: RelExpr) -> Self {
        RelExpr::Join(Box::new(a), Box::new(b))
    }
    pub fn left_join(a: RelExpr, b: RelExpr) -> Self {
        RelExpr::LeftJoin(Box::new(a), Box::new(b))
    }
    pub fn union(a: RelExpr, b: RelExpr) -> Self {
        RelExpr::Union(Box::new(a), Box::new(b))
    }
    pub fn intersect(a: RelExpr, b: RelExpr) -> Self {
        RelExpr::Intersect(Box::new(a), Box::new(b))
    }
    pub fn diff(a: RelExpr, b: RelExpr) -> Self {
        RelExpr::Diff(Box::new(a), Box::new(b))
    }
}

impl RaScalar {
    pub fn attr(a: &AttrName) -> Self {
        RaScalar::Attr(a.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound attribute {0}")]
    UnboundAttr(AttrName),
    #[error("not a relationship instance: {0}")]
    NotRelationship(Value),
    #[error("relationship instance {0} has no role {1}")]
    NoSuchRole(Value, RoleId),
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("function {name} expects {expected} arguments, got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("type error: {0}")]
    Type(String),
    #[error("division by zero")]
    DivByZero,
    #[error("incompatible headers: {0}")]
    IncompatibleHeaders(String),
    #[error("{0}")]
    Agg(#[from] AggError),
}

type Res<T> = Result<T, EvalError>;

pub fn sch(e: &RelExpr) -> Res<BTreeSet<AttrName>> {
    Ok(match e {
        RelExpr::Project(r, _) => r.keys().cloned().collect(),
        RelExpr::Extend(r, p) => {
            let mut s = sch(p)?;
            s.extend(r.keys().cloned());
            s
        }
        RelExpr::Rename(r, p) => {
            let mut s = sch(p)?;
            for old in r.values() {
                s.remove(old);
            }
            s.extend(r.keys().cloned());
            s
        }
        RelExpr::DropAttrs(a, p) => sch(p)?.difference(a).cloned().collect(),
        RelExpr::Select(_, p) | RelExpr::Distinct(p) | RelExpr::Group(_, p) => sch(p)?,
        RelExpr::TypeTable(a, _) | RelExpr::ScalarTable(a, _) => [a.clone()].into(),
        RelExpr::Join(p, q) | RelExpr::LeftJoin(p, q) => {
            let mut s = sch(p)?;
            s.extend(sch(q)?);
            s
        }
        RelExpr::Union(p, q) | RelExpr::Intersect(p, q) | RelExpr::Diff(p, q) => {
            let (a, b) = (sch(p)?, sch(q)?);
            if a != b {
                let sd: Vec<String> = a.symmetric_difference(&b).map(|x| x.to_string()).collect();
                return Err(EvalError::IncompatibleHeaders(sd.join(", ")));
            }
            a
        }
    })
}

fn overwrite(t: &Tuple, u: &Tuple) -> Tuple {
    let mut out = t.clone();
    for (k, v) in u {
        out.insert(k.clone(), v.clone());
    }
    out
}

fn rel(header: BTreeSet<AttrName>, body: Bag<Tuple>) -> Relation {
    Relation { header, body }
}

pub fn eval(e: &RelExpr, pop: &Population, outer: &Tuple) -> Res<Relation> {
    match e {
        RelExpr::Project(r, p) => {
            let src = eval(p, pop, outer)?;
            let mut body = Bag::new();
            for (u, n) in src.body.iter() {
                let env = overwrite(outer, u);
                let mut t = Tuple::new();
                for (a, ex) in r {
                    t.insert(a.clone(), eval_scalar(ex, pop, &env)?);
                }
                body.insert_n(t, n.clone());
            }
            Ok(rel(r.keys().cloned().collect(), body))
        }
        RelExpr::Extend(r, p) => {
            let src = eval(p, pop, outer)?;
            let mut body = Bag::new();
            for (u, n) in src.body.iter() {
                let env = overwrite(outer, u);
                let mut t = u.clone();
                for (a, ex) in r {
                    t.insert(a.clone(), eval_scalar(ex, pop, &env)?);
                }
                body.insert_n(t, n.clone());
            }
            let mut h = src.header;
            h.extend(r.keys().cloned());
            Ok(rel(h, body))
        }
        RelExpr::Rename(r, p) => {
            let src = eval(p, pop, outer)?;
            for old in r.values() {
                if !src.header.contains(old) {
                    return Err(EvalError::UnboundAttr(old.clone()));
                }
            }
            let body = src.body.map(|u| {
                let mut t: Tuple = u.iter().filter(|(k, _)| !r.values().any(|o| o == *k)).map(|(k, v)| (k.clone(), v.clone())).collect();
                for (new, old) in r {
                    t.insert(new.clone(), u[old].clone());
                }
                t
            });
            Ok(rel(sch(e)?, body))
        }
        RelExpr::DropAttrs(a, p) => {
            let src = eval(p, pop, outer)?;
            let body = src.body.map(|u| u.iter().filter(|(k, _)| !a.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect());
            Ok(rel(src.header.difference(a).cloned().collect(), body))
        }
        RelExpr::Select(c, p) => {
            let src = eval(p, pop, outer)?;
            let mut body = Bag::new();
            for (u, n) in src.body.iter() {
                if eval_cond(c, pop, &overwrite(outer, u))?.is_true() {
                    body.insert_n(u.clone(), n.clone());
                }
            }
            Ok(rel(src.header, body))
        }
        RelExpr::TypeTable(a, x) => {
            let body = pop.of(x).to_set().map(|i| Tuple::from([(a.clone(), i.clone())]));
            Ok(rel([a.clone()].into(), body))
        }
        RelExpr::Distinct(p) => {
            let src = eval(p, pop, outer)?;
            Ok(rel(src.header, src.body.to_set()))
        }
        RelExpr::Group(x, p) => {
            let src = eval(p, pop, outer)?;
            for a in x {
                if !src.header.contains(a) {
                    return Err(EvalError::UnboundAttr(a.clone()));
                }
            }
            let ys: Vec<&AttrName> = src.header.iter().filter(|a| !x.contains(*a)).collect();
            let mut groups: BTreeMap<Tuple, BTreeMap<AttrName, Bag<Value>>> = BTreeMap::new();
            for (u, n) in src.body.iter() {
                let key: Tuple = x.iter().map(|a| (a.clone(), u[a].clone())).collect();
                let g = groups.entry(key).or_default();
                for y in &ys {
                    g.entry((*y).clone()).or_default().insert_n(u[*y].clone(), n.clone());
                }
            }
            let mut body = Bag::new();
            for (mut key, g) in groups {
                for y in &ys {
                    key.insert((*y).clone(), Value::Bag(g.get(*y).cloned().unwrap_or_default()));
                }
                body.insert(key);
            }
            Ok(rel(src.header, body))
        }
        RelExpr::Join(p, q) => {
            let (a, b) = (eval(p, pop, outer)?, eval(q, pop, outer)?);
            let shared: Vec<AttrName> = a.header.intersection(&b.header).cloned().collect();
            let mut body = Bag::new();
            for (tp, n) in a.body.iter() {
                for (tq, m) in b.body.iter() {
                    if shared.iter().all(|s| tp[s] == tq[s]) {
                        body.insert_n(overwrite(tp, tq), n * m);
                    }
                }
            }
            Ok(rel(a.header.union(&b.header).cloned().collect(), body))
        }
        RelExpr::LeftJoin(p, q) => {
            let (a, b) = (eval(p, pop, outer)?, eval(q, pop, outer)?);
            let shared: Vec<AttrName> = a.header.intersection(&b.header).cloned().collect();
            let right_only: Vec<AttrName> = b.header.difference(&a.header).cloned().collect();
            let mut body = Bag::new();
            for (tp, n) in a.body.iter() {
                let mut matched = false;
                for (tq, m) in b.body.iter() {
                    if shared.iter().all(|s| tp[s] == tq[s]) {
                        matched = true;
                        body.insert_n(overwrite(tp, tq), n * m);
                    }
                }
                if !matched {
                    let mut t = tp.clone();
                    for r in &right_only {
                        t.insert(r.clone(), Value::Null);
                    }
                    body.insert_n(t, n.clone());
                }
            }
            Ok(rel(a.header.union(&b.header).cloned().collect(), body))
        }
        RelExpr::Union(p, q) | RelExpr::Intersect(p, q) | RelExpr::Diff(p, q) => {
            let h = sch(e)?;
            let (a, b) = (eval(p, pop, outer)?, eval(q, pop, outer)?);
            let body = match e {
                RelExpr::Union(..) => a.body.union(&b.body),
                RelExpr::Intersect(..) => a.body.intersect(&b.body),
                _ => a.body.diff(&b.body),
            };
            Ok(rel(h, body))
        }
        RelExpr::ScalarTable(x, s) => {
            let v = eval_scalar(s, pop, outer)?;
            Ok(rel([x.clone()].into(), Bag::singleton(Tuple::from([(x.clone(), v)]))))
        }
    }
}

fn lookup(t: &Tuple, a: &AttrName) -> Res<Value> {
    t.get(a).cloned().ok_or_else(|| EvalError::UnboundAttr(a.clone()))
}

fn column(r: &Relation, a: &AttrName) -> Res<Bag<Value>> {
    if !r.header.contains(a) {
        return Err(EvalError::UnboundAttr(a.clone()));
    }
    Ok(r.body.map(|t| t[a].clone()))
}

fn num(n: Freq) -> Value {
    Value::Num(BigRational::from_integer(BigInt::from(n)))
}

fn avg_of(col: &Bag<Value>) -> Res<Value> {
    let s = col.sum()?;
    let n = col.count_non_null();
    match s {
        Value::Num(x) if !n.is_zero() => Ok(Value::Num(x / BigRational::from_integer(BigInt::from(n)))),
        _ => Ok(Value::Null),
    }
}

pub fn eval_scalar(e: &RaScalar, pop: &Population, t: &Tuple) -> Res<Value> {
    match e {
        RaScalar::Const(c) => Ok(c.clone()),
        RaScalar::Attr(a) => lookup(t, a),
        RaScalar::AttrRole(a, p) => match lookup(t, a)? {
            Value::Null => Ok(Value::Null),
            v @ Value::Rel(_) => match &v {
                Value::Rel(m) => m.get(p).cloned().ok_or_else(|| EvalError::NoSuchRole(v.clone(), p.clone())),
                _ => unreachable!(),
            },
            v => Err(EvalError::NotRelationship(v)),
        },
        RaScalar::Count(p) => Ok(num(eval(p, pop, t)?.cardinality())),
        RaScalar::Sum(p, a) => Ok(column(&eval(p, pop, t)?, a)?.sum()?),
        RaScalar::Min(p, a) => Ok(column(&eval(p, pop, t)?, a)?.minimum()?),
        RaScalar::Max(p, a) => Ok(column(&eval(p, pop, t)?, a)?.maximum()?),
        RaScalar::Avg(p, a) => avg_of(&column(&eval(p, pop, t)?, a)?),
        RaScalar::Apply(f, args) => {
            let vs = args.iter().map(|a| eval_scalar(a, pop, t)).collect::<Res<Vec<_>>>()?;
            apply_function(f, &vs)
        }
    }
}

/// Names of the bag-valued functions used to finish grouped aggregates.
pub mod bagfn {
    pub const COUNT: &str = "#count";
    pub const DSCOUNT: &str = "#dscount";
    pub const SUM: &str = "#sum";
    pub const DSSUM: &str = "#dssum";
    pub const MIN: &str = "#min";
    pub const MAX: &str = "#max";
    pub const AVG: &str = "#avg";
}

pub fn is_builtin_function(f: &str) -> bool {
    matches!(f, "+" | "-" | "*" | "/" | "neg") || f.starts_with('#')
}

fn arity(f: &str, got: usize, expected: usize) -> Res<()> {
    if got != expected {
        return Err(EvalError::Arity { name: f.to_string(), expected, got });
    }
    Ok(())
}

pub fn apply_function(f: &str, args: &[Value]) -> Res<Value> {
    if let Some(kind) = f.strip_prefix('#') {
        arity(f, args.len(), 1)?;
        // a grouping column used as aggregate target holds one value per group
        let single;
        let bag = match &args[0] {
            Value::Bag(b) => b,
            v => {
                single = Bag::singleton(v.clone());
                &single
            }
        };
        return match kind {
            "count" => Ok(num(bag.cardinality())),
            "dscount" => Ok(num(BigUint::from(bag.support_len()))),
            "sum" => Ok(bag.sum()?),
            "dssum" => Ok(bag.to_set().sum()?),
            "min" => Ok(bag.minimum()?),
            "max" => Ok(bag.maximum()?),
            "avg" => avg_of(bag),
            _ => Err(EvalError::UnknownFunction(f.to_string())),
        };
    }
    let nums = |k: usize| -> Res<Option<Vec<&BigRational>>> {
        arity(f, args.len(), k)?;
        let mut out = Vec::new();
        for a in args {
            match a {
                Value::Null => return Ok(None),
                Value::Num(n) => out.push(n),
                v => return Err(EvalError::Type(format!("{f} applied to {}", v.kind_name()))),
            }
        }
        Ok(Some(out))
    };
    let r = match f {
        "+" => nums(2)?.map(|v| v[0] + v[1]),
        "-" => nums(2)?.map(|v| v[0] - v[1]),
        "*" => nums(2)?.map(|v| v[0] * v[1]),
        "/" => match nums(2)? {
            Some(v) if v[1].is_zero() => return Err(EvalError::DivByZero),
            o => o.map(|v| v[0] / v[1]),
        },
        "neg" => nums(1)?.map(|v| -v[0]),
        _ => return Err(EvalError::UnknownFunction(f.to_string())),
    };
    Ok(r.map(Value::Num).unwrap_or(Value::Null))
}

/// SQL-style comparison: NULL anywhere yields unknown.
pub fn compare(a: &Value, op: CmpOp, b: &Value) -> Res<Truth> {
    use std::cmp::Ordering;
    if a.is_null() || b.is_null() {
        return Ok(Truth::Unknown);
    }
    let ord: Option<Ordering> = match (a, b) {
        (Value::Num(x), Value::Num(y)) => Some(x.cmp(y)),
        (Value::Str(x), Value::Str(y)) => Some(x.cmp(y)),
        (Value::Bool(x), Value::Bool(y)) => Some(x.cmp(y)),
        _ => None,
    };
    Ok(Truth::from_bool(match (op, ord) {
        (CmpOp::Eq, _) => a == b,
        (CmpOp::Ne, _) => a != b,
        (_, None) => {
            return Err(EvalError::Type(format!("cannot order {} against {}", a.kind_name(), b.kind_name())));
        }
        (CmpOp::Lt, Some(o)) => o == Ordering::Less,
        (CmpOp::Le, Some(o)) => o != Ordering::Greater,
        (CmpOp::Ge, Some(o)) => o != Ordering::Less,
        (CmpOp::Gt, Some(o)) => o == Ordering::Greater,
    }))
}

pub fn eval_cond(c: &RaCond, pop: &Population, t: &Tuple) -> Res<Truth> {
    match c {
        RaCond::Const(v) => Ok(*v),
        RaCond::Compare(a, op, b) => compare(&eval_scalar(a, pop, t)?, *op, &eval_scalar(b, pop, t)?),
        RaCond::BagCompare(p, s, q) => {
            let (a, b) = (eval(p, pop, t)?, eval(q, pop, t)?);
            Ok(Truth::from_bool(s.holds(&a.body, &b.body)))
        }
        RaCond::Member(e, p, a) => {
            let v = eval_scalar(e, pop, t)?;
            let col = column(&eval(p, pop, t)?, a)?;
            if col.is_empty() {
                return Ok(Truth::False);
            }
            if v.is_null() {
                return Ok(Truth::Unknown);
            }
            if col.contains(&v) {
                Ok(Truth::True)
            } else if col.contains(&Value::Null) {
                Ok(Truth::Unknown)
            } else {
                Ok(Truth::False)
            }
        }
        RaCond::Not(c) => Ok(eval_cond(c, pop, t)?.not()),
        RaCond::Connect(a, l, b) => Ok(l.apply(eval_cond(a, pop, t)?, eval_cond(b, pop, t)?)),
    }
}

impl fmt::Display for RelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn map<V: fmt::Display>(m: &BTreeMap<AttrName, V>, sep: &str) -> String {
            m.iter().map(|(k, v)| format!("{k}{sep}{v}")).collect::<Vec<_>>().join("; ")
        }
        fn set(s: &BTreeSet<AttrName>) -> String {
            s.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
        }
        match self {
            RelExpr::Project(r, p) => write!(f, "π[{}]({p})", map(r, ":=")),
            RelExpr::Extend(r, p) => write!(f, "α[{}]({p})", map(r, ":=")),
            RelExpr::Rename(r, p) => write!(f, "ρ[{}]({p})", map(r, ":")),
            RelExpr::DropAttrs(a, p) => write!(f, "δ[{}]({p})", set(a)),
            RelExpr::Select(c, p) => write!(f, "σ[{c}]({p})"),
            RelExpr::TypeTable(a, x) => write!(f, "T[{a}]({x})"),
            RelExpr::Distinct(p) => write!(f, "Ds({p})"),
            RelExpr::Group(x, p) => write!(f, "φ[{}]({p})", set(x)),
            RelExpr::Join(p, q) => write!(f, "({p} ⋈ {q})"),
            RelExpr::LeftJoin(p, q) => write!(f, "({p} ⟕ {q})"),
            RelExpr::Union(p, q) => write!(f, "({p} ∪ {q})"),
            RelExpr::Intersect(p, q) => write!(f, "({p} ∩ {q})"),
            RelExpr::Diff(p, q) => write!(f, "({p} − {q})"),
            RelExpr::ScalarTable(x, e) => write!(f, "ε[{x}]({e})"),
        }
    }
}

impl fmt::Display for RaScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RaScalar::Const(c) => write!(f, "{c}"),
            RaScalar::Attr(a) => write!(f, "{a}"),
            RaScalar::AttrRole(a, p) => write!(f, "{a}.{p}"),
            RaScalar::Count(p) => write!(f, "Count({p})"),
            RaScalar::Sum(p, a) => write!(f, "Sum({p}, {a})"),
            RaScalar::Min(p, a) => write!(f, "Min({p}, {a})"),
            RaScalar::Max(p, a) => write!(f, "Max({p}, {a})"),
            RaScalar::Avg(p, a) => write!(f, "Avg({p}, {a})"),
            RaScalar::Apply(g, args) => {
                let a: Vec<String> = args.iter().map(|x| x.to_string()).collect();
                write!(f, "{g}({})", a.join(", "))
            }
        }
    }
}

impl fmt::Display for RaCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RaCond::Const(t) => write!(f, "{t:?}"),
            RaCond::Compare(a, op, b) => write!(f, "{a} {} {b}", op.symbol()),
            RaCond::BagCompare(p, s, q) => write!(f, "{p} {s:?} {q}"),
            RaCond::Member(e, p, a) => write!(f, "{e} ∈ {p}({a})"),
            RaCond::Not(c) => write!(f, "¬({c})"),
            RaCond::Connect(a, l, b) => write!(f, "({a} {l:?} {b})"),
        }
    }
}
