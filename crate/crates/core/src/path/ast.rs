//! Path-expression syntax trees and their canonical text form.

use std::collections::BTreeSet;
use std::fmt;

use crate::relalg::{BagCmp, CmpOp, Logic};
use crate::schema::{AttrName, RoleId, TypeId};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SetCmpKind {
    AllIn,
    IncludesAll,
    MatchAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SetOpKind {
    Union,
    Intersect,
    Diff,
}

/// The surface shape of a selection, kept so verbalisation can reproduce it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WhereForm {
    /// `P WHERE C`
    Where,
    /// `IF C THEN P ELSE Q`
    IfThenElse,
    /// `P1 IF C1; ...; Q OTHERWISE`
    Cases,
    /// `P1 IF C1; ...; Pn IF Cn`
    Guarded,
}

impl WhereForm {
    /// The form a selection with `n` guarded branches is written in.
    pub fn of(n: usize, has_default: bool) -> Self {
        match (n, has_default) {
            (1, false) => WhereForm::Where,
            (1, true) => WhereForm::IfThenElse,
            (_, true) => WhereForm::Cases,
            (_, false) => WhereForm::Guarded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupKind {
    Count,
    DsCount,
    Sum,
    DsSum,
    Min,
    Max,
    Avg,
}

impl GroupKind {
    pub fn is_counter(self) -> bool {
        matches!(self, GroupKind::Count | GroupKind::DsCount)
    }
    pub fn name(self) -> &'static str {
        match self {
            GroupKind::Count => "GCount",
            GroupKind::DsCount => "GDsCount",
            GroupKind::Sum => "GSum",
            GroupKind::DsSum => "GDsSum",
            GroupKind::Min => "GMin",
            GroupKind::Max => "GMax",
            GroupKind::Avg => "GAvg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AggKind {
    Count,
    Sum,
    Min,
    Max,
    Avg,
}

impl AggKind {
    pub fn name(self) -> &'static str {
        match self {
            AggKind::Count => "Count",
            AggKind::Sum => "Sum",
            AggKind::Min => "Min",
            AggKind::Max => "Max",
            AggKind::Avg => "Avg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Aspect {
    pub attr: AttrName,
    pub path: PathExpr,
    /// Connection attribute in the base path; `None` means the head.
    pub via: Option<AttrName>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathExpr {
    Empty,
    Type(TypeId),
    Role(RoleId),
    Reverse(Box<PathExpr>),
    Concat(Box<PathExpr>, Box<PathExpr>),
    Front(Box<PathExpr>),
    Distinct(Box<PathExpr>),
    HdCoerce(Box<PathExpr>),
    TlCoerce(Box<PathExpr>),
    Product(Box<PathExpr>, Box<PathExpr>),
    SetCompare(Box<PathExpr>, SetCmpKind, Box<PathExpr>),
    Missing(Box<PathExpr>, Box<PathExpr>),
    SetOp(SetOpKind, Box<PathExpr>, Box<PathExpr>),
    FrontOp(SetOpKind, Box<PathExpr>, Box<PathExpr>),
    RelCompare(Box<PathExpr>, CmpOp, Box<PathExpr>),
    Shuffle(Box<PathExpr>, Vec<AttrName>),
    MixFix { first: RoleId, middle: Vec<(RoleId, PathExpr)>, last: RoleId },
    FuncApp(String, Vec<PathExpr>),
    Where { branches: Vec<(PathExpr, PeCond)>, default: Option<Box<PathExpr>>, form: WhereForm },
    Confluence(Vec<Aspect>, Box<PathExpr>),
    Group { kind: GroupKind, body: Box<PathExpr>, by: Vec<AttrName>, target: Option<AttrName> },
    SubExpr(Vec<PathExpr>),
    Denote(TypeId, PeDenotation),
    Scalar(PeScalar),
    Cond(PeCond),
    /// Unexpanded macro application; removed by `expand_macros`.
    Macro(String, Vec<PathExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PeScalar {
    Const(Value),
    Agg(AggKind, Box<PathExpr>),
    Var(AttrName),
    VarRole(AttrName, RoleId),
    Apply(String, Vec<PeScalar>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PeCond {
    Some(Box<PathExpr>),
    BagCompare(Box<PathExpr>, BagCmp, Box<PathExpr>),
    Logic(Box<PeCond>, Logic, Box<PeCond>),
    Compare(PeScalar, CmpOp, PeScalar),
    Not(Box<PeCond>),
    Exclusion(Box<PathExpr>, Box<PathExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PeDenotation {
    ByPath(Box<PathExpr>),
    Abstract(AttrName),
    Composite(Vec<PeDenotation>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroDef {
    pub name: String,
    pub params: Vec<AttrName>,
    pub body: PathExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Asc,
    Desc,
}

pub type OrderSpec = Vec<(AttrName, Order)>;

pub fn b(p: PathExpr) -> Box<PathExpr> {
    Box::new(p)
}

impl PathExpr {
    pub fn ty(x: &str) -> Self {
        PathExpr::Type(TypeId::new(x))
    }
    pub fn role(p: &str) -> Self {
        PathExpr::Role(RoleId::new(p))
    }
    pub fn exit(p: &str) -> Self {
        PathExpr::Reverse(b(Self::role(p)))
    }
    pub fn var(a: &str) -> Self {
        PathExpr::Scalar(PeScalar::Var(AttrName::named(a)))
    }
    pub fn constant(v: Value) -> Self {
        PathExpr::Scalar(PeScalar::Const(v))
    }
    pub fn concat(self, q: PathExpr) -> Self {
        PathExpr::Concat(b(self), b(q))
    }
    pub fn rev(self) -> Self {
        PathExpr::Reverse(b(self))
    }
    pub fn front(self) -> Self {
        PathExpr::Front(b(self))
    }
    pub fn distinct(self) -> Self {
        PathExpr::Distinct(b(self))
    }

    /// Right-nested concatenation of a non-empty sequence.
    pub fn chain(parts: Vec<PathExpr>) -> Self {
        let mut it = parts.into_iter().rev();
        let mut acc = it.next().expect("empty chain");
        for p in it {
            acc = PathExpr::Concat(b(p), b(acc));
        }
        acc
    }

    /// Flattens nested concatenations into their operand sequence.
    pub fn concat_operands(&self) -> Vec<&PathExpr> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a PathExpr, out: &mut Vec<&'a PathExpr>) {
            match p {
                PathExpr::Concat(a, c) => {
                    go(a, out);
                    go(c, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, PathExpr::Scalar(_))
    }

    pub fn is_cond(&self) -> bool {
        matches!(self, PathExpr::Cond(_))
    }

    pub fn as_role(&self) -> Option<&RoleId> {
        match self {
            PathExpr::Role(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_exit(&self) -> Option<&RoleId> {
        match self {
            PathExpr::Reverse(q) => q.as_role(),
            _ => None,
        }
    }

    /// Named attributes occurring anywhere in the expression.
    pub fn attrs(&self) -> BTreeSet<AttrName> {
        let mut out = BTreeSet::new();
        self.collect_attrs(&mut out);
        out
    }

    fn collect_attrs(&self, out: &mut BTreeSet<AttrName>) {
        use PathExpr::*;
        match self {
            Empty | Type(_) | Role(_) => {}
            Reverse(p) | Front(p) | Distinct(p) | HdCoerce(p) | TlCoerce(p) => p.collect_attrs(out),
            Concat(p, q) | Product(p, q) | SetCompare(p, _, q) | Missing(p, q) | SetOp(_, p, q) | FrontOp(_, p, q)
            | RelCompare(p, _, q) => {
                p.collect_attrs(out);
                q.collect_attrs(out);
            }
            Shuffle(p, xs) => {
                p.collect_attrs(out);
                out.extend(xs.iter().cloned());
            }
            MixFix { middle, .. } => middle.iter().for_each(|(_, p)| p.collect_attrs(out)),
            FuncApp(_, ps) | SubExpr(ps) | Macro(_, ps) => ps.iter().for_each(|p| p.collect_attrs(out)),
            Where { branches, default, .. } => {
                for (p, c) in branches {
                    p.collect_attrs(out);
                    // hd and tl in a condition refer to the selected path itself
                    out.extend(c.attrs().into_iter().filter(|a| !a.is_hd_or_tl()));
                }
                if let Some(d) = default {
                    d.collect_attrs(out);
                }
            }
            Confluence(aspects, p) => {
                p.collect_attrs(out);
                for a in aspects {
                    out.insert(a.attr.clone());
                    a.path.collect_attrs(out);
                    out.extend(a.via.iter().cloned());
                }
            }
            Group { body, by, target, .. } => {
                body.collect_attrs(out);
                out.extend(by.iter().chain(target.iter()).filter(|a| !a.is_hd_or_tl()).cloned());
            }
            Denote(_, d) => d.collect_attrs(out),
            Scalar(e) => e.collect_attrs(out),
            Cond(c) => c.collect_attrs(out),
        }
    }
}

impl PeScalar {
    pub fn attrs(&self) -> BTreeSet<AttrName> {
        let mut out = BTreeSet::new();
        self.collect_attrs(&mut out);
        out
    }

    fn collect_attrs(&self, out: &mut BTreeSet<AttrName>) {
        match self {
            PeScalar::Const(_) => {}
            PeScalar::Agg(_, p) => p.collect_attrs(out),
            PeScalar::Var(a) | PeScalar::VarRole(a, _) => {
                out.insert(a.clone());
            }
            PeScalar::Apply(_, es) => es.iter().for_each(|e| e.collect_attrs(out)),
        }
    }
}

impl PeCond {
    pub fn attrs(&self) -> BTreeSet<AttrName> {
        let mut out = BTreeSet::new();
        self.collect_attrs(&mut out);
        out
    }

    fn collect_attrs(&self, out: &mut BTreeSet<AttrName>) {
        match self {
            PeCond::Some(p) => p.collect_attrs(out),
            PeCond::BagCompare(p, _, q) | PeCond::Exclusion(p, q) => {
                p.collect_attrs(out);
                q.collect_attrs(out);
            }
            PeCond::Logic(a, _, c) => {
                a.collect_attrs(out);
                c.collect_attrs(out);
            }
            PeCond::Compare(x, _, y) => {
                x.collect_attrs(out);
                y.collect_attrs(out);
            }
            PeCond::Not(c) => c.collect_attrs(out),
        }
    }

    pub fn and(self, o: PeCond) -> PeCond {
        PeCond::Logic(Box::new(self), Logic::And, Box::new(o))
    }
}

impl PeDenotation {
    fn collect_attrs(&self, out: &mut BTreeSet<AttrName>) {
        match self {
            PeDenotation::ByPath(p) => p.collect_attrs(out),
            PeDenotation::Abstract(a) => {
                out.insert(a.clone());
            }
            PeDenotation::Composite(ds) => ds.iter().for_each(|d| d.collect_attrs(out)),
        }
    }
}

pub fn set_op_symbol(k: SetOpKind) -> &'static str {
    match k {
        SetOpKind::Union => "∪",
        SetOpKind::Intersect => "∩",
        SetOpKind::Diff => "−",
    }
}

pub fn bag_cmp_symbol(s: BagCmp) -> &'static str {
    match s {
        BagCmp::ProperSub => "⊂",
        BagCmp::Sub => "⊆",
        BagCmp::Eq => "=",
        BagCmp::Ne => "≠",
        BagCmp::Sup => "⊇",
        BagCmp::ProperSup => "⊃",
    }
}

pub fn logic_symbol(l: Logic) -> &'static str {
    match l {
        Logic::And => "∧",
        Logic::Or => "∨",
        Logic::Xor => "⊻",
        Logic::Implies => "⇒",
        Logic::Iff => "⇔",
    }
}

fn value_cmp_symbol(r: CmpOp) -> &'static str {
    match r {
        CmpOp::Lt => "<",
        CmpOp::Le => "≤",
        CmpOp::Eq => "=",
        CmpOp::Ne => "≠",
        CmpOp::Ge => "≥",
        CmpOp::Gt => ">",
    }
}

fn list<T: fmt::Display>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use PathExpr::*;
        match self {
            Empty => f.write_str("ε"),
            Type(x) => write!(f, "{x}"),
            Role(p) => write!(f, "{p}"),
            Reverse(p) => write!(f, "({p})←"),
            Concat(p, q) => write!(f, "({p} ∘ {q})"),
            Front(p) => write!(f, "Fr({p})"),
            Distinct(p) => write!(f, "Ds({p})"),
            HdCoerce(p) => write!(f, "HdCoerce({p})"),
            TlCoerce(p) => write!(f, "TlCoerce({p})"),
            Product(p, q) => write!(f, "({p} × {q})"),
            SetCompare(p, k, q) => {
                let s = match k {
                    SetCmpKind::AllIn => "⊆",
                    SetCmpKind::IncludesAll => "⊇",
                    SetCmpKind::MatchAll => "≡",
                };
                write!(f, "({p} {s} {q})")
            }
            Missing(p, q) => write!(f, "({p} ⊗ {q})"),
            SetOp(k, p, q) => write!(f, "({p} {} {q})", set_op_symbol(*k)),
            FrontOp(k, p, q) => write!(f, "(Fr({p}) {} Fr({q}))", set_op_symbol(*k)),
            RelCompare(p, r, q) => write!(f, "({p} {} {q})", value_cmp_symbol(*r)),
            Shuffle(p, xs) => write!(f, "Path({p}, {})", list(xs, ", ")),
            MixFix { first, middle, last } => {
                write!(f, "⟨{first}")?;
                for (r, p) in middle {
                    write!(f, ", {r}: {p}")?;
                }
                write!(f, ", {last}⟩")
            }
            FuncApp(g, ps) => write!(f, "{g}({})", list(ps, ", ")),
            Where { branches, default, form } => {
                let bs: Vec<String> = branches.iter().map(|(p, c)| format!("{p}, {c}")).collect();
                write!(f, "Where")?;
                if *form != WhereForm::Where {
                    write!(f, "[{form:?}]")?;
                }
                write!(f, "({}", bs.join("; "))?;
                if let Some(d) = default {
                    write!(f, "; {d}")?;
                }
                f.write_str(")")
            }
            Confluence(aspects, p) => {
                let a: Vec<String> = aspects
                    .iter()
                    .map(|a| format!("{}: {}: {}", a.attr, a.path, a.via.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "hd".into())))
                    .collect();
                write!(f, "[{}; {p}]", a.join(", "))
            }
            Group { kind, body, by, target } => {
                write!(f, "{}({body}, {{{}}}", kind.name(), list(by, ", "))?;
                if let Some(t) = target {
                    write!(f, ", {t}")?;
                }
                f.write_str(")")
            }
            SubExpr(ps) => write!(f, "[{}]", list(ps, ", ")),
            Denote(x, d) => write!(f, "{x}: {d}"),
            Scalar(e) => write!(f, "{e}"),
            Cond(c) => write!(f, "{c}"),
            Macro(n, ps) => write!(f, "{n}({})", list(ps, ", ")),
        }
    }
}

impl fmt::Display for PeScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeScalar::Const(c) => write!(f, "{c}"),
            PeScalar::Agg(k, p) => write!(f, "{}({p})", k.name()),
            PeScalar::Var(a) => write!(f, "{a}"),
            PeScalar::VarRole(a, p) => write!(f, "{a}.{p}"),
            PeScalar::Apply(g, es) => write!(f, "{g}({})", list(es, ", ")),
        }
    }
}

impl fmt::Display for PeCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeCond::Some(p) => write!(f, "Some({p})"),
            PeCond::BagCompare(p, s, q) => write!(f, "({p} {} {q})", bag_cmp_symbol(*s)),
            PeCond::Logic(a, l, c) => write!(f, "({a} {} {c})", logic_symbol(*l)),
            PeCond::Compare(x, r, y) => write!(f, "({x} {} {y})", value_cmp_symbol(*r)),
            PeCond::Not(c) => write!(f, "¬{c}"),
            PeCond::Exclusion(p, q) => write!(f, "({p} # {q})"),
        }
    }
}

impl fmt::Display for PeDenotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeDenotation::ByPath(p) => write!(f, "{p}"),
            PeDenotation::Abstract(a) => write!(f, "!{a}"),
            PeDenotation::Composite(ds) => write!(f, "({})", list(ds, ", ")),
        }
    }
}
