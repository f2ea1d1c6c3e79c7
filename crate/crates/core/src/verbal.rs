//! Path expressions back to ConQuer text.
//!
//! Output is precedence aware: every fragment carries the loosest grammar level it
//! parses at, and is parenthesised only where the surrounding construct needs a
//! tighter one. Role and mix-fix names are qualified by their fact type whenever
//! the neighbouring types cannot tell homonyms apart.

use std::collections::BTreeSet;

use crate::path::*;
use crate::relalg::{BagCmp, CmpOp, Logic};
use crate::schema::{AttrName, Det, RoleId, Schema, TypeId};
use crate::value::{format_rational, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerbalError {
    #[error("cannot verbalise an unexpanded macro application {0}")]
    Unexpanded(String),
    #[error("malformed path expression: {0}")]
    Malformed(String),
}

type Res<T> = Result<T, VerbalError>;

/// The rule that produced a fragment, for tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Start,
    Type,
    Denotation,
    DenotPath,
    DenotAbstract,
    DenotComposite,
    RoleEntry,
    RoleExit,
    RoleEntryQualified,
    RoleExitQualified,
    TypeIsType,
    Concat,
    MixFix,
    MixFixQualified,
    RolePair,
    MixFixExpanded,
    Reverse,
    UnaryOp,
    FrontSetOp,
    SetOp,
    ValueComp,
    Shuffle,
    Function,
    Infix,
    Where,
    IfThenElse,
    Cases,
    Guarded,
    Counter,
    GroupHead,
    GroupTarget,
    Confluence,
    SubExpr,
    Aggregate,
    Constant,
    Variable,
    VariableRole,
    ScalarFunction,
    ScalarInfix,
    ScalarPath,
    CondCompare,
    CondSetCompare,
    CondLogic,
    CondNot,
    CondSome,
}

#[derive(Debug, Clone)]
pub struct VerbalisationContext {
    pub typing: Typing,
    /// Types directly to the left; every type at the root.
    pub left_types: BTreeSet<TypeId>,
}

impl VerbalisationContext {
    pub fn root(s: &Schema, typing: Typing) -> Self {
        VerbalisationContext { typing, left_types: s.types.keys().cloned().collect() }
    }
}

/// Grammar levels, tightest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Lvl {
    Unit,
    Chain,
    Is,
    Term,
    Arith,
    DescrB,
    Descr,
}

struct Text {
    s: String,
    lvl: Lvl,
    /// Swallows a following chain when read back, as aggregates do.
    greedy: bool,
}

fn text(s: String, lvl: Lvl) -> Text {
    Text { s, lvl, greedy: false }
}

fn fit(t: Text, max: Lvl) -> String {
    if t.lvl > max {
        format!("({})", t.s)
    } else {
        t.s
    }
}

fn join(parts: impl IntoIterator<Item = String>) -> String {
    parts.into_iter().filter(|p| !p.is_empty()).collect::<Vec<_>>().join(" ")
}

pub fn attr_name(a: &AttrName) -> String {
    if *a == AttrName::hd() {
        "HEAD".into()
    } else if *a == AttrName::tl() {
        "TAIL".into()
    } else {
        a.to_string()
    }
}

fn constant(v: &Value) -> String {
    match v {
        Value::Num(n) => format_rational(n),
        Value::Str(s) => format!("'{}'", s.replace('\'', "''")),
        other => other.to_string(),
    }
}

fn set_op_word(k: SetOpKind) -> &'static str {
    match k {
        SetOpKind::Union => "UNITED WITH",
        SetOpKind::Intersect => "INTERSECTED WITH",
        SetOpKind::Diff => "MINUS",
    }
}

fn front_op_word(k: SetOpKind) -> &'static str {
    match k {
        SetOpKind::Union => "OR OTHERWISE",
        SetOpKind::Intersect => "AND ALSO",
        SetOpKind::Diff => "BUT NOT",
    }
}

fn set_cmp_word(k: SetCmpKind) -> &'static str {
    match k {
        SetCmpKind::AllIn => "WHICH ARE ALL IN",
        SetCmpKind::IncludesAll => "THAT INCLUDES ALL",
        SetCmpKind::MatchAll => "MATCHING ALL",
    }
}

fn cmp_sym(c: CmpOp) -> &'static str {
    match c {
        CmpOp::Eq => "=",
        CmpOp::Ne => "<>",
        CmpOp::Lt => "<",
        CmpOp::Le => "<=",
        CmpOp::Gt => ">",
        CmpOp::Ge => ">=",
    }
}

fn bag_cmp_word(c: BagCmp) -> &'static str {
    match c {
        BagCmp::Eq => "EQUALS",
        BagCmp::Ne => "DOES NOT EQUAL",
        BagCmp::ProperSub => "IS A SUBSET OF",
        BagCmp::Sub => "IS A SUBSET OF OR EQUAL TO",
        BagCmp::ProperSup => "IS A SUPERSET OF",
        BagCmp::Sup => "IS A SUPERSET OF OR EQUAL TO",
    }
}

fn logic_word(l: Logic) -> &'static str {
    match l {
        Logic::And => "AND",
        Logic::Or => "OR",
        Logic::Xor => "EXCLUSIVE OR",
        Logic::Implies => "IMPLIES",
        Logic::Iff => "IFF",
    }
}

fn agg_word(k: AggKind) -> &'static str {
    match k {
        AggKind::Count => "THE COUNT OF",
        AggKind::Sum => "THE SUM OF",
        AggKind::Min => "THE MINIMUM OF",
        AggKind::Max => "THE MAXIMUM OF",
        AggKind::Avg => "THE AVERAGE OF",
    }
}

fn group_word(k: GroupKind) -> &'static str {
    match k {
        GroupKind::Count => "THE COUNT OF",
        GroupKind::DsCount => "THE DISTINCT COUNT OF",
        GroupKind::Sum => "THE SUM OF",
        GroupKind::DsSum => "THE DISTINCT SUM OF",
        GroupKind::Min => "THE MINIMUM OF",
        GroupKind::Max => "THE MAXIMUM OF",
        GroupKind::Avg => "THE AVERAGE OF",
    }
}

fn infix_level(f: &str) -> Option<Lvl> {
    match f {
        "+" | "-" => Some(Lvl::Arith),
        "*" | "/" => Some(Lvl::Term),
        _ => None,
    }
}

/// The operand level just tighter than `l`, for right operands of left-associative operators.
fn tighter(l: Lvl) -> Lvl {
    match l {
        Lvl::Arith => Lvl::Term,
        Lvl::Term => Lvl::Is,
        Lvl::DescrB => Lvl::Arith,
        other => other,
    }
}

fn strip_coercion(p: &PathExpr) -> &PathExpr {
    match p {
        PathExpr::HdCoerce(q) | PathExpr::TlCoerce(q) => strip_coercion(q),
        other => other,
    }
}

fn type_of_operand(p: &PathExpr) -> Option<&TypeId> {
    match p {
        PathExpr::Type(x) | PathExpr::Denote(x, _) => Some(x),
        _ => None,
    }
}

struct Verbaliser<'s> {
    schema: &'s Schema,
    comb: Combinator<'s>,
    all: BTreeSet<TypeId>,
    trace: Vec<Rule>,
}

impl<'s> Verbaliser<'s> {
    fn new(schema: &'s Schema, typing: &'s Typing) -> Self {
        Verbaliser {
            schema,
            comb: Combinator::new(schema, typing),
            all: schema.types.keys().cloned().collect(),
            trace: Vec::new(),
        }
    }

    fn fire(&mut self, r: Rule) {
        self.trace.push(r);
    }

    fn tnm(&self, x: &TypeId) -> String {
        self.schema.naming.tnm.get(x).cloned().unwrap_or_else(|| x.0.clone())
    }

    fn pnm(&self, p: &RoleId) -> String {
        self.schema.naming.pnm.get(p).cloned().unwrap_or_else(|| p.0.clone())
    }

    fn rnm(&self, p: &RoleId) -> String {
        self.schema.naming.rnm.get(p).cloned().unwrap_or_else(|| p.0.clone())
    }

    fn pre(&self, x: &TypeId, d: Det) -> String {
        self.schema.naming.pre.get(&(x.clone(), d)).cloned().unwrap_or_default()
    }

    fn post_of(&self, x: Option<&TypeId>) -> String {
        x.and_then(|x| self.schema.naming.post.get(x)).cloned().unwrap_or_default()
    }

    fn fact_name(&self, p: &RoleId) -> String {
        self.schema.rel(p).map(|f| self.tnm(f)).unwrap_or_default()
    }

    fn heads(&self, p: &PathExpr) -> BTreeSet<TypeId> {
        match self.comb.combos(p) {
            Ok(c) => c.into_iter().map(|(u, _)| u).collect(),
            Err(_) => self.all.clone(),
        }
    }

    fn tails(&self, p: &PathExpr) -> BTreeSet<TypeId> {
        match self.comb.combos(p) {
            Ok(c) => c.into_iter().map(|(_, v)| v).collect(),
            Err(_) => self.all.clone(),
        }
    }

    // paths

    fn path(&mut self, p: &PathExpr, l: &BTreeSet<TypeId>) -> Res<Text> {
        use PathExpr as P;
        Ok(match p {
            P::Empty => {
                self.fire(Rule::Start);
                text("start".into(), Lvl::Unit)
            }
            P::Type(x) => {
                self.fire(Rule::Type);
                text(join([self.pre(x, Det::Undetermined), self.tnm(x)]), Lvl::Unit)
            }
            P::Denote(x, d) => {
                self.fire(Rule::Denotation);
                let head = join([self.pre(x, Det::Determined), self.tnm(x)]);
                text(format!("{head}: {}", self.denot(d, l)?), Lvl::Unit)
            }
            P::Role(r) => self.entry(r, l, &self.all.clone())?,
            P::Reverse(q) => match q.as_role() {
                Some(r) => self.exit(r, l, &self.all.clone())?,
                None => {
                    self.fire(Rule::Reverse);
                    let a = self.path(q, l)?;
                    text(format!("THE REVERSE OF {}", fit(a, Lvl::Unit)), Lvl::Unit)
                }
            },
            P::Concat(..) => {
                let ops: Vec<PathExpr> = p.concat_operands().into_iter().cloned().collect();
                self.chain(&ops, l)?
            }
            P::Front(q) | P::Distinct(q) => {
                self.fire(Rule::UnaryOp);
                let word = if matches!(p, P::Front(_)) { "ONLY" } else { "DISTINCT" };
                let a = self.path(q, l)?;
                text(format!("{word} {}", fit(a, Lvl::Unit)), Lvl::Unit)
            }
            P::HdCoerce(q) | P::TlCoerce(q) => self.path(q, l)?,
            P::SetOp(k, a, c) => match (a.as_ref(), c.as_ref()) {
                (P::Front(a), P::Front(c)) => self.front_op(*k, a, c, l)?,
                _ => {
                    self.fire(Rule::SetOp);
                    self.binop(a, set_op_word(*k), c, l)?
                }
            },
            P::FrontOp(k, a, c) => self.front_op(*k, a, c, l)?,
            P::Product(a, c) => {
                self.fire(Rule::SetOp);
                self.binop(a, "WITH", c, l)?
            }
            P::SetCompare(a, k, c) => {
                self.fire(Rule::SetOp);
                self.binop(a, set_cmp_word(*k), c, l)?
            }
            P::Missing(a, c) => {
                self.fire(Rule::SetOp);
                self.binop(a, "MISSING", c, l)?
            }
            P::RelCompare(a, k, c) => {
                self.fire(Rule::ValueComp);
                self.binop(strip_coercion(a), cmp_sym(*k), strip_coercion(c), l)?
            }
            P::Shuffle(q, xs) => {
                self.fire(Rule::Shuffle);
                let (Some(first), Some(last)) = (xs.first(), xs.last()) else {
                    return Err(VerbalError::Malformed("shuffle without attributes".into()));
                };
                if xs.len() < 2 {
                    return Err(VerbalError::Malformed("shuffle with a single attribute".into()));
                }
                let mut s = format!("THE PATH FROM {}", attr_name(first));
                let mid = &xs[1..xs.len() - 1];
                if !mid.is_empty() {
                    s.push_str(" VIA ");
                    s.push_str(&mid.iter().map(attr_name).collect::<Vec<_>>().join(", "));
                }
                let body = self.path(q, l)?;
                text(format!("{s} TO {} OF {}", attr_name(last), fit(body, Lvl::DescrB)), Lvl::Descr)
            }
            P::MixFix { first, middle, last } => self.mixfix(first, middle, last, l, &self.all.clone())?,
            P::FuncApp(f, args) => match (infix_level(f), args.as_slice()) {
                (Some(lvl), [a, c]) => {
                    self.fire(Rule::Infix);
                    let a = self.path(a, l)?;
                    let c = self.path(c, l)?;
                    text(format!("{} {f} {}", fit(a, lvl), fit(c, tighter(lvl))), lvl)
                }
                _ => {
                    self.fire(Rule::Function);
                    let mut xs = Vec::new();
                    for a in args {
                        xs.push(fit(self.path(a, l)?, Lvl::Descr));
                    }
                    text(format!("{f}({})", xs.join(", ")), Lvl::Unit)
                }
            },
            P::Where { branches, default, form } => self.selection(branches, default.as_deref(), *form, l)?,
            P::Confluence(aspects, base) => {
                self.fire(Rule::Confluence);
                let mut parts = Vec::new();
                for a in aspects {
                    let mut s = fit(self.path(&a.path, l)?, Lvl::DescrB);
                    if !a.attr.fresh || a.attr.is_hd_or_tl() {
                        s = format!("{s} AS {}", attr_name(&a.attr));
                    }
                    if let Some(v) = &a.via {
                        s = format!("{s} VIA {}", attr_name(v));
                    }
                    parts.push(s);
                }
                let base = self.path(base, l)?;
                text(format!("{} EACH {}", parts.join(", "), fit(base, Lvl::DescrB)), Lvl::Descr)
            }
            P::Group { kind, body, by, target } => {
                let head = match target {
                    Some(x) if !kind.is_counter() => {
                        self.fire(Rule::GroupTarget);
                        format!("{} {} IN", group_word(*kind), attr_name(x))
                    }
                    _ => {
                        self.fire(if kind.is_counter() { Rule::Counter } else { Rule::GroupHead });
                        group_word(*kind).to_string()
                    }
                };
                let body = self.path(body, l)?;
                let by: Vec<String> = by.iter().map(attr_name).collect();
                text(format!("{head} {} GROUPED BY {}", fit(body, Lvl::DescrB), by.join(", ")), Lvl::Descr)
            }
            P::SubExpr(qs) => {
                self.fire(Rule::SubExpr);
                let mut xs = Vec::new();
                for q in qs {
                    xs.push(fit(self.path(q, l)?, Lvl::Descr));
                }
                text(format!("[{}]", xs.join(", ")), Lvl::Unit)
            }
            P::Scalar(e) => {
                self.fire(Rule::ScalarPath);
                self.scalar(e, l)?
            }
            P::Cond(c) => {
                let s = self.cond(c, l)?;
                text(s.s, Lvl::Descr)
            }
            P::Macro(n, _) => return Err(VerbalError::Unexpanded(n.clone())),
        })
    }

    fn binop(&mut self, a: &PathExpr, word: &str, c: &PathExpr, l: &BTreeSet<TypeId>) -> Res<Text> {
        let a = self.path(a, l)?;
        let c = self.path(c, l)?;
        Ok(text(format!("{} {word} {}", fit(a, Lvl::DescrB), fit(c, Lvl::Arith)), Lvl::DescrB))
    }

    fn front_op(&mut self, k: SetOpKind, a: &PathExpr, c: &PathExpr, l: &BTreeSet<TypeId>) -> Res<Text> {
        self.fire(Rule::FrontSetOp);
        self.binop(a, front_op_word(k), c, l)
    }

    fn denot(&mut self, d: &PeDenotation, l: &BTreeSet<TypeId>) -> Res<String> {
        Ok(match d {
            PeDenotation::ByPath(q) => {
                self.fire(Rule::DenotPath);
                fit(self.path(q, l)?, Lvl::Unit)
            }
            PeDenotation::Abstract(a) => {
                self.fire(Rule::DenotAbstract);
                format!("!{}", attr_name(a))
            }
            PeDenotation::Composite(ds) => {
                self.fire(Rule::DenotComposite);
                let mut xs = Vec::new();
                for d in ds {
                    xs.push(self.denot(d, l)?);
                }
                format!("({})", xs.join(", "))
            }
        })
    }

    /// A concatenation, operand by operand, threading the left context and looking
    /// ahead for the right one.
    fn chain(&mut self, ops: &[PathExpr], l: &BTreeSet<TypeId>) -> Res<Text> {
        let mut parts: Vec<String> = Vec::new();
        let mut left = l.clone();
        let mut lvl = Lvl::Chain;
        let mut greedy = false;
        self.fire(Rule::Concat);
        for (i, op) in ops.iter().enumerate() {
            let rest = &ops[i + 1..];
            let right = if rest.is_empty() { self.all.clone() } else { self.heads(&PathExpr::chain(rest.to_vec())) };
            if i > 0 {
                if let (Some(x), Some(y)) = (type_of_operand(&ops[i - 1]), type_of_operand(op)) {
                    if self.schema.related_unchecked(x, y) {
                        self.fire(Rule::TypeIsType);
                        parts.push("IS".into());
                        lvl = Lvl::Is;
                        left = [x.clone()].into();
                    }
                }
            }
            let t = match op {
                PathExpr::Role(r) => self.entry(r, &left, &right)?,
                PathExpr::Reverse(q) if q.as_role().is_some() => self.exit(q.as_role().unwrap(), &left, &right)?,
                PathExpr::MixFix { first, middle, last } => self.mixfix(first, middle, last, &left, &right)?,
                other => self.path(other, &left)?,
            };
            greedy = t.greedy;
            let s = if (t.greedy && !rest.is_empty()) || t.lvl > Lvl::Chain { format!("({})", t.s) } else { t.s };
            parts.push(s);
            left = self.tails(&PathExpr::chain(ops[..=i].to_vec()));
        }
        Ok(Text { s: join(parts), lvl, greedy })
    }

    // role names

    fn entry(&mut self, p: &RoleId, l: &BTreeSet<TypeId>, r: &BTreeSet<TypeId>) -> Res<Text> {
        let post = self.post_of(self.schema.player.get(p));
        let name = self.pnm(p);
        let s = if role_name_unique(self.schema, p, RoleDir::Entry, l, r) {
            self.fire(Rule::RoleEntry);
            name
        } else {
            self.fire(Rule::RoleEntryQualified);
            format!("{name}.{}", self.fact_name(p))
        };
        Ok(text(join([post, s]), Lvl::Chain))
    }

    fn exit(&mut self, p: &RoleId, l: &BTreeSet<TypeId>, r: &BTreeSet<TypeId>) -> Res<Text> {
        let post = self.post_of(self.schema.rel(p));
        let name = self.rnm(p);
        let s = if role_name_unique(self.schema, p, RoleDir::Exit, l, r) {
            self.fire(Rule::RoleExit);
            name
        } else {
            self.fire(Rule::RoleExitQualified);
            format!("{name}.{}", self.fact_name(p))
        };
        Ok(text(join([post, s]), Lvl::Chain))
    }

    fn mixfix(
        &mut self,
        first: &RoleId,
        middle: &[(RoleId, PathExpr)],
        last: &RoleId,
        l: &BTreeSet<TypeId>,
        r: &BTreeSet<TypeId>,
    ) -> Res<Text> {
        let roles: Vec<RoleId> =
            std::iter::once(first.clone()).chain(middle.iter().map(|(q, _)| q.clone())).chain([last.clone()]).collect();
        let entry = self
            .schema
            .naming
            .mfix
            .iter()
            .find(|m| m.roles == roles && m.parts.len() + 1 == m.roles.len())
            .cloned();
        let post = self.post_of(self.schema.player.get(first));
        match entry {
            Some(m) => {
                let mut args = vec![l.clone()];
                args.extend(middle.iter().map(|(_, q)| self.heads(q)));
                args.push(r.clone());
                let mut first_part = m.parts[0].clone();
                if mfix_unique(self.schema, &m.parts, &roles, &args) {
                    self.fire(Rule::MixFix);
                } else {
                    self.fire(Rule::MixFixQualified);
                    first_part = format!("{first_part}.{}", self.tnm(&m.fact));
                }
                let mut parts = vec![post, first_part];
                for (i, (q, arg)) in middle.iter().enumerate() {
                    let player: BTreeSet<TypeId> = self.schema.player.get(q).cloned().into_iter().collect();
                    let t = self.path(arg, &player)?;
                    parts.push(if t.greedy || t.lvl > Lvl::Chain { format!("({})", t.s) } else { t.s });
                    parts.push(m.parts[i + 1].clone());
                }
                Ok(text(join(parts), Lvl::Unit))
            }
            None if middle.is_empty() => {
                self.fire(Rule::RolePair);
                let fact = self.fact_name(first);
                Ok(text(join([post, self.pnm(first), fact, self.rnm(last)]), Lvl::Chain))
            }
            None => {
                self.fire(Rule::MixFixExpanded);
                self.path(&expand_mixfix(first, middle, last), l)
            }
        }
    }

    // selections

    fn selection(
        &mut self,
        branches: &[(PathExpr, PeCond)],
        default: Option<&PathExpr>,
        form: WhereForm,
        l: &BTreeSet<TypeId>,
    ) -> Res<Text> {
        let shape = WhereForm::of(branches.len(), default.is_some());
        let form = if form == shape { form } else { shape };
        if branches.is_empty() {
            return Err(VerbalError::Malformed("selection without branches".into()));
        }
        let mut guarded = Vec::new();
        for (q, c) in branches {
            let q = fit(self.path(q, l)?, Lvl::DescrB);
            let c = self.cond(c, l)?.s;
            guarded.push((q, c));
        }
        let default = match default {
            Some(d) => Some(self.path(d, l)?),
            None => None,
        };
        let s = match (form, default) {
            (WhereForm::Where, _) => {
                self.fire(Rule::Where);
                format!("{} WHERE {}", guarded[0].0, guarded[0].1)
            }
            (WhereForm::IfThenElse, Some(d)) => {
                self.fire(Rule::IfThenElse);
                format!("IF {} THEN {} ELSE {}", guarded[0].1, guarded[0].0, fit(d, Lvl::Descr))
            }
            (WhereForm::Cases, Some(d)) => {
                self.fire(Rule::Cases);
                let gs: Vec<String> = guarded.iter().map(|(q, c)| format!("{q} IF {c}")).collect();
                format!("{}; {} OTHERWISE", gs.join("; "), fit(d, Lvl::DescrB))
            }
            _ => {
                self.fire(Rule::Guarded);
                let gs: Vec<String> = guarded.iter().map(|(q, c)| format!("{q} IF {c}")).collect();
                gs.join("; ")
            }
        };
        Ok(text(s, Lvl::Descr))
    }

    // scalars

    fn scalar(&mut self, e: &PeScalar, l: &BTreeSet<TypeId>) -> Res<Text> {
        Ok(match e {
            PeScalar::Const(v) => {
                self.fire(Rule::Constant);
                text(constant(v), Lvl::Unit)
            }
            PeScalar::Agg(k, q) => {
                self.fire(Rule::Aggregate);
                let body = self.path(q, l)?;
                let body = if body.lvl > Lvl::Chain { format!("({})", body.s) } else { body.s };
                Text { s: format!("{} {body}", agg_word(*k)), lvl: Lvl::Unit, greedy: true }
            }
            PeScalar::Var(a) => {
                self.fire(Rule::Variable);
                text(attr_name(a), Lvl::Unit)
            }
            PeScalar::VarRole(a, p) => {
                self.fire(Rule::VariableRole);
                text(format!("{}.{}", attr_name(a), self.rnm(p)), Lvl::Unit)
            }
            PeScalar::Apply(f, args) => match (infix_level(f), args.as_slice()) {
                (Some(lvl), [a, c]) => {
                    self.fire(Rule::ScalarInfix);
                    let a = self.scalar(a, l)?;
                    let c = self.scalar(c, l)?;
                    text(format!("{} {f} {}", fit(a, lvl), fit(c, tighter(lvl))), lvl)
                }
                _ => {
                    self.fire(Rule::ScalarFunction);
                    let mut xs = Vec::new();
                    for a in args {
                        xs.push(fit(self.scalar(a, l)?, Lvl::Descr));
                    }
                    text(format!("{f}({})", xs.join(", ")), Lvl::Unit)
                }
            },
        })
    }

    // conditions; `lvl` is Unit for atoms and Descr for connectives

    fn cond(&mut self, c: &PeCond, l: &BTreeSet<TypeId>) -> Res<Text> {
        Ok(match c {
            PeCond::Compare(a, k, d) => {
                self.fire(Rule::CondCompare);
                let a = self.scalar(a, l)?;
                let d = self.scalar(d, l)?;
                text(format!("{} {} {}", fit(a, Lvl::Arith), cmp_sym(*k), fit(d, Lvl::Arith)), Lvl::Unit)
            }
            PeCond::BagCompare(a, k, d) => {
                self.fire(Rule::CondSetCompare);
                self.cond_pair(a, bag_cmp_word(*k), d, l)?
            }
            PeCond::Exclusion(a, d) => {
                self.fire(Rule::CondSetCompare);
                self.cond_pair(a, "IS DISJOINT FROM", d, l)?
            }
            PeCond::Logic(a, k, d) => {
                self.fire(Rule::CondLogic);
                let a = self.cond(a, l)?;
                let d = self.cond(d, l)?;
                text(format!("{} {} {}", a.s, logic_word(*k), fit(d, Lvl::Unit)), Lvl::Descr)
            }
            PeCond::Not(a) => {
                self.fire(Rule::CondNot);
                let a = self.cond(a, l)?;
                text(format!("NOT {}", fit(a, Lvl::Unit)), Lvl::Unit)
            }
            PeCond::Some(q) => {
                self.fire(Rule::CondSome);
                if let PathExpr::Macro(n, args) = q.as_ref() {
                    let mut xs = Vec::new();
                    for a in args {
                        xs.push(fit(self.path(a, l)?, Lvl::Descr));
                    }
                    return Ok(text(format!("{n}({})", xs.join(", ")), Lvl::Unit));
                }
                let q = self.path(q, l)?;
                text(format!("SOME {}", fit(q, Lvl::DescrB)), Lvl::Unit)
            }
        })
    }

    fn cond_pair(&mut self, a: &PathExpr, word: &str, d: &PathExpr, l: &BTreeSet<TypeId>) -> Res<Text> {
        let a = self.path(a, l)?;
        let d = self.path(d, l)?;
        Ok(text(format!("{} {word} {}", fit(a, Lvl::Arith), fit(d, Lvl::Arith)), Lvl::Unit))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoleDir {
    Entry,
    Exit,
}

/// True when no other role with the same (reverse) name fits between the types on
/// the left and the types on the right.
pub fn role_name_unique(s: &Schema, p: &RoleId, dir: RoleDir, left: &BTreeSet<TypeId>, right: &BTreeSet<TypeId>) -> bool {
    let names = match dir {
        RoleDir::Entry => &s.naming.pnm,
        RoleDir::Exit => &s.naming.rnm,
    };
    let Some(n) = names.get(p) else { return true };
    !names.iter().any(|(q, m)| {
        if q == p || m != n {
            return false;
        }
        let (from, to) = match dir {
            RoleDir::Entry => (s.player.get(q), s.rel(q)),
            RoleDir::Exit => (s.rel(q), s.player.get(q)),
        };
        from.is_some_and(|t| left.contains(t)) && to.is_some_and(|t| right.contains(t))
    })
}

/// True when no other role sequence shares the reading `parts` with players in the
/// given per-position type sets.
pub fn mfix_unique(s: &Schema, parts: &[String], roles: &[RoleId], args: &[BTreeSet<TypeId>]) -> bool {
    !s.naming.mfix.iter().any(|m| {
        m.parts == parts
            && m.roles != roles
            && m.roles.len() == args.len()
            && m.roles.iter().zip(args).all(|(q, ts)| s.player.get(q).is_some_and(|t| ts.contains(t)))
    })
}

fn run<T>(s: &Schema, ctx: &VerbalisationContext, f: impl FnOnce(&mut Verbaliser<'_>) -> Res<T>) -> Res<(T, Vec<Rule>)> {
    let mut v = Verbaliser::new(s, &ctx.typing);
    let out = f(&mut v)?;
    Ok((out, v.trace))
}

pub fn verbalise(s: &Schema, p: &PathExpr, ctx: &VerbalisationContext) -> Res<String> {
    verbalise_traced(s, p, ctx).map(|(t, _)| t)
}

/// The verbalisation together with the rules applied, in order of application.
pub fn verbalise_traced(s: &Schema, p: &PathExpr, ctx: &VerbalisationContext) -> Res<(String, Vec<Rule>)> {
    run(s, ctx, |v| Ok(v.path(p, &ctx.left_types)?.s))
}

pub fn verbalise_scalar(s: &Schema, e: &PeScalar, ctx: &VerbalisationContext) -> Res<String> {
    run(s, ctx, |v| Ok(v.scalar(e, &ctx.left_types)?.s)).map(|(t, _)| t)
}

pub fn verbalise_cond(s: &Schema, c: &PeCond, ctx: &VerbalisationContext) -> Res<String> {
    run(s, ctx, |v| Ok(v.cond(c, &ctx.left_types)?.s)).map(|(t, _)| t)
}

/// Verbalises at the root, typing the expression first.
pub fn verbalise_path(s: &Schema, p: &PathExpr) -> Res<String> {
    let typing = infer_typing(s, p).unwrap_or_default();
    verbalise(s, p, &VerbalisationContext::root(s, typing))
}
