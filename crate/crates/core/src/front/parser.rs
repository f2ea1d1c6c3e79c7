//! All-parses recursive descent. Every nonterminal yields each way it can match from
//! a position, memoised per position, so homonymous names give several trees.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use super::lexer::{Tok, Token};
use super::records::*;
use crate::schema::{MixFix, RoleId, Schema, TypeId};

/// Per-position cap on alternatives; hitting it is reported as a diagnostic.
const MAX_PARSES: usize = 4096;

pub(crate) const SET_OPS: &[&str] = &[
    "UNITED WITH",
    "INTERSECTED WITH",
    "MINUS",
    "WHICH ARE ALL IN",
    "THAT INCLUDES ALL",
    "MATCHING ALL",
    "MISSING",
    "WITH",
    "OR OTHERWISE",
    "AND ALSO",
    "BUT NOT",
];

pub(crate) const VALUE_WORDS: &[&str] = &[
    "IS EQUAL TO",
    "IS NOT EQUAL TO",
    "IS LESS THAN",
    "IS LESS THAN OR EQUAL TO",
    "IS GREATER THAN",
    "IS GREATER THAN OR EQUAL TO",
];

pub(crate) const COMPARE_SYMS: &[&str] = &["=", "<>", "<", "<=", ">", ">="];

pub(crate) const SET_WORDS: &[&str] = &[
    "EQUALS",
    "DOES NOT EQUAL",
    "IS DISJOINT FROM",
    "IS A SUBSET OF",
    "IS A SUBSET OF OR EQUAL TO",
    "IS A SUPERSET OF",
    "IS A SUPERSET OF OR EQUAL TO",
];

const LOGIC_WORDS: &[&str] = &["AND", "OR", "EXCLUSIVE OR", "IMPLIES", "IFF"];
const LOGIC_SYMS: &[&str] = &["&", "|", "=>", "<=>"];

pub(crate) const COERCE_FUNCS: &[&str] = &[
    "THE COUNT OF",
    "THE SUM OF",
    "THE MINIMUM",
    "THE MINIMUM OF",
    "THE MAXIMUM",
    "THE MAXIMUM OF",
    "THE AVERAGE",
    "THE AVERAGE OF",
];

pub(crate) const GROUP_FUNCS: &[&str] = &[
    "THE COUNT OF",
    "THE DISTINCT COUNT OF",
    "THE SUM OF",
    "THE DISTINCT SUM OF",
    "THE MINIMUM OF",
    "THE MAXIMUM OF",
    "THE AVERAGE OF",
];

const UNARY_OPS: &[&str] = &["ONLY", "DISTINCT", "THE REVERSE OF"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Nt {
    Descr,
    DescrB,
    Arith,
    Term,
    IsLevel,
    Chain,
    Unit,
    Cond,
    CTerm,
}

type Parses = Rc<Vec<(Rec, usize)>>;

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

/// Name tables split into word sequences for matching against tokens.
pub(crate) struct Names {
    types: Vec<(Vec<String>, TypeId)>,
    prefixes: Vec<(Vec<String>, TypeId)>,
    post: BTreeMap<TypeId, Vec<String>>,
    entries: Vec<(Vec<String>, RoleId)>,
    exits: Vec<(Vec<String>, RoleId)>,
    mfix: Vec<(Vec<Vec<String>>, MixFix)>,
    /// Every word of every name; such words are never variable names.
    pub words: BTreeSet<String>,
    /// Whole names, for suggestions.
    pub phrases: BTreeSet<String>,
}

impl Names {
    pub fn new(s: &Schema) -> Self {
        let n = &s.naming;
        let types: Vec<_> = n.tnm.iter().map(|(t, v)| (words(v), t.clone())).collect();
        let mut prefixes: Vec<_> = n.pre.iter().map(|((t, _), v)| (words(v), t.clone())).collect();
        prefixes.sort();
        prefixes.dedup();
        let post = n.post.iter().map(|(t, v)| (t.clone(), words(v))).collect();
        let entries: Vec<_> = n.pnm.iter().map(|(r, v)| (words(v), r.clone())).collect();
        let exits: Vec<_> = n.rnm.iter().map(|(r, v)| (words(v), r.clone())).collect();
        let mfix: Vec<_> = n
            .mfix
            .iter()
            .filter(|m| !m.parts.is_empty() && m.roles.len() == m.parts.len() + 1)
            .map(|m| (m.parts.iter().map(|p| words(p)).collect(), m.clone()))
            .collect();
        let mut all = BTreeSet::new();
        let mut phrases = BTreeSet::new();
        let every = n
            .tnm
            .values()
            .chain(n.pre.values())
            .chain(n.post.values())
            .chain(n.pnm.values())
            .chain(n.rnm.values())
            .chain(n.mfix.iter().flat_map(|m| m.parts.iter()));
        for v in every {
            all.extend(words(v));
            phrases.insert(crate::schema::normalise_name(v));
        }
        Names { types, prefixes, post, entries, exits, mfix, words: all, phrases }
    }
}

pub(crate) struct Parser<'a> {
    toks: &'a [Token],
    schema: &'a Schema,
    names: &'a Names,
    memo: HashMap<(Nt, usize), Parses>,
    pub furthest: usize,
    pub expected: BTreeSet<String>,
    pub truncated: bool,
}

fn sel(branches: Vec<(Rec, Rec)>, default: Option<Rec>) -> Rec {
    Rec::Selection { branches, default: default.map(Box::new) }
}

fn is_symbolic_set_comp(r: &Rec) -> bool {
    matches!(r, Rec::InfDescrComp { op, .. } if COMPARE_SYMS.contains(&op.as_str()))
}

impl<'a> Parser<'a> {
    pub fn new(toks: &'a [Token], schema: &'a Schema, names: &'a Names) -> Self {
        Parser { toks, schema, names, memo: HashMap::new(), furthest: 0, expected: BTreeSet::new(), truncated: false }
    }

    // terminals

    pub fn expect_here(&mut self, pos: usize, what: &str) {
        self.expect(pos, what.to_string());
    }

    fn tok(&self, pos: usize) -> Option<&Tok> {
        self.toks.get(pos).map(|t| &t.tok)
    }

    fn expect(&mut self, pos: usize, what: String) {
        if pos > self.furthest {
            self.furthest = pos;
            self.expected.clear();
        }
        if pos == self.furthest {
            self.expected.insert(what);
        }
    }

    fn kw(&mut self, pos: usize, k: &'static str) -> bool {
        let ok = matches!(self.tok(pos), Some(Tok::Keyword(x)) if *x == k);
        if !ok {
            self.expect(pos, format!("'{k}'"));
        }
        ok
    }

    fn sym(&mut self, pos: usize, s: &'static str) -> bool {
        let ok = matches!(self.tok(pos), Some(Tok::Sym(x)) if *x == s);
        if !ok {
            self.expect(pos, format!("'{s}'"));
        }
        ok
    }

    fn any_kw(&mut self, pos: usize, ks: &[&'static str]) -> Option<&'static str> {
        for k in ks {
            if matches!(self.tok(pos), Some(Tok::Keyword(x)) if x == k) {
                return Some(k);
            }
        }
        for k in ks {
            self.expect(pos, format!("'{k}'"));
        }
        None
    }

    fn any_sym(&mut self, pos: usize, ss: &[&'static str]) -> Option<&'static str> {
        for s in ss {
            if matches!(self.tok(pos), Some(Tok::Sym(x)) if x == s) {
                return Some(s);
            }
        }
        for s in ss {
            self.expect(pos, format!("'{s}'"));
        }
        None
    }

    fn phrase(&self, pos: usize, ws: &[String]) -> Option<usize> {
        for (i, w) in ws.iter().enumerate() {
            match self.tok(pos + i) {
                Some(Tok::Word(x)) if x == w => {}
                _ => return None,
            }
        }
        Some(pos + ws.len())
    }

    fn is_var_word(&self, w: &str) -> bool {
        w.chars().next().is_some_and(|c| c.is_lowercase() || c == '_')
            && !self.names.words.contains(w)
            && w != "true"
            && w != "false"
    }

    fn var(&mut self, pos: usize) -> Option<String> {
        match self.tok(pos) {
            Some(Tok::Word(w)) if self.is_var_word(w) => Some(w.clone()),
            _ => {
                self.expect(pos, "a variable name".into());
                None
            }
        }
    }

    /// A variable, or one of the standard names for the head and tail columns.
    fn var_or_std(&mut self, pos: usize) -> Option<String> {
        match self.tok(pos) {
            Some(Tok::Keyword(k)) if *k == "HEAD" || *k == "TAIL" => Some(k.to_string()),
            _ => self.var(pos),
        }
    }

    fn var_list(&mut self, pos: usize) -> Option<(Vec<String>, usize)> {
        let mut vs = vec![self.var_or_std(pos)?];
        let mut e = pos + 1;
        while self.sym(e, ",") {
            match self.var_or_std(e + 1) {
                Some(v) => {
                    vs.push(v);
                    e += 2;
                }
                None => break,
            }
        }
        Some((vs, e))
    }

    fn fact_suffix(&mut self, pos: usize, fact: Option<&TypeId>) -> Option<(String, usize)> {
        let fact = fact?;
        if !self.sym(pos, ".") {
            return None;
        }
        let ws = self.names.types.iter().find(|(_, t)| t == fact).map(|(w, _)| w.clone())?;
        self.phrase(pos + 1, &ws).map(|e| (ws.join(" "), e))
    }

    // memo

    fn get(&mut self, nt: Nt, pos: usize) -> Parses {
        if let Some(r) = self.memo.get(&(nt, pos)) {
            return r.clone();
        }
        self.memo.insert((nt, pos), Rc::new(Vec::new()));
        let mut v = match nt {
            Nt::Descr => self.descr(pos),
            Nt::DescrB => self.descr_b(pos),
            Nt::Arith => self.left_assoc(pos, Nt::Term, &[], &["+", "-"]),
            Nt::Term => self.left_assoc(pos, Nt::IsLevel, &[], &["*", "/"]),
            Nt::IsLevel => self.is_level(pos),
            Nt::Chain => self.chain(pos),
            Nt::Unit => self.unit(pos),
            Nt::Cond => self.left_assoc(pos, Nt::CTerm, LOGIC_WORDS, LOGIC_SYMS),
            Nt::CTerm => self.cterm(pos),
        };
        v.sort();
        v.dedup();
        if v.len() > MAX_PARSES {
            v.truncate(MAX_PARSES);
            self.truncated = true;
        }
        let r = Rc::new(v);
        self.memo.insert((nt, pos), r.clone());
        r
    }

    // structured forms

    fn descr(&mut self, pos: usize) -> Vec<(Rec, usize)> {
        let mut out = Vec::new();
        if self.kw(pos, "IF") {
            for (c, e) in self.get(Nt::Cond, pos + 1).iter() {
                if !self.kw(*e, "THEN") {
                    continue;
                }
                for (d, e2) in self.get(Nt::Descr, e + 1).iter() {
                    let branch = vec![(d.clone(), c.clone())];
                    out.push((sel(branch.clone(), None), *e2));
                    if self.kw(*e2, "ELSE") {
                        for (q, e3) in self.get(Nt::Descr, e2 + 1).iter() {
                            out.push((sel(branch.clone(), Some(q.clone())), *e3));
                        }
                    }
                }
            }
        }
        if self.kw(pos, "SELECT") {
            if let Some((vars, e)) = self.var_list(pos + 1) {
                if self.kw(e, "WHERE") {
                    for (c, e2) in self.get(Nt::Cond, e + 1).iter() {
                        out.push((Rec::Shuffle { vars: vars.clone(), body: Box::new(c.clone()) }, *e2));
                    }
                }
            }
        }
        self.shuffle(pos, &mut out);
        self.group(pos, &mut out);
        for (d, e) in self.get(Nt::DescrB, pos).iter() {
            out.push((d.clone(), *e));
            self.where_tail(d.clone(), *e, &mut out);
            if self.kw(*e, "IF") {
                for (c, e2) in self.get(Nt::Cond, e + 1).iter() {
                    self.alternatives(vec![(d.clone(), c.clone())], *e2, &mut out);
                }
            }
        }
        self.confluence(pos, Vec::new(), &mut out);
        // a condition is a descriptor; bare symbolic comparisons of paths read as
        // relational comparisons here
        for (c, e) in self.get(Nt::Cond, pos).iter() {
            if !is_symbolic_set_comp(c) {
                out.push((c.clone(), *e));
            }
        }
        out
    }

    fn where_tail(&mut self, d: Rec, e: usize, out: &mut Vec<(Rec, usize)>) {
        if !self.kw(e, "WHERE") {
            return;
        }
        for (c, e2) in self.get(Nt::Cond, e + 1).iter() {
            let s = sel(vec![(d.clone(), c.clone())], None);
            out.push((s.clone(), *e2));
            self.where_tail(s, *e2, out);
        }
    }

    fn alternatives(&mut self, branches: Vec<(Rec, Rec)>, e: usize, out: &mut Vec<(Rec, usize)>) {
        out.push((sel(branches.clone(), None), e));
        if self.kw(e, "OTHERWISE") {
            for (q, e3) in self.get(Nt::Descr, e + 1).iter() {
                out.push((sel(branches.clone(), Some(q.clone())), *e3));
            }
        }
        if !self.sym(e, ";") {
            return;
        }
        for (d, e2) in self.get(Nt::DescrB, e + 1).iter() {
            if self.kw(*e2, "IF") {
                for (c, e3) in self.get(Nt::Cond, e2 + 1).iter() {
                    let mut bs = branches.clone();
                    bs.push((d.clone(), c.clone()));
                    self.alternatives(bs, *e3, out);
                }
            }
            if self.kw(*e2, "OTHERWISE") {
                out.push((sel(branches.clone(), Some(d.clone())), e2 + 1));
            }
        }
    }

    fn shuffle(&mut self, pos: usize, out: &mut Vec<(Rec, usize)>) {
        if !self.kw(pos, "THE PATH FROM") {
            return;
        }
        let Some(first) = self.var_or_std(pos + 1) else { return };
        let mut vars = vec![first];
        let mut e = pos + 2;
        if self.kw(e, "VIA") {
            let Some((mid, e2)) = self.var_list(e + 1) else { return };
            vars.extend(mid);
            e = e2;
        }
        if !self.kw(e, "TO") {
            return;
        }
        let Some(last) = self.var_or_std(e + 1) else { return };
        vars.push(last);
        e += 2;
        if self.kw(e, "OF") {
            e += 1;
        }
        for (d, e2) in self.get(Nt::DescrB, e).iter() {
            out.push((Rec::Shuffle { vars: vars.clone(), body: Box::new(d.clone()) }, *e2));
        }
    }

    fn group(&mut self, pos: usize, out: &mut Vec<(Rec, usize)>) {
        let Some(func) = self.any_kw(pos, GROUP_FUNCS) else { return };
        let mut starts = vec![(None, pos + 1)];
        if !func.contains("COUNT") {
            if let Some(v) = self.var(pos + 1) {
                if self.kw(pos + 2, "IN") {
                    starts.push((Some(v), pos + 3));
                }
            }
        }
        for (var, s) in starts {
            for (d, e) in self.get(Nt::DescrB, s).iter() {
                if !self.kw(*e, "GROUPED BY") {
                    continue;
                }
                if let Some((by, e2)) = self.var_list(e + 1) {
                    let r = Rec::GroupAcct { func: func.to_string(), var: var.clone(), body: Box::new(d.clone()), by };
                    out.push((r, e2));
                }
            }
        }
    }

    fn confluence(&mut self, pos: usize, aspects: Vec<Aspect>, out: &mut Vec<(Rec, usize)>) {
        for (d, e) in self.get(Nt::DescrB, pos).iter() {
            let mut tails = vec![(None, *e)];
            if self.kw(*e, "AS") {
                if let Some(v) = self.var(e + 1) {
                    tails.push((Some(v), e + 2));
                }
            }
            for (as_var, e1) in tails {
                let mut vias = vec![(None, e1)];
                if self.kw(e1, "VIA") {
                    if let Some(v) = self.var_or_std(e1 + 1) {
                        vias.push((Some(v), e1 + 2));
                    }
                }
                for (via_var, e2) in vias {
                    let mut asp = aspects.clone();
                    asp.push(Aspect { descr: d.clone(), as_var: as_var.clone(), via_var });
                    if self.sym(e2, ",") {
                        self.confluence(e2 + 1, asp.clone(), out);
                    }
                    if self.kw(e2, "EACH") {
                        for (base, e3) in self.get(Nt::DescrB, e2 + 1).iter() {
                            out.push((Rec::Confluence { base: Box::new(base.clone()), aspects: asp.clone() }, *e3));
                        }
                    }
                }
            }
        }
    }

    // operator levels

    fn descr_b(&mut self, pos: usize) -> Vec<(Rec, usize)> {
        let mut out = Vec::new();
        let mut work: Vec<(Rec, usize)> = self.get(Nt::Arith, pos).to_vec();
        while let Some((l, e)) = work.pop() {
            out.push((l.clone(), e));
            let op = match self.any_kw(e, SET_OPS).or_else(|| self.any_kw(e, VALUE_WORDS)) {
                Some(k) => k,
                None => match self.any_sym(e, COMPARE_SYMS) {
                    Some(s) => s,
                    None => continue,
                },
            };
            for (r, e2) in self.get(Nt::Arith, e + 1).iter() {
                let comparison = !SET_OPS.contains(&op);
                let rec = if comparison && l.is_scalar() && r.is_scalar() {
                    Rec::ScalExprComp {
                        left: Box::new(l.clone().as_scalar_operand()),
                        right: Box::new(r.clone().as_scalar_operand()),
                        op: op.to_string(),
                    }
                } else {
                    Rec::Binary { op: op.to_string(), left: Box::new(l.clone()), right: Box::new(r.clone()) }
                };
                work.push((rec, *e2));
            }
        }
        out
    }

    fn left_assoc(&mut self, pos: usize, operand: Nt, kws: &[&'static str], syms: &[&'static str]) -> Vec<(Rec, usize)> {
        let mut out = Vec::new();
        let mut work: Vec<(Rec, usize)> = self.get(operand, pos).to_vec();
        while let Some((l, e)) = work.pop() {
            out.push((l.clone(), e));
            let Some(op) = self.any_kw(e, kws).or_else(|| self.any_sym(e, syms)) else { continue };
            for (r, e2) in self.get(operand, e + 1).iter() {
                let rec = if operand == Nt::CTerm {
                    Rec::BinCond { left: Box::new(l.clone()), right: Box::new(r.clone()), op: op.to_string() }
                } else if l.is_scalar() && r.is_scalar() {
                    Rec::ScBinary {
                        op: op.to_string(),
                        left: Box::new(l.clone().as_scalar_operand()),
                        right: Box::new(r.clone().as_scalar_operand()),
                    }
                } else {
                    Rec::Binary { op: op.to_string(), left: Box::new(l.clone()), right: Box::new(r.clone()) }
                };
                work.push((rec, *e2));
            }
        }
        out
    }

    fn is_level(&mut self, pos: usize) -> Vec<(Rec, usize)> {
        let mut out = Vec::new();
        let mut work: Vec<(Rec, usize)> = self.get(Nt::Chain, pos).to_vec();
        while let Some((l, e)) = work.pop() {
            out.push((l.clone(), e));
            // the postfix of the left type may precede IS; the record does not keep it
            let mut starts = vec![e];
            let posts: Vec<Vec<String>> = self.names.post.values().cloned().collect();
            for ws in posts {
                if let Some(s) = self.phrase(e, &ws) {
                    starts.push(s);
                }
            }
            starts.dedup();
            for s in starts {
                if !self.kw(s, "IS") {
                    continue;
                }
                for (r, e2) in self.get(Nt::Chain, s + 1).iter() {
                    let rec = Rec::Binary { op: "IS".into(), left: Box::new(l.clone()), right: Box::new(r.clone()) };
                    work.push((rec, *e2));
                }
            }
        }
        out
    }

    fn chain(&mut self, pos: usize) -> Vec<(Rec, usize)> {
        let mut out = Vec::new();
        for (u, e) in self.get(Nt::Unit, pos).iter() {
            out.push((u.clone(), *e));
            if matches!(u, Rec::Mfix { .. } | Rec::CoerceFunction { .. }) {
                continue;
            }
            let bare_type = matches!(u, Rec::TypeSpec { var: None, denot: None, .. });
            for (c, e2) in self.get(Nt::Chain, *e).iter() {
                // `Person p` is a typed variable, not a type followed by a variable
                if bare_type && matches!(c.leftmost(), Rec::VarName { role: None, .. }) {
                    continue;
                }
                out.push((Rec::Binary { op: String::new(), left: Box::new(u.clone()), right: Box::new(c.clone()) }, *e2));
            }
        }
        out
    }

    fn cterm(&mut self, pos: usize) -> Vec<(Rec, usize)> {
        let mut out = Vec::new();
        if self.kw(pos, "NOT") || self.sym(pos, "~") {
            for (c, e) in self.get(Nt::CTerm, pos + 1).iter() {
                out.push((Rec::Negation(Box::new(c.clone())), *e));
            }
        }
        if self.kw(pos, "SOME") {
            for (d, e) in self.get(Nt::DescrB, pos + 1).iter() {
                out.push((Rec::Conditioner(Box::new(d.clone())), *e));
            }
        }
        if self.sym(pos, "(") {
            for (c, e) in self.get(Nt::Cond, pos + 1).iter() {
                if self.sym(*e, ")") {
                    out.push((c.clone(), e + 1));
                }
            }
        }
        for (l, e) in self.get(Nt::Arith, pos).iter() {
            if l.is_cond() {
                out.push((l.clone(), *e));
            }
            let (op, kind) = if let Some(s) = self.any_sym(*e, COMPARE_SYMS) {
                (s, 0)
            } else if let Some(k) = self.any_kw(*e, VALUE_WORDS) {
                (k, 1)
            } else if let Some(k) = self.any_kw(*e, SET_WORDS) {
                (k, 2)
            } else {
                continue;
            };
            for (r, e2) in self.get(Nt::Arith, e + 1).iter() {
                let scalars = l.is_scalar() && r.is_scalar();
                let rec = if kind < 2 && scalars {
                    Rec::ScalExprComp {
                        left: Box::new(l.clone().as_scalar_operand()),
                        right: Box::new(r.clone().as_scalar_operand()),
                        op: op.to_string(),
                    }
                } else if kind == 1 {
                    continue;
                } else {
                    Rec::InfDescrComp { left: Box::new(l.clone()), right: Box::new(r.clone()), op: op.to_string() }
                };
                out.push((rec, *e2));
            }
        }
        out
    }

    // units

    fn unit(&mut self, pos: usize) -> Vec<(Rec, usize)> {
        let mut out = Vec::new();
        self.type_spec(pos, &mut out);
        self.role_ref(pos, &mut out);
        self.mfix(pos, &mut out);
        match self.tok(pos).cloned() {
            Some(Tok::Num(n)) => out.push((Rec::Const(n), pos + 1)),
            Some(Tok::Str(s)) => out.push((Rec::Const(format!("'{}'", s.replace('\'', "''"))), pos + 1)),
            Some(Tok::Word(w)) if w == "true" || w == "false" => out.push((Rec::Const(w), pos + 1)),
            Some(Tok::Keyword(k)) if k == "HEAD" || k == "TAIL" => {
                out.push((Rec::VarName { name: k.to_string(), role: None }, pos + 1))
            }
            Some(Tok::Word(w)) => {
                let call = matches!(self.toks.get(pos + 1), Some(t) if t.tok == Tok::Sym("(") && !t.spaced);
                if call {
                    self.function(w.clone(), pos + 2, &mut out);
                } else if self.is_var_word(&w) {
                    out.push((Rec::VarName { name: w.clone(), role: None }, pos + 1));
                    if self.sym(pos + 1, ".") {
                        let exits: Vec<_> = self.names.exits.clone();
                        for (ws, r) in exits {
                            if let Some(e) = self.phrase(pos + 2, &ws) {
                                out.push((Rec::VarName { name: w.clone(), role: Some((ws.join(" "), r)) }, e));
                            }
                        }
                    }
                }
            }
            _ => {}
        }
        if let Some(op) = self.any_kw(pos, UNARY_OPS) {
            for (u, e) in self.get(Nt::Unit, pos + 1).iter() {
                out.push((Rec::Unary { op: op.to_string(), arg: Box::new(u.clone()) }, *e));
            }
        }
        if let Some(f) = self.any_kw(pos, COERCE_FUNCS) {
            for (c, e) in self.get(Nt::Chain, pos + 1).iter() {
                out.push((Rec::CoerceFunction { func: f.to_string(), arg: Box::new(c.clone()) }, *e));
            }
        }
        if self.sym(pos, "(") {
            for (d, e) in self.get(Nt::Descr, pos + 1).iter() {
                if self.sym(*e, ")") {
                    out.push((d.clone(), e + 1));
                }
            }
        }
        if self.sym(pos, "[") {
            for (ds, e) in self.descr_list(pos + 1, "]") {
                out.push((Rec::SubExpr(ds), e));
            }
        }
        if out.is_empty() {
            self.expect(pos, "a descriptor".into());
        }
        out
    }

    fn descr_list(&mut self, pos: usize, close: &'static str) -> Vec<(Vec<Rec>, usize)> {
        let mut out = Vec::new();
        for (d, e) in self.get(Nt::Descr, pos).iter() {
            if self.sym(*e, close) {
                out.push((vec![d.clone()], e + 1));
            }
            if self.sym(*e, ",") {
                for (mut rest, e2) in self.descr_list(e + 1, close) {
                    rest.insert(0, d.clone());
                    out.push((rest, e2));
                }
            }
        }
        out
    }

    fn function(&mut self, name: String, pos: usize, out: &mut Vec<(Rec, usize)>) {
        let mac = self.schema.macros.get(&name).map(|m| (m.body.is_scalar(), m.body.is_cond()));
        for (args, e) in self.descr_list(pos, ")") {
            let rec = match mac {
                Some((_, true)) => Rec::CondFunction { name: name.clone(), args },
                Some((true, _)) => Rec::ScFunction { name: name.clone(), args: scalar_args(args) },
                Some(_) => Rec::Function { name: name.clone(), args },
                None if args.iter().all(Rec::is_scalar) => Rec::ScFunction { name: name.clone(), args: scalar_args(args) },
                None => Rec::Function { name: name.clone(), args },
            };
            out.push((rec, e));
        }
    }

    fn type_spec(&mut self, pos: usize, out: &mut Vec<(Rec, usize)>) {
        let mut starts: Vec<(Option<String>, usize, Option<TypeId>)> = vec![(None, pos, None)];
        for (ws, t) in &self.names.prefixes {
            if let Some(e) = self.phrase(pos, ws) {
                starts.push((Some(ws.join(" ")), e, Some(t.clone())));
            }
        }
        for (prefix, s, pt) in starts {
            let types: Vec<_> = self
                .names
                .types
                .iter()
                .filter(|(_, t)| pt.as_ref().map_or(true, |p| p == t))
                .filter_map(|(ws, t)| self.phrase(s, ws).map(|e| (ws.join(" "), t.clone(), e)))
                .collect();
            for (name, ty, e) in types {
                let spec = |var, denot| Rec::TypeSpec { prefix: prefix.clone(), name: name.clone(), ty: ty.clone(), var, denot };
                out.push((spec(None, None), e));
                if let Some(v) = self.var(e) {
                    out.push((spec(Some(v), None), e + 1));
                }
                if self.sym(e, ":") {
                    for (d, e2) in self.denot(e + 1) {
                        out.push((spec(None, Some(Box::new(d))), e2));
                    }
                }
            }
        }
    }

    fn denot(&mut self, pos: usize) -> Vec<(Denot, usize)> {
        let mut out = Vec::new();
        if self.sym(pos, "!") {
            if let Some(v) = self.var(pos + 1) {
                out.push((Denot { descr: None, var: Some(v), list: Vec::new() }, pos + 2));
            }
        }
        if self.sym(pos, "(") {
            for (ds, e) in self.denot_list(pos + 1) {
                let d = if ds.len() == 1 {
                    ds.into_iter().next().unwrap()
                } else {
                    Denot { descr: None, var: None, list: ds }
                };
                out.push((d, e));
            }
        }
        for (u, e) in self.get(Nt::Unit, pos).iter() {
            out.push((Denot { descr: Some(Box::new(u.clone())), var: None, list: Vec::new() }, *e));
        }
        out.sort();
        out.dedup();
        out
    }

    fn denot_list(&mut self, pos: usize) -> Vec<(Vec<Denot>, usize)> {
        let mut out = Vec::new();
        for (d, e) in self.denot(pos) {
            if self.sym(e, ")") {
                out.push((vec![d.clone()], e + 1));
            }
            if self.sym(e, ",") {
                for (mut rest, e2) in self.denot_list(e + 1) {
                    rest.insert(0, d.clone());
                    out.push((rest, e2));
                }
            }
        }
        out
    }

    /// Positions after an optional postfix of `t`, paired with the postfix text.
    fn with_postfix(&self, pos: usize, t: Option<&TypeId>) -> Vec<(Option<String>, usize)> {
        let mut v = vec![(None, pos)];
        if let Some(ws) = t.and_then(|t| self.names.post.get(t)) {
            if let Some(e) = self.phrase(pos, ws) {
                v.push((Some(ws.join(" ")), e));
            }
        }
        v
    }

    fn role_ref(&mut self, pos: usize, out: &mut Vec<(Rec, usize)>) {
        let s = self.schema;
        let refs: Vec<(RoleKind, Vec<String>, RoleId)> = self
            .names
            .entries
            .iter()
            .map(|(w, r)| (RoleKind::Entry, w.clone(), r.clone()))
            .chain(self.names.exits.iter().map(|(w, r)| (RoleKind::Exit, w.clone(), r.clone())))
            .collect();
        for (kind, ws, role) in refs {
            let owner = match kind {
                RoleKind::Entry => s.player.get(&role),
                RoleKind::Exit => s.rel(&role),
            };
            for (postfix, p) in self.with_postfix(pos, owner) {
                let Some(e) = self.phrase(p, &ws) else { continue };
                let name = ws.join(" ");
                out.push((Rec::RoleRef { postfix: postfix.clone(), kind, name: name.clone(), role: role.clone() }, e));
                if let Some((fact, e2)) = self.fact_suffix(e, s.rel(&role)) {
                    let name = format!("{name}.{fact}");
                    out.push((Rec::RoleRef { postfix: postfix.clone(), kind, name, role: role.clone() }, e2));
                }
            }
        }
    }

    fn mfix(&mut self, pos: usize, out: &mut Vec<(Rec, usize)>) {
        let all: Vec<_> = self.names.mfix.clone();
        for (parts, m) in all {
            for (postfix, p) in self.with_postfix(pos, self.schema.player.get(&m.roles[0])) {
                let Some(e1) = self.phrase(p, &parts[0]) else { continue };
                let first = parts[0].join(" ");
                let mut heads = vec![(first.clone(), e1)];
                if let Some((fact, e2)) = self.fact_suffix(e1, Some(&m.fact)) {
                    heads.push((format!("{first}.{fact}"), e2));
                }
                for (w, e) in heads {
                    let part = MfixPart { words: w, role: m.roles[1].clone(), descr: None };
                    self.mfix_parts(&parts, &m, &postfix, vec![part], e, out);
                }
            }
        }
    }

    fn mfix_parts(
        &mut self,
        parts: &[Vec<String>],
        m: &MixFix,
        postfix: &Option<String>,
        done: Vec<MfixPart>,
        e: usize,
        out: &mut Vec<(Rec, usize)>,
    ) {
        let rec = |ps: Vec<MfixPart>| Rec::Mfix { postfix: postfix.clone(), start: m.roles[0].clone(), parts: ps };
        let i = done.len();
        if i == parts.len() {
            out.push((rec(done.clone()), e));
            for (c, e2) in self.get(Nt::Chain, e).iter() {
                let mut ps = done.clone();
                ps.last_mut().unwrap().descr = Some(Box::new(c.clone()));
                out.push((rec(ps), *e2));
            }
            return;
        }
        for (d, e2) in self.get(Nt::Chain, e).iter() {
            let Some(e3) = self.phrase(*e2, &parts[i]) else { continue };
            let mut ps = done.clone();
            ps.last_mut().unwrap().descr = Some(Box::new(d.clone()));
            ps.push(MfixPart { words: parts[i].join(" "), role: m.roles[i + 1].clone(), descr: None });
            self.mfix_parts(parts, m, postfix, ps, e3, out);
        }
    }

    // entry points

    pub fn descriptors(&mut self) -> Vec<Rec> {
        let n = self.toks.len();
        self.get(Nt::Descr, 0).iter().filter(|(_, e)| *e == n).map(|(r, _)| r.clone()).collect()
    }

    fn scalar_list(&mut self, pos: usize) -> Vec<(Vec<Rec>, usize)> {
        let mut out = Vec::new();
        for (x, e) in self.get(Nt::Arith, pos).iter() {
            if !x.is_scalar() {
                continue;
            }
            let x = x.clone().as_scalar_operand();
            out.push((vec![x.clone()], *e));
            if self.sym(*e, ",") {
                for (mut rest, e2) in self.scalar_list(e + 1) {
                    rest.insert(0, x.clone());
                    out.push((rest, e2));
                }
            }
        }
        out
    }

    fn order_word(&mut self, pos: usize) -> Option<OrderWord> {
        match self.any_kw(pos, &["ASCENDING", "DESCENDING"])? {
            "ASCENDING" => Some(OrderWord::Ascending),
            _ => Some(OrderWord::Descending),
        }
    }

    fn order_items(&mut self, pos: usize) -> Option<(Vec<(Option<String>, OrderWord)>, usize)> {
        let mut items = Vec::new();
        let mut e = pos;
        loop {
            let item = if let Some(o) = self.order_word(e) {
                self.var_or_std(e + 1).map(|v| (Some(v), o))
            } else if let Some(v) = self.var_or_std(e) {
                self.order_word(e + 1).map(|o| (Some(v), o))
            } else {
                None
            };
            items.push(item?);
            e += 2;
            if !self.sym(e, ",") {
                return Some((items, e));
            }
            e += 1;
        }
    }

    pub fn list_statements(&mut self) -> Vec<ListRec> {
        let n = self.toks.len();
        let mut out = Vec::new();
        if !self.kw(0, "LIST") {
            return out;
        }
        let mut starts = vec![(None, 1)];
        for (xs, e) in self.scalar_list(1) {
            if self.kw(e, "FROM") || self.kw(e, "OF") {
                starts.push((Some(xs), e + 1));
            }
        }
        for (scalars, s) in starts {
            for (body, e) in self.get(Nt::Descr, s).iter() {
                let mut orders = Vec::new();
                if *e == n {
                    orders.push(None);
                }
                if self.kw(*e, "ORDERED") {
                    if let Some(o) = self.order_word(e + 1) {
                        if e + 2 == n {
                            orders.push(Some(vec![(None, o)]));
                        } else {
                            self.expect(e + 2, "end of input".into());
                        }
                    }
                }
                if self.kw(*e, "ORDERED WITH") {
                    if let Some((items, e2)) = self.order_items(e + 1) {
                        if e2 == n {
                            orders.push(Some(items));
                        } else {
                            self.expect(e2, "end of input".into());
                        }
                    }
                }
                if *e < n && orders.is_empty() {
                    self.expect(*e, "end of input".into());
                }
                for order in orders {
                    out.push(ListRec { scalars: scalars.clone(), body: body.clone(), order });
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn note_trailing(&mut self) {
        let n = self.toks.len();
        let ends: Vec<usize> = self.get(Nt::Descr, 0).iter().map(|(_, e)| *e).collect();
        for e in ends {
            if e < n {
                self.expect(e, "end of input".into());
            }
        }
    }
}

fn scalar_args(args: Vec<Rec>) -> Vec<Rec> {
    args.into_iter().map(Rec::as_scalar_operand).collect()
}
