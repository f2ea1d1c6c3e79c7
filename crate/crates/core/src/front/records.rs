//! Syntax-tree records of ConQuer text, and their numbered listing.

use std::fmt::Write;

use crate::schema::{RoleId, Schema, TypeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoleKind {
    Entry,
    Exit,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Denot {
    pub descr: Option<Box<Rec>>,
    pub var: Option<String>,
    pub list: Vec<Denot>,
}

/// One part of a mix-fix verbalisation: the words, the role they lead into, and
/// the descriptor that follows.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MfixPart {
    pub words: String,
    pub role: RoleId,
    pub descr: Option<Box<Rec>>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Aspect {
    pub descr: Rec,
    pub as_var: Option<String>,
    pub via_var: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rec {
    TypeSpec { prefix: Option<String>, name: String, ty: TypeId, var: Option<String>, denot: Option<Box<Denot>> },
    RoleRef { postfix: Option<String>, kind: RoleKind, name: String, role: RoleId },
    Const(String),
    Mfix { postfix: Option<String>, start: RoleId, parts: Vec<MfixPart> },
    Unary { op: String, arg: Box<Rec> },
    Binary { op: String, left: Box<Rec>, right: Box<Rec> },
    Shuffle { vars: Vec<String>, body: Box<Rec> },
    Function { name: String, args: Vec<Rec> },
    Selection { branches: Vec<(Rec, Rec)>, default: Option<Box<Rec>> },
    Confluence { base: Box<Rec>, aspects: Vec<Aspect> },
    GroupAcct { func: String, var: Option<String>, body: Box<Rec>, by: Vec<String> },
    SubExpr(Vec<Rec>),
    ScConst(String),
    CoerceFunction { func: String, arg: Box<Rec> },
    /// `role` is resolved against the reverse role names when parsing.
    VarName { name: String, role: Option<(String, RoleId)> },
    ScFunction { name: String, args: Vec<Rec> },
    ScBinary { op: String, left: Box<Rec>, right: Box<Rec> },
    Conditioner(Box<Rec>),
    InfDescrComp { left: Box<Rec>, right: Box<Rec>, op: String },
    ScalExprComp { left: Box<Rec>, right: Box<Rec>, op: String },
    BinCond { left: Box<Rec>, right: Box<Rec>, op: String },
    CondFunction { name: String, args: Vec<Rec> },
    Negation(Box<Rec>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrderWord {
    Ascending,
    Descending,
}

impl OrderWord {
    pub fn text(self) -> &'static str {
        match self {
            OrderWord::Ascending => "ASCENDING",
            OrderWord::Descending => "DESCENDING",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ListRec {
    pub scalars: Option<Vec<Rec>>,
    pub body: Rec,
    /// `None` as variable name orders on the head.
    pub order: Option<Vec<(Option<String>, OrderWord)>>,
}

impl Rec {
    pub fn is_scalar(&self) -> bool {
        matches!(
            self,
            Rec::Const(_)
                | Rec::ScConst(_)
                | Rec::CoerceFunction { .. }
                | Rec::VarName { .. }
                | Rec::ScFunction { .. }
                | Rec::ScBinary { .. }
        )
    }

    pub fn is_cond(&self) -> bool {
        matches!(
            self,
            Rec::Conditioner(_)
                | Rec::InfDescrComp { .. }
                | Rec::ScalExprComp { .. }
                | Rec::BinCond { .. }
                | Rec::CondFunction { .. }
                | Rec::Negation(_)
        )
    }

    /// Constants directly under scalar records are stored as scalar constants.
    pub fn as_scalar_operand(self) -> Rec {
        match self {
            Rec::Const(c) => Rec::ScConst(c),
            other => other,
        }
    }

    /// The first unit of a concatenation chain.
    pub fn leftmost(&self) -> &Rec {
        match self {
            Rec::Binary { op, left, .. } if op.is_empty() => left.leftmost(),
            other => other,
        }
    }
}

fn q(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn opt(s: &Option<String>) -> String {
    s.as_ref().map(|x| q(x)).unwrap_or_else(|| "NULL".into())
}

fn id(n: usize) -> String {
    format!("{n:02}")
}

struct Dumper {
    lines: Vec<String>,
}

impl Dumper {
    fn reserve(&mut self) -> usize {
        self.lines.push(String::new());
        self.lines.len() - 1
    }

    fn list(&mut self, rs: &[Rec]) -> String {
        let ids: Vec<String> = rs.iter().map(|r| id(self.rec(r))).collect();
        format!("{{{}}}", ids.join(", "))
    }

    fn denot(&mut self, d: &Denot) -> usize {
        let n = self.reserve();
        let descr = d.descr.as_ref().map(|r| id(self.rec(r))).unwrap_or_else(|| "NULL".into());
        let list = if d.list.is_empty() {
            "NULL".to_string()
        } else {
            let ids: Vec<String> = d.list.iter().map(|x| id(self.denot(x))).collect();
            format!("{{{}}}", ids.join(", "))
        };
        self.lines[n] = format!("DENOT({descr}, {}, {list})", opt(&d.var));
        n
    }

    fn rec(&mut self, r: &Rec) -> usize {
        let n = self.reserve();
        let line = match r {
            Rec::TypeSpec { prefix, name, ty, var, denot } => {
                let d = denot.as_ref().map(|d| id(self.denot(d))).unwrap_or_else(|| "NULL".into());
                format!("TYPE_SPEC({}, {}, {ty}, {}, {d})", opt(prefix), q(name), opt(var))
            }
            Rec::RoleRef { postfix, kind, name, role } => {
                let k = match kind {
                    RoleKind::Entry => "entry",
                    RoleKind::Exit => "exit",
                };
                format!("ROLE_REF({}, {k}, {}, {role})", opt(postfix), q(name))
            }
            Rec::Const(c) => format!("CONST({})", q(c)),
            Rec::Mfix { postfix, start, parts } => {
                let ps: Vec<String> = parts
                    .iter()
                    .map(|p| {
                        let d = p.descr.as_ref().map(|d| id(self.rec(d))).unwrap_or_else(|| "NULL".into());
                        format!("{{{}, {}, {d}}}", q(&p.words), p.role)
                    })
                    .collect();
                format!("MFIX({}, {start}, {})", opt(postfix), ps.join(", "))
            }
            Rec::Unary { op, arg } => {
                let a = self.rec(arg);
                format!("UNARY_OP_APPLIC({}, {})", q(op), id(a))
            }
            Rec::Binary { op, left, right } => {
                let (l, r) = (self.rec(left), self.rec(right));
                format!("BINARY_OP_APPLIC({}, {}, {})", q(op), id(l), id(r))
            }
            Rec::Shuffle { vars, body } => {
                let b = self.rec(body);
                let vs: Vec<String> = vars.iter().map(|v| q(v)).collect();
                format!("SHUFFLE({{{}}}, {})", vs.join(", "), id(b))
            }
            Rec::Function { name, args } => format!("FUNCTION({}, {})", q(name), self.list(args)),
            Rec::Selection { branches, default } => {
                let bs: Vec<String> = branches
                    .iter()
                    .map(|(p, c)| {
                        let (a, b) = (self.rec(p), self.rec(c));
                        format!("{{{},{}}}", id(a), id(b))
                    })
                    .collect();
                let d = default.as_ref().map(|d| id(self.rec(d))).unwrap_or_else(|| "NULL".into());
                format!("SELECTION({{{}}}, {d})", bs.join(","))
            }
            Rec::Confluence { base, aspects } => {
                let b = self.rec(base);
                let asp: Vec<String> = aspects
                    .iter()
                    .map(|a| format!("{{{}, {}, {}}}", id(self.rec(&a.descr)), opt(&a.as_var), opt(&a.via_var)))
                    .collect();
                format!("CONFLUENCE({}, {{{}}})", id(b), asp.join(", "))
            }
            Rec::GroupAcct { func, var, body, by } => {
                let b = self.rec(body);
                let vs: Vec<String> = by.iter().map(|v| q(v)).collect();
                format!("GROUP_ACCT({}, {}, {}, {{{}}})", q(func), opt(var), id(b), vs.join(", "))
            }
            Rec::SubExpr(rs) => format!("SUB_EXPR({})", self.list(rs)),
            Rec::ScConst(c) => format!("SC_CONST({})", q(c)),
            Rec::CoerceFunction { func, arg } => {
                let a = self.rec(arg);
                format!("COERCE_FUNCTION({}, {{{}}})", q(func), id(a))
            }
            Rec::VarName { name, role } => {
                format!("VAR_NAME({}, {})", q(name), opt(&role.as_ref().map(|r| r.0.clone())))
            }
            Rec::ScFunction { name, args } => format!("SC_FUNCTION({}, {})", q(name), self.list(args)),
            Rec::ScBinary { op, left, right } => {
                let (l, r) = (self.rec(left), self.rec(right));
                format!("SC_BINARY_OP_APPLIC({}, {}, {})", q(op), id(l), id(r))
            }
            Rec::Conditioner(p) => {
                let a = self.rec(p);
                format!("CONDITIONER({})", id(a))
            }
            Rec::InfDescrComp { left, right, op } => {
                let (l, r) = (self.rec(left), self.rec(right));
                format!("INF_DESCR_COMP({}, {}, {})", id(l), id(r), q(op))
            }
            Rec::ScalExprComp { left, right, op } => {
                let (l, r) = (self.rec(left), self.rec(right));
                format!("SCALEXPRESS_COMP({}, {}, {})", id(l), id(r), q(op))
            }
            Rec::BinCond { left, right, op } => {
                let (l, r) = (self.rec(left), self.rec(right));
                format!("BIN_COND_COMP({}, {}, {})", id(l), id(r), q(op))
            }
            Rec::CondFunction { name, args } => format!("COND_FUNCTION({}, {})", q(name), self.list(args)),
            Rec::Negation(c) => {
                let a = self.rec(c);
                format!("NEGATION({})", id(a))
            }
        };
        self.lines[n] = line;
        n
    }
}

fn render(lines: Vec<String>) -> String {
    let mut out = String::new();
    for (i, l) in lines.iter().enumerate() {
        let _ = writeln!(out, "{} {l}", id(i));
    }
    out
}

/// Numbered depth-first listing, one record per line.
pub fn dump_records(r: &Rec) -> String {
    let mut d = Dumper { lines: Vec::new() };
    d.rec(r);
    render(d.lines)
}

pub fn dump_list(l: &ListRec) -> String {
    let mut d = Dumper { lines: Vec::new() };
    let n = d.reserve();
    let sc = match &l.scalars {
        Some(xs) => d.list(xs),
        None => "NULL".into(),
    };
    let body = d.rec(&l.body);
    let ord = match &l.order {
        Some(items) => {
            let xs: Vec<String> = items.iter().map(|(v, o)| format!("{{{}, {}}}", opt(v), q(o.text()))).collect();
            format!("{{{}}}", xs.join(", "))
        }
        None => "NULL".into(),
    };
    d.lines[n] = format!("LIST({sc}, {}, {ord})", id(body));
    render(d.lines)
}

/// Whitespace normalisation used when comparing listings: runs of blanks collapse
/// to one space, and blanks at the edges of quoted fields are dropped.
pub fn normalise_listing(s: &str) -> String {
    let mut lines = Vec::new();
    for line in s.lines() {
        let line = line.split_whitespace().collect::<Vec<_>>().join(" ");
        if line.is_empty() {
            continue;
        }
        let mut out = String::new();
        let mut chars = line.chars().peekable();
        while let Some(c) = chars.next() {
            if c != '"' {
                out.push(c);
                continue;
            }
            let mut field = String::new();
            while let Some(d) = chars.next() {
                if d == '\\' {
                    field.push(d);
                    if let Some(e) = chars.next() {
                        field.push(e);
                    }
                } else if d == '"' {
                    break;
                } else {
                    field.push(d);
                }
            }
            out.push('"');
            out.push_str(field.trim());
            out.push('"');
        }
        lines.push(out);
    }
    lines.join("\n")
}

// Rebuilding trees from a listing.

#[derive(Debug, Clone, PartialEq)]
enum Field {
    Null,
    Str(String),
    Ident(String),
    List(Vec<Field>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("record listing line {line}: {msg}")]
pub struct DumpError {
    pub line: usize,
    pub msg: String,
}

fn parse_fields(s: &str, line: usize) -> Result<Vec<Field>, DumpError> {
    let err = |m: &str| DumpError { line, msg: m.to_string() };
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    fn seq(chars: &[char], i: &mut usize, close: char, line: usize) -> Result<Vec<Field>, DumpError> {
        let err = |m: &str| DumpError { line, msg: m.to_string() };
        let mut out = Vec::new();
        loop {
            while *i < chars.len() && chars[*i].is_whitespace() {
                *i += 1;
            }
            match chars.get(*i) {
                None => return Err(err("unexpected end of record")),
                Some(c) if *c == close => {
                    *i += 1;
                    return Ok(out);
                }
                Some(',') => {
                    *i += 1;
                }
                Some('{') => {
                    *i += 1;
                    out.push(Field::List(seq(chars, i, '}', line)?));
                }
                Some('"') => {
                    *i += 1;
                    let mut v = String::new();
                    loop {
                        match chars.get(*i) {
                            None => return Err(err("unterminated string")),
                            Some('\\') => {
                                v.extend(chars.get(*i + 1));
                                *i += 2;
                            }
                            Some('"') => {
                                *i += 1;
                                break;
                            }
                            Some(c) => {
                                v.push(*c);
                                *i += 1;
                            }
                        }
                    }
                    out.push(Field::Str(v));
                }
                Some(_) => {
                    let start = *i;
                    while *i < chars.len() && !matches!(chars[*i], ',' | ')' | '}') && !chars[*i].is_whitespace() {
                        *i += 1;
                    }
                    let w: String = chars[start..*i].iter().collect();
                    out.push(if w == "NULL" { Field::Null } else { Field::Ident(w) });
                }
            }
        }
    }
    if chars.first() != Some(&'(') {
        return Err(err("expected '('"));
    }
    i += 1;
    let fs = seq(&chars, &mut i, ')', line)?;
    if i != chars.len() {
        return Err(err("trailing text after record"));
    }
    Ok(fs)
}

struct Rebuild<'a> {
    rows: Vec<(String, Vec<Field>)>,
    /// Source line of each record.
    src: Vec<usize>,
    schema: &'a Schema,
}

impl Rebuild<'_> {
    fn err(&self, n: usize, m: &str) -> DumpError {
        DumpError { line: self.src.get(n).copied().unwrap_or(0), msg: m.to_string() }
    }

    fn id(&self, f: &Field, n: usize) -> Result<usize, DumpError> {
        match f {
            Field::Ident(s) => s.parse().map_err(|_| self.err(n, "expected a record id")),
            _ => Err(self.err(n, "expected a record id")),
        }
    }

    fn ids(&self, f: &Field, n: usize) -> Result<Vec<usize>, DumpError> {
        match f {
            Field::List(xs) => xs.iter().map(|x| self.id(x, n)).collect(),
            _ => Err(self.err(n, "expected a list of record ids")),
        }
    }

    fn ostr(&self, f: &Field, n: usize) -> Result<Option<String>, DumpError> {
        match f {
            Field::Null => Ok(None),
            Field::Str(s) => Ok(Some(s.clone())),
            _ => Err(self.err(n, "expected a string or NULL")),
        }
    }

    fn str(&self, f: &Field, n: usize) -> Result<String, DumpError> {
        self.ostr(f, n)?.ok_or_else(|| self.err(n, "expected a string"))
    }

    fn strs(&self, f: &Field, n: usize) -> Result<Vec<String>, DumpError> {
        match f {
            Field::List(xs) => xs.iter().map(|x| self.str(x, n)).collect(),
            _ => Err(self.err(n, "expected a list of strings")),
        }
    }

    fn ident(&self, f: &Field, n: usize) -> Result<String, DumpError> {
        match f {
            Field::Ident(s) => Ok(s.clone()),
            _ => Err(self.err(n, "expected an identifier")),
        }
    }

    fn fields(&self, n: usize, name: &str, k: usize) -> Result<&[Field], DumpError> {
        let (rn, fs) = self.rows.get(n).ok_or_else(|| self.err(n, "dangling record id"))?;
        if rn != name && !name.is_empty() {
            return Err(self.err(n, &format!("expected a {name} record")));
        }
        if fs.len() != k {
            return Err(self.err(n, &format!("{rn} takes {k} fields")));
        }
        Ok(fs)
    }

    fn denot(&self, n: usize) -> Result<Denot, DumpError> {
        let f = self.fields(n, "DENOT", 3)?;
        let descr = match &f[0] {
            Field::Null => None,
            x => Some(Box::new(self.rec(self.id(x, n)?)?)),
        };
        let list = match &f[2] {
            Field::Null => Vec::new(),
            x => self.ids(x, n)?.into_iter().map(|i| self.denot(i)).collect::<Result<_, _>>()?,
        };
        Ok(Denot { descr, var: self.ostr(&f[1], n)?, list })
    }

    fn recs(&self, f: &Field, n: usize) -> Result<Vec<Rec>, DumpError> {
        self.ids(f, n)?.into_iter().map(|i| self.rec(i)).collect()
    }

    fn child(&self, f: &Field, n: usize) -> Result<Box<Rec>, DumpError> {
        Ok(Box::new(self.rec(self.id(f, n)?)?))
    }

    fn rec(&self, n: usize) -> Result<Rec, DumpError> {
        let (name, fs) = self.rows.get(n).ok_or_else(|| self.err(n, "dangling record id"))?;
        let need = |k: usize| self.fields(n, "", k);
        Ok(match name.as_str() {
            "TYPE_SPEC" => {
                let f = need(5)?;
                Rec::TypeSpec {
                    prefix: self.ostr(&f[0], n)?,
                    name: self.str(&f[1], n)?,
                    ty: TypeId::new(self.ident(&f[2], n)?),
                    var: self.ostr(&f[3], n)?,
                    denot: match &f[4] {
                        Field::Null => None,
                        x => Some(Box::new(self.denot(self.id(x, n)?)?)),
                    },
                }
            }
            "ROLE_REF" => {
                let f = need(4)?;
                let kind = match self.ident(&f[1], n)?.as_str() {
                    "entry" => RoleKind::Entry,
                    "exit" => RoleKind::Exit,
                    _ => return Err(self.err(n, "role kind must be entry or exit")),
                };
                Rec::RoleRef {
                    postfix: self.ostr(&f[0], n)?,
                    kind,
                    name: self.str(&f[2], n)?,
                    role: RoleId::new(self.ident(&f[3], n)?),
                }
            }
            "CONST" => Rec::Const(self.str(&need(1)?[0], n)?),
            "SC_CONST" => Rec::ScConst(self.str(&need(1)?[0], n)?),
            "MFIX" => {
                if fs.len() < 3 {
                    return Err(self.err(n, "MFIX needs at least one part"));
                }
                let mut parts = Vec::new();
                for p in &fs[2..] {
                    match p {
                        Field::List(t) if t.len() == 3 => parts.push(MfixPart {
                            words: self.str(&t[0], n)?,
                            role: RoleId::new(self.ident(&t[1], n)?),
                            descr: match &t[2] {
                                Field::Null => None,
                                x => Some(self.child(x, n)?),
                            },
                        }),
                        _ => return Err(self.err(n, "malformed mix-fix part")),
                    }
                }
                Rec::Mfix { postfix: self.ostr(&fs[0], n)?, start: RoleId::new(self.ident(&fs[1], n)?), parts }
            }
            "UNARY_OP_APPLIC" => {
                let f = need(2)?;
                Rec::Unary { op: self.str(&f[0], n)?, arg: self.child(&f[1], n)? }
            }
            "BINARY_OP_APPLIC" | "SC_BINARY_OP_APPLIC" => {
                let f = need(3)?;
                let (op, left, right) = (self.str(&f[0], n)?, self.child(&f[1], n)?, self.child(&f[2], n)?);
                if name == "BINARY_OP_APPLIC" {
                    Rec::Binary { op, left, right }
                } else {
                    Rec::ScBinary { op, left, right }
                }
            }
            "SHUFFLE" => {
                let f = need(2)?;
                Rec::Shuffle { vars: self.strs(&f[0], n)?, body: self.child(&f[1], n)? }
            }
            "FUNCTION" | "SC_FUNCTION" | "COND_FUNCTION" => {
                let f = need(2)?;
                let (fname, args) = (self.str(&f[0], n)?, self.recs(&f[1], n)?);
                match name.as_str() {
                    "FUNCTION" => Rec::Function { name: fname, args },
                    "SC_FUNCTION" => Rec::ScFunction { name: fname, args },
                    _ => Rec::CondFunction { name: fname, args },
                }
            }
            "SELECTION" => {
                let f = need(2)?;
                let branches = match &f[0] {
                    Field::List(xs) => xs
                        .iter()
                        .map(|x| match x {
                            Field::List(pc) if pc.len() == 2 => {
                                Ok((self.rec(self.id(&pc[0], n)?)?, self.rec(self.id(&pc[1], n)?)?))
                            }
                            _ => Err(self.err(n, "malformed selection branch")),
                        })
                        .collect::<Result<_, _>>()?,
                    _ => return Err(self.err(n, "malformed selection")),
                };
                let default = match &f[1] {
                    Field::Null => None,
                    x => Some(self.child(x, n)?),
                };
                Rec::Selection { branches, default }
            }
            "CONFLUENCE" => {
                let f = need(2)?;
                let aspects = match &f[1] {
                    Field::List(xs) => xs
                        .iter()
                        .map(|x| match x {
                            Field::List(t) if t.len() == 3 => Ok(Aspect {
                                descr: self.rec(self.id(&t[0], n)?)?,
                                as_var: self.ostr(&t[1], n)?,
                                via_var: self.ostr(&t[2], n)?,
                            }),
                            _ => Err(self.err(n, "malformed confluence aspect")),
                        })
                        .collect::<Result<_, _>>()?,
                    _ => return Err(self.err(n, "malformed confluence")),
                };
                Rec::Confluence { base: self.child(&f[0], n)?, aspects }
            }
            "GROUP_ACCT" => {
                let f = need(4)?;
                Rec::GroupAcct {
                    func: self.str(&f[0], n)?,
                    var: self.ostr(&f[1], n)?,
                    body: self.child(&f[2], n)?,
                    by: self.strs(&f[3], n)?,
                }
            }
            "SUB_EXPR" => Rec::SubExpr(self.recs(&need(1)?[0], n)?),
            "COERCE_FUNCTION" => {
                let f = need(2)?;
                let args = self.ids(&f[1], n)?;
                if args.len() != 1 {
                    return Err(self.err(n, "a coercion function takes one descriptor"));
                }
                Rec::CoerceFunction { func: self.str(&f[0], n)?, arg: Box::new(self.rec(args[0])?) }
            }
            "VAR_NAME" => {
                let f = need(2)?;
                let role = match self.ostr(&f[1], n)? {
                    None => None,
                    Some(r) => {
                        let id = self
                            .schema
                            .naming
                            .rnm
                            .iter()
                            .find(|(_, v)| **v == r)
                            .map(|(k, _)| k.clone())
                            .ok_or_else(|| self.err(n, &format!("unknown reverse role name {r}")))?;
                        Some((r, id))
                    }
                };
                Rec::VarName { name: self.str(&f[0], n)?, role }
            }
            "CONDITIONER" => Rec::Conditioner(self.child(&need(1)?[0], n)?),
            "NEGATION" => Rec::Negation(self.child(&need(1)?[0], n)?),
            "INF_DESCR_COMP" | "SCALEXPRESS_COMP" | "BIN_COND_COMP" => {
                let f = need(3)?;
                let (left, right, op) = (self.child(&f[0], n)?, self.child(&f[1], n)?, self.str(&f[2], n)?);
                match name.as_str() {
                    "INF_DESCR_COMP" => Rec::InfDescrComp { left, right, op },
                    "SCALEXPRESS_COMP" => Rec::ScalExprComp { left, right, op },
                    _ => Rec::BinCond { left, right, op },
                }
            }
            other => return Err(self.err(n, &format!("unknown record {other}"))),
        })
    }
}

/// Rebuilds a record tree from its listing. Role names in variable references are
/// resolved against `schema`.
pub fn parse_dump(text: &str, schema: &Schema) -> Result<Rec, DumpError> {
    let mut rows = Vec::new();
    let mut src = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let (k, line, at) = (rows.len(), line.trim(), n + 1);
        let err = |m: &str| DumpError { line: at, msg: m.to_string() };
        let (num, rest) = line.split_once(' ').ok_or_else(|| err("missing record id"))?;
        if num.parse::<usize>().ok() != Some(k) {
            return Err(err("record ids must be consecutive"));
        }
        let open = rest.find('(').ok_or_else(|| err("expected '('"))?;
        rows.push((rest[..open].trim().to_string(), parse_fields(&rest[open..], at)?));
        src.push(at);
    }
    if rows.is_empty() {
        return Err(DumpError { line: 1, msg: "empty listing".into() });
    }
    let rb = Rebuild { rows, src, schema };
    rb.rec(0)
}
