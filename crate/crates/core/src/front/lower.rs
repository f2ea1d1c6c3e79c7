//! Records to path expressions.

use super::records::*;
use crate::path::*;
use crate::relalg::{BagCmp, CmpOp, Logic};
use crate::schema::{AttrName, Schema, TypeId};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct LowerError(pub String);

type Res<T> = Result<T, LowerError>;

fn err<T>(m: impl Into<String>) -> Res<T> {
    Err(LowerError(m.into()))
}

pub fn attr(name: &str) -> AttrName {
    match name {
        "HEAD" => AttrName::hd(),
        "TAIL" => AttrName::tl(),
        n => AttrName::named(n),
    }
}

pub fn constant(text: &str) -> Res<Value> {
    if let Some(q) = text.chars().next().filter(|c| *c == '\'' || *c == '"') {
        let inner = &text[1..text.len().saturating_sub(1).max(1)];
        let doubled: String = [q, q].iter().collect();
        return Ok(Value::str(inner.replace(&doubled, &q.to_string())));
    }
    match text {
        "true" => Ok(Value::Bool(true)),
        "false" => Ok(Value::Bool(false)),
        t => Value::parse_decimal(t).ok_or_else(|| LowerError(format!("malformed constant {t}"))),
    }
}

pub fn value_cmp(op: &str) -> Option<CmpOp> {
    Some(match op {
        "=" | "IS EQUAL TO" => CmpOp::Eq,
        "<>" | "IS NOT EQUAL TO" => CmpOp::Ne,
        "<" | "IS LESS THAN" => CmpOp::Lt,
        "<=" | "IS LESS THAN OR EQUAL TO" => CmpOp::Le,
        ">" | "IS GREATER THAN" => CmpOp::Gt,
        ">=" | "IS GREATER THAN OR EQUAL TO" => CmpOp::Ge,
        _ => return None,
    })
}

fn set_cmp(op: &str) -> Option<BagCmp> {
    Some(match op {
        "=" | "EQUALS" => BagCmp::Eq,
        "<>" | "DOES NOT EQUAL" => BagCmp::Ne,
        "<" | "IS A SUBSET OF" => BagCmp::ProperSub,
        "<=" | "IS A SUBSET OF OR EQUAL TO" => BagCmp::Sub,
        ">" | "IS A SUPERSET OF" => BagCmp::ProperSup,
        ">=" | "IS A SUPERSET OF OR EQUAL TO" => BagCmp::Sup,
        _ => return None,
    })
}

fn logic(op: &str) -> Option<Logic> {
    Some(match op {
        "AND" | "&" => Logic::And,
        "OR" | "|" => Logic::Or,
        "EXCLUSIVE OR" => Logic::Xor,
        "IMPLIES" | "=>" => Logic::Implies,
        "IFF" | "<=>" => Logic::Iff,
        _ => return None,
    })
}

fn agg_kind(f: &str) -> Option<AggKind> {
    Some(match f {
        "THE COUNT OF" => AggKind::Count,
        "THE SUM OF" => AggKind::Sum,
        "THE MINIMUM" | "THE MINIMUM OF" => AggKind::Min,
        "THE MAXIMUM" | "THE MAXIMUM OF" => AggKind::Max,
        "THE AVERAGE" | "THE AVERAGE OF" => AggKind::Avg,
        _ => return None,
    })
}

fn group_kind(f: &str) -> Option<GroupKind> {
    Some(match f {
        "THE COUNT OF" => GroupKind::Count,
        "THE DISTINCT COUNT OF" => GroupKind::DsCount,
        "THE SUM OF" => GroupKind::Sum,
        "THE DISTINCT SUM OF" => GroupKind::DsSum,
        "THE MINIMUM OF" => GroupKind::Min,
        "THE MAXIMUM OF" => GroupKind::Max,
        "THE AVERAGE OF" => GroupKind::Avg,
        _ => return None,
    })
}

/// Right-nested concatenation of the operands of both sides.
pub fn concat_flat(p: PathExpr, q: PathExpr) -> PathExpr {
    let mut ops: Vec<PathExpr> = p.concat_operands().into_iter().cloned().collect();
    ops.extend(q.concat_operands().into_iter().cloned());
    PathExpr::chain(ops)
}

fn hd(p: PathExpr) -> PathExpr {
    PathExpr::HdCoerce(b(p))
}

/// The type a path ends in, looking through a trailing variable or denotation.
fn end_type(p: &PathExpr) -> Option<TypeId> {
    let ops = p.concat_operands();
    let mut it = ops.iter().rev();
    match it.next()? {
        PathExpr::Type(x) | PathExpr::Denote(x, _) => Some(x.clone()),
        PathExpr::Scalar(_) => match it.next()? {
            PathExpr::Type(x) => Some(x.clone()),
            _ => None,
        },
        _ => None,
    }
}

fn start_type(p: &PathExpr) -> Option<TypeId> {
    match p.concat_operands().first()? {
        PathExpr::Type(x) | PathExpr::Denote(x, _) => Some(x.clone()),
        _ => None,
    }
}

pub struct Lowerer<'s> {
    schema: &'s Schema,
    fresh: usize,
}

impl<'s> Lowerer<'s> {
    pub fn new(schema: &'s Schema) -> Self {
        Lowerer { schema, fresh: 0 }
    }

    pub fn path(&mut self, r: &Rec) -> Res<PathExpr> {
        use PathExpr as P;
        Ok(match r {
            Rec::TypeSpec { ty, var, denot, .. } => match (var, denot) {
                (Some(v), _) => P::Type(ty.clone()).concat(P::Scalar(PeScalar::Var(attr(v)))),
                (None, Some(d)) => P::Denote(ty.clone(), self.denot(d)?),
                (None, None) => P::Type(ty.clone()),
            },
            Rec::RoleRef { kind: RoleKind::Entry, role, .. } => P::Role(role.clone()),
            Rec::RoleRef { kind: RoleKind::Exit, role, .. } => P::Role(role.clone()).rev(),
            Rec::Mfix { start, parts, .. } => {
                let (last, middle) = parts.split_last().ok_or_else(|| LowerError("empty mix-fix".into()))?;
                let middle = middle
                    .iter()
                    .map(|p| match &p.descr {
                        Some(d) => Ok((p.role.clone(), self.path(d)?)),
                        None => err(format!("mix-fix part '{}' lacks its argument", p.words)),
                    })
                    .collect::<Res<Vec<_>>>()?;
                let m = P::MixFix { first: start.clone(), middle, last: last.role.clone() };
                match &last.descr {
                    Some(t) => concat_flat(m, self.path(t)?),
                    None => m,
                }
            }
            Rec::Unary { op, arg } => {
                let a = self.path(arg)?;
                match op.as_str() {
                    "ONLY" => a.front(),
                    "DISTINCT" => a.distinct(),
                    "THE REVERSE OF" => a.rev(),
                    o => return err(format!("unknown unary operator {o}")),
                }
            }
            Rec::Binary { op, left, right } => self.binary(op, left, right)?,
            Rec::Shuffle { vars, body } => {
                if vars.len() < 2 {
                    return err("a path shuffle needs at least two variables");
                }
                P::Shuffle(b(self.path(body)?), vars.iter().map(|v| attr(v)).collect())
            }
            Rec::Function { name, args } => {
                let args = args.iter().map(|a| self.path(a)).collect::<Res<Vec<_>>>()?;
                if self.schema.macros.contains_key(name) {
                    P::Macro(name.clone(), args)
                } else {
                    P::FuncApp(name.clone(), args.into_iter().map(hd).collect())
                }
            }
            Rec::Selection { branches, default } => P::Where {
                branches: branches.iter().map(|(d, c)| Ok((self.path(d)?, self.cond(c)?))).collect::<Res<_>>()?,
                default: match default {
                    Some(d) => Some(b(self.path(d)?)),
                    None => None,
                },
                form: WhereForm::of(branches.len(), default.is_some()),
            },
            Rec::Confluence { base, aspects } => {
                let mut out = Vec::new();
                for a in aspects {
                    let name = match &a.as_var {
                        Some(v) => attr(v),
                        None => {
                            self.fresh += 1;
                            AttrName::fresh(format!("as{}", self.fresh))
                        }
                    };
                    out.push(crate::path::Aspect { attr: name, path: self.path(&a.descr)?, via: a.via_var.as_deref().map(attr) });
                }
                P::Confluence(out, b(self.path(base)?))
            }
            Rec::GroupAcct { func, var, body, by } => P::Group {
                kind: group_kind(func).ok_or_else(|| LowerError(format!("unknown group function {func}")))?,
                body: b(self.path(body)?),
                by: by.iter().map(|v| attr(v)).collect(),
                target: var.as_deref().map(attr),
            },
            Rec::SubExpr(rs) => P::SubExpr(rs.iter().map(|r| self.path(r)).collect::<Res<_>>()?),
            Rec::Const(_)
            | Rec::ScConst(_)
            | Rec::CoerceFunction { .. }
            | Rec::VarName { .. }
            | Rec::ScFunction { .. }
            | Rec::ScBinary { .. } => P::Scalar(self.scalar(r)?),
            _ => P::Cond(self.cond(r)?),
        })
    }

    fn binary(&mut self, op: &str, left: &Rec, right: &Rec) -> Res<PathExpr> {
        use PathExpr as P;
        let (l, r) = (self.path(left)?, self.path(right)?);
        if let Some(c) = value_cmp(op) {
            return Ok(P::RelCompare(b(P::TlCoerce(b(l))), c, b(hd(r))));
        }
        let frs = |k| P::SetOp(k, b(l.clone().front()), b(r.clone().front()));
        Ok(match op {
            "" => concat_flat(l, r),
            "IS" => {
                let (Some(x), Some(y)) = (end_type(&l), start_type(&r)) else {
                    return err("IS needs a type on both sides");
                };
                if !self.schema.type_related(&x, &y).map_err(|e| LowerError(e.to_string()))? {
                    return err(format!("IS connects unrelated types {x} and {y}"));
                }
                concat_flat(l, r)
            }
            "UNITED WITH" => P::SetOp(SetOpKind::Union, b(l), b(r)),
            "INTERSECTED WITH" => P::SetOp(SetOpKind::Intersect, b(l), b(r)),
            "MINUS" => P::SetOp(SetOpKind::Diff, b(l), b(r)),
            "WHICH ARE ALL IN" => P::SetCompare(b(l), SetCmpKind::AllIn, b(r)),
            "THAT INCLUDES ALL" => P::SetCompare(b(l), SetCmpKind::IncludesAll, b(r)),
            "MATCHING ALL" => P::SetCompare(b(l), SetCmpKind::MatchAll, b(r)),
            "MISSING" => P::Missing(b(l), b(r)),
            "WITH" => P::Product(b(l), b(r)),
            "OR OTHERWISE" => frs(SetOpKind::Union),
            "AND ALSO" => frs(SetOpKind::Intersect),
            "BUT NOT" => frs(SetOpKind::Diff),
            "+" | "-" | "*" | "/" => P::FuncApp(op.to_string(), vec![hd(l), hd(r)]),
            o => return err(format!("unknown operator {o}")),
        })
    }

    pub fn scalar(&mut self, r: &Rec) -> Res<PeScalar> {
        Ok(match r {
            Rec::Const(c) | Rec::ScConst(c) => PeScalar::Const(constant(c)?),
            Rec::CoerceFunction { func, arg } => {
                let k = agg_kind(func).ok_or_else(|| LowerError(format!("unknown function {func}")))?;
                PeScalar::Agg(k, b(hd(self.path(arg)?)))
            }
            Rec::VarName { name, role: None } => PeScalar::Var(attr(name)),
            Rec::VarName { name, role: Some((_, p)) } => PeScalar::VarRole(attr(name), p.clone()),
            Rec::ScFunction { name, args } => {
                PeScalar::Apply(name.clone(), args.iter().map(|a| self.scalar(a)).collect::<Res<_>>()?)
            }
            Rec::ScBinary { op, left, right } => PeScalar::Apply(op.clone(), vec![self.scalar(left)?, self.scalar(right)?]),
            _ => return err("expected a scalar expression"),
        })
    }

    pub fn cond(&mut self, r: &Rec) -> Res<PeCond> {
        Ok(match r {
            Rec::Conditioner(d) => PeCond::Some(b(self.path(d)?)),
            Rec::InfDescrComp { left, right, op } => {
                let (l, q) = (self.path(left)?, self.path(right)?);
                if op == "IS DISJOINT FROM" {
                    PeCond::Exclusion(b(l), b(q))
                } else {
                    let k = set_cmp(op).ok_or_else(|| LowerError(format!("unknown set comparator {op}")))?;
                    PeCond::BagCompare(b(l), k, b(q))
                }
            }
            Rec::ScalExprComp { left, right, op } => {
                let k = value_cmp(op).ok_or_else(|| LowerError(format!("unknown comparator {op}")))?;
                PeCond::Compare(self.scalar(left)?, k, self.scalar(right)?)
            }
            Rec::BinCond { left, right, op } => {
                let k = logic(op).ok_or_else(|| LowerError(format!("unknown connective {op}")))?;
                PeCond::Logic(Box::new(self.cond(left)?), k, Box::new(self.cond(right)?))
            }
            Rec::CondFunction { name, args } => {
                let args = args.iter().map(|a| self.path(a)).collect::<Res<Vec<_>>>()?;
                PeCond::Some(b(PathExpr::Macro(name.clone(), args)))
            }
            Rec::Negation(c) => PeCond::Not(Box::new(self.cond(c)?)),
            _ => return err("expected a condition"),
        })
    }

    fn denot(&mut self, d: &Denot) -> Res<PeDenotation> {
        if let Some(v) = &d.var {
            return Ok(PeDenotation::Abstract(attr(v)));
        }
        if let Some(r) = &d.descr {
            return Ok(PeDenotation::ByPath(b(self.path(r)?)));
        }
        match d.list.len() {
            0 => err("empty denotation"),
            1 => self.denot(&d.list[0]),
            _ => Ok(PeDenotation::Composite(d.list.iter().map(|x| self.denot(x)).collect::<Res<_>>()?)),
        }
    }
}
