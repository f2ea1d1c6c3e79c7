//! Rewrites and uses of path expressions: macros, normalisation, derivation rules,
//! constraints and result ordering.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::translate::translate;
use super::typing::*;
use super::PathError;
use crate::relalg::eval;
use crate::schema::{AttrName, DerivationRule, RoleId, Schema, TypeId};
use crate::value::{Population, Relation, Tuple, Value};

type Res<T> = Result<T, PathError>;

/// Expands every macro application, innermost arguments first.
pub fn expand_macros(s: &Schema, p: &PathExpr) -> Res<PathExpr> {
    let mut counter = 0;
    expand_in(s, p, &mut Vec::new(), &mut counter)
}

pub fn expand_macro(s: &Schema, name: &str, args: &[PathExpr]) -> Res<PathExpr> {
    let mut counter = 0;
    let body = instantiate(s, name, args, &mut counter)?;
    expand_in(s, &body, &mut vec![name.to_string()], &mut counter)
}

fn expand_in(s: &Schema, p: &PathExpr, stack: &mut Vec<String>, counter: &mut usize) -> Res<PathExpr> {
    if let PathExpr::Macro(n, args) = p {
        if stack.contains(n) {
            return Err(PathError::Macro(format!("recursive macro {n}")));
        }
        let args = args.iter().map(|a| expand_in(s, a, stack, counter)).collect::<Res<Vec<_>>>()?;
        let body = instantiate(s, n, &args, counter)?;
        stack.push(n.clone());
        let r = expand_in(s, &body, stack, counter);
        stack.pop();
        return r;
    }
    match p {
        PathExpr::Scalar(e) => Ok(PathExpr::Scalar(expand_scalar(s, e, stack, counter)?)),
        PathExpr::Cond(c) => Ok(PathExpr::Cond(expand_cond(s, c, stack, counter)?)),
        PathExpr::Where { branches, default, form } => Ok(PathExpr::Where {
            branches: branches
                .iter()
                .map(|(q, c)| Ok((expand_in(s, q, stack, counter)?, expand_cond(s, c, stack, counter)?)))
                .collect::<Res<_>>()?,
            default: match default {
                Some(d) => Some(b(expand_in(s, d, stack, counter)?)),
                None => None,
            },
            form: *form,
        }),
        _ => p.try_map_paths(&mut |q| expand_in(s, q, stack, counter)),
    }
}

/// Scalar macros are applied like functions, so they surface as `Apply` nodes.
fn expand_scalar(s: &Schema, e: &PeScalar, stack: &mut Vec<String>, counter: &mut usize) -> Res<PeScalar> {
    match e {
        PeScalar::Apply(n, es) => {
            let es = es.iter().map(|x| expand_scalar(s, x, stack, counter)).collect::<Res<Vec<_>>>()?;
            if !s.macros.contains_key(n) {
                return Ok(PeScalar::Apply(n.clone(), es));
            }
            if stack.contains(n) {
                return Err(PathError::Macro(format!("recursive macro {n}")));
            }
            let args: Vec<PathExpr> = es.into_iter().map(PathExpr::Scalar).collect();
            let body = instantiate(s, n, &args, counter)?;
            stack.push(n.clone());
            let r = expand_in(s, &body, stack, counter);
            stack.pop();
            match r? {
                PathExpr::Scalar(x) => Ok(x),
                _ => Err(PathError::Macro(format!("macro {n} is not a scalar expression"))),
            }
        }
        PeScalar::Agg(k, p) => Ok(PeScalar::Agg(*k, b(expand_in(s, p, stack, counter)?))),
        other => Ok(other.clone()),
    }
}

fn expand_cond(s: &Schema, c: &PeCond, stack: &mut Vec<String>, counter: &mut usize) -> Res<PeCond> {
    Ok(match c {
        PeCond::Compare(x, r, y) => {
            PeCond::Compare(expand_scalar(s, x, stack, counter)?, *r, expand_scalar(s, y, stack, counter)?)
        }
        PeCond::Logic(x, l, y) => PeCond::Logic(
            Box::new(expand_cond(s, x, stack, counter)?),
            *l,
            Box::new(expand_cond(s, y, stack, counter)?),
        ),
        PeCond::Not(x) => PeCond::Not(Box::new(expand_cond(s, x, stack, counter)?)),
        other => other.try_map_paths(&mut |q| expand_in(s, q, stack, counter))?,
    })
}

fn instantiate(s: &Schema, name: &str, args: &[PathExpr], counter: &mut usize) -> Res<PathExpr> {
    let def = s.macros.get(name).ok_or_else(|| PathError::Macro(format!("unknown macro {name}")))?;
    if def.params.len() != args.len() {
        return Err(PathError::Macro(format!(
            "macro {name} expects {} arguments, got {}",
            def.params.len(),
            args.len()
        )));
    }
    let mut sub = Subst::default();
    for (i, (a, arg)) in def.params.iter().zip(args).enumerate() {
        // with repeated parameters only the first position counts
        if sub.paths.contains_key(a) {
            continue;
        }
        let (path, scalar) = if def.body.is_scalar() {
            match arg {
                PathExpr::Scalar(e) => (arg.clone(), Some(e.clone())),
                _ => return Err(PathError::Macro(format!("macro {name} expects scalar argument {}", i + 1))),
            }
        } else if def.body.is_cond() {
            match arg {
                PathExpr::Cond(_) => (arg.clone(), None),
                _ => return Err(PathError::Macro(format!("macro {name} expects condition argument {}", i + 1))),
            }
        } else {
            *counter += 1;
            let bi = AttrName::fresh(format!("b{}", *counter));
            (PathExpr::Scalar(PeScalar::Var(bi.clone())).concat(arg.clone()), Some(PeScalar::Var(bi)))
        };
        sub.paths.insert(a.clone(), path);
        sub.scalars.insert(a.clone(), scalar);
    }
    sub.path(&def.body)
}

#[derive(Default)]
struct Subst {
    paths: BTreeMap<AttrName, PathExpr>,
    scalars: BTreeMap<AttrName, Option<PeScalar>>,
}

impl Subst {
    fn attr(&self, a: &AttrName) -> AttrName {
        match self.scalars.get(a) {
            Some(Some(PeScalar::Var(b))) => b.clone(),
            _ => a.clone(),
        }
    }

    fn scalar(&self, e: &PeScalar) -> Res<PeScalar> {
        Ok(match e {
            PeScalar::Var(a) => match self.scalars.get(a) {
                Some(Some(r)) => r.clone(),
                Some(None) => return Err(PathError::Macro(format!("condition argument used as a value for {a}"))),
                None => e.clone(),
            },
            PeScalar::VarRole(a, p) => PeScalar::VarRole(self.attr(a), p.clone()),
            PeScalar::Const(_) => e.clone(),
            PeScalar::Agg(k, p) => PeScalar::Agg(*k, b(self.path(p)?)),
            PeScalar::Apply(f, es) => PeScalar::Apply(f.clone(), es.iter().map(|x| self.scalar(x)).collect::<Res<_>>()?),
        })
    }

    fn cond(&self, c: &PeCond) -> Res<PeCond> {
        Ok(match c {
            PeCond::Some(p) => PeCond::Some(b(self.path(p)?)),
            PeCond::BagCompare(p, k, q) => PeCond::BagCompare(b(self.path(p)?), *k, b(self.path(q)?)),
            PeCond::Exclusion(p, q) => PeCond::Exclusion(b(self.path(p)?), b(self.path(q)?)),
            PeCond::Logic(x, l, y) => PeCond::Logic(Box::new(self.cond(x)?), *l, Box::new(self.cond(y)?)),
            PeCond::Compare(x, r, y) => PeCond::Compare(self.scalar(x)?, *r, self.scalar(y)?),
            PeCond::Not(x) => PeCond::Not(Box::new(self.cond(x)?)),
        })
    }

    fn denotation(&self, x: &TypeId, d: &PeDenotation) -> Res<PathExpr> {
        if let PeDenotation::Abstract(a) = d {
            if let Some(r) = self.paths.get(a) {
                return Ok(PathExpr::Type(x.clone()).concat(r.clone()));
            }
        }
        Ok(PathExpr::Denote(x.clone(), self.den(d)?))
    }

    fn den(&self, d: &PeDenotation) -> Res<PeDenotation> {
        Ok(match d {
            PeDenotation::ByPath(p) => PeDenotation::ByPath(b(self.path(p)?)),
            PeDenotation::Abstract(a) => PeDenotation::Abstract(self.attr(a)),
            PeDenotation::Composite(ds) => PeDenotation::Composite(ds.iter().map(|x| self.den(x)).collect::<Res<_>>()?),
        })
    }

    fn path(&self, p: &PathExpr) -> Res<PathExpr> {
        use PathExpr::*;
        Ok(match p {
            Scalar(PeScalar::Var(a)) if self.paths.contains_key(a) => self.paths[a].clone(),
            Scalar(e) => Scalar(self.scalar(e)?),
            Cond(c) => Cond(self.cond(c)?),
            Denote(x, d) => self.denotation(x, d)?,
            Where { branches, default, form } => Where {
                branches: branches.iter().map(|(q, c)| Ok((self.path(q)?, self.cond(c)?))).collect::<Res<_>>()?,
                default: match default {
                    Some(d) => Some(b(self.path(d)?)),
                    None => None,
                },
                form: *form,
            },
            Shuffle(q, xs) => Shuffle(b(self.path(q)?), xs.iter().map(|a| self.attr(a)).collect()),
            Group { kind, body, by, target } => Group {
                kind: *kind,
                body: b(self.path(body)?),
                by: by.iter().map(|a| self.attr(a)).collect(),
                target: target.as_ref().map(|a| self.attr(a)),
            },
            Confluence(aspects, base) => Confluence(
                aspects
                    .iter()
                    .map(|a| {
                        Ok(Aspect {
                            attr: self.attr(&a.attr),
                            path: self.path(&a.path)?,
                            via: a.via.as_ref().map(|v| self.attr(v)),
                        })
                    })
                    .collect::<Res<_>>()?,
                b(self.path(base)?),
            ),
            other => other.try_map_paths(&mut |q| self.path(q))?,
        })
    }
}

/// Rewrites towards the shapes the verbaliser prefers, until nothing changes.
pub fn normalise(s: &Schema, p: &PathExpr) -> PathExpr {
    let mut cur = p.clone();
    loop {
        let next = normalise_once(s, &cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn normalise_once(s: &Schema, p: &PathExpr) -> PathExpr {
    let p = p.map_paths(&mut |c| normalise_once(s, c));
    match p {
        PathExpr::Concat(..) => {
            let ops: Vec<PathExpr> = p.concat_operands().into_iter().cloned().collect();
            let out = rewrite_sequence(s, &ops);
            if out.len() == ops.len() {
                p
            } else {
                PathExpr::chain(out)
            }
        }
        PathExpr::SetOp(k, l, r) => match (*l, *r) {
            (PathExpr::Front(a), PathExpr::Front(c)) => PathExpr::FrontOp(k, a, c),
            (l, r) => PathExpr::SetOp(k, b(l), b(r)),
        },
        other => other,
    }
}

fn rewrite_sequence(s: &Schema, ops: &[PathExpr]) -> Vec<PathExpr> {
    let same_rel = |p: &RoleId, q: &RoleId| s.rel(p).is_some() && s.rel(p) == s.rel(q);
    let mut out = Vec::new();
    let mut i = 0;
    while i < ops.len() {
        if i + 2 < ops.len() {
            if let (Some(p), PathExpr::Type(f), Some(q)) = (ops[i].as_role(), &ops[i + 1], ops[i + 2].as_exit()) {
                if same_rel(p, q) && s.rel(p) == Some(f) {
                    out.push(PathExpr::MixFix { first: p.clone(), middle: vec![], last: q.clone() });
                    i += 3;
                    continue;
                }
            }
        }
        if i + 1 < ops.len() {
            if let (Some(p), Some(q)) = (ops[i].as_role(), ops[i + 1].as_exit()) {
                if same_rel(p, q) {
                    out.push(PathExpr::MixFix { first: p.clone(), middle: vec![], last: q.clone() });
                    i += 2;
                    continue;
                }
            }
            if let (PathExpr::Type(x), PathExpr::Scalar(_)) = (&ops[i], &ops[i + 1]) {
                if s.is_value_type(x) {
                    out.push(PathExpr::Denote(x.clone(), PeDenotation::ByPath(b(ops[i + 1].clone()))));
                    i += 2;
                    continue;
                }
            }
        }
        out.push(ops[i].clone());
        i += 1;
    }
    out
}

/// Types whose population the evaluation of `p` reads.
pub fn referenced_types(s: &Schema, p: &PathExpr) -> BTreeSet<TypeId> {
    let mut out = BTreeSet::new();
    let add_role = |r: &RoleId, out: &mut BTreeSet<TypeId>| {
        out.extend(s.rel(r).cloned());
        out.extend(s.player.get(r).cloned());
    };
    p.for_each_path(&mut |q| match q {
        PathExpr::Type(x) => {
            out.insert(x.clone());
        }
        PathExpr::Role(r) => add_role(r, &mut out),
        PathExpr::MixFix { first, middle, last } => {
            add_role(first, &mut out);
            add_role(last, &mut out);
            middle.iter().for_each(|(r, _)| add_role(r, &mut out));
        }
        PathExpr::Denote(x, d) => {
            out.insert(x.clone());
            if let Ok(e) = expand_denotation(s, x, d) {
                out.extend(referenced_types(s, &e));
            }
        }
        PathExpr::HdCoerce(_) | PathExpr::TlCoerce(_) => {
            for (r, q) in s.idf.values().filter_map(|i| match i {
                crate::schema::Idf::Pairs(ps) => Some(ps.clone()),
                _ => None,
            }).flatten() {
                add_role(&r, &mut out);
                add_role(&q, &mut out);
            }
        }
        _ => {}
    });
    if let Ok(t) = collect_typing(s, p) {
        for (_, x) in t {
            out.extend(s.roots_of(&x).unwrap_or_default());
        }
    }
    out
}

fn rule_order(s: &Schema) -> Res<Vec<usize>> {
    let rules = &s.derivations;
    let targets: BTreeMap<&TypeId, usize> = rules.iter().enumerate().map(|(i, r)| (r.target(), i)).collect();
    let deps: Vec<BTreeSet<usize>> = rules
        .iter()
        .map(|r| {
            let mut ts = referenced_types(s, r.body());
            if let DerivationRule::Fact { fact, .. } = r {
                // role players are read when the derived instances are assembled
                ts.extend(s.roles(fact).iter().filter_map(|p| s.player.get(p).cloned()));
            }
            ts.iter().filter_map(|t| targets.get(t).copied()).collect()
        })
        .collect();
    let mut order = Vec::new();
    let mut state = vec![0u8; rules.len()];
    fn visit(i: usize, deps: &[BTreeSet<usize>], state: &mut [u8], order: &mut Vec<usize>, s: &Schema) -> Res<()> {
        match state[i] {
            2 => return Ok(()),
            1 => {
                return Err(PathError::Derivation(format!(
                    "cyclic derivation rules through {}",
                    s.derivations[i].target()
                )))
            }
            _ => {}
        }
        state[i] = 1;
        for &j in &deps[i] {
            visit(j, deps, state, order, s)?;
        }
        state[i] = 2;
        order.push(i);
        Ok(())
    }
    for i in 0..rules.len() {
        visit(i, &deps, &mut state, &mut order, s)?;
    }
    Ok(order)
}

/// Evaluates the derivation rules in dependency order.
pub fn apply_derivations(s: &Schema, pop: &Population) -> Res<Population> {
    let mut out = pop.clone();
    for i in rule_order(s)? {
        let rule = &s.derivations[i];
        let derived = derive_one(s, rule, &out)?;
        out.set(rule.target(), derived);
    }
    Ok(out)
}

fn derive_one(s: &Schema, rule: &DerivationRule, pop: &Population) -> Res<Vec<Value>> {
    match rule {
        DerivationRule::Fact { fact, roles, body } => {
            let mut t = collect_typing(s, body)?;
            for (p, a) in roles {
                t.insert((a.clone(), s.player_of(p)?.clone()));
            }
            check_typing(s, &t)?;
            let r = eval(&translate(s, body, &t, &BTreeSet::new())?, pop, &Tuple::new())?;
            for a in roles.values() {
                if !r.header.contains(a) {
                    return Err(PathError::Unbound(a.clone()));
                }
            }
            let _ = fact;
            let insts: BTreeSet<Value> =
                r.body.elements().map(|u| Value::Rel(roles.iter().map(|(p, a)| (p.clone(), u[a].clone())).collect())).collect();
            Ok(insts.into_iter().collect())
        }
        DerivationRule::Type { body, .. } => {
            let t = infer_typing(s, body)?;
            let r = eval(&translate(s, body, &t, &BTreeSet::new())?, pop, &Tuple::new())?;
            let heads: BTreeSet<Value> = r.body.elements().map(|u| u[&AttrName::hd()].clone()).collect();
            Ok(heads.into_iter().collect())
        }
    }
}

/// A constraint holds when its path evaluates to a non-empty result.
pub fn check_constraint(s: &Schema, p: &PathExpr, pop: &Population) -> Res<bool> {
    let t = infer_typing(s, p)?;
    let r = eval(&translate(s, p, &t, &BTreeSet::new())?, pop, &Tuple::new())?;
    Ok(!r.is_empty())
}

fn cmp_nulls_last(a: &Value, b: &Value) -> Ordering {
    match (a.is_null(), b.is_null()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ => a.cmp(b),
    }
}

/// Expands the bag and sorts it; NULLs go last ascending and first descending.
pub fn order_result(rel: &Relation, spec: &OrderSpec) -> Res<Vec<Tuple>> {
    if let Some((a, _)) = spec.iter().find(|(a, _)| !rel.header.contains(a)) {
        return Err(PathError::Unbound(a.clone()));
    }
    let mut rows = rel.body.expand();
    rows.sort_by(|x, y| {
        for (a, o) in spec {
            let c = cmp_nulls_last(&x[a], &y[a]);
            let c = if *o == Order::Desc { c.reverse() } else { c };
            if c != Ordering::Equal {
                return c;
            }
        }
        x.cmp(y)
    });
    Ok(rows)
}
