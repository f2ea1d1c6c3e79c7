//! A brute-force evaluator for variable-free path expressions, written directly
//! against the set-comprehension definitions, plus a random generator for them.
//!
//! Results are bags of (hd, tl) pairs. Errors carry no detail: the oracle only has
//! to agree with the compiler on whether evaluation fails at all.

use std::collections::BTreeMap;

use conquer::path::*;
use conquer::relalg::CmpOp;
use conquer::schema::{AttrName, RoleId, Schema, TypeId, TypeKind};
use conquer::value::{Population, Relation, Value};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub type Pairs = BTreeMap<(Value, Value), u64>;

/// Two value types with disjoint domains and one binary fact type between them.
pub fn schema() -> Schema {
    let mut s = Schema::new();
    s.add_type("A", TypeKind::VALUE);
    s.add_type("B", TypeKind::VALUE);
    s.add_type("F", TypeKind::FACT);
    s.add_role("f1", "F", "A");
    s.add_role("f2", "F", "B");
    s.derive_hierarchy(&[]);
    s
}

fn fact(a: &Value, b: &Value) -> Value {
    Value::rel([(RoleId::new("f1"), a.clone()), (RoleId::new("f2"), b.clone())])
}

/// At most four instances per type: A from odd numbers, B from even ones.
pub fn population(rng: &mut StdRng) -> Population {
    let mut pick = |dom: &[i64]| {
        let n = rng.gen_range(0..=4);
        let mut d = dom.to_vec();
        d.shuffle(rng);
        d.truncate(n);
        d.into_iter().map(Value::int).collect::<Vec<_>>()
    };
    let a = pick(&[1, 3, 5, 7]);
    let b = pick(&[2, 4, 6, 8]);
    let mut pairs: Vec<Value> = a.iter().flat_map(|x| b.iter().map(move |y| fact(x, y))).collect();
    pairs.shuffle(rng);
    pairs.truncate(rng.gen_range(0..=4));
    let mut pop = Population::new();
    pop.set(&TypeId::new("A"), a);
    pop.set(&TypeId::new("B"), b);
    pop.set(&TypeId::new("F"), pairs);
    pop
}

const OPS: [CmpOp; 6] = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];
const SET_OPS: [SetOpKind; 3] = [SetOpKind::Union, SetOpKind::Intersect, SetOpKind::Diff];
const SET_CMPS: [SetCmpKind; 3] = [SetCmpKind::AllIn, SetCmpKind::IncludesAll, SetCmpKind::MatchAll];

fn atom(rng: &mut StdRng) -> PathExpr {
    let mix = |p: &str, q: &str| PathExpr::MixFix { first: RoleId::new(p), middle: vec![], last: RoleId::new(q) };
    match rng.gen_range(0..9) {
        0 => PathExpr::ty("A"),
        1 => PathExpr::ty("B"),
        2 => PathExpr::ty("F"),
        3 => PathExpr::role("f1"),
        4 => PathExpr::role("f2"),
        5 => PathExpr::exit("f1"),
        6 => PathExpr::exit("f2"),
        7 => mix("f1", "f2"),
        _ => mix("f2", "f1"),
    }
}

/// A random expression of depth at most `depth`; atoms have depth zero.
pub fn expr(rng: &mut StdRng, depth: u32) -> PathExpr {
    if depth == 0 || rng.gen_bool(0.25) {
        return atom(rng);
    }
    let sub = |rng: &mut StdRng| b(expr(rng, depth - 1));
    match rng.gen_range(0..16) {
        0 | 1 | 2 => PathExpr::Concat(sub(rng), sub(rng)),
        3 => PathExpr::Reverse(sub(rng)),
        4 => PathExpr::Front(sub(rng)),
        5 => PathExpr::Distinct(sub(rng)),
        6 => PathExpr::Product(sub(rng), sub(rng)),
        7 => PathExpr::SetCompare(sub(rng), *SET_CMPS.choose(rng).unwrap(), sub(rng)),
        8 => PathExpr::Missing(sub(rng), sub(rng)),
        9 => PathExpr::SetOp(*SET_OPS.choose(rng).unwrap(), sub(rng), sub(rng)),
        10 => PathExpr::FrontOp(*SET_OPS.choose(rng).unwrap(), sub(rng), sub(rng)),
        11 => PathExpr::RelCompare(sub(rng), *OPS.choose(rng).unwrap(), sub(rng)),
        12 => {
            let c = PeCond::Compare(
                PeScalar::Var(AttrName::tl()),
                *OPS.choose(rng).unwrap(),
                PeScalar::Const(Value::int(rng.gen_range(0..10))),
            );
            PathExpr::Where { branches: vec![(*sub(rng), c)], default: None, form: WhereForm::Where }
        }
        13 => {
            let k = *[AggKind::Count, AggKind::Count, AggKind::Sum, AggKind::Max].choose(rng).unwrap();
            PathExpr::Scalar(PeScalar::Agg(k, sub(rng)))
        }
        14 => PathExpr::Cond(PeCond::Some(sub(rng))),
        // a value type in front of a scalar is what normalisation turns into a denotation
        _ => PathExpr::Concat(b(PathExpr::ty("A")), b(PathExpr::Scalar(PeScalar::Agg(AggKind::Count, sub(rng))))),
    }
}

pub struct Oracle<'a> {
    pub schema: &'a Schema,
    pub pop: &'a Population,
}

type Res = Result<Pairs, ()>;

fn add(out: &mut Pairs, k: (Value, Value), n: u64) {
    if n > 0 {
        *out.entry(k).or_default() += n;
    }
}

fn heads(p: &Pairs) -> BTreeMap<Value, u64> {
    let mut out = BTreeMap::new();
    for ((u, _), n) in p {
        *out.entry(u.clone()).or_default() += n;
    }
    out
}

fn tails(p: &Pairs) -> BTreeMap<Value, u64> {
    let mut out = BTreeMap::new();
    for ((_, v), n) in p {
        *out.entry(v.clone()).or_default() += n;
    }
    out
}

fn sub_bag(a: &BTreeMap<Value, u64>, c: &BTreeMap<Value, u64>) -> bool {
    a.iter().all(|(x, n)| c.get(x).copied().unwrap_or(0) >= *n)
}

/// Three-valued comparison, `None` for unknown; ordering across kinds fails.
fn holds(a: &Value, op: CmpOp, c: &Value) -> Result<Option<bool>, ()> {
    if a.is_null() || c.is_null() {
        return Ok(None);
    }
    let ord = match (a, c) {
        (Value::Num(x), Value::Num(y)) => Some(x.cmp(y)),
        (Value::Bool(x), Value::Bool(y)) => Some(x.cmp(y)),
        (Value::Str(x), Value::Str(y)) => Some(x.cmp(y)),
        _ => None,
    };
    use std::cmp::Ordering::*;
    Ok(Some(match (op, ord) {
        (CmpOp::Eq, _) => a == c,
        (CmpOp::Ne, _) => a != c,
        (_, None) => return Err(()),
        (CmpOp::Lt, Some(o)) => o == Less,
        (CmpOp::Le, Some(o)) => o != Greater,
        (CmpOp::Gt, Some(o)) => o == Greater,
        (CmpOp::Ge, Some(o)) => o != Less,
    }))
}

impl Oracle<'_> {
    fn facts(&self, r: &RoleId) -> Vec<(Value, Value)> {
        let f = self.schema.rel_of(r).unwrap();
        self.pop.of(f).to_set().elements().map(|x| match x {
            Value::Rel(m) => (m[r].clone(), x.clone()),
            _ => unreachable!(),
        }).collect()
    }

    pub fn eval(&self, p: &PathExpr) -> Res {
        use PathExpr::*;
        let mut out = Pairs::new();
        match p {
            Type(x) => {
                for v in self.pop.of(x).to_set().elements() {
                    add(&mut out, (v.clone(), v.clone()), 1);
                }
            }
            Role(r) => {
                for k in self.facts(r) {
                    add(&mut out, k, 1);
                }
            }
            Reverse(q) => {
                for ((u, v), n) in self.eval(q)? {
                    add(&mut out, (v, u), n);
                }
            }
            MixFix { first, middle, last } if middle.is_empty() => {
                // ⟨p, q⟩ relates the players of p and q through each fact
                let left: BTreeMap<Value, Value> = self.facts(first).into_iter().map(|(u, f)| (f, u)).collect();
                for (w, f) in self.facts(last) {
                    add(&mut out, (left[&f].clone(), w), 1);
                }
            }
            Concat(l, r) => {
                let (a, c) = (self.eval(l)?, self.eval(r)?);
                for ((u, v), n) in &a {
                    for ((v2, w), m) in &c {
                        if v == v2 {
                            add(&mut out, (u.clone(), w.clone()), n * m);
                        }
                    }
                }
            }
            Front(q) => {
                for (u, n) in heads(&self.eval(q)?) {
                    add(&mut out, (u.clone(), u), n);
                }
            }
            Distinct(q) => {
                for (k, _) in self.eval(q)? {
                    add(&mut out, k, 1);
                }
            }
            Product(l, r) => {
                let (a, c) = (self.eval(l)?, self.eval(r)?);
                for (u, n) in heads(&a) {
                    for (w, m) in heads(&c) {
                        add(&mut out, (u.clone(), w), n * m);
                    }
                }
            }
            Missing(l, r) => {
                let (a, c) = (self.eval(l)?, self.eval(r)?);
                let linked = self.eval(&Concat(l.clone(), r.clone()))?;
                for (u, n) in heads(&a) {
                    for (x, m) in tails(&c) {
                        let k = (u.clone(), x);
                        let gone = linked.get(&k).copied().unwrap_or(0);
                        add(&mut out, k, (n * m).saturating_sub(gone));
                    }
                }
            }
            SetCompare(l, k, r) => {
                let a = self.eval(l)?;
                if a.is_empty() {
                    return Ok(out);
                }
                let qh = heads(&self.eval(r)?);
                for ((u, v), n) in &a {
                    let mut ts = BTreeMap::new();
                    for ((u2, v2), m) in &a {
                        if holds(u2, CmpOp::Eq, u)? == Some(true) {
                            *ts.entry(v2.clone()).or_default() += m;
                        }
                    }
                    let keep = match k {
                        SetCmpKind::AllIn => sub_bag(&ts, &qh),
                        SetCmpKind::IncludesAll => sub_bag(&qh, &ts),
                        SetCmpKind::MatchAll => ts == qh,
                    };
                    if keep {
                        add(&mut out, (u.clone(), v.clone()), *n);
                    }
                }
            }
            SetOp(k, l, r) => {
                let (a, c) = (self.eval(l)?, self.eval(r)?);
                let keys: Vec<_> = a.keys().chain(c.keys()).cloned().collect();
                for key in keys {
                    if out.contains_key(&key) {
                        continue;
                    }
                    let (n, m) = (a.get(&key).copied().unwrap_or(0), c.get(&key).copied().unwrap_or(0));
                    let f = match k {
                        SetOpKind::Union => n + m,
                        SetOpKind::Intersect => n.min(m),
                        SetOpKind::Diff => n.saturating_sub(m),
                    };
                    add(&mut out, key, f);
                }
            }
            FrontOp(k, l, r) => return self.eval(&SetOp(*k, b((**l).clone().front()), b((**r).clone().front()))),
            RelCompare(l, op, r) => {
                let (a, c) = (self.eval(l)?, self.eval(r)?);
                for ((u, v), n) in &a {
                    for ((w, z), m) in &c {
                        if holds(v, *op, w)? == Some(true) {
                            add(&mut out, (u.clone(), z.clone()), n * m);
                        }
                    }
                }
            }
            Where { branches, default: None, .. } if branches.len() == 1 => {
                let (q, c) = &branches[0];
                let (op, k) = match c {
                    PeCond::Compare(PeScalar::Var(a), op, PeScalar::Const(k)) if *a == AttrName::tl() => (*op, k),
                    _ => panic!("oracle only knows tl comparisons"),
                };
                for ((u, v), n) in self.eval(q)? {
                    if holds(&v, op, k)? == Some(true) {
                        add(&mut out, (u, v), n);
                    }
                }
            }
            Scalar(PeScalar::Agg(k, q)) => {
                let a = self.eval(q)?;
                let v = match k {
                    AggKind::Count => Value::int(a.values().sum::<u64>() as i64),
                    AggKind::Sum => {
                        let mut acc: Option<num_rational::BigRational> = None;
                        for ((u, _), n) in &a {
                            match u {
                                Value::Null => {}
                                Value::Num(x) => {
                                    let t = x * num_rational::BigRational::from_integer((*n).into());
                                    acc = Some(acc.map_or(t.clone(), |s| s + t));
                                }
                                _ => return Err(()),
                            }
                        }
                        acc.map_or(Value::Null, Value::Num)
                    }
                    AggKind::Max => {
                        let mut best: Option<num_rational::BigRational> = None;
                        for (u, _) in a.keys() {
                            match u {
                                Value::Null => {}
                                Value::Num(x) => best = Some(best.map_or(x.clone(), |m| m.max(x.clone()))),
                                _ => return Err(()),
                            }
                        }
                        best.map_or(Value::Null, Value::Num)
                    }
                    _ => panic!("oracle aggregate {k:?}"),
                };
                add(&mut out, (v.clone(), v), 1);
            }
            Cond(PeCond::Some(q)) => {
                if !self.eval(q)?.is_empty() {
                    add(&mut out, (Value::Bool(true), Value::Bool(true)), 1);
                }
            }
            Denote(x, PeDenotation::ByPath(q)) => return self.eval(&Concat(b(Type(x.clone())), q.clone())),
            other => panic!("oracle does not cover {other}"),
        }
        Ok(out)
    }
}

pub fn to_relation(p: &Pairs) -> Relation {
    let mut rows = Vec::new();
    for ((u, v), n) in p {
        for _ in 0..*n {
            rows.push(vec![u.clone(), v.clone()]);
        }
    }
    Relation::from_rows(&[AttrName::hd(), AttrName::tl()], rows)
}
