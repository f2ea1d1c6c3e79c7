//! Random verbalisable path expressions over the listing schema.
//!
//! Chains walk the three mix-fix readings (earns, of, works for); the wrappers are
//! the constructs with a ConQuer surface form. Aggregate operands carry the head
//! coercion the parser always inserts, and relational comparisons the tail/head
//! coercions.

use conquer::path::*;
use conquer::relalg::{CmpOp, Logic};
use conquer::schema::{AttrName, RoleId, TypeId};
use conquer::value::Value;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

const OPS: [CmpOp; 6] = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];
const SET_OPS: [SetOpKind; 3] = [SetOpKind::Union, SetOpKind::Intersect, SetOpKind::Diff];
const SET_CMPS: [SetCmpKind; 3] = [SetCmpKind::AllIn, SetCmpKind::IncludesAll, SetCmpKind::MatchAll];
const AGGS: [AggKind; 5] = [AggKind::Count, AggKind::Sum, AggKind::Min, AggKind::Max, AggKind::Avg];

fn mix(p: &str, q: &str) -> PathExpr {
    PathExpr::MixFix { first: RoleId::new(p), middle: vec![], last: RoleId::new(q) }
}

/// Readings leaving a type: (first role, last role, target type).
fn readings(t: &str) -> &'static [(&'static str, &'static str, &'static str)] {
    match t {
        "x" => &[("p1", "p2", "y"), ("q1", "q2", "z")],
        "y" => &[("p2", "p1", "x")],
        _ => &[],
    }
}

pub struct Gen<'a> {
    rng: &'a mut StdRng,
    vars: Vec<&'static str>,
}

/// A chain together with the variables it binds and the type each is bound to.
struct Chain {
    parts: Vec<PathExpr>,
    bound: Vec<(&'static str, &'static str)>,
    start: &'static str,
    end: &'static str,
}

impl Chain {
    fn path(&self) -> PathExpr {
        PathExpr::chain(self.parts.clone())
    }
    fn var_of(&self, t: &str) -> Option<&'static str> {
        self.bound.iter().find(|(_, ty)| *ty == t).map(|(v, _)| *v)
    }
}

impl<'a> Gen<'a> {
    pub fn new(rng: &'a mut StdRng) -> Self {
        Gen { rng, vars: vec!["m", "n", "k"] }
    }

    fn constant(&mut self) -> Value {
        if self.rng.gen_bool(0.3) {
            Value::ratio(self.rng.gen_range(1..40) * 2 + 1, 2)
        } else {
            Value::int(self.rng.gen_range(0..500))
        }
    }

    /// Starts at `start` and walks up to `steps` readings; `var_at` forces a
    /// variable onto the first occurrence of that type.
    fn chain(&mut self, start: &'static str, steps: usize, var_at: Option<&'static str>) -> Chain {
        let mut c = Chain { parts: vec![PathExpr::ty(start)], bound: vec![], start, end: start };
        let mut cur = start;
        for i in 0..=steps {
            let forced = var_at == Some(cur) && c.var_of(cur).is_none();
            if forced || (self.rng.gen_bool(0.25) && !self.vars.is_empty()) {
                if let Some(v) = self.vars.pop() {
                    c.parts.push(PathExpr::var(v));
                    c.bound.push((v, cur));
                }
            }
            let next = readings(cur);
            if i == steps || next.is_empty() {
                break;
            }
            let (p, q, t) = *next.choose(self.rng).unwrap();
            c.parts.push(mix(p, q));
            cur = t;
            c.end = t;
            if cur == "y" && i + 1 == steps && self.rng.gen_bool(0.2) {
                let v = self.constant();
                c.parts.push(PathExpr::Denote(TypeId::new("y"), PeDenotation::ByPath(b(PathExpr::constant(v)))));
                break;
            }
            c.parts.push(PathExpr::ty(t));
        }
        c
    }

    fn any_chain(&mut self) -> Chain {
        let start = *["x", "x", "y", "z"].choose(self.rng).unwrap();
        let steps = self.rng.gen_range(0..=2);
        self.chain(start, steps, None)
    }

    /// A chain from `start` ending in `end`, when a few tries find one.
    fn chain_between(&mut self, start: &'static str, end: &'static str) -> Option<Chain> {
        (0..20).find_map(|_| {
            let steps = self.rng.gen_range(0..=2);
            Some(self.chain(start, steps, None)).filter(|c| c.end == end)
        })
    }

    fn aggregate(&mut self, outer: &Chain) -> PeScalar {
        let k = *AGGS.choose(self.rng).unwrap();
        let steps = self.rng.gen_range(0..=2);
        let mut body = self.chain("y", steps, None);
        // correlate with the outer person when the inner chain reaches one
        if let (Some(n), true) = (outer.var_of("x"), body.parts.len() >= 3 && body.parts.len() <= 5) {
            if body.parts.iter().all(|p| !p.is_scalar()) && body.parts.last() == Some(&PathExpr::ty("x")) {
                body.parts.push(PathExpr::var(n));
            }
        }
        PeScalar::Agg(k, b(PathExpr::HdCoerce(b(body.path()))))
    }

    fn cond(&mut self, m: &'static str, outer: &Chain, depth: u32) -> PeCond {
        let var = PeScalar::Var(AttrName::named(m));
        match if depth == 0 { 0 } else { self.rng.gen_range(0..5) } {
            0 | 1 => PeCond::Compare(var, *OPS.choose(self.rng).unwrap(), PeScalar::Const(self.constant())),
            2 => PeCond::Compare(var, *OPS.choose(self.rng).unwrap(), self.aggregate(outer)),
            3 => {
                let l = *[Logic::And, Logic::Or].choose(self.rng).unwrap();
                PeCond::Logic(Box::new(self.cond(m, outer, 0)), l, Box::new(self.cond(m, outer, 0)))
            }
            _ => PeCond::Not(Box::new(self.cond(m, outer, 0))),
        }
    }

    pub fn path(&mut self) -> PathExpr {
        self.vars = vec!["m", "n", "k"];
        match self.rng.gen_range(0..13) {
            0 | 1 => self.any_chain().path(),
            2 => self.any_chain().path().distinct(),
            3 => self.any_chain().path().front(),
            4 => self.any_chain().path().rev(),
            5 => {
                let k = *SET_OPS.choose(self.rng).unwrap();
                let l = self.any_chain();
                let r = self.chain_between(l.start, l.end);
                let r = r.map_or_else(|| l.path(), |r| r.path());
                PathExpr::SetOp(k, b(l.path()), b(r))
            }
            6 => {
                // a person chain conjoined with a bare reading of the same person
                let k = *SET_OPS.choose(self.rng).unwrap();
                let steps = self.rng.gen_range(0..=2);
                let l = self.chain("x", steps, None);
                let (p, q, t) = *readings("x").choose(self.rng).unwrap();
                let r = PathExpr::chain(vec![mix(p, q), PathExpr::ty(t)]);
                PathExpr::FrontOp(k, b(l.path()), b(r))
            }
            7 | 8 => {
                let steps = self.rng.gen_range(1..=2);
                let mut c = self.chain("x", steps, Some("y"));
                if c.var_of("y").is_none() {
                    c = Chain { parts: vec![PathExpr::ty("x"), mix("p1", "p2"), PathExpr::ty("y"), PathExpr::var("m")], bound: vec![("m", "y")], start: "x", end: "y" };
                }
                let m = c.var_of("y").unwrap();
                let cond = self.cond(m, &c, 1);
                PathExpr::Where { branches: vec![(c.path(), cond)], default: None, form: WhereForm::Where }
            }
            9 => {
                let k = *SET_CMPS.choose(self.rng).unwrap();
                let l = self.any_chain();
                let steps = self.rng.gen_range(0..=2);
                let r = self.chain(l.end, steps, None);
                PathExpr::SetCompare(b(l.path()), k, b(r.path()))
            }
            10 => PathExpr::Cond(PeCond::Some(b(self.any_chain().path()))),
            11 => {
                let empty = Chain { parts: vec![], bound: vec![], start: "y", end: "y" };
                PathExpr::Scalar(self.aggregate(&empty))
            }
            _ => {
                let l = self.chain("x", 1, None).path();
                match self.rng.gen_range(0..2) {
                    0 => PathExpr::Product(b(l), b(self.any_chain().path())),
                    _ => PathExpr::RelCompare(
                        b(PathExpr::TlCoerce(b(l))),
                        *OPS.choose(self.rng).unwrap(),
                        b(PathExpr::HdCoerce(b(self.chain("y", 1, None).path()))),
                    ),
                }
            }
        }
    }
}
