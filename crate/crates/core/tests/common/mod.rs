#![allow(dead_code)]

pub mod oracle;
pub mod roundtrip;

use conquer::path::*;
use conquer::relalg::eval;
use conquer::schema::{AttrName, Det, MixFix, RoleId, Schema, TypeId, TypeKind};
use conquer::value::{Population, Relation, Tuple, Value};

/// A schema and population in which literal tables can be reproduced as paths.
///
/// Each table becomes a fact type whose roles carry the columns; an extra role holds a
/// row number so duplicate rows survive.
pub struct Tables {
    pub schema: Schema,
    pub pop: Population,
}

pub const V: &str = "V";

impl Default for Tables {
    fn default() -> Self {
        Self::new()
    }
}

impl Tables {
    pub fn new() -> Self {
        let mut schema = Schema::new();
        schema.add_type(V, TypeKind::VALUE);
        schema.derive_hierarchy(&[]);
        Tables { schema, pop: Population::new() }
    }

    /// `cols` starts with hd, ends with tl; anything between is a named column.
    pub fn table(&mut self, name: &str, cols: &[&str], rows: Vec<Vec<Value>>) -> PathExpr {
        let fact = self.schema.add_type(name, TypeKind::FACT);
        let role = |c: &str| format!("{name}.{c}");
        let id = role("#");
        self.schema.add_role(&id, name, V);
        for c in cols {
            self.schema.add_role(&role(c), name, V);
        }
        self.schema.derive_hierarchy(&[]);
        let v = TypeId::new(V);
        for (n, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), cols.len());
            let key = Value::int(n as i64 + 1);
            self.pop.add(&v, key.clone());
            let mut roles = vec![(RoleId::new(id.clone()), key)];
            for (c, x) in cols.iter().zip(row) {
                self.pop.add(&v, x.clone());
                roles.push((RoleId::new(role(c)), x));
            }
            self.pop.add(&fact, Value::rel(roles));
        }
        for x in self.pop.pops.values_mut() {
            *x = x.to_set();
        }
        let mut parts = vec![PathExpr::role(&role(cols[0]))];
        for c in &cols[1..cols.len() - 1] {
            parts.push(PathExpr::role(&role(c)).rev().concat(PathExpr::var(c)).front());
        }
        parts.push(PathExpr::role(&role(cols[cols.len() - 1])).rev());
        PathExpr::chain(parts)
    }
}

pub fn attr(c: &str) -> AttrName {
    match c {
        "hd" => AttrName::hd(),
        "tl" => AttrName::tl(),
        _ => AttrName::named(c),
    }
}

pub fn rel(cols: &[&str], rows: Vec<Vec<Value>>) -> Relation {
    Relation::from_rows(&cols.iter().map(|c| attr(c)).collect::<Vec<_>>(), rows)
}

/// Infers the typing, translates with nothing bound, evaluates.
pub fn run(s: &Schema, pop: &Population, p: &PathExpr) -> Relation {
    try_run(s, pop, p).unwrap_or_else(|e| panic!("{p}: {e}"))
}

pub fn try_run(s: &Schema, pop: &Population, p: &PathExpr) -> Result<Relation, String> {
    let t = infer_typing(s, p).map_err(|e| e.to_string())?;
    let e = translate(s, p, &t, &Default::default()).map_err(|e| e.to_string())?;
    eval(&e, pop, &Tuple::new()).map_err(|e| e.to_string())
}

pub fn i(n: i64) -> Value {
    Value::int(n)
}

pub fn s(x: &str) -> Value {
    Value::str(x)
}

fn name_type(s: &mut Schema, t: &str, name: &str) {
    s.naming.tnm.insert(TypeId::new(t), name.into());
}

fn prefixes(s: &mut Schema, t: &str, undetermined: &str, determined: &str) {
    s.naming.pre.insert((TypeId::new(t), Det::Undetermined), undetermined.into());
    s.naming.pre.insert((TypeId::new(t), Det::Determined), determined.into());
}

fn mfix(s: &mut Schema, fact: &str, parts: &[&str], roles: &[&str]) {
    s.naming.mfix.push(MixFix {
        fact: TypeId::new(fact),
        parts: parts.iter().map(|p| p.to_string()).collect(),
        roles: roles.iter().map(|r| RoleId::new(*r)).collect(),
    });
}

/// People earning salaries and working for companies, with readings for both
/// directions of the earning fact.
pub fn listing_schema() -> Schema {
    let mut s = Schema::new();
    s.add_type("x", TypeKind::ENTITY);
    s.add_type("y", TypeKind::VALUE);
    s.add_type("z", TypeKind::ENTITY);
    s.add_type("F", TypeKind::FACT);
    s.add_type("G", TypeKind::FACT);
    s.add_role("p1", "F", "x");
    s.add_role("p2", "F", "y");
    s.add_role("q1", "G", "x");
    s.add_role("q2", "G", "z");
    s.derive_hierarchy(&[]);
    name_type(&mut s, "x", "Person");
    name_type(&mut s, "y", "Salary");
    name_type(&mut s, "z", "Company");
    name_type(&mut s, "F", "Earning");
    name_type(&mut s, "G", "Employment");
    for t in ["x", "y", "z"] {
        prefixes(&mut s, t, "a", "the");
    }
    s.naming.post.insert(TypeId::new("x"), "who".into());
    mfix(&mut s, "F", &["earns"], &["p1", "p2"]);
    mfix(&mut s, "F", &["of"], &["p2", "p1"]);
    mfix(&mut s, "G", &["works for"], &["q1", "q2"]);
    s
}

pub const LISTING_QUERY: &str =
    "Person who earns Salary x AND ALSO works for a Company c WHERE x > THE AVERAGE Salary of a Person who works for c";

/// Presidents, election results and elections; `stage` 0 has bare names only, 1 adds
/// prefixes and postfixes, 2 adds the mix-fix readings as well.
pub fn election_schema(stage: u8) -> Schema {
    let mut s = Schema::new();
    s.add_type("A", TypeKind::ENTITY);
    s.add_type("B", TypeKind::ENTITY);
    s.add_type("C", TypeKind::ENTITY);
    s.add_type("F", TypeKind::NESTED);
    s.add_role("p", "F", "A");
    s.add_role("q", "F", "B");
    s.add_role("r", "F", "C");
    s.derive_hierarchy(&[]);
    name_type(&mut s, "A", "President");
    name_type(&mut s, "B", "Result");
    name_type(&mut s, "C", "Election");
    name_type(&mut s, "F", "Election-result");
    let n = &mut s.naming;
    for (r, entry, exit) in [("p", "has", "are of"), ("q", "are in", "has as"), ("r", "has", "is for")] {
        n.pnm.insert(RoleId::new(r), entry.into());
        n.rnm.insert(RoleId::new(r), exit.into());
    }
    if stage >= 1 {
        for t in ["A", "B", "C", "F"] {
            prefixes(&mut s, t, "some", "the");
        }
        for (t, post) in [("A", "who"), ("B", "which"), ("C", "that"), ("F", "that")] {
            s.naming.post.insert(TypeId::new(t), post.into());
        }
    }
    if stage >= 2 {
        let readings: &[(&[&str], &[&str])] = &[
            (&["has participated in", "leading to"], &["p", "q", "r"]),
            (&["has received a", "from the participation in"], &["p", "r", "q"]),
            (&["of the participation by", "in"], &["q", "p", "r"]),
            (&["of the participation in", "by"], &["q", "r", "p"]),
            (&["has participation of", "leading to"], &["r", "p", "q"]),
            (&["has lead to", "for the participation of"], &["r", "q", "p"]),
            (&["has participated in an election leading in"], &["p", "q"]),
            (&["has participated in"], &["p", "r"]),
            (&["of the participation in an election by"], &["q", "p"]),
            (&["of the participation in"], &["q", "r"]),
            (&["has participation of"], &["r", "p"]),
            (&["has lead to"], &["r", "p"]),
        ];
        for (parts, roles) in readings {
            mfix(&mut s, "F", parts, roles);
        }
    }
    s
}
