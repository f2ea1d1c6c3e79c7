//! Schema and population files, and the query pipeline behind the command line.
//!
//! A schema file is a JSON object:
//!
//! ```json
//! {
//!   "types": { "Person": { "kind": "entity" }, "Employee": { "kind": "entity", "supertypes": ["Person"] },
//!              "Name": { "kind": "value" }, "Naming": { "kind": "fact" } },
//!   "roles": [ { "id": "n1", "fact": "Naming", "player": "Person" },
//!              { "id": "n2", "fact": "Naming", "player": "Name" } ],
//!   "related": { "exclude": [["Man", "Woman"]], "add": [] },
//!   "idf": { "Person": { "pairs": [["n1", "n2"]] }, "Naming": { "roles": ["n1"] } },
//!   "naming": {
//!     "tnm": { "Person": "Person" },
//!     "pnm": { "n1": "has" }, "rnm": { "n1": "of" },
//!     "pre": { "Person": { "undetermined": "a", "determined": "the" } },
//!     "post": { "Person": "who" },
//!     "mfix": [ { "fact": "Naming", "parts": ["is called"], "roles": ["n1", "n2"] } ]
//!   },
//!   "macros": [ "Named(p) ::= Person p has a Name" ],
//!   "derivations": [ { "fact": "F", "roles": { "f1": "p", "f2": "a" }, "body": "..." },
//!                    { "type": "T", "body": "..." } ],
//!   "constraints": [ "SOME Person" ]
//! }
//! ```
//!
//! Kinds are `entity`, `value`, `fact` and `nested`. Types without a `tnm` entry are
//! named by their id. Macro, derivation and constraint bodies are ConQuer text and are
//! read in file order, so later ones may use earlier macros.
//!
//! A population file maps type names (or ids) to instance lists. Value instances are
//! JSON scalars; entity instances are their key, a scalar or an array of scalars;
//! relationship instances are objects from role id to the player's instance. Instances
//! are also added to every supertype, and role players are added to their type.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Deserialize;

use crate::front::{self, parse, parse_list, tokenize, FrontError, Interpretation, ListOrder, Tok};
use crate::path::{
    apply_derivations, check_constraint, infer_typing, normalise, order_result, referenced_types, translate,
    translate_scalar, MacroDef, Order, PathError, PathExpr, PeScalar,
};
use crate::relalg::{eval, eval_scalar};
use crate::schema::{AttrName, Constraint, Det, DerivationRule, Idf, MixFix, RoleId, Schema, TypeId, TypeKind};
use crate::value::{format_rational, Population, Tuple, Value};
use crate::verbal::{attr_name, verbalise, verbalise_scalar, VerbalisationContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Lex,
    Parse,
    Ambiguity,
    Type,
    Translate,
    Derive,
    Eval,
}

impl Stage {
    fn tag(self) -> &'static str {
        match self {
            Stage::Load => "load",
            Stage::Lex => "lex",
            Stage::Parse => "parse",
            Stage::Ambiguity => "ambiguity",
            Stage::Type => "type",
            Stage::Translate => "translate",
            Stage::Derive => "derive",
            Stage::Eval => "eval",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{} error: {message}", stage.tag())]
pub struct SessionError {
    pub stage: Stage,
    pub message: String,
}

fn fail<T>(stage: Stage, message: impl Into<String>) -> Result<T, SessionError> {
    Err(SessionError { stage, message: message.into() })
}

impl From<FrontError> for SessionError {
    fn from(e: FrontError) -> Self {
        let stage = if matches!(e, FrontError::Lex(_)) { Stage::Lex } else { Stage::Parse };
        SessionError { stage, message: e.to_string() }
    }
}

fn at(stage: Stage) -> impl Fn(PathError) -> SessionError {
    move |e| SessionError { stage, message: e.to_string() }
}

// ---- schema files ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    types: BTreeMap<String, TypeSpec>,
    #[serde(default)]
    roles: Vec<RoleSpec>,
    #[serde(default)]
    related: RelatedSpec,
    #[serde(default)]
    idf: BTreeMap<String, IdfSpec>,
    #[serde(default)]
    naming: NamingSpec,
    #[serde(default)]
    macros: Vec<String>,
    #[serde(default)]
    derivations: Vec<DerivationSpec>,
    #[serde(default)]
    constraints: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeSpec {
    kind: String,
    #[serde(default)]
    supertypes: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RoleSpec {
    id: String,
    fact: String,
    player: String,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RelatedSpec {
    #[serde(default)]
    exclude: Vec<(String, String)>,
    #[serde(default)]
    add: Vec<(String, String)>,
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum IdfSpec {
    Pairs(Vec<(String, String)>),
    Roles(Vec<String>),
    Disjunctive(Vec<IdfSpec>),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct NamingSpec {
    #[serde(default)]
    tnm: BTreeMap<String, String>,
    #[serde(default)]
    pnm: BTreeMap<String, String>,
    #[serde(default)]
    rnm: BTreeMap<String, String>,
    #[serde(default)]
    pre: BTreeMap<String, PreSpec>,
    #[serde(default)]
    post: BTreeMap<String, String>,
    #[serde(default)]
    mfix: Vec<MixFixSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PreSpec {
    undetermined: Option<String>,
    determined: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixFixSpec {
    fact: String,
    parts: Vec<String>,
    roles: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DerivationSpec {
    Fact { fact: String, roles: BTreeMap<String, String>, body: String },
    Type {
        #[serde(rename = "type")]
        ty: String,
        body: String,
    },
}

fn idf(spec: IdfSpec) -> Idf {
    match spec {
        IdfSpec::Pairs(ps) => Idf::Pairs(ps.into_iter().map(|(r, s)| (RoleId::new(r), RoleId::new(s))).collect()),
        IdfSpec::Roles(rs) => Idf::Roles(rs.into_iter().map(RoleId::new).collect()),
        IdfSpec::Disjunctive(xs) => Idf::Disjunctive(xs.into_iter().map(idf).collect()),
    }
}

fn kind(k: &str) -> Result<TypeKind, SessionError> {
    Ok(match k {
        "entity" => TypeKind::ENTITY,
        "value" => TypeKind::VALUE,
        "fact" => TypeKind::FACT,
        "nested" => TypeKind::NESTED,
        other => return fail(Stage::Load, format!("unknown type kind '{other}'")),
    })
}

/// Reads a schema file; the result has passed validation.
pub fn load_schema(text: &str) -> Result<Schema, SessionError> {
    let file: SchemaFile = serde_json::from_str(text).map_err(|e| SessionError { stage: Stage::Load, message: e.to_string() })?;
    let mut s = Schema::new();
    for (id, t) in &file.types {
        s.add_type(id, kind(&t.kind)?);
        s.naming.tnm.insert(TypeId::new(id), id.clone());
    }
    for (id, t) in &file.types {
        for sup in &t.supertypes {
            s.add_subtype(id, sup);
        }
    }
    for r in &file.roles {
        s.add_role(&r.id, &r.fact, &r.player);
    }
    let exclude: Vec<(TypeId, TypeId)> =
        file.related.exclude.iter().map(|(a, b)| (TypeId::new(a), TypeId::new(b))).collect();
    s.derive_hierarchy(&exclude);
    for (a, b) in &file.related.add {
        s.related.insert((TypeId::new(a), TypeId::new(b)));
        s.related.insert((TypeId::new(b), TypeId::new(a)));
    }
    for (t, i) in file.idf {
        s.idf.insert(TypeId::new(t), idf(i));
    }
    let n = file.naming;
    s.naming.tnm.extend(n.tnm.into_iter().map(|(k, v)| (TypeId::new(k), v)));
    s.naming.pnm.extend(n.pnm.into_iter().map(|(k, v)| (RoleId::new(k), v)));
    s.naming.rnm.extend(n.rnm.into_iter().map(|(k, v)| (RoleId::new(k), v)));
    for (t, p) in n.pre {
        if let Some(w) = p.undetermined {
            s.naming.pre.insert((TypeId::new(&t), Det::Undetermined), w);
        }
        if let Some(w) = p.determined {
            s.naming.pre.insert((TypeId::new(&t), Det::Determined), w);
        }
    }
    s.naming.post.extend(n.post.into_iter().map(|(k, v)| (TypeId::new(k), v)));
    s.naming.mfix.extend(n.mfix.into_iter().map(|m| MixFix {
        fact: TypeId::new(m.fact),
        parts: m.parts,
        roles: m.roles.into_iter().map(RoleId::new).collect(),
    }));
    let diags = s.validate();
    if !diags.is_empty() {
        return fail(Stage::Load, diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "));
    }
    for m in &file.macros {
        define_macro(&mut s, m)?;
    }
    for d in file.derivations {
        let rule = match d {
            DerivationSpec::Fact { fact, roles, body } => DerivationRule::Fact {
                fact: TypeId::new(fact),
                roles: roles.into_iter().map(|(r, a)| (RoleId::new(r), AttrName::named(a))).collect(),
                body: single(&s, &body)?,
            },
            DerivationSpec::Type { ty, body } => DerivationRule::Type { ty: TypeId::new(ty), body: single(&s, &body)? },
        };
        s.derivations.push(rule);
    }
    for c in file.constraints {
        let body = single(&s, &c)?;
        s.constraints.push(Constraint { text: c, body });
    }
    Ok(s)
}

/// The one interpretation of a definition body; definitions may not be ambiguous.
fn single(s: &Schema, text: &str) -> Result<PathExpr, SessionError> {
    let r = parse(text, s)?;
    match r.interpretations.as_slice() {
        [i] => Ok(i.path.clone()),
        is => fail(
            Stage::Ambiguity,
            format!(
                "'{text}' has {} readings: {}",
                is.len(),
                is.iter().filter_map(|i| i.verbalisation.clone()).collect::<Vec<_>>().join(" | ")
            ),
        ),
    }
}

/// Adds a definition written `Name(a, b) ::= body`.
pub fn define_macro(s: &mut Schema, text: &str) -> Result<String, SessionError> {
    let Some((head, body)) = text.split_once("::=") else {
        return fail(Stage::Parse, "a macro definition reads Name(a, ...) ::= body");
    };
    let head = head.trim();
    let (name, params) = match head.split_once('(') {
        Some((n, rest)) => {
            let Some(ps) = rest.trim_end().strip_suffix(')') else {
                return fail(Stage::Parse, format!("unclosed parameter list in '{head}'"));
            };
            (n.trim(), ps.split(',').map(str::trim).filter(|p| !p.is_empty()).collect::<Vec<_>>())
        }
        None => (head, vec![]),
    };
    if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
        return fail(Stage::Parse, format!("bad macro name '{name}'"));
    }
    let body = single(s, body.trim())?;
    s.macros.insert(
        name.to_string(),
        MacroDef { name: name.to_string(), params: params.into_iter().map(front::lower::attr).collect(), body },
    );
    Ok(name.to_string())
}

// ---- population files ----

fn scalar(j: &serde_json::Value) -> Result<Value, SessionError> {
    use serde_json::Value as J;
    Ok(match j {
        J::Null => Value::Null,
        J::Bool(b) => Value::Bool(*b),
        J::Number(n) => match Value::parse_decimal(&n.to_string()) {
            Some(v) => v,
            None => return fail(Stage::Load, format!("bad number {n}")),
        },
        J::String(s) => Value::Str(s.clone()),
        other => return fail(Stage::Load, format!("expected a scalar, found {other}")),
    })
}

fn root(s: &Schema, t: &TypeId) -> Result<TypeId, SessionError> {
    let roots = s.roots_of(t).map_err(|e| SessionError { stage: Stage::Load, message: e.to_string() })?;
    match roots.into_iter().collect::<Vec<_>>().as_slice() {
        [r] => Ok(r.clone()),
        _ => fail(Stage::Load, format!("{t} has no single root type")),
    }
}

struct PopBuilder<'s> {
    schema: &'s Schema,
    pop: Population,
}

impl PopBuilder<'_> {
    fn put(&mut self, t: &TypeId, v: &Value) {
        let mut todo = vec![t.clone()];
        let mut seen = BTreeSet::new();
        while let Some(x) = todo.pop() {
            if seen.insert(x.clone()) {
                self.pop.add(&x, v.clone());
                todo.extend(self.schema.supertypes.get(&x).cloned().unwrap_or_default());
            }
        }
    }

    fn instance(&mut self, t: &TypeId, j: &serde_json::Value) -> Result<Value, SessionError> {
        let s = self.schema;
        let kind = s.kind(t);
        let v = if kind.is_relationship {
            let Some(obj) = j.as_object() else {
                return fail(Stage::Load, format!("an instance of {t} is an object from role to player"));
            };
            let mut m = BTreeMap::new();
            for (r, x) in obj {
                let r = RoleId::new(r);
                if s.rel(&r) != Some(t) {
                    return fail(Stage::Load, format!("{r} is not a role of {t}"));
                }
                let player = s.player_of(&r).map_err(|e| SessionError { stage: Stage::Load, message: e.to_string() })?.clone();
                m.insert(r, self.instance(&player, x)?);
            }
            if let Some(r) = s.roles(t).iter().find(|r| !m.contains_key(*r)) {
                return fail(Stage::Load, format!("instance of {t} lacks role {r}"));
            }
            Value::Rel(m)
        } else if kind.is_value_type {
            scalar(j)?
        } else {
            let key = match j {
                serde_json::Value::Array(xs) => xs.iter().map(scalar).collect::<Result<Vec<_>, _>>()?,
                x => vec![scalar(x)?],
            };
            Value::Abstract { root: root(s, t)?, key }
        };
        self.put(t, &v);
        Ok(v)
    }
}

pub fn load_population(text: &str, s: &Schema) -> Result<Population, SessionError> {
    let file: BTreeMap<String, Vec<serde_json::Value>> =
        serde_json::from_str(text).map_err(|e| SessionError { stage: Stage::Load, message: e.to_string() })?;
    let mut b = PopBuilder { schema: s, pop: Population::new() };
    for (name, insts) in &file {
        let t = TypeId::new(name);
        let t = if s.has_type(&t) {
            t
        } else {
            match s.lookup_type(name) {
                Some(t) => t,
                None => return fail(Stage::Load, format!("unknown type '{name}'")),
            }
        };
        for j in insts {
            b.instance(&t, j)?;
        }
    }
    Ok(b.pop)
}

// ---- sessions ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambiguity {
    Fail,
    List,
    PickFirst,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub format: Format,
    pub null: String,
    pub ambiguity: Ambiguity,
}

impl Default for Options {
    fn default() -> Self {
        Options { format: Format::Table, null: "NULL".into(), ambiguity: Ambiguity::Fail }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn render(&self, f: Format) -> String {
        match f {
            Format::Table => self.render_table(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_table(&self) -> String {
        let mut w: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for r in &self.rows {
            for (i, c) in r.iter().enumerate() {
                w[i] = w[i].max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&w).map(|(c, n)| format!("{c:<n$}")).collect();
            padded.join(" | ").trim_end().to_string()
        };
        let mut out = line(&self.columns);
        out.push('\n');
        out.push_str(&w.iter().map(|n| "-".repeat(*n)).collect::<Vec<_>>().join("-+-"));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        let _ = writeln!(out, "({} row{})", self.rows.len(), if self.rows.len() == 1 { "" } else { "s" });
        out
    }

    fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        // writing to memory cannot fail
        w.write_record(&self.columns).unwrap();
        for r in &self.rows {
            w.write_record(r).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// The result of one query: a table per evaluated interpretation, with the
/// verbalisation of each when there were several.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutput {
    pub results: Vec<(Option<String>, Table)>,
    pub notes: Vec<String>,
}

impl QueryOutput {
    pub fn render(&self, f: Format) -> String {
        let mut out = String::new();
        for (i, (v, t)) in self.results.iter().enumerate() {
            if let Some(v) = v {
                let _ = writeln!(out, "-- reading {}: {v}", i + 1);
            }
            out.push_str(&t.render(f));
        }
        out
    }
}

pub struct Session {
    pub schema: Schema,
    population: Population,
    derived: Option<Population>,
    pub options: Options,
}

struct Plan<'a> {
    path: &'a PathExpr,
    projection: Option<&'a [PeScalar]>,
    order: &'a ListOrder,
}

impl Session {
    pub fn new(schema: Schema, population: Population) -> Self {
        Session { schema, population, derived: None, options: Options::default() }
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn set_population(&mut self, p: Population) {
        self.population = p;
        self.derived = None;
    }

    pub fn set_schema(&mut self, s: Schema) {
        self.schema = s;
        self.derived = None;
    }

    pub fn define_macro(&mut self, text: &str) -> Result<String, SessionError> {
        let name = define_macro(&mut self.schema, text)?;
        self.derived = None;
        Ok(name)
    }

    /// The population with every derivation rule applied; cached until the population changes.
    pub fn derived(&mut self) -> Result<&Population, SessionError> {
        if self.derived.is_none() {
            self.derived = Some(apply_derivations(&self.schema, &self.population).map_err(at(Stage::Derive))?);
        }
        Ok(self.derived.as_ref().unwrap())
    }

    fn population_for(&mut self, p: &PathExpr) -> Result<Population, SessionError> {
        let targets: BTreeSet<TypeId> = self.schema.derivations.iter().map(|d| d.target().clone()).collect();
        if referenced_types(&self.schema, p).is_disjoint(&targets) {
            Ok(self.population.clone())
        } else {
            Ok(self.derived()?.clone())
        }
    }

    /// Pass/fail per stored constraint, in definition order.
    pub fn check_constraints(&mut self) -> Result<Vec<(String, bool)>, SessionError> {
        let cs = self.schema.constraints.clone();
        let mut out = Vec::new();
        for c in cs {
            let pop = self.population_for(&c.body)?;
            out.push((c.text.clone(), check_constraint(&self.schema, &c.body, &pop).map_err(at(Stage::Eval))?));
        }
        Ok(out)
    }

    /// Parses, disambiguates per the session policy, evaluates and renders.
    pub fn run_query(&mut self, text: &str) -> Result<QueryOutput, SessionError> {
        let is_list = tokenize(text).map_err(FrontError::from)?.first().is_some_and(|t| t.tok == Tok::Keyword("LIST"));
        let (interps, projection, order, diagnostics) = if is_list {
            let l = parse_list(text, &self.schema)?;
            (l.body.interpretations, l.projection, l.order, l.body.diagnostics)
        } else {
            let r = parse(text, &self.schema)?;
            (r.interpretations, None, ListOrder::None, r.diagnostics)
        };
        let chosen: Vec<&Interpretation> = match (interps.len(), self.options.ambiguity) {
            (1, _) => interps.iter().collect(),
            (_, Ambiguity::Fail) => {
                let alts: Vec<String> = interps
                    .iter()
                    .enumerate()
                    .map(|(i, x)| format!("{}. {}", i + 1, x.verbalisation.clone().unwrap_or_else(|| x.path.to_string())))
                    .collect();
                return fail(Stage::Ambiguity, format!("the query has {} readings:\n{}", interps.len(), alts.join("\n")));
            }
            (_, Ambiguity::PickFirst) => interps.iter().take(1).collect(),
            (_, Ambiguity::List) => interps.iter().collect(),
        };
        let several = chosen.len() > 1;
        let cols = first_appearance(text);
        let mut results = Vec::new();
        for i in chosen {
            let plan = Plan { path: &i.path, projection: projection.as_deref(), order: &order };
            let table = self.evaluate(&plan, &cols)?;
            results.push((if several { i.verbalisation.clone() } else { None }, table));
        }
        Ok(QueryOutput { results, notes: diagnostics })
    }

    fn evaluate(&mut self, plan: &Plan<'_>, seen_order: &[String]) -> Result<Table, SessionError> {
        let s = &self.schema;
        let p = normalise(s, plan.path);
        let t = infer_typing(s, &p).map_err(at(Stage::Type))?;
        let e = translate(s, &p, &t, &BTreeSet::new()).map_err(at(Stage::Translate))?;
        let pop = self.population_for(&p)?;
        let s = &self.schema;
        let rel = eval(&e, &pop, &Tuple::new()).map_err(|e| SessionError { stage: Stage::Eval, message: e.to_string() })?;
        let spec = match plan.order {
            ListOrder::None => vec![],
            ListOrder::WholeAsc => vec![(AttrName::hd(), Order::Asc)],
            ListOrder::WholeDesc => vec![(AttrName::hd(), Order::Desc)],
            ListOrder::PerVar(v) => v.clone(),
        };
        let rows = order_result(&rel, &spec).map_err(at(Stage::Eval))?;
        let null = self.options.null.as_str();
        match plan.projection {
            Some(xs) => {
                let ctx = VerbalisationContext::root(s, t.clone());
                let columns = xs
                    .iter()
                    .map(|x| match x {
                        PeScalar::Var(a) => attr_name(a),
                        other => verbalise_scalar(s, other, &ctx).unwrap_or_else(|_| "?".into()),
                    })
                    .collect();
                let exprs = xs
                    .iter()
                    .map(|x| translate_scalar(s, x, &t, &rel.header).map_err(at(Stage::Translate)))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut out = Vec::new();
                for row in &rows {
                    let mut cells = Vec::new();
                    for x in &exprs {
                        let v = eval_scalar(x, &pop, row).map_err(|e| SessionError { stage: Stage::Eval, message: e.to_string() })?;
                        cells.push(cell(s, &v, null));
                    }
                    out.push(cells);
                }
                Ok(Table { columns, rows: out })
            }
            None => {
                let mut named: Vec<&AttrName> = rel.header.iter().filter(|a| !a.fresh).collect();
                named.sort_by_key(|a| (seen_order.iter().position(|n| *n == a.name).unwrap_or(usize::MAX), (*a).clone()));
                let mut attrs = Vec::new();
                if rel.header.contains(&AttrName::hd()) {
                    attrs.push(AttrName::hd());
                }
                attrs.extend(named.into_iter().cloned());
                if rel.header.contains(&AttrName::tl()) {
                    attrs.push(AttrName::tl());
                }
                let columns = attrs.iter().map(attr_name).collect();
                let rows = rows.iter().map(|r| attrs.iter().map(|a| cell(s, &r[a], null)).collect()).collect();
                Ok(Table { columns, rows })
            }
        }
    }

    /// All interpretations of `text` that survive disambiguation, verbalised.
    pub fn explain(&self, text: &str) -> Result<Vec<String>, SessionError> {
        let r = parse(text, &self.schema)?;
        r.interpretations
            .iter()
            .map(|i| {
                let n = normalise(&self.schema, &i.path);
                let ctx = VerbalisationContext::root(&self.schema, i.typing.clone());
                verbalise(&self.schema, &n, &ctx).map_err(|e| SessionError { stage: Stage::Parse, message: e.to_string() })
            })
            .collect()
    }

    /// Record listings of every surviving reading.
    pub fn dump_records(&self, text: &str) -> Result<Vec<String>, SessionError> {
        let r = parse(text, &self.schema)?;
        Ok(r.interpretations.iter().map(|i| front::dump_records(&i.record)).collect())
    }

    /// The normalised path expression of every surviving reading.
    pub fn dump_paths(&self, text: &str) -> Result<Vec<String>, SessionError> {
        let r = parse(text, &self.schema)?;
        Ok(r.interpretations.iter().map(|i| normalise(&self.schema, &i.path).to_string()).collect())
    }

    /// Applies the derivation rules and reports each target's size.
    pub fn derive(&mut self) -> Result<Vec<(String, usize)>, SessionError> {
        self.derived = None;
        let targets: Vec<TypeId> = self.schema.derivations.iter().map(|d| d.target().clone()).collect();
        let pop = self.derived()?.clone();
        Ok(targets.iter().map(|t| (self.schema.type_name(t), pop.of(t).elements().count())).collect())
    }
}

/// Named variables in order of first mention.
fn first_appearance(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in tokenize(text).unwrap_or_default() {
        if let Tok::Word(w) = t.tok {
            if !out.contains(&w) {
                out.push(w);
            }
        }
    }
    out
}

/// A cell: abstract and relationship instances show their denotation.
pub fn cell(s: &Schema, v: &Value, null: &str) -> String {
    match v {
        Value::Null => null.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Num(n) => format_rational(n),
        Value::Str(x) => x.clone(),
        Value::Abstract { .. } | Value::Rel(_) => match front::denote_instance(v, s) {
            Ok(parts) => parts.iter().map(|p| cell(s, p, null)).collect::<Vec<_>>().join(","),
            Err(_) => v.to_string(),
        },
        Value::Bag(b) => format!("{{{{{}}}}}", b.expand().iter().map(|x| cell(s, x, null)).collect::<Vec<_>>().join(", ")),
    }
}

pub const HELP: &str = "\
commands:
  <query>                 evaluate a query or LIST statement
  \\schema <file>          load a schema file (clears the population)
  \\pop <file>             load a population file
  \\macro <definition>     define a macro, e.g. \\macro Rich(p) ::= Person p who earns a Salary > 200
  \\derive                 apply the derivation rules
  \\constraints            check every stored constraint
  \\dump-records <query>   print the record listing of every reading
  \\dump-path <query>      print the path expression of every reading
  \\explain <query>        verbalise every reading
  \\help                   this text
  \\quit                   leave
";

impl Session {
    /// One REPL line: a backslash command or a query. Returns the text to print.
    pub fn command(&mut self, line: &str) -> Result<String, SessionError> {
        let line = line.trim();
        let Some(cmd) = line.strip_prefix('\\') else {
            return Ok(self.run_query(line)?.render(self.options.format));
        };
        let (name, arg) = match cmd.split_once(char::is_whitespace) {
            Some((n, a)) => (n, a.trim()),
            None => (cmd, ""),
        };
        let read = |f: &str| std::fs::read_to_string(f).map_err(|e| SessionError { stage: Stage::Load, message: format!("{f}: {e}") });
        let lines = |xs: Vec<String>| xs.iter().map(|x| format!("{x}\n")).collect::<String>();
        match name {
            "schema" => {
                let s = load_schema(&read(arg)?)?;
                let n = s.types.len();
                self.set_schema(s);
                self.set_population(Population::new());
                Ok(format!("loaded schema with {n} types\n"))
            }
            "pop" => {
                let p = load_population(&read(arg)?, &self.schema)?;
                let n: usize = p.pops.values().map(|b| b.elements().count()).sum();
                self.set_population(p);
                Ok(format!("loaded {n} instances\n"))
            }
            "macro" => Ok(format!("defined {}\n", self.define_macro(arg)?)),
            "derive" => {
                let r = self.derive()?;
                if r.is_empty() {
                    return Ok("no derivation rules\n".into());
                }
                Ok(lines(r.into_iter().map(|(t, n)| format!("{t}: {n} instances")).collect()))
            }
            "constraints" => {
                let r = self.check_constraints()?;
                let mut out =
                    lines(r.iter().map(|(t, ok)| format!("{} {t}", if *ok { "PASS" } else { "FAIL" })).collect());
                let _ = writeln!(out, "{} constraint{} checked", r.len(), if r.len() == 1 { "" } else { "s" });
                Ok(out)
            }
            "dump-records" => Ok(self.dump_records(arg)?.join("\n")),
            "dump-path" => Ok(lines(self.dump_paths(arg)?)),
            "explain" => {
                let alts = self.explain(arg)?;
                Ok(lines(alts.iter().enumerate().map(|(i, a)| format!("{}. {a}", i + 1)).collect()))
            }
            "help" | "?" => Ok(HELP.into()),
            other => fail(Stage::Parse, format!("unknown command \\{other}; try \\help")),
        }
    }
}
