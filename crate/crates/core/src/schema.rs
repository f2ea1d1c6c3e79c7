//! The ORM universe: types, roles, relatedness, reference schemes and name tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::path::{MacroDef, PathExpr};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoleId(pub String);

/// Attribute names. Fresh (system generated) names live in their own namespace,
/// so `AttrName::named("hd")` never equals the head column.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrName {
    pub name: String,
    pub fresh: bool,
}

impl TypeId {
    pub fn new(s: impl Into<String>) -> Self {
        TypeId(s.into())
    }
}

impl RoleId {
    pub fn new(s: impl Into<String>) -> Self {
        RoleId(s.into())
    }
}

impl AttrName {
    pub fn named(s: impl Into<String>) -> Self {
        AttrName { name: s.into(), fresh: false }
    }
    pub fn fresh(s: impl Into<String>) -> Self {
        AttrName { name: s.into(), fresh: true }
    }
    pub fn hd() -> Self {
        Self::fresh("hd")
    }
    pub fn tl() -> Self {
        Self::fresh("tl")
    }
    pub fn is_hd_or_tl(&self) -> bool {
        self.fresh && (self.name == "hd" || self.name == "tl")
    }
    /// Role names double as column names in relation headers.
    pub fn role(r: &RoleId) -> Self {
        AttrName { name: format!("@{}", r.0), fresh: true }
    }
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for RoleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for AttrName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.fresh && !self.is_hd_or_tl() && !self.name.starts_with('@') {
            write!(f, "_{}", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

pub const BOOL: &str = "Bool";
pub const ANY: &str = "Any";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TypeKind {
    pub is_relationship: bool,
    pub is_value_type: bool,
    pub is_nested: bool,
}

impl TypeKind {
    pub const ENTITY: TypeKind = TypeKind { is_relationship: false, is_value_type: false, is_nested: false };
    pub const VALUE: TypeKind = TypeKind { is_relationship: false, is_value_type: true, is_nested: false };
    pub const FACT: TypeKind = TypeKind { is_relationship: true, is_value_type: false, is_nested: false };
    pub const NESTED: TypeKind = TypeKind { is_relationship: true, is_value_type: false, is_nested: true };
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Idf {
    /// ⟨r, s⟩: r is played by the identified type, s by the identifying one.
    Pairs(Vec<(RoleId, RoleId)>),
    /// Identification of a relationship type by its own roles.
    Roles(Vec<RoleId>),
    /// Alternative schemes; accepted by the data model but rejected by validation.
    Disjunctive(Vec<Idf>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Det {
    Undetermined,
    Determined,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixFix {
    pub fact: TypeId,
    pub parts: Vec<String>,
    pub roles: Vec<RoleId>,
}

#[derive(Debug, Clone, Default)]
pub struct NamingTables {
    pub tnm: BTreeMap<TypeId, String>,
    pub pnm: BTreeMap<RoleId, String>,
    pub rnm: BTreeMap<RoleId, String>,
    pub pre: BTreeMap<(TypeId, Det), String>,
    pub post: BTreeMap<TypeId, String>,
    pub mfix: Vec<MixFix>,
}

#[derive(Debug, Clone)]
pub enum DerivationRule {
    Fact { fact: TypeId, roles: BTreeMap<RoleId, AttrName>, body: PathExpr },
    Type { ty: TypeId, body: PathExpr },
}

impl DerivationRule {
    pub fn target(&self) -> &TypeId {
        match self {
            DerivationRule::Fact { fact, .. } => fact,
            DerivationRule::Type { ty, .. } => ty,
        }
    }
    pub fn body(&self) -> &PathExpr {
        match self {
            DerivationRule::Fact { body, .. } | DerivationRule::Type { body, .. } => body,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub text: String,
    pub body: PathExpr,
}

#[derive(Debug, Clone, Default)]
pub struct Schema {
    pub types: BTreeMap<TypeId, TypeKind>,
    /// Direct specialisation edges: subtype → supertypes.
    pub supertypes: BTreeMap<TypeId, Vec<TypeId>>,
    pub roles_of: BTreeMap<TypeId, Vec<RoleId>>,
    pub player: BTreeMap<RoleId, TypeId>,
    /// Stored symmetric pairs; reflexivity is implicit.
    pub related: BTreeSet<(TypeId, TypeId)>,
    pub roots: BTreeMap<TypeId, BTreeSet<TypeId>>,
    pub idf: BTreeMap<TypeId, Idf>,
    pub naming: NamingTables,
    pub macros: BTreeMap<String, MacroDef>,
    pub derivations: Vec<DerivationRule>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("unknown type {0}")]
    UnknownType(TypeId),
    #[error("unknown role {0}")]
    UnknownRole(RoleId),
}

/// One violated well-formedness condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

pub fn normalise_name(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl Schema {
    /// A schema holding only the built-in value types.
    pub fn new() -> Self {
        let mut s = Schema::default();
        s.types.insert(TypeId::new(BOOL), TypeKind::VALUE);
        s.types.insert(TypeId::new(ANY), TypeKind::VALUE);
        s
    }

    pub fn add_type(&mut self, id: &str, kind: TypeKind) -> TypeId {
        let t = TypeId::new(id);
        self.types.insert(t.clone(), kind);
        t
    }

    pub fn add_subtype(&mut self, sub: &str, sup: &str) {
        self.supertypes.entry(TypeId::new(sub)).or_default().push(TypeId::new(sup));
    }

    pub fn add_role(&mut self, id: &str, fact: &str, player: &str) -> RoleId {
        let r = RoleId::new(id);
        self.roles_of.entry(TypeId::new(fact)).or_default().push(r.clone());
        self.player.insert(r.clone(), TypeId::new(player));
        r
    }

    pub fn is_builtin(&self, t: &TypeId) -> bool {
        t.0 == BOOL || t.0 == ANY
    }

    /// Recompute roots from specialisation edges and relatedness from shared roots,
    /// keeping explicitly declared pairs and dropping declared exclusions.
    pub fn derive_hierarchy(&mut self, exclusions: &[(TypeId, TypeId)]) {
        let ids: Vec<TypeId> = self.types.keys().cloned().collect();
        self.roots.clear();
        for t in &ids {
            let r = self.compute_roots(t);
            self.roots.insert(t.clone(), r);
        }
        let excluded: BTreeSet<(TypeId, TypeId)> = exclusions
            .iter()
            .flat_map(|(a, b)| [(a.clone(), b.clone()), (b.clone(), a.clone())])
            .collect();
        for a in &ids {
            for b in &ids {
                if a >= b || excluded.contains(&(a.clone(), b.clone())) {
                    continue;
                }
                if !self.roots[a].is_disjoint(&self.roots[b]) {
                    self.related.insert((a.clone(), b.clone()));
                    self.related.insert((b.clone(), a.clone()));
                }
            }
        }
        // value types are all comparable with the wildcard value type
        let any = TypeId::new(ANY);
        for (t, k) in &self.types {
            if k.is_value_type && *t != any {
                self.related.insert((t.clone(), any.clone()));
                self.related.insert((any.clone(), t.clone()));
            }
        }
    }

    fn compute_roots(&self, t: &TypeId) -> BTreeSet<TypeId> {
        let mut out = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![t.clone()];
        while let Some(x) = stack.pop() {
            if !seen.insert(x.clone()) {
                continue;
            }
            match self.supertypes.get(&x) {
                Some(sups) if !sups.is_empty() => stack.extend(sups.iter().cloned()),
                _ => {
                    out.insert(x);
                }
            }
        }
        out
    }

    pub fn has_type(&self, t: &TypeId) -> bool {
        self.types.contains_key(t)
    }

    pub fn kind(&self, t: &TypeId) -> TypeKind {
        self.types.get(t).copied().unwrap_or_default()
    }

    pub fn is_value_type(&self, t: &TypeId) -> bool {
        self.kind(t).is_value_type
    }

    pub fn is_relationship(&self, t: &TypeId) -> bool {
        self.kind(t).is_relationship
    }

    pub fn type_related(&self, x: &TypeId, y: &TypeId) -> Result<bool, SchemaError> {
        for t in [x, y] {
            if !self.has_type(t) {
                return Err(SchemaError::UnknownType(t.clone()));
            }
        }
        Ok(self.related_unchecked(x, y))
    }

    pub fn related_unchecked(&self, x: &TypeId, y: &TypeId) -> bool {
        x == y || self.related.contains(&(x.clone(), y.clone())) || self.related.contains(&(y.clone(), x.clone()))
    }

    /// All types related to `x`, including `x`.
    pub fn related_class(&self, x: &TypeId) -> BTreeSet<TypeId> {
        self.types.keys().filter(|y| self.related_unchecked(x, y)).cloned().collect()
    }

    pub fn roots_of(&self, x: &TypeId) -> Result<BTreeSet<TypeId>, SchemaError> {
        if !self.has_type(x) {
            return Err(SchemaError::UnknownType(x.clone()));
        }
        Ok(self
            .roots
            .get(x)
            .cloned()
            .unwrap_or_else(|| self.compute_roots(x)))
    }

    pub fn rel(&self, r: &RoleId) -> Option<&TypeId> {
        self.roles_of.iter().find(|(_, rs)| rs.contains(r)).map(|(f, _)| f)
    }

    pub fn rel_of(&self, r: &RoleId) -> Result<&TypeId, SchemaError> {
        self.rel(r).ok_or_else(|| SchemaError::UnknownRole(r.clone()))
    }

    pub fn player_of(&self, r: &RoleId) -> Result<&TypeId, SchemaError> {
        self.player.get(r).ok_or_else(|| SchemaError::UnknownRole(r.clone()))
    }

    pub fn roles(&self, f: &TypeId) -> &[RoleId] {
        self.roles_of.get(f).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn all_roles(&self) -> impl Iterator<Item = &RoleId> {
        self.player.keys()
    }

    pub fn type_name(&self, t: &TypeId) -> String {
        self.naming.tnm.get(t).cloned().unwrap_or_else(|| t.0.clone())
    }

    /// The single reference pair of a simply identified non-value type.
    pub fn single_pair(&self, t: &TypeId) -> Option<&(RoleId, RoleId)> {
        if self.is_value_type(t) {
            return None;
        }
        match self.idf.get(t) {
            Some(Idf::Pairs(ps)) if ps.len() == 1 => ps.first(),
            _ => None,
        }
    }

    pub fn lookup_type(&self, name: &str) -> Option<TypeId> {
        let n = normalise_name(name);
        self.naming.tnm.iter().find(|(_, v)| **v == n).map(|(k, _)| k.clone())
    }

    fn near_left(&self, t: &TypeId, left: Option<&BTreeSet<TypeId>>) -> bool {
        left.map_or(true, |l| l.iter().any(|x| self.related_unchecked(x, t)))
    }

    /// Roles named `name` whose player is related to some left type.
    pub fn lookup_role_entries(&self, name: &str, left: Option<&BTreeSet<TypeId>>) -> BTreeSet<RoleId> {
        let n = normalise_name(name);
        self.naming
            .pnm
            .iter()
            .filter(|(r, v)| **v == n && self.player.get(*r).map_or(false, |p| self.near_left(p, left)))
            .map(|(r, _)| r.clone())
            .collect()
    }

    /// Roles whose reverse name is `name` and whose relationship is related to some left type.
    pub fn lookup_role_exits(&self, name: &str, left: Option<&BTreeSet<TypeId>>) -> BTreeSet<RoleId> {
        let n = normalise_name(name);
        self.naming
            .rnm
            .iter()
            .filter(|(r, v)| **v == n && self.rel(r).map_or(false, |f| self.near_left(f, left)))
            .map(|(r, _)| r.clone())
            .collect()
    }

    pub fn lookup_mfix(&self, first_part: &str, left: Option<&BTreeSet<TypeId>>) -> Vec<&MixFix> {
        let n = normalise_name(first_part);
        self.naming
            .mfix
            .iter()
            .filter(|m| {
                m.parts.first().map(|p| normalise_name(p)) == Some(n.clone())
                    && m.roles.first().and_then(|r| self.player.get(r)).map_or(false, |p| self.near_left(p, left))
            })
            .collect()
    }

    /// Variable names map one-to-one onto named attributes.
    pub fn lookup_var(&self, name: &str) -> Option<AttrName> {
        let n = normalise_name(name);
        (!n.is_empty() && !n.contains(' ')).then(|| AttrName::named(n))
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        validate_schema(self)
    }
}

pub fn validate_schema(s: &Schema) -> Vec<Diagnostic> {
    let mut by_type: BTreeMap<TypeId, Vec<String>> = BTreeMap::new();
    let mut by_role: BTreeMap<RoleId, Vec<String>> = BTreeMap::new();
    let mut other: Vec<Diagnostic> = Vec::new();

    for (t, k) in &s.types {
        let mut msgs = Vec::new();
        if k.is_nested && (!k.is_relationship || k.is_value_type) {
            msgs.push("nested type must be a relationship and not a value type".to_string());
        }
        if k.is_relationship && k.is_value_type {
            msgs.push("a relationship type cannot be a value type".to_string());
        }
        if k.is_relationship && s.roles(t).is_empty() {
            msgs.push("relationship type has no roles".to_string());
        }
        if !k.is_relationship && s.roles_of.contains_key(t) && !s.roles(t).is_empty() {
            msgs.push("roles attached to a non-relationship type".to_string());
        }
        let needs_idf = !k.is_value_type && !s.is_builtin(t) && !(k.is_relationship && !k.is_nested);
        match s.idf.get(t) {
            None if needs_idf => msgs.push("non-value type without identification scheme".to_string()),
            Some(_) if k.is_value_type => msgs.push("value type with identification scheme".to_string()),
            Some(Idf::Disjunctive(_)) => msgs.push("disjunctive identification schemes are not supported".to_string()),
            Some(Idf::Pairs(ps)) => {
                for (r, q) in ps {
                    if s.player.get(r) != Some(t) {
                        msgs.push(format!("identifying role {r} is not played by {t}"));
                    }
                    if s.rel(r).is_none() || s.rel(r) != s.rel(q) {
                        msgs.push(format!("identifying roles {r} and {q} are not in one relationship"));
                    }
                }
            }
            Some(Idf::Roles(rs)) => {
                for r in rs {
                    if s.rel(r) != Some(t) {
                        msgs.push(format!("identifying role {r} does not belong to {t}"));
                    }
                }
            }
            None => {}
        }
        let roots = s.roots_of(t).unwrap_or_default();
        if roots.is_empty() {
            msgs.push("no root type".to_string());
        }
        for r in &roots {
            if s.supertypes.get(r).map_or(false, |v| !v.is_empty()) {
                msgs.push(format!("root {r} is itself a specialisation"));
            }
        }
        if !msgs.is_empty() {
            by_type.insert(t.clone(), msgs);
        }
    }
    if idf_cycle(s).is_some() {
        other.push(Diagnostic { subject: "idf".into(), message: "cyclic reference schemes".into() });
    }

    let mut owner: BTreeMap<&RoleId, Vec<&TypeId>> = BTreeMap::new();
    for (f, rs) in &s.roles_of {
        if !s.types.contains_key(f) {
            by_type.entry(f.clone()).or_default().push("roles declared on unknown type".into());
        }
        for r in rs {
            owner.entry(r).or_default().push(f);
        }
    }
    for (r, p) in &s.player {
        let mut msgs = Vec::new();
        match owner.get(r).map(|v| v.len()).unwrap_or(0) {
            0 => msgs.push("role belongs to no relationship type".to_string()),
            1 => {}
            _ => msgs.push("role belongs to more than one relationship type".to_string()),
        }
        match s.types.get(p) {
            None => msgs.push(format!("player {p} is not a type")),
            Some(k) if k.is_relationship && !k.is_nested => msgs.push(format!("player {p} is not an object type")),
            _ => {}
        }
        if !msgs.is_empty() {
            by_role.insert(r.clone(), msgs);
        }
    }
    for r in owner.keys() {
        if !s.player.contains_key(*r) {
            by_role.entry((*r).clone()).or_default().push("role has no player".into());
        }
    }

    // relatedness: symmetric by construction of the stored pairs
    for (a, b) in &s.related {
        if !s.related.contains(&(b.clone(), a.clone())) {
            other.push(Diagnostic { subject: format!("{a}~{b}"), message: "relatedness is not symmetric".into() });
        }
    }

    // naming
    let mut seen_tnm: BTreeMap<&String, &TypeId> = BTreeMap::new();
    for (t, n) in &s.naming.tnm {
        if let Some(prev) = seen_tnm.insert(n, t) {
            by_type
                .entry(t.clone())
                .or_default()
                .push(format!("type name \"{n}\" is not unique (also {prev})"));
        }
    }
    for (table, label) in [(&s.naming.pnm, "role name"), (&s.naming.rnm, "reverse role name")] {
        let mut seen: BTreeMap<(Option<&TypeId>, &String), &RoleId> = BTreeMap::new();
        for (r, n) in table {
            if let Some(prev) = seen.insert((s.rel(r), n), r) {
                by_role
                    .entry(r.clone())
                    .or_default()
                    .push(format!("{label} \"{n}\" is not unique within its relationship (also {prev})"));
            }
        }
    }
    for (i, m) in s.naming.mfix.iter().enumerate() {
        let subject = format!("mfix#{i}");
        if m.parts.len() + 1 != m.roles.len() {
            other.push(Diagnostic {
                subject: subject.clone(),
                message: format!("{} parts for {} roles", m.parts.len(), m.roles.len()),
            });
        }
        if m.roles.iter().any(|r| s.rel(r) != Some(&m.fact)) {
            other.push(Diagnostic { subject, message: format!("roles do not all belong to {}", m.fact) });
        }
    }

    let mut out = Vec::new();
    for (t, msgs) in by_type {
        out.extend(msgs.into_iter().map(|m| Diagnostic { subject: format!("type {t}"), message: m }));
    }
    for (r, msgs) in by_role {
        out.extend(msgs.into_iter().map(|m| Diagnostic { subject: format!("role {r}"), message: m }));
    }
    out.extend(other);
    out
}

/// A type reachable from itself through single-pair reference chains.
fn idf_cycle(s: &Schema) -> Option<TypeId> {
    for start in s.types.keys() {
        let mut cur = start.clone();
        let mut steps = 0;
        while let Some((_, q)) = s.single_pair(&cur) {
            match s.player.get(q) {
                Some(next) => cur = next.clone(),
                None => break,
            }
            steps += 1;
            if cur == *start || steps > s.types.len() {
                return Some(start.clone());
            }
        }
    }
    None
}
