//! Instances, tuples, relations and populations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::multiset::{Arith, Bag, Freq};
use crate::schema::{AttrName, RoleId, TypeId};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Null,
    Bool(bool),
    Num(BigRational),
    Str(String),
    /// Surrogate for an entity instance: root type plus identifying values.
    Abstract { root: TypeId, key: Vec<Value> },
    Rel(BTreeMap<RoleId, Value>),
    Bag(Bag<Value>),
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Value::Num(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    pub fn entity(root: &str, key: Vec<Value>) -> Self {
        Value::Abstract { root: TypeId::new(root), key }
    }

    pub fn rel<I: IntoIterator<Item = (RoleId, Value)>>(roles: I) -> Self {
        Value::Rel(roles.into_iter().collect())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self {
            Value::Num(n) => Some(n),
            _ => None,
        }
    }

    /// Parses a decimal literal such as `12`, `-3.25` or `1.5e2` into an exact rational.
    pub fn parse_decimal(s: &str) -> Option<Value> {
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
            None => (s, 0),
        };
        let (neg, mant) = match mant.strip_prefix('-') {
            Some(m) => (true, m),
            None => (false, mant),
        };
        let (int, frac) = match mant.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mant, ""),
        };
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits: BigInt = format!("{int}{frac}").parse().ok()?;
        let scale = exp - frac.len() as i32;
        let ten = BigInt::from(10);
        let mut r = BigRational::from_integer(digits);
        if scale >= 0 {
            r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
        } else {
            r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
        }
        Some(Value::Num(if neg { -r } else { r }))
    }

    /// Short type tag used in error messages.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Null => "NULL",
            Value::Bool(_) => "boolean",
            Value::Num(_) => "number",
            Value::Str(_) => "string",
            Value::Abstract { .. } => "entity instance",
            Value::Rel(_) => "relationship instance",
            Value::Bag(_) => "bag",
        }
    }
}

/// Renders an exact rational: integers plainly, terminating fractions exactly,
/// everything else rounded to ten decimals.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    let mut d = r.denom().clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    let terminating = d.is_one();
    let places = twos.max(fives);
    let places = if terminating { places } else { 10 };
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = r * BigRational::from_integer(scale.clone());
    let rounded = if terminating { scaled.to_integer() } else { scaled.round().to_integer() };
    let neg = rounded.is_negative();
    let digits = rounded.abs().to_string();
    let digits = format!("{:0>width$}", digits, width = places + 1);
    let (i, f) = digits.split_at(digits.len() - places);
    let f = if terminating { f.to_string() } else { f.trim_end_matches('0').to_string() };
    format!("{}{}{}{}", if neg { "-" } else { "" }, i, if f.is_empty() { "" } else { "." }, f)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("NULL"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(n) => f.write_str(&format_rational(n)),
            Value::Str(s) => write!(f, "'{s}'"),
            Value::Abstract { root, key } => {
                write!(f, "{root}(")?;
                for (i, k) in key.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}")?;
                }
                f.write_str(")")
            }
            Value::Rel(m) => {
                f.write_str("{")?;
                for (i, (r, v)) in m.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{r}: {v}")?;
                }
                f.write_str("}")
            }
            Value::Bag(b) => {
                f.write_str("{{")?;
                for (i, v) in b.expand().iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}}")
            }
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Arith for Value {
    fn null() -> Self {
        Value::Null
    }
    fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }
    fn add(&self, other: &Self) -> Option<Self> {
        match (self, other) {
            (Value::Num(a), Value::Num(b)) => Some(Value::Num(a + b)),
            _ => None,
        }
    }
    fn times(&self, n: &Freq) -> Option<Self> {
        match self {
            Value::Num(a) => Some(Value::Num(a * BigRational::from_integer(BigInt::from(n.clone())))),
            _ => None,
        }
    }
    fn is_arith(&self) -> bool {
        matches!(self, Value::Num(_))
    }
}

/// Three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Truth {
    False,
    Unknown,
    True,
}

impl Truth {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
    pub fn not(self) -> Self {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }
    pub fn and(self, o: Self) -> Self {
        self.min(o)
    }
    pub fn or(self, o: Self) -> Self {
        self.max(o)
    }
    pub fn xor(self, o: Self) -> Self {
        match (self, o) {
            (Truth::Unknown, _) | (_, Truth::Unknown) => Truth::Unknown,
            (a, b) => Truth::from_bool(a != b),
        }
    }
    pub fn implies(self, o: Self) -> Self {
        self.not().or(o)
    }
    pub fn iff(self, o: Self) -> Self {
        self.implies(o).and(o.implies(self))
    }
    pub fn is_true(self) -> bool {
        self == Truth::True
    }
}

pub type Tuple = BTreeMap<AttrName, Value>;

#[derive(Clone, PartialEq, Eq)]
pub struct Relation {
    pub header: BTreeSet<AttrName>,
    pub body: Bag<Tuple>,
}

impl Relation {
    pub fn empty(header: BTreeSet<AttrName>) -> Self {
        Relation { header, body: Bag::new() }
    }

    pub fn from_rows(header: &[AttrName], rows: Vec<Vec<Value>>) -> Self {
        let mut body = Bag::new();
        for row in rows {
            assert_eq!(row.len(), header.len(), "row arity");
            body.insert(header.iter().cloned().zip(row).collect());
        }
        Relation { header: header.iter().cloned().collect(), body }
    }

    pub fn cardinality(&self) -> Freq {
        self.body.cardinality()
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }

    /// Rows as value vectors in the given column order, expanded by frequency.
    pub fn rows(&self, cols: &[AttrName]) -> Vec<Vec<Value>> {
        self.body
            .expand()
            .into_iter()
            .map(|t| cols.iter().map(|c| t.get(c).cloned().unwrap_or(Value::Null)).collect())
            .collect()
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<&AttrName> = self.header.iter().collect();
        writeln!(f, "{}", cols.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("\t"))?;
        for t in self.body.expand() {
            let cells: Vec<String> = cols.iter().map(|c| t.get(*c).map(|v| v.to_string()).unwrap_or_default()).collect();
            writeln!(f, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Population {
    pub pops: BTreeMap<TypeId, Bag<Value>>,
}

impl Population {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pop(x); the boolean type is populated implicitly.
    pub fn of(&self, t: &TypeId) -> Bag<Value> {
        if let Some(b) = self.pops.get(t) {
            return b.clone();
        }
        if t.0 == crate::schema::BOOL {
            return Bag::from_set([Value::Bool(false), Value::Bool(true)]);
        }
        Bag::new()
    }

    pub fn set(&mut self, t: &TypeId, instances: impl IntoIterator<Item = Value>) {
        self.pops.insert(t.clone(), Bag::from_set(instances.into_iter().collect::<BTreeSet<_>>()));
    }

    pub fn add(&mut self, t: &TypeId, v: Value) {
        let b = self.pops.entry(t.clone()).or_default();
        if !b.contains(&v) {
            b.insert(v);
        }
    }
}
