mod common;

use conquer::front::*;
use conquer::path::*;
use conquer::relalg::CmpOp;
use conquer::schema::{RoleId, Schema, TypeId, TypeKind};
use conquer::value::Value;

fn mix(first: &str, last: &str) -> PathExpr {
    PathExpr::MixFix { first: RoleId::new(first), middle: vec![], last: RoleId::new(last) }
}

fn only(text: &str, s: &Schema) -> Interpretation {
    let r = parse(text, s).unwrap_or_else(|e| panic!("{text}: {e}"));
    assert_eq!(r.interpretations.len(), 1, "{text}: {:?}", r.interpretations);
    r.interpretations.into_iter().next().unwrap()
}

const LISTING: &str = r#"
00 SELECTION({{01,08}}, NULL)
01 BINARY_OP_APPLIC("AND ALSO", 02, 06)
02 BINARY_OP_APPLIC("", 03, 04)
03 TYPE_SPEC(NULL, "Person", x, NULL, NULL)
04 MFIX("who", p1, {"earns", p2, 05})
05 TYPE_SPEC(NULL, "Salary", y, "x", NULL)
06 MFIX(NULL, q1, {"works for", q2, 07})
07 TYPE_SPEC("a", "Company", z, "c", NULL)
08 SCALEXPRESS_COMP(09, 10, ">")
09 VAR_NAME("x", NULL)
10 COERCE_FUNCTION("THE AVERAGE", {11})
11 BINARY_OP_APPLIC("", 12, 13)
12 TYPE_SPEC(NULL, "Salary", y, NULL, NULL)
13 MFIX(NULL, p2, {"of", p1, 14})
14 BINARY_OP_APPLIC("", 15, 16)
15 TYPE_SPEC("a", "Person", x, NULL, NULL)
16 MFIX("who", q1, {"works for", q2, 17})
17 VAR_NAME("c", NULL)
"#;

#[test]
fn listing_query_records() {
    let s = common::listing_schema();
    let i = only(common::LISTING_QUERY, &s);
    assert_eq!(normalise_listing(&dump_records(&i.record)), normalise_listing(LISTING));
}

#[test]
fn listing_query_lowers_to_selection_of_intersected_fronts() {
    let s = common::listing_schema();
    let i = only(common::LISTING_QUERY, &s);
    let var = |a: &str| PathExpr::var(a);
    let left = PathExpr::chain(vec![PathExpr::ty("x"), mix("p1", "p2"), PathExpr::ty("y"), var("x")]);
    let right = PathExpr::chain(vec![mix("q1", "q2"), PathExpr::ty("z"), var("c")]);
    let avg = PathExpr::chain(vec![PathExpr::ty("y"), mix("p2", "p1"), PathExpr::ty("x"), mix("q1", "q2"), var("c")]);
    let expected = PathExpr::Where {
        branches: vec![(
            PathExpr::SetOp(SetOpKind::Intersect, b(left.front()), b(right.front())),
            PeCond::Compare(
                PeScalar::Var(conquer::schema::AttrName::named("x")),
                CmpOp::Gt,
                PeScalar::Agg(AggKind::Avg, b(PathExpr::HdCoerce(b(avg)))),
            ),
        )],
        default: None,
        form: WhereForm::Where,
    };
    assert_eq!(i.path, expected);
}

#[test]
fn record_dump_round_trips() {
    let s = common::listing_schema();
    let i = only(common::LISTING_QUERY, &s);
    let dump = dump_records(&i.record);
    assert_eq!(parse_dump(&dump, &s).unwrap(), i.record);
    let e = parse_dump("00 VAR_NAME(\"x\", NULL)\n02 VAR_NAME(\"y\", NULL)", &s).unwrap_err();
    assert_eq!(e.line, 2);
}

#[test]
fn prefix_postfix_chain() {
    let s = common::election_schema(1);
    let i = only("some President who has some Election-result that has as some Result", &s);
    let expected = PathExpr::chain(vec![
        PathExpr::ty("A"),
        PathExpr::role("p"),
        PathExpr::ty("F"),
        PathExpr::exit("q"),
        PathExpr::ty("B"),
    ]);
    assert_eq!(i.path, expected);
}

#[test]
fn bare_type_name() {
    let s = common::election_schema(0);
    assert_eq!(only("President", &s).path, PathExpr::ty("A"));
}

#[test]
fn mix_fix_reading() {
    let s = common::election_schema(2);
    let i = only("some President who has participated in an election leading in some Result", &s);
    assert_eq!(i.path, PathExpr::chain(vec![PathExpr::ty("A"), mix("p", "q"), PathExpr::ty("B")]));
}

/// Companies related to people by ownership and by employment, both read "of", and
/// cities in countries also read "of".
fn homonym_schema() -> Schema {
    let mut s = Schema::new();
    for t in ["Person", "Company", "City", "Country"] {
        s.add_type(t, TypeKind::ENTITY);
        s.naming.tnm.insert(TypeId::new(t), t.into());
    }
    for (f, a, b, x, y) in [
        ("Owning", "o1", "o2", "Person", "Company"),
        ("Employment", "w1", "w2", "Person", "Company"),
        ("Location", "l1", "l2", "City", "Country"),
    ] {
        s.add_type(f, TypeKind::FACT);
        s.naming.tnm.insert(TypeId::new(f), f.into());
        s.add_role(a, f, x);
        s.add_role(b, f, y);
        s.naming.mfix.push(conquer::schema::MixFix {
            fact: TypeId::new(f),
            parts: vec!["of".into()],
            roles: vec![RoleId::new(b), RoleId::new(a)],
        });
    }
    s.derive_hierarchy(&[]);
    s
}

#[test]
fn homonym_readings_survive_and_are_verbalised() {
    let s = homonym_schema();
    let all = parse_all("Company of Person", &s).unwrap();
    assert_eq!(all.interpretations.len(), 3);
    let r = parse("Company of Person", &s).unwrap();
    assert!(r.ambiguous);
    let mut paths: Vec<PathExpr> = r.interpretations.iter().map(|i| i.path.clone()).collect();
    paths.sort();
    let reading = |a: &str, b: &str| PathExpr::chain(vec![PathExpr::ty("Company"), mix(a, b), PathExpr::ty("Person")]);
    assert_eq!(paths, vec![reading("o2", "o1"), reading("w2", "w1")]);

    // each survivor ranges from companies to people, the dropped one from nothing
    for i in &r.interpretations {
        let c = head_tail_combos(&s, &i.path, &i.typing).unwrap();
        assert_eq!(c, [(TypeId::new("Company"), TypeId::new("Person"))].into());
    }
    let located = reading("l2", "l1");
    assert!(head_tail_combos(&s, &located, &Typing::new()).unwrap().is_empty());

    // the verbalisations tell the two apart and each reads back unambiguously
    let mut texts: Vec<String> = r.interpretations.iter().map(|i| i.verbalisation.clone().unwrap()).collect();
    texts.sort();
    assert_eq!(texts, vec!["Company of.Employment Person", "Company of.Owning Person"]);
    for (t, i) in texts.iter().zip([reading("w2", "w1"), reading("o2", "o1")]) {
        assert_eq!(only(t, &s).path, i);
    }
}

#[test]
fn structurally_empty_query_is_incorrect() {
    let s = common::election_schema(0);
    match parse("President are of Election-result", &s) {
        Err(FrontError::Incorrect { diagnostics }) => assert!(!diagnostics.is_empty()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn misspelt_names_get_suggestions() {
    let s = common::election_schema(0);
    match parse("Presidnt has Election-result", &s) {
        Err(FrontError::UnknownName { name, line, col, candidates }) => {
            assert_eq!((name.as_str(), line, col), ("Presidnt", 1, 1));
            assert_eq!(candidates, vec!["President".to_string()]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn syntax_errors_point_at_the_offending_token() {
    let s = common::election_schema(0);
    match parse("President UNITED WITH", &s) {
        Err(FrontError::Syntax { line, col, found, .. }) => {
            assert_eq!((line, col), (1, 22));
            assert_eq!(found, "end of input");
        }
        other => panic!("{other:?}"),
    }
    match parse("President ) Result", &s) {
        Err(FrontError::Syntax { col, found, .. }) => assert_eq!((col, found.as_str()), (11, "')'")),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse("", &s), Err(FrontError::Syntax { .. })));
    assert!(matches!(parse("President 'x", &s), Err(FrontError::Lex(_))));
}

#[test]
fn selection_forms_are_kept() {
    let s = common::listing_schema();
    let form = |t: &str| match only(t, &s).path {
        PathExpr::Where { form, .. } => form,
        p => panic!("{p}"),
    };
    assert_eq!(form("Person p WHERE p = 1"), WhereForm::Where);
    assert_eq!(form("IF 1 = 1 THEN Person ELSE Company"), WhereForm::IfThenElse);
    assert_eq!(form("Person IF 1 = 1; Company IF 1 = 2; Salary OTHERWISE"), WhereForm::Cases);
    assert_eq!(form("Person IF 1 = 1; Company IF 1 = 2"), WhereForm::Guarded);
}

#[test]
fn value_words_and_arithmetic() {
    let s = common::listing_schema();
    let p = only("x IS GREATER THAN 2 * 3 + 1", &s).path;
    let three = |n: i64| PeScalar::Const(Value::int(n));
    let rhs = PeScalar::Apply("+".into(), vec![PeScalar::Apply("*".into(), vec![three(2), three(3)]), three(1)]);
    assert_eq!(p, PathExpr::Cond(PeCond::Compare(PeScalar::Var(conquer::schema::AttrName::named("x")), CmpOp::Gt, rhs)));
}

#[test]
fn list_statements() {
    let s = common::listing_schema();
    let l = parse_list("LIST Person ORDERED ASCENDING", &s).unwrap();
    assert_eq!(l.order, ListOrder::WholeAsc);
    assert!(l.projection.is_none());
    let l = parse_list("LIST x FROM Person x WHO earns a Salary ORDERED WITH x DESCENDING", &s);
    assert!(l.is_err());
    let l = parse_list("LIST x FROM Person x who earns a Salary ORDERED WITH x DESCENDING", &s).unwrap();
    assert_eq!(l.order, ListOrder::PerVar(vec![(conquer::schema::AttrName::named("x"), Order::Desc)]));
    assert_eq!(l.projection, Some(vec![PeScalar::Var(conquer::schema::AttrName::named("x"))]));
    assert!(matches!(
        parse_list("LIST Person ORDERED WITH q ASCENDING", &s),
        Err(FrontError::Order(_))
    ));
}

#[test]
fn instances_denote_by_their_keys() {
    let s = common::listing_schema();
    let erik = Value::entity("x", vec![Value::str("Erik")]);
    assert_eq!(denote_instance(&erik, &s).unwrap(), vec![Value::str("Erik")]);
    let nested = Value::entity("x", vec![Value::entity("z", vec![Value::int(7)]), Value::int(1)]);
    assert_eq!(denote_instance(&nested, &s).unwrap(), vec![Value::int(7), Value::int(1)]);
    assert!(denote_instance(&Value::entity("x", vec![]), &s).is_err());
    assert_eq!(denote_instance(&Value::int(3), &s).unwrap(), vec![Value::int(3)]);
}
