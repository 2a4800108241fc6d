use harmonize_search::{parse_advanced, parse_basic, to_canonical, QueryAst};
use harmonize_testkit::{random_ast, AtomText};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn leaf(seed: u64) -> QueryAst {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_ast(&mut rng, 1, AtomText::Adversarial)
}

fn only_basic_nodes(ast: &QueryAst) -> bool {
    match ast {
        QueryAst::Term { field: None, .. } | QueryAst::Phrase { field: None, .. } | QueryAst::MatchAll => true,
        QueryAst::And { children } => children.iter().all(only_basic_nodes),
        _ => false,
    }
}

#[test]
fn thousand_random_asts_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..1000 {
        let style = if i % 2 == 0 { AtomText::Adversarial } else { AtomText::Searchable };
        let ast = random_ast(&mut rng, 4, style);
        ast.validate().unwrap();
        let text = to_canonical(&ast);
        assert_eq!(parse_advanced(&text).as_ref(), Ok(&ast), "{text}");
    }
}

#[test]
fn canonical_text_is_a_fixpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let text = to_canonical(&random_ast(&mut rng, 4, AtomText::Adversarial));
        assert_eq!(to_canonical(&parse_advanced(&text).unwrap()), text);
    }
}

#[test]
fn basic_examples() {
    assert_eq!(parse_basic("Zika virus").unwrap(), QueryAst::and(vec![QueryAst::term("Zika"), QueryAst::term("virus")]));
    assert_eq!(parse_basic("\"Zika virus\"").unwrap(), QueryAst::phrase("Zika virus"));
    assert_eq!(parse_basic("").unwrap(), QueryAst::MatchAll);
    assert_eq!(parse_basic("species:human").unwrap(), QueryAst::term("species:human"));
}

#[test]
fn lowercase_operators_are_terms() {
    let ast = parse_advanced("zika or dengue not malaria").unwrap();
    let words: Vec<_> = ["zika", "or", "dengue", "not", "malaria"].iter().map(|w| QueryAst::term(w)).collect();
    assert_eq!(ast, QueryAst::and(words));
}

#[test]
fn not_binds_tighter_than_and() {
    let ast = parse_advanced("NOT a AND b").unwrap();
    assert_eq!(ast, QueryAst::and(vec![QueryAst::not(QueryAst::term("a")), QueryAst::term("b")]));
    let ast = parse_advanced("NOT (a OR b)").unwrap();
    assert_eq!(ast, QueryAst::not(QueryAst::or(vec![QueryAst::term("a"), QueryAst::term("b")])));
}

#[test]
fn nested_groups_are_kept() {
    let ast = parse_advanced("(a AND b) AND c").unwrap();
    assert_eq!(
        ast,
        QueryAst::and(vec![QueryAst::and(vec![QueryAst::term("a"), QueryAst::term("b")]), QueryAst::term("c")])
    );
}

#[test]
fn open_ended_and_partial_ranges() {
    let ast = parse_advanced("datePublished:[2020 TO *]").unwrap();
    assert_eq!(ast, QueryAst::Range { field: "datePublished".into(), lo: Some("2020-01-01".into()), hi: None });
    assert_eq!(to_canonical(&ast), "datePublished:[2020-01-01 TO *]");
    assert!(parse_advanced("datePublished:[2021-01-01 TO 2020-01-01]").is_err());
    assert!(parse_advanced("datePublished:[2021-01-01 2020-01-01]").is_err());
}

#[test]
fn field_star_is_exists() {
    assert_eq!(parse_advanced("species:*").unwrap(), QueryAst::exists("species"));
    assert_eq!(parse_advanced("species:\\*").unwrap(), QueryAst::field_term("species", "*"));
}

#[test]
fn empty_phrase_is_rejected_in_advanced() {
    let e = parse_advanced("name:\"\"").unwrap_err();
    assert_eq!(e.position, 5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn round_trip_property(seed in any::<u64>(), depth in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ast = random_ast(&mut rng, depth, AtomText::Adversarial);
        prop_assert_eq!(parse_advanced(&to_canonical(&ast)), Ok(ast));
    }

    #[test]
    fn or_and_precedence(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (leaf(a), leaf(b), leaf(c));
        let text = format!("{} OR {} AND {}", to_canonical(&a), to_canonical(&b), to_canonical(&c));
        prop_assert_eq!(parse_advanced(&text), Ok(QueryAst::or(vec![a, QueryAst::and(vec![b, c])])));
    }

    #[test]
    fn basic_never_builds_operators(q in ".{0,40}") {
        if let Ok(ast) = parse_basic(&q) {
            prop_assert!(only_basic_nodes(&ast), "{:?}", ast);
        }
    }

    #[test]
    fn basic_accepts_anything_with_balanced_quotes(q in "[a-z \"():]{0,30}") {
        let quotes = q.matches('"').count();
        prop_assert_eq!(parse_basic(&q).is_ok(), quotes % 2 == 0);
    }

    #[test]
    fn error_positions_are_inside_input(q in r#"[a-zA-Z0-9 ():\[\]"\\*ANDORT_-]{0,30}"#) {
        if let Err(e) = parse_advanced(&q) {
            prop_assert!(e.position <= q.chars().count(), "{} in {:?}", e, q);
        }
        if let Err(e) = parse_basic(&q) {
            prop_assert!(e.position < q.chars().count());
        }
    }
}
