use proptest::prelude::*;
use spatialnli_core::embed::{edit_distance, EmbeddingTable};
use spatialnli_core::logic_form::{normalize, parse, render, substitute, Term};

proptest! {
    #[test]
    fn edit_distance_is_a_metric(a in "[a-z]{0,8}", b in "[a-z]{0,8}", c in "[a-z]{0,8}") {
        prop_assert_eq!(edit_distance(&a, &a), 0);
        prop_assert_eq!(edit_distance(&a, &b), edit_distance(&b, &a));
        prop_assert!(edit_distance(&a, &c) <= edit_distance(&a, &b) + edit_distance(&b, &c));
    }

    #[test]
    fn semantic_distance_symmetric_and_bounded(
        va in prop::collection::vec(-1.0f64..1.0, 8),
        vb in prop::collection::vec(-1.0f64..1.0, 8),
    ) {
        prop_assume!(va.iter().any(|x| *x != 0.0));
        prop_assume!(vb.iter().any(|x| *x != 0.0));
        let mut m = std::collections::HashMap::new();
        m.insert("a".to_string(), va);
        m.insert("b".to_string(), vb);
        let e = EmbeddingTable::from_vectors(8, m);
        let d1 = e.semantic_distance("a", "b").unwrap();
        let d2 = e.semantic_distance("b", "a").unwrap();
        prop_assert!((d1 - d2).abs() < 1e-12);
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&d1));
    }

    #[test]
    fn embed_phrase_is_permutation_invariant(
        perm in prop::sample::subsequence(vec!["x", "y", "z", "x"], 1..4),
    ) {
        let mut m = std::collections::HashMap::new();
        m.insert("x".to_string(), vec![1.0, 0.0]);
        m.insert("y".to_string(), vec![0.0, 1.0]);
        m.insert("z".to_string(), vec![0.5, 0.5]);
        let e = EmbeddingTable::from_vectors(2, m);
        let fwd = e.embed_phrase(&perm);
        let mut rev = perm.clone();
        rev.reverse();
        let bwd = e.embed_phrase(&rev);
        prop_assert_eq!(fwd, bwd);
    }
}

/// Strategy for random well-formed logic terms.
fn term_strategy() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(vec!['A', 'B', 'C']).prop_map(Term::Variable),
        "[a-z]{1,6}( [a-z]{1,6})?".prop_map(Term::Constant),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            ("[a-z]{1,8}", prop::collection::vec(inner.clone(), 1..3)).prop_map(
                |(name, args)| Term::Predicate { name, args }
            ),
            prop::collection::vec(inner, 1..3).prop_map(Term::Conjunction),
        ]
    })
}

proptest! {
    #[test]
    fn render_parse_round_trip(t in term_strategy()) {
        let lf = spatialnli_core::logic_form::LogicForm { root: t };
        let s = render(&lf);
        let back = parse(&s).unwrap();
        prop_assert_eq!(render(&back), s);
    }

    /// Inserting or deleting a parenthesis breaks a valid form.
    #[test]
    fn paren_mutations_fail_to_parse(seed in 0usize..200) {
        let s = "answer(A,count(B,(river(B),const(C,stateid(Mississippi)),loc(B,C)),A))";
        let pos = seed % s.len();
        let mutated: String = if seed % 2 == 0 {
            let mut m = s.to_string();
            m.insert(pos, if seed % 4 == 0 { '(' } else { ')' });
            m
        } else {
            let target = if seed % 4 == 1 { '(' } else { ')' };
            match s.char_indices().filter(|(_, c)| *c == target).nth(pos % 10) {
                Some((i, _)) => {
                    let mut m = s.to_string();
                    m.remove(i);
                    m
                }
                None => return Ok(()),
            }
        };
        // Either the parse fails, or (for a few benign insertions) the
        // mutated string is no longer canonical.
        match parse(&mutated) {
            Err(_) => {}
            Ok(lf) => prop_assert_ne!(render(&lf), s),
        }
    }

    #[test]
    fn substitute_preserves_arity_and_depth(t in term_strategy()) {
        let lf = spatialnli_core::logic_form::LogicForm { root: t };
        let out = substitute(&lf, &|sym| Some(format!("repl {sym}"))).unwrap();
        prop_assert_eq!(shape(&lf.root), shape(&out.root));
    }
}

/// Tree shape: arities by preorder walk.
fn shape(t: &Term) -> Vec<usize> {
    fn walk(t: &Term, out: &mut Vec<usize>) {
        match t {
            Term::Variable(_) | Term::Constant(_) => out.push(0),
            Term::Predicate { args, .. } => {
                out.push(args.len());
                args.iter().for_each(|a| walk(a, out));
            }
            Term::Conjunction(ts) => {
                out.push(ts.len());
                ts.iter().for_each(|a| walk(a, out));
            }
        }
    }
    let mut out = Vec::new();
    walk(t, &mut out);
    out
}

#[test]
fn normalize_strips_layout_only() {
    let spaced = "answer(A, population(B,A), const(B,cityid(San Antonio)))";
    assert_eq!(
        normalize(spaced),
        "answer(A,population(B,A),const(B,cityid(San Antonio)))"
    );
}
