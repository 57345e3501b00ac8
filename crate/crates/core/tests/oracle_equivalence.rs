//! The denotation engine must agree with the naive all-bindings interpreter
//! on random forms over random mini-databases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spatialnli_core::geo::{evaluate, oracle::oracle_evaluate, testgen};
use spatialnli_core::logic_form::render;

#[test]
fn engine_matches_oracle_on_random_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut nonempty = 0usize;
    for case in 0..300 {
        let db = testgen::random_db(&mut rng, 5);
        let form = testgen::random_form(&mut rng, &db);
        let got = evaluate(&form, &db);
        let want = oracle_evaluate(&form, &db);
        match (&got, &want) {
            (Ok(a), Ok(b)) => {
                assert_eq!(a, b, "case {case}: {}", render(&form));
                if !a.is_empty() {
                    nonempty += 1;
                }
            }
            (Err(a), Err(b)) => assert_eq!(a, b, "case {case}: {}", render(&form)),
            _ => panic!(
                "case {case}: engine {:?} oracle {:?} on {}",
                got,
                want,
                render(&form)
            ),
        }
    }
    // The generator should produce plenty of satisfiable queries.
    assert!(nonempty > 100, "only {nonempty} non-empty denotations");
}
