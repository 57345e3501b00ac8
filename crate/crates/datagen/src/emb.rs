//! Word-vector file generation.
//!
//! Vectors are synthetic but follow the usual text format: synonym clusters
//! share a direction (cosine distance within a cluster stays far below the
//! mapper's threshold), and everything else is drawn independently, which in
//! 300 dimensions keeps unrelated words near-orthogonal.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DIM: usize = 300;

const CLUSTERS: &[&[&str]] = &[
    &["place", "places", "spot", "spots", "point", "points", "location"],
    &["city", "cities", "town", "towns"],
    &["state", "states"],
    &["river", "rivers"],
    &["population", "people", "inhabitants"],
    &["area", "size"],
    &["elevation", "height", "high", "tall"],
    &["len", "length", "long"],
    &["capital", "capitals"],
    &["county", "counties"],
    &["restaurant", "restaurants", "diner", "eatery"],
    &["food", "foods", "cuisine"],
    &["rating", "rated", "stars"],
    &["next_to", "border", "borders", "adjacent", "neighboring"],
];

fn random_vector<R: Rng>(rng: &mut R) -> Vec<f64> {
    (0..DIM).map(|_| rng.gen_range(-0.5..0.5)).collect()
}

/// Vectors for every token of both corpora plus cluster and keyword terms.
pub fn vectors_file(extra_tokens: &BTreeSet<String>, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines: Vec<(String, Vec<f64>)> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();

    for cluster in CLUSTERS {
        let center = random_vector(&mut rng);
        for word in *cluster {
            if !seen.insert(word.to_string()) {
                continue;
            }
            let noise = random_vector(&mut rng);
            let v: Vec<f64> = center
                .iter()
                .zip(&noise)
                .map(|(c, n)| c + 0.12 * n)
                .collect();
            lines.push((word.to_string(), v));
        }
    }
    for token in extra_tokens {
        let token = token.to_lowercase();
        if token.starts_with('<') || !seen.insert(token.clone()) {
            continue;
        }
        lines.push((token.clone(), random_vector(&mut rng)));
    }

    let mut out = String::new();
    for (token, v) in lines {
        out.push_str(&token);
        for x in v {
            write!(out, " {:.4}", x).unwrap();
        }
        out.push('\n');
    }
    out
}
