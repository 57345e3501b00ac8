//! Pre-trained word vectors plus the two phrase distances used for entity
//! detection: cosine-based semantic distance and Levenshtein edit distance.
//!
//! The loader reads the standard text format, one token per line followed by
//! its components. Unknown tokens get a deterministic pseudo-random vector
//! seeded by the token itself, so lookups are stable across runs.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Format {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("phrase {0:?} embeds to the zero vector")]
    ZeroVector(String),
}

pub struct EmbeddingTable {
    pub dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    /// Load vectors from the `token v1 v2 ... vdim` text format; the
    /// dimension is inferred from the first line.
    pub fn load(path: &Path) -> Result<EmbeddingTable, EmbedError> {
        let text = std::fs::read_to_string(path).map_err(|source| EmbedError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut vectors = HashMap::new();
        let mut dim = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().unwrap().to_lowercase();
            let vec: Vec<f64> = parts
                .map(|p| p.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| EmbedError::Format {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    reason: e.to_string(),
                })?;
            if dim == 0 {
                dim = vec.len();
                if dim == 0 {
                    return Err(EmbedError::Format {
                        path: path.display().to_string(),
                        line: lineno + 1,
                        reason: "no vector components".into(),
                    });
                }
            } else if vec.len() != dim {
                return Err(EmbedError::Format {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    reason: format!("expected {dim} components, found {}", vec.len()),
                });
            }
            vectors.insert(token, vec);
        }
        Ok(EmbeddingTable { dim, vectors })
    }

    pub fn from_vectors(dim: usize, vectors: HashMap<String, Vec<f64>>) -> EmbeddingTable {
        EmbeddingTable { dim, vectors }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(&token.to_lowercase())
    }

    /// Vector of a token; unknown tokens fall back to a hash-seeded vector
    /// with components in [-0.05, 0.05].
    pub fn vector(&self, token: &str) -> Vec<f64> {
        let key = token.to_lowercase();
        match self.vectors.get(&key) {
            Some(v) => v.clone(),
            None => unknown_vector(&key, self.dim),
        }
    }

    /// Elementwise mean of the per-token vectors of a phrase.
    pub fn embed_phrase(&self, tokens: &[&str]) -> Vec<f64> {
        assert!(!tokens.is_empty(), "cannot embed an empty phrase");
        let mut acc = vec![0.0; self.dim];
        for t in tokens {
            for (a, x) in acc.iter_mut().zip(self.vector(t)) {
                *a += x;
            }
        }
        let n = tokens.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    /// `1 - cos(E(a), E(b))`, in [0, 2]. Phrases are split on whitespace.
    pub fn semantic_distance(&self, a: &str, b: &str) -> Result<f64, EmbedError> {
        let ea = self.embed_phrase(&a.split_whitespace().collect::<Vec<_>>());
        let eb = self.embed_phrase(&b.split_whitespace().collect::<Vec<_>>());
        let na = norm(&ea);
        let nb = norm(&eb);
        if na == 0.0 {
            return Err(EmbedError::ZeroVector(a.to_string()));
        }
        if nb == 0.0 {
            return Err(EmbedError::ZeroVector(b.to_string()));
        }
        let dot: f64 = ea.iter().zip(&eb).map(|(x, y)| x * y).sum();
        Ok(1.0 - dot / (na * nb))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// FNV-1a over the token picks the stream; a tiny xorshift fills the vector.
fn unknown_vector(token: &str, dim: usize) -> Vec<f64> {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in token.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    let mut state = h | 1;
    (0..dim)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let unit = (state >> 11) as f64 / (1u64 << 53) as f64; // [0,1)
            (unit - 0.5) * 0.1
        })
        .collect()
}

/// Levenshtein distance with unit costs, case-insensitive.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.to_lowercase().chars().collect();
    let b: Vec<char> = b.to_lowercase().chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(entries: &[(&str, &[f64])]) -> EmbeddingTable {
        let dim = entries[0].1.len();
        let vectors = entries
            .iter()
            .map(|(t, v)| (t.to_string(), v.to_vec()))
            .collect();
        EmbeddingTable::from_vectors(dim, vectors)
    }

    #[test]
    fn phrase_embedding_is_the_mean() {
        let e = table(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        assert_eq!(e.embed_phrase(&["a"]), vec![1.0, 0.0]);
        assert_eq!(e.embed_phrase(&["a", "b"]), vec![0.5, 0.5]);
        assert_eq!(e.embed_phrase(&["b", "a"]), vec![0.5, 0.5]);
    }

    #[test]
    fn semantic_distance_basics() {
        let e = table(&[("x", &[1.0, 0.0]), ("y", &[0.0, 1.0])]);
        assert!((e.semantic_distance("x", "x").unwrap()).abs() < 1e-12);
        assert!((e.semantic_distance("x", "y").unwrap() - 1.0).abs() < 1e-12);
        let d1 = e.semantic_distance("x", "y").unwrap();
        let d2 = e.semantic_distance("y", "x").unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn zero_vector_is_an_error() {
        let e = table(&[("z", &[0.0, 0.0]), ("x", &[1.0, 0.0])]);
        assert!(matches!(
            e.semantic_distance("z", "x"),
            Err(EmbedError::ZeroVector(_))
        ));
    }

    #[test]
    fn unknown_tokens_are_stable() {
        let e = table(&[("x", &[1.0, 0.0, 0.0])]);
        let v1 = e.vector("never-seen");
        let v2 = e.vector("never-seen");
        assert_eq!(v1, v2);
        assert_eq!(v1.len(), 3);
        assert!(v1.iter().all(|x| x.abs() <= 0.05));
        assert_ne!(e.vector("other-token"), v1);
    }

    #[test]
    fn edit_distance_cases() {
        assert_eq!(edit_distance("rivers", "river"), 1);
        assert_eq!(edit_distance("", "abc"), 3);
        assert_eq!(edit_distance("kitten", "sitting"), 3);
        assert_eq!(edit_distance("Mississippi", "mississippi"), 0);
    }
}
