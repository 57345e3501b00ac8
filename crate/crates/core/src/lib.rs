//! Core machinery for a natural-language interface to spatial databases:
//! logic forms, the fact store and its denotation engine, word embeddings,
//! phrase-to-entity mapping, symbol injection/recovery and training-data
//! augmentation.

pub mod augment;
pub mod embed;
pub mod geo;
pub mod inject;
pub mod logic_form;
pub mod mapper;
pub mod text;
