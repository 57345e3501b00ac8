//! Self-contained differentiable kernels (tape autodiff, LSTM/GRU cells,
//! additive attention, Adam) plus the two models built on them: the
//! context-comprehension classifier and the seq2seq translator with copying.

pub mod attention;
pub mod comprehension;
pub mod gradcheck;
pub mod optim;
pub mod params;
pub mod rnn;
pub mod tape;
pub mod translator;
