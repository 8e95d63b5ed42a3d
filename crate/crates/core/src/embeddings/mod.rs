//! Word vectors, n-gram averaging and a small skip-gram trainer.

mod ngram;
mod sgns;
mod vectors;

pub use ngram::{embed_all, embed_keys, embed_ngram, NGramEmbeddingTable};
pub use sgns::{sgns_gradients, sgns_loss, train_sgns, train_sgns_corpus, SgnsConfig, SgnsCorpus, SgnsGradients};
pub use vectors::{load_word_vectors, WordVectors};
