//! Dataset ingestion, k-NN graph construction and the one-class fold protocol.

mod dataset;
mod folds;
mod knn;
mod synth;

pub use dataset::{load_dataset, Dataset, Label};
pub use folds::{make_folds, make_folds_from_labels, FoldSplit};
pub use knn::{knn_graph, normalize, Graph, Similarity};
pub use synth::{synth_dataset, SynthKind, BLOB_DIM, BLOB_SEPARATION};
