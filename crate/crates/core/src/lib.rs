//! Evaluation of clustering changes.
//!
//! Given a Base and an Exp clustering of the same weighted items, this crate
//! measures how much changed (impact), how good the change is (good/bad
//! splits and merges, ΔPrecision, ΔRecall), whether Exp moved toward an
//! Ideal clustering (IQ), and how good a single clustering is on an absolute
//! scale (snapshot quality).

pub mod cli;
pub mod delta_recall;
pub mod error;
pub mod fixtures;
pub mod impact;
pub mod iq;
pub mod model;
pub mod quality;
pub mod report;
pub mod simulation;
pub mod snapshot;

pub use error::{Error, Result};
pub use model::{
    load_clustering, parse_clustering, restrict_to_common, Clustering, ClusteringPair, Item,
    ItemIx, Partition, Population, VennTable, VennWeights,
};
