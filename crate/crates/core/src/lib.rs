//! One-hot graph encoder embedding.
//!
//! The crate is organised around the edgelist: every graph is an [`EdgeList`]
//! and every algorithm touches it in a constant number of linear passes. On top
//! of the encoder sit the random graph generators used to check its asymptotic
//! behaviour, an unsupervised clustering loop, a vertex classification harness
//! and an embedding-driven graph bootstrap.
//!
//! Interchangeable pieces (graph models, classifiers, bootstrap resamplers) are
//! trait objects registered by name in a [`registry::Registry`], so the command
//! line can select them at runtime.

pub mod bootstrap;
pub mod cluster;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod models;
pub mod registry;
pub mod rng;

pub use encoder::{encode, Embedding, EncoderWeights, Variant};
pub use error::{GeeError, Result};
pub use graph::{DegreeVector, Edge, EdgeList, LabelVector};
