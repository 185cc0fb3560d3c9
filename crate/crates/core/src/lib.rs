//! Nearest-neighbor machine translation.
//!
//! A frozen base translation model is paired with a datastore of cached
//! (context key → next target token) entries. At every decoding step the
//! nearest cached contexts are retrieved, turned into a distribution over
//! their target tokens, and interpolated with the model's own distribution.

pub mod base_model;
pub mod binio;
pub mod cli;
pub mod corpus;
pub mod datastore;
pub mod decoder;
pub mod eval;
pub mod scalar;
pub mod vector_index;

pub use scalar::Scalar;

pub type FlatIndexF32 = vector_index::FlatIndex<f32>;
pub type FlatIndexF64 = vector_index::FlatIndex<f64>;
pub type IvfPqIndexF32 = vector_index::IvfPqIndex<f32>;
pub type IvfPqIndexF64 = vector_index::IvfPqIndex<f64>;
pub type ProductQuantizerF32 = vector_index::ProductQuantizer<f32>;
pub type ProductQuantizerF64 = vector_index::ProductQuantizer<f64>;
pub type VectorIndexF32 = vector_index::VectorIndex<f32>;
pub type VectorIndexF64 = vector_index::VectorIndex<f64>;
pub type KnnDistributionF32 = datastore::KnnDistribution<f32>;
pub type KnnDistributionF64 = datastore::KnnDistribution<f64>;
