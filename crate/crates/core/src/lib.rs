//! Review helpfulness ranking.
//!
//! Reviews are turned into up to seventeen numeric features (text statistics,
//! readability, part-of-speech counts, and similarity to the product
//! description and customer questions), labelled high or low quality against
//! their product's mean vote count, classified with a random forest, and the
//! high-quality ones are ranked by a gradient-boosted vote regressor.

pub mod corpus;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod learners;
pub mod pipeline;
pub mod similarity;
pub mod synthetic;
pub mod text;

pub use error::{Error, Result};
