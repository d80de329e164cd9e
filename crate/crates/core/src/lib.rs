//! Tweet sarcasm detection: datasets, preprocessing, augmentation, models,
//! training and evaluation.

pub mod augment;
pub mod corpus;
pub mod embed;
pub mod eval;
pub mod model;
pub mod preprocess;
pub mod rng;
pub mod synthetic;
pub mod train;
