//! Inductive link prediction for knowledge graphs whose emerging part has
//! no observed edge to the original graph.
//!
//! A link is scored by two parts. A semantic part embeds each endpoint as a
//! count-weighted average of learned relation features (so unseen entities
//! need no parameters of their own) and scores it with a DistMult decoder.
//! A topological part labels the nodes around the link by their distance to
//! either endpoint, runs relational message passing, and scores the pooled
//! result. Training combines a margin ranking loss with a contrastive loss
//! over perturbed relation-count tables.

pub mod clrm;
pub mod error;
pub mod eval;
pub mod gsm;
pub mod kg;
pub mod model;
pub mod numeric;
pub mod rng;
pub mod training;

pub use error::{Error, Result};
