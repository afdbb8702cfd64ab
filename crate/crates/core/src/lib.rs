//! Synthetic tabular data from an adversarially trained structural causal
//! model.
//!
//! The pipeline: load a [`data::Table`], obtain a [`graph::CausalGraph`]
//! (given, or estimated with [`discovery`]), encode the table with
//! [`transform::TableCodec`], build one neural mechanism per column wired by
//! the graph ([`gan::ScmGenerator`]), train it against a discriminator, and
//! score samples with [`evaluate`] (including the oracle likelihood of a
//! [`bayes_net::BayesNet`] when the data was simulated).

pub mod bayes_net;
pub mod data;
pub mod discovery;
pub mod evaluate;
pub mod gan;
pub mod graph;
pub mod nn;
pub mod transform;
