//! Measurement and analysis of intellectual humility (IH) in online political
//! discussion.
//!
//! The crate is split along the lines of the workflow it supports:
//!
//! - [`model`]: labels, the sub-label codebook, comment records and IH score
//!   arithmetic shared by everything else.
//! - [`classify`]: IH / IA / Neutral classifiers (remote chat model, lexicon
//!   stub, random and majority baselines) and the evaluation harness.
//! - [`stats`]: distributions, paired tests, agreement, OLS and the
//!   proportional-odds ordered logit.
//! - [`corpus`]: the observational pipeline over comment dumps.
//! - [`rct`]: outcomes and regressions for the randomized experiment.
//! - [`assets`]: bundled prompt texts, persona profiles and consent copy.

pub mod assets;
pub mod classify;
pub mod corpus;
pub mod model;
pub mod rct;
pub mod stats;

pub use model::{Aggregate, Codebook, CommentRecord, IHLabel, Polarity, SubLabel};
