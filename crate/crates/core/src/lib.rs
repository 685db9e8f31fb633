//! Selective prediction via learning to defer with deep-ensemble
//! uncertainty.
//!
//! Stage one trains an ensemble of diagnostic networks and summarizes their
//! disagreement as entropy features; stage two trains a defer network that
//! routes each sample either to a predicted class or to a human expert. Two
//! baselines are included: a defer-augmented classifier on raw features (LD)
//! and direct entropy thresholding (DT). Sweep drivers produce the
//! F1-versus-defer-rate trade-off curves.

pub mod data_io;
pub mod defer_loss;
pub mod ensemble;
pub mod error;
pub mod metrics;
pub mod neural_net;
pub mod numerics;
pub mod par;
pub mod report;
pub mod rng;
pub mod triage;
pub mod uncertainty;

pub use error::{LduError, Result};
