//! The three routing strategies. LDU trains a defer network on the K+2
//! ensemble features; LD augments the diagnostic architecture with a defer
//! output and trains on raw features; DT thresholds an entropy measure and
//! otherwise returns the ensemble majority vote.

use crate::data_io::LabeledDataset;
use crate::error::{LduError, Result};
use crate::neural_net::{forward, mlp_specs, train, LayerSpec, Loss, NetworkParams, TrainConfig};
use crate::uncertainty::{
    build_defer_features, diagnostic_entropy, ensemble_entropy, vote_fractions, DeferFeatures,
    PredictionMatrix, CLASS_COUNT,
};

/// Per-sample verdict: a class index or the distinguished defer decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriageDecision {
    Class(usize),
    Defer,
}

impl TriageDecision {
    pub fn is_defer(&self) -> bool {
        matches!(self, TriageDecision::Defer)
    }
}

impl std::fmt::Display for TriageDecision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TriageDecision::Class(c) => write!(f, "{c}"),
            TriageDecision::Defer => write!(f, "DEFER"),
        }
    }
}

/// Entropy measure used by direct triage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyMeasure {
    Diagnostic,
    Ensemble,
}

#[derive(Clone, Copy, Debug)]
pub struct DtConfig {
    pub threshold: f64,
    pub measure: EntropyMeasure,
}

impl DtConfig {
    fn validate(&self) -> Result<()> {
        if !self.threshold.is_finite() || self.threshold < 0.0 {
            return Err(LduError::invalid("dt config: threshold must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Hidden widths of the stage-two defer network.
pub const LDU_HIDDEN: [usize; 2] = [100, 100];

/// Trains the stage-two LDU network: (K+2) → 100 → 100 → (C+1) with the
/// defer loss at the given alpha. The matrix must carry labels.
pub fn train_ldu(matrix: &PredictionMatrix, alpha: f64, config: &TrainConfig) -> Result<NetworkParams> {
    let labels = matrix
        .labels
        .as_ref()
        .ok_or_else(|| LduError::invalid("train_ldu: prediction matrix has no labels"))?;
    let features = build_defer_features(matrix)?;
    let specs = mlp_specs(matrix.member_count() + 2, &LDU_HIDDEN, CLASS_COUNT + 1);
    let mut config = *config;
    config.loss = Loss::Defer { alpha };
    train(&features.rows, labels, &specs, &config)
}

/// Layer specs of the LDU defer network for a given ensemble size.
pub fn ldu_specs(member_count: usize) -> Vec<LayerSpec> {
    mlp_specs(member_count + 2, &LDU_HIDDEN, CLASS_COUNT + 1)
}

/// Argmax over C+1 logits; index C maps to DEFER; ties break toward the
/// lowest index.
fn decide_row(net: &NetworkParams, row: &[f64]) -> Result<TriageDecision> {
    let logits = forward(net, row)?;
    let mut best = 0;
    for (j, &v) in logits.iter().enumerate() {
        if v > logits[best] {
            best = j;
        }
    }
    Ok(if best == logits.len() - 1 { TriageDecision::Defer } else { TriageDecision::Class(best) })
}

/// Verdicts of a defer-augmented network over arbitrary feature rows.
pub fn decide_defer_net(net: &NetworkParams, rows: &[Vec<f64>]) -> Result<Vec<TriageDecision>> {
    rows.iter().map(|row| decide_row(net, row)).collect()
}

pub fn decide_ldu(defer_net: &NetworkParams, features: &DeferFeatures) -> Result<Vec<TriageDecision>> {
    decide_defer_net(defer_net, &features.rows)
}

/// Trains the LD baseline: the diagnostic architecture with a C+1-output
/// head on raw features, from fresh initialization.
pub fn train_ld(
    train_set: &LabeledDataset,
    alpha: f64,
    hidden: &[usize],
    config: &TrainConfig,
) -> Result<NetworkParams> {
    let specs = mlp_specs(train_set.dim(), hidden, CLASS_COUNT + 1);
    let mut config = *config;
    config.loss = Loss::Defer { alpha };
    train(&train_set.features, &train_set.labels, &specs, &config)
}

pub fn decide_ld(net: &NetworkParams, data: &LabeledDataset) -> Result<Vec<TriageDecision>> {
    decide_defer_net(net, &data.features)
}

/// Entropy of one prediction row under the configured measure.
pub fn row_entropy(row: &[f64], measure: EntropyMeasure) -> Result<f64> {
    match measure {
        EntropyMeasure::Diagnostic => diagnostic_entropy(&vote_fractions(row, CLASS_COUNT)?),
        EntropyMeasure::Ensemble => ensemble_entropy(row),
    }
}

/// Direct triage: defer iff the row entropy strictly exceeds the threshold,
/// otherwise return the ensemble majority-vote class (tie to class 0).
pub fn decide_dt(matrix: &PredictionMatrix, config: &DtConfig) -> Result<Vec<TriageDecision>> {
    config.validate()?;
    matrix
        .probs
        .iter()
        .map(|row| {
            let u = row_entropy(row, config.measure)?;
            if u > config.threshold {
                return Ok(TriageDecision::Defer);
            }
            let fractions = vote_fractions(row, CLASS_COUNT)?;
            Ok(TriageDecision::Class(if fractions[1] > 0.5 { 1 } else { 0 }))
        })
        .collect()
}

/// Decisions as the `id,verdict` CSV named in the module contract.
pub fn decisions_to_csv(ids: &[u64], decisions: &[TriageDecision]) -> String {
    let mut out = String::from("id,verdict\n");
    for (id, d) in ids.iter().zip(decisions) {
        out.push_str(&format!("{id},{d}\n"));
    }
    out
}
