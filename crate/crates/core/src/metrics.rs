//! Confusion-matrix metrics over triage decisions, the two F1 variants, and
//! the sweep drivers that produce one curve row per alpha or threshold.
//!
//! F1, accuracy, sensitivity and specificity are computed on the
//! non-deferred samples; F1-overall is computed over all samples after
//! replacing each deferred verdict with its true label. Undefined metrics
//! (empty denominators) are reported as missing, never as 0.

use crate::data_io::LabeledDataset;
use crate::error::{LduError, Result};
use crate::neural_net::TrainConfig;
use crate::par;
use crate::triage::{
    decide_dt, decide_ld, decide_ldu, train_ld, train_ldu, DtConfig, EntropyMeasure, TriageDecision,
};
use crate::uncertainty::{build_defer_features, PredictionMatrix};

/// One sweep-curve row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsRow {
    /// The swept parameter (alpha or tau).
    pub param: f64,
    pub defer_rate: f64,
    pub f1: Option<f64>,
    pub f1_overall: Option<f64>,
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default)]
struct Confusion {
    tp: usize,
    fp: usize,
    tn: usize,
    fn_: usize,
}

impl Confusion {
    fn add(&mut self, pred: usize, truth: usize) {
        match (pred, truth) {
            (1, 1) => self.tp += 1,
            (1, 0) => self.fp += 1,
            (0, 0) => self.tn += 1,
            _ => self.fn_ += 1,
        }
    }

    fn f1(&self) -> Option<f64> {
        if self.tp == 0 && self.fp == 0 && self.fn_ == 0 {
            return None;
        }
        // F1 := 0 when TP = 0 but FP+FN > 0
        Some(2.0 * self.tp as f64 / (2 * self.tp + self.fp + self.fn_) as f64)
    }
}

/// Computes one metrics row from per-sample decisions and ground truth.
pub fn evaluate(decisions: &[TriageDecision], labels: &[usize], param: f64) -> Result<MetricsRow> {
    if decisions.len() != labels.len() {
        return Err(LduError::invalid("evaluate: decisions/labels length mismatch"));
    }
    if decisions.is_empty() {
        return Err(LduError::invalid("evaluate: empty input"));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(LduError::invalid("evaluate: labels must be 0 or 1"));
    }
    let n = decisions.len();
    let mut kept = Confusion::default();
    let mut overall = Confusion::default();
    let mut deferred = 0usize;
    for (&d, &truth) in decisions.iter().zip(labels) {
        match d {
            TriageDecision::Defer => {
                deferred += 1;
                // deferred samples are assumed correctly resolved by the expert
                overall.add(truth, truth);
            }
            TriageDecision::Class(c) => {
                if c > 1 {
                    return Err(LduError::invalid(format!("evaluate: class verdict {c} out of range")));
                }
                kept.add(c, truth);
                overall.add(c, truth);
            }
        }
    }
    let kept_total = n - deferred;
    let accuracy = (kept_total > 0).then(|| (kept.tp + kept.tn) as f64 / kept_total as f64);
    let sensitivity =
        (kept.tp + kept.fn_ > 0).then(|| kept.tp as f64 / (kept.tp + kept.fn_) as f64);
    let specificity =
        (kept.tn + kept.fp > 0).then(|| kept.tn as f64 / (kept.tn + kept.fp) as f64);
    Ok(MetricsRow {
        param,
        defer_rate: deferred as f64 / n as f64,
        f1: if kept_total == 0 { None } else { kept.f1() },
        f1_overall: overall.f1(),
        accuracy,
        sensitivity,
        specificity,
    })
}

/// Metrics of the plain ensemble majority vote with no deferral, the
/// "diagnostic network F1" reference of the sweep figures.
pub fn majority_baseline(matrix: &PredictionMatrix) -> Result<MetricsRow> {
    let labels = matrix
        .labels
        .as_ref()
        .ok_or_else(|| LduError::invalid("majority_baseline: matrix has no labels"))?;
    // a threshold at the diagnostic maximum defers nothing
    let decisions = decide_dt(
        matrix,
        &DtConfig { threshold: std::f64::consts::LN_2, measure: EntropyMeasure::Diagnostic },
    )?;
    evaluate(&decisions, labels, f64::NAN)
}

/// What an alpha sweep trains and evaluates.
pub enum SweepStrategy<'a> {
    Ldu { train: &'a PredictionMatrix, test: &'a PredictionMatrix },
    Ld { train: &'a LabeledDataset, test: &'a LabeledDataset, hidden: &'a [usize] },
}

/// Result of a sweep: one row per successful grid point (sorted by the
/// swept parameter for alpha sweeps, grid order for threshold sweeps), plus
/// any per-point failures.
pub struct SweepOutcome {
    pub rows: Vec<MetricsRow>,
    pub failures: Vec<(f64, LduError)>,
}

/// Trains one network per alpha (all from the same seed, so alpha is the
/// only varying factor) and evaluates on the test split. Grid points run in
/// parallel; rows come back ordered by alpha ascending.
pub fn sweep_alpha(
    strategy: &SweepStrategy<'_>,
    grid: &[f64],
    config: &TrainConfig,
) -> Result<SweepOutcome> {
    if grid.is_empty() {
        return Err(LduError::invalid("sweep_alpha: empty grid"));
    }
    let mut alphas = grid.to_vec();
    alphas.sort_by(|a, b| a.partial_cmp(b).expect("alphas are finite"));

    // test-side inputs are fixed across grid points
    let test_labels: &[usize] = match strategy {
        SweepStrategy::Ldu { test, .. } => test
            .labels
            .as_ref()
            .ok_or_else(|| LduError::invalid("sweep_alpha: test matrix has no labels"))?,
        SweepStrategy::Ld { test, .. } => &test.labels,
    };
    let test_features = match strategy {
        SweepStrategy::Ldu { test, .. } => Some(build_defer_features(test)?),
        SweepStrategy::Ld { .. } => None,
    };

    let results = par::map_indexed(alphas.len(), |i| {
        let alpha = alphas[i];
        let decisions: Result<Vec<TriageDecision>> = match strategy {
            SweepStrategy::Ldu { train, .. } => {
                let net = train_ldu(train, alpha, config)?;
                decide_ldu(&net, test_features.as_ref().expect("built above"))
            }
            SweepStrategy::Ld { train, test, hidden } => {
                let net = train_ld(train, alpha, hidden, config)?;
                decide_ld(&net, test)
            }
        };
        decisions.and_then(|d| evaluate(&d, test_labels, alpha))
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (alpha, result) in alphas.into_iter().zip(results) {
        match result {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((alpha, e)),
        }
    }
    Ok(SweepOutcome { rows, failures })
}

/// Evaluates direct triage at each threshold. No training; rows follow grid
/// order.
pub fn sweep_threshold(
    matrix: &PredictionMatrix,
    grid: &[f64],
    measure: EntropyMeasure,
) -> Result<Vec<MetricsRow>> {
    if grid.is_empty() {
        return Err(LduError::invalid("sweep_threshold: empty grid"));
    }
    let labels = matrix
        .labels
        .as_ref()
        .ok_or_else(|| LduError::invalid("sweep_threshold: matrix has no labels"))?;
    grid.iter()
        .map(|&tau| {
            let decisions = decide_dt(matrix, &DtConfig { threshold: tau, measure })?;
            evaluate(&decisions, labels, tau)
        })
        .collect()
}
