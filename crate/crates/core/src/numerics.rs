//! Numerically stable scalar and vector primitives shared by every module.
//! All computation is f64; entropies are in nats.

use crate::error::{LduError, Result};

/// A probability vector. When produced by [`softmax`] the entries are
/// positive and sum to 1 within 1e-12.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector {
    values: Vec<f64>,
}

impl ProbVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Stable softmax: subtracts the maximum logit before exponentiation so
/// large logits cannot overflow.
pub fn softmax(logits: &[f64]) -> Result<ProbVector> {
    if logits.is_empty() {
        return Err(LduError::invalid("softmax: empty logits"));
    }
    if logits.iter().any(|x| !x.is_finite()) {
        return Err(LduError::invalid("softmax: non-finite logit"));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(ProbVector {
        values: exps.iter().map(|&e| e / sum).collect(),
    })
}

/// log(Σ exp(x_j)) computed without overflow.
pub fn log_sum_exp(logits: &[f64]) -> Result<f64> {
    if logits.is_empty() {
        return Err(LduError::invalid("log_sum_exp: empty input"));
    }
    if logits.iter().any(|x| !x.is_finite()) {
        return Err(LduError::invalid("log_sum_exp: non-finite input"));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|&x| (x - max).exp()).sum();
    Ok(max + sum.ln())
}

/// p·ln(p) with the 0·log 0 := 0 convention. Exactly 0 at p = 0 and p = 1.
pub fn xlogx(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LduError::invalid(format!("xlogx: p = {p} outside [0,1]")));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(p * p.ln())
}
