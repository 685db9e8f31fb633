//! The defer loss: cross-entropy with the target class plus an α-weighted
//! cross-entropy with the distinguished defer class, over C+1 softmax
//! outputs. Both the value and its analytic gradient are provided; both are
//! exercised against finite differences in tests.

use crate::error::{LduError, Result};
use crate::numerics::{log_sum_exp, softmax};

#[derive(Clone, Copy, Debug)]
pub struct DeferLossParams {
    /// Weight of the defer term; 0 reduces to plain cross-entropy over C+1 outputs.
    pub alpha: f64,
    pub class_count: usize,
}

impl DeferLossParams {
    pub fn new(alpha: f64, class_count: usize) -> Result<Self> {
        if alpha < 0.0 || !alpha.is_finite() {
            return Err(LduError::invalid(format!("defer loss: alpha {alpha} must be >= 0")));
        }
        if class_count < 2 {
            return Err(LduError::invalid("defer loss: class_count must be >= 2"));
        }
        Ok(DeferLossParams { alpha, class_count })
    }

    /// The defer class is always the last output.
    pub fn defer_index(&self) -> usize {
        self.class_count
    }
}

fn check_inputs(logits: &[f64], target: usize, params: &DeferLossParams) -> Result<()> {
    if logits.len() != params.class_count + 1 {
        return Err(LduError::invalid(format!(
            "defer loss: expected {} logits, got {}",
            params.class_count + 1,
            logits.len()
        )));
    }
    if logits.iter().any(|x| !x.is_finite()) {
        return Err(LduError::invalid("defer loss: non-finite logit"));
    }
    if target >= params.class_count {
        return Err(LduError::invalid(format!(
            "defer loss: target {target} is not a ground-truth class"
        )));
    }
    Ok(())
}

/// −log p_target − α·log p_defer, evaluated in the stable log-sum-exp form
/// −x[target] − α·x[defer] + (1+α)·lse(x).
pub fn defer_loss_value(logits: &[f64], target: usize, params: &DeferLossParams) -> Result<f64> {
    check_inputs(logits, target, params)?;
    let lse = log_sum_exp(logits)?;
    Ok(-logits[target] - params.alpha * logits[params.defer_index()] + (1.0 + params.alpha) * lse)
}

/// Analytic gradient: (1+α)·softmax(x)_j − [j = target] − α·[j = defer].
/// Components sum to zero.
pub fn defer_loss_grad(logits: &[f64], target: usize, params: &DeferLossParams) -> Result<Vec<f64>> {
    check_inputs(logits, target, params)?;
    let probs = softmax(logits)?;
    let mut grad: Vec<f64> = probs.values().iter().map(|&p| (1.0 + params.alpha) * p).collect();
    grad[target] -= 1.0;
    grad[params.defer_index()] -= params.alpha;
    Ok(grad)
}
