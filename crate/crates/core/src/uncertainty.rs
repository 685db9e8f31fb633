//! Stage-one uncertainty features: the ensemble entropy over member
//! probabilities, the diagnostic entropy over class-vote fractions, and the
//! K+2 feature rows consumed by the stage-two defer network.

use crate::error::{LduError, Result};
use crate::numerics::xlogx;

/// Number of classes. Every task in this crate is binary.
pub const CLASS_COUNT: usize = 2;

/// N×K matrix of per-member positive-class probabilities, with sample ids
/// and optional ground-truth labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionMatrix {
    pub ids: Vec<u64>,
    /// Row i, column k: probability of a positive diagnosis from member k.
    pub probs: Vec<Vec<f64>>,
    pub labels: Option<Vec<usize>>,
}

impl PredictionMatrix {
    pub fn new(ids: Vec<u64>, probs: Vec<Vec<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        let n = probs.len();
        if n == 0 {
            return Err(LduError::invalid("prediction matrix: no rows"));
        }
        let k = probs[0].len();
        if k == 0 {
            return Err(LduError::invalid("prediction matrix: no members"));
        }
        if ids.len() != n {
            return Err(LduError::invalid("prediction matrix: ids length mismatch"));
        }
        for (i, row) in probs.iter().enumerate() {
            if row.len() != k {
                return Err(LduError::invalid(format!("prediction matrix: row {i} has ragged width")));
            }
            for &p in row {
                if !(0.0..=1.0).contains(&p) {
                    return Err(LduError::invalid(format!(
                        "prediction matrix: probability {p} outside [0,1] in row {i}"
                    )));
                }
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(LduError::invalid("prediction matrix: labels length mismatch"));
            }
            if let Some(&bad) = labels.iter().find(|&&l| l >= CLASS_COUNT) {
                return Err(LduError::invalid(format!("prediction matrix: label {bad} out of range")));
            }
        }
        Ok(PredictionMatrix { ids, probs, labels })
    }

    pub fn sample_count(&self) -> usize {
        self.probs.len()
    }

    pub fn member_count(&self) -> usize {
        self.probs[0].len()
    }
}

/// N×(K+2) feature rows: the K member probabilities followed by the ensemble
/// entropy u_e and the diagnostic entropy u_d.
#[derive(Clone, Debug, PartialEq)]
pub struct DeferFeatures {
    pub ids: Vec<u64>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<usize>>,
    pub member_count: usize,
}

/// Ensemble entropy u_e = −Σ_k P_k log P_k over the raw member
/// probabilities. The members do not form a distribution, so this is a
/// feature rather than a calibrated entropy; it is implemented verbatim.
pub fn ensemble_entropy(row: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &p in row {
        sum += xlogx(p)?;
    }
    Ok(-sum)
}

/// Fraction of members voting each class. A member votes class 1 iff its
/// positive-class probability is strictly above 0.5; a tie at exactly 0.5
/// votes class 0.
pub fn vote_fractions(row: &[f64], class_count: usize) -> Result<Vec<f64>> {
    if class_count != CLASS_COUNT {
        return Err(LduError::invalid("vote_fractions: only binary tasks supported"));
    }
    if row.is_empty() {
        return Err(LduError::invalid("vote_fractions: empty row"));
    }
    for &p in row {
        if !(0.0..=1.0).contains(&p) {
            return Err(LduError::invalid(format!("vote_fractions: probability {p} outside [0,1]")));
        }
    }
    let k = row.len();
    let positive = row.iter().filter(|&&p| p > 0.5).count();
    Ok(vec![(k - positive) as f64 / k as f64, positive as f64 / k as f64])
}

/// Diagnostic entropy u_d = −Σ_c P_c log P_c over the vote fractions.
/// Zero iff the votes are unanimous; at most ln C.
pub fn diagnostic_entropy(fractions: &[f64]) -> Result<f64> {
    let sum: f64 = fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(LduError::invalid(format!(
            "diagnostic_entropy: fractions sum to {sum}, expected 1"
        )));
    }
    let mut acc = 0.0;
    for &f in fractions {
        acc += xlogx(f)?;
    }
    Ok(-acc)
}

/// Assembles the stage-two input rows, preserving raw member order.
pub fn build_defer_features(matrix: &PredictionMatrix) -> Result<DeferFeatures> {
    build_defer_features_with(matrix, false)
}

/// As [`build_defer_features`], optionally sorting each row's probabilities
/// ascending for permutation invariance (off by default).
pub fn build_defer_features_with(matrix: &PredictionMatrix, sort_probs: bool) -> Result<DeferFeatures> {
    let k = matrix.member_count();
    let mut rows = Vec::with_capacity(matrix.sample_count());
    for probs in &matrix.probs {
        let u_e = ensemble_entropy(probs)?;
        let u_d = diagnostic_entropy(&vote_fractions(probs, CLASS_COUNT)?)?;
        let mut row = probs.clone();
        if sort_probs {
            row.sort_by(|a, b| a.partial_cmp(b).expect("probabilities are finite"));
        }
        row.push(u_e);
        row.push(u_d);
        rows.push(row);
    }
    Ok(DeferFeatures {
        ids: matrix.ids.clone(),
        rows,
        labels: matrix.labels.clone(),
        member_count: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    const LN2: f64 = std::f64::consts::LN_2;

    fn matrix(probs: Vec<Vec<f64>>) -> PredictionMatrix {
        let ids = (0..probs.len() as u64).collect();
        PredictionMatrix::new(ids, probs, None).unwrap()
    }

    #[test]
    fn ensemble_entropy_examples() {
        assert_eq!(ensemble_entropy(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(ensemble_entropy(&[0.0, 1.0]).unwrap(), 0.0);
        assert!((ensemble_entropy(&[0.5, 0.5]).unwrap() - LN2).abs() < 1e-12);
    }

    #[test]
    fn ensemble_entropy_rejects_out_of_range() {
        assert!(ensemble_entropy(&[0.5, 1.2]).is_err());
        assert!(ensemble_entropy(&[-0.1]).is_err());
    }

    #[test]
    fn ensemble_entropy_permutation_invariant() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..100 {
            let mut row: Vec<f64> = (0..6).map(|_| rng.next_f64()).collect();
            let a = ensemble_entropy(&row).unwrap();
            row.reverse();
            row.swap(1, 3);
            let b = ensemble_entropy(&row).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn vote_fraction_examples() {
        assert_eq!(vote_fractions(&[0.9, 0.8, 0.3, 0.6], 2).unwrap(), vec![0.25, 0.75]);
        // tie at exactly 0.5 votes class 0
        assert_eq!(vote_fractions(&[0.5, 0.5], 2).unwrap(), vec![1.0, 0.0]);
        assert_eq!(vote_fractions(&[0.1, 0.2], 2).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn vote_fractions_exact_rationals() {
        let mut rng = SplitMix64::new(21);
        for _ in 0..100 {
            let k = 1 + rng.next_below(9) as usize;
            let row: Vec<f64> = (0..k).map(|_| rng.next_f64()).collect();
            let fr = vote_fractions(&row, 2).unwrap();
            assert_eq!(fr[0] + fr[1], 1.0);
            let m = (fr[1] * k as f64).round();
            assert_eq!(fr[1], m / k as f64);
        }
    }

    #[test]
    fn vote_fractions_errors() {
        assert!(vote_fractions(&[], 2).is_err());
        assert!(vote_fractions(&[0.5], 3).is_err());
    }

    #[test]
    fn diagnostic_entropy_examples() {
        assert_eq!(diagnostic_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((diagnostic_entropy(&[0.5, 0.5]).unwrap() - LN2).abs() < 1e-12);
        let expected = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((diagnostic_entropy(&[0.75, 0.25]).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.562336).abs() < 1e-6);
    }

    #[test]
    fn diagnostic_entropy_rejects_non_distribution() {
        assert!(diagnostic_entropy(&[0.5, 0.4]).is_err());
    }

    #[test]
    fn diagnostic_entropy_permutation_invariant() {
        let a = diagnostic_entropy(&[0.3, 0.7]).unwrap();
        let b = diagnostic_entropy(&[0.7, 0.3]).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn unanimous_votes_give_zero_entropy_regardless_of_magnitude() {
        // confidently-wrong regime: all members agree, entropy must be 0
        for row in [vec![0.51, 0.99, 0.6], vec![0.9; 7], vec![0.02, 0.4, 0.49]] {
            let fr = vote_fractions(&row, 2).unwrap();
            assert_eq!(diagnostic_entropy(&fr).unwrap(), 0.0);
        }
    }

    #[test]
    fn exhaustive_vote_pattern_oracle() {
        // For every binary vote pattern up to K = 10, the composed value must
        // match a direct evaluation of the vote-count entropy.
        for k in 1..=10usize {
            for pattern in 0..(1u32 << k) {
                let row: Vec<f64> =
                    (0..k).map(|b| if pattern >> b & 1 == 1 { 0.9 } else { 0.1 }).collect();
                let got = diagnostic_entropy(&vote_fractions(&row, 2).unwrap()).unwrap();
                let m = pattern.count_ones() as f64;
                let frac = [(k as f64 - m) / k as f64, m / k as f64];
                let expected: f64 = -frac
                    .iter()
                    .map(|&f| if f == 0.0 { 0.0 } else { f * f.ln() })
                    .sum::<f64>();
                assert!((got - expected).abs() < 1e-12, "k={k} pattern={pattern:b}");
            }
        }
    }

    #[test]
    fn defer_feature_rows() {
        let m = matrix(vec![vec![0.5, 0.5]]);
        let f = build_defer_features(&m).unwrap();
        assert_eq!(f.rows.len(), 1);
        let row = &f.rows[0];
        assert_eq!(&row[..2], &[0.5, 0.5]);
        assert!((row[2] - LN2).abs() < 1e-12);
        // both members tie at exactly 0.5, so both vote class 0: u_d = 0
        assert_eq!(row[3], 0.0);

        let m = matrix(vec![vec![1.0, 1.0, 1.0]]);
        let f = build_defer_features(&m).unwrap();
        assert_eq!(f.rows[0], vec![1.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn defer_feature_shape_and_order() {
        let mut rng = SplitMix64::new(8);
        let probs: Vec<Vec<f64>> = (0..12).map(|_| (0..5).map(|_| rng.next_f64()).collect()).collect();
        let m = matrix(probs.clone());
        let f = build_defer_features(&m).unwrap();
        assert_eq!(f.rows.len(), 12);
        for (src, row) in probs.iter().zip(&f.rows) {
            assert_eq!(row.len(), 7);
            assert_eq!(&row[..5], src.as_slice());
            assert!(row[5] >= 0.0);
            assert!(row[6] >= 0.0 && row[6] <= LN2 + 1e-15);
        }
    }

    #[test]
    fn sorted_feature_option() {
        let m = matrix(vec![vec![0.9, 0.1, 0.4]]);
        let f = build_defer_features_with(&m, true).unwrap();
        assert_eq!(&f.rows[0][..3], &[0.1, 0.4, 0.9]);
    }

    #[test]
    fn matrix_validation() {
        assert!(PredictionMatrix::new(vec![0], vec![vec![1.5]], None).is_err());
        assert!(PredictionMatrix::new(vec![0], vec![], None).is_err());
        assert!(PredictionMatrix::new(vec![0, 1], vec![vec![0.5], vec![0.5, 0.5]], None).is_err());
        assert!(PredictionMatrix::new(vec![0], vec![vec![0.5]], Some(vec![2])).is_err());
    }
}
