//! Stage one: a deep ensemble of independently seeded diagnostic networks
//! trained on the same data (no bootstrapping), and the N×K matrix of their
//! positive-class probabilities. Members train in parallel; member k always
//! uses seed base_seed + k, so the result is independent of scheduling.

use std::path::Path;

use crate::data_io::LabeledDataset;
use crate::error::{LduError, Result};
use crate::neural_net::{forward, load_params, save_params, train, LayerSpec, NetworkParams, TrainConfig};
use crate::numerics::softmax;
use crate::par;
use crate::uncertainty::PredictionMatrix;

#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub member_count: usize,
    pub architecture: Vec<LayerSpec>,
    pub train_config: TrainConfig,
    pub base_seed: u64,
}

impl EnsembleSpec {
    fn validate(&self) -> Result<()> {
        if self.member_count == 0 {
            return Err(LduError::invalid("ensemble: member_count must be >= 1"));
        }
        Ok(())
    }
}

/// Trains K members; member k trains with seed base_seed + k on the full
/// training set.
pub fn train_ensemble(train_set: &LabeledDataset, spec: &EnsembleSpec) -> Result<Vec<NetworkParams>> {
    spec.validate()?;
    let results = par::map_indexed(spec.member_count, |k| {
        let mut config = spec.train_config;
        config.seed = spec.base_seed.wrapping_add(k as u64);
        train(&train_set.features, &train_set.labels, &spec.architecture, &config)
            .map_err(|e| match e {
                LduError::TrainingDiverged { step, detail } => LduError::TrainingDiverged {
                    step,
                    detail: format!("ensemble member {k}: {detail}"),
                },
                other => other,
            })
    });
    results.into_iter().collect()
}

/// Collects entry (i, k) = softmax(forward(member_k, x_i))[class 1].
pub fn predict_matrix(members: &[NetworkParams], data: &LabeledDataset) -> Result<PredictionMatrix> {
    if members.is_empty() {
        return Err(LduError::invalid("predict_matrix: no ensemble members"));
    }
    let input_dim = members[0].input_dim();
    for m in members {
        if m.input_dim() != input_dim || m.output_dim() != 2 {
            return Err(LduError::invalid("predict_matrix: members must share input dim and have 2 outputs"));
        }
    }
    let rows: Vec<Result<Vec<f64>>> = par::map_indexed(data.features.len(), |i| {
        members
            .iter()
            .map(|m| {
                let logits = forward(m, &data.features[i])?;
                Ok(softmax(&logits)?[1])
            })
            .collect()
    });
    let probs = rows.into_iter().collect::<Result<Vec<_>>>()?;
    PredictionMatrix::new(data.ids.clone(), probs, Some(data.labels.clone()))
}

/// Saves an ensemble as a directory: `manifest.txt` holding `K base_seed`
/// plus one parameter file per member.
pub fn save_ensemble(members: &[NetworkParams], base_seed: u64, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| LduError::io(dir.display().to_string(), e))?;
    let manifest = format!("{} {}\n", members.len(), base_seed);
    crate::data_io::write_atomic(&dir.join("manifest.txt"), manifest.as_bytes())?;
    for (k, member) in members.iter().enumerate() {
        save_params(member, &dir.join(format!("member_{k:03}.txt")))?;
    }
    Ok(())
}

/// Loads an ensemble directory written by [`save_ensemble`]. Returns the
/// members and the recorded base seed.
pub fn load_ensemble(dir: &Path, architecture: &[LayerSpec]) -> Result<(Vec<NetworkParams>, u64)> {
    let manifest_path = dir.join("manifest.txt");
    let manifest = std::fs::read_to_string(&manifest_path)
        .map_err(|e| LduError::io(manifest_path.display().to_string(), e))?;
    let mut fields = manifest.split_whitespace();
    let count: usize = fields
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| LduError::Parse { line: 1, detail: "manifest: bad member count".into() })?;
    let base_seed: u64 = fields
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| LduError::Parse { line: 1, detail: "manifest: bad base seed".into() })?;
    let mut members = Vec::with_capacity(count);
    for k in 0..count {
        members.push(load_params(&dir.join(format!("member_{k:03}.txt")), architecture)?);
    }
    Ok((members, base_seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural_net::{mlp_specs, Loss, Optimizer};
    use crate::rng::SplitMix64;

    fn toy_dataset(n: usize, seed: u64) -> LabeledDataset {
        let mut rng = SplitMix64::new(seed);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let y = i % 2;
            let c = if y == 1 { 1.5 } else { -1.5 };
            features.push(vec![c + rng.normal(), c + rng.normal()]);
            labels.push(y);
        }
        LabeledDataset::new((0..n as u64).collect(), features, labels).unwrap()
    }

    fn toy_spec(k: usize) -> EnsembleSpec {
        EnsembleSpec {
            member_count: k,
            architecture: mlp_specs(2, &[4], 2),
            train_config: TrainConfig {
                epochs: 5,
                learning_rate: 1e-2,
                batch_size: 16,
                optimizer: Optimizer::Adam,
                weight_decay: 0.0,
                seed: 0,
                loss: Loss::CrossEntropy,
            },
            base_seed: 100,
        }
    }

    #[test]
    fn single_member_matches_direct_train() {
        let data = toy_dataset(40, 1);
        let spec = toy_spec(1);
        let members = train_ensemble(&data, &spec).unwrap();
        let mut config = spec.train_config;
        config.seed = spec.base_seed;
        let direct = train(&data.features, &data.labels, &spec.architecture, &config).unwrap();
        assert_eq!(members[0], direct);
    }

    #[test]
    fn deterministic_and_members_differ() {
        let data = toy_dataset(40, 2);
        let spec = toy_spec(3);
        let a = train_ensemble(&data, &spec).unwrap();
        let b = train_ensemble(&data, &spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
        assert_ne!(a[1], a[2]);
    }

    #[test]
    fn matrix_shape_and_column_consistency() {
        let data = toy_dataset(30, 3);
        let spec = toy_spec(4);
        let members = train_ensemble(&data, &spec).unwrap();
        let matrix = predict_matrix(&members, &data).unwrap();
        assert_eq!(matrix.sample_count(), 30);
        assert_eq!(matrix.member_count(), 4);
        for (i, row) in matrix.probs.iter().enumerate() {
            for (k, &p) in row.iter().enumerate() {
                assert!((0.0..=1.0).contains(&p));
                let logits = forward(&members[k], &data.features[i]).unwrap();
                let single = softmax(&logits).unwrap()[1];
                assert_eq!(p, single);
            }
        }
    }

    #[test]
    fn zero_param_member_predicts_half() {
        let data = toy_dataset(5, 4);
        let specs = mlp_specs(2, &[], 2);
        let mut member = crate::neural_net::init_params(&specs, 0).unwrap();
        member.layers[0].weights.iter_mut().for_each(|w| *w = 0.0);
        let matrix = predict_matrix(&[member], &data).unwrap();
        for row in &matrix.probs {
            assert!((row[0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn save_load_round_trip() {
        let data = toy_dataset(20, 5);
        let spec = toy_spec(2);
        let members = train_ensemble(&data, &spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_ensemble(&members, spec.base_seed, dir.path()).unwrap();
        let (loaded, base_seed) = load_ensemble(dir.path(), &spec.architecture).unwrap();
        assert_eq!(loaded, members);
        assert_eq!(base_seed, 100);
    }

    #[test]
    fn rejects_empty_spec() {
        let data = toy_dataset(10, 6);
        let mut spec = toy_spec(1);
        spec.member_count = 0;
        assert!(train_ensemble(&data, &spec).is_err());
    }
}
