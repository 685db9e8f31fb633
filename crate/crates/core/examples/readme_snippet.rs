use ldu_triage::{data_io, ensemble, metrics, neural_net};

fn main() -> ldu_triage::Result<()> {
    let data = data_io::gen_synthetic(&data_io::SyntheticConfig::default())?;
    let (train, test) = data_io::split_dataset(&data, 0.7, 1)?;

    let spec = ensemble::EnsembleSpec {
        member_count: 10,
        architecture: neural_net::mlp_specs(8, &[16], 2),
        train_config: neural_net::TrainConfig {
            epochs: 10,
            learning_rate: 5e-3,
            batch_size: 32,
            optimizer: neural_net::Optimizer::Adam,
            weight_decay: 1e-4,
            seed: 100,
            loss: neural_net::Loss::CrossEntropy,
        },
        base_seed: 100,
    };
    let members = ensemble::train_ensemble(&train, &spec)?;
    let matrix = ensemble::predict_matrix(&members, &test)?;
    let baseline = metrics::majority_baseline(&matrix)?;
    println!("{:?}", baseline.f1);
    Ok(())
}
