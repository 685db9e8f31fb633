//! `triage`: command-line driver for the deferral pipeline. Stages write
//! CSVs (and SVG charts) into the paths given by flags, with defaults that
//! chain into a full gen-data → split → train-ensemble → featurize →
//! sweep-* → report run. A flat `key = value` config file can supply any
//! flag's value; explicit flags win, and TRIAGE_SEED overrides the seed.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use ldu_triage::data_io::{
    self, gen_synthetic, split_dataset, write_curve_csv, write_dataset_csv, write_features_csv,
    write_preds_csv, SyntheticConfig,
};
use ldu_triage::ensemble::{load_ensemble, predict_matrix, save_ensemble, train_ensemble, EnsembleSpec};
use ldu_triage::error::{LduError, Result};
use ldu_triage::metrics::{majority_baseline, sweep_alpha, sweep_threshold, SweepStrategy};
use ldu_triage::neural_net::{mlp_specs, Loss, Optimizer, TrainConfig};
use ldu_triage::report::render_curve_svg;
use ldu_triage::triage::EntropyMeasure;
use ldu_triage::uncertainty::build_defer_features;

#[derive(Parser)]
#[command(name = "triage", about = "Selective prediction: learning to defer with ensemble uncertainty")]
struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic diagnostic dataset.
    GenData(GenDataArgs),
    /// Split a dataset into train/test partitions.
    Split(SplitArgs),
    /// Train the stage-one diagnostic ensemble.
    TrainEnsemble(TrainEnsembleArgs),
    /// Compute ensemble predictions and the K+2 defer features for a dataset.
    Featurize(FeaturizeArgs),
    /// Sweep the defer-loss weight for the LDU strategy.
    SweepLdu(SweepLduArgs),
    /// Sweep the defer-loss weight for the LD baseline.
    SweepLd(SweepLdArgs),
    /// Sweep the entropy threshold for the DT baseline.
    SweepDt(SweepDtArgs),
    /// Render a curve CSV as an SVG chart.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    confound_fraction: Option<f64>,
    #[arg(long)]
    flip_prob: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    train_out: Option<PathBuf>,
    #[arg(long)]
    test_out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgsCommon {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// `sgd` or `adam`.
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    weight_decay: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainEnsembleArgs {
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    members: Option<usize>,
    /// Comma-separated hidden layer widths of each member.
    #[arg(long)]
    hidden: Option<String>,
    #[command(flatten)]
    train_flags: TrainArgsCommon,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturizeArgs {
    #[arg(long)]
    ensemble: Option<PathBuf>,
    /// Hidden widths of the ensemble members (to reconstruct layer shapes).
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    preds_out: Option<PathBuf>,
    #[arg(long)]
    features_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepLduArgs {
    #[arg(long)]
    train_preds: Option<PathBuf>,
    #[arg(long)]
    test_preds: Option<PathBuf>,
    /// Comma-separated defer-loss weights.
    #[arg(long)]
    alphas: Option<String>,
    #[command(flatten)]
    train_flags: TrainArgsCommon,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepLdArgs {
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    alphas: Option<String>,
    /// Comma-separated hidden widths of the LD network.
    #[arg(long)]
    hidden: Option<String>,
    #[command(flatten)]
    train_flags: TrainArgsCommon,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepDtArgs {
    #[arg(long)]
    preds: Option<PathBuf>,
    /// Comma-separated entropy thresholds.
    #[arg(long)]
    taus: Option<String>,
    /// `diagnostic` or `ensemble`.
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    title: Option<String>,
    /// Draws the dotted no-defer baseline F1 reference line.
    #[arg(long)]
    baseline_f1: Option<f64>,
}

/// Values from the config file, consulted when a flag is absent.
struct Cfg {
    map: HashMap<String, String>,
}

impl Cfg {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| LduError::io(path.display().to_string(), e))?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| LduError::Parse {
                    line: i + 1,
                    detail: format!("config: expected `key = value`, got `{raw}`"),
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Cfg { map })
    }

    fn get<T: FromStr + Clone>(&self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.map.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|_| LduError::invalid(format!("config: bad value `{raw}` for key `{key}`"))),
            None => Ok(default),
        }
    }

    fn seed(&self, flag: Option<u64>, default: u64) -> Result<u64> {
        if let Ok(env) = std::env::var("TRIAGE_SEED") {
            return env
                .parse()
                .map_err(|_| LduError::invalid(format!("TRIAGE_SEED: bad value `{env}`")));
        }
        self.get("seed", flag, default)
    }
}

fn parse_list<T: FromStr>(raw: &str, what: &str) -> Result<Vec<T>> {
    let values: std::result::Result<Vec<T>, _> =
        raw.split(',').map(|s| s.trim().parse::<T>()).collect();
    values.map_err(|_| LduError::invalid(format!("bad {what} list `{raw}`")))
}

fn parse_optimizer(raw: &str) -> Result<Optimizer> {
    match raw {
        "sgd" => Ok(Optimizer::Sgd),
        "adam" => Ok(Optimizer::Adam),
        other => Err(LduError::invalid(format!("unknown optimizer `{other}` (expected sgd|adam)"))),
    }
}

fn parse_measure(raw: &str) -> Result<EntropyMeasure> {
    match raw {
        "diagnostic" => Ok(EntropyMeasure::Diagnostic),
        "ensemble" => Ok(EntropyMeasure::Ensemble),
        other => Err(LduError::invalid(format!(
            "unknown measure `{other}` (expected diagnostic|ensemble)"
        ))),
    }
}

fn train_config(cfg: &Cfg, flags: &TrainArgsCommon, prefix: &str, defaults: TrainConfig) -> Result<TrainConfig> {
    let key = |name: &str| format!("{prefix}_{name}");
    Ok(TrainConfig {
        epochs: cfg.get(&key("epochs"), flags.epochs, defaults.epochs)?,
        learning_rate: cfg.get(&key("lr"), flags.lr, defaults.learning_rate)?,
        batch_size: cfg.get(&key("batch_size"), flags.batch_size, defaults.batch_size)?,
        optimizer: parse_optimizer(&cfg.get(
            &key("optimizer"),
            flags.optimizer.clone(),
            match defaults.optimizer {
                Optimizer::Sgd => "sgd".to_string(),
                Optimizer::Adam => "adam".to_string(),
            },
        )?)?,
        weight_decay: cfg.get(&key("weight_decay"), flags.weight_decay, defaults.weight_decay)?,
        seed: cfg.seed(flags.seed, defaults.seed)?,
        loss: defaults.loss,
    })
}

fn summarize(path: &Path, detail: &str) {
    println!("wrote {} ({detail})", path.display());
}

fn run(cli: Cli) -> Result<()> {
    let cfg = Cfg::load(cli.config.as_deref())?;
    match cli.command {
        Command::GenData(args) => {
            let config = SyntheticConfig {
                n: cfg.get("n", args.n, 4000)?,
                d: cfg.get("d", args.d, 8)?,
                mu: cfg.get("mu", args.mu, 1.0)?,
                confound_fraction: cfg.get("confound_fraction", args.confound_fraction, 0.1)?,
                flip_prob: cfg.get("flip_prob", args.flip_prob, 0.8)?,
                seed: cfg.seed(args.seed, 1)?,
            };
            let out = cfg.get("dataset", args.out, PathBuf::from("dataset.csv"))?;
            let ds = gen_synthetic(&config)?;
            write_dataset_csv(&ds, &out)?;
            summarize(&out, &format!("{} rows, {} features", ds.len(), ds.dim()));
        }
        Command::Split(args) => {
            let input = cfg.get("dataset", args.input, PathBuf::from("dataset.csv"))?;
            let ratio = cfg.get("ratio", args.ratio, 0.7)?;
            let seed = cfg.seed(args.seed, 1)?;
            let train_out = cfg.get("train_set", args.train_out, PathBuf::from("train.csv"))?;
            let test_out = cfg.get("test_set", args.test_out, PathBuf::from("test.csv"))?;
            let ds = data_io::read_dataset_csv(&input)?;
            let (train, test) = split_dataset(&ds, ratio, seed)?;
            write_dataset_csv(&train, &train_out)?;
            summarize(&train_out, &format!("{} rows", train.len()));
            write_dataset_csv(&test, &test_out)?;
            summarize(&test_out, &format!("{} rows", test.len()));
        }
        Command::TrainEnsemble(args) => {
            let train_path = cfg.get("train_set", args.train, PathBuf::from("train.csv"))?;
            let members = cfg.get("members", args.members, 10)?;
            let hidden: Vec<usize> =
                parse_list(&cfg.get("member_hidden", args.hidden, "16".to_string())?, "hidden")?;
            let out_dir = cfg.get("ensemble_dir", args.out_dir, PathBuf::from("ensemble"))?;
            let defaults = TrainConfig {
                epochs: 10,
                learning_rate: 5e-3,
                batch_size: 32,
                optimizer: Optimizer::Adam,
                weight_decay: 1e-4,
                seed: 100,
                loss: Loss::CrossEntropy,
            };
            let config = train_config(&cfg, &args.train_flags, "member", defaults)?;
            let data = data_io::read_dataset_csv(&train_path)?;
            let spec = EnsembleSpec {
                member_count: members,
                architecture: mlp_specs(data.dim(), &hidden, 2),
                train_config: config,
                base_seed: config.seed,
            };
            let trained = train_ensemble(&data, &spec)?;
            save_ensemble(&trained, spec.base_seed, &out_dir)?;
            summarize(&out_dir, &format!("{members} members"));
        }
        Command::Featurize(args) => {
            let ensemble_dir = cfg.get("ensemble_dir", args.ensemble, PathBuf::from("ensemble"))?;
            let hidden: Vec<usize> =
                parse_list(&cfg.get("member_hidden", args.hidden, "16".to_string())?, "hidden")?;
            let data_path = cfg.get("data", args.data, PathBuf::from("test.csv"))?;
            let preds_out = cfg.get("preds", args.preds_out, PathBuf::from("preds.csv"))?;
            let features_out = cfg.get("features", args.features_out, PathBuf::from("features.csv"))?;
            let data = data_io::read_dataset_csv(&data_path)?;
            let specs = mlp_specs(data.dim(), &hidden, 2);
            let (members, _) = load_ensemble(&ensemble_dir, &specs)?;
            let matrix = predict_matrix(&members, &data)?;
            write_preds_csv(&matrix, &preds_out)?;
            summarize(&preds_out, &format!("{}x{}", matrix.sample_count(), matrix.member_count()));
            let features = build_defer_features(&matrix)?;
            write_features_csv(&features, &features_out)?;
            summarize(
                &features_out,
                &format!("{}x{}", features.rows.len(), features.member_count + 2),
            );
        }
        Command::SweepLdu(args) => {
            let train_path = cfg.get("train_preds", args.train_preds, PathBuf::from("preds_train.csv"))?;
            let test_path = cfg.get("test_preds", args.test_preds, PathBuf::from("preds_test.csv"))?;
            let alphas: Vec<f64> = parse_list(
                &cfg.get(
                    "alphas",
                    args.alphas,
                    "0.6,0.7,0.8,0.85,0.9,0.95,1.0,1.05,1.1".to_string(),
                )?,
                "alpha",
            )?;
            let out = cfg.get("ldu_curve", args.out, PathBuf::from("curve_ldu.csv"))?;
            let defaults = TrainConfig {
                epochs: 20,
                learning_rate: 9e-4,
                batch_size: 32,
                optimizer: Optimizer::Adam,
                weight_decay: 0.0,
                seed: 7,
                loss: Loss::CrossEntropy,
            };
            let config = train_config(&cfg, &args.train_flags, "ldu", defaults)?;
            let train = data_io::read_preds_csv(&train_path)?;
            let test = data_io::read_preds_csv(&test_path)?;
            let outcome = sweep_alpha(&SweepStrategy::Ldu { train: &train, test: &test }, &alphas, &config)?;
            for (alpha, err) in &outcome.failures {
                eprintln!("warning: alpha {alpha}: {err}");
            }
            write_curve_csv(&outcome.rows, &out)?;
            summarize(&out, &format!("{} rows", outcome.rows.len()));
            if let Ok(baseline) = majority_baseline(&test) {
                if let Some(f1) = baseline.f1 {
                    println!("no-defer ensemble-majority F1: {f1:.6}");
                }
            }
        }
        Command::SweepLd(args) => {
            let train_path = cfg.get("train_set", args.train, PathBuf::from("train.csv"))?;
            let test_path = cfg.get("test_set", args.test, PathBuf::from("test.csv"))?;
            let alphas: Vec<f64> = parse_list(
                &cfg.get(
                    "alphas",
                    args.alphas,
                    "0.6,0.7,0.8,0.85,0.9,0.95,1.0,1.05,1.1".to_string(),
                )?,
                "alpha",
            )?;
            let hidden: Vec<usize> =
                parse_list(&cfg.get("ld_hidden", args.hidden, "16".to_string())?, "hidden")?;
            let out = cfg.get("ld_curve", args.out, PathBuf::from("curve_ld.csv"))?;
            let defaults = TrainConfig {
                epochs: 20,
                learning_rate: 5e-3,
                batch_size: 32,
                optimizer: Optimizer::Adam,
                weight_decay: 1e-4,
                seed: 7,
                loss: Loss::CrossEntropy,
            };
            let config = train_config(&cfg, &args.train_flags, "ld", defaults)?;
            let train = data_io::read_dataset_csv(&train_path)?;
            let test = data_io::read_dataset_csv(&test_path)?;
            let outcome = sweep_alpha(
                &SweepStrategy::Ld { train: &train, test: &test, hidden: &hidden },
                &alphas,
                &config,
            )?;
            for (alpha, err) in &outcome.failures {
                eprintln!("warning: alpha {alpha}: {err}");
            }
            write_curve_csv(&outcome.rows, &out)?;
            summarize(&out, &format!("{} rows", outcome.rows.len()));
        }
        Command::SweepDt(args) => {
            let preds_path = cfg.get("test_preds", args.preds, PathBuf::from("preds_test.csv"))?;
            let taus: Vec<f64> = parse_list(
                &cfg.get("taus", args.taus, "0.69,0.6,0.5,0.4,0.3,0.2,0.1,0.0".to_string())?,
                "tau",
            )?;
            let measure = parse_measure(&cfg.get("measure", args.measure, "diagnostic".to_string())?)?;
            let out = cfg.get("dt_curve", args.out, PathBuf::from("curve_dt.csv"))?;
            let matrix = data_io::read_preds_csv(&preds_path)?;
            if measure == EntropyMeasure::Diagnostic {
                let ceiling = matrix
                    .probs
                    .iter()
                    .filter(|row| {
                        let pos = row.iter().filter(|&&p| p > 0.5).count();
                        pos != 0 && pos != row.len()
                    })
                    .count();
                if ceiling == 0 {
                    eprintln!(
                        "warning: every row is vote-unanimous; the DT ceiling is zero and no sample can be deferred"
                    );
                }
            }
            let rows = sweep_threshold(&matrix, &taus, measure)?;
            write_curve_csv(&rows, &out)?;
            summarize(&out, &format!("{} rows", rows.len()));
        }
        Command::Report(args) => {
            let curve = cfg.get("curve", args.curve, PathBuf::from("curve.csv"))?;
            let out = cfg.get("svg", args.out, PathBuf::from("curve.svg"))?;
            let title = cfg.get("title", args.title, curve.display().to_string())?;
            let baseline = match args.baseline_f1 {
                Some(v) => Some(v),
                None => cfg.map.get("baseline_f1").map(|raw| {
                    raw.parse().map_err(|_| {
                        LduError::invalid(format!("config: bad value `{raw}` for key `baseline_f1`"))
                    })
                }).transpose()?,
            };
            let rows = data_io::read_curve_csv(&curve)?;
            let svg = render_curve_svg(&rows, &title, baseline)?;
            data_io::write_atomic(&out, svg.as_bytes())?;
            summarize(&out, &format!("{} curve points", rows.len()));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
