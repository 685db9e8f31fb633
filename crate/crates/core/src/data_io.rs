//! Synthetic diagnostic-task generation, 70/30 splitting, and CSV
//! persistence for the four file schemas (datasets, prediction matrices,
//! defer features, sweep curves). All writes are atomic (temp + rename) and
//! byte-deterministic; floats print at 9 decimal places.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{LduError, Result};
use crate::metrics::MetricsRow;
use crate::rng::{derive_seed, SplitMix64};
use crate::uncertainty::{DeferFeatures, PredictionMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub ids: Vec<u64>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(ids: Vec<u64>, features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        let n = features.len();
        if n == 0 {
            return Err(LduError::invalid("dataset: empty"));
        }
        if ids.len() != n || labels.len() != n {
            return Err(LduError::invalid("dataset: column length mismatch"));
        }
        let d = features[0].len();
        if features.iter().any(|row| row.len() != d) {
            return Err(LduError::invalid("dataset: ragged feature rows"));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(LduError::invalid("dataset: labels must be 0 or 1"));
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(LduError::invalid("dataset: duplicate ids"));
        }
        Ok(LabeledDataset { ids, features, labels })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }
}

/// Generator for the desk-scale diagnostic task: two Gaussian blobs at
/// ±mu·1, with labels flipped (with probability `flip_prob`) inside the
/// region holding the largest first-feature values. The flipped region is
/// where a trained ensemble votes unanimously for the wrong class.
#[derive(Clone, Copy, Debug)]
pub struct SyntheticConfig {
    pub n: usize,
    pub d: usize,
    pub mu: f64,
    pub confound_fraction: f64,
    pub flip_prob: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig { n: 4000, d: 8, mu: 1.0, confound_fraction: 0.1, flip_prob: 0.8, seed: 1 }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(LduError::invalid("synthetic config: n must be >= 2"));
        }
        if self.d == 0 {
            return Err(LduError::invalid("synthetic config: d must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.confound_fraction) {
            return Err(LduError::invalid("synthetic config: confound_fraction outside [0,1]"));
        }
        if !(0.0..=1.0).contains(&self.flip_prob) {
            return Err(LduError::invalid("synthetic config: flip_prob outside [0,1]"));
        }
        Ok(())
    }
}

pub fn gen_synthetic(config: &SyntheticConfig) -> Result<LabeledDataset> {
    Ok(gen_synthetic_detailed(config)?.0)
}

/// As [`gen_synthetic`], also returning the pre-flip labels.
pub fn gen_synthetic_detailed(config: &SyntheticConfig) -> Result<(LabeledDataset, Vec<usize>)> {
    config.validate()?;
    let mut rng = SplitMix64::new(derive_seed(config.seed, 0));
    let mut features = Vec::with_capacity(config.n);
    let mut labels = Vec::with_capacity(config.n);
    for i in 0..config.n {
        // balanced by construction
        let y = i % 2;
        let center = if y == 1 { config.mu } else { -config.mu };
        features.push((0..config.d).map(|_| center + rng.normal()).collect::<Vec<f64>>());
        labels.push(y);
    }
    let pre_flip = labels.clone();

    let flip_count = (config.confound_fraction * config.n as f64).round() as usize;
    if flip_count > 0 && config.flip_prob > 0.0 {
        let mut order: Vec<usize> = (0..config.n).collect();
        // largest first feature first; ties by index for determinism
        order.sort_by(|&a, &b| {
            features[b][0].partial_cmp(&features[a][0]).expect("features are finite").then(a.cmp(&b))
        });
        let mut region: Vec<usize> = order[..flip_count.min(config.n)].to_vec();
        region.sort_unstable();
        let mut flip_rng = SplitMix64::new(derive_seed(config.seed, 1));
        for &i in &region {
            if flip_rng.next_f64() < config.flip_prob {
                labels[i] = 1 - labels[i];
            }
        }
    }
    let ds = LabeledDataset::new((0..config.n as u64).collect(), features, labels)?;
    Ok((ds, pre_flip))
}

/// Seeded permutation followed by a prefix split; train size = ⌊ratio·N⌋.
pub fn split_dataset(
    dataset: &LabeledDataset,
    ratio: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(LduError::invalid("split: ratio must be in (0,1)"));
    }
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SplitMix64::new(derive_seed(seed, 2));
    rng.shuffle(&mut order);
    let train_size = (ratio * n as f64).floor() as usize;
    if train_size == 0 || train_size == n {
        return Err(LduError::invalid("split: a partition would be empty"));
    }
    let take = |idx: &[usize]| {
        LabeledDataset::new(
            idx.iter().map(|&i| dataset.ids[i]).collect(),
            idx.iter().map(|&i| dataset.features[i].clone()).collect(),
            idx.iter().map(|&i| dataset.labels[i]).collect(),
        )
    };
    Ok((take(&order[..train_size])?, take(&order[train_size..])?))
}

fn fmt9(v: f64) -> String {
    format!("{v:.9}")
}

/// Writes bytes to `path` atomically: temp file in the same directory, then
/// rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let display = path.display().to_string();
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| LduError::io(tmp.display().to_string(), e))?;
    std::fs::rename(&tmp, path).map_err(|e| LduError::io(display, e))
}

pub fn dataset_to_csv(dataset: &LabeledDataset) -> String {
    let mut out = String::from("id,label");
    for j in 0..dataset.dim() {
        write!(out, ",f{j}").unwrap();
    }
    out.push('\n');
    for i in 0..dataset.len() {
        write!(out, "{},{}", dataset.ids[i], dataset.labels[i]).unwrap();
        for v in &dataset.features[i] {
            write!(out, ",{}", fmt9(*v)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_dataset_csv(dataset: &LabeledDataset, path: &Path) -> Result<()> {
    write_atomic(path, dataset_to_csv(dataset).as_bytes())
}

struct CsvLines<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

fn parse_error(line: usize, detail: impl Into<String>) -> LduError {
    LduError::Parse { line, detail: detail.into() }
}

impl<'a> CsvLines<'a> {
    fn new(text: &'a str) -> Self {
        CsvLines { lines: text.lines().enumerate() }
    }

    fn header(&mut self) -> Result<(usize, Vec<&'a str>)> {
        match self.lines.next() {
            Some((i, line)) => Ok((i + 1, line.trim_end().split(',').collect())),
            None => Err(parse_error(1, "empty file")),
        }
    }

    fn rows(self) -> impl Iterator<Item = (usize, Vec<&'a str>)> {
        self.lines
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| (i + 1, l.trim_end().split(',').collect()))
    }
}

fn parse_u64(field: &str, line: usize, what: &str) -> Result<u64> {
    field.parse().map_err(|_| parse_error(line, format!("non-numeric {what} `{field}`")))
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    field.parse().map_err(|_| parse_error(line, format!("non-numeric {what} `{field}`")))
}

fn parse_label(field: &str, line: usize) -> Result<usize> {
    match field {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(parse_error(line, format!("label `{other}` must be 0 or 1"))),
    }
}

pub fn read_dataset_csv(path: &Path) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| LduError::io(path.display().to_string(), e))?;
    dataset_from_csv(&text)
}

pub fn dataset_from_csv(text: &str) -> Result<LabeledDataset> {
    let mut lines = CsvLines::new(text);
    let (hline, header) = lines.header()?;
    if header.len() < 3 || header[0] != "id" || header[1] != "label" {
        return Err(parse_error(hline, "expected header `id,label,f0,...`"));
    }
    let d = header.len() - 2;
    for (j, name) in header[2..].iter().enumerate() {
        if *name != format!("f{j}") {
            return Err(parse_error(hline, format!("expected feature column `f{j}`, got `{name}`")));
        }
    }
    let (mut ids, mut features, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, fields) in lines.rows() {
        if fields.len() != d + 2 {
            return Err(parse_error(lineno, format!("expected {} fields, got {}", d + 2, fields.len())));
        }
        ids.push(parse_u64(fields[0], lineno, "id")?);
        labels.push(parse_label(fields[1], lineno)?);
        features.push(
            fields[2..]
                .iter()
                .map(|f| parse_f64(f, lineno, "feature"))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    LabeledDataset::new(ids, features, labels)
}

fn prob_header(k: usize, labeled: bool) -> String {
    let mut out = String::from("id");
    if labeled {
        out.push_str(",label");
    }
    for j in 0..k {
        write!(out, ",p{j}").unwrap();
    }
    out
}

pub fn preds_to_csv(matrix: &PredictionMatrix) -> String {
    let mut out = prob_header(matrix.member_count(), matrix.labels.is_some());
    out.push('\n');
    for i in 0..matrix.sample_count() {
        write!(out, "{}", matrix.ids[i]).unwrap();
        if let Some(labels) = &matrix.labels {
            write!(out, ",{}", labels[i]).unwrap();
        }
        for p in &matrix.probs[i] {
            write!(out, ",{}", fmt9(*p)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_preds_csv(matrix: &PredictionMatrix, path: &Path) -> Result<()> {
    write_atomic(path, preds_to_csv(matrix).as_bytes())
}

pub fn read_preds_csv(path: &Path) -> Result<PredictionMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| LduError::io(path.display().to_string(), e))?;
    preds_from_csv(&text)
}

pub fn preds_from_csv(text: &str) -> Result<PredictionMatrix> {
    let mut lines = CsvLines::new(text);
    let (hline, header) = lines.header()?;
    if header.first() != Some(&"id") {
        return Err(parse_error(hline, "expected header starting with `id`"));
    }
    let labeled = header.get(1) == Some(&"label");
    let first_prob = if labeled { 2 } else { 1 };
    let k = header.len().saturating_sub(first_prob);
    if k == 0 {
        return Err(parse_error(hline, "expected at least one probability column"));
    }
    for (j, name) in header[first_prob..].iter().enumerate() {
        if *name != format!("p{j}") {
            return Err(parse_error(hline, format!("expected column `p{j}`, got `{name}`")));
        }
    }
    let (mut ids, mut probs, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, fields) in lines.rows() {
        if fields.len() != header.len() {
            return Err(parse_error(
                lineno,
                format!("expected {} fields, got {}", header.len(), fields.len()),
            ));
        }
        ids.push(parse_u64(fields[0], lineno, "id")?);
        if labeled {
            labels.push(parse_label(fields[1], lineno)?);
        }
        let row: Vec<f64> = fields[first_prob..]
            .iter()
            .map(|f| parse_f64(f, lineno, "probability"))
            .collect::<Result<_>>()?;
        if let Some(&bad) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(parse_error(lineno, format!("probability {bad} outside [0,1]")));
        }
        probs.push(row);
    }
    PredictionMatrix::new(ids, probs, labeled.then_some(labels))
}

pub fn features_to_csv(features: &DeferFeatures) -> String {
    let mut out = prob_header(features.member_count, features.labels.is_some());
    out.push_str(",u_e,u_d\n");
    for i in 0..features.rows.len() {
        write!(out, "{}", features.ids[i]).unwrap();
        if let Some(labels) = &features.labels {
            write!(out, ",{}", labels[i]).unwrap();
        }
        for v in &features.rows[i] {
            write!(out, ",{}", fmt9(*v)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_features_csv(features: &DeferFeatures, path: &Path) -> Result<()> {
    write_atomic(path, features_to_csv(features).as_bytes())
}

pub fn read_features_csv(path: &Path) -> Result<DeferFeatures> {
    let text = std::fs::read_to_string(path).map_err(|e| LduError::io(path.display().to_string(), e))?;
    features_from_csv(&text)
}

pub fn features_from_csv(text: &str) -> Result<DeferFeatures> {
    let mut lines = CsvLines::new(text);
    let (hline, header) = lines.header()?;
    if header.first() != Some(&"id") {
        return Err(parse_error(hline, "expected header starting with `id`"));
    }
    let labeled = header.get(1) == Some(&"label");
    let first_prob = if labeled { 2 } else { 1 };
    if header.len() < first_prob + 3
        || header[header.len() - 2] != "u_e"
        || header[header.len() - 1] != "u_d"
    {
        return Err(parse_error(hline, "expected trailing columns `u_e,u_d`"));
    }
    let k = header.len() - first_prob - 2;
    for (j, name) in header[first_prob..first_prob + k].iter().enumerate() {
        if *name != format!("p{j}") {
            return Err(parse_error(hline, format!("expected column `p{j}`, got `{name}`")));
        }
    }
    let (mut ids, mut rows, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, fields) in lines.rows() {
        if fields.len() != header.len() {
            return Err(parse_error(
                lineno,
                format!("expected {} fields, got {}", header.len(), fields.len()),
            ));
        }
        ids.push(parse_u64(fields[0], lineno, "id")?);
        if labeled {
            labels.push(parse_label(fields[1], lineno)?);
        }
        let row: Vec<f64> = fields[first_prob..]
            .iter()
            .map(|f| parse_f64(f, lineno, "feature"))
            .collect::<Result<_>>()?;
        for (j, &v) in row[..k].iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(parse_error(lineno, format!("probability p{j} = {v} outside [0,1]")));
            }
        }
        if row[k] < 0.0 || row[k + 1] < 0.0 {
            return Err(parse_error(lineno, "entropy columns must be >= 0"));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(1, "feature file has no rows"));
    }
    Ok(DeferFeatures { ids, rows, labels: labeled.then_some(labels), member_count: k })
}

pub const CURVE_HEADER: &str = "param,defer_rate,f1,f1_overall,accuracy,sensitivity,specificity";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt9).unwrap_or_default()
}

pub fn curve_to_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt9(row.param),
            fmt9(row.defer_rate),
            fmt_opt(row.f1),
            fmt_opt(row.f1_overall),
            fmt_opt(row.accuracy),
            fmt_opt(row.sensitivity),
            fmt_opt(row.specificity),
        )
        .unwrap();
    }
    out
}

pub fn write_curve_csv(rows: &[MetricsRow], path: &Path) -> Result<()> {
    write_atomic(path, curve_to_csv(rows).as_bytes())
}

pub fn read_curve_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| LduError::io(path.display().to_string(), e))?;
    curve_from_csv(&text)
}

pub fn curve_from_csv(text: &str) -> Result<Vec<MetricsRow>> {
    let mut lines = CsvLines::new(text);
    let (hline, header) = lines.header()?;
    if header.join(",") != CURVE_HEADER {
        return Err(parse_error(hline, format!("expected header `{CURVE_HEADER}`")));
    }
    let parse_opt = |field: &str, line: usize, what: &str| -> Result<Option<f64>> {
        if field.is_empty() {
            Ok(None)
        } else {
            parse_f64(field, line, what).map(Some)
        }
    };
    let mut rows = Vec::new();
    for (lineno, fields) in lines.rows() {
        if fields.len() != 7 {
            return Err(parse_error(lineno, format!("expected 7 fields, got {}", fields.len())));
        }
        let defer_rate = parse_f64(fields[1], lineno, "defer_rate")?;
        if !(0.0..=1.0).contains(&defer_rate) {
            return Err(parse_error(lineno, format!("defer_rate {defer_rate} outside [0,1]")));
        }
        rows.push(MetricsRow {
            param: parse_f64(fields[0], lineno, "param")?,
            defer_rate,
            f1: parse_opt(fields[2], lineno, "f1")?,
            f1_overall: parse_opt(fields[3], lineno, "f1_overall")?,
            accuracy: parse_opt(fields[4], lineno, "accuracy")?,
            sensitivity: parse_opt(fields[5], lineno, "sensitivity")?,
            specificity: parse_opt(fields[6], lineno, "specificity")?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uncertainty::build_defer_features;

    #[test]
    fn synthetic_defaults_balanced_pre_flip() {
        let config = SyntheticConfig { n: 10_000, ..Default::default() };
        let (_, pre_flip) = gen_synthetic_detailed(&config).unwrap();
        let positives = pre_flip.iter().filter(|&&l| l == 1).count() as f64;
        assert!((positives / 10_000.0 - 0.5).abs() <= 0.02);
    }

    #[test]
    fn synthetic_flip_count_binomial() {
        let config = SyntheticConfig { n: 10_000, ..Default::default() };
        let (ds, pre_flip) = gen_synthetic_detailed(&config).unwrap();
        let flips = ds.labels.iter().zip(&pre_flip).filter(|(a, b)| a != b).count() as f64;
        // Binomial(1000, 0.8): mean 800, sigma = sqrt(1000*0.8*0.2) ~ 12.65
        let mean = 10_000.0 * 0.1 * 0.8;
        let sigma = (10_000.0f64 * 0.1 * 0.8 * 0.2).sqrt();
        assert!((flips - mean).abs() <= 3.0 * sigma, "flips {flips}");
    }

    #[test]
    fn synthetic_clean_config_no_flips() {
        let config =
            SyntheticConfig { n: 100, confound_fraction: 0.0, flip_prob: 0.0, ..Default::default() };
        let (ds, pre_flip) = gen_synthetic_detailed(&config).unwrap();
        assert_eq!(ds.labels, pre_flip);
    }

    #[test]
    fn synthetic_deterministic_bytes() {
        let config = SyntheticConfig { n: 200, ..Default::default() };
        let a = dataset_to_csv(&gen_synthetic(&config).unwrap());
        let b = dataset_to_csv(&gen_synthetic(&config).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn synthetic_rejects_tiny_n() {
        let config = SyntheticConfig { n: 1, ..Default::default() };
        assert!(gen_synthetic(&config).is_err());
    }

    #[test]
    fn split_sizes_and_partition() {
        let config = SyntheticConfig { n: 10, ..Default::default() };
        let ds = gen_synthetic(&config).unwrap();
        let (train, test) = split_dataset(&ds, 0.7, 5).unwrap();
        assert_eq!(train.len(), 7);
        assert_eq!(test.len(), 3);
        let mut all: Vec<u64> = train.ids.iter().chain(&test.ids).cloned().collect();
        all.sort_unstable();
        assert_eq!(all, ds.ids);
        // determinism
        let (train2, _) = split_dataset(&ds, 0.7, 5).unwrap();
        assert_eq!(train, train2);
    }

    #[test]
    fn split_rejects_bad_ratio() {
        let ds = gen_synthetic(&SyntheticConfig { n: 10, ..Default::default() }).unwrap();
        assert!(split_dataset(&ds, 0.0, 1).is_err());
        assert!(split_dataset(&ds, 1.0, 1).is_err());
    }

    #[test]
    fn dataset_csv_round_trip() {
        let ds = gen_synthetic(&SyntheticConfig { n: 25, d: 3, ..Default::default() }).unwrap();
        let text = dataset_to_csv(&ds);
        let back = dataset_from_csv(&text).unwrap();
        assert_eq!(back.ids, ds.ids);
        assert_eq!(back.labels, ds.labels);
        for (a, b) in back.features.iter().flatten().zip(ds.features.iter().flatten()) {
            assert!((a - b).abs() < 5e-10);
        }
        // identical bytes on re-serialization
        assert_eq!(dataset_to_csv(&back), text);
    }

    #[test]
    fn preds_csv_round_trip_and_validation() {
        let matrix = PredictionMatrix::new(
            vec![3, 7],
            vec![vec![0.123456789, 1.0], vec![0.0, 0.5]],
            Some(vec![1, 0]),
        )
        .unwrap();
        let text = preds_to_csv(&matrix);
        assert!(text.starts_with("id,label,p0,p1\n"));
        let back = preds_from_csv(&text).unwrap();
        assert_eq!(back, matrix);

        // unlabeled matrices omit the label column
        let unlabeled = PredictionMatrix::new(vec![1], vec![vec![0.25]], None).unwrap();
        assert!(preds_to_csv(&unlabeled).starts_with("id,p0\n"));

        let err = preds_from_csv("id,label,p0\n1,0,1.5\n").unwrap_err();
        match err {
            LduError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(preds_from_csv("id,label,q0\n").is_err());
    }

    #[test]
    fn features_csv_round_trip() {
        let matrix = PredictionMatrix::new(
            vec![0, 1, 2],
            vec![vec![0.5, 0.5], vec![0.9, 0.8], vec![0.1, 0.6]],
            Some(vec![0, 1, 1]),
        )
        .unwrap();
        let features = build_defer_features(&matrix).unwrap();
        let text = features_to_csv(&features);
        let back = features_from_csv(&text).unwrap();
        assert_eq!(back.ids, features.ids);
        assert_eq!(back.labels, features.labels);
        assert_eq!(back.member_count, 2);
        for (a, b) in back.rows.iter().flatten().zip(features.rows.iter().flatten()) {
            assert!((a - b).abs() < 5e-10);
        }
    }

    #[test]
    fn features_csv_rejects_missing_columns() {
        assert!(features_from_csv("id,label,p0,u_e\n").is_err());
        // header-only file has no rows
        assert!(features_from_csv("id,label,p0,u_e,u_d\n").is_err());
    }

    #[test]
    fn curve_csv_round_trip_with_missing_fields() {
        let rows = vec![
            MetricsRow {
                param: 0.5,
                defer_rate: 0.25,
                f1: Some(0.9),
                f1_overall: Some(0.95),
                accuracy: Some(0.88),
                sensitivity: None,
                specificity: Some(1.0),
            },
            MetricsRow {
                param: 1.0,
                defer_rate: 1.0,
                f1: None,
                f1_overall: Some(1.0),
                accuracy: None,
                sensitivity: None,
                specificity: None,
            },
        ];
        let text = curve_to_csv(&rows);
        let back = curve_from_csv(&text).unwrap();
        assert_eq!(
            back.iter().map(|r| r.f1).collect::<Vec<_>>(),
            vec![Some(0.9), None]
        );
        assert_eq!(curve_to_csv(&back), text);
        assert!(curve_from_csv("wrong,header\n").is_err());
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"first\n").unwrap();
        write_atomic(&path, b"second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        assert!(!path.with_extension("tmp").exists());
    }
}
