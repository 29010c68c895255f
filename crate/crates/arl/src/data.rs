//! Synthetic data generation, tabular CSV ingestion, preprocessing, splits
//! and batching.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Full,
    Train,
    Test,
}

/// Feature matrix with per-row target label `t` (n classes) and sensitive
/// label `s` (m classes; entries may be absent). Immutable after
/// construction apart from the standardization pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Tensor,
    pub t: Vec<usize>,
    pub s: Vec<Option<usize>>,
    pub n_target: usize,
    pub m_sensitive: usize,
    pub split: SplitTag,
    pub provenance: String,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.features.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.t.len() != self.len() || self.s.len() != self.len() {
            return Err(Error::Invalid("label count != row count".into()));
        }
        if self.t.iter().any(|&t| t >= self.n_target) {
            return Err(Error::Invalid("target label out of range".into()));
        }
        if self.s.iter().flatten().any(|&s| s >= self.m_sensitive) {
            return Err(Error::Invalid("sensitive label out of range".into()));
        }
        if self.features.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix".into()));
        }
        Ok(())
    }

    /// Row subset in the given index order.
    pub fn select(&self, idx: &[usize], split: SplitTag) -> LabeledDataset {
        let cols = self.features.cols;
        let mut data = Vec::with_capacity(idx.len() * cols);
        for &i in idx {
            data.extend_from_slice(self.features.row(i));
        }
        LabeledDataset {
            features: Tensor::new(idx.len(), cols, data),
            t: idx.iter().map(|&i| self.t[i]).collect(),
            s: idx.iter().map(|&i| self.s[i]).collect(),
            n_target: self.n_target,
            m_sensitive: self.m_sensitive,
            split,
            provenance: self.provenance.clone(),
        }
    }

    /// Drops all sensitive labels (semi-supervised setting).
    pub fn without_sensitive(&self) -> LabeledDataset {
        let mut d = self.clone();
        d.s = vec![None; d.len()];
        d
    }
}

/// Configuration of the 2-D Gaussian mixture toy problem.
#[derive(Debug, Clone)]
pub struct MixtureConfig {
    pub means: Vec<(f64, f64)>,
    pub sigma: f64,
    pub samples_per_component: usize,
    pub seed: u64,
    /// Per-component (target, sensitive) label pair; components in listed
    /// order default to (0,0),(1,0),(0,1),(1,1).
    pub assignment: Vec<(usize, usize)>,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        MixtureConfig {
            means: vec![(1.0, 1.0), (2.0, 1.5), (1.5, 2.5), (2.5, 3.0)],
            sigma: 0.3,
            samples_per_component: 1000,
            seed: 0,
            assignment: vec![(0, 0), (1, 0), (0, 1), (1, 1)],
        }
    }
}

impl MixtureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma <= 0.0 {
            return Err(Error::Config("mixture sigma must be > 0".into()));
        }
        if self.means.len() != self.assignment.len() {
            return Err(Error::Config(format!(
                "{} means but {} attribute assignments",
                self.means.len(),
                self.assignment.len()
            )));
        }
        for (i, a) in self.means.iter().enumerate() {
            for b in self.means.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::Config(format!("duplicate component mean {a:?}")));
                }
            }
        }
        Ok(())
    }
}

/// Samples the isotropic Gaussian mixture; each component contributes
/// exactly `samples_per_component` rows. Deterministic under the seed.
pub fn gen_mixture(config: &MixtureConfig) -> Result<LabeledDataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, config.sigma).map_err(|e| Error::Config(e.to_string()))?;
    let total = config.means.len() * config.samples_per_component;
    let mut data = Vec::with_capacity(total * 2);
    let mut t = Vec::with_capacity(total);
    let mut s = Vec::with_capacity(total);
    for (&(mx, my), &(ti, si)) in config.means.iter().zip(&config.assignment) {
        for _ in 0..config.samples_per_component {
            data.push(mx + normal.sample(&mut rng));
            data.push(my + normal.sample(&mut rng));
            t.push(ti);
            s.push(Some(si));
        }
    }
    let n_target = config.assignment.iter().map(|a| a.0).max().unwrap_or(0) + 1;
    let m_sensitive = config.assignment.iter().map(|a| a.1).max().unwrap_or(0) + 1;
    Ok(LabeledDataset {
        features: Tensor::new(total, 2, data),
        t,
        s,
        n_target,
        m_sensitive,
        split: SplitTag::Full,
        provenance: format!("mixture(seed={})", config.seed),
    })
}

/// What a CSV column contributes to the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRole {
    Feature,
    Target,
    Sensitive,
    Drop,
}

#[derive(Debug, Clone)]
pub struct ColumnSpec {
    pub name: String,
    pub role: ColumnRole,
    /// Declared category levels; `None` means numeric.
    pub categories: Option<Vec<String>>,
    /// Value rewrites applied before category lookup.
    pub recode: HashMap<String, String>,
}

/// Column roles and categorical maps for one CSV layout.
#[derive(Debug, Clone)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

/// Behavior on a category value not listed in the schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownCategory {
    #[default]
    Error,
    /// Encode the offending one-hot block as all zeros.
    Zeros,
}

impl Schema {
    /// Parses the line-oriented schema format:
    ///
    /// ```text
    /// col <name> <feature|target|sensitive|drop>
    /// cat <name> <level> <level> ...
    /// recode <name> <old>=<new> ...
    /// ```
    ///
    /// `col` lines give the CSV column order; `cat` marks a column
    /// categorical with its level list; `recode` rewrites raw values first.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str, source: &str) -> Result<Schema> {
        let mut columns: Vec<ColumnSpec> = Vec::new();
        let err = |line: usize, msg: String| Error::Parse {
            file: source.to_string(),
            line,
            msg,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let kind = parts.next().unwrap();
            let name = parts
                .next()
                .ok_or_else(|| err(i + 1, "missing column name".into()))?
                .to_string();
            match kind {
                "col" => {
                    let role = match parts.next() {
                        Some("feature") => ColumnRole::Feature,
                        Some("target") => ColumnRole::Target,
                        Some("sensitive") => ColumnRole::Sensitive,
                        Some("drop") => ColumnRole::Drop,
                        other => {
                            return Err(err(i + 1, format!("bad role {other:?} for '{name}'")))
                        }
                    };
                    columns.push(ColumnSpec {
                        name,
                        role,
                        categories: None,
                        recode: HashMap::new(),
                    });
                }
                "cat" => {
                    let col = columns
                        .iter_mut()
                        .find(|c| c.name == name)
                        .ok_or_else(|| err(i + 1, format!("cat before col for '{name}'")))?;
                    let levels: Vec<String> = parts.map(str::to_string).collect();
                    if levels.is_empty() {
                        return Err(err(i + 1, format!("empty category list for '{name}'")));
                    }
                    col.categories = Some(levels);
                }
                "recode" => {
                    let col = columns
                        .iter_mut()
                        .find(|c| c.name == name)
                        .ok_or_else(|| err(i + 1, format!("recode before col for '{name}'")))?;
                    for pair in parts {
                        let (old, new) = pair.split_once('=').ok_or_else(|| {
                            err(i + 1, format!("recode entry '{pair}' is not old=new"))
                        })?;
                        col.recode.insert(old.to_string(), new.to_string());
                    }
                }
                other => return Err(err(i + 1, format!("unknown schema record '{other}'"))),
            }
        }
        let schema = Schema { columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Schema> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Schema::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        let targets = self.columns.iter().filter(|c| c.role == ColumnRole::Target).count();
        let sensitives = self
            .columns
            .iter()
            .filter(|c| c.role == ColumnRole::Sensitive)
            .count();
        if targets != 1 {
            return Err(Error::Config(format!("schema needs exactly 1 target column, has {targets}")));
        }
        if sensitives != 1 {
            return Err(Error::Config(format!(
                "schema needs exactly 1 sensitive column, has {sensitives}"
            )));
        }
        for c in &self.columns {
            if matches!(c.role, ColumnRole::Target | ColumnRole::Sensitive) && c.categories.is_none()
            {
                return Err(Error::Config(format!(
                    "label column '{}' needs a category list",
                    c.name
                )));
            }
        }
        Ok(())
    }

    fn class_count(&self, role: ColumnRole) -> usize {
        self.columns
            .iter()
            .find(|c| c.role == role)
            .and_then(|c| c.categories.as_ref())
            .map(|l| l.len())
            .unwrap_or(0)
    }
}

/// Loads an RFC-4180 CSV (header row required) under a schema. Categorical
/// features are one-hot encoded; the sensitive column never enters the
/// feature matrix. Numerics are left raw here — standardization happens
/// after the train/test split so test statistics never leak in.
pub fn load_csv(path: &Path, schema: &Schema, unknown: UnknownCategory) -> Result<LabeledDataset> {
    let fname = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Parse {
            file: fname.clone(),
            line: 0,
            msg: e.to_string(),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            file: fname.clone(),
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    if headers.len() != schema.columns.len() {
        return Err(Error::Parse {
            file: fname,
            line: 1,
            msg: format!(
                "schema covers {} columns but file has {}",
                schema.columns.len(),
                headers.len()
            ),
        });
    }
    for (h, c) in headers.iter().zip(&schema.columns) {
        if h.trim() != c.name {
            return Err(Error::Parse {
                file: fname,
                line: 1,
                msg: format!("column '{}' does not match schema column '{}'", h.trim(), c.name),
            });
        }
    }

    // Feature width: 1 per numeric, |levels| per categorical.
    let width: usize = schema
        .columns
        .iter()
        .filter(|c| c.role == ColumnRole::Feature)
        .map(|c| c.categories.as_ref().map_or(1, |l| l.len()))
        .sum();

    let mut data: Vec<f64> = Vec::new();
    let mut t = Vec::new();
    let mut s = Vec::new();
    for (rec_idx, record) in reader.records().enumerate() {
        let line = rec_idx + 2; // header is line 1
        let record = record.map_err(|e| Error::Parse {
            file: fname.clone(),
            line,
            msg: e.to_string(),
        })?;
        if record.len() != schema.columns.len() {
            return Err(Error::Parse {
                file: fname,
                line,
                msg: format!(
                    "row has {} fields, schema expects {}",
                    record.len(),
                    schema.columns.len()
                ),
            });
        }
        let mut row_t = None;
        let mut row_s = None;
        let start = data.len();
        for (field, col) in record.iter().zip(&schema.columns) {
            let raw = field.trim();
            let value = col.recode.get(raw).map(String::as_str).unwrap_or(raw);
            match (col.role, &col.categories) {
                (ColumnRole::Drop, _) => {}
                (ColumnRole::Feature, None) => {
                    let v: f64 = value.parse().map_err(|_| Error::Parse {
                        file: fname.clone(),
                        line,
                        msg: format!("non-numeric value '{value}' in numeric column '{}'", col.name),
                    })?;
                    data.push(v);
                }
                (ColumnRole::Feature, Some(levels)) => {
                    let hit = levels.iter().position(|l| l == value);
                    match (hit, unknown) {
                        (Some(k), _) => {
                            for j in 0..levels.len() {
                                data.push(if j == k { 1.0 } else { 0.0 });
                            }
                        }
                        (None, UnknownCategory::Zeros) => {
                            data.extend(std::iter::repeat(0.0).take(levels.len()));
                        }
                        (None, UnknownCategory::Error) => {
                            return Err(Error::Parse {
                                file: fname,
                                line,
                                msg: format!(
                                    "unknown category '{value}' in column '{}'",
                                    col.name
                                ),
                            });
                        }
                    }
                }
                (ColumnRole::Target, Some(levels)) | (ColumnRole::Sensitive, Some(levels)) => {
                    let k = levels.iter().position(|l| l == value).ok_or_else(|| {
                        Error::Parse {
                            file: fname.clone(),
                            line,
                            msg: format!("unknown label '{value}' in column '{}'", col.name),
                        }
                    })?;
                    if col.role == ColumnRole::Target {
                        row_t = Some(k);
                    } else {
                        row_s = Some(k);
                    }
                }
                _ => unreachable!("validated by Schema::validate"),
            }
        }
        debug_assert_eq!(data.len() - start, width);
        t.push(row_t.expect("schema has a target column"));
        s.push(row_s);
    }

    let rows = t.len();
    let ds = LabeledDataset {
        features: Tensor::new(rows, width, data),
        t,
        s,
        n_target: schema.class_count(ColumnRole::Target),
        m_sensitive: schema.class_count(ColumnRole::Sensitive),
        split: SplitTag::Full,
        provenance: fname,
    };
    ds.validate()?;
    Ok(ds)
}

/// Disjoint, exhaustive, seed-deterministic split.
pub fn split(dataset: &LabeledDataset, fraction: f64, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Invalid(format!(
            "split fraction must be in (0,1), got {fraction}"
        )));
    }
    let mut idx: Vec<usize> = (0..dataset.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (dataset.len() as f64 * fraction).round() as usize;
    Ok((
        dataset.select(&idx[..cut], SplitTag::Train),
        dataset.select(&idx[cut..], SplitTag::Test),
    ))
}

/// Shuffled mini-batch index stream; the last partial batch is kept.
pub fn batches(len: usize, batch_size: usize, seed: u64) -> Vec<Vec<usize>> {
    assert!(batch_size > 0, "batch size must be positive");
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.chunks(batch_size).map(<[usize]>::to_vec).collect()
}

/// Per-column affine map fitted on the train split only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Fits mean/std per feature column. Constant columns get std 0 and are
    /// mapped to 0 by [`Standardizer::apply`].
    pub fn fit(train: &LabeledDataset) -> Standardizer {
        let (rows, cols) = train.features.shape();
        let n = rows as f64;
        let mut mean = vec![0.0; cols];
        for i in 0..rows {
            for (m, v) in mean.iter_mut().zip(train.features.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; cols];
        for i in 0..rows {
            for ((s, v), m) in var.iter_mut().zip(train.features.row(i)).zip(&mean) {
                let d = v - m;
                *s += d * d;
            }
        }
        let std = var.iter().map(|s| (s / n).sqrt()).collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, dataset: &mut LabeledDataset) {
        let cols = dataset.features.cols;
        assert_eq!(cols, self.mean.len(), "standardizer width mismatch");
        for i in 0..dataset.features.rows {
            for j in 0..cols {
                let v = dataset.features.get(i, j);
                let z = if self.std[j] > 0.0 {
                    (v - self.mean[j]) / self.std[j]
                } else {
                    0.0
                };
                dataset.features.set(i, j, z);
            }
        }
    }
}

/// Writes a dataset to CSV: feature columns x0..x{d-1}, then t, then s
/// (empty field when absent). Reloadable with a generated schema.
pub fn export_csv(dataset: &LabeledDataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    let d = dataset.dim();
    for j in 0..d {
        out.push_str(&format!("x{j},"));
    }
    out.push_str("t,s\n");
    for i in 0..dataset.len() {
        for v in dataset.features.row(i) {
            out.push_str(&format!("{v:.16e},"));
        }
        out.push_str(&dataset.t[i].to_string());
        out.push(',');
        if let Some(s) = dataset.s[i] {
            out.push_str(&s.to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixture_component_means_within_clt_bound() {
        let config = MixtureConfig::default();
        let ds = gen_mixture(&config).unwrap();
        let n = config.samples_per_component;
        let bound = 3.0 * config.sigma / (n as f64).sqrt();
        for (c, &(mx, my)) in config.means.iter().enumerate() {
            let lo = c * n;
            let (mut sx, mut sy) = (0.0, 0.0);
            for i in lo..lo + n {
                sx += ds.features.get(i, 0);
                sy += ds.features.get(i, 1);
            }
            assert!((sx / n as f64 - mx).abs() < bound, "component {c} x mean off");
            assert!((sy / n as f64 - my).abs() < bound, "component {c} y mean off");
        }
    }

    #[test]
    fn mixture_joint_is_uniform_and_independent() {
        let ds = gen_mixture(&MixtureConfig::default()).unwrap();
        let mut cells = [[0usize; 2]; 2];
        for (t, s) in ds.t.iter().zip(&ds.s) {
            cells[*t][s.unwrap()] += 1;
        }
        for row in cells {
            for c in row {
                assert_eq!(c, 1000);
            }
        }
    }

    #[test]
    fn mixture_seed_determinism() {
        let a = gen_mixture(&MixtureConfig::default()).unwrap();
        let b = gen_mixture(&MixtureConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mixture_rejects_duplicate_means() {
        let config = MixtureConfig {
            means: vec![(1.0, 1.0), (1.0, 1.0)],
            assignment: vec![(0, 0), (1, 1)],
            ..MixtureConfig::default()
        };
        assert!(gen_mixture(&config).is_err());
    }

    #[test]
    fn split_800_200() {
        let ds = gen_mixture(&MixtureConfig {
            samples_per_component: 250,
            ..MixtureConfig::default()
        })
        .unwrap();
        let (train, test) = split(&ds, 0.8, 1).unwrap();
        assert_eq!(train.len(), 800);
        assert_eq!(test.len(), 200);
        assert_eq!(train.split, SplitTag::Train);
        assert_eq!(test.split, SplitTag::Test);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let ds = gen_mixture(&MixtureConfig::default()).unwrap();
        assert!(split(&ds, 0.0, 1).is_err());
        assert!(split(&ds, 1.0, 1).is_err());
    }

    #[test]
    fn batches_partition_exactly() {
        let bs = batches(103, 10, 7);
        assert_eq!(bs.len(), 11);
        assert_eq!(bs.last().unwrap().len(), 3);
        let mut all: Vec<usize> = bs.into_iter().flatten().collect();
        all.sort_unstable();
        assert_eq!(all, (0..103).collect::<Vec<_>>());
    }

    #[test]
    fn batches_seed_deterministic() {
        assert_eq!(batches(50, 8, 3), batches(50, 8, 3));
        assert_ne!(batches(50, 8, 3), batches(50, 8, 4));
    }

    const TOY_SCHEMA: &str = "\
col age feature
col job feature
cat job clerk smith none
col credit target
cat credit good bad
col sex sensitive
cat sex male female
";

    #[test]
    fn csv_one_hot_width() {
        let schema = Schema::parse(TOY_SCHEMA, "toy").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.csv");
        std::fs::write(&path, "age,job,credit,sex\n30,clerk,good,male\n41,none,bad,female\n").unwrap();
        let ds = load_csv(&path, &schema, UnknownCategory::Error).unwrap();
        assert_eq!(ds.len(), 2);
        // 1 numeric + 3 one-hot levels.
        assert_eq!(ds.dim(), 4);
        assert_eq!(ds.features.row(0), [30.0, 1.0, 0.0, 0.0]);
        assert_eq!(ds.t, vec![0, 1]);
        assert_eq!(ds.s, vec![Some(0), Some(1)]);
    }

    #[test]
    fn csv_unknown_category_modes() {
        let schema = Schema::parse(TOY_SCHEMA, "toy").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.csv");
        std::fs::write(&path, "age,job,credit,sex\n30,pilot,good,male\n").unwrap();
        let err = load_csv(&path, &schema, UnknownCategory::Error).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");
        let ds = load_csv(&path, &schema, UnknownCategory::Zeros).unwrap();
        assert_eq!(ds.features.row(0), [30.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn csv_arity_mismatch_reports_line() {
        let schema = Schema::parse(TOY_SCHEMA, "toy").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.csv");
        std::fs::write(&path, "age,job,credit,sex\n30,clerk,good,male\n41,none,bad\n").unwrap();
        let err = load_csv(&path, &schema, UnknownCategory::Error).unwrap_err().to_string();
        assert!(err.contains("line 3") || err.contains(":3"), "{err}");
    }

    #[test]
    fn csv_recode() {
        let schema_text = "\
col status feature
col credit target
cat credit good bad
col statussex sensitive
cat statussex male female
recode statussex A91=male A92=female A93=male A94=male A95=female
";
        let schema = Schema::parse(schema_text, "s").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.csv");
        std::fs::write(&path, "status,credit,statussex\n1,good,A92\n2,bad,A93\n").unwrap();
        let ds = load_csv(&path, &schema, UnknownCategory::Error).unwrap();
        assert_eq!(ds.s, vec![Some(1), Some(0)]);
    }

    #[test]
    fn standardize_train_only() {
        let ds = gen_mixture(&MixtureConfig::default()).unwrap();
        let (mut train, mut test) = split(&ds, 0.8, 9).unwrap();
        let std = Standardizer::fit(&train);
        std.apply(&mut train);
        std.apply(&mut test);
        let (rows, cols) = train.features.shape();
        for j in 0..cols {
            let mean: f64 = (0..rows).map(|i| train.features.get(i, j)).sum::<f64>() / rows as f64;
            let var: f64 =
                (0..rows).map(|i| train.features.get(i, j).powi(2)).sum::<f64>() / rows as f64
                    - mean * mean;
            assert!(mean.abs() < 1e-9, "column {j} mean {mean}");
            assert!((var.sqrt() - 1.0).abs() < 1e-9, "column {j} std {}", var.sqrt());
        }
        // Test-split statistics never influence the fitted parameters.
        let refit = Standardizer::fit(&test);
        assert_ne!(refit, std);
    }

    #[test]
    fn standardize_constant_column_to_zero() {
        let mut ds = LabeledDataset {
            features: Tensor::new(3, 2, vec![5.0, 1.0, 5.0, 2.0, 5.0, 3.0]),
            t: vec![0, 1, 0],
            s: vec![Some(0), Some(1), Some(0)],
            n_target: 2,
            m_sensitive: 2,
            split: SplitTag::Train,
            provenance: "test".into(),
        };
        let std = Standardizer::fit(&ds);
        std.apply(&mut ds);
        for i in 0..3 {
            assert_eq!(ds.features.get(i, 0), 0.0);
        }
    }

    #[test]
    fn export_roundtrip_via_schema() {
        let ds = gen_mixture(&MixtureConfig {
            samples_per_component: 5,
            ..MixtureConfig::default()
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mix.csv");
        export_csv(&ds, &path).unwrap();
        let schema = Schema::parse(
            "col x0 feature\ncol x1 feature\ncol t target\ncat t 0 1\ncol s sensitive\ncat s 0 1\n",
            "gen",
        )
        .unwrap();
        let loaded = load_csv(&path, &schema, UnknownCategory::Error).unwrap();
        assert_eq!(loaded.t, ds.t);
        assert_eq!(loaded.s, ds.s);
        assert_eq!(loaded.features, ds.features);
    }
}
