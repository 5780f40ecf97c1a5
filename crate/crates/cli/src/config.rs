//! Experiment configuration files.
//!
//! A configuration is a TOML document with a `master_seed`, exactly one model
//! block, a `[sampler]` block and an optional `[output]` block. Unknown keys
//! are rejected. See `configs/SCHEMA.md` for the full schema.

use std::path::{Path, PathBuf};

use exchange_core::{Algorithm, ParamPoint};
use serde::Deserialize;

use crate::HarnessError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub model: ModelConfig,
    pub sampler: SamplerBlock,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum ModelConfig {
    Gaussian(GaussianConfig),
    Ising(IsingConfig),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianConfig {
    pub alpha: f64,
    pub beta: f64,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingConfig {
    pub width: usize,
    pub height: usize,
    /// Lattice text file, relative to the working directory.
    pub data_file: Option<PathBuf>,
    pub generate: Option<GenerateConfig>,
    /// Sweep budget for each exact draw; chains that exceed it fail their row.
    pub cftp_max_sweeps: Option<u64>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub theta_j: f64,
    pub theta_h: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// A parameter value or list of values. For scalar parameters a flat list is
/// a sweep; for vector parameters a flat list is a single point and a list of
/// lists is a sweep.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Scalar(f64),
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

impl ThetaSpec {
    pub fn points(&self, dim: usize) -> Vec<ParamPoint> {
        match self {
            ThetaSpec::Scalar(v) => vec![ParamPoint::scalar(*v)],
            ThetaSpec::Flat(vs) if dim == 1 => vs.iter().map(|&v| ParamPoint::scalar(v)).collect(),
            ThetaSpec::Flat(vs) => vec![ParamPoint::new(vs.clone())],
            ThetaSpec::Nested(vs) => vs.iter().map(|v| ParamPoint::new(v.clone())).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProposalKind {
    /// Independent draws from the conjugate posterior (Gaussian model only).
    Posterior,
    RandomWalk,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProposalConfig {
    pub kind: ProposalKind,
    pub width: Option<OneOrMany<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerBlock {
    pub algorithms: Vec<String>,
    /// Bridging levels, used by `mavm` and `exchange-bridged` only.
    #[serde(default)]
    pub k: Option<OneOrMany<usize>>,
    /// Used by `savm` and `mavm` only. Defaults to the pseudo-likelihood
    /// estimate for the Ising model.
    #[serde(default)]
    pub theta_hat: Option<ThetaSpec>,
    pub proposal: ProposalConfig,
    pub iterations: usize,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "one")]
    pub n_replicates: usize,
    #[serde(default)]
    pub initial_theta: Option<ThetaSpec>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Written to standard output when absent.
    pub csv: Option<PathBuf>,
    /// Also write every replicate's trace.
    #[serde(default)]
    pub detail: bool,
}

/// Parses a configuration document, applying `key.path=value` overrides first.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<ExperimentConfig, HarnessError> {
    let config: ExperimentConfig = if overrides.is_empty() {
        toml::from_str(text).map_err(|e| HarnessError::Validation(e.to_string()))?
    } else {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| HarnessError::Validation(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        table
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Validation(e.to_string()))?
    };
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text, overrides).map_err(|e| match e {
        HarnessError::Validation(m) => HarnessError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Sets a dotted key to a TOML value, creating intermediate tables. Values
/// that do not parse as TOML are taken as strings.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), HarnessError> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| {
        HarnessError::Validation(format!(
            "override {assignment:?} is not of the form key.path=value"
        ))
    })?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(HarnessError::Validation(format!(
            "override {assignment:?} has an empty key"
        )));
    }
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_owned()));

    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut node = table;
    for (i, key) in parents.iter().enumerate() {
        let entry = node
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry.as_table_mut().ok_or_else(|| {
            HarnessError::Validation(format!(
                "override {path}: {} is not a table",
                keys[..=i].join(".")
            ))
        })?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Validation(format!("{path}: {msg}"))
}

impl ExperimentConfig {
    pub fn param_dim(&self) -> usize {
        match self.model {
            ModelConfig::Gaussian(_) => 1,
            ModelConfig::Ising(_) => 2,
        }
    }

    pub fn algorithms(&self) -> Result<Vec<Algorithm>, HarnessError> {
        self.sampler
            .algorithms
            .iter()
            .enumerate()
            .map(|(i, name)| {
                name.parse()
                    .map_err(|e| invalid(&format!("sampler.algorithms[{i}]"), e))
            })
            .collect()
    }

    pub fn levels(&self) -> Vec<usize> {
        self.sampler.k.as_ref().map_or(vec![0], OneOrMany::to_vec)
    }

    pub fn theta_hats(&self) -> Option<Vec<ParamPoint>> {
        self.sampler
            .theta_hat
            .as_ref()
            .map(|t| t.points(self.param_dim()))
    }

    pub fn widths(&self) -> Vec<f64> {
        self.sampler
            .proposal
            .width
            .as_ref()
            .map_or(vec![], OneOrMany::to_vec)
    }

    pub fn initial_theta(&self) -> Option<ParamPoint> {
        self.sampler
            .initial_theta
            .as_ref()
            .map(|t| t.points(self.param_dim()).remove(0))
    }

    /// Semantic checks that the document structure alone cannot express.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let dim = self.param_dim();
        let is_ising = matches!(self.model, ModelConfig::Ising(_));
        match &self.model {
            ModelConfig::Gaussian(g) => {
                exchange_core::GaussianPrecisionModel::new(g.alpha, g.beta, g.data.clone())
                    .map_err(|e| invalid("model.gaussian", e))?;
            }
            ModelConfig::Ising(c) => {
                if c.width == 0 || c.height == 0 {
                    return Err(invalid("model.ising", "width and height must be positive"));
                }
                if c.cftp_max_sweeps == Some(0) {
                    return Err(invalid("model.ising.cftp_max_sweeps", "must be at least 1"));
                }
                match (&c.data_file, &c.generate) {
                    (Some(_), Some(_)) | (None, None) => {
                        return Err(invalid(
                            "model.ising",
                            "exactly one of data_file and generate is required",
                        ))
                    }
                    (None, Some(g))
                        if g.theta_j.is_nan()
                            || g.theta_j < 0.0
                            || !g.theta_j.is_finite()
                            || !g.theta_h.is_finite() =>
                    {
                        return Err(invalid(
                            "model.ising.generate",
                            "theta_j must be finite and >= 0 and theta_h finite",
                        ));
                    }
                    _ => {}
                }
            }
        }

        let s = &self.sampler;
        let algorithms = self.algorithms()?;
        if algorithms.is_empty() {
            return Err(invalid(
                "sampler.algorithms",
                "at least one algorithm is required",
            ));
        }
        for (i, alg) in algorithms.iter().enumerate() {
            if is_ising && *alg == Algorithm::ExactZMh {
                return Err(invalid(
                    &format!("sampler.algorithms[{i}]"),
                    "exact-z-mh needs a known normalizer and is only available for the gaussian model",
                ));
            }
        }
        if let Some(OneOrMany::Many(ks)) = &s.k {
            if ks.is_empty() {
                return Err(invalid("sampler.k", "list must not be empty"));
            }
        }
        match self.theta_hats() {
            Some(points) => {
                if points.is_empty() {
                    return Err(invalid("sampler.theta_hat", "list must not be empty"));
                }
                for (i, p) in points.iter().enumerate() {
                    p.validate(dim)
                        .map_err(|e| invalid(&format!("sampler.theta_hat[{i}]"), e))?;
                    if is_ising && p[0] < 0.0 {
                        return Err(invalid(
                            &format!("sampler.theta_hat[{i}]"),
                            "theta_J must be >= 0 for exact sampling",
                        ));
                    }
                    if !is_ising && p[0] <= 0.0 {
                        return Err(invalid(
                            &format!("sampler.theta_hat[{i}]"),
                            "precision must be positive",
                        ));
                    }
                }
            }
            None if !is_ising && algorithms.iter().any(|a| a.uses_theta_hat()) => {
                return Err(invalid(
                    "sampler.theta_hat",
                    "required by savm and mavm for the gaussian model",
                ));
            }
            None => {}
        }
        match s.proposal.kind {
            ProposalKind::Posterior => {
                if is_ising {
                    return Err(invalid(
                        "sampler.proposal.kind",
                        "posterior proposals are only available for the gaussian model",
                    ));
                }
                if s.proposal.width.is_some() {
                    return Err(invalid(
                        "sampler.proposal.width",
                        "not used by posterior proposals",
                    ));
                }
            }
            ProposalKind::RandomWalk => {
                let widths = self.widths();
                if widths.is_empty() {
                    return Err(invalid(
                        "sampler.proposal.width",
                        "required by random-walk proposals",
                    ));
                }
                for (i, w) in widths.iter().enumerate() {
                    if !(*w > 0.0 && w.is_finite()) {
                        return Err(invalid(
                            &format!("sampler.proposal.width[{i}]"),
                            "must be positive",
                        ));
                    }
                }
            }
        }
        if s.n_replicates == 0 {
            return Err(invalid("sampler.n_replicates", "must be at least 1"));
        }
        if s.iterations < s.burn_in + 10 {
            return Err(invalid(
                "sampler.iterations",
                "must exceed burn_in by at least 10 for effective sample size estimates",
            ));
        }
        if let Some(init) = &s.initial_theta {
            let points = init.points(dim);
            if points.len() != 1 {
                return Err(invalid("sampler.initial_theta", "must be a single point"));
            }
            points[0]
                .validate(dim)
                .map_err(|e| invalid("sampler.initial_theta", e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAUSSIAN: &str = r#"
master_seed = 1
[model.gaussian]
alpha = 1
beta = 1.0
data = [1.0]
[sampler]
algorithms = ["savm", "exchange"]
theta_hat = 1
proposal = { kind = "posterior" }
iterations = 100
"#;

    #[test]
    fn parses_minimal_gaussian() {
        let c = parse_config(GAUSSIAN, &[]).unwrap();
        assert_eq!(c.levels(), vec![0]);
        assert_eq!(c.sampler.n_replicates, 1);
        assert_eq!(c.theta_hats().unwrap(), vec![ParamPoint::scalar(1.0)]);
        assert!(c.output.csv.is_none());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = GAUSSIAN.replace("iterations", "iteratons");
        let err = parse_config(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("iteratons"), "{err}");
        let err = parse_config(GAUSSIAN, &["sampler.seed=3".into()])
            .unwrap_err()
            .to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn overrides() {
        let c = parse_config(
            GAUSSIAN,
            &[
                "sampler.iterations=500".into(),
                "sampler.k=[1, 2]".into(),
                "output.csv=out.csv".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.sampler.iterations, 500);
        assert_eq!(c.levels(), vec![1, 2]);
        assert_eq!(c.output.csv, Some(PathBuf::from("out.csv")));
        assert!(parse_config(GAUSSIAN, &["noequals".into()]).is_err());
        assert!(parse_config(GAUSSIAN, &["master_seed.x=1".into()]).is_err());
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let cases = [
            ("sampler.theta_hat=-1.0", "sampler.theta_hat[0]"),
            ("sampler.algorithms=[\"gibbs\"]", "sampler.algorithms[0]"),
            ("sampler.n_replicates=0", "sampler.n_replicates"),
            ("sampler.burn_in=95", "sampler.iterations"),
            (
                "sampler.proposal={kind=\"random-walk\"}",
                "sampler.proposal.width",
            ),
            (
                "sampler.proposal={kind=\"random-walk\", width=[0.1, 0]}",
                "sampler.proposal.width[1]",
            ),
            ("model.gaussian.alpha=0", "model.gaussian"),
        ];
        for (o, field) in cases {
            let err = parse_config(GAUSSIAN, &[o.into()]).unwrap_err().to_string();
            assert!(err.starts_with(field), "{o}: {err}");
        }
        let no_hat = GAUSSIAN.replace("theta_hat = 1", "");
        assert!(parse_config(&no_hat, &[])
            .unwrap_err()
            .to_string()
            .starts_with("sampler.theta_hat"));
    }

    #[test]
    fn exactly_one_model_block() {
        let both = GAUSSIAN.replace(
            "[sampler]",
            "[model.ising]\nwidth = 3\nheight = 3\ndata_file = \"x\"\n[sampler]",
        );
        assert!(parse_config(&both, &[]).is_err());
        let none = GAUSSIAN.replace("[model.gaussian]", "[unused]");
        assert!(parse_config(&none, &[]).is_err());
    }

    #[test]
    fn ising_points() {
        let text = r#"
master_seed = 1
[model.ising]
width = 4
height = 4
generate = { theta_j = 0.3, theta_h = 0.0, seed = 2 }
[sampler]
algorithms = ["savm", "exchange"]
theta_hat = [0.3, 0.0]
proposal = { kind = "random-walk", width = 0.01 }
iterations = 100
"#;
        let c = parse_config(text, &[]).unwrap();
        assert_eq!(
            c.theta_hats().unwrap(),
            vec![ParamPoint::new(vec![0.3, 0.0])]
        );
        let c = parse_config(text, &["sampler.theta_hat=[[0.3, 0.0], [0.2, 0.1]]".into()]).unwrap();
        assert_eq!(c.theta_hats().unwrap().len(), 2);
        assert!(parse_config(text, &["sampler.theta_hat=[0.3]".into()]).is_err());
        assert!(parse_config(text, &["sampler.algorithms=[\"exact-z-mh\"]".into()]).is_err());
        assert!(parse_config(text, &["sampler.proposal={kind=\"posterior\"}".into()]).is_err());
        assert!(parse_config(text, &["model.ising.data_file=\"y.txt\"".into()]).is_err());
        let no_hat = text.replace("theta_hat = [0.3, 0.0]", "");
        assert!(parse_config(&no_hat, &[]).is_ok());
    }
}
