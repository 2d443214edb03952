//! Run configuration: a flat `key = value` file, overridden by flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use morphcx::corpus::{Regime, SplitSpec};
use morphcx::strmodel::TrainConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Raised for bad configuration or a missing required setting.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

/// Everything a pipeline run depends on.
///
/// `out_dir` and `threads` change where and how fast results are produced,
/// never what they are, so they are left out of the hash.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub language: Option<String>,
    pub data: Option<PathBuf>,
    pub synth: Option<PathBuf>,
    /// Paradigms sampled from `synth`; default fills train, dev and test.
    pub synth_count: Option<usize>,
    pub scores: Option<PathBuf>,
    pub pos: Option<String>,
    pub regime: Regime,
    pub paradigm_count: usize,
    pub pair_count: usize,
    pub dev_paradigms: usize,
    pub test_paradigms: usize,
    pub order: usize,
    pub alpha: f64,
    pub lambda_grid: Vec<f64>,
    pub n_perm: usize,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let split = SplitSpec::new(Regime::Purple, 0);
        let train = TrainConfig::default();
        RunConfig {
            language: None,
            data: None,
            synth: None,
            synth_count: None,
            scores: None,
            pos: None,
            regime: split.regime,
            paradigm_count: split.paradigm_count,
            pair_count: split.pair_count,
            dev_paradigms: split.dev_paradigms,
            test_paradigms: split.test_paradigms,
            order: train.order,
            alpha: train.alpha,
            lambda_grid: train.lambda_grid,
            n_perm: 10_000,
            seed: None,
            out_dir: PathBuf::from("out"),
            threads: 0,
        }
    }
}

/// Flags mirroring the config keys. Anything given here wins over the file.
#[derive(Args, Clone, Debug, Default)]
pub struct ConfigArgs {
    /// Language id recorded in outputs (default: data file stem).
    #[arg(long, global = true)]
    pub language: Option<String>,
    /// UniMorph TSV lexicon.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Synthetic system JSON, used instead of --data.
    #[arg(long, global = true)]
    pub synth: Option<PathBuf>,
    /// Paradigms to sample from --synth.
    #[arg(long, global = true)]
    pub synth_count: Option<usize>,
    /// Precomputed conditional scores (TSV) replacing the reference model.
    #[arg(long, global = true)]
    pub scores: Option<PathBuf>,
    /// Keep only slots of this part of speech.
    #[arg(long, global = true)]
    pub pos: Option<String>,
    /// purple (fixed paradigm count) or green (fixed pair count).
    #[arg(long, global = true)]
    pub regime: Option<Regime>,
    #[arg(long, global = true)]
    pub paradigm_count: Option<usize>,
    #[arg(long, global = true)]
    pub pair_count: Option<usize>,
    #[arg(long, global = true)]
    pub dev_paradigms: Option<usize>,
    #[arg(long, global = true)]
    pub test_paradigms: Option<usize>,
    /// Character n-gram order.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Add-alpha smoothing.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Comma-separated interpolation weights tried on dev data.
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    /// Permutations for the significance test.
    #[arg(long, global = true)]
    pub n_perm: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores). Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Defaults, then the file (if any), then flags.
    pub fn resolve(file: Option<&Path>, args: &ConfigArgs) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            cfg.apply_file(&text)
                .with_context(|| format!("in config {}", path.display()))?;
        }
        cfg.apply_args(args);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(ConfigError(format!("line {}: expected key = value", no + 1)));
            };
            self.set(key.trim(), value.trim())
                .map_err(|e| ConfigError(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse().map_err(|e| format!("bad value {v:?}: {e}"))
        }
        match key.replace('-', "_").as_str() {
            "language" => self.language = Some(value.to_string()),
            "data" => self.data = Some(value.into()),
            "synth" => self.synth = Some(value.into()),
            "synth_count" => self.synth_count = Some(num(value)?),
            "scores" => self.scores = Some(value.into()),
            "pos" => self.pos = Some(value.to_string()),
            "regime" => self.regime = value.parse().map_err(|e| format!("{e}"))?,
            "paradigm_count" => self.paradigm_count = num(value)?,
            "pair_count" => self.pair_count = num(value)?,
            "dev_paradigms" => self.dev_paradigms = num(value)?,
            "test_paradigms" => self.test_paradigms = num(value)?,
            "order" | "k" => self.order = num(value)?,
            "alpha" => self.alpha = num(value)?,
            "lambda_grid" => {
                self.lambda_grid = value
                    .split(',')
                    .map(|v| num(v.trim()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "n_perm" => self.n_perm = num(value)?,
            "seed" => self.seed = Some(num(value)?),
            "out_dir" => self.out_dir = value.into(),
            "threads" => self.threads = num(value)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    pub fn apply_args(&mut self, a: &ConfigArgs) {
        macro_rules! over {
            ($($f:ident),*) => { $( if let Some(v) = &a.$f { self.$f = v.clone(); } )* };
        }
        macro_rules! over_opt {
            ($($f:ident),*) => { $( if a.$f.is_some() { self.$f = a.$f.clone(); } )* };
        }
        over_opt!(language, data, synth, synth_count, scores, pos, seed);
        over!(
            regime,
            paradigm_count,
            pair_count,
            dev_paradigms,
            test_paradigms,
            order,
            alpha,
            lambda_grid,
            n_perm,
            out_dir,
            threads
        );
    }

    fn validate(&self) -> Result<()> {
        self.train_config().validate().map_err(|e| ConfigError(e.to_string()))?;
        if self.data.is_some() && self.synth.is_some() {
            bail!(ConfigError("give either data or synth, not both".into()));
        }
        if self.n_perm == 0 {
            bail!(ConfigError("n_perm must be >= 1".into()));
        }
        Ok(())
    }

    /// The seed, or an error naming the command that needs one.
    pub fn require_seed(&self, command: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| ConfigError(format!("{command} is stochastic: --seed (or seed = ...) is required")).into())
    }

    pub fn synth_count(&self) -> usize {
        self.synth_count
            .unwrap_or(self.paradigm_count + self.dev_paradigms + self.test_paradigms)
    }

    pub fn split_spec(&self, seed: u64) -> SplitSpec {
        SplitSpec {
            regime: self.regime,
            paradigm_count: self.paradigm_count,
            pair_count: self.pair_count,
            dev_paradigms: self.dev_paradigms,
            test_paradigms: self.test_paradigms,
            seed,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            order: self.order,
            alpha: self.alpha,
            lambda_grid: self.lambda_grid.clone(),
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
