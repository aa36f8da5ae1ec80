use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::PipelineError;
use crate::dataset::{TagFilter, Task, DEFAULT_EXCLUSIONS, DEFAULT_LEMMA_CAP};
use crate::fst::DEFAULT_MAX_PATH_LEN;
use crate::rng::DEFAULT_SEED;
use crate::seq2seq::{HyperParams, Optimizer, Profile, TrainConfig};

/// Resolved pipeline settings. Training fields left unset fall back to the
/// profile's schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub analyzer: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub lemma_cap: usize,
    pub exclusions: Vec<String>,
    pub filter: TagFilter,
    pub max_path_len: usize,
    pub profile: Profile,
    pub tasks: Vec<Task>,
    pub n_best: usize,
    pub top_k: usize,
    pub min_support: usize,
    pub steps: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub valid_interval: Option<usize>,
    pub optimizer: Option<Optimizer>,
    pub embedding: Option<usize>,
    pub hidden: Option<usize>,
    pub layers: Option<usize>,
    pub dropout: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            analyzer: None,
            lexicon: None,
            out: PathBuf::from("out"),
            seed: DEFAULT_SEED,
            lemma_cap: DEFAULT_LEMMA_CAP,
            exclusions: DEFAULT_EXCLUSIONS.iter().map(|s| s.to_string()).collect(),
            filter: TagFilter::default(),
            max_path_len: DEFAULT_MAX_PATH_LEN,
            profile: Profile::Desk,
            tasks: Task::ALL.to_vec(),
            n_best: 1,
            top_k: 10,
            min_support: 1,
            steps: None,
            batch_size: None,
            learning_rate: None,
            valid_interval: None,
            optimizer: None,
            embedding: None,
            hidden: None,
            layers: None,
            dropout: None,
        }
    }
}

pub const CONFIG_KEYS: [&str; 23] = [
    "analyzer",
    "lexicon",
    "out",
    "seed",
    "lemma_cap",
    "exclusions",
    "drop_tags",
    "strip_tags",
    "max_path_len",
    "profile",
    "tasks",
    "n_best",
    "top_k",
    "min_support",
    "steps",
    "batch_size",
    "learning_rate",
    "valid_interval",
    "optimizer",
    "embedding",
    "hidden",
    "layers",
    "dropout",
];

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn number<N: std::str::FromStr>(key: &str, value: &str) -> Result<N, PipelineError> {
    value
        .parse()
        .map_err(|_| PipelineError::Usage(format!("{key}: invalid number {value:?}")))
}

fn positive(key: &str, value: &str) -> Result<usize, PipelineError> {
    let n: usize = number(key, value)?;
    if n == 0 {
        return Err(PipelineError::Usage(format!("{key} must be positive")));
    }
    Ok(n)
}

impl PipelineConfig {
    /// Sets one key. Relative paths are resolved against `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), PipelineError> {
        let path = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let usage = |m: String| PipelineError::Usage(m);
        match key {
            "analyzer" => self.analyzer = Some(path(value)),
            "lexicon" => self.lexicon = Some(path(value)),
            "out" => self.out = path(value),
            "seed" => {
                self.seed = number(key, value)?;
                if self.seed == 0 {
                    return Err(usage("seed must be positive".into()));
                }
            }
            "lemma_cap" => self.lemma_cap = positive(key, value)?,
            "exclusions" => self.exclusions = list(value),
            "drop_tags" => self.filter.drop = list(value),
            "strip_tags" => self.filter.strip = list(value),
            "max_path_len" => self.max_path_len = positive(key, value)?,
            "profile" => self.profile = value.parse().map_err(usage)?,
            "tasks" => {
                self.tasks = list(value)
                    .iter()
                    .map(|t| t.parse::<Task>())
                    .collect::<Result<_, _>>()
                    .map_err(usage)?;
                if self.tasks.is_empty() {
                    return Err(usage("tasks must not be empty".into()));
                }
            }
            "n_best" => self.n_best = positive(key, value)?,
            "top_k" => self.top_k = positive(key, value)?,
            "min_support" => self.min_support = positive(key, value)?,
            "steps" => self.steps = Some(number(key, value)?),
            "batch_size" => self.batch_size = Some(positive(key, value)?),
            "learning_rate" => self.learning_rate = Some(number(key, value)?),
            "valid_interval" => self.valid_interval = Some(positive(key, value)?),
            "optimizer" => self.optimizer = Some(value.parse().map_err(usage)?),
            "embedding" => self.embedding = Some(positive(key, value)?),
            "hidden" => self.hidden = Some(positive(key, value)?),
            "layers" => self.layers = Some(positive(key, value)?),
            "dropout" => self.dropout = Some(number(key, value)?),
            other => return Err(usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and lines starting with `#`
    /// are ignored.
    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut config = PipelineConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(PipelineError::Usage(format!(
                    "config line {}: expected `key = value`",
                    i + 1
                )));
            };
            config.set(key.trim(), value.trim(), base)?;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// The profile schedule with any explicit overrides applied.
    pub fn train_config(&self) -> TrainConfig {
        let mut c = self.profile.train_config();
        if let Some(v) = self.steps {
            c.steps = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = self.valid_interval {
            c.valid_interval = v;
        }
        if let Some(v) = self.optimizer {
            c.optimizer = v;
        }
        c
    }

    /// The profile architecture with any explicit overrides applied.
    pub fn hyper(&self) -> HyperParams {
        let mut h = self.profile.hyper();
        if let Some(v) = self.embedding {
            h.embedding = v;
        }
        if let Some(v) = self.hidden {
            h.hidden = v;
        }
        if let Some(v) = self.layers {
            h.layers = v;
        }
        if let Some(v) = self.dropout {
            h.dropout = v;
        }
        h
    }

    pub fn data_dir(&self) -> PathBuf {
        self.out.join("data")
    }

    pub fn models_dir(&self) -> PathBuf {
        self.out.join("models")
    }

    pub fn eval_dir(&self) -> PathBuf {
        self.out.join("eval")
    }

    pub fn checkpoint_path(&self, task: Task) -> PathBuf {
        self.models_dir().join(format!("{task}.ckpt"))
    }

    /// Every setting as strings, for manifests.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map_or(String::new(), |p| p.display().to_string())
        };
        let train = self.train_config();
        let hyper = self.hyper();
        let optimizer = match train.optimizer {
            Optimizer::Sgd => "sgd",
            Optimizer::Adam => "adam",
        };
        let tasks: Vec<&str> = self.tasks.iter().map(|t| t.name()).collect();
        [
            ("analyzer", path(&self.analyzer)),
            ("lexicon", path(&self.lexicon)),
            ("out", self.out.display().to_string()),
            ("seed", self.seed.to_string()),
            ("lemma_cap", self.lemma_cap.to_string()),
            ("exclusions", self.exclusions.join(",")),
            ("drop_tags", self.filter.drop.join(",")),
            ("strip_tags", self.filter.strip.join(",")),
            ("max_path_len", self.max_path_len.to_string()),
            ("profile", self.profile.to_string()),
            ("tasks", tasks.join(",")),
            ("n_best", self.n_best.to_string()),
            ("top_k", self.top_k.to_string()),
            ("min_support", self.min_support.to_string()),
            ("steps", train.steps.to_string()),
            ("batch_size", train.batch_size.to_string()),
            ("learning_rate", train.learning_rate.to_string()),
            ("valid_interval", train.valid_interval.to_string()),
            ("optimizer", optimizer.to_string()),
            ("embedding", hyper.embedding.to_string()),
            ("hidden", hyper.hidden.to_string()),
            ("layers", hyper.layers.to_string()),
            ("dropout", hyper.dropout.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}
