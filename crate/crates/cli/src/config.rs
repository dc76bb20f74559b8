//! Experiment configuration, read from TOML.

use anyhow::{anyhow, bail, Context, Result};
use plastokit::constitutive::ElasticParams;
use plastokit::data::{load_dataset, UniaxialDataset};
use plastokit::path::LoadingPath;
use plastokit::reference::{MultiNlk, MultiNlkParams, SingleNlk, SingleNlkParams};
use plastokit::return_map::SurrogateModel;
use plastokit::trainer::TrainConfig;
use plastokit_fem::{Benchmark, FemConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub material: MaterialConfig,
    pub path: PathConfig,
    /// Evaluation program; derived from `path` when omitted.
    pub test_path: Option<PathConfig>,
    pub data: DataConfig,
    pub surrogate: SurrogateConfig,
    pub train: TrainSection,
    pub fit: FitSection,
    pub fem: FemSection,
    pub evaluate: EvaluateSection,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaterialKind {
    #[default]
    SingleNlk,
    MultiNlk,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    #[default]
    Mixed,
    Isotropic,
    Kinematic,
}

/// Reference material: a tabulated preset with optional per-parameter
/// overrides in `[material.params]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialConfig {
    pub kind: MaterialKind,
    pub preset: Preset,
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug)]
pub enum Reference {
    Single(SingleNlk),
    Multi(MultiNlk),
}

/// Run `$body` with `$m` bound to the concrete reference model.
#[macro_export]
macro_rules! with_reference {
    ($r:expr, $m:ident => $body:expr) => {
        match $r {
            $crate::config::Reference::Single($m) => $body,
            $crate::config::Reference::Multi($m) => $body,
        }
    };
}

impl Reference {
    pub fn elastic(&self) -> ElasticParams {
        match self {
            Reference::Single(m) => ElasticParams { e: m.p.e, nu: m.p.nu },
            Reference::Multi(m) => ElasticParams { e: m.p.e, nu: m.p.nu },
        }
    }

    pub fn sigma_y(&self) -> f64 {
        match self {
            Reference::Single(m) => m.p.sigma_y,
            Reference::Multi(m) => m.p.k,
        }
    }
}

fn patch<T: Serialize + DeserializeOwned>(base: T, over: &BTreeMap<String, serde_json::Value>) -> Result<T> {
    let mut v = serde_json::to_value(base)?;
    let obj = v.as_object_mut().expect("parameter structs serialize to objects");
    for (k, x) in over {
        match obj.get_mut(k) {
            Some(slot) => *slot = x.clone(),
            None => bail!("unknown material parameter `{k}` (expected one of {:?})", obj.keys().collect::<Vec<_>>()),
        }
    }
    serde_json::from_value(v).context("material parameter of the wrong type")
}

impl MaterialConfig {
    pub fn build(&self) -> Result<Reference> {
        Ok(match self.kind {
            MaterialKind::SingleNlk => {
                let base = match self.preset {
                    Preset::Mixed => SingleNlkParams::table(),
                    Preset::Isotropic => SingleNlkParams::isotropic_only(),
                    Preset::Kinematic => SingleNlkParams::kinematic_only(),
                };
                Reference::Single(SingleNlk { p: patch(base, &self.params)? })
            }
            MaterialKind::MultiNlk => {
                if self.preset != Preset::Mixed {
                    bail!("multi-nlk material has no `{:?}` preset", self.preset);
                }
                Reference::Multi(MultiNlk { p: patch(MultiNlkParams::table(), &self.params)? })
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    /// Three pulls to `amplitude` with two reversals.
    #[default]
    Training,
    /// Training program plus two further reversals.
    Testing,
    /// Fully reversed cycles of growing `amplitudes`.
    Ascending,
    /// Explicit `(target, increments)` pairs.
    Segments,
    /// One increment per sample of the dataset.
    Data,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    pub kind: PathKind,
    pub amplitude: f64,
    /// Increments per branch of length `amplitude`.
    pub increments: usize,
    pub amplitudes: Vec<f64>,
    pub increments_per_unit_strain: f64,
    pub segments: Vec<(f64, usize)>,
    /// Keep only the first segments.
    pub prefix: Option<usize>,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            kind: PathKind::Training,
            amplitude: 0.0125,
            increments: 125,
            amplitudes: vec![0.002, 0.004, 0.006, 0.008, 0.01],
            increments_per_unit_strain: 10_000.0,
            segments: Vec::new(),
            prefix: None,
        }
    }
}

impl PathConfig {
    pub fn build(&self, data: Option<&UniaxialDataset>) -> Result<LoadingPath> {
        let full = match self.kind {
            PathKind::Training => LoadingPath::cyclic_training(self.amplitude, self.increments),
            PathKind::Testing => LoadingPath::cyclic_testing(self.amplitude, self.increments),
            PathKind::Ascending => LoadingPath::ascending(&self.amplitudes, self.increments_per_unit_strain),
            PathKind::Segments => LoadingPath::new(self.segments.clone())?,
            PathKind::Data => {
                let d = data.ok_or_else(|| anyhow!("path kind `data` needs a dataset"))?;
                LoadingPath::from_strains(&d.eps)?
            }
        };
        Ok(match self.prefix {
            Some(n) => full.prefix(n)?,
            None => full,
        })
    }

    /// Default evaluation program that continues this one.
    pub fn continuation(&self) -> Option<PathConfig> {
        match self.kind {
            PathKind::Training => Some(PathConfig { kind: PathKind::Testing, ..self.clone() }),
            PathKind::Ascending if self.prefix.is_some() => Some(PathConfig { prefix: None, ..self.clone() }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// CSV with `eps11,sig11` columns; synthesized from the material when
    /// absent.
    pub file: Option<PathBuf>,
    /// Gaussian stress noise, standard deviation relative to the yield stress.
    pub noise: f64,
    /// Noise seed; the run seed when absent.
    pub noise_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    /// Elastic constants and yield stress; taken from the material when absent.
    pub e: Option<f64>,
    pub nu: Option<f64>,
    pub sigma_y: Option<f64>,
    pub c0: f64,
    pub c_scale: f64,
    pub iso_input_scale: f64,
    pub kin_input_scale: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            e: None,
            nu: None,
            sigma_y: None,
            c0: 30.0,
            c_scale: 100.0,
            iso_input_scale: 100.0,
            kin_input_scale: 1.0,
        }
    }
}

impl SurrogateConfig {
    pub fn build(&self, reference: &Reference, seed: u64) -> SurrogateModel {
        let el = reference.elastic();
        let elastic = ElasticParams { e: self.e.unwrap_or(el.e), nu: self.nu.unwrap_or(el.nu) };
        let mut m = SurrogateModel::new(elastic, self.sigma_y.unwrap_or(reference.sigma_y()), self.c0, seed);
        m.c_scale = self.c_scale;
        m.iso.input_scale = self.iso_input_scale;
        m.kin.input_scale = self.kin_input_scale;
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub iterations: usize,
    pub lr_net: f64,
    pub lr_material: f64,
    pub weight_decay: f64,
    /// Independent runs with seeds `seed, seed + 1, …`.
    pub runs: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            iterations: t.iterations,
            lr_net: t.lr_net,
            lr_material: t.lr_material,
            weight_decay: t.weight_decay,
            runs: 1,
        }
    }
}

impl TrainSection {
    pub fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            iterations: self.iterations,
            lr_net: self.lr_net,
            lr_material: self.lr_material,
            weight_decay: self.weight_decay,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub iterations: usize,
    pub lr: f64,
    pub runs: usize,
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection { iterations: 600, lr: 1e-2, runs: 10 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FemModel {
    #[default]
    Reference,
    Surrogate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FemSection {
    pub benchmark: Benchmark,
    pub u0: Option<f64>,
    pub n_increments: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub divisions: Option<[usize; 3]>,
    pub model: FemModel,
    /// Trained snapshot; a freshly initialized surrogate when absent.
    pub surrogate: Option<PathBuf>,
}

impl Default for FemSection {
    fn default() -> Self {
        let p = FemConfig::punch();
        FemSection {
            benchmark: Benchmark::Punch,
            u0: None,
            n_increments: p.n_increments,
            max_iterations: p.max_iterations,
            tolerance: p.tolerance,
            divisions: None,
            model: FemModel::Reference,
            surrogate: None,
        }
    }
}

impl FemSection {
    pub fn config(&self) -> FemConfig {
        let base = match self.benchmark {
            Benchmark::Punch => FemConfig::punch(),
            Benchmark::Cook => FemConfig::cook(),
        };
        FemConfig {
            u0: self.u0.unwrap_or(base.u0),
            n_increments: self.n_increments,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            divisions: self.divisions.unwrap_or(base.divisions),
            ..base
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    /// Trained snapshot; `model.json` in the output directory when absent.
    pub model: Option<PathBuf>,
}

/// Resolve `p` against the directory of the configuration file.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn load_data(cfg: &ExperimentConfig, base: &Path, reference: &Reference, seed: u64) -> Result<UniaxialDataset> {
    match &cfg.data.file {
        Some(f) => {
            let p = resolve(base, f);
            load_dataset(&p).with_context(|| format!("loading {}", p.display()))
        }
        None => {
            let path = cfg.path.build(None)?;
            let noise_seed = cfg.data.noise_seed.unwrap_or(seed);
            Ok(with_reference!(reference, m => plastokit::reference::generate_uniaxial_dataset(&path, m, cfg.data.noise, noise_seed))?)
        }
    }
}
