//! Run configuration file (TOML).
//!
//! Every section is optional; omitted fields take their defaults. Relative
//! paths inside the file are resolved against the file's directory.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::{DesignPoint, DesignSpace, SamplingMethod, SpaceSize};
use crate::losses::{CollocationConfig, LossWeights, Physics};
use crate::operator::{uniform_boundaries, NetArch, Normalization, OperatorConfig, DEFAULT_BOUNDARIES};
use crate::par::Parallelism;
use crate::process::PropertyFile;
use crate::solver::Grid1D;
use crate::train::{TrainPlan, TrainSetup};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSection {
    pub space: SpaceSize,
    /// Fraction of each range kept about its midpoint.
    pub narrow: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub sampling: SamplingMethod,
    pub cool_down: bool,
}

impl Default for DesignSection {
    fn default() -> Self {
        DesignSection {
            space: SpaceSize::Small,
            narrow: 1.0,
            n_train: 500,
            n_test: 20,
            sampling: SamplingMethod::Uniform,
            cool_down: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    /// Property file; the built-in defaults are used when absent.
    pub properties: Option<PathBuf>,
    /// `false` sets the heat of reaction to zero (the linear sub-problem).
    pub heat_generation: bool,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        PhysicsSection {
            properties: None,
            heat_generation: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorSection {
    pub q: usize,
    pub hidden_layers: usize,
    pub width: usize,
    /// Explicit subdomain boundaries; overrides `n_subdomains`.
    pub boundaries: Option<Vec<f64>>,
    /// Uniform partition with this many subdomains.
    pub n_subdomains: Option<usize>,
    pub linear_decoder: bool,
}

impl Default for OperatorSection {
    fn default() -> Self {
        OperatorSection {
            q: 50,
            hidden_layers: 5,
            width: 50,
            boundaries: None,
            n_subdomains: None,
            linear_decoder: false,
        }
    }
}

impl OperatorSection {
    pub fn config(&self) -> OperatorConfig {
        let boundaries = match (&self.boundaries, self.n_subdomains) {
            (Some(b), _) => b.clone(),
            (None, Some(n)) => uniform_boundaries(n),
            (None, None) => DEFAULT_BOUNDARIES.to_vec(),
        };
        let arch = NetArch {
            hidden_layers: self.hidden_layers,
            width: self.width,
        };
        OperatorConfig {
            linear_decoder: self.linear_decoder,
            ..OperatorConfig::uniform(self.q, arch, boundaries)
        }
    }

    /// Same operator with `n` subdomains; the default boundaries are kept when
    /// they already have `n` pieces.
    pub fn with_subdomains(&self, n: usize) -> Self {
        let current = self.config().n_subdomains();
        let mut out = self.clone();
        if current != n {
            out.boundaries = None;
            out.n_subdomains = Some(n);
        }
        out
    }
}

/// Reference-solver grid; the end time is taken from each design's cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub n_tool: usize,
    pub n_part: usize,
    pub dt: f64,
    pub save_every: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let g = Grid1D::with_defaults(1.0);
        SolverSection {
            n_tool: g.n_tool,
            n_part: g.n_part,
            dt: g.dt,
            save_every: g.save_every,
        }
    }
}

impl SolverSection {
    pub fn grid(&self, t_end: f64) -> Grid1D {
        Grid1D {
            n_tool: self.n_tool,
            n_part: self.n_part,
            dt: self.dt,
            save_every: self.save_every,
            ..Grid1D::with_defaults(t_end)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Reference-solution cache; `<out_dir>/reference_cache` when absent.
    pub cache_dir: Option<PathBuf>,
    /// Half-width of the window around the reference exotherm, as a fraction
    /// of the cycle duration.
    pub exotherm_window: f64,
    /// Subdomain counts compared by the domain-decomposition ablation.
    pub ablation_subdomains: Vec<usize>,
    /// Seeds for the curriculum ablation.
    pub ablation_seeds: Vec<u64>,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            cache_dir: None,
            exotherm_window: 0.1,
            ablation_subdomains: vec![1, 5, 7],
            ablation_seeds: vec![1, 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub parallelism: Parallelism,
    pub design: DesignSection,
    pub physics: PhysicsSection,
    pub operator: OperatorSection,
    pub plan: TrainPlan,
    pub weights: LossWeights,
    pub collocation: CollocationConfig,
    pub solver: SolverSection,
    pub eval: EvalSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("runs/default"),
            parallelism: Parallelism::default(),
            design: DesignSection::default(),
            physics: PhysicsSection::default(),
            operator: OperatorSection::default(),
            plan: TrainPlan::default(),
            weights: LossWeights::default(),
            collocation: CollocationConfig::default(),
            solver: SolverSection::default(),
            eval: EvalSection::default(),
        }
    }
}

const TRAIN_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(p) = cfg.physics.properties.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = cfg.eval.cache_dir.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.design.narrow > 0.0 && self.design.narrow <= 1.0) {
            return Err(Error::config("design.narrow must lie in (0, 1]"));
        }
        if self.design.n_train == 0 {
            return Err(Error::config("design.n_train must be positive"));
        }
        if !(self.eval.exotherm_window > 0.0) {
            return Err(Error::config("eval.exotherm_window must be positive"));
        }
        self.design_space()?.validate()?;
        self.operator.config().validate()?;
        self.plan.validate()?;
        self.weights.validate()?;
        self.collocation.validate()?;
        self.solver.grid(1.0).validate()
    }

    pub fn properties(&self) -> Result<PropertyFile> {
        match &self.physics.properties {
            Some(p) => PropertyFile::load(p),
            None => Ok(PropertyFile::default()),
        }
    }

    pub fn physics(&self) -> Result<Physics> {
        let f = self.properties()?;
        let mut props = f.materials();
        if !self.physics.heat_generation {
            props.part.heat_of_reaction = 0.0;
        }
        Ok(Physics {
            props,
            kinetics: f.kinetics,
        })
    }

    pub fn design_space(&self) -> Result<DesignSpace> {
        let base = DesignSpace::named(&self.design.space)?;
        Ok(if self.design.narrow < 1.0 {
            base.narrowed(self.design.narrow, &format!("{}-narrow{}", self.design.space, self.design.narrow))
        } else {
            base
        })
    }

    pub fn normalization(&self) -> Result<Normalization> {
        Ok(Normalization::new(&self.design_space()?, self.design.cool_down))
    }

    fn stream_seed(&self, stream: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng.random()
    }

    pub fn train_designs(&self) -> Result<Vec<DesignPoint>> {
        Ok(self.design_space()?.sample(self.design.n_train, self.stream_seed(TRAIN_STREAM), self.design.sampling))
    }

    pub fn test_designs(&self) -> Result<Vec<DesignPoint>> {
        Ok(self.design_space()?.sample(self.design.n_test, self.stream_seed(TEST_STREAM), self.design.sampling))
    }

    pub fn train_setup(&self, checkpoint_dir: Option<PathBuf>) -> Result<TrainSetup> {
        Ok(TrainSetup {
            physics: self.physics()?,
            weights: self.weights,
            collocation: self.collocation.clone(),
            par: self.parallelism,
            checkpoint_dir,
        })
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.eval.cache_dir.clone().unwrap_or_else(|| self.out_dir.join("reference_cache"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::from_toml_str("").unwrap();
        assert_eq!(c, RunConfig::default());
        c.validate().unwrap();
        assert_eq!(c.operator.config(), OperatorConfig::default());
    }

    #[test]
    fn round_trip_and_unknown_keys() {
        let mut c = RunConfig::default();
        c.seed = 9;
        c.design.narrow = 0.25;
        c.plan.curriculum = vec![1.0];
        c.operator.n_subdomains = Some(3);
        let back = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
        assert!(RunConfig::from_toml_str("[plan]\nlr = 1.0\n").is_err());
        assert!(RunConfig::from_toml_str("[design]\nnarrow = 0.0\n").unwrap().validate().is_err());
    }

    #[test]
    fn train_and_test_designs_differ_but_repeat() {
        let c = RunConfig {
            seed: 3,
            design: DesignSection {
                n_train: 4,
                n_test: 4,
                narrow: 0.5,
                ..DesignSection::default()
            },
            ..RunConfig::default()
        };
        let (a, b) = (c.train_designs().unwrap(), c.test_designs().unwrap());
        assert_ne!(a, b);
        assert_eq!(a, c.train_designs().unwrap());
        let space = c.design_space().unwrap();
        assert!(a.iter().chain(&b).all(|d| space.contains(d)));
    }

    #[test]
    fn subdomain_override() {
        let o = OperatorSection::default();
        assert_eq!(o.with_subdomains(7).config().boundaries, DEFAULT_BOUNDARIES.to_vec());
        assert_eq!(o.with_subdomains(3).config().n_subdomains(), 3);
        assert_eq!(o.with_subdomains(1).config().boundaries, vec![0.0, 1.0]);
    }
}
