use serde::{Deserialize, Serialize};

use crate::losses::Phase;
use crate::{Error, Result};

/// Optimization budget and schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainPlan {
    pub lr0: f64,
    pub decay_rate: f64,
    pub decay_steps: u64,
    /// Interior collocation points per material per optimizer step.
    pub batch_size: usize,
    pub epochs: usize,
    /// Epochs per phase block.
    pub block_epochs: usize,
    /// Number of (temperature, cure) block pairs.
    pub cycles: usize,
    /// Heat-generation scale per curriculum stage.
    pub curriculum: Vec<f64>,
    /// Checkpoint interval in epochs; 0 disables periodic checkpoints.
    pub checkpoint_every: usize,
    /// A phase loss above this multiple of its stage-start value aborts training.
    pub divergence_factor: f64,
}

impl Default for TrainPlan {
    fn default() -> Self {
        TrainPlan {
            lr0: 1e-3,
            decay_rate: 0.9,
            decay_steps: 1000,
            batch_size: 1024,
            epochs: 200,
            block_epochs: 10,
            cycles: 10,
            curriculum: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            checkpoint_every: 10,
            divergence_factor: 1e3,
        }
    }
}

/// A run of consecutive epochs in one phase of one curriculum stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub stage: usize,
    pub bc_scale: f64,
    pub phase: Phase,
}

impl TrainPlan {
    /// Plan without curriculum: a single stage at full heat generation.
    pub fn without_curriculum(mut self) -> Self {
        self.curriculum = vec![1.0];
        self
    }

    pub fn lr_at(&self, step: u64) -> f64 {
        self.lr0 * self.decay_rate.powi((step / self.decay_steps) as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr0 >= 0.0 && self.lr0.is_finite()) {
            return Err(Error::config(format!("lr0 must be finite and >= 0, got {}", self.lr0)));
        }
        if !(self.decay_rate > 0.0 && self.decay_rate <= 1.0) || self.decay_steps == 0 {
            return Err(Error::config("decay_rate must lie in (0, 1] and decay_steps be positive"));
        }
        if self.batch_size == 0 || self.block_epochs == 0 || self.cycles == 0 {
            return Err(Error::config("batch_size, block_epochs and cycles must be positive"));
        }
        if self.epochs != 2 * self.block_epochs * self.cycles {
            return Err(Error::config(format!(
                "epochs ({}) must equal 2 x block_epochs ({}) x cycles ({})",
                self.epochs, self.block_epochs, self.cycles
            )));
        }
        let c = &self.curriculum;
        if c.is_empty() || c.len() > self.cycles {
            return Err(Error::config(format!(
                "curriculum needs between 1 and cycles ({}) stages, got {}",
                self.cycles,
                c.len()
            )));
        }
        if c.iter().any(|s| !(0.0..=1.0).contains(s)) || c.windows(2).any(|w| w[1] < w[0]) || c[c.len() - 1] != 1.0 {
            return Err(Error::config("curriculum must be nondecreasing in [0, 1] and end at 1"));
        }
        if !(self.divergence_factor > 1.0) {
            return Err(Error::config("divergence_factor must exceed 1"));
        }
        Ok(())
    }

    /// Cycles per stage; the remainder of an uneven split goes to the
    /// earliest stages.
    pub fn stage_cycles(&self) -> Vec<usize> {
        let s = self.curriculum.len();
        (0..s).map(|i| self.cycles / s + usize::from(i < self.cycles % s)).collect()
    }

    /// Phase blocks in execution order.
    pub fn blocks(&self) -> Vec<Block> {
        let mut out = Vec::with_capacity(2 * self.cycles);
        for (stage, n) in self.stage_cycles().into_iter().enumerate() {
            let bc_scale = self.curriculum[stage];
            for _ in 0..n {
                for phase in [Phase::Temperature, Phase::Cure] {
                    out.push(Block { stage, bc_scale, phase });
                }
            }
        }
        out
    }

    /// Block of a zero-based epoch.
    pub fn block_of(&self, epoch: usize) -> Block {
        self.blocks()[epoch / self.block_epochs]
    }
}
