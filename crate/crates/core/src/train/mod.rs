//! Sequential, curriculum-scheduled Adam training of the operator triplet.
//!
//! The schedule is a flat list of phase blocks (see [`TrainPlan::blocks`]).
//! Every epoch draws its design order and collocation seeds from a ChaCha
//! stream keyed by the run seed and the epoch index, so a run resumed from a
//! checkpoint at an epoch boundary replays the uninterrupted trajectory.

mod adam;
mod checkpoint;
mod history;
mod plan;

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use history::{history_header, read_history_csv, write_history_csv, HistoryRow};
pub use plan::{Block, TrainPlan};

use crate::design::DesignPoint;
use crate::losses::{evaluate, sample_collocation, CollocationConfig, LossBreakdown, LossWeights, Phase, Physics, N_COMPONENTS};
use crate::operator::{DeepONetModel, OperatorTriplet};
use crate::par::Parallelism;
use crate::{Error, Result};

/// Everything about a run that is not trained state.
#[derive(Debug, Clone)]
pub struct TrainSetup {
    pub physics: Physics,
    pub weights: LossWeights,
    /// `interior` is overridden by twice the plan's batch size.
    pub collocation: CollocationConfig,
    pub par: Parallelism,
    /// Where periodic and last-good checkpoints go.
    pub checkpoint_dir: Option<PathBuf>,
}

/// Per-stage reference values of the divergence guard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardState {
    pub stage: usize,
    /// First step loss of the temperature and cure phases in `stage`.
    pub start: [Option<f64>; 2],
}

/// Complete resumable training state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub triplet: OperatorTriplet,
    pub plan: TrainPlan,
    pub seed: u64,
    /// Moments for the tool and part operators.
    pub adam_temperature: AdamState,
    /// Moments for the degree-of-cure operator.
    pub adam_cure: AdamState,
    pub next_epoch: usize,
    pub history: Vec<HistoryRow>,
    /// Latest value of every component, for carrying inactive ones forward.
    pub latest: Option<LossBreakdown>,
    pub guard: GuardState,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub state: TrainState,
    /// All components on fresh collocation points at the final heat-generation scale.
    pub final_breakdown: LossBreakdown,
}

fn param_lens(models: &[&DeepONetModel]) -> Vec<usize> {
    models.iter().flat_map(|m| m.nets()).map(|n| n.n_params()).collect()
}

impl TrainState {
    pub fn new(triplet: OperatorTriplet, plan: TrainPlan, seed: u64) -> Result<Self> {
        plan.validate()?;
        triplet.validate()?;
        Ok(TrainState {
            adam_temperature: AdamState::new(&param_lens(&[&triplet.tool, &triplet.part])),
            adam_cure: AdamState::new(&param_lens(&[&triplet.alpha])),
            triplet,
            plan,
            seed,
            next_epoch: 0,
            history: Vec::new(),
            latest: None,
            guard: GuardState {
                stage: 0,
                start: [None, None],
            },
        })
    }

    pub fn is_finished(&self) -> bool {
        self.next_epoch >= self.plan.epochs
    }
}

fn epoch_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const INITIAL_STREAM: u64 = u64::MAX - 1;
const FINAL_STREAM: u64 = u64::MAX;

fn collocation(setup: &TrainSetup, plan: &TrainPlan) -> CollocationConfig {
    CollocationConfig {
        interior: 2 * plan.batch_size,
        ..setup.collocation.clone()
    }
}

/// All loss components averaged over design draws taken in order.
pub fn full_breakdown(
    triplet: &OperatorTriplet,
    designs: &[DesignPoint],
    setup: &TrainSetup,
    plan: &TrainPlan,
    bc_scale: f64,
    seed: u64,
) -> Result<LossBreakdown> {
    if designs.is_empty() {
        return Err(Error::domain("no designs to evaluate"));
    }
    let coll = collocation(setup, plan);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = [0.0; N_COMPONENTS];
    let chunks: Vec<&[DesignPoint]> = designs.chunks(coll.designs_per_step).collect();
    for chunk in &chunks {
        let set = sample_collocation(&coll, &triplet.norm, &triplet.tool.partition, chunk, rng.random())?;
        let b = evaluate(triplet, &set, &setup.physics, &setup.weights, bc_scale, Phase::All, false, setup.par)?;
        for (s, v) in sum.iter_mut().zip(b.breakdown.to_array()) {
            *s += v;
        }
    }
    Ok(LossBreakdown::from_array(sum.map(|s| s / chunks.len() as f64)))
}

fn checkpoint_path(setup: &TrainSetup, name: &str) -> Option<PathBuf> {
    setup.checkpoint_dir.as_ref().map(|d| d.join(name))
}

/// One optimizer step; returns the phase loss and its breakdown.
fn step(state: &mut TrainState, chunk: &[DesignPoint], setup: &TrainSetup, block: Block, seed: u64) -> Result<(f64, LossBreakdown, f64)> {
    let coll = collocation(setup, &state.plan);
    let t = &state.triplet;
    let set = sample_collocation(&coll, &t.norm, &t.tool.partition, chunk, seed)?;
    let eval = evaluate(t, &set, &setup.physics, &setup.weights, block.bc_scale, block.phase, true, setup.par)?;
    let loss = eval.breakdown.phase_total(&setup.weights, block.phase);
    let k = usize::from(block.phase == Phase::Cure);
    let start = *state.guard.start[k].get_or_insert(loss);
    if !loss.is_finite() || loss > state.plan.divergence_factor * start {
        return Err(Error::Training(format!(
            "{} loss diverged: {loss:e} against stage-start {start:e}",
            block.phase.as_str()
        )));
    }
    let grads = eval.gradients.ok_or_else(|| Error::Training("no gradients returned".into()))?;
    let grads: Vec<&[f64]> = grads.iter().flatten().map(|g| g.data()).collect();
    let (adam, mut nets) = match block.phase {
        Phase::Temperature => {
            let tr = &mut state.triplet;
            let mut nets = tr.tool.nets_mut();
            nets.extend(tr.part.nets_mut());
            (&mut state.adam_temperature, nets)
        }
        _ => (&mut state.adam_cure, state.triplet.alpha.nets_mut()),
    };
    let rate = state.plan.lr_at(adam.step);
    let mut params: Vec<&mut [f64]> = nets.iter_mut().map(|n| n.data_mut()).collect();
    adam_step(&mut params, &grads, adam, rate)?;
    Ok((loss, eval.breakdown, rate))
}

fn run_epoch(state: &mut TrainState, designs: &[DesignPoint], setup: &TrainSetup) -> Result<()> {
    let epoch = state.next_epoch;
    let block = state.plan.block_of(epoch);
    if block.stage != state.guard.stage {
        state.guard = GuardState {
            stage: block.stage,
            start: [None, None],
        };
    }
    let mut rng = epoch_rng(state.seed, epoch as u64);
    let mut order: Vec<usize> = (0..designs.len()).collect();
    order.shuffle(&mut rng);
    let mask = block.phase.mask();
    let mut sum = [0.0; N_COMPONENTS];
    let mut n = 0usize;
    let mut rate = state.plan.lr_at(0);
    for idx in order.chunks(setup.collocation.designs_per_step) {
        let chunk: Vec<DesignPoint> = idx.iter().map(|&i| designs[i]).collect();
        let (_, b, r) = step(state, &chunk, setup, block, rng.random())?;
        for (s, v) in sum.iter_mut().zip(b.to_array()) {
            *s += v;
        }
        n += 1;
        rate = r;
    }
    let mut row = state.latest.unwrap_or_default().to_array();
    for i in 0..N_COMPONENTS {
        if mask[i] {
            row[i] = sum[i] / n as f64;
        }
    }
    let breakdown = LossBreakdown::from_array(row);
    log::info!(
        "epoch {epoch} stage {} {}: loss {:.6e} lr {rate:.3e}",
        block.stage,
        block.phase.as_str(),
        breakdown.phase_total(&setup.weights, block.phase)
    );
    state.latest = Some(breakdown);
    state.history.push(HistoryRow {
        epoch,
        phase: block.phase,
        stage: block.stage,
        breakdown,
        lr: rate,
    });
    state.next_epoch += 1;
    Ok(())
}

/// Trains until `until` epochs have completed (clamped to the plan).
///
/// On divergence or a non-finite gradient the state is rolled back to the
/// start of the failing epoch, written as `last_good.ckpt` when a checkpoint
/// directory is set, and the error is returned.
pub fn train_until(state: &mut TrainState, designs: &[DesignPoint], setup: &TrainSetup, until: usize) -> Result<()> {
    if designs.is_empty() {
        return Err(Error::domain("training needs at least one design"));
    }
    state.plan.validate()?;
    setup.weights.validate()?;
    collocation(setup, &state.plan).validate()?;
    if state.latest.is_none() {
        let first = state.plan.block_of(0).bc_scale;
        let init = full_breakdown(&state.triplet, designs, setup, &state.plan, first, epoch_rng(state.seed, INITIAL_STREAM).random())?;
        state.latest = Some(init);
    }
    let until = until.min(state.plan.epochs);
    while state.next_epoch < until {
        let good = state.clone();
        if let Err(e) = run_epoch(state, designs, setup) {
            *state = good;
            let saved = match checkpoint_path(setup, "last_good.ckpt") {
                Some(p) => {
                    save_checkpoint(&p, state)?;
                    format!("; last good state saved to {}", p.display())
                }
                None => String::new(),
            };
            return Err(Error::Training(format!("epoch {}: {e}{saved}", state.next_epoch)));
        }
        let every = state.plan.checkpoint_every;
        if every > 0 && state.next_epoch % every == 0 {
            if let Some(p) = checkpoint_path(setup, "checkpoint.ckpt") {
                save_checkpoint(&p, state)?;
            }
        }
    }
    Ok(())
}

/// Finishes the plan from `state` and evaluates the final breakdown.
pub fn resume(mut state: TrainState, designs: &[DesignPoint], setup: &TrainSetup) -> Result<TrainOutcome> {
    train_until(&mut state, designs, setup, usize::MAX)?;
    let last = *state.plan.curriculum.last().expect("validated plan");
    let seed = epoch_rng(state.seed, FINAL_STREAM).random();
    let final_breakdown = full_breakdown(&state.triplet, designs, setup, &state.plan, last, seed)?;
    Ok(TrainOutcome { state, final_breakdown })
}

/// Trains a triplet from scratch.
pub fn train(triplet: OperatorTriplet, designs: &[DesignPoint], plan: TrainPlan, setup: &TrainSetup, seed: u64) -> Result<TrainOutcome> {
    resume(TrainState::new(triplet, plan, seed)?, designs, setup)
}
