//! Binary checkpoints.
//!
//! Layout: the 8-byte magic, a little-endian `u32` format version, a `u64`
//! header length, a JSON header, then every parameter and moment as
//! little-endian `f64` in the order listed by the header.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AdamState, GuardState, HistoryRow, TrainPlan, TrainState};
use crate::autodiff::MlpParams;
use crate::losses::LossBreakdown;
use crate::operator::{DeepONetModel, Normalization, OperatorConfig, OperatorTriplet, OutputScaling};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"CNCKPT01";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    config: OperatorConfig,
    scaling: OutputScaling,
    /// Layer sizes of bn1, bn2, trunk, then each decoder.
    nets: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    seed: u64,
    plan: TrainPlan,
    norm: Normalization,
    models: [ModelHeader; 3],
    adam_steps: [u64; 2],
    next_epoch: usize,
    history: Vec<HistoryRow>,
    latest: Option<LossBreakdown>,
    guard: GuardState,
}

fn model_header(m: &DeepONetModel) -> ModelHeader {
    ModelHeader {
        config: m.config.clone(),
        scaling: m.scaling,
        nets: m.nets().iter().map(|n| n.layer_sizes().to_vec()).collect(),
    }
}

fn corrupt(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Checkpoint(format!("{}: {msg}", path.display()))
}

/// Writes `state` atomically: a temporary sibling file is synced, then renamed.
pub fn save_checkpoint(path: &Path, state: &TrainState) -> Result<()> {
    let t = &state.triplet;
    let header = Header {
        seed: state.seed,
        plan: state.plan.clone(),
        norm: t.norm.clone(),
        models: [model_header(&t.tool), model_header(&t.part), model_header(&t.alpha)],
        adam_steps: [state.adam_temperature.step, state.adam_cure.step],
        next_epoch: state.next_epoch,
        history: state.history.clone(),
        latest: state.latest,
        guard: state.guard,
    };
    let json = serde_json::to_vec(&header)?;
    let mut buf = Vec::new();
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&json);
    let mut push = |xs: &[f64]| xs.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes()));
    for m in t.models() {
        for n in m.nets() {
            push(n.data());
        }
    }
    for a in [&state.adam_temperature, &state.adam_cure] {
        a.m.iter().chain(&a.v).for_each(|x| push(x));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    let mut f = fs::File::create(tmp).map_err(|e| Error::io(tmp, e))?;
    f.write_all(&buf).and_then(|_| f.sync_all()).map_err(|e| Error::io(tmp, e))?;
    fs::rename(tmp, path).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        let s = self.bytes.get(self.pos..self.pos.checked_add(n)?)?;
        self.pos += n;
        Some(s)
    }

    fn f64s(&mut self, n: usize) -> Option<Vec<f64>> {
        let raw = self.take(n.checked_mul(8)?)?;
        Some(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

fn build_model(h: &ModelHeader, r: &mut Reader<'_>, path: &Path) -> Result<DeepONetModel> {
    let partition = h.config.partition()?;
    if h.nets.len() != 3 + partition.len() {
        return Err(corrupt(path, "net count does not match the partition"));
    }
    let mut nets = Vec::with_capacity(h.nets.len());
    for sizes in &h.nets {
        let n = MlpParams::zeros(sizes)?.n_params();
        let data = r.f64s(n).ok_or_else(|| corrupt(path, "truncated parameter data"))?;
        nets.push(MlpParams::from_parts(sizes.clone(), data)?);
    }
    let mut it = nets.into_iter();
    let (bn1, bn2, trunk) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    let pieces = it.enumerate().map(|(k, d)| (partition.interval(k), d)).collect();
    DeepONetModel::from_pieces(&h.config, bn1, bn2, trunk, pieces, h.scaling)
}

fn read_adam(lens: &[usize], step: u64, r: &mut Reader<'_>, path: &Path) -> Result<AdamState> {
    let mut s = AdamState::new(lens);
    s.step = step;
    for v in s.m.iter_mut().chain(s.v.iter_mut()) {
        *v = r.f64s(v.len()).ok_or_else(|| corrupt(path, "truncated optimizer data"))?;
    }
    Ok(s)
}

pub fn load_checkpoint(path: &Path) -> Result<TrainState> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    if r.take(8) != Some(CHECKPOINT_MAGIC.as_slice()) {
        return Err(corrupt(path, "not a checkpoint file"));
    }
    let version = u32::from_le_bytes(r.take(4).ok_or_else(|| corrupt(path, "truncated"))?.try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(corrupt(
            path,
            format!("format version {version} is not supported (expected {CHECKPOINT_VERSION})"),
        ));
    }
    let len = u64::from_le_bytes(r.take(8).ok_or_else(|| corrupt(path, "truncated"))?.try_into().unwrap());
    let json = r.take(len as usize).ok_or_else(|| corrupt(path, "truncated header"))?;
    let h: Header = serde_json::from_slice(json)?;
    let [ht, hp, ha] = &h.models;
    let tool = build_model(ht, &mut r, path)?;
    let part = build_model(hp, &mut r, path)?;
    let alpha = build_model(ha, &mut r, path)?;
    let lens = |ms: &[&DeepONetModel]| -> Vec<usize> { ms.iter().flat_map(|m| m.nets()).map(|n| n.n_params()).collect() };
    let adam_temperature = read_adam(&lens(&[&tool, &part]), h.adam_steps[0], &mut r, path)?;
    let adam_cure = read_adam(&lens(&[&alpha]), h.adam_steps[1], &mut r, path)?;
    if r.pos != bytes.len() {
        return Err(corrupt(path, "trailing bytes"));
    }
    let triplet = OperatorTriplet {
        tool,
        part,
        alpha,
        norm: h.norm,
    };
    triplet.validate()?;
    Ok(TrainState {
        triplet,
        plan: h.plan,
        seed: h.seed,
        adam_temperature,
        adam_cure,
        next_epoch: h.next_epoch,
        history: h.history,
        latest: h.latest,
        guard: h.guard,
    })
}
