//! Finite-difference oracle for loss gradients.

use curenet_core::losses::{evaluate, CollocationSet, LossWeights, Phase, Physics, N_COMPONENTS};
use curenet_core::operator::OperatorTriplet;
use curenet_core::par::Parallelism;
use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

pub const PROBES: usize = 100;
const STEP: f64 = 1e-3;
const FLOOR: f64 = 1e-7;
pub const BC_SCALE: f64 = 0.7;

#[derive(Debug, Clone, Copy)]
pub struct FdReport {
    pub worst: f64,
    pub nets: usize,
    /// Fewest probes on any network; small networks are probed exhaustively.
    pub min_probes: usize,
}

fn loss(t: &OperatorTriplet, set: &CollocationSet, ph: &Physics, w: &LossWeights, phase: Phase) -> f64 {
    evaluate(t, set, ph, w, BC_SCALE, phase, false, Parallelism::Sequential)
        .unwrap()
        .breakdown
        .phase_total(w, phase)
}

fn net_mut(t: &mut OperatorTriplet, idx: usize) -> &mut [f64] {
    let mut all: Vec<&mut [f64]> = Vec::new();
    for m in [&mut t.tool, &mut t.part, &mut t.alpha] {
        for n in m.nets_mut() {
            all.push(n.data_mut());
        }
    }
    all.swap_remove(idx)
}

/// Worst relative error between the tape gradient of component `c` and
/// Richardson-extrapolated central differences.
pub fn check_component(t: &OperatorTriplet, set: &CollocationSet, ph: &Physics, phase: Phase, c: usize, rng: &mut ChaCha8Rng) -> FdReport {
    let mut w = [0.0; N_COMPONENTS];
    w[c] = 1.0;
    let w = LossWeights::from_array(w);
    let eval = evaluate(t, set, ph, &w, BC_SCALE, phase, true, Parallelism::Sequential).unwrap();
    let grads = eval.gradients.unwrap();
    let mut rep = FdReport {
        worst: 0.0,
        nets: 0,
        min_probes: usize::MAX,
    };
    for (ni, g) in grads.iter().enumerate() {
        let Some(g) = g else { continue };
        rep.nets += 1;
        let n = g.data().len();
        let idx: Vec<usize> = if n <= PROBES { (0..n).collect() } else { sample(rng, n, PROBES).into_vec() };
        rep.min_probes = rep.min_probes.min(idx.len());
        for &p in &idx {
            let mut tp = t.clone();
            let orig = net_mut(&mut tp, ni)[p];
            let mut central = |h: f64| {
                net_mut(&mut tp, ni)[p] = orig + h;
                let up = loss(&tp, set, ph, &w, phase);
                net_mut(&mut tp, ni)[p] = orig - h;
                let dn = loss(&tp, set, ph, &w, phase);
                (up - dn) / (2.0 * h)
            };
            // Richardson extrapolation cancels the h² term of the central difference.
            let (coarse, fine) = (central(STEP), central(STEP / 2.0));
            let fd = (4.0 * fine - coarse) / 3.0;
            let ad = g.data()[p];
            let rel = (ad - fd).abs() / ad.abs().max(fd.abs()).max(FLOOR);
            rep.worst = rep.worst.max(rel);
        }
    }
    rep
}
