#![allow(dead_code)]

pub mod fd;

use curenet_core::design::{DesignPoint, DesignSpace, SamplingMethod};
use curenet_core::losses::{sample_collocation, CollocationConfig, CollocationSet, Physics};
use curenet_core::operator::{uniform_boundaries, NetArch, Normalization, OperatorConfig, OperatorTriplet};
use curenet_core::process::PropertyFile;

pub fn physics() -> Physics {
    let f = PropertyFile::default();
    Physics {
        props: f.materials(),
        kinetics: f.kinetics,
    }
}

pub fn tiny_config(n_d: usize) -> OperatorConfig {
    OperatorConfig::uniform(
        5,
        NetArch {
            hidden_layers: 2,
            width: 7,
        },
        uniform_boundaries(n_d),
    )
}

/// Random triplet whose outputs sit well inside the physical range:
/// temperatures near mid-range and degree of cure near one half.
pub fn tame_triplet(n_d: usize, seed: u64) -> OperatorTriplet {
    let norm = Normalization::new(&DesignSpace::small(), false);
    let mut t = OperatorTriplet::init(&tiny_config(n_d), norm, seed).unwrap();
    for m in [&mut t.tool, &mut t.part, &mut t.alpha] {
        for d in m.decoders.iter_mut() {
            let last = d.n_layers() - 1;
            d.weight_mut(last).mapv_inplace(|w| 0.2 * w);
            d.bias_mut(last).fill(0.45);
        }
    }
    t
}

pub fn designs(n: usize, seed: u64) -> Vec<DesignPoint> {
    DesignSpace::small().sample(n, seed, SamplingMethod::Uniform)
}

pub fn small_set(t: &OperatorTriplet, n_designs: usize, scale: usize, seed: u64) -> CollocationSet {
    let cfg = CollocationConfig {
        designs_per_step: n_designs,
        interior: 8 * scale,
        ic: 3 * scale,
        bc: 3 * scale,
        interface_temporal: 3 * scale,
        interface_material: 3 * scale,
    };
    sample_collocation(&cfg, &t.norm, &t.tool.partition, &designs(n_designs, seed), seed).unwrap()
}
