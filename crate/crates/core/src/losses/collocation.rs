use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::{DesignPoint, SensorizedInput};
use crate::operator::{Normalization, Partition};
use crate::{Error, Result};

/// Collocation counts per draw, split evenly across the designs of the draw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollocationConfig {
    pub designs_per_step: usize,
    /// Interior points, half in the tool and half in the part.
    pub interior: usize,
    pub ic: usize,
    pub bc: usize,
    pub interface_temporal: usize,
    pub interface_material: usize,
}

impl Default for CollocationConfig {
    fn default() -> Self {
        CollocationConfig {
            designs_per_step: 16,
            interior: 2048,
            ic: 256,
            bc: 256,
            interface_temporal: 256,
            interface_material: 256,
        }
    }
}

impl CollocationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.designs_per_step == 0 {
            return Err(Error::config("designs_per_step must be at least 1"));
        }
        if self.interior < 2 || self.ic == 0 || self.bc == 0 || self.interface_material == 0 {
            return Err(Error::config("interior, ic, bc and material-interface counts must be positive"));
        }
        Ok(())
    }
}

/// Points of one category for one design, stably sorted by decoder index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Points {
    pub x: Vec<f64>,
    pub tau: Vec<f64>,
    /// `(decoder, start, end)` over the sorted points, in increasing decoder order.
    pub groups: Vec<(usize, usize, usize)>,
}

impl Points {
    /// Groups points by an explicit decoder index per point.
    pub fn with_decoders(x: Vec<f64>, tau: Vec<f64>, decoder: Vec<usize>) -> Self {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by_key(|&i| decoder[i]);
        let mut p = Points {
            x: order.iter().map(|&i| x[i]).collect(),
            tau: order.iter().map(|&i| tau[i]).collect(),
            groups: Vec::new(),
        };
        let mut start = 0;
        for j in 1..=order.len() {
            if j == order.len() || decoder[order[j]] != decoder[order[start]] {
                p.groups.push((decoder[order[start]], start, j));
                start = j;
            }
        }
        p
    }

    /// Groups points by the subdomain that contains their time.
    pub fn by_subdomain(x: Vec<f64>, tau: Vec<f64>, partition: &Partition) -> Self {
        let k = tau.iter().map(|&t| partition.subdomain_index(t)).collect();
        Self::with_decoders(x, tau, k)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Temporal-interface points: the same `(x, τ = b_k)` seen by decoders `k − 1` and `k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterfacePoints {
    pub left: Points,
    pub right: Points,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignCollocation {
    pub design: DesignPoint,
    pub input: SensorizedInput,
    /// Tool interior `(x1, τ)`.
    pub tool: Points,
    /// Part interior `(x2, τ)`; also where the cure ODE is enforced.
    pub part: Points,
    /// Initial-condition coordinates at `τ = 0`, used in both materials.
    pub ic_x: Vec<f64>,
    /// Times of boundary points, used at the tool bottom and the part top.
    pub bc_tau: Vec<f64>,
    /// Times of material-interface points.
    pub ct_tau: Vec<f64>,
    pub interface: InterfacePoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSet {
    pub designs: Vec<DesignCollocation>,
}

/// Totals over all designs, the denominators of the mean-square losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tool: usize,
    pub part: usize,
    pub ic: usize,
    pub bc: usize,
    pub ct: usize,
    pub interface: usize,
}

impl CollocationSet {
    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for d in &self.designs {
            c.tool += d.tool.len();
            c.part += d.part.len();
            c.ic += d.ic_x.len();
            c.bc += d.bc_tau.len();
            c.ct += d.ct_tau.len();
            c.interface += d.interface.left.len();
        }
        c
    }
}

fn share(total: usize, n: usize, i: usize) -> usize {
    total / n + usize::from(i < total % n)
}

/// Interior times: at least `n / (2·N_d)` in every subdomain, the rest uniform.
fn interior_times(rng: &mut ChaCha8Rng, n: usize, partition: &Partition) -> Vec<f64> {
    let nd = partition.len();
    let per = if n >= 2 * nd { n.div_ceil(2 * nd) } else { 0 };
    let mut out = Vec::with_capacity(n);
    for k in 0..nd {
        let (lo, hi) = partition.interval(k);
        for _ in 0..per {
            out.push(lo + (hi - lo) * rng.random::<f64>());
        }
    }
    let mut k = 0;
    while out.len() < n {
        if per == 0 {
            // Too few points to stratify by half: one per subdomain in turn.
            let (lo, hi) = partition.interval(k % nd);
            out.push(lo + (hi - lo) * rng.random::<f64>());
            k += 1;
        } else {
            out.push(rng.random::<f64>());
        }
    }
    out
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Draws a collocation set, reproducible per seed.
pub fn sample_collocation(
    config: &CollocationConfig,
    norm: &Normalization,
    partition: &Partition,
    designs: &[DesignPoint],
    seed: u64,
) -> Result<CollocationSet> {
    config.validate()?;
    if designs.is_empty() {
        return Err(Error::domain("collocation needs at least one design"));
    }
    let n = designs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interfaces = partition.interfaces();
    let mut out = Vec::with_capacity(n);
    for (i, d) in designs.iter().enumerate() {
        let n_int = share(config.interior, n, i);
        let n_tool = n_int / 2;
        let n_part = n_int - n_tool;
        let tool_tau = interior_times(&mut rng, n_tool, partition);
        let tool = Points::by_subdomain(uniform(&mut rng, n_tool), tool_tau, partition);
        let part_tau = interior_times(&mut rng, n_part, partition);
        let part = Points::by_subdomain(uniform(&mut rng, n_part), part_tau, partition);
        let ic_x = uniform(&mut rng, share(config.ic, n, i));
        let bc_tau = uniform(&mut rng, share(config.bc, n, i));
        let ct_tau = uniform(&mut rng, share(config.interface_material, n, i));
        let interface = if interfaces.is_empty() {
            InterfacePoints::default()
        } else {
            let m = share(config.interface_temporal, n, i);
            let which: Vec<usize> = (0..m).map(|_| rng.random_range(0..interfaces.len())).collect();
            let x = uniform(&mut rng, m);
            let tau: Vec<f64> = which.iter().map(|&j| interfaces[j]).collect();
            InterfacePoints {
                left: Points::with_decoders(x.clone(), tau.clone(), which.clone()),
                right: Points::with_decoders(x, tau, which.iter().map(|j| j + 1).collect()),
            }
        };
        out.push(DesignCollocation {
            design: *d,
            input: norm.encode(d)?,
            tool,
            part,
            ic_x,
            bc_tau,
            ct_tau,
            interface,
        });
    }
    Ok(CollocationSet { designs: out })
}
