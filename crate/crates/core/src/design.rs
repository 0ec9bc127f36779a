//! The ten-variable process design space, sampling, and encoding of a design
//! into the two branch-network inputs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::process::{CureCycle, SimulationConstants, ALPHA_INIT, T_INIT};
use crate::{Error, Result};

/// Number of air-temperature sensors fed to the cycle branch.
pub const N_SENSORS: usize = 100;
/// Number of time-invariant scalars fed to the parameter branch.
pub const N_SCALARS: usize = 4;
pub const N_VARIABLES: usize = 10;

pub const VARIABLE_NAMES: [&str; N_VARIABLES] =
    ["h_top", "h_bot", "r1", "r2", "ht1", "ht2", "hd1", "hd2", "L_t", "L_c"];

/// One curing scenario. Units: W/(m²·K), °C/min, °C, min, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub h_top: f64,
    pub h_bot: f64,
    pub r1: f64,
    pub r2: f64,
    pub ht1: f64,
    pub ht2: f64,
    pub hd1: f64,
    pub hd2: f64,
    pub l_t: f64,
    pub l_c: f64,
}

impl DesignPoint {
    pub fn to_array(&self) -> [f64; N_VARIABLES] {
        [
            self.h_top, self.h_bot, self.r1, self.r2, self.ht1, self.ht2, self.hd1, self.hd2, self.l_t, self.l_c,
        ]
    }

    pub fn from_array(v: [f64; N_VARIABLES]) -> Self {
        DesignPoint {
            h_top: v[0],
            h_bot: v[1],
            r1: v[2],
            r2: v[3],
            ht1: v[4],
            ht2: v[5],
            hd1: v[6],
            hd2: v[7],
            l_t: v[8],
            l_c: v[9],
        }
    }

    pub fn cycle(&self, cool_down: bool) -> CureCycle {
        CureCycle {
            r1: self.r1,
            r2: self.r2,
            ht1: self.ht1,
            ht2: self.ht2,
            hd1: self.hd1,
            hd2: self.hd2,
            t0: T_INIT,
            cool_down,
        }
    }

    pub fn constants(&self) -> SimulationConstants {
        SimulationConstants {
            t_init: T_INIT,
            alpha_init: ALPHA_INIT,
            h_top: self.h_top,
            h_bot: self.h_bot,
            l_t: self.l_t,
            l_c: self.l_c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("design variables must be finite"));
        }
        self.cycle(false).validate()?;
        self.constants().validate()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceSize {
    Small,
    Medium,
    Large,
    Custom(String),
}

impl fmt::Display for SpaceSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSize::Small => f.write_str("small"),
            SpaceSize::Medium => f.write_str("medium"),
            SpaceSize::Large => f.write_str("large"),
            SpaceSize::Custom(name) => f.write_str(name),
        }
    }
}

impl FromStr for SpaceSize {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "small" => SpaceSize::Small,
            "medium" => SpaceSize::Medium,
            "large" => SpaceSize::Large,
            other if !other.is_empty() => SpaceSize::Custom(other.to_string()),
            _ => return Err(Error::config("empty design space label")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Min-max normalization; a degenerate range maps everything to 0.
    pub fn normalize(&self, v: f64) -> f64 {
        if self.hi > self.lo {
            (v - self.lo) / (self.hi - self.lo)
        } else {
            0.0
        }
    }

    pub fn denormalize(&self, u: f64) -> f64 {
        self.lo + u * (self.hi - self.lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    #[default]
    Uniform,
    LatinHypercube,
}

/// Per-variable ranges, ordered as [`VARIABLE_NAMES`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    pub label: SpaceSize,
    pub ranges: [Range; N_VARIABLES],
}

const CM: f64 = 0.01;

impl DesignSpace {
    pub fn small() -> Self {
        DesignSpace {
            label: SpaceSize::Small,
            ranges: [
                Range::new(90.0, 120.0),
                Range::new(60.0, 90.0),
                Range::new(1.9, 2.8),
                Range::new(1.9, 2.8),
                Range::new(110.0, 115.0),
                Range::new(178.0, 183.0),
                Range::new(55.0, 63.0),
                Range::new(105.0, 115.0),
                Range::new(2.0 * CM, 3.5 * CM),
                Range::new(2.5 * CM, 3.5 * CM),
            ],
        }
    }

    pub fn medium() -> Self {
        DesignSpace {
            label: SpaceSize::Medium,
            ranges: [
                Range::new(80.0, 120.0),
                Range::new(50.0, 90.0),
                Range::new(1.7, 3.0),
                Range::new(1.7, 3.0),
                Range::new(105.0, 115.0),
                Range::new(175.0, 185.0),
                Range::new(52.0, 63.0),
                Range::new(105.0, 120.0),
                Range::new(2.0 * CM, 4.0 * CM),
                Range::new(2.5 * CM, 3.5 * CM),
            ],
        }
    }

    pub fn large() -> Self {
        DesignSpace {
            label: SpaceSize::Large,
            ranges: [
                Range::new(70.0, 120.0),
                Range::new(50.0, 100.0),
                Range::new(1.5, 3.0),
                Range::new(1.5, 3.0),
                Range::new(105.0, 120.0),
                Range::new(170.0, 185.0),
                Range::new(50.0, 65.0),
                Range::new(105.0, 120.0),
                Range::new(2.0 * CM, 5.0 * CM),
                Range::new(2.5 * CM, 3.5 * CM),
            ],
        }
    }

    pub fn named(size: &SpaceSize) -> Result<Self> {
        match size {
            SpaceSize::Small => Ok(Self::small()),
            SpaceSize::Medium => Ok(Self::medium()),
            SpaceSize::Large => Ok(Self::large()),
            SpaceSize::Custom(name) => Err(Error::config(format!("no built-in design space named {name:?}"))),
        }
    }

    /// Shrinks every range about its midpoint to `fraction` of its width.
    pub fn narrowed(&self, fraction: f64, label: &str) -> Self {
        let mut out = self.clone();
        for r in out.ranges.iter_mut() {
            let (m, half) = (r.mid(), 0.5 * (r.hi - r.lo) * fraction);
            *r = Range::new(m - half, m + half);
        }
        out.label = SpaceSize::Custom(label.to_string());
        out
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in VARIABLE_NAMES.iter().zip(&self.ranges) {
            if !(r.lo.is_finite() && r.hi.is_finite() && r.lo <= r.hi) {
                return Err(Error::config(format!("range for {name} must satisfy lo <= hi")));
            }
        }
        let lows = DesignPoint::from_array(self.ranges.map(|r| r.lo));
        lows.validate()?;
        if self.ranges[4].hi >= self.ranges[5].lo {
            return Err(Error::config("hold 1 temperatures must lie below hold 2 temperatures"));
        }
        Ok(())
    }

    pub fn contains(&self, d: &DesignPoint) -> bool {
        d.to_array()
            .iter()
            .zip(&self.ranges)
            .all(|(v, r)| *v >= r.lo && *v <= r.hi)
    }

    pub fn lower_corner(&self) -> DesignPoint {
        DesignPoint::from_array(self.ranges.map(|r| r.lo))
    }

    pub fn midpoint(&self) -> DesignPoint {
        DesignPoint::from_array(self.ranges.map(|r| r.mid()))
    }

    /// Highest second-hold temperature in the space, °C.
    pub fn max_hold_temperature(&self) -> f64 {
        self.ranges[5].hi
    }

    /// Longest cycle duration over the space, s.
    ///
    /// The duration is affine in each cycle variable separately, so the
    /// maximum is attained at a corner of the six cycle ranges.
    pub fn horizon(&self, cool_down: bool) -> f64 {
        // r1, r2, ht1, ht2, hd1, hd2 occupy indices 2..8.
        let mut best = 0.0_f64;
        for mask in 0..64u32 {
            let mut v = self.lower_corner().to_array();
            for bit in 0..6 {
                let r = self.ranges[2 + bit];
                v[2 + bit] = if mask & (1 << bit) != 0 { r.hi } else { r.lo };
            }
            best = best.max(DesignPoint::from_array(v).cycle(cool_down).duration());
        }
        best
    }

    /// `n` independent designs, reproducible for a fixed seed.
    pub fn sample(&self, n: usize, seed: u64, method: SamplingMethod) -> Vec<DesignPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match method {
            SamplingMethod::Uniform => (0..n)
                .map(|_| {
                    let mut v = [0.0; N_VARIABLES];
                    for (x, r) in v.iter_mut().zip(&self.ranges) {
                        *x = r.denormalize(rng.random::<f64>());
                    }
                    DesignPoint::from_array(v)
                })
                .collect(),
            SamplingMethod::LatinHypercube => {
                let mut columns = Vec::with_capacity(N_VARIABLES);
                for r in &self.ranges {
                    let mut strata: Vec<usize> = (0..n).collect();
                    strata.shuffle(&mut rng);
                    let col: Vec<f64> = strata
                        .into_iter()
                        .map(|s| r.denormalize((s as f64 + rng.random::<f64>()) / n as f64))
                        .collect();
                    columns.push(col);
                }
                (0..n)
                    .map(|i| DesignPoint::from_array(std::array::from_fn(|k| columns[k][i])))
                    .collect()
            }
        }
    }

    /// Normalizes an air temperature with `[T0, max ht2] → [0, 1]`.
    pub fn normalize_air(&self, t: f64) -> f64 {
        (t - T_INIT) / (self.max_hold_temperature() - T_INIT)
    }

    pub fn denormalize_air(&self, u: f64) -> f64 {
        T_INIT + u * (self.max_hold_temperature() - T_INIT)
    }

    /// Branch inputs for a design: 100 air-temperature sensors over
    /// `[0, horizon]` and the four normalized time-invariant scalars.
    pub fn encode(&self, d: &DesignPoint, horizon: f64, cool_down: bool) -> Result<SensorizedInput> {
        let cycle = d.cycle(cool_down);
        let duration = cycle.duration();
        if horizon < duration * (1.0 - 1e-12) {
            return Err(Error::domain(format!(
                "horizon {horizon} s is shorter than the cycle duration {duration} s"
            )));
        }
        let bn2 = (0..N_SENSORS)
            .map(|i| self.normalize_air(cycle.air_temperature(i as f64 * horizon / (N_SENSORS - 1) as f64)))
            .collect();
        let bn1 = [
            self.ranges[0].normalize(d.h_top),
            self.ranges[1].normalize(d.h_bot),
            self.ranges[8].normalize(d.l_t),
            self.ranges[9].normalize(d.l_c),
        ];
        Ok(SensorizedInput { bn1, bn2 })
    }
}

/// Inputs of the two branch networks for one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorizedInput {
    /// Normalized `h_top, h_bot, L_t, L_c`.
    pub bn1: [f64; N_SCALARS],
    /// Normalized air temperatures at equally spaced fractions of the horizon.
    pub bn2: Vec<f64>,
}

/// Maps `(x, t)` to the trunk coordinates `(x, τ = t / horizon)`.
pub fn normalize_query(x: f64, t: f64, horizon: f64) -> Result<(f64, f64)> {
    if !(horizon > 0.0) {
        return Err(Error::domain("horizon must be positive"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("local coordinate {x} outside [0, 1]")));
    }
    if !(0.0..=horizon).contains(&t) {
        return Err(Error::domain(format!("time {t} s outside [0, {horizon}]")));
    }
    Ok((x, t / horizon))
}

/// Writes a design set with header `VARIABLE_NAMES…, seed, space`.
pub fn write_designs_csv(path: impl AsRef<Path>, designs: &[DesignPoint], seed: u64, space: &SpaceSize) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = VARIABLE_NAMES.to_vec();
    header.extend(["seed", "space"]);
    w.write_record(&header)?;
    for d in designs {
        let mut row: Vec<String> = d.to_array().iter().map(|v| v.to_string()).collect();
        row.push(seed.to_string());
        row.push(space.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a design set written by [`write_designs_csv`].
pub fn read_designs_csv(path: impl AsRef<Path>) -> Result<(Vec<DesignPoint>, u64, SpaceSize)> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let header = r.headers()?.clone();
    let expected: Vec<&str> = VARIABLE_NAMES.iter().copied().chain(["seed", "space"]).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(parse_err(format!("unexpected header {header:?}")));
    }
    let mut designs = Vec::new();
    let mut meta = None;
    for rec in r.records() {
        let rec = rec?;
        let mut v = [0.0; N_VARIABLES];
        for (k, x) in v.iter_mut().enumerate() {
            *x = rec[k].parse().map_err(|e| parse_err(format!("{}: {e}", VARIABLE_NAMES[k])))?;
        }
        let seed: u64 = rec[N_VARIABLES].parse().map_err(|e| parse_err(format!("seed: {e}")))?;
        let space: SpaceSize = rec[N_VARIABLES + 1].parse()?;
        meta = Some((seed, space));
        designs.push(DesignPoint::from_array(v));
    }
    let (seed, space) = meta.unwrap_or((0, SpaceSize::Custom("empty".into())));
    Ok((designs, seed, space))
}
