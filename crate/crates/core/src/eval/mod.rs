//! Accuracy against the reference solver, plot data, and ablation harnesses.

mod metrics;
mod reference;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use metrics::{compare_fields, Metrics, OutputMetrics};
pub use reference::{physics_hash, ReferenceSolver};

use crate::config::RunConfig;
use crate::design::DesignPoint;
use crate::field::{FieldKind, FieldSolution};
use crate::losses::{total_loss, LossBreakdown};
use crate::operator::OperatorTriplet;
use crate::par::Parallelism;
use crate::train::{resume, save_checkpoint, write_history_csv, TrainOutcome, TrainState};
use crate::{Error, Result};

/// Coordinates per interface used for the mismatch diagnostic.
pub const INTERFACE_SAMPLES: usize = 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Averages over the test designs.
    pub metrics: Metrics,
    pub per_design: Vec<Metrics>,
    /// Largest temporal interface mismatch of any operator on any design, normalized units.
    pub interface_mismatch: f64,
    /// Degree-of-cure predictions clamped into [0, 1].
    pub clamped: usize,
}

/// Prediction of `triplet` on the grid of `reference`.
pub fn predict_like(triplet: &OperatorTriplet, d: &DesignPoint, reference: &FieldSolution) -> Result<(FieldSolution, usize)> {
    triplet.predict_field(d, &reference.times, reference.n_tool(), reference.n_part())
}

pub fn interface_mismatch(triplet: &OperatorTriplet, d: &DesignPoint) -> Result<f64> {
    let u = triplet.norm.encode(d)?;
    let mut worst = 0.0_f64;
    for m in triplet.models() {
        worst = worst.max(m.interface_mismatch(&u, INTERFACE_SAMPLES)?);
    }
    Ok(worst)
}

/// Metrics of `triplet` on test designs, parallel over designs.
pub fn evaluate(
    triplet: &OperatorTriplet,
    designs: &[DesignPoint],
    reference: &ReferenceSolver,
    window: f64,
    par: Parallelism,
) -> Result<Evaluation> {
    if designs.is_empty() {
        return Err(Error::domain("evaluation needs at least one test design"));
    }
    let per = par.map(designs, |d| -> Result<(Metrics, f64, usize)> {
        let r = reference.solve(d)?;
        let (p, clamped) = predict_like(triplet, d, &r)?;
        Ok((compare_fields(&p, &r, window)?, interface_mismatch(triplet, d)?, clamped))
    });
    let mut per_design = Vec::with_capacity(designs.len());
    let (mut mismatch, mut clamped) = (0.0_f64, 0);
    for item in per {
        let (m, i, c) = item?;
        per_design.push(m);
        mismatch = mismatch.max(i);
        clamped += c;
    }
    Ok(Evaluation {
        metrics: Metrics::mean(&per_design)?,
        per_design,
        interface_mismatch: mismatch,
        clamped,
    })
}

pub const PLOT_CSV_HEADER: [&str; 6] = ["time_s", "T_air_C", "T_mid_pred_C", "T_mid_ref_C", "alpha_mid_pred", "alpha_mid_ref"];

/// Part mid-thickness traces of prediction and reference with the air temperature.
pub fn write_plot_data(path: &Path, d: &DesignPoint, cool_down: bool, pred: &FieldSolution, reference: &FieldSolution) -> Result<()> {
    let cycle = d.cycle(cool_down);
    let tp = pred.trace(0.5, FieldKind::PartTemperature)?;
    let tr = reference.trace(0.5, FieldKind::PartTemperature)?;
    let ap = pred.trace(0.5, FieldKind::DegreeOfCure)?;
    let ar = reference.trace(0.5, FieldKind::DegreeOfCure)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(PLOT_CSV_HEADER)?;
    for (k, &t) in reference.times.iter().enumerate() {
        w.write_record([t, cycle.air_temperature(t), tp[k], tr[k], ap[k], ar[k]].map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Trains the triplet a run configuration describes. With `out_dir`, writes
/// `loss_history.csv`, `final.ckpt`, the resolved `run_config.toml`, and
/// periodic checkpoints there.
pub fn train_run(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<TrainOutcome> {
    cfg.validate()?;
    let triplet = OperatorTriplet::init(&cfg.operator.config(), cfg.normalization()?, cfg.seed)?;
    resume_run(cfg, TrainState::new(triplet, cfg.plan.clone(), cfg.seed)?, out_dir)
}

/// Continues a run from `state` on the configuration's training designs; the
/// plan and seed stored in `state` take precedence over the configuration.
pub fn resume_run(cfg: &RunConfig, state: TrainState, out_dir: Option<&Path>) -> Result<TrainOutcome> {
    if state.plan != cfg.plan || state.seed != cfg.seed {
        log::warn!("resuming with the plan and seed stored in the checkpoint");
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let p = dir.join("run_config.toml");
        std::fs::write(&p, cfg.to_toml_string()).map_err(|e| Error::io(&p, e))?;
    }
    let setup = cfg.train_setup(out_dir.map(Path::to_path_buf))?;
    let out = resume(state, &cfg.train_designs()?, &setup)?;
    if let Some(dir) = out_dir {
        write_history_csv(&dir.join("loss_history.csv"), &out.state.history)?;
        save_checkpoint(&dir.join("final.ckpt"), &out.state)?;
    }
    Ok(out)
}

pub fn reference_solver(cfg: &RunConfig) -> Result<ReferenceSolver> {
    Ok(ReferenceSolver {
        physics: cfg.physics()?,
        solver: cfg.solver.clone(),
        cool_down: cfg.design.cool_down,
        cache_dir: Some(cfg.cache_dir()),
    })
}

/// Evaluates a trained triplet on the configuration's test designs.
pub fn evaluate_run(cfg: &RunConfig, triplet: &OperatorTriplet) -> Result<Evaluation> {
    evaluate(triplet, &cfg.test_designs()?, &reference_solver(cfg)?, cfg.eval.exotherm_window, cfg.parallelism)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationKind {
    Decoder,
    Curriculum,
    DomainDecomp,
}

impl fmt::Display for AblationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AblationKind::Decoder => "decoder",
            AblationKind::Curriculum => "curriculum",
            AblationKind::DomainDecomp => "domain_decomp",
        })
    }
}

impl FromStr for AblationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decoder" => Ok(AblationKind::Decoder),
            "curriculum" => Ok(AblationKind::Curriculum),
            "domain_decomp" | "domain-decomp" => Ok(AblationKind::DomainDecomp),
            _ => Err(Error::config(format!("unknown ablation {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub label: String,
    pub seed: u64,
    pub final_breakdown: LossBreakdown,
    /// Weighted sum of `final_breakdown`.
    pub final_total_loss: f64,
    pub evaluation: Evaluation,
    /// Loss-history file name inside the report directory.
    pub history_csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub kind: AblationKind,
    pub variants: Vec<VariantReport>,
}

impl AblationReport {
    pub fn variant(&self, label: &str) -> Option<&VariantReport> {
        self.variants.iter().find(|v| v.label == label)
    }
}

/// Configurations compared by an ablation, with their labels.
pub fn ablation_variants(kind: AblationKind, cfg: &RunConfig) -> Vec<(String, RunConfig)> {
    let with = |f: &dyn Fn(&mut RunConfig)| {
        let mut c = cfg.clone();
        f(&mut c);
        c
    };
    match kind {
        AblationKind::Decoder => vec![
            ("nonlinear".into(), with(&|c| c.operator.linear_decoder = false)),
            ("linear".into(), with(&|c| c.operator.linear_decoder = true)),
        ],
        AblationKind::Curriculum => cfg
            .eval
            .ablation_seeds
            .iter()
            .flat_map(|&s| {
                [
                    (format!("curriculum-seed{s}"), with(&|c| c.seed = s)),
                    (
                        format!("no-curriculum-seed{s}"),
                        with(&|c| {
                            c.seed = s;
                            c.plan = c.plan.clone().without_curriculum();
                        }),
                    ),
                ]
            })
            .collect(),
        AblationKind::DomainDecomp => cfg
            .eval
            .ablation_subdomains
            .iter()
            .map(|&n| (format!("nd{n}"), with(&|c| c.operator = c.operator.with_subdomains(n))))
            .collect(),
    }
}

/// Trains every variant with the same budget, evaluates it on the shared test
/// designs, and writes `<label>_history.csv` plus `ablation_<kind>.json` to `out_dir`.
pub fn ablation_run(kind: AblationKind, cfg: &RunConfig, out_dir: &Path) -> Result<AblationReport> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut variants = Vec::new();
    for (label, c) in ablation_variants(kind, cfg) {
        log::info!("ablation {kind}: training variant {label}");
        let out = train_run(&c, None)?;
        let history_csv = format!("{label}_history.csv");
        write_history_csv(&out_dir.join(&history_csv), &out.state.history)?;
        let evaluation = evaluate_run(&c, &out.state.triplet)?;
        variants.push(VariantReport {
            label,
            seed: c.seed,
            final_total_loss: total_loss(&out.final_breakdown, &c.weights),
            final_breakdown: out.final_breakdown,
            evaluation,
            history_csv,
        });
    }
    let report = AblationReport { kind, variants };
    let p = out_dir.join(format!("ablation_{kind}.json"));
    std::fs::write(&p, serde_json::to_string_pretty(&report)?).map_err(|e| Error::io(&p, e))?;
    Ok(report)
}
