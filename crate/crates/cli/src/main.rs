use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use curenet_core::config::RunConfig;
use curenet_core::design::{read_designs_csv, write_designs_csv, DesignPoint};
use curenet_core::eval::{
    ablation_run, evaluate, evaluate_run, predict_like, reference_solver, resume_run, train_run, write_plot_data,
    AblationKind, Evaluation,
};
use curenet_core::solver::{solve_problem, write_solution_csv, NoForcing, Problem, RunManifest};
use curenet_core::train::{load_checkpoint, TrainState};
use curenet_core::{Error, Result};

#[derive(Parser)]
#[command(name = "curenet", version, about = "Operator learning and reference simulation for autoclave curing")]
struct Cli {
    /// Run configuration (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Pick {
    /// Designs CSV to pick from; the configuration's test designs otherwise.
    #[arg(long)]
    designs: Option<PathBuf>,
    /// Row of the design set.
    #[arg(long, default_value_t = 0)]
    index: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Decoder,
    Curriculum,
    DomainDecomp,
}

#[derive(Subcommand)]
enum Command {
    /// Reference solve of one design, written as solution.csv and manifest.json.
    Simulate {
        #[command(flatten)]
        pick: Pick,
        /// Use the midpoint of the design space.
        #[arg(long, conflicts_with = "designs")]
        midpoint: bool,
    },
    /// Writes train_designs.csv and test_designs.csv.
    Sample,
    /// Trains the operator triplet.
    Train {
        /// Continue from a checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Metrics against the reference solver, written as metrics.json.
    Evaluate {
        /// Trained checkpoint; `<out-dir>/final.ckpt` by default.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Designs CSV; the configuration's test designs otherwise.
        #[arg(long)]
        designs: Option<PathBuf>,
    },
    /// Predicted fields of one design on the reference grid, written as prediction.csv.
    Predict {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        pick: Pick,
    },
    /// Matched-budget ablation study.
    Ablate {
        #[arg(long, value_enum)]
        kind: Kind,
    },
    /// Part mid-point traces of prediction and reference, written as plot_data.csv.
    ExportPlotData {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        pick: Pick,
    },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn designs(cfg: &RunConfig, csv: Option<&Path>) -> Result<Vec<DesignPoint>> {
    match csv {
        Some(p) => Ok(read_designs_csv(p)?.0),
        None => cfg.test_designs(),
    }
}

fn pick(cfg: &RunConfig, p: &Pick) -> Result<DesignPoint> {
    let ds = designs(cfg, p.designs.as_deref())?;
    ds.get(p.index)
        .copied()
        .ok_or_else(|| Error::Config(format!("design index {} out of range ({} designs)", p.index, ds.len())))
}

fn checkpoint(cfg: &RunConfig, p: &Option<PathBuf>) -> Result<TrainState> {
    load_checkpoint(&p.clone().unwrap_or_else(|| cfg.out_dir.join("final.ckpt")))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?).map_err(io(path))
}

fn summary(e: &Evaluation) -> String {
    let m = &e.metrics;
    format!(
        "part rel_l2 {:.4e} mae {:.3} C max_abs {:.3} C; alpha mae {:.4e}; mid-trace rel_l2 {:.4e}; exotherm err {:.3} C",
        m.part.rel_l2, m.part.mae, m.part.max_abs_err, m.alpha.mae, m.mid_trace_rel_l2, m.exotherm_err
    )
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = cli.out_dir {
        cfg.out_dir = d;
    }
    cfg.validate()?;
    let out = cfg.out_dir.clone();
    std::fs::create_dir_all(&out).map_err(io(&out))?;
    match cli.command {
        Command::Simulate { pick: p, midpoint } => {
            let d = if midpoint { cfg.design_space()?.midpoint() } else { pick(&cfg, &p)? };
            let physics = cfg.physics()?;
            let grid = cfg.solver.grid(d.cycle(cfg.design.cool_down).duration());
            let problem = Problem::for_design(&d, &physics.props, &physics.kinetics, cfg.design.cool_down);
            let (mut sol, report) = solve_problem(&problem, &grid, &NoForcing)?;
            sol.design = Some(d);
            write_solution_csv(out.join("solution.csv"), &sol)?;
            let hash = curenet_core::eval::physics_hash(&physics);
            RunManifest::new(Some(d), &grid, &hash, Some(report)).save(out.join("manifest.json"))?;
            let exo = sol.exotherm()?;
            println!("exotherm {:.3} C at t = {:.0} s, x = {:.3}", exo.temperature, exo.time, exo.x);
        }
        Command::Sample => {
            let label = cfg.design_space()?.label;
            write_designs_csv(out.join("train_designs.csv"), &cfg.train_designs()?, cfg.seed, &label)?;
            write_designs_csv(out.join("test_designs.csv"), &cfg.test_designs()?, cfg.seed, &label)?;
            println!("wrote {} training and {} test designs", cfg.design.n_train, cfg.design.n_test);
        }
        Command::Train { resume } => {
            let o = match resume {
                Some(p) => resume_run(&cfg, load_checkpoint(&p)?, Some(&out))?,
                None => train_run(&cfg, Some(&out))?,
            };
            let total = curenet_core::losses::total_loss(&o.final_breakdown, &cfg.weights);
            write_json(&out.join("final_losses.json"), &o.final_breakdown)?;
            println!("trained {} epochs; final total loss {total:.6e}", o.state.next_epoch);
        }
        Command::Evaluate { checkpoint: c, designs: csv } => {
            let state = checkpoint(&cfg, &c)?;
            let e = match csv {
                Some(p) => evaluate(
                    &state.triplet,
                    &designs(&cfg, Some(&p))?,
                    &reference_solver(&cfg)?,
                    cfg.eval.exotherm_window,
                    cfg.parallelism,
                )?,
                None => evaluate_run(&cfg, &state.triplet)?,
            };
            write_json(&out.join("metrics.json"), &e)?;
            println!("{}", summary(&e));
        }
        Command::Predict { checkpoint: c, pick: p } => {
            let state = checkpoint(&cfg, &c)?;
            let d = pick(&cfg, &p)?;
            let grid = cfg.solver.grid(d.cycle(cfg.design.cool_down).duration());
            let (sol, clamped) = state.triplet.predict_field(&d, &grid.saved_times(), grid.n_tool, grid.n_part)?;
            write_solution_csv(out.join("prediction.csv"), &sol)?;
            println!("wrote {} times; {clamped} degree-of-cure values clamped", sol.n_times());
        }
        Command::Ablate { kind } => {
            let kind = match kind {
                Kind::Decoder => AblationKind::Decoder,
                Kind::Curriculum => AblationKind::Curriculum,
                Kind::DomainDecomp => AblationKind::DomainDecomp,
            };
            let report = ablation_run(kind, &cfg, &out)?;
            for v in &report.variants {
                println!("{}: final loss {:.6e}; {}", v.label, v.final_total_loss, summary(&v.evaluation));
            }
        }
        Command::ExportPlotData { checkpoint: c, pick: p } => {
            let state = checkpoint(&cfg, &c)?;
            let d = pick(&cfg, &p)?;
            let reference = reference_solver(&cfg)?.solve(&d)?;
            let (pred, _) = predict_like(&state.triplet, &d, &reference)?;
            write_plot_data(&out.join("plot_data.csv"), &d, cfg.design.cool_down, &pred, &reference)?;
            println!("wrote {} rows", reference.n_times());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error kind={} msg={msg}", e.kind());
            ExitCode::FAILURE
        }
    }
}
