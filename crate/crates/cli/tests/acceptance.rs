//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 1 3 9`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use curenet_core::config::RunConfig;
use curenet_core::design::{read_designs_csv, write_designs_csv, DesignSpace, SamplingMethod};
use curenet_core::eval::{ablation_run, evaluate_run, train_run, AblationKind};
use curenet_core::losses::Phase;
use curenet_core::process::{CureKinetics, PropertyFile};
use curenet_core::solver::mms::{observed_orders, spatial_study, temporal_study};
use curenet_core::solver::{read_solution_csv, solve, solve_problem, write_solution_csv, AirTemperature, Grid1D, NoForcing, Problem};
use curenet_core::train::{
    load_checkpoint, read_history_csv, resume, save_checkpoint, train, train_until, write_history_csv, TrainState,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn config(name: &str, out: &Path) -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../config").join(name);
    let mut cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    cfg.out_dir = out.to_path_buf();
    cfg
}

fn autodiff() -> Check {
    let start = Instant::now();
    let ph = common::physics();
    let t = common::tame_triplet(2, 11);
    let set = common::small_set(&t, 2, 1, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut worst, mut min_probes, mut n) = (0.0_f64, usize::MAX, 0);
    for phase in [Phase::Temperature, Phase::Cure] {
        for (c, on) in phase.mask().iter().enumerate() {
            if *on {
                let r = common::fd::check_component(&t, &set, &ph, phase, c, &mut rng);
                worst = worst.max(r.worst);
                min_probes = min_probes.min(r.min_probes);
                n += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst < 1e-4 && min_probes >= 100 && secs < 60.0,
        format!("{n} components, >= {min_probes} probes per network, worst relative error {worst:.2e}, {secs:.1} s"),
    )
}

fn solver_convergence() -> Check {
    let start = Instant::now();
    let space = spatial_study().map_err(|e| e.to_string())?;
    let time = temporal_study().map_err(|e| e.to_string())?;
    let (ps, pt) = (observed_orders(&space), observed_orders(&time));

    let f = PropertyFile::default();
    let mut props = f.materials();
    props.part.heat_of_reaction = 0.0;
    let eq = Problem {
        props,
        kinetics: f.kinetics.clone(),
        constants: DesignSpace::small().midpoint().constants(),
        air: AirTemperature::Constant(20.0),
    };
    let (sol, _) = solve_problem(&eq, &Grid1D::with_defaults(6.0 * 3600.0), &NoForcing).map_err(|e| e.to_string())?;
    let drift = sol.t_tool.iter().chain(sol.t_part.iter()).fold(0.0_f64, |m, v| m.max((v - 20.0).abs()));

    let small = DesignSpace::small();
    let (mut vj, mut fj) = (0.0_f64, 0.0_f64);
    for d in small.sample(3, 4, SamplingMethod::Uniform) {
        let p = Problem::for_design(&d, &f.materials(), &f.kinetics, false);
        let (_, r) = solve_problem(&p, &Grid1D::with_defaults(small.horizon(false)), &NoForcing).map_err(|e| e.to_string())?;
        vj = vj.max(r.max_value_jump);
        fj = fj.max(r.max_flux_jump);
    }
    let secs = start.elapsed().as_secs_f64();
    let min_order = ps.iter().chain(&pt).copied().fold(f64::INFINITY, f64::min);
    ensure(
        min_order >= 1.9 && drift < 1e-10 && vj < 1e-9 && fj < 1e-9 && secs < 60.0,
        format!(
            "orders space {ps:.3?} time {pt:.3?}; equilibrium drift {drift:.1e} C; jumps value {vj:.1e} flux {fj:.1e}; {secs:.1} s"
        ),
    )
}

fn kinetics() -> Check {
    let k = CureKinetics::default();
    let mut fixed = true;
    for t in [300.0, 400.0, 450.0, 500.0, 600.0] {
        fixed &= k.cure_rate(0.0, t).map_err(|e| e.to_string())? == 0.0;
        fixed &= k.cure_rate(1.0, t).map_err(|e| e.to_string())? == 0.0;
    }
    let oracle = 2.4873191921680670407e-4;
    let got = k.cure_rate(0.5, 450.0).map_err(|e| e.to_string())?;
    let rel = ((got - oracle) / oracle).abs();
    ensure(fixed && rel < 1e-12, format!("fixed points exact: {fixed}; rate(0.5, 450 K) = {got:e}, relative error {rel:.1e}"))
}

fn scaled_training(dir: &Path) -> Check {
    let cfg = config("scaled-linear.toml", &dir.join("scaled-linear"));
    let start = Instant::now();
    let out = train_run(&cfg, Some(&cfg.out_dir)).map_err(|e| e.to_string())?;
    let train_secs = start.elapsed().as_secs_f64();
    let e = evaluate_run(&cfg, &out.state.triplet).map_err(|e| e.to_string())?;
    let m = &e.metrics;
    ensure(
        m.mid_trace_rel_l2 < 5e-2 && train_secs < 1800.0,
        format!(
            "mid-point trace rel L2 {:.3e} (part field {:.3e}, max abs {:.2} C) after {train_secs:.0} s of training",
            m.mid_trace_rel_l2, m.part.rel_l2, m.part.max_abs_err
        ),
    )
}

fn decoder_ablation(dir: &Path) -> Check {
    let cfg = config("scaled.toml", &dir.join("decoder"));
    let r = ablation_run(AblationKind::Decoder, &cfg, &cfg.out_dir).map_err(|e| e.to_string())?;
    let (nl, lin) = (r.variant("nonlinear").unwrap(), r.variant("linear").unwrap());
    ensure(
        nl.final_total_loss < lin.final_total_loss,
        format!("final total loss nonlinear {:.4e} vs linear {:.4e}", nl.final_total_loss, lin.final_total_loss),
    )
}

fn curriculum_ablation(dir: &Path) -> Check {
    let cfg = config("scaled.toml", &dir.join("curriculum"));
    let r = ablation_run(AblationKind::Curriculum, &cfg, &cfg.out_dir).map_err(|e| e.to_string())?;
    let mut wins = 0;
    let mut parts = Vec::new();
    for s in &cfg.eval.ablation_seeds {
        let c = r.variant(&format!("curriculum-seed{s}")).unwrap().evaluation.metrics.part.rel_l2;
        let n = r.variant(&format!("no-curriculum-seed{s}")).unwrap().evaluation.metrics.part.rel_l2;
        wins += usize::from(c <= n);
        parts.push(format!("seed {s}: {c:.4e} vs {n:.4e}"));
    }
    let total = cfg.eval.ablation_seeds.len();
    ensure(
        total == 2 && wins == total,
        format!("temperature rel L2 with vs without curriculum, {}; {wins}/{total}", parts.join(", ")),
    )
}

fn domain_decomposition(dir: &Path) -> Check {
    let mut cfg = config("scaled.toml", &dir.join("domain"));
    cfg.eval.ablation_subdomains = vec![1, 3];
    let r = ablation_run(AblationKind::DomainDecomp, &cfg, &cfg.out_dir).map_err(|e| e.to_string())?;
    let (one, three) = (r.variant("nd1").unwrap(), r.variant("nd3").unwrap());
    let (e1, e3) = (
        one.evaluation.metrics.exotherm_window_max_abs,
        three.evaluation.metrics.exotherm_window_max_abs,
    );
    let mismatch = three.evaluation.interface_mismatch;
    ensure(
        e3 < e1 && mismatch < 0.5,
        format!("exotherm-window max abs error N_d=3 {e3:.3} C vs N_d=1 {e1:.3} C; interface mismatch {mismatch:.3e}"),
    )
}

fn determinism(dir: &Path) -> Check {
    let cfg_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../config/tiny.toml");
    let mut histories = Vec::new();
    for run in ["a", "b"] {
        let out = dir.join(format!("det-{run}"));
        let status = Command::new(env!("CARGO_BIN_EXE_curenet"))
            .args(["--config", cfg_path.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "train"])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        histories.push(std::fs::read(out.join("loss_history.csv")).map_err(|e| e.to_string())?);
    }
    let same_history = histories[0] == histories[1];

    let cfg = config("tiny.toml", &dir.join("resume"));
    let designs = cfg.train_designs().map_err(|e| e.to_string())?;
    let setup = cfg.train_setup(None).map_err(|e| e.to_string())?;
    let init = || {
        curenet_core::operator::OperatorTriplet::init(&cfg.operator.config(), cfg.normalization().unwrap(), cfg.seed).unwrap()
    };
    let full = train(init(), &designs, cfg.plan.clone(), &setup, cfg.seed).map_err(|e| e.to_string())?;
    let mut st = TrainState::new(init(), cfg.plan.clone(), cfg.seed).map_err(|e| e.to_string())?;
    let half = cfg.plan.epochs / 2;
    train_until(&mut st, &designs, &setup, half).map_err(|e| e.to_string())?;
    let before = st.adam_temperature.step + st.adam_cure.step;
    let ck = dir.join("resume.ckpt");
    save_checkpoint(&ck, &st).map_err(|e| e.to_string())?;
    let resumed = resume(load_checkpoint(&ck).map_err(|e| e.to_string())?, &designs, &setup).map_err(|e| e.to_string())?;
    let steps = resumed.state.adam_temperature.step + resumed.state.adam_cure.step - before;
    let same_resume = resumed.state == full.state;
    ensure(
        same_history && same_resume && steps >= 10,
        format!("identical loss histories: {same_history}; resume matches uninterrupted run over {steps} steps: {same_resume}"),
    )
}

fn round_trips(dir: &Path) -> Check {
    let space = DesignSpace::small();
    let h = space.horizon(false);
    let designs = space.sample(200, 5, SamplingMethod::LatinHypercube);
    let mut worst = 0.0_f64;
    for d in &designs {
        let u = space.encode(d, h, false).map_err(|e| e.to_string())?;
        let back = [
            space.ranges[0].denormalize(u.bn1[0]),
            space.ranges[1].denormalize(u.bn1[1]),
            space.ranges[8].denormalize(u.bn1[2]),
            space.ranges[9].denormalize(u.bn1[3]),
        ];
        for (b, v) in back.iter().zip([d.h_top, d.h_bot, d.l_t, d.l_c]) {
            worst = worst.max(((b - v) / v).abs());
        }
        let cycle = d.cycle(false);
        for (i, s) in u.bn2.iter().enumerate() {
            let t = cycle.air_temperature(i as f64 * h / (u.bn2.len() - 1) as f64);
            worst = worst.max(((space.denormalize_air(*s) - t) / t).abs());
        }
    }
    let encode_ok = worst < 1e-14;

    let p = dir.join("designs.csv");
    write_designs_csv(&p, &designs, 5, &space.label).map_err(|e| e.to_string())?;
    let (back, seed, label) = read_designs_csv(&p).map_err(|e| e.to_string())?;
    let designs_ok = back == designs && seed == 5 && label == space.label;

    let f = PropertyFile::default();
    let mut g = Grid1D::with_defaults(space.horizon(false));
    (g.n_tool, g.n_part, g.dt) = (21, 21, 10.0);
    let sol = solve(&space.midpoint(), &f.materials(), &f.kinetics, &g).map_err(|e| e.to_string())?;
    let p = dir.join("solution.csv");
    write_solution_csv(&p, &sol).map_err(|e| e.to_string())?;
    let s2 = read_solution_csv(&p).map_err(|e| e.to_string())?;
    let solution_ok = s2.times == sol.times && s2.t_tool == sol.t_tool && s2.t_part == sol.t_part && s2.alpha == sol.alpha;

    let cfg = config("tiny.toml", &dir.join("rt"));
    let setup = cfg.train_setup(None).map_err(|e| e.to_string())?;
    let t = curenet_core::operator::OperatorTriplet::init(&cfg.operator.config(), cfg.normalization().unwrap(), 3).unwrap();
    let mut st = TrainState::new(t, cfg.plan.clone(), 3).map_err(|e| e.to_string())?;
    train_until(&mut st, &cfg.train_designs().unwrap(), &setup, 2).map_err(|e| e.to_string())?;
    let ck = dir.join("rt.ckpt");
    save_checkpoint(&ck, &st).map_err(|e| e.to_string())?;
    let ckpt_ok = load_checkpoint(&ck).map_err(|e| e.to_string())? == st;
    let hp = dir.join("history.csv");
    write_history_csv(&hp, &st.history).map_err(|e| e.to_string())?;
    let history_ok = read_history_csv(&hp).map_err(|e| e.to_string())? == st.history;

    ensure(
        encode_ok && designs_ok && solution_ok && ckpt_ok && history_ok,
        format!(
            "encode/denormalize worst relative {worst:.1e}; designs CSV {designs_ok}; solution CSV {solution_ok}; checkpoint {ckpt_ok}; history CSV {history_ok}"
        ),
    )
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Check + '_>)> = vec![
        (1, "autodiff gradients vs finite differences", Box::new(autodiff)),
        (2, "solver convergence, equilibrium, interface", Box::new(solver_convergence)),
        (3, "cure kinetics fixed points and oracle", Box::new(kinetics)),
        (4, "scaled linear training accuracy", Box::new(|| scaled_training(d))),
        (5, "decoder ablation", Box::new(|| decoder_ablation(d))),
        (6, "curriculum ablation", Box::new(|| curriculum_ablation(d))),
        (7, "domain decomposition", Box::new(|| domain_decomposition(d))),
        (8, "determinism and resume", Box::new(|| determinism(d))),
        (9, "round trips", Box::new(|| round_trips(d))),
    ];
    let mut failed = 0;
    for (id, name, f) in &criteria {
        if !selected.is_empty() && !selected.contains(id) {
            continue;
        }
        let start = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = Duration::as_secs_f64(&start.elapsed());
        let (tag, detail) = match r {
            Ok(s) => ("PASS", s),
            Err(s) => {
                failed += 1;
                ("FAIL", s)
            }
        };
        println!("criterion {id} {tag}: {name}: {detail} [{secs:.1} s]");
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
}
