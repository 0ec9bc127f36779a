mod common;

use common::{designs, physics, tame_triplet};
use curenet_core::design::DesignSpace;
use curenet_core::losses::{CollocationConfig, LossWeights, Phase};
use curenet_core::operator::{Normalization, OperatorConfig, OperatorTriplet};
use curenet_core::par::Parallelism;
use curenet_core::train::{
    load_checkpoint, read_history_csv, resume, save_checkpoint, train, train_until, write_history_csv, TrainPlan,
    TrainSetup, TrainState,
};

fn setup(dps: usize) -> TrainSetup {
    TrainSetup {
        physics: physics(),
        weights: LossWeights::default(),
        collocation: CollocationConfig {
            designs_per_step: dps,
            interior: 0,
            ic: 8,
            bc: 8,
            interface_temporal: 8,
            interface_material: 8,
        },
        par: Parallelism::Parallel,
        checkpoint_dir: None,
    }
}

fn plan(block: usize, cycles: usize, curriculum: Vec<f64>) -> TrainPlan {
    TrainPlan {
        batch_size: 16,
        block_epochs: block,
        cycles,
        epochs: 2 * block * cycles,
        curriculum,
        checkpoint_every: 0,
        ..TrainPlan::default()
    }
}

#[test]
fn zero_learning_rate_keeps_parameters() {
    let t = tame_triplet(2, 1);
    let p = TrainPlan {
        lr0: 0.0,
        ..plan(2, 1, vec![1.0])
    };
    let out = train(t.clone(), &designs(2, 1), p, &setup(1), 7).unwrap();
    assert_eq!(out.state.triplet, t);
    assert_eq!(out.state.adam_temperature.step, 4);
    assert_eq!(out.state.adam_cure.step, 4);
}

#[test]
fn frozen_operators_are_bit_identical_across_their_phase() {
    let t = tame_triplet(2, 2);
    let ds = designs(2, 2);
    let s = setup(1);
    let mut st = TrainState::new(t, plan(3, 1, vec![1.0]), 3).unwrap();
    let before = st.triplet.clone();
    train_until(&mut st, &ds, &s, 3).unwrap();
    assert_eq!(st.triplet.alpha, before.alpha);
    assert_ne!(st.triplet.tool, before.tool);
    assert_ne!(st.triplet.part, before.part);
    let mid = st.triplet.clone();
    train_until(&mut st, &ds, &s, 6).unwrap();
    assert_eq!((&st.triplet.tool, &st.triplet.part), (&mid.tool, &mid.part));
    assert_ne!(st.triplet.alpha, mid.alpha);
    let phases: Vec<Phase> = st.history.iter().map(|r| r.phase).collect();
    assert_eq!(phases, [[Phase::Temperature; 3], [Phase::Cure; 3]].concat());
    // Inactive components are carried forward, active ones change.
    let (a, b) = (st.history[2].breakdown, st.history[3].breakdown);
    assert_eq!((a.l_pde_tool, a.l_ct_value), (b.l_pde_tool, b.l_ct_value));
    assert_ne!(a.l_ode, b.l_ode);
}

#[test]
fn curriculum_stage_zero_equals_training_without_heat_generation() {
    let ds = designs(2, 4);
    let with = setup(1);
    let mut without = setup(1);
    without.physics.props.part.heat_of_reaction = 0.0;
    let mut a = TrainState::new(tame_triplet(2, 4), plan(2, 2, vec![0.0, 1.0]), 5).unwrap();
    let mut b = TrainState::new(tame_triplet(2, 4), plan(2, 2, vec![1.0]), 5).unwrap();
    train_until(&mut a, &ds, &with, 4).unwrap();
    train_until(&mut b, &ds, &without, 4).unwrap();
    assert_eq!(a.triplet, b.triplet);
    assert_eq!(a.history[1..], b.history[1..]);
}

#[test]
fn initial_condition_loss_drops_tenfold_on_linear_problem() {
    // One design without heat generation, default operator and plan, 20 epochs.
    let mut s = setup(16);
    s.physics.props.part.heat_of_reaction = 0.0;
    s.collocation = CollocationConfig::default();
    let norm = Normalization::new(&DesignSpace::small(), false);
    let t = OperatorTriplet::init(&OperatorConfig::default(), norm, 6).unwrap();
    let p = TrainPlan {
        block_epochs: 20,
        cycles: 1,
        epochs: 40,
        curriculum: vec![1.0],
        ..TrainPlan::default()
    };
    let mut st = TrainState::new(t, p, 6).unwrap();
    train_until(&mut st, &designs(1, 6), &s, 20).unwrap();
    let init = st.history[0].breakdown.l_ic_t;
    let last = st.latest.unwrap().l_ic_t;
    assert!(last * 10.0 <= init, "l_ic_T {init:e} -> {last:e}");
}

#[test]
fn checkpoint_round_trip_and_version_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run/a.ckpt");
    let mut st = TrainState::new(tame_triplet(3, 8), plan(1, 2, vec![0.5, 1.0]), 8).unwrap();
    train_until(&mut st, &designs(2, 8), &setup(1), 3).unwrap();
    save_checkpoint(&path, &st).unwrap();
    let back = load_checkpoint(&path).unwrap();
    assert_eq!(back, st);
    assert!(!dir.path().join("run/a.ckpt.tmp").exists());

    let mut bytes = std::fs::read(&path).unwrap();
    bytes[8..12].copy_from_slice(&99u32.to_le_bytes());
    let bad = dir.path().join("bad.ckpt");
    std::fs::write(&bad, &bytes).unwrap();
    let e = load_checkpoint(&bad).unwrap_err();
    assert_eq!(e.kind(), "checkpoint");
    assert!(e.to_string().contains("version 99"), "{e}");

    std::fs::write(&bad, &std::fs::read(&path).unwrap()[..100]).unwrap();
    assert!(load_checkpoint(&bad).is_err());
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let ds = designs(3, 9);
    let s = setup(1);
    let p = plan(2, 2, vec![0.5, 1.0]);
    let full = train(tame_triplet(2, 9), &ds, p.clone(), &s, 9).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mid.ckpt");
    let mut st = TrainState::new(tame_triplet(2, 9), p, 9).unwrap();
    train_until(&mut st, &ds, &s, 2).unwrap();
    save_checkpoint(&path, &st).unwrap();
    drop(st);
    let resumed = resume(load_checkpoint(&path).unwrap(), &ds, &s).unwrap();
    // Six epochs of three steps each after the checkpoint.
    assert_eq!(resumed.state.adam_temperature.step + resumed.state.adam_cure.step, 24);
    assert_eq!(resumed.state, full.state);
    assert_eq!(resumed.final_breakdown, full.final_breakdown);
}

#[test]
fn seeded_runs_write_identical_histories() {
    let ds = designs(2, 10);
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for (i, par) in [Parallelism::Parallel, Parallelism::Sequential].into_iter().enumerate() {
        let s = TrainSetup { par, ..setup(2) };
        let out = train(tame_triplet(2, 10), &ds, plan(1, 2, vec![0.0, 1.0]), &s, 10).unwrap();
        let p = dir.path().join(format!("h{i}.csv"));
        write_history_csv(&p, &out.state.history).unwrap();
        assert_eq!(read_history_csv(&p).unwrap(), out.state.history);
        texts.push(std::fs::read(&p).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let other = train(tame_triplet(2, 10), &ds, plan(1, 2, vec![0.0, 1.0]), &setup(2), 11).unwrap();
    assert_ne!(other.state.history, read_history_csv(&dir.path().join("h0.csv")).unwrap());
}

#[test]
fn divergence_aborts_with_last_good_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let s = TrainSetup {
        checkpoint_dir: Some(dir.path().to_path_buf()),
        ..setup(1)
    };
    let p = TrainPlan {
        lr0: 5.0,
        divergence_factor: 1.5,
        ..plan(4, 1, vec![1.0])
    };
    let mut st = TrainState::new(tame_triplet(2, 12), p, 12).unwrap();
    let e = train_until(&mut st, &designs(4, 12), &s, 8).unwrap_err();
    assert_eq!(e.kind(), "training");
    assert!(e.to_string().contains("diverged"), "{e}");
    let good = load_checkpoint(&dir.path().join("last_good.ckpt")).unwrap();
    assert_eq!(good, st);
    assert!(st.triplet.models().iter().all(|m| m.is_finite()));
}
