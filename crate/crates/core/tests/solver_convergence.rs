use curenet_core::design::{DesignSpace, SamplingMethod};
use curenet_core::field::FieldKind;
use curenet_core::process::PropertyFile;
use curenet_core::solver::mms::{observed_orders, spatial_study, temporal_study};
use curenet_core::solver::{solve, solve_problem, AirTemperature, Grid1D, NoForcing, Problem};

#[test]
fn spatial_order_at_least_1_9() {
    let errors = spatial_study().unwrap();
    let orders = observed_orders(&errors);
    println!("spatial errors {errors:?} orders {orders:?}");
    assert!(orders.iter().all(|&p| p >= 1.9), "{orders:?}");
}

#[test]
fn temporal_order_at_least_1_9() {
    let errors = temporal_study().unwrap();
    let orders = observed_orders(&errors);
    println!("temporal errors {errors:?} orders {orders:?}");
    assert!(orders.iter().all(|&p| p >= 1.9), "{orders:?}");
}

fn equilibrium_problem() -> Problem {
    let mut props = PropertyFile::default().materials();
    props.part.heat_of_reaction = 0.0;
    let d = DesignSpace::small().midpoint();
    Problem {
        props,
        kinetics: PropertyFile::default().kinetics,
        constants: d.constants(),
        air: AirTemperature::Constant(20.0),
    }
}

#[test]
fn equilibrium_is_stationary() {
    let grid = Grid1D::with_defaults(6.0 * 3600.0);
    let (sol, report) = solve_problem(&equilibrium_problem(), &grid, &NoForcing).unwrap();
    let drift = sol
        .t_tool
        .iter()
        .chain(sol.t_part.iter())
        .fold(0.0_f64, |m, v| m.max((v - 20.0).abs()));
    assert!(drift < 1e-10, "{drift}");
    assert!(report.max_linear_residual < 1e-12, "{report:?}");
    // Cure still creeps at 20 °C: about 6e-11 1/s.
    assert!(sol.alpha.iter().all(|a| (a - 0.05).abs() < 1e-5));
}

#[test]
fn interface_rows_hold_every_step() {
    let space = DesignSpace::small();
    let props = PropertyFile::default();
    for d in space.sample(3, 4, SamplingMethod::Uniform) {
        let problem = Problem::for_design(&d, &props.materials(), &props.kinetics, false);
        let (_, report) = solve_problem(&problem, &Grid1D::with_defaults(space.horizon(false)), &NoForcing).unwrap();
        assert!(report.max_value_jump < 1e-9, "{report:?}");
        assert!(report.max_flux_jump < 1e-9, "{report:?}");
    }
}

#[test]
fn exotherm_and_probes_agree_with_finer_grid() {
    let space = DesignSpace::small();
    let d = space.sample(1, 21, SamplingMethod::Uniform)[0];
    let props = PropertyFile::default();
    let base = Grid1D::with_defaults(space.horizon(false));
    let fine = Grid1D {
        n_tool: 161,
        n_part: 161,
        dt: 0.5,
        save_every: 20,
        ..base.clone()
    };
    let a = solve(&d, &props.materials(), &props.kinetics, &base).unwrap();
    let b = solve(&d, &props.materials(), &props.kinetics, &fine).unwrap();
    let (ea, eb) = (a.exotherm().unwrap(), b.exotherm().unwrap());
    assert!((ea.temperature - eb.temperature).abs() < 0.2, "{ea:?} {eb:?}");

    // Probes off the stored grid: interpolation over 10 s and 1/80 in x.
    for k in 0..50 {
        let x = (k as f64 * 0.618).fract();
        let t = a.t_end() * (k as f64 * 0.377).fract();
        let pa = a.probe(x, t, FieldKind::PartTemperature).unwrap();
        let pb = b.probe(x, t, FieldKind::PartTemperature).unwrap();
        assert!((pa - pb).abs() < 0.5, "x {x} t {t}: {pa} vs {pb}");
    }
}

#[test]
fn final_cure_converges_across_three_grids() {
    let space = DesignSpace::small();
    let d = space.midpoint();
    let props = PropertyFile::default();
    let mut finals = Vec::new();
    for (n, dt) in [(21, 4.0), (41, 2.0), (81, 1.0)] {
        let grid = Grid1D {
            n_tool: n,
            n_part: n,
            dt,
            ..Grid1D::with_defaults(space.horizon(false))
        };
        let sol = solve(&d, &props.materials(), &props.kinetics, &grid).unwrap();
        let last = sol.n_times() - 1;
        finals.push(sol.alpha.row(last).iter().copied().fold(f64::INFINITY, f64::min));
    }
    let (e1, e2) = ((finals[0] - finals[1]).abs(), (finals[1] - finals[2]).abs());
    let extrapolated = finals[2] + (finals[2] - finals[1]) / 3.0;
    println!("final min alpha {finals:?}, extrapolated {extrapolated}");
    assert!(e2 <= e1 + 1e-12);
    assert!((extrapolated - finals[2]).abs() < 1e-3);
    assert!(extrapolated > 0.83);
}
