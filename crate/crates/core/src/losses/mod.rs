//! Physics-informed loss components of the operator triplet.
//!
//! Every residual is evaluated in normalized units: temperatures as
//! `θ = (T − t0)/ΔT`, time as `τ = t/H`. The heat equations are therefore
//! scaled by `H/ΔT`, the cure ODE by `H`, the Robin conditions by `1/ΔT`, and
//! the flux continuity by `1/(ΔT·k_c/L_c)`.

mod collocation;

pub use collocation::{
    sample_collocation, CollocationConfig, CollocationSet, Counts, DesignCollocation, InterfacePoints, Points,
};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::autodiff::{seed_jets, slot_d1, slot_d2, GradStatus, Gradients, NetId, ParamGradient, Tape, Var};
use crate::operator::{DeepONetModel, OperatorTriplet};
use crate::par::Parallelism;
use crate::process::{CureKinetics, MaterialProps, ThermalCoefficients, ALPHA_GUARD, COORD_T, COORD_X};
use crate::units::KELVIN_OFFSET;
use crate::{Error, Result};

pub const N_COMPONENTS: usize = 11;

/// Column names used in loss histories, in component order.
pub const COMPONENT_NAMES: [&str; N_COMPONENTS] = [
    "l_ic_T",
    "l_ic_alpha",
    "l_bc_top",
    "l_bc_bot",
    "l_pde_tool",
    "l_pde_part",
    "l_ode",
    "l_if_temporal",
    "l_if_alpha",
    "l_ct_value",
    "l_ct_flux",
];

const IC_T: usize = 0;
const IC_A: usize = 1;
const BC_TOP: usize = 2;
const BC_BOT: usize = 3;
const PDE_TOOL: usize = 4;
const PDE_PART: usize = 5;
const ODE: usize = 6;
const IF_T: usize = 7;
const IF_A: usize = 8;
const CT_VAL: usize = 9;
const CT_FLUX: usize = 10;

/// Mean-square loss components. `l_if_temporal` covers the two temperature
/// operators, `l_if_alpha` the degree-of-cure operator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_ic_t: f64,
    pub l_ic_alpha: f64,
    pub l_bc_top: f64,
    pub l_bc_bot: f64,
    pub l_pde_tool: f64,
    pub l_pde_part: f64,
    pub l_ode: f64,
    pub l_if_temporal: f64,
    pub l_if_alpha: f64,
    pub l_ct_value: f64,
    pub l_ct_flux: f64,
}

impl LossBreakdown {
    pub fn to_array(&self) -> [f64; N_COMPONENTS] {
        [
            self.l_ic_t,
            self.l_ic_alpha,
            self.l_bc_top,
            self.l_bc_bot,
            self.l_pde_tool,
            self.l_pde_part,
            self.l_ode,
            self.l_if_temporal,
            self.l_if_alpha,
            self.l_ct_value,
            self.l_ct_flux,
        ]
    }

    pub fn from_array(a: [f64; N_COMPONENTS]) -> Self {
        LossBreakdown {
            l_ic_t: a[IC_T],
            l_ic_alpha: a[IC_A],
            l_bc_top: a[BC_TOP],
            l_bc_bot: a[BC_BOT],
            l_pde_tool: a[PDE_TOOL],
            l_pde_part: a[PDE_PART],
            l_ode: a[ODE],
            l_if_temporal: a[IF_T],
            l_if_alpha: a[IF_A],
            l_ct_value: a[CT_VAL],
            l_ct_flux: a[CT_FLUX],
        }
    }

    /// Weighted sum restricted to the components of `phase`.
    pub fn phase_total(&self, weights: &LossWeights, phase: Phase) -> f64 {
        let mask = phase.mask();
        self.to_array()
            .iter()
            .zip(weights.to_array())
            .zip(mask)
            .filter(|(_, m)| *m)
            .map(|((l, w), _)| w * l)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Σ wᵢ·lᵢ over all components.
pub fn total_loss(breakdown: &LossBreakdown, weights: &LossWeights) -> f64 {
    breakdown.phase_total(weights, Phase::All)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub ic_t: f64,
    pub ic_alpha: f64,
    pub bc_top: f64,
    pub bc_bot: f64,
    pub pde_tool: f64,
    pub pde_part: f64,
    pub ode: f64,
    pub if_temporal: f64,
    pub if_alpha: f64,
    pub ct_value: f64,
    pub ct_flux: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights::from_array([1.0; N_COMPONENTS])
    }
}

impl LossWeights {
    pub fn to_array(&self) -> [f64; N_COMPONENTS] {
        [
            self.ic_t,
            self.ic_alpha,
            self.bc_top,
            self.bc_bot,
            self.pde_tool,
            self.pde_part,
            self.ode,
            self.if_temporal,
            self.if_alpha,
            self.ct_value,
            self.ct_flux,
        ]
    }

    pub fn from_array(a: [f64; N_COMPONENTS]) -> Self {
        LossWeights {
            ic_t: a[IC_T],
            ic_alpha: a[IC_A],
            bc_top: a[BC_TOP],
            bc_bot: a[BC_BOT],
            pde_tool: a[PDE_TOOL],
            pde_part: a[PDE_PART],
            ode: a[ODE],
            if_temporal: a[IF_T],
            if_alpha: a[IF_A],
            ct_value: a[CT_VAL],
            ct_flux: a[CT_FLUX],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::config("loss weights must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Which operators are trained and which components are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Tool and part temperature operators; degree of cure frozen.
    Temperature,
    /// Degree-of-cure operator; temperatures frozen.
    Cure,
    /// Every component, nothing trained.
    All,
}

impl Phase {
    pub fn mask(self) -> [bool; N_COMPONENTS] {
        let mut m = [false; N_COMPONENTS];
        let on: &[usize] = match self {
            Phase::Temperature => &[IC_T, BC_TOP, BC_BOT, PDE_TOOL, PDE_PART, IF_T, CT_VAL, CT_FLUX],
            Phase::Cure => &[IC_A, ODE, IF_A],
            Phase::All => &[IC_T, IC_A, BC_TOP, BC_BOT, PDE_TOOL, PDE_PART, ODE, IF_T, IF_A, CT_VAL, CT_FLUX],
        };
        for &i in on {
            m[i] = true;
        }
        m
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Temperature => "temperature",
            Phase::Cure => "cure",
            Phase::All => "all",
        }
    }
}

/// Material data the residuals depend on.
#[derive(Debug, Clone, PartialEq)]
pub struct Physics {
    pub props: MaterialProps,
    pub kinetics: CureKinetics,
}

/// Loss values and, when requested, gradients for every network of the
/// triplet in the order tool, part, degree of cure (each as
/// [`DeepONetModel::nets`]); frozen networks have `None`.
#[derive(Debug, Clone)]
pub struct LossEvaluation {
    pub breakdown: LossBreakdown,
    pub gradients: Option<Vec<Option<ParamGradient>>>,
}

struct TapedModel {
    bn1: NetId,
    bn2: NetId,
    trunk: NetId,
    decoders: Vec<NetId>,
}

impl TapedModel {
    fn register<'p>(tape: &mut Tape<'p>, m: &'p DeepONetModel, trainable: bool) -> Self {
        TapedModel {
            bn1: tape.register(&m.bn1, trainable),
            bn2: tape.register(&m.bn2, trainable),
            trunk: tape.register(&m.trunk, trainable),
            decoders: m.decoders.iter().map(|d| tape.register(d, trainable)).collect(),
        }
    }

    fn branch(&self, tape: &mut Tape<'_>, dc: &DesignCollocation) -> Result<Var> {
        let u1 = tape.constant(Array2::from_shape_vec((dc.input.bn1.len(), 1), dc.input.bn1.to_vec()).expect("shape"));
        let u2 = tape.constant(Array2::from_shape_vec((dc.input.bn2.len(), 1), dc.input.bn2.clone()).expect("shape"));
        let b1 = tape.mlp(self.bn1, u1, 0)?;
        let b2 = tape.mlp(self.bn2, u2, 0)?;
        Ok(tape.hadamard(b1, b2))
    }

    /// Jet batch `1 × S·B` of outputs at `pts`, derivatives along `tracked`.
    fn eval(&self, tape: &mut Tape<'_>, merged: Var, pts: &Points, tracked: &[usize]) -> Result<Var> {
        let k_tr = tracked.len();
        let mut parts = Vec::with_capacity(pts.groups.len());
        for &(k, s, e) in &pts.groups {
            let coords = Array2::from_shape_fn((2, e - s), |(r, c)| {
                if r == COORD_X {
                    pts.x[s + c]
                } else {
                    pts.tau[s + c]
                }
            });
            let seeds = tape.constant(seed_jets(coords.view(), tracked));
            let feats = tape.mlp(self.trunk, seeds, k_tr)?;
            let feats = tape.mul_column(feats, merged);
            parts.push(tape.mlp(self.decoders[k], feats, k_tr)?);
        }
        Ok(if parts.len() == 1 {
            parts[0]
        } else {
            tape.concat_jets(&parts, k_tr)
        })
    }
}

fn row(values: impl Iterator<Item = f64>) -> Array2<f64> {
    let v: Vec<f64> = values.collect();
    Array2::from_shape_vec((1, v.len()), v).expect("row")
}

fn fixed_x(x: f64, tau: &[f64], partition: &crate::operator::Partition) -> Points {
    Points::by_subdomain(vec![x; tau.len()], tau.to_vec(), partition)
}

struct ShardOut {
    sums: [f64; N_COMPONENTS],
    grads: Option<Gradients>,
}

/// Normalized cure rate `H·dα/dt` on the tape.
///
/// `α` is floored at `alpha_floor`. The exact solution never falls below its
/// initial degree of cure, and without the floor a network can sit at
/// `α ≤ 0`, where the autocatalytic rate vanishes and so does the residual.
#[allow(clippy::too_many_arguments)]
fn cure_rate_tape(
    tape: &mut Tape<'_>,
    kin: &CureKinetics,
    alpha: Var,
    theta: Var,
    alpha_floor: f64,
    t0: f64,
    dt: f64,
    horizon: f64,
) -> Var {
    let a = tape.clamp(alpha, alpha_floor.max(ALPHA_GUARD), 1.0 - ALPHA_GUARD);
    let tk = tape.lin(theta, dt, t0 + KELVIN_OFFSET);
    // Keeps an untrained temperature network from overflowing the Arrhenius factor.
    let tk = tape.clamp(tk, 150.0, 1000.0);
    let inv = tape.recip(tk);
    let arr = tape.lin(inv, -kin.activation_energy / kin.gas_constant, kin.pre_exponential.ln());
    let arr = tape.exp(arr);
    let crit = tape.lin(tk, kin.critical_slope, kin.critical_c0);
    let over = tape.sub(a, crit);
    let e = tape.lin(over, kin.diffusion, 0.0);
    let e = tape.exp(e);
    let denom = tape.lin(e, 1.0, 1.0);
    let cut = tape.recip(denom);
    let am = tape.powf(a, kin.m);
    let one_minus = tape.lin(a, -1.0, 1.0);
    let bn = tape.powf(one_minus, kin.n);
    let r = tape.mul(arr, cut);
    let r = tape.mul(r, am);
    let r = tape.mul(r, bn);
    tape.lin(r, horizon, 0.0)
}

fn denominators(c: &Counts) -> [usize; N_COMPONENTS] {
    [
        2 * c.ic,
        c.ic,
        c.bc,
        c.bc,
        c.tool,
        c.part,
        c.part,
        2 * c.interface,
        c.interface,
        c.ct,
        c.ct,
    ]
}

#[allow(clippy::too_many_arguments)]
fn shard(
    triplet: &OperatorTriplet,
    dc: &DesignCollocation,
    physics: &Physics,
    coeff_scale: [f64; N_COMPONENTS],
    bc_scale: f64,
    phase: Phase,
    mask: [bool; N_COMPONENTS],
    want_grad: bool,
) -> Result<ShardOut> {
    let norm = &triplet.norm;
    let partition = &triplet.tool.partition;
    let (h, dt, t0) = (norm.horizon, norm.delta_t(), norm.t0);
    let consts = dc.design.constants();
    let c = ThermalCoefficients::new(&physics.props, &consts)?;
    let theta_init = (consts.t_init - t0) / dt;

    let mut tape = Tape::new();
    let train_t = want_grad && phase == Phase::Temperature;
    let train_a = want_grad && phase == Phase::Cure;
    let tool = TapedModel::register(&mut tape, &triplet.tool, train_t);
    let part = TapedModel::register(&mut tape, &triplet.part, train_t);
    let alpha = TapedModel::register(&mut tape, &triplet.alpha, train_a);

    let needs_tool = mask[IC_T] || mask[BC_BOT] || mask[PDE_TOOL] || mask[IF_T] || mask[CT_VAL] || mask[CT_FLUX];
    let needs_part = needs_tool || mask[BC_TOP] || mask[PDE_PART] || mask[ODE];
    let needs_alpha = mask[IC_A] || mask[ODE] || mask[IF_A] || (mask[PDE_PART] && bc_scale > 0.0);
    let b_tool = if needs_tool { Some(tool.branch(&mut tape, dc)?) } else { None };
    let b_part = if needs_part { Some(part.branch(&mut tape, dc)?) } else { None };
    let b_alpha = if needs_alpha { Some(alpha.branch(&mut tape, dc)?) } else { None };

    let mut terms: [Option<Var>; N_COMPONENTS] = [None; N_COMPONENTS];
    let xt = [COORD_X, COORD_T];
    let (ix, it) = (0, 1);

    if mask[IC_T] || mask[IC_A] {
        let pts = Points::by_subdomain(dc.ic_x.clone(), vec![0.0; dc.ic_x.len()], partition);
        if mask[IC_T] {
            let vt = tool.eval(&mut tape, b_tool.expect("tool"), &pts, &[])?;
            let vc = part.eval(&mut tape, b_part.expect("part"), &pts, &[])?;
            let rt = tape.lin(vt, 1.0, -theta_init);
            let rc = tape.lin(vc, 1.0, -theta_init);
            let (st, sc) = (tape.sum_squares(rt), tape.sum_squares(rc));
            terms[IC_T] = Some(tape.add(st, sc));
        }
        if mask[IC_A] {
            let va = alpha.eval(&mut tape, b_alpha.expect("alpha"), &pts, &[])?;
            let r = tape.lin(va, 1.0, -consts.alpha_init);
            terms[IC_A] = Some(tape.sum_squares(r));
        }
    }

    if mask[BC_BOT] {
        let pts = fixed_x(0.0, &dc.bc_tau, partition);
        let air = row(pts.tau.iter().map(|&t| c.biot_bot * norm.air(&dc.design, t)));
        let out = tool.eval(&mut tape, b_tool.expect("tool"), &pts, &[COORD_X])?;
        let v = tape.slot(out, 0, 0, 1);
        let dx = tape.slot(out, 0, slot_d1(0), 1);
        let bv = tape.lin(v, c.biot_bot, 0.0);
        let r = tape.sub(dx, bv);
        let r = tape.add_const(r, &air);
        terms[BC_BOT] = Some(tape.sum_squares(r));
    }
    if mask[BC_TOP] {
        let pts = fixed_x(1.0, &dc.bc_tau, partition);
        let air = row(pts.tau.iter().map(|&t| -c.biot_top * norm.air(&dc.design, t)));
        let out = part.eval(&mut tape, b_part.expect("part"), &pts, &[COORD_X])?;
        let v = tape.slot(out, 0, 0, 1);
        let dx = tape.slot(out, 0, slot_d1(0), 1);
        let bv = tape.lin(v, c.biot_top, 0.0);
        let r = tape.add(dx, bv);
        let r = tape.add_const(r, &air);
        terms[BC_TOP] = Some(tape.sum_squares(r));
    }

    if mask[CT_VAL] || mask[CT_FLUX] {
        let pt = fixed_x(1.0, &dc.ct_tau, partition);
        let pc = fixed_x(0.0, &dc.ct_tau, partition);
        let ot = tool.eval(&mut tape, b_tool.expect("tool"), &pt, &[COORD_X])?;
        let oc = part.eval(&mut tape, b_part.expect("part"), &pc, &[COORD_X])?;
        if mask[CT_VAL] {
            let (vt, vc) = (tape.slot(ot, 0, 0, 1), tape.slot(oc, 0, 0, 1));
            let r = tape.sub(vt, vc);
            terms[CT_VAL] = Some(tape.sum_squares(r));
        }
        if mask[CT_FLUX] {
            let (dt_, dc_) = (tape.slot(ot, 0, slot_d1(0), 1), tape.slot(oc, 0, slot_d1(0), 1));
            let kt = tape.lin(dt_, c.tool_flux / c.part_flux, 0.0);
            let r = tape.sub(kt, dc_);
            terms[CT_FLUX] = Some(tape.sum_squares(r));
        }
    }

    if mask[PDE_TOOL] && !dc.tool.is_empty() {
        let out = tool.eval(&mut tape, b_tool.expect("tool"), &dc.tool, &xt)?;
        let tau_d = tape.slot(out, 0, slot_d1(it), 2);
        let xx = tape.slot(out, 0, slot_d2(ix, 2), 2);
        let diff = tape.lin(xx, c.tool_diffusion * h, 0.0);
        let r = tape.sub(tau_d, diff);
        terms[PDE_TOOL] = Some(tape.sum_squares(r));
    }

    let need_alpha_rate = (mask[PDE_PART] && bc_scale > 0.0) || mask[ODE];
    let alpha_part = if need_alpha_rate && !dc.part.is_empty() {
        Some(alpha.eval(&mut tape, b_alpha.expect("alpha"), &dc.part, &[COORD_T])?)
    } else {
        None
    };
    let mut part_theta = None;
    if mask[PDE_PART] && !dc.part.is_empty() {
        let out = part.eval(&mut tape, b_part.expect("part"), &dc.part, &xt)?;
        part_theta = Some(tape.slot(out, 0, 0, 2));
        let tau_d = tape.slot(out, 0, slot_d1(it), 2);
        let xx = tape.slot(out, 0, slot_d2(ix, 2), 2);
        let diff = tape.lin(xx, c.part_diffusion * h, 0.0);
        let mut r = tape.sub(tau_d, diff);
        if bc_scale > 0.0 {
            let a_tau = tape.slot(alpha_part.expect("alpha rate"), 0, slot_d1(0), 1);
            let gen = tape.lin(a_tau, bc_scale * c.generation / dt, 0.0);
            r = tape.sub(r, gen);
        }
        terms[PDE_PART] = Some(tape.sum_squares(r));
    }
    if mask[ODE] && !dc.part.is_empty() {
        let theta = match part_theta {
            Some(v) => v,
            None => part.eval(&mut tape, b_part.expect("part"), &dc.part, &[])?,
        };
        let oa = alpha_part.expect("alpha rate");
        let a = tape.slot(oa, 0, 0, 1);
        let a_tau = tape.slot(oa, 0, slot_d1(0), 1);
        let rate = cure_rate_tape(&mut tape, &physics.kinetics, a, theta, consts.alpha_init, t0, dt, h);
        let r = tape.sub(a_tau, rate);
        terms[ODE] = Some(tape.sum_squares(r));
    }

    if !dc.interface.left.is_empty() {
        let (l, rt) = (&dc.interface.left, &dc.interface.right);
        if mask[IF_T] {
            let mut acc = None;
            for (m, b) in [(&tool, b_tool.expect("tool")), (&part, b_part.expect("part"))] {
                let yl = m.eval(&mut tape, b, l, &[])?;
                let yr = m.eval(&mut tape, b, rt, &[])?;
                let d = tape.sub(yl, yr);
                let s = tape.sum_squares(d);
                acc = Some(match acc {
                    Some(a) => tape.add(a, s),
                    None => s,
                });
            }
            terms[IF_T] = acc;
        }
        if mask[IF_A] {
            let b = b_alpha.expect("alpha");
            let yl = alpha.eval(&mut tape, b, l, &[])?;
            let yr = alpha.eval(&mut tape, b, rt, &[])?;
            let d = tape.sub(yl, yr);
            terms[IF_A] = Some(tape.sum_squares(d));
        }
    }

    let mut sums = [0.0; N_COMPONENTS];
    let mut loss: Option<Var> = None;
    for i in 0..N_COMPONENTS {
        if let Some(v) = terms[i] {
            sums[i] = tape.scalar(v);
            if want_grad && coeff_scale[i] != 0.0 {
                let scaled = tape.lin(v, coeff_scale[i], 0.0);
                loss = Some(match loss {
                    Some(l) => tape.add(l, scaled),
                    None => scaled,
                });
            }
        }
    }
    let grads = if want_grad {
        let loss = loss.unwrap_or_else(|| tape.scalar_constant(0.0));
        Some(tape.backward(loss))
    } else {
        None
    };
    Ok(ShardOut { sums, grads })
}

/// Evaluates the components of `phase` on a collocation set; with
/// `want_grad`, also the gradient of their weighted sum with respect to the
/// operators trained in that phase.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    triplet: &OperatorTriplet,
    set: &CollocationSet,
    physics: &Physics,
    weights: &LossWeights,
    bc_scale: f64,
    phase: Phase,
    want_grad: bool,
    par: Parallelism,
) -> Result<LossEvaluation> {
    evaluate_masked(triplet, set, physics, weights, bc_scale, phase, phase.mask(), want_grad, par)
}

#[allow(clippy::too_many_arguments)]
fn evaluate_masked(
    triplet: &OperatorTriplet,
    set: &CollocationSet,
    physics: &Physics,
    weights: &LossWeights,
    bc_scale: f64,
    phase: Phase,
    mask: [bool; N_COMPONENTS],
    want_grad: bool,
    par: Parallelism,
) -> Result<LossEvaluation> {
    if set.designs.is_empty() {
        return Err(Error::domain("empty collocation set"));
    }
    if !(0.0..=1.0).contains(&bc_scale) {
        return Err(Error::domain(format!("bc_scale must lie in [0, 1], got {bc_scale}")));
    }
    weights.validate()?;
    triplet.validate()?;
    let want_grad = want_grad && phase != Phase::All;
    let den = denominators(&set.counts());
    let w = weights.to_array();
    let mut coeff_scale = [0.0; N_COMPONENTS];
    for i in 0..N_COMPONENTS {
        if mask[i] && den[i] > 0 {
            coeff_scale[i] = w[i] / den[i] as f64;
        }
    }
    let outs = par.map(&set.designs, |dc| shard(triplet, dc, physics, coeff_scale, bc_scale, phase, mask, want_grad));
    let mut sums = [0.0; N_COMPONENTS];
    let mut grads: Option<Gradients> = None;
    for out in outs {
        let out = out?;
        for i in 0..N_COMPONENTS {
            sums[i] += out.sums[i];
        }
        if let Some(g) = out.grads {
            match grads.as_mut() {
                Some(acc) => acc.accumulate(&g),
                None => grads = Some(g),
            }
        }
    }
    let mut means = [0.0; N_COMPONENTS];
    for i in 0..N_COMPONENTS {
        if mask[i] && den[i] > 0 {
            means[i] = sums[i] / den[i] as f64;
        }
    }
    if let Some(g) = &grads {
        if g.status == GradStatus::Disconnected {
            log::debug!("{} phase loss does not depend on trainable parameters", phase.as_str());
        }
    }
    Ok(LossEvaluation {
        breakdown: LossBreakdown::from_array(means),
        gradients: grads.map(|g| g.nets),
    })
}

fn components(triplet: &OperatorTriplet, set: &CollocationSet, physics: &Physics, bc_scale: f64, on: &[usize]) -> Result<LossBreakdown> {
    let mut mask = [false; N_COMPONENTS];
    for &i in on {
        mask[i] = true;
    }
    let eval = evaluate_masked(
        triplet,
        set,
        physics,
        &LossWeights::default(),
        bc_scale,
        Phase::All,
        mask,
        false,
        Parallelism::Sequential,
    )?;
    Ok(eval.breakdown)
}

/// `(l_ic_T, l_ic_alpha)`.
pub fn loss_ic(triplet: &OperatorTriplet, set: &CollocationSet, physics: &Physics) -> Result<(f64, f64)> {
    let b = components(triplet, set, physics, 0.0, &[IC_T, IC_A])?;
    Ok((b.l_ic_t, b.l_ic_alpha))
}

/// `(l_bc_top, l_bc_bot)`.
pub fn loss_bc(triplet: &OperatorTriplet, set: &CollocationSet, physics: &Physics) -> Result<(f64, f64)> {
    let b = components(triplet, set, physics, 0.0, &[BC_TOP, BC_BOT])?;
    Ok((b.l_bc_top, b.l_bc_bot))
}

/// `(l_pde_tool, l_pde_part, l_ode)` with the heat generation scaled by `bc_scale`.
pub fn loss_physics(triplet: &OperatorTriplet, set: &CollocationSet, physics: &Physics, bc_scale: f64) -> Result<(f64, f64, f64)> {
    let b = components(triplet, set, physics, bc_scale, &[PDE_TOOL, PDE_PART, ODE])?;
    Ok((b.l_pde_tool, b.l_pde_part, b.l_ode))
}

/// `(l_if_temporal, l_if_alpha)`.
pub fn loss_interface_temporal(triplet: &OperatorTriplet, set: &CollocationSet, physics: &Physics) -> Result<(f64, f64)> {
    let b = components(triplet, set, physics, 0.0, &[IF_T, IF_A])?;
    Ok((b.l_if_temporal, b.l_if_alpha))
}

/// `(l_ct_value, l_ct_flux)`.
pub fn loss_continuity_material(triplet: &OperatorTriplet, set: &CollocationSet, physics: &Physics) -> Result<(f64, f64)> {
    let b = components(triplet, set, physics, 0.0, &[CT_VAL, CT_FLUX])?;
    Ok((b.l_ct_value, b.l_ct_flux))
}
