//! Reverse-mode tape over batched arrays.
//!
//! Nodes hold 2-D arrays. Network evaluations are recorded as single coarse
//! nodes whose values are *jet batches*: an `(n × S·B)` array for a batch of
//! `B` points with `K` tracked input coordinates, where `S = 1 + 2K` and the
//! column blocks are, in order, the values, the `K` first derivatives and the
//! `K` pure second derivatives. Derivative slots are ordinary differentiable
//! quantities, so a loss built from them back-propagates through the
//! second-order forward propagation into the network parameters.
//!
//! Shape misuse inside a tape is a programming error and panics.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2, ArrayViewMut2};

use super::{MlpParams, ParamGradient};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetId(usize);

impl NetId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Number of column blocks in a jet batch with `n_tracked` coordinates.
pub fn jet_slots(n_tracked: usize) -> usize {
    1 + 2 * n_tracked
}

/// Slot index of `d/dy_k`.
pub fn slot_d1(k: usize) -> usize {
    1 + k
}

/// Slot index of `d²/dy_k²`.
pub fn slot_d2(k: usize, n_tracked: usize) -> usize {
    1 + n_tracked + k
}

/// Builds the input jet batch for coordinates stored column-wise
/// (`n_inputs × B`), seeding unit first derivatives for `tracked` inputs.
pub fn seed_jets(coords: ArrayView2<'_, f64>, tracked: &[usize]) -> Array2<f64> {
    let (n_in, batch) = coords.dim();
    let n_k = tracked.len();
    let mut out = Array2::zeros((n_in, jet_slots(n_k) * batch));
    out.slice_mut(s![.., 0..batch]).assign(&coords);
    for (k, &coord) in tracked.iter().enumerate() {
        let start = slot_d1(k) * batch;
        out.slice_mut(s![coord, start..start + batch]).fill(1.0);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradStatus {
    Connected,
    /// The loss does not depend on any trainable parameter.
    Disconnected,
}

/// Parameter gradients for every network registered on a tape.
/// Frozen networks have no entry.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub nets: Vec<Option<ParamGradient>>,
    pub status: GradStatus,
}

impl Gradients {
    pub fn get(&self, net: NetId) -> Option<&ParamGradient> {
        self.nets.get(net.0).and_then(|g| g.as_ref())
    }

    /// Adds `other` into `self`; both must come from identically laid out tapes.
    pub fn accumulate(&mut self, other: &Gradients) {
        assert_eq!(self.nets.len(), other.nets.len());
        for (a, b) in self.nets.iter_mut().zip(&other.nets) {
            match (a.as_mut(), b) {
                (Some(a), Some(b)) => a.add_assign(b),
                (None, Some(b)) => *a = Some(b.clone()),
                _ => {}
            }
        }
        if other.status == GradStatus::Connected {
            self.status = GradStatus::Connected;
        }
    }
}

struct MlpNode {
    net: usize,
    input: usize,
    n_tracked: usize,
    /// Input to every affine layer.
    layer_inputs: Vec<Array2<f64>>,
    /// Pre-activations of hidden layers.
    pre: Vec<Array2<f64>>,
}

enum Op {
    Const,
    Mlp(Box<MlpNode>),
    MulColumn { x: usize, c: usize },
    Hadamard { a: usize, b: usize },
    ConcatJets { parts: Vec<usize>, slots: usize },
    Slot { x: usize, row: usize, slot: usize, slots: usize },
    Column { x: usize, col: usize },
    Add { a: usize, b: usize },
    Sub { a: usize, b: usize },
    Mul { a: usize, b: usize },
    Lin { x: usize, scale: f64 },
    MulConst { x: usize, c: Array2<f64> },
    AddConst { x: usize },
    Exp { x: usize },
    Powf { x: usize, p: f64 },
    Clamp { x: usize, lo: f64, hi: f64 },
    Recip { x: usize },
    Square { x: usize },
    SumAll { x: usize },
}

struct Node {
    value: Array2<f64>,
    op: Op,
    needs_grad: bool,
}

struct NetEntry<'p> {
    params: &'p MlpParams,
    trainable: bool,
}

/// A private recording of one evaluation. Parameters are borrowed immutably,
/// so many tapes can evaluate the same networks concurrently.
pub struct Tape<'p> {
    nets: Vec<NetEntry<'p>>,
    nodes: Vec<Node>,
}

impl Default for Tape<'_> {
    fn default() -> Self {
        Self::new()
    }
}

fn std_slice(a: &Array2<f64>) -> &[f64] {
    a.as_slice().expect("tape arrays are kept in standard layout")
}

impl<'p> Tape<'p> {
    pub fn new() -> Self {
        Tape {
            nets: Vec::new(),
            nodes: Vec::new(),
        }
    }

    /// Registers a network. Frozen networks are evaluated but receive no gradient.
    pub fn register(&mut self, params: &'p MlpParams, trainable: bool) -> NetId {
        self.nets.push(NetEntry { params, trainable });
        NetId(self.nets.len() - 1)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn push(&mut self, value: Array2<f64>, op: Op, needs_grad: bool) -> Var {
        let value = if value.is_standard_layout() {
            value
        } else {
            value.as_standard_layout().into_owned()
        };
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn ng(&self, v: usize) -> bool {
        self.nodes[v].needs_grad
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    /// Value of a `1 × 1` node.
    pub fn scalar(&self, v: Var) -> f64 {
        let a = self.value(v);
        assert_eq!(a.dim(), (1, 1), "node is not a scalar");
        a[[0, 0]]
    }

    pub fn constant(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Const, false)
    }

    pub fn scalar_constant(&mut self, value: f64) -> Var {
        self.constant(Array2::from_elem((1, 1), value))
    }

    /// Evaluates a registered network on a jet batch with `n_tracked` coordinates.
    pub fn mlp(&mut self, net: NetId, input: Var, n_tracked: usize) -> Result<Var> {
        let entry = &self.nets[net.0];
        let params = entry.params;
        let x = &self.nodes[input.0].value;
        if x.nrows() != params.n_inputs() {
            return Err(Error::Dimension {
                expected: params.n_inputs(),
                got: x.nrows(),
            });
        }
        let slots = jet_slots(n_tracked);
        if x.ncols() % slots != 0 {
            return Err(Error::domain("jet batch width is not a multiple of the slot count"));
        }
        let batch = x.ncols() / slots;
        let n_layers = params.n_layers();
        let mut layer_inputs = Vec::with_capacity(n_layers);
        let mut pre = Vec::with_capacity(n_layers - 1);
        let mut act = x.clone();
        for l in 0..n_layers {
            let mut z = params.weight(l).dot(&act);
            if !z.is_standard_layout() {
                z = z.as_standard_layout().into_owned();
            }
            let b = params.bias(l);
            for (mut row, bi) in z.rows_mut().into_iter().zip(b.iter()) {
                row.slice_mut(s![0..batch]).mapv_inplace(|v| v + bi);
            }
            layer_inputs.push(act);
            if l + 1 == n_layers {
                act = z;
            } else {
                act = tanh_jet_forward(&z, batch, n_tracked);
                pre.push(z);
            }
        }
        let needs_grad = entry.trainable || self.ng(input.0);
        let node = MlpNode {
            net: net.0,
            input: input.0,
            n_tracked,
            layer_inputs,
            pre,
        };
        Ok(self.push(act, Op::Mlp(Box::new(node)), needs_grad))
    }

    /// Multiplies every column of `x` elementwise by the column vector `c`.
    pub fn mul_column(&mut self, x: Var, c: Var) -> Var {
        let xv = self.value(x);
        let cv = self.value(c);
        assert_eq!(cv.dim(), (xv.nrows(), 1), "mul_column expects an (n × 1) multiplier");
        let out = xv * cv;
        let ng = self.ng(x.0) || self.ng(c.0);
        self.push(out, Op::MulColumn { x: x.0, c: c.0 }, ng)
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Var {
        let out = self.elementwise_pair(a, b, |x, y| x * y);
        let ng = self.ng(a.0) || self.ng(b.0);
        self.push(out, Op::Hadamard { a: a.0, b: b.0 }, ng)
    }

    /// Concatenates jet batches that share a slot layout, slot block by slot block.
    pub fn concat_jets(&mut self, parts: &[Var], n_tracked: usize) -> Var {
        assert!(!parts.is_empty(), "nothing to concatenate");
        let slots = jet_slots(n_tracked);
        let rows = self.value(parts[0]).nrows();
        let widths: Vec<usize> = parts
            .iter()
            .map(|p| {
                let v = self.value(*p);
                assert_eq!(v.nrows(), rows, "row mismatch in concat");
                assert_eq!(v.ncols() % slots, 0, "slot mismatch in concat");
                v.ncols() / slots
            })
            .collect();
        let total: usize = widths.iter().sum();
        let mut out = Array2::zeros((rows, slots * total));
        for sl in 0..slots {
            let mut at = sl * total;
            for (p, &w) in parts.iter().zip(&widths) {
                let src = self.value(*p).slice(s![.., sl * w..(sl + 1) * w]);
                out.slice_mut(s![.., at..at + w]).assign(&src);
                at += w;
            }
        }
        let ng = parts.iter().any(|p| self.ng(p.0));
        self.push(
            out,
            Op::ConcatJets {
                parts: parts.iter().map(|p| p.0).collect(),
                slots,
            },
            ng,
        )
    }

    /// Row `row`, slot block `slot` of a jet batch, as a `1 × B` array.
    pub fn slot(&mut self, x: Var, row: usize, slot: usize, n_tracked: usize) -> Var {
        let slots = jet_slots(n_tracked);
        let xv = self.value(x);
        assert_eq!(xv.ncols() % slots, 0, "slot layout mismatch");
        assert!(slot < slots, "slot index out of range");
        let b = xv.ncols() / slots;
        let out = xv.slice(s![row..row + 1, slot * b..(slot + 1) * b]).to_owned();
        let ng = self.ng(x.0);
        self.push(out, Op::Slot { x: x.0, row, slot, slots }, ng)
    }

    pub fn column(&mut self, x: Var, col: usize) -> Var {
        let out = self.value(x).slice(s![.., col..col + 1]).to_owned();
        let ng = self.ng(x.0);
        self.push(out, Op::Column { x: x.0, col }, ng)
    }

    fn elementwise_pair(&self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Array2<f64> {
        let av = self.value(a);
        let bv = self.value(b);
        assert_eq!(av.dim(), bv.dim(), "elementwise shape mismatch");
        let mut out = av.clone();
        out.zip_mut_with(bv, |x, y| *x = f(*x, *y));
        out
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let out = self.elementwise_pair(a, b, |x, y| x + y);
        let ng = self.ng(a.0) || self.ng(b.0);
        self.push(out, Op::Add { a: a.0, b: b.0 }, ng)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let out = self.elementwise_pair(a, b, |x, y| x - y);
        let ng = self.ng(a.0) || self.ng(b.0);
        self.push(out, Op::Sub { a: a.0, b: b.0 }, ng)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let out = self.elementwise_pair(a, b, |x, y| x * y);
        let ng = self.ng(a.0) || self.ng(b.0);
        self.push(out, Op::Mul { a: a.0, b: b.0 }, ng)
    }

    /// `scale · x + shift`.
    pub fn lin(&mut self, x: Var, scale: f64, shift: f64) -> Var {
        let out = self.value(x).mapv(|v| scale * v + shift);
        let ng = self.ng(x.0);
        self.push(out, Op::Lin { x: x.0, scale }, ng)
    }

    pub fn mul_const(&mut self, x: Var, c: Array2<f64>) -> Var {
        let xv = self.value(x);
        assert_eq!(xv.dim(), c.dim(), "mul_const shape mismatch");
        let out = xv * &c;
        let ng = self.ng(x.0);
        self.push(out, Op::MulConst { x: x.0, c }, ng)
    }

    pub fn add_const(&mut self, x: Var, c: &Array2<f64>) -> Var {
        let xv = self.value(x);
        assert_eq!(xv.dim(), c.dim(), "add_const shape mismatch");
        let out = xv + c;
        let ng = self.ng(x.0);
        self.push(out, Op::AddConst { x: x.0 }, ng)
    }

    pub fn exp(&mut self, x: Var) -> Var {
        let out = self.value(x).mapv(f64::exp);
        let ng = self.ng(x.0);
        self.push(out, Op::Exp { x: x.0 }, ng)
    }

    pub fn powf(&mut self, x: Var, p: f64) -> Var {
        let out = self.value(x).mapv(|v| v.powf(p));
        let ng = self.ng(x.0);
        self.push(out, Op::Powf { x: x.0, p }, ng)
    }

    /// Clamps into `[lo, hi]`; the gradient is zero where clamping is active.
    pub fn clamp(&mut self, x: Var, lo: f64, hi: f64) -> Var {
        let out = self.value(x).mapv(|v| v.clamp(lo, hi));
        let ng = self.ng(x.0);
        self.push(out, Op::Clamp { x: x.0, lo, hi }, ng)
    }

    pub fn recip(&mut self, x: Var) -> Var {
        let out = self.value(x).mapv(|v| 1.0 / v);
        let ng = self.ng(x.0);
        self.push(out, Op::Recip { x: x.0 }, ng)
    }

    pub fn square(&mut self, x: Var) -> Var {
        let out = self.value(x).mapv(|v| v * v);
        let ng = self.ng(x.0);
        self.push(out, Op::Square { x: x.0 }, ng)
    }

    pub fn sum_all(&mut self, x: Var) -> Var {
        let out = Array2::from_elem((1, 1), self.value(x).sum());
        let ng = self.ng(x.0);
        self.push(out, Op::SumAll { x: x.0 }, ng)
    }

    /// Sum of squares of all entries, as a scalar node.
    pub fn sum_squares(&mut self, x: Var) -> Var {
        let sq = self.square(x);
        self.sum_all(sq)
    }

    /// Reverse sweep from a scalar node.
    pub fn backward(&self, loss: Var) -> Gradients {
        assert_eq!(self.value(loss).dim(), (1, 1), "backward needs a scalar loss");
        let mut grads: Vec<Option<ParamGradient>> = self
            .nets
            .iter()
            .map(|e| e.trainable.then(|| ParamGradient::zeros(e.params.layer_sizes())))
            .collect();
        let mut connected = false;
        let mut adj: Vec<Option<Array2<f64>>> = (0..=loss.0).map(|_| None).collect();
        adj[loss.0] = Some(Array2::from_elem((1, 1), 1.0));

        for i in (0..=loss.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            match &node.op {
                Op::Const => {}
                Op::Mlp(m) => {
                    let entry = &self.nets[m.net];
                    if entry.trainable {
                        connected = true;
                    }
                    let want_input = self.ng(m.input);
                    let pg = grads[m.net].as_mut();
                    let xbar = mlp_backward(entry.params, m, g, pg, want_input);
                    if let Some(xbar) = xbar {
                        accumulate(&mut adj, m.input, xbar);
                    }
                }
                Op::MulColumn { x, c } => {
                    let (xv, cv) = (&self.nodes[*x].value, &self.nodes[*c].value);
                    if self.ng(*c) {
                        let cbar = (&g * xv).sum_axis(ndarray::Axis(1)).insert_axis(ndarray::Axis(1));
                        accumulate(&mut adj, *c, cbar);
                    }
                    if self.ng(*x) {
                        accumulate(&mut adj, *x, &g * cv);
                    }
                }
                Op::Hadamard { a, b } | Op::Mul { a, b } => {
                    let (av, bv) = (&self.nodes[*a].value, &self.nodes[*b].value);
                    if self.ng(*a) {
                        accumulate(&mut adj, *a, &g * bv);
                    }
                    if self.ng(*b) {
                        accumulate(&mut adj, *b, &g * av);
                    }
                }
                Op::ConcatJets { parts, slots } => {
                    let total = g.ncols() / slots;
                    let mut offset = 0;
                    for &p in parts {
                        let w = self.nodes[p].value.ncols() / slots;
                        if self.ng(p) {
                            let mut pbar = Array2::zeros(self.nodes[p].value.dim());
                            for sl in 0..*slots {
                                let src = g.slice(s![.., sl * total + offset..sl * total + offset + w]);
                                pbar.slice_mut(s![.., sl * w..(sl + 1) * w]).assign(&src);
                            }
                            accumulate(&mut adj, p, pbar);
                        }
                        offset += w;
                    }
                }
                Op::Slot { x, row, slot, slots } => {
                    let dim = self.nodes[*x].value.dim();
                    let b = dim.1 / slots;
                    let mut xbar = Array2::zeros(dim);
                    xbar.slice_mut(s![*row..*row + 1, slot * b..(slot + 1) * b]).assign(&g);
                    accumulate(&mut adj, *x, xbar);
                }
                Op::Column { x, col } => {
                    let mut xbar = Array2::zeros(self.nodes[*x].value.dim());
                    xbar.slice_mut(s![.., *col..*col + 1]).assign(&g);
                    accumulate(&mut adj, *x, xbar);
                }
                Op::Add { a, b } => {
                    if self.ng(*a) {
                        accumulate(&mut adj, *a, g.clone());
                    }
                    if self.ng(*b) {
                        accumulate(&mut adj, *b, g);
                    }
                }
                Op::Sub { a, b } => {
                    if self.ng(*b) {
                        accumulate(&mut adj, *b, -&g);
                    }
                    if self.ng(*a) {
                        accumulate(&mut adj, *a, g);
                    }
                }
                Op::Lin { x, scale } => accumulate(&mut adj, *x, g * *scale),
                Op::MulConst { x, c } => accumulate(&mut adj, *x, g * c),
                Op::AddConst { x } => accumulate(&mut adj, *x, g),
                Op::Exp { x } => accumulate(&mut adj, *x, g * &node.value),
                Op::Powf { x, p } => {
                    let xv = &self.nodes[*x].value;
                    let mut d = g;
                    d.zip_mut_with(xv, |gi, v| *gi *= p * v.powf(p - 1.0));
                    accumulate(&mut adj, *x, d);
                }
                Op::Clamp { x, lo, hi } => {
                    let xv = &self.nodes[*x].value;
                    let mut d = g;
                    d.zip_mut_with(xv, |gi, v| {
                        if *v < *lo || *v > *hi {
                            *gi = 0.0;
                        }
                    });
                    accumulate(&mut adj, *x, d);
                }
                Op::Recip { x } => {
                    let mut d = g;
                    d.zip_mut_with(&node.value, |gi, y| *gi *= -y * y);
                    accumulate(&mut adj, *x, d);
                }
                Op::Square { x } => {
                    let xv = &self.nodes[*x].value;
                    let mut d = g;
                    d.zip_mut_with(xv, |gi, v| *gi *= 2.0 * v);
                    accumulate(&mut adj, *x, d);
                }
                Op::SumAll { x } => {
                    let gi = g[[0, 0]];
                    accumulate(&mut adj, *x, Array2::from_elem(self.nodes[*x].value.dim(), gi));
                }
            }
        }
        let status = if connected {
            GradStatus::Connected
        } else {
            log::warn!("loss is not connected to any trainable parameter; gradient is zero");
            GradStatus::Disconnected
        };
        Gradients { nets: grads, status }
    }
}

fn accumulate(adj: &mut [Option<Array2<f64>>], idx: usize, contrib: Array2<f64>) {
    match &mut adj[idx] {
        Some(a) => *a += &contrib,
        slot @ None => *slot = Some(contrib),
    }
}

fn tanh_jet_forward(z: &Array2<f64>, batch: usize, n_k: usize) -> Array2<f64> {
    let (rows, cols) = z.dim();
    let mut out = Array2::zeros((rows, cols));
    let zs = std_slice(z);
    let os = out.as_slice_mut().expect("fresh array");
    for r in 0..rows {
        let base = r * cols;
        for j in 0..batch {
            let y = zs[base + j].tanh();
            let sd = 1.0 - y * y;
            let g = -2.0 * y * sd;
            os[base + j] = y;
            for k in 0..n_k {
                let i1 = base + (1 + k) * batch + j;
                let i2 = base + (1 + n_k + k) * batch + j;
                let z1 = zs[i1];
                os[i1] = sd * z1;
                os[i2] = sd * zs[i2] + g * z1 * z1;
            }
        }
    }
    out
}

/// Adjoint of the jet `tanh` layer: maps output adjoints to pre-activation adjoints.
fn tanh_jet_backward(z: &Array2<f64>, y: &Array2<f64>, ybar: &mut Array2<f64>, batch: usize, n_k: usize) {
    let cols = z.ncols();
    let zs = std_slice(z);
    let ys = std_slice(y);
    let gs = ybar.as_slice_mut().expect("standard layout");
    for r in 0..z.nrows() {
        let base = r * cols;
        for j in 0..batch {
            let yv = ys[base + j];
            let sd = 1.0 - yv * yv;
            let g = -2.0 * yv * sd;
            let gp = sd * (6.0 * yv * yv - 2.0);
            let mut zbar_v = gs[base + j] * sd;
            for k in 0..n_k {
                let i1 = base + (1 + k) * batch + j;
                let i2 = base + (1 + n_k + k) * batch + j;
                let (z1, z2) = (zs[i1], zs[i2]);
                let (yb1, yb2) = (gs[i1], gs[i2]);
                zbar_v += yb1 * g * z1 + yb2 * (g * z2 + gp * z1 * z1);
                gs[i1] = yb1 * sd + 2.0 * yb2 * g * z1;
                gs[i2] = yb2 * sd;
            }
            gs[base + j] = zbar_v;
        }
    }
}

fn mlp_backward(
    params: &MlpParams,
    node: &MlpNode,
    out_bar: Array2<f64>,
    mut pgrad: Option<&mut ParamGradient>,
    want_input: bool,
) -> Option<Array2<f64>> {
    let n_layers = params.n_layers();
    let slots = jet_slots(node.n_tracked);
    let batch = node.layer_inputs[0].ncols() / slots;
    let mut zbar = if out_bar.is_standard_layout() {
        out_bar
    } else {
        out_bar.as_standard_layout().into_owned()
    };
    for l in (0..n_layers).rev() {
        if l + 1 < n_layers {
            tanh_jet_backward(&node.pre[l], &node.layer_inputs[l + 1], &mut zbar, batch, node.n_tracked);
        }
        let a = &node.layer_inputs[l];
        if let Some(pg) = pgrad.as_deref_mut() {
            let mut wbar: ArrayViewMut2<'_, f64> = pg.weight_mut(l);
            general_mat_mul(1.0, &zbar, &a.t(), 1.0, &mut wbar);
            let mut bbar = pg.bias_mut(l);
            for (i, b) in bbar.iter_mut().enumerate() {
                *b += zbar.slice(s![i, 0..batch]).sum();
            }
        }
        if l == 0 && !want_input {
            return None;
        }
        zbar = params.weight(l).t().dot(&zbar);
        if !zbar.is_standard_layout() {
            zbar = zbar.as_standard_layout().into_owned();
        }
    }
    Some(zbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_form_gradient() {
        // loss = sum((W x)^2) for a zero-bias linear layer: dL/dW = 2 (W x) x^T.
        let w = vec![0.5, -1.0, 2.0, 0.25, 1.5, -0.5];
        let p = MlpParams::from_parts(vec![3, 2], [w.clone(), vec![0.0, 0.0]].concat()).unwrap();
        let x = [1.0, 2.0, -1.0];
        let mut tape = Tape::new();
        let net = tape.register(&p, true);
        let input = tape.constant(Array2::from_shape_vec((3, 1), x.to_vec()).unwrap());
        let out = tape.mlp(net, input, 0).unwrap();
        let loss = tape.sum_squares(out);
        let g = tape.backward(loss);
        let pg = g.get(net).unwrap();
        let wx = [w[0] * x[0] + w[1] * x[1] + w[2] * x[2], w[3] * x[0] + w[4] * x[1] + w[5] * x[2]];
        for i in 0..2 {
            for j in 0..3 {
                assert!((pg.weight(0)[[i, j]] - 2.0 * wx[i] * x[j]).abs() < 1e-14);
            }
            assert!((pg.bias(0)[i] - 2.0 * wx[i]).abs() < 1e-14);
        }
        assert_eq!(g.status, GradStatus::Connected);
    }

    #[test]
    fn constant_loss_is_disconnected() {
        let p = MlpParams::zeros(&[1, 1]).unwrap();
        let mut tape = Tape::new();
        let net = tape.register(&p, true);
        let c = tape.scalar_constant(3.0);
        let loss = tape.square(c);
        let g = tape.backward(loss);
        assert_eq!(g.status, GradStatus::Disconnected);
        assert!(g.get(net).unwrap().data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn tape_jets_match_pointwise_jets() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = MlpParams::glorot(&[2, 7, 7, 3], &mut rng).unwrap();
        let coords = Array2::from_shape_vec((2, 3), vec![0.1, 0.5, 0.9, 0.2, 0.4, 0.8]).unwrap();
        let mut tape = Tape::new();
        let net = tape.register(&p, false);
        let input = tape.constant(seed_jets(coords.view(), &[0, 1]));
        let out = tape.mlp(net, input, 2).unwrap();
        let v = tape.value(out).clone();
        for j in 0..3 {
            let jets = p.forward_jet(&[coords[[0, j]], coords[[1, j]]], &[0, 1]).unwrap();
            for (r, jet) in jets.iter().enumerate() {
                assert!((v[[r, j]] - jet.value).abs() < 1e-14);
                for k in 0..2 {
                    assert!((v[[r, slot_d1(k) * 3 + j]] - jet.d1[k]).abs() < 1e-14);
                    assert!((v[[r, slot_d2(k, 2) * 3 + j]] - jet.d2[k]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn frozen_net_gets_no_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = MlpParams::glorot(&[1, 3, 1], &mut rng).unwrap();
        let b = MlpParams::glorot(&[1, 3, 1], &mut rng).unwrap();
        let mut tape = Tape::new();
        let na = tape.register(&a, true);
        let nb = tape.register(&b, false);
        let x = tape.constant(Array2::from_elem((1, 1), 0.3));
        let ya = tape.mlp(na, x, 0).unwrap();
        let yb = tape.mlp(nb, x, 0).unwrap();
        let prod = tape.mul(ya, yb);
        let g = tape.backward(prod);
        assert!(g.get(na).is_some());
        assert!(g.get(nb).is_none());
    }
}
