use serde::{Deserialize, Serialize};

use crate::field::{FieldKind, FieldSolution};
use crate::{Error, Result};

/// Error measures of one output field.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputMetrics {
    /// ‖pred − ref‖₂ / ‖ref‖₂ over the space-time grid.
    pub rel_l2: f64,
    /// Mean absolute error over the grid.
    pub mae: f64,
    /// Largest absolute error over the grid.
    pub max_abs_err: f64,
}

impl OutputMetrics {
    fn of(pred: &[f64], reference: &[f64]) -> Self {
        let (mut d2, mut r2, mut sum, mut max) = (0.0, 0.0, 0.0, 0.0_f64);
        for (p, r) in pred.iter().zip(reference) {
            let e = p - r;
            d2 += e * e;
            r2 += r * r;
            sum += e.abs();
            max = max.max(e.abs());
        }
        let rel_l2 = if d2 == 0.0 {
            0.0
        } else if r2 == 0.0 {
            f64::INFINITY
        } else {
            (d2 / r2).sqrt()
        };
        OutputMetrics {
            rel_l2,
            mae: sum / pred.len() as f64,
            max_abs_err: max,
        }
    }

    fn add(&mut self, o: &OutputMetrics) {
        self.rel_l2 += o.rel_l2;
        self.mae += o.mae;
        self.max_abs_err += o.max_abs_err;
    }

    fn scale(&mut self, c: f64) {
        self.rel_l2 *= c;
        self.mae *= c;
        self.max_abs_err *= c;
    }
}

/// Metrics of one design, or their average over a test set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub tool: OutputMetrics,
    pub part: OutputMetrics,
    pub alpha: OutputMetrics,
    /// |exotherm(pred) − exotherm(ref)|, °C.
    pub exotherm_err: f64,
    /// Relative L² error of the part mid-thickness temperature trace.
    pub mid_trace_rel_l2: f64,
    /// Largest part temperature error inside the window around the reference exotherm, °C.
    pub exotherm_window_max_abs: f64,
}

impl Metrics {
    /// Per-design metrics averaged; max-abs errors are therefore per design then averaged.
    pub fn mean(items: &[Metrics]) -> Result<Metrics> {
        if items.is_empty() {
            return Err(Error::domain("no metrics to average"));
        }
        let mut m = Metrics::default();
        for it in items {
            m.tool.add(&it.tool);
            m.part.add(&it.part);
            m.alpha.add(&it.alpha);
            m.exotherm_err += it.exotherm_err;
            m.mid_trace_rel_l2 += it.mid_trace_rel_l2;
            m.exotherm_window_max_abs += it.exotherm_window_max_abs;
        }
        let c = 1.0 / items.len() as f64;
        for o in [&mut m.tool, &mut m.part, &mut m.alpha] {
            o.scale(c);
        }
        m.exotherm_err *= c;
        m.mid_trace_rel_l2 *= c;
        m.exotherm_window_max_abs *= c;
        Ok(m)
    }

    pub fn is_valid(&self) -> bool {
        let outs = [self.tool, self.part, self.alpha];
        outs.iter()
            .flat_map(|o| [o.rel_l2, o.mae, o.max_abs_err])
            .chain([self.exotherm_err, self.mid_trace_rel_l2, self.exotherm_window_max_abs])
            .all(|v| v >= 0.0)
    }
}

/// Compares a prediction with a reference on the same grid.
///
/// `window` is the half-width of the exotherm window as a fraction of the
/// reference end time.
pub fn compare_fields(pred: &FieldSolution, reference: &FieldSolution, window: f64) -> Result<Metrics> {
    pred.validate()?;
    reference.validate()?;
    let same_grid = pred.times.len() == reference.times.len()
        && pred.times.iter().zip(&reference.times).all(|(a, b)| (a - b).abs() <= 1e-9 * b.abs().max(1.0))
        && pred.n_tool() == reference.n_tool()
        && pred.n_part() == reference.n_part();
    if !same_grid {
        return Err(Error::domain("prediction and reference grids differ"));
    }
    let flat = |s: &FieldSolution, k| s.field(k).iter().copied().collect::<Vec<f64>>();
    let out = |k| OutputMetrics::of(&flat(pred, k), &flat(reference, k));
    let exo_ref = reference.exotherm()?;
    let exo_pred = pred.exotherm()?;
    let trace_p = pred.trace(0.5, FieldKind::PartTemperature)?;
    let trace_r = reference.trace(0.5, FieldKind::PartTemperature)?;
    let half = window * reference.t_end();
    let mut window_max = 0.0_f64;
    for (k, &t) in reference.times.iter().enumerate() {
        if (t - exo_ref.time).abs() <= half {
            for (p, r) in pred.t_part.row(k).iter().zip(reference.t_part.row(k)) {
                window_max = window_max.max((p - r).abs());
            }
        }
    }
    Ok(Metrics {
        tool: out(FieldKind::ToolTemperature),
        part: out(FieldKind::PartTemperature),
        alpha: out(FieldKind::DegreeOfCure),
        exotherm_err: (exo_pred.temperature - exo_ref.temperature).abs(),
        mid_trace_rel_l2: OutputMetrics::of(&trace_p, &trace_r).rel_l2,
        exotherm_window_max_abs: window_max,
    })
}
