use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::losses::{LossBreakdown, Phase, COMPONENT_NAMES, N_COMPONENTS};
use crate::{Error, Result};

/// Losses recorded at the end of one epoch.
///
/// Components of the phase that ran are epoch means over the optimizer
/// steps; the others repeat their latest known value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub epoch: usize,
    pub phase: Phase,
    pub stage: usize,
    pub breakdown: LossBreakdown,
    pub lr: f64,
}

pub fn history_header() -> Vec<&'static str> {
    let mut h = vec!["epoch", "phase", "stage"];
    h.extend(COMPONENT_NAMES);
    h.push("lr");
    h
}

pub fn write_history_csv(path: &Path, rows: &[HistoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(history_header())?;
    for r in rows {
        let mut rec = vec![r.epoch.to_string(), r.phase.as_str().to_string(), r.stage.to_string()];
        rec.extend(r.breakdown.to_array().iter().map(f64::to_string));
        rec.push(r.lr.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_history_csv(path: &Path) -> Result<Vec<HistoryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let bad = |m: String| Error::Parse {
        path: path.to_path_buf(),
        message: m,
    };
    if r.headers()?.iter().ne(history_header()) {
        return Err(bad("unexpected loss-history header".into()));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let phase = match &rec[1] {
            "temperature" => Phase::Temperature,
            "cure" => Phase::Cure,
            "all" => Phase::All,
            p => return Err(bad(format!("unknown phase {p:?}"))),
        };
        let mut a = [0.0; N_COMPONENTS];
        for (i, v) in a.iter_mut().enumerate() {
            *v = num(&rec[3 + i])?;
        }
        rows.push(HistoryRow {
            epoch: rec[0].parse().map_err(|e| bad(format!("epoch: {e}")))?,
            phase,
            stage: rec[2].parse().map_err(|e| bad(format!("stage: {e}")))?,
            breakdown: LossBreakdown::from_array(a),
            lr: num(&rec[3 + N_COMPONENTS])?,
        });
    }
    Ok(rows)
}
