use serde::{Deserialize, Serialize};

use crate::units::MIN;
use crate::{Error, Result};

/// Two-hold autoclave cure cycle: ramp to `ht1`, hold, ramp to `ht2`, hold,
/// and optionally cool back to the start temperature at the second ramp rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CureCycle {
    /// Ramp rates, °C/min.
    pub r1: f64,
    pub r2: f64,
    /// Hold temperatures, °C.
    pub ht1: f64,
    pub ht2: f64,
    /// Hold durations, min.
    pub hd1: f64,
    pub hd2: f64,
    /// Start and ambient temperature, °C.
    pub t0: f64,
    #[serde(default)]
    pub cool_down: bool,
}

impl CureCycle {
    pub fn validate(&self) -> Result<()> {
        if !(self.ht2 > self.ht1 && self.ht1 > self.t0) {
            return Err(Error::domain(format!(
                "hold temperatures must satisfy ht2 > ht1 > T0 (got {}, {}, {})",
                self.ht2, self.ht1, self.t0
            )));
        }
        for (name, v) in [("r1", self.r1), ("r2", self.r2), ("hd1", self.hd1), ("hd2", self.hd2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Corner points `(t [s], T [°C])` of the piecewise-linear profile.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        let mut pts = vec![(0.0, self.t0)];
        let mut t = 0.0;
        t += (self.ht1 - self.t0) / self.r1 * MIN;
        pts.push((t, self.ht1));
        t += self.hd1 * MIN;
        pts.push((t, self.ht1));
        t += (self.ht2 - self.ht1) / self.r2 * MIN;
        pts.push((t, self.ht2));
        t += self.hd2 * MIN;
        pts.push((t, self.ht2));
        if self.cool_down {
            t += (self.ht2 - self.t0) / self.r2 * MIN;
            pts.push((t, self.t0));
        }
        pts
    }

    /// Time at which the programmed profile ends, s.
    pub fn duration(&self) -> f64 {
        self.breakpoints().last().expect("non-empty").0
    }

    /// Air temperature at time `t` seconds, °C. Constant after the last corner.
    pub fn air_temperature(&self, t: f64) -> f64 {
        let pts = self.breakpoints();
        if t <= 0.0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((ta, ya), (tb, yb)) = (w[0], w[1]);
            if t <= tb {
                return if tb > ta { ya + (yb - ya) * (t - ta) / (tb - ta) } else { yb };
            }
        }
        pts.last().expect("non-empty").1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle() -> CureCycle {
        CureCycle {
            r1: 2.0,
            r2: 2.0,
            ht1: 110.0,
            ht2: 180.0,
            hd1: 60.0,
            hd2: 120.0,
            t0: 20.0,
            cool_down: false,
        }
    }

    #[test]
    fn starts_at_ambient() {
        assert_eq!(cycle().air_temperature(0.0), 20.0);
    }

    #[test]
    fn first_ramp_ends_at_45_minutes() {
        assert!((cycle().air_temperature(45.0 * MIN) - 110.0).abs() < 1e-12);
        assert!((cycle().air_temperature(22.5 * MIN) - 65.0).abs() < 1e-12);
    }

    #[test]
    fn holds_are_isothermal() {
        let c = cycle();
        assert_eq!(c.air_temperature(75.0 * MIN), 110.0);
        assert_eq!(c.air_temperature(200.0 * MIN), 180.0);
        assert_eq!(c.air_temperature(1e6), 180.0);
    }

    #[test]
    fn continuous_with_maximum_at_second_hold() {
        let mut c = cycle();
        c.cool_down = true;
        let end = c.duration();
        let n = 20_000;
        let mut max = f64::MIN;
        let mut prev = c.air_temperature(0.0);
        for i in 1..=n {
            let t = end * 1.1 * i as f64 / n as f64;
            let y = c.air_temperature(t);
            assert!((y - prev).abs() <= 2.0 / 60.0 * end * 1.1 / n as f64 + 1e-9);
            max = max.max(y);
            prev = y;
        }
        assert_eq!(max, 180.0);
        assert_eq!(c.air_temperature(end + 10.0), 20.0);
    }

    #[test]
    fn rejects_inverted_holds() {
        let mut c = cycle();
        c.ht2 = 100.0;
        assert!(c.validate().is_err());
    }
}
