use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Clamp margin applied to the degree of cure by iterative solvers.
pub const ALPHA_GUARD: f64 = 1e-9;

/// Autocatalytic cure kinetics with a diffusion-controlled cut-off.
///
/// `dα/dt = A·exp(−ΔE/(R·T)) / (1 + exp(C·(α − (C0 + C_T·T)))) · α^m · (1 − α)^n`
/// with `T` in kelvin. The defaults are the published constants for 8552 epoxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CureKinetics {
    #[serde(rename = "activation_energy_J_per_gmol")]
    pub activation_energy: f64,
    #[serde(rename = "gas_constant_J_per_gmol_K")]
    pub gas_constant: f64,
    #[serde(rename = "pre_exponential_per_s")]
    pub pre_exponential: f64,
    #[serde(rename = "exponent_m")]
    pub m: f64,
    #[serde(rename = "exponent_n")]
    pub n: f64,
    #[serde(rename = "diffusion_constant")]
    pub diffusion: f64,
    #[serde(rename = "critical_doc_at_0K")]
    pub critical_c0: f64,
    #[serde(rename = "critical_doc_slope_per_K")]
    pub critical_slope: f64,
}

impl Default for CureKinetics {
    fn default() -> Self {
        CureKinetics {
            activation_energy: 66.5e3,
            gas_constant: 8.314,
            pre_exponential: 1.53e5,
            m: 0.813,
            n: 2.74,
            diffusion: 43.1,
            critical_c0: -1.684,
            critical_slope: 5.475e-3,
        }
    }
}

impl CureKinetics {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.activation_energy,
            self.gas_constant,
            self.pre_exponential,
            self.m,
            self.n,
            self.diffusion,
            self.critical_c0,
            self.critical_slope,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("cure kinetics constants must be finite"));
        }
        if self.pre_exponential <= 0.0 || self.m <= 0.0 || self.n <= 0.0 || self.gas_constant <= 0.0 {
            return Err(Error::config("cure kinetics require A, m, n and R to be positive"));
        }
        Ok(())
    }

    fn rate_unchecked(&self, alpha: f64, t_kelvin: f64) -> f64 {
        let arrhenius = self.pre_exponential * (-self.activation_energy / (self.gas_constant * t_kelvin)).exp();
        let critical = self.critical_c0 + self.critical_slope * t_kelvin;
        let diffusion = 1.0 + (self.diffusion * (alpha - critical)).exp();
        arrhenius / diffusion * alpha.powf(self.m) * (1.0 - alpha).powf(self.n)
    }

    /// Cure rate in 1/s at degree of cure `alpha` and absolute temperature `t_kelvin`.
    ///
    /// A degree of cure outside `[0, 1]` is clamped to the interval and logged.
    pub fn cure_rate(&self, alpha: f64, t_kelvin: f64) -> Result<f64> {
        if t_kelvin.is_nan() || t_kelvin <= 0.0 {
            return Err(Error::domain(format!("cure rate needs T > 0 K, got {t_kelvin}")));
        }
        if alpha.is_nan() {
            return Err(Error::domain("degree of cure is NaN"));
        }
        let a = if (0.0..=1.0).contains(&alpha) {
            alpha
        } else {
            log::warn!("degree of cure {alpha} outside [0, 1]; clamped");
            alpha.clamp(0.0, 1.0)
        };
        Ok(self.rate_unchecked(a, t_kelvin))
    }

    /// Cure rate with `alpha` clamped to `[ALPHA_GUARD, 1 − ALPHA_GUARD]`, for use
    /// inside time integrators whose intermediate stages can leave `[0, 1]`.
    pub fn cure_rate_guarded(&self, alpha: f64, t_kelvin: f64) -> f64 {
        self.rate_unchecked(alpha.clamp(ALPHA_GUARD, 1.0 - ALPHA_GUARD), t_kelvin)
    }
}
