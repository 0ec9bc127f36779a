//! Unit conversions. Kinetics work in kelvin; everything user-facing is °C.

/// Seconds per minute.
pub const MIN: f64 = 60.0;

pub const KELVIN_OFFSET: f64 = 273.15;

pub fn celsius_to_kelvin(t: f64) -> f64 {
    t + KELVIN_OFFSET
}

pub fn kelvin_to_celsius(t: f64) -> f64 {
    t - KELVIN_OFFSET
}
