//! dB conversions. Configuration is in dB; everything downstream is linear.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Thermal noise power over `bandwidth_hz`, in W.
pub fn thermal_noise_watts(
    density_dbm_per_hz: f64,
    bandwidth_hz: f64,
    noise_figure_db: f64,
) -> f64 {
    dbm_to_watts(density_dbm_per_hz + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}
