use std::f64::consts::PI;

use super::StatsError;

pub const GRID_MIN: f64 = -45.0;
pub const GRID_MAX: f64 = 315.0;
pub const DEFAULT_GRID_POINTS: usize = 360;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeOptions {
    /// Kernel standard deviation in degrees; Silverman's rule when `None`.
    pub bandwidth: Option<f64>,
    pub grid_points: usize,
    /// Wrap the kernel around the 360° period.
    pub circular: bool,
}

impl Default for KdeOptions {
    fn default() -> Self {
        Self { bandwidth: None, grid_points: DEFAULT_GRID_POINTS, circular: false }
    }
}

fn silverman(values: &[f64]) -> Result<f64, StatsError> {
    let n = values.len() as f64;
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Err(StatsError::DegenerateBandwidth);
    }
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(1.06 * sd * n.powf(-0.2))
}

/// Gaussian KDE of angles in degrees, evaluated at `grid_points` evenly
/// spaced angles from -45 to 315 inclusive. Returns `(angle, density)`.
pub fn kde(values: &[f64], options: &KdeOptions) -> Result<Vec<(f64, f64)>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::TooFewObservations { needed: 1, got: 0 });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidArgument("angles must be finite".into()));
    }
    if options.grid_points < 2 {
        return Err(StatsError::InvalidArgument("grid needs at least two points".into()));
    }
    let h = match options.bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(StatsError::InvalidArgument(format!("bandwidth must be positive, got {h}"))),
        None => silverman(values)?,
    };

    let norm = 1.0 / (values.len() as f64 * h * (2.0 * PI).sqrt());
    let kernel = |d: f64| (-0.5 * (d / h).powi(2)).exp();
    let step = (GRID_MAX - GRID_MIN) / (options.grid_points - 1) as f64;
    Ok((0..options.grid_points)
        .map(|i| {
            let x = if i + 1 == options.grid_points { GRID_MAX } else { GRID_MIN + i as f64 * step };
            let sum: f64 = values
                .iter()
                .map(|&v| {
                    if options.circular {
                        let d = (x - v).rem_euclid(360.0);
                        kernel(d) + kernel(d - 360.0) + kernel(d + 360.0) + kernel(d - 720.0)
                    } else {
                        kernel(x - v)
                    }
                })
                .sum();
            (x, sum * norm)
        })
        .collect())
}
