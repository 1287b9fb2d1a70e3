use serde::Serialize;

use super::{t_two_sided_p, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Pearson correlation of `ln x` against `ln y`, tested against Student-t
/// with `n - 2` degrees of freedom.
pub fn pearson_log(xs: &[f64], ys: &[f64]) -> Result<Correlation, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch { left: xs.len(), right: ys.len() });
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations { needed: 3, got: n });
    }
    let log = |v: &[f64]| -> Result<Vec<f64>, StatsError> {
        v.iter()
            .enumerate()
            .map(|(i, &x)| if x > 0.0 && x.is_finite() { Ok(x.ln()) } else { Err(StatsError::NonPositive { index: i }) })
            .collect()
    };
    let (lx, ly) = (log(xs)?, log(ys)?);

    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(&lx), mean(&ly));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in lx.iter().zip(&ly) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if r.abs() == 1.0 {
        0.0
    } else {
        t_two_sided_p(r * (df / (1.0 - r * r)).sqrt(), df)
    };
    Ok(Correlation { r, p_value, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn perfect_relations() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64 * 3.7).collect();
        let inv: Vec<f64> = xs.iter().map(|x| 42.0 / x).collect();
        let c = pearson_log(&xs, &inv).unwrap();
        assert!((c.r + 1.0).abs() < 1e-12);
        assert_eq!(c.p_value, 0.0);
        assert!((pearson_log(&xs, &xs).unwrap().r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        assert_eq!(pearson_log(&[1.0, 2.0], &[1.0, 2.0]), Err(StatsError::TooFewObservations { needed: 3, got: 2 }));
        assert_eq!(pearson_log(&[1.0, 0.0, 2.0], &[1.0, 2.0, 3.0]), Err(StatsError::NonPositive { index: 1 }));
        assert_eq!(pearson_log(&[2.0; 4], &[1.0, 2.0, 3.0, 4.0]), Err(StatsError::ZeroVariance));
    }

    /// Textbook formula r = (nΣxy − ΣxΣy) / sqrt((nΣx² − (Σx)²)(nΣy² − (Σy)²)).
    fn raw_sum_r(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
    }

    #[test]
    fn noisy_log_linear_sample() {
        // ln y = 1 - 0.8 ln x + e, ln x ~ N(0, 1), e ~ N(0, 0.6).
        // Generating correlation: -0.8 / sqrt(0.64 + 0.36) = -0.8.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lx_dist = Normal::new(0.0, 1.0).unwrap();
        let e_dist = Normal::new(0.0, 0.6).unwrap();
        let lx: Vec<f64> = (0..20).map(|_| lx_dist.sample(&mut rng)).collect();
        let ly: Vec<f64> = lx.iter().map(|l| 1.0 - 0.8 * l + e_dist.sample(&mut rng)).collect();
        let xs: Vec<f64> = lx.iter().map(|v| v.exp()).collect();
        let ys: Vec<f64> = ly.iter().map(|v| v.exp()).collect();

        let c = pearson_log(&xs, &ys).unwrap();
        let oracle = raw_sum_r(&lx, &ly);
        assert!((c.r - oracle).abs() < 1e-9, "{} vs {}", c.r, oracle);
        assert!((oracle + 0.8).abs() <= 0.05, "sample r {oracle}");
        assert!(c.p_value < 1e-4);
    }
}
