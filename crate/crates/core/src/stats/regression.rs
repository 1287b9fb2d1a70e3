use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use super::{t_two_sided_p, StatsError};
use crate::metrics::{ChangeRecord, SizeClass};

pub const REGRESSION_COLUMNS: [&str; 6] = [
    "(Intercept)",
    "log(rel_interval_prev + 1)",
    "log(lambda_dir)",
    "log(rho)",
    "cos(theta - 45)",
    "sin(theta)",
];

/// Below this fraction of its own norm, what is left of a column after
/// projecting out the earlier ones counts as zero.
const RANK_TOLERANCE: f64 = 1e-9;

fn finite_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.is_finite().then_some(*x)))
}

fn finite<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    v.is_finite().then_some(*v).serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub names: Vec<String>,
    #[serde(serialize_with = "finite_vec")]
    pub estimates: Vec<f64>,
    #[serde(serialize_with = "finite_vec")]
    pub std_errors: Vec<f64>,
    #[serde(serialize_with = "finite_vec")]
    pub t_stats: Vec<f64>,
    #[serde(serialize_with = "finite_vec")]
    pub p_values: Vec<f64>,
    #[serde(serialize_with = "finite")]
    pub r_squared: f64,
    #[serde(serialize_with = "finite")]
    pub adj_r_squared: f64,
    #[serde(serialize_with = "finite")]
    pub rmse: f64,
    pub n: usize,
}

/// Ordinary least squares through a QR decomposition of the design.
/// R-squared is centred when the design holds a constant column.
pub fn ols_fit(names: &[String], design: &[Vec<f64>], response: &[f64]) -> Result<RegressionResult, StatsError> {
    let n = design.len();
    if response.len() != n {
        return Err(StatsError::LengthMismatch { left: n, right: response.len() });
    }
    let k = names.len();
    if k == 0 {
        return Err(StatsError::InvalidArgument("design has no columns".into()));
    }
    if let Some(row) = design.iter().find(|r| r.len() != k) {
        return Err(StatsError::LengthMismatch { left: k, right: row.len() });
    }
    if n <= k {
        return Err(StatsError::TooFewObservations { needed: k + 1, got: n });
    }
    if design.iter().flatten().chain(response).any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidArgument("design and response must be finite".into()));
    }

    let x = DMatrix::from_fn(n, k, |i, j| design[i][j]);
    let y = DVector::from_column_slice(response);

    let mean_y = y.mean();
    let has_intercept = (0..k).any(|j| {
        let c = x.column(j);
        c[0] != 0.0 && c.iter().all(|&v| v == c[0])
    });
    let sst = if has_intercept {
        y.iter().map(|v| (v - mean_y).powi(2)).sum::<f64>()
    } else {
        y.norm_squared()
    };
    if sst == 0.0 {
        return Err(StatsError::ConstantResponse);
    }

    let qr = x.clone().qr();
    let r = qr.r();
    let collinear: Vec<String> = (0..k)
        .filter(|&j| {
            let col_norm = x.column(j).norm();
            col_norm == 0.0 || r[(j, j)].abs() <= RANK_TOLERANCE * col_norm
        })
        .map(|j| names[j].clone())
        .collect();
    if !collinear.is_empty() {
        return Err(StatsError::RankDeficient { columns: collinear });
    }

    let qty = qr.q().transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| StatsError::RankDeficient { columns: names.to_vec() })?;
    let residuals = &y - &x * &beta;
    let sse = residuals.norm_squared();
    let df = (n - k) as f64;
    let sigma2 = sse / df;

    // (XᵀX)⁻¹ = R⁻¹ R⁻ᵀ; only its diagonal is needed.
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| StatsError::RankDeficient { columns: names.to_vec() })?;
    let std_errors: Vec<f64> = (0..k).map(|j| (sigma2 * r_inv.row(j).norm_squared()).sqrt()).collect();
    let estimates: Vec<f64> = beta.iter().copied().collect();
    let t_stats: Vec<f64> = estimates.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let p_values = t_stats.iter().map(|&t| t_two_sided_p(t, df)).collect();

    let r_squared = (1.0 - sse / sst).clamp(0.0, 1.0);
    let dof_total = if has_intercept { (n - 1) as f64 } else { n as f64 };
    Ok(RegressionResult {
        names: names.to_vec(),
        estimates,
        std_errors,
        t_stats,
        p_values,
        r_squared,
        adj_r_squared: 1.0 - (1.0 - r_squared) * dof_total / df,
        rmse: sigma2.sqrt(),
        n,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RegressionExclusions {
    pub considered: usize,
    pub no_previous_interval: usize,
    pub zero_leverage: usize,
    pub zero_distance: usize,
}

impl RegressionExclusions {
    pub fn total(&self) -> usize {
        self.no_previous_interval + self.zero_leverage + self.zero_distance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    pub names: Vec<String>,
    pub design: Vec<Vec<f64>>,
    pub response: Vec<f64>,
    pub exclusions: RegressionExclusions,
}

/// One row per record of the size class: intercept, previous interval,
/// leverage, distance and the two direction transforms; response is
/// `ln(rel_interval + 1)`. Rows whose logarithms are undefined are counted,
/// each under the first reason that applies.
pub fn build_regression_dataset(records: &[ChangeRecord], size_class: SizeClass) -> Result<RegressionDataset, StatsError> {
    let mut ex = RegressionExclusions::default();
    let mut design = Vec::new();
    let mut response = Vec::new();
    for r in records.iter().filter(|r| r.size_class == size_class) {
        ex.considered += 1;
        let Some(prev) = r.rel_interval_prev else {
            ex.no_previous_interval += 1;
            continue;
        };
        if !(r.lambda_dir > 0.0 && r.lambda_dir.is_finite()) {
            ex.zero_leverage += 1;
            continue;
        }
        if r.rho <= 0.0 {
            ex.zero_distance += 1;
            continue;
        }
        let theta = r.theta.to_radians();
        design.push(vec![
            1.0,
            (prev as f64 + 1.0).ln(),
            r.lambda_dir.ln(),
            r.rho.ln(),
            (theta - std::f64::consts::FRAC_PI_4).cos(),
            theta.sin(),
        ]);
        response.push((r.rel_interval as f64 + 1.0).ln());
    }
    if design.is_empty() {
        return Err(StatsError::EmptyDataset);
    }
    Ok(RegressionDataset {
        names: REGRESSION_COLUMNS.iter().map(|s| s.to_string()).collect(),
        design,
        response,
        exclusions: ex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::test_support::record;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn exact_line() {
        let design: Vec<Vec<f64>> = (0..8).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..8).map(|i| 2.0 + 3.0 * i as f64).collect();
        let fit = ols_fit(&names(2), &design, &y).unwrap();
        assert!((fit.estimates[0] - 2.0).abs() < 1e-12);
        assert!((fit.estimates[1] - 3.0).abs() < 1e-12);
        assert!(fit.rmse < 1e-12);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn orthogonal_response() {
        // x = (-1, 1, -1, 1), y = (1, 1, -1, -1) + 5: y - mean ⟂ x.
        let design = vec![vec![1.0, -1.0], vec![1.0, 1.0], vec![1.0, -1.0], vec![1.0, 1.0]];
        let y = [6.0, 6.0, 4.0, 4.0];
        let fit = ols_fit(&names(2), &design, &y).unwrap();
        assert!(fit.estimates[1].abs() < 1e-12);
        assert!((fit.estimates[0] - 5.0).abs() < 1e-12);
        assert!(fit.r_squared.abs() < 1e-12);
        assert!(fit.adj_r_squared <= fit.r_squared);
    }

    /// Normal equations solved by Gauss-Jordan elimination.
    fn normal_equations(design: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let k = design[0].len();
        let mut a = vec![vec![0.0; 2 * k + 1]; k];
        for (row, &yi) in design.iter().zip(y) {
            for i in 0..k {
                for j in 0..k {
                    a[i][j] += row[i] * row[j];
                }
                a[i][2 * k] += row[i] * yi;
            }
        }
        for (i, r) in a.iter_mut().enumerate() {
            r[k + i] = 1.0;
        }
        for c in 0..k {
            let p = (c..k).max_by(|&x, &z| a[x][c].abs().total_cmp(&a[z][c].abs())).unwrap();
            a.swap(c, p);
            let piv = a[c][c];
            a[c].iter_mut().for_each(|v| *v /= piv);
            for r in 0..k {
                if r != c {
                    let f = a[r][c];
                    let src = a[c].clone();
                    a[r].iter_mut().zip(&src).for_each(|(v, s)| *v -= f * s);
                }
            }
        }
        let beta = a.iter().map(|r| r[2 * k]).collect();
        let inv = a.iter().map(|r| r[k..2 * k].to_vec()).collect();
        (beta, inv)
    }

    #[test]
    fn matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let design: Vec<Vec<f64>> = (0..40).map(|_| vec![1.0, rng.random_range(-2.0..2.0), rng.random_range(0.0..5.0)]).collect();
        let y: Vec<f64> = design.iter().map(|r| 0.5 * r[1] - r[2] + rng.random_range(-1.0..1.0)).collect();
        let fit = ols_fit(&names(3), &design, &y).unwrap();
        let (beta, inv) = normal_equations(&design, &y);
        let sse: f64 = design.iter().zip(&y).map(|(r, yi)| (yi - r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>()).powi(2)).sum();
        let s2 = sse / 37.0;
        for j in 0..3 {
            assert!((fit.estimates[j] - beta[j]).abs() < 1e-9);
            assert!((fit.std_errors[j] - (s2 * inv[j][j]).sqrt()).abs() < 1e-9);
            assert!((fit.t_stats[j] - fit.estimates[j] / fit.std_errors[j]).abs() < 1e-12);
        }
        assert!((fit.rmse - s2.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_names_columns() {
        let design: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64, 2.0 * i as f64 + 1.0]).collect();
        let y: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        let err = ols_fit(&["one".into(), "x".into(), "twice_x".into()], &design, &y).unwrap_err();
        assert_eq!(err, StatsError::RankDeficient { columns: vec!["twice_x".into()] });
    }

    #[test]
    fn preconditions() {
        let design = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        assert!(matches!(ols_fit(&names(2), &design, &[1.0, 2.0]), Err(StatsError::TooFewObservations { .. })));
        let design: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64]).collect();
        assert_eq!(ols_fit(&names(2), &design, &[3.0; 5]), Err(StatsError::ConstantResponse));
    }

    #[test]
    fn json_maps_non_finite_to_null() {
        let design: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 1.0 + i as f64).collect();
        let fit = ols_fit(&names(2), &design, &y).unwrap();
        let json = serde_json::to_value(&fit).unwrap();
        assert!(json["t_stats"].as_array().unwrap().iter().all(|v| v.is_null() || v.is_f64()));
    }

    #[test]
    fn dataset_columns() {
        let mut r = record("g:a:2", 4.0, 0);
        r.rel_interval = 0;
        r.rel_interval_prev = Some(6);
        r.theta = 45.0;
        r.rho = 10.0;
        let ds = build_regression_dataset(&[r], SizeClass::SmallMedium).unwrap();
        let row = &ds.design[0];
        assert_eq!(ds.response, [0.0]);
        assert_eq!(row[0], 1.0);
        assert!((row[1] - 7f64.ln()).abs() < 1e-15);
        assert!((row[2] - 4f64.ln()).abs() < 1e-15);
        assert!((row[3] - 10f64.ln()).abs() < 1e-15);
        assert!((row[4] - 1.0).abs() < 1e-15);
        assert!((row[5] - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(ds.names.len(), 6);
    }

    #[test]
    fn dataset_exclusions() {
        let mut zero_lev = record("g:a:1", 0.0, 0);
        zero_lev.dep_loc = 0;
        let mut no_prev = record("g:a:2", 3.0, 0);
        no_prev.rel_interval_prev = None;
        let mut still = record("g:a:3", 3.0, 0);
        still.rho = 0.0;
        let mut large = record("g:b:1", 3.0, 0);
        large.size_class = SizeClass::Large;
        let ok = record("g:a:4", 2.0, 0);
        let ds = build_regression_dataset(&[zero_lev, no_prev, still, large, ok], SizeClass::SmallMedium).unwrap();
        assert_eq!(ds.design.len(), 1);
        assert_eq!(
            ds.exclusions,
            RegressionExclusions { considered: 4, no_previous_interval: 1, zero_leverage: 1, zero_distance: 1 }
        );
        assert_eq!(build_regression_dataset(&[], SizeClass::Large), Err(StatsError::EmptyDataset));
    }

    /// Rows in the shape of the interval model with known coefficients.
    fn synthetic(seed: u64, n: usize, beta: &[f64; 6], sigma: f64) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lev = Normal::new(0.5, 1.5).unwrap();
        let dist = Normal::new(6.0, 2.0).unwrap();
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut design = Vec::with_capacity(n);
        let mut signal = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let prev: u32 = rng.random_range(0..400);
            let theta: f64 = rng.random_range(-45.0f64..315.0).to_radians();
            let row = vec![
                1.0,
                (prev as f64 + 1.0).ln(),
                lev.sample(&mut rng),
                dist.sample(&mut rng),
                (theta - std::f64::consts::FRAC_PI_4).cos(),
                theta.sin(),
            ];
            let s: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            signal.push(s);
            y.push(s + noise.sample(&mut rng));
            design.push(row);
        }
        (design, y, signal)
    }

    #[test]
    fn recovers_generator() {
        let beta = [2.8, 0.06, -0.07, 0.49, -0.36, 0.08];
        let sigma = 1.2;
        let (design, y, signal) = synthetic(2020, 2000, &beta, sigma);
        let fit = ols_fit(&REGRESSION_COLUMNS.map(String::from), &design, &y).unwrap();
        for j in 0..6 {
            assert!((fit.estimates[j] - beta[j]).abs() <= 3.0 * fit.std_errors[j], "coef {j}");
        }
        let m = signal.iter().sum::<f64>() / signal.len() as f64;
        let var_signal = signal.iter().map(|s| (s - m).powi(2)).sum::<f64>() / signal.len() as f64;
        let r2_gen = var_signal / (var_signal + sigma * sigma);
        assert!((fit.r_squared - r2_gen).abs() <= 0.05, "{} vs {}", fit.r_squared, r2_gen);
    }

    proptest! {
        #[test]
        fn residuals_orthogonal(seed in 0u64..10_000) {
            let (design, y, _) = synthetic(seed, 60, &[1.0, 0.2, -0.3, 0.4, 0.5, -0.6], 0.7);
            let fit = ols_fit(&names(6), &design, &y).unwrap();
            let resid: Vec<f64> = design.iter().zip(&y)
                .map(|(r, yi)| yi - r.iter().zip(&fit.estimates).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            for j in 0..6 {
                let dot: f64 = design.iter().zip(&resid).map(|(r, e)| r[j] * e).sum();
                prop_assert!(dot.abs() < 1e-8 * ynorm);
            }
            prop_assert!(fit.adj_r_squared <= fit.r_squared);
            prop_assert!((0.0..=1.0).contains(&fit.r_squared));
            prop_assert!(fit.p_values.iter().all(|p| (0.0..=1.0).contains(p)));
        }

        #[test]
        fn exact_data_recovered(seed in 0u64..10_000, b in prop::array::uniform6(-5.0f64..5.0)) {
            prop_assume!(b[1..].iter().any(|v| v.abs() > 0.1));
            let (design, y, _) = synthetic(seed, 50, &b, 0.0);
            let fit = ols_fit(&names(6), &design, &y).unwrap();
            for j in 0..6 {
                prop_assert!((fit.estimates[j] - b[j]).abs() <= 1e-9 * b[j].abs().max(1.0));
            }
        }
    }
}
