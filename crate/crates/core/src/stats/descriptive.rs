use serde::Serialize;

/// Sample description. Everything but `n` is `None` for an empty sample;
/// `sd` needs two values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub sd: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub q25: Option<f64>,
    pub q75: Option<f64>,
}

/// Quantile of sorted data by linear interpolation between order
/// statistics at position `(n - 1) * p`.
pub fn quantile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// NaN values are dropped before summarizing.
pub fn summarize(values: &[f64]) -> Summary {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return Summary { n, mean: None, median: None, sd: None, min: None, max: None, q25: None, q75: None };
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let sd = (n > 1).then(|| (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
    Summary {
        n,
        mean: Some(mean),
        median: quantile(&v, 0.5),
        sd,
        min: v.first().copied(),
        max: v.last().copied(),
        q25: quantile(&v, 0.25),
        q75: quantile(&v, 0.75),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_quartiles() {
        // Sorted: 1 2 3 4 6 8 9 12 15 20 ; n = 10
        // q25 at h = 2.25: 3 + 0.25 * 1 = 3.25
        // median at h = 4.5: 6 + 0.5 * 2 = 7
        // q75 at h = 6.75: 9 + 0.75 * 3 = 11.25
        let s = summarize(&[12.0, 3.0, 1.0, 20.0, 8.0, 2.0, 15.0, 6.0, 4.0, 9.0]);
        assert_eq!(s.n, 10);
        assert_eq!(s.mean, Some(8.0));
        assert_eq!(s.q25, Some(3.25));
        assert_eq!(s.median, Some(7.0));
        assert_eq!(s.q75, Some(11.25));
        assert_eq!((s.min, s.max), (Some(1.0), Some(20.0)));
        // Σ(x-8)^2 = 49+36+25+16+4+0+1+16+49+144 = 340; 340 / 9
        assert!((s.sd.unwrap() - (340.0f64 / 9.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn small_samples() {
        let empty = summarize(&[]);
        assert_eq!(empty.n, 0);
        assert!(empty.mean.is_none() && empty.q75.is_none());
        let one = summarize(&[5.0]);
        assert_eq!((one.median, one.q25, one.sd), (Some(5.0), Some(5.0), None));
        let odd = summarize(&[3.0, 1.0, 2.0]);
        assert_eq!((odd.q25, odd.median, odd.q75), (Some(1.5), Some(2.0), Some(2.5)));
    }
}
