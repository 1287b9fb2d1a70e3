use std::collections::BTreeSet;

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use super::StatsError;
use crate::metrics::{ChangeRecord, SizeClass};

/// Normal quantile for a 95% interval.
pub const WOOLF_Z: f64 = 1.96;

/// Exposure is `lambda_dir > threshold`; outcome is being vulnerable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContingencyTable {
    pub exposed_vuln: u64,
    pub exposed_safe: u64,
    pub unexposed_vuln: u64,
    pub unexposed_safe: u64,
    pub threshold: f64,
}

impl ContingencyTable {
    pub fn new(exposed_vuln: u64, exposed_safe: u64, unexposed_vuln: u64, unexposed_safe: u64) -> Self {
        Self { exposed_vuln, exposed_safe, unexposed_vuln, unexposed_safe, threshold: f64::NAN }
    }

    fn cells(&self) -> [u64; 4] {
        [self.exposed_vuln, self.exposed_safe, self.unexposed_vuln, self.unexposed_safe]
    }

    pub fn total(&self) -> u64 {
        self.cells().iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OddsResult {
    pub odds_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub fisher_p: f64,
}

/// Counts the records of one size class, each release once.
pub fn contingency(records: &[ChangeRecord], lambda_threshold: f64, size_class: SizeClass) -> ContingencyTable {
    let mut table = ContingencyTable::new(0, 0, 0, 0);
    table.threshold = lambda_threshold;
    let mut seen = BTreeSet::new();
    for r in records.iter().filter(|r| r.size_class == size_class) {
        if !seen.insert(&r.gav_to) {
            continue;
        }
        let cell = match (r.lambda_dir > lambda_threshold, r.is_vuln) {
            (true, true) => &mut table.exposed_vuln,
            (true, false) => &mut table.exposed_safe,
            (false, true) => &mut table.unexposed_vuln,
            (false, false) => &mut table.unexposed_safe,
        };
        *cell += 1;
    }
    table
}

/// Two-sided Fisher exact test: total probability of the tables with the
/// same margins that are no more likely than the observed one.
pub fn fisher_exact_two_sided(t: &ContingencyTable) -> f64 {
    let (a, b, c, d) = (t.exposed_vuln, t.exposed_safe, t.unexposed_vuln, t.unexposed_safe);
    let n = a + b + c + d;
    if n == 0 {
        return 1.0;
    }
    let row = a + b;
    let col = a + c;
    let ln_total = ln_binomial(n, row);
    let ln_p = |x: u64| ln_binomial(col, x) + ln_binomial(n - col, row - x) - ln_total;
    let observed = ln_p(a);
    // Relative slack so ties that differ only by rounding count as "as extreme".
    let cutoff = observed + 1e-7f64.ln_1p();
    let lo = (row + col).saturating_sub(n);
    let hi = row.min(col);
    let p: f64 = (lo..=hi).map(ln_p).filter(|&lp| lp <= cutoff).map(f64::exp).sum();
    p.min(1.0)
}

/// Odds ratio with its Woolf (log-normal) 95% interval and the Fisher p.
pub fn odds_analysis(table: &ContingencyTable) -> Result<OddsResult, StatsError> {
    let fisher_p = fisher_exact_two_sided(table);
    if table.cells().contains(&0) {
        return Err(StatsError::ZeroCell { fisher_p });
    }
    let [a, b, c, d] = table.cells().map(|x| x as f64);
    let odds_ratio = (a / b) / (c / d);
    let se = (1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d).sqrt();
    let ln_or = odds_ratio.ln();
    Ok(OddsResult {
        odds_ratio,
        ci_low: (ln_or - WOOLF_Z * se).exp(),
        ci_high: (ln_or + WOOLF_Z * se).exp(),
        fisher_p,
    })
}
