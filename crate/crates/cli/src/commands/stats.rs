use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use techlev::metrics::{ChangeRecord, SizeClass};
use techlev::stats::{
    build_regression_dataset, contingency, kde, odds_analysis, ols_fit, payoff_ratio, pearson_log,
    ContingencyTable, Correlation, OddsResult, RegressionExclusions, RegressionResult,
};

use super::analyze::CHANGES;
use crate::config::ToolConfig;
use crate::error::{CliError, Result};
use crate::io::{csv_bytes, fmt_f64, read_changes, require_file, write_atomic, write_json};

pub const PAYOFF_LEVERAGE: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];
/// Position of the leverage coefficient in the regression design.
const LEVERAGE_COLUMN: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Which {
    Regress,
    Odds,
    Kde,
    Correlation,
    Payoff { beta: Option<f64> },
}

pub fn load_records(config: &ToolConfig) -> Result<Vec<ChangeRecord>> {
    let path = config.output_dir.join(CHANGES);
    require_file(&path, "analyze")?;
    read_changes(&path)
}

pub fn run(config: &ToolConfig, which: Which) -> Result<()> {
    let records = load_records(config)?;
    match which {
        Which::Regress => regress(config, &records).map(drop),
        Which::Odds => odds(config, &records),
        Which::Kde => kde_series(config, &records),
        Which::Correlation => correlation(config, &records),
        Which::Payoff { beta } => payoff(config, &records, beta),
    }
}

pub fn run_all(config: &ToolConfig) -> Result<()> {
    let records = load_records(config)?;
    let fits = regress(config, &records)?;
    odds(config, &records)?;
    kde_series(config, &records)?;
    correlation(config, &records)?;
    write_payoff(config, fitted_betas(&fits))
}

#[derive(Debug, Serialize)]
pub struct ClassRegression {
    pub result: RegressionResult,
    pub exclusions: RegressionExclusions,
}

fn display(v: f64, prec: usize) -> String {
    if v.is_finite() {
        format!("{v:.prec$}")
    } else {
        "NA".into()
    }
}

fn regression_text(fits: &BTreeMap<SizeClass, ClassRegression>) -> String {
    let mut s = String::new();
    for (class, fit) in fits {
        let r = &fit.result;
        let _ = writeln!(s, "size class {class}: n = {}, excluded = {}", r.n, fit.exclusions.total());
        let _ = writeln!(s, "{:<28} {:>12} {:>12} {:>10} {:>11}", "term", "estimate", "std.err.", "tStat", "p-value");
        for j in 0..r.names.len() {
            let p = if r.p_values[j].is_finite() { format!("{:.3e}", r.p_values[j]) } else { "NA".into() };
            let _ = writeln!(
                s,
                "{:<28} {:>12} {:>12} {:>10} {:>11}",
                r.names[j],
                display(r.estimates[j], 6),
                display(r.std_errors[j], 6),
                display(r.t_stats[j], 3),
                p
            );
        }
        let _ = writeln!(
            s,
            "R2 = {}  adj. R2 = {}  RMSE = {}\n",
            display(r.r_squared, 4),
            display(r.adj_r_squared, 4),
            display(r.rmse, 4)
        );
    }
    s
}

fn regress(config: &ToolConfig, records: &[ChangeRecord]) -> Result<BTreeMap<SizeClass, ClassRegression>> {
    let mut fits = BTreeMap::new();
    for class in SizeClass::ALL {
        let context = format!("regress/{class}");
        let ds = build_regression_dataset(records, class).map_err(|e| CliError::stats(&context, e))?;
        let result = ols_fit(&ds.names, &ds.design, &ds.response).map_err(|e| CliError::stats(&context, e))?;
        fits.insert(class, ClassRegression { result, exclusions: ds.exclusions });
    }
    let out = &config.output_dir;
    write_json(&out.join("regression.json"), &fits)?;
    write_atomic(&out.join("regression.txt"), regression_text(&fits).as_bytes())?;
    Ok(fits)
}

#[derive(Debug, Serialize)]
struct ClassOdds {
    table: ContingencyTable,
    result: OddsResult,
}

fn odds(config: &ToolConfig, records: &[ChangeRecord]) -> Result<()> {
    let mut report = BTreeMap::new();
    let mut text = String::new();
    for class in SizeClass::ALL {
        let threshold = config.lambda_thresholds.for_class(class);
        let table = contingency(records, threshold, class);
        let result = odds_analysis(&table).map_err(|e| CliError::stats(format!("odds/{class}"), e))?;
        let _ = writeln!(text, "size class {class}: threshold lambda_dir > {threshold}");
        let _ = writeln!(text, "{:<18} {:>10} {:>10}", "", "vulnerable", "safe");
        let _ = writeln!(text, "{:<18} {:>10} {:>10}", format!("lambda > {threshold}"), table.exposed_vuln, table.exposed_safe);
        let _ = writeln!(text, "{:<18} {:>10} {:>10}", format!("lambda <= {threshold}"), table.unexposed_vuln, table.unexposed_safe);
        let _ = writeln!(
            text,
            "OR = {:.4}  95% CI [{:.4}, {:.4}]  Fisher p = {:.4e}\n",
            result.odds_ratio, result.ci_low, result.ci_high, result.fisher_p
        );
        report.insert(class, ClassOdds { table, result });
    }
    let out = &config.output_dir;
    write_json(&out.join("odds.json"), &report)?;
    write_atomic(&out.join("odds.txt"), text.as_bytes())
}

pub fn kde_file(class: SizeClass) -> String {
    format!("kde_{class}.csv")
}

pub fn class_kde(config: &ToolConfig, records: &[ChangeRecord], class: SizeClass) -> Result<Vec<(f64, f64)>> {
    let thetas: Vec<f64> = records.iter().filter(|r| r.size_class == class).map(|r| r.theta).collect();
    kde(&thetas, &config.kde.options()).map_err(|e| CliError::stats(format!("kde/{class}"), e))
}

fn kde_series(config: &ToolConfig, records: &[ChangeRecord]) -> Result<()> {
    let mut series = Vec::new();
    for class in SizeClass::ALL {
        series.push((class, class_kde(config, records, class)?));
    }
    for (class, points) in series {
        let rows = points.iter().map(|(x, y)| vec![fmt_f64(*x), fmt_f64(*y)]);
        write_atomic(&config.output_dir.join(kde_file(class)), &csv_bytes(&["theta", "density"], rows))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct CorrelationReport {
    x: &'static str,
    y: &'static str,
    excluded_zero_leverage: usize,
    #[serde(flatten)]
    result: Correlation,
}

/// One point per release: direct leverage against own size.
fn correlation(config: &ToolConfig, records: &[ChangeRecord]) -> Result<()> {
    let mut seen = BTreeSet::new();
    let (mut own, mut lev, mut excluded) = (Vec::new(), Vec::new(), 0);
    for r in records {
        if !seen.insert(&r.gav_to) {
            continue;
        }
        if r.lambda_dir > 0.0 && r.lambda_dir.is_finite() {
            own.push(r.own_loc as f64);
            lev.push(r.lambda_dir);
        } else {
            excluded += 1;
        }
    }
    let result = pearson_log(&own, &lev).map_err(|e| CliError::stats("correlation", e))?;
    let report = CorrelationReport { x: "log(own_loc)", y: "log(lambda_dir)", excluded_zero_leverage: excluded, result };
    write_json(&config.output_dir.join("correlation.json"), &report)
}

#[derive(Debug, Serialize)]
struct PayoffRow {
    source: String,
    beta: f64,
    lambda: f64,
    ratio: f64,
}

fn fitted_betas(fits: &BTreeMap<SizeClass, ClassRegression>) -> Vec<(String, f64)> {
    fits.iter()
        .map(|(class, f)| (class.to_string(), f.result.estimates[LEVERAGE_COLUMN]))
        .collect()
}

fn write_payoff(config: &ToolConfig, betas: Vec<(String, f64)>) -> Result<()> {
    let rows: Vec<PayoffRow> = betas
        .iter()
        .flat_map(|(source, beta)| {
            PAYOFF_LEVERAGE.iter().map(move |&lambda| PayoffRow {
                source: source.clone(),
                beta: *beta,
                lambda,
                ratio: payoff_ratio(lambda, *beta),
            })
        })
        .collect();
    let mut text = format!("{:<14} {:>10} {:>8} {:>10}\n", "source", "beta", "Lambda", "ratio");
    for r in &rows {
        let _ = writeln!(text, "{:<14} {:>10.4} {:>8} {:>10.4}", r.source, r.beta, r.lambda, r.ratio);
    }
    let out = &config.output_dir;
    write_json(&out.join("payoff.json"), &serde_json::json!({ "rows": rows }))?;
    write_atomic(&out.join("payoff.txt"), text.as_bytes())
}

/// With an explicit `beta` no regression is run.
fn payoff(config: &ToolConfig, records: &[ChangeRecord], beta: Option<f64>) -> Result<()> {
    let betas = match beta {
        Some(b) if b.is_finite() => vec![("given".to_string(), b)],
        Some(b) => return Err(CliError::Config(format!("--beta must be finite, got {b}"))),
        None => {
            let mut betas = Vec::new();
            for class in SizeClass::ALL {
                let context = format!("payoff/{class}");
                let ds = build_regression_dataset(records, class).map_err(|e| CliError::stats(&context, e))?;
                let fit = ols_fit(&ds.names, &ds.design, &ds.response).map_err(|e| CliError::stats(&context, e))?;
                betas.push((class.to_string(), fit.estimates[LEVERAGE_COLUMN]));
            }
            betas
        }
    };
    write_payoff(config, betas)
}
