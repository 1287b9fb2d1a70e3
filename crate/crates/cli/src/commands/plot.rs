use techlev::metrics::SizeClass;
use techlev::stats::max_leverage_by_vuln_count;

use super::measure::INSTANCES;
use super::stats::{class_kde, load_records};
use crate::config::ToolConfig;
use crate::error::{CliError, Result};
use crate::io::{csv_bytes, fmt_f64, read_instances, require_file, write_atomic};
use crate::svg::{render, Axis, Chart, Series, Style};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    KdeTheta,
    LeverageScatter,
    MaxLevVulns,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::KdeTheta, Kind::LeverageScatter, Kind::MaxLevVulns];

    pub fn stem(self) -> &'static str {
        match self {
            Kind::KdeTheta => "kde_theta",
            Kind::LeverageScatter => "leverage_scatter",
            Kind::MaxLevVulns => "max_lev_vulns",
        }
    }
}

/// Renders the chart and its data; both files or neither are written.
pub fn run(config: &ToolConfig, kind: Kind, deterministic: bool) -> Result<()> {
    let (chart, data) = match kind {
        Kind::KdeTheta => kde_theta(config)?,
        Kind::LeverageScatter => leverage_scatter(config)?,
        Kind::MaxLevVulns => max_lev_vulns(config)?,
    };
    let stamp = (!deterministic).then(|| format!("generated {}", chrono::Utc::now().to_rfc3339()));
    let svg = render(&chart, stamp.as_deref())
        .ok_or_else(|| CliError::Data(format!("{}: no data points to plot", kind.stem())))?;
    let out = &config.output_dir;
    write_atomic(&out.join(format!("{}.csv", kind.stem())), &data)?;
    write_atomic(&out.join(format!("{}.svg", kind.stem())), svg.as_bytes())
}

fn kde_theta(config: &ToolConfig) -> Result<(Chart, Vec<u8>)> {
    let records = load_records(config)?;
    let mut series = Vec::new();
    let mut rows = Vec::new();
    for class in SizeClass::ALL {
        if !records.iter().any(|r| r.size_class == class) {
            continue;
        }
        let points = class_kde(config, &records, class)?;
        rows.extend(points.iter().map(|(x, y)| vec![class.to_string(), fmt_f64(*x), fmt_f64(*y)]));
        series.push(Series { name: class.to_string(), style: Style::Line, points });
    }
    let chart = Chart {
        title: "Change direction density by size class".into(),
        x: Axis { label: "theta (degrees)".into(), log: false },
        y: Axis { label: "density".into(), log: false },
        series,
        hlines: vec![],
    };
    Ok((chart, csv_bytes(&["size_class", "theta", "density"], rows)))
}

fn leverage_scatter(config: &ToolConfig) -> Result<(Chart, Vec<u8>)> {
    let path = config.output_dir.join(INSTANCES);
    require_file(&path, "measure")?;
    let instances = read_instances(&path)?;
    let mut rows = Vec::new();
    let mut by_class: Vec<Series> = SizeClass::ALL
        .iter()
        .map(|c| Series { name: c.to_string(), style: Style::Markers, points: vec![] })
        .collect();
    for inst in instances.iter().filter(|i| i.own_loc > 0) {
        let kloc = inst.own_loc as f64 / 1000.0;
        let lambda = inst.dep_loc as f64 / inst.own_loc as f64;
        let class = SizeClass::of(inst.own_loc, config.size_class_threshold);
        rows.push(vec![inst.gav.to_string(), fmt_f64(kloc), fmt_f64(lambda), class.to_string()]);
        by_class[class as usize].points.push((kloc, lambda));
    }
    let chart = Chart {
        title: "Direct leverage against own size".into(),
        x: Axis { label: "own size (KLoC, log)".into(), log: true },
        y: Axis { label: "lambda_dir (log)".into(), log: true },
        series: by_class,
        hlines: vec![],
    };
    Ok((chart, csv_bytes(&["gav", "own_kloc", "lambda_dir", "size_class"], rows)))
}

fn max_lev_vulns(config: &ToolConfig) -> Result<(Chart, Vec<u8>)> {
    let records = load_records(config)?;
    let points = max_leverage_by_vuln_count(&records);
    let rows = points
        .iter()
        .map(|p| vec![p.ga.to_string(), p.vuln_count.to_string(), fmt_f64(p.max_lambda_dir)]);
    let data = csv_bytes(&["ga", "vuln_count", "max_lambda_dir"], rows);
    let threshold = config.lambda_thresholds.small;
    let chart = Chart {
        title: "Max direct leverage per library by vulnerability count".into(),
        x: Axis { label: "vulnerabilities in a library version".into(), log: false },
        y: Axis { label: "max lambda_dir (log)".into(), log: true },
        series: vec![Series {
            name: "library".into(),
            style: Style::Markers,
            points: points.iter().map(|p| (p.vuln_count as f64, p.max_lambda_dir)).collect(),
        }],
        hlines: vec![(threshold, format!("lambda = {threshold}"))],
    };
    Ok((chart, data))
}
