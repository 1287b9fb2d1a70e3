use std::collections::BTreeMap;

use serde::Serialize;
use techlev::chains::{split_corpus, ReleaseChain};
use techlev::metrics::{build_change_records, ChangeRecord, SizeClass};
use techlev::stats::{summarize, Summary};

use super::measure::INSTANCES;
use crate::config::ToolConfig;
use crate::error::{CliError, Result};
use crate::io::{changes_csv, csv_bytes, fmt_time, read_instances, require_file, write_atomic, write_json};

pub const CHAINS: &str = "chains.csv";
pub const CHANGES: &str = "changes.csv";
pub const SUMMARY: &str = "summary.json";

#[derive(Debug, Serialize)]
pub struct ClassSummary {
    pub n: usize,
    pub lambda_dir: Summary,
    pub rho: Summary,
    pub theta: Summary,
}

#[derive(Debug, Serialize)]
pub struct MetricsSummary {
    pub chains: usize,
    pub records: usize,
    pub size_classes: BTreeMap<SizeClass, ClassSummary>,
}

pub fn summarize_records(chains: usize, records: &[ChangeRecord]) -> MetricsSummary {
    let size_classes = SizeClass::ALL
        .into_iter()
        .map(|class| {
            let of: Vec<&ChangeRecord> = records.iter().filter(|r| r.size_class == class).collect();
            let column = |f: fn(&ChangeRecord) -> f64| summarize(&of.iter().map(|r| f(r)).collect::<Vec<_>>());
            let summary = ClassSummary {
                n: of.len(),
                lambda_dir: column(|r| r.lambda_dir),
                rho: column(|r| r.rho),
                theta: column(|r| r.theta),
            };
            (class, summary)
        })
        .collect();
    MetricsSummary { chains, records: records.len(), size_classes }
}

fn chains_csv(chains: &[ReleaseChain]) -> Vec<u8> {
    let rows = chains.iter().flat_map(|chain| {
        chain.instances.iter().enumerate().map(move |(i, inst)| {
            let interval = |k: Option<usize>| k.map_or_else(String::new, |k| chain.intervals[k].to_string());
            vec![
                chain.chain_id.clone(),
                i.to_string(),
                inst.gav.to_string(),
                fmt_time(&inst.released),
                interval(i.checked_sub(1)),
                interval(i.checked_sub(2)),
            ]
        })
    });
    csv_bytes(&["chain_id", "position", "gav", "released", "rel_interval", "rel_interval_prev"], rows)
}

pub fn run(config: &ToolConfig) -> Result<()> {
    let out = &config.output_dir;
    let input = out.join(INSTANCES);
    require_file(&input, "measure")?;
    let instances = read_instances(&input)?;
    let chains = split_corpus(&instances, config.branch_key).map_err(|e| CliError::Data(e.to_string()))?;
    if chains.is_empty() {
        return Err(CliError::Data(format!("{} holds no instances; no release chains", input.display())));
    }
    let records = build_change_records(&chains, config.size_class_threshold);
    let released: BTreeMap<_, _> = instances.iter().map(|i| (&i.gav, fmt_time(&i.released))).collect();

    write_atomic(&out.join(CHAINS), &chains_csv(&chains))?;
    write_atomic(&out.join(CHANGES), &changes_csv(&records, |gav| released[gav].clone()))?;
    write_json(&out.join(SUMMARY), &summarize_records(chains.len(), &records))
}
