//! Output files are written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use techlev::metrics::{ChangeRecord, SizeClass};
use techlev::model::{LibraryInstance, VersionedCoordinate};

use crate::error::{CliError, Result};

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let fail = |e: std::io::Error| CliError::Data(format!("cannot write {}: {e}", path.display()));
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(parent).map_err(fail)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn csv_bytes<I>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Shortest text that parses back to the same value; empty for NaN.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

pub fn fmt_time(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::Reader::from_path(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    reader(path)?
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| CliError::Data(format!("{} row {}: {e}", path.display(), i + 1))))
        .collect()
}

pub const INSTANCE_HEADER: [&str; 6] = ["gav", "released", "own_loc", "dep_loc", "own_vulns", "dep_vulns"];

#[derive(Deserialize)]
struct InstanceRow {
    gav: VersionedCoordinate,
    released: DateTime<Utc>,
    own_loc: u64,
    dep_loc: u64,
    own_vulns: u64,
    dep_vulns: u64,
}

pub fn instances_csv(instances: &[LibraryInstance]) -> Vec<u8> {
    csv_bytes(
        &INSTANCE_HEADER,
        instances.iter().map(|i| {
            vec![
                i.gav.to_string(),
                fmt_time(&i.released),
                i.own_loc.to_string(),
                i.dep_loc.to_string(),
                i.own_vulns.to_string(),
                i.dep_vulns.to_string(),
            ]
        }),
    )
}

/// Dependency lists are not part of the file and come back empty.
pub fn read_instances(path: &Path) -> Result<Vec<LibraryInstance>> {
    Ok(rows::<InstanceRow>(path)?
        .into_iter()
        .map(|r| LibraryInstance {
            gav: r.gav,
            released: r.released,
            own_loc: r.own_loc,
            direct_deps: Vec::new(),
            dep_loc: r.dep_loc,
            own_vulns: r.own_vulns,
            dep_vulns: r.dep_vulns,
        })
        .collect())
}

pub const CHANGE_HEADER: [&str; 16] = [
    "chain_id",
    "gav_from",
    "gav_to",
    "delta_dep",
    "delta_own",
    "rho",
    "theta",
    "lambda_dir",
    "rel_interval",
    "rel_interval_prev",
    "size_class",
    "is_vuln",
    "vulns",
    "own_loc",
    "dep_loc",
    "released",
];

#[derive(Deserialize)]
struct ChangeRow {
    chain_id: String,
    gav_from: VersionedCoordinate,
    gav_to: VersionedCoordinate,
    delta_dep: i64,
    delta_own: i64,
    rho: f64,
    theta: f64,
    lambda_dir: Option<f64>,
    rel_interval: u64,
    rel_interval_prev: Option<u64>,
    size_class: SizeClass,
    is_vuln: bool,
    vulns: u64,
    own_loc: u64,
    dep_loc: u64,
    #[allow(dead_code)]
    released: String,
}

/// `released` is the newer release's timestamp, for reading convenience.
pub fn changes_csv(records: &[ChangeRecord], released: impl Fn(&VersionedCoordinate) -> String) -> Vec<u8> {
    csv_bytes(
        &CHANGE_HEADER,
        records.iter().map(|r| {
            vec![
                r.chain_id.clone(),
                r.gav_from.to_string(),
                r.gav_to.to_string(),
                r.delta_dep.to_string(),
                r.delta_own.to_string(),
                fmt_f64(r.rho),
                fmt_f64(r.theta),
                fmt_f64(r.lambda_dir),
                r.rel_interval.to_string(),
                r.rel_interval_prev.map_or_else(String::new, |v| v.to_string()),
                r.size_class.to_string(),
                r.is_vuln.to_string(),
                r.vulns.to_string(),
                r.own_loc.to_string(),
                r.dep_loc.to_string(),
                released(&r.gav_to),
            ]
        }),
    )
}

pub fn read_changes(path: &Path) -> Result<Vec<ChangeRecord>> {
    Ok(rows::<ChangeRow>(path)?
        .into_iter()
        .map(|r| ChangeRecord {
            chain_id: r.chain_id,
            gav_from: r.gav_from,
            gav_to: r.gav_to,
            delta_dep: r.delta_dep,
            delta_own: r.delta_own,
            rho: r.rho,
            theta: r.theta,
            lambda_dir: r.lambda_dir.unwrap_or(f64::NAN),
            rel_interval: r.rel_interval,
            rel_interval_prev: r.rel_interval_prev,
            size_class: r.size_class,
            is_vuln: r.is_vuln,
            vulns: r.vulns,
            own_loc: r.own_loc,
            dep_loc: r.dep_loc,
        })
        .collect())
}

/// Fails with a data error naming the file when it is missing.
pub fn require_file(path: &Path, produced_by: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Data(format!("{} not found; run `techlev {produced_by}` first", path.display())))
    }
}
