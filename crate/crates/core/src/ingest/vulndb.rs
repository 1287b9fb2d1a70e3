use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::Deserialize;

use super::{classify_dependency_scope, DependencyScope, IngestError};
use crate::model::{Coordinate, LibraryInstance, VersionRange, VersionedCoordinate};

/// A vulnerability affecting the own code of one library.
#[derive(Debug, Clone, PartialEq)]
pub struct VulnRecord {
    pub id: String,
    pub coordinate: Coordinate,
    pub affected: Vec<VersionRange>,
}

impl VulnRecord {
    pub fn affects(&self, gav: &VersionedCoordinate) -> bool {
        self.coordinate == gav.coordinate && self.affected.iter().any(|r| r.contains(&gav.version))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    #[serde(alias = "coord")]
    coordinate: String,
    affected: Vec<String>,
}

/// Parses a JSON array of `{id, coordinate, affected}` records.
pub fn parse_vuln_db(json: &str) -> Result<Vec<VulnRecord>, IngestError> {
    let raw: Vec<RawRecord> = serde_json::from_str(json).map_err(|source| IngestError::Json {
        path: "<inline>".into(),
        source,
    })?;
    validate_records(raw)
}

fn validate_records(raw: Vec<RawRecord>) -> Result<Vec<VulnRecord>, IngestError> {
    let mut ids = HashSet::new();
    let mut out = Vec::with_capacity(raw.len());
    for r in raw {
        if !ids.insert(r.id.clone()) {
            return Err(IngestError::DuplicateVulnId(r.id));
        }
        let bad = |reason: String| IngestError::VulnRecord { id: r.id.clone(), reason };
        let coordinate: Coordinate = r.coordinate.parse().map_err(|e| bad(format!("{e}")))?;
        if r.affected.is_empty() {
            return Err(bad("no affected ranges".into()));
        }
        let affected = r
            .affected
            .iter()
            .map(|s| s.parse::<VersionRange>().map_err(|e| bad(format!("{e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(VulnRecord { id: r.id, coordinate, affected });
    }
    Ok(out)
}

pub fn load_vuln_db(path: &Path) -> Result<Vec<VulnRecord>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: Vec<RawRecord> = serde_json::from_str(&text).map_err(|source| IngestError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    validate_records(raw)
}

pub fn own_vuln_count(gav: &VersionedCoordinate, db: &[VulnRecord]) -> u64 {
    db.iter().filter(|r| r.affects(gav)).count() as u64
}

/// Fills `own_vulns` and `dep_vulns`. Only direct third-party dependencies
/// contribute, each distinct GAV once.
pub fn annotate_vulnerabilities(instances: &mut [LibraryInstance], db: &[VulnRecord]) {
    let mut by_library: BTreeMap<&Coordinate, Vec<&VulnRecord>> = BTreeMap::new();
    for r in db {
        by_library.entry(&r.coordinate).or_default().push(r);
    }
    let count = |gav: &VersionedCoordinate| {
        by_library
            .get(&gav.coordinate)
            .map_or(0, |rs| rs.iter().filter(|r| r.affects(gav)).count() as u64)
    };

    for inst in instances.iter_mut() {
        inst.own_vulns = count(&inst.gav);
        let deps: BTreeSet<&VersionedCoordinate> = inst
            .direct_deps
            .iter()
            .filter(|d| classify_dependency_scope(&inst.gav, d) == DependencyScope::ThirdParty)
            .collect();
        inst.dep_vulns = deps.into_iter().map(|d| count(d)).sum();
    }
}
