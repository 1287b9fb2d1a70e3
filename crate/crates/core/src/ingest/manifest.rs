use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fetch::{count_sources_archive, RemoteRepository};
use super::IngestError;
use crate::loc::{self, DepSizeMode, LanguageProfile, LocError, SizeIndex};
use crate::model::{LibraryInstance, VersionedCoordinate};

/// On-disk corpus description.
///
/// `libraries` are the instances under analysis. `externals` are dependency
/// targets that are not analysed themselves but whose size is needed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    pub libraries: Vec<ManifestEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub externals: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub gav: String,
    /// ISO-8601; required for `libraries`, ignored for `externals`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub released: Option<String>,
    /// Source tree, relative to the manifest's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub own_loc: Option<u64>,
    #[serde(default)]
    pub direct_deps: Vec<ManifestDependency>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestDependency {
    pub gav: String,
    /// Build-tool scope (`compile`, `test`, ...), carried through verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ExclusionReason {
    BelowMinLoc { own_loc: u64, min: u64 },
    NoSource,
    MeasurementFailed { message: String },
    UnresolvedDependencies { missing: Vec<String> },
}

impl ExclusionReason {
    pub fn code(&self) -> &'static str {
        match self {
            ExclusionReason::BelowMinLoc { .. } => "below_min_loc",
            ExclusionReason::NoSource => "no_source",
            ExclusionReason::MeasurementFailed { .. } => "measurement_failed",
            ExclusionReason::UnresolvedDependencies { .. } => "unresolved_dependencies",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            ExclusionReason::BelowMinLoc { own_loc, min } => format!("own_loc {own_loc} < {min}"),
            ExclusionReason::NoSource => "neither source_path nor own_loc given".into(),
            ExclusionReason::MeasurementFailed { message } => message.clone(),
            ExclusionReason::UnresolvedDependencies { missing } => missing.join(" "),
        }
    }
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code(), self.detail())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Exclusion {
    pub gav: VersionedCoordinate,
    #[serde(flatten)]
    pub reason: ExclusionReason,
}

/// A resolved corpus: kept instances sorted by GAV plus the exclusion report.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub instances: Vec<LibraryInstance>,
    pub exclusions: Vec<Exclusion>,
    pub sizes: SizeIndex,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub profile: LanguageProfile,
    pub min_own_loc: u64,
    pub dep_mode: DepSizeMode,
    /// Used for entries that carry neither `source_path` nor `own_loc`.
    pub remote: Option<RemoteRepository>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            profile: LanguageProfile::java(),
            min_own_loc: 100,
            dep_mode: DepSizeMode::Direct,
            remote: None,
        }
    }
}

pub fn load_corpus(manifest_path: &Path) -> Result<Corpus, IngestError> {
    load_corpus_with(manifest_path, &LoadOptions::default())
}

fn parse_timestamp(text: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(text, fmt) {
            return Some(t.and_utc());
        }
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .ok()
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc())
}

struct ParsedEntry<'m> {
    gav: VersionedCoordinate,
    released: Option<DateTime<Utc>>,
    deps: Vec<VersionedCoordinate>,
    raw: &'m ManifestEntry,
}

fn parse_entry(raw: &ManifestEntry, needs_release: bool) -> Result<ParsedEntry<'_>, IngestError> {
    let gav: VersionedCoordinate = raw.gav.parse().map_err(|source| IngestError::Coordinate {
        gav: raw.gav.clone(),
        source,
    })?;
    let released = match (&raw.released, needs_release) {
        (Some(text), _) => Some(parse_timestamp(text).ok_or_else(|| IngestError::Timestamp {
            gav: raw.gav.clone(),
            value: text.clone(),
        })?),
        (None, true) => {
            return Err(IngestError::Timestamp {
                gav: raw.gav.clone(),
                value: String::new(),
            })
        }
        (None, false) => None,
    };
    let deps: BTreeSet<VersionedCoordinate> = raw
        .direct_deps
        .iter()
        .map(|d| {
            d.gav.parse().map_err(|source| IngestError::Coordinate {
                gav: d.gav.clone(),
                source,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(ParsedEntry {
        gav,
        released,
        deps: deps.into_iter().collect(),
        raw,
    })
}

fn measure(entry: &ParsedEntry<'_>, base: &Path, options: &LoadOptions) -> Result<u64, ExclusionReason> {
    let failed = |e: &dyn fmt::Display| ExclusionReason::MeasurementFailed { message: e.to_string() };
    if let Some(n) = entry.raw.own_loc {
        return Ok(n);
    }
    if let Some(rel) = &entry.raw.source_path {
        return loc::count_library_loc(&base.join(rel), &options.profile).map_err(|e| failed(&e));
    }
    if let Some(remote) = &options.remote {
        let fetched = remote.fetch(&entry.gav).map_err(|e| failed(&e))?;
        return count_sources_archive(&fetched.sources, &options.profile).map_err(|e| failed(&e));
    }
    Err(ExclusionReason::NoSource)
}

/// Loads and measures a corpus. Measurement runs on the current rayon pool;
/// the result does not depend on the number of workers.
pub fn load_corpus_with(manifest_path: &Path, options: &LoadOptions) -> Result<Corpus, IngestError> {
    let text = std::fs::read_to_string(manifest_path).map_err(|source| IngestError::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let manifest: CorpusManifest = serde_json::from_str(&text).map_err(|source| IngestError::Json {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    resolve_manifest(&manifest, base, options)
}

pub(crate) fn resolve_manifest(
    manifest: &CorpusManifest,
    base: &Path,
    options: &LoadOptions,
) -> Result<Corpus, IngestError> {
    let libraries = manifest
        .libraries
        .iter()
        .map(|e| parse_entry(e, true))
        .collect::<Result<Vec<_>, _>>()?;
    let externals = manifest
        .externals
        .iter()
        .map(|e| parse_entry(e, false))
        .collect::<Result<Vec<_>, _>>()?;

    let mut seen = BTreeSet::new();
    for e in libraries.iter().chain(&externals) {
        if !seen.insert(&e.gav) {
            return Err(IngestError::DuplicateEntry(e.gav.to_string()));
        }
    }

    let all: Vec<&ParsedEntry<'_>> = libraries.iter().chain(&externals).collect();
    let measured: Vec<Result<u64, ExclusionReason>> =
        all.par_iter().map(|e| measure(e, base, options)).collect();

    let mut sizes = SizeIndex::default();
    for (entry, size) in all.iter().zip(&measured) {
        sizes.insert(entry.gav.clone(), size.as_ref().ok().copied(), entry.deps.clone());
    }

    let mut instances = Vec::new();
    let mut exclusions = Vec::new();
    for (entry, size) in libraries.iter().zip(&measured) {
        let exclude = |reason| Exclusion { gav: entry.gav.clone(), reason };
        let own_loc = match size {
            Ok(n) => *n,
            Err(reason) => {
                log::warn!("excluding {}: {reason}", entry.gav);
                exclusions.push(exclude(reason.clone()));
                continue;
            }
        };
        if own_loc < options.min_own_loc {
            exclusions.push(exclude(ExclusionReason::BelowMinLoc { own_loc, min: options.min_own_loc }));
            continue;
        }
        let mut instance = LibraryInstance {
            gav: entry.gav.clone(),
            released: entry.released.expect("libraries carry a release time"),
            own_loc,
            direct_deps: entry.deps.clone(),
            dep_loc: 0,
            own_vulns: 0,
            dep_vulns: 0,
        };
        match loc::sum_direct_dep_loc(&instance, &sizes, options.dep_mode) {
            Ok(n) => instance.dep_loc = n,
            Err(LocError::Unresolved(missing)) => {
                let reason = ExclusionReason::UnresolvedDependencies {
                    missing: missing.iter().map(ToString::to_string).collect(),
                };
                log::warn!("excluding {}: {reason}", entry.gav);
                exclusions.push(exclude(reason));
                continue;
            }
            Err(e) => {
                exclusions.push(exclude(ExclusionReason::MeasurementFailed { message: e.to_string() }));
                continue;
            }
        }
        instances.push(instance);
    }

    instances.sort_by(|a, b| a.gav.cmp(&b.gav));
    exclusions.sort();
    Ok(Corpus { instances, exclusions, sizes })
}
