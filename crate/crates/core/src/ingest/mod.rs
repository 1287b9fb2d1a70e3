//! Corpus manifests, vulnerability databases and the remote artifact fetcher.

mod fetch;
mod manifest;
mod vulndb;

pub use fetch::{count_sources_archive, repository_path, FetchError, FetchedArtifact, RemoteRepository};
pub use manifest::{
    load_corpus, load_corpus_with, Corpus, CorpusManifest, Exclusion, ExclusionReason, LoadOptions,
    ManifestDependency, ManifestEntry,
};
pub use vulndb::{annotate_vulnerabilities, load_vuln_db, parse_vuln_db, own_vuln_count, VulnRecord};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Coordinate, ParseError, VersionedCoordinate};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: std::path::PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("manifest entry `{gav}`: {source}")]
    Coordinate {
        gav: String,
        #[source]
        source: ParseError,
    },
    #[error("manifest entry `{gav}`: invalid timestamp `{value}`")]
    Timestamp { gav: String, value: String },
    #[error("manifest lists `{0}` more than once")]
    DuplicateEntry(String),
    #[error("vulnerability record `{id}`: {reason}")]
    VulnRecord { id: String, reason: String },
    #[error("vulnerability id `{0}` appears more than once")]
    DuplicateVulnId(String),
}

/// Whether a dependency belongs to the dependent's own project.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependencyScope {
    OwnProject,
    ThirdParty,
}

fn same_project(dependent: &Coordinate, dep: &Coordinate) -> bool {
    let (a, b) = (dependent.group.as_str(), dep.group.as_str());
    let extends = |long: &str, short: &str| {
        long.len() > short.len() && long.starts_with(short) && long.as_bytes()[short.len()] == b'.'
    };
    a == b || extends(b, a)
}

/// Own-project iff the groups are equal or the dependency's group is a dotted
/// extension of the dependent's (`org.x` depending on `org.x.plugins`).
pub fn classify_dependency_scope(
    dependent: &VersionedCoordinate,
    dep: &VersionedCoordinate,
) -> DependencyScope {
    if same_project(&dependent.coordinate, &dep.coordinate) {
        DependencyScope::OwnProject
    } else {
        DependencyScope::ThirdParty
    }
}
