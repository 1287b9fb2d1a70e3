//! Comment- and blank-aware line counting over source trees.
//!
//! A line counts when at least one non-whitespace character lies outside
//! every comment. Code followed by a trailing comment counts as code. Block
//! comments do not nest: the first close delimiter ends the comment. The
//! scanner does not know about string literals.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::ingest::{classify_dependency_scope, DependencyScope};
use crate::model::{LibraryInstance, VersionedCoordinate};

#[derive(Debug, Error)]
pub enum LocError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("source directory {0} does not exist")]
    MissingDirectory(PathBuf),
    #[error("invalid language profile: {0}")]
    InvalidProfile(String),
    #[error("unresolved dependencies: {}", join(.0))]
    Unresolved(Vec<VersionedCoordinate>),
}

fn join(gavs: &[VersionedCoordinate]) -> String {
    gavs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDelimiter {
    pub open: String,
    pub close: String,
}

/// Which files are code and how comments look in them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageProfile {
    /// Extensions with or without the leading dot, matched case-sensitively.
    pub code_extensions: BTreeSet<String>,
    pub line_comment_prefixes: Vec<String>,
    pub block_comment_delimiters: Vec<BlockDelimiter>,
}

impl Default for LanguageProfile {
    fn default() -> Self {
        Self::java()
    }
}

impl LanguageProfile {
    pub fn java() -> Self {
        Self {
            code_extensions: [".java".to_string()].into_iter().collect(),
            line_comment_prefixes: vec!["//".into()],
            block_comment_delimiters: vec![BlockDelimiter {
                open: "/*".into(),
                close: "*/".into(),
            }],
        }
    }

    pub fn validate(&self) -> Result<(), LocError> {
        if self.code_extensions.is_empty() {
            return Err(LocError::InvalidProfile("no code extensions".into()));
        }
        if self.code_extensions.iter().any(|e| e.trim_start_matches('.').is_empty()) {
            return Err(LocError::InvalidProfile("empty code extension".into()));
        }
        if self.line_comment_prefixes.iter().any(String::is_empty) {
            return Err(LocError::InvalidProfile("empty line comment prefix".into()));
        }
        if self
            .block_comment_delimiters
            .iter()
            .any(|d| d.open.is_empty() || d.close.is_empty())
        {
            return Err(LocError::InvalidProfile("empty block comment delimiter".into()));
        }
        Ok(())
    }

    pub fn is_code_file(&self, path: &Path) -> bool {
        let Some(ext) = path.extension().and_then(|e| e.to_str()) else {
            return false;
        };
        self.code_extensions
            .iter()
            .any(|e| e.trim_start_matches('.') == ext)
    }
}

enum Marker<'p> {
    LineComment,
    BlockOpen { open_len: usize, close: &'p str },
}

/// Longest comment marker starting at the beginning of `rest`.
fn marker_at<'p>(profile: &'p LanguageProfile, rest: &str) -> Option<Marker<'p>> {
    let mut best: Option<(usize, Marker<'p>)> = None;
    for prefix in &profile.line_comment_prefixes {
        if rest.starts_with(prefix.as_str()) && best.as_ref().is_none_or(|(l, _)| prefix.len() > *l) {
            best = Some((prefix.len(), Marker::LineComment));
        }
    }
    for d in &profile.block_comment_delimiters {
        if rest.starts_with(d.open.as_str()) && best.as_ref().is_none_or(|(l, _)| d.open.len() > *l) {
            best = Some((
                d.open.len(),
                Marker::BlockOpen { open_len: d.open.len(), close: d.close.as_str() },
            ));
        }
    }
    best.map(|(_, m)| m)
}

/// Counts code lines in `text`.
pub fn count_text_loc(text: &str, profile: &LanguageProfile) -> u64 {
    let mut open_block: Option<&str> = None;
    let mut count = 0;

    for raw_line in text.lines() {
        let mut rest = raw_line;
        let mut has_code = false;

        while !rest.is_empty() {
            if let Some(close) = open_block {
                match rest.find(close) {
                    Some(idx) => {
                        rest = &rest[idx + close.len()..];
                        open_block = None;
                    }
                    None => break,
                }
                continue;
            }
            match marker_at(profile, rest) {
                Some(Marker::LineComment) => break,
                Some(Marker::BlockOpen { open_len, close }) => {
                    open_block = Some(close);
                    rest = &rest[open_len..];
                }
                None => {
                    let ch = rest.chars().next().expect("non-empty");
                    if !ch.is_whitespace() {
                        has_code = true;
                    }
                    rest = &rest[ch.len_utf8()..];
                }
            }
        }

        if has_code {
            count += 1;
        }
    }
    count
}

/// Counts code lines in one file. Invalid UTF-8 is replaced, not rejected.
pub fn count_file_loc(path: &Path, profile: &LanguageProfile) -> Result<u64, LocError> {
    let bytes = std::fs::read(path).map_err(|source| LocError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(count_text_loc(&String::from_utf8_lossy(&bytes), profile))
}

/// Per-file counts under `dir`, sorted by relative path. Symlinks are not
/// followed.
pub fn count_library_files(
    dir: &Path,
    profile: &LanguageProfile,
) -> Result<Vec<(PathBuf, u64)>, LocError> {
    if !dir.is_dir() {
        return Err(LocError::MissingDirectory(dir.to_path_buf()));
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).follow_links(false) {
        let entry = entry.map_err(|e| LocError::Io {
            path: e.path().map(Path::to_path_buf).unwrap_or_else(|| dir.to_path_buf()),
            source: e.into(),
        })?;
        if entry.file_type().is_file() && profile.is_code_file(entry.path()) {
            files.push(entry.into_path());
        }
    }
    files.sort();

    files
        .par_iter()
        .map(|path| {
            let loc = count_file_loc(path, profile)?;
            let rel = path.strip_prefix(dir).unwrap_or(path).to_path_buf();
            Ok((rel, loc))
        })
        .collect()
}

/// Own size of a library: the sum over all code files under `dir`.
pub fn count_library_loc(dir: &Path, profile: &LanguageProfile) -> Result<u64, LocError> {
    Ok(count_library_files(dir, profile)?.iter().map(|(_, n)| n).sum())
}

/// How dependency size is aggregated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepSizeMode {
    /// Third-party direct dependencies only.
    #[default]
    Direct,
    /// Experimental: every third-party library reachable through the
    /// dependency graph, each GAV counted once.
    Transitive,
}

#[derive(Debug, Clone, Default)]
struct SizedNode {
    own_loc: Option<u64>,
    deps: Vec<VersionedCoordinate>,
}

/// Measured own sizes and dependency lists for every known GAV.
#[derive(Debug, Clone, Default)]
pub struct SizeIndex {
    nodes: BTreeMap<VersionedCoordinate, SizedNode>,
}

impl SizeIndex {
    /// `own_loc` is `None` when the library could not be measured.
    pub fn insert(&mut self, gav: VersionedCoordinate, own_loc: Option<u64>, deps: Vec<VersionedCoordinate>) {
        self.nodes.insert(gav, SizedNode { own_loc, deps });
    }

    pub fn own_loc(&self, gav: &VersionedCoordinate) -> Option<u64> {
        self.nodes.get(gav).and_then(|n| n.own_loc)
    }

    pub fn deps(&self, gav: &VersionedCoordinate) -> Option<&[VersionedCoordinate]> {
        self.nodes.get(gav).map(|n| n.deps.as_slice())
    }
}

/// Size of an instance's third-party dependencies (`dep_loc`).
pub fn sum_direct_dep_loc(
    instance: &LibraryInstance,
    index: &SizeIndex,
    mode: DepSizeMode,
) -> Result<u64, LocError> {
    let root = &instance.gav;
    let third_party = |dep: &VersionedCoordinate| {
        dep != root && classify_dependency_scope(root, dep) == DependencyScope::ThirdParty
    };
    let mut missing = BTreeSet::new();
    let mut total = 0u64;

    match mode {
        DepSizeMode::Direct => {
            let deps: BTreeSet<&VersionedCoordinate> = instance.direct_deps.iter().collect();
            for dep in deps.into_iter().filter(|d| third_party(d)) {
                match index.own_loc(dep) {
                    Some(n) => total += n,
                    None => {
                        missing.insert(dep.clone());
                    }
                }
            }
        }
        DepSizeMode::Transitive => {
            let mut seen: BTreeSet<&VersionedCoordinate> = BTreeSet::new();
            let mut queue: VecDeque<&VersionedCoordinate> = instance.direct_deps.iter().collect();
            seen.insert(root);
            while let Some(dep) = queue.pop_front() {
                if !seen.insert(dep) {
                    continue;
                }
                if third_party(dep) {
                    match index.own_loc(dep) {
                        Some(n) => total += n,
                        None => {
                            missing.insert(dep.clone());
                        }
                    }
                }
                if let Some(next) = index.deps(dep) {
                    queue.extend(next.iter());
                }
            }
        }
    }

    if missing.is_empty() {
        Ok(total)
    } else {
        Err(LocError::Unresolved(missing.into_iter().collect()))
    }
}
