//! Splitting a library's date-ordered releases into consecutive release
//! chains.
//!
//! Each library keeps a main chain. A release whose version is lower than the
//! main chain's latest release opens a branch keyed by the library and the
//! leading version token; later releases with the same key join that branch
//! regardless of version. Everything else extends the main chain.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Coordinate, LibraryInstance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("releases of {ga} are not in date order at {gav}")]
    Unsorted { ga: String, gav: String },
    #[error("release {gav} does not belong to library {ga}")]
    MixedLibraries { ga: String, gav: String },
}

/// How many leading version tokens identify a branch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKey {
    #[default]
    FirstToken,
    FirstTwoTokens,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReleaseChain {
    pub chain_id: String,
    pub instances: Vec<LibraryInstance>,
    /// Whole days between consecutive releases.
    pub intervals: Vec<u64>,
}

/// One consecutive pair `from -> to` of a chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReleasePair<'a> {
    pub from: &'a LibraryInstance,
    pub to: &'a LibraryInstance,
    pub rel_interval: u64,
    /// Interval of the preceding pair; `None` for the first pair of a chain.
    pub rel_interval_prev: Option<u64>,
}

impl ReleaseChain {
    fn new(chain_id: String, first: LibraryInstance) -> Self {
        Self { chain_id, instances: vec![first], intervals: Vec::new() }
    }

    fn push(&mut self, next: LibraryInstance) {
        let last = self.instances.last().expect("chains are never empty");
        self.intervals.push(days_between(last, &next));
        self.instances.push(next);
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn pairs(&self) -> Vec<ReleasePair<'_>> {
        self.instances
            .windows(2)
            .enumerate()
            .map(|(i, w)| ReleasePair {
                from: &w[0],
                to: &w[1],
                rel_interval: self.intervals[i],
                rel_interval_prev: i.checked_sub(1).map(|p| self.intervals[p]),
            })
            .collect()
    }
}

fn days_between(a: &LibraryInstance, b: &LibraryInstance) -> u64 {
    (b.released - a.released).num_days().max(0) as u64
}

/// Recomputes `intervals` from the release timestamps.
pub fn compute_release_intervals(chain: &mut ReleaseChain) {
    chain.intervals = chain
        .instances
        .windows(2)
        .map(|w| days_between(&w[0], &w[1]))
        .collect();
}

fn branch_id(ga: &Coordinate, inst: &LibraryInstance, key: BranchKey) -> String {
    let tokens = inst.gav.version.tokens();
    let take = match key {
        BranchKey::FirstToken => 1,
        BranchKey::FirstTwoTokens => 2,
    };
    let parts: Vec<String> = tokens.iter().take(take).map(ToString::to_string).collect();
    format!("{ga}#{}", parts.join("."))
}

fn date_order(a: &LibraryInstance, b: &LibraryInstance) -> Ordering {
    a.released
        .cmp(&b.released)
        .then_with(|| a.gav.version.precedence(&b.gav.version))
}

/// Splits the releases of one library. Input must be sorted by release time,
/// ties by version. The main chain comes first, branches follow in the order
/// they were opened.
pub fn split_release_chains(
    releases: &[LibraryInstance],
    key: BranchKey,
) -> Result<Vec<ReleaseChain>, ChainError> {
    let Some(first) = releases.first() else {
        return Ok(Vec::new());
    };
    let ga = &first.gav.coordinate;
    for pair in releases.windows(2) {
        if pair[1].gav.coordinate != *ga {
            return Err(ChainError::MixedLibraries { ga: ga.to_string(), gav: pair[1].gav.to_string() });
        }
        if date_order(&pair[0], &pair[1]) == Ordering::Greater {
            return Err(ChainError::Unsorted { ga: ga.to_string(), gav: pair[1].gav.to_string() });
        }
    }

    let mut main = ReleaseChain::new(ga.to_string(), first.clone());
    let mut branches: Vec<ReleaseChain> = Vec::new();
    let mut branch_index: BTreeMap<String, usize> = BTreeMap::new();

    for inst in &releases[1..] {
        let id = branch_id(ga, inst, key);
        if let Some(&i) = branch_index.get(&id) {
            branches[i].push(inst.clone());
            continue;
        }
        let tail = main.instances.last().expect("non-empty");
        if inst.gav.version.precedence(&tail.gav.version) == Ordering::Less {
            branch_index.insert(id.clone(), branches.len());
            branches.push(ReleaseChain::new(id, inst.clone()));
        } else {
            main.push(inst.clone());
        }
    }

    let mut chains = Vec::with_capacity(branches.len() + 1);
    chains.push(main);
    chains.extend(branches);
    Ok(chains)
}

/// Groups instances by library, orders each group by release time and splits
/// it into chains. Output is ordered by library.
pub fn split_corpus(instances: &[LibraryInstance], key: BranchKey) -> Result<Vec<ReleaseChain>, ChainError> {
    let mut by_library: BTreeMap<&Coordinate, Vec<LibraryInstance>> = BTreeMap::new();
    for inst in instances {
        by_library.entry(&inst.gav.coordinate).or_default().push(inst.clone());
    }
    let mut chains = Vec::new();
    for (_, mut releases) in by_library {
        releases.sort_by(|a, b| date_order(a, b).then_with(|| a.gav.version.cmp(&b.gav.version)));
        chains.extend(split_release_chains(&releases, key)?);
    }
    Ok(chains)
}
