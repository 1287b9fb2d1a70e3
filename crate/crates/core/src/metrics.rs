//! Technical leverage and the polar description of how a library changes
//! between two consecutive releases.
//!
//! The change velocity vector is `(Δdep, Δown)`: the change in third-party
//! dependency size and in own size, in lines. Its length is the change
//! distance `rho` and its angle the change direction `theta`, reported in
//! degrees within `(-45, 315]`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains::ReleaseChain;
use crate::model::{LibraryInstance, VersionedCoordinate};

/// Libraries above this many own lines are `Large`.
pub const DEFAULT_SIZE_THRESHOLD: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("leverage is undefined for a library without own code")]
    UndefinedLeverage,
}

/// `(l_dir + l_trans + l_std) / l_own`.
pub fn technical_leverage(l_dir: u64, l_trans: u64, l_std: u64, l_own: u64) -> Result<f64, MetricsError> {
    if l_own == 0 {
        return Err(MetricsError::UndefinedLeverage);
    }
    Ok((l_dir + l_trans + l_std) as f64 / l_own as f64)
}

/// Leverage restricted to direct third-party dependencies.
pub fn direct_leverage(l_dir: u64, l_own: u64) -> Result<f64, MetricsError> {
    technical_leverage(l_dir, 0, 0, l_own)
}

/// `(Δdep, Δown)` between two releases.
pub fn change_velocity(r0: &LibraryInstance, r1: &LibraryInstance) -> (i64, i64) {
    (
        r1.dep_loc as i64 - r0.dep_loc as i64,
        r1.own_loc as i64 - r0.own_loc as i64,
    )
}

pub fn change_distance(delta_dep: i64, delta_own: i64) -> f64 {
    (delta_dep as f64).hypot(delta_own as f64)
}

/// Maps any angle in degrees into `(-45, 315]`.
pub fn normalize_degrees(theta: f64) -> f64 {
    let mut t = theta % 360.0;
    if t <= -45.0 {
        t += 360.0;
    } else if t > 315.0 {
        t -= 360.0;
    }
    t
}

/// `arccos(Δdep / rho)`, negated unless `Δown > 0`, in degrees and
/// normalized into `(-45, 315]`. Zero when both deltas are zero.
///
/// Evaluated with `atan2`, which is the same angle but keeps full precision
/// when the vector is nearly parallel to an axis. Axis and diagonal
/// directions are returned exactly.
pub fn change_direction(delta_dep: i64, delta_own: i64) -> f64 {
    if delta_dep == 0 && delta_own == 0 {
        return 0.0;
    }
    let raw = match (delta_dep.signum(), delta_own.signum()) {
        (1, 0) => 0.0,
        (0, 1) => 90.0,
        (-1, 0) => 180.0,
        (0, -1) => -90.0,
        (sd, so) if delta_dep.unsigned_abs() == delta_own.unsigned_abs() => match (sd, so) {
            (1, 1) => 45.0,
            (-1, 1) => 135.0,
            (-1, -1) => -135.0,
            _ => -45.0,
        },
        _ => (delta_own as f64).atan2(delta_dep as f64).to_degrees(),
    };
    normalize_degrees(raw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeClass {
    SmallMedium,
    Large,
}

impl SizeClass {
    pub const ALL: [SizeClass; 2] = [SizeClass::SmallMedium, SizeClass::Large];

    pub fn of(own_loc: u64, threshold: u64) -> Self {
        if own_loc <= threshold {
            SizeClass::SmallMedium
        } else {
            SizeClass::Large
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SizeClass::SmallMedium => "small_medium",
            SizeClass::Large => "large",
        }
    }
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SizeClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "small_medium" => Ok(SizeClass::SmallMedium),
            "large" => Ok(SizeClass::Large),
            other => Err(format!("unknown size class `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimaryDirection {
    DependencyAdopting,
    OwnIncreasing,
    DependencyRemoving,
    OwnRemoving,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    DependencyDominant,
    OwnDominant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TotalTrend {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionClass {
    pub primary_direction: PrimaryDirection,
    pub dominance: Dominance,
    pub total_trend: TotalTrend,
}

/// Half-width of the band around 0°, 90°, 180° and 270° that counts as a
/// pure direction.
pub const PRIMARY_TOLERANCE_DEG: f64 = 10.0;

pub fn classify_direction(theta: f64) -> DirectionClass {
    let t = normalize_degrees(theta);
    // Dependency-dominant on (315;45] and (135;225], i.e. (-45;45] here.
    let dominance = if t <= 45.0 || (t > 135.0 && t <= 225.0) {
        Dominance::DependencyDominant
    } else {
        Dominance::OwnDominant
    };
    let total_trend = if t <= 135.0 { TotalTrend::Increasing } else { TotalTrend::Decreasing };

    let axes = [
        (0.0, PrimaryDirection::DependencyAdopting),
        (90.0, PrimaryDirection::OwnIncreasing),
        (180.0, PrimaryDirection::DependencyRemoving),
        (270.0, PrimaryDirection::OwnRemoving),
    ];
    let primary_direction = axes
        .iter()
        .find(|(axis, _)| {
            let d = (t - axis).rem_euclid(360.0);
            d.min(360.0 - d) <= PRIMARY_TOLERANCE_DEG
        })
        .map_or(PrimaryDirection::Mixed, |(_, p)| *p);

    DirectionClass { primary_direction, dominance, total_trend }
}

/// Measurement for one consecutive release pair. Leverage, size class and
/// vulnerability state belong to the newer release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeRecord {
    pub chain_id: String,
    pub gav_from: VersionedCoordinate,
    pub gav_to: VersionedCoordinate,
    pub delta_dep: i64,
    pub delta_own: i64,
    pub rho: f64,
    pub theta: f64,
    pub lambda_dir: f64,
    pub rel_interval: u64,
    /// `None` for the first pair of a chain.
    pub rel_interval_prev: Option<u64>,
    pub size_class: SizeClass,
    pub is_vuln: bool,
    /// Own plus dependency vulnerabilities of the newer release.
    pub vulns: u64,
    pub own_loc: u64,
    pub dep_loc: u64,
}

pub fn build_change_records(chains: &[ReleaseChain], size_threshold: u64) -> Vec<ChangeRecord> {
    let mut records = Vec::new();
    for chain in chains {
        for pair in chain.pairs() {
            let (delta_dep, delta_own) = change_velocity(pair.from, pair.to);
            let to = pair.to;
            records.push(ChangeRecord {
                chain_id: chain.chain_id.clone(),
                gav_from: pair.from.gav.clone(),
                gav_to: to.gav.clone(),
                delta_dep,
                delta_own,
                rho: change_distance(delta_dep, delta_own),
                theta: change_direction(delta_dep, delta_own),
                // Corpus instances have own_loc >= 1 after filtering; a zero
                // here would only come from a hand-built chain.
                lambda_dir: direct_leverage(to.dep_loc, to.own_loc).unwrap_or(f64::NAN),
                rel_interval: pair.rel_interval,
                rel_interval_prev: pair.rel_interval_prev,
                size_class: SizeClass::of(to.own_loc, size_threshold),
                is_vuln: to.is_vuln(),
                vulns: to.total_vulns(),
                own_loc: to.own_loc,
                dep_loc: to.dep_loc,
            });
        }
    }
    records
}
