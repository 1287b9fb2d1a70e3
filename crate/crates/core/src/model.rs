//! Library identities, version tokens and version ranges.
//!
//! Versions are compared with a simplified Maven-style order: tokens are
//! compared pairwise, numbers numerically, a qualifier sorts before any number,
//! two qualifiers compare lexicographically and the shorter token list is
//! padded with numeric zeros.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("coordinate `{text}` must have 2 or 3 colon-separated segments, found {found}")]
    SegmentCount { text: String, found: usize },
    #[error("coordinate `{text}` has an empty {segment} segment")]
    EmptySegment { text: String, segment: &'static str },
    #[error("version `{0}` contains no tokens")]
    EmptyVersion(String),
    #[error("numeric token `{0}` does not fit in 64 bits")]
    NumericOverflow(String),
    #[error("malformed version range `{text}`: {reason}")]
    Range { text: String, reason: String },
}

/// A library identity, `group:artifact`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coordinate {
    pub group: String,
    pub artifact: String,
}

impl Coordinate {
    pub fn new(group: impl Into<String>, artifact: impl Into<String>) -> Result<Self, ParseError> {
        let (group, artifact) = (group.into(), artifact.into());
        let text = format!("{group}:{artifact}");
        if group.is_empty() {
            return Err(ParseError::EmptySegment { text, segment: "group" });
        }
        if artifact.is_empty() {
            return Err(ParseError::EmptySegment { text, segment: "artifact" });
        }
        Ok(Self { group, artifact })
    }
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.group, self.artifact)
    }
}

impl FromStr for Coordinate {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_coordinate(s)? {
            ParsedCoordinate::Library(c) => Ok(c),
            ParsedCoordinate::Instance(_) => Err(ParseError::SegmentCount {
                text: s.to_string(),
                found: 3,
            }),
        }
    }
}

/// One token of a version string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VersionToken {
    Numeric(u64),
    Qualifier(String),
}

impl fmt::Display for VersionToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VersionToken::Numeric(n) => write!(f, "{n}"),
            VersionToken::Qualifier(q) => f.write_str(q),
        }
    }
}

/// Splits a version string on `.`, `-`, `_` and on digit/non-digit
/// boundaries. Digit runs become numeric tokens, everything else a
/// lowercased qualifier.
pub fn tokenize_version(text: &str) -> Result<Vec<VersionToken>, ParseError> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut current_digits = false;

    let flush = |buf: &mut String, digits: bool, out: &mut Vec<VersionToken>| {
        if buf.is_empty() {
            return Ok(());
        }
        let tok = if digits {
            VersionToken::Numeric(
                buf.parse::<u64>()
                    .map_err(|_| ParseError::NumericOverflow(buf.clone()))?,
            )
        } else {
            VersionToken::Qualifier(buf.to_lowercase())
        };
        out.push(tok);
        buf.clear();
        Ok(())
    };

    for ch in text.chars() {
        if matches!(ch, '.' | '-' | '_') {
            flush(&mut current, current_digits, &mut tokens)?;
            continue;
        }
        let is_digit = ch.is_ascii_digit();
        if !current.is_empty() && is_digit != current_digits {
            flush(&mut current, current_digits, &mut tokens)?;
        }
        current_digits = is_digit;
        current.push(ch);
    }
    flush(&mut current, current_digits, &mut tokens)?;

    if tokens.is_empty() {
        return Err(ParseError::EmptyVersion(text.to_string()));
    }
    Ok(tokens)
}

fn compare_tokens(a: &VersionToken, b: &VersionToken) -> Ordering {
    use VersionToken::*;
    match (a, b) {
        (Numeric(x), Numeric(y)) => x.cmp(y),
        (Qualifier(_), Numeric(_)) => Ordering::Less,
        (Numeric(_), Qualifier(_)) => Ordering::Greater,
        (Qualifier(x), Qualifier(y)) => x.cmp(y),
    }
}

/// Total order on token lists; missing trailing tokens count as numeric zero.
pub fn compare_versions(a: &[VersionToken], b: &[VersionToken]) -> Ordering {
    const ZERO: VersionToken = VersionToken::Numeric(0);
    let len = a.len().max(b.len());
    for i in 0..len {
        let x = a.get(i).unwrap_or(&ZERO);
        let y = b.get(i).unwrap_or(&ZERO);
        match compare_tokens(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// A version string together with its tokens.
///
/// `Eq`/`Hash` follow the literal text so that `1.2` and `1.2.0` remain
/// distinct instances. `Ord` sorts by [`compare_versions`] first and falls
/// back to the text, which keeps it consistent with `Eq`. Use
/// [`Version::precedence`] when only the semantic order matters.
#[derive(Debug, Clone)]
pub struct Version {
    raw: String,
    tokens: Vec<VersionToken>,
}

impl Version {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(Self {
            raw: text.to_string(),
            tokens: tokenize_version(text)?,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[VersionToken] {
        &self.tokens
    }

    pub fn precedence(&self, other: &Version) -> Ordering {
        compare_versions(&self.tokens, &other.tokens)
    }
}

impl PartialEq for Version {
    fn eq(&self, other: &Self) -> bool {
        self.raw == other.raw
    }
}

impl Eq for Version {}

impl std::hash::Hash for Version {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.raw.hash(state);
    }
}

impl Ord for Version {
    fn cmp(&self, other: &Self) -> Ordering {
        self.precedence(other).then_with(|| self.raw.cmp(&other.raw))
    }
}

impl PartialOrd for Version {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl FromStr for Version {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Version::parse(s)
    }
}

/// A library instance identity, `group:artifact:version`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VersionedCoordinate {
    pub coordinate: Coordinate,
    pub version: Version,
}

impl VersionedCoordinate {
    pub fn group(&self) -> &str {
        &self.coordinate.group
    }

    pub fn artifact(&self) -> &str {
        &self.coordinate.artifact
    }
}

impl fmt::Display for VersionedCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.coordinate, self.version)
    }
}

impl FromStr for VersionedCoordinate {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_coordinate(s)? {
            ParsedCoordinate::Instance(gav) => Ok(gav),
            ParsedCoordinate::Library(_) => Err(ParseError::SegmentCount {
                text: s.to_string(),
                found: 2,
            }),
        }
    }
}

impl Serialize for VersionedCoordinate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VersionedCoordinate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Result of [`parse_coordinate`]: a bare library or a versioned instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedCoordinate {
    Library(Coordinate),
    Instance(VersionedCoordinate),
}

impl ParsedCoordinate {
    pub fn coordinate(&self) -> &Coordinate {
        match self {
            ParsedCoordinate::Library(c) => c,
            ParsedCoordinate::Instance(gav) => &gav.coordinate,
        }
    }

    pub fn version(&self) -> Option<&Version> {
        match self {
            ParsedCoordinate::Library(_) => None,
            ParsedCoordinate::Instance(gav) => Some(&gav.version),
        }
    }
}

pub fn parse_coordinate(text: &str) -> Result<ParsedCoordinate, ParseError> {
    let segments: Vec<&str> = text.split(':').collect();
    if !(2..=3).contains(&segments.len()) {
        return Err(ParseError::SegmentCount {
            text: text.to_string(),
            found: segments.len(),
        });
    }
    const NAMES: [&str; 3] = ["group", "artifact", "version"];
    for (seg, name) in segments.iter().zip(NAMES) {
        if seg.is_empty() {
            return Err(ParseError::EmptySegment {
                text: text.to_string(),
                segment: name,
            });
        }
    }
    let coordinate = Coordinate::new(segments[0], segments[1])?;
    match segments.get(2) {
        None => Ok(ParsedCoordinate::Library(coordinate)),
        Some(v) => Ok(ParsedCoordinate::Instance(VersionedCoordinate {
            coordinate,
            version: Version::parse(v)?,
        })),
    }
}

/// One released version of a library with its measured sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryInstance {
    pub gav: VersionedCoordinate,
    pub released: DateTime<Utc>,
    pub own_loc: u64,
    pub direct_deps: Vec<VersionedCoordinate>,
    pub dep_loc: u64,
    pub own_vulns: u64,
    pub dep_vulns: u64,
}

impl LibraryInstance {
    pub fn is_vuln(&self) -> bool {
        self.own_vulns + self.dep_vulns > 0
    }

    pub fn total_vulns(&self) -> u64 {
        self.own_vulns + self.dep_vulns
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub version: Version,
    pub inclusive: bool,
}

/// An interval of versions, either side optionally unbounded.
///
/// Text syntax: `[1.0,2.0)`, `(,1.5]`, `[2.0,)` and `[1.2.3]` for an exact
/// version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionRange {
    pub lower: Option<Bound>,
    pub upper: Option<Bound>,
}

impl VersionRange {
    pub fn exact(version: Version) -> Self {
        Self {
            lower: Some(Bound { version: version.clone(), inclusive: true }),
            upper: Some(Bound { version, inclusive: true }),
        }
    }

    pub fn contains(&self, v: &Version) -> bool {
        let above_lower = match &self.lower {
            None => true,
            Some(b) => match v.precedence(&b.version) {
                Ordering::Greater => true,
                Ordering::Equal => b.inclusive,
                Ordering::Less => false,
            },
        };
        let below_upper = match &self.upper {
            None => true,
            Some(b) => match v.precedence(&b.version) {
                Ordering::Less => true,
                Ordering::Equal => b.inclusive,
                Ordering::Greater => false,
            },
        };
        above_lower && below_upper
    }
}

pub fn range_contains(range: &VersionRange, v: &Version) -> bool {
    range.contains(v)
}

impl FromStr for VersionRange {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| ParseError::Range {
            text: s.to_string(),
            reason: reason.to_string(),
        };
        let t = s.trim();
        let mut chars = t.chars();
        let open = chars.next().ok_or_else(|| err("empty range"))?;
        let close = chars.next_back().ok_or_else(|| err("missing closing bracket"))?;
        let lower_inclusive = match open {
            '[' => true,
            '(' => false,
            _ => return Err(err("must start with '[' or '('")),
        };
        let upper_inclusive = match close {
            ']' => true,
            ')' => false,
            _ => return Err(err("must end with ']' or ')'")),
        };
        let body = chars.as_str();
        let parse_version =
            |v: &str| Version::parse(v.trim()).map_err(|e| err(&e.to_string()));

        let parts: Vec<&str> = body.split(',').collect();
        match parts.as_slice() {
            [single] => {
                if !(lower_inclusive && upper_inclusive) {
                    return Err(err("an exact version must use '[v]'"));
                }
                if single.trim().is_empty() {
                    return Err(err("empty exact version"));
                }
                Ok(VersionRange::exact(parse_version(single)?))
            }
            [lo, hi] => {
                let lower = if lo.trim().is_empty() {
                    None
                } else {
                    Some(Bound { version: parse_version(lo)?, inclusive: lower_inclusive })
                };
                let upper = if hi.trim().is_empty() {
                    None
                } else {
                    Some(Bound { version: parse_version(hi)?, inclusive: upper_inclusive })
                };
                if let (Some(l), Some(u)) = (&lower, &upper) {
                    if l.version.precedence(&u.version) == Ordering::Greater {
                        return Err(err("lower bound exceeds upper bound"));
                    }
                }
                Ok(VersionRange { lower, upper })
            }
            _ => Err(err("too many commas")),
        }
    }
}

impl fmt::Display for VersionRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(l), Some(u)) = (&self.lower, &self.upper) {
            if l.inclusive && u.inclusive && l.version == u.version {
                return write!(f, "[{}]", l.version);
            }
        }
        let (open, lo) = match &self.lower {
            Some(b) => (if b.inclusive { '[' } else { '(' }, b.version.to_string()),
            None => ('(', String::new()),
        };
        let (close, hi) = match &self.upper {
            Some(b) => (if b.inclusive { ']' } else { ')' }, b.version.to_string()),
            None => (')', String::new()),
        };
        write!(f, "{open}{lo},{hi}{close}")
    }
}
