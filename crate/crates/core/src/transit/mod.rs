//! Transit network model and the ground-truth oracles every question and
//! every reward is derived from.
//!
//! A [`TransitNetwork`] is a set of named lines, each an ordered sequence of
//! stop names. Stops are shared between lines by exact name. The network is
//! immutable once validated, so all oracle queries take `&self`.

mod route;
mod synth;

pub use route::{Route, RouteViolation, Segment};
pub use synth::{generate_synthetic_network, DifficultyThresholds, NetworkSpec, SynthError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Three-level difficulty label shared by maps and questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }

    /// 0 for easy, 1 for medium, 2 for hard.
    pub fn rank(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("network has no lines")]
    NoLines,
    #[error("empty network id")]
    EmptyId,
    #[error("duplicate line name `{0}`")]
    DuplicateLine(String),
    #[error("empty line name")]
    EmptyLineName,
    #[error("line `{line}` has {len} stop(s); at least 2 are required")]
    ShortLine { line: String, len: usize },
    #[error("line `{line}` has an empty stop name")]
    EmptyStopName { line: String },
    #[error("stop `{stop}` repeats within line `{line}`")]
    RepeatedStop { line: String, stop: String },
}

/// Query against a stop or line the network does not have.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("unknown stop `{0}`")]
    UnknownStop(String),
    #[error("unknown line `{0}`")]
    UnknownLine(String),
    #[error("stop `{stop}` is not on line `{line}`")]
    StopNotOnLine { stop: String, line: String },
    #[error("origin and destination are the same stop `{0}`")]
    SameStop(String),
}

/// The on-disk form. Lines keep document order so duplicates can be reported.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    network_id: String,
    difficulty: Difficulty,
    lines: LineList,
}

#[derive(Debug, Clone, Default)]
struct LineList(Vec<(String, Vec<String>)>);

impl Serialize for LineList {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (name, stops) in &self.0 {
            map.serialize_entry(name, stops)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for LineList {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct LineVisitor;
        impl<'de> Visitor<'de> for LineVisitor {
            type Value = LineList;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping line names to stop lists")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<LineList, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, Vec<String>>()? {
                    out.push((k, v));
                }
                Ok(LineList(out))
            }
        }
        deserializer.deserialize_map(LineVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc", into = "NetworkDoc")]
pub struct TransitNetwork {
    network_id: String,
    difficulty: Difficulty,
    lines: BTreeMap<String, Vec<String>>,
    stop_lines: BTreeMap<String, BTreeSet<String>>,
}

impl TryFrom<NetworkDoc> for TransitNetwork {
    type Error = NetworkError;

    fn try_from(doc: NetworkDoc) -> Result<Self, NetworkError> {
        let mut builder = NetworkBuilder::new(doc.network_id, doc.difficulty);
        for (name, stops) in doc.lines.0 {
            builder = builder.line(name, stops);
        }
        builder.build()
    }
}

impl From<TransitNetwork> for NetworkDoc {
    fn from(net: TransitNetwork) -> Self {
        NetworkDoc {
            network_id: net.network_id,
            difficulty: net.difficulty,
            lines: LineList(net.lines.into_iter().collect()),
        }
    }
}

/// Accumulates lines in insertion order and validates on [`build`](Self::build).
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    network_id: String,
    difficulty: Difficulty,
    lines: Vec<(String, Vec<String>)>,
}

impl NetworkBuilder {
    pub fn new(network_id: impl Into<String>, difficulty: Difficulty) -> Self {
        Self {
            network_id: network_id.into(),
            difficulty,
            lines: Vec::new(),
        }
    }

    pub fn line<I, S>(mut self, name: impl Into<String>, stops: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.lines
            .push((name.into(), stops.into_iter().map(Into::into).collect()));
        self
    }

    pub fn build(self) -> Result<TransitNetwork, NetworkError> {
        if self.network_id.is_empty() {
            return Err(NetworkError::EmptyId);
        }
        if self.lines.is_empty() {
            return Err(NetworkError::NoLines);
        }
        let mut lines = BTreeMap::new();
        let mut stop_lines: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (name, stops) in self.lines {
            if name.is_empty() {
                return Err(NetworkError::EmptyLineName);
            }
            if lines.contains_key(&name) {
                return Err(NetworkError::DuplicateLine(name));
            }
            if stops.len() < 2 {
                return Err(NetworkError::ShortLine {
                    line: name,
                    len: stops.len(),
                });
            }
            let mut seen = BTreeSet::new();
            for stop in &stops {
                if stop.is_empty() {
                    return Err(NetworkError::EmptyStopName { line: name });
                }
                if !seen.insert(stop.as_str()) {
                    return Err(NetworkError::RepeatedStop {
                        line: name,
                        stop: stop.clone(),
                    });
                }
                stop_lines.entry(stop.clone()).or_default().insert(name.clone());
            }
            lines.insert(name, stops);
        }
        Ok(TransitNetwork {
            network_id: self.network_id,
            difficulty: self.difficulty,
            lines,
            stop_lines,
        })
    }
}

/// Parse and validate a Metro Data JSON document.
pub fn load_network(source: &str) -> Result<TransitNetwork, NetworkError> {
    let doc: NetworkDoc = serde_json::from_str(source).map_err(|e| NetworkError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    TransitNetwork::try_from(doc)
}

/// Serialize to the Metro Data JSON document (pretty-printed, trailing newline).
pub fn save_network(net: &TransitNetwork) -> String {
    let mut out = serde_json::to_string_pretty(net).expect("network serialization is infallible");
    out.push('\n');
    out
}

/// Networks keyed by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkRegistry {
    nets: BTreeMap<String, TransitNetwork>,
}

impl NetworkRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a network, returning the one it replaced.
    pub fn insert(&mut self, net: TransitNetwork) -> Option<TransitNetwork> {
        self.nets.insert(net.network_id.clone(), net)
    }

    pub fn get(&self, network_id: &str) -> Option<&TransitNetwork> {
        self.nets.get(network_id)
    }

    pub fn len(&self) -> usize {
        self.nets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TransitNetwork> {
        self.nets.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.nets.keys().map(String::as_str)
    }
}

impl FromIterator<TransitNetwork> for NetworkRegistry {
    fn from_iter<T: IntoIterator<Item = TransitNetwork>>(iter: T) -> Self {
        let mut reg = Self::new();
        for net in iter {
            reg.insert(net);
        }
        reg
    }
}

impl TransitNetwork {
    pub fn builder(network_id: impl Into<String>, difficulty: Difficulty) -> NetworkBuilder {
        NetworkBuilder::new(network_id, difficulty)
    }

    pub fn network_id(&self) -> &str {
        &self.network_id
    }

    pub fn difficulty(&self) -> Difficulty {
        self.difficulty
    }

    /// Lines in name order.
    pub fn lines(&self) -> &BTreeMap<String, Vec<String>> {
        &self.lines
    }

    pub fn line(&self, name: &str) -> Option<&[String]> {
        self.lines.get(name).map(Vec::as_slice)
    }

    pub fn line_names(&self) -> impl Iterator<Item = &str> {
        self.lines.keys().map(String::as_str)
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    /// All stops in name order.
    pub fn stops(&self) -> impl Iterator<Item = &str> {
        self.stop_lines.keys().map(String::as_str)
    }

    pub fn stop_count(&self) -> usize {
        self.stop_lines.len()
    }

    pub fn has_stop(&self, stop: &str) -> bool {
        self.stop_lines.contains_key(stop)
    }

    /// Stops served by two or more lines.
    pub fn transfer_stops(&self) -> impl Iterator<Item = &str> {
        self.stop_lines
            .iter()
            .filter(|(_, l)| l.len() >= 2)
            .map(|(s, _)| s.as_str())
    }

    fn position(&self, line: &str, stop: &str) -> Result<usize, DomainError> {
        let seq = self
            .lines
            .get(line)
            .ok_or_else(|| DomainError::UnknownLine(line.to_owned()))?;
        seq.iter()
            .position(|s| s == stop)
            .ok_or_else(|| DomainError::StopNotOnLine {
                stop: stop.to_owned(),
                line: line.to_owned(),
            })
    }

    /// Number of stops strictly between `a` and `b` along `line`.
    pub fn intermediate_stop_count(&self, line: &str, a: &str, b: &str) -> Result<usize, DomainError> {
        let pa = self.position(line, a)?;
        let pb = self.position(line, b)?;
        if pa == pb {
            return Err(DomainError::SameStop(a.to_owned()));
        }
        Ok(pa.abs_diff(pb) - 1)
    }

    /// The exact set of lines serving `stop`.
    pub fn lines_through(&self, stop: &str) -> Result<&BTreeSet<String>, DomainError> {
        self.stop_lines
            .get(stop)
            .ok_or_else(|| DomainError::UnknownStop(stop.to_owned()))
    }

    /// True iff some line serves both stops.
    pub fn share_line(&self, a: &str, b: &str) -> Result<bool, DomainError> {
        let la = self.lines_through(a)?;
        let lb = self.lines_through(b)?;
        Ok(!la.is_disjoint(lb))
    }

    /// True iff `line` exists and serves `stop`. Errors on unknown names.
    pub fn serves(&self, line: &str, stop: &str) -> Result<bool, DomainError> {
        if !self.lines.contains_key(line) {
            return Err(DomainError::UnknownLine(line.to_owned()));
        }
        Ok(self.lines_through(stop)?.contains(line))
    }
}
