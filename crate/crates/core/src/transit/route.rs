use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DomainError, TransitNetwork};

/// One ride along a single line.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub line: String,
    pub from: String,
    pub to: String,
}

impl Segment {
    pub fn new(line: impl Into<String>, from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            line: line.into(),
            from: from.into(),
            to: to.into(),
        }
    }
}

/// An ordered chain of segments. Serialized as a bare array of segments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Route {
    pub segments: Vec<Segment>,
}

impl Route {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    /// Segments minus one; zero for an empty route.
    pub fn transfer_count(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }

    pub fn origin(&self) -> Option<&str> {
        self.segments.first().map(|s| s.from.as_str())
    }

    pub fn destination(&self) -> Option<&str> {
        self.segments.last().map(|s| s.to.as_str())
    }

    pub fn line_sequence(&self) -> Vec<&str> {
        self.segments.iter().map(|s| s.line.as_str()).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RouteViolation {
    #[error("route has no segments")]
    Empty,
    #[error("segment {index}: unknown line `{line}`")]
    UnknownLine { index: usize, line: String },
    #[error("segment {index}: stop `{stop}` is not on line `{line}`")]
    OffLine { index: usize, line: String, stop: String },
    #[error("segment {index}: departure and arrival are both `{stop}`")]
    Stationary { index: usize, stop: String },
    #[error("segment {index} ends at `{to}` but segment {next} starts at `{from}`")]
    Broken {
        index: usize,
        next: usize,
        to: String,
        from: String,
    },
}

impl TransitNetwork {
    /// Check both route invariants: every segment rides a real line between
    /// two distinct stops of that line, and consecutive segments chain.
    pub fn check_route(&self, route: &Route) -> Result<(), RouteViolation> {
        if route.segments.is_empty() {
            return Err(RouteViolation::Empty);
        }
        for (index, seg) in route.segments.iter().enumerate() {
            let seq = self.line(&seg.line).ok_or_else(|| RouteViolation::UnknownLine {
                index,
                line: seg.line.clone(),
            })?;
            for stop in [&seg.from, &seg.to] {
                if !seq.contains(stop) {
                    return Err(RouteViolation::OffLine {
                        index,
                        line: seg.line.clone(),
                        stop: stop.clone(),
                    });
                }
            }
            if seg.from == seg.to {
                return Err(RouteViolation::Stationary {
                    index,
                    stop: seg.from.clone(),
                });
            }
        }
        for (index, pair) in route.segments.windows(2).enumerate() {
            if pair[0].to != pair[1].from {
                return Err(RouteViolation::Broken {
                    index,
                    next: index + 1,
                    to: pair[0].to.clone(),
                    from: pair[1].from.clone(),
                });
            }
        }
        Ok(())
    }

    /// Number of stop-to-stop hops travelled by a route. Assumes a valid route.
    pub fn route_hops(&self, route: &Route) -> usize {
        route
            .segments
            .iter()
            .filter_map(|s| self.intermediate_stop_count(&s.line, &s.from, &s.to).ok())
            .map(|between| between + 1)
            .sum()
    }

    /// Minimum-transfer route from `a` to `b`.
    ///
    /// Searches the line-expanded graph (node = position on a line) with key
    /// `(transfers, hops, line-name sequence)`, so ties on transfers go to the
    /// route with fewer hops and then to the lexicographically smallest line
    /// sequence. Returns `Ok(None)` when `b` is unreachable from `a`.
    pub fn min_transfer_route(&self, a: &str, b: &str) -> Result<Option<Route>, DomainError> {
        let start_lines = self.lines_through(a)?;
        self.lines_through(b)?;
        if a == b {
            return Err(DomainError::SameStop(a.to_owned()));
        }

        // Line indices follow name order, so comparing index sequences of
        // equal length compares line-name sequences lexicographically.
        let names: Vec<&str> = self.lines.keys().map(String::as_str).collect();
        let index_of: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let seqs: Vec<&[String]> = self.lines.values().map(Vec::as_slice).collect();

        type State = (usize, usize); // (line index, position)
        type Key = (usize, usize, Vec<usize>);

        let mut best: HashMap<State, Key> = HashMap::new();
        let mut pred: HashMap<State, State> = HashMap::new();
        let mut heap: BinaryHeap<Reverse<(Key, State)>> = BinaryHeap::new();

        for line in start_lines {
            let li = index_of[line.as_str()];
            let pos = seqs[li].iter().position(|s| s == a).expect("index is consistent");
            let key = (0, 0, vec![li]);
            best.insert((li, pos), key.clone());
            heap.push(Reverse((key, (li, pos))));
        }

        while let Some(Reverse((key, state))) = heap.pop() {
            if best.get(&state) != Some(&key) {
                continue;
            }
            let (li, pos) = state;
            let stop = &seqs[li][pos];
            if stop == b {
                return Ok(Some(self.unwind(state, &pred, &names, &seqs)));
            }
            let (transfers, hops, ref lines) = key;

            let mut relax = |next: State, next_key: Key, heap: &mut BinaryHeap<Reverse<(Key, State)>>| {
                if best.get(&next).is_none_or(|k| next_key < *k) {
                    best.insert(next, next_key.clone());
                    pred.insert(next, state);
                    heap.push(Reverse((next_key, next)));
                }
            };

            for next_pos in [pos.wrapping_sub(1), pos + 1] {
                if next_pos < seqs[li].len() {
                    relax((li, next_pos), (transfers, hops + 1, lines.clone()), &mut heap);
                }
            }
            for other in &self.stop_lines[stop] {
                let lj = index_of[other.as_str()];
                if lj == li {
                    continue;
                }
                let pj = seqs[lj].iter().position(|s| s == stop).expect("index is consistent");
                let mut next_lines = lines.clone();
                next_lines.push(lj);
                relax((lj, pj), (transfers + 1, hops, next_lines), &mut heap);
            }
        }
        Ok(None)
    }

    fn unwind(
        &self,
        goal: (usize, usize),
        pred: &HashMap<(usize, usize), (usize, usize)>,
        names: &[&str],
        seqs: &[&[String]],
    ) -> Route {
        let mut path = vec![goal];
        let mut cur = goal;
        while let Some(&p) = pred.get(&cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();

        let mut segments: Vec<Segment> = Vec::new();
        let mut board = path[0];
        for w in path.windows(2) {
            let (prev, next) = (w[0], w[1]);
            if prev.0 != next.0 {
                // transfer at prev's stop
                if board != prev {
                    segments.push(Segment::new(
                        names[prev.0],
                        &seqs[board.0][board.1],
                        &seqs[prev.0][prev.1],
                    ));
                }
                board = next;
            }
        }
        let last = *path.last().expect("path is non-empty");
        segments.push(Segment::new(
            names[last.0],
            &seqs[board.0][board.1],
            &seqs[last.0][last.1],
        ));
        Route::new(segments)
    }
}
