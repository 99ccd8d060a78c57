use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::policy::{Feature, Features, PolicyState, N_FEATURES};
use super::GrpoError;
use crate::answer::route_wire;
use crate::qa::{Choice, QAItem, QuestionType};
use crate::seed;
use crate::transit::{Segment, TransitNetwork};

/// How actions are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoding {
    /// Sample from the policy with a seeded generator.
    Sample(u64),
    /// Take the most probable action; ties go to the first candidate.
    Greedy,
}

/// One decision: the candidate feature rows and the index taken.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub actions: Vec<Features>,
    pub action: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    /// Raw answer text in the wire format the parsers accept.
    pub answer: String,
    /// Route construction hit the segment cap before reaching the destination.
    pub forced_stop: bool,
}

/// Count candidates offered for the free-form counting questions.
const LINE_COUNT_CANDIDATES: u64 = 8;
const GLOBAL_COUNT_CANDIDATES: u64 = 16;

fn pick(policy: &PolicyState, actions: &[Features], rng: Option<&mut impl Rng>) -> usize {
    let probs = policy.probs(actions);
    match rng {
        Some(rng) => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (i, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    return i;
                }
            }
            probs.len() - 1
        }
        None => {
            let mut best = 0;
            for (i, p) in probs.iter().enumerate() {
                if *p > probs[best] {
                    best = i;
                }
            }
            best
        }
    }
}

fn features(pairs: &[(Feature, f64)]) -> Features {
    let mut phi = [0.0; N_FEATURES];
    for (f, v) in pairs {
        phi[f.index()] += v;
    }
    phi
}

fn sign(b: bool) -> f64 {
    if b {
        1.0
    } else {
        -1.0
    }
}

fn stop_param<'a>(item: &'a QAItem, key: &str) -> Result<&'a str, GrpoError> {
    item.param(key).ok_or_else(|| GrpoError::Malformed {
        qa_id: item.qa_id.clone(),
        reason: format!("missing `{key}`"),
    })
}

fn closeness_rows(candidates: &[u64], truth: u64) -> Vec<Features> {
    candidates
        .iter()
        .map(|&v| features(&[(Feature::Closeness, -(v.abs_diff(truth) as f64))]))
        .collect()
}

/// Candidate answers and feature rows for a short-answer item.
fn plus_decision(item: &QAItem, net: &TransitNetwork) -> Result<(Vec<Features>, Vec<String>), GrpoError> {
    use crate::qa::slot;
    let yes_no = |bias: Feature, cue: Feature, truth: bool| {
        (
            vec![features(&[(bias, 1.0), (cue, sign(truth))]), [0.0; N_FEATURES]],
            vec!["yes".to_owned(), "no".to_owned()],
        )
    };
    Ok(match item.qtype {
        QuestionType::Torf1 => {
            let a = stop_param(item, slot::STOP_1)?;
            let b = stop_param(item, slot::STOP_2)?;
            yes_no(Feature::Torf1Bias, Feature::Share, net.share_line(a, b)?)
        }
        QuestionType::Torf2 => {
            let stop = stop_param(item, slot::STOP_1)?;
            let line = stop_param(item, slot::LINE_X)?;
            yes_no(Feature::Torf2Bias, Feature::Member, net.serves(line, stop)?)
        }
        QuestionType::LocalCount1 => {
            let a = stop_param(item, slot::STOP_1)?;
            let b = stop_param(item, slot::STOP_2)?;
            let shared = net
                .lines_through(a)?
                .intersection(net.lines_through(b)?)
                .next()
                .cloned();
            let line = shared.ok_or_else(|| GrpoError::Malformed {
                qa_id: item.qa_id.clone(),
                reason: format!("`{a}` and `{b}` share no line"),
            })?;
            let truth = net.intermediate_stop_count(&line, a, b)? as u64;
            let options: Vec<u64> = item
                .options
                .iter()
                .flatten()
                .map(|o| o.parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|_| GrpoError::Malformed {
                    qa_id: item.qa_id.clone(),
                    reason: "options are not counts".into(),
                })?;
            let letters = Choice::ALL
                .iter()
                .take(options.len())
                .map(|c| c.as_str().to_owned())
                .collect();
            (closeness_rows(&options, truth), letters)
        }
        QuestionType::LocalCount2 | QuestionType::GlobalCount => {
            let (truth, span) = if item.qtype == QuestionType::GlobalCount {
                (net.line_count() as u64, GLOBAL_COUNT_CANDIDATES)
            } else {
                (
                    net.lines_through(stop_param(item, slot::STOP_1)?)?.len() as u64,
                    LINE_COUNT_CANDIDATES,
                )
            };
            let candidates: Vec<u64> = (1..=span.max(truth)).collect();
            let labels = candidates.iter().map(u64::to_string).collect();
            (closeness_rows(&candidates, truth), labels)
        }
        QuestionType::Planning => unreachable!("planning items use route construction"),
    })
}

/// A ride on `line` to the given stop.
type Move = (String, String);

/// Candidate moves from `current`.
fn planning_moves(
    net: &TransitNetwork,
    current: &str,
    destination: &str,
    prev_line: Option<&str>,
    visited: &BTreeSet<String>,
) -> Result<(Vec<Features>, Vec<Move>), GrpoError> {
    let dest_lines = net.lines_through(destination)?;
    let mut rows = Vec::new();
    let mut moves = Vec::new();
    for line in net.lines_through(current)? {
        let serves_dest = dest_lines.contains(line);
        for to in net.line(line).unwrap_or_default() {
            if to == current {
                continue;
            }
            let to_lines = net.lines_through(to)?;
            let shares = to_lines.intersection(dest_lines).next().is_some();
            let flag = |b: bool| f64::from(u8::from(b));
            rows.push(features(&[
                (Feature::Member, sign(serves_dest)),
                (Feature::Share, sign(shares)),
                (Feature::Arrive, flag(to == destination)),
                (Feature::SameLine, flag(prev_line == Some(line.as_str()))),
                (Feature::Revisit, flag(visited.contains(to))),
                (Feature::Hub, flag(to_lines.len() > 1)),
            ]));
            moves.push((line.clone(), to.clone()));
        }
    }
    Ok((rows, moves))
}

/// Let the policy answer one item.
///
/// Planning items are answered by building a route one ride at a time from
/// the origin. Construction ends on reaching the destination or after
/// `max_segments` rides. Short-answer items take one categorical action.
pub fn rollout(
    policy: &PolicyState,
    item: &QAItem,
    net: &TransitNetwork,
    max_segments: usize,
    decoding: Decoding,
) -> Result<Trajectory, GrpoError> {
    if item.network_id != net.network_id() {
        return Err(GrpoError::UnknownNetwork(item.network_id.clone()));
    }
    let mut rng = match decoding {
        Decoding::Sample(s) => Some(seed::rng(s)),
        Decoding::Greedy => None,
    };
    if !item.qtype.is_planning() {
        let (actions, labels) = plus_decision(item, net)?;
        let action = pick(policy, &actions, rng.as_mut());
        return Ok(Trajectory {
            answer: format!("\\boxed{{{}}}", labels[action]),
            steps: vec![Step { actions, action }],
            forced_stop: false,
        });
    }

    let origin = stop_param(item, crate::qa::slot::STOP_1)?;
    let destination = stop_param(item, crate::qa::slot::STOP_2)?;
    let mut current = origin.to_owned();
    let mut visited: BTreeSet<String> = BTreeSet::from([current.clone()]);
    let mut prev_line: Option<String> = None;
    let mut steps = Vec::new();
    let mut segments = Vec::new();
    while segments.len() < max_segments && current != destination {
        let (actions, moves) = planning_moves(net, &current, destination, prev_line.as_deref(), &visited)?;
        if actions.is_empty() {
            break;
        }
        let action = pick(policy, &actions, rng.as_mut());
        let (line, to) = moves[action].clone();
        segments.push(Segment::new(line.clone(), current.clone(), to.clone()));
        steps.push(Step { actions, action });
        visited.insert(to.clone());
        prev_line = Some(line);
        current = to;
    }
    Ok(Trajectory {
        answer: route_wire(&segments),
        steps,
        forced_stop: current != destination,
    })
}
