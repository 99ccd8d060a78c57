//! Difficulty-aware composite reward.
//!
//! `total = (w_map + w_question) * (r_format + r_correct + alpha * r_detail)`
//!
//! Short-answer items are scored by exact match. Planning items are scored
//! by route validity and by the partial-credit detail score in [`detail`].

mod detail;
mod metrics;

pub use detail::detail_reward;
pub use metrics::{weighted_accuracy, weighted_map_score, EvalWeights};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::answer::{format_reward, parse_boxed, parse_route, ParsedAnswer};
use crate::qa::{QAItem, QuestionType};
use crate::transit::{Difficulty, Route, Segment, TransitNetwork};

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("item `{qa_id}` is `{got}`, operation needs {expected}")]
    QuestionType {
        qa_id: String,
        got: QuestionType,
        expected: &'static str,
    },
    #[error("item `{qa_id}` refers to network `{expected}` but `{got}` was supplied")]
    WrongNetwork {
        qa_id: String,
        expected: String,
        got: String,
    },
    #[error("unknown network `{0}`")]
    UnknownNetwork(String),
    #[error("planning item `{0}` has no ground-truth route")]
    MissingRoute(String),
    #[error("invalid reward config: {0}")]
    InvalidConfig(String),
    #[error("no results to aggregate")]
    Empty,
}

/// Weights of the composite reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    /// Detail weight. Zero disables the detail term.
    pub alpha: f64,
    pub gamma_easy: f64,
    pub gamma_medium: f64,
    pub gamma_hard: f64,
    /// Question weight for routes without transfers (and all short-answer items).
    pub beta_0: f64,
    /// Question weight for routes with one or more transfers.
    pub beta_1: f64,
    pub detail_cap: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            gamma_easy: 0.5,
            gamma_medium: 0.75,
            gamma_hard: 1.0,
            beta_0: 0.25,
            beta_1: 0.5,
            detail_cap: 10.0,
        }
    }
}

impl RewardConfig {
    /// Format plus correctness at unit weight: no detail term, `W = 1`.
    pub fn baseline() -> Self {
        Self {
            alpha: 0.0,
            gamma_easy: 1.0,
            gamma_medium: 1.0,
            gamma_hard: 1.0,
            beta_0: 0.0,
            beta_1: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), RewardError> {
        let finite = [
            self.alpha,
            self.gamma_easy,
            self.gamma_medium,
            self.gamma_hard,
            self.beta_0,
            self.beta_1,
            self.detail_cap,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(RewardError::InvalidConfig("all weights must be finite".into()));
        }
        if self.alpha < 0.0 {
            return Err(RewardError::InvalidConfig(format!("alpha {} < 0", self.alpha)));
        }
        if [self.gamma_easy, self.gamma_medium, self.gamma_hard]
            .iter()
            .any(|&g| g <= 0.0)
        {
            return Err(RewardError::InvalidConfig("map weights must be positive".into()));
        }
        if self.beta_0 < 0.0 || self.beta_1 < 0.0 {
            return Err(RewardError::InvalidConfig(
                "question weights must be non-negative".into(),
            ));
        }
        if self.detail_cap <= 0.0 {
            return Err(RewardError::InvalidConfig("detail cap must be positive".into()));
        }
        Ok(())
    }

    pub fn gamma(&self, d: Difficulty) -> f64 {
        match d {
            Difficulty::Easy => self.gamma_easy,
            Difficulty::Medium => self.gamma_medium,
            Difficulty::Hard => self.gamma_hard,
        }
    }

    /// Multiply every map and question weight by `c`.
    pub fn scale_weights(&self, c: f64) -> Self {
        Self {
            gamma_easy: self.gamma_easy * c,
            gamma_medium: self.gamma_medium * c,
            gamma_hard: self.gamma_hard * c,
            beta_0: self.beta_0 * c,
            beta_1: self.beta_1 * c,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_format: f64,
    pub r_correct: f64,
    pub r_detail: f64,
    pub w_map: f64,
    pub w_question: f64,
    pub w_difficulty: f64,
    pub total: f64,
}

fn require(item: &QAItem, planning: bool) -> Result<(), RewardError> {
    if item.qtype.is_planning() != planning {
        return Err(RewardError::QuestionType {
            qa_id: item.qa_id.clone(),
            got: item.qtype,
            expected: if planning { "planning" } else { "a short-answer type" },
        });
    }
    Ok(())
}

fn require_network(item: &QAItem, net: &TransitNetwork) -> Result<(), RewardError> {
    if item.network_id != net.network_id() {
        return Err(RewardError::WrongNetwork {
            qa_id: item.qa_id.clone(),
            expected: item.network_id.clone(),
            got: net.network_id().to_owned(),
        });
    }
    Ok(())
}

/// Exact match of the normalized boxed answer.
pub fn correctness_plus(item: &QAItem, p: &ParsedAnswer) -> Result<f64, RewardError> {
    require(item, false)?;
    let truth = item.answer.canonical_scalar();
    Ok(match (&p.scalar_value, truth) {
        (Some(got), Some(want)) if p.format_ok && *got == want => 1.0,
        _ => 0.0,
    })
}

/// Whitespace-collapsed, lowercased form used when matching answer names.
pub(crate) fn canon(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn resolve<'a>(raw: &str, mut names: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    let key = canon(raw);
    let mut hit = None;
    for n in names.by_ref() {
        if n == raw {
            return Some(n);
        }
        if canon(n) == key {
            if hit.is_some() {
                return None;
            }
            hit = Some(n);
        }
    }
    hit
}

pub(crate) fn resolve_stop<'a>(net: &'a TransitNetwork, raw: &str) -> Option<&'a str> {
    if net.has_stop(raw) {
        return net.stops().find(|s| *s == raw);
    }
    resolve(raw, net.stops())
}

fn resolve_line<'a>(net: &'a TransitNetwork, raw: &str) -> Option<&'a str> {
    resolve(raw, net.line_names())
}

/// Map a parsed route onto network names; `None` if any name is unknown.
pub fn resolve_route(net: &TransitNetwork, segments: &[Segment]) -> Option<Route> {
    segments
        .iter()
        .map(|s| {
            Some(Segment::new(
                resolve_line(net, &s.line)?,
                resolve_stop(net, &s.from)?,
                resolve_stop(net, &s.to)?,
            ))
        })
        .collect::<Option<Vec<_>>>()
        .map(Route::new)
}

/// 1.0 iff the parsed route is valid on `net` and runs from the question's
/// origin to its destination. Optimality is not required.
pub fn correctness_planning(item: &QAItem, p: &ParsedAnswer, net: &TransitNetwork) -> Result<f64, RewardError> {
    require(item, true)?;
    require_network(item, net)?;
    let Some(answer) = p.route_value.as_ref().filter(|_| p.format_ok) else {
        return Ok(0.0);
    };
    let Some(route) = resolve_route(net, &answer.segments) else {
        return Ok(0.0);
    };
    let ok =
        net.check_route(&route).is_ok() && route.origin() == item.origin() && route.destination() == item.destination();
    Ok(if ok { 1.0 } else { 0.0 })
}

/// `(w_map, w_question)` for an item.
pub fn difficulty_weight(item: &QAItem, cfg: &RewardConfig) -> (f64, f64) {
    let w_map = cfg.gamma(item.map_difficulty);
    let w_question = if item.qtype.is_planning() && item.transfer_count >= 1 {
        cfg.beta_1
    } else {
        cfg.beta_0
    };
    (w_map, w_question)
}

pub fn compose(
    r_format: f64,
    r_correct: f64,
    r_detail: f64,
    weights: (f64, f64),
    cfg: &RewardConfig,
) -> RewardBreakdown {
    let (w_map, w_question) = weights;
    let w_difficulty = w_map + w_question;
    RewardBreakdown {
        r_format,
        r_correct,
        r_detail,
        w_map,
        w_question,
        w_difficulty,
        total: w_difficulty * (r_format + r_correct + cfg.alpha * r_detail),
    }
}

/// Parse a raw answer with the parser matching the item type.
pub fn parse_for(item: &QAItem, raw: &str) -> ParsedAnswer {
    if item.qtype.is_planning() {
        parse_route(raw)
    } else {
        parse_boxed(raw)
    }
}

/// Full reward for a parsed answer. The detail term is zero for short-answer items.
pub fn score_parsed(
    item: &QAItem,
    p: &ParsedAnswer,
    net: &TransitNetwork,
    cfg: &RewardConfig,
) -> Result<RewardBreakdown, RewardError> {
    let r_format = format_reward(p);
    let (r_correct, r_detail) = if item.qtype.is_planning() {
        (correctness_planning(item, p, net)?, detail_reward(item, p, net, cfg)?)
    } else {
        require_network(item, net)?;
        (correctness_plus(item, p)?, 0.0)
    };
    Ok(compose(
        r_format,
        r_correct,
        r_detail,
        difficulty_weight(item, cfg),
        cfg,
    ))
}

pub fn score_answer(
    item: &QAItem,
    raw: &str,
    net: &TransitNetwork,
    cfg: &RewardConfig,
) -> Result<RewardBreakdown, RewardError> {
    score_parsed(item, &parse_for(item, raw), net, cfg)
}

/// Labels recorded in every report that uses the substitute planning metrics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstituteFlags {
    pub planning_correctness: String,
    pub map_score: String,
}

impl Default for SubstituteFlags {
    fn default() -> Self {
        Self {
            planning_correctness:
                "substitute: route valid on the network with correct endpoints; optimality not required".into(),
            map_score: "substitute: difficulty-weighted mean of the capped detail score".into(),
        }
    }
}
