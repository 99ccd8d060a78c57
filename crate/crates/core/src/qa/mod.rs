//! Question–answer generation over transit networks.
//!
//! Five short-answer question types probe map reading (two local counts, one
//! global count, two yes/no judgments); planning questions ask for a full
//! route. Every answer comes from the transit oracles and is re-derived
//! before an item is emitted.

mod balance;
mod dataset;
mod generate;
pub mod templates;

pub use balance::balance_yes_no;
pub use dataset::{read_jsonl, split_dataset, write_jsonl, BalanceReport, YesNoCount};
pub use generate::{generate, generate_planning, make_distractors, planning_item, verify_item, ChoiceOptions, Quota};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transit::{Difficulty, DomainError, Route};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuestionType {
    #[serde(rename = "local_count_1")]
    LocalCount1,
    #[serde(rename = "local_count_2")]
    LocalCount2,
    #[serde(rename = "global_count")]
    GlobalCount,
    #[serde(rename = "torf_1")]
    Torf1,
    #[serde(rename = "torf_2")]
    Torf2,
    #[serde(rename = "planning")]
    Planning,
}

impl QuestionType {
    pub const ALL: [QuestionType; 6] = [
        QuestionType::LocalCount1,
        QuestionType::LocalCount2,
        QuestionType::GlobalCount,
        QuestionType::Torf1,
        QuestionType::Torf2,
        QuestionType::Planning,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::LocalCount1 => "local_count_1",
            QuestionType::LocalCount2 => "local_count_2",
            QuestionType::GlobalCount => "global_count",
            QuestionType::Torf1 => "torf_1",
            QuestionType::Torf2 => "torf_2",
            QuestionType::Planning => "planning",
        }
    }

    pub fn is_torf(self) -> bool {
        matches!(self, QuestionType::Torf1 | QuestionType::Torf2)
    }

    pub fn is_counting(self) -> bool {
        matches!(
            self,
            QuestionType::LocalCount1 | QuestionType::LocalCount2 | QuestionType::GlobalCount
        )
    }

    pub fn is_planning(self) -> bool {
        self == QuestionType::Planning
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        QuestionType::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| format!("unknown question type `{s}`"))
    }
}

/// Multiple-choice letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Choice {
    A,
    B,
    C,
    D,
}

impl Choice {
    pub const ALL: [Choice; 4] = [Choice::A, Choice::B, Choice::C, Choice::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Choice> {
        Choice::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        ["A", "B", "C", "D"][self.index()]
    }

    pub fn parse(s: &str) -> Option<Choice> {
        Choice::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

/// The canonical answer of an item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AnswerRepr", into = "AnswerRepr")]
pub enum Answer {
    Choice(Choice),
    Count(u64),
    /// `true` is "yes".
    Judgment(bool),
    Route(Route),
}

impl Answer {
    /// Normalized scalar form compared against parsed answers; `None` for routes.
    pub fn canonical_scalar(&self) -> Option<String> {
        match self {
            Answer::Choice(c) => Some(c.as_str().to_owned()),
            Answer::Count(n) => Some(n.to_string()),
            Answer::Judgment(true) => Some("yes".into()),
            Answer::Judgment(false) => Some("no".into()),
            Answer::Route(_) => None,
        }
    }

    pub fn as_route(&self) -> Option<&Route> {
        match self {
            Answer::Route(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AnswerRepr {
    Count(u64),
    Text(String),
    Route(Route),
}

impl TryFrom<AnswerRepr> for Answer {
    type Error = String;

    fn try_from(r: AnswerRepr) -> Result<Self, String> {
        match r {
            AnswerRepr::Count(n) => Ok(Answer::Count(n)),
            AnswerRepr::Route(route) => Ok(Answer::Route(route)),
            AnswerRepr::Text(t) => match t.as_str() {
                "yes" => Ok(Answer::Judgment(true)),
                "no" => Ok(Answer::Judgment(false)),
                other => Choice::parse(other)
                    .map(Answer::Choice)
                    .ok_or_else(|| format!("unrecognized answer `{other}`")),
            },
        }
    }
}

impl From<Answer> for AnswerRepr {
    fn from(a: Answer) -> Self {
        match a {
            Answer::Count(n) => AnswerRepr::Count(n),
            Answer::Route(r) => AnswerRepr::Route(r),
            other => AnswerRepr::Text(other.canonical_scalar().expect("scalar answer")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// Template slot keys used in [`QAItem::params`].
pub mod slot {
    pub const STOP_1: &str = "stop 1";
    pub const STOP_2: &str = "stop 2";
    pub const LINE_X: &str = "line x";
}

/// One generated question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAItem {
    pub qa_id: String,
    pub network_id: String,
    pub qtype: QuestionType,
    pub question_text: String,
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<String>>,
    pub answer: Answer,
    pub map_difficulty: Difficulty,
    pub question_difficulty: Difficulty,
    #[serde(default)]
    pub transfer_count: usize,
    #[serde(default)]
    pub split: Split,
}

impl QAItem {
    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    /// Planning origin, from the `stop 1` slot.
    pub fn origin(&self) -> Option<&str> {
        self.param(slot::STOP_1)
    }

    /// Planning destination, from the `stop 2` slot.
    pub fn destination(&self) -> Option<&str> {
        self.param(slot::STOP_2)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum QaError {
    #[error("cannot generate {requested} `{qtype}` item(s) for network `{network_id}`: only {available} candidate(s)")]
    Unsatisfiable {
        qtype: QuestionType,
        network_id: String,
        requested: usize,
        available: usize,
    },
    #[error("`global_count` quota must be 0 or 1 per network, got {0}")]
    GlobalQuota(usize),
    #[error("cannot balance `{qtype}`: no `{missing}` candidates remain")]
    Balance { qtype: QuestionType, missing: &'static str },
    #[error("holdout network `{0}` does not appear in the items")]
    UnknownHoldout(String),
    #[error("{0} split is empty")]
    EmptySplit(Split),
    #[error("item `{qa_id}` failed verification: {reason}")]
    Mismatch { qa_id: String, reason: String },
    #[error("unknown network `{0}`")]
    UnknownNetwork(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("dataset line {line}: {message}")]
    Dataset { line: usize, message: String },
}
