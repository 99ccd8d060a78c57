use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Answer, QAItem, QaError, QuestionType, Split};

/// Partition items by network into `(train, test)`, tagging each item.
///
/// Returns [`QaError::EmptySplit`] when either side ends up empty; the
/// partition itself is still well defined, but an empty side is almost always
/// a mistake in the holdout list.
pub fn split_dataset(
    items: Vec<QAItem>,
    holdout_network_ids: &BTreeSet<String>,
) -> Result<(Vec<QAItem>, Vec<QAItem>), QaError> {
    let observed: BTreeSet<&str> = items.iter().map(|i| i.network_id.as_str()).collect();
    if let Some(missing) = holdout_network_ids.iter().find(|id| !observed.contains(id.as_str())) {
        return Err(QaError::UnknownHoldout(missing.clone()));
    }
    let (mut test, mut train): (Vec<QAItem>, Vec<QAItem>) = items
        .into_iter()
        .partition(|i| holdout_network_ids.contains(&i.network_id));
    for item in &mut train {
        item.split = Split::Train;
    }
    for item in &mut test {
        item.split = Split::Test;
    }
    if train.is_empty() {
        return Err(QaError::EmptySplit(Split::Train));
    }
    if test.is_empty() {
        return Err(QaError::EmptySplit(Split::Test));
    }
    Ok((train, test))
}

/// One JSON object per line, newline-terminated.
pub fn write_jsonl(items: &[QAItem]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("items serialize"));
        out.push('\n');
    }
    out
}

/// Parse a JSONL dataset; blank lines are skipped.
pub fn read_jsonl(text: &str) -> Result<Vec<QAItem>, QaError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| QaError::Dataset {
                line: n + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct YesNoCount {
    pub yes: usize,
    pub no: usize,
}

/// Dataset composition summary written next to generated splits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub total: usize,
    pub per_type: BTreeMap<QuestionType, usize>,
    pub yes_no: BTreeMap<QuestionType, YesNoCount>,
    pub map_difficulty: BTreeMap<String, usize>,
    pub question_difficulty: BTreeMap<String, usize>,
    pub per_network: BTreeMap<String, usize>,
}

impl BalanceReport {
    pub fn from_items(items: &[QAItem]) -> Self {
        let mut r = BalanceReport {
            total: items.len(),
            ..Default::default()
        };
        for item in items {
            *r.per_type.entry(item.qtype).or_default() += 1;
            *r.map_difficulty.entry(item.map_difficulty.to_string()).or_default() += 1;
            *r.question_difficulty
                .entry(item.question_difficulty.to_string())
                .or_default() += 1;
            *r.per_network.entry(item.network_id.clone()).or_default() += 1;
            if let Answer::Judgment(yes) = item.answer {
                let c = r.yes_no.entry(item.qtype).or_default();
                if yes {
                    c.yes += 1;
                } else {
                    c.no += 1;
                }
            }
        }
        r
    }

    /// Largest `|#yes - #no|` over the yes/no types.
    pub fn max_yes_no_gap(&self) -> usize {
        self.yes_no.values().map(|c| c.yes.abs_diff(c.no)).max().unwrap_or(0)
    }
}
