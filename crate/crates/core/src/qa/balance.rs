use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;

use super::generate::{stop_line_pairs, stop_pairs, torf_1_item, torf_2_item};
use super::{slot, Answer, QAItem, QaError, QuestionType};
use crate::seed;
use crate::transit::NetworkRegistry;

/// Equalize yes/no answers within each yes/no question type.
///
/// Majority-answer items are replaced by freshly sampled questions from the
/// same network whose true answer is the minority one; answers are never
/// flipped. When a network runs out of minority candidates the remaining
/// surplus is dropped so that `|#yes - #no| <= 1` still holds. Other items
/// pass through untouched and relative order is preserved.
pub fn balance_yes_no(items: Vec<QAItem>, nets: &NetworkRegistry, seed: u64) -> Result<Vec<QAItem>, QaError> {
    let mut slots: Vec<Option<QAItem>> = items.into_iter().map(Some).collect();
    for qtype in [QuestionType::Torf1, QuestionType::Torf2] {
        balance_type(&mut slots, nets, qtype, seed::derive(seed, &[qtype as u64]))?;
    }
    Ok(slots.into_iter().flatten().collect())
}

fn judgment(item: &QAItem) -> bool {
    matches!(item.answer, Answer::Judgment(true))
}

/// Parameter key that identifies a yes/no question up to stop order.
fn param_key(item: &QAItem) -> (String, String) {
    let a = item.param(slot::STOP_1).unwrap_or_default().to_owned();
    let b = match item.qtype {
        QuestionType::Torf1 => item.param(slot::STOP_2),
        _ => item.param(slot::LINE_X),
    }
    .unwrap_or_default()
    .to_owned();
    if item.qtype == QuestionType::Torf1 && b < a {
        (b, a)
    } else {
        (a, b)
    }
}

fn balance_type(
    slots: &mut [Option<QAItem>],
    nets: &NetworkRegistry,
    qtype: QuestionType,
    seed: u64,
) -> Result<(), QaError> {
    let positions: Vec<usize> = slots
        .iter()
        .enumerate()
        .filter(|(_, s)| s.as_ref().is_some_and(|i| i.qtype == qtype))
        .map(|(p, _)| p)
        .collect();
    let yes = positions
        .iter()
        .filter(|&&p| judgment(slots[p].as_ref().expect("occupied")))
        .count();
    let no = positions.len() - yes;
    if yes.abs_diff(no) <= 1 {
        return Ok(());
    }
    let majority_answer = yes > no;
    let (majority, minority) = if majority_answer { (yes, no) } else { (no, yes) };
    let needed = (majority - minority) / 2;

    let mut used: BTreeMap<String, BTreeSet<(String, String)>> = BTreeMap::new();
    for &p in &positions {
        let item = slots[p].as_ref().expect("occupied");
        used.entry(item.network_id.clone()).or_default().insert(param_key(item));
    }

    let mut rng = seed::rng(seed);
    let mut majority_pos: Vec<usize> = positions
        .iter()
        .copied()
        .filter(|&p| judgment(slots[p].as_ref().expect("occupied")) == majority_answer)
        .collect();
    majority_pos.shuffle(&mut rng);

    // Per-network queue of unused minority-answer candidates, built lazily.
    let mut queues: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    let mut converted = 0;
    let mut untouched = Vec::new();
    for p in majority_pos {
        if converted == needed {
            untouched.push(p);
            continue;
        }
        let old = slots[p].as_ref().expect("occupied");
        let net = nets
            .get(&old.network_id)
            .ok_or_else(|| QaError::UnknownNetwork(old.network_id.clone()))?;
        let queue = match queues.get_mut(&old.network_id) {
            Some(q) => q,
            None => {
                let taken = used.get(&old.network_id);
                let mut cands: Vec<(String, String)> = Vec::new();
                let raw = match qtype {
                    QuestionType::Torf1 => stop_pairs(net),
                    _ => stop_line_pairs(net),
                };
                for (a, b) in raw {
                    let answer = match qtype {
                        QuestionType::Torf1 => net.share_line(a, b)?,
                        _ => net.serves(b, a)?,
                    };
                    let key = (a.to_owned(), b.to_owned());
                    if answer != majority_answer && !taken.is_some_and(|t| t.contains(&key)) {
                        cands.push(key);
                    }
                }
                let mut net_rng = seed::rng(seed::derive_str(seed, &old.network_id));
                cands.shuffle(&mut net_rng);
                queues.entry(old.network_id.clone()).or_insert(cands)
            }
        };
        let Some((a, b)) = queue.pop() else {
            untouched.push(p);
            continue;
        };
        let qa_id = old.qa_id.clone();
        let split = old.split;
        let mut fresh = match qtype {
            QuestionType::Torf1 => torf_1_item(net, qa_id, &a, &b)?,
            _ => torf_2_item(net, qa_id, &a, &b)?,
        };
        fresh.split = split;
        slots[p] = Some(fresh);
        converted += 1;
    }

    let minority_after = minority + converted;
    if minority_after == 0 {
        return Err(QaError::Balance {
            qtype,
            missing: if majority_answer { "no" } else { "yes" },
        });
    }
    let majority_after = majority - converted;
    let surplus = majority_after.saturating_sub(minority_after + 1);
    // drop from the back of the shuffled order
    for &p in untouched.iter().rev().take(surplus) {
        slots[p] = None;
    }
    Ok(())
}
