use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::templates::{render, template};
use super::{slot, Answer, Choice, QAItem, QaError, QuestionType, Split};
use crate::seed;
use crate::transit::{Difficulty, TransitNetwork};

/// Requested item counts per question type for one network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Quota {
    pub local_count_1: usize,
    pub local_count_2: usize,
    /// 0 or 1; a network has exactly one answer to "how many lines".
    pub global_count: usize,
    pub torf_1: usize,
    pub torf_2: usize,
    pub planning: usize,
}

impl Default for Quota {
    fn default() -> Self {
        Self {
            local_count_1: 6,
            local_count_2: 6,
            global_count: 1,
            torf_1: 6,
            torf_2: 6,
            planning: 6,
        }
    }
}

impl Quota {
    pub fn get(&self, qtype: QuestionType) -> usize {
        match qtype {
            QuestionType::LocalCount1 => self.local_count_1,
            QuestionType::LocalCount2 => self.local_count_2,
            QuestionType::GlobalCount => self.global_count,
            QuestionType::Torf1 => self.torf_1,
            QuestionType::Torf2 => self.torf_2,
            QuestionType::Planning => self.planning,
        }
    }
}

/// Four multiple-choice option values and the letter holding the true one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChoiceOptions {
    pub values: [u64; 4],
    pub correct: Choice,
}

/// Build four distinct options around `true_count`.
///
/// Distractors are three distinct values from `true ± {1, 2, 3}` restricted to
/// non-negative integers (the `+` side always supplies three). The correct
/// value lands on a uniformly chosen letter.
pub fn make_distractors(true_count: u64, seed: u64) -> ChoiceOptions {
    let mut rng = seed::rng(seed);
    let mut near: Vec<u64> = (1..=3u64)
        .flat_map(|d| [true_count.checked_sub(d), Some(true_count + d)])
        .flatten()
        .collect();
    near.shuffle(&mut rng);
    let correct = rng.gen_range(0..4);
    let mut distractors = near.into_iter().take(3);
    let mut values = [0u64; 4];
    for (i, v) in values.iter_mut().enumerate() {
        *v = if i == correct {
            true_count
        } else {
            distractors.next().expect("three distractors available")
        };
    }
    ChoiceOptions {
        values,
        correct: Choice::from_index(correct).expect("index below 4"),
    }
}

fn item_id(network_id: &str, qtype: QuestionType, n: usize) -> String {
    format!("{network_id}/{qtype}/{n:03}")
}

fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| ((*k).to_owned(), (*v).to_owned())).collect()
}

fn plus_item(
    net: &TransitNetwork,
    qa_id: String,
    qtype: QuestionType,
    params: BTreeMap<String, String>,
    options: Option<Vec<String>>,
    answer: Answer,
) -> QAItem {
    let question_text = render(template(qtype), &params, options.as_deref().unwrap_or(&[]));
    QAItem {
        qa_id,
        network_id: net.network_id().to_owned(),
        qtype,
        question_text,
        params,
        options,
        answer,
        map_difficulty: net.difficulty(),
        question_difficulty: net.difficulty(),
        transfer_count: 0,
        split: Split::Train,
    }
}

pub(crate) fn torf_1_item(net: &TransitNetwork, qa_id: String, a: &str, b: &str) -> Result<QAItem, QaError> {
    let answer = Answer::Judgment(net.share_line(a, b)?);
    let p = params(&[(slot::STOP_1, a), (slot::STOP_2, b)]);
    Ok(plus_item(net, qa_id, QuestionType::Torf1, p, None, answer))
}

pub(crate) fn torf_2_item(net: &TransitNetwork, qa_id: String, stop: &str, line: &str) -> Result<QAItem, QaError> {
    let answer = Answer::Judgment(net.serves(line, stop)?);
    let p = params(&[(slot::STOP_1, stop), (slot::LINE_X, line)]);
    Ok(plus_item(net, qa_id, QuestionType::Torf2, p, None, answer))
}

/// Unordered stop pairs, in name order.
pub(crate) fn stop_pairs(net: &TransitNetwork) -> Vec<(&str, &str)> {
    let stops: Vec<&str> = net.stops().collect();
    let mut out = Vec::new();
    for (i, a) in stops.iter().enumerate() {
        for b in &stops[i + 1..] {
            out.push((*a, *b));
        }
    }
    out
}

pub(crate) fn stop_line_pairs(net: &TransitNetwork) -> Vec<(&str, &str)> {
    net.stops()
        .flat_map(|s| net.line_names().map(move |l| (s, l)))
        .collect()
}

/// Same-line pairs whose shared line is unique, so the intermediate count is
/// unambiguous. Returns `(line, a, b)`.
fn same_line_pairs(net: &TransitNetwork) -> Vec<(&str, &str, &str)> {
    let mut out = Vec::new();
    for (line, seq) in net.lines() {
        for i in 0..seq.len() {
            for j in i + 1..seq.len() {
                let (a, b) = (seq[i].as_str(), seq[j].as_str());
                let la = net.lines_through(a).expect("stop on line");
                let lb = net.lines_through(b).expect("stop on line");
                if la.intersection(lb).count() == 1 {
                    out.push((line.as_str(), a, b));
                }
            }
        }
    }
    out
}

fn take<T: Clone>(
    mut pool: Vec<T>,
    n: usize,
    qtype: QuestionType,
    net: &TransitNetwork,
    rng: &mut impl Rng,
) -> Result<Vec<T>, QaError> {
    if pool.len() < n {
        return Err(QaError::Unsatisfiable {
            qtype,
            network_id: net.network_id().to_owned(),
            requested: n,
            available: pool.len(),
        });
    }
    pool.shuffle(rng);
    pool.truncate(n);
    Ok(pool)
}

/// Generate items for one network. Output is grouped by type in
/// [`QuestionType::ALL`] order and deterministic in `seed`.
pub fn generate(net: &TransitNetwork, seed: u64, quota: &Quota) -> Result<Vec<QAItem>, QaError> {
    if quota.global_count > 1 {
        return Err(QaError::GlobalQuota(quota.global_count));
    }
    let id = net.network_id();
    let mut items = Vec::new();
    for qtype in QuestionType::ALL {
        let n = quota.get(qtype);
        let type_seed = seed::derive(seed, &[qtype as u64]);
        let mut rng = seed::rng(type_seed);
        match qtype {
            QuestionType::LocalCount1 => {
                for (k, (line, a, b)) in take(same_line_pairs(net), n, qtype, net, &mut rng)?
                    .into_iter()
                    .enumerate()
                {
                    let (a, b) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                    let count = net.intermediate_stop_count(line, a, b)? as u64;
                    let opts = make_distractors(count, seed::derive(type_seed, &[k as u64]));
                    let options: Vec<String> = opts.values.iter().map(u64::to_string).collect();
                    items.push(plus_item(
                        net,
                        item_id(id, qtype, k),
                        qtype,
                        params(&[(slot::STOP_1, a), (slot::STOP_2, b)]),
                        Some(options),
                        Answer::Choice(opts.correct),
                    ));
                }
            }
            QuestionType::LocalCount2 => {
                let stops: Vec<&str> = net.stops().collect();
                for (k, stop) in take(stops, n, qtype, net, &mut rng)?.into_iter().enumerate() {
                    let count = net.lines_through(stop)?.len() as u64;
                    items.push(plus_item(
                        net,
                        item_id(id, qtype, k),
                        qtype,
                        params(&[(slot::STOP_1, stop)]),
                        None,
                        Answer::Count(count),
                    ));
                }
            }
            QuestionType::GlobalCount => {
                if n == 1 {
                    items.push(plus_item(
                        net,
                        item_id(id, qtype, 0),
                        qtype,
                        BTreeMap::new(),
                        None,
                        Answer::Count(net.line_count() as u64),
                    ));
                }
            }
            QuestionType::Torf1 => {
                for (k, (a, b)) in take(stop_pairs(net), n, qtype, net, &mut rng)?.into_iter().enumerate() {
                    let (a, b) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                    items.push(torf_1_item(net, item_id(id, qtype, k), a, b)?);
                }
            }
            QuestionType::Torf2 => {
                for (k, (stop, line)) in take(stop_line_pairs(net), n, qtype, net, &mut rng)?
                    .into_iter()
                    .enumerate()
                {
                    items.push(torf_2_item(net, item_id(id, qtype, k), stop, line)?);
                }
            }
            QuestionType::Planning => {
                items.extend(generate_planning(net, type_seed, n)?);
            }
        }
    }
    for item in &items {
        verify_item(net, item)?;
    }
    Ok(items)
}

/// Generate `count` planning questions over distinct connected ordered pairs.
///
/// The answer is the minimum-transfer route; question difficulty is easy for
/// direct routes and hard for anything needing a transfer.
pub fn generate_planning(net: &TransitNetwork, seed: u64, count: usize) -> Result<Vec<QAItem>, QaError> {
    let stops: Vec<&str> = net.stops().collect();
    let mut pairs: Vec<(&str, &str)> = stops
        .iter()
        .flat_map(|a| stops.iter().filter(move |b| *b != a).map(move |b| (*a, *b)))
        .collect();
    let mut rng = seed::rng(seed);
    pairs.shuffle(&mut rng);

    let mut items = Vec::with_capacity(count);
    for (a, b) in pairs {
        if items.len() == count {
            break;
        }
        let qa_id = item_id(net.network_id(), QuestionType::Planning, items.len());
        if let Some(item) = planning_item(net, qa_id, a, b)? {
            items.push(item);
        }
    }
    if items.len() < count {
        return Err(QaError::Unsatisfiable {
            qtype: QuestionType::Planning,
            network_id: net.network_id().to_owned(),
            requested: count,
            available: items.len(),
        });
    }
    Ok(items)
}

/// A planning question from `a` to `b`, or `None` if they are disconnected.
pub fn planning_item(net: &TransitNetwork, qa_id: String, a: &str, b: &str) -> Result<Option<QAItem>, QaError> {
    let Some(route) = net.min_transfer_route(a, b)? else {
        return Ok(None);
    };
    let transfer_count = route.transfer_count();
    let question_difficulty = if transfer_count == 0 {
        Difficulty::Easy
    } else {
        Difficulty::Hard
    };
    let p = params(&[(slot::STOP_1, a), (slot::STOP_2, b)]);
    let item = QAItem {
        qa_id,
        network_id: net.network_id().to_owned(),
        qtype: QuestionType::Planning,
        question_text: render(template(QuestionType::Planning), &p, &[]),
        params: p,
        options: None,
        answer: Answer::Route(route),
        map_difficulty: net.difficulty(),
        question_difficulty,
        transfer_count,
        split: Split::Train,
    };
    verify_item(net, &item)?;
    Ok(Some(item))
}

/// Re-derive an item's answer and labels from the network oracles.
pub fn verify_item(net: &TransitNetwork, item: &QAItem) -> Result<(), QaError> {
    let fail = |reason: String| QaError::Mismatch {
        qa_id: item.qa_id.clone(),
        reason,
    };
    if item.network_id != net.network_id() {
        return Err(fail(format!("item belongs to `{}`", item.network_id)));
    }
    if item.map_difficulty != net.difficulty() {
        return Err(fail("map difficulty differs from the network label".into()));
    }
    let stop_1 = || item.param(slot::STOP_1).ok_or_else(|| fail("missing `stop 1`".into()));
    let stop_2 = || item.param(slot::STOP_2).ok_or_else(|| fail("missing `stop 2`".into()));
    let expected_text = render(
        template(item.qtype),
        &item.params,
        item.options.as_deref().unwrap_or(&[]),
    );
    if expected_text != item.question_text {
        return Err(fail("question text does not match its template".into()));
    }
    if !item.qtype.is_planning() && (item.question_difficulty != item.map_difficulty || item.transfer_count != 0) {
        return Err(fail("non-planning labels must mirror the map".into()));
    }
    let expected = match item.qtype {
        QuestionType::LocalCount1 => {
            let (a, b) = (stop_1()?, stop_2()?);
            let la = net.lines_through(a)?;
            let lb = net.lines_through(b)?;
            let shared: Vec<&String> = la.intersection(lb).collect();
            let [line] = shared.as_slice() else {
                return Err(fail(format!("stops share {} lines", shared.len())));
            };
            let count = net.intermediate_stop_count(line, a, b)? as u64;
            let options = item.options.as_ref().ok_or_else(|| fail("missing options".into()))?;
            let values: Vec<u64> = options
                .iter()
                .map(|o| {
                    o.parse::<u64>()
                        .map_err(|_| fail(format!("option `{o}` is not a count")))
                })
                .collect::<Result<_, _>>()?;
            if values.len() != 4 {
                return Err(fail(format!("{} options", values.len())));
            }
            let hits: Vec<usize> = (0..4).filter(|&i| values[i] == count).collect();
            let [hit] = hits.as_slice() else {
                return Err(fail(format!("{} options equal the true count", hits.len())));
            };
            Answer::Choice(Choice::from_index(*hit).expect("index below 4"))
        }
        QuestionType::LocalCount2 => Answer::Count(net.lines_through(stop_1()?)?.len() as u64),
        QuestionType::GlobalCount => Answer::Count(net.line_count() as u64),
        QuestionType::Torf1 => Answer::Judgment(net.share_line(stop_1()?, stop_2()?)?),
        QuestionType::Torf2 => {
            let line = item
                .param(slot::LINE_X)
                .ok_or_else(|| fail("missing `line x`".into()))?;
            Answer::Judgment(net.serves(line, stop_1()?)?)
        }
        QuestionType::Planning => {
            let route = net
                .min_transfer_route(stop_1()?, stop_2()?)?
                .ok_or_else(|| fail("endpoints are disconnected".into()))?;
            net.check_route(&route).map_err(|v| fail(v.to_string()))?;
            if item.transfer_count != route.transfer_count() {
                return Err(fail("transfer count differs from the oracle route".into()));
            }
            let bucket = if route.transfer_count() == 0 {
                Difficulty::Easy
            } else {
                Difficulty::Hard
            };
            if item.question_difficulty != bucket {
                return Err(fail("question difficulty does not follow the transfer count".into()));
            }
            Answer::Route(route)
        }
    };
    if expected != item.answer {
        return Err(fail(format!(
            "answer {:?} but oracle gives {:?}",
            item.answer, expected
        )));
    }
    Ok(())
}
