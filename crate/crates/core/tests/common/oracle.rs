//! Brute-force reference computations that read only the raw line lists.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rewardmap_core::qa::{Answer, QAItem, QuestionType};
use rewardmap_core::transit::{Segment, TransitNetwork};

pub type Lines = BTreeMap<String, Vec<String>>;

pub fn on_line(lines: &Lines, line: &str, stop: &str) -> bool {
    lines.get(line).is_some_and(|s| s.iter().any(|x| x == stop))
}

pub fn lines_of(lines: &Lines, stop: &str) -> Vec<String> {
    lines
        .iter()
        .filter(|(_, s)| s.contains(&stop.to_owned()))
        .map(|(l, _)| l.clone())
        .collect()
}

/// Fewest transfers from `a` to `b`, by breadth-first search over lines.
pub fn min_transfers(lines: &Lines, a: &str, b: &str) -> Option<usize> {
    let start = lines_of(lines, a);
    let goal: BTreeSet<String> = lines_of(lines, b).into_iter().collect();
    let mut dist: BTreeMap<String, usize> = start.iter().map(|l| (l.clone(), 0)).collect();
    let mut queue: VecDeque<String> = start.into_iter().collect();
    while let Some(l) = queue.pop_front() {
        let d = dist[&l];
        if goal.contains(&l) {
            return Some(d);
        }
        for stop in &lines[&l] {
            for next in lines_of(lines, stop) {
                if !dist.contains_key(&next) {
                    dist.insert(next.clone(), d + 1);
                    queue.push_back(next);
                }
            }
        }
    }
    None
}

/// A route is valid when every segment rides a real line between two
/// distinct stops on it and consecutive segments chain.
pub fn route_is_valid(lines: &Lines, segments: &[Segment], a: &str, b: &str) -> bool {
    if segments.is_empty() || segments[0].from != a || segments.last().unwrap().to != b {
        return false;
    }
    segments
        .iter()
        .all(|s| s.from != s.to && on_line(lines, &s.line, &s.from) && on_line(lines, &s.line, &s.to))
        && segments.windows(2).all(|w| w[0].to == w[1].from)
}

fn position(lines: &Lines, line: &str, stop: &str) -> usize {
    lines[line].iter().position(|s| s == stop).unwrap()
}

/// Recompute an item's answer from scratch; `Err` names the disagreement.
pub fn check_item(net: &TransitNetwork, item: &QAItem) -> Result<(), String> {
    let lines = net.lines();
    let p = |k: &str| {
        item.params
            .get(k)
            .cloned()
            .ok_or(format!("{}: missing {k}", item.qa_id))
    };
    let expect = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(format!("{}: {what}", item.qa_id))
        }
    };
    match (item.qtype, &item.answer) {
        (QuestionType::Torf1, Answer::Judgment(yes)) => {
            let (a, b) = (p("stop 1")?, p("stop 2")?);
            let shared = lines.keys().any(|l| on_line(lines, l, &a) && on_line(lines, l, &b));
            expect(shared == *yes, "torf_1 answer")
        }
        (QuestionType::Torf2, Answer::Judgment(yes)) => {
            expect(on_line(lines, &p("line x")?, &p("stop 1")?) == *yes, "torf_2 answer")
        }
        (QuestionType::GlobalCount, Answer::Count(n)) => expect(*n as usize == lines.len(), "global count"),
        (QuestionType::LocalCount2, Answer::Count(n)) => expect(
            *n as usize == lines_of(lines, &p("stop 1")?).len(),
            "lines through stop",
        ),
        (QuestionType::LocalCount1, Answer::Choice(c)) => {
            let (a, b) = (p("stop 1")?, p("stop 2")?);
            let line = lines
                .keys()
                .find(|l| on_line(lines, l, &a) && on_line(lines, l, &b))
                .ok_or(format!("{}: no shared line", item.qa_id))?;
            let between = position(lines, line, &a).abs_diff(position(lines, line, &b)) - 1;
            let options = item.options.as_ref().ok_or("no options")?;
            expect(options[c.index()] == between.to_string(), "intermediate count option")?;
            let hits = options.iter().filter(|o| **o == between.to_string()).count();
            expect(hits == 1, "exactly one correct option")
        }
        (QuestionType::Planning, Answer::Route(r)) => {
            let (a, b) = (p("stop 1")?, p("stop 2")?);
            expect(route_is_valid(lines, &r.segments, &a, &b), "route validity")?;
            let best = min_transfers(lines, &a, &b).ok_or("disconnected")?;
            expect(
                r.segments.len() - 1 == best && item.transfer_count == best,
                "minimum transfers",
            )
        }
        _ => Err(format!("{}: answer kind does not fit its type", item.qa_id)),
    }
}

fn norm(s: &str) -> String {
    s.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Partial-credit score for a written route, recomputed line by line.
pub fn detail_score(item: &QAItem, net: &TransitNetwork, written: Option<&[Segment]>, cap: f64) -> f64 {
    let Some(segs) = written else { return 0.0 };
    if segs.is_empty() {
        return 0.0;
    }
    let gt = item.answer.as_route().unwrap();
    let known = |s: &str| net.stops().any(|x| norm(x) == norm(s));
    let mut score = 0.0;
    let start_ok = norm(&segs[0].from) == norm(item.params["stop 1"].as_str());
    let end_ok = norm(&segs[segs.len() - 1].to) == norm(item.params["stop 2"].as_str());
    if start_ok || end_ok {
        score += 2.0;
    }
    for i in 0..segs.len() {
        if i > item.transfer_count {
            score -= 5.0;
        }
        if i == 0 && norm(&segs[0].line) == norm(&gt.segments[0].line) {
            score += 4.0;
        }
        if i + 1 < segs.len()
            && known(&segs[i].from)
            && known(&segs[i].to)
            && norm(&segs[i].to) == norm(&segs[i + 1].from)
        {
            score += 1.0;
        }
    }
    if score > cap {
        cap
    } else {
        score
    }
}
