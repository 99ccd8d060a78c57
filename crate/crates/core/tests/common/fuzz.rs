//! Random planning answers that mix correct, near-miss and garbage segments.

use rand::seq::SliceRandom;
use rand::Rng;

use rewardmap_core::qa::QAItem;
use rewardmap_core::transit::{Segment, TransitNetwork};

fn mangle(rng: &mut impl Rng, name: &str) -> String {
    match rng.gen_range(0..4) {
        0 => name.to_lowercase(),
        1 => format!("  {name} "),
        2 => name.to_uppercase(),
        _ => name.to_owned(),
    }
}

fn stop(rng: &mut impl Rng, net: &TransitNetwork, hint: &str) -> String {
    let stops: Vec<&str> = net.stops().collect();
    match rng.gen_range(0..10) {
        0..=3 => hint.to_owned(),
        4..=6 => stops.choose(rng).unwrap().to_string(),
        7 => mangle(rng, hint),
        8 => "Nowhere".into(),
        _ => String::new(),
    }
}

fn line(rng: &mut impl Rng, net: &TransitNetwork, hint: &str) -> String {
    let lines: Vec<&str> = net.line_names().collect();
    match rng.gen_range(0..8) {
        0..=3 => hint.to_owned(),
        4..=5 => lines.choose(rng).unwrap().to_string(),
        6 => mangle(rng, hint),
        _ => "Ghost Line".into(),
    }
}

/// A random written route for a planning item, built around its ground truth.
pub fn written_route(rng: &mut impl Rng, item: &QAItem, net: &TransitNetwork) -> Vec<Segment> {
    let gt = &item.answer.as_route().unwrap().segments;
    let n = rng.gen_range(0..=gt.len() + 3);
    let mut out: Vec<Segment> = Vec::with_capacity(n);
    for i in 0..n {
        let hint = &gt[i.min(gt.len() - 1)];
        let from = match out.last() {
            Some(prev) if rng.gen_bool(0.7) => prev.to.clone(),
            _ => stop(rng, net, &hint.from),
        };
        out.push(Segment::new(line(rng, net, &hint.line), from, stop(rng, net, &hint.to)));
    }
    out
}

/// Blank fields make an answer unparseable.
pub fn has_blank(segments: &[Segment]) -> bool {
    segments
        .iter()
        .any(|s| s.line.trim().is_empty() || s.from.trim().is_empty() || s.to.trim().is_empty())
}
