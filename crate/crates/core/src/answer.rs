//! Parsing of free-form model answers and the format reward.
//!
//! Short answers are read from the last `\boxed{...}` span. Routes are read
//! either from the JSON wire form (`[{"line":..,"from":..,"to":..}]`) or from
//! one `take <line> from <stop> to <stop>` instruction per text line.
//! Parsing never fails; unusable input yields [`AnswerKind::Malformed`].

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::transit::{Route, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerKind {
    Scalar,
    Route,
    Malformed,
}

/// A route as written by the answerer, not yet checked against a network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RouteAnswer {
    pub segments: Vec<Segment>,
}

impl RouteAnswer {
    /// `None` unless there is at least one segment and no field is blank.
    pub fn new(segments: Vec<Segment>) -> Option<Self> {
        let blank = |s: &str| s.trim().is_empty();
        if segments.is_empty()
            || segments
                .iter()
                .any(|s| blank(&s.line) || blank(&s.from) || blank(&s.to))
        {
            return None;
        }
        Some(Self { segments })
    }
}

impl From<&Route> for RouteAnswer {
    fn from(r: &Route) -> Self {
        Self {
            segments: r.segments.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedAnswer {
    pub kind: AnswerKind,
    pub scalar_value: Option<String>,
    pub route_value: Option<RouteAnswer>,
    pub format_ok: bool,
}

impl ParsedAnswer {
    pub fn malformed() -> Self {
        Self {
            kind: AnswerKind::Malformed,
            scalar_value: None,
            route_value: None,
            format_ok: false,
        }
    }

    fn scalar(value: String) -> Self {
        Self {
            kind: AnswerKind::Scalar,
            scalar_value: Some(value),
            route_value: None,
            format_ok: true,
        }
    }

    fn route(route: RouteAnswer) -> Self {
        Self {
            kind: AnswerKind::Route,
            scalar_value: None,
            route_value: Some(route),
            format_ok: true,
        }
    }
}

/// Contents of every complete `\boxed{...}` span, with nested braces balanced.
fn boxed_spans(text: &str) -> Vec<&str> {
    const MARK: &str = "\\boxed{";
    let mut spans = Vec::new();
    let mut from = 0;
    while let Some(rel) = text[from..].find(MARK) {
        let start = from + rel + MARK.len();
        let mut depth = 1usize;
        let mut end = None;
        for (i, ch) in text[start..].char_indices() {
            match ch {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(start + i);
                        break;
                    }
                }
                _ => {}
            }
        }
        match end {
            Some(e) => {
                spans.push(&text[start..e]);
                from = e + 1;
            }
            None => break,
        }
    }
    spans
}

const TRAILING: &[char] = &['.', ',', ';', ':', '!', '?', '。'];

/// Canonical scalar form: trimmed, whitespace collapsed, trailing punctuation
/// and wrapping parentheses removed, `yes`/`no` lowercased, letters A–D
/// uppercased, integers without leading zeros.
pub fn normalize_scalar(raw: &str) -> String {
    let mut s: String = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    loop {
        let before = s.len();
        s = s.trim_end_matches(TRAILING).trim().to_owned();
        if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            s = inner.trim().to_owned();
        }
        if let Some(inner) = s.strip_suffix(')') {
            if !inner.contains('(') {
                s = inner.trim().to_owned();
            }
        }
        if s.len() == before {
            break;
        }
    }
    let lower = s.to_lowercase();
    if lower == "yes" || lower == "no" {
        return lower;
    }
    if s.len() == 1 && matches!(lower.as_str(), "a" | "b" | "c" | "d") {
        return s.to_uppercase();
    }
    if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
        let trimmed = s.trim_start_matches('0');
        return if trimmed.is_empty() { "0".into() } else { trimmed.into() };
    }
    s
}

/// Parse a short answer from the last boxed span.
pub fn parse_boxed(text: &str) -> ParsedAnswer {
    match boxed_spans(text).last() {
        Some(content) => {
            let value = normalize_scalar(content);
            if value.is_empty() {
                ParsedAnswer::malformed()
            } else {
                ParsedAnswer::scalar(value)
            }
        }
        None => ParsedAnswer::malformed(),
    }
}

fn take_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i:take)\s+(.+?)\s+(?i:from)\s+(.+?)\s+(?i:to)\s+(.+)").expect("valid pattern"))
}

fn clean_field(s: &str) -> String {
    s.trim().trim_end_matches(TRAILING).trim().to_owned()
}

/// Parse a planning answer in wire (JSON) or text form.
pub fn parse_route(text: &str) -> ParsedAnswer {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        return match serde_json::from_str::<Vec<Segment>>(trimmed) {
            Ok(segments) => RouteAnswer::new(segments).map_or_else(ParsedAnswer::malformed, ParsedAnswer::route),
            Err(_) => ParsedAnswer::malformed(),
        };
    }
    let segments: Vec<Segment> = text
        .lines()
        .filter_map(|line| take_pattern().captures(line))
        .map(|c| Segment::new(clean_field(&c[1]), clean_field(&c[2]), clean_field(&c[3])))
        .collect();
    RouteAnswer::new(segments).map_or_else(ParsedAnswer::malformed, ParsedAnswer::route)
}

/// Serialize a route in the wire form [`parse_route`] accepts.
pub fn route_wire(segments: &[Segment]) -> String {
    serde_json::to_string(segments).expect("segments serialize")
}

/// 1.0 when the answer met the required output format, else 0.0.
pub fn format_reward(p: &ParsedAnswer) -> f64 {
    if p.format_ok {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boxed_scalar() {
        let p = parse_boxed("so the answer is \\boxed{7}");
        assert_eq!(p.kind, AnswerKind::Scalar);
        assert_eq!(p.scalar_value.as_deref(), Some("7"));
        assert!(p.format_ok);
        assert_eq!(format_reward(&p), 1.0);
    }

    #[test]
    fn no_box_is_malformed() {
        let p = parse_boxed("no boxed content");
        assert_eq!(p, ParsedAnswer::malformed());
        assert_eq!(format_reward(&p), 0.0);
        assert_eq!(parse_boxed("\\boxed{  }"), ParsedAnswer::malformed());
        assert_eq!(parse_boxed("\\boxed{7"), ParsedAnswer::malformed());
    }

    #[test]
    fn last_span_wins() {
        let p = parse_boxed("\\boxed{3} wait \\boxed{4}");
        assert_eq!(p.scalar_value.as_deref(), Some("4"));
        // an unterminated trailing span does not hide the last complete one
        let p = parse_boxed("\\boxed{3} then \\boxed{oops");
        assert_eq!(p.scalar_value.as_deref(), Some("3"));
        let p = parse_boxed("\\boxed{\\text{yes}}");
        assert_eq!(p.scalar_value.as_deref(), Some("\\text{yes}"));
    }

    #[test]
    fn normalization_table() {
        let cases = [
            (" Yes. ", "yes"),
            ("NO", "no"),
            ("b", "B"),
            ("(C)", "C"),
            ("D)", "D"),
            ("07", "7"),
            ("000", "0"),
            ("12!", "12"),
            ("two  words ", "two words"),
        ];
        for (raw, want) in cases {
            assert_eq!(normalize_scalar(raw), want, "{raw:?}");
        }
    }

    #[test]
    fn wire_route() {
        let p = parse_route(r#"[{"line":"L1","from":"A","to":"C"}]"#);
        assert_eq!(p.kind, AnswerKind::Route);
        assert_eq!(p.route_value.unwrap().segments, vec![Segment::new("L1", "A", "C")]);
        assert_eq!(parse_route("[]"), ParsedAnswer::malformed());
        assert_eq!(
            parse_route(r#"[{"line":"L1","from":"","to":"C"}]"#),
            ParsedAnswer::malformed()
        );
        assert_eq!(
            format_reward(&parse_route(r#"[{"line":"L1","from":" ","to":"C"}]"#)),
            0.0
        );
    }

    #[test]
    fn text_route() {
        let p = parse_route("take L1 from A to C\nTAKE L2 FROM C TO F.");
        let segs = p.route_value.unwrap().segments;
        assert_eq!(segs, vec![Segment::new("L1", "A", "C"), Segment::new("L2", "C", "F")]);
        let p = parse_route("First, Take Line 3 from Old Town to Harbor Square\nthen relax");
        assert_eq!(
            p.route_value.unwrap().segments,
            vec![Segment::new("Line 3", "Old Town", "Harbor Square")]
        );
        assert_eq!(parse_route("ride around until you arrive"), ParsedAnswer::malformed());
    }

    fn name() -> impl Strategy<Value = String> {
        "[A-Za-z0-9][A-Za-z0-9 ]{0,8}[A-Za-z0-9]"
    }

    proptest! {
        #[test]
        fn parsing_is_total(s in "\\PC*") {
            let b = parse_boxed(&s);
            let r = parse_route(&s);
            for p in [b, r] {
                if p.kind == AnswerKind::Malformed {
                    prop_assert!(!p.format_ok && p.scalar_value.is_none() && p.route_value.is_none());
                }
            }
        }

        #[test]
        fn normalization_is_idempotent(s in "\\PC{0,20}") {
            let once = normalize_scalar(&s);
            prop_assert_eq!(normalize_scalar(&once), once);
        }

        #[test]
        fn wire_form_round_trips(segs in prop::collection::vec((name(), name(), name()), 1..5)) {
            let segments: Vec<Segment> = segs.into_iter().map(|(l, f, t)| Segment::new(l, f, t)).collect();
            let wire = parse_route(&route_wire(&segments));
            prop_assert_eq!(&wire.route_value.as_ref().unwrap().segments, &segments);
        }
    }
}
