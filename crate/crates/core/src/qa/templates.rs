//! Canonical question templates. Slots are `{stop 1}`, `{stop 2}`,
//! `{line x}` and, for the multiple-choice template, four `{x}` option slots
//! filled in order.

pub const LOCAL_COUNT_1: &str = "Please solve the multiple choice problem and put your answer (one of ABCD) in one \"\\boxed{}\". According to the subway map, how many intermediate stops are there between {stop 1} and {stop 2} (except for this two stops)?\nA) {x}\nB) {x}\nC) {x}\nD) {x}";

pub const LOCAL_COUNT_2: &str = "Please solve the problem and put your answer in one \"\\boxed{}\". According to the subway map, how many lines pass through {stop 1}?";

pub const GLOBAL_COUNT: &str = "Please solve the problem and put your answer in one \"\\boxed{}\". According to the subway map, how many subway (metro) lines are there in total?";

pub const TORF_1: &str = "Please solve the problem and put your answer (only answer yes or no) in one \"\\boxed{}\". According to the subway map, is it true that {stop 1} is the same line as {stop 2}?";

pub const TORF_2: &str = "Please solve the problem and put your answer (only answer yes or no) in one \"\\boxed{}\". According to the subway map, is it true that {stop 1} is on the {line x}?";

pub const PLANNING: &str = "plan a route from {stop 1} to {stop 2}, listing each line and transfer";

use std::collections::BTreeMap;

use super::QuestionType;

pub fn template(qtype: QuestionType) -> &'static str {
    match qtype {
        QuestionType::LocalCount1 => LOCAL_COUNT_1,
        QuestionType::LocalCount2 => LOCAL_COUNT_2,
        QuestionType::GlobalCount => GLOBAL_COUNT,
        QuestionType::Torf1 => TORF_1,
        QuestionType::Torf2 => TORF_2,
        QuestionType::Planning => PLANNING,
    }
}

/// Substitute named slots, then fill `{x}` slots from `options` in order.
///
/// Substituted values are never rescanned, so a stop literally named
/// `{stop 2}` does not trigger a second substitution.
pub fn render(template: &str, params: &BTreeMap<String, String>, options: &[String]) -> String {
    let mut out = String::with_capacity(template.len() + 32);
    let mut rest = template;
    let mut next_option = options.iter();
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let Some(close) = after.find('}') else {
            out.push_str(&rest[open..]);
            return out;
        };
        let key = &after[..close];
        let value = if key == "x" {
            next_option.next().map(String::as_str)
        } else {
            params.get(key).map(String::as_str)
        };
        match value {
            Some(v) => out.push_str(v),
            None => out.push_str(&rest[open..open + close + 2]),
        }
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    out
}
