use super::{canon, require, require_network, resolve_stop, RewardConfig, RewardError};
use crate::answer::ParsedAnswer;
use crate::qa::QAItem;
use crate::transit::TransitNetwork;

/// Partial credit for a planning answer.
///
/// Starting from zero:
/// * empty or malformed route: return 0;
/// * +2 if the first segment departs from the origin or the last arrives at
///   the destination;
/// * for segment `i` (reached after `i` transfers):
///   * -5 if `i` exceeds the question's transfer count,
///   * +4 if `i == 0` and its line is the ground-truth route's first line,
///   * +1 if both its stops exist in the network, it is not the last
///     segment, and its arrival is the next segment's departure;
/// * clamp from above at `cfg.detail_cap`. There is no floor.
///
/// Names are compared case-insensitively after whitespace collapse.
pub fn detail_reward(
    item: &QAItem,
    p: &ParsedAnswer,
    net: &TransitNetwork,
    cfg: &RewardConfig,
) -> Result<f64, RewardError> {
    require(item, true)?;
    require_network(item, net)?;
    let truth = item
        .answer
        .as_route()
        .ok_or_else(|| RewardError::MissingRoute(item.qa_id.clone()))?;
    let segments = match &p.route_value {
        Some(r) if p.format_ok && !r.segments.is_empty() => &r.segments,
        _ => return Ok(0.0),
    };
    let origin = canon(item.origin().unwrap_or_default());
    let destination = canon(item.destination().unwrap_or_default());
    let first_line = truth.segments.first().map(|s| canon(&s.line));
    let question_transfers = item.transfer_count;

    let mut score = 0.0;
    let first = &segments[0];
    let last = &segments[segments.len() - 1];
    if canon(&first.from) == origin || canon(&last.to) == destination {
        score += 2.0;
    }
    for (i, seg) in segments.iter().enumerate() {
        let current_transfers = i;
        if current_transfers > question_transfers {
            score -= 5.0;
        }
        if current_transfers == 0 && first_line.as_deref() == Some(canon(&seg.line).as_str()) {
            score += 4.0;
        }
        if resolve_stop(net, &seg.from).is_some() && resolve_stop(net, &seg.to).is_some() {
            if let Some(next) = segments.get(i + 1) {
                if canon(&seg.to) == canon(&next.from) {
                    score += 1.0;
                }
            }
        }
    }
    Ok(f64::min(score, cfg.detail_cap))
}
