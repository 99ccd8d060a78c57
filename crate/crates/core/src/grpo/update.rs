use super::policy::{log_softmax, mean_features, softmax, Features, PolicyState, N_FEATURES};
use super::{GroupSample, GrpoError, TrainConfig};

fn axpy(acc: &mut Features, a: f64, x: &Features) {
    for (s, v) in acc.iter_mut().zip(x) {
        *s += a * v;
    }
}

fn visited_states(batch: &[GroupSample]) -> impl Iterator<Item = &Vec<Features>> {
    batch
        .iter()
        .flat_map(|g| g.responses.iter())
        .flat_map(|t| t.steps.iter().map(|s| &s.actions))
}

/// Mean of the exact categorical `KL(pi_theta || pi_ref)` over every state
/// visited in the batch. Zero for a batch with no decisions.
pub fn mean_kl(theta: &Features, reference: &Features, batch: &[GroupSample]) -> f64 {
    let (sum, n) = visited_states(batch).fold((0.0, 0usize), |(sum, n), actions| {
        let lp = log_softmax(theta, actions);
        let lq = log_softmax(reference, actions);
        let kl: f64 = lp.iter().zip(&lq).map(|(p, q)| p.exp() * (p - q)).sum();
        (sum + kl, n + 1)
    });
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// `J(theta) = mean over groups of sum_i A_i log pi_theta(y_i | x) - kl_coeff * mean_kl`.
///
/// Trajectory log-probability is the sum of per-decision log-probabilities.
pub fn objective(theta: &Features, reference: &Features, batch: &[GroupSample], kl_coeff: f64) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    let pg: f64 = batch
        .iter()
        .map(|g| {
            g.responses
                .iter()
                .zip(&g.advantages)
                .map(|(t, a)| {
                    a * t
                        .steps
                        .iter()
                        .map(|s| log_softmax(theta, &s.actions)[s.action])
                        .sum::<f64>()
                })
                .sum::<f64>()
        })
        .sum();
    pg / batch.len() as f64 - kl_coeff * mean_kl(theta, reference, batch)
}

/// Analytic gradient of [`objective`].
pub fn gradient(theta: &Features, reference: &Features, batch: &[GroupSample], kl_coeff: f64) -> Features {
    let mut grad = [0.0; N_FEATURES];
    if batch.is_empty() {
        return grad;
    }
    let scale = 1.0 / batch.len() as f64;
    for g in batch {
        for (t, &adv) in g.responses.iter().zip(&g.advantages) {
            if adv == 0.0 {
                continue;
            }
            for s in &t.steps {
                let mean = mean_features(&softmax(theta, &s.actions), &s.actions);
                axpy(&mut grad, scale * adv, &s.actions[s.action]);
                axpy(&mut grad, -scale * adv, &mean);
            }
        }
    }
    if kl_coeff != 0.0 {
        let states: Vec<&Vec<Features>> = visited_states(batch).collect();
        let w = kl_coeff / states.len().max(1) as f64;
        for actions in states {
            let p = softmax(theta, actions);
            let lp = log_softmax(theta, actions);
            let lq = log_softmax(reference, actions);
            let mean = mean_features(&p, actions);
            for (a, phi) in actions.iter().enumerate() {
                let c = -w * p[a] * (lp[a] - lq[a]);
                axpy(&mut grad, c, phi);
                axpy(&mut grad, -c, &mean);
            }
        }
    }
    grad
}

/// Outcome of one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    /// Mean KL to the reference at the pre-update parameters.
    pub kl: f64,
    pub grad_norm: f64,
    /// Whether the gradient was rescaled to `max_grad_norm`.
    pub clipped: bool,
}

/// One gradient-ascent step on [`objective`].
pub fn update(
    policy: &PolicyState,
    batch: &[GroupSample],
    cfg: &TrainConfig,
) -> Result<(PolicyState, UpdateStats), GrpoError> {
    let kl = mean_kl(&policy.params, &policy.reference, batch);
    let mut grad = gradient(&policy.params, &policy.reference, batch, cfg.kl_coeff);
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if !grad_norm.is_finite() || !kl.is_finite() {
        return Err(GrpoError::NonFinite {
            dump: format!(
                "params={:?} reference={:?} gradient={:?} kl={kl} groups={}",
                policy.params,
                policy.reference,
                grad,
                batch.len()
            ),
        });
    }
    let clipped = matches!(cfg.max_grad_norm, Some(m) if grad_norm > m);
    if let (true, Some(m)) = (clipped, cfg.max_grad_norm) {
        grad.iter_mut().for_each(|g| *g *= m / grad_norm);
    }
    let mut next = policy.clone();
    for (w, g) in next.params.iter_mut().zip(&grad) {
        *w += cfg.learning_rate * g;
    }
    Ok((next, UpdateStats { kl, grad_norm, clipped }))
}
