use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Number of policy features.
pub const N_FEATURES: usize = 9;

/// Feature vector of one candidate action.
pub type Features = [f64; N_FEATURES];

/// Named feature slots. `Share` and `Member` are used by both the yes/no
/// judgments and route construction, so what one learns the other inherits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    /// Prior for answering "yes" to a same-line judgment.
    Torf1Bias,
    /// Prior for answering "yes" to a stop-on-line judgment.
    Torf2Bias,
    /// Two stops share a line (+1) or not (-1). Planning: the ride-to stop
    /// shares a line with the destination.
    Share,
    /// A stop lies on a line (+1) or not (-1). Planning: the candidate line
    /// serves the destination.
    Member,
    /// Negative distance between a candidate count and the true count.
    Closeness,
    /// The ride ends at the destination.
    Arrive,
    /// The candidate line is the line just ridden.
    SameLine,
    /// The ride ends at an already visited stop.
    Revisit,
    /// The ride ends at a transfer stop.
    Hub,
}

impl Feature {
    pub const ALL: [Feature; N_FEATURES] = [
        Feature::Torf1Bias,
        Feature::Torf2Bias,
        Feature::Share,
        Feature::Member,
        Feature::Closeness,
        Feature::Arrive,
        Feature::SameLine,
        Feature::Revisit,
        Feature::Hub,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::Torf1Bias => "torf_1_bias",
            Feature::Torf2Bias => "torf_2_bias",
            Feature::Share => "share",
            Feature::Member => "member",
            Feature::Closeness => "closeness",
            Feature::Arrive => "arrive",
            Feature::SameLine => "same_line",
            Feature::Revisit => "revisit",
            Feature::Hub => "hub",
        }
    }
}

/// Identifier of the feature extractor a policy was trained with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    /// Relational features of stops and lines with respect to the question.
    #[default]
    Relational,
}

/// Linear-softmax policy: `pi(a | s) ∝ exp(theta · phi(s, a))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolicyRepr", into = "PolicyRepr")]
pub struct PolicyState {
    pub params: Features,
    /// Frozen copy used as the KL anchor.
    pub reference: Features,
    pub extractor: FeatureSet,
}

impl Default for PolicyState {
    fn default() -> Self {
        Self::uniform()
    }
}

impl PolicyState {
    /// All-zero weights: every decision is uniform.
    pub fn uniform() -> Self {
        Self::from_params([0.0; N_FEATURES])
    }

    /// A policy whose reference is a copy of `params`.
    pub fn from_params(params: Features) -> Self {
        Self {
            params,
            reference: params,
            extractor: FeatureSet::Relational,
        }
    }

    pub fn weight(&self, f: Feature) -> f64 {
        self.params[f.index()]
    }

    pub fn set_weight(&mut self, f: Feature, w: f64) {
        self.params[f.index()] = w;
    }

    pub fn probs(&self, actions: &[Features]) -> Vec<f64> {
        softmax(&self.params, actions)
    }
}

fn logits(theta: &Features, actions: &[Features]) -> (Vec<f64>, f64) {
    let l: Vec<f64> = actions
        .iter()
        .map(|phi| theta.iter().zip(phi).map(|(w, x)| w * x).sum())
        .collect();
    let max = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (l, max)
}

/// Action probabilities under `theta`, computed with the max-shift for stability.
pub fn softmax(theta: &Features, actions: &[Features]) -> Vec<f64> {
    let (l, max) = logits(theta, actions);
    let exp: Vec<f64> = l.iter().map(|x| (x - max).exp()).collect();
    let z: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / z).collect()
}

/// `log pi(a | s)` for every action.
pub fn log_softmax(theta: &Features, actions: &[Features]) -> Vec<f64> {
    let (l, max) = logits(theta, actions);
    let log_z = max + l.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    l.into_iter().map(|x| x - log_z).collect()
}

/// Expected feature vector under `probs`.
pub fn mean_features(probs: &[f64], actions: &[Features]) -> Features {
    let mut m = [0.0; N_FEATURES];
    for (p, phi) in probs.iter().zip(actions) {
        for (mk, x) in m.iter_mut().zip(phi) {
            *mk += p * x;
        }
    }
    m
}

#[derive(Serialize, Deserialize)]
struct PolicyRepr {
    extractor: FeatureSet,
    parameters: BTreeMap<String, f64>,
    reference_parameters: BTreeMap<String, f64>,
}

fn to_table(w: &Features) -> BTreeMap<String, f64> {
    Feature::ALL
        .iter()
        .map(|f| (f.name().to_owned(), w[f.index()]))
        .collect()
}

fn from_table(table: &BTreeMap<String, f64>) -> Result<Features, String> {
    if let Some(unknown) = table
        .keys()
        .find(|k| !Feature::ALL.iter().any(|f| f.name() == k.as_str()))
    {
        return Err(format!("unknown feature `{unknown}`"));
    }
    let mut w = [0.0; N_FEATURES];
    for f in Feature::ALL {
        w[f.index()] = *table
            .get(f.name())
            .ok_or_else(|| format!("missing feature `{}`", f.name()))?;
    }
    Ok(w)
}

impl TryFrom<PolicyRepr> for PolicyState {
    type Error = String;

    fn try_from(r: PolicyRepr) -> Result<Self, String> {
        Ok(Self {
            params: from_table(&r.parameters)?,
            reference: from_table(&r.reference_parameters)?,
            extractor: r.extractor,
        })
    }
}

impl From<PolicyState> for PolicyRepr {
    fn from(p: PolicyState) -> Self {
        Self {
            extractor: p.extractor,
            parameters: to_table(&p.params),
            reference_parameters: to_table(&p.reference),
        }
    }
}
