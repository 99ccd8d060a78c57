//! Multi-stage training schedules.
//!
//! Stages follow a fixed coarse-to-fine order over question types. Inside a
//! stage items are shuffled rather than sorted by difficulty, and every epoch
//! draws a fresh permutation from a seed derived from `(plan seed, stage, epoch)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qa::{QAItem, QuestionType};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    /// Yes/no judgments, then counting, then planning.
    Fine,
    /// All short-answer types, then planning.
    Coarse,
    /// One stage with every type.
    None,
}

impl Granularity {
    pub const ALL: [Granularity; 3] = [Granularity::Fine, Granularity::Coarse, Granularity::None];

    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Fine => "fine",
            Granularity::Coarse => "coarse",
            Granularity::None => "none",
        }
    }

    /// Question-type sets of each stage, in training order.
    pub fn stage_types(self) -> Vec<BTreeSet<QuestionType>> {
        use QuestionType::*;
        let set = |ts: &[QuestionType]| ts.iter().copied().collect::<BTreeSet<_>>();
        match self {
            Granularity::Fine => vec![
                set(&[Torf1, Torf2]),
                set(&[GlobalCount, LocalCount1, LocalCount2]),
                set(&[Planning]),
            ],
            Granularity::Coarse => vec![
                set(&[Torf1, Torf2, GlobalCount, LocalCount1, LocalCount2]),
                set(&[Planning]),
            ],
            Granularity::None => vec![set(&QuestionType::ALL)],
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Granularity::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| format!("unknown granularity `{s}` (expected fine, coarse or none)"))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CurriculumError {
    #[error("cannot build a curriculum from an empty pool")]
    EmptyPool,
    #[error("epochs per stage must be at least 1 (stage {stage_id} has {epochs})")]
    ZeroEpochs { stage_id: usize, epochs: usize },
    #[error("epoch override names stage {0}, which does not exist")]
    UnknownStage(usize),
    #[error("plan refers to pool index {index} but the pool has {len} items")]
    PoolMismatch { index: usize, len: usize },
}

/// One stage. `items` are indices into the pool the plan was built from,
/// in the order of the first epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub stage_id: usize,
    pub qtypes: BTreeSet<QuestionType>,
    pub items: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurriculumPlan {
    pub stages: Vec<Stage>,
    pub seed: u64,
    pub granularity: Granularity,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl CurriculumPlan {
    pub fn total_items(&self) -> usize {
        self.stages.iter().map(|s| s.items.len()).sum()
    }

    pub fn stage(&self, stage_id: usize) -> Option<&Stage> {
        self.stages.iter().find(|s| s.stage_id == stage_id)
    }
}

fn permutation(mut items: Vec<usize>, plan_seed: u64, stage_id: usize, epoch: usize) -> Vec<usize> {
    let mut rng = seed::rng(seed::derive(plan_seed, &[stage_id as u64, epoch as u64]));
    items.shuffle(&mut rng);
    items
}

/// Partition `pool` into stages for `granularity` and shuffle each stage.
///
/// Stage ids start at 1. A stage with no matching items is kept (empty) and
/// noted in `warnings`.
pub fn build_plan(pool: &[QAItem], granularity: Granularity, seed: u64) -> Result<CurriculumPlan, CurriculumError> {
    if pool.is_empty() {
        return Err(CurriculumError::EmptyPool);
    }
    let mut warnings = Vec::new();
    let stages = granularity
        .stage_types()
        .into_iter()
        .enumerate()
        .map(|(k, qtypes)| {
            let stage_id = k + 1;
            let members: Vec<usize> = pool
                .iter()
                .enumerate()
                .filter(|(_, item)| qtypes.contains(&item.qtype))
                .map(|(i, _)| i)
                .collect();
            if members.is_empty() {
                let names: Vec<&str> = qtypes.iter().map(|q| q.as_str()).collect();
                warnings.push(format!("stage {stage_id} ({}) has no items", names.join(", ")));
            }
            Stage {
                stage_id,
                items: permutation(members, seed, stage_id, 0),
                qtypes,
            }
        })
        .collect();
    Ok(CurriculumPlan {
        stages,
        seed,
        granularity,
        warnings,
    })
}

/// Epoch counts per stage: a uniform default with optional per-stage overrides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpochSchedule {
    pub epochs_per_stage: usize,
    /// Stage id to epoch count. Keys are written as strings so the map
    /// survives formats whose keys are always text.
    #[serde(with = "stage_keys")]
    pub overrides: BTreeMap<usize, usize>,
}

mod stage_keys {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<usize, usize>, s: S) -> Result<S::Ok, S::Error> {
        let text: BTreeMap<String, usize> = map.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        text.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, usize>, D::Error> {
        BTreeMap::<String, usize>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                k.parse()
                    .map(|k| (k, v))
                    .map_err(|_| D::Error::custom(format!("stage id `{k}` is not a positive integer")))
            })
            .collect()
    }
}

impl Default for EpochSchedule {
    fn default() -> Self {
        Self::uniform(1)
    }
}

impl EpochSchedule {
    pub fn uniform(epochs_per_stage: usize) -> Self {
        Self {
            epochs_per_stage,
            overrides: BTreeMap::new(),
        }
    }

    pub fn epochs(&self, stage_id: usize) -> usize {
        self.overrides.get(&stage_id).copied().unwrap_or(self.epochs_per_stage)
    }

    pub fn validate(&self, plan: &CurriculumPlan) -> Result<(), CurriculumError> {
        if let Some(&id) = self.overrides.keys().find(|id| plan.stage(**id).is_none()) {
            return Err(CurriculumError::UnknownStage(id));
        }
        for stage in &plan.stages {
            let epochs = self.epochs(stage.stage_id);
            if epochs == 0 {
                return Err(CurriculumError::ZeroEpochs {
                    stage_id: stage.stage_id,
                    epochs,
                });
            }
        }
        Ok(())
    }
}

/// One emitted training item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Emission {
    pub stage_id: usize,
    pub epoch: usize,
    /// Index into the pool.
    pub item: usize,
}

/// Sequential stream over a plan: every epoch of stage 1, then stage 2, and so on.
#[derive(Debug, Clone)]
pub struct PlanIter<'a> {
    plan: &'a CurriculumPlan,
    schedule: EpochSchedule,
    stage: usize,
    epoch: usize,
    order: Vec<usize>,
    pos: usize,
}

impl<'a> PlanIter<'a> {
    fn load(&mut self) {
        self.pos = 0;
        self.order = match self.plan.stages.get(self.stage) {
            Some(s) if self.epoch == 0 => s.items.clone(),
            Some(s) => permutation(s.items.clone(), self.plan.seed, s.stage_id, self.epoch),
            None => Vec::new(),
        };
    }
}

impl Iterator for PlanIter<'_> {
    type Item = Emission;

    fn next(&mut self) -> Option<Emission> {
        loop {
            let stage = self.plan.stages.get(self.stage)?;
            if let Some(&item) = self.order.get(self.pos) {
                self.pos += 1;
                return Some(Emission {
                    stage_id: stage.stage_id,
                    epoch: self.epoch,
                    item,
                });
            }
            self.epoch += 1;
            if self.epoch >= self.schedule.epochs(stage.stage_id) {
                self.stage += 1;
                self.epoch = 0;
            }
            self.load();
        }
    }
}

/// Stream the plan. Epoch 0 of a stage follows `Stage::items`; later epochs
/// are reshuffled.
pub fn iterate<'a>(plan: &'a CurriculumPlan, schedule: &EpochSchedule) -> Result<PlanIter<'a>, CurriculumError> {
    schedule.validate(plan)?;
    let mut it = PlanIter {
        plan,
        schedule: schedule.clone(),
        stage: 0,
        epoch: 0,
        order: Vec::new(),
        pos: 0,
    };
    it.load();
    Ok(it)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage_id: usize,
    pub qtypes: BTreeSet<QuestionType>,
    pub epochs: usize,
    pub qa_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmissionRecord {
    pub stage_id: usize,
    pub epoch: usize,
    pub qa_id: String,
}

/// Everything needed to replay a schedule exactly: stage definitions, seeds
/// and the full emission order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanManifest {
    pub granularity: Granularity,
    pub seed: u64,
    pub schedule: EpochSchedule,
    pub warnings: Vec<String>,
    pub stages: Vec<StageRecord>,
    pub emission: Vec<EmissionRecord>,
}

impl PlanManifest {
    pub fn new(plan: &CurriculumPlan, pool: &[QAItem], schedule: &EpochSchedule) -> Result<Self, CurriculumError> {
        let id = |index: usize| {
            pool.get(index)
                .map(|item| item.qa_id.clone())
                .ok_or(CurriculumError::PoolMismatch { index, len: pool.len() })
        };
        let stages = plan
            .stages
            .iter()
            .map(|s| {
                Ok(StageRecord {
                    stage_id: s.stage_id,
                    qtypes: s.qtypes.clone(),
                    epochs: schedule.epochs(s.stage_id),
                    qa_ids: s.items.iter().map(|&i| id(i)).collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<_, CurriculumError>>()?;
        let emission = iterate(plan, schedule)?
            .map(|e| {
                Ok(EmissionRecord {
                    stage_id: e.stage_id,
                    epoch: e.epoch,
                    qa_id: id(e.item)?,
                })
            })
            .collect::<Result<_, CurriculumError>>()?;
        Ok(Self {
            granularity: plan.granularity,
            seed: plan.seed,
            schedule: schedule.clone(),
            warnings: plan.warnings.clone(),
            stages,
            emission,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qa::{generate, Quota};
    use crate::transit::{generate_synthetic_network, NetworkSpec};

    fn pool() -> Vec<QAItem> {
        let spec = NetworkSpec {
            line_count: 5,
            ..NetworkSpec::default()
        };
        (0..3)
            .flat_map(|k| {
                let net = generate_synthetic_network(&format!("n{k}"), k, &spec).unwrap();
                generate(&net, k, &Quota::default()).unwrap()
            })
            .collect()
    }

    fn stage_ids(plan: &CurriculumPlan, pool: &[QAItem]) -> Vec<Vec<QuestionType>> {
        plan.stages
            .iter()
            .map(|s| s.items.iter().map(|&i| pool[i].qtype).collect())
            .collect()
    }

    #[test]
    fn fine_has_three_ordered_stages() {
        let pool = pool();
        let plan = build_plan(&pool, Granularity::Fine, 1).unwrap();
        assert_eq!(plan.stages.len(), 3);
        let types = stage_ids(&plan, &pool);
        assert!(types[0].iter().all(|q| q.is_torf()));
        assert!(types[1].iter().all(|q| q.is_counting()));
        assert!(types[2].iter().all(|q| q.is_planning()));
        assert_eq!(plan.total_items(), pool.len());
        assert!(plan.warnings.is_empty());
    }

    #[test]
    fn coarse_and_none() {
        let pool = pool();
        let coarse = build_plan(&pool, Granularity::Coarse, 1).unwrap();
        assert_eq!(coarse.stages.len(), 2);
        assert_eq!(
            coarse.stages[1].items.len(),
            pool.iter().filter(|i| i.qtype.is_planning()).count()
        );
        let none = build_plan(&pool, Granularity::None, 1).unwrap();
        assert_eq!(none.stages.len(), 1);
        let mut all = none.stages[0].items.clone();
        all.sort_unstable();
        assert_eq!(all, (0..pool.len()).collect::<Vec<_>>());
    }

    #[test]
    fn empty_stage_is_kept_with_warning() {
        let pool: Vec<QAItem> = pool().into_iter().filter(|i| !i.qtype.is_counting()).collect();
        let plan = build_plan(&pool, Granularity::Fine, 0).unwrap();
        assert_eq!(plan.stages.len(), 3);
        assert!(plan.stages[1].items.is_empty());
        assert_eq!(plan.warnings.len(), 1);
        assert_eq!(build_plan(&[], Granularity::Fine, 0), Err(CurriculumError::EmptyPool));
    }

    #[test]
    fn seeded_shuffle_is_deterministic() {
        let pool = pool();
        let a = build_plan(&pool, Granularity::Fine, 9).unwrap();
        assert_eq!(a, build_plan(&pool, Granularity::Fine, 9).unwrap());
        assert_ne!(a, build_plan(&pool, Granularity::Fine, 10).unwrap());
    }

    #[test]
    fn stream_order_and_epochs() {
        let pool = pool();
        let plan = build_plan(&pool, Granularity::Coarse, 3).unwrap();
        let one: Vec<Emission> = iterate(&plan, &EpochSchedule::uniform(1)).unwrap().collect();
        assert_eq!(one.len(), pool.len());
        let first_two = one.iter().position(|e| e.stage_id == 2).unwrap();
        assert!(one[first_two..].iter().all(|e| e.stage_id == 2));

        let two: Vec<Emission> = iterate(&plan, &EpochSchedule::uniform(2)).unwrap().collect();
        assert_eq!(two.len(), 2 * pool.len());
        let mut counts = vec![0; pool.len()];
        two.iter().for_each(|e| counts[e.item] += 1);
        assert!(counts.iter().all(|&c| c == 2));

        let s1 = plan.stages[0].items.len();
        let e0: Vec<usize> = two[..s1].iter().map(|e| e.item).collect();
        let e1: Vec<usize> = two[s1..2 * s1].iter().map(|e| e.item).collect();
        assert_eq!(e0, plan.stages[0].items);
        assert_ne!(e0, e1);
    }

    #[test]
    fn overrides_and_validation() {
        let pool = pool();
        let plan = build_plan(&pool, Granularity::Coarse, 3).unwrap();
        let mut schedule = EpochSchedule::uniform(1);
        schedule.overrides.insert(2, 3);
        let n = iterate(&plan, &schedule).unwrap().count();
        assert_eq!(n, plan.stages[0].items.len() + 3 * plan.stages[1].items.len());
        schedule.overrides.insert(7, 1);
        assert_eq!(iterate(&plan, &schedule).err(), Some(CurriculumError::UnknownStage(7)));
        assert_eq!(
            iterate(&plan, &EpochSchedule::uniform(0)).err(),
            Some(CurriculumError::ZeroEpochs { stage_id: 1, epochs: 0 })
        );
    }

    #[test]
    fn manifest_lists_emission() {
        let pool = pool();
        let plan = build_plan(&pool, Granularity::Fine, 4).unwrap();
        let m = PlanManifest::new(&plan, &pool, &EpochSchedule::uniform(2)).unwrap();
        assert_eq!(m.emission.len(), 2 * pool.len());
        assert_eq!(m.stages[0].qa_ids[0], pool[plan.stages[0].items[0]].qa_id);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<PlanManifest>(&json).unwrap(), m);
    }
}
