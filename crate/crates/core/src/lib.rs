//! Transit-map question generation, difficulty-aware reward shaping,
//! curriculum scheduling and a small GRPO training loop.

pub mod answer;
pub mod curriculum;
pub mod grpo;
pub mod qa;
pub mod reward;
pub mod seed;
pub mod transit;

pub use answer::ParsedAnswer;
pub use curriculum::{build_plan, CurriculumPlan, EpochSchedule, Granularity};
pub use grpo::{train, Decoding, Mode, PolicyState, TrainConfig, TrainingLog};
pub use qa::{Answer, QAItem, QuestionType, Quota, Split};
pub use reward::{score_answer, EvalWeights, RewardBreakdown, RewardConfig};
pub use transit::{Difficulty, NetworkRegistry, NetworkSpec, Route, Segment, TransitNetwork};
