//! Acceptance suite: one verdict line per criterion.
//!
//! Run with `cargo test --release --test acceptance`; pass criterion numbers
//! after `--` to run a subset. The process fails if any criterion outside
//! `KNOWN_RED` fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fuzz, gradcheck, oracle};
use rewardmap_core::answer::{parse_route, route_wire};
use rewardmap_core::curriculum::{build_plan, EpochSchedule, Granularity};
use rewardmap_core::grpo::{gradient, train, Mode, TrainConfig};
use rewardmap_core::qa::{balance_yes_no, generate, Answer, BalanceReport, QAItem, QuestionType, Quota, Split};
use rewardmap_core::reward::{compose, detail_reward, difficulty_weight, weighted_accuracy, EvalWeights, RewardConfig};
use rewardmap_core::transit::{Difficulty, NetworkRegistry};

/// Criteria that are known not to hold for this implementation; see README.
const KNOWN_RED: &[u32] = &[5];

type Criterion = (u32, &'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// 1. Detail reward equals an independent reimplementation on fuzzed triples.
fn detail_oracle() -> Verdict {
    let t0 = Instant::now();
    let (nets, pool, _) = common::hard_planning_suite(10, 0, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = RewardConfig::default();
    let mut mismatches = 0;
    for n in 0..1000 {
        let item = &pool[rng.gen_range(0..pool.len())];
        let net = nets.get(&item.network_id).unwrap();
        let segs = fuzz::written_route(&mut rng, item, net);
        let written = (!segs.is_empty() && !fuzz::has_blank(&segs)).then_some(segs.as_slice());
        let got = detail_reward(item, &parse_route(&route_wire(&segs)), net, &cfg).unwrap();
        if got != oracle::detail_score(item, net, written, cfg.detail_cap) {
            mismatches += 1;
            if mismatches == 1 {
                eprintln!("first mismatch at draw {n}: {segs:?}");
            }
        }
    }
    let elapsed = t0.elapsed();
    verdict(
        mismatches == 0 && elapsed < Duration::from_secs(10),
        format!(
            "1000 triples, {mismatches} mismatches, {:.2}s (limit 10s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn synthetic_item(rng: &mut ChaCha8Rng) -> QAItem {
    let qtype = QuestionType::ALL[rng.gen_range(0..QuestionType::ALL.len())];
    let d = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard][rng.gen_range(0..3)];
    QAItem {
        qa_id: "c2".into(),
        network_id: "n".into(),
        qtype,
        question_text: String::new(),
        params: BTreeMap::new(),
        options: None,
        answer: Answer::Count(0),
        map_difficulty: d,
        question_difficulty: d,
        transfer_count: if qtype.is_planning() { rng.gen_range(0..4) } else { 0 },
        split: Split::Train,
    }
}

/// 2. total = W * (R_f + R_c + alpha * R_d), and totals scale with the weights.
fn composition() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut worst_scale) = (0.0f64, 0.0f64);
    let mut exact_scaling = true;
    for _ in 0..500 {
        let item = synthetic_item(&mut rng);
        let cfg = RewardConfig {
            alpha: rng.gen_range(0.0..2.0),
            gamma_easy: rng.gen_range(0.1..2.0),
            gamma_medium: rng.gen_range(0.1..2.0),
            gamma_hard: rng.gen_range(0.1..2.0),
            beta_0: rng.gen_range(0.0..1.0),
            beta_1: rng.gen_range(0.0..1.0),
            ..RewardConfig::default()
        };
        let rf = f64::from(rng.gen_range(0..2u8));
        let rc = f64::from(rng.gen_range(0..2u8));
        let rd = rng.gen_range(-20.0..10.0);
        let b = compose(rf, rc, rd, difficulty_weight(&item, &cfg), &cfg);
        let gamma = cfg.gamma(item.map_difficulty);
        let beta = if item.qtype.is_planning() && item.transfer_count > 0 {
            cfg.beta_1
        } else {
            cfg.beta_0
        };
        let hand = (gamma + beta) * (rf + rc + cfg.alpha * rd);
        worst = worst.max((b.total - hand).abs());

        // Powers of two scale exactly; other factors within rounding.
        let c2 = 2f64.powi(rng.gen_range(-4..5));
        let scaled = cfg.scale_weights(c2);
        let t2 = compose(rf, rc, rd, difficulty_weight(&item, &scaled), &scaled).total;
        exact_scaling &= t2 == c2 * b.total;
        let c = rng.gen_range(0.1..10.0);
        let scaled = cfg.scale_weights(c);
        let t = compose(rf, rc, rd, difficulty_weight(&item, &scaled), &scaled).total;
        worst_scale = worst_scale.max((t - c * b.total).abs() / (1.0 + (c * b.total).abs()));
    }
    verdict(
        worst <= 1e-12 && worst_scale <= 1e-12 && exact_scaling,
        format!(
            "500 tuples, max |total - hand| {worst:.1e}, max scaling error {worst_scale:.1e} (tol 1e-12), power-of-two scaling exact: {exact_scaling}"
        ),
    )
}

/// 3. Exact centering through a full run; analytic gradient vs finite differences.
fn centering_and_gradient() -> Verdict {
    let (nets, pool, eval) = common::hard_planning_suite(6, 2, 16);
    let plan = build_plan(&pool, Granularity::None, 3).unwrap();
    let cfg = TrainConfig {
        seed: 3,
        schedule: EpochSchedule::uniform(2),
        eval_every: 4,
        ..TrainConfig::default()
    };
    let run = train(
        &pool,
        &plan,
        &nets,
        &cfg,
        &RewardConfig::default(),
        Mode::Rewardmap,
        &eval,
    )
    .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let instances = 50;
    for _ in 0..instances {
        let batch = gradcheck::random_batch(&mut rng);
        let theta = gradcheck::random_features(&mut rng);
        let reference = gradcheck::random_features(&mut rng);
        let kl = rng.gen_range(0.0..0.5);
        let g = gradient(&theta, &reference, &batch, kl);
        let fd = gradcheck::finite_difference(&theta, &reference, &batch, kl);
        worst = worst.max(gradcheck::rel_err(&g, &fd));
    }
    verdict(
        run.max_centering_error <= 1e-9 && worst < 1e-4,
        format!(
            "{} steps, max |sum A| {:.1e} (tol 1e-9); {instances} gradient checks, max rel err {worst:.1e} (tol 1e-4)",
            run.log.rows.len(),
            run.max_centering_error
        ),
    )
}

/// 4. Detail reward reaches planning validity sooner and keeps groups informative.
fn sparse_reward() -> Verdict {
    let t0 = Instant::now();
    let (nets, pool, eval) = common::hard_planning_suite(10, 5, 24);
    let mut wins = 0;
    let (mut zero_b, mut zero_r) = (Vec::new(), Vec::new());
    let mut lines = Vec::new();
    for seed in 0..5u64 {
        let cfg = TrainConfig {
            seed,
            eval_every: 1,
            schedule: EpochSchedule::uniform(3),
            ..TrainConfig::default()
        };
        let plan = build_plan(&pool, Granularity::None, seed).unwrap();
        let b = train(
            &pool,
            &plan,
            &nets,
            &cfg,
            &RewardConfig::default(),
            Mode::Baseline,
            &eval,
        )
        .unwrap();
        let r = train(
            &pool,
            &plan,
            &nets,
            &cfg,
            &RewardConfig::default(),
            Mode::Rewardmap,
            &eval,
        )
        .unwrap();
        let (sb, sr) = (b.log.steps_to_validity(0.8), r.log.steps_to_validity(0.8));
        if matches!((sr, sb), (Some(r), Some(b)) if r < b) || matches!((sr, sb), (Some(_), None)) {
            wins += 1;
        }
        zero_b.push(b.log.early_zero_fraction(0.25));
        zero_r.push(r.log.early_zero_fraction(0.25));
        let show = |s: Option<usize>| s.map_or("never".to_owned(), |s| s.to_string());
        lines.push(format!("seed {seed}: rewardmap {} vs baseline {}", show(sr), show(sb)));
    }
    let (mb, _) = common::mean_sd(&zero_b);
    let (mr, _) = common::mean_sd(&zero_r);
    let elapsed = t0.elapsed();
    for l in &lines {
        println!("    {l} steps to 80% validity");
    }
    verdict(
        wins >= 4 && mb > mr && elapsed < Duration::from_secs(600),
        format!(
            "rewardmap faster on {wins}/5 seeds (need 4); early zero-signal fraction baseline {mb:.3} vs rewardmap {mr:.3}; {:.1}s (limit 600s)",
            elapsed.as_secs_f64()
        ),
    )
}

/// 5. Fine >= coarse >= single-stage on final weighted test accuracy.
fn curriculum_ordering() -> Verdict {
    let (nets, pool, test) = common::mixed_dataset(18, 6);
    let mut stats = BTreeMap::new();
    for g in Granularity::ALL {
        let accs: Vec<f64> = (0..5u64)
            .map(|seed| {
                let cfg = TrainConfig {
                    seed,
                    eval_every: 0,
                    ..TrainConfig::default()
                };
                let plan = build_plan(&pool, g, seed).unwrap();
                let out = train(
                    &pool,
                    &plan,
                    &nets,
                    &cfg,
                    &RewardConfig::default(),
                    Mode::Rewardmap,
                    &test,
                )
                .unwrap();
                out.log.final_accuracy().unwrap()
            })
            .collect();
        stats.insert(g.as_str(), common::mean_sd(&accs));
    }
    let (fine, coarse, none) = (stats["fine"], stats["coarse"], stats["none"]);
    let margin = fine.1.max(none.1);
    verdict(
        fine.0 >= coarse.0 && coarse.0 >= none.0 && fine.0 - none.0 > margin,
        format!(
            "mean (sd) over 5 seeds: fine {:.4} ({:.4}), coarse {:.4} ({:.4}), none {:.4} ({:.4}); need fine - none > {margin:.4}",
            fine.0, fine.1, coarse.0, coarse.1, none.0, none.1
        ),
    )
}

/// 6. Balanced yes/no, one global count per network, every answer re-derived.
fn generator_fidelity() -> Verdict {
    let mut nets = NetworkRegistry::new();
    let mut items = Vec::new();
    let mut k = 0u64;
    while items.len() < 10_400 {
        let net = common::network(&format!("f{k:03}"), 7000 + k, [3, 6, 8, 10][k as usize % 4]);
        items.extend(generate(&net, k, &Quota::default()).unwrap());
        nets.insert(net);
        k += 1;
    }
    let items = balance_yes_no(items, &nets, 6).unwrap();
    let report = BalanceReport::from_items(&items);
    let globals_ok = nets.ids().all(|id| {
        items
            .iter()
            .filter(|i| i.network_id == id && i.qtype == QuestionType::GlobalCount)
            .count()
            == 1
    });
    let mismatches: Vec<String> = items
        .iter()
        .filter_map(|i| oracle::check_item(nets.get(&i.network_id).unwrap(), i).err())
        .collect();
    if let Some(m) = mismatches.first() {
        eprintln!("first mismatch: {m}");
    }
    verdict(
        report.max_yes_no_gap() <= 1 && globals_ok && mismatches.is_empty() && items.len() >= 10_000,
        format!(
            "{} items over {} networks; max |yes - no| {}; one global count per network: {globals_ok}; {} oracle mismatches",
            items.len(),
            nets.len(),
            report.max_yes_no_gap(),
            mismatches.len()
        ),
    )
}

/// 7. Weighted accuracy on {easy correct, medium wrong, hard correct}.
fn metric_fixture() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut item = |d| QAItem {
        map_difficulty: d,
        ..synthetic_item(&mut rng)
    };
    let (e, m, h) = (item(Difficulty::Easy), item(Difficulty::Medium), item(Difficulty::Hard));
    let acc = weighted_accuracy(&[(&e, true), (&m, false), (&h, true)], &EvalWeights::default()).unwrap();
    let want = 3.0 / 4.5;
    verdict(
        (acc - want).abs() <= 1e-12,
        format!("weighted accuracy {acc:.12}, expected {want:.12} (tol 1e-12)"),
    )
}

fn cli(dir: &Path, args: &[&str]) -> bool {
    let out = Command::new(env!("CARGO_BIN_EXE_rewardmap"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    if !out.status.success() {
        eprintln!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    }
    out.status.success()
}

fn outputs(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut found = BTreeMap::new();
    let mut stack = vec![dir.to_owned()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.json" {
                found.insert(p.strip_prefix(dir).unwrap().to_owned(), std::fs::read(&p).unwrap());
            }
        }
    }
    found
}

/// 8. Every command re-run from its manifest gives byte-identical outputs.
fn determinism() -> Verdict {
    let tmp = tempfile::TempDir::new().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("run.toml"), "[train]\nbatch_queries = 8\neval_every = 3\n").unwrap();
    let train_run = |g: &'static str, seed: &'static str, out: &'static str| {
        vec![
            "train",
            "--dataset",
            "data/train.jsonl",
            "--eval",
            "data/test.jsonl",
            "--networks",
            "maps/networks",
            "--granularity",
            g,
            "--seed",
            seed,
            "--config",
            "run.toml",
            "--out",
            out,
        ]
    };
    let mut ran = cli(
        dir,
        &[
            "genmap",
            "--count",
            "4",
            "--lines",
            "3,6,8",
            "--density",
            "0.3",
            "--seed",
            "11",
            "--out",
            "maps",
        ],
    ) && cli(
        dir,
        &["genqa", "--networks", "maps/networks", "--seed", "11", "--out", "data"],
    );
    if ran {
        let text = std::fs::read_to_string(dir.join("data/test.jsonl")).unwrap();
        let answers: String = rewardmap_core::qa::read_jsonl(&text)
            .unwrap()
            .iter()
            .enumerate()
            .map(|(k, i)| {
                // Alternate right and wrong answers.
                let a = match (&i.answer, k % 2) {
                    (Answer::Route(r), 0) => route_wire(&r.segments),
                    (Answer::Route(r), _) => route_wire(&r.segments[..1]),
                    (other, 0) => format!("\\boxed{{{}}}", other.canonical_scalar().unwrap()),
                    _ => "\\boxed{0}".into(),
                };
                serde_json::json!({"qa_id": i.qa_id, "answer": a}).to_string() + "\n"
            })
            .collect();
        std::fs::write(dir.join("answers.jsonl"), answers).unwrap();
        ran = cli(
            dir,
            &[
                "score",
                "--dataset",
                "data/test.jsonl",
                "--networks",
                "maps/networks",
                "--answers",
                "answers.jsonl",
                "--out",
                "scored",
            ],
        ) && cli(dir, &train_run("fine", "1", "fine"))
            && cli(dir, &train_run("fine", "2", "fine2"))
            && cli(
                dir,
                &[
                    "curves",
                    "--log",
                    "s1=fine/training_log.csv",
                    "--log",
                    "s2=fine2/training_log.csv",
                    "--out",
                    "curves",
                ],
            )
            && cli(
                dir,
                &[
                    "eval",
                    "--dataset",
                    "data/test.jsonl",
                    "--networks",
                    "maps/networks",
                    "--policy",
                    "fine/policy.json",
                    "--out",
                    "evaluated",
                ],
            );
    }
    if !ran {
        return verdict(false, "a command failed before replay");
    }
    let dirs = ["maps", "data", "scored", "fine", "curves", "evaluated"];
    let mut identical = 0;
    let mut files = 0;
    for d in dirs {
        let replayed = format!("{d}.replay");
        let manifest = format!("{d}/manifest.json");
        let original = outputs(&dir.join(d));
        files += original.len();
        if cli(dir, &["replay", "--manifest", &manifest, "--out", &replayed])
            && original == outputs(&dir.join(&replayed))
        {
            identical += 1;
        } else {
            eprintln!("replay of `{d}` differs");
        }
    }
    verdict(
        identical == dirs.len(),
        format!(
            "{identical}/{} commands replayed byte-identically ({files} output files)",
            dirs.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "detail-reward oracle equivalence", detail_oracle),
        (2, "composition formula", composition),
        (3, "advantage centering and gradient check", centering_and_gradient),
        (4, "sparse-reward mitigation", sparse_reward),
        (5, "curriculum granularity ordering", curriculum_ordering),
        (6, "generator fidelity", generator_fidelity),
        (7, "metric arithmetic", metric_fixture),
        (8, "manifest determinism", determinism),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for (n, name, check) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let t0 = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| verdict(false, "panicked"));
        let known = KNOWN_RED.contains(&n);
        let status = match (v.pass, known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as known red)",
            (false, true) => "FAIL (known red)",
            (false, false) => "FAIL",
        };
        if !v.pass && !known {
            unexpected += 1;
        }
        println!(
            "criterion {n}: {status} - {name}: {} [{:.1}s]",
            v.detail,
            t0.elapsed().as_secs_f64()
        );
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
