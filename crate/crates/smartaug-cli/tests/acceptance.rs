//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Every expected value here comes from an independent oracle implemented
//! in this file (naive per-pixel loops, analytic enumerations, paired
//! comparisons), never from the code paths under test.
//!
//! Run with `cargo test -p smartaug-cli --test acceptance -- --nocapture`.

mod oracle;

use oracle::*;
use rand::Rng;
use smartaug::data::synthetic::{build_memory_dataset, SyntheticFlavor, SyntheticSpec};
use smartaug::data::{DatasetManifest, PlanRecord, Split};
use smartaug::eval::{miou, ProxyEvaluator, ProxyOptions, TrialEvaluator};
use smartaug::raster::{apply_plan, AugPlan, LabelMask, Magnitude, OpName, PlanStep, Raster, Sign};
use smartaug::rng::stream;
use smartaug::search::{
    run_search, tpe_suggest, Ledger, SearchConfig, SearchMethod, SearchSpace, TpeParams,
    TrialRecord,
};
use smartaug::strategy::{
    sample_default_plan, sample_rand_plan, sample_smart_plan, sample_smartsampling_plan,
    sample_trivial_plan, EpochClock, StrategyConfig, StrategyKind, WeightTable,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::time::Instant;

fn mag(v: u8) -> Magnitude {
    Magnitude::new(v).unwrap()
}

fn random_pair(rng: &mut impl Rng, max_side: u32, channels: u32) -> (Raster, LabelMask) {
    let w = rng.random_range(2..=max_side);
    let h = rng.random_range(2..=max_side);
    let pixels = (w * h) as usize;
    let data: Vec<u8> = (0..pixels * channels as usize)
        .map(|_| rng.random())
        .collect();
    let labels: Vec<u8> = (0..pixels).map(|_| rng.random_range(0..4u8)).collect();
    (
        Raster::new(w, h, channels, data).unwrap(),
        LabelMask::new(w, h, labels, 255).unwrap(),
    )
}

// ---------------------------------------------------------------- 1 ----

#[test]
fn acceptance_1_op_kernels_match_pixel_oracles() {
    let start = Instant::now();
    // 250 grayscale + 250 RGB cases = 500 random cases per kernel.
    let cases_per_layout = 250;
    let mut rng = stream(0xACC1, &[]);
    let mut checked = 0usize;

    for case in 0..cases_per_layout {
        for channels in [1u32, 3] {
            let (img, mask) = random_pair(&mut rng, 8, channels);
            let m = mag(rng.random_range(0..=30));
            let sign = if rng.random::<bool>() {
                Sign::Plus
            } else {
                Sign::Minus
            };

            // All thirteen magnitude-mapped ops.
            for &name in smartaug::raster::rand_ops() {
                let step = PlanStep::Op {
                    name,
                    magnitude: m,
                    sign,
                };
                let (got_img, got_mask) =
                    apply_plan(&AugPlan::of_steps(vec![step]), &img, &mask).unwrap();
                let (want_img, want_mask) = oracle_apply_op(name, m, sign, &img, &mask);
                assert_eq!(
                    got_img, want_img,
                    "case {case} ch {channels}: {name} m={m} image mismatch"
                );
                assert_eq!(got_mask, want_mask, "case {case}: {name} mask mismatch");
                checked += 1;
            }

            // The baseline's continuous-parameter kernels.
            let degrees = rng.random_range(-45.0..=45.0);
            let factor = 1.0 + rng.random_range(-0.35..=0.35);
            for step in [
                PlanStep::HFlip,
                PlanStep::Rotate { degrees },
                PlanStep::Scale { factor },
            ] {
                let (got_img, got_mask) =
                    apply_plan(&AugPlan::of_steps(vec![step]), &img, &mask).unwrap();
                let (want_img, want_mask) = oracle_apply_step(&step, &img, &mask);
                assert_eq!(got_img, want_img, "case {case}: {step:?} image mismatch");
                assert_eq!(got_mask, want_mask, "case {case}: {step:?} mask mismatch");
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "oracle suite took {elapsed:.1}s, limit 30s");
    println!(
        "acceptance 1 (op-kernel oracle suite, {checked} bit-exact kernel checks, {elapsed:.1}s): PASS"
    );
}

// ---------------------------------------------------------------- 2 ----

#[test]
fn acceptance_2_geometric_ops_co_locate_mask_and_image() {
    let mut rng = stream(0xACC2, &[]);
    let geo_ops = smartaug::raster::geometric_ops();
    let mut violations = 0usize;
    let mut informative = 0usize;
    for _ in 0..1000 {
        let w = rng.random_range(6..=24);
        let h = rng.random_range(6..=24);
        let hot_x = rng.random_range(0..w);
        let hot_y = rng.random_range(0..h);
        let mut img = Raster::filled(w, h, 1, 0).unwrap();
        img.set(hot_x, hot_y, 0, 255);
        let mut mask = LabelMask::filled(w, h, 0, 255).unwrap();
        mask.set(hot_x, hot_y, 1);

        let step = match rng.random_range(0..7u32) {
            0..=4 => PlanStep::Op {
                name: geo_ops[rng.random_range(0..5)],
                magnitude: mag(rng.random_range(0..=30)),
                sign: if rng.random::<bool>() {
                    Sign::Plus
                } else {
                    Sign::Minus
                },
            },
            5 => PlanStep::Rotate {
                degrees: rng.random_range(-45.0..=45.0),
            },
            _ => PlanStep::Scale {
                factor: 1.0 + rng.random_range(-0.35..=0.35),
            },
        };
        let (out_img, out_mask) = apply_plan(&AugPlan::of_steps(vec![step]), &img, &mask).unwrap();

        for y in 0..h {
            for x in 0..w {
                let hot_label = out_mask.get(x, y) == 1;
                let intensity = out_img.get(x, y, 0);
                // Nearest-hot pixels sit within half a pixel of the true
                // position, so bilinear puts at least a quarter of the mass
                // there (>= 63 of 255).
                if hot_label && intensity < 48 {
                    violations += 1;
                }
                // Conversely, a pixel holding most of the bilinear mass is
                // within half a pixel, so nearest must have labeled it.
                if intensity >= 140 && !hot_label {
                    violations += 1;
                }
                if hot_label || intensity >= 140 {
                    informative += 1;
                }
            }
        }
    }
    assert_eq!(violations, 0, "label/image co-location violations");
    assert!(informative > 500, "co-location test should not be vacuous");
    println!(
        "acceptance 2 (label preservation, 1000 plans, {informative} co-located pixels, 0 violations): PASS"
    );
}

// ---------------------------------------------------------------- 3 ----

fn chi_square_quantile(dof: f64) -> f64 {
    ChiSquared::new(dof).unwrap().inverse_cdf(1.0 - 0.001)
}

fn assert_chi_square(observed: &[u64], expected: &[f64], what: &str) {
    let n: u64 = observed.iter().sum();
    assert_eq!(
        n as f64,
        expected.iter().sum::<f64>().round(),
        "{what} totals"
    );
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e) * (o as f64 - e) / e)
        .sum();
    let dof = (observed.len() - 1) as f64;
    let limit = chi_square_quantile(dof);
    assert!(
        stat < limit,
        "{what}: chi-square {stat:.2} over limit {limit:.2} (dof {dof})"
    );
}

fn first_op(plan: &AugPlan) -> OpName {
    match plan.steps[0] {
        PlanStep::Op { name, .. } => name,
        _ => unreachable!("samplers emit op steps"),
    }
}

#[test]
fn acceptance_3_sampler_distributions() {
    let n = 10_000;

    // Trivial: one op uniform over the 13-op list.
    let mut rng = stream(0xACC3, &[1]);
    let mut counts = vec![0u64; 13];
    for _ in 0..n {
        counts[first_op(&sample_trivial_plan(&mut rng)) as usize] += 1;
    }
    let expected = vec![n as f64 / 13.0; 13];
    assert_chi_square(&counts, &expected, "trivial op uniformity");

    // Rand++ with N=1: same uniformity over the 13-op list.
    let mut rng = stream(0xACC3, &[2]);
    let mut counts = vec![0u64; 13];
    for _ in 0..n {
        counts[first_op(&sample_rand_plan(1, mag(9), &mut rng)) as usize] += 1;
    }
    assert_chi_square(&counts, &expected, "rand++ op uniformity");

    // SmartSampling two-op draws vs the brute-force enumerated
    // weighted-without-replacement distribution.
    let weights = WeightTable::from_entries(&[
        (OpName::Rotate, 4.0),
        (OpName::ShearX, 2.0),
        (OpName::ShearY, 1.0),
        (OpName::TranslateX, 1.0),
    ])
    .unwrap();
    let positive = [
        (OpName::Rotate, 4.0),
        (OpName::ShearX, 2.0),
        (OpName::ShearY, 1.0),
        (OpName::TranslateX, 1.0),
    ];
    let total: f64 = positive.iter().map(|(_, w)| w).sum();
    let mut pair_probs = Vec::new();
    let mut pair_index = std::collections::HashMap::new();
    for (a, wa) in positive {
        for (b, wb) in positive {
            if a != b {
                pair_index.insert((a, b), pair_probs.len());
                pair_probs.push(wa / total * wb / (total - wa));
            }
        }
    }
    let clock = EpochClock::single();
    let mut rng = stream(0xACC3, &[3]);
    let mut counts = vec![0u64; pair_probs.len()];
    for _ in 0..n {
        let plan = sample_smartsampling_plan(&weights, &clock, &mut rng);
        let pair = (
            first_op(&plan),
            match plan.steps[1] {
                PlanStep::Op { name, .. } => name,
                _ => unreachable!(),
            },
        );
        counts[pair_index[&pair]] += 1;
    }
    let expected: Vec<f64> = pair_probs.iter().map(|p| p * n as f64).collect();
    assert_chi_square(&counts, &expected, "weighted two-op draws");

    // Smart augment-rate equals P.
    for (i, p) in [0.1, 0.5, 0.9].into_iter().enumerate() {
        let mut rng = stream(0xACC3, &[4 + i as u64]);
        let mut augmented = 0u64;
        for _ in 0..n {
            if sample_smart_plan(2, 1, mag(10), mag(10), p, &mut rng).augment {
                augmented += 1;
            }
        }
        let observed = [augmented, n - augmented];
        let expected = [p * n as f64, (1.0 - p) * n as f64];
        assert_chi_square(&observed, &expected, &format!("smart augment rate p={p}"));
    }

    // Default flip rate 0.5.
    let mut rng = stream(0xACC3, &[9]);
    let mut flips = 0u64;
    for _ in 0..n {
        if sample_default_plan(&mut rng)
            .steps
            .iter()
            .any(|s| matches!(s, PlanStep::HFlip))
        {
            flips += 1;
        }
    }
    assert_chi_square(
        &[flips, n - flips],
        &[n as f64 / 2.0, n as f64 / 2.0],
        "default flip rate",
    );

    println!("acceptance 3 (sampler distribution suite, chi-square alpha=0.001, n=10000): PASS");
}

// ---------------------------------------------------------------- 4 ----

#[test]
fn acceptance_4_annealing_is_exactly_linear() {
    for total in [2u64, 10, 100] {
        for e in 0..total {
            let clock = EpochClock::new(e, total).unwrap();
            let (num, den) = clock.anneal_ratio();
            // Exact rational equality: P(e) = e / (E - 1).
            assert_eq!(num, e);
            assert_eq!(den, total - 1);
        }
        // Exact linear increments as rationals: with the shared
        // denominator E-1, consecutive numerators differ by exactly 1.
        for e in 0..total - 1 {
            let (n0, d0) = EpochClock::new(e, total).unwrap().anneal_ratio();
            let (n1, d1) = EpochClock::new(e + 1, total).unwrap().anneal_ratio();
            assert_eq!(d0, d1);
            assert_eq!(n1 - n0, 1);
        }
        // Endpoints are exactly 0 and 1 in floating point too.
        assert_eq!(EpochClock::new(0, total).unwrap().anneal_probability(), 0.0);
        assert_eq!(
            EpochClock::new(total - 1, total)
                .unwrap()
                .anneal_probability(),
            1.0
        );
    }
    println!("acceptance 4 (annealing exactness for E in {{2, 10, 100}}): PASS");
}

// ---------------------------------------------------------------- 5 ----

#[test]
fn acceptance_5_classical_grid_is_93_trials() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SearchConfig::new(SearchMethod::Grid, SearchSpace::Rand, u64::MAX, 0).unwrap();
    let objective = |c: &StrategyConfig, _: u64| match &c.kind {
        StrategyKind::Rand { n, m } => Ok((*n as f64) * 0.01 + m.value() as f64 * 0.001),
        _ => Err("wrong space".into()),
    };
    let ledger = run_search(&cfg, &objective, &dir.path().join("grid.jsonl")).unwrap();
    assert_eq!(ledger.len(), 93);
    // Row-major N-then-M enumeration, every point distinct.
    let mut seen = std::collections::BTreeSet::new();
    for (i, r) in ledger.records().iter().enumerate() {
        match &r.config.kind {
            StrategyKind::Rand { n, m } => {
                assert_eq!(*n as u64, 1 + (i as u64 / 31));
                assert_eq!(m.value() as u64, i as u64 % 31);
                seen.insert((*n, m.value()));
            }
            _ => panic!("wrong kind"),
        }
    }
    assert_eq!(seen.len(), 93);
    println!("acceptance 5 (classical grid reproduction, 3 x 31 = 93 trials): PASS");
}

// ---------------------------------------------------------------- 6 ----

fn synthetic_objective(cfg: &StrategyConfig) -> f64 {
    match &cfg.kind {
        StrategyKind::Smart {
            m_color,
            m_geometric,
            p,
            ..
        } => {
            let mc = m_color.value() as f64;
            let mg = m_geometric.value() as f64;
            -((mc - 20.0) * (mc - 20.0)) - (mg - 5.0) * (mg - 5.0) - (p - 0.7).abs()
        }
        _ => unreachable!("smart space"),
    }
}

fn best_found_in_memory(use_tpe: bool, seed: u64, budget: usize) -> f64 {
    let params = TpeParams::default();
    let mut history: Vec<TrialRecord> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for trial in 0..budget {
        let mut rng = stream(seed, &[trial as u64, 0]);
        let cfg = if use_tpe {
            tpe_suggest(&history, &SearchSpace::Smart, &params, &mut rng)
        } else {
            SearchSpace::Smart.sample_uniform(&mut rng)
        };
        let score = synthetic_objective(&cfg);
        best = best.max(score);
        history.push(TrialRecord::ok(trial as u64, cfg, 0, score, 0.0));
    }
    best
}

#[test]
fn acceptance_6_tpe_beats_random_on_the_synthetic_objective() {
    let start = Instant::now();
    let runs = 100;
    let mut tpe_at_least_random = 0;
    for pair in 0..runs {
        let tpe = best_found_in_memory(true, pair, 50);
        let random = best_found_in_memory(false, 70_000 + pair, 50);
        if tpe >= random {
            tpe_at_least_random += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < 300.0,
        "TPE comparison took {elapsed:.1}s, limit 300s"
    );
    assert!(
        tpe_at_least_random >= 80,
        "TPE >= random in only {tpe_at_least_random}/{runs} paired runs"
    );
    println!(
        "acceptance 6 (TPE efficacy, TPE >= random in {tpe_at_least_random}/{runs} paired runs, {elapsed:.1}s): PASS"
    );
}

// ---------------------------------------------------------------- 7 ----

#[test]
fn acceptance_7_strategy_preference_depends_on_the_dataset() {
    let start = Instant::now();
    let low_color = StrategyConfig::new(StrategyKind::Smart {
        n_color: 2,
        n_geometric: 0,
        m_color: mag(5),
        m_geometric: mag(0),
        p: 1.0,
    });
    let heavy_color = StrategyConfig::new(StrategyKind::Smart {
        n_color: 7,
        n_geometric: 0,
        m_color: mag(30),
        m_geometric: mag(0),
        p: 1.0,
    });
    let seeds = 20u64;
    let mut margins = Vec::new();
    for flavor in [SyntheticFlavor::ColorSignal, SyntheticFlavor::ColorNuisance] {
        let data = build_memory_dataset(&SyntheticSpec {
            images: 12,
            width: 32,
            height: 24,
            classes: 3,
            shapes_per_image: 3,
            flavor,
            noise: 12,
            seed: 99,
        })
        .unwrap();
        let proxy = ProxyEvaluator::new(data, ProxyOptions::default()).unwrap();
        let mut low_mean = 0.0;
        let mut heavy_mean = 0.0;
        for seed in 0..seeds {
            low_mean += proxy.evaluate(&low_color, seed).unwrap();
            heavy_mean += proxy.evaluate(&heavy_color, seed).unwrap();
        }
        margins.push((low_mean - heavy_mean) / seeds as f64);
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < 600.0,
        "directional test took {elapsed:.1}s, limit 600s"
    );
    // Color-signal data: low color magnitudes win by a clear margin.
    assert!(
        margins[0] > 0.05,
        "color-signal margin {:.4} should exceed 0.05",
        margins[0]
    );
    // Color-nuisance data: the preference inverts.
    assert!(
        margins[1] < -0.05,
        "color-nuisance margin {:.4} should invert below -0.05",
        margins[1]
    );
    println!(
        "acceptance 7 (dataset-dependent preference, margins {:+.3}/{:+.3} over {seeds} seeds, {elapsed:.1}s): PASS",
        margins[0], margins[1]
    );
}

// ---------------------------------------------------------------- 8 ----

fn binary() -> std::process::Command {
    std::process::Command::new(env!("CARGO_BIN_EXE_smartaug"))
}

#[test]
fn acceptance_8_end_to_end_determinism() {
    let tmp = tempfile::tempdir().unwrap();

    // cmd_search: two identical runs, byte-identical ledgers.
    for name in ["a.jsonl", "b.jsonl"] {
        let status = binary()
            .args([
                "search",
                "--space",
                "smart",
                "--method",
                "bo",
                "--budget",
                "6",
                "--evaluator",
                "proxy",
                "--ledger",
                tmp.path().join(name).to_str().unwrap(),
                "--seed",
                "5",
            ])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(tmp.path().join("a.jsonl")).unwrap();
    let b = std::fs::read(tmp.path().join("b.jsonl")).unwrap();
    assert_eq!(a, b, "search ledgers must be byte-identical");

    // cmd_augment: the replay log reproduces every written PNG bit-exactly.
    let ds = tmp.path().join("ds");
    smartaug::data::synthetic::write_dataset(
        &SyntheticSpec {
            images: 6,
            width: 20,
            height: 16,
            classes: 3,
            shapes_per_image: 3,
            flavor: SyntheticFlavor::ColorSignal,
            noise: 10,
            seed: 21,
        },
        &ds,
    )
    .unwrap();
    let strategy = tmp.path().join("strategy.json");
    std::fs::write(&strategy, r#"{"kind":"default"}"#).unwrap();
    let out = tmp.path().join("aug");
    let status = binary()
        .args([
            "augment",
            "--data",
            ds.to_str().unwrap(),
            "--strategy",
            strategy.to_str().unwrap(),
            "--epochs",
            "2",
            "--out",
            out.to_str().unwrap(),
            "--target",
            "14x12",
            "--seed",
            "8",
        ])
        .status()
        .unwrap();
    assert!(status.success());

    let manifest = DatasetManifest::load(&ds).unwrap();
    let items = manifest.split_items(Split::Train);
    let mut replayed = 0;
    for line in std::fs::read_to_string(out.join("plans.jsonl"))
        .unwrap()
        .lines()
    {
        let record: PlanRecord = serde_json::from_str(line).unwrap();
        let (src_img, src_mask) = items[record.index].load(manifest.ignore_index).unwrap();
        let (img, mask) = record.replay(&src_img, &src_mask).unwrap();
        let dir = out.join(format!("epoch_{}", record.epoch));
        let file = format!("{}.png", record.name);
        assert_eq!(
            img,
            Raster::read_png(&dir.join("images").join(&file)).unwrap(),
            "{file}"
        );
        assert_eq!(
            mask,
            LabelMask::read_png(&dir.join("masks").join(&file), 255).unwrap(),
            "{file}"
        );
        replayed += 1;
    }
    assert_eq!(replayed, 8, "two epochs over four train items");
    println!("acceptance 8 (end-to-end determinism + replay, {replayed} pairs replayed): PASS");
}

// ---------------------------------------------------------------- 9 ----

#[test]
fn acceptance_9_miou_matches_brute_force_sets() {
    let mut rng = stream(0xACC9, &[]);
    for case in 0..1000 {
        let k = rng.random_range(2..=4usize);
        let w = rng.random_range(1..=8u32);
        let h = rng.random_range(1..=8u32);
        let pixels = (w * h) as usize;
        let sequence = rng.random_range(1..=3usize);
        let mut gts = Vec::new();
        let mut preds = Vec::new();
        for _ in 0..sequence {
            let gt: Vec<u8> = (0..pixels)
                .map(|_| {
                    if rng.random_range(0..10u32) == 0 {
                        255
                    } else {
                        rng.random_range(0..k as u8)
                    }
                })
                .collect();
            let pred: Vec<u8> = (0..pixels).map(|_| rng.random_range(0..k as u8)).collect();
            gts.push(LabelMask::new(w, h, gt, 255).unwrap());
            preds.push(LabelMask::new(w, h, pred, 255).unwrap());
        }
        let got = miou(&preds, &gts, k);
        let want = oracle_miou(&preds, &gts, k);
        match (got, want) {
            (Ok(result), Some(expected)) => {
                assert!(
                    (result.miou - expected).abs() <= 1e-12,
                    "case {case}: {} vs oracle {expected}",
                    result.miou
                );
            }
            (Err(_), None) => {} // both say "no scored pixels"
            (got, want) => panic!("case {case}: implementation {got:?} vs oracle {want:?}"),
        }
    }
    println!("acceptance 9 (mIoU brute-force oracle equivalence, 1000 cases): PASS");
}

// --------------------------------------------------------------- 10 ----

#[test]
fn acceptance_10_external_loopback_scores_equal_p() {
    let tmp = tempfile::tempdir().unwrap();
    let stub = tmp.path().join("loopback.py");
    std::fs::write(
        &stub,
        r#"import json, sys
spec = json.load(open(sys.argv[1]))
json.dump({"miou": spec["config"]["p"]}, open(spec["out"], "w"))
"#,
    )
    .unwrap();
    let ledger_path = tmp.path().join("loopback.jsonl");
    let status = binary()
        .args([
            "search",
            "--space",
            "smart",
            "--method",
            "random",
            "--budget",
            "12",
            "--evaluator",
            &format!("external:python3 {}", stub.display()),
            "--ledger",
            ledger_path.to_str().unwrap(),
            "--seed",
            "4",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let ledger = Ledger::load(&ledger_path).unwrap();
    assert_eq!(ledger.len(), 12);
    for record in ledger.records() {
        let p = match &record.config.kind {
            StrategyKind::Smart { p, .. } => *p,
            _ => panic!("smart space"),
        };
        assert_eq!(
            record.score,
            Some(p),
            "trial {}: score must equal the config's p exactly",
            record.trial_id
        );
    }
    println!("acceptance 10 (external-evaluator loopback, 12 scores equal p exactly): PASS");
}
