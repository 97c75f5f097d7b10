//! One PASS/FAIL line per acceptance criterion. Runs without the test
//! harness so the lines always print; exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use common::*;
use meaning_core::cli::{execute, Cli};
use meaning_core::env::Language;
use meaning_core::error::Error;
use meaning_core::experiments::{run_hall_of_mirrors, run_incomprehensibility, similarity_sweep, Dimension, HallParams};
use meaning_core::interaction::{ascribe_intent, Maximand};
use meaning_core::oracle::{oracle_ascription, oracle_language, oracle_models, oracle_task_count, OracleTask};
use meaning_core::organism::Organism;
use meaning_core::sim::run_episode;
use meaning_core::task::{enumerate_tasks, Task};
use meaning_core::tiebreak::{Tiebreak, TiebreakPolicy};

use clap::Parser;
use rand::Rng;

type Outcome = (bool, String);

/// Largest Γ_v the full-scan oracle is run on in addition to the indexed one.
const FULL_SCAN: u128 = 1 << 13;

#[derive(Default)]
struct Tally {
    checked: usize,
    failed: usize,
    first: Option<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    fn summary(&self, label: &str) -> String {
        match &self.first {
            None => format!("{label} {}/{}", self.checked, self.checked),
            Some(f) => format!("{label} {} of {} wrong, first: {f}", self.failed, self.checked),
        }
    }
}

fn ascription_result(o: &Organism, zeta: &Task, maximand: Maximand) -> Result<OracleTask, String> {
    match ascribe_intent(o, zeta, caps(2), maximand) {
        Ok(a) => Ok(oracle_task(a.ascribed_task())),
        Err(Error::NoExplanation(_)) => Err("no explanation".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn oracle_result(o: &Organism, zeta: &Task, maximand: Maximand, guard: u128) -> Result<OracleTask, String> {
    match oracle_ascription(o, &oracle_task(zeta), 2, maximand, guard) {
        Ok(t) => Ok(t),
        Err(Error::NoExplanation(_)) => Err("no explanation".into()),
        Err(e) => Err(e.to_string()),
    }
}

struct Equivalence {
    language: Tally,
    models: Tally,
    ascription: Tally,
    full_scan: Tally,
}

fn check_instance(eq: &mut Equivalence, lang: &std::sync::Arc<Language>, rng: &mut rand_chacha::ChaCha8Rng, all_small_tasks: bool) {
    let vocab = lang.vocabulary();
    let fast: Vec<_> = (0..lang.len()).map(|i| stmt(lang, i)).collect();
    let slow = oracle_language(vocab).unwrap();
    eq.language.check(fast == slow, || format!("language of {vocab:?}"));

    let mut tasks: Vec<Task> = Vec::new();
    if all_small_tasks {
        tasks.extend(enumerate_tasks(lang, caps(1)));
    }
    for i in 0..24 {
        tasks.push(if i % 2 == 0 {
            random_modelled_task(rng, lang, 3)
        } else {
            random_task(rng, lang, 3)
        });
    }
    for t in &tasks {
        let o = oracle_task(t);
        let expect = oracle_models(vocab, &o.situations, &o.decisions).unwrap();
        eq.models.check(stmts(lang, t.models()) == expect, || format!("models of {t:?}"));
    }

    let organism = random_organism(rng, lang, 4, caps(2));
    let zeta = random_modelled_task(rng, lang, 2);
    let maximand = if rng.random_bool(0.5) {
        Maximand::Decisions
    } else {
        Maximand::ModelExtension
    };
    let got = ascription_result(&organism, &zeta, maximand);
    let indexed = oracle_result(&organism, &zeta, maximand, 0);
    eq.ascription.check(got == indexed, || format!("ascription for {zeta:?}: {got:?} vs {indexed:?}"));
    let slow_lang = oracle_language(vocab).unwrap();
    if oracle_task_count(&slow_lang, 2) <= FULL_SCAN {
        let full = oracle_result(&organism, &zeta, maximand, u128::MAX);
        eq.full_scan.check(full == indexed, || format!("full scan for {zeta:?}: {full:?} vs {indexed:?}"));
    }
}

fn oracle_equivalence() -> Outcome {
    let mut eq = Equivalence {
        language: Tally::default(),
        models: Tally::default(),
        ascription: Tally::default(),
        full_scan: Tally::default(),
    };
    let exhaustive = all_vocabularies(4, 3);
    let n_exhaustive = exhaustive.len();
    for (i, v) in exhaustive.into_iter().enumerate() {
        let lang = Language::build(v).unwrap();
        check_instance(&mut eq, &lang, &mut rng(i as u64), true);
    }
    for seed in 0..500u64 {
        let mut r = rng(1_000_000 + seed);
        let lang = Language::build(random_vocab(&mut r, 4, 6)).unwrap();
        check_instance(&mut eq, &lang, &mut r, false);
    }
    let ok = [&eq.language, &eq.models, &eq.ascription, &eq.full_scan]
        .iter()
        .all(|t| t.failed == 0);
    let detail = format!(
        "{n_exhaustive} exhaustive vocabularies + 500 random (|v| ≤ 6): {}; {}; {}; {}",
        eq.language.summary("languages"),
        eq.models.summary("model sets"),
        eq.ascription.summary("ascriptions"),
        eq.full_scan.summary("full-scan cross-checks"),
    );
    (ok, detail)
}

fn model_soundness() -> Outcome {
    let mut tally = Tally::default();
    let mut tasks = 0usize;
    for v in all_vocabularies(4, 3) {
        let lang = Language::build(v).unwrap();
        for t in enumerate_tasks(&lang, caps(2)) {
            tasks += 1;
            for h in t.models().iter() {
                let zh = lang.extension(h);
                for s in t.situations().iter() {
                    let z = lang.extension(s).intersection(&zh);
                    tally.check(z.is_subset(t.decisions()), || format!("{t:?}, model {h}, situation {s}"));
                }
            }
        }
    }
    (tally.failed == 0, format!("{tasks} tasks, {}", tally.summary("(task, model, situation) triples sound")))
}

fn lattice_properties() -> Outcome {
    let mut anti = Tally::default();
    for v in all_vocabularies(4, 4) {
        let lang = Language::build(v).unwrap();
        for a in 0..lang.len() {
            for b in 0..lang.len() {
                if lang.statement(a).is_subset(lang.statement(b)) {
                    let (za, zb) = (lang.extension(a), lang.extension(b));
                    anti.check(zb.is_subset(&za), || format!("statements {a} ⊆ {b}"));
                }
            }
        }
    }
    let mut child = Tally::default();
    let mut merge = Tally::default();
    let mut langs = vec![Language::build(vocab(4, &[0b0011, 0b0101, 0b1010])).unwrap()];
    let mut r = rng(7);
    while langs.len() < 8 {
        let lang = Language::build(random_vocab(&mut r, 4, 3)).unwrap();
        if lang.len() >= 4 && lang.len() <= 7 {
            langs.push(lang);
        }
    }
    for lang in &langs {
        let tasks: Vec<Task> = enumerate_tasks(lang, caps(2)).collect();
        for a in &tasks {
            for b in &tasks {
                if a.is_child_of(b).unwrap() {
                    child.check(a.weakness() <= b.weakness(), || format!("{a:?} ⊏ {b:?}"));
                }
            }
        }
        for (i, a) in tasks.iter().enumerate() {
            for b in &tasks[i..] {
                let m = a.merge(b).unwrap();
                merge.check(m.weakness() >= a.weakness().max(b.weakness()), || format!("merge({a:?}, {b:?})"));
            }
        }
    }
    let ok = anti.failed + child.failed + merge.failed == 0;
    (
        ok,
        format!(
            "{}; {}; {}",
            anti.summary("extension pairs anti-monotone (|v| ≤ 4)"),
            child.summary("child pairs weakness-monotone"),
            merge.summary("merges no weaker than inputs")
        ),
    )
}

fn argmax_invariance() -> Outcome {
    let mut interp = Tally::default();
    let mut ascr = Tally::default();
    let transforms: [(&str, fn(u64) -> u64); 2] = [("2x+7", |x| 2 * x + 7), ("x^3", |x| x * x * x)];
    for seed in 0..200u64 {
        let mut r = rng(2_000_000 + seed);
        let lang = Language::build(random_vocab(&mut r, 4, 4)).unwrap();
        let base = random_organism(&mut r, &lang, 5, caps(2));
        let zeta = random_modelled_task(&mut r, &lang, 2);
        for (name, f) in transforms {
            let mapped = base.with_preferences(base.preferences().iter().map(|&x| f(x)).collect()).unwrap();
            for policy in [TiebreakPolicy::Canonical, TiebreakPolicy::Seeded(seed)] {
                let (mut t1, mut t2): (Tiebreak, Tiebreak) = (policy.breaker(), policy.breaker());
                for s in 0..lang.len() {
                    let a = base.interpret(s, &mut t1).unwrap();
                    let b = mapped.interpret(s, &mut t2).unwrap();
                    interp.check(a == b, || format!("seed {seed}, {name}, situation {s}"));
                }
            }
            for maximand in [Maximand::Decisions, Maximand::ModelExtension] {
                let a = ascription_result(&base, &zeta, maximand);
                let b = ascription_result(&mapped, &zeta, maximand);
                ascr.check(a == b, || format!("seed {seed}, {name}, {maximand:?}"));
            }
        }
    }
    (
        interp.failed + ascr.failed == 0,
        format!("{}; {}", interp.summary("interpretations unchanged"), ascr.summary("ascriptions unchanged")),
    )
}

fn twin_ceiling() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for file in ["twins-v3.yaml", "twins.yaml"] {
        let mut scn = scenario(file);
        let (mut spoken, mut matched, mut affected, mut meant, mut silent) = (0, 0, 0, 0, 0);
        for seed in seeds_100() {
            scn.seed = seed;
            let m = run_episode(&scn).unwrap().metrics;
            spoken += m.spoken;
            matched += m.matched;
            affected += m.affected;
            meant += m.meant;
            if m.match_rate.is_none() || m.meaning_rate.is_none() {
                silent += 1;
            }
        }
        let good = spoken > 0 && matched == spoken && meant == affected && affected > 0;
        ok &= good;
        parts.push(format!(
            "{file}: match {matched}/{spoken}, meant {meant}/{affected} ({silent} episodes never spoke)"
        ));
    }
    (ok, format!("100 seeds x 10 steps; {}", parts.join("; ")))
}

fn similarity_degradation() -> Outcome {
    let scn = scenario("twins-v3.yaml");
    let prefs = similarity_sweep(&scn, Dimension::Preferences, &[0.0, 1.0], &SEEDS_30).unwrap();
    let (base, permuted) = (prefs.points[0].mean, prefs.points[1].mean);
    let overlap = run_incomprehensibility(&scn, &[0.0, 0.5, 1.0], &SEEDS_30).unwrap().score_sweep();
    let means: Vec<f64> = overlap.points.iter().map(|p| p.mean).collect();
    let monotone = means.windows(2).all(|w| w[0] <= w[1]);
    let ok = permuted < 1.0 && monotone && means[0] == 0.0;
    (
        ok,
        format!(
            "30 seeds; match rate unpermuted {base:.4}, permuted {permuted:.4}; mean score at overlap 0/50/100%: {:.4} / {:.4} / {:.4}",
            means[0], means[1], means[2]
        ),
    )
}

fn hall_of_mirrors() -> Outcome {
    let built = scenario("v3.yaml").build().unwrap();
    let params = HallParams {
        trials: 1000,
        seed: 1,
        caps: caps(2),
        max_parent_situations: 3,
    };
    let h = run_hall_of_mirrors(&built.full, &params).unwrap();
    let ok = h.weak.mean >= h.random.mean && h.weak.mean >= h.consistent.mean;
    (
        ok,
        format!(
            "{} trials on V3: weak {:.4}, random draw {:.4}, random expectation {:.4}",
            h.trials.len(),
            h.weak.mean,
            h.random.mean,
            h.consistent.mean
        ),
    )
}

fn cli_report(args: &[&str]) -> String {
    let cli = Cli::try_parse_from(args).unwrap();
    execute(&cli).unwrap().report
}

fn determinism() -> Outcome {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/");
    let runs: Vec<Vec<String>> = vec![
        vec!["simulate".into(), "--scenario".into(), format!("{dir}twins-v3.yaml"), "--seed".into(), "17".into()],
        vec!["simulate".into(), "--scenario".into(), format!("{dir}mixed.yaml"), "--format".into(), "csv".into()],
        vec![
            "experiment".into(),
            "similarity-sweep".into(),
            "--scenario".into(),
            format!("{dir}twins-v3.yaml"),
            "--seeds".into(),
            "4".into(),
        ],
        vec![
            "experiment".into(),
            "hall-of-mirrors".into(),
            "--scenario".into(),
            format!("{dir}v3.yaml"),
            "--trials".into(),
            "100".into(),
        ],
        vec![
            "ascribe".into(),
            "--scenario".into(),
            format!("{dir}twins-v3.yaml"),
            "--listener".into(),
            "b".into(),
            "--speaker".into(),
            "a".into(),
        ],
    ];
    let mut tally = Tally::default();
    for args in &runs {
        let argv: Vec<&str> = std::iter::once("meaning").chain(args.iter().map(String::as_str)).collect();
        let first = cli_report(&argv);
        let second = cli_report(&argv);
        tally.check(first == second && !first.is_empty(), || args.join(" "));
    }
    let exe = env!("CARGO_BIN_EXE_meaning");
    let argv = ["simulate", "--scenario", &format!("{dir}mixed.yaml"), "--seed", "5"];
    let a = std::process::Command::new(exe).args(argv).output().unwrap();
    let b = std::process::Command::new(exe).args(argv).output().unwrap();
    tally.check(a.status.success() && a.stdout == b.stdout, || "separate processes".into());
    (tally.failed == 0, tally.summary("reports byte-identical on repeat"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("model soundness", model_soundness),
        ("lattice properties", lattice_properties),
        ("argmax invariance", argmax_invariance),
        ("twin-communication ceiling", twin_ceiling),
        ("similarity degradation", similarity_degradation),
        ("hall of mirrors", hall_of_mirrors),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        failed += usize::from(!ok);
        println!(
            "{} [{}] {name}: {detail} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
