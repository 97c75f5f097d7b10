#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use meaning_core::bitset::BitSet;
use meaning_core::env::{Language, Program, ProgramId, StateSpace, Vocabulary};
use meaning_core::oracle::{OracleTask, Stmt};
use meaning_core::organism::{ExperiencePolicy, FeelingPolicy, Organism, OrganismConfig, PreferencePolicy};
use meaning_core::scenario::Scenario;
use meaning_core::task::{Task, TaskCaps};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeds for statistical checks. Fixed so results are reproducible.
pub const SEEDS_30: [u64; 30] = [
    11, 23, 37, 41, 53, 67, 71, 83, 97, 101, 113, 127, 131, 149, 151, 163, 173, 181, 193, 197, 211, 223, 227, 239, 241,
    251, 263, 271, 283, 293,
];

pub fn seeds_100() -> Vec<u64> {
    (1..=100).collect()
}

pub fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    Scenario::from_path(path).expect("bundled scenario")
}

/// Programs 1..=k with the given truth-set bitmasks over `states` states.
pub fn vocab(states: usize, truth: &[u32]) -> Vocabulary {
    let programs = truth
        .iter()
        .enumerate()
        .map(|(i, &mask)| Program::new(ProgramId(i as u32 + 1), (0..states).filter(|s| mask >> s & 1 == 1)))
        .collect();
    Vocabulary::new(StateSpace::new(states).unwrap(), programs).unwrap()
}

/// Every vocabulary with 1..=max_states states and 1..=max_programs programs.
pub fn all_vocabularies(max_states: usize, max_programs: usize) -> Vec<Vocabulary> {
    let mut out = Vec::new();
    for n in 1..=max_states {
        let per = 1u32 << n;
        for k in 1..=max_programs {
            let total = (per as u64).pow(k as u32);
            for code in 0..total {
                let mut c = code;
                let truth: Vec<u32> = (0..k)
                    .map(|_| {
                        let t = (c % per as u64) as u32;
                        c /= per as u64;
                        t
                    })
                    .collect();
                out.push(vocab(n, &truth));
            }
        }
    }
    out
}

pub fn random_vocab(rng: &mut ChaCha8Rng, max_states: usize, max_programs: usize) -> Vocabulary {
    let n = rng.random_range(1..=max_states);
    let k = rng.random_range(1..=max_programs);
    let truth: Vec<u32> = (0..k).map(|_| rng.random_range(0..1u32 << n)).collect();
    vocab(n, &truth)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stmt(lang: &Language, i: usize) -> Stmt {
    lang.ids(i).into_iter().collect()
}

pub fn stmts(lang: &Language, set: &BitSet) -> BTreeSet<Stmt> {
    set.iter().map(|i| stmt(lang, i)).collect()
}

pub fn oracle_task(t: &Task) -> OracleTask {
    let lang = t.language();
    OracleTask {
        situations: stmts(lang, t.situations()),
        decisions: stmts(lang, t.decisions()),
    }
}

/// A random non-empty set of up to `max` statements.
pub fn random_situations(rng: &mut ChaCha8Rng, lang: &Language, max: usize) -> BitSet {
    let all: Vec<usize> = (0..lang.len()).collect();
    let k = rng.random_range(1..=max.min(lang.len()));
    all.choose_multiple(rng, k).copied().collect()
}

/// ⟨S, Z_S ∩ Z_l⟩ for random S and l, so l is a model.
pub fn random_modelled_task(rng: &mut ChaCha8Rng, lang: &Arc<Language>, max_situations: usize) -> Task {
    let s = random_situations(rng, lang, max_situations);
    let l = rng.random_range(0..lang.len());
    let d = lang.extension_of_set(&s).intersection(&lang.extension(l));
    Task::new(lang, s, d).unwrap()
}

/// ⟨S, D⟩ with D a uniformly random subset of Z_S; usually has no model.
pub fn random_task(rng: &mut ChaCha8Rng, lang: &Arc<Language>, max_situations: usize) -> Task {
    let s = random_situations(rng, lang, max_situations);
    let d: BitSet = lang.extension_of_set(&s).iter().filter(|_| rng.random_bool(0.5)).collect();
    Task::new(lang, s, d).unwrap()
}

pub fn caps(max_situations: usize) -> TaskCaps {
    TaskCaps {
        max_situations,
        max_tasks: usize::MAX,
    }
}

/// An organism with a random modelled history and random preferences in 0..levels.
pub fn random_organism(rng: &mut ChaCha8Rng, lang: &Arc<Language>, levels: u64, caps: TaskCaps) -> Organism {
    let history = random_modelled_task(rng, lang, 2);
    let o = Organism::build(
        lang,
        OrganismConfig {
            name: "o".into(),
            identity: None,
            history: Some(history),
            experiences: ExperiencePolicy::PerDecision,
            preferences: PreferencePolicy::Uniform,
            feelings: FeelingPolicy::CanonicalModel,
            caps,
        },
    )
    .unwrap();
    let prefs = (0..o.symbols().len()).map(|_| rng.random_range(0..levels)).collect();
    o.with_preferences(prefs).unwrap()
}
