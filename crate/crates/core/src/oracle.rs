//! Brute-force reference implementations, written straight from the
//! definitions. Statements are id sets, truth is read only through
//! [`Program::holds`], and nothing is cached or pruned. They share no code
//! with the bit-mask paths they are used to check.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use crate::env::{ProgramId, Vocabulary};
use crate::error::{Error, Result};
use crate::interaction::Maximand;
use crate::organism::Organism;

/// A statement as a plain set of program ids.
pub type Stmt = BTreeSet<ProgramId>;

pub const MAX_ORACLE_VOCABULARY: usize = 12;
pub const MAX_ORACLE_LANGUAGE: usize = 4096;

/// A task given by its situations and correct decisions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OracleTask {
    pub situations: BTreeSet<Stmt>,
    pub decisions: BTreeSet<Stmt>,
}

fn satisfiable(vocab: &Vocabulary, stmt: &Stmt) -> bool {
    (0..vocab.space().size()).any(|state| {
        stmt.iter().all(|id| {
            vocab
                .programs()
                .iter()
                .find(|p| p.id() == *id)
                .is_some_and(|p| p.holds(state))
        })
    })
}

fn canonical_key(s: &Stmt) -> (usize, Vec<ProgramId>) {
    (s.len(), s.iter().copied().collect())
}

/// Every satisfiable subset of the vocabulary, shortest first, then
/// lexicographic by ascending ids.
pub fn oracle_language(vocab: &Vocabulary) -> Result<Vec<Stmt>> {
    let ids: Vec<ProgramId> = vocab.programs().iter().map(|p| p.id()).collect();
    if ids.len() > MAX_ORACLE_VOCABULARY {
        return Err(Error::ResourceLimit {
            what: format!("oracle language over {} programs", ids.len()),
            cap: MAX_ORACLE_VOCABULARY as u64,
        });
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << ids.len()) {
        let stmt: Stmt = (0..ids.len()).filter(|i| mask >> i & 1 == 1).map(|i| ids[i]).collect();
        if satisfiable(vocab, &stmt) {
            out.push(stmt);
        }
    }
    out.sort_by_key(canonical_key);
    Ok(out)
}

fn extension(lang: &[Stmt], a: &Stmt) -> BTreeSet<Stmt> {
    lang.iter().filter(|b| a.is_subset(b)).cloned().collect()
}

fn extension_of_set<'a>(lang: &[Stmt], set: impl IntoIterator<Item = &'a Stmt>) -> BTreeSet<Stmt> {
    set.into_iter().flat_map(|a| extension(lang, a)).collect()
}

fn guard_language(lang: &[Stmt]) -> Result<()> {
    if lang.len() > MAX_ORACLE_LANGUAGE {
        return Err(Error::ResourceLimit {
            what: format!("oracle models over a language of {} statements", lang.len()),
            cap: MAX_ORACLE_LANGUAGE as u64,
        });
    }
    Ok(())
}

fn models_in(lang: &[Stmt], situations: &BTreeSet<Stmt>, decisions: &BTreeSet<Stmt>) -> BTreeSet<Stmt> {
    let zs = extension_of_set(lang, situations);
    lang.iter()
        .filter(|l| {
            let zl = extension(lang, l);
            zs.intersection(&zl).cloned().collect::<BTreeSet<_>>() == *decisions
        })
        .cloned()
        .collect()
}

/// {l ∈ L : Z_S ∩ Z_l = D}, testing the equation for every l.
pub fn oracle_models(vocab: &Vocabulary, situations: &BTreeSet<Stmt>, decisions: &BTreeSet<Stmt>) -> Result<BTreeSet<Stmt>> {
    let lang = oracle_language(vocab)?;
    guard_language(&lang)?;
    for s in situations.iter().chain(decisions) {
        if !lang.contains(s) {
            return Err(Error::MalformedStatement(format!("{s:?} is not in the language")));
        }
    }
    if !decisions.is_subset(&extension_of_set(&lang, situations)) {
        return Err(Error::InvalidTask("correct decisions must extend some situation".into()));
    }
    Ok(models_in(&lang, situations, decisions))
}

fn subsets_up_to(items: &[Stmt], max: usize) -> Vec<BTreeSet<Stmt>> {
    let mut out: Vec<BTreeSet<Stmt>> = vec![BTreeSet::new()];
    for item in items {
        let grown: Vec<BTreeSet<Stmt>> = out
            .iter()
            .filter(|s| s.len() < max)
            .map(|s| {
                let mut t = s.clone();
                t.insert(item.clone());
                t
            })
            .collect();
        out.extend(grown);
    }
    out
}

/// |Γ_v| with |S| ≤ max_situations, counted from the subsets directly.
pub fn oracle_task_count(lang: &[Stmt], max_situations: usize) -> u128 {
    subsets_up_to(lang, max_situations)
        .into_iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let z = extension_of_set(lang, &s).len();
            if z >= 127 {
                u128::MAX
            } else {
                1u128 << z
            }
        })
        .fold(0u128, u128::saturating_add)
}

fn rank_key(lang: &[Stmt], set: &BTreeSet<Stmt>) -> (usize, Vec<usize>) {
    let mut ranks: Vec<usize> = set
        .iter()
        .map(|s| lang.iter().position(|l| l == s).expect("statement from the language"))
        .collect();
    ranks.sort_unstable();
    (ranks.len(), ranks)
}

/// Intent ascribed by `o` for an affect experience ζ: sorts candidate tasks
/// with |S| ≤ `max_situations` by (shares a model with ζ, preference,
/// maximand, canonical order) and returns the first.
///
/// When Γ_v has at most `guard` tasks every task is scanned. Otherwise only
/// the tasks ⟨S, Z_S ∩ Z_l⟩ for l ∈ M_ζ are ranked; a task has model l exactly
/// when D = Z_S ∩ Z_l, so these are the tasks sharing a model with ζ.
pub fn oracle_ascription(
    o: &Organism,
    zeta: &OracleTask,
    max_situations: usize,
    maximand: Maximand,
    guard: u128,
) -> Result<OracleTask> {
    let lang = oracle_language(o.language().vocabulary())?;
    guard_language(&lang)?;
    let zeta_models = models_in(&lang, &zeta.situations, &zeta.decisions);
    if zeta_models.is_empty() {
        return Err(Error::NoExplanation("the affect experience has no models".into()));
    }

    let to_set = |ids: Vec<Vec<ProgramId>>| -> BTreeSet<Stmt> { ids.into_iter().map(|s| s.into_iter().collect()).collect() };
    let prefs: BTreeMap<OracleTask, u64> = o
        .symbols()
        .iter()
        .zip(o.preferences())
        .map(|(t, &n)| {
            let view = t.view();
            let key = OracleTask {
                situations: to_set(view.situations),
                decisions: to_set(view.decisions),
            };
            (key, n)
        })
        .collect();

    type Key = (Reverse<bool>, Reverse<Option<u64>>, Reverse<usize>, (usize, Vec<usize>), (usize, Vec<usize>));
    let full_scan = oracle_task_count(&lang, max_situations) <= guard;
    let mut best: Option<(Key, OracleTask)> = None;
    for situations in subsets_up_to(&lang, max_situations) {
        if situations.is_empty() {
            continue;
        }
        let space: BTreeSet<Stmt> = extension_of_set(&lang, &situations);
        // Z_S ∩ Z_l for every l, grouped: the models of ⟨S, D⟩ are the l filed under D.
        let mut by_outcome: BTreeMap<BTreeSet<Stmt>, BTreeSet<Stmt>> = BTreeMap::new();
        for l in &lang {
            let d: BTreeSet<Stmt> = space.intersection(&extension(&lang, l)).cloned().collect();
            by_outcome.entry(d).or_default().insert(l.clone());
        }
        let none = BTreeSet::new();
        let mut consider = |decisions: BTreeSet<Stmt>| {
            let models = by_outcome.get(&decisions).unwrap_or(&none);
            let task = OracleTask {
                situations: situations.clone(),
                decisions,
            };
            let value = match maximand {
                Maximand::Decisions => task.decisions.len(),
                Maximand::ModelExtension => extension_of_set(&lang, models).len(),
            };
            let key = (
                Reverse(!models.is_disjoint(&zeta_models)),
                Reverse(prefs.get(&task).copied()),
                Reverse(value),
                rank_key(&lang, &task.situations),
                rank_key(&lang, &task.decisions),
            );
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, task));
            }
        };
        if full_scan {
            let space: Vec<Stmt> = space.iter().cloned().collect();
            for mask in 0u64..(1u64 << space.len()) {
                consider(
                    (0..space.len())
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| space[i].clone())
                        .collect(),
                );
            }
        } else {
            let outcomes: BTreeSet<BTreeSet<Stmt>> = zeta_models
                .iter()
                .map(|l| space.intersection(&extension(&lang, l)).cloned().collect())
                .collect();
            for d in outcomes {
                consider(d);
            }
        }
    }
    match best {
        Some(((Reverse(true), ..), task)) => Ok(task),
        _ => Err(Error::NoExplanation("no task shares a model with the affect experience".into())),
    }
}
