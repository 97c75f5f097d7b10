//! v-tasks (equivalently symbols): situations, correct decisions and the
//! models that carve the decisions out of the decision space.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::env::{Language, ProgramId};
use crate::error::{Error, Result};
use crate::tiebreak::Tiebreak;

/// Bounds on task enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskCaps {
    pub max_situations: usize,
    pub max_tasks: usize,
}

impl Default for TaskCaps {
    fn default() -> Self {
        TaskCaps {
            max_situations: 2,
            max_tasks: 200_000,
        }
    }
}

/// Whether an enumeration covered everything it was asked about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Coverage {
    /// Situation sets larger than `max_situations` exist and were skipped.
    pub situation_cap_binding: bool,
    /// The `max_tasks` cap stopped the stream early.
    pub truncated: bool,
}

impl Coverage {
    pub fn exhaustive(&self) -> bool {
        !self.situation_cap_binding && !self.truncated
    }

    pub fn merge(self, other: Coverage) -> Coverage {
        Coverage {
            situation_cap_binding: self.situation_cap_binding || other.situation_cap_binding,
            truncated: self.truncated || other.truncated,
        }
    }
}

/// A task ⟨S, D, M⟩ over one language. Also read as a symbol: situations
/// are signs, decisions referents, models interpretants.
///
/// Equality, hashing and ordering use (S, D); M is derived.
#[derive(Clone)]
pub struct Task {
    lang: Arc<Language>,
    situations: BitSet,
    decisions: BitSet,
    space: BitSet,
    models: BitSet,
}

impl Task {
    pub fn new(lang: &Arc<Language>, situations: BitSet, decisions: BitSet) -> Result<Task> {
        if situations.is_empty() {
            return Err(Error::InvalidTask("a task needs at least one situation".into()));
        }
        lang.check_set(&situations)?;
        let space = lang.extension_of_set(&situations);
        if !decisions.is_subset(&space) {
            return Err(Error::InvalidTask(
                "correct decisions must extend some situation".into(),
            ));
        }
        let models = models_within(lang, &space, &decisions);
        Ok(Task {
            lang: Arc::clone(lang),
            situations,
            decisions,
            space,
            models,
        })
    }

    /// Builds a task whose correct decisions are everything in Z_S that
    /// extends one of `outcomes`.
    pub fn closed(lang: &Arc<Language>, situations: BitSet, outcomes: &BitSet) -> Result<Task> {
        let space = lang.extension_of_set(&situations);
        let decisions = space.intersection(&lang.extension_of_set(outcomes));
        Task::new(lang, situations, decisions)
    }

    /// Fast constructor for generators that already know Z_S.
    fn from_parts(lang: &Arc<Language>, situations: BitSet, space: BitSet, decisions: BitSet) -> Task {
        let models = models_within(lang, &space, &decisions);
        Task {
            lang: Arc::clone(lang),
            situations,
            decisions,
            space,
            models,
        }
    }

    pub fn language(&self) -> &Arc<Language> {
        &self.lang
    }

    pub fn situations(&self) -> &BitSet {
        &self.situations
    }

    pub fn decisions(&self) -> &BitSet {
        &self.decisions
    }

    pub fn models(&self) -> &BitSet {
        &self.models
    }

    /// Z_S.
    pub fn decision_space(&self) -> &BitSet {
        &self.space
    }

    pub fn has_models(&self) -> bool {
        !self.models.is_empty()
    }

    /// Number of correct decisions.
    pub fn weakness(&self) -> usize {
        self.decisions.len()
    }

    /// Z_{M}: every decision that extends some model.
    pub fn model_extension(&self) -> BitSet {
        self.lang.extension_of_set(&self.models)
    }

    /// Selects a decision in Z_s ∩ Z_h for situation `s` and hypothesis `h`.
    pub fn complete(&self, situation: usize, hypothesis: usize, tiebreak: &mut Tiebreak) -> Result<Completion> {
        if !self.situations.contains(situation) {
            return Err(Error::domain("situation is not one of the task's situations"));
        }
        if hypothesis >= self.lang.len() {
            return Err(Error::domain("hypothesis is not in the language"));
        }
        let choices = self
            .lang
            .extension(situation)
            .intersection(&self.lang.extension(hypothesis));
        let choices: Vec<usize> = choices.iter().collect();
        let decision = tiebreak.pick(&choices);
        Ok(Completion {
            decision,
            correct: decision.is_some_and(|d| self.decisions.contains(d)),
        })
    }

    fn check_same(&self, other: &Task) -> Result<()> {
        if !self.lang.same_as(&other.lang) {
            return Err(Error::domain("tasks belong to different languages"));
        }
        Ok(())
    }

    /// `self ⊏ other`: strictly fewer situations, no new correct decisions.
    pub fn is_child_of(&self, other: &Task) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.situations.is_proper_subset(&other.situations)
            && self.decisions.is_subset(&other.decisions))
    }

    /// ⟨S_a ∪ S_b, D_a ∪ D_b⟩ with models recomputed.
    pub fn merge(&self, other: &Task) -> Result<Task> {
        self.check_same(other)?;
        Task::new(
            &self.lang,
            self.situations.union(&other.situations),
            self.decisions.union(&other.decisions),
        )
    }

    /// The two tasks share a model.
    pub fn generalises(&self, other: &Task) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.models.intersects(&other.models))
    }

    pub fn shares_model_with(&self, models: &BitSet) -> bool {
        self.models.intersects(models)
    }

    pub fn view(&self) -> TaskView {
        let ids = |set: &BitSet| -> Vec<Vec<ProgramId>> { set.iter().map(|i| self.lang.ids(i)).collect() };
        TaskView {
            situations: ids(&self.situations),
            decisions: ids(&self.decisions),
            models: ids(&self.models),
        }
    }

    /// Rebuilds a task from its id-list rendering; models are recomputed.
    pub fn from_view(lang: &Arc<Language>, view: &TaskView) -> Result<Task> {
        let parse = |list: &[Vec<ProgramId>]| -> Result<BitSet> { list.iter().map(|ids| lang.parse(ids)).collect() };
        Task::new(lang, parse(&view.situations)?, parse(&view.decisions)?)
    }

    /// Correct decisions as program-id sets, for comparison across languages.
    pub fn decision_ids(&self) -> Vec<Vec<ProgramId>> {
        self.decisions.iter().map(|i| self.lang.ids(i)).collect()
    }
}

/// Models of ⟨S, D⟩ given Z_S: statements l with Z_S ∩ Z_l = D.
fn models_within(lang: &Language, space: &BitSet, decisions: &BitSet) -> BitSet {
    // Any model is contained in every correct decision.
    let meet = decisions
        .iter()
        .fold(u64::MAX, |acc, d| acc & lang.statement(d).0);
    (0..lang.len())
        .filter(|&l| {
            lang.statement(l).0 & !meet == 0 && lang.restrict_to_extension(space, l) == *decisions
        })
        .collect()
}

/// M = {l ∈ L : Z_S ∩ Z_l = D}.
pub fn compute_models(lang: &Language, situations: &BitSet, decisions: &BitSet) -> Result<BitSet> {
    lang.check_set(situations)?;
    let space = lang.extension_of_set(situations);
    if !decisions.is_subset(&space) {
        return Err(Error::InvalidTask(
            "correct decisions must extend some situation".into(),
        ));
    }
    Ok(models_within(lang, &space, decisions))
}

impl PartialEq for Task {
    fn eq(&self, other: &Self) -> bool {
        self.situations == other.situations && self.decisions == other.decisions
    }
}

impl Eq for Task {}

impl Hash for Task {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.situations.hash(state);
        self.decisions.hash(state);
    }
}

impl Ord for Task {
    fn cmp(&self, other: &Self) -> Ordering {
        self.situations
            .cmp(&other.situations)
            .then_with(|| self.decisions.cmp(&other.decisions))
    }
}

impl PartialOrd for Task {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.view();
        f.debug_struct("Task")
            .field("S", &v.situations)
            .field("D", &v.decisions)
            .field("M", &v.models)
            .finish()
    }
}

/// Serialisable rendering of a task with statements as id lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskView {
    pub situations: Vec<Vec<ProgramId>>,
    pub decisions: Vec<Vec<ProgramId>>,
    pub models: Vec<Vec<ProgramId>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Completion {
    /// `None` when Z_s ∩ Z_h is empty.
    pub decision: Option<usize>,
    pub correct: bool,
}

/// Lexicographic k-combinations of `0..n`.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    started: bool,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            started: false,
            done: k > n,
        }
    }

    fn advance(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.idx);
        }
        let k = self.idx.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(&self.idx);
            }
        }
        self.done = true;
        None
    }
}

/// Lexicographic non-empty situation sets of size ≤ `max` over a language of `n` statements.
struct SituationSets {
    n: usize,
    max: usize,
    size: usize,
    combos: Combinations,
}

impl SituationSets {
    fn new(n: usize, max: usize) -> Self {
        SituationSets {
            n,
            max: max.min(n),
            size: 1,
            combos: Combinations::new(n, 1),
        }
    }
}

impl Iterator for SituationSets {
    type Item = BitSet;

    fn next(&mut self) -> Option<BitSet> {
        loop {
            if self.size > self.max {
                return None;
            }
            if let Some(c) = self.combos.advance() {
                return Some(c.iter().copied().collect());
            }
            self.size += 1;
            self.combos = Combinations::new(self.n, self.size);
        }
    }
}

/// Deterministic stream over Γ_v: every ⟨S, D⟩ with 1 ≤ |S| ≤ max_situations
/// and D ⊆ Z_S, in canonical order, stopping after `max_tasks`.
pub struct TaskStream {
    lang: Arc<Language>,
    caps: TaskCaps,
    situation_sets: SituationSets,
    current: Option<(BitSet, BitSet, Vec<usize>)>,
    decision_size: usize,
    decision_combos: Option<Combinations>,
    yielded: usize,
    coverage: Coverage,
    finished: bool,
}

pub fn enumerate_tasks(lang: &Arc<Language>, caps: TaskCaps) -> TaskStream {
    TaskStream {
        lang: Arc::clone(lang),
        caps,
        situation_sets: SituationSets::new(lang.len(), caps.max_situations),
        current: None,
        decision_size: 0,
        decision_combos: None,
        yielded: 0,
        coverage: Coverage {
            situation_cap_binding: caps.max_situations < lang.len(),
            truncated: false,
        },
        finished: false,
    }
}

impl TaskStream {
    pub fn coverage(&self) -> Coverage {
        self.coverage
    }

    pub fn yielded(&self) -> usize {
        self.yielded
    }

    fn raw_next(&mut self) -> Option<Task> {
        loop {
            if self.current.is_none() {
                let s = self.situation_sets.next()?;
                let space = self.lang.extension_of_set(&s);
                let members: Vec<usize> = space.iter().collect();
                self.current = Some((s, space, members));
                self.decision_size = 0;
                self.decision_combos = Some(Combinations::new(self.current.as_ref()?.2.len(), 0));
            }
            let (s, space, members) = self.current.as_ref()?;
            if let Some(combos) = self.decision_combos.as_mut() {
                if let Some(c) = combos.advance() {
                    let d: BitSet = c.iter().map(|&i| members[i]).collect();
                    return Some(Task::from_parts(&self.lang, s.clone(), space.clone(), d));
                }
            }
            self.decision_size += 1;
            if self.decision_size > members.len() {
                self.current = None;
            } else {
                self.decision_combos = Some(Combinations::new(members.len(), self.decision_size));
            }
        }
    }
}

impl Iterator for TaskStream {
    type Item = Task;

    fn next(&mut self) -> Option<Task> {
        if self.finished {
            return None;
        }
        if self.yielded >= self.caps.max_tasks {
            self.finished = true;
            if self.raw_next().is_some() {
                self.coverage.truncated = true;
            }
            return None;
        }
        match self.raw_next() {
            Some(t) => {
                self.yielded += 1;
                Some(t)
            }
            None => {
                self.finished = true;
                None
            }
        }
    }
}

/// Every task with |S| ≤ `caps.max_situations` that has one of `models`
/// among its own models, in canonical order.
///
/// A task has a model l exactly when D = Z_S ∩ Z_l, so each (S, l) pair
/// generates one candidate; tasks without models are never produced. This
/// equals filtering [`enumerate_tasks`] by a shared model, at a fraction of
/// the cost.
pub fn tasks_sharing_models(lang: &Arc<Language>, models: &BitSet, caps: TaskCaps) -> (Vec<Task>, Coverage) {
    let mut out = Vec::new();
    let mut coverage = Coverage {
        situation_cap_binding: caps.max_situations < lang.len(),
        truncated: false,
    };
    if models.is_empty() {
        return (out, coverage);
    }
    let model_list: Vec<usize> = models.iter().collect();
    'outer: for s in SituationSets::new(lang.len(), caps.max_situations) {
        let space = lang.extension_of_set(&s);
        let mut ds: Vec<BitSet> = model_list
            .iter()
            .map(|&l| lang.restrict_to_extension(&space, l))
            .collect();
        ds.sort();
        ds.dedup();
        for d in ds {
            if out.len() >= caps.max_tasks {
                coverage.truncated = true;
                break 'outer;
            }
            out.push(Task::from_parts(lang, s.clone(), space.clone(), d));
        }
    }
    (out, coverage)
}

/// |Γ_v| restricted to |S| ≤ max_situations: Σ_S 2^{|Z_S|}. Saturates.
pub fn count_tasks(lang: &Language, max_situations: usize) -> u128 {
    let mut total: u128 = 0;
    for s in SituationSets::new(lang.len(), max_situations) {
        let z = lang.extension_of_set(&s).len();
        let add = if z >= 127 { u128::MAX } else { 1u128 << z };
        total = total.saturating_add(add);
    }
    total
}
