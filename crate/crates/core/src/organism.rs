//! Organisms: a vocabulary, experiences derived from a history task, the
//! symbol system generalised from those experiences, and preference and
//! feeling functions over the symbols. Interpretation picks a
//! preference-maximal signified symbol and decides via its models.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::env::{Language, ProgramId};
use crate::error::{Error, Result};
use crate::task::{tasks_sharing_models, Coverage, Task, TaskCaps};
use crate::tiebreak::Tiebreak;

/// Which children of the history an organism holds as experiences.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperiencePolicy {
    /// One child per situation, keeping the correct decisions that extend it.
    PerDecision,
    /// One child per unordered pair of situations.
    PerSituationPair,
    /// A listed set, each validated as a child of (or equal to) the history.
    Explicit(Vec<Task>),
}

pub fn derive_experiences(history: &Task, policy: &ExperiencePolicy) -> Result<Vec<Task>> {
    let lang = history.language();
    let situations: Vec<usize> = history.situations().iter().collect();
    let child = |members: &[usize]| -> Result<Task> {
        let s: BitSet = members.iter().copied().collect();
        let d = history.decisions().intersection(&lang.extension_of_set(&s));
        Task::new(lang, s, d)
    };
    let out = match policy {
        ExperiencePolicy::PerDecision if situations.len() <= 1 => vec![history.clone()],
        ExperiencePolicy::PerDecision => situations
            .iter()
            .map(|&s| child(&[s]))
            .collect::<Result<_>>()?,
        ExperiencePolicy::PerSituationPair if situations.len() <= 2 => vec![history.clone()],
        ExperiencePolicy::PerSituationPair => {
            let mut out = Vec::new();
            for (i, &a) in situations.iter().enumerate() {
                for &b in &situations[i + 1..] {
                    out.push(child(&[a, b])?);
                }
            }
            out
        }
        ExperiencePolicy::Explicit(list) => list.clone(),
    };
    for e in &out {
        if e != history && !e.is_child_of(history)? {
            return Err(Error::Internal(format!(
                "experience {e:?} is neither the history nor a child of it"
            )));
        }
    }
    Ok(out)
}

/// How preference values n(α) are assigned to materialised symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreferencePolicy {
    /// Every symbol gets 1.
    Uniform,
    /// n(α) = |D_α|.
    Weakness,
    /// n(α) = max(0, base + Σ valence(p) for p in the symbol's feeling).
    Valence {
        #[serde(default)]
        base: i64,
        values: BTreeMap<ProgramId, i64>,
    },
    /// Per symbol index in canonical order; unlisted symbols get `default`.
    Table {
        #[serde(default)]
        default: u64,
        values: BTreeMap<usize, u64>,
    },
}

impl Default for PreferencePolicy {
    fn default() -> Self {
        PreferencePolicy::Uniform
    }
}

/// How feelings f(α) are assigned.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeelingPolicy {
    /// The canonically first model of the symbol.
    #[default]
    CanonicalModel,
    /// Per symbol index; unlisted symbols fall back to the canonical model.
    Table(BTreeMap<usize, Vec<ProgramId>>),
}

#[derive(Debug, Clone)]
pub struct SignificationResult {
    pub situation: usize,
    /// Symbol indices, canonical order.
    pub signified: Vec<usize>,
    pub meaningful: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interpretation {
    /// Index into the symbol system.
    pub symbol: usize,
    /// Statement index; `None` when Z_s ∩ Z_{M_α} is empty.
    pub decision: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Organism {
    name: String,
    lang: Arc<Language>,
    identity: Option<ProgramId>,
    history: Option<Task>,
    experiences: Vec<Task>,
    symbols: Vec<Task>,
    symbol_index: HashMap<Task, usize>,
    coverage: Coverage,
    preferences: Vec<u64>,
    sorted_preferences: Vec<u64>,
    feelings: Vec<usize>,
    /// For each statement, the symbols it signifies.
    signs: Vec<Vec<u32>>,
}

/// Everything needed to assemble an organism.
#[derive(Debug, Clone)]
pub struct OrganismConfig {
    pub name: String,
    pub identity: Option<ProgramId>,
    pub history: Option<Task>,
    pub experiences: ExperiencePolicy,
    pub preferences: PreferencePolicy,
    pub feelings: FeelingPolicy,
    pub caps: TaskCaps,
}

/// Symbols generalising from the experiences: tasks sharing a model with one of them.
pub fn build_symbol_system(lang: &Arc<Language>, experiences: &[Task], caps: TaskCaps) -> (Vec<Task>, Coverage) {
    let mut models = BitSet::new();
    for e in experiences {
        models.union_with(e.models());
    }
    tasks_sharing_models(lang, &models, caps)
}

fn canonical_feeling(task: &Task) -> usize {
    // Symbols always have a model; the empty statement (index 0) is a fallback only.
    task.models().first().unwrap_or(0)
}

impl Organism {
    pub fn build(lang: &Arc<Language>, config: OrganismConfig) -> Result<Organism> {
        if let Some(h) = &config.history {
            if !h.language().same_as(lang) {
                return Err(Error::domain("history is over a different language"));
            }
        }
        let experiences = match &config.history {
            Some(h) => derive_experiences(h, &config.experiences)?,
            None => Vec::new(),
        };
        let (symbols, coverage) = build_symbol_system(lang, &experiences, config.caps);

        let mut feelings: Vec<usize> = symbols.iter().map(canonical_feeling).collect();
        if let FeelingPolicy::Table(table) = &config.feelings {
            for (&i, ids) in table {
                if i >= symbols.len() {
                    return Err(Error::domain(format!(
                        "feeling table refers to symbol {i} of {}",
                        symbols.len()
                    )));
                }
                feelings[i] = lang.parse(ids)?;
            }
        }

        let preferences: Vec<u64> = match &config.preferences {
            PreferencePolicy::Uniform => vec![1; symbols.len()],
            PreferencePolicy::Weakness => symbols.iter().map(|t| t.weakness() as u64).collect(),
            PreferencePolicy::Valence { base, values } => feelings
                .iter()
                .map(|&f| {
                    let total: i64 = lang
                        .ids(f)
                        .iter()
                        .map(|p| values.get(p).copied().unwrap_or(0))
                        .sum::<i64>()
                        + base;
                    total.max(0) as u64
                })
                .collect(),
            PreferencePolicy::Table { default, values } => {
                if let Some((&i, _)) = values.range(symbols.len()..).next() {
                    return Err(Error::domain(format!(
                        "preference table refers to symbol {i} of {}",
                        symbols.len()
                    )));
                }
                (0..symbols.len())
                    .map(|i| values.get(&i).copied().unwrap_or(*default))
                    .collect()
            }
        };

        let mut organism = Organism {
            name: config.name,
            lang: Arc::clone(lang),
            identity: config.identity,
            history: config.history,
            experiences,
            symbol_index: symbols.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect(),
            signs: Vec::new(),
            symbols,
            coverage,
            sorted_preferences: Vec::new(),
            preferences,
            feelings,
        };
        organism.index();
        Ok(organism)
    }

    fn index(&mut self) {
        let mut signs = vec![Vec::new(); self.lang.len()];
        for (i, t) in self.symbols.iter().enumerate() {
            for s in t.situations() {
                signs[s].push(i as u32);
            }
        }
        self.signs = signs;
        let mut sorted = self.preferences.clone();
        sorted.sort_unstable();
        self.sorted_preferences = sorted;
    }

    /// Same organism with a replaced preference vector (one value per symbol).
    pub fn with_preferences(&self, preferences: Vec<u64>) -> Result<Organism> {
        if preferences.len() != self.symbols.len() {
            return Err(Error::domain("preference vector length differs from the symbol system"));
        }
        let mut o = self.clone();
        o.preferences = preferences;
        o.index();
        Ok(o)
    }

    /// Same organism with replaced feelings (statement indices, one per symbol).
    pub fn with_feelings(&self, feelings: Vec<usize>) -> Result<Organism> {
        if feelings.len() != self.symbols.len() || feelings.iter().any(|&f| f >= self.lang.len()) {
            return Err(Error::domain("feeling vector does not match the symbol system"));
        }
        let mut o = self.clone();
        o.feelings = feelings;
        Ok(o)
    }

    pub fn renamed(&self, name: impl Into<String>) -> Organism {
        let mut o = self.clone();
        o.name = name.into();
        o
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn language(&self) -> &Arc<Language> {
        &self.lang
    }

    pub fn identity(&self) -> Option<ProgramId> {
        self.identity
    }

    pub fn history(&self) -> Option<&Task> {
        self.history.as_ref()
    }

    pub fn experiences(&self) -> &[Task] {
        &self.experiences
    }

    pub fn symbols(&self) -> &[Task] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &Task {
        &self.symbols[index]
    }

    pub fn symbol_coverage(&self) -> Coverage {
        self.coverage
    }

    pub fn preferences(&self) -> &[u64] {
        &self.preferences
    }

    pub fn feelings(&self) -> &[usize] {
        &self.feelings
    }

    pub fn symbol_index(&self, task: &Task) -> Option<usize> {
        self.symbol_index.get(task).copied()
    }

    /// n(α) for members of the symbol system. Other tasks have no preference
    /// and rank below every symbol.
    pub fn preference_of(&self, task: &Task) -> Option<u64> {
        self.symbol_index(task).map(|i| self.preferences[i])
    }

    /// Feeling of a materialised symbol.
    pub fn ascribe_feeling(&self, symbol: &Task) -> Result<usize> {
        self.symbol_index(symbol)
            .map(|i| self.feelings[i])
            .ok_or_else(|| Error::domain(format!("{:?} is not a symbol of {}", symbol, self.name)))
    }

    /// Feeling of members; the canonical model for other tasks.
    pub fn feeling_of(&self, task: &Task) -> usize {
        self.symbol_index(task)
            .map_or_else(|| canonical_feeling(task), |i| self.feelings[i])
    }

    /// Normalised rank interval [below/N, at-or-below/N] of a preference value.
    pub fn preference_tier(&self, value: u64) -> (f64, f64) {
        let n = self.sorted_preferences.len();
        if n == 0 {
            return (0.0, 0.0);
        }
        let below = self.sorted_preferences.partition_point(|&v| v < value);
        let upto = self.sorted_preferences.partition_point(|&v| v <= value);
        (below as f64 / n as f64, upto as f64 / n as f64)
    }

    /// Rank interval of a task's preference; [0, 0] for non-members.
    pub fn preference_tier_of(&self, task: &Task) -> (f64, f64) {
        self.preference_of(task).map_or((0.0, 0.0), |v| self.preference_tier(v))
    }

    /// The statement this organism perceives for a set of program ids.
    pub fn perceive(&self, ids: &[ProgramId]) -> Result<usize> {
        let stmt = self.lang.vocabulary().project(ids);
        self.lang.require(stmt)
    }

    pub fn signified(&self, situation: usize) -> Result<SignificationResult> {
        if situation >= self.lang.len() {
            return Err(Error::domain(format!(
                "statement {situation} is not in {}'s language",
                self.name
            )));
        }
        let signified: Vec<usize> = self.signs[situation].iter().map(|&i| i as usize).collect();
        Ok(SignificationResult {
            situation,
            meaningful: !signified.is_empty(),
            signified,
        })
    }

    /// Decision for `situation` under symbol `symbol`: a pick from Z_s ∩ Z_{M_α}.
    pub fn decide(&self, situation: usize, symbol: usize, tiebreak: &mut Tiebreak) -> Option<usize> {
        let choices = self
            .lang
            .extension(situation)
            .intersection(&self.symbols[symbol].model_extension());
        let choices: Vec<usize> = choices.iter().collect();
        tiebreak.pick(&choices)
    }

    /// Preference-argmax over `candidates` (canonical order), ties by `tiebreak`.
    pub fn preferred(&self, candidates: &[usize]) -> Vec<usize> {
        let best = candidates.iter().map(|&i| self.preferences[i]).max();
        candidates
            .iter()
            .copied()
            .filter(|&i| Some(self.preferences[i]) == best)
            .collect()
    }

    pub fn interpret(&self, situation: usize, tiebreak: &mut Tiebreak) -> Result<Option<Interpretation>> {
        let sig = self.signified(situation)?;
        if !sig.meaningful {
            return Ok(None);
        }
        let best = self.preferred(&sig.signified);
        let symbol = tiebreak
            .pick(&best)
            .ok_or_else(|| Error::Internal("empty argmax over a non-empty set".into()))?;
        Ok(Some(Interpretation {
            symbol,
            decision: self.decide(situation, symbol, tiebreak),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::fixtures::*;
    use crate::task::enumerate_tasks;

    fn caps() -> TaskCaps {
        TaskCaps {
            max_situations: 2,
            max_tasks: usize::MAX,
        }
    }

    fn config(history: Option<Task>) -> OrganismConfig {
        OrganismConfig {
            name: "o".into(),
            identity: None,
            history,
            experiences: ExperiencePolicy::PerDecision,
            preferences: PreferencePolicy::Uniform,
            feelings: FeelingPolicy::CanonicalModel,
            caps: caps(),
        }
    }

    fn example_history(lang: &Arc<Language>) -> Task {
        Task::new(lang, set(lang, &[&[1]]), set(lang, &[&[1, 2]])).unwrap()
    }

    #[test]
    fn experience_policies() {
        let lang = v3_lang();
        let h = example_history(&lang);
        assert_eq!(derive_experiences(&h, &ExperiencePolicy::PerDecision).unwrap(), vec![h.clone()]);

        let h2 = Task::new(&lang, set(&lang, &[&[1], &[2]]), set(&lang, &[&[1, 2], &[2]])).unwrap();
        let e = derive_experiences(&h2, &ExperiencePolicy::PerDecision).unwrap();
        assert_eq!(e.len(), 2);
        for child in &e {
            assert!(child.is_child_of(&h2).unwrap());
            assert_eq!(child.situations().len(), 1);
            let s = child.situations().first().unwrap();
            assert_eq!(child.decisions(), &h2.decisions().intersection(&lang.extension(s)));
        }
        assert_eq!(
            derive_experiences(&h2, &ExperiencePolicy::PerSituationPair).unwrap(),
            vec![h2.clone()]
        );
        let listed = ExperiencePolicy::Explicit(vec![h.clone()]);
        assert_eq!(derive_experiences(&h2, &listed).unwrap(), vec![h.clone()]);
        let bad = ExperiencePolicy::Explicit(vec![h2.clone()]);
        assert!(matches!(derive_experiences(&h, &bad), Err(Error::Internal(_))));
    }

    #[test]
    fn empty_symbol_systems() {
        let lang = v3_lang();
        let o = Organism::build(&lang, config(None)).unwrap();
        assert!(o.symbols().is_empty());
        // D = {{1}} ⊂ Z_{1} = {{1},{1,2},{1,3}} is carved by no statement.
        let modelless = Task::new(&lang, set(&lang, &[&[1]]), set(&lang, &[&[1]])).unwrap();
        assert!(!modelless.has_models());
        let o = Organism::build(&lang, config(Some(modelless))).unwrap();
        assert!(o.symbols().is_empty());
    }

    #[test]
    fn symbol_system_matches_exhaustive_filter() {
        let lang = v3_lang();
        let h = example_history(&lang);
        let o = Organism::build(&lang, config(Some(h.clone()))).unwrap();
        let oracle: Vec<Task> = enumerate_tasks(&lang, caps())
            .filter(|t| t.generalises(&h).unwrap())
            .collect();
        assert_eq!(o.symbols(), oracle.as_slice());
        assert!(o.symbol_coverage().situation_cap_binding);
    }

    #[test]
    fn signification_and_interpretation() {
        let lang = v3_lang();
        let h = example_history(&lang);
        let o = Organism::build(&lang, config(Some(h.clone()))).unwrap();
        let s1 = idx(&lang, &[1]);
        let sig = o.signified(s1).unwrap();
        assert!(sig.meaningful);
        assert!(sig.signified.windows(2).all(|w| w[0] < w[1]));
        assert!(sig.signified.iter().all(|&i| o.symbol(i).situations().contains(s1)));
        assert!(o.signified(99).is_err());

        // Prefer the history symbol itself: Z_{1} ∩ Z_{M} = {{1,2}}.
        let hi = o.symbol_index(&h).unwrap();
        let mut table = BTreeMap::new();
        table.insert(hi, 5);
        let o5 = Organism::build(
            &lang,
            OrganismConfig {
                preferences: PreferencePolicy::Table { default: 3, values: table },
                ..config(Some(h.clone()))
            },
        )
        .unwrap();
        let mut tb = Tiebreak::Canonical;
        let i = o5.interpret(s1, &mut tb).unwrap().unwrap();
        assert_eq!(i.symbol, hi);
        assert_eq!(i.decision, Some(idx(&lang, &[1, 2])));
        let doubled: Vec<u64> = o5.preferences().iter().map(|v| v * 2).collect();
        let o10 = o5.with_preferences(doubled).unwrap();
        assert_eq!(o10.interpret(s1, &mut tb).unwrap().unwrap().symbol, hi);
    }

    #[test]
    fn meaningless_situation() {
        let lang = v3_lang();
        let h = example_history(&lang);
        // The task cap keeps only the first few symbols, all with situation {}.
        let o = Organism::build(
            &lang,
            OrganismConfig {
                caps: TaskCaps { max_situations: 2, max_tasks: 2 },
                ..config(Some(h))
            },
        )
        .unwrap();
        assert!(o.symbol_coverage().truncated);
        let s = idx(&lang, &[2]);
        assert!(!o.signified(s).unwrap().meaningful);
        assert!(o.interpret(s, &mut Tiebreak::Canonical).unwrap().is_none());
        let empty = Organism::build(&lang, config(None)).unwrap();
        assert!(empty.interpret(s, &mut Tiebreak::Canonical).unwrap().is_none());
    }

    #[test]
    fn feelings() {
        let lang = v3_lang();
        let h = example_history(&lang);
        let mut table = BTreeMap::new();
        table.insert(0, vec![pid(3)]);
        let o = Organism::build(
            &lang,
            OrganismConfig {
                feelings: FeelingPolicy::Table(table),
                ..config(Some(h.clone()))
            },
        )
        .unwrap();
        assert_eq!(o.ascribe_feeling(o.symbol(0)).unwrap(), idx(&lang, &[3]));
        let j = o.symbols().len() - 1;
        assert_eq!(o.ascribe_feeling(o.symbol(j)).unwrap(), o.symbol(j).models().first().unwrap());
        let foreign = Task::new(&lang, set(&lang, &[&[1]]), set(&lang, &[&[1]])).unwrap();
        assert!(o.ascribe_feeling(&foreign).is_err());
        // Same models, same default feeling.
        let a = o.symbols().iter().position(|t| t == &h).unwrap();
        let twin = o
            .symbols()
            .iter()
            .position(|t| t != &h && t.models() == h.models())
            .unwrap();
        assert_eq!(o.feelings()[a], o.feelings()[twin]);
    }
}
