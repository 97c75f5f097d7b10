//! Scenario files: one YAML document describing the environment, the
//! organisms, the world schedule and every experiment parameter.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::{Language, Program, ProgramId, StateSpace, Vocabulary};
use crate::error::{Error, Result};
use crate::interaction::{AffectDecisions, EquivalenceParams, Maximand};
use crate::organism::{ExperiencePolicy, FeelingPolicy, Organism, OrganismConfig, PreferencePolicy};
use crate::task::{Task, TaskCaps};
use crate::tiebreak::TiebreakPolicy;

/// A statement written as a list of program ids.
pub type Ids = Vec<ProgramId>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    Cooperate,
    Manipulate,
    TitForTat,
}

/// Dilemma payoffs for the row player, plus a bonus for a correct decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Payoffs {
    /// Both cooperate.
    pub reward: i64,
    /// Defect against a cooperator.
    pub temptation: i64,
    /// Cooperate against a defector.
    pub sucker: i64,
    /// Both defect.
    pub punishment: i64,
    pub bonus: i64,
}

impl Default for Payoffs {
    fn default() -> Self {
        Payoffs {
            reward: 3,
            temptation: 5,
            sucker: 0,
            punishment: 1,
            bonus: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    /// Organism whose language the task is over; the full vocabulary when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub organism: Option<String>,
    pub situations: Vec<Ids>,
    pub decisions: Vec<Ids>,
    /// Close the decisions upward within the decision space.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperienceSpec {
    #[default]
    PerDecision,
    PerSituationPair,
    Explicit(Vec<TaskSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrganismSpec {
    pub id: String,
    /// Program ids the organism can use; every program when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocabulary: Option<Vec<ProgramId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<ProgramId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<TaskSpec>,
    #[serde(default)]
    pub experiences: ExperienceSpec,
    #[serde(default)]
    pub preferences: PreferencePolicy,
    #[serde(default)]
    pub feelings: FeelingPolicy,
    #[serde(default)]
    pub strategy: Strategy,
}

/// One situation the world can present, with the outcomes that count as correct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldEntry {
    pub situation: Ids,
    /// A decision is correct when it contains one of these.
    #[serde(default)]
    pub decisions: Vec<Ids>,
}

fn default_utterance_cap() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub states: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub present: Option<usize>,
    pub programs: BTreeMap<u32, Vec<usize>>,
    pub seed: u64,
    #[serde(default)]
    pub steps: usize,
    #[serde(default)]
    pub world: Vec<WorldEntry>,
    #[serde(default)]
    pub organisms: Vec<OrganismSpec>,
    #[serde(default)]
    pub equivalence: EquivalenceParams,
    #[serde(default)]
    pub maximand: Maximand,
    #[serde(default)]
    pub tiebreak: TiebreakPolicy,
    #[serde(default)]
    pub affect: AffectDecisions,
    #[serde(default)]
    pub caps: TaskCaps,
    #[serde(default)]
    pub payoffs: Payoffs,
    /// Candidate utterances a cooperating speaker tries per step.
    #[serde(default = "default_utterance_cap")]
    pub utterance_cap: usize,
    #[serde(default)]
    pub tasks: BTreeMap<String, TaskSpec>,
}

fn parse_error(location: impl Into<String>, err: Error) -> Error {
    match err {
        Error::Parse { .. } => err,
        other => Error::Parse {
            location: location.into(),
            message: other.to_string(),
        },
    }
}

impl Scenario {
    /// Parses without building; [`Scenario::build`] checks references.
    pub fn from_yaml(text: &str) -> Result<Scenario> {
        let scn: Scenario = serde_yaml::from_str(text).map_err(|e| Error::Parse {
            location: e
                .location()
                .map_or_else(|| "document".to_string(), |l| format!("line {}, column {}", l.line(), l.column())),
            message: e.to_string(),
        })?;
        Ok(scn)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Scenario> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Scenario::from_yaml(&text).map_err(|e| match e {
            Error::Parse { location, message } => Error::Parse {
                location: format!("{}: {location}", path.display()),
                message,
            },
            other => other,
        })
    }

    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(self).expect("scenario serialises")
    }

    /// Checks every reference; builds all languages and organisms once.
    pub fn validate(&self) -> Result<()> {
        self.build().map(|_| ())
    }

    pub fn space(&self) -> Result<StateSpace> {
        let mut space = StateSpace::new(self.states).map_err(|e| parse_error("states", e))?;
        if let Some(p) = self.present {
            space = space.with_present(p).map_err(|e| parse_error("present", e))?;
        }
        Ok(space)
    }

    pub fn all_programs(&self) -> Vec<Program> {
        self.programs
            .iter()
            .map(|(&id, states)| Program::new(ProgramId(id), states.iter().copied()))
            .collect()
    }

    fn vocabulary(&self, ids: Option<&[ProgramId]>, location: &str) -> Result<Vocabulary> {
        let space = self.space()?;
        let programs = match ids {
            None => self.all_programs(),
            Some(ids) => {
                let mut out = Vec::new();
                for (j, id) in ids.iter().enumerate() {
                    let states = self.programs.get(&id.0).ok_or_else(|| Error::Parse {
                        location: format!("{location}[{j}]"),
                        message: format!("unknown program {}", id.0),
                    })?;
                    out.push(Program::new(*id, states.iter().copied()));
                }
                out
            }
        };
        Vocabulary::new(space, programs).map_err(|e| parse_error(location, e))
    }

    /// Language over every program of the scenario.
    pub fn full_language(&self) -> Result<Arc<Language>> {
        let vocab = self.vocabulary(None, "programs")?;
        Language::build(vocab).map_err(|e| parse_error("programs", e))
    }

    pub fn build(&self) -> Result<Built> {
        for (&id, states) in &self.programs {
            if let Some(&s) = states.iter().find(|&&s| s >= self.states) {
                return Err(Error::Parse {
                    location: format!("programs.{id}"),
                    message: format!("state {s} is outside 0..{}", self.states),
                });
            }
        }
        let full = self.full_language()?;
        for (i, w) in self.world.iter().enumerate() {
            let loc = format!("world[{i}]");
            full.parse(&w.situation)
                .map_err(|e| parse_error(format!("{loc}.situation"), e))?;
            for (j, d) in w.decisions.iter().enumerate() {
                full.parse(d)
                    .map_err(|e| parse_error(format!("{loc}.decisions[{j}]"), e))?;
            }
        }
        if self.steps > 0 && self.world.is_empty() {
            return Err(Error::Parse {
                location: "world".into(),
                message: "a scenario with steps needs at least one world entry".into(),
            });
        }

        let mut languages: HashMap<Vec<ProgramId>, Arc<Language>> = HashMap::new();
        let mut organisms = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, spec) in self.organisms.iter().enumerate() {
            let loc = format!("organisms[{i}]");
            if !seen.insert(spec.id.clone()) {
                return Err(Error::Parse {
                    location: format!("{loc}.id"),
                    message: format!("duplicate organism id {}", spec.id),
                });
            }
            let vocab = self.vocabulary(spec.vocabulary.as_deref(), &format!("{loc}.vocabulary"))?;
            let key: Vec<ProgramId> = vocab.ids().collect();
            let lang = match languages.get(&key) {
                Some(l) => Arc::clone(l),
                None => {
                    let l = Language::build(vocab).map_err(|e| parse_error(format!("{loc}.vocabulary"), e))?;
                    languages.insert(key, Arc::clone(&l));
                    l
                }
            };
            if let Some(id) = spec.identity {
                if !lang.vocabulary().contains(id) {
                    return Err(Error::Parse {
                        location: format!("{loc}.identity"),
                        message: format!("program {} is not in the organism's vocabulary", id.0),
                    });
                }
            }
            let history = spec
                .history
                .as_ref()
                .map(|h| build_task(&lang, h, &format!("{loc}.history")))
                .transpose()?;
            let experiences = match &spec.experiences {
                ExperienceSpec::PerDecision => ExperiencePolicy::PerDecision,
                ExperienceSpec::PerSituationPair => ExperiencePolicy::PerSituationPair,
                ExperienceSpec::Explicit(list) => ExperiencePolicy::Explicit(
                    list.iter()
                        .enumerate()
                        .map(|(j, t)| build_task(&lang, t, &format!("{loc}.experiences[{j}]")))
                        .collect::<Result<_>>()?,
                ),
            };
            let config = OrganismConfig {
                name: spec.id.clone(),
                identity: spec.identity,
                history,
                experiences,
                preferences: spec.preferences.clone(),
                feelings: spec.feelings.clone(),
                caps: self.caps,
            };
            organisms.push(Organism::build(&lang, config).map_err(|e| match e {
                Error::ResourceLimit { .. } | Error::Internal(_) => e.context(&loc),
                other => parse_error(loc.clone(), other),
            })?);
        }

        let mut tasks = BTreeMap::new();
        for (name, spec) in &self.tasks {
            let loc = format!("tasks.{name}");
            let lang = match &spec.organism {
                None => Arc::clone(&full),
                Some(id) => organisms
                    .iter()
                    .find(|o| o.name() == id)
                    .map(|o| Arc::clone(o.language()))
                    .ok_or_else(|| Error::Parse {
                        location: format!("{loc}.organism"),
                        message: format!("unknown organism {id}"),
                    })?,
            };
            tasks.insert(name.clone(), build_task(&lang, spec, &loc)?);
        }
        Ok(Built {
            full,
            organisms,
            tasks,
        })
    }
}

/// The entities a scenario describes, constructed and checked.
#[derive(Debug, Clone)]
pub struct Built {
    pub full: Arc<Language>,
    pub organisms: Vec<Organism>,
    pub tasks: BTreeMap<String, Task>,
}

impl Built {
    pub fn organism(&self, id: &str) -> Result<&Organism> {
        self.organisms
            .iter()
            .find(|o| o.name() == id)
            .ok_or_else(|| Error::domain(format!("unknown organism {id}")))
    }

    pub fn task(&self, name: &str) -> Result<&Task> {
        self.tasks
            .get(name)
            .ok_or_else(|| Error::domain(format!("unknown task {name}")))
    }
}

pub fn build_task(lang: &Arc<Language>, spec: &TaskSpec, location: &str) -> Result<Task> {
    let parse_all = |list: &[Ids], field: &str| -> Result<crate::bitset::BitSet> {
        list.iter()
            .enumerate()
            .map(|(j, ids)| lang.parse(ids).map_err(|e| parse_error(format!("{location}.{field}[{j}]"), e)))
            .collect()
    };
    let situations = parse_all(&spec.situations, "situations")?;
    let decisions = parse_all(&spec.decisions, "decisions")?;
    let task = if spec.closed {
        Task::closed(lang, situations, &decisions)
    } else {
        Task::new(lang, situations, decisions)
    };
    task.map_err(|e| parse_error(location, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const V3: &str = "
states: 4
programs:
  1: [0, 1]
  2: [0, 2]
  3: [1, 3]
seed: 1
organisms:
  - id: a
    history: {situations: [[1]], decisions: [[1, 2]]}
    preferences: weakness
  - id: b
    vocabulary: [1, 2]
    history: {situations: [[1]], decisions: [[1, 2]], closed: true}
    preferences: !table {default: 2, values: {0: 5}}
tasks:
  example: {situations: [[1]], decisions: [[1, 2]]}
";

    #[test]
    fn parses_and_builds() {
        let scn = Scenario::from_yaml(V3).unwrap();
        let built = scn.build().unwrap();
        assert_eq!(built.full.len(), 6);
        assert_eq!(built.organisms.len(), 2);
        assert_eq!(built.organism("b").unwrap().language().vocabulary().len(), 2);
        assert_eq!(built.task("example").unwrap().models().len(), 2);
        let again = Scenario::from_yaml(&scn.to_yaml()).unwrap();
        assert_eq!(again, scn);
    }

    fn location(text: &str) -> String {
        match Scenario::from_yaml(text).and_then(|s| s.build()) {
            Err(Error::Parse { location, .. }) => location,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_location() {
        assert!(location("states: 4\nprograms: {1: [0]}\nseed: 1\nbogus: 3\n").contains("line"));
        assert!(location("states: 4\nprograms: {1: [0]}\n").contains("line"));
        assert_eq!(location("states: 4\nprograms: {1: [7]}\nseed: 1\n"), "programs.1");
        let bad_history = V3.replace("decisions: [[1, 2]]}\n    preferences: weakness", "decisions: [[2, 3]]}\n    preferences: weakness");
        assert_eq!(location(&bad_history), "organisms[0].history.decisions[0]");
        let bad_vocab = V3.replace("vocabulary: [1, 2]", "vocabulary: [1, 8]");
        assert_eq!(location(&bad_vocab), "organisms[1].vocabulary[1]");
        let steps_without_world = V3.replace("seed: 1", "seed: 1\nsteps: 3");
        assert_eq!(location(&steps_without_world), "world");
    }
}
