//! Affect, intent ascription, rough equivalence between symbols of two
//! organisms, and the three-condition meaning check.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::env::{Language, ProgramId, Statement};
use crate::error::{Error, Result};
use crate::organism::{Interpretation, Organism};
use crate::task::{tasks_sharing_models, Coverage, Task, TaskCaps};
use crate::tiebreak::Tiebreak;

/// Secondary quantity maximised among preferred candidates when ascribing intent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Maximand {
    /// |D_α|.
    #[default]
    Decisions,
    /// |Z_{M_α}|.
    ModelExtension,
}

impl Maximand {
    pub fn value(self, task: &Task) -> usize {
        match self {
            Maximand::Decisions => task.weakness(),
            Maximand::ModelExtension => task.model_extension().len(),
        }
    }
}

/// How the correct decisions of an affect experience are recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AffectDecisions {
    /// D holds exactly the decisions made.
    Exact,
    /// D holds every decision in Z_S that extends a decision made.
    #[default]
    UpwardClosed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquivalenceParams {
    /// Weights for the feeling, decision and preference components.
    pub weights: [f64; 3],
    pub threshold: f64,
}

impl Default for EquivalenceParams {
    fn default() -> Self {
        EquivalenceParams {
            weights: [1.0, 1.0, 1.0],
            threshold: 1.0,
        }
    }
}

const SCORE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub score: f64,
    pub similar: bool,
    /// Feeling, decision and preference-rank overlaps.
    pub components: [f64; 3],
}

fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

fn interval_overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    let inter = (a.1.min(b.1) - a.0.max(b.0)).max(0.0);
    let union = (a.1 - a.0) + (b.1 - b.0) - inter;
    if union <= 0.0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    inter / union
}

/// Similarity of symbol `a` (owned by one organism) and `b` (owned by
/// another): a weighted mean of feeling overlap, correct-decision overlap
/// and overlap of normalised preference-rank intervals.
pub fn rough_equivalence(a: (&Organism, &Task), b: (&Organism, &Task), params: &EquivalenceParams) -> Equivalence {
    let (oa, ta) = a;
    let (ob, tb) = b;
    let va = oa.language().vocabulary();
    let vb = ob.language().vocabulary();
    if !va.ids().any(|id| vb.contains(id)) {
        return Equivalence {
            score: 0.0,
            similar: false,
            components: [0.0; 3],
        };
    }
    let feeling = |o: &Organism, t: &Task| -> BTreeSet<ProgramId> {
        o.language().ids(o.feeling_of(t)).into_iter().collect()
    };
    let decisions = |t: &Task| -> BTreeSet<Vec<ProgramId>> { t.decision_ids().into_iter().collect() };
    let components = [
        jaccard(&feeling(oa, ta), &feeling(ob, tb)),
        jaccard(&decisions(ta), &decisions(tb)),
        interval_overlap(oa.preference_tier_of(ta), ob.preference_tier_of(tb)),
    ];
    let total: f64 = params.weights.iter().sum();
    let score = if total > 0.0 {
        params
            .weights
            .iter()
            .zip(components)
            .map(|(w, c)| w * c)
            .sum::<f64>()
            / total
    } else {
        0.0
    };
    Equivalence {
        score,
        similar: score + SCORE_EPSILON >= params.threshold,
        components,
    }
}

/// One aligned step of an organism's decision trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    /// Situation at hand, in the traced organism's language.
    pub situation: usize,
    pub decision: Option<usize>,
    /// The other organism's decision applied at this step, if any.
    pub intervention: Option<Vec<ProgramId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffectStep {
    pub step: usize,
    /// d: decision without the intervention.
    pub baseline: Option<usize>,
    /// c: the other's decision.
    pub intervention: Vec<ProgramId>,
    /// g: decision actually made.
    pub actual: usize,
}

#[derive(Debug, Clone)]
pub struct AffectRecord {
    pub affected: String,
    pub affecting: String,
    pub steps: Vec<AffectStep>,
    /// ζ: situations tagged with the identity marker, and the decisions made.
    pub experience: Task,
}

/// The statement with `marker` removed; unchanged if the marker is absent
/// or unknown to the language.
pub fn strip_marker(lang: &Language, stmt: usize, marker: ProgramId) -> usize {
    match lang.vocabulary().position(marker) {
        None => stmt,
        Some(pos) => {
            let stripped = Statement(lang.statement(stmt).0 & !(1 << pos));
            lang.index_of(stripped).unwrap_or(stmt)
        }
    }
}

fn with_marker(o: &Organism, stmt: usize, pos: usize) -> Result<usize> {
    let s = o.language().statement(stmt).union(Statement(1 << pos));
    o.language().index_of(s).ok_or_else(|| {
        Error::domain(format!(
            "identity marker cannot be added to {:?}: unsatisfiable",
            o.language().ids(stmt)
        ))
    })
}

/// ζ built from (situation, decision) pairs of affected steps, both tagged
/// with the marker.
pub fn affect_experience(
    o: &Organism,
    pairs: &[(usize, usize)],
    marker: ProgramId,
    mode: AffectDecisions,
) -> Result<Task> {
    let pos = o
        .language()
        .vocabulary()
        .position(marker)
        .ok_or_else(|| Error::domain(format!("{} cannot perceive marker {}", o.name(), marker.0)))?;
    let mut situations = BitSet::new();
    let mut outcomes = BitSet::new();
    for &(s, g) in pairs {
        situations.insert(with_marker(o, s, pos)?);
        outcomes.insert(with_marker(o, g, pos)?);
    }
    let lang = o.language();
    match mode {
        AffectDecisions::Exact => Task::new(lang, situations, outcomes),
        AffectDecisions::UpwardClosed => Task::closed(lang, situations, &outcomes),
    }
}

/// Compares a trace with interventions against its counterfactual without
/// them. Returns `None` when no aligned step differs (ignoring the marker)
/// or when `o` cannot perceive the marker at all.
pub fn detect_affect(
    o: &Organism,
    affecting: &str,
    with: &[TraceStep],
    without: &[TraceStep],
    marker: ProgramId,
    mode: AffectDecisions,
) -> Result<Option<AffectRecord>> {
    if with.len() != without.len() {
        return Err(Error::Protocol(format!(
            "traces are misaligned: {} steps with interventions, {} without",
            with.len(),
            without.len()
        )));
    }
    if !o.language().vocabulary().contains(marker) {
        return Ok(None);
    }
    let mut steps = Vec::new();
    let mut pairs = Vec::new();
    for (i, (w, b)) in with.iter().zip(without).enumerate() {
        let (Some(c), Some(g)) = (&w.intervention, w.decision) else {
            continue;
        };
        let plain_g = strip_marker(o.language(), g, marker);
        let plain_d = b.decision.map(|d| strip_marker(o.language(), d, marker));
        if Some(plain_g) == plain_d {
            continue;
        }
        pairs.push((w.situation, g));
        steps.push(AffectStep {
            step: i,
            baseline: b.decision,
            intervention: c.clone(),
            actual: g,
        });
    }
    if steps.is_empty() {
        return Ok(None);
    }
    let experience = affect_experience(o, &pairs, marker, mode)?;
    Ok(Some(AffectRecord {
        affected: o.name().to_string(),
        affecting: affecting.to_string(),
        steps,
        experience,
    }))
}

#[derive(Debug, Clone)]
pub struct IntentAscription {
    /// Γ: tasks sharing a model with ζ, canonical order.
    pub candidates: Vec<Task>,
    /// Indices into `candidates` of the preference-maximal ones.
    pub preferred: Vec<usize>,
    /// Index into `candidates` of γ.
    pub ascribed: usize,
    /// `None` when the preferred candidates are all outside the symbol system.
    pub preference_value: Option<u64>,
    pub maximand_value: usize,
    pub coverage: Coverage,
}

impl IntentAscription {
    pub fn ascribed_task(&self) -> &Task {
        &self.candidates[self.ascribed]
    }
}

/// γ: among tasks sharing a model with ζ, those `o` prefers most, and of
/// those the one with the largest maximand (canonical tiebreak). Tasks
/// outside the symbol system rank below every symbol, so any strictly
/// increasing rescaling of the preferences leaves γ unchanged.
pub fn ascribe_intent(o: &Organism, zeta: &Task, caps: TaskCaps, maximand: Maximand) -> Result<IntentAscription> {
    if !zeta.language().same_as(o.language()) {
        return Err(Error::domain("affect experience is over a different language"));
    }
    if !zeta.has_models() {
        return Err(Error::NoExplanation(
            "the affect experience has no models, so no task explains it".into(),
        ));
    }
    let (candidates, coverage) = tasks_sharing_models(o.language(), zeta.models(), caps);
    let prefs: Vec<Option<u64>> = candidates.iter().map(|t| o.preference_of(t)).collect();
    let best = prefs.iter().copied().max().ok_or_else(|| {
        Error::ResourceLimit {
            what: "no ascription candidates within the task cap".into(),
            cap: caps.max_tasks as u64,
        }
    })?;
    let preferred: Vec<usize> = (0..candidates.len()).filter(|&i| prefs[i] == best).collect();
    let mut ascribed = preferred[0];
    let mut top = maximand.value(&candidates[ascribed]);
    for &i in &preferred[1..] {
        let v = maximand.value(&candidates[i]);
        if v > top {
            top = v;
            ascribed = i;
        }
    }
    Ok(IntentAscription {
        candidates,
        preferred,
        ascribed,
        preference_value: best,
        maximand_value: top,
        coverage,
    })
}

/// Interpretation that starts from a recognised intent γ: only signified
/// symbols sharing a model with γ compete; preference decides, then
/// closeness to γ, then `tiebreak`.
pub fn recognition_conditioned_interpret(
    o: &Organism,
    situation: usize,
    gamma: &Task,
    params: &EquivalenceParams,
    tiebreak: &mut Tiebreak,
) -> Result<Option<Interpretation>> {
    let sig = o.signified(situation)?;
    let allowed: Vec<usize> = sig
        .signified
        .into_iter()
        .filter(|&i| o.symbol(i).shares_model_with(gamma.models()))
        .collect();
    if allowed.is_empty() {
        return Ok(None);
    }
    let preferred = o.preferred(&allowed);
    let scores: Vec<f64> = preferred
        .iter()
        .map(|&i| rough_equivalence((o, o.symbol(i)), (o, gamma), params).score)
        .collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let closest: Vec<usize> = preferred
        .iter()
        .zip(&scores)
        .filter(|(_, &s)| s == best)
        .map(|(&i, _)| i)
        .collect();
    let symbol = tiebreak
        .pick(&closest)
        .ok_or_else(|| Error::Internal("empty argmax over a non-empty set".into()))?;
    Ok(Some(Interpretation {
        symbol,
        decision: o.decide(situation, symbol, tiebreak),
    }))
}

/// Which interpretation the listener actually acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ListenerMode {
    Plain,
    #[default]
    RecognitionConditioned,
}

pub struct MeaningInputs<'a> {
    pub speaker: &'a Organism,
    /// α, the symbol the speaker means (a task in the speaker's language).
    pub intent: &'a Task,
    pub listener: &'a Organism,
    /// The listener's situation at hand after the speaker's decision.
    pub situation: usize,
    /// ζ, or `None` when the listener was not affected.
    pub affect: Option<&'a Task>,
    pub mode: ListenerMode,
}

#[derive(Debug, Clone)]
pub struct MeaningReport {
    pub cond1: bool,
    pub cond2: bool,
    pub cond3: bool,
    pub meant: bool,
    pub interpretation: Option<Interpretation>,
    pub conditioned: Option<Interpretation>,
    pub recognised: Option<Task>,
    pub interpretation_score: f64,
    pub recognition_score: f64,
    pub coverage: Coverage,
}

/// Checks the three conditions under which the speaker means α by its decision:
/// the listener interprets with ω ≈ α, recognises the intent as γ ≈ α, and
/// ω is what recognition-conditioned interpretation yields.
pub fn gricean_meaning_check(
    inputs: &MeaningInputs<'_>,
    params: &EquivalenceParams,
    caps: TaskCaps,
    maximand: Maximand,
    tiebreak: &mut Tiebreak,
) -> Result<MeaningReport> {
    let zeta = inputs
        .affect
        .ok_or_else(|| Error::NotApplicable("the listener was not affected".into()))?;
    let o = inputs.listener;
    let mut coverage = Coverage::default();
    let recognised = match ascribe_intent(o, zeta, caps, maximand) {
        Ok(a) => {
            coverage = a.coverage;
            Some(a.ascribed_task().clone())
        }
        Err(Error::NoExplanation(_)) => None,
        Err(e) => return Err(e),
    };
    let conditioned = match &recognised {
        Some(g) => recognition_conditioned_interpret(o, inputs.situation, g, params, &mut tiebreak.clone())?,
        None => None,
    };
    let interpretation = match inputs.mode {
        ListenerMode::Plain => o.interpret(inputs.situation, tiebreak)?,
        ListenerMode::RecognitionConditioned => match conditioned {
            Some(c) => Some(c),
            None => o.interpret(inputs.situation, tiebreak)?,
        },
    };
    let speaker = (inputs.speaker, inputs.intent);
    let interpretation_eq = interpretation.map(|i| rough_equivalence((o, o.symbol(i.symbol)), speaker, params));
    let recognition_eq = recognised
        .as_ref()
        .map(|g| rough_equivalence((o, g), speaker, params));
    let cond1 = interpretation_eq.is_some_and(|e| e.similar);
    let cond2 = recognition_eq.is_some_and(|e| e.similar);
    let cond3 = matches!((interpretation, conditioned), (Some(a), Some(b)) if a.symbol == b.symbol);
    Ok(MeaningReport {
        cond1,
        cond2,
        cond3,
        meant: cond1 && cond2 && cond3,
        interpretation,
        conditioned,
        recognised,
        interpretation_score: interpretation_eq.map_or(0.0, |e| e.score),
        recognition_score: recognition_eq.map_or(0.0, |e| e.score),
        coverage,
    })
}
