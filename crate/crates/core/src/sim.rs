//! Seeded episodes. Organisms take turns: at step t organism t mod n speaks
//! and organism t+1 mod n listens. A speaker may intervene by deciding an
//! utterance tagged with its identity marker; the listener's situation at
//! hand then becomes what it perceives of that utterance.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::env::{ProgramId, Statement};
use crate::error::{Error, Result};
use crate::interaction::{
    affect_experience, ascribe_intent, detect_affect, gricean_meaning_check, recognition_conditioned_interpret,
    rough_equivalence, strip_marker, ListenerMode, MeaningInputs, TraceStep,
};
use crate::organism::{Interpretation, Organism};
use crate::scenario::{Ids, Payoffs, Scenario, Strategy, WorldEntry};
use crate::task::{Coverage, Task, TaskCaps, TaskView};
use crate::tiebreak::{Tiebreak, TiebreakPolicy};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Move {
    Cooperate,
    Defect,
}

impl Strategy {
    /// This step's move given the partner's previous one.
    pub fn play(self, partner_last: Option<Move>) -> Move {
        match self {
            Strategy::Cooperate => Move::Cooperate,
            Strategy::Manipulate => Move::Defect,
            Strategy::TitForTat => partner_last.unwrap_or(Move::Cooperate),
        }
    }
}

impl Payoffs {
    pub fn dilemma(&self, own: Move, partner: Move) -> i64 {
        match (own, partner) {
            (Move::Cooperate, Move::Cooperate) => self.reward,
            (Move::Defect, Move::Cooperate) => self.temptation,
            (Move::Cooperate, Move::Defect) => self.sucker,
            (Move::Defect, Move::Defect) => self.punishment,
        }
    }
}

/// Independent stream for one (seed, step, purpose) triple.
pub fn step_rng(seed: u64, step: u64, salt: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&step.to_le_bytes());
    key[16..24].copy_from_slice(&salt.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn step_tiebreak(policy: TiebreakPolicy, step: u64, salt: u64) -> Tiebreak {
    match policy {
        TiebreakPolicy::Canonical => Tiebreak::Canonical,
        TiebreakPolicy::Seeded(seed) => Tiebreak::Seeded(step_rng(seed, step, salt)),
    }
}

const WORLD_SALT: u64 = 0;
const SPEAKER_SALT: u64 = 1;
const LISTENER_SALT: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeaningFlags {
    pub cond1: bool,
    pub cond2: bool,
    pub cond3: bool,
    pub meant: bool,
    pub recognition_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub speaker: String,
    pub listener: String,
    pub world_situation: Ids,
    pub speaker_move: Move,
    pub listener_move: Move,
    /// α, when the speaker intervened.
    pub intent: Option<TaskView>,
    pub utterance: Option<Ids>,
    pub speaker_decision: Option<Ids>,
    /// d: the listener's decision had the speaker stayed silent.
    pub baseline: Option<Ids>,
    /// The listener's situation at hand after the utterance.
    pub heard: Option<Ids>,
    /// g: the listener's plain decision for `heard`.
    pub plain: Option<Ids>,
    pub affected: bool,
    /// γ, when the listener was affected and could explain it.
    pub recognised: Option<TaskView>,
    /// ω: the symbol the listener acted on.
    pub listener_symbol: Option<TaskView>,
    pub listener_decision: Option<Ids>,
    /// Rough equivalence of ω and α, when the speaker intervened.
    pub interpretation_score: Option<f64>,
    pub matched: Option<bool>,
    /// `None` when the check does not apply (the listener was not affected).
    pub meaning: Option<MeaningFlags>,
    pub speaker_correct: bool,
    pub listener_correct: bool,
    pub speaker_payoff: i64,
    pub listener_payoff: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub steps: usize,
    pub spoken: usize,
    pub affected: usize,
    pub matched: usize,
    pub meant: usize,
    /// matched / spoken.
    pub match_rate: Option<f64>,
    /// meant / affected.
    pub meaning_rate: Option<f64>,
    /// Mean interpretation score over spoken steps.
    pub mean_score: Option<f64>,
    pub payoffs: BTreeMap<String, i64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl Metrics {
    pub fn from_records(names: &[String], records: &[StepRecord]) -> Metrics {
        let spoken = records.iter().filter(|r| r.utterance.is_some()).count();
        let affected = records.iter().filter(|r| r.affected).count();
        let matched = records.iter().filter(|r| r.matched == Some(true)).count();
        let meant = records
            .iter()
            .filter(|r| r.meaning.as_ref().is_some_and(|m| m.meant))
            .count();
        let score_sum: f64 = records.iter().filter_map(|r| r.interpretation_score).sum();
        let mut payoffs: BTreeMap<String, i64> = names.iter().map(|n| (n.clone(), 0)).collect();
        for r in records {
            *payoffs.entry(r.speaker.clone()).or_default() += r.speaker_payoff;
            *payoffs.entry(r.listener.clone()).or_default() += r.listener_payoff;
        }
        Metrics {
            steps: records.len(),
            spoken,
            affected,
            matched,
            meant,
            match_rate: ratio(matched, spoken),
            meaning_rate: ratio(meant, affected),
            mean_score: (spoken > 0).then(|| score_sum / spoken as f64),
            payoffs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeReport {
    pub version: String,
    pub seed: u64,
    pub caps: TaskCaps,
    pub exhaustive: bool,
    pub coverage: Coverage,
    pub records: Vec<StepRecord>,
    pub metrics: Metrics,
    /// Final ζ for every (listener, speaker) pair that was ever affected.
    pub affects: Vec<AffectSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffectSummary {
    pub listener: String,
    pub speaker: String,
    pub affected_steps: usize,
    pub experience: TaskView,
}

/// What a cooperating speaker settles on.
struct Plan {
    utterance: usize,
    intent: Task,
    heard: usize,
    plain: usize,
}

fn marked(k: &Organism, stmt: usize, marker: ProgramId) -> Option<usize> {
    let lang = k.language();
    let pos = lang.vocabulary().position(marker)?;
    lang.index_of(lang.statement(stmt).union(Statement(1 << pos)))
}

/// A cooperating speaker simulates the listener with its own quintuple and
/// utters the first candidate decision it predicts will be meant. The intent
/// it then holds is the one it predicts the listener will recognise.
fn plan_utterance(
    scn: &Scenario,
    k: &Organism,
    predicted: &[(usize, usize)],
    situation: usize,
    tb: &mut Tiebreak,
    coverage: &mut Coverage,
) -> Result<Option<Plan>> {
    let marker = k.identity().ok_or_else(|| Error::domain(format!("{} has no identity program", k.name())))?;
    let Some(own) = k.interpret(situation, tb)? else {
        return Ok(None);
    };
    let lang = k.language();
    let options = lang
        .extension(situation)
        .intersection(&k.symbol(own.symbol).model_extension());
    let markers: Vec<ProgramId> = scn.organisms.iter().filter_map(|o| o.identity).collect();
    let unmarked = |u: &usize| !lang.ids(*u).iter().any(|p| markers.contains(p));
    for u in options.iter().filter(unmarked).take(scn.utterance_cap) {
        let Some(heard) = marked(k, u, marker) else { continue };
        let Some(g) = k.interpret(heard, &mut tb.clone())?.and_then(|i| i.decision) else {
            continue;
        };
        let strip = |s: usize| strip_marker(lang, s, marker);
        if own.decision.map(strip) == Some(strip(g)) {
            continue;
        }
        let mut pairs = predicted.to_vec();
        pairs.push((heard, g));
        let zeta = affect_experience(k, &pairs, marker, scn.affect)?;
        let ascription = match ascribe_intent(k, &zeta, scn.caps, scn.maximand) {
            Ok(a) => a,
            Err(Error::NoExplanation(_)) => continue,
            Err(e) => return Err(e),
        };
        *coverage = coverage.merge(ascription.coverage);
        let gamma = ascription.ascribed_task();
        let Some(omega) = recognition_conditioned_interpret(k, heard, gamma, &scn.equivalence, &mut tb.clone())? else {
            continue;
        };
        if rough_equivalence((k, k.symbol(omega.symbol)), (k, gamma), &scn.equivalence).similar {
            return Ok(Some(Plan {
                utterance: u,
                intent: gamma.clone(),
                heard,
                plain: g,
            }));
        }
    }
    Ok(None)
}

fn correct(world: &WorldEntry, decision: Option<&Ids>, markers: &[ProgramId]) -> bool {
    let Some(ids) = decision else { return false };
    let plain: Vec<ProgramId> = ids.iter().copied().filter(|p| !markers.contains(p)).collect();
    world
        .decisions
        .iter()
        .any(|outcome| outcome.iter().all(|p| plain.contains(p)))
}

#[derive(Default)]
struct PairState {
    with: Vec<TraceStep>,
    without: Vec<TraceStep>,
    /// The speaker's own record of (utterance situation, predicted decision).
    predicted: Vec<(usize, usize)>,
}

pub fn run_episode(scn: &Scenario) -> Result<EpisodeReport> {
    let built = scn.build()?;
    run_episode_with(scn, &built.organisms)
}

/// Runs the scenario's schedule with the given organisms in place of the
/// ones it describes (strategies still come from the scenario).
pub fn run_episode_with(scn: &Scenario, organisms: &[Organism]) -> Result<EpisodeReport> {
    let n = organisms.len();
    let names: Vec<String> = organisms.iter().map(|o| o.name().to_string()).collect();
    let mut coverage = organisms
        .iter()
        .fold(Coverage::default(), |c, o| c.merge(o.symbol_coverage()));
    if scn.steps > 0 {
        if n < 2 {
            return Err(Error::domain("an episode needs at least two organisms"));
        }
        if let Some(o) = organisms.iter().find(|o| o.identity().is_none()) {
            return Err(Error::domain(format!("{} needs an identity program to take part", o.name())));
        }
    }
    let strategies: Vec<Strategy> = names
        .iter()
        .map(|name| {
            scn.organisms
                .iter()
                .find(|s| &s.id == name)
                .map_or(Strategy::Cooperate, |s| s.strategy)
        })
        .collect();
    let markers: Vec<ProgramId> = organisms.iter().filter_map(|o| o.identity()).collect();
    let mut pairs: BTreeMap<(usize, usize), PairState> = BTreeMap::new();
    let mut last_move: Vec<Option<Move>> = vec![None; n];
    let mut records = Vec::with_capacity(scn.steps);

    for t in 0..scn.steps {
        let ctx = format!("step {t}");
        let (ki, oi) = (t % n, (t + 1) % n);
        let (k, o) = (&organisms[ki], &organisms[oi]);
        let k_marker = k.identity().expect("checked above");
        let world = &scn.world[step_rng(scn.seed, t as u64, WORLD_SALT).random_range(0..scn.world.len())];
        let speaker_move = strategies[ki].play(last_move[oi]);
        let listener_move = strategies[oi].play(last_move[ki]);
        let mut speaker_tb = step_tiebreak(scn.tiebreak, t as u64, SPEAKER_SALT);
        let mut listener_tb = step_tiebreak(scn.tiebreak, t as u64, LISTENER_SALT);

        // Speaker.
        let s_k = k.perceive(&world.situation).map_err(|e| e.context(&ctx))?;
        let state = pairs.entry((oi, ki)).or_default();
        let (utterance, intent, speaker_decision) = match speaker_move {
            Move::Cooperate => {
                match plan_utterance(scn, k, &state.predicted, s_k, &mut speaker_tb, &mut coverage)
                    .map_err(|e| e.context(&ctx))?
                {
                    Some(plan) => {
                        state.predicted.push((plan.heard, plan.plain));
                        (Some(plan.utterance), Some(plan.intent), Some(plan.utterance))
                    }
                    None => {
                        let own = k.interpret(s_k, &mut speaker_tb).map_err(|e| e.context(&ctx))?;
                        (None, None, own.and_then(|i| i.decision))
                    }
                }
            }
            Move::Defect => {
                let own = k.interpret(s_k, &mut speaker_tb).map_err(|e| e.context(&ctx))?;
                match own {
                    Some(Interpretation {
                        symbol,
                        decision: Some(u),
                    }) => (Some(u), Some(k.symbol(symbol).clone()), Some(u)),
                    _ => (None, None, None),
                }
            }
        };
        let utterance_ids = utterance.map(|u| k.language().ids(u));

        // Listener.
        let o_lang = o.language();
        let s_o = o.perceive(&world.situation).map_err(|e| e.context(&ctx))?;
        let baseline = o.interpret(s_o, &mut listener_tb.clone()).map_err(|e| e.context(&ctx))?;
        let mut heard = None;
        let mut plain = None;
        let mut affected = false;
        let mut recognised = None;
        let mut meaning = None;
        let mut acted = baseline;
        let mut score = None;
        if let (Some(ids), Some(alpha)) = (&utterance_ids, &intent) {
            let mut with_marker = ids.clone();
            with_marker.push(k_marker);
            let h = o.perceive(&with_marker).map_err(|e| e.context(&ctx))?;
            let g = o.interpret(h, &mut listener_tb.clone()).map_err(|e| e.context(&ctx))?;
            heard = Some(h);
            plain = g;
            acted = g;
            state.with.push(TraceStep {
                situation: h,
                decision: g.and_then(|i| i.decision),
                intervention: Some(ids.clone()),
            });
            state.without.push(TraceStep {
                situation: s_o,
                decision: baseline.and_then(|i| i.decision),
                intervention: None,
            });
            let position = state.with.len() - 1;
            let record = detect_affect(o, k.name(), &state.with, &state.without, k_marker, scn.affect)
                .map_err(|e| e.context(&ctx))?;
            if let Some(record) = record.filter(|r| r.steps.last().is_some_and(|s| s.step == position)) {
                affected = true;
                let mode = match listener_move {
                    Move::Cooperate => ListenerMode::RecognitionConditioned,
                    Move::Defect => ListenerMode::Plain,
                };
                let inputs = MeaningInputs {
                    speaker: k,
                    intent: alpha,
                    listener: o,
                    situation: h,
                    affect: Some(&record.experience),
                    mode,
                };
                let report = gricean_meaning_check(
                    &inputs,
                    &scn.equivalence,
                    scn.caps,
                    scn.maximand,
                    &mut listener_tb,
                )
                .map_err(|e| e.context(&ctx))?;
                coverage = coverage.merge(report.coverage);
                acted = report.interpretation;
                recognised = report.recognised.as_ref().map(Task::view);
                meaning = Some(MeaningFlags {
                    cond1: report.cond1,
                    cond2: report.cond2,
                    cond3: report.cond3,
                    meant: report.meant,
                    recognition_score: report.recognition_score,
                });
            }
            score = Some(
                acted.map_or(0.0, |i| rough_equivalence((o, o.symbol(i.symbol)), (k, alpha), &scn.equivalence).score),
            );
        }
        let matched = score.map(|s| s + 1e-9 >= scn.equivalence.threshold && acted.is_some());

        let speaker_ids = speaker_decision.map(|d| k.language().ids(d));
        let listener_ids = acted.and_then(|i| i.decision).map(|d| o_lang.ids(d));
        let speaker_correct = correct(world, speaker_ids.as_ref(), &markers);
        let listener_correct = correct(world, listener_ids.as_ref(), &markers);
        let bonus = |c: bool| if c { scn.payoffs.bonus } else { 0 };
        records.push(StepRecord {
            step: t,
            speaker: k.name().to_string(),
            listener: o.name().to_string(),
            world_situation: world.situation.clone(),
            speaker_move,
            listener_move,
            intent: intent.as_ref().map(Task::view),
            utterance: utterance_ids,
            speaker_decision: speaker_ids,
            baseline: baseline.and_then(|i| i.decision).map(|d| o_lang.ids(d)),
            heard: heard.map(|h| o_lang.ids(h)),
            plain: plain.and_then(|i| i.decision).map(|d| o_lang.ids(d)),
            affected,
            recognised,
            listener_symbol: acted.map(|i| o.symbol(i.symbol).view()),
            listener_decision: listener_ids,
            interpretation_score: score,
            matched,
            meaning,
            speaker_correct,
            listener_correct,
            speaker_payoff: scn.payoffs.dilemma(speaker_move, listener_move) + bonus(speaker_correct),
            listener_payoff: scn.payoffs.dilemma(listener_move, speaker_move) + bonus(listener_correct),
        });
        last_move[ki] = Some(speaker_move);
        last_move[oi] = Some(listener_move);
    }

    let mut affects = Vec::new();
    for (&(oi, ki), state) in &pairs {
        let (o, k) = (&organisms[oi], &organisms[ki]);
        let marker = k.identity().expect("checked above");
        if let Some(r) = detect_affect(o, k.name(), &state.with, &state.without, marker, scn.affect)? {
            affects.push(AffectSummary {
                listener: o.name().to_string(),
                speaker: k.name().to_string(),
                affected_steps: r.steps.len(),
                experience: r.experience.view(),
            });
        }
    }
    let metrics = Metrics::from_records(&names, &records);
    Ok(EpisodeReport {
        version: VERSION.to_string(),
        seed: scn.seed,
        caps: scn.caps,
        exhaustive: coverage.exhaustive(),
        coverage,
        records,
        metrics,
        affects,
    })
}
