//! Seed sweeps built on episodes, and the weak-versus-arbitrary
//! representation comparison.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::env::{Language, ProgramId};
use crate::error::{Error, Result};
use crate::organism::Organism;
use crate::scenario::{Ids, Scenario, TaskSpec};
use crate::sim::{run_episode, run_episode_with, step_rng, EpisodeReport, VERSION};
use crate::task::{tasks_sharing_models, Coverage, Task, TaskCaps, TaskView};

const PERMUTE_SALT: u64 = 101;
const RENAME_SALT: u64 = 102;
const HALL_SALT: u64 = 103;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub x: f64,
    pub mean: f64,
    /// Sample standard deviation; 0 when fewer than two values.
    pub stddev: f64,
    /// Seeds that produced a value.
    pub n: usize,
    /// Per seed, in seed order; `None` when the metric was undefined.
    pub values: Vec<Option<f64>>,
}

impl SweepPoint {
    pub fn from_values(x: f64, values: Vec<Option<f64>>) -> SweepPoint {
        let present: Vec<f64> = values.iter().flatten().copied().collect();
        let n = present.len();
        let mean = if n > 0 { present.iter().sum::<f64>() / n as f64 } else { 0.0 };
        let stddev = if n > 1 {
            (present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        SweepPoint {
            x,
            mean,
            stddev,
            n,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub version: String,
    pub experiment: String,
    pub metric: String,
    pub seeds: Vec<u64>,
    pub caps: TaskCaps,
    pub exhaustive: bool,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    /// Rows `x,mean,stddev,n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,mean,stddev,n\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p.x, p.mean, p.stddev, p.n));
        }
        out
    }
}

/// Which part of the listener is scrambled in a similarity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dimension {
    #[default]
    Preferences,
    Feelings,
}

/// Shuffles the values at a random `fraction` of positions among themselves.
pub fn partial_shuffle<T: Clone, R: Rng>(values: &[T], fraction: f64, rng: &mut R) -> Vec<T> {
    let mut out = values.to_vec();
    let m = ((values.len() as f64) * fraction.clamp(0.0, 1.0)).round() as usize;
    let mut positions: Vec<usize> = (0..values.len()).collect();
    positions.shuffle(rng);
    positions.truncate(m);
    let mut picked: Vec<T> = positions.iter().map(|&i| values[i].clone()).collect();
    picked.shuffle(rng);
    for (&i, v) in positions.iter().zip(picked) {
        out[i] = v;
    }
    out
}

/// The listener of step 0: the second organism.
fn listener_index(organisms: &[Organism]) -> Result<usize> {
    if organisms.len() < 2 {
        return Err(Error::domain("the experiment needs at least two organisms"));
    }
    Ok(1)
}

pub fn scramble(o: &Organism, dimension: Dimension, fraction: f64, seed: u64) -> Result<Organism> {
    let mut rng = step_rng(seed, 0, PERMUTE_SALT);
    match dimension {
        Dimension::Preferences => o.with_preferences(partial_shuffle(o.preferences(), fraction, &mut rng)),
        Dimension::Feelings => o.with_feelings(partial_shuffle(o.feelings(), fraction, &mut rng)),
    }
}

fn with_seed(scn: &Scenario, seed: u64) -> Scenario {
    let mut s = scn.clone();
    s.seed = seed;
    s
}

/// Match rate as the listener's preferences (or feelings) are progressively
/// shuffled. x is the shuffled fraction.
pub fn similarity_sweep(scn: &Scenario, dimension: Dimension, fractions: &[f64], seeds: &[u64]) -> Result<SweepReport> {
    let built = scn.build()?;
    let li = listener_index(&built.organisms)?;
    let mut exhaustive = true;
    let mut points = Vec::new();
    for &f in fractions {
        let runs: Vec<Result<EpisodeReport>> = seeds
            .par_iter()
            .map(|&seed| {
                let mut organisms = built.organisms.clone();
                organisms[li] = scramble(&organisms[li], dimension, f, seed)?;
                run_episode_with(&with_seed(scn, seed), &organisms)
            })
            .collect();
        let mut values = Vec::new();
        for r in runs {
            let r = r?;
            exhaustive &= r.exhaustive;
            values.push(r.metrics.match_rate);
        }
        points.push(SweepPoint::from_values(f, values));
    }
    Ok(SweepReport {
        version: VERSION.to_string(),
        experiment: format!("similarity-sweep/{}", match dimension {
            Dimension::Preferences => "preferences",
            Dimension::Feelings => "feelings",
        }),
        metric: "match_rate".into(),
        seeds: seeds.to_vec(),
        caps: scn.caps,
        exhaustive,
        points,
    })
}

/// Copy of `scn` in which the listener's vocabulary shares only `overlap`
/// of the speaker-visible programs: the rest are replaced by fresh programs
/// with the same truth tables. At zero overlap identity markers are replaced
/// too, so no program id is shared.
pub fn with_vocabulary_overlap(scn: &Scenario, overlap: f64, seed: u64) -> Result<Scenario> {
    let li = 1;
    if scn.organisms.len() < 2 {
        return Err(Error::domain("the experiment needs at least two organisms"));
    }
    let markers: Vec<ProgramId> = scn.organisms.iter().filter_map(|o| o.identity).collect();
    let listener = &scn.organisms[li];
    let vocab: Vec<ProgramId> = match &listener.vocabulary {
        Some(v) => v.clone(),
        None => scn.programs.keys().map(|&i| ProgramId(i)).collect(),
    };
    let plain: Vec<ProgramId> = vocab.iter().copied().filter(|p| !markers.contains(p)).collect();
    let keep = ((plain.len() as f64) * overlap.clamp(0.0, 1.0)).round() as usize;
    let mut order = plain.clone();
    order.shuffle(&mut step_rng(seed, 0, RENAME_SALT));
    let mut renamed: Vec<ProgramId> = order[keep..].to_vec();
    if keep == 0 {
        renamed.extend(vocab.iter().copied().filter(|p| markers.contains(p)));
    }

    let mut out = scn.clone();
    let everything: Vec<ProgramId> = scn.programs.keys().map(|&i| ProgramId(i)).collect();
    for o in &mut out.organisms {
        o.vocabulary.get_or_insert_with(|| everything.clone());
    }
    let mut next = scn.programs.keys().max().map_or(0, |m| m + 1);
    let mut map: BTreeMap<ProgramId, ProgramId> = BTreeMap::new();
    renamed.sort();
    for p in renamed {
        let fresh = ProgramId(next);
        next += 1;
        out.programs.insert(fresh.0, scn.programs[&p.0].clone());
        map.insert(p, fresh);
    }
    let rename = |ids: &Ids| -> Ids {
        let mut v: Ids = ids.iter().map(|p| *map.get(p).unwrap_or(p)).collect();
        v.sort();
        v
    };
    let rename_task = |t: &TaskSpec| TaskSpec {
        situations: t.situations.iter().map(rename).collect(),
        decisions: t.decisions.iter().map(rename).collect(),
        ..t.clone()
    };
    // The world presents both names of a renamed program.
    let both = |ids: &Ids| -> Ids {
        let mut v = ids.clone();
        v.extend(ids.iter().filter_map(|p| map.get(p)));
        v.sort();
        v
    };
    for w in &mut out.world {
        w.situation = both(&w.situation);
        let renamed_outcomes: Vec<Ids> = w.decisions.iter().filter(|d| d.iter().any(|p| map.contains_key(p))).map(rename).collect();
        w.decisions.extend(renamed_outcomes);
    }
    let l = &mut out.organisms[li];
    l.vocabulary = Some(rename(&vocab));
    l.identity = l.identity.map(|p| *map.get(&p).unwrap_or(&p));
    l.history = l.history.as_ref().map(rename_task);
    if let crate::scenario::ExperienceSpec::Explicit(list) = &mut l.experiences {
        *list = list.iter().map(rename_task).collect();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncomprehensibilityPoint {
    pub overlap: f64,
    pub score: SweepPoint,
    pub match_rate: SweepPoint,
    pub meaning_rate: SweepPoint,
    /// Affected steps where the listener could ascribe an intent.
    pub ascription_rate: SweepPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncomprehensibilityReport {
    pub version: String,
    pub seeds: Vec<u64>,
    pub caps: TaskCaps,
    pub exhaustive: bool,
    pub points: Vec<IncomprehensibilityPoint>,
}

impl IncomprehensibilityReport {
    /// The mean-equivalence curve over overlap.
    pub fn score_sweep(&self) -> SweepReport {
        SweepReport {
            version: self.version.clone(),
            experiment: "incomprehensibility".into(),
            metric: "mean_score".into(),
            seeds: self.seeds.clone(),
            caps: self.caps,
            exhaustive: self.exhaustive,
            points: self.points.iter().map(|p| p.score.clone()).collect(),
        }
    }
}

/// Mean equivalence of the listener's interpretation to the speaker's
/// intent as vocabulary overlap varies.
pub fn run_incomprehensibility(scn: &Scenario, overlaps: &[f64], seeds: &[u64]) -> Result<IncomprehensibilityReport> {
    let mut exhaustive = true;
    let mut points = Vec::new();
    for &overlap in overlaps {
        let runs: Vec<Result<EpisodeReport>> = seeds
            .par_iter()
            .map(|&seed| run_episode(&with_vocabulary_overlap(&with_seed(scn, seed), overlap, seed)?))
            .collect();
        let (mut score, mut matched, mut meant, mut ascribed) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for r in runs {
            let r = r?;
            exhaustive &= r.exhaustive;
            score.push(r.metrics.mean_score);
            matched.push(r.metrics.match_rate);
            meant.push(r.metrics.meaning_rate);
            let recognised = r.records.iter().filter(|s| s.affected && s.recognised.is_some()).count();
            ascribed.push((r.metrics.affected > 0).then(|| recognised as f64 / r.metrics.affected as f64));
        }
        points.push(IncomprehensibilityPoint {
            overlap,
            score: SweepPoint::from_values(overlap, score),
            match_rate: SweepPoint::from_values(overlap, matched),
            meaning_rate: SweepPoint::from_values(overlap, meant),
            ascription_rate: SweepPoint::from_values(overlap, ascribed),
        });
    }
    Ok(IncomprehensibilityReport {
        version: VERSION.to_string(),
        seeds: seeds.to_vec(),
        caps: scn.caps,
        exhaustive,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallParams {
    pub trials: usize,
    pub seed: u64,
    pub caps: TaskCaps,
    /// Largest parent situation set sampled; sizes are uniform in 1..=this.
    pub max_parent_situations: usize,
}

impl Default for HallParams {
    fn default() -> Self {
        HallParams {
            trials: 100,
            seed: 0,
            caps: TaskCaps::default(),
            max_parent_situations: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HallTrial {
    pub parent: TaskView,
    pub child: TaskView,
    pub held_out: Vec<Ids>,
    pub candidates: usize,
    pub weak: TaskView,
    pub weak_accuracy: f64,
    pub random: TaskView,
    pub random_accuracy: f64,
    /// Mean accuracy over every consistent candidate.
    pub consistent_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HallReport {
    pub version: String,
    pub seed: u64,
    pub caps: TaskCaps,
    pub exhaustive: bool,
    /// Samples rejected because nothing could be held out.
    pub discarded: usize,
    pub weak: SweepPoint,
    pub random: SweepPoint,
    pub consistent: SweepPoint,
    pub trials: Vec<HallTrial>,
}

/// Fraction of `held_out` situations on which `symbol`'s models carve out
/// exactly the parent's decisions: Z_s ∩ Z_{M_α} = Z_s ∩ D.
pub fn held_out_accuracy(lang: &Language, parent: &Task, held_out: &[usize], symbol: &Task) -> f64 {
    if held_out.is_empty() {
        return 0.0;
    }
    let z_m = symbol.model_extension();
    let hits = held_out
        .iter()
        .filter(|&&s| {
            let zs = lang.extension(s);
            zs.intersection(&z_m) == zs.intersection(parent.decisions())
        })
        .count();
    hits as f64 / held_out.len() as f64
}

/// The consistent candidate with the largest |D|, canonical tiebreak.
pub fn weakest(candidates: &[Task]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, t) in candidates.iter().enumerate() {
        if best.is_none_or(|b| t.weakness() > candidates[b].weakness()) {
            best = Some(i);
        }
    }
    best
}

fn hall_trial(lang: &Arc<Language>, params: &HallParams, trial: usize, discarded: &mut usize) -> Result<(HallTrial, Coverage)> {
    let mut rng = step_rng(params.seed, trial as u64, HALL_SALT);
    let all: Vec<usize> = (0..lang.len()).collect();
    if lang.len() < 2 {
        return Err(Error::domain("the language needs at least two statements"));
    }
    loop {
        let k = rng.random_range(1..=params.max_parent_situations.max(1));
        let situations: BitSet = all.choose_multiple(&mut rng, k.min(lang.len())).copied().collect();
        if situations.len() < 2 {
            *discarded += 1;
            continue;
        }
        let space = lang.extension_of_set(&situations);
        let mut outcomes: Vec<BitSet> = (0..lang.len()).map(|l| lang.restrict_to_extension(&space, l)).collect();
        outcomes.sort();
        outcomes.dedup();
        let d = outcomes.swap_remove(rng.random_range(0..outcomes.len()));
        let parent = Task::new(lang, situations.clone(), d)?;
        let list: Vec<usize> = situations.iter().collect();
        let reveal = rng.random_range(1..list.len());
        let mut shuffled = list.clone();
        shuffled.shuffle(&mut rng);
        let child_s: BitSet = shuffled[..reveal].iter().copied().collect();
        let held_out: Vec<usize> = list.iter().copied().filter(|s| !child_s.contains(*s)).collect();
        let child_d = parent.decisions().intersection(&lang.extension_of_set(&child_s));
        let child = Task::new(lang, child_s, child_d)?;
        let (candidates, coverage) = tasks_sharing_models(lang, child.models(), params.caps);
        let w = weakest(&candidates).ok_or_else(|| Error::Internal("a child built from a model has candidates".into()))?;
        let r = rng.random_range(0..candidates.len());
        let score = |t: &Task| held_out_accuracy(lang, &parent, &held_out, t);
        let consistent = candidates.iter().map(score).sum::<f64>() / candidates.len() as f64;
        let trial = HallTrial {
            parent: parent.view(),
            child: child.view(),
            held_out: held_out.iter().map(|&s| lang.ids(s)).collect(),
            candidates: candidates.len(),
            weak: candidates[w].view(),
            weak_accuracy: score(&candidates[w]),
            random: candidates[r].view(),
            random_accuracy: score(&candidates[r]),
            consistent_accuracy: consistent,
        };
        return Ok((trial, coverage));
    }
}

/// Samples parents, reveals a child of each, and scores the weakest
/// consistent symbol against a random consistent one on the held-out
/// situations.
pub fn run_hall_of_mirrors(lang: &Arc<Language>, params: &HallParams) -> Result<HallReport> {
    if params.trials == 0 {
        return Err(Error::domain("at least one trial is needed"));
    }
    let results: Vec<Result<(HallTrial, Coverage, usize)>> = (0..params.trials)
        .into_par_iter()
        .map(|t| {
            let mut discarded = 0;
            hall_trial(lang, params, t, &mut discarded).map(|(trial, c)| (trial, c, discarded))
        })
        .collect();
    let mut trials = Vec::new();
    let mut coverage = Coverage::default();
    let mut discarded = 0;
    for r in results {
        let (trial, c, d) = r?;
        coverage = coverage.merge(c);
        discarded += d;
        trials.push(trial);
    }
    let col = |f: fn(&HallTrial) -> f64| trials.iter().map(|t| Some(f(t))).collect::<Vec<_>>();
    Ok(HallReport {
        version: VERSION.to_string(),
        seed: params.seed,
        caps: params.caps,
        exhaustive: coverage.exhaustive(),
        discarded,
        weak: SweepPoint::from_values(0.0, col(|t| t.weak_accuracy)),
        random: SweepPoint::from_values(1.0, col(|t| t.random_accuracy)),
        consistent: SweepPoint::from_values(2.0, col(|t| t.consistent_accuracy)),
        trials,
    })
}
