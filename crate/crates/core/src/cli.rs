//! Command-line front end. The binary only parses arguments, calls
//! [`execute`] and maps errors to exit codes.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::env::ProgramId;
use crate::error::{Error, ErrorKind, Result};
use crate::experiments::{run_hall_of_mirrors, run_incomprehensibility, similarity_sweep, Dimension, HallParams, SweepReport};
use crate::interaction::ascribe_intent;
use crate::oracle::{oracle_ascription, oracle_language, oracle_models, OracleTask, Stmt};
use crate::scenario::Scenario;
use crate::sim::{run_episode, EpisodeReport, VERSION};
use crate::task::{Task, TaskCaps};
use crate::tiebreak::Tiebreak;

/// Largest Γ_v the oracle ascription scans in full.
pub const ORACLE_TASK_GUARD: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "meaning", version, about = "Symbols, interpretation and intent between simulated organisms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (YAML).
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Most situations per enumerated candidate task
    #[arg(long, global = true)]
    pub max_situations: Option<usize>,
    /// Most candidate tasks enumerated per query
    #[arg(long, global = true)]
    pub max_tasks: Option<usize>,
    /// Use (or cross-check against) the brute-force reference implementations.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Write sweep data as CSV (x, mean, stddev, n) to this path.
    #[arg(long, global = true)]
    pub emit_plot_data: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the implementable language of the scenario or of one organism.
    Language {
        #[arg(long)]
        organism: Option<String>,
    },
    /// Models of a task named in the scenario.
    Models {
        #[arg(long)]
        task: String,
    },
    /// Interpret a statement (comma-separated program ids) as an organism.
    Interpret {
        #[arg(long)]
        organism: String,
        #[arg(long, allow_hyphen_values = true)]
        statement: String,
    },
    /// Intent the listener ascribes to the speaker.
    Ascribe {
        #[arg(long)]
        listener: String,
        #[arg(long)]
        speaker: String,
        /// Task to use as the affect experience; otherwise the episode is run
        /// and its final affect experience for the pair is used.
        #[arg(long)]
        zeta: Option<String>,
    },
    /// Run the scenario's episode.
    Simulate,
    /// Run a named experiment.
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Weak versus random ascription of a parent task from sampled children
    HallOfMirrors {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Use this organism's language instead of the full one.
        #[arg(long)]
        organism: Option<String>,
        #[arg(long, default_value_t = 3)]
        max_parent_situations: usize,
    },
    /// Interpretation equivalence as vocabulary overlap shrinks
    Incomprehensibility {
        /// Number of consecutive seeds, starting at the resolved seed.
        #[arg(long, default_value_t = 30)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0])]
        overlaps: Vec<f64>,
    },
    /// Twin match rate as the listener's preferences or feelings are shuffled
    SimilaritySweep {
        #[arg(long, default_value_t = 30)]
        seeds: u64,
        #[arg(long, value_enum, default_value_t = DimensionArg::Preferences)]
        dimension: DimensionArg,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 0.75, 1.0])]
        fractions: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DimensionArg {
    Preferences,
    Feelings,
}

/// Everything a run depends on, resolved before execution.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub version: &'static str,
    pub command: String,
    pub scenario: Option<String>,
    pub seed: u64,
    pub caps: TaskCaps,
    pub format: Format,
    pub oracle: bool,
}

/// Rendered report plus optional plot data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub report: String,
    pub plot: Option<String>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Io => 1,
        ErrorKind::Internal => 7,
        ErrorKind::Parse => 3,
        ErrorKind::Domain => 4,
        ErrorKind::ResourceLimit => 5,
        ErrorKind::NotApplicable => 6,
    }
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Language { .. } => "language".into(),
        Command::Models { .. } => "models".into(),
        Command::Interpret { .. } => "interpret".into(),
        Command::Ascribe { .. } => "ascribe".into(),
        Command::Simulate => "simulate".into(),
        Command::Experiment { which } => match which {
            Experiment::HallOfMirrors { .. } => "experiment hall-of-mirrors".into(),
            Experiment::Incomprehensibility { .. } => "experiment incomprehensibility".into(),
            Experiment::SimilaritySweep { .. } => "experiment similarity-sweep".into(),
        },
    }
}

fn load(cli: &Cli) -> Result<(Scenario, RunConfig)> {
    let path = cli
        .scenario
        .as_ref()
        .ok_or_else(|| Error::domain("--scenario is required"))?;
    let mut scn = Scenario::from_path(path)?;
    if let Some(seed) = cli.seed {
        scn.seed = seed;
    }
    if let Some(n) = cli.max_situations {
        scn.caps.max_situations = n;
    }
    if let Some(n) = cli.max_tasks {
        scn.caps.max_tasks = n;
    }
    let config = RunConfig {
        version: VERSION,
        command: command_name(&cli.command),
        scenario: Some(path.display().to_string()),
        seed: scn.seed,
        caps: scn.caps,
        format: cli.format,
        oracle: cli.oracle,
    };
    Ok((scn, config))
}

fn braces(ids: &[ProgramId]) -> String {
    let inner: Vec<String> = ids.iter().map(|p| p.0.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

fn spaced(ids: &[ProgramId]) -> String {
    ids.iter().map(|p| p.0.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_statement(text: &str) -> Result<Vec<ProgramId>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u32>().map(ProgramId).map_err(|e| Error::Parse {
                location: "--statement".into(),
                message: format!("{s:?}: {e}"),
            })
        })
        .collect()
}

fn line<T: Serialize>(out: &mut String, value: &T) {
    out.push_str(&serde_json::to_string(value).expect("reports serialise"));
    out.push('\n');
}

fn summary(config: &RunConfig, exhaustive: bool, extra: Value) -> Value {
    let mut v = json!({
        "summary": {
            "config": config,
            "exhaustive": exhaustive,
        }
    });
    if let (Some(obj), Value::Object(more)) = (v["summary"].as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

/// Runs one command and renders its report.
pub fn execute(cli: &Cli) -> Result<Output> {
    let (scn, config) = load(cli)?;
    match &cli.command {
        Command::Language { organism } => cmd_language(cli, &scn, &config, organism.as_deref()),
        Command::Models { task } => cmd_models(cli, &scn, &config, task),
        Command::Interpret { organism, statement } => cmd_interpret(cli, &scn, &config, organism, statement),
        Command::Ascribe { listener, speaker, zeta } => cmd_ascribe(cli, &scn, &config, listener, speaker, zeta.as_deref()),
        Command::Simulate => cmd_simulate(cli, &scn, &config),
        Command::Experiment { which } => cmd_experiment(cli, &scn, &config, which),
    }
}

fn cmd_language(cli: &Cli, scn: &Scenario, config: &RunConfig, organism: Option<&str>) -> Result<Output> {
    let built = scn.build()?;
    let lang = match organism {
        Some(id) => built.organism(id)?.language().clone(),
        None => built.full.clone(),
    };
    let rows: Vec<Vec<ProgramId>> = if cli.oracle {
        oracle_language(lang.vocabulary())?
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect()
    } else {
        (0..lang.len()).map(|i| lang.ids(i)).collect()
    };
    let mut out = String::new();
    match cli.format {
        Format::Json => {
            for (i, r) in rows.iter().enumerate() {
                line(&mut out, &json!({"index": i, "statement": r}));
            }
            line(&mut out, &summary(config, true, json!({"count": rows.len()})));
        }
        Format::Csv => {
            out.push_str("index,statement\n");
            for (i, r) in rows.iter().enumerate() {
                let _ = writeln!(out, "{i},{}", spaced(r));
            }
        }
        Format::Text => {
            for (i, r) in rows.iter().enumerate() {
                let _ = writeln!(out, "{i:>4}  {}", braces(r));
            }
            let _ = writeln!(out, "{} statements", rows.len());
        }
    }
    Ok(Output { report: out, plot: None })
}

fn stmt_list(set: impl IntoIterator<Item = Stmt>) -> Vec<Vec<ProgramId>> {
    set.into_iter().map(|s| s.into_iter().collect()).collect()
}

fn to_oracle(t: &Task) -> OracleTask {
    let v = t.view();
    let conv = |l: Vec<Vec<ProgramId>>| l.into_iter().map(|s| s.into_iter().collect()).collect();
    OracleTask {
        situations: conv(v.situations),
        decisions: conv(v.decisions),
    }
}

fn cmd_models(cli: &Cli, scn: &Scenario, config: &RunConfig, name: &str) -> Result<Output> {
    let built = scn.build()?;
    let task = built.task(name)?;
    let models: Vec<Vec<ProgramId>> = if cli.oracle {
        let o = to_oracle(task);
        let mut ms = stmt_list(oracle_models(task.language().vocabulary(), &o.situations, &o.decisions)?);
        ms.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        ms
    } else {
        task.models().iter().map(|i| task.language().ids(i)).collect()
    };
    let mut out = String::new();
    match cli.format {
        Format::Json => {
            for m in &models {
                line(&mut out, &json!({"model": m}));
            }
            line(
                &mut out,
                &summary(config, true, json!({"task": name, "view": task.view(), "count": models.len()})),
            );
        }
        Format::Csv => {
            out.push_str("model\n");
            for m in &models {
                let _ = writeln!(out, "{}", spaced(m));
            }
        }
        Format::Text => {
            for m in &models {
                let _ = writeln!(out, "{}", braces(m));
            }
            let _ = writeln!(out, "{} models of {name}", models.len());
        }
    }
    Ok(Output { report: out, plot: None })
}

fn cmd_interpret(cli: &Cli, scn: &Scenario, config: &RunConfig, organism: &str, statement: &str) -> Result<Output> {
    let built = scn.build()?;
    let o = built.organism(organism)?;
    let ids = parse_statement(statement)?;
    let s = o.language().parse(&ids)?;
    let mut tb: Tiebreak = scn.tiebreak.breaker();
    let sig = o.signified(s)?;
    let interp = o.interpret(s, &mut tb)?;
    let symbol = interp.map(|i| o.symbol(i.symbol).view());
    let decision = interp.and_then(|i| i.decision).map(|d| o.language().ids(d));
    let feeling = interp.map(|i| o.language().ids(o.feelings()[i.symbol]));
    let preference = interp.map(|i| o.preferences()[i.symbol]);
    let mut out = String::new();
    match cli.format {
        Format::Json => {
            line(
                &mut out,
                &json!({
                    "organism": organism,
                    "situation": ids,
                    "meaningful": sig.meaningful,
                    "signified": sig.signified.len(),
                    "symbol": symbol,
                    "preference": preference,
                    "feeling": feeling,
                    "decision": decision,
                }),
            );
            line(&mut out, &summary(config, o.symbol_coverage().exhaustive(), json!({"coverage": o.symbol_coverage()})));
        }
        Format::Csv => {
            out.push_str("organism,situation,meaningful,signified,decision\n");
            let _ = writeln!(
                out,
                "{organism},{},{},{},{}",
                spaced(&ids),
                sig.meaningful,
                sig.signified.len(),
                decision.as_deref().map(spaced).unwrap_or_default()
            );
        }
        Format::Text => match (&symbol, &decision) {
            (None, _) => {
                let _ = writeln!(out, "{} means nothing to {organism}", braces(&ids));
            }
            (Some(sym), d) => {
                let _ = writeln!(out, "situation {} signifies {} symbols", braces(&ids), sig.signified.len());
                let _ = writeln!(
                    out,
                    "interpreted with S={:?} D={:?}",
                    sym.situations.iter().map(|s| braces(s)).collect::<Vec<_>>(),
                    sym.decisions.iter().map(|s| braces(s)).collect::<Vec<_>>()
                );
                let _ = writeln!(out, "decision {}", d.as_deref().map_or("none".to_string(), braces));
            }
        },
    }
    Ok(Output { report: out, plot: None })
}

fn cmd_ascribe(
    cli: &Cli,
    scn: &Scenario,
    config: &RunConfig,
    listener: &str,
    speaker: &str,
    zeta: Option<&str>,
) -> Result<Output> {
    let built = scn.build()?;
    let o = built.organism(listener)?;
    built.organism(speaker)?;
    let zeta = match zeta {
        Some(name) => {
            let t = built.task(name)?;
            if !t.language().same_as(o.language()) {
                return Err(Error::domain(format!("task {name} is not over {listener}'s language")));
            }
            t.clone()
        }
        None => {
            let report = run_episode(scn)?;
            let a = report
                .affects
                .iter()
                .find(|a| a.listener == listener && a.speaker == speaker)
                .ok_or_else(|| Error::NotApplicable(format!("{speaker} never affected {listener}")))?;
            Task::from_view(o.language(), &a.experience)?
        }
    };
    let a = ascribe_intent(o, &zeta, scn.caps, scn.maximand)?;
    let gamma = a.ascribed_task();
    let oracle = if cli.oracle {
        let expect = oracle_ascription(o, &to_oracle(&zeta), scn.caps.max_situations, scn.maximand, ORACLE_TASK_GUARD)?;
        Some(expect == to_oracle(gamma))
    } else {
        None
    };
    let mut out = String::new();
    match cli.format {
        Format::Json => {
            line(
                &mut out,
                &json!({
                    "listener": listener,
                    "speaker": speaker,
                    "zeta": zeta.view(),
                    "candidates": a.candidates.len(),
                    "preferred": a.preferred.len(),
                    "ascribed": gamma.view(),
                    "preference": a.preference_value,
                    "maximand": scn.maximand,
                    "maximand_value": a.maximand_value,
                    "oracle_agrees": oracle,
                }),
            );
            line(&mut out, &summary(config, a.coverage.exhaustive(), json!({"coverage": a.coverage})));
        }
        Format::Csv => {
            out.push_str("listener,speaker,candidates,preferred,preference,maximand_value,oracle_agrees\n");
            let _ = writeln!(
                out,
                "{listener},{speaker},{},{},{},{},{}",
                a.candidates.len(),
                a.preferred.len(),
                a.preference_value.map_or(String::new(), |v| v.to_string()),
                a.maximand_value,
                oracle.map_or(String::new(), |b| b.to_string())
            );
        }
        Format::Text => {
            let v = gamma.view();
            let _ = writeln!(
                out,
                "{listener} ascribes to {speaker}: S={:?} D={:?}",
                v.situations.iter().map(|s| braces(s)).collect::<Vec<_>>(),
                v.decisions.iter().map(|s| braces(s)).collect::<Vec<_>>()
            );
            let _ = writeln!(
                out,
                "{} candidates, {} preferred, preference {}, maximand {}",
                a.candidates.len(),
                a.preferred.len(),
                a.preference_value.map_or("none".to_string(), |v| v.to_string()),
                a.maximand_value
            );
            if let Some(ok) = oracle {
                let _ = writeln!(out, "oracle agrees: {ok}");
            }
        }
    }
    Ok(Output { report: out, plot: None })
}

fn render_episode(format: Format, config: &RunConfig, report: &EpisodeReport) -> String {
    let mut out = String::new();
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let ids = |v: &Option<Vec<ProgramId>>| v.as_deref().map(spaced).unwrap_or_default();
    match format {
        Format::Json => {
            for r in &report.records {
                line(&mut out, r);
            }
            line(
                &mut out,
                &summary(
                    config,
                    report.exhaustive,
                    json!({"coverage": report.coverage, "metrics": report.metrics, "affects": report.affects}),
                ),
            );
        }
        Format::Csv => {
            out.push_str("step,speaker,listener,world,utterance,heard,plain,listener_decision,affected,score,matched,cond1,cond2,cond3,meant,speaker_payoff,listener_payoff\n");
            for r in &report.records {
                let m = r.meaning.as_ref();
                let flag = |f: fn(&crate::sim::MeaningFlags) -> bool| m.map_or(String::new(), |m| f(m).to_string());
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.step,
                    r.speaker,
                    r.listener,
                    spaced(&r.world_situation),
                    ids(&r.utterance),
                    ids(&r.heard),
                    ids(&r.plain),
                    ids(&r.listener_decision),
                    r.affected,
                    opt(r.interpretation_score),
                    r.matched.map_or(String::new(), |b| b.to_string()),
                    flag(|m| m.cond1),
                    flag(|m| m.cond2),
                    flag(|m| m.cond3),
                    flag(|m| m.meant),
                    r.speaker_payoff,
                    r.listener_payoff
                );
            }
        }
        Format::Text => {
            for r in &report.records {
                let _ = write!(out, "{:>4} {} -> {}  world {}", r.step, r.speaker, r.listener, braces(&r.world_situation));
                match &r.utterance {
                    None => out.push_str("  (silent)"),
                    Some(u) => {
                        let _ = write!(out, "  says {}", braces(u));
                    }
                }
                if let Some(m) = &r.meaning {
                    let _ = write!(out, "  affected  meant={} ({}{}{})", m.meant, m.cond1 as u8, m.cond2 as u8, m.cond3 as u8);
                }
                out.push('\n');
            }
            let m = &report.metrics;
            let _ = writeln!(
                out,
                "steps {}  spoken {}  affected {}  match rate {}  meaning rate {}",
                m.steps,
                m.spoken,
                m.affected,
                m.match_rate.map_or("n/a".into(), |x| format!("{x:.3}")),
                m.meaning_rate.map_or("n/a".into(), |x| format!("{x:.3}"))
            );
            for (name, p) in &m.payoffs {
                let _ = writeln!(out, "payoff {name} {p}");
            }
            let _ = writeln!(out, "seed {}  exhaustive {}", report.seed, report.exhaustive);
        }
    }
    out
}

fn cmd_simulate(cli: &Cli, scn: &Scenario, config: &RunConfig) -> Result<Output> {
    let report = run_episode(scn)?;
    Ok(Output {
        report: render_episode(cli.format, config, &report),
        plot: None,
    })
}

fn render_sweep(format: Format, config: &RunConfig, sweep: &SweepReport, extra: Value) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            for p in &sweep.points {
                line(&mut out, p);
            }
            let mut meta = json!({"experiment": sweep.experiment, "metric": sweep.metric, "seeds": sweep.seeds});
            if let (Some(obj), Value::Object(more)) = (meta.as_object_mut(), extra) {
                obj.extend(more);
            }
            line(&mut out, &summary(config, sweep.exhaustive, meta));
        }
        Format::Csv => out.push_str(&sweep.to_csv()),
        Format::Text => {
            let _ = writeln!(out, "{} ({})", sweep.experiment, sweep.metric);
            for p in &sweep.points {
                let _ = writeln!(out, "x={:<6} mean={:.4} sd={:.4} n={}", p.x, p.mean, p.stddev, p.n);
            }
        }
    }
    out
}

fn cmd_experiment(cli: &Cli, scn: &Scenario, config: &RunConfig, which: &Experiment) -> Result<Output> {
    let seeds = |n: u64| -> Vec<u64> { (0..n).map(|i| scn.seed.wrapping_add(i)).collect() };
    let (report, sweep) = match which {
        Experiment::HallOfMirrors {
            trials,
            organism,
            max_parent_situations,
        } => {
            let built = scn.build()?;
            let lang = match organism {
                Some(id) => built.organism(id)?.language().clone(),
                None => built.full.clone(),
            };
            let params = HallParams {
                trials: *trials,
                seed: scn.seed,
                caps: scn.caps,
                max_parent_situations: *max_parent_situations,
            };
            let h = run_hall_of_mirrors(&lang, &params)?;
            let sweep = SweepReport {
                version: VERSION.to_string(),
                experiment: "hall-of-mirrors".into(),
                metric: "held_out_accuracy (x: 0 weak, 1 random, 2 all consistent)".into(),
                seeds: vec![scn.seed],
                caps: scn.caps,
                exhaustive: h.exhaustive,
                points: vec![h.weak.clone(), h.random.clone(), h.consistent.clone()],
            };
            let report = match cli.format {
                Format::Json => {
                    let mut out = String::new();
                    for t in &h.trials {
                        line(&mut out, t);
                    }
                    line(
                        &mut out,
                        &summary(
                            config,
                            h.exhaustive,
                            json!({
                                "experiment": "hall-of-mirrors",
                                "trials": h.trials.len(),
                                "discarded": h.discarded,
                                "weak_mean": h.weak.mean,
                                "random_mean": h.random.mean,
                                "consistent_mean": h.consistent.mean,
                            }),
                        ),
                    );
                    out
                }
                Format::Csv => sweep.to_csv(),
                Format::Text => format!(
                    "hall of mirrors: {} trials ({} discarded)\nweak selector   mean {:.4} sd {:.4}\nrandom selector mean {:.4} sd {:.4}\nall consistent  mean {:.4}\n",
                    h.trials.len(),
                    h.discarded,
                    h.weak.mean,
                    h.weak.stddev,
                    h.random.mean,
                    h.random.stddev,
                    h.consistent.mean
                ),
            };
            (report, sweep)
        }
        Experiment::Incomprehensibility { seeds: n, overlaps } => {
            let r = run_incomprehensibility(scn, overlaps, &seeds(*n))?;
            let sweep = r.score_sweep();
            let extra = json!({"points": r.points.iter().map(|p| json!({
                "overlap": p.overlap,
                "match_rate": p.match_rate.mean,
                "meaning_rate": p.meaning_rate.mean,
                "ascription_rate": p.ascription_rate.mean,
            })).collect::<Vec<_>>()});
            (render_sweep(cli.format, config, &sweep, extra), sweep)
        }
        Experiment::SimilaritySweep {
            seeds: n,
            dimension,
            fractions,
        } => {
            let dim = match dimension {
                DimensionArg::Preferences => Dimension::Preferences,
                DimensionArg::Feelings => Dimension::Feelings,
            };
            let sweep = similarity_sweep(scn, dim, fractions, &seeds(*n))?;
            (render_sweep(cli.format, config, &sweep, json!({})), sweep)
        }
    };
    Ok(Output {
        report,
        plot: cli.emit_plot_data.as_ref().map(|_| sweep.to_csv()),
    })
}
