//! Command-line front end.
//!
//! Every command produces an [`Outcome`]: the text written to standard
//! output, an optional message for standard error and the process exit code
//! (0 success or PASS, 1 FAIL or mismatch, 2 input error, 3 budget exceeded).

mod repro;
mod search;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::axioms::{
    check_core_subject_to, check_ejr, check_laminar, check_laminar_proportional, check_pareto,
    check_pigou_dalton, check_pjr, check_priceable, find_core_deviation, CoreProperty, SubjectOptions,
    DEFAULT_SEARCH_BUDGET,
};
use crate::error::{Error, Result};
use crate::model::{Committee, ElectionInstance};
use crate::rational::Rational;
use crate::rules::{
    dhondt_committee, pav_score, pav_winners, phragmen_sequential, rule_x, rule_x_complete, seq_pav, Completion,
    DEFAULT_PAV_BUDGET,
};

pub use repro::{repro, ReproCheck, ReproReport};
pub use search::{search, SearchOutcome, Violation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "propvote", version, about = "Proportional committee elections with exact arithmetic")]
pub struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a committee rule on an instance file.
    Run(RunArgs),
    /// Check an axiom for a committee.
    Check(CheckArgs),
    /// Search random and small exhaustive instances for a counterexample.
    Search(SearchArgs),
    /// Reproduce the worked examples and constructions.
    Repro,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    Pav,
    #[value(name = "seqpav")]
    #[serde(rename = "seqpav")]
    SeqPav,
    Phragmen,
    Rulex,
    RulexComplete,
    Dhondt,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub rule: RuleName,
    #[arg(long)]
    pub input: PathBuf,
    /// Print every tied PAV winner.
    #[arg(long)]
    pub all_ties: bool,
    #[arg(long, default_value_t = DEFAULT_PAV_BUDGET)]
    pub budget: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomName {
    Priceable,
    Laminar,
    LaminarProp,
    Pjr,
    Ejr,
    Core,
    LambdaCore,
    CoreSubject,
    PigouDalton,
    Pareto,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PropertyName {
    Cohesive,
    PriceEq,
    Priceable,
}

impl From<PropertyName> for CoreProperty {
    fn from(p: PropertyName) -> Self {
        match p {
            PropertyName::Cohesive => CoreProperty::Cohesive,
            PropertyName::PriceEq => CoreProperty::PriceEq,
            PropertyName::Priceable => CoreProperty::Priceable,
        }
    }
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub axiom: AxiomName,
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated 1-based candidate list.
    #[arg(long)]
    pub committee: Option<String>,
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long, value_enum)]
    pub property: Option<PropertyName>,
    #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
    pub budget: u64,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// `ejr-phragmen` or `AXIOM+RULE`, e.g. `pigou-dalton+pav`, `core2+pav`.
    #[arg(long)]
    pub violation: String,
    #[arg(long, default_value_t = 8)]
    pub max_n: usize,
    #[arg(long, default_value_t = 8)]
    pub max_m: usize,
    #[arg(long, default_value_t = 4)]
    pub max_k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 2_000_000)]
    pub budget: u64,
}

/// Result of one command invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String, code: i32) -> Self {
        Outcome { stdout, stderr: String::new(), code }
    }

    fn error(err: &Error) -> Self {
        let code = match err {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_INPUT,
        };
        Outcome { stdout: String::new(), stderr: format!("error: {err}\n"), code }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args, cli.json),
        Command::Check(args) => cmd_check(args, cli.json),
        Command::Search(args) => cmd_search(args, cli.json),
        Command::Repro => cmd_repro(cli.json),
    };
    result.unwrap_or_else(|e| Outcome::error(&e))
}

fn load(path: &Path) -> Result<ElectionInstance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameters(format!("cannot read {}: {e}", path.display())))?;
    Ok(ElectionInstance::parse(&text)?)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// One step of a rule's trace.
#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub candidate: usize,
    /// `time`, `q` or `completion_time`.
    pub kind: &'static str,
    pub value: Rational,
    /// 1-based voter label and amount paid.
    pub payments: Vec<(usize, Rational)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomVerdict {
    pub axiom: AxiomName,
    /// `pass`, `fail` or `skipped`.
    pub verdict: &'static str,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub digest: String,
    pub rule: RuleName,
    pub committee: Committee,
    pub committees: Vec<Committee>,
    pub welfare: Vec<usize>,
    pub score: Option<Rational>,
    pub trace: Vec<TraceStep>,
    pub axioms: Vec<AxiomVerdict>,
}

const REPORT_CHECK_BUDGET: u64 = 1_000_000;

pub fn run_report(instance: &ElectionInstance, rule: RuleName, all_ties: bool, budget: u64) -> Result<RunReport> {
    let mut committees = Vec::new();
    let mut trace = Vec::new();
    let mut score = None;
    match rule {
        RuleName::Pav => {
            let winners = pav_winners(instance, budget)?;
            score = Some(pav_score(instance, &winners[0])?);
            committees = if all_ties { winners } else { winners.into_iter().take(1).collect() };
        }
        RuleName::SeqPav => committees.push(seq_pav(instance)),
        RuleName::Phragmen => {
            let t = phragmen_sequential(instance);
            for ((c, time), paid) in t.elected.iter().zip(&t.election_times).zip(&t.payments) {
                trace.push(TraceStep {
                    candidate: c + 1,
                    kind: "time",
                    value: time.clone(),
                    payments: paid.iter().map(|(v, a)| (v + 1, a.clone())).collect(),
                });
            }
            committees.push(t.committee());
        }
        RuleName::Rulex | RuleName::RulexComplete => {
            let t = if rule == RuleName::Rulex {
                rule_x(instance)
            } else {
                rule_x_complete(instance, Completion::PhragmenContinuation)
            };
            let n = instance.num_voters();
            let mut before = vec![Rational::one(); n];
            for (step, q) in t.q_values.iter().enumerate() {
                let after = &t.budgets[step];
                let payments = (0..n)
                    .filter(|&v| before[v] != after[v])
                    .map(|v| (v + 1, &before[v] - &after[v]))
                    .collect();
                trace.push(TraceStep { candidate: t.elected[step] + 1, kind: "q", value: q.clone(), payments });
                before = after.clone();
            }
            let appended = &t.elected[t.q_values.len()..];
            for (c, time) in appended.iter().zip(&t.completion_times) {
                trace.push(TraceStep {
                    candidate: c + 1,
                    kind: "completion_time",
                    value: time.clone(),
                    payments: Vec::new(),
                });
            }
            committees.push(t.committee());
        }
        RuleName::Dhondt => committees.push(dhondt_committee(instance)?),
    }
    let committee = committees[0].clone();
    let welfare = instance.welfare_vector(&committee)?.0;
    let axioms = report_verdicts(instance, &committee);
    Ok(RunReport {
        digest: instance.digest(),
        rule,
        committee,
        committees,
        welfare,
        score,
        trace,
        axioms,
    })
}

/// Cheap verdicts shown with every run; expensive ones are skipped.
fn report_verdicts(instance: &ElectionInstance, w: &Committee) -> Vec<AxiomVerdict> {
    let mut out = Vec::new();
    let mut push = |axiom, r: Result<Option<String>>| {
        let (verdict, witness) = match r {
            Ok(None) => ("pass", None),
            Ok(Some(wit)) => ("fail", Some(wit)),
            Err(_) => ("skipped", None),
        };
        out.push(AxiomVerdict { axiom, verdict, witness });
    };
    let b = REPORT_CHECK_BUDGET;
    push(
        AxiomName::Priceable,
        check_priceable(instance, w).map(|ps| ps.is_none().then(|| "no price system".to_string())),
    );
    if check_laminar(instance).is_some() {
        push(
            AxiomName::LaminarProp,
            check_laminar_proportional(instance, w).map(|ok| (!ok).then(|| "not proportional".to_string())),
        );
    }
    push(AxiomName::Pjr, check_pjr(instance, w, b).map(|d| d.map(|d| d.to_string())));
    push(AxiomName::Ejr, check_ejr(instance, w, b).map(|d| d.map(|d| d.to_string())));
    push(
        AxiomName::Core,
        find_core_deviation(instance, w, &Rational::one(), b).map(|d| d.map(|d| d.to_string())),
    );
    out
}

/// `(2,2,4)`, or run-length form `(5*3000,1*1000)` for long vectors.
fn render_welfare(w: &[usize]) -> String {
    if w.len() <= 40 {
        return format!("({})", w.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(","));
    }
    let runs: Vec<String> = w
        .chunk_by(|a, b| a == b)
        .map(|run| format!("{}*{}", run[0], run.len()))
        .collect();
    format!("({})", runs.join(","))
}

fn render_run(r: &RunReport) -> String {
    let mut s = String::new();
    writeln!(s, "instance: {}", r.digest).unwrap();
    writeln!(s, "rule: {}", ValueEnum::to_possible_value(&r.rule).unwrap().get_name()).unwrap();
    if let Some(score) = &r.score {
        writeln!(s, "score: {score}").unwrap();
    }
    if r.committees.len() > 1 {
        for w in &r.committees {
            writeln!(s, "committee: {w}").unwrap();
        }
    } else {
        writeln!(s, "committee: {}", r.committee).unwrap();
    }
    writeln!(s, "welfare: {}", render_welfare(&r.welfare)).unwrap();
    if !r.trace.is_empty() {
        writeln!(s, "trace:").unwrap();
        for (i, step) in r.trace.iter().enumerate() {
            let total: Rational = step.payments.iter().map(|(_, a)| a).sum();
            writeln!(
                s,
                "  {} c{} {}={} payers={} paid={}",
                i + 1,
                step.candidate,
                step.kind,
                step.value,
                step.payments.len(),
                total
            )
            .unwrap();
        }
    }
    writeln!(s, "axioms:").unwrap();
    for v in &r.axioms {
        let name = ValueEnum::to_possible_value(&v.axiom).unwrap();
        match &v.witness {
            Some(w) => writeln!(s, "  {}: {} {}", name.get_name(), v.verdict.to_uppercase(), w).unwrap(),
            None => writeln!(s, "  {}: {}", name.get_name(), v.verdict.to_uppercase()).unwrap(),
        }
    }
    s
}

fn cmd_run(args: &RunArgs, json: bool) -> Result<Outcome> {
    let instance = load(&args.input)?;
    let report = run_report(&instance, args.rule, args.all_ties, args.budget)?;
    Ok(Outcome::ok(if json { to_json(&report) } else { render_run(&report) }, EXIT_OK))
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub digest: String,
    pub axiom: AxiomName,
    pub committee: Option<Committee>,
    pub pass: bool,
    pub witness: Option<serde_json::Value>,
    pub detail: Option<String>,
}

pub fn check_report(
    instance: &ElectionInstance,
    axiom: AxiomName,
    committee: Option<&Committee>,
    lambda: Option<&Rational>,
    property: Option<CoreProperty>,
    budget: u64,
) -> Result<CheckReport> {
    let need = || committee.ok_or(Error::InvalidParameters("--committee is required for this axiom".into()));
    let mut witness: Option<serde_json::Value> = None;
    let mut detail: Option<String> = None;
    let pass = match axiom {
        AxiomName::Laminar => match check_laminar(instance) {
            Some(d) => {
                detail = Some(d.to_string());
                true
            }
            None => false,
        },
        AxiomName::Priceable => match check_priceable(instance, need()?)? {
            Some(ps) => {
                detail = Some(format!("price {}", ps.price));
                witness = Some(json(&ps));
                true
            }
            None => {
                detail = Some("no price system supports the committee".into());
                false
            }
        },
        AxiomName::LaminarProp => {
            let w = need()?;
            match check_laminar(instance) {
                Some(d) => {
                    instance.check_committee(w)?;
                    let ok = d.admits(w);
                    if !ok {
                        detail = Some(format!("derivation:\n{d}"));
                    }
                    ok
                }
                None => {
                    detail = Some("instance is not laminar; the axiom does not constrain it".into());
                    true
                }
            }
        }
        _ => {
            let w = need()?;
            let dev = match axiom {
                AxiomName::Pjr => check_pjr(instance, w, budget)?,
                AxiomName::Ejr => check_ejr(instance, w, budget)?,
                AxiomName::Core => find_core_deviation(instance, w, lambda.unwrap_or(&Rational::one()), budget)?,
                AxiomName::LambdaCore => {
                    let l = lambda.ok_or(Error::InvalidParameters("--lambda is required for lambda-core".into()))?;
                    find_core_deviation(instance, w, l, budget)?
                }
                AxiomName::CoreSubject => {
                    let p = property.ok_or(Error::InvalidParameters("--property is required for core-subject".into()))?;
                    let opts = SubjectOptions { budget, ..SubjectOptions::default() };
                    check_core_subject_to(instance, w, p, &opts)?
                }
                AxiomName::PigouDalton | AxiomName::Pareto => {
                    let alt = if axiom == AxiomName::PigouDalton {
                        check_pigou_dalton(instance, w, budget)?
                    } else {
                        check_pareto(instance, w, budget)?
                    };
                    if let Some(alt) = &alt {
                        let wv = instance.welfare_vector(alt)?;
                        detail = Some(format!("alternative {alt} with welfare {wv}"));
                        witness = Some(json(alt));
                    }
                    return Ok(CheckReport {
                        digest: instance.digest(),
                        axiom,
                        committee: Some(w.clone()),
                        pass: alt.is_none(),
                        witness,
                        detail,
                    });
                }
                _ => unreachable!("handled above"),
            };
            if let Some(d) = &dev {
                detail = Some(d.to_string());
                witness = Some(json(d));
            }
            dev.is_none()
        }
    };
    Ok(CheckReport {
        digest: instance.digest(),
        axiom,
        committee: committee.cloned(),
        pass,
        witness,
        detail,
    })
}

fn json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("witness serializes")
}

fn render_check(r: &CheckReport) -> String {
    let mut s = String::new();
    writeln!(s, "instance: {}", r.digest).unwrap();
    writeln!(s, "axiom: {}", ValueEnum::to_possible_value(&r.axiom).unwrap().get_name()).unwrap();
    if let Some(w) = &r.committee {
        writeln!(s, "committee: {w}").unwrap();
    }
    writeln!(s, "verdict: {}", if r.pass { "PASS" } else { "FAIL" }).unwrap();
    if let Some(d) = &r.detail {
        if d.contains('\n') {
            s.push_str(d);
            if !d.ends_with('\n') {
                s.push('\n');
            }
        } else if r.pass {
            writeln!(s, "detail: {d}").unwrap();
        } else {
            writeln!(s, "witness: {d}").unwrap();
        }
    }
    s
}

fn cmd_check(args: &CheckArgs, json: bool) -> Result<Outcome> {
    let instance = load(&args.input)?;
    let committee = args
        .committee
        .as_deref()
        .map(|c| c.parse::<Committee>())
        .transpose()
        .map_err(|e| Error::InvalidParameters(format!("bad committee: {e}")))?;
    let lambda = args
        .lambda
        .as_deref()
        .map(|l| l.parse::<Rational>())
        .transpose()
        .map_err(|e| Error::InvalidParameters(format!("bad lambda: {e}")))?;
    let report = check_report(
        &instance,
        args.axiom,
        committee.as_ref(),
        lambda.as_ref(),
        args.property.map(Into::into),
        args.budget,
    )?;
    let code = if report.pass { EXIT_OK } else { EXIT_FAIL };
    Ok(Outcome::ok(if json { to_json(&report) } else { render_check(&report) }, code))
}

fn cmd_search(args: &SearchArgs, json: bool) -> Result<Outcome> {
    let outcome = search(args)?;
    Ok(Outcome::ok(if json { to_json(&outcome) } else { outcome.render() }, EXIT_OK))
}

fn cmd_repro(json: bool) -> Result<Outcome> {
    let report = repro()?;
    let code = if report.all_pass() { EXIT_OK } else { EXIT_FAIL };
    Ok(Outcome::ok(if json { to_json(&report) } else { report.render() }, code))
}
