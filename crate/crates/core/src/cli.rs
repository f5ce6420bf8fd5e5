//! The `emlsl` command line. Exit codes: 0 for success or a true verdict,
//! 1 for a false verdict or a rejected proof, 2 for usage and input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::encoder::{build_bounded_witness, build_witness_model, encode_halt, run_machine, Layout, TwoCounterMachine};
use crate::model::{apply_transition, move_view, Evolution, TransitionLabel, View};
use crate::proofs::{check_script, parse_script, semantic_audit, AuditError, BindingJson};
use crate::rational::{self, Rational};
use crate::scenario::{evolution_from_json, valuation_from_json, Scenario, StepJson, ValuationJson, ViewJson};
use crate::semantics::{eval, successors, EvalOptions, Valuation};
use crate::syntax::{parse_formula_in, Formula, Modality, SortContext};

#[derive(Parser, Debug)]
#[command(name = "emlsl", version, about = "Extended multi-lane spatial logic toolkit")]
pub struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report the sanity violations of a scenario's snapshot.
    Sanity { scenario: PathBuf },
    /// Apply a transition label such as `r(E)`, `c(E,1)` or `t(3/2)`.
    Step { scenario: PathBuf, label: String },
    /// List the successors of the scenario's snapshot and view under a modality.
    Successors {
        scenario: PathBuf,
        /// `r(c)`, `c(E)`, `wd_r(ego)`, `tau`, ...
        modality: String,
        /// Valuation object, inline or `@file`.
        valuation: Option<String>,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Evaluate a formula (inline or `@file`) on the scenario's view.
    CheckSat {
        scenario: PathBuf,
        formula: String,
        /// Valuation object, inline or `@file`.
        #[arg(long)]
        valuation: Option<String>,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Check a proof script with the rule checker.
    CheckProof { script: PathBuf },
    /// Evaluate the judgments of a proof script under a binding file.
    AuditProof { script: PathBuf, binding: PathBuf },
    /// Print the halting formula of a two-counter machine.
    #[command(name = "encode-2cm")]
    Encode2cm { machine: PathBuf, k: String },
    /// Write the witness model of a machine run as a scenario.
    #[command(name = "witness-2cm")]
    Witness2cm {
        machine: PathBuf,
        k: String,
        /// Step bound; a run that has not halted by then is encoded as far as it got.
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        #[arg(long, value_enum, default_value_t = LayoutArg::Corrected)]
        layout: LayoutArg,
        /// Output file; standard output when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args, Debug, Default)]
pub struct EvalArgs {
    /// Evolutions for `[tau]`: a JSON list of step lists, inline or `@file`.
    #[arg(long)]
    pub tau: Option<String>,
    /// Extra sample points for real quantifiers, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<String>,
    /// Rounds of candidate closure for chop positions.
    #[arg(long)]
    pub depth: Option<usize>,
    /// View object replacing the scenario's view, inline or `@file`.
    #[arg(long)]
    pub view: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LayoutArg {
    Corrected,
    Literal,
}

/// An input problem; reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

struct Output {
    code: i32,
    human: String,
    json: Json,
    stderr: Option<String>,
}

impl Output {
    fn new(code: i32, human: impl Into<String>, json: Json) -> Self {
        Output {
            code,
            human: human.into(),
            json,
            stderr: None,
        }
    }
}

fn text(arg: &str) -> Result<String, Usage> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read `{path}`: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn read(path: &PathBuf) -> Result<String, Usage> {
    std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read `{}`: {e}", path.display())))
}

fn scenario_with_view(path: &PathBuf, view: &Option<String>) -> Result<(Scenario, View), Usage> {
    let mut sc = Scenario::load(path)?;
    if let Some(v) = view {
        let raw: ViewJson = serde_json::from_str(&text(v)?)?;
        sc.view = Some(raw.to_view()?);
    }
    let v = sc.view.clone().ok_or_else(|| Usage("the scenario has no view; pass --view".into()))?;
    Ok((sc, v))
}

fn options(args: &EvalArgs) -> Result<EvalOptions, Usage> {
    let tau_witnesses = match &args.tau {
        Some(t) => {
            let raw: Vec<Vec<StepJson>> = serde_json::from_str(&text(t)?)?;
            raw.iter().map(|s| evolution_from_json(s)).collect::<Result<Vec<Evolution>, _>>()?
        }
        None => vec![],
    };
    let real_grid = args
        .grid
        .iter()
        .map(|g| rational::parse(g.trim()))
        .collect::<Result<Vec<Rational>, _>>()?;
    Ok(EvalOptions {
        tau_witnesses,
        real_grid,
        chop_closure_depth: args.depth,
    })
}

fn valuation(owner: &View, arg: &Option<String>) -> Result<Valuation, Usage> {
    let raw: ValuationJson = match arg {
        Some(a) => serde_json::from_str(&text(a)?)?,
        None => ValuationJson::new(),
    };
    Ok(valuation_from_json(owner.owner.clone(), &raw)?)
}

fn sort_context(nu: &Valuation) -> SortContext {
    nu.vars().keys().map(|v| (v.name.clone(), v.sort)).collect()
}

fn parse_k(k: &str) -> Result<Rational, Usage> {
    Ok(rational::parse(k)?)
}

fn load_machine(path: &PathBuf) -> Result<TwoCounterMachine, Usage> {
    Ok(TwoCounterMachine::from_json_str(&read(path)?)?)
}

fn successor_json(sc: &Scenario, next: crate::model::TrafficSnapshot, view: View) -> Json {
    let s = Scenario {
        snapshot: next,
        sensors: sc.sensors.clone(),
        view: Some(view),
    };
    serde_json::to_value(s.to_raw()).expect("scenario serializes")
}

fn pretty(j: &Json) -> String {
    serde_json::to_string_pretty(j).expect("json serializes")
}

fn execute(cmd: &Command) -> Result<Output, Usage> {
    match cmd {
        Command::Sanity { scenario } => {
            let sc = Scenario::load(scenario)?;
            let vs = sc.snapshot.check_sanity();
            let list: Vec<Json> = vs
                .iter()
                .map(|v| json!({"car": v.car.0, "condition": v.condition, "message": v.message}))
                .collect();
            let human = if vs.is_empty() {
                "sane".to_string()
            } else {
                vs.iter()
                    .map(|v| format!("{}: condition {}: {}", v.car, v.condition, v.message))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            Ok(Output::new(
                if vs.is_empty() { 0 } else { 1 },
                human,
                json!({"sane": vs.is_empty(), "violations": list}),
            ))
        }
        Command::Step { scenario, label } => {
            let sc = Scenario::load(scenario)?;
            let l: TransitionLabel = label.parse()?;
            match apply_transition(&sc.snapshot, &l) {
                Ok(next) => {
                    let view = match &sc.view {
                        Some(v) => Some(move_view(&sc.snapshot, &next, v).unwrap_or_else(|_| v.clone())),
                        None => None,
                    };
                    let out = Scenario {
                        snapshot: next,
                        sensors: sc.sensors.clone(),
                        view,
                    };
                    let j = serde_json::to_value(out.to_raw()).expect("scenario serializes");
                    Ok(Output::new(0, pretty(&j), j))
                }
                Err(e) => {
                    let mut o = Output::new(1, format!("not enabled: {e}"), json!({"enabled": false, "reason": e.to_string()}));
                    o.stderr = Some(format!("{l} is not enabled: {e}"));
                    Ok(o)
                }
            }
        }
        Command::Successors {
            scenario,
            modality,
            valuation: val,
            eval: args,
        } => {
            let (sc, v) = scenario_with_view(scenario, &args.view)?;
            let nu = valuation(&v, val)?;
            let opts = options(args)?;
            let m = match parse_formula_in(&format!("[{modality}] bot"), &sort_context(&nu))? {
                Formula::BoxM(m, _) => m,
                _ => return Err(Usage(format!("`{modality}` is not a modality"))),
            };
            if m == Modality::Tau && opts.tau_witnesses.is_empty() {
                return Err(Usage("`tau` needs --tau evolutions".into()));
            }
            let next = successors(&sc.snapshot, &v, &m, &nu, &opts)?;
            let list: Vec<Json> = next.into_iter().map(|(ts, w)| successor_json(&sc, ts, w)).collect();
            let human = if list.is_empty() {
                "no successors".to_string()
            } else {
                list.iter().map(pretty).collect::<Vec<_>>().join("\n")
            };
            Ok(Output::new(0, human, json!({"successors": list})))
        }
        Command::CheckSat {
            scenario,
            formula,
            valuation: val,
            eval: args,
        } => {
            let (sc, v) = scenario_with_view(scenario, &args.view)?;
            let nu = valuation(&v, val)?;
            let opts = options(args)?;
            let f = parse_formula_in(&text(formula)?, &sort_context(&nu))?;
            let verdict = eval(&sc.snapshot, &v, &nu, &f, &sc.sensors, &opts)?;
            Ok(Output::new(
                if verdict.value { 0 } else { 1 },
                verdict.to_string(),
                json!({"value": verdict.value, "complete": verdict.complete}),
            ))
        }
        Command::CheckProof { script } => {
            let p = parse_script(&read(script)?)?;
            match check_script(&p) {
                Ok(()) => Ok(Output::new(0, "accepted", json!({"accepted": true}))),
                Err(e) => {
                    let j = json!({
                        "accepted": false,
                        "error": e.kind.code(),
                        "path": e.path,
                        "message": e.kind.to_string(),
                    });
                    let mut o = Output::new(1, "rejected", j);
                    o.stderr = Some(e.to_string());
                    Ok(o)
                }
            }
        }
        Command::AuditProof { script, binding } => {
            let p = parse_script(&read(script)?)?;
            let raw: BindingJson = serde_json::from_str(&read(binding)?)?;
            let b = raw.to_binding()?;
            let report = match semantic_audit(&p, &b) {
                Ok(r) => r,
                Err(AuditError::BindingInvalid { name }) => {
                    return Err(Usage(format!("assumption `{name}` does not hold under the binding")))
                }
                Err(e) => return Err(e.into()),
            };
            let j = serde_json::to_value(&report).expect("report serializes");
            let mut human = format!("checked {}, skipped {}", report.checked, report.skipped);
            for f in &report.failures {
                human.push_str(&format!("\nfailed at {}: {}", f.node, f.judgment));
            }
            let mut o = Output::new(if report.passed() { 0 } else { 1 }, human, j);
            if !report.passed() {
                o.stderr = Some(report.failures.iter().map(|f| f.node.clone()).collect::<Vec<_>>().join(", "));
            }
            Ok(o)
        }
        Command::Encode2cm { machine, k } => {
            let m = load_machine(machine)?;
            let f = encode_halt(&m, parse_k(k)?)?;
            let s = f.to_string();
            Ok(Output::new(0, s.clone(), json!({"formula": s})))
        }
        Command::Witness2cm {
            machine,
            k,
            max_steps,
            layout,
            out,
        } => {
            let m = load_machine(machine)?;
            let k = parse_k(k)?;
            let layout = match layout {
                LayoutArg::Corrected => Layout::Corrected,
                LayoutArg::Literal => Layout::Literal,
            };
            let (trace, w, halted) = match run_machine(&m, *max_steps) {
                Ok(trace) => {
                    let w = build_witness_model(&m, &trace, &k, layout)?;
                    (trace, w, true)
                }
                Err(crate::encoder::MachineError::Timeout(_)) => {
                    let (trace, w) = build_bounded_witness(&m, *max_steps, &k)?;
                    (trace, w, false)
                }
                Err(e) => return Err(e.into()),
            };
            let scenario = w.scenario().to_json_string();
            let summary = json!({
                "halted": halted,
                "steps": trace.steps,
                "configurations": trace.configs.len(),
                "cars": w.snapshot.cars().len(),
                "sane": w.snapshot.is_sane(),
            });
            match out {
                Some(path) => {
                    std::fs::write(path, scenario + "\n")
                        .map_err(|e| Usage(format!("cannot write `{}`: {e}", path.display())))?;
                    let human = format!(
                        "{} configurations, {} cars, written to {}",
                        trace.configs.len(),
                        w.snapshot.cars().len(),
                        path.display()
                    );
                    Ok(Output::new(0, human, summary))
                }
                None => {
                    let j: Json = serde_json::from_str(&scenario).expect("scenario is JSON");
                    Ok(Output::new(0, scenario, json!({"summary": summary, "scenario": j})))
                }
            }
        }
    }
}

/// Runs the command line on `argv` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(o) => {
            let body = if cli.json { o.json.to_string() } else { o.human };
            let _ = writeln!(stdout, "{body}");
            if let Some(msg) = o.stderr {
                let _ = writeln!(stderr, "{msg}");
            }
            o.code
        }
        Err(Usage(msg)) => {
            if cli.json {
                let _ = writeln!(stdout, "{}", json!({"error": msg}));
            }
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}

/// [`run`] on captured buffers: `(code, stdout, stderr)`.
pub fn run_captured<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).expect("utf-8 output"),
        String::from_utf8(err).expect("utf-8 output"),
    )
}
