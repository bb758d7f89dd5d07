//! Command implementations behind the `renet` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use renet_core::change_taxonomy::OrchestrationState;
use renet_core::petri_core::{Arc, Marking, PetriNet};
use renet_core::pnac::ConfigurationId;
use renet_core::pnh::{build_functional_pnh, build_nonfunctional_pnh, ChangeMatrix, PnhKind};
use renet_core::sim::{self, ExecutionTrace, RunOutcome, Scenario, SimError};

pub const SEED_ENV: &str = "RENET_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Dot,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    NoChangeAtTick { service: String, tick: u64 },
    UnknownTarget(String),
}

impl std::error::Error for CliError {}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::NoChangeAtTick { service, tick } => {
                write!(f, "no change detected for `{service}` at tick {tick}")
            }
            CliError::UnknownTarget(t) => write!(f, "unknown export target `{t}`"),
        }
    }
}

/// Reads and validates a scenario; `RENET_SEED` overrides its seed.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut scenario = Scenario::from_toml_str(&src).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    if let Ok(seed) = std::env::var(SEED_ENV) {
        scenario.seed = seed
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV} must be a non-negative integer, got `{seed}`"))?;
    }
    Ok(scenario)
}

fn run_to_end(scenario: &Scenario) -> Result<RunOutcome> {
    sim::run(scenario).map_err(|e| match e {
        SimError::HorizonExceeded { horizon, trace } => anyhow!(
            "horizon of {horizon} ticks reached before the orchestration finished ({} events recorded)",
            trace.len()
        ),
        other => anyhow!(other),
    })
}

pub fn render_trace(trace: &ExecutionTrace, format: Format) -> Result<String> {
    match format {
        Format::Text => Ok(trace.to_text()),
        Format::Json => {
            let events: Vec<_> = trace
                .iter()
                .map(|e| {
                    let line = e.to_string();
                    let payload = line.splitn(3, '\t').nth(2).unwrap_or_default().to_owned();
                    json!({ "tick": e.tick, "kind": e.kind.name(), "payload": payload })
                })
                .collect();
            Ok(serde_json::to_string_pretty(&events)? + "\n")
        }
        Format::Dot => bail!("traces have no DOT form; use text or json"),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs a scenario and writes its trace. Exit code 0 when the orchestration
/// completed, 2 when it was terminated. A run that hits the horizon still
/// writes the partial trace, then fails.
pub fn cmd_run(scenario_path: &Path, out: Option<&Path>, format: Format) -> Result<i32> {
    let scenario = load_scenario(scenario_path)?;
    match sim::run(&scenario) {
        Ok(outcome) => {
            emit(out, &render_trace(&outcome.trace, format)?)?;
            Ok(match outcome.state {
                OrchestrationState::Completed => 0,
                _ => 2,
            })
        }
        Err(SimError::HorizonExceeded { horizon, trace }) => {
            emit(out, &render_trace(&trace, format)?)?;
            bail!("horizon of {horizon} ticks reached before the orchestration finished")
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_validate(scenario_path: &Path) -> Result<String> {
    let s = load_scenario(scenario_path)?;
    Ok(format!(
        "ok: {} services, {} steps, {} scripted mutations, horizon {}\n",
        s.services.len(),
        s.orchestration.steps.len(),
        s.services.iter().map(|m| m.timeline.len()).sum::<usize>() + s.faults.len(),
        s.horizon
    ))
}

/// Lays a change matrix out as a table: symbol header, one row per place,
/// integers right-aligned under their column.
pub fn format_matrix(m: &ChangeMatrix) -> String {
    let labels: Vec<String> = m.rows.iter().map(|r| r.matrix_label()).collect();
    let label_w = labels.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    let headers: Vec<String> = m.cols.iter().map(ToString::to_string).collect();
    let widths: Vec<usize> = headers
        .iter()
        .enumerate()
        .map(|(j, h)| {
            let vals = m.entries.iter().map(|row| row[j].to_string().len()).max().unwrap_or(1);
            h.chars().count().max(vals)
        })
        .collect();
    let mut out = String::new();
    out.push_str(&" ".repeat(label_w));
    for (h, w) in headers.iter().zip(&widths) {
        let _ = write!(out, " {h:>w$}", w = *w);
    }
    out.push('\n');
    for (label, row) in labels.iter().zip(&m.entries) {
        let _ = write!(out, "{label:<label_w$}");
        for (v, w) in row.iter().zip(&widths) {
            let _ = write!(out, " {v:>w$}", w = *w);
        }
        out.push('\n');
    }
    out
}

/// Prints the change matrices of the report `service` produced at `tick`.
pub fn cmd_matrix(scenario_path: &Path, service: &str, tick: u64, format: Format) -> Result<String> {
    let scenario = load_scenario(scenario_path)?;
    let outcome = run_to_end(&scenario)?;
    let report = outcome.report(service, tick).ok_or_else(|| CliError::NoChangeAtTick {
        service: service.to_owned(),
        tick,
    })?;
    let matrices: Vec<&ChangeMatrix> = report.matrices().collect();
    match format {
        Format::Text => Ok(matrices.iter().map(|m| format_matrix(m)).collect::<Vec<_>>().join("\n")),
        Format::Json => Ok(serde_json::to_string_pretty(&matrices)? + "\n"),
        Format::Dot => bail!("matrices have no DOT form; use text or json"),
    }
}

/// Double-quoted DOT id; `\n` inside labels is kept as DOT's line break.
fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\\\""))
}

/// DOT digraph: places as circles showing label and token count,
/// transitions as boxes, weights on arcs heavier than 1. Nodes and arcs
/// follow the net's own order.
pub fn render_dot(name: &str, net: &PetriNet, marking: &Marking) -> String {
    let mut out = format!("digraph {} {{\n  rankdir=LR;\n", quote(name));
    for p in net.places() {
        let tokens = marking.get(&p.id);
        let label = format!("{}\\n{tokens}", p.label);
        let _ = writeln!(out, "  {} [shape=circle, label={}];", quote(p.id.as_str()), quote(&label));
    }
    for t in net.transitions() {
        let _ = writeln!(out, "  {} [shape=box, label={}];", quote(t.id.as_str()), quote(&t.label));
    }
    for arc in net.arcs() {
        let (from, to) = match &arc {
            Arc::Input { place, transition, .. } => (place.as_str(), transition.as_str()),
            Arc::Output { transition, place, .. } => (transition.as_str(), place.as_str()),
        };
        let w = arc.weight();
        if w > 1 {
            let _ = writeln!(out, "  {} -> {} [label=\"{w}\"];", quote(from), quote(to));
        } else {
            let _ = writeln!(out, "  {} -> {};", quote(from), quote(to));
        }
    }
    out.push_str("}\n");
    out
}

/// Exports `pnh-nf`, `pnh-f` (for `service`) or `pnac@DTE_k` as DOT. With
/// a tick, a handling net shows the marking right after that tick's report.
pub fn cmd_export_dot(scenario_path: &Path, what: &str, service: Option<&str>, tick: Option<u64>) -> Result<String> {
    let scenario = load_scenario(scenario_path)?;
    if let Some(config) = what.strip_prefix("pnac@") {
        let k: ConfigurationId = config
            .parse()
            .map_err(|_| CliError::UnknownTarget(what.to_owned()))?;
        let outcome = run_to_end(&scenario)?;
        let (net, marking) = outcome
            .pnac
            .configuration(k)
            .map_err(|_| CliError::UnknownTarget(what.to_owned()))?;
        return Ok(render_dot(&format!("pnac@{k}"), &net, &marking));
    }
    let kind = match what {
        "pnh-nf" => PnhKind::NonFunctional,
        "pnh-f" => PnhKind::Functional,
        _ => return Err(CliError::UnknownTarget(what.to_owned()).into()),
    };
    let service = service.ok_or_else(|| anyhow!("--service is required for {what}"))?;
    if scenario.service(service).is_none() {
        bail!("unknown service `{service}`");
    }
    let (pnh, mut marking) = match kind {
        PnhKind::NonFunctional => build_nonfunctional_pnh(service),
        PnhKind::Functional => build_functional_pnh(service),
    };
    if let Some(tick) = tick {
        let outcome = run_to_end(&scenario)?;
        let report = outcome.report(service, tick).ok_or_else(|| CliError::NoChangeAtTick {
            service: service.to_owned(),
            tick,
        })?;
        for s in report.fired.iter().filter(|s| s.kind() == kind) {
            let t = pnh.transition(*s).expect("symbol of this kind");
            marking = pnh.net.fire(&marking, t)?;
        }
    }
    Ok(render_dot(&format!("{what}:{service}"), &pnh.net, &marking))
}

/// Re-runs a scenario and compares it with a recorded trace. Returns the
/// first differing line, if any.
pub fn cmd_replay(scenario_path: &Path, trace_path: &Path) -> Result<Option<String>> {
    let scenario = load_scenario(scenario_path)?;
    let recorded = fs::read_to_string(trace_path).with_context(|| format!("reading {}", trace_path.display()))?;
    let fresh = match sim::run(&scenario) {
        Ok(o) => o.trace,
        Err(SimError::HorizonExceeded { trace, .. }) => trace,
        Err(e) => return Err(e.into()),
    };
    let fresh = fresh.to_text();
    if fresh == recorded {
        return Ok(None);
    }
    let (a, b): (Vec<&str>, Vec<&str>) = (recorded.lines().collect(), fresh.lines().collect());
    let i = a.iter().zip(&b).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
    Ok(Some(format!(
        "traces differ at line {}:\n  recorded: {}\n  replayed: {}\n",
        i + 1,
        a.get(i).copied().unwrap_or("<end of trace>"),
        b.get(i).copied().unwrap_or("<end of trace>")
    )))
}
