use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Value};

use super::parser::{parse_actions, parse_formula, parse_program};
use crate::abstraction::{check_complete, check_sound, Counterexample};
use crate::bat::{reachable_states, BasicActionTheory, PrimitiveMoves, DEFAULT_STATE_BUDGET};
use crate::congolog::is_situation_determined;
use crate::error::{Error, Result};
use crate::kernel::{Formula, GroundAction};
use crate::mapping::TheoryPair;
use crate::monitor::{
    forecast_next, invert_unchecked, verify_constraint2, ForecastStatus, Monitor, TraceExplanation,
};
use crate::planning::{
    plan, project, refine_plan, refinement_alternatives, Mode, PlanOutcome, PlanRequest,
    Projection, RefineMode, RefinedPlan,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    Validate,
    Simulate,
    CheckSd,
    CheckSound,
    CheckComplete,
    Plan,
    Refine,
    Project,
    Explain,
    Forecast,
    VerifyConstraints,
}

impl Verb {
    pub const ALL: [Verb; 11] = [
        Verb::Validate,
        Verb::Simulate,
        Verb::CheckSd,
        Verb::CheckSound,
        Verb::CheckComplete,
        Verb::Plan,
        Verb::Refine,
        Verb::Project,
        Verb::Explain,
        Verb::Forecast,
        Verb::VerifyConstraints,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Verb::Validate => "validate",
            Verb::Simulate => "simulate",
            Verb::CheckSd => "check-sd",
            Verb::CheckSound => "check-sound",
            Verb::CheckComplete => "check-complete",
            Verb::Plan => "plan",
            Verb::Refine => "refine",
            Verb::Project => "project",
            Verb::Explain => "explain",
            Verb::Forecast => "forecast",
            Verb::VerifyConstraints => "verify-constraints",
        }
    }
}

impl FromStr for Verb {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Verb, String> {
        Verb::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    High,
    Low,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GraphFormat {
    #[default]
    Edges,
    Dot,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub budget: usize,
    pub mode: Mode,
    pub model: Option<usize>,
    pub horizon: usize,
    /// Theory to simulate, plan or project in. Simulation and `check-sd`
    /// default to the low level, planning and projection to the high level.
    pub level: Option<Level>,
    pub trace: Option<String>,
    pub goal: Option<String>,
    pub plan: Option<String>,
    pub program: Option<String>,
    /// For `forecast`: ground high-level actions to classify explicitly.
    pub candidates: Option<String>,
    /// For `refine`: list every segment-wise refinement.
    pub alternatives: bool,
    /// For `explain`: skip the Constraint 1 check.
    pub unchecked: bool,
    pub graph: GraphFormat,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            budget: DEFAULT_STATE_BUDGET,
            mode: Mode::Entailed,
            model: None,
            horizon: 10,
            level: None,
            trace: None,
            goal: None,
            plan: None,
            program: None,
            candidates: None,
            alternatives: false,
            unchecked: false,
            graph: GraphFormat::Edges,
        }
    }
}

/// Exit status plus the same result as plain text and as JSON.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    pub code: i32,
    pub text: String,
    pub json: Value,
}

impl CommandOutput {
    fn new(code: i32, text: String, json: Value) -> CommandOutput {
        CommandOutput { code, text, json }
    }
}

/// Exit status for an error: budget overruns are 3, failures of the
/// property being asked about are 1, everything else is a usage error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        _ if e.is_budget() => EXIT_BUDGET,
        Error::NoRefinement { .. }
        | Error::SoundnessAssumptionViolated { .. }
        | Error::AmbiguousExplanation { .. }
        | Error::NonSdTemplate { .. }
        | Error::ConstraintNotVerified => EXIT_FAILED,
        _ => EXIT_USAGE,
    }
}

pub fn error_output(e: &Error) -> CommandOutput {
    CommandOutput::new(
        exit_code(e),
        format!("error: {e}\n"),
        json!({ "error": e.to_string() }),
    )
}

pub fn run_command(verb: Verb, pair: &TheoryPair, opts: &Options) -> CommandOutput {
    let out = match verb {
        Verb::Validate => validate(pair, opts),
        Verb::Simulate => simulate(pair, opts),
        Verb::CheckSd => check_sd(pair, opts),
        Verb::CheckSound => sound(pair, opts),
        Verb::CheckComplete => complete(pair, opts),
        Verb::Plan => plan_cmd(pair, opts),
        Verb::Refine => refine(pair, opts),
        Verb::Project => project_cmd(pair, opts),
        Verb::Explain => explain(pair, opts),
        Verb::Forecast => forecast(pair, opts),
        Verb::VerifyConstraints => constraints(pair, opts),
    };
    out.unwrap_or_else(|e| error_output(&e))
}

fn required<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str> {
    v.as_deref()
        .ok_or_else(|| Error::Usage(format!("missing required option --{flag}")))
}

fn strings(xs: &[GroundAction]) -> Vec<String> {
    xs.iter().map(|a| a.to_string()).collect()
}

fn joined(xs: &[GroundAction]) -> String {
    strings(xs).join(", ")
}

fn models(bat: &BasicActionTheory, model: Option<usize>) -> Result<Vec<usize>> {
    match model {
        Some(m) => {
            bat.initial_model(m)?;
            Ok(vec![m])
        }
        None => Ok((0..bat.initial_models().len()).collect()),
    }
}

fn level(pair: &TheoryPair, l: Option<Level>, default: Level) -> &BasicActionTheory {
    match l.unwrap_or(default) {
        Level::High => &pair.high,
        Level::Low => &pair.low,
    }
}

fn witness_text(c: &Counterexample) -> String {
    let mut s = format!("  witness: {}\n", c.detail);
    if let Some(m) = c.hl_model {
        let _ = writeln!(s, "  high-level model: {m}");
    }
    if let Some(m) = c.ll_model {
        let _ = writeln!(s, "  low-level model: {m}");
    }
    if c.ll_model.is_some() {
        let _ = writeln!(s, "  low-level trace: [{}]", c.ll_trace.join(", "));
    }
    if let Some(a) = &c.hl_action {
        let _ = writeln!(s, "  high-level action: {a}");
    }
    if !c.refinement.is_empty() {
        let _ = writeln!(s, "  refinement: [{}]", c.refinement.join(", "));
    }
    s
}

fn validate(pair: &TheoryPair, opts: &Options) -> Result<CommandOutput> {
    let sd = pair.check_templates_sd(opts.budget)?;
    let mut text = format!(
        "high level: {} objects, {} fluents, {} action types, {} initial model(s)\n\
         low level: {} fluents, {} action types, {} initial model(s)\n",
        pair.high.domain().len(),
        pair.high.vocab().fluents().len(),
        pair.high.actions().len(),
        pair.high.initial_models().len(),
        pair.low.vocab().fluents().len(),
        pair.low.actions().len(),
        pair.low.initial_models().len(),
    );
    let json = json!({
        "high": {
            "objects": pair.high.domain().len(),
            "fluents": pair.high.vocab().fluents().len(),
            "actions": pair.high.actions().len(),
            "models": pair.high.initial_models().len(),
        },
        "low": {
            "fluents": pair.low.vocab().fluents().len(),
            "actions": pair.low.actions().len(),
            "models": pair.low.initial_models().len(),
        },
        "valid": sd.is_none(),
    });
    match sd {
        None => {
            text.push_str("VALID\n");
            Ok(CommandOutput::new(EXIT_OK, text, json))
        }
        Some((a, w, wit)) => {
            let _ = writeln!(
                text,
                "INVALID: template of {a} is not situation-determined in {} after [{}]",
                pair.low.vocab().render(&w),
                joined(&wit.trace)
            );
            Ok(CommandOutput::new(EXIT_FAILED, text, json))
        }
    }
}

fn simulate(pair: &TheoryPair, opts: &Options) -> Result<CommandOutput> {
    let bat = level(pair, opts.level, Level::Low);
    let Some(trace) = &opts.trace else {
        let lts = reachable_states(bat.initial_models(), &PrimitiveMoves(bat), opts.budget)?;
        let text = match opts.graph {
            GraphFormat::Edges => lts.edge_list(bat.vocab()),
            GraphFormat::Dot => lts.to_dot(bat.vocab()),
        };
        let json = json!({
            "states": lts.nodes.iter().map(|w| bat.vocab().render(w)).collect::<Vec<_>>(),
            "edges": lts.edges.iter().map(|e| json!([e.src, e.label.to_string(), e.dst])).collect::<Vec<_>>(),
        });
        return Ok(CommandOutput::new(EXIT_OK, text, json));
    };
    let trace = parse_actions(trace)?;
    let mut text = String::new();
    let mut runs = Vec::new();
    let mut code = EXIT_OK;
    for m in models(bat, opts.model)? {
        let mut w = bat.initial_model(m)?.clone();
        let _ = writeln!(text, "model {m}");
        let _ = writeln!(text, "  0: {}", bat.vocab().render(&w));
        let mut states = vec![bat.vocab().render(&w)];
        let mut blocked = None;
        for (i, a) in trace.iter().enumerate() {
            if !bat.poss(a, &w)? {
                let _ = writeln!(text, "  {a} is not possible at step {}", i + 1);
                blocked = Some(i + 1);
                code = EXIT_FAILED;
                break;
            }
            w = bat.step(a, &w)?;
            let _ = writeln!(text, "  {}: {a} -> {}", i + 1, bat.vocab().render(&w));
            states.push(bat.vocab().render(&w));
        }
        runs.push(json!({ "model": m, "states": states, "blocked_at": blocked }));
    }
    Ok(CommandOutput::new(code, text, json!({ "runs": runs })))
}

fn check_sd(pair: &TheoryPair, opts: &Options) -> Result<CommandOutput> {
    let Some(src) = &opts.program else {
        return Ok(match pair.check_templates_sd(opts.budget)? {
            None => CommandOutput::new(
                EXIT_OK,
                "SD: every instantiated template\n".into(),
                json!({ "sd": true }),
            ),
            Some((a, _, wit)) => CommandOutput::new(
                EXIT_FAILED,
                format!(
                    "NOT SD: template of {a} after [{}] leaves {} or {}\n",
                    joined(&wit.trace),
                    wit.first,
                    wit.second
                ),
                json!({ "sd": false, "action": a.to_string(), "trace": strings(&wit.trace) }),
            ),
        });
    };
    let p = parse_program(src, &[])?;
    let bat = level(pair, opts.level, Level::Low);
    let mut text = String::new();
    let mut results = Vec::new();
    let mut code = EXIT_OK;
    for m in models(bat, opts.model)? {
        match is_situation_determined(&p, bat.initial_model(m)?, bat, opts.budget)? {
            None => {
                let _ = writeln!(text, "model {m}: SD");
                results.push(json!({ "model": m, "sd": true }));
            }
            Some(wit) => {
                code = EXIT_FAILED;
                let _ = writeln!(
                    text,
                    "model {m}: NOT SD after [{}]: {} or {}",
                    joined(&wit.trace),
                    wit.first,
                    wit.second
                );
                results.push(json!({ "model": m, "sd": false, "trace": strings(&wit.trace) }));
            }
        }
    }
    Ok(CommandOutput::new(
        code,
        text,
        json!({ "results": results }),
    ))
}

fn sound(pair: &TheoryPair, opts: &Options) -> Result<CommandOutput> {
    let v = check_sound(pair, opts.budget)?;
    let mut text = if v.holds { "SOUND\n" } else { "NOT SOUND\n" }.to_string();
    if let Some(c) = &v.witness {
        text.push_str(&witness_text(c));
    }
    let code = if v.holds { EXIT_OK } else { EXIT_FAILED };
    Ok(CommandOutput::new(
        code,
        text,
        json!({ "sound": v.holds, "witness": v.witness }),
    ))
}

fn complete(pair: &TheoryPair, opts: &Options) -> Result<CommandOutput> {
    let v = check_complete(pair, opts.budget)?;
    let mut text = if v.holds {
        "COMPLETE\n"
    } else {
        "NOT COMPLETE\n"
    }
    .to_string();
    if let Some(c) = &v.witness {
        text.push_str(&witness_text(c));
    }
    let code = if v.holds { EXIT_OK } else { EXIT_FAILED };
    Ok(CommandOutput::new(
        code,
        text,
        json!({ "complete": v.holds, "witness": v.witness }),
    ))
}

fn goal(opts: &Options) -> Result<Formula> {
    parse_formula(required(&opts.goal, "goal")?, &[])
}

fn plan_cmd(pair: &TheoryPair, opts: &Options) -> Result<CommandOutput> {
    let req = PlanRequest {
        goal: goal(opts)?,
        horizon: opts.horizon,
        mode: opts.mode,
    };
    Ok(
        match plan(level(pair, opts.level, Level::High), &req, opts.budget)? {
            PlanOutcome::Found(p) => CommandOutput::new(
                EXIT_OK,
                format!("PLAN ({} steps): {}\n", p.len(), joined(&p)),
                json!({ "outcome": "found", "plan": strings(&p) }),
            ),
            PlanOutcome::NoPlan => CommandOutput::new(
                EXIT_FAILED,
                "NO PLAN\n".into(),
                json!({ "outcome": "no-plan" }),
            ),
            PlanOutcome::HorizonExhausted => CommandOutput::new(
                EXIT_FAILED,
                format!("HORIZON EXHAUSTED after {} steps\n", opts.horizon),
                json!({ "outcome": "horizon-exhausted" }),
            ),
        },
    )
}

fn refined_text(r: &RefinedPlan) -> String {
    let mut s = format!(
        "model {}: {} low-level actions\n",
        r.model,
        r.ll_trace.len()
    );
    for (a, seg) in r.hl_plan.iter().zip(&r.segments) {
        let _ = writeln!(s, "  [{}] => {a}", joined(seg));
    }
    s
}

fn refined_json(r: &RefinedPlan) -> Value {
    json!({
        "model": r.model,
        "segments": r.segments_text(),
        "ll_trace": strings(&r.ll_trace),
    })
}

fn refine(pair: &TheoryPair, opts: &Options) -> Result<CommandOutput> {
    let plan = parse_actions(required(&opts.plan, "plan")?)?;
    let mode = match opts.model {
        Some(m) => RefineMode::Single(m),
        None => RefineMode::PerModel,
    };
    let mut text = String::new();
    if opts.alternatives {
        let mut all = Vec::new();
        for m in models(&pair.low, opts.model)? {
            for (i, r) in refinement_alternatives(pair, &plan, m, opts.budget)?
                .iter()
                .enumerate()
            {
                let _ = write!(text, "alternative {}, {}", i + 1, refined_text(r));
                all.push(refined_json(r));
            }
        }
        let code = if all.is_empty() { EXIT_FAILED } else { EXIT_OK };
        if all.is_empty() {
            text.push_str("NO REFINEMENT\n");
        }
        return Ok(CommandOutput::new(
            code,
            text,
            json!({ "alternatives": all }),
        ));
    }
    let refined = refine_plan(pair, &plan, mode, opts.budget)?;
    for r in &refined {
        text.push_str(&refined_text(r));
        let _ = writeln!(text, "  trace: [{}]", joined(&r.ll_trace));
    }
    let json = json!({ "refinements": refined.iter().map(refined_json).collect::<Vec<_>>() });
    Ok(CommandOutput::new(EXIT_OK, text, json))
}

fn project_cmd(pair: &TheoryPair, opts: &Options) -> Result<CommandOutput> {
    let plan = parse_actions(required(&opts.plan, "plan")?)?;
    let phi = match &opts.goal {
        Some(g) => parse_formula(g, &[])?,
        None => Formula::True,
    };
    let p = project(level(pair, opts.level, Level::High), &plan, &phi)?;
    let (word, code) = match p {
        Projection::Entailed => ("ENTAILED", EXIT_OK),
        Projection::SatisfiableOnly => ("SATISFIABLE-ONLY", EXIT_FAILED),
        Projection::Unsatisfiable => ("UNSATISFIABLE", EXIT_FAILED),
    };
    Ok(CommandOutput::new(
        code,
        format!("{word}\n"),
        json!({ "projection": p }),
    ))
}

fn explanations(pair: &TheoryPair, opts: &Options) -> Result<Vec<TraceExplanation>> {
    let trace = parse_actions(required(&opts.trace, "trace")?)?;
    let ms = models(&pair.low, opts.model)?;
    if opts.unchecked {
        return ms
            .iter()
            .map(|&m| invert_unchecked(pair, &trace, m))
            .collect();
    }
    let mut mon = Monitor::new(pair, opts.budget);
    mon.verify_constraint1()?;
    ms.iter().map(|&m| mon.invert(&trace, m)).collect()
}

fn explanation_text(e: &TraceExplanation) -> String {
    let mut s = format!(
        "model {}: {}\n",
        e.model,
        if e.hl_sequence.is_empty() {
            "(no high-level action)".to_string()
        } else {
            joined(&e.hl_sequence)
        }
    );
    for (a, seg) in e.hl_sequence.iter().zip(&e.segments) {
        let _ = writeln!(s, "  [{}] => {a}", joined(seg));
    }
    if !e.residual.is_empty() {
        let status = if e.mid_refinement_of.is_empty() {
            "not part of any refinement".to_string()
        } else {
            format!("mid-refinement of {}", joined(&e.mid_refinement_of))
        };
        let _ = writeln!(s, "  residual [{}]: {status}", joined(&e.residual));
    }
    s
}

fn explain(pair: &TheoryPair, opts: &Options) -> Result<CommandOutput> {
    let es = explanations(pair, opts)?;
    let text: String = es.iter().map(explanation_text).collect();
    let json = json!({ "explanations": es.iter().map(|e| e.report()).collect::<Vec<_>>() });
    Ok(CommandOutput::new(EXIT_OK, text, json))
}

fn forecast(pair: &TheoryPair, opts: &Options) -> Result<CommandOutput> {
    let mut runs: Vec<(Option<usize>, Vec<GroundAction>)> = Vec::new();
    if opts.trace.is_some() {
        for e in explanations(pair, opts)? {
            runs.push((Some(e.model), e.hl_sequence));
        }
    } else {
        runs.push((None, parse_actions(required(&opts.plan, "plan")?)?));
    }
    let candidates = match &opts.candidates {
        Some(c) => parse_actions(c)?,
        None => Vec::new(),
    };
    let mut text = String::new();
    let mut out = Vec::new();
    for (m, seq) in runs {
        let f = forecast_next(&pair.high, &seq)?;
        if let Some(m) = m {
            let _ = writeln!(text, "model {m}: after [{}]", joined(&seq));
        } else {
            let _ = writeln!(text, "after [{}]", joined(&seq));
        }
        if f.satisfiable.is_empty() {
            text.push_str("  no high-level action can occur next\n");
        }
        for a in &f.satisfiable {
            let _ = writeln!(text, "  satisfiable: {a}");
        }
        let asked: Vec<Value> = candidates
            .iter()
            .map(|a| {
                let st = f.status(a);
                if st == ForecastStatus::Impossible {
                    let _ = writeln!(text, "  impossible: {a}");
                }
                json!({ "action": a.to_string(), "status": st })
            })
            .collect();
        out.push(json!({
            "model": m,
            "after": strings(&seq),
            "satisfiable": strings(&f.satisfiable),
            "candidates": asked,
        }));
    }
    Ok(CommandOutput::new(
        EXIT_OK,
        text,
        json!({ "forecasts": out }),
    ))
}

fn constraints(pair: &TheoryPair, opts: &Options) -> Result<CommandOutput> {
    let mut mon = Monitor::new(pair, opts.budget);
    let c1 = mon.verify_constraint1()?.clone();
    let c2 = verify_constraint2(pair, opts.budget)?;
    let mut text = String::new();
    for (name, clause) in [("1(a)", &c1.a), ("1(b)", &c1.b), ("1(c)", &c1.c)] {
        let _ = writeln!(
            text,
            "constraint {name}: {}",
            if clause.holds { "HOLDS" } else { "FAILS" }
        );
        if let Some(w) = &clause.witness {
            let _ = writeln!(
                text,
                "  after [{}] in model {}: refinement [{}] of {}{}",
                w.ll_trace.join(", "),
                w.ll_model,
                w.execution.join(", "),
                w.hl_action,
                w.other
                    .as_ref()
                    .map(|o| format!(" is also a partial refinement of {o}"))
                    .unwrap_or_default()
            );
        }
    }
    let _ = writeln!(
        text,
        "constraint 2: {}",
        if c2.holds { "HOLDS" } else { "FAILS" }
    );
    if let Some(t) = &c2.counterexample {
        let _ = writeln!(
            text,
            "  model {}: [{}] is not a partial refinement of any high-level sequence",
            c2.ll_model.unwrap_or(0),
            t.join(", ")
        );
    }
    let ok = c1.holds() && c2.holds;
    Ok(CommandOutput::new(
        if ok { EXIT_OK } else { EXIT_FAILED },
        text,
        json!({ "constraint1": c1, "constraint2": c2 }),
    ))
}
