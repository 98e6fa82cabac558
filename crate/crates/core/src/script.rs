//! Scenario scripts and the reports produced by running them.
//!
//! ```text
//! assert m1 S2 = false
//! propagate
//! conflicts
//! relax O3
//! restore O3
//! retract m1
//! diagnose max=3
//! dump rules A1
//! dump domains
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::domain::{Justification, Network};
use crate::engine::PropagationOptions;
use crate::error::NetworkError;
use crate::event::{Event, EventKind};
use crate::netspec::{check_value, lex, Line, NetworkSpec, ParseError};
use crate::{dump_rules, ConstraintId, ObservationId, VariableId};

/// Cardinality bound used by `diagnose` without `max=`.
pub const DEFAULT_MAX_CARDINALITY: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Assert {
        id: String,
        variable: String,
        value: String,
    },
    Retract {
        id: String,
    },
    Relax {
        constraint: String,
    },
    Restore {
        constraint: String,
    },
    Propagate,
    Conflicts,
    Diagnose {
        max: usize,
    },
    DumpRules {
        constraint: String,
    },
    DumpDomains,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Script {
    pub commands: Vec<Command>,
}

/// Parses a script, resolving names against `spec`.
pub fn parse_script(text: &str, spec: &NetworkSpec) -> Result<Script, ParseError> {
    let domains = spec.domains();
    let constraints: HashSet<&str> = spec.constraints.iter().map(|c| c.id.as_str()).collect();
    let mut observations: HashSet<String> =
        spec.observations.iter().map(|o| o.id.clone()).collect();
    let mut commands = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let toks = lex(raw);
        if toks.is_empty() {
            continue;
        }
        let mut l = Line::new(i + 1, &toks, raw);
        let (kcol, keyword) = l.word("a command")?;
        let constraint = |l: &mut Line| -> Result<String, ParseError> {
            let (c, id) = l.word("a constraint id")?;
            if !constraints.contains(id.as_str()) {
                return Err(l.err_at(c, format!("unknown constraint `{id}`")));
            }
            Ok(id)
        };
        let cmd = match keyword.as_str() {
            "assert" => {
                let (icol, id) = l.word("an observation id")?;
                if !observations.insert(id.clone()) {
                    return Err(l.err_at(icol, format!("observation `{id}` already declared")));
                }
                let (vc, variable) = l.word("a variable")?;
                l.sym('=')?;
                let (xc, value) = l.word("a value")?;
                check_value(&l, &domains, vc, &variable, xc, &value)?;
                Command::Assert {
                    id,
                    variable,
                    value,
                }
            }
            "retract" => {
                let (c, id) = l.word("an observation id")?;
                if !observations.contains(&id) {
                    return Err(l.err_at(c, format!("unknown observation `{id}`")));
                }
                Command::Retract { id }
            }
            "relax" => Command::Relax {
                constraint: constraint(&mut l)?,
            },
            "restore" => Command::Restore {
                constraint: constraint(&mut l)?,
            },
            "propagate" => Command::Propagate,
            "conflicts" => Command::Conflicts,
            "diagnose" => {
                let max = if l.eat_word("max") {
                    l.sym('=')?;
                    let (c, k) = l.word("a cardinality")?;
                    match k.parse::<usize>() {
                        Ok(k) if k >= 1 => k,
                        _ => return Err(l.err_at(c, format!("`{k}` is not a positive integer"))),
                    }
                } else {
                    DEFAULT_MAX_CARDINALITY
                };
                Command::Diagnose { max }
            }
            "dump" => {
                let (c, what) = l.word("`rules` or `domains`")?;
                match what.as_str() {
                    "rules" => Command::DumpRules {
                        constraint: constraint(&mut l)?,
                    },
                    "domains" => Command::DumpDomains,
                    _ => return Err(l.err_at(c, format!("cannot dump `{what}`"))),
                }
            }
            other => return Err(l.err_at(kcol, format!("unknown command `{other}`"))),
        };
        l.finish()?;
        commands.push(cmd);
    }
    Ok(Script { commands })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub propagation: PropagationOptions,
    /// Report observations as members of conflict sets.
    pub include_observations: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConflictReport {
    pub step: usize,
    pub variable: String,
    pub constraints: Vec<String>,
    pub observations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosisEntry {
    pub constraints: Vec<String>,
    pub cardinality: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeEntry {
    pub path: Vec<String>,
    /// `None` at a consistent node.
    pub conflict: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosisRun {
    pub step: usize,
    pub max: usize,
    pub diagnoses: Vec<DiagnosisEntry>,
    pub tree: Vec<TreeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub events: Vec<Json>,
    pub conflicts: Vec<ConflictReport>,
    pub diagnoses: Vec<DiagnosisRun>,
    pub domains: BTreeMap<String, Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub dumps: Vec<String>,
    pub consistent: bool,
}

impl Report {
    /// 0 when consistent or a diagnosis was requested, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.consistent || !self.diagnoses.is_empty() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(out, "{}", event_line(e));
        }
        for c in &self.conflicts {
            let _ = writeln!(
                out,
                "step {}: conflict on {}: {{{}}} observations {{{}}}",
                c.step,
                c.variable,
                c.constraints.join(", "),
                c.observations.join(", ")
            );
        }
        for d in &self.diagnoses {
            let sets: Vec<String> = d
                .diagnoses
                .iter()
                .map(|x| format!("{{{}}}", x.constraints.join(", ")))
                .collect();
            let _ = writeln!(
                out,
                "step {}: diagnoses (max {}): {}",
                d.step,
                d.max,
                sets.join(" ")
            );
        }
        for dump in &self.dumps {
            out.push_str(dump);
        }
        let _ = writeln!(out, "domains:");
        for (v, ts) in &self.domains {
            let _ = writeln!(out, "  {v} = {{{}}}", ts.join(","));
        }
        let _ = writeln!(
            out,
            "{}",
            if self.consistent {
                "consistent"
            } else {
                "inconsistent"
            }
        );
        out
    }
}

fn event_line(e: &Json) -> String {
    let mut parts: Vec<String> = Vec::new();
    if let Json::Object(m) = e {
        for (k, v) in m {
            if k == "step" || k == "op" || k == "seq" {
                continue;
            }
            parts.push(format!("{k}={}", v));
        }
        format!(
            "[{}:{}] {} {}",
            m.get("step").unwrap_or(&Json::Null),
            m.get("seq").unwrap_or(&Json::Null),
            m.get("op").and_then(Json::as_str).unwrap_or("?"),
            parts.join(" ")
        )
    } else {
        e.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("building the network: {0}")]
    Build(NetworkError),
    #[error("step {step}: {source}")]
    Step { step: usize, source: NetworkError },
}

/// Builds the network, asserts the declared observations, runs `script` and
/// returns the report together with the final network.
pub fn execute(
    spec: &NetworkSpec,
    script: &Script,
    options: RunOptions,
) -> Result<(Report, Network), RunError> {
    let mut net = spec.build().map_err(RunError::Build)?;
    net.set_options(options.propagation);
    let mut runner = Runner {
        options,
        event_step: Vec::new(),
        conflicts: Vec::new(),
        diagnoses: Vec::new(),
        dumps: Vec::new(),
    };
    for o in &spec.observations {
        let v = net.variable_by_name(&o.variable).map_err(RunError::Build)?;
        let x = net.value_by_token(v, &o.value).map_err(RunError::Build)?;
        net.assert_observation(&o.id, v, x)
            .map_err(RunError::Build)?;
    }
    net.propagate();
    runner.mark(&net, 0);
    for (i, cmd) in script.commands.iter().enumerate() {
        let step = i + 1;
        runner
            .run(&mut net, step, cmd)
            .map_err(|source| RunError::Step { step, source })?;
        runner.mark(&net, step);
    }
    let report = Report {
        events: net
            .events()
            .iter()
            .zip(&runner.event_step)
            .map(|(e, &s)| event_json(&net, s, e))
            .collect(),
        conflicts: runner.conflicts,
        diagnoses: runner.diagnoses,
        domains: net.visible_tokens(),
        dumps: runner.dumps,
        consistent: net.is_consistent(),
    };
    Ok((report, net))
}

pub fn run_script(
    spec: &NetworkSpec,
    script: &Script,
    options: RunOptions,
) -> Result<Report, RunError> {
    execute(spec, script, options).map(|r| r.0)
}

struct Runner {
    options: RunOptions,
    event_step: Vec<usize>,
    conflicts: Vec<ConflictReport>,
    diagnoses: Vec<DiagnosisRun>,
    dumps: Vec<String>,
}

impl Runner {
    fn mark(&mut self, net: &Network, step: usize) {
        self.event_step.resize(net.events().len(), step);
    }

    fn run(&mut self, net: &mut Network, step: usize, cmd: &Command) -> Result<(), NetworkError> {
        match cmd {
            Command::Assert {
                id,
                variable,
                value,
            } => {
                let v = net.variable_by_name(variable)?;
                let x = net.value_by_token(v, value)?;
                net.assert_observation(id, v, x)?;
            }
            Command::Retract { id } => {
                let o = net
                    .observation_by_label(id)
                    .ok_or_else(|| NetworkError::UnknownObservationLabel(id.clone()))?;
                net.retract_observation(o)?;
            }
            Command::Relax { constraint } => {
                let c = net.constraint_by_label(constraint)?;
                net.relax(c)?;
            }
            Command::Restore { constraint } => {
                let c = net.constraint_by_label(constraint)?;
                net.restore(c)?;
            }
            Command::Propagate => {
                net.propagate();
            }
            Command::Conflicts => {
                if let Some((var, cs)) = net.current_conflict() {
                    let mut constraints = labels(net, cs.constraints.iter().copied());
                    let observations = obs_labels(net, cs.observations.iter().copied());
                    if self.options.include_observations {
                        constraints.extend(observations.iter().cloned());
                    }
                    self.conflicts.push(ConflictReport {
                        step,
                        variable: net.variable_name(var).to_string(),
                        constraints,
                        observations,
                    });
                }
            }
            Command::Diagnose { max } => {
                let rep = net.diagnose(*max)?;
                self.diagnoses.push(DiagnosisRun {
                    step,
                    max: *max,
                    diagnoses: rep
                        .diagnoses
                        .iter()
                        .map(|d| DiagnosisEntry {
                            constraints: labels(net, d.constraints.iter().copied()),
                            cardinality: d.cardinality(),
                        })
                        .collect(),
                    tree: rep
                        .tree
                        .iter()
                        .map(|n| TreeEntry {
                            path: labels(net, n.path.iter().copied()),
                            conflict: n.conflict.as_ref().map(|c| labels(net, c.iter().copied())),
                        })
                        .collect(),
                });
            }
            Command::DumpRules { constraint } => {
                let c = net.constraint_by_label(constraint)?;
                let text = dump_rules(
                    net.rules_of(c)?,
                    |v| net.variable_name(v),
                    |v, x| net.token(v, x),
                );
                self.dumps.push(format!("rules {constraint}:\n{text}"));
            }
            Command::DumpDomains => {
                let mut text = format!("domains at step {step}:\n");
                for (v, ts) in net.visible_tokens() {
                    let _ = writeln!(text, "  {v} = {{{}}}", ts.join(","));
                }
                self.dumps.push(text);
            }
        }
        Ok(())
    }
}

fn labels(net: &Network, ids: impl Iterator<Item = ConstraintId>) -> Vec<String> {
    ids.map(|c| net.constraints()[c.index()].label.clone())
        .collect()
}

fn obs_labels(net: &Network, ids: impl Iterator<Item = ObservationId>) -> Vec<String> {
    ids.map(|o| net.observations()[o.index()].label.clone())
        .collect()
}

fn cause(net: &Network, j: Justification) -> Json {
    match j {
        Justification::Firing(f) => {
            let firing = &net.firings()[f.index()];
            json!({
                "firing": f.0,
                "rule": rule_number(net, firing.rule),
                "constraint": net.constraints()[firing.owner.index()].label,
            })
        }
        Justification::Observation(o) => {
            json!({ "observation": net.observations()[o.index()].label })
        }
    }
}

/// 1-based position of a rule within its constraint's canonical listing.
fn rule_number(net: &Network, rule: crate::RuleId) -> u32 {
    net.rule_ordinal(rule) + 1
}

fn var_values(net: &Network, pairs: &[(VariableId, crate::Value)]) -> Json {
    Json::Array(
        pairs
            .iter()
            .map(|&(v, x)| json!({ "variable": net.variable_name(v), "value": net.token(v, x) }))
            .collect(),
    )
}

fn event_json(net: &Network, step: usize, e: &Event) -> Json {
    let mut m = Map::new();
    m.insert("step".into(), json!(step));
    m.insert("seq".into(), json!(e.seq));
    let (op, payload) = match &e.kind {
        EventKind::Assert {
            label,
            variable,
            value,
            internal,
            ..
        } => (
            "assert",
            json!({
                "observation": label,
                "variable": net.variable_name(*variable),
                "value": net.token(*variable, *value),
                "internal": internal,
            }),
        ),
        EventKind::Fire {
            firing,
            rule,
            constraint,
            supports,
        } => (
            "fire",
            json!({
                "firing": firing.0,
                "rule": rule_number(net, *rule),
                "constraint": net.constraints()[constraint.index()].label,
                "conditions": supports.iter().map(|(l, js)| json!({
                    "variable": net.variable_name(l.variable),
                    "value": net.token(l.variable, l.value),
                    "supports": js.iter().map(|j| j.to_string()).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            }),
        ),
        EventKind::Mask {
            variable,
            values,
            cause: c,
            ..
        } => (
            "mask",
            json!({
                "variable": net.variable_name(*variable),
                "values": values.iter().map(|&x| net.token(*variable, x)).collect::<Vec<_>>(),
                "cause": cause(net, *c),
            }),
        ),
        EventKind::Unmask {
            variable,
            value,
            cause: c,
        } => (
            "unmask",
            json!({
                "variable": net.variable_name(*variable),
                "value": net.token(*variable, *value),
                "cause": cause(net, *c),
            }),
        ),
        EventKind::Cancel { firing, unmasked } => {
            let f = &net.firings()[firing.index()];
            (
                "cancel",
                json!({
                    "firing": firing.0,
                    "rule": rule_number(net, f.rule),
                    "constraint": net.constraints()[f.owner.index()].label,
                    "unmasked": var_values(net, unmasked),
                }),
            )
        }
        EventKind::Retract {
            observation,
            unmasked,
        } => (
            "retract",
            json!({
                "observation": net.observations()[observation.index()].label,
                "unmasked": var_values(net, unmasked),
            }),
        ),
        EventKind::Relax { constraint } => (
            "relax",
            json!({ "constraint": net.constraints()[constraint.index()].label }),
        ),
        EventKind::Restore { constraint } => (
            "restore",
            json!({ "constraint": net.constraints()[constraint.index()].label }),
        ),
        EventKind::Conflict {
            variable,
            constraints,
            observations,
        } => (
            "conflict",
            json!({
                "variable": net.variable_name(*variable),
                "constraints": labels(net, constraints.iter().copied()),
                "observations": obs_labels(net, observations.iter().copied()),
            }),
        ),
    };
    m.insert("op".into(), json!(op));
    if let Json::Object(p) = payload {
        m.extend(p);
    }
    Json::Object(m)
}
