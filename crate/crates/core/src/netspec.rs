//! Line-oriented network description format.
//!
//! ```text
//! # comment
//! var E1 bool
//! var C { red green blue }
//! gate O1 or E1 E2 -> X
//! gate A1 and X Y -> Z norelax
//! table T ( C E1 ) : (red,false) (green,true)
//! obs m1 E1 = false
//! ```

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::domain::Network;
use crate::error::NetworkError;
use crate::gates::{gate_table, GateKind};
use crate::{Value, VariableId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    /// `None` for `bool`.
    pub tokens: Option<Vec<String>>,
}

impl VarDecl {
    pub fn domain(&self) -> Vec<String> {
        match &self.tokens {
            Some(t) => t.clone(),
            None => vec!["false".into(), "true".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintBody {
    Gate {
        kind: GateKind,
        inputs: Vec<String>,
        output: String,
    },
    Table {
        scope: Vec<String>,
        tuples: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintDecl {
    pub id: String,
    pub body: ConstraintBody,
    pub relaxable: bool,
}

impl ConstraintDecl {
    pub fn scope(&self) -> Vec<&str> {
        match &self.body {
            ConstraintBody::Gate { inputs, output, .. } => inputs
                .iter()
                .map(String::as_str)
                .chain([output.as_str()])
                .collect(),
            ConstraintBody::Table { scope, .. } => scope.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObsDecl {
    pub id: String,
    pub variable: String,
    pub value: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NetworkSpec {
    pub variables: Vec<VarDecl>,
    pub constraints: Vec<ConstraintDecl>,
    pub observations: Vec<ObsDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Word(String),
    Sym(char),
    Arrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Arrow => f.write_str("`->`"),
        }
    }
}

const SYMBOLS: &str = "(){},:=";

/// Splits a line into tokens with their 1-based columns. `#` starts a comment.
pub(crate) fn lex(line: &str) -> Vec<(usize, Tok)> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (at, c) = chars[i];
        let col = line[..at].chars().count() + 1;
        if c == '#' {
            break;
        } else if c.is_whitespace() {
            i += 1;
        } else if SYMBOLS.contains(c) {
            out.push((col, Tok::Sym(c)));
            i += 1;
        } else if c == '-' && chars.get(i + 1).map(|p| p.1) == Some('>') {
            out.push((col, Tok::Arrow));
            i += 2;
        } else {
            let start = i;
            while i < chars.len() {
                let c = chars[i].1;
                if c.is_whitespace() || c == '#' || SYMBOLS.contains(c) {
                    break;
                }
                if c == '-' && chars.get(i + 1).map(|p| p.1) == Some('>') {
                    break;
                }
                i += 1;
            }
            let end = chars.get(i).map_or(line.len(), |p| p.0);
            out.push((col, Tok::Word(line[chars[start].0..end].to_string())));
        }
    }
    out
}

/// Cursor over one line's tokens.
pub(crate) struct Line<'a> {
    pub line: usize,
    toks: &'a [(usize, Tok)],
    pos: usize,
    end_col: usize,
}

impl<'a> Line<'a> {
    pub fn new(line: usize, toks: &'a [(usize, Tok)], text: &str) -> Self {
        Line {
            line,
            toks,
            pos: 0,
            end_col: text.chars().count() + 1,
        }
    }

    pub fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.0)
    }

    pub fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col(),
            message: message.into(),
        }
    }

    pub fn err_at(&self, col: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col,
            message: message.into(),
        }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    pub fn word(&mut self, what: &str) -> Result<(usize, String), ParseError> {
        match self.toks.get(self.pos) {
            Some((c, Tok::Word(w))) => {
                self.pos += 1;
                Ok((*c, w.clone()))
            }
            Some((_, t)) => Err(self.err(format!("expected {what}, found {t}"))),
            None => Err(self.err(format!("expected {what}, found end of line"))),
        }
    }

    pub fn sym(&mut self, s: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(c)) if *c == s => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected `{s}`, found {t}"))),
            None => Err(self.err(format!("expected `{s}`, found end of line"))),
        }
    }

    pub fn eat_sym(&mut self, s: char) -> bool {
        if self.peek() == Some(&Tok::Sym(s)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Word(x)) if x == w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn arrow(&mut self) -> bool {
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn finish(&self) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some((_, t)) => Err(self.err(format!("unexpected {t}"))),
        }
    }
}

/// Parses and validates a network description.
pub fn parse_network(text: &str) -> Result<NetworkSpec, ParseError> {
    let mut spec = NetworkSpec::default();
    let mut domains: HashMap<String, Vec<String>> = HashMap::new();
    let mut constraint_ids: HashSet<String> = HashSet::new();
    let mut obs_ids: HashSet<String> = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let toks = lex(raw);
        if toks.is_empty() {
            continue;
        }
        let mut l = Line::new(i + 1, &toks, raw);
        let (kcol, keyword) = l.word("a declaration")?;
        match keyword.as_str() {
            "var" => {
                let (ncol, name) = l.word("a variable name")?;
                if domains.contains_key(&name) {
                    return Err(l.err_at(ncol, format!("variable `{name}` declared twice")));
                }
                let tokens = if l.eat_word("bool") {
                    None
                } else if l.eat_sym('{') {
                    let mut ts: Vec<String> = Vec::new();
                    while !l.eat_sym('}') {
                        let (c, t) = l.word("a value or `}`")?;
                        if ts.contains(&t) {
                            return Err(l.err_at(c, format!("value `{t}` repeated")));
                        }
                        ts.push(t);
                    }
                    if ts.is_empty() || ts.len() > crate::MAX_DOMAIN_SIZE {
                        return Err(l.err_at(ncol, "a domain needs between 1 and 64 values"));
                    }
                    Some(ts)
                } else {
                    return Err(l.err("expected `bool` or `{`"));
                };
                l.finish()?;
                let decl = VarDecl { name, tokens };
                domains.insert(decl.name.clone(), decl.domain());
                spec.variables.push(decl);
            }
            "gate" => {
                let (icol, id) = l.word("a constraint id")?;
                if !constraint_ids.insert(id.clone()) {
                    return Err(l.err_at(icol, format!("constraint `{id}` declared twice")));
                }
                let (kc, kind) = l.word("a gate kind")?;
                let kind: GateKind = kind
                    .parse()
                    .map_err(|e: crate::GateError| l.err_at(kc, e.to_string()))?;
                let mut inputs = Vec::new();
                while !l.arrow() {
                    let (c, v) = l.word("an input variable or `->`")?;
                    check_bool_var(&l, &domains, c, &v)?;
                    inputs.push(v);
                }
                let (oc, output) = l.word("an output variable")?;
                check_bool_var(&l, &domains, oc, &output)?;
                if inputs.len() != kind.inputs() {
                    return Err(l.err_at(
                        kc,
                        format!(
                            "gate `{kind}` takes {} input(s), got {}",
                            kind.inputs(),
                            inputs.len()
                        ),
                    ));
                }
                let distinct: BTreeSet<&String> = inputs.iter().chain([&output]).collect();
                if distinct.len() != inputs.len() + 1 {
                    return Err(l.err_at(icol, format!("gate `{id}` repeats a variable")));
                }
                let relaxable = !l.eat_word("norelax");
                l.finish()?;
                spec.constraints.push(ConstraintDecl {
                    id,
                    body: ConstraintBody::Gate {
                        kind,
                        inputs,
                        output,
                    },
                    relaxable,
                });
            }
            "table" => {
                let (icol, id) = l.word("a constraint id")?;
                if !constraint_ids.insert(id.clone()) {
                    return Err(l.err_at(icol, format!("constraint `{id}` declared twice")));
                }
                l.sym('(')?;
                let mut scope: Vec<String> = Vec::new();
                while !l.eat_sym(')') {
                    let (c, v) = l.word("a variable or `)`")?;
                    if !domains.contains_key(&v) {
                        return Err(l.err_at(c, format!("undeclared variable `{v}`")));
                    }
                    if scope.contains(&v) {
                        return Err(l.err_at(c, format!("variable `{v}` repeated in scope")));
                    }
                    scope.push(v);
                }
                if scope.is_empty() {
                    return Err(l.err_at(icol, "a table needs a non-empty scope"));
                }
                l.sym(':')?;
                let mut tuples = Vec::new();
                while l.eat_sym('(') {
                    let tcol = l.col();
                    let mut t = Vec::new();
                    loop {
                        let (c, v) = l.word("a value")?;
                        let var = scope.get(t.len()).ok_or_else(|| {
                            l.err_at(tcol, format!("tuple has more than {} values", scope.len()))
                        })?;
                        if !domains[var].contains(&v) {
                            return Err(l.err_at(c, format!("`{v}` is not a value of `{var}`")));
                        }
                        t.push(v);
                        if l.eat_sym(')') {
                            break;
                        }
                        l.sym(',')?;
                    }
                    if t.len() != scope.len() {
                        return Err(l.err_at(
                            tcol,
                            format!("tuple has {} values, expected {}", t.len(), scope.len()),
                        ));
                    }
                    tuples.push(t);
                }
                if tuples.is_empty() {
                    return Err(l.err("a table needs at least one tuple"));
                }
                let relaxable = !l.eat_word("norelax");
                l.finish()?;
                spec.constraints.push(ConstraintDecl {
                    id,
                    body: ConstraintBody::Table { scope, tuples },
                    relaxable,
                });
            }
            "obs" => {
                let (icol, id) = l.word("an observation id")?;
                if !obs_ids.insert(id.clone()) {
                    return Err(l.err_at(icol, format!("observation `{id}` declared twice")));
                }
                let (vc, variable) = l.word("a variable")?;
                l.sym('=')?;
                let (xc, value) = l.word("a value")?;
                l.finish()?;
                check_value(&l, &domains, vc, &variable, xc, &value)?;
                spec.observations.push(ObsDecl {
                    id,
                    variable,
                    value,
                });
            }
            other => return Err(l.err_at(kcol, format!("unknown declaration `{other}`"))),
        }
    }
    Ok(spec)
}

fn check_bool_var(
    l: &Line,
    domains: &HashMap<String, Vec<String>>,
    col: usize,
    v: &str,
) -> Result<(), ParseError> {
    match domains.get(v) {
        None => Err(l.err_at(col, format!("undeclared variable `{v}`"))),
        Some(d) if d != &["false", "true"] => {
            Err(l.err_at(col, format!("gate variable `{v}` is not boolean")))
        }
        Some(_) => Ok(()),
    }
}

pub(crate) fn check_value(
    l: &Line,
    domains: &HashMap<String, Vec<String>>,
    vcol: usize,
    var: &str,
    xcol: usize,
    value: &str,
) -> Result<(), ParseError> {
    let d = domains
        .get(var)
        .ok_or_else(|| l.err_at(vcol, format!("undeclared variable `{var}`")))?;
    if !d.iter().any(|t| t == value) {
        return Err(l.err_at(xcol, format!("`{value}` is not a value of `{var}`")));
    }
    Ok(())
}

impl NetworkSpec {
    /// Declared domain of each variable, by name.
    pub fn domains(&self) -> HashMap<String, Vec<String>> {
        self.variables
            .iter()
            .map(|v| (v.name.clone(), v.domain()))
            .collect()
    }

    /// Writes the spec back in the text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.variables {
            match &v.tokens {
                None => {
                    let _ = writeln!(out, "var {} bool", v.name);
                }
                Some(ts) => {
                    let _ = writeln!(out, "var {} {{ {} }}", v.name, ts.join(" "));
                }
            }
        }
        for c in &self.constraints {
            let flag = if c.relaxable { "" } else { " norelax" };
            match &c.body {
                ConstraintBody::Gate {
                    kind,
                    inputs,
                    output,
                } => {
                    let _ = writeln!(
                        out,
                        "gate {} {} {} -> {}{}",
                        c.id,
                        kind,
                        inputs.join(" "),
                        output,
                        flag
                    );
                }
                ConstraintBody::Table { scope, tuples } => {
                    let ts: Vec<String> = tuples
                        .iter()
                        .map(|t| format!("({})", t.join(",")))
                        .collect();
                    let _ = writeln!(
                        out,
                        "table {} ( {} ) : {}{}",
                        c.id,
                        scope.join(" "),
                        ts.join(" "),
                        flag
                    );
                }
            }
        }
        for o in &self.observations {
            let _ = writeln!(out, "obs {} {} = {}", o.id, o.variable, o.value);
        }
        out
    }

    /// Builds the network: declares variables, compiles every constraint and
    /// marks gate outputs that feed other gates as internal. Observations
    /// are not asserted.
    pub fn build(&self) -> Result<Network, NetworkError> {
        let mut net = Network::new();
        for v in &self.variables {
            net.add_variable(&v.name, v.domain())?;
        }
        let mut outputs: BTreeSet<VariableId> = BTreeSet::new();
        let mut inputs: BTreeSet<VariableId> = BTreeSet::new();
        for c in &self.constraints {
            let scope: Vec<VariableId> = c
                .scope()
                .iter()
                .map(|n| net.variable_by_name(n))
                .collect::<Result<_, _>>()?;
            let allowed = match &c.body {
                ConstraintBody::Gate {
                    kind, inputs: ins, ..
                } => {
                    inputs.extend(&scope[..ins.len()]);
                    outputs.insert(scope[ins.len()]);
                    gate_table(*kind, ins.len())
                        .map_err(|_| NetworkError::BadScope(c.id.clone()))?
                }
                ConstraintBody::Table { tuples, .. } => tuples
                    .iter()
                    .map(|t| {
                        t.iter()
                            .zip(&scope)
                            .map(|(tok, &v)| net.value_by_token(v, tok))
                            .collect::<Result<Vec<Value>, _>>()
                    })
                    .collect::<Result<_, _>>()?,
            };
            net.add_constraint(&c.id, scope, allowed, c.relaxable)?;
        }
        for v in outputs.intersection(&inputs) {
            net.mark_internal(*v);
        }
        Ok(net)
    }
}
