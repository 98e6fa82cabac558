//! Boolean gate library. Tables are over `(inputs..., output)`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    And,
    Or,
    Not,
    Xor,
    Nand,
    Nor,
}

impl GateKind {
    pub const ALL: [GateKind; 6] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Not,
        GateKind::Xor,
        GateKind::Nand,
        GateKind::Nor,
    ];

    /// Number of inputs the gate takes.
    pub fn inputs(self) -> usize {
        match self {
            GateKind::Not => 1,
            _ => 2,
        }
    }

    pub fn eval(self, inputs: &[bool]) -> bool {
        match self {
            GateKind::And => inputs.iter().all(|&b| b),
            GateKind::Or => inputs.iter().any(|&b| b),
            GateKind::Not => !inputs[0],
            GateKind::Xor => inputs.iter().filter(|&&b| b).count() % 2 == 1,
            GateKind::Nand => !inputs.iter().all(|&b| b),
            GateKind::Nor => !inputs.iter().any(|&b| b),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Not => "not",
            GateKind::Xor => "xor",
            GateKind::Nand => "nand",
            GateKind::Nor => "nor",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GateError {
    #[error("unknown gate kind `{0}`")]
    UnknownKind(String),
    #[error("gate `{kind}` takes {expected} input(s), got {found}")]
    Arity {
        kind: String,
        expected: usize,
        found: usize,
    },
}

impl FromStr for GateKind {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| GateError::UnknownKind(s.to_string()))
    }
}

/// Allowed tuples of a gate with `inputs` inputs, over boolean value
/// indices (`false` = 0, `true` = 1).
pub fn gate_table(kind: GateKind, inputs: usize) -> Result<Vec<Vec<Value>>, GateError> {
    if inputs != kind.inputs() {
        return Err(GateError::Arity {
            kind: kind.to_string(),
            expected: kind.inputs(),
            found: inputs,
        });
    }
    Ok((0..1u32 << inputs)
        .map(|bits| {
            let ins: Vec<bool> = (0..inputs).rev().map(|i| bits >> i & 1 == 1).collect();
            let out = kind.eval(&ins);
            ins.into_iter().chain([out]).map(Value::from_bool).collect()
        })
        .collect())
}

/// Looks a gate kind up by name and builds its table.
pub fn gate_table_by_name(kind: &str, inputs: usize) -> Result<Vec<Vec<Value>>, GateError> {
    gate_table(kind.parse()?, inputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tbl(rows: &[[u16; 3]]) -> Vec<Vec<Value>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| Value(v)).collect())
            .collect()
    }

    #[test]
    fn and_or_tables() {
        assert_eq!(
            gate_table(GateKind::And, 2).unwrap(),
            tbl(&[[0, 0, 0], [0, 1, 0], [1, 0, 0], [1, 1, 1]])
        );
        assert_eq!(
            gate_table(GateKind::Or, 2).unwrap(),
            tbl(&[[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 1]])
        );
    }

    #[test]
    fn not_table() {
        let t = gate_table(GateKind::Not, 1).unwrap();
        assert_eq!(t, vec![vec![Value(0), Value(1)], vec![Value(1), Value(0)]]);
    }

    #[test]
    fn errors() {
        assert_eq!(
            gate_table_by_name("maj", 3),
            Err(GateError::UnknownKind("maj".to_string()))
        );
        assert!(matches!(
            gate_table(GateKind::Not, 2),
            Err(GateError::Arity { .. })
        ));
        assert!(matches!(
            gate_table(GateKind::And, 1),
            Err(GateError::Arity { .. })
        ));
    }
}
