//! Workload builders shared by the benchmarks.

use dcsp::{gate_table, ConstraintId, GateKind, Network, VariableId};

/// A chain of `n` inverters `X0 -> X1 -> ... -> Xn`.
pub fn inverter_chain(n: usize) -> (Network, Vec<VariableId>, Vec<ConstraintId>) {
    let mut net = Network::new();
    let vars: Vec<VariableId> = (0..=n)
        .map(|i| net.add_bool_variable(&format!("X{i}")).expect("fresh name"))
        .collect();
    let table = gate_table(GateKind::Not, 1).expect("not is unary");
    let gates = (0..n)
        .map(|i| {
            net.add_constraint(
                &format!("G{i}"),
                vec![vars[i], vars[i + 1]],
                table.clone(),
                true,
            )
            .expect("valid gate")
        })
        .collect();
    net.propagate();
    (net, vars, gates)
}

/// A ripple of two-input gates where gate `i` reads the previous output and
/// a fresh primary input.
pub fn gate_ladder(n: usize, kind: GateKind) -> (Network, Vec<VariableId>, Vec<ConstraintId>) {
    let mut net = Network::new();
    let mut carry = net.add_bool_variable("C0").expect("fresh name");
    let mut inputs = vec![carry];
    let mut gates = Vec::with_capacity(n);
    let table = gate_table(kind, 2).expect("binary gate");
    for i in 0..n {
        let x = net.add_bool_variable(&format!("I{i}")).expect("fresh name");
        let out = net
            .add_bool_variable(&format!("C{}", i + 1))
            .expect("fresh name");
        gates.push(
            net.add_constraint(&format!("G{i}"), vec![carry, x, out], table.clone(), true)
                .expect("valid gate"),
        );
        inputs.push(x);
        carry = out;
    }
    net.propagate();
    (net, inputs, gates)
}
