mod common;

use std::collections::BTreeSet;

use common::{gac, spec, visible};
use dcsp::{
    dump_rules, execute, gate_table, parse_script, ConstraintId, FiringStatus, GateKind, Network,
    NetworkError, RunOptions, Value, ValueSet, VariableId,
};

const F: Value = Value(0);
const T: Value = Value(1);

fn labels(net: &Network, ids: &BTreeSet<ConstraintId>) -> Vec<String> {
    ids.iter()
        .map(|&c| net.constraint(c).unwrap().label.clone())
        .collect()
}

fn observe(net: &mut Network, obs: &[(&str, &str, bool)]) {
    for &(label, var, b) in obs {
        let v = net.variable_by_name(var).unwrap();
        net.assert_observation(label, v, Value::from_bool(b))
            .unwrap();
    }
}

fn circ1_observed() -> Network {
    let mut net = spec("circ1.net").build().unwrap();
    observe(
        &mut net,
        &[("s2", "S2", false), ("s1", "S1", false), ("e2", "E2", true)],
    );
    net
}

fn conflict_labels(net: &Network) -> Option<Vec<String>> {
    net.current_conflict()
        .map(|(_, c)| labels(net, &c.constraints))
}

#[test]
fn circ1_relax_then_restore_toggles_conflict() {
    let mut net = circ1_observed();
    assert_eq!(conflict_labels(&net), Some(vec!["O2".into(), "O3".into()]));
    let before = net.state().visible;

    let o3 = net.constraint_by_label("O3").unwrap();
    let out = net.relax(o3).unwrap();
    assert!(!out.is_conflict());
    assert!(net.is_consistent());
    net.check_invariants().unwrap();

    let out = net.restore(o3).unwrap();
    assert!(out.is_conflict());
    assert_eq!(conflict_labels(&net), Some(vec!["O2".into(), "O3".into()]));
    assert_eq!(net.state().visible, before);
    net.check_invariants().unwrap();
}

#[test]
fn circ1_relaxing_o2_also_resolves() {
    let mut net = circ1_observed();
    let o2 = net.constraint_by_label("O2").unwrap();
    net.relax(o2).unwrap();
    assert!(net.is_consistent());
    let z = net.variable_by_name("Z").unwrap();
    let y = net.variable_by_name("Y").unwrap();
    assert_eq!(net.visible_values(z).unwrap(), ValueSet::singleton(F));
    assert_eq!(net.visible_values(y).unwrap(), ValueSet::singleton(F));
}

#[test]
fn circ0_consistent_before_output_observations() {
    let mut net = spec("circ0.net").build().unwrap();
    observe(
        &mut net,
        &[
            ("m1", "E1", false),
            ("m2", "E2", false),
            ("m3", "E3", false),
        ],
    );
    assert!(net.is_consistent());
    for (name, x) in [("X", F), ("Y", F), ("Z", F)] {
        let v = net.variable_by_name(name).unwrap();
        assert_eq!(
            net.visible_values(v).unwrap(),
            ValueSet::singleton(x),
            "{name}"
        );
    }
    let s1 = net.variable_by_name("S1").unwrap();
    assert_eq!(net.visible_values(s1).unwrap(), ValueSet::full(2));
}

#[test]
fn circ0_single_fault_is_o3() {
    let mut net = spec("circ0.net").build().unwrap();
    observe(
        &mut net,
        &[
            ("m1", "E1", false),
            ("m2", "E2", false),
            ("m3", "E3", false),
            ("m4", "S1", false),
            ("m5", "E4", true),
        ],
    );
    assert_eq!(conflict_labels(&net), Some(vec!["O3".into()]));
    let rep = net.diagnose(3).unwrap();
    let found: Vec<Vec<String>> = rep
        .diagnoses
        .iter()
        .map(|d| labels(&net, &d.constraints))
        .collect();
    assert_eq!(found, vec![vec!["O3".to_string()]]);
}

#[test]
fn circ0_retracting_e4_matches_oracle() {
    let s = spec("circ0.net");
    let mut net = s.build().unwrap();
    let obs = [
        ("m1", "E1", false),
        ("m2", "E2", false),
        ("m3", "E3", false),
        ("m4", "S1", false),
        ("m5", "E4", true),
    ];
    observe(&mut net, &obs);
    assert!(!net.is_consistent());
    let m5 = net.observation_by_label("m5").unwrap();
    net.retract_observation(m5).unwrap();
    assert!(net.is_consistent());
    net.check_invariants().unwrap();

    let vs: Vec<VariableId> = net.variables().collect();
    let index = |name: &str| net.variable_by_name(name).unwrap().index();
    let mut doms = vec![ValueSet::full(2); vs.len()];
    for &(_, var, b) in &obs[..4] {
        doms[index(var)] = ValueSet::singleton(Value::from_bool(b));
    }
    let tables: Vec<(Vec<usize>, Vec<Vec<Value>>)> = net
        .constraints()
        .iter()
        .map(|c| {
            (
                c.scope.iter().map(|v| v.index()).collect(),
                c.allowed.clone(),
            )
        })
        .collect();
    assert_eq!(Some(visible(&net, &vs)), gac(doms, &tables));
}

#[test]
fn shared_output_keeps_mask_after_one_cancel() {
    let and2 = gate_table(GateKind::And, 2).unwrap();
    let not = gate_table(GateKind::Not, 1).unwrap();
    let mut net = Network::new();
    let e: Vec<VariableId> = (1..=4)
        .map(|i| net.add_bool_variable(&format!("E{i}")).unwrap())
        .collect();
    let p = net.add_bool_variable("P").unwrap();
    let x = net.add_bool_variable("X").unwrap();
    net.add_constraint("N1", vec![p, e[1]], not.clone(), true)
        .unwrap();
    net.add_constraint("N2", vec![p, e[3]], not, true).unwrap();
    let a = net
        .add_constraint("A", vec![e[0], e[1], x], and2.clone(), true)
        .unwrap();
    let b = net
        .add_constraint("B", vec![e[2], e[3], x], and2, true)
        .unwrap();
    net.assert_observation("m1", e[0], T).unwrap();
    net.assert_observation("m3", e[2], T).unwrap();
    // Both inputs arrive in the same round, so both gates mask X=f.
    net.assert_observation("p", p, F).unwrap();
    assert_eq!(net.visible_values(x).unwrap(), ValueSet::singleton(T));
    assert_eq!(net.domain(x).unwrap().justifications(F).len(), 2);

    let fired = net.firings().iter().filter(|f| f.is_active()).count();
    net.relax(a).unwrap();
    assert_eq!(net.visible_values(x).unwrap(), ValueSet::singleton(T));
    assert_eq!(net.domain(x).unwrap().justifications(F).len(), 1);
    assert_eq!(
        net.firings().iter().filter(|f| f.is_active()).count(),
        fired - 1
    );

    net.relax(b).unwrap();
    assert_eq!(net.visible_values(x).unwrap(), ValueSet::full(2));
    net.check_invariants().unwrap();
}

#[test]
fn cancel_cascades_through_dependent_firing() {
    let and2 = gate_table(GateKind::And, 2).unwrap();
    let mut net = Network::new();
    let v: Vec<VariableId> = ["A", "B", "C", "D"]
        .iter()
        .map(|n| net.add_bool_variable(n).unwrap())
        .collect();
    net.add_constraint("G1", vec![v[0], v[1], v[2]], and2.clone(), true)
        .unwrap();
    net.add_constraint("G2", vec![v[2], v[1], v[3]], and2, true)
        .unwrap();
    net.assert_observation("a", v[0], F).unwrap();
    assert_eq!(net.visible_values(v[3]).unwrap(), ValueSet::singleton(F));

    let first = net
        .firings()
        .iter()
        .find(|f| net.rule(f.rule).unwrap().owner.index() == 0)
        .unwrap()
        .id;
    let released = net.cancel_firing(first).unwrap();
    assert!(released.contains(&(v[2], T)));
    assert!(released.contains(&(v[3], T)));
    assert!(net
        .firings()
        .iter()
        .all(|f| f.status == FiringStatus::Cancelled));
    assert!(matches!(
        net.cancel_firing(first),
        Err(NetworkError::AlreadyCancelled(_))
    ));
}

#[test]
fn and_rules_dump_in_canonical_order() {
    let net = spec("circ1.net").build().unwrap();
    let a1 = net.constraint_by_label("A1").unwrap();
    let text = dump_rules(
        net.rules_of(a1).unwrap(),
        |v| net.variable_name(v),
        |v, x| net.token(v, x),
    );
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6, "{text}");
    assert!(lines[0].starts_with("R1:"), "{text}");
    assert!(lines[5].starts_with("R6:"), "{text}");
}

#[test]
fn diagnose_leaves_network_untouched() {
    let net = circ1_observed();
    let before = net.state();
    let events = net.events().len();
    let rep = net.diagnose(3).unwrap();
    let found: Vec<Vec<String>> = rep
        .diagnoses
        .iter()
        .map(|d| labels(&net, &d.constraints))
        .collect();
    assert_eq!(found, vec![vec!["O2".to_string()], vec!["O3".to_string()]]);
    assert_eq!(net.state(), before);
    assert_eq!(net.events().len(), events);
    assert!(matches!(
        net.diagnose(0),
        Err(NetworkError::InvalidCardinality)
    ));
}

#[test]
fn replaying_the_log_reproduces_state() {
    let s = spec("circ1.net");
    let base = s.build().unwrap();
    let mut net = base.clone();
    observe(
        &mut net,
        &[("s2", "S2", false), ("s1", "S1", false), ("e2", "E2", true)],
    );
    let o3 = net.constraint_by_label("O3").unwrap();
    net.relax(o3).unwrap();
    let e2 = net.observation_by_label("e2").unwrap();
    net.retract_observation(e2).unwrap();
    net.restore(o3).unwrap();
    let replayed = base.replay(net.events());
    assert_eq!(replayed.state(), net.state());
    replayed.check_invariants().unwrap();
}

#[test]
fn fixture_scripts_report_expected_diagnoses() {
    for (name, expected) in [
        ("circ0", vec![vec!["O3"]]),
        ("circ1", vec![vec!["O2"], vec!["O3"]]),
    ] {
        let s = spec(&format!("{name}.net"));
        let script = parse_script(&common::fixture(&format!("{name}.script")), &s).unwrap();
        let (report, _) = execute(&s, &script, RunOptions::default()).unwrap();
        assert!(!report.consistent, "{name}");
        assert_eq!(report.diagnoses.len(), 1, "{name}");
        let got: Vec<Vec<String>> = report.diagnoses[0]
            .diagnoses
            .iter()
            .map(|d| d.constraints.clone())
            .collect();
        assert_eq!(got, expected, "{name}");
        assert_eq!(report.exit_code(), 0, "{name}");
    }
}

#[test]
fn clashing_observation_is_rejected() {
    let mut net = circ1_observed();
    let e2 = net.variable_by_name("E2").unwrap();
    assert!(net.assert_observation("again", e2, F).is_err());
}

#[test]
fn observing_against_a_derived_value_conflicts() {
    let mut net = Network::new();
    let a = net.add_bool_variable("A").unwrap();
    let b = net.add_bool_variable("B").unwrap();
    let x = net.add_bool_variable("X").unwrap();
    let g = net
        .add_constraint(
            "G",
            vec![a, b, x],
            gate_table(GateKind::And, 2).unwrap(),
            true,
        )
        .unwrap();
    net.assert_observation("m1", x, T).unwrap();
    assert!(net.is_consistent());
    net.assert_observation("m2", a, F).unwrap();
    let (_, conflict) = net.current_conflict().unwrap();
    assert!(conflict.constraints.contains(&g));
    net.relax(g).unwrap();
    assert!(net.is_consistent());
    net.restore(g).unwrap();
    assert!(!net.is_consistent());
    let rep = net.diagnose(3).unwrap();
    assert_eq!(rep.diagnoses.len(), 1);
}
