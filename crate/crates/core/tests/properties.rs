mod common;

use std::collections::BTreeSet;

use common::{visible, Circuit};
use dcsp::{parse_network, PropagationOptions, Value};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn circuit(seed: u64) -> Circuit {
    Circuit::random(&mut ChaCha8Rng::seed_from_u64(seed), 7, 5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixpoint_matches_oracle(seed in any::<u64>(), short_circuit in any::<bool>()) {
        let c = circuit(seed);
        let (mut net, vs, _) = c.network();
        net.set_options(PropagationOptions { short_circuit, shuffle_seed: None });
        for (i, &(v, b)) in c.obs.iter().enumerate() {
            net.assert_observation(&format!("m{i}"), vs[v], Value::from_bool(b)).unwrap();
        }
        match c.gac(&c.all_gates(), &c.obs) {
            Some(doms) => {
                prop_assert!(net.is_consistent());
                prop_assert_eq!(visible(&net, &vs), doms);
            }
            None => prop_assert!(!net.is_consistent()),
        }
        prop_assert!(net.check_invariants().is_ok());
    }

    #[test]
    fn assertion_order_does_not_change_domains(seed in any::<u64>(), perm in any::<u64>()) {
        let c = circuit(seed);
        let (a, vs, _) = c.observed();
        let mut shuffled = c.clone();
        shuffled.obs.shuffle(&mut ChaCha8Rng::seed_from_u64(perm));
        let (b, _, _) = shuffled.observed();
        prop_assert_eq!(visible(&a, &vs), visible(&b, &vs));
        prop_assert_eq!(a.is_consistent(), b.is_consistent());
    }

    #[test]
    fn relaxed_network_equals_network_built_without(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let c = circuit(seed);
        let (mut net, vs, cs) = c.observed();
        let g = pick.index(cs.len());
        net.relax(cs[g]).unwrap();
        let active: BTreeSet<usize> = c.all_gates().into_iter().filter(|&i| i != g).collect();
        match c.gac(&active, &c.obs) {
            Some(doms) => prop_assert_eq!(visible(&net, &vs), doms),
            None => prop_assert!(!net.is_consistent()),
        }
        prop_assert!(net.check_invariants().is_ok());
    }

    #[test]
    fn retracting_equals_never_observing(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let c = circuit(seed);
        prop_assume!(!c.obs.is_empty());
        let (mut net, vs, _) = c.observed();
        let k = pick.index(c.obs.len());
        let id = net.observation_by_label(&format!("m{k}")).unwrap();
        net.retract_observation(id).unwrap();
        let mut rest = c.obs.clone();
        rest.remove(k);
        match c.gac(&c.all_gates(), &rest) {
            Some(doms) => prop_assert_eq!(visible(&net, &vs), doms),
            None => prop_assert!(!net.is_consistent()),
        }
    }

    #[test]
    fn replay_reproduces_state(seed in any::<u64>()) {
        let c = circuit(seed);
        let (base, _, cs) = c.network();
        let (mut net, _, _) = c.observed();
        net.relax(cs[0]).unwrap();
        net.restore(cs[0]).unwrap();
        prop_assert_eq!(base.replay(net.events()).state(), net.state());
    }
}

fn network_text(c: &Circuit) -> String {
    let mut s = String::new();
    for i in 0..c.vars {
        s.push_str(&format!("var V{i} bool\n"));
    }
    for (i, (k, scope)) in c.gates.iter().enumerate() {
        let (inputs, out) = scope.split_at(scope.len() - 1);
        let ins: Vec<String> = inputs.iter().map(|p| format!("V{p}")).collect();
        s.push_str(&format!(
            "gate G{i} {} {} -> V{}\n",
            k,
            ins.join(" "),
            out[0]
        ));
    }
    for (i, &(v, b)) in c.obs.iter().enumerate() {
        s.push_str(&format!("obs m{i} V{v} = {b}\n"));
    }
    s
}

proptest! {
    #[test]
    fn netspec_text_round_trips(seed in any::<u64>()) {
        let spec = parse_network(&network_text(&circuit(seed))).unwrap();
        let again = parse_network(&spec.to_text()).unwrap();
        prop_assert_eq!(&again, &spec);
        prop_assert_eq!(again.to_text(), spec.to_text());
    }
}
