use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use dcsp::{
    gate_table, generate, ConstraintId, ExtensionalConstraint, GateKind, Value, VariableId,
};
use dcsp_bench::{gate_ladder, inverter_chain};

fn compile(c: &mut Criterion) {
    for kind in [GateKind::And, GateKind::Xor] {
        let constraint = ExtensionalConstraint {
            id: ConstraintId(0),
            label: kind.to_string(),
            scope: vec![VariableId(0), VariableId(1), VariableId(2)],
            allowed: gate_table(kind, 2).unwrap(),
            active: true,
            relaxable: true,
        };
        c.bench_function(&format!("generate/{kind}"), |b| {
            b.iter(|| generate(black_box(&constraint), &[2, 2, 2]).unwrap())
        });
    }
}

fn propagate(c: &mut Criterion) {
    let (net, vars, _) = inverter_chain(1000);
    c.bench_function("propagate/chain1000", |b| {
        b.iter_batched(
            || net.clone(),
            |mut n| n.assert_observation("m", vars[0], Value::TRUE).unwrap(),
            BatchSize::LargeInput,
        )
    });
    let (net, inputs, _) = gate_ladder(200, GateKind::Or);
    c.bench_function("propagate/or_ladder200", |b| {
        b.iter_batched(
            || net.clone(),
            |mut n| n.assert_observation("m", inputs[0], Value::TRUE).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

fn relax_restore(c: &mut Criterion) {
    let (mut net, vars, gates) = inverter_chain(1000);
    net.assert_observation("m", vars[0], Value::TRUE).unwrap();
    let mid = gates[500];
    c.bench_function("relax_restore/chain1000_mid", |b| {
        b.iter_batched(
            || net.clone(),
            |mut n| {
                n.relax(mid).unwrap();
                n.restore(mid).unwrap();
            },
            BatchSize::LargeInput,
        )
    });
}

fn diagnose(c: &mut Criterion) {
    let (mut net, inputs, _) = gate_ladder(8, GateKind::And);
    for (i, &x) in inputs.iter().enumerate() {
        net.assert_observation(&format!("i{i}"), x, Value::TRUE)
            .unwrap();
    }
    let out = net.variable_by_name("C8").unwrap();
    net.assert_observation("out", out, Value::FALSE).unwrap();
    c.bench_function("diagnose/and_ladder8", |b| {
        b.iter(|| net.diagnose(2).unwrap())
    });
}

criterion_group!(benches, compile, propagate, relax_restore, diagnose);
criterion_main!(benches);
