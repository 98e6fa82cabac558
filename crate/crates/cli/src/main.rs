use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dcsp::compiler::dump_rules;
use dcsp::netspec::NetworkSpec;
use dcsp::script::DEFAULT_MAX_CARDINALITY;
use dcsp::{
    oracle_check, parse_network, parse_script, run_script, verify_rules, PropagationOptions,
    RunOptions,
};

#[derive(Parser)]
#[command(
    name = "dcsp",
    version,
    about = "Compile, propagate, relax and diagnose constraint networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a network and compile every constraint into rules.
    Compile {
        net: PathBuf,
        /// Print the rule listing of every constraint.
        #[arg(long)]
        dump_rules: bool,
    },
    /// Run a scenario script against a network.
    Run {
        net: PathBuf,
        script: PathBuf,
        #[arg(long, conflicts_with = "text")]
        json: bool,
        #[arg(long)]
        text: bool,
        /// Apply each propagation round's firings in a seeded random order.
        #[arg(long)]
        shuffle: bool,
        #[arg(long, default_value_t = 0, requires = "shuffle")]
        seed: u64,
        /// Fire at most one rule per constraint.
        #[arg(long)]
        short_circuit: bool,
        /// List observations as conflict members.
        #[arg(long)]
        include_observations: bool,
    },
    /// Assert the network's observations and list minimal diagnoses.
    Diagnose {
        net: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_CARDINALITY as u64, value_parser = clap::value_parser!(u64).range(1..))]
        max_card: u64,
        #[arg(long)]
        json: bool,
    },
    /// Check every constraint's rules for equivalence, soundness, order
    /// independence and minimality, and run the engine against projections.
    Verify { net: PathBuf },
}

/// Failure before any network was run: exit status 2.
struct InputError(anyhow::Error);

fn load_network(path: &Path) -> Result<NetworkSpec, InputError> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(InputError)?;
    parse_network(&text)
        .with_context(|| format!("in {}", path.display()))
        .map_err(InputError)
}

fn run(cli: Cli) -> Result<u8, InputError> {
    match cli.command {
        Cmd::Compile {
            net,
            dump_rules: dump,
        } => {
            let spec = load_network(&net)?;
            let network = spec
                .build()
                .context("building network")
                .map_err(InputError)?;
            for c in network.constraints() {
                let rules = network.rules_of(c.id).expect("own constraint");
                if dump {
                    println!("{}:", c.label);
                    print!(
                        "{}",
                        dump_rules(
                            rules,
                            |v| network.variable_name(v),
                            |v, x| network.token(v, x)
                        )
                    );
                } else {
                    println!("{}: {} rules", c.label, rules.len());
                }
            }
            Ok(0)
        }
        Cmd::Run {
            net,
            script,
            json,
            text: _,
            shuffle,
            seed,
            short_circuit,
            include_observations,
        } => {
            let spec = load_network(&net)?;
            let source = fs::read_to_string(&script)
                .with_context(|| format!("reading {}", script.display()))
                .map_err(InputError)?;
            let parsed = parse_script(&source, &spec)
                .with_context(|| format!("in {}", script.display()))
                .map_err(InputError)?;
            let options = RunOptions {
                propagation: PropagationOptions {
                    short_circuit,
                    shuffle_seed: shuffle.then_some(seed),
                },
                include_observations,
            };
            let report = run_script(&spec, &parsed, options).map_err(|e| InputError(e.into()))?;
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            Ok(report.exit_code() as u8)
        }
        Cmd::Diagnose {
            net,
            max_card,
            json,
        } => {
            let spec = load_network(&net)?;
            let mut network = spec
                .build()
                .context("building network")
                .map_err(InputError)?;
            for o in &spec.observations {
                let v = network
                    .variable_by_name(&o.variable)
                    .map_err(|e| InputError(e.into()))?;
                let x = network
                    .value_by_token(v, &o.value)
                    .map_err(|e| InputError(e.into()))?;
                network
                    .assert_observation(&o.id, v, x)
                    .map_err(|e| InputError(e.into()))?;
            }
            let report = network
                .diagnose(max_card as usize)
                .map_err(|e| InputError(e.into()))?;
            let label = |c: &dcsp::ConstraintId| network.constraints()[c.index()].label.clone();
            let sets: Vec<Vec<String>> = report
                .diagnoses
                .iter()
                .map(|d| d.constraints.iter().map(label).collect())
                .collect();
            if json {
                println!(
                    "{}",
                    serde_json::json!({ "max": max_card, "diagnoses": sets })
                );
            } else {
                for s in &sets {
                    println!("{{{}}}", s.join(", "));
                }
            }
            Ok(0)
        }
        Cmd::Verify { net } => {
            let spec = load_network(&net)?;
            let network = spec
                .build()
                .context("building network")
                .map_err(InputError)?;
            let mut failed = false;
            for c in network.constraints() {
                let sizes: Vec<usize> = c
                    .scope
                    .iter()
                    .map(|&v| network.domain(v).expect("scope variable").size())
                    .collect();
                let rules = network.rules_of(c.id).expect("own constraint");
                let rep = verify_rules(rules, c, &sizes, 0).map_err(|e| InputError(e.into()))?;
                let oracle = oracle_check(&network, c).map_err(|e| InputError(e.into()))?;
                let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
                println!(
                    "{}: cr1 {} cr2 {} cr3 {} cr4 {} oracle {} ({} assignments)",
                    c.label,
                    mark(rep.cr1_pass()),
                    mark(rep.cr2_pass()),
                    mark(rep.cr3_pass()),
                    mark(rep.cr4_pass()),
                    mark(oracle.mismatch.is_none()),
                    oracle.assignments
                );
                if !rep.passed() || oracle.mismatch.is_some() {
                    failed = true;
                    println!(
                        "  {}",
                        serde_json::to_string(&(rep, oracle)).expect("serializable")
                    );
                }
            }
            Ok(u8::from(failed))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
