use std::path::Path;
use std::time::Instant;

use intraport::circuit::parse_circuit;
use intraport::eavesdrop::{
    run_experiment, trial_seed, CaseId, DetectionMode, EveStrategy, ExperimentConfig, TrueCase,
};
use intraport::protocol::{
    bell_branch_formula, bell_byproduct, builtin_scenario, bundled_circuit, bundled_decoder, post_swap_plan,
    protocol_table, run_scenario, solve_bob_program, AuxValue, InputRole, OutputClaim, Scenario,
    MAX_SEARCH_GATES,
};
use intraport::qsim::{factor_all, fidelity, make_state, run_circuit, PureState, Segment, SingleQubit};
use intraport::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::input::{command_echo, pair, read_json, tolerance, ExecInput, MessageArgs};
use crate::{Failure, Report};

const SWAP_FIGURE: usize = 5;

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn scenario(figure: usize) -> Result<Scenario, Failure> {
    if figure == SWAP_FIGURE {
        return Err(Failure::usage("figure 5 is the swap demonstration; use `swap`"));
    }
    Ok(builtin_scenario(figure)?)
}

fn claim_label(claim: &OutputClaim) -> String {
    match claim {
        OutputClaim::Message(i) => format!("message {i}"),
        OutputClaim::Residue(_) => "residue".into(),
        OutputClaim::Psi(i) => format!("psi {i}"),
    }
}

fn role_label(role: &InputRole) -> String {
    match role {
        InputRole::Message(i) => format!("message {i}"),
        InputRole::Aux(v) => format!("aux {v}"),
    }
}

pub fn run_figure(figure: usize, messages: &MessageArgs, tol: Option<f64>) -> Result<Report, Failure> {
    let start = Instant::now();
    let scenario = scenario(figure)?;
    let tol = tolerance(tol)?;
    let msgs = messages.resolve(scenario.message_count())?;
    let report = run_scenario(figure, &msgs, tol)?;
    let inputs: Vec<Value> = scenario
        .inputs
        .iter()
        .enumerate()
        .map(|(k, role)| {
            let state = match *role {
                InputRole::Message(i) => msgs[i],
                InputRole::Aux(v) => v.state(),
            };
            json!({ "channel": k + 1, "role": role_label(role), "state": pair(&state) })
        })
        .collect();
    let outputs: Vec<Value> = scenario
        .claimed_outputs
        .iter()
        .enumerate()
        .map(|(k, claim)| {
            json!({
                "channel": k + 1,
                "claim": claim_label(claim),
                "claimed": report.expected[k].as_ref().map(pair),
                "observed": report.observed[k].as_ref().map(pair),
                "fidelity": report.per_channel_fidelity[k],
            })
        })
        .collect();
    Ok(Report {
        passed: report.passed,
        body: json!({
            "command": command_echo(),
            "figure": figure,
            "tolerance": tol,
            "inputs": inputs,
            "outputs": outputs,
            "product_ok": report.product_ok,
            "entangled_block_fidelity": report.entangled_block_fidelity,
            "passed": report.passed,
            "elapsed_ms": elapsed_ms(start),
        }),
    })
}

pub fn fuzz(figure: usize, trials: usize, seed: u64, tol: Option<f64>) -> Result<Report, Failure> {
    let start = Instant::now();
    let scenario = scenario(figure)?;
    let tol = tolerance(tol)?;
    if trials == 0 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let mut failures = 0usize;
    let mut min_fidelity = f64::INFINITY;
    let mut min_block: Option<f64> = None;
    let mut first_failure = Value::Null;
    for i in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i as u64));
        let msgs: Vec<SingleQubit> = (0..scenario.message_count()).map(|_| SingleQubit::random(&mut rng)).collect();
        let report = run_scenario(figure, &msgs, tol)?;
        min_fidelity = min_fidelity.min(report.min_fidelity());
        if let Some(b) = report.entangled_block_fidelity {
            min_block = Some(min_block.map_or(b, |m| m.min(b)));
        }
        if !report.passed {
            failures += 1;
            if first_failure.is_null() {
                let states: Vec<Value> = msgs.iter().map(pair).collect();
                first_failure = json!({ "trial": i, "messages": states });
            }
        }
    }
    Ok(Report {
        passed: failures == 0,
        body: json!({
            "command": command_echo(),
            "figure": figure,
            "trials": trials,
            "seed": seed,
            "tolerance": tol,
            "failures": failures,
            "min_fidelity": min_fidelity,
            "min_entangled_block_fidelity": min_block,
            "first_failure": first_failure,
            "passed": failures == 0,
            "elapsed_ms": elapsed_ms(start),
        }),
    })
}

pub fn table(channels: usize, reduced: bool) -> Result<Report, Failure> {
    let mut table = protocol_table(channels)?;
    if reduced {
        table = table.reduced();
    }
    let cases: Vec<Value> = table
        .cases
        .iter()
        .map(|case| {
            json!({
                "id": case.id(),
                "aux_channel": case.aux_channel,
                "aux_value": case.aux_value,
                "arrangement": case.arrangement,
                "message_channels": case.message_channels,
                "base": case.base,
                "program_length": case.bob_program.len(),
                "bob_program": case.bob_program,
                "expected_layout": case.expected_layout,
            })
        })
        .collect();
    Ok(Report {
        passed: true,
        body: json!({
            "command": command_echo(),
            "channels": channels,
            "reduced": reduced,
            "case_count": cases.len(),
            "cases": cases,
        }),
    })
}

fn load_circuit_text(path: &Path) -> Result<String, Failure> {
    if path.exists() {
        return std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())));
    }
    path.to_str()
        .and_then(bundled_circuit)
        .map(str::to_owned)
        .ok_or_else(|| Failure::usage(format!("{} does not exist and is not a bundled circuit", path.display())))
}

pub fn exec(path: &Path, input: Option<&Path>, segment: Segment) -> Result<Report, Failure> {
    let text = load_circuit_text(path)?;
    let circuit = parse_circuit(&text).map_err(|e| {
        Failure::with_body(json!({
            "error": e.to_string(),
            "line": e.line_number,
            "kind": format!("{:?}", e.kind),
        }))
    })?;
    let n = circuit.channel_count();
    let state = match input {
        Some(p) => read_json::<ExecInput>(p)?.state(n)?,
        None => PureState::basis(n, 0)?,
    };
    let out = run_circuit(&state, &circuit, segment)?;
    let factors = factor_all(&out).map(|fs| fs.iter().map(pair).collect::<Vec<_>>());
    let gate_count = match segment {
        Segment::All => circuit.gates().len(),
        Segment::AliceOnly => circuit.alice_gates().len(),
        Segment::BobOnly => circuit.bob_gates().len(),
    };
    Ok(Report {
        passed: true,
        body: json!({
            "command": command_echo(),
            "channels": n,
            "gates_run": gate_count,
            "amplitudes": out.amplitudes(),
            "factors": factors,
        }),
    })
}

pub fn swap(to: &[usize], seed: u64, tol: Option<f64>) -> Result<Report, Failure> {
    let tol = tolerance(tol)?;
    let n = to.len();
    let current: Vec<usize> = (1..=n).collect();
    let plan = post_swap_plan(&current, to)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors: Vec<SingleQubit> = (0..n).map(|_| SingleQubit::random(&mut rng)).collect();
    let out = make_state(&factors)?.apply_all(&plan)?;
    let expected = make_state(&to.iter().map(|&k| factors[k - 1]).collect::<Vec<_>>())?;
    let f = fidelity(&expected, &out)?;
    let passed = f >= 1.0 - tol;
    Ok(Report {
        passed,
        body: json!({
            "command": command_echo(),
            "channels": n,
            "to": to,
            "gate_count": plan.len(),
            "gates": plan,
            "seed": seed,
            "fidelity": f,
            "passed": passed,
        }),
    })
}

pub fn solve_bob(
    channels: usize,
    aux_channel: usize,
    aux_value: AuxValue,
    max_gates: usize,
    no_cache: bool,
) -> Result<Report, Failure> {
    let start = Instant::now();
    if max_gates > MAX_SEARCH_GATES {
        return Err(Failure::usage(format!("--max-gates {max_gates} exceeds {MAX_SEARCH_GATES}")));
    }
    let bundled = if no_cache {
        None
    } else {
        bundled_decoder(channels, aux_channel, aux_value)?
    };
    // Bundled entries are the search's own shortest results.
    let (program, source) = match bundled {
        Some(p) => ((p.suffix().len() <= max_gates).then(|| p.clone()), "bundled"),
        None => (solve_bob_program(channels, aux_channel, aux_value, max_gates)?, "search"),
    };
    let body = match &program {
        Some(p) => json!({
            "command": command_echo(),
            "found": true,
            "source": source,
            "max_gates": max_gates,
            "suffix_length": p.suffix().len(),
            "suffix": p.suffix(),
            "program": p,
            "elapsed_ms": elapsed_ms(start),
        }),
        None => json!({
            "command": command_echo(),
            "found": false,
            "source": source,
            "max_gates": max_gates,
            "message": format!("not found within bound {max_gates}"),
            "elapsed_ms": elapsed_ms(start),
        }),
    };
    Ok(Report {
        passed: program.is_some(),
        body,
    })
}

fn parse_true_case(s: &str) -> Result<TrueCase, Failure> {
    if s == "random" {
        return Ok(TrueCase::Random);
    }
    let bad = || Failure::usage(format!("--true-case {s:?}: expected `random` or CHANNEL:VALUE"));
    let (ch, value) = s.split_once(':').ok_or_else(bad)?;
    Ok(TrueCase::Fixed(CaseId {
        aux_channel: ch.parse().map_err(|_| bad())?,
        aux_value: value.parse().map_err(|_: Error| bad())?,
    }))
}

pub fn eavesdrop(
    channels: usize,
    trials: usize,
    seed: u64,
    mode: DetectionMode,
    strategy: EveStrategy,
    true_case: &str,
) -> Result<Report, Failure> {
    let mut config = ExperimentConfig::new(channels, trials, strategy, seed);
    config.mode = mode;
    config.true_case = parse_true_case(true_case)?;
    let stats = run_experiment(&config)?;
    Ok(Report {
        passed: stats.within_interval(),
        body: serde_json::to_value(&stats).expect("stats serialize"),
    })
}

pub fn bell(messages: &MessageArgs, outcome: Option<u8>, tol: Option<f64>) -> Result<Report, Failure> {
    let tol = tolerance(tol)?;
    let msgs = messages.resolve(2)?;
    let (a, b, e, f) = (msgs[0].coeff1, msgs[0].coeff0, msgs[1].coeff1, msgs[1].coeff0);
    let mut passed = true;
    let mut total = 0.0;
    let mut branches = Vec::new();
    for o in 0..=1u8 {
        let entry = match (bell_byproduct(a, b, e, f, o), bell_branch_formula(a, b, e, f, o)) {
            (Ok((p, state)), Ok((p_formula, formula))) => {
                let fid = fidelity(&state, &formula)?;
                passed &= fid >= 1.0 - tol && (p - p_formula).abs() < 1e-12;
                total += p;
                json!({
                    "outcome": o,
                    "probability": p,
                    "state": state.amplitudes(),
                    "formula_fidelity": fid,
                })
            }
            (Err(Error::ImpossibleBranch { probability }), Err(Error::ImpossibleBranch { .. })) => {
                total += probability;
                json!({ "outcome": o, "probability": probability, "state": null, "formula_fidelity": null })
            }
            (Err(err), _) | (_, Err(err)) => {
                if matches!(err, Error::ImpossibleBranch { .. }) {
                    passed = false;
                    json!({ "outcome": o, "error": err.to_string() })
                } else {
                    return Err(err.into());
                }
            }
        };
        if outcome.is_none_or(|want| want == o) {
            branches.push(entry);
        }
    }
    passed &= (total - 1.0).abs() < 1e-12;
    Ok(Report {
        passed,
        body: json!({
            "command": command_echo(),
            "inputs": [pair(&msgs[0]), pair(&msgs[1])],
            "branches": branches,
            "probability_sum": total,
            "tolerance": tol,
            "passed": passed,
        }),
    })
}
