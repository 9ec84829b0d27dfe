//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::{Duration, Instant};

use common::{c, fidelity, norm_sqr, normalize, product, random_qubit, run};
use intraport::circuit::{parse_circuit, serialize_circuit, Circuit, ParseErrorKind};
use intraport::eavesdrop::{run_experiment, DetectionMode, EveStrategy, ExperimentConfig};
use intraport::protocol::{
    alice_encoder, bell_byproduct, bob_prefix, builtin_scenario, bundled_circuit, bundled_circuit_names,
    construct_psi, protocol_table, run_scenario, solve_bob_program_with, swap_circuit,
    verify_circuit_action_equal, AuxValue, InputRole, OutputClaim, SearchGoal, DEFAULT_MAX_GATES,
    SCENARIO_FIGURES,
};
use intraport::qsim::{Gate, PureState, SingleQubit};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn messages(rng: &mut ChaCha8Rng, count: usize) -> Vec<SingleQubit> {
    (0..count).map(|_| random_qubit(rng)).collect()
}

/// The entangled block as written out by hand, `c|1>+d|0>` and `e|1>+f|0>`.
fn psi_oracle(m0: &SingleQubit, m1: &SingleQubit) -> Vec<Complex64> {
    let (cc, d, e, f) = (m0.coeff1, m0.coeff0, m1.coeff1, m1.coeff0);
    let s = FRAC_1_SQRT_2;
    // (1/√2)(c+d)(e|01>+f|00>) + (1/√2)(d−c)(e|10>+f|11>)
    vec![(cc + d) * f * s, (cc + d) * e * s, (d - cc) * e * s, (d - cc) * f * s]
}

/// Expected output vector for a claimed column, built by hand.
fn expected_column(claims: &[OutputClaim], msgs: &[SingleQubit]) -> Vec<Complex64> {
    let mut out = vec![c(1.0, 0.0)];
    let mut k = 0;
    while k < claims.len() {
        let piece = match claims[k] {
            OutputClaim::Message(i) => product(&[msgs[i]]),
            OutputClaim::Residue(q) => product(&[q]),
            OutputClaim::Psi(_) => {
                k += 1;
                psi_oracle(&msgs[0], &msgs[1])
            }
        };
        out = common::kron_vec(&out, &piece);
        k += 1;
    }
    out
}

fn input_column(roles: &[InputRole], msgs: &[SingleQubit]) -> Vec<Complex64> {
    let factors: Vec<SingleQubit> = roles
        .iter()
        .map(|r| match *r {
            InputRole::Message(i) => msgs[i],
            InputRole::Aux(AuxValue::Zero) => SingleQubit::zero(),
            InputRole::Aux(AuxValue::One) => SingleQubit::one(),
            InputRole::Aux(AuxValue::Plus) => {
                SingleQubit::new(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)).unwrap()
            }
        })
        .collect();
    product(&factors)
}

fn circuit_matrix(circuit: &Circuit) -> common::Matrix {
    let n = circuit.channel_count();
    let dim = 1 << n;
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| {
            let mut e = vec![c(0.0, 0.0); dim];
            e[j] = c(1.0, 0.0);
            run(n, circuit.gates(), &e)
        })
        .collect();
    (0..dim).map(|i| (0..dim).map(|j| columns[j][i]).collect()).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut min_lib = f64::INFINITY;
    let mut min_oracle = f64::INFINITY;
    for fig in SCENARIO_FIGURES {
        let scenario = builtin_scenario(fig).map_err(|e| e.to_string())?;
        let m = circuit_matrix(&scenario.circuit);
        for _ in 0..1000 {
            let msgs = messages(&mut rng, scenario.message_count());
            let report = run_scenario(fig, &msgs, 1e-10).map_err(|e| e.to_string())?;
            ensure(report.passed, || format!("fig{fig} failed: {:?}", report.per_channel_fidelity))?;
            min_lib = min_lib.min(report.min_fidelity());
            let out = common::mat_vec(&m, &input_column(&scenario.inputs, &msgs));
            let f = fidelity(&expected_column(&scenario.claimed_outputs, &msgs), &out);
            ensure(f >= 1.0 - 1e-10, || format!("fig{fig} oracle fidelity {f}"))?;
            min_oracle = min_oracle.min(f);
        }
    }
    // Fig. 3's residue as printed: (|1>-|0>)/√2
    let residue = builtin_scenario(3).unwrap().claimed_outputs[1].as_residue().unwrap();
    let printed = SingleQubit::new(c(-FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)).unwrap();
    ensure((residue.fidelity(&printed) - 1.0).abs() < 1e-15, || "fig3 residue differs".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "8 figures x 1000 tuples, min channel fidelity {min_lib:.15}, min oracle fidelity {min_oracle:.15}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> PureState {
    let amps = (0..1 << n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    PureState::normalized(n, amps).unwrap()
}

fn criterion_2() -> Outcome {
    let table = [("00", "00"), ("01", "01"), ("10", "11"), ("11", "10")];
    for (from, to) in table {
        let out = PureState::from_label(from).unwrap().apply(Gate::cn(1, 2)).unwrap();
        ensure(out.amplitudes() == PureState::from_label(to).unwrap().amplitudes(), || {
            format!("CN(1,2)|{from}> != |{to}>")
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 1.0f64;
    for _ in 0..100 {
        let s = random_state(&mut rng, 3);
        let k = rng.random_range(1..=3);
        let (ctl, tgt) = loop {
            let (a, b) = (rng.random_range(1..=3), rng.random_range(1..=3));
            if a != b {
                break (a, b);
            }
        };
        for pair in [[Gate::h(k); 2], [Gate::cn(ctl, tgt); 2]] {
            let back = s.apply_all(&pair).unwrap();
            let f = fidelity(s.amplitudes(), back.amplitudes());
            worst = worst.min(f);
            ensure(f >= 1.0 - 1e-12, || format!("{pair:?} fidelity {f}"))?;
        }
    }
    Ok(format!("CN truth table exact; 200 involutions, worst fidelity {worst:.15}"))
}

fn criterion_3() -> Outcome {
    let swap = swap_circuit(1, 2).map_err(|e| e.to_string())?;
    ensure(swap == [Gate::cn(1, 2), Gate::cn(2, 1), Gate::cn(1, 2)], || format!("{swap:?}"))?;
    for (from, to) in [("00", "00"), ("01", "10"), ("10", "01"), ("11", "11")] {
        let out = PureState::from_label(from).unwrap().apply_all(&swap).unwrap();
        ensure(out.amplitudes() == PureState::from_label(to).unwrap().amplitudes(), || {
            format!("swap|{from}> != |{to}>")
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 1.0f64;
    for _ in 0..100 {
        let (psi, phi) = (random_qubit(&mut rng), random_qubit(&mut rng));
        let out = PureState::from_amplitudes(2, product(&[psi, phi]))
            .unwrap()
            .apply_all(&swap)
            .unwrap();
        let f = fidelity(&product(&[phi, psi]), out.amplitudes());
        worst = worst.min(f);
        ensure(f >= 1.0 - 1e-12, || format!("fidelity {f}"))?;
    }
    Ok(format!("SWAP on basis exact; 100 random products, worst fidelity {worst:.15}"))
}

fn criterion_4() -> Outcome {
    let h = Gate::h;
    let cn = Gate::cn;
    let fig1_alice = vec![h(2), cn(2, 3), cn(1, 2), h(1)];
    let fig7_alice = vec![h(3), cn(3, 4), h(2), cn(2, 3), cn(1, 2), h(1)];
    let fig1_bob_head = vec![cn(2, 3), h(3), cn(1, 3), h(1), h(3)];
    let a3 = alice_encoder(3).map_err(|e| e.to_string())?;
    let a4 = alice_encoder(4).map_err(|e| e.to_string())?;
    let p3 = bob_prefix(3).map_err(|e| e.to_string())?;
    ensure(a3 == fig1_alice, || format!("alice_encoder(3) = {a3:?}"))?;
    ensure(a4 == fig7_alice, || format!("alice_encoder(4) = {a4:?}"))?;
    ensure(p3 == fig1_bob_head, || format!("bob_prefix(3) = {p3:?}"))?;
    let fig1 = builtin_scenario(1).unwrap().literal_circuit.unwrap();
    let fig7 = builtin_scenario(7).unwrap().circuit;
    ensure(fig1.alice_gates() == a3, || "fig1.qc Alice segment differs".into())?;
    ensure(fig7.alice_gates() == a4, || "fig7.qc Alice segment differs".into())?;
    ensure(fig1.bob_gates()[..5] == p3, || "fig1.qc Bob segment does not start with the prefix".into())?;
    Ok("alice_encoder(3), alice_encoder(4) and bob_prefix(3) match the figures gate for gate".into())
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 1.0f64;
    let mut worst_norm = 0.0f64;
    for _ in 0..200 {
        let (m0, m1) = (random_qubit(&mut rng), random_qubit(&mut rng));
        let psi = construct_psi(m0.coeff1, m0.coeff0, m1.coeff1, m1.coeff0).map_err(|e| e.to_string())?;
        let routed = run(2, &[Gate::h(1), Gate::cn(1, 2)], &product(&[m0, m1]));
        let f = fidelity(&routed, psi.amplitudes());
        let dn = (norm_sqr(psi.amplitudes()) - 1.0).abs();
        worst = worst.min(f);
        worst_norm = worst_norm.max(dn);
        ensure(f >= 1.0 - 1e-12, || format!("fidelity {f}"))?;
        ensure(dn < 1e-12, || format!("norm deviation {dn}"))?;
    }
    Ok(format!("200 samples, worst fidelity {worst:.15}, worst norm deviation {worst_norm:.1e}"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 1.0f64;
    let mut worst_sum = 0.0f64;
    for _ in 0..200 {
        let (m0, m1) = (random_qubit(&mut rng), random_qubit(&mut rng));
        let (a, b, e, f) = (m0.coeff1, m0.coeff0, m1.coeff1, m1.coeff0);
        let z = c(0.0, 0.0);
        // ea|11>+fb|00> and eb|10>+fa|01>, basis order |00>,|01>,|10>,|11>
        let branches = [vec![f * b, z, z, e * a], vec![z, f * a, e * b, z]];
        let mut total = 0.0;
        for (outcome, want) in branches.iter().enumerate() {
            let (p, state) = bell_byproduct(a, b, e, f, outcome as u8).map_err(|e| e.to_string())?;
            let fid = fidelity(&normalize(want), state.amplitudes());
            let dp = (p - norm_sqr(want)).abs();
            worst = worst.min(fid);
            ensure(fid >= 1.0 - 1e-10, || format!("outcome {outcome}: fidelity {fid}"))?;
            ensure(dp < 1e-12, || format!("outcome {outcome}: probability off by {dp}"))?;
            total += p;
        }
        worst_sum = worst_sum.max((total - 1.0).abs());
        ensure((total - 1.0).abs() < 1e-12, || format!("probabilities sum to {total}"))?;
    }
    Ok(format!(
        "200 samples, outcome 0 gives ea|11>+fb|00>, worst fidelity {worst:.15}, worst sum deviation {worst_sum:.1e}"
    ))
}

fn criterion_7() -> Outcome {
    let table = protocol_table(3).map_err(|e| e.to_string())?;
    ensure(table.len() == 9, || format!("{} cases", table.len()))?;
    ensure(table.reduced().len() == 3, || format!("{} reduced cases", table.reduced().len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut failures = 0;
    for case in &table.cases {
        let m = circuit_matrix(&case.circuit().map_err(|e| e.to_string())?);
        for _ in 0..100 {
            let msgs = messages(&mut rng, 2);
            let report = case.verify(&msgs, 1e-10).map_err(|e| e.to_string())?;
            let out = common::mat_vec(&m, &input_column(&case.input_roles(), &msgs));
            let f = fidelity(&expected_column(&case.expected_layout, &msgs), &out);
            if !report.passed || f < 1.0 - 1e-10 {
                failures += 1;
            }
        }
    }
    ensure(failures == 0, || format!("{failures} failures"))?;
    Ok("9 cases (3 reduced), 900 verifications, 0 failures".into())
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    for fig in [1, 2, 3, 8] {
        let scenario = builtin_scenario(fig).map_err(|e| e.to_string())?;
        let aux = scenario.aux_channel().unwrap();
        let InputRole::Aux(value) = scenario.inputs[aux - 1] else {
            unreachable!()
        };
        let start = Instant::now();
        let goal = SearchGoal::Layout(scenario.claimed_outputs.clone());
        let program = solve_bob_program_with(scenario.channel_count(), aux, value, DEFAULT_MAX_GATES, &goal)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("fig{fig}: nothing within {DEFAULT_MAX_GATES} gates"))?;
        let elapsed = start.elapsed();
        ensure(elapsed < Duration::from_secs(60), || format!("fig{fig}: {elapsed:?}"))?;
        let equal = verify_circuit_action_equal(&program.circuit().unwrap(), &scenario.circuit)
            .map_err(|e| e.to_string())?;
        ensure(equal, || format!("fig{fig}: searched decoder acts differently"))?;
        notes.push(format!(
            "fig{fig} {} suffix gates in {:.2}s",
            program.suffix().len(),
            elapsed.as_secs_f64()
        ));
    }
    Ok(notes.join(", "))
}

const EAVESDROP_SEED: u64 = 1;

fn criterion_9() -> Outcome {
    let mut rates = Vec::new();
    for n in 3..=5 {
        let config = ExperimentConfig::new(n, 10_000, EveStrategy::UniformGuess, EAVESDROP_SEED);
        let stats = run_experiment(&config).map_err(|e| e.to_string())?;
        ensure((stats.analytic_success_rate - 1.0 / n as f64).abs() < 1e-15, || {
            format!("N={n}: analytic rate {}", stats.analytic_success_rate)
        })?;
        ensure(stats.within_interval(), || {
            format!(
                "N={n}: rate {} outside {} +- {}",
                stats.eve_success_rate, stats.analytic_success_rate, stats.ci95_halfwidth
            )
        })?;
        let mut sampled = config.clone();
        sampled.mode = DetectionMode::Sampled;
        let s = run_experiment(&sampled).map_err(|e| e.to_string())?;
        ensure(stats.detection_rate >= s.detection_rate, || format!("N={n}: sampled exceeds omniscient"))?;
        let absent = run_experiment(&ExperimentConfig::new(n, 10_000, EveStrategy::Absent, EAVESDROP_SEED))
            .map_err(|e| e.to_string())?;
        ensure(absent.detection_rate == 0.0, || format!("N={n}: {} false alarms", absent.detection_rate))?;
        rates.push(stats.eve_success_rate);
    }
    ensure(rates.windows(2).all(|w| w[0] > w[1]), || format!("not decreasing: {rates:?}"))?;
    Ok(format!(
        "seed {EAVESDROP_SEED}, success rates N=3,4,5: {:.4}, {:.4}, {:.4}; no false alarms",
        rates[0], rates[1], rates[2]
    ))
}

fn random_circuit(rng: &mut ChaCha8Rng) -> Circuit {
    let n = rng.random_range(1..=8usize);
    let len = rng.random_range(0..30);
    let gates: Vec<Gate> = (0..len)
        .map(|_| {
            if n == 1 || rng.random_bool(0.4) {
                Gate::h(rng.random_range(1..=n))
            } else {
                let a = rng.random_range(1..=n);
                let b = (a + rng.random_range(1..n) - 1) % n + 1;
                Gate::cn(a, b)
            }
        })
        .collect();
    let border = rng.random_bool(0.5).then(|| rng.random_range(0..=len));
    let mut circuit = Circuit::new(n, gates, border, vec![]).unwrap();
    for k in 0..rng.random_range(0..3) {
        circuit = circuit
            .with_measurement(rng.random_range(1..=n), &format!("m{k}"))
            .unwrap();
    }
    circuit
}

fn criterion_10() -> Outcome {
    let mut bundled = 0;
    for name in bundled_circuit_names() {
        let parsed = parse_circuit(bundled_circuit(name).unwrap()).map_err(|e| format!("{name}: {e}"))?;
        let text = serialize_circuit(&parsed);
        let again = parse_circuit(&text).map_err(|e| format!("{name}: {e}"))?;
        ensure(again == parsed, || format!("{name}: round trip differs"))?;
        ensure(serialize_circuit(&again) == text, || format!("{name}: serialization not idempotent"))?;
        bundled += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for i in 0..500 {
        let circuit = random_circuit(&mut rng);
        let text = serialize_circuit(&circuit);
        let back = parse_circuit(&text).map_err(|e| format!("random circuit {i}: {e}"))?;
        ensure(back == circuit, || format!("random circuit {i} differs after round trip"))?;
    }
    use ParseErrorKind::*;
    let malformed: [(&str, usize, ParseErrorKind); 10] = [
        ("channels 2\nborder\nborder\n", 3, DuplicateBorder),
        ("channels 3\ncn 2 2\n", 2, ControlEqualsTarget),
        ("channels 3\nh 5\n", 2, ChannelOutOfRange),
        ("channels 3\n# note\n\nswap 1 2\n", 4, UnknownDirective),
        ("channels 3\ncn 1\n", 2, BadArity),
        ("h 1\n", 1, MissingChannels),
        ("channels 3\nmeasure 1 x\nmeasure 2 x\n", 3, DuplicateLabel),
        ("channels 3\nh 1\nh 2 3\n", 3, BadArity),
        ("channels 0\n", 1, ChannelOutOfRange),
        ("channels 4\nh 1\nborder\ncn 4 5\n", 4, ChannelOutOfRange),
    ];
    for (src, line, kind) in malformed {
        let err = parse_circuit(src).err().ok_or_else(|| format!("{src:?} parsed"))?;
        ensure(err.line_number == line && err.kind == kind, || {
            format!("{src:?}: got line {} {:?}", err.line_number, err.kind)
        })?;
    }
    Ok(format!(
        "{bundled} bundled files and 500 random circuits round-trip; {} malformed inputs rejected with the right kind and line",
        malformed.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("figure conformance", criterion_1),
        ("gate algebra", criterion_2),
        ("swap identity", criterion_3),
        ("encoder formulas", criterion_4),
        ("entangled pair construction", criterion_5),
        ("Bell byproduct", criterion_6),
        ("protocol table", criterion_7),
        ("decoder search", criterion_8),
        ("eavesdropping", criterion_9),
        ("parser", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
