mod common;

use common::{c, fidelity, gate_matrix, mat_vec, product};
use intraport::circuit::{parse_circuit, serialize_circuit, Circuit};
use intraport::protocol::{
    construct_psi, post_swap_plan, solve_bob_program, AuxValue, ProtocolCase, DEFAULT_TOL,
};
use intraport::qsim::{
    apply_gate_raw, factor_all, make_state, project, purity, Gate, PureState, SingleQubit,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn amplitude() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| c(re, im))
}

fn qubit() -> impl Strategy<Value = SingleQubit> {
    (amplitude(), amplitude())
        .prop_filter("degenerate", |(a, b)| a.norm_sqr() + b.norm_sqr() > 1e-3)
        .prop_map(|(a, b)| SingleQubit::normalized(a, b).unwrap())
}

fn state(n: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec(amplitude(), 1 << n)
        .prop_filter("degenerate", |v| v.iter().map(|x| x.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(move |v| PureState::normalized(n, v).unwrap())
}

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    prop_oneof![
        (1..=n).prop_map(Gate::h),
        (1..=n, 1..n).prop_map(move |(a, k)| Gate::cn(a, (a + k - 1) % n + 1)),
    ]
}

fn sized_state_and_gates() -> impl Strategy<Value = (PureState, Vec<Gate>)> {
    (2..=5usize).prop_flat_map(|n| (state(n), prop::collection::vec(gate(n), 0..20)))
}

fn circuit() -> impl Strategy<Value = Circuit> {
    (1..=8usize)
        .prop_flat_map(|n| {
            let gate = if n == 1 { (1..=1usize).prop_map(Gate::h).boxed() } else { gate(n).boxed() };
            (
                Just(n),
                prop::collection::vec(gate, 0..25),
                any::<Option<prop::sample::Index>>(),
                prop::collection::vec(1..=n, 0..3),
            )
        })
        .prop_map(|(n, gates, border, measured)| {
            let border = border.map(|i| i.index(gates.len() + 1));
            let mut circuit = Circuit::new(n, gates, border, vec![]).unwrap();
            for (k, ch) in measured.into_iter().enumerate() {
                circuit = circuit.with_measurement(ch, &format!("out{k}")).unwrap();
            }
            circuit
        })
}

proptest! {
    #[test]
    fn gates_preserve_norm((s, gates) in sized_state_and_gates()) {
        let out = s.apply_all(&gates).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gates_are_involutions((s, gates) in sized_state_and_gates()) {
        for g in gates {
            let back = s.apply(g).unwrap().apply(g).unwrap();
            prop_assert!(fidelity(s.amplitudes(), back.amplitudes()) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn kernel_matches_reference_matrices((s, gates) in sized_state_and_gates()) {
        let n = s.channel_count();
        let mut expected = s.amplitudes().to_vec();
        for &g in &gates {
            expected = mat_vec(&gate_matrix(n, g), &expected);
        }
        let out = s.apply_all(&gates).unwrap();
        for (x, y) in out.amplitudes().iter().zip(&expected) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_is_linear(
        u in prop::collection::vec(amplitude(), 8),
        v in prop::collection::vec(amplitude(), 8),
        alpha in amplitude(),
        beta in amplitude(),
        g in gate(3),
    ) {
        let mut combined: Vec<Complex64> = u.iter().zip(&v).map(|(x, y)| alpha * x + beta * y).collect();
        let (mut gu, mut gv) = (u.clone(), v.clone());
        apply_gate_raw(&mut combined, 3, g);
        apply_gate_raw(&mut gu, 3, g);
        apply_gate_raw(&mut gv, 3, g);
        for k in 0..8 {
            prop_assert!((combined[k] - (alpha * gu[k] + beta * gv[k])).norm() < 1e-12);
        }
    }

    #[test]
    fn projection_probabilities_sum_to_one(s in state(3), ch in 1..=3usize) {
        let p0 = project(&s, ch, 0).map(|(p, _)| p).unwrap_or(0.0);
        let p1 = project(&s, ch, 1).map(|(p, _)| p).unwrap_or(0.0);
        prop_assert!((p0 + p1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_states_factor_back(factors in prop::collection::vec(qubit(), 1..=5)) {
        let s = make_state(&factors).unwrap();
        let found = factor_all(&s).unwrap();
        prop_assert_eq!(found.len(), factors.len());
        for (a, b) in found.iter().zip(&factors) {
            prop_assert!(a.fidelity(b) > 1.0 - 1e-10);
        }
        let rebuilt = make_state(&found).unwrap();
        prop_assert!(fidelity(s.amplitudes(), rebuilt.amplitudes()) > 1.0 - 1e-10);
        for ch in 1..=factors.len() {
            prop_assert!(purity(&s, ch).unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn parser_round_trip(circuit in circuit()) {
        let text = serialize_circuit(&circuit);
        let back = parse_circuit(&text).unwrap();
        prop_assert_eq!(&back, &circuit);
        prop_assert_eq!(serialize_circuit(&back), text);
    }

    #[test]
    fn swap_plans_realize_the_permutation(
        factors in prop::collection::vec(qubit(), 2..=5),
        seed in any::<u64>(),
    ) {
        let n = factors.len();
        let current: Vec<usize> = (0..n).collect();
        let mut desired = current.clone();
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            desired.swap(i, (x >> 33) as usize % (i + 1));
        }
        let plan = post_swap_plan(&current, &desired).unwrap();
        prop_assert!(plan.len() <= 3 * (n - 1));
        let out = make_state(&factors).unwrap().apply_all(&plan).unwrap();
        let permuted: Vec<SingleQubit> = desired.iter().map(|&i| factors[i]).collect();
        prop_assert!(fidelity(&product(&permuted), out.amplitudes()) > 1.0 - 1e-12);
    }

    #[test]
    fn psi_entanglement_matches_closed_form(m0 in qubit(), m1 in qubit()) {
        let (cc, d, e, f) = (m0.coeff1, m0.coeff0, m1.coeff1, m1.coeff0);
        let psi = construct_psi(cc, d, e, f).unwrap();
        // channel 1 holds (c+d)/√2 and (d−c)/√2 against the states f|0>+e|1> and e|0>+f|1>
        let p0 = (cc + d).norm_sqr() / 2.0;
        let p1 = (d - cc).norm_sqr() / 2.0;
        let overlap = (f.conj() * e + e.conj() * f).norm_sqr();
        let expected = 1.0 - 2.0 * p0 * p1 * (1.0 - overlap);
        prop_assert!((purity(&psi, 1).unwrap() - expected).abs() < 1e-10);
        prop_assert!((purity(&psi, 2).unwrap() - expected).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn searched_decoders_decode(
        aux_channel in 1..=3usize,
        value in prop::sample::select(AuxValue::ALL.to_vec()),
        m0 in qubit(),
        m1 in qubit(),
    ) {
        let program = solve_bob_program(3, aux_channel, value, 10).unwrap().unwrap();
        let case = ProtocolCase::from_program(&program);
        let report = case.verify(&[m0, m1], DEFAULT_TOL).unwrap();
        prop_assert!(report.passed, "{:?}", report.per_channel_fidelity);
    }
}
