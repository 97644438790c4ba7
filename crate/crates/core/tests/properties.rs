use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use zeno_core::dilation::{kraus_from_dilation, DephasingCouplingModel};
use zeno_core::operator::{
    pauli_rotation_apply, variance, OperatorSum, Pauli, PauliTerm, QubitRole, StateVector,
};
use zeno_core::qfi::{
    analytic_qfi_one_qubit, conjugate_h, dephasing_setup, minimize_cq, AnalyticParams, EnvOperatorBasis,
};
use zeno_core::sweep::format_sci;
use zeno_core::zeno::{survival_probability_exact, ZenoProjector, ZenoSchedule};

fn state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("nonzero", move |v| {
        let amps = v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        StateVector::new(amps, vec![QubitRole::System; n]).ok()
    })
}

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn pauli_sum(n: usize) -> impl Strategy<Value = OperatorSum> {
    prop::collection::vec((prop::collection::vec(pauli(), n), -2.0f64..2.0), 1..5).prop_map(move |terms| {
        let terms = terms.into_iter().map(|(f, c)| PauliTerm::real(c, f)).collect();
        OperatorSum::hermitian(n, terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn variance_nonnegative_and_phase_invariant(psi in state(3), op in pauli_sum(3), phase in 0.0f64..6.3) {
        let v = variance(&op, &psi).unwrap();
        prop_assert!(v >= 0.0);
        let rotated = psi.scaled(Complex64::from_polar(1.0, phase));
        assert_relative_eq!(variance(&op, &rotated).unwrap(), v, epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn pauli_rotation_preserves_norm(psi in state(3), factors in prop::collection::vec(pauli(), 3), theta in -7.0f64..7.0) {
        let p = PauliTerm::real(1.0, factors);
        let out = pauli_rotation_apply(&p, theta, &psi).unwrap();
        assert_relative_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn one_qubit_solver_matches_closed_form(w in 0.05f64..3.0, g in 0.05f64..3.0, tau in 0.01f64..2.0) {
        let (hhat, psi) = dephasing_setup(1, w, g, StateVector::plus(1, QubitRole::System)).unwrap();
        let sol = minimize_cq(&hhat, &EnvOperatorBasis::local_pauli(hhat.labels()).unwrap(), &psi, tau).unwrap();
        let want = analytic_qfi_one_qubit(&AnalyticParams::new(1, w, g, tau).unwrap());
        assert_relative_eq!(sol.cq_min, want, max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn minimum_never_exceeds_unoptimized_bound(
        n in 1usize..=3, w in 0.05f64..2.0, g in 0.0f64..2.0, tau in 0.01f64..1.5, entangled in any::<bool>()
    ) {
        let s = if entangled {
            StateVector::ghz(n, QubitRole::System).unwrap()
        } else {
            StateVector::plus(n, QubitRole::System)
        };
        let (hhat, psi) = dephasing_setup(n, w, g, s).unwrap();
        for basis in [
            EnvOperatorBasis::local_pauli(hhat.labels()).unwrap(),
            EnvOperatorBasis::symmetric(hhat.labels()).unwrap(),
        ] {
            let sol = minimize_cq(&hhat, &basis, &psi, tau).unwrap();
            prop_assert!(sol.cq_min <= sol.cq_unoptimized * (1.0 + 1e-12));
            prop_assert!(sol.cq_min >= 0.0);
        }
    }

    #[test]
    fn conjugated_environment_operator_keeps_spectrum_norm(w in 0.1f64..2.0, g in 0.1f64..2.0, tau in 0.01f64..2.0) {
        // h' = U'† h U' is unitarily equivalent to h: equal Frobenius norms.
        let (hhat, _) = dephasing_setup(2, w, g, StateVector::plus(2, QubitRole::System)).unwrap();
        for h in EnvOperatorBasis::local_pauli(hhat.labels()).unwrap().elements() {
            let hp = conjugate_h(h, &hhat, tau).unwrap().to_dense(8).unwrap();
            let hd = h.to_dense(8).unwrap();
            let norm = |m: &zeno_core::operator::DenseOperator| m.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>();
            assert_relative_eq!(norm(&hp), norm(&hd), max_relative = 1e-12);
        }
    }

    #[test]
    fn kraus_sets_are_complete(n in 1usize..=2, w in 0.0f64..2.0, g in 0.0f64..2.0, t in 0.0f64..3.0) {
        let u = DephasingCouplingModel::new(n, w, g).unwrap().dilation();
        prop_assert!(kraus_from_dilation(&u, t).unwrap().completeness_residual <= 1e-10);
    }

    #[test]
    fn survival_is_a_probability(m in 1usize..20, tau in 0.0f64..1.5, g in 0.0f64..2.0, psi0 in state(1)) {
        let model = DephasingCouplingModel::new(1, 1.0, g).unwrap();
        let p = survival_probability_exact(
            &model.dilation(),
            &ZenoProjector::new(psi0).unwrap(),
            &model.environment_ground(),
            &ZenoSchedule::new(m, tau.max(1e-9)).unwrap(),
        )
        .unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
    }

    #[test]
    fn scientific_output_keeps_twelve_digits(x in prop::num::f64::NORMAL) {
        let back: f64 = format_sci(x).parse().unwrap();
        assert_relative_eq!(back, x, max_relative = 5e-12);
    }
}
