use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use vibron_core::algebra::{expr, su2_subalgebra, Subalgebra};
use vibron_core::basis::{convert_convention, BlockFilter, Convention, FockBasis};
use vibron_core::dynamics::{entanglement_criteria, quench, uniform_times, QuenchConfig};
use vibron_core::meanfield::{energy_density_2mode, integrate_flow, MeanFieldPoint, StepControl};
use vibron_core::model::{build, spectral_decomposition, HamiltonianKind, ModelParams, Normalization};
use vibron_core::phasespace::{wigner_planar, Axis};
use vibron_core::protocol::{snapshots, InitialState};
use vibron_core::states::{coherent3, spin_coherent2, QuantumState};

fn random_state(basis: Arc<FockBasis>, seed: &[(f64, f64)]) -> QuantumState {
    let amps = DVector::from_iterator(
        basis.dim(),
        (0..basis.dim()).map(|k| {
            let (a, b) = seed[k % seed.len()];
            C64::new(a + 0.1 * k as f64, b - 0.05 * k as f64)
        }),
    );
    QuantumState::normalized(basis, amps).unwrap()
}

fn vector_distance(a: &QuantumState, b: &QuantumState) -> f64 {
    (a.amplitudes() - b.amplitudes()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn generic_kind() -> impl Strategy<Value = HamiltonianKind> {
    prop::sample::select(vec![
        HamiltonianKind::Essential,
        HamiltonianKind::SpinorRotated,
        HamiltonianKind::N0Only,
        HamiltonianKind::Chain1,
        HamiltonianKind::Chain2,
    ])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convention_round_trip(n in 1u32..6, seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8)) {
        let circ = Arc::new(FockBasis::full(n, Convention::Circular));
        let cart = Arc::new(FockBasis::full(n, Convention::Cartesian));
        let psi = random_state(circ.clone(), &seed);
        let back = convert_convention(&convert_convention(&psi, &cart).unwrap(), &circ).unwrap();
        prop_assert!(vector_distance(&psi, &back) < 1e-12);
    }

    #[test]
    fn hamiltonians_are_hermitian_and_conserve_magnetization(
        kind in generic_kind(),
        gamma in 0.01f64..1.0,
        n in 2u32..7,
    ) {
        let basis = Arc::new(FockBasis::full(n, Convention::Circular));
        let h = build(kind, &ModelParams::new(gamma, n).unwrap(), &basis).unwrap();
        prop_assert!(h.hermiticity_error().unwrap() < 1e-12);
        let jz = expr::jz().build_hermitian(&basis).unwrap();
        prop_assert!(jz.commutator(&h).unwrap().matrix().max_abs() < 1e-12);
    }

    #[test]
    fn spinor_and_vibron_spectra_are_affinely_related(gamma in 0.05f64..1.0, n in 2u32..9) {
        let basis = Arc::new(FockBasis::enumerate(n, Convention::Circular, BlockFilter::FixedL(0)).unwrap());
        let params = ModelParams::new(gamma, n).unwrap().with_normalization(Normalization::N);
        let ess = spectral_decomposition(&build(HamiltonianKind::Essential, &params, &basis).unwrap()).unwrap();
        let spin = spectral_decomposition(&build(HamiltonianKind::SpinorRotated, &params, &basis).unwrap()).unwrap();
        for (e, s) in ess.eigenvalues().iter().zip(spin.eigenvalues()) {
            prop_assert!((e - (gamma * s + (1.0 - gamma) * n as f64)).abs() < 1e-9);
        }
    }

    #[test]
    fn low_depletion_hamiltonian_ignores_gamma(g1 in 0.0f64..1.0, g2 in 0.0f64..1.0, cap in 1u32..6) {
        let basis = Arc::new(FockBasis::enumerate(30, Convention::Cartesian, BlockFilter::Excitations(cap)).unwrap());
        let a = build(HamiltonianKind::LowDepletion, &ModelParams::new(g1, 30).unwrap(), &basis).unwrap();
        let b = build(HamiltonianKind::LowDepletion, &ModelParams::new(g2, 30).unwrap(), &basis).unwrap();
        prop_assert_eq!(a.max_abs_diff(&b).unwrap(), 0.0);
    }

    #[test]
    fn coherent_parameterizations_agree_on_the_y_slice(theta in 0.0f64..3.1, n in 1u32..25) {
        let a = coherent3((theta / 2.0).tan(), 0.0, n).unwrap();
        let b = spin_coherent2(theta, 0.0, n).unwrap();
        prop_assert!(vector_distance(&a, &b) < 1e-12);
    }

    #[test]
    fn spin_coherent_states_saturate_the_bloch_sphere(theta in 0.0f64..std::f64::consts::PI, phi in -3.2f64..3.2, n in 1u32..40) {
        let psi = spin_coherent2(theta, phi, n).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        let s = su2_subalgebra(Subalgebra::ModeX, psi.basis()).unwrap();
        let r2: f64 = s.iter().map(|op| psi.expectation(op).unwrap().re.powi(2)).sum();
        prop_assert!((r2 - (n as f64 / 2.0).powi(2)).abs() < 1e-10 * (1.0 + r2));
    }

    #[test]
    fn coherent_states_carry_no_magnetization(x in -3.0f64..3.0, n in 1u32..12) {
        let psi = coherent3(x, 0.0, n).unwrap();
        let circ = Arc::new(FockBasis::full(n, Convention::Circular));
        let c = convert_convention(&psi, &circ).unwrap();
        let l = expr::l().build_hermitian(&circ).unwrap();
        prop_assert!(c.expectation(&l).unwrap().re.abs() < 1e-12);
    }

    #[test]
    fn quench_respects_the_criteria_bounds(gamma in 0.05f64..1.0, n in 4u32..40) {
        let series = quench(&QuenchConfig::spinor(gamma, n, 30.0, 61).unwrap()).unwrap();
        for r in &series.records {
            prop_assert!(r.zeta2_opt >= 1.0 / n as f64 - 1e-12);
            prop_assert!(r.zeta2_opt <= r.xi2_opt + 1e-9);
            prop_assert!((r.norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn transverse_spin_stays_zero_in_the_quench(gamma in 0.05f64..1.0, n in 2u32..10, t in 0.0f64..20.0) {
        let params = ModelParams::new(gamma, n).unwrap();
        let states = snapshots(HamiltonianKind::SpinorRotated, &params, InitialState::Pole, &[0.0, t]).unwrap();
        let psi = &states[1];
        let [xx, xy, _] = su2_subalgebra(Subalgebra::ModeX, psi.basis()).unwrap();
        prop_assert!(psi.expectation(&xx).unwrap().norm() < 1e-10);
        prop_assert!(psi.expectation(&xy).unwrap().norm() < 1e-10);
        prop_assert!(entanglement_criteria(psi).unwrap().zeta2 <= entanglement_criteria(psi).unwrap().xi2 + 1e-9);
    }

    #[test]
    fn glauber_coherent_wigner_is_nonnegative_and_normalized(re in -1.5f64..1.5, im in -1.5f64..1.5) {
        let alpha = C64::new(re, im);
        let mut amps = vec![C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0)];
        for k in 1..40 {
            let prev = amps[k - 1];
            amps.push(prev * alpha / (k as f64).sqrt());
        }
        let axis = Axis::new(-4.0, 4.0, 81).unwrap();
        let g = wigner_planar(&amps, axis, axis);
        prop_assert!(g.negativity_volume() < 1e-10);
        prop_assert!((g.integral() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mean_field_flow_conserves_energy(
        gamma in prop::sample::select(vec![0.1, 0.3, 0.5, 0.9]),
        phi in 0.0f64..std::f64::consts::TAU,
        z in -0.95f64..0.95,
    ) {
        let start = MeanFieldPoint::new(phi, z).unwrap();
        let h0 = energy_density_2mode(start, gamma);
        let traj = integrate_flow(start, gamma, 100.0, StepControl::default()).unwrap();
        for p in &traj.points {
            prop_assert!((energy_density_2mode(*p, gamma) - h0).abs() < 1e-8);
        }
    }
}

#[test]
fn default_time_grid_is_strictly_increasing_from_zero() {
    let t = uniform_times(1000.0, 10_000);
    assert_eq!(t[0], 0.0);
    assert!(t.windows(2).all(|w| w[1] > w[0]));
}
