use proptest::prelude::*;
use spinguide::disorder::{
    disordered_chain, ground_energy_trace, median, safe_centers, sample_couplings, DisorderSpec,
};
use spinguide::dynamics::{run_transport, Propagator, TransportConfig};
use spinguide::materials::{gap_phase_diagram, DEFAULT_MAP_DEPTH_RY};
use spinguide::parallel::Execution;
use spinguide::spectral::{
    adiabaticity, eigensolve, eigensolve_lowest, hamiltonian_rate, static_hamiltonian, sweep_point,
};
use spinguide::{ChainSpec, PotentialKind, PotentialSpec, Trajectory};

fn kind() -> impl Strategy<Value = PotentialKind> {
    prop_oneof![Just(PotentialKind::PoschlTeller), Just(PotentialKind::SquareWell)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigenpairs_are_orthonormal_with_small_residuals(
        n in 10usize..120, sigma in 0.0f64..0.3, seed in any::<u64>(),
        kind in kind(), depth in 0.0f64..3.0, width in 0.5f64..20.0, zz in any::<bool>(),
    ) {
        let base = ChainSpec::uniform(n, 1.0).unwrap().with_zz_diagonal(zz);
        let chain = disordered_chain(&base, &DisorderSpec::whole_chain(n, 1.0, sigma, seed).unwrap(), 0).unwrap();
        let spec = PotentialSpec::new(kind, depth, width, 1.0).unwrap();
        let h = static_hamiltonian(&chain, &spec, chain.position(n / 2)).unwrap();
        let s = eigensolve(&h).unwrap();
        let scale = h.norm_inf();
        for (k, v) in s.eigenvectors.iter().enumerate() {
            let hv = h.apply(v);
            let residual = hv.iter().zip(v).map(|(a, b)| (a - s.eigenvalues[k] * b).abs()).fold(0.0, f64::max);
            prop_assert!(residual <= 1e-9 * scale);
            for w in s.eigenvectors.iter().take(k + 1) {
                let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
                let expected = if std::ptr::eq(v, w) { 1.0 } else { 0.0 };
                prop_assert!((dot - expected).abs() <= 1e-9);
            }
        }
        let partial = eigensolve_lowest(&h, 4.min(n)).unwrap();
        for (a, b) in partial.eigenvalues.iter().zip(&s.eigenvalues) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn bound_count_grows_with_width_and_depth(
        kind in kind(), depth in 0.05f64..3.0, width in 0.5f64..15.0, grow in 1.0f64..2.0,
    ) {
        let chain = ChainSpec::uniform(160, 1.0).unwrap();
        let spec = PotentialSpec::new(kind, depth, width, 1.0).unwrap();
        let base = sweep_point(&chain, &spec).unwrap().bound_count;
        let wider = sweep_point(&chain, &spec.with_width(width * grow).unwrap()).unwrap().bound_count;
        let deeper = sweep_point(&chain, &spec.with_depth(depth * grow).unwrap()).unwrap().bound_count;
        prop_assert!(base >= 1);
        prop_assert!(wider >= base);
        prop_assert!(deeper >= base);
    }

    #[test]
    fn adiabaticity_is_linear_in_speed(
        kind in kind(), depth in 0.1f64..2.0, width in 1.0f64..20.0, speed in 0.001f64..1.9,
    ) {
        let chain = ChainSpec::uniform(150, 1.0).unwrap();
        let spec = PotentialSpec::new(kind, depth, width, 1.0).unwrap();
        let h = static_hamiltonian(&chain, &spec, 75.5).unwrap();
        let modes = eigensolve_lowest(&h, 2).unwrap();
        let a1 = adiabaticity(&h, &hamiltonian_rate(&spec, &chain, 75.5, speed), &modes).unwrap();
        let a2 = adiabaticity(&h, &hamiltonian_rate(&spec, &chain, 75.5, 2.0 * speed), &modes).unwrap();
        prop_assert!((a2 - 2.0 * a1).abs() <= 1e-12 * a2.max(1e-300));
    }

    #[test]
    fn couplings_are_reproducible_and_windowed(
        sigma in 0.0f64..0.99, seed in any::<u64>(), n in 1usize..400,
    ) {
        let spec = DisorderSpec::whole_chain(n + 1, 1.0, sigma, seed).unwrap();
        let a = sample_couplings(&spec, n).unwrap();
        let b = sample_couplings(&spec, n).unwrap();
        prop_assert_eq!(&a, &b);
        for j in a {
            prop_assert!(j > 0.0);
            prop_assert!((j - 1.0).abs() <= sigma * (1.0 + 1e-15));
        }
    }

    #[test]
    fn median_ignores_realization_order(mut values in prop::collection::vec(0.0f64..1.0, 1..40), seed in any::<u64>()) {
        let before = median(&values);
        let len = values.len();
        values.rotate_left((seed % len as u64) as usize);
        values.reverse();
        prop_assert_eq!(before, median(&values));
    }

    #[test]
    fn gap_map_is_non_negative(kind in kind(), r in 0.5f64..5.0, w in 0.5f64..40.0) {
        let pts = gap_phase_diagram(kind, &[r], &[w], DEFAULT_MAP_DEPTH_RY, Execution::Sequential).unwrap();
        prop_assert!(pts[0].gap >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn transport_keeps_norm_and_bounded_diagnostics(
        kind in kind(), speed in 0.0f64..1.5, delta in -0.3f64..0.3, width in 3.0f64..8.0,
    ) {
        let chain = ChainSpec::uniform(160, 1.0).unwrap();
        let potential = PotentialSpec::new(kind, 1.0, width, 1.0).unwrap();
        let trajectory = Trajectory::new(40.0, speed, 40.0).unwrap();
        let launch = (speed + delta).clamp(0.0, 1.9);
        let mut config = TransportConfig::matched(chain, potential, trajectory).with_stride(20);
        config.launch_speed = launch;
        let m = run_transport(&config).unwrap();
        prop_assert!(m.max_norm_drift <= 1e-8);
        let n = m.times.len();
        prop_assert!(m.fidelity.len() == n && m.confinement.len() == n && m.position.len() == n && m.energy.len() == n);
        for (f, c) in m.fidelity.iter().zip(&m.confinement) {
            prop_assert!((0.0..=1.0 + 1e-9).contains(f));
            prop_assert!((0.0..=1.0 + 1e-9).contains(c));
        }
    }
}

#[test]
fn static_energy_is_conserved() {
    let chain = ChainSpec::uniform(300, 1.0).unwrap();
    let potential = PotentialSpec::square_well(1.0, 10.0).unwrap();
    let trajectory = Trajectory::stationary(150.5, 400.0).unwrap();
    let mut config = TransportConfig::matched(chain, potential, trajectory).with_stride(1000);
    config.launch_speed = 0.3;
    let m = run_transport(&config).unwrap();
    let e0 = m.energy[0];
    let drift = m.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
    assert!(drift <= 1e-8 * e0.abs(), "energy drift {drift}");
    assert!(m.max_norm_drift <= 1e-8);
}

#[test]
fn matched_runs_agree_across_speeds() {
    let chain = ChainSpec::uniform(400, 1.0).unwrap();
    let potential = PotentialSpec::poschl_teller(1.0, 20.0).unwrap();
    let finals: Vec<f64> = [0.2, 0.6]
        .iter()
        .map(|&s| {
            let trajectory = Trajectory::new(61.0, s, 200.0 / s).unwrap();
            let m = run_transport(&TransportConfig::matched(chain.clone(), potential, trajectory).with_stride(500))
                .unwrap();
            assert_eq!(m.regime, spinguide::Regime::I);
            m.final_fidelity()
        })
        .collect();
    assert!((finals[0] - finals[1]).abs() <= 0.01, "{finals:?}");
}

#[test]
fn mirrored_run_returns_to_start() {
    let chain = ChainSpec::uniform(200, 1.0).unwrap();
    let potential = PotentialSpec::square_well(1.0, 6.0).unwrap();
    let trajectory = Trajectory::new(50.0, 0.7, 100.0).unwrap();
    let mut prop = Propagator::new(&chain, &potential, &trajectory);
    let start = spinguide::dynamics::launch_state(&chain, &potential, 50.0, 0.9).unwrap();
    let mut state = start.clone();
    for _ in 0..3000 {
        prop.advance(&mut state, 0.01).unwrap();
    }
    for _ in 0..3000 {
        prop.advance(&mut state, -0.01).unwrap();
    }
    assert!(start.inner(&state).norm_sqr() >= 1.0 - 1e-6);
    assert!(state.time.abs() < 1e-9);
}

#[test]
fn clean_trace_on_sites_is_flat() {
    let chain = ChainSpec::uniform(300, 1.0).unwrap();
    for spec in [PotentialSpec::poschl_teller(1.0, 10.0).unwrap(), PotentialSpec::square_well(1.0, 8.0).unwrap()] {
        let centers = safe_centers(&chain, spec.safe_margin(), 40).unwrap();
        let trace = ground_energy_trace(&chain, &spec, &centers).unwrap();
        let spread = trace.iter().map(|e| (e - trace[0]).abs()).fold(0.0, f64::max);
        assert!(spread <= 1e-9, "{spread}");
    }
}
