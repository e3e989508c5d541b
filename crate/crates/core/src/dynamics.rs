//! Magnon launch, unitary time evolution and transport diagnostics.
//!
//! The propagator is the Cayley (Crank-Nicolson) form
//!
//! ```text
//! ψ(t + dt) = e^{−iE dt} (1 + i dt/2 (H − E))⁻¹ (1 − i dt/2 (H − E)) ψ(t)
//! ```
//!
//! with H evaluated at the midpoint t + dt/2 and E = ⟨ψ|H|ψ⟩. The Cayley
//! factor is exactly unitary and commutes with H, so ⟨ψ|H|ψ⟩ is the same
//! before and after the step: the reference energy is identical for a step
//! and its reverse (dt → −dt), and the update stays time-reversible. Pulling
//! the mean energy out as an exact phase leaves a stationary state with
//! exactly the phase e^{−iE dt}.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lattice::{self, wavenumber_for_speed, ChainSpec, EffectiveHamiltonian};
use crate::parallel::{self, Execution};
use crate::potentials::{PotentialSpec, Trajectory};
use crate::spectral::{self, SpectrumResult, DEGENERACY_TOLERANCE};
use crate::tridiag;

/// Final fidelity at or above which a run is regime I.
pub const FIDELITY_THRESHOLD: f64 = 0.99;
/// Final confinement at or above which a non-regime-I run is regime II.
pub const CONFINEMENT_THRESHOLD: f64 = 0.9;
/// Default (2J₀/ħ)·dt.
pub const DEFAULT_STEP_PRODUCT: f64 = 0.02;
/// Largest admissible (2J₀/ħ)·dt.
pub const MAX_STEP_PRODUCT: f64 = 0.1;
pub const DEFAULT_SAMPLE_STRIDE: usize = 10;

/// Amplitudes c_n in the one-excitation basis at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnonState {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl MagnonState {
    pub fn new(amplitudes: Vec<Complex64>, time: f64) -> Self {
        Self { amplitudes, time }
    }

    /// A spin flip on the site with 0-based storage index `index`.
    pub fn localized(n_sites: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_sites];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes, 0.0)
    }

    /// Real mode times the phase e^{ikan}, normalized.
    pub fn boosted(mode: &[f64], chain: &ChainSpec, k: f64, time: f64) -> Self {
        let mut state = Self::new(
            mode.iter()
                .enumerate()
                .map(|(i, c)| Complex64::from_polar(*c, k * chain.position(i)))
                .collect(),
            time,
        );
        state.normalize();
        state
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.amplitudes.iter_mut().for_each(|c| *c /= norm);
        }
    }

    /// ⟨φ|ψ⟩ with a real bra.
    pub fn overlap_real(&self, mode: &[f64]) -> Complex64 {
        mode.iter().zip(&self.amplitudes).map(|(m, c)| c * *m).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &MagnonState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Transport regimes: ground-state guided, confined but mode-mixed, lossy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    I,
    II,
    III,
}

impl Regime {
    pub fn classify(fidelity: f64, confinement: f64) -> Self {
        if fidelity >= FIDELITY_THRESHOLD {
            Regime::I
        } else if confinement >= CONFINEMENT_THRESHOLD {
            Regime::II
        } else {
            Regime::III
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::I => "I",
            Regime::II => "II",
            Regime::III => "III",
        })
    }
}

/// Everything needed for one transport run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportConfig {
    pub chain: ChainSpec,
    pub potential: PotentialSpec,
    pub trajectory: Trajectory,
    /// Magnon group velocity at launch, v = S + Δ.
    pub launch_speed: f64,
    /// Launch displacement of the magnon from the well centre.
    pub launch_offset: f64,
    pub dt: f64,
    pub sample_stride: usize,
}

impl TransportConfig {
    /// Matched launch (v = S) with default step and stride.
    pub fn matched(chain: ChainSpec, potential: PotentialSpec, trajectory: Trajectory) -> Self {
        let dt = DEFAULT_STEP_PRODUCT / (2.0 * chain.base_coupling());
        Self {
            launch_speed: trajectory.speed,
            chain,
            potential,
            trajectory,
            launch_offset: 0.0,
            dt,
            sample_stride: DEFAULT_SAMPLE_STRIDE,
        }
    }

    pub fn with_mismatch(mut self, delta: f64) -> Self {
        self.launch_speed = self.trajectory.speed + delta;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        let product = 2.0 * self.chain.base_coupling() * self.dt;
        if product > MAX_STEP_PRODUCT * (1.0 + 1e-12) {
            return Err(invalid(format!(
                "(2J/ħ)·dt = {product} exceeds {MAX_STEP_PRODUCT}"
            )));
        }
        if self.sample_stride == 0 {
            return Err(invalid("sample stride must be at least 1"));
        }
        let limit = self.chain.speed_limit();
        if !(0.0..=limit).contains(&self.launch_speed) {
            return Err(Error::SpeedLimitExceeded {
                speed: self.launch_speed,
                limit,
            });
        }
        Ok(())
    }

    pub fn launch_wavenumber(&self) -> Result<f64> {
        wavenumber_for_speed(
            self.chain.base_coupling(),
            self.chain.lattice_spacing(),
            self.launch_speed,
        )
    }
}

/// Sampled diagnostics of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportMetrics {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub confinement: Vec<f64>,
    pub position: Vec<f64>,
    pub energy: Vec<f64>,
    /// ⟨v⟩ from the current operator.
    pub velocity: Vec<f64>,
    /// Well centre x₀(t).
    pub center: Vec<f64>,
    pub regime: Regime,
    /// Largest |1 − Σ|c_n|²| seen at any step.
    pub max_norm_drift: f64,
    pub steps: usize,
}

impl TransportMetrics {
    pub const CSV_HEADER: &'static str = "t,F,C,x_mean,energy";

    pub fn final_fidelity(&self) -> f64 {
        *self.fidelity.last().expect("at least one sample")
    }

    pub fn final_confinement(&self) -> f64 {
        *self.confinement.last().expect("at least one sample")
    }

    pub fn min_fidelity(&self) -> f64 {
        self.fidelity.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_confinement(&self) -> f64 {
        self.confinement.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest |⟨x⟩ − x₀| over the samples.
    pub fn max_displacement(&self) -> f64 {
        self.position
            .iter()
            .zip(&self.center)
            .map(|(x, c)| (x - c).abs())
            .fold(0.0, f64::max)
    }
}

/// Cayley propagator bound to one chain, potential and trajectory.
pub struct Propagator<'a> {
    chain: &'a ChainSpec,
    potential: &'a PotentialSpec,
    trajectory: &'a Trajectory,
    exchange: Vec<f64>,
    off: Vec<f64>,
    diag: Vec<f64>,
    lhs_diag: Vec<Complex64>,
    lhs_off: Vec<Complex64>,
    rhs: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl<'a> Propagator<'a> {
    pub fn new(chain: &'a ChainSpec, potential: &'a PotentialSpec, trajectory: &'a Trajectory) -> Self {
        let n = chain.n_sites();
        let zero = Complex64::new(0.0, 0.0);
        Self {
            chain,
            potential,
            trajectory,
            exchange: chain.exchange_diagonal(),
            off: chain.couplings().iter().map(|j| -j).collect(),
            diag: vec![0.0; n],
            lhs_diag: vec![zero; n],
            lhs_off: vec![zero; n.saturating_sub(1)],
            rhs: vec![zero; n],
            scratch: vec![zero; n],
        }
    }

    fn load_diagonal(&mut self, t: f64) {
        let center = self.trajectory.center(t);
        for (i, d) in self.diag.iter_mut().enumerate() {
            *d = self.exchange[i] - self.potential.profile(self.chain.position(i), center);
        }
    }

    /// H(t) as an [`EffectiveHamiltonian`].
    pub fn hamiltonian(&mut self, t: f64) -> Result<EffectiveHamiltonian> {
        self.load_diagonal(t);
        EffectiveHamiltonian::new(self.diag.clone(), self.off.clone())
    }

    /// ⟨ψ|H(t)|ψ⟩.
    pub fn energy(&mut self, state: &MagnonState, t: f64) -> f64 {
        self.load_diagonal(t);
        lattice::expectation(&self.diag, &self.off, &state.amplitudes)
    }

    /// Advance `state` by `dt` (which may be negative).
    pub fn advance(&mut self, state: &mut MagnonState, dt: f64) -> Result<()> {
        let n = self.chain.n_sites();
        if state.amplitudes.len() != n {
            return Err(invalid(format!(
                "state has {} amplitudes for {n} sites",
                state.amplitudes.len()
            )));
        }
        self.load_diagonal(state.time + 0.5 * dt);
        let psi = &mut state.amplitudes;
        let reference = lattice::expectation(&self.diag, &self.off, psi);
        let half = Complex64::new(0.0, 0.5 * dt);
        let one = Complex64::new(1.0, 0.0);

        for i in 0..n {
            let d = self.diag[i] - reference;
            let mut h_psi = psi[i] * d;
            if i > 0 {
                h_psi += psi[i - 1] * self.off[i - 1];
            }
            if i + 1 < n {
                h_psi += psi[i + 1] * self.off[i];
            }
            self.rhs[i] = psi[i] - half * h_psi;
            self.lhs_diag[i] = one + half * d;
        }
        for (l, j) in self.lhs_off.iter_mut().zip(&self.off) {
            *l = half * *j;
        }
        tridiag::solve_complex_tridiagonal(&self.lhs_diag, &self.lhs_off, &mut self.rhs, &mut self.scratch)?;

        let phase = Complex64::from_polar(1.0, -reference * dt);
        for (c, r) in psi.iter_mut().zip(&self.rhs) {
            *c = r * phase;
        }
        state.time += dt;
        Ok(())
    }

    /// Lowest modes of H(t): every bound mode and at least two in total.
    pub fn modes(&mut self, t: f64) -> Result<SpectrumResult> {
        let h = self.hamiltonian(t)?;
        spectral::eigensolve_bound(&h, 2)
    }
}

/// Advance `state` by one step of length `dt`.
pub fn step(
    state: &MagnonState,
    chain: &ChainSpec,
    potential: &PotentialSpec,
    trajectory: &Trajectory,
    dt: f64,
) -> Result<MagnonState> {
    let mut next = state.clone();
    Propagator::new(chain, potential, trajectory).advance(&mut next, dt)?;
    Ok(next)
}

/// Ground state of the well centred on `center`, boosted to group velocity
/// `speed`.
pub fn launch_state(
    chain: &ChainSpec,
    potential: &PotentialSpec,
    center: f64,
    speed: f64,
) -> Result<MagnonState> {
    let k = wavenumber_for_speed(chain.base_coupling(), chain.lattice_spacing(), speed)?;
    let h = spectral::static_hamiltonian(chain, potential, center)?;
    let modes = spectral::eigensolve_lowest(&h, 2)?;
    if modes.gap <= DEGENERACY_TOLERANCE {
        return Err(Error::DegenerateSpectrum { gap: modes.gap });
    }
    Ok(MagnonState::boosted(modes.ground_state(), chain, k, 0.0))
}

/// e^{ikan}ψ₀ for the t = 0 well, with k matched to `speed`.
pub fn prepare_launch_state(
    chain: &ChainSpec,
    potential: &PotentialSpec,
    trajectory: &Trajectory,
    speed: f64,
) -> Result<MagnonState> {
    launch_state(chain, potential, trajectory.start_center, speed)
}

/// |⟨e^{ikx}ψ₀|φ⟩|² given the instantaneous ground state.
pub fn fidelity_with(state: &MagnonState, ground: &[f64], chain: &ChainSpec, k: f64) -> f64 {
    state
        .amplitudes
        .iter()
        .zip(ground)
        .enumerate()
        .map(|(i, (c, g))| c * Complex64::from_polar(*g, -k * chain.position(i)))
        .sum::<Complex64>()
        .norm_sqr()
}

/// Ground-state fidelity 𝓕(t) against the boosted instantaneous ground state.
pub fn fidelity(
    state: &MagnonState,
    chain: &ChainSpec,
    potential: &PotentialSpec,
    trajectory: &Trajectory,
    t: f64,
    k: f64,
) -> Result<f64> {
    let h = spectral::static_hamiltonian(chain, potential, trajectory.center(t))?;
    let modes = spectral::eigensolve_lowest(&h, 1)?;
    Ok(fidelity_with(state, modes.ground_state(), chain, k))
}

/// Population of the bound-mode subspace of `spec`.
pub fn confinement(state: &MagnonState, spec: &SpectrumResult, band_min: f64) -> f64 {
    let bound = spectral::count_bound_modes(spec, band_min);
    spec.eigenvectors
        .iter()
        .take(bound)
        .map(|m| state.overlap_real(m).norm_sqr())
        .sum()
}

/// ⟨x⟩ = Σ a·n·|c_n|².
pub fn position_expectation(state: &MagnonState, spacing: f64) -> f64 {
    state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, c)| spacing * (i as f64 + 1.0) * c.norm_sqr())
        .sum()
}

/// ⟨v⟩ = 2a Σ J_n Im(c_n* c_{n+1}), the expectation of i[H, x].
pub fn velocity_expectation(state: &MagnonState, chain: &ChainSpec) -> f64 {
    2.0 * chain.lattice_spacing()
        * chain
            .couplings()
            .iter()
            .zip(state.amplitudes.windows(2))
            .map(|(j, w)| j * (w[0].conj() * w[1]).im)
            .sum::<f64>()
}

/// Integrate a transport run from t = 0 to T and classify its regime.
pub fn run_transport(config: &TransportConfig) -> Result<TransportMetrics> {
    config.validate()?;
    let chain = &config.chain;
    let trajectory = &config.trajectory;
    trajectory.warn_if_near_edges(chain, config.potential.safe_margin());

    let k = config.launch_wavenumber()?;
    let mut state = launch_state(
        chain,
        &config.potential,
        trajectory.start_center + config.launch_offset,
        config.launch_speed,
    )?;
    let mut propagator = Propagator::new(chain, &config.potential, trajectory);

    let total = trajectory.duration;
    let steps = if total > 0.0 {
        ((total / config.dt) - 1e-9).ceil().max(1.0) as usize
    } else {
        0
    };

    let mut metrics = TransportMetrics {
        times: Vec::new(),
        fidelity: Vec::new(),
        confinement: Vec::new(),
        position: Vec::new(),
        energy: Vec::new(),
        velocity: Vec::new(),
        center: Vec::new(),
        regime: Regime::I,
        max_norm_drift: (1.0 - state.norm_sqr()).abs(),
        steps,
    };

    let record = |state: &MagnonState, propagator: &mut Propagator, metrics: &mut TransportMetrics| -> Result<()> {
        let t = state.time;
        let modes = propagator.modes(t)?;
        metrics.times.push(t);
        metrics.fidelity.push(fidelity_with(state, modes.ground_state(), chain, k));
        metrics.confinement.push(confinement(state, &modes, modes.band_min));
        metrics.position.push(position_expectation(state, chain.lattice_spacing()));
        metrics.energy.push(propagator.energy(state, t));
        metrics.velocity.push(velocity_expectation(state, chain));
        metrics.center.push(trajectory.center(t));
        Ok(())
    };

    record(&state, &mut propagator, &mut metrics)?;
    for n in 1..=steps {
        let dt = if n == steps {
            total - state.time
        } else {
            config.dt
        };
        propagator.advance(&mut state, dt)?;
        metrics.max_norm_drift = metrics.max_norm_drift.max((1.0 - state.norm_sqr()).abs());
        if n % config.sample_stride == 0 || n == steps {
            record(&state, &mut propagator, &mut metrics)?;
        }
    }
    metrics.regime = Regime::classify(metrics.final_fidelity(), metrics.final_confinement());
    Ok(metrics)
}

/// One launch of the static-well phase diagram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePoint {
    /// Speed mismatch Δv (the well is static).
    pub speed_mismatch: f64,
    /// Launch displacement from the well centre.
    pub offset: f64,
    pub regime: Regime,
    pub final_fidelity: f64,
    pub final_confinement: f64,
    pub min_confinement: f64,
    pub max_displacement: f64,
    /// (⟨x⟩ − x₀, ⟨v⟩) at each sample.
    pub orbit: Vec<(f64, f64)>,
}

impl PhasePoint {
    pub const CSV_HEADER: &'static str =
        "dv,offset,regime,F_final,C_final,C_min,max_displacement";
}

/// Settings for the static-well phase diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagramSpec {
    pub chain: ChainSpec,
    pub potential: PotentialSpec,
    pub center: f64,
    pub duration: f64,
    pub dt: f64,
    pub sample_stride: usize,
}

/// Launch the magnon at each (Δv, offset) inside a static well and record
/// its orbit and final regime.
pub fn speed_phase_diagram(
    spec: &PhaseDiagramSpec,
    speed_mismatches: &[f64],
    offsets: &[f64],
    exec: Execution,
) -> Result<Vec<PhasePoint>> {
    if speed_mismatches.is_empty() || offsets.is_empty() {
        return Err(invalid("phase diagram needs at least one speed and one offset"));
    }
    let trajectory = Trajectory::stationary(spec.center, spec.duration)?;
    let mut grid = Vec::new();
    for &dv in speed_mismatches {
        for &offset in offsets {
            grid.push((dv, offset));
        }
    }
    let mut points = parallel::try_map(&grid, exec, |&(dv, offset)| {
        let config = TransportConfig {
            chain: spec.chain.clone(),
            potential: spec.potential,
            trajectory,
            launch_speed: dv,
            launch_offset: offset,
            dt: spec.dt,
            sample_stride: spec.sample_stride,
        };
        let metrics = run_transport(&config)?;
        Ok(PhasePoint {
            speed_mismatch: dv,
            offset,
            regime: metrics.regime,
            final_fidelity: metrics.final_fidelity(),
            final_confinement: metrics.final_confinement(),
            min_confinement: metrics.min_confinement(),
            max_displacement: metrics.max_displacement(),
            orbit: metrics
                .position
                .iter()
                .zip(&metrics.center)
                .zip(&metrics.velocity)
                .map(|((x, c), v)| (x - c, *v))
                .collect(),
        })
    })?;
    points.sort_by(|a, b| {
        a.speed_mismatch
            .total_cmp(&b.speed_mismatch)
            .then(a.offset.total_cmp(&b.offset))
    });
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_setup() -> (ChainSpec, PotentialSpec, Trajectory) {
        (
            ChainSpec::uniform(120, 1.0).unwrap(),
            PotentialSpec::poschl_teller(1.0, 6.0).unwrap(),
            Trajectory::new(40.0, 0.5, 40.0).unwrap(),
        )
    }

    #[test]
    fn localized_state_position() {
        let state = MagnonState::localized(10, 3);
        assert_eq!(position_expectation(&state, 1.0), 4.0);
        assert_eq!(position_expectation(&state, 2.5), 10.0);
    }

    #[test]
    fn symmetric_state_position() {
        let mut state = MagnonState::localized(9, 2);
        state.amplitudes[6] = Complex64::new(0.0, 1.0);
        state.normalize();
        assert!((position_expectation(&state, 1.0) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn launch_state_is_normalized_and_matched() {
        let (chain, pot, traj) = small_setup();
        for v in [0.0, 0.3, 1.2, 2.0] {
            let state = prepare_launch_state(&chain, &pot, &traj, v).unwrap();
            assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
            let k = wavenumber_for_speed(1.0, 1.0, v).unwrap();
            let f = fidelity(&state, &chain, &pot, &traj, 0.0, k).unwrap();
            assert!((f - 1.0).abs() < 1e-12, "v={v} F={f}");
        }
        assert!(matches!(
            prepare_launch_state(&chain, &pot, &traj, 2.1),
            Err(Error::SpeedLimitExceeded { .. })
        ));
    }

    #[test]
    fn zero_speed_launch_is_ground_state() {
        let (chain, pot, traj) = small_setup();
        let state = prepare_launch_state(&chain, &pot, &traj, 0.0).unwrap();
        let h = spectral::static_hamiltonian(&chain, &pot, 40.0).unwrap();
        let full = spectral::eigensolve(&h).unwrap();
        for (c, g) in state.amplitudes.iter().zip(full.ground_state()) {
            assert!(c.im == 0.0 && (c.re - g).abs() < 1e-10);
        }
        let c = confinement(&state, &full, full.band_min);
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plane_wave_outside_well_is_unconfined() {
        let chain = ChainSpec::uniform(200, 1.0).unwrap();
        let pot = PotentialSpec::poschl_teller(1.0, 4.0).unwrap();
        let h = spectral::static_hamiltonian(&chain, &pot, 40.0).unwrap();
        let spec = spectral::eigensolve(&h).unwrap();
        // a plane-wave packet spread over sites 100..200, far from the well
        let mode: Vec<f64> = (0..200).map(|i| if i >= 100 { 1.0 } else { 0.0 }).collect();
        let state = MagnonState::boosted(&mode, &chain, 0.7, 0.0);
        assert!(confinement(&state, &spec, spec.band_min) < 0.05);
    }

    #[test]
    fn state_built_from_unbound_modes_has_low_fidelity() {
        let chain = ChainSpec::uniform(150, 1.0).unwrap();
        let pot = PotentialSpec::square_well(1.0, 5.0).unwrap();
        let traj = Trajectory::stationary(75.0, 1.0).unwrap();
        let h = spectral::static_hamiltonian(&chain, &pot, 75.0).unwrap();
        let spec = spectral::eigensolve(&h).unwrap();
        let nb = spec.bound_count;
        let mut mix = vec![0.0; 150];
        for m in nb..nb + 10 {
            for (x, v) in mix.iter_mut().zip(&spec.eigenvectors[m]) {
                *x += v;
            }
        }
        let state = MagnonState::boosted(&mix, &chain, 0.0, 0.0);
        assert!(fidelity(&state, &chain, &pot, &traj, 0.0, 0.0).unwrap() < 0.01);
        assert!(confinement(&state, &spec, spec.band_min) < 1e-20);
    }

    #[test]
    fn step_preserves_norm_and_time() {
        let (chain, pot, traj) = small_setup();
        let state = prepare_launch_state(&chain, &pot, &traj, 0.5).unwrap();
        let next = step(&state, &chain, &pot, &traj, 0.01).unwrap();
        assert!((next.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((next.time - 0.01).abs() < 1e-15);
    }

    #[test]
    fn velocity_of_plane_wave() {
        let chain = ChainSpec::uniform(60, 1.0).unwrap();
        let mode = vec![1.0; 60];
        let state = MagnonState::boosted(&mode, &chain, 0.4, 0.0);
        let expected = 2.0 * 0.4_f64.sin() * 59.0 / 60.0;
        assert!((velocity_expectation(&state, &chain) - expected).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let (chain, pot, traj) = small_setup();
        let base = TransportConfig::matched(chain, pot, traj);
        assert!(base.validate().is_ok());
        assert!(base.clone().with_dt(0.2).validate().is_err());
        assert!(base.clone().with_dt(0.0).validate().is_err());
        assert!(base.clone().with_stride(0).validate().is_err());
        assert!(base.clone().with_mismatch(1.8).validate().is_err());
    }

    #[test]
    fn regime_classification_thresholds() {
        assert_eq!(Regime::classify(0.995, 0.2), Regime::I);
        assert_eq!(Regime::classify(0.5, 0.95), Regime::II);
        assert_eq!(Regime::classify(0.5, 0.5), Regime::III);
    }

    #[test]
    fn short_matched_run_samples_every_stride() {
        let (chain, pot, _) = small_setup();
        let config = TransportConfig::matched(chain, pot, Trajectory::new(40.0, 0.5, 1.0).unwrap());
        let metrics = run_transport(&config).unwrap();
        assert_eq!(metrics.steps, 100);
        assert_eq!(metrics.times.len(), 11);
        assert!((metrics.times.last().unwrap() - 1.0).abs() < 1e-12);
        assert!(metrics.fidelity.iter().all(|f| (0.0..=1.0 + 1e-9).contains(f)));
        assert_eq!(metrics.regime, Regime::I);
    }
}
