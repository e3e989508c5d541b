//! Instantaneous spectra: bound modes, the first excitation gap and the
//! two-level adiabaticity parameter.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lattice::{build_hamiltonian, ChainSpec, EffectiveHamiltonian, SiteField};
use crate::parallel::{self, Execution};
use crate::potentials::{field_at_center, PotentialKind, PotentialSpec};
use crate::tridiag;

/// Margin below the free band minimum for a mode to count as bound.
pub const BOUND_TOLERANCE: f64 = 1e-12;

/// Gaps below this are treated as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Number of eigenvalues reported per sweep row.
pub const SWEEP_EIGENVALUES: usize = 20;

/// Eigenpairs of an instantaneous Hamiltonian, ascending.
///
/// A result from [`eigensolve`] holds the full spectrum. Results from
/// [`eigensolve_lowest`] and [`eigensolve_bound`] hold only the lowest
/// modes, which is all the transport diagnostics need.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub bound_count: usize,
    pub gap: f64,
    /// Zero-field band minimum that defines "bound".
    pub band_min: f64,
    /// Dimension of the Hamiltonian.
    pub dim: usize,
}

impl SpectrumResult {
    fn assemble(
        h: &EffectiveHamiltonian,
        eigenvalues: Vec<f64>,
        eigenvectors: Vec<Vec<f64>>,
    ) -> Self {
        let band_min = h.free_band_min();
        let bound_count = tridiag::sturm_count(
            h.diagonal(),
            h.off_diagonal(),
            band_min - BOUND_TOLERANCE,
        );
        let gap = if eigenvalues.len() >= 2 {
            (eigenvalues[1] - eigenvalues[0]).max(0.0)
        } else {
            0.0
        };
        Self {
            eigenvalues,
            eigenvectors,
            bound_count,
            gap,
            band_min,
            dim: h.dim(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.eigenvalues.len() == self.dim
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> &[f64] {
        &self.eigenvectors[0]
    }

    /// Bound eigenvectors held by this result.
    pub fn bound_modes(&self) -> impl Iterator<Item = &[f64]> {
        let n = count_bound_modes(self, self.band_min);
        self.eigenvectors.iter().take(n).map(Vec::as_slice)
    }
}

/// Full eigendecomposition by implicit QL.
pub fn eigensolve(h: &EffectiveHamiltonian) -> Result<SpectrumResult> {
    let (values, vectors) = tridiag::full_eigen(h.diagonal(), h.off_diagonal())?;
    Ok(SpectrumResult::assemble(h, values, vectors))
}

/// The `count` lowest eigenpairs by bisection and inverse iteration.
pub fn eigensolve_lowest(h: &EffectiveHamiltonian, count: usize) -> Result<SpectrumResult> {
    let (values, vectors) = tridiag::lowest_eigenpairs(h.diagonal(), h.off_diagonal(), count)?;
    Ok(SpectrumResult::assemble(h, values, vectors))
}

/// Every bound mode, and at least `min_count` modes in total.
pub fn eigensolve_bound(h: &EffectiveHamiltonian, min_count: usize) -> Result<SpectrumResult> {
    let bound = tridiag::sturm_count(
        h.diagonal(),
        h.off_diagonal(),
        h.free_band_min() - BOUND_TOLERANCE,
    );
    eigensolve_lowest(h, bound.max(min_count))
}

/// Eigenvalues strictly below `band_min − 1e−12` among those held.
pub fn count_bound_modes(spec: &SpectrumResult, band_min: f64) -> usize {
    spec.eigenvalues
        .iter()
        .take_while(|e| **e < band_min - BOUND_TOLERANCE)
        .count()
}

/// E₁ − E₀.
pub fn excitation_gap(spec: &SpectrumResult) -> Result<f64> {
    if spec.eigenvalues.len() < 2 {
        return Err(invalid("gap needs at least two eigenvalues"));
    }
    Ok(spec.eigenvalues[1] - spec.eigenvalues[0])
}

/// Two-level adiabaticity |⟨ψ₀|∂ₜH|ψ₁⟩| / (E₀ − E₁)².
///
/// `dh_dt` is the diagonal of ∂ₜH; the hopping is static.
pub fn adiabaticity(h: &EffectiveHamiltonian, dh_dt: &[f64], spec: &SpectrumResult) -> Result<f64> {
    if dh_dt.len() != h.dim() {
        return Err(invalid(format!(
            "time derivative has {} entries for dimension {}",
            dh_dt.len(),
            h.dim()
        )));
    }
    if spec.eigenvectors.len() < 2 || spec.dim != h.dim() {
        return Err(invalid("adiabaticity needs the two lowest eigenvectors of H"));
    }
    let gap = spec.eigenvalues[1] - spec.eigenvalues[0];
    if gap.abs() <= DEGENERACY_TOLERANCE {
        return Err(Error::DegenerateSpectrum { gap });
    }
    let coupling: f64 = spec.eigenvectors[0]
        .iter()
        .zip(&spec.eigenvectors[1])
        .zip(dh_dt)
        .map(|((a, b), d)| a * d * b)
        .sum();
    Ok(coupling.abs() / (gap * gap))
}

/// R = A / v.
pub fn reduced_adiabaticity(a: f64, speed: f64) -> Result<f64> {
    if !(speed > 0.0) {
        return Err(invalid(format!("speed must be positive, got {speed}")));
    }
    Ok(a / speed)
}

/// Diagonal of ∂ₜH for a well centred on `center` moving at `speed`:
/// H_nn = −B_n, so ∂ₜH_nn = S·∂B/∂x.
pub fn hamiltonian_rate(
    spec: &PotentialSpec,
    chain: &ChainSpec,
    center: f64,
    speed: f64,
) -> Vec<f64> {
    (0..chain.n_sites())
        .map(|i| speed * spec.slope(chain.position(i), center))
        .collect()
}

/// Hamiltonian of `chain` with a well centred on `center`.
pub fn static_hamiltonian(
    chain: &ChainSpec,
    spec: &PotentialSpec,
    center: f64,
) -> Result<EffectiveHamiltonian> {
    let field = SiteField {
        values: field_at_center(spec, chain, center),
        time: 0.0,
    };
    build_hamiltonian(chain, &field)
}

/// Reduced adiabaticity A/S of a well at `center`, evaluated at unit speed.
pub fn reduced_adiabaticity_at(
    chain: &ChainSpec,
    spec: &PotentialSpec,
    center: f64,
) -> Result<f64> {
    let h = static_hamiltonian(chain, spec, center)?;
    let modes = eigensolve_lowest(&h, 2)?;
    let rate = hamiltonian_rate(spec, chain, center, 1.0);
    reduced_adiabaticity(adiabaticity(&h, &rate, &modes)?, 1.0)
}

/// RMS spread of a real mode about its mean position.
pub fn rms_width(mode: &[f64], chain: &ChainSpec) -> f64 {
    let norm: f64 = mode.iter().map(|c| c * c).sum();
    let mean: f64 = mode
        .iter()
        .enumerate()
        .map(|(i, c)| c * c * chain.position(i))
        .sum::<f64>()
        / norm;
    let var: f64 = mode
        .iter()
        .enumerate()
        .map(|(i, c)| c * c * (chain.position(i) - mean).powi(2))
        .sum::<f64>()
        / norm;
    var.sqrt()
}

/// RMS width of the ground state with the well centred on a uniform chain
/// long enough (20w + 60 sites) that the ends do not matter.
pub fn ground_state_rms(spec: &PotentialSpec) -> Result<f64> {
    let n = (20.0 * spec.width).ceil() as usize + 60;
    let chain = ChainSpec::uniform(n, 1.0)?;
    let h = static_hamiltonian(&chain, spec, chain.position(n / 2))?;
    let modes = eigensolve_lowest(&h, 1)?;
    Ok(rms_width(modes.ground_state(), &chain))
}

/// Width of a `kind` well (same depth and smoothing) whose ground state has
/// the same RMS width as the ground state of `reference`.
///
/// Very narrow wells bind weakly and spread out again, so the match is taken
/// on the branch where the RMS width grows with w.
pub fn rms_matched_width(reference: &PotentialSpec, kind: PotentialKind) -> Result<f64> {
    if !(reference.depth > 0.0) {
        return Err(invalid("width matching needs a well of positive depth"));
    }
    let target = ground_state_rms(reference)?;
    let rms = |w: f64| ground_state_rms(&PotentialSpec::new(kind, reference.depth, w, reference.smoothing)?);
    let (lo, hi) = (0.05 * reference.width, 20.0 * reference.width);
    let steps = 96;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| lo * (hi / lo).powf(i as f64 / steps as f64))
        .collect();
    let mut prev = (grid[0], rms(grid[0])?);
    for &w in &grid[1..] {
        let cur = (w, rms(w)?);
        if cur.1 > prev.1 && prev.1 <= target && target <= cur.1 {
            let (mut a, mut b) = (prev.0, cur.0);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if rms(mid)? < target {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(0.5 * (a + b));
        }
        prev = cur;
    }
    Err(Error::Numerical(format!(
        "no {kind} width in [{lo}, {hi}] matches ground-state RMS width {target}"
    )))
}

/// One (kind, width, depth) point of a width/depth sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub kind: PotentialKind,
    pub width: f64,
    pub depth: f64,
    pub gap: f64,
    pub bound_count: usize,
    pub reduced_adiabaticity: f64,
    pub eigenvalues: Vec<f64>,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "kind,w,B0,gap,bound_count,R";
}

/// Spectral data for a single well centred in `chain`.
pub fn sweep_point(chain: &ChainSpec, spec: &PotentialSpec) -> Result<SweepRow> {
    let (lo, hi) = chain.extent();
    let center = 0.5 * (lo + hi);
    let h = static_hamiltonian(chain, spec, center)?;
    let values = tridiag::lowest_eigenvalues(h.diagonal(), h.off_diagonal(), SWEEP_EIGENVALUES)?;
    let modes = eigensolve_lowest(&h, 2)?;
    let rate = hamiltonian_rate(spec, chain, center, 1.0);
    let r = if spec.depth > 0.0 {
        adiabaticity(&h, &rate, &modes)?
    } else {
        0.0
    };
    Ok(SweepRow {
        kind: spec.kind,
        width: spec.width,
        depth: spec.depth,
        gap: modes.gap,
        bound_count: modes.bound_count,
        reduced_adiabaticity: r,
        eigenvalues: values,
    })
}

/// Gap, bound-mode count, R and the lowest eigenvalues over a width × depth
/// grid. Rows are ordered by (depth, width).
pub fn gap_and_r_sweep(
    chain: &ChainSpec,
    kind: PotentialKind,
    smoothing: f64,
    widths: &[f64],
    depths: &[f64],
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    if widths.is_empty() || depths.is_empty() {
        return Err(invalid("sweep needs at least one width and one depth"));
    }
    let mut grid = Vec::with_capacity(widths.len() * depths.len());
    for &depth in depths {
        for &width in widths {
            grid.push(PotentialSpec::new(kind, depth, width, smoothing)?);
        }
    }
    let mut rows = parallel::try_map(&grid, exec, |spec| sweep_point(chain, spec))?;
    rows.sort_by(|a, b| {
        a.depth
            .total_cmp(&b.depth)
            .then(a.width.total_cmp(&b.width))
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Trajectory;
    use std::f64::consts::PI;

    #[test]
    fn two_site_hopping() {
        let h = EffectiveHamiltonian::new(vec![0.0, 0.0], vec![-1.0]).unwrap();
        let spec = eigensolve(&h).unwrap();
        assert!((spec.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((spec.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert_eq!(spec.bound_count, 0);
    }

    #[test]
    fn uniform_gap_matches_analytic() {
        let chain = ChainSpec::uniform(200, 1.0).unwrap();
        let h = build_hamiltonian(&chain, &SiteField::zero(200)).unwrap();
        let spec = eigensolve(&h).unwrap();
        let exact = 2.0 * ((PI / 201.0).cos() - (2.0 * PI / 201.0).cos());
        assert!((excitation_gap(&spec).unwrap() - exact).abs() < 1e-12);
        assert_eq!(count_bound_modes(&spec, h.free_band_min()), 0);
    }

    #[test]
    fn deep_single_site_well_localizes() {
        // Oracle: a 3-site block (well site plus neighbours) bounds the weight
        // off the well by J²/B₀² per neighbour to leading order.
        let mut values = vec![0.0; 21];
        values[10] = 10.0;
        let chain = ChainSpec::uniform(21, 1.0).unwrap();
        let h = build_hamiltonian(&chain, &SiteField::new(values, 0.0).unwrap()).unwrap();
        let spec = eigensolve(&h).unwrap();
        let weight = spec.ground_state()[10].powi(2);
        assert!(weight > 0.9, "weight {weight}");
        assert_eq!(spec.bound_count, 1);
    }

    #[test]
    fn partial_and_full_spectra_agree() {
        let chain = ChainSpec::uniform(120, 1.0).unwrap();
        let spec = PotentialSpec::poschl_teller(1.0, 8.0).unwrap();
        let h = static_hamiltonian(&chain, &spec, 60.0).unwrap();
        let full = eigensolve(&h).unwrap();
        let part = eigensolve_bound(&h, 2).unwrap();
        assert_eq!(full.bound_count, part.bound_count);
        assert_eq!(part.eigenvalues.len(), part.bound_count);
        for k in 0..part.bound_count {
            assert!((full.eigenvalues[k] - part.eigenvalues[k]).abs() < 1e-11);
            let dot: f64 = full.eigenvectors[k].iter().zip(&part.eigenvectors[k]).map(|(a, b)| a * b).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn adiabaticity_is_linear_in_speed() {
        let chain = ChainSpec::uniform(150, 1.0).unwrap();
        let spec = PotentialSpec::square_well(1.0, 6.0).unwrap();
        let h = static_hamiltonian(&chain, &spec, 75.3).unwrap();
        let modes = eigensolve_lowest(&h, 2).unwrap();
        let a1 = adiabaticity(&h, &hamiltonian_rate(&spec, &chain, 75.3, 0.3), &modes).unwrap();
        let a2 = adiabaticity(&h, &hamiltonian_rate(&spec, &chain, 75.3, 0.6), &modes).unwrap();
        assert!((a2 - 2.0 * a1).abs() <= 1e-12 * a2);
        let a0 = adiabaticity(&h, &hamiltonian_rate(&spec, &chain, 75.3, 0.0), &modes).unwrap();
        assert_eq!(a0, 0.0);
        for v in [0.01, 0.1, 1.0] {
            let a = adiabaticity(&h, &hamiltonian_rate(&spec, &chain, 75.3, v), &modes).unwrap();
            let r = reduced_adiabaticity(a, v).unwrap();
            assert!((r - a1 / 0.3).abs() <= 1e-9 * r);
        }
    }

    #[test]
    fn rate_matches_potential_time_derivative() {
        let chain = ChainSpec::uniform(60, 1.0).unwrap();
        let spec = PotentialSpec::poschl_teller(1.0, 5.0).unwrap();
        let traj = Trajectory::new(20.0, 0.4, 10.0).unwrap();
        let db = crate::potentials::sample_time_derivative(&spec, &traj, &chain, 3.0).unwrap();
        let rate = hamiltonian_rate(&spec, &chain, traj.center(3.0), 0.4);
        for (r, d) in rate.iter().zip(db) {
            assert!((r + d).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_spectrum_is_reported() {
        let h = EffectiveHamiltonian::new(vec![0.0, 0.0, 5.0], vec![0.0, -1.0]).unwrap();
        let spec = SpectrumResult {
            eigenvalues: vec![0.0, 0.0],
            eigenvectors: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            bound_count: 0,
            gap: 0.0,
            band_min: h.free_band_min(),
            dim: 3,
        };
        assert!(matches!(
            adiabaticity(&h, &[1.0, 1.0, 1.0], &spec),
            Err(Error::DegenerateSpectrum { .. })
        ));
        assert!(reduced_adiabaticity(1.0, 0.0).is_err());
        assert!(reduced_adiabaticity(1.0, -1.0).is_err());
    }

    #[test]
    fn zero_depth_has_no_bound_modes() {
        let chain = ChainSpec::uniform(50, 1.0).unwrap();
        let spec = PotentialSpec::poschl_teller(0.0, 5.0).unwrap();
        let h = static_hamiltonian(&chain, &spec, 25.0).unwrap();
        assert_eq!(eigensolve(&h).unwrap().bound_count, 0);
    }

    #[test]
    fn single_point_sweep_matches_direct_call() {
        let chain = ChainSpec::uniform(100, 1.0).unwrap();
        let rows = gap_and_r_sweep(
            &chain,
            PotentialKind::SquareWell,
            1.0,
            &[3.0],
            &[0.5],
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        let spec = PotentialSpec::square_well(0.5, 3.0).unwrap();
        let h = static_hamiltonian(&chain, &spec, 50.5).unwrap();
        let full = eigensolve(&h).unwrap();
        assert!((rows[0].gap - full.gap).abs() < 1e-11);
        assert_eq!(rows[0].bound_count, full.bound_count);
        let r = reduced_adiabaticity_at(&chain, &spec, 50.5).unwrap();
        assert!((rows[0].reduced_adiabaticity - r).abs() <= 1e-12 * r);
        assert_eq!(rows[0].eigenvalues.len(), SWEEP_EIGENVALUES);
        assert!(gap_and_r_sweep(&chain, PotentialKind::SquareWell, 1.0, &[], &[1.0], Execution::Sequential).is_err());
    }

    #[test]
    fn narrow_square_well_bound_counts() {
        // a half-width-w well of depth V holds 1 + floor(2w·sqrt(V/J)/π) states
        // in the continuum limit, so the second one enters near w = π/2
        let chain = ChainSpec::uniform(100, 1.0).unwrap();
        for (w, expected) in [(1.0, 1), (2.0, 2)] {
            let spec = PotentialSpec::square_well(1.0, w).unwrap();
            let row = sweep_point(&chain, &spec).unwrap();
            let full = eigensolve(&static_hamiltonian(&chain, &spec, 50.5).unwrap()).unwrap();
            let below = full.eigenvalues.iter().filter(|&&e| e < -2.0).count();
            assert_eq!(row.bound_count, expected, "w = {w}");
            assert_eq!(below, expected, "w = {w}");
        }
    }

    #[test]
    fn matched_width_reproduces_reference_rms() {
        let sw = PotentialSpec::square_well(1.0, 5.0).unwrap();
        let same = rms_matched_width(&sw, PotentialKind::SquareWell).unwrap();
        assert!((same - 5.0).abs() < 1e-6, "{same}");
        let pt = rms_matched_width(&sw, PotentialKind::PoschlTeller).unwrap();
        let a = ground_state_rms(&sw).unwrap();
        let b = ground_state_rms(&PotentialSpec::poschl_teller(1.0, pt).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
        assert!(pt > 5.0 && pt < 20.0);
    }
}
