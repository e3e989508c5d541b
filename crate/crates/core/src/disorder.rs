//! Bond disorder: truncated-Gaussian coupling realizations, ground-state
//! energy fluctuations along the chain, and empirical adiabaticity
//! thresholds for guiding a magnon through a disordered segment.
//!
//! Every realization draws from its own ChaCha stream selected by
//! (seed, realization index), so results are independent of how the
//! realizations are scheduled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::dynamics::{run_transport, TransportConfig, TransportMetrics, DEFAULT_SAMPLE_STRIDE};
use crate::error::{invalid, Error, Result};
use crate::lattice::ChainSpec;
use crate::parallel::{self, Execution};
use crate::potentials::{field_at_center, PotentialKind, PotentialSpec, Trajectory};
use crate::spectral;
use crate::tridiag;

/// Disorder strength and location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisorderSpec {
    pub mean_coupling: f64,
    /// σ_J as a fraction of the mean coupling.
    pub sigma: f64,
    pub seed: u64,
    /// Inclusive 1-based site interval; bonds with both ends inside are disordered.
    pub region: (usize, usize),
}

impl DisorderSpec {
    pub fn new(mean_coupling: f64, sigma: f64, seed: u64, region: (usize, usize)) -> Result<Self> {
        if !(mean_coupling > 0.0 && mean_coupling.is_finite()) {
            return Err(invalid(format!("mean coupling must be positive, got {mean_coupling}")));
        }
        if !(0.0..1.0).contains(&sigma) {
            return Err(invalid(format!("sigma must lie in [0, 1), got {sigma}")));
        }
        if region.0 < 1 || region.0 > region.1 {
            return Err(invalid(format!("invalid disorder region {:?}", region)));
        }
        Ok(Self {
            mean_coupling,
            sigma,
            seed,
            region,
        })
    }

    /// Disorder on every bond of an `n_sites` chain.
    pub fn whole_chain(n_sites: usize, mean_coupling: f64, sigma: f64, seed: u64) -> Result<Self> {
        Self::new(mean_coupling, sigma, seed, (1, n_sites))
    }

    /// Whether bond `bond` (1-based, joining sites `bond` and `bond + 1`) is disordered.
    pub fn contains_bond(&self, bond: usize) -> bool {
        bond >= self.region.0 && bond < self.region.1
    }

    fn rng(&self, realization: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(realization);
        rng
    }
}

/// One draw from N(mean, sd²) restricted to [mean − sd, mean + sd].
pub fn truncated_gaussian<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return mean;
    }
    loop {
        let z: f64 = rng.sample(StandardNormal);
        if z.abs() <= 1.0 {
            return mean + sd * z;
        }
    }
}

/// Couplings for realization `realization`.
pub fn sample_couplings_for(spec: &DisorderSpec, n_bonds: usize, realization: u64) -> Result<Vec<f64>> {
    if n_bonds == 0 {
        return Err(invalid("need at least one bond"));
    }
    if spec.region.1 > n_bonds + 1 {
        return Err(invalid(format!(
            "disorder region {:?} exceeds a chain of {} sites",
            spec.region,
            n_bonds + 1
        )));
    }
    let mut rng = spec.rng(realization);
    let j0 = spec.mean_coupling;
    let sd = spec.sigma * j0;
    Ok((1..=n_bonds)
        .map(|bond| {
            if spec.contains_bond(bond) {
                truncated_gaussian(&mut rng, j0, sd)
            } else {
                j0
            }
        })
        .collect())
}

/// Couplings for the base realization of `spec`.
pub fn sample_couplings(spec: &DisorderSpec, n_bonds: usize) -> Result<Vec<f64>> {
    sample_couplings_for(spec, n_bonds, 0)
}

/// `base` with its bonds replaced by realization `realization` of `spec`.
pub fn disordered_chain(base: &ChainSpec, spec: &DisorderSpec, realization: u64) -> Result<ChainSpec> {
    base.with_couplings(sample_couplings_for(spec, base.n_sites() - 1, realization)?)
}

/// Ground-state energy of the static Hamiltonian with the well at each centre.
pub fn ground_energy_trace(chain: &ChainSpec, potential: &PotentialSpec, centers: &[f64]) -> Result<Vec<f64>> {
    let exchange = chain.exchange_diagonal();
    let off: Vec<f64> = chain.couplings().iter().map(|j| -j).collect();
    centers
        .iter()
        .map(|&c| {
            let diag: Vec<f64> = field_at_center(potential, chain, c)
                .iter()
                .zip(&exchange)
                .map(|(b, e)| e - b)
                .collect();
            tridiag::kth_eigenvalue(&diag, &off, 0)
        })
        .collect()
}

/// Population standard deviation of a trace.
pub fn sigma_gs(trace: &[f64]) -> Result<f64> {
    if trace.len() < 2 {
        return Err(invalid("sigma_gs needs at least two energies"));
    }
    let n = trace.len() as f64;
    let mean = trace.iter().sum::<f64>() / n;
    Ok((trace.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n).sqrt())
}

/// Evenly spaced well centres at least `margin` from both chain ends.
pub fn safe_centers(chain: &ChainSpec, margin: f64, count: usize) -> Result<Vec<f64>> {
    let (lo, hi) = chain.extent();
    let a = chain.lattice_spacing();
    // centres sit on lattice sites so a clean chain gives a flat trace
    let first = ((lo + margin - a) / a).ceil().max(0.0) as usize;
    let last = ((hi - margin - a) / a).floor();
    if count < 2 || last < first as f64 {
        return Err(invalid(format!(
            "chain extent [{lo}, {hi}] leaves no room for {count} centres with margin {margin}"
        )));
    }
    let last = last as usize;
    let mut sites: Vec<usize> = (0..count)
        .map(|i| first + ((last - first) as f64 * i as f64 / (count - 1) as f64).round() as usize)
        .collect();
    sites.dedup();
    if sites.len() < 2 {
        return Err(invalid(format!("margin {margin} leaves fewer than two lattice sites")));
    }
    Ok(sites.into_iter().map(|i| chain.position(i)).collect())
}

/// One σ_gs measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaGsRow {
    pub kind: PotentialKind,
    pub width: f64,
    pub depth: f64,
    pub sigma: f64,
    pub seed: u64,
    pub sigma_gs: f64,
}

impl SigmaGsRow {
    pub const CSV_HEADER: &'static str = "kind,w,B0,sigma_J,seed,sigma_gs";
}

/// Settings for a σ_gs sweep over widths, disorder strengths and seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaGsSweep {
    pub kind: PotentialKind,
    pub depth: f64,
    pub smoothing: f64,
    pub widths: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Distance travelled by the well along the disordered chain.
    pub scan_length: f64,
    pub n_centers: usize,
}

impl SigmaGsSweep {
    /// Chain long enough to scan every width with a 3w safety margin.
    fn chain_for(&self, width: f64) -> Result<ChainSpec> {
        let n = (self.scan_length + 6.0 * width).ceil() as usize + 2;
        ChainSpec::uniform(n, 1.0)
    }

    pub fn run(&self, exec: Execution) -> Result<Vec<SigmaGsRow>> {
        if self.widths.is_empty() || self.sigmas.is_empty() || self.seeds.is_empty() {
            return Err(invalid("sigma_gs sweep needs widths, sigmas and seeds"));
        }
        let mut grid = Vec::new();
        for &width in &self.widths {
            for &sigma in &self.sigmas {
                for &seed in &self.seeds {
                    grid.push((width, sigma, seed));
                }
            }
        }
        let mut rows = parallel::try_map(&grid, exec, |&(width, sigma, seed)| {
            let potential = PotentialSpec::new(self.kind, self.depth, width, self.smoothing)?;
            let base = self.chain_for(width)?;
            let spec = DisorderSpec::whole_chain(base.n_sites(), 1.0, sigma, seed)?;
            let chain = disordered_chain(&base, &spec, 0)?;
            let centers = safe_centers(&chain, potential.safe_margin(), self.n_centers)?;
            let trace = ground_energy_trace(&chain, &potential, &centers)?;
            Ok(SigmaGsRow {
                kind: self.kind,
                width,
                depth: self.depth,
                sigma,
                seed,
                sigma_gs: sigma_gs(&trace)?,
            })
        })?;
        rows.sort_by(|a, b| {
            a.width
                .total_cmp(&b.width)
                .then(a.sigma.total_cmp(&b.sigma))
                .then(a.seed.cmp(&b.seed))
        });
        Ok(rows)
    }
}

/// Median of a sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Linear-interpolation quantile.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < v.len() {
        v[i] + frac * (v[i + 1] - v[i])
    } else {
        v[i]
    }
}

/// Geometry of a clean-disordered-clean transport run, in lattice units.
///
/// ```text
/// | margin | launch ... clearance | disordered | clearance ... landing | margin |
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentLayout {
    /// Distance between each well centre and the nearer chain end.
    pub margin: f64,
    /// Distance between the launch/landing centre and the disordered region.
    pub clearance: f64,
    /// Number of disordered sites.
    pub disordered_sites: usize,
}

impl SegmentLayout {
    /// 3w end margins and 2w clearance around the disordered region.
    pub fn for_width(width: f64, disordered_sites: usize) -> Self {
        Self {
            margin: 3.0 * width,
            clearance: 2.0 * width,
            disordered_sites,
        }
    }

    pub fn n_sites(&self) -> usize {
        (2.0 * (self.margin + self.clearance)).ceil() as usize + self.disordered_sites + 1
    }

    pub fn launch_center(&self) -> f64 {
        1.0 + self.margin
    }

    /// Inclusive site interval of the disordered region.
    pub fn region(&self) -> (usize, usize) {
        let start = (self.launch_center() + self.clearance).ceil() as usize;
        (start, start + self.disordered_sites - 1)
    }

    /// Distance from the launch centre to the landing centre.
    pub fn travel(&self) -> f64 {
        self.region().1 as f64 + self.clearance - self.launch_center()
    }
}

/// Guide a matched magnon from the clean launch zone through the disordered
/// segment of `config.chain` described by `spec`.
pub fn disordered_segment_transport(
    config: &TransportConfig,
    spec: &DisorderSpec,
    realization: u64,
) -> Result<TransportMetrics> {
    let traj = &config.trajectory;
    let (lo, hi) = spec.region;
    let (start, end) = (traj.start_center, traj.end_center());
    let reach = config.potential.width;
    let (first, last) = (start.min(end), start.max(end));
    if first + reach > lo as f64 || last - reach < hi as f64 {
        return Err(invalid(format!(
            "launch ({start}) and landing ({end}) must lie outside the disordered region {:?}",
            spec.region
        )));
    }
    let mut disordered = config.clone();
    disordered.chain = disordered_chain(&config.chain, spec, realization)?;
    run_transport(&disordered)
}

/// Settings for an adiabaticity threshold search.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSearch {
    pub potential: PotentialSpec,
    pub sigma: f64,
    pub seed: u64,
    pub layout: SegmentLayout,
    pub target_fidelity: f64,
    pub realizations: usize,
    /// Guide speeds bracketing the threshold.
    pub min_speed: f64,
    pub max_speed: f64,
    pub bisections: usize,
    pub dt: f64,
}

impl ThresholdSearch {
    pub fn new(potential: PotentialSpec, sigma: f64, seed: u64, disordered_sites: usize) -> Self {
        Self {
            potential,
            sigma,
            seed,
            layout: SegmentLayout::for_width(potential.width, disordered_sites),
            target_fidelity: 0.99,
            realizations: 20,
            min_speed: 0.01,
            max_speed: 1.0,
            bisections: 6,
            dt: 0.05,
        }
    }

    fn base_chain(&self) -> Result<ChainSpec> {
        ChainSpec::uniform(self.layout.n_sites(), 1.0)
    }

    /// Final fidelities of every realization at guide speed `speed`.
    pub fn fidelities_at(&self, speed: f64, exec: Execution) -> Result<Vec<f64>> {
        let chain = self.base_chain()?;
        let layout = &self.layout;
        let spec = DisorderSpec::new(1.0, self.sigma, self.seed, layout.region())?;
        let trajectory = Trajectory::new(layout.launch_center(), speed, layout.travel() / speed)?;
        let config = TransportConfig::matched(chain, self.potential, trajectory)
            .with_dt(self.dt)
            .with_stride(DEFAULT_SAMPLE_STRIDE * 1000);
        let ids: Vec<u64> = (0..self.realizations as u64).collect();
        parallel::try_map(&ids, exec, |&r| {
            Ok(disordered_segment_transport(&config, &spec, r)?.final_fidelity())
        })
    }

    /// Clean-chain reduced adiabaticity at the launch position.
    pub fn reduced_adiabaticity(&self) -> Result<f64> {
        let chain = self.base_chain()?;
        spectral::reduced_adiabaticity_at(&chain, &self.potential, self.layout.launch_center())
    }

    pub fn run(&self, exec: Execution) -> Result<ThresholdReport> {
        if self.realizations == 0 {
            return Err(invalid("threshold search needs at least one realization"));
        }
        if !(self.min_speed > 0.0 && self.min_speed < self.max_speed) {
            return Err(invalid("need 0 < min_speed < max_speed"));
        }
        if self.max_speed > 2.0 {
            return Err(Error::SpeedLimitExceeded {
                speed: self.max_speed,
                limit: 2.0,
            });
        }
        let r = self.reduced_adiabaticity()?;
        let passes = |speed: f64| -> Result<(bool, Vec<f64>)> {
            let f = self.fidelities_at(speed, exec)?;
            Ok((median(&f) >= self.target_fidelity, f))
        };

        let (ok, low_f) = passes(self.min_speed)?;
        if !ok {
            return Err(Error::NoThreshold(format!(
                "median fidelity {:.4} < {} already at speed {}",
                median(&low_f),
                self.target_fidelity,
                self.min_speed
            )));
        }
        let (mut lo, mut hi) = (self.min_speed, self.max_speed);
        let mut lo_f = low_f;
        let (top_ok, top_f) = passes(hi)?;
        let saturated = top_ok;
        if top_ok {
            lo = hi;
            lo_f = top_f;
        } else {
            for _ in 0..self.bisections {
                let mid = (lo * hi).sqrt();
                let (ok, f) = passes(mid)?;
                if ok {
                    lo = mid;
                    lo_f = f;
                } else {
                    hi = mid;
                }
            }
        }
        Ok(ThresholdReport {
            kind: self.potential.kind,
            width: self.potential.width,
            depth: self.potential.depth,
            sigma: self.sigma,
            a_threshold: r * lo,
            bracket_lo: r * lo,
            bracket_hi: r * hi,
            n_realizations: self.realizations,
            speed: lo,
            reduced_adiabaticity: r,
            median_fidelity: median(&lo_f),
            fidelity_iqr: quantile(&lo_f, 0.75) - quantile(&lo_f, 0.25),
            saturated,
        })
    }
}

/// Outcome of a threshold search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub kind: PotentialKind,
    pub width: f64,
    pub depth: f64,
    pub sigma: f64,
    /// A at the fastest speed that still met the fidelity target.
    pub a_threshold: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub n_realizations: usize,
    pub speed: f64,
    pub reduced_adiabaticity: f64,
    pub median_fidelity: f64,
    pub fidelity_iqr: f64,
    /// The target was met even at the largest speed tried.
    pub saturated: bool,
}

impl ThresholdReport {
    pub const CSV_HEADER: &'static str =
        "kind,w,B0,sigma_J,A_threshold,bracket_lo,bracket_hi,n_realizations";
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_gives_mean() {
        let spec = DisorderSpec::whole_chain(50, 1.0, 0.0, 9).unwrap();
        assert!(sample_couplings(&spec, 49).unwrap().iter().all(|j| *j == 1.0));
    }

    #[test]
    fn samples_stay_in_window() {
        let spec = DisorderSpec::whole_chain(5001, 1.0, 0.1, 3).unwrap();
        let js = sample_couplings(&spec, 5000).unwrap();
        assert!(js.iter().all(|j| (0.9..=1.1).contains(j)));
    }

    #[test]
    fn truncated_gaussian_moments() {
        // Oracle: N(0,1) truncated to [−1, 1] has variance
        // 1 − 2φ(1)/(Φ(1) − Φ(−1)) and zero skew.
        let phi1 = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mass = statrs::function::erf::erf(1.0 / std::f64::consts::SQRT_2);
        let var = 0.01 * (1.0 - 2.0 * phi1 / mass);
        let spec = DisorderSpec::whole_chain(100_001, 1.0, 0.1, 42).unwrap();
        let js = sample_couplings(&spec, 100_000).unwrap();
        let n = js.len() as f64;
        let mean = js.iter().sum::<f64>() / n;
        let m2 = js.iter().map(|j| (j - mean).powi(2)).sum::<f64>() / n;
        let m3 = js.iter().map(|j| (j - mean).powi(3)).sum::<f64>() / n;
        let se = (var / n).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}");
        assert!((m2 / var - 1.0).abs() < 0.02, "var {m2} vs {var}");
        assert!((m3 / m2.powf(1.5)).abs() < 0.05);
    }

    #[test]
    fn region_limits_disorder() {
        let spec = DisorderSpec::new(1.0, 0.2, 1, (10, 20)).unwrap();
        let js = sample_couplings(&spec, 40).unwrap();
        for (i, j) in js.iter().enumerate() {
            let bond = i + 1;
            if (10..20).contains(&bond) {
                assert_ne!(*j, 1.0);
            } else {
                assert_eq!(*j, 1.0);
            }
        }
        assert!(sample_couplings(&spec, 15).is_err());
    }

    #[test]
    fn seeds_are_reproducible_and_streams_differ() {
        let spec = DisorderSpec::whole_chain(101, 1.0, 0.1, 77).unwrap();
        assert_eq!(sample_couplings(&spec, 100).unwrap(), sample_couplings(&spec, 100).unwrap());
        assert_ne!(
            sample_couplings_for(&spec, 100, 0).unwrap(),
            sample_couplings_for(&spec, 100, 1).unwrap()
        );
    }

    #[test]
    fn invalid_specs() {
        assert!(DisorderSpec::new(1.0, 1.0, 0, (1, 5)).is_err());
        assert!(DisorderSpec::new(1.0, -0.1, 0, (1, 5)).is_err());
        assert!(DisorderSpec::new(1.0, 0.1, 0, (6, 5)).is_err());
        assert!(DisorderSpec::new(0.0, 0.1, 0, (1, 5)).is_err());
    }

    #[test]
    fn sigma_gs_basics() {
        assert_eq!(sigma_gs(&[1.5, 1.5, 1.5]).unwrap(), 0.0);
        assert!((sigma_gs(&[1.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(sigma_gs(&[1.0]).is_err());
    }

    #[test]
    fn clean_trace_is_flat() {
        let chain = ChainSpec::uniform(200, 1.0).unwrap();
        let pot = PotentialSpec::square_well(1.0, 6.0).unwrap();
        let centers = safe_centers(&chain, 40.0, 25).unwrap();
        let trace = ground_energy_trace(&chain, &pot, &centers).unwrap();
        let spread = trace.iter().fold(0.0_f64, |m, e| m.max((e - trace[0]).abs()));
        assert!(spread < 1e-9, "spread {spread}");
    }

    #[test]
    fn quantiles() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.25), 2.0);
    }

    #[test]
    fn layout_geometry() {
        let layout = SegmentLayout::for_width(10.0, 50);
        let (lo, hi) = layout.region();
        assert_eq!(hi - lo + 1, 50);
        assert!(lo as f64 >= layout.launch_center() + layout.clearance);
        let landing = layout.launch_center() + layout.travel();
        assert!(landing >= hi as f64 + layout.clearance - 1e-9);
        assert!(landing + layout.margin <= layout.n_sites() as f64 + 1e-9);
    }
}
