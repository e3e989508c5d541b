//! Physical units: hydrogenic exchange J(r), band-limited magnon speeds for
//! realistic spin chains, and ground-gap maps for donor chains.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::lattice::ChainSpec;
use crate::parallel::{self, Execution};
use crate::potentials::{PotentialKind, PotentialSpec};
use crate::spectral::static_hamiltonian;
use crate::tridiag;

/// Reduced Planck constant in eV·s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
/// Phosphorus donor Bohr radius in silicon, nm.
pub const P_SI_BOHR_RADIUS_NM: f64 = 3.0;
/// Phosphorus donor binding energy in silicon, meV.
pub const P_SI_RYDBERG_MEV: f64 = 45.59;
/// Silicon lattice constant, Å.
pub const SI_LATTICE_CONSTANT_ANGSTROM: f64 = 5.4;
/// Default well depth of the donor-chain gap maps, in Rydberg.
pub const DEFAULT_MAP_DEPTH_RY: f64 = 4.8e-3;
/// Chain length used for the donor-chain gap maps.
pub const MAP_CHAIN_SITES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CouplingKind {
    Exchange,
    Dipole,
}

impl std::fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CouplingKind::Exchange => "exchange",
            CouplingKind::Dipole => "dipole",
        })
    }
}

/// A candidate spin-chain material with its literature values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaterialParams {
    pub name: String,
    /// Nearest-neighbour coupling, meV.
    pub coupling_mev: f64,
    /// Spin separation, Å.
    pub spacing_angstrom: f64,
    pub coupling_kind: CouplingKind,
    /// Tabulated maximum speed, m/s.
    pub listed_speed_m_per_s: f64,
    /// Tabulated maximum speed, sites/s.
    pub listed_speed_sites_per_s: f64,
}

impl MaterialParams {
    pub fn new(
        name: &str,
        coupling_mev: f64,
        spacing_angstrom: f64,
        coupling_kind: CouplingKind,
        listed_speed_m_per_s: f64,
        listed_speed_sites_per_s: f64,
    ) -> Result<Self> {
        if !(coupling_mev > 0.0) || !(spacing_angstrom > 0.0) {
            return Err(invalid(format!("{name}: coupling and spacing must be positive")));
        }
        Ok(Self {
            name: name.to_string(),
            coupling_mev,
            spacing_angstrom,
            coupling_kind,
            listed_speed_m_per_s,
            listed_speed_sites_per_s,
        })
    }
}

/// The four reference systems: Co:Pt, P:Si, P:Ge and ²⁹Si:²⁸Si.
pub fn reference_materials() -> Vec<MaterialParams> {
    use CouplingKind::*;
    [
        ("Co:Pt", 20.0, 20.0, Exchange, 0.6, 3.0e8),
        ("P:Si", 0.41, 93.0, Exchange, 0.61, 6.56e7),
        ("P:Ge", 0.42, 103.0, Exchange, 0.65, 6.31e7),
        ("29Si:28Si", 1.0e-8, 1.9, Dipole, 3.0e-6, 1.57e4),
    ]
    .into_iter()
    .map(|(name, j, a, kind, ms, ss)| {
        MaterialParams::new(name, j, a, kind, ms, ss).expect("reference values are positive")
    })
    .collect()
}

/// Effective-mass hydrogenic donor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HydrogenicSystem {
    pub bohr_radius_nm: f64,
    pub rydberg_mev: f64,
}

impl HydrogenicSystem {
    pub fn new(bohr_radius_nm: f64, rydberg_mev: f64) -> Result<Self> {
        if !(bohr_radius_nm > 0.0) || !(rydberg_mev > 0.0) {
            return Err(invalid("Bohr radius and Rydberg must be positive"));
        }
        Ok(Self {
            bohr_radius_nm,
            rydberg_mev,
        })
    }

    pub fn phosphorus_in_silicon() -> Self {
        Self {
            bohr_radius_nm: P_SI_BOHR_RADIUS_NM,
            rydberg_mev: P_SI_RYDBERG_MEV,
        }
    }
}

/// J(r)/Ry = 0.8 (r/a_B)^{5/2} e^{−2r/a_B}, using e²/a_B = 2 Ry.
pub fn hydrogenic_j_rydberg(r_over_bohr: f64) -> f64 {
    if r_over_bohr <= 0.0 {
        return 0.0;
    }
    0.8 * r_over_bohr.powf(2.5) * (-2.0 * r_over_bohr).exp()
}

/// Herring-Flicker exchange in meV for a separation `r_nm`.
pub fn hydrogenic_j(r_nm: f64, sys: &HydrogenicSystem) -> Result<f64> {
    if !(r_nm > 0.0) {
        return Err(invalid(format!("separation must be positive, got {r_nm}")));
    }
    Ok(sys.rydberg_mev * hydrogenic_j_rydberg(r_nm / sys.bohr_radius_nm))
}

/// Band-limited speed 2J/ħ in both sites/s and m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxSpeed {
    pub sites_per_s: f64,
    pub m_per_s: f64,
}

pub fn max_speed(coupling_mev: f64, spacing_angstrom: f64) -> Result<MaxSpeed> {
    if !(coupling_mev > 0.0) || !(spacing_angstrom > 0.0) {
        return Err(invalid("coupling and spacing must be positive"));
    }
    let sites_per_s = 2.0 * coupling_mev * 1e-3 / HBAR_EV_S;
    Ok(MaxSpeed {
        sites_per_s,
        m_per_s: sites_per_s * spacing_angstrom * 1e-10,
    })
}

/// Relative tolerance for the tabulated (m/s) = (sites/s) × a check.
pub const TABLE_PRODUCT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedTableRow {
    pub name: String,
    pub coupling_kind: CouplingKind,
    pub coupling_mev: f64,
    pub spacing_angstrom: f64,
    pub listed_m_per_s: f64,
    pub listed_sites_per_s: f64,
    /// Listed sites/s times the spacing, m/s.
    pub listed_product_m_per_s: f64,
    /// Whether listed m/s and listed sites/s × a agree within 5%.
    pub listed_consistent: bool,
    pub computed: MaxSpeed,
}

impl SpeedTableRow {
    pub const CSV_HEADER: &'static str = "system,coupling_kind,J_meV,a_angstrom,listed_speed_m_per_s,listed_speed_sites_per_s,listed_product_m_per_s,listed_consistent,computed_speed_sites_per_s,computed_speed_m_per_s";
}

/// Literature values side by side with 2J/ħ speeds.
pub fn speed_table(materials: &[MaterialParams]) -> Result<Vec<SpeedTableRow>> {
    materials
        .iter()
        .map(|m| {
            let product = m.listed_speed_sites_per_s * m.spacing_angstrom * 1e-10;
            let consistent = ((product - m.listed_speed_m_per_s) / m.listed_speed_m_per_s).abs()
                <= TABLE_PRODUCT_TOLERANCE;
            Ok(SpeedTableRow {
                name: m.name.clone(),
                coupling_kind: m.coupling_kind,
                coupling_mev: m.coupling_mev,
                spacing_angstrom: m.spacing_angstrom,
                listed_m_per_s: m.listed_speed_m_per_s,
                listed_sites_per_s: m.listed_speed_sites_per_s,
                listed_product_m_per_s: product,
                listed_consistent: consistent,
                computed: max_speed(m.coupling_mev, m.spacing_angstrom)?,
            })
        })
        .collect()
}

/// One point of a donor-chain gap map; lengths in a_B, energies in Ry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapPoint {
    pub kind: PotentialKind,
    pub separation: f64,
    pub width: f64,
    pub coupling: f64,
    pub depth: f64,
    pub gap: f64,
}

impl GapPoint {
    pub const CSV_HEADER: &'static str = "kind,r_aB,w_aB,J_Ry,B0_Ry,gap_Ry,gap_meV";

    pub fn gap_mev(&self, sys: &HydrogenicSystem) -> f64 {
        self.gap * sys.rydberg_mev
    }
}

/// Ground-to-first-excited gap of a uniform donor chain with spacing r and
/// J = J(r), under a well of width w and depth `depth_ry`.
///
/// The square-well edge softness is one donor spacing.
pub fn gap_at(kind: PotentialKind, separation: f64, width: f64, depth_ry: f64) -> Result<GapPoint> {
    let coupling = hydrogenic_j_rydberg(separation);
    let chain = ChainSpec::new(separation, coupling, vec![coupling; MAP_CHAIN_SITES - 1], false)?;
    let potential = PotentialSpec::new(kind, depth_ry, width, separation)?;
    let (lo, hi) = chain.extent();
    let h = static_hamiltonian(&chain, &potential, 0.5 * (lo + hi))?;
    let e = tridiag::lowest_eigenvalues(h.diagonal(), h.off_diagonal(), 2)?;
    Ok(GapPoint {
        kind,
        separation,
        width,
        coupling,
        depth: depth_ry,
        gap: (e[1] - e[0]).max(0.0),
    })
}

/// Gap map over separations × widths (both in a_B); rows ordered by (r, w).
pub fn gap_phase_diagram(
    kind: PotentialKind,
    separations: &[f64],
    widths: &[f64],
    depth_ry: f64,
    exec: Execution,
) -> Result<Vec<GapPoint>> {
    if separations.is_empty() || widths.is_empty() {
        return Err(invalid("gap map needs at least one separation and one width"));
    }
    if separations.iter().chain(widths).any(|x| !(*x > 0.0)) {
        return Err(invalid("separations and widths must be positive"));
    }
    let mut grid = Vec::new();
    for &r in separations {
        for &w in widths {
            grid.push((r, w));
        }
    }
    parallel::try_map(&grid, exec, |&(r, w)| gap_at(kind, r, w, depth_ry))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hydrogenic_limits_and_reference_point() {
        assert!(hydrogenic_j_rydberg(1e-6) < 1e-14);
        assert!(hydrogenic_j_rydberg(60.0) < 1e-40);
        // 0.8 · 2^{5/2} · e^{−4}
        let expected = 0.8 * 32f64.sqrt() * (-4.0f64).exp();
        assert!((hydrogenic_j_rydberg(2.0) - expected).abs() < 1e-16);
        assert!((expected - 0.0829).abs() / 0.0829 < 1e-3);
    }

    #[test]
    fn hydrogenic_peak_at_five_quarters() {
        let (mut best, mut best_r) = (0.0, 0.0);
        for i in 1..4000 {
            let r = i as f64 * 1e-3;
            let j = hydrogenic_j_rydberg(r);
            if j > best {
                best = j;
                best_r = r;
            }
        }
        assert!((best_r - 1.25).abs() <= 1e-3);
    }

    #[test]
    fn hydrogenic_units() {
        let sys = HydrogenicSystem::phosphorus_in_silicon();
        let j = hydrogenic_j(6.0, &sys).unwrap();
        assert!((j - sys.rydberg_mev * hydrogenic_j_rydberg(2.0)).abs() < 1e-12);
        assert!(hydrogenic_j(0.0, &sys).is_err());
        assert!(HydrogenicSystem::new(0.0, 1.0).is_err());
    }

    #[test]
    fn speed_is_linear_in_coupling() {
        let a = max_speed(1.0, 10.0).unwrap();
        let b = max_speed(2.0, 10.0).unwrap();
        assert!((b.sites_per_s - 2.0 * a.sites_per_s).abs() <= 1e-9 * b.sites_per_s);
        assert!((b.m_per_s - 2.0 * a.m_per_s).abs() <= 1e-9 * b.m_per_s);
        assert!((a.m_per_s - a.sites_per_s * 1e-9).abs() <= 1e-9 * a.m_per_s);
    }

    #[test]
    fn table_rows() {
        let rows = speed_table(&reference_materials()).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.listed_consistent));
        assert_eq!(rows[3].coupling_kind, CouplingKind::Dipole);
        assert!(rows[..3].iter().all(|r| r.coupling_kind == CouplingKind::Exchange));
        assert_eq!(rows[1].listed_sites_per_s, 6.56e7);
        assert_eq!(rows[1].listed_m_per_s, 0.61);
        assert!(speed_table(&[]).unwrap().is_empty());
    }

    #[test]
    fn gap_map_is_non_negative() {
        let pts = gap_phase_diagram(
            PotentialKind::SquareWell,
            &[1.5, 2.0, 3.0],
            &[2.0, 10.0],
            DEFAULT_MAP_DEPTH_RY,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(pts.len(), 6);
        assert!(pts.iter().all(|p| p.gap >= 0.0));
    }
}
