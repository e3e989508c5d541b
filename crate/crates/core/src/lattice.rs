//! Chain geometry, the single-excitation Hamiltonian and the magnon
//! dispersion relations.
//!
//! In the one-excitation subspace the Heisenberg chain in a z field reduces
//! to a tight-binding model: hopping −J_n between neighbours and on-site
//! energy −B_n. The free band is −2J cos(ka), which is the textbook
//! 2J(1 − cos ka) dispersion shifted down by the constant 2J.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tridiag;

/// Geometry and bond couplings of an open chain.
///
/// Sites are numbered 1..=N and sit at x = a·n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    n_sites: usize,
    lattice_spacing: f64,
    base_coupling: f64,
    couplings: Vec<f64>,
    include_zz_diagonal: bool,
}

impl ChainSpec {
    pub fn new(
        lattice_spacing: f64,
        base_coupling: f64,
        couplings: Vec<f64>,
        include_zz_diagonal: bool,
    ) -> Result<Self> {
        let n_sites = couplings.len() + 1;
        if n_sites < 3 {
            return Err(invalid(format!("chain needs at least 3 sites, got {n_sites}")));
        }
        if !(lattice_spacing > 0.0 && lattice_spacing.is_finite()) {
            return Err(invalid(format!("lattice spacing must be positive, got {lattice_spacing}")));
        }
        if !(base_coupling > 0.0 && base_coupling.is_finite()) {
            return Err(invalid(format!("base coupling must be positive, got {base_coupling}")));
        }
        if let Some((i, j)) = couplings
            .iter()
            .enumerate()
            .find(|(_, j)| !(**j > 0.0 && j.is_finite()))
        {
            return Err(invalid(format!("coupling {} must be positive, got {j}", i + 1)));
        }
        Ok(Self {
            n_sites,
            lattice_spacing,
            base_coupling,
            couplings,
            include_zz_diagonal,
        })
    }

    /// Uniform chain of `n_sites` with every bond equal to `coupling` and a = 1.
    pub fn uniform(n_sites: usize, coupling: f64) -> Result<Self> {
        if n_sites < 3 {
            return Err(invalid(format!("chain needs at least 3 sites, got {n_sites}")));
        }
        Self::new(1.0, coupling, vec![coupling; n_sites - 1], false)
    }

    /// Same geometry with a new set of bond couplings.
    pub fn with_couplings(&self, couplings: Vec<f64>) -> Result<Self> {
        if couplings.len() != self.couplings.len() {
            return Err(invalid(format!(
                "expected {} couplings, got {}",
                self.couplings.len(),
                couplings.len()
            )));
        }
        Self::new(
            self.lattice_spacing,
            self.base_coupling,
            couplings,
            self.include_zz_diagonal,
        )
    }

    pub fn with_lattice_spacing(mut self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid(format!("lattice spacing must be positive, got {a}")));
        }
        self.lattice_spacing = a;
        Ok(self)
    }

    pub fn with_zz_diagonal(mut self, include: bool) -> Self {
        self.include_zz_diagonal = include;
        self
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn lattice_spacing(&self) -> f64 {
        self.lattice_spacing
    }

    pub fn base_coupling(&self) -> f64 {
        self.base_coupling
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn include_zz_diagonal(&self) -> bool {
        self.include_zz_diagonal
    }

    /// Position of the site with 0-based storage index `index`.
    #[inline]
    pub fn position(&self, index: usize) -> f64 {
        self.lattice_spacing * (index as f64 + 1.0)
    }

    /// Positions of all sites, a·1 ..= a·N.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_sites).map(|i| self.position(i)).collect()
    }

    /// Physical extent [a, a·N] of the chain.
    pub fn extent(&self) -> (f64, f64) {
        (self.position(0), self.position(self.n_sites - 1))
    }

    /// Band-limited maximum magnon speed 2J₀a/ħ.
    pub fn speed_limit(&self) -> f64 {
        2.0 * self.base_coupling * self.lattice_spacing
    }

    /// Field-independent part of the diagonal: the σᶻσᶻ offset when enabled,
    /// zero otherwise.
    pub fn exchange_diagonal(&self) -> Vec<f64> {
        let n = self.n_sites;
        if !self.include_zz_diagonal {
            return vec![0.0; n];
        }
        let j0 = self.base_coupling;
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.couplings[i - 1] } else { j0 };
                let right = if i + 1 < n { self.couplings[i] } else { j0 };
                left + right - 2.0 * j0
            })
            .collect()
    }

    /// Bottom of the zero-field band of this coupling realization.
    pub fn free_band_min(&self) -> f64 {
        let diag = self.exchange_diagonal();
        let off: Vec<f64> = self.couplings.iter().map(|j| -j).collect();
        tridiag::kth_eigenvalue(&diag, &off, 0).expect("chain has at least 3 sites")
    }
}

/// Magnetic field strength B_n on every site at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteField {
    pub values: Vec<f64>,
    pub time: f64,
}

impl SiteField {
    pub fn new(values: Vec<f64>, time: f64) -> Result<Self> {
        if let Some(i) = values.iter().position(|b| !b.is_finite()) {
            return Err(invalid(format!("field value at site {} is not finite", i + 1)));
        }
        Ok(Self { values, time })
    }

    pub fn zero(n_sites: usize) -> Self {
        Self {
            values: vec![0.0; n_sites],
            time: 0.0,
        }
    }
}

/// Real symmetric tridiagonal single-excitation Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
    free_band_min: f64,
}

impl EffectiveHamiltonian {
    /// Wrap raw tridiagonal data. The reference band minimum is taken from
    /// the same hopping with a zero diagonal.
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() || off_diagonal.len() + 1 != diagonal.len() {
            return Err(invalid(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
                diagonal.len(),
                off_diagonal.len()
            )));
        }
        if diagonal.iter().chain(&off_diagonal).any(|x| !x.is_finite()) {
            return Err(invalid("Hamiltonian entries must be finite"));
        }
        let zeros = vec![0.0; diagonal.len()];
        let free_band_min = tridiag::kth_eigenvalue(&zeros, &off_diagonal, 0)?;
        Ok(Self {
            diagonal,
            off_diagonal,
            free_band_min,
        })
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// Lowest eigenvalue of the same chain with B ≡ 0; modes below it are bound.
    pub fn free_band_min(&self) -> f64 {
        self.free_band_min
    }

    pub fn norm_inf(&self) -> f64 {
        tridiag::norm_inf(&self.diagonal, &self.off_diagonal)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        apply_tridiagonal(&self.diagonal, &self.off_diagonal, v)
    }

    /// ⟨ψ|H|ψ⟩ for a complex amplitude vector.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        expectation(&self.diagonal, &self.off_diagonal, psi)
    }

    /// Dense row-major copy, for cross-checks.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diagonal[i];
            if i + 1 < n {
                m[i][i + 1] = self.off_diagonal[i];
                m[i + 1][i] = self.off_diagonal[i];
            }
        }
        m
    }
}

pub(crate) fn apply_tridiagonal(diag: &[f64], off: &[f64], v: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * v[i];
            if i > 0 {
                s += off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += off[i] * v[i + 1];
            }
            s
        })
        .collect()
}

pub(crate) fn expectation(diag: &[f64], off: &[f64], psi: &[Complex64]) -> f64 {
    let onsite: f64 = diag.iter().zip(psi).map(|(d, c)| d * c.norm_sqr()).sum();
    let hopping: f64 = off
        .iter()
        .zip(psi.windows(2))
        .map(|(j, w)| 2.0 * j * (w[0].conj() * w[1]).re)
        .sum();
    onsite + hopping
}

/// Assemble the single-excitation Hamiltonian for `chain` in `field`.
pub fn build_hamiltonian(chain: &ChainSpec, field: &SiteField) -> Result<EffectiveHamiltonian> {
    if field.values.len() != chain.n_sites() {
        return Err(Error::InvalidInput(format!(
            "field has {} values for a chain of {} sites",
            field.values.len(),
            chain.n_sites()
        )));
    }
    let mut diagonal = chain.exchange_diagonal();
    diagonal
        .iter_mut()
        .zip(&field.values)
        .for_each(|(d, b)| *d -= b);
    let off_diagonal: Vec<f64> = chain.couplings().iter().map(|j| -j).collect();
    let free_band_min = chain.free_band_min();
    Ok(EffectiveHamiltonian {
        diagonal,
        off_diagonal,
        free_band_min,
    })
}

/// Magnon angular frequency (2J/ħ)(1 − cos ka).
pub fn dispersion_omega(coupling: f64, spacing: f64, k: f64) -> f64 {
    2.0 * coupling * (1.0 - (k * spacing).cos())
}

/// Group velocity (2Ja/ħ) sin(ka).
pub fn group_velocity(coupling: f64, spacing: f64, k: f64) -> f64 {
    2.0 * coupling * spacing * (k * spacing).sin()
}

/// Wavenumber on the branch [0, π/2a] whose group velocity is `speed`.
pub fn wavenumber_for_speed(coupling: f64, spacing: f64, speed: f64) -> Result<f64> {
    let limit = 2.0 * coupling * spacing;
    if !(speed >= 0.0) {
        return Err(invalid(format!("magnon speed must be non-negative, got {speed}")));
    }
    if speed > limit {
        return Err(Error::SpeedLimitExceeded { speed, limit });
    }
    Ok((speed / limit).asin() / spacing)
}
