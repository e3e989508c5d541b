//! Guided magnon transport in one-dimensional ferromagnetic spin chains.
//!
//! A single spin excitation on a Heisenberg chain is confined by a moving
//! magnetic well (Pöschl-Teller or smoothed square well) and dragged along
//! the chain. The crate provides the single-excitation Hamiltonian, exact
//! tridiagonal spectra, a unitary Crank-Nicolson propagator, transport
//! diagnostics, bond-disorder studies and hydrogenic material estimates.
//!
//! Natural units are used throughout the core: ħ = 1, lattice spacing
//! a = 1 and mean exchange J₀ = 1 unless a chain says otherwise. Unit
//! conversion lives in [`materials`].

pub mod disorder;
pub mod dynamics;
mod error;
pub mod lattice;
pub mod materials;
pub mod parallel;
pub mod potentials;
pub mod spectral;
pub mod tridiag;

pub use error::{Error, Result};
pub use lattice::{ChainSpec, EffectiveHamiltonian, SiteField};
pub use potentials::{PotentialKind, PotentialSpec, Trajectory};
pub use spectral::SpectrumResult;
pub use dynamics::{MagnonState, Regime, TransportConfig, TransportMetrics};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
