//! Moving confining potentials: Pöschl-Teller (sech²) and the erf-smoothed
//! square well, their analytic time derivatives, and sampling onto sites.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};

use crate::error::{invalid, Error, Result};
use crate::lattice::{ChainSpec, SiteField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PotentialKind {
    /// B₀ sech²((x − x₀)/w), a graded-index guide.
    PoschlTeller,
    /// Smoothed rectangular well of half-width w, a step-index guide.
    SquareWell,
}

impl PotentialKind {
    /// Short label used in tables ("PT" / "SW").
    pub fn label(self) -> &'static str {
        match self {
            PotentialKind::PoschlTeller => "PT",
            PotentialKind::SquareWell => "SW",
        }
    }
}

impl std::str::FromStr for PotentialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pt" | "poschl-teller" | "poschlteller" => Ok(PotentialKind::PoschlTeller),
            "sw" | "square-well" | "squarewell" => Ok(PotentialKind::SquareWell),
            other => Err(invalid(format!("unknown potential kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Shape, depth and width of the guiding well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub depth: f64,
    pub width: f64,
    /// Edge softness of the square well; unused for Pöschl-Teller.
    pub smoothing: f64,
}

impl PotentialSpec {
    /// A zero depth is accepted and means "no field".
    pub fn new(kind: PotentialKind, depth: f64, width: f64, smoothing: f64) -> Result<Self> {
        if !(depth >= 0.0 && depth.is_finite()) {
            return Err(invalid(format!("depth must be non-negative, got {depth}")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(invalid(format!("width must be positive, got {width}")));
        }
        if !(smoothing > 0.0 && smoothing.is_finite()) {
            return Err(invalid(format!("smoothing must be positive, got {smoothing}")));
        }
        Ok(Self {
            kind,
            depth,
            width,
            smoothing,
        })
    }

    pub fn poschl_teller(depth: f64, width: f64) -> Result<Self> {
        Self::new(PotentialKind::PoschlTeller, depth, width, 1.0)
    }

    /// Square well with the default smoothing of one lattice spacing.
    pub fn square_well(depth: f64, width: f64) -> Result<Self> {
        Self::new(PotentialKind::SquareWell, depth, width, 1.0)
    }

    pub fn with_width(self, width: f64) -> Result<Self> {
        Self::new(self.kind, self.depth, width, self.smoothing)
    }

    pub fn with_depth(self, depth: f64) -> Result<Self> {
        Self::new(self.kind, depth, self.width, self.smoothing)
    }

    /// B(x) for a well centred on `center`.
    #[inline]
    pub fn profile(&self, x: f64, center: f64) -> f64 {
        match self.kind {
            PotentialKind::PoschlTeller => pt_value(x, center, self.depth, self.width),
            PotentialKind::SquareWell => {
                sw_value(x, center, self.depth, self.width, self.smoothing)
            }
        }
    }

    /// ∂B/∂x for a well centred on `center`.
    #[inline]
    pub fn slope(&self, x: f64, center: f64) -> f64 {
        match self.kind {
            PotentialKind::PoschlTeller => {
                let u = (x - center) / self.width;
                let sech = 1.0 / u.cosh();
                -2.0 * self.depth / self.width * sech * sech * u.tanh()
            }
            PotentialKind::SquareWell => {
                let s = self.smoothing;
                let left = ((x - center + self.width) / s).powi(2);
                let right = ((x - center - self.width) / s).powi(2);
                self.depth / (s * PI.sqrt()) * ((-left).exp() - (-right).exp())
            }
        }
    }

    /// Distance from the centre beyond which the well is negligible for
    /// boundary-safety purposes.
    pub fn safe_margin(&self) -> f64 {
        3.0 * self.width
    }
}

/// Uniform translation x₀(t) = x₀(0) + S·t on [0, T].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start_center: f64,
    pub speed: f64,
    pub duration: f64,
}

impl Trajectory {
    pub fn new(start_center: f64, speed: f64, duration: f64) -> Result<Self> {
        if !start_center.is_finite() || !speed.is_finite() {
            return Err(invalid("trajectory centre and speed must be finite"));
        }
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(invalid(format!("duration must be non-negative, got {duration}")));
        }
        Ok(Self {
            start_center,
            speed,
            duration,
        })
    }

    /// A well that stays at `center` for `duration`.
    pub fn stationary(center: f64, duration: f64) -> Result<Self> {
        Self::new(center, 0.0, duration)
    }

    #[inline]
    pub fn center(&self, t: f64) -> f64 {
        self.start_center + self.speed * t
    }

    pub fn end_center(&self) -> f64 {
        self.center(self.duration)
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.duration) {
            return Err(Error::OutOfRange {
                t,
                duration: self.duration,
            });
        }
        Ok(())
    }

    /// Warn when the well comes within `margin` of either end of the chain.
    pub fn warn_if_near_edges(&self, chain: &ChainSpec, margin: f64) -> bool {
        let (lo, hi) = chain.extent();
        let (a, b) = (self.start_center, self.end_center());
        let near = a.min(b) - lo < margin || hi - a.max(b) < margin;
        if near {
            log::warn!(
                "potential centre path [{a:.3}, {b:.3}] comes within {margin:.3} of the chain ends [{lo:.3}, {hi:.3}]"
            );
        }
        near
    }
}

pub fn pt_value(x: f64, x0: f64, depth: f64, width: f64) -> f64 {
    let sech = 1.0 / ((x - x0) / width).cosh();
    depth * sech * sech
}

pub fn sw_value(x: f64, x0: f64, depth: f64, width: f64, smoothing: f64) -> f64 {
    // erf(p) − erf(q) with q < p, via erfc on the tails to keep them positive
    let d = (x - x0).abs();
    let (p, q) = ((d + width) / smoothing, (d - width) / smoothing);
    let diff = if q > 0.0 { erfc(q) - erfc(p) } else { erf(p) - erf(q) };
    0.5 * depth * diff
}

/// B(x, t) for a well moving along `traj`.
pub fn value(spec: &PotentialSpec, traj: &Trajectory, x: f64, t: f64) -> Result<f64> {
    traj.check(t)?;
    Ok(spec.profile(x, traj.center(t)))
}

/// ∂B/∂t = −S ∂B/∂x, the only time dependence of the Hamiltonian.
pub fn time_derivative(spec: &PotentialSpec, traj: &Trajectory, x: f64, t: f64) -> Result<f64> {
    traj.check(t)?;
    Ok(-traj.speed * spec.slope(x, traj.center(t)))
}

/// The potential sampled at every site x = a·n.
pub fn sample_field(
    spec: &PotentialSpec,
    traj: &Trajectory,
    chain: &ChainSpec,
    t: f64,
) -> Result<SiteField> {
    traj.check(t)?;
    Ok(SiteField {
        values: field_at_center(spec, chain, traj.center(t)),
        time: t,
    })
}

/// ∂B_n/∂t on every site.
pub fn sample_time_derivative(
    spec: &PotentialSpec,
    traj: &Trajectory,
    chain: &ChainSpec,
    t: f64,
) -> Result<Vec<f64>> {
    traj.check(t)?;
    let center = traj.center(t);
    Ok((0..chain.n_sites())
        .map(|i| -traj.speed * spec.slope(chain.position(i), center))
        .collect())
}

/// Site values for a well centred on `center`, without any time bookkeeping.
pub fn field_at_center(spec: &PotentialSpec, chain: &ChainSpec, center: f64) -> Vec<f64> {
    (0..chain.n_sites())
        .map(|i| spec.profile(chain.position(i), center))
        .collect()
}
