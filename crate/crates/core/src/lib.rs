//! Elastic scattering of two Bessel vortex electrons.
//!
//! For every final state the twisted-beam amplitude receives contributions
//! from exactly two plane-wave configurations of the initial transverse
//! momenta. Their coherent sum produces ring-shaped interference fringes in
//! the distribution of the total final transverse momentum `K`, and a
//! momentum-transfer dependent phase (the Coulomb phase) shows up as an
//! up-down asymmetry of that distribution.
//!
//! Modules, bottom-up:
//!
//! * [`kinematics`]: transverse geometry, the two configurations, on-shell
//!   four-momenta and Mandelstam invariants.
//! * [`amplitudes`]: tree-level Møller helicity amplitudes (exact Dirac-spinor
//!   evaluation and the ultrarelativistic small-angle form) and the Coulomb
//!   phase.
//! * [`vortex`]: the two-path amplitude, its unpolarized square, the
//!   brute-force integral oracle, Gaussian cone smearing and the cross-section
//!   density.
//! * [`observables`]: fringe maps, radial profiles, fringe contrast and the
//!   asymmetry `A_perp`.
//! * [`montecarlo`]: reproducible event generation, rate arithmetic and
//!   reconstruction.
//! * [`config`], [`output`], [`validate`]: run configuration, bit-stable file
//!   output and the self-check suite used by the command-line tool.
//!
//! Units: natural units with momenta and energies in keV throughout.

pub mod amplitudes;
pub mod config;
mod error;
pub mod kinematics;
pub mod montecarlo;
pub mod observables;
pub mod output;
pub mod quadrature;
pub mod validate;
pub mod vortex;

pub use error::{Error, Result};

pub use amplitudes::{Amplitude, HelicitySet};
pub use kinematics::{BeamPair, BesselBeam, ConfigPair, FourMomentum, TransverseVector};
pub use montecarlo::{EventRecord, RateEstimate};
pub use observables::{FringeMap, GridSpec};
pub use vortex::{Model, SmearingGrid, TwoPathAmplitude};

/// Electron mass in keV.
pub const ELECTRON_MASS: f64 = 510.998_950;

/// Fine-structure constant.
pub const ALPHA_EM: f64 = 1.0 / 137.035_999;

/// Elementary charge in coulomb.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Version string recorded in metadata sidecars.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
