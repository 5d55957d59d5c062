//! Two-path vortex amplitude, Gaussian cone smearing and the cross-section
//! density over the total final transverse momentum `K`.
//!
//! For a fixed final state the twisted amplitude is
//!
//! ```text
//! J = e^{i(m1-m2)φK} (κ1κ2 / 2Δ) [M_a e^{i(m1δ1+m2δ2)} + M_b e^{-i(m1δ1+m2δ2)}]
//! ```
//!
//! and the density is its helicity-averaged square. All densities are in
//! arbitrary units: regularization and flux constants are set to one.

mod density;
pub mod oracle;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitudes::{
    apply_phase, coulomb_phase, moller_exact_table, moller_ur, Amplitude, Azimuths, HelicitySet,
};
use crate::kinematics::{
    solve_final_longitudinal, two_configurations, BeamPair, ConfigPair, TransverseVector,
    EDGE_AREA_FRACTION,
};
use crate::{Error, Result};

pub use density::{DensityEvaluator, NodeTerm};
pub use oracle::{brute_force_j, OracleResult};

/// Which plane-wave amplitude feeds the two paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmplitudeKind {
    /// Small-angle form with `t = -|k1 - k1'|²` (transverse transfer only).
    Ultrarelativistic,
    /// Tree-level amplitude from Dirac spinors with exact four-momenta.
    Exact,
}

/// The four amplitude pipelines. Coulomb variants dress each path with
/// `e^{iζ(t)}`, `ζ = α ln(1/|t|)`, using their own `alpha`; the Born
/// coupling itself stays at the physical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Model {
    BornUr,
    CoulombUr { alpha: f64 },
    BornExact,
    CoulombExact { alpha: f64 },
}

impl Model {
    pub fn kind(&self) -> AmplitudeKind {
        match self {
            Model::BornUr | Model::CoulombUr { .. } => AmplitudeKind::Ultrarelativistic,
            Model::BornExact | Model::CoulombExact { .. } => AmplitudeKind::Exact,
        }
    }

    /// Coulomb-phase coupling, `None` for Born models.
    pub fn phase_alpha(&self) -> Option<f64> {
        match *self {
            Model::CoulombUr { alpha } | Model::CoulombExact { alpha } => Some(alpha),
            _ => None,
        }
    }

    pub fn is_born(&self) -> bool {
        self.phase_alpha().is_none()
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Model::BornUr => "born-ur",
            Model::CoulombUr { .. } => "coulomb-ur",
            Model::BornExact => "born-exact",
            Model::CoulombExact { .. } => "coulomb-exact",
        }
    }

    /// Build from a tag and an optional `alpha`; Coulomb tags require it.
    pub fn from_tag(tag: &str, alpha: Option<f64>) -> Result<Self> {
        let need_alpha = || {
            alpha.ok_or_else(|| {
                Error::config("model.alpha", format!("model `{tag}` requires alpha"))
            })
        };
        match tag {
            "born-ur" => Ok(Model::BornUr),
            "born-exact" => Ok(Model::BornExact),
            "coulomb-ur" => Ok(Model::CoulombUr {
                alpha: need_alpha()?,
            }),
            "coulomb-exact" => Ok(Model::CoulombExact {
                alpha: need_alpha()?,
            }),
            other => Err(Error::config(
                "model.name",
                format!("unknown model `{other}` (born-ur, coulomb-ur, born-exact, coulomb-exact)"),
            )),
        }
    }

    /// Same pipeline with a different Coulomb coupling; Born models become
    /// their Coulomb counterparts.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        match self.kind() {
            AmplitudeKind::Ultrarelativistic => Model::CoulombUr { alpha },
            AmplitudeKind::Exact => Model::CoulombExact { alpha },
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase_alpha() {
            Some(a) => write!(f, "{}(alpha={a})", self.tag()),
            None => f.write_str(self.tag()),
        }
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Model::from_tag(s, None)
    }
}

/// Deliberate faults used to check that the validation suite notices them.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestHook {
    /// Adds a relative path phase whose sign follows `sign(t_a - t_b)`.
    CorruptPathPhase,
}

/// The two path amplitudes and coefficients for one final state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPathAmplitude {
    pub m_a: Amplitude,
    pub m_b: Amplitude,
    pub c_a: Complex64,
    pub c_b: Complex64,
    /// `κ1κ2 / 2Δ`; infinite on the annulus edge.
    pub prefactor: f64,
    /// `(m1 - m2) φK`.
    pub global_phase: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub area: f64,
    pub edge: bool,
}

impl TwoPathAmplitude {
    /// `c_a M_a + c_b M_b`, finite everywhere.
    pub fn bracket(&self) -> Complex64 {
        self.c_a * self.m_a.0 + self.c_b * self.m_b.0
    }

    /// The full amplitude `J`; errors on the annulus edge.
    pub fn total(&self) -> Result<Complex64> {
        if self.edge {
            return Err(Error::EdgeSingular { area: self.area });
        }
        Ok(Complex64::from_polar(self.prefactor, self.global_phase) * self.bracket())
    }
}

/// φK on the branch used to build the configuration vectors.
pub(crate) fn branch_azimuth(config: &ConfigPair) -> f64 {
    if config.phi_k > PI {
        config.phi_k - TAU
    } else {
        config.phi_k
    }
}

pub(crate) fn is_edge(area: f64, kappa1: f64, kappa2: f64) -> bool {
    area < EDGE_AREA_FRACTION * kappa1 * kappa2
}

/// Both paths for one helicity set. `alpha_born` is the coupling in the
/// Born amplitude; `alpha_phase`, when present, dresses each path with its
/// Coulomb phase.
#[allow(clippy::too_many_arguments)]
pub fn two_path_amplitude(
    beams: &BeamPair,
    config: &ConfigPair,
    k1p: TransverseVector,
    k2p: TransverseVector,
    h: HelicitySet,
    kind: AmplitudeKind,
    alpha_born: f64,
    alpha_phase: Option<f64>,
) -> Result<TwoPathAmplitude> {
    let paths = PathAmplitudes::new(beams, config, k1p, k2p, kind, alpha_born, alpha_phase, None)?;
    Ok(paths.for_helicity(h))
}

/// Helicity tables for both paths at one final state.
pub(crate) struct PathAmplitudes {
    pub(crate) table_a: [Complex64; 16],
    pub(crate) table_b: [Complex64; 16],
    pub(crate) c_a: Complex64,
    pub(crate) c_b: Complex64,
    pub(crate) prefactor: f64,
    pub(crate) global_phase: f64,
    pub(crate) t_a: f64,
    pub(crate) t_b: f64,
    pub(crate) area: f64,
    pub(crate) edge: bool,
}

impl PathAmplitudes {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        beams: &BeamPair,
        config: &ConfigPair,
        k1p: TransverseVector,
        k2p: TransverseVector,
        kind: AmplitudeKind,
        alpha_born: f64,
        alpha_phase: Option<f64>,
        hook: Option<TestHook>,
    ) -> Result<Self> {
        let (kappa1, kappa2) = beams.kappas();
        let phi_k = branch_azimuth(config);
        let (d1, d2) = (config.delta1, config.delta2);
        let phi1a = phi_k + d1;
        let phi2a = phi_k - d2;
        let phi1b = phi_k - d1;
        let phi2b = phi_k + d2;
        let phi1p = k1p.signed_azimuth();
        let phi2p = k2p.signed_azimuth();

        let (mut table_a, mut table_b, t_a, t_b);
        match kind {
            AmplitudeKind::Ultrarelativistic => {
                let k = config.k1a + config.k2a;
                let w = beams.total_energy();
                let s = w * w - k.modulus_sq();
                t_a = -(config.k1a - k1p).modulus_sq();
                t_b = -(config.k1b - k1p).modulus_sq();
                table_a = [Complex64::default(); 16];
                table_b = [Complex64::default(); 16];
                for h in HelicitySet::all_conserving() {
                    table_a[h.index()] =
                        moller_ur(s, t_a, phi1a, phi1p, phi2a, phi2p, h, alpha_born)?.0;
                    table_b[h.index()] =
                        moller_ur(s, t_b, phi1b, phi1p, phi2b, phi2p, h, alpha_born)?.0;
                }
            }
            AmplitudeKind::Exact => {
                let (_, p1, p2) = solve_final_longitudinal(beams, k1p, k2p)?;
                let k1a = beams.first.component(config.k1a);
                let k2a = beams.second.component(config.k2a);
                let k1b = beams.first.component(config.k1b);
                let k2b = beams.second.component(config.k2b);
                t_a = (k1a - p1).mass_sq();
                t_b = (k1b - p1).mass_sq();
                let az_a = Azimuths {
                    phi1: phi1a,
                    phi2: phi2a,
                    phi1p,
                    phi2p,
                };
                let az_b = Azimuths {
                    phi1: phi1b,
                    phi2: phi2b,
                    phi1p,
                    phi2p,
                };
                table_a = moller_exact_table(&k1a, &k2a, &p1, &p2, &az_a, alpha_born)?;
                table_b = moller_exact_table(&k1b, &k2b, &p1, &p2, &az_b, alpha_born)?;
            }
        }

        let mut dress_a = 0.0;
        let mut dress_b = 0.0;
        if let Some(alpha) = alpha_phase {
            dress_a += coulomb_phase(t_a, alpha)?;
            dress_b += coulomb_phase(t_b, alpha)?;
        }
        if hook == Some(TestHook::CorruptPathPhase) {
            dress_a += 0.5 * (t_a - t_b).signum();
        }
        if dress_a != 0.0 || dress_b != 0.0 {
            for m in table_a.iter_mut() {
                *m = apply_phase(Amplitude(*m), dress_a).0;
            }
            for m in table_b.iter_mut() {
                *m = apply_phase(Amplitude(*m), dress_b).0;
            }
        }

        let m1 = beams.first.m();
        let m2 = beams.second.m();
        let path_phase = m1 * d1 + m2 * d2;
        let area = config.area;
        Ok(Self {
            table_a,
            table_b,
            c_a: Complex64::from_polar(1.0, path_phase),
            c_b: Complex64::from_polar(1.0, -path_phase),
            prefactor: kappa1 * kappa2 / (2.0 * area),
            global_phase: (m1 - m2) * phi_k,
            t_a,
            t_b,
            area,
            edge: is_edge(area, kappa1, kappa2),
        })
    }

    pub(crate) fn for_helicity(&self, h: HelicitySet) -> TwoPathAmplitude {
        TwoPathAmplitude {
            m_a: Amplitude(self.table_a[h.index()]),
            m_b: Amplitude(self.table_b[h.index()]),
            c_a: self.c_a,
            c_b: self.c_b,
            prefactor: self.prefactor,
            global_phase: self.global_phase,
            t_a: self.t_a,
            t_b: self.t_b,
            area: self.area,
            edge: self.edge,
        }
    }

    /// `(1/4) Σ_h |c_a M_a + c_b M_b|²`, without the Jacobian prefactor.
    pub(crate) fn unpolarized_bracket(&self) -> f64 {
        let sum: f64 = self
            .table_a
            .iter()
            .zip(&self.table_b)
            .map(|(a, b)| (self.c_a * a + self.c_b * b).norm_sqr())
            .sum();
        0.25 * sum
    }
}

/// Helicity-averaged `|J|²` in the small-angle approximation:
/// `64π²α²s² (κ1²κ2²/4Δ²) [1/t_a² + 1/t_b² + 2 cos(2m1δ1+2m2δ2) cos δ1 cos δ2 / (t_a t_b)]`
/// with `t_{a,b} = -|k1_{a,b} - k1'|²`.
#[allow(clippy::too_many_arguments)]
pub fn j_squared_unpolarized_ur(
    kappa1: f64,
    kappa2: f64,
    k: TransverseVector,
    k1p: TransverseVector,
    s: f64,
    two_m1: i32,
    two_m2: i32,
    alpha: f64,
) -> Result<f64> {
    let config = two_configurations(kappa1, kappa2, k)?;
    if is_edge(config.area, kappa1, kappa2) {
        return Err(Error::EdgeSingular { area: config.area });
    }
    let t_a = -(config.k1a - k1p).modulus_sq();
    let t_b = -(config.k1b - k1p).modulus_sq();
    let phase = f64::from(two_m1) * config.delta1 + f64::from(two_m2) * config.delta2;
    let jacobian = (kappa1 * kappa2).powi(2) / (4.0 * config.area * config.area);
    Ok(jacobian * ur_bracket(s, t_a, t_b, phase, config.delta1, config.delta2, alpha, 0.0))
}

/// `64π²α²s² [1/t_a² + 1/t_b² + 2 cos(Φ + Δζ) cos δ1 cos δ2 / (t_a t_b)]`.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn ur_bracket(
    s: f64,
    t_a: f64,
    t_b: f64,
    phase: f64,
    delta1: f64,
    delta2: f64,
    alpha: f64,
    dzeta: f64,
) -> f64 {
    let scale = 8.0 * PI * alpha * s;
    let inner = 1.0 / (t_a * t_a)
        + 1.0 / (t_b * t_b)
        + 2.0 * (phase + dzeta).cos() * delta1.cos() * delta2.cos() / (t_a * t_b);
    scale * scale * inner
}

/// One `(κ1, κ2)` smearing node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmearingNode {
    pub kappa1: f64,
    pub kappa2: f64,
    pub weight: f64,
}

/// Tensor-product quadrature over the two Gaussian cone distributions.
///
/// Smearing is incoherent: node cross sections are averaged, amplitudes are
/// not. The per-node Jacobian `κ1²κ2²/4Δ² = 1/sin²ψ` (ψ the angle between
/// `k1` and `k2`) is softened to `1/(sin²ψ + ε²)` with `ε` from
/// [`edge_softening`], which keeps the smeared density bounded at the node
/// annulus edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmearingGrid {
    pub nodes: Vec<SmearingNode>,
    pub kappa_bar: (f64, f64),
    pub sigma: (f64, f64),
    pub edge_softening: f64,
}

impl SmearingGrid {
    /// Single unsmeared node.
    pub fn unsmeared(kappa1: f64, kappa2: f64) -> Self {
        Self {
            nodes: vec![SmearingNode {
                kappa1,
                kappa2,
                weight: 1.0,
            }],
            kappa_bar: (kappa1, kappa2),
            sigma: (0.0, 0.0),
            edge_softening: 0.0,
        }
    }

    pub fn with_edge_softening(mut self, epsilon: f64) -> Self {
        self.edge_softening = epsilon;
        self
    }

    /// Union of all node annuli.
    pub fn support(&self) -> (f64, f64) {
        self.nodes
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), n| {
                (
                    lo.min((n.kappa1 - n.kappa2).abs()),
                    hi.max(n.kappa1 + n.kappa2),
                )
            })
    }

    pub fn is_smeared(&self) -> bool {
        self.nodes.len() > 1 || self.sigma.0 > 0.0 || self.sigma.1 > 0.0
    }

    pub fn describe(&self) -> String {
        format!(
            "incoherent nodes={} kappa_bar=({}, {}) sigma=({}, {}) edge_softening={}",
            self.nodes.len(),
            self.kappa_bar.0,
            self.kappa_bar.1,
            self.sigma.0,
            self.sigma.1,
            self.edge_softening
        )
    }
}

/// Default softening `ε² = σ_K (κ̄1 + κ̄2) / (κ̄1 κ̄2)`, `σ_K² = σ1² + σ2²`.
/// Near the outer edge `sin²ψ ≈ 2K x / κ1κ2` at distance `x` from it, so the
/// softened Jacobian saturates at `x ≈ σ_K / 2`.
pub fn edge_softening(kappa_bar1: f64, sigma1: f64, kappa_bar2: f64, sigma2: f64) -> f64 {
    let sigma_k = sigma1.hypot(sigma2);
    (sigma_k * (kappa_bar1 + kappa_bar2) / (kappa_bar1 * kappa_bar2)).sqrt()
}

fn gaussian_nodes(center: f64, sigma: f64, n: usize) -> Vec<(f64, f64)> {
    if sigma == 0.0 || n == 1 {
        return vec![(center, 1.0)];
    }
    (0..n)
        .map(|j| {
            let x = -3.0 * sigma + 6.0 * sigma * j as f64 / (n - 1) as f64;
            (center + x, (-0.5 * (x / sigma).powi(2)).exp())
        })
        .collect()
}

/// Equally spaced nodes on `κ̄ ± 3σ` with Gaussian weights, tensor product
/// over both beams, weights normalised to one. `n_nodes` is per beam.
pub fn make_smearing(
    kappa_bar1: f64,
    sigma1: f64,
    kappa_bar2: f64,
    sigma2: f64,
    n_nodes: usize,
) -> Result<SmearingGrid> {
    if n_nodes == 0 || n_nodes % 2 == 0 {
        return Err(Error::Domain(format!(
            "n_nodes = {n_nodes} must be odd and >= 1"
        )));
    }
    for (name, k, s) in [("1", kappa_bar1, sigma1), ("2", kappa_bar2, sigma2)] {
        if !(k > 0.0) {
            return Err(Error::Domain(format!(
                "kappa_bar{name} = {k} must be positive"
            )));
        }
        if !(s >= 0.0) {
            return Err(Error::Domain(format!(
                "sigma{name} = {s} must be non-negative"
            )));
        }
        if k - 3.0 * s <= 0.0 {
            return Err(Error::Domain(format!(
                "sigma{name} = {s} keV puts smearing nodes at kappa <= 0 (kappa_bar = {k} keV)"
            )));
        }
    }
    let g1 = gaussian_nodes(kappa_bar1, sigma1, n_nodes);
    let g2 = gaussian_nodes(kappa_bar2, sigma2, n_nodes);
    let total: f64 = g1.iter().map(|a| a.1).sum::<f64>() * g2.iter().map(|b| b.1).sum::<f64>();
    let mut nodes = Vec::with_capacity(g1.len() * g2.len());
    for &(k1, w1) in &g1 {
        for &(k2, w2) in &g2 {
            nodes.push(SmearingNode {
                kappa1: k1,
                kappa2: k2,
                weight: w1 * w2 / total,
            });
        }
    }
    Ok(SmearingGrid {
        nodes,
        kappa_bar: (kappa_bar1, kappa_bar2),
        sigma: (sigma1, sigma2),
        edge_softening: edge_softening(kappa_bar1, sigma1, kappa_bar2, sigma2),
    })
}

/// Cross-section density at one `K` plus the number of nodes skipped on
/// their annulus edge.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Density {
    pub value: f64,
    pub edge_nodes: u32,
}

/// Smeared, helicity-averaged `|J|²` at `(k1', K)` in arbitrary units.
pub fn dsigma(
    beams: &BeamPair,
    k1p: TransverseVector,
    k: TransverseVector,
    smearing: &SmearingGrid,
    model: Model,
) -> Result<Density> {
    DensityEvaluator::new(beams, smearing, model)?.density(k1p, k)
}

#[cfg(test)]
mod tests;
