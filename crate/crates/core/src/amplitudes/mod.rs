//! Plane-wave e⁻e⁻ → e⁻e⁻ helicity amplitudes and the Coulomb phase.
//!
//! Sign and phase conventions:
//!
//! * `M = 4πα [ (ū1'γ^μ u1)(ū2'γ_μ u2) / t - (ū2'γ^μ u1)(ū1'γ_μ u2) / u ]`, the
//!   relative minus sign coming from the exchange of identical fermions.
//! * Spinors follow [`spinor`]; with that choice the small-angle limit of the
//!   exact amplitude reproduces `8πα (s/t) e^{-iλ1(φ1-φ1')} e^{iλ2(φ2-φ2')}`
//!   including the azimuthal phases, not just its modulus.

pub mod spinor;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kinematics::FourMomentum;
use crate::{Error, Result};

use spinor::{contract, current, DiracSpinor};

/// Smallest `|t|` or `|u|` (keV²) accepted by the amplitudes.
pub const T_MIN: f64 = 1e-6;

/// Helicities of the incoming (`lam1`, `lam2`) and outgoing (`lam1p`, `lam2p`)
/// electrons, each `±1` for `λ = ±1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HelicitySet {
    pub lam1: i8,
    pub lam2: i8,
    pub lam1p: i8,
    pub lam2p: i8,
}

impl HelicitySet {
    pub fn new(lam1: i8, lam2: i8, lam1p: i8, lam2p: i8) -> Result<Self> {
        for (name, v) in [
            ("lam1", lam1),
            ("lam2", lam2),
            ("lam1p", lam1p),
            ("lam2p", lam2p),
        ] {
            if v != 1 && v != -1 {
                return Err(Error::Domain(format!("{name} = {v} must be ±1")));
            }
        }
        Ok(Self {
            lam1,
            lam2,
            lam1p,
            lam2p,
        })
    }

    /// Helicity-conserving set `(λ1, λ2) -> (λ1, λ2)`.
    pub fn conserving(lam1: i8, lam2: i8) -> Result<Self> {
        Self::new(lam1, lam2, lam1, lam2)
    }

    /// All sixteen combinations, in [`HelicitySet::index`] order.
    pub fn all() -> impl Iterator<Item = HelicitySet> {
        (0..16).map(Self::from_index)
    }

    /// The four helicity-conserving channels.
    pub fn all_conserving() -> impl Iterator<Item = HelicitySet> {
        Self::all().filter(HelicitySet::is_conserving)
    }

    pub fn is_conserving(&self) -> bool {
        self.lam1 == self.lam1p && self.lam2 == self.lam2p
    }

    pub fn flipped(&self) -> Self {
        Self {
            lam1: -self.lam1,
            lam2: -self.lam2,
            lam1p: -self.lam1p,
            lam2p: -self.lam2p,
        }
    }

    /// Bit-packed index in `0..16`: bit 3 = lam1, 2 = lam2, 1 = lam1p, 0 = lam2p
    /// (set for `-1`).
    pub fn index(&self) -> usize {
        let bit = |v: i8| usize::from(v < 0);
        bit(self.lam1) << 3 | bit(self.lam2) << 2 | bit(self.lam1p) << 1 | bit(self.lam2p)
    }

    pub fn from_index(index: usize) -> Self {
        let h = |bit: usize| if index >> bit & 1 == 1 { -1 } else { 1 };
        Self {
            lam1: h(3),
            lam2: h(2),
            lam1p: h(1),
            lam2p: h(0),
        }
    }
}

/// Invariant amplitude, dimensionless in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Amplitude(pub Complex64);

impl Amplitude {
    pub const ZERO: Amplitude = Amplitude(Complex64::new(0.0, 0.0));

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }
}

fn check_pole(name: &'static str, value: f64) -> Result<()> {
    if value.abs() < T_MIN || !value.is_finite() {
        Err(Error::Singularity { name, value })
    } else {
        Ok(())
    }
}

/// Incoming (`k1`, `k2`) and outgoing (`k1p`, `k2p`) azimuths used for the
/// spinor phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Azimuths {
    pub phi1: f64,
    pub phi2: f64,
    pub phi1p: f64,
    pub phi2p: f64,
}

impl Azimuths {
    pub fn of(
        k1: &FourMomentum,
        k2: &FourMomentum,
        k1p: &FourMomentum,
        k2p: &FourMomentum,
    ) -> Self {
        Self {
            phi1: k1.transverse().signed_azimuth(),
            phi2: k2.transverse().signed_azimuth(),
            phi1p: k1p.transverse().signed_azimuth(),
            phi2p: k2p.transverse().signed_azimuth(),
        }
    }
}

/// All sixteen exact tree-level helicity amplitudes, indexed by
/// [`HelicitySet::index`]. No momentum-conservation check; the oracle
/// integrals evaluate this off the energy shell of the process.
pub fn moller_exact_table(
    k1: &FourMomentum,
    k2: &FourMomentum,
    k1p: &FourMomentum,
    k2p: &FourMomentum,
    azimuths: &Azimuths,
    alpha: f64,
) -> Result<[Complex64; 16]> {
    let t = (*k1 - *k1p).mass_sq();
    let u = (*k1 - *k2p).mass_sq();
    check_pole("t", t)?;
    check_pole("u", u)?;

    let spin = |p: &FourMomentum, phi: f64| {
        [
            DiracSpinor::with_azimuth(p, 1, phi),
            DiracSpinor::with_azimuth(p, -1, phi),
        ]
    };
    let u1 = spin(k1, azimuths.phi1);
    let u2 = spin(k2, azimuths.phi2);
    let u1p = spin(k1p, azimuths.phi1p);
    let u2p = spin(k2p, azimuths.phi2p);

    // currents[out][in], index 0 for λ = +1/2
    let table = |out: &[DiracSpinor; 2], inc: &[DiracSpinor; 2]| {
        let mut j = [[[Complex64::default(); 4]; 2]; 2];
        for (o, row) in j.iter_mut().enumerate() {
            for (i, cell) in row.iter_mut().enumerate() {
                *cell = current(&out[o], &inc[i]);
            }
        }
        j
    };
    let j11 = table(&u1p, &u1);
    let j22 = table(&u2p, &u2);
    let j21 = table(&u2p, &u1);
    let j12 = table(&u1p, &u2);

    let e2 = 4.0 * PI * alpha;
    let mut out = [Complex64::default(); 16];
    for (idx, slot) in out.iter_mut().enumerate() {
        let h = HelicitySet::from_index(idx);
        let (l1, l2, l1p, l2p) = (
            usize::from(h.lam1 < 0),
            usize::from(h.lam2 < 0),
            usize::from(h.lam1p < 0),
            usize::from(h.lam2p < 0),
        );
        let direct = contract(&j11[l1p][l1], &j22[l2p][l2]) / t;
        let exchange = contract(&j21[l2p][l1], &j12[l1p][l2]) / u;
        *slot = (direct - exchange) * e2;
    }
    Ok(out)
}

fn check_conservation(
    k1: &FourMomentum,
    k2: &FourMomentum,
    k1p: &FourMomentum,
    k2p: &FourMomentum,
) -> Result<()> {
    let d = (*k1 + *k2) - (*k1p + *k2p);
    let scale = k1.e + k2.e;
    let worst = d.e.abs().max(d.px.abs()).max(d.py.abs()).max(d.pz.abs());
    if worst > 1e-8 * scale {
        return Err(Error::Domain(format!(
            "four-momentum not conserved: residual {worst:e} keV"
        )));
    }
    Ok(())
}

/// Exact tree-level Møller amplitude from explicit Dirac spinors, with spinor
/// azimuths taken from the momenta.
pub fn moller_exact(
    k1: &FourMomentum,
    k2: &FourMomentum,
    k1p: &FourMomentum,
    k2p: &FourMomentum,
    h: HelicitySet,
    alpha: f64,
) -> Result<Amplitude> {
    check_conservation(k1, k2, k1p, k2p)?;
    let table = moller_exact_table(k1, k2, k1p, k2p, &Azimuths::of(k1, k2, k1p, k2p), alpha)?;
    Ok(Amplitude(table[h.index()]))
}

/// `(1/4) Σ_h |M|²` from the exact helicity amplitudes.
pub fn moller_exact_unpolarized(
    k1: &FourMomentum,
    k2: &FourMomentum,
    k1p: &FourMomentum,
    k2p: &FourMomentum,
    alpha: f64,
) -> Result<f64> {
    check_conservation(k1, k2, k1p, k2p)?;
    let table = moller_exact_table(k1, k2, k1p, k2p, &Azimuths::of(k1, k2, k1p, k2p), alpha)?;
    Ok(0.25 * table.iter().map(Complex64::norm_sqr).sum::<f64>())
}

/// Ultrarelativistic small-angle amplitude
/// `8πα (s/t) e^{-iλ1(φ1-φ1')} e^{iλ2(φ2-φ2')} δ_{λ1λ1'} δ_{λ2λ2'}`.
#[allow(clippy::too_many_arguments)]
pub fn moller_ur(
    s: f64,
    t: f64,
    phi1: f64,
    phi1p: f64,
    phi2: f64,
    phi2p: f64,
    h: HelicitySet,
    alpha: f64,
) -> Result<Amplitude> {
    check_pole("t", t)?;
    if !h.is_conserving() {
        return Ok(Amplitude::ZERO);
    }
    let lam1 = 0.5 * f64::from(h.lam1);
    let lam2 = 0.5 * f64::from(h.lam2);
    let phase = -lam1 * (phi1 - phi1p) + lam2 * (phi2 - phi2p);
    Ok(Amplitude(Complex64::from_polar(
        8.0 * PI * alpha * s / t,
        phase,
    )))
}

/// Coulomb phase `ζ = α ln(1/|t|)` with `t` in keV² and `ζ0 = 0`.
/// Only differences between momentum transfers are observable.
pub fn coulomb_phase(t: f64, alpha: f64) -> Result<f64> {
    check_pole("t", t)?;
    Ok(-alpha * t.abs().ln())
}

/// `m e^{iζ}`.
pub fn apply_phase(m: Amplitude, zeta: f64) -> Amplitude {
    Amplitude(m.0 * Complex64::from_polar(1.0, zeta))
}

/// Textbook spin-averaged Møller `(1/4) Σ |M|²` in terms of `s, t, u` for
/// electrons of mass `m`.
pub fn moller_unpolarized_closed_form(s: f64, t: f64, u: f64, alpha: f64, mass: f64) -> f64 {
    let e4 = (4.0 * PI * alpha).powi(2);
    let m2 = mass * mass;
    let direct = ((s - 2.0 * m2).powi(2) + (u - 2.0 * m2).powi(2) + 4.0 * m2 * t) / (t * t);
    let exchange = ((s - 2.0 * m2).powi(2) + (t - 2.0 * m2).powi(2) + 4.0 * m2 * u) / (u * u);
    let interference = 2.0 * (s - 2.0 * m2) * (s - 6.0 * m2) / (t * u);
    2.0 * e4 * (direct + exchange + interference)
}
