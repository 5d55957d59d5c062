//! Transverse-plane geometry and four-momentum bookkeeping.
//!
//! The frame is fixed to balanced longitudinal momenta, `k2z = -k1z` for the
//! incoming vortex electrons and `k2z' = -k1z'` for the outgoing plane waves.
//! Metric signature is `(+, -, -, -)`.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, ELECTRON_MASS};

/// Triangles with area below `EDGE_AREA_FRACTION * kappa1 * kappa2` are
/// treated as lying on the annulus edge.
pub const EDGE_AREA_FRACTION: f64 = 1e-6;

/// Relative slack when deciding whether `|K|` lies inside the annulus.
const SUPPORT_SLACK: f64 = 1e-12;

/// A momentum in the plane transverse to the common beam axis, in keV.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TransverseVector {
    pub x: f64,
    pub y: f64,
}

impl TransverseVector {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(modulus: f64, azimuth: f64) -> Self {
        let (s, c) = azimuth.sin_cos();
        Self::new(modulus * c, modulus * s)
    }

    pub fn modulus(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn modulus_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Azimuth in `[0, 2π)`.
    pub fn azimuth(&self) -> f64 {
        let phi = self.signed_azimuth();
        if phi < 0.0 {
            let wrapped = phi + TAU;
            if wrapped >= TAU {
                0.0
            } else {
                wrapped
            }
        } else {
            phi
        }
    }

    /// Azimuth in `(-π, π]`, odd under `y -> -y`.
    pub fn signed_azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product `self × other`.
    pub fn cross(&self, other: &Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Mirror image about the axis through the origin with azimuth `axis`.
    pub fn reflected(&self, axis: f64) -> Self {
        let (s, c) = (2.0 * axis).sin_cos();
        Self::new(c * self.x + s * self.y, s * self.x - c * self.y)
    }
}

impl Add for TransverseVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for TransverseVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for TransverseVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl Mul<f64> for TransverseVector {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

/// Contravariant four-momentum `(E, px, py, pz)` in keV.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourMomentum {
    pub e: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl FourMomentum {
    pub const fn new(e: f64, px: f64, py: f64, pz: f64) -> Self {
        Self { e, px, py, pz }
    }

    /// On-shell electron with the given transverse and longitudinal momentum.
    pub fn electron(transverse: TransverseVector, pz: f64) -> Self {
        let e = (ELECTRON_MASS * ELECTRON_MASS + transverse.modulus_sq() + pz * pz).sqrt();
        Self::new(e, transverse.x, transverse.y, pz)
    }

    pub fn transverse(&self) -> TransverseVector {
        TransverseVector::new(self.px, self.py)
    }

    pub fn momentum(&self) -> f64 {
        (self.px * self.px + self.py * self.py + self.pz * self.pz).sqrt()
    }

    /// Minkowski product with signature `(+, -, -, -)`.
    pub fn dot(&self, other: &Self) -> f64 {
        self.e * other.e - self.px * other.px - self.py * other.py - self.pz * other.pz
    }

    pub fn mass_sq(&self) -> f64 {
        self.dot(self)
    }

    /// `|p² - m_e²| / E²`.
    pub fn on_shell_residual(&self) -> f64 {
        (self.mass_sq() - ELECTRON_MASS * ELECTRON_MASS).abs() / (self.e * self.e)
    }

    /// Polar angle of the three-momentum.
    pub fn polar_angle(&self) -> f64 {
        self.px.hypot(self.py).atan2(self.pz)
    }

    pub fn rotated_z(&self, angle: f64) -> Self {
        let t = self.transverse().rotated(angle);
        Self::new(self.e, t.x, t.y, self.pz)
    }

    /// Pure boost by velocity `beta` (`|beta| < 1`).
    pub fn boosted(&self, beta: [f64; 3]) -> Self {
        let b2 = beta[0] * beta[0] + beta[1] * beta[1] + beta[2] * beta[2];
        if b2 == 0.0 {
            return *self;
        }
        let gamma = 1.0 / (1.0 - b2).sqrt();
        let bp = beta[0] * self.px + beta[1] * self.py + beta[2] * self.pz;
        let k = (gamma - 1.0) * bp / b2 + gamma * self.e;
        Self::new(
            gamma * (self.e + bp),
            self.px + k * beta[0],
            self.py + k * beta[1],
            self.pz + k * beta[2],
        )
    }
}

impl Add for FourMomentum {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.e + rhs.e,
            self.px + rhs.px,
            self.py + rhs.py,
            self.pz + rhs.pz,
        )
    }
}

impl Sub for FourMomentum {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.e - rhs.e,
            self.px - rhs.px,
            self.py - rhs.py,
            self.pz - rhs.pz,
        )
    }
}

/// One monochromatic Bessel vortex electron.
///
/// `two_m` stores twice the half-integer total angular momentum projection
/// and is always odd. `helicity` is `±1`, encoding `λ = ±1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselBeam {
    energy: f64,
    kz: f64,
    kappa: f64,
    two_m: i32,
    helicity: i8,
    sigma: f64,
}

impl BesselBeam {
    /// Beam with given energy; `kz` takes the sign of `direction`.
    pub fn from_energy(
        energy: f64,
        kappa: f64,
        two_m: i32,
        helicity: i8,
        sigma: f64,
        direction: f64,
    ) -> Result<Self> {
        check_positive("kappa", kappa)?;
        let kz_sq = energy * energy - ELECTRON_MASS * ELECTRON_MASS - kappa * kappa;
        if !(kz_sq > 0.0) {
            return Err(Error::Domain(format!(
                "energy {energy} keV does not exceed sqrt(m_e^2 + kappa^2) for kappa = {kappa} keV"
            )));
        }
        Self::from_kz(
            kz_sq.sqrt().copysign(direction),
            kappa,
            two_m,
            helicity,
            sigma,
        )
    }

    pub fn from_kz(kz: f64, kappa: f64, two_m: i32, helicity: i8, sigma: f64) -> Result<Self> {
        check_positive("kappa", kappa)?;
        if !kz.is_finite() {
            return Err(Error::Domain(format!("kz = {kz} is not finite")));
        }
        if two_m % 2 == 0 {
            return Err(Error::Domain(format!(
                "two_m = {two_m} must be odd (half-integer m)"
            )));
        }
        if helicity != 1 && helicity != -1 {
            return Err(Error::Domain(format!("helicity = {helicity} must be ±1")));
        }
        if !(sigma >= 0.0) || sigma >= kappa {
            return Err(Error::Domain(format!(
                "sigma = {sigma} keV must satisfy 0 <= sigma < kappa = {kappa} keV"
            )));
        }
        let energy = (ELECTRON_MASS * ELECTRON_MASS + kz * kz + kappa * kappa).sqrt();
        Ok(Self {
            energy,
            kz,
            kappa,
            two_m,
            helicity,
            sigma,
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn kz(&self) -> f64 {
        self.kz
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn two_m(&self) -> i32 {
        self.two_m
    }

    /// Total angular momentum projection `m`.
    pub fn m(&self) -> f64 {
        f64::from(self.two_m) / 2.0
    }

    pub fn helicity(&self) -> i8 {
        self.helicity
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Monochromatic beam with the same longitudinal momentum and quantum
    /// numbers on a different cone. Smearing nodes use this, so the balanced
    /// frame survives smearing.
    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::from_kz(self.kz, kappa, self.two_m, self.helicity, 0.0)
    }

    pub fn with_two_m(&self, two_m: i32) -> Result<Self> {
        Self::from_kz(self.kz, self.kappa, two_m, self.helicity, self.sigma)
    }

    /// On-shell residual `|E² - m² - kz² - κ²| / E²`.
    pub fn shell_residual(&self) -> f64 {
        let m2 = ELECTRON_MASS * ELECTRON_MASS;
        (self.energy * self.energy - m2 - self.kz * self.kz - self.kappa * self.kappa).abs()
            / (self.energy * self.energy)
    }

    /// Plane-wave component with transverse momentum `k`.
    pub fn component(&self, k: TransverseVector) -> FourMomentum {
        FourMomentum::electron(k, self.kz)
    }
}

/// The two colliding beams in the balanced frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamPair {
    pub first: BesselBeam,
    pub second: BesselBeam,
}

impl BeamPair {
    /// Requires `second.kz = -first.kz` to 1e-9 relative.
    pub fn new(first: BesselBeam, second: BesselBeam) -> Result<Self> {
        let scale = first.kz.abs().max(1.0);
        if (first.kz + second.kz).abs() > 1e-9 * scale {
            return Err(Error::Domain(format!(
                "beams are not in the balanced frame: k1z = {}, k2z = {}",
                first.kz, second.kz
            )));
        }
        Ok(Self { first, second })
    }

    /// Second beam built on the first one's balanced partner, `k2z = -k1z`.
    pub fn balanced(
        first: BesselBeam,
        kappa2: f64,
        two_m2: i32,
        helicity2: i8,
        sigma2: f64,
    ) -> Result<Self> {
        let second = BesselBeam::from_kz(-first.kz, kappa2, two_m2, helicity2, sigma2)?;
        Ok(Self { first, second })
    }

    pub fn total_energy(&self) -> f64 {
        self.first.energy + self.second.energy
    }

    /// Both beams moved to cones `(kappa1, kappa2)` at unchanged `kz`.
    pub fn with_kappas(&self, kappa1: f64, kappa2: f64) -> Result<Self> {
        Ok(Self {
            first: self.first.with_kappa(kappa1)?,
            second: self.second.with_kappa(kappa2)?,
        })
    }

    pub fn kappas(&self) -> (f64, f64) {
        (self.first.kappa, self.second.kappa)
    }
}

/// The two initial transverse configurations leading to one final `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigPair {
    pub k1a: TransverseVector,
    pub k2a: TransverseVector,
    pub k1b: TransverseVector,
    pub k2b: TransverseVector,
    pub delta1: f64,
    pub delta2: f64,
    /// Triangle area Δ in keV².
    pub area: f64,
    /// Azimuth of `K` in `[0, 2π)`.
    pub phi_k: f64,
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {value} must be positive")))
    }
}

/// Annulus `|κ1 - κ2| <= |K| <= κ1 + κ2` of allowed total transverse momenta.
pub fn ring_bounds(kappa1: f64, kappa2: f64) -> Result<(f64, f64)> {
    check_positive("kappa1", kappa1)?;
    check_positive("kappa2", kappa2)?;
    Ok(((kappa1 - kappa2).abs(), kappa1 + kappa2))
}

/// Interior angles δ1, δ2 (adjacent to the side `|K|`) and area of the
/// triangle with sides κ1, κ2, |K|.
pub fn triangle_angles(kappa1: f64, kappa2: f64, k: f64) -> Result<(f64, f64, f64)> {
    let (k_min, k_max) = ring_bounds(kappa1, kappa2)?;
    let slack = SUPPORT_SLACK * k_max;
    if !(k >= k_min - slack && k <= k_max + slack) {
        return Err(Error::OutOfSupport { k, k_min, k_max });
    }
    if k == 0.0 {
        // κ1 = κ2 and K = 0: antiparallel momenta, any orientation.
        return Ok((PI / 2.0, PI / 2.0, 0.0));
    }
    let cos1 = (kappa1 * kappa1 + k * k - kappa2 * kappa2) / (2.0 * kappa1 * k);
    let cos2 = (kappa2 * kappa2 + k * k - kappa1 * kappa1) / (2.0 * kappa2 * k);
    let delta1 = cos1.clamp(-1.0, 1.0).acos();
    let delta2 = cos2.clamp(-1.0, 1.0).acos();
    let area = 0.5 * k * kappa1 * delta1.sin();
    Ok((delta1, delta2, area))
}

/// Both initial configurations for total transverse momentum `k`:
/// `a` has `φ1 = φK + δ1, φ2 = φK - δ2`, `b` is its mirror image about `K`.
pub fn two_configurations(kappa1: f64, kappa2: f64, k: TransverseVector) -> Result<ConfigPair> {
    let (delta1, delta2, area) = triangle_angles(kappa1, kappa2, k.modulus())?;
    // Signed azimuth keeps the construction exactly odd under reflection.
    let phi = k.signed_azimuth();
    Ok(ConfigPair {
        k1a: TransverseVector::from_polar(kappa1, phi + delta1),
        k2a: TransverseVector::from_polar(kappa2, phi - delta2),
        k1b: TransverseVector::from_polar(kappa1, phi - delta1),
        k2b: TransverseVector::from_polar(kappa2, phi + delta2),
        delta1,
        delta2,
        area,
        phi_k: k.azimuth(),
    })
}

/// Final longitudinal momentum `k1z' >= 0` from energy conservation at
/// `k2z' = -k1z'`, plus both outgoing four-momenta.
///
/// `W(k) = sqrt(μ1² + k²) + sqrt(μ2² + k²)` is increasing on `k >= 0`, so a
/// safeguarded Newton iteration on a shrinking bracket converges to the
/// unique root.
pub fn solve_final_longitudinal(
    beams: &BeamPair,
    k1p: TransverseVector,
    k2p: TransverseVector,
) -> Result<(f64, FourMomentum, FourMomentum)> {
    let w = beams.total_energy();
    let m2 = ELECTRON_MASS * ELECTRON_MASS;
    let mu1_sq = m2 + k1p.modulus_sq();
    let mu2_sq = m2 + k2p.modulus_sq();
    let threshold = mu1_sq.sqrt() + mu2_sq.sqrt();
    if w < threshold {
        return Err(Error::NoSolution {
            energy: w,
            threshold,
        });
    }

    let residual = |kz: f64| (mu1_sq + kz * kz).sqrt() + (mu2_sq + kz * kz).sqrt() - w;
    let (mut lo, mut hi) = (0.0_f64, w);
    let mut kz = {
        // closed-form two-body value as a starting point
        let a = (w * w - threshold * threshold).max(0.0);
        let b = w * w - (mu1_sq.sqrt() - mu2_sq.sqrt()).powi(2);
        (a * b).sqrt() / (2.0 * w)
    };
    for _ in 0..200 {
        let f = residual(kz);
        if f.abs() <= 1e-14 * w {
            break;
        }
        if f > 0.0 {
            hi = kz;
        } else {
            lo = kz;
        }
        let e1 = (mu1_sq + kz * kz).sqrt();
        let e2 = (mu2_sq + kz * kz).sqrt();
        let slope = kz / e1 + kz / e2;
        let newton = if slope > 0.0 {
            kz - f / slope
        } else {
            f64::NAN
        };
        kz = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-15 * w {
            break;
        }
    }
    let p1 = FourMomentum::electron(k1p, kz);
    let p2 = FourMomentum::electron(k2p, -kz);
    Ok((kz, p1, p2))
}

/// Mandelstam invariants `s = (k1+k2)²`, `t = (k1-k1')²`, `u = (k1-k2')²`.
pub fn mandelstam(
    k1: &FourMomentum,
    k2: &FourMomentum,
    k1p: &FourMomentum,
    k2p: &FourMomentum,
) -> (f64, f64, f64) {
    let s = (*k1 + *k2).mass_sq();
    let t = (*k1 - *k1p).mass_sq();
    let u = (*k1 - *k2p).mass_sq();
    (s, t, u)
}

/// `t_a - t_b = 4 |k1'| κ1 sin δ1 sin(φ1' - φK)`.
pub fn t_difference(config: &ConfigPair, k1p: TransverseVector) -> f64 {
    let kappa1 = config.k1a.modulus();
    4.0 * k1p.modulus() * kappa1 * config.delta1.sin() * (k1p.azimuth() - config.phi_k).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3_beams() -> BeamPair {
        let b1 = BesselBeam::from_energy(2100.0, 200.0, 1, 1, 10.0, 1.0).unwrap();
        BeamPair::balanced(b1, 100.0, 13, 1, 5.0).unwrap()
    }

    #[test]
    fn ring_bounds_examples() {
        assert_eq!(ring_bounds(200.0, 100.0).unwrap(), (100.0, 300.0));
        assert_eq!(ring_bounds(150.0, 150.0).unwrap(), (0.0, 300.0));
        assert_eq!(ring_bounds(1.0, 3.0).unwrap(), (2.0, 4.0));
        assert!(matches!(ring_bounds(0.0, 3.0), Err(Error::Domain(_))));
        assert!(matches!(ring_bounds(2.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn triangle_edges_and_equilateral() {
        assert_eq!(
            triangle_angles(200.0, 100.0, 300.0).unwrap(),
            (0.0, 0.0, 0.0)
        );
        let (d1, d2, area) = triangle_angles(200.0, 100.0, 100.0).unwrap();
        assert_eq!((d1, d2), (0.0, PI));
        assert!(area.abs() < 1e-9);
        let (d1, d2, area) = triangle_angles(100.0, 100.0, 100.0).unwrap();
        assert!((d1 - PI / 3.0).abs() < 1e-15);
        assert!((d2 - PI / 3.0).abs() < 1e-15);
        assert!((area - 3f64.sqrt() * 1e4 / 4.0).abs() < 1e-9);
        assert!(matches!(
            triangle_angles(200.0, 100.0, 300.5),
            Err(Error::OutOfSupport { .. })
        ));
        assert!(matches!(
            triangle_angles(200.0, 100.0, 99.0),
            Err(Error::OutOfSupport { .. })
        ));
    }

    #[test]
    fn configurations_degenerate_and_equilateral() {
        let c = two_configurations(100.0, 100.0, TransverseVector::new(200.0, 0.0)).unwrap();
        assert_eq!(c.k1a, c.k1b);
        assert!((c.k1a.x - 100.0).abs() < 1e-12 && c.k1a.y.abs() < 1e-12);

        let c = two_configurations(100.0, 100.0, TransverseVector::new(100.0, 0.0)).unwrap();
        let (s, co) = (PI / 3.0).sin_cos();
        assert!((c.k1a.x - 100.0 * co).abs() < 1e-12);
        assert!((c.k1a.y - 100.0 * s).abs() < 1e-12);
        assert!((c.k1b.x - c.k1a.x).abs() < 1e-12 && (c.k1b.y + c.k1a.y).abs() < 1e-12);
    }

    #[test]
    fn configuration_sums_reproduce_k() {
        let k = TransverseVector::new(200.0, 0.0);
        let c = two_configurations(200.0, 100.0, k).unwrap();
        assert!((c.delta1 - (7.0f64 / 8.0).acos()).abs() < 1e-15);
        for sum in [c.k1a + c.k2a, c.k1b + c.k2b] {
            assert!((sum.x - k.x).abs() < 1e-12 * k.x);
            assert!(sum.y.abs() < 1e-12 * k.x);
        }
    }

    #[test]
    fn beam_invariants() {
        let beams = fig3_beams();
        assert!((beams.first.kz() - 2026.9).abs() < 0.2);
        assert!(beams.first.shell_residual() < 1e-10);
        assert!(beams.second.shell_residual() < 1e-10);
        assert_eq!(beams.second.kz(), -beams.first.kz());
        assert!(BesselBeam::from_kz(100.0, 50.0, 2, 1, 0.0).is_err());
        assert!(BesselBeam::from_kz(100.0, 50.0, 1, 0, 0.0).is_err());
        assert!(BesselBeam::from_kz(100.0, 50.0, 1, 1, 50.0).is_err());
        assert!(BesselBeam::from_energy(300.0, 50.0, 1, 1, 0.0, 1.0).is_err());
    }

    #[test]
    fn final_longitudinal_symmetric_case() {
        let b1 = BesselBeam::from_energy(2000.0, 150.0, 1, 1, 0.0, 1.0).unwrap();
        let beams = BeamPair::balanced(b1, 150.0, 1, 1, 0.0).unwrap();
        let k1p = TransverseVector::new(300.0, 40.0);
        let k2p = TransverseVector::new(-300.0, 40.0);
        let (kz, p1, p2) = solve_final_longitudinal(&beams, k1p, k2p).unwrap();
        let e = 2000.0f64;
        let expected = (e * e - ELECTRON_MASS * ELECTRON_MASS - k1p.modulus_sq()).sqrt();
        assert!((kz - expected).abs() < 1e-10 * expected);
        assert!(p1.on_shell_residual() < 1e-10 && p2.on_shell_residual() < 1e-10);
    }

    #[test]
    fn final_longitudinal_fig3_residual() {
        let beams = fig3_beams();
        let k1p = TransverseVector::new(500.0, 0.0);
        let k = TransverseVector::new(150.0, 120.0);
        let k2p = k - k1p;
        let (_, p1, p2) = solve_final_longitudinal(&beams, k1p, k2p).unwrap();
        let w = beams.total_energy();
        assert!((p1.e + p2.e - w).abs() < 1e-12 * w);
    }

    #[test]
    fn final_longitudinal_closed_channel() {
        let beams = fig3_beams();
        let huge = TransverseVector::new(5000.0, 0.0);
        assert!(matches!(
            solve_final_longitudinal(&beams, huge, -huge),
            Err(Error::NoSolution { .. })
        ));
    }

    #[test]
    fn mandelstam_forward_limit() {
        let k1 = FourMomentum::electron(TransverseVector::new(100.0, 0.0), 2000.0);
        let k2 = FourMomentum::electron(TransverseVector::new(-30.0, 50.0), -2000.0);
        let (_, t, u) = mandelstam(&k1, &k2, &k1, &k2);
        assert!(t.abs() < 1e-6);
        assert!((u - (k1 - k2).mass_sq()).abs() < 1e-6 * u.abs());
    }

    #[test]
    fn t_difference_vanishing_cases() {
        let c = two_configurations(200.0, 100.0, TransverseVector::new(200.0, 0.0)).unwrap();
        assert_eq!(t_difference(&c, TransverseVector::new(500.0, 0.0)), 0.0);
        let edge = two_configurations(200.0, 100.0, TransverseVector::new(0.0, 300.0)).unwrap();
        assert_eq!(t_difference(&edge, TransverseVector::new(500.0, 0.0)), 0.0);
    }

    #[test]
    fn azimuth_range() {
        assert_eq!(TransverseVector::new(1.0, 0.0).azimuth(), 0.0);
        let phi = TransverseVector::new(1.0, -1e-300).azimuth();
        assert!((0.0..TAU).contains(&phi));
        assert!((TransverseVector::new(0.0, -1.0).azimuth() - 1.5 * PI).abs() < 1e-15);
    }
}
