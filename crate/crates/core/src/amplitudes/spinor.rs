//! Dirac spinors in the helicity basis, Dirac representation.
//!
//! Two-component helicity states are `χ_λ(θ, φ) = exp(-iφσz/2) exp(-iθσy/2) ξ_λ`:
//!
//! ```text
//! χ_+ = ( e^{-iφ/2} cos θ/2,  e^{+iφ/2} sin θ/2)
//! χ_- = (-e^{-iφ/2} sin θ/2,  e^{+iφ/2} cos θ/2)
//! ```
//!
//! and `u(p, λ) = (sqrt(E+m) χ_λ, 2λ sqrt(E-m) χ_λ)`, normalised to `ū u = 2m`.
//! The half-angle phases are not 2π-periodic in φ; callers pass the azimuth
//! explicitly whenever it has to match a vortex phase `e^{imφ}` on the same
//! branch.

use num_complex::Complex64;

use crate::kinematics::FourMomentum;
use crate::ELECTRON_MASS;

/// Upper and lower two-component blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracSpinor {
    pub upper: [Complex64; 2],
    pub lower: [Complex64; 2],
}

pub(crate) fn helicity_two_spinor(helicity: i8, theta: f64, phi: f64) -> [Complex64; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    let left = Complex64::from_polar(1.0, -0.5 * phi);
    let right = Complex64::from_polar(1.0, 0.5 * phi);
    if helicity > 0 {
        [left * c, right * s]
    } else {
        [-left * s, right * c]
    }
}

impl DiracSpinor {
    /// Positive-energy helicity spinor for `p`, quantised along `p`, with the
    /// azimuth taken from `phi` rather than from `p`.
    pub fn with_azimuth(p: &FourMomentum, helicity: i8, phi: f64) -> Self {
        let theta = p.polar_angle();
        let chi = helicity_two_spinor(helicity, theta, phi);
        let up = (p.e + ELECTRON_MASS).sqrt();
        let down = (p.e - ELECTRON_MASS).max(0.0).sqrt() * f64::from(helicity.signum());
        Self {
            upper: [chi[0] * up, chi[1] * up],
            lower: [chi[0] * down, chi[1] * down],
        }
    }

    pub fn new(p: &FourMomentum, helicity: i8) -> Self {
        Self::with_azimuth(p, helicity, p.transverse().signed_azimuth())
    }

    /// `ū ψ`.
    pub fn bar_dot(&self, other: &Self) -> Complex64 {
        dot2(&self.upper, &other.upper) - dot2(&self.lower, &other.lower)
    }
}

fn dot2(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// `a† σ_k b` for k = x, y, z.
fn sigma_sandwich(a: &[Complex64; 2], b: &[Complex64; 2]) -> [Complex64; 3] {
    let (a0, a1) = (a[0].conj(), a[1].conj());
    let i = Complex64::i();
    [
        a0 * b[1] + a1 * b[0],
        i * (a1 * b[0] - a0 * b[1]),
        a0 * b[0] - a1 * b[1],
    ]
}

/// Vector current `ū(out) γ^μ u(in)` as a contravariant four-vector.
pub fn current(out: &DiracSpinor, inc: &DiracSpinor) -> [Complex64; 4] {
    let j0 = dot2(&out.upper, &inc.upper) + dot2(&out.lower, &inc.lower);
    let x = sigma_sandwich(&out.upper, &inc.lower);
    let y = sigma_sandwich(&out.lower, &inc.upper);
    [j0, x[0] + y[0], x[1] + y[1], x[2] + y[2]]
}

/// Minkowski contraction of two complex four-vectors (no conjugation).
pub fn contract(a: &[Complex64; 4], b: &[Complex64; 4]) -> Complex64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::TransverseVector;

    #[test]
    fn normalisation_and_forward_current() {
        let p = FourMomentum::electron(TransverseVector::new(120.0, -70.0), 900.0);
        for h in [1i8, -1] {
            let u = DiracSpinor::new(&p, h);
            let norm = u.bar_dot(&u);
            assert!((norm.re - 2.0 * ELECTRON_MASS).abs() < 1e-9 && norm.im.abs() < 1e-9);
            let j = current(&u, &u);
            let expect = [p.e, p.px, p.py, p.pz];
            for mu in 0..4 {
                assert!((j[mu].re - 2.0 * expect[mu]).abs() < 1e-9, "mu = {mu}");
                assert!(j[mu].im.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn helicity_eigenstate() {
        let p = FourMomentum::electron(TransverseVector::new(-40.0, 310.0), -700.0);
        let (px, py, pz) = (p.px, p.py, p.pz);
        let n = p.momentum();
        for h in [1i8, -1] {
            let chi = helicity_two_spinor(h, p.polar_angle(), p.transverse().signed_azimuth());
            // (σ·p̂) χ = h χ
            let i = Complex64::i();
            let s0 = chi[0] * pz + chi[1] * (px - i * py);
            let s1 = chi[0] * (px + i * py) - chi[1] * pz;
            assert!((s0 / n - chi[0] * f64::from(h)).norm() < 1e-12);
            assert!((s1 / n - chi[1] * f64::from(h)).norm() < 1e-12);
        }
    }
}
