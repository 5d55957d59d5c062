//! Direct numerical evaluation of the twisted amplitude as an integral over
//! the initial transverse momenta, used to check the two-path closed form.
//!
//! The transverse delta function is eliminated with `k2 = K - k1`; the two
//! ring delta functions become normalised Gaussians of width `ε`, and the
//! remaining integral over `k1 = (r, φ)` is done adaptively. Gaussian
//! smoothing shifts the result by `O(ε²)`, removed by Richardson
//! extrapolation over `ε, ε/2, ε/4`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::amplitudes::{moller_exact_table, moller_ur, Azimuths, HelicitySet};
use crate::kinematics::{solve_final_longitudinal, BeamPair, FourMomentum, TransverseVector};
use crate::quadrature::{integrate, QuadOptions};
use crate::vortex::AmplitudeKind;
use crate::{Error, Result, ALPHA_EM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    /// Extrapolated amplitude.
    pub value: Complex64,
    /// Raw integrals at `ε, ε/2, ε/4`.
    pub raw: [Complex64; 3],
    /// Difference between the two highest Richardson levels.
    pub error: f64,
    pub evaluations: usize,
}

const WIDTHS: f64 = 9.0;

/// Ring-smoothed integral at one width.
#[allow(clippy::too_many_arguments)]
fn smoothed(
    beams: &BeamPair,
    k: TransverseVector,
    k1p: TransverseVector,
    k2p: TransverseVector,
    h: HelicitySet,
    kind: AmplitudeKind,
    epsilon: f64,
    evaluations: &mut usize,
) -> Result<Complex64> {
    let (kappa1, kappa2) = beams.kappas();
    let m1 = beams.first.m();
    let m2 = beams.second.m();
    let kmod = k.modulus();
    let phi_k = k.signed_azimuth();
    let norm = 1.0 / ((2.0 * PI).sqrt() * epsilon);
    let gauss = |x: f64| norm * (-0.5 * (x / epsilon).powi(2)).exp();

    let w = beams.total_energy();
    let s = w * w - k.modulus_sq();
    let phi1p = k1p.signed_azimuth();
    let phi2p = k2p.signed_azimuth();
    let finals = match kind {
        AmplitudeKind::Exact => Some(solve_final_longitudinal(beams, k1p, k2p)?),
        AmplitudeKind::Ultrarelativistic => None,
    };
    let kz1 = beams.first.kz();
    let kz2 = beams.second.kz();

    let amplitude = |k1: TransverseVector, k2: TransverseVector, phi1: f64, phi2: f64| match &finals
    {
        None => {
            let t = -(k1 - k1p).modulus_sq();
            moller_ur(s, t, phi1, phi1p, phi2, phi2p, h, ALPHA_EM).map(|m| m.0)
        }
        Some((_, p1, p2)) => {
            let az = Azimuths {
                phi1,
                phi2,
                phi1p,
                phi2p,
            };
            let q1 = FourMomentum::electron(k1, kz1);
            let q2 = FourMomentum::electron(k2, kz2);
            moller_exact_table(&q1, &q2, p1, p2, &az, ALPHA_EM).map(|t| t[h.index()])
        }
    };

    let inner_opts = QuadOptions {
        rel_tol: 1e-11,
        abs_tol: 0.0,
        max_intervals: 4000,
    };
    let outer_opts = QuadOptions {
        rel_tol: 1e-10,
        abs_tol: 0.0,
        max_intervals: 4000,
    };
    let failure = std::cell::RefCell::new(None::<Error>);
    let count = std::cell::Cell::new(0usize);

    let inner = |r: f64| -> Complex64 {
        if failure.borrow().is_some() {
            return Complex64::default();
        }
        let radial = gauss(r - kappa1);
        // azimuths of k1 where |K - k1| = κ2
        let mut breaks = vec![phi_k - PI, phi_k, phi_k + PI];
        if kmod > 0.0 {
            let c = (r * r + kmod * kmod - kappa2 * kappa2) / (2.0 * r * kmod);
            if c.abs() < 1.0 {
                let d = c.acos();
                breaks = vec![phi_k - PI, phi_k - d, phi_k, phi_k + d, phi_k + PI];
            }
        }
        let f = |phi: f64| -> Complex64 {
            let k1 = TransverseVector::from_polar(r, phi);
            let k2 = k - k1;
            let weight = radial * gauss(k2.modulus() - kappa2) * r;
            if weight == 0.0 {
                return Complex64::default();
            }
            let phi2 = k2.signed_azimuth();
            match amplitude(k1, k2, phi, phi2) {
                Ok(m) => m * Complex64::from_polar(weight, m1 * phi - m2 * phi2),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    Complex64::default()
                }
            }
        };
        match integrate(f, &breaks, inner_opts) {
            Ok(res) => {
                count.set(count.get() + res.evaluations);
                res.value
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::default()
            }
        }
    };

    let lo = (kappa1 - WIDTHS * epsilon).max(0.0);
    let hi = kappa1 + WIDTHS * epsilon;
    let outer = integrate(inner, &[lo, kappa1, hi], outer_opts);
    *evaluations += count.get();
    if let Some(e) = failure.into_inner() {
        return Err(match e {
            Error::Tolerance(msg) => Error::Tolerance(format!(
                "ring-smoothed integral at K = ({}, {}), epsilon = {epsilon}: {msg}",
                k.x, k.y
            )),
            other => other,
        });
    }
    Ok(outer?.value)
}

/// Richardson-extrapolated ring integral for one helicity set.
/// `epsilon` is the widest Gaussian; `ε/2` and `ε/4` are also evaluated.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_j(
    beams: &BeamPair,
    k: TransverseVector,
    k1p: TransverseVector,
    k2p: TransverseVector,
    h: HelicitySet,
    kind: AmplitudeKind,
    epsilon: f64,
) -> Result<OracleResult> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    let mut evaluations = 0;
    let mut raw = [Complex64::default(); 3];
    for (j, slot) in raw.iter_mut().enumerate() {
        let eps = epsilon / f64::from(1u32 << j);
        *slot = smoothed(beams, k, k1p, k2p, h, kind, eps, &mut evaluations)?;
    }
    let r1 = (raw[1] * 4.0 - raw[0]) / 3.0;
    let r1_fine = (raw[2] * 4.0 - raw[1]) / 3.0;
    let value = (r1_fine * 16.0 - r1) / 15.0;
    Ok(OracleResult {
        value,
        raw,
        error: (value - r1_fine).norm(),
        evaluations,
    })
}
