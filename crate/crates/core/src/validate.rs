//! Self-checks run by `vortex-scatter validate` and reused by the test
//! suites: each one compares a fast code path against an independent
//! evaluation and reports the worst residual against a fixed tolerance.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;

use crate::amplitudes::{
    moller_exact, moller_exact_unpolarized, moller_unpolarized_closed_form, moller_ur,
};
use crate::kinematics::{
    solve_final_longitudinal, two_configurations, BeamPair, BesselBeam, FourMomentum,
    TransverseVector,
};
use crate::montecarlo::stream_rng;
use crate::observables::{
    asymmetry_aperp, fringe_map_with_hook, AperpRegion, FringeMap, GridSpec, QuadratureSpec,
};
use crate::vortex::{
    brute_force_j, j_squared_unpolarized_ur, make_smearing, two_path_amplitude, AmplitudeKind,
    Model, SmearingGrid, TestHook,
};
use crate::{HelicitySet, Result, ALPHA_EM, ELECTRON_MASS};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn within(name: &str, residual: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            detail,
        }
    }

    /// `check=… residual=… tol=… status=PASS|FAIL detail=…`.
    pub fn line(&self) -> String {
        format!(
            "check={} residual={:e} tol={:e} status={} detail={}",
            self.name,
            self.residual,
            self.tolerance,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out: String = self.checks.iter().map(|c| c.line() + "\n").collect();
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!(
            "summary checks={} failed={} status={}\n",
            self.checks.len(),
            failed,
            if failed == 0 { "PASS" } else { "FAIL" }
        ));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub oracle_points: usize,
    pub oracle_epsilon: f64,
    pub identity_points: usize,
    pub moller_points: usize,
    /// Cells per side of the symmetry map.
    pub map_size: usize,
    pub smearing_nodes: usize,
    pub seed: u64,
    pub hook: Option<TestHook>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            oracle_points: 3,
            oracle_epsilon: 2.0,
            identity_points: 50,
            moller_points: 1000,
            map_size: 64,
            smearing_nodes: 3,
            seed: 7,
            hook: None,
        }
    }
}

/// Reference beams: 2.1 MeV first beam, cones 200 and 100 keV with 5%
/// widths, `2m = 1, 13`, balanced frame.
pub fn reference_beams() -> BeamPair {
    let first = BesselBeam::from_energy(2100.0, 200.0, 1, 1, 10.0, 1.0).expect("reference beam");
    BeamPair::balanced(first, 100.0, 13, 1, 5.0).expect("reference beam")
}

pub fn reference_k1p() -> TransverseVector {
    TransverseVector::new(500.0, 0.0)
}

pub fn reference_smearing(nodes: usize) -> Result<SmearingGrid> {
    make_smearing(200.0, 10.0, 100.0, 5.0, nodes)
}

/// `n` points spread over the interior of the central annulus
/// `100 < |K| < 300` (10 keV clear of each edge) at golden-angle azimuths.
pub fn interior_points(n: usize) -> Vec<TransverseVector> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let k = 110.0 + 180.0 * (i as f64 + 0.5) / n as f64;
            TransverseVector::from_polar(k, (i as f64 * golden) % TAU - PI)
        })
        .collect()
}

fn rel(a: num_complex::Complex64, b: num_complex::Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Brute-force ring integral against the two-path closed form, unsmeared
/// central node, all helicity-conserving channels.
pub fn check_oracle(
    points: &[TransverseVector],
    epsilon: f64,
    kind: AmplitudeKind,
) -> Result<Check> {
    let beams = reference_beams().with_kappas(200.0, 100.0)?;
    let k1p = reference_k1p();
    let worst = points
        .par_iter()
        .map(|&k| {
            let config = two_configurations(200.0, 100.0, k)?;
            let mut worst = 0.0f64;
            for h in HelicitySet::all_conserving() {
                let closed =
                    two_path_amplitude(&beams, &config, k1p, k - k1p, h, kind, ALPHA_EM, None)?
                        .total()?;
                let oracle = brute_force_j(&beams, k, k1p, k - k1p, h, kind, epsilon)?;
                worst = worst.max(rel(oracle.value, closed));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let name = match kind {
        AmplitudeKind::Ultrarelativistic => "oracle_ur",
        AmplitudeKind::Exact => "oracle_exact",
    };
    Ok(Check::within(
        name,
        worst,
        1e-3,
        format!("points={} channels=4 epsilon_kev={epsilon}", points.len()),
    ))
}

/// Closed-form unpolarized `|J|²` against the helicity sum of squared
/// two-path amplitudes.
pub fn check_identity(points: &[TransverseVector]) -> Result<Check> {
    let beams = reference_beams().with_kappas(200.0, 100.0)?;
    let k1p = reference_k1p();
    let w = beams.total_energy();
    let mut worst = 0.0f64;
    for &k in points {
        let config = two_configurations(200.0, 100.0, k)?;
        let s = w * w - k.modulus_sq();
        let closed = j_squared_unpolarized_ur(200.0, 100.0, k, k1p, s, 1, 13, ALPHA_EM)?;
        let mut sum = 0.0;
        for h in HelicitySet::all() {
            let amp = two_path_amplitude(
                &beams,
                &config,
                k1p,
                k - k1p,
                h,
                AmplitudeKind::Ultrarelativistic,
                ALPHA_EM,
                None,
            )?;
            sum += amp.total()?.norm_sqr();
        }
        worst = worst.max((0.25 * sum - closed).abs() / closed);
    }
    Ok(Check::within(
        "unpolarized_identity",
        worst,
        1e-10,
        format!("points={}", points.len()),
    ))
}

fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
    let c: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi = TAU * rng.random::<f64>();
    let s = (1.0 - c * c).sqrt();
    [s * phi.cos(), s * phi.sin(), c]
}

/// Random elastic point: back-to-back in the centre-of-mass frame with
/// `|p|` log-uniform on 10 keV to 10 MeV, scattering angle kept away from
/// the `t` and `u` poles (`|cos θ| <= 0.95`), then boosted by up to `0.9c`
/// in a random direction. Returns the momenta and the exact `(s, t, u)`.
pub fn random_moller_point(rng: &mut impl Rng) -> ([FourMomentum; 4], (f64, f64, f64)) {
    let p = 10f64.powf(1.0 + 3.0 * rng.random::<f64>());
    let n1 = random_unit(rng);
    let (n2, cos) = loop {
        let n2 = random_unit(rng);
        let cos = n1[0] * n2[0] + n1[1] * n2[1] + n1[2] * n2[2];
        if cos.abs() <= 0.95 {
            break (n2, cos);
        }
    };
    let e = (ELECTRON_MASS * ELECTRON_MASS + p * p).sqrt();
    let mom = |n: [f64; 3], sign: f64| {
        FourMomentum::new(e, sign * p * n[0], sign * p * n[1], sign * p * n[2])
    };
    let dir = random_unit(rng);
    let speed = 0.9 * rng.random::<f64>();
    let beta = [speed * dir[0], speed * dir[1], speed * dir[2]];
    let moms = [mom(n1, 1.0), mom(n1, -1.0), mom(n2, 1.0), mom(n2, -1.0)].map(|q| q.boosted(beta));
    let s = 4.0 * e * e;
    let t = -2.0 * p * p * (1.0 - cos);
    let u = -2.0 * p * p * (1.0 + cos);
    (moms, (s, t, u))
}

/// Spin-averaged exact amplitudes against the textbook `(s, t, u)` formula.
pub fn check_moller(n: usize, seed: u64) -> Result<Check> {
    let mut rng = stream_rng(seed, 0);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let ([k1, k2, k1p, k2p], (s, t, u)) = random_moller_point(&mut rng);
        let spin = moller_exact_unpolarized(&k1, &k2, &k1p, &k2p, ALPHA_EM)?;
        let text = moller_unpolarized_closed_form(s, t, u, ALPHA_EM, ELECTRON_MASS);
        worst = worst.max((spin - text).abs() / text);
    }
    Ok(Check::within(
        "moller_textbook",
        worst,
        1e-8,
        format!("points={n} seed={seed}"),
    ))
}

/// Worst relative deviation of the exact conserving amplitudes from the
/// small-angle form `8πα s_eff / t` with `s_eff = s - 2m²`, at the
/// reference final state with every transverse momentum scaled by `scale`.
pub fn ur_deviation(scale: f64) -> Result<f64> {
    let (kappa1, kappa2) = (200.0 * scale, 100.0 * scale);
    let beams = reference_beams().with_kappas(kappa1, kappa2)?;
    let k = TransverseVector::from_polar(210.0 * scale, 0.7);
    let k1pt = reference_k1p() * scale;
    let config = two_configurations(kappa1, kappa2, k)?;
    let k1 = beams.first.component(config.k1a);
    let k2 = beams.second.component(config.k2a);
    let (_, k1p, k2p) = solve_final_longitudinal(&beams, k1pt, k - k1pt)?;
    let s_eff = (k1 + k2).mass_sq() - 2.0 * ELECTRON_MASS * ELECTRON_MASS;
    let t = (k1 - k1p).mass_sq();
    let az = |q: &FourMomentum| q.transverse().signed_azimuth();
    let mut worst = 0.0f64;
    for h in HelicitySet::all_conserving() {
        let exact = moller_exact(&k1, &k2, &k1p, &k2p, h, ALPHA_EM)?;
        let ur = moller_ur(s_eff, t, az(&k1), az(&k1p), az(&k2), az(&k2p), h, ALPHA_EM)?;
        worst = worst.max(rel(exact.0, ur.0));
    }
    Ok(worst)
}

/// The small-angle form emerges: deviation shrinks at each of three
/// successive halvings of all transverse momenta. Residual is the largest
/// ratio of successive deviations, which must stay below one.
pub fn check_ur_emergence() -> Result<Check> {
    let devs = (0..4)
        .map(|i| ur_deviation(0.5f64.powi(i)))
        .collect::<Result<Vec<f64>>>()?;
    let ratio = devs.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let detail = devs
        .iter()
        .map(|d| format!("{d:.3e}"))
        .collect::<Vec<_>>()
        .join("/");
    let mut check = Check::within("ur_emergence", ratio, 1.0, format!("deviations={detail}"));
    check.passed = ratio < 1.0;
    Ok(check)
}

/// Worst `|v(Ky) - v(-Ky)| / max` over mirrored cells, and whether every
/// pair matches bit for bit. Needs a grid symmetric in `Ky`.
pub fn mirror_residual(map: &FringeMap) -> (f64, bool) {
    let g = &map.grid;
    let scale = map.max().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    let mut exact = true;
    for j in 0..g.ny {
        let jm = g.mirror_row(j);
        for i in 0..g.nx {
            let (a, b) = (map.value(i, j), map.value(i, jm));
            exact &= a.to_bits() == b.to_bits();
            worst = worst.max((a - b).abs() / scale);
        }
    }
    (worst, exact)
}

/// Largest value at a cell centre outside the smeared annulus.
pub fn support_residual(map: &FringeMap, support: (f64, f64)) -> f64 {
    let g = &map.grid;
    let mut worst = 0.0f64;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.cell(i, j).modulus();
            if k < support.0 || k > support.1 {
                worst = worst.max(map.value(i, j).abs());
            }
        }
    }
    worst
}

/// Born fringe map: zero outside the annulus and bitwise symmetric under
/// `Ky -> -Ky`. The hook is applied here only.
pub fn check_born_symmetry(
    size: usize,
    smearing: &SmearingGrid,
    hook: Option<TestHook>,
) -> Result<Vec<Check>> {
    let grid = GridSpec::square(360.0, size)?;
    let map = fringe_map_with_hook(
        &reference_beams(),
        reference_k1p(),
        grid,
        Model::BornUr,
        smearing,
        hook,
    )?;
    let outside = support_residual(&map, smearing.support());
    let (mirror, exact) = mirror_residual(&map);
    let mut sym = Check::within(
        "born_mirror",
        mirror,
        0.0,
        format!("grid={size}x{size} bitwise={exact}"),
    );
    sym.passed = exact;
    Ok(vec![
        Check::within("born_support", outside, 0.0, format!("grid={size}x{size}")),
        sym,
    ])
}

/// Born `A_perp` vanishes within its quadrature error.
pub fn check_born_aperp(smearing: &SmearingGrid, spec: QuadratureSpec) -> Result<Check> {
    let a = asymmetry_aperp(
        &reference_beams(),
        AperpRegion::Fixed(reference_k1p()),
        Model::BornUr,
        smearing,
        spec,
    )?;
    let tol = a.error.max(1e-14);
    Ok(Check::within(
        "born_aperp_zero",
        a.value.abs(),
        tol,
        format!(
            "grid={}x{} error={:e}",
            spec.n_radial, spec.n_azimuthal, a.error
        ),
    ))
}

/// Full suite.
pub fn run(opts: &ValidateOptions) -> Result<ValidationReport> {
    let smearing = reference_smearing(opts.smearing_nodes)?;
    let points = interior_points(opts.oracle_points);
    let mut checks = vec![
        check_oracle(
            &points,
            opts.oracle_epsilon,
            AmplitudeKind::Ultrarelativistic,
        )?,
        check_oracle(
            &points[..1.min(points.len())],
            opts.oracle_epsilon,
            AmplitudeKind::Exact,
        )?,
        check_identity(&interior_points(opts.identity_points))?,
        check_moller(opts.moller_points, opts.seed)?,
        check_ur_emergence()?,
    ];
    checks.extend(check_born_symmetry(opts.map_size, &smearing, opts.hook)?);
    checks.push(check_born_aperp(
        &smearing,
        QuadratureSpec {
            n_radial: 64,
            n_azimuthal: 128,
            refine: true,
        },
    )?);
    Ok(ValidationReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_points_are_on_shell_and_conserving() {
        let mut rng = stream_rng(3, 0);
        for _ in 0..50 {
            let ([k1, k2, k1p, k2p], (s, t, u)) = random_moller_point(&mut rng);
            for q in [k1, k2, k1p, k2p] {
                assert!(q.on_shell_residual() < 1e-10);
            }
            let m2 = ELECTRON_MASS * ELECTRON_MASS;
            assert!(((s + t + u) - 4.0 * m2).abs() < 1e-9 * s);
            assert!(((k1 + k2).mass_sq() - s).abs() < 1e-8 * s);
        }
    }

    #[test]
    fn moller_and_identity_checks_pass() {
        assert!(check_moller(200, 1).unwrap().passed);
        assert!(check_identity(&interior_points(10)).unwrap().passed);
    }

    #[test]
    fn ur_emergence_is_monotone() {
        let c = check_ur_emergence().unwrap();
        assert!(c.passed, "{}", c.line());
    }

    #[test]
    fn hook_fails_symmetry_only() {
        let g = reference_smearing(1).unwrap();
        let clean = check_born_symmetry(24, &g, None).unwrap();
        assert!(clean.iter().all(|c| c.passed));
        let bad = check_born_symmetry(24, &g, Some(TestHook::CorruptPathPhase)).unwrap();
        assert!(bad[0].passed);
        assert!(!bad[1].passed);
    }
}
