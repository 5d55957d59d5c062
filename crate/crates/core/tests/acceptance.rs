//! Acceptance suite: one numbered criterion per function, each printing a
//! single `[PASS]`/`[FAIL]` line with the measured values next to the
//! pinned tolerances. Runs without the libtest harness so the lines always
//! show; `cargo test --test acceptance -- 5 7` runs a subset.

use std::f64::consts::PI;
use std::time::Instant;

use vortex_scatter::montecarlo::{
    chi_square, expected_map, expected_radial, rate_estimate, reconstruct, refine_minimum,
    sample_events, significant_minima, Binning, K1pSpec, MINIMUM_WINDOW,
};
use vortex_scatter::observables::{
    asymmetry_aperp, fringe_map, fringe_phase, radial_profile, ring_asymmetry, sign_changes,
    AperpRegion, GridSpec, QuadratureSpec,
};
use vortex_scatter::output::{fringe_csv, meta_text, write_events, Facts};
use vortex_scatter::validate::{
    check_identity, check_moller, check_oracle, check_ur_emergence, interior_points,
    mirror_residual, reference_beams, reference_k1p, reference_smearing, support_residual, Check,
};
use vortex_scatter::vortex::{AmplitudeKind, DensityEvaluator, Model, SmearingGrid};
use vortex_scatter::{config::RunConfig, Result, ALPHA_EM};

// criterion 1
const ORACLE_POINTS: usize = 20;
const ORACLE_EPSILON_KEV: f64 = 2.0;
const ORACLE_REL_TOL: f64 = 1e-3;
// criterion 2
const IDENTITY_POINTS: usize = 50;
const IDENTITY_REL_TOL: f64 = 1e-10;
// criterion 3
const MOLLER_POINTS: usize = 1000;
const MOLLER_REL_TOL: f64 = 1e-8;
const MOLLER_SEED: u64 = 2016;
// criterion 4
const MAP_CELLS: usize = 400;
const MAP_HALF_WIDTH_KEV: f64 = 360.0;
const SMEARING_NODES: usize = 5;
// criterion 5
const EXPECTED_SIGN_CHANGES: usize = 13;
const PROFILE_SAMPLES: usize = 4000;
// criterion 6
const APERP_WINDOW: (f64, f64) = (1e-4, 1e-3);
const RATIO_TOL: f64 = 0.05;
const ALPHA_EXAGGERATED: f64 = 10.0;
const VISIBLE_ASYMMETRY: f64 = 1e-2;
// criterion 7
const MC_EVENTS: usize = 1_000_000;
const MC_SEED: u64 = 20_160_000;
const MC_SIGMAS: f64 = 3.0;
const CHI2_WINDOW: (f64, f64) = (0.8, 1.2);
const MIN_EXPECTED: f64 = 5.0;
// the 90-bin radial histogram has too few degrees of freedom for the
// window (sd of chi2/dof is 0.15 there), so it gets a two-sided z gate
const RADIAL_Z_MAX: f64 = 3.29;
const SE_SCALING_TOL: f64 = 0.05;
// criterion 8
const RATE_WINDOW: (f64, f64) = (1e2, 1e4);
// criterion 9
const THREADS: [usize; 2] = [1, 4];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        detail: detail.into(),
    })
}

fn check_text(c: &Check) -> String {
    format!(
        "{}: {:.3e} (tol {:.0e}, {})",
        c.name, c.residual, c.tolerance, c.detail
    )
}

fn smearing() -> SmearingGrid {
    reference_smearing(SMEARING_NODES).expect("reference smearing")
}

fn criterion_1() -> Result<Outcome> {
    let points = interior_points(ORACLE_POINTS);
    let ur = check_oracle(
        &points,
        ORACLE_EPSILON_KEV,
        AmplitudeKind::Ultrarelativistic,
    )?;
    let exact = check_oracle(&points, ORACLE_EPSILON_KEV, AmplitudeKind::Exact)?;
    let passed = ur.passed && exact.passed && ur.tolerance == ORACLE_REL_TOL;
    outcome(
        passed,
        format!("{}; {}", check_text(&ur), check_text(&exact)),
    )
}

fn criterion_2() -> Result<Outcome> {
    let c = check_identity(&interior_points(IDENTITY_POINTS))?;
    outcome(c.passed && c.tolerance == IDENTITY_REL_TOL, check_text(&c))
}

fn criterion_3() -> Result<Outcome> {
    let m = check_moller(MOLLER_POINTS, MOLLER_SEED)?;
    let e = check_ur_emergence()?;
    let passed = m.passed && m.tolerance == MOLLER_REL_TOL && e.passed;
    outcome(passed, format!("{}; {}", check_text(&m), check_text(&e)))
}

fn criterion_4() -> Result<Outcome> {
    let g = smearing();
    let grid = GridSpec::square(MAP_HALF_WIDTH_KEV, MAP_CELLS)?;
    let map = fringe_map(&reference_beams(), reference_k1p(), grid, Model::BornUr, &g)?;
    let support = g.support();
    let outside = support_residual(&map, support);
    let (mirror, bitwise) = mirror_residual(&map);
    let inside = map.values.iter().filter(|&&v| v > 0.0).count();
    // the exact-amplitude model is mirror symmetric to rounding only
    let small = GridSpec::square(MAP_HALF_WIDTH_KEV, 60)?;
    let exact = fringe_map(
        &reference_beams(),
        reference_k1p(),
        small,
        Model::BornExact,
        &g,
    )?;
    let (exact_mirror, _) = mirror_residual(&exact);
    let passed = outside == 0.0 && bitwise && inside > 0 && exact_mirror <= 1e-12;
    outcome(
        passed,
        format!(
            "{MAP_CELLS}x{MAP_CELLS} born-ur: max outside [{:.1}, {:.1}] keV = {outside:e}, nonzero cells = {inside}, \
             mirror bitwise = {bitwise} (max rel diff {mirror:e}); born-exact 60x60 mirror rel diff {exact_mirror:.1e} (tol 1e-12)",
            support.0, support.1
        ),
    )
}

fn criterion_5() -> Result<Outcome> {
    let beams = reference_beams();
    let profile = radial_profile(
        &beams,
        reference_k1p(),
        Model::BornUr,
        &SmearingGrid::unsmeared(200.0, 100.0),
        0.0,
        PROFILE_SAMPLES,
    )?;
    let cos_phi = sign_changes(profile.iter().map(|p| p.phase_factor));
    let full = sign_changes(profile.iter().map(|p| p.interference));
    let sweep =
        fringe_phase(200.0, 100.0, 100.0, 1, 13)? - fringe_phase(200.0, 100.0, 300.0, 1, 13)?;
    let predicted = (sweep.abs() / PI).round() as usize;
    outcome(
        cos_phi == EXPECTED_SIGN_CHANGES && predicted == EXPECTED_SIGN_CHANGES,
        format!(
            "cos(Phi) sign changes = {cos_phi}, phase sweep = {:.6} pi -> {predicted}, expected {EXPECTED_SIGN_CHANGES}; \
             with the cos(d1) cos(d2) factor: {full} (cos d2 crosses zero once)",
            sweep / PI
        ),
    )
}

fn aperp(model: Model, g: &SmearingGrid) -> Result<vortex_scatter::observables::Asymmetry> {
    asymmetry_aperp(
        &reference_beams(),
        AperpRegion::Fixed(reference_k1p()),
        model,
        g,
        QuadratureSpec::default(),
    )
}

fn criterion_6() -> Result<Outcome> {
    let g = smearing();
    let mut notes = Vec::new();

    let born = aperp(Model::BornUr, &g)?;
    let born_exact = asymmetry_aperp(
        &reference_beams(),
        AperpRegion::Fixed(reference_k1p()),
        Model::BornExact,
        &reference_smearing(3)?,
        QuadratureSpec {
            n_radial: 64,
            n_azimuthal: 128,
            refine: true,
        },
    )?;
    let born_ok = born.value.abs() <= born.error.max(1e-14)
        && born_exact.value.abs() <= born_exact.error.max(1e-14);
    notes.push(format!(
        "born-ur {:.1e} (err {:.1e}), born-exact {:.1e} (err {:.1e})",
        born.value, born.error, born_exact.value, born_exact.error
    ));

    let physical = aperp(Model::CoulombUr { alpha: ALPHA_EM }, &g)?;
    let magnitude_ok = (APERP_WINDOW.0..=APERP_WINDOW.1).contains(&physical.value.abs());
    notes.push(format!(
        "|A_perp(alpha_em)| = {:.3e} +- {:.1e}, window [{:.0e}, {:.0e}]",
        physical.value.abs(),
        physical.error,
        APERP_WINDOW.0,
        APERP_WINDOW.1
    ));
    // fringe-resolved: each ring is asymmetric, alternating fringes cancel
    let eval = DensityEvaluator::new(&reference_beams(), &g, Model::CoulombUr { alpha: ALPHA_EM })?;
    let rings: Vec<f64> = (0..40)
        .map(|i| ring_asymmetry(&eval, reference_k1p(), 105.0 + 190.0 * i as f64 / 39.0, 512))
        .collect::<Result<_>>()?;
    let ring_max = rings.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let ring_median = {
        let mut v: Vec<f64> = rings.iter().map(|a| a.abs()).collect();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    notes.push(format!(
        "ring asymmetries |a(K)|: median {ring_median:.1e}, max {ring_max:.1e}, sign changes {}",
        sign_changes(rings.iter().copied())
    ));

    let mut ratio_ok = true;
    for alpha in [ALPHA_EM, 0.05] {
        let a1 = aperp(Model::CoulombUr { alpha }, &g)?;
        let a2 = aperp(Model::CoulombUr { alpha: 2.0 * alpha }, &g)?;
        let ratio = a2.value / a1.value;
        ratio_ok &= (ratio - 2.0).abs() <= 2.0 * RATIO_TOL;
        notes.push(format!("A(2a)/A(a) at a={alpha:.4} = {ratio:.5}"));
    }

    let model = Model::CoulombUr {
        alpha: ALPHA_EXAGGERATED,
    };
    let strong = aperp(model, &g)?;
    let grid = GridSpec::square(MAP_HALF_WIDTH_KEV, MAP_CELLS)?;
    let map = fringe_map(&reference_beams(), reference_k1p(), grid, model, &g)?;
    let (mirror, _) = mirror_residual(&map);
    let weighted = map.sin_weighted_sum();
    let norm: f64 = map.values.iter().sum();
    let sign_ok = weighted.signum() == strong.value.signum() && mirror >= VISIBLE_ASYMMETRY;
    notes.push(format!(
        "alpha=10: quadrature {:.3e} +- {:.1e}, map sin-weighted {:.3e}, max up-down diff {mirror:.2} of peak",
        strong.value,
        strong.error,
        weighted / norm
    ));

    outcome(
        born_ok && magnitude_ok && ratio_ok && sign_ok,
        format!(
            "born zero {}, magnitude {}, linearity {}, alpha=10 sign {} :: {}",
            word(born_ok),
            word(magnitude_ok),
            word(ratio_ok),
            word(sign_ok),
            notes.join("; ")
        ),
    )
}

fn word(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.1}")).collect();
    format!("[{}]", parts.join(" "))
}

fn minima_of(values: &[f64], binning: &Binning) -> Vec<f64> {
    significant_minima(values, MINIMUM_WINDOW)
        .into_iter()
        .map(|b| binning.radial_position(refine_minimum(values, b)))
        .collect()
}

/// Wilson-Hilferty normal deviate of a chi-square value.
fn chi2_z(chi2: f64, dof: usize) -> f64 {
    let k = dof as f64;
    let v = 2.0 / (9.0 * k);
    ((chi2 / k).cbrt() - (1.0 - v)) / v.sqrt()
}

fn criterion_7() -> Result<Outcome> {
    let g = smearing();
    let beams = reference_beams();
    let k1p = reference_k1p();
    let binning = Binning {
        slices: vec![(400.0, 600.0)],
        map: GridSpec::square(350.0, 50)?,
        radial_range: (80.0, 350.0),
        radial_bins: 90,
    };
    let mut notes = Vec::new();
    let mut passed = true;

    for model in [
        Model::CoulombUr {
            alpha: ALPHA_EXAGGERATED,
        },
        Model::BornUr,
    ] {
        let sample = sample_events(&beams, K1pSpec::Fixed(k1p), model, &g, MC_EVENTS, MC_SEED)?;
        let rec = reconstruct(&sample.events, &binning)?;
        let slice = &rec.slices[0];
        let quad = aperp(model, &g)?;
        let combined = rec.aperp_error.hypot(quad.error);
        let pull = (rec.aperp - quad.value).abs() / combined;
        let a_ok = pull <= MC_SIGMAS;

        let eval = DensityEvaluator::new(&beams, &g, model)?;
        let exp_map = expected_map(&eval, k1p.modulus(), &binning, 512, 1024)?;
        let exp_radial = expected_radial(&eval, k1p.modulus(), &binning, 8192, 64)?;
        let (c2m, dofm) = chi_square(&slice.map, &exp_map, rec.events, MIN_EXPECTED);
        let (c2r, dofr) = chi_square(&slice.radial, &exp_radial, rec.events, MIN_EXPECTED);
        let (rm, rr) = (c2m / dofm as f64, c2r / dofr as f64);
        let in_window = |x: f64| (CHI2_WINDOW.0..=CHI2_WINDOW.1).contains(&x);
        let zr = chi2_z(c2r, dofr);
        let chi_ok = in_window(rm) && zr.abs() <= RADIAL_Z_MAX;

        let analytic = minima_of(&exp_radial, &binning);
        let counts: Vec<f64> = slice.radial.iter().map(|&c| c as f64).collect();
        let observed = minima_of(&counts, &binning);
        let width = binning.radial_width();
        // every analytic minimum has a reconstructed one within a bin; only
        // gated for Born, the alpha=10 profile has one flat-bottomed minimum
        let matched = analytic
            .iter()
            .filter(|a| observed.iter().any(|o| (*a - o).abs() <= width))
            .count();
        let minima_ok = !model.is_born() || (!analytic.is_empty() && matched == analytic.len());

        let mut se_ok = true;
        let mut se_text = Vec::new();
        if !model.is_born() {
            let reference = rec.aperp_error * (MC_EVENTS as f64).sqrt();
            for n in [10_000, 100_000] {
                let sub = reconstruct(&sample.events[..n], &binning)?;
                let scaled = sub.aperp_error * (n as f64).sqrt();
                se_ok &= (scaled / reference - 1.0).abs() <= SE_SCALING_TOL;
                se_text.push(format!("{scaled:.4}"));
            }
            se_text.push(format!("{reference:.4}"));
        }

        passed &= a_ok && chi_ok && minima_ok && se_ok;
        notes.push(format!(
            "{}: A_hat {:.3e} +- {:.1e} vs quadrature {:.3e} +- {:.1e} (pull {pull:.2}), chi2/dof map {rm:.3} ({dofm}), \
             radial {rr:.3} ({dofr}, z {zr:.2}), analytic minima {} matched {matched} within {width} keV \
             (reconstructed {}) {}, acceptance {:.3}{}",
            model,
            rec.aperp,
            rec.aperp_error,
            quad.value,
            quad.error,
            fmt_list(&analytic),
            fmt_list(&observed),
            if model.is_born() { word(minima_ok) } else { "not gated" },
            sample.report.acceptance_rate,
            if se_text.is_empty() {
                String::new()
            } else {
                format!(", SE*sqrt(N) at 1e4/1e5/1e6 = {} {}", se_text.join("/"), word(se_ok))
            }
        ));
    }
    outcome(passed, notes.join("; "))
}

fn criterion_8() -> Result<Outcome> {
    let r = rate_estimate(1e-6, 1.0)?;
    outcome(
        (RATE_WINDOW.0..=RATE_WINDOW.1).contains(&r.events_per_second),
        format!(
            "P = 1e-6, 1 nA -> {:.3e} crossings/s, {:.3e} events/s, window [{:.0e}, {:.0e}]",
            r.crossings_per_second, r.events_per_second, RATE_WINDOW.0, RATE_WINDOW.1
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    let dir = tempfile::tempdir().map_err(|e| vortex_scatter::Error::io("tempdir", e))?;
    let g = smearing();
    let model = Model::CoulombUr {
        alpha: ALPHA_EXAGGERATED,
    };
    let mut config = RunConfig::default();
    config.set_model("coulomb-ur", Some(ALPHA_EXAGGERATED));
    let mut runs = Vec::new();
    for threads in THREADS {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        let run = pool.install(|| -> Result<(String, String, Vec<u8>, u64)> {
            let grid = GridSpec::square(MAP_HALF_WIDTH_KEV, 120)?;
            let map = fringe_map(&reference_beams(), reference_k1p(), grid, model, &g)?;
            let meta = meta_text(
                "fringe-map",
                &Facts::new().with("edge_flags", map.edge_flags as i64),
                &config,
            );
            let sample = sample_events(
                &reference_beams(),
                K1pSpec::Fixed(reference_k1p()),
                model,
                &g,
                50_000,
                9,
            )?;
            let path = dir.path().join(format!("events_{threads}.ndjson"));
            write_events(&path, &sample.events)?;
            let bytes = std::fs::read(&path).map_err(|e| vortex_scatter::Error::io(&path, e))?;
            let a = asymmetry_aperp(
                &reference_beams(),
                AperpRegion::Fixed(reference_k1p()),
                model,
                &g,
                QuadratureSpec {
                    n_radial: 64,
                    n_azimuthal: 128,
                    refine: true,
                },
            )?;
            Ok((fringe_csv(&map), meta, bytes, a.value.to_bits()))
        })?;
        runs.push(run);
    }
    let (a, b) = (&runs[0], &runs[1]);
    let same = [a.0 == b.0, a.1 == b.1, a.2 == b.2, a.3 == b.3];
    outcome(
        same.iter().all(|&s| s),
        format!(
            "threads {:?}: fringe CSV {} ({} bytes), meta {}, events NDJSON {} ({} bytes), A_perp bits {}",
            THREADS,
            word(same[0]),
            a.0.len(),
            word(same[1]),
            word(same[2]),
            a.2.len(),
            word(same[3])
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Result<Outcome>);

const CRITERIA: [Criterion; 9] = [
    (1, "oracle equivalence", criterion_1),
    (2, "unpolarized identity", criterion_2),
    (3, "amplitude oracle", criterion_3),
    (4, "support and symmetry", criterion_4),
    (5, "fringe count", criterion_5),
    (6, "Coulomb asymmetry", criterion_6),
    (7, "Monte Carlo round trip", criterion_7),
    (8, "rate arithmetic", criterion_8),
    (9, "determinism", criterion_9),
];

fn main() {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for (n, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "[{}] criterion {n} ({name}, {:.1} s): {detail}",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if !passed {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
