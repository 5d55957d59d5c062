use super::*;
use crate::kinematics::BesselBeam;
use crate::ALPHA_EM;

fn fig3_beams() -> BeamPair {
    let b1 = BesselBeam::from_energy(2100.0, 200.0, 1, 1, 10.0, 1.0).unwrap();
    BeamPair::balanced(b1, 100.0, 13, 1, 5.0).unwrap()
}

fn k1p() -> TransverseVector {
    TransverseVector::new(500.0, 0.0)
}

#[test]
fn eq13_matches_helicity_sum() {
    let beams = fig3_beams().with_kappas(200.0, 100.0).unwrap();
    let w = beams.total_energy();
    for (kmod, phi) in [(150.0, 0.3), (220.0, 2.0), (280.0, -1.2), (110.0, 3.0)] {
        let k = TransverseVector::from_polar(kmod, phi);
        let config = two_configurations(200.0, 100.0, k).unwrap();
        let s = w * w - k.modulus_sq();
        let closed = j_squared_unpolarized_ur(200.0, 100.0, k, k1p(), s, 1, 13, ALPHA_EM).unwrap();
        let mut sum = 0.0;
        for h in HelicitySet::all() {
            let amp = two_path_amplitude(
                &beams,
                &config,
                k1p(),
                k - k1p(),
                h,
                AmplitudeKind::Ultrarelativistic,
                ALPHA_EM,
                None,
            )
            .unwrap();
            sum += amp.total().unwrap().norm_sqr();
        }
        let rel = (0.25 * sum - closed).abs() / closed;
        assert!(rel < 1e-12, "K = {kmod}: {rel:e}");
    }
}

#[test]
fn path_coefficients_are_pure_phases() {
    let beams = fig3_beams().with_kappas(200.0, 100.0).unwrap();
    let k = TransverseVector::from_polar(170.0, 0.8);
    let config = two_configurations(200.0, 100.0, k).unwrap();
    let h = HelicitySet::conserving(1, -1).unwrap();
    let amp = two_path_amplitude(
        &beams,
        &config,
        k1p(),
        k - k1p(),
        h,
        AmplitudeKind::Exact,
        ALPHA_EM,
        None,
    )
    .unwrap();
    assert!((amp.c_a.norm() - 1.0).abs() < 1e-15);
    assert!((amp.c_b - amp.c_a.conj()).norm() < 1e-15);
    let expected = 200.0 * 100.0 / (2.0 * config.area);
    assert!((amp.prefactor - expected).abs() < 1e-12 * expected);
}

#[test]
fn edge_amplitude_reports_singularity() {
    let beams = fig3_beams().with_kappas(200.0, 100.0).unwrap();
    let k = TransverseVector::new(300.0, 0.0);
    let config = two_configurations(200.0, 100.0, k).unwrap();
    let h = HelicitySet::conserving(1, 1).unwrap();
    let amp = two_path_amplitude(
        &beams,
        &config,
        k1p(),
        k - k1p(),
        h,
        AmplitudeKind::Ultrarelativistic,
        ALPHA_EM,
        None,
    )
    .unwrap();
    assert!(amp.edge);
    assert_eq!(amp.m_a, amp.m_b);
    assert!(matches!(amp.total(), Err(Error::EdgeSingular { .. })));
    let w = beams.total_energy();
    assert!(matches!(
        j_squared_unpolarized_ur(200.0, 100.0, k, k1p(), w * w, 1, 13, ALPHA_EM),
        Err(Error::EdgeSingular { .. })
    ));
}

#[test]
fn fully_constructive_bracket() {
    let b = ur_bracket(2.0, -3.0, -3.0, 0.0, 0.0, 0.0, 0.1, 0.0);
    let scale = (8.0 * PI * 0.1 * 2.0f64).powi(2);
    assert!((b / scale - 4.0 / 9.0).abs() < 1e-15);
}

#[test]
fn smearing_grid_properties() {
    let g = make_smearing(200.0, 0.0, 100.0, 0.0, 5).unwrap();
    assert_eq!(g.nodes.len(), 1);
    assert_eq!(g.nodes[0].weight, 1.0);
    assert_eq!(g.edge_softening, 0.0);

    let g = make_smearing(200.0, 10.0, 100.0, 5.0, 7).unwrap();
    assert_eq!(g.nodes.len(), 49);
    let total: f64 = g.nodes.iter().map(|n| n.weight).sum();
    assert!((total - 1.0).abs() < 1e-14);
    for n in &g.nodes {
        assert!(n.kappa1 >= 0.85 * 200.0 - 1e-9 && n.kappa1 <= 1.15 * 200.0 + 1e-9);
        assert!(n.kappa2 >= 0.85 * 100.0 - 1e-9 && n.kappa2 <= 1.15 * 100.0 + 1e-9);
        assert!(n.weight >= 0.0);
    }

    assert!(matches!(
        make_smearing(10.0, 4.0, 10.0, 1.0, 3),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        make_smearing(10.0, 1.0, 10.0, 1.0, 4),
        Err(Error::Domain(_))
    ));
}

#[test]
fn dsigma_vanishes_outside_support() {
    let beams = fig3_beams();
    let g = make_smearing(200.0, 10.0, 100.0, 5.0, 5).unwrap();
    let d = dsigma(
        &beams,
        k1p(),
        TransverseVector::new(0.0, 346.0),
        &g,
        Model::BornUr,
    )
    .unwrap();
    assert_eq!(d.value, 0.0);
    let d = dsigma(
        &beams,
        k1p(),
        TransverseVector::new(0.0, 40.0),
        &g,
        Model::BornExact,
    )
    .unwrap();
    assert_eq!(d.value, 0.0);
}

#[test]
fn single_node_matches_closed_form() {
    let beams = fig3_beams();
    let g = SmearingGrid::unsmeared(200.0, 100.0);
    let k = TransverseVector::from_polar(190.0, 1.1);
    let d = dsigma(&beams, k1p(), k, &g, Model::BornUr).unwrap();
    let w = beams.total_energy();
    let s = w * w - k.modulus_sq();
    let closed = j_squared_unpolarized_ur(200.0, 100.0, k, k1p(), s, 1, 13, ALPHA_EM).unwrap();
    assert!((d.value - closed).abs() <= 1e-13 * closed);
}

#[test]
fn unsmeared_edge_is_flagged() {
    let beams = fig3_beams();
    let g = SmearingGrid::unsmeared(200.0, 100.0);
    let d = dsigma(
        &beams,
        k1p(),
        TransverseVector::new(0.0, 300.0),
        &g,
        Model::BornUr,
    )
    .unwrap();
    assert_eq!(d.edge_nodes, 1);
    assert_eq!(d.value, 0.0);
}

#[test]
fn born_mirror_symmetry_is_exact_for_ur() {
    let beams = fig3_beams();
    let g = make_smearing(200.0, 10.0, 100.0, 5.0, 3).unwrap();
    let eval = DensityEvaluator::new(&beams, &g, Model::BornUr).unwrap();
    for (x, y) in [(120.0, 50.0), (-200.0, 33.3), (10.0, 250.0)] {
        let up = eval.density(k1p(), TransverseVector::new(x, y)).unwrap();
        let down = eval.density(k1p(), TransverseVector::new(x, -y)).unwrap();
        assert_eq!(up.value.to_bits(), down.value.to_bits());
    }
}

#[test]
fn born_mirror_symmetry_exact_model() {
    let beams = fig3_beams();
    let g = make_smearing(200.0, 10.0, 100.0, 5.0, 3).unwrap();
    let eval = DensityEvaluator::new(&beams, &g, Model::BornExact).unwrap();
    for (x, y) in [(120.0, 50.0), (-200.0, 33.3)] {
        let up = eval
            .density(k1p(), TransverseVector::new(x, y))
            .unwrap()
            .value;
        let down = eval
            .density(k1p(), TransverseVector::new(x, -y))
            .unwrap()
            .value;
        assert!((up - down).abs() <= 1e-12 * up, "{up} {down}");
    }
}

#[test]
fn coulomb_phase_breaks_mirror_symmetry() {
    let beams = fig3_beams();
    let g = SmearingGrid::unsmeared(200.0, 100.0);
    let model = Model::CoulombUr { alpha: 10.0 };
    let up = dsigma(&beams, k1p(), TransverseVector::new(150.0, 60.0), &g, model).unwrap();
    let down = dsigma(
        &beams,
        k1p(),
        TransverseVector::new(150.0, -60.0),
        &g,
        model,
    )
    .unwrap();
    assert!(
        (up.value - down.value).abs() > 1e-3 * up.value,
        "{up:?} {down:?}"
    );
}

#[test]
fn corrupted_phase_breaks_born_symmetry() {
    let beams = fig3_beams();
    let g = SmearingGrid::unsmeared(200.0, 100.0);
    let eval = DensityEvaluator::new(&beams, &g, Model::BornUr)
        .unwrap()
        .with_hook(Some(TestHook::CorruptPathPhase));
    let up = eval
        .density(k1p(), TransverseVector::new(120.0, 80.0))
        .unwrap();
    let down = eval
        .density(k1p(), TransverseVector::new(120.0, -80.0))
        .unwrap();
    assert!(up.value != down.value);
}

#[test]
fn model_tags_round_trip() {
    for tag in ["born-ur", "born-exact"] {
        assert_eq!(Model::from_tag(tag, None).unwrap().tag(), tag);
    }
    assert_eq!(
        Model::from_tag("coulomb-exact", Some(0.5)).unwrap(),
        Model::CoulombExact { alpha: 0.5 }
    );
    assert!(Model::from_tag("coulomb-ur", None).is_err());
    assert!(Model::from_tag("mystery", None).is_err());
}

#[test]
fn oracle_matches_closed_form_at_interior_point() {
    let beams = fig3_beams().with_kappas(200.0, 100.0).unwrap();
    let k = TransverseVector::from_polar(210.0, 0.7);
    let config = two_configurations(200.0, 100.0, k).unwrap();
    let k2p = k - k1p();
    for kind in [AmplitudeKind::Ultrarelativistic, AmplitudeKind::Exact] {
        let h = HelicitySet::conserving(1, -1).unwrap();
        let closed = two_path_amplitude(&beams, &config, k1p(), k2p, h, kind, ALPHA_EM, None)
            .unwrap()
            .total()
            .unwrap();
        let oracle = brute_force_j(&beams, k, k1p(), k2p, h, kind, 2.0).unwrap();
        let rel = (oracle.value - closed).norm() / closed.norm();
        assert!(
            rel < 1e-4,
            "{kind:?}: rel = {rel:e}, {:?} vs {closed}",
            oracle.value
        );
    }
}
