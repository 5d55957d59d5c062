//! Shared fixtures for the benchmarks: the reference beams and a few
//! representative final states.

use vortex_scatter::kinematics::{solve_final_longitudinal, two_configurations, FourMomentum};
use vortex_scatter::validate::{reference_beams, reference_k1p, reference_smearing};
use vortex_scatter::{BeamPair, SmearingGrid, TransverseVector};

pub struct Fixture {
    pub beams: BeamPair,
    pub k1p: TransverseVector,
    pub smearing: SmearingGrid,
}

pub fn fixture(nodes: usize) -> Fixture {
    Fixture {
        beams: reference_beams(),
        k1p: reference_k1p(),
        smearing: reference_smearing(nodes).expect("reference smearing"),
    }
}

/// On-shell momenta of configuration `a` at `K`, central cones.
pub fn plane_wave_event(k: TransverseVector) -> [FourMomentum; 4] {
    let beams = reference_beams()
        .with_kappas(200.0, 100.0)
        .expect("central node");
    let config = two_configurations(200.0, 100.0, k).expect("K inside the annulus");
    let k1p = reference_k1p();
    let (_, p1, p2) = solve_final_longitudinal(&beams, k1p, k - k1p).expect("above threshold");
    [
        beams.first.component(config.k1a),
        beams.second.component(config.k2a),
        p1,
        p2,
    ]
}
