//! Coincidence-event generation from the cross-section density, the
//! event-rate arithmetic, and reconstruction of `K` maps and `A_perp` from
//! event samples.

mod reconstruct;

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kinematics::{BeamPair, TransverseVector};
use crate::observables::{radial_cos_psi, radial_v_max};
use crate::vortex::{DensityEvaluator, Model, SmearingGrid};
use crate::{Error, Result, ELEMENTARY_CHARGE};

pub use reconstruct::{
    chi_square, expected_map, expected_radial, reconstruct, refine_minimum, significant_minima,
    Binning, Reconstruction, SliceResult, MINIMUM_WINDOW,
};

/// Events per RNG stream; chunk `c` draws from stream `c`.
pub const CHUNK_EVENTS: usize = 1024;

/// Envelope safety factor over the pre-scan maximum.
pub const ENVELOPE_FACTOR: f64 = 1.5;

/// Pre-scan resolution per node in `(v, φ)`.
pub const PRESCAN_POINTS: usize = 100;

/// Where an event's RNG draws came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub seed: u64,
    pub stream: u64,
    /// ChaCha word position at the start of the accepted proposal.
    pub counter: u64,
}

/// One coincidence event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub k1p: TransverseVector,
    pub k2p: TransverseVector,
    /// `k1p + k2p`.
    pub k: TransverseVector,
    pub weight: f64,
    pub lineage: Lineage,
}

impl EventRecord {
    pub fn new(
        k1p: TransverseVector,
        k2p: TransverseVector,
        weight: f64,
        lineage: Lineage,
    ) -> Self {
        Self {
            k1p,
            k2p,
            k: k1p + k2p,
            weight,
            lineage,
        }
    }
}

/// Which `k1'` values events are generated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum K1pSpec {
    Fixed(TransverseVector),
    /// Fixed `|k1'|`, azimuth uniform on `[0, 2π)`.
    Ring {
        magnitude: f64,
    },
}

impl K1pSpec {
    pub fn magnitude(&self) -> f64 {
        match *self {
            K1pSpec::Fixed(v) => v.modulus(),
            K1pSpec::Ring { magnitude } => magnitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub events: usize,
    pub proposals: u64,
    pub acceptance_rate: f64,
    /// Largest `density / envelope` seen among proposals.
    pub max_envelope_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventSample {
    pub events: Vec<EventRecord>,
    pub report: SampleReport,
}

/// `seed`-keyed ChaCha8 generator positioned on `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct NodeEnvelope {
    cumulative: f64,
    envelope: f64,
}

/// Rejection sampler over the per-node `(v, φ_rel)` coordinates, in which
/// the softened Jacobian is flat: a node is chosen with probability
/// proportional to `w κ1κ2 × envelope`, a point uniformly, and the point is
/// kept with probability `bracket / envelope`.
struct Sampler<'a> {
    eval: &'a DensityEvaluator,
    spec: K1pSpec,
    nodes: Vec<NodeEnvelope>,
    v_max: f64,
    epsilon_sq: f64,
}

impl<'a> Sampler<'a> {
    fn new(eval: &'a DensityEvaluator, spec: K1pSpec) -> Result<Self> {
        let epsilon_sq = eval.epsilon_sq();
        let v_max = radial_v_max(epsilon_sq);
        let k1p_local = TransverseVector::new(spec.magnitude(), 0.0);
        let maxima = (0..eval.node_count())
            .into_par_iter()
            .map(|n| {
                let mut max = 0.0f64;
                for r in 0..PRESCAN_POINTS {
                    let v = -v_max + (r as f64 + 0.5) * 2.0 * v_max / PRESCAN_POINTS as f64;
                    let kmod = node_radius(eval, n, radial_cos_psi(epsilon_sq, v));
                    for l in 0..PRESCAN_POINTS {
                        let phi = -PI + (l as f64 + 0.5) * TAU / PRESCAN_POINTS as f64;
                        let k = TransverseVector::from_polar(kmod, phi);
                        if let Some(t) = eval.node_term(n, k1p_local, k)? {
                            if !t.edge {
                                max = max.max(t.bracket);
                            }
                        }
                    }
                }
                Ok(max)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut cumulative = 0.0;
        let mut nodes = Vec::with_capacity(maxima.len());
        for (n, max) in maxima.into_iter().enumerate() {
            let (kappa1, kappa2) = eval.node_kappas(n);
            let envelope = ENVELOPE_FACTOR * max;
            cumulative += eval.node_weight(n) * kappa1 * kappa2 * envelope;
            nodes.push(NodeEnvelope {
                cumulative,
                envelope,
            });
        }
        if !(cumulative > 0.0) {
            return Err(Error::Inconsistent(
                "density pre-scan found no positive value; nothing to sample".into(),
            ));
        }
        Ok(Self {
            eval,
            spec,
            nodes,
            v_max,
            epsilon_sq,
        })
    }

    fn pick_node(&self, u: f64) -> usize {
        let total = self.nodes.last().map_or(0.0, |n| n.cumulative);
        let target = u * total;
        self.nodes
            .partition_point(|n| n.cumulative <= target)
            .min(self.nodes.len() - 1)
    }

    /// One chunk of events from its own stream.
    fn chunk(&self, seed: u64, stream: u64, count: usize) -> Result<(Vec<EventRecord>, u64, f64)> {
        let mut rng = stream_rng(seed, stream);
        let mut events = Vec::with_capacity(count);
        let mut proposals = 0u64;
        let mut worst = 0.0f64;
        let magnitude = self.spec.magnitude();
        let k1p_local = TransverseVector::new(magnitude, 0.0);
        while events.len() < count {
            let counter = rng.get_word_pos() as u64;
            proposals += 1;
            let n = self.pick_node(rng.random::<f64>());
            let v = self.v_max * (2.0 * rng.random::<f64>() - 1.0);
            let phi_rel = PI * (2.0 * rng.random::<f64>() - 1.0);
            let phi1p = match self.spec {
                K1pSpec::Fixed(k1p) => k1p.signed_azimuth(),
                K1pSpec::Ring { .. } => TAU * rng.random::<f64>(),
            };
            let u: f64 = rng.random();
            let kmod = node_radius(self.eval, n, radial_cos_psi(self.epsilon_sq, v));
            let k_local = TransverseVector::from_polar(kmod, phi_rel);
            let bracket = match self.eval.node_term(n, k1p_local, k_local)? {
                Some(t) if !t.edge => t.bracket,
                _ => 0.0,
            };
            let envelope = self.nodes[n].envelope;
            let ratio = bracket / envelope;
            worst = worst.max(ratio);
            if ratio > 1.0 {
                let k = k_local.rotated(phi1p);
                return Err(Error::Envelope {
                    kx: k.x,
                    ky: k.y,
                    value: bracket,
                    envelope,
                });
            }
            if u < ratio {
                let (k1p, k) = match self.spec {
                    K1pSpec::Fixed(k1p) => (k1p, k_local.rotated(phi1p)),
                    K1pSpec::Ring { .. } => (
                        TransverseVector::from_polar(magnitude, phi1p),
                        k_local.rotated(phi1p),
                    ),
                };
                events.push(EventRecord::new(
                    k1p,
                    k - k1p,
                    1.0,
                    Lineage {
                        seed,
                        stream,
                        counter,
                    },
                ));
            }
        }
        Ok((events, proposals, worst))
    }
}

fn node_radius(eval: &DensityEvaluator, n: usize, cos_psi: f64) -> f64 {
    let (kappa1, kappa2) = eval.node_kappas(n);
    (kappa1 * kappa1 + kappa2 * kappa2 + 2.0 * kappa1 * kappa2 * cos_psi)
        .max(0.0)
        .sqrt()
}

/// Unweighted events distributed as the smeared density over `K` (and,
/// for a ring, uniformly in the azimuth of `k1'`). Chunks of
/// [`CHUNK_EVENTS`] run in parallel, each on its own RNG stream, so the
/// output depends only on `seed` and `n_events`.
pub fn sample_events(
    beams: &BeamPair,
    k1p: K1pSpec,
    model: Model,
    smearing: &SmearingGrid,
    n_events: usize,
    seed: u64,
) -> Result<EventSample> {
    if n_events == 0 {
        return Err(Error::Domain("n_events must be at least 1".into()));
    }
    if !(k1p.magnitude() > 0.0) {
        return Err(Error::Domain("|k1'| must be positive".into()));
    }
    let eval = DensityEvaluator::new(beams, smearing, model)?;
    let sampler = Sampler::new(&eval, k1p)?;
    let n_chunks = n_events.div_ceil(CHUNK_EVENTS);
    let chunks = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_EVENTS.min(n_events - c * CHUNK_EVENTS);
            sampler.chunk(seed, c as u64, count)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut events = Vec::with_capacity(n_events);
    let mut proposals = 0;
    let mut worst = 0.0f64;
    for (chunk, p, w) in chunks {
        events.extend(chunk);
        proposals += p;
        worst = worst.max(w);
    }
    Ok(EventSample {
        report: SampleReport {
            events: events.len(),
            proposals,
            acceptance_rate: events.len() as f64 / proposals as f64,
            max_envelope_ratio: worst,
        },
        events,
    })
}

/// Event-rate arithmetic for a collider-style setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Effective cross section in units of the focal area (the density is
    /// in arbitrary units, so the interaction probability is the input).
    pub sigma_tw: f64,
    /// Focal area, 1 in the same units.
    pub focal_area: f64,
    pub probability_per_crossing: f64,
    pub crossings_per_second: f64,
    pub events_per_second: f64,
}

/// Rate for interaction probability `P` per crossing with an explicit
/// crossing rate.
pub fn rate_with_crossings(probability: f64, crossings_per_second: f64) -> Result<RateEstimate> {
    if !(probability >= 0.0 && probability <= 1.0) {
        return Err(Error::Domain(format!(
            "probability {probability} must lie in [0, 1]"
        )));
    }
    if !(crossings_per_second > 0.0 && crossings_per_second.is_finite()) {
        return Err(Error::Domain(format!(
            "crossings per second {crossings_per_second} must be positive"
        )));
    }
    Ok(RateEstimate {
        sigma_tw: probability,
        focal_area: 1.0,
        probability_per_crossing: probability,
        crossings_per_second,
        events_per_second: probability * crossings_per_second,
    })
}

/// Rate for probability `P` at beam current `current_na`: one crossing
/// attempt per electron, so crossings/s = I / e.
pub fn rate_estimate(probability: f64, current_na: f64) -> Result<RateEstimate> {
    if !(current_na > 0.0 && current_na.is_finite()) {
        return Err(Error::Domain(format!(
            "current {current_na} nA must be positive"
        )));
    }
    rate_with_crossings(probability, current_na * 1e-9 / ELEMENTARY_CHARGE)
}
