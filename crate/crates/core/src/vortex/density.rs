use crate::amplitudes::coulomb_phase;
use crate::kinematics::{two_configurations, BeamPair, TransverseVector};
use crate::vortex::{
    is_edge, ur_bracket, AmplitudeKind, Density, Model, PathAmplitudes, SmearingGrid, TestHook,
};
use crate::{Result, ALPHA_EM};

#[derive(Debug, Clone)]
struct Node {
    beams: BeamPair,
    kappa1: f64,
    kappa2: f64,
    weight: f64,
    k_min: f64,
    k_max: f64,
    w_sq: f64,
}

/// One node's contribution before the Jacobian: the bracket
/// `(1/4) Σ_h |c_a M_a + c_b M_b|²` and `sin ψ = 2Δ / κ1κ2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeTerm {
    pub bracket: f64,
    pub sin_psi: f64,
    pub edge: bool,
}

/// Precomputed per-node beams for repeated density evaluations.
#[derive(Debug, Clone)]
pub struct DensityEvaluator {
    model: Model,
    nodes: Vec<Node>,
    epsilon_sq: f64,
    two_m: (i32, i32),
    hook: Option<TestHook>,
}

impl DensityEvaluator {
    pub fn new(beams: &BeamPair, smearing: &SmearingGrid, model: Model) -> Result<Self> {
        let nodes = smearing
            .nodes
            .iter()
            .map(|n| {
                let node_beams = beams.with_kappas(n.kappa1, n.kappa2)?;
                let w = node_beams.total_energy();
                Ok(Node {
                    beams: node_beams,
                    kappa1: n.kappa1,
                    kappa2: n.kappa2,
                    weight: n.weight,
                    k_min: (n.kappa1 - n.kappa2).abs(),
                    k_max: n.kappa1 + n.kappa2,
                    w_sq: w * w,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            nodes,
            epsilon_sq: smearing.edge_softening.powi(2),
            two_m: (beams.first.two_m(), beams.second.two_m()),
            hook: None,
        })
    }

    #[doc(hidden)]
    pub fn with_hook(mut self, hook: Option<TestHook>) -> Self {
        self.hook = hook;
        self
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_kappas(&self, i: usize) -> (f64, f64) {
        (self.nodes[i].kappa1, self.nodes[i].kappa2)
    }

    pub fn node_weight(&self, i: usize) -> f64 {
        self.nodes[i].weight
    }

    pub fn epsilon_sq(&self) -> f64 {
        self.epsilon_sq
    }

    /// Softened Jacobian `1 / (sin²ψ + ε²)`.
    pub fn jacobian(&self, sin_psi: f64) -> f64 {
        1.0 / (sin_psi * sin_psi + self.epsilon_sq)
    }

    /// Node `i` at `(k1', K)`; `None` when `|K|` is outside the node annulus.
    pub fn node_term(
        &self,
        i: usize,
        k1p: TransverseVector,
        k: TransverseVector,
    ) -> Result<Option<NodeTerm>> {
        let node = &self.nodes[i];
        let kmod = k.modulus();
        if kmod < node.k_min || kmod > node.k_max {
            return Ok(None);
        }
        let config = two_configurations(node.kappa1, node.kappa2, k)?;
        let sin_psi = 2.0 * config.area / (node.kappa1 * node.kappa2);
        if is_edge(config.area, node.kappa1, node.kappa2) {
            return Ok(Some(NodeTerm {
                bracket: 0.0,
                sin_psi,
                edge: true,
            }));
        }
        let bracket = match self.model.kind() {
            AmplitudeKind::Ultrarelativistic => {
                let t_a = -(config.k1a - k1p).modulus_sq();
                let t_b = -(config.k1b - k1p).modulus_sq();
                let mut dzeta = 0.0;
                if let Some(alpha) = self.model.phase_alpha() {
                    dzeta = coulomb_phase(t_a, alpha)? - coulomb_phase(t_b, alpha)?;
                }
                if self.hook == Some(TestHook::CorruptPathPhase) {
                    dzeta += 0.5 * (t_a - t_b).signum();
                }
                let phase = f64::from(self.two_m.0) * config.delta1
                    + f64::from(self.two_m.1) * config.delta2;
                let s = node.w_sq - k.modulus_sq();
                ur_bracket(
                    s,
                    t_a,
                    t_b,
                    phase,
                    config.delta1,
                    config.delta2,
                    ALPHA_EM,
                    dzeta,
                )
            }
            AmplitudeKind::Exact => PathAmplitudes::new(
                &node.beams,
                &config,
                k1p,
                k - k1p,
                AmplitudeKind::Exact,
                ALPHA_EM,
                self.model.phase_alpha(),
                self.hook,
            )?
            .unpolarized_bracket(),
        };
        Ok(Some(NodeTerm {
            bracket,
            sin_psi,
            edge: false,
        }))
    }

    /// Weighted sum over nodes of `jacobian × bracket`.
    pub fn density(&self, k1p: TransverseVector, k: TransverseVector) -> Result<Density> {
        let mut out = Density::default();
        for i in 0..self.nodes.len() {
            if let Some(term) = self.node_term(i, k1p, k)? {
                if term.edge {
                    out.edge_nodes += 1;
                } else {
                    out.value += self.nodes[i].weight * self.jacobian(term.sin_psi) * term.bracket;
                }
            }
        }
        Ok(out)
    }
}
