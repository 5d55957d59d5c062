//! Run configuration: a TOML file with one table per concern. Every table
//! is optional and falls back to the reference parameter set (2.1 MeV first
//! beam, cones of 200 and 100 keV with 5% widths, `m1 = 1/2`, `m2 = 13/2`,
//! `|k1'| = 500 keV`).
//!
//! ```toml
//! [beam1]
//! energy_mev = 2.1      # or kz_kev, never both
//! kappa_kev = 200.0
//! two_m = 1             # 2m, odd
//! helicity = 1
//! sigma_kev = 10.0
//!
//! [beam2]               # no energy/kz: kz2 = -kz1
//! kappa_kev = 100.0
//! two_m = 13
//! sigma_kev = 5.0
//!
//! [final]
//! k1p_kev = 500.0
//! k1p_phi_rad = 0.0
//!
//! [model]
//! name = "coulomb-ur"   # born-ur | coulomb-ur | born-exact | coulomb-exact
//! alpha = 10.0          # required by the coulomb models
//!
//! [grid]
//! half_width_kev = 360.0  # or kx_min_kev, kx_max_kev, ky_min_kev, ky_max_kev
//! nx = 400
//! ny = 400
//!
//! [smearing]
//! nodes = 5             # per beam, odd
//! # edge_softening = 0.4
//!
//! [quadrature]
//! n_radial = 256
//! n_azimuthal = 512
//! refine = true
//! region = "fixed"      # or "ring" with ring_points
//!
//! [mc]
//! seed = 1
//! events = 100000
//! k1p_mode = "fixed"    # or "ring"
//!
//! [scan]
//! parameter = "alpha"   # two_m1 two_m2 kappa1 kappa2 k1p_mag alpha
//! start = 0.01
//! stop = 0.1
//! steps = 10
//!
//! [reconstruct]
//! input = "events.ndjson"
//! slices = [[400.0, 600.0]]
//! map_half_width_kev = 350.0
//! map_bins = 50
//! radial_min_kev = 80.0
//! radial_max_kev = 350.0
//! radial_bins = 90
//!
//! [rate]
//! probability = 1e-6
//! current_na = 1.0
//!
//! [output]
//! path = "fringe.csv"
//! ```
//!
//! Unknown keys are errors. A metadata sidecar written by the tool is also
//! accepted as a config: its `[config]` table is used.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::kinematics::{BeamPair, BesselBeam, TransverseVector};
use crate::montecarlo::{Binning, K1pSpec};
use crate::observables::{AperpRegion, GridSpec, QuadratureSpec};
use crate::vortex::{make_smearing, Model, SmearingGrid};
use crate::{Error, Result};

/// Parameters accepted by [`RunConfig::with_parameter`].
pub const SCAN_PARAMETERS: [&str; 6] = ["two_m1", "two_m2", "kappa1", "kappa2", "k1p_mag", "alpha"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_mev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kz_kev: Option<f64>,
    pub kappa_kev: f64,
    pub two_m: i32,
    #[serde(default = "default_helicity")]
    pub helicity: i8,
    #[serde(default)]
    pub sigma_kev: f64,
}

fn default_helicity() -> i8 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FinalSection {
    pub k1p_kev: f64,
    pub k1p_phi_rad: f64,
}

impl Default for FinalSection {
    fn default() -> Self {
        Self {
            k1p_kev: 500.0,
            k1p_phi_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            name: "born-ur".into(),
            alpha: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width_kev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kx_min_kev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kx_max_kev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ky_min_kev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ky_max_kev: Option<f64>,
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            half_width_kev: None,
            kx_min_kev: None,
            kx_max_kev: None,
            ky_min_kev: None,
            ky_max_kev: None,
            nx: 400,
            ny: 400,
        }
    }
}

/// Half-width used when the grid gives no bounds; covers the smeared
/// annulus of the reference beams (outer edge 345 keV).
pub const DEFAULT_HALF_WIDTH: f64 = 360.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmearingSection {
    pub nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_softening: Option<f64>,
}

impl Default for SmearingSection {
    fn default() -> Self {
        Self {
            nodes: 5,
            edge_softening: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSection {
    pub n_radial: usize,
    pub n_azimuthal: usize,
    pub refine: bool,
    pub region: String,
    pub ring_points: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        Self {
            n_radial: q.n_radial,
            n_azimuthal: q.n_azimuthal,
            refine: q.refine,
            region: "fixed".into(),
            ring_points: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub seed: u64,
    pub events: usize,
    pub k1p_mode: String,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            seed: 1,
            events: 100_000,
            k1p_mode: "fixed".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl ScanSection {
    /// Equally spaced values from `start` to `stop` inclusive.
    pub fn values(&self) -> Result<Vec<f64>> {
        if !SCAN_PARAMETERS.contains(&self.parameter.as_str()) {
            return Err(Error::config(
                "scan.parameter",
                format!(
                    "'{}' is not one of {}",
                    self.parameter,
                    SCAN_PARAMETERS.join(", ")
                ),
            ));
        }
        if self.steps == 0 {
            return Err(Error::config("scan.steps", "must be at least 1"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::config("scan.start", "start and stop must be finite"));
        }
        if self.steps == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / n)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconstructSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub slices: Vec<[f64; 2]>,
    pub map_half_width_kev: f64,
    pub map_bins: usize,
    pub radial_min_kev: f64,
    pub radial_max_kev: f64,
    pub radial_bins: usize,
}

impl Default for ReconstructSection {
    fn default() -> Self {
        Self {
            input: None,
            slices: vec![[400.0, 600.0]],
            map_half_width_kev: 350.0,
            map_bins: 50,
            radial_min_kev: 80.0,
            radial_max_kev: 350.0,
            radial_bins: 90,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateSection {
    pub probability: f64,
    pub current_na: f64,
    /// Overrides the one-crossing-per-electron estimate from the current.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossings_per_second: Option<f64>,
}

impl Default for RateSection {
    fn default() -> Self {
        Self {
            probability: 1e-6,
            current_na: 1.0,
            crossings_per_second: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub beam1: BeamSection,
    pub beam2: BeamSection,
    #[serde(rename = "final")]
    pub final_state: FinalSection,
    pub model: ModelSection,
    pub grid: GridSection,
    pub smearing: SmearingSection,
    pub quadrature: QuadratureSection,
    pub mc: McSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    pub reconstruct: ReconstructSection,
    pub rate: RateSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            beam1: BeamSection {
                energy_mev: Some(2.1),
                kz_kev: None,
                kappa_kev: 200.0,
                two_m: 1,
                helicity: 1,
                sigma_kev: 10.0,
            },
            beam2: BeamSection {
                energy_mev: None,
                kz_kev: None,
                kappa_kev: 100.0,
                two_m: 13,
                helicity: 1,
                sigma_kev: 5.0,
            },
            final_state: FinalSection::default(),
            model: ModelSection::default(),
            grid: GridSection::default(),
            smearing: SmearingSection::default(),
            quadrature: QuadratureSection::default(),
            mc: McSection::default(),
            scan: None,
            reconstruct: ReconstructSection::default(),
            rate: RateSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Everything a run needs, checked and built.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub beams: BeamPair,
    pub k1p: TransverseVector,
    pub model: Model,
    pub grid: GridSpec,
    pub smearing: SmearingGrid,
    pub quadrature: QuadratureSpec,
    pub region: AperpRegion,
    pub k1p_spec: K1pSpec,
    pub seed: u64,
    pub events: usize,
    pub binning: Binning,
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(field, format!("{v} is not a finite number")))
    }
}

fn beam_error(section: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Domain(msg) => Error::config(section, msg),
        other => other,
    }
}

/// Largest seed a config file can hold.
pub const MAX_SEED: u64 = i64::MAX as u64;

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config(field_of(&e), e.message().to_string()))?;
        // a metadata sidecar carries the config in its own table
        let table = match table.get("config") {
            Some(toml::Value::Table(inner)) if table.contains_key("version") => inner.clone(),
            _ => table,
        };
        table
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(field_of(&e), e.message().to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    /// Replace the model, keeping `alpha` unless one is given.
    pub fn set_model(&mut self, name: &str, alpha: Option<f64>) {
        self.model.name = name.to_string();
        if alpha.is_some() {
            self.model.alpha = alpha;
        }
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let b1 = &self.beam1;
        let sigma1 = finite("beam1.sigma_kev", b1.sigma_kev)?;
        let first = match (b1.energy_mev, b1.kz_kev) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "beam1",
                    "give energy_mev or kz_kev, not both",
                ))
            }
            (None, None) => {
                return Err(Error::config(
                    "beam1",
                    "one of energy_mev or kz_kev is required",
                ))
            }
            (Some(e), None) => BesselBeam::from_energy(
                1e3 * finite("beam1.energy_mev", e)?,
                b1.kappa_kev,
                b1.two_m,
                b1.helicity,
                sigma1,
                1.0,
            ),
            (None, Some(kz)) => BesselBeam::from_kz(
                finite("beam1.kz_kev", kz)?,
                b1.kappa_kev,
                b1.two_m,
                b1.helicity,
                sigma1,
            ),
        }
        .map_err(beam_error("beam1"))?;

        let b2 = &self.beam2;
        let sigma2 = finite("beam2.sigma_kev", b2.sigma_kev)?;
        let second = match (b2.energy_mev, b2.kz_kev) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "beam2",
                    "give energy_mev or kz_kev, not both",
                ))
            }
            (None, None) => {
                BesselBeam::from_kz(-first.kz(), b2.kappa_kev, b2.two_m, b2.helicity, sigma2)
            }
            (Some(e), None) => BesselBeam::from_energy(
                1e3 * finite("beam2.energy_mev", e)?,
                b2.kappa_kev,
                b2.two_m,
                b2.helicity,
                sigma2,
                -1.0,
            ),
            (None, Some(kz)) => BesselBeam::from_kz(
                finite("beam2.kz_kev", kz)?,
                b2.kappa_kev,
                b2.two_m,
                b2.helicity,
                sigma2,
            ),
        }
        .map_err(beam_error("beam2"))?;
        let beams = BeamPair::new(first, second).map_err(beam_error("beam2"))?;

        let f = &self.final_state;
        let k1p_mag = finite("final.k1p_kev", f.k1p_kev)?;
        if !(k1p_mag > 0.0) {
            return Err(Error::config("final.k1p_kev", "must be positive"));
        }
        let k1p =
            TransverseVector::from_polar(k1p_mag, finite("final.k1p_phi_rad", f.k1p_phi_rad)?);

        let model = Model::from_tag(&self.model.name, self.model.alpha)?;
        if let Some(a) = self.model.alpha {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::config(
                    "model.alpha",
                    format!("{a} must be finite and non-negative"),
                ));
            }
        }

        let grid = self.grid_spec()?;

        let s = &self.smearing;
        let mut smearing = make_smearing(b1.kappa_kev, sigma1, b2.kappa_kev, sigma2, s.nodes)
            .map_err(|e| match e {
                Error::Domain(msg) => Error::config("smearing", msg),
                other => other,
            })?;
        if let Some(eps) = s.edge_softening {
            if !(eps.is_finite() && eps >= 0.0) {
                return Err(Error::config(
                    "smearing.edge_softening",
                    "must be finite and non-negative",
                ));
            }
            smearing = smearing.with_edge_softening(eps);
        }

        let q = &self.quadrature;
        if q.n_radial == 0 || q.n_azimuthal == 0 {
            return Err(Error::config(
                "quadrature",
                "n_radial and n_azimuthal must be at least 1",
            ));
        }
        let quadrature = QuadratureSpec {
            n_radial: q.n_radial,
            n_azimuthal: q.n_azimuthal,
            refine: q.refine,
        };
        let region = match q.region.as_str() {
            "fixed" => AperpRegion::Fixed(k1p),
            "ring" => {
                if q.ring_points == 0 {
                    return Err(Error::config(
                        "quadrature.ring_points",
                        "must be at least 1",
                    ));
                }
                AperpRegion::Ring {
                    magnitude: k1p_mag,
                    n_phi: q.ring_points,
                }
            }
            other => {
                return Err(Error::config(
                    "quadrature.region",
                    format!("'{other}' is not 'fixed' or 'ring'"),
                ))
            }
        };

        let mc = &self.mc;
        let k1p_spec = match mc.k1p_mode.as_str() {
            "fixed" => K1pSpec::Fixed(k1p),
            "ring" => K1pSpec::Ring { magnitude: k1p_mag },
            other => {
                return Err(Error::config(
                    "mc.k1p_mode",
                    format!("'{other}' is not 'fixed' or 'ring'"),
                ))
            }
        };
        if mc.events == 0 {
            return Err(Error::config("mc.events", "must be at least 1"));
        }

        let r = &self.reconstruct;
        let map = GridSpec::square(r.map_half_width_kev, r.map_bins).map_err(|_| {
            Error::config(
                "reconstruct.map_bins",
                "map needs map_bins >= 1 and a positive finite map_half_width_kev",
            )
        })?;
        let binning = Binning {
            slices: r.slices.iter().map(|s| (s[0], s[1])).collect(),
            map,
            radial_range: (r.radial_min_kev, r.radial_max_kev),
            radial_bins: r.radial_bins,
        };
        binning.validate()?;

        if let Some(scan) = &self.scan {
            scan.values()?;
        }
        // TOML integers are signed 64-bit
        if mc.seed > MAX_SEED {
            return Err(Error::config(
                "mc.seed",
                format!("{} exceeds {MAX_SEED}", mc.seed),
            ));
        }

        Ok(Resolved {
            beams,
            k1p,
            model,
            grid,
            smearing,
            quadrature,
            region,
            k1p_spec,
            seed: mc.seed,
            events: mc.events,
            binning,
        })
    }

    fn grid_spec(&self) -> Result<GridSpec> {
        let g = &self.grid;
        let bounds = [g.kx_min_kev, g.kx_max_kev, g.ky_min_kev, g.ky_max_kev];
        let spec =
            match (g.half_width_kev, bounds) {
                (Some(_), b) if b.iter().any(Option::is_some) => {
                    return Err(Error::config(
                        "grid",
                        "give half_width_kev or explicit bounds, not both",
                    ))
                }
                (Some(h), _) => {
                    if !(h > 0.0 && h.is_finite()) {
                        return Err(Error::config(
                            "grid.half_width_kev",
                            "must be positive and finite",
                        ));
                    }
                    GridSpec::square(h, 1).map(|s| GridSpec {
                        nx: g.nx,
                        ny: g.ny,
                        ..s
                    })?
                }
                (None, [Some(a), Some(b), Some(c), Some(d)]) => GridSpec {
                    kx_min: a,
                    kx_max: b,
                    ky_min: c,
                    ky_max: d,
                    nx: g.nx,
                    ny: g.ny,
                },
                (None, [None, None, None, None]) => GridSpec {
                    nx: g.nx,
                    ny: g.ny,
                    ..GridSpec::square(DEFAULT_HALF_WIDTH, 1)?
                },
                _ => return Err(Error::config(
                    "grid",
                    "explicit bounds need all of kx_min_kev, kx_max_kev, ky_min_kev, ky_max_kev",
                )),
            };
        spec.validate()?;
        Ok(spec)
    }

    /// Copy with one scan parameter set. `two_m*` must be odd integers;
    /// `alpha` needs a Coulomb model.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let mut out = self.clone();
        let odd = |field: &str| -> Result<i32> {
            if value.fract() != 0.0 || value.abs() > 1e6 || (value as i64) % 2 == 0 {
                return Err(Error::config(
                    field,
                    format!("{value} is not an odd integer"),
                ));
            }
            Ok(value as i32)
        };
        match name {
            "two_m1" => out.beam1.two_m = odd("scan.two_m1")?,
            "two_m2" => out.beam2.two_m = odd("scan.two_m2")?,
            "kappa1" => out.beam1.kappa_kev = value,
            "kappa2" => out.beam2.kappa_kev = value,
            "k1p_mag" => out.final_state.k1p_kev = value,
            "alpha" => {
                if !self.model.name.starts_with("coulomb") {
                    return Err(Error::config(
                        "scan.parameter",
                        format!(
                            "scanning alpha needs a coulomb model, not '{}'",
                            self.model.name
                        ),
                    ));
                }
                out.model.alpha = Some(value);
            }
            other => {
                return Err(Error::config(
                    "scan.parameter",
                    format!("'{other}' is not one of {}", SCAN_PARAMETERS.join(", ")),
                ))
            }
        }
        Ok(out)
    }
}

/// Best-effort dotted key from a TOML error message.
fn field_of(e: &toml::de::Error) -> String {
    let msg = e.message();
    for marker in ["unknown field `", "missing field `"] {
        if let Some(rest) = msg.split(marker).nth(1) {
            if let Some(name) = rest.split('`').next() {
                return name.to_string();
            }
        }
    }
    "config".to_string()
}
