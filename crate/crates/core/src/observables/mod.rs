//! Observables built on the cross-section density: fringe maps over the `K`
//! plane, radial fringe profiles, fringe contrast and the Coulomb-phase
//! asymmetry `A_perp = ∫ dσ sin(φ1' - φK) / ∫ dσ`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kinematics::{triangle_angles, BeamPair, TransverseVector};
use crate::vortex::{DensityEvaluator, Model, SmearingGrid, TestHook};
use crate::{Error, Result};

/// Cartesian cell grid over the `K` plane. Cell `(i, j)` has its centre at
/// `Kx_i, Ky_j`; storage is row-major with `Kx` varying fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kx_min: f64,
    pub kx_max: f64,
    pub ky_min: f64,
    pub ky_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(
        kx_min: f64,
        kx_max: f64,
        ky_min: f64,
        ky_max: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self> {
        let spec = Self {
            kx_min,
            kx_max,
            ky_min,
            ky_max,
            nx,
            ny,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Square grid `[-half_width, half_width]²` with `n × n` cells.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::config("grid", "nx and ny must be at least 1"));
        }
        let finite = [self.kx_min, self.kx_max, self.ky_min, self.ky_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.kx_max <= self.kx_min || self.ky_max <= self.ky_min {
            return Err(Error::config(
                "grid",
                "bounds must be finite with min < max",
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn center(min: f64, max: f64, n: usize, i: usize) -> f64 {
        // symmetric about the midpoint so mirrored cells get negated coordinates
        let mid = 0.5 * (min + max);
        let half = 0.5 * (max - min);
        mid + half * ((2 * i + 1) as f64 - n as f64) / n as f64
    }

    pub fn kx(&self, i: usize) -> f64 {
        Self::center(self.kx_min, self.kx_max, self.nx, i)
    }

    pub fn ky(&self, j: usize) -> f64 {
        Self::center(self.ky_min, self.ky_max, self.ny, j)
    }

    pub fn cell(&self, i: usize, j: usize) -> TransverseVector {
        TransverseVector::new(self.kx(i), self.ky(j))
    }

    pub fn dx(&self) -> f64 {
        (self.kx_max - self.kx_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.ky_max - self.ky_min) / self.ny as f64
    }

    /// Row index of the cell mirrored about `Ky = 0`.
    pub fn mirror_row(&self, j: usize) -> usize {
        self.ny - 1 - j
    }

    /// Whether the grid encloses the disc `|K| <= radius`.
    pub fn covers(&self, radius: f64) -> bool {
        self.kx_min <= -radius
            && self.kx_max >= radius
            && self.ky_min <= -radius
            && self.ky_max >= radius
    }
}

/// Cross-section density sampled at cell centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeMap {
    pub k1p: TransverseVector,
    pub grid: GridSpec,
    /// Row-major, `values[j * nx + i]`.
    pub values: Vec<f64>,
    pub model: Model,
    pub smearing: String,
    /// Node evaluations skipped on an annulus edge.
    pub edge_flags: u64,
    pub coverage_warning: Option<String>,
}

impl FringeMap {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `Σ value · sin(φ1' - φK)` over cells; positive when more weight sits
    /// clockwise of `k1'` (below it for `k1'` along `+x`).
    pub fn sin_weighted_sum(&self) -> f64 {
        let phi1p = self.k1p.signed_azimuth();
        let mut sum = 0.0;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let k = self.grid.cell(i, j);
                sum += self.value(i, j) * (phi1p - k.signed_azimuth()).sin();
            }
        }
        sum
    }

    /// Bilinear interpolation at an arbitrary `K`; zero outside the grid.
    pub fn interpolate(&self, k: TransverseVector) -> f64 {
        let g = &self.grid;
        let fx = (k.x - g.kx_min) / g.dx() - 0.5;
        let fy = (k.y - g.ky_min) / g.dy() - 0.5;
        if !(fx >= 0.0 && fy >= 0.0 && fx <= (g.nx - 1) as f64 && fy <= (g.ny - 1) as f64) {
            return 0.0;
        }
        let i0 = (fx.floor() as usize).min(g.nx.saturating_sub(2));
        let j0 = (fy.floor() as usize).min(g.ny.saturating_sub(2));
        let i1 = (i0 + 1).min(g.nx - 1);
        let j1 = (j0 + 1).min(g.ny - 1);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let v00 = self.value(i0, j0);
        let v10 = self.value(i1, j0);
        let v01 = self.value(i0, j1);
        let v11 = self.value(i1, j1);
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }

    /// Profile along the ray at azimuth `phi`, read from the map.
    pub fn radial_profile(
        &self,
        phi: f64,
        k_min: f64,
        k_max: f64,
        n_samples: usize,
    ) -> Vec<(f64, f64)> {
        radial_samples(k_min, k_max, n_samples)
            .map(|k| (k, self.interpolate(TransverseVector::from_polar(k, phi))))
            .collect()
    }
}

/// Density on every cell centre, evaluated in parallel over rows and
/// assembled in fixed row order.
pub fn fringe_map(
    beams: &BeamPair,
    k1p: TransverseVector,
    grid: GridSpec,
    model: Model,
    smearing: &SmearingGrid,
) -> Result<FringeMap> {
    fringe_map_with_hook(beams, k1p, grid, model, smearing, None)
}

#[doc(hidden)]
pub fn fringe_map_with_hook(
    beams: &BeamPair,
    k1p: TransverseVector,
    grid: GridSpec,
    model: Model,
    smearing: &SmearingGrid,
    hook: Option<TestHook>,
) -> Result<FringeMap> {
    grid.validate()?;
    let eval = DensityEvaluator::new(beams, smearing, model)?.with_hook(hook);
    let rows = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let mut row = Vec::with_capacity(grid.nx);
            let mut flags = 0u64;
            for i in 0..grid.nx {
                let d = eval.density(k1p, grid.cell(i, j))?;
                flags += u64::from(d.edge_nodes);
                row.push(d.value);
            }
            Ok((row, flags))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(grid.len());
    let mut edge_flags = 0;
    for (row, flags) in rows {
        values.extend(row);
        edge_flags += flags;
    }
    let (_, outer) = smearing.support();
    let coverage_warning = (!grid.covers(outer))
        .then(|| format!("grid does not enclose the smeared annulus |K| <= {outer} keV"));
    Ok(FringeMap {
        k1p,
        grid,
        values,
        model,
        smearing: smearing.describe(),
        edge_flags,
        coverage_warning,
    })
}

/// Fringe phase `Φ = 2m1δ1 + 2m2δ2` at `|K|` for one `(κ1, κ2)`.
pub fn fringe_phase(kappa1: f64, kappa2: f64, k: f64, two_m1: i32, two_m2: i32) -> Result<f64> {
    let (d1, d2, _) = triangle_angles(kappa1, kappa2, k)?;
    Ok(f64::from(two_m1) * d1 + f64::from(two_m2) * d2)
}

/// One sample of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub k: f64,
    /// Smeared density.
    pub value: f64,
    pub phase: f64,
    /// `cos Φ`.
    pub phase_factor: f64,
    /// `cos Φ cos δ1 cos δ2`, the factor multiplying the interference term.
    pub interference: f64,
}

fn radial_samples(k_min: f64, k_max: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (k_max - k_min) / n as f64;
    (0..n).map(move |j| k_min + (j as f64 + 0.5) * step)
}

/// Density and bare interference factors along the ray at azimuth `phi`,
/// sampled at `n_samples` midpoints strictly inside the central annulus.
pub fn radial_profile(
    beams: &BeamPair,
    k1p: TransverseVector,
    model: Model,
    smearing: &SmearingGrid,
    phi: f64,
    n_samples: usize,
) -> Result<Vec<ProfilePoint>> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    let (kappa1, kappa2) = beams.kappas();
    let (two_m1, two_m2) = (beams.first.two_m(), beams.second.two_m());
    let k_min = (kappa1 - kappa2).abs();
    let k_max = kappa1 + kappa2;
    let eval = DensityEvaluator::new(beams, smearing, model)?;
    radial_samples(k_min, k_max, n_samples)
        .map(|k| {
            let (d1, d2, _) = triangle_angles(kappa1, kappa2, k)?;
            let phase = f64::from(two_m1) * d1 + f64::from(two_m2) * d2;
            let value = eval
                .density(k1p, TransverseVector::from_polar(k, phi))?
                .value;
            Ok(ProfilePoint {
                k,
                value,
                phase,
                phase_factor: phase.cos(),
                interference: phase.cos() * d1.cos() * d2.cos(),
            })
        })
        .collect()
}

/// Number of strict sign changes in a sequence; exact zeros are skipped.
pub fn sign_changes(values: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for v in values {
        if v == 0.0 || v.is_nan() {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}

/// Interior local extrema as `(index, is_max)`; a plateau counts once, at
/// its middle.
fn local_extrema(values: &[f64]) -> Vec<(usize, bool)> {
    let mut runs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.0 == v => run.2 = i,
            _ => runs.push((v, i, i)),
        }
    }
    runs.windows(3)
        .filter_map(|w| {
            let (prev, (v, start, end), next) = (w[0].0, w[1], w[2].0);
            let at = (start + end) / 2;
            if v > prev && v > next {
                Some((at, true))
            } else if v < prev && v < next {
                Some((at, false))
            } else {
                None
            }
        })
        .collect()
}

/// Mean of `(I_max - I_min) / (I_max + I_min)` over neighbouring interior
/// extrema of a profile.
pub fn fringe_contrast(values: &[f64]) -> Result<f64> {
    let extrema = local_extrema(values);
    let has_max = extrema.iter().any(|e| e.1);
    let has_min = extrema.iter().any(|e| !e.1);
    if !has_max || !has_min {
        return Err(Error::UndefinedContrast(format!(
            "profile of {} samples has no interior maximum/minimum pair",
            values.len()
        )));
    }
    let mut total = 0.0;
    let mut n = 0;
    for w in extrema.windows(2) {
        let (a, b) = (values[w[0].0], values[w[1].0]);
        let (hi, lo) = if w[0].1 { (a, b) } else { (b, a) };
        if hi + lo > 0.0 {
            total += (hi - lo) / (hi + lo);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::UndefinedContrast("extrema sum to zero".into()));
    }
    Ok(total / n as f64)
}

/// Asymmetry on the single ring `|K| = k`: the `sin(φ1' - φK)`-weighted
/// mean of the density over `n_phi` azimuths (even), taken in mirrored
/// pairs about `k1'`. The fringe-resolved counterpart of `A_perp`.
pub fn ring_asymmetry(
    eval: &DensityEvaluator,
    k1p: TransverseVector,
    k: f64,
    n_phi: usize,
) -> Result<f64> {
    if n_phi < 2 || n_phi % 2 == 1 {
        return Err(Error::Domain(format!(
            "n_phi = {n_phi} must be even and >= 2"
        )));
    }
    let phi1p = k1p.signed_azimuth();
    let dphi = 2.0 * PI / n_phi as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for l in 0..n_phi / 2 {
        let x = (2 * l + 1) as f64 * 0.5 * dphi;
        let up = eval
            .density(k1p, TransverseVector::from_polar(k, phi1p + x))?
            .value;
        let down = eval
            .density(k1p, TransverseVector::from_polar(k, phi1p - x))?
            .value;
        den += up + down;
        num += (down - up) * x.sin();
    }
    if !(den > 0.0) {
        return Err(Error::Domain(format!(
            "density vanishes on the ring |K| = {k} keV"
        )));
    }
    Ok(num / den)
}

/// Region of `k1'` over which the asymmetry integrals run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AperpRegion {
    /// Fixed `k1'`, integration over `K` only.
    Fixed(TransverseVector),
    /// `|k1'|` fixed, average over `n_phi` equally spaced azimuths.
    Ring { magnitude: f64, n_phi: usize },
}

/// Grid for the annulus quadrature: `n_radial × n_azimuthal` midpoint cells
/// per smearing node, plus a pass at double resolution for the error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_radial: usize,
    pub n_azimuthal: usize,
    pub refine: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_radial: 256,
            n_azimuthal: 512,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymmetry {
    pub value: f64,
    pub error: f64,
    /// `∫ dσ sin(φ1' - φK)` and `∫ dσ` at the finest resolution.
    pub numerator: f64,
    pub denominator: f64,
    pub evaluations: u64,
}

/// Largest `|cos ψ|` kept: the per-node edge cutoff `Δ >= 1e-6 κ1κ2`.
const COS_PSI_MAX: f64 = 0.999_999_999_998;

/// Per-node radial variable. With `c = cos ψ = b tanh(b v)`,
/// `b² = 1 + ε²`, the softened Jacobian cancels: `dc / (1 - c² + ε²) = dv`,
/// and `d²K = κ1κ2 dc dφ`.
struct RadialMap {
    b: f64,
    v_max: f64,
}

impl RadialMap {
    fn new(epsilon_sq: f64) -> Self {
        let b = (1.0 + epsilon_sq).sqrt();
        Self {
            b,
            v_max: (COS_PSI_MAX / b).atanh() / b,
        }
    }

    fn cos_psi(&self, v: f64) -> f64 {
        self.b * (self.b * v).tanh()
    }
}

/// Integrals of `dσ` and `dσ sin(φ1' - φK)` at one resolution.
fn aperp_integrals(
    eval: &DensityEvaluator,
    k1p_magnitude: f64,
    n_v: usize,
    n_phi: usize,
) -> Result<(f64, f64, u64)> {
    if n_v == 0 || n_phi < 2 || n_phi % 2 == 1 {
        return Err(Error::Domain(format!(
            "quadrature needs n_radial >= 1 and even n_azimuthal >= 2, got {n_v} x {n_phi}"
        )));
    }
    // k1' along +x; the unpolarized density depends only on relative azimuths
    let k1p = TransverseVector::new(k1p_magnitude, 0.0);
    let map = RadialMap::new(eval.epsilon_sq());
    let dv = 2.0 * map.v_max / n_v as f64;
    let dphi = 2.0 * PI / n_phi as f64;
    let half = n_phi / 2;

    let rows: Vec<(usize, usize)> = (0..eval.node_count())
        .flat_map(|n| (0..n_v).map(move |r| (n, r)))
        .collect();
    let partial = rows
        .par_iter()
        .map(|&(n, r)| {
            let (kappa1, kappa2) = eval.node_kappas(n);
            let v = -map.v_max + (r as f64 + 0.5) * dv;
            let c = map.cos_psi(v);
            let kmod = (kappa1 * kappa1 + kappa2 * kappa2 + 2.0 * kappa1 * kappa2 * c)
                .max(0.0)
                .sqrt();
            let mut den = 0.0;
            let mut num = 0.0;
            for l in 0..half {
                // mirrored pair φK = ±x keeps Born cancellation exact
                let x = (2 * l + 1) as f64 * 0.5 * dphi;
                let up = eval.node_term(n, k1p, TransverseVector::from_polar(kmod, x))?;
                let down = eval.node_term(n, k1p, TransverseVector::from_polar(kmod, -x))?;
                let bu = up.filter(|t| !t.edge).map_or(0.0, |t| t.bracket);
                let bd = down.filter(|t| !t.edge).map_or(0.0, |t| t.bracket);
                den += bu + bd;
                // sin(φ1' - φK) = ∓ sin x
                num += (bd - bu) * x.sin();
            }
            let scale = eval.node_weight(n) * kappa1 * kappa2 * dv * dphi;
            Ok((num * scale, den * scale))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in partial {
        num += a;
        den += b;
    }
    Ok((num, den, (rows.len() * n_phi) as u64))
}

fn aperp_fixed(
    eval: &DensityEvaluator,
    k1p_magnitude: f64,
    n_v: usize,
    n_phi: usize,
) -> Result<(f64, f64, f64, u64)> {
    let (num, den, evals) = aperp_integrals(eval, k1p_magnitude, n_v, n_phi)?;
    if !(den > 0.0) {
        return Err(Error::Inconsistent(format!(
            "total cross-section integral {den:e} is not positive"
        )));
    }
    Ok((num / den, num, den, evals))
}

/// Integrated density per bin: the same per-node `(v, φ)` midpoint grid as
/// the asymmetry quadrature, with each cell's weight assigned to the bin of
/// its centre. `K` is given to `bin_of` in the frame where `k1'` points
/// along `+x`. Nodes run in parallel and are summed in node order.
pub fn binned_density<B>(
    eval: &DensityEvaluator,
    k1p_magnitude: f64,
    n_v: usize,
    n_phi: usize,
    n_bins: usize,
    bin_of: B,
) -> Result<Vec<f64>>
where
    B: Fn(TransverseVector) -> Option<usize> + Sync,
{
    let k1p = TransverseVector::new(k1p_magnitude, 0.0);
    let map = RadialMap::new(eval.epsilon_sq());
    let dv = 2.0 * map.v_max / n_v as f64;
    let dphi = 2.0 * PI / n_phi as f64;
    let per_node = (0..eval.node_count())
        .into_par_iter()
        .map(|n| {
            let (kappa1, kappa2) = eval.node_kappas(n);
            let scale = eval.node_weight(n) * kappa1 * kappa2 * dv * dphi;
            let mut hist = vec![0.0; n_bins];
            for r in 0..n_v {
                let c = map.cos_psi(-map.v_max + (r as f64 + 0.5) * dv);
                let kmod = (kappa1 * kappa1 + kappa2 * kappa2 + 2.0 * kappa1 * kappa2 * c)
                    .max(0.0)
                    .sqrt();
                for l in 0..n_phi {
                    let k = TransverseVector::from_polar(kmod, -PI + (l as f64 + 0.5) * dphi);
                    let Some(bin) = bin_of(k) else { continue };
                    if let Some(t) = eval.node_term(n, k1p, k)? {
                        if !t.edge {
                            hist[bin] += scale * t.bracket;
                        }
                    }
                }
            }
            Ok(hist)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = vec![0.0; n_bins];
    for hist in per_node {
        for (t, h) in total.iter_mut().zip(hist) {
            *t += h;
        }
    }
    Ok(total)
}

/// Largest `v` of the per-node radial variable for a given softening.
pub(crate) fn radial_v_max(epsilon_sq: f64) -> f64 {
    RadialMap::new(epsilon_sq).v_max
}

/// `cos ψ` at radial variable `v`.
pub(crate) fn radial_cos_psi(epsilon_sq: f64, v: f64) -> f64 {
    RadialMap::new(epsilon_sq).cos_psi(v)
}

/// `A_perp` by midpoint quadrature over each node annulus. The error is the
/// change between the base grid and one at double resolution in both
/// directions (zero when `refine` is off).
pub fn asymmetry_aperp(
    beams: &BeamPair,
    region: AperpRegion,
    model: Model,
    smearing: &SmearingGrid,
    spec: QuadratureSpec,
) -> Result<Asymmetry> {
    let eval = DensityEvaluator::new(beams, smearing, model)?;
    let magnitude = match region {
        AperpRegion::Fixed(k1p) => k1p.modulus(),
        AperpRegion::Ring { magnitude, n_phi } => {
            if n_phi == 0 {
                return Err(Error::Domain("ring average needs n_phi >= 1".into()));
            }
            // rotating k1' and K together leaves the density unchanged, so
            // every azimuth on the ring contributes the same integrals
            magnitude
        }
    };
    if !(magnitude > 0.0) {
        return Err(Error::Domain(format!(
            "|k1'| = {magnitude} must be positive"
        )));
    }
    let (coarse, num, den, evals) = aperp_fixed(&eval, magnitude, spec.n_radial, spec.n_azimuthal)?;
    if !spec.refine {
        return Ok(Asymmetry {
            value: coarse,
            error: 0.0,
            numerator: num,
            denominator: den,
            evaluations: evals,
        });
    }
    let (fine, num, den, evals_fine) =
        aperp_fixed(&eval, magnitude, 2 * spec.n_radial, 2 * spec.n_azimuthal)?;
    Ok(Asymmetry {
        value: fine,
        error: (fine - coarse).abs(),
        numerator: num,
        denominator: den,
        evaluations: evals + evals_fine,
    })
}
