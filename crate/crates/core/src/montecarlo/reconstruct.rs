use serde::{Deserialize, Serialize};

use crate::kinematics::TransverseVector;
use crate::montecarlo::EventRecord;
use crate::observables::{binned_density, GridSpec};
use crate::vortex::DensityEvaluator;
use crate::{Error, Result};

/// Slicing and histogram layout for reconstruction. Maps are built in the
/// frame where each event's `k1'` points along `+x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    /// `|k1'|` ranges `[lo, hi)` in keV.
    pub slices: Vec<(f64, f64)>,
    pub map: GridSpec,
    /// `|K|` range and bin count of the radial histogram.
    pub radial_range: (f64, f64),
    pub radial_bins: usize,
}

impl Binning {
    pub fn validate(&self) -> Result<()> {
        self.map.validate()?;
        if self.slices.is_empty() {
            return Err(Error::config(
                "reconstruct.slices",
                "at least one |k1'| slice is required",
            ));
        }
        for &(lo, hi) in &self.slices {
            if !(hi > lo && lo >= 0.0) {
                return Err(Error::config(
                    "reconstruct.slices",
                    format!("slice [{lo}, {hi}) must satisfy 0 <= lo < hi"),
                ));
            }
        }
        let (lo, hi) = self.radial_range;
        if self.radial_bins == 0 || !(hi > lo && lo >= 0.0) {
            return Err(Error::config(
                "reconstruct.radial",
                "radial histogram needs bins >= 1 and 0 <= min < max",
            ));
        }
        Ok(())
    }

    pub fn map_bin(&self, k: TransverseVector) -> Option<usize> {
        let g = &self.map;
        let fx = (k.x - g.kx_min) / g.dx();
        let fy = (k.y - g.ky_min) / g.dy();
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (i, j) = (fx as usize, fy as usize);
        (i < g.nx && j < g.ny).then_some(j * g.nx + i)
    }

    pub fn radial_width(&self) -> f64 {
        (self.radial_range.1 - self.radial_range.0) / self.radial_bins as f64
    }

    pub fn radial_bin(&self, k: f64) -> Option<usize> {
        let f = (k - self.radial_range.0) / self.radial_width();
        (f >= 0.0 && (f as usize) < self.radial_bins).then_some(f as usize)
    }

    pub fn radial_center(&self, bin: usize) -> f64 {
        self.radial_position(bin as f64)
    }

    /// `|K|` at a fractional bin index (bin centres at integers).
    pub fn radial_position(&self, bin: f64) -> f64 {
        self.radial_range.0 + (bin + 0.5) * self.radial_width()
    }

    fn slice_of(&self, k1p: f64) -> Option<usize> {
        self.slices
            .iter()
            .position(|&(lo, hi)| k1p >= lo && k1p < hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceResult {
    pub range: (f64, f64),
    pub events: u64,
    /// Counts per map cell, row-major in the `k1'`-aligned frame.
    pub map: Vec<u64>,
    pub radial: Vec<u64>,
    /// `|K|` at the significant minima of the radial histogram, refined
    /// to sub-bin precision.
    pub minima: Vec<f64>,
    pub aperp: f64,
    pub aperp_error: f64,
    /// No events fell into this slice.
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub slices: Vec<SliceResult>,
    /// Mean of `sin(φ1' - φK)` over all events, with its standard error.
    pub aperp: f64,
    pub aperp_error: f64,
    pub events: u64,
    /// Events outside every slice.
    pub unassigned: u64,
}

/// Window half-width used when locating minima in radial histograms.
pub const MINIMUM_WINDOW: usize = 3;

/// Indices that are strictly lower than every other value within
/// `±window` (ties resolved towards the left).
pub fn significant_minima(values: &[f64], window: usize) -> Vec<usize> {
    if values.len() < 2 * window + 1 {
        return Vec::new();
    }
    (window..values.len() - window)
        .filter(|&i| {
            let v = values[i];
            (i - window..i).all(|j| values[j] > v) && (i + 1..=i + window).all(|j| values[j] >= v)
        })
        .collect()
}

/// Sub-bin position of the minimum at `index`: vertex of a least-squares
/// parabola through the five surrounding values (three at the ends),
/// clamped to one bin either side.
pub fn refine_minimum(values: &[f64], index: usize) -> f64 {
    let i = index as f64;
    if index >= 2 && index + 2 < values.len() {
        let y = &values[index - 2..=index + 2];
        let sum: f64 = y.iter().sum();
        let sum_x: f64 = y.iter().zip(-2..=2).map(|(v, x)| v * f64::from(x)).sum();
        let sum_x2: f64 = y
            .iter()
            .zip(-2..=2)
            .map(|(v, x)| v * f64::from(x * x))
            .sum();
        let b = sum_x / 10.0;
        let c = (sum_x2 - 2.0 * sum) / 14.0;
        if c > 0.0 {
            return i + (-b / (2.0 * c)).clamp(-1.0, 1.0);
        }
    } else if index >= 1 && index + 1 < values.len() {
        let (l, m, r) = (values[index - 1], values[index], values[index + 1]);
        let curv = l - 2.0 * m + r;
        if curv > 0.0 {
            return i + (0.5 * (l - r) / curv).clamp(-1.0, 1.0);
        }
    }
    i
}

#[derive(Default)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean_and_error(&self) -> (f64, f64) {
        if self.n == 0 {
            return (0.0, 0.0);
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        if self.n < 2 {
            return (mean, f64::INFINITY);
        }
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Slice events by `|k1'|`, histogram `K` in the `k1'`-aligned frame and
/// estimate `A_perp` with its standard error. Sequential fold in event
/// order.
pub fn reconstruct(events: &[EventRecord], binning: &Binning) -> Result<Reconstruction> {
    if events.is_empty() {
        return Err(Error::Domain("no events to reconstruct".into()));
    }
    binning.validate()?;
    let n_map = binning.map.len();
    let mut maps = vec![vec![0u64; n_map]; binning.slices.len()];
    let mut radial = vec![vec![0u64; binning.radial_bins]; binning.slices.len()];
    let mut per_slice: Vec<Moments> = binning.slices.iter().map(|_| Moments::default()).collect();
    let mut all = Moments::default();
    let mut unassigned = 0;

    for ev in events {
        let phi1p = ev.k1p.signed_azimuth();
        let k = ev.k1p + ev.k2p;
        let s = (phi1p - k.signed_azimuth()).sin();
        all.push(s);
        let Some(slice) = binning.slice_of(ev.k1p.modulus()) else {
            unassigned += 1;
            continue;
        };
        per_slice[slice].push(s);
        if let Some(bin) = binning.map_bin(k.rotated(-phi1p)) {
            maps[slice][bin] += 1;
        }
        if let Some(bin) = binning.radial_bin(k.modulus()) {
            radial[slice][bin] += 1;
        }
    }

    let slices = binning
        .slices
        .iter()
        .enumerate()
        .map(|(i, &range)| {
            let m = &per_slice[i];
            let (aperp, aperp_error) = m.mean_and_error();
            let counts: Vec<f64> = radial[i].iter().map(|&c| c as f64).collect();
            let minima = significant_minima(&counts, MINIMUM_WINDOW)
                .into_iter()
                .map(|b| binning.radial_position(refine_minimum(&counts, b)))
                .collect();
            SliceResult {
                range,
                events: m.n,
                map: std::mem::take(&mut maps[i]),
                radial: std::mem::take(&mut radial[i]),
                minima,
                aperp,
                aperp_error,
                empty: m.n == 0,
            }
        })
        .collect();
    let (aperp, aperp_error) = all.mean_and_error();
    Ok(Reconstruction {
        slices,
        aperp,
        aperp_error,
        events: events.len() as u64,
        unassigned,
    })
}

fn normalized(mut bins: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = bins.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Inconsistent(
            "expected histogram has no weight".into(),
        ));
    }
    bins.pop();
    Ok(bins.into_iter().map(|v| v / total).collect())
}

/// Expected fraction of events per map cell at fixed `|k1'|`, from
/// quadrature of the same density the sampler uses.
pub fn expected_map(
    eval: &DensityEvaluator,
    k1p_magnitude: f64,
    binning: &Binning,
    n_v: usize,
    n_phi: usize,
) -> Result<Vec<f64>> {
    let n_map = binning.map.len();
    // the extra bin collects everything outside the histogram
    normalized(binned_density(
        eval,
        k1p_magnitude,
        n_v,
        n_phi,
        n_map + 1,
        |k| Some(binning.map_bin(k).unwrap_or(n_map)),
    )?)
}

/// Expected fraction of events per radial bin. Each `v` row lands at a
/// single `|K|`, so `n_v` must resolve the bin width many times over.
pub fn expected_radial(
    eval: &DensityEvaluator,
    k1p_magnitude: f64,
    binning: &Binning,
    n_v: usize,
    n_phi: usize,
) -> Result<Vec<f64>> {
    let n_radial = binning.radial_bins;
    normalized(binned_density(
        eval,
        k1p_magnitude,
        n_v,
        n_phi,
        n_radial + 1,
        |k| Some(binning.radial_bin(k.modulus()).unwrap_or(n_radial)),
    )?)
}

/// Pearson `χ²` of observed counts against expected fractions of
/// `n_total`, over bins expecting at least `min_expected` events.
/// Returns `(χ², degrees of freedom)` with one constraint for the total.
pub fn chi_square(
    observed: &[u64],
    expected_fraction: &[f64],
    n_total: u64,
    min_expected: f64,
) -> (f64, usize) {
    let mut chi2 = 0.0;
    let mut bins = 0usize;
    for (&o, &f) in observed.iter().zip(expected_fraction) {
        let e = f * n_total as f64;
        if e >= min_expected {
            chi2 += (o as f64 - e).powi(2) / e;
            bins += 1;
        }
    }
    (chi2, bins.saturating_sub(1))
}
