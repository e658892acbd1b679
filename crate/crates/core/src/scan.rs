//! Polar-grid scans: exact statistics, sampled histograms, estimates and the
//! closed-form prediction at every point.

use std::f64::consts::TAU;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::estimator::{estimate_parity, sample_counts, CountingConfig, RNG_ALGORITHM};
use crate::experiment::{auto_cutoff, displaced_statistics, parity_sum};
use crate::fock::PhasePoint;
use crate::par::map_indexed;
use crate::quasiprob::{mode_mismatch_envelope, predicted_p, s_from_losses, ChannelParams, SignalSpec};
use crate::{Error, Result};

pub use crate::par::Execution;

/// Largest tolerated `|p_exact - p_eq3|` in a stored record.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub radii: Vec<f64>,
    pub phases: Vec<f64>,
    /// `|β| = sqrt(n_vac)` in units of this scale.
    pub n_vac_scale: f64,
}

impl PolarGrid {
    pub fn new(radii: Vec<f64>, phases: Vec<f64>, n_vac_scale: f64) -> Result<Self> {
        let grid = Self {
            radii,
            phases,
            n_vac_scale,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if self.radii.is_empty() || self.phases.is_empty() {
            return Err(Error::InvalidParameter("grid needs at least one radius and one phase".into()));
        }
        if !increasing(&self.radii) || !(self.radii[0] >= 0.0) || !self.radii.iter().all(|r| r.is_finite()) {
            return Err(Error::InvalidParameter("radii must be finite, >= 0 and strictly increasing".into()));
        }
        if !increasing(&self.phases) || !(self.phases[0] >= 0.0) || !(*self.phases.last().unwrap() < TAU) {
            return Err(Error::InvalidParameter("phases must be strictly increasing within [0, 2π)".into()));
        }
        if !(self.n_vac_scale > 0.0) {
            return Err(Error::InvalidParameter("n_vac_scale must be > 0".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Radius-major: `index = r_idx * phases.len() + phi_idx`.
    pub fn point(&self, index: usize) -> (usize, usize, PhasePoint) {
        let r_idx = index / self.phases.len();
        let phi_idx = index % self.phases.len();
        (r_idx, phi_idx, PhasePoint::from_polar(self.radii[r_idx], self.phases[phi_idx]))
    }
}

/// Uniform radii on `[0, max_radius]` (both ends included when `n_radii > 1`)
/// and uniform phases on `[0, 2π)`.
pub fn build_polar_grid(n_radii: usize, n_phases: usize, max_radius: f64) -> Result<PolarGrid> {
    if n_radii == 0 || n_phases == 0 {
        return Err(Error::InvalidParameter("grid needs n_radii >= 1 and n_phases >= 1".into()));
    }
    if !(max_radius > 0.0) || !max_radius.is_finite() {
        return Err(Error::InvalidParameter(format!("max_radius {max_radius} must be > 0")));
    }
    let radii = if n_radii == 1 {
        vec![0.0]
    } else {
        let step = max_radius / (n_radii - 1) as f64;
        (0..n_radii)
            .map(|i| if i + 1 == n_radii { max_radius } else { i as f64 * step })
            .collect()
    };
    let phases = (0..n_phases).map(|j| TAU * j as f64 / n_phases as f64).collect();
    PolarGrid::new(radii, phases, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub r_idx: usize,
    pub phi_idx: usize,
    pub beta_re: f64,
    pub beta_im: f64,
    pub p_est: f64,
    pub p_se: f64,
    pub p_exact: f64,
    pub p_eq3: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub spec: SignalSpec,
    pub channel: ChannelParams,
    pub ordering_s: f64,
    pub config: CountingConfig,
    pub master_seed: u64,
    pub grid: PolarGrid,
    pub gamma: f64,
    pub rng: String,
    pub code_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub metadata: ScanMetadata,
    pub records: Vec<ScanRecord>,
}

impl ScanResult {
    pub fn record(&self, r_idx: usize, phi_idx: usize) -> Option<&ScanRecord> {
        let n_phases = self.metadata.grid.phases.len();
        self.records
            .get(r_idx * n_phases + phi_idx)
            .filter(|r| r.r_idx == r_idx && r.phi_idx == phi_idx)
    }

    /// `Σ p_exact · r Δr Δφ` over the grid.
    pub fn grid_normalization(&self) -> f64 {
        let grid = &self.metadata.grid;
        let dr = if grid.radii.len() > 1 { grid.radii[1] - grid.radii[0] } else { 0.0 };
        let dphi = TAU / grid.phases.len() as f64;
        self.records
            .iter()
            .map(|rec| rec.p_exact * grid.radii[rec.r_idx] * dr * dphi)
            .sum()
    }
}

/// Scan with the default (parallel when available) execution.
pub fn run_scan(
    spec: &SignalSpec,
    grid: &PolarGrid,
    channel: &ChannelParams,
    config: &CountingConfig,
    gamma: f64,
) -> Result<ScanResult> {
    run_scan_with(spec, grid, channel, config, gamma, Execution::default())
}

pub fn run_scan_with(
    spec: &SignalSpec,
    grid: &PolarGrid,
    channel: &ChannelParams,
    config: &CountingConfig,
    gamma: f64,
    execution: Execution,
) -> Result<ScanResult> {
    spec.validate()?;
    grid.validate()?;
    channel.validate()?;
    config.validate()?;
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("envelope gamma {gamma} must be >= 0")));
    }
    let s = s_from_losses(channel)?;

    let records = map_indexed(grid.len(), execution, |index| {
        let (r_idx, phi_idx, beta) = grid.point(index);
        scan_point(spec, beta, channel, config, gamma, index as u64)
            .map(|mut rec| {
                rec.r_idx = r_idx;
                rec.phi_idx = phi_idx;
                rec
            })
            .map_err(|e| Error::ScanPoint {
                r_idx,
                phi_idx,
                source: Box::new(e),
            })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    Ok(ScanResult {
        metadata: ScanMetadata {
            spec: *spec,
            channel: *channel,
            ordering_s: s.value(),
            config: *config,
            master_seed: config.master_seed,
            grid: grid.clone(),
            gamma,
            rng: RNG_ALGORITHM.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        },
        records,
    })
}

fn scan_point(
    spec: &SignalSpec,
    beta: PhasePoint,
    channel: &ChannelParams,
    config: &CountingConfig,
    gamma: f64,
    index: u64,
) -> Result<ScanRecord> {
    let stats = displaced_statistics(spec, beta, channel, auto_cutoff(spec, beta, channel))?;
    let exact = parity_sum(&stats);
    let analytic = predicted_p(spec, beta, channel)?;
    if (exact - analytic).abs() > IDENTITY_TOL {
        return Err(Error::IdentityMismatch { exact, analytic });
    }
    let hist = sample_counts(&stats, config, index)?;
    let estimate = estimate_parity(&hist)?;
    let envelope = mode_mismatch_envelope(beta, gamma);
    Ok(ScanRecord {
        r_idx: 0,
        phi_idx: 0,
        beta_re: beta.value().re,
        beta_im: beta.value().im,
        p_est: estimate.value * envelope,
        p_se: estimate.std_error * envelope,
        p_exact: exact * envelope,
        p_eq3: analytic * envelope,
        counts: Some(hist.counts),
    })
}

/// Closed-form values only, for plotting without simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRecord {
    pub r_idx: usize,
    pub phi_idx: usize,
    pub beta_re: f64,
    pub beta_im: f64,
    pub p_eq3: f64,
}

pub fn analytic_grid(
    spec: &SignalSpec,
    grid: &PolarGrid,
    channel: &ChannelParams,
    gamma: f64,
) -> Result<Vec<AnalyticRecord>> {
    grid.validate()?;
    (0..grid.len())
        .map(|index| {
            let (r_idx, phi_idx, beta) = grid.point(index);
            Ok(AnalyticRecord {
                r_idx,
                phi_idx,
                beta_re: beta.value().re,
                beta_im: beta.value().im,
                p_eq3: predicted_p(spec, beta, channel)? * mode_mismatch_envelope(beta, gamma),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub points: usize,
    pub points_with_se: usize,
    /// Largest `|p_est - p_exact| / p_se` over points with `p_se > 0`.
    pub max_abs_z: f64,
    pub frac_z_gt2: f64,
    pub frac_z_gt3: f64,
    /// RMS of `p_exact - p_eq3`.
    pub identity_rms: f64,
}

pub fn compare_scan(records: &[ScanRecord]) -> ComparisonReport {
    let z: Vec<f64> = records
        .iter()
        .filter(|r| r.p_se > 0.0)
        .map(|r| ((r.p_est - r.p_exact) / r.p_se).abs())
        .collect();
    let frac = |limit: f64| {
        if z.is_empty() {
            0.0
        } else {
            z.iter().filter(|v| **v > limit).count() as f64 / z.len() as f64
        }
    };
    let identity_rms = if records.is_empty() {
        0.0
    } else {
        (records.iter().map(|r| (r.p_exact - r.p_eq3).powi(2)).sum::<f64>() / records.len() as f64).sqrt()
    };
    ComparisonReport {
        points: records.len(),
        points_with_se: z.len(),
        max_abs_z: z.iter().cloned().fold(0.0, f64::max),
        frac_z_gt2: frac(2.0),
        frac_z_gt3: frac(3.0),
        identity_rms,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakFit {
    pub center: PhasePoint,
    pub height: f64,
    /// Index of the record with the largest estimate.
    pub max_index: usize,
    pub points_used: usize,
}

/// Fits `ln p_est = a + b x + c y + d (x² + y²)` by least squares to records
/// within `window` of the largest estimate (and above 20% of it).
pub fn fit_gaussian_peak(records: &[ScanRecord], window: f64) -> Option<PeakFit> {
    let (max_index, top) = records
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.p_est.total_cmp(&b.1.p_est))?;
    if !(top.p_est > 0.0) {
        return None;
    }
    let mut normal = Matrix4::<f64>::zeros();
    let mut rhs = Vector4::<f64>::zeros();
    let mut used = 0;
    for rec in records {
        let dx = rec.beta_re - top.beta_re;
        let dy = rec.beta_im - top.beta_im;
        if dx.hypot(dy) > window || rec.p_est <= 0.2 * top.p_est {
            continue;
        }
        let row = Vector4::new(1.0, rec.beta_re, rec.beta_im, rec.beta_re.powi(2) + rec.beta_im.powi(2));
        normal += row * row.transpose();
        rhs += row * rec.p_est.ln();
        used += 1;
    }
    let coef = normal.lu().solve(&rhs)?;
    let (a, b, c, d) = (coef[0], coef[1], coef[2], coef[3]);
    if !(d < 0.0) {
        return None;
    }
    let cx = -b / (2.0 * d);
    let cy = -c / (2.0 * d);
    Some(PeakFit {
        center: PhasePoint::from_cartesian(cx, cy),
        height: (a - (b * b + c * c) / (4.0 * d)).exp(),
        max_index,
        points_used: used,
    })
}
