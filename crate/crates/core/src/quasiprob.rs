//! Closed-form s-ordered quasidistributions and the loss-to-ordering map.
//!
//! A detector of efficiency `η` behind a displacing beam splitter of power
//! transmission `T` measures
//!
//! ```text
//! P(β) = (1/ηT) W(β / sqrt(ηT); s),   s = 1 - 1/(ηT)
//! ```
//!
//! so every simulated scan has an analytic counterpart here.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::PhasePoint;
use crate::quadrature;
use crate::{Error, Result};

/// Ordering parameter `s ≤ 1`; `s = 0` is the Wigner function, `s = -1` the
/// Husimi Q function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingParam(f64);

impl OrderingParam {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_nan() || s > 1.0 {
            return Err(Error::InvalidParameter(format!("ordering parameter {s} must be <= 1")));
        }
        Ok(Self(s))
    }

    pub fn wigner() -> Self {
        Self(0.0)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Detector quantum efficiency and beam-splitter power transmission.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub eta: f64,
    pub transmission: f64,
}

impl ChannelParams {
    pub fn new(eta: f64, transmission: f64) -> Result<Self> {
        let channel = Self { eta, transmission };
        channel.validate()?;
        Ok(channel)
    }

    /// η = 0.70, T = 0.986.
    pub fn apparatus_default() -> Self {
        Self {
            eta: 0.70,
            transmission: 0.986,
        }
    }

    pub fn lossless() -> Self {
        Self {
            eta: 1.0,
            transmission: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v <= 1.0;
        if !in_unit(self.eta) {
            return Err(Error::InvalidParameter(format!("eta = {} outside (0, 1]", self.eta)));
        }
        if !in_unit(self.transmission) {
            return Err(Error::InvalidParameter(format!(
                "transmission = {} outside (0, 1]",
                self.transmission
            )));
        }
        Ok(())
    }

    /// Overall efficiency `ηT`.
    pub fn efficiency(&self) -> f64 {
        self.eta * self.transmission
    }
}

/// Fluctuating-phase model for a phase-diffused coherent state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "snake_case")]
pub enum PhaseNoiseModel {
    None,
    /// Phase uniform on `[-half_width, half_width]`; `half_width = π` is full diffusion.
    Uniform { half_width: f64 },
    /// Phase `half_width · sin(ωt)` sampled at uniformly random times, as
    /// produced by a sinusoidally driven mirror.
    Arcsine { half_width: f64 },
    WrappedGaussian { std: f64 },
}

impl Default for PhaseNoiseModel {
    fn default() -> Self {
        Self::Uniform { half_width: PI }
    }
}

impl PhaseNoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::None => Ok(()),
            Self::Uniform { half_width } | Self::Arcsine { half_width } => {
                if (0.0..=PI).contains(&half_width) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("half width {half_width} outside [0, π]")))
                }
            }
            Self::WrappedGaussian { std } => {
                if std >= 0.0 && std.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("phase std {std} must be finite and >= 0")))
                }
            }
        }
    }

    /// True when the phase does not fluctuate at all.
    pub fn is_sharp(&self) -> bool {
        match *self {
            Self::None => true,
            Self::Uniform { half_width } | Self::Arcsine { half_width } => half_width == 0.0,
            Self::WrappedGaussian { std } => std == 0.0,
        }
    }

    /// `E[f(θ)]` over the phase offset `θ`, by quadrature converged to 1e-10.
    pub fn expectation<F>(&self, mut f: F) -> Result<Vec<f64>>
    where
        F: FnMut(f64) -> Vec<f64>,
    {
        self.validate()?;
        let tol = quadrature::DEFAULT_TOL;
        if self.is_sharp() {
            return Ok(f(0.0));
        }
        match *self {
            Self::None => Ok(f(0.0)),
            Self::Uniform { half_width } if half_width >= PI => {
                quadrature::periodic_mean_adaptive(16, tol, f)
            }
            Self::Uniform { half_width } => {
                let integral = quadrature::gauss_legendre_adaptive(-half_width, half_width, 8, tol, f)?;
                Ok(integral.into_iter().map(|v| v / (2.0 * half_width)).collect())
            }
            Self::Arcsine { half_width } => {
                quadrature::periodic_mean_adaptive(16, tol, |t| f(half_width * t.sin()))
            }
            Self::WrappedGaussian { std } => quadrature::periodic_mean_adaptive(16, tol, |theta| {
                let w = TAU * wrapped_gaussian_density(theta, std);
                f(theta).into_iter().map(|v| v * w).collect()
            }),
        }
    }

    /// `E[e^{ikθ}]` for `k = 0..=k_max`.
    pub fn characteristic(&self, k_max: usize) -> Result<Vec<Complex64>> {
        let flat = self.expectation(|theta| {
            (0..=k_max)
                .flat_map(|k| {
                    let (s, c) = (k as f64 * theta).sin_cos();
                    [c, s]
                })
                .collect()
        })?;
        Ok(flat.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }
}

fn wrapped_gaussian_density(theta: f64, std: f64) -> f64 {
    let theta = (theta + PI).rem_euclid(TAU) - PI;
    if std < 1.5 {
        let norm = 1.0 / (std * TAU.sqrt());
        (-6..=6)
            .map(|k| {
                let x = theta + TAU * k as f64;
                norm * (-0.5 * x * x / (std * std)).exp()
            })
            .sum()
    } else {
        let mut acc = 1.0;
        for k in 1..=30 {
            let kf = k as f64;
            acc += 2.0 * (-0.5 * kf * kf * std * std).exp() * (kf * theta).cos();
        }
        acc / TAU
    }
}

/// Signal states covered by the closed-form oracles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalSpec {
    Vacuum,
    Coherent {
        amplitude: Complex64,
    },
    PhaseDiffusedCoherent {
        amplitude: Complex64,
        noise: PhaseNoiseModel,
    },
    /// Number state; not among the apparatus scenarios, but its negative
    /// quasidistribution exercises the estimator's sign handling.
    Fock {
        n: usize,
    },
}

impl SignalSpec {
    pub fn coherent(re: f64, im: f64) -> Self {
        Self::Coherent {
            amplitude: Complex64::new(re, im),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Vacuum | Self::Fock { .. } => Ok(()),
            Self::Coherent { amplitude } => check_amplitude(*amplitude),
            Self::PhaseDiffusedCoherent { amplitude, noise } => {
                check_amplitude(*amplitude)?;
                noise.validate()
            }
        }
    }

    pub fn mean_photons(&self) -> f64 {
        match self {
            Self::Vacuum => 0.0,
            Self::Coherent { amplitude } | Self::PhaseDiffusedCoherent { amplitude, .. } => amplitude.norm_sqr(),
            Self::Fock { n } => *n as f64,
        }
    }
}

fn check_amplitude(amplitude: Complex64) -> Result<()> {
    if amplitude.re.is_finite() && amplitude.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("non-finite signal amplitude".into()))
    }
}

/// `s = 1 - 1/(ηT)`.
pub fn s_from_losses(channel: &ChannelParams) -> Result<OrderingParam> {
    let eff = channel.efficiency();
    if eff.is_nan() || eff <= 0.0 {
        return Err(Error::UndefinedOrdering(eff));
    }
    OrderingParam::new(1.0 - 1.0 / eff)
}

fn gaussian_quasidist(alpha: Complex64, center: Complex64, s: f64) -> f64 {
    let width = 1.0 - s;
    2.0 / (PI * width) * (-2.0 * (alpha - center).norm_sqr() / width).exp()
}

/// `W(α; s)` of a number state, expanded term by term so that `s = -1` and
/// `s < -1` need no special casing:
/// `((s+1)/(s-1))^n L_n(4|α|²/(1-s²)) = Σ_k C(n,k) (-1)^k / k! (4|α|²/(1-s))^k (1+s)^{n-k} / (s-1)^n`.
fn fock_quasidist(n: usize, alpha: Complex64, s: f64) -> f64 {
    let width = 1.0 - s;
    let y = 4.0 * alpha.norm_sqr() / width;
    let mut binom = 1.0;
    let mut inv_fact = 1.0;
    let mut y_pow = 1.0;
    let mut poly = 0.0;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
            inv_fact /= k as f64;
            y_pow *= y;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        poly += sign * binom * inv_fact * y_pow * (1.0 + s).powi((n - k) as i32);
    }
    let prefactor = 2.0 / (PI * width);
    prefactor * poly / (s - 1.0).powi(n as i32) * (-2.0 * alpha.norm_sqr() / width).exp()
}

/// Closed-form `W(α; s)` for `s < 1`.
pub fn analytic_quasidist(spec: &SignalSpec, alpha: PhasePoint, s: OrderingParam) -> Result<f64> {
    let s = s.value();
    if s.is_nan() || s >= 1.0 {
        return Err(Error::OrderingRejected(s));
    }
    spec.validate()?;
    let a = alpha.value();
    match *spec {
        SignalSpec::Vacuum => Ok(gaussian_quasidist(a, Complex64::new(0.0, 0.0), s)),
        SignalSpec::Coherent { amplitude } => Ok(gaussian_quasidist(a, amplitude, s)),
        SignalSpec::Fock { n } => Ok(fock_quasidist(n, a, s)),
        SignalSpec::PhaseDiffusedCoherent { amplitude, noise } => {
            let v = noise.expectation(|theta| {
                vec![gaussian_quasidist(a, amplitude * Complex64::from_polar(1.0, theta), s)]
            })?;
            Ok(v[0])
        }
    }
}

/// `(1/ηT) W(β/sqrt(ηT); 1 - 1/(ηT))`.
pub fn predicted_p(spec: &SignalSpec, beta: PhasePoint, channel: &ChannelParams) -> Result<f64> {
    channel.validate()?;
    let s = s_from_losses(channel)?;
    let eff = channel.efficiency();
    Ok(analytic_quasidist(spec, beta.scale(1.0 / eff.sqrt()), s)? / eff)
}

/// Gaussian mode-mismatch damping `exp(-γ|β|²)`.
pub fn mode_mismatch_envelope(beta: PhasePoint, gamma: f64) -> f64 {
    (-gamma * beta.value().norm_sqr()).exp()
}

/// `∫ P(β) exp(-γ|β|²) d²β` over the disk `|β| ≤ radial_extent`: Gauss–Legendre
/// of the given order in radius, equispaced `2·order` nodes in phase.
pub fn normalization_check(
    spec: &SignalSpec,
    channel: &ChannelParams,
    radial_extent: f64,
    quadrature_order: usize,
    gamma: f64,
) -> Result<f64> {
    if !(radial_extent > 0.0) || quadrature_order == 0 {
        return Err(Error::InvalidParameter(
            "normalization needs a positive extent and order".into(),
        ));
    }
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("envelope gamma {gamma} must be >= 0")));
    }
    let phases = 2 * quadrature_order;
    let dphi = TAU / phases as f64;
    let mut err = None;
    let integral = quadrature::gauss_legendre_fixed(0.0, radial_extent, quadrature_order, |r| {
        let ring: f64 = (0..phases)
            .map(|j| {
                let beta = PhasePoint::from_polar(r, j as f64 * dphi);
                match predicted_p(spec, beta, channel) {
                    Ok(p) => p * mode_mismatch_envelope(beta, gamma),
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            })
            .sum();
        ring * dphi * r
    });
    match err {
        Some(e) => Err(e),
        None => Ok(integral),
    }
}
