//! Photon statistics seen by the detector, and the parity sum applied to them.
//!
//! Measurement model: at grid point `β` the signal is displaced to
//! `D†(β/sqrt(ηT)) ρ D(β/sqrt(ηT))` and then loses photons through a single
//! binomial channel of efficiency `ηT`. With this convention a coherent signal
//! `α0` arrives at the detector as a coherent state of amplitude
//! `sqrt(ηT) α0 - β`, so the parity sum peaks at `β = sqrt(ηT) α0`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::fock::{
    coherent_state, displaced_populations, photon_statistics, two_mode_bs_oracle, DensityMatrix,
    FockCutoff, PhasePoint, PhotonStatistics,
};
use crate::quasiprob::{ChannelParams, SignalSpec};
use crate::{Error, Result};

/// Bernoulli photodetection with overall efficiency `ηT`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    efficiency: f64,
}

impl LossChannel {
    pub fn new(efficiency: f64) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::InvalidParameter(format!("efficiency {efficiency} outside (0, 1]")));
        }
        Ok(Self { efficiency })
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }
}

impl From<&ChannelParams> for LossChannel {
    fn from(channel: &ChannelParams) -> Self {
        Self {
            efficiency: channel.efficiency(),
        }
    }
}

/// `p'_n = Σ_{m≥n} C(m,n) e^n (1-e)^{m-n} p_m`.
pub fn loss_transform(p: &PhotonStatistics, channel: LossChannel) -> PhotonStatistics {
    let e = channel.efficiency;
    if e == 1.0 {
        return p.clone();
    }
    let probs = p.probs();
    let len = probs.len();
    let ln_e = e.ln();
    let ln_1me = (1.0 - e).ln();
    let mut ln_fact = vec![0.0; len];
    for n in 1..len {
        ln_fact[n] = ln_fact[n - 1] + (n as f64).ln();
    }
    let mut out = vec![0.0; len];
    for (m, &pm) in probs.iter().enumerate() {
        if pm == 0.0 {
            continue;
        }
        for (n, slot) in out.iter_mut().enumerate().take(m + 1) {
            let ln_b = ln_fact[m] - ln_fact[n] - ln_fact[m - n]
                + n as f64 * ln_e
                + (m - n) as f64 * ln_1me;
            *slot += ln_b.exp() * pm;
        }
    }
    PhotonStatistics::new(out).expect("binomial thinning preserves validity")
}

/// `(2/π) Σ (-1)^n p_n`.
pub fn parity_sum(p: &PhotonStatistics) -> f64 {
    let alternating: f64 = p
        .probs()
        .iter()
        .enumerate()
        .map(|(n, x)| if n % 2 == 0 { *x } else { -*x })
        .sum();
    2.0 / PI * alternating
}

/// Density matrix of the signal on the given basis.
///
/// Phase-diffused states are the phase average of coherent projectors; since
/// `|α e^{iθ}><α e^{iθ}|_{mn} = c_m c_n* e^{i(m-n)θ}`, the average needs only
/// the phase distribution's characteristic function, evaluated by the noise
/// model's quadrature.
pub fn signal_density_matrix(spec: &SignalSpec, cutoff: FockCutoff) -> Result<DensityMatrix> {
    spec.validate()?;
    match *spec {
        SignalSpec::Vacuum => Ok(DensityMatrix::vacuum(cutoff)),
        SignalSpec::Fock { n } => DensityMatrix::fock(n, cutoff),
        SignalSpec::Coherent { amplitude } => {
            Ok(coherent_state(PhasePoint::new(amplitude), cutoff)?.to_density_matrix())
        }
        SignalSpec::PhaseDiffusedCoherent { amplitude, noise } => {
            let psi = coherent_state(PhasePoint::new(amplitude), cutoff)?;
            if noise.is_sharp() {
                return Ok(psi.to_density_matrix());
            }
            let chi = noise.characteristic(cutoff.n_max)?;
            let c = psi.amplitudes();
            let dim = cutoff.dim();
            let elements = DMatrix::from_fn(dim, dim, |m, n| {
                let phase = if m >= n { chi[m - n] } else { chi[n - m].conj() };
                c[m] * c[n].conj() * phase
            });
            Ok(DensityMatrix::from_parts(elements, cutoff))
        }
    }
}

/// Cutoff covering the displaced signal before loss, from the mean-count
/// bound `(sqrt(n̄) + |β|/sqrt(ηT))²`.
pub fn auto_cutoff(spec: &SignalSpec, beta: PhasePoint, channel: &ChannelParams) -> FockCutoff {
    let shift = beta.radius() / channel.efficiency().sqrt();
    let bound = spec.mean_photons().sqrt() + shift;
    FockCutoff::for_mean_photons(bound * bound)
}

/// Exact photon statistics registered at grid point `β`.
pub fn displaced_statistics(
    spec: &SignalSpec,
    beta: PhasePoint,
    channel: &ChannelParams,
    cutoff: FockCutoff,
) -> Result<PhotonStatistics> {
    channel.validate()?;
    if !beta.is_finite() {
        return Err(Error::InvalidParameter("non-finite grid point".into()));
    }
    let rho = signal_density_matrix(spec, cutoff)?;
    let shift = beta.scale(1.0 / channel.efficiency().sqrt());
    let populations = displaced_populations(&rho, shift)?;
    Ok(loss_transform(&PhotonStatistics::new(populations)?, channel.into()))
}

/// Sup-norm distance between the registered statistics predicted by the
/// exact two-mode beam splitter and by displacement followed by loss.
///
/// The probe `αp` enters the transmitted port as `i sqrt(1-T) αp`; the
/// displacement model reproduces it at grid point `β = -i sqrt(1-T) αp` with
/// `η = 1`.
pub fn bs_approximation_error(
    spec: &SignalSpec,
    probe_alpha: PhasePoint,
    transmission: f64,
    cutoff: FockCutoff,
) -> Result<f64> {
    let rho = signal_density_matrix(spec, cutoff)?;
    let exact = photon_statistics(&two_mode_bs_oracle(&rho, probe_alpha, transmission, cutoff)?);
    let channel = ChannelParams::new(1.0, transmission)?;
    let beta = probe_alpha.value() * Complex::new(0.0, -(1.0 - transmission).sqrt());
    let model = displaced_statistics(spec, PhasePoint::new(beta), &channel, cutoff)?;
    Ok(exact
        .probs()
        .iter()
        .zip(model.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
