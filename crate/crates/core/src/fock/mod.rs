//! Truncated Fock-space states and the displaced-parity machinery.
//!
//! All states live in the basis `|0>, .., |n_max>`. Probability that leaks past
//! `n_max` is measured and reported as a truncation loss; nothing here
//! renormalizes a state after truncating it.

mod beam_splitter;
mod displacement;

use std::f64::consts::{PI, TAU};
use std::ops::Neg;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use beam_splitter::two_mode_bs_oracle;
pub use displacement::{apply_displacement, displacement_matrix};
pub(crate) use displacement::displaced_populations;

pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Tolerances used when validating Hermiticity and positivity.
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Highest retained Fock index together with the tolerated truncation loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockCutoff {
    pub n_max: usize,
    pub tail_tol: f64,
}

impl FockCutoff {
    pub fn new(n_max: usize) -> Self {
        Self {
            n_max,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }

    pub fn with_tail_tol(mut self, tail_tol: f64) -> Self {
        self.tail_tol = tail_tol;
        self
    }

    /// Cutoff large enough that a Poisson-like distribution with the given mean
    /// has a tail below 1e-12: `ceil(mean + 10 sqrt(mean + 1) + 20)`.
    pub fn for_mean_photons(mean: f64) -> Self {
        let mean = mean.max(0.0);
        Self::new((mean + 10.0 * (mean + 1.0).sqrt() + 20.0).ceil() as usize)
    }

    /// Basis size, `n_max + 1`.
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Enlarged space used while displacing: `2 n_max + 20`.
    pub fn working(&self) -> Self {
        Self {
            n_max: 2 * self.n_max + 20,
            tail_tol: self.tail_tol,
        }
    }

    pub(crate) fn check_loss(&self, loss: f64) -> Result<()> {
        if loss > self.tail_tol {
            Err(Error::Truncation {
                loss,
                tol: self.tail_tol,
                n_max: self.n_max,
            })
        } else {
            Ok(())
        }
    }
}

/// A point of phase space (dimensionless complex field amplitude).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint(Complex64);

impl PhasePoint {
    pub fn new(value: Complex64) -> Self {
        Self(value)
    }

    pub fn from_cartesian(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn from_polar(radius: f64, phase: f64) -> Self {
        Self(Complex64::from_polar(radius, phase))
    }

    pub fn origin() -> Self {
        Self::default()
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn radius(&self) -> f64 {
        self.0.norm()
    }

    /// Argument folded into `[0, 2π)`.
    pub fn phase(&self) -> f64 {
        let phase = self.0.arg().rem_euclid(TAU);
        if phase >= TAU {
            0.0
        } else {
            phase
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.re.is_finite() && self.0.im.is_finite()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0 * factor)
    }
}

impl Neg for PhasePoint {
    type Output = Self;

    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl From<Complex64> for PhasePoint {
    fn from(value: Complex64) -> Self {
        Self(value)
    }
}

/// Pure state expanded in the Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
    cutoff: FockCutoff,
}

impl StateVector {
    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn to_density_matrix(&self) -> DensityMatrix {
        DensityMatrix {
            elements: &self.amplitudes * self.amplitudes.adjoint(),
            cutoff: self.cutoff,
        }
    }
}

/// Signal state `ρ` in the truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    elements: DMatrix<Complex64>,
    cutoff: FockCutoff,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity before accepting `elements`.
    pub fn new(elements: DMatrix<Complex64>, tail_tol: f64) -> Result<Self> {
        if !elements.is_square() || elements.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "expected a non-empty square matrix, got {}x{}",
                elements.nrows(),
                elements.ncols()
            )));
        }
        let dim = elements.nrows();
        for i in 0..dim {
            for j in i..dim {
                let diff = (elements[(i, j)] - elements[(j, i)].conj()).norm();
                if diff > HERMITIAN_TOL {
                    return Err(Error::InvalidState(format!(
                        "not Hermitian at ({i}, {j}): deviation {diff:.3e}"
                    )));
                }
            }
        }
        let trace = elements.trace().re;
        if trace > 1.0 + HERMITIAN_TOL || trace < 1.0 - tail_tol {
            return Err(Error::InvalidState(format!(
                "trace {trace} outside [1 - {tail_tol:e}, 1]"
            )));
        }
        let min_eig = elements
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite: smallest eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self {
            elements,
            cutoff: FockCutoff::new(dim - 1).with_tail_tol(tail_tol),
        })
    }

    pub(crate) fn from_parts(elements: DMatrix<Complex64>, cutoff: FockCutoff) -> Self {
        debug_assert_eq!(elements.nrows(), cutoff.dim());
        Self { elements, cutoff }
    }

    pub fn vacuum(cutoff: FockCutoff) -> Self {
        Self::fock(0, cutoff).expect("vacuum fits in any cutoff")
    }

    pub fn fock(n: usize, cutoff: FockCutoff) -> Result<Self> {
        if n > cutoff.n_max {
            return Err(Error::InvalidParameter(format!(
                "Fock state |{n}> does not fit below n_max = {}",
                cutoff.n_max
            )));
        }
        let mut elements = DMatrix::zeros(cutoff.dim(), cutoff.dim());
        elements[(n, n)] = Complex64::new(1.0, 0.0);
        Ok(Self { elements, cutoff })
    }

    /// Mixture `Σ w_i ρ_i`; all components must share one cutoff.
    pub fn mixture(components: &[(f64, DensityMatrix)]) -> Result<Self> {
        let (_, first) = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let mut elements = DMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in components {
            if rho.dim() != first.dim() {
                return Err(Error::InvalidParameter("mixture cutoffs differ".into()));
            }
            elements += rho.elements.map(|z| z * *w);
        }
        Ok(Self {
            elements,
            cutoff: first.cutoff,
        })
    }

    pub fn elements(&self) -> &DMatrix<Complex64> {
        &self.elements
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn n_max(&self) -> usize {
        self.cutoff.n_max
    }

    pub fn trace(&self) -> f64 {
        self.elements.trace().re
    }

    /// Copy into a larger basis; new rows and columns are zero.
    pub fn embed(&self, cutoff: FockCutoff) -> Result<Self> {
        if cutoff.n_max < self.n_max() {
            return Err(Error::InvalidParameter(format!(
                "cannot embed n_max = {} into n_max = {}",
                self.n_max(),
                cutoff.n_max
            )));
        }
        let mut elements = DMatrix::zeros(cutoff.dim(), cutoff.dim());
        elements
            .view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.elements);
        Ok(Self { elements, cutoff })
    }
}

/// Photon-number distribution `p_n`, `n = 0..=n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonStatistics {
    probs: Vec<f64>,
}

impl PhotonStatistics {
    /// Entries must lie in `[0, 1]` (values down to -1e-12 are clamped to zero)
    /// and sum to at most one.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty photon statistics".into()));
        }
        for (n, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -HERMITIAN_TOL || *p > 1.0 + HERMITIAN_TOL {
                return Err(Error::InvalidParameter(format!("p_{n} = {p} is not a probability")));
            }
            *p = p.clamp(0.0, 1.0);
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + 1e-9 {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total} > 1")));
        }
        Ok(Self { probs })
    }

    /// Poisson distribution truncated at `n_max` (not renormalized).
    pub fn poisson(mean: f64, n_max: usize) -> Self {
        let mut probs = Vec::with_capacity(n_max + 1);
        let mut p = (-mean).exp();
        for n in 0..=n_max {
            probs.push(p);
            p *= mean / (n + 1) as f64;
        }
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Missing probability mass, `1 - Σ p_n`.
    pub fn deficit(&self) -> f64 {
        1.0 - self.total()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

/// Coherent state `|α>` from the recurrence `c_{n+1} = c_n α / sqrt(n+1)`.
pub fn coherent_state(alpha: PhasePoint, cutoff: FockCutoff) -> Result<StateVector> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter("non-finite coherent amplitude".into()));
    }
    let a = alpha.value();
    let mut amplitudes = DVector::zeros(cutoff.dim());
    let mut c = Complex64::new((-0.5 * a.norm_sqr()).exp(), 0.0);
    for n in 0..cutoff.dim() {
        amplitudes[n] = c;
        c *= a / ((n + 1) as f64).sqrt();
    }
    let state = StateVector { amplitudes, cutoff };
    cutoff.check_loss(1.0 - state.norm_sqr())?;
    Ok(state)
}

pub fn photon_statistics(rho: &DensityMatrix) -> PhotonStatistics {
    PhotonStatistics {
        probs: rho
            .elements
            .diagonal()
            .iter()
            .map(|z| z.re.clamp(0.0, 1.0))
            .collect(),
    }
}

/// `Σ (-1)^n ρ_nn`.
pub fn parity_expectation(rho: &DensityMatrix) -> f64 {
    rho.elements
        .diagonal()
        .iter()
        .enumerate()
        .map(|(n, z)| if n % 2 == 0 { z.re } else { -z.re })
        .sum()
}

/// `W(α) = (2/π) <D(α) Π D†(α)>`, evaluated as the parity of `D†(α) ρ D(α)`.
pub fn wigner_point(rho: &DensityMatrix, alpha: PhasePoint) -> Result<f64> {
    let displaced = apply_displacement(rho, alpha)?;
    Ok(2.0 / PI * parity_expectation(&displaced))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn poisson_factorial(mean: f64, n: usize) -> f64 {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        (-mean).exp() * mean.powi(n as i32) / fact
    }

    #[test]
    fn vacuum_coherent_state() {
        let psi = coherent_state(PhasePoint::origin(), FockCutoff::new(10)).unwrap();
        assert_eq!(psi.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(psi.amplitudes().iter().skip(1).all(|c| *c == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn coherent_populations_are_poisson() {
        let psi = coherent_state(PhasePoint::from_cartesian(1.0, 0.0), FockCutoff::new(30)).unwrap();
        for (n, c) in psi.amplitudes().iter().enumerate() {
            assert_abs_diff_eq!(c.norm_sqr(), poisson_factorial(1.0, n), epsilon = 1e-14);
        }
        let tail: f64 = (31..60).map(|n| poisson_factorial(1.0, n)).sum();
        assert!(tail < 1e-12);
        assert_abs_diff_eq!(psi.norm_sqr(), 1.0 - tail, epsilon = 1e-14);
        assert!(psi.norm_sqr() > 1.0 - 1e-12);
    }

    #[test]
    fn coherent_state_rejects_small_cutoff() {
        let err = coherent_state(PhasePoint::from_cartesian(3.0, 0.0), FockCutoff::new(5)).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn statistics_and_parity_of_simple_states() {
        let cutoff = FockCutoff::new(6);
        let vac = DensityMatrix::vacuum(cutoff);
        assert_eq!(photon_statistics(&vac).probs()[..3], [1.0, 0.0, 0.0]);
        assert_eq!(parity_expectation(&vac), 1.0);

        let one = DensityMatrix::fock(1, cutoff).unwrap();
        assert_eq!(parity_expectation(&one), -1.0);

        let mix = DensityMatrix::mixture(&[(0.5, vac), (0.5, one)]).unwrap();
        assert_eq!(photon_statistics(&mix).probs()[..3], [0.5, 0.5, 0.0]);
        assert_eq!(parity_expectation(&mix), 0.0);
    }

    #[test]
    fn coherent_parity_is_exponential() {
        for nbar in [0.25_f64, 1.0, 2.5] {
            let rho = coherent_state(PhasePoint::from_polar(nbar.sqrt(), 0.4), FockCutoff::for_mean_photons(nbar))
                .unwrap()
                .to_density_matrix();
            let direct: f64 = (0..=rho.n_max())
                .map(|n| (-1f64).powi(n as i32) * poisson_factorial(nbar, n))
                .sum();
            assert_abs_diff_eq!(parity_expectation(&rho), direct, epsilon = 1e-13);
            assert_abs_diff_eq!(parity_expectation(&rho), (-2.0 * nbar).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        m[(1, 1)] = Complex64::new(0.5, 0.0);
        m[(0, 1)] = Complex64::new(0.0, 0.5);
        m[(1, 0)] = Complex64::new(0.0, -0.5);
        assert!(DensityMatrix::new(m.clone(), 1e-10).is_ok());

        let mut not_hermitian = m.clone();
        not_hermitian[(1, 0)] = Complex64::new(0.0, 0.5);
        assert!(DensityMatrix::new(not_hermitian, 1e-10).is_err());

        let mut not_psd = m.clone();
        not_psd[(0, 1)] = Complex64::new(0.0, 0.8);
        not_psd[(1, 0)] = Complex64::new(0.0, -0.8);
        assert!(DensityMatrix::new(not_psd, 1e-10).is_err());

        let half = m.map(|z| z * 0.5);
        assert!(DensityMatrix::new(half, 1e-10).is_err());
    }

    #[test]
    fn phase_point_folds_phase() {
        let p = PhasePoint::from_cartesian(0.0, -1.0);
        assert_abs_diff_eq!(p.phase(), 1.5 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(p.radius(), 1.0);
        assert_eq!(PhasePoint::origin().phase(), 0.0);
    }

    #[test]
    fn auto_cutoff_rule() {
        assert_eq!(FockCutoff::for_mean_photons(0.0).n_max, 30);
        assert_eq!(FockCutoff::for_mean_photons(1.0).n_max, 36);
        assert_eq!(FockCutoff::new(10).working().n_max, 40);
    }
}
