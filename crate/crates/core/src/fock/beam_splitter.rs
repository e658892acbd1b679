use nalgebra::DMatrix;
use num_complex::Complex64;

use super::displacement::ln_factorials;
use super::{coherent_state, DensityMatrix, FockCutoff, PhasePoint};
use crate::{Error, Result};

fn binomials(max: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(max + 1);
    for n in 0..=max {
        let mut row = vec![1.0; n + 1];
        for k in 1..n {
            row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
        }
        rows.push(row);
    }
    rows
}

/// Reduced state of the transmitted port of a beam splitter fed with the
/// signal `ρ` and a coherent probe.
///
/// Mode convention: `a_out = sqrt(T) a + i sqrt(1-T) b`, so a coherent
/// signal `α0` leaves as `sqrt(T) α0 + i sqrt(1-T) αp`. The two-mode product
/// state is evolved exactly in the photon-number-conserving blocks and the
/// reflected mode is traced out. Both input modes are truncated at
/// `cutoff.n_max`.
pub fn two_mode_bs_oracle(
    rho_signal: &DensityMatrix,
    probe_alpha: PhasePoint,
    transmission: f64,
    cutoff: FockCutoff,
) -> Result<DensityMatrix> {
    if !(transmission > 0.0 && transmission <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beam-splitter transmission {transmission} outside (0, 1]"
        )));
    }
    let rho = rho_signal.embed(cutoff)?;
    let probe = coherent_state(probe_alpha, cutoff)?;
    let n = cutoff.n_max;
    let out_dim = 2 * n + 1;

    let t = transmission.sqrt();
    let r = (1.0 - transmission).sqrt();
    let binom = binomials(n);
    let lf = ln_factorials(out_dim + 1);
    let i_pow = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];

    // <p, q| U |m, k> for U a† U† = t a† + i r b†, U b† U† = i r a† + t b†.
    let amplitude = |m: usize, k: usize, p: usize| -> Complex64 {
        let q = m + k - p;
        let norm = (0.5 * (lf[p] + lf[q] - lf[m] - lf[k])).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        let j_lo = p.saturating_sub(k);
        let j_hi = m.min(p);
        for j in j_lo..=j_hi {
            let l = p - j;
            let t_pow = (j + k - l) as i32;
            let r_pow = (m - j + l) as i32;
            let coeff = binom[m][j] * binom[k][l] * t.powi(t_pow) * r.powi(r_pow);
            acc += i_pow[(m - j + l) % 4] * coeff;
        }
        acc * norm
    };

    // For each reflected-port number q: A_q[p, m] = Σ_k c_k <p,q|U|m,k>.
    let c = probe.amplitudes();
    let mut out = DMatrix::<Complex64>::zeros(out_dim, out_dim);
    for q in 0..out_dim {
        let mut a_q = DMatrix::<Complex64>::zeros(out_dim, n + 1);
        for p in 0..out_dim {
            for m in 0..=n {
                // k = p + q - m must lie in 0..=n
                let total = p + q;
                if total < m || total - m > n {
                    continue;
                }
                let k = total - m;
                if c[k] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                a_q[(p, m)] = c[k] * amplitude(m, k, p);
            }
        }
        out += &a_q * rho.elements() * a_q.adjoint();
    }

    let dim = cutoff.dim();
    let truncated = out.view((0, 0), (dim, dim)).into_owned();
    let loss = rho.trace() - truncated.trace().re;
    cutoff.check_loss(loss)?;
    Ok(DensityMatrix::from_parts(truncated, cutoff))
}
