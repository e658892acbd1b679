use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{DensityMatrix, FockCutoff, PhasePoint};
use crate::{Error, Result};

/// Above this `|α|²` the Laguerre recurrence is carried in a split
/// magnitude/log-scale form.
const LOG_SPLIT_THRESHOLD: f64 = 30.0;
const RESCALE_LIMIT: f64 = 1e64;

/// `ln n!` for `n = 0..len`.
pub(crate) fn ln_factorials(len: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(len.max(1));
    let mut acc = 0.0;
    table.push(0.0);
    for n in 1..len {
        acc += (n as f64).ln();
        table.push(acc);
    }
    table
}

/// `(sign, ln|L_n^(k)(x)|)` for `n = 0..len`.
fn laguerre_log_column(k: usize, x: f64, len: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    let kf = k as f64;
    let split = x > LOG_SPLIT_THRESHOLD;
    let push = |out: &mut Vec<(f64, f64)>, v: f64, log_scale: f64| {
        if v == 0.0 {
            out.push((0.0, f64::NEG_INFINITY));
        } else {
            out.push((v.signum(), v.abs().ln() + log_scale));
        }
    };

    let mut prev = 1.0;
    let mut log_scale = 0.0;
    push(&mut out, prev, 0.0);
    if len == 1 {
        return out;
    }
    let mut cur = 1.0 + kf - x;
    push(&mut out, cur, 0.0);
    for j in 1..len - 1 {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * cur - (jf + kf) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        if split && cur.abs() > RESCALE_LIMIT {
            let s = cur.abs();
            cur /= s;
            prev /= s;
            log_scale += s.ln();
        }
        push(&mut out, cur, log_scale);
    }
    out
}

/// Matrix of `<m|D(α)|n>` on the cutoff's basis.
///
/// Lower triangle (`m ≥ n`, `k = m - n`):
/// `sqrt(n!/m!) α^k e^{-|α|²/2} L_n^(k)(|α|²)`, with factorial ratios and
/// powers combined in the log domain. The upper triangle follows from
/// `D(α)† = D(-α)`: `<n|D|m> = (-1)^k conj(<m|D|n>)`.
pub fn displacement_matrix(alpha: PhasePoint, cutoff: FockCutoff) -> DMatrix<Complex64> {
    let dim = cutoff.dim();
    if alpha.radius() == 0.0 {
        return DMatrix::identity(dim, dim);
    }
    let x = alpha.value().norm_sqr();
    let ln_r = alpha.radius().ln();
    let theta = alpha.value().arg();
    let lf = ln_factorials(dim);

    let mut d = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let rotation = Complex64::from_polar(1.0, k as f64 * theta);
        let lag = laguerre_log_column(k, x, dim - k);
        for (n, &(sign, ln_l)) in lag.iter().enumerate() {
            if sign == 0.0 {
                continue;
            }
            let m = n + k;
            let ln_mag = 0.5 * (lf[n] - lf[m]) + k as f64 * ln_r - 0.5 * x + ln_l;
            let lower = rotation * (sign * ln_mag.exp());
            d[(m, n)] = lower;
            if k > 0 {
                let upper = lower.conj();
                d[(n, m)] = if k % 2 == 0 { upper } else { -upper };
            }
        }
    }
    d
}

/// `D†(α) ρ D(α)`, computed on the enlarged working basis and truncated back
/// to `ρ`'s cutoff. Fails if the mass lost in the truncation exceeds the
/// cutoff's `tail_tol`.
pub fn apply_displacement(rho: &DensityMatrix, alpha: PhasePoint) -> Result<DensityMatrix> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter("non-finite displacement".into()));
    }
    let cutoff = rho.cutoff();
    if alpha.radius() == 0.0 {
        return Ok(rho.clone());
    }
    let working = rho.embed(cutoff.working())?;
    let d = displacement_matrix(alpha, working.cutoff());
    let full = d.adjoint() * working.elements() * &d;
    let dim = cutoff.dim();
    let truncated = full.view((0, 0), (dim, dim)).into_owned();
    let loss = rho.trace() - truncated.trace().re;
    cutoff.check_loss(loss)?;
    Ok(DensityMatrix::from_parts(truncated, cutoff))
}

/// Diagonal of `D†(α) ρ D(α)` on `ρ`'s own basis.
///
/// Only the `(n_max+1)²` block of `D` enters the retained diagonal, and the
/// closed form makes that block exact, so no enlarged basis is needed here.
pub(crate) fn displaced_populations(rho: &DensityMatrix, alpha: PhasePoint) -> Result<Vec<f64>> {
    let cutoff = rho.cutoff();
    let d = displacement_matrix(alpha, cutoff);
    let rho_d = rho.elements() * &d;
    let populations: Vec<f64> = (0..cutoff.dim())
        .map(|i| {
            d.column(i)
                .iter()
                .zip(rho_d.column(i).iter())
                .map(|(dk, mk)| (dk.conj() * mk).re)
                .sum::<f64>()
                .clamp(0.0, 1.0)
        })
        .collect();
    let loss = rho.trace() - populations.iter().sum::<f64>();
    cutoff.check_loss(loss)?;
    Ok(populations)
}
