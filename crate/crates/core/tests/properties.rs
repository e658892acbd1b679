use std::f64::consts::PI;

use nalgebra::DMatrix;
use photon_wigner::experiment::{auto_cutoff, signal_density_matrix};
use photon_wigner::fock::DEFAULT_TAIL_TOL;
use photon_wigner::{
    analytic_quasidist, apply_displacement, coherent_state, displaced_statistics,
    displacement_matrix, loss_transform, parity_expectation, parity_sum, predicted_p,
    two_mode_bs_oracle, wigner_point, ChannelParams, Complex64, DensityMatrix, FockCutoff,
    LossChannel, OrderingParam, PhaseNoiseModel, PhasePoint, PhotonStatistics, SignalSpec,
};
use proptest::prelude::*;

/// Random mixed state supported on |0>..|support-1>, embedded in `cutoff`.
fn random_state(entries: &[(f64, f64)], support: usize, cutoff: FockCutoff) -> DensityMatrix {
    let rank = entries.len() / support;
    let a = DMatrix::from_fn(support, rank, |i, j| {
        let (re, im) = entries[i * rank + j];
        Complex64::new(re, im)
    });
    let mut rho = &a * a.adjoint();
    let tr = rho.trace().re;
    rho /= Complex64::new(tr, 0.0);
    let mut full = DMatrix::zeros(cutoff.dim(), cutoff.dim());
    full.view_mut((0, 0), (support, support)).copy_from(&rho);
    // restore exact Hermiticity lost to rounding
    let herm = (&full + full.adjoint()) / Complex64::new(2.0, 0.0);
    DensityMatrix::new(herm, cutoff.tail_tol).unwrap()
}

fn state_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 18)
        .prop_filter("non-degenerate", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 0.1))
}

fn point(max_radius: f64) -> impl Strategy<Value = PhasePoint> {
    (0.0..max_radius, 0.0..(2.0 * PI)).prop_map(|(r, phi)| PhasePoint::from_polar(r, phi))
}

fn statistics_strategy() -> impl Strategy<Value = PhotonStatistics> {
    prop::collection::vec(0.0..1.0f64, 1..25).prop_filter_map("non-zero", |raw| {
        let total: f64 = raw.iter().sum();
        (total > 1e-6).then(|| PhotonStatistics::new(raw.iter().map(|x| x / total).collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn displacement_is_unitary_on_central_block(n_max in 20usize..90, frac in 0.0..1.0f64, phi in 0.0..(2.0 * PI)) {
        let alpha = PhasePoint::from_polar((frac * n_max as f64 / 4.0).sqrt(), phi);
        // The truncated columns of D leak past n_max; evaluate on the enlarged
        // working basis used for displacement and check the declared block.
        let d = displacement_matrix(alpha, FockCutoff::new(n_max).working());
        let dd = d.adjoint() * &d;
        let block = n_max / 2;
        for i in 0..block {
            for j in 0..block {
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dd[(i, j)] - expect).norm() < 1e-8, "({}, {}) deviates", i, j);
            }
        }
    }

    #[test]
    fn displacement_composes_to_identity(entries in state_strategy(), alpha in point(1.2)) {
        let cutoff = FockCutoff::new(40);
        let rho = random_state(&entries, 6, cutoff);
        let back = apply_displacement(&apply_displacement(&rho, alpha).unwrap(), -alpha).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                prop_assert!((back.elements()[(i, j)] - rho.elements()[(i, j)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn parity_is_bounded(entries in state_strategy(), alpha in point(1.5)) {
        let cutoff = FockCutoff::new(40);
        let rho = random_state(&entries, 6, cutoff);
        prop_assert!(parity_expectation(&rho).abs() <= 1.0 + 1e-10);
        let displaced = apply_displacement(&rho, alpha).unwrap();
        prop_assert!(parity_expectation(&displaced).abs() <= 1.0 + 1e-10);
    }

    #[test]
    fn vacuum_wigner_is_gaussian(alpha in point(2.0)) {
        let rho = DensityMatrix::vacuum(FockCutoff::for_mean_photons(4.0));
        let w = wigner_point(&rho, alpha).unwrap();
        let expect = 2.0 / PI * (-2.0 * alpha.value().norm_sqr()).exp();
        prop_assert!((w - expect).abs() < 1e-10);
    }

    #[test]
    fn beam_splitter_keeps_coherent_states(amp in point(1.2), probe in point(1.2), t_idx in 0usize..4) {
        let t = [0.5, 0.9, 0.986, 1.0][t_idx];
        let cutoff = FockCutoff::new(30);
        let rho = coherent_state(amp, cutoff).unwrap().to_density_matrix();
        let out = two_mode_bs_oracle(&rho, probe, t, cutoff).unwrap();
        let expected = amp.value() * t.sqrt() + Complex64::i() * (1.0 - t).sqrt() * probe.value();
        let direct = coherent_state(PhasePoint::new(expected), cutoff).unwrap().to_density_matrix();
        for (a, b) in out.elements().iter().zip(direct.elements().iter()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn loss_channels_compose(p in statistics_strategy(), e1 in 0.01..1.0f64, e2 in 0.01..1.0f64) {
        let two_step = loss_transform(&loss_transform(&p, LossChannel::new(e1).unwrap()), LossChannel::new(e2).unwrap());
        let one_step = loss_transform(&p, LossChannel::new(e1 * e2).unwrap());
        for (a, b) in two_step.probs().iter().zip(one_step.probs()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((one_step.total() - p.total()).abs() < 1e-12);
    }

    #[test]
    fn lossy_parity_generating_function(p in statistics_strategy(), e in 0.01..1.0f64) {
        let lhs = parity_sum(&loss_transform(&p, LossChannel::new(e).unwrap()));
        let rhs: f64 = 2.0 / PI * p.probs().iter().enumerate().map(|(m, pm)| pm * (1.0 - 2.0 * e).powi(m as i32)).sum::<f64>();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn parity_sum_matches_closed_form(
        kind in 0usize..4,
        amp in point(1.5),
        beta in point(2.0),
        channel_idx in 0usize..3,
    ) {
        let spec = match kind {
            0 => SignalSpec::Vacuum,
            1 => SignalSpec::Coherent { amplitude: amp.value() },
            2 => SignalSpec::Fock { n: 1 },
            _ => SignalSpec::PhaseDiffusedCoherent { amplitude: amp.value(), noise: PhaseNoiseModel::WrappedGaussian { std: 0.6 } },
        };
        let channel = [
            ChannelParams::lossless(),
            ChannelParams::apparatus_default(),
            ChannelParams::new(0.5, 0.9).unwrap(),
        ][channel_idx];
        let stats = displaced_statistics(&spec, beta, &channel, auto_cutoff(&spec, beta, &channel)).unwrap();
        let predicted = predicted_p(&spec, beta, &channel).unwrap();
        prop_assert!((parity_sum(&stats) - predicted).abs() < 1e-9);
        prop_assert!(stats.deficit() < DEFAULT_TAIL_TOL);
    }

    #[test]
    fn closed_forms_are_rotation_covariant(amp in point(1.5), alpha in point(2.0), phi in 0.0..(2.0 * PI), s in -2.0..0.9f64) {
        let rot = Complex64::from_polar(1.0, phi);
        let s = OrderingParam::new(s).unwrap();
        let a = analytic_quasidist(&SignalSpec::Coherent { amplitude: amp.value() }, alpha, s).unwrap();
        let b = analytic_quasidist(&SignalSpec::Coherent { amplitude: amp.value() * rot }, PhasePoint::new(alpha.value() * rot), s).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn signal_density_matrices_are_valid(amp in point(1.5), width in 0.0..PI, model in 0usize..3) {
        let noise = match model {
            0 => PhaseNoiseModel::Uniform { half_width: width },
            1 => PhaseNoiseModel::Arcsine { half_width: width },
            _ => PhaseNoiseModel::WrappedGaussian { std: width },
        };
        let spec = SignalSpec::PhaseDiffusedCoherent { amplitude: amp.value(), noise };
        let rho = signal_density_matrix(&spec, FockCutoff::for_mean_photons(2.25)).unwrap();
        prop_assert!(DensityMatrix::new(rho.elements().clone(), DEFAULT_TAIL_TOL).is_ok());
    }
}
