use coopsim::adaptive::*;
use coopsim::coopnet::{CdmaNetwork, NetworkConfig, RelayProtocol};
use coopsim::linalg::{norm_sqr, CMat, CVec};
use coopsim::mmse::{alternating_optimize, AlternatingOptions, AmplitudeDomain, DestinationModel, Multiplier};
use coopsim::rng::{complex_gaussian, stream_rng, Stream};
use coopsim::signal::{generate_codes, random_symbol};
use coopsim::Complex64;

struct Instance {
    model: DestinationModel,
    net: CdmaNetwork,
}

fn instance(users: usize, relays: usize, chips: usize, paths: usize, noise_variance: f64, seed: u64) -> Instance {
    let cfg = NetworkConfig {
        users,
        relays,
        chips,
        paths,
        noise_variance,
        protocol: RelayProtocol::DecodeForward,
        isi: false,
        power_spread_db: 0.0,
    };
    let codes = generate_codes(users, chips, &mut stream_rng(seed, 0, Stream::Codes)).unwrap();
    let net = CdmaNetwork::generate(
        cfg,
        &codes,
        &mut stream_rng(seed, 0, Stream::Channels),
        &mut stream_rng(seed, 0, Stream::Powers),
    )
    .unwrap();
    Instance {
        model: DestinationModel::from_network(&net),
        net,
    }
}

/// Trains a receiver over `symbols` noisy observations generated with the
/// amplitudes the receiver currently believes in; returns the per-symbol
/// squared errors.
fn train(inst: &Instance, rx: &mut RalsReceiver, symbols: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 0, Stream::DestinationNoise);
    let k = inst.model.users();
    (0..symbols)
        .map(|_| {
            let b: Vec<Complex64> = (0..k).map(|_| random_symbol(&mut rng)).collect();
            let amps = rx.amplitudes();
            let mut r = CVec::from_fn(inst.model.observation_len(), |_, _| complex_gaussian(&mut rng, inst.model.noise_variance));
            for (u, a) in amps.iter().enumerate() {
                r += inst.model.effective(u, a) * b[u];
            }
            rx.step(&r, Reference::Training(&b)).unwrap().squared_error
        })
        .collect()
}

fn receiver(inst: &Instance, cfg: RalsConfig) -> RalsReceiver {
    RalsReceiver::new(cfg, inst.net.signatures.clone(), inst.net.user_powers.clone(), &inst.model.equal_amplitudes()).unwrap()
}

fn relative(a: &[CVec], b: &[CVec]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| norm_sqr(&(x - y))).sum();
    let den: f64 = b.iter().map(norm_sqr).sum();
    (num / den).sqrt()
}

fn flat(amps: &[CVec]) -> CVec {
    CVec::from_iterator(amps.iter().map(|a| a.len()).sum(), amps.iter().flat_map(|a| a.iter().copied()))
}

#[test]
fn frozen_filters_equal_weighted_least_squares() {
    // With the amplitudes held, the shared recursion is exact RLS: the filter
    // after i symbols solves the regularized, exponentially weighted normal
    // equations on the same data.
    let inst = instance(2, 1, 8, 2, 0.01, 3);
    let cfg = RalsConfig {
        power: PowerMode::Frozen,
        group_size: 2,
        ..RalsConfig::default()
    };
    let mut rx = receiver(&inst, cfg.clone());
    let amps = rx.amplitudes();
    let j = inst.model.observation_len();
    let mut rng = stream_rng(3, 0, Stream::DestinationNoise);
    let mut r_acc = CMat::zeros(j, j);
    let mut p_acc = vec![CVec::zeros(j); 2];
    let symbols = 200;
    for _ in 0..symbols {
        let b: Vec<Complex64> = (0..2).map(|_| random_symbol(&mut rng)).collect();
        let mut r = CVec::from_fn(j, |_, _| complex_gaussian(&mut rng, inst.model.noise_variance));
        for (u, a) in amps.iter().enumerate() {
            r += inst.model.effective(u, a) * b[u];
        }
        rx.step(&r, Reference::Training(&b)).unwrap();
        r_acc = r_acc * Complex64::new(cfg.alpha, 0.0) + &r * r.adjoint();
        for k in 0..2 {
            p_acc[k] = &p_acc[k] * Complex64::new(cfg.alpha, 0.0) + &r * b[k].conj();
        }
    }
    let load = cfg.alpha.powi(symbols) / cfg.initial_inverse;
    let reg = r_acc + CMat::identity(j, j) * Complex64::new(load, 0.0);
    let inv = reg.try_inverse().unwrap();
    let batch: Vec<CVec> = p_acc.iter().map(|p| &inv * p).collect();
    assert!(relative(rx.filters(), &batch) < 1e-8);
}

#[test]
fn filters_approach_known_statistics_mmse_with_data() {
    // The gap to the known-statistics filter shrinks as the window fills.
    let inst = instance(2, 1, 8, 2, 0.01, 5);
    let cfg = RalsConfig {
        power: PowerMode::Frozen,
        group_size: 2,
        alpha: 1.0,
        initial_inverse: 100.0,
        ..RalsConfig::default()
    };
    let mut rx = receiver(&inst, cfg);
    let target = inst.model.filters(&rx.amplitudes());
    train(&inst, &mut rx, 200, 5);
    let early = relative(rx.filters(), &target);
    train(&inst, &mut rx, 20_000, 6);
    let late = relative(rx.filters(), &target);
    assert!(late < 0.05, "late {late}");
    assert!(late < early / 4.0, "early {early} late {late}");
}

#[test]
fn channel_estimates_align_at_high_snr() {
    let inst = instance(1, 1, 8, 3, 1e-6, 11);
    let mut rx = receiver(&inst, RalsConfig::default());
    train(&inst, &mut rx, 200, 11);
    let est = rx.channel_estimates().unwrap();
    let truth = inst.net.channels[0].stacked();
    let l = 3;
    for link in 0..2 {
        let a: CVec = est[0].rows(link * l, l).into();
        let b: CVec = truth.rows(link * l, l).into();
        let angle = subspace_angle_deg(&a, &b);
        assert!(angle < 2.0, "link {link}: {angle} degrees");
    }
}

#[test]
fn adapted_power_points_along_the_batch_allocation() {
    // The recursion has no explicit multiplier, so the batch reference is the
    // unpenalized least-squares allocation.
    let mut cosines = Vec::new();
    for seed in 0..40 {
        let inst = instance(2, 1, 8, 3, 0.01, seed);
        let mut rx = receiver(
            &inst,
            RalsConfig {
                group_size: 2,
                ..RalsConfig::default()
            },
        );
        train(&inst, &mut rx, 500, seed);
        let opts = AlternatingOptions {
            group_size: 2,
            multiplier: Multiplier::Fixed(0.0),
            domain: AmplitudeDomain::NonNegative,
            ..Default::default()
        };
        let batch = alternating_optimize(&inst.model, &opts).unwrap();
        let (a, b) = (flat(&rx.amplitudes()), flat(&batch.amplitudes));
        cosines.push(a.dotc(&b).norm() / (norm_sqr(&a) * norm_sqr(&b)).sqrt());
        assert!(rx.max_constraint_violation() < 1e-10);
    }
    cosines.sort_by(f64::total_cmp);
    assert!(cosines[20] >= 0.95, "median cosine {}", cosines[20]);
}

#[test]
fn two_inner_iterations_learn_faster() {
    let mut totals = [0.0; 2];
    for seed in 0..20 {
        let inst = instance(2, 1, 8, 2, 0.01, seed);
        for (slot, it) in [1, 2].into_iter().enumerate() {
            let mut rx = receiver(
                &inst,
                RalsConfig {
                    group_size: 2,
                    inner_iterations: it,
                    ..RalsConfig::default()
                },
            );
            totals[slot] += train(&inst, &mut rx, 200, seed)[20..].iter().sum::<f64>();
        }
    }
    assert!(totals[1] < totals[0], "{totals:?}");
}

#[test]
fn freezing_before_the_first_symbol_matches_fixed_power() {
    let inst = instance(3, 2, 8, 2, 0.05, 21);
    let mut frozen = receiver(
        &inst,
        RalsConfig {
            power: PowerMode::Frozen,
            group_size: 2,
            ..RalsConfig::default()
        },
    );
    let mut stopped = receiver(
        &inst,
        RalsConfig {
            group_size: 2,
            ..RalsConfig::default()
        },
    );
    stopped.freeze_power();
    let a = train(&inst, &mut frozen, 150, 21);
    let b = train(&inst, &mut stopped, 150, 21);
    assert_eq!(a, b);
    assert_eq!(frozen.amplitudes(), stopped.amplitudes());
    assert_eq!(frozen.filters(), stopped.filters());
}

#[test]
fn rls_inverse_tracks_direct_inversion() {
    let j = 6;
    let mut state = RlsCovarianceState::new(j, 0.5, 0.97).unwrap();
    let mut rng = stream_rng(1, 0, Stream::DestinationNoise);
    let mut acc = CMat::identity(j, j) * Complex64::new(2.0, 0.0);
    for _ in 0..50 {
        let r = CVec::from_fn(j, |_, _| complex_gaussian(&mut rng, 1.0));
        let gain = rls_cov_update(&mut state, &r).clone();
        acc = acc * Complex64::new(0.97, 0.0) + &r * r.adjoint();
        let inv = acc.clone().try_inverse().unwrap();
        assert!((&state.inverse - &inv).norm() / inv.norm() < 1e-9);
        assert!((gain - &inv * &r).norm() < 1e-9 * (inv.norm() * r.norm()));
    }
}

#[test]
fn zero_correlation_yields_a_zero_channel_estimate() {
    let mut s = ChannelRlsState::new(CVec::zeros(3), 0.9, None);
    s.correlation = CMat::zeros(3, 3);
    let q = CMat::identity(3, 3);
    let r = CVec::from_element(3, Complex64::new(0.3, -0.2));
    let h = rals_channel_update(&mut s, &q, &CMat::identity(3, 3), &r);
    assert_eq!(norm_sqr(h), 0.0);
}
