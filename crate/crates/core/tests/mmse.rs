use coopsim::coopnet::{CdmaNetwork, NetworkConfig, RelayProtocol};
use coopsim::linalg::{add_outer, eye, norm_sqr, quad_form, real_part_mat, real_part_vec, CMat, CVec};
use coopsim::mmse::*;
use coopsim::rng::{stream_rng, Stream};
use coopsim::signal::generate_codes;
use coopsim::Complex64;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn model(users: usize, relays: usize, seed: u64, noise_variance: f64, isi: bool) -> DestinationModel {
    let cfg = NetworkConfig {
        users,
        relays,
        chips: 8,
        paths: 3,
        noise_variance,
        protocol: RelayProtocol::DecodeForward,
        isi,
        power_spread_db: 3.0,
    };
    let codes = generate_codes(users, cfg.chips, &mut stream_rng(seed, 0, Stream::Codes)).unwrap();
    let net = CdmaNetwork::generate(
        cfg,
        &codes,
        &mut stream_rng(seed, 0, Stream::Channels),
        &mut stream_rng(seed, 0, Stream::Powers),
    )
    .unwrap();
    DestinationModel::from_network(&net)
}

#[test]
fn rake_matched_and_orthogonal_inputs() {
    let p = CVec::from_vec(vec![c(0.6), Complex64::new(0.0, 0.8)]);
    assert!((rake_statistic(&p, &p) - c(1.0)).norm() < 1e-15);
    let q = CVec::from_vec(vec![c(0.8), Complex64::new(0.0, -0.6)]);
    assert!(rake_statistic(&q, &p).norm() < 1e-15);
}

#[test]
fn rake_separates_orthogonal_users() {
    let h = 0.5;
    let sig = [
        CVec::from_vec(vec![c(h), c(h), c(h), c(h)]),
        CVec::from_vec(vec![c(h), c(-h), c(h), c(-h)]),
        CVec::from_vec(vec![c(h), c(h), c(-h), c(-h)]),
    ];
    let b = [c(1.0), Complex64::new(0.0, -1.0), c(-1.0)];
    let amps = [1.0, 0.3, 2.0];
    let mut r = CVec::zeros(4);
    for k in 0..3 {
        r += &sig[k] * (b[k] * amps[k]);
    }
    for k in 0..3 {
        let z = rake_statistic(&r, &sig[k]);
        assert!((z - b[k] * amps[k]).norm() < 1e-14);
    }
    // The desired user (index 0) outshines the weaker interferer.
    assert!(rake_statistic(&r, &sig[0]).norm() > rake_statistic(&r, &sig[1]).norm());
}

#[test]
fn filter_identity_and_homogeneity() {
    let e1 = CVec::from_vec(vec![c(1.0), c(0.0), c(0.0)]);
    let w = mmse_filter(&eye(3), &e1).unwrap().w;
    assert!((w - &e1).norm() < 1e-15);
    let v = CVec::from_vec(vec![c(1.0), Complex64::new(0.2, 0.3), c(-0.4)]);
    let mut r = eye(3) * c(0.1);
    add_outer(&mut r, &v, 1.0);
    let w1 = mmse_filter(&r, &v).unwrap().w;
    let w3 = mmse_filter(&(&r * c(3.0)), &v).unwrap().w;
    assert!((w1 / c(3.0) - w3).norm() < 1e-13);
}

#[test]
fn filter_matches_a_grid_search_on_a_two_user_toy() {
    // Two users with non-orthogonal real signatures in a 2-sample window.
    let s1 = CVec::from_vec(vec![c(1.0), c(0.3)]);
    let s2 = CVec::from_vec(vec![c(0.5), c(-0.8)]);
    let mut r = eye(2) * c(0.1);
    add_outer(&mut r, &s1, 1.0);
    add_outer(&mut r, &s2, 1.0);
    let mse = |w: &CVec| 1.0 - 2.0 * w.dotc(&s1).re + quad_form(&r, w);
    let w = mmse_filter(&r, &s1).unwrap().w;
    let steps = 1200;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=steps {
            let x = -2.0 + 4.0 * i as f64 / steps as f64;
            let y = -2.0 + 4.0 * j as f64 / steps as f64;
            best = best.min(mse(&CVec::from_vec(vec![c(x), c(y)])));
        }
    }
    assert!(mse(&w) <= best + 1e-12);
    assert!(best - mse(&w) < 1e-3);
}

#[test]
fn scalar_allocation_meets_the_budget() {
    let r = CMat::from_element(1, 1, c(0.7));
    let p = CVec::from_element(1, c(0.2));
    let a = power_allocation(&r, &p, Multiplier::Fixed(0.025), 2.5).unwrap().a;
    assert!((norm_sqr(&a) - 2.5).abs() < 1e-12);
}

#[test]
fn large_multiplier_points_along_the_cross_correlation() {
    let v = CVec::from_vec(vec![c(1.0), c(0.4), c(-0.3)]);
    let mut r = eye(3) * c(0.2);
    add_outer(&mut r, &v, 1.0);
    let p = CVec::from_vec(vec![c(0.3), c(0.9), c(0.1)]);
    let a = power_allocation(&r, &p, Multiplier::Fixed(1e9), 1.0).unwrap().a;
    let cos = a.dotc(&p).norm() / norm_sqr(&p).sqrt();
    assert!(1.0 - cos < 1e-8);
}

#[test]
fn allocation_matches_a_grid_search_on_the_constraint_circle() {
    // One user, one relay: two destination-facing links.
    let m = model(1, 1, 12, 0.1, true);
    let amps = m.equal_amplitudes();
    let budget = m.user_powers[0];
    let filters = m.filters(&amps);
    let (r, p) = m.power_statistics(&filters, &[0]);
    let a = power_allocation(&real_part_mat(&r), &real_part_vec(&p), Multiplier::Exact, budget).unwrap().a;
    let mse = |a: &CVec| m.sum_mse(&filters, std::slice::from_ref(a));
    let steps = 100_000;
    let best = (0..steps)
        .map(|i| {
            let th = i as f64 / steps as f64 * std::f64::consts::TAU;
            let x = CVec::from_vec(vec![c(budget.sqrt() * th.cos()), c(budget.sqrt() * th.sin())]);
            mse(&x)
        })
        .fold(f64::INFINITY, f64::min);
    assert!((norm_sqr(&a) - budget).abs() < 1e-10);
    assert!(mse(&a) <= best + 1e-9);
    assert!(best - mse(&a) < 1e-3);
}

#[test]
fn alternating_fixed_point_and_disabled_allocation() {
    let m = model(3, 2, 21, 0.05, true);
    let opts = AlternatingOptions {
        group_size: 3,
        multiplier: Multiplier::Exact,
        domain: AmplitudeDomain::Real,
        iterations: 20000,
        tolerance: 1e-10,
    };
    let done = alternating_optimize(&m, &opts).unwrap();
    assert!(done.converged, "residual {} after {} passes", done.residual, done.sum_mse.len() - 1);
    let again = alternating_optimize_from(
        &m,
        done.amplitudes.clone(),
        &AlternatingOptions {
            iterations: 1,
            ..opts.clone()
        },
    )
    .unwrap();
    for (x, y) in again.amplitudes.iter().zip(&done.amplitudes) {
        assert!((x - y).norm() < 1e-6);
    }
    let cis = alternating_optimize(
        &m,
        &AlternatingOptions {
            iterations: 0,
            ..opts
        },
    )
    .unwrap();
    assert_eq!(cis.amplitudes, m.equal_amplitudes());
    assert_eq!(cis.filters, m.filters(&m.equal_amplitudes()));
}

#[test]
fn second_pass_never_increases_the_sum_mse() {
    for seed in 0..100 {
        let m = model(3, 1, 1000 + seed, 0.1, true);
        let opts = AlternatingOptions {
            group_size: 3,
            multiplier: Multiplier::Exact,
            domain: AmplitudeDomain::Real,
            iterations: 2,
            tolerance: 0.0,
        };
        let out = alternating_optimize(&m, &opts).unwrap();
        assert_eq!(out.sum_mse.len(), 3);
        assert!(out.sum_mse[2] <= out.sum_mse[1] + 1e-12, "seed {seed}: {:?}", out.sum_mse);
    }
}

#[test]
fn channel_estimator_limits() {
    // Single user, orthonormal composite columns, identity prior.
    let q = CMat::from_fn(6, 3, |i, j| if i == 2 * j { c(1.0) } else { c(0.0) });
    let h = CVec::from_vec(vec![Complex64::new(0.3, -0.4), c(0.8), Complex64::new(0.0, 0.33)]);
    let r = &q * &h;
    let est = mmse_channel_estimate(&r, &[q.clone()], &[eye(3)], 0, None, 1e-8).unwrap();
    assert!((est - &h).norm() < 1e-4);
    let zero = mmse_channel_estimate(&r, &[q], &[CMat::zeros(3, 3)], 0, None, 1e-2).unwrap();
    assert!(zero.norm() == 0.0);
}

#[test]
fn channel_estimator_matches_the_wiener_solution() {
    let q1 = CMat::from_fn(4, 2, |i, j| Complex64::new((i + 2 * j) as f64 * 0.2 - 0.5, 0.1 * i as f64));
    let q2 = CMat::from_fn(4, 2, |i, j| Complex64::new(0.3 - 0.1 * (i * j) as f64, -0.2 * j as f64));
    let p1 = CMat::from_fn(2, 2, |i, j| if i == j { c(1.0) } else { c(0.3) });
    let p2 = eye(2) * c(0.5);
    let eta = eye(4) * c(0.05);
    let r = CVec::from_vec(vec![c(0.2), Complex64::new(-0.1, 0.4), c(0.7), Complex64::new(0.0, -0.3)]);
    let sigma2 = 0.2;
    let est = mmse_channel_estimate(&r, &[q1.clone(), q2.clone()], &[p1.clone(), p2.clone()], 0, Some(&eta), sigma2).unwrap();
    // E[h r^H] E[r r^H]^{-1} r with r = Q1 h1 + Q2 h2 + η + n.
    let cov = &q1 * &p1 * q1.adjoint() + &q2 * &p2 * q2.adjoint() + &eta + eye(4) * c(sigma2);
    let wiener = &p1 * q1.adjoint() * cov.try_inverse().unwrap() * &r;
    assert!((est - wiener).norm() < 1e-12);
}
