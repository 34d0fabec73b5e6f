use coopsim::harness::*;
use coopsim::rng::{stream_rng, Stream};
use coopsim::Complex64;

fn small(seed: u64) -> SimConfig {
    let mut cfg = SimConfig {
        seed,
        runs: 3,
        packet_len: 300,
        training: 100,
        ..SimConfig::default()
    };
    cfg.users = vec![3];
    cfg.chips = 8;
    cfg.paths = 2;
    cfg.schemes = ["ncis", "cis", "jpais:1", "jpais:K"].map(String::from).to_vec();
    cfg
}

#[test]
fn quantizer_levels_round_trip_exactly() {
    let levels = reconstruction_levels(1.5, 4);
    assert_eq!(levels.len(), 16);
    let values: Vec<Complex64> = levels.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let ranges = vec![1.5; values.len()];
    let packet = quantize_power_vector(&values, &ranges, 4, false).unwrap();
    assert_eq!(packet.saturated, 0);
    assert_eq!(dequantize_power_vector(&packet, &ranges).unwrap(), values);
}

#[test]
fn quantizer_error_is_at_most_half_a_step() {
    let range = 2.0;
    let step = 2.0 * range / 16.0;
    let values: Vec<Complex64> = (0..=4000)
        .map(|i| Complex64::new(-range + 2.0 * range * i as f64 / 4000.0, range - 2.0 * range * i as f64 / 4000.0))
        .collect();
    let ranges = vec![range; values.len()];
    let packet = quantize_power_vector(&values, &ranges, 4, true).unwrap();
    assert_eq!(packet.len(), values.len() * 8);
    let back = dequantize_power_vector(&packet, &ranges).unwrap();
    for (v, b) in values.iter().zip(&back) {
        assert!((v.re - b.re).abs() <= step / 2.0 + 1e-12);
        assert!((v.im - b.im).abs() <= step / 2.0 + 1e-12);
    }
}

#[test]
fn quantizer_flags_saturation() {
    let packet = quantize_power_vector(&[Complex64::new(3.0, 0.0), Complex64::new(0.2, 0.0)], &[1.0, 1.0], 4, false).unwrap();
    assert_eq!(packet.saturated, 1);
    let back = dequantize_power_vector(&packet, &[1.0, 1.0]).unwrap();
    assert!((back[0].re - (1.0 - 1.0 / 16.0)).abs() < 1e-15);
    assert!(quantize_power_vector(&[Complex64::new(0.0, 0.0)], &[1.0], 0, false).is_err());
}

#[test]
fn feedback_packet_sizes() {
    assert_eq!(group_feedback_bits(8, 2, 4), 96);
    let amps = vec![Complex64::new(0.1, 0.0); 24];
    assert_eq!(quantize_power_vector(&amps, &vec![1.0; 24], 4, false).unwrap().len(), 96);
    assert_eq!(individual_feedback_bits(2, 4), 12);
    assert_eq!(tds_feedback_bits(4, 2), 8);
}

#[test]
fn bsc_extremes_and_calibration() {
    let bits: Vec<bool> = (0..1000).map(|i| i % 3 == 0).collect();
    let mut rng = stream_rng(1, 0, Stream::Feedback);
    assert_eq!(bsc_transmit(&bits, 0.0, &mut rng).unwrap(), bits);
    let flipped = bsc_transmit(&bits, 1.0, &mut rng).unwrap();
    assert!(flipped.iter().zip(&bits).all(|(a, b)| a != b));
    assert!(bsc_transmit(&bits, 1.5, &mut rng).is_err());

    let zeros = vec![false; 1_000_000];
    let out = bsc_transmit(&zeros, 0.01, &mut stream_rng(2, 0, Stream::Feedback)).unwrap();
    let rate = out.iter().filter(|&&b| b).count() as f64 / 1e6;
    assert!((rate - 0.01).abs() < 0.001, "flip rate {rate}");
    let again = bsc_transmit(&zeros, 0.01, &mut stream_rng(2, 0, Stream::Feedback)).unwrap();
    assert_eq!(out, again);
}

#[test]
fn complexity_entries() {
    let d = Dimensions {
        j: 60,
        k: 4,
        nr: 2,
        l: 5,
        m: 20,
        q: 15,
    };
    assert_eq!(filter_user(&d).additions, 2 * 60 * 60 + 60 + 1);
    assert_eq!(filter_user(&d).additions, 7261);
    for nr in 1..=10 {
        let d = Dimensions::cdma(8, nr, 16, 5);
        let direct = Dimensions::cdma(8, 0, 16, 5);
        let ncis = complexity_count(ComplexityScheme::NcisUplink, &d).unwrap();
        assert_eq!(ncis.total, filter_joint(&direct));
        let ncis_down = complexity_count(ComplexityScheme::NcisDownlink, &d).unwrap();
        assert_eq!(ncis_down.total, filter_user(&direct) * 8);
        for scheme in ComplexityScheme::ALL {
            let r = complexity_count(scheme, &d).unwrap();
            let sum = r.recursions.iter().fold(OpCount::default(), |a, (_, c)| a + *c);
            assert_eq!(sum, r.total);
        }
        let mult = |s| complexity_count(s, &d).unwrap().total.multiplications;
        assert!(mult(ComplexityScheme::JpaisGlobal) > mult(ComplexityScheme::CisUplink));
        assert!(mult(ComplexityScheme::CisUplink) > mult(ComplexityScheme::NcisUplink));
        assert!(mult(ComplexityScheme::JpaisIndividual) > mult(ComplexityScheme::CisDownlink));
        assert!(mult(ComplexityScheme::CisDownlink) > mult(ComplexityScheme::NcisDownlink));
    }
    let bad = Dimensions { j: 61, ..d };
    assert!(complexity_count(ComplexityScheme::CisUplink, &bad).is_err());
}

#[test]
fn noiseless_single_user_has_no_errors() {
    let mut cfg = small(5);
    cfg.users = vec![1];
    cfg.isi = false;
    cfg.snr_db = vec![60.0];
    cfg.schemes = ["ncis", "cis", "jpais:1", "jpais_mmse:1"].map(String::from).to_vec();
    let exp = run_ber_experiment(&cfg).unwrap();
    let p = &exp.curve.points[0];
    for s in &p.stats {
        assert_eq!(s.errors, 0);
        assert_eq!(s.bits, 3 * 2 * 200);
    }
}

#[test]
fn same_seed_same_curve() {
    let cfg = small(9);
    let a = run_ber_experiment(&cfg).unwrap().curve.to_csv();
    let b = run_ber_experiment(&cfg).unwrap().curve.to_csv();
    assert_eq!(a, b);
    assert_ne!(a, run_ber_experiment(&small(10)).unwrap().curve.to_csv());
}

#[test]
fn zero_doppler_matches_the_static_experiment() {
    let cfg = small(12);
    let stat = run_ber_experiment(&cfg).unwrap().curve;
    let fading = run_fading_sweep(&cfg).unwrap().curve;
    assert_eq!(cfg.doppler, vec![0.0]);
    assert_eq!(stat.points[0].stats, fading.points[0].stats);
    assert_eq!(fading.variable, SweepVariable::Doppler);
}

#[test]
fn error_free_feedback_matches_the_static_experiment() {
    let cfg = small(13);
    let stat = run_ber_experiment(&cfg).unwrap().curve;
    let fb = run_feedback_error_sweep(&cfg).unwrap().curve;
    assert_eq!(stat.points[0].stats, fb.points[0].stats);
}

#[test]
fn fading_curves_for_two_and_four_relays() {
    for relays in [2, 4] {
        let mut cfg = small(20);
        cfg.relays = relays;
        cfg.doppler = vec![1e-4, 1e-3, 1e-2];
        cfg.schemes = ["cis", "jpais:K"].map(String::from).to_vec();
        let exp = run_fading_sweep(&cfg).unwrap();
        assert_eq!(exp.curve.points.len(), 3);
        for p in &exp.curve.points {
            for s in &p.stats {
                assert!((0.0..=1.0).contains(&s.ber()));
                assert_eq!(s.runs.len(), 3);
            }
        }
        assert!(exp.max_constraint_violation < 1e-10);
        let csv = exp.curve.to_csv();
        assert!(csv.starts_with("fdt,cis_ber,jpais_gK_ber\n"), "{csv}");
    }
}

#[test]
fn symbol_sweep_bins_training_and_data() {
    let mut cfg = small(30);
    cfg.sweep = BerSweep::Symbols;
    cfg.symbol_bin = 50;
    let curve = run_ber_experiment(&cfg).unwrap().curve;
    assert_eq!(curve.points.len(), 6);
    assert_eq!(curve.points[0].x, 1.0);
    assert_eq!(curve.points[5].x, 251.0);
}
