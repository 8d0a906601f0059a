use approx::assert_relative_eq;
use proptest::prelude::*;

use vigil::edf::{parse_edf, write_edf, EdfHeader, EdfRecording, SignalHeader};
use vigil::features::{extract_features, ChannelMap, ChannelRole};
use vigil::spectral::{
    band_mask, band_power, fft_with_rate, total_power, Band, Epoch, EpochWindow,
};

fn signal(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, len)
}

fn band() -> impl Strategy<Value = Band> {
    (0.0..45.0f64, 0.5..20.0f64).prop_map(|(lo, w)| Band::new(lo, lo + w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edf_round_trip(
        spr in prop::collection::vec(1usize..40, 1..4),
        records in 1usize..6,
        seed in any::<u64>(),
    ) {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 48) as i16
        };
        let signals: Vec<_> = spr
            .iter()
            .enumerate()
            .map(|(i, &n)| SignalHeader::new(format!("S{i}"), (-250.0, 250.0), (-32768, 32767), n))
            .collect();
        let data: Vec<Vec<i16>> = spr.iter().map(|&n| (0..n * records).map(|_| next()).collect()).collect();
        let rec = EdfRecording::from_digital(EdfHeader::new(1.0, spr.len()), signals, data).unwrap();
        let bytes = write_edf(&rec).unwrap();
        let back = parse_edf(&bytes).unwrap();
        prop_assert_eq!(back.num_records(), records);
        for i in 0..spr.len() {
            prop_assert_eq!(back.digital_samples(i), rec.digital_samples(i));
            prop_assert_eq!(back.physical_samples(i), rec.physical_samples(i));
        }
        // any truncation is rejected
        let cut = bytes.len() - 1 - (seed as usize % (bytes.len() - 1));
        prop_assert!(parse_edf(&bytes[..cut]).is_err());
    }

    #[test]
    fn parseval(x in signal(2..600), rate in 1.0..500.0f64) {
        let s = fft_with_rate(&x, rate).unwrap();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        prop_assert!((total_power(&s) - var).abs() <= 1e-9 * var.max(1e-12));
    }

    #[test]
    fn masking_is_idempotent(x in signal(8..400), b in band()) {
        let s = fft_with_rate(&x, 100.0).unwrap();
        let once = band_mask(&s, b).unwrap();
        let twice = band_mask(&once, b).unwrap();
        prop_assert_eq!(once.coeffs, twice.coeffs);
    }

    #[test]
    fn disjoint_masks_add_up(x in signal(8..400), split in 1.0..49.0f64) {
        let s = fft_with_rate(&x, 100.0).unwrap();
        let lo = band_mask(&s, Band::new(0.0, split).unwrap()).unwrap();
        let hi = band_mask(&s, Band::new(split, f64::INFINITY).unwrap()).unwrap();
        // DC belongs to no band
        for k in 1..s.len() {
            let sum = lo.coeffs[k] + hi.coeffs[k];
            prop_assert!((sum - s.coeffs[k]).norm() <= 1e-12 * s.coeffs[k].norm().max(1.0));
        }
        let p = band_power(&s, Band::new(0.0, split).unwrap()).unwrap()
            + band_power(&s, Band::new(split, f64::INFINITY).unwrap()).unwrap();
        prop_assert!((p - total_power(&s)).abs() <= 1e-9 * total_power(&s).max(1e-12));
    }

    #[test]
    fn masked_inverse_is_real(x in signal(8..400), b in band()) {
        let s = fft_with_rate(&x, 100.0).unwrap();
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for c in band_mask(&s, b).unwrap().inverse() {
            prop_assert!(c.im.abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn features_ignore_channel_gain(
        seed in any::<u64>(),
        g1 in 0.01..100.0f64,
        g2 in 0.01..100.0f64,
    ) {
        let mut state = seed;
        let mut noise = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a: Vec<f64> = (0..400).map(|_| noise()).collect();
        let b: Vec<f64> = (0..400).map(|_| noise()).collect();
        let mut labels: [String; 7] = std::array::from_fn(|_| "a".to_string());
        for role in [ChannelRole::F4, ChannelRole::F8, ChannelRole::P8] {
            labels[role.index()] = "b".into();
        }
        let map = ChannelMap::new(labels);
        let window = EpochWindow { start: 0, len: 400 };
        let epoch = |ga: f64, gb: f64| {
            let a: Vec<f64> = a.iter().map(|v| v * ga).collect();
            let b: Vec<f64> = b.iter().map(|v| v * gb).collect();
            Epoch::from_window(&[("a", &a), ("b", &b)], 100.0, window).unwrap()
        };
        let base = extract_features(&epoch(1.0, 1.0), &map).unwrap();
        let common = extract_features(&epoch(g1, g1), &map).unwrap();
        let split = extract_features(&epoch(g1, g2), &map).unwrap();
        assert_relative_eq!(common.arousal, base.arousal, max_relative = 1e-9);
        assert_relative_eq!(split.valence, base.valence, max_relative = 1e-9, epsilon = 1e-9);
        assert_relative_eq!(split.dominance, base.dominance, max_relative = 1e-9);
    }
}
