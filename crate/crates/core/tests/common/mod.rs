#![allow(dead_code)]

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

use vigil::edf::{write_edf, EdfHeader, EdfRecording, SignalHeader};
use vigil::features::{ChannelMap, ChannelRole};

pub const FPZ: &str = "EEG Fpz-Cz";
pub const PZ: &str = "EEG Pz-Oz";

pub fn tone(freq: f64, amp: f64, t: f64) -> f64 {
    amp * (2.0 * PI * freq * t).sin()
}

/// Builds a recording from physical samples, `record_s` seconds per record.
pub fn recording(
    channels: &[(&str, f64, Vec<f64>)],
    record_s: f64,
    phys: (f64, f64),
) -> EdfRecording {
    let signals = channels
        .iter()
        .map(|(label, rate, _)| {
            SignalHeader::new(
                *label,
                phys,
                (-32768, 32767),
                (rate * record_s).round() as usize,
            )
        })
        .collect();
    let data: Vec<Vec<f64>> = channels.iter().map(|(_, _, d)| d.clone()).collect();
    let mut header = EdfHeader::new(record_s, channels.len());
    header.patient_id = "X X X X".into();
    header.recording_id = "Startdate X X X X".into();
    EdfRecording::from_physical(header, signals, &data).unwrap()
}

/// 120 s, two channels at 100 Hz. The first 60 s are beta dominated on both
/// channels; in the last 60 s the frontal channel turns alpha dominated and
/// the parietal channel's beta/alpha ratio rises.
pub fn alert_to_drowsy() -> EdfRecording {
    let rate = 100.0;
    let n = 120 * 100;
    let mut rng = StdRng::seed_from_u64(7);
    let noise = Normal::new(0.0, 0.2).unwrap();
    let mut fpz = Vec::with_capacity(n);
    let mut pz = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / rate;
        let drowsy = t >= 60.0;
        let (fa, fb, pa, pb) = if drowsy {
            (20.0, 2.0, 2.0, 6.0)
        } else {
            (2.0, 20.0, 3.0, 3.0)
        };
        fpz.push(tone(10.0, fa, t) + tone(20.0, fb, t) + noise.sample(&mut rng));
        pz.push(tone(10.3, pa, t) + tone(21.0, pb, t) + noise.sample(&mut rng));
    }
    recording(&[(FPZ, rate, fpz), (PZ, rate, pz)], 1.0, (-200.0, 200.0))
}

/// Map for [`alert_to_drowsy`]: the alpha-rising channel feeds AF3, AF4 and
/// F4, the parietal channel feeds F3, FC6, F8 and P8.
pub fn alert_to_drowsy_map() -> ChannelMap {
    let mut labels: [String; 7] = std::array::from_fn(|_| PZ.to_string());
    for role in [ChannelRole::AF3, ChannelRole::AF4, ChannelRole::F4] {
        labels[role.index()] = FPZ.to_string();
    }
    ChannelMap::new(labels)
}

pub fn alert_to_drowsy_map_text() -> String {
    ChannelRole::ALL
        .iter()
        .map(|r| format!("{} = {}\n", r.name(), alert_to_drowsy_map().label(*r)))
        .collect()
}

/// White noise on two channels; the middle 20 s epoch of the frontal channel
/// is a pure 10 Hz tone instead.
pub fn noise_with_pure_alpha_epoch() -> EdfRecording {
    let rate = 100.0;
    let n = 100 * 100;
    let mut rng = StdRng::seed_from_u64(11);
    let noise = Normal::new(0.0, 15.0).unwrap();
    let mut fpz = Vec::with_capacity(n);
    let mut pz = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / rate;
        let v = if (40.0..60.0).contains(&t) {
            tone(10.0, 40.0, t)
        } else {
            noise.sample(&mut rng)
        };
        fpz.push(v);
        pz.push(noise.sample(&mut rng));
    }
    recording(&[(FPZ, rate, fpz), (PZ, rate, pz)], 1.0, (-200.0, 200.0))
}

/// A recording laid out like a sleep-EDF cassette PSG file: seven signals,
/// 30 s data records, EEG/EOG at 100 Hz and 1 Hz auxiliary channels.
pub fn sleep_edf_like(hours: f64, seed: u64) -> EdfRecording {
    let records = (hours * 3600.0 / 30.0).round() as usize;
    let n100 = records * 3000;
    let n1 = records * 30;
    let mut rng = StdRng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 6.0).unwrap();

    let eeg = |phase: f64, rng: &mut StdRng| -> Vec<f64> {
        (0..n100)
            .map(|i| {
                let t = i as f64 / 100.0;
                // slow drift of alpha vs beta over ~40 min cycles
                let drift = 0.5 + 0.5 * (2.0 * PI * t / 2400.0 + phase).sin();
                let v = tone(2.0, 20.0, t)
                    + tone(6.0, 8.0, t)
                    + tone(10.0, 4.0 + 16.0 * drift, t)
                    + tone(18.0, 14.0 - 10.0 * drift, t)
                    + noise.sample(rng);
                v.clamp(-190.0, 190.0)
            })
            .collect()
    };
    let fpz = eeg(0.0, &mut rng);
    let pz = eeg(1.3, &mut rng);
    let eog: Vec<f64> = (0..n100)
        .map(|i| (tone(0.3, 60.0, i as f64 / 100.0) + noise.sample(&mut rng)).clamp(-500.0, 500.0))
        .collect();
    let slow = |rng: &mut StdRng, amp: f64| -> Vec<f64> {
        (0..n1).map(|_| rng.gen_range(-amp..amp)).collect()
    };
    let resp = slow(&mut rng, 500.0);
    let emg = slow(&mut rng, 5.0);
    let temp: Vec<f64> = (0..n1)
        .map(|i| 36.5 + 0.5 * (i as f64 / n1 as f64))
        .collect();
    let marker = vec![0.0; n1];

    let mut header = EdfHeader::new(30.0, 7);
    header.patient_id = "X F X Female_33yr".into();
    header.recording_id = "Startdate 24-APR-1989 X X X".into();
    header.start_date = "24.04.89".into();
    header.start_time = "16.13.00".into();
    let sig = |label: &str, dim: &str, phys: (f64, f64), dig: (i32, i32), spr: usize| {
        let mut s = SignalHeader::new(label, phys, dig, spr);
        s.physical_dim = dim.into();
        s.transducer = "Ag-AgCl electrodes".into();
        s.prefiltering = "HP:0.5Hz LP:100Hz [enhanced cassette BW]".into();
        s
    };
    let signals = vec![
        sig(FPZ, "uV", (-192.0, 192.0), (-2048, 2047), 3000),
        sig(PZ, "uV", (-197.0, 196.0), (-2048, 2047), 3000),
        sig(
            "EOG horizontal",
            "uV",
            (-1009.0, 1009.0),
            (-2048, 2047),
            3000,
        ),
        sig("Resp oro-nasal", "", (-2048.0, 2047.0), (-2048, 2047), 30),
        sig("EMG submental", "uV", (-5.0, 5.0), (-2500, 2500), 30),
        sig("Temp rectal", "DegC", (34.0, 40.0), (-2849, 2731), 30),
        sig("Event marker", "", (-2048.0, 2047.0), (-2048, 2047), 30),
    ];
    EdfRecording::from_physical(header, signals, &[fpz, pz, eog, resp, emg, temp, marker]).unwrap()
}

pub fn write_temp(dir: &std::path::Path, name: &str, rec: &EdfRecording) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, write_edf(rec).unwrap()).unwrap();
    path
}
