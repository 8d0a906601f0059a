//! Epoching, FFT, frequency-domain band masking and band power.
//!
//! Band power is the mean-square signal power attributable to a band:
//! `(1/n²) Σ |X[k]|²` over the band's positive- and negative-frequency bins.
//! The DC bin never belongs to a band, and no window is applied before the
//! transform.

pub mod fft;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fft::FftPlan;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("cannot transform an empty sequence")]
    Empty,
    #[error("invalid band [{low}, {high}) Hz")]
    InvalidBand { low: f64, high: f64 },
    #[error("band starting at {low} Hz lies above Nyquist ({nyquist} Hz)")]
    AboveNyquist { low: f64, nyquist: f64 },
    #[error("signal of {samples} samples is shorter than one {window}-sample window")]
    SignalTooShort { samples: usize, window: usize },
    #[error("epoch duration {duration_s} s at {sample_rate} Hz is not a whole number of samples")]
    FractionalWindow { duration_s: f64, sample_rate: f64 },
    #[error("invalid epoch parameters: {0}")]
    InvalidEpoch(String),
    #[error("no channel {0:?} in epoch")]
    MissingChannel(String),
}

/// A half-open frequency interval `[low_hz, high_hz)`. An upper edge at or
/// beyond Nyquist is clamped and the Nyquist bin itself is then included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl Band {
    pub const DELTA: Band = Band::raw(0.0, 4.0);
    pub const THETA: Band = Band::raw(4.0, 7.0);
    pub const ALPHA: Band = Band::raw(8.0, 13.0);
    pub const MU: Band = Band::raw(8.0, 12.0);
    pub const BETA: Band = Band::raw(13.0, 30.0);
    pub const GAMMA: Band = Band::raw(30.0, f64::INFINITY);
    /// The 7-8 Hz interval between theta and alpha that no rhythm claims.
    pub const THETA_ALPHA_GAP: Band = Band::raw(7.0, 8.0);

    const fn raw(low_hz: f64, high_hz: f64) -> Self {
        Self { low_hz, high_hz }
    }

    pub fn new(low_hz: f64, high_hz: f64) -> Result<Self, SpectralError> {
        if !(low_hz >= 0.0 && high_hz > low_hz) {
            return Err(SpectralError::InvalidBand {
                low: low_hz,
                high: high_hz,
            });
        }
        Ok(Self { low_hz, high_hz })
    }
}

/// The EEG rhythms and their canonical frequency intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rhythm {
    Delta,
    Theta,
    Alpha,
    Mu,
    Beta,
    Gamma,
}

impl Rhythm {
    pub const ALL: [Rhythm; 6] = [
        Rhythm::Delta,
        Rhythm::Theta,
        Rhythm::Alpha,
        Rhythm::Mu,
        Rhythm::Beta,
        Rhythm::Gamma,
    ];

    /// Non-overlapping rhythms (mu sits inside alpha).
    pub const DISJOINT: [Rhythm; 5] = [
        Rhythm::Delta,
        Rhythm::Theta,
        Rhythm::Alpha,
        Rhythm::Beta,
        Rhythm::Gamma,
    ];

    pub fn band(self) -> Band {
        match self {
            Rhythm::Delta => Band::DELTA,
            Rhythm::Theta => Band::THETA,
            Rhythm::Alpha => Band::ALPHA,
            Rhythm::Mu => Band::MU,
            Rhythm::Beta => Band::BETA,
            Rhythm::Gamma => Band::GAMMA,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rhythm::Delta => "delta",
            Rhythm::Theta => "theta",
            Rhythm::Alpha => "alpha",
            Rhythm::Mu => "mu",
            Rhythm::Beta => "beta",
            Rhythm::Gamma => "gamma",
        }
    }
}

impl fmt::Display for Rhythm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpochMode {
    Start,
    Middle,
    End,
    All,
}

impl std::str::FromStr for EpochMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "start" => Ok(EpochMode::Start),
            "middle" => Ok(EpochMode::Middle),
            "end" => Ok(EpochMode::End),
            "all" => Ok(EpochMode::All),
            other => Err(format!("unknown epoch mode {other:?}")),
        }
    }
}

/// Position of one analysis window inside a signal, in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochWindow {
    pub start: usize,
    pub len: usize,
}

/// Number of samples in a `duration_s` window at `sample_rate`.
pub fn window_len(duration_s: f64, sample_rate: f64) -> Result<usize, SpectralError> {
    if !(duration_s > 0.0 && sample_rate > 0.0) {
        return Err(SpectralError::InvalidEpoch(format!(
            "duration {duration_s} s and sample rate {sample_rate} Hz must be positive"
        )));
    }
    let exact = duration_s * sample_rate;
    let len = exact.round();
    if (exact - len).abs() > 1e-9 * exact.max(1.0) || len < 1.0 {
        return Err(SpectralError::FractionalWindow {
            duration_s,
            sample_rate,
        });
    }
    Ok(len as usize)
}

/// Plans the windows `make_epochs` would cut from `n_samples` samples.
pub fn epoch_windows(
    n_samples: usize,
    sample_rate: f64,
    duration_s: f64,
    mode: EpochMode,
) -> Result<Vec<EpochWindow>, SpectralError> {
    let len = window_len(duration_s, sample_rate)?;
    if n_samples < len {
        return Err(SpectralError::SignalTooShort {
            samples: n_samples,
            window: len,
        });
    }
    let w = |start| EpochWindow { start, len };
    Ok(match mode {
        EpochMode::Start => vec![w(0)],
        EpochMode::Middle => vec![w((n_samples - len) / 2)],
        EpochMode::End => vec![w(n_samples - len)],
        EpochMode::All => (0..n_samples / len).map(|i| w(i * len)).collect(),
    })
}

/// A labelled channel inside an epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochChannel {
    pub label: String,
    pub samples: Vec<f64>,
}

/// A fixed-length analysis window over one or more channels sharing a rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub start_time_s: f64,
    pub duration_s: f64,
    pub sample_rate: f64,
    pub channels: Vec<EpochChannel>,
}

impl Epoch {
    /// Cuts `window` out of each `(label, samples)` pair.
    pub fn from_window(
        channels: &[(&str, &[f64])],
        sample_rate: f64,
        window: EpochWindow,
    ) -> Result<Self, SpectralError> {
        let channels = channels
            .iter()
            .map(|(label, samples)| {
                let end = window.start + window.len;
                if samples.len() < end {
                    return Err(SpectralError::SignalTooShort {
                        samples: samples.len(),
                        window: end,
                    });
                }
                Ok(EpochChannel {
                    label: label.to_string(),
                    samples: samples[window.start..end].to_vec(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            start_time_s: window.start as f64 / sample_rate,
            duration_s: window.len as f64 / sample_rate,
            sample_rate,
            channels,
        })
    }

    pub fn channel(&self, label: &str) -> Result<&[f64], SpectralError> {
        self.channels
            .iter()
            .find(|c| c.label == label)
            .map(|c| c.samples.as_slice())
            .ok_or_else(|| SpectralError::MissingChannel(label.to_string()))
    }
}

/// Splits a single signal into epochs. The channel is labelled `"signal"`.
pub fn make_epochs(
    signal: &[f64],
    sample_rate: f64,
    duration_s: f64,
    mode: EpochMode,
) -> Result<Vec<Epoch>, SpectralError> {
    epoch_windows(signal.len(), sample_rate, duration_s, mode)?
        .into_iter()
        .map(|w| Epoch::from_window(&[("signal", signal)], sample_rate, w))
        .collect()
}

/// Full complex spectrum of a length-n sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub coeffs: Vec<Complex64>,
    pub sample_rate: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate / 2.0
    }

    /// Frequency of bin `k`, folding the upper half onto its conjugate partner.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        let n = self.len();
        let m = k.min(n - k);
        m as f64 * self.sample_rate / n as f64
    }

    /// Which bins fall inside `band`. DC is never selected.
    fn band_bins(&self, band: Band) -> Result<Vec<bool>, SpectralError> {
        let nyquist = self.nyquist();
        if band.low_hz >= nyquist {
            return Err(SpectralError::AboveNyquist {
                low: band.low_hz,
                nyquist,
            });
        }
        let n = self.len();
        // Snap comparisons to a tiny fraction of the bin width so edge bins
        // land deterministically.
        let tol = 1e-9 * self.sample_rate / n as f64;
        let reaches_nyquist = band.high_hz >= nyquist - tol;
        Ok((0..n)
            .map(|k| {
                if k == 0 {
                    return false;
                }
                let f = self.bin_frequency(k);
                f >= band.low_hz - tol && (reaches_nyquist || f < band.high_hz - tol)
            })
            .collect())
    }

    /// Inverse transform back to the time domain.
    pub fn inverse(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        FftPlan::new(self.len()).inverse(&mut buf);
        buf
    }
}

/// Exact-length forward transform of a real sequence.
pub fn fft(samples: &[f64]) -> Result<Spectrum, SpectralError> {
    fft_with_rate(samples, 1.0)
}

pub fn fft_with_rate(samples: &[f64], sample_rate: f64) -> Result<Spectrum, SpectralError> {
    if samples.is_empty() {
        return Err(SpectralError::Empty);
    }
    let plan = FftPlan::new(samples.len());
    Ok(fft_with_plan(&plan, samples, sample_rate))
}

/// Forward transform reusing a prepared plan of matching length.
pub fn fft_with_plan(plan: &FftPlan, samples: &[f64], sample_rate: f64) -> Spectrum {
    let mut coeffs: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan.forward(&mut coeffs);
    Spectrum {
        coeffs,
        sample_rate,
    }
}

/// Zeroes every bin outside `band`, keeping conjugate partners together.
pub fn band_mask(spectrum: &Spectrum, band: Band) -> Result<Spectrum, SpectralError> {
    let keep = spectrum.band_bins(band)?;
    let coeffs = spectrum
        .coeffs
        .iter()
        .zip(keep)
        .map(|(&c, k)| if k { c } else { Complex64::default() })
        .collect();
    Ok(Spectrum {
        coeffs,
        sample_rate: spectrum.sample_rate,
    })
}

/// Mean-square power of the signal component inside `band`.
pub fn band_power(spectrum: &Spectrum, band: Band) -> Result<f64, SpectralError> {
    let keep = spectrum.band_bins(band)?;
    let n = spectrum.len() as f64;
    let sum: f64 = spectrum
        .coeffs
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(c, _)| c.norm_sqr())
        .sum();
    Ok(sum / (n * n))
}

/// Mean-square power over all non-DC bins.
pub fn total_power(spectrum: &Spectrum) -> f64 {
    let n = spectrum.len() as f64;
    spectrum
        .coeffs
        .iter()
        .skip(1)
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        / (n * n)
}

/// Time-domain component of one channel restricted to `band`.
pub fn band_waveform(epoch: &Epoch, channel: &str, band: Band) -> Result<Vec<f64>, SpectralError> {
    let samples = epoch.channel(channel)?;
    let spectrum = fft_with_rate(samples, epoch.sample_rate)?;
    Ok(band_mask(&spectrum, band)?
        .inverse()
        .into_iter()
        .map(|c| c.re)
        .collect())
}

/// Power of one channel in every rhythm, plus the theta/alpha gap and the
/// total non-DC power.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BandPowers {
    pub delta: f64,
    pub theta: f64,
    pub alpha: f64,
    pub mu: f64,
    pub beta: f64,
    pub gamma: f64,
    pub gap: f64,
    pub total: f64,
}

impl BandPowers {
    pub fn from_spectrum(spectrum: &Spectrum) -> Result<Self, SpectralError> {
        Ok(Self {
            delta: band_power(spectrum, Band::DELTA)?,
            theta: band_power(spectrum, Band::THETA)?,
            alpha: band_power(spectrum, Band::ALPHA)?,
            mu: band_power(spectrum, Band::MU)?,
            beta: band_power(spectrum, Band::BETA)?,
            gamma: band_power(spectrum, Band::GAMMA)?,
            gap: band_power(spectrum, Band::THETA_ALPHA_GAP)?,
            total: total_power(spectrum),
        })
    }

    pub fn get(&self, rhythm: Rhythm) -> f64 {
        match rhythm {
            Rhythm::Delta => self.delta,
            Rhythm::Theta => self.theta,
            Rhythm::Alpha => self.alpha,
            Rhythm::Mu => self.mu,
            Rhythm::Beta => self.beta,
            Rhythm::Gamma => self.gamma,
        }
    }

    /// Sum over the disjoint rhythms and the gap band; equals `total`.
    pub fn disjoint_sum(&self) -> f64 {
        self.delta + self.theta + self.gap + self.alpha + self.beta + self.gamma
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(freq: f64, amp: f64, seconds: f64, rate: f64) -> Vec<f64> {
        let n = (seconds * rate) as usize;
        (0..n)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / rate).sin())
            .collect()
    }

    #[test]
    fn epochs_all_mode() {
        let sig = vec![0.0; 6000];
        let e = make_epochs(&sig, 100.0, 20.0, EpochMode::All).unwrap();
        let starts: Vec<f64> = e.iter().map(|e| e.start_time_s).collect();
        assert_eq!(starts, vec![0.0, 20.0, 40.0]);
        let e = make_epochs(&vec![0.0; 7000], 100.0, 20.0, EpochMode::All).unwrap();
        assert_eq!(e.len(), 3);
        assert!(e.iter().all(|e| e.channels[0].samples.len() == 2000));
    }

    #[test]
    fn epochs_single_modes() {
        let sig: Vec<f64> = (0..2000).map(|i| i as f64).collect();
        let e = make_epochs(&sig, 100.0, 20.0, EpochMode::Middle).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].start_time_s, 0.0);

        let sig = vec![0.0; 6000];
        let mid = make_epochs(&sig, 100.0, 20.0, EpochMode::Middle).unwrap();
        assert_eq!(mid[0].start_time_s, 20.0);
        let end = make_epochs(&sig, 100.0, 20.0, EpochMode::End).unwrap();
        assert_eq!(end[0].start_time_s, 40.0);
    }

    #[test]
    fn epochs_too_short() {
        let err = make_epochs(&[0.0; 1999], 100.0, 20.0, EpochMode::All).unwrap_err();
        assert!(matches!(err, SpectralError::SignalTooShort { .. }));
        assert!(window_len(0.015, 100.0).is_err());
    }

    #[test]
    fn impulse_and_constant() {
        let s = fft(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        for c in &s.coeffs {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        let s = fft(&[1.0; 4]).unwrap();
        assert!((s.coeffs[0] - Complex64::new(4.0, 0.0)).norm() < 1e-15);
        for c in &s.coeffs[1..] {
            assert!(c.norm() < 1e-15);
        }
        assert_eq!(fft(&[]).unwrap_err(), SpectralError::Empty);
    }

    #[test]
    fn ten_hz_sine_alpha_only() {
        let x = sine(10.0, 1.0, 20.0, 100.0);
        let s = fft_with_rate(&x, 100.0).unwrap();
        let p = BandPowers::from_spectrum(&s).unwrap();
        assert!((p.alpha - 0.5).abs() < 1e-9);
        for other in [p.delta, p.theta, p.beta, p.gamma, p.gap] {
            assert!(other < 1e-12, "{other}");
        }

        let masked = band_mask(&s, Band::ALPHA).unwrap();
        for (k, (m, o)) in masked.coeffs.iter().zip(&s.coeffs).enumerate() {
            let f = s.bin_frequency(k);
            if k == 200 || k == 1800 {
                assert_eq!(m, o);
            } else if (8.0..13.0).contains(&f) {
                assert_eq!(m, o);
                assert!(m.norm() < 1e-9);
            } else {
                assert_eq!(m.norm(), 0.0);
            }
        }
        let beta = band_mask(&s, Band::BETA).unwrap();
        assert!(beta.coeffs.iter().all(|c| c.norm() < 1e-9));
    }

    #[test]
    fn thirteen_hz_belongs_to_beta() {
        let x = sine(13.0, 1.0, 20.0, 100.0);
        let s = fft_with_rate(&x, 100.0).unwrap();
        assert!(band_power(&s, Band::ALPHA).unwrap() < 1e-12);
        assert!((band_power(&s, Band::BETA).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn nyquist_bin_goes_to_gamma() {
        let x: Vec<f64> = (0..100)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let s = fft_with_rate(&x, 100.0).unwrap();
        assert!((band_power(&s, Band::GAMMA).unwrap() - 1.0).abs() < 1e-12);
        assert!((total_power(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn band_above_nyquist_errors() {
        let s = fft_with_rate(&[0.0; 10], 10.0).unwrap();
        assert!(matches!(
            band_power(&s, Band::BETA),
            Err(SpectralError::AboveNyquist { .. })
        ));
        assert!(Band::new(5.0, 5.0).is_err());
        assert!(Band::new(-1.0, 5.0).is_err());
    }

    #[test]
    fn zero_signal_has_zero_power() {
        let s = fft_with_rate(&vec![0.0; 2000], 100.0).unwrap();
        let p = BandPowers::from_spectrum(&s).unwrap();
        for r in Rhythm::ALL {
            assert_eq!(p.get(r), 0.0);
        }
    }

    #[test]
    fn waveforms() {
        let x = sine(10.0, 1.0, 20.0, 100.0);
        let epoch = &make_epochs(&x, 100.0, 20.0, EpochMode::Start).unwrap()[0];
        let alpha = band_waveform(epoch, "signal", Band::ALPHA).unwrap();
        let rms = |v: &[f64]| (v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64).sqrt();
        let diff: Vec<f64> = alpha.iter().zip(&x).map(|(a, b)| a - b).collect();
        assert!(rms(&diff) < 1e-9);
        let beta = band_waveform(epoch, "signal", Band::BETA).unwrap();
        assert!(rms(&beta) < 1e-9);
        assert!(band_waveform(epoch, "nope", Band::BETA).is_err());
    }

    #[test]
    fn theta_beta_residual_reconstructs() {
        let a = sine(5.0, 1.0, 20.0, 100.0);
        let b = sine(20.0, 0.7, 20.0, 100.0);
        let x: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
        let epoch = &make_epochs(&x, 100.0, 20.0, EpochMode::Start).unwrap()[0];
        let theta = band_waveform(epoch, "signal", Band::THETA).unwrap();
        let beta = band_waveform(epoch, "signal", Band::BETA).unwrap();
        let residual: Vec<f64> = (0..x.len()).map(|i| x[i] - theta[i] - beta[i]).collect();
        let rebuilt: Vec<f64> = (0..x.len())
            .map(|i| theta[i] + beta[i] + residual[i])
            .collect();
        let err = rebuilt
            .iter()
            .zip(&x)
            .map(|(r, o)| (r - o).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-9);
        // Residual holds nothing but rounding noise for this two-tone input.
        assert!(residual.iter().all(|r| r.abs() < 1e-9));
    }
}
