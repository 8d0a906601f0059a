//! Arousal, valence and dominance from per-electrode alpha and beta power.
//!
//! ```text
//! A = α(AF3 + AF4 + F3 + F4) / β(AF3 + AF4 + F3 + F4)
//! V = αF4/βF4 − αF3/βF3
//! D = βFC6/αFC6 + βF8/αF8 + βP8/αP8
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::{fft_with_plan, BandPowers, Epoch, FftPlan, SpectralError};

/// A denominator at or below this fraction of the involved channels' total
/// power counts as zero. 16-bit quantization alone leaves roughly 1e-9 of the
/// power in every band, so the floor sits well above that.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("{feature} undefined: {reason}")]
    Undefined {
        feature: &'static str,
        reason: String,
    },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelMapError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("channel map is missing roles: {}", .0.join(", "))]
    MissingRoles(Vec<String>),
}

/// Electrode positions the features are defined over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChannelRole {
    AF3,
    AF4,
    F3,
    F4,
    FC6,
    F8,
    P8,
}

impl ChannelRole {
    pub const ALL: [ChannelRole; 7] = [
        ChannelRole::AF3,
        ChannelRole::AF4,
        ChannelRole::F3,
        ChannelRole::F4,
        ChannelRole::FC6,
        ChannelRole::F8,
        ChannelRole::P8,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelRole::AF3 => "AF3",
            ChannelRole::AF4 => "AF4",
            ChannelRole::F3 => "F3",
            ChannelRole::F4 => "F4",
            ChannelRole::FC6 => "FC6",
            ChannelRole::F8 => "F8",
            ChannelRole::P8 => "P8",
        }
    }
}

impl fmt::Display for ChannelRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChannelRole::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown role {s:?}"))
    }
}

/// Assignment of every role to an EDF channel label. Labels may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelMap {
    labels: [String; 7],
}

impl ChannelMap {
    pub fn new(labels: [String; 7]) -> Self {
        Self {
            labels: labels.map(|l| l.trim().to_string()),
        }
    }

    /// Sends every role to the same channel.
    pub fn uniform(label: &str) -> Self {
        Self::new(std::array::from_fn(|_| label.to_string()))
    }

    /// Sleep-EDF montage: frontal roles on Fpz-Cz, P8 on Pz-Oz.
    pub fn sleep_edf() -> Self {
        let mut labels: [String; 7] = std::array::from_fn(|_| "EEG Fpz-Cz".to_string());
        labels[ChannelRole::P8.index()] = "EEG Pz-Oz".to_string();
        Self::new(labels)
    }

    pub fn label(&self, role: ChannelRole) -> &str {
        &self.labels[role.index()]
    }

    /// Distinct labels in first-use order.
    pub fn unique_labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for l in &self.labels {
            if !out.contains(&l.as_str()) {
                out.push(l);
            }
        }
        out
    }

    /// Lowercase role name to label.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        ChannelRole::ALL
            .iter()
            .map(|r| (r.name().to_lowercase(), self.label(*r).to_string()))
            .collect()
    }

    /// Parses `ROLE = LABEL` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ChannelMapError> {
        let mut slots: [Option<String>; 7] = Default::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| ChannelMapError::Syntax {
                line: i + 1,
                message,
            };
            let (role, label) = line
                .split_once('=')
                .ok_or_else(|| syntax("expected `ROLE = LABEL`".into()))?;
            let role: ChannelRole = role.parse().map_err(syntax)?;
            let label = label.trim();
            if label.is_empty() {
                return Err(syntax(format!("empty label for {role}")));
            }
            if slots[role.index()].is_some() {
                return Err(syntax(format!("{role} assigned twice")));
            }
            slots[role.index()] = Some(label.to_string());
        }
        let missing: Vec<String> = ChannelRole::ALL
            .iter()
            .filter(|r| slots[r.index()].is_none())
            .map(|r| r.name().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(ChannelMapError::MissingRoles(missing));
        }
        Ok(Self::new(slots.map(|s| s.unwrap_or_default())))
    }
}

/// Band powers of one epoch, per role.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BandPowerTable {
    pub roles: [BandPowers; 7],
}

impl BandPowerTable {
    pub fn get(&self, role: ChannelRole) -> &BandPowers {
        &self.roles[role.index()]
    }

    pub fn get_mut(&mut self, role: ChannelRole) -> &mut BandPowers {
        &mut self.roles[role.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub arousal: f64,
    pub valence: f64,
    pub dominance: f64,
    pub epoch_start_s: f64,
}

fn check_denominator(
    feature: &'static str,
    what: &str,
    denom: f64,
    reference: f64,
) -> Result<(), FeatureError> {
    if !(denom > DENOMINATOR_FLOOR * reference) || denom <= 0.0 {
        return Err(FeatureError::Undefined {
            feature,
            reason: format!("{what} is {denom:e} against total power {reference:e}"),
        });
    }
    Ok(())
}

const AROUSAL_ROLES: [ChannelRole; 4] = [
    ChannelRole::AF3,
    ChannelRole::AF4,
    ChannelRole::F3,
    ChannelRole::F4,
];

pub fn arousal(bp: &BandPowerTable) -> Result<f64, FeatureError> {
    let alpha: f64 = AROUSAL_ROLES.iter().map(|&r| bp.get(r).alpha).sum();
    let beta: f64 = AROUSAL_ROLES.iter().map(|&r| bp.get(r).beta).sum();
    let total: f64 = AROUSAL_ROLES.iter().map(|&r| bp.get(r).total).sum();
    check_denominator("arousal", "frontal beta power", beta, total)?;
    Ok(alpha / beta)
}

pub fn valence(bp: &BandPowerTable) -> Result<f64, FeatureError> {
    let f4 = bp.get(ChannelRole::F4);
    let f3 = bp.get(ChannelRole::F3);
    check_denominator("valence", "F4 beta power", f4.beta, f4.total)?;
    check_denominator("valence", "F3 beta power", f3.beta, f3.total)?;
    Ok(f4.alpha / f4.beta - f3.alpha / f3.beta)
}

pub fn dominance(bp: &BandPowerTable) -> Result<f64, FeatureError> {
    let mut sum = 0.0;
    for role in [ChannelRole::FC6, ChannelRole::F8, ChannelRole::P8] {
        let p = bp.get(role);
        check_denominator(
            "dominance",
            &format!("{role} alpha power"),
            p.alpha,
            p.total,
        )?;
        sum += p.beta / p.alpha;
    }
    Ok(sum)
}

pub fn features_from_table(
    bp: &BandPowerTable,
    epoch_start_s: f64,
) -> Result<FeatureVector, FeatureError> {
    Ok(FeatureVector {
        arousal: arousal(bp)?,
        valence: valence(bp)?,
        dominance: dominance(bp)?,
        epoch_start_s,
    })
}

/// Computes band powers once per distinct mapped channel and spreads them
/// over the roles.
pub fn band_power_table(epoch: &Epoch, map: &ChannelMap) -> Result<BandPowerTable, FeatureError> {
    let mut plan: Option<FftPlan> = None;
    let mut per_label: Vec<(&str, BandPowers)> = Vec::new();
    for label in map.unique_labels() {
        let samples = epoch.channel(label)?;
        if samples.is_empty() {
            return Err(SpectralError::Empty.into());
        }
        let plan = match &plan {
            Some(p) if p.len() == samples.len() => p,
            _ => plan.insert(FftPlan::new(samples.len())),
        };
        let spectrum = fft_with_plan(plan, samples, epoch.sample_rate);
        per_label.push((label, BandPowers::from_spectrum(&spectrum)?));
    }
    let mut table = BandPowerTable::default();
    for role in ChannelRole::ALL {
        let label = map.label(role);
        // unique_labels covers every mapped label
        let powers = per_label.iter().find(|(l, _)| *l == label).unwrap().1;
        *table.get_mut(role) = powers;
    }
    Ok(table)
}

pub fn extract_features(epoch: &Epoch, map: &ChannelMap) -> Result<FeatureVector, FeatureError> {
    let table = band_power_table(epoch, map)?;
    features_from_table(&table, epoch.start_time_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{EpochChannel, EpochMode};
    use std::f64::consts::PI;

    fn table(alpha: [f64; 7], beta: [f64; 7]) -> BandPowerTable {
        let mut t = BandPowerTable::default();
        for r in ChannelRole::ALL {
            let p = t.get_mut(r);
            p.alpha = alpha[r.index()];
            p.beta = beta[r.index()];
            p.total = p.alpha + p.beta;
        }
        t
    }

    #[test]
    fn arousal_examples() {
        assert_eq!(arousal(&table([3.0; 7], [3.0; 7])).unwrap(), 1.0);
        assert_eq!(arousal(&table([4.0; 7], [2.0; 7])).unwrap(), 2.0);
        let t = table(
            [1.0, 2.0, 3.0, 4.0, 1.0, 1.0, 1.0],
            [4.0, 3.0, 2.0, 1.0, 1.0, 1.0, 1.0],
        );
        assert_eq!(arousal(&t).unwrap(), 1.0);
    }

    #[test]
    fn valence_examples() {
        assert_eq!(valence(&table([2.0; 7], [5.0; 7])).unwrap(), 0.0);
        let mut a = [1.0; 7];
        let mut b = [1.0; 7];
        a[ChannelRole::F4.index()] = 3.0;
        assert_eq!(valence(&table(a, b)).unwrap(), 2.0);
        a[ChannelRole::F4.index()] = 2.0;
        b[ChannelRole::F4.index()] = 4.0;
        a[ChannelRole::F3.index()] = 3.0;
        b[ChannelRole::F3.index()] = 2.0;
        assert_eq!(valence(&table(a, b)).unwrap(), -1.0);
    }

    #[test]
    fn dominance_examples() {
        assert_eq!(dominance(&table([2.0; 7], [2.0; 7])).unwrap(), 3.0);
        let mut a = [1.0; 7];
        let mut b = [1.0; 7];
        for (role, alpha, beta) in [
            (ChannelRole::FC6, 2.0, 1.0),
            (ChannelRole::F8, 1.0, 1.0),
            (ChannelRole::P8, 2.0, 3.0),
        ] {
            a[role.index()] = alpha;
            b[role.index()] = beta;
        }
        assert_eq!(dominance(&table(a, b)).unwrap(), 3.0);
        for (role, alpha, beta) in [
            (ChannelRole::FC6, 1.0, 2.0),
            (ChannelRole::F8, 2.0, 6.0),
            (ChannelRole::P8, 8.0, 4.0),
        ] {
            a[role.index()] = alpha;
            b[role.index()] = beta;
        }
        assert_eq!(dominance(&table(a, b)).unwrap(), 5.5);
    }

    #[test]
    fn zero_denominators_are_undefined() {
        let t = table([1.0; 7], [0.0; 7]);
        assert!(matches!(arousal(&t), Err(FeatureError::Undefined { .. })));
        assert!(matches!(valence(&t), Err(FeatureError::Undefined { .. })));
        let t = table([0.0; 7], [1.0; 7]);
        assert!(matches!(dominance(&t), Err(FeatureError::Undefined { .. })));
        assert!(matches!(
            arousal(&BandPowerTable::default()),
            Err(FeatureError::Undefined { .. })
        ));
    }

    #[test]
    fn channel_map_parsing() {
        let text = "# montage\nAF3 = EEG Fpz-Cz\nAF4=EEG Fpz-Cz\nF3 = EEG Fpz-Cz # same\n\
                    F4 = EEG Fpz-Cz\nFC6 = EEG Fpz-Cz\nF8 = EEG Fpz-Cz\nP8 = EEG Pz-Oz\n";
        assert_eq!(ChannelMap::parse(text).unwrap(), ChannelMap::sleep_edf());
        assert!(matches!(
            ChannelMap::parse("AF3 = x\n"),
            Err(ChannelMapError::MissingRoles(m)) if m.len() == 6
        ));
        assert!(matches!(
            ChannelMap::parse("AF3 x\n"),
            Err(ChannelMapError::Syntax { line: 1, .. })
        ));
        assert!(ChannelMap::parse("Q9 = x\n").is_err());
        assert!(ChannelMap::parse("AF3 = x\nAF3 = y\n").is_err());
    }

    fn sines(freqs: &[(f64, f64)], n: usize, rate: f64) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = i as f64 / rate;
                freqs
                    .iter()
                    .map(|(f, a)| a * (2.0 * PI * f * t).sin())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn mixture_on_every_channel() {
        // amplitudes 2 and 1 -> alpha power 2, beta power 0.5
        let x = sines(&[(10.0, 2.0), (20.0, 1.0)], 2000, 100.0);
        let epoch = Epoch {
            start_time_s: 40.0,
            duration_s: 20.0,
            sample_rate: 100.0,
            channels: vec![
                EpochChannel {
                    label: "a".into(),
                    samples: x.clone(),
                },
                EpochChannel {
                    label: "b".into(),
                    samples: x,
                },
            ],
        };
        let mut labels: [String; 7] = std::array::from_fn(|_| "a".to_string());
        labels[ChannelRole::P8.index()] = "b".into();
        let fv = extract_features(&epoch, &ChannelMap::new(labels)).unwrap();
        assert!((fv.arousal - 4.0).abs() < 1e-9);
        assert!(fv.valence.abs() < 1e-12);
        assert!((fv.dominance - 0.75).abs() < 1e-9);
        assert_eq!(fv.epoch_start_s, 40.0);
    }

    #[test]
    fn pure_alpha_channel_is_undefined() {
        let x = sines(&[(10.0, 1.0)], 2000, 100.0);
        let epochs = crate::spectral::make_epochs(&x, 100.0, 20.0, EpochMode::All).unwrap();
        let err = extract_features(&epochs[0], &ChannelMap::uniform("signal")).unwrap_err();
        assert!(matches!(
            err,
            FeatureError::Undefined {
                feature: "arousal",
                ..
            }
        ));
    }

    #[test]
    fn missing_channel() {
        let x = sines(&[(10.0, 1.0)], 2000, 100.0);
        let epochs = crate::spectral::make_epochs(&x, 100.0, 20.0, EpochMode::All).unwrap();
        assert!(matches!(
            extract_features(&epochs[0], &ChannelMap::uniform("other")),
            Err(FeatureError::Spectral(SpectralError::MissingChannel(_)))
        ));
    }
}
