//! End-to-end analysis: EDF recording -> epochs -> band powers -> features
//! -> calibration -> classification -> report.
//!
//! Calibration needs the whole feature series, so the run is two passes with
//! a serial barrier between them. Both passes fan out over epochs.

mod emit;

use std::path::PathBuf;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edf::{self, EdfError, EdfRecording};
use crate::features::{
    band_power_table, features_from_table, BandPowerTable, ChannelMap, ChannelMapError,
    ChannelRole, FeatureError, FeatureVector,
};
use crate::fuzzy::{
    calibrate, CalibratedVariable, FcmParams, FuzzyError, FuzzySystem, RuleBase, RuleError,
};
use crate::spectral::{epoch_windows, Epoch, EpochMode, SpectralError};

pub use emit::{
    csv_header, emit_plot_data, emit_report, format_sig9, plot_epoch_starts, report_csv,
    report_json,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot parse {path}: {source}")]
    Edf {
        path: PathBuf,
        #[source]
        source: EdfError,
    },
    #[error(transparent)]
    Channel(#[from] EdfError),
    #[error("channel map {path}: {source}")]
    ChannelMap {
        path: PathBuf,
        #[source]
        source: ChannelMapError,
    },
    #[error("rule file {path}: {source}")]
    Rules {
        path: PathBuf,
        #[source]
        source: RuleError,
    },
    #[error("mapped channels disagree on sample rate: {0}")]
    MixedRates(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no epoch produced defined features ({0} epochs analysed)")]
    NoValidEpochs(usize),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// 1 for bad input, 2 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub channel_map: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub epoch_seconds: f64,
    pub epoch_mode: EpochMode,
    pub out_dir: PathBuf,
    pub format: ReportFormat,
    pub plots: bool,
    pub fcm: FcmParams,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            channel_map: None,
            rules: None,
            epoch_seconds: 20.0,
            epoch_mode: EpochMode::All,
            out_dir: out_dir.into(),
            format: ReportFormat::Csv,
            plots: false,
            fcm: FcmParams::default(),
        }
    }
}

/// Settings for [`analyze`], independent of the filesystem.
#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub epoch_seconds: f64,
    pub epoch_mode: EpochMode,
    pub fcm: FcmParams,
    pub rules: RuleBase,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            epoch_seconds: 20.0,
            epoch_mode: EpochMode::All,
            fcm: FcmParams::default(),
            rules: RuleBase::standard(),
        }
    }
}

/// Band powers reported per role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolePowers {
    pub role: String,
    pub delta: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    pub start_time_s: f64,
    /// In [`ChannelRole::ALL`] order.
    pub band_powers: Vec<RolePowers>,
    pub arousal: Option<f64>,
    pub valence: Option<f64>,
    pub dominance: Option<f64>,
    pub ds: Option<f64>,
    pub indeterminate: bool,
    /// Set when a feature denominator vanished; such rows carry no DS.
    pub feature_error: Option<String>,
    pub rule_strengths: Vec<f64>,
}

impl EpochRow {
    /// Rows that count towards the summary statistics.
    pub fn is_ranked(&self) -> bool {
        self.ds.is_some() && !self.indeterminate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub arousal: CalibratedVariable,
    pub valence: CalibratedVariable,
    pub dominance: CalibratedVariable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub epochs: usize,
    pub classified: usize,
    pub feature_undefined: usize,
    pub indeterminate: usize,
    /// Mean DS over ranked epochs.
    pub mean_ds: Option<f64>,
    /// Fraction of ranked epochs with DS > 0.5.
    pub drowsy_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrowsinessReport {
    pub channel_map: std::collections::BTreeMap<String, String>,
    pub epoch_seconds: f64,
    pub rules: Vec<String>,
    pub calibration: Calibration,
    pub summary: Summary,
    pub epochs: Vec<EpochRow>,
}

/// Cuts epochs over the distinct mapped channels.
pub fn mapped_epochs(
    recording: &EdfRecording,
    map: &ChannelMap,
    epoch_seconds: f64,
    mode: EpochMode,
) -> Result<Vec<Epoch>, PipelineError> {
    let labels = map.unique_labels();
    let channels = labels
        .iter()
        .map(|l| recording.select_channel(l))
        .collect::<Result<Vec<_>, _>>()?;
    let rate = channels[0].sample_rate;
    if let Some(odd) = channels.iter().find(|c| c.sample_rate != rate) {
        return Err(PipelineError::MixedRates(format!(
            "{} at {} Hz, {} at {} Hz",
            channels[0].label, rate, odd.label, odd.sample_rate
        )));
    }
    let n = channels.iter().map(|c| c.samples.len()).min().unwrap_or(0);
    let pairs: Vec<(&str, &[f64])> = labels
        .iter()
        .zip(&channels)
        .map(|(l, c)| (*l, c.samples))
        .collect();
    epoch_windows(n, rate, epoch_seconds, mode)?
        .into_iter()
        .map(|w| Epoch::from_window(&pairs, rate, w).map_err(Into::into))
        .collect()
}

fn role_powers(table: &BandPowerTable) -> Vec<RolePowers> {
    ChannelRole::ALL
        .iter()
        .map(|&r| {
            let p = table.get(r);
            RolePowers {
                role: r.name().to_lowercase(),
                delta: p.delta,
                theta: p.theta,
                alpha: p.alpha,
                beta: p.beta,
            }
        })
        .collect()
}

/// Runs both passes over an in-memory recording.
pub fn analyze(
    recording: &EdfRecording,
    map: &ChannelMap,
    options: &AnalysisOptions,
) -> Result<DrowsinessReport, PipelineError> {
    if !(options.epoch_seconds > 0.0) {
        return Err(PipelineError::Config(format!(
            "epoch duration must be positive, got {}",
            options.epoch_seconds
        )));
    }
    let epochs = mapped_epochs(recording, map, options.epoch_seconds, options.epoch_mode)?;

    // pass 1
    let pass1: Vec<(BandPowerTable, Result<FeatureVector, FeatureError>)> = epochs
        .par_iter()
        .map(|e| {
            let table = band_power_table(e, map)?;
            let features = features_from_table(&table, e.start_time_s);
            Ok((table, features))
        })
        .collect::<Result<_, FeatureError>>()
        .map_err(|e| match e {
            FeatureError::Spectral(s) => PipelineError::Spectral(s),
            other => PipelineError::Config(other.to_string()),
        })?;

    let defined: Vec<FeatureVector> = pass1
        .iter()
        .filter_map(|(_, f)| f.as_ref().ok().copied())
        .collect();
    if defined.is_empty() {
        return Err(PipelineError::NoValidEpochs(epochs.len()));
    }
    for ((_, f), epoch) in pass1.iter().zip(&epochs) {
        if let Err(e) = f {
            warn!("epoch at {} s excluded: {e}", epoch.start_time_s);
        }
    }

    let [a, v, d] = calibrate(&defined, &options.fcm)?;
    let system = FuzzySystem::new(
        [a.variable.clone(), v.variable.clone(), d.variable.clone()],
        options.rules.clone(),
    );

    // pass 2
    let rows: Vec<EpochRow> = pass1
        .par_iter()
        .zip(&epochs)
        .map(|((table, features), epoch)| {
            let band_powers = role_powers(table);
            match features {
                Ok(fv) => {
                    let c = system.classify(fv);
                    EpochRow {
                        start_time_s: epoch.start_time_s,
                        band_powers,
                        arousal: Some(fv.arousal),
                        valence: Some(fv.valence),
                        dominance: Some(fv.dominance),
                        ds: Some(c.ds),
                        indeterminate: c.indeterminate,
                        feature_error: None,
                        rule_strengths: c.strengths,
                    }
                }
                Err(e) => EpochRow {
                    start_time_s: epoch.start_time_s,
                    band_powers,
                    arousal: None,
                    valence: None,
                    dominance: None,
                    ds: None,
                    indeterminate: false,
                    feature_error: Some(e.to_string()),
                    rule_strengths: vec![0.0; options.rules.len()],
                },
            }
        })
        .collect();

    let summary = summarize(&rows);
    info!(
        "{} epochs, {} classified, {} undefined, {} indeterminate",
        summary.epochs, summary.classified, summary.feature_undefined, summary.indeterminate
    );
    Ok(DrowsinessReport {
        channel_map: map.to_map(),
        epoch_seconds: options.epoch_seconds,
        rules: options
            .rules
            .rules()
            .iter()
            .map(|r| r.to_string())
            .collect(),
        calibration: Calibration {
            arousal: a,
            valence: v,
            dominance: d,
        },
        summary,
        epochs: rows,
    })
}

fn summarize(rows: &[EpochRow]) -> Summary {
    let ranked: Vec<f64> = rows
        .iter()
        .filter(|r| r.is_ranked())
        .filter_map(|r| r.ds)
        .collect();
    let (mean_ds, drowsy_fraction) = if ranked.is_empty() {
        (None, None)
    } else {
        let n = ranked.len() as f64;
        (
            Some(ranked.iter().sum::<f64>() / n),
            Some(ranked.iter().filter(|&&d| d > 0.5).count() as f64 / n),
        )
    };
    Summary {
        epochs: rows.len(),
        classified: ranked.len(),
        feature_undefined: rows.iter().filter(|r| r.feature_error.is_some()).count(),
        indeterminate: rows.iter().filter(|r| r.indeterminate).count(),
        mean_ds,
        drowsy_fraction,
    }
}

/// Reads the configured inputs and runs [`analyze`]. Returns the recording
/// as well so plot data can be emitted from it.
pub fn run_pipeline(
    config: &PipelineConfig,
) -> Result<(EdfRecording, DrowsinessReport), PipelineError> {
    let bytes = std::fs::read(&config.input).map_err(|e| PipelineError::io(&config.input, e))?;
    let recording = edf::parse_edf(&bytes).map_err(|source| PipelineError::Edf {
        path: config.input.clone(),
        source,
    })?;
    info!(
        "{}: {} signals, {} records of {} s",
        config.input.display(),
        recording.signals.len(),
        recording.num_records(),
        recording.header.record_duration_s
    );
    let map = match &config.channel_map {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
            ChannelMap::parse(&text).map_err(|source| PipelineError::ChannelMap {
                path: path.clone(),
                source,
            })?
        }
        None => ChannelMap::sleep_edf(),
    };
    let rules = match &config.rules {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
            RuleBase::parse(&text).map_err(|source| PipelineError::Rules {
                path: path.clone(),
                source,
            })?
        }
        None => RuleBase::standard(),
    };
    let options = AnalysisOptions {
        epoch_seconds: config.epoch_seconds,
        epoch_mode: config.epoch_mode,
        fcm: config.fcm,
        rules,
    };
    let report = analyze(&recording, &map, &options)?;
    Ok((recording, report))
}
