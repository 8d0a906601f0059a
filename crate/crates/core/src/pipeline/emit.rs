//! Report and plot-data writers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;
use serde_json::Value;

use super::{DrowsinessReport, PipelineError, ReportFormat};
use crate::edf::EdfRecording;
use crate::features::ChannelRole;
use crate::spectral::{band_waveform, Band, Epoch, EpochWindow};

/// Leading CSV columns; role band powers and rule strengths follow.
pub const CSV_COLUMNS: [&str; 1] = ["start_time_s"];

const ROLE_BANDS: [&str; 4] = ["delta", "theta", "alpha", "beta"];

/// Formats `v` with 9 significant digits, in plain decimal notation for
/// moderate magnitudes and scientific notation otherwise.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.8e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if !(-5..15).contains(&exp) {
        return sci;
    }
    let decimals = (8 - exp).max(0) as usize;
    let fixed = format!("{v:.decimals$}");
    if fixed.contains('.') {
        fixed
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        fixed
    }
}

fn round9(v: f64) -> f64 {
    format_sig9(v).parse().unwrap_or(v)
}

fn opt(v: Option<f64>) -> String {
    v.map(format_sig9).unwrap_or_default()
}

pub fn csv_header(n_rules: usize) -> Vec<String> {
    let mut cols: Vec<String> = CSV_COLUMNS.iter().map(|s| s.to_string()).collect();
    for role in ChannelRole::ALL {
        for band in ROLE_BANDS {
            cols.push(format!("{}_{band}", role.name().to_lowercase()));
        }
    }
    cols.extend(
        [
            "arousal",
            "valence",
            "dominance",
            "ds",
            "indeterminate",
            "feature_undefined",
        ]
        .map(String::from),
    );
    cols.extend((1..=n_rules).map(|i| format!("rule_{i}")));
    cols
}

pub fn report_csv(report: &DrowsinessReport) -> String {
    let mut out = csv_header(report.rules.len()).join(",");
    out.push('\n');
    for row in &report.epochs {
        let mut cells = vec![format_sig9(row.start_time_s)];
        for p in &row.band_powers {
            cells.extend([p.delta, p.theta, p.alpha, p.beta].map(format_sig9));
        }
        cells.extend([
            opt(row.arousal),
            opt(row.valence),
            opt(row.dominance),
            opt(row.ds),
        ]);
        cells.push(u8::from(row.indeterminate).to_string());
        cells.push(u8::from(row.feature_error.is_some()).to_string());
        cells.extend(row.rule_strengths.iter().map(|&s| format_sig9(s)));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .map(round9)
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Same content as the CSV, with reals rounded to the same 9 digits.
pub fn report_json(report: &DrowsinessReport) -> String {
    let mut value = serde_json::to_value(report).expect("report serializes");
    round_numbers(&mut value);
    let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    let mut f = fs::File::create(path).map_err(|e| PipelineError::io(path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| PipelineError::io(path, e))
}

/// Writes `report.csv` or `report.json` into `out_dir`.
pub fn emit_report(
    report: &DrowsinessReport,
    format: ReportFormat,
    out_dir: &Path,
) -> Result<PathBuf, PipelineError> {
    fs::create_dir_all(out_dir).map_err(|e| PipelineError::io(out_dir, e))?;
    if report.epochs.iter().all(|r| !r.is_ranked()) {
        warn!("report contains no classified epochs");
    }
    let (name, body) = match format {
        ReportFormat::Csv => ("report.csv", report_csv(report)),
        ReportFormat::Json => ("report.json", report_json(report)),
    };
    let path = out_dir.join(name);
    write_file(&path, &body)?;
    Ok(path)
}

/// Epochs that get plot data: the first, middle and last report rows.
pub fn plot_epoch_starts(report: &DrowsinessReport) -> Vec<f64> {
    let n = report.epochs.len();
    if n == 0 {
        return Vec::new();
    }
    let mut idx = vec![0, n / 2, n - 1];
    idx.dedup();
    idx.into_iter()
        .map(|i| report.epochs[i].start_time_s)
        .collect()
}

fn slug(label: &str) -> String {
    label
        .trim()
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect()
}

fn two_column(start: f64, rate: f64, values: &[f64]) -> String {
    let mut out = String::from("time_s,value\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format_sig9(start + i as f64 / rate));
        out.push(',');
        out.push_str(&format_sig9(*v));
        out.push('\n');
    }
    out
}

/// Writes time-series CSVs for selected epochs under `out_dir/plots`:
/// raw signal, delta/theta/alpha/beta waveforms, the residual outside those
/// bands, and the instantaneous alpha-minus-beta power comparison.
pub fn emit_plot_data(
    report: &DrowsinessReport,
    recording: &EdfRecording,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, PipelineError> {
    let dir = out_dir.join("plots");
    fs::create_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;
    let mut labels: Vec<&str> = Vec::new();
    for role in ChannelRole::ALL {
        if let Some(l) = report.channel_map.get(&role.name().to_lowercase()) {
            if !labels.contains(&l.as_str()) {
                labels.push(l);
            }
        }
    }
    let mut written = Vec::new();
    for start in plot_epoch_starts(report) {
        for label in &labels {
            let ch = recording.select_channel(label)?;
            let rate = ch.sample_rate;
            let len = crate::spectral::window_len(report.epoch_seconds, rate)?;
            let window = EpochWindow {
                start: (start * rate).round() as usize,
                len,
            };
            let epoch = Epoch::from_window(&[(label, ch.samples)], rate, window)?;
            let raw = epoch.channels[0].samples.clone();
            let bands = [
                ("delta", Band::DELTA),
                ("theta", Band::THETA),
                ("alpha", Band::ALPHA),
                ("beta", Band::BETA),
            ];
            let mut series: Vec<(String, Vec<f64>)> = vec![("raw".into(), raw.clone())];
            let mut residual = raw;
            for (name, band) in bands {
                let w = band_waveform(&epoch, label, band)?;
                for (r, x) in residual.iter_mut().zip(&w) {
                    *r -= x;
                }
                series.push((name.into(), w));
            }
            series.push(("residual".into(), residual));
            let compare = series[3]
                .1
                .iter()
                .zip(&series[4].1)
                .map(|(a, b)| a * a - b * b)
                .collect();
            series.push(("alpha_vs_beta".into(), compare));

            for (name, values) in series {
                let path = dir.join(format!(
                    "epoch_{}_{}_{name}.csv",
                    format_sig9(start),
                    slug(label)
                ));
                write_file(&path, &two_column(start, rate, &values))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
