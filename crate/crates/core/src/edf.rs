//! EDF/EDF+ reader and writer.
//!
//! Layout: a 256-byte global header, `num_signals` x 256 bytes of signal
//! headers stored field-major, then data records of little-endian `i16`
//! samples with the signals concatenated inside each record.

use thiserror::Error;

/// Label used by EDF+ for the annotation pseudo-signal.
pub const ANNOTATION_LABEL: &str = "EDF Annotations";

const GLOBAL_HEADER_BYTES: usize = 256;
const SIGNAL_HEADER_BYTES: usize = 256;

// Global header field widths, in file order.
const W_VERSION: usize = 8;
const W_PATIENT: usize = 80;
const W_RECORDING: usize = 80;
const W_START_DATE: usize = 8;
const W_START_TIME: usize = 8;
const W_HEADER_BYTES: usize = 8;
const W_RESERVED: usize = 44;
const W_NUM_RECORDS: usize = 8;
const W_DURATION: usize = 8;
const W_NUM_SIGNALS: usize = 4;

// Signal header field widths, in file order.
const W_LABEL: usize = 16;
const W_TRANSDUCER: usize = 80;
const W_PHYS_DIM: usize = 8;
const W_PHYS_MIN: usize = 8;
const W_PHYS_MAX: usize = 8;
const W_DIG_MIN: usize = 8;
const W_DIG_MAX: usize = 8;
const W_PREFILTER: usize = 80;
const W_SAMPLES: usize = 8;
const W_SIG_RESERVED: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdfError {
    #[error("file too short: {0} bytes, need at least 256")]
    TooShort(usize),
    #[error("truncated file: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("field `{field}` is not a valid number: {value:?}")]
    InvalidNumber { field: String, value: String },
    #[error("field `{field}` does not fit in {width} bytes: {value:?}")]
    FieldOverflow {
        field: String,
        width: usize,
        value: String,
    },
    #[error("field `{field}` contains non-ASCII text")]
    NonAscii { field: String },
    #[error("header byte count {declared} does not match 256 + 256 x {num_signals}")]
    HeaderSize { declared: usize, num_signals: usize },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("signal {signal}: digital_min {min} must be below digital_max {max}")]
    DigitalRange { signal: String, min: i32, max: i32 },
    #[error("signal {signal}: physical_min equals physical_max ({value})")]
    PhysicalRange { signal: String, value: f64 },
    #[error("signal {signal}: value {value} outside calibrated range [{min}, {max}]")]
    OutOfRange {
        signal: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("signal {signal}: {actual} samples, expected {expected}")]
    SampleCount {
        signal: String,
        expected: usize,
        actual: usize,
    },
    #[error("unknown channel {label:?}; available: {}", available.join(", "))]
    UnknownChannel {
        label: String,
        available: Vec<String>,
    },
    #[error("channel label {0:?} matches more than one signal")]
    AmbiguousChannel(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdfHeader {
    pub version: String,
    pub patient_id: String,
    pub recording_id: String,
    /// dd.mm.yy
    pub start_date: String,
    /// hh.mm.ss
    pub start_time: String,
    pub header_bytes: usize,
    /// Carries "EDF+C" / "EDF+D" in EDF+ files.
    pub reserved: String,
    /// -1 when the file leaves the count unknown.
    pub num_records: i64,
    pub record_duration_s: f64,
    pub num_signals: usize,
}

impl EdfHeader {
    /// Header with blank identification fields, ready for `write_edf`.
    pub fn new(record_duration_s: f64, num_signals: usize) -> Self {
        Self {
            version: "0".into(),
            patient_id: String::new(),
            recording_id: String::new(),
            start_date: "01.01.00".into(),
            start_time: "00.00.00".into(),
            header_bytes: GLOBAL_HEADER_BYTES + SIGNAL_HEADER_BYTES * num_signals,
            reserved: String::new(),
            num_records: 0,
            record_duration_s,
            num_signals,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalHeader {
    pub label: String,
    pub transducer: String,
    pub physical_dim: String,
    pub physical_min: f64,
    pub physical_max: f64,
    pub digital_min: i32,
    pub digital_max: i32,
    pub prefiltering: String,
    pub samples_per_record: usize,
    pub reserved: String,
}

impl SignalHeader {
    pub fn new(
        label: impl Into<String>,
        physical: (f64, f64),
        digital: (i32, i32),
        samples_per_record: usize,
    ) -> Self {
        Self {
            label: label.into(),
            transducer: String::new(),
            physical_dim: "uV".into(),
            physical_min: physical.0,
            physical_max: physical.1,
            digital_min: digital.0,
            digital_max: digital.1,
            prefiltering: String::new(),
            samples_per_record,
            reserved: String::new(),
        }
    }

    pub fn is_annotation(&self) -> bool {
        self.label.trim() == ANNOTATION_LABEL
    }

    /// Physical units per digital step.
    pub fn gain(&self) -> f64 {
        (self.physical_max - self.physical_min) / f64::from(self.digital_max - self.digital_min)
    }

    fn validate(&self) -> Result<(), EdfError> {
        if self.digital_min >= self.digital_max {
            return Err(EdfError::DigitalRange {
                signal: self.label.clone(),
                min: self.digital_min,
                max: self.digital_max,
            });
        }
        if self.physical_min == self.physical_max {
            return Err(EdfError::PhysicalRange {
                signal: self.label.clone(),
                value: self.physical_min,
            });
        }
        if self.samples_per_record == 0 {
            return Err(EdfError::InvalidHeader(format!(
                "signal {}: samples_per_record must be at least 1",
                self.label
            )));
        }
        if self.digital_min < i32::from(i16::MIN) || self.digital_max > i32::from(i16::MAX) {
            return Err(EdfError::InvalidHeader(format!(
                "signal {}: digital range [{}, {}] exceeds 16 bits",
                self.label, self.digital_min, self.digital_max
            )));
        }
        Ok(())
    }
}

/// Affine EDF calibration from a digital sample to physical units.
pub fn digital_to_physical(d: i32, cal: &SignalHeader) -> f64 {
    cal.physical_min + f64::from(d - cal.digital_min) * cal.gain()
}

/// Inverse of [`digital_to_physical`], rounded to the nearest integer step.
pub fn physical_to_digital(p: f64, cal: &SignalHeader) -> Result<i16, EdfError> {
    let d = f64::from(cal.digital_min) + (p - cal.physical_min) / cal.gain();
    let rounded = d.round();
    if !rounded.is_finite()
        || rounded < f64::from(cal.digital_min)
        || rounded > f64::from(cal.digital_max)
    {
        let (min, max) = if cal.physical_min < cal.physical_max {
            (cal.physical_min, cal.physical_max)
        } else {
            (cal.physical_max, cal.physical_min)
        };
        return Err(EdfError::OutOfRange {
            signal: cal.label.clone(),
            value: p,
            min,
            max,
        });
    }
    Ok(rounded as i16)
}

/// One signal's physical samples and rate, as returned by channel lookup.
#[derive(Debug, Clone, Copy)]
pub struct Channel<'a> {
    pub label: &'a str,
    pub samples: &'a [f64],
    pub sample_rate: f64,
}

/// A parsed EDF file. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct EdfRecording {
    pub header: EdfHeader,
    pub signals: Vec<SignalHeader>,
    digital: Vec<Vec<i16>>,
    physical: Vec<Vec<f64>>,
}

impl EdfRecording {
    /// Builds a recording from raw digital samples. `header.num_records`,
    /// `num_signals` and `header_bytes` are derived from the data.
    pub fn from_digital(
        mut header: EdfHeader,
        signals: Vec<SignalHeader>,
        digital: Vec<Vec<i16>>,
    ) -> Result<Self, EdfError> {
        if signals.is_empty() {
            return Err(EdfError::InvalidHeader("recording has no signals".into()));
        }
        if signals.len() != digital.len() {
            return Err(EdfError::InvalidHeader(format!(
                "{} signal headers but {} sample vectors",
                signals.len(),
                digital.len()
            )));
        }
        if !(header.record_duration_s > 0.0) {
            return Err(EdfError::InvalidHeader(format!(
                "record duration must be positive, got {}",
                header.record_duration_s
            )));
        }
        for s in &signals {
            s.validate()?;
        }
        let num_records = digital[0].len() / signals[0].samples_per_record;
        for (s, d) in signals.iter().zip(&digital) {
            let expected = num_records * s.samples_per_record;
            if d.len() != expected {
                return Err(EdfError::SampleCount {
                    signal: s.label.clone(),
                    expected,
                    actual: d.len(),
                });
            }
        }
        header.num_signals = signals.len();
        header.header_bytes = GLOBAL_HEADER_BYTES + SIGNAL_HEADER_BYTES * signals.len();
        header.num_records = num_records as i64;
        let physical = signals
            .iter()
            .zip(&digital)
            .map(|(s, d)| {
                d.iter()
                    .map(|&v| digital_to_physical(i32::from(v), s))
                    .collect()
            })
            .collect();
        Ok(Self {
            header,
            signals,
            digital,
            physical,
        })
    }

    /// Builds a recording from physical values, quantizing through each
    /// signal's calibration.
    pub fn from_physical(
        header: EdfHeader,
        signals: Vec<SignalHeader>,
        physical: &[Vec<f64>],
    ) -> Result<Self, EdfError> {
        for s in &signals {
            s.validate()?;
        }
        let digital = signals
            .iter()
            .zip(physical)
            .map(|(s, p)| {
                p.iter()
                    .map(|&v| physical_to_digital(v, s))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_digital(header, signals, digital)
    }

    pub fn num_records(&self) -> usize {
        self.header.num_records.max(0) as usize
    }

    pub fn sample_rate(&self, signal: usize) -> f64 {
        self.signals[signal].samples_per_record as f64 / self.header.record_duration_s
    }

    pub fn duration_s(&self) -> f64 {
        self.num_records() as f64 * self.header.record_duration_s
    }

    pub fn digital_samples(&self, signal: usize) -> &[i16] {
        &self.digital[signal]
    }

    /// Samples in physical units (usually µV).
    pub fn physical_samples(&self, signal: usize) -> &[f64] {
        &self.physical[signal]
    }

    /// Labels of waveform signals, annotation signals excluded.
    pub fn channel_labels(&self) -> Vec<String> {
        self.signals
            .iter()
            .filter(|s| !s.is_annotation())
            .map(|s| s.label.trim().to_string())
            .collect()
    }

    /// Looks up a waveform signal by label, ignoring surrounding whitespace.
    pub fn select_channel(&self, label: &str) -> Result<Channel<'_>, EdfError> {
        let wanted = label.trim();
        let mut hits = self
            .signals
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_annotation() && s.label.trim() == wanted);
        let Some((idx, sig)) = hits.next() else {
            return Err(EdfError::UnknownChannel {
                label: wanted.to_string(),
                available: self.channel_labels(),
            });
        };
        if hits.next().is_some() {
            return Err(EdfError::AmbiguousChannel(wanted.to_string()));
        }
        Ok(Channel {
            label: sig.label.trim(),
            samples: &self.physical[idx],
            sample_rate: self.sample_rate(idx),
        })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, width: usize, field: &str) -> Result<&'a str, EdfError> {
        let raw = &self.bytes[self.pos..self.pos + width];
        self.pos += width;
        if !raw.is_ascii() {
            return Err(EdfError::NonAscii {
                field: field.to_string(),
            });
        }
        // ASCII was checked above
        Ok(std::str::from_utf8(raw).unwrap())
    }

    fn text(&mut self, width: usize, field: &str) -> Result<String, EdfError> {
        Ok(self.take(width, field)?.trim_end().to_string())
    }

    fn number<T: std::str::FromStr>(&mut self, width: usize, field: &str) -> Result<T, EdfError> {
        let raw = self.take(width, field)?;
        parse_number(raw, field)
    }
}

fn parse_number<T: std::str::FromStr>(raw: &str, field: &str) -> Result<T, EdfError> {
    raw.trim().parse().map_err(|_| EdfError::InvalidNumber {
        field: field.to_string(),
        value: raw.to_string(),
    })
}

/// Parses a complete EDF/EDF+ file held in memory.
pub fn parse_edf(bytes: &[u8]) -> Result<EdfRecording, EdfError> {
    if bytes.len() < GLOBAL_HEADER_BYTES {
        return Err(EdfError::TooShort(bytes.len()));
    }
    let mut cur = Cursor { bytes, pos: 0 };
    let version = cur.text(W_VERSION, "version")?;
    let patient_id = cur.text(W_PATIENT, "patient_id")?;
    let recording_id = cur.text(W_RECORDING, "recording_id")?;
    let start_date = cur.text(W_START_DATE, "start_date")?;
    let start_time = cur.text(W_START_TIME, "start_time")?;
    let header_bytes: usize = cur.number(W_HEADER_BYTES, "header_bytes")?;
    let reserved = cur.text(W_RESERVED, "reserved")?;
    let raw_records = cur.take(W_NUM_RECORDS, "num_records")?;
    let declared_records: i64 = if raw_records.trim().is_empty() {
        -1
    } else {
        parse_number(raw_records, "num_records")?
    };
    let record_duration_s: f64 = cur.number(W_DURATION, "record_duration")?;
    let num_signals: usize = cur.number(W_NUM_SIGNALS, "num_signals")?;

    if num_signals == 0 {
        return Err(EdfError::InvalidHeader(
            "num_signals must be at least 1".into(),
        ));
    }
    if !(record_duration_s > 0.0) {
        return Err(EdfError::InvalidHeader(format!(
            "record duration must be positive, got {record_duration_s}"
        )));
    }
    if header_bytes != GLOBAL_HEADER_BYTES + SIGNAL_HEADER_BYTES * num_signals {
        return Err(EdfError::HeaderSize {
            declared: header_bytes,
            num_signals,
        });
    }
    if bytes.len() < header_bytes {
        return Err(EdfError::Truncated {
            expected: header_bytes,
            actual: bytes.len(),
        });
    }

    let ns = num_signals;
    let texts = |cur: &mut Cursor, w, f| -> Result<Vec<String>, EdfError> {
        (0..ns).map(|_| cur.text(w, f)).collect()
    };
    let labels = texts(&mut cur, W_LABEL, "label")?;
    let transducers = texts(&mut cur, W_TRANSDUCER, "transducer")?;
    let dims = texts(&mut cur, W_PHYS_DIM, "physical_dim")?;
    let phys_min: Vec<f64> = (0..ns)
        .map(|_| cur.number(W_PHYS_MIN, "physical_min"))
        .collect::<Result<_, _>>()?;
    let phys_max: Vec<f64> = (0..ns)
        .map(|_| cur.number(W_PHYS_MAX, "physical_max"))
        .collect::<Result<_, _>>()?;
    let dig_min: Vec<i32> = (0..ns)
        .map(|_| cur.number(W_DIG_MIN, "digital_min"))
        .collect::<Result<_, _>>()?;
    let dig_max: Vec<i32> = (0..ns)
        .map(|_| cur.number(W_DIG_MAX, "digital_max"))
        .collect::<Result<_, _>>()?;
    let prefilters = texts(&mut cur, W_PREFILTER, "prefiltering")?;
    let spr: Vec<usize> = (0..ns)
        .map(|_| cur.number(W_SAMPLES, "samples_per_record"))
        .collect::<Result<_, _>>()?;
    let sig_reserved = texts(&mut cur, W_SIG_RESERVED, "signal_reserved")?;

    let signals: Vec<SignalHeader> = (0..ns)
        .map(|i| SignalHeader {
            label: labels[i].clone(),
            transducer: transducers[i].clone(),
            physical_dim: dims[i].clone(),
            physical_min: phys_min[i],
            physical_max: phys_max[i],
            digital_min: dig_min[i],
            digital_max: dig_max[i],
            prefiltering: prefilters[i].clone(),
            samples_per_record: spr[i],
            reserved: sig_reserved[i].clone(),
        })
        .collect();
    for s in &signals {
        s.validate()?;
    }

    let record_bytes: usize = 2 * signals.iter().map(|s| s.samples_per_record).sum::<usize>();
    let data = &bytes[header_bytes..];
    let num_records = if declared_records < 0 {
        if !data.len().is_multiple_of(record_bytes) {
            return Err(EdfError::Truncated {
                expected: header_bytes + (data.len() / record_bytes + 1) * record_bytes,
                actual: bytes.len(),
            });
        }
        data.len() / record_bytes
    } else {
        declared_records as usize
    };
    let expected = header_bytes + num_records * record_bytes;
    if bytes.len() != expected {
        return Err(EdfError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }

    let mut digital: Vec<Vec<i16>> = signals
        .iter()
        .map(|s| Vec::with_capacity(num_records * s.samples_per_record))
        .collect();
    for record in data.chunks_exact(record_bytes) {
        let mut offset = 0;
        for (s, out) in signals.iter().zip(digital.iter_mut()) {
            let chunk = &record[offset..offset + 2 * s.samples_per_record];
            out.extend(
                chunk
                    .chunks_exact(2)
                    .map(|b| i16::from_le_bytes([b[0], b[1]])),
            );
            offset += 2 * s.samples_per_record;
        }
    }

    let header = EdfHeader {
        version,
        patient_id,
        recording_id,
        start_date,
        start_time,
        header_bytes,
        reserved,
        num_records: num_records as i64,
        record_duration_s,
        num_signals,
    };
    EdfRecording::from_digital(header, signals, digital)
}

fn put_text(out: &mut Vec<u8>, value: &str, width: usize, field: &str) -> Result<(), EdfError> {
    if !value.is_ascii() {
        return Err(EdfError::NonAscii {
            field: field.to_string(),
        });
    }
    if value.len() > width {
        return Err(EdfError::FieldOverflow {
            field: field.to_string(),
            width,
            value: value.to_string(),
        });
    }
    out.extend_from_slice(value.as_bytes());
    out.extend(std::iter::repeat_n(b' ', width - value.len()));
    Ok(())
}

/// Shortest decimal text for `v` that fits in `width` characters.
fn format_decimal(v: f64, width: usize, field: &str) -> Result<String, EdfError> {
    let full = format!("{v}");
    if full.len() <= width {
        return Ok(full);
    }
    for decimals in (0..width).rev() {
        let s = format!("{v:.decimals$}");
        if s.len() <= width {
            return Ok(s);
        }
    }
    Err(EdfError::FieldOverflow {
        field: field.to_string(),
        width,
        value: full,
    })
}

/// Serializes a recording. Samples are written from the stored digital
/// values, so `parse_edf(write_edf(r))` reproduces them exactly.
pub fn write_edf(recording: &EdfRecording) -> Result<Vec<u8>, EdfError> {
    let h = &recording.header;
    let sigs = &recording.signals;
    if sigs.is_empty() {
        return Err(EdfError::InvalidHeader("recording has no signals".into()));
    }
    let header_bytes = GLOBAL_HEADER_BYTES + SIGNAL_HEADER_BYTES * sigs.len();
    let num_records = recording.num_records();
    let record_samples: usize = sigs.iter().map(|s| s.samples_per_record).sum();
    let mut out = Vec::with_capacity(header_bytes + 2 * num_records * record_samples);

    put_text(&mut out, &h.version, W_VERSION, "version")?;
    put_text(&mut out, &h.patient_id, W_PATIENT, "patient_id")?;
    put_text(&mut out, &h.recording_id, W_RECORDING, "recording_id")?;
    put_text(&mut out, &h.start_date, W_START_DATE, "start_date")?;
    put_text(&mut out, &h.start_time, W_START_TIME, "start_time")?;
    put_text(
        &mut out,
        &header_bytes.to_string(),
        W_HEADER_BYTES,
        "header_bytes",
    )?;
    put_text(&mut out, &h.reserved, W_RESERVED, "reserved")?;
    put_text(
        &mut out,
        &num_records.to_string(),
        W_NUM_RECORDS,
        "num_records",
    )?;
    let duration = format_decimal(h.record_duration_s, W_DURATION, "record_duration")?;
    put_text(&mut out, &duration, W_DURATION, "record_duration")?;
    put_text(
        &mut out,
        &sigs.len().to_string(),
        W_NUM_SIGNALS,
        "num_signals",
    )?;

    for s in sigs {
        s.validate()?;
        put_text(&mut out, &s.label, W_LABEL, "label")?;
    }
    for s in sigs {
        put_text(&mut out, &s.transducer, W_TRANSDUCER, "transducer")?;
    }
    for s in sigs {
        put_text(&mut out, &s.physical_dim, W_PHYS_DIM, "physical_dim")?;
    }
    for s in sigs {
        let v = format_decimal(s.physical_min, W_PHYS_MIN, "physical_min")?;
        put_text(&mut out, &v, W_PHYS_MIN, "physical_min")?;
    }
    for s in sigs {
        let v = format_decimal(s.physical_max, W_PHYS_MAX, "physical_max")?;
        put_text(&mut out, &v, W_PHYS_MAX, "physical_max")?;
    }
    for s in sigs {
        put_text(
            &mut out,
            &s.digital_min.to_string(),
            W_DIG_MIN,
            "digital_min",
        )?;
    }
    for s in sigs {
        put_text(
            &mut out,
            &s.digital_max.to_string(),
            W_DIG_MAX,
            "digital_max",
        )?;
    }
    for s in sigs {
        put_text(&mut out, &s.prefiltering, W_PREFILTER, "prefiltering")?;
    }
    for s in sigs {
        let v = s.samples_per_record.to_string();
        put_text(&mut out, &v, W_SAMPLES, "samples_per_record")?;
    }
    for s in sigs {
        put_text(&mut out, &s.reserved, W_SIG_RESERVED, "signal_reserved")?;
    }
    debug_assert_eq!(out.len(), header_bytes);

    for r in 0..num_records {
        for (i, s) in sigs.iter().enumerate() {
            let spr = s.samples_per_record;
            for &v in &recording.digital[i][r * spr..(r + 1) * spr] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}
