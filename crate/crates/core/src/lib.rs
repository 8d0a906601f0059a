//! EEG drowsiness detection.
//!
//! Reads EDF recordings, cuts them into fixed-length epochs, measures alpha
//! and beta band power with an exact-length FFT, turns those powers into
//! arousal / valence / dominance features and scores each epoch with a
//! Mamdani fuzzy classifier whose input terms are placed by fuzzy C-means.
//!
//! ```no_run
//! use vigil::edf::parse_edf;
//! use vigil::features::ChannelMap;
//! use vigil::pipeline::{analyze, AnalysisOptions};
//!
//! let bytes = std::fs::read("SC4001E0-PSG.edf").unwrap();
//! let recording = parse_edf(&bytes).unwrap();
//! let report = analyze(&recording, &ChannelMap::sleep_edf(), &AnalysisOptions::default()).unwrap();
//! println!("mean DS {:?}", report.summary.mean_ds);
//! ```

// `!(x > 0.0)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod edf;
pub mod features;
pub mod fuzzy;
pub mod pipeline;
pub mod spectral;
