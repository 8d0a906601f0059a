//! Mamdani classification of (arousal, valence, dominance) into a
//! drowsiness score on `[0, 1]`.
//!
//! Operators: min for AND, min implication, max aggregation, centroid
//! defuzzification over an evenly sampled output universe. Input terms are
//! placed per feature by 1-D fuzzy C-means over the recording's epochs.

pub mod fcm;
pub mod membership;
pub mod rules;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;

pub use fcm::{fcm_cluster, FcmError, FcmParams, FcmResult};
pub use membership::{MembershipFunction, Shape, Term};
pub use rules::{FuzzyRule, Input, RuleBase, RuleError};

/// Default number of samples over the output universe.
pub const DEFAULT_RESOLUTION: usize = 10_001;
/// Returned when the aggregate output set is empty.
pub const INDETERMINATE_DS: f64 = 0.5;

const UNIVERSE_PAD: f64 = 0.05;
const DEGENERATE_WIDTH: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("calibration needs exactly 3 clusters (S, M, L), got {0}")]
    ClusterCount(usize),
    #[error(transparent)]
    Fcm(#[from] FcmError),
    #[error("output resolution must be at least 2 samples")]
    Resolution,
}

/// A named variable with S/M/L terms over a bounded universe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticVariable {
    pub name: String,
    /// Indexed by [`Term::index`].
    pub terms: [MembershipFunction; 3],
    pub universe: (f64, f64),
}

impl LinguisticVariable {
    pub fn term(&self, t: Term) -> &MembershipFunction {
        &self.terms[t.index()]
    }

    pub fn degree(&self, t: Term, x: f64) -> f64 {
        self.term(t).degree(x)
    }

    /// Apex of each term, in S/M/L order.
    pub fn apexes(&self) -> [f64; 3] {
        self.terms.map(|mf| mf.b)
    }

    /// Terms from ascending apexes `s < m < l`; shoulders reach the universe
    /// edges.
    pub fn from_apexes(name: &str, apexes: [f64; 3], universe: (f64, f64)) -> Self {
        let [s, m, l] = apexes;
        Self {
            name: name.to_string(),
            terms: [
                MembershipFunction::left_shoulder(universe.0.min(s), s, m),
                MembershipFunction::triangle(s, m, l),
                MembershipFunction::right_shoulder(m, l, universe.1.max(l)),
            ],
            universe,
        }
    }

    /// Fixed output variable on `[0, 1]`.
    pub fn drowsiness() -> Self {
        Self {
            name: "DS".into(),
            terms: [
                MembershipFunction::triangle(0.0, 0.0, 0.5),
                MembershipFunction::triangle(0.0, 0.5, 1.0),
                MembershipFunction::triangle(0.5, 1.0, 1.0),
            ],
            universe: (0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CalibrationMethod {
    Fcm {
        iterations: usize,
        converged: bool,
    },
    /// Uniform partition of the observed range.
    Fallback {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedVariable {
    pub variable: LinguisticVariable,
    pub centers: [f64; 3],
    pub method: CalibrationMethod,
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let pad = UNIVERSE_PAD * (hi - lo);
    (lo - pad, hi + pad)
}

fn fallback(name: &str, values: &[f64], reason: String) -> CalibratedVariable {
    let (mut lo, mut hi) = if values.is_empty() {
        (0.0, 1.0)
    } else {
        values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            })
    };
    if hi - lo <= 0.0 {
        let mid = lo;
        lo = mid - DEGENERATE_WIDTH / 2.0;
        hi = mid + DEGENERATE_WIDTH / 2.0;
    }
    let centers = [lo, (lo + hi) / 2.0, hi];
    CalibratedVariable {
        variable: LinguisticVariable::from_apexes(name, centers, padded(lo, hi)),
        centers,
        method: CalibrationMethod::Fallback { reason },
    }
}

/// Places the S/M/L terms of one input from its epoch series.
pub fn calibrate_variable(
    name: &str,
    values: &[f64],
    params: &FcmParams,
) -> Result<CalibratedVariable, FuzzyError> {
    if params.clusters != 3 {
        return Err(FuzzyError::ClusterCount(params.clusters));
    }
    if values.len() < 3 {
        return Ok(fallback(
            name,
            values,
            format!("only {} defined values", values.len()),
        ));
    }
    let result = match fcm_cluster(values, params) {
        Ok(r) => r,
        Err(FcmError::TooFewDistinct { distinct, .. }) => {
            return Ok(fallback(
                name,
                values,
                format!("only {distinct} distinct values"),
            ))
        }
        Err(e) => return Err(e.into()),
    };
    let centers = [result.centers[0], result.centers[1], result.centers[2]];
    if !(centers[0] < centers[1] && centers[1] < centers[2]) {
        return Ok(fallback(name, values, "cluster centers coincide".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CalibratedVariable {
        variable: LinguisticVariable::from_apexes(name, centers, padded(lo, hi)),
        centers,
        method: CalibrationMethod::Fcm {
            iterations: result.iterations,
            converged: result.converged,
        },
    })
}

/// Calibrates A, V and D from the defined feature vectors of a recording.
pub fn calibrate(
    features: &[FeatureVector],
    params: &FcmParams,
) -> Result<[CalibratedVariable; 3], FuzzyError> {
    let series = |f: fn(&FeatureVector) -> f64| features.iter().map(f).collect::<Vec<_>>();
    Ok([
        calibrate_variable("A", &series(|f| f.arousal), params)?,
        calibrate_variable("V", &series(|f| f.valence), params)?,
        calibrate_variable("D", &series(|f| f.dominance), params)?,
    ])
}

/// Aggregated output fuzzy set sampled over the DS universe.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub xs: Vec<f64>,
    pub mu: Vec<f64>,
    /// Firing strength of each rule, in rule-base order.
    pub strengths: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defuzzified {
    pub ds: f64,
    pub indeterminate: bool,
}

/// Centroid of a sampled set, with trapezoid weights so the discrete sum
/// tracks `∫xµ / ∫µ` on the universe.
pub fn defuzzify(aggregate: &Aggregate) -> Defuzzified {
    let n = aggregate.xs.len();
    let mass: f64 = aggregate.mu.iter().sum();
    if n < 2 || !(mass >= 1e-12) {
        return Defuzzified {
            ds: INDETERMINATE_DS,
            indeterminate: true,
        };
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (&x, &m)) in aggregate.xs.iter().zip(&aggregate.mu).enumerate() {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        num += w * x * m;
        den += w * m;
    }
    Defuzzified {
        ds: num / den,
        indeterminate: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub ds: f64,
    pub indeterminate: bool,
    pub strengths: Vec<f64>,
}

/// Calibrated inputs, fixed output and rule base. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct FuzzySystem {
    inputs: [LinguisticVariable; 3],
    output: LinguisticVariable,
    rules: RuleBase,
    xs: Vec<f64>,
    /// Output term degrees at each sample, per term.
    term_samples: [Vec<f64>; 3],
}

impl FuzzySystem {
    pub fn new(inputs: [LinguisticVariable; 3], rules: RuleBase) -> Self {
        Self::with_resolution(inputs, rules, DEFAULT_RESOLUTION)
            .expect("default resolution is valid")
    }

    pub fn with_resolution(
        inputs: [LinguisticVariable; 3],
        rules: RuleBase,
        resolution: usize,
    ) -> Result<Self, FuzzyError> {
        if resolution < 2 {
            return Err(FuzzyError::Resolution);
        }
        let output = LinguisticVariable::drowsiness();
        let (lo, hi) = output.universe;
        let step = (hi - lo) / (resolution - 1) as f64;
        let xs: Vec<f64> = (0..resolution).map(|i| lo + step * i as f64).collect();
        let term_samples = Term::ALL.map(|t| xs.iter().map(|&x| output.degree(t, x)).collect());
        Ok(Self {
            inputs,
            output,
            rules,
            xs,
            term_samples,
        })
    }

    pub fn input(&self, var: Input) -> &LinguisticVariable {
        &self.inputs[var.index()]
    }

    pub fn output(&self) -> &LinguisticVariable {
        &self.output
    }

    pub fn rules(&self) -> &RuleBase {
        &self.rules
    }

    /// Firing strength of every rule for `x`.
    pub fn firing_strengths(&self, x: &FeatureVector) -> Vec<f64> {
        let value = |v: Input| match v {
            Input::A => x.arousal,
            Input::V => x.valence,
            Input::D => x.dominance,
        };
        self.rules
            .rules()
            .iter()
            .map(|r| {
                r.antecedent
                    .iter()
                    .map(|&(v, t)| self.input(v).degree(t, value(v)))
                    .fold(1.0, f64::min)
            })
            .collect()
    }

    pub fn infer(&self, x: &FeatureVector) -> Aggregate {
        let strengths = self.firing_strengths(x);
        // max over rules of min(strength, term) only depends on the largest
        // strength per consequent term
        let mut clip = [0.0f64; 3];
        for (r, s) in self.rules.rules().iter().zip(&strengths) {
            let c = &mut clip[r.consequent.index()];
            *c = c.max(*s);
        }
        let mu = (0..self.xs.len())
            .map(|i| {
                Term::ALL
                    .iter()
                    .map(|t| clip[t.index()].min(self.term_samples[t.index()][i]))
                    .fold(0.0, f64::max)
            })
            .collect();
        Aggregate {
            xs: self.xs.clone(),
            mu,
            strengths,
        }
    }

    pub fn classify(&self, x: &FeatureVector) -> Classification {
        let aggregate = self.infer(x);
        let out = defuzzify(&aggregate);
        Classification {
            ds: out.ds,
            indeterminate: out.indeterminate,
            strengths: aggregate.strengths,
        }
    }
}
