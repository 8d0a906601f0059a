//! One-dimensional fuzzy C-means.
//!
//! Alternates the membership update
//! `u_ik = 1 / Σ_j (d_ik / d_jk)^(2/(m-1))`
//! and the center update `v_i = Σ_k u_ik^m x_k / Σ_k u_ik^m` until no center
//! moves by more than `tol`. Centers are seeded at evenly spaced quantiles,
//! so a run is fully deterministic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FcmError {
    #[error("no points to cluster")]
    Empty,
    #[error("{clusters} clusters requested but only {distinct} distinct values")]
    TooFewDistinct { clusters: usize, distinct: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcmParams {
    pub clusters: usize,
    pub fuzzifier: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FcmParams {
    fn default() -> Self {
        Self {
            clusters: 3,
            fuzzifier: 2.0,
            tol: 1e-6,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcmResult {
    /// Ascending.
    pub centers: Vec<f64>,
    /// `memberships[k][i]`: degree of point k in cluster i.
    pub memberships: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    /// `Σ u^m d²` after each center update.
    pub objective: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn initial_centers(sorted: &[f64], distinct: &[f64], c: usize) -> Vec<f64> {
    let qs: Vec<f64> = (0..c)
        .map(|i| (2 * i + 1) as f64 / (2 * c) as f64)
        .collect();
    let centers: Vec<f64> = qs.iter().map(|&q| quantile(sorted, q)).collect();
    if centers.windows(2).all(|w| w[0] < w[1]) {
        centers
    } else {
        // Heavy ties collapse quantiles; spread over distinct values instead.
        qs.iter().map(|&q| quantile(distinct, q)).collect()
    }
}

fn update_memberships(points: &[f64], centers: &[f64], m: f64, out: &mut [Vec<f64>]) {
    let exponent = 2.0 / (m - 1.0);
    for (x, u) in points.iter().zip(out.iter_mut()) {
        let dist: Vec<f64> = centers.iter().map(|v| (x - v).abs()).collect();
        let zeros = dist.iter().filter(|&&d| d == 0.0).count();
        if zeros > 0 {
            let share = 1.0 / zeros as f64;
            for (ui, d) in u.iter_mut().zip(&dist) {
                *ui = if *d == 0.0 { share } else { 0.0 };
            }
            continue;
        }
        for (i, ui) in u.iter_mut().enumerate() {
            let s: f64 = dist.iter().map(|dj| (dist[i] / dj).powf(exponent)).sum();
            *ui = 1.0 / s;
        }
    }
}

fn update_centers(points: &[f64], memberships: &[Vec<f64>], m: f64, centers: &mut [f64]) {
    for (i, v) in centers.iter_mut().enumerate() {
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, u) in points.iter().zip(memberships) {
            let w = u[i].powf(m);
            num += w * x;
            den += w;
        }
        if den > 0.0 {
            *v = num / den;
        }
    }
}

/// `Σ_k Σ_i u_ik^m (x_k - v_i)²`
pub fn objective(points: &[f64], memberships: &[Vec<f64>], centers: &[f64], m: f64) -> f64 {
    points
        .iter()
        .zip(memberships)
        .map(|(x, u)| {
            u.iter()
                .zip(centers)
                .map(|(ui, v)| ui.powf(m) * (x - v).powi(2))
                .sum::<f64>()
        })
        .sum()
}

pub fn fcm_cluster(points: &[f64], params: &FcmParams) -> Result<FcmResult, FcmError> {
    let c = params.clusters;
    let m = params.fuzzifier;
    if points.is_empty() {
        return Err(FcmError::Empty);
    }
    if c == 0 {
        return Err(FcmError::InvalidParameter(
            "cluster count must be positive".into(),
        ));
    }
    if !(m > 1.0) {
        return Err(FcmError::InvalidParameter(format!(
            "fuzzifier {m} must exceed 1"
        )));
    }
    if !(params.tol > 0.0) || params.max_iter == 0 {
        return Err(FcmError::InvalidParameter(
            "tolerance and iteration limit must be positive".into(),
        ));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(FcmError::InvalidParameter("points must be finite".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if c > distinct.len() {
        return Err(FcmError::TooFewDistinct {
            clusters: c,
            distinct: distinct.len(),
        });
    }

    let mut centers = initial_centers(&sorted, &distinct, c);
    let mut memberships = vec![vec![0.0; c]; points.len()];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        update_memberships(points, &centers, m, &mut memberships);
        let previous = centers.clone();
        update_centers(points, &memberships, m, &mut centers);
        history.push(objective(points, &memberships, &centers, m));
        let shift = previous
            .iter()
            .zip(&centers)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if shift < params.tol {
            converged = true;
            break;
        }
    }
    update_memberships(points, &centers, m, &mut memberships);

    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| centers[i].total_cmp(&centers[j]));
    let centers = order.iter().map(|&i| centers[i]).collect();
    let memberships = memberships
        .into_iter()
        .map(|u| order.iter().map(|&i| u[i]).collect())
        .collect();
    Ok(FcmResult {
        centers,
        memberships,
        iterations,
        converged,
        objective: history,
    })
}
