//! Heuristic certification of Anosov behavior over an enumerated set of
//! conjugacy classes.

use serde::Serialize;

use crate::error::LabError;
use crate::group::{are_coprime, ConjClass};
use crate::par;
use crate::rep::Representation;
use crate::spectral::SpectralData;
use crate::stats::fit_line;

/// Primitive classes up to this length enter the transversality margin.
/// Longer pairs such as (aaab, A) have fixed points that agree to several
/// symbols, and their pairings shrink geometrically without any failure.
const TRANSVERSALITY_LEN: usize = 2;
const MARGIN_FLOOR: f64 = 1e-10;
const SANDWICH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct ClassFailure {
    pub class: String,
    pub reason: String,
}

/// Outcome of [`certify_anosov`]. Failures are data, not errors.
#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub label: String,
    pub classes: usize,
    pub failures: Vec<ClassFailure>,
    pub failure_fraction: f64,
    /// `gap <= delta^len * e^c` over all proximal classes.
    pub delta: f64,
    pub delta_log_intercept: f64,
    /// `len/K - C <= log Lambda <= K len + C`.
    pub k_fit: f64,
    pub c_fit: f64,
    pub sandwich_violations: usize,
    pub max_violation: f64,
    /// Minimum of `|<phi_beta|v_alpha>|` over sampled coprime pairs.
    pub transversality_margin: f64,
    pub certified: bool,
}

/// Upper envelope `y <= slope * x + intercept` with the least-squares slope
/// through `(x, y)` points.
fn upper_envelope(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let slope = fit_line(&xs, &ys)?.slope;
    let intercept = points.iter().map(|(x, y)| y - slope * x).fold(f64::NEG_INFINITY, f64::max);
    Some((slope, intercept))
}

/// Per-length extreme values `(len, value)`.
fn per_length<F: Fn(f64, f64) -> f64>(data: &[(usize, f64)], pick: F) -> Vec<(f64, f64)> {
    let max_len = data.iter().map(|d| d.0).max().unwrap_or(0);
    let mut ext: Vec<Option<f64>> = vec![None; max_len + 1];
    for &(l, v) in data {
        ext[l] = Some(match ext[l] {
            Some(e) => pick(e, v),
            None => v,
        });
    }
    ext.into_iter().enumerate().filter_map(|(l, e)| e.map(|v| (l as f64, v))).collect()
}

/// Displacement constants `(K, C)` such that `len/K - C <= value <= K len + C`
/// on every supplied `(len, value)` pair, or `None` if some value is not
/// positive. `K` bounds the per-length rates `max/len` and `len/min`.
pub fn displacement_fit(data: &[(usize, f64)]) -> Option<(f64, f64)> {
    let hi = per_length(data, f64::max);
    let lo = per_length(data, f64::min);
    let rate_hi = hi.iter().filter(|p| p.0 > 0.0).map(|(l, v)| v / l).fold(0.0, f64::max);
    let rate_lo = lo.iter().filter(|p| p.0 > 0.0).map(|(l, v)| v / l).fold(f64::INFINITY, f64::min);
    if !(rate_lo > 0.0) || !rate_hi.is_finite() {
        return None;
    }
    let k = rate_hi.max(1.0 / rate_lo).max(1.0);
    let c = data
        .iter()
        .map(|&(l, v)| {
            let l = l as f64;
            (v - k * l).max(l / k - v)
        })
        .fold(0.0, f64::max);
    Some((k, c))
}

pub fn certify_anosov(rep: &Representation, classes: &[ConjClass]) -> CertificationReport {
    let results: Vec<Result<SpectralData, LabError>> = par::map(classes, |c| rep.spectral_data(c.rep()));
    let mut failures = Vec::new();
    let mut ok: Vec<(usize, &ConjClass, &SpectralData)> = Vec::new();
    for (c, r) in classes.iter().zip(&results) {
        match r {
            Ok(sd) if sd.log_radius > 0.0 => ok.push((c.length(), c, sd)),
            Ok(sd) => failures.push(ClassFailure {
                class: c.to_string(),
                reason: format!("non-positive log spectral radius {}", sd.log_radius),
            }),
            Err(e) => failures.push(ClassFailure { class: c.to_string(), reason: e.to_string() }),
        }
    }

    let gap_points: Vec<(f64, f64)> = ok.iter().map(|(l, _, sd)| (*l as f64, sd.log_gap)).collect();
    let (log_delta, delta_c) = upper_envelope(&gap_points).unwrap_or((f64::NAN, f64::NAN));

    let lengths: Vec<(usize, f64)> = ok.iter().map(|(l, _, sd)| (*l, sd.log_radius)).collect();
    // fit on the shorter classes, so the longest two lengths are a genuine check
    let max_len = lengths.iter().map(|d| d.0).max().unwrap_or(0);
    let fit_len = if max_len >= 4 { max_len - 2 } else { max_len };
    let train: Vec<(usize, f64)> = lengths.iter().copied().filter(|d| d.0 <= fit_len).collect();
    let (k_fit, c_fit) = displacement_fit(&train).unwrap_or((f64::INFINITY, f64::INFINITY));
    let mut violations = 0;
    let mut max_violation: f64 = 0.0;
    for &(l, v) in &lengths {
        let l = l as f64;
        let excess = (v - (k_fit * l + c_fit)).max(l / k_fit - c_fit - v);
        if excess > SANDWICH_TOL {
            violations += 1;
        }
        max_violation = max_violation.max(excess.max(0.0));
    }

    let sample: Vec<&(usize, &ConjClass, &SpectralData)> =
        ok.iter().filter(|(l, c, _)| c.is_primitive() && *l <= TRANSVERSALITY_LEN).collect();
    let mut margin = f64::INFINITY;
    for (_, ca, sa) in &sample {
        for (_, cb, sb) in &sample {
            if !matches!(are_coprime(ca.rep(), cb.rep()), Ok(true)) {
                continue;
            }
            let pairing = sb.repelling_covector.dot(&sa.attracting).abs();
            margin = margin.min(pairing);
        }
    }
    if !margin.is_finite() {
        margin = 0.0;
    }

    let delta = log_delta.exp();
    let certified = failures.is_empty()
        && delta < 1.0
        && k_fit.is_finite()
        && violations == 0
        && margin > MARGIN_FLOOR;
    CertificationReport {
        label: rep.label().to_string(),
        classes: classes.len(),
        failure_fraction: failures.len() as f64 / classes.len().max(1) as f64,
        failures,
        delta,
        delta_log_intercept: delta_c,
        k_fit,
        c_fit,
        sandwich_violations: violations,
        max_violation,
        transversality_margin: margin,
        certified,
    }
}
