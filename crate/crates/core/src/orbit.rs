//! Per-class value tables and orbit statistics: counting entropy,
//! intersection, equilibrium weights and periodic-orbit shells.

use std::io::{self, Write};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::functional::LengthFunctional;
use crate::group::ConjClass;
use crate::stats::{fit_line, kahan_sum, log_sum_exp, KahanSum};

/// Relative slack when comparing values against thresholds, so that counts
/// at `c*T` for the functional `c*f` match counts at `T` for `f`.
const THRESHOLD_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub label: String,
    pub values: Vec<f64>,
    /// Every class with value at most this is present in the table.
    pub complete_to: f64,
    /// Lower envelope `value >= slope * len - offset` over the table.
    pub envelope_slope: f64,
    pub envelope_offset: f64,
}

#[derive(Debug, Clone)]
pub struct OrbitTable {
    classes: Arc<Vec<ConjClass>>,
    max_len: usize,
    columns: Vec<Column>,
}

/// Lower envelope of `(len, value)` data: least-squares slope through the
/// per-length minima, shifted down until it lies below every point.
fn lower_envelope(classes: &[ConjClass], values: &[f64], max_len: usize) -> (f64, f64, f64) {
    let mut minima = vec![f64::INFINITY; max_len + 1];
    for (c, &v) in classes.iter().zip(values) {
        let l = c.length();
        minima[l] = minima[l].min(v);
    }
    let pts: Vec<(f64, f64)> =
        minima.iter().enumerate().filter(|(_, m)| m.is_finite()).map(|(l, &m)| (l as f64, m)).collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let slope = match fit_line(&xs, &ys) {
        Some(fit) if fit.slope > 0.0 => fit.slope,
        _ => return (0.0, f64::INFINITY, 0.0),
    };
    let offset = pts.iter().map(|(l, m)| slope * l - m).fold(0.0, f64::max);
    let complete = (slope * max_len as f64 - offset).min(minima[max_len]).max(0.0);
    (slope, offset, complete)
}

impl OrbitTable {
    /// An empty table over `classes`, which must contain every class of
    /// length at most the largest length present.
    pub fn new(classes: Vec<ConjClass>) -> Self {
        let max_len = classes.iter().map(|c| c.length()).max().unwrap_or(0);
        OrbitTable { classes: Arc::new(classes), max_len, columns: Vec::new() }
    }

    pub fn classes(&self) -> &[ConjClass] {
        &self.classes
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    pub fn values(&self, i: usize) -> &[f64] {
        &self.columns[i].values
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.label == label)
    }

    pub fn add_functional(&mut self, f: &LengthFunctional) -> Result<usize> {
        let values = f.values(&self.classes)?;
        self.add_values(f.label(), values)
    }

    /// Adds a column of precomputed values, one per class.
    pub fn add_values(&mut self, label: impl Into<String>, values: Vec<f64>) -> Result<usize> {
        if values.len() != self.classes.len() {
            return Err(LabError::InvalidArgument(format!(
                "{} values for {} classes",
                values.len(),
                self.classes.len()
            )));
        }
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(LabError::PositivityViolation { class: self.classes[i].to_string(), value: v });
        }
        let (slope, offset, complete_to) = lower_envelope(&self.classes, &values, self.max_len);
        self.columns.push(Column {
            label: label.into(),
            values,
            complete_to,
            envelope_slope: slope,
            envelope_offset: offset,
        });
        Ok(self.columns.len() - 1)
    }

    /// The same table restricted to classes of length at most `max_len`.
    pub fn truncate(&self, max_len: usize) -> OrbitTable {
        let keep: Vec<usize> = (0..self.classes.len()).filter(|&i| self.classes[i].length() <= max_len).collect();
        let classes: Vec<ConjClass> = keep.iter().map(|&i| self.classes[i].clone()).collect();
        let mut t = OrbitTable::new(classes);
        for col in &self.columns {
            let values = keep.iter().map(|&i| col.values[i]).collect();
            t.add_values(col.label.clone(), values).expect("subset of a valid column");
        }
        t
    }

    /// `#R_T`: classes with value at most `t`.
    pub fn count(&self, col: usize, t: f64, primitive_only: bool) -> usize {
        let cut = t + THRESHOLD_SLACK * t.abs();
        self.classes
            .iter()
            .zip(&self.columns[col].values)
            .filter(|(c, &v)| v <= cut && (!primitive_only || c.is_primitive()))
            .count()
    }

    /// Class table as CSV: class, length, primitive, then one column per
    /// functional.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "class,length,primitive")?;
        for c in &self.columns {
            write!(w, ",{}", c.label)?;
        }
        writeln!(w)?;
        for (i, class) in self.classes.iter().enumerate() {
            write!(w, "{},{},{}", class, class.length(), class.is_primitive())?;
            for c in &self.columns {
                write!(w, ",{:.17e}", c.values[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn build_orbit_table(classes: Vec<ConjClass>, functionals: &[LengthFunctional]) -> Result<OrbitTable> {
    let mut t = OrbitTable::new(classes);
    for f in functionals {
        t.add_functional(f)?;
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy)]
pub struct EntropyOptions {
    pub thresholds: usize,
    pub min_classes: usize,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        EntropyOptions { thresholds: 32, min_classes: 100 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyEstimate {
    pub h: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    /// `(T, #R_T)` over primitive classes.
    pub counts: Vec<(f64, usize)>,
    /// Same fit with non-primitive classes included.
    pub h_all: f64,
    pub counts_all: Vec<(f64, usize)>,
}

impl EntropyEstimate {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "T,count,log_count")?;
        for &(t, n) in &self.counts {
            writeln!(w, "{t:.12},{n},{:.12}", (n as f64).ln())?;
        }
        Ok(())
    }
}

fn thresholds(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Slope of `log(T * N_T)` against `T`; the factor `T` removes the
/// polynomial prefactor of the prime orbit theorem.
fn counting_slope(counts: &[(f64, usize)]) -> Result<(f64, f64)> {
    if counts.iter().any(|c| c.1 == 0) {
        return Err(LabError::InsufficientData("empty threshold in the entropy window".into()));
    }
    let xs: Vec<f64> = counts.iter().map(|c| c.0).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.0 * c.1 as f64).ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or_else(|| LabError::InsufficientData("degenerate window".into()))?;
    Ok((fit.slope, fit.slope_stderr))
}

/// Entropy by counting, fitted over the top half of the complete range.
pub fn entropy_count(table: &OrbitTable, col: usize) -> Result<EntropyEstimate> {
    entropy_count_with(table, col, EntropyOptions::default())
}

pub fn entropy_count_with(table: &OrbitTable, col: usize, opts: EntropyOptions) -> Result<EntropyEstimate> {
    let hi = table.column(col).complete_to;
    let lo = hi / 2.0;
    if opts.thresholds < 8 || hi <= 0.0 {
        return Err(LabError::InsufficientData(format!(
            "complete range [0, {hi:.4}] of {} too short; increase max_len",
            table.column(col).label
        )));
    }
    let values = table.values(col);
    let in_window = table
        .classes()
        .iter()
        .zip(values)
        .filter(|(c, &v)| c.is_primitive() && v >= lo && v <= hi)
        .count();
    if in_window < opts.min_classes {
        return Err(LabError::InsufficientData(format!(
            "{in_window} primitive classes in entropy window [{lo:.4}, {hi:.4}], need {}; increase max_len",
            opts.min_classes
        )));
    }
    let ts = thresholds(lo, hi, opts.thresholds);
    let counts: Vec<(f64, usize)> = ts.iter().map(|&t| (t, table.count(col, t, true))).collect();
    let counts_all: Vec<(f64, usize)> = ts.iter().map(|&t| (t, table.count(col, t, false))).collect();
    let (h, stderr) = counting_slope(&counts)?;
    let (h_all, _) = counting_slope(&counts_all)?;
    Ok(EntropyEstimate { h, stderr, window: (lo, hi), counts, h_all, counts_all })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectionEstimate {
    /// `(T, I_T)`: average of `g/f` over primitive classes in `R_T(f)`.
    pub partial: Vec<(f64, f64)>,
    pub partial_all: Vec<(f64, f64)>,
    /// `I_T` at the largest complete threshold.
    pub extrapolated: f64,
    /// Fit `I_T = limit + slope / T` over the partial averages.
    pub trend_limit: f64,
    pub trend_slope: f64,
    pub h_f: f64,
    pub h_g: f64,
    pub j: f64,
}

impl IntersectionEstimate {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "T,I_T")?;
        for &(t, i) in &self.partial {
            writeln!(w, "{t:.12},{i:.15}")?;
        }
        Ok(())
    }
}

fn ratio_average(table: &OrbitTable, f: usize, g: usize, t: f64, primitive_only: bool) -> f64 {
    let cut = t + THRESHOLD_SLACK * t.abs();
    let (fv, gv) = (table.values(f), table.values(g));
    let mut sum = KahanSum::new();
    let mut n = 0usize;
    for (i, c) in table.classes().iter().enumerate() {
        if fv[i] <= cut && (!primitive_only || c.is_primitive()) {
            sum.add(gv[i] / fv[i]);
            n += 1;
        }
    }
    sum.value() / n as f64
}

pub fn intersection(table: &OrbitTable, f: usize, g: usize) -> Result<IntersectionEstimate> {
    let ef = entropy_count(table, f)?;
    let eg = entropy_count(table, g)?;
    let (lo, hi) = ef.window;
    let ts = thresholds(lo, hi, EntropyOptions::default().thresholds);
    let partial: Vec<(f64, f64)> = ts.iter().map(|&t| (t, ratio_average(table, f, g, t, true))).collect();
    let partial_all: Vec<(f64, f64)> = ts.iter().map(|&t| (t, ratio_average(table, f, g, t, false))).collect();
    let extrapolated = partial.last().map(|p| p.1).unwrap_or(f64::NAN);
    let inv: Vec<f64> = partial.iter().map(|p| 1.0 / p.0).collect();
    let ys: Vec<f64> = partial.iter().map(|p| p.1).collect();
    let (trend_limit, trend_slope) = match fit_line(&inv, &ys) {
        Some(fit) => (fit.intercept, fit.slope),
        None => (extrapolated, 0.0),
    };
    let j = if f == g { 1.0 } else { eg.h / ef.h * extrapolated };
    Ok(IntersectionEstimate {
        partial,
        partial_all,
        extrapolated,
        trend_limit,
        trend_slope,
        h_f: ef.h,
        h_g: eg.h,
        j,
    })
}

/// Normalized weights on the primitive classes of a shell.
#[derive(Debug, Clone, Serialize)]
pub struct WeightedOrbitMeasure {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub log_partition: f64,
    pub shell: (f64, f64),
}

impl WeightedOrbitMeasure {
    /// `sum w g / sum w f`.
    pub fn ratio(&self, f: &[f64], g: &[f64]) -> f64 {
        let num = kahan_sum(self.indices.iter().zip(&self.weights).map(|(&i, w)| w * g[i]));
        let den = kahan_sum(self.indices.iter().zip(&self.weights).map(|(&i, w)| w * f[i]));
        num / den
    }
}

/// Weights proportional to `exp(phi)` on primitive classes whose `base`
/// value lies in `[lo, hi]`.
pub fn equilibrium_weights(table: &OrbitTable, base: usize, phi: &[f64], lo: f64, hi: f64) -> Result<WeightedOrbitMeasure> {
    let values = table.values(base);
    let indices: Vec<usize> = (0..table.classes().len())
        .filter(|&i| table.classes()[i].is_primitive() && values[i] >= lo && values[i] <= hi)
        .collect();
    if indices.is_empty() {
        return Err(LabError::InsufficientData(format!("no classes in shell [{lo}, {hi}]")));
    }
    let exps: Vec<f64> = indices.iter().map(|&i| phi[i]).collect();
    let log_partition = log_sum_exp(&exps);
    let weights = exps.iter().map(|e| (e - log_partition).exp()).collect();
    Ok(WeightedOrbitMeasure { indices, weights, log_partition, shell: (lo, hi) })
}

/// `(1/T) sum w (g - r f)^2` with `r` the weighted mean rate of `g` per unit
/// of `f` and `T` the weighted mean period.
pub fn variance_estimate(measure: &WeightedOrbitMeasure, f: &[f64], g: &[f64]) -> Result<f64> {
    if measure.indices.is_empty() {
        return Err(LabError::InsufficientData("empty measure".into()));
    }
    let r = measure.ratio(f, g);
    let t = kahan_sum(measure.indices.iter().zip(&measure.weights).map(|(&i, w)| w * f[i]));
    let s = kahan_sum(measure.indices.iter().zip(&measure.weights).map(|(&i, w)| {
        let d = g[i] - r * f[i];
        w * d * d
    }));
    Ok(s / t)
}

/// `(1/T) log sum exp(g)` over primitive classes with base value at most `t`.
pub fn pressure_orbit_sum(table: &OrbitTable, base: usize, g: &[f64], t: f64) -> Result<f64> {
    let col = table.column(base);
    if t > col.complete_to * (1.0 + THRESHOLD_SLACK) || t <= 0.0 {
        return Err(LabError::InsufficientData(format!(
            "threshold {t} outside complete range [0, {}]",
            col.complete_to
        )));
    }
    let cut = t + THRESHOLD_SLACK * t;
    let exps: Vec<f64> = table
        .classes()
        .iter()
        .enumerate()
        .filter(|(i, c)| c.is_primitive() && col.values[*i] <= cut)
        .map(|(i, _)| g[i])
        .collect();
    if exps.is_empty() {
        return Err(LabError::InsufficientData("no classes below threshold".into()));
    }
    Ok(log_sum_exp(&exps) / t)
}

/// Periodic points of period `n` of the no-backtracking shift, grouped by
/// conjugacy class: each class of length `n` with root length `r` carries
/// `r` points.
#[derive(Debug, Clone)]
pub struct PeriodicShell {
    pub len: usize,
    pub indices: Vec<usize>,
    pub mult: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShellIntersection {
    pub h_f: f64,
    pub h_g: f64,
    pub i: f64,
    pub j: f64,
}

impl PeriodicShell {
    pub fn new(classes: &[ConjClass], n: usize) -> Result<Self> {
        let indices: Vec<usize> = (0..classes.len()).filter(|&i| classes[i].length() == n).collect();
        if indices.is_empty() {
            return Err(LabError::InsufficientData(format!("no classes of length {n}")));
        }
        let mult = indices.iter().map(|&i| classes[i].root_len() as f64).collect();
        Ok(PeriodicShell { len: n, indices, mult })
    }

    /// `log sum mult * exp(-s f)`.
    pub fn log_partition(&self, f: &[f64], s: f64) -> f64 {
        let e: Vec<f64> = self.indices.iter().zip(&self.mult).map(|(&i, m)| m.ln() - s * f[i]).collect();
        log_sum_exp(&e)
    }

    /// Root `h` of `sum mult * exp(-h f) = 1`, the period-`n` approximation
    /// of the entropy of the reparameterized flow.
    pub fn entropy(&self, f: &[f64]) -> Result<f64> {
        let fmin = self.indices.iter().map(|&i| f[i]).fold(f64::INFINITY, f64::min);
        if !(fmin > 0.0) {
            return Err(LabError::PositivityViolation { class: format!("length {} shell", self.len), value: fmin });
        }
        let z0 = self.log_partition(f, 0.0);
        // log Z(s) <= z0 - s fmin, so the root lies below z0 / fmin
        let (mut lo, mut hi) = (0.0, z0 / fmin);
        let mut s = z0 / (kahan_sum(self.indices.iter().zip(&self.mult).map(|(&i, m)| m * f[i]))
            / kahan_sum(self.mult.iter().copied()));
        for _ in 0..200 {
            if !(s > lo && s < hi) {
                s = 0.5 * (lo + hi);
            }
            let e: Vec<f64> = self.indices.iter().zip(&self.mult).map(|(&i, m)| m.ln() - s * f[i]).collect();
            let lz = log_sum_exp(&e);
            if lz > 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            // d log Z / ds = -<f> under the Gibbs weights
            let mean = kahan_sum(self.indices.iter().zip(&e).map(|(&i, x)| (x - lz).exp() * f[i]));
            let next = s + lz / mean;
            if lz == 0.0 || (next - s).abs() <= 1e-15 * s.abs() {
                return Ok(next.clamp(lo, hi));
            }
            s = next;
            if hi - lo <= 1e-15 * hi {
                return Ok(0.5 * (lo + hi));
            }
        }
        Err(LabError::NonConvergence(200))
    }

    /// Normalized weights `mult * exp(-h f)`.
    pub fn weights(&self, f: &[f64], h: f64) -> Vec<f64> {
        let lz = self.log_partition(f, h);
        self.indices.iter().zip(&self.mult).map(|(&i, m)| (m.ln() - h * f[i] - lz).exp()).collect()
    }

    /// Renormalized intersection on the shell. By Jensen's inequality the
    /// returned `j` is at least one, with equality iff `g` is proportional
    /// to `f` on the shell.
    pub fn intersection(&self, f: &[f64], g: &[f64]) -> Result<ShellIntersection> {
        let h_f = self.entropy(f)?;
        let h_g = self.entropy(g)?;
        let w = self.weights(f, h_f);
        let num = kahan_sum(self.indices.iter().zip(&w).map(|(&i, w)| w * g[i]));
        let den = kahan_sum(self.indices.iter().zip(&w).map(|(&i, w)| w * f[i]));
        let i = num / den;
        Ok(ShellIntersection { h_f, h_g, i, j: h_g / h_f * i })
    }

    /// `h sum w (fdot - r f)^2 / sum w f` with `r = sum w fdot / sum w f`:
    /// the second-order coefficient of the shell intersection along a
    /// deformation with first-order variation `fdot`.
    pub fn variance_form(&self, f: &[f64], fdot: &[f64]) -> Result<f64> {
        let h = self.entropy(f)?;
        let w = self.weights(f, h);
        let den = kahan_sum(self.indices.iter().zip(&w).map(|(&i, w)| w * f[i]));
        let r = kahan_sum(self.indices.iter().zip(&w).map(|(&i, w)| w * fdot[i])) / den;
        let s = kahan_sum(self.indices.iter().zip(&w).map(|(&i, w)| {
            let d = fdot[i] - r * f[i];
            w * d * d
        }));
        Ok(h * s / den)
    }
}
