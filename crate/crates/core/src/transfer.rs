//! Pressure and entropy through cylinder transfer matrices of the
//! no-backtracking shift.

use std::io::{self, Write};
use std::sync::Arc;

use nalgebra::{DVector, Vector2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::functional::LengthFunctional;
use crate::group::Letter;
use crate::kleinian::{attracting_vector, KleinianRep};
use crate::par;
use crate::rep::{Representation, ScaledMatrix};
use crate::spectral::dominant_eigendata;

pub const DEFAULT_CYLINDER_DEPTH: usize = 4;
pub const DEFAULT_FLAG_DEPTH: usize = 12;
pub const DEFAULT_STATE_BUDGET: usize = 4_000_000;
const POWER_TOL: f64 = 1e-13;
const POWER_MAX_STEPS: usize = 200_000;
/// Below this many states the matrix-vector product runs sequentially.
const PARALLEL_STATES: usize = 4096;

/// The no-backtracking shift on `2k` letters, coded by cylinders of
/// length `n`.
#[derive(Debug, Clone)]
pub struct SubshiftSpec {
    rank: usize,
    depth: usize,
    states: Vec<Vec<Letter>>,
    /// `succ[s * (2k - 1) + j]`, in letter order.
    succ: Vec<u32>,
}

impl SubshiftSpec {
    pub fn new(rank: usize, depth: usize) -> Result<Self> {
        Self::with_budget(rank, depth, DEFAULT_STATE_BUDGET)
    }

    pub fn with_budget(rank: usize, depth: usize, budget: usize) -> Result<Self> {
        if rank < 2 {
            return Err(LabError::InvalidArgument(format!("rank {rank} < 2")));
        }
        if depth < 1 {
            return Err(LabError::InvalidArgument("cylinder depth must be at least 1".into()));
        }
        let a = 2 * rank;
        let count = (a as f64) * ((a - 1) as f64).powi(depth as i32 - 1);
        if count > budget as f64 {
            return Err(LabError::ResourceLimit(format!(
                "{count} cylinder states exceed budget {budget}"
            )));
        }
        let mut states: Vec<Vec<Letter>> = (0..a as u8).map(|c| vec![Letter::from_code(c)]).collect();
        for _ in 1..depth {
            let mut next = Vec::with_capacity(states.len() * (a - 1));
            for s in &states {
                let last = *s.last().unwrap();
                for c in 0..a as u8 {
                    let l = Letter::from_code(c);
                    if !l.cancels(last) {
                        let mut t = s.clone();
                        t.push(l);
                        next.push(t);
                    }
                }
            }
            states = next;
        }
        let mut spec = SubshiftSpec { rank, depth, states, succ: Vec::new() };
        let mut succ = Vec::with_capacity(spec.states.len() * (a - 1));
        for s in &spec.states {
            let last = *s.last().unwrap();
            for c in 0..a as u8 {
                let l = Letter::from_code(c);
                if !l.cancels(last) {
                    let mut t: Vec<Letter> = s[1..].to_vec();
                    t.push(l);
                    succ.push(spec.index(&t) as u32);
                }
            }
        }
        spec.succ = succ;
        Ok(spec)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn out_degree(&self) -> usize {
        2 * self.rank - 1
    }

    pub fn state(&self, i: usize) -> &[Letter] {
        &self.states[i]
    }

    pub fn successor(&self, s: usize, j: usize) -> usize {
        self.succ[s * self.out_degree() + j] as usize
    }

    /// Position of a reduced word of length `depth` in lexicographic order.
    pub fn index(&self, w: &[Letter]) -> usize {
        let d = self.out_degree();
        let mut idx = w[0].code() as usize;
        for k in 1..w.len() {
            let c = w[k].code();
            let skip = w[k - 1].inverse().code();
            let rel = if c > skip { c - 1 } else { c } as usize;
            idx = idx * d + rel;
        }
        idx
    }

    /// The word of length `depth + 1` labelling transition `(s, j)`.
    pub fn transition_word(&self, s: usize, j: usize) -> Vec<Letter> {
        let mut w = self.states[s].clone();
        w.push(*self.states[self.successor(s, j)].last().unwrap());
        w
    }
}

/// An eventually periodic one-sided sequence `prefix cycle cycle ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePoint {
    pub prefix: Vec<Letter>,
    pub cycle: Vec<Letter>,
}

impl SamplePoint {
    /// Periodic extension of a cyclically reduced word, otherwise the word
    /// followed by its last letter repeated.
    pub fn for_word(w: &[Letter]) -> Self {
        let first = w[0];
        let last = *w.last().unwrap();
        if w.len() > 1 && !last.cancels(first) {
            SamplePoint { prefix: Vec::new(), cycle: w.to_vec() }
        } else {
            SamplePoint { prefix: w.to_vec(), cycle: vec![last] }
        }
    }

    pub fn at(&self, i: usize) -> Letter {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }
}

/// A roof function on the shift, evaluated at sample points.
pub trait Cocycle: Send + Sync {
    fn weight(&self, x: &SamplePoint) -> Result<f64>;
}

/// Roof identically one.
#[derive(Debug, Clone, Copy)]
pub struct WordLengthCocycle;

impl Cocycle for WordLengthCocycle {
    fn weight(&self, _: &SamplePoint) -> Result<f64> {
        Ok(1.0)
    }
}

/// `c * inner`.
pub struct ScaledCocycle(pub f64, pub Box<dyn Cocycle>);

impl Cocycle for ScaledCocycle {
    fn weight(&self, x: &SamplePoint) -> Result<f64> {
        Ok(self.0 * self.1.weight(x)?)
    }
}

/// `c(x) = log |rho(x_0) u(sigma x)|` with `u(y)` the unit vector on the
/// approximate limit line `rho(y_0 ... y_{N-1}) e+(y_N)`.
pub struct LineCocycle {
    rep: Arc<Representation>,
    flag_depth: usize,
    attracting: Vec<DVector<f64>>,
}

impl LineCocycle {
    pub fn new(rep: Arc<Representation>, flag_depth: usize) -> Result<Self> {
        let attracting = (0..2 * rep.rank() as u8)
            .map(|c| {
                let m = rep.image(Letter::from_code(c)).clone();
                let sm = ScaledMatrix::from_matrix(m).ok_or_else(|| LabError::SingularProduct("generator".into()))?;
                Ok(dominant_eigendata(&sm)?.attracting)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LineCocycle { rep, flag_depth, attracting })
    }

    /// Unit vector approximating the limit line of `x`.
    pub fn limit_line(&self, x: &SamplePoint, offset: usize) -> DVector<f64> {
        let mut v = self.attracting[x.at(offset + self.flag_depth).code() as usize].clone();
        for i in (0..self.flag_depth).rev() {
            v = self.rep.image(x.at(offset + i)) * v;
            v /= v.norm();
        }
        v
    }
}

impl Cocycle for LineCocycle {
    fn weight(&self, x: &SamplePoint) -> Result<f64> {
        let u = self.limit_line(x, 1);
        let n = (self.rep.image(x.at(0)) * u).norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(LabError::SingularProduct("cocycle weight".into()));
        }
        Ok(n.ln())
    }
}

/// Complex version of [`LineCocycle`] for hyperbolic translation length:
/// `2 log |g(x_0) u(sigma x)|`.
pub struct ComplexLineCocycle {
    rep: Arc<KleinianRep>,
    flag_depth: usize,
    attracting: Vec<Vector2<Complex64>>,
}

impl ComplexLineCocycle {
    pub fn new(rep: Arc<KleinianRep>, flag_depth: usize) -> Result<Self> {
        let attracting = (0..2 * rep.rank() as u8)
            .map(|c| attracting_vector(rep.image(Letter::from_code(c))))
            .collect::<Result<Vec<_>>>()?;
        Ok(ComplexLineCocycle { rep, flag_depth, attracting })
    }
}

impl Cocycle for ComplexLineCocycle {
    fn weight(&self, x: &SamplePoint) -> Result<f64> {
        let mut v = self.attracting[x.at(1 + self.flag_depth).code() as usize];
        for i in (1..=self.flag_depth).rev() {
            v = self.rep.image(x.at(i)) * v;
            v /= Complex64::new(v.norm(), 0.0);
        }
        let n = (self.rep.image(x.at(0)) * v).norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(LabError::SingularProduct("cocycle weight".into()));
        }
        Ok(2.0 * n.ln())
    }
}

/// The cocycle whose periodic sums approximate `f`.
pub fn cocycle_for(f: &LengthFunctional, flag_depth: usize) -> Result<Box<dyn Cocycle>> {
    Ok(match f {
        LengthFunctional::WordLength => Box::new(WordLengthCocycle),
        LengthFunctional::LogSpectralRadius(rep) => Box::new(LineCocycle::new(rep.clone(), flag_depth)?),
        LengthFunctional::TranslationLength(rep) => Box::new(ComplexLineCocycle::new(rep.clone(), flag_depth)?),
        LengthFunctional::Scaled(c, inner) => Box::new(ScaledCocycle(*c, cocycle_for(inner, flag_depth)?)),
    })
}

/// Weight of transition `(s, j)`, sampled at the extension of its word.
pub fn one_step_weight(spec: &SubshiftSpec, cocycle: &dyn Cocycle, s: usize, j: usize) -> Result<f64> {
    cocycle.weight(&SamplePoint::for_word(&spec.transition_word(s, j)))
}

/// Birkhoff sum of the cocycle over the periodic orbit of a cyclically
/// reduced word.
pub fn periodic_sum(cocycle: &dyn Cocycle, w: &[Letter]) -> Result<f64> {
    let mut sum = 0.0;
    for i in 0..w.len() {
        let mut rot = w[i..].to_vec();
        rot.extend_from_slice(&w[..i]);
        sum += cocycle.weight(&SamplePoint { prefix: Vec::new(), cycle: rot })?;
    }
    Ok(sum)
}

/// Transfer matrix with entries `exp(-s c)`, stored as transition weights.
pub struct TransferOperator {
    spec: SubshiftSpec,
    weights: Vec<f64>,
}

impl TransferOperator {
    pub fn new(spec: SubshiftSpec, cocycle: &dyn Cocycle) -> Result<Self> {
        let d = spec.out_degree();
        let weights = par::try_map_range(spec.state_count() * d, |k| one_step_weight(&spec, cocycle, k / d, k % d))?;
        Ok(TransferOperator { spec, weights })
    }

    pub fn spec(&self) -> &SubshiftSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Spread between the largest and smallest weight leaving each state,
    /// maximized over states.
    pub fn weight_oscillation(&self) -> f64 {
        let d = self.spec.out_degree();
        self.weights
            .chunks(d)
            .map(|c| {
                let (lo, hi) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    fn apply(&self, entries: &[f64], v: &[f64]) -> Vec<f64> {
        let d = self.spec.out_degree();
        let row = |s: usize| {
            let mut acc = 0.0;
            for j in 0..d {
                acc += entries[s * d + j] * v[self.spec.successor(s, j)];
            }
            acc
        };
        if self.spec.state_count() >= PARALLEL_STATES {
            par::map_range(self.spec.state_count(), row)
        } else {
            (0..self.spec.state_count()).map(row).collect()
        }
    }

    /// `log` of the Perron eigenvalue of the matrix with entries
    /// `exp(-s c)`, bracketed by Collatz-Wielandt bounds.
    pub fn pressure(&self, s: f64) -> Result<f64> {
        // factor out exp(-s cmin) so entries stay in (0, 1]
        let shift = if s >= 0.0 {
            self.weights.iter().copied().fold(f64::INFINITY, f64::min)
        } else {
            self.weights.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        };
        let entries: Vec<f64> = self.weights.iter().map(|c| (-s * (c - shift)).exp()).collect();
        let n = self.spec.state_count();
        let mut v = vec![1.0; n];
        for _ in 0..POWER_MAX_STEPS {
            let y = self.apply(&entries, &v);
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for (a, b) in y.iter().zip(&v) {
                let r = a / b;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            if !(lo > 0.0) {
                return Err(LabError::NonConvergence(0));
            }
            if hi - lo <= POWER_TOL * lo {
                return Ok((0.5 * (lo + hi)).ln() - s * shift);
            }
            let m = y.iter().copied().fold(0.0, f64::max);
            v = y.into_iter().map(|x| x / m).collect();
        }
        Err(LabError::NonConvergence(POWER_MAX_STEPS))
    }

    /// The `s` with `P(s) = 0`.
    pub fn entropy_root(&self) -> Result<f64> {
        let p0 = self.pressure(0.0)?;
        if !(p0 > 0.0) {
            return Err(LabError::BracketFailure(p0));
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut doublings = 0;
        loop {
            let p = self.pressure(hi)?;
            if p < 0.0 {
                break;
            }
            if p == 0.0 {
                return Ok(hi);
            }
            lo = hi;
            hi *= 2.0;
            doublings += 1;
            if doublings > 60 {
                return Err(LabError::BracketFailure(p));
            }
        }
        while hi - lo > 1e-14 * hi {
            let mid = 0.5 * (lo + hi);
            let p = self.pressure(mid)?;
            if p == 0.0 {
                return Ok(mid);
            }
            if p > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

pub fn pressure(spec: &SubshiftSpec, cocycle: &dyn Cocycle, s: f64) -> Result<f64> {
    TransferOperator::new(spec.clone(), cocycle)?.pressure(s)
}

pub fn entropy_root(spec: &SubshiftSpec, cocycle: &dyn Cocycle) -> Result<f64> {
    TransferOperator::new(spec.clone(), cocycle)?.entropy_root()
}

#[derive(Debug, Clone, Serialize)]
pub struct DepthRow {
    pub depth: usize,
    pub h: f64,
    pub oscillation: f64,
}

/// Entropy root at cylinder depths `1..=max_depth`.
pub fn depth_table(rank: usize, cocycle: &dyn Cocycle, max_depth: usize) -> Result<Vec<DepthRow>> {
    (1..=max_depth)
        .map(|n| {
            let op = TransferOperator::new(SubshiftSpec::new(rank, n)?, cocycle)?;
            Ok(DepthRow { depth: n, h: op.entropy_root()?, oscillation: op.weight_oscillation() })
        })
        .collect()
}

pub fn write_depth_csv<W: Write>(rows: &[DepthRow], mut w: W) -> io::Result<()> {
    writeln!(w, "n,h_n,oscillation")?;
    for r in rows {
        writeln!(w, "{},{:.15},{:.6e}", r.depth, r.h, r.oscillation)?;
    }
    Ok(())
}

/// `(s, P(s))` on a grid.
pub fn write_pressure_csv<W: Write>(op: &TransferOperator, grid: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "s,P").map_err(io_err)?;
    for &s in grid {
        writeln!(w, "{s:.12},{:.15}", op.pressure(s)?).map_err(io_err)?;
    }
    Ok(())
}

fn io_err(e: io::Error) -> LabError {
    LabError::ResourceLimit(e.to_string())
}
