//! Cross-ratios of lines and hyperplanes at fixed points, their spectral
//! limit formulas, and cross-ratio rank detection.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::group::{are_coprime, ConjClass, Word};
use crate::rep::Representation;
use crate::spectral::{projector, SpectralData};

/// Denominator pairings below this (relative to the norms) are degenerate.
pub const QUAD_TOL: f64 = 1e-12;
/// Normalized `|chi^p|` below this counts as zero in [`rank_scan`].
pub const CHI_TOL: f64 = 1e-7;

/// `<phi|u><psi|v> / (<phi|v><psi|u>)`.
pub fn bb(phi: &DVector<f64>, psi: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    let rel = |a: &DVector<f64>, b: &DVector<f64>| {
        let p = a.dot(b);
        (p, p.abs() / (a.norm() * b.norm()))
    };
    let (pv, rv) = rel(phi, v);
    let (qu, ru) = rel(psi, u);
    if !(rv >= QUAD_TOL) {
        return Err(LabError::DegenerateQuad(rv));
    }
    if !(ru >= QUAD_TOL) {
        return Err(LabError::DegenerateQuad(ru));
    }
    Ok(phi.dot(u) * psi.dot(v) / (pv * qu))
}

/// Attracting line and dominant left eigenvector of one element; the
/// kernel of the covector is the repelling hyperplane.
#[derive(Debug, Clone)]
pub struct FlagPair {
    pub line: DVector<f64>,
    pub covector: DVector<f64>,
}

impl FlagPair {
    pub fn of(rep: &Representation, w: &Word) -> Result<Self> {
        let sd = rep.spectral_data(w)?;
        Ok(FlagPair { line: sd.attracting, covector: sd.repelling_covector })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FixedPointCrossRatio {
    /// `b(alpha-, beta-, beta+, alpha+)`.
    pub value: f64,
    /// `Tr(p(alpha) p(beta))`.
    pub trace: f64,
    pub discrepancy: f64,
}

fn require_coprime(alpha: &Word, beta: &Word) -> Result<()> {
    if !are_coprime(alpha, beta)? {
        return Err(LabError::NotCoprime(alpha.to_string(), beta.to_string()));
    }
    Ok(())
}

fn spectral_pair(rep: &Representation, alpha: &Word, beta: &Word) -> Result<(SpectralData, SpectralData)> {
    require_coprime(alpha, beta)?;
    Ok((rep.spectral_data(alpha)?, rep.spectral_data(beta)?))
}

/// Cross-ratio of the fixed points of two coprime elements.
pub fn fixed_point_cross_ratio_words(rep: &Representation, alpha: &Word, beta: &Word) -> Result<FixedPointCrossRatio> {
    let (sa, sb) = spectral_pair(rep, alpha, beta)?;
    let value = bb(&sa.repelling_covector, &sb.repelling_covector, &sb.attracting, &sa.attracting)?;
    let trace = (projector(&sa)? * projector(&sb)?).trace();
    Ok(FixedPointCrossRatio { value, trace, discrepancy: (value - trace).abs() })
}

pub fn fixed_point_cross_ratio(rep: &Representation, alpha: &ConjClass, beta: &ConjClass) -> Result<FixedPointCrossRatio> {
    fixed_point_cross_ratio_words(rep, alpha.rep(), beta.rep())
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitRow {
    pub n: usize,
    pub value: f64,
    pub error: f64,
}

/// Both spectral limit sequences for a coprime pair.
#[derive(Debug, Clone, Serialize)]
pub struct CrossRatioLimit {
    /// `L(alpha^n beta) / L(alpha)^n`, converging to `Tr(p(alpha) rho(beta))`
    /// for `rho(beta)` normalized to determinant one.
    pub single: Vec<LimitRow>,
    pub single_limit: f64,
    /// `L(alpha^n beta^n) / (L(alpha)^n L(beta)^n)`, converging to the
    /// fixed-point cross-ratio.
    pub paired: Vec<LimitRow>,
    pub cross_ratio: FixedPointCrossRatio,
}

impl CrossRatioLimit {
    /// Successive error ratios `e(n+1)/e(n)` of the paired sequence for
    /// `n >= from`.
    pub fn paired_ratios(&self, from: usize) -> Vec<f64> {
        ratios(&self.paired, from)
    }

    pub fn single_ratios(&self, from: usize) -> Vec<f64> {
        ratios(&self.single, from)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,sequence,signed_ratio,error")?;
        for r in &self.single {
            writeln!(w, "{},single,{:.17e},{:.6e}", r.n, r.value, r.error)?;
        }
        for r in &self.paired {
            writeln!(w, "{},paired,{:.17e},{:.6e}", r.n, r.value, r.error)?;
        }
        Ok(())
    }
}

fn ratios(rows: &[LimitRow], from: usize) -> Vec<f64> {
    rows.windows(2).filter(|p| p[0].n >= from).map(|p| p[1].error / p[0].error).collect()
}

fn signed_log(sd: &SpectralData) -> (f64, f64) {
    (sd.signed_top, sd.log_radius)
}

pub fn cr_limit_words(rep: &Representation, alpha: &Word, beta: &Word, n_max: usize) -> Result<CrossRatioLimit> {
    let (sa, sb) = spectral_pair(rep, alpha, beta)?;
    let cross_ratio = fixed_point_cross_ratio_words(rep, alpha, beta)?;
    let pa = projector(&sa)?;
    let beta_true = rep.evaluate(beta)?.true_matrix();
    let single_limit = (pa * beta_true).trace();
    let (ea, la) = signed_log(&sa);
    let (eb, lb) = signed_log(&sb);
    let mut single = Vec::new();
    let mut paired = Vec::new();
    for n in 1..=n_max {
        let an = alpha.power(n as i64);
        let (s1, l1) = signed_log(&rep.spectral_data(&an.multiply(beta))?);
        let v1 = s1 * ea.powi(n as i32) * (l1 - n as f64 * la).exp();
        single.push(LimitRow { n, value: v1, error: (v1 - single_limit).abs() });
        let (s2, l2) = signed_log(&rep.spectral_data(&an.multiply(&beta.power(n as i64)))?);
        let v2 = s2 * (ea * eb).powi(n as i32) * (l2 - n as f64 * (la + lb)).exp();
        paired.push(LimitRow { n, value: v2, error: (v2 - cross_ratio.value).abs() });
    }
    Ok(CrossRatioLimit { single, single_limit, paired, cross_ratio })
}

pub fn cr_limit(rep: &Representation, alpha: &ConjClass, beta: &ConjClass, n_max: usize) -> Result<CrossRatioLimit> {
    cr_limit_words(rep, alpha.rep(), beta.rep(), n_max)
}

/// Hadamard-normalized `det B / prod |row_i|` with
/// `B_ij = b(theta(e_i), theta(e_0), xi(u_j), xi(u_0))`, `i, j = 1..p`.
///
/// `theta(e_i)` is the repelling hyperplane of `e_i` and `xi(u_j)` the
/// attracting line of `u_j`.
pub fn chi_test(rep: &Representation, e: &[ConjClass], u: &[ConjClass], p: usize) -> Result<f64> {
    if e.len() != p + 1 || u.len() != p + 1 || p == 0 {
        return Err(LabError::InvalidArgument(format!("chi^{p} needs {} classes on each side", p + 1)));
    }
    let all: Vec<&ConjClass> = e.iter().chain(u).collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            require_coprime(all[i].rep(), all[j].rep())?;
        }
    }
    let theta: Vec<DVector<f64>> = e.iter().map(|c| Ok(rep.spectral_data(c.rep())?.repelling_covector)).collect::<Result<_>>()?;
    let xi: Vec<DVector<f64>> = u.iter().map(|c| Ok(rep.spectral_data(c.rep())?.attracting)).collect::<Result<_>>()?;
    let mut b = DMatrix::zeros(p, p);
    for i in 1..=p {
        for j in 1..=p {
            b[(i - 1, j - 1)] = bb(&theta[i], &theta[0], &xi[j], &xi[0])?;
        }
    }
    let rows: f64 = (0..p).map(|i| b.row(i).norm()).product();
    Ok(b.determinant().abs() / rows)
}

/// Greedy pool of pairwise coprime primitive classes, in the given order.
pub fn coprime_pool(classes: &[ConjClass], size: usize) -> Result<Vec<ConjClass>> {
    let mut pool: Vec<ConjClass> = Vec::new();
    for c in classes.iter().filter(|c| c.is_primitive()) {
        if pool.len() == size {
            break;
        }
        let mut ok = true;
        for q in &pool {
            if !are_coprime(c.rep(), q.rep())? {
                ok = false;
                break;
            }
        }
        if ok {
            pool.push(c.clone());
        }
    }
    if pool.len() < size {
        return Err(LabError::InsufficientData(format!("only {} pairwise coprime classes", pool.len())));
    }
    Ok(pool)
}

#[derive(Debug, Clone, Serialize)]
pub struct RankScan {
    /// `(p, normalized |chi^p|)`.
    pub chi: Vec<(usize, f64)>,
    /// Least `p` with `|chi^p| < CHI_TOL`, minus one.
    pub detected_dimension: Option<usize>,
}

impl RankScan {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "p,chi_normalized")?;
        for (p, c) in &self.chi {
            writeln!(w, "{p},{c:.6e}")?;
        }
        Ok(())
    }
}

/// `chi^p` for `p = 1..=p_max` with `e = pool[0..=p]` and
/// `u = pool[p_max+1 ..= p_max+1+p]`.
pub fn rank_scan(rep: &Representation, pool: &[ConjClass], p_max: usize) -> Result<RankScan> {
    if pool.len() < 2 * p_max + 2 {
        return Err(LabError::InsufficientData(format!("rank scan to {p_max} needs {} classes", 2 * p_max + 2)));
    }
    let (e_all, u_all) = pool.split_at(p_max + 1);
    let mut chi = Vec::new();
    let mut detected = None;
    for p in 1..=p_max {
        let c = chi_test(rep, &e_all[..=p], &u_all[..=p], p)?;
        chi.push((p, c));
        if detected.is_none() && c < CHI_TOL {
            detected = Some(p - 1);
        }
    }
    Ok(RankScan { chi, detected_dimension: detected })
}
