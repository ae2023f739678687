//! Proximal spectral data of scaled matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{LabError, Result};
use crate::rep::ScaledMatrix;

/// A matrix is treated as proximal only if `1 - gap >= PROXIMALITY_TOL`.
pub const PROXIMALITY_TOL: f64 = 1e-6;

/// Proximal spectral data of one group element.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// `log Lambda`, natural log of the spectral radius.
    pub log_radius: f64,
    /// Sign of the top eigenvalue `L`.
    pub signed_top: f64,
    /// Unit vector spanning the attracting line.
    pub attracting: DVector<f64>,
    /// Unit covector whose kernel is the repelling hyperplane.
    pub repelling_covector: DVector<f64>,
    /// `|lambda_2| / |lambda_1|`.
    pub gap: f64,
    pub log_gap: f64,
    /// Top eigenvalue of the scaled matrix the data was computed from.
    pub scaled_top: f64,
}

impl SpectralData {
    /// Pairing of the repelling covector with the attracting vector.
    pub fn self_pairing(&self) -> f64 {
        self.repelling_covector.dot(&self.attracting)
    }
}

/// Moduli of all eigenvalues, largest first, with the imaginary part of the
/// top one.
fn eigen_moduli(m: &DMatrix<f64>) -> Result<(Vec<f64>, f64)> {
    if m.nrows() == 1 {
        return Ok((vec![m[(0, 0)].abs()], 0.0));
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or(LabError::NonConvergence(10_000))?;
    let ev = schur.complex_eigenvalues();
    let mut pairs: Vec<(f64, f64)> = ev.iter().map(|z| (z.norm(), z.im)).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let top_im = pairs[0].1;
    Ok((pairs.into_iter().map(|p| p.0).collect(), top_im))
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    eigen_moduli(m).map(|(v, _)| v[0]).unwrap_or(f64::NAN)
}

pub(crate) fn normalize_sign(v: &mut DVector<f64>) {
    let n = v.norm();
    if n > 0.0 {
        *v /= n;
    }
    let imax = v.iamax();
    if v[imax] < 0.0 {
        *v = -v.clone();
    }
}

/// Dominant eigenvalue, attracting vector and repelling covector of a
/// proximal matrix.
///
/// Eigenvectors come from repeated squaring (which drives the gap to zero
/// doubly exponentially) followed by a few plain power steps; the top
/// eigenvalue is the two-sided Rayleigh quotient.
pub fn dominant_eigendata(sm: &ScaledMatrix) -> Result<SpectralData> {
    let m = &sm.matrix;
    let n = m.nrows();
    let (moduli, top_im) = eigen_moduli(m)?;
    let top = moduli[0];
    if top == 0.0 || !top.is_finite() {
        return Err(LabError::ProximalityFailure("zero spectral radius".into()));
    }
    if top_im.abs() > 1e-12 * top {
        return Err(LabError::ProximalityFailure("complex dominant eigenvalue".into()));
    }
    let gap = if n > 1 { moduli[1] / top } else { 0.0 };
    if 1.0 - gap < PROXIMALITY_TOL {
        return Err(LabError::ProximalityFailure(format!("|lambda2/lambda1| = {gap}")));
    }

    let squarings = if gap <= 1e-300 {
        1
    } else {
        let want = 45.0 / (-gap.ln());
        (want.log2().ceil().max(1.0) as usize).min(40)
    };
    let mut p = m / top;
    for _ in 0..squarings {
        p = &p * &p;
        let s = p.amax();
        if s == 0.0 || !s.is_finite() {
            return Err(LabError::ProximalityFailure("power iteration collapsed".into()));
        }
        p /= s;
    }
    let col = (0..n).max_by(|&a, &b| p.column(a).norm().total_cmp(&p.column(b).norm())).unwrap();
    let row = (0..n).max_by(|&a, &b| p.row(a).norm().total_cmp(&p.row(b).norm())).unwrap();
    let mut v: DVector<f64> = p.column(col).into_owned();
    let mut phi: DVector<f64> = p.row(row).transpose();
    v /= v.norm();
    phi /= phi.norm();
    for _ in 0..3 {
        let mv = m * &v;
        v = &mv / mv.norm();
        let pm = m.tr_mul(&phi);
        phi = &pm / pm.norm();
    }
    normalize_sign(&mut v);
    normalize_sign(&mut phi);
    let pairing = phi.dot(&v);
    if pairing.abs() < 1e-14 {
        return Err(LabError::DegeneratePairing(pairing));
    }
    let lambda = phi.dot(&(m * &v)) / pairing;
    if (lambda.abs() - top).abs() > 1e-6 * top {
        return Err(LabError::ProximalityFailure(format!(
            "Rayleigh quotient {lambda} disagrees with spectral radius {top}"
        )));
    }
    Ok(SpectralData {
        log_radius: sm.log_scale + lambda.abs().ln(),
        signed_top: lambda.signum(),
        attracting: v,
        repelling_covector: phi,
        gap,
        log_gap: if gap > 0.0 { gap.ln() } else { f64::MIN_POSITIVE.ln() },
        scaled_top: lambda,
    })
}

/// `rho(gamma) = L p + r` with `p` the rank-one projector onto the attracting
/// line along the repelling hyperplane. Stored at the scale of the
/// [`ScaledMatrix`] it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorDecomposition {
    pub p: DMatrix<f64>,
    pub r: DMatrix<f64>,
    /// Scaled signed top eigenvalue `L`.
    pub top: f64,
    pub log_scale: f64,
    /// Log of the spectral radius of `r` in true (unscaled) units.
    pub residual_log_radius: f64,
}

impl ProjectorDecomposition {
    /// `L p + r`, at scaled units.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.p * self.top + &self.r
    }
}

/// `p(u) = <phi|u> / <phi|v> * v`.
pub fn projector(sd: &SpectralData) -> Result<DMatrix<f64>> {
    let pairing = sd.self_pairing();
    if pairing.abs() < 1e-12 {
        return Err(LabError::DegeneratePairing(pairing));
    }
    Ok(&sd.attracting * sd.repelling_covector.transpose() / pairing)
}

pub fn projector_decomposition(sm: &ScaledMatrix, sd: &SpectralData) -> Result<ProjectorDecomposition> {
    let p = projector(sd)?;
    let top = sd.scaled_top;
    let r = &sm.matrix - &p * top;
    Ok(ProjectorDecomposition {
        p,
        r,
        top,
        log_scale: sm.log_scale,
        // r acts as lambda_2, ..., lambda_m on the repelling hyperplane
        residual_log_radius: sd.log_radius + sd.log_gap,
    })
}
