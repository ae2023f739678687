//! Analytic families of representations and finite-difference derivatives
//! of the renormalized intersection: the pressure form, entropy
//! derivatives and log-type residuals.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::certify::certify_anosov;
use crate::error::{LabError, Result};
use crate::group::{enumerate_classes, necklaces_of_length, ConjClass};
use crate::orbit::PeriodicShell;
use crate::par;
use crate::polynomial::Polynomial;
use crate::rep::Representation;
use crate::stats::kahan_sum;

pub const DEFAULT_STEP: f64 = 1e-2;

/// One `m x m` matrix of polynomial entries, row-major.
#[derive(Debug, Clone)]
pub struct PolyMatrix {
    pub dim: usize,
    pub entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(dim: usize, entries: Vec<Polynomial>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(LabError::InvalidArgument(format!("{} entries for a {dim}x{dim} matrix", entries.len())));
        }
        Ok(PolyMatrix { dim, entries })
    }

    /// Parses row-major entry expressions.
    pub fn parse(dim: usize, exprs: &[&str], params: &[String]) -> Result<Self> {
        let entries = exprs.iter().map(|e| Polynomial::parse(e, params)).collect::<Result<Vec<_>>>()?;
        PolyMatrix::new(dim, entries)
    }

    pub fn eval(&self, t: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.dim, self.dim, self.entries.iter().map(|p| p.eval(t)))
    }
}

#[derive(Debug, Clone)]
pub enum FamilyKind {
    /// Generator matrices with polynomial entries.
    Explicit(Vec<PolyMatrix>),
    /// `C(t) rho_t(g) C(t)^{-1}` for the listed generators (all if `None`).
    Conjugation { base: Box<RepFamily>, conjugator: PolyMatrix, generators: Option<Vec<usize>> },
    SymmetricPower { base: Box<RepFamily>, m: usize },
}

#[derive(Debug, Clone)]
pub struct RepFamily {
    pub label: String,
    pub params: Vec<String>,
    pub base_point: Vec<f64>,
    /// Closed box per parameter.
    pub bounds: Vec<(f64, f64)>,
    pub kind: FamilyKind,
}

impl RepFamily {
    pub fn explicit(label: impl Into<String>, params: Vec<String>, gens: Vec<PolyMatrix>) -> Self {
        let d = params.len();
        RepFamily {
            label: label.into(),
            params,
            base_point: vec![0.0; d],
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); d],
            kind: FamilyKind::Explicit(gens),
        }
    }

    pub fn conjugated(self, conjugator: PolyMatrix, generators: Option<Vec<usize>>) -> Self {
        RepFamily {
            label: format!("conj({})", self.label),
            params: self.params.clone(),
            base_point: self.base_point.clone(),
            bounds: self.bounds.clone(),
            kind: FamilyKind::Conjugation { base: Box::new(self), conjugator, generators },
        }
    }

    pub fn symmetric_power(self, m: usize) -> Self {
        RepFamily {
            label: format!("tau{m}({})", self.label),
            params: self.params.clone(),
            base_point: self.base_point.clone(),
            bounds: self.bounds.clone(),
            kind: FamilyKind::SymmetricPower { base: Box::new(self), m },
        }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_base_point(mut self, t: Vec<f64>) -> Self {
        self.base_point = t;
        self
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    fn eval_unchecked(&self, t: &[f64]) -> Result<Representation> {
        match &self.kind {
            FamilyKind::Explicit(gens) => {
                Representation::new(self.label.clone(), gens.iter().map(|g| g.eval(t)).collect())
            }
            FamilyKind::Conjugation { base, conjugator, generators } => {
                let rep = base.eval_unchecked(t)?;
                let c = conjugator.eval(t);
                let ci = c
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| LabError::OutOfDomain(format!("singular conjugator at {t:?}")))?;
                let gens = rep
                    .generators()
                    .iter()
                    .enumerate()
                    .map(|(i, g)| match generators {
                        Some(which) if !which.contains(&i) => g.clone(),
                        _ => &c * g * &ci,
                    })
                    .collect();
                Representation::new(self.label.clone(), gens)
            }
            FamilyKind::SymmetricPower { base, m } => {
                Ok(base.eval_unchecked(t)?.symmetric_power(*m)?.with_label(self.label.clone()))
            }
        }
    }
}

pub fn evaluate_family(fam: &RepFamily, t: &[f64]) -> Result<Representation> {
    if t.len() != fam.dim() {
        return Err(LabError::OutOfDomain(format!("{} parameters for a {}-parameter family", t.len(), fam.dim())));
    }
    for (i, (&x, &(lo, hi))) in t.iter().zip(&fam.bounds).enumerate() {
        if !(x >= lo && x <= hi) {
            return Err(LabError::OutOfDomain(format!("{} = {x} outside [{lo}, {hi}]", fam.params[i])));
        }
    }
    fam.eval_unchecked(t).map_err(|e| match e {
        LabError::InvalidArgument(m) => LabError::OutOfDomain(m),
        e => e,
    })
}

/// A parameterized positive class function.
pub trait LengthFamily: Sync {
    fn dim(&self) -> usize;
    fn lengths(&self, t: &[f64], classes: &[ConjClass]) -> Result<Vec<f64>>;
    /// Checks the family is admissible at `t`.
    fn certify(&self, _t: &[f64], _classes: &[ConjClass]) -> Result<()> {
        Ok(())
    }
}

impl LengthFamily for RepFamily {
    fn dim(&self) -> usize {
        RepFamily::dim(self)
    }

    fn lengths(&self, t: &[f64], classes: &[ConjClass]) -> Result<Vec<f64>> {
        let rep = evaluate_family(self, t)?;
        par::try_map(classes, |c| rep.log_spectral_radius(c.rep()))
    }

    fn certify(&self, t: &[f64], classes: &[ConjClass]) -> Result<()> {
        let rep = evaluate_family(self, t)?;
        let report = certify_anosov(&rep, classes);
        if report.certified {
            Ok(())
        } else {
            Err(LabError::CertificationFailure(format!("{t:?} ({} failures)", report.failures.len())))
        }
    }
}

/// Shared enumeration for derivative computations: a periodic-orbit shell
/// of fixed word length, and a shorter list used for certification.
pub struct FamilyProbe {
    shell_classes: Vec<ConjClass>,
    shell: PeriodicShell,
    certify_classes: Vec<ConjClass>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbeOptions {
    pub rank: usize,
    pub shell_len: usize,
    /// Classes up to this length are certified at every sample point; zero
    /// disables certification.
    pub certify_len: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { rank: 2, shell_len: 12, certify_len: 8 }
    }
}

fn add(t0: &[f64], v: &[f64], e: f64) -> Vec<f64> {
    t0.iter().zip(v).map(|(a, b)| a + e * b).collect()
}

impl FamilyProbe {
    pub fn new(opts: ProbeOptions) -> Result<Self> {
        let shell_classes = necklaces_of_length(opts.rank, opts.shell_len);
        let shell = PeriodicShell::new(&shell_classes, opts.shell_len)?;
        let certify_classes = if opts.certify_len > 0 {
            enumerate_classes(opts.rank, opts.certify_len, crate::group::DEFAULT_CLASS_BUDGET)?
        } else {
            Vec::new()
        };
        Ok(FamilyProbe { shell_classes, shell, certify_classes })
    }

    pub fn shell_classes(&self) -> &[ConjClass] {
        &self.shell_classes
    }

    pub fn shell(&self) -> &PeriodicShell {
        &self.shell
    }

    /// Shell lengths at `t`, after certification.
    pub fn lengths<F: LengthFamily + ?Sized>(&self, fam: &F, t: &[f64]) -> Result<Vec<f64>> {
        if !self.certify_classes.is_empty() {
            fam.certify(t, &self.certify_classes)?;
        }
        fam.lengths(t, &self.shell_classes)
    }

    pub fn entropy<F: LengthFamily + ?Sized>(&self, fam: &F, t: &[f64]) -> Result<f64> {
        self.shell.entropy(&self.lengths(fam, t)?)
    }

    /// `J(rho_t0, rho_t)` on the shell.
    pub fn j<F: LengthFamily + ?Sized>(&self, fam: &F, f0: &[f64], t: &[f64]) -> Result<f64> {
        let g = self.lengths(fam, t)?;
        Ok(self.shell.intersection(f0, &g)?.j)
    }

    /// `(eps, J(rho_t0, rho_{t0 + eps v}))`; `eps = 0` gives exactly one.
    pub fn j_profile<F: LengthFamily + ?Sized>(&self, fam: &F, t0: &[f64], v: &[f64], steps: &[f64]) -> Result<Vec<(f64, f64)>> {
        let f0 = self.lengths(fam, t0)?;
        steps
            .iter()
            .map(|&e| Ok((e, if e == 0.0 { 1.0 } else { self.j(fam, &f0, &add(t0, v, e))? })))
            .collect()
    }

    /// `(J(eps) - J(-eps)) / 2 eps`.
    pub fn first_derivative_check<F: LengthFamily + ?Sized>(&self, fam: &F, t0: &[f64], v: &[f64], step: f64) -> Result<f64> {
        let f0 = self.lengths(fam, t0)?;
        let jp = self.j(fam, &f0, &add(t0, v, step))?;
        let jm = self.j(fam, &f0, &add(t0, v, -step))?;
        Ok((jp - jm) / (2.0 * step))
    }

    /// `(J(eps) - 2 + J(-eps)) / eps^2`.
    fn second_difference<F: LengthFamily + ?Sized>(&self, fam: &F, f0: &[f64], t0: &[f64], v: &[f64], step: f64) -> Result<(f64, f64)> {
        let jp = self.j(fam, f0, &add(t0, v, step))?;
        let jm = self.j(fam, f0, &add(t0, v, -step))?;
        Ok(((jp - 2.0 + jm) / (step * step), (jp - jm) / (2.0 * step)))
    }

    fn hessian<F: LengthFamily + ?Sized>(&self, fam: &F, f0: &[f64], t0: &[f64], basis: &[Vec<f64>], step: f64) -> Result<(DMatrix<f64>, Vec<f64>)> {
        let d = basis.len();
        let mut h = DMatrix::zeros(d, d);
        let mut first = vec![0.0; d];
        for i in 0..d {
            let (q, dj) = self.second_difference(fam, f0, t0, &basis[i], step)?;
            h[(i, i)] = q;
            first[i] = dj;
        }
        for i in 0..d {
            for j in i + 1..d {
                let plus: Vec<f64> = basis[i].iter().zip(&basis[j]).map(|(a, b)| a + b).collect();
                let minus: Vec<f64> = basis[i].iter().zip(&basis[j]).map(|(a, b)| a - b).collect();
                let (qp, _) = self.second_difference(fam, f0, t0, &plus, step)?;
                let (qm, _) = self.second_difference(fam, f0, t0, &minus, step)?;
                let x = (qp - qm) / 4.0;
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
        Ok((h, first))
    }

    /// Hessian of `J(rho_t0, .)` in the given basis.
    pub fn pressure_form<F: LengthFamily + ?Sized>(&self, fam: &F, t0: &[f64], basis: &[Vec<f64>], step: f64, richardson: bool) -> Result<PressureForm> {
        let f0 = self.lengths(fam, t0)?;
        let (h1, first) = self.hessian(fam, &f0, t0, basis, step)?;
        let (h2, _) = self.hessian(fam, &f0, t0, basis, step / 2.0)?;
        let matrix = if richardson { (&h2 * 4.0 - &h1) / 3.0 } else { h1.clone() };
        let scale = h1.amax().max(1e-6);
        let quadratic_residual = (&h1 - &h2).amax();
        if quadratic_residual > 0.5 * scale {
            return Err(LabError::StepTooLarge(format!(
                "Hessian changes by {quadratic_residual:.3e} under step halving (scale {scale:.3e})"
            )));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(f64::total_cmp);
        let top = eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let null_count = eigenvalues.iter().filter(|x| x.abs() <= 1e-6 * top.max(1e-300)).count();
        let symmetry_defect = (&matrix - matrix.transpose()).amax();
        Ok(PressureForm {
            matrix: (0..matrix.nrows()).map(|i| matrix.row(i).iter().copied().collect()).collect(),
            base_point: t0.to_vec(),
            step,
            richardson,
            eigenvalues,
            first_derivatives: first,
            symmetry_defect,
            quadratic_residual,
            null_count,
        })
    }

    /// Central difference of the entropy along `v`, Richardson-extrapolated,
    /// with `K = -(1/h) dh/dt`.
    pub fn entropy_derivative<F: LengthFamily + ?Sized>(&self, fam: &F, t0: &[f64], v: &[f64], step: f64) -> Result<EntropyDerivative> {
        let h0 = self.entropy(fam, t0)?;
        let d = |e: f64| -> Result<f64> {
            Ok((self.entropy(fam, &add(t0, v, e))? - self.entropy(fam, &add(t0, v, -e))?) / (2.0 * e))
        };
        let d1 = d(step)?;
        let d2 = d(step / 2.0)?;
        let dh = (4.0 * d2 - d1) / 3.0;
        Ok(EntropyDerivative { h: h0, dh, k: -dh / h0, stderr: (dh - d2).abs() })
    }

    /// Per-class `D log Lambda(alpha)(v) - K log Lambda(alpha)` over
    /// `classes`, with `K` from [`FamilyProbe::entropy_derivative`].
    pub fn log_type_residuals<F: LengthFamily + ?Sized>(
        &self,
        fam: &F,
        t0: &[f64],
        v: &[f64],
        classes: &[ConjClass],
        step: f64,
    ) -> Result<LogTypeResiduals> {
        let ed = self.entropy_derivative(fam, t0, v, step)?;
        let l0 = fam.lengths(t0, classes)?;
        let diff = |e: f64| -> Result<Vec<f64>> {
            let p = fam.lengths(&add(t0, v, e), classes)?;
            let m = fam.lengths(&add(t0, v, -e), classes)?;
            Ok(p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * e)).collect())
        };
        let d1 = diff(step)?;
        let d2 = diff(step / 2.0)?;
        let residuals: Vec<f64> = d1
            .iter()
            .zip(&d2)
            .zip(&l0)
            .map(|((a, b), l)| (4.0 * b - a) / 3.0 - ed.k * l)
            .collect();
        let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let mean_abs = kahan_sum(residuals.iter().map(|r| r.abs())) / residuals.len().max(1) as f64;
        Ok(LogTypeResiduals { k: ed.k, residuals, max_abs, mean_abs })
    }

    /// `h Var(fdot - r f) / <f>` on the shell, with `fdot` the central
    /// difference of the lengths along `v`.
    pub fn variance_form<F: LengthFamily + ?Sized>(&self, fam: &F, t0: &[f64], v: &[f64], step: f64) -> Result<f64> {
        let f0 = self.lengths(fam, t0)?;
        let p = self.lengths(fam, &add(t0, v, step))?;
        let m = self.lengths(fam, &add(t0, v, -step))?;
        let fdot: Vec<f64> = p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * step)).collect();
        self.shell.variance_form(&f0, &fdot)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PressureForm {
    pub matrix: Vec<Vec<f64>>,
    pub base_point: Vec<f64>,
    pub step: f64,
    pub richardson: bool,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `dJ/dt` along each basis direction.
    pub first_derivatives: Vec<f64>,
    pub symmetry_defect: f64,
    /// Largest entry change between steps `eps` and `eps/2`.
    pub quadratic_residual: f64,
    /// Eigenvalues below `1e-6` of the largest in modulus.
    pub null_count: usize,
}

impl PressureForm {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }

    /// Euclidean norm of row `i` divided by the largest eigenvalue modulus.
    pub fn scaled_row_norm(&self, i: usize) -> f64 {
        let top = self.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        self.matrix[i].iter().map(|x| x * x).sum::<f64>().sqrt() / top
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EntropyDerivative {
    pub h: f64,
    pub dh: f64,
    pub k: f64,
    /// Difference between the extrapolated and the finer plain estimate.
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LogTypeResiduals {
    pub k: f64,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    pub mean_abs: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: &[&str]) -> Vec<String> {
        p.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn explicit_at_zero_is_base() {
        let ps = params(&["t"]);
        let a = PolyMatrix::parse(2, &["3 + t", "0", "0", "1/(3)"], &ps).unwrap();
        let b = PolyMatrix::parse(2, &["5/3", "4/3", "4/3", "5/3"], &ps).unwrap();
        let fam = RepFamily::explicit("s", ps, vec![a, b]);
        let rep = evaluate_family(&fam, &[0.0]).unwrap();
        assert!((rep.generators()[0][(0, 0)] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_domain() {
        let ps = params(&["t"]);
        let a = PolyMatrix::parse(2, &["1 + t", "0", "0", "1"], &ps).unwrap();
        let fam = RepFamily::explicit("s", ps, vec![a]).with_bounds(vec![(-0.5, 0.5)]);
        assert!(matches!(evaluate_family(&fam, &[0.7]), Err(LabError::OutOfDomain(_))));
        assert!(matches!(evaluate_family(&fam, &[0.1, 0.2]), Err(LabError::OutOfDomain(_))));
    }
}
