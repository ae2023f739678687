//! Two-by-two complex representations and hyperbolic translation length.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::group::{Letter, Word};
use crate::rep::Representation;

pub type CMatrix2 = Matrix2<Complex64>;

/// Elements with `|lambda| <= 1 + LOXODROMIC_TOL` are treated as elliptic or
/// parabolic.
pub const LOXODROMIC_TOL: f64 = 1e-9;

/// Eigenvalue of larger modulus of a matrix with the given trace and
/// determinant, computed without cancellation.
fn big_root(tr: Complex64, det: Complex64) -> Complex64 {
    let disc = (tr * tr - 4.0 * det).sqrt();
    let p = tr + disc;
    let m = tr - disc;
    if p.norm() >= m.norm() {
        p / 2.0
    } else {
        m / 2.0
    }
}

/// `2 log|lambda|` for a loxodromic element of `SL_2(C)`; the matrix is
/// first normalized to determinant one.
pub fn translation_length(g: &CMatrix2) -> Result<f64> {
    let det = g.determinant();
    if det.norm() == 0.0 {
        return Err(LabError::InvalidArgument("singular matrix".into()));
    }
    let g = g / det.sqrt();
    let lambda = big_root(g[(0, 0)] + g[(1, 1)], Complex64::new(1.0, 0.0));
    let modulus = lambda.norm();
    if modulus <= 1.0 + LOXODROMIC_TOL {
        return Err(LabError::NotLoxodromic(modulus));
    }
    Ok(2.0 * modulus.ln())
}

/// Unit eigenvector for the eigenvalue of larger modulus.
pub fn attracting_vector(g: &CMatrix2) -> Result<Vector2<Complex64>> {
    let lambda = big_root(g[(0, 0)] + g[(1, 1)], g.determinant());
    let small = g.determinant() / lambda;
    if lambda.norm() <= small.norm() * (1.0 + LOXODROMIC_TOL) {
        return Err(LabError::NotLoxodromic(lambda.norm() / small.norm().max(f64::MIN_POSITIVE)));
    }
    // (g - lambda) v = 0: take the better-conditioned row
    let (a, b, c, d) = (g[(0, 0)] - lambda, g[(0, 1)], g[(1, 0)], g[(1, 1)] - lambda);
    let v = if a.norm() + b.norm() >= c.norm() + d.norm() {
        Vector2::new(b, -a)
    } else {
        Vector2::new(d, -c)
    };
    let n = v.norm();
    if n == 0.0 {
        return Ok(Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
    }
    Ok(v / Complex64::new(n, 0.0))
}

/// A representation into `SL_2(C)`.
#[derive(Debug, Clone)]
pub struct KleinianRep {
    label: String,
    gens: Vec<CMatrix2>,
    invs: Vec<CMatrix2>,
}

impl KleinianRep {
    pub fn new(label: impl Into<String>, generators: Vec<CMatrix2>) -> Result<Self> {
        let label = label.into();
        if generators.is_empty() {
            return Err(LabError::InvalidArgument("representation without generators".into()));
        }
        let mut gens = Vec::new();
        let mut invs = Vec::new();
        for g in generators {
            let det = g.determinant();
            if det.norm() == 0.0 {
                return Err(LabError::InvalidArgument(format!("singular generator in {label}")));
            }
            let g = g / det.sqrt();
            let inv = CMatrix2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]);
            gens.push(g);
            invs.push(inv);
        }
        Ok(KleinianRep { label, gens, invs })
    }

    /// Complexification of a real two-dimensional representation.
    pub fn from_real(rep: &Representation) -> Result<Self> {
        if rep.dim() != 2 {
            return Err(LabError::InvalidArgument("complexification needs dimension 2".into()));
        }
        let gens = rep
            .generators()
            .iter()
            .map(|g| g.fixed_view::<2, 2>(0, 0).map(|x| Complex64::new(x, 0.0)))
            .collect();
        KleinianRep::new(rep.label().to_string(), gens)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[CMatrix2] {
        &self.gens
    }

    pub fn image(&self, l: Letter) -> &CMatrix2 {
        if l.is_inverse() {
            &self.invs[l.index()]
        } else {
            &self.gens[l.index()]
        }
    }

    /// Product along `w` as `(matrix, log_scale)` with max-modulus entry one.
    pub fn evaluate(&self, w: &Word) -> Result<(CMatrix2, f64)> {
        if w.min_rank() > self.rank() {
            return Err(LabError::InvalidArgument(format!("word {w} exceeds rank of {}", self.label)));
        }
        let mut m = CMatrix2::identity();
        let mut log_scale = 0.0;
        for &l in w.letters() {
            m *= self.image(l);
            let s = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if s == 0.0 || !s.is_finite() {
                return Err(LabError::SingularProduct(w.to_string()));
            }
            m /= Complex64::new(s, 0.0);
            log_scale += s.ln();
        }
        Ok((m, log_scale))
    }

    /// `2 log|lambda(rho(w))|`.
    pub fn translation_length(&self, w: &Word) -> Result<f64> {
        let (m, log_scale) = self.evaluate(w)?;
        // det(m) = exp(-2 log_scale)
        let det = m.determinant();
        let lambda = big_root(m[(0, 0)] + m[(1, 1)], det);
        let log_mod = log_scale + lambda.norm().ln();
        let log_det = log_scale * 2.0 + det.norm().ln();
        // log|lambda_big| - log|lambda_small| = 2 log|lambda_big| - log|det|
        if 2.0 * log_mod - log_det <= 2.0 * LOXODROMIC_TOL {
            return Err(LabError::NotLoxodromic(log_mod.exp()));
        }
        Ok(2.0 * log_mod)
    }

    /// Bending: conjugates generator `which` by the elliptic of angle
    /// `theta` about the geodesic with real endpoints `p != q`.
    pub fn bend(&self, which: usize, p: f64, q: f64, theta: f64) -> Result<Self> {
        if p == q || !p.is_finite() || !q.is_finite() {
            return Err(LabError::InvalidArgument(format!("bending axis ({p}, {q})")));
        }
        // m sends 0 to p and infinity to q
        let m = CMatrix2::new(Complex64::new(q, 0.0), Complex64::new(p, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        let d = CMatrix2::new(
            Complex64::from_polar(1.0, theta / 2.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, -theta / 2.0),
        );
        let mi = m.try_inverse().ok_or_else(|| LabError::InvalidArgument("degenerate bending axis".into()))?;
        let mut bent = self.conjugate_generators(&[which], &(m * d * mi))?;
        bent.label = format!("{}@{theta}", self.label);
        Ok(bent)
    }

    /// Conjugates the images of the listed generators by `g`.
    pub fn conjugate_generators(&self, which: &[usize], g: &CMatrix2) -> Result<Self> {
        let gi = g.try_inverse().ok_or_else(|| LabError::InvalidArgument("singular conjugator".into()))?;
        let gens = self
            .gens
            .iter()
            .enumerate()
            .map(|(i, m)| if which.contains(&i) { g * m * gi } else { *m })
            .collect();
        KleinianRep::new(self.label.clone(), gens)
    }
}
