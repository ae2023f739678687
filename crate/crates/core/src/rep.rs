//! Real representations of free groups and overflow-safe word evaluation.

use nalgebra::DMatrix;

use crate::error::{LabError, Result};
use crate::group::{Letter, Word};
use crate::spectral::{self, SpectralData};

/// `e^{log_scale} * matrix`, with the largest entry of `matrix` equal to one
/// in absolute value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    pub matrix: DMatrix<f64>,
    pub log_scale: f64,
}

impl ScaledMatrix {
    pub fn identity(dim: usize) -> Self {
        ScaledMatrix { matrix: DMatrix::identity(dim, dim), log_scale: 0.0 }
    }

    /// Normalizes `matrix` so that its largest absolute entry is one.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Option<Self> {
        let mut sm = ScaledMatrix { matrix, log_scale: 0.0 };
        sm.renormalize().then_some(sm)
    }

    fn renormalize(&mut self) -> bool {
        let max = self.matrix.amax();
        if max == 0.0 || !max.is_finite() {
            return false;
        }
        self.matrix /= max;
        self.log_scale += max.ln();
        true
    }

    /// Materializes the unscaled matrix. Only sensible for short words.
    pub fn true_matrix(&self) -> DMatrix<f64> {
        &self.matrix * self.log_scale.exp()
    }

    pub fn mul(&self, other: &ScaledMatrix) -> Option<ScaledMatrix> {
        let mut out = ScaledMatrix {
            matrix: &self.matrix * &other.matrix,
            log_scale: self.log_scale + other.log_scale,
        };
        out.renormalize().then_some(out)
    }
}

/// Generator images and their inverses.
type ImagePair = (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>);

/// A homomorphism from a free group into `SL_m(R)` (up to sign), given by
/// generator images normalized to `|det| = 1`.
#[derive(Debug, Clone)]
pub struct Representation {
    label: String,
    dim: usize,
    gens: Vec<DMatrix<f64>>,
    invs: Vec<DMatrix<f64>>,
    // second exterior power, used for the second eigenvalue; absent when
    // dim <= 2 where |lambda_1 lambda_2| = |det| = 1
    ext2: Option<ImagePair>,
}

impl Representation {
    pub fn new(label: impl Into<String>, generators: Vec<DMatrix<f64>>) -> Result<Self> {
        let label = label.into();
        let dim = match generators.first() {
            Some(g) => g.nrows(),
            None => return Err(LabError::InvalidArgument("representation without generators".into())),
        };
        if dim == 0 {
            return Err(LabError::InvalidArgument("zero-dimensional representation".into()));
        }
        let mut gens = Vec::with_capacity(generators.len());
        let mut invs = Vec::with_capacity(generators.len());
        for (i, g) in generators.into_iter().enumerate() {
            if g.nrows() != dim || g.ncols() != dim {
                return Err(LabError::InvalidArgument(format!(
                    "generator {i} of {label} is {}x{}, expected {dim}x{dim}",
                    g.nrows(),
                    g.ncols()
                )));
            }
            let det = g.determinant();
            if det == 0.0 || !det.is_finite() {
                return Err(LabError::InvalidArgument(format!("generator {i} of {label} is singular")));
            }
            let g = g / det.abs().powf(1.0 / dim as f64);
            let inv = g
                .clone()
                .try_inverse()
                .ok_or_else(|| LabError::InvalidArgument(format!("generator {i} of {label} is singular")))?;
            gens.push(g);
            invs.push(inv);
        }
        let ext2 = (dim > 2).then(|| {
            (gens.iter().map(exterior_square).collect(), invs.iter().map(exterior_square).collect())
        });
        Ok(Representation { label, dim, gens, invs, ext2 })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.gens
    }

    pub fn image(&self, l: Letter) -> &DMatrix<f64> {
        if l.is_inverse() {
            &self.invs[l.index()]
        } else {
            &self.gens[l.index()]
        }
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        if w.min_rank() > self.rank() {
            return Err(LabError::InvalidArgument(format!(
                "word {w} uses generators beyond rank {} of {}",
                self.rank(),
                self.label
            )));
        }
        Ok(())
    }

    /// Product of generator images along `w`, renormalized at every step.
    pub fn evaluate(&self, w: &Word) -> Result<ScaledMatrix> {
        self.check_word(w)?;
        evaluate_with(self.dim, w, |l| self.image(l))
    }

    /// Spectral data of `rho(w)` with the gap computed from the second
    /// exterior power, which stays accurate when the gap is far below
    /// machine precision.
    ///
    /// Conjugated words `u c u^{-1}` are handled through the cyclically
    /// reduced core `c`, whose product is far better conditioned.
    pub fn spectral_data(&self, w: &Word) -> Result<SpectralData> {
        let (u, core) = w.cyclic_reduction();
        if u.is_identity() {
            return self.core_spectral_data(w);
        }
        let mut sd = self.core_spectral_data(&core)?;
        let ru = self.evaluate(&u)?.matrix;
        let ru_inv = self.evaluate(&u.invert())?.matrix;
        let v = &ru * &sd.attracting;
        let phi = ru_inv.tr_mul(&sd.repelling_covector);
        sd.attracting = v;
        sd.repelling_covector = phi;
        spectral::normalize_sign(&mut sd.attracting);
        spectral::normalize_sign(&mut sd.repelling_covector);
        let sm = self.evaluate(w)?;
        sd.scaled_top = sd.signed_top * (sd.log_radius - sm.log_scale).exp();
        Ok(sd)
    }

    fn core_spectral_data(&self, w: &Word) -> Result<SpectralData> {
        let sm = self.evaluate(w)?;
        let mut sd = spectral::dominant_eigendata(&sm).map_err(|e| match e {
            LabError::ProximalityFailure(msg) => LabError::ProximalityFailure(format!("{w}: {msg}")),
            other => other,
        })?;
        let log_top_two = match &self.ext2 {
            None if self.dim == 2 => Some(0.0),
            None => None,
            Some((g2, i2)) => {
                let m2 = evaluate_with(g2[0].nrows(), w, |l| {
                    if l.is_inverse() {
                        &i2[l.index()]
                    } else {
                        &g2[l.index()]
                    }
                })?;
                Some(m2.log_scale + spectral::spectral_radius(&m2.matrix).ln())
            }
        };
        if let Some(lt) = log_top_two {
            let log_gap = (lt - 2.0 * sd.log_radius).min(0.0);
            sd.log_gap = log_gap;
            sd.gap = log_gap.exp();
        }
        Ok(sd)
    }

    pub fn log_spectral_radius(&self, w: &Word) -> Result<f64> {
        Ok(self.spectral_data(w)?.log_radius)
    }

    /// `g rho g^{-1}`.
    pub fn conjugate(&self, g: &DMatrix<f64>) -> Result<Self> {
        let gi = g
            .clone()
            .try_inverse()
            .ok_or_else(|| LabError::InvalidArgument("singular conjugator".into()))?;
        Representation::new(
            format!("{}^g", self.label),
            self.gens.iter().map(|m| g * m * &gi).collect(),
        )
    }

    /// Composition with the irreducible `m`-dimensional representation of
    /// `SL_2(R)`. Requires a two-dimensional representation.
    pub fn symmetric_power(&self, m: usize) -> Result<Self> {
        if self.dim != 2 {
            return Err(LabError::InvalidArgument(format!(
                "symmetric power needs a 2-dimensional representation, {} has dimension {}",
                self.label, self.dim
            )));
        }
        let gens = self.gens.iter().map(|g| symmetric_power(g, m)).collect::<Result<Vec<_>>>()?;
        Representation::new(format!("tau{m}({})", self.label), gens)
    }
}

pub(crate) fn evaluate_with<'a>(
    dim: usize,
    w: &Word,
    image: impl Fn(Letter) -> &'a DMatrix<f64>,
) -> Result<ScaledMatrix> {
    let mut acc = ScaledMatrix::identity(dim);
    for &l in w.letters() {
        acc.matrix = &acc.matrix * image(l);
        if !acc.renormalize() {
            return Err(LabError::SingularProduct(w.to_string()));
        }
    }
    Ok(acc)
}

/// Matrix of `g` acting on degree-`(m-1)` homogeneous polynomials in the
/// monomial basis `x^{m-1-i} y^i`.
pub fn symmetric_power(g: &DMatrix<f64>, m: usize) -> Result<DMatrix<f64>> {
    if g.nrows() != 2 || g.ncols() != 2 {
        return Err(LabError::InvalidArgument("symmetric power of a non-2x2 matrix".into()));
    }
    if m == 0 {
        return Err(LabError::InvalidArgument("symmetric power dimension must be >= 1".into()));
    }
    let d = m - 1;
    // images of the basis vectors, as coefficient lists in powers of y
    let col_x = [g[(0, 0)], g[(1, 0)]];
    let col_y = [g[(0, 1)], g[(1, 1)]];
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        let mut poly = vec![1.0];
        for _ in 0..(d - i) {
            poly = poly_mul(&poly, &col_x);
        }
        for _ in 0..i {
            poly = poly_mul(&poly, &col_y);
        }
        for (j, c) in poly.into_iter().enumerate() {
            out[(j, i)] = c;
        }
    }
    Ok(out)
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            r[i + j] += a * b;
        }
    }
    r
}

/// Second exterior power in the basis `e_i ^ e_j`, `i < j`, lexicographic.
pub fn exterior_square(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let n = pairs.len();
    DMatrix::from_fn(n, n, |r, c| {
        let (i, j) = pairs[r];
        let (k, l) = pairs[c];
        a[(i, k)] * a[(j, l)] - a[(i, l)] * a[(j, k)]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schottky() -> Representation {
        Representation::new(
            "s",
            vec![
                DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0 / 3.0]),
                DMatrix::from_row_slice(2, 2, &[1.25, 0.75, 0.75, 1.25]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_word() {
        let sm = schottky().evaluate(&Word::identity()).unwrap();
        assert_eq!(sm.matrix, DMatrix::identity(2, 2));
        assert_eq!(sm.log_scale, 0.0);
    }

    #[test]
    fn power_of_diagonal() {
        let sm = schottky().evaluate(&"aa".parse().unwrap()).unwrap();
        assert!((sm.log_scale + sm.matrix[(0, 0)].ln() - 9f64.ln()).abs() < 1e-14);
        assert!((sm.true_matrix()[(1, 1)] - 1.0 / 9.0).abs() < 1e-14);
        assert!(sm.matrix.amax() <= 2.0 && sm.matrix.amax() >= 0.5);
    }

    #[test]
    fn word_times_inverse() {
        let rho = schottky();
        let w: Word = "abAbbaB".parse().unwrap();
        let p = rho.evaluate(&w).unwrap().true_matrix() * rho.evaluate(&w.invert()).unwrap().true_matrix();
        assert!((p - DMatrix::identity(2, 2)).amax() < 1e-10);
    }

    #[test]
    fn determinant_normalized() {
        let rho = Representation::new("d", vec![DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0])]).unwrap();
        assert!((rho.generators()[0].determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sym_power_examples() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 7.0]);
        assert_eq!(symmetric_power(&g, 2).unwrap(), g);
        let l: f64 = 1.7;
        let d = DMatrix::from_row_slice(2, 2, &[l, 0.0, 0.0, 1.0 / l]);
        let t3 = symmetric_power(&d, 3).unwrap();
        let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![l * l, 1.0, 1.0 / (l * l)]));
        assert!((t3 - expect).amax() < 1e-14);
    }

    #[test]
    fn exterior_square_of_sl2_is_det() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 7.0]);
        let e = exterior_square(&g);
        assert_eq!(e.nrows(), 1);
        assert!((e[(0, 0)] - g.determinant()).abs() < 1e-14);
    }

    #[test]
    fn wrong_rank_word_rejected() {
        assert!(schottky().evaluate(&"c".parse().unwrap()).is_err());
    }
}
