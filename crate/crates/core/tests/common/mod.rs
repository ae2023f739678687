#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use pressure_lab::kleinian::KleinianRep;
use pressure_lab::rep::Representation;

pub fn mat(n: usize, x: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, x)
}

/// a = diag(3, 1/3), b = [[5/4, 3/4], [3/4, 5/4]]. The commutator is
/// parabolic, so this group is a punctured-torus lattice, not Schottky.
pub fn cusped_example() -> Representation {
    Representation::new("cusped", vec![mat(2, &[3.0, 0.0, 0.0, 1.0 / 3.0]), mat(2, &[1.25, 0.75, 0.75, 1.25])]).unwrap()
}

/// a = diag(3, 1/3), b = [[5/3, 4/3], [4/3, 5/3]]: Schottky with disks
/// |x| >= 3, [-1/3, 1/3], [1/2, 2], [-2, -1/2].
pub fn schottky() -> Representation {
    Representation::new("schottky", vec![mat(2, &[3.0, 0.0, 0.0, 1.0 / 3.0]), mat(2, &[5.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0, 5.0 / 3.0])])
        .unwrap()
}

/// A second Schottky group with different multipliers and axes.
pub fn schottky2() -> Representation {
    Representation::new("schottky2", vec![mat(2, &[4.0, 0.0, 0.0, 0.25]), mat(2, &[2.125, 1.875, 1.875, 2.125])]).unwrap()
}

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn kleinian_schottky() -> KleinianRep {
    KleinianRep::new(
        "k",
        vec![Matrix2::new(c(3.0), c(0.0), c(0.0), c(1.0 / 3.0)), Matrix2::new(c(5.0 / 3.0), c(4.0 / 3.0), c(4.0 / 3.0), c(5.0 / 3.0))],
    )
    .unwrap()
}
