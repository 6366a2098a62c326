//! Complex-valued forms as (real, imaginary) pairs, for holomorphic volume
//! forms and Kahler forms of Hermitian matrices on interleaved real charts
//! (z_j = x_j + i*y_j stored as coordinates (..., x_j, y_j, ...)).

use super::{wedge, DifferentialForm};
use crate::error::Result;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// A complex form a = re + i*im.
#[derive(Debug, Clone)]
pub struct ComplexForm {
    pub re: DifferentialForm,
    pub im: DifferentialForm,
}

impl ComplexForm {
    pub fn from_real(re: DifferentialForm) -> Self {
        let im = DifferentialForm::zero(re.ambient_dim(), re.degree());
        ComplexForm { re, im }
    }

    pub fn wedge(&self, other: &ComplexForm) -> Result<ComplexForm> {
        let re = wedge(&self.re, &other.re)?.sub(&wedge(&self.im, &other.im)?)?;
        let im = wedge(&self.re, &other.im)?.add(&wedge(&self.im, &other.re)?)?;
        Ok(ComplexForm { re, im })
    }

    /// Multiplication by i.
    pub fn times_i(&self) -> ComplexForm {
        ComplexForm {
            re: self.im.neg(),
            im: self.re.clone(),
        }
    }

    pub fn scale(&self, s: Complex64) -> ComplexForm {
        ComplexForm {
            re: self
                .re
                .scale(s.re)
                .sub(&self.im.scale(s.im))
                .expect("same shape"),
            im: self
                .re
                .scale(s.im)
                .add(&self.im.scale(s.re))
                .expect("same shape"),
        }
    }

    pub fn conj(&self) -> ComplexForm {
        ComplexForm {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }
}

/// dz_j = dx_{2j} + i dx_{2j+1} on R^{2m} with interleaved coordinates.
pub fn interleaved_dz(n_complex: usize, j: usize) -> ComplexForm {
    let n = 2 * n_complex;
    ComplexForm {
        re: DifferentialForm::dx(n, (2 * j) as u8),
        im: DifferentialForm::dx(n, (2 * j + 1) as u8),
    }
}

/// dz_1 ∧ ... ∧ dz_m on R^{2m} (interleaved chart).
pub fn holomorphic_volume_form(n_complex: usize) -> ComplexForm {
    let mut acc = interleaved_dz(n_complex, 0);
    for j in 1..n_complex {
        acc = acc
            .wedge(&interleaved_dz(n_complex, j))
            .expect("degrees fit");
    }
    acc
}

/// Real Kahler 2-form of a Hermitian matrix h on C^m, on the interleaved
/// chart R^{2m}: omega(u, v) = -Im(sum_jk h_jk u_j conj(v_k)). For h = I this
/// is sum_j dx_j ∧ dy_j, and the induced real metric is Re of the same
/// sesquilinear form (Euclidean for h = I).
pub fn kahler_form_from_hermitian(h: &DMatrix<Complex64>) -> DifferentialForm {
    let m = h.nrows();
    assert_eq!(m, h.ncols());
    let n = 2 * m;
    let complex_basis = |a: usize| -> Vec<Complex64> {
        // real coordinate a corresponds to complex vector e_{a/2} or i*e_{a/2}
        let mut v = vec![Complex64::new(0.0, 0.0); m];
        if a.is_multiple_of(2) {
            v[a / 2] = Complex64::new(1.0, 0.0);
        } else {
            v[a / 2] = Complex64::new(0.0, 1.0);
        }
        v
    };
    let herm = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..m {
            for k in 0..m {
                acc += h[(j, k)] * u[j] * v[k].conj();
            }
        }
        acc
    };
    let mut terms: Vec<(Vec<u8>, f64)> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let val = -herm(&complex_basis(a), &complex_basis(b)).im;
            if val != 0.0 {
                terms.push((vec![a as u8, b as u8], val));
            }
        }
    }
    let slices: Vec<(&[u8], f64)> = terms.iter().map(|(i, v)| (i.as_slice(), *v)).collect();
    DifferentialForm::constant(n, 2, &slices).expect("valid indices")
}
