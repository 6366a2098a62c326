//! Comass estimation: sup of |a(frame)| over orthonormal k-frames, by random
//! Gaussian sampling plus projected-gradient ascent with QR retraction on the
//! Stiefel manifold. Returns a lower bound together with the maximizing frame.

use super::{evaluate_on_frame, pullback, DifferentialForm, MetricAtPoint, TangentFrame};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct ComassEstimate {
    /// Best |a(frame)| found (after refinement).
    pub value: f64,
    /// Maximizing orthonormal frame, in the original (metric) coordinates.
    pub frame: Vec<DVector<f64>>,
    /// Max |a(frame)| over the raw samples only (no ascent).
    pub raw_max: f64,
    pub samples: usize,
}

/// Lower bound on the comass of a constant-coefficient form with respect to
/// `g`, from `samples` random orthonormal frames refined by `refine_steps`
/// ascent iterations on the best candidates.
pub fn comass_estimate(
    a: &DifferentialForm,
    g: &MetricAtPoint,
    samples: usize,
    refine_steps: usize,
    rng: &mut impl Rng,
) -> Result<ComassEstimate> {
    if samples == 0 {
        return Err(Error::domain("comass estimation needs samples >= 1"));
    }
    if !a.is_constant() {
        return Err(Error::domain(
            "comass estimation works on constant forms; freeze fields with at_point first",
        ));
    }
    if g.dim() != a.ambient_dim() {
        return Err(Error::DimensionMismatch(g.dim(), a.ambient_dim()));
    }
    let n = a.ambient_dim();
    let k = a.degree();

    // g-orthonormal frames are L^{-T} * (Euclidean-orthonormal frames) for
    // g = L L^T, so optimize the pulled-back form in Euclidean coordinates.
    let chol = g
        .matrix()
        .clone()
        .cholesky()
        .ok_or(Error::DegenerateMetric {
            min_eigenvalue: g.min_eigenvalue(),
        })?;
    let l_inv_t = chol
        .l()
        .transpose()
        .try_inverse()
        .ok_or(Error::DegenerateMetric {
            min_eigenvalue: g.min_eigenvalue(),
        })?;
    let form = pullback(&l_inv_t, a)?;
    let origin = vec![0.0; n];

    let eval = |w: &DMatrix<f64>| -> f64 {
        let frame = TangentFrame::from_columns(w);
        evaluate_on_frame(&form, &frame, &origin).expect("shapes fixed")
    };

    let mut best_val = 0.0;
    let mut best_frame = orthonormalize(&DMatrix::identity(n, k));
    let mut raw_max = 0.0f64;
    for _ in 0..samples {
        let w = orthonormalize(&gaussian(n, k, rng));
        let v = eval(&w).abs();
        raw_max = raw_max.max(v);
        if v > best_val {
            best_val = v;
            best_frame = w;
        }
    }

    // ascent refinement on the best sampled frame
    let mut w = best_frame.clone();
    let mut f = eval(&w);
    let mut step = 0.1;
    for _ in 0..refine_steps {
        let grad = gradient(&form, &w, &origin);
        let dir = if f >= 0.0 { grad } else { -grad };
        let cand = orthonormalize(&(&w + dir * step));
        let fc = eval(&cand);
        if fc.abs() > f.abs() {
            w = cand;
            f = fc;
            step *= 1.5;
        } else {
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
    }
    if f.abs() > best_val {
        best_val = f.abs();
        best_frame = w;
    }

    // map the maximizer back to g-orthonormal coordinates
    let back = &l_inv_t * &best_frame;
    let frame = (0..k).map(|j| back.column(j).into_owned()).collect();
    Ok(ComassEstimate {
        value: best_val,
        frame,
        raw_max,
        samples,
    })
}

fn gaussian(n: usize, k: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, k, |_, _| rng.sample(StandardNormal))
}

fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    // modified Gram-Schmidt with two passes; falls back to fresh directions
    // on rank deficiency (measure zero for Gaussian input)
    let (n, k) = (m.nrows(), m.ncols());
    let mut q = m.clone();
    for j in 0..k {
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.column(i).into_owned();
                let proj = q.column(j).dot(&qi);
                let mut col = q.column_mut(j);
                col.axpy(-proj, &qi, 1.0);
            }
        }
        let norm = q.column(j).norm();
        if norm < 1e-300 {
            let mut col = q.column_mut(j);
            col.fill(0.0);
            col[j % n] = 1.0;
        } else {
            let mut col = q.column_mut(j);
            col /= norm;
        }
    }
    q
}

/// Euclidean gradient of W -> a(w_1, ..., w_k) via cofactor evaluations.
fn gradient(a: &DifferentialForm, w: &DMatrix<f64>, p: &[f64]) -> DMatrix<f64> {
    let (n, k) = (w.nrows(), w.ncols());
    let mut grad = DMatrix::zeros(n, k);
    let mut work = w.clone();
    for j in 0..k {
        for m in 0..n {
            for r in 0..n {
                work[(r, j)] = if r == m { 1.0 } else { 0.0 };
            }
            let frame = TangentFrame::from_columns(&work);
            grad[(m, j)] = evaluate_on_frame(a, &frame, p).expect("shapes fixed");
        }
        for r in 0..n {
            work[(r, j)] = w[(r, j)];
        }
    }
    grad
}
