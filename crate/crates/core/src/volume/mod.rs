//! Ball-volume comparison laboratory: closed-form solutions of the
//! comparison oscillator F'' + K F = 0, the associated alpha integral,
//! space-form ball volumes, and margin checks of measured mesh ball volumes
//! against them, plus the covering-argument diameter bound.

pub mod mesh;

pub use mesh::MeshedSubmanifold;

use crate::error::{Error, Result};

/// Admissibility of the boundary time t for curvature bound K: t must stay
/// below pi / sqrt(K) when K > 0. For K <= 0 no intrinsic cap exists here;
/// the radius is whatever the caller supplies.
fn check_admissible(k_curv: f64, t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::domain("boundary time must be positive"));
    }
    if k_curv > 0.0 {
        let limit = std::f64::consts::PI / k_curv.sqrt();
        if t >= limit {
            return Err(Error::domain(format!(
                "t = {t} is at or beyond pi/sqrt(K) = {limit}"
            )));
        }
    }
    Ok(())
}

/// Solution of F'' + K F = 0 with F(0) = 0, F(t) = 1, evaluated at theta.
pub fn comparison_f(k_curv: f64, t: f64, theta: f64) -> Result<f64> {
    check_admissible(k_curv, t)?;
    if !(0.0..=t).contains(&theta) {
        return Err(Error::domain("theta must lie in [0, t]"));
    }
    if k_curv > 0.0 {
        let s = k_curv.sqrt();
        Ok((s * theta).sin() / (s * t).sin())
    } else if k_curv < 0.0 {
        let s = (-k_curv).sqrt();
        Ok((s * theta).sinh() / (s * t).sinh())
    } else {
        Ok(theta / t)
    }
}

/// Adaptive Simpson quadrature.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)] // recursion state, private helper
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                + rec(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, whole, m, fm, tol, 40)
}

/// alpha(t) = integral over [0, t] of F_t(theta)^{k-1} d theta; exactly t/k
/// for K = 0.
pub fn alpha(k_curv: f64, k_dim: usize, t: f64) -> Result<f64> {
    if k_dim < 1 {
        return Err(Error::domain("dimension k must be >= 1"));
    }
    check_admissible(k_curv, t)?;
    if k_curv == 0.0 {
        return Ok(t / k_dim as f64);
    }
    let f = |theta: f64| {
        comparison_f(k_curv, t, theta)
            .unwrap()
            .powi(k_dim as i32 - 1)
    };
    Ok(adaptive_simpson(&f, 0.0, t, 1e-13))
}

/// Gamma function on the half-integer lattice (k/2 for k >= 1).
fn gamma_half(k: usize) -> f64 {
    // gamma(1/2) = sqrt(pi), gamma(1) = 1, gamma(x + 1) = x gamma(x)
    let mut x = if k % 2 == 1 {
        std::f64::consts::PI.sqrt()
    } else {
        1.0
    };
    let mut arg = if k % 2 == 1 { 0.5 } else { 1.0 };
    while 2.0 * arg < k as f64 {
        x *= arg;
        arg += 1.0;
    }
    x
}

/// Surface measure of the unit (k-1)-sphere: 2 pi^{k/2} / gamma(k/2).
pub fn unit_sphere_measure(k_dim: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(k_dim as f64 / 2.0) / gamma_half(k_dim)
}

/// Volume of a ball of radius r in the k-dimensional space form of constant
/// curvature K: vol(S^{k-1}) * integral of sn_K(rho)^{k-1}.
pub fn space_form_ball_volume(k_curv: f64, k_dim: usize, r: f64) -> Result<f64> {
    if k_dim < 1 {
        return Err(Error::domain("dimension k must be >= 1"));
    }
    check_admissible(k_curv, r)?;
    let measure = unit_sphere_measure(k_dim);
    let sn: Box<dyn Fn(f64) -> f64> = if k_curv > 0.0 {
        let s = k_curv.sqrt();
        Box::new(move |rho: f64| (s * rho).sin() / s)
    } else if k_curv < 0.0 {
        let s = (-k_curv).sqrt();
        Box::new(move |rho: f64| (s * rho).sinh() / s)
    } else {
        Box::new(|rho: f64| rho)
    };
    if k_curv == 0.0 {
        return Ok(measure * r.powi(k_dim as i32) / k_dim as f64);
    }
    let f = |rho: f64| sn(rho).powi(k_dim as i32 - 1);
    Ok(measure * adaptive_simpson(&f, 0.0, r, 1e-13))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallMode {
    /// Ambient-ball volume vol(L ∩ B(p, r)) with Euclidean ambient distance.
    Extrinsic,
    /// Induced-metric ball volume vol{ x : d_L(x) <= r } via the edge graph.
    Intrinsic,
}

#[derive(Debug, Clone)]
pub struct MarginReport {
    pub measured: f64,
    pub comparison: f64,
    pub margin: f64,
    pub allowance: f64,
    pub pass: bool,
}

/// Compare the measured ball volume on a mesh against the space-form
/// baseline: margin = measured - comparison, pass iff margin >= -allowance.
pub fn verify_ball_comparison(
    mesh: &MeshedSubmanifold,
    p: usize,
    r: f64,
    k_curv: f64,
    mode: BallMode,
    allowance: f64,
) -> Result<MarginReport> {
    let measured = match mode {
        BallMode::Extrinsic => mesh.extrinsic_ball_volume(&mesh.vertices[p].clone(), r)?,
        BallMode::Intrinsic => mesh.intrinsic_ball_volume(p, r)?,
    };
    let comparison = space_form_ball_volume(k_curv, mesh.face_dim, r)?;
    let margin = measured - comparison;
    Ok(MarginReport {
        measured,
        comparison,
        margin,
        allowance,
        pass: margin >= -allowance,
    })
}

/// Covering-argument diameter bound 4 r N with N = v / epsilon.
pub fn diameter_bound(v: f64, epsilon: f64, r: f64) -> Result<f64> {
    if !(v > 0.0 && epsilon > 0.0 && r > 0.0) {
        return Err(Error::domain("v, epsilon, r must all be positive"));
    }
    Ok(4.0 * r * (v / epsilon))
}
