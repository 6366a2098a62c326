//! Kahler potentials on the C^2 / {+-1} resolution chart: the resolution
//! potential f_t, its Hermitian metric, smooth gluing to the Euclidean
//! potential over an annulus, positivity scans of the glued form, and the
//! constant hyperkahler 2-form triple on R^4.
//!
//! Convention: the resolution parameter t here equals a^2 of the common
//! a-convention, so the potential is
//!
//!   f_t(u) = sqrt(u^2 + t^2) + t log u - t log(sqrt(u^2 + t^2) + t),
//!
//! which gives f_t'(u) = sqrt(u^2 + t^2) / u and det(metric) = 1 on the
//! chart. u = |z1|^2 + |z2|^2.

use crate::error::{Error, Result};
use crate::forms::{kahler_form_from_hermitian, DifferentialForm, MetricAtPoint};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// Resolution-parameter potential; t > 0, with t = 0 degenerating exactly to
/// the Euclidean potential u.
#[derive(Debug, Clone, Copy)]
pub struct EguchiHansonPotential {
    pub t: f64,
}

impl EguchiHansonPotential {
    pub fn new(t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::domain("resolution parameter t must be nonnegative"));
        }
        Ok(EguchiHansonPotential { t })
    }

    pub fn value(&self, u: f64) -> Result<f64> {
        eh_potential(u, self.t)
    }

    /// f_t'(u) = sqrt(u^2 + t^2) / u.
    pub fn derivative(&self, u: f64) -> Result<f64> {
        if u <= 0.0 {
            return Err(Error::domain("potential derivative needs u > 0"));
        }
        Ok((u * u + self.t * self.t).sqrt() / u)
    }

    /// f_t''(u) = -t^2 / (u^2 sqrt(u^2 + t^2)).
    pub fn second_derivative(&self, u: f64) -> Result<f64> {
        if u <= 0.0 {
            return Err(Error::domain("potential derivative needs u > 0"));
        }
        let s = (u * u + self.t * self.t).sqrt();
        Ok(-self.t * self.t / (u * u * s))
    }
}

/// The potential value; rejects u <= 0 (log singularity at the chart edge).
pub fn eh_potential(u: f64, t: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::domain(format!("potential needs u > 0, got {u}")));
    }
    if !(t >= 0.0) {
        return Err(Error::domain("resolution parameter t must be nonnegative"));
    }
    if t == 0.0 {
        return Ok(u);
    }
    let s = (u * u + t * t).sqrt();
    Ok(s + t * u.ln() - t * (s + t).ln())
}

/// Hermitian metric g_{i jbar} = f' delta_ij + f'' zbar_i z_j of the
/// resolution potential at z in C^2 minus the origin.
pub fn eh_kahler_form(z: [Complex64; 2], t: f64) -> Result<DMatrix<Complex64>> {
    let u = z[0].norm_sqr() + z[1].norm_sqr();
    if u == 0.0 {
        return Err(Error::domain(
            "z = 0 is outside the chart (the exceptional sphere is not covered)",
        ));
    }
    let pot = EguchiHansonPotential::new(t)?;
    let fp = pot.derivative(u)?;
    let fpp = pot.second_derivative(u)?;
    let mut g = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
    for i in 0..2 {
        for j in 0..2 {
            let mut v = z[i].conj() * z[j] * fpp;
            if i == j {
                v += Complex64::new(fp, 0.0);
            }
            g[(i, j)] = v;
        }
    }
    Ok(g)
}

/// Eigenvalues of a 2x2 Hermitian matrix, ascending.
pub fn hermitian2_eigenvalues(g: &DMatrix<Complex64>) -> [f64; 2] {
    let tr = g[(0, 0)].re + g[(1, 1)].re;
    let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).re;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    [(tr - disc) / 2.0, (tr + disc) / 2.0]
}

/// Smooth monotone cutoff: 1 on (-inf, r_inner], 0 on [r_outer, inf), all
/// derivatives vanishing at both ends (exp(-1/x) gluing).
#[derive(Debug, Clone, Copy)]
pub struct SmoothCutoff {
    pub r_inner: f64,
    pub r_outer: f64,
}

impl SmoothCutoff {
    pub fn new(r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(0.0 < r_inner && r_inner < r_outer) {
            return Err(Error::domain("need 0 < r_inner < r_outer"));
        }
        Ok(SmoothCutoff { r_inner, r_outer })
    }

    pub fn value(&self, u: f64) -> f64 {
        let s = (self.r_outer - u) / (self.r_outer - self.r_inner);
        smoothstep(s)
    }
}

fn bump(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = bump(s);
        a / (a + bump(1.0 - s))
    }
}

/// Glued-potential data: resolution parameter, annulus, cutoff profile.
#[derive(Debug, Clone, Copy)]
pub struct GluedKahlerData {
    pub t: f64,
    pub cutoff: SmoothCutoff,
}

impl GluedKahlerData {
    pub fn new(t: f64, r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::domain("resolution parameter t must be nonnegative"));
        }
        Ok(GluedKahlerData {
            t,
            cutoff: SmoothCutoff::new(r_inner, r_outer)?,
        })
    }

    /// chi(u) f_t(u) + (1 - chi(u)) u: equals f_t inside the annulus and u
    /// outside it.
    pub fn glued_potential(&self, u: f64) -> Result<f64> {
        let chi = self.cutoff.value(u);
        if chi == 0.0 {
            return Ok(u);
        }
        let f = eh_potential(u, self.t)?;
        if chi == 1.0 {
            return Ok(f);
        }
        Ok(chi * f + (1.0 - chi) * u)
    }

    /// Complex Hessian of the glued potential at z, by central second
    /// differences with step h in the four real coordinates.
    pub fn glued_hessian(&self, z: [Complex64; 2], h: f64) -> Result<DMatrix<Complex64>> {
        let p = [z[0].re, z[0].im, z[1].re, z[1].im];
        let pot = |q: &[f64; 4]| -> Result<f64> {
            let u = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
            self.glued_potential(u)
        };
        let mut hess = [[0.0f64; 4]; 4];
        let f0 = pot(&p)?;
        for a in 0..4 {
            for b in a..4 {
                let v = if a == b {
                    let mut pp = p;
                    pp[a] += h;
                    let fp = pot(&pp)?;
                    pp[a] = p[a] - h;
                    let fm = pot(&pp)?;
                    (fp - 2.0 * f0 + fm) / (h * h)
                } else {
                    let mut pp = p;
                    pp[a] += h;
                    pp[b] += h;
                    let fpp = pot(&pp)?;
                    pp[b] = p[b] - h;
                    let fpm = pot(&pp)?;
                    pp[a] = p[a] - h;
                    pp[b] = p[b] + h;
                    let fmp = pot(&pp)?;
                    pp[b] = p[b] - h;
                    let fmm = pot(&pp)?;
                    (fpp - fpm - fmp + fmm) / (4.0 * h * h)
                };
                hess[a][b] = v;
                hess[b][a] = v;
            }
        }
        // h_{j kbar} = 1/4 [(H_{x_j x_k} + H_{y_j y_k})
        //              + i (H_{x_j y_k} - H_{y_j x_k})]
        let idx = |j: usize, re: bool| if re { 2 * j } else { 2 * j + 1 };
        let mut out = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
        for j in 0..2 {
            for k in 0..2 {
                let re =
                    (hess[idx(j, true)][idx(k, true)] + hess[idx(j, false)][idx(k, false)]) / 4.0;
                let im =
                    (hess[idx(j, true)][idx(k, false)] - hess[idx(j, false)][idx(k, true)]) / 4.0;
                out[(j, k)] = Complex64::new(re, im);
            }
        }
        Ok(out)
    }
}

/// Grid specification for the positivity scan.
#[derive(Debug, Clone)]
pub struct ScanGrid {
    pub u_samples: usize,
    pub directions: usize,
    pub hessian_step_scale: f64,
    pub seed: u64,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            u_samples: 60,
            directions: 8,
            hessian_step_scale: 1e-5,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanRecord {
    pub u: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub min_eigenvalue: f64,
    pub worst_point: [f64; 4],
    pub pass: bool,
    pub records: Vec<ScanRecord>,
}

/// Scan the glued form for positive definiteness over u in
/// [r_inner / 2, 2 r_outer] and a set of directions on the unit 3-sphere.
/// Failure is a report, not an error.
pub fn positivity_scan(data: &GluedKahlerData, grid: &ScanGrid) -> Result<ScanReport> {
    use rand::{Rng, SeedableRng};
    let u_lo = data.cutoff.r_inner / 2.0;
    let u_hi = 2.0 * data.cutoff.r_outer;
    let mut dirs: Vec<[f64; 4]> = vec![
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.5, 0.5, 0.5, 0.5],
    ];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(grid.seed);
    while dirs.len() < grid.directions.max(4) {
        let mut d = [0.0f64; 4];
        let mut norm2 = 0.0;
        for x in d.iter_mut() {
            *x = rng.sample::<f64, _>(rand_distr::StandardNormal);
            norm2 += *x * *x;
        }
        if norm2 > 1e-12 {
            let norm = norm2.sqrt();
            for x in d.iter_mut() {
                *x /= norm;
            }
            dirs.push(d);
        }
    }
    let us: Vec<f64> = (0..grid.u_samples)
        .map(|i| {
            let f = i as f64 / (grid.u_samples - 1).max(1) as f64;
            u_lo * (u_hi / u_lo).powf(f)
        })
        .collect();

    let evals: Vec<(f64, f64, [f64; 4])> = us
        .par_iter()
        .map(|&u| {
            let r = u.sqrt();
            let mut worst = f64::INFINITY;
            let mut worst_pt = [r, 0.0, 0.0, 0.0];
            for d in &dirs {
                let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3]).sqrt();
                let p = [
                    r * d[0] / norm,
                    r * d[1] / norm,
                    r * d[2] / norm,
                    r * d[3] / norm,
                ];
                let z = [Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3])];
                let h = grid.hessian_step_scale * u.sqrt().max(1.0);
                let hess = data.glued_hessian(z, h).expect("u > 0 on the scan grid");
                let eig = hermitian2_eigenvalues(&hess);
                if eig[0] < worst {
                    worst = eig[0];
                    worst_pt = p;
                }
            }
            (u, worst, worst_pt)
        })
        .collect();

    let mut min_eigenvalue = f64::INFINITY;
    let mut worst_point = [0.0; 4];
    let mut records = Vec::with_capacity(evals.len());
    for (u, e, p) in evals {
        if e < min_eigenvalue {
            min_eigenvalue = e;
            worst_point = p;
        }
        records.push(ScanRecord {
            u,
            min_eigenvalue: e,
        });
    }
    Ok(ScanReport {
        min_eigenvalue,
        worst_point,
        pass: min_eigenvalue > 0.0,
        records,
    })
}

/// Largest t (to `tol`) for which the positivity scan passes on the given
/// annulus, found by doubling to a failing bracket and bisecting.
pub fn bisect_positivity_threshold(
    r_inner: f64,
    r_outer: f64,
    grid: &ScanGrid,
    tol: f64,
) -> Result<f64> {
    let passes = |t: f64| -> Result<bool> {
        let data = GluedKahlerData::new(t, r_inner, r_outer)?;
        Ok(positivity_scan(&data, grid)?.pass)
    };
    let lo0 = 0.01;
    if !passes(lo0)? {
        return Err(Error::domain("no passing lower bracket at t = 0.01"));
    }
    let mut lo = lo0;
    let mut hi = lo0;
    while passes(hi)? {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::domain("positivity never fails below t = 1000"));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Conformal factor c(p) > 0 such that scaling the metric to c * g gives the
/// 2-form `eta` pointwise norm sqrt(2): c = ||eta||_g / sqrt(2).
pub fn normalize_to_sqrt2(g: &MetricAtPoint, eta: &DifferentialForm, p: &[f64]) -> Result<f64> {
    if eta.degree() != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            got: eta.degree(),
        });
    }
    let norm = crate::forms::norm_at(eta, g, p)?;
    if norm <= 1e-14 {
        return Err(Error::degenerate(format!(
            "form norm {norm:.3e} vanishes at {p:?}"
        )));
    }
    Ok(norm / std::f64::consts::SQRT_2)
}

/// Constant 2-form triple on R^4 with omega_i ∧ omega_j = 2 delta_ij vol.
#[derive(Debug, Clone)]
pub struct HyperkahlerTriple {
    pub omega1: DifferentialForm,
    pub omega2: DifferentialForm,
    pub omega3: DifferentialForm,
}

impl HyperkahlerTriple {
    /// The convention fixed throughout this crate (0-indexed coordinates):
    /// omega1 = dx0∧dx1 + dx2∧dx3, omega2 = dx0∧dx2 - dx1∧dx3,
    /// omega3 = dx0∧dx3 + dx1∧dx2.
    pub fn standard() -> Self {
        let omega1 = DifferentialForm::constant(4, 2, &[(&[0, 1], 1.0), (&[2, 3], 1.0)]).unwrap();
        let omega2 = DifferentialForm::constant(4, 2, &[(&[0, 2], 1.0), (&[1, 3], -1.0)]).unwrap();
        let omega3 = DifferentialForm::constant(4, 2, &[(&[0, 3], 1.0), (&[1, 2], 1.0)]).unwrap();
        HyperkahlerTriple {
            omega1,
            omega2,
            omega3,
        }
    }

    pub fn forms(&self) -> [&DifferentialForm; 3] {
        [&self.omega1, &self.omega2, &self.omega3]
    }

    /// omega_i ∧ omega_j = 2 delta_ij vol, exactly on constant coefficients.
    pub fn verify_relations(&self) -> bool {
        let vol = DifferentialForm::basis(4, &[0, 1, 2, 3]).unwrap();
        let forms = self.forms();
        for i in 0..3 {
            for j in 0..3 {
                let w = crate::forms::wedge(forms[i], forms[j]).unwrap();
                let expected = if i == j {
                    vol.scale(2.0)
                } else {
                    vol.scale(0.0)
                };
                if w.max_coeff_distance(&expected) != 0.0 {
                    return false;
                }
            }
        }
        true
    }
}

/// The glued Kahler 2-form on the chart R^4 (interleaved coordinates
/// (x1, y1, x2, y2)) frozen at the given point, from the numeric Hessian of
/// the glued potential.
pub fn glued_kahler_2form_at(
    data: &GluedKahlerData,
    p: &[f64],
    hessian_step_scale: f64,
) -> Result<DifferentialForm> {
    let z = [Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3])];
    let u = z[0].norm_sqr() + z[1].norm_sqr();
    let h = hessian_step_scale * u.sqrt().max(1.0);
    let hess = data.glued_hessian(z, h)?;
    Ok(kahler_form_from_hermitian(&hess))
}
