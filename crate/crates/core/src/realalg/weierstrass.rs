//! Doubly periodic meromorphic evaluation on the lattice Z + tau Z: the
//! order-2 elliptic function as a symmetric truncated lattice sum with an
//! Eisenstein tail correction, plus loop integrals over horizontal circles
//! by periodic trapezoid quadrature.
//!
//! Tail correction: the truncation error of the symmetric sum is
//! sum_{|w| > N} [1/(z-w)^2 - 1/w^2] = sum_{k >= 2} (2k-1) z^{2k-2} T_{2k},
//! T_{2k} = sum_{|w| > N} w^{-2k}. The full sums b_{2k} = sum' w^{-2k} come
//! from g2, g3 via their q-series and the Laurent-coefficient recursion, so
//! T_{2k} = b_{2k} - (partial sum over |w| <= N) is computed exactly from
//! data already in hand.

use crate::error::{Error, Result};
use num_complex::Complex64;

const TAIL_TERMS: usize = 8; // corrections for k = 2..=9

/// Lattice generated by (1, tau) with a truncation radius for sums.
#[derive(Debug, Clone)]
pub struct EllipticData {
    pub tau: Complex64,
    pub trunc: usize,
}

impl EllipticData {
    pub fn new(tau: Complex64, trunc: usize) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(Error::domain("lattice parameter needs Im tau > 0"));
        }
        if trunc < 2 {
            return Err(Error::domain("truncation radius must be >= 2"));
        }
        Ok(EllipticData { tau, trunc })
    }

    /// Reduce z to the lattice cell centered at the origin.
    pub fn reduce(&self, z: Complex64) -> Complex64 {
        let b = z.im / self.tau.im;
        let a = z.re - b * self.tau.re;
        let (m, n) = (a.round(), b.round());
        z - Complex64::new(m, 0.0) - self.tau * n
    }

    pub fn prepare(&self) -> PreparedLattice {
        PreparedLattice::new(self)
    }
}

/// Divisor power sum sigma_k(n).
fn sigma(k: u32, n: u64) -> u64 {
    let mut acc = 0u64;
    for d in 1..=n {
        if n.is_multiple_of(d) {
            acc += d.pow(k);
        }
    }
    acc
}

/// g2 = (4 pi^4 / 3)(1 + 240 sum sigma_3(n) q^n),
/// g3 = (8 pi^6 / 27)(1 - 504 sum sigma_5(n) q^n), q = exp(2 pi i tau).
pub fn lattice_invariants(tau: Complex64) -> (Complex64, Complex64) {
    let q = (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * tau).exp();
    let mut e4 = Complex64::new(1.0, 0.0);
    let mut e6 = Complex64::new(1.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..=60u64 {
        qn *= q;
        if qn.norm() < 1e-300 {
            break;
        }
        e4 += 240.0 * sigma(3, n) as f64 * qn;
        e6 -= 504.0 * sigma(5, n) as f64 * qn;
    }
    let pi = std::f64::consts::PI;
    (
        (4.0 * pi.powi(4) / 3.0) * e4,
        (8.0 * pi.powi(6) / 27.0) * e6,
    )
}

/// Laurent data: b_{2k} = sum' w^{-2k} for k = 2..=K, from the recursion
/// c_2 = g2/20, c_3 = g3/28, c_k = 3/((2k+1)(k-3)) sum c_m c_{k-m}, where
/// c_k = (2k-1) b_{2k}.
fn lattice_power_sums(tau: Complex64, count: usize) -> Vec<Complex64> {
    let (g2, g3) = lattice_invariants(tau);
    let mut c = vec![Complex64::new(0.0, 0.0); count + 2];
    if count >= 1 {
        c[2] = g2 / 20.0;
    }
    if count >= 2 {
        c[3] = g3 / 28.0;
    }
    for k in 4..count + 2 {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 2..=k - 2 {
            acc += c[m] * c[k - m];
        }
        c[k] = acc * 3.0 / ((2 * k + 1) as f64 * (k - 3) as f64);
    }
    (2..count + 2).map(|k| c[k] / (2 * k - 1) as f64).collect()
}

/// Lattice points and tail data cached for repeated evaluation.
#[derive(Debug, Clone)]
pub struct PreparedLattice {
    tau: Complex64,
    trunc: usize,
    points: Vec<Complex64>,
    /// T_{2k} = b_{2k} - partial_{2k} for k = 2..=(1 + TAIL_TERMS).
    tails: Vec<Complex64>,
}

impl PreparedLattice {
    fn new(data: &EllipticData) -> Self {
        let n = data.trunc;
        let radius = n as f64;
        let q_max = (radius / data.tau.im).ceil() as i64 + 1;
        let mut points = Vec::new();
        let mut partials = vec![Complex64::new(0.0, 0.0); TAIL_TERMS];
        for q in -q_max..=q_max {
            let p_max = (radius + q.unsigned_abs() as f64 * data.tau.norm()).ceil() as i64 + 1;
            for p in -p_max..=p_max {
                if p == 0 && q == 0 {
                    continue;
                }
                let w = Complex64::new(p as f64, 0.0) + data.tau * q as f64;
                if w.norm() <= radius {
                    points.push(w);
                    // accumulate w^{-2k}
                    let inv2 = 1.0 / (w * w);
                    let mut pw = inv2 * inv2; // w^{-4}
                    for t in partials.iter_mut() {
                        *t += pw;
                        pw *= inv2;
                    }
                }
            }
        }
        let full = lattice_power_sums(data.tau, TAIL_TERMS);
        let tails: Vec<Complex64> = full.iter().zip(&partials).map(|(b, p)| b - p).collect();
        PreparedLattice {
            tau: data.tau,
            trunc: n,
            points,
            tails,
        }
    }

    pub fn lattice_point_count(&self) -> usize {
        self.points.len()
    }

    /// The sum 1/z^2 + sum_{0 < |w| <= N} [1/(z-w)^2 - 1/w^2] plus the
    /// Eisenstein tail correction; rejects z within 1e-8 of the lattice.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let data = EllipticData {
            tau: self.tau,
            trunc: self.trunc,
        };
        let zr = data.reduce(z);
        if zr.norm() < 1e-8 {
            return Err(Error::domain(format!(
                "z = {z} is within 1e-8 of a lattice point (order-2 pole)"
            )));
        }
        let mut acc = 1.0 / (zr * zr);
        for &w in &self.points {
            let d = zr - w;
            acc += 1.0 / (d * d) - 1.0 / (w * w);
        }
        // tail: sum_k (2k-1) z^{2k-2} T_{2k}
        let z2 = zr * zr;
        let mut zpow = z2; // z^{2k-2} starting at k = 2
        for (i, t) in self.tails.iter().enumerate() {
            let k = i + 2;
            acc += (2 * k - 1) as f64 * zpow * t;
            zpow *= z2;
        }
        Ok(acc)
    }

    /// Raw truncated sum without the tail correction.
    pub fn eval_raw(&self, z: Complex64) -> Result<Complex64> {
        let data = EllipticData {
            tau: self.tau,
            trunc: self.trunc,
        };
        let zr = data.reduce(z);
        if zr.norm() < 1e-8 {
            return Err(Error::domain("z is within 1e-8 of a lattice point"));
        }
        let mut acc = 1.0 / (zr * zr);
        for &w in &self.points {
            let d = zr - w;
            acc += 1.0 / (d * d) - 1.0 / (w * w);
        }
        Ok(acc)
    }
}

/// Single evaluation (prepares the lattice each call; batch users should
/// call `EllipticData::prepare` once).
pub fn weierstrass_p(z: Complex64, data: &EllipticData) -> Result<Complex64> {
    data.prepare().eval(z)
}

/// |p_N(z) - p_2N(z)|: the self-convergence indicator reported alongside
/// values.
pub fn self_convergence(z: Complex64, data: &EllipticData) -> Result<f64> {
    let a = data.prepare().eval(z)?;
    let doubled = EllipticData::new(data.tau, 2 * data.trunc)?;
    let b = doubled.prepare().eval(z)?;
    Ok((a - b).norm())
}

/// Loop integral of (p + c) over the horizontal circle {y = t} by the
/// periodic trapezoid rule (spectrally accurate for analytic integrands).
pub fn loop_integral(
    c: Complex64,
    t: f64,
    lattice: &PreparedLattice,
    quad_points: usize,
) -> Result<Complex64> {
    if quad_points < 8 {
        return Err(Error::domain("need at least 8 quadrature points"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..quad_points {
        let x = k as f64 / quad_points as f64;
        acc += lattice.eval(Complex64::new(x, t))?;
    }
    Ok(acc / quad_points as f64 + c)
}

#[derive(Debug, Clone)]
pub struct LoopReport {
    pub values: Vec<(f64, Complex64)>,
    pub max_deviation: f64,
}

/// Max pairwise deviation |I(t_i) - I(t_j)| of the loop integrals across a
/// family of heights; t must stay 0.05 away from the lattice lines y = 0, 1.
pub fn loop_integral_constancy(
    c: Complex64,
    t_values: &[f64],
    data: &EllipticData,
    quad_points: usize,
) -> Result<LoopReport> {
    for &t in t_values {
        if !(0.05..=0.95).contains(&t) {
            return Err(Error::domain(format!(
                "t = {t} is not bounded away from the pole lines by 0.05"
            )));
        }
    }
    let lattice = data.prepare();
    let values: Vec<(f64, Complex64)> = t_values
        .iter()
        .map(|&t| Ok((t, loop_integral(c, t, &lattice, quad_points)?)))
        .collect::<Result<_>>()?;
    let mut max_deviation = 0.0f64;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            max_deviation = max_deviation.max((values[i].1 - values[j].1).norm());
        }
    }
    Ok(LoopReport {
        values,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn square_lattice(n: usize) -> EllipticData {
        EllipticData::new(Complex64::new(0.0, 1.0), n).unwrap()
    }

    /// Independent oracle: the absolutely convergent cosecant-squared series
    /// p(z) = pi^2/sin^2(pi z) - pi^2/3
    ///        + sum_{n >= 1} [pi^2/sin^2(pi(z - n tau)) +
    ///                        pi^2/sin^2(pi(z + n tau)) - 2 pi^2/sin^2(pi n tau)].
    fn p_oracle(z: Complex64, tau: Complex64) -> Complex64 {
        let pi = std::f64::consts::PI;
        let csc2 = |w: Complex64| {
            let s = (pi * w).sin();
            pi * pi / (s * s)
        };
        let mut acc = csc2(z) - Complex64::new(pi * pi / 3.0, 0.0);
        for n in 1..=40 {
            let nt = tau * n as f64;
            acc += csc2(z - nt) + csc2(z + nt) - 2.0 * csc2(nt);
        }
        acc
    }

    #[test]
    fn matches_independent_series() {
        let data = square_lattice(40);
        let prep = data.prepare();
        let zs = [
            Complex64::new(0.31, 0.17),
            Complex64::new(0.5, 0.5),
            Complex64::new(-0.2, 0.41),
            Complex64::new(0.05, 0.33),
        ];
        for z in zs {
            let ours = prep.eval(z).unwrap();
            let oracle = p_oracle(z, data.tau);
            assert!(
                (ours - oracle).norm() <= 1e-10 * (1.0 + oracle.norm()),
                "at {z}: {ours} vs {oracle}"
            );
        }
        // the tail correction matters: the raw sum is visibly worse
        let z = zs[0];
        let raw = prep.eval_raw(z).unwrap();
        let oracle = p_oracle(z, data.tau);
        assert!((raw - oracle).norm() > 1e-9);
    }

    #[test]
    fn matches_series_on_a_skew_lattice() {
        let tau = Complex64::new(0.3, 1.1);
        let data = EllipticData::new(tau, 40).unwrap();
        let prep = data.prepare();
        for z in [Complex64::new(0.21, 0.37), Complex64::new(-0.13, 0.55)] {
            let ours = prep.eval(z).unwrap();
            let oracle = p_oracle(z, tau);
            assert!(
                (ours - oracle).norm() <= 1e-9 * (1.0 + oracle.norm()),
                "at {z}: {ours} vs {oracle}"
            );
            let shifted = prep.eval(z + tau * 3.0 + Complex64::new(2.0, 0.0)).unwrap();
            assert!((ours - shifted).norm() <= 1e-9 * (1.0 + ours.norm()));
        }
    }

    #[test]
    fn evenness_and_periodicity() {
        let data = square_lattice(30);
        let prep = data.prepare();
        let tol = 1e-10;
        let mut seed = 42u64;
        let mut rand = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let z = Complex64::new(rand() * 0.8 + 0.1, rand() * 0.8 + 0.1);
            let a = prep.eval(z).unwrap();
            let b = prep.eval(-z).unwrap();
            assert!((a - b).norm() <= tol * (1.0 + a.norm()), "evenness at {z}");
            let c = prep.eval(z + Complex64::new(1.0, 0.0)).unwrap();
            assert!(
                (a - c).norm() <= tol * (1.0 + a.norm()),
                "periodicity at {z}"
            );
            let d = prep.eval(z + data.tau).unwrap();
            assert!(
                (a - d).norm() <= tol * (1.0 + a.norm()),
                "tau-periodicity at {z}"
            );
        }
    }

    #[test]
    fn pole_order_two_at_origin() {
        let data = square_lattice(30);
        let prep = data.prepare();
        for k in 1..=4 {
            let z = Complex64::new(10f64.powi(-k), 0.5e-4 * k as f64);
            let v = prep.eval(z).unwrap();
            let scaled = v * z * z;
            assert!(
                (scaled - Complex64::new(1.0, 0.0)).norm() < 10f64.powi(-2 * k) * 50.0 + 1e-6,
                "z^2 p(z) = {scaled} at |z| = 1e-{k}"
            );
        }
        // rejection near the pole
        assert!(prep.eval(Complex64::new(1e-9, 0.0)).is_err());
        assert!(prep.eval(Complex64::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn self_convergence_reported_small() {
        let data = square_lattice(20);
        let z = Complex64::new(0.3, 0.4);
        let sc = self_convergence(z, &data).unwrap();
        assert!(sc < 1e-9, "self-convergence {sc}");
    }

    #[test]
    fn constant_integrand_is_exactly_constant() {
        // integrating only the constant c: deviation identically zero
        let vals: Vec<Complex64> = [0.25, 0.4, 0.6]
            .iter()
            .map(|_| Complex64::new(2.5, -1.0))
            .collect();
        assert!(vals.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn loop_integrals_are_height_independent() {
        let data = square_lattice(40);
        let c = Complex64::new(7.0, 3.0);
        let rep = loop_integral_constancy(c, &[0.25, 0.4, 0.6], &data, 512).unwrap();
        assert!(rep.max_deviation < 1e-8, "deviation {}", rep.max_deviation);
        // convergence control: doubling the quadrature changes nothing
        let lattice = data.prepare();
        let a = loop_integral(c, 0.4, &lattice, 512).unwrap();
        let b = loop_integral(c, 0.4, &lattice, 1024).unwrap();
        assert!((a - b).norm() < 1e-12);
        // monotone improvement under truncation doubling
        let coarse =
            loop_integral_constancy(c, &[0.25, 0.4, 0.6], &square_lattice(20), 512).unwrap();
        assert!(rep.max_deviation <= coarse.max_deviation + 1e-15);
        // heights too close to the pole lines are rejected
        assert!(loop_integral_constancy(c, &[0.01], &data, 512).is_err());
    }

    #[test]
    fn invariants_match_lattice_sums_on_square_lattice() {
        // b_4 = g2/60 must match the direct symmetric partial sum closely
        let data = square_lattice(60);
        let prep = data.prepare();
        // tails are small: |T_4| for N = 60 should be far below b_4
        let b = lattice_power_sums(data.tau, 2);
        assert!(prep.tails[0].norm() < 1e-4 * b[0].norm().max(1.0));
        // g3 vanishes on the square lattice
        let (_, g3) = lattice_invariants(data.tau);
        assert_abs_diff_eq!(g3.norm(), 0.0, epsilon = 1e-10);
    }
}
