//! Dense-exponent sparse real polynomials with exact term arithmetic, the
//! quartic-torus and perturbation data, and a plain-text monomial format.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Multivariate polynomial: map from exponent tuples to coefficients.
/// Zero-coefficient terms are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl RealPolynomial {
    pub fn zero(nvars: usize) -> Self {
        RealPolynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = RealPolynomial::zero(nvars);
        if c != 0.0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut exps = vec![0u32; nvars];
        exps[i] = 1;
        let mut p = RealPolynomial::zero(nvars);
        p.terms.insert(exps, 1.0);
        p
    }

    pub fn from_terms(nvars: usize, terms: &[(&[u32], f64)]) -> Result<Self> {
        let mut p = RealPolynomial::zero(nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(Error::ShapeMismatch {
                    expected: format!("{nvars} exponents"),
                    got: format!("{}", exps.len()),
                });
            }
            p.add_term(exps.to_vec(), *c);
        }
        Ok(p)
    }

    fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                *v += c;
                if *v == 0.0 {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch(self.nvars, other.nvars));
        }
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = RealPolynomial::zero(self.nvars);
        if s != 0.0 {
            for (e, c) in &self.terms {
                out.terms.insert(e.clone(), c * s);
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch(self.nvars, other.nvars));
        }
        let mut out = RealPolynomial::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars);
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut term = *c;
            for (xi, &ei) in x.iter().zip(e) {
                term *= xi.powi(ei as i32);
            }
            acc += term;
        }
        acc
    }

    /// Partial derivative with respect to variable i.
    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.nvars);
        let mut out = RealPolynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[i] -= 1;
            out.add_term(ne, c * e[i] as f64);
        }
        out
    }

    /// Substitute a value for the last variable, returning a polynomial in
    /// one fewer variable.
    pub fn substitute_last(&self, value: f64) -> Self {
        assert!(self.nvars >= 1);
        let mut out = RealPolynomial::zero(self.nvars - 1);
        for (e, c) in &self.terms {
            let head = e[..self.nvars - 1].to_vec();
            let pow = value.powi(e[self.nvars - 1] as i32);
            out.add_term(head, c * pow);
        }
        out
    }

    /// Promote to a larger variable count (new variables unused).
    pub fn promote(&self, nvars: usize) -> Result<Self> {
        if nvars < self.nvars {
            return Err(Error::DimensionMismatch(nvars, self.nvars));
        }
        let mut out = RealPolynomial::zero(nvars);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            ne.resize(nvars, 0);
            out.terms.insert(ne, *c);
        }
        Ok(out)
    }

    /// Plain-text monomial format: one `coefficient e1 e2 ... ek` line per
    /// term; `#` starts a comment.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (e, c) in &self.terms {
            out.push_str(&format!("{c:?}"));
            for x in e {
                out.push(' ');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(nvars: usize, text: &str) -> Result<Self> {
        let mut p = RealPolynomial::zero(nvars);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let coeff: f64 = parts
                .next()
                .ok_or(Error::Parse {
                    line: lineno + 1,
                    msg: "missing coefficient".into(),
                })?
                .parse()
                .map_err(|e| Error::Parse {
                    line: lineno + 1,
                    msg: format!("bad coefficient: {e}"),
                })?;
            let exps: std::result::Result<Vec<u32>, _> = parts.map(|s| s.parse()).collect();
            let exps = exps.map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: format!("bad exponent: {e}"),
            })?;
            if exps.len() != nvars {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected {nvars} exponents, got {}", exps.len()),
                });
            }
            p.add_term(exps, coeff);
        }
        Ok(p)
    }
}

/// The degree-4 torus polynomial (3/4 + x^2 + y^2 + z^2)^2 - 4(x^2 + y^2),
/// evaluated directly.
pub fn quartic_torus_eval(x: f64, y: f64, z: f64) -> f64 {
    let s = 0.75 + x * x + y * y + z * z;
    s * s - 4.0 * (x * x + y * y)
}

/// The same polynomial expanded into monomials.
pub fn quartic_torus_poly() -> RealPolynomial {
    let x = RealPolynomial::variable(3, 0);
    let y = RealPolynomial::variable(3, 1);
    let z = RealPolynomial::variable(3, 2);
    let sq = |p: &RealPolynomial| p.mul(p).unwrap();
    let s = RealPolynomial::constant(3, 0.75)
        .add(&sq(&x))
        .unwrap()
        .add(&sq(&y))
        .unwrap()
        .add(&sq(&z))
        .unwrap();
    sq(&s)
        .sub(&sq(&x).add(&sq(&y)).unwrap().scale(4.0))
        .unwrap()
}

/// Sphere quadric x1^2 + x2^2 + x3^2 + x4^2 - 1 in four variables.
pub fn unit_sphere_quadric() -> RealPolynomial {
    let mut p = RealPolynomial::constant(4, -1.0);
    for i in 0..4 {
        let xi = RealPolynomial::variable(4, i);
        p = p.add(&xi.mul(&xi).unwrap()).unwrap();
    }
    p
}

/// The hyperplane coordinate x4.
pub fn hyperplane_factor() -> RealPolynomial {
    RealPolynomial::variable(4, 3)
}

/// The perturbation quartic
/// ((x1 - 1/3)^2 + (x2 - 1/3)^2 - 1/16)((x1 + 1/3)^2 + (x2 + 1/3)^2 - 1/16)
/// in `nvars` variables (only x1, x2 appear).
pub fn two_circle_quartic(nvars: usize) -> RealPolynomial {
    assert!(nvars >= 2);
    let x1 = RealPolynomial::variable(nvars, 0);
    let x2 = RealPolynomial::variable(nvars, 1);
    let shift = |p: &RealPolynomial, s: f64| p.add(&RealPolynomial::constant(nvars, s)).unwrap();
    let sq = |p: &RealPolynomial| p.mul(p).unwrap();
    let factor = |s: f64| {
        sq(&shift(&x1, s))
            .add(&sq(&shift(&x2, s)))
            .unwrap()
            .sub(&RealPolynomial::constant(nvars, 1.0 / 16.0))
            .unwrap()
    };
    factor(-1.0 / 3.0).mul(&factor(1.0 / 3.0)).unwrap()
}

/// Patchwork perturbation p*q - eps*h (exact term arithmetic).
pub fn viro_perturb(
    p: &RealPolynomial,
    q: &RealPolynomial,
    h: &RealPolynomial,
    eps: f64,
) -> Result<RealPolynomial> {
    if !(eps >= 0.0) {
        return Err(Error::domain("perturbation size must be nonnegative"));
    }
    p.mul(q)?.sub(&h.scale(eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quartic_examples() {
        // outer equator point at distance 1/2 from the core circle
        assert_abs_diff_eq!(quartic_torus_eval(1.5, 0.0, 0.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            quartic_torus_eval(0.0, 0.0, 0.0),
            9.0 / 16.0,
            epsilon = 1e-15
        );
        // expanded polynomial agrees with direct evaluation
        let p = quartic_torus_poly();
        assert_abs_diff_eq!(p.eval(&[1.5, 0.0, 0.0]), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            p.eval(&[0.3, -0.7, 0.2]),
            quartic_torus_eval(0.3, -0.7, 0.2),
            epsilon = 1e-12
        );
    }

    #[test]
    fn quartic_factorization_identity() {
        // p = ((r - 1)^2 + z^2 - 1/4)((r + 1)^2 + z^2 - 1/4), r = sqrt(x^2 + y^2)
        let mut rng = 987654321u64;
        let mut rand = || {
            rng = rng
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64 * 6.0 - 3.0
        };
        for _ in 0..10_000 {
            let (x, y, z) = (rand(), rand(), rand());
            let r = (x * x + y * y).sqrt();
            let lhs = quartic_torus_eval(x, y, z);
            let rhs = ((r - 1.0).powi(2) + z * z - 0.25) * ((r + 1.0).powi(2) + z * z - 0.25);
            assert!(
                (lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()),
                "at ({x}, {y}, {z})"
            );
        }
    }

    #[test]
    fn viro_perturb_degree_formula() {
        let p = unit_sphere_quadric();
        let q = hyperplane_factor();
        let h = two_circle_quartic(4);
        let f = viro_perturb(&p, &q, &h, 1e-3).unwrap();
        assert_eq!(f.degree(), (p.degree() + q.degree()).max(h.degree()));
        assert_eq!(f.degree(), 4);
        // eps = 0 gives the plain product
        let f0 = viro_perturb(&p, &q, &h, 0.0).unwrap();
        assert_eq!(f0, p.mul(&q).unwrap());
        // mismatched variable counts rejected
        assert!(viro_perturb(&p, &q, &two_circle_quartic(2), 1.0).is_err());
    }

    #[test]
    fn polynomial_calculus() {
        // d/dx (x^2 y) = 2 x y
        let p = RealPolynomial::from_terms(2, &[(&[2, 1], 1.0)]).unwrap();
        let px = p.partial(0);
        assert_abs_diff_eq!(px.eval(&[3.0, 5.0]), 30.0, epsilon = 1e-12);
        // substitution of the last variable
        let q = p.substitute_last(2.0);
        assert_eq!(q.nvars(), 1);
        assert_abs_diff_eq!(q.eval(&[3.0]), 18.0, epsilon = 1e-12);
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let h = two_circle_quartic(2);
        let text = h.to_text();
        let back = RealPolynomial::from_text(2, &text).unwrap();
        assert_eq!(back, h);
        // canonical writer is idempotent
        assert_eq!(back.to_text(), text);
        match RealPolynomial::from_text(2, "1.0 0 0\nbad 1 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
