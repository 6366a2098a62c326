//! Exterior algebra over flat charts: differential forms with constant or
//! position-dependent coefficients, wedge/interior/pullback/Hodge operations,
//! frame evaluation and comass estimation.
//!
//! A k-form on R^n is stored as a map from strictly increasing multi-indices
//! (subsets of 0..n of size k) to coefficients. Constant coefficients are the
//! fast path; position-dependent ones are callbacks.

mod comass;
mod complexform;

pub use comass::{comass_estimate, ComassEstimate};
pub use complexform::{
    holomorphic_volume_form, interleaved_dz, kahler_form_from_hermitian, ComplexForm,
};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub type FieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Coefficient of one multi-index term: a constant or a function of position.
#[derive(Clone)]
pub enum Coeff {
    Const(f64),
    Field(FieldFn),
}

impl Coeff {
    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Coeff::Const(c) => *c,
            Coeff::Field(f) => f(p),
        }
    }

    fn is_zero_const(&self) -> bool {
        matches!(self, Coeff::Const(c) if *c == 0.0)
    }
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Const(c) => write!(f, "{c}"),
            Coeff::Field(_) => write!(f, "<field>"),
        }
    }
}

/// Exterior form of degree `degree` on an `ambient_dim`-dimensional chart.
#[derive(Clone, Debug)]
pub struct DifferentialForm {
    degree: usize,
    ambient_dim: usize,
    terms: BTreeMap<Vec<u8>, Coeff>,
}

impl DifferentialForm {
    pub fn zero(ambient_dim: usize, degree: usize) -> Self {
        assert!(degree <= ambient_dim, "degree exceeds ambient dimension");
        DifferentialForm {
            degree,
            ambient_dim,
            terms: BTreeMap::new(),
        }
    }

    /// Constant-coefficient form from (multi-index, value) pairs.
    pub fn constant(ambient_dim: usize, degree: usize, terms: &[(&[u8], f64)]) -> Result<Self> {
        let mut form = DifferentialForm::zero(ambient_dim, degree);
        for (idx, val) in terms {
            form.add_term(idx.to_vec(), Coeff::Const(*val))?;
        }
        Ok(form)
    }

    /// Basis form dx^{i1} ∧ ... ∧ dx^{ik} (indices strictly increasing).
    pub fn basis(ambient_dim: usize, indices: &[u8]) -> Result<Self> {
        DifferentialForm::constant(ambient_dim, indices.len(), &[(indices, 1.0)])
    }

    /// Coordinate 1-form dx^i.
    pub fn dx(ambient_dim: usize, i: u8) -> Self {
        DifferentialForm::basis(ambient_dim, &[i]).expect("valid single index")
    }

    /// Constant function 1 as a 0-form.
    pub fn one(ambient_dim: usize) -> Self {
        let mut f = DifferentialForm::zero(ambient_dim, 0);
        f.terms.insert(vec![], Coeff::Const(1.0));
        f
    }

    pub fn with_field(
        ambient_dim: usize,
        degree: usize,
        indices: &[u8],
        field: FieldFn,
    ) -> Result<Self> {
        let mut f = DifferentialForm::zero(ambient_dim, degree);
        f.add_term(indices.to_vec(), Coeff::Field(field))?;
        Ok(f)
    }

    fn add_term(&mut self, idx: Vec<u8>, coeff: Coeff) -> Result<()> {
        if idx.len() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                got: idx.len(),
            });
        }
        if !idx.windows(2).all(|w| w[0] < w[1])
            || idx.iter().any(|&i| i as usize >= self.ambient_dim)
        {
            return Err(Error::domain(format!(
                "multi-index {idx:?} is not strictly increasing in [0, {})",
                self.ambient_dim
            )));
        }
        if coeff.is_zero_const() {
            return Ok(());
        }
        match self.terms.remove(&idx) {
            None => {
                self.terms.insert(idx, coeff);
            }
            Some(old) => {
                let merged = merge_coeffs(old, coeff, 1.0);
                if !merged.is_zero_const() {
                    self.terms.insert(idx, merged);
                }
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.values().all(|c| matches!(c, Coeff::Const(_)))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], &Coeff)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    /// Coefficient of a basis multi-index for constant forms (0 if absent).
    pub fn coefficient(&self, idx: &[u8]) -> f64 {
        match self.terms.get(idx) {
            Some(Coeff::Const(c)) => *c,
            Some(Coeff::Field(_)) => panic!("coefficient() on position-dependent form"),
            None => 0.0,
        }
    }

    /// The same form viewed on a larger ambient chart (indices unchanged).
    pub fn embed_in(&self, ambient_dim: usize) -> Result<Self> {
        if ambient_dim < self.ambient_dim {
            return Err(Error::DimensionMismatch(ambient_dim, self.ambient_dim));
        }
        let mut out = DifferentialForm::zero(ambient_dim, self.degree);
        out.terms = self.terms.clone();
        Ok(out)
    }

    /// Freeze a (possibly position-dependent) form at a point.
    pub fn at_point(&self, p: &[f64]) -> Self {
        let mut out = DifferentialForm::zero(self.ambient_dim, self.degree);
        for (idx, c) in &self.terms {
            let v = c.eval(p);
            if v != 0.0 {
                out.terms.insert(idx.clone(), Coeff::Const(v));
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return DifferentialForm::zero(self.ambient_dim, self.degree);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = match c {
                Coeff::Const(v) => Coeff::Const(*v * s),
                Coeff::Field(f) => {
                    let f = f.clone();
                    Coeff::Field(Arc::new(move |p| s * f(p)))
                }
            };
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch(
                self.ambient_dim,
                other.ambient_dim,
            ));
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        let mut out = self.clone();
        for (idx, c) in &other.terms {
            match out.terms.remove(idx) {
                None => {
                    out.terms.insert(idx.clone(), c.clone());
                }
                Some(old) => {
                    let merged = merge_coeffs(old, c.clone(), 1.0);
                    if !merged.is_zero_const() {
                        out.terms.insert(idx.clone(), merged);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Max absolute coefficient difference between two constant forms.
    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        assert!(self.is_constant() && other.is_constant());
        let mut keys: Vec<&Vec<u8>> = self.terms.keys().collect();
        keys.extend(other.terms.keys());
        keys.sort();
        keys.dedup();
        keys.iter()
            .map(|k| (self.coefficient(k) - other.coefficient(k)).abs())
            .fold(0.0, f64::max)
    }
}

fn merge_coeffs(a: Coeff, b: Coeff, sign_b: f64) -> Coeff {
    match (a, b) {
        (Coeff::Const(x), Coeff::Const(y)) => Coeff::Const(x + sign_b * y),
        (a, b) => {
            let (a, b) = (arc_of(a), arc_of(b));
            Coeff::Field(Arc::new(move |p| a(p) + sign_b * b(p)))
        }
    }
}

fn arc_of(c: Coeff) -> FieldFn {
    match c {
        Coeff::Const(v) => Arc::new(move |_| v),
        Coeff::Field(f) => f,
    }
}

fn mul_coeffs(a: &Coeff, b: &Coeff, sign: f64) -> Coeff {
    match (a, b) {
        (Coeff::Const(x), Coeff::Const(y)) => Coeff::Const(sign * x * y),
        (a, b) => {
            let (a, b) = (arc_of(a.clone()), arc_of(b.clone()));
            Coeff::Field(Arc::new(move |p| sign * a(p) * b(p)))
        }
    }
}

/// Merge two strictly increasing index sets; None if they overlap, else the
/// merged set and the sign of the interleaving permutation.
fn merge_indices(a: &[u8], b: &[u8]) -> Option<(Vec<u8>, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut inversions = 0usize;
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            // b[j] jumps over the remaining a-entries
            inversions += a.len() - i;
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((
        out,
        if inversions.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        },
    ))
}

/// Sign of the permutation taking the concatenation (a, b) to sorted order,
/// for disjoint increasing a and b.
fn complement_sign(a: &[u8], b: &[u8]) -> f64 {
    merge_indices(a, b).expect("disjoint index sets").1
}

/// Wedge product; bilinear, associative, graded-anticommutative.
pub fn wedge(a: &DifferentialForm, b: &DifferentialForm) -> Result<DifferentialForm> {
    if a.ambient_dim != b.ambient_dim {
        return Err(Error::DimensionMismatch(a.ambient_dim, b.ambient_dim));
    }
    let degree = a.degree + b.degree;
    if degree > a.ambient_dim {
        return Err(Error::domain(format!(
            "wedge degree {} exceeds ambient dimension {}",
            degree, a.ambient_dim
        )));
    }
    let mut out = DifferentialForm::zero(a.ambient_dim, degree);
    for (ia, ca) in &a.terms {
        for (ib, cb) in &b.terms {
            if let Some((idx, sign)) = merge_indices(ia, ib) {
                let term = mul_coeffs(ca, cb, sign);
                match out.terms.remove(&idx) {
                    None => {
                        if !term.is_zero_const() {
                            out.terms.insert(idx, term);
                        }
                    }
                    Some(old) => {
                        let merged = merge_coeffs(old, term, 1.0);
                        if !merged.is_zero_const() {
                            out.terms.insert(idx, merged);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Interior product i_v a (contraction in the first slot).
pub fn interior_product(v: &[f64], a: &DifferentialForm) -> Result<DifferentialForm> {
    if v.len() != a.ambient_dim {
        return Err(Error::DimensionMismatch(v.len(), a.ambient_dim));
    }
    if a.degree == 0 {
        return Err(Error::domain("interior product of a 0-form"));
    }
    let mut out = DifferentialForm::zero(a.ambient_dim, a.degree - 1);
    for (idx, c) in &a.terms {
        for (slot, &i) in idx.iter().enumerate() {
            let vi = v[i as usize];
            if vi == 0.0 {
                continue;
            }
            let sign = if slot % 2 == 0 { 1.0 } else { -1.0 };
            let mut rest = idx.clone();
            rest.remove(slot);
            let term = match c {
                Coeff::Const(x) => Coeff::Const(sign * vi * x),
                Coeff::Field(f) => {
                    let f = f.clone();
                    Coeff::Field(Arc::new(move |p| sign * vi * f(p)))
                }
            };
            match out.terms.remove(&rest) {
                None => {
                    if !term.is_zero_const() {
                        out.terms.insert(rest, term);
                    }
                }
                Some(old) => {
                    let merged = merge_coeffs(old, term, 1.0);
                    if !merged.is_zero_const() {
                        out.terms.insert(rest, merged);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Pullback by the linear map J: R^{n'} -> R^n (an n x n' matrix), i.e.
/// (J* a)(v_1, ..., v_k) = a(J v_1, ..., J v_k).
pub fn pullback(j: &DMatrix<f64>, a: &DifferentialForm) -> Result<DifferentialForm> {
    if j.nrows() != a.ambient_dim {
        return Err(Error::ShapeMismatch {
            expected: format!("{} x *", a.ambient_dim),
            got: format!("{} x {}", j.nrows(), j.ncols()),
        });
    }
    let target_dim = j.ncols();
    if a.degree > target_dim {
        return Err(Error::domain(format!(
            "cannot pull a degree-{} form back to dimension {}",
            a.degree, target_dim
        )));
    }
    let mut out = DifferentialForm::zero(target_dim, a.degree);
    if a.degree == 0 {
        for (idx, c) in &a.terms {
            let term = match c {
                Coeff::Const(x) => Coeff::Const(*x),
                Coeff::Field(f) => {
                    let f = f.clone();
                    let j = j.clone();
                    Coeff::Field(Arc::new(move |p| {
                        let q = &j * DVector::from_column_slice(p);
                        f(q.as_slice())
                    }))
                }
            };
            out.terms.insert(idx.clone(), term);
        }
        return Ok(out);
    }
    for target_idx in combinations(target_dim, a.degree) {
        // accumulate constants; collect field contributions separately
        let mut const_acc = 0.0;
        let mut field_parts: Vec<(f64, FieldFn)> = Vec::new();
        for (src_idx, c) in &a.terms {
            let minor = index_minor(j, src_idx, &target_idx);
            if minor == 0.0 {
                continue;
            }
            match c {
                Coeff::Const(x) => const_acc += minor * x,
                Coeff::Field(f) => field_parts.push((minor, f.clone())),
            }
        }
        if field_parts.is_empty() {
            if const_acc != 0.0 {
                out.terms.insert(target_idx, Coeff::Const(const_acc));
            }
        } else {
            let j = j.clone();
            out.terms.insert(
                target_idx,
                Coeff::Field(Arc::new(move |p| {
                    let q = &j * DVector::from_column_slice(p);
                    let mut acc = const_acc;
                    for (m, f) in &field_parts {
                        acc += m * f(q.as_slice());
                    }
                    acc
                })),
            );
        }
    }
    Ok(out)
}

fn index_minor(j: &DMatrix<f64>, rows: &[u8], cols: &[u8]) -> f64 {
    let k = rows.len();
    let mut m = DMatrix::zeros(k, k);
    for (a, &r) in rows.iter().enumerate() {
        for (b, &c) in cols.iter().enumerate() {
            m[(a, b)] = j[(r as usize, c as usize)];
        }
    }
    small_det(&m)
}

/// Determinant for small dense matrices (explicit up to 3x3, Laplace above).
pub fn small_det(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    match n {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => {
            let mut acc = 0.0;
            let sub_rows: Vec<usize> = (1..n).collect();
            for c in 0..n {
                let a = m[(0, c)];
                if a == 0.0 {
                    continue;
                }
                let mut sub = DMatrix::zeros(n - 1, n - 1);
                let mut jj = 0;
                for col in 0..n {
                    if col == c {
                        continue;
                    }
                    for (ii, &r) in sub_rows.iter().enumerate() {
                        sub[(ii, jj)] = m[(r, col)];
                    }
                    jj += 1;
                }
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * a * small_det(&sub);
            }
            acc
        }
    }
}

/// All strictly increasing index tuples of length k in [0, n).
pub fn combinations(n: usize, k: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i as u8);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// Riemannian metric evaluated at one point.
#[derive(Debug, Clone)]
pub struct MetricAtPoint {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    sqrt_det: f64,
    min_eigenvalue: f64,
}

impl MetricAtPoint {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::ShapeMismatch {
                expected: "square".into(),
                got: format!("{} x {}", matrix.nrows(), matrix.ncols()),
            });
        }
        if matrix != matrix.transpose() {
            return Err(Error::domain("metric matrix is not exactly symmetric"));
        }
        let eig = matrix.clone().symmetric_eigen();
        let min_eigenvalue = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if !(min_eigenvalue > 0.0) {
            return Err(Error::DegenerateMetric { min_eigenvalue });
        }
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or(Error::DegenerateMetric { min_eigenvalue })?;
        let sqrt_det = matrix.determinant().sqrt();
        Ok(MetricAtPoint {
            matrix,
            inverse,
            sqrt_det,
            min_eigenvalue,
        })
    }

    pub fn euclidean(n: usize) -> Self {
        MetricAtPoint::new(DMatrix::identity(n, n)).expect("identity is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// Gram determinant volume of a k-frame (columns of `frame`).
    pub fn frame_volume(&self, frame: &DMatrix<f64>) -> f64 {
        let gram = frame.transpose() * &self.matrix * frame;
        small_det(&gram).max(0.0).sqrt()
    }
}

/// Ordered k-frame of tangent vectors.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    vectors: Vec<DVector<f64>>,
    orthonormal: bool,
}

impl TangentFrame {
    pub fn new(vectors: Vec<DVector<f64>>) -> Self {
        TangentFrame {
            vectors,
            orthonormal: false,
        }
    }

    /// Marks the frame orthonormal; verified against the Euclidean Gram
    /// matrix to 1e-12.
    pub fn new_orthonormal(vectors: Vec<DVector<f64>>) -> Result<Self> {
        for (i, a) in vectors.iter().enumerate() {
            for (j, b) in vectors.iter().enumerate() {
                let g = a.dot(b);
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - target).abs() > 1e-12 {
                    return Err(Error::domain(format!(
                        "frame not orthonormal: gram[{i}][{j}] = {g}"
                    )));
                }
            }
        }
        Ok(TangentFrame {
            vectors,
            orthonormal: true,
        })
    }

    pub fn from_columns(m: &DMatrix<f64>) -> Self {
        TangentFrame::new((0..m.ncols()).map(|j| m.column(j).into_owned()).collect())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn as_matrix(&self) -> DMatrix<f64> {
        let n = self.vectors.first().map_or(0, |v| v.len());
        DMatrix::from_fn(n, self.vectors.len(), |i, j| self.vectors[j][i])
    }
}

/// Multilinear alternating evaluation of a k-form on a k-frame at a point.
///
/// The frame is sorted internally (tracking the permutation sign) so that
/// swapping two frame vectors negates the result exactly, and frames
/// containing a repeated vector evaluate to exactly 0.
pub fn evaluate_on_frame(a: &DifferentialForm, frame: &TangentFrame, p: &[f64]) -> Result<f64> {
    if frame.len() != a.degree() {
        return Err(Error::DegreeMismatch {
            expected: a.degree(),
            got: frame.len(),
        });
    }
    for v in frame.vectors() {
        if v.len() != a.ambient_dim() {
            return Err(Error::DimensionMismatch(v.len(), a.ambient_dim()));
        }
    }
    let k = a.degree();
    if k == 0 {
        return Ok(a.terms.get(&vec![]).map_or(0.0, |c| c.eval(p)));
    }
    // canonical order: sort vectors lexicographically, track parity
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&frame.vectors()[i], &frame.vectors()[j]);
        a.as_slice().partial_cmp(b.as_slice()).unwrap()
    });
    let mut sign = 1.0;
    {
        let mut perm = order.clone();
        for i in 0..k {
            while perm[i] != i {
                let t = perm[i];
                perm.swap(i, t);
                sign = -sign;
            }
        }
    }
    let sorted: Vec<&DVector<f64>> = order.iter().map(|&i| &frame.vectors()[i]).collect();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Ok(0.0);
        }
    }
    let mut acc = 0.0;
    let mut minor = DMatrix::zeros(k, k);
    for (idx, c) in &a.terms {
        for (r, &i) in idx.iter().enumerate() {
            for (col, v) in sorted.iter().enumerate() {
                minor[(r, col)] = v[i as usize];
            }
        }
        let d = small_det(&minor);
        if d != 0.0 {
            acc += c.eval(p) * d;
        }
    }
    Ok(sign * acc)
}

/// Hodge star with respect to a metric and an orientation sign (+1 for the
/// coordinate orientation dx^0 ∧ ... ∧ dx^{n-1}).
pub fn hodge_star(
    a: &DifferentialForm,
    g: &MetricAtPoint,
    orientation: i8,
) -> Result<DifferentialForm> {
    if g.dim() != a.ambient_dim() {
        return Err(Error::DimensionMismatch(g.dim(), a.ambient_dim()));
    }
    assert!(orientation == 1 || orientation == -1);
    let n = a.ambient_dim();
    let k = a.degree();
    let sqrt_det = g.sqrt_det * orientation as f64;
    let ginv = g.inverse();
    let mut out = DifferentialForm::zero(n, n - k);
    for idx in combinations(n, k) {
        let comp: Vec<u8> = (0..n as u8).filter(|i| !idx.contains(i)).collect();
        let eps = complement_sign(&idx, &comp);
        // <dx^I, a>_g contributions
        let mut const_acc = 0.0;
        let mut field_parts: Vec<(f64, FieldFn)> = Vec::new();
        for (src_idx, c) in &a.terms {
            let gram = index_minor_pairs(ginv, &idx, src_idx);
            if gram == 0.0 {
                continue;
            }
            match c {
                Coeff::Const(x) => const_acc += gram * x,
                Coeff::Field(f) => field_parts.push((gram, f.clone())),
            }
        }
        let scale = eps * sqrt_det;
        if field_parts.is_empty() {
            if const_acc != 0.0 {
                out.terms.insert(comp, Coeff::Const(scale * const_acc));
            }
        } else {
            out.terms.insert(
                comp,
                Coeff::Field(Arc::new(move |p| {
                    let mut acc = const_acc;
                    for (m, f) in &field_parts {
                        acc += m * f(p);
                    }
                    scale * acc
                })),
            );
        }
    }
    Ok(out)
}

fn index_minor_pairs(m: &DMatrix<f64>, rows: &[u8], cols: &[u8]) -> f64 {
    let k = rows.len();
    let mut sub = DMatrix::zeros(k, k);
    for (a, &r) in rows.iter().enumerate() {
        for (b, &c) in cols.iter().enumerate() {
            sub[(a, b)] = m[(r as usize, c as usize)];
        }
    }
    small_det(&sub)
}

/// Pointwise norm of a form with respect to a metric:
/// ||a||^2 = sum_{I,I'} a_I a_{I'} det(g^{-1}[I, I']).
pub fn norm_at(a: &DifferentialForm, g: &MetricAtPoint, p: &[f64]) -> Result<f64> {
    if g.dim() != a.ambient_dim() {
        return Err(Error::DimensionMismatch(g.dim(), a.ambient_dim()));
    }
    let ginv = g.inverse();
    let mut acc = 0.0;
    for (i1, c1) in &a.terms {
        let v1 = c1.eval(p);
        if v1 == 0.0 {
            continue;
        }
        for (i2, c2) in &a.terms {
            let gram = index_minor_pairs(ginv, i1, i2);
            if gram != 0.0 {
                acc += v1 * c2.eval(p) * gram;
            }
        }
    }
    Ok(acc.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn e(n: usize, i: usize) -> DVector<f64> {
        DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn wedge_alternation_kills_repeats() {
        let dx0 = DifferentialForm::dx(4, 0);
        let w = wedge(&dx0, &dx0).unwrap();
        assert!(w.is_zero());
    }

    #[test]
    fn wedge_basis_duality() {
        let a = wedge(&DifferentialForm::dx(4, 0), &DifferentialForm::dx(4, 1)).unwrap();
        let f = TangentFrame::new(vec![e(4, 0), e(4, 1)]);
        assert_eq!(evaluate_on_frame(&a, &f, &[0.0; 4]).unwrap(), 1.0);
    }

    #[test]
    fn wedge_volume_form_r6() {
        let b01 = DifferentialForm::basis(6, &[0, 1]).unwrap();
        let b23 = DifferentialForm::basis(6, &[2, 3]).unwrap();
        let b45 = DifferentialForm::basis(6, &[4, 5]).unwrap();
        let vol = wedge(&wedge(&b01, &b23).unwrap(), &b45).unwrap();
        let f = TangentFrame::new((0..6).map(|i| e(6, i)).collect());
        assert_eq!(evaluate_on_frame(&vol, &f, &[0.0; 6]).unwrap(), 1.0);
    }

    #[test]
    fn wedge_dimension_mismatch_rejected() {
        let a = DifferentialForm::dx(3, 0);
        let b = DifferentialForm::dx(4, 0);
        assert!(wedge(&a, &b).is_err());
    }

    #[test]
    fn interior_drops_first_slot() {
        let a = DifferentialForm::basis(4, &[0, 1]).unwrap();
        let got = interior_product(e(4, 0).as_slice(), &a).unwrap();
        assert_eq!(got.max_coeff_distance(&DifferentialForm::dx(4, 1)), 0.0);
    }

    #[test]
    fn interior_standard_symplectic_r6() {
        let omega =
            DifferentialForm::constant(6, 2, &[(&[0, 1], 1.0), (&[2, 3], 1.0), (&[4, 5], 1.0)])
                .unwrap();
        let got = interior_product(e(6, 1).as_slice(), &omega).unwrap();
        let expected = DifferentialForm::dx(6, 0).neg();
        assert_eq!(got.max_coeff_distance(&expected), 0.0);
    }

    #[test]
    fn interior_rejects_zero_forms() {
        let f = DifferentialForm::one(3);
        assert!(interior_product(&[1.0, 0.0, 0.0], &f).is_err());
    }

    #[test]
    fn pullback_identity_and_scaling() {
        let a = DifferentialForm::basis(4, &[0, 1]).unwrap();
        let id = DMatrix::<f64>::identity(4, 4);
        assert_eq!(pullback(&id, &a).unwrap().max_coeff_distance(&a), 0.0);
        let two = DMatrix::<f64>::identity(4, 4) * 2.0;
        assert_eq!(
            pullback(&two, &a)
                .unwrap()
                .max_coeff_distance(&a.scale(4.0)),
            0.0
        );
    }

    #[test]
    fn pullback_by_mirror_glue_differential() {
        // mu(x1,y1,x2,y2,x3,y3) = (x1,-y2,x2,y1,x3,y3); pullback of dy1 is -dy2
        let mut d = DMatrix::<f64>::zeros(6, 6);
        d[(0, 0)] = 1.0;
        d[(1, 3)] = -1.0;
        d[(2, 2)] = 1.0;
        d[(3, 1)] = 1.0;
        d[(4, 4)] = 1.0;
        d[(5, 5)] = 1.0;
        let dy1 = DifferentialForm::dx(6, 1);
        let got = pullback(&d, &dy1).unwrap();
        let expected = DifferentialForm::dx(6, 3).neg();
        assert_eq!(got.max_coeff_distance(&expected), 0.0);
    }

    #[test]
    fn pullback_shape_mismatch_rejected() {
        let a = DifferentialForm::basis(4, &[0, 1]).unwrap();
        let j = DMatrix::<f64>::identity(3, 3);
        assert!(pullback(&j, &a).is_err());
    }

    #[test]
    fn hodge_euclidean_r4() {
        let g = MetricAtPoint::euclidean(4);
        let one = DifferentialForm::one(4);
        let vol = hodge_star(&one, &g, 1).unwrap();
        assert_eq!(
            vol.max_coeff_distance(&DifferentialForm::basis(4, &[0, 1, 2, 3]).unwrap()),
            0.0
        );
        let a = DifferentialForm::basis(4, &[0, 1]).unwrap();
        let sa = hodge_star(&a, &g, 1).unwrap();
        assert_eq!(
            sa.max_coeff_distance(&DifferentialForm::basis(4, &[2, 3]).unwrap()),
            0.0
        );
    }

    #[test]
    fn hodge_kahler_form_self_dual() {
        let g = MetricAtPoint::euclidean(4);
        let omega = DifferentialForm::constant(4, 2, &[(&[0, 1], 1.0), (&[2, 3], 1.0)]).unwrap();
        let s = hodge_star(&omega, &g, 1).unwrap();
        assert!(s.max_coeff_distance(&omega) <= 1e-12);
        // double star identity as the oracle
        let ss = hodge_star(&s, &g, 1).unwrap();
        assert!(ss.max_coeff_distance(&omega) <= 1e-12);
    }

    #[test]
    fn hodge_rejects_degenerate_metric() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 1.0]));
        match MetricAtPoint::new(m) {
            Err(Error::DegenerateMetric { min_eigenvalue }) => {
                assert_abs_diff_eq!(min_eigenvalue, 0.0, epsilon = 1e-14)
            }
            other => panic!("expected degenerate metric error, got {other:?}"),
        }
    }

    #[test]
    fn evaluate_holomorphic_volume_form_on_real_frame() {
        let omega = holomorphic_volume_form(3);
        let f = TangentFrame::new(vec![e(6, 0), e(6, 2), e(6, 4)]);
        assert_eq!(evaluate_on_frame(&omega.re, &f, &[0.0; 6]).unwrap(), 1.0);
        assert_eq!(evaluate_on_frame(&omega.im, &f, &[0.0; 6]).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_volume_on_own_frame() {
        let vol = DifferentialForm::basis(3, &[0, 1, 2]).unwrap();
        let f = TangentFrame::new_orthonormal(vec![e(3, 0), e(3, 1), e(3, 2)]).unwrap();
        assert_eq!(evaluate_on_frame(&vol, &f, &[0.0; 3]).unwrap(), 1.0);
    }

    #[test]
    fn evaluate_rejects_length_mismatch() {
        let vol = DifferentialForm::basis(3, &[0, 1, 2]).unwrap();
        let f = TangentFrame::new(vec![e(3, 0), e(3, 1)]);
        assert!(evaluate_on_frame(&vol, &f, &[0.0; 3]).is_err());
    }

    #[test]
    fn field_coefficients_evaluate_at_point() {
        let a = DifferentialForm::with_field(2, 1, &[0], Arc::new(|p: &[f64]| p[1])).unwrap();
        let f = TangentFrame::new(vec![e(2, 0)]);
        assert_eq!(evaluate_on_frame(&a, &f, &[0.0, 3.5]).unwrap(), 3.5);
        let frozen = a.at_point(&[0.0, 2.0]);
        assert_eq!(frozen.coefficient(&[0]), 2.0);
    }
}
