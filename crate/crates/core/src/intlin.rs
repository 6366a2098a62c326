//! Exact integer and rational linear algebra: fraction-free determinants,
//! unimodular inverses, Smith normal form with transform tracking, and
//! solvers for integer and rational linear systems.
//!
//! Everything here works on small dense matrices (n <= ~10) with small
//! entries, which covers all torus-map and monodromy data in this crate.
//! Intermediate arithmetic runs in i128 to keep growth harmless.

use num_rational::Ratio;
use num_traits::{One, Zero};

pub type Rat = Ratio<i64>;
pub type BigRat = Ratio<i128>;

/// Dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i128>,
}

impl IMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IMat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| x as i128))
            .collect();
        IMat {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn column(&self, j: usize) -> Vec<i128> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.rows);
        let mut out = IMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[i128]) -> Vec<i128> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[a] += q * row[b]
    fn add_row(&mut self, a: usize, b: usize, q: i128) {
        for j in 0..self.cols {
            let v = self[(b, j)];
            self[(a, j)] += q * v;
        }
    }

    /// col[a] += q * col[b]
    fn add_col(&mut self, a: usize, b: usize, q: i128) {
        for i in 0..self.rows {
            let v = self[(i, b)];
            self[(i, a)] += q * v;
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            self[(a, j)] = -self[(a, j)];
        }
    }
}

impl std::ops::Index<(usize, usize)> for IMat {
    type Output = i128;
    fn index(&self, (i, j): (usize, usize)) -> &i128 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i128 {
        &mut self.data[i * self.cols + j]
    }
}

/// Determinant by fraction-free Bareiss elimination.
pub fn det(m: &IMat) -> i128 {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    if n == 0 {
        return 1;
    }
    let mut a = m.clone();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[(k, k)] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[(i, k)] != 0) else {
                return 0;
            };
            a.swap_rows(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[(i, j)] = (a[(k, k)] * a[(i, j)] - a[(i, k)] * a[(k, j)]) / prev;
            }
            a[(i, k)] = 0;
        }
        prev = a[(k, k)];
    }
    sign * a[(n - 1, n - 1)]
}

/// Exact inverse of a unimodular integer matrix (det = +-1), via adjugate.
pub fn inverse_unimodular(m: &IMat) -> Option<IMat> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let d = det(m);
    if d != 1 && d != -1 {
        return None;
    }
    let mut adj = IMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // cofactor C_ij into adj[j][i]
            let mut minor = IMat::zeros(n - 1, n - 1);
            let mut mi = 0;
            for r in 0..n {
                if r == i {
                    continue;
                }
                let mut mj = 0;
                for c in 0..n {
                    if c == j {
                        continue;
                    }
                    minor[(mi, mj)] = m[(r, c)];
                    mj += 1;
                }
                mi += 1;
            }
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[(j, i)] = sign * det(&minor);
        }
    }
    if d == -1 {
        for v in adj.data.iter_mut() {
            *v = -*v;
        }
    }
    Some(adj)
}

/// Smith normal form: U * M * V = S with U, V unimodular and S diagonal with
/// a divisibility chain d_1 | d_2 | ... (nonnegative diagonal).
#[derive(Debug, Clone)]
pub struct Snf {
    pub u: IMat,
    pub s: IMat,
    pub v: IMat,
}

impl Snf {
    pub fn rank(&self) -> usize {
        (0..self.s.rows.min(self.s.cols))
            .take_while(|&i| self.s[(i, i)] != 0)
            .count()
    }

    pub fn diagonal(&self) -> Vec<i128> {
        (0..self.s.rows.min(self.s.cols))
            .map(|i| self.s[(i, i)])
            .collect()
    }
}

pub fn smith_normal_form(m: &IMat) -> Snf {
    let mut s = m.clone();
    let mut u = IMat::identity(m.rows);
    let mut v = IMat::identity(m.cols);
    let n = m.rows.min(m.cols);

    for t in 0..n {
        'outer: loop {
            // pivot: smallest nonzero |entry| in the trailing block
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..s.rows {
                for j in t..s.cols {
                    if s[(i, j)] != 0
                        && pivot.is_none_or(|(pi, pj)| s[(i, j)].abs() < s[(pi, pj)].abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..s.rows {
                if s[(i, t)] != 0 {
                    let q = div_round(s[(i, t)], s[(t, t)]);
                    s.add_row(i, t, -q);
                    u.add_row(i, t, -q);
                    if s[(i, t)] != 0 {
                        clean = false;
                    }
                }
            }
            for j in t + 1..s.cols {
                if s[(t, j)] != 0 {
                    let q = div_round(s[(t, j)], s[(t, t)]);
                    s.add_col(j, t, -q);
                    v.add_col(j, t, -q);
                    if s[(t, j)] != 0 {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue 'outer;
            }
            // divisibility fix: pivot must divide the whole trailing block
            for i in t + 1..s.rows {
                for j in t + 1..s.cols {
                    if s[(i, j)] % s[(t, t)] != 0 {
                        s.add_row(t, i, 1);
                        u.add_row(t, i, 1);
                        continue 'outer;
                    }
                }
            }
            break;
        }
        if s[(t, t)] < 0 {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    Snf { u, s, v }
}

fn div_round(a: i128, b: i128) -> i128 {
    // round-to-nearest division keeps remainders small
    let q = a / b;
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + if (r > 0) == (b > 0) { 1 } else { -1 }
    } else {
        q
    }
}

/// Basis of ker(M) intersected with Z^cols (saturated integer kernel).
pub fn integer_kernel_basis(m: &IMat) -> Vec<Vec<i128>> {
    let snf = smith_normal_form(m);
    let n = m.rows.min(m.cols);
    let mut basis = Vec::new();
    for t in 0..m.cols {
        let free = t >= n || snf.s[(t, t)] == 0;
        if free {
            basis.push(snf.v.column(t));
        }
    }
    basis
}

/// Any integer solution x of M x = b, if one exists.
pub fn solve_integer(m: &IMat, b: &[i128]) -> Option<Vec<i128>> {
    assert_eq!(m.rows, b.len());
    let snf = smith_normal_form(m);
    let c = snf.u.mul_vec(b);
    let n = m.rows.min(m.cols);
    let mut y = vec![0i128; m.cols];
    for t in 0..m.rows {
        let s_t = if t < n { snf.s[(t, t)] } else { 0 };
        if s_t != 0 {
            if c[t] % s_t != 0 {
                return None;
            }
            y[t] = c[t] / s_t;
        } else if c[t] != 0 {
            return None;
        }
    }
    Some(snf.v.mul_vec(&y))
}

/// Gaussian elimination over the rationals; returns any solution of A x = b.
pub fn solve_rational(a: &[Vec<BigRat>], b: &[BigRat]) -> Option<Vec<BigRat>> {
    let rows = a.len();
    assert_eq!(rows, b.len());
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<BigRat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(*rhs);
            r
        })
        .collect();

    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                for j in 0..=cols {
                    let sub = f * m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    // consistency
    for i in r..rows {
        if !m[i][cols].is_zero() {
            return None;
        }
    }
    let mut x = vec![BigRat::zero(); cols];
    for (row, &c) in pivot_cols.iter().enumerate() {
        x[c] = m[row][cols];
    }
    Some(x)
}

pub fn rat_to_big(r: Rat) -> BigRat {
    BigRat::new(*r.numer() as i128, *r.denom() as i128)
}

pub fn big_to_rat(r: &BigRat) -> Rat {
    Rat::new(*r.numer() as i64, *r.denom() as i64)
}

/// Reduce a rational to the half-open interval [0, 1).
pub fn reduce_mod1(r: Rat) -> Rat {
    let f = r.floor();
    r - f
}

/// Distance to the nearest integer, as a nonnegative rational <= 1/2.
pub fn dist_mod1(r: Rat) -> Rat {
    let x = reduce_mod1(r);
    let half = Rat::new(1, 2);
    if x > half {
        Rat::one() - x
    } else {
        x
    }
}
