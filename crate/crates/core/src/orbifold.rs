//! Finite affine group actions on flat tori T^n = R^n / Z^n: composition,
//! fixed loci (by Smith normal form over the integers), freeness, orbit and
//! closure computations. All arithmetic on map data is exact rational.
//!
//! Complex coordinates z_j = x_j + i*y_j are stored as the interleaved real
//! pairs (x_j, y_j), so every complex-affine map from the source material
//! lives here in its real form.

use crate::error::{Error, Result};
use crate::intlin::{
    big_to_rat, dist_mod1, integer_kernel_basis, rat_to_big, reduce_mod1, smith_normal_form,
    solve_integer, solve_rational, BigRat, IMat, Rat,
};
use num_traits::Zero;
use std::collections::BTreeSet;

/// Affine map x -> D x + b on T^n with integer D (det +-1) and rational b
/// reduced to [0, 1)^n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineTorusMap {
    dim: usize,
    linear: Vec<i64>, // row-major n x n
    translation: Vec<Rat>,
}

impl AffineTorusMap {
    pub fn new(linear: Vec<Vec<i64>>, translation: Vec<Rat>) -> Result<Self> {
        let dim = linear.len();
        if translation.len() != dim || linear.iter().any(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch {
                expected: format!("{dim} x {dim} matrix with {dim} translations"),
                got: format!("{} rows, {} translations", linear.len(), translation.len()),
            });
        }
        let d = crate::intlin::det(&IMat::from_rows(&linear));
        if d != 1 && d != -1 {
            return Err(Error::NonUnimodular(d as i64));
        }
        let data = linear.into_iter().flatten().collect();
        let translation = translation.into_iter().map(reduce_mod1).collect();
        Ok(AffineTorusMap {
            dim,
            linear: data,
            translation,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut linear = vec![0i64; dim * dim];
        for i in 0..dim {
            linear[i * dim + i] = 1;
        }
        AffineTorusMap {
            dim,
            linear,
            translation: vec![Rat::zero(); dim],
        }
    }

    /// Pure translation by b.
    pub fn translation_map(b: Vec<Rat>) -> Self {
        let mut m = AffineTorusMap::identity(b.len());
        m.translation = b.into_iter().map(reduce_mod1).collect();
        m
    }

    /// Diagonal signs with a translation; the usual involution builder.
    pub fn diag(signs: &[i64], b: Vec<Rat>) -> Result<Self> {
        let n = signs.len();
        let mut linear = vec![vec![0i64; n]; n];
        for i in 0..n {
            linear[i][i] = signs[i];
        }
        AffineTorusMap::new(linear, b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn linear_entry(&self, i: usize, j: usize) -> i64 {
        self.linear[i * self.dim + j]
    }

    pub fn linear_rows(&self) -> Vec<Vec<i64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.linear_entry(i, j)).collect())
            .collect()
    }

    pub fn linear_imat(&self) -> IMat {
        IMat::from_rows(&self.linear_rows())
    }

    pub fn translation(&self) -> &[Rat] {
        &self.translation
    }

    pub fn is_identity(&self) -> bool {
        self == &AffineTorusMap::identity(self.dim)
    }

    /// Exact image of a rational point, reduced mod 1.
    pub fn apply_rat(&self, p: &[Rat]) -> Vec<Rat> {
        assert_eq!(p.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let mut acc = self.translation[i];
                for j in 0..self.dim {
                    acc += Rat::from_integer(self.linear_entry(i, j)) * p[j];
                }
                reduce_mod1(acc)
            })
            .collect()
    }

    pub fn apply_f64(&self, p: &[f64]) -> Vec<f64> {
        assert_eq!(p.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let mut acc = rat_f64(self.translation[i]);
                for j in 0..self.dim {
                    acc += self.linear_entry(i, j) as f64 * p[j];
                }
                acc.rem_euclid(1.0)
            })
            .collect()
    }

    /// The differential as an f64 matrix (for form pullbacks).
    pub fn differential(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| self.linear_entry(i, j) as f64)
    }

    pub fn inverse(&self) -> Self {
        let inv = crate::intlin::inverse_unimodular(&self.linear_imat())
            .expect("unimodular by construction");
        let n = self.dim;
        let mut linear = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                linear[i * n + j] = inv[(i, j)] as i64;
            }
        }
        // x = D^{-1}(y - b)
        let translation: Vec<Rat> = (0..n)
            .map(|i| {
                let mut acc = Rat::zero();
                for j in 0..n {
                    acc -= Rat::from_integer(linear[i * n + j]) * self.translation[j];
                }
                reduce_mod1(acc)
            })
            .collect();
        AffineTorusMap {
            dim: n,
            linear,
            translation,
        }
    }
}

pub fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// compose(f, g) = f ∘ g: x -> D_f D_g x + D_f b_g + b_f (mod 1).
pub fn compose(f: &AffineTorusMap, g: &AffineTorusMap) -> Result<AffineTorusMap> {
    if f.dim != g.dim {
        return Err(Error::DimensionMismatch(f.dim, g.dim));
    }
    let n = f.dim;
    let mut linear = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0i64;
            for k in 0..n {
                acc += f.linear_entry(i, k) * g.linear_entry(k, j);
            }
            linear[i * n + j] = acc;
        }
    }
    let translation = (0..n)
        .map(|i| {
            let mut acc = f.translation[i];
            for k in 0..n {
                acc += Rat::from_integer(f.linear_entry(i, k)) * g.translation[k];
            }
            reduce_mod1(acc)
        })
        .collect();
    Ok(AffineTorusMap {
        dim: n,
        linear,
        translation,
    })
}

/// Affine subtorus: base point plus the real span of an integer direction
/// lattice, all mod 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSubtorus {
    pub base_point: Vec<Rat>,
    pub direction_lattice: Vec<Vec<i64>>,
}

impl AffineSubtorus {
    pub fn dim(&self) -> usize {
        self.direction_lattice.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base_point.len()
    }

    /// True when every direction vector is +-(coordinate vector).
    pub fn is_axis_aligned(&self) -> bool {
        self.direction_lattice
            .iter()
            .all(|v| v.iter().filter(|&&x| x != 0).count() == 1 && v.iter().all(|&x| x.abs() <= 1))
    }

    /// Indices of coordinates spanned by an axis-aligned direction lattice.
    pub fn axis_directions(&self) -> Option<Vec<usize>> {
        if !self.is_axis_aligned() {
            return None;
        }
        let mut out: Vec<usize> = self
            .direction_lattice
            .iter()
            .map(|v| v.iter().position(|&x| x != 0).expect("nonzero"))
            .collect();
        out.sort_unstable();
        Some(out)
    }

    /// Exact membership test for a rational point.
    pub fn contains_rat(&self, p: &[Rat]) -> bool {
        subtorus_contains(self, p)
    }
}

/// Connected components of the fixed locus of f, i.e. solutions of
/// (I - D) x ≡ b (mod Z^n), sorted lexicographically by base point.
pub fn fixed_locus(f: &AffineTorusMap) -> Vec<AffineSubtorus> {
    let n = f.dim;
    // (I - D) x = b + m over integer vectors m
    let mut m = IMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = if i == j { 1 } else { 0 } - f.linear_entry(i, j) as i128;
        }
    }
    let snf = smith_normal_form(&m);
    // S y ≡ c (mod Z^n) with x = V y, c = U b
    let c: Vec<Rat> = (0..n)
        .map(|i| {
            let mut acc = Rat::zero();
            for j in 0..n {
                acc += Rat::new(snf.u[(i, j)] as i64, 1) * f.translation[j];
            }
            acc
        })
        .collect();
    let diag = snf.diagonal();
    let mut free_idx = Vec::new();
    let mut torsion: Vec<(usize, i64)> = Vec::new();
    for t in 0..n {
        let d = diag.get(t).copied().unwrap_or(0);
        if d == 0 {
            // zero row: solvable only for integral right-hand side
            if !c[t].fract().is_zero() {
                return Vec::new();
            }
            free_idx.push(t);
        } else {
            torsion.push((t, d as i64));
        }
    }
    let directions: Vec<Vec<i64>> = free_idx
        .iter()
        .map(|&t| (0..n).map(|i| snf.v[(i, t)] as i64).collect())
        .collect();
    let combos: i64 = torsion.iter().map(|&(_, d)| d).product();
    let mut components = Vec::new();
    for combo in 0..combos {
        let mut y = vec![Rat::zero(); n];
        let mut rem = combo;
        for &(t, d) in &torsion {
            let j = rem % d;
            rem /= d;
            y[t] = (c[t] + Rat::from_integer(j)) / Rat::from_integer(d);
        }
        let base: Vec<Rat> = (0..n)
            .map(|i| {
                let mut acc = Rat::zero();
                for t in 0..n {
                    acc += Rat::new(snf.v[(i, t)] as i64, 1) * y[t];
                }
                reduce_mod1(acc)
            })
            .collect();
        components.push(AffineSubtorus {
            base_point: base,
            direction_lattice: directions.clone(),
        });
    }
    for comp in components.iter_mut() {
        comp.base_point = canonical_base(&comp.base_point, &comp.direction_lattice);
    }
    components.sort_by(|a, b| a.base_point.cmp(&b.base_point));
    components.dedup();
    components
}

/// Reduce a base point to a canonical representative modulo the direction
/// span (and mod 1) so equal components compare equal.
fn canonical_base(base: &[Rat], directions: &[Vec<i64>]) -> Vec<Rat> {
    if directions.is_empty() {
        return base.to_vec();
    }
    let n = base.len();
    let axis: Vec<Option<usize>> = directions
        .iter()
        .map(|v| {
            let nz: Vec<usize> = (0..n).filter(|&i| v[i] != 0).collect();
            if nz.len() == 1 && v[nz[0]].abs() == 1 {
                Some(nz[0])
            } else {
                None
            }
        })
        .collect();
    if axis.iter().all(|a| a.is_some()) {
        let mut out = base.to_vec();
        for a in axis.into_iter().flatten() {
            out[a] = Rat::zero();
        }
        return out;
    }
    // general lattice: subtract the exact least-squares projection onto the
    // direction span
    let k = directions.len();
    let gram: Vec<Vec<BigRat>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    let dot: i128 = (0..n)
                        .map(|i| directions[a][i] as i128 * directions[b][i] as i128)
                        .sum();
                    BigRat::from_integer(dot)
                })
                .collect()
        })
        .collect();
    let rhs: Vec<BigRat> = (0..k)
        .map(|a| {
            (0..n)
                .map(|i| BigRat::from_integer(directions[a][i] as i128) * rat_to_big(base[i]))
                .sum()
        })
        .collect();
    let coeffs = solve_rational(&gram, &rhs).expect("gram of independent vectors is invertible");
    (0..n)
        .map(|i| {
            let mut acc = rat_to_big(base[i]);
            for a in 0..k {
                acc -= coeffs[a] * BigRat::from_integer(directions[a][i] as i128);
            }
            reduce_mod1(big_to_rat(&acc))
        })
        .collect()
}

/// True iff f has no fixed points on the torus.
pub fn is_free(f: &AffineTorusMap) -> bool {
    fixed_locus(f).is_empty()
}

/// Exact membership: p - base ∈ span_R(directions) + Z^n, decided by pairing
/// with the integer annihilator of the direction span.
fn subtorus_contains(s: &AffineSubtorus, p: &[Rat]) -> bool {
    let n = s.base_point.len();
    let delta: Vec<Rat> = (0..n).map(|i| p[i] - s.base_point[i]).collect();
    let dt = IMat::from_rows(&s.direction_lattice);
    for w in integer_kernel_basis(&dt) {
        let dot: Rat = (0..n).map(|i| Rat::new(w[i] as i64, 1) * delta[i]).sum();
        if !dot.fract().is_zero() {
            return false;
        }
    }
    true
}

/// Intersection decision for two affine subtori on the torus; returns a
/// witness point when they meet.
///
/// Decision: delta = b.base - a.base pairs integrally with every integer
/// annihilator of the combined direction span. Witness: first an integer
/// lattice shift m with delta - m in the real span (solvable exactly when
/// the decision passed, since the annihilator basis is saturated), then a
/// rational solve of A s + B t = delta - m; the point a.base + A s lies on
/// both subtori mod 1.
pub fn subtori_intersect(a: &AffineSubtorus, b: &AffineSubtorus) -> Option<Vec<Rat>> {
    let n = a.base_point.len();
    assert_eq!(n, b.base_point.len());
    let mut span: Vec<Vec<i64>> = a.direction_lattice.clone();
    span.extend(b.direction_lattice.iter().cloned());
    let delta: Vec<Rat> = (0..n).map(|i| b.base_point[i] - a.base_point[i]).collect();

    let annihilator: Vec<Vec<i128>> = if span.is_empty() {
        // two points: the annihilator is the full lattice
        (0..n)
            .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
            .collect()
    } else {
        integer_kernel_basis(&IMat::from_rows(&span))
    };
    let mut pairing = Vec::with_capacity(annihilator.len());
    for w in &annihilator {
        let dot: Rat = (0..n).map(|i| Rat::new(w[i] as i64, 1) * delta[i]).sum();
        if !dot.fract().is_zero() {
            return None;
        }
        pairing.push(dot.to_integer() as i128);
    }

    // integer shift: W_ann m = W_ann delta
    let m_shift = if annihilator.is_empty() {
        vec![0i128; n]
    } else {
        let rows: Vec<Vec<i64>> = annihilator
            .iter()
            .map(|w| w.iter().map(|&x| x as i64).collect())
            .collect();
        solve_integer(&IMat::from_rows(&rows), &pairing)
            .expect("saturated annihilator basis makes the shift solvable")
    };

    // rational solve inside the span: [A B] (s, t) = delta - m
    let cols = span.len();
    let s_part: Vec<BigRat> = if cols == 0 {
        Vec::new()
    } else {
        let mat: Vec<Vec<BigRat>> = (0..n)
            .map(|i| {
                (0..cols)
                    .map(|c| BigRat::from_integer(span[c][i] as i128))
                    .collect::<Vec<_>>()
            })
            .collect();
        let rhs: Vec<BigRat> = (0..n)
            .map(|i| rat_to_big(delta[i]) - BigRat::from_integer(m_shift[i]))
            .collect();
        let sol = solve_rational(&mat, &rhs)?;
        sol[..a.direction_lattice.len()].to_vec()
    };
    let witness: Vec<Rat> = (0..n)
        .map(|i| {
            let mut acc = rat_to_big(a.base_point[i]);
            for (c, sc) in s_part.iter().enumerate() {
                acc += *sc * BigRat::from_integer(a.direction_lattice[c][i] as i128);
            }
            reduce_mod1(big_to_rat(&acc))
        })
        .collect();
    debug_assert!(subtorus_contains(a, &witness));
    debug_assert!(subtorus_contains(b, &witness));
    Some(witness)
}

#[derive(Debug, Clone)]
pub struct DisjointnessReport {
    pub disjoint: bool,
    /// (map index i, component index, map index j, component index, witness)
    pub witnesses: Vec<(usize, usize, usize, usize, Vec<Rat>)>,
}

/// Pairwise disjointness of the fixed loci of a family of maps, by integer
/// linear algebra on the combined congruence systems.
pub fn loci_pairwise_disjoint(maps: &[AffineTorusMap]) -> Result<DisjointnessReport> {
    if let Some(first) = maps.first() {
        for m in maps {
            if m.dim() != first.dim() {
                return Err(Error::DimensionMismatch(first.dim(), m.dim()));
            }
        }
    }
    let loci: Vec<Vec<AffineSubtorus>> = maps.iter().map(fixed_locus).collect();
    let mut witnesses = Vec::new();
    for i in 0..maps.len() {
        for j in i + 1..maps.len() {
            for (ci, a) in loci[i].iter().enumerate() {
                for (cj, b) in loci[j].iter().enumerate() {
                    if let Some(w) = subtori_intersect(a, b) {
                        witnesses.push((i, ci, j, cj, w));
                    }
                }
            }
        }
    }
    Ok(DisjointnessReport {
        disjoint: witnesses.is_empty(),
        witnesses,
    })
}

/// Finite group of affine torus maps, closed under composition.
#[derive(Debug, Clone)]
pub struct FiniteGroupAction {
    pub generators: Vec<AffineTorusMap>,
    pub elements: Vec<AffineTorusMap>,
}

/// Closure of the generators under composition, capped to guard against
/// non-finite input. The identity is always present.
pub fn group_closure(generators: &[AffineTorusMap], cap: usize) -> Result<FiniteGroupAction> {
    let dim = generators.first().map_or(0, |g| g.dim());
    for g in generators {
        if g.dim() != dim {
            return Err(Error::DimensionMismatch(dim, g.dim()));
        }
    }
    let mut elements: BTreeSet<AffineTorusMap> = BTreeSet::new();
    elements.insert(AffineTorusMap::identity(dim));
    let mut frontier: Vec<AffineTorusMap> = vec![AffineTorusMap::identity(dim)];
    while let Some(e) = frontier.pop() {
        for g in generators {
            let c = compose(g, &e)?;
            if elements.insert(c.clone()) {
                if elements.len() > cap {
                    return Err(Error::ClosureCapExceeded(cap));
                }
                frontier.push(c);
            }
        }
    }
    Ok(FiniteGroupAction {
        generators: generators.to_vec(),
        elements: elements.into_iter().collect(),
    })
}

impl FiniteGroupAction {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_abelian(&self) -> bool {
        self.generators.iter().all(|a| {
            self.generators
                .iter()
                .all(|b| compose(a, b).expect("same dim") == compose(b, a).expect("same dim"))
        })
    }

    pub fn generators_are_involutions(&self) -> bool {
        self.generators
            .iter()
            .all(|g| compose(g, g).expect("same dim").is_identity())
    }

    pub fn contains_inverses(&self) -> bool {
        self.elements
            .iter()
            .all(|e| self.elements.contains(&e.inverse()))
    }
}

/// Orbit of a point under a finite group action, duplicates merged under
/// mod-1 identification at the given tolerance.
pub fn orbit(p: &[f64], group: &FiniteGroupAction, tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for g in &group.elements {
        let q = g.apply_f64(p);
        if !out.iter().any(|r| torus_dist_f64(r, &q) <= tol) {
            out.push(q);
        }
    }
    out
}

/// Exact orbit of a rational point.
pub fn orbit_exact(p: &[Rat], group: &FiniteGroupAction) -> Vec<Vec<Rat>> {
    let mut out: BTreeSet<Vec<Rat>> = BTreeSet::new();
    for g in &group.elements {
        out.insert(g.apply_rat(p));
    }
    out.into_iter().collect()
}

/// Euclidean distance on the torus (coordinate-wise nearest representative).
pub fn torus_dist_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = (x - y).rem_euclid(1.0);
            d.min(1.0 - d).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Exact squared torus distance between rational points.
pub fn torus_dist2_rat(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = dist_mod1(x - y);
            d * d
        })
        .sum()
}

// ---------------------------------------------------------------------------
// The involution packages used throughout: two generators on T^6, three on
// T^7, and the square-lattice translations on the T^4 quotient chart.
// ---------------------------------------------------------------------------

fn half() -> Rat {
    Rat::new(1, 2)
}

/// T^6 involution z1 -> -z1 + 1/2, z2 -> -z2 + 1/2, z3 -> z3 (as given).
pub fn cy3_alpha() -> AffineTorusMap {
    AffineTorusMap::diag(
        &[-1, -1, -1, -1, 1, 1],
        vec![
            half(),
            Rat::zero(),
            half(),
            Rat::zero(),
            Rat::zero(),
            Rat::zero(),
        ],
    )
    .expect("unimodular")
}

/// Variant with translation (1 + i)/2 on z1 and z2, whose per-factor fixed
/// set is the quarter-lattice {1/4, 3/4} x {1/4, 3/4}. Reported alongside
/// `cy3_alpha`; both yield 16 two-torus components.
pub fn cy3_alpha_half_imaginary() -> AffineTorusMap {
    AffineTorusMap::diag(
        &[-1, -1, -1, -1, 1, 1],
        vec![half(), half(), half(), half(), Rat::zero(), Rat::zero()],
    )
    .expect("unimodular")
}

/// T^6 involution z1 -> -z1, z2 -> z2, z3 -> -z3.
pub fn cy3_beta() -> AffineTorusMap {
    AffineTorusMap::diag(&[-1, -1, 1, 1, -1, -1], vec![Rat::zero(); 6]).expect("unimodular")
}

/// T^7 involution (-x1, -x2, -x3, -x4, x5, x6, x7).
pub fn g2_alpha() -> AffineTorusMap {
    AffineTorusMap::diag(&[-1, -1, -1, -1, 1, 1, 1], vec![Rat::zero(); 7]).expect("unimodular")
}

/// T^7 involution (1/2 - x1, 1/2 - x2, x3, x4, -x5, -x6, x7).
pub fn g2_beta() -> AffineTorusMap {
    AffineTorusMap::diag(
        &[-1, -1, 1, 1, -1, -1, 1],
        vec![
            half(),
            half(),
            Rat::zero(),
            Rat::zero(),
            Rat::zero(),
            Rat::zero(),
            Rat::zero(),
        ],
    )
    .expect("unimodular")
}

/// T^7 involution (-x1, x2, 1/2 - x3, x4, -x5, x6, -x7).
pub fn g2_gamma() -> AffineTorusMap {
    AffineTorusMap::diag(
        &[-1, 1, -1, 1, -1, 1, -1],
        vec![
            Rat::zero(),
            Rat::zero(),
            half(),
            Rat::zero(),
            Rat::zero(),
            Rat::zero(),
            Rat::zero(),
        ],
    )
    .expect("unimodular")
}

/// T^4 involution z1 -> -z1 - 1/2, z2 -> -z2 - 1/2 (the K3 quotient map;
/// -1/2 and +1/2 agree mod 1).
pub fn k3_alpha_prime() -> AffineTorusMap {
    AffineTorusMap::diag(
        &[-1, -1, -1, -1],
        vec![half(), Rat::zero(), half(), Rat::zero()],
    )
    .expect("unimodular")
}

/// T^4 translation (z1, z2) -> (z1 + i/2, z2).
pub fn k3_gamma1() -> AffineTorusMap {
    AffineTorusMap::translation_map(vec![Rat::zero(), half(), Rat::zero(), Rat::zero()])
}

/// T^4 translation (z1, z2) -> (z1, z2 + i/2).
pub fn k3_gamma2() -> AffineTorusMap {
    AffineTorusMap::translation_map(vec![Rat::zero(), Rat::zero(), Rat::zero(), half()])
}
