//! Lattice monodromy algebra and mirror gluing: dual representations, the
//! intertwiner equation K = A^T K A solved over the integers, block-structure
//! recognition, the mirror gluing maps on T^6 and T^7 with their pullback
//! relation suites (one global sign convention per run), and the period-map
//! identities on a bad-neighbourhood product frame.

use crate::error::{Error, Result};
use crate::fibration::{CalibrationPackage, ImmersedGrid};
use crate::forms::{evaluate_on_frame, interior_product, wedge, DifferentialForm, TangentFrame};
use crate::intlin::{
    big_to_rat, det, integer_kernel_basis, inverse_unimodular, solve_rational, BigRat, IMat,
};
use crate::orbifold::{compose, AffineTorusMap};
use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

/// Finite set of invertible integer matrices acting on a rank-`rank`
/// lattice (monodromy generators).
#[derive(Debug, Clone)]
pub struct IntegerRep {
    pub rank: usize,
    pub matrices: Vec<Vec<Vec<i64>>>,
}

impl IntegerRep {
    pub fn new(rank: usize, matrices: Vec<Vec<Vec<i64>>>) -> Result<Self> {
        for m in &matrices {
            if m.len() != rank || m.iter().any(|r| r.len() != rank) {
                return Err(Error::ShapeMismatch {
                    expected: format!("{rank} x {rank}"),
                    got: format!("{} x {}", m.len(), m.first().map_or(0, |r| r.len())),
                });
            }
            let d = det(&IMat::from_rows(m));
            if d != 1 && d != -1 {
                return Err(Error::NonUnimodular(d as i64));
            }
        }
        Ok(IntegerRep { rank, matrices })
    }
}

/// Exact integer inverse-transpose (A^T)^{-1} of a unimodular matrix.
pub fn dual_rep(a: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = a.len();
    let at = IMat::from_rows(
        &(0..n)
            .map(|i| (0..n).map(|j| a[j][i]).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    );
    let inv = inverse_unimodular(&at).ok_or(Error::NonUnimodular(det(&at) as i64))?;
    Ok((0..n)
        .map(|i| (0..n).map(|j| inv[(i, j)] as i64).collect())
        .collect())
}

/// Integer intertwiner candidate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Intertwiner {
    pub matrix: Vec<Vec<i64>>,
}

impl Intertwiner {
    /// The defining test: K = A^T K A for every generator, exactly.
    pub fn satisfies(&self, rep: &IntegerRep) -> bool {
        satisfies_intertwiner_equation(&self.matrix, rep)
    }
}

fn satisfies_intertwiner_equation(k: &[Vec<i64>], rep: &IntegerRep) -> bool {
    let r = rep.rank;
    for a in &rep.matrices {
        for i in 0..r {
            for j in 0..r {
                // (A^T K A)[i][j] = sum_pq A[p][i] K[p][q] A[q][j]
                let mut acc = 0i64;
                for p in 0..r {
                    for q in 0..r {
                        acc += a[p][i] * k[p][q] * a[q][j];
                    }
                }
                if acc != k[i][j] {
                    return false;
                }
            }
        }
    }
    true
}

/// All nonsingular integer matrices with entries in [-bound, bound]
/// satisfying K = A^T K A for every generator: the rational kernel of
/// K -> K - A^T K A is computed first, then the integer points of the kernel
/// lattice inside the entry box are enumerated.
pub fn solve_intertwiner(rep: &IntegerRep, entry_bound: i64) -> Result<Vec<Intertwiner>> {
    if entry_bound < 1 {
        return Err(Error::domain("entry bound must be >= 1"));
    }
    let r = rep.rank;
    let m = r * r;
    // stacked linear system over all generators
    let mut rows: Vec<Vec<i64>> = Vec::with_capacity(rep.matrices.len() * m);
    for a in &rep.matrices {
        for i in 0..r {
            for j in 0..r {
                let mut row = vec![0i64; m];
                for p in 0..r {
                    for q in 0..r {
                        let mut v = -(a[p][i] * a[q][j]);
                        if p == i && q == j {
                            v += 1;
                        }
                        row[p * r + q] += v;
                    }
                }
                rows.push(row);
            }
        }
    }
    let kernel: Vec<Vec<i128>> = if rows.is_empty() {
        // no constraints: the whole lattice
        (0..m)
            .map(|i| (0..m).map(|j| if i == j { 1i128 } else { 0 }).collect())
            .collect()
    } else {
        integer_kernel_basis(&IMat::from_rows(&rows))
    };
    let d = kernel.len();
    if d == 0 {
        return Ok(Vec::new());
    }

    // coefficient box: pick d independent rows R of the kernel matrix and
    // bound |c| <= |R^{-1}| * entry_bound row-wise
    let mut chosen: Vec<usize> = Vec::new();
    {
        let mut work: Vec<Vec<BigRat>> = Vec::new();
        for row_idx in 0..m {
            if chosen.len() == d {
                break;
            }
            let cand: Vec<BigRat> = (0..d)
                .map(|c| BigRat::from_integer(kernel[c][row_idx]))
                .collect();
            let mut trial = work.clone();
            trial.push(cand.clone());
            if rational_rank(&trial) > work.len() {
                work.push(cand);
                chosen.push(row_idx);
            }
        }
    }
    let rinv = {
        // invert the d x d matrix of chosen rows over the rationals
        let rows_mat: Vec<Vec<BigRat>> = chosen
            .iter()
            .map(|&ri| {
                (0..d)
                    .map(|c| BigRat::from_integer(kernel[c][ri]))
                    .collect()
            })
            .collect();
        invert_rational(&rows_mat).ok_or_else(|| Error::domain("kernel rows not independent"))?
    };
    let mut c_bounds = vec![0i64; d];
    for i in 0..d {
        let row_sum: BigRat = (0..d).map(|j| abs_rat(&rinv[i][j])).sum();
        let b = row_sum * BigRat::from_integer(entry_bound as i128);
        c_bounds[i] = big_to_rat(&b.ceil()).to_integer();
    }
    let total: i128 = c_bounds.iter().map(|&c| 2 * c as i128 + 1).product();
    if total > 4_000_000 {
        return Err(Error::domain(format!(
            "intertwiner enumeration too large ({total} candidates); lower the bound"
        )));
    }

    let mut out = Vec::new();
    let mut coeff = vec![0i64; d];
    enumerate_box(&c_bounds, 0, &mut coeff, &mut |c: &[i64]| {
        let mut k_flat = vec![0i64; m];
        for (b_idx, &ci) in c.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            for e in 0..m {
                k_flat[e] += ci * kernel[b_idx][e] as i64;
            }
        }
        if k_flat.iter().any(|&x| x.abs() > entry_bound) || k_flat.iter().all(|&x| x == 0) {
            return;
        }
        let k: Vec<Vec<i64>> = (0..r)
            .map(|i| k_flat[i * r..(i + 1) * r].to_vec())
            .collect();
        if det(&IMat::from_rows(&k)) == 0 {
            return;
        }
        if satisfies_intertwiner_equation(&k, rep) {
            out.push(Intertwiner { matrix: k });
        }
    });
    out.sort();
    out.dedup();
    Ok(out)
}

fn enumerate_box(bounds: &[i64], idx: usize, coeff: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    if idx == bounds.len() {
        f(coeff);
        return;
    }
    for v in -bounds[idx]..=bounds[idx] {
        coeff[idx] = v;
        enumerate_box(bounds, idx + 1, coeff, f);
    }
}

fn abs_rat(r: &BigRat) -> BigRat {
    if r < &BigRat::zero() {
        -*r
    } else {
        *r
    }
}

fn rational_rank(rows: &[Vec<BigRat>]) -> usize {
    let mut m: Vec<Vec<BigRat>> = rows.to_vec();
    let nrows = m.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = m[0].len();
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][c].recip();
        for x in m[rank].iter_mut() {
            *x *= inv;
        }
        for i in 0..nrows {
            if i != rank && !m[i][c].is_zero() {
                let f = m[i][c];
                for j in 0..ncols {
                    let sub = f * m[rank][j];
                    m[i][j] -= sub;
                }
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

fn invert_rational(m: &[Vec<BigRat>]) -> Option<Vec<Vec<BigRat>>> {
    let n = m.len();
    let mut inv: Vec<Vec<BigRat>> = Vec::with_capacity(n);
    for col in 0..n {
        let mut rhs = vec![BigRat::zero(); n];
        rhs[col] = BigRat::one();
        let sol = solve_rational(m, &rhs)?;
        inv.push(sol);
    }
    // inv currently holds columns; transpose
    Some(
        (0..n)
            .map(|i| (0..n).map(|j| inv[j][i]).collect())
            .collect(),
    )
}

/// True iff a rank-3 matrix splits as [[*, *, 0], [*, *, 0], [0, 0, 1]].
pub fn block_structure_check(a: &[Vec<i64>]) -> bool {
    a.len() == 3
        && a.iter().all(|r| r.len() == 3)
        && a[0][2] == 0
        && a[1][2] == 0
        && a[2][0] == 0
        && a[2][1] == 0
        && a[2][2] == 1
}

/// The generic rank-3 block monodromy family: SL(2, Z) generators on the
/// 2-block, identity on the 1-block.
pub fn block_monodromy_family() -> IntegerRep {
    IntegerRep::new(
        3,
        vec![
            vec![vec![0, 1, 0], vec![-1, 0, 0], vec![0, 0, 1]],
            vec![vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]],
        ],
    )
    .expect("unimodular")
}

/// Mirror gluing contexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlueContext {
    Cy3,
    G2Alpha,
}

#[derive(Debug, Clone)]
pub struct MirrorGlueReport {
    pub map: AffineTorusMap,
    /// The generator whose fixed-locus neighbourhood the map glues.
    pub stabilizer: AffineTorusMap,
    pub commutes_with_stabilizer: bool,
    /// (generator, commutes) for the remaining generators; the glue map only
    /// needs to commute with the stabilizer, since the others move the glued
    /// neighbourhood off itself.
    pub other_generators: Vec<(AffineTorusMap, bool)>,
}

/// The gluing map of the named context, with commutation checks against the
/// relevant group action.
pub fn mirror_glue_map(ctx: GlueContext) -> MirrorGlueReport {
    let (map, stabilizer, others) = match ctx {
        GlueContext::Cy3 => {
            // (x1, y1, x2, y2, x3, y3) -> (x1, -y2, x2, y1, x3, y3)
            let mut rows = vec![vec![0i64; 6]; 6];
            rows[0][0] = 1;
            rows[1][3] = -1;
            rows[2][2] = 1;
            rows[3][1] = 1;
            rows[4][4] = 1;
            rows[5][5] = 1;
            let map = AffineTorusMap::new(rows, vec![crate::intlin::Rat::zero(); 6]).unwrap();
            (
                map,
                crate::orbifold::cy3_alpha(),
                vec![crate::orbifold::cy3_beta()],
            )
        }
        GlueContext::G2Alpha => {
            // (x1, ..., x7) -> (x1, -x4, x3, x2, x5, x6, x7)
            let mut rows = vec![vec![0i64; 7]; 7];
            rows[0][0] = 1;
            rows[1][3] = -1;
            rows[2][2] = 1;
            rows[3][1] = 1;
            rows[4][4] = 1;
            rows[5][5] = 1;
            rows[6][6] = 1;
            let map = AffineTorusMap::new(rows, vec![crate::intlin::Rat::zero(); 7]).unwrap();
            (
                map,
                crate::orbifold::g2_alpha(),
                vec![crate::orbifold::g2_beta(), crate::orbifold::g2_gamma()],
            )
        }
    };
    let commutes = |a: &AffineTorusMap, b: &AffineTorusMap| {
        compose(a, b).expect("same dim") == compose(b, a).expect("same dim")
    };
    let commutes_with_stabilizer = commutes(&map, &stabilizer);
    let other_generators = others
        .into_iter()
        .map(|g| (g.clone(), commutes(&map, &g)))
        .collect();
    MirrorGlueReport {
        map,
        stabilizer,
        commutes_with_stabilizer,
        other_generators,
    }
}

/// Named constant form with a convention-sensitivity flag: the global sign
/// convention of a relation suite flips exactly the sensitive forms.
#[derive(Debug, Clone)]
pub struct LabeledForm {
    pub name: &'static str,
    pub form: DifferentialForm,
    pub convention_sensitive: bool,
}

/// source, required sign, target (indices into the form list).
#[derive(Debug, Clone, Copy)]
pub struct FormRelation {
    pub source: usize,
    pub sign: f64,
    pub target: usize,
}

#[derive(Debug, Clone)]
pub struct RelationReport {
    /// (relation label, pass, residual) under the reported convention.
    pub per_relation: Vec<(String, bool, f64)>,
    /// The single global sign under which every relation holds, if any.
    pub convention: Option<i8>,
    pub pass: bool,
}

/// Check pullback relations under one global sign convention: for
/// epsilon in {+1, -1}, replace every convention-sensitive form f by
/// epsilon * f and require pullback(source) = sign * target for all
/// relations simultaneously. No per-relation sign choices.
pub fn pullback_relations_check(
    map: &AffineTorusMap,
    forms: &[LabeledForm],
    relations: &[FormRelation],
    tol: f64,
) -> Result<RelationReport> {
    let d = map.differential();
    let residuals = |eps: f64| -> Result<Vec<(String, f64)>> {
        let mut out = Vec::with_capacity(relations.len());
        for rel in relations {
            let adjust = |lf: &LabeledForm| {
                if lf.convention_sensitive {
                    lf.form.scale(eps)
                } else {
                    lf.form.clone()
                }
            };
            let src = adjust(&forms[rel.source]);
            let tgt = adjust(&forms[rel.target]).scale(rel.sign);
            let pulled = crate::forms::pullback(&d, &src)?;
            let res = pulled.max_coeff_distance(&tgt);
            let sign_str = if rel.sign >= 0.0 { "+" } else { "-" };
            out.push((
                format!(
                    "{}* {} = {}{}",
                    "map", forms[rel.source].name, sign_str, forms[rel.target].name
                ),
                res,
            ));
        }
        Ok(out)
    };
    for eps in [1.0f64, -1.0] {
        let res = residuals(eps)?;
        if res.iter().all(|(_, r)| *r <= tol) {
            return Ok(RelationReport {
                per_relation: res.into_iter().map(|(l, r)| (l, true, r)).collect(),
                convention: Some(eps as i8),
                pass: true,
            });
        }
    }
    let res = residuals(1.0)?;
    Ok(RelationReport {
        per_relation: res.into_iter().map(|(l, r)| (l, r <= tol, r)).collect(),
        convention: None,
        pass: false,
    })
}

/// The T^6 gluing relation suite: the flat 2-form on the z1, z2 block maps
/// to Im eta, Im eta maps to minus it, Re eta is preserved. Im eta carries
/// the convention flag.
pub fn cy3_glue_relation_data() -> (Vec<LabeledForm>, Vec<FormRelation>) {
    let omega_chart = DifferentialForm::constant(6, 2, &[(&[0, 1], 1.0), (&[2, 3], 1.0)]).unwrap();
    let eta = crate::forms::interleaved_dz(3, 0)
        .wedge(&crate::forms::interleaved_dz(3, 1))
        .unwrap();
    let forms = vec![
        LabeledForm {
            name: "omega'",
            form: omega_chart,
            convention_sensitive: false,
        },
        LabeledForm {
            name: "Re eta",
            form: eta.re,
            convention_sensitive: false,
        },
        LabeledForm {
            name: "Im eta",
            form: eta.im,
            convention_sensitive: true,
        },
    ];
    let relations = vec![
        FormRelation {
            source: 0,
            sign: 1.0,
            target: 2,
        }, // omega' -> Im eta
        FormRelation {
            source: 2,
            sign: -1.0,
            target: 0,
        }, // Im eta -> -omega'
        FormRelation {
            source: 1,
            sign: 1.0,
            target: 1,
        }, // Re eta -> Re eta
    ];
    (forms, relations)
}

/// The T^7 gluing relation suite: w1 -> w3, w3 -> -w1, w2 -> w2, with w3
/// carrying the convention flag.
pub fn g2_glue_relation_data() -> (Vec<LabeledForm>, Vec<FormRelation>) {
    let triple = crate::resolution::HyperkahlerTriple::standard();
    let forms = vec![
        LabeledForm {
            name: "omega1",
            form: triple.omega1.embed_in(7).unwrap(),
            convention_sensitive: false,
        },
        LabeledForm {
            name: "omega2",
            form: triple.omega2.embed_in(7).unwrap(),
            convention_sensitive: false,
        },
        LabeledForm {
            name: "omega3",
            form: triple.omega3.embed_in(7).unwrap(),
            convention_sensitive: true,
        },
    ];
    let relations = vec![
        FormRelation {
            source: 0,
            sign: 1.0,
            target: 2,
        }, // w1 -> w3
        FormRelation {
            source: 2,
            sign: -1.0,
            target: 0,
        }, // w3 -> -w1
        FormRelation {
            source: 1,
            sign: 1.0,
            target: 1,
        }, // w2 -> w2
    ];
    (forms, relations)
}

/// Cup-product period pairing: alpha(u)(v) = integral over the fiber of
/// (i_v Im phi) ∧ u.
pub fn period_map_alpha(
    u: &DifferentialForm,
    v: &[f64],
    pkg: &CalibrationPackage,
    fiber: &ImmersedGrid,
) -> Result<f64> {
    let CalibrationPackage::Cy { im_phi, .. } = pkg else {
        return Err(Error::domain("period map needs a Calabi-Yau package"));
    };
    if u.degree() != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: u.degree(),
        });
    }
    if v.len() != im_phi.ambient_dim() {
        return Err(Error::DimensionMismatch(v.len(), im_phi.ambient_dim()));
    }
    if v.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let integrand = wedge(&interior_product(v, im_phi)?, u)?;
    if integrand.degree() != fiber.param_dim {
        return Err(Error::DegreeMismatch {
            expected: fiber.param_dim,
            got: integrand.degree(),
        });
    }
    let mut acc = 0.0;
    for ((p, f), w) in fiber.points.iter().zip(&fiber.frames).zip(&fiber.weights) {
        acc += w * evaluate_on_frame(&integrand, &TangentFrame::from_columns(f), p)?;
    }
    Ok(acc)
}

/// Signed permutation between a cohomology basis and a homology basis.
#[derive(Debug, Clone)]
pub struct BasisMap {
    pub source_labels: Vec<String>,
    pub target_labels: Vec<String>,
    /// matrix[k][i] = coefficient of target k in the image of source i.
    pub matrix: Vec<Vec<i64>>,
}

impl BasisMap {
    pub fn new(
        source_labels: Vec<String>,
        target_labels: Vec<String>,
        matrix: Vec<Vec<i64>>,
    ) -> Result<Self> {
        let n = source_labels.len();
        if target_labels.len() != n || matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch {
                expected: format!("{n} x {n}"),
                got: "ragged".into(),
            });
        }
        for i in 0..n {
            let row_nz = matrix[i].iter().filter(|&&x| x != 0).count();
            let col_nz = (0..n).filter(|&k| matrix[k][i] != 0).count();
            if row_nz != 1 || col_nz != 1 || matrix[i].iter().any(|&x| x != 0 && x.abs() != 1) {
                return Err(Error::domain("basis map must be a signed permutation"));
            }
        }
        Ok(BasisMap {
            source_labels,
            target_labels,
            matrix,
        })
    }
}

/// The duality rotation in the oriented product-frame basis:
/// beta^1 -> -beta_2, beta^2 -> beta_1, [dy3] -> [S^1].
pub fn rho_oriented() -> BasisMap {
    BasisMap::new(
        vec!["beta^1".into(), "beta^2".into(), "[dy3]".into()],
        vec!["beta_1".into(), "beta_2".into(), "[S^1]".into()],
        vec![vec![0, 1, 0], vec![-1, 0, 0], vec![0, 0, 1]],
    )
    .expect("signed permutation")
}

/// The bad-neighbourhood product frame: the glued-convention symplectic
/// structure omega* = Im eta + dx3 ∧ dy3, the matching Im phi of
/// i eta ∧ dz3, the fiber oriented by Re eta on its 2-torus factor, the
/// oriented cohomology basis (beta^1, beta^2, [dy3]) with dual cycles, and
/// the normal fields v_i solved from [i_{v_i} omega*] = beta^i.
#[derive(Debug, Clone)]
pub struct MirrorProductFrame {
    pub omega_star: DifferentialForm,
    pub package: CalibrationPackage,
    pub fiber: ImmersedGrid,
    pub beta_basis: [DifferentialForm; 3],
    pub cycles: [DVector<f64>; 3],
    pub normals: [DVector<f64>; 3],
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })
}

pub fn mirror_product_frame(abc: [f64; 3], resolution: usize) -> Result<MirrorProductFrame> {
    // glued convention: Im eta flipped relative to dz1 ∧ dz2
    let eta_std = crate::forms::interleaved_dz(3, 0).wedge(&crate::forms::interleaved_dz(3, 1))?;
    let eta = crate::forms::ComplexForm {
        re: eta_std.re.clone(),
        im: eta_std.im.neg(),
    };
    let dz3 = crate::forms::interleaved_dz(3, 2);
    let phi = eta.wedge(&dz3)?.times_i();
    let omega_star = eta.im.add(&DifferentialForm::basis(6, &[4, 5])?)?;
    let package = CalibrationPackage::Cy {
        omega: omega_star.clone(),
        re_phi: phi.re,
        im_phi: phi.im,
    };

    // fiber: y-torus with the 2-torus factor oriented by Re eta
    // (Re eta(e1, e3) = -1, so the oriented frame is (e3, e1, e5))
    let n = 6;
    let count = resolution.pow(3);
    let mut frame = DMatrix::zeros(n, 3);
    frame[(3, 0)] = 1.0;
    frame[(1, 1)] = 1.0;
    frame[(5, 2)] = 1.0;
    let mut points = Vec::with_capacity(count);
    for code in 0..count {
        let mut p = vec![0.0; n];
        p[0] = abc[0].rem_euclid(1.0);
        p[2] = abc[1].rem_euclid(1.0);
        p[4] = abc[2].rem_euclid(1.0);
        let mut rem = code;
        for &coord in &[3usize, 1, 5] {
            p[coord] = (rem % resolution) as f64 / resolution as f64;
            rem /= resolution;
        }
        points.push(p);
    }
    let fiber = ImmersedGrid::new(
        3,
        n,
        points,
        vec![frame; count],
        vec![1.0 / count as f64; count],
    )?;

    let beta_basis = [
        DifferentialForm::dx(6, 3),
        DifferentialForm::dx(6, 1),
        DifferentialForm::dx(6, 5),
    ];
    let cycles = [unit(6, 3), unit(6, 1), unit(6, 5)];

    // solve [i_{v} omega*] = beta^i with v in span(e0, e2, e4)
    let candidates = [unit(6, 0), unit(6, 2), unit(6, 4)];
    let contracted: Vec<DifferentialForm> = candidates
        .iter()
        .map(|v| interior_product(v.as_slice(), &omega_star).expect("degree 2"))
        .collect();
    let mut normals: Vec<DVector<f64>> = Vec::with_capacity(3);
    for beta in &beta_basis {
        // express beta as a combination of the contracted forms on the
        // one-form basis dx1, dx3, dx5 (indices 1, 3, 5)
        let idx = [1u8, 3, 5];
        let mut a = DMatrix::zeros(3, 3);
        let mut b = DVector::zeros(3);
        for (row, &i) in idx.iter().enumerate() {
            for col in 0..3 {
                a[(row, col)] = contracted[col].coefficient(&[i]);
            }
            b[row] = beta.coefficient(&[i]);
        }
        let sol = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::degenerate("omega* does not pair the normals with the basis"))?;
        let mut v = DVector::zeros(6);
        for col in 0..3 {
            v += &candidates[col] * sol[col];
        }
        normals.push(v);
    }
    Ok(MirrorProductFrame {
        omega_star,
        package,
        fiber,
        beta_basis,
        cycles,
        normals: [normals[0].clone(), normals[1].clone(), normals[2].clone()],
    })
}

#[derive(Debug, Clone)]
pub struct MirrorCheckReport {
    pub alpha_matrix: [[f64; 3]; 3],
    pub xi_rho_matrix: [[f64; 3]; 3],
    pub max_deviation: f64,
    pub pass: bool,
}

/// Evaluate the period map alpha and xi' ∘ rho on the product-frame bases
/// and compare them as matrices.
pub fn symplectic_mirror_check(
    rho: &BasisMap,
    frame: &MirrorProductFrame,
) -> Result<MirrorCheckReport> {
    if frame.fiber.total_weight() < 1e-9 {
        return Err(Error::degenerate("fiber has vanishing total volume"));
    }
    let mut alpha_matrix = [[0.0; 3]; 3];
    for (i, beta) in frame.beta_basis.iter().enumerate() {
        for (j, v) in frame.normals.iter().enumerate() {
            alpha_matrix[i][j] =
                period_map_alpha(beta, v.as_slice(), &frame.package, &frame.fiber)?;
        }
    }
    // (xi' ∘ rho)(beta^i)(v_j) = sum_k rho[k][i] * (i_{v_j} omega*)(cycle_k)
    let mut xi_rho_matrix = [[0.0; 3]; 3];
    for j in 0..3 {
        let contracted = interior_product(frame.normals[j].as_slice(), &frame.omega_star)?;
        for i in 0..3 {
            let mut acc = 0.0;
            for k in 0..3 {
                let coeff = rho.matrix[k][i];
                if coeff != 0 {
                    let cyc = TangentFrame::new(vec![frame.cycles[k].clone()]);
                    acc += coeff as f64 * evaluate_on_frame(&contracted, &cyc, &[0.0; 6])?;
                }
            }
            xi_rho_matrix[i][j] = acc;
        }
    }
    let mut max_deviation = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            max_deviation = max_deviation.max((alpha_matrix[i][j] - xi_rho_matrix[i][j]).abs());
        }
    }
    Ok(MirrorCheckReport {
        alpha_matrix,
        xi_rho_matrix,
        max_deviation,
        pass: max_deviation <= 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dual_rep_examples() {
        let id = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(dual_rep(&id).unwrap(), id);
        let shear = vec![vec![1, 1], vec![0, 1]];
        assert_eq!(dual_rep(&shear).unwrap(), vec![vec![1, 0], vec![-1, 1]]);
        // dual of dual is the original
        assert_eq!(dual_rep(&dual_rep(&shear).unwrap()).unwrap(), shear);
        // non-unimodular rejected
        assert!(dual_rep(&[vec![2, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn dual_rep_homomorphism_on_commuting_pairs() {
        let a = vec![vec![1, 2], vec![0, 1]];
        let b = vec![vec![1, 5], vec![0, 1]];
        let mul = |x: &Vec<Vec<i64>>, y: &Vec<Vec<i64>>| -> Vec<Vec<i64>> {
            (0..2)
                .map(|i| {
                    (0..2)
                        .map(|j| (0..2).map(|k| x[i][k] * y[k][j]).sum())
                        .collect()
                })
                .collect()
        };
        let ab = mul(&a, &b);
        let dual_ab = dual_rep(&ab).unwrap();
        let dual_a_dual_b = mul(&dual_rep(&a).unwrap(), &dual_rep(&b).unwrap());
        assert_eq!(dual_ab, dual_a_dual_b);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        /// dual(A^m A^n) = dual(A^m) dual(A^n) exactly: powers of one
        /// unimodular matrix always commute.
        #[test]
        fn dual_rep_homomorphism_on_powers(
            s in -2i64..=2, t in -2i64..=2, m in 1usize..=3, n in 1usize..=3,
        ) {
            let mul = |x: &Vec<Vec<i64>>, y: &Vec<Vec<i64>>| -> Vec<Vec<i64>> {
                (0..2)
                    .map(|i| (0..2).map(|j| (0..2).map(|k| x[i][k] * y[k][j]).sum()).collect())
                    .collect()
            };
            // random unimodular from two shears
            let a = mul(&vec![vec![1, s], vec![0, 1]], &vec![vec![1, 0], vec![t, 1]]);
            let pow = |k: usize| {
                let mut acc = vec![vec![1, 0], vec![0, 1]];
                for _ in 0..k {
                    acc = mul(&acc, &a);
                }
                acc
            };
            let (am, an) = (pow(m), pow(n));
            let lhs = dual_rep(&mul(&am, &an)).unwrap();
            let rhs = mul(&dual_rep(&am).unwrap(), &dual_rep(&an).unwrap());
            proptest::prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn intertwiner_for_sl2_generators() {
        let rep = IntegerRep::new(
            2,
            vec![vec![vec![0, 1], vec![-1, 0]], vec![vec![1, 1], vec![0, 1]]],
        )
        .unwrap();
        let sols = solve_intertwiner(&rep, 2).unwrap();
        let j = Intertwiner {
            matrix: vec![vec![0, 1], vec![-1, 0]],
        };
        assert!(sols.contains(&j), "solutions: {sols:?}");
        for s in &sols {
            assert!(s.satisfies(&rep));
        }
        // oracle: brute-force enumeration of the full entry box
        let mut brute = Vec::new();
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                for c in -2i64..=2 {
                    for d in -2i64..=2 {
                        let k = vec![vec![a, b], vec![c, d]];
                        if a * d - b * c != 0 && satisfies_intertwiner_equation(&k, &rep) {
                            brute.push(Intertwiner { matrix: k });
                        }
                    }
                }
            }
        }
        brute.sort();
        assert_eq!(sols, brute);
    }

    #[test]
    fn intertwiner_trivial_rep_gives_all_invertible() {
        let rep = IntegerRep::new(2, vec![vec![vec![1, 0], vec![0, 1]]]).unwrap();
        let sols = solve_intertwiner(&rep, 1).unwrap();
        // all nonsingular matrices with entries in {-1, 0, 1}
        let mut count = 0;
        for a in -1i64..=1 {
            for b in -1i64..=1 {
                for c in -1i64..=1 {
                    for d in -1i64..=1 {
                        if a * d - b * c != 0 {
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(sols.len(), count);
    }

    #[test]
    fn intertwiner_unaffected_by_minus_identity() {
        let with = IntegerRep::new(
            2,
            vec![
                vec![vec![0, 1], vec![-1, 0]],
                vec![vec![-1, 0], vec![0, -1]],
            ],
        )
        .unwrap();
        let without = IntegerRep::new(2, vec![vec![vec![0, 1], vec![-1, 0]]]).unwrap();
        assert_eq!(
            solve_intertwiner(&with, 2).unwrap(),
            solve_intertwiner(&without, 2).unwrap()
        );
    }

    #[test]
    fn intertwiner_for_block_family_restricts_correctly() {
        let sols = solve_intertwiner(&block_monodromy_family(), 1).unwrap();
        let expected = Intertwiner {
            matrix: vec![vec![0, 1, 0], vec![-1, 0, 0], vec![0, 0, 1]],
        };
        assert!(sols.contains(&expected), "solutions: {sols:?}");
        for s in &sols {
            // 2-block is a multiple of the rotation, 1-block diagonal
            assert_eq!(s.matrix[0][0], 0);
            assert_eq!(s.matrix[1][1], 0);
            assert_eq!(s.matrix[0][1], -s.matrix[1][0]);
            assert_eq!(s.matrix[0][2], 0);
            assert_eq!(s.matrix[2][0], 0);
        }
    }

    #[test]
    fn block_structure_examples() {
        assert!(block_structure_check(&[
            vec![0, 1, 0],
            vec![-1, 0, 0],
            vec![0, 0, 1]
        ]));
        assert!(block_structure_check(&[
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, 1]
        ]));
        assert!(!block_structure_check(&[
            vec![1, 0, 1],
            vec![0, 1, 0],
            vec![0, 0, 1]
        ]));
    }

    #[test]
    fn glue_map_squares() {
        let mu = mirror_glue_map(GlueContext::Cy3);
        let mu2 = compose(&mu.map, &mu.map).unwrap();
        // (x1, -y1, x2, -y2, x3, y3)
        let expected =
            AffineTorusMap::diag(&[1, -1, 1, -1, 1, 1], vec![crate::intlin::Rat::zero(); 6])
                .unwrap();
        assert_eq!(mu2, expected);

        let eta = mirror_glue_map(GlueContext::G2Alpha);
        let eta2 = compose(&eta.map, &eta.map).unwrap();
        let expected = AffineTorusMap::diag(
            &[1, -1, 1, -1, 1, 1, 1],
            vec![crate::intlin::Rat::zero(); 7],
        )
        .unwrap();
        assert_eq!(eta2, expected);
    }

    #[test]
    fn glue_map_commutation_pattern() {
        // the stabilizer always commutes; among the rest, the T^6 beta and
        // the T^7 beta act with opposite signs on the swapped coordinate
        // pair and do not commute (they move the glued neighbourhood off
        // itself, so the construction never needs them to), while the T^7
        // gamma acts with equal signs there and does commute
        let cy3 = mirror_glue_map(GlueContext::Cy3);
        assert!(cy3.commutes_with_stabilizer);
        assert_eq!(cy3.other_generators.len(), 1);
        assert!(!cy3.other_generators[0].1);

        let g2 = mirror_glue_map(GlueContext::G2Alpha);
        assert!(g2.commutes_with_stabilizer);
        let beta_commutes = g2.other_generators[0].1;
        let gamma_commutes = g2.other_generators[1].1;
        assert!(!beta_commutes);
        assert!(gamma_commutes);
    }

    #[test]
    fn cy3_relations_hold_under_one_convention() {
        let (forms, relations) = cy3_glue_relation_data();
        let map = mirror_glue_map(GlueContext::Cy3).map;
        let rep = pullback_relations_check(&map, &forms, &relations, 1e-12).unwrap();
        assert!(rep.pass, "{:?}", rep.per_relation);
        assert_eq!(rep.convention, Some(-1));
    }

    #[test]
    fn g2_relations_hold_under_one_convention() {
        let (forms, relations) = g2_glue_relation_data();
        let map = mirror_glue_map(GlueContext::G2Alpha).map;
        let rep = pullback_relations_check(&map, &forms, &relations, 1e-12).unwrap();
        assert!(rep.pass, "{:?}", rep.per_relation);
        assert_eq!(rep.convention, Some(-1));
    }

    #[test]
    fn identity_map_passes_any_reflexive_relations() {
        let (forms, _) = cy3_glue_relation_data();
        let relations: Vec<FormRelation> = (0..forms.len())
            .map(|i| FormRelation {
                source: i,
                sign: 1.0,
                target: i,
            })
            .collect();
        let id = AffineTorusMap::identity(6);
        let rep = pullback_relations_check(&id, &forms, &relations, 1e-12).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.convention, Some(1));
    }

    #[test]
    fn irreconcilable_relations_are_reported() {
        let (forms, _) = cy3_glue_relation_data();
        // demand omega' -> omega' under mu, which fails for both signs
        let relations = vec![FormRelation {
            source: 0,
            sign: 1.0,
            target: 0,
        }];
        let map = mirror_glue_map(GlueContext::Cy3).map;
        let rep = pullback_relations_check(&map, &forms, &relations, 1e-12).unwrap();
        assert!(!rep.pass);
        assert!(rep.convention.is_none());
        assert!(rep.per_relation[0].2 > 0.5);
    }

    #[test]
    fn period_map_vanishes_on_zero_normal() {
        let frame = mirror_product_frame([0.3, 0.3, 0.3], 2).unwrap();
        let v = vec![0.0; 6];
        let val = period_map_alpha(&frame.beta_basis[0], &v, &frame.package, &frame.fiber).unwrap();
        assert_eq!(val, 0.0);
    }

    #[test]
    fn period_map_is_bilinear() {
        let frame = mirror_product_frame([0.3, 0.3, 0.3], 2).unwrap();
        let u1 = &frame.beta_basis[0];
        let u2 = &frame.beta_basis[1];
        let v1 = frame.normals[0].clone();
        let v2 = frame.normals[2].clone();
        // u-linearity with rational weights
        let u_comb = u1.scale(2.0 / 3.0).add(&u2.scale(-5.0 / 7.0)).unwrap();
        let lhs = period_map_alpha(&u_comb, v1.as_slice(), &frame.package, &frame.fiber).unwrap();
        let rhs = 2.0 / 3.0
            * period_map_alpha(u1, v1.as_slice(), &frame.package, &frame.fiber).unwrap()
            - 5.0 / 7.0
                * period_map_alpha(u2, v1.as_slice(), &frame.package, &frame.fiber).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        // v-linearity
        let v_comb = (&v1 * 0.25) + (&v2 * 1.5);
        let lhs = period_map_alpha(u1, v_comb.as_slice(), &frame.package, &frame.fiber).unwrap();
        let rhs = 0.25 * period_map_alpha(u1, v1.as_slice(), &frame.package, &frame.fiber).unwrap()
            + 1.5 * period_map_alpha(u1, v2.as_slice(), &frame.package, &frame.fiber).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn period_map_reproduces_basis_identities() {
        let frame = mirror_product_frame([0.3, 0.3, 0.3], 2).unwrap();
        let rep = symplectic_mirror_check(&rho_oriented(), &frame).unwrap();
        let expected = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(rep.alpha_matrix[i][j], expected[i][j], epsilon = 1e-12);
            }
        }
        assert!(rep.pass, "deviation {}", rep.max_deviation);
    }

    #[test]
    fn sign_flipped_rho_is_detected() {
        let frame = mirror_product_frame([0.1, 0.7, 0.4], 2).unwrap();
        let flipped = BasisMap::new(
            vec!["beta^1".into(), "beta^2".into(), "[dy3]".into()],
            vec!["beta_1".into(), "beta_2".into(), "[S^1]".into()],
            vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]],
        )
        .unwrap();
        let rep = symplectic_mirror_check(&flipped, &frame).unwrap();
        assert!(!rep.pass);
        assert!(rep.max_deviation > 0.5);
    }

    #[test]
    fn basis_map_validates_signed_permutation() {
        assert!(BasisMap::new(
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            vec![vec![1, 1], vec![0, 1]],
        )
        .is_err());
        assert!(BasisMap::new(
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            vec![vec![0, 2], vec![1, 0]],
        )
        .is_err());
    }
}
