//! Fibration laboratory: discretized submanifolds with exact affine frames,
//! defect functionals for the special-Lagrangian and coassociative
//! conditions, the explicit affine torus-fiber families on T^6 and T^7,
//! tube tests against fixed loci, the local product split inside a tube, and
//! the pointwise orbit test for 3-forms on R^7.

use crate::error::{Error, Result};
use crate::forms::{
    combinations, evaluate_on_frame, hodge_star, interior_product, small_det, wedge,
    DifferentialForm, MetricAtPoint, TangentFrame,
};
use crate::intlin::Rat;
use crate::orbifold::AffineSubtorus;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Discretized parametrized submanifold: sample points, per-point tangent
/// frames (n x k columns), per-point quadrature weights summing to the
/// parametrization-domain volume.
#[derive(Debug, Clone)]
pub struct ImmersedGrid {
    pub param_dim: usize,
    pub ambient_dim: usize,
    pub points: Vec<Vec<f64>>,
    pub frames: Vec<DMatrix<f64>>,
    pub weights: Vec<f64>,
}

impl ImmersedGrid {
    pub fn new(
        param_dim: usize,
        ambient_dim: usize,
        points: Vec<Vec<f64>>,
        frames: Vec<DMatrix<f64>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if points.len() != frames.len() || points.len() != weights.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} frames/weights", points.len()),
                got: format!("{} frames, {} weights", frames.len(), weights.len()),
            });
        }
        for (i, f) in frames.iter().enumerate() {
            if f.nrows() != ambient_dim || f.ncols() != param_dim {
                return Err(Error::ShapeMismatch {
                    expected: format!("{ambient_dim} x {param_dim} frame"),
                    got: format!("{} x {} at point {i}", f.nrows(), f.ncols()),
                });
            }
            let gram = f.transpose() * f;
            if small_det(&gram) <= 0.0 {
                return Err(Error::degenerate(format!(
                    "rank-deficient frame at point {i}"
                )));
            }
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::degenerate("weights must be positive"));
        }
        Ok(ImmersedGrid {
            param_dim,
            ambient_dim,
            points,
            frames,
            weights,
        })
    }

    /// A single point with a single frame, weight 1 (a tangent plane).
    pub fn plane(point: Vec<f64>, frame: DMatrix<f64>) -> Result<Self> {
        let (n, k) = (frame.nrows(), frame.ncols());
        ImmersedGrid::new(k, n, vec![point], vec![frame], vec![1.0])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// The two affine fiber families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberFamily {
    /// T^6 with interleaved coordinates (x1, y1, x2, y2, x3, y3); the fiber
    /// fixes the real parts (x1, x2, x3) = (a, b, c).
    Cy3,
    /// T^7 with coordinates (x1, ..., x7); the fiber fixes (x1, x3, x6) =
    /// (a, b, c).
    G2,
}

impl FiberFamily {
    pub fn ambient_dim(self) -> usize {
        match self {
            FiberFamily::Cy3 => 6,
            FiberFamily::G2 => 7,
        }
    }

    /// Global indices of the coordinates the fiber parameters pin.
    pub fn fixed_coords(self) -> &'static [usize] {
        match self {
            FiberFamily::Cy3 => &[0, 2, 4],
            FiberFamily::G2 => &[0, 2, 5],
        }
    }

    /// Global indices of the free (tangent) coordinates, in frame order.
    pub fn free_coords(self) -> &'static [usize] {
        match self {
            FiberFamily::Cy3 => &[1, 3, 5],
            FiberFamily::G2 => &[1, 3, 4, 6],
        }
    }
}

/// Affine torus fiber sampled on a uniform periodic grid with exact constant
/// frames and uniform weights summing to 1.
pub fn make_fiber(
    family: FiberFamily,
    a: f64,
    b: f64,
    c: f64,
    resolution: usize,
) -> Result<ImmersedGrid> {
    if resolution < 2 {
        return Err(Error::domain("fiber resolution must be >= 2"));
    }
    let n = family.ambient_dim();
    let free = family.free_coords();
    let fixed = family.fixed_coords();
    let k = free.len();
    let vals = [a.rem_euclid(1.0), b.rem_euclid(1.0), c.rem_euclid(1.0)];
    let mut frame = DMatrix::zeros(n, k);
    for (col, &coord) in free.iter().enumerate() {
        frame[(coord, col)] = 1.0;
    }
    let count = resolution.pow(k as u32);
    let weight = 1.0 / count as f64;
    let mut points = Vec::with_capacity(count);
    for code in 0..count {
        let mut p = vec![0.0; n];
        for (slot, &coord) in fixed.iter().enumerate() {
            p[coord] = vals[slot];
        }
        let mut rem = code;
        for &coord in free {
            p[coord] = (rem % resolution) as f64 / resolution as f64;
            rem /= resolution;
        }
        points.push(p);
    }
    ImmersedGrid::new(k, n, points, vec![frame; count], vec![weight; count])
}

/// Calibration data: either a Calabi-Yau package (symplectic 2-form plus the
/// real and imaginary parts of the holomorphic volume form) or a 7-manifold
/// package (the 3-form and its Hodge dual).
#[derive(Debug, Clone)]
pub enum CalibrationPackage {
    Cy {
        omega: DifferentialForm,
        re_phi: DifferentialForm,
        im_phi: DifferentialForm,
    },
    SevenSphere {
        phi3: DifferentialForm,
        star_phi: DifferentialForm,
    },
}

impl CalibrationPackage {
    pub fn ambient_dim(&self) -> usize {
        match self {
            CalibrationPackage::Cy { omega, .. } => omega.ambient_dim(),
            CalibrationPackage::SevenSphere { phi3, .. } => phi3.ambient_dim(),
        }
    }
}

/// Flat T^6 package: omega = sum dx_j ∧ dy_j and phi = i (dz1 ∧ dz2) ∧ dz3,
/// for which the (y1, y2, y3) fibers are calibrated by Re phi.
pub fn cy3_flat_package() -> CalibrationPackage {
    let omega = DifferentialForm::constant(6, 2, &[(&[0, 1], 1.0), (&[2, 3], 1.0), (&[4, 5], 1.0)])
        .unwrap();
    let eta = crate::forms::interleaved_dz(3, 0)
        .wedge(&crate::forms::interleaved_dz(3, 1))
        .unwrap();
    let phi = eta
        .wedge(&crate::forms::interleaved_dz(3, 2))
        .unwrap()
        .times_i();
    CalibrationPackage::Cy {
        omega,
        re_phi: phi.re,
        im_phi: phi.im,
    }
}

/// The standard 3-form on R^7 in this crate's conventions: with the
/// hyperkahler triple on coordinates (x1..x4) and delta_i the 1-form dual to
/// x_{8-i},
///   phi0 = w3∧d1 + w2∧d2 + w1∧d3 + d1∧d2∧d3.
///
/// The pairing of the triple with the deltas is the labeling choice left
/// open by the complex structures; this is the assignment for which the
/// induced bilinear form is definite (the naive w1∧d1 + w2∧d2 + w3∧d3
/// pairing lands in the split orbit). On the (x2, x4, x5, x7) fibers phi0
/// restricts to zero and its Hodge dual restricts to +1.
pub fn g2_standard_3form() -> DifferentialForm {
    let triple = crate::resolution::HyperkahlerTriple::standard();
    g2_3form_from_triple([&triple.omega3, &triple.omega2, &triple.omega1])
}

/// The glued mirror 3-form: the pushforward of phi0 under the gluing map
/// (x1,...,x7) -> (x1,-x4,x3,x2,x5,x6,x7), i.e.
///   phi* = -w1∧d1 + w2∧d2 + w3∧d3 + d1∧d2∧d3,
/// the unique form with eta*(phi*) = phi0 near the gluing boundary. Definite
/// by orbit invariance.
pub fn g2_mirror_3form() -> DifferentialForm {
    let triple = crate::resolution::HyperkahlerTriple::standard();
    g2_3form_from_triple([&triple.omega1.neg(), &triple.omega2, &triple.omega3])
}

/// Assemble a 3-form on R^7 from three 2-forms on the (x1..x4) block:
/// sum_i f_i ∧ delta_i + d1∧d2∧d3 with delta_1 = dx7, delta_2 = dx6,
/// delta_3 = dx5 (0-indexed: 6, 5, 4).
pub fn g2_3form_from_triple(fs: [&DifferentialForm; 3]) -> DifferentialForm {
    let deltas = [6u8, 5, 4];
    let mut acc = DifferentialForm::zero(7, 3);
    for (f, &d) in fs.iter().zip(&deltas) {
        let embedded = f.embed_in(7).unwrap();
        let term = wedge(&embedded, &DifferentialForm::dx(7, d)).unwrap();
        acc = acc.add(&term).unwrap();
    }
    let d123 = wedge(
        &wedge(&DifferentialForm::dx(7, 6), &DifferentialForm::dx(7, 5)).unwrap(),
        &DifferentialForm::dx(7, 4),
    )
    .unwrap();
    acc.add(&d123).unwrap()
}

/// The flat G2 package (phi0 and its Euclidean Hodge dual).
pub fn g2_flat_package() -> CalibrationPackage {
    let phi3 = g2_standard_3form();
    let star_phi = hodge_star(&phi3, &MetricAtPoint::euclidean(7), 1).unwrap();
    CalibrationPackage::SevenSphere { phi3, star_phi }
}

#[derive(Debug, Clone)]
pub struct SlagDefect {
    pub max_omega: f64,
    pub max_im_phi: f64,
    pub worst_point_omega: usize,
    pub worst_point_im_phi: usize,
}

/// Maxima over grid points of the normalized restrictions of omega (over all
/// frame pairs) and of Im phi (on the full frame).
pub fn slag_defect(grid: &ImmersedGrid, pkg: &CalibrationPackage) -> Result<SlagDefect> {
    let CalibrationPackage::Cy { omega, im_phi, .. } = pkg else {
        return Err(Error::domain("slag_defect needs a Calabi-Yau package"));
    };
    if grid.ambient_dim != omega.ambient_dim() {
        return Err(Error::DimensionMismatch(
            grid.ambient_dim,
            omega.ambient_dim(),
        ));
    }
    let mut out = SlagDefect {
        max_omega: 0.0,
        max_im_phi: 0.0,
        worst_point_omega: 0,
        worst_point_im_phi: 0,
    };
    for (i, (p, f)) in grid.points.iter().zip(&grid.frames).enumerate() {
        for pair in combinations(grid.param_dim, 2) {
            let (c0, c1) = (pair[0] as usize, pair[1] as usize);
            let v0 = f.column(c0).into_owned();
            let v1 = f.column(c1).into_owned();
            let sub = DMatrix::from_fn(
                grid.ambient_dim,
                2,
                |r, c| if c == 0 { v0[r] } else { v1[r] },
            );
            let gram = sub.transpose() * &sub;
            let vol = small_det(&gram).max(0.0).sqrt();
            if vol == 0.0 {
                return Err(Error::degenerate(format!(
                    "rank-deficient pair at point {i}"
                )));
            }
            let val = evaluate_on_frame(omega, &TangentFrame::new(vec![v0, v1]), p)?.abs() / vol;
            if val > out.max_omega {
                out.max_omega = val;
                out.worst_point_omega = i;
            }
        }
        let gram = f.transpose() * f;
        let vol = small_det(&gram).max(0.0).sqrt();
        let frame = TangentFrame::from_columns(f);
        let val = evaluate_on_frame(im_phi, &frame, p)?.abs() / vol;
        if val > out.max_im_phi {
            out.max_im_phi = val;
            out.worst_point_im_phi = i;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RatioRange {
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Per-point ratio of the calibrating form on the frame to the Riemannian
/// frame volume; calibrated means both ends are 1.
pub fn calibration_ratio(
    grid: &ImmersedGrid,
    calibrating_form: &DifferentialForm,
    g: &MetricAtPoint,
) -> Result<RatioRange> {
    if calibrating_form.degree() != grid.param_dim {
        return Err(Error::DegreeMismatch {
            expected: grid.param_dim,
            got: calibrating_form.degree(),
        });
    }
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    for (p, f) in grid.points.iter().zip(&grid.frames) {
        let vol = g.frame_volume(f);
        if vol == 0.0 {
            return Err(Error::degenerate("zero frame volume"));
        }
        let val = evaluate_on_frame(calibrating_form, &TangentFrame::from_columns(f), p)?;
        let ratio = val / vol;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    Ok(RatioRange {
        min_ratio,
        max_ratio,
    })
}

/// Max over points of the largest normalized |phi(v_i, v_j, v_l)| over frame
/// triples.
pub fn coassoc_defect(grid: &ImmersedGrid, phi3: &DifferentialForm) -> Result<f64> {
    if phi3.degree() != 3 {
        return Err(Error::DegreeMismatch {
            expected: 3,
            got: phi3.degree(),
        });
    }
    if grid.ambient_dim != phi3.ambient_dim() {
        return Err(Error::DimensionMismatch(
            grid.ambient_dim,
            phi3.ambient_dim(),
        ));
    }
    let mut worst = 0.0f64;
    for (i, (p, f)) in grid.points.iter().zip(&grid.frames).enumerate() {
        for triple in combinations(grid.param_dim, 3) {
            let cols: Vec<DVector<f64>> = triple
                .iter()
                .map(|&c| f.column(c as usize).into_owned())
                .collect();
            let sub = DMatrix::from_fn(grid.ambient_dim, 3, |r, c| cols[c][r]);
            let gram = sub.transpose() * &sub;
            let vol = small_det(&gram).max(0.0).sqrt();
            if vol == 0.0 {
                return Err(Error::degenerate(format!(
                    "rank-deficient triple at point {i}"
                )));
            }
            let val = evaluate_on_frame(phi3, &TangentFrame::new(cols), p)?.abs() / vol;
            worst = worst.max(val);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct TubeHit {
    pub locus_index: usize,
    pub distance: f64,
}

fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn mod1_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Exact distance between the affine fiber and each axis-aligned fixed-locus
/// component (distance between parallel affine subtori mod 1, over the
/// coordinates in neither direction span); hits within `radius` are
/// returned.
pub fn fiber_meets_neighborhood(
    family: FiberFamily,
    abc: [f64; 3],
    loci: &[AffineSubtorus],
    radius: f64,
) -> Result<Vec<TubeHit>> {
    if !(radius > 0.0) {
        return Err(Error::domain("tube radius must be positive"));
    }
    let n = family.ambient_dim();
    let fixed = family.fixed_coords();
    let free = family.free_coords();
    let mut fiber_vals = vec![f64::NAN; n];
    for (slot, &coord) in fixed.iter().enumerate() {
        fiber_vals[coord] = abc[slot].rem_euclid(1.0);
    }
    let mut hits = Vec::new();
    for (li, locus) in loci.iter().enumerate() {
        if locus.ambient_dim() != n {
            return Err(Error::DimensionMismatch(locus.ambient_dim(), n));
        }
        let dirs = locus
            .axis_directions()
            .ok_or_else(|| Error::domain("tube distance implemented for axis-aligned loci only"))?;
        let mut d2 = 0.0;
        for coord in 0..n {
            if free.contains(&coord) || dirs.contains(&coord) {
                continue;
            }
            let base = rat_f64(locus.base_point[coord]);
            d2 += mod1_dist(fiber_vals[coord], base).powi(2);
        }
        let distance = d2.sqrt();
        if distance <= radius {
            hits.push(TubeHit {
                locus_index: li,
                distance,
            });
        }
    }
    Ok(hits)
}

/// Distance from a point to each axis-aligned locus component; hits within
/// `radius` are returned.
pub fn point_meets_neighborhood(
    p: &[f64],
    loci: &[AffineSubtorus],
    radius: f64,
) -> Result<Vec<TubeHit>> {
    if !(radius > 0.0) {
        return Err(Error::domain("tube radius must be positive"));
    }
    let mut hits = Vec::new();
    for (li, locus) in loci.iter().enumerate() {
        if locus.ambient_dim() != p.len() {
            return Err(Error::DimensionMismatch(locus.ambient_dim(), p.len()));
        }
        let dirs = locus
            .axis_directions()
            .ok_or_else(|| Error::domain("tube distance implemented for axis-aligned loci only"))?;
        let mut d2 = 0.0;
        for coord in 0..p.len() {
            if dirs.contains(&coord) {
                continue;
            }
            d2 += mod1_dist(p[coord], rat_f64(locus.base_point[coord])).powi(2);
        }
        let distance = d2.sqrt();
        if distance <= radius {
            hits.push(TubeHit {
                locus_index: li,
                distance,
            });
        }
    }
    Ok(hits)
}

/// Minimum pairwise distance between components of different maps' loci;
/// tubes of radius r are disjoint when this is >= 2r.
pub fn min_locus_separation(loci_by_map: &[Vec<AffineSubtorus>]) -> Result<f64> {
    let mut min_d = f64::INFINITY;
    for i in 0..loci_by_map.len() {
        for j in i + 1..loci_by_map.len() {
            for a in &loci_by_map[i] {
                for b in &loci_by_map[j] {
                    let da = a.axis_directions().ok_or_else(|| {
                        Error::domain("separation implemented for axis-aligned loci only")
                    })?;
                    let db = b.axis_directions().ok_or_else(|| {
                        Error::domain("separation implemented for axis-aligned loci only")
                    })?;
                    let mut d2 = 0.0;
                    for coord in 0..a.ambient_dim() {
                        if da.contains(&coord) || db.contains(&coord) {
                            continue;
                        }
                        d2 += mod1_dist(rat_f64(a.base_point[coord]), rat_f64(b.base_point[coord]))
                            .powi(2);
                    }
                    min_d = min_d.min(d2.sqrt());
                }
            }
        }
    }
    Ok(min_d)
}

/// Description of the residual torus factor after a product split.
#[derive(Debug, Clone)]
pub struct TorusFactor {
    /// Global coordinate indices of the free directions.
    pub free_coords: Vec<usize>,
    /// Global (index, value) pairs of the fixed coordinates in the factor.
    pub fixed_coords: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct ProductSplit {
    /// The fiber factor inside the 4-dimensional resolution chart, in
    /// chart-local coordinates centered at the fixed component.
    pub chart_factor: ImmersedGrid,
    /// Global indices of the chart coordinates, in chart order.
    pub chart_coords: Vec<usize>,
    pub torus_factor: TorusFactor,
}

/// Split an affine fiber meeting exactly one tube into its chart factor and
/// residual torus factor. The chart is spanned by the coordinates normal to
/// the locus component.
pub fn product_split(
    family: FiberFamily,
    abc: [f64; 3],
    resolution: usize,
    loci: &[AffineSubtorus],
    radius: f64,
) -> Result<ProductSplit> {
    let hits = fiber_meets_neighborhood(family, abc, loci, radius)?;
    if hits.is_empty() {
        return Err(Error::domain("fiber meets no tube; nothing to split"));
    }
    // Components differing only along fiber directions share one enlarged
    // neighborhood (the tube sweeps the full fiber-parallel torus); group
    // hits by direction set and normal-coordinate base.
    let free = family.free_coords();
    let mut classes: Vec<(Vec<usize>, Vec<Rat>)> = Vec::new();
    for h in &hits {
        let locus = &loci[h.locus_index];
        let dirs = locus
            .axis_directions()
            .expect("axis alignment checked in the tube test");
        let normal_base: Vec<Rat> = (0..locus.ambient_dim())
            .filter(|c| !dirs.contains(c) && !free.contains(c))
            .map(|c| locus.base_point[c])
            .collect();
        let key = (dirs, normal_base);
        if !classes.contains(&key) {
            classes.push(key);
        }
    }
    if classes.len() > 1 {
        return Err(Error::domain(format!(
            "fiber meets {} distinct tubes; tubes are treated as disjoint",
            classes.len()
        )));
    }
    let locus = &loci[hits[0].locus_index];
    let dirs = locus
        .axis_directions()
        .expect("axis alignment checked in the tube test");
    let n = family.ambient_dim();
    let chart_coords: Vec<usize> = (0..n).filter(|c| !dirs.contains(c)).collect();
    if chart_coords.len() != 4 {
        return Err(Error::domain(format!(
            "expected a 4-dimensional chart, got {} normal coordinates",
            chart_coords.len()
        )));
    }
    let free = family.free_coords();
    let fixed = family.fixed_coords();
    let vals = [
        abc[0].rem_euclid(1.0),
        abc[1].rem_euclid(1.0),
        abc[2].rem_euclid(1.0),
    ];

    // chart-local fiber: parameters are the fiber's free coordinates inside
    // the chart, offsets taken relative to the locus base point
    let l_params: Vec<usize> = free
        .iter()
        .copied()
        .filter(|c| chart_coords.contains(c))
        .collect();
    let k = l_params.len();
    if k == 0 {
        return Err(Error::degenerate("fiber has no directions in the chart"));
    }
    let mut frame = DMatrix::zeros(4, k);
    for (col, &coord) in l_params.iter().enumerate() {
        let chart_slot = chart_coords
            .iter()
            .position(|&c| c == coord)
            .expect("in chart");
        frame[(chart_slot, col)] = 1.0;
    }
    let centered = |global: usize, v: f64| -> f64 {
        let base = rat_f64(locus.base_point[global]);
        let d = (v - base).rem_euclid(1.0);
        if d > 0.5 {
            d - 1.0
        } else {
            d
        }
    };
    let count = resolution.pow(k as u32);
    let mut points = Vec::with_capacity(count);
    for code in 0..count {
        let mut p = vec![0.0; 4];
        for (slot, &coord) in chart_coords.iter().enumerate() {
            if let Some(fi) = fixed.iter().position(|&c| c == coord) {
                p[slot] = centered(coord, vals[fi]);
            }
        }
        let mut rem = code;
        for &coord in &l_params {
            let slot = chart_coords
                .iter()
                .position(|&c| c == coord)
                .expect("in chart");
            p[slot] = centered(coord, (rem % resolution) as f64 / resolution as f64);
            rem /= resolution;
        }
        points.push(p);
    }
    let chart_factor = ImmersedGrid::new(
        k,
        4,
        points,
        vec![frame; count],
        vec![1.0 / count as f64; count],
    )?;

    let torus_free: Vec<usize> = free
        .iter()
        .copied()
        .filter(|c| !chart_coords.contains(c))
        .collect();
    let torus_fixed: Vec<(usize, f64)> = fixed
        .iter()
        .enumerate()
        .filter(|(_, c)| !chart_coords.contains(c))
        .map(|(slot, &c)| (c, vals[slot]))
        .collect();
    Ok(ProductSplit {
        chart_factor,
        chart_coords,
        torus_factor: TorusFactor {
            free_coords: torus_free,
            fixed_coords: torus_fixed,
        },
    })
}

/// Result of the pointwise orbit test for a 3-form on R^7.
#[derive(Debug, Clone)]
pub struct G2OrbitReport {
    pub is_definite: bool,
    /// +1 when the induced bilinear form is positive definite, -1 when
    /// negative definite (orientation-reversed), 0 otherwise.
    pub sign: i8,
    pub bilinear: DMatrix<f64>,
    /// The normalized metric (identity for the standard form), when definite.
    pub induced_metric: Option<DMatrix<f64>>,
}

/// Decide whether a constant 3-form on R^7 is linearly equivalent to the
/// standard one: build B(u, v) = i_u phi ∧ i_v phi ∧ phi (a 7-form valued
/// symmetric form) and test definiteness of its coefficient matrix.
pub fn g2_orbit_test(phi: &DifferentialForm) -> Result<G2OrbitReport> {
    if phi.ambient_dim() != 7 || phi.degree() != 3 {
        return Err(Error::domain("orbit test needs a 3-form on R^7"));
    }
    let phi = phi.at_point(&[0.0; 7]);
    let vol_idx: Vec<u8> = (0..7).collect();
    let mut b = DMatrix::zeros(7, 7);
    let mut contractions = Vec::with_capacity(7);
    for i in 0..7 {
        let mut e = vec![0.0; 7];
        e[i] = 1.0;
        contractions.push(interior_product(&e, &phi)?);
    }
    for i in 0..7 {
        for j in i..7 {
            let w = wedge(&wedge(&contractions[i], &contractions[j])?, &phi)?;
            let c = w.coefficient(&vol_idx);
            b[(i, j)] = c;
            b[(j, i)] = c;
        }
    }
    let eig = b.clone().symmetric_eigen();
    let max_abs = eig.eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let tol = 1e-10 * max_abs.max(1.0);
    let all_pos = eig.eigenvalues.iter().all(|&x| x > tol);
    let all_neg = eig.eigenvalues.iter().all(|&x| x < -tol);
    let sign: i8 = if all_pos {
        1
    } else if all_neg {
        -1
    } else {
        0
    };
    let induced_metric = if sign != 0 {
        // b' = sign * b is positive definite; g = b' 6^{-2/9} det(b')^{-1/9}
        let bp = &b * sign as f64;
        let det = bp.determinant();
        let scale = 6.0f64.powf(-2.0 / 9.0) * det.powf(-1.0 / 9.0);
        Some(bp * scale)
    } else {
        None
    };
    Ok(G2OrbitReport {
        is_definite: sign != 0,
        sign,
        bilinear: b,
        induced_metric,
    })
}

/// Rejection-sample fiber parameters whose fiber stays outside every tube.
pub fn random_fiber_outside_tubes(
    family: FiberFamily,
    loci: &[AffineSubtorus],
    radius: f64,
    rng: &mut impl Rng,
) -> Result<[f64; 3]> {
    for _ in 0..10_000 {
        let abc = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
        if fiber_meets_neighborhood(family, abc, loci, radius)?.is_empty() {
            return Ok(abc);
        }
    }
    Err(Error::domain(
        "rejection sampling failed to find a fiber outside the tubes",
    ))
}

/// The combined fixed loci of the CY3 involution pair.
pub fn cy3_all_loci() -> Vec<AffineSubtorus> {
    let mut loci = crate::orbifold::fixed_locus(&crate::orbifold::cy3_alpha());
    loci.extend(crate::orbifold::fixed_locus(&crate::orbifold::cy3_beta()));
    loci
}

/// The combined fixed loci of the three T^7 involutions.
pub fn g2_all_loci() -> Vec<AffineSubtorus> {
    let mut loci = crate::orbifold::fixed_locus(&crate::orbifold::g2_alpha());
    loci.extend(crate::orbifold::fixed_locus(&crate::orbifold::g2_beta()));
    loci.extend(crate::orbifold::fixed_locus(&crate::orbifold::g2_gamma()));
    loci
}

/// Default tube radius; the fixed loci of distinct generators stay at least
/// 2r apart at this value (checked by `min_locus_separation`).
pub const DEFAULT_TUBE_RADIUS: f64 = 0.125;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::holomorphic_volume_form;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn e(n: usize, i: usize) -> DVector<f64> {
        DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn cy3_fiber_shape() {
        let f = make_fiber(FiberFamily::Cy3, 0.1, 0.2, 0.3, 8).unwrap();
        assert_eq!(f.len(), 512);
        assert_eq!(f.param_dim, 3);
        assert_abs_diff_eq!(f.total_weight(), 1.0, epsilon = 1e-12);
        for p in &f.points {
            assert_eq!(p[0], 0.1);
            assert_eq!(p[2], 0.2);
            assert_eq!(p[4], 0.3);
        }
        let fr = &f.frames[0];
        for (col, coord) in [1usize, 3, 5].iter().enumerate() {
            assert_eq!(fr[(*coord, col)], 1.0);
        }
        assert!(make_fiber(FiberFamily::Cy3, 0.0, 0.0, 0.0, 1).is_err());
    }

    #[test]
    fn g2_fiber_frame_coordinates() {
        let f = make_fiber(FiberFamily::G2, 0.3, 0.7, 0.9, 3).unwrap();
        assert_eq!(f.len(), 81);
        let fr = &f.frames[0];
        for (col, coord) in [1usize, 3, 4, 6].iter().enumerate() {
            assert_eq!(fr[(*coord, col)], 1.0);
        }
    }

    #[test]
    fn distinct_parameters_give_disjoint_fibers() {
        let f1 = make_fiber(FiberFamily::Cy3, 0.1, 0.2, 0.3, 4).unwrap();
        let f2 = make_fiber(FiberFamily::Cy3, 0.15, 0.2, 0.3, 4).unwrap();
        for p in &f1.points {
            for q in &f2.points {
                assert!(crate::orbifold::torus_dist_f64(p, q) > 1e-6);
            }
        }
    }

    #[test]
    fn flat_fiber_is_special_lagrangian() {
        let pkg = cy3_flat_package();
        let fiber = make_fiber(FiberFamily::Cy3, 0.3, 0.55, 0.71, 4).unwrap();
        let d = slag_defect(&fiber, &pkg).unwrap();
        assert!(d.max_omega <= 1e-14, "omega defect {}", d.max_omega);
        assert!(d.max_im_phi <= 1e-14, "im phi defect {}", d.max_im_phi);
        let CalibrationPackage::Cy { re_phi, .. } = &pkg else {
            unreachable!()
        };
        let r = calibration_ratio(&fiber, re_phi, &MetricAtPoint::euclidean(6)).unwrap();
        assert_abs_diff_eq!(r.min_ratio, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.max_ratio, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn holomorphic_line_is_not_lagrangian() {
        // the diagonal line {(z, z)} in C^2: omega restricts to its area form
        let eta = holomorphic_volume_form(2);
        let omega = DifferentialForm::constant(4, 2, &[(&[0, 1], 1.0), (&[2, 3], 1.0)]).unwrap();
        let pkg = CalibrationPackage::Cy {
            omega,
            re_phi: eta.re,
            im_phi: eta.im,
        };
        let mut frame = DMatrix::zeros(4, 2);
        frame[(0, 0)] = 1.0;
        frame[(2, 0)] = 1.0;
        frame[(1, 1)] = 1.0;
        frame[(3, 1)] = 1.0;
        let grid = ImmersedGrid::plane(vec![0.0; 4], frame).unwrap();
        let d = slag_defect(&grid, &pkg).unwrap();
        assert!(d.max_omega > 0.9, "omega defect {}", d.max_omega);
    }

    #[test]
    fn phase_rotation_scales_calibration_ratio_by_cosine() {
        // x-plane calibrated by Re(dz1∧dz2∧dz3); rotate z1 by e^{i theta}
        let omega_hol = holomorphic_volume_form(3);
        let g = MetricAtPoint::euclidean(6);
        for theta in [0.0f64, 0.3, 1.0] {
            let mut frame = DMatrix::zeros(6, 3);
            frame[(0, 0)] = theta.cos();
            frame[(1, 0)] = theta.sin();
            frame[(2, 1)] = 1.0;
            frame[(4, 2)] = 1.0;
            let grid = ImmersedGrid::plane(vec![0.0; 6], frame).unwrap();
            let r = calibration_ratio(&grid, &omega_hol.re, &g).unwrap();
            assert_abs_diff_eq!(r.max_ratio, theta.cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn complex_line_saturates_wirtinger() {
        // a complex line in C^2 against the Kahler form
        let omega = DifferentialForm::constant(4, 2, &[(&[0, 1], 1.0), (&[2, 3], 1.0)]).unwrap();
        let mut frame = DMatrix::zeros(4, 2);
        frame[(0, 0)] = 1.0;
        frame[(1, 1)] = 1.0;
        let grid = ImmersedGrid::plane(vec![0.0; 4], frame).unwrap();
        let r = calibration_ratio(&grid, &omega, &MetricAtPoint::euclidean(4)).unwrap();
        assert_abs_diff_eq!(r.min_ratio, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn g2_fiber_is_coassociative_and_calibrated_by_star_phi() {
        let CalibrationPackage::SevenSphere { phi3, star_phi } = g2_flat_package() else {
            unreachable!()
        };
        let fiber = make_fiber(FiberFamily::G2, 0.21, 0.43, 0.87, 3).unwrap();
        let d = coassoc_defect(&fiber, &phi3).unwrap();
        assert!(d <= 1e-14, "defect {d}");
        let r = calibration_ratio(&fiber, &star_phi, &MetricAtPoint::euclidean(7)).unwrap();
        assert_abs_diff_eq!(r.min_ratio, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.max_ratio, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn associative_directions_extended_are_not_coassociative() {
        // span(x5, x6, x7) + x1: the d1∧d2∧d3 term restricts
        let phi3 = g2_standard_3form();
        let frame = DMatrix::from_columns(&[e(7, 0), e(7, 4), e(7, 5), e(7, 6)]);
        let grid = ImmersedGrid::plane(vec![0.0; 7], frame).unwrap();
        let d = coassoc_defect(&grid, &phi3).unwrap();
        assert!(d > 0.9, "defect {d}");
        // any plane against the zero form
        let zero = DifferentialForm::zero(7, 3);
        let f2 = make_fiber(FiberFamily::G2, 0.1, 0.1, 0.1, 2).unwrap();
        assert_eq!(coassoc_defect(&f2, &zero).unwrap(), 0.0);
    }

    #[test]
    fn tube_hits() {
        let loci = crate::orbifold::fixed_locus(&crate::orbifold::cy3_alpha());
        // far fiber: alpha bases have x1, x2 in {1/4, 3/4}
        let far = fiber_meets_neighborhood(FiberFamily::Cy3, [0.0, 0.0, 0.5], &loci, 0.1).unwrap();
        assert!(far.is_empty());
        // exact hit: the four components sharing the (x1, x2) base all hit
        let hit =
            fiber_meets_neighborhood(FiberFamily::Cy3, [0.25, 0.25, 0.9], &loci, 0.1).unwrap();
        assert_eq!(hit.len(), 4);
        for h in &hit {
            assert_abs_diff_eq!(h.distance, 0.0, epsilon = 1e-12);
        }
        // offset 0.05 in one normal coordinate
        let off =
            fiber_meets_neighborhood(FiberFamily::Cy3, [0.30, 0.25, 0.9], &loci, 0.1).unwrap();
        assert_eq!(off.len(), 4);
        assert_abs_diff_eq!(off[0].distance, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn locus_separation_supports_default_radius() {
        let cy3 = vec![
            crate::orbifold::fixed_locus(&crate::orbifold::cy3_alpha()),
            crate::orbifold::fixed_locus(&crate::orbifold::cy3_beta()),
        ];
        let sep = min_locus_separation(&cy3).unwrap();
        assert!(sep >= 2.0 * DEFAULT_TUBE_RADIUS - 1e-12, "separation {sep}");
        let g2 = vec![
            crate::orbifold::fixed_locus(&crate::orbifold::g2_alpha()),
            crate::orbifold::fixed_locus(&crate::orbifold::g2_beta()),
            crate::orbifold::fixed_locus(&crate::orbifold::g2_gamma()),
        ];
        let sep = min_locus_separation(&g2).unwrap();
        assert!(sep >= 2.0 * DEFAULT_TUBE_RADIUS - 1e-12, "separation {sep}");
    }

    #[test]
    fn product_split_cy3() {
        let loci = cy3_all_loci();
        // fiber near an alpha component: (a, b) near (1/4, 1/4)
        let split = product_split(
            FiberFamily::Cy3,
            [0.26, 0.24, 0.9],
            4,
            &loci,
            DEFAULT_TUBE_RADIUS,
        )
        .unwrap();
        assert_eq!(split.chart_coords, vec![0, 1, 2, 3]);
        assert_eq!(split.chart_factor.param_dim, 2);
        assert_eq!(split.torus_factor.free_coords, vec![5]);
        assert_eq!(split.torus_factor.fixed_coords, vec![(4, 0.9)]);
    }

    #[test]
    fn product_split_g2() {
        let loci = g2_all_loci();
        // alpha on T^7 fixes x1..x4 at {0, 1/2}; fiber fixes (x1, x3, x6)
        let split = product_split(
            FiberFamily::G2,
            [0.02, 0.03, 0.9],
            4,
            &loci,
            DEFAULT_TUBE_RADIUS,
        )
        .unwrap();
        assert_eq!(split.chart_coords, vec![0, 1, 2, 3]);
        assert_eq!(split.chart_factor.param_dim, 2);
        // T_c factor lives in (x5, x6, x7) with x6 fixed
        assert_eq!(split.torus_factor.free_coords, vec![4, 6]);
        assert_eq!(split.torus_factor.fixed_coords, vec![(5, 0.9)]);
    }

    #[test]
    fn product_split_rejects_zero_or_two_tubes() {
        let loci = cy3_all_loci();
        assert!(product_split(
            FiberFamily::Cy3,
            [0.125, 0.125, 0.25],
            4,
            &loci,
            DEFAULT_TUBE_RADIUS
        )
        .is_err());
        // (a, b) near an alpha pair and (a, c) near a beta pair, generous radius
        assert!(product_split(FiberFamily::Cy3, [0.12, 0.25, 0.0], 4, &loci, 0.15).is_err());
    }

    #[test]
    fn orbit_test_standard_form() {
        let rep = g2_orbit_test(&g2_standard_3form()).unwrap();
        assert!(rep.is_definite);
        let g = rep.induced_metric.unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(g[(i, j)], expect, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn orbit_test_zero_and_mirror_forms() {
        assert!(
            !g2_orbit_test(&DifferentialForm::zero(7, 3))
                .unwrap()
                .is_definite
        );
        let rep = g2_orbit_test(&g2_mirror_3form()).unwrap();
        assert!(rep.is_definite);
    }

    #[test]
    fn mirror_form_pulls_back_to_standard_under_glue_map() {
        // eta(x1..x7) = (x1, -x4, x3, x2, x5, x6, x7)
        let mut d = DMatrix::<f64>::zeros(7, 7);
        d[(0, 0)] = 1.0;
        d[(1, 3)] = -1.0;
        d[(2, 2)] = 1.0;
        d[(3, 1)] = 1.0;
        for i in 4..7 {
            d[(i, i)] = 1.0;
        }
        let pulled = crate::forms::pullback(&d, &g2_mirror_3form()).unwrap();
        assert_eq!(pulled.max_coeff_distance(&g2_standard_3form()), 0.0);
    }

    #[test]
    fn orbit_test_rotation_invariance() {
        use rand_distr::StandardNormal;
        let phi0 = g2_standard_3form();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let m = DMatrix::from_fn(7, 7, |_, _| rng.sample::<f64, _>(StandardNormal));
            let qr = m.qr();
            let mut q = qr.q();
            if q.determinant() < 0.0 {
                for r in 0..7 {
                    q[(r, 0)] = -q[(r, 0)];
                }
            }
            let rotated = crate::forms::pullback(&q, &phi0).unwrap();
            assert!(g2_orbit_test(&rotated).unwrap().is_definite);
        }
    }

    #[test]
    fn defects_invariant_under_grid_refinement() {
        let pkg = cy3_flat_package();
        let d1 = slag_defect(
            &make_fiber(FiberFamily::Cy3, 0.3, 0.4, 0.6, 4).unwrap(),
            &pkg,
        )
        .unwrap();
        let d2 = slag_defect(
            &make_fiber(FiberFamily::Cy3, 0.3, 0.4, 0.6, 8).unwrap(),
            &pkg,
        )
        .unwrap();
        assert!((d1.max_omega - d2.max_omega).abs() < 1e-12);
        assert!((d1.max_im_phi - d2.max_im_phi).abs() < 1e-12);
    }

    #[test]
    fn random_outside_fibers_have_zero_defect() {
        let pkg = cy3_flat_package();
        let loci = cy3_all_loci();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let abc =
                random_fiber_outside_tubes(FiberFamily::Cy3, &loci, DEFAULT_TUBE_RADIUS, &mut rng)
                    .unwrap();
            let fiber = make_fiber(FiberFamily::Cy3, abc[0], abc[1], abc[2], 3).unwrap();
            let d = slag_defect(&fiber, &pkg).unwrap();
            assert!(d.max_omega <= 1e-12 && d.max_im_phi <= 1e-12);
        }
    }
}
