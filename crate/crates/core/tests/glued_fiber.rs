//! In-tube check: the chart factor of a fiber passing through a fixed
//! component stays special Lagrangian for the glued Kahler form on the
//! chart minus the exceptional locus (grid points with u below 1e-3 are
//! excluded; the exceptional sphere itself is never sampled).

use calfib_core::fibration::{cy3_all_loci, product_split, FiberFamily, DEFAULT_TUBE_RADIUS};
use calfib_core::forms::{evaluate_on_frame, holomorphic_volume_form, TangentFrame};
use calfib_core::resolution::{glued_kahler_2form_at, GluedKahlerData};
use nalgebra::DVector;

const U_MIN: f64 = 1e-3;

/// Normalized restriction defects of (glued omega, constant Im eta) over the
/// chart-factor grid, excluding points with u < U_MIN.
fn chart_defects(abc: [f64; 3], glue: &GluedKahlerData) -> (f64, f64, usize) {
    let loci = cy3_all_loci();
    let split = product_split(FiberFamily::Cy3, abc, 24, &loci, DEFAULT_TUBE_RADIUS)
        .expect("fiber hits exactly one tube");
    let eta = holomorphic_volume_form(2);
    let mut max_omega = 0.0f64;
    let mut max_im = 0.0f64;
    let mut sampled = 0usize;
    for (p, f) in split
        .chart_factor
        .points
        .iter()
        .zip(&split.chart_factor.frames)
    {
        let u: f64 = p.iter().map(|x| x * x).sum();
        if u < U_MIN {
            continue;
        }
        sampled += 1;
        let omega = glued_kahler_2form_at(glue, p, 1e-5).expect("off the exceptional locus");
        let v0 = f.column(0).into_owned();
        let v1 = f.column(1).into_owned();
        let vol = (v0.norm_squared() * v1.norm_squared() - v0.dot(&v1).powi(2)).sqrt();
        let frame = TangentFrame::new(vec![v0, v1]);
        max_omega = max_omega.max(evaluate_on_frame(&omega, &frame, p).unwrap().abs() / vol);
        max_im = max_im.max(evaluate_on_frame(&eta.im, &frame, p).unwrap().abs() / vol);
    }
    (max_omega, max_im, sampled)
}

#[test]
fn centered_fiber_chart_factor_is_slag_for_the_glued_form() {
    // fiber through an alpha fixed component: (a, b) on the component base
    let glue = GluedKahlerData::new(0.02, 0.002, 0.008).unwrap();
    let (max_omega, max_im, sampled) = chart_defects([0.25, 0.25, 0.8], &glue);
    assert!(sampled > 500, "sampled {sampled} chart points");
    // Im eta is constant and vanishes exactly; the glued-form restriction is
    // limited only by the finite-difference Hessian accuracy
    assert!(max_im <= 1e-13, "Im eta defect {max_im}");
    assert!(max_omega <= 1e-6, "glued omega defect {max_omega}");
}

#[test]
fn offset_fiber_in_the_annulus_shows_a_measurable_defect() {
    // an off-center fiber inside the tube crosses the gluing annulus where
    // the form genuinely bends; the measured defect must exceed the
    // centered fiber's numerical floor
    let glue = GluedKahlerData::new(0.02, 0.002, 0.008).unwrap();
    let (max_omega, max_im, _) = chart_defects([0.30, 0.27, 0.8], &glue);
    assert!(max_im <= 1e-13);
    assert!(
        max_omega > 1e-5,
        "expected a visible defect, got {max_omega}"
    );
}

#[test]
fn flat_region_of_the_chart_is_exactly_euclidean() {
    // outside the annulus the glued form is the standard one and the chart
    // factor is exactly Lagrangian
    let glue = GluedKahlerData::new(0.02, 0.002, 0.008).unwrap();
    let loci = cy3_all_loci();
    let split = product_split(
        FiberFamily::Cy3,
        [0.25, 0.25, 0.8],
        8,
        &loci,
        DEFAULT_TUBE_RADIUS,
    )
    .unwrap();
    for p in &split.chart_factor.points {
        let u: f64 = p.iter().map(|x| x * x).sum();
        if u <= 0.02 {
            continue;
        }
        let omega = glued_kahler_2form_at(&glue, p, 1e-5).unwrap();
        let frame = TangentFrame::new(vec![
            DVector::from_column_slice(&[0.0, 1.0, 0.0, 0.0]),
            DVector::from_column_slice(&[0.0, 0.0, 0.0, 1.0]),
        ]);
        let v = evaluate_on_frame(&omega, &frame, p).unwrap();
        assert!(v.abs() <= 1e-7, "flat-region restriction {v} at u = {u}");
    }
}
