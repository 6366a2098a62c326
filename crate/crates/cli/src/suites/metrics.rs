//! Resolution-metric battery: determinant identity across the parameter
//! grid, derivative oracle, glued-form positivity with the bisected
//! threshold, the convergence-rate table, and the conformal normalization.

use crate::config::RunConfig;
use crate::report::CaseResult;
use anyhow::Result;
use calfib_core::forms::{holomorphic_volume_form, MetricAtPoint};
use calfib_core::resolution::{
    bisect_positivity_threshold, eh_kahler_form, eh_potential, normalize_to_sqrt2, positivity_scan,
    EguchiHansonPotential, GluedKahlerData, HyperkahlerTriple, ScanGrid,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::json;

pub fn run(cfg: &RunConfig) -> Result<Vec<CaseResult>> {
    let mut cases = Vec::new();
    let det_tol = cfg.tol("det_identity", 1e-9);

    // determinant identity on a log u-grid for three parameter values
    let mut worst_det = 0.0f64;
    let u_samples = cfg.res("det_grid", 48);
    for t in [0.01, 0.1, 1.0] {
        for i in 0..u_samples {
            let u = 1e-3 * (1e6f64).powf(i as f64 / (u_samples - 1) as f64);
            let r = u.sqrt();
            let z = [
                Complex64::new(r * 0.6, r * 0.3),
                Complex64::new(-r * 0.5, r * (1.0f64 - 0.7).sqrt() * 0.5477225575051661),
            ];
            // rescale to |z|^2 = u exactly up to rounding
            let norm = (z[0].norm_sqr() + z[1].norm_sqr()).sqrt();
            let z = [z[0] / norm * r, z[1] / norm * r];
            let g = eh_kahler_form(z, t)?;
            let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).re;
            worst_det = worst_det.max((det - 1.0).abs());
        }
    }
    cases.push(CaseResult::new(
        "eh-determinant-identity",
        "the resolution metric has unit determinant across the u-t grid",
        json!({ "max_abs_deviation": worst_det }),
        json!(1.0),
        json!(det_tol),
        worst_det <= det_tol,
    ));

    // derivative oracle at a few spots
    let mut worst_d = 0.0f64;
    for (u, t) in [(1.0f64, 0.3f64), (0.5, 0.1), (2.0, 1.0), (0.05, 0.02)] {
        let pot = EguchiHansonPotential::new(t)?;
        let h = 1e-6 * u.max(1.0);
        let numeric = (eh_potential(u + h, t)? - eh_potential(u - h, t)?) / (2.0 * h);
        let closed = pot.derivative(u)?;
        worst_d = worst_d.max((numeric - closed).abs() / closed.abs().max(1.0));
    }
    cases.push(CaseResult::new(
        "eh-derivative-oracle",
        "numeric differentiation at step 1e-6 matches the closed-form derivative",
        json!({ "max_relative_deviation": worst_d }),
        json!(0.0),
        json!(1e-6),
        worst_d <= 1e-6,
    ));

    // convergence-rate table: sup |f_t - u| on [1/2, 2] against t^2 |log t|
    let mut rows = Vec::new();
    let mut max_c = 0.0f64;
    for t in [0.2, 0.1, 0.05, 0.025] {
        let mut sup = 0.0f64;
        for i in 0..200 {
            let u = 0.5 + 1.5 * i as f64 / 199.0;
            sup = sup.max((eh_potential(u, t)? - u).abs());
        }
        let c = sup / (t * t * t.ln().abs());
        max_c = max_c.max(c);
        rows.push(vec![t, sup, c]);
    }
    cases.push(
        CaseResult::new(
            "eh-convergence-rate",
            "the potential approaches the Euclidean one at rate t^2 |log t| with constant at most 3",
            json!({ "max_rate_constant": max_c }),
            json!({ "bound": 3.0 }),
            json!("measured"),
            max_c <= 3.0,
        )
        .with_series(&["t", "sup_deviation", "rate_constant"], rows),
    );

    // glued positivity at the canonical annulus
    let r_inner = cfg.tol("annulus_inner", 0.25);
    let r_outer = cfg.tol("annulus_outer", 0.5);
    let grid = ScanGrid {
        u_samples: cfg.res("positivity_u_samples", 60),
        directions: cfg.res("positivity_directions", 8),
        hessian_step_scale: cfg.tol("hessian_step", 1e-5),
        seed: cfg.seed,
    };
    let good = GluedKahlerData::new(0.05, r_inner, r_outer)?;
    let rep = positivity_scan(&good, &grid)?;
    let rows: Vec<Vec<f64>> = rep
        .records
        .iter()
        .map(|r| vec![r.u, r.min_eigenvalue])
        .collect();
    cases.push(
        CaseResult::new(
            "glued-positivity-small-t",
            "the glued form stays positive definite at t = 0.05 on the [0.25, 0.5] annulus",
            json!({ "min_eigenvalue": rep.min_eigenvalue, "worst_point": rep.worst_point.to_vec() }),
            json!({ "min_eigenvalue_above": 0.0 }),
            json!("sign"),
            rep.pass,
        )
        .with_series(&["u", "min_eigenvalue"], rows),
    );

    let bad = GluedKahlerData::new(10.0, r_inner, r_outer)?;
    let rep_bad = positivity_scan(&bad, &grid)?;
    cases.push(CaseResult::new(
        "glued-positivity-large-t",
        "gluing at t = 10 destroys positivity and the scan locates a witness",
        json!({ "min_eigenvalue": rep_bad.min_eigenvalue, "worst_point": rep_bad.worst_point.to_vec() }),
        json!({ "fails": true }),
        json!("sign"),
        !rep_bad.pass && rep_bad.min_eigenvalue < 0.0,
    ));

    let tstar = bisect_positivity_threshold(r_inner, r_outer, &grid, cfg.tol("tstar_tol", 1e-3))?;
    cases.push(CaseResult::new(
        "glued-positivity-threshold",
        "largest resolution parameter passing the positivity scan on the default annulus",
        json!({ "t_star": tstar }),
        json!({ "above": 0.05, "below": 10.0 }),
        json!(cfg.tol("tstar_tol", 1e-3)),
        tstar > 0.05 && tstar < 10.0,
    ));

    // hyperkahler relations, exact
    let ok = HyperkahlerTriple::standard().verify_relations();
    cases.push(CaseResult::new(
        "hyperkahler-relations",
        "the 2-form triple satisfies the wedge relations exactly",
        json!(ok),
        json!(true),
        json!("exact"),
        ok,
    ));

    // conformal normalization
    let eta = holomorphic_volume_form(2);
    let g4 = MetricAtPoint::euclidean(4);
    let c1 = normalize_to_sqrt2(&g4, &eta.re, &[0.0; 4])?;
    let g4s = MetricAtPoint::new(DMatrix::identity(4, 4) * 4.0)?;
    let c_scaled = normalize_to_sqrt2(&g4s, &eta.re, &[0.0; 4])?;
    let norm_ok = (c1 - 1.0).abs() <= 1e-12 && (c_scaled - 0.25).abs() <= 1e-12;
    cases.push(CaseResult::new(
        "conformal-normalization",
        "the conformal factor is 1 for the Euclidean metric and scales with the metric",
        json!({ "euclidean_factor": c1, "scaled_metric_factor": c_scaled }),
        json!({ "euclidean_factor": 1.0, "scaled_metric_factor": 0.25 }),
        json!(1e-12),
        norm_ok,
    ));

    Ok(cases)
}
