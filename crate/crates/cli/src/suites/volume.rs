//! Ball-volume battery: margins of the holomorphic-graph mesh against the
//! flat baseline, the flat equality case, monotonicity of the comparison
//! integral, the covering diameter bound, and the negative-margin witness.

use crate::config::RunConfig;
use crate::report::CaseResult;
use anyhow::Result;
use calfib_core::volume::mesh::{
    parametrized_disk, parametrized_surface, ring_torus, tetrahedralized_cube,
};
use calfib_core::volume::{
    alpha, comparison_f, diameter_bound, space_form_ball_volume, verify_ball_comparison, BallMode,
};
use serde_json::json;

pub fn run(cfg: &RunConfig) -> Result<Vec<CaseResult>> {
    let mut cases = Vec::new();

    // holomorphic-graph margins with the self-convergence allowance
    let fine_res = cfg.res("graph_mesh", 256);
    let coarse_res = fine_res / 2;
    let graph = |x: f64, y: f64| vec![x, y, x * x - y * y, 2.0 * x * y];
    let coarse = parametrized_disk(coarse_res, coarse_res, graph)?;
    let fine = parametrized_disk(fine_res, fine_res, graph)?;
    let radii = [0.1, 0.2, 0.3, 0.4];
    let mut self_conv = 0.0f64;
    for &r in &radii {
        let a = coarse.extrinsic_ball_volume(&coarse.vertices[0].clone(), r)?;
        let b = fine.extrinsic_ball_volume(&fine.vertices[0].clone(), r)?;
        self_conv = self_conv.max((a - b).abs());
    }
    let allowance = 2.0 * self_conv;
    let mut rows = Vec::new();
    let mut all_pass = true;
    for &r in &radii {
        let rep = verify_ball_comparison(&fine, 0, r, 0.0, BallMode::Extrinsic, allowance)?;
        all_pass &= rep.pass;
        rows.push(vec![r, rep.measured, rep.comparison, rep.margin]);
    }
    cases.push(
        CaseResult::new(
            "graph-ball-margins",
            "ambient-ball volumes on the holomorphic graph dominate flat balls up to the mesh allowance",
            json!({ "self_convergence": self_conv, "allowance": allowance }),
            json!({ "margin_at_least": 0.0 }),
            json!(allowance),
            all_pass,
        )
        .with_series(&["r", "measured", "space_form", "margin"], rows),
    );

    // flat equality case on the cube
    let cube = tetrahedralized_cube(cfg.res("cube_mesh", 16), |x, y, z| vec![x, y, z])?;
    let p = cube.nearest_vertex(&[0.5, 0.5, 0.5]);
    let eq_tol = cfg.tol("flat_equality", 5e-3);
    let rep = verify_ball_comparison(&cube, p, 0.3, 0.0, BallMode::Extrinsic, eq_tol)?;
    cases.push(CaseResult::new(
        "flat-fiber-equality",
        "the flat 3-torus patch realizes the equality case of the ball comparison",
        json!({ "measured": rep.measured, "comparison": rep.comparison, "margin": rep.margin }),
        json!({ "margin": 0.0 }),
        json!(eq_tol),
        rep.pass && rep.margin.abs() <= eq_tol,
    ));

    // alpha monotonicity at 50 sample points for both curvature signs
    let mut monotone = true;
    let mut rows = Vec::new();
    for k in [1.0, -1.0] {
        let t_max = if k > 0.0 {
            std::f64::consts::PI * 0.98
        } else {
            3.0
        };
        let mut prev = 0.0;
        for i in 1..=50 {
            let t = t_max * i as f64 / 50.0;
            let a = alpha(k, 3, t)?;
            if a <= prev {
                monotone = false;
            }
            rows.push(vec![k, t, a]);
            prev = a;
        }
    }
    cases.push(
        CaseResult::new(
            "alpha-monotonicity",
            "the comparison integral increases in the boundary time for both curvature signs",
            json!({ "monotone": monotone, "samples_per_sign": 50 }),
            json!({ "monotone": true }),
            json!("exact ordering"),
            monotone,
        )
        .with_series(&["K", "t", "alpha"], rows),
    );

    // second-order residual of the closed-form solution
    let (k, t) = (1.3, 1.7);
    let residual = |h: f64| -> Result<f64> {
        let mut worst = 0.0f64;
        let mut theta = h;
        while theta < t - h {
            let fm = comparison_f(k, t, theta - h)?;
            let f0 = comparison_f(k, t, theta)?;
            let fp = comparison_f(k, t, theta + h)?;
            worst = worst.max(((fp - 2.0 * f0 + fm) / (h * h) + k * f0).abs());
            theta += t / 37.0;
        }
        Ok(worst)
    };
    let (r1, r2) = (residual(1e-2)?, residual(5e-3)?);
    let order = (r1 / r2).log2();
    cases.push(CaseResult::new(
        "comparison-ode-residual",
        "the closed-form solution satisfies the oscillator equation at second order",
        json!({ "residual_coarse": r1, "residual_fine": r2, "observed_order": order }),
        json!({ "order_at_least": 1.9 }),
        json!("refinement"),
        order >= 1.9,
    ));

    // space-form volume spot values
    let v2 = space_form_ball_volume(0.0, 2, 0.7)?;
    let v3 = space_form_ball_volume(0.0, 3, 0.7)?;
    let vcap = space_form_ball_volume(1.0, 2, std::f64::consts::FRAC_PI_2)?;
    let wanted2 = std::f64::consts::PI * 0.49;
    let wanted3 = 4.0 / 3.0 * std::f64::consts::PI * 0.343;
    let wantedc = 2.0 * std::f64::consts::PI;
    let vol_ok = (v2 - wanted2).abs() <= 1e-10
        && (v3 - wanted3).abs() <= 1e-10
        && (vcap - wantedc).abs() <= 1e-9;
    cases.push(CaseResult::new(
        "space-form-volumes",
        "flat disk and ball volumes and the positive-curvature hemisphere come out exactly",
        json!({ "flat_disk": v2, "flat_ball": v3, "hemisphere": vcap }),
        json!({ "flat_disk": wanted2, "flat_ball": wanted3, "hemisphere": wantedc }),
        json!(1e-9),
        vol_ok,
    ));

    // covering diameter bound against the measured graph diameter
    let r = 0.3;
    let eps = space_form_ball_volume(0.0, 3, r)?;
    let bound = diameter_bound(cube.total_volume(), eps, r)?;
    let diam = cube.graph_diameter_lower_bound(6);
    cases.push(CaseResult::new(
        "diameter-bound",
        "the covering bound 4rN dominates the measured mesh diameter",
        json!({ "bound": bound, "measured_diameter": diam }),
        json!({ "bound_dominates": true }),
        json!("exact ordering"),
        diam <= bound,
    ));

    // negative-margin witness on the positively curved cap
    let torus = ring_torus(
        cfg.res("torus_mesh", 256),
        cfg.res("torus_mesh", 256) / 2,
        1.0,
        0.5,
    )?;
    let p = torus.nearest_vertex(&[1.5, 0.0, 0.0]);
    let rep = verify_ball_comparison(&torus, p, 0.7, 0.0, BallMode::Intrinsic, 1e-3)?;
    cases.push(CaseResult::new(
        "curved-cap-negative-margin",
        "a positively curved cap produces a negative margin and the checker flags it",
        json!({ "margin": rep.margin, "flagged": !rep.pass }),
        json!({ "flagged": true }),
        json!("sign"),
        !rep.pass && rep.margin < -0.02,
    ));

    // a flat strip run through the surface builder to pin the mesh format
    let strip = parametrized_surface(8, 8, false, false, |u, v| vec![u, v, 0.0])?;
    let text = strip.to_ascii();
    let back = calfib_core::volume::MeshedSubmanifold::from_ascii(&text)?;
    let roundtrip_ok = back.vertices == strip.vertices && back.faces.len() == strip.faces.len();
    cases.push(CaseResult::new(
        "mesh-format-roundtrip",
        "the ASCII mesh format round-trips exactly",
        json!(roundtrip_ok),
        json!(true),
        json!("exact"),
        roundtrip_ok,
    ));

    Ok(cases)
}
