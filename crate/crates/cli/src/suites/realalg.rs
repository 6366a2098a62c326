//! Real-algebraic battery: the quartic-torus factorization identity, the
//! sphere circle count of the perturbation quartic, stability of the
//! patchwork component counts between grid resolutions, and the loop
//! integral constancy of the lattice elliptic function.

use crate::config::RunConfig;
use crate::report::CaseResult;
use anyhow::Result;
use calfib_core::realalg::{
    component_count, hyperplane_factor, loop_integral_constancy, quartic_torus_eval,
    sphere_circle_count, two_circle_quartic, unit_sphere_quadric, viro_perturb, EllipticData,
    RealPolynomial,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub fn run(cfg: &RunConfig) -> Result<Vec<CaseResult>> {
    let mut cases = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // factorization identity at random points
    let pts = cfg.res("factorization_points", 10_000);
    let tol = cfg.tol("factorization", 1e-10);
    let mut worst = 0.0f64;
    for _ in 0..pts {
        let x = rng.gen::<f64>() * 6.0 - 3.0;
        let y = rng.gen::<f64>() * 6.0 - 3.0;
        let z = rng.gen::<f64>() * 6.0 - 3.0;
        let r = (x * x + y * y).sqrt();
        let lhs = quartic_torus_eval(x, y, z);
        let rhs = ((r - 1.0).powi(2) + z * z - 0.25) * ((r + 1.0).powi(2) + z * z - 0.25);
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    cases.push(CaseResult::new(
        "quartic-factorization",
        "the degree-4 torus polynomial factors through the distance identity at random points",
        json!({ "points": pts, "max_relative_deviation": worst }),
        json!(0.0),
        json!(tol),
        worst <= tol,
    ));

    // the perturbation quartic cuts the sphere in four circles
    let circle_res = cfg.res("circle_grid", 128);
    let rep = sphere_circle_count(&two_circle_quartic(3), circle_res)?;
    cases.push(CaseResult::new(
        "sphere-circle-count",
        "the zero set of the perturbation quartic meets the unit sphere in four transversal circles",
        json!({
            "count": rep.count,
            "flagged_nontransversal": rep.flagged_nontransversal,
            "min_tangential_gradient": rep.min_tangential_gradient,
        }),
        json!({ "count": 4, "flagged_nontransversal": false }),
        json!("exact count"),
        rep.count == 4 && !rep.flagged_nontransversal,
    ));

    // degeneracy detection on crossing great circles
    let crossing = RealPolynomial::variable(3, 0).mul(&RealPolynomial::variable(3, 1))?;
    let rep_x = sphere_circle_count(&crossing, cfg.res("circle_grid_degenerate", 64))?;
    cases.push(CaseResult::new(
        "sphere-circle-degeneracy-flag",
        "crossing great circles are flagged as non-transversal",
        json!({ "flagged": rep_x.flagged_nontransversal }),
        json!({ "flagged": true }),
        json!("flag"),
        rep_x.flagged_nontransversal,
    ));

    // patchwork component counts, stable between the two grid resolutions
    let eps = cfg.tol("viro_epsilon", 3e-3);
    let coarse_res = cfg.res("viro_coarse", 64);
    let fine_res = cfg.res("viro_fine", 128);
    let bounds = [(-1.3, 1.3); 4];
    let p = unit_sphere_quadric();
    let q = hyperplane_factor();

    let separated = viro_perturb(&p, &q, &RealPolynomial::constant(4, 1.0), eps)?;
    let sep_coarse = component_count(&separated, &bounds, coarse_res)?;
    let sep_fine = component_count(&separated, &bounds, fine_res)?;
    cases.push(
        CaseResult::new(
            "viro-positive-perturbation",
            "perturbing by a positive quintic-term splits the product locus into two sheets, stably across resolutions",
            json!({
                "epsilon": eps,
                "coarse_count": sep_coarse.count,
                "fine_count": sep_fine.count,
                "fine_component_sizes": sep_fine.component_sizes,
            }),
            json!({ "count": 2, "stable": true }),
            json!("exact count"),
            sep_coarse.count == 2 && sep_fine.count == 2,
        )
        .with_series(
            &["resolution", "count", "marked_cells"],
            vec![
                vec![coarse_res as f64, sep_coarse.count as f64, sep_coarse.marked_cells as f64],
                vec![fine_res as f64, sep_fine.count as f64, sep_fine.marked_cells as f64],
            ],
        ),
    );

    let handled = viro_perturb(&p, &q, &two_circle_quartic(4), eps)?;
    let h_coarse = component_count(&handled, &bounds, coarse_res)?;
    let h_fine = component_count(&handled, &bounds, fine_res)?;
    cases.push(
        CaseResult::new(
            "viro-four-circle-perturbation",
            "the four-circle perturbation keeps the locus connected through its handles, stably across resolutions",
            json!({
                "epsilon": eps,
                "coarse_count": h_coarse.count,
                "fine_count": h_fine.count,
            }),
            json!({ "stable": true }),
            json!("exact count"),
            h_coarse.count == h_fine.count,
        )
        .with_series(
            &["resolution", "count", "marked_cells"],
            vec![
                vec![coarse_res as f64, h_coarse.count as f64, h_coarse.marked_cells as f64],
                vec![fine_res as f64, h_fine.count as f64, h_fine.marked_cells as f64],
            ],
        ),
    );

    // unperturbed product: connected through the intersection sphere
    let plain = viro_perturb(&p, &q, &two_circle_quartic(4), 0.0)?;
    let plain_rep = component_count(&plain, &bounds, cfg.res("viro_unperturbed", 32))?;
    cases.push(CaseResult::new(
        "viro-unperturbed-product",
        "the unperturbed product locus is connected through the intersection sphere",
        json!({ "count": plain_rep.count }),
        json!({ "count": 1 }),
        json!("exact count"),
        plain_rep.count == 1,
    ));

    // loop integral constancy with truncation-doubling control
    let quad = cfg.res("loop_quadrature", 512);
    let trunc = cfg.res("lattice_truncation", 40);
    let dev_tol = cfg.tol("loop_deviation", 1e-8);
    let c = Complex64::new(7.0, 3.0);
    let heights = [0.25, 0.4, 0.6];
    let mut rows = Vec::new();
    let mut devs = Vec::new();
    for n in [trunc / 2, trunc, trunc * 2] {
        let data = EllipticData::new(Complex64::new(0.0, 1.0), n)?;
        let rep = loop_integral_constancy(c, &heights, &data, quad)?;
        rows.push(vec![n as f64, rep.max_deviation]);
        devs.push(rep.max_deviation);
    }
    let deviation = devs[1];
    // monotone improvement until the machine-precision floor
    let floor = 1e-12;
    let converging = devs[1] <= devs[0].max(floor) && devs[2] <= devs[1].max(floor);
    cases.push(
        CaseResult::new(
            "loop-integral-constancy",
            "the loop integral of the lattice elliptic function is height-independent, improving under truncation doubling",
            json!({ "max_deviation": deviation, "deviations_by_truncation": devs }),
            json!({ "max_deviation_below": dev_tol }),
            json!(dev_tol),
            deviation < dev_tol && converging,
        )
        .with_series(&["truncation", "max_deviation"], rows),
    );

    Ok(cases)
}
