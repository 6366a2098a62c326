//! Acceptance gate: every criterion runs at its stated tolerance and prints
//! one pass/fail line. The run is sequential so the per-criterion time
//! budgets are meaningful on a small machine.

use calfib_cli::{run_suite, CaseResult, RunConfig};
use serde_json::Value;
use std::time::{Duration, Instant};

struct Criterion {
    name: &'static str,
    pass: bool,
    elapsed: Duration,
    budget: Duration,
    detail: String,
}

fn find<'a>(cases: &'a [CaseResult], id: &str) -> &'a CaseResult {
    cases
        .iter()
        .find(|c| c.id == id)
        .unwrap_or_else(|| panic!("case '{id}' missing from suite"))
}

fn number(v: &Value, key: &str) -> f64 {
    v.get(key)
        .and_then(Value::as_f64)
        .unwrap_or_else(|| panic!("field '{key}' missing in {v}"))
}

fn boolean(v: &Value, key: &str) -> bool {
    v.get(key)
        .and_then(Value::as_bool)
        .unwrap_or_else(|| panic!("field '{key}' missing in {v}"))
}

#[test]
fn acceptance() {
    let cfg = RunConfig::default();
    let mut results: Vec<Criterion> = Vec::new();

    // ---- orbifold data: criteria 1 and 2 -------------------------------
    let t0 = Instant::now();
    let orbifold = run_suite("orbifold", &cfg).expect("orbifold suite");
    let orbifold_elapsed = t0.elapsed();
    {
        let a = find(&orbifold.cases, "alpha-fixed-locus-count");
        let b = find(&orbifold.cases, "beta-fixed-locus-count");
        let disjoint = find(&orbifold.cases, "cy3-loci-disjoint");
        let free = find(&orbifold.cases, "cy3-alpha-beta-free");
        let pass = a.pass && b.pass && disjoint.pass && free.pass;
        results.push(Criterion {
            name: "1 six-torus involutions: sixteen 2-tori each, loci disjoint, composition free",
            pass,
            elapsed: orbifold_elapsed,
            budget: Duration::from_secs(1),
            detail: format!(
                "alpha components = {}, beta components = {}",
                number(&a.measured, "components"),
                number(&b.measured, "components")
            ),
        });

        let mut pass = true;
        let mut counts = Vec::new();
        for g in ["alpha", "beta", "gamma"] {
            let c = find(&orbifold.cases, &format!("g2-{g}-fixed-locus-count"));
            let o = find(&orbifold.cases, &format!("g2-{g}-grid-oracle"));
            pass &= c.pass && o.pass;
            counts.push(number(&c.measured, "components"));
        }
        pass &= find(&orbifold.cases, "g2-loci-pairwise-disjoint").pass;
        pass &= find(&orbifold.cases, "g2-compositions-free").pass;
        results.push(Criterion {
            name: "2 seven-torus involutions: sixteen 3-tori each (grid oracle), disjoint, compositions free",
            pass,
            elapsed: orbifold_elapsed,
            budget: Duration::from_secs(1),
            detail: format!("component counts = {counts:?}"),
        });
    }

    // ---- calibration: criteria 3, 4 and 8 ------------------------------
    let t0 = Instant::now();
    let calibration = run_suite("calibration", &cfg).expect("calibration suite");
    let calibration_elapsed = t0.elapsed();
    {
        let c = find(&calibration.cases, "slag-comass-bound");
        let raw_max = number(&c.measured, "raw_max");
        let refined = number(&c.measured, "refined_value");
        let samples = number(&c.measured, "samples");
        let pass = c.pass
            && samples >= 1e5
            && raw_max <= 1.0 + 1e-9
            && (1.0 - 1e-4..=1.0 + 1e-9).contains(&refined);
        results.push(Criterion {
            name: "3 comass of the calibrating 3-form stays below 1 + 1e-9 and reaches 1 - 1e-4",
            pass,
            elapsed: calibration_elapsed,
            budget: Duration::from_secs(30),
            detail: format!("raw max = {raw_max:.3e}, refined = {refined:.12}"),
        });

        let cy = find(&calibration.cases, "cy3-fiber-defects");
        let g2 = find(&calibration.cases, "g2-fiber-defects");
        let pass = cy.pass
            && g2.pass
            && number(&cy.measured, "max_omega_defect") <= 1e-12
            && number(&cy.measured, "max_im_defect") <= 1e-12
            && (number(&cy.measured, "ratio_min") - 1.0).abs() <= 1e-12
            && (number(&cy.measured, "ratio_max") - 1.0).abs() <= 1e-12
            && number(&g2.measured, "max_coassociative_defect") <= 1e-12
            && (number(&g2.measured, "ratio_min") - 1.0).abs() <= 1e-12
            && (number(&g2.measured, "ratio_max") - 1.0).abs() <= 1e-12;
        results.push(Criterion {
            name: "4 a hundred random fibers per family: defects below 1e-12, ratios within 1e-12 of 1",
            pass,
            elapsed: calibration_elapsed,
            budget: Duration::from_secs(10),
            detail: format!(
                "worst slag defect = {:.3e}, worst coassociative defect = {:.3e}",
                number(&cy.measured, "max_omega_defect")
                    .max(number(&cy.measured, "max_im_defect")),
                number(&g2.measured, "max_coassociative_defect")
            ),
        });

        let std_form = find(&calibration.cases, "g2-orbit-standard-form");
        let field = find(&calibration.cases, "g2-orbit-mirror-field");
        let pass = std_form.pass && field.pass && number(&field.measured, "points") >= 100.0;
        results.push(Criterion {
            name: "8 orbit test passes for the standard 3-form and the glued mirror field at 100 flat points",
            pass,
            elapsed: calibration_elapsed,
            budget: Duration::from_secs(5),
            detail: format!(
                "metric deviation = {:.3e}, field points = {}",
                number(&std_form.measured, "metric_deviation"),
                number(&field.measured, "points")
            ),
        });
    }

    // ---- metrics: criterion 5 ------------------------------------------
    let t0 = Instant::now();
    let metrics = run_suite("metrics", &cfg).expect("metrics suite");
    let metrics_elapsed = t0.elapsed();
    {
        let det = find(&metrics.cases, "eh-determinant-identity");
        let pos = find(&metrics.cases, "glued-positivity-small-t");
        let thr = find(&metrics.cases, "glued-positivity-threshold");
        let table = find(&metrics.cases, "eh-convergence-rate");
        let pass = det.pass
            && number(&det.measured, "max_abs_deviation") <= 1e-9
            && pos.pass
            && thr.pass
            && table.pass
            && table.series.is_some();
        results.push(Criterion {
            name: "5 unit determinant within 1e-9; glued positivity at t = 0.05 with bisected threshold; rate table emitted",
            pass,
            elapsed: metrics_elapsed,
            budget: Duration::from_secs(60),
            detail: format!(
                "max |det - 1| = {:.3e}, min eigenvalue = {:.4}, t* = {:.4}",
                number(&det.measured, "max_abs_deviation"),
                number(&pos.measured, "min_eigenvalue"),
                number(&thr.measured, "t_star")
            ),
        });
    }

    // ---- volume: criterion 6 --------------------------------------------
    let t0 = Instant::now();
    let volume = run_suite("volume", &cfg).expect("volume suite");
    let volume_elapsed = t0.elapsed();
    {
        let margins = find(&volume.cases, "graph-ball-margins");
        let equality = find(&volume.cases, "flat-fiber-equality");
        let mono = find(&volume.cases, "alpha-monotonicity");
        let pass = margins.pass && equality.pass && mono.pass;
        results.push(Criterion {
            name: "6 graph-mesh margins beat the allowance at all radii; flat equality case; alpha monotone",
            pass,
            elapsed: volume_elapsed,
            budget: Duration::from_secs(120),
            detail: format!(
                "allowance = {:.3e}, equality margin = {:.3e}",
                number(&margins.measured, "allowance"),
                number(&equality.measured, "margin")
            ),
        });
    }

    // ---- mirror: criterion 7 ---------------------------------------------
    let t0 = Instant::now();
    let mirror = run_suite("mirror", &cfg).expect("mirror suite");
    let mirror_elapsed = t0.elapsed();
    {
        let inter = find(&mirror.cases, "intertwiner-block-family");
        let mu = find(&mirror.cases, "mu-pullback-relations");
        let eta = find(&mirror.cases, "eta-pullback-relations");
        let basis = find(&mirror.cases, "period-map-basis-identities");
        let equal = find(&mirror.cases, "symplectic-mirror-equality");
        let pass = inter.pass
            && boolean(&inter.measured, "contains_rotation_block")
            && mu.pass
            && eta.pass
            && basis.pass
            && equal.pass
            && number(&equal.measured, "max_deviation") <= 1e-12;
        results.push(Criterion {
            name: "7 intertwiner restricts to the rotation; relation suites pass under one convention; period map factors through the rotation",
            pass,
            elapsed: mirror_elapsed,
            budget: Duration::from_secs(5),
            detail: format!(
                "period-map deviation = {:.3e}",
                number(&equal.measured, "max_deviation")
            ),
        });
    }

    // ---- realalg: criteria 9 and 10 --------------------------------------
    let t0 = Instant::now();
    let realalg = run_suite("realalg", &cfg).expect("realalg suite");
    let realalg_elapsed = t0.elapsed();
    {
        let fact = find(&realalg.cases, "quartic-factorization");
        let circles = find(&realalg.cases, "sphere-circle-count");
        let sep = find(&realalg.cases, "viro-positive-perturbation");
        let four = find(&realalg.cases, "viro-four-circle-perturbation");
        let pass = fact.pass
            && number(&fact.measured, "max_relative_deviation") <= 1e-10
            && circles.pass
            && number(&circles.measured, "count") == 4.0
            && sep.pass
            && four.pass
            && number(&sep.measured, "coarse_count") == number(&sep.measured, "fine_count")
            && number(&four.measured, "coarse_count") == number(&four.measured, "fine_count");
        results.push(Criterion {
            name: "9 factorization to 1e-10 at 1e4 points; four circles; patchwork counts stable between grids",
            pass,
            elapsed: realalg_elapsed,
            budget: Duration::from_secs(120),
            detail: format!(
                "factorization deviation = {:.3e}, circle count = {}, counts = ({}, {}) and ({}, {})",
                number(&fact.measured, "max_relative_deviation"),
                number(&circles.measured, "count"),
                number(&sep.measured, "coarse_count"),
                number(&sep.measured, "fine_count"),
                number(&four.measured, "coarse_count"),
                number(&four.measured, "fine_count"),
            ),
        });

        // criterion 10 re-times its own computation (the suite run above
        // includes the much heavier patchwork scans)
        let t10 = Instant::now();
        let data =
            calfib_core::realalg::EllipticData::new(num_complex::Complex64::new(0.0, 1.0), 40)
                .expect("valid lattice");
        let rep = calfib_core::realalg::loop_integral_constancy(
            num_complex::Complex64::new(7.0, 3.0),
            &[0.25, 0.4, 0.6],
            &data,
            512,
        )
        .expect("loop integrals");
        let loop_elapsed = t10.elapsed();
        let case = find(&realalg.cases, "loop-integral-constancy");
        let pass = case.pass && rep.max_deviation < 1e-8;
        results.push(Criterion {
            name: "10 loop-integral deviation below 1e-8 across the three heights, converging under truncation doubling",
            pass,
            elapsed: loop_elapsed,
            budget: Duration::from_secs(10),
            detail: format!("max deviation = {:.3e}", rep.max_deviation),
        });
    }

    // ---- report ----------------------------------------------------------
    results.sort_by(|a, b| {
        let num = |c: &Criterion| {
            c.name
                .split_whitespace()
                .next()
                .unwrap()
                .parse::<u32>()
                .unwrap_or(99)
        };
        num(a).cmp(&num(b))
    });
    let mut failures = Vec::new();
    for c in &results {
        let time_ok = c.elapsed <= c.budget;
        let status = if c.pass && time_ok { "PASS" } else { "FAIL" };
        println!(
            "[criterion {}] {status} ({:.2} s of {:.0} s budget) — {}",
            c.name,
            c.elapsed.as_secs_f64(),
            c.budget.as_secs_f64(),
            c.detail
        );
        if !(c.pass && time_ok) {
            failures.push(c.name);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
