//! Mirror-algebra battery: intertwiner solving over the block monodromy
//! family, the gluing maps with their pullback relation suites under one
//! global sign convention, and the period-map basis identities.

use crate::config::RunConfig;
use crate::report::CaseResult;
use anyhow::Result;
use calfib_core::mirror::{
    block_structure_check, cy3_glue_relation_data, dual_rep, g2_glue_relation_data,
    mirror_glue_map, mirror_product_frame, pullback_relations_check, rho_oriented,
    solve_intertwiner, symplectic_mirror_check, BasisMap, GlueContext, IntegerRep, Intertwiner,
};
use calfib_core::orbifold::{compose, AffineTorusMap};
use serde_json::json;

pub fn run(cfg: &RunConfig) -> Result<Vec<CaseResult>> {
    let mut cases = Vec::new();

    // intertwiner over the block family restricts to the rotation block
    let family = calfib_core::mirror::block_monodromy_family();
    let sols = solve_intertwiner(&family, 1)?;
    let wanted = Intertwiner {
        matrix: vec![vec![0, 1, 0], vec![-1, 0, 0], vec![0, 0, 1]],
    };
    let found = sols.contains(&wanted);
    let sound = sols.iter().all(|s| s.satisfies(&family));
    cases.push(CaseResult::new(
        "intertwiner-block-family",
        "the block monodromy family admits an intertwiner restricting to the rotation on the 2-block and identity on the 1-block",
        json!({ "solutions": sols.len(), "contains_rotation_block": found, "all_satisfy": sound }),
        json!({ "contains_rotation_block": true }),
        json!("exact"),
        found && sound,
    ));

    let sl2 = IntegerRep::new(
        2,
        vec![vec![vec![0, 1], vec![-1, 0]], vec![vec![1, 1], vec![0, 1]]],
    )?;
    let sols2 = solve_intertwiner(&sl2, 1)?;
    let rot = Intertwiner {
        matrix: vec![vec![0, 1], vec![-1, 0]],
    };
    cases.push(CaseResult::new(
        "intertwiner-rank2",
        "the rank-2 system solved over the full modular generators contains the rotation",
        json!({ "solutions": sols2.len(), "contains_rotation": sols2.contains(&rot) }),
        json!({ "contains_rotation": true }),
        json!("exact"),
        sols2.contains(&rot),
    ));

    // dual representation sanity
    let shear = vec![vec![1i64, 1], vec![0, 1]];
    let dual_ok = dual_rep(&shear)? == vec![vec![1, 0], vec![-1, 1]]
        && dual_rep(&dual_rep(&shear)?)? == shear;
    cases.push(CaseResult::new(
        "dual-representation",
        "the inverse-transpose dual is exact and involutive",
        json!(dual_ok),
        json!(true),
        json!("exact"),
        dual_ok,
    ));

    // block-structure recognizer
    let block_ok = block_structure_check(&[vec![0, 1, 0], vec![-1, 0, 0], vec![0, 0, 1]])
        && block_structure_check(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]])
        && !block_structure_check(&[vec![1, 0, 1], vec![0, 1, 0], vec![0, 0, 1]]);
    cases.push(CaseResult::new(
        "block-structure-check",
        "the 2+1 block recognizer accepts the display shape and rejects leakage",
        json!(block_ok),
        json!(true),
        json!("exact"),
        block_ok,
    ));

    // glue maps: squares and commutation pattern
    let mu = mirror_glue_map(GlueContext::Cy3);
    let mu2 = compose(&mu.map, &mu.map)?;
    let mu2_expected = AffineTorusMap::diag(
        &[1, -1, 1, -1, 1, 1],
        vec![calfib_core::intlin::Rat::new(0, 1); 6],
    )?;
    let eta = mirror_glue_map(GlueContext::G2Alpha);
    let eta2 = compose(&eta.map, &eta.map)?;
    let eta2_expected = AffineTorusMap::diag(
        &[1, -1, 1, -1, 1, 1, 1],
        vec![calfib_core::intlin::Rat::new(0, 1); 7],
    )?;
    cases.push(CaseResult::new(
        "glue-map-squares",
        "both gluing maps square to the sign flip of the swapped coordinate pair",
        json!({ "mu_square_ok": mu2 == mu2_expected, "eta_square_ok": eta2 == eta2_expected }),
        json!({ "mu_square_ok": true, "eta_square_ok": true }),
        json!("exact"),
        mu2 == mu2_expected && eta2 == eta2_expected,
    ));
    cases.push(CaseResult::new(
        "glue-map-stabilizer-commutation",
        "each gluing map commutes with the generator whose neighbourhood it glues; commutation with the remaining generators is reported, not required",
        json!({
            "mu_commutes_with_stabilizer": mu.commutes_with_stabilizer,
            "mu_others": mu.other_generators.iter().map(|(_, c)| *c).collect::<Vec<_>>(),
            "eta_commutes_with_stabilizer": eta.commutes_with_stabilizer,
            "eta_others": eta.other_generators.iter().map(|(_, c)| *c).collect::<Vec<_>>(),
        }),
        json!({ "stabilizer_commutes": true }),
        json!("exact"),
        mu.commutes_with_stabilizer && eta.commutes_with_stabilizer,
    ));

    // relation suites under one convention
    let tol = cfg.tol("relation", 1e-12);
    let (forms, relations) = cy3_glue_relation_data();
    let rep_mu = pullback_relations_check(&mu.map, &forms, &relations, tol)?;
    cases.push(CaseResult::new(
        "mu-pullback-relations",
        "the 6-torus gluing relations hold simultaneously under one global sign convention",
        json!({
            "pass": rep_mu.pass,
            "convention": rep_mu.convention,
            "relations": rep_mu.per_relation.iter().map(|(l, p, r)| json!({ "relation": l, "pass": p, "residual": r })).collect::<Vec<_>>(),
        }),
        json!({ "pass": true, "one_convention": true }),
        json!(tol),
        rep_mu.pass && rep_mu.convention.is_some(),
    ));

    let (forms, relations) = g2_glue_relation_data();
    let rep_eta = pullback_relations_check(&eta.map, &forms, &relations, tol)?;
    cases.push(CaseResult::new(
        "eta-pullback-relations",
        "the 7-torus gluing relations hold simultaneously under one global sign convention",
        json!({ "pass": rep_eta.pass, "convention": rep_eta.convention }),
        json!({ "pass": true, "one_convention": true }),
        json!(tol),
        rep_eta.pass && rep_eta.convention.is_some(),
    ));

    // period-map basis identities and the duality rotation
    let frame = mirror_product_frame([0.3, 0.3, 0.3], cfg.res("mirror_fiber_resolution", 2))?;
    let check = symplectic_mirror_check(&rho_oriented(), &frame)?;
    let expected = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
    let mut matrix_ok = true;
    for i in 0..3 {
        for j in 0..3 {
            if (check.alpha_matrix[i][j] - expected[i][j]).abs() > tol {
                matrix_ok = false;
            }
        }
    }
    cases.push(CaseResult::new(
        "period-map-basis-identities",
        "the period pairing sends the first basis covector to minus the second dual, the second to the first, and the circle class to itself",
        json!({
            "alpha_matrix": check.alpha_matrix.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
            "matches_rotation": matrix_ok,
        }),
        json!({ "alpha_matrix": [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]] }),
        json!(tol),
        matrix_ok,
    ));
    cases.push(CaseResult::new(
        "symplectic-mirror-equality",
        "the period pairing factors through the duality rotation on the product frame",
        json!({ "max_deviation": check.max_deviation, "pass": check.pass }),
        json!({ "max_deviation": 0.0 }),
        json!(tol),
        check.pass,
    ));

    // perturbation control: one flipped sign must be detected
    let flipped = BasisMap::new(
        vec!["beta^1".into(), "beta^2".into(), "[dy3]".into()],
        vec!["beta_1".into(), "beta_2".into(), "[S^1]".into()],
        vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]],
    )?;
    let bad = symplectic_mirror_check(&flipped, &frame)?;
    cases.push(CaseResult::new(
        "symplectic-mirror-flip-detected",
        "a single sign flip in the duality rotation is detected as an inequality",
        json!({ "max_deviation": bad.max_deviation }),
        json!({ "detected": true }),
        json!("sign"),
        !bad.pass && bad.max_deviation > 0.5,
    ));

    Ok(cases)
}
