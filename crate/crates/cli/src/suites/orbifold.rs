//! Orbifold battery: fixed-locus counts and dimensions for the torus
//! involutions, pairwise disjointness, freeness of the compositions, and the
//! quarter-grid brute-force cross-check. Exact rational arithmetic, zero
//! tolerance.

use crate::config::RunConfig;
use crate::report::CaseResult;
use anyhow::Result;
use calfib_core::intlin::Rat;
use calfib_core::orbifold::{
    self, compose, fixed_locus, group_closure, is_free, loci_pairwise_disjoint, AffineTorusMap,
};
use serde_json::json;

fn locus_case(id: &str, claim: &str, map: &AffineTorusMap, expect_dim: usize) -> CaseResult {
    let comps = fixed_locus(map);
    let count = comps.len();
    let dims_ok = comps.iter().all(|c| c.dim() == expect_dim);
    CaseResult::new(
        id,
        claim,
        json!({ "components": count, "all_dimension": expect_dim, "dims_ok": dims_ok }),
        json!({ "components": 16 }),
        json!("exact"),
        count == 16 && dims_ok,
    )
}

/// Brute-force oracle: on the 1/4-resolution rational grid the fixed set of
/// the map equals the union of the computed components, exactly. All data
/// here has denominator dividing 4, so the test runs in integer arithmetic
/// after scaling by 4.
fn grid_oracle(map: &AffineTorusMap) -> bool {
    let n = map.dim();
    let comps = fixed_locus(map);
    // scaled translation 4b (integral for the half-integer data in play)
    let b4: Vec<i64> = map
        .translation()
        .iter()
        .map(|t| {
            let s = t * Rat::from_integer(4);
            debug_assert!(s.is_integer());
            s.to_integer()
        })
        .collect();
    // per component: scaled base and an integer annihilator of the span
    let prepared: Vec<(Vec<i64>, Vec<Vec<i64>>)> = comps
        .iter()
        .map(|c| {
            let base4: Vec<i64> = c
                .base_point
                .iter()
                .map(|t| (t * Rat::from_integer(4)).to_integer())
                .collect();
            let dirs = calfib_core::intlin::IMat::from_rows(&c.direction_lattice);
            let ann: Vec<Vec<i64>> = calfib_core::intlin::integer_kernel_basis(&dirs)
                .into_iter()
                .map(|w| w.into_iter().map(|x| x as i64).collect())
                .collect();
            (base4, ann)
        })
        .collect();

    let total = 4usize.pow(n as u32);
    let mut p4 = vec![0i64; n];
    for code in 0..total {
        let mut rem = code;
        for slot in p4.iter_mut() {
            *slot = (rem % 4) as i64;
            rem /= 4;
        }
        // fixed iff D p4 + 4 b = p4 (mod 4)
        let fixed = (0..n).all(|i| {
            let mut acc = b4[i];
            for j in 0..n {
                acc += map.linear_entry(i, j) * p4[j];
            }
            (acc - p4[i]).rem_euclid(4) == 0
        });
        // covered iff some component annihilator kills p4 - base4 (mod 4)
        let covered = prepared.iter().any(|(base4, ann)| {
            ann.iter().all(|w| {
                let dot: i64 = (0..n).map(|i| w[i] * (p4[i] - base4[i])).sum();
                dot.rem_euclid(4) == 0
            })
        });
        if fixed != covered {
            return false;
        }
    }
    true
}

pub fn run(_cfg: &RunConfig) -> Result<Vec<CaseResult>> {
    let mut cases = Vec::new();

    let alpha = orbifold::cy3_alpha();
    let beta = orbifold::cy3_beta();
    cases.push(locus_case(
        "alpha-fixed-locus-count",
        "fixed locus of the first 6-torus involution is sixteen 2-tori",
        &alpha,
        2,
    ));
    cases.push(locus_case(
        "alpha-half-imaginary-fixed-locus-count",
        "the half-imaginary translation variant also fixes sixteen 2-tori (both conventions reported)",
        &orbifold::cy3_alpha_half_imaginary(),
        2,
    ));
    cases.push(locus_case(
        "beta-fixed-locus-count",
        "fixed locus of the second 6-torus involution is sixteen 2-tori",
        &beta,
        2,
    ));

    let rep = loci_pairwise_disjoint(&[alpha.clone(), beta.clone()])?;
    cases.push(CaseResult::new(
        "cy3-loci-disjoint",
        "the fixed loci of the two 6-torus involutions do not intersect",
        json!({ "disjoint": rep.disjoint, "witnesses": rep.witnesses.len() }),
        json!({ "disjoint": true }),
        json!("exact"),
        rep.disjoint,
    ));

    let ab = compose(&alpha, &beta)?;
    cases.push(CaseResult::new(
        "cy3-alpha-beta-free",
        "the composition of the two 6-torus involutions acts freely",
        json!(is_free(&ab)),
        json!(true),
        json!("exact"),
        is_free(&ab),
    ));

    let g2_gens = [
        orbifold::g2_alpha(),
        orbifold::g2_beta(),
        orbifold::g2_gamma(),
    ];
    for (name, map) in ["alpha", "beta", "gamma"].iter().zip(&g2_gens) {
        cases.push(locus_case(
            &format!("g2-{name}-fixed-locus-count"),
            &format!("fixed locus of the 7-torus generator {name} is sixteen 3-tori"),
            map,
            3,
        ));
        let oracle = grid_oracle(map);
        cases.push(CaseResult::new(
            &format!("g2-{name}-grid-oracle"),
            "quarter-grid brute force agrees with the computed fixed locus exactly",
            json!(oracle),
            json!(true),
            json!("exact"),
            oracle,
        ));
    }

    let rep = loci_pairwise_disjoint(&g2_gens)?;
    cases.push(CaseResult::new(
        "g2-loci-pairwise-disjoint",
        "the fixed loci of the three 7-torus generators are pairwise disjoint",
        json!({ "disjoint": rep.disjoint, "witnesses": rep.witnesses.len() }),
        json!({ "disjoint": true }),
        json!("exact"),
        rep.disjoint,
    ));

    let group = group_closure(&g2_gens, 64)?;
    let mut all_free = group.order() == 8;
    let mut checked = 0;
    for e in &group.elements {
        if e.is_identity() || g2_gens.contains(e) {
            continue;
        }
        checked += 1;
        if !is_free(e) {
            all_free = false;
        }
    }
    cases.push(CaseResult::new(
        "g2-compositions-free",
        "every nontrivial non-generator element of the order-8 group acts freely",
        json!({ "group_order": group.order(), "compositions_checked": checked, "all_free": all_free }),
        json!({ "group_order": 8, "all_free": true }),
        json!("exact"),
        all_free,
    ));
    cases.push(CaseResult::new(
        "g2-group-structure",
        "the three generators are commuting involutions closing to order 8",
        json!({
            "abelian": group.is_abelian(),
            "involutions": group.generators_are_involutions(),
            "order": group.order(),
        }),
        json!({ "abelian": true, "involutions": true, "order": 8 }),
        json!("exact"),
        group.is_abelian() && group.generators_are_involutions() && group.order() == 8,
    ));

    Ok(cases)
}
