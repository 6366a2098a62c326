//! Real-algebraic constructions and the one-variable holomorphic-invariant
//! experiment: polynomials with exact term arithmetic, cubical level-set
//! component counting, sphere circle counting, and the lattice-sum elliptic
//! function with loop integrals.

pub mod levelset;
pub mod poly;
pub mod weierstrass;

pub use levelset::{component_count, sphere_circle_count, CircleReport, ComponentReport};
pub use poly::{
    hyperplane_factor, quartic_torus_eval, quartic_torus_poly, two_circle_quartic,
    unit_sphere_quadric, viro_perturb, RealPolynomial,
};
pub use weierstrass::{
    lattice_invariants, loop_integral, loop_integral_constancy, self_convergence, weierstrass_p,
    EllipticData, LoopReport, PreparedLattice,
};
