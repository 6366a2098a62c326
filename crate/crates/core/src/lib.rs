//! Numerical laboratory for calibrated geometry on flat tori and their
//! resolutions: exterior calculus with comass estimation, finite affine group
//! actions and fixed loci, Eguchi-Hanson potential gluing, special-Lagrangian
//! and coassociative fibration defects, geodesic ball-volume comparison,
//! monodromy/intertwiner algebra with mirror gluing maps, and the
//! real-algebraic level-set toolbox.

// `!(x > 0.0)` guards double as NaN rejection; index loops over several
// parallel arrays read better than zipped iterators here.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod fibration;
pub mod forms;
pub mod intlin;
pub mod io;
pub mod mirror;
pub mod orbifold;
pub mod realalg;
pub mod resolution;
pub mod volume;

pub use error::{Error, Result};
