//! Certified censuses of closed geodesics and holonomies for marked Kleinian groups.

pub mod census;
pub mod experiments;
pub mod exponent;
pub mod flowbox;
pub mod lattice;
pub mod marking;
pub mod mobius;
pub mod orbit;
pub mod patterson;
pub mod space;
pub mod util;
pub mod word;

pub use mobius::{Cx, Moebius, SpherePoint};
