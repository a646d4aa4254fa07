//! Tools for checking degenerations of del Pezzo fibrations over finite
//! fields: graded Cox rings of weighted projective bundles, critical point
//! censuses in small characteristic, jet restriction ranks, numerical family
//! classification, and an end-to-end degeneration pipeline.

pub mod bundle;
pub mod error;
pub mod family;
pub mod field;
pub mod poly;

pub use bundle::{Bidegree, BundleSpec, Chart, CoordinateChange, DivisorClass};
pub use error::{Error, Result};
pub use field::{Fe, Field};
pub use poly::Poly;
pub mod check;
pub mod critical;
pub mod linalg;
pub mod restriction;
pub mod selftest;
pub mod pipeline;
pub mod structure;
