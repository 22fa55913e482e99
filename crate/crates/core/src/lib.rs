//! Chabauty limits of Fermat spirals `{√n·e^{2πiαn}}`.
//!
//! The crate is organised bottom-up:
//!
//! * [`number_theory`]: exact continued fractions of α, convergents and the
//!   `(β, c, c̃)` triplets that parametrise limit lattices;
//! * [`spiral`]: certified spiral points at large index, windows and
//!   nearest neighbours;
//! * [`chabauty`]: finite patches and the Chabauty–Fell distance;
//! * [`lattice`]: planar bases, Lagrange–Gauss reduction and lattice fitting;
//! * [`limits`]: predicted limit lattices, the centre sequences realising
//!   them and the empirical comparison pipeline;
//! * [`forest`]: density, Delone constants and empty-rectangle witnesses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chabauty;
pub mod error;
pub mod forest;
pub mod format;
pub mod geometry;
pub mod lattice;
pub mod limits;
pub mod number_theory;
pub mod spiral;

pub use error::{Error, Result};
pub use geometry::Point2;
pub use number_theory::AngleSpec;
