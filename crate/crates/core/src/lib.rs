//! # treepers
//!
//! Merge trees of sampled continuous functions and the degree-zero persistence
//! theory built on them.
//!
//! A function sampled on a finite metric graph ([`domain::ScalarField`]) induces
//! the H0 pseudo-distance `d_f(x, y) = f(x) + f(y) - 2 sup_γ inf f∘γ` and the merge
//! tree `T_f` it quotients to ([`tree::MergeTree`]). From the tree we read the
//! superlevel barcode ([`barcode`]), trim it, count leaves of trimmings, estimate
//! persistence indices and box dimensions, and go back from trees to functions via
//! contour (Dyck) paths. The [`transport`] module computes bottleneck and
//! partial-transport Wasserstein distances between diagrams and weighted
//! persistence measures, and [`lab`] runs batch inequality checks on random
//! fields.
//!
//! ```
//! use treepers::domain::ScalarField;
//! use treepers::barcode::{barcode_from_field, pers_p};
//!
//! let f = ScalarField::on_path(vec![1.0, 3.0, 2.0, 4.0]).unwrap();
//! let dgm = barcode_from_field(&f);
//! assert_eq!(pers_p(&dgm, 1.0).unwrap(), 4.0);
//! ```

// Index loops mirror the matrix formulas; negated comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod barcode;
pub mod domain;
mod error;
pub mod io;
pub mod lab;
pub mod stats;
pub mod transport;
pub mod tree;

pub use error::{Error, Result};
