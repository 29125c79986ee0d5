//! Finitely supported probability measures over convex spaces, with exact
//! rational arithmetic throughout.

// index loops over square tables read better than zipped iterators
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod check;
pub mod convex;
pub mod error;
pub mod fields;
pub mod measures;
pub mod metric;
pub mod rational;
pub mod registry;
pub mod sampling;

pub use error::{Error, Result};
