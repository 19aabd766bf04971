//! Real-arithmetic back end: polynomial normalization, quadratic forms,
//! decision patterns for closing first-order goals, and a falsifier.

pub mod bounds;
pub mod decide;
pub mod eval;
pub mod falsify;
pub mod interval;
pub mod poly;
pub mod quadform;
pub mod smtlib;

pub use poly::{Atom, Poly, PolyError};
