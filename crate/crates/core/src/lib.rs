//! Deduction kernel and arithmetic back end for replaying Lyapunov stability
//! proofs of continuous ODE systems in differential dynamic logic.

pub mod syntax;
pub mod arith;
pub mod dynamics;
pub mod kernel;
pub mod lyapunov;
pub mod proofs;
