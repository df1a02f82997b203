//! Symbolic variational calculus: Euler operators, Noether's second theorem
//! with constrained gauge functions, and the lattice analogue.

pub mod diff;
pub mod expr;
pub mod io;
pub mod lattice;
pub mod linop;
pub mod noether;
pub mod noether_disc;
pub mod verify;

pub use expr::{
    canonicalize, conj, evaluate, is_linear_homogeneous, partial_wrt, same, substitute,
    try_canonicalize, Atom, Conjugation, Expr, Func, KernelError, Mode, MultiIndex, Number,
    VarKind, VarRef, Q,
};
pub use linop::{Characteristic, FluxVector, LinearOperator};
pub use noether::{ConservationLaw, NoetherError};
pub use verify::{zero_test, Status, Verdict, ZeroTestConfig};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/expressions.md")]
    mod expressions {}
    #[doc = include_str!("../../../book/src/euler.md")]
    mod euler {}
    #[doc = include_str!("../../../book/src/noether.md")]
    mod noether {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/problem_files.md")]
    mod problem_files {}
}
