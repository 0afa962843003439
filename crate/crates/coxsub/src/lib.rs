//! Subexpression graphs `Sub(s, w)` of Coxeter groups and generators of their cycle spaces.

pub mod coxeter;
pub mod roots;
pub mod subexpr;
pub mod dihedral;
pub mod cycles;
pub mod cli;
