//! Exact and numerical machinery for weighted one-level densities of
//! low-lying zeros: residue coefficients, kernels, local measures,
//! random-matrix simulation and prime sums.

pub mod exactalg;
pub mod hiprec;
pub mod kernels;
pub mod measures;
pub mod osc;
pub mod primesums;
pub mod quad;
pub mod residues;
pub mod rmt;
