//! Quasi-Hermitian oscillator-bath model restricted to its single-excitation
//! sector: metric operators, the family of Hermitian counterparts `h_W`,
//! closed-form dynamics, reduced states, entropy and system-bath entanglement.

pub mod linalg;
pub mod model;
pub mod analytics;
pub mod dynamics;
pub mod dyson;
pub mod quadrature;
pub mod rng;
pub mod tol;
pub mod verify;

pub use num_complex::Complex64 as C64;
