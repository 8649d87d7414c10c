//! Spin^c geometry on a discretized flat 4-torus: Clifford algebra, Dirac operators
//! over arbitrary metrics, the linearized Seiberg-Witten operator with its formal
//! adjoint, and the Kähler specialization of the obstruction equations.

pub mod calculus;
pub mod clifford;
pub mod consts;
pub mod dirac;
pub mod error;
pub mod field;
pub mod kahler;
pub mod metric;
pub mod sample;
pub mod sw;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
