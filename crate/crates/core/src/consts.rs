//! Frozen conventions. Everything that fixes a sign or a normalization lives here
//! so that the modules and the tests agree on one choice.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;
pub const FRAC_1_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Index pairs of the 2-form basis e12, e13, e14, e23, e24, e34 (0-based).
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Orthonormal basis of self-dual 2-forms in the `PAIRS` coordinates (flat metric).
pub const SELFDUAL_BASIS: [[f64; 6]; 3] = [
    [FRAC_1_SQRT2, 0.0, 0.0, 0.0, 0.0, FRAC_1_SQRT2],
    [0.0, FRAC_1_SQRT2, 0.0, 0.0, -FRAC_1_SQRT2, 0.0],
    [0.0, 0.0, FRAC_1_SQRT2, FRAC_1_SQRT2, 0.0, 0.0],
];

/// Orthonormal basis of anti-self-dual 2-forms in the `PAIRS` coordinates.
pub const ANTISELFDUAL_BASIS: [[f64; 6]; 3] = [
    [FRAC_1_SQRT2, 0.0, 0.0, 0.0, 0.0, -FRAC_1_SQRT2],
    [0.0, FRAC_1_SQRT2, 0.0, 0.0, FRAC_1_SQRT2, 0.0],
    [0.0, 0.0, FRAC_1_SQRT2, -FRAC_1_SQRT2, 0.0, 0.0],
];

/// Factor by which the Λ²₊ → Λ²₊ block of i(s*) acts, per unit of tr s.
/// Fixed by expanding the derivation (s = Id acts as 2 while tr Id = 4) and
/// confirmed against the metric-path derivative of ρ(F⁺).
pub const KAPPA: f64 = 0.5;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Upper-right blocks A_a of the generators γ_a = [[0, A_a], [−A_a†, 0]].
/// A = (1, iσ₁, iσ₂, −iσ₃); the sign on the last entry makes γ₁γ₂γ₃γ₄ = −1 on W₊.
pub fn gamma_blocks() -> [Matrix2<C64>; 4] {
    let z = c(0.0, 0.0);
    [
        Matrix2::new(c(1.0, 0.0), z, z, c(1.0, 0.0)),
        Matrix2::new(z, c(0.0, 1.0), c(0.0, 1.0), z),
        Matrix2::new(z, c(1.0, 0.0), c(-1.0, 0.0), z),
        Matrix2::new(c(0.0, -1.0), z, z, c(0.0, 1.0)),
    ]
}

/// Unitary U with U γ_a U† = c_a, where c_a is Clifford multiplication by dx_a on
/// Λ⁰'* of the flat complex torus in the orthonormal basis
/// [1, ε₁∧ε₂, ε₁, ε₂], ε_j = dz̄_j/√2. Obtained by averaging an arbitrary matrix
/// over the Clifford group and normalizing; the test suite re-derives it.
pub fn kahler_unitary() -> Matrix4<C64> {
    let h = FRAC_1_SQRT2;
    let z = 0.0;
    Matrix4::new(
        -h, h, z, z, //
        h, h, z, z, //
        z, z, h, -h, //
        z, z, h, h,
    )
    .map(|x| c(x, 0.0))
}

/// Complex structure on ℝ⁴ with z₁ = x₁ + i x₂, z₂ = x₃ + i x₄: J e₁ = e₂, J e₃ = e₄.
pub fn complex_structure() -> nalgebra::Matrix4<f64> {
    Matrix4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0,
    )
}

/// Kähler form ω = dx₁∧dx₂ + dx₃∧dx₄ in `PAIRS` coordinates.
pub const KAHLER_FORM: [f64; 6] = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
