//! Clifford algebra of ℝ⁴ acting on the spinor space W = W₊ ⊕ W₋ = ℂ² ⊕ ℂ².
//!
//! Convention: v·v = −|v|², so 1-forms act skew-hermitianly and 2-forms land in
//! su(W₊) ⊕ su(W₋). Spinor coordinates are (plus0, plus1, minus0, minus1).

use std::sync::LazyLock;

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64 as C64;

use crate::consts::{gamma_blocks, PAIRS};
use crate::error::{Error, Result};

pub type SpinorValue = Vector4<C64>;
pub type HalfSpinor = Vector2<C64>;
pub type SpinorEndo = Matrix4<C64>;
pub type HalfEndo = Matrix2<C64>;

/// Complex dimension of the irreducible representation.
pub const SPINOR_DIM: usize = 4;

static GAMMAS: LazyLock<[Matrix4<C64>; 4]> = LazyLock::new(|| {
    gamma_blocks().map(|a| {
        let mut g = Matrix4::zeros();
        g.fixed_view_mut::<2, 2>(0, 2).copy_from(&a);
        g.fixed_view_mut::<2, 2>(2, 0).copy_from(&(-a.adjoint()));
        g
    })
});

/// Products γ_{i1}⋯γ_{ik} for every increasing index set, keyed by bitmask.
static MONOMIALS: LazyLock<[Matrix4<C64>; 16]> = LazyLock::new(|| {
    let mut out = [Matrix4::identity(); 16];
    for (mask, m) in out.iter_mut().enumerate() {
        for (a, g) in GAMMAS.iter().enumerate() {
            if mask & (1 << a) != 0 {
                *m *= g;
            }
        }
    }
    out
});

/// γ_i for 1 ≤ i ≤ 4.
pub fn gamma(i: usize) -> Result<Matrix4<C64>> {
    if !(1..=4).contains(&i) {
        return Err(Error::IndexOutOfRange(i));
    }
    Ok(GAMMAS[i - 1])
}

/// All four generators, 0-based.
pub fn gammas() -> &'static [Matrix4<C64>; 4] {
    &GAMMAS
}

pub fn join(plus: HalfSpinor, minus: HalfSpinor) -> SpinorValue {
    Vector4::new(plus[0], plus[1], minus[0], minus[1])
}

pub fn plus_part(s: &SpinorValue) -> HalfSpinor {
    Vector2::new(s[0], s[1])
}

pub fn minus_part(s: &SpinorValue) -> HalfSpinor {
    Vector2::new(s[2], s[3])
}

pub fn block_pp(e: &SpinorEndo) -> HalfEndo {
    e.fixed_view::<2, 2>(0, 0).into_owned()
}

pub fn block_mm(e: &SpinorEndo) -> HalfEndo {
    e.fixed_view::<2, 2>(2, 2).into_owned()
}

pub fn block_pm(e: &SpinorEndo) -> HalfEndo {
    e.fixed_view::<2, 2>(0, 2).into_owned()
}

pub fn block_mp(e: &SpinorEndo) -> HalfEndo {
    e.fixed_view::<2, 2>(2, 0).into_owned()
}

/// Embeds an endomorphism of W₊ as a block-diagonal endomorphism of W.
pub fn embed_plus(b: &HalfEndo) -> SpinorEndo {
    let mut e = Matrix4::zeros();
    e.fixed_view_mut::<2, 2>(0, 0).copy_from(b);
    e
}

/// Complex exterior form on ℝ⁴ in an orthonormal coframe. Coefficient `coeffs[m]`
/// multiplies e^{i1}∧⋯∧e^{ik} where the bits of m are the (0-based) indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Form {
    pub coeffs: [C64; 16],
}

impl Default for Form {
    fn default() -> Self {
        Self::zero()
    }
}

impl Form {
    pub fn zero() -> Self {
        Form { coeffs: [C64::new(0.0, 0.0); 16] }
    }

    /// c·e^{i1}∧⋯∧e^{ik} for 1-based indices in any order; the sign of the
    /// sorting permutation is absorbed into the coefficient.
    pub fn monomial(indices: &[usize], c: C64) -> Result<Self> {
        if indices.len() > 4 {
            return Err(Error::DegreeTooHigh(indices.len()));
        }
        let mut idx = indices.to_vec();
        for &i in &idx {
            if !(1..=4).contains(&i) {
                return Err(Error::IndexOutOfRange(i));
            }
        }
        let mut sign = 1.0;
        for i in 0..idx.len() {
            for j in 0..idx.len() - 1 - i {
                if idx[j] == idx[j + 1] {
                    return Err(Error::RepeatedIndex(idx[j]));
                }
                if idx[j] > idx[j + 1] {
                    idx.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::RepeatedIndex(idx[0]));
        }
        let mask = idx.iter().fold(0usize, |m, &i| m | 1 << (i - 1));
        let mut f = Self::zero();
        f.coeffs[mask] = c * sign;
        Ok(f)
    }

    pub fn scalar(c: C64) -> Self {
        let mut f = Self::zero();
        f.coeffs[0] = c;
        f
    }

    pub fn one_form(v: &[C64; 4]) -> Self {
        let mut f = Self::zero();
        for a in 0..4 {
            f.coeffs[1 << a] = v[a];
        }
        f
    }

    pub fn real_one_form(v: &[f64; 4]) -> Self {
        Self::one_form(&v.map(|x| C64::new(x, 0.0)))
    }

    /// 2-form from coefficients on e12, e13, e14, e23, e24, e34.
    pub fn two_form(w: &[C64; 6]) -> Self {
        let mut f = Self::zero();
        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            f.coeffs[(1 << a) | (1 << b)] = w[k];
        }
        f
    }

    pub fn real_two_form(w: &[f64; 6]) -> Self {
        Self::two_form(&w.map(|x| C64::new(x, 0.0)))
    }

    pub fn volume() -> Self {
        let mut f = Self::zero();
        f.coeffs[15] = C64::new(1.0, 0.0);
        f
    }

    pub fn degree(&self) -> Option<usize> {
        (0..16usize)
            .filter(|&m| self.coeffs[m] != C64::new(0.0, 0.0))
            .map(|m| m.count_ones() as usize)
            .max()
    }

    pub fn add(&self, other: &Form) -> Form {
        let mut f = *self;
        for m in 0..16 {
            f.coeffs[m] += other.coeffs[m];
        }
        f
    }

    pub fn scale(&self, c: C64) -> Form {
        Form { coeffs: self.coeffs.map(|x| x * c) }
    }

    /// Endomorphism of W by which the form acts.
    pub fn matrix(&self) -> SpinorEndo {
        let mut out = Matrix4::zeros();
        for (m, g) in MONOMIALS.iter().enumerate() {
            let c = self.coeffs[m];
            if c != C64::new(0.0, 0.0) {
                out += g * c;
            }
        }
        out
    }
}

pub fn clifford_mul(form: &Form, s: &SpinorValue) -> SpinorValue {
    form.matrix() * s
}

/// Clifford action of a real 1-form: Σ v_a γ_a.
pub fn rho_one(v: &[f64; 4]) -> SpinorEndo {
    let mut out = Matrix4::zeros();
    for a in 0..4 {
        out += GAMMAS[a] * C64::new(v[a], 0.0);
    }
    out
}

/// Clifford action of a real 2-form given on e12, …, e34.
pub fn rho_two(w: &[f64; 6]) -> SpinorEndo {
    let mut out = Matrix4::zeros();
    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        out += MONOMIALS[(1 << a) | (1 << b)] * C64::new(w[k], 0.0);
    }
    out
}

/// Clifford action of the imaginary 2-form i·w.
pub fn rho_two_imag(w: &[f64; 6]) -> SpinorEndo {
    rho_two(w) * C64::new(0.0, 1.0)
}

/// ψψ† − ½|ψ|² on W₊, the traceless part of ψ*⊗ψ.
pub fn quadratic_map(psi: &HalfSpinor) -> HalfEndo {
    psi * psi.adjoint() - HalfEndo::identity() * C64::new(0.5 * psi.norm_squared(), 0.0)
}

/// Polarization of `quadratic_map`: [φ*⊗ψ + ψ*⊗φ]₀.
pub fn quadratic_pair(phi: &HalfSpinor, psi: &HalfSpinor) -> HalfEndo {
    let re = psi.dotc(phi).re;
    phi * psi.adjoint() + psi * phi.adjoint() - HalfEndo::identity() * C64::new(re, 0.0)
}

/// The 1-form ψ*⊗χ with ⟨σ·ψ, χ⟩ = 2⟨σ, v⟩ for every complex 1-form σ, where
/// ⟨σ, v⟩ = Σ σ̄_a v_a. Components: v_a = −½ ψ†γ_aχ on the full spinors.
pub fn spinor_pair_to_oneform(psi: &HalfSpinor, chi: &HalfSpinor) -> [C64; 4] {
    let blocks = gamma_blocks();
    let mut v = [C64::new(0.0, 0.0); 4];
    for a in 0..4 {
        v[a] = -0.5 * psi.dotc(&(blocks[a] * chi));
    }
    v
}

/// Same pairing for two arbitrary full spinors: v_a = −½ φ†γ_aζ.
pub fn spinor_pair_full(phi: &SpinorValue, zeta: &SpinorValue) -> [C64; 4] {
    let mut v = [C64::new(0.0, 0.0); 4];
    for a in 0..4 {
        v[a] = -0.5 * phi.dotc(&(GAMMAS[a] * zeta));
    }
    v
}

/// ρ(λω + μ − μ̄) on W₊ in the Kähler basis (Λ⁰'⁰, Λ⁰'²), for λ = i·`lambda` and μ
/// the coefficient of the unit (0,2)-form ε₁∧ε₂. The result 2[[λ', μ̄], [μ, −λ']]
/// is hermitian and traceless.
pub fn rho_selfdual_block(lambda: f64, mu: C64) -> HalfEndo {
    Matrix2::new(C64::new(lambda, 0.0), mu.conj(), mu, C64::new(-lambda, 0.0)) * C64::new(2.0, 0.0)
}

/// Imaginary self-dual 2-form i·w with λω + μ − μ̄ = i·w, in `PAIRS` coordinates.
pub fn kahler_selfdual_form(lambda: f64, mu: C64) -> [f64; 6] {
    // μ ε₁∧ε₂ = (μ/2)(e13 − i e14 − i e23 − e24); subtract the conjugate, divide by i.
    let (mr, mi) = (mu.re, mu.im);
    [lambda, mi, -mr, -mr, -mi, lambda]
}

/// ⟨A, B⟩ = ¼ Re tr(AB†) on End(W); 2-forms map isometrically.
pub fn endo_inner(a: &SpinorEndo, b: &SpinorEndo) -> f64 {
    0.25 * (a * b.adjoint()).trace().re
}

/// ⟨A, B⟩ = ¼ Re tr(AB†) on the W₊ block, matching `endo_inner` after embedding.
pub fn half_endo_inner(a: &HalfEndo, b: &HalfEndo) -> f64 {
    0.25 * (a * b.adjoint()).trace().re
}

/// ⟨u, v⟩ = ½ Re tr(uv†) on Hom(W₊, W₋).
pub fn hom_inner(u: &HalfEndo, v: &HalfEndo) -> f64 {
    0.5 * (u * v.adjoint()).trace().re
}
