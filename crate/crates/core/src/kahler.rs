//! Kähler specialization on the flat complex torus: type decompositions of
//! symmetric endomorphisms, Dolbeault operators, the Kähler form of the monopole
//! equations and the linear system carrying the obstruction.
//!
//! Complex coordinates are z₁ = x⁰ + i x¹, z₂ = x² + i x³. Complex forms live in a
//! 16-dimensional basis of monomials in the generators dz₁, dz₂, dz̄₁, dz̄₂ (bits
//! 0..3, wedged in increasing bit order) with |dz_j|² = |dz̄_j|² = 2. Dolbeault
//! fields store coefficients on 1, dz̄₁, dz̄₂ and dz̄₁∧dz̄₂.

use std::sync::LazyLock;

use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::calculus::{exterior_d1, partial_derivative};
use crate::consts::{complex_structure, kahler_unitary, PAIRS, SQRT2};
use crate::dirac::Spinors;
use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::metric::{delta_minus_frame, from_pm, spd_inv_sqrt, spd_sqrt, split_pm};

pub type ComplexForm = [C64; 16];
pub type FormField = Field<ComplexForm>;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub const DZ: [usize; 2] = [0, 1];
pub const DZBAR: [usize; 2] = [2, 3];
const M01: [usize; 2] = [1 << 2, 1 << 3];
const M02: usize = 0b1100;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

// ---------------------------------------------------------------------------
// Complex structures and type decompositions

/// An orthogonal complex structure on flat ℝ⁴ compatible with the orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructure {
    j: Matrix4<f64>,
    /// P = [Z₁ Z₂ Z̄₁ Z̄₂] with Z_k = ½(u_k − iJu_k); rows of P⁻¹ are dz₁, dz₂, dz̄₁, dz̄₂.
    p: Matrix4<C64>,
    p_inv: Matrix4<C64>,
}

impl ComplexStructure {
    pub fn standard() -> Self {
        Self::new(complex_structure()).expect("frozen complex structure is valid")
    }

    pub fn new(j: Matrix4<f64>) -> Result<Self> {
        let tol = 1e-12;
        if (j * j + Matrix4::identity()).amax() > tol {
            return Err(Error::InvalidComplexStructure("J² ≠ −1".into()));
        }
        if (j.transpose() * j - Matrix4::identity()).amax() > tol {
            return Err(Error::InvalidComplexStructure("J is not orthogonal".into()));
        }
        let (_, asd) = split_pm(&form_of(&j));
        if asd.iter().any(|x| x.abs() > tol) {
            return Err(Error::InvalidComplexStructure("ω is not self-dual".into()));
        }
        let u1 = Vector4::new(1.0, 0.0, 0.0, 0.0);
        let ju1 = j * u1;
        // First coordinate vector with a substantial component orthogonal to span{u₁, Ju₁};
        // for the standard J this is e₂, so Z₂ = ∂_{z₂}.
        let u2 = (0..4)
            .map(|k| {
                let e = Vector4::from_fn(|i, _| if i == k { 1.0 } else { 0.0 });
                e - u1 * u1.dot(&e) - ju1 * ju1.dot(&e)
            })
            .find(|v| v.norm() > 0.5)
            .expect("complement of a complex line is nonzero")
            .normalize();
        let z = |u: Vector4<f64>| (u.map(c) - (j * u).map(|x| I * x)) * c(0.5);
        let (z1, z2) = (z(u1), z(u2));
        let p = Matrix4::from_columns(&[z1, z2, z1.conjugate(), z2.conjugate()]);
        let p_inv = p.try_inverse().ok_or(Error::Singular)?;
        Ok(ComplexStructure { j, p, p_inv })
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.j
    }

    /// ω(X, Y) = ⟨JX, Y⟩ in `PAIRS` coordinates; the standard J gives dx⁰∧dx¹ + dx²∧dx³.
    pub fn kahler_form(&self) -> [f64; 6] {
        form_of(&self.j)
    }

    /// Z₁, Z₂ spanning T¹'⁰.
    pub fn holomorphic_basis(&self) -> [Vector4<C64>; 2] {
        [self.p.column(0).into(), self.p.column(1).into()]
    }
}

fn form_of(j: &Matrix4<f64>) -> [f64; 6] {
    PAIRS.map(|(a, b)| j[(b, a)])
}

/// The hermitian and antihermitian parts ½(s − JsJ) and ½(s + JsJ) of a g-symmetric
/// endomorphism: the first commutes with J, the second anticommutes.
pub fn split_sym_at(s: &Matrix4<f64>, cs: &ComplexStructure, g: &Matrix4<f64>) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
    let j = &cs.j;
    let scale = g.amax().max(1.0);
    if (j.transpose() * g * j - g).amax() > 1e-10 * scale {
        return Err(Error::InvalidComplexStructure("metric is not J-hermitian".into()));
    }
    let lowered = g * s;
    if (lowered - lowered.transpose()).amax() > 1e-10 * lowered.amax().max(1.0) {
        return Err(Error::ShapeMismatch("endomorphism is not g-symmetric".into()));
    }
    let jsj = j * s * j;
    Ok(((s - jsj) * 0.5, (s + jsj) * 0.5))
}

pub fn split_sym(
    s: &Field<Matrix4<f64>>,
    cs: &ComplexStructure,
    g: &Field<Matrix4<f64>>,
) -> Result<(Field<Matrix4<f64>>, Field<Matrix4<f64>>)> {
    s.check_same_grid(g)?;
    let parts: Vec<_> = (0..s.grid().len())
        .into_par_iter()
        .map(|x| split_sym_at(s.at(x), cs, g.at(x)))
        .collect::<Result<_>>()?;
    let (h, a): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    Ok((Field::from_values(s.grid(), h)?, Field::from_values(s.grid(), a)?))
}

/// Blocks of f ⊗ ℂ in the basis (Z₁, Z₂, Z̄₁, Z̄₂): the matrix is [[a, b̄], [b, ā]], with
/// a: T¹'⁰ → T¹'⁰ and b: T¹'⁰ → T⁰'¹.
pub fn ab_components(f: &Matrix4<f64>, cs: &ComplexStructure) -> (Matrix2<C64>, Matrix2<C64>) {
    let q = cs.p_inv * f.map(c) * cs.p;
    (q.fixed_view::<2, 2>(0, 0).into(), q.fixed_view::<2, 2>(2, 0).into())
}

pub fn from_ab(a: &Matrix2<C64>, b: &Matrix2<C64>, cs: &ComplexStructure) -> Matrix4<f64> {
    let mut q = Matrix4::zeros();
    q.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    q.fixed_view_mut::<2, 2>(2, 0).copy_from(b);
    q.fixed_view_mut::<2, 2>(0, 2).copy_from(&b.conjugate());
    q.fixed_view_mut::<2, 2>(2, 2).copy_from(&a.conjugate());
    (cs.p * q * cs.p_inv).map(|z| z.re)
}

/// H_kl = S(Z_k, Z̄_l) for a real symmetric bilinear form S.
pub fn hermitian_coefficients(s: &Matrix4<f64>, cs: &ComplexStructure) -> Matrix2<C64> {
    let sc = s.map(c);
    let z = cs.holomorphic_basis();
    Matrix2::from_fn(|k, l| (z[k].transpose() * sc * z[l].conjugate())[0])
}

/// S_kl = S(Z̄_k, Z̄_l), the (0,2) part of a real symmetric bilinear form.
pub fn o2_coefficients(s: &Matrix4<f64>, cs: &ComplexStructure) -> Matrix2<C64> {
    let sc = s.map(c);
    let z = cs.holomorphic_basis();
    Matrix2::from_fn(|k, l| (z[k].conjugate().transpose() * sc * z[l].conjugate())[0])
}

/// Which factor types a complex 2-tensor u = Σ u_ij θ_i ⊗ θ'_j has.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorType {
    /// Λ¹'⁰ ⊗ Λ⁰'¹: θ = dz, θ' = dz̄.
    Mixed,
    /// Λ⁰'¹ ⊗ Λ⁰'¹: θ = θ' = dz̄.
    ZeroTwo,
}

/// sym Re u as a real symmetric bilinear form in coordinates:
/// S(X, Y) = ½ Re(u(X, Y) + u(Y, X)).
pub fn sym_re_part(u: &Matrix2<C64>, kind: TensorType, cs: &ComplexStructure) -> Matrix4<f64> {
    let row = |k: usize| cs.p_inv.row(k).transpose();
    let (left, right) = match kind {
        TensorType::Mixed => ([row(0), row(1)], [row(2), row(3)]),
        TensorType::ZeroTwo => ([row(2), row(3)], [row(2), row(3)]),
    };
    let mut m = Matrix4::<C64>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m += left[i] * right[j].transpose() * u[(i, j)];
        }
    }
    ((m + m.transpose()) * c(0.5)).map(|z| z.re)
}

pub fn sym_re_part_field(u: &Field<Matrix2<C64>>, kind: TensorType, cs: &ComplexStructure) -> Field<Matrix4<f64>> {
    u.map(|v| sym_re_part(v, kind, cs))
}

/// Real 2-form −2i Σ h_ij dz_i∧dz̄_j of a hermitian matrix h, in `PAIRS` coordinates.
pub fn herm_to_11form(h: &Matrix2<C64>) -> Result<[f64; 6]> {
    let defect = (h - h.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if defect > 1e-12 * h.iter().fold(1.0f64, |m, z| m.max(z.norm())) {
        return Err(Error::NotHermitian(defect));
    }
    let mut u = [ZERO; 16];
    for i in 0..2 {
        for j in 0..2 {
            u[(1 << DZ[i]) | (1 << DZBAR[j])] = -2.0 * I * h[(i, j)];
        }
    }
    Ok(to_real_two_form(&u).map(|z| z.re))
}

/// Inverse of `herm_to_11form` on real (1,1)-forms.
pub fn form_to_herm(w: &[f64; 6]) -> Result<Matrix2<C64>> {
    let u = from_real_two_form(w);
    let defect = u[0b0011].norm().max(u[M02].norm());
    if defect > 1e-12 * w.iter().fold(1.0f64, |m, x| m.max(x.abs())) {
        return Err(Error::NotType11(defect));
    }
    Ok(Matrix2::from_fn(|i, j| u[(1 << DZ[i]) | (1 << DZBAR[j])] * I * 0.5))
}

/// δ₋ of the two parts of a traceless g-symmetric endomorphism, projected onto
/// ℝω ⊂ Λ²₊ and its complement Re(Λ⁰'² ⊕ Λ²'⁰).
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaSplit {
    /// ω-row of δ₋(hermitian part): Λ²₋ → ℝω.
    pub omega_row: [f64; 3],
    /// δ₋(antihermitian part) followed by the projection away from ω.
    pub o2_block: Matrix3<f64>,
    /// Component of δ₋(hermitian part) orthogonal to ω (zero in exact arithmetic).
    pub herm_leak: f64,
    /// ω-component of δ₋(antihermitian part) (zero in exact arithmetic).
    pub antiherm_leak: f64,
}

pub fn delta_minus_split(s: &Matrix4<f64>, cs: &ComplexStructure, g: &Matrix4<f64>) -> Result<DeltaSplit> {
    let tr = s.trace();
    if tr.abs() > 1e-10 * s.amax().max(1.0) {
        return Err(Error::NonzeroTrace(tr));
    }
    let (h, a) = split_sym_at(s, cs, g)?;
    let e = spd_inv_sqrt(g)?;
    let ei = spd_sqrt(g)?;
    let dh = delta_minus_frame(&(ei * h * e));
    let da = delta_minus_frame(&(ei * a * e));
    let (w, _) = split_pm(&form_of(&(ei * cs.j * e)));
    let w = Vector3::from(w).normalize();
    let off = Matrix3::identity() - w * w.transpose();
    let omega_row = dh.transpose() * w;
    Ok(DeltaSplit {
        omega_row: [omega_row[0], omega_row[1], omega_row[2]],
        o2_block: off * da,
        herm_leak: (off * dh).norm(),
        antiherm_leak: (da.transpose() * w).norm(),
    })
}

// ---------------------------------------------------------------------------
// Pointwise exterior algebra of complex forms

fn wedge_sign(k: usize, m: usize) -> Option<f64> {
    if m & (1 << k) != 0 {
        return None;
    }
    Some(if (m & ((1 << k) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
}

/// |monomial|² for the pointwise inner product.
pub fn monomial_norm_sq(m: usize) -> f64 {
    (1u32 << m.count_ones()) as f64
}

/// c·(g_k ∧ u) for the generator g_k.
pub fn wedge_generator(k: usize, u: &ComplexForm, coef: C64) -> ComplexForm {
    let mut out = [ZERO; 16];
    for m in 0..16 {
        if let Some(s) = wedge_sign(k, m) {
            out[m | (1 << k)] += u[m] * coef * s;
        }
    }
    out
}

/// c·(g_k ∧)* u, the pointwise adjoint of wedging with g_k.
pub fn contract_generator(k: usize, u: &ComplexForm, coef: C64) -> ComplexForm {
    let mut out = [ZERO; 16];
    for m in 0..16 {
        if let Some(s) = wedge_sign(k, m) {
            out[m] += u[m | (1 << k)] * coef * (2.0 * s);
        }
    }
    out
}

fn merge_sign(a: usize, b: usize) -> f64 {
    let inversions: u32 = (0..4).filter(|j| b & (1 << j) != 0).map(|j| (a >> (j + 1)).count_ones()).sum();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn wedge(u: &ComplexForm, v: &ComplexForm) -> ComplexForm {
    let mut out = [ZERO; 16];
    for a in 0..16 {
        if u[a] == ZERO {
            continue;
        }
        for b in 0..16 {
            if a & b == 0 {
                out[a | b] += u[a] * v[b] * merge_sign(a, b);
            }
        }
    }
    out
}

/// conj(g_{k₁}∧…) = ḡ_{k₁}∧…, reordered: target monomial and sign.
static CONJ_TABLE: LazyLock<[(usize, f64); 16]> = LazyLock::new(|| {
    std::array::from_fn(|m| {
        let mut cur = [ZERO; 16];
        cur[0] = c(1.0);
        for k in 0..4 {
            if m & (1 << k) != 0 {
                cur = wedge_generator(k ^ 2, &cur, c(1.0));
            }
        }
        let t = (0..16).find(|&t| cur[t] != ZERO).expect("nonzero monomial");
        (t, cur[t].re)
    })
});

pub fn conj_form(u: &ComplexForm) -> ComplexForm {
    let mut out = [ZERO; 16];
    for m in 0..16 {
        let (t, s) = CONJ_TABLE[m];
        out[t] += u[m].conj() * s;
    }
    out
}

/// dx^μ as a complex 1-form: dx^{2j} = ½(dz_j + dz̄_j), dx^{2j+1} = −½i(dz_j − dz̄_j).
fn dx(mu: usize) -> ComplexForm {
    let j = mu / 2;
    let mut u = [ZERO; 16];
    if mu % 2 == 0 {
        u[1 << DZ[j]] = c(0.5);
        u[1 << DZBAR[j]] = c(0.5);
    } else {
        u[1 << DZ[j]] = -0.5 * I;
        u[1 << DZBAR[j]] = 0.5 * I;
    }
    u
}

/// Value of generator g_k on the coordinate vector ∂_μ.
fn generator_on(k: usize, mu: usize) -> C64 {
    let j = k % 2;
    if mu / 2 != j {
        return ZERO;
    }
    match (k < 2, mu % 2 == 0) {
        (_, true) => c(1.0),
        (true, false) => I,
        (false, false) => -I,
    }
}

pub fn from_real_two_form(w: &[f64; 6]) -> ComplexForm {
    let mut u = [ZERO; 16];
    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        let t = wedge(&dx(a), &dx(b));
        for m in 0..16 {
            u[m] += t[m] * w[k];
        }
    }
    u
}

/// The degree-2 part evaluated on coordinate pairs: u(∂_a, ∂_b) for `PAIRS`.
pub fn to_real_two_form(u: &ComplexForm) -> [C64; 6] {
    PAIRS.map(|(a, b)| {
        let mut s = ZERO;
        for m in (0..16).filter(|m: &usize| m.count_ones() == 2) {
            let k1 = m.trailing_zeros() as usize;
            let k2 = (usize::BITS - 1 - m.leading_zeros()) as usize;
            s += u[m]
                * (generator_on(k1, a) * generator_on(k2, b) - generator_on(k1, b) * generator_on(k2, a));
        }
        s
    })
}

// ---------------------------------------------------------------------------
// Dolbeault operators on form fields

fn zip_forms<F: Fn(&ComplexForm, &ComplexForm) -> ComplexForm + Sync>(a: &FormField, b: &FormField, f: F) -> FormField {
    a.zip(b, f)
}

fn add_forms(a: &ComplexForm, b: &ComplexForm) -> ComplexForm {
    std::array::from_fn(|m| a[m] + b[m])
}

/// ∂_{z_j} (bar = false) or ∂_{z̄_j} (bar = true), by central differences.
fn complex_partial(f: &FormField, j: usize, bar: bool) -> FormField {
    let dx = partial_derivative(f, 2 * j);
    let dy = partial_derivative(f, 2 * j + 1);
    let ci = if bar { 0.5 * I } else { -0.5 * I };
    zip_forms(&dx, &dy, |a, b| std::array::from_fn(|m| a[m] * 0.5 + b[m] * ci))
}

fn sum_terms(grid: Grid, terms: Vec<FormField>) -> FormField {
    terms.into_iter().fold(Field::zeros(grid), |acc, t| zip_forms(&acc, &t, add_forms))
}

pub fn del(f: &FormField) -> FormField {
    let t = (0..2).map(|j| complex_partial(f, j, false).map(|u| wedge_generator(DZ[j], u, c(1.0)))).collect();
    sum_terms(f.grid(), t)
}

pub fn del_bar(f: &FormField) -> FormField {
    let t = (0..2).map(|j| complex_partial(f, j, true).map(|u| wedge_generator(DZBAR[j], u, c(1.0)))).collect();
    sum_terms(f.grid(), t)
}

/// Exact lattice adjoint of `del`: the central difference ∂_{z_j} has adjoint −∂_{z̄_j}.
pub fn del_adjoint(f: &FormField) -> FormField {
    let t = (0..2).map(|j| complex_partial(f, j, true).map(|u| contract_generator(DZ[j], u, c(-1.0)))).collect();
    sum_terms(f.grid(), t)
}

pub fn del_bar_adjoint(f: &FormField) -> FormField {
    let t = (0..2).map(|j| complex_partial(f, j, false).map(|u| contract_generator(DZBAR[j], u, c(-1.0)))).collect();
    sum_terms(f.grid(), t)
}

/// A⁰'¹ coefficients A(∂_{z̄_j}) for A = i·a, a a real coordinate 1-form.
pub fn connection_01(a: &[f64; 4]) -> [C64; 2] {
    std::array::from_fn(|j| I * 0.5 * C64::new(a[2 * j], a[2 * j + 1]))
}

/// ∂̄_A = ∂̄ + A⁰'¹∧ for the connection A = i·a on N.
pub fn del_bar_twisted(a: &Field<[f64; 4]>, f: &FormField) -> Result<FormField> {
    a.check_same_grid(f)?;
    let twist = f.zip(a, |u, ax| {
        let aj = connection_01(ax);
        add_forms(&wedge_generator(DZBAR[0], u, aj[0]), &wedge_generator(DZBAR[1], u, aj[1]))
    });
    Ok(zip_forms(&del_bar(f), &twist, add_forms))
}

pub fn del_bar_twisted_adjoint(a: &Field<[f64; 4]>, f: &FormField) -> Result<FormField> {
    a.check_same_grid(f)?;
    let twist = f.zip(a, |u, ax| {
        let aj = connection_01(ax);
        add_forms(&contract_generator(DZBAR[0], u, aj[0].conj()), &contract_generator(DZBAR[1], u, aj[1].conj()))
    });
    Ok(zip_forms(&del_bar_adjoint(f), &twist, add_forms))
}

/// Flat L² pairing Re Σ |monomial|² ā_m b_m h⁴.
pub fn form_inner(a: &FormField, b: &FormField) -> Result<f64> {
    a.check_same_grid(b)?;
    let vol = a.grid().cell_volume();
    Ok(vol * a.sum_by(|x, u| (0..16).map(|m| monomial_norm_sq(m) * (u[m].conj() * b.at(x)[m]).re).sum()))
}

pub fn form_norm(a: &FormField) -> f64 {
    form_inner(a, a).expect("same grid").sqrt()
}

/// The (0,2) coefficient of F_A on dz̄₁∧dz̄₂, for A = i·a.
pub fn curvature_02(a: &Field<[f64; 4]>) -> Field<C64> {
    exterior_d1(a).map(|w| I * from_real_two_form(w)[M02])
}

/// l with F_A's ω-component equal to i·l·ω.
pub fn curvature_omega(a: &Field<[f64; 4]>) -> Field<f64> {
    exterior_d1(a).map(|w| 0.5 * (w[0] + w[5]))
}

// ---------------------------------------------------------------------------
// Dolbeault fields

#[derive(Clone, Debug, PartialEq)]
pub struct DolbeaultField {
    pub a00: Field<C64>,
    /// Coefficients on dz̄₁, dz̄₂.
    pub a01: Field<[C64; 2]>,
    /// Coefficient on dz̄₁∧dz̄₂.
    pub a02: Field<C64>,
}

impl DolbeaultField {
    pub fn zeros(grid: Grid) -> Self {
        DolbeaultField { a00: Field::zeros(grid), a01: Field::zeros(grid), a02: Field::zeros(grid) }
    }

    pub fn grid(&self) -> Grid {
        self.a00.grid()
    }

    pub fn to_forms(&self) -> FormField {
        Field::from_fn(self.grid(), |x| {
            let mut u = [ZERO; 16];
            u[0] = *self.a00.at(x);
            u[M01[0]] = self.a01.at(x)[0];
            u[M01[1]] = self.a01.at(x)[1];
            u[M02] = *self.a02.at(x);
            u
        })
    }

    /// Keeps the (0,q) components and drops everything else.
    pub fn from_forms(f: &FormField) -> Self {
        DolbeaultField { a00: f.map(|u| u[0]), a01: f.map(|u| [u[M01[0]], u[M01[1]]]), a02: f.map(|u| u[M02]) }
    }

    pub fn degree_part(&self, degree: usize) -> Result<Self> {
        let mut out = DolbeaultField::zeros(self.grid());
        match degree {
            0 => out.a00 = self.a00.clone(),
            1 => out.a01 = self.a01.clone(),
            2 => out.a02 = self.a02.clone(),
            d => return Err(Error::InvalidDegree(d)),
        }
        Ok(out)
    }

    pub fn add(&self, o: &Self) -> Self {
        DolbeaultField { a00: self.a00.add(&o.a00), a01: self.a01.add(&o.a01), a02: self.a02.add(&o.a02) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> Self {
        DolbeaultField { a00: self.a00.scale(k), a01: self.a01.scale(k), a02: self.a02.scale(k) }
    }

    pub fn inner(&self, o: &Self) -> Result<f64> {
        form_inner(&self.to_forms(), &o.to_forms())
    }

    pub fn norm(&self) -> f64 {
        form_norm(&self.to_forms())
    }
}

/// ∂̄_A from degree `degree` (0 or 1) to the next; other components of `f` are ignored.
pub fn dolbeault(a: &Field<[f64; 4]>, f: &DolbeaultField, degree: usize) -> Result<DolbeaultField> {
    if degree > 1 {
        return Err(Error::InvalidDegree(degree));
    }
    let src = f.degree_part(degree)?.to_forms();
    Ok(DolbeaultField::from_forms(&del_bar_twisted(a, &src)?))
}

/// ∂̄*_A from degree `degree` (1 or 2) to the previous one.
pub fn dolbeault_adjoint(a: &Field<[f64; 4]>, f: &DolbeaultField, degree: usize) -> Result<DolbeaultField> {
    if degree == 0 || degree > 2 {
        return Err(Error::InvalidDegree(degree));
    }
    let src = f.degree_part(degree)?.to_forms();
    Ok(DolbeaultField::from_forms(&del_bar_twisted_adjoint(a, &src)?))
}

/// The abstract spinor U†k, where k lists the orthonormal coefficients of a Dolbeault
/// field on [1, ε₁∧ε₂, ε₁, ε₂], ε_j = dz̄_j/√2.
pub fn to_abstract_spinor(f: &DolbeaultField) -> Spinors {
    let ut = kahler_unitary().adjoint();
    Field::from_fn(f.grid(), |x| {
        let b = f.a01.at(x);
        ut * Vector4::new(*f.a00.at(x), *f.a02.at(x) * 2.0, b[0] * SQRT2, b[1] * SQRT2)
    })
}

pub fn from_abstract_spinor(psi: &Spinors) -> DolbeaultField {
    let u = kahler_unitary();
    let k = psi.map(|p| u * p);
    DolbeaultField {
        a00: k.map(|v| v[0]),
        a01: k.map(|v| [v[2] / SQRT2, v[3] / SQRT2]),
        a02: k.map(|v| v[1] * 0.5),
    }
}

// ---------------------------------------------------------------------------
// Monopole equations in Kähler form

/// Residuals of the monopole equations for (A, α, β) with A = i·a on N, F_K = 0:
/// `dirac` = ∂̄_Aα + ∂̄*_Aβ, `o2` = ᾱβ/2 − 2F⁰'²_A, `omega` = (|α|² − |β|²)/4 − l
/// where 2F¹'¹_A has ω-component i·l·ω.
#[derive(Clone, Debug, PartialEq)]
pub struct KahlerResidual {
    pub dirac: Field<[C64; 2]>,
    pub o2: Field<C64>,
    pub omega: Field<f64>,
}

pub fn kahler_sw_residual(a: &Field<[f64; 4]>, alpha: &Field<C64>, beta: &Field<C64>) -> Result<KahlerResidual> {
    a.check_same_grid(alpha)?;
    a.check_same_grid(beta)?;
    let mut f = DolbeaultField::zeros(a.grid());
    f.a00 = alpha.clone();
    f.a02 = beta.clone();
    let d = dolbeault(a, &f, 0)?.add(&dolbeault_adjoint(a, &f, 2)?);
    let f02 = curvature_02(a);
    let lf = curvature_omega(a);
    let o2 = Field::from_fn(a.grid(), |x| alpha.at(x).conj() * beta.at(x) * 0.5 - f02.at(x) * 2.0);
    let omega = Field::from_fn(a.grid(), |x| {
        (alpha.at(x).norm_sqr() - 4.0 * beta.at(x).norm_sqr()) / 4.0 - 2.0 * lf.at(x)
    });
    Ok(KahlerResidual { dirac: d.a01, o2, omega })
}

// ---------------------------------------------------------------------------
// The kernel system

/// Residuals of the linear system for (χ, μ) ∈ A⁰'¹(N) ⊕ A⁰'²:
/// e1 = 2√2∂̄*μ + ᾱχ, e2 = ∂̄*_Aχ, e3 = √2∂̄_Aχ − μα, e5 = ∂(ᾱχ) − ∂̄(αχ̄).
#[derive(Clone, Debug, PartialEq)]
pub struct KernelEquations {
    pub e1: Field<[C64; 2]>,
    pub e2: Field<C64>,
    pub e3: Field<C64>,
    pub e5: FormField,
}

impl KernelEquations {
    pub fn norm(&self) -> f64 {
        let grid = self.e2.grid();
        let mut f = DolbeaultField::zeros(grid);
        f.a01 = self.e1.clone();
        f.a00 = self.e2.clone();
        f.a02 = self.e3.clone();
        (f.norm().powi(2) + form_norm(&self.e5).powi(2)).sqrt()
    }

    /// Independent real components of e5: Re c₁₁̄, Re c₂₂̄, Re c₁₂̄, Im c₁₂̄ for the
    /// coefficients c_ij̄ on dz_i∧dz̄_j.
    pub fn e5_components(&self) -> Field<[f64; 4]> {
        self.e5.map(|u| {
            let c11 = u[(1 << DZ[0]) | (1 << DZBAR[0])];
            let c22 = u[(1 << DZ[1]) | (1 << DZBAR[1])];
            let c12 = u[(1 << DZ[0]) | (1 << DZBAR[1])];
            [c11.re, c22.re, c12.re, c12.im]
        })
    }
}

fn one_form_01(chi: &Field<[C64; 2]>, weight: &Field<C64>) -> FormField {
    chi.zip(weight, |v, w| {
        let mut u = [ZERO; 16];
        u[M01[0]] = v[0] * w;
        u[M01[1]] = v[1] * w;
        u
    })
}

pub fn kernel_equations(
    a: &Field<[f64; 4]>,
    alpha: &Field<C64>,
    chi: &Field<[C64; 2]>,
    mu: &Field<C64>,
) -> Result<KernelEquations> {
    a.check_same_grid(alpha)?;
    a.check_same_grid(chi)?;
    a.check_same_grid(mu)?;
    let grid = a.grid();
    let alpha_bar = alpha.map(|z| z.conj());
    let achi = one_form_01(chi, &alpha_bar);
    let mut muf = DolbeaultField::zeros(grid);
    muf.a02 = mu.clone();
    let dsmu = DolbeaultField::from_forms(&del_bar_adjoint(&muf.to_forms()));
    let e1 = Field::from_fn(grid, |x| {
        let (d, v) = (dsmu.a01.at(x), achi.at(x));
        [d[0] * (2.0 * SQRT2) + v[M01[0]], d[1] * (2.0 * SQRT2) + v[M01[1]]]
    });
    let mut chif = DolbeaultField::zeros(grid);
    chif.a01 = chi.clone();
    let e2 = dolbeault_adjoint(a, &chif, 1)?.a00;
    let dchi = dolbeault(a, &chif, 1)?.a02;
    let e3 = Field::from_fn(grid, |x| dchi.at(x) * SQRT2 - mu.at(x) * alpha.at(x));
    let e5 = zip_forms(&del(&achi), &del_bar(&achi.map(conj_form)), |p, q| std::array::from_fn(|m| p[m] - q[m]));
    Ok(KernelEquations { e1, e2, e3, e5 })
}

/// Anti-self-dual part of the hermitian-perturbation equation,
/// −i(∂(ᾱχ) − ∂̄(αχ̄)) + 4√2·l·(F_{A_L}⁻/i) with λ = i·l the ω-coefficient of θ and
/// A_L = 2A_N, so the curvature enters as 8√2·l·(da)⁻ for A = i·a on N.
/// The J-hermitian traceless part of the abstract adjoint's s-component corresponds
/// to this form divided by 4√2.
pub fn hermitian_perturbation(
    a: &Field<[f64; 4]>,
    alpha: &Field<C64>,
    chi: &Field<[C64; 2]>,
    l: &Field<f64>,
) -> Result<Field<[f64; 6]>> {
    a.check_same_grid(l)?;
    let eq = kernel_equations(a, alpha, chi, &Field::zeros(a.grid()))?;
    let da = exterior_d1(a);
    Ok(Field::from_fn(a.grid(), |x| {
        let p1 = to_real_two_form(eq.e5.at(x)).map(|z| (z * -I).re);
        let (_, m1) = split_pm(&p1);
        let (_, mf) = split_pm(da.at(x));
        let k = 8.0 * SQRT2 * l.at(x);
        from_pm(&[0.0; 3], &std::array::from_fn(|i| m1[i] + k * mf[i]))
    }))
}

/// Unknowns from a column vector: per point (Re χ₁, Im χ₁, Re χ₂, Im χ₂) for all
/// points, then (Re μ, Im μ) for all points.
pub fn unknowns_from_vector(grid: Grid, v: &[f64]) -> Result<(Field<[C64; 2]>, Field<C64>)> {
    let n = grid.len();
    if v.len() != 6 * n {
        return Err(Error::ShapeMismatch(format!("vector of length {} for {} points", v.len(), n)));
    }
    let chi = Field::from_fn(grid, |x| [C64::new(v[4 * x], v[4 * x + 1]), C64::new(v[4 * x + 2], v[4 * x + 3])]);
    let mu = Field::from_fn(grid, |x| C64::new(v[4 * n + 2 * x], v[4 * n + 2 * x + 1]));
    Ok((chi, mu))
}

/// Rows in the same layout: e1 (4 per point), e2 (2), e3 (2), e5 (4), each block in lattice order.
pub fn equations_to_vector(e: &KernelEquations) -> Vec<f64> {
    let mut out = Vec::with_capacity(12 * e.e2.grid().len());
    for v in e.e1.values() {
        out.extend([v[0].re, v[0].im, v[1].re, v[1].im]);
    }
    for z in e.e2.values().iter().chain(e.e3.values()) {
        out.extend([z.re, z.im]);
    }
    for r in e.e5_components().values() {
        out.extend(r);
    }
    out
}

/// Upper bound on the number of entries of a dense assembled operator.
pub const MAX_DENSE_ENTRIES: usize = 20_000_000;

/// Dense real matrix of the kernel system, 12 rows and 6 columns per lattice point.
pub fn assemble_kernel_operator(a: &Field<[f64; 4]>, alpha: &Field<C64>) -> Result<DMatrix<f64>> {
    a.check_same_grid(alpha)?;
    let grid = a.grid();
    let (rows, cols) = (12 * grid.len(), 6 * grid.len());
    if rows * cols > MAX_DENSE_ENTRIES {
        return Err(Error::TooLarge(rows * cols, MAX_DENSE_ENTRIES));
    }
    let columns: Vec<Vec<f64>> = (0..cols)
        .into_par_iter()
        .map(|k| {
            let mut v = vec![0.0; cols];
            v[k] = 1.0;
            let (chi, mu) = unknowns_from_vector(grid, &v)?;
            Ok(equations_to_vector(&kernel_equations(a, alpha, &chi, &mu)?))
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(rows, cols, |i, j| columns[j][i]))
}

/// Minimum ratio between the smallest uncounted and largest counted singular value.
pub const MIN_GAP: f64 = 1e3;

#[derive(Clone, Debug, PartialEq)]
pub struct KernelReport {
    pub dimension: usize,
    pub sigma_max: f64,
    /// Largest singular value counted as zero, or the rounding floor ε·max(m,n)·σ_max
    /// when none is counted.
    pub largest_counted: f64,
    pub smallest_uncounted: f64,
    pub gap: f64,
    pub determinate: bool,
    /// Ascending.
    pub singular_values: Vec<f64>,
}

impl KernelReport {
    pub fn require(&self) -> Result<usize> {
        if self.determinate {
            Ok(self.dimension)
        } else {
            Err(Error::Indeterminate(self.gap))
        }
    }
}

/// Numerical kernel dimension: singular values below `tol`·σ_max count as zero, and a
/// wide matrix contributes its excess columns.
pub fn kernel_dimension(m: &DMatrix<f64>, tol: f64) -> KernelReport {
    let (r, k) = m.shape();
    let mut sv: Vec<f64> = if r.min(k) == 0 { Vec::new() } else { m.clone().svd(false, false).singular_values.iter().copied().collect() };
    sv.sort_by(f64::total_cmp);
    let sigma_max = sv.last().copied().unwrap_or(0.0);
    let threshold = tol * sigma_max;
    let counted: Vec<f64> = sv.iter().copied().filter(|&s| s < threshold || sigma_max == 0.0).collect();
    let rank = sv.len() - counted.len();
    let floor = f64::EPSILON * r.max(k) as f64 * sigma_max;
    let largest_counted = counted.last().copied().unwrap_or(0.0).max(floor);
    let smallest_uncounted = sv.get(counted.len()).copied().unwrap_or(f64::INFINITY);
    let gap = if rank == 0 { f64::INFINITY } else { smallest_uncounted / largest_counted };
    KernelReport {
        dimension: k - rank,
        sigma_max,
        largest_counted,
        smallest_uncounted,
        gap,
        determinate: gap >= MIN_GAP,
        singular_values: sv,
    }
}

/// The `count` right singular vectors with the smallest singular values, ascending.
pub fn near_kernel_vectors(m: &DMatrix<f64>, count: usize) -> Vec<(f64, Vec<f64>)> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    idx.into_iter().take(count).map(|i| (svd.singular_values[i], v_t.row(i).iter().copied().collect())).collect()
}

/// Quantities along the vanishing argument for a candidate (χ, μ).
#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    pub residual: f64,
    pub laplace_alpha_chi: f64,
    pub dbar_alpha_chi: f64,
    pub dbar_star_mu: f64,
    pub alpha_chi: f64,
    pub chi: f64,
    pub mu: f64,
}

pub fn vanishing_chain(
    a: &Field<[f64; 4]>,
    alpha: &Field<C64>,
    chi: &Field<[C64; 2]>,
    mu: &Field<C64>,
) -> Result<ChainReport> {
    let eq = kernel_equations(a, alpha, chi, mu)?;
    let achi = one_form_01(chi, &alpha.map(|z| z.conj()));
    let lap = zip_forms(&del(&del_adjoint(&achi)), &del_adjoint(&del(&achi)), add_forms);
    let mut muf = DolbeaultField::zeros(a.grid());
    muf.a02 = mu.clone();
    let mut chif = DolbeaultField::zeros(a.grid());
    chif.a01 = chi.clone();
    Ok(ChainReport {
        residual: eq.norm(),
        laplace_alpha_chi: form_norm(&lap),
        dbar_alpha_chi: form_norm(&del_bar(&achi)),
        dbar_star_mu: form_norm(&del_bar_adjoint(&muf.to_forms())),
        alpha_chi: form_norm(&achi),
        chi: chif.norm(),
        mu: muf.norm(),
    })
}
