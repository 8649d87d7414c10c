//! Pointwise tensor algebra on an oriented 4-dimensional inner-product space.
//!
//! Metrics and symmetric endomorphisms are plain 4×4 matrices in coordinates.
//! 2-forms are 6-vectors on e12, e13, e14, e23, e24, e34 (see `consts::PAIRS`).

use nalgebra::{Matrix3, Matrix4, SymmetricEigen};

use crate::consts::{ANTISELFDUAL_BASIS, PAIRS, SELFDUAL_BASIS};
use crate::error::{Error, Result};

pub type MetricValue = Matrix4<f64>;
pub type SymEndoValue = Matrix4<f64>;
pub type TwoFormValue = [f64; 6];

/// Which coframe the 2-form coefficients refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coframe {
    /// dx¹, …, dx⁴; the metric enters the Hodge star.
    Coordinate,
    /// A g-orthonormal oriented coframe; the Hodge star is the flat one.
    Orthonormal,
}

pub fn check_spd(g: &MetricValue) -> Result<()> {
    let asym = (g - g.transpose()).amax();
    if asym > 1e-10 * g.amax().max(1.0) {
        return Err(Error::NotPositiveDefinite);
    }
    if g.cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}

pub fn to_matrix(w: &TwoFormValue) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        m[(a, b)] = w[k];
        m[(b, a)] = -w[k];
    }
    m
}

pub fn from_matrix(m: &Matrix4<f64>) -> TwoFormValue {
    PAIRS.map(|(a, b)| 0.5 * (m[(a, b)] - m[(b, a)]))
}

/// Levi-Civita symbol on 0-based indices.
pub fn levi_civita(i: usize, j: usize, k: usize, l: usize) -> f64 {
    let p = [i, j, k, l];
    for a in 0..4 {
        for b in a + 1..4 {
            if p[a] == p[b] {
                return 0.0;
            }
        }
    }
    let mut sign = 1.0;
    for a in 0..4 {
        for b in a + 1..4 {
            if p[a] > p[b] {
                sign = -sign;
            }
        }
    }
    sign
}

fn flat_star(w: &TwoFormValue) -> TwoFormValue {
    // *e12 = e34, *e13 = −e24, *e14 = e23 and the converse relations.
    [w[5], -w[4], w[3], w[2], -w[1], w[0]]
}

pub fn hodge_star(g: &MetricValue, w: &TwoFormValue, coframe: Coframe) -> Result<TwoFormValue> {
    check_spd(g)?;
    if coframe == Coframe::Orthonormal {
        return Ok(flat_star(w));
    }
    let gi = g.try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let up = gi * to_matrix(w) * gi;
    let sq = g.determinant().sqrt();
    let mut out = [0.0; 6];
    for (n, &(k, l)) in PAIRS.iter().enumerate() {
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                acc += levi_civita(i, j, k, l) * up[(i, j)];
            }
        }
        out[n] = 0.5 * sq * acc;
    }
    Ok(out)
}

/// P⁺ = (1 + *)/2 for the coordinate coframe.
pub fn selfdual_project(g: &MetricValue, w: &TwoFormValue) -> Result<TwoFormValue> {
    let s = hodge_star(g, w, Coframe::Coordinate)?;
    Ok(std::array::from_fn(|k| 0.5 * (w[k] + s[k])))
}

pub fn antiselfdual_project(g: &MetricValue, w: &TwoFormValue) -> Result<TwoFormValue> {
    let s = hodge_star(g, w, Coframe::Coordinate)?;
    Ok(std::array::from_fn(|k| 0.5 * (w[k] - s[k])))
}

/// Degree-0 derivation extending s* (s*a = a∘s) to 2-forms: W ↦ sᵀW + Ws.
pub fn i_derivation(s: &SymEndoValue, w: &TwoFormValue) -> TwoFormValue {
    let m = to_matrix(w);
    from_matrix(&(s.transpose() * m + m * s))
}

/// Scalar by which the Λ²₊ → Λ²₊ block of i(s*) acts: tr(s)/2.
pub fn scalar_block_factor(s: &SymEndoValue) -> f64 {
    crate::consts::KAPPA * s.trace()
}

pub fn spd_sqrt(g: &MetricValue) -> Result<Matrix4<f64>> {
    check_spd(g)?;
    let eig = SymmetricEigen::new(*g);
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let d = Matrix4::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let r = eig.eigenvectors * d * eig.eigenvectors.transpose();
    Ok(0.5 * (r + r.transpose()))
}

pub fn spd_inv_sqrt(g: &MetricValue) -> Result<Matrix4<f64>> {
    check_spd(g)?;
    let eig = SymmetricEigen::new(*g);
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let d = Matrix4::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let r = eig.eigenvectors * d * eig.eigenvectors.transpose();
    Ok(0.5 * (r + r.transpose()))
}

/// E = R·P with R ∈ SO(g) and P g-symmetric positive definite.
pub fn polar_decompose(e: &Matrix4<f64>, g: &MetricValue) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
    if e.determinant() <= 0.0 {
        return Err(Error::Singular);
    }
    let b = spd_sqrt(g)?;
    let bi = b.try_inverse().ok_or(Error::Singular)?;
    let et = b * e * bi;
    let pt = spd_sqrt(&(et.transpose() * et))?;
    let rt = et * pt.try_inverse().ok_or(Error::Singular)?;
    Ok((bi * rt * b, bi * pt * b))
}

/// (s, t) = 2 tr(st) on symmetric endomorphisms.
pub fn sym_inner(s: &SymEndoValue, t: &SymEndoValue) -> f64 {
    2.0 * (s * t).trace()
}

/// (u, v) = ½ tr(uvᵀ) on Hom(Λ²∓, Λ²±) in orthonormal bases.
pub fn hom_lambda_inner(u: &Matrix3<f64>, v: &Matrix3<f64>) -> f64 {
    0.5 * (u * v.transpose()).trace()
}

/// Orthonormal basis (for the 2 tr pairing) of symmetric matrices: 4 diagonal then 6 off-diagonal.
pub fn sym_basis() -> [Matrix4<f64>; 10] {
    let mut out = [Matrix4::zeros(); 10];
    for a in 0..4 {
        out[a][(a, a)] = std::f64::consts::FRAC_1_SQRT_2;
    }
    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        out[4 + k][(a, b)] = 0.5;
        out[4 + k][(b, a)] = 0.5;
    }
    out
}

fn dot6(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Components of a 2-form in the orthonormal bases of Λ²₊ and Λ²₋ (flat star).
pub fn split_pm(w: &TwoFormValue) -> ([f64; 3], [f64; 3]) {
    (SELFDUAL_BASIS.map(|b| dot6(&b, w)), ANTISELFDUAL_BASIS.map(|b| dot6(&b, w)))
}

pub fn from_pm(p: &[f64; 3], m: &[f64; 3]) -> TwoFormValue {
    let mut w = [0.0; 6];
    for i in 0..3 {
        for k in 0..6 {
            w[k] += p[i] * SELFDUAL_BASIS[i][k] + m[i] * ANTISELFDUAL_BASIS[i][k];
        }
    }
    w
}

/// δ₋ in an orthonormal frame: P⁺∘i(s₀*) restricted to Λ²₋, as the 3×3 matrix
/// from the anti-self-dual to the self-dual orthonormal basis. No trace check.
pub fn delta_minus_frame(s0: &Matrix4<f64>) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for j in 0..3 {
        let img = i_derivation(s0, &ANTISELFDUAL_BASIS[j]);
        for i in 0..3 {
            m[(i, j)] = dot6(&SELFDUAL_BASIS[i], &img);
        }
    }
    m
}

/// δ₋(s₀) for a traceless g-symmetric s₀ given in coordinates, in g-orthonormal
/// bases of Λ²± built from the frame g^{-1/2}.
pub fn delta_minus(g: &MetricValue, s0: &SymEndoValue) -> Result<Matrix3<f64>> {
    let tr = s0.trace();
    if tr.abs() > 1e-10 * s0.amax().max(1.0) {
        return Err(Error::NonzeroTrace(tr));
    }
    let e = spd_inv_sqrt(g)?;
    let ei = spd_sqrt(g)?;
    Ok(delta_minus_frame(&(ei * s0 * e)))
}

/// Ω(h, k) = −¼[g⁻¹h, g⁻¹k], the curvature of the natural connection on frames over metrics.
pub fn xi_curvature(g: &MetricValue, h: &Matrix4<f64>, k: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    check_spd(g)?;
    let gi = g.try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let a = gi * h;
    let b = gi * k;
    Ok(-0.25 * (a * b - b * a))
}

/// Steps per loop edge for the holonomy oracle.
pub const HOLONOMY_STEPS: usize = 64;

/// RK4 transport of the frame E along the straight metric segment g0 → g0 + d,
/// solving Ė = −½ g_t⁻¹ ġ_t E.
pub fn transport_segment(g0: &MetricValue, d: &Matrix4<f64>, e: &Matrix4<f64>, steps: usize) -> Result<Matrix4<f64>> {
    let rhs = |t: f64, e: &Matrix4<f64>| -> Result<Matrix4<f64>> {
        let gt = g0 + d * t;
        let gi = gt.cholesky().ok_or(Error::LeftSpdCone(t))?.inverse();
        Ok(-0.5 * gi * d * e)
    };
    let dt = 1.0 / steps as f64;
    let mut e = *e;
    for n in 0..steps {
        let t = n as f64 * dt;
        let k1 = rhs(t, &e)?;
        let k2 = rhs(t + 0.5 * dt, &(e + k1 * (0.5 * dt)))?;
        let k3 = rhs(t + 0.5 * dt, &(e + k2 * (0.5 * dt)))?;
        let k4 = rhs(t + dt, &(e + k3 * dt))?;
        e += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0);
    }
    Ok(e)
}

/// Holonomy of the square loop g → g+εh → g+εh+εk → g+εk → g, rescaled by ε⁻²:
/// (Id − E_loop)/ε². With this orientation it converges to `xi_curvature(g, h, k)`
/// at first order in ε.
pub fn xi_holonomy_oracle(g: &MetricValue, h: &Matrix4<f64>, k: &Matrix4<f64>, eps: f64) -> Result<Matrix4<f64>> {
    check_spd(g)?;
    let id = Matrix4::identity();
    let n = HOLONOMY_STEPS;
    let (dh, dk) = (h * eps, k * eps);
    let mut e = transport_segment(g, &dh, &id, n)?;
    e = transport_segment(&(g + dh), &dk, &e, n)?;
    e = transport_segment(&(g + dh + dk), &(-dh), &e, n)?;
    e = transport_segment(&(g + dk), &(-dk), &e, n)?;
    Ok((id - e) / (eps * eps))
}
