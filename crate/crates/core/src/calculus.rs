//! Finite-difference calculus on the periodic lattice.
//!
//! Derivatives are central differences, so every constant-coefficient first-order
//! operator is exactly skew-adjoint for the unweighted lattice sum and all partials
//! commute. Axes are 0-based. Tensor conventions:
//! - 1-forms are coordinate components `[f64; 4]`;
//! - 2-forms are `[f64; 6]` on dx^i∧dx^j in `consts::PAIRS` order;
//! - symmetric endomorphisms are coordinate matrices S with G·S symmetric;
//! - rank-3 objects are `[f64; 64]` indexed `i*16 + j*4 + k`.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64 as C64;

use crate::consts::PAIRS;
use crate::error::{Error, Result};
use crate::field::{Field, Grid, Value};
use crate::metric::{check_spd, spd_inv_sqrt};

pub type Rank3 = [f64; 64];

#[inline]
pub fn r3(i: usize, j: usize, k: usize) -> usize {
    i * 16 + j * 4 + k
}

/// (f(x + h e_axis) − f(x − h e_axis)) / 2h with periodic wrap.
pub fn partial_derivative<V: Value>(f: &Field<V>, axis: usize) -> Field<V> {
    let grid = f.grid();
    let inv = 0.5 / grid.spacing();
    Field::from_fn(grid, |idx| {
        let p = f.at(grid.shift(idx, axis, 1));
        let m = f.at(grid.shift(idx, axis, -1));
        p.sub(m).scale(inv)
    })
}

pub fn partials<V: Value>(f: &Field<V>) -> [Field<V>; 4] {
    std::array::from_fn(|a| partial_derivative(f, a))
}

pub fn gradient(f: &Field<f64>) -> Field<[f64; 4]> {
    let d = partials(f);
    Field::from_fn(f.grid(), |i| std::array::from_fn(|a| *d[a].at(i)))
}

/// (dA)_{ij} = ∂_i A_j − ∂_j A_i.
pub fn exterior_d1(a: &Field<[f64; 4]>) -> Field<[f64; 6]> {
    let d = partials(a);
    Field::from_fn(a.grid(), |x| PAIRS.map(|(i, j)| d[i].at(x)[j] - d[j].at(x)[i]))
}

/// Exterior derivative of a 2-form, as the 3-form components on
/// dx⁰¹², dx⁰¹³, dx⁰²³, dx¹²³ (0-based triples).
pub fn exterior_d2(w: &Field<[f64; 6]>) -> Field<[f64; 4]> {
    let d = partials(w);
    let pair = |i: usize, j: usize| PAIRS.iter().position(|&p| p == (i, j)).expect("ordered pair");
    let triples = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)];
    Field::from_fn(w.grid(), |x| {
        triples.map(|(i, j, k)| d[i].at(x)[pair(j, k)] - d[j].at(x)[pair(i, k)] + d[k].at(x)[pair(i, j)])
    })
}

pub fn flat_metric(grid: Grid) -> Field<Matrix4<f64>> {
    Field::constant(grid, Matrix4::identity())
}

pub fn check_metric(g: &Field<Matrix4<f64>>) -> Result<()> {
    g.values().iter().try_for_each(check_spd)
}

pub fn inverse_metric(g: &Field<Matrix4<f64>>) -> Result<Field<Matrix4<f64>>> {
    check_metric(g)?;
    Ok(g.map(|m| m.try_inverse().expect("checked positive definite")))
}

/// Pointwise inner product used by `l2_inner`; metric-dependent where the tensor type requires it.
pub trait PointInner: Value {
    fn inner(&self, o: &Self, g: &Matrix4<f64>) -> f64;
}

impl PointInner for f64 {
    fn inner(&self, o: &Self, _: &Matrix4<f64>) -> f64 {
        self * o
    }
}

impl PointInner for C64 {
    fn inner(&self, o: &Self, _: &Matrix4<f64>) -> f64 {
        (self.conj() * o).re
    }
}

/// Coordinate 1-form: aᵀ g⁻¹ b.
impl PointInner for [f64; 4] {
    fn inner(&self, o: &Self, g: &Matrix4<f64>) -> f64 {
        let gi = g.try_inverse().expect("positive definite metric");
        let (a, b) = (Vector4::from(*self), Vector4::from(*o));
        a.dot(&(gi * b))
    }
}

/// Coordinate 2-form with ‖dx^i∧dx^j‖ = 1 for orthonormal coordinates.
impl PointInner for [f64; 6] {
    fn inner(&self, o: &Self, g: &Matrix4<f64>) -> f64 {
        let gi = g.try_inverse().expect("positive definite metric");
        let a = crate::metric::to_matrix(self);
        let b = crate::metric::to_matrix(o);
        0.5 * (gi * a * gi * b.transpose()).trace()
    }
}

/// Components in an orthonormal basis (self-dual forms in a frame).
impl PointInner for [f64; 3] {
    fn inner(&self, o: &Self, _: &Matrix4<f64>) -> f64 {
        self.iter().zip(o).map(|(x, y)| x * y).sum()
    }
}

impl PointInner for Vector4<C64> {
    fn inner(&self, o: &Self, _: &Matrix4<f64>) -> f64 {
        self.dotc(o).re
    }
}

impl PointInner for Vector2<C64> {
    fn inner(&self, o: &Self, _: &Matrix4<f64>) -> f64 {
        self.dotc(o).re
    }
}

/// ¼ Re tr(AB†), the metric on i·su(W₊).
impl PointInner for Matrix2<C64> {
    fn inner(&self, o: &Self, _: &Matrix4<f64>) -> f64 {
        crate::clifford::half_endo_inner(self, o)
    }
}

/// Symmetric endomorphisms: 2 tr(ST).
impl PointInner for Matrix4<f64> {
    fn inner(&self, o: &Self, _: &Matrix4<f64>) -> f64 {
        2.0 * (self * o).trace()
    }
}

/// Σ_x ⟨a, b⟩_x √det g(x) · h⁴, summed in a fixed order.
pub fn l2_inner<V: PointInner>(a: &Field<V>, b: &Field<V>, g: &Field<Matrix4<f64>>) -> Result<f64> {
    a.check_same_grid(b)?;
    a.check_same_grid(g)?;
    let vol = a.grid().cell_volume();
    Ok(a.sum_by(|i, v| {
        let gi = g.at(i);
        v.inner(b.at(i), gi) * gi.determinant().sqrt()
    }) * vol)
}

pub fn l2_norm<V: PointInner>(a: &Field<V>, g: &Field<Matrix4<f64>>) -> Result<f64> {
    Ok(l2_inner(a, a, g)?.max(0.0).sqrt())
}

/// Γᵏᵢⱼ = ½ gᵏˡ(∂ᵢg_jl + ∂ⱼg_il − ∂ˡg_ij), stored at `r3(k, i, j)`.
pub fn christoffel(g: &Field<Matrix4<f64>>) -> Result<Field<Rank3>> {
    let gi = inverse_metric(g)?;
    let d = partials(g);
    Ok(Field::from_fn(g.grid(), |x| {
        let mut lower = [0.0; 64];
        for l in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    lower[r3(l, i, j)] = 0.5 * (d[i].at(x)[(j, l)] + d[j].at(x)[(i, l)] - d[l].at(x)[(i, j)]);
                }
            }
        }
        let inv = gi.at(x);
        let mut out = [0.0; 64];
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    out[r3(k, i, j)] = (0..4).map(|l| inv[(k, l)] * lower[r3(l, i, j)]).sum();
                }
            }
        }
        out
    }))
}

/// ∇_i b_jl for a covariant 2-tensor field b, stored at `r3(i, j, l)`.
pub fn covariant_2tensor(b: &Field<Matrix4<f64>>, gamma: &Field<Rank3>) -> Field<Rank3> {
    let d = partials(b);
    Field::from_fn(b.grid(), |x| {
        let (bx, gx) = (b.at(x), gamma.at(x));
        let mut out = [0.0; 64];
        for i in 0..4 {
            for j in 0..4 {
                for l in 0..4 {
                    let mut v = d[i].at(x)[(j, l)];
                    for m in 0..4 {
                        v -= gx[r3(m, i, j)] * bx[(m, l)] + gx[r3(m, i, l)] * bx[(j, m)];
                    }
                    out[r3(i, j, l)] = v;
                }
            }
        }
        out
    })
}

/// ∇_i a_j for a 1-form field, as a matrix (i, j).
pub fn covariant_1form(a: &Field<[f64; 4]>, gamma: &Field<Rank3>) -> Field<Matrix4<f64>> {
    let d = partials(a);
    Field::from_fn(a.grid(), |x| {
        let (ax, gx) = (a.at(x), gamma.at(x));
        Matrix4::from_fn(|i, j| d[i].at(x)[j] - (0..4).map(|m| gx[r3(m, i, j)] * ax[m]).sum::<f64>())
    })
}

/// s♭ = G·S, the covariant 2-tensor g(s·, ·) of a symmetric endomorphism.
pub fn lower_sym(g: &Field<Matrix4<f64>>, s: &Field<Matrix4<f64>>) -> Field<Matrix4<f64>> {
    g.zip(s, |g, s| {
        let b = g * s;
        0.5 * (b + b.transpose())
    })
}

/// ∇s♭ at `r3(i, j, l)` = (∇_i s♭)_jl.
pub fn covariant_sym(g: &Field<Matrix4<f64>>, s: &Field<Matrix4<f64>>) -> Result<Field<Rank3>> {
    let gamma = christoffel(g)?;
    Ok(covariant_2tensor(&lower_sym(g, s), &gamma))
}

/// Variation of the Levi-Civita connection along s, as ∇̇ᵏᵢⱼ at `r3(k, i, j)`:
/// g(∇̇_X Y, Z) = ∇_X s♭(Y, Z) − ∇_Z s♭(Y, X) + ∇_Y s♭(Z, X).
/// Written with s♭ = G·S the formula is the exact t-derivative of the discrete
/// Christoffel symbols along g_t = (1 + tS)*g.
pub fn lc_variation(g: &Field<Matrix4<f64>>, s: &Field<Matrix4<f64>>) -> Result<Field<Rank3>> {
    let ds = covariant_sym(g, s)?;
    let gi = inverse_metric(g)?;
    Ok(Field::from_fn(g.grid(), |x| {
        let t = ds.at(x);
        let inv = gi.at(x);
        let mut out = [0.0; 64];
        for i in 0..4 {
            for j in 0..4 {
                let low: [f64; 4] = std::array::from_fn(|l| t[r3(i, j, l)] - t[r3(l, j, i)] + t[r3(j, l, i)]);
                for k in 0..4 {
                    out[r3(k, i, j)] = (0..4).map(|l| inv[(k, l)] * low[l]).sum();
                }
            }
        }
        out
    }))
}

/// Frame components T_abc = ∇_{e_a} s♭(e_b, e_c) for the frame field `frame` (columns e_a).
pub fn frame_covariant_sym(
    g: &Field<Matrix4<f64>>,
    s: &Field<Matrix4<f64>>,
    frame: &Field<Matrix4<f64>>,
) -> Result<Field<Rank3>> {
    let ds = covariant_sym(g, s)?;
    Ok(ds.zip(frame, |t, e| to_frame3(t, e)))
}

/// Contracts all three slots of a covariant rank-3 tensor with the frame columns.
pub fn to_frame3(t: &Rank3, e: &Matrix4<f64>) -> Rank3 {
    let mut s1 = [0.0; 64];
    for a in 0..4 {
        for j in 0..4 {
            for l in 0..4 {
                s1[r3(a, j, l)] = (0..4).map(|i| e[(i, a)] * t[r3(i, j, l)]).sum();
            }
        }
    }
    let mut s2 = [0.0; 64];
    for a in 0..4 {
        for b in 0..4 {
            for l in 0..4 {
                s2[r3(a, b, l)] = (0..4).map(|j| e[(j, b)] * s1[r3(a, j, l)]).sum();
            }
        }
    }
    let mut out = [0.0; 64];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                out[r3(a, b, c)] = (0..4).map(|l| e[(l, c)] * s2[r3(a, b, l)]).sum();
            }
        }
    }
    out
}

/// ω̇ = ∇̇(s) − ∇s in frame components at `r3(i, j, k)`: ω̇ᵏᵢⱼ = cⁱⱼₖ − cⁱₖⱼ with
/// cᵏᵢⱼ = g((∇_{e_i}s)e_j, e_k). Skew in (j, k). Uses the frame g^{-1/2}.
pub fn omega_dot(g: &Field<Matrix4<f64>>, s: &Field<Matrix4<f64>>) -> Result<Field<Rank3>> {
    let frame = canonical_frame(g)?;
    omega_dot_frame(g, s, &frame)
}

pub fn omega_dot_frame(
    g: &Field<Matrix4<f64>>,
    s: &Field<Matrix4<f64>>,
    frame: &Field<Matrix4<f64>>,
) -> Result<Field<Rank3>> {
    let t = frame_covariant_sym(g, s, frame)?;
    Ok(t.map(|t| {
        let mut out = [0.0; 64];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    out[r3(i, j, k)] = t[r3(j, k, i)] - t[r3(k, j, i)];
                }
            }
        }
        out
    }))
}

pub fn canonical_frame(g: &Field<Matrix4<f64>>) -> Result<Field<Matrix4<f64>>> {
    check_metric(g)?;
    Ok(g.map(|m| spd_inv_sqrt(m).expect("checked positive definite")))
}

/// (div s)_l = gⁱʲ ∇_i s♭_jl, a coordinate 1-form.
pub fn divergence(g: &Field<Matrix4<f64>>, s: &Field<Matrix4<f64>>) -> Result<Field<[f64; 4]>> {
    let ds = covariant_sym(g, s)?;
    let gi = inverse_metric(g)?;
    Ok(ds.zip(&gi, |t, inv| {
        std::array::from_fn(|l| {
            let mut v = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    v += inv[(i, j)] * t[r3(i, j, l)];
                }
            }
            v
        })
    }))
}

pub fn trace_field(s: &Field<Matrix4<f64>>) -> Field<f64> {
    s.map(|m| m.trace())
}

/// d(tr s).
pub fn d_trace(g: &Field<Matrix4<f64>>, s: &Field<Matrix4<f64>>) -> Result<Field<[f64; 4]>> {
    g.check_same_grid(s)?;
    Ok(gradient(&trace_field(s)))
}

/// X♭ = G·X for a vector field with coordinate components X^i.
pub fn flat_of(g: &Field<Matrix4<f64>>, x: &Field<[f64; 4]>) -> Field<[f64; 4]> {
    g.zip(x, |g, v| (g * Vector4::from(*v)).into())
}

/// X♯ = G⁻¹·X for a 1-form.
pub fn sharp_of(g: &Field<Matrix4<f64>>, a: &Field<[f64; 4]>) -> Result<Field<[f64; 4]>> {
    let gi = inverse_metric(g)?;
    Ok(gi.zip(a, |gi, v| (gi * Vector4::from(*v)).into()))
}

/// L_X g = 2 sym ∇X♭, returned as the symmetric endomorphism G⁻¹(L_X g).
pub fn lie_metric(g: &Field<Matrix4<f64>>, x: &Field<[f64; 4]>) -> Result<Field<Matrix4<f64>>> {
    let gamma = christoffel(g)?;
    let gi = inverse_metric(g)?;
    let nx = covariant_1form(&flat_of(g, x), &gamma);
    Ok(nx.zip(&gi, |n, inv| inv * (n + n.transpose())))
}

/// div X = gⁱʲ ∇_i X♭_j, consistent with `lie_metric` so that tr L_X g = 2 div X.
pub fn div_vector(g: &Field<Matrix4<f64>>, x: &Field<[f64; 4]>) -> Result<Field<f64>> {
    let gamma = christoffel(g)?;
    let gi = inverse_metric(g)?;
    let nx = covariant_1form(&flat_of(g, x), &gamma);
    Ok(nx.zip(&gi, |n, inv| (inv * n).trace()))
}

/// (1/√g) ∂_i(√g Xⁱ). Minus the exact lattice transpose of `gradient` for the
/// √g-weighted pairing; agrees with `div_vector` up to O(h²).
pub fn div_conservative(g: &Field<Matrix4<f64>>, x: &Field<[f64; 4]>) -> Result<Field<f64>> {
    check_metric(g)?;
    g.check_same_grid(x)?;
    let dens = g.zip(x, |g, v| {
        let sq = g.determinant().sqrt();
        v.map(|c| c * sq)
    });
    let d = partials(&dens);
    Ok(Field::from_fn(g.grid(), |i| {
        let acc: f64 = (0..4).map(|a| d[a].at(i)[a]).sum();
        acc / g.at(i).determinant().sqrt()
    }))
}

/// ∇_i g_jl, which vanishes up to O(h²) for the discrete Christoffel symbols.
pub fn metricity_defect(g: &Field<Matrix4<f64>>) -> Result<Field<Rank3>> {
    let gamma = christoffel(g)?;
    Ok(covariant_2tensor(g, &gamma))
}

/// Symmetric endomorphism field check: G·S symmetric at every point.
pub fn check_sym(g: &Field<Matrix4<f64>>, s: &Field<Matrix4<f64>>, tol: f64) -> Result<()> {
    g.check_same_grid(s)?;
    for (gx, sx) in g.values().iter().zip(s.values()) {
        let b = gx * sx;
        if (b - b.transpose()).amax() > tol * b.amax().max(1.0) {
            return Err(Error::ShapeMismatch("endomorphism not symmetric for the metric".into()));
        }
    }
    Ok(())
}
