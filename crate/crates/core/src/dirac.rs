//! Spin^c structures as frame fields, the spin connection, the twisted Dirac
//! operator and its variation along horizontal metric directions.
//!
//! A structure ξ is a field of frames E (columns e_a in coordinates) declared
//! orthonormal, so g_ξ = (EEᵀ)⁻¹. Spinor fields live in the fixed space ℂ⁴ at each
//! point; the metric enters only through the frame, the spin coefficients and the
//! coframe used for Clifford multiplication. A connection on the determinant line
//! is A = i·a with `a` a real coordinate 1-form, and the spinor connection carries ½A.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;

use crate::calculus::{christoffel, divergence, d_trace, exterior_d1, partials, r3, Rank3};
use crate::clifford::{gammas, rho_two, SpinorEndo};
use crate::consts::PAIRS;
use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::metric::{check_spd, spd_inv_sqrt};

pub type Spinors = Field<Vector4<C64>>;

#[derive(Clone, Debug, PartialEq)]
pub struct SpincStructure {
    frames: Field<Matrix4<f64>>,
}

impl SpincStructure {
    pub fn new(frames: Field<Matrix4<f64>>) -> Result<Self> {
        if frames.values().iter().any(|e| e.determinant() <= 0.0) {
            return Err(Error::Singular);
        }
        Ok(SpincStructure { frames })
    }

    pub fn identity(grid: Grid) -> Self {
        SpincStructure { frames: Field::constant(grid, Matrix4::identity()) }
    }

    pub fn grid(&self) -> Grid {
        self.frames.grid()
    }

    pub fn frames(&self) -> &Field<Matrix4<f64>> {
        &self.frames
    }

    /// Coframe matrices E⁻¹; row a is θ^a in coordinates.
    pub fn coframes(&self) -> Field<Matrix4<f64>> {
        self.frames.map(|e| e.try_inverse().expect("frame with positive determinant"))
    }
}

/// g_ξ = (EEᵀ)⁻¹.
pub fn frame_to_metric(xi: &SpincStructure) -> Field<Matrix4<f64>> {
    xi.frames.map(|e| {
        let m = (e * e.transpose()).try_inverse().expect("frame with positive determinant");
        0.5 * (m + m.transpose())
    })
}

/// The canonical frame E = g^{-1/2}.
pub fn metric_to_frame(g: &Field<Matrix4<f64>>) -> Result<SpincStructure> {
    g.values().iter().try_for_each(check_spd)?;
    Ok(SpincStructure { frames: g.map(|m| spd_inv_sqrt(m).expect("checked positive definite")) })
}

/// ω_abc = g(∇_{e_a} e_b, e_c) at `r3(a, b, c)`, skew-symmetrized in (b, c).
pub fn spin_connection_coeffs(xi: &SpincStructure) -> Result<Field<Rank3>> {
    let g = frame_to_metric(xi);
    let gamma = christoffel(&g)?;
    let de = partials(&xi.frames);
    Ok(Field::from_fn(xi.grid(), |x| {
        let e = xi.frames.at(x);
        let theta = g.at(x) * e; // column c is θ^c
        let gx = gamma.at(x);
        let mut raw = [0.0; 64];
        for a in 0..4 {
            for b in 0..4 {
                // ∇_{e_a} e_b in coordinates
                let mut v = [0.0; 4];
                for mu in 0..4 {
                    let mut acc = 0.0;
                    for lam in 0..4 {
                        acc += e[(lam, a)] * de[lam].at(x)[(mu, b)];
                        for nu in 0..4 {
                            acc += e[(lam, a)] * gx[r3(mu, lam, nu)] * e[(nu, b)];
                        }
                    }
                    v[mu] = acc;
                }
                for c in 0..4 {
                    raw[r3(a, b, c)] = (0..4).map(|mu| theta[(mu, c)] * v[mu]).sum();
                }
            }
        }
        let mut out = [0.0; 64];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    out[r3(a, b, c)] = 0.5 * (raw[r3(a, b, c)] - raw[r3(a, c, b)]);
                }
            }
        }
        out
    }))
}

/// Pointwise data of the twisted spinor connection: ∇_{e_b}ψ = E_b^μ ∂_μψ + Ω_b ψ.
#[derive(Clone, Debug)]
pub struct SpinorConnection {
    xi: SpincStructure,
    omega_mats: Vec<[SpinorEndo; 4]>,
}

impl SpinorConnection {
    pub fn new(xi: &SpincStructure, a: &Field<[f64; 4]>) -> Result<Self> {
        xi.frames.check_same_grid(a)?;
        let w = spin_connection_coeffs(xi)?;
        let gm = gammas();
        let mut pairs = [[Matrix4::zeros(); 4]; 4];
        for b in 0..4 {
            for c in 0..4 {
                pairs[b][c] = gm[b] * gm[c];
            }
        }
        let omega_mats = (0..xi.grid().len())
            .map(|x| {
                let e = xi.frames.at(x);
                let wx = w.at(x);
                let ax = a.at(x);
                std::array::from_fn(|k| {
                    let mut m = Matrix4::zeros();
                    for b in 0..4 {
                        for c in 0..4 {
                            let coef = 0.25 * wx[r3(k, b, c)];
                            if coef != 0.0 {
                                m += pairs[b][c] * C64::new(coef, 0.0);
                            }
                        }
                    }
                    let a_k: f64 = (0..4).map(|mu| ax[mu] * e[(mu, k)]).sum();
                    m + Matrix4::identity() * C64::new(0.0, 0.5 * a_k)
                })
            })
            .collect();
        Ok(SpinorConnection { xi: xi.clone(), omega_mats })
    }

    pub fn xi(&self) -> &SpincStructure {
        &self.xi
    }

    /// Frame components ∇_{e_b}ψ, b = 0..3.
    pub fn covariant(&self, psi: &Spinors) -> [Spinors; 4] {
        let d = partials(psi);
        let frames = &self.xi.frames;
        std::array::from_fn(|b| {
            Field::from_fn(psi.grid(), |x| {
                let e = frames.at(x);
                let mut v = self.omega_mats[x][b] * psi.at(x);
                for mu in 0..4 {
                    v += d[mu].at(x) * C64::new(e[(mu, b)], 0.0);
                }
                v
            })
        })
    }

    /// D ψ = Σ_b γ_b ∇_{e_b}ψ.
    pub fn dirac(&self, psi: &Spinors) -> Spinors {
        let nab = self.covariant(psi);
        let gm = gammas();
        Field::from_fn(psi.grid(), |x| {
            let mut v = Vector4::zeros();
            for b in 0..4 {
                v += gm[b] * nab[b].at(x);
            }
            v
        })
    }
}

pub fn dirac(xi: &SpincStructure, a: &Field<[f64; 4]>, psi: &Spinors) -> Result<Spinors> {
    xi.frames.check_same_grid(psi)?;
    Ok(SpinorConnection::new(xi, a)?.dirac(psi))
}

/// F_A = dA; returned as the real coefficients of F_A / i on dx^i∧dx^j.
pub fn curvature(a: &Field<[f64; 4]>) -> Field<[f64; 6]> {
    exterior_d1(a)
}

/// Frame components α(e_a) of a coordinate 1-form.
pub fn frame_one_form(e: &Matrix4<f64>, alpha: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|a| (0..4).map(|mu| alpha[mu] * e[(mu, a)]).sum())
}

/// Frame components w(e_a, e_b) of a coordinate 2-form, in `PAIRS` order.
pub fn frame_two_form(e: &Matrix4<f64>, w: &[f64; 6]) -> [f64; 6] {
    let m = e.transpose() * crate::metric::to_matrix(w) * e;
    PAIRS.map(|(a, b)| m[(a, b)])
}

/// Coordinate 2-form whose frame components are `wf`.
pub fn coordinate_two_form(e: &Matrix4<f64>, wf: &[f64; 6]) -> [f64; 6] {
    let ei = e.try_inverse().expect("frame with positive determinant");
    let m = ei.transpose() * crate::metric::to_matrix(wf) * ei;
    PAIRS.map(|(a, b)| m[(a, b)])
}

/// ρ_ξ of a real coordinate 1-form at a point with frame e.
pub fn rho_xi_one(e: &Matrix4<f64>, alpha: &[f64; 4]) -> SpinorEndo {
    crate::clifford::rho_one(&frame_one_form(e, alpha))
}

/// ρ_ξ of a real coordinate 2-form at a point with frame e.
pub fn rho_xi_two(e: &Matrix4<f64>, w: &[f64; 6]) -> SpinorEndo {
    rho_two(&frame_two_form(e, w))
}

/// Frame components E⁻¹SE of a coordinate endomorphism; symmetric when S is g_ξ-symmetric.
pub fn frame_endo(e: &Matrix4<f64>, s: &Matrix4<f64>) -> Matrix4<f64> {
    e.try_inverse().expect("frame with positive determinant") * s * e
}

/// Coordinate endomorphism E σ E⁻¹ from frame components.
pub fn coordinate_endo(e: &Matrix4<f64>, sigma: &Matrix4<f64>) -> Matrix4<f64> {
    e * sigma * e.try_inverse().expect("frame with positive determinant")
}

/// −ρ_ξ∘s*∘∇ψ − ½ρ_ξ(div s − d tr s)ψ, the derivative of D along the horizontal
/// lift of g_t = (1 + ts)*g_ξ.
pub fn dirac_variation(
    xi: &SpincStructure,
    a: &Field<[f64; 4]>,
    psi: &Spinors,
    s: &Field<Matrix4<f64>>,
) -> Result<Spinors> {
    let conn = SpinorConnection::new(xi, a)?;
    dirac_variation_with(&conn, psi, s)
}

pub fn dirac_variation_with(conn: &SpinorConnection, psi: &Spinors, s: &Field<Matrix4<f64>>) -> Result<Spinors> {
    let xi = conn.xi();
    xi.frames.check_same_grid(s)?;
    let g = frame_to_metric(xi);
    let div = divergence(&g, s)?;
    let dtr = d_trace(&g, s)?;
    let nab = conn.covariant(psi);
    let gm = gammas();
    Ok(Field::from_fn(psi.grid(), |x| {
        let e = xi.frames.at(x);
        let sf = frame_endo(e, s.at(x));
        let mut v = Vector4::zeros();
        for a in 0..4 {
            for b in 0..4 {
                // (s* e^b)(e_a) = s_ba
                v -= gm[a] * nab[b].at(x) * C64::new(sf[(b, a)], 0.0);
            }
        }
        let alpha: [f64; 4] = std::array::from_fn(|k| div.at(x)[k] - dtr.at(x)[k]);
        v - rho_xi_one(e, &alpha) * psi.at(x) * C64::new(0.5, 0.0)
    }))
}

/// A path of metrics with its velocity, evaluated per lattice point.
pub trait MetricPath: Sync {
    fn metric(&self, x: usize, t: f64) -> Matrix4<f64>;
    fn velocity(&self, x: usize, t: f64) -> Matrix4<f64>;
}

/// g_t = (1 + tS)ᵀ g₀ (1 + tS), i.e. (1 + ts)*g₀.
pub struct PullbackPath<'a> {
    pub g0: &'a Field<Matrix4<f64>>,
    pub s: &'a Field<Matrix4<f64>>,
}

impl MetricPath for PullbackPath<'_> {
    fn metric(&self, x: usize, t: f64) -> Matrix4<f64> {
        let phi = Matrix4::identity() + self.s.at(x) * t;
        phi.transpose() * self.g0.at(x) * phi
    }

    fn velocity(&self, x: usize, t: f64) -> Matrix4<f64> {
        let s = self.s.at(x);
        let phi = Matrix4::identity() + s * t;
        let m = s.transpose() * self.g0.at(x) * phi;
        m + m.transpose()
    }
}

/// g_t = (1 − t) g₀ + t g₁.
pub struct StraightPath<'a> {
    pub g0: &'a Field<Matrix4<f64>>,
    pub g1: &'a Field<Matrix4<f64>>,
}

impl MetricPath for StraightPath<'_> {
    fn metric(&self, x: usize, t: f64) -> Matrix4<f64> {
        self.g0.at(x) * (1.0 - t) + self.g1.at(x) * t
    }

    fn velocity(&self, x: usize, _t: f64) -> Matrix4<f64> {
        self.g1.at(x) - self.g0.at(x)
    }
}

/// Default step count of the transport integrator.
pub const TRANSPORT_STEPS: usize = 128;

/// Parallel transport of ξ₀ along the path from t0 to t1: Ė = −½ g_t⁻¹ ġ_t E,
/// integrated pointwise with the classical fourth-order method.
pub fn xi_transport<P: MetricPath>(xi0: &SpincStructure, path: &P, t0: f64, t1: f64, steps: usize) -> Result<SpincStructure> {
    let grid = xi0.grid();
    let results: Vec<Result<Matrix4<f64>>> = {
        use rayon::prelude::*;
        (0..grid.len())
            .into_par_iter()
            .map(|x| {
                let rhs = |t: f64, e: &Matrix4<f64>| -> Result<Matrix4<f64>> {
                    let gt = path.metric(x, t);
                    let gi = gt.cholesky().ok_or(Error::LeftSpdCone(t))?.inverse();
                    Ok(-0.5 * gi * path.velocity(x, t) * e)
                };
                let dt = (t1 - t0) / steps as f64;
                let mut e = *xi0.frames.at(x);
                for n in 0..steps {
                    let t = t0 + n as f64 * dt;
                    let k1 = rhs(t, &e)?;
                    let k2 = rhs(t + 0.5 * dt, &(e + k1 * (0.5 * dt)))?;
                    let k3 = rhs(t + 0.5 * dt, &(e + k2 * (0.5 * dt)))?;
                    let k4 = rhs(t + dt, &(e + k3 * dt))?;
                    e += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0);
                }
                Ok(e)
            })
            .collect()
    };
    let frames = results.into_iter().collect::<Result<Vec<_>>>()?;
    SpincStructure::new(Field::from_values(grid, frames)?)
}

/// Frame of the structure obtained from ξ by a pointwise rotation R(x) ∈ SO(4)
/// acting on the right (a vertical move in the bundle of structures).
pub fn rotate_frames(xi: &SpincStructure, r: &Field<Matrix4<f64>>) -> Result<SpincStructure> {
    SpincStructure::new(xi.frames.zip(r, |e, r| e * r))
}
