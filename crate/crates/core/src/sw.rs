//! The parametrized Seiberg-Witten map (A, ψ, ξ) ↦ (D_Aψ, ρ_ξ(F_A⁺) − [ψ*⊗ψ]₀),
//! its differential in the connection, spinor and horizontal metric directions,
//! the formal adjoint, and the kernel equations.
//!
//! Conventions:
//! - A = i·a with `a` a real coordinate 1-form; tangent directions τ = i·t likewise.
//! - Self-dual forms in an obstruction covector are stored as real components θ_k
//!   in the frame basis `consts::SELFDUAL_BASIS`, the form itself being i·Σθ_k S_k.
//! - Pairings: Re⟨,⟩ on spinors, ¼ Re tr on i·su(W₊), aᵀg⁻¹b on 1-forms,
//!   2 tr(ST) on symmetric endomorphisms, all weighted by √det g on the lattice.

use nalgebra::{Matrix3, Matrix4, Vector2, Vector4};
use num_complex::Complex64 as C64;

use crate::calculus::{christoffel, div_conservative, exterior_d1, l2_inner, partial_derivative, partials, r3, PointInner};
use crate::clifford::{
    block_pp, gammas, join, minus_part, plus_part, quadratic_map, quadratic_pair, rho_two_imag, spinor_pair_full,
    HalfEndo, HalfSpinor,
};
use crate::consts::KAPPA;
use crate::dirac::{
    curvature, dirac_variation_with, frame_endo, frame_to_metric, rho_xi_one, SpinorConnection,
    SpincStructure, Spinors,
};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::metric::{delta_minus_frame, from_pm, split_pm, sym_basis, to_matrix};

/// A point (A, ψ, ξ) of the configuration space times the space of structures.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub a: Field<[f64; 4]>,
    pub psi: Field<HalfSpinor>,
    pub xi: SpincStructure,
}

impl Configuration {
    pub fn new(a: Field<[f64; 4]>, psi: Field<HalfSpinor>, xi: SpincStructure) -> Result<Self> {
        a.check_same_grid(&psi)?;
        a.check_same_grid(xi.frames())?;
        Ok(Configuration { a, psi, xi })
    }

    pub fn is_irreducible(&self) -> bool {
        self.psi.values().iter().any(|p| p.norm_squared() > 0.0)
    }

    pub fn metric(&self) -> Field<Matrix4<f64>> {
        frame_to_metric(&self.xi)
    }

    /// (‖a‖² + ‖ψ‖²)^{1/2} in the metric of ξ.
    pub fn norm(&self) -> Result<f64> {
        let g = self.metric();
        Ok((l2_inner(&self.a, &self.a, &g)? + l2_inner(&self.psi, &self.psi, &g)?).sqrt())
    }

    fn full_psi(&self) -> Spinors {
        self.psi.map(|p| join(*p, Vector2::zeros()))
    }
}

/// Value of the functional: a negative spinor and a traceless hermitian endomorphism of W₊.
#[derive(Clone, Debug)]
pub struct SWValue {
    pub neg_spinor: Field<HalfSpinor>,
    pub traceless_herm: Field<HalfEndo>,
}

impl SWValue {
    pub fn add(&self, o: &SWValue) -> SWValue {
        SWValue { neg_spinor: self.neg_spinor.add(&o.neg_spinor), traceless_herm: self.traceless_herm.add(&o.traceless_herm) }
    }

    pub fn sub(&self, o: &SWValue) -> SWValue {
        SWValue { neg_spinor: self.neg_spinor.sub(&o.neg_spinor), traceless_herm: self.traceless_herm.sub(&o.traceless_herm) }
    }

    pub fn scale(&self, c: f64) -> SWValue {
        SWValue { neg_spinor: self.neg_spinor.scale(c), traceless_herm: self.traceless_herm.scale(c) }
    }

    pub fn inner(&self, o: &SWValue, g: &Field<Matrix4<f64>>) -> Result<f64> {
        Ok(l2_inner(&self.neg_spinor, &o.neg_spinor, g)? + l2_inner(&self.traceless_herm, &o.traceless_herm, g)?)
    }

    pub fn norm(&self, g: &Field<Matrix4<f64>>) -> Result<f64> {
        Ok(self.inner(self, g)?.max(0.0).sqrt())
    }

    /// Largest defect from hermitian and traceless over the grid.
    pub fn herm_defect(&self) -> f64 {
        self.traceless_herm
            .values()
            .iter()
            .map(|m| (m - m.adjoint()).iter().map(|z| z.norm()).fold(m.trace().norm(), f64::max))
            .fold(0.0, f64::max)
    }
}

/// (χ, θ) with χ ∈ Γ(W₋) and θ an imaginary self-dual form given by frame components.
#[derive(Clone, Debug)]
pub struct ObstructionCovector {
    pub chi: Field<HalfSpinor>,
    pub theta: Field<[f64; 3]>,
}

impl ObstructionCovector {
    pub fn zeros(grid: crate::field::Grid) -> Self {
        ObstructionCovector { chi: Field::zeros(grid), theta: Field::zeros(grid) }
    }

    pub fn add(&self, o: &Self) -> Self {
        ObstructionCovector { chi: self.chi.add(&o.chi), theta: self.theta.add(&o.theta) }
    }

    pub fn scale(&self, c: f64) -> Self {
        ObstructionCovector { chi: self.chi.scale(c), theta: self.theta.scale(c) }
    }

    /// The same covector seen as an element of the target space via ρ.
    pub fn as_value(&self) -> SWValue {
        SWValue { neg_spinor: self.chi.clone(), traceless_herm: self.theta.map(rho_plus_imag) }
    }
}

/// (τ, φ, s): τ = i·`tau` an imaginary 1-form, φ ∈ Γ(W₊), s a g_ξ-symmetric endomorphism
/// field in coordinates.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub tau: Field<[f64; 4]>,
    pub phi: Field<HalfSpinor>,
    pub s: Field<Matrix4<f64>>,
}

impl TangentVector {
    pub fn zeros(grid: crate::field::Grid) -> Self {
        TangentVector { tau: Field::zeros(grid), phi: Field::zeros(grid), s: Field::zeros(grid) }
    }

    pub fn add(&self, o: &Self) -> Self {
        TangentVector { tau: self.tau.add(&o.tau), phi: self.phi.add(&o.phi), s: self.s.add(&o.s) }
    }

    pub fn scale(&self, c: f64) -> Self {
        TangentVector { tau: self.tau.scale(c), phi: self.phi.scale(c), s: self.s.scale(c) }
    }

    pub fn inner(&self, o: &Self, g: &Field<Matrix4<f64>>) -> Result<f64> {
        Ok(l2_inner(&self.tau, &o.tau, g)? + l2_inner(&self.phi, &o.phi, g)? + l2_inner(&self.s, &o.s, g)?)
    }

    pub fn norm(&self, g: &Field<Matrix4<f64>>) -> Result<f64> {
        Ok(self.inner(self, g)?.max(0.0).sqrt())
    }
}

/// ρ(i·Σθ_k S_k) on W₊, a traceless hermitian 2×2 matrix.
pub fn rho_plus_imag(theta: &[f64; 3]) -> HalfEndo {
    block_pp(&rho_two_imag(&from_pm(theta, &[0.0; 3])))
}

/// Inverse of `rho_plus_imag` on traceless hermitian matrices.
pub fn selfdual_of_herm(m: &HalfEndo) -> [f64; 3] {
    let basis = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    basis.map(|b| m.inner(&rho_plus_imag(&b), &Matrix4::identity()))
}

/// Self-dual and anti-self-dual frame components of F_A / i.
fn frame_curvature(xi: &SpincStructure, a: &Field<[f64; 4]>) -> Field<[f64; 6]> {
    let f = curvature(a);
    f.zip(xi.frames(), |w, e| {
        let (p, m) = split_pm(&crate::dirac::frame_two_form(e, w));
        [p[0], p[1], p[2], m[0], m[1], m[2]]
    })
}

fn head3(v: &[f64; 6]) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

fn tail3(v: &[f64; 6]) -> [f64; 3] {
    [v[3], v[4], v[5]]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// (D_A ψ, ρ_ξ(F_A⁺) − [ψ*⊗ψ]₀).
pub fn sw_functional(c: &Configuration) -> Result<SWValue> {
    let conn = SpinorConnection::new(&c.xi, &c.a)?;
    Ok(sw_functional_with(c, &conn))
}

fn sw_functional_with(c: &Configuration, conn: &SpinorConnection) -> SWValue {
    let d = conn.dirac(&c.full_psi());
    let fc = frame_curvature(&c.xi, &c.a);
    SWValue {
        neg_spinor: d.map(minus_part),
        traceless_herm: fc.zip(&c.psi, |f, p| rho_plus_imag(&head3(f)) - quadratic_map(p)),
    }
}

/// Relative monopole residual ‖sw_functional(c)‖ / max(‖c‖, 1).
pub fn monopole_residual(c: &Configuration) -> Result<f64> {
    let g = c.metric();
    Ok(sw_functional(c)?.norm(&g)? / c.norm()?.max(1.0))
}

/// Frame matrices δ₋((B_k)₀) for the orthonormal symmetric basis, used to transpose s₀ ↦ δ₋(s₀)F⁻.
fn delta_basis() -> [Matrix3<f64>; 10] {
    sym_basis().map(|b| delta_minus_frame(&(b - Matrix4::identity() * (b.trace() / 4.0))))
}

/// Linearization of `sw_functional` at c along v = (τ, φ, s):
/// first component ½ρ(τ)ψ + D_Aφ + Ḋ(s)ψ, second d⁺τ − [φ*⊗ψ + ψ*⊗φ]₀ − κ tr(s) ρ(F⁺) − ρ(δ₋(s₀)F⁻).
pub fn sw_differential(c: &Configuration, v: &TangentVector) -> Result<SWValue> {
    let grid = c.a.grid();
    c.a.check_same_grid(&v.tau)?;
    c.a.check_same_grid(&v.phi)?;
    c.a.check_same_grid(&v.s)?;
    let conn = SpinorConnection::new(&c.xi, &c.a)?;
    let psi = c.full_psi();
    let dphi = conn.dirac(&v.phi.map(|p| join(*p, Vector2::zeros())));
    let dvar = dirac_variation_with(&conn, &psi, &v.s)?;
    let frames = c.xi.frames();
    let first = Field::from_fn(grid, |x| {
        let e = frames.at(x);
        let rt = rho_xi_one(e, v.tau.at(x)) * C64::new(0.0, 0.5);
        minus_part(&(rt * psi.at(x) + dphi.at(x) + dvar.at(x)))
    });
    let dtau = exterior_d1(&v.tau);
    let fc = frame_curvature(&c.xi, &c.a);
    let second = Field::from_fn(grid, |x| {
        let e = frames.at(x);
        let (pt, _) = split_pm(&crate::dirac::frame_two_form(e, dtau.at(x)));
        let sigma = frame_endo(e, v.s.at(x));
        let tr = sigma.trace();
        let s0 = sigma - Matrix4::identity() * (tr / 4.0);
        let f = fc.at(x);
        let dm = delta_minus_frame(&s0) * nalgebra::Vector3::from(tail3(f));
        let p: [f64; 3] = std::array::from_fn(|k| pt[k] - KAPPA * tr * f[k] - dm[k]);
        rho_plus_imag(&p) - quadratic_pair(v.phi.at(x), c.psi.at(x))
    });
    Ok(SWValue { neg_spinor: first, traceless_herm: second })
}

/// Pieces of the formal adjoint kept apart so the kernel equations and the scalar identities
/// can recombine them.
struct AdjointParts {
    /// τ-component (real coefficients of the imaginary 1-form).
    tau: Field<[f64; 4]>,
    phi: Field<HalfSpinor>,
    /// −sym Re(∇ψ*⊗χ) + ¼ L_{Re(ψ*⊗χ)}g − (δ₋ transpose) θ, the trace-free-in-spirit part.
    s_main: Field<Matrix4<f64>>,
    /// ½ d* Re(ψ*⊗χ) · Id.
    s_dstar: Field<Matrix4<f64>>,
    /// −(κ/2)(F⁺, θ) · Id.
    s_curv: Field<Matrix4<f64>>,
    /// (F⁺, θ) pointwise.
    f_theta: Field<f64>,
    /// Conservative divergence of Re(ψ*⊗χ)♯ and Im(ψ*⊗χ)♯.
    div_re: Field<f64>,
    div_im: Field<f64>,
}

fn adjoint_parts(c: &Configuration, w: &ObstructionCovector) -> Result<AdjointParts> {
    let grid = c.a.grid();
    c.a.check_same_grid(&w.chi)?;
    c.a.check_same_grid(&w.theta)?;
    let g = c.metric();
    let frames = c.xi.frames();
    let conn = SpinorConnection::new(&c.xi, &c.a)?;
    let psi = c.full_psi();
    let chi = w.chi.map(|x| join(Vector2::zeros(), *x));
    let gm = gammas();

    let pair = psi.zip(&chi, spinor_pair_full);
    // Coordinate vector fields Re v♯, Im v♯: Xᵘ = Σ_a E_aᵘ v_a.
    let vec_re = pair.zip(frames, |v, e| (e * Vector4::from(v.map(|z| z.re))).into());
    let vec_im = pair.zip(frames, |v, e| (e * Vector4::from(v.map(|z| z.im))).into());
    let div_re = div_conservative(&g, &vec_re)?;
    let div_im = div_conservative(&g, &vec_im)?;

    // d*θ_λ = −(1/√g) g_λν ∂_μ(√g θ^{μν}).
    let theta_up = Field::from_fn(grid, |x| {
        let e = frames.at(x);
        let th = to_matrix(&from_pm(w.theta.at(x), &[0.0; 3]));
        e * th * e.transpose() * g.at(x).determinant().sqrt()
    });
    let dth = partials(&theta_up);
    let tau = Field::from_fn(grid, |x| {
        let gx = g.at(x);
        let j = Vector4::from_fn(|nu, _| (0..4).map(|mu| dth[mu].at(x)[(mu, nu)]).sum::<f64>());
        let dstar = -(gx * j) / gx.determinant().sqrt();
        let ei = e_inv(frames.at(x));
        let im = Vector4::from(pair.at(x).map(|z| z.im));
        (dstar + ei.transpose() * im).into()
    });

    let dchi = conn.dirac(&chi);
    let phi = Field::from_fn(grid, |x| plus_part(dchi.at(x)) - rho_plus_imag(w.theta.at(x)) * c.psi.at(x) * C64::new(0.5, 0.0));

    // Transpose of s ↦ −⟨div s, Re v⟩: Y = −½ B G with Σ s♭_jl B^{jl} = ⟨div s, Re v⟩.
    let gamma = christoffel(&g)?;
    let re_up = &vec_re;
    let q: [Field<Matrix4<f64>>; 4] = std::array::from_fn(|i| {
        Field::from_fn(grid, |x| {
            let gx = g.at(x);
            let gi = gx.try_inverse().expect("metric");
            let sq = gx.determinant().sqrt();
            let wv = Vector4::from(*re_up.at(x));
            Matrix4::from_fn(|j, l| sq * gi[(i, j)] * wv[l])
        })
    });
    let dq: [Field<Matrix4<f64>>; 4] = std::array::from_fn(|i| partial_derivative(&q[i], i));
    let nabla = conn.covariant(&psi);
    let fc = frame_curvature(&c.xi, &c.a);
    let dbasis = delta_basis();
    let basis = sym_basis();

    let mut s_main = Vec::with_capacity(grid.len());
    let mut f_theta = Vec::with_capacity(grid.len());
    for x in 0..grid.len() {
        let gx = g.at(x);
        let gi = gx.try_inverse().expect("metric");
        let sq = gx.determinant().sqrt();
        let gam = gamma.at(x);
        let wv = Vector4::from(*re_up.at(x));
        let mut b = Matrix4::zeros();
        for i in 0..4 {
            b -= dq[i].at(x) / sq;
        }
        let trace_gamma: [f64; 4] =
            std::array::from_fn(|m| (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| gi[(i, j)] * gam[r3(m, i, j)]).sum());
        for m in 0..4 {
            for l in 0..4 {
                b[(m, l)] -= trace_gamma[m] * wv[l];
            }
        }
        for j in 0..4 {
            for m in 0..4 {
                let mut acc = 0.0;
                for i in 0..4 {
                    for l in 0..4 {
                        acc += gi[(i, j)] * gam[r3(m, i, l)] * wv[l];
                    }
                }
                b[(j, m)] -= acc;
            }
        }
        let b = 0.5 * (b + b.transpose());
        let y_div = -0.5 * b * gx;

        let e = frames.at(x);
        let n = Matrix4::from_fn(|a, bb| (nabla[bb].at(x).adjoint() * gm[a] * chi.at(x))[(0, 0)].re);
        let mut yf = 0.25 * (n + n.transpose());
        let f = fc.at(x);
        let th = w.theta.at(x);
        let fm = nalgebra::Vector3::from(tail3(f));
        for k in 0..10 {
            let img = dbasis[k] * fm;
            yf -= basis[k] * (img[0] * th[0] + img[1] * th[1] + img[2] * th[2]);
        }
        s_main.push(e * yf * e_inv(e) + y_div);
        f_theta.push(dot3(&head3(f), th));
    }
    let s_main = Field::from_values(grid, s_main)?;
    let f_theta = Field::from_values(grid, f_theta)?;
    let s_dstar = div_re.map(|d| Matrix4::identity() * (-0.5 * d));
    let s_curv = f_theta.map(|y| Matrix4::identity() * (-0.5 * KAPPA * y));
    Ok(AdjointParts { tau, phi, s_main, s_dstar, s_curv, f_theta, div_re, div_im })
}

fn e_inv(e: &Matrix4<f64>) -> Matrix4<f64> {
    e.try_inverse().expect("frame with positive determinant")
}

/// Formal adjoint of `sw_differential` for the pairings listed in the module docs:
/// (d*θ + i Im(ψ*⊗χ), D_Aχ − ½ρ(θ)ψ, −sym Re(∇ψ*⊗χ) + ¼L_{Re(ψ*⊗χ)}g + ½d*Re(ψ*⊗χ)·Id
/// − (κ/2)(F⁺,θ)·Id − (F⁻)*⊗θ). The last term is the pointwise transpose of s ↦ δ₋(s₀)F⁻.
pub fn sw_adjoint(c: &Configuration, w: &ObstructionCovector) -> Result<TangentVector> {
    let p = adjoint_parts(c, w)?;
    let s = Field::from_fn(c.a.grid(), |x| p.s_main.at(x) + p.s_dstar.at(x) + p.s_curv.at(x));
    Ok(TangentVector { tau: p.tau, phi: p.phi, s })
}

/// ⟨sw_differential(c, v), w⟩ − ⟨v, sw_adjoint(c, w)⟩.
pub fn adjoint_defect(c: &Configuration, v: &TangentVector, w: &ObstructionCovector) -> Result<f64> {
    let g = c.metric();
    let lhs = sw_differential(c, v)?.inner(&w.as_value(), &g)?;
    let rhs = v.inner(&sw_adjoint(c, w)?, &g)?;
    Ok(lhs - rhs)
}

/// Residuals of the five kernel equations.
#[derive(Clone, Debug)]
pub struct KernelResidual {
    /// d*θ + i Im(ψ*⊗χ), as real coefficients of the imaginary 1-form.
    pub ke1: Field<[f64; 4]>,
    /// D_Aχ − ½ρ(θ)ψ.
    pub ke2: Field<HalfSpinor>,
    /// −sym Re(∇ψ*⊗χ) + ¼L_{Re(ψ*⊗χ)}g − (F⁻)*⊗θ.
    pub ke3: Field<Matrix4<f64>>,
    /// (θ, F⁺).
    pub ke4: Field<f64>,
    /// div(ψ*⊗χ).
    pub ke5: Field<C64>,
}

impl KernelResidual {
    /// L² norms of the five residuals.
    pub fn norms(&self, g: &Field<Matrix4<f64>>) -> Result<[f64; 5]> {
        let ke5_re = self.ke5.map(|z| z.re);
        let ke5_im = self.ke5.map(|z| z.im);
        Ok([
            l2_inner(&self.ke1, &self.ke1, g)?.sqrt(),
            l2_inner(&self.ke2, &self.ke2, g)?.sqrt(),
            l2_inner(&self.ke3, &self.ke3, g)?.max(0.0).sqrt(),
            l2_inner(&self.ke4, &self.ke4, g)?.sqrt(),
            (l2_inner(&ke5_re, &ke5_re, g)? + l2_inner(&ke5_im, &ke5_im, g)?).sqrt(),
        ])
    }
}

/// Relative tolerance on ‖sw_functional(c)‖ for c to count as a monopole.
pub const MONOPOLE_TOL: f64 = 1e-8;

/// Kernel residuals at a monopole. Rejects reducible configurations and
/// configurations whose relative SW residual exceeds `MONOPOLE_TOL`.
pub fn kernel_residual(c: &Configuration, w: &ObstructionCovector) -> Result<KernelResidual> {
    if !c.is_irreducible() {
        return Err(Error::Reducible);
    }
    let r = monopole_residual(c)?;
    if r > MONOPOLE_TOL {
        return Err(Error::NotMonopole(r));
    }
    kernel_residual_at(c, w)
}

/// The same linear operators evaluated at an arbitrary irreducible configuration.
pub fn kernel_residual_at(c: &Configuration, w: &ObstructionCovector) -> Result<KernelResidual> {
    if !c.is_irreducible() {
        return Err(Error::Reducible);
    }
    let p = adjoint_parts(c, w)?;
    Ok(KernelResidual {
        ke1: p.tau,
        ke2: p.phi,
        ke3: p.s_main,
        ke4: p.f_theta,
        ke5: p.div_re.zip(&p.div_im, |r, i| C64::new(*r, *i)),
    })
}

/// Σ_μ (1/√g) Δ_μ of the edge fluxes V^μ(x+½) = −¼(φ(x+μ)†K^μ ζ(x) + φ(x)†K^μ ζ(x+μ)),
/// K^μ = √g Σ_a E_aᵘ γ_a averaged over the edge. Discrete form of div(φ*⊗ζ) for which
/// 2 div(φ*⊗ζ) = ⟨Dφ, ζ⟩ − ⟨φ, Dζ⟩ holds exactly on a flat background.
pub fn flux_divergence(xi: &SpincStructure, phi: &Spinors, zeta: &Spinors) -> Result<Field<C64>> {
    phi.check_same_grid(zeta)?;
    phi.check_same_grid(xi.frames())?;
    let grid = phi.grid();
    let h = grid.spacing();
    let g = frame_to_metric(xi);
    let gm = gammas();
    let k: Vec<[Matrix4<C64>; 4]> = (0..grid.len())
        .map(|x| {
            let e = xi.frames().at(x);
            let sq = g.at(x).determinant().sqrt();
            std::array::from_fn(|mu| {
                let mut m = Matrix4::zeros();
                for a in 0..4 {
                    m += gm[a] * C64::new(sq * e[(mu, a)], 0.0);
                }
                m
            })
        })
        .collect();
    let flux = |x: usize, mu: usize| -> C64 {
        let y = grid.shift(x, mu, 1);
        let km = (k[x][mu] + k[y][mu]) * C64::new(0.5, 0.0);
        let t = phi.at(y).adjoint() * km * zeta.at(x) + phi.at(x).adjoint() * km * zeta.at(y);
        t[(0, 0)] * -0.25
    };
    Ok(Field::from_fn(grid, |x| {
        let mut acc = C64::new(0.0, 0.0);
        for mu in 0..4 {
            acc += (flux(x, mu) - flux(grid.shift(x, mu, -1), mu)) / h;
        }
        acc / g.at(x).determinant().sqrt()
    }))
}

/// ⟨Dφ, ζ⟩ − ⟨φ, Dζ⟩ pointwise, with ⟨u, v⟩ = u†v.
pub fn dirac_pairing_defect(conn: &SpinorConnection, phi: &Spinors, zeta: &Spinors) -> Field<C64> {
    let dp = conn.dirac(phi);
    let dz = conn.dirac(zeta);
    Field::from_fn(phi.grid(), |x| dp.at(x).dotc(zeta.at(x)) - phi.at(x).dotc(dz.at(x)))
}

/// Discrete replay of the argument that the kernel equations force (F⁺, θ) = 0 and
/// div(ψ*⊗χ) = 0. All fields are pointwise.
#[derive(Clone, Debug)]
pub struct ScalarIdentityReport {
    /// X_c: conservative divergence of Re(ψ*⊗χ), the one produced by the adjoint.
    pub div_central: Field<f64>,
    /// X_f: flux-form divergence of Re(ψ*⊗χ).
    pub div_flux: Field<f64>,
    /// Y = (F⁺, θ).
    pub pairing: Field<f64>,
    /// −tr(s-part of the adjoint) − ½ Re⟨Dψ, χ⟩, which equals (3/2)X_c + Y.
    pub trace_rhs: Field<f64>,
    /// ½Re⟨Dψ, χ⟩ − ½Re⟨ψ, ker2⟩ + ⟨ρ(F⁺) − [ψ*⊗ψ]₀, ρ(θ)⟩, which equals X_f + Y.
    pub spinor_rhs: Field<f64>,
    /// (3/2)X_c + Y − trace_rhs.
    pub trace_identity: Field<f64>,
    /// X_f + Y − spinor_rhs.
    pub spinor_identity: Field<f64>,
}

impl ScalarIdentityReport {
    /// X and Y recovered from the two right-hand sides alone.
    pub fn solved(&self) -> (Field<f64>, Field<f64>) {
        // [[3/2, 1], [1, 1]] (X, Y) = (r1, r2)
        let x = self.trace_rhs.zip(&self.spinor_rhs, |r1, r2| 2.0 * (r1 - r2));
        let y = self.trace_rhs.zip(&self.spinor_rhs, |r1, r2| 3.0 * r2 - 2.0 * r1);
        (x, y)
    }

    /// L² norms of (div(ψ*⊗χ), (F⁺, θ)), taking the flux divergence.
    pub fn scalars(&self, g: &Field<Matrix4<f64>>) -> Result<(f64, f64)> {
        Ok((l2_inner(&self.div_flux, &self.div_flux, g)?.sqrt(), l2_inner(&self.pairing, &self.pairing, g)?.sqrt()))
    }

    /// L² norm of the two right-hand sides together, the residual that bounds the scalars.
    pub fn residual(&self, g: &Field<Matrix4<f64>>) -> Result<f64> {
        Ok((l2_inner(&self.trace_rhs, &self.trace_rhs, g)? + l2_inner(&self.spinor_rhs, &self.spinor_rhs, g)?).sqrt())
    }
}

pub fn scalar_identities(c: &Configuration, w: &ObstructionCovector) -> Result<ScalarIdentityReport> {
    let p = adjoint_parts(c, w)?;
    let conn = SpinorConnection::new(&c.xi, &c.a)?;
    let psi = c.full_psi();
    let chi = w.chi.map(|x| join(Vector2::zeros(), *x));
    let dpsi = conn.dirac(&psi);
    let sw = sw_functional_with(c, &conn);
    let grid = c.a.grid();
    let flux = flux_divergence(&c.xi, &psi, &chi)?;
    let div_flux = flux.map(|z| z.re);
    let mut trace_rhs = Vec::with_capacity(grid.len());
    let mut spinor_rhs = Vec::with_capacity(grid.len());
    for x in 0..grid.len() {
        let d_chi = dpsi.at(x).dotc(chi.at(x)).re;
        let full = p.s_main.at(x) + p.s_dstar.at(x) + p.s_curv.at(x);
        trace_rhs.push(-full.trace() - 0.5 * d_chi);
        let k2 = psi_plus_pair(c.psi.at(x), p.phi.at(x));
        let defect = sw.traceless_herm.at(x).inner(&rho_plus_imag(w.theta.at(x)), &Matrix4::identity());
        spinor_rhs.push(0.5 * d_chi - 0.5 * k2 + defect);
    }
    let trace_rhs = Field::from_values(grid, trace_rhs)?;
    let spinor_rhs = Field::from_values(grid, spinor_rhs)?;
    let trace_identity = Field::from_fn(grid, |x| 1.5 * p.div_re.at(x) + p.f_theta.at(x) - trace_rhs.at(x));
    let spinor_identity = Field::from_fn(grid, |x| div_flux.at(x) + p.f_theta.at(x) - spinor_rhs.at(x));
    Ok(ScalarIdentityReport { div_central: p.div_re, div_flux, pairing: p.f_theta, trace_rhs, spinor_rhs, trace_identity, spinor_identity })
}

fn psi_plus_pair(psi: &HalfSpinor, k2: &HalfSpinor) -> f64 {
    psi.dotc(k2).re
}

/// Gauge action of e^{iu}: ψ ↦ e^{iu}ψ, a ↦ a − 2du (A ↦ A − 2i du).
pub fn gauge_transform(c: &Configuration, u: &Field<f64>) -> Result<Configuration> {
    let du = crate::calculus::gradient(u);
    let a = c.a.zip(&du, |a, d| std::array::from_fn(|k| a[k] - 2.0 * d[k]));
    let psi = c.psi.zip(u, |p, u| p * C64::from_polar(1.0, *u));
    Configuration::new(a, psi, c.xi.clone())
}

/// Action of e^{iu} on the target: W₋ rotates, i·su(W₊) is fixed.
pub fn gauge_act_value(v: &SWValue, u: &Field<f64>) -> SWValue {
    SWValue { neg_spinor: v.neg_spinor.zip(u, |p, u| p * C64::from_polar(1.0, *u)), traceless_herm: v.traceless_herm.clone() }
}

/// Pointwise test for traceless hermitian W₊ endomorphisms.
pub fn is_traceless_hermitian(m: &HalfEndo, tol: f64) -> bool {
    (m - m.adjoint()).iter().all(|z| z.norm() <= tol) && m.trace().norm() <= tol
}
