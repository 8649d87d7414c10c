//! Named numerical checks. Each one measures, the caller decides what passes.
//!
//! Every check draws its random inputs from its own stream, derived from the run seed and
//! the check name, so results do not depend on which other checks run.

use std::sync::OnceLock;

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector2, Vector4};
use swlab::calculus::{
    christoffel, divergence, exterior_d1, exterior_d2, flat_metric, gradient, l2_inner, l2_norm, lc_variation, lie_metric,
    metricity_defect, partial_derivative, sharp_of, Rank3,
};
use swlab::clifford::{
    block_mm, block_pp, clifford_mul, gammas, half_endo_inner, join, quadratic_map, rho_two_imag, spinor_pair_to_oneform, Form,
};
use swlab::consts::{PAIRS, SQRT2};
use swlab::dirac::{
    dirac, dirac_variation, frame_to_metric, metric_to_frame, xi_transport, PullbackPath, SpincStructure, SpinorConnection, Spinors,
    TRANSPORT_STEPS,
};
use swlab::field::{Field, Grid};
use swlab::kahler::{
    assemble_kernel_operator, del, del_adjoint, del_bar, del_bar_adjoint, delta_minus_split, dolbeault, dolbeault_adjoint,
    kernel_dimension, split_sym_at, to_abstract_spinor, ComplexStructure, DolbeaultField, FormField, KernelReport,
};
use swlab::metric::{
    antiselfdual_project, delta_minus, from_pm, hodge_star, hom_lambda_inner, polar_decompose, selfdual_project, split_pm,
    spd_inv_sqrt, sym_inner, xi_curvature, xi_holonomy_oracle, Coframe,
};
use swlab::sample::{
    complex, gl_plus, half_spinor, rng, rough, spd, symmetric, traceless_symmetric, vec6, SeededRng, SmoothField, TrigPoly,
};
use swlab::sw::{
    adjoint_defect, dirac_pairing_defect, flux_divergence, scalar_identities, selfdual_of_herm, Configuration, ObstructionCovector,
    TangentVector,
};
use swlab::C64;

use crate::config::{Suite, SuiteConfig};
use crate::report::{Bound, Measured};
use crate::Result;

/// Random samples for the pointwise algebraic checks.
pub const POINT_SAMPLES: usize = 100;
pub const HOLONOMY_SAMPLES: usize = 20;
pub const ADJOINT_PAIRS: usize = 50;
/// Step for the single-step Levi-Civita comparison.
pub const LC_STEP: f64 = 1e-3;
pub const CURVED_METRIC_AMP: f64 = 0.1;
/// Relative singular-value threshold for the numerical kernel.
pub const KERNEL_TOL: f64 = 1e-8;
/// Sizes of the kernel violation added to the null covector.
pub const NULL_COVECTOR_VIOLATIONS: [f64; 3] = [1e-1, 1e-2, 1e-3];

pub struct Context {
    pub seed: u64,
    pub grid: Grid,
    pub grids: Vec<Grid>,
    pub kernel_grid: Grid,
    pub epsilons: Vec<f64>,
    kernels: [OnceLock<swlab::Result<KernelReport>>; 2],
}

impl Context {
    pub fn new(c: &SuiteConfig) -> Result<Self> {
        c.validate()?;
        Ok(Context {
            seed: c.seed,
            grid: Grid::new(c.grid)?,
            grids: c.grids.iter().map(|&n| Grid::new(n)).collect::<swlab::Result<_>>()?,
            kernel_grid: Grid::new(c.kernel_grid)?,
            epsilons: c.epsilons.clone(),
            kernels: [OnceLock::new(), OnceLock::new()],
        })
    }

    pub fn rng(&self, tag: &str) -> SeededRng {
        stream(self.seed, tag)
    }

    /// Kernel report of the assembled operator at A = 0, α ≡ `alpha` (0 or 1), computed once.
    fn kernel(&self, alpha: usize) -> Result<KernelReport> {
        let grid = self.kernel_grid;
        let report = self.kernels[alpha].get_or_init(|| {
            let a = Field::zeros(grid);
            let m = assemble_kernel_operator(&a, &Field::constant(grid, C64::new(alpha as f64, 0.0)))?;
            Ok(kernel_dimension(&m, KERNEL_TOL))
        });
        Ok(report.clone()?)
    }
}

/// Independent generator for (seed, tag); FNV-1a over the tag.
pub fn stream(seed: u64, tag: &str) -> SeededRng {
    let h = tag.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3));
    rng(seed ^ h)
}

pub struct CheckSpec {
    pub name: &'static str,
    pub suite: Suite,
    /// Default acceptance region; a config tolerance replaces its threshold.
    pub bound: Bound,
    pub run: fn(&Context) -> Result<Measured>,
}

const fn at_most(value: f64) -> Bound {
    Bound::AtMost { value }
}

const fn at_least(value: f64) -> Bound {
    Bound::AtLeast { value }
}

const fn within(center: f64, half_width: f64) -> Bound {
    Bound::Within { center, half_width }
}

pub const CHECKS: &[CheckSpec] = &[
    CheckSpec { name: "clifford.anticommutation", suite: Suite::Clifford, bound: at_most(1e-12), run: clifford_anticommutation },
    CheckSpec { name: "clifford.chirality", suite: Suite::Clifford, bound: at_most(1e-12), run: clifford_chirality },
    CheckSpec { name: "clifford.volume_form", suite: Suite::Clifford, bound: at_most(1e-12), run: clifford_volume_form },
    CheckSpec { name: "clifford.quadratic_quarter", suite: Suite::Clifford, bound: at_most(1e-12), run: clifford_quadratic_quarter },
    CheckSpec { name: "clifford.spinor_pair", suite: Suite::Clifford, bound: at_most(1e-12), run: clifford_spinor_pair },
    CheckSpec { name: "metric.star_involution", suite: Suite::Metric, bound: at_most(1e-11), run: metric_star_involution },
    CheckSpec { name: "metric.selfdual_projection", suite: Suite::Metric, bound: at_most(1e-11), run: metric_projections },
    CheckSpec { name: "metric.delta_minus_norm", suite: Suite::Metric, bound: within(0.5, 1e-12), run: metric_delta_minus_norm },
    CheckSpec { name: "metric.polar", suite: Suite::Metric, bound: at_most(1e-11), run: metric_polar },
    CheckSpec { name: "calculus.skew_adjoint", suite: Suite::Calculus, bound: at_most(1e-12), run: calculus_skew_adjoint },
    CheckSpec { name: "calculus.d_squared", suite: Suite::Calculus, bound: at_most(1e-12), run: calculus_d_squared },
    CheckSpec { name: "calculus.metricity", suite: Suite::Calculus, bound: at_most(1e-12), run: calculus_metricity },
    CheckSpec { name: "calculus.divergence_adjoint", suite: Suite::Calculus, bound: at_most(1e-12), run: calculus_divergence_adjoint },
    CheckSpec { name: "lc_variation.relative", suite: Suite::Calculus, bound: at_most(1e-6), run: lc_variation_relative },
    CheckSpec { name: "lc_variation.order", suite: Suite::Calculus, bound: within(2.0, 0.1), run: lc_variation_order },
    CheckSpec { name: "dirac_variation.scalar", suite: Suite::DiracVariation, bound: at_most(1e-10), run: dirac_variation_scalar },
    CheckSpec {
        name: "dirac_variation.order_constant_background",
        suite: Suite::DiracVariation,
        bound: within(2.0, 0.1),
        run: dirac_variation_order_constant,
    },
    CheckSpec {
        name: "dirac_variation.order_rotating_frame",
        suite: Suite::DiracVariation,
        bound: within(2.0, 0.1),
        run: dirac_variation_order_rotating,
    },
    CheckSpec { name: "adjoint.flat", suite: Suite::Adjoint, bound: at_most(1e-9), run: adjoint_flat },
    CheckSpec { name: "adjoint.curved_order", suite: Suite::Adjoint, bound: at_least(1.9), run: adjoint_curved_order },
    CheckSpec { name: "adjoint.dirac_divergence", suite: Suite::Adjoint, bound: at_most(1e-10), run: adjoint_dirac_divergence },
    CheckSpec { name: "adjoint.kernel_scalars", suite: Suite::Adjoint, bound: at_most(10.0), run: adjoint_kernel_scalars },
    CheckSpec { name: "holonomy.ratio", suite: Suite::Holonomy, bound: within(2.0, 0.3), run: holonomy_ratio },
    CheckSpec { name: "kahler.projections", suite: Suite::KahlerKernel, bound: at_most(1e-12), run: kahler_projections },
    CheckSpec { name: "kahler.delta_minus_blocks", suite: Suite::KahlerKernel, bound: at_most(1e-12), run: kahler_delta_minus_blocks },
    CheckSpec { name: "kahler.identity", suite: Suite::KahlerKernel, bound: at_most(1e-12), run: kahler_identity },
    CheckSpec { name: "kahler.dirac_dolbeault", suite: Suite::KahlerKernel, bound: at_most(1e-9), run: kahler_dirac_dolbeault },
    CheckSpec { name: "kahler.kernel_dim_alpha_one", suite: Suite::KahlerKernel, bound: at_most(0.0), run: kernel_dim_alpha_one },
    CheckSpec { name: "kahler.kernel_gap_alpha_one", suite: Suite::KahlerKernel, bound: at_least(1e3), run: kernel_gap_alpha_one },
    CheckSpec { name: "kahler.kernel_dim_alpha_zero", suite: Suite::KahlerKernel, bound: at_least(1.0), run: kernel_dim_alpha_zero },
];

pub fn find(name: &str) -> Option<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.name == name)
}

// --- small helpers ---

fn cmax4(m: &Matrix4<C64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn cmax2(m: &Matrix2<C64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn max6(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// diag(−1, −1, 1, 1): the volume element, −1 on the plus half.
fn chirality() -> Matrix4<C64> {
    let (m, p) = (C64::new(-1.0, 0.0), C64::new(1.0, 0.0));
    Matrix4::from_diagonal(&Vector4::new(m, m, p, p))
}

/// Least-squares slope of log(err) against log(x).
pub fn loglog_slope(x: &[f64], err: &[f64]) -> f64 {
    fit(x, err).0
}

/// Slope and RMS residual of the least-squares line through (log x, log err).
pub fn fit(x: &[f64], err: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let ss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    (slope, (ss / n).sqrt())
}

fn half_spinors(r: &mut SeededRng, grid: Grid, amp: f64) -> Field<Vector2<C64>> {
    SmoothField::random(r, 4, 1, 2, amp).sample_with(grid, |v| Vector2::new(C64::new(v[0], v[1]), C64::new(v[2], v[3])))
}

fn one_form(r: &mut SeededRng, grid: Grid, amp: f64) -> Field<[f64; 4]> {
    SmoothField::random(r, 4, 1, 2, amp).one_form(grid)
}

fn spinors(r: &mut SeededRng, grid: Grid, amp: f64) -> Spinors {
    SmoothField::random(r, 8, 1, 2, amp).spinor(grid)
}

/// Smooth background for the linearized equations: curved when `metric_amp` > 0.
fn background(r: &mut SeededRng, grid: Grid, metric_amp: f64) -> Result<Configuration> {
    let xi = if metric_amp > 0.0 {
        metric_to_frame(&SmoothField::random(r, 10, 1, 2, metric_amp).metric(grid))?
    } else {
        SpincStructure::identity(grid)
    };
    let a = one_form(r, grid, 0.5);
    let psi = half_spinors(r, grid, 0.3).map(|v| v + Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.5)));
    Ok(Configuration::new(a, psi, xi)?)
}

fn tangent(r: &mut SeededRng, c: &Configuration) -> TangentVector {
    let grid = c.a.grid();
    let g = c.metric();
    let b = SmoothField::random(r, 10, 1, 2, 0.5).symmetric(grid);
    let s = g.zip(&b, |g, b| g.try_inverse().expect("metric is positive definite") * b);
    TangentVector { tau: one_form(r, grid, 0.5), phi: half_spinors(r, grid, 0.5), s }
}

fn covector(r: &mut SeededRng, grid: Grid) -> ObstructionCovector {
    let theta = SmoothField::random(r, 3, 1, 2, 0.5).sample_with(grid, |v| [v[0], v[1], v[2]]);
    ObstructionCovector { chi: half_spinors(r, grid, 0.5), theta }
}

/// Smooth rotation field through the Cayley transform of a smooth skew matrix.
fn rotations(r: &mut SeededRng, grid: Grid, amp: f64) -> Field<Matrix4<f64>> {
    SmoothField::random(r, 6, 1, 2, amp).sample_with(grid, |v| {
        let mut m = Matrix4::zeros();
        for (i, &(a, b)) in PAIRS.iter().enumerate() {
            m[(a, b)] = v[i];
            m[(b, a)] = -v[i];
        }
        (Matrix4::identity() - m).try_inverse().expect("I − K is invertible for skew K") * (Matrix4::identity() + m)
    })
}

// --- clifford ---

fn clifford_anticommutation(_: &Context) -> Result<Measured> {
    let g = gammas();
    let mut err: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let expected = if i == j { -2.0 } else { 0.0 };
            err = err.max(cmax4(&(g[i] * g[j] + g[j] * g[i] - Matrix4::identity() * C64::new(expected, 0.0))));
        }
    }
    Ok(Measured::new(err))
}

fn clifford_chirality(_: &Context) -> Result<Measured> {
    let gam = chirality();
    let mut err: f64 = 0.0;
    for g in gammas() {
        err = err.max(cmax4(&(g + g.adjoint())));
        err = err.max(cmax2(&block_pp(g))).max(cmax2(&block_mm(g)));
        err = err.max(cmax4(&(g * gam + gam * g)));
    }
    Ok(Measured::new(err))
}

fn clifford_volume_form(_: &Context) -> Result<Measured> {
    let g = gammas();
    let a = cmax4(&(Form::volume().matrix() - chirality()));
    let b = cmax4(&(g[0] * g[1] * g[2] * g[3] - chirality()));
    Ok(Measured::new(a.max(b)))
}

/// ⟨ρ(ω), q(φ)⟩ = ¼⟨φ, ρ(ω)φ⟩ for imaginary self-dual ω.
fn clifford_quadratic_quarter(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("clifford.quadratic_quarter");
    let mut err: f64 = 0.0;
    for _ in 0..POINT_SAMPLES {
        let w = from_pm(&[complex(&mut r).re, complex(&mut r).re, complex(&mut r).re], &[0.0; 3]);
        let phi = half_spinor(&mut r);
        let rho = block_pp(&rho_two_imag(&w));
        let lhs = half_endo_inner(&rho, &quadratic_map(&phi));
        err = err.max((lhs - 0.25 * phi.dotc(&(rho * phi)).re).abs());
    }
    Ok(Measured::new(err))
}

/// ⟨σ·ψ, χ⟩ = 2 Σ σ̄ₐ (ψ*⊗χ)ₐ for complex 1-forms σ.
fn clifford_spinor_pair(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("clifford.spinor_pair");
    let mut err: f64 = 0.0;
    for _ in 0..POINT_SAMPLES {
        let sigma: [C64; 4] = std::array::from_fn(|_| complex(&mut r));
        let (psi, chi) = (half_spinor(&mut r), half_spinor(&mut r));
        let v = spinor_pair_to_oneform(&psi, &chi);
        let lhs = clifford_mul(&Form::one_form(&sigma), &join(psi, Vector2::zeros())).dotc(&join(Vector2::zeros(), chi));
        let rhs: C64 = sigma.iter().zip(&v).map(|(s, v)| s.conj() * v).sum::<C64>() * 2.0;
        err = err.max((lhs - rhs).norm());
    }
    Ok(Measured::new(err))
}

// --- metric ---

fn metric_star_involution(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("metric.star_involution");
    let mut err: f64 = 0.0;
    for _ in 0..POINT_SAMPLES {
        let g = spd(&mut r);
        let w = vec6(&mut r);
        let ss = hodge_star(&g, &hodge_star(&g, &w, Coframe::Coordinate)?, Coframe::Coordinate)?;
        err = err.max(max6(&ss, &w));
    }
    Ok(Measured::new(err))
}

fn metric_projections(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("metric.selfdual_projection");
    let mut err: f64 = 0.0;
    for _ in 0..POINT_SAMPLES {
        let g = spd(&mut r);
        let w = vec6(&mut r);
        let p = selfdual_project(&g, &w)?;
        let m = antiselfdual_project(&g, &w)?;
        let sum: [f64; 6] = std::array::from_fn(|i| p[i] + m[i]);
        err = err.max(max6(&selfdual_project(&g, &p)?, &p)).max(max6(&selfdual_project(&g, &m)?, &[0.0; 6])).max(max6(&sum, &w));
    }
    Ok(Measured::new(err))
}

/// |δ₋s₀| / |s₀|, reported as the sample farthest from ½.
fn metric_delta_minus_norm(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("metric.delta_minus_norm");
    let mut worst = 0.5;
    for _ in 0..POINT_SAMPLES {
        let s0 = traceless_symmetric(&mut r);
        let d = delta_minus(&Matrix4::identity(), &s0)?;
        let ratio = (hom_lambda_inner(&d, &d) / sym_inner(&s0, &s0)).sqrt();
        if (ratio - 0.5).abs() > (worst - 0.5f64).abs() {
            worst = ratio;
        }
    }
    Ok(Measured::new(worst))
}

fn metric_polar(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("metric.polar");
    let mut err: f64 = 0.0;
    for _ in 0..POINT_SAMPLES {
        let g = spd(&mut r);
        let e0 = gl_plus(&mut r);
        let (rot, pos) = polar_decompose(&e0, &g)?;
        let gp = g * pos;
        err = err.max((rot * pos - e0).amax()).max((rot.transpose() * g * rot - g).amax()).max((gp - gp.transpose()).amax());
    }
    Ok(Measured::new(err))
}

// --- holonomy ---

/// Holonomy oracle error against −¼[g⁻¹h, g⁻¹k] at each ε, for one random (g, h, k).
pub fn holonomy_errors(r: &mut SeededRng, eps: &[f64]) -> Result<Vec<f64>> {
    let g = spd(r);
    let (h, k) = (symmetric(r), symmetric(r));
    let omega = xi_curvature(&g, &h, &k)?;
    eps.iter().map(|&e| Ok((xi_holonomy_oracle(&g, &h, &k, e)? - omega).norm())).collect()
}

/// Error ratio per refinement step, rescaled to a halving of ε; reports the ratio
/// farthest from 2.
fn holonomy_ratio(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("holonomy.ratio");
    let (mut worst, mut lo, mut hi, mut emax) = (2.0f64, f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for _ in 0..HOLONOMY_SAMPLES {
        let err = holonomy_errors(&mut r, &ctx.epsilons)?;
        for k in 1..err.len() {
            let p = (err[k - 1] / err[k]).ln() / (ctx.epsilons[k - 1] / ctx.epsilons[k]).ln();
            let ratio = 2f64.powf(p);
            if !ratio.is_finite() || (ratio - 2.0).abs() > (worst - 2.0).abs() {
                worst = ratio;
            }
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        emax = emax.max(err[0]);
    }
    Ok(Measured::new(worst).with("min_ratio", lo).with("max_ratio", hi).with("max_error", emax))
}

// --- calculus ---

fn calculus_skew_adjoint(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("calculus.skew_adjoint");
    let gr = ctx.grid;
    let f: Field<f64> = rough(&mut r, gr);
    let h: Field<f64> = rough(&mut r, gr);
    let flat = flat_metric(gr);
    let scale = l2_norm(&f, &flat)? * l2_norm(&h, &flat)? / gr.spacing();
    let mut err: f64 = 0.0;
    for a in 0..4 {
        let lhs = l2_inner(&partial_derivative(&f, a), &h, &flat)?;
        let rhs = l2_inner(&f, &partial_derivative(&h, a), &flat)?;
        err = err.max((lhs + rhs).abs() / scale);
    }
    Ok(Measured::new(err))
}

fn calculus_d_squared(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("calculus.d_squared");
    let a: Field<[f64; 4]> = rough(&mut r, ctx.grid);
    let u: Field<f64> = rough(&mut r, ctx.grid);
    Ok(Measured::new(exterior_d2(&exterior_d1(&a)).max_abs().max(exterior_d1(&gradient(&u)).max_abs())))
}

fn calculus_metricity(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("calculus.metricity");
    let g = SmoothField::random(&mut r, 10, 1, 2, CURVED_METRIC_AMP).metric(ctx.grid);
    Ok(Measured::new(metricity_defect(&g)?.max_abs()))
}

/// ⟨div s, σ⟩ = −¼⟨s, L_σ♯ g⟩ on the flat lattice, relative to max(|lhs|, 1).
fn calculus_divergence_adjoint(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("calculus.divergence_adjoint");
    let gr = ctx.grid;
    let flat = flat_metric(gr);
    let s = rough::<Matrix4<f64>, _>(&mut r, gr).map(|m| 0.5 * (m + m.transpose()));
    let sigma: Field<[f64; 4]> = rough(&mut r, gr);
    let lhs = l2_inner(&divergence(&flat, &s)?, &sigma, &flat)?;
    let l = lie_metric(&flat, &sharp_of(&flat, &sigma)?)?;
    let rhs = l2_inner(&s, &l.scale(-0.25), &flat)?;
    Ok(Measured::new((lhs - rhs).abs() / lhs.abs().max(1.0)))
}

fn rank3_diff(a: &Field<Rank3>, b: &Field<Rank3>) -> Field<Rank3> {
    a.zip(b, |x, y| std::array::from_fn(|k| x[k] - y[k]))
}

/// Relative distance between the Levi-Civita variation and the central difference of
/// discrete Christoffel symbols along g_t = (1 + ts)*g, at each step t.
pub fn lc_errors(seed: u64, grid: Grid, ts: &[f64]) -> Result<Vec<f64>> {
    let mut r = stream(seed, "lc_variation");
    let g = SmoothField::random(&mut r, 10, 1, 2, CURVED_METRIC_AMP).metric(grid);
    let b = SmoothField::random(&mut r, 10, 1, 2, 0.05).symmetric(grid);
    let s = g.zip(&b, |g, b| g.try_inverse().expect("metric is positive definite") * b);
    let formula = lc_variation(&g, &s)?;
    let scale = formula.flat_norm();
    let pullback = |t: f64| {
        g.zip(&s, |g, s| {
            let phi = Matrix4::identity() + s * t;
            phi.transpose() * g * phi
        })
    };
    ts.iter()
        .map(|&t| {
            let fd = rank3_diff(&christoffel(&pullback(t))?, &christoffel(&pullback(-t))?).map(|v| v.map(|x| x * 0.5 / t));
            Ok(rank3_diff(&fd, &formula).flat_norm() / scale)
        })
        .collect()
}

fn lc_variation_relative(ctx: &Context) -> Result<Measured> {
    Ok(Measured::new(lc_errors(ctx.seed, ctx.grid, &[LC_STEP])?[0]))
}

fn lc_variation_order(ctx: &Context) -> Result<Measured> {
    let errs = lc_errors(ctx.seed, ctx.grid, &ctx.epsilons)?;
    Ok(Measured::new(loglog_slope(&ctx.epsilons, &errs)).with("finest_error", errs[errs.len() - 1]))
}

// --- Dirac variation ---

/// Two backgrounds on which the transported difference quotient is compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariationRegime {
    /// Constant metric and frame; smooth s, A and ψ.
    ConstantBackground,
    /// Conformal metric e^{2f}G₀ with a rotating frame; constant s.
    RotatingFrame,
}

/// L² distance between the Dirac variation and the central transported difference quotient.
pub fn dirac_variation_errors(seed: u64, grid: Grid, regime: VariationRegime, ts: &[f64]) -> Result<Vec<f64>> {
    let (xi, s, mut r) = match regime {
        VariationRegime::ConstantBackground => {
            let mut r = stream(seed, "dirac_variation.constant_background");
            let g0 = spd(&mut r);
            let xi = metric_to_frame(&Field::constant(grid, g0))?;
            let gi = g0.try_inverse().expect("SPD sample");
            let s = SmoothField::random(&mut r, 10, 1, 2, 0.5).symmetric(grid).map(|b| gi * b);
            (xi, s, r)
        }
        VariationRegime::RotatingFrame => {
            let mut r = stream(seed, "dirac_variation.rotating_frame");
            let g0 = spd(&mut r);
            let f = TrigPoly::random(&mut r, 1, 3, 0.2);
            let base = spd_inv_sqrt(&g0)?;
            let rot = rotations(&mut r, grid, 0.5);
            let xi = SpincStructure::new(rot.map_indexed(|i, q| base * q * (-f.eval(&grid.point(i))).exp()))?;
            let s = Field::constant(grid, g0.try_inverse().expect("SPD sample") * symmetric(&mut r));
            (xi, s, r)
        }
    };
    let a = one_form(&mut r, grid, 0.5);
    let psi = spinors(&mut r, grid, 0.5);
    let g = frame_to_metric(&xi);
    let formula = dirac_variation(&xi, &a, &psi, &s)?;
    let path = PullbackPath { g0: &g, s: &s };
    ts.iter()
        .map(|&t| {
            let plus = xi_transport(&xi, &path, 0.0, t, TRANSPORT_STEPS)?;
            let minus = xi_transport(&xi, &path, 0.0, -t, TRANSPORT_STEPS)?;
            let fd = dirac(&plus, &a, &psi)?.sub(&dirac(&minus, &a, &psi)?).scale(0.5 / t);
            Ok(l2_norm(&fd.sub(&formula), &g)?)
        })
        .collect()
}

/// s = c·Id on a curved background gives −c·D_Aψ.
fn dirac_variation_scalar(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("dirac_variation.scalar");
    let gr = ctx.grid;
    let xi = metric_to_frame(&SmoothField::random(&mut r, 10, 1, 2, CURVED_METRIC_AMP).metric(gr))?;
    let a = one_form(&mut r, gr, 0.5);
    let psi = spinors(&mut r, gr, 0.5);
    let c = 0.7;
    let d = dirac(&xi, &a, &psi)?;
    let v = dirac_variation(&xi, &a, &psi, &Field::constant(gr, Matrix4::identity() * c))?;
    Ok(Measured::new(v.add(&d.scale(c)).max_abs()))
}

fn variation_order(ctx: &Context, regime: VariationRegime) -> Result<Measured> {
    let errs = dirac_variation_errors(ctx.seed, ctx.grid, regime, &ctx.epsilons)?;
    Ok(Measured::new(loglog_slope(&ctx.epsilons, &errs)).with("finest_error", errs[errs.len() - 1]))
}

fn dirac_variation_order_constant(ctx: &Context) -> Result<Measured> {
    variation_order(ctx, VariationRegime::ConstantBackground)
}

fn dirac_variation_order_rotating(ctx: &Context) -> Result<Measured> {
    variation_order(ctx, VariationRegime::RotatingFrame)
}

// --- formal adjoint ---

/// RMS adjoint defect over `pairs` random (v, w) per grid, on the same smooth fields.
pub fn adjoint_defects(seed: u64, grids: &[Grid], metric_amp: f64, pairs: usize) -> Result<Vec<f64>> {
    grids
        .iter()
        .map(|&gr| {
            let c = background(&mut stream(seed, "adjoint.background"), gr, metric_amp)?;
            let mut r = stream(seed, "adjoint.pairs");
            let mut ss = 0.0;
            for _ in 0..pairs {
                let v = tangent(&mut r, &c);
                let w = covector(&mut r, gr);
                ss += adjoint_defect(&c, &v, &w)?.powi(2);
            }
            Ok((ss / pairs as f64).sqrt())
        })
        .collect()
}

fn adjoint_flat(ctx: &Context) -> Result<Measured> {
    let gr = ctx.grid;
    let c = background(&mut ctx.rng("adjoint.flat.background"), gr, 0.0)?;
    let mut r = ctx.rng("adjoint.flat.pairs");
    let mut worst: f64 = 0.0;
    for _ in 0..ADJOINT_PAIRS {
        let v = tangent(&mut r, &c);
        let w = covector(&mut r, gr);
        worst = worst.max(adjoint_defect(&c, &v, &w)?.abs());
    }
    Ok(Measured::new(worst))
}

/// Smallest observed order of the curved adjoint defect across the refinement ladder.
fn adjoint_curved_order(ctx: &Context) -> Result<Measured> {
    let d = adjoint_defects(ctx.seed, &ctx.grids, CURVED_METRIC_AMP, ADJOINT_PAIRS)?;
    let mut order = f64::INFINITY;
    for k in 1..d.len() {
        let ratio = ctx.grids[k].n() as f64 / ctx.grids[k - 1].n() as f64;
        order = order.min((d[k - 1] / d[k]).ln() / ratio.ln());
    }
    let mut m = Measured::new(order);
    for (gr, e) in ctx.grids.iter().zip(&d) {
        m = m.with(&format!("rms_defect_n{}", gr.n()), *e);
    }
    Ok(m)
}

/// 2div(φ*⊗ζ) = ⟨D_Aφ, ζ⟩ − ⟨φ, D_Aζ⟩ on the flat lattice for rough φ ∈ W₊, ζ ∈ W₋.
fn adjoint_dirac_divergence(ctx: &Context) -> Result<Measured> {
    let gr = ctx.grid;
    let c = background(&mut ctx.rng("adjoint.dirac_divergence.background"), gr, 0.0)?;
    let mut r = ctx.rng("adjoint.dirac_divergence");
    let phi = rough::<Vector2<C64>, _>(&mut r, gr).map(|p| join(*p, Vector2::zeros()));
    let zeta = rough::<Vector2<C64>, _>(&mut r, gr).map(|p| join(Vector2::zeros(), *p));
    let conn = SpinorConnection::new(&c.xi, &c.a)?;
    let lhs = flux_divergence(&c.xi, &phi, &zeta)?.scale(2.0);
    let rhs = dirac_pairing_defect(&conn, &phi, &zeta);
    Ok(Measured::new(lhs.sub(&rhs).max_abs()).with("scale", rhs.max_abs()))
}

/// Covector with χ = 0 and θ pointwise orthogonal to F⁺ and [ψ*⊗ψ]₀: both scalar
/// identities then have zero right-hand side.
fn null_covector(c: &Configuration) -> ObstructionCovector {
    let f = swlab::dirac::curvature(&c.a);
    let theta = Field::from_fn(c.a.grid(), |x| {
        let e = c.xi.frames().at(x);
        let (fp, _) = split_pm(&swlab::dirac::frame_two_form(e, f.at(x)));
        let q = selfdual_of_herm(&quadratic_map(c.psi.at(x)));
        [fp[1] * q[2] - fp[2] * q[1], fp[2] * q[0] - fp[0] * q[2], fp[0] * q[1] - fp[1] * q[0]]
    });
    ObstructionCovector { chi: Field::zeros(c.a.grid()), theta }
}

/// Largest ratio of the derived scalars ‖div(ψ*⊗χ)‖, ‖(F⁺, θ)‖ to the operator residual,
/// over near-kernel covectors w₀ + εw₁.
fn adjoint_kernel_scalars(ctx: &Context) -> Result<Measured> {
    let gr = ctx.grid;
    let c = background(&mut ctx.rng("adjoint.kernel_scalars.background"), gr, 0.0)?;
    let g = c.metric();
    let w0 = null_covector(&c);
    let w1 = covector(&mut ctx.rng("adjoint.kernel_scalars.violation"), gr);
    let mut worst: f64 = 0.0;
    let mut m = Measured::default();
    for eps in NULL_COVECTOR_VIOLATIONS {
        let rep = scalar_identities(&c, &w0.add(&w1.scale(eps)))?;
        let (x, y) = rep.scalars(&g)?;
        let res = rep.residual(&g)?;
        worst = worst.max(x / res).max(y / res);
        m = m.with(&format!("residual_eps{eps:e}"), res);
    }
    m.value = worst;
    Ok(m)
}

// --- Kähler ---

/// J-hermitian SPD metric M + JᵀMJ.
fn hermitian_metric(r: &mut SeededRng, j: &Matrix4<f64>) -> Matrix4<f64> {
    let m = spd(r);
    m + j.transpose() * m * j
}

/// Hermitian/antihermitian splitting: reconstruction, (anti)commutation with J,
/// orthogonality, and idempotence of both projections.
fn kahler_projections(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("kahler.projections");
    let cs = ComplexStructure::standard();
    let j = *cs.matrix();
    let mut err: f64 = 0.0;
    for _ in 0..POINT_SAMPLES {
        let g = hermitian_metric(&mut r, &j);
        let s = g.try_inverse().expect("SPD sample") * symmetric(&mut r);
        let (h, a) = split_sym_at(&s, &cs, &g)?;
        let (hh, ha) = split_sym_at(&h, &cs, &g)?;
        let (ah, aa) = split_sym_at(&a, &cs, &g)?;
        let scale = s.amax().max(1.0);
        err = err
            .max((h + a - s).amax() / scale)
            .max((j * h - h * j).amax() / scale)
            .max((j * a + a * j).amax() / scale)
            .max((2.0 * (h * a).trace()).abs() / (scale * scale))
            .max((hh - h).amax().max(ha.amax()).max(ah.amax()).max((aa - a).amax()) / scale);
    }
    Ok(Measured::new(err))
}

fn kahler_delta_minus_blocks(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("kahler.delta_minus_blocks");
    let cs = ComplexStructure::standard();
    let j = *cs.matrix();
    let mut leak: f64 = 0.0;
    for k in 0..POINT_SAMPLES {
        let g = if k % 2 == 0 { Matrix4::identity() } else { hermitian_metric(&mut r, &j) };
        let s = g.try_inverse().expect("SPD sample") * symmetric(&mut r);
        let s0 = s - Matrix4::identity() * (s.trace() / 4.0);
        let d = delta_minus_split(&s0, &cs, &g)?;
        leak = leak.max(d.herm_leak).max(d.antiherm_leak);
    }
    Ok(Measured::new(leak))
}

/// ∂*∂̄ + ∂̄∂* = 0 (and the conjugate identity) on rough forms, relative to |u|/h².
pub fn kahler_identity_error(seed: u64, grid: Grid) -> f64 {
    let mut r = stream(seed, "kahler.identity");
    let u: FormField = rough(&mut r, grid);
    let scale = u.max_abs() / grid.spacing().powi(2);
    let a = del_adjoint(&del_bar(&u)).add(&del_bar(&del_adjoint(&u)));
    let b = del_bar_adjoint(&del(&u)).add(&del(&del_bar_adjoint(&u)));
    a.max_abs().max(b.max_abs()) / scale
}

fn kahler_identity(ctx: &Context) -> Result<Measured> {
    Ok(Measured::new(kahler_identity_error(ctx.seed, ctx.grid)))
}

/// D on the flat spinor bundle against √2(∂̄_A + ∂̄*_A) through the frozen identification.
fn kahler_dirac_dolbeault(ctx: &Context) -> Result<Measured> {
    let mut r = ctx.rng("kahler.dirac_dolbeault");
    let gr = ctx.grid;
    let a_n = one_form(&mut r, gr, 0.5);
    let f = DolbeaultField { a00: rough(&mut r, gr), a01: rough(&mut r, gr), a02: rough(&mut r, gr) };
    let d = dirac(&SpincStructure::identity(gr), &a_n.scale(2.0), &to_abstract_spinor(&f))?;
    let k = dolbeault(&a_n, &f, 0)?
        .add(&dolbeault(&a_n, &f, 1)?)
        .add(&dolbeault_adjoint(&a_n, &f, 1)?)
        .add(&dolbeault_adjoint(&a_n, &f, 2)?);
    let rhs = to_abstract_spinor(&k.scale(SQRT2));
    Ok(Measured::new(d.sub(&rhs).max_abs()).with("scale", d.max_abs()))
}

fn kernel_measured(rep: &KernelReport, value: f64) -> Measured {
    let gap = if rep.gap.is_finite() { rep.gap } else { f64::MAX };
    Measured::new(value)
        .with("dimension", rep.dimension as f64)
        .with("gap", gap)
        .with("sigma_max", rep.sigma_max)
        .with("smallest_uncounted", rep.smallest_uncounted.min(f64::MAX))
        .with("largest_counted", rep.largest_counted)
}

fn kernel_dim_alpha_one(ctx: &Context) -> Result<Measured> {
    let rep = ctx.kernel(1)?;
    Ok(kernel_measured(&rep, rep.dimension as f64))
}

fn kernel_gap_alpha_one(ctx: &Context) -> Result<Measured> {
    let rep = ctx.kernel(1)?;
    Ok(kernel_measured(&rep, rep.gap.min(f64::MAX)))
}

fn kernel_dim_alpha_zero(ctx: &Context) -> Result<Measured> {
    let rep = ctx.kernel(0)?;
    Ok(kernel_measured(&rep, rep.dimension as f64))
}

/// Dense kernel operator at A = 0 and constant α on the kernel grid, for export.
pub fn kernel_operator(grid: Grid, alpha: f64) -> Result<DMatrix<f64>> {
    Ok(assemble_kernel_operator(&Field::zeros(grid), &Field::constant(grid, C64::new(alpha, 0.0)))?)
}
