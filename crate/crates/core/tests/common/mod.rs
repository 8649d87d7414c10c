#![allow(dead_code)]

use nalgebra::{Matrix4, Vector2};
use swlab::dirac::{metric_to_frame, SpincStructure};
use swlab::field::{Field, Grid};
use swlab::sample::{rng, SeededRng, SmoothField};
use swlab::sw::{Configuration, ObstructionCovector, TangentVector};
use swlab::C64;

pub fn half_spinors(r: &mut SeededRng, grid: Grid, amp: f64) -> Field<Vector2<C64>> {
    SmoothField::random(r, 4, 1, 2, amp).sample_with(grid, |v| Vector2::new(C64::new(v[0], v[1]), C64::new(v[2], v[3])))
}

/// Smooth field bounded away from zero: constant plus a perturbation.
pub fn nonvanishing_half_spinors(r: &mut SeededRng, grid: Grid) -> Field<Vector2<C64>> {
    let p = half_spinors(r, grid, 0.3);
    p.map(|v| v + Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.5)))
}

pub fn one_form(r: &mut SeededRng, grid: Grid, amp: f64) -> Field<[f64; 4]> {
    SmoothField::random(r, 4, 1, 2, amp).one_form(grid)
}

pub fn selfdual(r: &mut SeededRng, grid: Grid, amp: f64) -> Field<[f64; 3]> {
    SmoothField::random(r, 3, 1, 2, amp).sample_with(grid, |v| [v[0], v[1], v[2]])
}

/// g-symmetric endomorphism field G⁻¹B with B smooth symmetric.
pub fn g_symmetric(r: &mut SeededRng, g: &Field<Matrix4<f64>>, amp: f64) -> Field<Matrix4<f64>> {
    let b = SmoothField::random(r, 10, 1, 2, amp).symmetric(g.grid());
    g.zip(&b, |g, b| g.try_inverse().unwrap() * b)
}

pub fn curved_xi(r: &mut SeededRng, grid: Grid, amp: f64) -> SpincStructure {
    let g = SmoothField::random(r, 10, 1, 2, amp).metric(grid);
    metric_to_frame(&g).unwrap()
}

pub fn config(seed: u64, grid: Grid, metric_amp: f64) -> Configuration {
    let mut r = rng(seed);
    let xi = if metric_amp > 0.0 { curved_xi(&mut r, grid, metric_amp) } else { SpincStructure::identity(grid) };
    let a = one_form(&mut r, grid, 0.5);
    let psi = nonvanishing_half_spinors(&mut r, grid);
    Configuration::new(a, psi, xi).unwrap()
}

pub fn tangent(r: &mut SeededRng, c: &Configuration) -> TangentVector {
    let grid = c.a.grid();
    let g = c.metric();
    TangentVector { tau: one_form(r, grid, 0.5), phi: half_spinors(r, grid, 0.5), s: g_symmetric(r, &g, 0.5) }
}

pub fn covector(r: &mut SeededRng, grid: Grid) -> ObstructionCovector {
    ObstructionCovector { chi: half_spinors(r, grid, 0.5), theta: selfdual(r, grid, 0.5) }
}

/// Least-squares slope of log(err) against log(h).
pub fn slope(h: &[f64], err: &[f64]) -> f64 {
    let n = h.len() as f64;
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let num: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}
