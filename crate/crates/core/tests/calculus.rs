mod common;

use common::slope;
use nalgebra::{Matrix4, Vector4};
use proptest::prelude::*;
use swlab::calculus::*;
use swlab::field::{Field, Grid};
use swlab::sample::{rng, rough, SeededRng, SmoothField, TrigPoly};
use swlab::Error;

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn grid(n: usize) -> Grid {
    Grid::new(n).unwrap()
}

fn smooth_metric(r: &mut SeededRng, amp: f64) -> SmoothField {
    SmoothField::random(r, 10, 1, 2, amp)
}

/// g-symmetric endomorphism G⁻¹B for a smooth symmetric B.
fn g_sym(g: &Field<Matrix4<f64>>, b: &SmoothField) -> Field<Matrix4<f64>> {
    g.zip(&b.symmetric(g.grid()), |g, b| g.try_inverse().unwrap() * b)
}

fn pullback(g: &Field<Matrix4<f64>>, s: &Field<Matrix4<f64>>, t: f64) -> Field<Matrix4<f64>> {
    g.zip(s, |g, s| {
        let phi = Matrix4::identity() + s * t;
        phi.transpose() * g * phi
    })
}

fn rank3_diff(a: &Field<Rank3>, b: &Field<Rank3>) -> Field<Rank3> {
    a.zip(b, |x, y| std::array::from_fn(|k| x[k] - y[k]))
}

#[test]
fn grid_rejects_bad_sizes() {
    assert_eq!(Grid::new(3), Err(Error::BadGrid(3)));
    assert_eq!(Grid::new(6).map(|g| g.len()), Ok(1296));
}

#[test]
fn derivative_of_constant_vanishes() {
    let f = Field::constant(grid(6), [1.0, -2.0, 0.5, 3.0]);
    for a in 0..4 {
        assert_eq!(partial_derivative(&f, a).max_abs(), 0.0);
    }
}

#[test]
fn derivative_of_sine() {
    // Central differences of sin are cos·sin(h)/h exactly, hence cos + O(h²).
    let mut err = vec![];
    for n in [8, 16] {
        let gr = grid(n);
        let h = gr.spacing();
        let f = Field::from_fn(gr, |i| gr.point(i)[1].sin());
        let d = partial_derivative(&f, 1);
        let exact = Field::from_fn(gr, |i| gr.point(i)[1].cos() * h.sin() / h);
        assert!(d.sub(&exact).max_abs() <= 1e-14);
        err.push(d.sub(&Field::from_fn(gr, |i| gr.point(i)[1].cos())).max_abs());
        assert!(partial_derivative(&f, 0).max_abs() == 0.0);
    }
    assert!(((err[0] / err[1]).log2() - 2.0).abs() < 0.1);
}

#[test]
fn derivatives_are_skew_adjoint_and_commute() {
    let gr = grid(4);
    let mut r = rng(41);
    let f: Field<f64> = rough(&mut r, gr);
    let h: Field<f64> = rough(&mut r, gr);
    let flat = flat_metric(gr);
    for a in 0..4 {
        let lhs = l2_inner(&partial_derivative(&f, a), &h, &flat).unwrap();
        let rhs = l2_inner(&f, &partial_derivative(&h, a), &flat).unwrap();
        assert!((lhs + rhs).abs() <= 1e-12);
        for b in 0..4 {
            let ab = partial_derivative(&partial_derivative(&f, a), b);
            let ba = partial_derivative(&partial_derivative(&f, b), a);
            assert!(ab.sub(&ba).max_abs() <= 1e-12);
        }
    }
}

#[test]
fn exterior_derivative_squares_to_zero() {
    let gr = grid(6);
    let mut r = rng(42);
    let a: Field<[f64; 4]> = rough(&mut r, gr);
    assert!(exterior_d2(&exterior_d1(&a)).max_abs() <= 1e-12);
    let u: Field<f64> = rough(&mut r, gr);
    assert!(exterior_d1(&gradient(&u)).max_abs() <= 1e-12);
}

#[test]
fn volume_and_tensor_norm_conventions() {
    let gr = grid(4);
    let flat = flat_metric(gr);
    let one = Field::constant(gr, 1.0);
    assert!((l2_inner(&one, &one, &flat).unwrap() - TAU.powi(4)).abs() <= 1e-9);
    // e_i⊗e_i has pointwise norm² 2 under 2 tr(st).
    let mut e00 = Matrix4::zeros();
    e00[(0, 0)] = 1.0;
    let s = Field::constant(gr, e00);
    assert!((l2_inner(&s, &s, &flat).unwrap() - 2.0 * TAU.powi(4)).abs() <= 1e-9);
    // e^i∧e^j has norm² 1.
    let w = Field::constant(gr, [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    assert!((l2_inner(&w, &w, &flat).unwrap() - TAU.powi(4)).abs() <= 1e-9);
    // Volume density √det g.
    let scaled = Field::constant(gr, Matrix4::identity() * 4.0);
    assert!((l2_inner(&one, &one, &scaled).unwrap() - 16.0 * TAU.powi(4)).abs() <= 1e-8);
    assert!(matches!(l2_inner(&one, &Field::constant(grid(6), 1.0), &flat), Err(Error::ShapeMismatch(_))));
}

#[test]
fn christoffel_of_flat_metric_vanishes() {
    let gr = grid(4);
    assert_eq!(christoffel(&flat_metric(gr)).unwrap().max_abs(), 0.0);
    let mut bad = flat_metric(gr);
    bad.values_mut()[3] = Matrix4::identity() * -1.0;
    assert_eq!(christoffel(&bad).unwrap_err(), Error::NotPositiveDefinite);
}

#[test]
fn christoffel_of_conformal_metric() {
    let mut r = rng(43);
    let f = TrigPoly::random(&mut r, 1, 3, 0.2);
    let mut err = vec![];
    for n in [8, 16] {
        let gr = grid(n);
        let g = Field::from_fn(gr, |i| Matrix4::identity() * (2.0 * f.eval(&gr.point(i))).exp());
        let gamma = christoffel(&g).unwrap();
        let exact = Field::from_fn(gr, |i| {
            let df = f.eval_grad(&gr.point(i));
            let mut out = [0.0; 64];
            for k in 0..4 {
                for a in 0..4 {
                    for b in 0..4 {
                        let d = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
                        out[r3(k, a, b)] = d(k, a) * df[b] + d(k, b) * df[a] - d(a, b) * df[k];
                    }
                }
            }
            out
        });
        err.push(rank3_diff(&gamma, &exact).max_abs());
    }
    let order = (err[0] / err[1]).log2();
    assert!(order > 1.8, "order {order} {err:?}");
}

#[test]
fn christoffel_is_symmetric_and_metric_compatible() {
    let mut r = rng(44);
    let m = smooth_metric(&mut r, 0.1);
    for n in [6, 8] {
        let g = m.metric(grid(n));
        let gamma = christoffel(&g).unwrap();
        for v in gamma.values() {
            for k in 0..4 {
                for i in 0..4 {
                    for j in 0..4 {
                        assert_eq!(v[r3(k, i, j)], v[r3(k, j, i)]);
                    }
                }
            }
        }
        // Metricity is an algebraic consequence of the discrete formula.
        assert!(metricity_defect(&g).unwrap().max_abs() <= 1e-12);
    }
}

#[test]
fn lc_variation_vanishes_for_constant_s_on_flat_metric() {
    let gr = grid(4);
    let s = Field::constant(gr, Matrix4::new(1.0, 0.5, 0.0, 0.0, 0.5, 2.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.3, 0.0, 0.0, 0.3, 0.0));
    assert!(lc_variation(&flat_metric(gr), &s).unwrap().max_abs() <= 1e-15);
    assert!(omega_dot(&flat_metric(gr), &s).unwrap().max_abs() <= 1e-15);
}

fn lc_fd_errors(g: &Field<Matrix4<f64>>, s: &Field<Matrix4<f64>>, ts: &[f64]) -> (Vec<f64>, f64) {
    let formula = lc_variation(g, s).unwrap();
    let scale = formula.flat_norm();
    let errs = ts
        .iter()
        .map(|&t| {
            let plus = christoffel(&pullback(g, s, t)).unwrap();
            let minus = christoffel(&pullback(g, s, -t)).unwrap();
            let fd = rank3_diff(&plus, &minus).map(|v| v.map(|x| x * 0.5 / t));
            rank3_diff(&fd, &formula).flat_norm() / scale
        })
        .collect();
    (errs, scale)
}

#[test]
fn lc_variation_matches_difference_quotient() {
    let mut r = rng(45);
    let g = smooth_metric(&mut r, 0.1).metric(grid(8));
    let s = g_sym(&g, &SmoothField::random(&mut r, 10, 1, 2, 0.05));
    let (rel, scale) = lc_fd_errors(&g, &s, &[1e-3]);
    assert!(scale > 1e-2 && rel[0] <= 1e-6, "relative {:e}", rel[0]);
    let ts = [1e-2, 5e-3, 2.5e-3];
    let (errs, _) = lc_fd_errors(&g, &s, &ts);
    let p = slope(&ts, &errs);
    assert!((p - 2.0).abs() <= 0.1, "slope {p} {errs:?}");
}

#[test]
fn lc_variation_is_symmetric_in_lower_indices() {
    let mut r = rng(46);
    let g = smooth_metric(&mut r, 0.1).metric(grid(6));
    let s = g_sym(&g, &SmoothField::random(&mut r, 10, 1, 2, 0.5));
    for v in lc_variation(&g, &s).unwrap().values() {
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    assert!((v[r3(k, i, j)] - v[r3(k, j, i)]).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn omega_dot_is_skew() {
    let mut r = rng(47);
    let g = smooth_metric(&mut r, 0.1).metric(grid(6));
    let s = g_sym(&g, &SmoothField::random(&mut r, 10, 1, 2, 0.5));
    for v in omega_dot(&g, &s).unwrap().values() {
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    assert!((v[r3(i, j, k)] + v[r3(i, k, j)]).abs() <= 1e-12);
                }
            }
        }
    }
}

/// Defects of Σ gⁱʲ ∇̇(s)_ij♭ = 2 div s − d tr s and Σ_b T_abb = (d tr s)(e_a).
fn contraction_defects(g: &Field<Matrix4<f64>>, s: &Field<Matrix4<f64>>) -> (f64, f64) {
    let lc = lc_variation(g, s).unwrap();
    let div = divergence(g, s).unwrap();
    let dtr = d_trace(g, s).unwrap();
    let first = Field::from_fn(g.grid(), |x| {
        let (gx, v) = (g.at(x), lc.at(x));
        let gi = gx.try_inverse().unwrap();
        let up: [f64; 4] = std::array::from_fn(|k| (0..16).map(|ij| gi[(ij / 4, ij % 4)] * v[r3(k, ij / 4, ij % 4)]).sum());
        let low = gx * Vector4::from(up);
        let expected: [f64; 4] = std::array::from_fn(|l| 2.0 * div.at(x)[l] - dtr.at(x)[l]);
        std::array::from_fn::<f64, 4, _>(|l| low[l] - expected[l])
    });
    let frame = canonical_frame(g).unwrap();
    let t = frame_covariant_sym(g, s, &frame).unwrap();
    let second = Field::from_fn(g.grid(), |x| {
        let e = frame.at(x);
        std::array::from_fn::<f64, 4, _>(|a| {
            let lhs: f64 = (0..4).map(|b| t.at(x)[r3(a, b, b)]).sum();
            let rhs: f64 = (0..4).map(|mu| dtr.at(x)[mu] * e[(mu, a)]).sum();
            lhs - rhs
        })
    });
    (first.max_abs(), second.max_abs())
}

#[test]
fn contraction_identities() {
    let mut r = rng(48);
    let b = SmoothField::random(&mut r, 10, 1, 2, 0.5);
    let flat = flat_metric(grid(6));
    let (d1, d2) = contraction_defects(&flat, &b.symmetric(grid(6)));
    assert!(d1 <= 1e-12 && d2 <= 1e-12, "{d1:e} {d2:e}");
    // On curved metrics they hold up to the lattice product rule in ∂(gⁱʲ s♭_ij).
    // The local order is still rising at these sizes: about 1.59 at 8 → 16 and 1.78 at 12 → 24.
    let m = smooth_metric(&mut r, 0.1);
    let errs: Vec<(f64, f64)> = [8, 16, 12, 24]
        .iter()
        .map(|&n| {
            let g = m.metric(grid(n));
            contraction_defects(&g, &g_sym(&g, &b))
        })
        .collect();
    let order = |a: f64, b: f64| (a / b).log2();
    let coarse = order(errs[0].0, errs[1].0);
    let fine = order(errs[2].0, errs[3].0);
    assert!(fine > coarse && fine > 1.7, "orders {coarse} {fine}");
    let coarse = order(errs[0].1, errs[1].1);
    let fine = order(errs[2].1, errs[3].1);
    assert!(fine > coarse && fine > 1.7, "orders {coarse} {fine}");
}

fn adjoint_defect(g: &Field<Matrix4<f64>>, s: &Field<Matrix4<f64>>, sigma: &Field<[f64; 4]>, factor: f64) -> f64 {
    let lhs = l2_inner(&divergence(g, s).unwrap(), sigma, g).unwrap();
    let l = lie_metric(g, &sharp_of(g, sigma).unwrap()).unwrap();
    let rhs = l2_inner(s, &l.scale(-factor), g).unwrap();
    (lhs - rhs).abs() / lhs.abs().max(1.0)
}

#[test]
fn divergence_adjoint_carries_a_quarter() {
    let gr = grid(4);
    let mut r = rng(50);
    let flat = flat_metric(gr);
    let s = rough::<Matrix4<f64>, _>(&mut r, gr).map(|m| 0.5 * (m + m.transpose()));
    let sigma: Field<[f64; 4]> = rough(&mut r, gr);
    assert!(adjoint_defect(&flat, &s, &sigma, 0.25) <= 1e-12);
    assert!(adjoint_defect(&flat, &s, &sigma, 0.5) > 1e-2);
}

#[test]
fn divergence_adjoint_on_curved_metric_is_second_order() {
    let mut r = rng(51);
    let m = smooth_metric(&mut r, 0.1);
    let b = SmoothField::random(&mut r, 10, 1, 2, 0.5);
    let a = SmoothField::random(&mut r, 4, 1, 2, 0.5);
    let mut err = vec![];
    for n in [8, 16] {
        let g = m.metric(grid(n));
        err.push(adjoint_defect(&g, &g_sym(&g, &b), &a.one_form(grid(n)), 0.25));
    }
    let order = (err[0] / err[1]).log2();
    assert!(order > 1.8, "order {order} {err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn l2_inner_is_symmetric_and_bilinear(seed in any::<u64>(), c in -3.0f64..3.0) {
        let gr = grid(4);
        let mut r = rng(seed);
        let g = smooth_metric(&mut r, 0.1).metric(gr);
        let (a, b, d): (Field<[f64; 4]>, Field<[f64; 4]>, Field<[f64; 4]>) = (rough(&mut r, gr), rough(&mut r, gr), rough(&mut r, gr));
        let ab = l2_inner(&a, &b, &g).unwrap();
        prop_assert!((ab - l2_inner(&b, &a, &g).unwrap()).abs() <= 1e-10);
        let lhs = l2_inner(&a.add(&d.scale(c)), &b, &g).unwrap();
        let rhs = ab + c * l2_inner(&d, &b, &g).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9);
    }
}

