use nalgebra::{Matrix3, Matrix4};
use proptest::prelude::*;
use swlab::consts::{ANTISELFDUAL_BASIS, KAHLER_FORM, PAIRS, SELFDUAL_BASIS};
use swlab::metric::*;
use swlab::sample::{gl_plus, matrix, rng, spd, symmetric, traceless_symmetric, uniform, vec6, SeededRng};
use swlab::Error;

const TOL: f64 = 1e-12;

fn max6(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn e(a: usize, b: usize) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(a, b)] = 1.0;
    m
}

fn rotation(r: &mut SeededRng) -> Matrix4<f64> {
    let q = matrix(r).qr().q();
    if q.determinant() < 0.0 {
        q * Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0))
    } else {
        q
    }
}

#[test]
fn flat_hodge_star_examples() {
    let id = Matrix4::identity();
    let e12 = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let e34 = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
    for frame in [Coframe::Coordinate, Coframe::Orthonormal] {
        assert_eq!(hodge_star(&id, &e12, frame).unwrap(), e34);
        for b in SELFDUAL_BASIS {
            assert!(max6(&hodge_star(&id, &b, frame).unwrap(), &b) <= TOL);
        }
        for b in ANTISELFDUAL_BASIS {
            assert!(max6(&hodge_star(&id, &b, frame).unwrap(), &b.map(|x| -x)) <= TOL);
        }
    }
    assert!(max6(&hodge_star(&id, &KAHLER_FORM, Coframe::Coordinate).unwrap(), &KAHLER_FORM) <= TOL);
}

#[test]
fn hodge_star_rejects_non_spd() {
    let g = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
    assert_eq!(hodge_star(&g, &[0.0; 6], Coframe::Coordinate), Err(Error::NotPositiveDefinite));
    assert_eq!(spd_sqrt(&g), Err(Error::NotPositiveDefinite));
    assert_eq!(check_spd(&(Matrix4::identity() + e(0, 1))), Err(Error::NotPositiveDefinite));
}

#[test]
fn hodge_star_is_natural_under_pullback() {
    let mut r = rng(11);
    for _ in 0..50 {
        let p = gl_plus(&mut r);
        let g = p.transpose() * p;
        let w = to_matrix(&vec6(&mut r));
        let pulled = from_matrix(&(p.transpose() * w * p));
        let flat = to_matrix(&hodge_star(&Matrix4::identity(), &from_matrix(&w), Coframe::Coordinate).unwrap());
        let expected = from_matrix(&(p.transpose() * flat * p));
        assert!(max6(&hodge_star(&g, &pulled, Coframe::Coordinate).unwrap(), &expected) <= 1e-11);
    }
}

#[test]
fn selfdual_projection_examples() {
    let id = Matrix4::identity();
    let plus = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
    let minus = [1.0, 0.0, 0.0, 0.0, 0.0, -1.0];
    assert!(max6(&selfdual_project(&id, &plus).unwrap(), &plus) <= TOL);
    assert!(max6(&selfdual_project(&id, &minus).unwrap(), &[0.0; 6]) <= TOL);
}

#[test]
fn pm_coordinates_round_trip() {
    let mut r = rng(12);
    let w = vec6(&mut r);
    let (p, m) = split_pm(&w);
    assert!(max6(&from_pm(&p, &m), &w) <= TOL);
}

#[test]
fn inner_product_conventions() {
    // ‖eᵢ∧eⱼ‖² = 1 in PAIRS coordinates, ‖eᵢ⊗eⱼ‖² = 2 under (s, t) = 2 tr(stᵀ).
    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        let mut w = [0.0; 6];
        w[k] = 1.0;
        assert_eq!(w.iter().map(|x| x * x).sum::<f64>(), 1.0);
        assert_eq!(2.0 * (e(a, b) * e(a, b).transpose()).trace(), 2.0);
    }
    let basis = sym_basis();
    for i in 0..10 {
        for j in 0..10 {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((sym_inner(&basis[i], &basis[j]) - expected).abs() <= TOL);
        }
    }
    assert_eq!(hom_lambda_inner(&Matrix3::identity(), &Matrix3::identity()), 1.5);
}

#[test]
fn i_derivation_examples() {
    let w = [0.3, -1.0, 0.5, 2.0, 0.1, -0.7];
    assert!(max6(&i_derivation(&Matrix4::identity(), &w), &w.map(|x| 2.0 * x)) <= TOL);
    let s0 = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, -1.0));
    let got = i_derivation(&s0, &[1.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
    assert!(max6(&got, &[2.0, 0.0, 0.0, 0.0, 0.0, 2.0]) <= TOL);
}

#[test]
fn traceless_diagonal_exchanges_chiralities() {
    let mut r = rng(13);
    for _ in 0..20 {
        let d = nalgebra::Vector4::new(uniform(&mut r), uniform(&mut r), uniform(&mut r), uniform(&mut r));
        let s0 = Matrix4::from_diagonal(&d.add_scalar(-d.sum() / 4.0));
        for k in 0..3 {
            let (p, _) = split_pm(&i_derivation(&s0, &SELFDUAL_BASIS[k]));
            let (_, m) = split_pm(&i_derivation(&s0, &ANTISELFDUAL_BASIS[k]));
            assert!(p.iter().chain(&m).all(|x| x.abs() <= TOL));
        }
    }
}

#[test]
fn scalar_block_factor_examples() {
    assert_eq!(scalar_block_factor(&Matrix4::identity()), 2.0);
    let s0 = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 2.0, -0.5, -2.5));
    assert_eq!(scalar_block_factor(&s0), 0.0);
    assert!((scalar_block_factor(&(Matrix4::identity() * 1.7)) - 3.4).abs() <= TOL);
}

#[test]
fn scalar_block_factor_matches_the_derivation() {
    let mut r = rng(14);
    for _ in 0..50 {
        let s = symmetric(&mut r);
        let k = scalar_block_factor(&s);
        for (i, b) in SELFDUAL_BASIS.iter().enumerate() {
            let (p, _) = split_pm(&i_derivation(&s, b));
            for j in 0..3 {
                let expected = if i == j { k } else { 0.0 };
                assert!((p[j] - expected).abs() <= TOL);
            }
        }
    }
}

#[test]
fn delta_minus_examples() {
    let id = Matrix4::identity();
    assert_eq!(delta_minus(&id, &Matrix4::zeros()).unwrap(), Matrix3::zeros());
    let s0 = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, -1.0));
    let d = delta_minus(&id, &s0).unwrap();
    // e12 − e34 = √2·ANTISELFDUAL_BASIS[0] ↦ 2(e12 + e34) = 2√2·SELFDUAL_BASIS[0].
    let mut expected = Matrix3::zeros();
    expected[(0, 0)] = 2.0;
    assert!((d - expected).amax() <= TOL);
    assert!(matches!(delta_minus(&id, &Matrix4::identity()), Err(Error::NonzeroTrace(_))));
}

#[test]
fn delta_minus_halves_the_norm() {
    let mut r = rng(15);
    let id = Matrix4::identity();
    for _ in 0..1000 {
        let s0 = traceless_symmetric(&mut r);
        let d = delta_minus(&id, &s0).unwrap();
        let ratio = (hom_lambda_inner(&d, &d) / sym_inner(&s0, &s0)).sqrt();
        assert!((ratio - 0.5).abs() <= TOL, "{ratio}");
    }
}

#[test]
fn delta_minus_is_equivariant_in_curved_frames() {
    let mut r = rng(16);
    for _ in 0..20 {
        let g = spd(&mut r);
        let b = spd_sqrt(&g).unwrap();
        let bi = spd_inv_sqrt(&g).unwrap();
        let t0 = traceless_symmetric(&mut r);
        let s0 = bi * t0 * b;
        let d = delta_minus(&g, &s0).unwrap();
        assert!((d - delta_minus_frame(&t0)).amax() <= 1e-11);
        let ratio = (hom_lambda_inner(&d, &d) / sym_inner(&t0, &t0)).sqrt();
        assert!((ratio - 0.5).abs() <= 1e-11);
    }
}

#[test]
fn spd_sqrt_examples() {
    assert!((spd_sqrt(&Matrix4::identity()).unwrap() - Matrix4::identity()).amax() <= TOL);
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(4.0, 1.0, 1.0, 1.0));
    let expected = Matrix4::from_diagonal(&nalgebra::Vector4::new(2.0, 1.0, 1.0, 1.0));
    assert!((spd_sqrt(&d).unwrap() - expected).amax() <= TOL);
    let mut r = rng(17);
    for _ in 0..20 {
        let g = spd(&mut r);
        let s = spd_sqrt(&g).unwrap();
        assert!((s * s - g).amax() <= TOL);
        assert!((spd_inv_sqrt(&g).unwrap() * s - Matrix4::identity()).amax() <= 1e-11);
    }
}

#[test]
fn polar_decomposition_examples() {
    let mut r = rng(18);
    let id = Matrix4::identity();
    let q = rotation(&mut r);
    let (rq, pq) = polar_decompose(&q, &id).unwrap();
    assert!((rq - q).amax() <= TOL && (pq - id).amax() <= TOL);
    let g = spd(&mut r);
    let (rg, pg) = polar_decompose(&g, &id).unwrap();
    assert!((rg - id).amax() <= TOL && (pg - g).amax() <= TOL);
    let flip = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
    assert_eq!(polar_decompose(&flip, &id), Err(Error::Singular));
}

#[test]
fn holonomy_oracle_vanishes_for_commuting_directions() {
    let id = Matrix4::identity();
    let h = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -0.5, 0.2, 0.0));
    let k = Matrix4::from_diagonal(&nalgebra::Vector4::new(0.3, 0.4, -1.0, 0.7));
    assert_eq!(xi_curvature(&id, &h, &k).unwrap(), Matrix4::zeros());
    assert!(xi_holonomy_oracle(&id, &h, &k, 1e-2).unwrap().amax() <= 1e-9);
}

#[test]
fn holonomy_oracle_guards_the_cone() {
    let id = Matrix4::identity();
    let h = Matrix4::identity() * -2.0;
    assert!(matches!(xi_holonomy_oracle(&id, &h, &e(0, 0), 1.0), Err(Error::LeftSpdCone(_))));
}

#[test]
fn xi_curvature_examples() {
    let g = Matrix4::identity();
    let h = e(0, 0);
    let k = e(0, 1) + e(1, 0);
    let expected = (e(0, 1) - e(1, 0)) * -0.25;
    assert!((xi_curvature(&g, &h, &k).unwrap() - expected).amax() <= TOL);
    assert_eq!(xi_curvature(&g, &k, &k).unwrap(), Matrix4::zeros());
}

/// Errors of the holonomy oracle against the closed form at ε = 1e-2, 5e-3, 2.5e-3.
fn holonomy_errors(r: &mut SeededRng) -> [f64; 3] {
    let g = spd(r);
    let (h, k) = (symmetric(r), symmetric(r));
    let omega = xi_curvature(&g, &h, &k).unwrap();
    [1e-2, 5e-3, 2.5e-3].map(|eps| (xi_holonomy_oracle(&g, &h, &k, eps).unwrap() - omega).norm())
}

#[test]
fn holonomy_converges_at_first_order() {
    let mut r = rng(19);
    for _ in 0..20 {
        let err = holonomy_errors(&mut r);
        for w in err.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 2.0).abs() <= 0.3, "{err:?}");
        }
    }
}

proptest! {
    #[test]
    fn star_is_an_involution(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = spd(&mut r);
        let w = vec6(&mut r);
        let ss = hodge_star(&g, &hodge_star(&g, &w, Coframe::Coordinate).unwrap(), Coframe::Coordinate).unwrap();
        prop_assert!(max6(&ss, &w) <= 1e-11);
    }

    #[test]
    fn projections_are_complementary_idempotents(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = spd(&mut r);
        let w = vec6(&mut r);
        let p = selfdual_project(&g, &w).unwrap();
        let m = antiselfdual_project(&g, &w).unwrap();
        prop_assert!(max6(&selfdual_project(&g, &p).unwrap(), &p) <= 1e-11);
        prop_assert!(max6(&selfdual_project(&g, &m).unwrap(), &[0.0; 6]) <= 1e-11);
        let sum: [f64; 6] = std::array::from_fn(|i| p[i] + m[i]);
        prop_assert!(max6(&sum, &w) <= TOL);
    }

    #[test]
    fn xi_curvature_is_g_antisymmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = spd(&mut r);
        let (h, k) = (symmetric(&mut r), symmetric(&mut r));
        let o = xi_curvature(&g, &h, &k).unwrap();
        prop_assert!((g * o + o.transpose() * g).amax() <= TOL);
        let o2 = xi_curvature(&g, &k, &h).unwrap();
        prop_assert!((o + o2).amax() <= TOL);
    }

    #[test]
    fn polar_decomposition_reconstructs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = spd(&mut r);
        let e0 = gl_plus(&mut r);
        let (rot, pos) = polar_decompose(&e0, &g).unwrap();
        prop_assert!((rot * pos - e0).amax() <= TOL);
        prop_assert!((rot.transpose() * g * rot - g).amax() <= 1e-11);
        prop_assert!(rot.determinant() > 0.0);
        let gp = g * pos;
        prop_assert!((gp - gp.transpose()).amax() <= 1e-11);
        prop_assert!(gp.cholesky().is_some());
    }
}
