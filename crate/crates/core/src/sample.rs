//! Seeded random tensors and band-limited trigonometric fields.
//!
//! Smooth fields are trigonometric polynomials evaluated at lattice points, so the
//! same function can be sampled on several grids for convergence studies.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{Field, Grid};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform<R: Rng>(r: &mut R) -> f64 {
    r.random_range(-1.0..1.0)
}

pub fn complex<R: Rng>(r: &mut R) -> C64 {
    C64::new(uniform(r), uniform(r))
}

pub fn vec4<R: Rng>(r: &mut R) -> [f64; 4] {
    std::array::from_fn(|_| uniform(r))
}

pub fn vec6<R: Rng>(r: &mut R) -> [f64; 6] {
    std::array::from_fn(|_| uniform(r))
}

pub fn half_spinor<R: Rng>(r: &mut R) -> Vector2<C64> {
    Vector2::new(complex(r), complex(r))
}

pub fn spinor<R: Rng>(r: &mut R) -> Vector4<C64> {
    Vector4::new(complex(r), complex(r), complex(r), complex(r))
}

pub fn matrix<R: Rng>(r: &mut R) -> Matrix4<f64> {
    Matrix4::from_fn(|_, _| uniform(r))
}

pub fn complex_matrix2<R: Rng>(r: &mut R) -> Matrix2<C64> {
    Matrix2::from_fn(|_, _| complex(r))
}

pub fn symmetric<R: Rng>(r: &mut R) -> Matrix4<f64> {
    let m = matrix(r);
    0.5 * (m + m.transpose())
}

pub fn traceless_symmetric<R: Rng>(r: &mut R) -> Matrix4<f64> {
    let s = symmetric(r);
    s - Matrix4::identity() * (s.trace() / 4.0)
}

/// Well-conditioned SPD matrix: Id + BBᵀ with entries of B in [−½, ½].
pub fn spd<R: Rng>(r: &mut R) -> Matrix4<f64> {
    let b = matrix(r) * 0.5;
    Matrix4::identity() + b * b.transpose()
}

/// Matrix with positive determinant, close enough to the identity to be well conditioned.
pub fn gl_plus<R: Rng>(r: &mut R) -> Matrix4<f64> {
    loop {
        let m = Matrix4::identity() + matrix(r) * 0.4;
        if m.determinant() > 0.1 {
            return m;
        }
    }
}

/// Random g-symmetric endomorphism in coordinates: G⁻¹B with B symmetric.
pub fn g_symmetric<R: Rng>(r: &mut R, g: &Matrix4<f64>) -> Matrix4<f64> {
    g.try_inverse().expect("invertible metric") * symmetric(r)
}

/// Finite sum of a_k cos(k·x) + b_k sin(k·x).
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    pub terms: Vec<([i32; 4], f64, f64)>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        TrigPoly { terms: vec![([0; 4], c, 0.0)] }
    }

    /// `count` random modes with |k|_∞ ≤ `max_mode`, coefficients in [−amp, amp].
    pub fn random<R: Rng>(r: &mut R, max_mode: i32, count: usize, amp: f64) -> Self {
        let terms = (0..count)
            .map(|_| {
                let k = std::array::from_fn(|_| r.random_range(-max_mode..=max_mode));
                (k, amp * uniform(r), amp * uniform(r))
            })
            .collect();
        TrigPoly { terms }
    }

    pub fn eval(&self, x: &[f64; 4]) -> f64 {
        self.terms
            .iter()
            .map(|(k, a, b)| {
                let ph: f64 = (0..4).map(|i| k[i] as f64 * x[i]).sum();
                a * ph.cos() + b * ph.sin()
            })
            .sum()
    }

    pub fn eval_grad(&self, x: &[f64; 4]) -> [f64; 4] {
        let mut g = [0.0; 4];
        for (k, a, b) in &self.terms {
            let ph: f64 = (0..4).map(|i| k[i] as f64 * x[i]).sum();
            let d = -a * ph.sin() + b * ph.cos();
            for i in 0..4 {
                g[i] += k[i] as f64 * d;
            }
        }
        g
    }

    pub fn sample(&self, grid: Grid) -> Field<f64> {
        Field::from_fn(grid, |i| self.eval(&grid.point(i)))
    }
}

/// A fixed list of trigonometric polynomials that together describe one smooth
/// tensor field; `sample` reassembles the pointwise value.
#[derive(Clone, Debug)]
pub struct SmoothField {
    pub comps: Vec<TrigPoly>,
}

impl SmoothField {
    pub fn random<R: Rng>(r: &mut R, ncomp: usize, max_mode: i32, count: usize, amp: f64) -> Self {
        SmoothField { comps: (0..ncomp).map(|_| TrigPoly::random(r, max_mode, count, amp)).collect() }
    }

    pub fn values_at(&self, x: &[f64; 4]) -> Vec<f64> {
        self.comps.iter().map(|p| p.eval(x)).collect()
    }

    pub fn sample_with<V: crate::field::Value, F: Fn(&[f64]) -> V + Sync + Send>(&self, grid: Grid, f: F) -> Field<V> {
        Field::from_fn(grid, |i| f(&self.values_at(&grid.point(i))))
    }

    pub fn scalar(&self, grid: Grid) -> Field<f64> {
        self.sample_with(grid, |v| v[0])
    }

    pub fn one_form(&self, grid: Grid) -> Field<[f64; 4]> {
        self.sample_with(grid, |v| [v[0], v[1], v[2], v[3]])
    }

    pub fn spinor(&self, grid: Grid) -> Field<Vector4<C64>> {
        self.sample_with(grid, |v| {
            Vector4::new(C64::new(v[0], v[1]), C64::new(v[2], v[3]), C64::new(v[4], v[5]), C64::new(v[6], v[7]))
        })
    }

    /// Symmetric matrix from the first 10 components (diagonal, then `PAIRS`).
    pub fn symmetric(&self, grid: Grid) -> Field<Matrix4<f64>> {
        self.sample_with(grid, sym_from10)
    }

    /// Id + symmetric perturbation; positive definite when the amplitude is small.
    pub fn metric(&self, grid: Grid) -> Field<Matrix4<f64>> {
        self.sample_with(grid, |v| Matrix4::identity() + sym_from10(v))
    }
}

pub fn sym_from10(v: &[f64]) -> Matrix4<f64> {
    let mut m = Matrix4::from_diagonal(&Vector4::new(v[0], v[1], v[2], v[3]));
    for (k, &(a, b)) in crate::consts::PAIRS.iter().enumerate() {
        m[(a, b)] = v[4 + k];
        m[(b, a)] = v[4 + k];
    }
    m
}

/// Smooth random fields for a test scenario on a given grid.
pub fn smooth_metric<R: Rng>(r: &mut R, grid: Grid, amp: f64) -> Field<Matrix4<f64>> {
    SmoothField::random(r, 10, 1, 2, amp).metric(grid)
}

pub fn smooth_spinor<R: Rng>(r: &mut R, grid: Grid) -> Field<Vector4<C64>> {
    SmoothField::random(r, 8, 1, 2, 0.5).spinor(grid)
}

pub fn smooth_one_form<R: Rng>(r: &mut R, grid: Grid) -> Field<[f64; 4]> {
    SmoothField::random(r, 4, 1, 2, 0.5).one_form(grid)
}

/// Independent uniform values at every lattice point (not smooth).
pub fn rough<V: crate::field::Value, R: Rng>(r: &mut R, grid: Grid) -> Field<V> {
    let width = V::COMPONENTS * if V::COMPLEX { 2 } else { 1 };
    let values = (0..grid.len())
        .map(|_| {
            let reals: Vec<f64> = (0..width).map(|_| uniform(r)).collect();
            V::from_reals(&reals)
        })
        .collect();
    Field::from_values(grid, values).expect("length matches grid")
}
