//! Periodic lattice on the flat 4-torus [0, 2π)⁴ and fields of pointwise values.
//!
//! Points are stored row-major with axis 0 slowest. Pointwise work runs in parallel;
//! every reduction goes through `pairwise_sum` on an ordered vector so the result
//! does not depend on the thread count.

use std::io::{BufRead, Write};

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::BadGrid(n));
        }
        Ok(Grid { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(4)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(4)
    }

    pub fn index(&self, c: [usize; 4]) -> usize {
        ((c[0] * self.n + c[1]) * self.n + c[2]) * self.n + c[3]
    }

    pub fn coords(&self, mut idx: usize) -> [usize; 4] {
        let mut c = [0; 4];
        for a in (0..4).rev() {
            c[a] = idx % self.n;
            idx /= self.n;
        }
        c
    }

    /// Index of the point displaced by `k` steps along `axis` (0-based), with wrap-around.
    pub fn shift(&self, idx: usize, axis: usize, k: isize) -> usize {
        let mut c = self.coords(idx);
        let n = self.n as isize;
        c[axis] = (((c[axis] as isize + k) % n + n) % n) as usize;
        self.index(c)
    }

    pub fn point(&self, idx: usize) -> [f64; 4] {
        let h = self.spacing();
        self.coords(idx).map(|c| c as f64 * h)
    }
}

/// Values that can live at a lattice point: a real vector space with a file encoding.
pub trait Value: Copy + Send + Sync + 'static {
    /// Number of scalar components in the file encoding.
    const COMPONENTS: usize;
    const COMPLEX: bool;
    fn zero() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn scale(&self, c: f64) -> Self;
    /// Appends the components as f64 (complex values as re, im pairs).
    fn push_reals(&self, out: &mut Vec<f64>);
    fn from_reals(r: &[f64]) -> Self;

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }
}

impl Value for f64 {
    const COMPONENTS: usize = 1;
    const COMPLEX: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn push_reals(&self, out: &mut Vec<f64>) {
        out.push(*self);
    }
    fn from_reals(r: &[f64]) -> Self {
        r[0]
    }
}

impl Value for C64 {
    const COMPONENTS: usize = 1;
    const COMPLEX: bool = true;
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn push_reals(&self, out: &mut Vec<f64>) {
        out.extend([self.re, self.im]);
    }
    fn from_reals(r: &[f64]) -> Self {
        C64::new(r[0], r[1])
    }
}

impl<const N: usize> Value for [f64; N] {
    const COMPONENTS: usize = N;
    const COMPLEX: bool = false;
    fn zero() -> Self {
        [0.0; N]
    }
    fn add(&self, o: &Self) -> Self {
        std::array::from_fn(|k| self[k] + o[k])
    }
    fn scale(&self, c: f64) -> Self {
        self.map(|x| x * c)
    }
    fn push_reals(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(self);
    }
    fn from_reals(r: &[f64]) -> Self {
        std::array::from_fn(|k| r[k])
    }
}

impl<const N: usize> Value for [C64; N] {
    const COMPONENTS: usize = N;
    const COMPLEX: bool = true;
    fn zero() -> Self {
        [C64::new(0.0, 0.0); N]
    }
    fn add(&self, o: &Self) -> Self {
        std::array::from_fn(|k| self[k] + o[k])
    }
    fn scale(&self, c: f64) -> Self {
        self.map(|x| x * c)
    }
    fn push_reals(&self, out: &mut Vec<f64>) {
        for z in self {
            out.extend([z.re, z.im]);
        }
    }
    fn from_reals(r: &[f64]) -> Self {
        std::array::from_fn(|k| C64::new(r[2 * k], r[2 * k + 1]))
    }
}

macro_rules! nalgebra_value {
    ($t:ty, $scalar:ty, $n:expr, $complex:expr) => {
        impl Value for $t {
            const COMPONENTS: usize = $n;
            const COMPLEX: bool = $complex;
            fn zero() -> Self {
                <$t>::zeros()
            }
            fn add(&self, o: &Self) -> Self {
                self + o
            }
            fn scale(&self, c: f64) -> Self {
                self * <$scalar>::from(c)
            }
            fn push_reals(&self, out: &mut Vec<f64>) {
                // Row-major so that a matrix reads naturally in the file.
                for i in 0..self.nrows() {
                    for j in 0..self.ncols() {
                        <$scalar as Value>::push_reals(&self[(i, j)], out);
                    }
                }
            }
            fn from_reals(r: &[f64]) -> Self {
                let w = if $complex { 2 } else { 1 };
                let cols = <$t>::zeros().ncols();
                <$t>::from_fn(|i, j| <$scalar as Value>::from_reals(&r[w * (i * cols + j)..]))
            }
        }
    };
}

nalgebra_value!(Matrix4<f64>, f64, 16, false);
nalgebra_value!(Matrix2<C64>, C64, 4, true);
nalgebra_value!(Matrix4<C64>, C64, 16, true);
nalgebra_value!(Vector4<C64>, C64, 4, true);
nalgebra_value!(Vector2<C64>, C64, 2, true);
nalgebra_value!(Vector4<f64>, f64, 4, false);

#[derive(Clone, Debug, PartialEq)]
pub struct Field<V> {
    grid: Grid,
    values: Vec<V>,
}

impl<V: Value> Field<V> {
    pub fn from_fn<F: Fn(usize) -> V + Sync + Send>(grid: Grid, f: F) -> Self {
        let values = (0..grid.len()).into_par_iter().map(f).collect();
        Field { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<V>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!("{} values for {} points", values.len(), grid.len())));
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: Grid, v: V) -> Self {
        Field { grid, values: vec![v; grid.len()] }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, V::zero())
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [V] {
        &mut self.values
    }

    pub fn at(&self, idx: usize) -> &V {
        &self.values[idx]
    }

    pub fn map<W: Value, F: Fn(&V) -> W + Sync + Send>(&self, f: F) -> Field<W> {
        Field { grid: self.grid, values: self.values.par_iter().map(f).collect() }
    }

    pub fn map_indexed<W: Value, F: Fn(usize, &V) -> W + Sync>(&self, f: F) -> Field<W> {
        Field { grid: self.grid, values: self.values.par_iter().enumerate().map(|(i, v)| f(i, v)).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v.scale(c))
    }

    pub fn zip<U: Value, W: Value, F: Fn(&V, &U) -> W + Sync>(&self, o: &Field<U>, f: F) -> Field<W> {
        assert_eq!(self.grid, o.grid, "fields on different grids");
        Field {
            grid: self.grid,
            values: self.values.par_iter().zip(o.values.par_iter()).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn check_same_grid<U>(&self, o: &Field<U>) -> Result<()> {
        if self.grid != o.grid {
            return Err(Error::ShapeMismatch(format!("grid {} vs {}", self.grid.n, o.grid.n)));
        }
        Ok(())
    }

    /// Sum of `f` over all points, deterministic in the summation order.
    pub fn sum_by<F: Fn(usize, &V) -> f64 + Sync>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self.values.par_iter().enumerate().map(|(i, v)| f(i, v)).collect();
        pairwise_sum(&terms)
    }

    /// Largest absolute component over the field.
    pub fn max_abs(&self) -> f64 {
        let mut buf = Vec::new();
        let mut m: f64 = 0.0;
        for v in &self.values {
            buf.clear();
            v.push_reals(&mut buf);
            for x in &buf {
                m = m.max(x.abs());
            }
        }
        m
    }

    /// Unweighted Euclidean norm of all components times the cell volume, i.e. the flat L² norm
    /// with respect to the component-wise inner product.
    pub fn flat_norm(&self) -> f64 {
        let vol = self.grid.cell_volume();
        (self.sum_by(|_, v| {
            let mut buf = Vec::with_capacity(V::COMPONENTS * 2);
            v.push_reals(&mut buf);
            buf.iter().map(|x| x * x).sum()
        }) * vol)
            .sqrt()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            dims: [self.grid.n; 4],
            components: V::COMPONENTS,
            dtype: if V::COMPLEX { "c128".into() } else { "f64".into() },
        };
        let line = serde_json::to_string(&header).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
        let mut buf = Vec::with_capacity(V::COMPONENTS * 2);
        for v in &self.values {
            buf.clear();
            v.push_reals(&mut buf);
            for x in &buf {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: Header = serde_json::from_str(line.trim_end()).map_err(|e| Error::Format(e.to_string()))?;
        let n = header.dims[0];
        if header.dims.iter().any(|&d| d != n) {
            return Err(Error::Format(format!("non-cubic dims {:?}", header.dims)));
        }
        let grid = Grid::new(n)?;
        let want_dtype = if V::COMPLEX { "c128" } else { "f64" };
        if header.components != V::COMPONENTS || header.dtype != want_dtype {
            return Err(Error::Format(format!(
                "expected {} {} components, found {} {}",
                V::COMPONENTS,
                want_dtype,
                header.components,
                header.dtype
            )));
        }
        let width = V::COMPONENTS * if V::COMPLEX { 2 } else { 1 };
        let mut bytes = vec![0u8; width * 8];
        let mut reals = vec![0.0; width];
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut bytes)?;
            for (k, ch) in bytes.chunks_exact(8).enumerate() {
                reals[k] = f64::from_le_bytes(ch.try_into().expect("chunk of 8"));
            }
            values.push(V::from_reals(&reals));
        }
        Ok(Field { grid, values })
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    dims: [usize; 4],
    components: usize,
    dtype: String,
}

/// Writes a dense real matrix with the same header convention, dims = [rows, cols].
pub fn write_matrix<W: Write>(m: &nalgebra::DMatrix<f64>, mut w: W) -> Result<()> {
    let header = serde_json::json!({"dims": [m.nrows(), m.ncols()], "components": 1, "dtype": "f64"});
    w.write_all(header.to_string().as_bytes())?;
    w.write_all(b"\n")?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    Ok(())
}

/// Fixed-tree pairwise summation.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 16 {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}
