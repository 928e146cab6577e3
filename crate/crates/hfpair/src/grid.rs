//! Discretized function spaces: cell-centered cubic boxes with spectral
//! differentiation, and radial rays with finite-volume quadrature.
//!
//! The cubic grid covers [-L, L)^3 with n cells per axis and nodes at
//! x_i = -L + (i + 1/2) h, h = 2L/n, so no node sits on the Coulomb
//! singularity. The radial grid covers (0, R] with nodes r_j = (j + 1/2) dr
//! and quadrature weight 4π r_j^2 dr.

use crate::error::{HfError, Result};
use crate::fft;
use once_cell::sync::Lazy;
use rustfft::num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

/// Cubic box discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(HfError::Config(format!("grid n must be even and >= 8, got {n}")));
        }
        if !(half_width > 0.0) {
            return Err(HfError::Config(format!("grid half-width must be positive, got {half_width}")));
        }
        Ok(GridSpec { n, half_width })
    }

    #[inline]
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.h()
    }

    /// Cartesian coordinates of node `idx` (x fastest).
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        [self.coord(idx % n), self.coord((idx / n) % n), self.coord(idx / (n * n))]
    }
}

/// Real scalar field sampled on a `GridSpec`.
#[derive(Debug, Clone)]
pub struct Field3D {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl Field3D {
    pub fn zeros(spec: GridSpec) -> Self {
        Field3D { spec, values: vec![0.0; spec.len()] }
    }

    /// Sample an analytic function of position.
    pub fn from_fn(spec: GridSpec, f: impl Fn([f64; 3]) -> f64 + Sync) -> Self {
        let mut out = Field3D::zeros(spec);
        let n = spec.n;
        for k in 0..n {
            let z = spec.coord(k);
            for j in 0..n {
                let y = spec.coord(j);
                let row = &mut out.values[n * (j + n * k)..n * (j + n * k) + n];
                for (i, v) in row.iter_mut().enumerate() {
                    *v = f([spec.coord(i), y, z]);
                }
            }
        }
        out
    }

    pub fn from_radial_fn(spec: GridSpec, f: impl Fn(f64) -> f64 + Sync) -> Self {
        Self::from_fn(spec, |p| f((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mass fraction of f landing outside the ball |x| > 0.8 L; truncation
    /// diagnostic recorded by every experiment.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let cut = 0.8 * self.spec.half_width;
        let cut2 = cut * cut;
        let mut outside = 0.0;
        let mut total = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            let p = self.spec.point(idx);
            let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            total += v;
            if r2 > cut2 {
                outside += v;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }

    /// Mass-weighted centroid of a nonnegative density.
    pub fn center_of_mass(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        let mut total = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            let p = self.spec.point(idx);
            total += v;
            for d in 0..3 {
                c[d] += v * p[d];
            }
        }
        if total != 0.0 {
            for cd in &mut c {
                *cd /= total;
            }
        }
        c
    }

    /// Quadratic-in-r^2 extrapolation of a smooth field to the origin from the
    /// three diagonal node shells around it (no node sits at x = 0).
    pub fn origin_value(&self) -> f64 {
        let n = self.n();
        let i0 = n / 2 - 1;
        let shell = |k: usize| -> f64 {
            let lo = i0 + 1 - k;
            let hi = i0 + k;
            let mut s = 0.0;
            for &x in &[lo, hi] {
                for &y in &[lo, hi] {
                    for &z in &[lo, hi] {
                        s += self.values[x + n * (y + n * z)];
                    }
                }
            }
            s / 8.0
        };
        let h2 = self.spec.h() * self.spec.h();
        let r2: [f64; 3] = [3.0 * h2 / 4.0, 27.0 * h2 / 4.0, 75.0 * h2 / 4.0];
        let v: [f64; 3] = [shell(1), shell(2), shell(3)];
        // Solve the 3x3 Vandermonde in r^2 for the constant term.
        let d0 = (r2[1] * r2[2] * r2[2] - r2[2] * r2[1] * r2[1])
            - (r2[0] * r2[2] * r2[2] - r2[2] * r2[0] * r2[0])
            + (r2[0] * r2[1] * r2[1] - r2[1] * r2[0] * r2[0]);
        let n0 = v[0] * (r2[1] * r2[2] * r2[2] - r2[2] * r2[1] * r2[1])
            - v[1] * (r2[0] * r2[2] * r2[2] - r2[2] * r2[0] * r2[0])
            + v[2] * (r2[0] * r2[1] * r2[1] - r2[1] * r2[0] * r2[0]);
        n0 / d0
    }

    fn n(&self) -> usize {
        self.spec.n
    }
}

/// Radial ray discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub m: usize,
    pub r_max: f64,
}

impl RadialGrid {
    pub fn new(m: usize, r_max: f64) -> Result<Self> {
        if m < 8 || !(r_max > 0.0) {
            return Err(HfError::Config(format!("radial grid needs m >= 8 and R > 0, got m={m}, R={r_max}")));
        }
        Ok(RadialGrid { m, r_max })
    }

    #[inline]
    pub fn dr(&self) -> f64 {
        self.r_max / self.m as f64
    }

    #[inline]
    pub fn r(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dr()
    }

    /// Quadrature weight 4π r_j^2 dr.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        let r = self.r(j);
        4.0 * PI * r * r * self.dr()
    }
}

/// Real radial profile u(r), implicitly zero past r_max.
#[derive(Debug, Clone)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn zeros(grid: RadialGrid) -> Self {
        RadialField { grid, values: vec![0.0; grid.m] }
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.m).map(|j| f(grid.r(j))).collect();
        RadialField { grid, values }
    }

    /// Linear interpolation at radius r, zero beyond the last node.
    pub fn interp(&self, r: f64) -> f64 {
        let dr = self.grid.dr();
        let t = r / dr - 0.5;
        if t <= 0.0 {
            return self.values[0];
        }
        let j = t.floor() as usize;
        if j + 1 >= self.grid.m {
            return 0.0;
        }
        let frac = t - j as f64;
        self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
    }
}

/// Shared behavior of the two field representations: quadrature, spectral or
/// finite-volume differentiation, and the free-space Newtonian potential.
pub trait Field: Clone + Send + Sync {
    fn len(&self) -> usize;
    fn values(&self) -> &[f64];
    fn values_mut(&mut self) -> &mut [f64];
    fn zeros_like(&self) -> Self;
    fn same_grid(&self, other: &Self) -> bool;
    /// Quadrature weight of node i.
    fn weight(&self, i: usize) -> f64;
    /// ∫ f dx.
    fn integrate(&self) -> f64;
    /// ∫ f g dx.
    fn dot(&self, other: &Self) -> f64;
    /// ∫ |∇f|^2 dx, consistent with `laplacian` (⟨-Δf, f⟩ matches exactly).
    fn gradient_sq_integral(&self) -> f64;
    fn laplacian(&self) -> Self;
    /// Free-space convolution of `self` (as a charge density) with 1/|x|.
    fn newtonian_potential(&self) -> Self;

    /// ∫ f^2 dx.
    fn norm_l2_sq(&self) -> f64 {
        self.dot(self)
    }

    fn scaled(&self, t: f64) -> Self {
        let mut out = self.clone();
        for v in out.values_mut() {
            *v *= t;
        }
        out
    }

    /// self + t * other.
    fn axpy(&self, t: f64, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.values_mut().iter_mut().zip(other.values()) {
            *a += t * b;
        }
        out
    }
}

static K2_CACHE: Lazy<Mutex<HashMap<(usize, u64), std::sync::Arc<Vec<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn k2_table(spec: GridSpec) -> std::sync::Arc<Vec<f64>> {
    let key = (spec.n, spec.half_width.to_bits());
    let mut cache = K2_CACHE.lock().unwrap();
    cache
        .entry(key)
        .or_insert_with(|| {
            let k = fft::wavenumbers(spec.n, spec.half_width);
            let n = spec.n;
            let mut table = vec![0.0; spec.len()];
            for z in 0..n {
                for y in 0..n {
                    for x in 0..n {
                        table[x + n * (y + n * z)] = k[x] * k[x] + k[y] * k[y] + k[z] * k[z];
                    }
                }
            }
            std::sync::Arc::new(table)
        })
        .clone()
}

/// Spectral Laplacians of two fields on the same grid in one complex
/// transform pair (u packed as the real part, v as the imaginary part).
pub fn laplacian_pair(u: &Field3D, v: &Field3D) -> (Field3D, Field3D) {
    assert_eq!(u.spec, v.spec, "laplacian_pair requires matching grids");
    let spec = u.spec;
    let size = spec.len();
    let mut data: Vec<Complex64> =
        u.values.iter().zip(&v.values).map(|(&a, &b)| Complex64::new(a, b)).collect();
    let mut scratch = vec![Complex64::default(); size];
    fft::forward_full(&mut data, &mut scratch, spec.n);
    let k2 = k2_table(spec);
    // k2 is symmetric under the x<->z transposition of the spectral layout.
    for (c, &k) in data.iter_mut().zip(k2.iter()) {
        *c *= -k;
    }
    fft::inverse_cropped(&mut data, &mut scratch, spec.n, spec.n);
    let scale = 1.0 / size as f64;
    let mut lu = Field3D::zeros(spec);
    let mut lv = Field3D::zeros(spec);
    for i in 0..size {
        lu.values[i] = data[i].re * scale;
        lv.values[i] = data[i].im * scale;
    }
    (lu, lv)
}

/// ∫(|∇u|^2 + |∇v|^2) in one transform via the same packing (the cross term
/// cancels exactly for real u, v).
pub fn gradient_sq_pair(u: &Field3D, v: &Field3D) -> f64 {
    assert_eq!(u.spec, v.spec);
    let spec = u.spec;
    let size = spec.len();
    let mut data: Vec<Complex64> =
        u.values.iter().zip(&v.values).map(|(&a, &b)| Complex64::new(a, b)).collect();
    let mut scratch = vec![Complex64::default(); size];
    fft::forward_full(&mut data, &mut scratch, spec.n);
    let k2 = k2_table(spec);
    let mut acc = 0.0;
    for (c, &k) in data.iter().zip(k2.iter()) {
        acc += k * c.norm_sqr();
    }
    acc * spec.h().powi(3) / size as f64
}

impl Field for Field3D {
    fn len(&self) -> usize {
        self.values.len()
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    fn zeros_like(&self) -> Self {
        Field3D::zeros(self.spec)
    }
    fn same_grid(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
    fn weight(&self, _i: usize) -> f64 {
        self.spec.h().powi(3)
    }
    fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.h().powi(3)
    }
    fn dot(&self, other: &Self) -> f64 {
        debug_assert!(self.same_grid(other));
        let mut acc = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a * b;
        }
        acc * self.spec.h().powi(3)
    }
    fn gradient_sq_integral(&self) -> f64 {
        let zero = Field3D::zeros(self.spec);
        gradient_sq_pair(self, &zero)
    }
    fn laplacian(&self) -> Self {
        let zero = Field3D::zeros(self.spec);
        laplacian_pair(self, &zero).0
    }
    fn newtonian_potential(&self) -> Self {
        crate::coulomb::newton_potential_3d(self)
    }
}

impl Field for RadialField {
    fn len(&self) -> usize {
        self.values.len()
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    fn zeros_like(&self) -> Self {
        RadialField::zeros(self.grid)
    }
    fn same_grid(&self, other: &Self) -> bool {
        self.grid == other.grid
    }
    fn weight(&self, i: usize) -> f64 {
        self.grid.weight(i)
    }
    fn integrate(&self) -> f64 {
        let mut acc = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            acc += v * self.grid.weight(j);
        }
        acc
    }
    fn dot(&self, other: &Self) -> f64 {
        debug_assert!(self.same_grid(other));
        let mut acc = 0.0;
        for (j, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            acc += a * b * self.grid.weight(j);
        }
        acc
    }
    fn gradient_sq_integral(&self) -> f64 {
        // Finite-volume form with faces at j*dr and a Dirichlet zero past R.
        let dr = self.grid.dr();
        let m = self.grid.m;
        let mut acc = 0.0;
        for f in 1..=m {
            let rf = f as f64 * dr;
            let lo = self.values[f - 1];
            let hi = if f == m { 0.0 } else { self.values[f] };
            let d = hi - lo;
            acc += 4.0 * PI * rf * rf / dr * d * d;
        }
        acc
    }
    fn laplacian(&self) -> Self {
        let dr = self.grid.dr();
        let m = self.grid.m;
        let face = |f: usize| {
            let rf = f as f64 * dr;
            4.0 * PI * rf * rf / dr
        };
        let mut out = RadialField::zeros(self.grid);
        for j in 0..m {
            let below = if j == 0 { 0.0 } else { face(j) * (self.values[j] - self.values[j - 1]) };
            let above_val = if j + 1 == m { 0.0 } else { self.values[j + 1] };
            let above = face(j + 1) * (self.values[j] - above_val);
            out.values[j] = -(below + above) / self.grid.weight(j);
        }
        out
    }
    fn newtonian_potential(&self) -> Self {
        crate::coulomb::newton_potential_radial(self)
    }
}

/// The vector unknown (u, v) on one shared grid.
#[derive(Debug, Clone)]
pub struct PairState<F: Field> {
    pub u: F,
    pub v: F,
}

impl<F: Field> PairState<F> {
    pub fn new(u: F, v: F) -> Result<Self> {
        if !u.same_grid(&v) {
            return Err(HfError::GridMismatch);
        }
        Ok(PairState { u, v })
    }

    pub fn zeros_like(&self) -> Self {
        PairState { u: self.u.zeros_like(), v: self.v.zeros_like() }
    }

    /// ∫(u^2 + v^2).
    pub fn mass(&self) -> f64 {
        self.u.norm_l2_sq() + self.v.norm_l2_sq()
    }

    pub fn is_zero(&self) -> bool {
        self.mass() == 0.0
    }

    pub fn scaled(&self, t: f64) -> Self {
        PairState { u: self.u.scaled(t), v: self.v.scaled(t) }
    }

    pub fn axpy(&self, t: f64, other: &Self) -> Self {
        PairState { u: self.u.axpy(t, &other.u), v: self.v.axpy(t, &other.v) }
    }

    /// Pointwise charge u^2 + v^2.
    pub fn charge(&self) -> F {
        let mut q = self.u.zeros_like();
        for ((qv, a), b) in q.values_mut().iter_mut().zip(self.u.values()).zip(self.v.values()) {
            *qv = a * a + b * b;
        }
        q
    }

    pub fn clamp_nonnegative(&mut self) {
        for x in self.u.values_mut().iter_mut().chain(self.v.values_mut()) {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
    }
}

/// Weighted pair norm (∫ |∇u|^2 + |∇v|^2 + V (u^2 + v^2))^{1/2}.
pub fn norm_v<F: Field>(s: &PairState<F>, v_pot: &F) -> Result<f64> {
    let min = v_pot.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(HfError::NonPositivePotential { min });
    }
    let mut pot = 0.0;
    for (i, ((&a, &b), &w)) in s.u.values().iter().zip(s.v.values()).zip(v_pot.values()).enumerate() {
        pot += w * (a * a + b * b) * s.u.weight(i);
    }
    Ok((s.u.gradient_sq_integral() + s.v.gradient_sq_integral() + pot).sqrt())
}

/// Sample a radial profile onto a cubic grid around `center`, linear in r and
/// zero past the profile's support.
pub fn embed_radial(f: &RadialField, center: [f64; 3], spec: GridSpec) -> Field3D {
    let mut out = Field3D::zeros(spec);
    let n = spec.n;
    for k in 0..n {
        let dz = spec.coord(k) - center[2];
        for j in 0..n {
            let dy = spec.coord(j) - center[1];
            let row = &mut out.values[n * (j + n * k)..n * (j + n * k) + n];
            for (i, v) in row.iter_mut().enumerate() {
                let dx = spec.coord(i) - center[0];
                let r = (dx * dx + dy * dy + dz * dz).sqrt();
                *v = f.interp(r);
            }
        }
    }
    out
}

/// Shell-average a cubic field back onto a radial grid (inverse of
/// `embed_radial` at the origin, up to interpolation error).
pub fn radial_rebin(f: &Field3D, grid: RadialGrid) -> RadialField {
    let mut sums = vec![0.0; grid.m];
    let mut counts = vec![0usize; grid.m];
    for (idx, v) in f.values.iter().enumerate() {
        let p = f.spec.point(idx);
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let j = (r / grid.dr()) as usize;
        if j < grid.m {
            sums[j] += v;
            counts[j] += 1;
        }
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    RadialField { grid, values }
}
