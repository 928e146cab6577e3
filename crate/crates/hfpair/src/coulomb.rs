//! The nonlocal term φ generated by a weighted charge through the free-space
//! kernel 1/|x|, plus the inequalities that control it.
//!
//! On the cubic grid the convolution is computed on a zero-padded doubled box
//! with a real-space-sampled kernel; the kernel's origin cell carries the
//! analytic cell average of 1/|x| so the self-interaction of a cell is finite
//! and second-order accurate. On the radial grid Newton's shell formula gives
//! an independent O(m) evaluation used as an oracle for the 3D path.

use crate::error::{HfError, Result};
use crate::grid::{Field, Field3D, PairState, RadialField};
use crate::{fft, grid};
use once_cell::sync::Lazy;
use rustfft::num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Average of 1/|x| over the unit cube centered at the origin; the kernel's
/// origin-cell value is this constant divided by the cell width. Equal to
/// 3 ∫₀¹∫₀¹ (1+s²+t²)^{-1/2} ds dt (Duffy split), frozen here and re-derived
/// by quadrature in the tests.
pub const CELL_AVG_INV_R: f64 = 2.380077363979553;

static KERNEL_CACHE: Lazy<Mutex<HashMap<(usize, u64), Arc<Vec<Complex64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn kernel_hat(n: usize, h: f64) -> Arc<Vec<Complex64>> {
    let key = (n, h.to_bits());
    if let Some(k) = KERNEL_CACHE.lock().unwrap().get(&key) {
        return k.clone();
    }
    let m = 2 * n;
    let mut g = vec![Complex64::default(); m * m * m];
    let disp: Vec<f64> = (0..m)
        .map(|i| {
            let d = if i <= n { i as isize } else { i as isize - m as isize };
            d as f64 * h
        })
        .collect();
    for z in 0..m {
        for y in 0..m {
            let dyz = disp[y] * disp[y] + disp[z] * disp[z];
            let row = &mut g[m * (y + m * z)..m * (y + m * z) + m];
            for (x, out) in row.iter_mut().enumerate() {
                let r2 = disp[x] * disp[x] + dyz;
                let val = if r2 == 0.0 { CELL_AVG_INV_R / h } else { 1.0 / r2.sqrt() };
                *out = Complex64::new(val, 0.0);
            }
        }
    }
    let mut scratch = vec![Complex64::default(); m * m * m];
    fft::forward_full(&mut g, &mut scratch, m);
    let arc = Arc::new(g);
    KERNEL_CACHE.lock().unwrap().insert(key, arc.clone());
    arc
}

/// Free-space (1/|x|) * q on the cubic grid via the padded transform.
pub fn newton_potential_3d(q: &Field3D) -> Field3D {
    let n = q.spec.n;
    let h = q.spec.h();
    let m = 2 * n;
    let ghat = kernel_hat(n, h);
    let mut buf = vec![Complex64::default(); m * m * m];
    for z in 0..n {
        for y in 0..n {
            let src = &q.values[n * (y + n * z)..n * (y + n * z) + n];
            let dst = &mut buf[m * (y + m * z)..m * (y + m * z) + n];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = Complex64::new(s, 0.0);
            }
        }
    }
    let mut scratch = vec![Complex64::default(); m * m * m];
    fft::forward_padded(&mut buf, &mut scratch, m, n);
    for (b, k) in buf.iter_mut().zip(ghat.iter()) {
        *b *= k;
    }
    fft::inverse_cropped(&mut buf, &mut scratch, m, n);
    let scale = h * h * h / (m * m * m) as f64;
    let mut phi = Field3D::zeros(q.spec);
    for z in 0..n {
        for y in 0..n {
            let src = &buf[m * (y + m * z)..m * (y + m * z) + n];
            let dst = &mut phi.values[n * (y + n * z)..n * (y + n * z) + n];
            for (d, s) in dst.iter_mut().zip(src) {
                *d = s.re * scale;
            }
        }
    }
    phi
}

/// Newton shell formula φ(r_j) = Σ_i dQ_i / max(r_i, r_j) via prefix sums.
pub fn newton_potential_radial(q: &RadialField) -> RadialField {
    let g = q.grid;
    let mut phi = RadialField::zeros(g);
    let mut inner = 0.0; // Σ_{i<=j} dQ_i
    let mut outer = 0.0; // Σ_{i>j} dQ_i / r_i
    for j in 0..g.m {
        outer += q.values[j] * g.weight(j) / g.r(j);
    }
    for j in 0..g.m {
        let dq = q.values[j] * g.weight(j);
        inner += dq;
        outer -= dq / g.r(j);
        phi.values[j] = inner / g.r(j) + outer;
    }
    phi
}

/// Potential and energy of the weighted charge ρ(u² + v²).
#[derive(Debug, Clone)]
pub struct CoulombResult<F: Field> {
    pub phi: F,
    /// ∫ ρ φ (u² + v²) dx.
    pub energy: f64,
}

/// φ of the weighted charge, and the quartic energy, for any representation.
pub fn solve_coulomb<F: Field>(s: &PairState<F>, rho: &F) -> Result<CoulombResult<F>> {
    let min = rho.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(HfError::NonPositivePotential { min });
    }
    let q = weighted_charge(s, rho);
    let phi = q.newtonian_potential();
    let energy = phi.dot(&q);
    Ok(CoulombResult { phi, energy })
}

/// Cubic-grid entry point with the spec's name.
pub fn solve_coulomb_3d(s: &PairState<Field3D>, rho: &Field3D) -> Result<CoulombResult<Field3D>> {
    solve_coulomb(s, rho)
}

/// Radial oracle entry point: potential of a raw charge profile.
pub fn solve_coulomb_radial(q: &RadialField) -> RadialField {
    newton_potential_radial(q)
}

/// ρ(x) (u² + v²)(x).
pub fn weighted_charge<F: Field>(s: &PairState<F>, rho: &F) -> F {
    let mut q = s.charge();
    for (qv, r) in q.values_mut().iter_mut().zip(rho.values()) {
        *qv *= r;
    }
    q
}

/// Bilinear interaction ∫ a (1/|x| * b): the two-charge cross energy.
pub fn interaction<F: Field>(a: &F, b: &F) -> f64 {
    a.dot(&b.newtonian_potential())
}

/// Which of the paper's三 Cauchy–Schwarz splittings to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplittingVariant {
    /// √2 ∫ρ q |u| ≤ ∫|∇u|² + ½ ∫ρ φ q (and the v row).
    Lions,
    /// (1/√8) ∫ρ q |u| ≤ ¼ ∫|∇u|² + ⅛ ∫ρ φ q.
    Quarter,
    /// ½ ∫ρ q |u| ≤ ½ ∫|∇u|² + ⅛ ∫ρ φ q.
    Appendix,
}

#[derive(Debug, Clone, Copy)]
pub struct SplittingCheck {
    pub lhs_u: f64,
    pub rhs_u: f64,
    pub lhs_v: f64,
    pub rhs_v: f64,
}

impl SplittingCheck {
    pub fn margins(&self) -> (f64, f64) {
        (self.rhs_u - self.lhs_u, self.rhs_v - self.lhs_v)
    }
    pub fn holds(&self, tol: f64) -> bool {
        let scale = self.rhs_u.abs() + self.rhs_v.abs() + self.lhs_u.abs() + self.lhs_v.abs();
        let (mu, mv) = self.margins();
        mu >= -tol * scale && mv >= -tol * scale
    }
}

/// Evaluate one of the splitting inequalities on a pair state with weight ρ
/// (pass a constant field for the ρ_min / k variants).
pub fn check_splitting_inequality<F: Field>(
    s: &PairState<F>,
    rho: &F,
    variant: SplittingVariant,
) -> Result<SplittingCheck> {
    let cr = solve_coulomb(s, rho)?;
    // ∫ ρ q |u| and ∫ ρ q |v| with q = u² + v².
    let mut su = 0.0;
    let mut sv = 0.0;
    for (i, ((&u, &v), &r)) in s.u.values().iter().zip(s.v.values()).zip(rho.values()).enumerate() {
        let w = s.u.weight(i);
        let q = u * u + v * v;
        su += r * q * u.abs() * w;
        sv += r * q * v.abs() * w;
    }
    let ku = s.u.gradient_sq_integral();
    let kv = s.v.gradient_sq_integral();
    let p = cr.energy;
    let (cl, ck, cp) = match variant {
        SplittingVariant::Lions => (2f64.sqrt(), 1.0, 0.5),
        SplittingVariant::Quarter => (1.0 / 8f64.sqrt(), 0.25, 0.125),
        SplittingVariant::Appendix => (0.5, 0.5, 0.125),
    };
    Ok(SplittingCheck {
        lhs_u: cl * su,
        rhs_u: ck * ku + cp * p,
        lhs_v: cl * sv,
        rhs_v: ck * kv + cp * p,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct HlsCheck {
    /// ∫ ρ φ (u²+v²).
    pub coulomb: f64,
    /// (16·2^{1/3} ρ_max²/(3√3 π)) [∫(u²+v²)]^{3/2} [∫(|∇u|²+|∇v|²)]^{1/2}.
    pub bound_seminorm: f64,
    /// (16·2^{1/3} ρ_max²/(3√3 π λ^{3/2})) ‖(u,v)‖⁴.
    pub bound_norm4: f64,
}

impl HlsCheck {
    pub fn margin(&self) -> f64 {
        self.bound_norm4 - self.coulomb
    }
    pub fn margin_seminorm(&self) -> f64 {
        self.bound_seminorm - self.coulomb
    }
}

/// Hardy–Littlewood–Sobolev-type control of the Coulomb energy.
pub fn check_hls_bound<F: Field>(
    s: &PairState<F>,
    rho: &F,
    v_pot: &F,
    rho_max: f64,
    lambda: f64,
) -> Result<HlsCheck> {
    let sampled_max = rho.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if rho_max < sampled_max {
        return Err(HfError::Guard(format!("rho_max {rho_max} below sampled max {sampled_max}")));
    }
    let sampled_min = v_pot.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if lambda > sampled_min {
        return Err(HfError::Guard(format!("lambda {lambda} above sampled min V {sampled_min}")));
    }
    let cr = solve_coulomb(s, rho)?;
    let c = 16.0 * 2f64.cbrt() * rho_max * rho_max / (3.0 * 3f64.sqrt() * std::f64::consts::PI);
    let mass = s.mass();
    let grad = s.u.gradient_sq_integral() + s.v.gradient_sq_integral();
    let norm = grid::norm_v(s, v_pot)?;
    Ok(HlsCheck {
        coulomb: cr.energy,
        bound_seminorm: c * mass.powf(1.5) * grad.sqrt(),
        bound_norm4: c / lambda.powf(1.5) * norm.powi(4),
    })
}
