//! Fibering map analysis along rays t ↦ J_β(tu, tv):
//!
//!   φ(t) = ½At² + ¼Bt⁴ − (C/p)t^p,
//!
//! with A = ‖(u,v)‖², B = ∫ρφ(u²+v²), C = ∫F_β. Roots of φ′ locate the
//! Nehari crossings of the ray; the sign of φ″ there separates the N⁻ / N⁺
//! branches, and the norm/energy filtration refines the split.

use crate::error::{HfError, Result};
use crate::functional::{self, Problem};
use crate::grid::{Field, PairState};
use crate::bounds;

#[derive(Debug, Clone, Copy)]
pub struct FiberingCoefficients {
    /// ‖(u,v)‖² (quadratic term).
    pub a: f64,
    /// ∫ρφ(u²+v²) (quartic term).
    pub b: f64,
    /// ∫F_β (p-power term).
    pub c: f64,
}

impl FiberingCoefficients {
    pub fn scale(&self) -> f64 {
        self.a + self.b + self.c.abs()
    }

    /// φ(t).
    pub fn value(&self, t: f64, p: f64) -> f64 {
        0.5 * self.a * t * t + 0.25 * self.b * t.powi(4) - self.c / p * t.powf(p)
    }

    /// φ′(t).
    pub fn derivative(&self, t: f64, p: f64) -> f64 {
        self.a * t + self.b * t.powi(3) - self.c * t.powf(p - 1.0)
    }

    /// φ″(t).
    pub fn second_derivative(&self, t: f64, p: f64) -> f64 {
        self.a + 3.0 * self.b * t * t - (p - 1.0) * self.c * t.powf(p - 2.0)
    }

    /// η(t) = A t⁻² − C t^{p−4}; roots of φ′ solve η(t) = −B.
    pub fn eta(&self, t: f64, p: f64) -> f64 {
        self.a * t.powf(-2.0) - self.c * t.powf(p - 4.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FiberingRoots {
    pub t_minus: Option<f64>,
    pub t_plus: Option<f64>,
    /// Minimizer of η: ((2A)/((4−p)C))^{1/(p−2)}.
    pub t_dip: f64,
    /// η(t_dip) + B; roots exist iff this is negative.
    pub dip_value: f64,
    /// |dip_value| below tolerance: the ray grazes N⁰, projection refused.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum NehariClass {
    Nminus,
    Nzero,
    Nplus,
    NotOnNehari,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FiltrationClass {
    N1,
    N2,
    Outside,
}

const DEGENERATE_REL: f64 = 1e-9;
const ROOT_REL: f64 = 1e-12;

/// Fibering coefficients of the ray through a nonzero state.
pub fn coefficients<F: Field>(s: &PairState<F>, prob: &Problem<F>) -> Result<FiberingCoefficients> {
    if s.is_zero() {
        return Err(HfError::ZeroState);
    }
    let e = functional::energy(s, prob)?;
    let (a, b, c) = e.fibering_abc(prob.p);
    Ok(FiberingCoefficients { a, b, c })
}

/// Locate the positive critical points of the fibering map.
pub fn find_roots(co: &FiberingCoefficients, p: f64) -> Result<FiberingRoots> {
    if !(p > 2.0 && p < 4.0) {
        return Err(HfError::Config(format!("fibering analysis needs 2 < p < 4, got {p}")));
    }
    if !(co.a > 0.0) {
        return Err(HfError::ZeroState);
    }
    if co.c <= 0.0 {
        return Err(HfError::NoPositivePower);
    }
    let scale = co.scale();
    if co.b == 0.0 {
        // classical two-term fibering: unique maximum crossing.
        let t = (co.a / co.c).powf(1.0 / (p - 2.0));
        return Ok(FiberingRoots {
            t_minus: Some(t),
            t_plus: None,
            t_dip: (2.0 * co.a / ((4.0 - p) * co.c)).powf(1.0 / (p - 2.0)),
            dip_value: co.eta((2.0 * co.a / ((4.0 - p) * co.c)).powf(1.0 / (p - 2.0)), p),
            degenerate: false,
        });
    }
    let t_dip = (2.0 * co.a / ((4.0 - p) * co.c)).powf(1.0 / (p - 2.0));
    let dip_value = co.eta(t_dip, p) + co.b;
    if dip_value.abs() < DEGENERATE_REL * scale {
        return Ok(FiberingRoots { t_minus: None, t_plus: None, t_dip, dip_value, degenerate: true });
    }
    if dip_value > 0.0 {
        return Ok(FiberingRoots { t_minus: None, t_plus: None, t_dip, dip_value, degenerate: false });
    }
    // g(t) = η(t) + B is positive at 0+, negative at the dip, positive again
    // for large t; bisect each sign change.
    let g = |t: f64| co.eta(t, p) + co.b;
    let bisect = |mut lo: f64, mut hi: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo).signum() == g(mid).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut lo = t_dip;
    while g(lo) < 0.0 {
        lo *= 0.5;
        if lo < t_dip * 1e-30 {
            break;
        }
    }
    let t_minus = bisect(lo, t_dip);
    let mut hi = t_dip;
    let mut doublings = 0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(HfError::NoConvergence { iters: doublings, residual: g(hi) });
        }
    }
    let t_plus = bisect(t_dip, hi);
    for t in [t_minus, t_plus] {
        let resid = co.derivative(t, p).abs();
        if resid > ROOT_REL * scale * (1.0 + t.powf(p - 1.0)) {
            return Err(HfError::NoConvergence { iters: 200, residual: resid });
        }
    }
    Ok(FiberingRoots { t_minus: Some(t_minus), t_plus: Some(t_plus), t_dip, dip_value, degenerate: false })
}

/// Nehari membership and branch of a state, by the sign of φ″(1) through the
/// quartic form (cross-checked against the p-power form, which must agree on
/// the manifold).
pub fn classify<F: Field>(s: &PairState<F>, prob: &Problem<F>, tol: f64) -> Result<NehariClass> {
    let co = coefficients(s, prob)?;
    Ok(classify_coefficients(&co, prob.p, tol))
}

pub fn classify_coefficients(co: &FiberingCoefficients, p: f64, tol: f64) -> NehariClass {
    let scale = co.scale();
    let residual = co.a + co.b - co.c;
    if residual.abs() >= tol * scale {
        return NehariClass::NotOnNehari;
    }
    let sigma = -(p - 2.0) * co.a + (4.0 - p) * co.b;
    let sigma_alt = -2.0 * co.a + (4.0 - p) * co.c;
    debug_assert!((sigma - sigma_alt).abs() <= (4.0 - p) * residual.abs() + 1e-12 * scale);
    if sigma.abs() < tol * scale {
        NehariClass::Nzero
    } else if sigma < 0.0 {
        NehariClass::Nminus
    } else {
        NehariClass::Nplus
    }
}

/// Scale a state onto the Nehari set along its ray, on the requested branch.
pub fn project_to_nehari<F: Field>(
    s: &PairState<F>,
    prob: &Problem<F>,
    branch: Branch,
) -> Result<(PairState<F>, f64)> {
    let co = coefficients(s, prob)?;
    let t = project_coefficients(&co, prob.p, branch)?;
    Ok((s.scaled(t), t))
}

/// Root selection on precomputed coefficients.
pub fn project_coefficients(co: &FiberingCoefficients, p: f64, branch: Branch) -> Result<f64> {
    let roots = find_roots(co, p)?;
    if roots.degenerate {
        return Err(HfError::DegenerateFibering { dip: roots.dip_value });
    }
    let t = match branch {
        Branch::Minus => roots.t_minus,
        Branch::Plus => roots.t_plus,
    };
    t.ok_or(HfError::RootAbsent { dip: roots.dip_value })
}

/// Membership in the low-energy filtration pieces N^(1) / N^(2).
pub fn filtration_member<F: Field>(
    s: &PairState<F>,
    prob: &Problem<F>,
    tol: f64,
) -> Result<FiltrationClass> {
    let co = coefficients(s, prob)?;
    let residual = (co.a + co.b - co.c).abs();
    if residual >= tol * co.scale() {
        return Ok(FiltrationClass::Outside);
    }
    let level = bounds::filtration_level(prob.scalars.lambda, prob.scalars.rho_max, prob.p);
    let x_bar = bounds::xbar(prob.scalars.lambda, prob.scalars.rho_max, prob.p);
    let j = co.value(1.0, prob.p);
    if j < level && co.a < x_bar {
        Ok(FiltrationClass::N1)
    } else if j < level && co.a > x_bar {
        Ok(FiltrationClass::N2)
    } else {
        Ok(FiltrationClass::Outside)
    }
}
