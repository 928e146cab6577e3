//! The energy functional
//!
//!   J_β(u,v) = ½‖(u,v)‖² + ¼∫ρ φ (u²+v²) − (1/p)∫F_β(u,v),
//!   F_β(u,v) = |u|^p + |v|^p + 2β|u|^{p/2}|v|^{p/2},
//!
//! its L² first variation, and the identities every solution must satisfy
//! (Nehari, Pohozaev, the z-vector linear system).

use crate::coulomb;
use crate::error::{HfError, Result};
use crate::grid::{Field, Field3D, PairState};

/// Analytic scalars attached to a potential pair (V, ρ).
#[derive(Debug, Clone, Copy)]
pub struct PotentialScalars {
    /// inf V > 0.
    pub lambda: f64,
    pub v_max: f64,
    pub v_inf: f64,
    /// inf ρ > 0.
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_inf: f64,
    /// Lower bound for 2V + ∇V·x when supplied by the potential family.
    pub d0: Option<f64>,
}

/// Exponent, coupling, sampled potentials and their analytic scalars.
#[derive(Debug, Clone)]
pub struct Problem<F: Field> {
    pub p: f64,
    pub beta: f64,
    pub v: F,
    pub rho: F,
    /// Sampled ∇V·x, required by the Pohozaev audits.
    pub v_dot_x: Option<F>,
    /// Sampled ∇ρ·x.
    pub rho_dot_x: Option<F>,
    pub scalars: PotentialScalars,
}

impl<F: Field> Problem<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 2.0 && self.p < 4.0) {
            return Err(HfError::Config(format!("exponent p must lie in (2,4), got {}", self.p)));
        }
        if !(self.scalars.lambda > 0.0) {
            return Err(HfError::NonPositivePotential { min: self.scalars.lambda });
        }
        if !(self.scalars.rho_min > 0.0) {
            return Err(HfError::NonPositivePotential { min: self.scalars.rho_min });
        }
        Ok(())
    }
}

/// The five terms of J_β; all positive-sign contributions are stored positive.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct EnergyBreakdown {
    /// ½∫(|∇u|² + |∇v|²).
    pub kinetic: f64,
    /// ½∫V(u² + v²).
    pub external: f64,
    /// ¼∫ρ φ (u² + v²).
    pub coulomb: f64,
    /// (1/p)∫(|u|^p + |v|^p).
    pub power: f64,
    /// (2β/p)∫|u|^{p/2}|v|^{p/2}.
    pub cross: f64,
    /// kinetic + external + coulomb − power − cross.
    pub total: f64,
}

impl EnergyBreakdown {
    /// Fibering coefficients (A, B, C): J(t s) = ½At² + ¼Bt⁴ − (C/p)t^p.
    pub fn fibering_abc(&self, p: f64) -> (f64, f64, f64) {
        (2.0 * (self.kinetic + self.external), 4.0 * self.coulomb, p * (self.power + self.cross))
    }

    /// Sum of term magnitudes, the natural scale for relative residuals.
    pub fn scale(&self) -> f64 {
        self.kinetic + self.external + self.coulomb + self.power.abs() + self.cross.abs()
    }
}

/// ∫(|u|^p + |v|^p) and ∫|u|^{p/2}|v|^{p/2} in one pass.
pub(crate) fn power_integrals<F: Field>(s: &PairState<F>, p: f64) -> (f64, f64) {
    let half = 0.5 * p;
    let mut pw = 0.0;
    let mut cr = 0.0;
    for (i, (&a, &b)) in s.u.values().iter().zip(s.v.values()).enumerate() {
        let w = s.u.weight(i);
        let au = a.abs().powf(half);
        let av = b.abs().powf(half);
        pw += (au * au + av * av) * w;
        cr += au * av * w;
    }
    (pw, cr)
}

/// Evaluate all terms of J_β.
pub fn energy<F: Field>(s: &PairState<F>, prob: &Problem<F>) -> Result<EnergyBreakdown> {
    prob.validate()?;
    let cr = coulomb::solve_coulomb(s, &prob.rho)?;
    Ok(energy_given_phi(s, prob, &cr.phi))
}

/// Same, reusing an already computed potential φ of the weighted charge.
pub(crate) fn energy_given_phi<F: Field>(s: &PairState<F>, prob: &Problem<F>, phi: &F) -> EnergyBreakdown {
    let kinetic = 0.5 * kinetic_pair(&s.u, &s.v);
    let mut external = 0.0;
    let mut coul = 0.0;
    for (i, (((&a, &b), &vv), (&rr, &ph))) in s
        .u
        .values()
        .iter()
        .zip(s.v.values())
        .zip(prob.v.values())
        .zip(prob.rho.values().iter().zip(phi.values()))
        .enumerate()
    {
        let w = s.u.weight(i);
        let q = a * a + b * b;
        external += vv * q * w;
        coul += rr * ph * q * w;
    }
    external *= 0.5;
    coul *= 0.25;
    let (pw, crx) = power_integrals(s, prob.p);
    let power = pw / prob.p;
    let cross = 2.0 * prob.beta * crx / prob.p;
    EnergyBreakdown {
        kinetic,
        external,
        coulomb: coul,
        power,
        cross,
        total: kinetic + external + coul - power - cross,
    }
}

fn kinetic_pair<F: Field>(u: &F, v: &F) -> f64 {
    u.gradient_sq_integral() + v.gradient_sq_integral()
}

/// L² gradient of J_β: the residual pair of the Euler–Lagrange system. The
/// cross nonlinearity |u|^{p/2-2}u is evaluated as sign(u)|u|^{p/2-1}, the
/// continuous extension through u = 0 for p > 2.
pub fn first_variation<F: Field>(s: &PairState<F>, prob: &Problem<F>) -> Result<PairState<F>> {
    prob.validate()?;
    let cr = coulomb::solve_coulomb(s, &prob.rho)?;
    let (lu, lv) = laplacian_pair_generic(&s.u, &s.v);
    Ok(first_variation_given(s, prob, &cr.phi, &lu, &lv))
}

pub(crate) fn laplacian_pair_generic<F: Field>(u: &F, v: &F) -> (F, F) {
    (u.laplacian(), v.laplacian())
}

pub(crate) fn first_variation_given<F: Field>(
    s: &PairState<F>,
    prob: &Problem<F>,
    phi: &F,
    lap_u: &F,
    lap_v: &F,
) -> PairState<F> {
    let half = 0.5 * prob.p;
    let mut gu = s.u.zeros_like();
    let mut gv = s.v.zeros_like();
    let n = s.u.len();
    for i in 0..n {
        let a = s.u.values()[i];
        let b = s.v.values()[i];
        let vv = prob.v.values()[i];
        let rp = prob.rho.values()[i] * phi.values()[i];
        let au = a.abs().powf(half - 1.0);
        let av = b.abs().powf(half - 1.0);
        // |u|^{p-2} u = (|u|^{p/2-1})^2 u ; |v|^{p/2} sign(u)|u|^{p/2-1}.
        gu.values_mut()[i] = -lap_u.values()[i] + vv * a + rp * a
            - au * au * a
            - prob.beta * (av * b.abs()) * a.signum() * au * (if a == 0.0 { 0.0 } else { 1.0 });
        gv.values_mut()[i] = -lap_v.values()[i] + vv * b + rp * b
            - av * av * b
            - prob.beta * (au * a.abs()) * b.signum() * av * (if b == 0.0 { 0.0 } else { 1.0 });
    }
    PairState { u: gu, v: gv }
}

/// ⟨J'(u,v), (u,v)⟩ = ‖(u,v)‖² + ∫ρφ(u²+v²) − ∫F_β.
pub fn nehari_residual<F: Field>(s: &PairState<F>, prob: &Problem<F>) -> Result<f64> {
    if s.is_zero() {
        return Err(HfError::ZeroState);
    }
    let e = energy(s, prob)?;
    let (a, b, c) = e.fibering_abc(prob.p);
    Ok(a + b - c)
}

/// Residual and natural scale of an integral identity.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct IdentityCheck {
    pub residual: f64,
    pub scale: f64,
}

impl IdentityCheck {
    pub fn rel(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.residual.abs() / self.scale
        }
    }
}

/// Pohozaev identity residual:
/// ½∫(|∇u|²+|∇v|²) + ½∫(3V+∇V·x)(u²+v²) + ¼∫(5ρ+2∇ρ·x)φ(u²+v²) − (3/p)∫F_β.
pub fn pohozaev_residual<F: Field>(s: &PairState<F>, prob: &Problem<F>) -> Result<IdentityCheck> {
    let (vdx, rdx) = match (&prob.v_dot_x, &prob.rho_dot_x) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(HfError::MissingGradientFields),
    };
    let cr = coulomb::solve_coulomb(s, &prob.rho)?;
    let kin = 0.5 * kinetic_pair(&s.u, &s.v);
    let mut pot = 0.0;
    let mut coul = 0.0;
    for (i, (&a, &b)) in s.u.values().iter().zip(s.v.values()).enumerate() {
        let w = s.u.weight(i);
        let q = a * a + b * b;
        pot += (3.0 * prob.v.values()[i] + vdx.values()[i]) * q * w;
        coul += (5.0 * prob.rho.values()[i] + 2.0 * rdx.values()[i]) * cr.phi.values()[i] * q * w;
    }
    pot *= 0.5;
    coul *= 0.25;
    let (pw, crx) = power_integrals(s, prob.p);
    let f_beta = pw + 2.0 * prob.beta * crx;
    let rhs = 3.0 / prob.p * f_beta;
    Ok(IdentityCheck {
        residual: kin + pot + coul - rhs,
        scale: kin + pot.abs() + coul.abs() + rhs.abs(),
    })
}

/// The six integrals of the z-vector system, its (t, s, r) decomposition and
/// the sign quantity deciding N⁻ membership.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ZVectorAudit {
    /// [kinetic, V-mass, ∇V·x-mass, coulomb, ∇ρ·x-coulomb, F_β] integrals.
    pub z: [f64; 6],
    /// J_β at the state.
    pub theta: f64,
    pub t: f64,
    pub s: f64,
    pub r: f64,
    /// Relative residuals of the energy / Nehari / Pohozaev identities.
    pub identity_rel: [f64; 3],
    /// −(p−2)(z₁+z₂) + (4−p)z₄; negative means N⁻.
    pub sign_quantity: f64,
    /// Same quantity through the decomposition: −2pθ + (p−2)(4−p)t.
    pub sign_quantity_decomposed: f64,
}

/// Audit a converged solution against the z-vector linear system. Fails with
/// `NotASolution` when any identity residual exceeds `allowed_rel`.
pub fn z_vector_audit<F: Field>(
    s: &PairState<F>,
    prob: &Problem<F>,
    allowed_rel: f64,
) -> Result<ZVectorAudit> {
    let (vdx, rdx) = match (&prob.v_dot_x, &prob.rho_dot_x) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(HfError::MissingGradientFields),
    };
    let cr = coulomb::solve_coulomb(s, &prob.rho)?;
    let z1 = kinetic_pair(&s.u, &s.v);
    let mut z2 = 0.0;
    let mut z3 = 0.0;
    let mut z4 = 0.0;
    let mut z5 = 0.0;
    for (i, (&a, &b)) in s.u.values().iter().zip(s.v.values()).enumerate() {
        let w = s.u.weight(i);
        let q = a * a + b * b;
        z2 += prob.v.values()[i] * q * w;
        z3 += vdx.values()[i] * q * w;
        z4 += prob.rho.values()[i] * cr.phi.values()[i] * q * w;
        z5 += rdx.values()[i] * cr.phi.values()[i] * q * w;
    }
    let (pw, crx) = power_integrals(s, prob.p);
    let z6 = pw + 2.0 * prob.beta * crx;
    let p = prob.p;
    let theta = 0.5 * z1 + 0.5 * z2 + 0.25 * z4 - z6 / p;
    // Row 2 (Nehari) and row 3 (Pohozaev) residuals; row 1 defines θ.
    let nehari = z1 + z2 + z4 - z6;
    let poho = 0.5 * z1 + 1.5 * z2 + 0.5 * z3 + 1.25 * z4 + 0.5 * z5 - 3.0 / p * z6;
    let scale_n = z1 + z2 + z4 + z6.abs();
    let scale_p = 0.5 * z1 + 1.5 * z2 + 0.5 * z3.abs() + 1.25 * z4 + 0.5 * z5.abs() + 3.0 / p * z6.abs();
    // Decomposition parameters from the kernel rows.
    let t = z4 / (2.0 * (p - 2.0));
    let s_par = z3 / 2.0;
    let r_par = z5 / 2.0;
    let z1_rec = 3.0 * theta + (p - 2.0) * t + s_par + r_par;
    let rec_rel = (z1 - z1_rec).abs() / scale_n.max(1e-300);
    let identity_rel = [rec_rel, nehari.abs() / scale_n.max(1e-300), poho.abs() / scale_p.max(1e-300)];
    for rel in identity_rel.iter().skip(1) {
        if *rel > allowed_rel {
            return Err(HfError::NotASolution { residual: *rel, allowed: allowed_rel });
        }
    }
    let sign_quantity = -(p - 2.0) * (z1 + z2) + (4.0 - p) * z4;
    let sign_quantity_decomposed = -2.0 * p * theta + (p - 2.0) * (4.0 - p) * t;
    Ok(ZVectorAudit {
        z: [z1, z2, z3, z4, z5, z6],
        theta,
        t,
        s: s_par,
        r: r_par,
        identity_rel,
        sign_quantity,
        sign_quantity_decomposed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Triviality {
    Trivial,
    Semitrivial,
    Vectorial,
}

/// A component counts as zero when its L² norm is below tol times the pair
/// norm.
pub fn classify_nontriviality<F: Field>(s: &PairState<F>, tol: f64) -> Triviality {
    let nu = s.u.norm_l2_sq().sqrt();
    let nv = s.v.norm_l2_sq().sqrt();
    let pair = (nu * nu + nv * nv).sqrt();
    if pair == 0.0 {
        return Triviality::Trivial;
    }
    match (nu < tol * pair, nv < tol * pair) {
        (true, true) => Triviality::Trivial,
        (false, false) => Triviality::Vectorial,
        _ => Triviality::Semitrivial,
    }
}

/// Margin of the solution energy lower bound
/// J_β(s) − d₀(p−2)/(2(6−p)) ∫(u²+v²); nonnegative for solutions under
/// (D5)–(D6).
pub fn solution_energy_lower_bound<F: Field>(s: &PairState<F>, prob: &Problem<F>) -> Result<f64> {
    let d0 = prob
        .scalars
        .d0
        .ok_or_else(|| HfError::Config("d0 not supplied by the potential family".into()))?;
    let e = energy(s, prob)?;
    let bound = d0 * (prob.p - 2.0) / (2.0 * (6.0 - prob.p)) * s.mass();
    Ok(e.total - bound)
}

/// Convenience: constant-potential problem on the grid of a template field.
pub fn autonomous_problem<F: Field>(template: &F, p: f64, beta: f64, a: f64, b: f64) -> Problem<F> {
    let mut v = template.zeros_like();
    for x in v.values_mut() {
        *x = a;
    }
    let mut rho = template.zeros_like();
    for x in rho.values_mut() {
        *x = b;
    }
    let zero_u = template.zeros_like();
    let zero_r = template.zeros_like();
    Problem {
        p,
        beta,
        v,
        rho,
        v_dot_x: Some(zero_u),
        rho_dot_x: Some(zero_r),
        scalars: PotentialScalars {
            lambda: a,
            v_max: a,
            v_inf: a,
            rho_min: b,
            rho_max: b,
            rho_inf: b,
            d0: Some(2.0 * a),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn gaussian_pair(spec: GridSpec) -> PairState<Field3D> {
        let u = Field3D::from_radial_fn(spec, |r| (-r * r / 2.0).exp());
        let v = Field3D::from_fn(spec, |p| {
            let d2 = (p[0] - 0.8) * (p[0] - 0.8) + p[1] * p[1] + p[2] * p[2];
            0.7 * (-d2 / 1.5).exp()
        });
        PairState::new(u, v).unwrap()
    }

    #[test]
    fn zero_state_energy_vanishes() {
        let spec = GridSpec::new(16, 4.0).unwrap();
        let z = Field3D::zeros(spec);
        let prob = autonomous_problem(&z, 2.5, 1.0, 1.0, 1.0);
        let s = PairState::new(z.clone(), z.clone()).unwrap();
        let e = energy(&s, &prob).unwrap();
        assert_eq!(e.total, 0.0);
        let g = first_variation(&s, &prob).unwrap();
        assert!(g.u.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn beta_zero_decouples() {
        let spec = GridSpec::new(16, 4.0).unwrap();
        let u = Field3D::from_radial_fn(spec, |r| (-r * r).exp());
        let z = Field3D::zeros(spec);
        let prob = autonomous_problem(&u, 2.5, 0.0, 1.0, 1.0);
        let s = PairState::new(u, z).unwrap();
        let e = energy(&s, &prob).unwrap();
        assert_eq!(e.cross, 0.0);
        let g = first_variation(&s, &prob).unwrap();
        assert!(g.v.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn homogeneity_ledger() {
        // J(t·s) = t²(kin+ext) + t⁴ coulomb − t^p (power+cross), exactly.
        let spec = GridSpec::new(16, 5.0).unwrap();
        let s = gaussian_pair(spec);
        let prob = autonomous_problem(&s.u, 2.5, 1.0, 1.0, 1.0);
        let e1 = energy(&s, &prob).unwrap();
        for t in [0.5f64, 2.0] {
            let et = energy(&s.scaled(t), &prob).unwrap();
            let predicted = t * t * (e1.kinetic + e1.external) + t.powi(4) * e1.coulomb
                - t.powf(prob.p) * (e1.power + e1.cross);
            assert!(
                (et.total - predicted).abs() < 1e-12 * et.scale(),
                "t={t}: {} vs {predicted}",
                et.total
            );
        }
    }

    #[test]
    fn nehari_scaling_identity() {
        let spec = GridSpec::new(16, 5.0).unwrap();
        let s = gaussian_pair(spec);
        let prob = autonomous_problem(&s.u, 2.7, 0.8, 1.0, 1.0);
        let e = energy(&s, &prob).unwrap();
        let (a, b, c) = e.fibering_abc(prob.p);
        for t in [0.5f64, 2.0] {
            let res = nehari_residual(&s.scaled(t), &prob).unwrap();
            let predicted = t * t * a + t.powi(4) * b - t.powf(prob.p) * c;
            assert!((res - predicted).abs() < 1e-12 * (a + b + c.abs()) * t.powi(4).max(1.0));
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let spec = GridSpec::new(16, 5.0).unwrap();
        let s = gaussian_pair(spec);
        let prob = autonomous_problem(&s.u, 2.5, 1.0, 1.0, 1.0);
        let w = PairState::new(
            Field3D::from_radial_fn(spec, |r| 0.3 * (-r * r / 1.7).exp()),
            Field3D::from_radial_fn(spec, |r| 0.2 * (-r * r / 2.3).exp()),
        )
        .unwrap();
        let g = first_variation(&s, &prob).unwrap();
        let inner = g.u.dot(&w.u) + g.v.dot(&w.v);
        let t = 1e-4;
        let ep = energy(&s.axpy(t, &w), &prob).unwrap().total;
        let em = energy(&s.axpy(-t, &w), &prob).unwrap().total;
        let fd = (ep - em) / (2.0 * t);
        assert!((inner - fd).abs() < 1e-6 * inner.abs(), "analytic {inner} vs fd {fd}");
    }

    #[test]
    fn swap_symmetry() {
        let spec = GridSpec::new(16, 5.0).unwrap();
        let s = gaussian_pair(spec);
        let swapped = PairState::new(s.v.clone(), s.u.clone()).unwrap();
        let prob = autonomous_problem(&s.u, 3.0, 1.5, 1.0, 1.0);
        let e1 = energy(&s, &prob).unwrap();
        let e2 = energy(&swapped, &prob).unwrap();
        assert!((e1.total - e2.total).abs() < 1e-13 * e1.scale());
        let g1 = first_variation(&s, &prob).unwrap();
        let g2 = first_variation(&swapped, &prob).unwrap();
        for (a, b) in g1.u.values().iter().zip(g2.v.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ansatz_terms_split_as_g_beta() {
        // For (√σ z, √(1-σ) z): kinetic+external and coulomb are σ-free;
        // power+cross = (1/p) g_β(σ) ∫|z|^p.
        let spec = GridSpec::new(16, 5.0).unwrap();
        let z = Field3D::from_radial_fn(spec, |r| (-r * r / 2.0).exp());
        let prob = autonomous_problem(&z, 2.5, 1.0, 1.0, 1.0);
        let p = prob.p;
        let zp = {
            let mut acc = 0.0;
            for (i, &a) in z.values().iter().enumerate() {
                acc += a.abs().powf(p) * z.weight(i);
            }
            acc
        };
        let mut base: Option<(f64, f64)> = None;
        for sigma in [0.2f64, 0.5, 0.9] {
            let s = PairState::new(z.scaled(sigma.sqrt()), z.scaled((1.0 - sigma).sqrt())).unwrap();
            let e = energy(&s, &prob).unwrap();
            let quad = e.kinetic + e.external;
            let (q0, c0) = *base.get_or_insert((quad, e.coulomb));
            assert!((quad - q0).abs() < 1e-12 * q0);
            assert!((e.coulomb - c0).abs() < 1e-10 * c0);
            let g = crate::bounds::g_beta(sigma, prob.beta, p);
            assert!(
                ((e.power + e.cross) - g * zp / p).abs() < 1e-10 * zp,
                "sigma={sigma}"
            );
        }
    }

    #[test]
    fn classify_levels() {
        let spec = GridSpec::new(16, 4.0).unwrap();
        let z = Field3D::from_radial_fn(spec, |r| (-r * r).exp());
        let zero = Field3D::zeros(spec);
        assert_eq!(
            classify_nontriviality(&PairState::new(zero.clone(), zero.clone()).unwrap(), 1e-8),
            Triviality::Trivial
        );
        assert_eq!(
            classify_nontriviality(&PairState::new(z.clone(), zero.clone()).unwrap(), 1e-8),
            Triviality::Semitrivial
        );
        assert_eq!(
            classify_nontriviality(&PairState::new(z.clone(), z.clone()).unwrap(), 1e-8),
            Triviality::Vectorial
        );
    }

    #[test]
    fn pohozaev_requires_gradient_fields() {
        let spec = GridSpec::new(16, 4.0).unwrap();
        let s = gaussian_pair(spec);
        let mut prob = autonomous_problem(&s.u, 2.5, 1.0, 1.0, 1.0);
        prob.v_dot_x = None;
        assert!(matches!(pohozaev_residual(&s, &prob), Err(HfError::MissingGradientFields)));
    }

    #[test]
    fn zero_state_pohozaev() {
        let spec = GridSpec::new(16, 4.0).unwrap();
        let z = Field3D::zeros(spec);
        let prob = autonomous_problem(&z, 2.5, 1.0, 1.0, 1.0);
        let s = PairState::new(z.clone(), z.clone()).unwrap();
        let chk = pohozaev_residual(&s, &prob).unwrap();
        assert_eq!(chk.residual, 0.0);
    }
}
