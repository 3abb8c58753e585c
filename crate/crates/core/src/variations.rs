//! First and second variations of `gv` along one-parameter families of pairs,
//! index forms, and finite-difference oracles in the path parameter.

use crate::calculus::{d, directional, integrate, interior, lie, wedge};
use crate::error::{GvError, Result};
use crate::geometry::{CompatiblePair, DistributionPair, Geometry};
use crate::grid::{KForm, ScalarField, VectorField};
use crate::gv::{check_annihilated, eta, eval1, gv_direct};

/// A curve `t ↦ (ω_t, T_t)` through a pair, given by its generators.
#[derive(Clone, Debug)]
pub enum Variation {
    /// `(e^{f_t} ω, e^{−f_t} T)`, `f_t = t f + t²/2 f̈`.
    Scale { f: ScalarField, f2: Option<ScalarField> },
    /// `(ω, T + t X + t²/2 Ẍ)` with `ω(X) = ω(Ẍ) = 0`.
    Shift { x: VectorField, x2: Option<VectorField> },
    /// `(ω + t μ + t²/2 μ̈, T)` with `μ(T) = μ̈(T) = 0`.
    Tilt { mu: KForm, mu2: Option<KForm> },
}

impl Variation {
    pub fn kind(&self) -> &'static str {
        match self {
            Variation::Scale { .. } => "scale",
            Variation::Shift { .. } => "shift",
            Variation::Tilt { .. } => "tilt",
        }
    }

    fn validate(&self, pair: &DistributionPair) -> Result<()> {
        match self {
            Variation::Scale { .. } => Ok(()),
            Variation::Shift { x, x2 } => {
                check_annihilated("omega(X) = 0", &eval1(pair.omega(), x))?;
                if let Some(x2) = x2 {
                    check_annihilated("omega(X'') = 0", &eval1(pair.omega(), x2))?;
                }
                Ok(())
            }
            Variation::Tilt { mu, mu2 } => {
                check_annihilated("mu(T) = 0", &eval1(mu, pair.t()))?;
                if let Some(m2) = mu2 {
                    check_annihilated("mu''(T) = 0", &eval1(m2, pair.t()))?;
                }
                Ok(())
            }
        }
    }

    /// The pair at parameter `t`.
    pub fn at(&self, pair: &DistributionPair, t: f64) -> Result<DistributionPair> {
        self.validate(pair)?;
        let half = 0.5 * t * t;
        match self {
            Variation::Scale { f, f2 } => {
                let ft = match f2 {
                    Some(f2) => f.zip_with(f2, |a, b| t * a + half * b),
                    None => f.scale(t),
                };
                DistributionPair::new(
                    pair.omega().scale_by(&ft.map(f64::exp)),
                    pair.t().scale_by(&ft.map(|v| (-v).exp())),
                )
            }
            Variation::Shift { x, x2 } => {
                let mut tt = pair.t().lin_comb(1.0, x, t);
                if let Some(x2) = x2 {
                    tt = tt.lin_comb(1.0, x2, half);
                }
                DistributionPair::new(pair.omega().clone(), tt)
            }
            Variation::Tilt { mu, mu2 } => {
                let mut w = pair.omega().lin_comb(1.0, mu, t)?;
                if let Some(m2) = mu2 {
                    w = w.lin_comb(1.0, m2, half)?;
                }
                DistributionPair::new(w, pair.t().clone())
            }
        }
    }

    /// `(ω̇, ω̈, Ṫ, T̈)` at `t = 0`.
    fn derivatives(&self, pair: &DistributionPair) -> Result<(KForm, KForm, VectorField, VectorField)> {
        self.validate(pair)?;
        let grid = pair.grid();
        let zero_form = KForm::zero(grid, 1);
        let zero_vec = VectorField::zeros(grid);
        let omega = pair.omega();
        let t = pair.t();
        Ok(match self {
            Variation::Scale { f, f2 } => {
                let f2 = f2.clone().unwrap_or_else(|| ScalarField::zeros(grid));
                let plus = f.zip_with(&f2, |a, b| a * a + b);
                let minus = f.zip_with(&f2, |a, b| a * a - b);
                (
                    omega.scale_by(f),
                    omega.scale_by(&plus),
                    t.scale_by(&f.scale(-1.0)),
                    t.scale_by(&minus),
                )
            }
            Variation::Shift { x, x2 } => (
                zero_form.clone(),
                zero_form,
                x.clone(),
                x2.clone().unwrap_or(zero_vec),
            ),
            Variation::Tilt { mu, mu2 } => (
                mu.clone(),
                mu2.clone().unwrap_or(zero_form),
                zero_vec.clone(),
                zero_vec,
            ),
        })
    }
}

/// `η̇ = ι_T dω̇ + ι_Ṫ dω`.
pub fn eta_dot(pair: &DistributionPair, v: &Variation) -> Result<KForm> {
    let (w1, _, t1, _) = v.derivatives(pair)?;
    interior(pair.t(), &d(&w1)?)?.add(&interior(&t1, &d(pair.omega())?)?)
}

/// `η̈ = ι_T dω̈ + 2 ι_Ṫ dω̇ + ι_T̈ dω`.
pub fn eta_ddot(pair: &DistributionPair, v: &Variation) -> Result<KForm> {
    let (w1, w2, t1, t2) = v.derivatives(pair)?;
    interior(pair.t(), &d(&w2)?)?
        .add(&interior(&t1, &d(&w1)?)?.scale(2.0))?
        .add(&interior(&t2, &d(pair.omega())?)?)
}

fn require_closed(pair: &DistributionPair, what: &'static str) -> Result<()> {
    if pair.grid().is_periodic() {
        Ok(())
    } else {
        Err(GvError::NotPeriodic(what))
    }
}

/// `2 ∫ η̇∧dη`.
pub fn first_variation(pair: &DistributionPair, v: &Variation) -> Result<f64> {
    require_closed(pair, "the first variation")?;
    let e = eta(pair);
    Ok(2.0 * integrate(&wedge(&eta_dot(pair, v)?, &d(&e)?)?)?)
}

/// `2 ∫ (η̈∧dη + η̇∧dη̇)`.
pub fn second_variation(pair: &DistributionPair, v: &Variation) -> Result<f64> {
    require_closed(pair, "the second variation")?;
    let e = eta(pair);
    let e1 = eta_dot(pair, v)?;
    let e2 = eta_ddot(pair, v)?;
    let top = wedge(&e2, &d(&e)?)?.add(&wedge(&e1, &d(&e1)?)?)?;
    Ok(2.0 * integrate(&top)?)
}

/// Central differences of `t ↦ value(t)` at `t = 0` from samples at `0, ±dt, ±2dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct FdEstimate {
    pub order: u8,
    pub dt: f64,
    /// Three-point central difference with step `dt`.
    pub raw: f64,
    /// Same with step `2 dt`.
    pub raw_coarse: f64,
    /// Five-point Richardson combination.
    pub richardson: f64,
    /// Rounding level of the raw difference, relative to `max(1, |samples|)`.
    pub rounding_floor: f64,
    /// Values at `−2dt, −dt, 0, dt, 2dt`.
    pub samples: [f64; 5],
}

impl FdEstimate {
    pub fn from_samples(samples: [f64; 5], dt: f64, order: u8) -> Self {
        let [gm2, gm1, g0, g1, g2] = samples;
        let big = samples.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let eps = f64::EPSILON;
        match order {
            1 => Self {
                order,
                dt,
                raw: (g1 - gm1) / (2.0 * dt),
                raw_coarse: (g2 - gm2) / (4.0 * dt),
                richardson: (8.0 * (g1 - gm1) - (g2 - gm2)) / (12.0 * dt),
                rounding_floor: 8.0 * eps * big / dt,
                samples,
            },
            _ => Self {
                order: 2,
                dt,
                raw: (g1 - 2.0 * g0 + gm1) / (dt * dt),
                raw_coarse: (g2 - 2.0 * g0 + gm2) / (4.0 * dt * dt),
                richardson: (-g2 + 16.0 * g1 - 30.0 * g0 + 16.0 * gm1 - gm2) / (12.0 * dt * dt),
                rounding_floor: 32.0 * eps * big / (dt * dt),
                samples,
            },
        }
    }

    /// `log₂` of the ratio of the coarse and fine raw errors against `exact`;
    /// `None` when the fine error is already at the rounding floor.
    pub fn observed_order(&self, exact: f64) -> Option<f64> {
        let fine = (self.raw - exact).abs();
        let coarse = (self.raw_coarse - exact).abs();
        if fine <= self.rounding_floor || coarse <= self.rounding_floor {
            None
        } else {
            Some((coarse / fine).log2())
        }
    }
}

/// Samples `value` at `0, ±dt, ±2dt` and differentiates.
pub fn finite_difference(value: impl Fn(f64) -> Result<f64>, dt: f64, order: u8) -> Result<FdEstimate> {
    if !(dt > 0.0) {
        return Err(GvError::Invalid(format!("time step must be positive, got {dt}")));
    }
    let mut s = [0.0; 5];
    for (slot, k) in s.iter_mut().zip([-2.0, -1.0, 0.0, 1.0, 2.0]) {
        *slot = value(k * dt)?;
    }
    Ok(FdEstimate::from_samples(s, dt, order))
}

/// Finite-difference derivative of `gv_direct` along the variation's exact path.
pub fn finite_difference_variation(
    pair: &DistributionPair,
    v: &Variation,
    dt: f64,
    order: u8,
) -> Result<FdEstimate> {
    require_closed(pair, "the finite-difference variation")?;
    finite_difference(|t| gv_direct(&v.at(pair, t)?), dt, order)
}

/// `I(φ, ψ) = ∫ φ∧dψ`; symmetric on closed grids and for compactly supported forms.
pub fn index_form(phi: &KForm, psi: &KForm) -> Result<f64> {
    integrate(&wedge(phi, &d(psi)?)?)
}

/// `I_T(α, β) = ∫ (ℒ_T² dα)∧β` for 1-forms annihilating `T`.
pub fn index_form_t(pair: &DistributionPair, alpha: &KForm, beta: &KForm) -> Result<f64> {
    check_annihilated("alpha(T) = 0", &eval1(alpha, pair.t()))?;
    check_annihilated("beta(T) = 0", &eval1(beta, pair.t()))?;
    let t = pair.t();
    let l2 = lie(t, &lie(t, &d(alpha)?)?)?;
    integrate(&wedge(&l2, beta)?)
}

/// Frenet-frame expressions of the first variation.
///
/// - scale: `4 ∫ T(φ̇) Div(𝒯 T) dV_g` with `φ̇ = −f`;
/// - shift `X = aN + bB`: `4 ∫ [a(kΔ − 𝒯ψ₂) − b 𝒯ψ₁] dV_g`;
/// - tilt `μ = m_N N♭ + m_B B♭`:
///   `2 ∫ m_N[T(ψ₁) − σ₁ψ₁ + ψ₁h_NN − ψ₂(h_BN − τ)] + m_B[σ₁ψ₂ − T(ψ₂) − ψ₂h_BB + ψ₁(τ + h_NB)] dV_g`,
///
/// where `Δ = Div(𝒯_{N,B} T)`, `ψ₁ = k(τ − h_BN)`, `ψ₂ = T(k) − k h_NN`.
/// Frame-dependent integrands are set to zero off the curvature mask.
pub fn frenet_first_variation(cp: &CompatiblePair, geo: &Geometry, v: &Variation) -> Result<f64> {
    let pair = cp.pair();
    require_closed(pair, "the first variation")?;
    let g = cp.g();
    let t = pair.t();
    let fd = &geo.frenet;
    let sff = &geo.sff;
    let delta = crate::geometry::div_along(g, &sff.tcal, t);
    let psi1 = &fd.k * &(&fd.tau - &sff.h_bn);
    let psi2 = &fd.tk - &(&fd.k * &sff.h_nn);
    let n = cp.grid().len();
    let mut density = vec![0.0; n];
    match v {
        Variation::Scale { f, .. } => {
            let tphi = directional(t, &f.scale(-1.0));
            for i in 0..n {
                density[i] = 4.0 * tphi.values()[i] * delta.values()[i];
            }
        }
        Variation::Shift { x, .. } => {
            v.validate(pair)?;
            let a = g.inner(x, &fd.n);
            let b = g.inner(x, &fd.b);
            for i in 0..n {
                if !fd.valid[i] {
                    continue;
                }
                let tc = sff.tcal.values()[i];
                density[i] = 4.0
                    * (a.values()[i] * (fd.k.values()[i] * delta.values()[i] - tc * psi2.values()[i])
                        - b.values()[i] * tc * psi1.values()[i]);
            }
        }
        Variation::Tilt { mu, .. } => {
            v.validate(pair)?;
            let m_n = eval1(mu, &fd.n);
            let m_b = eval1(mu, &fd.b);
            let tpsi1 = directional(t, &psi1);
            let tpsi2 = directional(t, &psi2);
            for i in 0..n {
                if !fd.valid[i] {
                    continue;
                }
                let (p1, p2) = (psi1.values()[i], psi2.values()[i]);
                let s1 = sff.sigma1.values()[i];
                let tau = fd.tau.values()[i];
                let a = tpsi1.values()[i] - s1 * p1 + p1 * sff.h_nn.values()[i]
                    - p2 * (sff.h_bn.values()[i] - tau);
                let b = s1 * p2 - tpsi2.values()[i] - p2 * sff.h_bb.values()[i]
                    + p1 * (tau + sff.h_nb.values()[i]);
                density[i] = 2.0 * (m_n.values()[i] * a + m_b.values()[i] * b);
            }
        }
    }
    for (dv, s) in density.iter_mut().zip(g.sqrt_det()) {
        *dv *= s;
    }
    Ok(crate::calculus::integrate_values(cp.grid(), &density))
}
