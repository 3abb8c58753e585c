//! The form `η = ι_T dω`, the functional `gv = ∫ η∧dη`, its Frenet-frame
//! expression, and the behaviour of `η∧dη` under changes of the pair.

use crate::calculus::{d, integrate, integrate_masked, interior, lie, wedge};
use crate::error::{GvError, Result};
use crate::geometry::{CompatiblePair, DistributionPair, Geometry, CONSTRAINT_TOL};
use crate::grid::{same_grid, KForm, ScalarField, VectorField};
use crate::metric::MetricField;

/// `η = ι_T dω`.
pub fn eta(pair: &DistributionPair) -> KForm {
    interior(pair.t(), &d(pair.omega()).expect("1-form")).expect("same grid")
}

/// `η` through the Lie derivative path `ℒ_T ω` (equal to `ι_T dω` since `ω(T) = 1`).
pub fn eta_lie(pair: &DistributionPair) -> KForm {
    lie(pair.t(), pair.omega()).expect("same grid")
}

/// `η∧dη` for a 1-form `η`.
pub fn gv_form(eta: &KForm) -> KForm {
    wedge(eta, &d(eta).expect("1-form")).expect("degree 3")
}

/// `∫ η∧dη` over a closed (fully periodic) grid.
pub fn gv_direct(pair: &DistributionPair) -> Result<f64> {
    if !pair.grid().is_periodic() {
        return Err(GvError::NotPeriodic("the Godbillon-Vey integral"));
    }
    integrate(&gv_form(&eta(pair)))
}

/// Frenet-frame evaluation of the functional.
#[derive(Clone, Debug)]
pub struct GvReport {
    pub gv_direct: f64,
    pub gv_rw: f64,
    /// `|η∧dη + k²(τ − h_{B,N}) dV_g|` (coefficient of `dx¹∧dx²∧dx³`) on the mask, zero elsewhere.
    pub pointwise_residual: ScalarField,
    pub mask_fraction: f64,
}

/// Pointwise integrand `−k²(τ − h_{B,N})√g` on the mask, zero elsewhere.
pub fn reinhart_wood_density(cp: &CompatiblePair, geo: &Geometry) -> ScalarField {
    let fd = &geo.frenet;
    let v = (0..cp.grid().len())
        .map(|i| {
            if fd.valid[i] {
                let k = fd.k.values()[i];
                -k * k * (fd.tau.values()[i] - geo.sff.h_bn.values()[i]) * cp.g().sqrt_det()[i]
            } else {
                0.0
            }
        })
        .collect();
    ScalarField::new(*cp.grid(), v).unwrap()
}

pub fn gv_reinhart_wood(cp: &CompatiblePair, geo: &Geometry) -> Result<GvReport> {
    let gv_direct = gv_direct(cp.pair())?;
    let density = reinhart_wood_density(cp, geo);
    let gv_rw = integrate_masked(&KForm::volume(&density), &geo.frenet.valid)?;
    let form = gv_form(&eta(cp.pair()));
    let r = (0..cp.grid().len())
        .map(|i| {
            if geo.frenet.valid[i] {
                (form.comp(0)[i] - density.values()[i]).abs()
            } else {
                0.0
            }
        })
        .collect();
    Ok(GvReport {
        gv_direct,
        gv_rw,
        pointwise_residual: ScalarField::new(*cp.grid(), r)?,
        mask_fraction: geo.frenet.mask_fraction(),
    })
}

/// Residual fields of the Frenet-frame values of `dη` and of `η = kN♭`.
#[derive(Clone, Debug)]
pub struct DEtaResiduals {
    /// `dη(N,B) + 2 Div(𝒯_{N,B} T)`
    pub nb: ScalarField,
    /// `dη(T,B) − k(τ − h_{B,N})`
    pub tb: ScalarField,
    /// `dη(T,N) − T(k) + k h_{N,N}`
    pub tn: ScalarField,
    /// `max_a |η_a − k (N♭)_a|`
    pub eta_kn: ScalarField,
}

/// Evaluates a 2-form on a pair of vectors at every point.
pub fn eval2(form: &KForm, x: &VectorField, y: &VectorField) -> ScalarField {
    debug_assert_eq!(form.degree(), 2);
    let v = (0..form.grid().len())
        .map(|i| crate::calculus::dot(form.at3(i), crate::calculus::cross(x.at(i), y.at(i))))
        .collect();
    ScalarField::new(*form.grid(), v).unwrap()
}

/// Evaluates a 1-form on a vector field at every point.
pub fn eval1(form: &KForm, x: &VectorField) -> ScalarField {
    interior(x, form).expect("1-form").coefficient()
}

/// All four residuals, zero off the Frenet mask.
pub fn deta_frenet_check(cp: &CompatiblePair, geo: &Geometry) -> DEtaResiduals {
    let fd = &geo.frenet;
    let sff = &geo.sff;
    let t = cp.pair().t();
    let e = eta(cp.pair());
    let de = d(&e).unwrap();
    let div = crate::geometry::div_along(cp.g(), &sff.tcal, t);
    let nb = &eval2(&de, &fd.n, &fd.b) + &div.scale(2.0);
    let tb = &eval2(&de, t, &fd.b) - &(&fd.k * &(&fd.tau - &sff.h_bn));
    let tn = &(&eval2(&de, t, &fd.n) - &fd.tk) + &(&fd.k * &sff.h_nn);
    let nflat = cp.g().flat(&fd.n).unwrap();
    let eta_kn = ScalarField::new(
        *cp.grid(),
        (0..cp.grid().len())
            .map(|i| {
                let (a, b, k) = (e.at3(i), nflat.at3(i), fd.k.values()[i]);
                (0..3).map(|c| (a[c] - k * b[c]).abs()).fold(0.0, f64::max)
            })
            .collect(),
    )
    .unwrap();
    let mask = |f: ScalarField| {
        ScalarField::new(
            f.grid().to_owned(),
            f.values()
                .iter()
                .zip(&fd.valid)
                .map(|(v, m)| if *m { *v } else { 0.0 })
                .collect(),
        )
        .unwrap()
    };
    DEtaResiduals {
        nb: mask(nb),
        tb: mask(tb),
        tn: mask(tn),
        eta_kn: mask(eta_kn),
    }
}

/// The three elementary changes of a pair.
#[derive(Clone, Debug)]
pub enum PairChange {
    /// `(e^f ω, e^{−f} T)`
    Scale(ScalarField),
    /// `(ω, T + X)` with `ω(X) = 0`
    Shift(VectorField),
    /// `(ω + μ, T)` with `μ(T) = 0`
    Tilt(KForm),
}

pub fn transform_pair(pair: &DistributionPair, change: &PairChange) -> Result<DistributionPair> {
    match change {
        PairChange::Scale(f) => {
            same_grid(pair.grid(), f.grid())?;
            let ef = f.map(f64::exp);
            let emf = f.map(|v| (-v).exp());
            DistributionPair::new(pair.omega().scale_by(&ef), pair.t().scale_by(&emf))
        }
        PairChange::Shift(x) => {
            check_annihilated("omega(X) = 0", &eval1(pair.omega(), x))?;
            DistributionPair::new(pair.omega().clone(), pair.t().lin_comb(1.0, x, 1.0))
        }
        PairChange::Tilt(mu) => {
            if mu.degree() != 1 {
                return Err(GvError::Degree {
                    found: mu.degree(),
                    reason: "tilt generator must be a 1-form",
                });
            }
            check_annihilated("mu(T) = 0", &eval1(mu, pair.t()))?;
            DistributionPair::new(pair.omega().add(mu)?, pair.t().clone())
        }
    }
}

pub(crate) fn check_annihilated(constraint: &'static str, f: &ScalarField) -> Result<()> {
    let r = f.max_abs();
    if r <= CONSTRAINT_TOL {
        Ok(())
    } else {
        Err(GvError::Constraint {
            constraint,
            residual: r,
            tolerance: CONSTRAINT_TOL,
        })
    }
}

/// Outcome of comparing `η̃∧dη̃` with the closed-form right-hand side.
#[derive(Clone, Debug)]
pub struct TransformationReport {
    /// `η̃ − η − (predicted change)`, max-norm over the evaluation points.
    pub eta_residual: f64,
    /// `η̃∧dη̃ − RHS`, max-norm over the evaluation points.
    pub pointwise_residual: f64,
    /// `∫ η̃∧dη̃`, when the grid is closed.
    pub lhs_integral: Option<f64>,
    /// `∫` of the right-hand side without its exact term.
    pub rhs_integral: Option<f64>,
    /// `∫` of the exact term alone.
    pub exact_integral: Option<f64>,
    /// Scale of `η̃∧dη̃` used to judge the residuals.
    pub magnitude: f64,
}

/// Builds the transformed pair and checks
/// - scale: `η̃∧dη̃ = η∧dη + dα + 2T(f) ω∧dη + T(f)² ω∧dω`,
///   `α = −f dη − f d(T(f)ω) + T(f) ω∧η`;
/// - shift/tilt with `ξ = ι_X dω` or `ξ = ι_T dμ`:
///   `η̃∧dη̃ = η∧dη − d(η∧ξ) + 2 dη∧ξ + ξ∧dξ`.
///
/// Pointwise residuals are taken on points at least `margin` cells from bounded faces.
pub fn verify_transformation_law(
    pair: &DistributionPair,
    change: &PairChange,
    margin: usize,
) -> Result<TransformationReport> {
    let new = transform_pair(pair, change)?;
    let grid = *pair.grid();
    let e = eta(pair);
    let de = d(&e)?;
    let et = eta(&new);
    let lhs = gv_form(&et);
    let omega = pair.omega();
    let (predicted, exact, rest) = match change {
        PairChange::Scale(f) => {
            let tf = crate::calculus::directional(pair.t(), f);
            let df = d(&KForm::function(f))?;
            let beta = omega.scale_by(&tf).sub(&df)?;
            let tf_omega = omega.scale_by(&tf);
            let alpha = de
                .scale_by(f)
                .scale(-1.0)
                .sub(&d(&tf_omega)?.scale_by(f))?
                .add(&wedge(&tf_omega, &e)?)?;
            let exact = d(&alpha)?;
            let rest = wedge(&e, &de)?
                .add(&wedge(omega, &de)?.scale_by(&tf).scale(2.0))?
                .add(&wedge(omega, &d(omega)?)?.scale_by(&tf.map(|v| v * v)))?;
            (beta, exact, rest)
        }
        PairChange::Shift(x) => {
            let xi = interior(x, &d(omega)?)?;
            shifted_terms(&e, &de, xi)?
        }
        PairChange::Tilt(mu) => {
            let xi = interior(pair.t(), &d(mu)?)?;
            shifted_terms(&e, &de, xi)?
        }
    };
    let mask = grid.interior_mask(margin);
    let eta_residual = et.sub(&e)?.sub(&predicted)?.max_abs_where(&mask);
    let rhs = rest.add(&exact)?;
    let pointwise_residual = lhs.sub(&rhs)?.max_abs_where(&mask);
    let closed = grid.is_periodic();
    let integral = |f: &KForm| if closed { integrate(f).ok() } else { None };
    Ok(TransformationReport {
        eta_residual,
        pointwise_residual,
        lhs_integral: integral(&lhs),
        rhs_integral: integral(&rest),
        exact_integral: integral(&exact),
        magnitude: lhs.max_abs_where(&mask).max(rest.max_abs_where(&mask)),
    })
}

fn shifted_terms(e: &KForm, de: &KForm, xi: KForm) -> Result<(KForm, KForm, KForm)> {
    let exact = d(&wedge(e, &xi)?)?.scale(-1.0);
    let rest = wedge(e, de)?
        .add(&wedge(de, &xi)?.scale(2.0))?
        .add(&wedge(&xi, &d(&xi)?)?)?;
    Ok((xi, exact, rest))
}

/// Pointwise fields of the local-minimum conditions for a test direction `Ẋ`.
#[derive(Clone, Debug)]
pub struct ConfoliationReport {
    /// `⋆(ω∧dω)`
    pub omega_domega: ScalarField,
    /// `⋆(τ∧dτ)`, `τ = ι_Ẋ dω`
    pub tau_dtau: ScalarField,
    /// `⋆(ω∧dω)⋆(τ∧dτ) − (⋆(ω∧dτ))²`
    pub determinant: ScalarField,
    pub verdict: bool,
}

/// Evaluates the three conditions on points `margin` cells inside bounded faces;
/// the verdict holds when all three are `≥ −tol` there.
pub fn confoliation_check(
    pair: &DistributionPair,
    g: &MetricField,
    xdot: &VectorField,
    tol: f64,
    margin: usize,
) -> Result<ConfoliationReport> {
    check_annihilated("omega(X) = 0", &eval1(pair.omega(), xdot))?;
    let omega = pair.omega();
    let dw = d(omega)?;
    let tau = interior(xdot, &dw)?;
    let dtau = d(&tau)?;
    let star = |f: KForm| g.hodge(&f).map(|s| s.coefficient());
    let a = star(wedge(omega, &dw)?)?;
    let b = star(wedge(&tau, &dtau)?)?;
    let c = star(wedge(omega, &dtau)?)?;
    let det = &(&a * &b) - &(&c * &c);
    let mask = pair.grid().interior_mask(margin);
    let ok = |f: &ScalarField| {
        f.values()
            .iter()
            .zip(&mask)
            .all(|(v, m)| !*m || *v >= -tol)
    };
    let verdict = ok(&a) && ok(&b) && ok(&det);
    Ok(ConfoliationReport {
        omega_domega: a,
        tau_dtau: b,
        determinant: det,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_compatible_metric, MetricSeed};
    use crate::grid::ChartGrid;

    fn chart(n: usize) -> ChartGrid {
        ChartGrid::chart([n; 3], [-1.0; 3], [1.0; 3]).unwrap()
    }

    #[test]
    fn eta_of_closed_and_contact_forms_vanishes() {
        let g = chart(10);
        let contact = DistributionPair::new(
            KForm::from_fn(&g, 1, |x| [-x[1], 0.0, 1.0]),
            VectorField::coordinate(&g, 2),
        )
        .unwrap();
        assert!(eta(&contact).max_abs() < 1e-12);
        let fol = DistributionPair::new(
            KForm::from_fn(&g, 1, |_| [0.0, 0.0, 1.0]),
            VectorField::coordinate(&g, 2),
        )
        .unwrap();
        assert_eq!(eta(&fol).max_abs(), 0.0);
        assert!(matches!(gv_direct(&fol), Err(GvError::NotPeriodic(_))));
    }

    #[test]
    fn eta_closed_form_oracle() {
        // ω = dz + ε sin z dx¹, T = ∂₃ → η = ε cos z dx¹
        let g = ChartGrid::torus([32; 3]).unwrap();
        let eps = 0.3;
        let pair = DistributionPair::new(
            KForm::from_fn(&g, 1, move |x| [eps * x[2].sin(), 0.0, 1.0]),
            VectorField::coordinate(&g, 2),
        )
        .unwrap();
        let e = eta(&pair);
        let exact = KForm::from_fn(&g, 1, move |x| [eps * x[2].cos(), 0.0, 0.0]);
        assert!(e.sub(&exact).unwrap().max_abs() < 1e-4);
        assert!(e.sub(&eta_lie(&pair)).unwrap().max_abs() < 1e-13);
        assert!(eval1(&e, pair.t()).max_abs() < 1e-15);
    }

    #[test]
    fn constant_rescale_keeps_eta() {
        let g = ChartGrid::torus([16; 3]).unwrap();
        let pair = DistributionPair::new(
            KForm::from_fn(&g, 1, |x| [0.2 * x[2].sin(), 0.1 * x[0].cos(), 1.0]),
            VectorField::coordinate(&g, 2),
        )
        .unwrap();
        let new = transform_pair(&pair, &PairChange::Scale(ScalarField::constant(&g, 0.7))).unwrap();
        assert!(eta(&new).sub(&eta(&pair)).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn shift_generator_must_lie_in_plane_field() {
        let g = ChartGrid::torus([8; 3]).unwrap();
        let pair = DistributionPair::new(
            KForm::from_fn(&g, 1, |_| [0.0, 0.0, 1.0]),
            VectorField::coordinate(&g, 2),
        )
        .unwrap();
        let bad = VectorField::from_fn(&g, |_| [0.0, 0.1, 0.1]);
        assert!(matches!(
            transform_pair(&pair, &PairChange::Shift(bad)),
            Err(GvError::Constraint { .. })
        ));
        let bad_mu = KForm::from_fn(&g, 1, |_| [0.0, 0.0, 0.5]);
        assert!(transform_pair(&pair, &PairChange::Tilt(bad_mu)).is_err());
    }

    #[test]
    fn contact_chart_confoliation_verdicts() {
        let g = chart(16);
        let pair = DistributionPair::new(
            KForm::from_fn(&g, 1, |x| [-x[1], 0.0, 1.0]),
            VectorField::coordinate(&g, 2),
        )
        .unwrap();
        let cp = build_compatible_metric(&pair, MetricSeed::Euclidean).unwrap();
        // Ẋ = p₁X₁ + p₂X₂ with X₁ = ∂₁ + x₂∂₃, X₂ = ∂₂
        let xdot = |s: f64| VectorField::from_fn(&g, move |x| [1.0, s * x[2], x[1]]);
        let good = confoliation_check(&pair, cp.g(), &xdot(-1.0), 1e-9, 2).unwrap();
        assert!(good.verdict);
        for (v, w) in good.tau_dtau.values().iter().zip(cp.g().sqrt_det()) {
            assert!((v * w - 1.0).abs() < 1e-12);
        }
        let bad = confoliation_check(&pair, cp.g(), &xdot(1.0), 1e-9, 2).unwrap();
        assert!(!bad.verdict);
        let fol = DistributionPair::new(
            KForm::from_fn(&g, 1, |_| [0.0, 0.0, 1.0]),
            VectorField::coordinate(&g, 2),
        )
        .unwrap();
        let flat = MetricField::euclidean(&g);
        let r = confoliation_check(&fol, &flat, &VectorField::from_fn(&g, |x| [x[2], 1.0, 0.0]), 1e-12, 0).unwrap();
        assert_eq!(r.omega_domega.max_abs() + r.tau_dtau.max_abs() + r.determinant.max_abs(), 0.0);
    }
}
