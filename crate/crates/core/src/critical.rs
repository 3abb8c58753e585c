//! Euler-Lagrange residuals of the functional: the `(ℒ_T)³ω` criterion, its
//! Frenet-frame form, the umbilical-foliation system, and the equations for
//! variations of a compatible metric.

use crate::calculus::{directional, integrate_values, lie};
use crate::error::{GvError, Result};
use crate::geometry::{div_along, CompatiblePair, DistributionPair, Geometry};
use crate::grid::{KForm, ScalarField};
use crate::gv::{eval1, gv_direct};
use crate::metric::{invert, sym};

/// `(ℒ_T)³ ω`.
pub fn lt3_residual(pair: &DistributionPair) -> KForm {
    let t = pair.t();
    let l1 = lie(t, pair.omega()).expect("same grid");
    let l2 = lie(t, &l1).expect("same grid");
    lie(t, &l2).expect("same grid")
}

/// `((ℒ_T)³ω)(N)` and `((ℒ_T)³ω)(B)`.
pub fn lt3_frame_components(pair: &DistributionPair, geo: &Geometry) -> (ScalarField, ScalarField) {
    let l3 = lt3_residual(pair);
    (eval1(&l3, &geo.frenet.n), eval1(&l3, &geo.frenet.b))
}

fn masked(f: ScalarField, mask: &[bool]) -> ScalarField {
    let v = f
        .values()
        .iter()
        .zip(mask)
        .map(|(x, m)| if *m { *x } else { 0.0 })
        .collect();
    ScalarField::new(*f.grid(), v).unwrap()
}

/// Frenet-frame expressions of the two components of `(ℒ_T)³ω` for an
/// integrable plane field, zero off the curvature mask:
///
/// - `N`: `T(T(k)) − 2T(k)h_NN − k T(h_NN) + k h_{AN,N} − kτ²`, `h_{AN,N} = h_NN² + h_NB h_BN`;
/// - `B`: `−2T(k(h_BN − τ)) + k(T(h_BN) − T(τ) + (h_BN − τ)σ₁)`.
pub fn geometric_el_residuals(cp: &CompatiblePair, geo: &Geometry) -> (ScalarField, ScalarField) {
    let t = cp.pair().t();
    let fd = &geo.frenet;
    let s = &geo.sff;
    let k = &fd.k;
    let ttk = directional(t, &fd.tk);
    let t_hnn = directional(t, &s.h_nn);
    let t_hbn = directional(t, &s.h_bn);
    let t_tau = directional(t, &fd.tau);
    let gap = &s.h_bn - &fd.tau;
    let t_kgap = directional(t, &(k * &gap));
    let n = cp.grid().len();
    let mut l1 = vec![0.0; n];
    let mut l2 = vec![0.0; n];
    for i in 0..n {
        if !fd.valid[i] {
            continue;
        }
        let kk = k.values()[i];
        let (hnn, hnb, hbn) = (s.h_nn.values()[i], s.h_nb.values()[i], s.h_bn.values()[i]);
        let tau = fd.tau.values()[i];
        l1[i] = ttk.values()[i] - 2.0 * fd.tk.values()[i] * hnn - kk * t_hnn.values()[i]
            + kk * (hnn * hnn + hnb * hbn)
            - kk * tau * tau;
        l2[i] = -2.0 * t_kgap.values()[i]
            + kk * (t_hbn.values()[i] - t_tau.values()[i] + gap.values()[i] * s.sigma1.values()[i]);
    }
    let grid = *cp.grid();
    (
        ScalarField::new(grid, l1).unwrap(),
        ScalarField::new(grid, l2).unwrap(),
    )
}

/// Residuals of the critical-point system for a totally umbilical plane field
/// (`h = λ Id`):
/// `T(T(k)) − (τ² − λ²)k − T(λk) − λT(k)` and `T(kτ) + τT(k) − 2kλτ`.
#[derive(Clone, Debug)]
pub struct UmbilicResiduals {
    pub first: ScalarField,
    pub second: ScalarField,
    pub lambda: ScalarField,
    /// `max |h − λ Id|` over the grid.
    pub umbilicity: f64,
}

/// `lambda` defaults to `σ₁/2`; inputs whose `h` deviates from `λ Id` by more
/// than `umbilic_tol` are rejected.
pub fn umbilic_system_residuals(
    cp: &CompatiblePair,
    geo: &Geometry,
    lambda: Option<&ScalarField>,
    umbilic_tol: f64,
) -> Result<UmbilicResiduals> {
    let s = &geo.sff;
    let lam = lambda.cloned().unwrap_or_else(|| s.sigma1.scale(0.5));
    let umbilicity = (0..cp.grid().len())
        .map(|i| {
            let l = lam.values()[i];
            (s.h_nn.values()[i] - l)
                .abs()
                .max((s.h_bb.values()[i] - l).abs())
                .max(s.h_nb.values()[i].abs())
                .max(s.h_bn.values()[i].abs())
        })
        .fold(0.0, f64::max);
    if !(umbilicity <= umbilic_tol) {
        return Err(GvError::Constraint {
            constraint: "h = lambda Id",
            residual: umbilicity,
            tolerance: umbilic_tol,
        });
    }
    let t = cp.pair().t();
    let fd = &geo.frenet;
    let k = &fd.k;
    let ttk = directional(t, &fd.tk);
    let t_lk = directional(t, &(&lam * k));
    let t_ktau = directional(t, &(k * &fd.tau));
    let n = cp.grid().len();
    let mut r1 = vec![0.0; n];
    let mut r2 = vec![0.0; n];
    for i in 0..n {
        if !fd.valid[i] {
            continue;
        }
        let (kk, tau, l, tk) = (k.values()[i], fd.tau.values()[i], lam.values()[i], fd.tk.values()[i]);
        r1[i] = ttk.values()[i] - (tau * tau - l * l) * kk - t_lk.values()[i] - l * tk;
        r2[i] = t_ktau.values()[i] + tau * tk - 2.0 * kk * l * tau;
    }
    let grid = *cp.grid();
    Ok(UmbilicResiduals {
        first: ScalarField::new(grid, r1)?,
        second: ScalarField::new(grid, r2)?,
        lambda: lam,
        umbilicity,
    })
}

/// Residuals of `T(T(k)) = τ²k`, `T(kτ) + τT(k) = 0` for the periodic profile
/// `k = 1 + a sin z`, `τ = c/k²` along `T = ∂_z` on an `n`-point circle.
/// The second equation holds identically for this `τ`; the first only when
/// `a = c = 0`.
pub fn wp_periodic_residuals(n: usize, a: f64, c: f64) -> Result<(f64, f64)> {
    let grid = crate::grid::ChartGrid::torus([8, 8, n])?;
    let t = crate::grid::VectorField::coordinate(&grid, 2);
    let k = ScalarField::from_fn(&grid, |x| 1.0 + a * x[2].sin());
    if k.values().iter().any(|v| !(*v > 0.0)) {
        return Err(GvError::Invalid("k must stay positive".into()));
    }
    let tau = k.map(|v| c / (v * v));
    let tk = directional(&t, &k);
    let r1 = &directional(&t, &tk) - &(&(&tau * &tau) * &k);
    let r2 = &directional(&t, &(&k * &tau)) + &(&tau * &tk);
    Ok((r1.max_abs(), r2.max_abs()))
}

/// Left-hand sides of the Euler-Lagrange equations for metric variations.
#[derive(Clone, Debug)]
pub struct MetricElResiduals {
    /// `Q₁ = Div(Div(𝒯_{N,B} T) T)`
    pub q1: ScalarField,
    /// `Q₂ = Div(𝒯 T) − (T(log k) − h_NN) 𝒯` on the mask, zero elsewhere.
    pub q2: ScalarField,
    /// `Q₃ = (τ − h_BN) 𝒯` on the mask, zero elsewhere.
    pub q3: ScalarField,
    /// `k Q₂ = k Div(𝒯 T) − (T(k) − k h_NN) 𝒯`, defined everywhere.
    pub kq2: ScalarField,
    /// `k Q₃`
    pub kq3: ScalarField,
}

pub fn metric_el_residuals(cp: &CompatiblePair, geo: &Geometry) -> MetricElResiduals {
    let g = cp.g();
    let t = cp.pair().t();
    let fd = &geo.frenet;
    let s = &geo.sff;
    let delta = div_along(g, &s.tcal, t);
    let q1 = div_along(g, &delta, t);
    let n = cp.grid().len();
    let mut q2 = vec![0.0; n];
    let mut q3 = vec![0.0; n];
    let mut kq2 = vec![0.0; n];
    let mut kq3 = vec![0.0; n];
    for i in 0..n {
        if !fd.valid[i] {
            continue;
        }
        let (k, tk, tc) = (fd.k.values()[i], fd.tk.values()[i], s.tcal.values()[i]);
        let (hnn, hbn, tau) = (s.h_nn.values()[i], s.h_bn.values()[i], fd.tau.values()[i]);
        q2[i] = delta.values()[i] - (tk / k - hnn) * tc;
        q3[i] = (tau - hbn) * tc;
        kq2[i] = k * delta.values()[i] - (tk - k * hnn) * tc;
        kq3[i] = k * q3[i];
    }
    let grid = *cp.grid();
    let f = |v| ScalarField::new(grid, v).unwrap();
    MetricElResiduals {
        q1,
        q2: f(q2),
        q3: f(q3),
        kq2: f(kq2),
        kq3: f(kq3),
    }
}

/// A symmetric (0,2)-tensor field in coordinate components, packed like a metric.
#[derive(Clone, Debug)]
pub struct SymmetricField {
    pub comps: [Vec<f64>; 6],
}

impl SymmetricField {
    pub fn from_fn(grid: &crate::grid::ChartGrid, f: impl Fn([f64; 3]) -> [[f64; 3]; 3]) -> Self {
        let mut comps: [Vec<f64>; 6] = Default::default();
        for c in comps.iter_mut() {
            *c = vec![0.0; grid.len()];
        }
        for idx in 0..grid.len() {
            let m = f(grid.point(idx));
            for i in 0..3 {
                for j in i..3 {
                    comps[sym(i, j)][idx] = 0.5 * (m[i][j] + m[j][i]);
                }
            }
        }
        Self { comps }
    }

    /// `a⊗b + b⊗a`.
    pub fn symmetric_product(a: &KForm, b: &KForm) -> Self {
        let n = a.grid().len();
        let mut comps: [Vec<f64>; 6] = Default::default();
        for c in comps.iter_mut() {
            *c = vec![0.0; n];
        }
        for idx in 0..n {
            let (u, v) = (a.at3(idx), b.at3(idx));
            for i in 0..3 {
                for j in i..3 {
                    comps[sym(i, j)][idx] = u[i] * v[j] + v[i] * u[j];
                }
            }
        }
        Self { comps }
    }

    pub fn scale_by(&self, f: &ScalarField) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            for (v, s) in c.iter_mut().zip(f.values()) {
                *v *= s;
            }
        }
        out
    }

    pub fn at(&self, idx: usize) -> [[f64; 3]; 3] {
        let c = |i, j| self.comps[sym(i, j)][idx];
        [
            [c(0, 0), c(0, 1), c(0, 2)],
            [c(1, 0), c(1, 1), c(1, 2)],
            [c(2, 0), c(2, 1), c(2, 2)],
        ]
    }

    /// `S(X, Y)` pointwise.
    pub fn eval(&self, x: &crate::grid::VectorField, y: &crate::grid::VectorField) -> ScalarField {
        let v = (0..x.grid().len())
            .map(|i| crate::metric::quad(&self.at(i), x.at(i), y.at(i)))
            .collect();
        ScalarField::new(*x.grid(), v).unwrap()
    }
}

/// The pair `(ω_t, T_t)` determined by `ker ω` and the metric `g + tS`:
/// `T_t` is the `(g + tS)`-unit normal of the plane field and `ω_t = T_t♭`.
pub fn metric_path_pair(cp: &CompatiblePair, s: &SymmetricField, t: f64) -> Result<DistributionPair> {
    let grid = *cp.grid();
    let n = grid.len();
    let omega = cp.pair().omega();
    let mut w = vec![vec![0.0; n]; 3];
    let mut tv = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for idx in 0..n {
        let mut m = cp.g().at(idx);
        let si = s.at(idx);
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += t * si[a][b];
            }
        }
        if let Err(detail) = crate::metric::check_positive_definite(&m) {
            return Err(GvError::SingularMetric {
                index: idx,
                position: grid.point(idx),
                detail,
            });
        }
        let (inv, _) = invert(&m);
        let o = omega.at3(idx);
        let nv = crate::metric::mat_vec(&inv, o);
        let c = crate::calculus::dot(o, nv).sqrt();
        for a in 0..3 {
            tv[a][idx] = nv[a] / c;
            w[a][idx] = o[a] / c;
        }
    }
    DistributionPair::new(
        KForm::new(grid, 1, w)?,
        crate::grid::VectorField::new(grid, tv)?,
    )
}

/// `J(g + tS)`, the functional of the pair determined by the plane field and a metric.
pub fn metric_functional(cp: &CompatiblePair, s: &SymmetricField, t: f64) -> Result<f64> {
    gv_direct(&metric_path_pair(cp, s, t)?)
}

/// First variation of `J` under `g ↦ g + tS` predicted from the residuals:
/// `∫ (2 Q₁ S_TT − 4 k Q₂ S_TN + 4 k Q₃ S_TB) dV_g`.
pub fn metric_gradient_pairing(
    cp: &CompatiblePair,
    geo: &Geometry,
    q: &MetricElResiduals,
    s: &SymmetricField,
) -> f64 {
    let t = cp.pair().t();
    let fd = &geo.frenet;
    let s_tt = s.eval(t, t);
    let s_tn = s.eval(t, &fd.n);
    let s_tb = s.eval(t, &fd.b);
    let n = cp.grid().len();
    let density: Vec<f64> = (0..n)
        .map(|i| {
            let mut v = 2.0 * q.q1.values()[i] * s_tt.values()[i];
            if fd.valid[i] {
                v += -4.0 * q.kq2.values()[i] * s_tn.values()[i] + 4.0 * q.kq3.values()[i] * s_tb.values()[i];
            }
            v * cp.g().sqrt_det()[i]
        })
        .collect();
    integrate_values(cp.grid(), &density)
}

/// Inspection of the rectifying-plane condition `τ = h_BN` on the mask.
#[derive(Clone, Debug)]
pub struct RectifyingReport {
    /// `τ − h_BN` on the mask, zero elsewhere.
    pub gap: ScalarField,
    pub max_gap: f64,
    /// `min |𝒯_{N,B}|` over the mask (positive for a nowhere-integrable plane field).
    pub min_tcal: f64,
    pub verdict: bool,
    /// `∫ η∧dη`, present when the verdict holds on a closed grid.
    pub gv: Option<f64>,
    /// Grid index of the worst violation.
    pub worst_index: Option<usize>,
}

pub fn rectifying_plane_check(cp: &CompatiblePair, geo: &Geometry, tol: f64) -> Result<RectifyingReport> {
    let fd = &geo.frenet;
    let gap = masked(&fd.tau - &geo.sff.h_bn, &fd.valid);
    let mut max_gap = 0.0f64;
    let mut worst = None;
    let mut min_tcal = f64::INFINITY;
    for i in 0..gap.values().len() {
        if !fd.valid[i] {
            continue;
        }
        let v = gap.values()[i].abs();
        if v > max_gap {
            max_gap = v;
            worst = Some(i);
        }
        min_tcal = min_tcal.min(geo.sff.tcal.values()[i].abs());
    }
    let verdict = fd.valid.iter().any(|m| *m) && max_gap <= tol;
    let gv = if verdict && cp.grid().is_periodic() {
        Some(gv_direct(cp.pair())?)
    } else {
        None
    };
    Ok(RectifyingReport {
        gap,
        max_gap,
        min_tcal,
        verdict,
        gv,
        worst_index: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{find, CHART_RATIO};

    #[test]
    fn cubic_chart_triple_lie_derivative_is_exact() {
        let s = find("cubic-chart").unwrap();
        let pair = s.pair([12; 3]).unwrap();
        let l3 = lt3_residual(&pair);
        let c = 6.0 * s.amplitude;
        for i in 0..pair.grid().len() {
            let v = l3.at3(i);
            assert!((v[0] - c).abs() < 1e-9 && (v[1] - CHART_RATIO * c).abs() < 1e-9 && v[2].abs() < 1e-9);
        }
        let q = find("quadratic-chart").unwrap().pair([12; 3]).unwrap();
        assert!(lt3_residual(&q).max_abs() < 1e-9);
    }

    #[test]
    fn foliation_is_trivially_critical() {
        let cp = find("foliation").unwrap().compatible([8; 3]).unwrap();
        let geo = Geometry::new(&cp, None);
        let q = metric_el_residuals(&cp, &geo);
        assert_eq!(q.q1.max_abs() + q.q2.max_abs() + q.q3.max_abs(), 0.0);
        let (a, b) = geometric_el_residuals(&cp, &geo);
        assert_eq!(a.max_abs() + b.max_abs(), 0.0);
        let r = rectifying_plane_check(&cp, &geo, 1e-8).unwrap();
        assert!(!r.verdict && r.worst_index.is_none());
    }

    #[test]
    fn non_umbilic_input_rejected() {
        let cp = find("tilted").unwrap().compatible([16; 3]).unwrap();
        let geo = Geometry::new(&cp, None);
        assert!(matches!(
            umbilic_system_residuals(&cp, &geo, None, 1e-6),
            Err(GvError::Constraint { .. })
        ));
    }

    #[test]
    fn only_constant_profile_solves_periodic_system() {
        let (r1, r2) = wp_periodic_residuals(64, 0.0, 0.0).unwrap();
        assert!(r1 < 1e-14 && r2 < 1e-14);
        for (a, c) in [(0.3, 0.0), (0.0, 0.5), (0.5, 1.0)] {
            let (r1, r2) = wp_periodic_residuals(64, a, c).unwrap();
            assert!(r1 > 0.1 && r2 < 1e-3 * r1, "{a} {c}: {r1} {r2}");
        }
    }

    #[test]
    fn metric_path_keeps_plane_field() {
        let cp = find("tilted").unwrap().compatible([8; 3]).unwrap();
        let s = SymmetricField::from_fn(cp.grid(), |x| {
            [[x[0].sin(), 0.2, 0.0], [0.2, 0.5, x[2].cos() * 0.1], [0.0, x[2].cos() * 0.1, 0.3]]
        });
        let p = metric_path_pair(&cp, &s, 0.05).unwrap();
        for i in 0..cp.grid().len() {
            let a = p.omega().at3(i);
            let b = cp.pair().omega().at3(i);
            let cross = crate::calculus::cross(a, b);
            assert!(cross.iter().all(|v| v.abs() < 1e-14));
        }
        let p0 = metric_path_pair(&cp, &s, 0.0).unwrap();
        assert!(p0.t().lin_comb(1.0, cp.pair().t(), -1.0).max_abs() < 1e-14);
    }
}
