//! Compatible metrics, the Frenet apparatus of T-curves, and the second
//! fundamental form of the plane field.

use crate::calculus::{directional, dot};
use crate::error::{GvError, Result};
use crate::grid::{same_grid, ChartGrid, KForm, ScalarField, VectorField};
use crate::metric::{mat_vec, quad, Connection, Mat3, MetricField, IDENTITY};

/// Pointwise tolerance on the algebraic constraints `ω(T) = 1` and `T♭ = ω`.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// A plane field `ker ω` together with a transverse field normalized by `ω(T) = 1`.
#[derive(Clone, Debug)]
pub struct DistributionPair {
    omega: KForm,
    t: VectorField,
}

impl DistributionPair {
    pub fn new(omega: KForm, t: VectorField) -> Result<Self> {
        if omega.degree() != 1 {
            return Err(GvError::Degree {
                found: omega.degree(),
                reason: "the defining form must be a 1-form",
            });
        }
        same_grid(omega.grid(), t.grid())?;
        let residual = (0..omega.grid().len())
            .map(|i| (dot(omega.at3(i), t.at(i)) - 1.0).abs())
            .fold(0.0, f64::max);
        if !(residual <= CONSTRAINT_TOL) {
            return Err(GvError::Constraint {
                constraint: "omega(T) = 1",
                residual,
                tolerance: CONSTRAINT_TOL,
            });
        }
        Ok(Self { omega, t })
    }

    pub fn omega(&self) -> &KForm {
        &self.omega
    }

    pub fn t(&self) -> &VectorField {
        &self.t
    }

    pub fn grid(&self) -> &ChartGrid {
        self.omega.grid()
    }
}

/// Seed metric restricted to the plane field when building a compatible metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricSeed {
    Euclidean,
    /// Euclidean plus `amplitude` times a fixed smooth symmetric field.
    Perturbed { amplitude: f64 },
    /// `dx₁² + dx₂²`, which gives `g₃₃ = 1, g_{i3} = P_i, g_{ij} = δ_ij + P_i P_j`
    /// for `ω = dz + P₁dx¹ + P₂dx²`, `T = ∂₃`.
    Horizontal,
}

impl MetricSeed {
    fn at(&self, x: [f64; 3]) -> Mat3 {
        match *self {
            MetricSeed::Euclidean => IDENTITY,
            MetricSeed::Horizontal => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]],
            MetricSeed::Perturbed { amplitude: a } => {
                let s = perturbation(x);
                let mut m = IDENTITY;
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] += a * s[i][j];
                    }
                }
                m
            }
        }
    }
}

fn perturbation(x: [f64; 3]) -> Mat3 {
    let s12 = 0.5 * (x[1] + x[2]).cos();
    let s13 = 0.5 * x[2].sin();
    let s23 = 0.5 * x[0].cos();
    [
        [x[0].sin(), s12, s13],
        [s12, x[1].cos(), s23],
        [s13, s23, (x[0] + x[1]).sin()],
    ]
}

/// A distribution pair with a metric for which `T` is the unit normal of `ker ω`.
#[derive(Clone, Debug)]
pub struct CompatiblePair {
    pair: DistributionPair,
    g: MetricField,
}

impl CompatiblePair {
    pub fn new(pair: DistributionPair, g: MetricField) -> Result<Self> {
        same_grid(pair.grid(), g.grid())?;
        let r = compatibility_residual(&pair, &g);
        if !(r <= CONSTRAINT_TOL) {
            return Err(GvError::Constraint {
                constraint: "g(T, .) = omega",
                residual: r,
                tolerance: CONSTRAINT_TOL,
            });
        }
        Ok(Self { pair, g })
    }

    pub fn pair(&self) -> &DistributionPair {
        &self.pair
    }

    pub fn g(&self) -> &MetricField {
        &self.g
    }

    pub fn grid(&self) -> &ChartGrid {
        self.pair.grid()
    }
}

/// Max over points of `|T♭ − ω|` and `|g(T,T) − 1|`.
pub fn compatibility_residual(pair: &DistributionPair, g: &MetricField) -> f64 {
    let mut r = 0.0f64;
    for i in 0..g.grid().len() {
        let m = g.at(i);
        let t = pair.t.at(i);
        let flat = mat_vec(&m, t);
        let w = pair.omega.at3(i);
        for a in 0..3 {
            r = r.max((flat[a] - w[a]).abs());
        }
        r = r.max((quad(&m, t, t) - 1.0).abs());
    }
    r
}

/// `g = ω⊗ω + G(QX, QY)` with `QX = X − ω(X)T` the projection onto `ker ω` along `T`.
pub fn build_compatible_metric(pair: &DistributionPair, seed: MetricSeed) -> Result<CompatiblePair> {
    let grid = *pair.grid();
    if let MetricSeed::Perturbed { amplitude } = seed {
        for idx in 0..grid.len() {
            let x = grid.point(idx);
            if let Err(detail) = crate::metric::check_positive_definite(&seed.at(x)) {
                return Err(GvError::SingularMetric {
                    index: idx,
                    position: x,
                    detail: format!("seed perturbation amplitude {amplitude}: {detail}"),
                });
            }
        }
    }
    let mut comps: [Vec<f64>; 6] = Default::default();
    for c in comps.iter_mut() {
        *c = vec![0.0; grid.len()];
    }
    for idx in 0..grid.len() {
        let w = pair.omega.at3(idx);
        let t = pair.t.at(idx);
        let s = seed.at(grid.point(idx));
        // q[a][i]: component a of Q e_i
        let mut q = [[0.0; 3]; 3];
        for a in 0..3 {
            for i in 0..3 {
                q[a][i] = if a == i { 1.0 } else { 0.0 } - t[a] * w[i];
            }
        }
        for i in 0..3 {
            for j in i..3 {
                let mut v = w[i] * w[j];
                for a in 0..3 {
                    for b in 0..3 {
                        v += q[a][i] * s[a][b] * q[b][j];
                    }
                }
                comps[crate::metric::sym(i, j)][idx] = v;
            }
        }
    }
    let g = MetricField::new(grid, comps)?;
    CompatiblePair::new(pair.clone(), g)
}

/// Lie bracket `[X, Y]^i = X(Y^i) − Y(X^i)`.
pub fn bracket(x: &VectorField, y: &VectorField) -> VectorField {
    let comp = |a: usize| {
        let xy = directional(x, &y.component_field(a));
        let yx = directional(y, &x.component_field(a));
        (&xy - &yx).into_values()
    };
    VectorField::new(*x.grid(), [comp(0), comp(1), comp(2)]).expect("finite bracket")
}

/// Frenet data of the integral curves of `T`.
///
/// Off the mask `N, B` hold the auxiliary plane-field frame and `τ = 0`.
#[derive(Clone, Debug)]
pub struct FrenetData {
    pub n: VectorField,
    pub b: VectorField,
    pub k: ScalarField,
    pub tau: ScalarField,
    /// `T(k)`, computed as `g(∇_T ∇_T T, N)` on the mask.
    pub tk: ScalarField,
    pub valid: Vec<bool>,
    pub k_min: f64,
}

impl FrenetData {
    pub fn mask_fraction(&self) -> f64 {
        let n = self.valid.iter().filter(|v| **v).count();
        n as f64 / self.valid.len() as f64
    }
}

/// Default curvature threshold: `1e−8 · max(1, max k)`.
pub fn default_k_min(k: &ScalarField) -> f64 {
    1e-8 * k.max_abs().max(1.0)
}

pub fn frenet(cp: &CompatiblePair, conn: &Connection, k_min: Option<f64>) -> FrenetData {
    let g = cp.g();
    let t = cp.pair.t();
    let v = conn.covariant(t, t);
    let dv = conn.covariant(t, &v);
    let k = g.norm(&v);
    let k_min = k_min.unwrap_or_else(|| default_k_min(&k));
    let (e1, e2) = auxiliary_frame(cp);
    let n = cp.grid().len();
    let mut nv = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut bv = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut tau = vec![0.0; n];
    let mut tk = vec![0.0; n];
    let mut valid = vec![false; n];
    for idx in 0..n {
        let m = g.at(idx);
        let kk = k.values()[idx];
        let (nn, bb) = if kk >= k_min && kk > 0.0 {
            valid[idx] = true;
            let vi = v.at(idx);
            let nn = [vi[0] / kk, vi[1] / kk, vi[2] / kk];
            let bb = complete_frame(&m, g.sqrt_det()[idx], t.at(idx), nn);
            let dvi = dv.at(idx);
            tau[idx] = quad(&m, dvi, bb) / kk;
            tk[idx] = quad(&m, dvi, nn);
            (nn, bb)
        } else {
            (e1.at(idx), e2.at(idx))
        };
        for a in 0..3 {
            nv[a][idx] = nn[a];
            bv[a][idx] = bb[a];
        }
    }
    let grid = *cp.grid();
    FrenetData {
        n: VectorField::new(grid, nv).expect("finite frame"),
        b: VectorField::new(grid, bv).expect("finite frame"),
        k,
        tau: ScalarField::new(grid, tau).unwrap(),
        tk: ScalarField::new(grid, tk).unwrap(),
        valid,
        k_min,
    }
}

/// Unit vector completing `(T, N)` to a positively oriented g-orthonormal triple.
fn complete_frame(m: &Mat3, sqrt_det: f64, t: [f64; 3], n: [f64; 3]) -> [f64; 3] {
    let mut best = [0.0; 3];
    let mut best_norm = -1.0;
    for a in 0..3 {
        let mut e = [0.0; 3];
        e[a] = 1.0;
        let r = orthogonalize(m, e, &[t, n]);
        let nr = quad(m, r, r);
        if nr > best_norm {
            best_norm = nr;
            best = r;
        }
    }
    let s = best_norm.sqrt();
    let mut b = [best[0] / s, best[1] / s, best[2] / s];
    if sqrt_det * det_columns(t, n, b) < 0.0 {
        b = [-b[0], -b[1], -b[2]];
    }
    b
}

fn orthogonalize(m: &Mat3, mut e: [f64; 3], against: &[[f64; 3]]) -> [f64; 3] {
    for u in against {
        let c = quad(m, e, *u) / quad(m, *u, *u);
        for a in 0..3 {
            e[a] -= c * u[a];
        }
    }
    e
}

pub(crate) fn det_columns(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    dot(a, crate::calculus::cross(b, c))
}

/// `dV_g(X, Y, Z)` at every point.
pub fn volume_of(g: &MetricField, x: &VectorField, y: &VectorField, z: &VectorField) -> ScalarField {
    let v = (0..g.grid().len())
        .map(|i| g.sqrt_det()[i] * det_columns(x.at(i), y.at(i), z.at(i)))
        .collect();
    ScalarField::new(*g.grid(), v).unwrap()
}

/// Orthonormal frame of `ker ω` built from two coordinate axes projected
/// along `T`, chosen once for the whole grid.
pub fn auxiliary_frame(cp: &CompatiblePair) -> (VectorField, VectorField) {
    let omega = cp.pair.omega();
    let t = cp.pair.t();
    let g = cp.g();
    // The projections of e_a, e_b along T span ker ω iff T has a nonzero
    // component on the remaining axis; omit the axis where it is largest.
    let floor = |c: usize| t.comp(c).iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let c = (0..3).fold(0, |best, c| if floor(c) > floor(best) { c } else { best });
    let (a0, a1) = ((c + 1) % 3, (c + 2) % 3);
    let (a0, a1) = (a0.min(a1), a0.max(a1));
    let n = cp.grid().len();
    let mut e1 = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut e2 = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for idx in 0..n {
        let m = g.at(idx);
        let w = omega.at3(idx);
        let ti = t.at(idx);
        let proj = |a: usize| {
            let mut x = [0.0; 3];
            x[a] = 1.0;
            [x[0] - w[a] * ti[0], x[1] - w[a] * ti[1], x[2] - w[a] * ti[2]]
        };
        let u = proj(a0);
        let nu = quad(&m, u, u).sqrt();
        let u = [u[0] / nu, u[1] / nu, u[2] / nu];
        let v = orthogonalize(&m, proj(a1), &[u]);
        let nv = quad(&m, v, v).sqrt();
        let mut v = [v[0] / nv, v[1] / nv, v[2] / nv];
        if det_columns(ti, u, v) < 0.0 {
            v = [-v[0], -v[1], -v[2]];
        }
        for c in 0..3 {
            e1[c][idx] = u[c];
            e2[c][idx] = v[c];
        }
    }
    let grid = *cp.grid();
    (
        VectorField::new(grid, e1).expect("finite frame"),
        VectorField::new(grid, e2).expect("finite frame"),
    )
}

/// Non-symmetric second fundamental form `h_{X,Y} = g(∇_X Y, T) = −g(∇_X T, Y)`
/// in the frame `(N, B)` of a [`FrenetData`].
#[derive(Clone, Debug)]
pub struct SecondFundamental {
    pub h_nn: ScalarField,
    pub h_nb: ScalarField,
    pub h_bn: ScalarField,
    pub h_bb: ScalarField,
    /// Integrability tensor `𝒯_{N,B} = (h_{N,B} − h_{B,N}) / 2`.
    pub tcal: ScalarField,
    pub sigma1: ScalarField,
}

pub fn second_fundamental(cp: &CompatiblePair, conn: &Connection, fd: &FrenetData) -> SecondFundamental {
    let g = cp.g();
    let t = cp.pair.t();
    let dn = conn.covariant(&fd.n, t);
    let db = conn.covariant(&fd.b, t);
    let h = |x: &VectorField, y: &VectorField| g.inner(x, y).scale(-1.0);
    let h_nn = h(&dn, &fd.n);
    let h_nb = h(&dn, &fd.b);
    let h_bn = h(&db, &fd.n);
    let h_bb = h(&db, &fd.b);
    let tcal = h_nb.zip_with(&h_bn, |a, b| 0.5 * (a - b));
    let sigma1 = &h_nn + &h_bb;
    SecondFundamental {
        h_nn,
        h_nb,
        h_bn,
        h_bb,
        tcal,
        sigma1,
    }
}

/// Connection, Frenet data and second fundamental form computed together.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub conn: Connection,
    pub frenet: FrenetData,
    pub sff: SecondFundamental,
}

impl Geometry {
    pub fn new(cp: &CompatiblePair, k_min: Option<f64>) -> Self {
        let conn = cp.g().connection();
        let frenet = frenet(cp, &conn, k_min);
        let sff = second_fundamental(cp, &conn, &frenet);
        Self { conn, frenet, sff }
    }
}

/// Pointwise g-norms of the three Frenet residuals
/// `∇_T T − kN`, `∇_T N + kT − τB`, `∇_T B + τN` (zero off the mask).
pub fn frenet_residuals(cp: &CompatiblePair, conn: &Connection, fd: &FrenetData) -> [ScalarField; 3] {
    let g = cp.g();
    let t = cp.pair.t();
    let tt = conn.covariant(t, t);
    let tn = conn.covariant(t, &fd.n);
    let tb = conn.covariant(t, &fd.b);
    let n = cp.grid().len();
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for idx in 0..n {
        if !fd.valid[idx] {
            continue;
        }
        let m = g.at(idx);
        let (k, tau) = (fd.k.values()[idx], fd.tau.values()[idx]);
        let (ti, ni, bi) = (t.at(idx), fd.n.at(idx), fd.b.at(idx));
        let r0 = sub_lin(tt.at(idx), &[(k, ni)]);
        let r1 = sub_lin(tn.at(idx), &[(-k, ti), (tau, bi)]);
        let r2 = sub_lin(tb.at(idx), &[(-tau, ni)]);
        for (o, r) in out.iter_mut().zip([r0, r1, r2]) {
            o[idx] = quad(&m, r, r).max(0.0).sqrt();
        }
    }
    let grid = *cp.grid();
    out.map(|v| ScalarField::new(grid, v).unwrap())
}

fn sub_lin(mut x: [f64; 3], terms: &[(f64, [f64; 3])]) -> [f64; 3] {
    for (c, v) in terms {
        for a in 0..3 {
            x[a] -= c * v[a];
        }
    }
    x
}

/// `Div(f T)` for a scalar `f`.
pub fn div_along(g: &MetricField, f: &ScalarField, t: &VectorField) -> ScalarField {
    g.divergence(&t.scale_by(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{d, interior};

    fn contact_chart_pair(n: usize) -> DistributionPair {
        let g = ChartGrid::chart([n; 3], [-1.0; 3], [1.0; 3]).unwrap();
        let omega = KForm::from_fn(&g, 1, |x| [-x[1], 0.0, 1.0]);
        DistributionPair::new(omega, VectorField::coordinate(&g, 2)).unwrap()
    }

    #[test]
    fn pair_constraint_enforced() {
        let g = ChartGrid::torus([8; 3]).unwrap();
        let omega = KForm::from_fn(&g, 1, |_| [0.0, 0.0, 1.0]);
        let t = VectorField::from_fn(&g, |_| [0.0, 0.0, 1.0 + 1e-9]);
        assert!(matches!(
            DistributionPair::new(omega, t),
            Err(GvError::Constraint { .. })
        ));
    }

    #[test]
    fn flat_seed_on_foliation_is_euclidean() {
        let g = ChartGrid::torus([8; 3]).unwrap();
        let pair = DistributionPair::new(
            KForm::from_fn(&g, 1, |_| [0.0, 0.0, 1.0]),
            VectorField::coordinate(&g, 2),
        )
        .unwrap();
        let cp = build_compatible_metric(&pair, MetricSeed::Euclidean).unwrap();
        for i in 0..g.len() {
            assert_eq!(cp.g().at(i), IDENTITY);
        }
        let geo = Geometry::new(&cp, None);
        assert_eq!(geo.frenet.mask_fraction(), 0.0);
        assert!(geo.sff.h_nn.max_abs() == 0.0 && geo.sff.tcal.max_abs() == 0.0);
    }

    #[test]
    fn horizontal_seed_reproduces_chart_metric() {
        let g = ChartGrid::chart([8; 3], [-1.0; 3], [1.0; 3]).unwrap();
        let p = |x: [f64; 3]| [x[2] * x[2], 0.5 * x[0] + x[2]];
        let omega = KForm::from_fn(&g, 1, move |x| {
            let q = p(x);
            [q[0], q[1], 1.0]
        });
        let pair = DistributionPair::new(omega, VectorField::coordinate(&g, 2)).unwrap();
        let cp = build_compatible_metric(&pair, MetricSeed::Horizontal).unwrap();
        for idx in 0..g.len() {
            let m = cp.g().at(idx);
            let q = p(g.point(idx));
            assert!((m[2][2] - 1.0).abs() < 1e-14);
            for i in 0..2 {
                assert!((m[i][2] - q[i]).abs() < 1e-14);
                for j in 0..2 {
                    let e = if i == j { 1.0 } else { 0.0 } + q[i] * q[j];
                    assert!((m[i][j] - e).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn large_perturbation_rejected() {
        let pair = contact_chart_pair(8);
        let err = build_compatible_metric(&pair, MetricSeed::Perturbed { amplitude: 3.0 }).unwrap_err();
        assert!(matches!(err, GvError::SingularMetric { .. }));
        assert!(build_compatible_metric(&pair, MetricSeed::Perturbed { amplitude: 0.2 }).is_ok());
    }

    #[test]
    fn contact_chart_integrability_tensor_matches_bracket() {
        let pair = contact_chart_pair(32);
        let cp = build_compatible_metric(&pair, MetricSeed::Perturbed { amplitude: 0.2 }).unwrap();
        let geo = Geometry::new(&cp, None);
        let fd = &geo.frenet;
        let br = bracket(&fd.n, &fd.b);
        let half = cp.g().inner(&br, pair.t()).scale(0.5);
        let mask = cp.grid().interior_mask(2);
        let diff = &half - &geo.sff.tcal;
        assert!(diff.max_abs_where(&mask) < 5e-5, "{}", diff.max_abs_where(&mask));
        assert!(geo.sff.tcal.max_abs_where(&mask) > 0.1);
        // η = 0 for the Reeb field of this contact form
        let eta = interior(pair.t(), &d(pair.omega()).unwrap()).unwrap();
        assert!(eta.max_abs() < 1e-12);
    }

    #[test]
    fn christoffel_exponential_metric() {
        // g = diag(1, 1, e^{2x₁}): Γ³₁₃ = 1, Γ¹₃₃ = −e^{2x₁}
        let g = ChartGrid::chart([32; 3], [0.0; 3], [1.0; 3]).unwrap();
        let m = MetricField::from_fn(&g, |x| {
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, (2.0 * x[0]).exp()]]
        })
        .unwrap();
        let c = m.connection();
        for idx in 0..g.len() {
            if !g.is_interior(idx, 2) {
                continue;
            }
            let x = g.point(idx);
            assert!((c.christoffel(idx, 2, 0, 2) - 1.0).abs() < 2e-5);
            assert!((c.christoffel(idx, 0, 2, 2) + (2.0 * x[0]).exp()).abs() < 1e-4);
        }
    }

    #[test]
    fn torsion_free_on_random_fields() {
        let g = ChartGrid::torus([24; 3]).unwrap();
        let pair = DistributionPair::new(
            KForm::from_fn(&g, 1, |_| [0.0, 0.0, 1.0]),
            VectorField::coordinate(&g, 2),
        )
        .unwrap();
        let cp = build_compatible_metric(&pair, MetricSeed::Perturbed { amplitude: 0.3 }).unwrap();
        let conn = cp.g().connection();
        let z = VectorField::from_fn(&g, |x| [x[1].sin(), 1.0, (x[0] + x[2]).cos()]);
        let w = VectorField::from_fn(&g, |x| [0.3, x[2].cos(), x[0].sin()]);
        let lhs = conn.covariant(&z, &w).lin_comb(1.0, &conn.covariant(&w, &z), -1.0);
        let diff = lhs.lin_comb(1.0, &bracket(&z, &w), -1.0);
        assert!(diff.max_abs() < 1e-12);
        // flat metric, W = sin(x₃)∂₁, Z = ∂₃
        let e = MetricField::euclidean(&g).connection();
        let w = VectorField::from_fn(&g, |x| [x[2].sin(), 0.0, 0.0]);
        let cov = e.covariant(&VectorField::coordinate(&g, 2), &w);
        let exact = VectorField::from_fn(&g, |x| [x[2].cos(), 0.0, 0.0]);
        assert!(cov.lin_comb(1.0, &exact, -1.0).max_abs() < 1e-3);
    }

    #[test]
    fn metric_compatibility_of_connection() {
        // ∂_a g_ij = Γ^l_ai g_lj + Γ^l_aj g_il
        let g = ChartGrid::torus([24; 3]).unwrap();
        let m = MetricField::from_fn(&g, |x| {
            let s = 0.3 * x[0].sin();
            [[1.0 + s, 0.1 * x[2].cos(), 0.0], [0.1 * x[2].cos(), 1.0, s * 0.2], [0.0, s * 0.2, 1.2]]
        })
        .unwrap();
        let c = m.connection();
        let mut worst = 0.0f64;
        for a in 0..3 {
            for (i, j) in [(0, 0), (0, 1), (1, 2), (2, 2)] {
                let comp = m.comps()[crate::metric::sym(i, j)].clone();
                let dg = crate::calculus::partial(&g, &comp, a).unwrap();
                for idx in 0..g.len() {
                    let gm = m.at(idx);
                    let mut s = 0.0;
                    for l in 0..3 {
                        s += c.christoffel(idx, l, a, i) * gm[l][j] + c.christoffel(idx, l, a, j) * gm[i][l];
                    }
                    worst = worst.max((s - dg[idx]).abs());
                }
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }
}
