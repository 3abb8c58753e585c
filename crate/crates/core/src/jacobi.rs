//! The Jacobi-type operator `D = ⋆(ℒ_T)²d` on 1-forms and the polynomial-in-z
//! fields of integrable polynomial charts `ω = dz + P₁dx¹ + P₂dx²`, `T = ∂_z`.

use crate::calculus::{d, lie, partial_field, wedge};
use crate::error::{GvError, Result};
use crate::geometry::{build_compatible_metric, CompatiblePair, DistributionPair, MetricSeed};
use crate::grid::{ChartGrid, KForm, ScalarField, Topology, VectorField};

/// Polynomial in `z` whose coefficients are fields (normally independent of `z`).
#[derive(Clone, Debug)]
pub struct ZPoly {
    coeffs: Vec<ScalarField>,
}

impl ZPoly {
    pub fn new(coeffs: Vec<ScalarField>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| GvError::Invalid("polynomial needs at least one coefficient".into()))?;
        let grid = *first.grid();
        if coeffs.iter().any(|c| *c.grid() != grid) {
            return Err(GvError::GridMismatch);
        }
        Ok(Self { coeffs })
    }

    pub fn zero(grid: &ChartGrid) -> Self {
        Self { coeffs: vec![ScalarField::zeros(grid)] }
    }

    pub fn grid(&self) -> &ChartGrid {
        self.coeffs[0].grid()
    }

    /// Number of stored coefficients minus one.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, j: usize) -> Option<&ScalarField> {
        self.coeffs.get(j)
    }

    pub fn coeffs(&self) -> &[ScalarField] {
        &self.coeffs
    }

    pub fn add(&self, other: &ZPoly) -> ZPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = ScalarField::zeros(self.grid());
        let coeffs = (0..n)
            .map(|j| self.coeffs.get(j).unwrap_or(&zero) + other.coeffs.get(j).unwrap_or(&zero))
            .collect();
        ZPoly { coeffs }
    }

    pub fn mul(&self, other: &ZPoly) -> ZPoly {
        let mut coeffs = vec![ScalarField::zeros(self.grid()); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        ZPoly { coeffs }
    }

    pub fn scale(&self, s: f64) -> ZPoly {
        ZPoly { coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect() }
    }

    /// Exact derivative in `z`.
    pub fn dz(&self) -> ZPoly {
        if self.coeffs.len() == 1 {
            return ZPoly::zero(self.grid());
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(j, c)| c.scale((j + 1) as f64))
            .collect();
        ZPoly { coeffs }
    }

    /// Numerical derivative of every coefficient along a horizontal axis.
    pub fn dx(&self, axis: usize) -> Result<ZPoly> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| partial_field(c, axis))
            .collect::<Result<_>>()?;
        Ok(ZPoly { coeffs })
    }

    /// Sample on the grid, with `z` the third coordinate.
    pub fn eval(&self) -> ScalarField {
        let grid = *self.grid();
        let v = (0..grid.len())
            .map(|idx| {
                let z = grid.point(idx)[2];
                self.coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c.values()[idx])
            })
            .collect();
        ScalarField::new(grid, v).unwrap()
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }
}

/// Background `P_i = Σ C_ij z^j` (`j ≤ 2`) and the free data of a polynomial field:
/// `c_{i,j}` for `j ≤ 2` and `c_{2,5}`. All fields should be independent of `z`.
#[derive(Clone, Debug)]
pub struct JacobiFieldSpec {
    pub background: [[ScalarField; 3]; 2],
    pub free: [[ScalarField; 3]; 2],
    pub c25: ScalarField,
}

/// Relative tolerance on the background relations `C₂₀C₁₂ = C₁₀C₂₂`, `C₂₁C₁₂ = C₂₂C₁₁`.
pub const RELATION_TOL: f64 = 1e-12;
/// Lower bound on `|C₁₂|` and `|C₂₂|`.
pub const MIN_PIVOT: f64 = 1e-6;
/// Cells excluded next to bounded faces when evaluating `Dμ`.
pub const INTERIOR_MARGIN: usize = 6;

#[derive(Clone, Debug)]
pub struct JacobiReport {
    /// Max-norm of the five `z^i`-coefficient equations, in displayed order.
    pub coefficient_equations: [f64; 5],
    /// Largest coefficient of `p_{i,333}` (exact algebra).
    pub p333: f64,
    /// `‖Dμ‖_∞` on the interior.
    pub d_mu: f64,
    /// `‖compatibility_residual‖_∞` on the interior.
    pub compatibility: f64,
    /// `‖ω∧dω‖_∞` of the background.
    pub integrability: f64,
}

#[derive(Clone, Debug)]
pub struct JacobiField {
    pub mu: KForm,
    pub p: [ZPoly; 2],
    pub background: [ZPoly; 2],
    pub cp: CompatiblePair,
    pub report: JacobiReport,
}

fn check_spec(spec: &JacobiFieldSpec) -> Result<()> {
    let c = &spec.background;
    let n = c[0][0].values().len();
    for idx in 0..n {
        let v = |i: usize, j: usize| c[i][j].values()[idx];
        for (name, x) in [("|C12| > 0", v(0, 2)), ("|C22| > 0", v(1, 2))] {
            if !(x.abs() >= MIN_PIVOT) {
                return Err(GvError::Constraint { constraint: name, residual: x.abs(), tolerance: MIN_PIVOT });
            }
        }
        let rel = [
            ("C20 C12 = C10 C22", v(1, 0) * v(0, 2) - v(0, 0) * v(1, 2), v(1, 0) * v(0, 2)),
            ("C21 C12 = C22 C11", v(1, 1) * v(0, 2) - v(1, 2) * v(0, 1), v(1, 1) * v(0, 2)),
        ];
        for (name, r, scale) in rel {
            let tol = RELATION_TOL * scale.abs().max(1.0);
            if !(r.abs() <= tol) {
                return Err(GvError::Constraint { constraint: name, residual: r.abs(), tolerance: tol });
            }
        }
    }
    Ok(())
}

/// Integrable chart pair `ω = dz + P₁dx¹ + P₂dx²`, `T = ∂_z`, with the compatible
/// metric `g₃₃ = 1`, `g_{i3} = P_i`, `g_{ij} = δ_{ij} + P_iP_j`.
pub fn chart_pair(p: &[ZPoly; 2]) -> Result<CompatiblePair> {
    let grid = *p[0].grid();
    let (p1, p2) = (p[0].eval(), p[1].eval());
    let omega = KForm::new(
        grid,
        1,
        vec![p1.into_values(), p2.into_values(), vec![1.0; grid.len()]],
    )?;
    let t = VectorField::coordinate(&grid, 2);
    build_compatible_metric(&DistributionPair::new(omega, t)?, MetricSeed::Horizontal)
}

/// `D μ = ⋆ ℒ_T ℒ_T dμ`.
pub fn jacobi_operator(cp: &CompatiblePair, mu: &KForm) -> Result<KForm> {
    let t = cp.pair().t();
    let alpha = lie(t, &lie(t, &d(mu)?)?)?;
    cp.g().hodge(&alpha)
}

/// Assemble `μ = p₁dx¹ + p₂dx²` from `spec`, deriving
/// `c₁₃ = −10c₂₅C₁₀/C₂₂`, `c₁₄ = −(5/2)c₂₅C₁₁/C₂₂`, `c₂₃ = 10c₂₅C₂₀/C₂₂`,
/// `c₂₄ = (5/2)c₂₅C₂₁/C₂₂`, `c₁₅ = −c₂₅C₁₂/C₂₂`, and verify the result.
pub fn build_jacobi_field(spec: &JacobiFieldSpec) -> Result<JacobiField> {
    check_spec(spec)?;
    let c = &spec.background;
    let c25 = &spec.c25;
    let ratio = |num: &ScalarField, s: f64| {
        let v = (0..num.values().len())
            .map(|i| s * c25.values()[i] * num.values()[i] / c[1][2].values()[i])
            .collect();
        ScalarField::new(*num.grid(), v).unwrap()
    };
    let c13 = ratio(&c[0][0], -10.0);
    let c14 = ratio(&c[0][1], -2.5);
    let c23 = ratio(&c[1][0], 10.0);
    let c24 = ratio(&c[1][1], 2.5);
    let c15 = ratio(&c[0][2], -1.0);
    let f = &spec.free;
    let p1 = ZPoly::new(vec![f[0][0].clone(), f[0][1].clone(), f[0][2].clone(), c13.clone(), c14.clone(), c15.clone()])?;
    let p2 = ZPoly::new(vec![f[1][0].clone(), f[1][1].clone(), f[1][2].clone(), c23.clone(), c24.clone(), c25.clone()])?;
    let bg = [ZPoly::new(c[0].to_vec())?, ZPoly::new(c[1].to_vec())?];

    let prod = |a: &ScalarField, b: &ScalarField| a * b;
    let lin = |terms: &[(f64, &ScalarField, &ScalarField)]| {
        terms
            .iter()
            .fold(ScalarField::zeros(c25.grid()), |acc, (s, a, b)| &acc + &prod(a, b).scale(*s))
            .max_abs()
    };
    let coefficient_equations = [
        lin(&[(1.0, &c[0][0], &c23), (1.0, &c[1][0], &c13)]),
        lin(&[(4.0, &c[0][0], &c24), (1.0, &c[0][1], &c23), (4.0, &c[1][0], &c14), (1.0, &c[1][1], &c13)]),
        lin(&[
            (10.0, &c[0][0], c25),
            (4.0, &c[0][1], &c24),
            (1.0, &c[0][2], &c23),
            (10.0, &c[1][0], &c15),
            (4.0, &c[1][1], &c14),
            (1.0, &c[1][2], &c13),
        ]),
        lin(&[(5.0, &c[0][1], c25), (2.0, &c[0][2], &c24), (5.0, &c[1][1], &c15), (2.0, &c[1][2], &c14)]),
        lin(&[(1.0, &c[0][2], c25), (1.0, &c[1][2], &c15)]),
    ];
    let p333 = p1.dz().dz().dz().max_abs().max(p2.dz().dz().dz().max_abs());

    let cp = chart_pair(&bg)?;
    let grid = *cp.grid();
    let (e1, e2) = (p1.eval(), p2.eval());
    let mu = KForm::new(grid, 1, vec![e1.values().to_vec(), e2.values().to_vec(), vec![0.0; grid.len()]])?;
    let inner = grid.interior_mask(INTERIOR_MARGIN);
    let d_mu = jacobi_operator(&cp, &mu)?.max_abs_where(&inner);
    let compatibility = compatibility_residual(&e1, &e2, &bg[0].eval(), &bg[1].eval())?.max_abs_where(&inner);
    let om = cp.pair().omega();
    let integrability = wedge(om, &d(om)?)?.max_abs();
    Ok(JacobiField {
        mu,
        p: [p1, p2],
        background: bg,
        cp,
        report: JacobiReport { coefficient_equations, p333, d_mu, compatibility, integrability },
    })
}

/// `q₂,₁ − q₁,₂ − P₁q₂,₃ + P₂q₁,₃` with `q_i = p_{i,33}`: the `dx³`-component of
/// `Dμ` for `μ = p₁dx¹ + p₂dx²` on the chart with `d_{ij} = δ_{ij}`.
pub fn compatibility_residual(
    p1: &ScalarField,
    p2: &ScalarField,
    big_p1: &ScalarField,
    big_p2: &ScalarField,
) -> Result<ScalarField> {
    let dz2 = |f: &ScalarField| partial_field(&partial_field(f, 2)?, 2);
    let (q1, q2) = (dz2(p1)?, dz2(p2)?);
    let curl = &partial_field(&q2, 0)? - &partial_field(&q1, 1)?;
    let tilt = &(big_p2 * &partial_field(&q1, 2)?) - &(big_p1 * &partial_field(&q2, 2)?);
    Ok(&curl + &tilt)
}

/// Branch `b ∈ 0..6` of the solutions of `p⁽⁶⁾ = λ² p`, with `c = |λ|^{1/3}`:
/// `e^{cz}`, `e^{−cz}`, `e^{±cz/2}cos(√3cz/2)`, `e^{±cz/2}sin(√3cz/2)`.
pub fn eigen_branch(lambda: f64, branch: usize, z: f64) -> f64 {
    let c = lambda.abs().cbrt();
    let w = 0.5 * 3f64.sqrt() * c * z;
    match branch {
        0 => (c * z).exp(),
        1 => (-c * z).exp(),
        2 => (0.5 * c * z).exp() * w.cos(),
        3 => (-0.5 * c * z).exp() * w.cos(),
        4 => (0.5 * c * z).exp() * w.sin(),
        5 => (-0.5 * c * z).exp() * w.sin(),
        _ => panic!("eigen branch {branch} out of range 0..6"),
    }
}

/// Depth of six composed `z`-stencils.
pub const EIGEN_MARGIN: usize = 12;
/// Fewest interior `z` points accepted by [`eigen_residual`].
pub const EIGEN_MIN_INTERIOR: usize = 13;

/// `p,₃₃₃₃₃₃ − (λ²/d) p` on points at least [`EIGEN_MARGIN`] cells from the `z`
/// faces; zero elsewhere.
pub fn eigen_residual(p: &ScalarField, lambda: f64, d: &ScalarField) -> Result<ScalarField> {
    let grid = *p.grid();
    if grid.topology(2) != Topology::Bounded {
        return Err(GvError::InvalidGrid("eigen residual needs a bounded z axis".into()));
    }
    let nz = grid.sizes()[2];
    if nz < 2 * EIGEN_MARGIN + EIGEN_MIN_INTERIOR {
        return Err(GvError::InvalidGrid(format!(
            "z axis has {nz} points; need {} for {EIGEN_MIN_INTERIOR} interior points",
            2 * EIGEN_MARGIN + EIGEN_MIN_INTERIOR
        )));
    }
    if d.values().iter().any(|v| !(*v > 0.0)) {
        return Err(GvError::Invalid("d must be positive".into()));
    }
    let mut p6 = p.clone();
    for _ in 0..6 {
        p6 = partial_field(&p6, 2)?;
    }
    let l2 = lambda * lambda;
    let v = (0..grid.len())
        .map(|idx| {
            let k = grid.unravel(idx)[2];
            if k < EIGEN_MARGIN || k + EIGEN_MARGIN >= nz {
                0.0
            } else {
                p6.values()[idx] - l2 / d.values()[idx] * p.values()[idx]
            }
        })
        .collect();
    ScalarField::new(grid, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::bump;
    use crate::variations::index_form_t;

    fn chart(n: [usize; 3]) -> ChartGrid {
        ChartGrid::chart(n, [-1.0; 3], [1.0; 3]).unwrap()
    }

    fn constant_background(g: &ChartGrid) -> [[ScalarField; 3]; 2] {
        let k = |v: f64| ScalarField::constant(g, v);
        let r = 0.5;
        [
            [k(0.2), k(0.4), k(0.3)],
            [k(0.2 * r), k(0.4 * r), k(0.3 * r)],
        ]
    }

    fn plane_bump(g: &ChartGrid, s: f64) -> ScalarField {
        let g2 = *g;
        ScalarField::from_fn(g, move |x| s * bump(&g2, [x[0], x[1], 0.0]))
    }

    #[test]
    fn zpoly_algebra() {
        let g = chart([8; 3]);
        let k = |v: f64| ScalarField::constant(&g, v);
        let a = ZPoly::new(vec![k(1.0), k(2.0)]).unwrap();
        let b = ZPoly::new(vec![k(-1.0), k(0.0), k(3.0)]).unwrap();
        let p = a.mul(&b).add(&a);
        let e = p.eval();
        for idx in 0..g.len() {
            let z = g.point(idx)[2];
            let want = (1.0 + 2.0 * z) * (-1.0 + 3.0 * z * z) + 1.0 + 2.0 * z;
            assert!((e.values()[idx] - want).abs() < 1e-14);
        }
        assert_eq!(p.dz().degree(), 2);
        assert_eq!(p.dz().dz().dz().dz().max_abs(), 0.0);
    }

    #[test]
    fn zero_spec_gives_zero_field() {
        let g = chart([16; 3]);
        let z = ScalarField::zeros(&g);
        let spec = JacobiFieldSpec {
            background: constant_background(&g),
            free: [[z.clone(), z.clone(), z.clone()], [z.clone(), z.clone(), z.clone()]],
            c25: z,
        };
        let f = build_jacobi_field(&spec).unwrap();
        assert_eq!(f.mu.max_abs(), 0.0);
        assert_eq!(f.report.d_mu, 0.0);
    }

    #[test]
    fn derived_coefficients_solve_the_five_equations() {
        let g = chart([16; 3]);
        let z = ScalarField::zeros(&g);
        let spec = JacobiFieldSpec {
            background: constant_background(&g),
            free: [[z.clone(), z.clone(), z.clone()], [z.clone(), z.clone(), z.clone()]],
            c25: plane_bump(&g, 0.7),
        };
        let f = build_jacobi_field(&spec).unwrap();
        assert!(f.report.coefficient_equations.iter().all(|r| *r < 1e-14));
        assert!(f.report.integrability < 1e-12);
    }

    #[test]
    fn broken_background_rejected() {
        let g = chart([8; 3]);
        let mut bg = constant_background(&g);
        bg[1][0] = ScalarField::constant(&g, 1.0);
        let z = ScalarField::zeros(&g);
        let spec = JacobiFieldSpec {
            background: bg,
            free: [[z.clone(), z.clone(), z.clone()], [z.clone(), z.clone(), z.clone()]],
            c25: z,
        };
        assert!(matches!(
            build_jacobi_field(&spec),
            Err(GvError::Constraint { constraint: "C20 C12 = C10 C22", .. })
        ));
    }

    #[test]
    fn operator_components_on_flat_chart() {
        // P = 0: g is Euclidean and g(Dμ, dx^j) = (−p₂,₃₃₃, p₁,₃₃₃, p₂,₁₃₃ − p₁,₂₃₃).
        let g = chart([40; 3]);
        let zero = ZPoly::zero(&g);
        let cp = chart_pair(&[zero.clone(), zero]).unwrap();
        let mu = KForm::from_fn(&g, 1, |x| {
            [(x[2] + 0.5 * x[1]).sin(), (0.7 * x[2] - x[0]).cos(), 0.0]
        });
        let dm = jacobi_operator(&cp, &mu).unwrap();
        let inner = g.interior_mask(INTERIOR_MARGIN);
        let want = KForm::from_fn(&g, 1, |x| {
            let (a, b) = (x[2] + 0.5 * x[1], 0.7 * x[2] - x[0]);
            let p1_333 = -a.cos();
            let p2_333 = 0.343 * b.sin();
            let p2_133 = -0.49 * b.sin();
            let p1_233 = -0.5 * a.cos();
            [-p2_333, p1_333, p2_133 - p1_233]
        });
        assert!(dm.sub(&want).unwrap().max_abs_where(&inner) < 1e-5);
    }

    #[test]
    fn compatibility_matches_dz_component() {
        let g = chart([40; 3]);
        let s = constant_background(&g);
        let bg = [ZPoly::new(s[0].to_vec()).unwrap(), ZPoly::new(s[1].to_vec()).unwrap()];
        let cp = chart_pair(&bg).unwrap();
        let mu = KForm::from_fn(&g, 1, |x| [(x[2] + x[1]).sin(), (0.5 * x[2] - x[0]).cos(), 0.0]);
        let dm = jacobi_operator(&cp, &mu).unwrap();
        let r = compatibility_residual(
            &mu.component_field(0),
            &mu.component_field(1),
            &bg[0].eval(),
            &bg[1].eval(),
        )
        .unwrap();
        let inner = g.interior_mask(INTERIOR_MARGIN);
        let diff = &dm.component_field(2) - &r;
        assert!(diff.max_abs_where(&inner) < 1e-5, "{}", diff.max_abs_where(&inner));
        assert!(r.max_abs_where(&inner) > 0.1);
    }

    #[test]
    fn pairing_is_symmetric_for_z_flow() {
        let g = chart([24; 3]);
        let s = constant_background(&g);
        let bg = [ZPoly::new(s[0].to_vec()).unwrap(), ZPoly::new(s[1].to_vec()).unwrap()];
        let cp = chart_pair(&bg).unwrap();
        let b = |x: [f64; 3]| bump(&g, x);
        let mu = KForm::from_fn(&g, 1, |x| [b(x) * (3.0 * x[2]).sin(), b(x) * x[0], 0.0]);
        let nu = KForm::from_fn(&g, 1, |x| [b(x) * x[1] * x[2], b(x) * (2.0 * x[0] + x[2]).cos(), 0.0]);
        let a = index_form_t(cp.pair(), &mu, &nu).unwrap();
        let c = index_form_t(cp.pair(), &nu, &mu).unwrap();
        assert!((a - c).abs() < 1e-12 * a.abs().max(1.0), "{a} {c}");
    }

    #[test]
    fn eigen_residual_needs_room() {
        let g = chart([8, 8, 30]);
        let p = ScalarField::zeros(&g);
        assert!(eigen_residual(&p, 1.0, &ScalarField::constant(&g, 1.0)).is_err());
    }

    #[test]
    fn quintic_has_vanishing_sixth_derivative() {
        let g = chart([8, 8, 64]);
        let p = ScalarField::from_fn(&g, |x| x[2].powi(5) - 2.0 * x[2].powi(2));
        let r = eigen_residual(&p, 0.0, &ScalarField::constant(&g, 1.0)).unwrap();
        // Six composed stencils amplify rounding by about h⁻⁶.
        assert!(r.max_abs() < 1e-5, "{}", r.max_abs());
    }
}
