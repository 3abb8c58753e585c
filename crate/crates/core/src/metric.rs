//! Riemannian metrics sampled on a grid: Hodge star, musical isomorphisms,
//! Levi-Civita connection.

use rayon::prelude::*;

use crate::calculus::partial_unchecked;
use crate::error::{GvError, Result};
use crate::grid::{same_grid, ChartGrid, KForm, ScalarField, VectorField};

pub type Mat3 = [[f64; 3]; 3];

/// Packed position of `g_ij` in the (11, 12, 13, 22, 23, 33) layout.
pub const fn sym(i: usize, j: usize) -> usize {
    const T: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
    T[i][j]
}

/// Symmetric positive-definite metric, validated at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    grid: ChartGrid,
    comps: [Vec<f64>; 6],
    inverse: [Vec<f64>; 6],
    sqrt_det: Vec<f64>,
}

impl MetricField {
    pub fn new(grid: ChartGrid, comps: [Vec<f64>; 6]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(GvError::InvalidGrid(
                "metric component length does not match grid".into(),
            ));
        }
        let n = grid.len();
        let mut inverse = [
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
        ];
        let mut sqrt_det = vec![0.0; n];
        for idx in 0..n {
            let m = unpack(&comps, idx);
            if let Err(detail) = check_positive_definite(&m) {
                return Err(GvError::SingularMetric {
                    index: idx,
                    position: grid.point(idx),
                    detail,
                });
            }
            let (inv, det) = invert(&m);
            for i in 0..3 {
                for j in i..3 {
                    inverse[sym(i, j)][idx] = inv[i][j];
                }
            }
            sqrt_det[idx] = det.sqrt();
        }
        Ok(Self {
            grid,
            comps,
            inverse,
            sqrt_det,
        })
    }

    pub fn from_fn(grid: &ChartGrid, f: impl Fn([f64; 3]) -> Mat3) -> Result<Self> {
        let n = grid.len();
        let mut comps = [
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
        ];
        for idx in 0..n {
            let m = f(grid.point(idx));
            for i in 0..3 {
                for j in i..3 {
                    comps[sym(i, j)][idx] = 0.5 * (m[i][j] + m[j][i]);
                }
            }
        }
        Self::new(*grid, comps)
    }

    pub fn euclidean(grid: &ChartGrid) -> Self {
        Self::from_fn(grid, |_| IDENTITY).expect("identity is positive definite")
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn comps(&self) -> &[Vec<f64>; 6] {
        &self.comps
    }

    pub fn at(&self, idx: usize) -> Mat3 {
        unpack(&self.comps, idx)
    }

    pub fn inverse_at(&self, idx: usize) -> Mat3 {
        unpack(&self.inverse, idx)
    }

    pub fn sqrt_det(&self) -> &[f64] {
        &self.sqrt_det
    }

    /// Riemannian volume form √g dx¹∧dx²∧dx³.
    pub fn volume_form(&self) -> KForm {
        KForm::from_parts(self.grid, 3, vec![self.sqrt_det.clone()])
    }

    pub fn inner(&self, x: &VectorField, y: &VectorField) -> ScalarField {
        let v = (0..self.grid.len())
            .map(|i| quad(&self.at(i), x.at(i), y.at(i)))
            .collect();
        ScalarField::new(self.grid, v).unwrap()
    }

    pub fn norm(&self, x: &VectorField) -> ScalarField {
        self.inner(x, x).map(|v| v.max(0.0).sqrt())
    }

    /// Index raising: Z^i = g^{ij} α_j.
    pub fn sharp(&self, alpha: &KForm) -> Result<VectorField> {
        expect_degree(alpha, 1, "sharp takes a 1-form")?;
        same_grid(&self.grid, alpha.grid())?;
        Ok(self.apply_pointwise(alpha, |m, v| mat_vec(&m, v), true))
    }

    /// Index lowering: α_i = g_ij Z^j.
    pub fn flat(&self, z: &VectorField) -> Result<KForm> {
        same_grid(&self.grid, z.grid())?;
        let n = self.grid.len();
        let mut comps = vec![vec![0.0; n]; 3];
        for i in 0..n {
            let a = mat_vec(&self.at(i), z.at(i));
            for k in 0..3 {
                comps[k][i] = a[k];
            }
        }
        Ok(KForm::from_parts(self.grid, 1, comps))
    }

    /// Hodge star with `α∧β = g(⋆α, β) dV_g` for forms of complementary degree.
    pub fn hodge(&self, form: &KForm) -> Result<KForm> {
        same_grid(&self.grid, form.grid())?;
        let n = self.grid.len();
        match form.degree() {
            0 => {
                let v = (0..n).map(|i| form.comp(0)[i] * self.sqrt_det[i]).collect();
                Ok(KForm::from_parts(self.grid, 3, vec![v]))
            }
            3 => {
                let v = (0..n).map(|i| form.comp(0)[i] / self.sqrt_det[i]).collect();
                Ok(KForm::from_parts(self.grid, 0, vec![v]))
            }
            1 => {
                let mut out = self.apply_pointwise(form, |m, v| mat_vec(&m, v), true);
                for k in 0..3 {
                    for i in 0..n {
                        out.comps_mut()[k][i] *= self.sqrt_det[i];
                    }
                }
                Ok(KForm::from_vector_comps(2, &out))
            }
            _ => {
                let mut out = self.apply_pointwise(form, |m, v| mat_vec(&m, v), false);
                for k in 0..3 {
                    for i in 0..n {
                        out.comps_mut()[k][i] /= self.sqrt_det[i];
                    }
                }
                Ok(KForm::from_vector_comps(1, &out))
            }
        }
    }

    /// Pointwise inner product of two forms of the same degree.
    pub fn form_inner(&self, a: &KForm, b: &KForm) -> Result<ScalarField> {
        if a.degree() != b.degree() {
            return Err(GvError::Degree {
                found: b.degree(),
                reason: "inner product needs equal degrees",
            });
        }
        let sb = self.hodge(b)?;
        let top = crate::calculus::wedge(a, &sb)?;
        let v = (0..self.grid.len())
            .map(|i| top.comp(0)[i] / self.sqrt_det[i])
            .collect();
        ScalarField::new(self.grid, v)
    }

    /// Riemannian divergence (1/√g) ∂_i(√g Z^i).
    pub fn divergence(&self, z: &VectorField) -> ScalarField {
        let n = self.grid.len();
        let mut acc = vec![0.0; n];
        for a in 0..3 {
            let w: Vec<f64> = (0..n).map(|i| self.sqrt_det[i] * z.comp(a)[i]).collect();
            let p = partial_unchecked(&self.grid, &w, a);
            for i in 0..n {
                acc[i] += p[i];
            }
        }
        for i in 0..n {
            acc[i] /= self.sqrt_det[i];
        }
        ScalarField::new(self.grid, acc).unwrap()
    }

    /// Christoffel symbols of the second kind.
    pub fn connection(&self) -> Connection {
        let g = &self.grid;
        // dg[a][s] = ∂_a g_s
        let dg: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|a| {
                (0..6)
                    .map(|s| partial_unchecked(g, &self.comps[s], a))
                    .collect()
            })
            .collect();
        let mut gamma = vec![[0.0; 18]; g.len()];
        gamma.par_iter_mut().enumerate().for_each(|(idx, out)| {
            let inv = self.inverse_at(idx);
            let d = |a: usize, i: usize, j: usize| dg[a][sym(i, j)][idx];
            for i in 0..3 {
                for j in i..3 {
                    let mut lower = [0.0; 3];
                    for (l, lo) in lower.iter_mut().enumerate() {
                        *lo = 0.5 * (d(i, l, j) + d(j, l, i) - d(l, i, j));
                    }
                    for k in 0..3 {
                        out[k * 6 + sym(i, j)] =
                            inv[k][0] * lower[0] + inv[k][1] * lower[1] + inv[k][2] * lower[2];
                    }
                }
            }
        });
        Connection {
            grid: self.grid,
            gamma,
        }
    }

    fn apply_pointwise(
        &self,
        form: &KForm,
        f: impl Fn(Mat3, [f64; 3]) -> [f64; 3],
        use_inverse: bool,
    ) -> VectorField {
        let n = self.grid.len();
        let mut comps = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let m = if use_inverse {
                self.inverse_at(i)
            } else {
                self.at(i)
            };
            let v = f(m, form.at3(i));
            for k in 0..3 {
                comps[k][i] = v[k];
            }
        }
        VectorField::from_parts(self.grid, comps)
    }
}

/// Levi-Civita connection coefficients Γ^k_ij stored as `k * 6 + sym(i, j)`.
#[derive(Clone, Debug)]
pub struct Connection {
    grid: ChartGrid,
    gamma: Vec<[f64; 18]>,
}

impl Connection {
    pub fn christoffel(&self, idx: usize, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[idx][k * 6 + sym(i, j)]
    }

    /// ∇_X Y = X(Y^k) + Γ^k_ij X^i Y^j.
    pub fn covariant(&self, x: &VectorField, y: &VectorField) -> VectorField {
        let g = &self.grid;
        let n = g.len();
        let mut comps = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for k in 0..3 {
            for a in 0..3 {
                let p = partial_unchecked(g, y.comp(k), a);
                for idx in 0..n {
                    comps[k][idx] += x.comp(a)[idx] * p[idx];
                }
            }
        }
        for idx in 0..n {
            let xv = x.at(idx);
            let yv = y.at(idx);
            let gm = &self.gamma[idx];
            for (k, c) in comps.iter_mut().enumerate() {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += gm[k * 6 + sym(i, j)] * xv[i] * yv[j];
                    }
                }
                c[idx] += s;
            }
        }
        VectorField::from_parts(self.grid, comps)
    }
}

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn unpack(c: &[Vec<f64>; 6], idx: usize) -> Mat3 {
    let g = |i, j| c[sym(i, j)][idx];
    [
        [g(0, 0), g(0, 1), g(0, 2)],
        [g(1, 0), g(1, 1), g(1, 2)],
        [g(2, 0), g(2, 1), g(2, 2)],
    ]
}

pub fn mat_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn quad(m: &Mat3, x: [f64; 3], y: [f64; 3]) -> f64 {
    let mx = mat_vec(m, y);
    x[0] * mx[0] + x[1] * mx[1] + x[2] * mx[2]
}

pub fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse and determinant of a 3×3 matrix via the adjugate.
pub fn invert(m: &Mat3) -> (Mat3, f64) {
    let dt = det(m);
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [c(1, 2, 1, 2), -c(0, 2, 1, 2), c(0, 1, 1, 2)],
        [-c(1, 2, 0, 2), c(0, 2, 0, 2), -c(0, 1, 0, 2)],
        [c(1, 2, 0, 1), -c(0, 2, 0, 1), c(0, 1, 0, 1)],
    ];
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = adj[i][j] / dt;
        }
    }
    (inv, dt)
}

/// Cholesky test with a relative pivot floor.
pub fn check_positive_definite(m: &Mat3) -> std::result::Result<(), String> {
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err("non-finite entry".into());
    }
    let scale = m[0][0].abs().max(m[1][1].abs()).max(m[2][2].abs());
    let floor = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut l = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut s = m[j][j];
        for k in 0..j {
            s -= l[j][k] * l[j][k];
        }
        if s <= floor {
            return Err(format!("leading minor {} has pivot {s:e}", j + 1));
        }
        l[j][j] = s.sqrt();
        for i in j + 1..3 {
            let mut t = m[i][j];
            for k in 0..j {
                t -= l[i][k] * l[j][k];
            }
            l[i][j] = t / l[j][j];
        }
    }
    Ok(())
}

fn expect_degree(f: &KForm, deg: u8, reason: &'static str) -> Result<()> {
    if f.degree() == deg {
        Ok(())
    } else {
        Err(GvError::Degree {
            found: f.degree(),
            reason,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{integrate, wedge};
    use proptest::prelude::*;

    fn bumpy(g: &ChartGrid, a: f64) -> MetricField {
        MetricField::from_fn(g, |x| {
            let s = a * x[0].sin();
            let t = a * (x[1] + x[2]).cos();
            [
                [1.0 + s * s, s * t, 0.2 * s],
                [s * t, 1.0 + t * t, 0.1 * t],
                [0.2 * s, 0.1 * t, 1.5 + s],
            ]
        })
        .unwrap()
    }

    #[test]
    fn rejects_indefinite_metric_with_location() {
        let g = ChartGrid::torus([8; 3]).unwrap();
        let err = MetricField::from_fn(&g, |x| {
            let mut m = IDENTITY;
            if x[0] > 3.0 {
                m[2][2] = -1.0;
            }
            m
        })
        .unwrap_err();
        match err {
            GvError::SingularMetric { position, .. } => assert!(position[0] > 3.0),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn sharp_flat_inverse() {
        let g = ChartGrid::torus([8; 3]).unwrap();
        let m = bumpy(&g, 0.4);
        let z = VectorField::from_fn(&g, |x| [x[0].cos(), 1.0, x[2].sin()]);
        let back = m.sharp(&m.flat(&z).unwrap()).unwrap();
        assert!(back.lin_comb(1.0, &z, -1.0).max_abs() < 1e-13);
    }

    #[test]
    fn hodge_involution_and_pairing() {
        let g = ChartGrid::torus([8; 3]).unwrap();
        let m = bumpy(&g, 0.5);
        let a = KForm::from_fn(&g, 1, |x| [x[0].sin(), 0.3, x[1].cos()]);
        let b = KForm::from_fn(&g, 1, |x| [1.0, x[2].cos(), -0.2]);
        let ssa = m.hodge(&m.hodge(&a).unwrap()).unwrap();
        assert!(ssa.sub(&a).unwrap().max_abs() < 1e-13);
        // α∧⋆β = g(α,β) dV_g and the pairing is symmetric
        let ab = wedge(&a, &m.hodge(&b).unwrap()).unwrap();
        let ba = wedge(&b, &m.hodge(&a).unwrap()).unwrap();
        assert!(ab.sub(&ba).unwrap().max_abs() < 1e-13);
        let direct: Vec<f64> = (0..g.len())
            .map(|i| quad(&m.inverse_at(i), a.at3(i), b.at3(i)) * m.sqrt_det()[i])
            .collect();
        for i in 0..g.len() {
            assert!((ab.comp(0)[i] - direct[i]).abs() < 1e-13);
        }
        let f = KForm::function(&ScalarField::from_fn(&g, |x| x[1].sin()));
        let sf = m.hodge(&m.hodge(&f).unwrap()).unwrap();
        assert!(sf.sub(&f).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn euclidean_connection_vanishes_and_polar_does_not() {
        let g = ChartGrid::torus([8; 3]).unwrap();
        let e = MetricField::euclidean(&g);
        let c = e.connection();
        assert!((0..g.len()).all(|i| c.gamma[i].iter().all(|v| *v == 0.0)));
        // g = dr² + r² dθ² + dz² on a bounded chart: Γ^r_θθ = -r, Γ^θ_rθ = 1/r
        let ch = ChartGrid::chart([12; 3], [1.0, 0.0, 0.0], [2.0, 1.0, 1.0]).unwrap();
        let p = MetricField::from_fn(&ch, |x| [[1.0, 0.0, 0.0], [0.0, x[0] * x[0], 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let c = p.connection();
        for idx in 0..ch.len() {
            let r = ch.point(idx)[0];
            assert!((c.christoffel(idx, 0, 1, 1) + r).abs() < 1e-12);
            assert!((c.christoffel(idx, 1, 0, 1) - 1.0 / r).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_theorem_on_torus() {
        let g = ChartGrid::torus([12; 3]).unwrap();
        let m = bumpy(&g, 0.3);
        let z = VectorField::from_fn(&g, |x| [x[1].sin(), (x[0] + x[2]).cos(), 0.4]);
        let div = m.divergence(&z);
        let vol = m.volume_form().scale_by(&div);
        assert!(integrate(&vol).unwrap().abs() < 1e-11);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn invert_round_trip(v in prop::array::uniform6(-0.4f64..0.4)) {
            let m = [
                [1.0 + v[0].abs(), v[1], v[2]],
                [v[1], 1.0 + v[3].abs(), v[4]],
                [v[2], v[4], 1.0 + v[5].abs()],
            ];
            prop_assert!(check_positive_definite(&m).is_ok());
            let (inv, _) = invert(&m);
            for i in 0..3 {
                for j in 0..3 {
                    let s: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                    prop_assert!((s - IDENTITY[i][j]).abs() < 1e-13);
                }
            }
        }
    }
}
