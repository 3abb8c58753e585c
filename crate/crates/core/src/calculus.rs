//! Finite-difference exterior calculus on a [`ChartGrid`].
//!
//! Every derivative is the fourth-order five-point central stencil along one
//! axis, wrapped on periodic axes. The two rows next to a bounded face use
//! sixth-order one-sided seven-point stencils, so derivatives of derivatives
//! keep fourth order up to the face.

use rayon::prelude::*;

use crate::error::{GvError, Result};
use crate::grid::{same_grid, ChartGrid, KForm, ScalarField, Topology, VectorField};

// Boundary rows, in units of 1/(60h).
const LEFT0: [f64; 7] = [-147.0, 360.0, -450.0, 400.0, -225.0, 72.0, -10.0];
const LEFT1: [f64; 7] = [-10.0, -77.0, 150.0, -100.0, 50.0, -15.0, 2.0];

/// ∂f/∂x^axis of sampled values.
pub fn partial(grid: &ChartGrid, values: &[f64], axis: usize) -> Result<Vec<f64>> {
    ChartGrid::check_axis(axis)?;
    if values.len() != grid.len() {
        return Err(GvError::InvalidGrid("value length does not match grid".into()));
    }
    Ok(partial_unchecked(grid, values, axis))
}

pub(crate) fn partial_unchecked(grid: &ChartGrid, values: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.sizes()[axis];
    let s = grid.stride(axis);
    let inv = 1.0 / (12.0 * grid.spacing(axis));
    let periodic = grid.topology(axis) == Topology::Periodic;
    let mut out = vec![0.0; values.len()];
    out.par_iter_mut().enumerate().for_each(|(idx, o)| {
        let i = grid.unravel(idx)[axis];
        let base = idx - i * s;
        let at = |j: usize| values[base + j * s];
        *o = if periodic {
            let m = |k: isize| at(((i as isize + k).rem_euclid(n as isize)) as usize);
            (m(-2) - 8.0 * m(-1) + 8.0 * m(1) - m(2)) * inv
        } else if i >= 2 && i + 2 < n {
            (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) * inv
        } else if i < 2 {
            let c = if i == 0 { &LEFT0 } else { &LEFT1 };
            (0..7).map(|k| c[k] * at(k)).sum::<f64>() * inv / 5.0
        } else {
            let c = if i + 1 == n { &LEFT0 } else { &LEFT1 };
            -(0..7).map(|k| c[k] * at(n - 1 - k)).sum::<f64>() * inv / 5.0
        };
    });
    out
}

/// ∂f/∂x^axis of a scalar field.
pub fn partial_field(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    let v = partial(f.grid(), f.values(), axis)?;
    ScalarField::new(*f.grid(), v)
}

pub fn gradient(f: &ScalarField) -> [ScalarField; 3] {
    let g = f.grid();
    [0, 1, 2].map(|a| ScalarField::new(*g, partial_unchecked(g, f.values(), a)).unwrap())
}

/// Exterior derivative.
pub fn d(form: &KForm) -> Result<KForm> {
    let g = form.grid();
    let p = |c: usize, a: usize| partial_unchecked(g, form.comp(c), a);
    let sub = |x: Vec<f64>, y: Vec<f64>| -> Vec<f64> { x.iter().zip(&y).map(|(a, b)| a - b).collect() };
    match form.degree() {
        0 => Ok(KForm::from_parts(*g, 1, vec![p(0, 0), p(0, 1), p(0, 2)])),
        1 => Ok(KForm::from_parts(
            *g,
            2,
            vec![
                sub(p(2, 1), p(1, 2)),
                sub(p(0, 2), p(2, 0)),
                sub(p(1, 0), p(0, 1)),
            ],
        )),
        2 => {
            let (a, b, c) = (p(0, 0), p(1, 1), p(2, 2));
            let div = a.iter().zip(&b).zip(&c).map(|((x, y), z)| x + y + z).collect();
            Ok(KForm::from_parts(*g, 3, vec![div]))
        }
        k => Err(GvError::Degree {
            found: k,
            reason: "d of a top form vanishes identically on a 3-manifold",
        }),
    }
}

/// Wedge product; the result degree must not exceed 3.
pub fn wedge(a: &KForm, b: &KForm) -> Result<KForm> {
    same_grid(a.grid(), b.grid())?;
    let g = *a.grid();
    let n = g.len();
    let (p, q) = (a.degree(), b.degree());
    if p + q > 3 {
        return Err(GvError::Degree {
            found: p + q,
            reason: "wedge product exceeds top degree",
        });
    }
    if p == 0 {
        return Ok(b.scale_by(&a.coefficient()));
    }
    if q == 0 {
        return Ok(a.scale_by(&b.coefficient()));
    }
    match (p, q) {
        (1, 1) => {
            let mut comps = vec![vec![0.0; n]; 3];
            for i in 0..n {
                let c = cross(a.at3(i), b.at3(i));
                for k in 0..3 {
                    comps[k][i] = c[k];
                }
            }
            Ok(KForm::from_parts(g, 2, comps))
        }
        _ => {
            let v = (0..n).map(|i| dot(a.at3(i), b.at3(i))).collect();
            Ok(KForm::from_parts(g, 3, vec![v]))
        }
    }
}

/// Interior product ι_Z of a form of degree 1..=3.
pub fn interior(z: &VectorField, form: &KForm) -> Result<KForm> {
    same_grid(z.grid(), form.grid())?;
    let g = *form.grid();
    let n = g.len();
    match form.degree() {
        0 => Err(GvError::Degree {
            found: 0,
            reason: "interior product of a function is undefined",
        }),
        1 => {
            let v = (0..n).map(|i| dot(z.at(i), form.at3(i))).collect();
            Ok(KForm::from_parts(g, 0, vec![v]))
        }
        2 => {
            let mut comps = vec![vec![0.0; n]; 3];
            for i in 0..n {
                let c = cross(form.at3(i), z.at(i));
                for k in 0..3 {
                    comps[k][i] = c[k];
                }
            }
            Ok(KForm::from_parts(g, 1, comps))
        }
        _ => {
            let c = form.comp(0);
            let mut comps = vec![vec![0.0; n]; 3];
            for i in 0..n {
                let zi = z.at(i);
                for k in 0..3 {
                    comps[k][i] = c[i] * zi[k];
                }
            }
            Ok(KForm::from_parts(g, 2, comps))
        }
    }
}

/// Lie derivative via Cartan's formula `L_Z = d ι_Z + ι_Z d`.
pub fn lie(z: &VectorField, form: &KForm) -> Result<KForm> {
    same_grid(z.grid(), form.grid())?;
    match form.degree() {
        0 => {
            let df = d(form)?;
            interior(z, &df)
        }
        3 => d(&interior(z, form)?),
        _ => d(&interior(z, form)?)?.add(&interior(z, &d(form)?)?),
    }
}

/// Directional derivative Z(f).
pub fn directional(z: &VectorField, f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let mut out = vec![0.0; g.len()];
    for a in 0..3 {
        let p = partial_unchecked(g, f.values(), a);
        for (o, (pi, zi)) in out.iter_mut().zip(p.iter().zip(z.comp(a))) {
            *o += zi * pi;
        }
    }
    ScalarField::new(*g, out).unwrap()
}

/// Quadrature sum of `values` with grid weights, in a fixed sequential order.
pub fn integrate_values(grid: &ChartGrid, values: &[f64]) -> f64 {
    let mut sum = NeumaierSum::default();
    for (idx, v) in values.iter().enumerate() {
        sum.add(v * grid.cell_weight(idx));
    }
    sum.value()
}

/// ∫ c dx¹∧dx²∧dx³ with the positive coordinate orientation.
pub fn integrate(form: &KForm) -> Result<f64> {
    if form.degree() != 3 {
        return Err(GvError::Degree {
            found: form.degree(),
            reason: "only 3-forms can be integrated",
        });
    }
    Ok(integrate_values(form.grid(), form.comp(0)))
}

/// Same as [`integrate`] restricted to points with `mask[idx]`.
pub fn integrate_masked(form: &KForm, mask: &[bool]) -> Result<f64> {
    if form.degree() != 3 {
        return Err(GvError::Degree {
            found: form.degree(),
            reason: "only 3-forms can be integrated",
        });
    }
    let g = form.grid();
    let mut sum = NeumaierSum::default();
    for (idx, v) in form.comp(0).iter().enumerate() {
        if mask[idx] {
            sum.add(v * g.cell_weight(idx));
        }
    }
    Ok(sum.value())
}

/// Compensated summation.
#[derive(Default, Clone, Copy, Debug)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn torus(n: usize) -> ChartGrid {
        ChartGrid::torus([n; 3]).unwrap()
    }

    fn chart(n: usize) -> ChartGrid {
        ChartGrid::chart([n; 3], [-1.0; 3], [1.0; 3]).unwrap()
    }

    #[test]
    fn derivative_of_sine_is_fourth_order() {
        let errs: Vec<f64> = [16, 32]
            .iter()
            .map(|&n| {
                let g = torus(n);
                let f = ScalarField::from_fn(&g, |x| x[0].sin());
                let df = partial_field(&f, 0).unwrap();
                let exact = ScalarField::from_fn(&g, |x| x[0].cos());
                (&df - &exact).max_abs()
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 3.8, "order {order}");
    }

    #[test]
    fn bounded_stencils_exact_on_quartics() {
        let g = chart(9);
        let f = ScalarField::from_fn(&g, |x| x[2].powi(4) - 2.0 * x[2].powi(3) + x[2]);
        let df = partial_field(&f, 2).unwrap();
        let exact = ScalarField::from_fn(&g, |x| 4.0 * x[2].powi(3) - 6.0 * x[2].powi(2) + 1.0);
        assert!((&df - &exact).max_abs() < 1e-12);
    }

    #[test]
    fn axis_out_of_range() {
        let g = torus(8);
        assert_eq!(
            partial(&g, &vec![0.0; g.len()], 3),
            Err(GvError::AxisOutOfRange(3))
        );
    }

    #[test]
    fn contact_chart_identities() {
        let g = chart(12);
        let omega = KForm::from_fn(&g, 1, |x| [-x[1], 0.0, 1.0]);
        let domega = d(&omega).unwrap();
        for i in 0..g.len() {
            let c = domega.at3(i);
            assert!(c[0].abs() < 1e-12 && c[1].abs() < 1e-12 && (c[2] - 1.0).abs() < 1e-12);
        }
        let vol = wedge(&omega, &domega).unwrap();
        assert!(vol.comp(0).iter().all(|v| (v - 1.0).abs() < 1e-12));
        // ι_{X₁} dω = dx² for X₁ = ∂₁ + x₂∂₃
        let x1 = VectorField::from_fn(&g, |x| [1.0, 0.0, x[1]]);
        let i = interior(&x1, &domega).unwrap();
        for k in 0..g.len() {
            let c = i.at3(k);
            assert!(c[0].abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12 && c[2].abs() < 1e-12);
        }
    }

    #[test]
    fn integral_of_sine_squared() {
        let g = torus(16);
        let f = KForm::volume(&ScalarField::from_fn(&g, |x| x[0].sin().powi(2)));
        let v = integrate(&f).unwrap();
        let exact = 4.0 * PI.powi(3);
        assert!((v - exact).abs() < 1e-11 * exact);
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let g = ChartGrid::chart([9, 10, 11], [0.0, -1.0, 2.0], [1.0, 1.0, 5.0]).unwrap();
        let f = KForm::volume(&ScalarField::from_fn(&g, |x| 1.0 + x[0] + 2.0 * x[2]));
        // ∫ over [0,1]×[-1,1]×[2,5]
        let exact = 6.0 * (1.0 + 0.5 + 2.0 * 3.5);
        assert!((integrate(&f).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn degree_errors() {
        let g = torus(8);
        let f = KForm::zero(&g, 0);
        let z = VectorField::zeros(&g);
        assert!(matches!(interior(&z, &f), Err(GvError::Degree { .. })));
        let two = KForm::zero(&g, 2);
        assert!(wedge(&two, &two).is_err());
        assert!(d(&KForm::zero(&g, 3)).is_err());
        assert!(integrate(&two).is_err());
    }

    #[test]
    fn lie_of_function_is_directional_derivative() {
        let g = torus(16);
        let f = ScalarField::from_fn(&g, |x| (x[0] + 2.0 * x[2]).sin());
        let z = VectorField::from_fn(&g, |x| [x[1].cos(), 1.0, 0.5]);
        let a = lie(&z, &KForm::function(&f)).unwrap().coefficient();
        let b = directional(&z, &f);
        assert!((&a - &b).max_abs() < 1e-13);
    }

    fn trig_field(g: &ChartGrid, c: [f64; 6]) -> ScalarField {
        ScalarField::from_fn(g, move |x| {
            c[0] * (x[0] + c[1]).sin() * (2.0 * x[1]).cos()
                + c[2] * (x[1] - x[2] + c[3]).cos()
                + c[4] * (x[2] + x[0]).sin() * c[5]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn dd_vanishes(c in prop::array::uniform6(-1.0f64..1.0), e in prop::array::uniform6(-1.0f64..1.0)) {
            let g = torus(12);
            let f = trig_field(&g, c);
            let dd = d(&d(&KForm::function(&f)).unwrap()).unwrap();
            prop_assert!(dd.max_abs() < 1e-11);
            let h = trig_field(&g, e);
            let one = KForm::from_vector_comps(1, &VectorField::from_scalars(&f, &h, &f.scale(0.3)));
            let dd1 = d(&d(&one).unwrap()).unwrap();
            prop_assert!(dd1.max_abs() < 1e-11);
        }

        #[test]
        fn exact_forms_integrate_to_zero(c in prop::array::uniform6(-1.0f64..1.0), e in prop::array::uniform6(-1.0f64..1.0)) {
            let g = torus(12);
            let f = trig_field(&g, c);
            let h = trig_field(&g, e);
            let two = KForm::from_vector_comps(2, &VectorField::from_scalars(&h, &f, &(&f * &h)));
            prop_assert!(integrate(&d(&two).unwrap()).unwrap().abs() < 1e-11);
        }

        #[test]
        fn wedge_antisymmetric(a in prop::array::uniform3(-2.0f64..2.0), b in prop::array::uniform3(-2.0f64..2.0)) {
            let g = torus(8);
            let x = KForm::from_fn(&g, 1, move |p| [a[0] * p[0].sin(), a[1], a[2] * p[2].cos()]);
            let y = KForm::from_fn(&g, 1, move |p| [b[0], b[1] * p[1].cos(), b[2]]);
            let s = wedge(&x, &y).unwrap().add(&wedge(&y, &x).unwrap()).unwrap();
            prop_assert!(s.max_abs() == 0.0);
            let xx = wedge(&x, &x).unwrap();
            prop_assert!(xx.max_abs() == 0.0);
        }
    }
}
