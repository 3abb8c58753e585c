//! Convergence sweeps: one quantity measured along a grid, time-step or
//! amplitude axis, written as CSV with observed orders.

use gvlab_core::calculus::{d, wedge};
use gvlab_core::geometry::Geometry;
use gvlab_core::gv::gv_reinhart_wood;
use gvlab_core::scenarios::Scenario;
use gvlab_core::variations::{finite_difference_variation, first_variation};
use gvlab_core::{ChartGrid, GvError, KForm, Result};

use crate::probes;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// Points per axis, cubic grids.
    Grid,
    /// Finite-difference step.
    Dt,
    /// The scenario's amplitude parameter.
    Amplitude,
}

impl std::str::FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "grid" => Ok(Axis::Grid),
            "dt" => Ok(Axis::Dt),
            "amplitude" => Ok(Axis::Amplitude),
            _ => Err(format!("unknown sweep axis `{s}` (grid, dt, amplitude)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// `|gv_direct − gv_rw|`
    RwGap,
    /// `max |η∧dη + k²(τ − h_BN) dV_g|` on the mask
    RwPointwise,
    /// `max |d(dω)|`
    Dd,
    /// `max |dα − exact|` for a fixed trigonometric 1-form on the torus
    DError,
    /// `|analytic − raw FD|` for a seeded tilt variation
    FirstVariation,
    /// `min ⋆(ω∧dω)`, the confoliation margin (Euclidean volume)
    OmegaDomega,
}

pub const QUANTITIES: [&str; 6] = ["rw-gap", "rw-pointwise", "dd", "d-error", "first-variation", "omega-domega"];

impl std::str::FromStr for Quantity {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "rw-gap" => Quantity::RwGap,
            "rw-pointwise" => Quantity::RwPointwise,
            "dd" => Quantity::Dd,
            "d-error" => Quantity::DError,
            "first-variation" => Quantity::FirstVariation,
            "omega-domega" => Quantity::OmegaDomega,
            _ => return Err(format!("unknown sweep quantity `{s}` ({})", QUANTITIES.join(", "))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub error: f64,
    /// `ln(e_{i−1}/e_i) / |ln(v_i/v_{i−1})|`, which is the `log₂` error ratio
    /// when successive values differ by a factor 2.
    pub order: Option<f64>,
}

pub struct SweepSetup<'a> {
    pub scenario: &'a Scenario,
    pub grid: [usize; 3],
    pub dt: f64,
    pub seed: u64,
}

fn at_point(setup: &SweepSetup, axis: Axis, value: f64, q: Quantity) -> Result<f64> {
    let (grid, dt, amp) = match axis {
        Axis::Grid => {
            if value.fract() != 0.0 || value < 1.0 {
                return Err(GvError::Invalid(format!("grid sweep values must be integers, got {value}")));
            }
            ([value as usize; 3], setup.dt, setup.scenario.amplitude)
        }
        Axis::Dt => (setup.grid, value, setup.scenario.amplitude),
        Axis::Amplitude => (setup.grid, setup.dt, value),
    };
    let s = setup.scenario;
    match q {
        Quantity::RwGap | Quantity::RwPointwise => {
            let cp = s.compatible_with(grid, amp)?;
            let geo = Geometry::new(&cp, None);
            let r = gv_reinhart_wood(&cp, &geo)?;
            Ok(if q == Quantity::RwGap {
                (r.gv_direct - r.gv_rw).abs()
            } else {
                r.pointwise_residual.max_abs()
            })
        }
        Quantity::Dd => {
            let p = s.pair_with(grid, amp)?;
            Ok(d(&d(p.omega())?)?.max_abs())
        }
        Quantity::DError => {
            let g = ChartGrid::torus(grid)?;
            let a = KForm::from_fn(&g, 1, |x| [x[1].sin() * x[2].cos(), (x[0] + x[2]).cos(), 0.0]);
            let exact = KForm::from_fn(&g, 2, |x| {
                [(x[0] + x[2]).sin(), -x[1].sin() * x[2].sin(), -(x[0] + x[2]).sin() - x[1].cos() * x[2].cos()]
            });
            Ok(d(&a)?.sub(&exact)?.max_abs())
        }
        Quantity::FirstVariation => {
            let p = s.pair_with(grid, amp)?;
            let v = probes::random_variation(&mut probes::rng(setup.seed), &p, "tilt", 0.2);
            let exact = first_variation(&p, &v)?;
            Ok((finite_difference_variation(&p, &v, dt, 1)?.raw - exact).abs())
        }
        Quantity::OmegaDomega => {
            let p = s.pair_with(grid, amp)?;
            let w = wedge(p.omega(), &d(p.omega())?)?;
            Ok(w.coefficient().values().iter().copied().fold(f64::INFINITY, f64::min))
        }
    }
}

pub fn sweep(setup: &SweepSetup, axis: Axis, values: &[f64], q: Quantity) -> Result<Vec<SweepRow>> {
    if values.len() < 3 {
        return Err(GvError::Invalid(format!(
            "a sweep needs at least 3 values to estimate an order, got {}",
            values.len()
        )));
    }
    let mut rows: Vec<SweepRow> = Vec::with_capacity(values.len());
    for &v in values {
        let error = at_point(setup, axis, v, q)?;
        let order = rows.last().and_then(|prev| {
            let r = (prev.error / error).ln() / (v / prev.value).ln().abs();
            r.is_finite().then_some(r)
        });
        rows.push(SweepRow { value: v, error, order });
    }
    Ok(rows)
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("value,error,order\n");
    for r in rows {
        let order = r.order.map(|o| format!("{o:.16e}")).unwrap_or_default();
        s.push_str(&format!("{:.16e},{:.16e},{}\n", r.value, r.error, order));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use gvlab_core::scenarios::find;

    fn setup() -> SweepSetup<'static> {
        SweepSetup { scenario: find("tilted").unwrap(), grid: [16; 3], dt: 1e-3, seed: 1 }
    }

    #[test]
    fn needs_three_values() {
        assert!(sweep(&setup(), Axis::Grid, &[16.0, 32.0], Quantity::Dd).is_err());
    }

    #[test]
    fn derivative_error_converges_at_fourth_order() {
        let rows = sweep(&setup(), Axis::Grid, &[16.0, 32.0, 64.0], Quantity::DError).unwrap();
        assert!(rows[0].order.is_none());
        for r in &rows[1..] {
            assert!(r.order.unwrap() > 3.5, "{rows:?}");
        }
        let csv = to_csv(&rows);
        assert!(csv.starts_with("value,error,order\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn first_variation_error_is_second_order_in_dt() {
        let rows = sweep(&setup(), Axis::Dt, &[4e-2, 2e-2, 1e-2], Quantity::FirstVariation).unwrap();
        for r in &rows[1..] {
            assert!((r.order.unwrap() - 2.0).abs() < 0.1, "{rows:?}");
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("dt".parse::<Axis>().unwrap(), Axis::Dt);
        assert!("time".parse::<Axis>().is_err());
        for q in QUANTITIES {
            q.parse::<Quantity>().unwrap();
        }
    }
}
