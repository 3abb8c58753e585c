//! Named (ω, T, seed metric) configurations with known analytic behaviour.

use crate::error::{GvError, Result};
use crate::geometry::{build_compatible_metric, CompatiblePair, DistributionPair, MetricSeed};
use crate::grid::{ChartGrid, KForm, VectorField};

type Builder = fn(&ChartGrid, f64) -> Result<DistributionPair>;

#[derive(Clone, Copy, Debug)]
pub enum Domain {
    Torus,
    /// Bounded box `[lo, hi]³`.
    Chart { lo: f64, hi: f64 },
}

#[derive(Clone, Copy)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    /// What the scenario is known to satisfy.
    pub ground_truth: &'static str,
    pub domain: Domain,
    pub seed: MetricSeed,
    /// Default value of the scenario's main amplitude parameter.
    pub amplitude: f64,
    /// Non-zero when `ker ω` is integrable.
    pub integrable: bool,
    builder: Builder,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario").field("name", &self.name).finish()
    }
}

impl Scenario {
    pub fn grid(&self, sizes: [usize; 3]) -> Result<ChartGrid> {
        match self.domain {
            Domain::Torus => ChartGrid::torus(sizes),
            Domain::Chart { lo, hi } => ChartGrid::chart(sizes, [lo; 3], [hi; 3]),
        }
    }

    pub fn pair(&self, sizes: [usize; 3]) -> Result<DistributionPair> {
        self.pair_with(sizes, self.amplitude)
    }

    pub fn pair_with(&self, sizes: [usize; 3], amplitude: f64) -> Result<DistributionPair> {
        (self.builder)(&self.grid(sizes)?, amplitude)
    }

    pub fn compatible(&self, sizes: [usize; 3]) -> Result<CompatiblePair> {
        build_compatible_metric(&self.pair(sizes)?, self.seed)
    }

    pub fn compatible_with(&self, sizes: [usize; 3], amplitude: f64) -> Result<CompatiblePair> {
        build_compatible_metric(&self.pair_with(sizes, amplitude)?, self.seed)
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.domain, Domain::Torus)
    }
}

/// Parameters of the tilted helix family.
pub const TILT_EPS: f64 = 0.2;
/// Horizontal log-warp amplitudes of the warped and twisted families.
pub const WARP_A: f64 = 0.4;
pub const WARP_B: f64 = 0.3;
/// Fiber-direction log-warp amplitude of the twisted families.
pub const TWIST_C: f64 = 0.25;
/// Coefficients `P₁ = C₁₀ + C₁₁ z + C₁₂ z² (+ c₃ z³)`, `P₂ = r P₁` of the chart families.
pub const CHART_C: [f64; 3] = [0.2, 1.0, 0.3];
pub const CHART_RATIO: f64 = 0.5;

fn pair_from(grid: &ChartGrid, omega: impl Fn([f64; 3]) -> [f64; 3], t: impl Fn([f64; 3]) -> [f64; 3]) -> Result<DistributionPair> {
    DistributionPair::new(KForm::from_fn(grid, 1, omega), VectorField::from_fn(grid, t))
}

/// Tensor-product raised-cosine bump `Π cos⁴(π s_i / 2)`, where `s_i` maps
/// the central half of axis `i` onto `[-1, 1]`; zero outside.
pub fn bump(grid: &ChartGrid, x: [f64; 3]) -> f64 {
    let (o, e) = (grid.origin(), grid.extents());
    (0..3)
        .map(|i| {
            let s = (x[i] - o[i] - 0.5 * e[i]) / (0.25 * e[i]);
            if s.abs() >= 1.0 {
                0.0
            } else {
                (0.5 * std::f64::consts::PI * s).cos().powi(4)
            }
        })
        .product()
}

fn foliation(grid: &ChartGrid, _a: f64) -> Result<DistributionPair> {
    pair_from(grid, |_| [0.0, 0.0, 1.0], |_| [0.0, 0.0, 1.0])
}

fn contact(grid: &ChartGrid, _a: f64) -> Result<DistributionPair> {
    let v = |x: [f64; 3]| [x[2].cos(), -x[2].sin(), 0.0];
    pair_from(grid, v, v)
}

fn contact_chart(grid: &ChartGrid, _a: f64) -> Result<DistributionPair> {
    pair_from(grid, |x| [-x[1], 0.0, 1.0], |_| [0.0, 0.0, 1.0])
}

/// Unit field along `V = (a cos z + ε sin x₂, a sin z + ε cos x₁, 1)`, `ω = T♭`.
pub fn tilted_field(a: f64, x: [f64; 3]) -> [f64; 3] {
    let v = [
        a * x[2].cos() + TILT_EPS * x[1].sin(),
        a * x[2].sin() + TILT_EPS * x[0].cos(),
        1.0,
    ];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn tilted(grid: &ChartGrid, a: f64) -> Result<DistributionPair> {
    pair_from(grid, move |x| tilted_field(a, x), move |x| tilted_field(a, x))
}

fn log_warp(x: [f64; 3], twist: f64, c: f64) -> f64 {
    WARP_A * x[0].sin() + WARP_B * x[1].cos() + c * x[2].sin() + twist * x[0].sin() * x[2].cos()
}

fn warp_pair(grid: &ChartGrid, twist: f64, c: f64) -> Result<DistributionPair> {
    pair_from(
        grid,
        move |x| [0.0, 0.0, log_warp(x, twist, c).exp()],
        move |x| [0.0, 0.0, (-log_warp(x, twist, c)).exp()],
    )
}

fn warped(grid: &ChartGrid, _a: f64) -> Result<DistributionPair> {
    warp_pair(grid, 0.0, 0.0)
}

fn twisted(grid: &ChartGrid, a: f64) -> Result<DistributionPair> {
    warp_pair(grid, a, TWIST_C)
}

fn twisted_factorizable(grid: &ChartGrid, _a: f64) -> Result<DistributionPair> {
    warp_pair(grid, 0.0, TWIST_C)
}

/// `P₁(z)` of the polynomial chart families with cubic coefficient `c3`.
pub fn chart_p1(c3: f64, z: f64) -> f64 {
    CHART_C[0] + CHART_C[1] * z + CHART_C[2] * z * z + c3 * z * z * z
}

fn poly_chart(grid: &ChartGrid, c3: f64) -> Result<DistributionPair> {
    pair_from(
        grid,
        move |x| {
            let p = chart_p1(c3, x[2]);
            [p, CHART_RATIO * p, 1.0]
        },
        |_| [0.0, 0.0, 1.0],
    )
}

fn shear(grid: &ChartGrid, a: f64) -> Result<DistributionPair> {
    pair_from(
        grid,
        move |x| {
            [
                a * (x[2].sin() + (x[2] + x[1]).sin()),
                a * (x[2].cos() + 0.5 * (2.0 * x[2] + x[0]).cos()),
                1.0,
            ]
        },
        |_| [0.0, 0.0, 1.0],
    )
}

fn rectifying(grid: &ChartGrid, a: f64) -> Result<DistributionPair> {
    pair_from(grid, move |x| [a * x[2].sin(), 0.5 * x[0].sin(), 1.0], |_| [0.0, 0.0, 1.0])
}

static CATALOG: [Scenario; 11] = [
    Scenario {
        name: "foliation",
        summary: "planar foliation dz with T = d/dz on the flat torus",
        ground_truth: "eta = 0, h = 0, gv = 0",
        domain: Domain::Torus,
        seed: MetricSeed::Euclidean,
        amplitude: 0.0,
        integrable: true,
        builder: foliation,
    },
    Scenario {
        name: "contact",
        summary: "contact form cos z dx - sin z dy with its Reeb field on the flat torus",
        ground_truth: "eta = 0, T-curves are geodesics, gv = 0 and every first variation vanishes",
        domain: Domain::Torus,
        seed: MetricSeed::Euclidean,
        amplitude: 0.0,
        integrable: false,
        builder: contact,
    },
    Scenario {
        name: "contact-chart",
        summary: "contact form dx3 - x2 dx1 with T = d/dx3 on [-1,1]^3",
        ground_truth: "d omega = dx1^dx2, omega^d omega = vol, eta = 0",
        domain: Domain::Chart { lo: -1.0, hi: 1.0 },
        seed: MetricSeed::Euclidean,
        amplitude: 0.0,
        integrable: false,
        builder: contact_chart,
    },
    Scenario {
        name: "tilted",
        summary: "unit field along (a cos z + e sin y, a sin z + e cos x, 1) with omega = T-flat, flat torus",
        ground_truth: "curvature bounded away from 0; gv equals minus the integral of k^2 (tau - h_BN)",
        domain: Domain::Torus,
        seed: MetricSeed::Euclidean,
        amplitude: 0.5,
        integrable: false,
        builder: tilted,
    },
    Scenario {
        name: "warped",
        summary: "warped product dx1^2 + dx2^2 + phi(x1,x2)^2 dz^2 with T tangent to the circle fibers",
        ground_truth: "leaves totally geodesic, tau = 0, k constant on fibers, gv = 0",
        domain: Domain::Torus,
        seed: MetricSeed::Euclidean,
        amplitude: 0.0,
        integrable: true,
        builder: warped,
    },
    Scenario {
        name: "twisted",
        summary: "twisted product with non-factorizable phi(x1,x2,z); amplitude is the mixing strength",
        ground_truth: "leaves totally geodesic, tau != 0, not critical",
        domain: Domain::Torus,
        seed: MetricSeed::Euclidean,
        amplitude: 0.3,
        integrable: true,
        builder: twisted,
    },
    Scenario {
        name: "twisted-factorizable",
        summary: "twisted product with phi = phi1(x1,x2) phi2(z)",
        ground_truth: "tau = 0 and T(k) = 0: critical",
        domain: Domain::Torus,
        seed: MetricSeed::Euclidean,
        amplitude: 0.0,
        integrable: true,
        builder: twisted_factorizable,
    },
    Scenario {
        name: "quadratic-chart",
        summary: "integrable chart dz + P(z) (dx1 + r dx2), P quadratic in z, horizontal seed metric; amplitude is the cubic coefficient",
        ground_truth: "(L_T)^3 omega = 0",
        domain: Domain::Chart { lo: -1.0, hi: 1.0 },
        seed: MetricSeed::Horizontal,
        amplitude: 0.0,
        integrable: true,
        builder: poly_chart,
    },
    Scenario {
        name: "cubic-chart",
        summary: "integrable chart dz + P(z) (dx1 + r dx2) with a cubic term c3 z^3",
        ground_truth: "(L_T)^3 omega = 6 c3 (dx1 + r dx2)",
        domain: Domain::Chart { lo: -1.0, hi: 1.0 },
        seed: MetricSeed::Horizontal,
        amplitude: 0.2,
        integrable: true,
        builder: poly_chart,
    },
    Scenario {
        name: "shear",
        summary: "non-integrable dz + a (sin z + sin(z + x2)) dx1 + a (cos z + cos(2z + x1)/2) dx2 with T = d/dz",
        ground_truth: "gv = (2 pi)^3 a^2, unchanged by rescaling T with functions constant along z",
        domain: Domain::Torus,
        seed: MetricSeed::Euclidean,
        amplitude: 0.3,
        integrable: false,
        builder: shear,
    },
    Scenario {
        name: "rectifying",
        summary: "dz + a sin z dx1 + (1/2) sin x1 dx2 with T = d/dz",
        ground_truth: "eta^d eta = 0 pointwise, so tau = h_BN where k != 0 and gv = 0",
        domain: Domain::Torus,
        seed: MetricSeed::Euclidean,
        amplitude: 0.4,
        integrable: false,
        builder: rectifying,
    },
];

pub fn catalog() -> &'static [Scenario] {
    &CATALOG
}

pub fn find(name: &str) -> Result<&'static Scenario> {
    CATALOG
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| GvError::Invalid(format!("unknown scenario `{name}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{d, wedge};
    use crate::geometry::compatibility_residual;

    #[test]
    fn every_scenario_builds_a_compatible_pair() {
        for s in catalog() {
            let cp = s.compatible([12; 3]).unwrap_or_else(|e| panic!("{}: {e}", s.name));
            assert!(compatibility_residual(cp.pair(), cp.g()) <= 1e-12, "{}", s.name);
        }
    }

    #[test]
    fn integrability_flags_match_omega_wedge_domega() {
        for s in catalog() {
            let p = s.pair([16; 3]).unwrap();
            let w = wedge(p.omega(), &d(p.omega()).unwrap()).unwrap();
            let m = p.grid().interior_mask(2);
            let r = w.max_abs_where(&m);
            if s.integrable {
                assert!(r < 1e-10, "{} {r}", s.name);
            } else {
                assert!(r > 1e-2, "{} {r}", s.name);
            }
        }
    }

    #[test]
    fn unknown_name() {
        assert!(find("nope").is_err());
        assert_eq!(find("contact").unwrap().name, "contact");
    }
}
