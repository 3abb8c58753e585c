//! Seeded random test fields: trigonometric fields on the torus, compactly
//! supported bumps, and admissible variations of a pair.

use gvlab_core::critical::SymmetricField;
use gvlab_core::geometry::DistributionPair;
use gvlab_core::gv::eval1;
use gvlab_core::variations::Variation;
use gvlab_core::{ChartGrid, KForm, ScalarField, VectorField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type ProbeRng = ChaCha8Rng;

pub fn rng(seed: u64) -> ProbeRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Σ a_m sin(k_m·x + φ_m)` with integer wave vectors, so it is periodic on
/// the `2π`-torus.
#[derive(Clone, Debug)]
pub struct TrigSum {
    terms: Vec<(f64, [f64; 3], f64)>,
}

impl TrigSum {
    pub fn random(rng: &mut ProbeRng, modes: usize, amplitude: f64) -> Self {
        let terms = (0..modes)
            .map(|_| {
                let k = [0; 3].map(|_: i32| rng.gen_range(-2..=2) as f64);
                (
                    amplitude * rng.gen_range(-1.0..1.0),
                    k,
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(a, k, p)| a * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + p).sin())
            .sum()
    }

    pub fn field(&self, grid: &ChartGrid) -> ScalarField {
        ScalarField::from_fn(grid, |x| self.eval(x))
    }
}

/// Raised-cosine bump `Π cos^p(π s_i / 2)` of half-width `radius` around
/// `center`, with distances wrapped on periodic axes. It is `C^{p−1}`.
#[derive(Clone, Copy, Debug)]
pub struct Bump {
    pub center: [f64; 3],
    pub radius: [f64; 3],
    /// Axes the bump does not depend on.
    pub flat: [bool; 3],
    pub power: i32,
}

impl Bump {
    /// A bump of half-width a quarter of each extent, centred uniformly at random
    /// on periodic axes and inside the central half of bounded ones.
    pub fn random(rng: &mut ProbeRng, grid: &ChartGrid) -> Self {
        let (o, e) = (grid.origin(), grid.extents());
        let mut center = [0.0; 3];
        for a in 0..3 {
            center[a] = if grid.topology(a) == gvlab_core::Topology::Periodic {
                o[a] + rng.gen_range(0.0..e[a])
            } else {
                o[a] + e[a] * rng.gen_range(0.4..0.6)
            };
        }
        Self {
            center,
            radius: [0.25 * e[0], 0.25 * e[1], 0.25 * e[2]],
            flat: [false; 3],
            power: 4,
        }
    }

    pub fn with_power(mut self, power: i32) -> Self {
        self.power = power;
        self
    }

    pub fn independent_of(mut self, axis: usize) -> Self {
        self.flat[axis] = true;
        self
    }

    pub fn eval(&self, grid: &ChartGrid, x: [f64; 3]) -> f64 {
        let e = grid.extents();
        let mut v = 1.0;
        for a in 0..3 {
            if self.flat[a] {
                continue;
            }
            let mut dx = x[a] - self.center[a];
            if grid.topology(a) == gvlab_core::Topology::Periodic {
                dx -= e[a] * (dx / e[a]).round();
            }
            let s = dx / self.radius[a];
            if s.abs() >= 1.0 {
                return 0.0;
            }
            v *= (0.5 * std::f64::consts::PI * s).cos().powi(self.power);
        }
        v
    }

    pub fn field(&self, grid: &ChartGrid) -> ScalarField {
        let g = *grid;
        ScalarField::from_fn(grid, move |x| self.eval(&g, x))
    }
}

pub fn random_vector(rng: &mut ProbeRng, grid: &ChartGrid, amplitude: f64) -> VectorField {
    let c = [0; 3].map(|_: i32| TrigSum::random(rng, 3, amplitude));
    VectorField::from_fn(grid, |x| [c[0].eval(x), c[1].eval(x), c[2].eval(x)])
}

pub fn random_one_form(rng: &mut ProbeRng, grid: &ChartGrid, amplitude: f64) -> KForm {
    let c = [0; 3].map(|_: i32| TrigSum::random(rng, 3, amplitude));
    KForm::from_fn(grid, 1, |x| [c[0].eval(x), c[1].eval(x), c[2].eval(x)])
}

/// `Y − ω(Y) T`, which lies in `ker ω`.
pub fn shift_projection(pair: &DistributionPair, y: &VectorField) -> VectorField {
    let w = eval1(pair.omega(), y);
    let t = pair.t();
    y.map_points(|i, v| {
        let (s, tt) = (w.values()[i], t.at(i));
        [v[0] - s * tt[0], v[1] - s * tt[1], v[2] - s * tt[2]]
    })
}

/// `ν − ν(T) ω`, which annihilates `T`.
pub fn tilt_projection(pair: &DistributionPair, nu: &KForm) -> KForm {
    let s = eval1(nu, pair.t());
    nu.sub(&pair.omega().scale_by(&s)).expect("1-forms on one grid")
}

pub const KINDS: [&str; 3] = ["scale", "shift", "tilt"];

/// A random variation of the given kind with first and second order generators.
pub fn random_variation(rng: &mut ProbeRng, pair: &DistributionPair, kind: &str, amplitude: f64) -> Variation {
    let grid = *pair.grid();
    match kind {
        "scale" => Variation::Scale {
            f: TrigSum::random(rng, 4, amplitude).field(&grid),
            f2: Some(TrigSum::random(rng, 4, amplitude).field(&grid)),
        },
        "shift" => Variation::Shift {
            x: shift_projection(pair, &random_vector(rng, &grid, amplitude)),
            x2: Some(shift_projection(pair, &random_vector(rng, &grid, amplitude))),
        },
        "tilt" => Variation::Tilt {
            mu: tilt_projection(pair, &random_one_form(rng, &grid, amplitude)),
            mu2: Some(tilt_projection(pair, &random_one_form(rng, &grid, amplitude))),
        },
        other => panic!("unknown variation kind `{other}`"),
    }
}

/// A random symmetric tensor with smooth entries, multiplied by a random `C⁷` bump.
pub fn random_bump_symmetric(rng: &mut ProbeRng, grid: &ChartGrid, amplitude: f64) -> SymmetricField {
    let bump = Bump::random(rng, grid).with_power(8);
    let entries: Vec<TrigSum> = (0..6).map(|_| TrigSum::random(rng, 2, amplitude)).collect();
    let base: Vec<f64> = (0..6).map(|_| amplitude * rng.gen_range(-1.0..1.0)).collect();
    let g = *grid;
    SymmetricField::from_fn(grid, move |x| {
        let b = bump.eval(&g, x);
        let e = |k: usize| b * (base[k] + entries[k].eval(x));
        [[e(0), e(1), e(2)], [e(1), e(3), e(4)], [e(2), e(4), e(5)]]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gvlab_core::scenarios::find;

    #[test]
    fn same_seed_same_field() {
        let g = ChartGrid::torus([8; 3]).unwrap();
        let a = TrigSum::random(&mut rng(7), 4, 1.0).field(&g);
        let b = TrigSum::random(&mut rng(7), 4, 1.0).field(&g);
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn projections_are_admissible() {
        let pair = find("tilted").unwrap().pair([12; 3]).unwrap();
        let mut r = rng(3);
        for kind in KINDS {
            // Variation::at validates the generators
            let v = random_variation(&mut r, &pair, kind, 0.3);
            v.at(&pair, 0.1).unwrap();
        }
    }

    #[test]
    fn bump_wraps_and_vanishes_far_away() {
        let g = ChartGrid::torus([16; 3]).unwrap();
        let b = Bump {
            center: [0.1, 3.0, 3.0],
            radius: [1.0; 3],
            flat: [false; 3],
            power: 4,
        };
        assert!(b.eval(&g, [std::f64::consts::TAU - 0.1, 3.0, 3.0]) > 0.5);
        assert_eq!(b.eval(&g, [3.0, 3.0, 3.0]), 0.0);
        assert_eq!(b.independent_of(2).eval(&g, [0.1, 3.0, 0.0]), 1.0);
    }
}
