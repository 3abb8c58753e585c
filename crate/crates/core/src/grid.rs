//! Structured 3D grids and the sampled field types that live on them.
//!
//! Points are stored with the last axis fastest: `idx = (i0 * n1 + i1) * n2 + i2`.
//! Periodic axes sample `[origin, origin + extent)` with spacing `extent / n`;
//! bounded axes sample `[origin, origin + extent]` with spacing `extent / (n - 1)`.

use std::f64::consts::TAU;

use crate::error::{GvError, Result};

/// Smallest point count per axis that supports the 5-point stencils.
pub const MIN_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    Periodic,
    Bounded,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartGrid {
    sizes: [usize; 3],
    origin: [f64; 3],
    extents: [f64; 3],
    topology: [Topology; 3],
}

impl ChartGrid {
    pub fn new(
        sizes: [usize; 3],
        origin: [f64; 3],
        extents: [f64; 3],
        topology: [Topology; 3],
    ) -> Result<Self> {
        for a in 0..3 {
            if sizes[a] < MIN_POINTS {
                return Err(GvError::InvalidGrid(format!(
                    "axis {a} has {} points, need at least {MIN_POINTS}",
                    sizes[a]
                )));
            }
            if !(extents[a] > 0.0 && extents[a].is_finite()) || !origin[a].is_finite() {
                return Err(GvError::InvalidGrid(format!(
                    "axis {a} has extent {} and origin {}",
                    extents[a], origin[a]
                )));
            }
        }
        Ok(Self {
            sizes,
            origin,
            extents,
            topology,
        })
    }

    /// The flat torus `[0, 2π)³`.
    pub fn torus(sizes: [usize; 3]) -> Result<Self> {
        Self::new(sizes, [0.0; 3], [TAU; 3], [Topology::Periodic; 3])
    }

    /// A bounded coordinate box `[lo, hi]` on every axis.
    pub fn chart(sizes: [usize; 3], lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        let extents = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
        Self::new(sizes, lo, extents, [Topology::Bounded; 3])
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.sizes
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn extents(&self) -> [f64; 3] {
        self.extents
    }

    pub fn topology(&self, axis: usize) -> Topology {
        self.topology[axis]
    }

    pub fn is_periodic(&self) -> bool {
        self.topology.iter().all(|t| *t == Topology::Periodic)
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        match self.topology[axis] {
            Topology::Periodic => self.extents[axis] / self.sizes[axis] as f64,
            Topology::Bounded => self.extents[axis] / (self.sizes[axis] - 1) as f64,
        }
    }

    /// Largest spacing over the three axes.
    pub fn max_spacing(&self) -> f64 {
        (0..3).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.sizes[1] * self.sizes[2],
            1 => self.sizes[2],
            _ => 1,
        }
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.sizes[1] + i[1]) * self.sizes[2] + i[2]
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let i2 = idx % self.sizes[2];
        let rest = idx / self.sizes[2];
        [rest / self.sizes[1], rest % self.sizes[1], i2]
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing(axis)
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let i = self.unravel(idx);
        [self.coord(0, i[0]), self.coord(1, i[1]), self.coord(2, i[2])]
    }

    /// Quadrature weight of one point along `axis`: rectangle rule on periodic
    /// axes, trapezoid on bounded ones.
    pub fn axis_weight(&self, axis: usize, i: usize) -> f64 {
        let h = self.spacing(axis);
        match self.topology[axis] {
            Topology::Periodic => h,
            Topology::Bounded if i == 0 || i + 1 == self.sizes[axis] => 0.5 * h,
            Topology::Bounded => h,
        }
    }

    pub fn cell_weight(&self, idx: usize) -> f64 {
        let i = self.unravel(idx);
        self.axis_weight(0, i[0]) * self.axis_weight(1, i[1]) * self.axis_weight(2, i[2])
    }

    /// True when the point is at least `margin` cells away from every bounded face.
    pub fn is_interior(&self, idx: usize, margin: usize) -> bool {
        let i = self.unravel(idx);
        (0..3).all(|a| {
            self.topology[a] == Topology::Periodic
                || (i[a] >= margin && i[a] + margin < self.sizes[a])
        })
    }

    pub fn interior_mask(&self, margin: usize) -> Vec<bool> {
        (0..self.len()).map(|idx| self.is_interior(idx, margin)).collect()
    }

    pub(crate) fn check_axis(axis: usize) -> Result<()> {
        if axis < 3 {
            Ok(())
        } else {
            Err(GvError::AxisOutOfRange(axis))
        }
    }
}

/// One real value per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: ChartGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: ChartGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GvError::InvalidGrid(format!(
                "scalar field has {} values for {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &ChartGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid: *grid, values }
    }

    pub fn constant(grid: &ChartGrid, c: f64) -> Self {
        Self {
            grid: *grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: &ChartGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    /// Max |value| over the points where `mask` is true (0 for an empty mask).
    pub fn max_abs_where(&self, mask: &[bool]) -> f64 {
        self.values
            .iter()
            .zip(mask)
            .filter(|(_, m)| **m)
            .fold(0.0f64, |acc, (v, _)| acc.max(v.abs()))
    }
}

impl std::ops::Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl std::ops::Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl std::ops::Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a * b)
    }
}

/// Contravariant vector components in the coordinate basis.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: ChartGrid,
    comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn new(grid: ChartGrid, comps: [Vec<f64>; 3]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(GvError::InvalidGrid(
                "vector component length does not match grid".into(),
            ));
        }
        if comps.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GvError::Invalid("vector field has non-finite values".into()));
        }
        Ok(Self { grid, comps })
    }

    pub(crate) fn from_parts(grid: ChartGrid, comps: [Vec<f64>; 3]) -> Self {
        Self { grid, comps }
    }

    pub fn from_fn(grid: &ChartGrid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let n = grid.len();
        let mut comps = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let v = f(grid.point(i));
            for a in 0..3 {
                comps[a][i] = v[a];
            }
        }
        Self { grid: *grid, comps }
    }

    pub fn from_scalars(x: &ScalarField, y: &ScalarField, z: &ScalarField) -> Self {
        Self {
            grid: x.grid,
            comps: [x.values.clone(), y.values.clone(), z.values.clone()],
        }
    }

    /// The constant coordinate field ∂_axis.
    pub fn coordinate(grid: &ChartGrid, axis: usize) -> Self {
        Self::from_fn(grid, |_| {
            let mut v = [0.0; 3];
            v[axis] = 1.0;
            v
        })
    }

    pub fn zeros(grid: &ChartGrid) -> Self {
        Self::from_fn(grid, |_| [0.0; 3])
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn comp(&self, a: usize) -> &[f64] {
        &self.comps[a]
    }

    pub fn comps(&self) -> &[Vec<f64>; 3] {
        &self.comps
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn component_field(&self, a: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.comps[a].clone(),
        }
    }

    pub fn map_points(&self, f: impl Fn(usize, [f64; 3]) -> [f64; 3]) -> Self {
        let n = self.grid.len();
        let mut comps = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let v = f(i, self.at(i));
            for a in 0..3 {
                comps[a][i] = v[a];
            }
        }
        Self {
            grid: self.grid,
            comps,
        }
    }

    pub fn scale_by(&self, s: &ScalarField) -> Self {
        self.map_points(|i, v| [s.values[i] * v[0], s.values[i] * v[1], s.values[i] * v[2]])
    }

    pub fn lin_comb(&self, a: f64, other: &VectorField, b: f64) -> Self {
        self.map_points(|i, v| {
            let w = other.at(i);
            [a * v[0] + b * w[0], a * v[1] + b * w[1], a * v[2] + b * w[2]]
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| max_abs(c)).fold(0.0, f64::max)
    }

    pub(crate) fn comps_mut(&mut self) -> &mut [Vec<f64>; 3] {
        &mut self.comps
    }
}

/// A differential form of degree 0..=3 in the fixed coordinate bases
/// `1`, `(dx¹, dx², dx³)`, `(dx²∧dx³, dx³∧dx¹, dx¹∧dx²)`, `dx¹∧dx²∧dx³`.
#[derive(Clone, Debug, PartialEq)]
pub struct KForm {
    grid: ChartGrid,
    degree: u8,
    comps: Vec<Vec<f64>>,
}

pub(crate) fn components_for(degree: u8) -> usize {
    match degree {
        0 | 3 => 1,
        _ => 3,
    }
}

impl KForm {
    pub fn new(grid: ChartGrid, degree: u8, comps: Vec<Vec<f64>>) -> Result<Self> {
        if degree > 3 {
            return Err(GvError::Degree {
                found: degree,
                reason: "degree must be 0..=3",
            });
        }
        if comps.len() != components_for(degree) || comps.iter().any(|c| c.len() != grid.len())
        {
            return Err(GvError::InvalidGrid(format!(
                "degree-{degree} form needs {} components of length {}",
                components_for(degree),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            degree,
            comps,
        })
    }

    pub(crate) fn from_parts(grid: ChartGrid, degree: u8, comps: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(comps.len(), components_for(degree));
        Self {
            grid,
            degree,
            comps,
        }
    }

    pub fn zero(grid: &ChartGrid, degree: u8) -> Self {
        Self::from_parts(*grid, degree, vec![vec![0.0; grid.len()]; components_for(degree)])
    }

    pub fn function(f: &ScalarField) -> Self {
        Self::from_parts(f.grid, 0, vec![f.values.clone()])
    }

    /// Top form `c dx¹∧dx²∧dx³`.
    pub fn volume(c: &ScalarField) -> Self {
        Self::from_parts(c.grid, 3, vec![c.values.clone()])
    }

    /// Builds a 1- or 2-form from a closure returning its three basis components.
    pub fn from_fn(grid: &ChartGrid, degree: u8, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        assert!(degree == 1 || degree == 2, "from_fn builds 1- and 2-forms");
        let v = VectorField::from_fn(grid, f);
        Self::from_parts(*grid, degree, v.comps.to_vec())
    }

    pub fn from_vector_comps(degree: u8, v: &VectorField) -> Self {
        assert!(degree == 1 || degree == 2);
        Self::from_parts(v.grid, degree, v.comps.to_vec())
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn comp(&self, a: usize) -> &[f64] {
        &self.comps[a]
    }

    pub fn comps(&self) -> &[Vec<f64>] {
        &self.comps
    }

    /// Components of a 1- or 2-form at one point.
    pub fn at3(&self, idx: usize) -> [f64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    /// Coefficient field of a 0- or 3-form.
    pub fn coefficient(&self) -> ScalarField {
        debug_assert!(self.comps.len() == 1);
        ScalarField {
            grid: self.grid,
            values: self.comps[0].clone(),
        }
    }

    pub fn component_field(&self, a: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.comps[a].clone(),
        }
    }

    pub fn lin_comb(&self, a: f64, other: &KForm, b: f64) -> Result<Self> {
        self.same_shape(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        Ok(Self::from_parts(self.grid, self.degree, comps))
    }

    pub fn add(&self, other: &KForm) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &KForm) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        let comps = self
            .comps
            .iter()
            .map(|x| x.iter().map(|v| c * v).collect())
            .collect();
        Self::from_parts(self.grid, self.degree, comps)
    }

    /// Pointwise product with a function.
    pub fn scale_by(&self, f: &ScalarField) -> Self {
        let comps = self
            .comps
            .iter()
            .map(|x| x.iter().zip(&f.values).map(|(v, s)| v * s).collect())
            .collect();
        Self::from_parts(self.grid, self.degree, comps)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| max_abs(c)).fold(0.0, f64::max)
    }

    pub fn max_abs_where(&self, mask: &[bool]) -> f64 {
        self.comps
            .iter()
            .map(|c| {
                c.iter()
                    .zip(mask)
                    .filter(|(_, m)| **m)
                    .fold(0.0f64, |acc, (v, _)| acc.max(v.abs()))
            })
            .fold(0.0, f64::max)
    }

    fn same_shape(&self, other: &KForm) -> Result<()> {
        if self.grid != other.grid {
            return Err(GvError::GridMismatch);
        }
        if self.degree != other.degree {
            return Err(GvError::Degree {
                found: other.degree,
                reason: "operands must have equal degree",
            });
        }
        Ok(())
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub(crate) fn same_grid(a: &ChartGrid, b: &ChartGrid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(GvError::GridMismatch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = ChartGrid::torus([8, 9, 10]).unwrap();
        for idx in [0, 1, 77, g.len() - 1] {
            assert_eq!(g.index(g.unravel(idx)), idx);
        }
        assert_eq!(g.stride(0), 90);
    }

    #[test]
    fn rejects_small_grids() {
        assert!(matches!(
            ChartGrid::torus([8, 7, 8]),
            Err(GvError::InvalidGrid(_))
        ));
        assert!(ChartGrid::chart([8, 8, 8], [0.0; 3], [1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn spacing_by_topology() {
        let t = ChartGrid::torus([16; 3]).unwrap();
        assert!((t.spacing(0) - TAU / 16.0).abs() < 1e-15);
        let c = ChartGrid::chart([11; 3], [-1.0; 3], [1.0; 3]).unwrap();
        assert!((c.spacing(2) - 0.2).abs() < 1e-15);
        assert!((c.coord(2, 10) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interior_margin() {
        let c = ChartGrid::chart([10; 3], [0.0; 3], [1.0; 3]).unwrap();
        assert!(!c.is_interior(c.index([1, 5, 5]), 2));
        assert!(c.is_interior(c.index([2, 5, 7]), 2));
        assert!(!c.is_interior(c.index([2, 5, 8]), 2));
    }

    #[test]
    fn form_shape_checked() {
        let g = ChartGrid::torus([8; 3]).unwrap();
        assert!(KForm::new(g, 2, vec![vec![0.0; g.len()]]).is_err());
        assert!(KForm::new(g, 4, vec![]).is_err());
        let a = KForm::zero(&g, 1);
        let b = KForm::zero(&g, 2);
        assert!(a.add(&b).is_err());
    }
}
