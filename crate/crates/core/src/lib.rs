//! Numerical exterior calculus for plane fields on 3-manifolds and the
//! Godbillon-Vey type functional `∫ η∧dη`, `η = ι_T dω`.

pub mod calculus;
pub mod critical;
pub mod error;
pub mod grid;
pub mod jacobi;
pub mod gv;
pub mod geometry;
pub mod metric;
pub mod scenarios;
pub mod variations;

pub use error::{GvError, Result};
pub use grid::{ChartGrid, KForm, ScalarField, Topology, VectorField};
pub use metric::MetricField;
