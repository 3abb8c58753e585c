//! Pinned thresholds of the named checks. `--tol-scale` multiplies upper
//! bounds and divides lower bounds.

// calculus
pub const HODGE_INVOLUTION: f64 = 1e-13;
pub const CALCULUS_ORDER: f64 = 3.5;
/// Below this (times the data scale) a residual counts as exact to rounding.
pub const ROUNDING_FLOOR: f64 = 1e-11;

// contact
pub const CONTACT_ETA: f64 = 1e-12;
pub const CONTACT_GV: f64 = 1e-8;
pub const CONTACT_FIRST_VARIATION: f64 = 1e-8;
pub const CONTACT_PROBES: usize = 10;

// eta-metric
pub const ETA_METRIC: f64 = 1e-12;
pub const COMPATIBILITY: f64 = 1e-12;
pub const ETA_METRIC_AMPLITUDE: f64 = 0.2;
/// `η = k N♭` through the metric-dependent Frenet frame (truncation level at 64³).
pub const ETA_FRAME: f64 = 1e-4;

// reinhart-wood
pub const RW_MASK_FRACTION: f64 = 0.99;
pub const RW_POINTWISE: f64 = 5e-4;
pub const RW_ORDER: f64 = 3.0;
pub const RW_GAP: f64 = 1e-6;

// variations
pub const FIRST_VARIATION_REL: f64 = 1e-7;
pub const SECOND_VARIATION_REL: f64 = 1e-5;
pub const DT_ORDER: f64 = 2.0;
/// The raw order estimate is `2 + O(dt²)` from either side; this much below 2 still counts as 2.
pub const DT_ORDER_SLACK: f64 = 0.05;
pub const DT_DEFAULT: f64 = 1e-3;
/// Step of the raw (pre-extrapolation) order estimate; compared against twice this step.
pub const DT_ORDER_STEP: f64 = 5e-3;

// rescale
pub const RESCALE: f64 = 1e-8;

// criticality
pub const LT3_QUADRATIC: f64 = 1e-6;
pub const LT3_CUBIC_REL: f64 = 0.05;
pub const GEOMETRIC_FORM: f64 = 1e-5;
/// The polynomial charts vary only in z; the face rows need z resolution.
pub const GEOMETRIC_GRID: [usize; 3] = [16, 16, 320];

// metric-el
pub const METRIC_GRADIENT_REL: f64 = 1e-4;
pub const METRIC_PROBES: usize = 10;
/// The FD-vs-pairing gap is h⁴ truncation; at 64³ it reaches 1.3e-4 relative on small pairings.
pub const METRIC_GRID: usize = 80;
pub const GEODESIC_Q: f64 = 1e-8;

// saddle
pub const SADDLE_MARGIN: f64 = 10.0;

// jacobi
pub const JACOBI_KERNEL: f64 = 1e-6;
pub const JACOBI_NEGATIVE: f64 = 1e-2;
pub const JACOBI_SYMMETRY: f64 = 1e-8;
pub const JACOBI_EIGEN_REL: f64 = 1e-5;
pub const JACOBI_SPECS: usize = 5;
/// z points on [-1, 1] for the sixth-derivative residual (h = 0.025).
pub const EIGEN_Z_POINTS: usize = 81;

// products
pub const WARPED_GV: f64 = 1e-8;
pub const WARPED_UMBILIC: f64 = 1e-6;
pub const TWISTED_TOL: f64 = 1e-5;
pub const TWISTED_SEPARATION: f64 = 10.0;
pub const TWISTED_GRID: usize = 96;
/// Curvature mask threshold relative to `max k` for the twisted family.
pub const TWISTED_K_MIN_REL: f64 = 1e-3;
pub const UMBILICITY: f64 = 1e-4;
