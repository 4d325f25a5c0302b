use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type for distances, costs and LP arithmetic: f32 or f64.
///
/// The tolerance constants are per-type because the LP feasibility and pivot
/// thresholds must sit well above the scalar's rounding noise.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Feasibility tolerance for LP constraint checks.
    const FEAS_TOL: Self;
    /// Pivot rejection threshold in the simplex solver.
    const PIVOT_TOL: Self;
    /// Relative tolerance for metric (symmetry/triangle) validation.
    const METRIC_RTOL: Self;

    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 conversion")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize conversion")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("f64 widening")
    }
}

impl Real for f64 {
    const FEAS_TOL: Self = 1e-7;
    const PIVOT_TOL: Self = 1e-10;
    const METRIC_RTOL: Self = 1e-9;
}

impl Real for f32 {
    const FEAS_TOL: Self = 1e-3;
    const PIVOT_TOL: Self = 1e-6;
    const METRIC_RTOL: Self = 1e-4;
}
