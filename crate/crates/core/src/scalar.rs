use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the field algebra is generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Coefficients below this magnitude are dropped after every operation.
    const PRUNE: f64;
    /// Conjugate-symmetry defect tolerated by real-valuedness checks.
    const REAL_TOL: f64;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn prune_threshold() -> Self {
        Self::lit(Self::PRUNE)
    }

    fn real_tolerance() -> Self {
        Self::lit(Self::REAL_TOL)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const PRUNE: f64 = 1e-14;
    const REAL_TOL: f64 = 1e-12;
}

// Roundoff in single precision sits near 1e-7 relative, so the absolute
// thresholds are widened accordingly.
impl Real for f32 {
    const PRUNE: f64 = 1e-6;
    const REAL_TOL: f64 = 1e-4;
}
