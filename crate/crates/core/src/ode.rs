use num_complex::Complex;

use crate::{MonomialField, Real, Result};

/// State of a first-order system that RK4 can advance.
pub(crate) trait OdeState<T>: Sized {
    /// `self + h * d`
    fn add_scaled(&self, h: T, d: &Self) -> Self;
    fn is_finite(&self) -> bool;
}

impl<T: Real> OdeState<T> for Vec<MonomialField<T>> {
    fn add_scaled(&self, h: T, d: &Self) -> Self {
        self.iter().zip(d).map(|(a, b)| a + &b.scale_real(h)).collect()
    }

    fn is_finite(&self) -> bool {
        self.iter().all(MonomialField::is_finite)
    }
}

impl<T: Real> OdeState<T> for Vec<Complex<T>> {
    fn add_scaled(&self, h: T, d: &Self) -> Self {
        self.iter().zip(d).map(|(a, b)| a + b * h).collect()
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

pub(crate) fn rk4_step<T, S, R>(y: &S, t: T, h: T, rhs: &mut R) -> Result<S>
where
    T: Real,
    S: OdeState<T>,
    R: FnMut(T, &S) -> Result<S>,
{
    let half = h / T::lit(2.0);
    let k1 = rhs(t, y)?;
    let k2 = rhs(t + half, &y.add_scaled(half, &k1))?;
    let k3 = rhs(t + half, &y.add_scaled(half, &k2))?;
    let k4 = rhs(t + h, &y.add_scaled(h, &k3))?;
    let sixth = h / T::lit(6.0);
    let third = h / T::lit(3.0);
    Ok(y.add_scaled(sixth, &k1).add_scaled(third, &k2).add_scaled(third, &k3).add_scaled(sixth, &k4))
}

/// Number of equal steps of size at most `dt` covering `span`, and their size.
pub(crate) fn step_plan<T: Real>(span: T, dt: T) -> (usize, T) {
    if span <= T::zero() {
        return (0, T::zero());
    }
    let steps = (span / dt - T::lit(1e-9)).ceil().max(T::one());
    let count = steps.to_usize().unwrap_or(usize::MAX);
    (count, span / steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_fourth_order() {
        let run = |dt: f64| {
            let (steps, h) = step_plan(1.0, dt);
            let mut y = vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
            let mut rhs = |_t: f64, y: &Vec<Complex<f64>>| Ok(vec![y[1], -y[0]]);
            for i in 0..steps {
                y = rk4_step(&y, i as f64 * h, h, &mut rhs).unwrap();
            }
            (y[0].re - 1f64.cos()).abs()
        };
        let order = (run(0.02) / run(0.01)).log2();
        assert!(order > 3.9 && order < 4.1, "{order}");
    }

    #[test]
    fn plan_lands_on_end() {
        let (n, h) = step_plan(1.0, 0.3);
        assert_eq!(n, 4);
        assert!((h * n as f64 - 1.0).abs() < 1e-15);
        assert_eq!(step_plan(0.0, 0.1).0, 0);
        assert_eq!(step_plan(1.0, 0.25).0, 4);
    }
}
