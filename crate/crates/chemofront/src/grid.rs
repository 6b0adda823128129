//! Uniform spatial grids, sampled profiles, and far-field tail descriptors.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Description of a uniform spatial grid by its endpoints and spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub x0: T,
    pub x_end: T,
    pub dx: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(x0: T, x_end: T, dx: T) -> Result<Self> {
        if !(dx > T::zero()) || !dx.is_finite() {
            return Err(Error::Shape(format!("dx must be positive, got {dx}")));
        }
        if !(x_end > x0) {
            return Err(Error::Shape(format!(
                "grid must have positive extent, got [{x0}, {x_end}]"
            )));
        }
        Ok(Self { x0, x_end, dx })
    }

    /// Number of nodes, endpoints included.
    pub fn n(&self) -> usize {
        let steps = ((self.x_end - self.x0) / self.dx).round();
        steps.as_f64() as usize + 1
    }

    pub fn profile_from(&self, f: impl Fn(T) -> T) -> Result<GridProfile<T>> {
        GridProfile::from_fn(self.x0, self.dx, self.n(), f)
    }
}

/// A scalar field sampled on a uniform grid.
///
/// Invariants: at least 16 nodes, positive spacing, all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProfile<T> {
    x0: T,
    dx: T,
    values: Vec<T>,
}

pub const MIN_NODES: usize = 16;

impl<T: Real> GridProfile<T> {
    pub fn new(x0: T, dx: T, values: Vec<T>) -> Result<Self> {
        if values.len() < MIN_NODES {
            return Err(Error::Shape(format!(
                "profile needs at least {MIN_NODES} nodes, got {}",
                values.len()
            )));
        }
        if !(dx > T::zero()) || !dx.is_finite() || !x0.is_finite() {
            return Err(Error::Shape("grid origin and spacing must be finite, dx > 0".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("profile contains non-finite values".into()));
        }
        Ok(Self { x0, dx, values })
    }

    pub fn from_fn(x0: T, dx: T, n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        let values = (0..n).map(|i| f(x0 + dx * T::of(i as f64))).collect();
        Self::new(x0, dx, values)
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn x(&self, i: usize) -> T {
        self.x0 + self.dx * T::of(i as f64)
    }

    pub fn x_end(&self) -> T {
        self.x(self.n() - 1)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Replaces the stored values, keeping the grid.  Length must match.
    pub fn set_values(&mut self, values: Vec<T>) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::Shape("value count does not match grid".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence("profile update contains non-finite values".into()));
        }
        self.values = values;
        Ok(())
    }

    pub fn iter_points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.x(i), v))
    }

    /// True when two profiles live on the same grid (within rounding).
    pub fn same_grid(&self, other: &Self) -> bool {
        let tol = self.dx * T::of(1e-9);
        self.values.len() == other.values.len()
            && (self.x0 - other.x0).abs() <= tol
            && (self.dx - other.dx).abs() <= tol
    }

    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Sup-norm of the difference; errors if the grids differ.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        if !self.same_grid(other) {
            return Err(Error::Shape("profiles live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs())))
    }

    /// Piecewise-linear evaluation, clamped to the boundary values outside
    /// the grid.
    pub fn interp(&self, x: T) -> T {
        let n = self.values.len();
        let s = (x - self.x0) / self.dx;
        if s <= T::zero() {
            return self.values[0];
        }
        let last = T::of((n - 1) as f64);
        if s >= last {
            return self.values[n - 1];
        }
        let i = s.floor().as_f64() as usize;
        let frac = s - T::of(i as f64);
        self.values[i] + (self.values[i + 1] - self.values[i]) * frac
    }

    /// Nearest node index for a coordinate inside the grid.
    pub fn index_of(&self, x: T) -> usize {
        let s = ((x - self.x0) / self.dx).round().as_f64();
        (s.max(0.0) as usize).min(self.values.len() - 1)
    }
}

/// Left far-field behaviour of a profile on `(-inf, x0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeftTail<T> {
    /// `u(y) = value` for `y <= x0`.
    Constant(T),
    /// `u(y) = amplitude * exp(-rate * y)`, growing leftward for `rate > 0`.
    Exponential { amplitude: T, rate: T },
}

/// Right far-field behaviour of a profile on `[x_end, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RightTail<T> {
    /// `u(y) = amplitude * exp(-rate * y)` with `rate >= 0`; rate 0 is a
    /// constant tail.
    Exponential { amplitude: T, rate: T },
    Zero,
}

/// Analytic extension of a gridded profile beyond both grid ends, used by the
/// screened-Poisson solver so that whole-line convolutions are well defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSpec<T> {
    pub left: LeftTail<T>,
    pub right: RightTail<T>,
}

impl<T: Real> TailSpec<T> {
    pub fn new(left: LeftTail<T>, right: RightTail<T>) -> Self {
        Self { left, right }
    }

    /// Constant left plateau matched to `u[0]`, zero right tail.
    pub fn plateau_left_zero_right(u: &GridProfile<T>) -> Self {
        Self {
            left: LeftTail::Constant(u.values()[0]),
            right: RightTail::Zero,
        }
    }

    /// Constant left plateau matched to `u[0]`, exponential right tail with
    /// the given decay rate fitted to the last node.
    pub fn plateau_left_exponential_right(u: &GridProfile<T>, rate: T) -> Self {
        let x_end = u.x_end();
        let last = u.values()[u.n() - 1];
        Self {
            left: LeftTail::Constant(u.values()[0]),
            right: RightTail::Exponential {
                amplitude: last * (rate * x_end).exp(),
                rate,
            },
        }
    }

    /// Pure exponential `amplitude * exp(-rate * x)` on both sides.
    pub fn exponential_both(amplitude: T, rate: T) -> Self {
        Self {
            left: LeftTail::Exponential { amplitude, rate },
            right: RightTail::Exponential { amplitude, rate },
        }
    }

    /// Checks the tails against the boundary values of `u`.
    ///
    /// Each tail must match the corresponding boundary node within 5%
    /// relative to the profile scale.
    pub fn check_consistency(&self, u: &GridProfile<T>) -> Result<()> {
        let scale = u.sup_norm().max(T::of(f64::MIN_POSITIVE));
        let rel = T::of(0.05);
        let first = u.values()[0];
        let last = u.values()[u.n() - 1];
        let left_val = match self.left {
            LeftTail::Constant(c) => c,
            LeftTail::Exponential { amplitude, rate } => amplitude * (-rate * u.x0()).exp(),
        };
        // Boundary values far below the profile scale are compared
        // absolutely: a sub-1e-5-of-scale mismatch cannot pollute the field.
        let left_scale = first.abs().max(scale * T::of(1e-4));
        if (left_val - first).abs() > rel * left_scale {
            return Err(Error::TailMismatch(format!(
                "left tail value {left_val} vs boundary {first}"
            )));
        }
        match self.right {
            RightTail::Zero => {
                if last.abs() > rel * scale {
                    return Err(Error::TailMismatch(format!(
                        "zero right tail but boundary value {last}"
                    )));
                }
            }
            RightTail::Exponential { amplitude, rate } => {
                let v = amplitude * (-rate * u.x_end()).exp();
                let right_scale = last.abs().max(scale * T::of(1e-4));
                if (v - last).abs() > rel * right_scale {
                    return Err(Error::TailMismatch(format!(
                        "right tail value {v} vs boundary {last}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Uniform time grid `t0 + k*dt`, `k = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    pub t0: T,
    pub dt: T,
    pub n: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t0: T, dt: T, n: usize) -> Result<Self> {
        if !(dt > T::zero()) || n < 2 {
            return Err(Error::Shape("time grid needs dt > 0 and at least 2 nodes".into()));
        }
        Ok(Self { t0, dt, n })
    }

    pub fn t(&self, i: usize) -> T {
        self.t0 + self.dt * T::of(i as f64)
    }

    pub fn t_end(&self) -> T {
        self.t(self.n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_grids() {
        assert!(GridProfile::new(0.0f64, 0.1, vec![0.0; 8]).is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        let mut v = vec![1.0f64; 20];
        v[3] = f64::NAN;
        assert!(GridProfile::new(0.0, 0.1, v).is_err());
    }

    #[test]
    fn grid_spec_node_count_round_trips() {
        let spec = GridSpec::new(-60.0f64, 60.0, 0.05).unwrap();
        assert_eq!(spec.n(), 2401);
        let p = spec.profile_from(|x| x).unwrap();
        assert_eq!(p.n(), 2401);
        assert!((p.x_end() - 60.0).abs() < 1e-12);
    }

    #[test]
    fn interp_is_linear_and_clamped() {
        let p = GridProfile::from_fn(0.0f64, 0.5, 16, |x| 2.0 * x).unwrap();
        assert!((p.interp(1.25) - 2.5).abs() < 1e-14);
        assert_eq!(p.interp(-3.0), 0.0);
        assert_eq!(p.interp(99.0), 15.0);
    }

    #[test]
    fn tail_consistency_accepts_matching_tails() {
        let p = GridProfile::from_fn(-2.0f64, 0.25, 33, |x| (-0.5 * x).exp()).unwrap();
        let tails = TailSpec::exponential_both(1.0, 0.5);
        assert!(tails.check_consistency(&p).is_ok());
    }

    #[test]
    fn tail_consistency_rejects_mismatch() {
        let p = GridProfile::from_fn(-2.0f64, 0.25, 33, |x| (-0.5 * x).exp()).unwrap();
        let tails = TailSpec::new(LeftTail::Constant(5.0), RightTail::Zero);
        assert!(tails.check_consistency(&p).is_err());
    }
}
