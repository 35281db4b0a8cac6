//! Registry of weight functions for weighted partial sums.
//!
//! Members carry a declared Lipschitz constant; the constant is metadata,
//! not verified.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightFn<T> {
    /// `g(x) = c`.
    Constant(T),
    /// `g(x) = x`.
    Linear,
    /// Piecewise-linear interpolation through `(x, y)` knots with ascending
    /// `x`; clamped outside the knot range.
    PiecewiseLinear { knots: Vec<(T, T)> },
}

impl<T: Real> WeightFn<T> {
    pub fn piecewise_linear(knots: Vec<(T, T)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidParameter { name: "knots", reason: "need >= 2 points" });
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidParameter {
                name: "knots",
                reason: "x coordinates must be strictly ascending",
            });
        }
        Ok(WeightFn::PiecewiseLinear { knots })
    }

    pub fn eval(&self, x: T) -> T {
        match self {
            WeightFn::Constant(c) => *c,
            WeightFn::Linear => x,
            WeightFn::PiecewiseLinear { knots } => {
                if x <= knots[0].0 {
                    return knots[0].1;
                }
                if x >= knots[knots.len() - 1].0 {
                    return knots[knots.len() - 1].1;
                }
                let mut i = 0;
                while knots[i + 1].0 < x {
                    i += 1;
                }
                let (x0, y0) = knots[i];
                let (x1, y1) = knots[i + 1];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Declared Lipschitz constant.
    pub fn lipschitz(&self) -> T {
        match self {
            WeightFn::Constant(_) => T::zero(),
            WeightFn::Linear => T::one(),
            WeightFn::PiecewiseLinear { knots } => {
                let mut m = T::zero();
                for w in knots.windows(2) {
                    let s = ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs();
                    if s > m {
                        m = s;
                    }
                }
                m
            }
        }
    }
}

impl<T: Real> std::fmt::Display for WeightFn<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightFn::Constant(c) => write!(f, "constant({c})"),
            WeightFn::Linear => write!(f, "linear"),
            WeightFn::PiecewiseLinear { knots } => {
                write!(f, "pwl(")?;
                for (i, (x, y)) in knots.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{x}:{y}")?;
                }
                write!(f, ")")
            }
        }
    }
}
