//! Principal-branch Lambert-W evaluation.
//!
//! [`lambert_w0`] inverts `w e^w = x` for `x >= -1/e` with Halley's
//! iteration. The closed-form solver never materialises its (potentially
//! overflowing) argument `exp(y)`; it calls [`lambert_w0_of_exp`], which
//! solves `w + ln w = y` directly and stays finite for any real `y`. The two
//! routes agree wherever `exp(y)` is representable.

use thiserror::Error;

const MAX_ITERATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LambertError {
    #[error("argument {x} is below -1/e, outside the principal branch domain")]
    BelowBranchPoint { x: f64 },
    #[error("no convergence after {MAX_ITERATIONS} iterations for argument {x}")]
    NoConvergence { x: f64 },
}

/// A checked principal-branch argument, `value >= -1/e` (with a one-ulp-scale
/// slack for arguments computed by subtraction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WArg(f64);

impl WArg {
    pub fn new(value: f64) -> Result<Self, LambertError> {
        let branch = neg_inv_e();
        if value.is_nan() || value < branch - 1e-15 {
            return Err(LambertError::BelowBranchPoint { x: value });
        }
        Ok(Self(value.max(branch)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn neg_inv_e() -> f64 {
    -(-1.0f64).exp()
}

/// Principal branch `W(x)`: the solution `w >= -1` of `w e^w = x`.
///
/// The residual `|w e^w - x|` is driven below `1e-13 max(|x|, eps)`, well
/// inside the 1e-12 relative round-trip contract.
pub fn lambert_w0(x: f64) -> Result<f64, LambertError> {
    let x = WArg::new(x)?.value();
    if x == 0.0 {
        return Ok(0.0);
    }

    let mut w = initial_guess(x);
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= 1e-13 * x.abs().max(f64::EPSILON) {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            // Exactly at the branch point.
            return Ok(w);
        }
        // Halley step for f(w) = w e^w - x.
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        if !step.is_finite() {
            break;
        }
        w -= step;
        if w < -1.0 {
            w = -1.0;
        }
    }

    // One last residual check: Halley may stall a hair above the target on
    // arguments near the branch point while already being as good as f64 gets.
    let f = w * w.exp() - x;
    if f.abs() <= 1e-12 * x.abs().max(f64::EPSILON) {
        Ok(w)
    } else {
        Err(LambertError::NoConvergence { x })
    }
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.25 {
        // Series around the branch point w = -1.
        let p = (2.0 * (1.0 + std::f64::consts::E * x)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// `W(exp(y))` computed without forming `exp(y)`: the solution `w > 0` of
/// `w + ln w = y`.
///
/// Newton's iteration on `h(w) = w + ln w - y` converges for any real `y`
/// (`h` is strictly increasing and concave in `w`). For `y` below the f64
/// underflow threshold the result is `exp(y)` itself, which is exact to
/// double precision there.
pub fn lambert_w0_of_exp(y: f64) -> f64 {
    if y.is_nan() {
        return f64::NAN;
    }
    if y < -700.0 {
        // w = e^y (1 - e^y + ...) and e^y < 1e-304: the correction is far
        // below one ulp.
        return y.exp();
    }

    let mut w = if y < 3.0 {
        y.exp()
    } else {
        let l = y.ln();
        y - l + l / y
    };

    let tol = 1e-13 * y.abs().max(1.0);
    for _ in 0..MAX_ITERATIONS {
        let h = w + w.ln() - y;
        if h.abs() <= tol {
            break;
        }
        let next = w - h * w / (w + 1.0);
        w = if next > 0.0 { next } else { w * 0.5 };
    }
    w
}
