//! Forward-mode automatic differentiation for the mixed partial.
//!
//! [`HyperDual`] carries `f`, `∂f/∂x`, `∂f/∂y` and `∂²f/∂x∂y` through a
//! single evaluation, with no step size and no truncation error. [`Dual`] is
//! the one-direction analogue used by the interval theorems.
//!
//! The arithmetic is written so that swapping the roles of the two seeds
//! swaps `dx` and `dy` and leaves `dxy` bitwise unchanged: every place the
//! mixed component combines an x-part with a y-part groups the pair in a
//! commutative sub-expression.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::Serialize;

use crate::expr::{apply_func, EvalError, Expression, Func, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperDual {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxy: f64,
}

impl HyperDual {
    pub const fn new(v: f64, dx: f64, dy: f64, dxy: f64) -> Self {
        HyperDual { v, dx, dy, dxy }
    }

    /// The variable `x` at `x0`.
    pub const fn seed_x(x0: f64) -> Self {
        HyperDual::new(x0, 1.0, 0.0, 0.0)
    }

    /// The variable `y` at `y0`.
    pub const fn seed_y(y0: f64) -> Self {
        HyperDual::new(y0, 0.0, 1.0, 0.0)
    }

    pub const fn lift(c: f64) -> Self {
        HyperDual::new(c, 0.0, 0.0, 0.0)
    }

    pub fn components(&self) -> [f64; 4] {
        [self.v, self.dx, self.dy, self.dxy]
    }

    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl Add for HyperDual {
    type Output = Self;

    fn add(self, b: Self) -> Self {
        HyperDual::new(self.v + b.v, self.dx + b.dx, self.dy + b.dy, self.dxy + b.dxy)
    }
}

impl Sub for HyperDual {
    type Output = Self;

    fn sub(self, b: Self) -> Self {
        HyperDual::new(self.v - b.v, self.dx - b.dx, self.dy - b.dy, self.dxy - b.dxy)
    }
}

impl Mul for HyperDual {
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        let a = self;
        HyperDual::new(
            a.v * b.v,
            a.v * b.dx + a.dx * b.v,
            a.v * b.dy + a.dy * b.v,
            // paired so that both a·b = b·a and the dx/dy swap hold bitwise
            (a.v * b.dxy + a.dxy * b.v) + (a.dx * b.dy + a.dy * b.dx),
        )
    }
}

impl Div for HyperDual {
    type Output = Self;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, b: Self) -> Self {
        self * b.recip()
    }
}

impl Neg for HyperDual {
    type Output = Self;

    fn neg(self) -> Self {
        HyperDual::new(-self.v, -self.dx, -self.dy, -self.dxy)
    }
}

impl Scalar for HyperDual {
    fn lift(c: f64) -> Self {
        HyperDual::lift(c)
    }

    fn value(&self) -> f64 {
        self.v
    }

    fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }

    fn is_constant(&self) -> bool {
        self.dx == 0.0 && self.dy == 0.0 && self.dxy == 0.0
    }

    fn chain(self, u: f64, du: f64, d2u: f64) -> Self {
        HyperDual::new(u, du * self.dx, du * self.dy, du * self.dxy + d2u * (self.dx * self.dy))
    }
}

/// Product with a finiteness check on the result.
pub fn hyperdual_multiply(a: HyperDual, b: HyperDual) -> Result<HyperDual, EvalError> {
    let p = a * b;
    if Scalar::is_finite(&p) {
        Ok(p)
    } else {
        Err(EvalError::NonFinite { op: "*" })
    }
}

pub fn hyperdual_apply_unary(func: Func, a: HyperDual) -> Result<HyperDual, EvalError> {
    apply_func(func, a)
}

/// Value, both first partials and the mixed partial of `f` at `(x0, y0)`.
pub fn eval_hyperdual(f: &Expression, x0: f64, y0: f64) -> Result<HyperDual, EvalError> {
    f.evaluate(HyperDual::seed_x(x0), HyperDual::seed_y(y0))
}

/// Same as [`eval_hyperdual`] with the seeds placed in swapped slots, so the
/// returned `dx` is `∂f/∂y` and `dy` is `∂f/∂x`.
pub fn eval_hyperdual_swapped(f: &Expression, x0: f64, y0: f64) -> Result<HyperDual, EvalError> {
    f.evaluate(HyperDual::new(x0, 0.0, 1.0, 0.0), HyperDual::new(y0, 1.0, 0.0, 0.0))
}

/// Central-difference estimate of the same four quantities, used as an
/// independent check of [`eval_hyperdual`].
///
/// First partials use central differences with step `max(1, |x0|)·ε^{1/3}`
/// (likewise for y). The mixed partial uses the four-point cross stencil
/// with the larger step `max(1, |x0|)·ε^{1/4}`: its rounding error grows
/// like `ε|f|/(hk)`, and with the first-derivative step that alone reaches
/// 1e-5 of `f_xy` for moderate quartics. Steps are rounded to the nearest
/// power of two so `x0 ± h` is exactly representable.
pub fn finite_difference_oracle(f: &Expression, x0: f64, y0: f64) -> Result<HyperDual, EvalError> {
    let third = f64::EPSILON.cbrt();
    let quarter = f64::EPSILON.sqrt().sqrt();
    let (h, k) = (fd_step(x0, third), fd_step(y0, third));
    let e = |x: f64, y: f64| f.eval_f64(x, y);

    let v = e(x0, y0)?;
    let dx = (e(x0 + h, y0)? - e(x0 - h, y0)?) / (2.0 * h);
    let dy = (e(x0, y0 + k)? - e(x0, y0 - k)?) / (2.0 * k);
    let (h, k) = (fd_step(x0, quarter), fd_step(y0, quarter));
    let dxy = (e(x0 + h, y0 + k)? - e(x0 + h, y0 - k)? - e(x0 - h, y0 + k)? + e(x0 - h, y0 - k)?) / (4.0 * h * k);
    Ok(HyperDual::new(v, dx, dy, dxy))
}

/// Largest component-wise error of `approx` against `exact`, relative to
/// `max(1, |exact|)`.
pub fn max_relative_error(exact: &HyperDual, approx: &HyperDual) -> f64 {
    exact
        .components()
        .iter()
        .zip(approx.components())
        .map(|(e, a)| (e - a).abs() / e.abs().max(1.0))
        .fold(0.0, f64::max)
}

fn fd_step(at: f64, relative: f64) -> f64 {
    let raw = at.abs().max(1.0) * relative;
    raw.log2().round().exp2()
}

/// Value and first derivative in a single direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub const fn new(v: f64, d: f64) -> Self {
        Dual { v, d }
    }

    pub const fn variable(v: f64) -> Self {
        Dual::new(v, 1.0)
    }

    pub const fn constant(v: f64) -> Self {
        Dual::new(v, 0.0)
    }
}

impl Add for Dual {
    type Output = Self;

    fn add(self, b: Self) -> Self {
        Dual::new(self.v + b.v, self.d + b.d)
    }
}

impl Sub for Dual {
    type Output = Self;

    fn sub(self, b: Self) -> Self {
        Dual::new(self.v - b.v, self.d - b.d)
    }
}

impl Mul for Dual {
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        Dual::new(self.v * b.v, self.v * b.d + self.d * b.v)
    }
}

impl Div for Dual {
    type Output = Self;

    fn div(self, b: Self) -> Self {
        let r = 1.0 / b.v;
        self * Dual::new(r, -r * r * b.d)
    }
}

impl Neg for Dual {
    type Output = Self;

    fn neg(self) -> Self {
        Dual::new(-self.v, -self.d)
    }
}

impl Scalar for Dual {
    fn lift(c: f64) -> Self {
        Dual::constant(c)
    }

    fn value(&self) -> f64 {
        self.v
    }

    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d.is_finite()
    }

    fn is_constant(&self) -> bool {
        self.d == 0.0
    }

    fn chain(self, u: f64, du: f64, _d2u: f64) -> Self {
        Dual::new(u, du * self.d)
    }
}

/// `f(x0)` and `f'(x0)` for an expression in `x`; `y` is held at zero.
pub fn eval_dual(f: &Expression, x0: f64) -> Result<Dual, EvalError> {
    f.evaluate(Dual::variable(x0), Dual::constant(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hd(s: &str, x: f64, y: f64) -> HyperDual {
        eval_hyperdual(&Expression::parse(s).unwrap(), x, y).unwrap()
    }

    #[test]
    fn seeds() {
        assert_eq!(HyperDual::seed_x(2.0), HyperDual::new(2.0, 1.0, 0.0, 0.0));
        assert_eq!(HyperDual::seed_y(3.0), HyperDual::new(3.0, 0.0, 1.0, 0.0));
        assert_eq!(HyperDual::lift(5.0) * HyperDual::lift(3.0), HyperDual::lift(15.0));
        assert_eq!(
            HyperDual::seed_x(2.0) * HyperDual::seed_y(3.0),
            HyperDual::new(6.0, 3.0, 2.0, 1.0)
        );
    }

    #[test]
    fn multiply() {
        let a = HyperDual::new(4.0, 4.0, 0.0, 0.0);
        let b = HyperDual::new(3.0, 0.0, 1.0, 0.0);
        assert_eq!(hyperdual_multiply(a, b).unwrap(), HyperDual::new(12.0, 12.0, 4.0, 4.0));
        let c = HyperDual::new(1.5, -2.0, 0.25, 7.0);
        assert_eq!(c * HyperDual::lift(1.0), c);
        let huge = HyperDual::lift(1e300);
        assert!(hyperdual_multiply(huge, huge).is_err());
    }

    #[test]
    fn unary() {
        let a = HyperDual::new(0.0, 1.0, 1.0, 0.0);
        assert_eq!(
            hyperdual_apply_unary(Func::Sin, a).unwrap(),
            HyperDual::new(0.0, 1.0, 1.0, 0.0)
        );
        assert_eq!(
            hyperdual_apply_unary(Func::Exp, HyperDual::lift(0.0)).unwrap(),
            HyperDual::lift(1.0)
        );
        assert_eq!(
            hyperdual_apply_unary(Func::Log, HyperDual::new(1.0, 1.0, 0.0, 0.0)).unwrap(),
            HyperDual::new(0.0, 1.0, 0.0, 0.0)
        );
        assert!(hyperdual_apply_unary(Func::Log, HyperDual::lift(0.0)).is_err());
        assert!(hyperdual_apply_unary(Func::Sqrt, HyperDual::lift(-1.0)).is_err());
    }

    #[test]
    fn expression_derivatives() {
        assert_eq!(hd("x^2*y", 2.0, 3.0), HyperDual::new(12.0, 12.0, 4.0, 4.0));
        for (x, y) in [(0.3, -1.2), (5.0, 7.0), (-2.0, 0.0)] {
            assert_eq!(hd("x*y", x, y).dxy, 1.0);
        }
        let d = hd("x^2*y^2", 1.5, 1.6330);
        assert!((d.dxy - 4.0 * 1.5 * 1.6330).abs() < 1e-12);
        // quotient rule: f = x/y, f_xy = -1/y^2
        let q = hd("x/y", 2.0, 4.0);
        assert_eq!(q, HyperDual::new(0.5, 0.25, -0.125, -0.0625));
        // non-integer power: f = (x*y)^0.5, f_xy = 1/(4 sqrt(xy))
        let r = hd("(x*y)^0.5", 2.0, 8.0);
        assert!((r.dxy - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn finite_differences() {
        let f = Expression::parse("x^2*y").unwrap();
        let fd = finite_difference_oracle(&f, 2.0, 3.0).unwrap();
        assert!((fd.dxy - 4.0).abs() / 4.0 < 1e-6);
        let g = Expression::parse("x*y").unwrap();
        let fd = finite_difference_oracle(&g, 2.0, 3.0).unwrap();
        assert!((fd.dxy - 1.0).abs() < 1e-9, "{}", fd.dxy);
        let s = Expression::parse("sin(x)*sin(y)").unwrap();
        let fd = finite_difference_oracle(&s, 0.7, 0.3).unwrap();
        let exact = 0.7f64.cos() * 0.3f64.cos();
        assert!((fd.dxy - exact).abs() / exact < 1e-6);
    }

    #[test]
    fn swapped_seeds_give_same_mixed_partial() {
        let f = Expression::parse("exp(x*y^2)/(1+x^2) - sin(x)*log(y)").unwrap();
        let a = eval_hyperdual(&f, 0.7, 1.3).unwrap();
        let b = eval_hyperdual_swapped(&f, 0.7, 1.3).unwrap();
        assert_eq!(a.dxy.to_bits(), b.dxy.to_bits());
        assert_eq!(a.dx.to_bits(), b.dy.to_bits());
        assert_eq!(a.dy.to_bits(), b.dx.to_bits());
    }

    #[test]
    fn dual_derivative() {
        let f = Expression::parse("x^3/x").unwrap();
        assert_eq!(eval_dual(&f, 3.0).unwrap(), Dual::new(9.0, 6.0));
        let f = Expression::parse("log(x)").unwrap();
        assert_eq!(eval_dual(&f, 1.0).unwrap(), Dual::new(0.0, 1.0));
    }
}
