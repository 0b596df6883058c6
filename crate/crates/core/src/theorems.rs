//! Residual fields of the rectangular mean value theorems.
//!
//! Every theorem is recast as `R(x, y) = LHS(x, y) − RHS`, a continuous
//! scalar field on the rectangle whose zeros are the mean-value points. The
//! constant side and the corner differences are kept alongside for
//! reporting, together with a `scale = 1 + |constant side|` that all
//! tolerance checks are measured against.
//!
//! The proof devices are also built here as expressions: the auxiliary
//! `H = Δf·g − Δg·f` of the Cauchy form and the reciprocal transform
//! `F(t, s) = t·s·f(1/t, 1/s)` behind the Pompeiu form.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expression, Var};
use crate::hyperdual::{eval_dual, eval_hyperdual, HyperDual};

/// Relative threshold below which a corner difference counts as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Relative tolerance of the numerical Rolle hypothesis check.
pub const ROLLE_HYPOTHESIS_TOL: f64 = 1e-9;

/// Grid used to estimate `max |f_xy|` for the Rolle scale.
const ROLLE_SCALE_GRID: usize = 17;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoremError {
    #[error("invalid rectangle [{x1}, {x2}] x [{y1}, {y2}]: bounds must be finite with x1 < x2 and y1 < y2")]
    InvalidRectangle { x1: f64, x2: f64, y1: f64, y2: f64 },
    #[error("invalid interval [{x1}, {x2}]: bounds must be finite with x1 < x2")]
    InvalidInterval { x1: f64, x2: f64 },
    #[error("the domain must not contain points of the coordinate axes (0,·), (·,0), (0,0); got {rect}")]
    NotZeroFree { rect: Rectangle },
    #[error("the interval [{x1}, {x2}] must not contain 0")]
    IntervalContainsZero { x1: f64, x2: f64 },
    #[error(
        "Rolle hypothesis f(a,c) + f(b,d) = f(a,d) + f(b,c) fails: corner mismatch {corner_difference:e} exceeds {tolerance:e}"
    )]
    RolleHypothesis { corner_difference: f64, tolerance: f64 },
    #[error("degenerate denominator: {what} = {value:e} is zero within tolerance")]
    Degenerate { what: &'static str, value: f64 },
    #[error("{what} must be an expression in x only")]
    NotUnivariate { what: &'static str },
    #[error("{tag} requires {requirement}")]
    CaseShape { tag: TheoremTag, requirement: &'static str },
    #[error("evaluation failed at ({x}, {y}): {source}")]
    Eval {
        x: f64,
        y: f64,
        #[source]
        source: EvalError,
    },
}

fn at(x: f64, y: f64) -> impl Fn(EvalError) -> TheoremError {
    move |source| TheoremError::Eval { x, y, source }
}

/// Closed axis-aligned rectangle `[x1, x2] × [y1, y2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rectangle {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl Rectangle {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Result<Self, TheoremError> {
        let finite = [x1, x2, y1, y2].iter().all(|v| v.is_finite());
        if !finite || x1 >= x2 || y1 >= y2 {
            return Err(TheoremError::InvalidRectangle { x1, x2, y1, y2 });
        }
        Ok(Rectangle { x1, x2, y1, y2 })
    }

    /// Both axes avoided: `x1·x2 > 0` and `y1·y2 > 0`.
    pub fn is_zero_free(&self) -> bool {
        self.x1 * self.x2 > 0.0 && self.y1 * self.y2 > 0.0
    }

    pub fn require_zero_free(&self) -> Result<(), TheoremError> {
        if self.is_zero_free() {
            Ok(())
        } else {
            Err(TheoremError::NotZeroFree { rect: *self })
        }
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))
    }

    /// Strictly inside.
    pub fn contains_open(&self, x: f64, y: f64) -> bool {
        self.x1 < x && x < self.x2 && self.y1 < y && y < self.y2
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.x1, self.x2, self.y1, self.y2)
    }
}

/// `f(x2,y2) − f(x2,y1) − f(x1,y2) + f(x1,y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerDifference(pub f64);

impl CornerDifference {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// The theorems this crate knows how to instantiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremTag {
    RectRolle,
    RectMvt,
    RectCauchy,
    Pompeiu2D,
    Boggio2D,
    Pompeiu1D,
    Boggio1D,
}

impl TheoremTag {
    pub const ALL: [TheoremTag; 7] = [
        TheoremTag::RectRolle,
        TheoremTag::RectMvt,
        TheoremTag::RectCauchy,
        TheoremTag::Pompeiu2D,
        TheoremTag::Boggio2D,
        TheoremTag::Pompeiu1D,
        TheoremTag::Boggio1D,
    ];

    /// Short command-line name.
    pub fn name(self) -> &'static str {
        match self {
            TheoremTag::RectRolle => "rrt",
            TheoremTag::RectMvt => "rmvt",
            TheoremTag::RectCauchy => "rcmvt",
            TheoremTag::Pompeiu2D => "pompeiu2d",
            TheoremTag::Boggio2D => "boggio2d",
            TheoremTag::Pompeiu1D => "pompeiu1d",
            TheoremTag::Boggio1D => "boggio1d",
        }
    }

    pub fn needs_g(self) -> bool {
        matches!(
            self,
            TheoremTag::RectCauchy | TheoremTag::Boggio2D | TheoremTag::Boggio1D
        )
    }

    pub fn is_interval(self) -> bool {
        matches!(self, TheoremTag::Pompeiu1D | TheoremTag::Boggio1D)
    }

    pub fn needs_zero_free(self) -> bool {
        matches!(
            self,
            TheoremTag::Pompeiu2D | TheoremTag::Boggio2D | TheoremTag::Pompeiu1D | TheoremTag::Boggio1D
        )
    }
}

impl Serialize for TheoremTag {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("unknown theorem `{0}` (expected one of rrt, rmvt, rcmvt, pompeiu2d, boggio2d, pompeiu1d, boggio1d)")]
pub struct UnknownTheorem(pub String);

impl FromStr for TheoremTag {
    type Err = UnknownTheorem;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tag = match s.to_ascii_lowercase().as_str() {
            "rrt" | "rolle" | "rect-rolle" => TheoremTag::RectRolle,
            "rmvt" | "mvt" | "rect-mvt" => TheoremTag::RectMvt,
            "rcmvt" | "cauchy" | "rect-cauchy" => TheoremTag::RectCauchy,
            "pompeiu2d" | "pompeiu" => TheoremTag::Pompeiu2D,
            "boggio2d" | "boggio" => TheoremTag::Boggio2D,
            "pompeiu1d" => TheoremTag::Pompeiu1D,
            "boggio1d" => TheoremTag::Boggio1D,
            _ => return Err(UnknownTheorem(s.to_string())),
        };
        Ok(tag)
    }
}

/// Constants of the identity, kept for reporting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Decomposition {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
}

type PlanarFn = dyn Fn(f64, f64) -> Result<f64, EvalError> + Send + Sync;
type LinearFn = dyn Fn(f64) -> Result<f64, EvalError> + Send + Sync;

/// A theorem instance on a rectangle: its zeros are the mean-value points.
#[derive(Clone)]
pub struct ResidualField {
    pub tag: TheoremTag,
    pub rect: Rectangle,
    pub scale: f64,
    pub decomposition: Decomposition,
    residual: Arc<PlanarFn>,
}

impl fmt::Debug for ResidualField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResidualField")
            .field("tag", &self.tag)
            .field("rect", &self.rect)
            .field("scale", &self.scale)
            .field("decomposition", &self.decomposition)
            .finish_non_exhaustive()
    }
}

impl ResidualField {
    /// Field from an arbitrary residual; `tag` only labels it.
    pub fn custom<F>(tag: TheoremTag, rect: Rectangle, scale: f64, residual: F) -> Self
    where
        F: Fn(f64, f64) -> Result<f64, EvalError> + Send + Sync + 'static,
    {
        ResidualField {
            tag,
            rect,
            scale,
            decomposition: Decomposition::default(),
            residual: Arc::new(residual),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        (self.residual)(x, y)
    }
}

/// The one-dimensional analogue of [`ResidualField`] on `[x1, x2]`.
#[derive(Clone)]
pub struct IntervalResidual {
    pub tag: TheoremTag,
    pub x1: f64,
    pub x2: f64,
    pub scale: f64,
    pub rhs: f64,
    residual: Arc<LinearFn>,
}

impl fmt::Debug for IntervalResidual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntervalResidual")
            .field("tag", &self.tag)
            .field("x1", &self.x1)
            .field("x2", &self.x2)
            .field("scale", &self.scale)
            .field("rhs", &self.rhs)
            .finish_non_exhaustive()
    }
}

impl IntervalResidual {
    pub fn custom<F>(tag: TheoremTag, x1: f64, x2: f64, scale: f64, residual: F) -> Self
    where
        F: Fn(f64) -> Result<f64, EvalError> + Send + Sync + 'static,
    {
        IntervalResidual {
            tag,
            x1,
            x2,
            scale,
            rhs: 0.0,
            residual: Arc::new(residual),
        }
    }

    pub fn eval(&self, xi: f64) -> Result<f64, EvalError> {
        (self.residual)(xi)
    }
}

/// A theorem together with the functions it is applied to.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremCase {
    pub tag: TheoremTag,
    pub f: Expression,
    pub g: Option<Expression>,
}

/// Residual of either dimensionality.
#[derive(Debug, Clone)]
pub enum Instance {
    Planar(ResidualField),
    Interval(IntervalResidual),
}

impl TheoremCase {
    pub fn new(tag: TheoremTag, f: Expression, g: Option<Expression>) -> Result<Self, TheoremError> {
        match (tag.needs_g(), g.is_some()) {
            (true, false) => Err(TheoremError::CaseShape {
                tag,
                requirement: "a second function g",
            }),
            (false, true) => Err(TheoremError::CaseShape {
                tag,
                requirement: "no second function",
            }),
            _ => Ok(TheoremCase { tag, f, g }),
        }
    }

    /// Build the residual. For interval theorems only `x1, x2` of `rect`
    /// are used.
    pub fn build(&self, rect: &Rectangle) -> Result<Instance, TheoremError> {
        let g = || self.g.as_ref().expect("checked in TheoremCase::new");
        let planar = match self.tag {
            TheoremTag::RectRolle => rect_rolle_residual(&self.f, rect)?,
            TheoremTag::RectMvt => rect_mvt_residual(&self.f, rect)?,
            TheoremTag::RectCauchy => rect_cauchy_residual(&self.f, g(), rect)?,
            TheoremTag::Pompeiu2D => pompeiu2d_residual(&self.f, rect)?,
            TheoremTag::Boggio2D => boggio2d_residual(&self.f, g(), rect)?,
            TheoremTag::Pompeiu1D => {
                return Ok(Instance::Interval(pompeiu1d_residual(&self.f, rect.x1, rect.x2)?));
            }
            TheoremTag::Boggio1D => {
                return Ok(Instance::Interval(boggio1d_residual(&self.f, g(), rect.x1, rect.x2)?));
            }
        };
        Ok(Instance::Planar(planar))
    }
}

fn eval_at(f: &Expression, x: f64, y: f64) -> Result<f64, TheoremError> {
    f.eval_f64(x, y).map_err(at(x, y))
}

pub fn corner_difference(f: &Expression, r: &Rectangle) -> Result<CornerDifference, TheoremError> {
    let f22 = eval_at(f, r.x2, r.y2)?;
    let f21 = eval_at(f, r.x2, r.y1)?;
    let f12 = eval_at(f, r.x1, r.y2)?;
    let f11 = eval_at(f, r.x1, r.y1)?;
    Ok(CornerDifference(f22 - f21 - f12 + f11))
}

/// Rolle form: `R = f_xy`, valid only when the corner difference vanishes.
pub fn rect_rolle_residual(f: &Expression, r: &Rectangle) -> Result<ResidualField, TheoremError> {
    let delta = corner_difference(f, r)?.value();
    let n = ROLLE_SCALE_GRID;
    let mut max_fxy = 0.0f64;
    for j in 0..n {
        let y = r.y1 + (j as f64 + 0.5) * r.height() / n as f64;
        for i in 0..n {
            let x = r.x1 + (i as f64 + 0.5) * r.width() / n as f64;
            let d = eval_hyperdual(f, x, y).map_err(at(x, y))?;
            max_fxy = max_fxy.max(d.dxy.abs());
        }
    }
    let scale = 1.0 + max_fxy;
    let tolerance = ROLLE_HYPOTHESIS_TOL * scale;
    if delta.abs() > tolerance {
        return Err(TheoremError::RolleHypothesis {
            corner_difference: delta,
            tolerance,
        });
    }
    let f = f.clone();
    Ok(ResidualField {
        tag: TheoremTag::RectRolle,
        rect: *r,
        scale,
        decomposition: Decomposition {
            delta_f: Some(delta),
            ..Decomposition::default()
        },
        residual: Arc::new(move |x, y| Ok(eval_hyperdual(&f, x, y)?.dxy)),
    })
}

/// `R = Δf − (x2−x1)(y2−y1)·f_xy(x, y)`.
pub fn rect_mvt_residual(f: &Expression, r: &Rectangle) -> Result<ResidualField, TheoremError> {
    let delta = corner_difference(f, r)?.value();
    let area = r.area();
    let f = f.clone();
    Ok(ResidualField {
        tag: TheoremTag::RectMvt,
        rect: *r,
        scale: 1.0 + delta.abs(),
        decomposition: Decomposition {
            delta_f: Some(delta),
            rhs: Some(delta),
            ..Decomposition::default()
        },
        residual: Arc::new(move |x, y| Ok(delta - area * eval_hyperdual(&f, x, y)?.dxy)),
    })
}

/// Cross-multiplied Cauchy form `R = Δf·g_xy − Δg·f_xy`.
pub fn rect_cauchy_residual(f: &Expression, g: &Expression, r: &Rectangle) -> Result<ResidualField, TheoremError> {
    let delta_f = corner_difference(f, r)?.value();
    let delta_g = corner_difference(g, r)?.value();
    let scale = 1.0 + delta_f.abs() + delta_g.abs();
    if delta_g.abs() <= DEGENERACY_TOL * scale {
        return Err(TheoremError::Degenerate {
            what: "corner difference of g",
            value: delta_g,
        });
    }
    let (f, g) = (f.clone(), g.clone());
    Ok(ResidualField {
        tag: TheoremTag::RectCauchy,
        rect: *r,
        scale,
        decomposition: Decomposition {
            delta_f: Some(delta_f),
            delta_g: Some(delta_g),
            rhs: Some(delta_f / delta_g),
        },
        residual: Arc::new(move |x, y| {
            let fd = eval_hyperdual(&f, x, y)?;
            let gd = eval_hyperdual(&g, x, y)?;
            Ok(delta_f * gd.dxy - delta_g * fd.dxy)
        }),
    })
}

fn pompeiu_combination(d: HyperDual, xi1: f64, xi2: f64) -> f64 {
    xi1 * xi2 * d.dxy - xi1 * d.dx - xi2 * d.dy + d.v
}

/// `ξ1ξ2 f_xy − ξ1 f_x − ξ2 f_y + f` at `(ξ1, ξ2)`.
pub fn pompeiu_operator(f: &Expression, xi1: f64, xi2: f64) -> Result<f64, EvalError> {
    Ok(pompeiu_combination(eval_hyperdual(f, xi1, xi2)?, xi1, xi2))
}

/// Corner numerator `x2y2 f(x1,y1) − x2y1 f(x1,y2) − x1y2 f(x2,y1) + x1y1 f(x2,y2)`.
pub fn pompeiu_numerator(f: &Expression, r: &Rectangle) -> Result<f64, TheoremError> {
    let Rectangle { x1, x2, y1, y2 } = *r;
    Ok(
        x2 * y2 * eval_at(f, x1, y1)? - x2 * y1 * eval_at(f, x1, y2)? - x1 * y2 * eval_at(f, x2, y1)?
            + x1 * y1 * eval_at(f, x2, y2)?,
    )
}

/// Constant side of the Pompeiu identity: the corner numerator over the area.
pub fn pompeiu_rhs(f: &Expression, r: &Rectangle) -> Result<f64, TheoremError> {
    Ok(pompeiu_numerator(f, r)? / r.area())
}

/// `R = P[f](x, y) − pompeiu_rhs(f, r)` on a rectangle avoiding both axes.
pub fn pompeiu2d_residual(f: &Expression, r: &Rectangle) -> Result<ResidualField, TheoremError> {
    r.require_zero_free()?;
    let rhs = pompeiu_rhs(f, r)?;
    let delta = corner_difference(f, r)?.value();
    let f = f.clone();
    Ok(ResidualField {
        tag: TheoremTag::Pompeiu2D,
        rect: *r,
        scale: 1.0 + rhs.abs(),
        decomposition: Decomposition {
            delta_f: Some(delta),
            rhs: Some(rhs),
            ..Decomposition::default()
        },
        residual: Arc::new(move |x, y| Ok(pompeiu_operator(&f, x, y)? - rhs)),
    })
}

/// Boggio form:
/// `R = [P[g]/Δg − P[f]/Δf] − [N_g/(AΔg) − N_f/(AΔf)]`,
/// with `N` the Pompeiu corner numerators and `A` the area.
pub fn boggio2d_residual(f: &Expression, g: &Expression, r: &Rectangle) -> Result<ResidualField, TheoremError> {
    r.require_zero_free()?;
    let delta_f = corner_difference(f, r)?.value();
    let delta_g = corner_difference(g, r)?.value();
    let degeneracy = DEGENERACY_TOL * (1.0 + delta_f.abs() + delta_g.abs());
    if delta_f.abs() <= degeneracy {
        return Err(TheoremError::Degenerate {
            what: "corner difference of f",
            value: delta_f,
        });
    }
    if delta_g.abs() <= degeneracy {
        return Err(TheoremError::Degenerate {
            what: "corner difference of g",
            value: delta_g,
        });
    }
    let area = r.area();
    let rhs_g = pompeiu_numerator(g, r)? / (area * delta_g);
    let rhs_f = pompeiu_numerator(f, r)? / (area * delta_f);
    let rhs = rhs_g - rhs_f;
    let (f, g) = (f.clone(), g.clone());
    Ok(ResidualField {
        tag: TheoremTag::Boggio2D,
        rect: *r,
        scale: 1.0 + rhs_g.abs() + rhs_f.abs(),
        decomposition: Decomposition {
            delta_f: Some(delta_f),
            delta_g: Some(delta_g),
            rhs: Some(rhs),
        },
        residual: Arc::new(move |x, y| {
            let pg = pompeiu_operator(&g, x, y)?;
            let pf = pompeiu_operator(&f, x, y)?;
            Ok((pg / delta_g - pf / delta_f) - rhs)
        }),
    })
}

fn check_interval(x1: f64, x2: f64) -> Result<(), TheoremError> {
    if !(x1.is_finite() && x2.is_finite() && x1 < x2) {
        return Err(TheoremError::InvalidInterval { x1, x2 });
    }
    if x1 * x2 <= 0.0 {
        return Err(TheoremError::IntervalContainsZero { x1, x2 });
    }
    Ok(())
}

fn require_univariate(f: &Expression, what: &'static str) -> Result<(), TheoremError> {
    if f.uses(Var::Y) {
        Err(TheoremError::NotUnivariate { what })
    } else {
        Ok(())
    }
}

/// `R(ξ) = [f(ξ) − ξ f'(ξ)] − [x1 f(x2) − x2 f(x1)]/(x1 − x2)`.
pub fn pompeiu1d_residual(f: &Expression, x1: f64, x2: f64) -> Result<IntervalResidual, TheoremError> {
    check_interval(x1, x2)?;
    require_univariate(f, "f")?;
    let rhs = (x1 * eval_at(f, x2, 0.0)? - x2 * eval_at(f, x1, 0.0)?) / (x1 - x2);
    let f = f.clone();
    Ok(IntervalResidual {
        tag: TheoremTag::Pompeiu1D,
        x1,
        x2,
        scale: 1.0 + rhs.abs(),
        rhs,
        residual: Arc::new(move |xi| {
            let d = eval_dual(&f, xi)?;
            Ok((d.v - xi * d.d) - rhs)
        }),
    })
}

/// `R(ξ) = [f(ξ) − (g(ξ)/g'(ξ)) f'(ξ)] − [g(x1)f(x2) − g(x2)f(x1)]/(g(x1) − g(x2))`.
///
/// The denominator is ordered `g(x1) − g(x2)` so that `g(x) = x` gives
/// exactly [`pompeiu1d_residual`].
pub fn boggio1d_residual(f: &Expression, g: &Expression, x1: f64, x2: f64) -> Result<IntervalResidual, TheoremError> {
    check_interval(x1, x2)?;
    require_univariate(f, "f")?;
    require_univariate(g, "g")?;
    let (g1, g2) = (eval_at(g, x1, 0.0)?, eval_at(g, x2, 0.0)?);
    let (f1, f2) = (eval_at(f, x1, 0.0)?, eval_at(f, x2, 0.0)?);
    let denom = g1 - g2;
    if denom.abs() <= DEGENERACY_TOL * (1.0 + g1.abs() + g2.abs()) {
        return Err(TheoremError::Degenerate {
            what: "g(x1) - g(x2)",
            value: denom,
        });
    }
    let rhs = (g1 * f2 - g2 * f1) / denom;
    let (f, g) = (f.clone(), g.clone());
    Ok(IntervalResidual {
        tag: TheoremTag::Boggio1D,
        x1,
        x2,
        scale: 1.0 + rhs.abs(),
        rhs,
        residual: Arc::new(move |xi| {
            let fd = eval_dual(&f, xi)?;
            let gd = eval_dual(&g, xi)?;
            if gd.d == 0.0 {
                return Err(EvalError::NonFinite { op: "g/g'" });
            }
            Ok((fd.v - (gd.v / gd.d) * fd.d) - rhs)
        }),
    })
}

/// `H(x, y) = Δf·g(x, y) − Δg·f(x, y)` with both corner differences
/// embedded as constants. `H` satisfies the Rolle corner identity on `r`.
pub fn build_cauchy_auxiliary(f: &Expression, g: &Expression, r: &Rectangle) -> Result<Expression, TheoremError> {
    let delta_f = corner_difference(f, r)?.value();
    let delta_g = corner_difference(g, r)?.value();
    Ok(Expression::constant(delta_f) * g.clone() - Expression::constant(delta_g) * f.clone())
}

/// `F(x, y) = x·y·f(1/x, 1/y)`.
pub fn build_reciprocal_transform(f: &Expression) -> Expression {
    let one = || Expression::constant(1.0);
    let inner = f.substitute(&(one() / Expression::x()), &(one() / Expression::y()));
    Expression::x() * Expression::y() * inner
}

/// `[1/x2, 1/x1] × [1/y2, 1/y1]`, the domain of the reciprocal transform.
pub fn reciprocal_rectangle(r: &Rectangle) -> Result<Rectangle, TheoremError> {
    r.require_zero_free()?;
    Rectangle::new(1.0 / r.x2, 1.0 / r.x1, 1.0 / r.y2, 1.0 / r.y1)
}

/// Mixed partial of the reciprocal transform at `(t, s)`, computed two ways:
/// directly by differentiating `F`, and from the expansion
/// `(1/(ts)) f_xy − (1/t) f_x − (1/s) f_y + f` at `(1/t, 1/s)`.
pub fn fts_expansion_check(f: &Expression, t: f64, s: f64) -> Result<(f64, f64), TheoremError> {
    if t == 0.0 || s == 0.0 {
        return Err(TheoremError::NotZeroFree {
            rect: Rectangle {
                x1: t,
                x2: t,
                y1: s,
                y2: s,
            },
        });
    }
    let transform = build_reciprocal_transform(f);
    let left = eval_hyperdual(&transform, t, s).map_err(at(t, s))?.dxy;
    let (u, w) = (1.0 / t, 1.0 / s);
    let d = eval_hyperdual(f, u, w).map_err(at(u, w))?;
    let right = (1.0 / (t * s)) * d.dxy - (1.0 / t) * d.dx - (1.0 / s) * d.dy + d.v;
    Ok((left, right))
}
