//! Locating a zero of a residual field in the open domain.
//!
//! The theorems only promise that a zero exists; since the residual is one
//! equation in two unknowns its zero set is generically a curve and any
//! point on it will do. The search is:
//!
//! 1. sample `R` at cell centres of an `n × n` grid (never on the boundary)
//!    and accept a sample with `|R| ≤ τ·scale`;
//! 2. otherwise bisect along the segment joining two neighbouring samples of
//!    opposite sign;
//! 3. otherwise double `n`, up to the refinement cap;
//! 4. as a last resort run a coordinate descent on `|R|` from the best
//!    sample, switching to bisection whenever a step crosses a sign change.
//!
//! When every level-0 sample is already within tolerance the field is
//! reported as identically zero and the centre of the domain is returned.
//!
//! The same engine serves the interval theorems with a one-dimensional grid.

use serde::Serialize;
use thiserror::Error;

use crate::expr::EvalError;
use crate::theorems::{IntervalResidual, ResidualField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocateConfig {
    /// Cells per axis at the first level.
    pub grid: usize,
    /// Number of grid doublings after the first level.
    pub max_refinements: u32,
    /// Residual tolerance factor, applied as `tau * scale`.
    pub tau: f64,
    /// Bisection stops once the bracket is this fraction of the segment.
    pub bisection_tol: f64,
    /// Iteration cap of the coordinate descent.
    pub max_iterations: usize,
}

impl Default for LocateConfig {
    fn default() -> Self {
        LocateConfig {
            grid: 33,
            max_refinements: 4,
            tau: 1e-9,
            bisection_tol: 1e-12,
            max_iterations: 200,
        }
    }
}

impl LocateConfig {
    pub fn validate(&self) -> Result<(), LocateError> {
        let bad = |reason: &'static str| Err(LocateError::InvalidConfig { reason });
        if self.grid < 3 {
            return bad("grid must be at least 3");
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad("tau must be positive and finite");
        }
        if !(self.bisection_tol >= 0.0 && self.bisection_tol.is_finite()) {
            return bad("bisection tolerance must be non-negative");
        }
        if self.max_iterations < 1 {
            return bad("iteration cap must be at least 1");
        }
        if self.max_refinements > 12 {
            return bad("at most 12 refinement levels");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocateError {
    #[error("invalid locate configuration: {reason}")]
    InvalidConfig { reason: &'static str },
    #[error("bisection needs R(p_neg) < 0 < R(p_pos), got {r_neg:e} and {r_pos:e}")]
    SignContract { r_neg: f64, r_pos: f64 },
    #[error("point ({x}, {y}) is not inside the open domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("evaluation failed at ({x}, {y}): {source}")]
    Eval {
        x: f64,
        y: f64,
        #[source]
        source: EvalError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Found,
    DegenerateIdenticallyZero,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GridHit,
    SignChangeBisection,
    Minimization,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanValuePoint {
    pub xi1: f64,
    pub xi2: f64,
    pub residual: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalPoint {
    pub xi: f64,
    pub residual: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Smallest signed residual on the last sampled grid.
    pub grid_min: f64,
    /// Largest signed residual on the last sampled grid.
    pub grid_max: f64,
    /// Grid indices of the sign-change pair that was bisected.
    pub sign_change_cells: Option<Vec<Vec<usize>>>,
    pub refinement_level: u32,
    pub evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_at: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocateReport {
    pub outcome: Outcome,
    pub point: Option<MeanValuePoint>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalReport {
    pub outcome: Outcome,
    pub point: Option<IntervalPoint>,
    pub diagnostics: Diagnostics,
}

/// Result of [`bisect_on_segment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentRoot {
    pub point: (f64, f64),
    pub residual: f64,
    pub evaluations: usize,
}

pub fn locate(field: &ResidualField, cfg: &LocateConfig) -> Result<LocateReport, LocateError> {
    cfg.validate()?;
    let r = field.rect;
    let eval = |p: [f64; 2]| field.eval(p[0], p[1]);
    let mut engine = Engine {
        lo: [r.x1, r.y1],
        hi: [r.x2, r.y2],
        eval: &eval,
        tol_abs: cfg.tau * field.scale,
        cfg,
        evaluations: 0,
    };
    let found = engine.run();
    Ok(LocateReport {
        outcome: found.outcome,
        point: found.point.map(|(p, residual, method)| MeanValuePoint {
            xi1: p[0],
            xi2: p[1],
            residual,
            method,
        }),
        diagnostics: found.diagnostics,
    })
}

pub fn locate_interval(map: &IntervalResidual, cfg: &LocateConfig) -> Result<IntervalReport, LocateError> {
    cfg.validate()?;
    let eval = |p: [f64; 1]| map.eval(p[0]);
    let mut engine = Engine {
        lo: [map.x1],
        hi: [map.x2],
        eval: &eval,
        tol_abs: cfg.tau * map.scale,
        cfg,
        evaluations: 0,
    };
    let found = engine.run();
    Ok(IntervalReport {
        outcome: found.outcome,
        point: found.point.map(|(p, residual, method)| IntervalPoint {
            xi: p[0],
            residual,
            method,
        }),
        diagnostics: found.diagnostics,
    })
}

/// Bisection along the segment from `p_neg` to `p_pos`.
///
/// Returns as soon as `|R| ≤ tau·scale`, or once the bracket has shrunk to
/// `tol` of the segment, in which case the better end of the bracket is
/// returned. Both endpoints must be interior; if either already meets the
/// tolerance it is returned directly.
pub fn bisect_on_segment(
    field: &ResidualField,
    p_neg: (f64, f64),
    p_pos: (f64, f64),
    tau: f64,
    tol: f64,
) -> Result<SegmentRoot, LocateError> {
    for p in [p_neg, p_pos] {
        if !field.rect.contains_open(p.0, p.1) {
            return Err(LocateError::OutsideDomain { x: p.0, y: p.1 });
        }
    }
    let eval = |p: [f64; 2]| field.eval(p[0], p[1]);
    let tol_abs = tau * field.scale;
    let r_neg = eval2(&eval, [p_neg.0, p_neg.1])?;
    let r_pos = eval2(&eval, [p_pos.0, p_pos.1])?;
    if r_neg.abs() <= tol_abs {
        return Ok(SegmentRoot {
            point: p_neg,
            residual: r_neg,
            evaluations: 2,
        });
    }
    if r_pos.abs() <= tol_abs {
        return Ok(SegmentRoot {
            point: p_pos,
            residual: r_pos,
            evaluations: 2,
        });
    }
    if !(r_neg < 0.0 && r_pos > 0.0) {
        return Err(LocateError::SignContract { r_neg, r_pos });
    }
    let b = bisect(
        &eval,
        Bracket {
            neg: [p_neg.0, p_neg.1],
            pos: [p_pos.0, p_pos.1],
            r_neg,
            r_pos,
        },
        tol_abs,
        tol,
    )?;
    Ok(SegmentRoot {
        point: (b.point[0], b.point[1]),
        residual: b.residual,
        evaluations: 2 + b.evaluations,
    })
}

/// Residual at a claimed mean-value point, without judging it.
pub fn verify_at(field: &ResidualField, xi1: f64, xi2: f64) -> Result<f64, LocateError> {
    if !field.rect.contains_open(xi1, xi2) {
        return Err(LocateError::OutsideDomain { x: xi1, y: xi2 });
    }
    field
        .eval(xi1, xi2)
        .map_err(|source| LocateError::Eval { x: xi1, y: xi2, source })
}

pub fn verify_at_interval(map: &IntervalResidual, xi: f64) -> Result<f64, LocateError> {
    if !(map.x1 < xi && xi < map.x2) {
        return Err(LocateError::OutsideDomain { x: xi, y: f64::NAN });
    }
    map.eval(xi).map_err(|source| LocateError::Eval {
        x: xi,
        y: f64::NAN,
        source,
    })
}

fn eval2<const D: usize>(eval: &dyn Fn([f64; D]) -> Result<f64, EvalError>, p: [f64; D]) -> Result<f64, LocateError> {
    eval(p).map_err(|source| LocateError::Eval {
        x: p[0],
        y: if D > 1 { p[D - 1] } else { f64::NAN },
        source,
    })
}

#[derive(Debug, Clone, Copy)]
struct Bracket<const D: usize> {
    neg: [f64; D],
    pos: [f64; D],
    r_neg: f64,
    r_pos: f64,
}

#[derive(Debug, Clone, Copy)]
struct BisectResult<const D: usize> {
    point: [f64; D],
    residual: f64,
    bracket: Bracket<D>,
    evaluations: usize,
}

fn bisect<const D: usize>(
    eval: &dyn Fn([f64; D]) -> Result<f64, EvalError>,
    mut b: Bracket<D>,
    tol_abs: f64,
    param_tol: f64,
) -> Result<BisectResult<D>, LocateError> {
    let mut width = 1.0;
    let mut evaluations = 0;
    while width > param_tol {
        let mid: [f64; D] = std::array::from_fn(|d| 0.5 * (b.neg[d] + b.pos[d]));
        if mid == b.neg || mid == b.pos {
            break;
        }
        let r = eval2(eval, mid)?;
        evaluations += 1;
        if r.abs() <= tol_abs {
            return Ok(BisectResult {
                point: mid,
                residual: r,
                bracket: b,
                evaluations,
            });
        }
        if r < 0.0 {
            b.neg = mid;
            b.r_neg = r;
        } else {
            b.pos = mid;
            b.r_pos = r;
        }
        width *= 0.5;
    }
    let (point, residual) = if b.r_neg.abs() <= b.r_pos.abs() {
        (b.neg, b.r_neg)
    } else {
        (b.pos, b.r_pos)
    };
    Ok(BisectResult {
        point,
        residual,
        bracket: b,
        evaluations,
    })
}

struct Found<const D: usize> {
    outcome: Outcome,
    point: Option<([f64; D], f64, Method)>,
    diagnostics: Diagnostics,
}

struct Engine<'a, const D: usize> {
    lo: [f64; D],
    hi: [f64; D],
    eval: &'a dyn Fn([f64; D]) -> Result<f64, EvalError>,
    tol_abs: f64,
    cfg: &'a LocateConfig,
    evaluations: usize,
}

struct Grid<const D: usize> {
    n: usize,
    values: Vec<f64>,
}

impl<const D: usize> Grid<D> {
    fn index(&self, mut flat: usize) -> [usize; D] {
        let mut idx = [0; D];
        for slot in idx.iter_mut() {
            *slot = flat % self.n;
            flat /= self.n;
        }
        idx
    }
}

impl<'a, const D: usize> Engine<'a, D> {
    fn sample(&mut self, p: [f64; D]) -> Result<f64, LocateError> {
        self.evaluations += 1;
        eval2(self.eval, p)
    }

    fn cell_center(&self, idx: [usize; D], n: usize) -> [f64; D] {
        let mut p = [0.0; D];
        for d in 0..D {
            let h = (self.hi[d] - self.lo[d]) / n as f64;
            p[d] = self.lo[d] + (idx[d] as f64 + 0.5) * h;
        }
        p
    }

    fn center(&self) -> [f64; D] {
        std::array::from_fn(|d| 0.5 * (self.lo[d] + self.hi[d]))
    }

    fn interior(&self, p: &[f64; D]) -> bool {
        (0..D).all(|d| self.lo[d] < p[d] && p[d] < self.hi[d])
    }

    fn failed(&self, diagnostics: &mut Diagnostics, err: LocateError) -> Found<D> {
        if let LocateError::Eval { x, y, .. } = err {
            diagnostics.failed_at = Some(if D > 1 { vec![x, y] } else { vec![x] });
        }
        diagnostics.message = Some(err.to_string());
        diagnostics.evaluations = self.evaluations;
        Found {
            outcome: Outcome::Failed,
            point: None,
            diagnostics: diagnostics.clone(),
        }
    }

    fn found(&self, diagnostics: &mut Diagnostics, p: [f64; D], r: f64, method: Method) -> Found<D> {
        diagnostics.evaluations = self.evaluations;
        Found {
            outcome: Outcome::Found,
            point: Some((p, r, method)),
            diagnostics: diagnostics.clone(),
        }
    }

    fn run(&mut self) -> Found<D> {
        let mut diag = Diagnostics::default();
        let mut best: Option<([f64; D], f64, f64)> = None; // point, residual, cell width scale
        for level in 0..=self.cfg.max_refinements {
            diag.refinement_level = level;
            let n = self.cfg.grid << level;
            let grid = match self.sample_grid(n) {
                Ok(g) => g,
                Err(e) => return self.failed(&mut diag, e),
            };
            diag.grid_min = grid.values.iter().copied().fold(f64::INFINITY, f64::min);
            diag.grid_max = grid.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

            if level == 0 && grid.values.iter().all(|r| r.abs() <= self.tol_abs) {
                let c = self.center();
                return match self.sample(c) {
                    Ok(r) => {
                        diag.evaluations = self.evaluations;
                        Found {
                            outcome: Outcome::DegenerateIdenticallyZero,
                            point: Some((c, r, Method::GridHit)),
                            diagnostics: diag,
                        }
                    }
                    Err(e) => self.failed(&mut diag, e),
                };
            }

            let (amin, rmin) = grid.values.iter().enumerate().fold((0, f64::INFINITY), |acc, (k, r)| {
                if r.abs() < acc.1.abs() {
                    (k, *r)
                } else {
                    acc
                }
            });
            let pmin = self.cell_center(grid.index(amin), n);
            if rmin.abs() <= self.tol_abs {
                return self.found(&mut diag, pmin, rmin, Method::GridHit);
            }
            if best.is_none_or(|b| rmin.abs() < b.1.abs()) {
                best = Some((pmin, rmin, 1.0 / n as f64));
            }

            if let Some((ka, kb)) = self.sign_change_pair(&grid) {
                let (ia, ib) = (grid.index(ka), grid.index(kb));
                diag.sign_change_cells = Some(vec![ia.to_vec(), ib.to_vec()]);
                let (pa, pb) = (self.cell_center(ia, n), self.cell_center(ib, n));
                let (ra, rb) = (grid.values[ka], grid.values[kb]);
                let bracket = if ra < 0.0 {
                    Bracket {
                        neg: pa,
                        pos: pb,
                        r_neg: ra,
                        r_pos: rb,
                    }
                } else {
                    Bracket {
                        neg: pb,
                        pos: pa,
                        r_neg: rb,
                        r_pos: ra,
                    }
                };
                match self.bisect_fully(bracket) {
                    Ok((p, r)) if r.abs() <= self.tol_abs => {
                        return self.found(&mut diag, p, r, Method::SignChangeBisection);
                    }
                    Ok((p, r)) => {
                        if best.is_none_or(|b| r.abs() < b.1.abs()) {
                            best = Some((p, r, 1.0 / n as f64));
                        }
                        break;
                    }
                    Err(e) => return self.failed(&mut diag, e),
                }
            }
        }
        let (start, r0, frac) = best.expect("at least one grid level is sampled");
        match self.minimize(start, r0, frac) {
            Ok((p, r)) if r.abs() <= self.tol_abs => self.found(&mut diag, p, r, Method::Minimization),
            Ok((_, r)) => {
                diag.message = Some(format!(
                    "smallest residual {:e} exceeds tolerance {:e}",
                    r.abs(),
                    self.tol_abs
                ));
                diag.evaluations = self.evaluations;
                Found {
                    outcome: Outcome::Failed,
                    point: None,
                    diagnostics: diag,
                }
            }
            Err(e) => self.failed(&mut diag, e),
        }
    }

    fn sample_grid(&mut self, n: usize) -> Result<Grid<D>, LocateError> {
        let total = n.pow(D as u32);
        let mut grid = Grid {
            n,
            values: Vec::with_capacity(total),
        };
        for flat in 0..total {
            let p = self.cell_center(grid.index(flat), n);
            let r = self.sample(p)?;
            grid.values.push(r);
        }
        Ok(grid)
    }

    /// Neighbouring samples of opposite sign, preferring the pair with the
    /// smallest `|R(a)| + |R(b)|`.
    fn sign_change_pair(&self, grid: &Grid<D>) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for (k, &ra) in grid.values.iter().enumerate() {
            let idx = grid.index(k);
            let mut stride = 1;
            for &i in idx.iter() {
                if i + 1 < grid.n {
                    let rb = grid.values[k + stride];
                    if (ra < 0.0) != (rb < 0.0) {
                        let w = ra.abs() + rb.abs();
                        if best.is_none_or(|b| w < b.2) {
                            best = Some((k, k + stride, w));
                        }
                    }
                }
                stride *= grid.n;
            }
        }
        best.map(|(a, b, _)| (a, b))
    }

    /// Bisection to the configured tolerance, then on to floating-point
    /// exhaustion if the residual is still above tolerance.
    fn bisect_fully(&mut self, bracket: Bracket<D>) -> Result<([f64; D], f64), LocateError> {
        let first = bisect(self.eval, bracket, self.tol_abs, self.cfg.bisection_tol)?;
        self.evaluations += first.evaluations;
        if first.residual.abs() <= self.tol_abs {
            return Ok((first.point, first.residual));
        }
        let second = bisect(self.eval, first.bracket, self.tol_abs, 0.0)?;
        self.evaluations += second.evaluations;
        Ok((second.point, second.residual))
    }

    /// Coordinate descent on `|R|`, starting with steps of `frac` of each
    /// side. A step that flips the sign of `R` hands over to bisection.
    fn minimize(&mut self, start: [f64; D], r0: f64, frac: f64) -> Result<([f64; D], f64), LocateError> {
        let mut p = start;
        let mut r = r0;
        let mut step: [f64; D] = std::array::from_fn(|d| frac * (self.hi[d] - self.lo[d]));
        for _ in 0..self.cfg.max_iterations {
            if r.abs() <= self.tol_abs {
                break;
            }
            let mut improved = false;
            for d in 0..D {
                for sign in [1.0, -1.0] {
                    let mut q = p;
                    q[d] += sign * step[d];
                    if !self.interior(&q) {
                        continue;
                    }
                    let rq = self.sample(q)?;
                    if (rq < 0.0) != (r < 0.0) {
                        let bracket = if r < 0.0 {
                            Bracket {
                                neg: p,
                                pos: q,
                                r_neg: r,
                                r_pos: rq,
                            }
                        } else {
                            Bracket {
                                neg: q,
                                pos: p,
                                r_neg: rq,
                                r_pos: r,
                            }
                        };
                        return self.bisect_fully(bracket);
                    }
                    if rq.abs() < r.abs() {
                        p = q;
                        r = rq;
                        improved = true;
                    }
                }
            }
            if !improved {
                step.iter_mut().for_each(|s| *s *= 0.5);
                let tiny = (0..D).all(|d| step[d] <= f64::EPSILON * (self.hi[d] - self.lo[d]));
                if tiny {
                    break;
                }
            }
        }
        Ok((p, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::theorems::{pompeiu1d_residual, pompeiu2d_residual, rect_mvt_residual, Rectangle, TheoremTag};

    fn e(s: &str) -> Expression {
        Expression::parse(s).unwrap()
    }

    fn rect(x1: f64, x2: f64, y1: f64, y2: f64) -> Rectangle {
        Rectangle::new(x1, x2, y1, y2).unwrap()
    }

    fn linear(rect: Rectangle, a: f64, b: f64, c: f64) -> ResidualField {
        ResidualField::custom(TheoremTag::RectMvt, rect, 1.0, move |x, y| Ok(a + b * x + c * y))
    }

    #[test]
    fn config_validation() {
        assert!(LocateConfig::default().validate().is_ok());
        let bad = LocateConfig {
            grid: 2,
            ..LocateConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = LocateConfig {
            tau: 0.0,
            ..LocateConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = LocateConfig {
            max_iterations: 0,
            ..LocateConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rmvt_closed_form() {
        let field = rect_mvt_residual(&e("x^2*y"), &rect(0.0, 1.0, 0.0, 1.0)).unwrap();
        let report = locate(&field, &LocateConfig::default()).unwrap();
        assert_eq!(report.outcome, Outcome::Found);
        let p = report.point.unwrap();
        assert!((p.xi1 - 0.5).abs() <= 1e-8);
        assert!(p.residual.abs() <= 1e-9 * field.scale);
    }

    #[test]
    fn bilinear_is_degenerate() {
        let field = rect_mvt_residual(&e("x*y"), &rect(1.0, 2.0, 1.0, 2.0)).unwrap();
        let report = locate(&field, &LocateConfig::default()).unwrap();
        assert_eq!(report.outcome, Outcome::DegenerateIdenticallyZero);
        let p = report.point.unwrap();
        assert_eq!((p.xi1, p.xi2), (1.5, 1.5));
    }

    #[test]
    fn pompeiu_curve() {
        let field = pompeiu2d_residual(&e("x^2*y^2"), &rect(1.0, 2.0, 1.0, 3.0)).unwrap();
        let report = locate(&field, &LocateConfig::default()).unwrap();
        assert_eq!(report.outcome, Outcome::Found);
        let p = report.point.unwrap();
        assert!((p.xi1 * p.xi2 - 6f64.sqrt()).abs() <= 1e-6);
        assert!(field.rect.contains_open(p.xi1, p.xi2));
    }

    #[test]
    fn bisection_on_linear_residual() {
        let field = linear(rect(0.0, 1.0, 0.0, 1.0), 1.0, -2.0, 0.0);
        let root = bisect_on_segment(&field, (0.9, 0.5), (0.1, 0.5), 1e-14, 1e-12).unwrap();
        assert!((root.point.0 - 0.5).abs() <= 1e-10);
        assert_eq!(root.point.1, 0.5);
    }

    #[test]
    fn bisection_endpoint_already_within_tolerance() {
        let field = linear(rect(0.0, 1.0, 0.0, 1.0), 1.0, -2.0, 0.0);
        let root = bisect_on_segment(&field, (0.5, 0.2), (0.1, 0.5), 1e-9, 1e-12).unwrap();
        assert_eq!(root.point, (0.5, 0.2));
        assert_eq!(root.evaluations, 2);
    }

    #[test]
    fn bisection_contract() {
        let field = linear(rect(0.0, 1.0, 0.0, 1.0), 1.0, -2.0, 0.0);
        assert!(matches!(
            bisect_on_segment(&field, (0.1, 0.5), (0.9, 0.5), 1e-9, 1e-12),
            Err(LocateError::SignContract { .. })
        ));
        assert!(matches!(
            bisect_on_segment(&field, (0.9, 0.5), (1.0, 0.5), 1e-9, 1e-12),
            Err(LocateError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn verify_points() {
        let field = pompeiu2d_residual(&e("x^2*y^2"), &rect(1.0, 2.0, 1.0, 3.0)).unwrap();
        assert!(verify_at(&field, 1.5, 1.632993).unwrap().abs() <= 1e-5);
        assert!((verify_at(&field, 1.5, 2.5).unwrap() - 8.0625).abs() < 1e-12);
        assert!(matches!(
            verify_at(&field, 0.5, 2.0),
            Err(LocateError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn touching_zero_uses_minimization() {
        // non-negative with an isolated zero: no sign change anywhere
        let field = ResidualField::custom(TheoremTag::RectRolle, rect(0.0, 1.0, 0.0, 1.0), 1.0, |x, y| {
            Ok((x - 0.3137).powi(2) + (y - 0.6071).powi(2))
        });
        let report = locate(&field, &LocateConfig::default()).unwrap();
        assert_eq!(report.outcome, Outcome::Found);
        let p = report.point.unwrap();
        assert_eq!(p.method, Method::Minimization);
        assert!(p.residual <= 1e-9);
    }

    #[test]
    fn no_zero_fails_with_diagnostics() {
        let field = ResidualField::custom(TheoremTag::RectRolle, rect(0.0, 1.0, 0.0, 1.0), 1.0, |x, y| {
            Ok(1.0 + x * y)
        });
        let cfg = LocateConfig {
            max_refinements: 1,
            ..LocateConfig::default()
        };
        let report = locate(&field, &cfg).unwrap();
        assert_eq!(report.outcome, Outcome::Failed);
        assert!(report.point.is_none());
        assert!(report.diagnostics.grid_min > 1.0);
        assert!(report.diagnostics.message.is_some());
    }

    #[test]
    fn evaluation_error_reports_point() {
        let field = ResidualField::custom(TheoremTag::RectRolle, rect(-1.0, 1.0, -1.0, 1.0), 1.0, |x, _| {
            e("1/x").eval_f64(x, 0.0)
        });
        let cfg = LocateConfig {
            grid: 4,
            ..LocateConfig::default()
        };
        let report = locate(&field, &cfg).unwrap();
        assert_eq!(report.outcome, Outcome::Failed);
        assert_eq!(report.diagnostics.failed_at.as_ref().unwrap()[0], 0.0);
    }

    #[test]
    fn interval_locate() {
        let map = pompeiu1d_residual(&e("x^2"), 1.0, 2.0).unwrap();
        let report = locate_interval(&map, &LocateConfig::default()).unwrap();
        assert_eq!(report.outcome, Outcome::Found);
        assert!((report.point.unwrap().xi - 2f64.sqrt()).abs() <= 1e-9);
        let flat = pompeiu1d_residual(&e("x"), 1.0, 2.0).unwrap();
        let report = locate_interval(&flat, &LocateConfig::default()).unwrap();
        assert_eq!(report.outcome, Outcome::DegenerateIdenticallyZero);
        assert_eq!(report.point.unwrap().xi, 1.5);
    }

    #[test]
    fn deterministic() {
        let field = pompeiu2d_residual(&e("exp(x/4)*y^3 - x^2*y"), &rect(0.5, 2.0, 1.0, 3.0)).unwrap();
        let a = locate(&field, &LocateConfig::default()).unwrap();
        let b = locate(&field, &LocateConfig::default()).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
