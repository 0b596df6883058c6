//! Seeded generation of test functions and rectangles, sweeps over many
//! theorem instances, and the proof-path replay of the Pompeiu form.
//!
//! Every random quantity is a pure function of a 64-bit seed. Per-case seeds
//! come from a counter-based stream: the ChaCha8 generator keyed by the
//! master seed, positioned on stream `case_index`. A case therefore does not
//! depend on which other cases ran or in what order.

use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Expression, Func};
use crate::hyperdual::eval_dual;
use crate::locator::{locate, locate_interval, LocateConfig, LocateError, Outcome};
use crate::theorems::{
    build_cauchy_auxiliary, build_reciprocal_transform, pompeiu2d_residual, reciprocal_rectangle, rect_mvt_residual,
    Instance, Rectangle, TheoremCase, TheoremError, TheoremTag,
};

/// Draws allowed before generation gives up on a constrained family.
pub const MAX_DRAWS: usize = 1000;

/// Minimum `|denominator|` of a rational function on its rectangle.
pub const DENOMINATOR_FLOOR: f64 = 0.1;

/// Pompeiu residual bound accepted by [`proof_path_check`], relative to scale.
pub const PROOF_PATH_TOL: f64 = 1e-7;

const DENOMINATOR_GRID: usize = 17;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("no admissible function after {attempts} draws")]
    Generation { attempts: usize },
    #[error("the rational family needs a target rectangle")]
    MissingDomain,
    #[error("sweep count must be at least 1")]
    EmptySweep,
    #[error("unknown function family `{0}` (expected polyN, bilinear, separable, exp-poly or rational)")]
    UnknownFamily(String),
    #[error(transparent)]
    Theorem(#[from] TheoremError),
    #[error(transparent)]
    Locate(#[from] LocateError),
}

/// A distribution over bivariate test functions.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionFamily {
    /// Every monomial `x^i y^j` with `i + j ≤ max_degree`, coefficients
    /// uniform in `coeff_range`.
    Polynomial { max_degree: u32, coeff_range: (f64, f64) },
    /// `a + b x + c y + d xy`.
    Bilinear { coeff_range: (f64, f64) },
    /// `u(x)·v(y)` with `u, v` drawn from quadratics, shifted sines and
    /// cosines, and exponentials.
    SeparableProduct { coeff_range: (f64, f64) },
    /// `exp(p(x, y))` for a random polynomial `p`.
    ExpPoly { max_degree: u32, coeff_range: (f64, f64) },
    /// Polynomial over a polynomial whose magnitude stays above
    /// [`DENOMINATOR_FLOOR`] on `domain` (checked on a grid).
    Rational {
        num_degree: u32,
        den_degree: u32,
        coeff_range: (f64, f64),
        domain: Option<Rectangle>,
    },
}

impl FunctionFamily {
    pub fn poly(max_degree: u32) -> Self {
        FunctionFamily::Polynomial {
            max_degree,
            coeff_range: (-2.0, 2.0),
        }
    }

    /// The same family with its target rectangle set, where that matters.
    pub fn bound_to(&self, rect: &Rectangle) -> Self {
        match self {
            FunctionFamily::Rational {
                num_degree,
                den_degree,
                coeff_range,
                ..
            } => FunctionFamily::Rational {
                num_degree: *num_degree,
                den_degree: *den_degree,
                coeff_range: *coeff_range,
                domain: Some(*rect),
            },
            other => other.clone(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            FunctionFamily::Polynomial { max_degree, .. } => format!("poly{max_degree}"),
            FunctionFamily::Bilinear { .. } => "bilinear".into(),
            FunctionFamily::SeparableProduct { .. } => "separable".into(),
            FunctionFamily::ExpPoly { .. } => "exp-poly".into(),
            FunctionFamily::Rational { .. } => "rational".into(),
        }
    }
}

impl FromStr for FunctionFamily {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let family = match s {
            "bilinear" => FunctionFamily::Bilinear {
                coeff_range: (-2.0, 2.0),
            },
            "separable" => FunctionFamily::SeparableProduct {
                coeff_range: (-2.0, 2.0),
            },
            "exp-poly" => FunctionFamily::ExpPoly {
                max_degree: 2,
                coeff_range: (-0.5, 0.5),
            },
            "rational" => FunctionFamily::Rational {
                num_degree: 2,
                den_degree: 1,
                coeff_range: (-1.0, 1.0),
                domain: None,
            },
            other => match other.strip_prefix("poly").map(str::parse::<u32>) {
                Some(Ok(d)) if d <= 12 => FunctionFamily::poly(d),
                _ => return Err(HarnessError::UnknownFamily(s.to_string())),
            },
        };
        Ok(family)
    }
}

/// Seed of item `index` in the stream keyed by `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo >= hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn monomial(i: u32, j: u32) -> Option<Expression> {
    let factor = |v: Expression, k: u32| match k {
        0 => None,
        1 => Some(v),
        _ => Some(v.pow(Expression::constant(k as f64))),
    };
    match (factor(Expression::x(), i), factor(Expression::y(), j)) {
        (None, None) => None,
        (Some(a), None) | (None, Some(a)) => Some(a),
        (Some(a), Some(b)) => Some(a * b),
    }
}

fn random_polynomial(rng: &mut ChaCha8Rng, max_degree: u32, range: (f64, f64)) -> Expression {
    let mut acc: Option<Expression> = None;
    for total in 0..=max_degree {
        for j in 0..=total {
            let i = total - j;
            let c = Expression::constant(uniform(rng, range));
            let term = match monomial(i, j) {
                Some(m) => c * m,
                None => c,
            };
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
    }
    acc.expect("degree 0 has one term")
}

fn random_univariate(rng: &mut ChaCha8Rng, var: Expression, range: (f64, f64)) -> Expression {
    let k = |c: f64| Expression::constant(c);
    match rng.random_range(0..4u8) {
        0 => {
            let (a, b, c) = (uniform(rng, range), uniform(rng, range), uniform(rng, range));
            k(a) + k(b) * var.clone() + k(c) * var.pow(k(2.0))
        }
        1 | 2 => {
            let freq = rng.random_range(0.5..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let phase = rng.random_range(-1.0..1.0);
            let func = if rng.random_bool(0.5) { Func::Sin } else { Func::Cos };
            Expression::call(func, k(freq) * var + k(phase))
        }
        _ => {
            let rate = rng.random_range(-0.6..0.6);
            Expression::call(Func::Exp, k(rate) * var)
        }
    }
}

fn denominator_ok(den: &Expression, r: &Rectangle) -> bool {
    let n = DENOMINATOR_GRID;
    let mut sign = None;
    for j in 0..n {
        let y = r.y1 + j as f64 * r.height() / (n - 1) as f64;
        for i in 0..n {
            let x = r.x1 + i as f64 * r.width() / (n - 1) as f64;
            match den.eval_f64(x, y) {
                Ok(v) if v.abs() >= DENOMINATOR_FLOOR => {
                    let s = v > 0.0;
                    if *sign.get_or_insert(s) != s {
                        return false;
                    }
                }
                _ => return false,
            }
        }
    }
    true
}

/// The one-dimensional Boggio form is the Cauchy theorem for `f/g` against
/// `1/g`, so it needs `g` and `g'` free of zeros on `[x1, x2]`. Checked on
/// a grid with margin [`DENOMINATOR_FLOOR`].
pub fn boggio1d_admissible(g: &Expression, x1: f64, x2: f64) -> bool {
    let n = 4 * DENOMINATOR_GRID;
    let mut signs = None;
    for i in 0..n {
        let x = x1 + i as f64 * (x2 - x1) / (n - 1) as f64;
        let Ok(d) = eval_dual(g, x) else { return false };
        if d.v.abs() < DENOMINATOR_FLOOR || d.d.abs() < DENOMINATOR_FLOOR {
            return false;
        }
        let s = (d.v > 0.0, d.d > 0.0);
        if *signs.get_or_insert(s) != s {
            return false;
        }
    }
    true
}

/// Draw one function from `family`; deterministic in `(family, seed)`.
pub fn generate_function(family: &FunctionFamily, seed: u64) -> Result<Expression, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match family {
        FunctionFamily::Polynomial {
            max_degree,
            coeff_range,
        } => Ok(random_polynomial(&mut rng, *max_degree, *coeff_range)),
        FunctionFamily::Bilinear { coeff_range } => {
            let mut c = || Expression::constant(uniform(&mut rng, *coeff_range));
            Ok(c() + c() * Expression::x() + c() * Expression::y() + c() * (Expression::x() * Expression::y()))
        }
        FunctionFamily::SeparableProduct { coeff_range } => {
            let u = random_univariate(&mut rng, Expression::x(), *coeff_range);
            let v = random_univariate(&mut rng, Expression::y(), *coeff_range);
            Ok(u * v)
        }
        FunctionFamily::ExpPoly {
            max_degree,
            coeff_range,
        } => Ok(Expression::call(
            Func::Exp,
            random_polynomial(&mut rng, *max_degree, *coeff_range),
        )),
        FunctionFamily::Rational {
            num_degree,
            den_degree,
            coeff_range,
            domain,
        } => {
            let domain = domain.ok_or(HarnessError::MissingDomain)?;
            let num = random_polynomial(&mut rng, *num_degree, *coeff_range);
            for _ in 0..MAX_DRAWS {
                let den = random_polynomial(&mut rng, *den_degree, *coeff_range);
                if denominator_ok(&den, &domain) {
                    return Ok(num / den);
                }
            }
            Err(HarnessError::Generation { attempts: MAX_DRAWS })
        }
    }
}

/// Random rectangle with sides in `[0.5, 3]`. With `zero_free` each axis
/// lies inside `[0.5, 4]` or `[-4, -0.5]`.
pub fn generate_rectangle(seed: u64, zero_free: bool) -> Rectangle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut axis = || {
        let side = rng.random_range(0.5..=3.0);
        if zero_free {
            let lo = rng.random_range(0.5..=4.0 - side);
            if rng.random_bool(0.5) {
                (lo, lo + side)
            } else {
                (-(lo + side), -lo)
            }
        } else {
            let lo = rng.random_range(-4.0..=4.0 - side);
            (lo, lo + side)
        }
    };
    let (x1, x2) = axis();
    let (y1, y2) = axis();
    Rectangle::new(x1, x2, y1, y2).expect("sides are at least 0.5")
}

/// One sweep case, as written to the per-case CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRecord {
    pub case_index: u64,
    pub seed: u64,
    pub outcome: Outcome,
    pub xi1: Option<f64>,
    pub xi2: Option<f64>,
    pub residual: Option<f64>,
    #[serde(skip)]
    pub scale: f64,
    #[serde(skip)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub theorem: TheoremTag,
    pub family: String,
    pub master_seed: u64,
    pub total: usize,
    pub found: usize,
    pub degenerate: usize,
    pub failed: usize,
    /// Largest `|R|` among found points.
    pub max_found_residual: f64,
    /// Largest `|R| / scale` among found points.
    pub max_found_relative: f64,
    pub failing_seeds: Vec<u64>,
    #[serde(skip)]
    pub cases: Vec<CaseRecord>,
}

fn freeze_y(e: &Expression) -> Expression {
    e.substitute(&Expression::x(), &Expression::constant(1.0))
}

/// The functions and rectangle of sweep case `seed`.
pub fn build_case(
    tag: TheoremTag,
    family: &FunctionFamily,
    seed: u64,
) -> Result<(TheoremCase, Rectangle), HarnessError> {
    let rect = generate_rectangle(derive_seed(seed, 0), tag.needs_zero_free());
    // interval cases freeze y = 1, so a rational denominator is checked there
    let domain = if tag.is_interval() {
        Rectangle::new(rect.x1, rect.x2, 0.5, 1.5)?
    } else {
        rect
    };
    let family = family.bound_to(&domain);
    let mut f = generate_function(&family, derive_seed(seed, 1))?;
    let mut g = if tag.needs_g() || tag == TheoremTag::RectRolle {
        Some(generate_function(&family, derive_seed(seed, 2))?)
    } else {
        None
    };
    if tag.is_interval() {
        f = freeze_y(&f);
        g = g.as_ref().map(freeze_y);
    }
    if tag == TheoremTag::Boggio1D {
        let mut k = 2;
        while !boggio1d_admissible(g.as_ref().expect("drawn above"), rect.x1, rect.x2) {
            k += 1;
            if k > MAX_DRAWS as u64 + 2 {
                return Err(HarnessError::Generation { attempts: MAX_DRAWS });
            }
            let fresh = generate_function(&family, derive_seed(seed, k))?;
            g = Some(freeze_y(&fresh));
        }
    }
    if tag == TheoremTag::RectRolle {
        let g = g.take().expect("drawn above");
        f = build_cauchy_auxiliary(&f, &g, &rect)?;
    }
    Ok((TheoremCase::new(tag, f, g)?, rect))
}

fn run_case(tag: TheoremTag, family: &FunctionFamily, index: u64, seed: u64, cfg: &LocateConfig) -> CaseRecord {
    let mut record = CaseRecord {
        case_index: index,
        seed,
        outcome: Outcome::Failed,
        xi1: None,
        xi2: None,
        residual: None,
        scale: 1.0,
        note: None,
    };
    let built = build_case(tag, family, seed).and_then(|(case, rect)| Ok(case.build(&rect)?));
    let instance = match built {
        Ok(i) => i,
        Err(e) => {
            record.note = Some(e.to_string());
            return record;
        }
    };
    match instance {
        Instance::Planar(field) => {
            record.scale = field.scale;
            match locate(&field, cfg) {
                Ok(report) => {
                    record.outcome = report.outcome;
                    if let Some(p) = report.point {
                        (record.xi1, record.xi2, record.residual) = (Some(p.xi1), Some(p.xi2), Some(p.residual));
                    }
                    record.note = report.diagnostics.message;
                }
                Err(e) => record.note = Some(e.to_string()),
            }
        }
        Instance::Interval(map) => {
            record.scale = map.scale;
            match locate_interval(&map, cfg) {
                Ok(report) => {
                    record.outcome = report.outcome;
                    if let Some(p) = report.point {
                        (record.xi1, record.residual) = (Some(p.xi), Some(p.residual));
                    }
                    record.note = report.diagnostics.message;
                }
                Err(e) => record.note = Some(e.to_string()),
            }
        }
    }
    record
}

/// Build, locate and tally `count` random instances of `tag`.
pub fn run_sweep(
    tag: TheoremTag,
    family: &FunctionFamily,
    count: usize,
    master_seed: u64,
    cfg: &LocateConfig,
) -> Result<SweepSummary, HarnessError> {
    if count == 0 {
        return Err(HarnessError::EmptySweep);
    }
    cfg.validate()?;
    let cases: Vec<CaseRecord> = (0..count as u64)
        .map(|i| run_case(tag, family, i, derive_seed(master_seed, i), cfg))
        .collect();

    let mut summary = SweepSummary {
        theorem: tag,
        family: family.name(),
        master_seed,
        total: count,
        found: 0,
        degenerate: 0,
        failed: 0,
        max_found_residual: 0.0,
        max_found_relative: 0.0,
        failing_seeds: Vec::new(),
        cases: Vec::new(),
    };
    for case in &cases {
        match case.outcome {
            Outcome::Found => {
                summary.found += 1;
                let r = case.residual.unwrap_or(f64::INFINITY).abs();
                summary.max_found_residual = summary.max_found_residual.max(r);
                summary.max_found_relative = summary.max_found_relative.max(r / case.scale);
            }
            Outcome::DegenerateIdenticallyZero => summary.degenerate += 1,
            Outcome::Failed => {
                summary.failed += 1;
                summary.failing_seeds.push(case.seed);
            }
        }
    }
    summary.cases = cases;
    Ok(summary)
}

/// Outcome of replaying the Pompeiu proof numerically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofPath {
    pub passed: bool,
    /// Mean-value point of the reciprocal transform.
    pub eta: Option<(f64, f64)>,
    /// `(1/η1, 1/η2)`.
    pub xi: Option<(f64, f64)>,
    pub pompeiu_residual: Option<f64>,
    pub scale: f64,
    pub message: Option<String>,
}

/// Locate a rectangular mean-value point `η` of `F(t,s) = ts·f(1/t,1/s)` on
/// the reciprocal rectangle, map it back through `ξ = 1/η`, and check that
/// `ξ` is a Pompeiu point of `f` on `r` to within [`PROOF_PATH_TOL`]`·scale`.
///
/// The Pompeiu residual at `ξ` equals the rectangular residual of `F` at
/// `η` divided by the area of the reciprocal rectangle, so the locate
/// tolerance for `F` is tightened by that area when it is below one.
pub fn proof_path_check(f: &Expression, r: &Rectangle, cfg: &LocateConfig) -> Result<ProofPath, HarnessError> {
    let pompeiu = pompeiu2d_residual(f, r)?;
    let inv = reciprocal_rectangle(r)?;
    let transform = build_reciprocal_transform(f);
    let field = rect_mvt_residual(&transform, &inv)?;
    let cfg_f = LocateConfig {
        tau: cfg.tau * inv.area().min(1.0),
        ..*cfg
    };
    let report = locate(&field, &cfg_f)?;
    let mut path = ProofPath {
        passed: false,
        eta: None,
        xi: None,
        pompeiu_residual: None,
        scale: pompeiu.scale,
        message: report.diagnostics.message.clone(),
    };
    let Some(p) = report.point else {
        return Ok(path);
    };
    let xi = (1.0 / p.xi1, 1.0 / p.xi2);
    path.eta = Some((p.xi1, p.xi2));
    path.xi = Some(xi);
    if !r.contains_open(xi.0, xi.1) {
        path.message = Some("mapped point left the open rectangle".into());
        return Ok(path);
    }
    match pompeiu.eval(xi.0, xi.1) {
        Ok(res) => {
            path.pompeiu_residual = Some(res);
            path.passed = res.abs() <= PROOF_PATH_TOL * pompeiu.scale;
        }
        Err(e) => path.message = Some(e.to_string()),
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_polynomial() {
        let fam = FunctionFamily::Polynomial {
            max_degree: 0,
            coeff_range: (1.0, 1.0),
        };
        for seed in [0, 1, 99] {
            assert_eq!(generate_function(&fam, seed).unwrap(), Expression::constant(1.0));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for fam in ["poly4", "bilinear", "separable", "exp-poly"] {
            let fam: FunctionFamily = fam.parse().unwrap();
            assert_eq!(generate_function(&fam, 7).unwrap(), generate_function(&fam, 7).unwrap());
        }
        assert_eq!(generate_rectangle(3, true), generate_rectangle(3, true));
        assert_ne!(derive_seed(42, 0), derive_seed(42, 1));
        assert_eq!(derive_seed(42, 5), derive_seed(42, 5));
    }

    #[test]
    fn polynomial_has_all_monomials() {
        let f = generate_function(&FunctionFamily::poly(4), 11).unwrap();
        // 15 coefficients, so at least 15 constant nodes
        let text = f.pretty_print();
        assert!(text.contains("(x^4)") && text.contains("(y^4)") && text.contains("((x^2)*(y^2))"));
        let r = Rectangle::new(1.0, 2.0, 1.0, 2.0).unwrap();
        assert!(crate::theorems::corner_difference(&f, &r).unwrap().value().is_finite());
    }

    #[test]
    fn rectangles() {
        for seed in 0..500 {
            let r = generate_rectangle(seed, true);
            assert!(r.is_zero_free());
            for (a, b) in [(r.x1, r.x2), (r.y1, r.y2)] {
                assert!((0.5..=3.0 + 1e-12).contains(&(b - a)));
                assert!(a.abs() >= 0.5 - 1e-12 && b.abs() <= 4.0 + 1e-12);
            }
        }
        assert!((0..200).any(|s| !generate_rectangle(s, false).is_zero_free()));
    }

    #[test]
    fn rational_denominator_floor() {
        let r = Rectangle::new(0.5, 3.0, -2.0, -1.0).unwrap();
        let fam = FunctionFamily::from_str("rational").unwrap().bound_to(&r);
        for seed in 0..20 {
            let f = generate_function(&fam, seed).unwrap();
            let Expression::Binary(_, _, den) = &f else {
                panic!("not a quotient")
            };
            assert!(denominator_ok(den, &r));
        }
        let unbound = FunctionFamily::from_str("rational").unwrap();
        assert_eq!(generate_function(&unbound, 0), Err(HarnessError::MissingDomain));
        let impossible = FunctionFamily::Rational {
            num_degree: 1,
            den_degree: 1,
            coeff_range: (0.0, 0.0),
            domain: Some(r),
        };
        assert_eq!(
            generate_function(&impossible, 0),
            Err(HarnessError::Generation { attempts: MAX_DRAWS })
        );
    }

    #[test]
    fn family_names() {
        assert_eq!(FunctionFamily::from_str("poly4").unwrap(), FunctionFamily::poly(4));
        assert!(FunctionFamily::from_str("poly").is_err());
        assert!(FunctionFamily::from_str("wavelet").is_err());
    }

    #[test]
    fn bilinear_sweep_is_degenerate() {
        let fam = FunctionFamily::from_str("bilinear").unwrap();
        let s = run_sweep(TheoremTag::RectMvt, &fam, 1, 42, &LocateConfig::default()).unwrap();
        assert_eq!((s.total, s.degenerate, s.failed), (1, 1, 0));
    }

    #[test]
    fn empty_sweep_rejected() {
        let fam = FunctionFamily::poly(2);
        assert_eq!(
            run_sweep(TheoremTag::RectMvt, &fam, 0, 42, &LocateConfig::default()),
            Err(HarnessError::EmptySweep)
        );
    }

    #[test]
    fn small_sweeps_every_tag() {
        let fam = FunctionFamily::poly(3);
        for tag in TheoremTag::ALL {
            let s = run_sweep(tag, &fam, 10, 7, &LocateConfig::default()).unwrap();
            assert_eq!(s.found + s.degenerate + s.failed, s.total);
            assert_eq!(
                s.failed,
                0,
                "{tag}: {:?}",
                s.cases.iter().filter_map(|c| c.note.clone()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn proof_path_closed_form() {
        let f = Expression::parse("x^2*y^2").unwrap();
        let r = Rectangle::new(1.0, 2.0, 1.0, 3.0).unwrap();
        let path = proof_path_check(&f, &r, &LocateConfig::default()).unwrap();
        assert!(path.passed);
        let (a, b) = path.xi.unwrap();
        assert!((a * b - 6f64.sqrt()).abs() <= 1e-5);

        let bilinear = Expression::parse("x*y").unwrap();
        assert!(
            proof_path_check(&bilinear, &r, &LocateConfig::default())
                .unwrap()
                .passed
        );

        let straddling = Rectangle::new(-1.0, 2.0, 1.0, 3.0).unwrap();
        assert!(proof_path_check(&f, &straddling, &LocateConfig::default()).is_err());
    }
}
