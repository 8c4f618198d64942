//! Hill's discriminant as a power series in the spectral parameter.
//!
//! Two forms are built: the band-edge form centered at the lowest periodic
//! eigenvalue `λ₀`, whose coefficients are `X̃⁽²ⁿ⁾(T) + X⁽²ⁿ⁾(T)`, and the
//! general-center form built from the complex nodeless solution
//! `f* = f*,1 + i f*,2` at an arbitrary `λ*`. The latter locates `λ₀`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::problems::SLProblem;
use crate::scalar::Real;
use crate::spps::{self, MainCoefficients, SeedCoefficients};

/// Relative imaginary residue tolerated in general-center coefficients.
pub const IMAG_TOL: f64 = 1e-9;
/// Points in the `λ₀` scan mesh.
pub const LAMBDA0_MESH: usize = 2000;
/// Largest admissible rounding bound `ε Σ|cₙ Δλⁿ|` on an evaluation.
pub const ROUNDING_TOL: f64 = 1e-6;
/// Upper bound on the final bisection bracket for roots in `λ`.
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesForm {
    /// Centered at `λ₀`; `c₀ = 2`.
    BandEdge,
    /// Centered at an arbitrary `λ*`.
    GeneralCenter,
}

/// Truncated series `D_N(λ) = Σ cₙ (λ - λ_c)ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminantSeries<R> {
    lambda_center: R,
    coefficients: Vec<R>,
    form: SeriesForm,
}

impl<R: Real> DiscriminantSeries<R> {
    pub fn new(lambda_center: R, coefficients: Vec<R>, form: SeriesForm) -> Self {
        assert!(!coefficients.is_empty(), "empty discriminant series");
        DiscriminantSeries {
            lambda_center,
            coefficients,
            form,
        }
    }

    pub fn lambda_center(&self) -> R {
        self.lambda_center
    }

    pub fn coefficients(&self) -> &[R] {
        &self.coefficients
    }

    pub fn form(&self) -> SeriesForm {
        self.form
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Horner evaluation at `λ`.
    pub fn eval(&self, lambda: R) -> R {
        let d = lambda - self.lambda_center;
        self.coefficients
            .iter()
            .rev()
            .fold(R::zero(), |acc, &c| acc * d + c)
    }

    /// `dD_N/dλ` from the term-differentiated series.
    pub fn derivative(&self, lambda: R) -> R {
        let d = lambda - self.lambda_center;
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(R::zero(), |acc, (n, &c)| {
                acc * d + c * R::from_usize(n).unwrap()
            })
    }

    /// `|c_N Δλᴺ| / Σ|cₙ Δλⁿ|`.
    pub fn tail_ratio(&self, lambda: R) -> R {
        spps::tail_ratio(
            self.coefficients.iter().copied(),
            lambda - self.lambda_center,
        )
    }

    /// `ε Σ|cₙ Δλⁿ|`, a bound on the rounding error of [`eval`](Self::eval)
    /// up to a modest factor in `N`.
    pub fn rounding_bound(&self, lambda: R) -> R {
        let d = (lambda - self.lambda_center).abs();
        let magnitude = self
            .coefficients
            .iter()
            .rev()
            .fold(R::zero(), |acc, &c| acc * d + c.abs());
        R::unit_roundoff() * magnitude
    }

    /// Fails when `λ` lies outside the truncation budget or the evaluation
    /// there would lose more than [`ROUNDING_TOL`] to cancellation.
    pub fn check_budget(&self, lambda: R) -> Result<()> {
        let ratio = self.tail_ratio(lambda);
        if !(ratio <= R::lit(spps::TAIL_TOL)) {
            return Err(Error::SeriesBudgetExceeded {
                lambda: lambda.as_f64(),
                ratio: ratio.as_f64(),
            });
        }
        let bound = self.rounding_bound(lambda);
        if !(bound <= R::lit(ROUNDING_TOL)) {
            return Err(Error::IllConditioned {
                lambda: lambda.as_f64(),
                bound: bound.as_f64(),
            });
        }
        Ok(())
    }

    /// [`eval`](Self::eval) guarded by [`check_budget`](Self::check_budget).
    pub fn eval_checked(&self, lambda: R) -> Result<R> {
        self.check_budget(lambda)?;
        Ok(self.eval(lambda))
    }
}

/// Band-edge series `cₙ = X̃⁽²ⁿ⁾(T) + X⁽²ⁿ⁾(T)` from coefficients generated
/// by the periodic ground solution.
pub fn discriminant_series<R: Real>(coeffs: &MainCoefficients<R>) -> Result<DiscriminantSeries<R>> {
    let f0 = coeffs.f0();
    let defect = (f0.last() - f0.first()).abs();
    if !(defect <= R::lit(spps::PERIODICITY_TOL) * f0.max_modulus()) {
        return Err(Error::NotPeriodic {
            defect: defect.as_f64(),
        });
    }
    let coefficients = (0..=coeffs.order())
        .map(|n| coeffs.x_tilde(2 * n).last() + coeffs.x(2 * n).last())
        .collect();
    Ok(DiscriminantSeries::new(
        coeffs.lambda_center(),
        coefficients,
        SeriesForm::BandEdge,
    ))
}

/// General-center series in powers of `λ - λ*`:
/// `cₙ = (f*(T)/f*(0)) X̃⁽²ⁿ⁾(T) + (f*(0)/f*(T)) X⁽²ⁿ⁾(T)
///      + (f*'(0) f*(T) - f*(0) f*'(T)) p(0) X⁽²ⁿ⁺¹⁾(T)`.
pub fn discriminant_series_star<R: Real>(
    problem: &SLProblem<R>,
    lambda_star: R,
    order: usize,
) -> Result<DiscriminantSeries<R>> {
    let seeds = SeedCoefficients::build(problem, lambda_star, 2 * order + 1)?;
    let pair = seeds.solutions(problem)?;
    let f_star = GridFunction::from_parts(&pair.f1, &pair.f2);
    let f_star_prime = GridFunction::from_parts(&pair.f1_prime, &pair.f2_prime);
    let coeffs =
        MainCoefficients::<Complex<R>>::build(&f_star, &f_star_prime, problem, lambda_star, order)?;

    let (f0, ft) = (f_star.first(), f_star.last());
    let (d0, dt) = (f_star_prime.first(), f_star_prime.last());
    let p0 = Complex::new(problem.p0(), R::zero());
    let a = ft / f0;
    let b = f0 / ft;
    let c = (d0 * ft - f0 * dt) * p0;

    let tol = R::lit(IMAG_TOL);
    let mut coefficients = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let cn = a * coeffs.x_tilde(2 * n).last()
            + b * coeffs.x(2 * n).last()
            + c * coeffs.x(2 * n + 1).last();
        if cn.im.abs() > tol * R::one().max(cn.re.abs()) {
            return Err(Error::ImaginaryResidue {
                index: n,
                residue: cn.im.as_f64(),
            });
        }
        coefficients.push(cn.re);
    }
    Ok(DiscriminantSeries::new(
        lambda_star,
        coefficients,
        SeriesForm::GeneralCenter,
    ))
}

/// Enclosure of `λ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds<R> {
    pub lower: R,
    pub upper: R,
}

/// `min q ≤ λ₀ ≤ (∫ q) / T`; the upper bound is the periodic Rayleigh
/// quotient with trial function `u ≡ 1`.
pub fn lambda0_bounds<R: Real>(problem: &SLProblem<R>) -> Bounds<R> {
    let q = problem.q();
    let lower = q.min();
    let upper = (q.integral() / problem.period()).max(lower);
    Bounds { lower, upper }
}

/// First zero of `D*(λ) - 2` with `λ* = min q - 1`.
///
/// The scan runs over `[min q - 1, mean q]` on [`LAMBDA0_MESH`] points,
/// padded slightly above the upper bound.
pub fn find_lambda0<R: Real>(problem: &SLProblem<R>, order: usize) -> Result<R> {
    let bounds = lambda0_bounds(problem);
    let lambda_star = bounds.lower - R::one();
    let series = discriminant_series_star(problem, lambda_star, order)?;
    let pad = R::lit(1e-3) * (bounds.upper - bounds.lower + R::one());
    let hi = bounds.upper + pad;
    series.check_budget(hi)?;

    let two = R::lit(2.0);
    let g = |l: R| series.eval(l) - two;
    let steps = R::from_usize(LAMBDA0_MESH - 1).unwrap();
    let mut a = lambda_star;
    let mut ga = g(a);
    for i in 1..LAMBDA0_MESH {
        let b = lambda_star + (hi - lambda_star) * R::from_usize(i).unwrap() / steps;
        let gb = g(b);
        if ga == R::zero() {
            return Ok(a);
        }
        if ga * gb < R::zero() || gb == R::zero() {
            return Ok(bisect(&g, a, b, ga));
        }
        a = b;
        ga = gb;
    }
    Err(Error::NoSignChange {
        lo: lambda_star.as_f64(),
        hi: hi.as_f64(),
    })
}

/// Bisection on a bracket `[a, b]` with `g(a) = ga` of opposite sign to
/// `g(b)` (or `g(b) = 0`), until the midpoint no longer moves. The final
/// bracket is far inside [`ROOT_TOL`] for every supported real type.
pub(crate) fn bisect<R: Real>(g: &impl Fn(R) -> R, mut a: R, mut b: R, mut ga: R) -> R {
    let half = R::lit(0.5);
    for _ in 0..400 {
        let m = (a + b) * half;
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == R::zero() {
            return m;
        }
        if (gm < R::zero()) == (ga < R::zero()) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    (a + b) * half
}
