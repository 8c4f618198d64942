//! Spectral parameter power series: seed solutions at a fixed `λ*`, the
//! periodic nodeless ground solution at the lowest band edge, and the
//! fundamental pair `f1`, `f2` for arbitrary `λ`.
//!
//! Every coefficient is a nested integral from 0, so all derivatives are
//! assembled from the recursion structure instead of differencing.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, DIV_EPS};
use crate::problems::SLProblem;
use crate::scalar::{Real, Scalar};

/// Largest admissible `|last term| / Σ|terms|` at `x = T`.
pub const TAIL_TOL: f64 = 1e-12;
/// Relative periodicity tolerance for the ground solution.
pub const PERIODICITY_TOL: f64 = 1e-6;

/// Seed families `X̃₀⁽ⁿ⁾`, `X₀⁽ⁿ⁾`, `n = 0..=M`, at a fixed `λ*`.
#[derive(Debug, Clone)]
pub struct SeedCoefficients<R: Real> {
    lambda_star: R,
    x_tilde: Vec<GridFunction<R>>,
    x: Vec<GridFunction<R>>,
}

impl<R: Real> SeedCoefficients<R> {
    /// `X̃₀` alternates `∫ X̃₀⁽ⁿ⁻¹⁾ (q - λ*)` (odd `n`) with `∫ X̃₀⁽ⁿ⁻¹⁾ / p`
    /// (even `n`); `X₀` uses the opposite parity.
    pub fn build(problem: &SLProblem<R>, lambda_star: R, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidProblem(
                "seed order must be at least 1".into(),
            ));
        }
        let grid = problem.grid();
        let shifted = problem.q().map(|v| v - lambda_star);
        let inv_p = problem.p().reciprocal()?;
        let one = GridFunction::constant(grid, R::one());

        let mut x_tilde = Vec::with_capacity(order + 1);
        let mut x = Vec::with_capacity(order + 1);
        x_tilde.push(one.clone());
        x.push(one);
        for n in 1..=order {
            let (wt, w) = if n % 2 == 1 {
                (&shifted, &inv_p)
            } else {
                (&inv_p, &shifted)
            };
            let next_tilde = (&x_tilde[n - 1] * wt).antiderivative();
            let next = (&x[n - 1] * w).antiderivative();
            x_tilde.push(next_tilde);
            x.push(next);
        }
        Ok(SeedCoefficients {
            lambda_star,
            x_tilde,
            x,
        })
    }

    pub fn lambda_star(&self) -> R {
        self.lambda_star
    }

    pub fn order(&self) -> usize {
        self.x.len() - 1
    }

    pub fn x_tilde(&self, n: usize) -> &GridFunction<R> {
        &self.x_tilde[n]
    }

    pub fn x(&self, n: usize) -> &GridFunction<R> {
        &self.x[n]
    }

    /// `f₀,₁ = Σ_even X̃₀⁽ⁿ⁾`, `f₀,₂ = p(0) Σ_odd X₀⁽ⁿ⁾` and their
    /// derivatives. Each even-step member differentiates to `(1/p)` times
    /// its predecessor, so `p f₀,₁' = Σ_odd X̃₀⁽ᵐ⁾` and
    /// `p f₀,₂' = p(0) Σ_even X₀⁽ᵐ⁾`, truncated consistently with the sums.
    pub fn solutions(&self, problem: &SLProblem<R>) -> Result<SolutionPair<R>> {
        let m = self.order();
        let grid = problem.grid();
        let p0 = problem.p0();
        let inv_p = problem.p().reciprocal()?;

        // Smallest terms first.
        let sum_over = |family: &[GridFunction<R>], indices: &mut dyn Iterator<Item = usize>| {
            let mut acc = GridFunction::zeros(grid);
            for n in indices {
                acc = &acc + &family[n];
            }
            acc
        };
        let f1 = sum_over(&self.x_tilde, &mut (0..=m).rev().filter(|n| n % 2 == 0));
        let pf1 = sum_over(
            &self.x_tilde,
            &mut (0..=m).rev().filter(|n| n % 2 == 1 && n + 1 <= m),
        );
        let f2 = sum_over(&self.x, &mut (0..=m).rev().filter(|n| n % 2 == 1)).scale(p0);
        let pf2 = sum_over(
            &self.x,
            &mut (0..=m).rev().filter(|n| n % 2 == 0 && n + 1 <= m),
        )
        .scale(p0);

        Ok(SolutionPair {
            lambda: self.lambda_star,
            f1_prime: &pf1 * &inv_p,
            f2_prime: &pf2 * &inv_p,
            f1,
            f2,
        })
    }
}

/// Normalized pair with `f1(0) = 1, f1'(0) = 0, f2(0) = 0, f2'(0) = 1`.
#[derive(Debug, Clone)]
pub struct SolutionPair<S: Scalar> {
    pub lambda: S::Real,
    pub f1: GridFunction<S>,
    pub f2: GridFunction<S>,
    pub f1_prime: GridFunction<S>,
    pub f2_prime: GridFunction<S>,
}

impl<S: Scalar> SolutionPair<S> {
    /// `|f1(0)-1| + |f1'(0)| + |f2(0)| + |f2'(0)-1|`.
    pub fn initial_defect(&self) -> S::Real {
        (self.f1.first() - S::one()).modulus()
            + self.f1_prime.first().modulus()
            + self.f2.first().modulus()
            + (self.f2_prime.first() - S::one()).modulus()
    }

    /// `p (f1 f2' - f1' f2)` at every node.
    pub fn wronskian(&self, p: &GridFunction<S::Real>) -> GridFunction<S> {
        let w = &(&self.f1 * &self.f2_prime) - &(&self.f1_prime * &self.f2);
        w.mul_real(p)
    }

    /// `f1(T) + f2'(T)`.
    pub fn discriminant(&self) -> S {
        self.f1.last() + self.f2_prime.last()
    }
}

/// Nodeless periodic solution at the lowest band edge.
#[derive(Debug, Clone)]
pub struct GroundSolution<R: Real> {
    pub lambda0: R,
    pub alpha: R,
    pub f0: GridFunction<R>,
    pub f0_prime: GridFunction<R>,
}

/// Combines a seed pair computed at a band edge `λ₀` into the periodic
/// solution `f₀ = f₀,₁ + α f₀,₂`, `α = (f₀,₂'(T) - f₀,₁(T)) / (2 f₀,₂(T))`.
pub fn periodic_ground_solution<R: Real>(pair: &SolutionPair<R>) -> Result<GroundSolution<R>> {
    let eps = R::lit(DIV_EPS);
    let per_tol = R::lit(PERIODICITY_TOL);
    let f01_t = pair.f1.last();
    let f02_t = pair.f2.last();
    let f02p_t = pair.f2_prime.last();
    let mismatch = f02p_t - f01_t;

    let alpha = if f02_t.abs() <= eps * pair.f2.max_modulus() {
        let scale = pair.f1.max_modulus().max(R::one());
        if mismatch.abs() <= per_tol * scale {
            R::zero()
        } else {
            return Err(Error::DegenerateEndpoint);
        }
    } else {
        mismatch / (R::lit(2.0) * f02_t)
    };

    let f0 = &pair.f1 + &pair.f2.scale(alpha);
    let f0_prime = &pair.f1_prime + &pair.f2_prime.scale(alpha);
    let tolerance = per_tol * f0.max_modulus();
    let defect = (f0.last() - f0.first()).abs();
    if !(defect <= tolerance) {
        return Err(Error::NotBandEdge {
            defect: defect.as_f64(),
            tolerance: tolerance.as_f64(),
        });
    }
    f0.reciprocal()?;
    Ok(GroundSolution {
        lambda0: pair.lambda,
        alpha,
        f0,
        f0_prime,
    })
}

/// Families `X̃⁽ⁿ⁾`, `X⁽ⁿ⁾`, `n = 0..=2N+1`, generated by a nodeless
/// solution `f₀` at `λ_c`.
#[derive(Debug, Clone)]
pub struct MainCoefficients<S: Scalar> {
    lambda_center: S::Real,
    order: usize,
    x_tilde: Vec<GridFunction<S>>,
    x: Vec<GridFunction<S>>,
    f0: GridFunction<S>,
    f0_prime: GridFunction<S>,
    f0_sq: GridFunction<S>,
    inv_p_f0_sq: GridFunction<S>,
    p0: S::Real,
}

/// The four spectral parameter power series at one `Δλ`.
#[derive(Debug, Clone)]
pub struct Sigmas<S: Scalar> {
    pub delta: S,
    /// `Σ̃₀ = Σ X̃⁽²ⁿ⁾ Δλⁿ`.
    pub tilde0: GridFunction<S>,
    /// `Σ̃₁ / Δλ = Σ_{n≥1} X̃⁽²ⁿ⁻¹⁾ Δλⁿ⁻¹`.
    pub tilde1_deflated: GridFunction<S>,
    /// `Σ₀ = Σ X⁽²ⁿ⁾ Δλⁿ`.
    pub zero: GridFunction<S>,
    /// `Σ₁ = Σ_{n≥1} X⁽²ⁿ⁻¹⁾ Δλⁿ⁻¹`.
    pub one: GridFunction<S>,
}

impl<S: Scalar> MainCoefficients<S> {
    /// `X̃` alternates `∫ X̃⁽ⁿ⁻¹⁾ f₀²` (odd) with `-∫ X̃⁽ⁿ⁻¹⁾ / (p f₀²)`
    /// (even); `X` uses the opposite parity.
    pub fn build(
        f0: &GridFunction<S>,
        f0_prime: &GridFunction<S>,
        problem: &SLProblem<S::Real>,
        lambda_center: S::Real,
        order: usize,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidProblem(
                "series order must be at least 1".into(),
            ));
        }
        let f0_sq = f0 * f0;
        let inv_p_f0_sq = f0_sq.mul_real(problem.p()).reciprocal()?;
        let neg_inv = -&inv_p_f0_sq;
        let one = GridFunction::constant(problem.grid(), S::one());
        let top = 2 * order + 1;

        let mut x_tilde = Vec::with_capacity(top + 1);
        let mut x = Vec::with_capacity(top + 1);
        x_tilde.push(one.clone());
        x.push(one);
        for n in 1..=top {
            let (wt, w) = if n % 2 == 1 {
                (&f0_sq, &neg_inv)
            } else {
                (&neg_inv, &f0_sq)
            };
            let next_tilde = (&x_tilde[n - 1] * wt).antiderivative();
            let next = (&x[n - 1] * w).antiderivative();
            x_tilde.push(next_tilde);
            x.push(next);
        }
        Ok(MainCoefficients {
            lambda_center,
            order,
            x_tilde,
            x,
            f0: f0.clone(),
            f0_prime: f0_prime.clone(),
            f0_sq,
            inv_p_f0_sq,
            p0: problem.p0(),
        })
    }

    pub fn lambda_center(&self) -> S::Real {
        self.lambda_center
    }

    /// Series order `N`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn x_tilde(&self, n: usize) -> &GridFunction<S> {
        &self.x_tilde[n]
    }

    pub fn x(&self, n: usize) -> &GridFunction<S> {
        &self.x[n]
    }

    pub fn f0(&self) -> &GridFunction<S> {
        &self.f0
    }

    pub fn f0_prime(&self) -> &GridFunction<S> {
        &self.f0_prime
    }

    pub fn f0_squared(&self) -> &GridFunction<S> {
        &self.f0_sq
    }

    /// `1 / (p f₀²)`.
    pub fn inv_p_f0_squared(&self) -> &GridFunction<S> {
        &self.inv_p_f0_sq
    }

    /// Evaluates the four series at every node by Horner's scheme in `Δλ`.
    ///
    /// Fails with [`Error::SeriesBudgetExceeded`] when the last retained
    /// term of any series contributes more than [`TAIL_TOL`] of the sum of
    /// term magnitudes at `x = T`.
    pub fn sigmas(&self, lambda: S::Real) -> Result<Sigmas<S>> {
        let delta = S::from_real(lambda - self.lambda_center);
        let n = self.order;
        let families = [
            strided(&self.x_tilde, n, 0),
            strided(&self.x_tilde, n, 1),
            strided(&self.x, n, 0),
            strided(&self.x, n, 1),
        ];
        for fam in &families {
            let ratio = tail_ratio(fam.iter().map(|g| g.last()), delta);
            if ratio > S::Real::lit(TAIL_TOL) {
                return Err(Error::SeriesBudgetExceeded {
                    lambda: lambda.as_f64(),
                    ratio: ratio.as_f64(),
                });
            }
        }
        let [t0, t1, z0, z1] = families.map(|fam| horner(&fam, delta));
        Ok(Sigmas {
            delta,
            tilde0: t0,
            tilde1_deflated: t1,
            zero: z0,
            one: z1,
        })
    }

    /// `f1`, `f2` and their derivatives at `λ`.
    ///
    /// `f1 = f₀ Σ̃₀ / f₀(0) + p(0) f₀'(0) f₀ Σ₁`, `f2 = -p(0) f₀(0) f₀ Σ₁`,
    /// with `Σ̃₀' = -Σ̃₁/(p f₀²)` and `Σ₁' = -Σ₀/(p f₀²)`.
    pub fn fundamental_solutions(&self, lambda: S::Real) -> Result<SolutionPair<S>> {
        let sig = self.sigmas(lambda)?;
        let p0 = S::from_real(self.p0);
        let f00 = self.f0.first();
        let a = S::one() / f00;
        let b = p0 * self.f0_prime.first();
        let c = -(p0 * f00);

        let d_tilde0 = (&sig.tilde1_deflated * &self.inv_p_f0_sq).scale(-sig.delta);
        let d_one = -&(&sig.zero * &self.inv_p_f0_sq);

        let f0 = &self.f0;
        let f0p = &self.f0_prime;
        let f0_s1 = f0 * &sig.one;
        let f0_s1_prime = &(f0p * &sig.one) + &(f0 * &d_one);

        let f1 = &(f0 * &sig.tilde0).scale(a) + &f0_s1.scale(b);
        let f1_prime = &(&(f0p * &sig.tilde0) + &(f0 * &d_tilde0)).scale(a) + &f0_s1_prime.scale(b);
        let f2 = f0_s1.scale(c);
        let f2_prime = f0_s1_prime.scale(c);
        Ok(SolutionPair {
            lambda,
            f1,
            f2,
            f1_prime,
            f2_prime,
        })
    }
}

fn strided<S: Scalar>(
    family: &[GridFunction<S>],
    n: usize,
    offset: usize,
) -> Vec<&GridFunction<S>> {
    (0..=n).map(|k| &family[2 * k + offset]).collect()
}

/// `|c_N Δⁿ| / Σ|c_k Δᵏ|`.
pub(crate) fn tail_ratio<S: Scalar>(coeffs: impl Iterator<Item = S>, delta: S) -> S::Real {
    let d = delta.modulus();
    let mut power = S::Real::one();
    let mut total = S::Real::zero();
    let mut last = S::Real::zero();
    for c in coeffs {
        last = c.modulus() * power;
        total += last;
        power *= d;
    }
    if total > S::Real::zero() {
        last / total
    } else {
        S::Real::zero()
    }
}

fn horner<S: Scalar>(family: &[&GridFunction<S>], delta: S) -> GridFunction<S> {
    let grid = family[0].grid();
    let mut acc = vec![S::zero(); grid.len()];
    for g in family.iter().rev() {
        for (a, &v) in acc.iter_mut().zip(g.values()) {
            *a = *a * delta + v;
        }
    }
    GridFunction::new(grid, acc).expect("finite Horner sums")
}
