//! Factorization of the Hill operator at the ground state, the Darboux map
//! to the SUSY partner problem, partner solutions built from the same
//! coefficient families, and the double-transform involution.

use crate::discriminant::{discriminant_series, DiscriminantSeries};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::problems::SLProblem;
use crate::scalar::Real;
use crate::spps::{GroundSolution, MainCoefficients, SolutionPair, PERIODICITY_TOL};

/// Pointwise tolerance, relative to `max(1, max|q|)`, for the factorization
/// identity and the involution checks.
pub const IDENTITY_TOL: f64 = 1e-5;
/// Largest admissible `|D - D̃|` on the probe mesh.
pub const INVARIANCE_TOL: f64 = 1e-6;
/// Number of probe points used by [`partner_discriminant`].
pub const PROBE_COUNT: usize = 20;

/// Factorized problem and its SUSY partner.
#[derive(Debug, Clone)]
pub struct DarbouxPartner<R: Real> {
    pub lambda0: R,
    /// Superpotential `Φ = -√p f₀'/f₀`.
    pub phi: GridFunction<R>,
    pub phi_prime: GridFunction<R>,
    pub q_tilde: GridFunction<R>,
    /// Partner ground state `1/(√p f₀)`.
    pub f0_tilde: GridFunction<R>,
    pub f0_tilde_prime: GridFunction<R>,
    pub problem: SLProblem<R>,
    pub problem_tilde: SLProblem<R>,
    sqrt_p: GridFunction<R>,
    sqrt_p_prime: GridFunction<R>,
    sqrt_p_second: GridFunction<R>,
    f0: GridFunction<R>,
    /// Max pointwise defect of `Φ² - (√p Φ)' + λ₀ - q`.
    pub residual: R,
}

fn identity_scale<R: Real>(q: &GridFunction<R>) -> R {
    R::lit(IDENTITY_TOL) * R::one().max(q.max_modulus())
}

fn max_abs_diff<R: Real>(a: &GridFunction<R>, b: &GridFunction<R>) -> R {
    (a - b).max_modulus()
}

/// `f''` from `(p f')' = (q - λ) f`.
fn second_derivative<R: Real>(
    problem: &SLProblem<R>,
    q: &GridFunction<R>,
    lambda: R,
    f: &GridFunction<R>,
    f_prime: &GridFunction<R>,
) -> Result<GridFunction<R>> {
    let rhs = &(&q.map(|v| v - lambda) * f) - &(problem.p_prime() * f_prime);
    Ok(&rhs * &problem.p().reciprocal()?)
}

/// `Φ'` for `Φ = -√p f'/f`, with `f''` taken from the equation.
fn superpotential_derivative<R: Real>(
    sqrt_p: &GridFunction<R>,
    sqrt_p_prime: &GridFunction<R>,
    log_derivative: &GridFunction<R>,
    f_second_over_f: &GridFunction<R>,
) -> GridFunction<R> {
    let u2 = log_derivative * log_derivative;
    -&(&(sqrt_p_prime * log_derivative) + &(sqrt_p * &(f_second_over_f - &u2)))
}

/// Factorizes `-(p f')' + q f - λ₀ f` with the nodeless periodic ground
/// solution and builds the partner potential
/// `q̃ = q + 2√p Φ' - √p (√p)''`.
pub fn factorize<R: Real>(
    problem: &SLProblem<R>,
    ground: &GroundSolution<R>,
) -> Result<DarbouxPartner<R>> {
    let lambda0 = ground.lambda0;
    let f0 = &ground.f0;
    let inv_f0 = f0.reciprocal()?;
    let sqrt_p = problem.p().sqrt();
    let sqrt_p_prime = &problem.p_prime().scale(R::lit(0.5)) * &sqrt_p.reciprocal()?;
    let sqrt_p_second = sqrt_p_prime.periodic_derivative();

    let u = &ground.f0_prime * &inv_f0;
    let phi = -&(&sqrt_p * &u);
    let f0_second = second_derivative(problem, problem.q(), lambda0, f0, &ground.f0_prime)?;
    let phi_prime = superpotential_derivative(&sqrt_p, &sqrt_p_prime, &u, &(&f0_second * &inv_f0));
    let q_tilde =
        &(problem.q() + &(&sqrt_p * &phi_prime).scale(R::lit(2.0))) - &(&sqrt_p * &sqrt_p_second);

    let sqrt_p_f0 = &sqrt_p * f0;
    let f0_tilde = sqrt_p_f0.reciprocal()?;
    let f0_tilde_prime =
        -&(&(&(&sqrt_p_prime * f0) + &(&sqrt_p * &ground.f0_prime)) * &(&f0_tilde * &f0_tilde));

    let lhs = &(&(&phi * &phi) - &(&sqrt_p * &phi).periodic_derivative()).map(|v| v + lambda0);
    let residual = max_abs_diff(&lhs, problem.q());
    if !(residual <= identity_scale(problem.q())) {
        return Err(Error::FactorizationResidual {
            residual: residual.as_f64(),
        });
    }

    let per_tol = R::lit(PERIODICITY_TOL);
    for g in [&phi, &q_tilde, &f0_tilde] {
        let defect = (g.last() - g.first()).abs();
        if !(defect <= per_tol * R::one().max(g.max_modulus())) {
            return Err(Error::NotPeriodic {
                defect: defect.as_f64(),
            });
        }
    }

    let problem_tilde =
        problem.with_potential(format!("{} (partner)", problem.name()), q_tilde.clone())?;
    Ok(DarbouxPartner {
        lambda0,
        phi,
        phi_prime,
        q_tilde,
        f0_tilde,
        f0_tilde_prime,
        problem: problem.clone(),
        problem_tilde,
        sqrt_p,
        sqrt_p_prime,
        sqrt_p_second,
        f0: f0.clone(),
        residual,
    })
}

impl<R: Real> DarbouxPartner<R> {
    pub fn sqrt_p(&self) -> &GridFunction<R> {
        &self.sqrt_p
    }

    /// `(√p)'`.
    pub fn sqrt_p_prime(&self) -> &GridFunction<R> {
        &self.sqrt_p_prime
    }

    /// `f̃ = √p f' + Φ f`.
    pub fn transform(&self, f: &GridFunction<R>, f_prime: &GridFunction<R>) -> GridFunction<R> {
        darboux_transform(self, f, f_prime)
    }
}

/// `f̃ = √p f' + Φ f`.
pub fn darboux_transform<R: Real>(
    partner: &DarbouxPartner<R>,
    f: &GridFunction<R>,
    f_prime: &GridFunction<R>,
) -> GridFunction<R> {
    &(&partner.sqrt_p * f_prime) + &(&partner.phi * f)
}

/// Normalized fundamental pair of the partner equation at `λ`:
/// `f̃₁ = C₁ g Σ₀ + C₃ g Σ̃₁/Δλ`, `f̃₂ = C₂ g Σ̃₁/Δλ` with `g = 1/(√p f₀)`,
/// `C₁ = √p(0) f₀(0)`, `C₂ = √p(0)/f₀(0)`, `C₃ = ((√p)'(0) - Φ(0))/f₀(0)`.
///
/// Derivatives use `Σ₀' = Δλ f₀² Σ₁` and `(Σ̃₁/Δλ)' = f₀² Σ̃₀`.
pub fn partner_solutions<R: Real>(
    partner: &DarbouxPartner<R>,
    coeffs: &MainCoefficients<R>,
    lambda: R,
) -> Result<SolutionPair<R>> {
    let sig = coeffs.sigmas(lambda)?;
    let f0_sq = coeffs.f0_squared();
    let g = &partner.f0_tilde;
    let gp = &partner.f0_tilde_prime;
    let f00 = partner.f0.first();
    let sp0 = partner.sqrt_p.first();
    let c1 = sp0 * f00;
    let c2 = sp0 / f00;
    let c3 = (partner.sqrt_p_prime.first() - partner.phi.first()) / f00;

    let t1 = &sig.tilde1_deflated;
    let d_zero = (f0_sq * &sig.one).scale(sig.delta);
    let d_t1 = f0_sq * &sig.tilde0;

    let g_t1 = g * t1;
    let g_t1_prime = &(gp * t1) + &(g * &d_t1);
    let g_z = g * &sig.zero;
    let g_z_prime = &(gp * &sig.zero) + &(g * &d_zero);

    Ok(SolutionPair {
        lambda,
        f1: &g_z.scale(c1) + &g_t1.scale(c3),
        f1_prime: &g_z_prime.scale(c1) + &g_t1_prime.scale(c3),
        f2: g_t1.scale(c2),
        f2_prime: g_t1_prime.scale(c2),
    })
}

/// Largest `|D(λ) - (f̃₁(T) + f̃₂'(T))|` over `probes`, and where it occurs.
pub fn invariance_defect<R: Real>(
    partner: &DarbouxPartner<R>,
    coeffs: &MainCoefficients<R>,
    series: &DiscriminantSeries<R>,
    probes: &[R],
) -> Result<(R, R)> {
    let mut worst = (R::zero(), series.lambda_center());
    for &lambda in probes {
        let d_tilde = partner_solutions(partner, coeffs, lambda)?.discriminant();
        let dev = (series.eval(lambda) - d_tilde).abs();
        if !(dev <= worst.0) {
            worst = (dev, lambda);
        }
    }
    Ok(worst)
}

/// `count` equispaced probes from `λ₀ - κ` up to `λ₀ + 25κ`,
/// `κ = mean(p)(π/T)²`, pulled in until the series budget admits them.
pub fn default_probes<R: Real>(
    coeffs: &MainCoefficients<R>,
    problem: &SLProblem<R>,
    count: usize,
) -> Vec<R> {
    let k = R::PI() / problem.period();
    let kappa = problem.p().integral() / problem.period() * k * k;
    let center = coeffs.lambda_center();
    let lo = center - kappa;
    let mut span = R::lit(26.0) * kappa;
    while span > kappa && coeffs.sigmas(lo + span).is_err() {
        span = span * R::lit(0.8);
    }
    let steps = R::from_usize(count.max(2) - 1).unwrap();
    (0..count.max(2))
        .map(|i| lo + span * R::from_usize(i).unwrap() / steps)
        .collect()
}

/// Band-edge series of the partner problem. The coefficients coincide with
/// those of the original problem; the identity `D = D̃` is verified at
/// [`PROBE_COUNT`] probe points through [`partner_solutions`].
pub fn partner_discriminant<R: Real>(
    partner: &DarbouxPartner<R>,
    coeffs: &MainCoefficients<R>,
) -> Result<DiscriminantSeries<R>> {
    let series = discriminant_series(coeffs)?;
    let probes = default_probes(coeffs, &partner.problem, PROBE_COUNT);
    let (dev, lambda) = invariance_defect(partner, coeffs, &series, &probes)?;
    if !(dev <= R::lit(INVARIANCE_TOL)) {
        return Err(Error::SusyInvarianceViolated {
            deviation: dev.as_f64(),
            lambda: lambda.as_f64(),
        });
    }
    Ok(series)
}

/// Second factorization, seeded by the partner ground state.
#[derive(Debug, Clone)]
pub struct DoubleDarboux<R: Real> {
    /// `Φ₁ = -√p f̃₀'/f̃₀`.
    pub phi1: GridFunction<R>,
    /// `q̃̃ = q̃ + 2√p Φ₁' - √p (√p)''`.
    pub q_tilde_tilde: GridFunction<R>,
    /// `max|Φ₁ - ((√p)' - Φ)|`.
    pub phi_defect: R,
    /// `max|q̃̃ - q|`.
    pub q_defect: R,
}

/// Applies the factorization to the partner and checks that it returns to
/// the original potential.
pub fn double_darboux<R: Real>(partner: &DarbouxPartner<R>) -> Result<DoubleDarboux<R>> {
    let g = &partner.f0_tilde;
    let gp = &partner.f0_tilde_prime;
    let inv_g = g.reciprocal()?;
    let u = gp * &inv_g;
    let sp = &partner.sqrt_p;
    let phi1 = -&(sp * &u);
    let g_second = second_derivative(
        &partner.problem_tilde,
        &partner.q_tilde,
        partner.lambda0,
        g,
        gp,
    )?;
    let phi1_prime =
        superpotential_derivative(sp, &partner.sqrt_p_prime, &u, &(&g_second * &inv_g));
    let q_tilde_tilde = &(&partner.q_tilde + &(sp * &phi1_prime).scale(R::lit(2.0)))
        - &(sp * &partner.sqrt_p_second);

    let q = partner.problem.q();
    let tol = identity_scale(q);
    let phi_defect = max_abs_diff(&phi1, &(&partner.sqrt_p_prime - &partner.phi));
    if !(phi_defect <= tol) {
        return Err(Error::InvolutionFailed {
            what: "superpotential",
            deviation: phi_defect.as_f64(),
        });
    }
    let q_defect = max_abs_diff(&q_tilde_tilde, q);
    if !(q_defect <= tol) {
        return Err(Error::InvolutionFailed {
            what: "potential",
            deviation: q_defect.as_f64(),
        });
    }
    Ok(DoubleDarboux {
        phi1,
        q_tilde_tilde,
        phi_defect,
        q_defect,
    })
}
