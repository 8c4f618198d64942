//! End-to-end pipeline: `λ₀`, ground solution, coefficient families and
//! the band-edge discriminant series for one problem.

use std::time::{Duration, Instant};

use crate::darboux::{self, DarbouxPartner};
use crate::discriminant::{self, DiscriminantSeries};
use crate::error::Result;
use crate::problems::SLProblem;
use crate::scalar::Real;
use crate::spectrum::{self, BandStructure, BlochData, EigenScan, Eigenvalue};
use crate::spps::{self, GroundSolution, MainCoefficients, SeedCoefficients, SolutionPair};

/// Wall-clock time per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub lambda0: Duration,
    pub ground: Duration,
    pub coefficients: Duration,
}

#[derive(Debug, Clone)]
pub struct Analysis<R: Real> {
    pub problem: SLProblem<R>,
    pub order: usize,
    pub ground: GroundSolution<R>,
    pub coefficients: MainCoefficients<R>,
    pub series: DiscriminantSeries<R>,
    pub timings: Timings,
}

impl<R: Real> Analysis<R> {
    /// Runs the pipeline at series order `N`.
    pub fn run(problem: SLProblem<R>, order: usize) -> Result<Self> {
        let t = Instant::now();
        let lambda0 = discriminant::find_lambda0(&problem, order)?;
        let t_lambda0 = t.elapsed();

        let t = Instant::now();
        let seeds = SeedCoefficients::build(&problem, lambda0, 2 * order + 1)?;
        let ground = spps::periodic_ground_solution(&seeds.solutions(&problem)?)?;
        let t_ground = t.elapsed();

        let t = Instant::now();
        let coefficients =
            MainCoefficients::build(&ground.f0, &ground.f0_prime, &problem, lambda0, order)?;
        let series = discriminant::discriminant_series(&coefficients)?;
        let t_coeffs = t.elapsed();

        Ok(Analysis {
            problem,
            order,
            ground,
            coefficients,
            series,
            timings: Timings {
                lambda0: t_lambda0,
                ground: t_ground,
                coefficients: t_coeffs,
            },
        })
    }

    pub fn lambda0(&self) -> R {
        self.ground.lambda0
    }

    /// `D_N(λ)`, guarded by the series budget.
    pub fn discriminant(&self, lambda: R) -> Result<R> {
        self.series.eval_checked(lambda)
    }

    pub fn eigenvalues(&self, count: usize) -> Result<Vec<Eigenvalue<R>>> {
        spectrum::eigenvalues(&self.series, &self.problem, count)
    }

    pub fn scan_eigenvalues(&self, count: usize) -> EigenScan<R> {
        spectrum::scan_eigenvalues(&self.series, &self.problem, count)
    }

    pub fn band_structure(&self, lambda_min: R, lambda_max: R) -> Result<BandStructure<R>> {
        spectrum::band_structure(&self.series, &self.problem, lambda_min, lambda_max)
    }

    pub fn solutions(&self, lambda: R) -> Result<SolutionPair<R>> {
        self.coefficients.fundamental_solutions(lambda)
    }

    pub fn bloch(&self, lambda: R) -> Result<(BlochData<R>, SolutionPair<R>)> {
        let pair = self.solutions(lambda)?;
        Ok((spectrum::self_matching(&pair)?, pair))
    }

    pub fn partner(&self) -> Result<DarbouxPartner<R>> {
        darboux::factorize(&self.problem, &self.ground)
    }
}
