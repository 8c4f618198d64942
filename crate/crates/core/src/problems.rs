//! Periodic Sturm–Liouville problems `-(p f')' + q f = λ f`: the built-in
//! catalog, the TOML configuration surface and an independent ODE oracle
//! for the discriminant.

use std::fmt;
use std::sync::Arc;

use nalgebra::SVector;
use ode_solvers::{Dop853, OutputType, System};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::scalar::Real;

/// Off-grid evaluator of a coefficient.
pub type CoefficientFn<R> = Arc<dyn Fn(R) -> R + Send + Sync>;

/// Relative tolerance for `v(0) = v(T)` on the sampled coefficients.
const PERIODICITY_TOL: f64 = 1e-6;
/// Largest admissible neighbour difference, per unit length and relative to
/// `max(1, max|v|)`, before a coefficient is rejected as discontinuous.
const JUMP_BOUND: f64 = 1e4;

#[derive(Clone)]
struct Coefficients<R> {
    p: CoefficientFn<R>,
    q: CoefficientFn<R>,
}

/// Data `(p, q, T)` of a Hill-type equation, sampled on a shared grid.
#[derive(Clone)]
pub struct SLProblem<R: Real> {
    name: String,
    grid: Arc<Grid<R>>,
    p: GridFunction<R>,
    q: GridFunction<R>,
    p_prime: GridFunction<R>,
    analytic_p_prime: bool,
    functions: Option<Coefficients<R>>,
    config: Option<ProblemConfig>,
}

impl<R: Real> fmt::Debug for SLProblem<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SLProblem")
            .field("name", &self.name)
            .field("period", &self.grid.period())
            .field("n_points", &self.grid.len())
            .field("analytic", &self.functions.is_some())
            .finish()
    }
}

impl<R: Real> SLProblem<R> {
    /// Builds a problem from coefficient functions. When `p_prime` is
    /// absent, `p'` is taken from periodic finite differences of the
    /// sampled `p`.
    pub fn from_functions(
        name: impl Into<String>,
        period: R,
        n_points: usize,
        p: impl Fn(R) -> R + Send + Sync + 'static,
        q: impl Fn(R) -> R + Send + Sync + 'static,
        p_prime: Option<CoefficientFn<R>>,
    ) -> Result<Self> {
        let grid = Grid::uniform(period, n_points)?;
        let p: CoefficientFn<R> = Arc::new(p);
        let q: CoefficientFn<R> = Arc::new(q);
        let p_samples = GridFunction::sample(&grid, |x| p(x))?;
        let q_samples = GridFunction::sample(&grid, |x| q(x))?;
        let p_prime = match p_prime {
            Some(d) => Some(GridFunction::sample(&grid, |x| d(x))?),
            None => None,
        };
        let mut problem = Self::from_samples(name, p_samples, q_samples, p_prime)?;
        problem.functions = Some(Coefficients { p, q });
        Ok(problem)
    }

    /// Builds a tabulated problem from samples on one grid.
    pub fn from_samples(
        name: impl Into<String>,
        p: GridFunction<R>,
        q: GridFunction<R>,
        p_prime: Option<GridFunction<R>>,
    ) -> Result<Self> {
        let grid = Arc::clone(p.grid());
        validate_coefficient("p", &p)?;
        validate_coefficient("q", &q)?;
        if let Some((i, v)) = p
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > R::zero()))
        {
            return Err(Error::InvalidProblem(format!(
                "p must be positive, p({}) = {v}",
                grid.node(i)
            )));
        }
        let analytic_p_prime = p_prime.is_some();
        let p_prime = p_prime.unwrap_or_else(|| p.periodic_derivative());
        // Panics on a grid mismatch, before any numerics run.
        let _ = &p + &q;
        let _ = &p + &p_prime;
        Ok(SLProblem {
            name: name.into(),
            grid,
            p,
            q,
            p_prime,
            analytic_p_prime,
            functions: None,
            config: None,
        })
    }

    /// Same `p` and period, potential replaced by tabulated samples.
    pub fn with_potential(&self, name: impl Into<String>, q: GridFunction<R>) -> Result<Self> {
        validate_coefficient("q", &q)?;
        let _ = &self.p + &q;
        Ok(SLProblem {
            name: name.into(),
            grid: Arc::clone(&self.grid),
            p: self.p.clone(),
            q,
            p_prime: self.p_prime.clone(),
            analytic_p_prime: self.analytic_p_prime,
            functions: None,
            config: None,
        })
    }

    /// Builds the problem described by a parsed configuration.
    pub fn from_problem_config(config: &ProblemConfig, n_points: usize) -> Result<Self> {
        let resolved = config.resolve()?;
        let period = R::lit(resolved.period);
        let (p, q) = (resolved.p.clone(), resolved.q.clone());
        let p_prime = resolved.p.derivative(resolved.period);
        let name = resolved.name.clone();
        let mut problem = Self::from_functions(
            name,
            period,
            n_points,
            p.evaluator(resolved.period),
            q.evaluator(resolved.period),
            Some(Arc::new(p_prime.evaluator(resolved.period))),
        )?;
        problem.config = Some(resolved.to_config());
        Ok(problem)
    }

    /// Parses a TOML problem document.
    pub fn from_config(text: &str, n_points: usize) -> Result<Self> {
        Self::from_problem_config(&ProblemConfig::parse(text)?, n_points)
    }

    /// Mathieu problem `p = 1`, `q = 2r cos 2x` on `[0, π]`.
    pub fn mathieu(r: f64, n_points: usize) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidProblem(format!("Mathieu parameter {r}")));
        }
        Self::from_problem_config(&ProblemConfig::mathieu(r), n_points)
    }

    /// Constant coefficients `p = p0`, `q = q0` with period `T`.
    pub fn constant(p0: f64, q0: f64, period: f64, n_points: usize) -> Result<Self> {
        if !(p0 > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "p0 must be positive, got {p0}"
            )));
        }
        let config = ProblemConfig {
            name: Some(format!("constant(p={p0}, q={q0}, T={period})")),
            period: Some(period),
            p: Some(p0),
            q: Some(q0),
            ..ProblemConfig::default()
        };
        Self::from_problem_config(&config, n_points)
    }

    /// Free problem `p = 1`, `q = 0` on `[0, π]`.
    pub fn free(n_points: usize) -> Result<Self> {
        Self::from_problem_config(&ProblemConfig::free(), n_points)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> &Arc<Grid<R>> {
        &self.grid
    }

    pub fn period(&self) -> R {
        self.grid.period()
    }

    pub fn p(&self) -> &GridFunction<R> {
        &self.p
    }

    pub fn q(&self) -> &GridFunction<R> {
        &self.q
    }

    pub fn p_prime(&self) -> &GridFunction<R> {
        &self.p_prime
    }

    pub fn has_analytic_p_prime(&self) -> bool {
        self.analytic_p_prime
    }

    /// `p(0)`.
    pub fn p0(&self) -> R {
        self.p.first()
    }

    /// Evaluates `(p(x), q(x))` off the grid when the problem was built from
    /// functions.
    pub fn evaluate(&self, x: R) -> Option<(R, R)> {
        self.functions.as_ref().map(|c| ((c.p)(x), (c.q)(x)))
    }

    /// The configuration this problem was built from, if any.
    pub fn config(&self) -> Option<&ProblemConfig> {
        self.config.as_ref()
    }
}

fn validate_coefficient<R: Real>(label: &str, v: &GridFunction<R>) -> Result<()> {
    let grid = v.grid();
    let scale = R::one().max(v.max_modulus());
    let defect = (v.first() - v.last()).abs();
    if defect > R::lit(PERIODICITY_TOL) * scale {
        return Err(Error::InvalidProblem(format!(
            "{label} is not periodic: |{label}(0) - {label}(T)| = {defect}"
        )));
    }
    let jump = R::lit(JUMP_BOUND) * grid.step() * scale;
    if let Some(i) = v
        .values()
        .windows(2)
        .position(|w| (w[1] - w[0]).abs() > jump)
    {
        return Err(Error::InvalidProblem(format!(
            "{label} jumps between x = {} and x = {}",
            grid.node(i),
            grid.node(i + 1)
        )));
    }
    Ok(())
}

/// Truncated Fourier series `a0 + Σ_k a_k cos(2πkx/T) + b_k sin(2πkx/T)`,
/// `k = 1, 2, ...` indexing `a[k-1]` and `b[k-1]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fourier {
    #[serde(default)]
    pub a0: f64,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

impl Fourier {
    fn constant(c: f64) -> Self {
        Fourier {
            a0: c,
            ..Fourier::default()
        }
    }

    fn is_constant(&self) -> bool {
        self.a.iter().chain(&self.b).all(|&c| c == 0.0)
    }

    fn evaluator<R: Real>(&self, period: f64) -> impl Fn(R) -> R + Send + Sync + 'static {
        let omega = R::lit(2.0) * R::PI() / R::lit(period);
        let a0 = R::lit(self.a0);
        let a: Vec<R> = self.a.iter().map(|&c| R::lit(c)).collect();
        let b: Vec<R> = self.b.iter().map(|&c| R::lit(c)).collect();
        move |x: R| {
            let mut v = a0;
            for (k, &c) in a.iter().enumerate() {
                if c != R::zero() {
                    v += c * (omega * R::from_usize(k + 1).unwrap() * x).cos();
                }
            }
            for (k, &c) in b.iter().enumerate() {
                if c != R::zero() {
                    v += c * (omega * R::from_usize(k + 1).unwrap() * x).sin();
                }
            }
            v
        }
    }

    /// Term-by-term derivative.
    fn derivative(&self, period: f64) -> Fourier {
        let omega = 2.0 * std::f64::consts::PI / period;
        let n = self.a.len().max(self.b.len());
        let get = |v: &Vec<f64>, k: usize| v.get(k).copied().unwrap_or(0.0);
        Fourier {
            a0: 0.0,
            a: (0..n)
                .map(|k| omega * (k + 1) as f64 * get(&self.b, k))
                .collect(),
            b: (0..n)
                .map(|k| -omega * (k + 1) as f64 * get(&self.a, k))
                .collect(),
        }
    }
}

/// TOML problem document.
///
/// ```toml
/// name = "mathieu r=1"
/// T = 3.141592653589793
/// p = 1.0
/// [q_fourier]
/// a0 = 0.0
/// a = [2.0]     # 2 cos(2πx/T) = 2 cos 2x
/// b = []
/// ```
///
/// Alternatively `builtin = "mathieu"` with `r = <value>`, or
/// `builtin = "free"`. Each of `p`/`q` is given either as a constant or as
/// a `*_fourier` table; `q` defaults to 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(
        rename = "T",
        alias = "period",
        skip_serializing_if = "Option::is_none"
    )]
    pub period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_fourier: Option<Fourier>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_fourier: Option<Fourier>,
}

struct Resolved {
    name: String,
    period: f64,
    p: Fourier,
    q: Fourier,
}

impl Resolved {
    fn to_config(&self) -> ProblemConfig {
        let split = |f: &Fourier| {
            if f.is_constant() {
                (Some(f.a0), None)
            } else {
                (None, Some(f.clone()))
            }
        };
        let (p, p_fourier) = split(&self.p);
        let (q, q_fourier) = split(&self.q);
        ProblemConfig {
            name: Some(self.name.clone()),
            period: Some(self.period),
            builtin: None,
            r: None,
            p,
            q,
            p_fourier,
            q_fourier,
        }
    }
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn mathieu(r: f64) -> Self {
        ProblemConfig {
            builtin: Some("mathieu".into()),
            r: Some(r),
            ..ProblemConfig::default()
        }
    }

    pub fn free() -> Self {
        ProblemConfig {
            builtin: Some("free".into()),
            ..ProblemConfig::default()
        }
    }

    fn resolve(&self) -> Result<Resolved> {
        if let Some(builtin) = &self.builtin {
            let extra = self.period.is_some()
                || self.p.is_some()
                || self.q.is_some()
                || self.p_fourier.is_some()
                || self.q_fourier.is_some();
            if extra {
                return Err(Error::Config(format!(
                    "builtin '{builtin}' takes no T, p or q entries"
                )));
            }
            let period = std::f64::consts::PI;
            return match builtin.as_str() {
                "mathieu" => {
                    let r = self
                        .r
                        .ok_or_else(|| Error::Config("builtin 'mathieu' requires r".into()))?;
                    Ok(Resolved {
                        name: self
                            .name
                            .clone()
                            .unwrap_or_else(|| format!("mathieu(r={r})")),
                        period,
                        p: Fourier::constant(1.0),
                        q: Fourier {
                            a0: 0.0,
                            a: vec![2.0 * r],
                            b: vec![],
                        },
                    })
                }
                "free" => Ok(Resolved {
                    name: self.name.clone().unwrap_or_else(|| "free".into()),
                    period,
                    p: Fourier::constant(1.0),
                    q: Fourier::constant(0.0),
                }),
                other => Err(Error::Config(format!("unknown builtin '{other}'"))),
            };
        }
        if self.r.is_some() {
            return Err(Error::Config(
                "r is only valid with builtin = \"mathieu\"".into(),
            ));
        }
        let period = self
            .period
            .ok_or_else(|| Error::Config("missing period T".into()))?;
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::Config(format!(
                "period must be positive, got {period}"
            )));
        }
        let pick =
            |label: &str, c: Option<f64>, f: &Option<Fourier>, default: Option<f64>| match (c, f) {
                (Some(_), Some(_)) => Err(Error::Config(format!(
                    "give either {label} or {label}_fourier, not both"
                ))),
                (Some(c), None) => Ok(Fourier::constant(c)),
                (None, Some(f)) => Ok(f.clone()),
                (None, None) => default
                    .map(Fourier::constant)
                    .ok_or_else(|| Error::Config(format!("missing {label}"))),
            };
        let p = pick("p", self.p, &self.p_fourier, None)?;
        let q = pick("q", self.q, &self.q_fourier, Some(0.0))?;
        let all = [p.a0, q.a0]
            .into_iter()
            .chain(p.a.iter().chain(&p.b).chain(&q.a).chain(&q.b).copied());
        if let Some(bad) = all.into_iter().find(|c| !c.is_finite()) {
            return Err(Error::Config(format!("non-finite coefficient {bad}")));
        }
        Ok(Resolved {
            name: self.name.clone().unwrap_or_else(|| "custom".into()),
            period,
            p,
            q,
        })
    }
}

/// Endpoint values of the normalized fundamental pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEndpoint {
    pub f1: f64,
    pub f1_prime: f64,
    pub f2: f64,
    pub f2_prime: f64,
}

impl OracleEndpoint {
    /// `D = f1(T) + f2'(T)`.
    pub fn discriminant(&self) -> f64 {
        self.f1 + self.f2_prime
    }
}

/// Local tolerance of the adaptive oracle.
pub const ORACLE_TOL: f64 = 1e-12;

struct FirstOrderSystem<'a> {
    problem: &'a SLProblem<f64>,
    lambda: f64,
}

type State = SVector<f64, 5>;

impl System<f64, State> for FirstOrderSystem<'_> {
    // (u, v = p u') for both solutions; the fifth component carries x.
    fn system(&self, _x: f64, y: &State, dy: &mut State) {
        let (p, q) = self.problem.evaluate(y[4]).expect("analytic coefficients");
        let s = q - self.lambda;
        dy[0] = y[1] / p;
        dy[1] = s * y[0];
        dy[2] = y[3] / p;
        dy[3] = s * y[2];
        dy[4] = 1.0;
    }
}

impl SLProblem<f64> {
    /// Integrates `u' = v/p`, `v' = (q - λ) u` across one period from the
    /// normalized initial conditions and returns the endpoint values.
    ///
    /// Problems with off-grid coefficients use an adaptive 8th-order
    /// Dormand–Prince scheme. Tabulated problems fall back to classical RK4
    /// with step `2h`, whose stages land on grid nodes.
    pub fn ode_oracle(&self, lambda: f64) -> Result<OracleEndpoint> {
        let period = self.period();
        let p0 = self.p0();
        let y0 = State::new(1.0, 0.0, 0.0, p0, 0.0);
        let end = if self.functions.is_some() {
            let system = FirstOrderSystem {
                problem: self,
                lambda,
            };
            let mut solver = Dop853::new(system, 0.0, period, period, y0, ORACLE_TOL, ORACLE_TOL);
            // Sparse output ends exactly at `T`.
            solver.set_output(OutputType::Sparse);
            solver
                .integrate()
                .map_err(|e| Error::Integration(e.to_string()))?;
            *solver
                .y_out()
                .last()
                .ok_or_else(|| Error::Integration("no output".into()))?
        } else {
            self.grid_rk4(lambda, y0)
        };
        let p_end = self.p.last();
        Ok(OracleEndpoint {
            f1: end[0],
            f1_prime: end[1] / p_end,
            f2: end[2],
            f2_prime: end[3] / p_end,
        })
    }

    fn grid_rk4(&self, lambda: f64, y0: State) -> State {
        let p = self.p.values();
        let q = self.q.values();
        let h2 = 2.0 * self.grid.step();
        let rhs = |i: usize, y: &State| {
            let s = q[i] - lambda;
            State::new(y[1] / p[i], s * y[0], y[3] / p[i], s * y[2], 1.0)
        };
        let mut y = y0;
        for k in (0..self.grid.len() - 1).step_by(2) {
            let k1 = rhs(k, &y);
            let k2 = rhs(k + 1, &(y + k1 * (h2 / 2.0)));
            let k3 = rhs(k + 1, &(y + k2 * (h2 / 2.0)));
            let k4 = rhs(k + 2, &(y + k3 * h2));
            y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h2 / 6.0);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mathieu_potential_range() {
        let m = SLProblem::<f64>::mathieu(1.0, 7001).unwrap();
        assert!((m.q().max() - 2.0).abs() < 1e-15);
        assert!((m.q().min() + 2.0).abs() < 1e-12);
        let m5 = SLProblem::<f64>::mathieu(5.0, 7001).unwrap();
        assert!((m5.q().min() + 10.0).abs() < 1e-12);
    }

    #[test]
    fn mathieu_samples_match_closed_form() {
        let m = SLProblem::<f64>::mathieu(1.0, 7001).unwrap();
        for (x, v) in m.grid().nodes().zip(m.q().values()) {
            assert!((v - 2.0 * (2.0 * x).cos()).abs() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn mathieu_zero_is_free() {
        let m = SLProblem::<f64>::mathieu(0.0, 101).unwrap();
        assert!(m.q().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_problem_rejects_nonpositive_p() {
        assert!(SLProblem::<f64>::constant(-1.0, 0.0, PI, 101).is_err());
        assert!(SLProblem::<f64>::constant(0.0, 0.0, PI, 101).is_err());
        let ok = SLProblem::<f64>::constant(1.0, 3.0, PI, 101).unwrap();
        assert_eq!(ok.q().first(), 3.0);
    }

    #[test]
    fn config_fourier_mathieu() {
        let doc = "T = 3.141592653589793\np = 1\n[q_fourier]\na0 = 0\na = [2]\nb = []\n";
        let c = SLProblem::<f64>::from_config(doc, 7001).unwrap();
        let m = SLProblem::<f64>::mathieu(1.0, 7001).unwrap();
        for (a, b) in c.q().values().iter().zip(m.q().values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn config_free() {
        let c = SLProblem::<f64>::from_config("T = 1\np = 1\nq = 0\n", 11).unwrap();
        assert_eq!(c.period(), 1.0);
        assert!(c.q().values().iter().all(|&v| v == 0.0));
        assert!(c.p().values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn config_rejects_negative_p() {
        let doc = "T = 1\nq = 0\n[p_fourier]\na0 = 0.5\na = [1.0]\n";
        assert!(matches!(
            SLProblem::<f64>::from_config(doc, 101),
            Err(Error::InvalidProblem(_))
        ));
    }

    #[test]
    fn config_rejects_malformed() {
        assert!(matches!(
            SLProblem::<f64>::from_config("T = [", 11),
            Err(Error::Config(_))
        ));
        assert!(SLProblem::<f64>::from_config("p = 1", 11).is_err());
        assert!(SLProblem::<f64>::from_config("T = 1\np = 1\nbogus = 2", 11).is_err());
        assert!(SLProblem::<f64>::from_config("builtin = \"mathieu\"", 11).is_err());
    }

    #[test]
    fn builtin_round_trip_is_bit_exact() {
        let m = SLProblem::<f64>::mathieu(2.5, 1001).unwrap();
        let text = m.config().unwrap().to_toml().unwrap();
        let back = SLProblem::<f64>::from_config(&text, 1001).unwrap();
        assert_eq!(m.q().values(), back.q().values());
        assert_eq!(m.p().values(), back.p().values());
        assert_eq!(m.period(), back.period());
    }

    #[test]
    fn rejects_non_periodic_samples() {
        let err = SLProblem::<f64>::from_functions("ramp", 1.0, 101, |_| 1.0, |x| x, None);
        assert!(matches!(err, Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn analytic_p_prime_from_fourier() {
        let doc = "T = 6.283185307179586\nq = 0\n[p_fourier]\na0 = 2\nb = [0.5]\n";
        let prob = SLProblem::<f64>::from_config(doc, 2001).unwrap();
        assert!(prob.has_analytic_p_prime());
        for (x, v) in prob.grid().nodes().zip(prob.p_prime().values()) {
            assert!((v - 0.5 * x.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_free_particle() {
        let free = SLProblem::<f64>::free(101).unwrap();
        let e = free.ode_oracle(4.0).unwrap();
        assert!((e.f1 - 1.0).abs() < 1e-9);
        assert!(e.f1_prime.abs() < 1e-9);
        assert!(e.f2.abs() < 1e-9);
        assert!((e.f2_prime - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_oracle_matches_adaptive() {
        let m = SLProblem::<f64>::mathieu(1.0, 7001).unwrap();
        let tab = m.with_potential("tabulated", m.q().clone()).unwrap();
        let a = m.ode_oracle(5.0).unwrap();
        let b = tab.ode_oracle(5.0).unwrap();
        assert!((a.discriminant() - b.discriminant()).abs() < 1e-9);
    }
}
