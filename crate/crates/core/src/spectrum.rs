//! Band edges, stability bands and Bloch solutions from a discriminant
//! series and a fundamental pair.

use num_complex::Complex;

use crate::discriminant::{bisect, DiscriminantSeries};
use crate::error::{Error, Result};
use crate::grid::DIV_EPS;
use crate::problems::SLProblem;
use crate::scalar::{Real, Scalar};
use crate::spps::SolutionPair;

/// Extrema of `|D|` closer than this to 2 are reported as double roots.
pub const TOUCH_TOL: f64 = 1e-7;
/// Relative agreement required between the two ways of computing `β±`.
pub const BLOCH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// `D(λ) = 2`.
    Periodic,
    /// `D(λ) = -2`.
    Antiperiodic,
}

impl Boundary {
    /// Value of `D` on this boundary.
    pub fn target<R: Real>(self) -> R {
        match self {
            Boundary::Periodic => R::lit(2.0),
            Boundary::Antiperiodic => R::lit(-2.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Antiperiodic => "antiperiodic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue<R> {
    pub index: usize,
    pub value: R,
    pub boundary: Boundary,
}

/// Result of an upward root scan.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenScan<R> {
    pub eigenvalues: Vec<Eigenvalue<R>>,
    /// First `λ` at which the series tail test failed, if the scan stopped
    /// on the truncation budget.
    pub budget_limit: Option<R>,
}

/// Mesh step near `λ`: a fixed fraction of the local spacing of band
/// edges, which grows like `√λ` in units of `κ = mean(p) (π/T)²`.
fn mesh_step<R: Real>(kappa: R, offset: R) -> R {
    R::lit(1e-3) * kappa * (R::one() + (offset.abs() / kappa).sqrt())
}

/// `κ = mean(p) (π/T)²`.
fn spectral_scale<R: Real>(problem: &SLProblem<R>) -> R {
    let k = R::PI() / problem.period();
    problem.p().integral() / problem.period() * k * k
}

struct Scanner<'a, R: Real> {
    series: &'a DiscriminantSeries<R>,
}

impl<R: Real> Scanner<'_, R> {
    /// Roots of `D ∓ 2` in `(a, b]`, appended in increasing order. `D` is
    /// split at interior critical points into monotone pieces.
    fn step(&self, a: R, b: R, out: &mut Vec<(R, Boundary)>) {
        let s = self.series;
        let da = s.derivative(a);
        let db = s.derivative(b);
        let mut pieces = vec![a];
        let mut critical = None;
        if da * db < R::zero() {
            let c = bisect(&|l| s.derivative(l), a, b, da);
            pieces.push(c);
            critical = Some(c);
        }
        pieces.push(b);

        // Overshoot past ±2 up to the Horner rounding bound counts as touching.
        let touching = critical.and_then(|c| {
            let dc = s.eval(c);
            let gap = R::lit(2.0) - dc.abs();
            let noise = R::from_usize(2 * s.order().max(1)).unwrap() * s.rounding_bound(c);
            (gap >= -noise && gap <= R::lit(TOUCH_TOL)).then_some((c, dc))
        });

        let touch_boundary = |dc: R| {
            if dc > R::zero() {
                Boundary::Periodic
            } else {
                Boundary::Antiperiodic
            }
        };

        for w in pieces.windows(2) {
            let (u, v) = (w[0], w[1]);
            // Pieces adjacent to a touching point skip that level.
            let skip = touching
                .filter(|&(c, _)| c == u || c == v)
                .map(|(_, dc)| touch_boundary(dc));
            let mut found = Vec::new();
            for boundary in [Boundary::Periodic, Boundary::Antiperiodic] {
                if skip == Some(boundary) {
                    continue;
                }
                let t: R = boundary.target();
                let g = |l: R| s.eval(l) - t;
                let (gu, gv) = (g(u), g(v));
                if gv == R::zero() {
                    found.push((v, boundary));
                } else if gu * gv < R::zero() {
                    found.push((bisect(&g, u, v, gu), boundary));
                }
            }
            found.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            out.extend(found);
            if let Some((c, dc)) = touching.filter(|&(c, _)| c == v) {
                out.push((c, touch_boundary(dc)));
                out.push((c, touch_boundary(dc)));
            }
        }
    }
}

/// Scans upward from just below the series center and returns the first
/// `count` band edges in order.
///
/// Stops early, with `budget_limit` set, once the series tail test fails.
pub fn scan_eigenvalues<R: Real>(
    series: &DiscriminantSeries<R>,
    problem: &SLProblem<R>,
    count: usize,
) -> EigenScan<R> {
    let kappa = spectral_scale(problem);
    let scanner = Scanner { series };
    let center = series.lambda_center();
    let mut a = center - mesh_step(kappa, R::zero());
    let mut roots: Vec<(R, Boundary)> = Vec::new();
    let mut budget_limit = None;
    while roots.len() < count {
        let b = a + mesh_step(kappa, a - center);
        if series.check_budget(b).is_err() {
            budget_limit = Some(b);
            break;
        }
        scanner.step(a, b, &mut roots);
        a = b;
    }
    roots.truncate(count);
    EigenScan {
        eigenvalues: label(roots),
        budget_limit,
    }
}

/// First `count` band edges; fails when the series budget ends first.
pub fn eigenvalues<R: Real>(
    series: &DiscriminantSeries<R>,
    problem: &SLProblem<R>,
    count: usize,
) -> Result<Vec<Eigenvalue<R>>> {
    if count == 0 {
        return Err(Error::InvalidProblem(
            "eigenvalue count must be at least 1".into(),
        ));
    }
    let scan = scan_eigenvalues(series, problem, count);
    match scan.budget_limit {
        Some(lambda) => Err(Error::TruncationInsufficient {
            lambda: lambda.as_f64(),
            found: scan.eigenvalues.len(),
            requested: count,
        }),
        None => Ok(scan.eigenvalues),
    }
}

/// All band edges in `[lo, hi]`. Indices count from the first edge found.
pub fn eigenvalues_in<R: Real>(
    series: &DiscriminantSeries<R>,
    problem: &SLProblem<R>,
    lo: R,
    hi: R,
) -> Result<Vec<Eigenvalue<R>>> {
    if !(lo < hi) {
        return Err(Error::EmptyRange {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    series.check_budget(lo)?;
    series.check_budget(hi)?;
    let kappa = spectral_scale(problem);
    let scanner = Scanner { series };
    let center = series.lambda_center();
    let mut roots = Vec::new();
    for boundary in [Boundary::Periodic, Boundary::Antiperiodic] {
        if series.eval(lo) == boundary.target() {
            roots.push((lo, boundary));
        }
    }
    let mut a = lo;
    while a < hi {
        let b = (a + mesh_step(kappa, a - center)).min(hi);
        scanner.step(a, b, &mut roots);
        a = b;
    }
    Ok(label(roots))
}

fn label<R: Real>(roots: Vec<(R, Boundary)>) -> Vec<Eigenvalue<R>> {
    roots
        .into_iter()
        .enumerate()
        .map(|(index, (value, boundary))| Eigenvalue {
            index,
            value,
            boundary,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<R> {
    pub lo: R,
    pub hi: R,
    pub stable: bool,
}

/// Partition of a `λ` range into stable (`|D| ≤ 2`) and unstable pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure<R> {
    pub intervals: Vec<Interval<R>>,
    pub edges: Vec<Eigenvalue<R>>,
    pub range: (R, R),
}

impl<R: Real> BandStructure<R> {
    pub fn stable(&self) -> impl Iterator<Item = (R, R)> + '_ {
        self.intervals
            .iter()
            .filter(|i| i.stable)
            .map(|i| (i.lo, i.hi))
    }

    pub fn unstable(&self) -> impl Iterator<Item = (R, R)> + '_ {
        self.intervals
            .iter()
            .filter(|i| !i.stable)
            .map(|i| (i.lo, i.hi))
    }
}

pub fn band_structure<R: Real>(
    series: &DiscriminantSeries<R>,
    problem: &SLProblem<R>,
    lambda_min: R,
    lambda_max: R,
) -> Result<BandStructure<R>> {
    let edges = eigenvalues_in(series, problem, lambda_min, lambda_max)?;
    let mut cuts = vec![lambda_min];
    cuts.extend(edges.iter().map(|e| e.value));
    cuts.push(lambda_max);

    let two = R::lit(2.0);
    let half = R::lit(0.5);
    let mut intervals: Vec<Interval<R>> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if !(hi > lo) {
            continue;
        }
        let stable = series.eval((lo + hi) * half).abs() <= two;
        match intervals.last_mut() {
            Some(last) if last.stable == stable => last.hi = hi,
            _ => intervals.push(Interval { lo, hi, stable }),
        }
    }
    Ok(BandStructure {
        intervals,
        edges,
        range: (lambda_min, lambda_max),
    })
}

/// `β± = (D ∓ √(D² - 4)) / 2` with the principal square root, so
/// `√(D² - 4) = i√(4 - D²)` inside bands.
pub fn bloch_factors<R: Real>(d: R) -> (Complex<R>, Complex<R>) {
    let disc = Complex::new(d * d - R::lit(4.0), R::zero());
    let s = disc.principal_sqrt();
    let half = R::lit(0.5);
    let dc = Complex::new(d, R::zero());
    ((dc - s).scale(half), (dc + s).scale(half))
}

/// Bloch multipliers and self-matching coefficients at one `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochData<R> {
    pub lambda: R,
    pub discriminant: R,
    pub beta_plus: Complex<R>,
    pub beta_minus: Complex<R>,
    pub alpha_plus: Complex<R>,
    pub alpha_minus: Complex<R>,
}

/// Solves `f₂(T) α² + (f₁(T) - f₂'(T)) α - f₁'(T) = 0` and computes
/// `β = F(T)/F(0)` for `F = f₁ + α f₂`. Each root is labeled by the closed
/// form `β±` it reproduces.
pub fn self_matching<R: Real>(pair: &SolutionPair<R>) -> Result<BlochData<R>> {
    let a = pair.f2.last();
    if a.abs() <= R::lit(DIV_EPS) * pair.f2.max_modulus() {
        return Err(Error::DegenerateQuadratic { value: a.as_f64() });
    }
    let b = pair.f1.last() - pair.f2_prime.last();
    let c = -pair.f1_prime.last();
    let disc = Complex::new(b * b - R::lit(4.0) * a * c, R::zero()).principal_sqrt();
    let two_a = Complex::new(R::lit(2.0) * a, R::zero());
    let bc = Complex::new(b, R::zero());
    let roots = [(-bc - disc) / two_a, (-bc + disc) / two_a];

    let f1_0 = Complex::new(pair.f1.first(), R::zero());
    let f2_0 = Complex::new(pair.f2.first(), R::zero());
    let f1_t = Complex::new(pair.f1.last(), R::zero());
    let f2_t = Complex::new(pair.f2.last(), R::zero());
    let beta_of = |alpha: Complex<R>| (f1_t + alpha * f2_t) / (f1_0 + alpha * f2_0);
    let betas = roots.map(beta_of);

    let d = pair.discriminant();
    let (bp, bm) = bloch_factors(d);
    let cost = |x: Complex<R>, y: Complex<R>| (x - bp).norm() + (y - bm).norm();
    let (plus, minus) = if cost(betas[0], betas[1]) <= cost(betas[1], betas[0]) {
        (0, 1)
    } else {
        (1, 0)
    };
    // Allowance for coalescing multipliers: sqrt of the det M defect.
    let (m11, m12, m21, m22) = (
        pair.f1.last(),
        pair.f2.last(),
        pair.f1_prime.last(),
        pair.f2_prime.last(),
    );
    let m = [m11, m12, m21, m22]
        .iter()
        .fold(R::one(), |acc, v| acc.max(v.abs()));
    let det_defect = (m11 * m22 - m12 * m21 - R::one()).abs();
    let tol = R::lit(BLOCH_TOL) * R::one().max(bp.norm()).max(bm.norm())
        + R::lit(2.0) * (det_defect + R::unit_roundoff() * m * m).sqrt();
    let deviation = (betas[plus] - bp).norm().max((betas[minus] - bm).norm());
    if !(deviation <= tol) {
        return Err(Error::BlochMismatch {
            deviation: deviation.as_f64(),
        });
    }
    Ok(BlochData {
        lambda: pair.lambda,
        discriminant: d,
        beta_plus: betas[plus],
        beta_minus: betas[minus],
        alpha_plus: roots[plus],
        alpha_minus: roots[minus],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// `f±(x) = β±ⁿ F±(x - nT)`, `n = ⌊x/T⌋`, with `F±` interpolated linearly
/// between nodes.
pub fn bloch_solution<R: Real>(
    data: &BlochData<R>,
    pair: &SolutionPair<R>,
    x: R,
    branch: Branch,
) -> Complex<R> {
    let (alpha, beta) = match branch {
        Branch::Plus => (data.alpha_plus, data.beta_plus),
        Branch::Minus => (data.alpha_minus, data.beta_minus),
    };
    let grid = pair.f1.grid();
    let period = grid.period();
    let n = (x / period).floor();
    let local = x - n * period;
    let h = grid.step();
    let last = grid.len() - 2;
    let i = (local / h).floor().to_usize().unwrap_or(0).min(last);
    let t = (local - R::from_usize(i).unwrap() * h) / h;
    let lerp = |v: &[R]| v[i] + (v[i + 1] - v[i]) * t;
    let f = Complex::new(lerp(pair.f1.values()), R::zero())
        + alpha * Complex::new(lerp(pair.f2.values()), R::zero());
    beta.powi(n.to_i32().expect("x within i32 periods")) * f
}
