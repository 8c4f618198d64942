//! Uniform grids over one period and functions sampled on them.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{Float, One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Relative threshold below which a value counts as vanishing when it is
/// used as a denominator.
pub const DIV_EPS: f64 = 1e-12;

/// Cumulative Newton–Cotes rule used by
/// [`GridFunction::antiderivative`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// Composite Simpson on pairs of intervals, fourth order.
    Simpson,
    /// Composite Boole on groups of four intervals, sixth order. Needs a
    /// multiple of four intervals.
    Boole,
}

/// Uniform grid `0 = x_0 < x_1 < ... < x_{n-1} = T` with an odd node count.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<R> {
    period: R,
    n_points: usize,
    step: R,
    rule: Quadrature,
}

impl<R: Real> Grid<R> {
    /// Builds a shared uniform grid over `[0, period]`, integrating with
    /// [`Quadrature::Boole`] when the interval count is a multiple of four
    /// and with [`Quadrature::Simpson`] otherwise.
    pub fn uniform(period: R, n_points: usize) -> Result<Arc<Self>> {
        let rule = if n_points >= 5 && (n_points - 1) % 4 == 0 {
            Quadrature::Boole
        } else {
            Quadrature::Simpson
        };
        Self::with_rule(period, n_points, rule)
    }

    /// Builds a shared uniform grid with an explicit quadrature rule.
    pub fn with_rule(period: R, n_points: usize, rule: Quadrature) -> Result<Arc<Self>> {
        if !(period > R::zero()) || !period.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        if n_points < 3 || n_points % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "node count must be odd and at least 3, got {n_points}"
            )));
        }
        if rule == Quadrature::Boole && (n_points - 1) % 4 != 0 {
            return Err(Error::InvalidGrid(format!(
                "Boole rule needs a multiple of four intervals, got {}",
                n_points - 1
            )));
        }
        let step = period / R::from_usize(n_points - 1).unwrap();
        Ok(Arc::new(Grid {
            period,
            n_points,
            step,
            rule,
        }))
    }

    pub fn rule(&self) -> Quadrature {
        self.rule
    }

    pub fn period(&self) -> R {
        self.period
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> R {
        self.step
    }

    /// Position of node `i`; the last node is exactly `T`.
    pub fn node(&self, i: usize) -> R {
        if i + 1 == self.n_points {
            self.period
        } else {
            R::from_usize(i).unwrap() * self.step
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = R> + '_ {
        (0..self.n_points).map(move |i| self.node(i))
    }
}

/// Values of a real or complex function at every node of a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<S: Scalar> {
    grid: Arc<Grid<S::Real>>,
    values: Vec<S>,
}

impl<S: Scalar> GridFunction<S> {
    pub fn new(grid: &Arc<Grid<S::Real>>, values: Vec<S>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        check_finite(grid, &values)?;
        Ok(GridFunction {
            grid: Arc::clone(grid),
            values,
        })
    }

    /// Samples `f` at every node.
    pub fn sample(grid: &Arc<Grid<S::Real>>, f: impl Fn(S::Real) -> S) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: &Arc<Grid<S::Real>>, value: S) -> Self {
        GridFunction {
            grid: Arc::clone(grid),
            values: vec![value; grid.len()],
        }
    }

    pub fn zeros(grid: &Arc<Grid<S::Real>>) -> Self {
        Self::constant(grid, S::zero())
    }

    pub fn grid(&self) -> &Arc<Grid<S::Real>> {
        &self.grid
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> S {
        self.values[0]
    }

    pub fn last(&self) -> S {
        self.values[self.values.len() - 1]
    }

    pub fn max_modulus(&self) -> S::Real {
        self.values
            .iter()
            .fold(S::Real::zero(), |m, v| m.max(v.modulus()))
    }

    pub fn min_modulus(&self) -> S::Real {
        self.values
            .iter()
            .fold(S::Real::infinity(), |m, v| m.min(v.modulus()))
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two functions on the same grid.
    ///
    /// Panics when the grids differ.
    pub fn zip_map<T: Scalar<Real = S::Real>, U: Scalar<Real = S::Real>>(
        &self,
        other: &GridFunction<T>,
        f: impl Fn(S, T) -> U,
    ) -> GridFunction<U> {
        assert_same_grid(&self.grid, &other.grid);
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, factor: S) -> Self {
        self.map(|v| v * factor)
    }

    /// Multiplies by a real-valued function on the same grid.
    pub fn mul_real(&self, other: &GridFunction<S::Real>) -> Self {
        self.zip_map(other, |a, b| a.scale(b))
    }

    /// Elementwise reciprocal. Fails when some `|v| <= 1e-12 * max|v|`.
    pub fn reciprocal(&self) -> Result<Self> {
        let threshold = self.max_modulus() * S::Real::lit(DIV_EPS);
        if let Some((index, v)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| v.modulus() <= threshold)
        {
            return Err(Error::VanishingDenominator {
                index,
                value: v.modulus().as_f64(),
                threshold: threshold.as_f64(),
            });
        }
        Ok(self.map(|v| S::one() / v))
    }

    /// Elementwise principal square root.
    pub fn sqrt(&self) -> Self {
        self.map(Scalar::principal_sqrt)
    }

    pub fn real_part(&self) -> GridFunction<S::Real> {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| v.real()).collect(),
        }
    }

    pub fn imag_part(&self) -> GridFunction<S::Real> {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| v.imag()).collect(),
        }
    }

    /// Cumulative integral `G(x_i) = int_0^{x_i} g` under the grid's
    /// [`Quadrature`] rule.
    ///
    /// Panel-end nodes carry the composite sum, accumulated with Kahan
    /// compensation. Interior nodes of a panel add the integral of the
    /// panel's interpolating polynomial up to that node.
    pub fn antiderivative(&self) -> Self {
        let values = match self.grid.rule {
            Quadrature::Simpson => self.simpson(),
            Quadrature::Boole => self.boole(),
        };
        GridFunction {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    fn simpson_panel(&self, k: usize) -> S {
        let g = &self.values;
        let third = self.grid.step() / S::Real::lit(3.0);
        (g[k] + g[k + 1].scale(S::Real::lit(4.0)) + g[k + 2]).scale(third)
    }

    fn simpson(&self) -> Vec<S> {
        let g = &self.values;
        let n = g.len();
        let twelfth = self.grid.step() / S::Real::lit(12.0);
        let five = S::Real::lit(5.0);
        let eight = S::Real::lit(8.0);

        let mut out = vec![S::zero(); n];
        let mut acc = Kahan::new();
        for k in (0..n - 1).step_by(2) {
            let (a, b, c) = (g[k], g[k + 1], g[k + 2]);
            let half = (a.scale(five) + b.scale(eight) - c).scale(twelfth);
            out[k + 1] = acc.peek(half);
            acc.add(self.simpson_panel(k));
            out[k + 2] = acc.sum;
        }
        out
    }

    // Integrals of the quartic through five nodes, from the first node to
    // nodes 1, 2, 3 and 4, as (denominator, weights).
    const BOOLE: [(f64, [f64; 5]); 4] = [
        (720.0, [251.0, 646.0, -264.0, 106.0, -19.0]),
        (90.0, [29.0, 124.0, 24.0, 4.0, -1.0]),
        (80.0, [27.0, 102.0, 72.0, 42.0, -3.0]),
        (45.0, [14.0, 64.0, 24.0, 64.0, 14.0]),
    ];

    fn boole_partial(&self, k: usize, j: usize) -> S {
        let (d, w) = Self::BOOLE[j];
        let g = &self.values;
        (0..5)
            .fold(S::zero(), |acc, i| acc + g[k + i].scale(S::Real::lit(w[i])))
            .scale(self.grid.step() / S::Real::lit(d))
    }

    fn boole(&self) -> Vec<S> {
        let n = self.values.len();
        let mut out = vec![S::zero(); n];
        let mut acc = Kahan::new();
        for k in (0..n - 1).step_by(4) {
            for j in 0..3 {
                out[k + j + 1] = acc.peek(self.boole_partial(k, j));
            }
            acc.add(self.boole_partial(k, 3));
            out[k + 4] = acc.sum;
        }
        out
    }

    /// Single-shot composite integral over the whole period. Panels are
    /// summed in the same order and with the same compensation as in
    /// [`antiderivative`](Self::antiderivative), so the two agree exactly
    /// at `T`.
    pub fn integral(&self) -> S {
        let n = self.values.len();
        let mut acc = Kahan::new();
        match self.grid.rule {
            Quadrature::Simpson => (0..n - 1)
                .step_by(2)
                .for_each(|k| acc.add(self.simpson_panel(k))),
            Quadrature::Boole => (0..n - 1)
                .step_by(4)
                .for_each(|k| acc.add(self.boole_partial(k, 3))),
        }
        acc.sum
    }

    /// Fourth-order centered derivative of a T-periodic function, with the
    /// stencil wrapped across the period (node `n-1` is node `0`).
    pub fn periodic_derivative(&self) -> Self {
        let m = self.values.len() - 1;
        let g = &self.values[..m];
        let denom = S::Real::lit(12.0) * self.grid.step();
        let eight = S::Real::lit(8.0);
        let at = |i: isize| g[i.rem_euclid(m as isize) as usize];
        let mut out: Vec<S> = (0..m as isize)
            .map(|i| {
                (at(i - 2) - at(i + 2) + (at(i + 1) - at(i - 1)).scale(eight))
                    .scale(S::Real::one() / denom)
            })
            .collect();
        out.push(out[0]);
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: out,
        }
    }
}

impl<R: Real> GridFunction<R> {
    pub fn to_complex(&self) -> GridFunction<Complex<R>> {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .map(|&v| Complex::new(v, R::zero()))
                .collect(),
        }
    }

    pub fn min(&self) -> R {
        self.values.iter().fold(R::infinity(), |m, &v| m.min(v))
    }

    pub fn max(&self) -> R {
        self.values.iter().fold(R::neg_infinity(), |m, &v| m.max(v))
    }
}

impl<R: Real> GridFunction<Complex<R>> {
    /// Assembles `re + i im`.
    pub fn from_parts(re: &GridFunction<R>, im: &GridFunction<R>) -> Self {
        re.zip_map(im, Complex::new)
    }
}

/// Compensated running sum.
struct Kahan<S> {
    sum: S,
    comp: S,
}

impl<S: Scalar> Kahan<S> {
    fn new() -> Self {
        Kahan {
            sum: S::zero(),
            comp: S::zero(),
        }
    }

    fn add(&mut self, x: S) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    /// Sum with `x` added, without storing it.
    fn peek(&self, x: S) -> S {
        self.sum + (x - self.comp)
    }
}

fn assert_same_grid<R: Real>(a: &Arc<Grid<R>>, b: &Arc<Grid<R>>) {
    assert!(
        Arc::ptr_eq(a, b) || a == b,
        "grid functions sampled on different grids"
    );
}

fn check_finite<S: Scalar>(grid: &Grid<S::Real>, values: &[S]) -> Result<()> {
    match values.iter().position(|v| !v.finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            x: grid.node(index).as_f64(),
        }),
        None => Ok(()),
    }
}

impl<S: Scalar> Add for &GridFunction<S> {
    type Output = GridFunction<S>;
    fn add(self, rhs: Self) -> GridFunction<S> {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<S: Scalar> Sub for &GridFunction<S> {
    type Output = GridFunction<S>;
    fn sub(self, rhs: Self) -> GridFunction<S> {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl<S: Scalar> Mul for &GridFunction<S> {
    type Output = GridFunction<S>;
    fn mul(self, rhs: Self) -> GridFunction<S> {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl<S: Scalar> Neg for &GridFunction<S> {
    type Output = GridFunction<S>;
    fn neg(self) -> GridFunction<S> {
        self.map(|v| -v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn default_resolution_grid() {
        let g = Grid::uniform(PI, 7001).unwrap();
        assert_eq!(g.len(), 7001);
        assert!((g.step() - PI / 7000.0).abs() < 1e-18);
        assert_eq!(g.node(7000), PI);
    }

    #[test]
    fn smallest_grid() {
        let g = Grid::uniform(1.0, 3).unwrap();
        assert_eq!(g.nodes().collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::uniform(0.0, 7001).is_err());
        assert!(Grid::uniform(-1.0, 7001).is_err());
        assert!(Grid::uniform(1.0, 1).is_err());
        assert!(Grid::uniform(1.0, 8).is_err());
        assert!(Grid::uniform(f64::NAN, 9).is_err());
    }

    #[test]
    fn sample_mathieu_potential() {
        let g = Grid::uniform(PI, 7001).unwrap();
        let q = GridFunction::sample(&g, |x: f64| 2.0 * (2.0 * x).cos()).unwrap();
        assert_eq!(q.first(), 2.0);
        assert!((q.values()[3500] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn sample_rejects_singular_function() {
        let g = Grid::uniform(1.0, 11).unwrap();
        let err = GridFunction::sample(&g, |x: f64| 1.0 / x).unwrap_err();
        assert_eq!(err, Error::NonFinite { index: 0, x: 0.0 });
    }

    #[test]
    fn constant_sample() {
        let g = Grid::uniform(2.0, 5).unwrap();
        let one = GridFunction::sample(&g, |_| 1.0).unwrap();
        assert!(one.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn antiderivative_of_one_is_identity() {
        let g = Grid::uniform(PI, 7001).unwrap();
        let one = GridFunction::constant(&g, 1.0);
        let int = one.antiderivative();
        for (x, v) in g.nodes().zip(int.values()) {
            assert!((x - v).abs() < 1e-14, "{x} {v}");
        }
    }

    #[test]
    fn antiderivative_of_cosine() {
        let g = Grid::uniform(PI, 7001).unwrap();
        let c = GridFunction::sample(&g, f64::cos).unwrap();
        let int = c.antiderivative();
        let err = g
            .nodes()
            .zip(int.values())
            .map(|(x, v)| (x.sin() - v).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12, "{err}");
    }

    #[test]
    fn rule_selection() {
        assert_eq!(Grid::uniform(PI, 7001).unwrap().rule(), Quadrature::Boole);
        assert_eq!(Grid::uniform(PI, 7003).unwrap().rule(), Quadrature::Simpson);
        assert_eq!(Grid::uniform(1.0, 3).unwrap().rule(), Quadrature::Simpson);
        assert!(Grid::with_rule(1.0, 7, Quadrature::Boole).is_err());
    }

    #[test]
    fn simpson_matches_closed_form_cosine() {
        let g = Grid::with_rule(PI, 7001, Quadrature::Simpson).unwrap();
        let int = GridFunction::sample(&g, f64::cos).unwrap().antiderivative();
        let err = g
            .nodes()
            .zip(int.values())
            .map(|(x, v)| (x.sin() - v).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12, "{err}");
    }

    #[test]
    fn single_panel_weights() {
        let s = Grid::with_rule(2.0, 3, Quadrature::Simpson).unwrap();
        let f = GridFunction::<f64>::new(&s, vec![1.0, 2.0, 4.0]).unwrap();
        let int = f.antiderivative();
        approx::assert_relative_eq!(int.last(), (1.0 + 8.0 + 4.0) / 3.0, max_relative = 1e-15);
        approx::assert_relative_eq!(
            int.values()[1],
            (5.0 + 16.0 - 4.0) / 12.0,
            max_relative = 1e-15
        );

        let b = Grid::with_rule(4.0, 5, Quadrature::Boole).unwrap();
        let f = GridFunction::<f64>::new(&b, vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        approx::assert_relative_eq!(f.integral(), 14.0 / 45.0, max_relative = 1e-15);
    }

    #[test]
    fn boole_is_exact_for_quintics() {
        let g = Grid::with_rule(2.0, 41, Quadrature::Boole).unwrap();
        let f = GridFunction::sample(&g, |x: f64| x.powi(5) - 3.0 * x * x + 1.0).unwrap();
        for (x, v) in g.nodes().zip(f.antiderivative().values()).step_by(4) {
            let want = x.powi(6) / 6.0 - x.powi(3) + x;
            assert!((v - want).abs() <= 1e-13 * want.abs().max(1.0), "{x}");
        }
    }

    #[test]
    fn antiderivative_of_zero() {
        let g = Grid::uniform(1.0, 9).unwrap();
        let z = GridFunction::<f64>::zeros(&g).antiderivative();
        assert!(z.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn complex_antiderivative_splits() {
        let g = Grid::uniform(PI, 101).unwrap();
        let re = GridFunction::sample(&g, f64::cos).unwrap();
        let im = GridFunction::sample(&g, f64::sin).unwrap();
        let z = GridFunction::from_parts(&re, &im).antiderivative();
        let (ire, iim) = (re.antiderivative(), im.antiderivative());
        for i in 0..g.len() {
            assert!((z.values()[i].re - ire.values()[i]).abs() < 1e-15);
            assert!((z.values()[i].im - iim.values()[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn reciprocal_of_two() {
        let g = Grid::uniform(1.0, 5).unwrap();
        let r = GridFunction::constant(&g, 2.0).reciprocal().unwrap();
        assert!(r.values().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn multiply_identity_function() {
        let g = Grid::uniform(1.0f64, 5).unwrap();
        let f = GridFunction::<f64>::sample(&g, |x| x).unwrap();
        let sq = &f * &f;
        for (x, v) in g.nodes().zip(sq.values()) {
            assert_eq!(x * x, *v);
        }
    }

    #[test]
    fn reciprocal_detects_nodes() {
        let g = Grid::uniform(PI, 101).unwrap();
        let s = GridFunction::sample(&g, f64::sin).unwrap();
        assert!(matches!(
            s.reciprocal(),
            Err(Error::VanishingDenominator { index: 0, .. })
        ));
    }

    #[test]
    #[should_panic(expected = "different grids")]
    fn mixing_grids_panics() {
        let a = GridFunction::constant(&Grid::uniform(1.0, 5).unwrap(), 1.0);
        let b = GridFunction::constant(&Grid::uniform(2.0, 5).unwrap(), 1.0);
        let _ = &a + &b;
    }

    #[test]
    fn periodic_derivative_of_sine() {
        let g = Grid::uniform(2.0 * PI, 1001).unwrap();
        let s = GridFunction::sample(&g, f64::sin).unwrap();
        let d = s.periodic_derivative();
        let err = g
            .nodes()
            .zip(d.values())
            .map(|(x, v)| (x.cos() - v).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn single_precision_grid() {
        let g = Grid::<f32>::uniform(1.0, 101).unwrap();
        let f = GridFunction::<f32>::sample(&g, |x| 3.0 * x * x).unwrap();
        assert!((f.integral() - 1.0).abs() < 1e-5);
    }
}
