//! Invariants of the quadrature, the series solutions, the discriminant and
//! the Bloch data.

mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use hill_spps::discriminant::{self, SeriesForm};
use hill_spps::grid::{Grid, GridFunction, Quadrature};
use hill_spps::problems::SLProblem;
use hill_spps::spectrum::{self, Boundary, Branch};
use hill_spps::spps::SeedCoefficients;
use hill_spps::{Complex, Error, Real, TwoFloat};

use common::{centered_difference, centered_difference4, max_abs};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

fn rules() -> impl Strategy<Value = Quadrature> {
    prop_oneof![Just(Quadrature::Simpson), Just(Quadrature::Boole)]
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn antiderivative_is_linear(
        rule in rules(),
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        k in 1u32..6,
        phase in 0.0f64..PI,
    ) {
        let grid = Grid::with_rule(PI, 2001, rule).unwrap();
        let f = GridFunction::sample(&grid, |x: f64| (k as f64 * x + phase).sin()).unwrap();
        let g = GridFunction::sample(&grid, |x: f64| (x * x - 1.0).exp()).unwrap();
        let lhs = (&f.scale(a) + &g.scale(b)).antiderivative();
        let rhs = &f.antiderivative().scale(a) + &g.antiderivative().scale(b);
        let scale = a.abs() * max_abs(f.antiderivative().values())
            + b.abs() * max_abs(g.antiderivative().values());
        for (l, r) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((l - r).abs() <= 1e-13 * scale.max(1e-300));
        }
    }

    #[test]
    fn antiderivative_end_is_composite_integral(
        rule in rules(),
        seed in proptest::collection::vec(-1.0f64..1.0, 6),
    ) {
        let grid = Grid::with_rule(2.0, 401, rule).unwrap();
        let f = GridFunction::<f64>::sample(&grid, |x: f64| {
            seed.iter().enumerate().map(|(j, c)| c * (j as f64 * x).cos()).sum()
        }).unwrap();
        prop_assert_eq!(f.antiderivative().last(), f.integral());

        // Plain weighted sum.
        let h = grid.step();
        let v = f.values();
        let naive: f64 = match rule {
            Quadrature::Simpson => (0..v.len() - 1).step_by(2)
                .map(|k| h / 3.0 * (v[k] + 4.0 * v[k + 1] + v[k + 2])).sum(),
            Quadrature::Boole => (0..v.len() - 1).step_by(4)
                .map(|k| 2.0 * h / 45.0
                    * (7.0 * v[k] + 32.0 * v[k + 1] + 12.0 * v[k + 2] + 32.0 * v[k + 3] + 7.0 * v[k + 4]))
                .sum(),
        };
        let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>() * h;
        prop_assert!((f.integral() - naive).abs() <= 1e-14 * scale.max(1.0));
    }

    #[test]
    fn simpson_exact_for_cubics(c in proptest::collection::vec(-3.0f64..3.0, 4)) {
        let grid = Grid::with_rule(1.5, 301, Quadrature::Simpson).unwrap();
        let poly = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        let prim = |x: f64| c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
        let int = GridFunction::sample(&grid, poly).unwrap().antiderivative();
        let scale = (0..=300).map(|i| prim(grid.node(i)).abs()).fold(1.0, f64::max);
        for i in (0..grid.len()).step_by(2) {
            prop_assert!((int.values()[i] - prim(grid.node(i))).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn boole_exact_for_quintics(c in proptest::collection::vec(-3.0f64..3.0, 6)) {
        let grid = Grid::with_rule(1.5, 301, Quadrature::Boole).unwrap();
        let poly = |x: f64| c.iter().rev().fold(0.0, |acc, ck| acc * x + ck);
        let prim = |x: f64| c.iter().enumerate().map(|(k, ck)| ck * x.powi(k as i32 + 1) / (k as f64 + 1.0)).sum::<f64>();
        let int = GridFunction::sample(&grid, poly).unwrap().antiderivative();
        let scale = (0..=300).map(|i| prim(grid.node(i)).abs()).fold(1.0, f64::max);
        for i in (0..grid.len()).step_by(4) {
            prop_assert!((int.values()[i] - prim(grid.node(i))).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn solution_pair_contracts(lambda in -1.0f64..25.0) {
        for a in [common::mathieu1(), common::mathieu5()] {
            let pair = a.solutions(lambda).unwrap();
            prop_assert!(pair.initial_defect() <= 1e-9);

            let w = pair.wronskian(a.problem.p());
            let w0 = w.first();
            let dev = max_abs(&w.values().iter().map(|v| v - w0).collect::<Vec<_>>());
            prop_assert!(dev <= 1e-8 * w0.abs(), "wronskian drift {dev:e}");
        }
    }

    #[test]
    fn bloch_factors_are_reciprocal(lambda in -1.0f64..25.0) {
        let (data, _) = common::mathieu1().bloch(lambda).unwrap();
        let prod = data.beta_plus * data.beta_minus;
        prop_assert!((prod - Complex::new(1.0, 0.0)).norm() <= 1e-9);
    }

    #[test]
    fn derivative_matches_difference_quotient(lambda in -1.0f64..25.0) {
        let s = &common::mathieu1_dd().series;
        let (l, h) = (TwoFloat::from(lambda), TwoFloat::from(1e-4));
        let fd = ((s.eval(l + h) - s.eval(l - h)) / (h * 2.0)).as_f64();
        let d = s.derivative(l).as_f64();
        prop_assert!((fd - d).abs() <= 1e-6 * d.abs().max(1.0), "{fd} vs {d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn lambda0_within_bounds(
        a0 in -2.0f64..2.0,
        a1 in -3.0f64..3.0,
        b2 in -1.5f64..1.5,
    ) {
        let text = format!(
            "T = 3.14159265358979323846\np = 1.0\n[q_fourier]\na0 = {a0}\na = [{a1}]\nb = [0.0, {b2}]\n"
        );
        let prob = SLProblem::<f64>::from_config(&text, 2001).unwrap();
        let bounds = discriminant::lambda0_bounds(&prob);
        let l0 = discriminant::find_lambda0(&prob, 100).unwrap();
        prop_assert!(bounds.lower <= l0 && l0 <= bounds.upper, "{l0} outside {bounds:?}");
    }
}

#[test]
fn parity_of_recursive_integrals() {
    let a = common::mathieu1();
    for n in 1..=a.order {
        assert_eq!(a.coefficients.x_tilde(n).first(), 0.0);
        assert_eq!(a.coefficients.x(n).first(), 0.0);
    }
    let seeds = SeedCoefficients::build(&a.problem, -3.0, 21).unwrap();
    for n in 1..=21 {
        assert_eq!(seeds.x_tilde(n).first(), 0.0);
        assert_eq!(seeds.x(n).first(), 0.0);
    }
}

#[test]
fn derivatives_agree_with_differences() {
    for a in [common::mathieu1(), common::mathieu5()] {
        let h = a.problem.grid().step();
        for lambda in [a.lambda0() + 0.7, 6.0, 18.0] {
            let pair = a.solutions(lambda).unwrap();
            for (f, fp) in [(&pair.f1, &pair.f1_prime), (&pair.f2, &pair.f2_prime)] {
                let fd = centered_difference4(f.values(), h);
                let dev = fd
                    .iter()
                    .zip(&fp.values()[2..])
                    .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                assert!(dev <= 1e-5, "{lambda}: {dev:e}");
            }
        }
    }
}

#[test]
fn ode_residual_is_small() {
    for a in [common::mathieu1(), common::mathieu5()] {
        let h = a.problem.grid().step();
        let q = a.problem.q().values();
        for lambda in [a.lambda0() + 0.7, 6.0, 18.0] {
            let pair = a.solutions(lambda).unwrap();
            let pf2p: Vec<f64> = pair
                .f2_prime
                .values()
                .iter()
                .zip(a.problem.p().values())
                .map(|(d, p)| d * p)
                .collect();
            let flux = centered_difference(&pf2p, h);
            let f2 = pair.f2.values();
            let res = flux
                .iter()
                .enumerate()
                .map(|(i, d)| -d + (q[i + 1] - lambda) * f2[i + 1])
                .fold(0.0f64, |m, r| m.max(r.abs()));
            assert!(res <= 1e-4 * max_abs(f2), "{lambda}: {res:e}");
        }
    }
}

#[test]
fn band_edge_series_starts_at_two() {
    for (name, a) in common::all() {
        assert_eq!(a.series.form(), SeriesForm::BandEdge);
        assert_relative_eq!(a.series.coefficients()[0], 2.0, epsilon = 1e-9);
        assert!(a.series.order() >= 100, "{name}");
    }
}

#[test]
fn star_discriminant_exceeds_two_below_min_q() {
    for r in [1.0, 5.0] {
        let prob = SLProblem::<f64>::mathieu(r, 7001).unwrap();
        let b = discriminant::lambda0_bounds(&prob);
        let star = discriminant::discriminant_series_star(&prob, b.lower - 1.0, 100).unwrap();
        for i in 0..50 {
            let l = b.lower - 1.0 + i as f64 / 49.0;
            assert!(star.eval(l) > 2.0, "r={r}, lambda={l}");
        }
        let l0 = discriminant::find_lambda0(&prob, 100).unwrap();
        assert!(b.lower <= l0 && l0 <= b.upper);
    }
}

#[test]
fn center_independence_free() {
    let prob = SLProblem::<f64>::free(7001).unwrap();
    for center in [-2.0, -1.0, 1.0] {
        let s = discriminant::discriminant_series_star(&prob, center, 100).unwrap();
        let worst = (0..=300)
            .map(|i| {
                let l = i as f64 * 0.1;
                (s.eval(l) - 2.0 * (l.sqrt() * PI).cos()).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-7, "center {center}: {worst:e}");
    }
}

fn expected_label(n: usize) -> Boundary {
    match n % 4 {
        0 | 3 => Boundary::Periodic,
        _ => Boundary::Antiperiodic,
    }
}

#[test]
fn eigenvalue_labels_interlace() {
    for a in [common::mathieu1(), common::mathieu5()] {
        let ev = a.eigenvalues(11).unwrap();
        for e in &ev {
            assert_eq!(e.boundary, expected_label(e.index), "{e:?}");
        }
        for w in ev.windows(2) {
            assert!(w[0].value <= w[1].value);
        }
    }
}

#[test]
fn unit_multipliers_at_eigenvalues() {
    for (r, a) in [(1, common::mathieu1_dd()), (5, common::mathieu5_dd())] {
        for e in a.eigenvalues(11).unwrap() {
            let (bp, bm) = match a.bloch(e.value) {
                Ok((data, _)) => (data.beta_plus, data.beta_minus),
                // Odd edge eigenfunction: f2(T) = 0, closed form only.
                Err(Error::DegenerateQuadratic { .. }) => {
                    spectrum::bloch_factors(a.discriminant(e.value).unwrap())
                }
                Err(other) => panic!("r={r}, {e:?}: {other}"),
            };
            assert!((bp.norm().as_f64() - 1.0).abs() <= 1e-6, "r={r}, {e:?}");
            assert!((bm.norm().as_f64() - 1.0).abs() <= 1e-6, "r={r}, {e:?}");
            let prod = bp * bm;
            assert!((prod.re.as_f64() - 1.0).abs() + prod.im.as_f64().abs() <= 1e-9);
        }
    }
}

#[test]
fn quasiperiodicity_in_stable_bands() {
    let a = common::mathieu1();
    let bands = a.band_structure(-1.0, 20.0).unwrap();
    let stable: Vec<(f64, f64)> = bands.stable().collect();
    let mut rng = StdRng::seed_from_u64(7);
    let mut uniform = move || rng.random::<f64>();
    let period = a.problem.period();
    for i in 0..10 {
        let (lo, hi) = stable[i % stable.len()];
        let lambda = lo + (hi - lo) * (0.05 + 0.9 * uniform());
        let (data, pair) = a.bloch(lambda).unwrap();
        for branch in [Branch::Plus, Branch::Minus] {
            let (alpha, beta) = match branch {
                Branch::Plus => (data.alpha_plus, data.beta_plus),
                Branch::Minus => (data.alpha_minus, data.beta_minus),
            };
            let big_f = pair
                .f1
                .values()
                .iter()
                .zip(pair.f2.values())
                .map(|(f1, f2)| (alpha * f2 + f1).norm())
                .fold(0.0, f64::max);
            for _ in 0..10 {
                let x = 3.0 * period * uniform();
                let shifted = spectrum::bloch_solution(&data, &pair, x + period, branch);
                let here = spectrum::bloch_solution(&data, &pair, x, branch);
                assert!((shifted - beta * here).norm() <= 1e-6 * big_f);
            }
        }
    }
}

#[test]
fn eigenvalues_separate_band_classes() {
    for a in [common::mathieu1(), common::mathieu5()] {
        let lo = a.lambda0() - 1.0;
        let bands = a.band_structure(lo, 20.0).unwrap();
        for e in &bands.edges {
            let left = bands.intervals.iter().find(|i| i.hi == e.value);
            let right = bands.intervals.iter().find(|i| i.lo == e.value);
            match (left, right) {
                (Some(l), Some(r)) => assert!(l.stable != r.stable || (l.stable && r.stable)),
                _ => {
                    // Coincident edges: the value sits inside a merged stable interval.
                    assert!(bands
                        .intervals
                        .iter()
                        .any(|i| i.stable && i.lo < e.value && e.value < i.hi));
                }
            }
        }
    }
}
