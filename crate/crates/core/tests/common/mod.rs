#![allow(dead_code)]

use std::sync::OnceLock;

use hill_spps::problems::SLProblem;
use hill_spps::{Analysis, TwoFloat, DEFAULT_GRID, DEFAULT_ORDER};

pub fn free() -> &'static Analysis<f64> {
    static CELL: OnceLock<Analysis<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        Analysis::run(SLProblem::free(DEFAULT_GRID).unwrap(), DEFAULT_ORDER).unwrap()
    })
}

pub fn mathieu1() -> &'static Analysis<f64> {
    static CELL: OnceLock<Analysis<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        Analysis::run(
            SLProblem::mathieu(1.0, DEFAULT_GRID).unwrap(),
            DEFAULT_ORDER,
        )
        .unwrap()
    })
}

pub fn mathieu5() -> &'static Analysis<f64> {
    static CELL: OnceLock<Analysis<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        Analysis::run(
            SLProblem::mathieu(5.0, DEFAULT_GRID).unwrap(),
            DEFAULT_ORDER,
        )
        .unwrap()
    })
}

pub fn mathieu1_dd() -> &'static Analysis<TwoFloat> {
    static CELL: OnceLock<Analysis<TwoFloat>> = OnceLock::new();
    CELL.get_or_init(|| {
        Analysis::run(
            SLProblem::mathieu(1.0, DEFAULT_GRID).unwrap(),
            DEFAULT_ORDER,
        )
        .unwrap()
    })
}

pub fn mathieu5_dd() -> &'static Analysis<TwoFloat> {
    static CELL: OnceLock<Analysis<TwoFloat>> = OnceLock::new();
    CELL.get_or_init(|| {
        Analysis::run(
            SLProblem::mathieu(5.0, DEFAULT_GRID).unwrap(),
            DEFAULT_ORDER,
        )
        .unwrap()
    })
}

pub fn all() -> [(&'static str, &'static Analysis<f64>); 3] {
    [
        ("free", free()),
        ("mathieu r=1", mathieu1()),
        ("mathieu r=5", mathieu5()),
    ]
}

/// Centered difference at interior nodes.
pub fn centered_difference(values: &[f64], h: f64) -> Vec<f64> {
    values
        .windows(3)
        .map(|w| (w[2] - w[0]) / (2.0 * h))
        .collect()
}

/// Fourth-order centered difference at nodes `2..n-2`.
pub fn centered_difference4(values: &[f64], h: f64) -> Vec<f64> {
    values
        .windows(5)
        .map(|w| (w[0] - 8.0 * w[1] + 8.0 * w[3] - w[4]) / (12.0 * h))
        .collect()
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}
