//! Hill's discriminant for periodic Sturm–Liouville problems
//! `-(p f')' + q f = λ f` through spectral parameter power series (SPPS).
//!
//! The pipeline is:
//!
//! 1. [`discriminant::find_lambda0`] locates the lowest periodic eigenvalue
//!    `λ₀` from a general-center series built around a point known to lie
//!    below the spectrum.
//! 2. [`spps`] constructs the nodeless periodic ground solution `f₀` at
//!    `λ₀` and the recursive-integral coefficient families built on it.
//! 3. [`discriminant::discriminant_series`] assembles `D(λ)` as a power
//!    series in `λ - λ₀`; [`spectrum`] extracts band edges, stability bands
//!    and Bloch solutions; [`darboux`] builds the SUSY partner problem.
//!
//! [`Analysis`] runs steps 1–3 in one call.
//!
//! All numerics are generic over the real type ([`Real`]) and, for sampled
//! functions, over real or complex scalars ([`Scalar`]). The aliases below
//! fix the common double-precision instantiation; [`PreciseAnalysis`] runs
//! in double-double, which series evaluated far from their center need.

pub mod analysis;
pub mod darboux;
pub mod discriminant;
pub mod error;
pub mod grid;
pub mod problems;
pub mod scalar;
pub mod spectrum;
pub mod spps;

pub use analysis::Analysis;
pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

pub use num_complex::Complex;
pub use twofloat::TwoFloat;

/// Double-double real, for series evaluated far from their center.
pub type DoubleDouble = TwoFloat;

/// Double-precision grid.
pub type Grid = grid::Grid<f64>;
/// Real function sampled on a double-precision grid.
pub type RealFunction = grid::GridFunction<f64>;
/// Complex function sampled on a double-precision grid.
pub type ComplexFunction = grid::GridFunction<Complex<f64>>;
/// Double-precision periodic Sturm–Liouville problem.
pub type SLProblem = problems::SLProblem<f64>;
/// Double-precision discriminant series.
pub type DiscriminantSeries = discriminant::DiscriminantSeries<f64>;
/// Real coefficient families built on a real ground solution.
pub type MainCoefficients = spps::MainCoefficients<f64>;
/// Real fundamental solution pair.
pub type SolutionPair = spps::SolutionPair<f64>;
/// Double-precision SUSY partner.
pub type DarbouxPartner = darboux::DarbouxPartner<f64>;
/// Double-precision pipeline result.
pub type HillAnalysis = analysis::Analysis<f64>;
/// Double-double pipeline result.
pub type PreciseAnalysis = analysis::Analysis<TwoFloat>;

/// Default series order.
pub const DEFAULT_ORDER: usize = 100;
/// Default node count (7000 subintervals).
pub const DEFAULT_GRID: usize = 7001;
