//! Scalar abstractions shared by every numerical module.
//!
//! Real-valued quantities (grid positions, spectral parameters, tolerances)
//! are generic over [`Real`]. Sampled functions are generic over [`Scalar`],
//! which covers both a real type and its complex extension. The complex case
//! carries the seed solution of the general-center discriminant.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive, Zero};
use twofloat::TwoFloat;

/// Floating point type usable as the real field: `f32`, `f64` or the
/// double-double [`TwoFloat`].
pub trait Real:
    Scalar<Real = Self>
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the provided impls.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in the real type")
    }

    /// Lossy conversion used for error reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Unit roundoff of the arithmetic.
    fn unit_roundoff() -> Self {
        Self::epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

impl Real for TwoFloat {
    // `FromPrimitive::from_f64` truncates to an integer for this type.
    fn lit(x: f64) -> Self {
        TwoFloat::from(x)
    }

    // `Float::epsilon` reports the smallest positive normal here.
    fn unit_roundoff() -> Self {
        TwoFloat::from(2f64.powi(-104))
    }
}

/// Element type of a sampled function: a [`Real`] or a `Complex` over one.
pub trait Scalar:
    Copy + Debug + PartialEq + NumAssign + Neg<Output = Self> + Send + Sync + 'static
{
    type Real: Real;

    fn from_real(r: Self::Real) -> Self;
    fn modulus(self) -> Self::Real;
    fn real(self) -> Self::Real;
    fn imag(self) -> Self::Real;
    fn finite(self) -> bool;
    /// Principal square root.
    fn principal_sqrt(self) -> Self;

    fn scale(self, r: Self::Real) -> Self {
        self * Self::from_real(r)
    }
}

macro_rules! impl_real_scalar {
    ($($t:ty),*) => {
        $(
            impl Scalar for $t {
                type Real = $t;

                fn from_real(r: $t) -> Self {
                    r
                }
                fn modulus(self) -> $t {
                    Float::abs(self)
                }
                fn real(self) -> $t {
                    self
                }
                fn imag(self) -> $t {
                    <$t>::zero()
                }
                fn finite(self) -> bool {
                    Float::is_finite(self)
                }
                fn principal_sqrt(self) -> Self {
                    Float::sqrt(self)
                }
            }
        )*
    };
}

impl_real_scalar!(f32, f64, TwoFloat);

impl<R: Real> Scalar for Complex<R> {
    type Real = R;

    fn from_real(r: R) -> Self {
        Complex::new(r, R::zero())
    }
    fn modulus(self) -> R {
        self.norm()
    }
    fn real(self) -> R {
        self.re
    }
    fn imag(self) -> R {
        self.im
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn principal_sqrt(self) -> Self {
        Complex::sqrt(self)
    }
}
