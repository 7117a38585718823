//! Extended-range complex arithmetic for series internals.
//!
//! Ratio-driven summation of theta-like series multiplies factors of size
//! q^(n(n-1)/2), which leaves the representable range of `f64` near n = 40
//! even though every *sum* of interest is moderate. [`Scaled`] carries a
//! complex mantissa together with a power-of-two exponent so products of
//! thousands of factors never overflow or underflow, and collapses back to
//! an ordinary complex number only at the end.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::scalar::QReal;

/// Magnitude of a complex number as `f64`, safe against component overflow
/// in the intermediate squares.
#[inline]
pub(crate) fn c_abs_f64<T: QReal>(z: Complex<T>) -> f64 {
    z.re.to_f64().hypot(z.im.to_f64())
}

/// Magnitude of a complex number at full working precision.
#[inline]
pub(crate) fn c_abs<T: QReal>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// Exact componentwise scaling by 2^e.
#[inline]
pub(crate) fn c_ldexp<T: QReal>(z: Complex<T>, e: i32) -> Complex<T> {
    Complex::new(z.re.ldexp(e), z.im.ldexp(e))
}

/// Widens an `(f64, f64)` pair into the working complex type.
#[inline]
pub(crate) fn c_from_f64<T: QReal>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::from_f64(re), T::from_f64(im))
}

/// Integer power by binary exponentiation, for exponents small enough that
/// the result stays representable.
pub(crate) fn cpowi_plain<T: QReal>(z: Complex<T>, n: u32) -> Complex<T> {
    let mut acc = Complex::one();
    let mut base = z;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

/// Complex number in the form `m * 2^e`, with `m` kept near unit magnitude.
///
/// The exponent is an `i64`, so the dynamic range is effectively unbounded
/// for this crate's purposes (the largest exponents in practice are a few
/// hundred thousand, from q^(n(n-1)/2) factors at n in the thousands).
#[derive(Clone, Copy, Debug)]
pub(crate) struct Scaled<T: QReal> {
    m: Complex<T>,
    e: i64,
}

impl<T: QReal> Scaled<T> {
    /// Exponent alignment beyond which the smaller addend cannot affect the
    /// larger one at double-double precision.
    const ADD_CUTOFF: i64 = 600;

    pub(crate) fn zero() -> Self {
        Scaled {
            m: Complex::zero(),
            e: 0,
        }
    }

    pub(crate) fn one() -> Self {
        Scaled {
            m: Complex::one(),
            e: 0,
        }
    }

    pub(crate) fn from_complex(z: Complex<T>) -> Self {
        Scaled { m: z, e: 0 }.renormed()
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.m.re.is_zero() && self.m.im.is_zero()
    }

    /// Brings the mantissa magnitude into roughly [1, 2).
    fn renormed(self) -> Self {
        if self.is_zero() {
            return Scaled {
                m: self.m,
                e: 0,
            };
        }
        let mag = c_abs_f64(self.m);
        if !mag.is_finite() {
            // A genuine infinity or NaN (division by an exact zero upstream);
            // rescaling cannot repair it, so it propagates as-is.
            return self;
        }
        let shift = mag.log2().floor() as i32;
        if shift == 0 {
            return self;
        }
        Scaled {
            m: c_ldexp(self.m, -shift),
            e: self.e + i64::from(shift),
        }
    }

    pub(crate) fn mul(self, rhs: Self) -> Self {
        Scaled {
            m: self.m * rhs.m,
            e: self.e + rhs.e,
        }
        .renormed()
    }

    pub(crate) fn div(self, rhs: Self) -> Self {
        Scaled {
            m: self.m / rhs.m,
            e: self.e - rhs.e,
        }
        .renormed()
    }

    pub(crate) fn mul_complex(self, rhs: Complex<T>) -> Self {
        self.mul(Scaled::from_complex(rhs))
    }

    pub(crate) fn div_complex(self, rhs: Complex<T>) -> Self {
        self.div(Scaled::from_complex(rhs))
    }

    pub(crate) fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.e >= rhs.e {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let de = big.e - small.e;
        if de > Self::ADD_CUTOFF {
            return big;
        }
        Scaled {
            m: big.m + c_ldexp(small.m, -(de as i32)),
            e: big.e,
        }
        .renormed()
    }

    pub(crate) fn sub(self, rhs: Self) -> Self {
        self.add(rhs.neg())
    }

    pub(crate) fn neg(self) -> Self {
        Scaled {
            m: -self.m,
            e: self.e,
        }
    }

    /// Integer power by binary exponentiation; exponent arithmetic stays in
    /// i64 so q^(n(n-1)/2) at large n is representable.
    pub(crate) fn powi(self, n: u64) -> Self {
        let mut acc = Scaled::one();
        let mut base = self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    /// log2 of the magnitude (-inf for zero), for growth monitoring.
    pub(crate) fn mag_log2(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        c_abs_f64(self.m).log2() + self.e as f64
    }

    /// Collapses to an ordinary complex number; saturates to infinity or
    /// zero when the exponent leaves f64 range.
    pub(crate) fn to_complex(self) -> Complex<T> {
        if self.is_zero() {
            return Complex::zero();
        }
        let e = self.e.clamp(-1_100_000, 1_100_000) as i32;
        c_ldexp(self.m, e)
    }
}

/// Stopping-rule bookkeeping for one-sided sums: returns the term's absolute
/// magnitude (saturating to f64 range) and whether it sits below half the
/// truncation budget relative to max(|partial|, 1).
#[inline]
pub(crate) fn term_status<T: QReal>(term: Scaled<T>, partial: Scaled<T>, eps: f64) -> (f64, bool) {
    let t = term.mag_log2();
    let p = partial.mag_log2().max(0.0);
    (t.exp2(), t - p < (0.5 * eps).log2())
}
