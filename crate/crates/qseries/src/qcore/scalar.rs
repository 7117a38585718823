//! Working scalar types.
//!
//! Every series engine in this crate is generic over [`QReal`], the real
//! arithmetic it runs on. Two implementations are provided:
//!
//! - `f64`: the default 53-bit scalar.
//! - [`Dd`]: an unevaluated double-double (106 mantissa bits), for
//!   ill-conditioned sweeps where identity residuals degrade, e.g. |q|
//!   close to 1 or parameters near a resonant lattice.
//!
//! `Dd` follows the classical error-free transformation construction: a value
//! is the exact sum `hi + lo` of two doubles with `|lo| <= ulp(hi)/2`.

use std::cmp::Ordering;
use std::fmt;
use std::num::ParseFloatError;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Num, One, Zero};

/// Real scalar the series engines are generic over.
///
/// The bound set is exactly what error-controlled summation needs: field
/// arithmetic (through [`Num`]), ordering, conversions to and from `f64` for
/// tolerance bookkeeping, and exact scaling by powers of two for the
/// extended-range accumulator.
pub trait QReal:
    Copy
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Mantissa bits of this scalar (53 for `f64`, 106 for [`Dd`]).
    const PRECISION_BITS: u32;

    /// Relative rounding unit, 2^(1 - PRECISION_BITS), as an `f64`.
    const EPSILON: f64;

    /// Widens an `f64` exactly.
    fn from_f64(v: f64) -> Self;

    /// Rounds to the nearest `f64`.
    fn to_f64(self) -> f64;

    /// Absolute value.
    fn abs(self) -> Self;

    /// Square root (NaN for negative input, matching `f64::sqrt`).
    fn sqrt(self) -> Self;

    /// Exact scaling by 2^e.
    fn ldexp(self, e: i32) -> Self;

    /// True when the value is neither NaN nor infinite.
    fn is_finite(self) -> bool;
}

impl QReal for f64 {
    const PRECISION_BITS: u32 = 53;
    const EPSILON: f64 = f64::EPSILON;

    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }

    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }

    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    #[inline]
    fn ldexp(self, e: i32) -> Self {
        // 2^k is exact for |k| <= 1023; larger shifts go in chunks so the
        // intermediate scale factor stays finite and the result saturates
        // (to 0 or infinity) the same way repeated scaling would.
        let mut x = self;
        let mut e = e;
        while e > 1000 {
            x *= f64::exp2(1000.0);
            e -= 1000;
        }
        while e < -1000 {
            x *= f64::exp2(-1000.0);
            e += 1000;
        }
        x * f64::exp2(e as f64)
    }

    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

/// Sum of two doubles with exact rounding error, no magnitude assumption.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Sum of two doubles with exact rounding error, assuming |a| >= |b| or a == 0.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Product of two doubles with exact rounding error (via fused multiply-add).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, f64::mul_add(a, b, -p))
}

/// Double-double scalar: the unevaluated sum `hi + lo` with 106 mantissa bits.
///
/// Arithmetic uses the standard error-free transformations (two_sum,
/// two_prod on top of `f64::mul_add`); relative error per operation is a few
/// units in 2^-105. The exponent range is that of `f64`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    /// The value 0.
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    /// The value 1.
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    /// Renormalizes a dominant/residual pair into canonical form.
    #[inline]
    fn renorm(hi: f64, lo: f64) -> Dd {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    /// The high (dominant) component.
    #[inline]
    pub fn high(self) -> f64 {
        self.hi
    }

    /// The low (residual) component.
    #[inline]
    pub fn low(self) -> f64 {
        self.lo
    }

    /// Largest integer not above the value.
    pub fn floor(self) -> Dd {
        let f = self.hi.floor();
        if f == self.hi {
            // hi is already integral; the fractional part lives in lo.
            Dd::renorm(f, self.lo.floor())
        } else {
            Dd { hi: f, lo: 0.0 }
        }
    }

    /// Integer part, rounding toward zero.
    pub fn trunc(self) -> Dd {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            -(-self).floor()
        }
    }

    /// 10^k for moderate |k|, accurate to a few units in the last place.
    fn pow10(k: i32) -> Dd {
        let mut base = Dd::from_f64(10.0);
        let mut e = k.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        if k < 0 {
            Dd::ONE / acc
        } else {
            acc
        }
    }
}

impl PartialEq for Dd {
    #[inline]
    fn eq(&self, other: &Self) -> bool {
        // Canonical form makes componentwise comparison exact.
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for Dd {
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Add for Dd {
    type Output = Dd;

    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s2, e2) = quick_two_sum(s, e + t);
        Dd::renorm(s2, e2 + f)
    }
}

impl Sub for Dd {
    type Output = Dd;

    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;

    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        Dd::renorm(p, e)
    }
}

impl Div for Dd {
    type Output = Dd;

    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        // Three corrected quotient digits; full double-double accuracy.
        let q1 = self.hi / rhs.hi;
        if !q1.is_finite() {
            return Dd { hi: q1, lo: 0.0 };
        }
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        Dd::renorm(q1, q2) + Dd::from_f64(q3)
    }
}

impl Neg for Dd {
    type Output = Dd;

    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Rem for Dd {
    type Output = Dd;

    #[inline]
    fn rem(self, rhs: Dd) -> Dd {
        self - (self / rhs).trunc() * rhs
    }
}

impl Zero for Dd {
    #[inline]
    fn zero() -> Self {
        Dd::ZERO
    }

    #[inline]
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for Dd {
    #[inline]
    fn one() -> Self {
        Dd::ONE
    }
}

impl Num for Dd {
    type FromStrRadixErr = ParseFloatError;

    /// Decimal parsing only (radix 10); digits accumulate exactly in
    /// double-double, then the exponent applies as a correctly rounded
    /// power of ten.
    fn from_str_radix(s: &str, radix: u32) -> std::result::Result<Self, ParseFloatError> {
        // Reuse f64 parsing for validation and for the non-decimal error path.
        let as_f64 = f64::from_str_radix_err(s)?;
        if radix != 10 {
            return Ok(Dd::from_f64(as_f64));
        }
        let bytes = s.as_bytes();
        let mut i = 0;
        let mut negative = false;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            negative = bytes[i] == b'-';
            i += 1;
        }
        let mut mantissa = Dd::ZERO;
        let mut frac_digits: i32 = 0;
        let mut seen_dot = false;
        while i < bytes.len() {
            match bytes[i] {
                b'0'..=b'9' => {
                    mantissa = mantissa * Dd::from_f64(10.0)
                        + Dd::from_f64(f64::from(bytes[i] - b'0'));
                    if seen_dot {
                        frac_digits += 1;
                    }
                }
                b'.' if !seen_dot => seen_dot = true,
                b'e' | b'E' => break,
                _ => return Ok(Dd::from_f64(as_f64)),
            }
            i += 1;
        }
        let mut exp: i32 = 0;
        if i < bytes.len() {
            exp = s[i + 1..].parse::<i32>().unwrap_or(0);
        }
        let mut value = mantissa * Dd::pow10(exp - frac_digits);
        if negative {
            value = -value;
        }
        Ok(value)
    }
}

/// Helper so `Dd::from_str_radix` can delegate validation to `f64`.
trait F64Parse {
    fn from_str_radix_err(s: &str) -> std::result::Result<f64, ParseFloatError>;
}

impl F64Parse for f64 {
    fn from_str_radix_err(s: &str) -> std::result::Result<f64, ParseFloatError> {
        s.parse::<f64>()
    }
}

impl QReal for Dd {
    const PRECISION_BITS: u32 = 106;
    // 2^-105
    const EPSILON: f64 = 2.465190328815662e-32;

    #[inline]
    fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    fn sqrt(self) -> Self {
        if self.is_zero() {
            return Dd::ZERO;
        }
        let x = self.hi.sqrt();
        if !x.is_finite() || x == 0.0 {
            return Dd::from_f64(x);
        }
        // One Newton step in double-double doubles the 53 correct bits.
        let x = Dd::from_f64(x);
        x + (self - x * x) / (Dd::from_f64(2.0) * x)
    }

    #[inline]
    fn ldexp(self, e: i32) -> Self {
        Dd {
            hi: self.hi.ldexp(e),
            lo: self.lo.ldexp(e),
        }
    }

    #[inline]
    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

impl fmt::Display for Dd {
    /// Scientific notation with 31 significant digits (the last digit or two
    /// carry the usual double-double formatting slack).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const DIGITS: usize = 31;
        if !QReal::is_finite(*self) {
            return write!(f, "{}", self.hi);
        }
        if self.is_zero() {
            return f.write_str("0.0e0");
        }
        let neg = self.hi < 0.0;
        let mut x = self.abs();
        // Normalize into [1, 10).
        let mut e10 = self.hi.abs().log10().floor() as i32;
        x = x * Dd::pow10(-e10);
        if x.hi >= 10.0 {
            x = x / Dd::from_f64(10.0);
            e10 += 1;
        } else if x.hi < 1.0 {
            x = x * Dd::from_f64(10.0);
            e10 -= 1;
        }
        let mut digits = Vec::with_capacity(DIGITS);
        for _ in 0..DIGITS {
            let d = x.trunc().to_f64() as i32;
            digits.push(d.clamp(0, 9) as u8);
            x = (x - Dd::from_f64(f64::from(d))) * Dd::from_f64(10.0);
        }
        // Round on the first dropped digit and propagate carries.
        if x.hi >= 5.0 {
            for d in digits.iter_mut().rev() {
                if *d < 9 {
                    *d += 1;
                    break;
                }
                *d = 0;
            }
            if digits[0] == 0 {
                digits.insert(0, 1);
                digits.pop();
                e10 += 1;
            }
        }
        if neg {
            f.write_str("-")?;
        }
        write!(f, "{}.", digits[0])?;
        for d in &digits[1..] {
            write!(f, "{d}")?;
        }
        write!(f, "e{e10}")
    }
}
