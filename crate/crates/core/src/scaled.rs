//! Complex numbers with an extended binary exponent.
//!
//! Products of a few hundred theta-function values easily leave the range of
//! `f64`, so every series in this crate accumulates in [`ScaledComplex`]: a
//! complex mantissa with modulus in `[1, 2)` together with an `i64` power of
//! two.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Exponent gap beyond which the smaller addend cannot affect the sum.
const ADD_CUTOFF: i64 = 64;

/// `x * 2^k` for exponents far outside the `i32` range `libm::ldexp` accepts.
fn ldexp(x: f64, k: i64) -> f64 {
    libm::ldexp(x, k.clamp(-4000, 4000) as i32)
}

fn scale_complex(z: Complex64, k: i64) -> Complex64 {
    Complex64::new(ldexp(z.re, k), ldexp(z.im, k))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawScaled")]
pub struct ScaledComplex {
    mantissa: Complex64,
    exp2: i64,
}

impl ScaledComplex {
    pub const ZERO: Self = Self {
        mantissa: Complex64::new(0.0, 0.0),
        exp2: 0,
    };
    pub const ONE: Self = Self {
        mantissa: Complex64::new(1.0, 0.0),
        exp2: 0,
    };

    /// Builds `mantissa * 2^exp2` and normalizes it.
    pub fn new(mantissa: Complex64, exp2: i64) -> Self {
        let mut out = Self { mantissa, exp2 };
        out.normalize();
        out
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0)
    }

    pub fn from_real(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), 0)
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.re.is_finite() && self.mantissa.im.is_finite()
    }

    /// `e^z` without intermediate overflow, for any finite `z`.
    pub fn exp(z: Complex64) -> Self {
        let t = z.re / std::f64::consts::LN_2;
        let k = t.floor();
        let modulus = (t - k).exp2();
        let (sin, cos) = z.im.sin_cos();
        Self::new(Complex64::new(modulus * cos, modulus * sin), k as i64)
    }

    /// Converts to a plain complex number; saturates to infinity or zero
    /// outside the double range.
    pub fn to_complex(&self) -> Complex64 {
        scale_complex(self.mantissa, self.exp2)
    }

    /// True when [`Self::to_complex`] is exact up to rounding (no overflow,
    /// no subnormal underflow).
    pub fn in_double_range(&self) -> bool {
        self.is_zero() || (-1020..1023).contains(&self.exp2)
    }

    /// `log2 |self|`, `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.exp2 as f64 + self.mantissa.norm().log2()
        }
    }

    /// `|self|` as `f64` (may saturate).
    pub fn abs(&self) -> f64 {
        ldexp(self.mantissa.norm(), self.exp2)
    }

    /// Compares moduli: exponent first, then mantissa modulus.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self.exp2.cmp(&other.exp2).then_with(|| {
                self.mantissa
                    .norm()
                    .partial_cmp(&other.mantissa.norm())
                    .unwrap_or(Ordering::Equal)
            }),
        }
    }

    pub fn recip(&self) -> Self {
        Self::ONE / *self
    }

    pub fn powi(&self, n: i64) -> Self {
        let mut base = if n < 0 { self.recip() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }

    /// Ratio of two moduli `|self| / |other|` as `f64` (saturating).
    pub fn abs_ratio(&self, other: &Self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if other.is_zero() {
            return f64::INFINITY;
        }
        ldexp(self.mantissa.norm() / other.mantissa.norm(), self.exp2 - other.exp2)
    }

    /// `|a - b| / max(|a|, |b|)`; zero when both vanish.
    pub fn rel_diff(a: &Self, b: &Self) -> f64 {
        let scale = if a.cmp_abs(b) == Ordering::Less { b } else { a };
        if scale.is_zero() {
            return 0.0;
        }
        (*a - *b).abs_ratio(scale)
    }

    fn normalize(&mut self) {
        let m = self.mantissa;
        if !(m.re.is_finite() && m.im.is_finite()) {
            return;
        }
        if m.re == 0.0 && m.im == 0.0 {
            self.mantissa = Complex64::new(0.0, 0.0);
            self.exp2 = 0;
            return;
        }
        // Pre-scale so that hypot cannot overflow or lose subnormal bits.
        let big = m.re.abs().max(m.im.abs());
        let (_, e_big) = libm::frexp(big);
        let shift = -(e_big as i64);
        let m = scale_complex(m, shift);
        let mut exp2 = self.exp2 - shift;
        let (_, e) = libm::frexp(m.norm());
        let mut m = scale_complex(m, -(e as i64 - 1));
        exp2 += e as i64 - 1;
        let r = m.norm();
        if r >= 2.0 {
            m = m * 0.5;
            exp2 += 1;
        } else if r < 1.0 {
            m = m * 2.0;
            exp2 -= 1;
        }
        self.mantissa = m;
        self.exp2 = exp2;
    }
}

#[derive(Deserialize)]
struct RawScaled {
    mantissa: Complex64,
    exp2: i64,
}

impl From<RawScaled> for ScaledComplex {
    fn from(raw: RawScaled) -> Self {
        Self::new(raw.mantissa, raw.exp2)
    }
}

impl Default for ScaledComplex {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl From<f64> for ScaledComplex {
    fn from(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl Mul for ScaledComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.mantissa * rhs.mantissa, self.exp2 + rhs.exp2)
    }
}

impl Mul<Complex64> for ScaledComplex {
    type Output = Self;
    fn mul(self, rhs: Complex64) -> Self {
        self * Self::from_complex(rhs)
    }
}

impl Div for ScaledComplex {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::new(self.mantissa / rhs.mantissa, self.exp2 - rhs.exp2)
    }
}

impl Add for ScaledComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp2 >= rhs.exp2 {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let gap = hi.exp2 - lo.exp2;
        if gap > ADD_CUTOFF {
            return hi;
        }
        Self::new(hi.mantissa + scale_complex(lo.mantissa, -gap), hi.exp2)
    }
}

impl Neg for ScaledComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            mantissa: -self.mantissa,
            exp2: self.exp2,
        }
    }
}

impl Sub for ScaledComplex {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl MulAssign for ScaledComplex {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl DivAssign for ScaledComplex {
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl AddAssign for ScaledComplex {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for ScaledComplex {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Sum for ScaledComplex {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, x| acc + x)
    }
}

impl Product for ScaledComplex {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ONE, |acc, x| acc * x)
    }
}

impl fmt::Display for ScaledComplex {
    /// `mantissa_re mantissa_im ×2^exp2`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.17e} {:.17e} ×2^{}",
            self.mantissa.re, self.mantissa.im, self.exp2
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / a.norm().max(b.norm())
    }

    #[test]
    fn zero_is_canonical() {
        let z = ScaledComplex::new(c(0.0, -0.0), 17);
        assert!(z.is_zero());
        assert_eq!(z.exp2(), 0);
        assert_eq!(ScaledComplex::ZERO.to_complex(), c(0.0, 0.0));
    }

    #[test]
    fn mantissa_is_normalized() {
        for z in [c(3.0, 4.0), c(1e-300, 0.0), c(-7.5e200, 2.0), c(0.0, 1.0), c(1.999999999999, 0.0)] {
            let s = ScaledComplex::from_complex(z);
            let r = s.mantissa().norm();
            assert!((1.0..2.0).contains(&r), "{z} -> {r}");
            assert_eq!(s.to_complex(), z);
        }
    }

    #[test]
    fn survives_products_far_outside_double_range() {
        let big = ScaledComplex::from_real(1e300);
        let p = big * big * big;
        assert!(p.is_finite());
        let back = p / big / big;
        assert!((back.to_complex().re - 1e300).abs() / 1e300 < 1e-15);
        assert!(!p.in_double_range());
        assert!((p.log2_abs() - 900.0 * 10f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn exp_matches_std_and_extends_it() {
        let z = c(3.7, -1.2);
        assert!(rel(ScaledComplex::exp(z).to_complex(), z.exp()) < 1e-15);
        let huge = ScaledComplex::exp(c(5000.0, 0.3));
        assert!((huge.log2_abs() - 5000.0 / std::f64::consts::LN_2).abs() < 1e-9);
        let arg = huge.mantissa().arg();
        assert!((arg - 0.3).abs() < 1e-12);
    }

    #[test]
    fn ordering_uses_exponent_then_mantissa() {
        let a = ScaledComplex::from_real(3.0);
        let b = ScaledComplex::from_real(-3.5);
        let tiny = ScaledComplex::exp(c(-4000.0, 0.0));
        assert_eq!(a.cmp_abs(&b), Ordering::Less);
        assert_eq!(tiny.cmp_abs(&a), Ordering::Less);
        assert_eq!(ScaledComplex::ZERO.cmp_abs(&tiny), Ordering::Less);
    }

    #[test]
    fn add_drops_negligible_terms() {
        let a = ScaledComplex::from_real(1.0);
        let b = ScaledComplex::exp(c(-100.0, 0.0));
        assert_eq!(a + b, a);
        assert_eq!((a - a), ScaledComplex::ZERO);
    }

    #[test]
    fn powi_and_recip() {
        let z = ScaledComplex::from_complex(c(0.3, 1.1));
        let p = z.powi(-3) * z.powi(3);
        assert!(ScaledComplex::rel_diff(&p, &ScaledComplex::ONE) < 1e-14);
        assert_eq!(z.powi(0), ScaledComplex::ONE);
    }

    #[test]
    fn display_format() {
        let s = ScaledComplex::from_real(6.0).to_string();
        assert_eq!(s, "1.50000000000000000e0 0.00000000000000000e0 ×2^2");
    }

    fn finite() -> impl Strategy<Value = Complex64> {
        (-1e100f64..1e100, -1e100f64..1e100, -50i32..50).prop_map(|(re, im, e)| {
            let s = 10f64.powi(e) / 1e100;
            c(re * s, im * s)
        })
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(z in finite()) {
            prop_assert_eq!(ScaledComplex::from_complex(z).to_complex(), z);
        }

        #[test]
        fn ring_laws_match_plain_complex(a in finite(), b in finite()) {
            let (sa, sb) = (ScaledComplex::from(a), ScaledComplex::from(b));
            prop_assert!(rel((sa * sb).to_complex(), a * b) < 1e-14);
            if b.norm() > 0.0 {
                prop_assert!(rel((sa / sb).to_complex(), a / b) < 1e-14);
            }
            let sum = a + b;
            if sum.norm() > 1e-3 * a.norm().max(b.norm()) {
                prop_assert!(rel((sa + sb).to_complex(), sum) < 1e-14);
            }
        }
    }
}
