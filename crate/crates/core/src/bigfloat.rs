//! Binary fixed-point reals and complex numbers on top of `BigInt`.
//!
//! A value is `mantissa * 2^-prec`. Every operation truncates to the shared
//! precision of its operands, so the absolute error of each step is below
//! `2^-prec`; callers carry guard bits for accumulated error.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixed {
    mantissa: BigInt,
    prec: u32,
}

impl Fixed {
    pub fn zero(prec: u32) -> Self {
        Self {
            mantissa: BigInt::zero(),
            prec,
        }
    }

    pub fn from_int(n: impl Into<BigInt>, prec: u32) -> Self {
        Self {
            mantissa: n.into() << prec,
            prec,
        }
    }

    /// `num / den`, truncated toward minus infinity.
    pub fn from_ratio(num: i64, den: i64, prec: u32) -> Self {
        let m = (BigInt::from(num) << prec).div_floor(&BigInt::from(den));
        Self { mantissa: m, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn abs(&self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            prec: self.prec,
        }
    }

    /// Re-express at another precision (truncating when it drops bits).
    pub fn with_prec(&self, prec: u32) -> Self {
        let mantissa = if prec >= self.prec {
            &self.mantissa << (prec - self.prec)
        } else {
            &self.mantissa >> (self.prec - prec)
        };
        Self { mantissa, prec }
    }

    pub fn mul_int(&self, n: i64) -> Self {
        Self {
            mantissa: &self.mantissa * n,
            prec: self.prec,
        }
    }

    pub fn div_int(&self, n: i64) -> Self {
        Self {
            mantissa: self.mantissa.div_floor(&BigInt::from(n)),
            prec: self.prec,
        }
    }

    /// Multiply by `2^k` (`k` may be negative).
    pub fn shift(&self, k: i64) -> Self {
        let mantissa = if k >= 0 {
            &self.mantissa << k as u64
        } else {
            &self.mantissa >> (-k) as u64
        };
        Self {
            mantissa,
            prec: self.prec,
        }
    }

    pub fn div(&self, other: &Fixed) -> Self {
        debug_assert_eq!(self.prec, other.prec);
        Self {
            mantissa: (&self.mantissa << self.prec).div_floor(&other.mantissa),
            prec: self.prec,
        }
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.mantissa.is_negative(), "sqrt of a negative number");
        Self {
            mantissa: (&self.mantissa << self.prec).sqrt(),
            prec: self.prec,
        }
    }

    /// Nearest integer (ties away from zero) and the distance to it.
    pub fn round(&self) -> (BigInt, Fixed) {
        let half = BigInt::one() << (self.prec.max(1) - 1);
        let shifted = if self.mantissa.is_negative() {
            -((-&self.mantissa + &half) >> self.prec)
        } else {
            (&self.mantissa + &half) >> self.prec
        };
        let dist = (self - &Fixed::from_int(shifted.clone(), self.prec)).abs();
        (shifted, dist)
    }

    /// `log2 |x|` rounded up, or `None` for zero.
    pub fn magnitude_bits(&self) -> Option<i64> {
        if self.mantissa.is_zero() {
            None
        } else {
            Some(self.mantissa.bits() as i64 - self.prec as i64)
        }
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.mantissa.bits() as i64;
        if bits <= 1000 {
            self.mantissa.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-(self.prec as i32))
        } else {
            let drop = bits - 64;
            let top = (&self.mantissa >> drop as u64).to_f64().unwrap_or(f64::NAN);
            top * 2f64.powf((drop - self.prec as i64) as f64)
        }
    }

    /// Whether `|self| < 2^-k`.
    pub fn below_pow2(&self, k: i64) -> bool {
        match self.magnitude_bits() {
            None => true,
            Some(m) => m <= -k,
        }
    }

    /// `pi`, from Machin's formula `pi = 16 atan(1/5) - 4 atan(1/239)`.
    pub fn pi(prec: u32) -> Self {
        let work = prec + 32;
        let pi = atan_inv(5, work).mul_int(16) - atan_inv(239, work).mul_int(4);
        pi.with_prec(prec)
    }
}

/// `atan(1/n)` by its alternating Taylor series.
fn atan_inv(n: i64, prec: u32) -> Fixed {
    let n2 = BigInt::from(n * n);
    let mut power = (BigInt::one() << prec) / n; // 1/n^(2k+1)
    let mut sum = BigInt::zero();
    let mut k: i64 = 0;
    while !power.is_zero() {
        let term = &power / (2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &n2;
        k += 1;
    }
    Fixed {
        mantissa: sum,
        prec,
    }
}

impl Add for &Fixed {
    type Output = Fixed;
    fn add(self, rhs: &Fixed) -> Fixed {
        debug_assert_eq!(self.prec, rhs.prec);
        Fixed {
            mantissa: &self.mantissa + &rhs.mantissa,
            prec: self.prec,
        }
    }
}

impl Sub for &Fixed {
    type Output = Fixed;
    fn sub(self, rhs: &Fixed) -> Fixed {
        debug_assert_eq!(self.prec, rhs.prec);
        Fixed {
            mantissa: &self.mantissa - &rhs.mantissa,
            prec: self.prec,
        }
    }
}

impl Mul for &Fixed {
    type Output = Fixed;
    fn mul(self, rhs: &Fixed) -> Fixed {
        debug_assert_eq!(self.prec, rhs.prec);
        Fixed {
            mantissa: (&self.mantissa * &rhs.mantissa) >> self.prec,
            prec: self.prec,
        }
    }
}

impl Neg for &Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed {
            mantissa: -&self.mantissa,
            prec: self.prec,
        }
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        &self + &rhs
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        &self - &rhs
    }
}

impl Mul for Fixed {
    type Output = Fixed;
    fn mul(self, rhs: Fixed) -> Fixed {
        &self * &rhs
    }
}

impl PartialOrd for Fixed {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        (self.prec == other.prec).then(|| self.mantissa.cmp(&other.mantissa))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedComplex {
    pub re: Fixed,
    pub im: Fixed,
}

impl FixedComplex {
    pub fn new(re: Fixed, im: Fixed) -> Self {
        debug_assert_eq!(re.prec, im.prec);
        Self { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Self::new(Fixed::zero(prec), Fixed::zero(prec))
    }

    pub fn one(prec: u32) -> Self {
        Self::new(Fixed::from_int(1, prec), Fixed::zero(prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Self::new(self.re.with_prec(prec), self.im.with_prec(prec))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Fixed {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            &(&self.re * &o.re) - &(&self.im * &o.im),
            &(&self.re * &o.im) + &(&self.im * &o.re),
        )
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    pub fn scale_int(&self, n: i64) -> Self {
        Self::new(self.re.mul_int(n), self.im.mul_int(n))
    }

    pub fn div_int(&self, n: i64) -> Self {
        Self::new(self.re.div_int(n), self.im.div_int(n))
    }

    pub fn shift(&self, k: i64) -> Self {
        Self::new(self.re.shift(k), self.im.shift(k))
    }

    pub fn div(&self, o: &Self) -> Self {
        let den = o.norm_sqr();
        let num = self.mul(&o.conj());
        Self::new(num.re.div(&den), num.im.div(&den))
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.prec());
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.square();
            n >>= 1;
        }
        acc
    }

    /// `max(log2 |re|, log2 |im|)` rounded up, `None` at zero.
    pub fn magnitude_bits(&self) -> Option<i64> {
        match (self.re.magnitude_bits(), self.im.magnitude_bits()) {
            (None, None) => None,
            (a, b) => Some(a.unwrap_or(i64::MIN).max(b.unwrap_or(i64::MIN))),
        }
    }

    /// `e^z`, by halving `z` until it is tiny, a Taylor series, and repeated squaring.
    pub fn exp(&self) -> Self {
        let prec = self.prec();
        let mag = self.magnitude_bits().unwrap_or(i64::MIN).max(0);
        let halvings = (mag + 1 + (prec as f64).sqrt() as i64 / 2).max(0) as u32;
        // squaring amplifies relative error by 2 per round, values stay near 1
        let work = prec + halvings + 32 + (self.re.to_f64().abs() * 1.5) as u32;
        let z = self.with_prec(work).shift(-(halvings as i64));
        let mut term = FixedComplex::one(work);
        let mut sum = term.clone();
        let mut n: i64 = 1;
        loop {
            term = term.mul(&z).div_int(n);
            if term.magnitude_bits().map_or(true, |m| m < -(work as i64)) {
                break;
            }
            sum = sum.add(&term);
            n += 1;
        }
        for _ in 0..halvings {
            sum = sum.square();
        }
        sum.with_prec(prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_digits() {
        let pi = Fixed::pi(200);
        assert!((pi.to_f64() - std::f64::consts::PI).abs() < 1e-15);
        // 3.14159265358979323846264338327950288... scaled by 10^30
        let scaled = (pi.mantissa() * BigInt::from(10).pow(30)) >> 200u32;
        assert_eq!(scaled.to_string(), "3141592653589793238462643383279");
    }

    #[test]
    fn exp_of_i_pi_is_minus_one() {
        let prec = 300;
        let z = FixedComplex::new(Fixed::zero(prec), Fixed::pi(prec));
        let e = z.exp();
        let (r, dist) = e.re.round();
        assert_eq!(r, BigInt::from(-1));
        assert!(dist.below_pow2(250));
        assert!(e.im.below_pow2(250));
    }

    #[test]
    fn exp_real_matches_f64() {
        for x in [-40.0f64, -3.5, 0.0, 0.75, 5.0] {
            let prec = 200;
            let z = FixedComplex::new(
                Fixed::from_ratio((x * 4.0) as i64, 4, prec),
                Fixed::zero(prec),
            );
            let e = z.exp().re.to_f64();
            assert!(((e - x.exp()) / x.exp()).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn sqrt_and_division() {
        let two = Fixed::from_int(2, 128);
        let s = two.sqrt();
        assert!((s.to_f64() - 2f64.sqrt()).abs() < 1e-15);
        let a = FixedComplex::new(Fixed::from_int(3, 128), Fixed::from_int(4, 128));
        let q = a.div(&a);
        assert_eq!(q.re.round().0, BigInt::one());
        assert!(q.im.below_pow2(120));
    }
}
