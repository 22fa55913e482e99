//! Exact values in Q(√d) and rational interval enclosures.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn point(v: BigRational) -> Self {
        Self {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn from_integer(v: BigInt) -> Self {
        Self::point(BigRational::from_integer(v))
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn width_f64(&self) -> f64 {
        rational_to_f64_up(&self.width())
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn midpoint_f64(&self) -> f64 {
        rational_to_f64(&self.midpoint())
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    /// Sign of every member, or `None` when the interval touches zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            -self.clone()
        } else {
            let m = if -&self.lo > self.hi {
                -&self.lo
            } else {
                self.hi.clone()
            };
            Interval::new(BigRational::zero(), m)
        }
    }

    pub fn scale(&self, k: &BigInt) -> Interval {
        let k = BigRational::from_integer(k.clone());
        let (a, b) = (&self.lo * &k, &self.hi * &k);
        if a <= b {
            Interval::new(a, b)
        } else {
            Interval::new(b, a)
        }
    }

    pub fn recip(&self) -> Option<Interval> {
        if self.sign().is_none() || self.lo.is_zero() || self.hi.is_zero() {
            return None;
        }
        Some(Interval::new(self.hi.recip(), self.lo.recip()))
    }

    /// Largest absolute value of any member.
    pub fn magnitude(&self) -> BigRational {
        let a = self.lo.abs();
        let b = self.hi.abs();
        if a > b {
            a
        } else {
            b
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::new(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::new(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let c = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval::new(lo, hi)
    }
}

/// Nearest-ish `f64` for a rational (through a 128-bit scaled quotient).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 9.0e15 && d < 9.0e15 {
            return n / d;
        }
    }
    let n_bits = r.numer().bits() as i64;
    let d_bits = r.denom().bits() as i64;
    // shift so the integer quotient carries ~120 significant bits
    let shift = 120 - (n_bits - d_bits);
    let q = if shift >= 0 {
        (r.numer() << shift as usize) / r.denom()
    } else {
        r.numer() / (r.denom() << (-shift) as usize)
    };
    q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-shift as i32)
}

/// An `f64` upper bound for a non-negative rational.
pub fn rational_to_f64_up(r: &BigRational) -> f64 {
    let v = rational_to_f64(r);
    if v == 0.0 && !r.is_zero() {
        return f64::MIN_POSITIVE;
    }
    v * (1.0 + 4.0 * f64::EPSILON)
}

pub fn pow2(bits: u64) -> BigInt {
    BigInt::one() << bits as usize
}

/// `floor(sqrt(n))` for `n >= 0`.
pub fn isqrt(n: &BigInt) -> BigInt {
    debug_assert!(!n.is_negative());
    n.sqrt()
}

pub fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

/// Exact element `(a + b·√d) / c` of the real quadratic field; rationals use `b = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadValue {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl QuadValue {
    pub fn rational(num: BigInt, den: BigInt) -> Self {
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num, den)
        };
        Self {
            a: num,
            b: BigInt::zero(),
            c: den,
            d: BigInt::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact sign, using `a² ⋚ b²d` when the two parts disagree.
    pub fn sign(&self) -> Ordering {
        let sa = self.a.sign();
        let sb = if self.d.is_zero() {
            Sign::NoSign
        } else {
            self.b.sign()
        };
        match (sa, sb) {
            (Sign::NoSign, Sign::NoSign) => Ordering::Equal,
            (Sign::Plus, Sign::Plus | Sign::NoSign) | (Sign::NoSign, Sign::Plus) => {
                Ordering::Greater
            }
            (Sign::Minus, Sign::Minus | Sign::NoSign) | (Sign::NoSign, Sign::Minus) => Ordering::Less,
            (sa, _) => {
                let lhs = &self.a * &self.a;
                let rhs = &self.b * &self.b * &self.d;
                match lhs.cmp(&rhs) {
                    Ordering::Equal => Ordering::Equal,
                    Ordering::Greater => {
                        if sa == Sign::Plus {
                            Ordering::Greater
                        } else {
                            Ordering::Less
                        }
                    }
                    Ordering::Less => {
                        if sa == Sign::Plus {
                            Ordering::Less
                        } else {
                            Ordering::Greater
                        }
                    }
                }
            }
        }
    }

    pub fn abs(&self) -> QuadValue {
        if self.sign() == Ordering::Less {
            self.neg_ref()
        } else {
            self.clone()
        }
    }

    fn neg_ref(&self) -> QuadValue {
        QuadValue {
            a: -&self.a,
            b: -&self.b,
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }

    /// `u·self - v` for integers `u`, `v`.
    pub fn affine(&self, u: &BigInt, v: &BigInt) -> QuadValue {
        QuadValue {
            a: u * &self.a - v * &self.c,
            b: u * &self.b,
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> QuadValue {
        QuadValue {
            a: k * &self.a,
            b: k * &self.b,
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }

    fn common_d(&self, other: &QuadValue) -> BigInt {
        if self.d.is_zero() || self.b.is_zero() {
            other.d.clone()
        } else {
            debug_assert!(other.d.is_zero() || other.b.is_zero() || other.d == self.d);
            self.d.clone()
        }
    }

    pub fn add(&self, other: &QuadValue) -> QuadValue {
        let d = self.common_d(other);
        QuadValue {
            a: &self.a * &other.c + &other.a * &self.c,
            b: &self.b * &other.c + &other.b * &self.c,
            c: &self.c * &other.c,
            d,
        }
    }

    pub fn sub(&self, other: &QuadValue) -> QuadValue {
        self.add(&other.neg_ref())
    }

    /// Rational enclosure of width at most `1 / (c·2^bits)`.
    pub fn enclose(&self, bits: u64) -> Interval {
        let denom = &self.c * pow2(bits);
        let base = &self.a << bits as usize;
        if self.b.is_zero() || self.d.is_zero() {
            return Interval::point(BigRational::new(self.a.clone(), self.c.clone()));
        }
        let radicand = (&self.b * &self.b * &self.d) << (2 * bits) as usize;
        let s = isqrt(&radicand);
        if &s * &s == radicand {
            let v = if self.b.is_positive() { s } else { -s };
            return Interval::point(BigRational::new(base + v, denom));
        }
        let (lo, hi) = if self.b.is_positive() {
            (&base + &s, &base + &s + 1)
        } else {
            (&base - &s - 1, &base - &s)
        };
        Interval::new(
            BigRational::new(lo, denom.clone()),
            BigRational::new(hi, denom),
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.enclose(80).midpoint_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64, c: i64, d: i64) -> QuadValue {
        QuadValue {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    #[test]
    fn sign_of_mixed_parts() {
        // 3 - 2√2 > 0, 2 - √5 < 0, -7 + 5√2 > 0
        assert_eq!(q(3, -2, 1, 2).sign(), Ordering::Greater);
        assert_eq!(q(2, -1, 1, 5).sign(), Ordering::Less);
        assert_eq!(q(-7, 5, 1, 2).sign(), Ordering::Greater);
        assert_eq!(q(0, 0, 1, 2).sign(), Ordering::Equal);
    }

    #[test]
    fn enclosure_contains_value() {
        let phi = q(1, 1, 2, 5);
        let e = phi.enclose(64);
        let approx = BigRational::new(
            BigInt::from(1_618_033_988_749_894_848u64),
            BigInt::from(1_000_000_000_000_000_000u64),
        );
        assert!((e.midpoint() - approx).abs() < BigRational::new(1.into(), BigInt::from(10u64).pow(17)));
        assert!(e.width() <= BigRational::new(1.into(), pow2(64)));
    }

    #[test]
    fn interval_abs_and_mul() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let x = Interval::new(r(-1, 2), r(1, 3));
        assert_eq!(x.abs(), Interval::new(r(0, 1), r(1, 2)));
        let y = Interval::new(r(2, 1), r(3, 1));
        let p = x * y;
        assert_eq!(p, Interval::new(r(-3, 2), r(1, 1)));
    }

    #[test]
    fn f64_conversion_of_huge_rational() {
        let r = BigRational::new(pow2(300) + 1, pow2(299));
        assert!((rational_to_f64(&r) - 2.0).abs() < 1e-15);
    }
}
