//! The rotation number α of a Fermat spiral and its rigorous evaluation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::arith::{isqrt, pow2, Interval, QuadValue};
use crate::error::{Error, Result};

/// Minimum working precision for decimal literals.
pub const MIN_DECIMAL_BITS: u32 = 64;

/// Exact or certified description of the angle difference α.
///
/// Textual form (used by the CLI and manifests):
/// `rat:p/q`, `quad:a,b,c,d` for `(a + b√d)/c`, `dec:<digits>@<bits>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AngleSpec {
    Rational { num: BigInt, den: BigInt },
    QuadraticIrrational(QuadraticIrrational),
    DecimalLiteral(DecimalLiteral),
}

/// `(a + b√d) / c` with `d` squarefree, `c > 0` and `gcd(a, b, c) = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticIrrational {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

/// A decimal approximation of α, trusted to half a unit in its last digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecimalLiteral {
    digits: String,
    mantissa: BigInt,
    scale: u32,
    bits: u32,
}

/// Certified bracket `lower <= α <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleEnclosure {
    pub lower: BigRational,
    pub upper: BigRational,
    pub width: f64,
}

impl QuadraticIrrational {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self> {
        if b.is_zero() {
            return Err(Error::InvalidSpec("quadratic irrational needs b != 0".into()));
        }
        if !c.is_positive() {
            return Err(Error::InvalidSpec("quadratic irrational needs c > 0".into()));
        }
        if d < BigInt::from(2) {
            return Err(Error::InvalidSpec("quadratic irrational needs d >= 2".into()));
        }
        if !is_squarefree(&d) {
            return Err(Error::InvalidSpec(format!("{d} is not squarefree")));
        }
        let g = a.gcd(&b).gcd(&c);
        Ok(Self {
            a: &a / &g,
            b: &b / &g,
            c: &c / &g,
            d,
        })
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn value(&self) -> QuadValue {
        QuadValue {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }
}

fn is_squarefree(d: &BigInt) -> bool {
    let limit = isqrt(d);
    let mut k = BigInt::from(2);
    while k <= limit {
        if (d % (&k * &k)).is_zero() {
            return false;
        }
        k += 1;
    }
    true
}

impl DecimalLiteral {
    pub fn new(digits: &str, bits: u32) -> Result<Self> {
        if bits < MIN_DECIMAL_BITS {
            return Err(Error::InvalidSpec(format!(
                "decimal literal needs at least {MIN_DECIMAL_BITS} bits of working precision, got {bits}"
            )));
        }
        let trimmed = digits.trim();
        let (neg, body) = match trimmed.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, trimmed.strip_prefix('+').unwrap_or(trimmed)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        let all_digits = |s: &str| s.chars().all(|ch| ch.is_ascii_digit());
        if (int_part.is_empty() && frac_part.is_empty()) || !all_digits(int_part) || !all_digits(frac_part) {
            return Err(Error::InvalidSpec(format!("malformed decimal literal {digits:?}")));
        }
        let joined = format!("{int_part}{frac_part}");
        let mut mantissa: BigInt = joined.parse().map_err(|_| Error::InvalidSpec(format!("malformed decimal literal {digits:?}")))?;
        if neg {
            mantissa = -mantissa;
        }
        Ok(Self {
            digits: trimmed.to_string(),
            mantissa,
            scale: frac_part.len() as u32,
            bits,
        })
    }

    pub fn digits(&self) -> &str {
        &self.digits
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `[x - ½ulp, x + ½ulp]` rounded outward to the working precision.
    pub fn interval(&self) -> Interval {
        let ten = BigInt::from(10).pow(self.scale);
        let two_m: BigInt = &self.mantissa * BigInt::from(2);
        let denom: BigInt = &ten * BigInt::from(2);
        let scale = pow2(self.bits as u64);
        let lo: BigInt = ((&two_m - BigInt::one()) * &scale).div_floor(&denom);
        let hi: BigInt = ((&two_m + BigInt::one()) * &scale + &denom - BigInt::one()).div_floor(&denom);
        Interval::new(
            BigRational::new(lo, scale.clone()),
            BigRational::new(hi, scale),
        )
    }
}

impl AngleSpec {
    pub fn rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let (num, den) = (num.into(), den.into());
        if den.is_zero() {
            return Err(Error::InvalidSpec("rational with zero denominator".into()));
        }
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num, den) };
        let g = num.gcd(&den);
        Ok(AngleSpec::Rational {
            num: &num / &g,
            den: &den / &g,
        })
    }

    pub fn quadratic(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self> {
        Ok(AngleSpec::QuadraticIrrational(QuadraticIrrational::new(
            a.into(),
            b.into(),
            c.into(),
            d.into(),
        )?))
    }

    pub fn decimal(digits: &str, bits: u32) -> Result<Self> {
        Ok(AngleSpec::DecimalLiteral(DecimalLiteral::new(digits, bits)?))
    }

    /// The golden ratio `(1 + √5) / 2`.
    pub fn golden() -> Self {
        Self::quadratic(1, 1, 2, 5).expect("valid")
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, AngleSpec::Rational { .. })
    }

    /// Exact value in Q(√d), unavailable for decimal literals.
    pub fn exact(&self) -> Option<QuadValue> {
        match self {
            AngleSpec::Rational { num, den } => Some(QuadValue::rational(num.clone(), den.clone())),
            AngleSpec::QuadraticIrrational(q) => Some(q.value()),
            AngleSpec::DecimalLiteral(_) => None,
        }
    }

    /// Enclosure of α of width at most `2^-bits`.
    pub fn enclose(&self, bits: u64) -> Result<AngleEnclosure> {
        let iv = self.affine(&BigInt::one(), &BigInt::zero(), bits)?;
        let width = iv.width_f64();
        Ok(AngleEnclosure {
            lower: iv.lo,
            upper: iv.hi,
            width,
        })
    }

    /// Enclosure of `u·α - v` whose width is at most `2^-bits`.
    pub fn affine(&self, u: &BigInt, v: &BigInt, bits: u64) -> Result<Interval> {
        match self {
            AngleSpec::DecimalLiteral(dec) => {
                let iv = dec.interval().scale(u) - Interval::from_integer(v.clone());
                let limit = BigRational::new(BigInt::one(), pow2(bits));
                if iv.width() > limit {
                    return Err(Error::PrecisionExhausted(format!(
                        "decimal literal {} cannot bound {u}·α - {v} to 2^-{bits} (width {:e})",
                        dec.digits,
                        iv.width_f64()
                    )));
                }
                Ok(iv)
            }
            _ => {
                let exact = self.exact().expect("exact spec").affine(u, v);
                Ok(exact.enclose(bits))
            }
        }
    }

    /// Sign of `u·α - v`, exact when possible and certified otherwise.
    pub fn sign_affine(&self, u: &BigInt, v: &BigInt) -> Result<Ordering> {
        if let Some(x) = self.exact() {
            return Ok(x.affine(u, v).sign());
        }
        let AngleSpec::DecimalLiteral(dec) = self else { unreachable!() };
        let iv = dec.interval().scale(u) - Interval::from_integer(v.clone());
        iv.sign().ok_or_else(|| {
            Error::PrecisionExhausted(format!(
                "sign of {u}·α - {v} is not determined by literal {}",
                dec.digits
            ))
        })
    }

    /// Double-precision approximation of α.
    pub fn to_f64(&self) -> f64 {
        match self {
            AngleSpec::Rational { num, den } => {
                super::arith::rational_to_f64(&BigRational::new(num.clone(), den.clone()))
            }
            AngleSpec::QuadraticIrrational(q) => q.value().to_f64(),
            AngleSpec::DecimalLiteral(d) => d.interval().midpoint_f64(),
        }
    }

    /// Fractional part of α as a fixed-point numerator over `2^bits`, rounded down,
    /// together with the numerator error bound (in units of `2^-bits`).
    pub(crate) fn frac_fixed(&self, bits: u64) -> Result<(BigInt, BigInt)> {
        let scale = pow2(bits);
        match self {
            AngleSpec::DecimalLiteral(dec) => {
                let iv = dec.interval();
                let lo = (&iv.lo * BigRational::from_integer(scale.clone())).floor().to_integer();
                let hi = (&iv.hi * BigRational::from_integer(scale.clone())).ceil().to_integer();
                let err = &hi - &lo;
                Ok((lo.mod_floor(&scale), err))
            }
            _ => {
                // enclosure of width 2^-(bits+2) keeps the floor error below one unit
                let iv = self.exact().unwrap().enclose(bits + 2);
                let lo = (&iv.lo * BigRational::from_integer(scale.clone())).floor().to_integer();
                let hi = (&iv.hi * BigRational::from_integer(scale.clone())).ceil().to_integer();
                let err = (&hi - &lo).max(BigInt::one());
                Ok((lo.mod_floor(&scale), err))
            }
        }
    }
}

impl fmt::Display for AngleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleSpec::Rational { num, den } => write!(f, "rat:{num}/{den}"),
            AngleSpec::QuadraticIrrational(q) => write!(f, "quad:{},{},{},{}", q.a, q.b, q.c, q.d),
            AngleSpec::DecimalLiteral(d) => write!(f, "dec:{}@{}", d.digits, d.bits),
        }
    }
}

impl FromStr for AngleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpec(format!("cannot parse angle {s:?}; expected rat:p/q, quad:a,b,c,d or dec:<digits>@<bits>"));
        let int = |t: &str| t.trim().parse::<BigInt>().map_err(|_| bad());
        if let Some(rest) = s.strip_prefix("rat:") {
            let (p, q) = rest.split_once('/').ok_or_else(bad)?;
            AngleSpec::rational(int(p)?, int(q)?)
        } else if let Some(rest) = s.strip_prefix("quad:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 4 {
                return Err(bad());
            }
            AngleSpec::quadratic(int(parts[0])?, int(parts[1])?, int(parts[2])?, int(parts[3])?)
        } else if let Some(rest) = s.strip_prefix("dec:") {
            let (digits, bits) = rest.split_once('@').ok_or_else(bad)?;
            let bits = bits.trim().parse::<u32>().map_err(|_| bad())?;
            AngleSpec::decimal(digits, bits)
        } else {
            Err(bad())
        }
    }
}

impl AngleEnclosure {
    pub fn lower_f64(&self) -> f64 {
        self.lower.to_f64().unwrap_or(f64::NAN)
    }
    pub fn upper_f64(&self) -> f64 {
        self.upper.to_f64().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for s in ["rat:7/3", "quad:1,1,2,5", "dec:0.41421356237309504880@128"] {
            let a: AngleSpec = s.parse().unwrap();
            assert_eq!(a.to_string(), s);
        }
    }

    #[test]
    fn canonicalization() {
        assert_eq!(AngleSpec::rational(14, -6).unwrap().to_string(), "rat:-7/3");
        assert_eq!(AngleSpec::quadratic(2, 2, 4, 5).unwrap().to_string(), "quad:1,1,2,5");
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(AngleSpec::quadratic(1, 1, 2, 8), Err(Error::InvalidSpec(_))));
        assert!(matches!(AngleSpec::quadratic(1, 0, 2, 5), Err(Error::InvalidSpec(_))));
        assert!(matches!(AngleSpec::quadratic(1, 1, 0, 5), Err(Error::InvalidSpec(_))));
        assert!(matches!(AngleSpec::rational(1, 0), Err(Error::InvalidSpec(_))));
        assert!(matches!(AngleSpec::decimal("0.5", 32), Err(Error::InvalidSpec(_))));
        assert!(matches!(AngleSpec::decimal("0.5x", 64), Err(Error::InvalidSpec(_))));
        assert!("phi".parse::<AngleSpec>().is_err());
    }

    #[test]
    fn golden_enclosure() {
        let e = AngleSpec::golden().enclose(100).unwrap();
        assert!(e.width <= 2f64.powi(-100));
        assert!((e.lower_f64() - 1.618_033_988_749_895).abs() < 1e-15);
    }

    #[test]
    fn decimal_enclosure_and_exhaustion() {
        let a = AngleSpec::decimal("1.41421356237309504880", 128).unwrap();
        let e = a.enclose(60).unwrap();
        assert!(e.lower < e.upper);
        let exact = AngleSpec::quadratic(0, 1, 1, 2).unwrap().enclose(200).unwrap();
        assert!(e.lower <= exact.lower && exact.upper <= e.upper);
        assert!(matches!(a.enclose(100), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn exact_signs() {
        let phi = AngleSpec::golden();
        // 2φ - 3 > 0, φ - 2 < 0
        assert_eq!(phi.sign_affine(&2.into(), &3.into()).unwrap(), Ordering::Greater);
        assert_eq!(phi.sign_affine(&1.into(), &2.into()).unwrap(), Ordering::Less);
    }
}
