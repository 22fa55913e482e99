//! Continued-fraction expansions and convergents.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::angle::AngleSpec;
use super::arith::isqrt;
use crate::error::{Error, Result};

/// The `j`-th convergent `p/q = [a_1; a_2, …, a_j]` (1-based, `q_1 = 1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub j: usize,
    #[serde(serialize_with = "crate::format::ser_bigint")]
    pub p: BigInt,
    #[serde(serialize_with = "crate::format::ser_bigint")]
    pub q: BigInt,
}

/// Eventually periodic expansion of a quadratic irrational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicCf {
    pub preperiod: Vec<BigInt>,
    pub period: Vec<BigInt>,
}

impl PeriodicCf {
    /// Partial quotient `a_j` (1-based).
    pub fn quotient(&self, j: usize) -> &BigInt {
        assert!(j >= 1);
        let i = j - 1;
        if i < self.preperiod.len() {
            &self.preperiod[i]
        } else {
            &self.period[(i - self.preperiod.len()) % self.period.len()]
        }
    }

    pub fn take(&self, count: usize) -> Vec<BigInt> {
        (1..=count).map(|j| self.quotient(j).clone()).collect()
    }
}

/// State `(P + √D) / Q` with `Q | D - P²`.
struct SurdState {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    sqrt_d: BigInt,
}

impl SurdState {
    fn from_spec(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) -> Self {
        let big_d = b * b * d;
        let (mut p, mut q) = if b.is_positive() {
            (a.clone(), c.clone())
        } else {
            (-a, -c)
        };
        let mut big_d = big_d;
        if !((&big_d - &p * &p) % &q).is_zero() {
            let aq = q.abs();
            p *= &aq;
            big_d *= &q * &q;
            q *= &aq;
        }
        let sqrt_d = isqrt(&big_d);
        Self {
            p,
            q,
            d: big_d,
            sqrt_d,
        }
    }

    fn step(&mut self) -> BigInt {
        let a = if self.q.is_positive() {
            (&self.p + &self.sqrt_d).div_floor(&self.q)
        } else {
            (&self.p + &self.sqrt_d + BigInt::one()).div_floor(&self.q)
        };
        let p_next = &a * &self.q - &self.p;
        let q_next = (&self.d - &p_next * &p_next) / &self.q;
        self.p = p_next;
        self.q = q_next;
        a
    }
}

/// Exact periodic expansion of a quadratic irrational.
pub fn periodic_expansion(alpha: &AngleSpec) -> Result<PeriodicCf> {
    let AngleSpec::QuadraticIrrational(qi) = alpha else {
        return Err(Error::InvalidArgument(
            "periodic expansion exists only for quadratic irrationals".into(),
        ));
    };
    let mut state = SurdState::from_spec(qi.a(), qi.b(), qi.c(), qi.d());
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut quotients = Vec::new();
    loop {
        let key = (state.p.clone(), state.q.clone());
        if let Some(&start) = seen.get(&key) {
            let period = quotients[start..].to_vec();
            quotients.truncate(start);
            return Ok(PeriodicCf {
                preperiod: quotients,
                period,
            });
        }
        seen.insert(key, quotients.len());
        quotients.push(state.step());
    }
}

/// Partial quotients `a_1..a_count` (fewer for a terminating rational expansion).
pub fn expand_cf(alpha: &AngleSpec, count: usize) -> Result<Vec<BigInt>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    match alpha {
        AngleSpec::Rational { num, den } => {
            let (mut n, mut d) = (num.clone(), den.clone());
            let mut out = Vec::new();
            while !d.is_zero() && out.len() < count {
                let (a, r) = n.div_mod_floor(&d);
                out.push(a);
                n = d;
                d = r;
            }
            Ok(out)
        }
        AngleSpec::QuadraticIrrational(qi) => {
            let mut state = SurdState::from_spec(qi.a(), qi.b(), qi.c(), qi.d());
            Ok((0..count).map(|_| state.step()).collect())
        }
        AngleSpec::DecimalLiteral(dec) => {
            let iv = dec.interval();
            let (mut lo, mut hi) = (iv.lo, iv.hi);
            let mut out = Vec::with_capacity(count);
            for j in 1..=count {
                let a_lo = lo.floor().to_integer();
                let a_hi = hi.floor().to_integer();
                if a_lo != a_hi {
                    return Err(Error::PrecisionExhausted(format!(
                        "partial quotient a_{j} of {} lies in [{a_lo}, {a_hi}]",
                        dec.digits()
                    )));
                }
                out.push(a_lo.clone());
                if j == count {
                    break;
                }
                let a = BigRational::from_integer(a_lo);
                let (f_lo, f_hi) = (&lo - &a, &hi - &a);
                if f_lo.is_zero() {
                    return Err(Error::PrecisionExhausted(format!(
                        "partial quotient a_{} of {} is unbounded within the literal's precision",
                        j + 1,
                        dec.digits()
                    )));
                }
                lo = f_hi.recip();
                hi = f_lo.recip();
            }
            Ok(out)
        }
    }
}

/// Convergents from a list of partial quotients.
pub fn convergents_from_quotients(quotients: &[BigInt]) -> Vec<Convergent> {
    let (mut p_prev, mut q_prev) = (BigInt::zero(), BigInt::one());
    let (mut p, mut q) = (BigInt::one(), BigInt::zero());
    let mut out = Vec::with_capacity(quotients.len());
    for (i, a) in quotients.iter().enumerate() {
        let p_next = a * &p + &p_prev;
        let q_next = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push(Convergent {
            j: i + 1,
            p: p.clone(),
            q: q.clone(),
        });
    }
    out
}

/// The first `count` convergents of α.
pub fn convergents(alpha: &AngleSpec, count: usize) -> Result<Vec<Convergent>> {
    Ok(convergents_from_quotients(&expand_cf(alpha, count)?))
}

/// The first convergent with the largest denominator `q <= n`.
pub fn largest_denominator_at_most(alpha: &AngleSpec, n: &BigInt) -> Result<Convergent> {
    if !n.is_positive() {
        return Err(Error::InvalidArgument("bound must be at least 1".into()));
    }
    let mut count = 16;
    loop {
        let cs = convergents(alpha, count)?;
        let exhausted = cs.len() < count;
        if exhausted || cs.last().is_some_and(|c| &c.q > n) {
            let mut best: Option<&Convergent> = None;
            for c in &cs {
                if &c.q <= n && best.is_none_or(|b| c.q > b.q) {
                    best = Some(c);
                }
            }
            return Ok(best.expect("q_1 = 1 always qualifies").clone());
        }
        count *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn pq(cs: &[Convergent]) -> Vec<(i64, i64)> {
        cs.iter()
            .map(|c| (c.p.to_string().parse().unwrap(), c.q.to_string().parse().unwrap()))
            .collect()
    }

    #[test]
    fn golden_ratio_quotients() {
        assert_eq!(expand_cf(&AngleSpec::golden(), 5).unwrap(), ints(&[1, 1, 1, 1, 1]));
    }

    #[test]
    fn sqrt2_quotients() {
        let a = AngleSpec::quadratic(0, 1, 1, 2).unwrap();
        assert_eq!(expand_cf(&a, 5).unwrap(), ints(&[1, 2, 2, 2, 2]));
    }

    #[test]
    fn rational_terminates() {
        let a = AngleSpec::rational(7, 3).unwrap();
        assert_eq!(expand_cf(&a, 10).unwrap(), ints(&[2, 3]));
        assert_eq!(expand_cf(&a, 1).unwrap(), ints(&[2]));
        let neg = AngleSpec::rational(-7, 3).unwrap();
        assert_eq!(expand_cf(&neg, 10).unwrap(), ints(&[-3, 1, 2]));
    }

    #[test]
    fn zero_count_rejected() {
        assert!(matches!(expand_cf(&AngleSpec::golden(), 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn convergent_examples() {
        assert_eq!(
            pq(&convergents(&AngleSpec::golden(), 5).unwrap()),
            vec![(1, 1), (2, 1), (3, 2), (5, 3), (8, 5)]
        );
        let sqrt2 = AngleSpec::quadratic(0, 1, 1, 2).unwrap();
        assert_eq!(
            pq(&convergents(&sqrt2, 4).unwrap()),
            vec![(1, 1), (3, 2), (7, 5), (17, 12)]
        );
        assert_eq!(
            pq(&convergents_from_quotients(&ints(&[1, 2, 3]))),
            vec![(1, 1), (3, 2), (10, 7)]
        );
    }

    #[test]
    fn negative_and_reduced_quadratics() {
        // (1 - √5)/2 = -0.618… = [-1; 2, 1, 1, …]
        let a = AngleSpec::quadratic(1, -1, 2, 5).unwrap();
        assert_eq!(expand_cf(&a, 5).unwrap(), ints(&[-1, 2, 1, 1, 1]));
        // (1 + √13)/2 = 2.302… = [2; 3, 3, 3, …]
        let b = AngleSpec::quadratic(1, 1, 2, 13).unwrap();
        assert_eq!(expand_cf(&b, 4).unwrap(), ints(&[2, 3, 3, 3]));
        // √3 = [1; 1, 2, 1, 2, …]
        let c = AngleSpec::quadratic(0, 1, 1, 3).unwrap();
        assert_eq!(expand_cf(&c, 5).unwrap(), ints(&[1, 1, 2, 1, 2]));
    }

    #[test]
    fn period_detection_reproduces_sequence() {
        for spec in ["quad:1,1,2,5", "quad:0,1,1,2", "quad:0,1,1,3", "quad:1,1,2,13", "quad:3,-2,7,11", "quad:0,1,1,94"] {
            let a: AngleSpec = spec.parse().unwrap();
            let p = periodic_expansion(&a).unwrap();
            let n = p.preperiod.len() + 4 * p.period.len();
            assert_eq!(p.take(n), expand_cf(&a, n).unwrap(), "{spec}");
        }
        let phi = periodic_expansion(&AngleSpec::golden()).unwrap();
        assert_eq!(phi.period, ints(&[1]));
    }

    #[test]
    fn decimal_expansion_is_certified() {
        let a = AngleSpec::decimal("1.6180339887498948482045868343656381177203", 256).unwrap();
        let q = expand_cf(&a, 30).unwrap();
        assert!(q.iter().all(|x| x == &BigInt::one()));
        assert!(matches!(expand_cf(&a, 200), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn largest_denominator_examples() {
        let c = largest_denominator_at_most(&AngleSpec::golden(), &BigInt::from(50)).unwrap();
        assert_eq!((c.p, c.q), (BigInt::from(55), BigInt::from(34)));
        let sqrt2 = AngleSpec::quadratic(0, 1, 1, 2).unwrap();
        let c = largest_denominator_at_most(&sqrt2, &BigInt::from(12)).unwrap();
        assert_eq!((c.p, c.q), (BigInt::from(17), BigInt::from(12)));
        let c = largest_denominator_at_most(&AngleSpec::golden(), &BigInt::one()).unwrap();
        assert_eq!((c.j, c.q), (1, BigInt::one()));
        let r = AngleSpec::rational(7, 3).unwrap();
        let c = largest_denominator_at_most(&r, &BigInt::from(1000)).unwrap();
        assert_eq!((c.p, c.q), (BigInt::from(7), BigInt::from(3)));
    }
}
