//! Triplets `(q_{j+1}/q_j, q_j(q_jα − p_j), q_{j+1}(q_{j+1}α − p_{j+1}))`,
//! the classical convergent identities and badly-approximable profiling.

use std::cmp::Ordering;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::angle::AngleSpec;
use super::arith::{rational_to_f64, Interval, QuadValue};
use super::cf::{convergents, expand_cf, periodic_expansion, Convergent};
use crate::error::{Error, Result};
use crate::format::ser_f64;

/// Error bound every triplet field must meet.
pub const TRIPLET_ERROR_BITS: u64 = 64;

/// A real quantity with a certified rational enclosure.
#[derive(Debug, Clone, Serialize)]
pub struct Certified {
    /// Closest `f64` to the enclosure midpoint.
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    /// Width of the rational enclosure.
    #[serde(serialize_with = "ser_f64")]
    pub error_bound: f64,
    #[serde(skip)]
    enclosure: Interval,
}

impl Certified {
    pub fn from_interval(iv: Interval) -> Self {
        Self {
            value: iv.midpoint_f64(),
            error_bound: iv.width_f64(),
            enclosure: iv,
        }
    }

    pub fn enclosure(&self) -> &Interval {
        &self.enclosure
    }

    pub fn sign(&self) -> Option<Ordering> {
        self.enclosure.sign()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TripletSample {
    pub j: usize,
    pub beta: Certified,
    pub c: Certified,
    pub ctilde: Certified,
}

/// Residual of `q_j|q_{j+1}α − p_{j+1}| + q_{j+1}|q_jα − p_j| = 1` at one index.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub j: usize,
    /// Certified upper bound on the residual.
    #[serde(serialize_with = "ser_f64")]
    pub residual: f64,
    /// The residual was shown to vanish in exact arithmetic.
    pub exact: bool,
    /// `(q_jα − p_j)(q_{j+1}α − p_{j+1})` certified negative.
    pub sign_product_negative: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub rows: Vec<IdentityRow>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn all_signs_negative(&self) -> bool {
        self.rows.iter().all(|r| r.sign_product_negative)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    BadlyApproximable,
    Not,
    Unknown { horizon: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct BadApproxProfile {
    /// Minimum of `q_j|q_jα − p_j|` over the tail `j ∈ [⌈h/2⌉, h]`: the liminf estimate.
    #[serde(serialize_with = "ser_f64")]
    pub c_alpha_lower: f64,
    /// Minimum over every computed `j`.
    #[serde(serialize_with = "ser_f64")]
    pub global_min: f64,
    #[serde(serialize_with = "crate::format::ser_bigint")]
    pub max_partial_quotient: BigInt,
    pub verdict: Verdict,
}

/// Evaluation precision for products `q·(qα − p)` with `q <= q_max`.
pub fn triplet_bits(q_max: &BigInt) -> u64 {
    2 * q_max.bits() + TRIPLET_ERROR_BITS + 2
}

fn scaled_error(alpha: &AngleSpec, conv: &Convergent, bits: u64) -> Result<Interval> {
    // q·(qα − p) = (q²)α − pq
    let u = &conv.q * &conv.q;
    let v = &conv.p * &conv.q;
    alpha.affine(&u, &v, bits)
}

fn certify_width(name: &str, j: usize, iv: &Interval) -> Result<()> {
    let limit = BigRational::new(BigInt::one(), super::arith::pow2(TRIPLET_ERROR_BITS));
    if iv.width() > limit {
        return Err(Error::PrecisionExhausted(format!(
            "{name}_{j} cannot be bounded to 2^-{TRIPLET_ERROR_BITS} (width {:e})",
            iv.width_f64()
        )));
    }
    Ok(())
}

fn need_convergents(alpha: &AngleSpec, count: usize) -> Result<Vec<Convergent>> {
    let cs = convergents(alpha, count)?;
    if cs.len() < count {
        return Err(Error::InvalidArgument(format!(
            "{alpha} has only {} convergents, {count} requested",
            cs.len()
        )));
    }
    Ok(cs)
}

fn triplet_from(alpha: &AngleSpec, cur: &Convergent, next: &Convergent) -> Result<TripletSample> {
    let bits = triplet_bits(&next.q);
    let c = scaled_error(alpha, cur, bits)?;
    let ctilde = scaled_error(alpha, next, bits)?;
    certify_width("c", cur.j, &c)?;
    certify_width("c~", cur.j, &ctilde)?;
    let beta = Interval::point(BigRational::new(next.q.clone(), cur.q.clone()));
    Ok(TripletSample {
        j: cur.j,
        beta: Certified::from_interval(beta),
        c: Certified::from_interval(c),
        ctilde: Certified::from_interval(ctilde),
    })
}

/// Triplet at index `j >= 1`.
pub fn triplet(alpha: &AngleSpec, j: usize) -> Result<TripletSample> {
    if j == 0 {
        return Err(Error::InvalidArgument("triplet index starts at 1".into()));
    }
    let cs = need_convergents(alpha, j + 1)?;
    triplet_from(alpha, &cs[j - 1], &cs[j])
}

/// Triplets for every `j` in the range.
pub fn triplets(alpha: &AngleSpec, js: RangeInclusive<usize>) -> Result<Vec<TripletSample>> {
    if *js.start() == 0 {
        return Err(Error::InvalidArgument("triplet index starts at 1".into()));
    }
    let cs = need_convergents(alpha, js.end() + 1)?;
    js.map(|j| triplet_from(alpha, &cs[j - 1], &cs[j])).collect()
}

fn exact_residual(x: &QuadValue, cur: &Convergent, next: &Convergent) -> QuadValue {
    let e_cur = x.affine(&cur.q, &cur.p).abs();
    let e_next = x.affine(&next.q, &next.p).abs();
    let lhs = e_next.scale(&cur.q).add(&e_cur.scale(&next.q));
    lhs.sub(&QuadValue::rational(BigInt::one(), BigInt::one()))
}

/// Checks the convergent identity and the sign alternation over `js`.
pub fn verify_cf_identities(alpha: &AngleSpec, js: RangeInclusive<usize>) -> Result<IdentityReport> {
    if *js.start() == 0 {
        return Err(Error::InvalidArgument("identity index starts at 1".into()));
    }
    let cs = need_convergents(alpha, js.end() + 1)?;
    let mut rows = Vec::new();
    for j in js {
        let (cur, next) = (&cs[j - 1], &cs[j]);
        let s_cur = alpha.sign_affine(&cur.q, &cur.p)?;
        let s_next = alpha.sign_affine(&next.q, &next.p)?;
        let sign_product_negative = matches!(
            (s_cur, s_next),
            (Ordering::Less, Ordering::Greater) | (Ordering::Greater, Ordering::Less)
        );
        let (residual, exact) = match alpha.exact() {
            Some(x) => {
                let r = exact_residual(&x, cur, next);
                if r.is_zero() {
                    (0.0, true)
                } else {
                    (r.abs().enclose(128).hi.to_f64().unwrap_or(f64::INFINITY), false)
                }
            }
            None => {
                let bits = triplet_bits(&next.q) + 32;
                let e_cur = alpha.affine(&cur.q, &cur.p, bits)?.abs().scale(&next.q);
                let e_next = alpha.affine(&next.q, &next.p, bits)?.abs().scale(&cur.q);
                let r = (e_cur + e_next) - Interval::from_integer(BigInt::one());
                (rational_to_f64(&r.magnitude()).abs() * (1.0 + 1e-15), false)
            }
        };
        rows.push(IdentityRow {
            j,
            residual,
            exact,
            sign_product_negative,
        });
    }
    Ok(IdentityReport { rows })
}

/// Estimates `c_α = liminf q_j|q_jα − p_j|` up to `horizon`.
pub fn badly_approx_profile(alpha: &AngleSpec, horizon: usize) -> Result<BadApproxProfile> {
    if horizon < 2 {
        return Err(Error::InvalidArgument("horizon must be at least 2".into()));
    }
    let quotients = expand_cf(alpha, horizon)?;
    let cs = super::cf::convergents_from_quotients(&quotients);
    let mut values = Vec::with_capacity(cs.len());
    for conv in &cs {
        let bits = triplet_bits(&conv.q);
        let iv = scaled_error(alpha, conv, bits)?.abs();
        if iv.hi.is_zero() {
            // a rational's final convergent is α itself
            break;
        }
        values.push(rational_to_f64(&iv.lo));
    }
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("{alpha} is an integer")));
    }
    let tail_start = values.len().div_ceil(2);
    let tail_start = tail_start.min(values.len() - 1);
    let c_alpha_lower = values[tail_start..].iter().copied().fold(f64::INFINITY, f64::min);
    let global_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max_partial_quotient = quotients
        .iter()
        .skip(1)
        .max()
        .cloned()
        .unwrap_or_else(BigInt::zero);
    let verdict = match alpha {
        AngleSpec::Rational { .. } => Verdict::Not,
        AngleSpec::QuadraticIrrational(_) => Verdict::BadlyApproximable,
        AngleSpec::DecimalLiteral(_) => Verdict::Unknown { horizon },
    };
    Ok(BadApproxProfile {
        c_alpha_lower,
        global_min,
        max_partial_quotient,
        verdict,
    })
}

/// Limit of the triplet along one residue class of `j`.
#[derive(Debug, Clone, Serialize)]
pub struct ResidueTriplet {
    pub residue: usize,
    pub modulus: usize,
    #[serde(serialize_with = "ser_f64")]
    pub beta: f64,
    #[serde(serialize_with = "ser_f64")]
    pub c: f64,
    #[serde(serialize_with = "ser_f64")]
    pub ctilde: f64,
    /// Index at which the limit was evaluated.
    pub evaluated_at: usize,
}

/// Residue-class modulus for the triplet subsequences of a periodic expansion.
///
/// The triplet depends on the complete quotients (period `L`) and on the sign
/// `(-1)^j`, so classes are taken modulo `lcm(L, 2)`.
pub fn triplet_modulus(alpha: &AngleSpec) -> Result<(usize, usize)> {
    let p = periodic_expansion(alpha)?;
    Ok((p.preperiod.len(), p.period.len().lcm(&2)))
}

/// Limit triplet of the residue class containing `j`, for a quadratic irrational.
///
/// The class converges geometrically, so it is evaluated at the first index of
/// the class with `q >= 2^64`, where the distance to the limit is below `2^-120`.
pub fn limit_triplet(alpha: &AngleSpec, j: usize) -> Result<ResidueTriplet> {
    let (pre, modulus) = triplet_modulus(alpha)?;
    let mut target = j.max(pre + 1);
    while !(target - j).is_multiple_of(modulus) {
        target += 1;
    }
    let threshold = BigInt::one() << 64usize;
    let mut count = target + 2;
    loop {
        let cs = convergents(alpha, count)?;
        if cs[target - 1].q >= threshold {
            let t = triplet_from(alpha, &cs[target - 1], &cs[target])?;
            return Ok(ResidueTriplet {
                residue: j % modulus,
                modulus,
                beta: t.beta.value,
                c: t.c.value,
                ctilde: t.ctilde.value,
                evaluated_at: target,
            });
        }
        target += modulus;
        count = target + 2;
    }
}

/// One limit triplet per residue class.
pub fn limit_triplets(alpha: &AngleSpec) -> Result<Vec<ResidueTriplet>> {
    let (pre, modulus) = triplet_modulus(alpha)?;
    let start = pre + 1;
    (start..start + modulus).map(|j| limit_triplet(alpha, j)).collect()
}

/// `q` as `u64`, for index arithmetic on the spiral.
pub fn q_u64(c: &Convergent) -> Option<u64> {
    c.q.to_u64()
}
