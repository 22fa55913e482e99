//! Fermat-spiral points `x_n = √n·e^{2πiαn}` at arbitrary index.
//!
//! Angles are tracked as fixed-point turns. The reference path evaluates
//! `frac(αn)` from a rigorous enclosure of `nα` at `bits(n) + 96` bits; the
//! scanning path multiplies a 192-bit fixed-point copy of `frac(α)` by `n`
//! modulo `2^192`, so its error is `n·ε_α` with `ε_α <= 2^-190` for exact specs.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::ser_f64;
use crate::geometry::Point2;
use crate::number_theory::arith::pow2;
use crate::number_theory::{largest_denominator_at_most, AngleSpec};

/// Extra bits beyond `bits(n)` used when evaluating `frac(αn)`.
pub const ANGLE_GUARD_BITS: u64 = 96;

/// Indices scanned per parallel work unit.
const CHUNK: u64 = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpiralConfig {
    /// First index of the spiral (1 by default; 0 puts a point at the origin).
    pub n_min: u64,
    /// Upper bound on the number of candidate indices a window may scan.
    pub max_candidates: u64,
}

impl Default for SpiralConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            max_candidates: 400_000_000,
        }
    }
}

/// `frac(αn)` as fixed-point turns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleFraction {
    /// `floor(frac(αn)·2^128)` up to `error_bound`.
    #[serde(skip)]
    pub fixed: u128,
    #[serde(serialize_with = "ser_f64")]
    pub turns: f64,
    /// Bound on `|turns_exact - fixed/2^128|`, in turns.
    #[serde(serialize_with = "ser_f64")]
    pub error_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpiralPoint {
    pub n: u64,
    pub position: Point2,
    #[serde(serialize_with = "ser_f64")]
    pub error_bound: f64,
}

/// Spiral indices inside a closed disc.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexWindow {
    pub center: Point2,
    #[serde(serialize_with = "ser_f64")]
    pub radius: f64,
    pub indices: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    pub n: u64,
    pub m: u64,
    /// `n - m`.
    pub offset: i64,
    #[serde(serialize_with = "ser_f64")]
    pub distance: f64,
}

fn fixed_to_turns(fixed: u128) -> f64 {
    fixed as f64 * 2f64.powi(-128)
}

/// Signed turn difference `a - b` wrapped into `[-1/2, 1/2)`.
pub fn turn_difference(a: u128, b: u128) -> f64 {
    (a.wrapping_sub(b) as i128) as f64 * 2f64.powi(-128)
}

/// Unit vector `e^{2πi·turns}`, reduced to an octant before the trig call.
pub fn unit_vector(fixed: u128) -> Point2 {
    let quarter = fixed.wrapping_add(1u128 << 125) >> 126;
    let rem = fixed.wrapping_sub(quarter << 126) as i128;
    let angle = TAU * (rem as f64 * 2f64.powi(-128));
    let (s, c) = angle.sin_cos();
    match quarter & 3 {
        0 => Point2::new(c, s),
        1 => Point2::new(-s, c),
        2 => Point2::new(-c, -s),
        _ => Point2::new(s, -c),
    }
}

fn turns_to_fixed(turns: f64) -> u128 {
    let t = turns.rem_euclid(1.0);
    // 2^128 · t split to keep 53 significant bits
    ((t * 2f64.powi(64)) as u128) << 64
}

/// Certified `frac(αn)` at an explicit working precision.
pub fn angle_fraction_at(alpha: &AngleSpec, n: u64, bits: u64) -> Result<AngleFraction> {
    let scale = pow2(128);
    let (lo, width) = match alpha {
        AngleSpec::Rational { num, den } => {
            let r = (BigInt::from(n) * num).mod_floor(den);
            (BigRational::new(r, den.clone()), BigRational::zero())
        }
        _ => {
            let iv = alpha.affine(&BigInt::from(n), &BigInt::zero(), bits)?;
            let w = iv.width();
            let fl = iv.lo.floor();
            (&iv.lo - fl, w)
        }
    };
    let fixed = (lo * BigRational::from_integer(scale)).floor().to_integer();
    let fixed = fixed.to_u128().expect("fraction below one");
    let width = width.to_f64().unwrap_or(f64::INFINITY);
    let error_bound = width + 2f64.powi(-128);
    if error_bound > 2f64.powi(-64) {
        return Err(Error::PrecisionExhausted(format!(
            "frac({alpha}·{n}) bounded only to {error_bound:e}"
        )));
    }
    Ok(AngleFraction {
        fixed,
        turns: fixed_to_turns(fixed),
        error_bound,
    })
}

/// Certified `frac(αn)` under the default precision policy.
pub fn angle_fraction(alpha: &AngleSpec, n: u64) -> Result<AngleFraction> {
    let bits = 64 - n.leading_zeros() as u64 + ANGLE_GUARD_BITS;
    angle_fraction_at(alpha, n, bits)
}

fn position_error(n: u64, turn_error: f64) -> f64 {
    let r = (n as f64).sqrt();
    r * (TAU * turn_error + 2f64.powi(-50)) + r * 2f64.powi(-51)
}

/// Spiral point from the reference angle path.
pub fn spiral_point(alpha: &AngleSpec, n: u64) -> Result<SpiralPoint> {
    let frac = angle_fraction(alpha, n)?;
    let r = (n as f64).sqrt();
    Ok(SpiralPoint {
        n,
        position: unit_vector(frac.fixed) * r,
        error_bound: position_error(n, frac.error_bound),
    })
}

/// 192-bit fixed-point fraction of a turn, arithmetic modulo one turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Turns192([u64; 3]);

impl Turns192 {
    fn from_bigint(v: &BigInt) -> Self {
        let digits = v.to_u64_digits().1;
        let mut limbs = [0u64; 3];
        for (i, d) in digits.into_iter().take(3).enumerate() {
            limbs[i] = d;
        }
        Turns192(limbs)
    }

    fn wrapping_add(self, o: Turns192) -> Turns192 {
        let (a0, c0) = self.0[0].overflowing_add(o.0[0]);
        let (a1, c1a) = self.0[1].overflowing_add(o.0[1]);
        let (a1, c1b) = a1.overflowing_add(c0 as u64);
        let a2 = self.0[2]
            .wrapping_add(o.0[2])
            .wrapping_add((c1a | c1b) as u64);
        Turns192([a0, a1, a2])
    }

    fn wrapping_mul(self, k: u64) -> Turns192 {
        let mut out = [0u64; 3];
        let mut carry: u128 = 0;
        for (o, &limb) in out.iter_mut().zip(&self.0) {
            let prod = limb as u128 * k as u128 + carry;
            *o = prod as u64;
            carry = prod >> 64;
        }
        Turns192(out)
    }

    fn top128(self) -> u128 {
        ((self.0[2] as u128) << 64) | self.0[1] as u128
    }
}

/// A spiral with a cached fixed-point angle for fast window scans.
#[derive(Debug, Clone)]
pub struct Spiral {
    alpha: AngleSpec,
    step: Turns192,
    /// Error of `frac(α)` in turns (per unit of index).
    step_error: f64,
    config: SpiralConfig,
}

impl Spiral {
    pub fn new(alpha: &AngleSpec, config: SpiralConfig) -> Result<Self> {
        let (fixed, err) = alpha.frac_fixed(192)?;
        let step_error = err.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-192);
        Ok(Self {
            alpha: alpha.clone(),
            step: Turns192::from_bigint(&fixed),
            step_error,
            config,
        })
    }

    pub fn with_defaults(alpha: &AngleSpec) -> Result<Self> {
        Self::new(alpha, SpiralConfig::default())
    }

    pub fn alpha(&self) -> &AngleSpec {
        &self.alpha
    }

    pub fn config(&self) -> &SpiralConfig {
        &self.config
    }

    /// Turn error of the fast path at index `n`.
    pub fn turn_error(&self, n: u64) -> f64 {
        n as f64 * self.step_error + 2f64.powi(-127)
    }

    fn check_precision(&self, n_max: u64) -> Result<()> {
        let e = self.turn_error(n_max);
        if e > 2f64.powi(-64) {
            return Err(Error::PrecisionExhausted(format!(
                "angle of index {n_max} for {} bounded only to {e:e} turns",
                self.alpha
            )));
        }
        Ok(())
    }

    /// `frac(αn)·2^128` from the fixed-point path.
    pub fn fixed_turns(&self, n: u64) -> u128 {
        self.step.wrapping_mul(n).top128()
    }

    pub fn position(&self, n: u64) -> Point2 {
        unit_vector(self.fixed_turns(n)) * (n as f64).sqrt()
    }

    pub fn point(&self, n: u64) -> Result<SpiralPoint> {
        self.check_precision(n)?;
        Ok(SpiralPoint {
            n,
            position: self.position(n),
            error_bound: position_error(n, self.turn_error(n)),
        })
    }

    /// `x_m - x_n`, computed in the frame of `x_n` so that short displacements keep
    /// full relative accuracy at large index.
    pub fn displacement(&self, m: u64, n: u64) -> Point2 {
        let fn_ = self.fixed_turns(n);
        let delta = turn_difference(self.fixed_turns(m), fn_);
        let (rm, rn) = ((m as f64).sqrt(), (n as f64).sqrt());
        let half = std::f64::consts::PI * delta;
        let radial = if m + n == 0 {
            0.0
        } else {
            (m as f64 - n as f64) / (rm + rn) - 2.0 * rm * half.sin().powi(2)
        };
        let local = Point2::new(radial, rm * (TAU * delta).sin());
        let u = unit_vector(fn_);
        Point2::new(u.x * local.x - u.y * local.y, u.y * local.x + u.x * local.y)
    }

    fn candidate_range(&self, center_norm: f64, radius: f64) -> Result<(u64, u64)> {
        let inner = center_norm - radius;
        let lo = if inner > 0.0 {
            ((inner * inner).floor() as u64).saturating_sub(1)
        } else {
            0
        };
        let outer = center_norm + radius;
        let hi = (outer * outer).ceil() as u64 + 1;
        let lo = lo.max(self.config.n_min);
        if hi < lo {
            return Ok((lo, lo.saturating_sub(1)));
        }
        let count = hi - lo + 1;
        if count > self.config.max_candidates {
            return Err(Error::WindowTooLarge {
                candidates: count,
                limit: self.config.max_candidates,
            });
        }
        self.check_precision(hi)?;
        Ok((lo, hi))
    }

    /// Scans `[lo, hi]`, keeping indices whose angle is within `half_width` turns of
    /// `center_turns` (all of them when `half_width >= 0.5`) and that pass `accept`.
    fn scan<F>(&self, lo: u64, hi: u64, center_turns: u128, half_width: f64, accept: F) -> Vec<u64>
    where
        F: Fn(u64) -> bool + Sync,
    {
        if hi < lo {
            return Vec::new();
        }
        let limit: Option<u128> = if half_width >= 0.5 {
            None
        } else {
            Some((half_width * 2f64.powi(64)) as u128 * (1u128 << 64))
        };
        let chunks: Vec<(u64, u64)> = (lo..=hi)
            .step_by(CHUNK as usize)
            .map(|s| (s, (s + CHUNK - 1).min(hi)))
            .collect();
        let parts: Vec<Vec<u64>> = chunks
            .into_par_iter()
            .map(|(s, e)| {
                let mut acc = self.step.wrapping_mul(s);
                let mut out = Vec::new();
                for n in s..=e {
                    let t = acc.top128();
                    let near = match limit {
                        None => true,
                        Some(l) => {
                            let d = t.wrapping_sub(center_turns) as i128;
                            d.unsigned_abs() <= l
                        }
                    };
                    if near && accept(n) {
                        out.push(n);
                    }
                    acc = acc.wrapping_add(self.step);
                }
                out
            })
            .collect();
        parts.concat()
    }

    fn angular_half_width(center_norm: f64, radius: f64) -> f64 {
        if center_norm <= radius * 1.01 + 1e-9 {
            return 1.0;
        }
        let s = (radius / center_norm).min(1.0);
        s.asin() / TAU * (1.0 + 1e-9) + 1e-12
    }

    /// All indices `n >= n_min` with `|x_n - center| <= radius`.
    pub fn indices_in_ball(&self, center: Point2, radius: f64) -> Result<IndexWindow> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        let cn = center.norm();
        let (lo, hi) = self.candidate_range(cn, radius)?;
        let half = Self::angular_half_width(cn, radius);
        let ct = turns_to_fixed(center.angle() / TAU);
        let indices = self.scan(lo, hi, ct, half, |n| self.position(n).dist(center) <= radius);
        Ok(IndexWindow {
            center,
            radius,
            indices,
        })
    }

    /// All indices `m` with `|x_m - x_n| <= radius`, measured with [`Self::displacement`].
    pub fn indices_near_index(&self, n: u64, radius: f64) -> Result<IndexWindow> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        let cn = (n as f64).sqrt();
        let (lo, hi) = self.candidate_range(cn, radius)?;
        let half = Self::angular_half_width(cn, radius);
        let ct = self.fixed_turns(n);
        let indices = self.scan(lo, hi, ct, half, |m| self.displacement(m, n).norm() <= radius);
        Ok(IndexWindow {
            center: self.position(n),
            radius,
            indices,
        })
    }

    /// Nearest other spiral point to `x_n` (ties go to the smaller index).
    pub fn nearest_neighbor(&self, n: u64) -> Result<Neighbor> {
        let n_min = self.config.n_min;
        if n < n_min.max(1) + 1 {
            return Err(Error::InvalidArgument(format!(
                "nearest neighbour needs n > {}, got {n}",
                n_min.max(1)
            )));
        }
        let root = ((n as f64).sqrt().floor() as u64).max(1);
        let seed = largest_denominator_at_most(&self.alpha, &BigInt::from(root))?;
        let q = seed.q.to_u64().unwrap_or(1).max(1);
        let m0 = if n >= n_min + q { n - q } else { n + q };
        let bound = self.displacement(m0, n).norm();
        let window = self.indices_near_index(n, bound * (1.0 + 1e-12) + 1e-12)?;
        let mut best: Option<(u64, f64)> = None;
        for &m in window.indices.iter().filter(|&&m| m != n) {
            let d = self.displacement(m, n).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((m, d));
            }
        }
        let (m, distance) = best.unwrap_or((m0, bound));
        Ok(Neighbor {
            n,
            m,
            offset: n as i64 - m as i64,
            distance,
        })
    }
}

/// `indices_in_ball` with the default configuration.
pub fn indices_in_ball(alpha: &AngleSpec, center: Point2, radius: f64) -> Result<IndexWindow> {
    Spiral::with_defaults(alpha)?.indices_in_ball(center, radius)
}

/// `nearest_neighbor` with the default configuration.
pub fn nearest_neighbor(alpha: &AngleSpec, n: u64) -> Result<Neighbor> {
    Spiral::with_defaults(alpha)?.nearest_neighbor(n)
}
