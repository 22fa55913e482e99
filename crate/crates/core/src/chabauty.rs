//! Finite windows of closed planar sets and the Chabauty–Fell distance between them.
//!
//! `Δ(A, B)` is the infimum of `ε` such that every point of either set inside
//! `B_{1/ε}(0)` lies within `ε` of the other set; `d = min{1, Δ}`.
//! A window of radius `W` determines that predicate exactly whenever `1/ε + ε <= W`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::ser_f64;
use crate::geometry::{Point2, PointIndex};

/// Width of the final binary-search bracket.
pub const BRACKET_TOLERANCE: f64 = 1e-9;

/// A complete window `X ∩ B_W(0)` of a closed set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Patch {
    pub points: Vec<Point2>,
    #[serde(serialize_with = "ser_f64")]
    pub window_radius: f64,
    pub provenance: String,
}

impl Patch {
    /// Checked constructor: every point inside the window, no repeated points.
    pub fn new(points: Vec<Point2>, window_radius: f64, provenance: impl Into<String>) -> Result<Self> {
        if !(window_radius > 0.0) || !window_radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "window radius must be positive, got {window_radius}"
            )));
        }
        if let Some(p) = points.iter().find(|p| p.norm() > window_radius) {
            return Err(Error::InvalidArgument(format!(
                "point ({}, {}) lies outside the window of radius {window_radius}",
                p.x, p.y
            )));
        }
        if points.len() > 1 {
            let index = PointIndex::with_auto_cell(&points);
            for (i, &p) in points.iter().enumerate() {
                if let Some((_, d)) = index.nearest_excluding(p, Some(i)) {
                    if d == 0.0 {
                        return Err(Error::InvalidArgument(format!(
                            "repeated point ({}, {})",
                            p.x, p.y
                        )));
                    }
                }
            }
        }
        Ok(Self {
            points,
            window_radius,
            provenance: provenance.into(),
        })
    }

    /// Keeps only the points inside `B_W(0)`.
    pub fn clipped(points: impl IntoIterator<Item = Point2>, window_radius: f64, provenance: impl Into<String>) -> Result<Self> {
        let pts = points.into_iter().filter(|p| p.norm() <= window_radius).collect();
        Self::new(pts, window_radius, provenance)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Restriction to a smaller concentric window.
    pub fn restrict(&self, radius: f64) -> Patch {
        let r = radius.min(self.window_radius);
        Patch {
            points: self.points.iter().copied().filter(|p| p.norm() <= r).collect(),
            window_radius: r,
            provenance: self.provenance.clone(),
        }
    }

    pub fn rotated(&self, angle: f64) -> Patch {
        Patch {
            points: self.points.iter().map(|p| p.rotate(angle)).collect(),
            window_radius: self.window_radius,
            provenance: self.provenance.clone(),
        }
    }
}

/// Smallest `ε` with `1/ε + ε <= W`: the resolution limit of a window of radius `W`.
pub fn resolution_limit(window_radius: f64) -> f64 {
    if window_radius < 2.0 {
        return 1.0;
    }
    let disc = (window_radius * window_radius - 4.0).sqrt();
    // 2/(W + √(W²−4)) avoids cancellation in (W − √(W²−4))/2
    2.0 / (window_radius + disc)
}

/// Window radius needed to certify a distance `ε`.
pub fn radius_needed(eps: f64) -> f64 {
    1.0 / eps + eps
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaResult {
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    /// Radius up to which the windows were relied upon (`1/value + value`).
    #[serde(serialize_with = "ser_f64")]
    pub certified_radius: f64,
    /// Largest tested infeasible `ε`.
    #[serde(serialize_with = "ser_f64")]
    pub lower: f64,
    /// Smallest tested feasible `ε`; equals `value`.
    #[serde(serialize_with = "ser_f64")]
    pub upper: f64,
    /// True when the windows were too small and `value` is only an upper bound.
    pub resolution_limited: bool,
}

/// Nearest-neighbour distances from every point of `from` into `to` (∞ when `to` is empty).
fn cross_distances(from: &[Point2], to: &[Point2]) -> Vec<f64> {
    if to.is_empty() {
        return vec![f64::INFINITY; from.len()];
    }
    let index = PointIndex::with_auto_cell(to);
    from.par_iter()
        .map(|&p| index.nearest(p).map_or(f64::INFINITY, |(_, d)| d))
        .collect()
}

/// Points paired with their distance to the other set.
struct Inclusions {
    norms: Vec<f64>,
    dists: Vec<f64>,
}

impl Inclusions {
    fn new(a: &Patch, b: &Patch) -> Self {
        let mut norms: Vec<f64> = a.points.iter().map(|p| p.norm()).collect();
        norms.extend(b.points.iter().map(|p| p.norm()));
        let mut dists = cross_distances(&a.points, &b.points);
        dists.extend(cross_distances(&b.points, &a.points));
        Self { norms, dists }
    }

    /// `B_{1/ε}(0) ∩ A ⊆ N_ε(B)` and the symmetric inclusion.
    fn feasible(&self, eps: f64) -> bool {
        let ball = if eps > 0.0 { 1.0 / eps } else { f64::INFINITY };
        self.norms
            .iter()
            .zip(&self.dists)
            .all(|(&r, &d)| r > ball || d <= eps)
    }
}

/// Binary search for the window value of `Δ`; returns `(lower, upper)` with `upper` feasible.
fn search(inc: &Inclusions, start_hi: f64) -> (f64, f64) {
    if inc.feasible(0.0) {
        return (0.0, 0.0);
    }
    let mut hi = start_hi;
    let mut lo = 0.0;
    while !inc.feasible(hi) {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return (lo, f64::INFINITY);
        }
    }
    while hi - lo > BRACKET_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if inc.feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

fn check_windows(a: &Patch, b: &Patch) -> Result<f64> {
    let w = a.window_radius.min(b.window_radius);
    if w <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "window radius {w} is too small to certify anything"
        )));
    }
    Ok(w)
}

/// `Δ(A, B)` computed from complete windows.
///
/// A value of 0 means the windows agree as sets; the underlying sets are then within
/// [`resolution_limit`] of each other.
pub fn delta(a: &Patch, b: &Patch) -> Result<DeltaResult> {
    let w = check_windows(a, b)?;
    let inc = Inclusions::new(a, b);
    let (lower, upper) = search(&inc, 1.0);
    let needed = radius_needed(upper);
    if upper > 0.0 && needed > w {
        return Err(Error::WindowTooSmall {
            value: upper,
            needed,
            available: w,
        });
    }
    Ok(DeltaResult {
        value: upper,
        certified_radius: if upper > 0.0 { needed } else { w },
        lower,
        upper,
        resolution_limited: false,
    })
}

/// Like [`delta`], but when the window cannot resolve the value it returns the
/// certified upper bound `max(value, resolution_limit(W))` instead of failing.
pub fn delta_bounded(a: &Patch, b: &Patch) -> Result<DeltaResult> {
    let w = check_windows(a, b)?;
    let floor = resolution_limit(w);
    let inc = Inclusions::new(a, b);
    let (lower, upper) = search(&inc, 1.0);
    if upper == 0.0 || radius_needed(upper) <= w {
        return Ok(DeltaResult {
            value: upper,
            certified_radius: if upper > 0.0 { radius_needed(upper) } else { w },
            lower,
            upper,
            resolution_limited: false,
        });
    }
    if upper < floor {
        // f(floor) is decided inside the window and holds there, so Δ <= floor
        return Ok(DeltaResult {
            value: floor,
            certified_radius: w,
            lower,
            upper: floor,
            resolution_limited: true,
        });
    }
    Err(Error::WindowTooSmall {
        value: upper,
        needed: radius_needed(upper),
        available: w,
    })
}

/// `d(A, B) = min{1, Δ(A, B)}`.
pub fn chabauty_distance(a: &Patch, b: &Patch) -> Result<f64> {
    let w = check_windows(a, b)?;
    let inc = Inclusions::new(a, b);
    if !inc.feasible(1.0) {
        if w < 2.0 {
            return Err(Error::WindowTooSmall {
                value: 1.0,
                needed: 2.0,
                available: w,
            });
        }
        return Ok(1.0);
    }
    delta(a, b).map(|r| r.value.min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyReport {
    /// `d(P_k, P_{k+1})` for consecutive patches.
    pub successive: Vec<f64>,
    /// Steps where the successive distance grew.
    pub increases: usize,
    #[serde(serialize_with = "ser_f64")]
    pub tail_max: f64,
    #[serde(serialize_with = "ser_f64")]
    pub tolerance: f64,
    pub converged: bool,
}

/// Successive distances along a sequence of windows; converged when the maximum over
/// the second half of the sequence is below `tol`.
pub fn cauchy_report(patches: &[Patch], tol: f64) -> Result<CauchyReport> {
    if patches.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 patches, got {}",
            patches.len()
        )));
    }
    let w = patches[0].window_radius;
    if patches.iter().any(|p| p.window_radius != w) {
        return Err(Error::InvalidArgument("patches must share a window radius".into()));
    }
    let successive = patches
        .windows(2)
        .map(|pair| chabauty_distance(&pair[0], &pair[1]))
        .collect::<Result<Vec<_>>>()?;
    let increases = successive.windows(2).filter(|s| s[1] > s[0]).count();
    let tail = &successive[successive.len() / 2..];
    let tail_max = tail.iter().copied().fold(0.0, f64::max);
    Ok(CauchyReport {
        successive,
        increases,
        tail_max,
        tolerance: tol,
        converged: tail_max < tol,
    })
}
