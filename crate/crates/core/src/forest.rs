//! Density, Delone constants and empty-rectangle witnesses against the dense-forest
//! property.
//!
//! A witness is an `ε × V` rectangle containing no point of the set. For a fixed
//! direction the search is exact in the perpendicular offset: it sorts the
//! perpendicular coordinates of the points in the slab and takes gaps wider than `ε`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::chabauty::Patch;
use crate::error::{Error, Result};
use crate::format::{ser_f64, Num};
use crate::geometry::{Point2, PointIndex};
use crate::lattice::fit_lattice;
use crate::number_theory::AngleSpec;
use crate::spiral::{Spiral, SpiralConfig};

/// Radius of the local window used to fit a lattice at an anchor.
const FIT_RADIUS: f64 = 8.0;
const FIT_TOLERANCE: f64 = 0.05;
/// Most directions tried by the uniform fallback grid.
const MAX_GRID_DIRECTIONS: usize = 20_000;

/// `#{n >= n_min : √n <= r} / r²`, independent of the angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityRatio {
    #[serde(serialize_with = "ser_f64")]
    pub r: f64,
    pub count: u64,
    #[serde(serialize_with = "ser_f64")]
    pub ratio: f64,
}

pub fn density_ratio(r: f64, n_min: u64) -> Result<DensityRatio> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be >= 1, got {r}")));
    }
    let top = (r * r).floor() as u64;
    let count = (top + 1).saturating_sub(n_min);
    Ok(DensityRatio {
        r,
        count,
        ratio: count as f64 / (r * r),
    })
}

/// A set whose points can be listed inside any disc of a region `B_R(0)`.
pub trait PointSource: Sync {
    /// Every point in the closed disc; the disc must lie inside [`Self::region_radius`].
    fn points_in_disc(&self, center: Point2, radius: f64) -> Result<Vec<Point2>>;
    /// Radius of the origin-centered disc on which the source is complete.
    fn region_radius(&self) -> f64;
    /// Set point nearest to `target`, used to anchor local fits.
    fn anchor_near(&self, target: Point2) -> Result<Option<Point2>> {
        let pts = self.points_in_disc(target, 4.0_f64.min(self.region_radius()))?;
        Ok(pts
            .into_iter()
            .min_by(|a, b| a.dist(target).total_cmp(&b.dist(target))))
    }
}

impl PointSource for Patch {
    fn points_in_disc(&self, center: Point2, radius: f64) -> Result<Vec<Point2>> {
        Ok(self
            .points
            .iter()
            .copied()
            .filter(|p| p.dist(center) <= radius)
            .collect())
    }

    fn region_radius(&self) -> f64 {
        self.window_radius
    }
}

/// The spiral restricted to `B_R(0)`.
#[derive(Debug, Clone)]
pub struct SpiralSource {
    spiral: Spiral,
    radius: f64,
}

impl SpiralSource {
    pub fn new(alpha: &AngleSpec, radius: f64) -> Result<Self> {
        Self::with_config(alpha, radius, SpiralConfig::default())
    }

    pub fn with_config(alpha: &AngleSpec, radius: f64, config: SpiralConfig) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        Ok(Self {
            spiral: Spiral::new(alpha, config)?,
            radius,
        })
    }

    pub fn spiral(&self) -> &Spiral {
        &self.spiral
    }
}

impl PointSource for SpiralSource {
    fn points_in_disc(&self, center: Point2, radius: f64) -> Result<Vec<Point2>> {
        let w = self.spiral.indices_in_ball(center, radius)?;
        Ok(w.indices
            .iter()
            .map(|&n| self.spiral.position(n))
            .filter(|p| p.norm() <= self.radius)
            .collect())
    }

    fn region_radius(&self) -> f64 {
        self.radius
    }
}

/// An `ε × V` box: length `V` along `direction`, width `ε` across it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RectangleProbe {
    pub center: Point2,
    /// Direction of the long side, radians.
    #[serde(serialize_with = "ser_f64")]
    pub direction: f64,
    #[serde(serialize_with = "ser_f64")]
    pub width: f64,
    #[serde(serialize_with = "ser_f64")]
    pub length: f64,
}

impl RectangleProbe {
    pub fn new(center: Point2, direction: f64, width: f64, length: f64) -> Result<Self> {
        if !(width > 0.0) || !(length >= width) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < width <= length, got {width} x {length}"
            )));
        }
        Ok(Self { center, direction, width, length })
    }

    fn axes(&self) -> (Point2, Point2) {
        let d = Point2::from_polar(1.0, self.direction);
        (d, d.perp())
    }

    /// Closed containment.
    pub fn contains(&self, p: Point2) -> bool {
        let (d, n) = self.axes();
        let r = p - self.center;
        r.dot(d).abs() <= self.length / 2.0 && r.dot(n).abs() <= self.width / 2.0
    }

    pub fn corners(&self) -> [Point2; 4] {
        let (d, n) = self.axes();
        let (a, b) = (d * (self.length / 2.0), n * (self.width / 2.0));
        let c = self.center;
        [c + a + b, c + a - b, c - a - b, c - a + b]
    }

    pub fn circumradius(&self) -> f64 {
        0.5 * self.length.hypot(self.width)
    }

    /// Same rectangle, narrower and shorter.
    pub fn shrunk(&self, width: f64, length: f64) -> RectangleProbe {
        RectangleProbe { width, length, ..*self }
    }
}

/// How a witness was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStage {
    LatticeDirection,
    UniformGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub probe: RectangleProbe,
    pub stage: SearchStage,
    pub anchor: Point2,
}

/// True iff the rectangle lies in the source region and contains no source point.
pub fn verify_empty<S: PointSource + ?Sized>(source: &S, probe: &RectangleProbe) -> Result<bool> {
    let inside = probe.corners().iter().all(|c| c.norm() <= source.region_radius());
    if !inside {
        return Ok(false);
    }
    let pts = source.points_in_disc(probe.center, probe.circumradius() * (1.0 + 1e-12) + 1e-12)?;
    Ok(!pts.iter().any(|&p| probe.contains(p)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOptions {
    /// Anchor targets as fractions of the region radius, along the positive x-axis
    /// and rotated copies.
    pub anchor_fractions: Vec<f64>,
    pub anchor_angles: Vec<f64>,
    /// Half-height of the slab scanned across each direction.
    #[serde(serialize_with = "ser_f64")]
    pub slab_half_height: f64,
    pub uniform_fallback: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            anchor_fractions: vec![0.0, 0.5, 0.7, 0.85],
            anchor_angles: vec![0.0, 2.0],
            slab_half_height: 4.0,
            uniform_fallback: true,
        }
    }
}

/// Best gap wider than `width` among perpendicular offsets in the slab, as the offset
/// of its midpoint.
fn widest_gap(points: &[Point2], anchor: Point2, direction: f64, width: f64, length: f64, half_height: f64) -> Option<f64> {
    let d = Point2::from_polar(1.0, direction);
    let n = d.perp();
    let half = length / 2.0;
    let mut ws: Vec<f64> = points
        .iter()
        .map(|&p| p - anchor)
        .filter(|r| r.dot(d).abs() <= half * (1.0 + 1e-12) + 1e-12)
        .map(|r| r.dot(n))
        .filter(|w| w.abs() <= half_height)
        .collect();
    ws.push(-half_height);
    ws.push(half_height);
    ws.sort_by(f64::total_cmp);
    let need = width * (1.0 + 1e-9) + 1e-12;
    ws.windows(2)
        .filter(|g| g[1] - g[0] > need)
        .max_by(|a, b| (a[1] - a[0]).total_cmp(&(b[1] - b[0])))
        .map(|g| 0.5 * (g[0] + g[1]))
}

#[allow(clippy::too_many_arguments)]
fn try_direction<S: PointSource + ?Sized>(
    source: &S,
    points: &[Point2],
    anchor: Point2,
    direction: f64,
    width: f64,
    length: f64,
    half_height: f64,
    stage: SearchStage,
) -> Result<Option<Witness>> {
    let Some(offset) = widest_gap(points, anchor, direction, width, length, half_height) else {
        return Ok(None);
    };
    let n = Point2::from_polar(1.0, direction).perp();
    let probe = RectangleProbe::new(anchor + n * offset, direction, width, length)?;
    if verify_empty(source, &probe)? {
        return Ok(Some(Witness { probe, stage, anchor }));
    }
    Ok(None)
}

/// Directions of `v1`, `v2`, `v1 ± v2` of a lattice fitted around `anchor`.
fn lattice_directions<S: PointSource + ?Sized>(source: &S, anchor: Point2) -> Result<Vec<f64>> {
    if anchor.norm() + FIT_RADIUS > source.region_radius() {
        return Ok(Vec::new());
    }
    let local: Vec<Point2> = source
        .points_in_disc(anchor, FIT_RADIUS)?
        .into_iter()
        .map(|p| p - anchor)
        .filter(|p| p.norm() <= FIT_RADIUS)
        .collect();
    let Ok(patch) = Patch::new(local, FIT_RADIUS, "local") else {
        return Ok(Vec::new());
    };
    Ok(match fit_lattice(&patch, FIT_TOLERANCE) {
        Ok(fit) => {
            let (a, b) = (fit.basis.v1(), fit.basis.v2());
            [a, b, a + b, a - b].iter().map(|v| v.angle()).collect()
        }
        Err(_) => Vec::new(),
    })
}

fn anchors<S: PointSource + ?Sized>(source: &S, options: &SearchOptions) -> Result<Vec<Point2>> {
    let r = source.region_radius();
    let mut out: Vec<Point2> = Vec::new();
    for &f in &options.anchor_fractions {
        for &a in &options.anchor_angles {
            if f == 0.0 && a != options.anchor_angles[0] {
                continue;
            }
            if let Some(p) = source.anchor_near(Point2::from_polar(f * r, a))? {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
    }
    Ok(out)
}

/// Looks for an empty `width × length` rectangle inside the source region.
///
/// `None` only means this search found nothing at its resolution.
pub fn empty_rectangle_search<S: PointSource + ?Sized>(
    source: &S,
    width: f64,
    length: f64,
    options: &SearchOptions,
) -> Result<Option<Witness>> {
    if !(width > 0.0) || !(length >= width) {
        return Err(Error::InvalidArgument(format!("need 0 < width <= length, got {width} x {length}")));
    }
    if length > 2.0 * source.region_radius() {
        return Err(Error::InvalidArgument(format!(
            "length {length} exceeds the region diameter {}",
            2.0 * source.region_radius()
        )));
    }
    let h = options.slab_half_height.max(width);
    let anchor_list = anchors(source, options)?;
    let fetch = |a: Point2| source.points_in_disc(a, (length / 2.0).hypot(h) * (1.0 + 1e-9) + 1e-9);

    for &a in &anchor_list {
        let dirs = lattice_directions(source, a)?;
        if dirs.is_empty() {
            continue;
        }
        let pts = fetch(a)?;
        for d in dirs {
            if let Some(w) = try_direction(source, &pts, a, d, width, length, h, SearchStage::LatticeDirection)? {
                return Ok(Some(w));
            }
        }
    }

    if !options.uniform_fallback {
        return Ok(None);
    }
    // rotating by ε/(2V) moves the far end of the box by at most ε/4
    let count = ((PI / (width / (2.0 * length))).ceil() as usize).clamp(8, MAX_GRID_DIRECTIONS);
    for &a in &anchor_list {
        let pts = fetch(a)?;
        // lowest direction index wins, independent of scheduling
        let found = (0..count).into_par_iter().find_map_first(|k| {
            let d = PI * k as f64 / count as f64;
            try_direction(source, &pts, a, d, width, length, h, SearchStage::UniformGrid).transpose()
        });
        if let Some(w) = found {
            return w.map(Some);
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityRow {
    #[serde(serialize_with = "ser_f64")]
    pub width: f64,
    /// Longest tested length with an empty rectangle.
    pub longest: Option<Num>,
    pub witness: Option<Witness>,
}


/// For each width (processed in decreasing order), the longest of `lengths` admitting a
/// verified empty rectangle. Witnesses for wider boxes seed the narrower ones.
pub fn visibility_profile<S: PointSource + ?Sized>(
    source: &S,
    widths: &[f64],
    lengths: &[f64],
    options: &SearchOptions,
) -> Result<Vec<VisibilityRow>> {
    let mut ws: Vec<f64> = widths.to_vec();
    ws.sort_by(|a, b| b.total_cmp(a));
    let mut ls: Vec<f64> = lengths.to_vec();
    ls.sort_by(f64::total_cmp);
    let mut best: Option<(f64, Witness)> = None;
    let mut rows = Vec::new();
    for &w in &ws {
        let mut current = best.map(|(l, wit)| {
            let probe = wit.probe.shrunk(w, l);
            (l, Witness { probe, ..wit })
        });
        for &l in ls.iter().filter(|&&l| l >= w) {
            if current.is_some_and(|(cl, _)| cl >= l) {
                continue;
            }
            if l > 2.0 * source.region_radius() {
                break;
            }
            match empty_rectangle_search(source, w, l, options)? {
                Some(wit) => current = Some((l, wit)),
                None => break,
            }
        }
        rows.push(VisibilityRow {
            width: w,
            longest: current.map(|(l, _)| Num(l)),
            witness: current.map(|(_, wit)| wit),
        });
        best = current;
    }
    Ok(rows)
}

/// Packing radius and an interior covering-radius estimate over a disc window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeloneConstants {
    /// Half the smallest nearest-neighbour distance among window points.
    #[serde(serialize_with = "ser_f64")]
    pub packing: f64,
    /// Largest distance to the set over certified interior grid samples.
    #[serde(serialize_with = "ser_f64")]
    pub covering_estimate: f64,
    #[serde(serialize_with = "ser_f64")]
    pub grid_step: f64,
    pub window_center: Point2,
    #[serde(serialize_with = "ser_f64")]
    pub window_radius: f64,
    pub points: usize,
    pub samples: usize,
}

/// A sample `s` counts only when `|s − center| + d(s) <= radius`, so its nearest point
/// is known to lie in the window.
pub fn delone_constants<S: PointSource + ?Sized>(source: &S, center: Point2, radius: f64, grid_step: f64) -> Result<DeloneConstants> {
    if !(grid_step > 0.0) || !(radius > grid_step) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < grid_step < radius, got {grid_step} and {radius}"
        )));
    }
    if center.norm() + radius > source.region_radius() {
        return Err(Error::InvalidArgument("window leaves the source region".into()));
    }
    let pts = source.points_in_disc(center, radius)?;
    if pts.len() < 2 {
        return Err(Error::InvalidArgument(format!("window holds {} points", pts.len())));
    }
    let index = PointIndex::with_auto_cell(&pts);
    let packing = (0..pts.len())
        .into_par_iter()
        .map(|i| index.nearest_excluding(pts[i], Some(i)).map_or(f64::INFINITY, |(_, d)| d))
        .reduce(|| f64::INFINITY, f64::min)
        / 2.0;
    let k = (radius / grid_step).floor() as i64;
    let (covering_estimate, samples) = (-k..=k)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            let mut count = 0usize;
            for j in -k..=k {
                let off = Point2::new(i as f64 * grid_step, j as f64 * grid_step);
                if off.norm() > radius - grid_step {
                    continue;
                }
                let s = center + off;
                if let Some((_, d)) = index.nearest(s) {
                    if off.norm() + d <= radius {
                        best = best.max(d);
                        count += 1;
                    }
                }
            }
            (best, count)
        })
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
    Ok(DeloneConstants {
        packing,
        covering_estimate,
        grid_step,
        window_center: center,
        window_radius: radius,
        points: pts.len(),
        samples,
    })
}
