//! Planar points and a uniform-grid index for nearest-neighbour and range queries.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::format::sig17;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

/// Serialized as `["x", "y"]` with 17 significant digits.
impl Serialize for Point2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [sig17(self.x), sig17(self.y)].serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Coord {
    Num(f64),
    Text(String),
}

impl Coord {
    fn value<E: serde::de::Error>(self) -> Result<f64, E> {
        match self {
            Coord::Num(x) => Ok(x),
            Coord::Text(t) => t.parse().map_err(E::custom),
        }
    }
}

impl<'de> Deserialize<'de> for Point2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = <[Coord; 2]>::deserialize(d)?;
        Ok(Point2::new(x.value()?, y.value()?))
    }
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(r * c, r * s)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, i.e. `det(self, other)`.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Rotation by a quarter turn counter-clockwise.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

/// Bucketed point set answering nearest-neighbour and disc queries.
#[derive(Debug, Clone)]
pub struct PointIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<Point2>,
    // bounding box of occupied cells, used to stop ring expansion
    min_cell: (i64, i64),
    max_cell: (i64, i64),
}

impl PointIndex {
    pub fn new(points: &[Point2], cell: f64) -> Self {
        assert!(cell > 0.0, "cell size must be positive");
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut min_cell = (i64::MAX, i64::MAX);
        let mut max_cell = (i64::MIN, i64::MIN);
        for (i, p) in points.iter().enumerate() {
            let key = Self::key_for(cell, *p);
            min_cell = (min_cell.0.min(key.0), min_cell.1.min(key.1));
            max_cell = (max_cell.0.max(key.0), max_cell.1.max(key.1));
            buckets.entry(key).or_default().push(i);
        }
        Self {
            cell,
            buckets,
            points: points.to_vec(),
            min_cell,
            max_cell,
        }
    }

    /// Picks a cell size from the point density of the bounding box.
    pub fn with_auto_cell(points: &[Point2]) -> Self {
        let cell = if points.len() < 2 {
            1.0
        } else {
            let (mut lo, mut hi) = (points[0], points[0]);
            for p in points {
                lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
            let n = points.len() as f64;
            let (dx, dy) = (hi.x - lo.x, hi.y - lo.y);
            // collinear sets have no area; fall back to the spacing along the extent
            (2.0 * dx * dy / n).sqrt().max(dx.max(dy) / n).max(1e-6)
        };
        Self::new(points, cell)
    }

    fn key_for(cell: f64, p: Point2) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Index and distance of the point nearest to `q`, optionally skipping one index.
    pub fn nearest_excluding(&self, q: Point2, skip: Option<usize>) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let (cx, cy) = Self::key_for(self.cell, q);
        let mut best: Option<(usize, f64)> = None;
        let mut ring: i64 = 0;
        loop {
            for (kx, ky) in ring_cells(cx, cy, ring) {
                if let Some(ids) = self.buckets.get(&(kx, ky)) {
                    for &i in ids {
                        if Some(i) == skip {
                            continue;
                        }
                        let d = self.points[i].dist(q);
                        let better = match best {
                            None => true,
                            Some((bi, bd)) => d < bd || (d == bd && i < bi),
                        };
                        if better {
                            best = Some((i, d));
                        }
                    }
                }
            }
            // every point outside the searched square is at least `ring * cell` away
            if let Some((_, bd)) = best {
                if bd <= ring as f64 * self.cell {
                    return best;
                }
            }
            let reach = (cx - self.min_cell.0)
                .abs()
                .max((self.max_cell.0 - cx).abs())
                .max((cy - self.min_cell.1).abs())
                .max((self.max_cell.1 - cy).abs());
            if ring > reach {
                return best;
            }
            ring += 1;
        }
    }

    pub fn nearest(&self, q: Point2) -> Option<(usize, f64)> {
        self.nearest_excluding(q, None)
    }

    /// Indices of all points with `|p - q| <= r`, in increasing index order.
    pub fn within(&self, q: Point2, r: f64) -> Vec<usize> {
        let lo = Self::key_for(self.cell, Point2::new(q.x - r, q.y - r));
        let hi = Self::key_for(self.cell, Point2::new(q.x + r, q.y + r));
        let mut out = Vec::new();
        let lo = (lo.0.max(self.min_cell.0), lo.1.max(self.min_cell.1));
        let hi = (hi.0.min(self.max_cell.0), hi.1.min(self.max_cell.1));
        for kx in lo.0..=hi.0 {
            for ky in lo.1..=hi.1 {
                if let Some(ids) = self.buckets.get(&(kx, ky)) {
                    out.extend(ids.iter().copied().filter(|&i| self.points[i].dist(q) <= r));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn ring_cells(cx: i64, cy: i64, ring: i64) -> Vec<(i64, i64)> {
    if ring == 0 {
        return vec![(cx, cy)];
    }
    let mut cells = Vec::with_capacity(8 * ring as usize);
    for dx in -ring..=ring {
        cells.push((cx + dx, cy - ring));
        cells.push((cx + dx, cy + ring));
    }
    for dy in (-ring + 1)..ring {
        cells.push((cx - ring, cy + dy));
        cells.push((cx + ring, cy + dy));
    }
    cells
}
