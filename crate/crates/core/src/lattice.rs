//! Planar lattices: Lagrange–Gauss reduction, enumeration, set equality and fitting
//! a lattice to a finite window.

use serde::Serialize;

use crate::chabauty::Patch;
use crate::error::{Error, Result};
use crate::format::ser_f64;
use crate::geometry::{Point2, PointIndex};

/// Relative size of `|det|` below which a basis counts as degenerate.
const DEGENERATE_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Basis2 {
    pub v1: Point2,
    pub v2: Point2,
}

impl Basis2 {
    pub fn new(v1: Point2, v2: Point2) -> Result<Self> {
        let b = Self { v1, v2 };
        b.check()?;
        Ok(b)
    }

    fn check(&self) -> Result<()> {
        let det = self.det();
        let scale = self.v1.norm() * self.v2.norm();
        if !det.is_finite() || det.abs() <= DEGENERATE_RATIO * scale || scale == 0.0 {
            return Err(Error::DegenerateBasis(det));
        }
        Ok(())
    }

    pub fn det(&self) -> f64 {
        self.v1.cross(self.v2)
    }

    pub fn point(&self, i: i64, j: i64) -> Point2 {
        self.v1 * i as f64 + self.v2 * j as f64
    }

    /// Real coordinates of `p` in this basis.
    pub fn coordinates(&self, p: Point2) -> (f64, f64) {
        let det = self.det();
        (p.cross(self.v2) / det, self.v1.cross(p) / det)
    }

    pub fn rotated(&self, angle: f64) -> Basis2 {
        Basis2 {
            v1: self.v1.rotate(angle),
            v2: self.v2.rotate(angle),
        }
    }
}

/// A Lagrange-reduced basis: `|v1| <= |v2|`, `0 <= v1·v2 <= |v1|²/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedBasis2 {
    pub basis: Basis2,
    /// Integer matrix `[[a, b], [c, d]]` with `v1' = a·v1 + b·v2`, `v2' = c·v1 + d·v2`.
    pub transform: [[i64; 2]; 2],
}

impl ReducedBasis2 {
    pub fn v1(&self) -> Point2 {
        self.basis.v1
    }

    pub fn v2(&self) -> Point2 {
        self.basis.v2
    }

    /// Nearest lattice point to `p`, as `(i, j, distance)`.
    pub fn nearest(&self, p: Point2) -> (i64, i64, f64) {
        let (x, y) = self.basis.coordinates(p);
        let (x0, y0) = (x.round() as i64, y.round() as i64);
        let mut best = (x0, y0, f64::INFINITY);
        for di in -1..=1 {
            for dj in -1..=1 {
                let (i, j) = (x0 + di, y0 + dj);
                let d = self.basis.point(i, j).dist(p);
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        best
    }

    /// Circumradius of the triangle `(0, v1, v2)`: the covering radius of the lattice.
    pub fn covering_radius(&self) -> f64 {
        let (a, b) = (self.v1(), self.v2());
        let c = b - a;
        a.norm() * b.norm() * c.norm() / (2.0 * a.cross(b).abs())
    }
}

pub fn covolume(b: &Basis2) -> Result<f64> {
    b.check()?;
    Ok(b.det().abs())
}

/// Lagrange–Gauss reduction.
pub fn gauss_reduce(b: &Basis2) -> Result<ReducedBasis2> {
    b.check()?;
    let (mut u, mut v) = (b.v1, b.v2);
    let mut m = [[1i64, 0], [0, 1]];
    if u.norm_sq() > v.norm_sq() {
        std::mem::swap(&mut u, &mut v);
        m.swap(0, 1);
    }
    for _ in 0..10_000 {
        let mu = (u.dot(v) / u.norm_sq()).round();
        if mu != 0.0 {
            v = v - u * mu;
            let k = mu as i64;
            m[1] = [m[1][0] - k * m[0][0], m[1][1] - k * m[0][1]];
        }
        if v.norm_sq() < u.norm_sq() {
            std::mem::swap(&mut u, &mut v);
            m.swap(0, 1);
        } else {
            break;
        }
    }
    if u.dot(v) < 0.0 {
        v = -v;
        m[1] = [-m[1][0], -m[1][1]];
    }
    Ok(ReducedBasis2 {
        basis: Basis2 { v1: u, v2: v },
        transform: m,
    })
}

/// All lattice points in the closed ball `B_R(0)`.
pub fn lattice_ball(b: &Basis2, radius: f64) -> Result<Patch> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let r = gauss_reduce(b)?;
    let det = r.basis.det().abs();
    // |i| <= R|v2|/|det| and |j| <= R|v1|/|det| for points of norm <= R
    let imax = (radius * r.v2().norm() / det).floor() as i64 + 1;
    let jmax = (radius * r.v1().norm() / det).floor() as i64 + 1;
    let mut pts = Vec::new();
    for i in -imax..=imax {
        for j in -jmax..=jmax {
            let p = r.basis.point(i, j);
            if p.norm() <= radius {
                pts.push(p);
            }
        }
    }
    Patch::new(pts, radius, "lattice")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeComparison {
    pub equal: bool,
    /// Integer coordinates of the generators of the first basis in the second, and back.
    pub first_in_second: [(i64, i64); 2],
    pub second_in_first: [(i64, i64); 2],
    /// Largest distance from a generator to the other lattice.
    #[serde(serialize_with = "ser_f64")]
    pub max_generator_distance: f64,
    #[serde(serialize_with = "ser_f64")]
    pub covolume_difference: f64,
}

/// Set equality of two lattices up to `tol`.
pub fn same_lattice(b1: &Basis2, b2: &Basis2, tol: f64) -> Result<LatticeComparison> {
    let (r1, r2) = (gauss_reduce(b1)?, gauss_reduce(b2)?);
    let locate = |r: &ReducedBasis2, p: Point2| r.nearest(p);
    let a = [locate(&r2, b1.v1), locate(&r2, b1.v2)];
    let b = [locate(&r1, b2.v1), locate(&r1, b2.v2)];
    // coordinates are reported against the original (unreduced) bases
    let back = |r: &ReducedBasis2, (i, j, _): (i64, i64, f64)| {
        let t = r.transform;
        (i * t[0][0] + j * t[1][0], i * t[0][1] + j * t[1][1])
    };
    let max_generator_distance = a.iter().chain(&b).map(|x| x.2).fold(0.0, f64::max);
    let covolume_difference = (b1.det().abs() - b2.det().abs()).abs();
    Ok(LatticeComparison {
        equal: max_generator_distance <= tol && covolume_difference <= tol,
        first_in_second: [back(&r2, a[0]), back(&r2, a[1])],
        second_in_first: [back(&r1, b[0]), back(&r1, b[1])],
        max_generator_distance,
        covolume_difference,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeFit {
    pub basis: ReducedBasis2,
    /// Largest distance from a patch point in `B_{W-tol}` to the fitted lattice.
    #[serde(serialize_with = "ser_f64")]
    pub residual: f64,
    /// Lattice points in `B_{W-tol}` without a patch point within `tol`.
    pub unmatched: usize,
    #[serde(serialize_with = "ser_f64")]
    pub covolume: f64,
}

fn least_squares(points: &[(Point2, i64, i64)]) -> Option<Basis2> {
    let (mut sii, mut sij, mut sjj) = (0.0, 0.0, 0.0);
    let (mut si, mut sj) = (Point2::ORIGIN, Point2::ORIGIN);
    for &(p, i, j) in points {
        let (i, j) = (i as f64, j as f64);
        sii += i * i;
        sij += i * j;
        sjj += j * j;
        si = si + p * i;
        sj = sj + p * j;
    }
    let det = sii * sjj - sij * sij;
    if det.abs() < 1e-9 {
        return None;
    }
    let v1 = (si * sjj - sj * sij) * (1.0 / det);
    let v2 = (sj * sii - si * sij) * (1.0 / det);
    Basis2::new(v1, v2).ok()
}

fn two_sided_check(patch: &Patch, r: &ReducedBasis2, tol: f64) -> Result<(f64, usize)> {
    let inner = patch.window_radius - tol;
    let residual = patch
        .points
        .iter()
        .filter(|p| p.norm() <= inner)
        .map(|&p| r.nearest(p).2)
        .fold(0.0, f64::max);
    let unmatched = if inner > 0.0 {
        let index = PointIndex::with_auto_cell(&patch.points);
        lattice_ball(&r.basis, inner)?
            .points
            .iter()
            .filter(|&&l| index.nearest(l).is_none_or(|(_, d)| d > tol))
            .count()
    } else {
        0
    };
    Ok((residual, unmatched))
}

/// Fits a lattice to a complete window containing the origin.
pub fn fit_lattice(patch: &Patch, tol: f64) -> Result<LatticeFit> {
    if patch.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "lattice fitting needs at least 5 points, got {}",
            patch.len()
        )));
    }
    let mut pts: Vec<Point2> = patch.points.clone();
    pts.sort_by(|a, b| a.norm_sq().total_cmp(&b.norm_sq()));
    if pts[0].norm() > tol {
        return Err(Error::InvalidArgument("patch does not contain the origin".into()));
    }
    let nonzero: Vec<Point2> = pts.into_iter().filter(|p| p.norm() > tol).collect();
    let v1 = *nonzero
        .first()
        .ok_or(Error::NotALattice { residual: f64::INFINITY, unmatched: 0 })?;
    let independent: Vec<Point2> = nonzero
        .iter()
        .copied()
        .filter(|p| v1.cross(*p).abs() / v1.norm() > 2.0 * tol)
        .collect();
    let shortest = independent
        .first()
        .ok_or(Error::NotALattice { residual: f64::INFINITY, unmatched: 0 })?
        .norm();
    let v2 = independent
        .iter()
        .copied()
        .take_while(|p| p.norm() <= 1.5 * shortest)
        .min_by(|a, b| v1.cross(*a).abs().total_cmp(&v1.cross(*b).abs()))
        .expect("non-empty");
    let mut reduced = gauss_reduce(&Basis2::new(v1, v2)?)?;

    let inner = patch.window_radius - tol;
    for _ in 0..2 {
        let matched: Vec<(Point2, i64, i64)> = patch
            .points
            .iter()
            .filter(|p| p.norm() <= inner)
            .filter_map(|&p| {
                let (i, j, d) = reduced.nearest(p);
                (d <= tol).then_some((p, i, j))
            })
            .collect();
        match least_squares(&matched).and_then(|b| gauss_reduce(&b).ok()) {
            Some(r) => reduced = r,
            None => break,
        }
    }

    let (residual, unmatched) = two_sided_check(patch, &reduced, tol)?;
    if residual >= tol || unmatched > 0 {
        return Err(Error::NotALattice { residual, unmatched });
    }
    Ok(LatticeFit {
        covolume: reduced.basis.det().abs(),
        basis: reduced,
        residual,
        unmatched,
    })
}
