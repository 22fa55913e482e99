//! Deterministic SVG overlays of patches, lattice points and rectangles.

use std::fmt::Write;

use fermat_chabauty::{Error, Point2, Result};

pub const MAX_PLOT_POINTS: usize = 100_000;

/// Bumped whenever the emitted markup changes.
pub const STYLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    /// Axis-aligned `+`.
    Plus,
    /// Diagonal `x`.
    Cross,
}

#[derive(Debug, Clone)]
pub struct LatticeLayer {
    pub label: String,
    pub points: Vec<Point2>,
    pub marker: Marker,
    pub color: &'static str,
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    /// Drawing covers `[-R, R]²`, padded by 5%.
    pub window_radius: f64,
    pub points: Vec<Point2>,
    pub lattices: Vec<LatticeLayer>,
    pub rectangles: Vec<[Point2; 4]>,
}

#[derive(Debug, Clone, Copy)]
pub struct PlotStyle {
    /// Point radius as a fraction of the window radius.
    pub point_radius: f64,
    pub marker_size: f64,
    pub pixels: u32,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            point_radius: 0.008,
            marker_size: 0.015,
            pixels: 800,
        }
    }
}

fn f(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// SVG with y pointing up: a point `(x, y)` is drawn at `(x, -y)`.
pub fn emit_plot(plot: &Plot, style: &PlotStyle) -> Result<String> {
    let count = plot.points.len() + plot.lattices.iter().map(|l| l.points.len()).sum::<usize>();
    if count > MAX_PLOT_POINTS {
        return Err(Error::TooManyPoints {
            count,
            limit: MAX_PLOT_POINTS,
        });
    }
    if !(plot.window_radius > 0.0) || !plot.window_radius.is_finite() {
        return Err(Error::InvalidArgument(format!("window radius must be positive, got {}", plot.window_radius)));
    }
    let r = plot.window_radius;
    let half = 1.05 * r;
    let stroke = r * 0.002;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{px}" height="{px}" viewBox="{o} {o} {w} {w}" data-style-version="{STYLE_VERSION}">"#,
        px = style.pixels,
        o = f(-half),
        w = f(2.0 * half)
    );
    let _ = writeln!(
        s,
        r##"<g id="axes" stroke="#bbbbbb" stroke-width="{sw}"><line x1="{a}" y1="0.000000" x2="{b}" y2="0.000000"/><line x1="0.000000" y1="{a}" x2="0.000000" y2="{b}"/><circle cx="0.000000" cy="0.000000" r="{rr}" fill="none"/></g>"##,
        sw = f(stroke),
        a = f(-r),
        b = f(r),
        rr = f(r)
    );
    let _ = writeln!(s, r##"<g id="points" fill="#1f4e99">"##);
    for p in &plot.points {
        let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="{}"/>"#, f(p.x), f(-p.y), f(style.point_radius * r));
    }
    s.push_str("</g>\n");
    let m = style.marker_size * r;
    for layer in &plot.lattices {
        let _ = writeln!(
            s,
            r#"<g class="lattice" data-label="{}" stroke="{}" stroke-width="{}">"#,
            layer.label,
            layer.color,
            f(2.0 * stroke)
        );
        for p in &layer.points {
            let (x, y) = (p.x, -p.y);
            let (a, b) = match layer.marker {
                Marker::Plus => ([x - m, y, x + m, y], [x, y - m, x, y + m]),
                Marker::Cross => ([x - m, y - m, x + m, y + m], [x - m, y + m, x + m, y - m]),
            };
            let _ = writeln!(
                s,
                r#"<path d="M{} {}L{} {}M{} {}L{} {}"/>"#,
                f(a[0]),
                f(a[1]),
                f(a[2]),
                f(a[3]),
                f(b[0]),
                f(b[1]),
                f(b[2]),
                f(b[3])
            );
        }
        s.push_str("</g>\n");
    }
    let _ = writeln!(s, r##"<g id="rectangles" fill="none" stroke="#c0392b" stroke-width="{}">"##, f(2.0 * stroke));
    for corners in &plot.rectangles {
        let pts: Vec<String> = corners.iter().map(|c| format!("{},{}", f(c.x), f(-c.y))).collect();
        let _ = writeln!(s, r#"<polygon points="{}"/>"#, pts.join(" "));
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(label: &str, marker: Marker) -> LatticeLayer {
        LatticeLayer {
            label: label.into(),
            points: vec![Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
            marker,
            color: "#000000",
        }
    }

    #[test]
    fn empty_patch_gives_axes_only() {
        let svg = emit_plot(&Plot { window_radius: 8.0, ..Default::default() }, &PlotStyle::default()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"viewBox="-8.400000 -8.400000 16.800000 16.800000""#));
        assert!(svg.contains(r#"id="axes""#));
        assert!(!svg.contains("<path"));
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn two_lattice_layers_have_distinct_markers() {
        let plot = Plot {
            window_radius: 2.0,
            points: vec![Point2::new(0.5, 0.5)],
            lattices: vec![layer("proof", Marker::Plus), layer("theorem", Marker::Cross)],
            rectangles: vec![],
        };
        let svg = emit_plot(&plot, &PlotStyle::default()).unwrap();
        assert_eq!(svg.matches(r#"class="lattice""#).count(), 2);
        // plus marker at (1, 0): horizontal stroke
        assert!(svg.contains(r#"<path d="M0.970000 0.000000L1.030000 0.000000"#));
        // cross marker at (1, 0): diagonal stroke
        assert!(svg.contains(r#"<path d="M0.970000 -0.030000L1.030000 0.030000"#));
    }

    #[test]
    fn too_many_points() {
        let plot = Plot {
            window_radius: 1.0,
            points: vec![Point2::ORIGIN; MAX_PLOT_POINTS + 1],
            ..Default::default()
        };
        assert!(matches!(emit_plot(&plot, &PlotStyle::default()), Err(Error::TooManyPoints { .. })));
    }

    #[test]
    fn deterministic() {
        let plot = Plot {
            window_radius: 3.0,
            points: vec![Point2::new(-0.0, 1.0 / 3.0)],
            lattices: vec![layer("a", Marker::Plus)],
            rectangles: vec![[Point2::ORIGIN, Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)]],
        };
        let a = emit_plot(&plot, &PlotStyle::default()).unwrap();
        assert_eq!(a, emit_plot(&plot, &PlotStyle::default()).unwrap());
        assert!(a.contains(r#"<circle cx="0.000000" cy="-0.333333""#));
    }
}
