//! Static SVG figures: one polyline per vortex trajectory.
//!
//! Chart per geometry: the sphere is drawn in spherical coordinates
//! (azimuth `atan2(y, x)` in `(-pi, pi]` against colatitude `acos(z)` in
//! `[0, pi]`), the hyperbolic plane in the Poincare disk
//! `w = (x, y)/(1 + z)`, the torus in canonical `[0, 2pi)^2` coordinates,
//! and the plane in its own coordinates with an auto-fitted viewport.
//! Segments are split where a periodic coordinate wraps so no spurious
//! straight lines cross the chart.

use std::fmt::Write as _;

use vortexlab::geometry::{wrap_angle, Coords, GeometryTag, Point3};
use vortexlab::Trajectory;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 46.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
];

/// Poincare disk image of a hyperboloid point; always inside the unit disk.
pub fn poincare_disk(p: Point3<f64>) -> (f64, f64) {
    let w = (p.x / (1.0 + p.z), p.y / (1.0 + p.z));
    assert!(
        w.0 * w.0 + w.1 * w.1 < 1.0,
        "hyperboloid point mapped outside the unit disk: {p:?}"
    );
    w
}

/// Spherical chart of a unit vector: azimuth in `(-pi, pi]` (atan2 branch),
/// colatitude in `[0, pi]`.
pub fn spherical_chart(p: Point3<f64>) -> (f64, f64) {
    (p.y.atan2(p.x), p.z.clamp(-1.0, 1.0).acos())
}

/// Figure metadata recorded in the SVG `<desc>` element.
pub struct FigureMeta<'a> {
    pub title: &'a str,
    pub scenario: &'a str,
    pub seed: u64,
    pub dt: f64,
    pub t_final: f64,
    pub strengths: &'a [f64],
    pub verdict: Option<&'a str>,
}

fn chart_series(trajectory: &Trajectory<f64>, vortex: usize) -> Vec<(f64, f64)> {
    let geometry = trajectory.states[0].geometry();
    trajectory
        .states
        .iter()
        .map(|state| match state.positions() {
            Coords::Spatial(pts) => match geometry {
                GeometryTag::Sphere => spherical_chart(pts[vortex]),
                GeometryTag::Hyperbolic => poincare_disk(pts[vortex]),
                _ => unreachable!(),
            },
            Coords::Planar(pts) => {
                let p = pts[vortex];
                match geometry {
                    GeometryTag::Torus => (wrap_angle(p.x), wrap_angle(p.y)),
                    _ => (p.x, p.y),
                }
            }
        })
        .collect()
}

/// Cut the series wherever a periodic chart coordinate jumps by more than
/// half a period.
fn split_segments(
    series: &[(f64, f64)],
    wrap_x: Option<f64>,
    wrap_y: Option<f64>,
) -> Vec<Vec<(f64, f64)>> {
    let mut segments = vec![Vec::new()];
    for (k, point) in series.iter().enumerate() {
        if k > 0 {
            let prev = series[k - 1];
            let jump_x = wrap_x.is_some_and(|p| (point.0 - prev.0).abs() > p / 2.0);
            let jump_y = wrap_y.is_some_and(|p| (point.1 - prev.1).abs() > p / 2.0);
            if jump_x || jump_y {
                segments.push(Vec::new());
            }
        }
        segments.last_mut().unwrap().push(*point);
    }
    segments
}

struct Viewport {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Viewport {
    fn map(&self, p: (f64, f64)) -> (f64, f64) {
        let sx = MARGIN + (p.0 - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN);
        let sy = HEIGHT - MARGIN - (p.1 - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN);
        (sx, sy)
    }
}

fn viewport_for(geometry: GeometryTag, series: &[Vec<(f64, f64)>]) -> Viewport {
    use std::f64::consts::{PI, TAU};
    match geometry {
        GeometryTag::Sphere => Viewport {
            x0: -PI,
            x1: PI,
            // Colatitude 0 (north pole) at the top of the figure.
            y0: PI,
            y1: 0.0,
        },
        GeometryTag::Hyperbolic => Viewport {
            x0: -1.05,
            x1: 1.05,
            y0: -1.05,
            y1: 1.05,
        },
        GeometryTag::Torus => Viewport {
            x0: 0.0,
            x1: TAU,
            y0: 0.0,
            y1: TAU,
        },
        GeometryTag::Plane => {
            let mut x0 = f64::INFINITY;
            let mut x1 = f64::NEG_INFINITY;
            let mut y0 = f64::INFINITY;
            let mut y1 = f64::NEG_INFINITY;
            for s in series {
                for (x, y) in s {
                    x0 = x0.min(*x);
                    x1 = x1.max(*x);
                    y0 = y0.min(*y);
                    y1 = y1.max(*y);
                }
            }
            // Square viewport around the data with 8% padding.
            let half = 0.54 * ((x1 - x0).max(y1 - y0)).max(1e-6);
            let cx = 0.5 * (x0 + x1);
            let cy = 0.5 * (y0 + y1);
            Viewport {
                x0: cx - half,
                x1: cx + half,
                y0: cy - half,
                y1: cy + half,
            }
        }
    }
}

/// Render one trajectory as a standalone SVG 1.1 document.
pub fn render_figure(trajectory: &Trajectory<f64>, meta: &FigureMeta<'_>) -> String {
    use std::f64::consts::TAU;
    let geometry = trajectory.states[0].geometry();
    let n = trajectory.states[0].n();
    let all_series: Vec<Vec<Vec<(f64, f64)>>> = (0..n)
        .map(|i| {
            let series = chart_series(trajectory, i);
            match geometry {
                GeometryTag::Sphere => split_segments(&series, Some(TAU), None),
                GeometryTag::Torus => split_segments(&series, Some(TAU), Some(TAU)),
                _ => vec![series],
            }
        })
        .collect();
    let flattened: Vec<Vec<(f64, f64)>> = all_series.iter().flatten().cloned().collect();
    let viewport = viewport_for(geometry, &flattened);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let strengths: Vec<String> = meta.strengths.iter().map(|g| format!("{g:.6}")).collect();
    let _ = writeln!(
        svg,
        "<desc>scenario={} geometry={} seed={} dt={} t_final={} strengths=[{}]{}</desc>",
        meta.scenario,
        geometry.name(),
        meta.seed,
        meta.dt,
        meta.t_final,
        strengths.join(", "),
        meta.verdict
            .map(|v| format!(" verdict={v}"))
            .unwrap_or_default()
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="28" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        meta.title
    );

    if geometry == GeometryTag::Hyperbolic {
        let center = viewport.map((0.0, 0.0));
        let edge = viewport.map((1.0, 0.0));
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="#444" stroke-width="1"/>"##,
            center.0,
            center.1,
            edge.0 - center.0
        );
    } else {
        let _ = writeln!(
            svg,
            r##"<rect x="{m}" y="{m}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#444" stroke-width="1"/>"##,
            m = MARGIN,
            w = WIDTH - 2.0 * MARGIN,
            h = HEIGHT - 2.0 * MARGIN
        );
    }

    for (vortex, segments) in all_series.iter().enumerate() {
        let color = PALETTE[vortex % PALETTE.len()];
        for segment in segments {
            if segment.len() >= 2 {
                let points: Vec<String> = segment
                    .iter()
                    .map(|p| {
                        let (sx, sy) = viewport.map(*p);
                        format!("{sx:.2},{sy:.2}")
                    })
                    .collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2" stroke-opacity="0.85"/>"#,
                    points.join(" ")
                );
            }
        }
        // Mark the final position so constant trajectories stay visible.
        if let Some(last) = segments.last().and_then(|s| s.last()) {
            let (sx, sy) = viewport.map(*last);
            let _ = writeln!(
                svg,
                r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="3" fill="{color}"/>"#
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use vortexlab::geometry::project_hyperboloid;

    #[test]
    fn disk_map_stays_inside_unit_circle() {
        for (x, y) in [(0.0, 0.0), (3.0, -4.0), (100.0, 0.1)] {
            let z = (1.0 + x * x + y * y as f64).sqrt();
            let p = project_hyperboloid(Point3::new(x, y, z)).unwrap();
            let (u, v) = poincare_disk(p);
            assert!(u * u + v * v < 1.0);
        }
    }

    #[test]
    fn spherical_chart_branch() {
        let (az, col) = spherical_chart(Point3::new(0.0, 0.0, 1.0));
        assert_eq!(col, 0.0);
        assert!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&az));
        let (az, col) = spherical_chart(Point3::new(-1.0, 0.0, 0.0));
        assert!((az - std::f64::consts::PI).abs() < 1e-15);
        assert!((col - std::f64::consts::PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn wrap_splitting() {
        let series = [(0.1, 1.0), (0.2, 1.0), (6.2, 1.1), (6.1, 1.2)];
        let segments = split_segments(&series, Some(std::f64::consts::TAU), None);
        assert_eq!(segments.len(), 2);
        assert_eq!(segments[0].len(), 2);
        assert_eq!(segments[1].len(), 2);
    }
}
