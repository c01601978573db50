//! SVG rendering of a map with the initial and optimized paths.

use std::fmt::Write;

use bodypath::{HeightMap, Vec2};

const PIXELS_PER_METER: f64 = 100.0;
const UNKNOWN: &str = "#C8C8C8";
const INITIAL: &str = "#00A000";
const OPTIMIZED: &str = "#D00000";
const LEVELS: usize = 64;

// dark blue, teal, yellow
const STOPS: [(f64, [f64; 3]); 3] = [
    (0.0, [33.0, 40.0, 110.0]),
    (0.5, [30.0, 150.0, 140.0]),
    (1.0, [250.0, 230.0, 40.0]),
];

fn colormap(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let k = if t <= STOPS[1].0 { 0 } else { 1 };
    let (t0, c0) = STOPS[k];
    let (t1, c1) = STOPS[k + 1];
    let u = (t - t0) / (t1 - t0);
    let c: Vec<u8> = (0..3).map(|i| (c0[i] + u * (c1[i] - c0[i])).round() as u8).collect();
    format!("#{:02X}{:02X}{:02X}", c[0], c[1], c[2])
}

/// Renders the height map as one group of rectangles, the two paths as
/// polylines and the turn points as circles. World `+y` points up.
pub fn render(map: &HeightMap<f64>, initial: &[Vec2<f64>], optimized: &[Vec2<f64>], turn_points: &[usize]) -> String {
    let n = map.side_cells();
    let origin = map.origin();
    let size = map.width() * PIXELS_PER_METER;
    let cell = map.resolution() * PIXELS_PER_METER;
    let to_px = |p: Vec2<f64>| {
        (
            (p.x - origin.x) * PIXELS_PER_METER,
            size - (p.y - origin.y) * PIXELS_PER_METER,
        )
    };

    let heights: Vec<Option<f64>> = (0..n * n)
        .map(|k| map.surface_height((k % n) as i64, (k / n) as i64))
        .collect();
    let (lo, hi) = heights
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &h| {
            (lo.min(h), hi.max(h))
        });
    let level = |h: f64| {
        if hi > lo {
            (((h - lo) / (hi - lo)) * (LEVELS - 1) as f64).round() as usize
        } else {
            0
        }
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.4} {size:.4}">"#
    );
    let _ = writeln!(s, r#"<g id="map" shape-rendering="crispEdges">"#);
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{size:.4}" height="{size:.4}" fill="{UNKNOWN}"/>"#
    );
    for iy in 0..n {
        let y = size - (iy + 1) as f64 * cell;
        let mut ix = 0;
        while ix < n {
            let Some(h) = heights[iy * n + ix] else {
                ix += 1;
                continue;
            };
            let l = level(h);
            let run = (ix..n)
                .take_while(|&j| heights[iy * n + j].is_some_and(|h| level(h) == l))
                .count();
            let color = colormap(l as f64 / (LEVELS - 1) as f64);
            let _ = writeln!(
                s,
                r#"<rect x="{:.4}" y="{y:.4}" width="{:.4}" height="{cell:.4}" fill="{color}"/>"#,
                ix as f64 * cell,
                run as f64 * cell
            );
            ix += run;
        }
    }
    s.push_str("</g>\n");

    let polyline = |id: &str, color: &str, points: &[Vec2<f64>]| {
        let pts: Vec<String> = points
            .iter()
            .map(|&p| {
                let (x, y) = to_px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        format!(
            r#"<polyline id="{id}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        ) + "\n"
    };
    s.push_str(&polyline("initial", INITIAL, initial));
    s.push_str(&polyline("optimized", OPTIMIZED, optimized));
    for &i in turn_points {
        if let Some(&p) = optimized.get(i) {
            let (x, y) = to_px(p);
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="none" stroke="{OPTIMIZED}" stroke-width="2"/>"#
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
