//! Minimal self-contained SVG figures: cluster scatters and the
//! error-versus-threshold curve.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

/// Cluster colors, cycled by label.
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf", "#393b79",
];
const REMOVED_COLOR: &str = "#d62728";

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit<'a>(points: impl Iterator<Item = &'a [f64; 2]>) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for p in points {
            x0 = x0.min(p[0]);
            x1 = x1.max(p[0]);
            y0 = y0.min(p[1]);
            y1 = y1.max(p[1]);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 <= 0.0 {
            (x0, x1) = (x0 - 0.5, x1 + 0.5);
        }
        if y1 - y0 <= 0.0 {
            (y0, y1) = (y0 - 0.5, y1 + 0.5);
        }
        Self { x0, x1, y0, y1 }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        let sx = MARGIN + (p[0] - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN);
        let sy = HEIGHT - MARGIN - (p[1] - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN);
        (sx, sy)
    }
}

fn header(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    writeln!(
        out,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    )
    .unwrap();
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Points colored by label, centroids as crosses, removed points as red
/// rings.
pub fn scatter_svg(
    title: &str,
    points: &[[f64; 2]],
    labels: &[usize],
    centroids: &[[f64; 2]],
    removed: &[[f64; 2]],
) -> String {
    let frame = Frame::fit(points.iter().chain(centroids).chain(removed));
    let mut out = String::new();
    header(&mut out, title);
    for (p, &l) in points.iter().zip(labels) {
        let (x, y) = frame.map(*p);
        writeln!(
            out,
            r#"<circle class="point" cx="{x:.2}" cy="{y:.2}" r="1.5" fill="{}"/>"#,
            PALETTE[l % PALETTE.len()]
        )
        .unwrap();
    }
    for p in removed {
        let (x, y) = frame.map(*p);
        writeln!(
            out,
            r#"<circle class="removed" cx="{x:.2}" cy="{y:.2}" r="4" fill="none" stroke="{REMOVED_COLOR}" stroke-width="1.5"/>"#
        )
        .unwrap();
    }
    for (j, c) in centroids.iter().enumerate() {
        let (x, y) = frame.map(*c);
        writeln!(
            out,
            r#"<path class="centroid" d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="{}" stroke-width="3"/>"#,
            x - 6.0,
            y - 6.0,
            x + 6.0,
            y + 6.0,
            x - 6.0,
            y + 6.0,
            x + 6.0,
            y - 6.0,
            PALETTE[j % PALETTE.len()]
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Polyline through `(x, y)` pairs with a dot at every vertex.
pub fn curve_svg(title: &str, x_label: &str, y_label: &str, xy: &[[f64; 2]]) -> String {
    let frame = Frame::fit(xy.iter());
    let mut out = String::new();
    header(&mut out, title);
    let pts: Vec<String> = xy
        .iter()
        .map(|p| {
            let (x, y) = frame.map(*p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    writeln!(
        out,
        r#"<polyline class="curve" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
        pts.join(" "),
        PALETTE[0]
    )
    .unwrap();
    for p in xy {
        let (x, y) = frame.map(*p);
        writeln!(
            out,
            r#"<circle class="vertex" cx="{x:.2}" cy="{y:.2}" r="3" fill="{}"/>"#,
            PALETTE[0]
        )
        .unwrap();
    }
    for (v, anchor_x, anchor_y) in [
        (frame.x0, MARGIN, HEIGHT - MARGIN + 16.0),
        (frame.x1, WIDTH - MARGIN, HEIGHT - MARGIN + 16.0),
    ] {
        writeln!(out, r#"<text x="{anchor_x}" y="{anchor_y}" text-anchor="middle" font-family="sans-serif" font-size="11">{v}</text>"#).unwrap();
    }
    for (v, y) in [(frame.y0, HEIGHT - MARGIN), (frame.y1, MARGIN)] {
        writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.4}</text>"#, MARGIN - 4.0).unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}
