//! File exports: the series CSV and a static SVG with a radar chart of
//! maturities and a weight-vs-maturity quadrant scatter.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::analysis::{ComparisonReport, SeriesRow};
use crate::error::Result;
use crate::exact::to_f64;

pub const CSV_HEADER: [&str; 5] = [
    "subject",
    "dimension",
    "maturity",
    "normalized_weight",
    "quadrant",
];

pub fn series_csv(rows: &[SeriesRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(std::io::Error::other)?;
    for row in rows {
        w.serialize(row).map_err(std::io::Error::other)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Radar chart (left) and quadrant scatter (right) for a comparison.
pub fn comparison_svg(report: &ComparisonReport) -> String {
    const W: f64 = 960.0;
    const H: f64 = 480.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    radar(&mut svg, report, 240.0, 250.0, 160.0);
    quadrant(&mut svg, report, 540.0, 60.0, 380.0, 360.0);
    legend(&mut svg, report, 20.0, 20.0);
    svg.push_str("</svg>\n");
    svg
}

fn radar(svg: &mut String, report: &ComparisonReport, cx: f64, cy: f64, radius: f64) {
    let Some(first) = report.subjects.first() else {
        return;
    };
    let keys: Vec<&str> = first
        .report
        .dimensions
        .iter()
        .map(|d| d.key.as_str())
        .collect();
    let k = keys.len().max(1) as f64;
    let point = |i: usize, v: f64| {
        let angle = -PI / 2.0 + 2.0 * PI * i as f64 / k;
        (cx + radius * v * angle.cos(), cy + radius * v * angle.sin())
    };

    let _ = writeln!(svg, r#"<g class="radar">"#);
    for ring in [0.25, 0.5, 0.75, 1.0] {
        let pts: Vec<String> = (0..keys.len())
            .map(|i| {
                let (x, y) = point(i, ring);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            "<polygon points=\"{}\" fill=\"none\" stroke=\"#ccc\" stroke-dasharray=\"3 3\"/>",
            pts.join(" ")
        );
    }
    for (i, key) in keys.iter().enumerate() {
        let (x, y) = point(i, 1.0);
        let (lx, ly) = point(i, 1.15);
        let _ = writeln!(
            svg,
            "<line x1=\"{cx}\" y1=\"{cy}\" x2=\"{x:.2}\" y2=\"{y:.2}\" stroke=\"#999\"/>"
        );
        let _ = writeln!(
            svg,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
            escape(key)
        );
    }
    for (s, subject) in report.subjects.iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        let pts: Vec<String> = keys
            .iter()
            .enumerate()
            .map(|(i, key)| {
                let v = subject
                    .report
                    .dimension(key)
                    .map_or(0.0, |d| to_f64(&d.maturity));
                let (x, y) = point(i, v);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polygon class="subject" data-subject="{}" points="{}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="2"/>"#,
            escape(&subject.subject),
            pts.join(" ")
        );
    }
    let _ = writeln!(svg, "</g>");
}

fn quadrant(svg: &mut String, report: &ComparisonReport, x0: f64, y0: f64, w: f64, h: f64) {
    let Some(first) = report.subjects.first() else {
        return;
    };
    let bounds = first.quadrants.boundaries;
    // weight on x in [0, 1/2 + margin], maturity on y in [0, 1]
    let x_max = 0.6;
    let sx = |v: f64| x0 + w * (v / x_max);
    let sy = |v: f64| y0 + h * (1.0 - v);

    let _ = writeln!(svg, r#"<g class="quadrant">"#);
    let _ = writeln!(
        svg,
        r##"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#999"/>"##
    );
    let bx = sx(to_f64(&bounds.weight));
    let by = sy(to_f64(&bounds.maturity));
    let _ = writeln!(
        svg,
        "<line x1=\"{bx:.2}\" y1=\"{y0}\" x2=\"{bx:.2}\" y2=\"{:.2}\" stroke=\"#666\" stroke-dasharray=\"4 4\"/>",
        y0 + h
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{x0}\" y1=\"{by:.2}\" x2=\"{:.2}\" y2=\"{by:.2}\" stroke=\"#666\" stroke-dasharray=\"4 4\"/>",
        x0 + w
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">normalized weight</text>"#,
        x0 + w / 2.0,
        y0 + h + 30.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">maturity</text>"#,
        x0 - 30.0,
        y0 + h / 2.0,
        x0 - 30.0,
        y0 + h / 2.0
    );
    for tick in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{tick:.1}</text>"#,
            sx(tick),
            y0 + h + 14.0
        );
    }
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{tick:.2}</text>"#,
            x0 - 4.0,
            sy(tick) + 3.0
        );
    }

    for (s, subject) in report.subjects.iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        for d in &subject.quadrants.dimensions {
            let x = sx(to_f64(&d.normalized_weight));
            let y = sy(to_f64(&d.maturity));
            let _ = writeln!(
                svg,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="{color}" data-subject="{}" data-dimension="{}" data-quadrant="{}"/>"#,
                escape(&subject.subject),
                escape(&d.key),
                d.label.as_str()
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#,
                x + 7.0,
                y - 4.0,
                escape(&d.key)
            );
        }
    }
    let _ = writeln!(svg, "</g>");
}

fn legend(svg: &mut String, report: &ComparisonReport, x: f64, y: f64) {
    for (s, subject) in report.subjects.iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        let yy = y + 16.0 * s as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{:.2}" width="10" height="10" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            yy,
            x + 14.0,
            yy + 9.0,
            escape(&subject.subject)
        );
    }
}
