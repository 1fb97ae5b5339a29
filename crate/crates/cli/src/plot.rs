//! Static SVG line plot of the filtered dissimilarity with alarm markers.

use std::fmt::Write;

use tire::PipelineOutput;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 40.0;

pub fn render(out: &PipelineOutput, truth: &[usize]) -> String {
    let curve = &out.filtered;
    let values = curve.values();
    let t0 = curve.first_time() as f64;
    let span = (values.len().max(2) - 1) as f64;
    let top = values.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let x = |t: f64| MARGIN + (t - t0) / span * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - v / top * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{m} {b} H{r} M{m} {b} V{m}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for &t in truth {
        let t = t as f64;
        if t >= t0 && t <= t0 + span {
            let _ = writeln!(
                svg,
                r##"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="#d62728" stroke-opacity="0.4"/>"##,
                x(t),
                MARGIN,
                HEIGHT - MARGIN
            );
        }
    }
    let mut points = String::new();
    for (i, &v) in values.iter().enumerate() {
        let _ = write!(points, "{:.2},{:.2} ", x(t0 + i as f64), y(v));
    }
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        points.trim_end()
    );
    for &t in &out.alarms {
        let v = values[t - curve.first_time()];
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f77b4"/>"##,
            x(t as f64),
            y(v)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="12">t = {} .. {}, max {:.4}</text>"#,
        MARGIN - 12.0,
        curve.first_time(),
        curve.first_time() + values.len().saturating_sub(1),
        top
    );
    svg.push_str("</svg>\n");
    svg
}
