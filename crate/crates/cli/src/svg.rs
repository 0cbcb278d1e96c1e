//! Minimal SVG renderer: trend chart with a confidence band and a sweep
//! heat map. No plotting dependency; all coordinates are emitted with fixed
//! decimal formatting so identical inputs produce byte-identical files.

use dvq_core::selection::SweepResult;
use dvq_core::TrendSummary;
use std::fmt::Write;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 64.0;

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let abs = v.abs();
    if !(0.01..10000.0).contains(&abs) {
        format!("{v:.2e}")
    } else if abs >= 100.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        let w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        MARGIN_LEFT + (x - self.x_min) / (self.x_max - self.x_min) * w
    }

    fn sy(&self, y: f64) -> f64 {
        let h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        MARGIN_TOP + (self.y_max - y) / (self.y_max - self.y_min) * h
    }
}

fn polyline_points(frame: &Frame, values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{},{}", fmt(frame.sx((i + 1) as f64)), fmt(frame.sy(*v))).unwrap();
    }
    out
}

fn axes(svg: &mut String, frame: &Frame, x_label: &str, y_label: &str, x_integer: bool) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    writeln!(
        svg,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="1"/>"#,
        fmt(x0),
        fmt(y0),
        fmt(x1),
        fmt(y0)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="1"/>"#,
        fmt(x0),
        fmt(y0),
        fmt(x0),
        fmt(y1)
    )
    .unwrap();

    const TICKS: usize = 6;
    for i in 0..=TICKS {
        let frac = i as f64 / TICKS as f64;
        let xv = frame.x_min + frac * (frame.x_max - frame.x_min);
        let xv = if x_integer { xv.round() } else { xv };
        let x = frame.sx(xv);
        writeln!(
            svg,
            r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black" stroke-width="1"/>"#,
            fmt(x),
            fmt(y0),
            fmt(y0 + 6.0)
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            fmt(x),
            fmt(y0 + 20.0),
            if x_integer {
                format!("{}", xv as i64)
            } else {
                tick_label(xv)
            }
        )
        .unwrap();

        let yv = frame.y_min + frac * (frame.y_max - frame.y_min);
        let y = frame.sy(yv);
        writeln!(
            svg,
            r#"<line x1="{1}" y1="{0}" x2="{2}" y2="{0}" stroke="black" stroke-width="1"/>"#,
            fmt(y),
            fmt(x0 - 6.0),
            fmt(x0)
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{}</text>"#,
            fmt(x0 - 9.0),
            fmt(y + 4.0),
            tick_label(yv)
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        fmt((x0 + x1) / 2.0),
        fmt(HEIGHT - 18.0),
        x_label
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 {} {})">{}</text>"#,
        fmt(20.0),
        fmt((y0 + y1) / 2.0),
        fmt(20.0),
        fmt((y0 + y1) / 2.0),
        y_label
    )
    .unwrap();
}

fn header(title: &str) -> String {
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="26" font-size="16" text-anchor="middle">{title}</text>"#,
        fmt(WIDTH / 2.0)
    )
    .unwrap();
    svg
}

/// Trend chart: quantile band as a filled polygon, ensemble mean, and an
/// optional truth overlay, axes labeled in horizon steps.
pub fn trend_svg(summary: &TrendSummary, truth: Option<&[f64]>, title: &str) -> String {
    let steps = summary.steps();
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    let mut track = |v: f64| {
        y_min = y_min.min(v);
        y_max = y_max.max(v);
    };
    for s in 0..steps {
        track(summary.lower[s]);
        track(summary.upper[s]);
        track(summary.mean[s]);
    }
    if let Some(truth) = truth {
        for v in truth {
            track(*v);
        }
    }
    if y_max == y_min {
        y_max += 1.0;
        y_min -= 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    let frame = Frame {
        x_min: 1.0,
        x_max: steps.max(2) as f64,
        y_min: y_min - pad,
        y_max: y_max + pad,
    };

    let mut svg = header(title);

    // band polygon: upper path forward, lower path back
    let mut points = String::new();
    for (s, v) in summary.upper.iter().enumerate() {
        write!(
            points,
            "{},{} ",
            fmt(frame.sx((s + 1) as f64)),
            fmt(frame.sy(*v))
        )
        .unwrap();
    }
    for (s, v) in summary.lower.iter().enumerate().rev() {
        write!(
            points,
            "{},{} ",
            fmt(frame.sx((s + 1) as f64)),
            fmt(frame.sy(*v))
        )
        .unwrap();
    }
    writeln!(
        svg,
        r##"<polygon points="{}" fill="#a6cee3" fill-opacity="0.55" stroke="none"/>"##,
        points.trim_end()
    )
    .unwrap();

    writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#1f4e79" stroke-width="1.5"/>"##,
        polyline_points(&frame, &summary.mean)
    )
    .unwrap();
    if let Some(truth) = truth {
        writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#c23b22" stroke-width="1.2" stroke-dasharray="5,3"/>"##,
            polyline_points(&frame, truth)
        )
        .unwrap();
    }

    axes(&mut svg, &frame, "horizon step", "value", true);

    // legend
    let lx = MARGIN_LEFT + 10.0;
    writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="14" height="10" fill="#a6cee3" fill-opacity="0.55"/>"##,
        fmt(lx),
        fmt(MARGIN_TOP + 4.0)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12">{}% band</text>"#,
        fmt(lx + 18.0),
        fmt(MARGIN_TOP + 13.0),
        tick_label(100.0 * (summary.levels.1 - summary.levels.0))
    )
    .unwrap();
    writeln!(
        svg,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#1f4e79" stroke-width="1.5"/>"##,
        fmt(lx),
        fmt(MARGIN_TOP + 26.0),
        fmt(lx + 14.0),
        fmt(MARGIN_TOP + 26.0)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12">ensemble mean</text>"#,
        fmt(lx + 18.0),
        fmt(MARGIN_TOP + 30.0)
    )
    .unwrap();
    if truth.is_some() {
        writeln!(
            svg,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#c23b22" stroke-width="1.2" stroke-dasharray="5,3"/>"##,
            fmt(lx),
            fmt(MARGIN_TOP + 43.0),
            fmt(lx + 14.0),
            fmt(MARGIN_TOP + 43.0)
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12">truth</text>"#,
            fmt(lx + 18.0),
            fmt(MARGIN_TOP + 47.0)
        )
        .unwrap();
    }

    svg.push_str("</svg>\n");
    svg
}

fn ramp_color(t: f64) -> String {
    // light yellow to dark red
    let from = (255.0, 255.0, 204.0);
    let to = (128.0, 0.0, 38.0);
    let r = (from.0 + t * (to.0 - from.0)).round() as u8;
    let g = (from.1 + t * (to.1 - from.1)).round() as u8;
    let b = (from.2 + t * (to.2 - from.2)).round() as u8;
    format!("rgb({r},{g},{b})")
}

/// Heat map of validation SSE over the (n1, n2) grid; the selected cell is
/// outlined, failed cells are gray.
pub fn heatmap_svg(result: &SweepResult, title: &str) -> String {
    let n1s = &result.n1_values;
    let n2s = &result.n2_values;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let cell_w = plot_w / n1s.len() as f64;
    let cell_h = plot_h / n2s.len() as f64;

    let finite: Vec<f64> = result
        .cells
        .iter()
        .map(|c| c.sse)
        .filter(|s| s.is_finite())
        .collect();
    let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut svg = header(title);
    for (i1, n1) in n1s.iter().enumerate() {
        for (i2, n2) in n2s.iter().enumerate() {
            let cell = result.cell(i1, i2);
            let x = MARGIN_LEFT + i1 as f64 * cell_w;
            // low n2 at the bottom
            let y = MARGIN_TOP + (n2s.len() - 1 - i2) as f64 * cell_h;
            let fill = if !cell.sse.is_finite() {
                "rgb(180,180,180)".to_string()
            } else if hi > lo {
                ramp_color((cell.sse - lo) / (hi - lo))
            } else {
                ramp_color(0.0)
            };
            writeln!(
                svg,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"><title>n1={} n2={} sse={}</title></rect>"#,
                fmt(x),
                fmt(y),
                fmt(cell_w),
                fmt(cell_h),
                fill,
                n1,
                n2,
                cell.sse
            )
            .unwrap();
            if (*n1, *n2) == result.best {
                writeln!(
                    svg,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-width="2.5"/>"#,
                    fmt(x + 1.0),
                    fmt(y + 1.0),
                    fmt(cell_w - 2.0),
                    fmt(cell_h - 2.0)
                )
                .unwrap();
            }
        }
    }

    // axis tick labels under each column / beside each row
    for (i1, n1) in n1s.iter().enumerate() {
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            fmt(MARGIN_LEFT + (i1 as f64 + 0.5) * cell_w),
            fmt(HEIGHT - MARGIN_BOTTOM + 16.0),
            n1
        )
        .unwrap();
    }
    for (i2, n2) in n2s.iter().enumerate() {
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            fmt(MARGIN_LEFT - 8.0),
            fmt(MARGIN_TOP + (n2s.len() - 1 - i2) as f64 * cell_h + cell_h / 2.0 + 4.0),
            n2
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">n1 (regressor prototypes)</text>"#,
        fmt(MARGIN_LEFT + plot_w / 2.0),
        fmt(HEIGHT - 18.0)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="20" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 20 {})">n2 (deformation prototypes)</text>"#,
        fmt(MARGIN_TOP + plot_h / 2.0),
        fmt(MARGIN_TOP + plot_h / 2.0)
    )
    .unwrap();

    svg.push_str("</svg>\n");
    svg
}
