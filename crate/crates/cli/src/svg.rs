//! Minimal static SVG charts.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: [f64; 4] = [50.0, 20.0, 40.0, 60.0]; // top, right, bottom, left
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

pub struct StackedBars {
    pub title: String,
    pub x_label: String,
    /// One bar per entry: its label and the stacked segment heights.
    pub bars: Vec<(String, Vec<f64>)>,
    pub segment_names: Vec<String>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn plot_area() -> (f64, f64, f64, f64) {
    let x0 = MARGIN[3];
    let y0 = MARGIN[0];
    (x0, y0, WIDTH - MARGIN[1] - x0, HEIGHT - MARGIN[2] - y0)
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, x_label: &str, y_label: &str, y_max: f64) {
    let (x0, y0, w, h) = plot_area();
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let v = y_max * i as f64 / 5.0;
        let y = y0 + h - h * i as f64 / 5.0;
        let _ = writeln!(
            out,
            r##"<line x1="{x0}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"##,
            x0 + w,
            x0 - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        x0 + w / 2.0,
        HEIGHT - 8.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        y0 + h / 2.0,
        y0 + h / 2.0,
        escape(y_label)
    );
}

fn legend(out: &mut String, names: &[String]) {
    let (x0, y0, _, _) = plot_area();
    for (i, name) in names.iter().enumerate() {
        let y = y0 + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            x0 + 10.0,
            y - 9.0,
            PALETTE[i % PALETTE.len()],
            x0 + 26.0,
            y,
            escape(name)
        );
    }
}

fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        1.0
    } else if v <= 1.0 {
        (v * 10.0).ceil() / 10.0
    } else {
        v.ceil()
    }
}

impl LineChart {
    pub fn render(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.title);
        let all = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x_min, mut x_max, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for &(x, y) in all {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_max = y_max.max(y);
        }
        if !x_min.is_finite() {
            (x_min, x_max) = (0.0, 1.0);
        }
        if x_max <= x_min {
            x_max = x_min + 1.0;
        }
        let y_max = nice_max(y_max);
        axes(&mut out, &self.x_label, &self.y_label, y_max);
        let (x0, y0, w, h) = plot_area();
        for i in 0..=4 {
            let v = x_min + (x_max - x_min) * i as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.2}</text>"#,
                x0 + w * i as f64 / 4.0,
                y0 + h + 16.0
            );
        }
        for (i, s) in self.series.iter().enumerate() {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| {
                    format!(
                        "{:.1},{:.1}",
                        x0 + w * (x - x_min) / (x_max - x_min),
                        y0 + h - h * y / y_max
                    )
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
                PALETTE[i % PALETTE.len()],
                pts.join(" ")
            );
        }
        legend(&mut out, &self.series.iter().map(|s| s.name.clone()).collect::<Vec<_>>());
        out.push_str("</svg>\n");
        out
    }
}

impl StackedBars {
    pub fn render(&self) -> String {
        let mut out = String::new();
        header(&mut out, &self.title);
        let y_max = nice_max(
            self.bars
                .iter()
                .map(|(_, v)| v.iter().sum::<f64>())
                .fold(0.0, f64::max),
        );
        axes(&mut out, &self.x_label, "share", y_max);
        let (x0, y0, w, h) = plot_area();
        let slot = w / self.bars.len().max(1) as f64;
        for (i, (label, segments)) in self.bars.iter().enumerate() {
            let x = x0 + slot * i as f64 + slot * 0.15;
            let mut top = y0 + h;
            for (k, v) in segments.iter().enumerate() {
                let height = h * v / y_max;
                top -= height;
                let _ = writeln!(
                    out,
                    r#"<rect x="{x:.1}" y="{top:.1}" width="{:.1}" height="{height:.1}" fill="{}"/>"#,
                    slot * 0.7,
                    PALETTE[k % PALETTE.len()]
                );
            }
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
                x + slot * 0.35,
                y0 + h + 14.0,
                escape(label)
            );
        }
        legend(&mut out, &self.segment_names);
        out.push_str("</svg>\n");
        out
    }
}
