//! Small SVG plot writer: line series, shaded bands, histograms and heatmaps.
//!
//! Output is a pure function of the figure, so plots are reproducible unless
//! a timestamp is attached explicitly.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
struct Series {
    name: String,
    points: Vec<(f64, f64)>,
    markers: bool,
}

#[derive(Debug, Clone)]
struct Band {
    name: String,
    lo: f64,
    hi: f64,
}

#[derive(Debug, Clone)]
struct Heatmap {
    x: (f64, f64),
    y: (f64, f64),
    /// Row-major, `rows[j][i]` at the `i`-th x and `j`-th y cell.
    rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct Figure {
    title: String,
    x_label: String,
    y_label: String,
    log_y: bool,
    series: Vec<Series>,
    bands: Vec<Band>,
    bars: Vec<(f64, f64)>,
    heatmap: Option<Heatmap>,
    desc: Option<String>,
    timestamp: Option<String>,
}

impl Figure {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Figure { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), ..Default::default() }
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn line(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { name: name.into(), points, markers: false });
        self
    }

    pub fn scatter_line(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { name: name.into(), points, markers: true });
        self
    }

    /// Horizontal band `lo <= y <= hi`.
    pub fn band(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.bands.push(Band { name: name.into(), lo, hi });
        self
    }

    /// Unit-width bars centred at each `x`.
    pub fn bars(mut self, bars: Vec<(f64, f64)>) -> Self {
        self.bars = bars;
        self
    }

    pub fn heatmap(mut self, x: (f64, f64), y: (f64, f64), rows: Vec<Vec<f64>>) -> Self {
        self.heatmap = Some(Heatmap { x, y, rows });
        self
    }

    /// Free text stored in the `<desc>` element.
    pub fn describe(mut self, text: String) -> Self {
        self.desc = Some(text);
        self
    }

    pub fn timestamp(mut self, stamp: Option<String>) -> Self {
        self.timestamp = stamp;
        self
    }

    fn ty(&self, y: f64) -> f64 {
        if self.log_y {
            y.max(f64::MIN_POSITIVE).log10()
        } else {
            y
        }
    }

    fn extent(&self) -> ((f64, f64), (f64, f64)) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                xs.push(x);
                ys.push(self.ty(y));
            }
        }
        for b in &self.bands {
            ys.push(self.ty(b.lo));
            ys.push(self.ty(b.hi));
        }
        for &(x, h) in &self.bars {
            xs.extend([x - 0.5, x + 0.5]);
            ys.extend([0.0, h]);
        }
        if let Some(h) = &self.heatmap {
            xs.extend([h.x.0, h.x.1]);
            ys.extend([h.y.0, h.y.1]);
        }
        (span(&xs), span(&ys))
    }

    pub fn render(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.extent();
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        if let Some(d) = &self.desc {
            let _ = writeln!(s, "<desc>{}</desc>", escape(d));
        }
        if let Some(t) = &self.timestamp {
            let _ = writeln!(s, "<metadata>generated {}</metadata>", escape(t));
        }
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

        if let Some(h) = &self.heatmap {
            let (lo, hi) = span(&h.rows.iter().flatten().copied().collect::<Vec<_>>());
            let ny = h.rows.len().max(1);
            for (j, row) in h.rows.iter().enumerate() {
                let nx = row.len().max(1);
                for (i, &v) in row.iter().enumerate() {
                    let xa = h.x.0 + (h.x.1 - h.x.0) * i as f64 / nx as f64;
                    let xb = h.x.0 + (h.x.1 - h.x.0) * (i + 1) as f64 / nx as f64;
                    let ya = h.y.0 + (h.y.1 - h.y.0) * j as f64 / ny as f64;
                    let yb = h.y.0 + (h.y.1 - h.y.0) * (j + 1) as f64 / ny as f64;
                    let _ = writeln!(
                        s,
                        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                        sx(xa),
                        sy(yb),
                        sx(xb) - sx(xa) + 0.05,
                        sy(ya) - sy(yb) + 0.05,
                        ramp((v - lo) / (hi - lo))
                    );
                }
            }
            let cx = WIDTH - RIGHT + 20.0;
            for k in 0..50 {
                let t = k as f64 / 49.0;
                let _ = writeln!(
                    s,
                    r#"<rect x="{cx}" y="{:.2}" width="16" height="{:.2}" fill="{}"/>"#,
                    TOP + ph * (1.0 - (k + 1) as f64 / 50.0),
                    ph / 50.0 + 0.1,
                    ramp(t)
                );
            }
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, cx + 20.0, TOP + 10.0, fmt_tick(hi));
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, cx + 20.0, TOP + ph, fmt_tick(lo));
        }

        for (k, b) in self.bands.iter().enumerate() {
            let (a, c) = (sy(self.ty(b.hi)), sy(self.ty(b.lo)));
            let _ = writeln!(
                s,
                r#"<rect x="{LEFT}" y="{a:.2}" width="{pw}" height="{:.2}" fill="{}" fill-opacity="0.15"><title>{}</title></rect>"#,
                (c - a).max(0.5),
                PALETTE[(k + 2) % PALETTE.len()],
                escape(&b.name)
            );
        }

        for &(x, h) in &self.bars {
            let (a, c) = (sx(x - 0.45), sx(x + 0.45));
            let _ = writeln!(
                s,
                r#"<rect x="{a:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                sy(h),
                c - a,
                sy(0.0) - sy(h),
                PALETTE[0]
            );
        }

        for (k, ser) in self.series.iter().enumerate() {
            let colour = PALETTE[k % PALETTE.len()];
            let pts: Vec<String> =
                ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(self.ty(y)))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
            if ser.markers {
                for &(x, y) in &ser.points {
                    let _ =
                        writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, sx(x), sy(self.ty(y)));
                }
            }
        }

        // axes and ticks
        let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for xv in nice_ticks(x0, x1) {
            let px = sx(xv);
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 20.0,
                fmt_tick(xv)
            );
        }
        let yticks = if self.log_y && y1 - y0 >= 1.0 {
            nice_ticks(y0, y1).into_iter().filter(|t| t.fract() == 0.0).collect()
        } else {
            nice_ticks(y0, y1)
        };
        for yv in yticks {
            let py = sy(yv);
            let ylab = if self.log_y { fmt_tick(10f64.powf(yv)) } else { fmt_tick(yv) };
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                py + 4.0,
                ylab
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(18,{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        let legend: Vec<(&str, &str)> = self
            .series
            .iter()
            .enumerate()
            .map(|(k, ser)| (ser.name.as_str(), PALETTE[k % PALETTE.len()]))
            .chain(self.bands.iter().enumerate().map(|(k, b)| (b.name.as_str(), PALETTE[(k + 2) % PALETTE.len()])))
            .collect();
        if self.heatmap.is_none() {
            for (k, (name, colour)) in legend.iter().enumerate() {
                let y = TOP + 10.0 + 18.0 * k as f64;
                let x = WIDTH - RIGHT + 12.0;
                let _ = writeln!(
                    s,
                    r#"<rect x="{x}" y="{:.2}" width="12" height="12" fill="{colour}"/><text x="{}" y="{:.2}">{}</text>"#,
                    y - 10.0,
                    x + 18.0,
                    y,
                    escape(name)
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn span(v: &[f64]) -> (f64, f64) {
    let (lo, hi) = v
        .iter()
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-300 + 1e-12 * lo.abs() {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    let pad = 0.03 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Round tick positions (steps of 1, 2 or 5 times a power of ten) inside `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    if !(raw > 0.0 && raw.is_finite()) {
        return vec![lo];
    }
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|&st| st >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    }
}

/// Blue to yellow colour ramp on `[0, 1]`.
fn ramp(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let (r, g, b) = (68.0 + t * (253.0 - 68.0), 1.0 + t * (231.0 - 1.0), 84.0 + t * (37.0 - 84.0));
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
