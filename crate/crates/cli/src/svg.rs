//! Static SVG plots rendered from CSV tables.

use std::fmt::Write;

use phstab::stabilize::read_sweep_csv;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    /// `(x, y, half-width of the band)`; a non-finite width draws no band.
    pub points: Vec<(f64, f64, f64)>,
}

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn fit(series: &[Series]) -> Axes {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut y = (f64::INFINITY, f64::NEG_INFINITY);
        for &(px, py, e) in series.iter().flat_map(|s| &s.points) {
            x = (x.0.min(px), x.1.max(px));
            let e = if e.is_finite() { e } else { 0.0 };
            y = (y.0.min(py - e), y.1.max(py + e));
        }
        if !x.0.is_finite() {
            x = (0.0, 1.0);
            y = (0.0, 1.0);
        }
        if x.1 <= x.0 {
            x = (x.0 - 0.5, x.0 + 0.5);
        }
        if y.1 <= y.0 {
            y = (y.0 - 0.5, y.0 + 0.5);
        }
        let pad = 0.05 * (y.1 - y.0);
        Axes {
            x,
            y: (y.0 - pad, y.1 + pad),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
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

fn frame(out: &mut String, axes: &Axes, x_label: &str, y_label: &str) {
    let (x0, x1) = (axes.px(axes.x.0), axes.px(axes.x.1));
    let (y0, y1) = (axes.py(axes.y.0), axes.py(axes.y.1));
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = axes.x.0 + t * (axes.x.1 - axes.x.0);
        let yv = axes.y.0 + t * (axes.y.1 - axes.y.0);
        let (px, py) = (axes.px(xv), axes.py(yv));
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Lines with shaded bands.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let axes = Axes::fit(series);
    let mut out = String::new();
    header(&mut out, title);
    frame(&mut out, &axes, x_label, y_label);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let banded: Vec<_> = s.points.iter().filter(|p| p.2.is_finite()).collect();
        if !banded.is_empty() {
            let mut path = String::new();
            for (i, &&(x, y, e)) in banded.iter().enumerate() {
                let _ = write!(path, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, axes.px(x), axes.py(y + e));
            }
            for &&(x, y, e) in banded.iter().rev() {
                let _ = write!(path, "L{:.2},{:.2} ", axes.px(x), axes.py(y - e));
            }
            let _ = writeln!(out, r#"<path d="{}Z" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, path);
        }
        let points: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y, _)| format!("{:.2},{:.2}", axes.px(x), axes.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points.join(" ")
        );
        let ly = MARGIN_TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Mean against bandwidth for each sweep table, with two-stderr bands.
pub fn sweep_plot(title: &str, tables: &[&str]) -> Result<String, phstab::error::Error> {
    let mut series = Vec::new();
    for table in tables {
        for (id, row) in read_sweep_csv(table)? {
            let point = (row.bandwidth, row.mean, 2.0 * row.stderr);
            match series.iter_mut().find(|s: &&mut Series| s.label == id) {
                Some(s) => s.points.push(point),
                None => series.push(Series {
                    label: id,
                    points: vec![point],
                }),
            }
        }
    }
    Ok(line_plot(title, "bandwidth", "smoothed summary", &series))
}

/// Cells of a regular grid shaded from white (minimum) to dark blue
/// (maximum). `cells` are `(x, y, value)`.
pub fn heat_map(title: &str, x_label: &str, y_label: &str, cells: &[(f64, f64, f64)]) -> String {
    let mut xs: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let mut ys: Vec<f64> = cells.iter().map(|c| c.1).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let (lo, hi) = cells
        .iter()
        .map(|c| c.2)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let mut out = String::new();
    header(&mut out, title);
    let half = |v: &[f64]| if v.len() > 1 { (v[1] - v[0]) / 2.0 } else { 0.5 };
    let (hx, hy) = (half(&xs), half(&ys));
    let axes = Axes {
        x: (
            xs.first().copied().unwrap_or(0.0) - hx,
            xs.last().copied().unwrap_or(1.0) + hx,
        ),
        y: (
            ys.first().copied().unwrap_or(0.0) - hy,
            ys.last().copied().unwrap_or(1.0) + hy,
        ),
    };
    for &(x, y, v) in cells {
        let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
        let shade = |c: f64| (255.0 - t * (255.0 - c)).round() as u8;
        let (x0, x1) = (axes.px(x - hx), axes.px(x + hx));
        let (y0, y1) = (axes.py(y + hy), axes.py(y - hy));
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#{:02x}{:02x}{:02x}"><title>{x}, {y}: {v}</title></rect>"##,
            x1 - x0,
            y1 - y0,
            shade(8.0),
            shade(48.0),
            shade(107.0)
        );
    }
    frame(&mut out, &axes, x_label, y_label);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">range {} to {}</text>"#,
        WIDTH - MARGIN_RIGHT + 12.0,
        MARGIN_TOP + 10.0,
        tick(lo),
        tick(hi)
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "alpha,summary_id,mean,stderr,trials,seed\n\
        1e-3,vertex:4,10.0,0.1,100,1\n\
        5e-2,vertex:4,9.0,null,1,2\n";

    #[test]
    fn sweep_plot_is_deterministic() {
        let a = sweep_plot("g", &[TABLE]).unwrap();
        assert_eq!(a, sweep_plot("g", &[TABLE]).unwrap());
        assert!(a.starts_with("<svg"));
        assert!(a.contains("vertex:4"));
        assert!(a.contains("<path"));
        assert!(a.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(sweep_plot("g", &["not a table"]).is_err());
    }

    #[test]
    fn escapes_labels() {
        let s = Series {
            label: "a<b".into(),
            points: vec![(0.0, 1.0, 0.1)],
        };
        let svg = line_plot("x & y", "x", "y", &[s]);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.contains("x &amp; y"));
    }

    #[test]
    fn heat_map_cells() {
        let cells = [(0.0, 0.0, 1.0), (1.0, 0.0, 2.0), (0.0, 1.0, 3.0), (1.0, 1.0, 4.0)];
        let svg = heat_map("h", "x", "y", &cells);
        assert_eq!(svg.matches("<title>").count(), 4);
        assert!(svg.contains("#ffffff"));
        assert!(svg.contains("#08306b"));
    }
}
