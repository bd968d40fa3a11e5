//! SVG output: meshes and log-log convergence plots.

use std::fmt::Write;

use crate::mesh::Triangulation;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One `<polygon>` per triangle; `highlight` triangles are filled.
pub fn mesh_svg(mesh: &Triangulation, highlight: &[usize]) -> String {
    let size = 800.0;
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in mesh.vertices() {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    let scale = size / (x1 - x0).max(y1 - y0);
    let margin = 10.0;
    let map = |p: [f64; 2]| (margin + (p[0] - x0) * scale, margin + (y1 - p[1]) * scale);
    let w = (x1 - x0) * scale + 2.0 * margin;
    let h = (y1 - y0) * scale + 2.0 * margin;
    let mut marked = vec![false; mesh.num_triangles()];
    for &t in highlight {
        marked[t] = true;
    }
    let stroke = (0.6f64).min(0.25 * scale * mesh.min_diameter());
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#
    )
    .unwrap();
    writeln!(s, r#"<g stroke="black" stroke-width="{stroke:.3}" stroke-linejoin="round">"#).unwrap();
    for t in 0..mesh.num_triangles() {
        let pts: Vec<String> = mesh
            .coords(t)
            .iter()
            .map(|&p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let fill = if marked[t] { "#f4a582" } else { "white" };
        writeln!(s, r#"<polygon points="{}" fill="{fill}"/>"#, pts.join(" ")).unwrap();
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// A named data series of (ndof, value) pairs.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

/// Log-log plot of the series with dashed reference slopes.
pub fn convergence_svg(title: &str, series: &[Series], reference_slopes: &[f64]) -> String {
    let (w, h) = (720.0, 520.0);
    let (left, right, top, bottom) = (80.0, 190.0, 40.0, 60.0);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|&(x, y)| x > 0.0 && y > 0.0)
        .collect();
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, w / 2.0, escape(title)).unwrap();
    if pts.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let lx = |x: f64| x.log10();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        xmin = xmin.min(lx(x));
        xmax = xmax.max(lx(x));
        ymin = ymin.min(lx(y));
        ymax = ymax.max(lx(y));
    }
    let (xmin, xmax) = (xmin.floor(), xmax.ceil().max(xmin.floor() + 1.0));
    let (ymin, ymax) = (ymin.floor(), ymax.ceil().max(ymin.floor() + 1.0));
    let pw = w - left - right;
    let ph = h - top - bottom;
    let px = |x: f64| left + (x - xmin) / (xmax - xmin) * pw;
    let py = |y: f64| top + (ymax - y) / (ymax - ymin) * ph;

    writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    for d in xmin as i32..=xmax as i32 {
        let x = px(d as f64);
        writeln!(s, r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##, top + ph).unwrap();
        writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">1e{d}</text>"#, top + ph + 18.0).unwrap();
    }
    for d in ymin as i32..=ymax as i32 {
        let y = py(d as f64);
        writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, left + pw).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"#, left - 6.0, y + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">NDOF</text>"#, left + pw / 2.0, h - 15.0).unwrap();

    // reference slopes anchored at the upper-left data extent
    let (ax, ay) = (xmin + 0.1 * (xmax - xmin), ymax - 0.1 * (ymax - ymin));
    for (k, &slope) in reference_slopes.iter().enumerate() {
        let bx = xmax - 0.1 * (xmax - xmin);
        let by = ay + slope * (bx - ax) - 0.6 * k as f64;
        let a0 = ay - 0.6 * k as f64;
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="6,4"/>"#,
            px(ax),
            py(a0),
            px(bx),
            py(by)
        )
        .unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}">slope {slope}</text>"#, px(bx) + 4.0, py(by) + 4.0).unwrap();
    }

    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let p: Vec<String> = ser
            .points
            .iter()
            .filter(|&&(x, y)| x > 0.0 && y > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", px(lx(x)), py(lx(y))))
            .collect();
        if p.is_empty() {
            continue;
        }
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#, p.join(" ")).unwrap();
        for q in &p {
            let (x, y) = q.split_once(',').unwrap();
            writeln!(s, r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>"#).unwrap();
        }
        let ly = top + 16.0 + 18.0 * i as f64;
        let lx0 = left + pw + 12.0;
        writeln!(s, r#"<line x1="{lx0}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx0 + 20.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx0 + 26.0, ly + 4.0, escape(&ser.label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
