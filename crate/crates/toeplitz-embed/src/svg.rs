//! Self-contained SVG figures: region maps coloured by winding number, the
//! curve, its intersection points and numerical range polygons.

use std::fmt::Write;

use crate::curve_topology::RegionDecomposition;
use crate::C64;

const SIZE: f64 = 800.0;

/// Fill colour by winding: 0 white, −1 light, −2 dark, positive hatched.
pub fn winding_fill(w: i64) -> String {
    match w {
        0 => "#ffffff".into(),
        -1 => "#c6dbef".into(),
        -2 => "#2171b5".into(),
        w if w < -2 => "#08306b".into(),
        w => format!("url(#hatch{})", w.min(3)),
    }
}

/// Maps complex coordinates in a bounding box onto the canvas.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub x0: f64,
    pub y0: f64,
    pub scale: f64,
    pub width: f64,
    pub height: f64,
}

impl Frame {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let w = (x1 - x0).max(1e-12);
        let h = (y1 - y0).max(1e-12);
        let scale = SIZE / w.max(h);
        Frame { x0, y0, scale, width: w * scale, height: h * scale }
    }

    pub fn around(points: &[C64], pad: f64) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in points {
            x0 = x0.min(p.re);
            x1 = x1.max(p.re);
            y0 = y0.min(p.im);
            y1 = y1.max(p.im);
        }
        if points.is_empty() {
            (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
        }
        let m = pad * (x1 - x0).max(y1 - y0).max(1e-9);
        Frame::new(x0 - m, x1 + m, y0 - m, y1 + m)
    }

    pub fn map(&self, z: C64) -> (f64, f64) {
        ((z.re - self.x0) * self.scale, self.height - (z.im - self.y0) * self.scale)
    }
}

/// An SVG document under construction.
pub struct Svg {
    frame: Frame,
    body: String,
}

impl Svg {
    pub fn new(frame: Frame) -> Self {
        Svg { frame, body: String::new() }
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Region fill from the grid of a decomposition, one rectangle per run.
    pub fn regions(&mut self, d: &RegionDecomposition) -> &mut Self {
        let g = d.resolution;
        let cs = d.cell * self.frame.scale;
        self.body.push_str("<g shape-rendering=\"crispEdges\">\n");
        for j in 0..g {
            let mut i = 0;
            while i < g {
                let w = d.cell_winding(j * g + i);
                let start = i;
                while i < g && d.cell_winding(j * g + i) == w {
                    i += 1;
                }
                if w == 0 {
                    continue;
                }
                let corner = C64::new(d.bbox[0] + start as f64 * d.cell, d.bbox[2] + (j + 1) as f64 * d.cell);
                let (x, y) = self.frame.map(corner);
                let _ = writeln!(
                    self.body,
                    "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                    (i - start) as f64 * cs,
                    cs,
                    winding_fill(w)
                );
            }
        }
        self.body.push_str("</g>\n");
        self
    }

    pub fn polyline(&mut self, points: &[C64], closed: bool, stroke: &str, width: f64) -> &mut Self {
        let mut pts = String::new();
        for p in points {
            let (x, y) = self.frame.map(*p);
            let _ = write!(pts, "{x:.2},{y:.2} ");
        }
        let tag = if closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            self.body,
            "<{tag} points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>",
            pts.trim_end()
        );
        self
    }

    pub fn marker(&mut self, z: C64, color: &str, label: &str) -> &mut Self {
        let (x, y) = self.frame.map(z);
        let _ = writeln!(self.body, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{color}\"/>");
        if !label.is_empty() {
            let _ = writeln!(
                self.body,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" font-family=\"sans-serif\">{}</text>",
                x + 6.0,
                y - 6.0,
                escape(label)
            );
        }
        self
    }

    pub fn text(&mut self, z: C64, label: &str) -> &mut Self {
        let (x, y) = self.frame.map(z);
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"14\" font-family=\"sans-serif\" text-anchor=\"middle\">{}</text>",
            escape(label)
        );
        self
    }

    pub fn finish(&self) -> String {
        let f = self.frame;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.2} {:.2}\">",
            f.width, f.height, f.width, f.height
        );
        s.push_str("<defs>\n");
        for (k, gap) in [(1, 8), (2, 5), (3, 3)] {
            let _ = writeln!(
                s,
                "<pattern id=\"hatch{k}\" width=\"{gap}\" height=\"{gap}\" patternUnits=\"userSpaceOnUse\" patternTransform=\"rotate(45)\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"{gap}\" stroke=\"#cb181d\" stroke-width=\"1\"/></pattern>"
            );
        }
        s.push_str("</defs>\n");
        let _ = writeln!(s, "<rect width=\"{:.2}\" height=\"{:.2}\" fill=\"#ffffff\"/>", f.width, f.height);
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Region map with the curve, intersection points, component windings and
/// optional marked points.
pub fn region_figure(d: &RegionDecomposition, marks: &[(C64, &str)]) -> String {
    let frame = Frame::new(d.bbox[0], d.bbox[1], d.bbox[2], d.bbox[3]);
    let mut svg = Svg::new(frame);
    svg.regions(d);
    svg.polyline(&d.discretization().points, true, "#000000", 1.2);
    for p in &d.intersections.points {
        svg.marker(p.location, "#e6550d", "");
    }
    for c in &d.components {
        if !c.unbounded && c.cells >= 4 {
            svg.text(c.representative, &format!("w={}", c.winding));
        }
    }
    for (z, label) in marks {
        svg.marker(*z, "#d62728", label);
    }
    svg.finish()
}

/// Numerical range polygons (outer and inner) with the eigenvalues.
pub fn numrange_figure(outer: &[C64], inner: &[C64], eigenvalues: &[C64], marks: &[(C64, &str)]) -> String {
    let mut all: Vec<C64> = outer.to_vec();
    all.extend(eigenvalues);
    all.extend(marks.iter().map(|m| m.0));
    let mut svg = Svg::new(Frame::around(&all, 0.08));
    svg.polyline(outer, true, "#2171b5", 1.5);
    svg.polyline(inner, true, "#6baed6", 1.0);
    for &l in eigenvalues {
        svg.marker(l, "#000000", "");
    }
    for (z, label) in marks {
        svg.marker(*z, "#d62728", label);
    }
    svg.finish()
}
