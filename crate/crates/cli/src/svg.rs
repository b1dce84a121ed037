//! Hand-written SVG: polylines for traces, segments for support lines and a
//! polygon for sampled curves. Output depends only on the input data.

use std::fmt::Write;

use crate::fmt::sig;

const SIZE: f64 = 600.0;

#[derive(Clone, Copy, Debug)]
struct Frame {
    min: [f64; 2],
    max: [f64; 2],
}

impl Frame {
    fn new(points: impl Iterator<Item = [f64; 2]>) -> Frame {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in points {
            for a in 0..2 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        if !min[0].is_finite() {
            return Frame { min: [-1.0, -1.0], max: [1.0, 1.0] };
        }
        // 5% margin on each side, and a nonzero extent
        let mut f = Frame { min, max };
        for a in 0..2 {
            let span = (f.max[a] - f.min[a]).max(1e-9);
            f.min[a] -= 0.05 * span;
            f.max[a] += 0.05 * span;
        }
        f
    }

    fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    /// Clips the line `c.x = lambda` to the frame.
    fn clip(&self, c: [f64; 2], lambda: f64) -> Option<([f64; 2], [f64; 2])> {
        let mut hits: Vec<[f64; 2]> = Vec::new();
        if c[1].abs() > 1e-12 {
            for x in [self.min[0], self.max[0]] {
                let y = (lambda - c[0] * x) / c[1];
                if y >= self.min[1] && y <= self.max[1] {
                    hits.push([x, y]);
                }
            }
        }
        if c[0].abs() > 1e-12 {
            for y in [self.min[1], self.max[1]] {
                let x = (lambda - c[1] * y) / c[0];
                if x >= self.min[0] && x <= self.max[0] {
                    hits.push([x, y]);
                }
            }
        }
        hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        hits.dedup();
        (hits.len() >= 2).then(|| (hits[0], hits[hits.len() - 1]))
    }
}

/// SVG coordinates flip the vertical axis.
fn pt(p: [f64; 2]) -> String {
    format!("{},{}", sig(p[0]), sig(-p[1]))
}

#[derive(Default)]
pub struct Plot {
    pub title: String,
    pub trace: Vec<[f64; 2]>,
    pub lines: Vec<([f64; 2], f64)>,
    pub curve: Vec<[f64; 2]>,
}

impl Plot {
    pub fn render(&self) -> String {
        let mut extent: Vec<[f64; 2]> = self.trace.iter().chain(&self.curve).copied().collect();
        // corners of the outer contour: consecutive support lines meet there
        for w in 0..self.lines.len() {
            let (a, la) = self.lines[w];
            let (b, lb) = self.lines[(w + 1) % self.lines.len()];
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() > 1e-9 {
                extent.push([(la * b[1] - lb * a[1]) / det, (a[0] * lb - b[0] * la) / det]);
            }
        }
        let frame = Frame::new(extent.into_iter().filter(|p| p[0].is_finite() && p[1].is_finite()));
        let stroke = sig(frame.width().max(frame.height()) / 300.0);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{}" viewBox="{} {} {} {}">"#,
            sig(SIZE * frame.height() / frame.width()),
            sig(frame.min[0]),
            sig(-frame.max[1]),
            sig(frame.width()),
            sig(frame.height())
        );
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        if !self.curve.is_empty() {
            let pts: Vec<String> = self.curve.iter().map(|p| pt(*p)).collect();
            let _ = writeln!(s, r##"<polygon points="{}" fill="#dde6f0" stroke="#4a6b8a" stroke-width="{stroke}"/>"##, pts.join(" "));
        }
        for &(c, lambda) in &self.lines {
            if let Some((a, b)) = frame.clip(c, lambda) {
                let _ = writeln!(
                    s,
                    r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#b03a2e" stroke-width="{stroke}"/>"##,
                    sig(a[0]),
                    sig(-a[1]),
                    sig(b[0]),
                    sig(-b[1])
                );
            }
        }
        if !self.trace.is_empty() {
            let mut pts: Vec<String> = self.trace.iter().map(|p| pt(*p)).collect();
            pts.push(pt(self.trace[0]));
            let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1e8449" stroke-width="{stroke}"/>"##, pts.join(" "));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Orders curve samples by angle around their centroid.
pub fn angular_order(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    if pts.is_empty() {
        return pts;
    }
    let n = pts.len() as f64;
    let c = [pts.iter().map(|p| p[0]).sum::<f64>() / n, pts.iter().map(|p| p[1]).sum::<f64>() / n];
    let key = |p: &[f64; 2]| ((p[1] - c[1]).atan2(p[0] - c[0]), (p[0] - c[0]).hypot(p[1] - c[1]));
    pts.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    pts
}
