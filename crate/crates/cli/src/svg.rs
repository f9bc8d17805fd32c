//! Minimal deterministic SVG emission for the report artifacts: line
//! charts, gait diagrams and feasibility heat maps.

pub struct Chart {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    body: String,
}

impl Chart {
    pub fn new(width: f64, height: f64) -> Chart {
        Chart { width, height, margin: 48.0, body: String::new() }
    }

    pub fn finish(self, title: &str) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
             <text x=\"{tx}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n\
             {body}</svg>\n",
            w = self.width,
            h = self.height,
            tx = self.width / 2.0,
            body = self.body,
        )
    }

    fn x_map(&self, v: f64, lo: f64, hi: f64) -> f64 {
        self.margin + (v - lo) / (hi - lo).max(1e-12) * (self.width - 2.0 * self.margin)
    }

    fn y_map(&self, v: f64, lo: f64, hi: f64) -> f64 {
        self.height - self.margin
            - (v - lo) / (hi - lo).max(1e-12) * (self.height - 2.0 * self.margin)
    }

    pub fn axes(&mut self, x_label: &str, y_label: &str) {
        let m = self.margin;
        let (w, h) = (self.width, self.height);
        self.body.push_str(&format!(
            "<line x1=\"{m}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
             <line x1=\"{m}\" y1=\"{y0}\" x2=\"{m}\" y2=\"{m}\" stroke=\"black\"/>\n\
             <text x=\"{xc}\" y=\"{yl}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{x_label}</text>\n\
             <text x=\"14\" y=\"{ym}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 {ym})\">{y_label}</text>\n",
            y0 = h - m,
            x1 = w - m,
            xc = w / 2.0,
            yl = h - 12.0,
            ym = h / 2.0,
        ));
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], bounds: (f64, f64, f64, f64), color: &str) {
        if points.is_empty() {
            return;
        }
        let (x_lo, x_hi, y_lo, y_hi) = bounds;
        let path: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", self.x_map(*x, x_lo, x_hi), self.y_map(*y, y_lo, y_hi)))
            .collect();
        self.body.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, color: &str) {
        self.body.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{color}\"/>\n"
        ));
    }

    pub fn label(&mut self, x: f64, y: f64, text: &str, color: &str) {
        self.body.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{text}</text>\n"
        ));
    }

    pub fn tick_labels_x(&mut self, lo: f64, hi: f64, unit: &str) {
        for i in 0..=4 {
            let v = lo + (hi - lo) * i as f64 / 4.0;
            let x = self.x_map(v, lo, hi);
            self.body.push_str(&format!(
                "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">{v:.3}{unit}</text>\n",
                y = self.height - self.margin + 14.0
            ));
        }
    }

    pub fn tick_labels_y(&mut self, lo: f64, hi: f64, unit: &str) {
        for i in 0..=4 {
            let v = lo + (hi - lo) * i as f64 / 4.0;
            let y = self.y_map(v, lo, hi);
            self.body.push_str(&format!(
                "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"end\">{v:.3}{unit}</text>\n",
                x = self.margin - 4.0
            ));
        }
    }
}

pub const SERIES_COLORS: [&str; 6] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
