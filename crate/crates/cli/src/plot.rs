//! Standalone SVG boxplots of simulation risks.
//!
//! One box per (method, n) group with type-7 quartiles, whiskers at
//! 1.5 IQR and outlier dots; the Bayes risk is a horizontal dashed line.
//! Group statistics are embedded in a `<metadata>` element so the chart
//! is self-describing.

use std::fmt::Write as _;

use csdsvm::stats::quantile_type7_sorted;

#[derive(Debug, Clone)]
pub struct GroupStats {
    pub method: String,
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn group_stats(method: &str, n: usize, risks: &[f64]) -> GroupStats {
    let mut sorted = risks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_type7_sorted(&sorted, 0.25);
    let median = quantile_type7_sorted(&sorted, 0.5);
    let q3 = quantile_type7_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let lo_fence = q1 - 1.5 * iqr;
    let hi_fence = q3 + 1.5 * iqr;
    let whisker_low = sorted.iter().copied().find(|v| *v >= lo_fence).unwrap_or(q1);
    let whisker_high = sorted.iter().rev().copied().find(|v| *v <= hi_fence).unwrap_or(q3);
    let outliers = sorted.iter().copied().filter(|v| *v < lo_fence || *v > hi_fence).collect();
    GroupStats { method: method.to_string(), n, q1, median, q3, whisker_low, whisker_high, outliers }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;

struct YScale {
    min: f64,
    max: f64,
}

impl YScale {
    fn map(&self, v: f64) -> f64 {
        let span = (self.max - self.min).max(1e-300);
        let frac = (v - self.min) / span;
        HEIGHT - MARGIN_BOTTOM - frac * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render the chart. Groups are drawn in the given order; `bayes_risk`
/// draws the dashed reference line.
pub fn render_svg(groups: &[GroupStats], bayes_risk: f64) -> String {
    let mut lo = bayes_risk;
    let mut hi = bayes_risk;
    for g in groups {
        for v in [g.whisker_low, g.whisker_high, g.q1, g.q3]
            .into_iter()
            .chain(g.outliers.iter().copied())
        {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let pad = ((hi - lo) * 0.08).max(1e-9);
    let scale = YScale { min: lo - pad, max: hi + pad };

    let mut meta = String::from("{\"groups\":[");
    for (i, g) in groups.iter().enumerate() {
        if i > 0 {
            meta.push(',');
        }
        let _ = write!(
            meta,
            "{{\"method\":\"{}\",\"n\":{},\"q1\":{},\"median\":{},\"q3\":{},\"whisker_low\":{},\"whisker_high\":{},\"outliers\":{:?}}}",
            escape(&g.method), g.n, g.q1, g.median, g.q3, g.whisker_low, g.whisker_high, g.outliers
        );
    }
    let _ = write!(meta, "],\"bayes_risk\":{bayes_risk}}}");

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(svg, "<metadata id=\"boxplot-stats\">{}</metadata>", escape(&meta));
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");

    // y axis with 6 ticks
    let axis_x = MARGIN_LEFT;
    let _ = writeln!(
        svg,
        "<line x1=\"{axis_x}\" y1=\"{MARGIN_TOP}\" x2=\"{axis_x}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MARGIN_BOTTOM
    );
    for i in 0..=5 {
        let v = scale.min + (scale.max - scale.min) * i as f64 / 5.0;
        let y = scale.map(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{axis_x}\" y2=\"{y}\" stroke=\"black\"/>",
            axis_x - 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{v:.4}</text>",
            axis_x - 8.0,
            y + 4.0
        );
    }

    let slot = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / groups.len().max(1) as f64;
    let box_w = (slot * 0.5).min(60.0);
    for (i, g) in groups.iter().enumerate() {
        let cx = MARGIN_LEFT + slot * (i as f64 + 0.5);
        let y_q1 = scale.map(g.q1);
        let y_q3 = scale.map(g.q3);
        let y_med = scale.map(g.median);
        let y_lo = scale.map(g.whisker_low);
        let y_hi = scale.map(g.whisker_high);
        let _ = writeln!(svg, "<g class=\"box\" data-method=\"{}\" data-n=\"{}\">", escape(&g.method), g.n);
        let _ = writeln!(svg, "  <line x1=\"{cx}\" y1=\"{y_hi}\" x2=\"{cx}\" y2=\"{y_q3}\" stroke=\"black\"/>");
        let _ = writeln!(svg, "  <line x1=\"{cx}\" y1=\"{y_q1}\" x2=\"{cx}\" y2=\"{y_lo}\" stroke=\"black\"/>");
        let _ = writeln!(
            svg,
            "  <line x1=\"{}\" y1=\"{y_hi}\" x2=\"{}\" y2=\"{y_hi}\" stroke=\"black\"/>",
            cx - box_w / 4.0,
            cx + box_w / 4.0
        );
        let _ = writeln!(
            svg,
            "  <line x1=\"{}\" y1=\"{y_lo}\" x2=\"{}\" y2=\"{y_lo}\" stroke=\"black\"/>",
            cx - box_w / 4.0,
            cx + box_w / 4.0
        );
        let _ = writeln!(
            svg,
            "  <rect x=\"{}\" y=\"{y_q3}\" width=\"{box_w}\" height=\"{}\" fill=\"#9ecae1\" stroke=\"black\"/>",
            cx - box_w / 2.0,
            (y_q1 - y_q3).max(0.0)
        );
        let _ = writeln!(
            svg,
            "  <line x1=\"{}\" y1=\"{y_med}\" x2=\"{}\" y2=\"{y_med}\" stroke=\"black\" stroke-width=\"2\"/>",
            cx - box_w / 2.0,
            cx + box_w / 2.0
        );
        for &o in &g.outliers {
            let _ = writeln!(
                svg,
                "  <circle class=\"outlier\" cx=\"{cx}\" cy=\"{}\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>",
                scale.map(o)
            );
        }
        let _ = writeln!(svg, "</g>");
        let _ = writeln!(
            svg,
            "<text x=\"{cx}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{} n={}</text>",
            HEIGHT - MARGIN_BOTTOM + 18.0,
            escape(&g.method),
            g.n
        );
    }

    let y_bayes = scale.map(bayes_risk);
    let _ = writeln!(
        svg,
        "<line class=\"bayes\" x1=\"{MARGIN_LEFT}\" y1=\"{y_bayes}\" x2=\"{}\" y2=\"{y_bayes}\" stroke=\"black\" stroke-dasharray=\"6 4\"/>",
        WIDTH - MARGIN_RIGHT
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">Bayes risk</text>",
        WIDTH - MARGIN_RIGHT,
        y_bayes - 5.0
    );
    svg.push_str("</svg>\n");
    svg
}
