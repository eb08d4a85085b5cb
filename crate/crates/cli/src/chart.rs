//! Deterministic SVG bar charts for per-token log-probabilities and
//! per-line scores.
//!
//! Bars grow from a zero baseline toward their value — log-probabilities
//! are negative, so bars hang downward and the most suspicious tokens hang
//! lowest. Three visual classes: normal bars in mid grey, flagged bars in
//! blue, excluded bars (structural tokens, definition/import lines) in pale
//! grey. The document is assembled from fixed-precision coordinates with no
//! unordered containers anywhere, so a given input renders byte-identically
//! every time.

use lecforge_core::{CoreError, Result};

/// Visual class of one bar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarKind {
    Normal,
    Flagged,
    Excluded,
}

impl BarKind {
    fn fill(self) -> &'static str {
        match self {
            BarKind::Normal => "#b0b0b0",
            BarKind::Flagged => "#3b6fb6",
            BarKind::Excluded => "#e3e3e3",
        }
    }
}

const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 34.0;
const PLOT_HEIGHT: f64 = 220.0;
const LABEL_AREA: f64 = 76.0;
const BAR_SLOT: f64 = 14.0;
const MIN_PLOT_WIDTH: f64 = 240.0;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// Render one bar per value. `values`, `labels`, and `kinds` must have equal
/// lengths; the empty triple yields a valid document with axes only.
pub fn render_barchart(
    values: &[f64],
    labels: &[String],
    kinds: &[BarKind],
    title: &str,
) -> Result<String> {
    if values.len() != labels.len() || values.len() != kinds.len() {
        return Err(CoreError::Precondition(format!(
            "barchart arity mismatch: {} values, {} labels, {} kinds",
            values.len(),
            labels.len(),
            kinds.len()
        )));
    }
    let plot_w = (values.len() as f64 * BAR_SLOT).max(MIN_PLOT_WIDTH);
    let width = MARGIN_LEFT + plot_w + MARGIN_RIGHT;
    let height = MARGIN_TOP + PLOT_HEIGHT + LABEL_AREA;

    let mut lo = 0.0_f64;
    let mut hi = 0.0_f64;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(hi > lo) {
        // All values are exactly zero: give the axis a nominal span.
        hi = lo + 1.0;
    }
    let y = |v: f64| MARGIN_TOP + (hi - v) / (hi - lo) * PLOT_HEIGHT;
    let y0 = y(0.0);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        width / 2.0,
        escape(title)
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT:.2}\" y1=\"{MARGIN_TOP:.2}\" x2=\"{MARGIN_LEFT:.2}\" y2=\"{:.2}\" stroke=\"#404040\" stroke-width=\"1\"/>\n",
        MARGIN_TOP + PLOT_HEIGHT
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT:.2}\" y1=\"{y0:.2}\" x2=\"{:.2}\" y2=\"{y0:.2}\" stroke=\"#404040\" stroke-width=\"1\"/>\n",
        MARGIN_LEFT + plot_w
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"end\">{hi:.4}</text>\n",
        MARGIN_LEFT - 4.0,
        y(hi) + 3.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"end\">{lo:.4}</text>\n",
        MARGIN_LEFT - 4.0,
        y(lo) + 3.0
    ));

    for (i, ((&v, label), &kind)) in values.iter().zip(labels).zip(kinds).enumerate() {
        let x = MARGIN_LEFT + i as f64 * BAR_SLOT + 1.0;
        let yv = y(v);
        let top = yv.min(y0);
        // Clamp so zero-valued bars stay visible as a sliver at the baseline.
        let h = (yv - y0).abs().max(0.5);
        svg.push_str(&format!(
            "  <rect x=\"{x:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{h:.2}\" fill=\"{}\"/>\n",
            BAR_SLOT - 2.0,
            kind.fill()
        ));
        let lx = x + (BAR_SLOT - 2.0) / 2.0;
        let ly = MARGIN_TOP + PLOT_HEIGHT + 12.0;
        svg.push_str(&format!(
            "  <text x=\"{lx:.2}\" y=\"{ly:.2}\" font-family=\"monospace\" font-size=\"9\" text-anchor=\"end\" transform=\"rotate(-60 {lx:.2} {ly:.2})\">{}</text>\n",
            escape(label)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
