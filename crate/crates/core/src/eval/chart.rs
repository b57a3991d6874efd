use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Standalone SVG line chart with train, test and predicted traces. The test
/// and predicted traces start right after the training data.
pub fn forecast_chart_svg(title: &str, train: &[f64], test: &[f64], predicted: &[f64]) -> String {
    let total = (train.len() + test.len().max(predicted.len())).max(2);
    let all = train.iter().chain(test).chain(predicted).copied();
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() && hi > lo {
        (lo, hi)
    } else if lo.is_finite() {
        (lo - 1.0, lo + 1.0)
    } else {
        (0.0, 1.0)
    };
    let x = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (total - 1) as f64;
    let y = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - lo) / (hi - lo);
    let polyline = |class: &str, color: &str, offset: usize, values: &[f64]| -> String {
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x(offset + i), y(v)))
            .collect();
        format!(
            "  <polyline class=\"{class}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            points.join(" ")
        )
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(svg, "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{MARGIN}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n  <line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{b}\" stroke=\"black\"/>",
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for (v, label) in [(lo, lo), (hi, hi)] {
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{label:.1}</text>",
            MARGIN - 4.0,
            y(v) + 4.0
        );
    }
    svg.push_str(&polyline("train", "#1f77b4", 0, train));
    svg.push_str(&polyline("test", "#2ca02c", train.len(), test));
    svg.push_str(&polyline("predicted", "#d62728", train.len(), predicted));
    for (i, (name, color)) in [("train", "#1f77b4"), ("test", "#2ca02c"), ("predicted", "#d62728")]
        .iter()
        .enumerate()
    {
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            "  <line x1=\"{a}\" y1=\"{ly}\" x2=\"{b}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n  <text x=\"{c}\" y=\"{t}\" font-family=\"sans-serif\" font-size=\"12\">{name}</text>",
            a = WIDTH - MARGIN - 110.0,
            b = WIDTH - MARGIN - 90.0,
            c = WIDTH - MARGIN - 85.0,
            t = ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
