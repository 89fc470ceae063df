//! Human-readable renderings of an analysis: the text report, per-panel
//! scatter CSVs and optional SVG scatters.

use std::fmt::Write;

use csv::WriterBuilder;

use crate::analyze::{AnalysisReport, Cell, PlotPanel, Regression, VarianceEntry};

fn cell_text(cell: &Cell) -> String {
    match cell {
        Cell::Ok {
            r, p_value, n, stars, ..
        } => format!("r={r:+.3}{stars:<3} p={p_value:.3e} n={n}"),
        Cell::Error { error, n } => format!("{error} (n={n})"),
    }
}

fn regression_text(out: &mut String, indent: &str, reg: &Regression) {
    match reg {
        Regression::Ok {
            response,
            terms,
            r_squared,
            n,
            df_residual,
        } => {
            let _ = writeln!(out, "{indent}{response} ~ ...  R²={r_squared:.4}  n={n}  df={df_residual}");
            for t in terms {
                let _ = writeln!(
                    out,
                    "{indent}  {:<34} β={:+.4}  SE={:.4}  p={:.3e} {}",
                    t.name, t.beta, t.se, t.p_value, t.stars
                );
            }
        }
        Regression::Error { response, error, n } => {
            let _ = writeln!(out, "{indent}{response}: {error} (n={n})");
        }
    }
}

/// Renders `report.txt`.
pub fn report_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ctxscore analysis report (version {})", report.report_version);
    for note in &report.notes {
        let _ = writeln!(out, "note: {note}");
    }
    let p = &report.provenance;
    let _ = writeln!(out, "\nInputs");
    for (role, d) in &p.inputs {
        let _ = writeln!(out, "  {role:<12} {:<28} sha256:{}", d.file_name, d.sha256);
    }
    let _ = writeln!(out, "  stopwords    {}", p.stopword_list_version);
    if !p.seeds.is_empty() {
        let seeds: Vec<String> = p.seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "  seeds        {}", seeds.join(", "));
    }

    let _ = writeln!(out, "\nMetric–rating correlations (Pearson)");
    for (metric, groups) in &report.correlations {
        let _ = writeln!(out, "  {metric}");
        for (group, dims) in groups {
            for (dim, cell) in dims {
                let _ = writeln!(out, "    {group:<18} {dim:<14} {}", cell_text(cell));
            }
        }
    }

    let _ = writeln!(out, "\nGroup agreement");
    for (dim, pairs) in &report.group_agreement {
        for (pair, cell) in pairs {
            let _ = writeln!(out, "  {dim:<14} {pair:<36} {}", cell_text(cell));
        }
    }

    let _ = writeln!(out, "\nLength correlations");
    for (group, dims) in &report.length_correlations.ratings {
        for (dim, cell) in dims {
            let _ = writeln!(out, "  {group:<18} {dim:<14} {}", cell_text(cell));
        }
    }
    for (metric, cell) in &report.length_correlations.metrics {
        let _ = writeln!(out, "  {metric:<33} {}", cell_text(cell));
    }

    let _ = writeln!(out, "\nVariance decomposition of overall ratings (R²)");
    for (metric, groups) in &report.variance_decomposition {
        let _ = writeln!(out, "  {metric}");
        for (group, entry) in groups {
            match entry {
                VarianceEntry::Ok { r_squared, n, .. } => {
                    let parts: Vec<String> =
                        r_squared.iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
                    let _ = writeln!(out, "    {group:<18} {}  n={n}", parts.join("  "));
                }
                VarianceEntry::Error { error, n } => {
                    let _ = writeln!(out, "    {group:<18} {error} (n={n})");
                }
            }
        }
    }

    let _ = writeln!(out, "\nContent regressions");
    for (population, reg) in &report.content_regressions {
        let _ = writeln!(out, "  {population}");
        regression_text(&mut out, "    ", reg);
    }

    if let Some(s) = &report.shuffle_test {
        let _ = writeln!(out, "\nShuffled-pair test (seed {}, scale {})", s.seed, s.scale);
        let _ = writeln!(
            out,
            "  ordered mean {:.4}  shuffled mean {:.4}  n={}",
            s.ordered_mean, s.shuffled_mean, s.n_pairs
        );
        let _ = writeln!(
            out,
            "  β={:+.4}  SE={:.4}  p={:.3e} {}",
            s.regression_beta, s.regression_se, s.p_value, s.stars
        );
    }
    out
}

/// Scatter points of one panel as CSV with columns `x,y,description_id`.
pub fn panel_csv(panel: &PlotPanel) -> Vec<u8> {
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["x", "y", "description_id"]).expect("in-memory write");
    for (x, y, id) in &panel.points {
        w.write_record([x.to_string(), y.to_string(), id.clone()])
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fit_line(points: &[(f64, f64, String)]) -> Option<(f64, f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y, _) in points {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx, sxy / (sxx * syy).sqrt()))
}

/// A minimal SVG scatter with the least-squares line and Pearson r.
pub fn panel_svg(panel: &PlotPanel) -> String {
    const W: f64 = 360.0;
    const H: f64 = 300.0;
    const M: f64 = 44.0;
    let range = |f: fn(&(f64, f64, String)) -> f64| {
        let (lo, hi) = panel
            .points
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = range(|p| p.0);
    let (y0, y1) = range(|p| p.1);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * M,
        H - 2.0 * M
    );
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, W / 2.0, escape(&panel.name));
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 10.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="12" y="{}" text-anchor="middle" transform="rotate(-90 12 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(&panel.y_label)
    );
    for (x, y, id) in &panel.points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"><title>{}</title></circle>"#,
            sx(*x),
            sy(*y),
            escape(id)
        );
    }
    if let Some((slope, intercept, r)) = fit_line(&panel.points) {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick"/>"#,
            sx(x0),
            sy(intercept + slope * x0),
            sx(x1),
            sy(intercept + slope * x1)
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">r = {r:.3}</text>"#, M + 6.0, M + 14.0);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(points: Vec<(f64, f64, String)>) -> PlotPanel {
        PlotPanel {
            name: "clipscore__blv__overall".into(),
            x_label: "clipscore".into(),
            y_label: "blv overall <rescaled>".into(),
            points,
        }
    }

    #[test]
    fn csv_rows() {
        let p = panel(vec![(0.5, 0.25, "d1".into()), (1.0, 0.75, "d,2".into())]);
        let text = String::from_utf8(panel_csv(&p)).unwrap();
        assert_eq!(text, "x,y,description_id\n0.5,0.25,d1\n1,0.75,\"d,2\"\n");
    }

    #[test]
    fn svg_has_points_and_fit() {
        let p = panel(vec![(0.0, 0.0, "a".into()), (1.0, 2.0, "b".into()), (2.0, 4.0, "c".into())]);
        let svg = panel_svg(&p);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("r = 1.000"));
        assert!(svg.contains("&lt;rescaled&gt;"));
        let flat = panel_svg(&panel(vec![(1.0, 1.0, "a".into())]));
        assert!(!flat.contains("<line"));
    }
}
