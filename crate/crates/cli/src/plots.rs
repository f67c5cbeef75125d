//! Minimal hand-rolled SVG renderers for the batch figures: silhouette
//! curve, PCA scatter, confusion heatmaps, and per-cluster mean waveforms.
//! Correctness bar is well-formed XML with the expected elements, not
//! pixel fidelity.

use std::fmt::Write as _;

use bioclust::clustering::SilhouetteSweep;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

const CLUSTER_COLORS: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        s,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        WIDTH / 2.0,
        xml_escape(title)
    );
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String) {
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MARGIN,
        WIDTH - MARGIN / 2.0,
        HEIGHT - MARGIN
    );
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MARGIN,
        MARGIN / 2.0
    );
}

struct Scale {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Scale {
    fn from_bounds(xs: (f64, f64), ys: (f64, f64)) -> Self {
        let pad = |lo: f64, hi: f64| {
            let span = (hi - lo).abs().max(1e-12);
            (lo - 0.05 * span, hi + 0.05 * span)
        };
        let (x0, x1) = pad(xs.0, xs.1);
        let (y0, y1) = pad(ys.0, ys.1);
        Scale { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 1.5 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        (HEIGHT - MARGIN) - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 1.5 * MARGIN)
    }
}

pub fn silhouette_svg(sweep: &SilhouetteSweep) -> String {
    let mut s = svg_open("Silhouette score across k");
    axes(&mut s);
    let xs = (
        *sweep.k_values.first().unwrap() as f64,
        *sweep.k_values.last().unwrap() as f64,
    );
    let ys = sweep
        .scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let scale = Scale::from_bounds(xs, ys);
    let points: Vec<String> = sweep
        .k_values
        .iter()
        .zip(&sweep.scores)
        .map(|(&k, &score)| format!("{:.2},{:.2}", scale.px(k as f64), scale.py(score)))
        .collect();
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>",
        points.join(" ")
    );
    for (&k, &score) in sweep.k_values.iter().zip(&sweep.scores) {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{}\"/>",
            scale.px(k as f64),
            scale.py(score),
            if k == sweep.best_k { "#d62728" } else { "#1f77b4" }
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{k}</text>",
            scale.px(k as f64),
            HEIGHT - MARGIN + 18.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// PCA scores colored by cluster; marker shape index encodes the true label.
pub fn pca_scatter_svg(scores: &[Vec<f64>], clusters: &[usize], labels: &[u8]) -> String {
    let mut s = svg_open("Windows in PC1/PC2 space");
    axes(&mut s);
    let fold = |sel: fn(&Vec<f64>) -> f64| {
        scores.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(sel(p)), hi.max(sel(p)))
        })
    };
    let scale = Scale::from_bounds(fold(|p| p[0]), fold(|p| p[1]));
    for ((point, &cluster), &label) in scores.iter().zip(clusters).zip(labels) {
        let color = CLUSTER_COLORS[cluster % CLUSTER_COLORS.len()];
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{color}\" fill-opacity=\"0.7\"><title>label {label}</title></circle>",
            scale.px(point[0]),
            scale.py(point[1])
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn confusion_svg(counts: &[Vec<u64>], class_names: &[String], title: &str) -> String {
    let mut s = svg_open(title);
    let n = counts.len();
    let cell = ((WIDTH.min(HEIGHT) - 2.0 * MARGIN) / n as f64).min(90.0);
    let max = counts.iter().flatten().copied().max().unwrap_or(1).max(1) as f64;
    for (i, row) in counts.iter().enumerate() {
        let row_sum: u64 = row.iter().sum();
        for (j, &v) in row.iter().enumerate() {
            let x = MARGIN + j as f64 * cell;
            let y = MARGIN + i as f64 * cell;
            let shade = 255.0 - 200.0 * (v as f64 / max);
            let _ = writeln!(
                s,
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell:.1}\" height=\"{cell:.1}\" fill=\"rgb({0:.0},{0:.0},255)\" stroke=\"black\"/>",
                shade
            );
            let pct = if row_sum > 0 { 100.0 * v as f64 / row_sum as f64 } else { 0.0 };
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{v} ({pct:.1}%)</text>",
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"12\">true {}</text>",
            MARGIN - 8.0,
            MARGIN + i as f64 * cell + cell / 2.0,
            xml_escape(&class_names[i])
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\">pred {}</text>",
            MARGIN + i as f64 * cell + cell / 2.0,
            MARGIN + n as f64 * cell + 18.0,
            xml_escape(&class_names[i])
        );
    }
    s.push_str("</svg>\n");
    s
}

/// One decimated mean waveform per cluster, stacked vertically.
pub fn waveforms_svg(mean_waveforms: &[Vec<f64>], fs: f64) -> String {
    let mut s = svg_open("Cluster mean waveforms");
    let k = mean_waveforms.len().max(1);
    let lane = (HEIGHT - 2.0 * MARGIN) / k as f64;
    for (c, wave) in mean_waveforms.iter().enumerate() {
        if wave.is_empty() {
            continue;
        }
        let (lo, hi) = wave
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let span = (hi - lo).max(1e-12);
        let y_top = MARGIN + c as f64 * lane;
        let step = (wave.len() / 800).max(1);
        let points: Vec<String> = wave
            .iter()
            .step_by(step)
            .enumerate()
            .map(|(i, &v)| {
                let x = MARGIN
                    + i as f64 / (wave.len() / step) as f64 * (WIDTH - 1.5 * MARGIN);
                let y = y_top + lane - 8.0 - (v - lo) / span * (lane - 20.0);
                format!("{x:.1},{y:.1}")
            })
            .collect();
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"/>",
            points.join(" "),
            CLUSTER_COLORS[c % CLUSTER_COLORS.len()]
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">cluster {c} ({:.0} s shown)</text>",
            MARGIN,
            y_top + 12.0,
            wave.len() as f64 / fs
        );
    }
    s.push_str("</svg>\n");
    s
}
