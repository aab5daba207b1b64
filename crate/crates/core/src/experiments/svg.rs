//! SVG emitters: five-number box plots and the network/salience diagram.
//!
//! Plain string assembly, no plotting framework. Box colors follow the
//! salience convention used throughout: green for positive, red for
//! negative, grey for neutral.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::stats::five_number_summary;
use crate::network::Network;

const POSITIVE_COLOR: &str = "#2e8b57";
const NEGATIVE_COLOR: &str = "#c0392b";
const NEUTRAL_COLOR: &str = "#f4f4f4";
const BOX_COLOR: &str = "#4a7ebb";

/// One labelled sample group of a box plot.
#[derive(Debug, Clone)]
pub struct BoxGroup {
    pub label: String,
    pub samples: Vec<f64>,
}

impl BoxGroup {
    pub fn new(label: impl Into<String>, samples: Vec<f64>) -> BoxGroup {
        BoxGroup {
            label: label.into(),
            samples,
        }
    }
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders one vertical box (min, Q1, median, Q3, max, no outlier styling)
/// per group, in input order. Every group must be non-empty.
pub fn render_boxplot_svg(title: &str, groups: &[BoxGroup], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, boxplot_svg(title, groups)?)?;
    Ok(())
}

pub(crate) fn boxplot_svg(title: &str, groups: &[BoxGroup]) -> Result<String> {
    if groups.is_empty() {
        return Err(Error::invalid_input("box plot needs at least one group"));
    }
    let summaries: Vec<_> = groups
        .iter()
        .map(|g| {
            five_number_summary(&g.samples)
                .map_err(|_| Error::invalid_input(format!("box plot group '{}' is empty", g.label)))
        })
        .collect::<Result<_>>()?;

    let width = 120.0 + 90.0 * groups.len() as f64;
    let height = 420.0;
    let (top, bottom, left) = (50.0, height - 60.0, 70.0);

    let mut lo = summaries
        .iter()
        .map(|s| s.min)
        .fold(f64::INFINITY, f64::min);
    let mut hi = summaries
        .iter()
        .map(|s| s.max)
        .fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-9 {
        // Degenerate data; give the axis some room.
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let y_of = |v: f64| bottom - (v - lo) / (hi - lo) * (bottom - top);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>\n",
        width / 2.0,
        escape_xml(title)
    ));

    // Y axis with five ticks.
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{bottom}\" stroke=\"black\"/>\n"
    ));
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let y = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{left}\" y2=\"{y}\" stroke=\"black\"/>\n",
            left - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{v:.3}</text>\n",
            left - 9.0,
            y + 4.0
        ));
    }

    let box_width = 34.0;
    for (i, (group, s)) in groups.iter().zip(&summaries).enumerate() {
        let cx = left + 55.0 + 90.0 * i as f64;
        let half = box_width / 2.0;
        svg.push_str(&format!(
            "<g>\n<title>{}: min={} q1={} median={} q3={} max={}</title>\n",
            escape_xml(&group.label),
            s.min,
            s.q1,
            s.median,
            s.q3,
            s.max
        ));
        // Whisker spine and caps.
        svg.push_str(&format!(
            "<line x1=\"{cx}\" y1=\"{}\" x2=\"{cx}\" y2=\"{}\" stroke=\"black\"/>\n",
            y_of(s.max),
            y_of(s.min)
        ));
        for v in [s.min, s.max] {
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
                cx - half / 2.0,
                y_of(v),
                cx + half / 2.0,
                y_of(v)
            ));
        }
        // Interquartile box and median bar.
        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{box_width}\" height=\"{}\" fill=\"{BOX_COLOR}\" fill-opacity=\"0.55\" stroke=\"black\"/>\n",
            cx - half,
            y_of(s.q3),
            (y_of(s.q1) - y_of(s.q3)).max(0.5)
        ));
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"2\"/>\n",
            cx - half,
            y_of(s.median),
            cx + half,
            y_of(s.median)
        ));
        svg.push_str(&format!(
            "<text x=\"{cx}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            bottom + 22.0,
            escape_xml(&group.label)
        ));
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders the layered network diagram: circles per node (green fill for
/// positive salience, red for negative, neutral otherwise), edges coloured
/// by weight sign with stroke width proportional to |W| normalized per
/// layer. Only networks of up to three layers are drawable.
pub fn render_network_svg(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, network_svg(net)?)?;
    Ok(())
}

pub(crate) fn network_svg(net: &Network) -> Result<String> {
    if net.dims().len() > 3 {
        return Err(Error::invalid_input(format!(
            "network diagram supports at most 3 layers, got {}",
            net.dims().len()
        )));
    }
    let max_nodes = *net.dims().iter().max().unwrap() as f64;
    let node_gap = (560.0 / max_nodes).min(34.0);
    let radius = (node_gap * 0.32).min(8.0);
    let width = 220.0 * (net.dims().len() - 1) as f64 + 160.0;
    let height = node_gap * max_nodes + 80.0;

    let x_of = |layer: usize| 80.0 + 220.0 * layer as f64;
    let y_of = |layer: usize, node: usize| {
        let count = net.dims()[layer] as f64;
        height / 2.0 + (node as f64 - (count - 1.0) / 2.0) * node_gap
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));

    // Edges first so nodes draw on top. Width normalized per weight layer.
    for (l, layer) in net.layers().iter().enumerate() {
        let max_abs = layer
            .weights
            .as_slice()
            .iter()
            .fold(0.0f64, |m, w| m.max(w.abs()))
            .max(1e-12);
        for out in 0..layer.out_dim() {
            for (inp, w) in layer.weights.row(out).iter().enumerate() {
                let color = if *w >= 0.0 {
                    POSITIVE_COLOR
                } else {
                    NEGATIVE_COLOR
                };
                let stroke = 0.15 + 2.2 * w.abs() / max_abs;
                svg.push_str(&format!(
                    "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"{stroke:.3}\" stroke-opacity=\"0.6\"/>\n",
                    x_of(l),
                    y_of(l, inp),
                    x_of(l + 1),
                    y_of(l + 1, out)
                ));
            }
        }
    }

    // Input nodes carry no salience.
    for node in 0..net.dims()[0] {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{radius:.2}\" fill=\"{NEUTRAL_COLOR}\" stroke=\"black\"/>\n",
            x_of(0),
            y_of(0, node)
        ));
    }
    for (l, layer) in net.layers().iter().enumerate() {
        for (node, s) in layer.salience.iter().enumerate() {
            let fill = if *s > 0.0 {
                POSITIVE_COLOR
            } else if *s < 0.0 {
                NEGATIVE_COLOR
            } else {
                NEUTRAL_COLOR
            };
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{radius:.2}\" fill=\"{fill}\" stroke=\"black\"><title>layer {} node {node}: salience {s}</title></circle>\n",
                x_of(l + 1),
                y_of(l + 1, node),
                l
            ));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
