//! Hand-written SVG 1.1 output. Coordinates are printed with two decimals so
//! identical inputs always produce identical bytes.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::estimation::AssetMatrix;
use crate::hcluster::{quasi_diagonalize, LinkageTree, Seriation};

/// Colour of the most negative cell (`-max|v|`).
pub const NEGATIVE_COLOR: (u8, u8, u8) = (0x21, 0x66, 0xac);
/// Colour of zero.
pub const NEUTRAL_COLOR: (u8, u8, u8) = (0xf7, 0xf7, 0xf7);
/// Colour of the most positive cell (`+max|v|`).
pub const POSITIVE_COLOR: (u8, u8, u8) = (0xb2, 0x18, 0x2b);

const MARGIN: f64 = 40.0;
const LABEL_SPACE: f64 = 80.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open_svg(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{width:.2}" height="{height:.2}" fill="white"/>"#
    );
}

/// Orthogonal dendrogram. Leaves sit left to right in seriation order; each
/// bracket is drawn at the height of its merge distance.
pub fn render_dendrogram_svg(tree: &LinkageTree, labels: &[String]) -> Result<String> {
    let n = tree.n_leaves;
    if labels.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} labels for a tree with {n} leaves",
            labels.len()
        )));
    }
    let order = quasi_diagonalize(tree)?;
    let spacing = 30.0;
    let plot_h = 300.0;
    let width = 2.0 * MARGIN + spacing * (n as f64 - 1.0).max(1.0);
    let height = 2.0 * MARGIN + plot_h + LABEL_SPACE;
    let base = MARGIN + plot_h;
    let max_h = tree.merges.iter().map(|m| m.distance).fold(0.0, f64::max);
    let y_of = |d: f64| {
        if max_h > 0.0 {
            base - plot_h * d / max_h
        } else {
            base
        }
    };

    // (x, y) of every node
    let mut pos = vec![(0.0, base); 2 * n - 1];
    for (slot, &leaf) in order.order.iter().enumerate() {
        pos[leaf] = (MARGIN + spacing * slot as f64, base);
    }

    let mut out = String::new();
    open_svg(&mut out, width, height);
    let _ = writeln!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-width="1"/>"##,
        MARGIN / 2.0,
        MARGIN,
        MARGIN / 2.0,
        base
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="9">{max_h:.3}</text>"#,
        MARGIN / 2.0,
        MARGIN - 6.0
    );
    let _ = writeln!(out, r#"<g fill="none" stroke="black" stroke-width="1.5">"#);
    for m in &tree.merges {
        let (xl, yl) = pos[m.left];
        let (xr, yr) = pos[m.right];
        let y = y_of(m.distance);
        let _ = writeln!(
            out,
            r#"<path d="M {xl:.2} {yl:.2} V {y:.2} H {xr:.2} V {yr:.2}"><title>{:.6}</title></path>"#,
            m.distance
        );
        pos[m.node] = ((xl + xr) / 2.0, y);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g text-anchor="end">"#);
    for &leaf in &order.order {
        let (x, _) = pos[leaf];
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" transform="rotate(-60 {x:.2} {:.2})">{}</text>"#,
            base + 14.0,
            base + 14.0,
            escape(&labels[leaf])
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapOrder<'a> {
    Original,
    Seriated(Option<&'a Seriation>),
}

/// Diverging colour for `value` on a scale symmetric about zero.
pub(crate) fn diverging(value: f64, scale: f64) -> (u8, u8, u8) {
    let t = if scale > 0.0 {
        (value / scale).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    let (end, t) = if t < 0.0 {
        (NEGATIVE_COLOR, -t)
    } else {
        (POSITIVE_COLOR, t)
    };
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
    (
        mix(NEUTRAL_COLOR.0, end.0),
        mix(NEUTRAL_COLOR.1, end.1),
        mix(NEUTRAL_COLOR.2, end.2),
    )
}

/// N x N grid coloured on a diverging scale anchored at zero, with endpoints
/// at `-max|v|` ([`NEGATIVE_COLOR`]) and `+max|v|` ([`POSITIVE_COLOR`]).
pub fn render_heatmap_svg<M: AssetMatrix>(matrix: &M, order: HeatmapOrder<'_>) -> Result<String> {
    let n = matrix.len();
    let perm = match order {
        HeatmapOrder::Original => Seriation::identity(n),
        HeatmapOrder::Seriated(Some(s)) => {
            if s.len() != n {
                return Err(Error::UniverseMismatch(format!(
                    "seriation of length {} for a {n}x{n} matrix",
                    s.len()
                )));
            }
            Seriation::from_order(s.order.clone())?
        }
        HeatmapOrder::Seriated(None) => {
            return Err(Error::InvalidArgument(
                "seriated heatmap requested without a seriation".into(),
            ))
        }
    };
    let m = matrix.matrix();
    let scale = m.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let cell = 18.0;
    let side = cell * n as f64;
    let width = LABEL_SPACE + side + MARGIN;
    let height = LABEL_SPACE + side + MARGIN;

    let mut out = String::new();
    open_svg(&mut out, width, height);
    let _ = writeln!(out, r#"<g stroke="none">"#);
    for (r, &i) in perm.order.iter().enumerate() {
        for (c, &j) in perm.order.iter().enumerate() {
            let v = m[(i, j)];
            let (red, green, blue) = diverging(v, scale);
            let _ = writeln!(
                out,
                r##"<rect x="{:.2}" y="{:.2}" width="{cell:.2}" height="{cell:.2}" fill="#{red:02x}{green:02x}{blue:02x}"><title>{} / {}: {v:.6}</title></rect>"##,
                LABEL_SPACE + cell * c as f64,
                LABEL_SPACE + cell * r as f64,
                escape(&matrix.assets()[i]),
                escape(&matrix.assets()[j]),
            );
        }
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g font-size="10">"#);
    for (k, &i) in perm.order.iter().enumerate() {
        let mid = LABEL_SPACE + cell * (k as f64 + 0.5);
        let label = escape(&matrix.assets()[i]);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" dominant-baseline="middle">{label}</text>"#,
            LABEL_SPACE - 4.0,
            mid
        );
        let _ = writeln!(
            out,
            r#"<text x="{mid:.2}" y="{:.2}" text-anchor="start" transform="rotate(-60 {mid:.2} {:.2})">{label}</text>"#,
            LABEL_SPACE - 4.0,
            LABEL_SPACE - 4.0
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}
