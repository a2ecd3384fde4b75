use std::fmt::Write as _;

use rayon::prelude::*;

use crate::anim::{keyframes, Frame, FrameMode, FrameSequence, TimelineOptions};
use crate::error::{Error, Result};
use crate::pca::BiplotState;

use super::{group_marks, GroupMark, Mapping, RenderStyle, Viewport, LEGEND_WIDTH};

const POINT_RADIUS: f64 = 3.5;
const ARROW_LENGTH: f64 = 9.0;
const ARROW_HALF_WIDTH: f64 = 4.0;
const AXIS_COLOR: &str = "#BBBBBB";

pub(super) fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_owned()
    } else {
        s
    }
}

pub(super) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub(super) fn document_open(width: u32, height: u32) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n\
         <rect class=\"background\" x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#FFFFFF\"/>\n"
    )
}

fn panel(out: &mut String, frame: &Frame, style: &RenderStyle, vp: &Viewport, left: f64, top: f64) {
    let pw = style.plot_width() as f64;
    let ph = style.height as f64;
    let m = style.margin as f64;
    let map = Mapping::new(vp, m, m, pw - 2.0 * m, ph - 2.0 * m);
    let font = style.label_font_size;

    let _ = writeln!(
        out,
        "<g class=\"panel\" transform=\"translate({},{})\">",
        num(left),
        num(top)
    );

    // Axes through the origin, clipped to the viewport.
    let (x0, y0) = map.map(&[vp.x_min, 0.0]);
    let (x1, _) = map.map(&[vp.x_max, 0.0]);
    let (ox, ya) = map.map(&[0.0, vp.y_max]);
    let (_, yb) = map.map(&[0.0, vp.y_min]);
    let _ = writeln!(
        out,
        "<g class=\"axes\" stroke=\"{AXIS_COLOR}\" stroke-width=\"1\">\
         <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\
         <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/></g>",
        num(x0),
        num(y0),
        num(x1),
        num(y0),
        num(ox),
        num(ya),
        num(ox),
        num(yb)
    );

    out.push_str("<g class=\"shadows\">\n");
    for s in &frame.shadows {
        for (p, &g) in s.samples.iter().zip(&s.groups) {
            let (x, y) = map.map(p);
            let _ = writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" fill-opacity=\"{:.4}\" data-level=\"{}\"/>",
                num(x),
                num(y),
                num(POINT_RADIUS * 0.8),
                style.group_color(g),
                s.opacity,
                escape(&s.level)
            );
        }
    }
    out.push_str("</g>\n");

    let marks = group_marks(frame);
    out.push_str("<g class=\"hulls\">\n");
    for mark in &marks {
        if let GroupMark::Hull(g, verts) = mark {
            let mut d = String::new();
            for (i, v) in verts.iter().enumerate() {
                let (x, y) = map.map(v);
                let _ = write!(d, "{}{},{} ", if i == 0 { "M" } else { "L" }, num(x), num(y));
            }
            d.push('Z');
            let color = style.group_color(*g);
            let _ = writeln!(
                out,
                "<path class=\"hull\" data-group=\"{}\" d=\"{d}\" fill=\"{color}\" fill-opacity=\"{:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                escape(&frame.group_names[*g]),
                style.hull_opacity
            );
        }
    }
    out.push_str("</g>\n");

    out.push_str("<g class=\"samples\">\n");
    for mark in &marks {
        if let GroupMark::Points(g, pts) = mark {
            for p in pts {
                let (x, y) = map.map(p);
                let _ = writeln!(
                    out,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" data-group=\"{}\"/>",
                    num(x),
                    num(y),
                    num(POINT_RADIUS),
                    style.group_color(*g),
                    escape(&frame.group_names[*g])
                );
            }
        }
    }
    out.push_str("</g>\n");

    let vc = &style.vector_color;
    let (cx, cy) = map.map(&[0.0, 0.0]);
    out.push_str("<g class=\"vectors\">\n");
    for (v, name) in frame.vectors.iter().zip(frame.variable_names.iter()) {
        let (tx, ty) = map.map(v);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{vc}\" stroke-width=\"1.5\"/>",
            num(cx),
            num(cy),
            num(tx),
            num(ty)
        );
        let (dx, dy) = (tx - cx, ty - cy);
        let len = (dx * dx + dy * dy).sqrt();
        if len > 1e-9 {
            let (ux, uy) = (dx / len, dy / len);
            let (bx, by) = (tx - ARROW_LENGTH * ux, ty - ARROW_LENGTH * uy);
            let _ = writeln!(
                out,
                "<path class=\"arrow\" d=\"M{},{} L{},{} L{},{} Z\" fill=\"{vc}\"/>",
                num(tx),
                num(ty),
                num(bx - ARROW_HALF_WIDTH * uy),
                num(by + ARROW_HALF_WIDTH * ux),
                num(bx + ARROW_HALF_WIDTH * uy),
                num(by - ARROW_HALF_WIDTH * ux)
            );
        }
        let (lx, ly) = if len > 1e-9 {
            (tx + 6.0 * dx / len, ty + 6.0 * dy / len)
        } else {
            (tx, ty)
        };
        let anchor = if dx < 0.0 { "end" } else { "start" };
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"{}\" fill=\"{vc}\" text-anchor=\"{anchor}\">{}</text>",
            num(lx),
            num(ly),
            num(font),
            escape(name)
        );
    }
    out.push_str("</g>\n");

    let _ = writeln!(
        out,
        "<text class=\"level\" x=\"{}\" y=\"{}\" font-size=\"{}\" font-weight=\"bold\">{}</text>",
        num(m),
        num(m - 8.0_f64.min(m / 2.0)),
        num(font * 1.4),
        escape(&frame.level_label())
    );
    out.push_str("</g>\n");
}

fn legend(out: &mut String, groups: &[String], style: &RenderStyle, left: f64) {
    let font = style.label_font_size;
    let _ = writeln!(
        out,
        "<g class=\"legend\" transform=\"translate({},{})\">",
        num(left + 10.0),
        num(style.margin as f64)
    );
    for (g, name) in groups.iter().enumerate() {
        let y = g as f64 * (font + 8.0);
        let _ = writeln!(
            out,
            "<rect x=\"0\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/><text x=\"{}\" y=\"{}\" font-size=\"{}\">{}</text>",
            num(y),
            num(font),
            num(font),
            style.group_color(g),
            num(font + 6.0),
            num(y + font - 1.0),
            num(font),
            escape(name)
        );
    }
    out.push_str("</g>\n");
}

/// One frame as a standalone SVG document.
pub fn render_frame_svg(frame: &Frame, style: &RenderStyle, viewport: &Viewport) -> Result<String> {
    style.validate()?;
    viewport.check()?;
    style.check_palette(frame.group_names.len());
    let mut out = document_open(style.width, style.height);
    panel(&mut out, frame, style, viewport, 0.0, 0.0);
    legend(&mut out, &frame.group_names, style, style.plot_width() as f64);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Every frame of a sequence as its own SVG document, sharing one viewport.
/// Frames are rendered in parallel; the output keeps frame order.
pub fn render_sequence_svg(seq: &FrameSequence, style: &RenderStyle) -> Result<Vec<String>> {
    if seq.is_empty() {
        return Err(Error::Render("cannot render an empty frame sequence".into()));
    }
    let vp = Viewport::covering(&seq.frames)?;
    seq.frames
        .par_iter()
        .map(|f| render_frame_svg(f, style, &vp))
        .collect()
}

/// Rows and columns of a facet sheet for `count` panels.
pub fn facet_grid(count: usize, cols: usize) -> (usize, usize) {
    let cols = cols.clamp(1, count.max(1));
    (count.div_ceil(cols), cols)
}

/// Static grid of one panel per state, sharing one viewport and one legend.
/// Panels are captioned with their level.
pub fn render_facets(
    states: &[BiplotState],
    style: &RenderStyle,
    cols: usize,
    opts: &TimelineOptions,
) -> Result<String> {
    let seq = keyframes(states, FrameMode::Dynamic, opts)?;
    render_facet_frames(&seq, style, cols)
}

/// Facet sheet with one panel per frame of `seq`, in frame order.
pub fn render_facet_frames(seq: &FrameSequence, style: &RenderStyle, cols: usize) -> Result<String> {
    if cols == 0 {
        return Err(Error::Config("facet columns must be at least 1".into()));
    }
    if seq.is_empty() {
        return Err(Error::Render("cannot facet an empty frame sequence".into()));
    }
    style.validate()?;
    let vp = Viewport::covering(&seq.frames)?;
    style.check_palette(seq.group_names.len());
    let (rows, cols) = facet_grid(seq.frames.len(), cols);
    let pw = style.plot_width();
    let mut out = document_open(cols as u32 * pw + LEGEND_WIDTH, rows as u32 * style.height);
    for (i, frame) in seq.frames.iter().enumerate() {
        let (r, c) = (i / cols, i % cols);
        panel(
            &mut out,
            frame,
            style,
            &vp,
            (c as u32 * pw) as f64,
            (r as u32 * style.height) as f64,
        );
    }
    legend(&mut out, &seq.group_names, style, (cols as u32 * pw) as f64);
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn grid_arithmetic() {
        assert_eq!(facet_grid(8, 4), (2, 4));
        assert_eq!(facet_grid(12, 4), (3, 4));
        assert_eq!(facet_grid(1, 4), (1, 1));
        assert_eq!(facet_grid(5, 2), (3, 2));
    }

    #[test]
    fn no_negative_zero() {
        assert_eq!(num(-0.0001), "0.00");
        assert_eq!(num(1.005), "1.00");
    }
}
