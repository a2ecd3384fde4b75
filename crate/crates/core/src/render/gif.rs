//! Animated GIF output through a small indexed-color rasterizer.
//!
//! The global palette is fixed by the style alone (never by frame content),
//! so identical inputs always produce identical files.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use gif::{Encoder, Frame as GifFrame, Repeat};

use crate::anim::{Frame, FrameSequence, Point};
use crate::error::{Error, Result};

use super::font::{draw_text, text_width, GLYPH_H};
use super::{group_marks, parse_hex, GroupMark, Mapping, RenderStyle, Viewport};

const WHITE: u8 = 0;
const BLACK: u8 = 1;
const AXIS: u8 = 2;
const VECTOR: u8 = 3;
const FIRST_GROUP: usize = 4;
/// Shades per group color: full, hull fill, then one per shadow level.
const SHADES: usize = 2 + SHADOW_LEVELS.len();
const SHADOW_LEVELS: [f64; 5] = [0.8, 0.6, 0.4, 0.2, 0.05];
const MAX_GROUP_COLORS: usize = (256 - FIRST_GROUP) / SHADES;
const FONT_SCALE: i64 = 2;

/// Frame delay in GIF time units (1/100 s), at least 1.
pub fn gif_delay_centiseconds(fps: f64) -> u16 {
    (100.0 / fps).round().clamp(1.0, u16::MAX as f64) as u16
}

fn blend(c: [u8; 3], alpha: f64) -> [u8; 3] {
    c.map(|v| (v as f64 * alpha + 255.0 * (1.0 - alpha)).round() as u8)
}

struct Palette {
    rgb: Vec<u8>,
    colors: usize,
}

impl Palette {
    fn new(style: &RenderStyle) -> Result<Self> {
        let mut rgb = Vec::with_capacity(256 * 3);
        for c in [[255, 255, 255], [0, 0, 0], [0xBB, 0xBB, 0xBB], parse_hex(&style.vector_color)?] {
            rgb.extend_from_slice(&c);
        }
        let colors = style.group_palette.len().min(MAX_GROUP_COLORS);
        if style.group_palette.len() > MAX_GROUP_COLORS {
            log::warn!("GIF output uses only the first {MAX_GROUP_COLORS} palette colors");
        }
        for hex in &style.group_palette[..colors] {
            let c = parse_hex(hex)?;
            rgb.extend_from_slice(&c);
            rgb.extend_from_slice(&blend(c, style.hull_opacity));
            for a in SHADOW_LEVELS {
                rgb.extend_from_slice(&blend(c, a));
            }
        }
        rgb.resize(256 * 3, 0);
        Ok(Palette { rgb, colors })
    }

    fn full(&self, g: usize) -> u8 {
        (FIRST_GROUP + (g % self.colors) * SHADES) as u8
    }

    fn hull(&self, g: usize) -> u8 {
        self.full(g) + 1
    }

    fn shadow(&self, g: usize, opacity: f64) -> u8 {
        let k = SHADOW_LEVELS
            .iter()
            .enumerate()
            .fold(0, |best, (k, a)| {
                if (a - opacity).abs() < (SHADOW_LEVELS[best] - opacity).abs() {
                    k
                } else {
                    best
                }
            });
        self.full(g) + 2 + k as u8
    }
}

struct Canvas {
    w: usize,
    h: usize,
    px: Vec<u8>,
}

impl Canvas {
    fn new(w: usize, h: usize) -> Self {
        Canvas {
            w,
            h,
            px: vec![WHITE; w * h],
        }
    }

    fn set(&mut self, x: i64, y: i64, c: u8) {
        if x >= 0 && y >= 0 && (x as usize) < self.w && (y as usize) < self.h {
            self.px[y as usize * self.w + x as usize] = c;
        }
    }

    fn disc(&mut self, cx: f64, cy: f64, r: f64, c: u8) {
        let (x0, x1) = ((cx - r).floor() as i64, (cx + r).ceil() as i64);
        let (y0, y1) = ((cy - r).floor() as i64, (cy + r).ceil() as i64);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= r * r {
                    self.set(x, y, c);
                }
            }
        }
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), c: u8) {
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let steps = (len * 2.0).ceil().max(1.0) as usize;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let x = (a.0 + t * (b.0 - a.0)).floor() as i64;
            let y = (a.1 + t * (b.1 - a.1)).floor() as i64;
            self.set(x, y, c);
        }
    }

    /// Even-odd scanline fill sampled at pixel centres.
    fn polygon(&mut self, pts: &[(f64, f64)], c: u8) {
        if pts.len() < 3 {
            return;
        }
        let y_lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor() as i64;
        let y_hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
        let mut xs = Vec::new();
        for y in y_lo..=y_hi {
            let sy = y as f64 + 0.5;
            xs.clear();
            for i in 0..pts.len() {
                let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
                if (a.1 <= sy) != (b.1 <= sy) {
                    xs.push(a.0 + (sy - a.1) / (b.1 - a.1) * (b.0 - a.0));
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks(2) {
                if let [xa, xb] = pair {
                    let start = (xa - 0.5).ceil() as i64;
                    let end = (xb - 0.5).floor() as i64;
                    for x in start..=end {
                        self.set(x, y, c);
                    }
                }
            }
        }
    }

    fn text(&mut self, s: &str, x: i64, y: i64, c: u8) {
        draw_text(s, x, y, FONT_SCALE, |px, py| self.set(px, py, c));
    }
}

fn rasterize(frame: &Frame, style: &RenderStyle, vp: &Viewport, pal: &Palette) -> Vec<u8> {
    let (w, h) = (style.width as usize, style.height as usize);
    let mut cv = Canvas::new(w, h);
    let m = style.margin as f64;
    let pw = style.plot_width() as f64;
    let map = Mapping::new(vp, m, m, pw - 2.0 * m, h as f64 - 2.0 * m);
    let to_px = |p: &Point| map.map(p);

    cv.line(to_px(&[vp.x_min, 0.0]), to_px(&[vp.x_max, 0.0]), AXIS);
    cv.line(to_px(&[0.0, vp.y_min]), to_px(&[0.0, vp.y_max]), AXIS);

    for s in &frame.shadows {
        for (p, &g) in s.samples.iter().zip(&s.groups) {
            let (x, y) = to_px(p);
            cv.disc(x, y, 2.8, pal.shadow(g, s.opacity));
        }
    }
    let marks = group_marks(frame);
    for mark in &marks {
        if let GroupMark::Hull(g, verts) = mark {
            let px: Vec<(f64, f64)> = verts.iter().map(to_px).collect();
            cv.polygon(&px, pal.hull(*g));
            for i in 0..px.len() {
                cv.line(px[i], px[(i + 1) % px.len()], pal.full(*g));
            }
        }
    }
    for mark in &marks {
        if let GroupMark::Points(g, pts) = mark {
            for p in pts {
                let (x, y) = to_px(p);
                cv.disc(x, y, 3.5, pal.full(*g));
            }
        }
    }

    let origin = to_px(&[0.0, 0.0]);
    for (v, name) in frame.vectors.iter().zip(frame.variable_names.iter()) {
        let tip = to_px(v);
        cv.line(origin, tip, VECTOR);
        let (dx, dy) = (tip.0 - origin.0, tip.1 - origin.1);
        let len = (dx * dx + dy * dy).sqrt();
        if len > 1e-9 {
            let (ux, uy) = (dx / len, dy / len);
            let base = (tip.0 - 9.0 * ux, tip.1 - 9.0 * uy);
            cv.polygon(
                &[
                    tip,
                    (base.0 - 4.0 * uy, base.1 + 4.0 * ux),
                    (base.0 + 4.0 * uy, base.1 - 4.0 * ux),
                ],
                VECTOR,
            );
            let lx = tip.0 + 6.0 * ux;
            let lx = if dx < 0.0 {
                lx - text_width(name, FONT_SCALE) as f64
            } else {
                lx
            };
            cv.text(name, lx as i64, (tip.1 + 6.0 * uy) as i64 - 5, VECTOR);
        }
    }

    cv.text(&frame.level_label(), m as i64, (m / 2.0) as i64 - 5, BLACK);

    let lx = pw as i64 + 10;
    let row = (GLYPH_H as i64 * FONT_SCALE) + 8;
    for (g, name) in frame.group_names.iter().enumerate() {
        let y = m as i64 + g as i64 * row;
        for yy in y..y + 10 {
            for xx in lx..lx + 10 {
                cv.set(xx, yy, pal.full(g));
            }
        }
        cv.text(name, lx + 16, y, BLACK);
    }
    cv.px
}

/// Encodes the sequence as an endlessly looping GIF, one image per frame.
pub fn encode_gif(seq: &FrameSequence, style: &RenderStyle) -> Result<Vec<u8>> {
    if seq.is_empty() {
        return Err(Error::Render("cannot encode an empty frame sequence".into()));
    }
    style.validate()?;
    if style.width > u16::MAX as u32 || style.height > u16::MAX as u32 {
        return Err(Error::Render("GIF dimensions are limited to 65535 pixels".into()));
    }
    style.check_palette(seq.group_names.len());
    let vp = Viewport::covering(&seq.frames)?;
    let pal = Palette::new(style)?;
    let delay = gif_delay_centiseconds(seq.fps);
    let (w, h) = (style.width as u16, style.height as u16);

    let mut buf = Vec::new();
    {
        let mut enc = Encoder::new(&mut buf, w, h, &pal.rgb)?;
        enc.set_repeat(Repeat::Infinite)?;
        for frame in &seq.frames {
            let px = rasterize(frame, style, &vp, &pal);
            let mut f = GifFrame::from_indexed_pixels(w, h, px, None);
            f.delay = delay;
            enc.write_frame(&f)?;
        }
    }
    Ok(buf)
}

/// Writes [`encode_gif`] output to `out`.
pub fn assemble_gif(seq: &FrameSequence, style: &RenderStyle, out: impl AsRef<Path>) -> Result<()> {
    let out = out.as_ref();
    let bytes = encode_gif(seq, style)?;
    let file = File::create(out).map_err(|e| Error::io(out, e))?;
    let mut w = BufWriter::new(file);
    std::io::Write::write_all(&mut w, &bytes).map_err(|e| Error::io(out, e))?;
    std::io::Write::flush(&mut w).map_err(|e| Error::io(out, e))?;
    Ok(())
}
