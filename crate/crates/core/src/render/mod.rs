//! Output: SVG frames and facet sheets, animated GIF, JSON frame manifest
//! and measure charts.
//!
//! All renderers are pure functions of their inputs; every frame and every
//! facet panel of one run shares a single [`Viewport`], so the data-to-pixel
//! mapping never changes between frames.

mod charts;
mod font;
mod gif;
mod json;
mod svg;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::anim::{Frame, HullShape, Point};
use crate::error::{Error, Result};

pub use self::charts::render_measure_charts;
pub use self::gif::{assemble_gif, encode_gif, gif_delay_centiseconds};
pub use self::json::{export_frames_json, import_frames_json};
pub use self::svg::{facet_grid, render_facet_frames, render_facets, render_frame_svg, render_sequence_svg};

/// Ten evenly spaced hues (the usual categorical default of ggplot-style
/// tools).
pub const DEFAULT_PALETTE: [&str; 10] = [
    "#F8766D", "#D89000", "#A3A500", "#39B600", "#00BF7D", "#00BFC4", "#00B0F6", "#9590FF",
    "#E76BF3", "#FF62BC",
];

/// Width in pixels of the legend strip on the right of every document.
pub const LEGEND_WIDTH: u32 = 120;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderStyle {
    /// Width of a single-frame document, legend strip included.
    pub width: u32,
    pub height: u32,
    /// Group colors as `#RRGGBB`, cycled when there are more groups.
    pub group_palette: Vec<String>,
    pub vector_color: String,
    pub label_font_size: f64,
    pub hull_opacity: f64,
    pub margin: u32,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            width: 720,
            height: 540,
            group_palette: DEFAULT_PALETTE.iter().map(|s| s.to_string()).collect(),
            vector_color: "#404040".into(),
            label_font_size: 11.0,
            hull_opacity: 0.3,
            margin: 30,
        }
    }
}

impl RenderStyle {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let style: RenderStyle = serde_json::from_str(&text)?;
        style.validate()?;
        Ok(style)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width <= LEGEND_WIDTH + 2 * self.margin || self.height <= 2 * self.margin {
            return Err(Error::Config(format!(
                "style size {}×{} leaves no room to plot (margin {}, legend {LEGEND_WIDTH})",
                self.width, self.height, self.margin
            )));
        }
        if self.group_palette.is_empty() {
            return Err(Error::Config("style palette is empty".into()));
        }
        for c in self.group_palette.iter().chain(std::iter::once(&self.vector_color)) {
            parse_hex(c)?;
        }
        if !(0.0..=1.0).contains(&self.hull_opacity) {
            return Err(Error::Config(format!(
                "hull opacity must lie in [0, 1], got {}",
                self.hull_opacity
            )));
        }
        if !(self.label_font_size > 0.0) {
            return Err(Error::Config("label font size must be positive".into()));
        }
        Ok(())
    }

    /// Color of group `g`, cycling through the palette.
    pub fn group_color(&self, g: usize) -> &str {
        &self.group_palette[g % self.group_palette.len()]
    }

    /// Warns once when the palette has to be cycled.
    pub(crate) fn check_palette(&self, n_groups: usize) {
        if n_groups > self.group_palette.len() {
            log::warn!(
                "{n_groups} groups but only {} palette colors; colors will repeat",
                self.group_palette.len()
            );
        }
    }

    fn plot_width(&self) -> u32 {
        self.width - LEGEND_WIDTH
    }
}

pub(crate) fn parse_hex(c: &str) -> Result<[u8; 3]> {
    let bad = || Error::Config(format!("`{c}` is not a #RRGGBB color"));
    let hex = c.strip_prefix('#').ok_or_else(bad)?;
    if hex.len() != 6 || !hex.is_ascii() {
        return Err(bad());
    }
    let mut out = [0u8; 3];
    for (k, o) in out.iter_mut().enumerate() {
        *o = u8::from_str_radix(&hex[2 * k..2 * k + 2], 16).map_err(|_| bad())?;
    }
    Ok(out)
}

/// Data-space rectangle shown in every frame and panel of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Viewport {
    /// Union bounding box of everything drawn in `frames` (and the origin,
    /// where the vectors start), expanded by 5% on each side.
    pub fn covering(frames: &[Frame]) -> Result<Self> {
        let mut pts: Vec<&Point> = Vec::new();
        for f in frames {
            pts.extend(f.samples.iter());
            pts.extend(f.vectors.iter());
            if let Some(hulls) = &f.hulls {
                for h in hulls {
                    pts.extend(h.shape.vertices());
                }
            }
            for s in &f.shadows {
                pts.extend(s.samples.iter());
            }
        }
        let origin = [0.0, 0.0];
        pts.push(&origin);
        let mut v = Viewport {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for p in pts {
            v.x_min = v.x_min.min(p[0]);
            v.x_max = v.x_max.max(p[0]);
            v.y_min = v.y_min.min(p[1]);
            v.y_max = v.y_max.max(p[1]);
        }
        let (dx, dy) = (v.x_max - v.x_min, v.y_max - v.y_min);
        v.x_min -= 0.05 * dx;
        v.x_max += 0.05 * dx;
        v.y_min -= 0.05 * dy;
        v.y_max += 0.05 * dy;
        v.check()?;
        Ok(v)
    }

    pub fn check(&self) -> Result<()> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.y_max > self.y_min;
        if ok {
            Ok(())
        } else {
            Err(Error::Render(format!("degenerate viewport {self:?}")))
        }
    }
}

/// Maps data coordinates into a pixel rectangle with equal scale on both
/// axes, centred in the rectangle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Mapping {
    k: f64,
    ox: f64,
    oy: f64,
    y_max: f64,
    x_min: f64,
}

impl Mapping {
    pub(crate) fn new(vp: &Viewport, left: f64, top: f64, width: f64, height: f64) -> Self {
        let k = (width / (vp.x_max - vp.x_min)).min(height / (vp.y_max - vp.y_min));
        let ox = left + (width - k * (vp.x_max - vp.x_min)) / 2.0;
        let oy = top + (height - k * (vp.y_max - vp.y_min)) / 2.0;
        Mapping {
            k,
            ox,
            oy,
            y_max: vp.y_max,
            x_min: vp.x_min,
        }
    }

    pub(crate) fn map(&self, p: &Point) -> (f64, f64) {
        (
            self.ox + (p[0] - self.x_min) * self.k,
            self.oy + (self.y_max - p[1]) * self.k,
        )
    }
}

/// What to draw for each group in a frame: a filled polygon or the points.
pub(crate) enum GroupMark<'a> {
    Hull(usize, &'a [Point]),
    Points(usize, Vec<Point>),
}

pub(crate) fn group_marks(frame: &Frame) -> Vec<GroupMark<'_>> {
    match &frame.hulls {
        None => {
            let mut by_group: Vec<Vec<Point>> = vec![Vec::new(); frame.group_names.len()];
            for (p, &g) in frame.samples.iter().zip(&frame.sample_groups) {
                by_group[g].push(*p);
            }
            by_group
                .into_iter()
                .enumerate()
                .filter(|(_, v)| !v.is_empty())
                .map(|(g, v)| GroupMark::Points(g, v))
                .collect()
        }
        Some(hulls) => hulls
            .iter()
            .map(|h| match &h.shape {
                HullShape::Polygon(v) => GroupMark::Hull(h.group, v),
                HullShape::Points(v) => GroupMark::Points(h.group, v.clone()),
            })
            .collect(),
    }
}
