use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::eval::EvaluationReport;

use super::svg::{document_open, escape, num};
use super::RenderStyle;

const SERIES_COLORS: [&str; 3] = ["#1F77B4", "#D62728", "#2CA02C"];

struct Series<'a> {
    name: &'a str,
    values: Vec<f64>,
}

fn line_chart(title: &str, levels: &[&str], series: &[Series<'_>], style: &RenderStyle) -> String {
    let (w, h) = (style.width as f64, style.height as f64);
    let m = style.margin as f64;
    let font = style.label_font_size;
    let (left, right, top, bottom) = (m + 40.0, w - m - 90.0, m + 20.0, h - m - 30.0);

    let mut lo = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let mut hi = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo > 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    } else {
        let pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    let x_of = |i: usize| {
        if levels.len() == 1 {
            (left + right) / 2.0
        } else {
            left + (right - left) * i as f64 / (levels.len() - 1) as f64
        }
    };
    let y_of = |v: f64| bottom - (bottom - top) * (v - lo) / (hi - lo);

    let mut out = document_open(style.width, style.height);
    let _ = writeln!(
        out,
        "<text class=\"title\" x=\"{}\" y=\"{}\" font-size=\"{}\" font-weight=\"bold\">{}</text>",
        num(left),
        num(m + 4.0),
        num(font * 1.3),
        escape(title)
    );
    let _ = writeln!(
        out,
        "<g class=\"frame\" stroke=\"#444444\" fill=\"none\"><line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\"/><line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{2}\"/></g>",
        num(left),
        num(right),
        num(bottom),
        num(top)
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            out,
            "<line class=\"grid\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#E5E5E5\"/><text class=\"y-tick\" x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"end\">{:.3}</text>",
            num(left),
            num(y),
            num(right),
            num(y),
            num(left - 6.0),
            num(y + font / 3.0),
            num(font),
            v
        );
    }
    for (i, level) in levels.iter().enumerate() {
        let x = x_of(i);
        let _ = writeln!(
            out,
            "<text class=\"x-tick\" x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"middle\">{}</text>",
            num(x),
            num(bottom + font + 6.0),
            num(font),
            escape(level)
        );
    }
    for (k, s) in series.iter().enumerate() {
        let color = SERIES_COLORS[k % SERIES_COLORS.len()];
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{},{}", num(x_of(i)), num(y_of(*v))))
            .collect();
        let _ = writeln!(
            out,
            "<polyline class=\"series\" data-series=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            s.name,
            points.join(" ")
        );
        for (i, v) in s.values.iter().enumerate() {
            let _ = writeln!(
                out,
                "<circle class=\"point\" data-series=\"{}\" data-level=\"{}\" cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>",
                s.name,
                escape(levels[i]),
                num(x_of(i)),
                num(y_of(*v))
            );
        }
        // First occurrence of the maximum.
        let imax = s
            .values
            .iter()
            .enumerate()
            .fold(0, |b, (i, v)| if *v > s.values[b] { i } else { b });
        let _ = writeln!(
            out,
            "<circle class=\"max-marker\" data-series=\"{}\" data-level=\"{}\" cx=\"{}\" cy=\"{}\" r=\"6\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            s.name,
            escape(levels[imax]),
            num(x_of(imax)),
            num(y_of(s.values[imax]))
        );
        let ly = top + k as f64 * (font + 8.0);
        let _ = writeln!(
            out,
            "<g class=\"legend-entry\"><line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"/><text x=\"{}\" y=\"{}\" font-size=\"{}\">{}</text></g>",
            num(right + 12.0),
            num(ly),
            num(right + 32.0),
            num(ly),
            num(right + 38.0),
            num(ly + font / 3.0),
            num(font),
            s.name
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Fit chart (PS and CC) and bias chart (AMB, MB, RMSB) against level.
pub fn render_measure_charts(report: &EvaluationReport, style: &RenderStyle) -> Result<(String, String)> {
    if report.records.len() < 2 {
        return Err(Error::Render(format!(
            "trend charts need at least 2 levels, got {}; use the table output instead",
            report.records.len()
        )));
    }
    style.validate()?;
    let levels = report.levels();
    let get = |f: fn(&crate::eval::EvaluationRecord) -> f64| report.records.iter().map(f).collect();
    let fit = line_chart(
        "Fit measures",
        &levels,
        &[
            Series {
                name: "PS",
                values: get(|r| r.ps),
            },
            Series {
                name: "CC",
                values: get(|r| r.cc),
            },
        ],
        style,
    );
    let bias = line_chart(
        "Bias measures",
        &levels,
        &[
            Series {
                name: "AMB",
                values: get(|r| r.amb),
            },
            Series {
                name: "MB",
                values: get(|r| r.mb),
            },
            Series {
                name: "RMSB",
                values: get(|r| r.rmsb),
            },
        ],
        style,
    );
    Ok((fit, bias))
}
