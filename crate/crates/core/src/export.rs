//! Figure output: polar droplet and ROC plots as SVG, transfer-field heatmaps
//! as RGBA rasters.
//!
//! Rasters put grid row `y = 0` at the bottom so `y+` points up on screen.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::ThermalTransferField;

const SIZE: f64 = 400.0;

/// Pixels per droplet unit used by [`polar_droplet_svg`] for a vector whose
/// largest value is `max`.
pub fn polar_scale(max: f64) -> f64 {
    if max > 0.0 {
        0.4 * SIZE / max
    } else {
        1.0
    }
}

/// Closed polygon of the droplet vector with ray `i` at angle `2*pi*(i+1)/N`,
/// counter-clockwise from `+x`. The polygon carries its scale in
/// `data-scale` so values can be recovered from the points.
pub fn polar_droplet_svg(values: &[f64], title: &str) -> Result<String> {
    if values.is_empty() {
        return Err(Error::invalid("cannot plot an empty droplet"));
    }
    let n = values.len();
    let max = values.iter().copied().fold(0.0, f64::max);
    let scale = polar_scale(max);
    let c = SIZE / 2.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
    for ring in 1..=4 {
        let r = 0.1 * SIZE * ring as f64;
        let _ = writeln!(s, r##"<circle cx="{c}" cy="{c}" r="{r}" fill="none" stroke="#ddd"/>"##);
    }
    let _ = writeln!(s, r##"<line x1="0" y1="{c}" x2="{SIZE}" y2="{c}" stroke="#ccc"/><line x1="{c}" y1="0" x2="{c}" y2="{SIZE}" stroke="#ccc"/>"##);
    let pts: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let a = std::f64::consts::TAU * (i + 1) as f64 / n as f64;
            let r = v.max(0.0) * scale;
            format!("{:.6},{:.6}", c + r * a.cos(), c - r * a.sin())
        })
        .collect();
    let _ = writeln!(
        s,
        r##"<polygon class="droplet" data-scale="{scale:e}" data-center="{c}" points="{}" fill="#3b82f6" fill-opacity="0.35" stroke="#1d4ed8"/>"##,
        pts.join(" ")
    );
    let _ = writeln!(s, r##"<text x="8" y="20" font-family="sans-serif" font-size="13">{} (max {:.4})</text>"##, escape(title), max);
    s.push_str("</svg>\n");
    Ok(s)
}

/// Recover droplet values from an SVG written by [`polar_droplet_svg`].
pub fn parse_polar_svg(svg: &str) -> Result<Vec<f64>> {
    let bad = || Error::Format("not a droplet polar plot".into());
    let poly = svg.split("<polygon").nth(1).ok_or_else(bad)?;
    let attr = |name: &str| -> Result<&str> {
        let start = poly.find(&format!("{name}=\"")).ok_or_else(bad)? + name.len() + 2;
        let len = poly[start..].find('"').ok_or_else(bad)?;
        Ok(&poly[start..start + len])
    };
    let scale: f64 = attr("data-scale")?.parse().map_err(|_| bad())?;
    let c: f64 = attr("data-center")?.parse().map_err(|_| bad())?;
    attr("points")?
        .split_whitespace()
        .map(|p| {
            let (x, y) = p.split_once(',').ok_or_else(bad)?;
            let (x, y): (f64, f64) = (x.parse().map_err(|_| bad())?, y.parse().map_err(|_| bad())?);
            Ok((x - c).hypot(y - c) / scale)
        })
        .collect()
}

/// ROC curve as a step polyline over the unit square, with the chance diagonal.
pub fn roc_svg(roc: &[(f64, f64)], auc: f64) -> String {
    let m = 40.0;
    let w = SIZE - 2.0 * m;
    let px = |fpr: f64, tpr: f64| format!("{:.3},{:.3}", m + fpr * w, m + (1.0 - tpr) * w);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
    let _ = writeln!(s, r##"<rect x="{m}" y="{m}" width="{w}" height="{w}" fill="none" stroke="#333"/>"##);
    let _ = writeln!(s, r##"<line x1="{m}" y1="{}" x2="{}" y2="{m}" stroke="#bbb" stroke-dasharray="4 4"/>"##, m + w, m + w);
    let pts: Vec<String> = roc.iter().map(|&(f, t)| px(f, t)).collect();
    let _ = writeln!(s, r##"<polyline class="roc" points="{}" fill="none" stroke="#dc2626" stroke-width="2"/>"##, pts.join(" "));
    let _ = writeln!(s, r##"<text x="{m}" y="24" font-family="sans-serif" font-size="13">ROC, AUC = {auc:.4}</text>"##);
    let _ = writeln!(s, r##"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">false positive rate</text>"##, m + w / 2.0, SIZE - 10.0);
    let _ = writeln!(s, r##"<text x="12" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 12 {})" text-anchor="middle">detection rate</text>"##, m + w / 2.0, m + w / 2.0);
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Piecewise-linear dark-blue to yellow ramp for `t` in `[0, 1]`.
pub fn colormap(t: f64) -> [u8; 3] {
    const STOPS: [[f64; 3]; 5] =
        [[68.0, 1.0, 84.0], [59.0, 82.0, 139.0], [33.0, 145.0, 140.0], [94.0, 201.0, 98.0], [253.0, 231.0, 37.0]];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 } * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    std::array::from_fn(|k| (STOPS[i][k] + f * (STOPS[i + 1][k] - STOPS[i][k])).round() as u8)
}

/// An RGBA image, rows top to bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub rgba: Vec<u8>,
}

/// Map a `w x h` row-major grid (`y = 0` first) to colors, scaled to `[0, max]`.
pub fn heatmap(values: &[f64], w: usize, h: usize, max: f64) -> Result<Raster> {
    if values.len() != w * h {
        return Err(Error::Shape(format!("{} values for a {w}x{h} heatmap", values.len())));
    }
    let mut rgba = Vec::with_capacity(w * h * 4);
    for row in 0..h {
        let y = h - 1 - row;
        for x in 0..w {
            let v = values[y * w + x];
            let [r, g, b] = colormap(if max > 0.0 { v / max } else { 0.0 });
            rgba.extend_from_slice(&[r, g, b, 255]);
        }
    }
    Ok(Raster { width: w, height: h, rgba })
}

/// One heatmap per direction, tiled left to right then top to bottom, two
/// per row, separated by a one-pixel white gutter. All panels share the
/// field's largest coefficient as their scale. Each cell is `scale` pixels.
pub fn field_panels(field: &ThermalTransferField<2>, scale: usize) -> Result<Raster> {
    let [w, h] = field.grid.dims;
    let scale = scale.max(1);
    let max = field.coeffs.iter().copied().fold(0.0, f64::max);
    let cols = 2;
    let rows = field.directions.len().div_ceil(cols);
    let (pw, ph) = (w * scale, h * scale);
    let (width, height) = (cols * pw + (cols - 1), rows * ph + (rows - 1));
    let mut rgba = vec![255u8; width * height * 4];
    for a in 0..field.directions.len() {
        let panel = heatmap(field.direction_slice(a), w, h, max)?;
        let (ox, oy) = ((a % cols) * (pw + 1), (a / cols) * (ph + 1));
        for py in 0..ph {
            for px in 0..pw {
                let src = ((py / scale) * w + px / scale) * 4;
                let dst = ((oy + py) * width + ox + px) * 4;
                rgba[dst..dst + 4].copy_from_slice(&panel.rgba[src..src + 4]);
            }
        }
    }
    Ok(Raster { width, height, rgba })
}
