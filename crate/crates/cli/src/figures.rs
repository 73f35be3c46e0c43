//! Figure rendering shared by several subcommands, and `export`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde_json::json;
use tubelet::analysis::auc;
use tubelet::export::{field_panels, roc_svg, Raster};
use tubelet::io::read_droplet_csv;

use crate::error::{CliError, CliResult};
use crate::manifest::Run;
use crate::pipeline::{read_field, write_polar_plots};
use crate::ExportArgs;

/// A file name derived from an id; anything outside `[A-Za-z0-9._-]` becomes `_`.
pub fn file_stem_for(id: &str) -> String {
    let s: String = id.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect();
    if s.is_empty() || s.starts_with('.') {
        format!("_{s}")
    } else {
        s
    }
}

pub fn encode_png(raster: &Raster) -> Result<Vec<u8>, png::EncodingError> {
    let mut bytes = Vec::new();
    let mut enc = png::Encoder::new(&mut bytes, raster.width as u32, raster.height as u32);
    enc.set_color(png::ColorType::Rgba);
    enc.set_depth(png::BitDepth::Eight);
    let mut w = enc.write_header()?;
    w.write_image_data(&raster.rgba)?;
    w.finish()?;
    Ok(bytes)
}

pub fn write_png(run: &mut Run, path: &Path, raster: &Raster) -> CliResult<()> {
    let bytes = encode_png(raster).map_err(|e| CliError::output(path, std::io::Error::other(e)))?;
    run.write_bytes(path, &bytes)
}

/// `fpr,tpr` rows after a header.
pub fn write_roc_csv(w: &mut impl Write, roc: &[(f64, f64)]) -> tubelet::Result<()> {
    writeln!(w, "fpr,tpr")?;
    for (f, t) in roc {
        writeln!(w, "{f},{t}")?;
    }
    Ok(())
}

pub fn read_roc_csv(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let bad = |line: usize, message: String| CliError::input(path, tubelet::Error::Parse { path: path.into(), line, message });
    let reader = BufReader::new(File::open(path).map_err(|e| CliError::input(path, e))?);
    let mut lines = reader.lines();
    let header = lines.next().transpose().map_err(|e| CliError::input(path, e))?.unwrap_or_default();
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let (Some(fi), Some(ti)) = (cols.iter().position(|c| *c == "fpr"), cols.iter().position(|c| *c == "tpr")) else {
        return Err(bad(1, "header needs fpr and tpr columns".into()));
    };
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| CliError::input(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |j: usize| -> CliResult<f64> {
            let v = f.get(j).ok_or_else(|| bad(i + 2, "missing column".into()))?;
            v.parse().map_err(|e| bad(i + 2, format!("{v:?}: {e}")))
        };
        out.push((num(fi)?, num(ti)?));
    }
    Ok(out)
}

pub fn export(a: ExportArgs) -> CliResult<()> {
    if a.droplets.is_none() && a.field.is_none() && a.roc.is_none() {
        log::info!("nothing to export");
        return Ok(());
    }
    let mut run = Run::new("export", 0, &json!({ "png_scale": a.png_scale }));
    if let Some(path) = &a.droplets {
        run.input(path)?;
        let file = File::open(path).map_err(|e| CliError::input(path, e))?;
        let rows = read_droplet_csv(path, BufReader::new(file)).map_err(|e| CliError::input(path, e))?;
        let mut seen = HashSet::new();
        let unique: Vec<(String, Vec<f64>)> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (id, v))| if seen.insert(file_stem_for(&id)) { (id, v) } else { (format!("{id}-{i}"), v) })
            .collect();
        write_polar_plots(&mut run, &a.out.join("droplets"), &unique)?;
    }
    if let Some(path) = &a.field {
        let field = read_field(&mut run, path)?;
        write_png(&mut run, &a.out.join("field.png"), &field_panels(&field, a.png_scale)?)?;
    }
    if let Some(path) = &a.roc {
        run.input(path)?;
        let roc = read_roc_csv(path)?;
        run.write_bytes(&a.out.join("roc.svg"), roc_svg(&roc, auc(&roc)).as_bytes())?;
    }
    run.finish(&a.out.join("manifest.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_become_safe_file_names() {
        assert_eq!(file_stem_for("lane-1"), "lane-1");
        assert_eq!(file_stem_for("a/b c"), "a_b_c");
        assert_eq!(file_stem_for("..x"), "_..x");
        assert_eq!(file_stem_for(""), "_");
    }

    #[test]
    fn png_has_signature_and_size() {
        let r = Raster { width: 3, height: 2, rgba: vec![7; 24] };
        let bytes = encode_png(&r).unwrap();
        assert_eq!(&bytes[..8], b"\x89PNG\r\n\x1a\n");
        let dec = png::Decoder::new(std::io::Cursor::new(bytes));
        let reader = dec.read_info().unwrap();
        assert_eq!((reader.info().width, reader.info().height), (3, 2));
    }
}
