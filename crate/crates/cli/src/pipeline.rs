//! Subcommands that produce the representation itself: scenes, fields, tubes
//! and droplets.

use std::path::Path;

use serde_json::json;
use tubelet::export::{field_panels, polar_droplet_svg};
use tubelet::io::{field_sidecar, load_field, sidecar_path, write_droplet_csv, write_field_binary, write_trajectories_jsonl_to};
use tubelet::synth::random_walks;
use tubelet::tube::tube_mesh;
use tubelet::{Pipeline, RunConfig, ThermalTransferField, TrajectorySet};

use crate::args::load;
use crate::error::{CliError, CliResult};
use crate::figures::{file_stem_for, write_png};
use crate::manifest::{beside, Run};
use crate::{BuildFieldArgs, DropletArgs, SynthArgs, TubeArgs};

pub fn synth(a: SynthArgs) -> CliResult<()> {
    let settings = json!({
        "scene": format!("{:?}", a.scene),
        "count": a.count,
        "walks": a.walks,
        "walk_steps": a.walk_steps,
        "wander": a.wander,
        "walk_label": a.walk_label,
    });
    let mut run = Run::new("synth", a.seed, &settings);
    let mut set = a.scene.generate(a.count, a.seed)?;
    if a.walks > 0 {
        // Walks draw from their own stream so adding them leaves the lanes unchanged.
        let walks = random_walks(&set.grid, a.walks, a.walk_steps, 1.0, a.wander, a.seed.wrapping_add(1));
        let mut all = set.trajectories;
        all.extend(walks.into_iter().map(|t| match &a.walk_label {
            Some(l) => t.with_label(l.clone()),
            None => t,
        }));
        set = TrajectorySet::new(all, set.grid)?;
    }
    run.write_with(&a.out, |w| write_trajectories_jsonl_to(w, &set))?;
    run.finish(&beside(&a.out))
}

/// Write `field` to `path` plus its sidecar, both recorded.
fn save_field(run: &mut Run, path: &Path, field: &ThermalTransferField<2>, build: serde_json::Value) -> CliResult<()> {
    run.write_with(path, |w| write_field_binary(w, field))?;
    run.write_json(&sidecar_path(path), &field_sidecar(field, build))
}

/// Read a field and record both of its files as inputs.
pub fn read_field(run: &mut Run, path: &Path) -> CliResult<ThermalTransferField<2>> {
    run.input(path)?;
    run.input(&sidecar_path(path))?;
    load_field(path).map_err(|e| CliError::input(path, e))
}

pub fn build_field(a: BuildFieldArgs) -> CliResult<()> {
    let config = a.config.resolve(RunConfig::default())?;
    let mut run = Run::new("build-field", config.seed, &config);
    a.config.record(&mut run)?;
    let set = load(&mut run, &a.input.path, a.input.format, &config)?;
    let p = Pipeline::fit(&set, &config)?;
    for d in &p.field.empty_directions {
        log::warn!("no motion along {}; its coefficients are the floor value", d.label());
    }
    let build = json!({ "config": config, "trajectories": set.trajectories.len() });
    save_field(&mut run, &a.out, &p.field, build)?;
    if let Some(png) = &a.heatmap {
        write_png(&mut run, png, &field_panels(&p.field, a.png_scale)?)?;
    }
    run.finish(&beside(&a.out))
}

pub fn tube(a: TubeArgs) -> CliResult<()> {
    let config = a.config.resolve(RunConfig::default())?;
    let mut run = Run::new("tube", config.seed, &config);
    a.config.record(&mut run)?;
    let field = read_field(&mut run, &a.field)?;
    let set = load(&mut run, &a.input.path, a.input.format, &config)?;
    let trajs = match &a.id {
        Some(id) => {
            let t = set.trajectories.iter().find(|t| &t.id == id);
            vec![t.cloned().ok_or_else(|| CliError::usage(format!("no trajectory with id {id:?} in {}", a.input.path.display())))?]
        }
        None => set.trajectories,
    };
    let p = Pipeline::from_field(field, &config)?;
    let meshes = p.tubes(&trajs)?.iter().map(tube_mesh).collect::<tubelet::Result<Vec<_>>>()?;
    if a.id.is_some() {
        run.write_json(&a.out, &meshes[0])?;
    } else {
        run.write_json(&a.out, &meshes)?;
    }
    run.finish(&beside(&a.out))
}

pub fn droplet(a: DropletArgs) -> CliResult<()> {
    let config = a.config.resolve(RunConfig::default())?;
    let mut run = Run::new("droplet", config.seed, &config);
    a.config.record(&mut run)?;
    let set = load(&mut run, &a.input.path, a.input.format, &config)?;
    let p = match &a.field {
        Some(f) => Pipeline::from_field(read_field(&mut run, f)?, &config)?,
        None => Pipeline::fit(&set, &config)?,
    };
    let vectors = p.droplets(&set.trajectories)?;
    let rows: Vec<(String, Vec<f64>)> = set.trajectories.iter().map(|t| t.id.clone()).zip(vectors).collect();
    run.write_with(&a.out, |w| write_droplet_csv(w, &rows))?;
    if let Some(dir) = &a.plot {
        write_polar_plots(&mut run, dir, &rows)?;
    }
    run.finish(&beside(&a.out))
}

/// One `<id>.svg` per droplet in `dir`.
pub fn write_polar_plots(run: &mut Run, dir: &Path, rows: &[(String, Vec<f64>)]) -> CliResult<()> {
    for (id, v) in rows {
        let svg = polar_droplet_svg(v, id)?;
        run.write_bytes(&dir.join(format!("{}.svg", file_stem_for(id))), svg.as_bytes())?;
    }
    Ok(())
}
