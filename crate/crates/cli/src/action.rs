//! `action3d` subcommands.
//!
//! A model file keeps the raw training sequences rather than fields: fields
//! for every (class, body point) pair do not fit in memory at once, and
//! rebuilding them one at a time during evaluation is what keeps memory flat.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;
use tubelet::action3d::{
    action_features, align_skeletons, convert_msr, gestures, read_skeletons, run_action_recognition, tune_weights,
    write_skeletons_to, ActionConfig, SkeletonSequence,
};

use crate::error::{CliError, CliResult};
use crate::manifest::{beside, Run};
use crate::{ActionCommand, ActionEvalArgs, ActionSynthArgs, ActionTrainArgs, ConvertArgs};

#[derive(Debug, Serialize, Deserialize)]
pub struct ActionModel {
    pub config: ActionConfig,
    pub labels: Vec<String>,
    /// One per body point.
    pub weights: Vec<f64>,
    pub train: Vec<SkeletonSequence>,
}

pub fn run(c: ActionCommand) -> CliResult<()> {
    match c {
        ActionCommand::Synth(a) => synth(a),
        ActionCommand::Convert(a) => convert(a),
        ActionCommand::Train(a) => train(a),
        ActionCommand::Eval(a) => eval(a),
    }
}

fn read(run: &mut Run, path: &Path) -> CliResult<Vec<SkeletonSequence>> {
    run.input(path)?;
    let seqs = read_skeletons(path).map_err(|e| CliError::input(path, e))?;
    if seqs.is_empty() {
        return Err(CliError::input(path, tubelet::Error::EmptyInput(path.to_path_buf())));
    }
    Ok(seqs)
}

fn synth(a: ActionSynthArgs) -> CliResult<()> {
    let mut run = Run::new("action3d synth", a.seed, &json!({ "per_action": a.per_action }));
    let seqs = gestures::synth_gestures(a.per_action, a.seed);
    run.write_with(&a.out, |w| write_skeletons_to(w, &seqs))?;
    run.finish(&beside(&a.out))
}

fn convert(a: ConvertArgs) -> CliResult<()> {
    let mut run = Run::new("action3d convert", 0, &json!({ "joints": a.joints }));
    for p in &a.files {
        run.input(p)?;
    }
    let paths: Vec<&Path> = a.files.iter().map(|p| p.as_path()).collect();
    let seqs = convert_msr(&paths, a.joints)?;
    run.write_with(&a.out, |w| write_skeletons_to(w, &seqs))?;
    run.finish(&beside(&a.out))
}

fn train(a: ActionTrainArgs) -> CliResult<()> {
    let mut config = ActionConfig::default();
    config.run = a.config.resolve(config.run)?;
    config.sphere = a.sphere.parse()?;
    if let Some(v) = a.volume {
        config.align.volume_cells = v;
    }
    if let Some(v) = a.extent {
        config.align.extent = v;
    }
    if let Some(v) = a.root {
        config.align.root = v;
    }
    if let Some(v) = a.torso {
        config.align.torso = v;
    }
    let mut run = Run::new("action3d train", config.run.seed, &config);
    a.config.record(&mut run)?;
    let train = read(&mut run, &a.train)?;
    let aligned = align_skeletons(&train, &config.align)?;
    let (labels, weights) = if a.tune {
        let (labels, feats) = action_features(&aligned, &[&aligned], &config)?;
        let y: Vec<usize> = aligned
            .iter()
            .map(|s| labels.iter().position(|l| Some(l) == s.label.as_ref()).expect("training labels listed"))
            .collect();
        let n_s = config.sphere.directions().len();
        let w = tune_weights(&feats[0], &y, aligned[0].joints(), n_s, &a.candidates, config.run.knn_k);
        log::info!("tuned weights {w:?}");
        (labels, w)
    } else {
        let mut labels: Vec<String> = train.iter().filter_map(|s| s.label.clone()).collect();
        labels.sort();
        labels.dedup();
        (labels, vec![1.0; aligned[0].joints()])
    };
    if labels.len() < 2 {
        return Err(CliError::usage(format!("{}: need labeled sequences from at least 2 actions", a.train.display())));
    }
    let model = ActionModel { config, labels, weights, train };
    run.write_json(&a.out, &model)?;
    run.finish(&beside(&a.out))
}

fn eval(a: ActionEvalArgs) -> CliResult<()> {
    let file = File::open(&a.model).map_err(|e| CliError::input(&a.model, e))?;
    let model: ActionModel =
        serde_json::from_reader(BufReader::new(file)).map_err(|e| CliError::input(&a.model, e))?;
    let mut run = Run::new("action3d eval", model.config.run.seed, &model.config);
    run.input(&a.model)?;
    let test = read(&mut run, &a.test)?;
    let report = run_action_recognition(&model.train, &test, &model.config, a.classifier.into(), Some(&model.weights))?;
    run.write_json(&a.out.join("summary.json"), &report)?;
    run.write_with(&a.out.join("predictions.csv"), |w| {
        writeln!(w, "id,truth,predicted")?;
        for (s, (id, p)) in test.iter().zip(&report.predictions) {
            writeln!(w, "{id},{},{p}", s.label.as_deref().unwrap_or(""))?;
        }
        Ok(())
    })?;
    run.write_with(&a.out.join("confusion.csv"), |w| {
        writeln!(w, "predicted\\truth,{}", report.labels.join(","))?;
        for (l, row) in report.labels.iter().zip(&report.confusion) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{l},{}", cells.join(","))?;
        }
        Ok(())
    })?;
    println!("accuracy: {:.4}", report.accuracy);
    run.finish(&a.out.join("manifest.json"))
}
