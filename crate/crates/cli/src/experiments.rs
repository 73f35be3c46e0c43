//! Clustering, classification, detection and robustness experiments. Each
//! writes `summary.json`, CSV tables and `manifest.json` into its output
//! directory.

use std::io::Write;

use serde_json::json;
use tubelet::export::roc_svg;
use tubelet::experiment::{
    accuracy, predict, robustness_sweep, run_classification, run_clustering, run_detection, ClusterMethod,
};
use tubelet::io::write_trajectories_jsonl_to;
use tubelet::{Pipeline, RunConfig, TrajectorySet};

use crate::args::{load, Scene};
use crate::error::{CliError, CliResult};
use crate::figures::write_roc_csv;
use crate::manifest::Run;
use crate::{ClassifyArgs, ClusterArgs, DetectArgs, RobustnessArgs};

fn parse_methods(names: &[String]) -> CliResult<Vec<ClusterMethod>> {
    if names.is_empty() {
        return Ok(ClusterMethod::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| {
            ClusterMethod::ALL.into_iter().find(|m| m.name() == n.trim()).ok_or_else(|| {
                let known: Vec<&str> = ClusterMethod::ALL.iter().map(|m| m.name()).collect();
                CliError::usage(format!("unknown method {n:?}; expected one of {}", known.join(", ")))
            })
        })
        .collect()
}

fn label_count(set: &TrajectorySet<2>, k: Option<usize>) -> CliResult<usize> {
    let k = k.unwrap_or_else(|| set.labels().len());
    if k < 2 {
        return Err(CliError::usage("need at least 2 clusters; pass --k or label the trajectories"));
    }
    Ok(k)
}

/// Square matrix as CSV: rows are predictions, columns truth.
fn write_confusion<T: std::fmt::Display>(w: &mut impl Write, labels: &[String], m: &[Vec<T>]) -> tubelet::Result<()> {
    writeln!(w, "predicted\\truth,{}", labels.join(","))?;
    for (l, row) in labels.iter().zip(m) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{l},{}", cells.join(","))?;
    }
    Ok(())
}

pub fn cluster(a: ClusterArgs) -> CliResult<()> {
    let config = a.config.resolve(RunConfig::default())?;
    let mut run = Run::new("cluster", config.seed, &config);
    a.config.record(&mut run)?;
    let set = match &a.traj {
        Some(path) => load(&mut run, path, a.format, &config)?,
        None => {
            let scene = a.scene.unwrap_or(if a.k == Some(15) { Scene::FifteenRoutes } else { Scene::Intersection });
            log::info!("clustering a generated {scene:?} scene, {} per lane, seed {}", a.count, config.seed);
            let set = scene.generate(a.count, config.seed)?;
            run.write_with(&a.out.join("scene.jsonl"), |w| write_trajectories_jsonl_to(w, &set))?;
            set
        }
    };
    let k = label_count(&set, a.k)?;
    let methods = parse_methods(&a.methods)?;
    let outcomes = run_clustering(&set, k, &config, &methods)?;
    let droplet = outcomes.iter().find(|o| o.method == ClusterMethod::DropletSpectral).map(|o| o.accuracy);
    let summary = json!({
        "k": k,
        "trajectories": set.trajectories.len(),
        "cluster_accuracy": droplet,
        "methods": outcomes.iter().map(|o| json!({ "method": o.method.name(), "accuracy": o.accuracy })).collect::<Vec<_>>(),
    });
    run.write_json(&a.out.join("summary.json"), &summary)?;
    run.write_with(&a.out.join("labels.csv"), |w| {
        let names: Vec<&str> = outcomes.iter().map(|o| o.method.name()).collect();
        writeln!(w, "id,truth,{}", names.join(","))?;
        for (i, t) in set.trajectories.iter().enumerate() {
            let cols: Vec<String> = outcomes.iter().map(|o| o.labels[i].to_string()).collect();
            writeln!(w, "{},{},{}", t.id, t.label.as_deref().unwrap_or(""), cols.join(","))?;
        }
        Ok(())
    })?;
    for o in &outcomes {
        println!("{:<11} {:.4}", o.method.name(), o.accuracy);
    }
    run.finish(&a.out.join("manifest.json"))
}

pub fn classify(a: ClassifyArgs) -> CliResult<()> {
    let config = a.config.resolve(RunConfig::default())?;
    let mut run = Run::new("classify", config.seed, &config);
    a.config.record(&mut run)?;
    let train = load(&mut run, &a.train, a.format, &config)?;
    let classifier = a.classifier.into();
    match &a.test {
        None => {
            let report = run_classification(&train, &config, classifier, a.splits)?;
            run.write_json(&a.out.join("summary.json"), &report)?;
            run.write_with(&a.out.join("confusion.csv"), |w| write_confusion(w, &report.labels, &report.mean_confusion))?;
            for (i, r) in report.runs.iter().enumerate() {
                run.write_with(&a.out.join(format!("confusion-run{i}.csv")), |w| write_confusion(w, &report.labels, &r.confusion))?;
            }
            println!("mean accuracy over {} splits: {:.4}", report.runs.len(), report.mean_accuracy);
        }
        Some(test_path) => {
            let test = load(&mut run, test_path, a.format, &config)?;
            let labels = train.labels();
            let ytr = train.label_indices();
            if labels.len() < 2 || ytr.contains(&usize::MAX) {
                return Err(CliError::usage(format!("{}: every training trajectory needs a label, with at least 2 classes", a.train.display())));
            }
            let p = Pipeline::fit(&train, &config)?;
            let xtr = p.droplets(&train.trajectories)?;
            let xte = p.droplets(&test.trajectories)?;
            let pred = predict(&xtr, &ytr, &xte, classifier, config.knn_k)?;
            let truth: Vec<usize> = test
                .trajectories
                .iter()
                .map(|t| t.label.as_ref().and_then(|l| labels.iter().position(|x| x == l)).unwrap_or(usize::MAX))
                .collect();
            let nc = labels.len();
            let mut confusion = vec![vec![0usize; nc]; nc];
            for (&p, &t) in pred.iter().zip(&truth) {
                if t < nc {
                    confusion[p][t] += 1;
                }
            }
            let ca = accuracy(&pred, &truth);
            let summary = json!({ "classifier": classifier, "labels": labels, "accuracy": ca, "confusion": confusion });
            run.write_json(&a.out.join("summary.json"), &summary)?;
            run.write_with(&a.out.join("confusion.csv"), |w| write_confusion(w, &labels, &confusion))?;
            run.write_with(&a.out.join("predictions.csv"), |w| {
                writeln!(w, "id,truth,predicted")?;
                for (t, &p) in test.trajectories.iter().zip(&pred) {
                    writeln!(w, "{},{},{}", t.id, t.label.as_deref().unwrap_or(""), labels[p])?;
                }
                Ok(())
            })?;
            println!("accuracy: {ca:.4}");
        }
    }
    run.finish(&a.out.join("manifest.json"))
}

pub fn detect(a: DetectArgs) -> CliResult<()> {
    let config = a.config.resolve(RunConfig::default())?;
    let mut run = Run::new("detect", config.seed, &config);
    a.config.record(&mut run)?;
    let train = load(&mut run, &a.train, a.format, &config)?;
    let test = load(&mut run, &a.test, a.format, &config)?;
    let is_abn = |t: &tubelet::Trajectory<2>| t.label.as_deref() == Some(a.abnormal_label.as_str());
    let normal: Vec<_> = train.trajectories.iter().filter(|t| !is_abn(t)).cloned().collect();
    if normal.len() < train.trajectories.len() {
        log::warn!("ignoring {} training trajectories labeled {:?}", train.trajectories.len() - normal.len(), a.abnormal_label);
    }
    let train = TrajectorySet::new(normal, train.grid)?;
    let truth: Vec<bool> = test.trajectories.iter().map(is_abn).collect();
    let report = run_detection(&train, &test.trajectories, &truth, &config)?;
    let summary = json!({
        "CA": report.classification_accuracy,
        "DR": report.rates.detection_rate,
        "FPR": report.rates.false_positive_rate,
        "AUC": report.auc,
        "threshold": report.threshold,
        "t_min": report.t_min,
        "train": train.trajectories.len(),
        "test": truth.len(),
        "abnormal": truth.iter().filter(|&&b| b).count(),
    });
    run.write_json(&a.out.join("summary.json"), &summary)?;
    run.write_with(&a.out.join("scores.csv"), |w| {
        writeln!(w, "id,score,abnormal,flagged")?;
        for (id, s, abn, flag) in &report.scores {
            writeln!(w, "{id},{s},{abn},{flag}")?;
        }
        Ok(())
    })?;
    let roc_path = a.report.clone().unwrap_or_else(|| a.out.join("roc.csv"));
    run.write_with(&roc_path, |w| write_roc_csv(w, &report.roc))?;
    if a.plot {
        run.write_bytes(&a.out.join("roc.svg"), roc_svg(&report.roc, report.auc).as_bytes())?;
    }
    println!(
        "DR {:.4}  FPR {:.4}  AUC {:.4}",
        report.rates.detection_rate, report.rates.false_positive_rate, report.auc
    );
    run.finish(&a.out.join("manifest.json"))
}

pub fn robustness(a: RobustnessArgs) -> CliResult<()> {
    let config = a.config.resolve(RunConfig::default())?;
    let mut run = Run::new("robustness", config.seed, &config);
    a.config.record(&mut run)?;
    let set = load(&mut run, &a.input.path, a.input.format, &config)?;
    let k = label_count(&set, a.k)?;
    let rows = robustness_sweep(&set, k, &config)?;
    run.write_json(&a.out.join("summary.json"), &json!({ "k": k, "rows": rows }))?;
    run.write_with(&a.out.join("table.csv"), |w| {
        writeln!(w, "mode,level,accuracy")?;
        for r in &rows {
            writeln!(w, "{},{},{}", r.mode, r.level, r.accuracy)?;
        }
        Ok(())
    })?;
    run.finish(&a.out.join("manifest.json"))
}
