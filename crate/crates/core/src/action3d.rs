//! Skeleton action recognition with volumetric fields and droplet spheres.
//!
//! One field is built per (action class, body point) from that class's
//! training sequences. A sequence's feature concatenates, class-major and body
//! point-minor, the weighted droplet sphere of each of its joint tracks against
//! the matching field.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::analysis::{knn_classify, train_classifier};
use crate::droplet::flow_droplet;
use crate::error::{Error, Result};
use crate::experiment::{accuracy, Classifier};
use crate::field::{build_transfer_field, VolumetricField};
use crate::grid::{dist, sphere_directions_26, sphere_directions_ico42, VolumeGrid};
use crate::par;
use crate::pipeline::RunConfig;
use crate::trajectory::{Trajectory, TrajectorySet};
use crate::tube::TubeBuilder;

/// Hip center in the 20-joint Kinect layout.
pub const DEFAULT_ROOT_JOINT: usize = 6;
/// Neck in the 20-joint Kinect layout.
pub const DEFAULT_TORSO_JOINT: usize = 2;
pub const DEFAULT_VOLUME_CELLS: usize = 32;
/// Half-width of the aligned volume, in torso lengths.
pub const DEFAULT_EXTENT: f64 = 2.5;

/// Joint positions per frame as `(x, y, depth)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonSequence {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub frames: Vec<Vec<[f64; 3]>>,
}

impl SkeletonSequence {
    pub fn joints(&self) -> usize {
        self.frames.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames.len() < 2 {
            return Err(Error::Shape(format!("sequence {} needs at least 2 frames", self.id)));
        }
        let nb = self.joints();
        if nb == 0 || self.frames.iter().any(|f| f.len() != nb) {
            return Err(Error::Shape(format!("sequence {} must have the same non-zero joint count in every frame", self.id)));
        }
        if self.frames.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("sequence {} has non-finite coordinates", self.id)));
        }
        Ok(())
    }

    /// Track of one joint over time.
    pub fn joint_track(&self, joint: usize) -> Trajectory<3> {
        let points = self.frames.iter().map(|f| f[joint]).collect();
        let t = Trajectory::new(format!("{}#{joint}", self.id), points, 1.0);
        match &self.label {
            Some(l) => t.with_label(l.clone()),
            None => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignOptions {
    pub root: usize,
    pub torso: usize,
    pub volume_cells: usize,
    pub extent: f64,
}

impl Default for AlignOptions {
    fn default() -> Self {
        Self { root: DEFAULT_ROOT_JOINT, torso: DEFAULT_TORSO_JOINT, volume_cells: DEFAULT_VOLUME_CELLS, extent: DEFAULT_EXTENT }
    }
}

impl AlignOptions {
    /// Cubic grid whose cell centers span `[-extent, extent]` on every axis.
    pub fn grid(&self) -> Result<VolumeGrid> {
        if self.volume_cells < 2 || !(self.extent > 0.0) {
            return Err(Error::invalid("volume needs at least 2 cells per axis and a positive extent"));
        }
        let cell = 2.0 * self.extent / (self.volume_cells - 1) as f64;
        VolumeGrid::with_origin([self.volume_cells; 3], cell, [-self.extent; 3])
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Root at the origin in every frame, median torso length 1, clamped into the
/// volume grid.
pub fn align_skeleton(seq: &SkeletonSequence, opts: &AlignOptions) -> Result<SkeletonSequence> {
    seq.validate()?;
    let nb = seq.joints();
    for j in [opts.root, opts.torso] {
        if j >= nb {
            return Err(Error::MissingRootJoint { id: seq.id.clone(), root: j, joints: nb });
        }
    }
    let torso = median(seq.frames.iter().map(|f| dist(&f[opts.root], &f[opts.torso])).collect());
    if !(torso > 1e-12) {
        return Err(Error::invalid(format!("sequence {}: torso length is zero", seq.id)));
    }
    let grid = opts.grid()?;
    let frames = seq
        .frames
        .iter()
        .map(|f| {
            let r = f[opts.root];
            f.iter()
                .map(|p| {
                    let mut q = [(p[0] - r[0]) / torso, (p[1] - r[1]) / torso, (p[2] - r[2]) / torso];
                    grid.clamp_scene(&mut q);
                    q
                })
                .collect()
        })
        .collect();
    Ok(SkeletonSequence { id: seq.id.clone(), label: seq.label.clone(), frames })
}

pub fn align_skeletons(seqs: &[SkeletonSequence], opts: &AlignOptions) -> Result<Vec<SkeletonSequence>> {
    seqs.iter().map(|s| align_skeleton(s, opts)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SphereSampling {
    /// Normalized 3x3x3 neighborhood offsets.
    Cube26,
    /// Once-subdivided icosahedron.
    Ico42,
}

impl SphereSampling {
    pub fn directions(self) -> Vec<[f64; 3]> {
        match self {
            Self::Cube26 => sphere_directions_26(),
            Self::Ico42 => sphere_directions_ico42(),
        }
    }
}

impl std::str::FromStr for SphereSampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "26" | "cube26" => Ok(Self::Cube26),
            "42" | "ico42" => Ok(Self::Ico42),
            _ => Err(Error::invalid(format!("unknown sphere sampling {s:?} (26 or ico42)"))),
        }
    }
}

/// Kernel width for volumetric fields, in cells. A 32-cell volume spans five
/// torso lengths, so the planar default would blur arm gestures together.
pub const DEFAULT_SIGMA_3D: f64 = 1.0;

/// Settings for the skeleton pipeline. Field and droplet parameters come from `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionConfig {
    pub run: RunConfig,
    pub align: AlignOptions,
    pub sphere: SphereSampling,
}

impl Default for ActionConfig {
    fn default() -> Self {
        Self {
            run: RunConfig { sigma: DEFAULT_SIGMA_3D, ..RunConfig::default() },
            align: AlignOptions::default(),
            sphere: SphereSampling::Cube26,
        }
    }
}

/// Field from the tracks of one body point of one action class. Points are in
/// aligned coordinates.
pub fn build_field_3d(tracks: &[Trajectory<3>], grid: VolumeGrid, config: &RunConfig) -> Result<VolumetricField> {
    let set = TrajectorySet::new(tracks.to_vec(), grid)?;
    build_transfer_field(&set, &config.field_params())
}

/// Droplet sphere of one aligned joint track.
pub fn droplet_sphere(field: &VolumetricField, track: &Trajectory<3>, dirs: &[[f64; 3]], config: &RunConfig) -> Result<Vec<f64>> {
    let builder = TubeBuilder::with_directions(field, dirs.to_vec(), config.diffusion()).without_cache();
    sphere_with(&builder, track, config)
}

fn sphere_with(builder: &TubeBuilder<'_, 3>, track: &Trajectory<3>, config: &RunConfig) -> Result<Vec<f64>> {
    let mut t = track.clone();
    for p in t.points.iter_mut() {
        builder.field().grid.clamp_scene(p);
    }
    let tube = builder.build(&t)?;
    Ok(flow_droplet(&tube, &config.droplet())?.values)
}

/// Per-(class, body point) fields, class-major.
#[derive(Debug, Clone)]
pub struct ActionFields {
    pub labels: Vec<String>,
    pub body_points: usize,
    pub fields: Vec<VolumetricField>,
}

impl ActionFields {
    pub fn field(&self, class: usize, body_point: usize) -> &VolumetricField {
        &self.fields[class * self.body_points + body_point]
    }
}

/// Sorted distinct labels and the joint count shared by every sequence.
fn training_shape(train: &[SkeletonSequence]) -> Result<(Vec<String>, usize)> {
    let first = train.first().ok_or_else(|| Error::invalid("no training sequences"))?;
    let nb = first.joints();
    let mut labels = Vec::new();
    for s in train {
        s.validate()?;
        if s.joints() != nb {
            return Err(Error::Shape(format!("sequence {} has {} joints, expected {nb}", s.id, s.joints())));
        }
        let l = s.label.clone().ok_or_else(|| Error::invalid(format!("training sequence {} has no label", s.id)))?;
        if !labels.contains(&l) {
            labels.push(l);
        }
    }
    labels.sort();
    Ok((labels, nb))
}

fn class_tracks(train: &[SkeletonSequence], label: &str, joint: usize) -> Vec<Trajectory<3>> {
    train.iter().filter(|s| s.label.as_deref() == Some(label)).map(|s| s.joint_track(joint)).collect()
}

/// Build all fields from aligned, labeled training sequences.
pub fn build_action_fields(train: &[SkeletonSequence], config: &ActionConfig) -> Result<ActionFields> {
    let (labels, nb) = training_shape(train)?;
    let grid = config.align.grid()?;
    let fields = par::map_indices(labels.len() * nb, |i| {
        build_field_3d(&class_tracks(train, &labels[i / nb], i % nb), grid, &config.run)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ActionFields { labels, body_points: nb, fields })
}

/// Unweighted feature of an aligned sequence against prebuilt fields.
pub fn skeleton_feature(seq: &SkeletonSequence, fields: &ActionFields, weights: &[f64], config: &ActionConfig) -> Result<Vec<f64>> {
    check_weights(weights, fields.body_points)?;
    seq.validate()?;
    if seq.joints() != fields.body_points {
        return Err(Error::Shape(format!("sequence {} has {} joints, fields expect {}", seq.id, seq.joints(), fields.body_points)));
    }
    let dirs = config.sphere.directions();
    let mut out = Vec::with_capacity(fields.fields.len() * dirs.len());
    for (i, field) in fields.fields.iter().enumerate() {
        let b = i % fields.body_points;
        let v = droplet_sphere(field, &seq.joint_track(b), &dirs, &config.run)?;
        out.extend(v.into_iter().map(|d| d * weights[b]));
    }
    Ok(out)
}

fn check_weights(weights: &[f64], body_points: usize) -> Result<()> {
    if weights.len() != body_points {
        return Err(Error::Shape(format!("{} weights for {body_points} body points", weights.len())));
    }
    Ok(())
}

/// Column names `class:joint:direction` in feature order.
pub fn feature_columns(labels: &[String], body_points: usize, n_s: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(labels.len() * body_points * n_s);
    for l in labels {
        for b in 0..body_points {
            for s in 0..n_s {
                out.push(format!("{l}:{b}:{s}"));
            }
        }
    }
    out
}

/// Scale each body point's blocks of class-major features by its weight.
pub fn apply_weights(feature: &[f64], weights: &[f64], n_s: usize) -> Vec<f64> {
    let nb = weights.len();
    feature.iter().enumerate().map(|(i, v)| v * weights[(i / n_s) % nb]).collect()
}

/// One feature vector per sequence of a group.
pub type Features = Vec<Vec<f64>>;

/// Unweighted features for several groups of aligned sequences, building each
/// field once and dropping it before the next. Memory stays at one field per
/// worker thread regardless of the number of classes.
pub fn action_features(
    train: &[SkeletonSequence],
    groups: &[&[SkeletonSequence]],
    config: &ActionConfig,
) -> Result<(Vec<String>, Vec<Features>)> {
    let (labels, nb) = training_shape(train)?;
    for s in groups.iter().flat_map(|g| g.iter()) {
        s.validate()?;
        if s.joints() != nb {
            return Err(Error::Shape(format!("sequence {} has {} joints, expected {nb}", s.id, s.joints())));
        }
    }
    let grid = config.align.grid()?;
    let dirs = config.sphere.directions();
    let n_s = dirs.len();
    // blocks[pair][group][sequence] = droplet sphere
    let blocks = par::map_indices(labels.len() * nb, |i| -> Result<Vec<Vec<Vec<f64>>>> {
        let b = i % nb;
        let field = build_field_3d(&class_tracks(train, &labels[i / nb], b), grid, &config.run)?;
        let builder = TubeBuilder::with_directions(&field, dirs.clone(), config.run.diffusion())
            .cache_budget(config.run.cache_budget);
        groups
            .iter()
            .map(|g| g.iter().map(|s| sphere_with(&builder, &s.joint_track(b), &config.run)).collect())
            .collect()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let feats = groups
        .iter()
        .enumerate()
        .map(|(g, seqs)| {
            (0..seqs.len())
                .map(|s| {
                    let mut v = Vec::with_capacity(blocks.len() * n_s);
                    for pair in &blocks {
                        v.extend_from_slice(&pair[g][s]);
                    }
                    v
                })
                .collect()
        })
        .collect();
    Ok((labels, feats))
}

/// Class of `test` among training features.
pub fn recognize(train: &[Vec<f64>], labels: &[usize], test: &[f64], method: Classifier, knn_k: usize) -> Result<usize> {
    match method {
        Classifier::Knn => knn_classify(train, labels, test, knn_k),
        Classifier::Linear => Ok(train_classifier(train, labels)?.classify(test)),
    }
}

fn loo_knn_accuracy(feats: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let hits = (0..feats.len())
        .filter(|&i| {
            let (x, y): (Vec<Vec<f64>>, Vec<usize>) =
                (0..feats.len()).filter(|&j| j != i).map(|j| (feats[j].clone(), labels[j])).unzip();
            knn_classify(&x, &y, &feats[i], k).is_ok_and(|p| p == labels[i])
        })
        .count();
    hits as f64 / feats.len().max(1) as f64
}

/// Greedy coordinate search over per-body-point weights in `candidates`,
/// scored by leave-one-out kNN accuracy on unweighted training features.
/// Starts from all ones; a change is kept only if it strictly improves.
pub fn tune_weights(feats: &[Vec<f64>], labels: &[usize], body_points: usize, n_s: usize, candidates: &[f64], knn_k: usize) -> Vec<f64> {
    let mut w = vec![1.0; body_points];
    let score = |w: &[f64]| {
        let weighted: Vec<Vec<f64>> = feats.iter().map(|f| apply_weights(f, w, n_s)).collect();
        loo_knn_accuracy(&weighted, labels, knn_k)
    };
    let mut best = score(&w);
    for b in 0..body_points {
        for &c in candidates {
            if c == w[b] {
                continue;
            }
            let mut trial = w.clone();
            trial[b] = c;
            let s = score(&trial);
            if s > best {
                best = s;
                w = trial;
            }
        }
    }
    w
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionReport {
    pub labels: Vec<String>,
    pub classifier: Classifier,
    pub weights: Vec<f64>,
    pub accuracy: f64,
    /// Rows are predictions, columns truth.
    pub confusion: Vec<Vec<usize>>,
    pub predictions: Vec<(String, String)>,
}

/// Align, featurize and classify. Test sequences with labels unseen in
/// training count as errors.
pub fn run_action_recognition(
    train: &[SkeletonSequence],
    test: &[SkeletonSequence],
    config: &ActionConfig,
    classifier: Classifier,
    weights: Option<&[f64]>,
) -> Result<ActionReport> {
    let train = align_skeletons(train, &config.align)?;
    let test = align_skeletons(test, &config.align)?;
    let (labels, feats) = action_features(&train, &[&train, &test], config)?;
    let n_s = config.sphere.directions().len();
    let nb = train[0].joints();
    let weights = match weights {
        Some(w) => {
            check_weights(w, nb)?;
            w.to_vec()
        }
        None => vec![1.0; nb],
    };
    let idx = |s: &SkeletonSequence| s.label.as_ref().and_then(|l| labels.iter().position(|x| x == l));
    let ytr: Vec<usize> = train.iter().map(|s| idx(s).expect("training labels listed")).collect();
    let xtr: Vec<Vec<f64>> = feats[0].iter().map(|f| apply_weights(f, &weights, n_s)).collect();
    let xte: Vec<Vec<f64>> = feats[1].iter().map(|f| apply_weights(f, &weights, n_s)).collect();
    let pred: Vec<usize> = match classifier {
        Classifier::Knn => xte.iter().map(|v| knn_classify(&xtr, &ytr, v, config.run.knn_k)).collect::<Result<_>>()?,
        Classifier::Linear => {
            let m = train_classifier(&xtr, &ytr)?;
            xte.iter().map(|v| m.classify(v)).collect()
        }
    };
    let truth: Vec<usize> = test.iter().map(|s| idx(s).unwrap_or(usize::MAX)).collect();
    let nc = labels.len();
    let mut confusion = vec![vec![0; nc]; nc];
    for (&p, &t) in pred.iter().zip(&truth) {
        if t < nc {
            confusion[p][t] += 1;
        }
    }
    Ok(ActionReport {
        accuracy: accuracy(&pred, &truth),
        predictions: test.iter().zip(&pred).map(|(s, &p)| (s.id.clone(), labels[p].clone())).collect(),
        labels,
        classifier,
        weights,
        confusion,
    })
}

pub fn read_skeletons(path: &Path) -> Result<Vec<SkeletonSequence>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: SkeletonSequence = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { path: path.to_path_buf(), line: i + 1, message: e.to_string() })?;
        s.validate().map_err(|e| Error::Parse { path: path.to_path_buf(), line: i + 1, message: e.to_string() })?;
        out.push(s);
    }
    if out.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    Ok(out)
}

pub fn write_skeletons_to(w: &mut impl Write, seqs: &[SkeletonSequence]) -> Result<()> {
    for s in seqs {
        serde_json::to_writer(&mut *w, s)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_skeletons(path: &Path, seqs: &[SkeletonSequence]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_skeletons_to(&mut w, seqs)?;
    w.flush()?;
    Ok(())
}

/// Action label from an `aXX_sYY_eZZ` file stem, if present.
pub fn msr_label(stem: &str) -> Option<String> {
    let a = stem.split('_').next()?;
    (a.len() > 1 && a.starts_with('a') && a[1..].chars().all(|c| c.is_ascii_digit())).then(|| a.to_string())
}

/// Parse a per-sequence skeleton text file: rows of `x y z [confidence]`,
/// `joints` rows per frame. Rows with fewer than three numbers (frame and
/// joint counts) are skipped.
pub fn parse_msr_text(id: &str, text: &str, joints: usize) -> Result<SkeletonSequence> {
    if joints == 0 {
        return Err(Error::invalid("joint count must be positive"));
    }
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { path: id.into(), line: i + 1, message: format!("{e}") })?;
        if nums.len() >= 3 {
            rows.push([nums[0], nums[1], nums[2]]);
        }
    }
    if rows.is_empty() || rows.len() % joints != 0 {
        return Err(Error::Shape(format!("{id}: {} joint rows is not a multiple of {joints}", rows.len())));
    }
    let frames = rows.chunks(joints).map(<[_]>::to_vec).collect();
    let s = SkeletonSequence { id: id.to_string(), label: msr_label(id), frames };
    s.validate()?;
    Ok(s)
}

/// Convert skeleton text files to sequences, labeled from their file names.
pub fn convert_msr(paths: &[&Path], joints: usize) -> Result<Vec<SkeletonSequence>> {
    paths
        .iter()
        .map(|p| {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("seq");
            let id = stem.strip_suffix("_skeleton").or_else(|| stem.strip_suffix("_skeleton3D")).unwrap_or(stem);
            parse_msr_text(id, &std::fs::read_to_string(p)?, joints)
        })
        .collect()
}

/// Synthetic gestures on a 20-joint skeleton.
pub mod gestures {
    use super::*;

    pub const ACTIONS: [&str; 3] = ["wave", "push", "circle"];
    pub const JOINTS: usize = 20;
    const R_SHOULDER: usize = 1;
    const R_ELBOW: usize = 8;
    const R_WRIST: usize = 10;
    const R_HAND: usize = 12;

    /// Rest pose with the hip center at the origin and the neck one unit above.
    pub fn rest_pose() -> Vec<[f64; 3]> {
        vec![
            [-0.35, 0.95, 0.0],
            [0.35, 0.95, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.5, 0.0],
            [-0.2, -0.05, 0.0],
            [0.2, -0.05, 0.0],
            [0.0, 0.0, 0.0],
            [-0.45, 0.6, 0.0],
            [0.45, 0.6, 0.0],
            [-0.5, 0.25, 0.0],
            [0.5, 0.25, 0.0],
            [-0.52, 0.17, 0.0],
            [0.52, 0.17, 0.0],
            [-0.2, -0.55, 0.0],
            [0.2, -0.55, 0.0],
            [-0.2, -1.05, 0.0],
            [0.2, -1.05, 0.0],
            [-0.2, -1.1, -0.1],
            [0.2, -1.1, -0.1],
            [0.0, 1.25, 0.0],
        ]
    }

    fn hand_path(action: usize, t: f64, amp: f64) -> [f64; 3] {
        use std::f64::consts::{PI, TAU};
        match action {
            0 => [0.6 + 0.45 * amp * (TAU * 2.0 * t).sin(), 1.4, -0.1],
            1 => [0.4, 0.9, -0.1 - 0.9 * amp * (PI * t).sin()],
            _ => [0.5 + 0.5 * amp * (TAU * t).cos(), 0.8 + 0.5 * amp * (TAU * t).sin(), -0.4],
        }
    }

    /// `per_action` sequences of each action with random length, phase,
    /// amplitude, joint noise, placement and scale.
    pub fn synth_gestures(per_action: usize, seed: u64) -> Vec<SkeletonSequence> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.02).expect("valid std");
        let rest = rest_pose();
        let mut out = Vec::new();
        for (a, name) in ACTIONS.iter().enumerate() {
            for i in 0..per_action {
                let n_frames = rng.random_range(30..46);
                let amp = rng.random_range(0.85..1.15);
                let phase = rng.random_range(0.0..0.1);
                let scale = rng.random_range(0.35..0.6);
                let offset = [rng.random_range(-0.5..0.5), rng.random_range(-0.3..0.3), rng.random_range(2.0..3.5)];
                let frames = (0..n_frames)
                    .map(|f| {
                        let t = phase + (1.0 - phase) * f as f64 / (n_frames - 1) as f64;
                        let mut pose = rest.clone();
                        let hand = hand_path(a, t, amp);
                        let sh = pose[R_SHOULDER];
                        let elbow = [
                            sh[0] + 0.5 * (hand[0] - sh[0]) + 0.05,
                            sh[1] + 0.5 * (hand[1] - sh[1]) - 0.1,
                            sh[2] + 0.5 * (hand[2] - sh[2]),
                        ];
                        pose[R_ELBOW] = elbow;
                        pose[R_WRIST] = std::array::from_fn(|k| elbow[k] + 0.85 * (hand[k] - elbow[k]));
                        pose[R_HAND] = hand;
                        pose.iter()
                            .map(|p| std::array::from_fn(|k| (p[k] + noise.sample(&mut rng)) * scale + offset[k]))
                            .collect()
                    })
                    .collect();
                out.push(SkeletonSequence { id: format!("{name}-{i}"), label: Some(name.to_string()), frames });
            }
        }
        out
    }
}
