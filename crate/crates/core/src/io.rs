//! File formats: trajectory JSONL/CSV, droplet CSV, binary transfer fields,
//! diffusion-map CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::ThermalTransferField;
use crate::grid::{Direction, Grid, DEFAULT_MAX_CELLS};
use crate::trajectory::{Trajectory, TrajectorySet};

/// Serde helper for fixed-size float arrays (serialized as JSON arrays).
pub mod array_serde {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer, const D: usize>(v: &[f64; D], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, De: Deserializer<'de>, const D: usize>(d: De) -> Result<[f64; D], De::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        v.try_into().map_err(|v: Vec<f64>| De::Error::custom(format!("expected {D} coordinates, got {}", v.len())))
    }
}

/// Serde helper for lists of fixed-size float arrays.
pub mod array_vec_serde {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer, const D: usize>(v: &[[f64; D]], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|p| p.as_slice()))
    }

    pub fn deserialize<'de, De: Deserializer<'de>, const D: usize>(d: De) -> Result<Vec<[f64; D]>, De::Error> {
        Vec::<Vec<f64>>::deserialize(d)?
            .into_iter()
            .map(|p| p.try_into().map_err(|p: Vec<f64>| De::Error::custom(format!("expected {D} coordinates, got {}", p.len()))))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryFormat {
    Jsonl,
    Csv,
}

impl TrajectoryFormat {
    /// Guess from the file extension; anything but `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::Jsonl,
        }
    }
}

impl std::str::FromStr for TrajectoryFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(Self::Jsonl),
            "csv" => Ok(Self::Csv),
            other => Err(Error::invalid(format!("unknown trajectory format {other:?}"))),
        }
    }
}

/// Ingestion metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    /// Points moved onto the declared grid.
    pub clamped_points: usize,
    /// Ids of trajectories dropped for having fewer than 2 points.
    pub dropped: Vec<String>,
    /// True when no scene header was present and the grid was fit to the data.
    pub grid_inferred: bool,
}

/// Optional scene header: `{"scene": {"w": .., "h": .., "d": .., "cell": .., "origin": [..]}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SceneHeader {
    w: usize,
    h: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    cell: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<Vec<f64>>,
}

impl SceneHeader {
    fn from_grid<const D: usize>(g: &Grid<D>) -> Self {
        Self {
            w: g.dims[0],
            h: g.dims[1],
            d: (D > 2).then(|| g.dims[2]),
            cell: g.cell_size,
            origin: g.origin.iter().any(|&o| o != 0.0).then(|| g.origin.to_vec()),
        }
    }

    fn to_grid<const D: usize>(&self) -> Result<Grid<D>> {
        let dims: [usize; D] = std::array::from_fn(|i| match i {
            0 => self.w,
            1 => self.h,
            _ => self.d.unwrap_or(0),
        });
        let origin = match &self.origin {
            Some(o) if o.len() == D => std::array::from_fn(|i| o[i]),
            Some(o) => return Err(Error::Shape(format!("scene origin has {} coordinates, expected {D}", o.len()))),
            None => [0.0; D],
        };
        Grid::with_origin(dims, self.cell, origin)
    }
}

#[derive(Debug, Deserialize)]
struct RawTrajectory {
    id: Value,
    #[serde(default)]
    label: Option<Value>,
    #[serde(default = "one")]
    dt: f64,
    points: Vec<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

fn value_to_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn to_point<const D: usize>(v: &[f64]) -> std::result::Result<[f64; D], String> {
    if v.len() != D {
        return Err(format!("point has {} coordinates, expected {D}", v.len()));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err("non-finite coordinate".into());
    }
    Ok(std::array::from_fn(|i| v[i]))
}

/// Load trajectories from JSONL or CSV. Trajectories with fewer than 2 points
/// are dropped; points outside a declared grid are clamped onto it.
pub fn load_trajectories<const D: usize>(
    path: &Path,
    format: TrajectoryFormat,
) -> Result<(TrajectorySet<D>, LoadReport)> {
    load_trajectories_with(path, format, DEFAULT_MAX_CELLS)
}

/// [`load_trajectories`] with the longest axis of an inferred grid set to
/// `max_cells`. A declared scene header wins.
pub fn load_trajectories_with<const D: usize>(
    path: &Path,
    format: TrajectoryFormat,
    max_cells: usize,
) -> Result<(TrajectorySet<D>, LoadReport)> {
    let reader = BufReader::new(File::open(path)?);
    let (trajs, header) = match format {
        TrajectoryFormat::Jsonl => parse_jsonl::<D>(path, reader)?,
        TrajectoryFormat::Csv => (parse_csv::<D>(path, reader)?, None),
    };
    finish_load(path, trajs, header, max_cells)
}

fn finish_load<const D: usize>(
    path: &Path,
    trajs: Vec<Trajectory<D>>,
    header: Option<SceneHeader>,
    max_cells: usize,
) -> Result<(TrajectorySet<D>, LoadReport)> {
    let mut report = LoadReport::default();
    let mut kept = Vec::with_capacity(trajs.len());
    for t in trajs {
        if t.len() < 2 {
            log::warn!("{}: dropping trajectory {} with {} point(s)", path.display(), t.id, t.len());
            report.dropped.push(t.id);
        } else {
            kept.push(t);
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    let grid = match header {
        Some(h) => h.to_grid::<D>()?,
        None => {
            report.grid_inferred = true;
            Grid::fit_to_points(kept.iter().flat_map(|t| t.points.iter()), max_cells)?
        }
    };
    for t in kept.iter_mut() {
        for p in t.points.iter_mut() {
            if grid.clamp_scene(p) {
                report.clamped_points += 1;
            }
        }
    }
    if report.clamped_points > 0 {
        log::warn!("{}: clamped {} point(s) onto the scene grid", path.display(), report.clamped_points);
    }
    Ok((TrajectorySet::new(kept, grid)?, report))
}

fn parse_jsonl<const D: usize>(path: &Path, reader: impl BufRead) -> Result<(Vec<Trajectory<D>>, Option<SceneHeader>)> {
    let perr = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let mut out = Vec::new();
    let mut header = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(|e| perr(lineno, e.to_string()))?;
        if let Some(scene) = v.get("scene") {
            if !out.is_empty() || header.is_some() {
                return Err(perr(lineno, "scene header must be the first line".into()));
            }
            header = Some(SceneHeader::deserialize(scene).map_err(|e| perr(lineno, e.to_string()))?);
            continue;
        }
        let raw = RawTrajectory::deserialize(&v).map_err(|e| perr(lineno, e.to_string()))?;
        if !(raw.dt > 0.0 && raw.dt.is_finite()) {
            return Err(perr(lineno, format!("dt {} must be positive", raw.dt)));
        }
        let points = raw
            .points
            .iter()
            .map(|p| to_point::<D>(p))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|m| perr(lineno, m))?;
        out.push(Trajectory {
            id: value_to_string(&raw.id),
            points,
            dt: raw.dt,
            label: raw.label.filter(|l| !l.is_null()).map(|l| value_to_string(&l)),
        });
    }
    Ok((out, header))
}

fn parse_csv<const D: usize>(path: &Path, reader: impl BufRead) -> Result<Vec<Trajectory<D>>> {
    let perr = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    struct Partial<const D: usize> {
        id: String,
        times: Vec<f64>,
        points: Vec<[f64; D]>,
        label: Option<String>,
        line: usize,
    }
    let mut groups: Vec<Partial<D>> = Vec::new();
    let ncols = 3 + D;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || (i == 0 && trimmed.starts_with("id")) {
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if cols.len() != ncols && cols.len() != ncols - 1 {
            return Err(perr(lineno, format!("expected {ncols} columns (id,t,coords..,label), got {}", cols.len())));
        }
        let nums = cols[1..2 + D]
            .iter()
            .map(|c| c.parse::<f64>().map_err(|e| perr(lineno, format!("{c:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let p = to_point::<D>(&nums[1..]).map_err(|m| perr(lineno, m))?;
        let label = cols.get(2 + D).filter(|l| !l.is_empty()).map(|l| l.to_string());
        match groups.last_mut() {
            Some(g) if g.id == cols[0] => {
                if nums[0] <= *g.times.last().expect("non-empty") {
                    return Err(perr(lineno, "rows of a trajectory must be sorted by increasing t".into()));
                }
                g.times.push(nums[0]);
                g.points.push(p);
            }
            _ => {
                if groups.iter().any(|g| g.id == cols[0]) {
                    return Err(perr(lineno, format!("rows of trajectory {} are not contiguous", cols[0])));
                }
                groups.push(Partial { id: cols[0].to_string(), times: vec![nums[0]], points: vec![p], label, line: lineno });
            }
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let dt = if g.times.len() >= 2 {
                (g.times[g.times.len() - 1] - g.times[0]) / (g.times.len() - 1) as f64
            } else {
                1.0
            };
            if !(dt > 0.0) {
                return Err(perr(g.line, format!("trajectory {} has non-increasing timestamps", g.id)));
            }
            Ok(Trajectory { id: g.id, points: g.points, dt, label: g.label })
        })
        .collect()
}

#[derive(Serialize)]
struct OutTrajectory<'a> {
    id: &'a str,
    label: Option<&'a str>,
    dt: f64,
    points: Vec<&'a [f64]>,
}

/// Write trajectories as JSONL with a leading scene header.
pub fn write_trajectories_jsonl<const D: usize>(path: &Path, set: &TrajectorySet<D>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trajectories_jsonl_to(&mut w, set)?;
    w.flush()?;
    Ok(())
}

pub fn write_trajectories_jsonl_to<const D: usize>(w: &mut impl Write, set: &TrajectorySet<D>) -> Result<()> {
    let header = serde_json::json!({ "scene": SceneHeader::from_grid(&set.grid) });
    writeln!(w, "{header}")?;
    for t in &set.trajectories {
        let rec = OutTrajectory {
            id: &t.id,
            label: t.label.as_deref(),
            dt: t.dt,
            points: t.points.iter().map(|p| p.as_slice()).collect(),
        };
        writeln!(w, "{}", serde_json::to_string(&rec)?)?;
    }
    Ok(())
}

/// Droplet vectors as CSV: `id,d_1,..,d_N`. Values use shortest round-trip formatting.
pub fn write_droplet_csv(w: &mut impl Write, rows: &[(String, Vec<f64>)]) -> Result<()> {
    let n = rows.first().map_or(0, |r| r.1.len());
    let columns: Vec<String> = (1..=n).map(|b| format!("d_{b}")).collect();
    write_vectors_csv(w, &columns, rows)
}

/// Labeled vectors as CSV with an `id` column followed by `columns`.
pub fn write_vectors_csv(w: &mut impl Write, columns: &[String], rows: &[(String, Vec<f64>)]) -> Result<()> {
    let n = columns.len();
    write!(w, "id")?;
    for c in columns {
        if c.contains(',') {
            return Err(Error::invalid(format!("column name {c:?} contains a comma")));
        }
        write!(w, ",{c}")?;
    }
    writeln!(w)?;
    for (id, v) in rows {
        if v.len() != n {
            return Err(Error::Shape(format!("vector {id} has {} values, expected {n}", v.len())));
        }
        write!(w, "{id}")?;
        for x in v {
            write!(w, ",{x}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_droplet_csv(path: &Path, reader: impl BufRead) -> Result<Vec<(String, Vec<f64>)>> {
    Ok(read_vectors_csv(path, reader)?.1)
}

/// Column names (without `id`) and rows of a vector CSV.
/// Named rows of a vector CSV.
pub type Rows = Vec<(String, Vec<f64>)>;

pub fn read_vectors_csv(path: &Path, reader: impl BufRead) -> Result<(Vec<String>, Rows)> {
    let perr = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let mut out = Vec::new();
    let mut columns = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 {
            columns = line.split(',').skip(1).map(str::to_string).collect();
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let id = cols.next().unwrap_or_default().to_string();
        let v = cols
            .map(|c| c.trim().parse::<f64>().map_err(|e| perr(i + 1, format!("{c:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != columns.len() {
            return Err(perr(i + 1, format!("expected {} values, got {}", columns.len(), v.len())));
        }
        out.push((id, v));
    }
    Ok((columns, out))
}

const FIELD_MAGIC: &[u8; 4] = b"TTF1";

/// Metadata stored next to a binary field file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub sigma: f64,
    pub kappa: f64,
    pub eta: f64,
    pub squared_kernel: bool,
    pub cell_size: f64,
    pub origin: [f64; 2],
    pub empty_directions: Vec<String>,
    #[serde(default)]
    pub build: Value,
}

/// Path of the JSON sidecar for a binary field file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Binary layout: magic, `u32` W, H, |A| (little-endian), |A| direction unit
/// vectors as `f32` pairs, then `f64` coefficients row-major per direction.
pub fn write_field_binary(w: &mut impl Write, field: &ThermalTransferField<2>) -> Result<()> {
    w.write_all(FIELD_MAGIC)?;
    for v in [field.grid.dims[0], field.grid.dims[1], field.directions.len()] {
        w.write_all(&(v as u32).to_le_bytes())?;
    }
    for d in &field.directions {
        for c in d.unit::<2>() {
            w.write_all(&(c as f32).to_le_bytes())?;
        }
    }
    for c in &field.coeffs {
        w.write_all(&c.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field_binary(r: &mut impl Read, sidecar: &FieldSidecar) -> Result<ThermalTransferField<2>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Format("missing TTF1 magic".into()));
    }
    let mut u = [0u8; 4];
    let mut next_u32 = |r: &mut dyn Read| -> Result<usize> {
        r.read_exact(&mut u)?;
        Ok(u32::from_le_bytes(u) as usize)
    };
    let (w, h, na) = (next_u32(r)?, next_u32(r)?, next_u32(r)?);
    let expected = Direction::all::<2>();
    if na != expected.len() {
        return Err(Error::Format(format!("expected {} directions, file has {na}", expected.len())));
    }
    let mut f = [0u8; 4];
    for d in &expected {
        let mut v = [0.0f32; 2];
        for c in v.iter_mut() {
            r.read_exact(&mut f)?;
            *c = f32::from_le_bytes(f);
        }
        let unit = d.unit::<2>();
        if (v[0] as f64 - unit[0]).abs() > 1e-6 || (v[1] as f64 - unit[1]).abs() > 1e-6 {
            return Err(Error::Format(format!("direction {} stored as {v:?}", d.label())));
        }
    }
    let grid = Grid::with_origin([w, h], sidecar.cell_size, sidecar.origin)?;
    let n = grid.len() * na;
    let mut bytes = vec![0u8; n * 8];
    r.read_exact(&mut bytes)?;
    let coeffs: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    if coeffs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::Format("coefficients must be finite and non-negative".into()));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after coefficients".into()));
    }
    let empty_directions = sidecar
        .empty_directions
        .iter()
        .map(|l| {
            expected
                .iter()
                .copied()
                .find(|d| d.label() == l)
                .ok_or_else(|| Error::Format(format!("unknown direction {l:?} in sidecar")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThermalTransferField {
        grid,
        directions: expected,
        coeffs,
        kappa: sidecar.kappa,
        sigma: sidecar.sigma,
        eta: sidecar.eta,
        squared_kernel: sidecar.squared_kernel,
        empty_directions,
    })
}

pub fn field_sidecar(field: &ThermalTransferField<2>, build: Value) -> FieldSidecar {
    FieldSidecar {
        sigma: field.sigma,
        kappa: field.kappa,
        eta: field.eta,
        squared_kernel: field.squared_kernel,
        cell_size: field.grid.cell_size,
        origin: field.grid.origin,
        empty_directions: field.empty_directions.iter().map(|d| d.label().to_string()).collect(),
        build,
    }
}

/// Write `path` and its `.json` sidecar.
pub fn save_field(path: &Path, field: &ThermalTransferField<2>, build: Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field_binary(&mut w, field)?;
    w.flush()?;
    let sidecar = field_sidecar(field, build);
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<ThermalTransferField<2>> {
    let side = sidecar_path(path);
    let sidecar: FieldSidecar = serde_json::from_reader(BufReader::new(File::open(&side)?))
        .map_err(|e| Error::Format(format!("{}: {e}", side.display())))?;
    read_field_binary(&mut BufReader::new(File::open(path)?), &sidecar)
}

/// Energy grid as CSV, one grid row (constant y) per line.
pub fn write_map_csv(w: &mut impl Write, map: &crate::diffusion::ThermalDiffusionMap<2>) -> Result<()> {
    let [wd, ht] = map.grid.dims;
    for y in 0..ht {
        let row: Vec<String> = (0..wd).map(|x| map.energy([x, y]).to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
