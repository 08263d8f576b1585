//! Phase-diagram sweeps over prescribed volumes.
//!
//! One [`SweepFrame`] per `V1` sample holds a `V2 x V3` grid of
//! classifications. Frames are persisted as CSV and rendered to binary PPM
//! as a separate step.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::classify::{classify_triple, Classification};
use crate::density::DensityProfile;
use crate::error::{Error, Result};
use crate::nested::{Triple, TypeLabel};

/// Spacing of an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisScale {
    Linear,
    Log,
}

/// `{lin|log}:<min>:<max>:<count>`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub scale: AxisScale,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(scale: AxisScale, min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min > 0.0 && max.is_finite() && min <= max) {
            return Err(Error::InvalidArgument(format!(
                "axis bounds must satisfy 0 < min <= max, got {min}..{max}"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidArgument(format!("axis needs at least 2 samples, got {count}")));
        }
        Ok(AxisSpec { scale, min, max, count })
    }

    pub fn linear(min: f64, max: f64, count: usize) -> Result<Self> {
        Self::new(AxisScale::Linear, min, max, count)
    }

    pub fn log(min: f64, max: f64, count: usize) -> Result<Self> {
        Self::new(AxisScale::Log, min, max, count)
    }

    /// The `i`-th sample; endpoints are exact.
    pub fn value(&self, i: usize) -> f64 {
        if i == 0 {
            return self.min;
        }
        if i + 1 == self.count {
            return self.max;
        }
        let t = i as f64 / (self.count - 1) as f64;
        match self.scale {
            AxisScale::Linear => self.min + t * (self.max - self.min),
            AxisScale::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

impl fmt::Display for AxisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scale = match self.scale {
            AxisScale::Linear => "lin",
            AxisScale::Log => "log",
        };
        write!(f, "{scale}:{}:{}:{}", self.min, self.max, self.count)
    }
}

impl FromStr for AxisSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("axis spec `{s}` is not {{lin|log}}:<min>:<max>:<count>"));
        let fields: Vec<&str> = s.split(':').collect();
        let [scale, min, max, count] = fields[..] else {
            return Err(bad());
        };
        let scale = match scale {
            "lin" => AxisScale::Linear,
            "log" => AxisScale::Log,
            _ => return Err(bad()),
        };
        let min: f64 = min.parse().map_err(|_| bad())?;
        let max: f64 = max.parse().map_err(|_| bad())?;
        let count: usize = count.parse().map_err(|_| bad())?;
        AxisSpec::new(scale, min, max, count)
    }
}

/// Why a cell carries no winner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlankReason {
    OrderingViolated,
    TieStripe,
    SolverFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Winner(TypeLabel),
    Blank(BlankReason),
}

/// One grid point of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub v2: f64,
    pub v3: f64,
    pub outcome: CellOutcome,
    pub margin: Option<f64>,
    /// Perimeters of 213, 3123, 2313, 32123 (`None` when absent or not computed).
    pub perimeters: [Option<f64>; 4],
}

impl Cell {
    pub fn winner(&self) -> Option<TypeLabel> {
        match self.outcome {
            CellOutcome::Winner(t) => Some(t),
            CellOutcome::Blank(_) => None,
        }
    }

    pub fn blank_reason(&self) -> Option<BlankReason> {
        match self.outcome {
            CellOutcome::Blank(r) => Some(r),
            CellOutcome::Winner(_) => None,
        }
    }

    fn from_classification(v2: f64, v3: f64, c: &Classification, tie_threshold: f64) -> Cell {
        let perimeters = TypeLabel::TRIPLES.map(|t| c.perimeter(t));
        let outcome = if c.margin > tie_threshold {
            CellOutcome::Winner(c.winner)
        } else {
            CellOutcome::Blank(BlankReason::TieStripe)
        };
        Cell { v2, v3, outcome, margin: Some(c.margin), perimeters }
    }
}

/// All cells at one value of `V1`, rows indexed by `V2`, columns by `V3`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFrame {
    pub density: String,
    pub v1: f64,
    pub v2_axis: AxisSpec,
    pub v3_axis: AxisSpec,
    pub tie_threshold: f64,
    /// Row-major: `cells[i * v3_axis.count + j]` is at `(v2[i], v3[j])`.
    pub cells: Vec<Cell>,
}

impl SweepFrame {
    pub fn cell(&self, v2_index: usize, v3_index: usize) -> &Cell {
        &self.cells[v2_index * self.v3_axis.count + v3_index]
    }

    pub fn count_winner(&self, label: TypeLabel) -> usize {
        self.cells.iter().filter(|c| c.winner() == Some(label)).count()
    }

    /// Writes the frame as CSV with `#` metadata lines.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "# density={}", self.density)?;
        writeln!(out, "# v1={}", self.v1)?;
        writeln!(out, "# v2_axis={}", self.v2_axis)?;
        writeln!(out, "# v3_axis={}", self.v3_axis)?;
        writeln!(out, "# tie={}", self.tie_threshold)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["v1", "v2", "v3", "winner", "margin", "p213", "p3123", "p2313", "p32123"])?;
        for cell in &self.cells {
            let winner = cell.winner().map(|t| t.to_string()).unwrap_or_default();
            let margin = cell.margin.map(format_margin).unwrap_or_default();
            let mut record = vec![
                self.v1.to_string(),
                cell.v2.to_string(),
                cell.v3.to_string(),
                winner,
                margin,
            ];
            record.extend(cell.perimeters.iter().map(|p| p.map(|p| format!("{p:.7}")).unwrap_or_default()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses a frame written by [`SweepFrame::write_csv`].
    pub fn read_csv<R: BufRead>(input: R) -> Result<SweepFrame> {
        let mut meta = std::collections::HashMap::new();
        let mut body = String::new();
        for line in input.lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.to_string(), v.to_string());
                }
            } else {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let get = |k: &str| meta.get(k).ok_or_else(|| Error::Frame(format!("missing `# {k}=` line")));
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| Error::Frame(format!("bad number in `{k}`")))
        };
        let density = get("density")?.clone();
        let v1 = num("v1")?;
        let tie_threshold = num("tie")?;
        let v2_axis: AxisSpec = get("v2_axis")?.parse()?;
        let v3_axis: AxisSpec = get("v3_axis")?.parse()?;

        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let mut cells = Vec::with_capacity(v2_axis.count * v3_axis.count);
        for record in reader.records() {
            let record = record?;
            if record.len() != 9 {
                return Err(Error::Frame(format!("expected 9 fields, got {}", record.len())));
            }
            let field = |i: usize| -> Result<Option<f64>> {
                let s = &record[i];
                if s.is_empty() {
                    return Ok(None);
                }
                s.parse().map(Some).map_err(|_| Error::Frame(format!("bad number `{s}`")))
            };
            let v2 = field(1)?.ok_or_else(|| Error::Frame("missing v2".into()))?;
            let v3 = field(2)?.ok_or_else(|| Error::Frame("missing v3".into()))?;
            let margin = field(4)?;
            let perimeters = [field(5)?, field(6)?, field(7)?, field(8)?];
            let outcome = match &record[3] {
                "" if !(v1 <= v2 && v2 <= v3) => CellOutcome::Blank(BlankReason::OrderingViolated),
                "" if margin.is_some() => CellOutcome::Blank(BlankReason::TieStripe),
                "" => CellOutcome::Blank(BlankReason::SolverFailure),
                s => CellOutcome::Winner(
                    TypeLabel::parse_triple(s).map_err(|_| Error::Frame(format!("unknown winner `{s}`")))?,
                ),
            };
            cells.push(Cell { v2, v3, outcome, margin, perimeters });
        }
        if cells.len() != v2_axis.count * v3_axis.count {
            return Err(Error::Frame(format!(
                "expected {} cells, found {}",
                v2_axis.count * v3_axis.count,
                cells.len()
            )));
        }
        Ok(SweepFrame { density, v1, v2_axis, v3_axis, tie_threshold, cells })
    }
}

fn format_margin(m: f64) -> String {
    if m.is_infinite() {
        "inf".into()
    } else {
        format!("{m:.6e}")
    }
}

/// Classifies every cell of one frame.
pub fn sweep_frame(
    d: &DensityProfile,
    v1: f64,
    v2_axis: &AxisSpec,
    v3_axis: &AxisSpec,
    tie_threshold: f64,
    tol: f64,
) -> Result<SweepFrame> {
    if !(tie_threshold >= 0.0) {
        return Err(Error::InvalidArgument(format!("tie threshold must be non-negative, got {tie_threshold}")));
    }
    d.require_solver_admissible()?;
    let v3_values = v3_axis.values();
    let rows: Vec<Vec<Cell>> = v2_axis
        .values()
        .into_par_iter()
        .map(|v2| {
            v3_values
                .iter()
                .map(|&v3| classify_cell(d, v1, v2, v3, tie_threshold, tol))
                .collect()
        })
        .collect();
    Ok(SweepFrame {
        density: d.name().to_string(),
        v1,
        v2_axis: *v2_axis,
        v3_axis: *v3_axis,
        tie_threshold,
        cells: rows.into_iter().flatten().collect(),
    })
}

fn classify_cell(d: &DensityProfile, v1: f64, v2: f64, v3: f64, tie: f64, tol: f64) -> Cell {
    let blank = |reason| Cell {
        v2,
        v3,
        outcome: CellOutcome::Blank(reason),
        margin: None,
        perimeters: [None; 4],
    };
    let Ok(t) = Triple::new(v1, v2, v3) else {
        return blank(BlankReason::OrderingViolated);
    };
    match classify_triple(d, t, tol, tie) {
        Ok(c) => Cell::from_classification(v2, v3, &c, tie),
        Err(_) => blank(BlankReason::SolverFailure),
    }
}

/// One frame per `V1` sample.
pub fn sweep(
    d: &DensityProfile,
    v1_axis: &AxisSpec,
    v2_axis: &AxisSpec,
    v3_axis: &AxisSpec,
    tie_threshold: f64,
    tol: f64,
) -> Result<Vec<SweepFrame>> {
    v1_axis
        .values()
        .into_iter()
        .map(|v1| sweep_frame(d, v1, v2_axis, v3_axis, tie_threshold, tol))
        .collect()
}

/// File name of the `k`-th frame.
pub fn frame_file_name(k: usize, extension: &str) -> String {
    format!("frame_{k}.{extension}")
}

/// Writes `frame_<k>.csv` for each frame into `dir`.
pub fn write_frames(frames: &[SweepFrame], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    frames
        .iter()
        .enumerate()
        .map(|(k, frame)| {
            let path = dir.join(frame_file_name(k, "csv"));
            let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
            frame.write_csv(file)?;
            Ok(path)
        })
        .collect()
}

/// RGB colour of a type in rendered frames.
pub fn palette(label: Option<TypeLabel>) -> [u8; 3] {
    match label {
        Some(TypeLabel::T213) => [128, 0, 128],
        Some(TypeLabel::T3123) => [0, 0, 255],
        Some(TypeLabel::T2313) => [0, 128, 128],
        Some(TypeLabel::T32123) => [255, 200, 0],
        _ => [255, 255, 255],
    }
}

/// An 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pixmap {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Pixmap {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    /// Binary PPM (`P6`) encoding.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

/// One pixel per cell; `V3` grows to the right, `V2` grows upward.
pub fn render_frame(frame: &SweepFrame) -> Pixmap {
    let (width, height) = (frame.v3_axis.count, frame.v2_axis.count);
    let mut rgb = Vec::with_capacity(3 * width * height);
    for y in 0..height {
        let row = height - 1 - y;
        for x in 0..width {
            rgb.extend_from_slice(&palette(frame.cell(row, x).winner()));
        }
    }
    Pixmap { width, height, rgb }
}

/// Renders every `frame_<k>.csv` in `input` to `frame_<k>.ppm` in `output`.
pub fn render_dir(input: &Path, output: &Path) -> Result<Vec<PathBuf>> {
    let mut frames: Vec<(usize, PathBuf)> = std::fs::read_dir(input)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter_map(|path| {
            let name = path.file_name()?.to_str()?;
            let k = name.strip_prefix("frame_")?.strip_suffix(".csv")?.parse().ok()?;
            Some((k, path))
        })
        .collect();
    if frames.is_empty() {
        return Err(Error::Frame(format!("no frame_<k>.csv files in {}", input.display())));
    }
    frames.sort();
    std::fs::create_dir_all(output)?;
    frames
        .into_iter()
        .map(|(k, path)| {
            let file = std::io::BufReader::new(std::fs::File::open(&path)?);
            let frame = SweepFrame::read_csv(file)?;
            let target = output.join(frame_file_name(k, "ppm"));
            std::fs::write(&target, render_frame(&frame).to_ppm())?;
            Ok(target)
        })
        .collect()
}
