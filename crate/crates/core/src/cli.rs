//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on invalid input, 2 on numerical failure.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classify::{classify_triple, Classification, DEFAULT_TIE_THRESHOLD};
use crate::density::{validate_density, DensityProfile};
use crate::error::{Error, Result};
use crate::nested::{build_triple, is_borderline_2313, Triple, TypeLabel};
use crate::oracle::{admissible_orderings, global_bruteforce, ten_orderings, DEFAULT_GRID};
use crate::standard::{solve_standard, DEFAULT_TOL};
use crate::sweep::{render_dir, sweep_frame, write_frames, AxisSpec};
use crate::transform::{PositionalDensity, VolumeTransform};

/// Volume triples of the reference perimeter table.
pub const TABLE_TRIPLES: [(f64, f64, f64); 4] =
    [(5.0, 100.0, 500.0), (5.0, 40.0, 2000.0), (0.01, 100.0, 1500.0), (2.0, 80.0, 2500.0)];

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "triple-bubbles", version, about = "Perimeter-minimizing triple bubbles on the line with log-convex density")]
pub struct Cli {
    /// Output mode.
    #[arg(long, value_enum, global = true, default_value = "human")]
    pub format: OutputFormat,

    /// Maximum worker threads for sweep and oracle (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Human,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderingSet {
    All,
    Four,
}

#[derive(Debug, Args)]
pub struct Numerics {
    /// Relative bisection tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a standard n-bubble.
    Solve {
        /// f1, f2 or fam:<c>
        #[arg(long)]
        density: String,
        /// Comma-separated volumes, left to right
        #[arg(long)]
        volumes: String,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Build one of the four triple types.
    Build {
        /// f1, f2 or fam:<c>
        #[arg(long)]
        density: String,
        /// Comma-separated volumes, e.g. 5,100,500
        #[arg(long)]
        volumes: String,
        /// 213, 3123, 2313 or 32123
        #[arg(long = "type")]
        kind: String,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Classify the perimeter-minimizing type.
    Classify {
        /// f1, f2 or fam:<c>
        #[arg(long)]
        density: String,
        /// Comma-separated volumes, e.g. 5,100,500
        #[arg(long)]
        volumes: String,
        #[arg(long, default_value_t = DEFAULT_TIE_THRESHOLD)]
        tie: f64,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Print the reference perimeter table.
    Table {
        /// f1, f2 or fam:<c>
        #[arg(long)]
        density: String,
        #[arg(long, default_value_t = DEFAULT_TIE_THRESHOLD)]
        tie: f64,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Brute-force minimization over orderings.
    Oracle {
        /// f1, f2 or fam:<c>
        #[arg(long)]
        density: String,
        /// Comma-separated volumes, e.g. 5,100,500
        #[arg(long)]
        volumes: String,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long, value_enum, default_value = "all")]
        orderings: OrderingSet,
    },
    /// Sweep a volume grid and write frame_<k>.csv files.
    Sweep {
        /// f1, f2 or fam:<c>
        #[arg(long)]
        density: String,
        /// Axis as lin|log:min:max:count; one frame per V1 value
        #[arg(long, default_value = "log:0.01:6:40")]
        v1: String,
        #[arg(long, default_value = "lin:0.01:120:400")]
        v2: String,
        #[arg(long, default_value = "lin:0.01:3000:400")]
        v3: String,
        #[arg(long, default_value_t = DEFAULT_TIE_THRESHOLD)]
        tie: f64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Render frame_<k>.csv files to frame_<k>.ppm.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Transform a named positional density to volume coordinates.
    Transform {
        /// constant, exp-abs or borell
        #[arg(long)]
        expr: String,
        /// Absolute tolerance of the volume integral
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Volume coordinates at which to report f and f'
        #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
        probe: Vec<f64>,
    },
    /// Check the structural assumptions on a density.
    ValidateDensity {
        /// f1, f2 or fam:<c>
        #[arg(long)]
        density: String,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
}

/// Parses and runs one invocation, returning the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_INVALID
                }
            };
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                EXIT_INVALID
            } else {
                EXIT_NUMERIC
            }
        }
    }
}

/// Runs a parsed invocation inside a thread pool sized by `--threads`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
    let mut buf = Vec::new();
    pool.install(|| dispatch(cli, &mut buf))?;
    out.write_all(&buf)?;
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>) -> Result<()> {
    let csv = cli.format == OutputFormat::Csv;
    match &cli.command {
        Command::Solve { density, volumes, numerics } => {
            let d = DensityProfile::by_name(density)?;
            let volumes = parse_volumes(volumes)?;
            let b = solve_standard(&d, &volumes, numerics.tol)?;
            if csv {
                writeln!(out, "index,boundary_point")?;
                for (i, w) in b.boundary_points.iter().enumerate() {
                    writeln!(out, "{i},{w:.10}")?;
                }
                writeln!(out, "# residual={:e}", b.residual)?;
                writeln!(out, "# perimeter={:.7}", b.perimeter)?;
            } else {
                writeln!(out, "boundary points: {}", join_points(&b.boundary_points))?;
                writeln!(out, "residual: {:e}", b.residual)?;
                writeln!(out, "perimeter: {:.7}", b.perimeter)?;
            }
        }
        Command::Build { density, volumes, kind, numerics } => {
            let d = DensityProfile::by_name(density)?;
            let t = parse_triple(volumes)?;
            let kind = TypeLabel::parse_triple(kind)?;
            match build_triple(&d, kind, t, numerics.tol)? {
                None => writeln!(out, "{kind}: Not exist")?,
                Some(b) if csv => {
                    writeln!(out, "index,boundary_point,component")?;
                    for (i, w) in b.boundary_points.iter().enumerate() {
                        let component = b.assignment.get(i).map(ToString::to_string).unwrap_or_default();
                        writeln!(out, "{i},{w:.10},{component}")?;
                    }
                    writeln!(out, "# perimeter={:.7}", b.perimeter)?;
                }
                Some(b) => {
                    writeln!(out, "type: {kind}")?;
                    writeln!(out, "boundary points: {}", join_points(&b.boundary_points))?;
                    writeln!(out, "assignment: {}", b.assignment_string())?;
                    writeln!(out, "perimeter: {:.7}", b.perimeter)?;
                }
            }
        }
        Command::Classify { density, volumes, tie, numerics } => {
            let d = DensityProfile::by_name(density)?;
            let t = parse_triple(volumes)?;
            let c = classify_triple(&d, t, numerics.tol, *tie)?;
            if csv {
                writeln!(out, "v1,v2,v3,p213,p3123,p2313,p32123,winner,margin,decisive")?;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    t.v1(),
                    t.v2(),
                    t.v3(),
                    perimeter_cells(&c).join(","),
                    c.winner,
                    c.margin,
                    c.decisive
                )?;
            } else {
                for label in TypeLabel::TRIPLES {
                    writeln!(out, "{:<8}{}", label.as_str(), format_perimeter(c.perimeter(label)))?;
                }
                writeln!(out, "winner  {}", c.winner)?;
                writeln!(out, "margin  {:.7}", c.margin)?;
                writeln!(out, "decisive {}", c.decisive)?;
                if is_borderline_2313(&d, t) {
                    writeln!(out, "note: 2313 existence test is borderline")?;
                }
            }
        }
        Command::Table { density, tie, numerics } => {
            let d = DensityProfile::by_name(density)?;
            let rows = TABLE_TRIPLES
                .iter()
                .map(|&(a, b, c)| {
                    let t = Triple::new(a, b, c)?;
                    Ok((t, classify_triple(&d, t, numerics.tol, *tie)?))
                })
                .collect::<Result<Vec<_>>>()?;
            write_table(out, &rows, csv)?;
        }
        Command::Oracle { density, volumes, grid, orderings } => {
            let d = DensityProfile::by_name(density)?;
            let t = parse_triple(volumes)?;
            let set = match orderings {
                OrderingSet::All => ten_orderings(),
                OrderingSet::Four => admissible_orderings().into_iter().map(|(_, o)| o).collect(),
            };
            let bf = global_bruteforce(&d, &t.as_array(), *grid, &set)?;
            if csv {
                writeln!(out, "ordering,shape,perimeter")?;
            }
            for (o, m) in &bf.results {
                let shape = o.shape().map(|s| s.to_string()).unwrap_or_else(|| "-".into());
                if csv {
                    writeln!(out, "\"{o}\",{shape},{:.7}", m.perimeter)?;
                } else {
                    writeln!(out, "{:<22}{:<7}{:.7}", o.to_string(), shape, m.perimeter)?;
                }
            }
            let shape = bf.winning_ordering().shape().map(|s| s.to_string()).unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "{}winner {} ({shape}) perimeter {:.7}",
                if csv { "# " } else { "" },
                bf.winning_ordering(),
                bf.perimeter()
            )?;
        }
        Command::Sweep { density, v1, v2, v3, tie, out: dir, numerics } => {
            let d = DensityProfile::by_name(density)?;
            let (v1, v2, v3): (AxisSpec, AxisSpec, AxisSpec) = (v1.parse()?, v2.parse()?, v3.parse()?);
            let mut frames = Vec::with_capacity(v1.count);
            for value in v1.values() {
                frames.push(sweep_frame(&d, value, &v2, &v3, *tie, numerics.tol)?);
            }
            let paths = write_frames(&frames, dir)?;
            writeln!(out, "wrote {} frames to {}", paths.len(), dir.display())?;
        }
        Command::Render { input, out: dir } => {
            let paths = render_dir(input, dir)?;
            writeln!(out, "rendered {} frames to {}", paths.len(), dir.display())?;
        }
        Command::Transform { expr, tol, probe } => {
            let transform = VolumeTransform::new(PositionalDensity::by_name(expr)?, *tol)?;
            writeln!(out, "{}", if csv { "V,x,f,df" } else { "V x f(V) f'(V)" })?;
            let sep = if csv { "," } else { " " };
            for &v in probe {
                let x = transform.position_of(v)?;
                let f = transform.value_at(v)?;
                let df = transform.derivative_at(v)?;
                writeln!(out, "{v}{sep}{x:.12}{sep}{f:.12}{sep}{df:.12}")?;
            }
        }
        Command::ValidateDensity { density, samples } => {
            let d = DensityProfile::by_name(density)?;
            let report = validate_density(&d, *samples)?;
            for (name, ok) in report.checks() {
                if csv {
                    writeln!(out, "{name},{}", if ok { "pass" } else { "fail" })?;
                } else {
                    writeln!(out, "{name:<24}{}", if ok { "pass" } else { "FAIL" })?;
                }
            }
        }
    }
    Ok(())
}

fn join_points(points: &[f64]) -> String {
    points.iter().map(|w| format!("{w:.10}")).collect::<Vec<_>>().join(", ")
}

fn format_perimeter(p: Option<f64>) -> String {
    p.map(|p| format!("{p:.7}")).unwrap_or_else(|| "Not exist".into())
}

fn perimeter_cells(c: &Classification) -> Vec<String> {
    TypeLabel::TRIPLES.iter().map(|&l| format_perimeter(c.perimeter(l))).collect()
}

fn write_table(out: &mut Vec<u8>, rows: &[(Triple, Classification)], csv: bool) -> Result<()> {
    if csv {
        writeln!(out, "v1,v2,v3,213,3123,2313,32123,winner")?;
        for (t, c) in rows {
            writeln!(out, "{},{},{},{},{}", t.v1(), t.v2(), t.v3(), perimeter_cells(c).join(","), c.winner)?;
        }
        return Ok(());
    }
    writeln!(
        out,
        "{:<20}{:>15}{:>15}{:>15}{:>15}",
        "(V1,V2,V3)", "Type 213", "Type 3123", "Type 2313", "Type 32123"
    )?;
    for (t, c) in rows {
        let cells: Vec<String> = TypeLabel::TRIPLES
            .iter()
            .map(|&l| {
                let marker = if l == c.winner { "*" } else { "" };
                format!("{marker}{}", format_perimeter(c.perimeter(l)))
            })
            .collect();
        writeln!(out, "{:<20}{:>15}{:>15}{:>15}{:>15}", t.to_string(), cells[0], cells[1], cells[2], cells[3])?;
    }
    writeln!(out, "* marks the perimeter-minimizing type")?;
    Ok(())
}

/// Parses comma-separated positive decimals.
pub fn parse_volumes(s: &str) -> Result<Vec<f64>> {
    let volumes = s
        .split(',')
        .map(|v| {
            let v = v.trim();
            let x: f64 = v
                .parse()
                .map_err(|_| Error::InvalidVolumes(format!("cannot parse volume `{v}`")))?;
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::InvalidVolumes(format!("volumes must be positive, got {v}")));
            }
            Ok(x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(volumes)
}

fn parse_triple(s: &str) -> Result<Triple> {
    let v = parse_volumes(s)?;
    let [a, b, c] = v[..] else {
        return Err(Error::InvalidVolumes(format!("expected three volumes, got {}", v.len())));
    };
    Triple::new(a, b, c)
}
