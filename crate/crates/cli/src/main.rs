use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geophase::{mixed_phase_numeric, mixed_phase_two_mode_numeric, track_loop, MixedReport, Params, Partition};
use geophase_cli::config::{Axis, Output, SweepSpec};
use geophase_cli::scenarios::{run_and_write, Scenario, ScenarioOptions, DEFAULT_LIMIT_TOL, DEFAULT_PROXY_FACTOR};
use geophase_cli::sweep::{evaluate_point, fmt_f64, run_sweep, write_csv, ResultRow};
use geophase_cli::{plot, CliError};

#[derive(Parser)]
#[command(
    name = "geophase",
    version,
    about = "Geometric phases of two coupled spins in a mixed classical/quantized environment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energies, angles and concurrence of the block eigenstates.
    Eig(PointArgs),
    /// Phase of a level as the magnetic field turns once about its axis.
    BerryMagnetic(PointArgs),
    /// Phase of a level under the field phase shift exp(-i phi a+a).
    BerryQuantized(PointArgs),
    /// Phase of a level under the two-mode rotation at fixed theta.
    BerryTwomode(PointArgs),
    /// Mixed-state phase of a subsystem.
    MixedPhase {
        #[command(flatten)]
        point: PointArgs,
        /// Keep particle 1 and both field modes under the two-mode rotation
        /// instead of particle 2 under the magnetic loop.
        #[arg(long)]
        two_mode: bool,
    },
    /// Concurrence of the pure eigenstates.
    Concurrence(PointArgs),
    /// Parameter sweep to CSV.
    Sweep(SweepArgs),
    /// Run a named claim scenario, or all of them.
    Scenario(ScenarioArgs),
    /// Line plot of CSV columns as SVG.
    Plot(PlotArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// JSON sweep spec; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    omega1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long = "coupling-j", allow_negative_numbers = true)]
    coupling_j: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega2: Option<f64>,
    #[arg(long)]
    n_photon: Option<u32>,
    #[arg(long)]
    n_prime: Option<u32>,
    #[arg(long)]
    loop_steps: Option<usize>,
    /// Polar angle of the two-mode rotation.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
}

impl ModelArgs {
    fn spec(&self) -> Result<SweepSpec, CliError> {
        let mut spec = match &self.config {
            Some(path) => SweepSpec::load(path)?,
            None => SweepSpec::default(),
        };
        let b = &mut spec.base;
        set(&mut b.omega1, self.omega1);
        set(&mut b.nu, self.nu);
        set(&mut b.lambda, self.lambda);
        set(&mut b.coupling_j, self.coupling_j);
        set(&mut b.omega2, self.omega2);
        set(&mut b.n_photon, self.n_photon);
        set(&mut b.n_prime, self.n_prime);
        set(&mut spec.loop_steps, self.loop_steps);
        set(&mut spec.theta, self.theta);
        Ok(spec)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Args, Clone)]
struct PointArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Level 1..=4 by ascending energy; all levels when omitted.
    #[arg(long)]
    level: Option<usize>,
}

impl PointArgs {
    fn resolve(&self) -> Result<(SweepSpec, Vec<usize>), CliError> {
        let mut spec = self.model.spec()?;
        if let Some(l) = self.level {
            spec.levels = vec![l];
        }
        spec.validate()?;
        let mut levels = spec.levels.clone();
        levels.sort_unstable();
        Ok((spec, levels))
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Swept parameter: omega1, nu, lambda, coupling_j (J), omega2, n_photon (n), n_prime, theta.
    #[arg(long)]
    axis: Option<Axis>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    values: Option<Vec<f64>>,
    /// Evenly spaced values as start:stop:count.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "values")]
    range: Option<String>,
    /// Comma-separated levels.
    #[arg(long, value_delimiter = ',')]
    level: Option<Vec<usize>>,
    /// Comma-separated outputs: berry_magnetic, berry_quantized, berry_twomode, mixed_phase, mixed_twomode, concurrence.
    #[arg(long, value_delimiter = ',')]
    outputs: Option<Vec<Output>>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Scenario name, or `all`.
    #[arg(long, default_value = "all")]
    scenario: String,
    /// Directory for the CSV and report files.
    #[arg(long, default_value = "scenario_out")]
    out: PathBuf,
    /// Limit proxy as a multiple of the largest other scale.
    #[arg(long, default_value_t = DEFAULT_PROXY_FACTOR)]
    proxy_factor: f64,
    /// Tolerance of the limit checks.
    #[arg(long, default_value_t = DEFAULT_LIMIT_TOL)]
    limit_tol: f64,
}

#[derive(Args)]
struct PlotArgs {
    /// Input CSV, as written by `sweep` or `scenario`.
    #[arg(long)]
    csv: PathBuf,
    /// Column for the horizontal axis.
    #[arg(long)]
    x: String,
    /// Comma-separated columns to draw.
    #[arg(long, value_delimiter = ',')]
    y: Vec<String>,
    /// SVG destination.
    #[arg(long)]
    out: PathBuf,
}

fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("range must be start:stop:count, got '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| if i + 1 == count { stop } else { start + step * i as f64 }).collect())
}

/// Resolved spec, parameters and rows for one parameter point.
fn point_rows(args: &PointArgs, outputs: &[Output]) -> Result<(SweepSpec, Params, Vec<ResultRow>), CliError> {
    let (spec, levels) = args.resolve()?;
    let params = spec.base.into();
    let rows = evaluate_point(&params, spec.theta, &levels, spec.loop_steps, outputs);
    Ok((spec, params, rows))
}

fn header(out: &mut impl Write, params: &Params, extra: &str) -> io::Result<()> {
    writeln!(
        out,
        "omega1={} nu={} lambda={} coupling_j={} omega2={} n_photon={} n_prime={}{extra}",
        params.omega1, params.nu, params.lambda, params.coupling_j, params.omega2, params.n_photon, params.n_prime
    )
}

fn print_phase_rows(rows: &[ResultRow], output: Output, out: &mut impl Write) -> Result<(), CliError> {
    let io = |e| CliError::io("stdout", e);
    writeln!(out, "{:>5} {:>24} {:>24} {:>24} {:>9}", "level", "numeric", "analytic", "difference", "converged")
        .map_err(io)?;
    for r in rows {
        match r.phase(output) {
            Some(c) => writeln!(
                out,
                "{:>5} {:>24} {:>24} {:>24} {:>9}",
                r.level,
                fmt_f64(c.numeric),
                fmt_f64(c.analytic),
                fmt_f64(c.difference),
                r.converged.map_or("-".to_string(), |b| b.to_string())
            )
            .map_err(io)?,
            None => writeln!(out, "{:>5} error: {}", r.level, r.error.as_deref().unwrap_or("no value")).map_err(io)?,
        }
    }
    Ok(())
}

fn fail_on_error_rows(rows: &[ResultRow]) -> Result<(), CliError> {
    match rows.iter().find(|r| r.is_error()) {
        Some(r) => Err(CliError::Assertion(format!("level {}: {}", r.level, r.error.as_deref().unwrap_or("")))),
        None => Ok(()),
    }
}

fn print_mixed(report: &MixedReport, level: usize, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "level {level} ({:?})", report.partition)?;
    for (k, (p, b)) in report.eigenvalues.iter().zip(&report.betas).enumerate() {
        writeln!(out, "  p[{k}] = {}  beta[{k}] = {}", fmt_f64(*p), fmt_f64(*b))?;
    }
    writeln!(out, "  gamma numeric = {}", fmt_f64(report.gamma))?;
    if let (Some(a), Some(d)) = (report.analytic, report.difference_mod_2pi) {
        writeln!(out, "  gamma closed form = {}  difference = {}", fmt_f64(a), fmt_f64(d))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let io = |e| CliError::io("stdout", e);
    match cli.command {
        Command::Eig(args) => {
            let (_, params, rows) = point_rows(&args, &[Output::Concurrence])?;
            header(&mut out, &params, "").map_err(io)?;
            if let Some(g) = rows.iter().find_map(|r| r.min_gap) {
                writeln!(out, "min_gap={}", fmt_f64(g)).map_err(io)?;
            }
            writeln!(
                out,
                "{:>5} {:>24} {:>24} {:>24} {:>24} {:>24}",
                "level", "energy", "chi", "xi", "eta", "concurrence"
            )
            .map_err(io)?;
            for r in &rows {
                let cell = |x: Option<f64>| x.map_or("-".to_string(), fmt_f64);
                let a = r.angles.map(|a| a.map(Some)).unwrap_or([None; 3]);
                writeln!(
                    out,
                    "{:>5} {:>24} {:>24} {:>24} {:>24} {:>24}",
                    r.level,
                    cell(r.energy),
                    cell(a[0]),
                    cell(a[1]),
                    cell(a[2]),
                    cell(r.concurrence)
                )
                .map_err(io)?;
            }
            fail_on_error_rows(&rows)
        }
        Command::BerryMagnetic(args) => phase_command(&args, Output::BerryMagnetic, &mut out),
        Command::BerryQuantized(args) => phase_command(&args, Output::BerryQuantized, &mut out),
        Command::BerryTwomode(args) => phase_command(&args, Output::BerryTwomode, &mut out),
        Command::MixedPhase { point, two_mode } => {
            let (spec, levels) = point.resolve()?;
            let params: Params = spec.base.into();
            let extra = if two_mode { format!(" theta={}", spec.theta) } else { String::new() };
            header(&mut out, &params, &extra).map_err(io)?;
            for j in levels {
                let report = if two_mode {
                    mixed_phase_two_mode_numeric(&params, j, spec.theta, spec.loop_steps)?
                } else {
                    mixed_phase_numeric(&track_loop(&params, j, spec.loop_steps)?, Partition::Particle2)?
                };
                print_mixed(&report, j, &mut out).map_err(io)?;
            }
            Ok(())
        }
        Command::Concurrence(args) => {
            let (_, params, rows) = point_rows(&args, &[Output::Concurrence])?;
            header(&mut out, &params, "").map_err(io)?;
            for r in &rows {
                match r.concurrence {
                    Some(c) => writeln!(out, "level {} concurrence {}", r.level, fmt_f64(c)).map_err(io)?,
                    None => {
                        writeln!(out, "level {} error: {}", r.level, r.error.as_deref().unwrap_or("")).map_err(io)?
                    }
                }
            }
            fail_on_error_rows(&rows)
        }
        Command::Sweep(args) => {
            let mut spec = args.model.spec()?;
            set(&mut spec.axis, args.axis);
            set(&mut spec.values, args.values);
            if let Some(r) = &args.range {
                spec.values = parse_range(r)?;
            }
            set(&mut spec.levels, args.level);
            set(&mut spec.outputs, args.outputs);
            if spec.values.is_empty() {
                return Err(CliError::Usage("no sweep values; give --values, --range or a config with values".into()));
            }
            if args.workers == Some(0) {
                return Err(CliError::Usage("--workers must be at least 1".into()));
            }
            let rows = run_sweep(&spec, args.workers)?;
            match &args.out {
                Some(path) => {
                    let file = File::create(path).map_err(|e| CliError::io(format!("create {}", path.display()), e))?;
                    write_csv(&rows, &spec.outputs, BufWriter::new(file))?;
                    let errors = rows.iter().filter(|r| r.is_error()).count();
                    writeln!(out, "wrote {} rows to {} ({errors} error rows)", rows.len(), path.display())
                        .map_err(io)?;
                }
                None => write_csv(&rows, &spec.outputs, &mut out)?,
            }
            Ok(())
        }
        Command::Scenario(args) => {
            let base_spec = args.model.spec()?;
            let scenarios: Vec<Scenario> = if args.scenario.eq_ignore_ascii_case("all") {
                Scenario::ALL.to_vec()
            } else {
                vec![args.scenario.parse().map_err(CliError::Usage)?]
            };
            let opts = ScenarioOptions {
                base: base_spec.base.into(),
                loop_steps: args.model.loop_steps,
                proxy_factor: args.proxy_factor,
                limit_tol: args.limit_tol,
            };
            let outcomes = run_and_write(&scenarios, &opts, &args.out)?;
            let mut failed = Vec::new();
            for o in &outcomes {
                write!(out, "{}", o.report()).map_err(io)?;
                writeln!(out).map_err(io)?;
                if !o.passed() {
                    failed.push(o.scenario.name());
                }
            }
            writeln!(out, "files written to {}", args.out.display()).map_err(io)?;
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Assertion(format!("scenario(s) failed: {}", failed.join(", "))))
            }
        }
        Command::Plot(args) => {
            let file = File::open(&args.csv).map_err(|e| CliError::io(format!("open {}", args.csv.display()), e))?;
            let series = plot::collect_series(file, &args.x, &args.y)?;
            let svg = plot::render_svg(&series, &args.x);
            std::fs::write(&args.out, svg).map_err(|e| CliError::io(format!("write {}", args.out.display()), e))?;
            writeln!(out, "wrote {} polylines to {}", series.len(), args.out.display()).map_err(io)?;
            Ok(())
        }
    }
}

fn phase_command(args: &PointArgs, output: Output, out: &mut impl Write) -> Result<(), CliError> {
    let (spec, params, rows) = point_rows(args, &[output])?;
    let extra = match output {
        Output::BerryTwomode => format!(" theta={} loop_steps={}", spec.theta, spec.loop_steps),
        _ => format!(" loop_steps={}", spec.loop_steps),
    };
    header(out, &params, &extra).map_err(|e| CliError::io("stdout", e))?;
    print_phase_rows(&rows, output, out)?;
    fail_on_error_rows(&rows)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
