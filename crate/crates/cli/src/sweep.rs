//! Row evaluation and deterministic CSV output.

use std::io::Write;

use geophase::eigen::{eigenframes, min_adjacent_gap};
use geophase::{
    berry_magnetic_from_trace, berry_quantized_numeric, concurrence_pure, mixed_phase_numeric,
    mixed_phase_two_mode_numeric, track_all_levels, two_mode_berry_numeric, Frame, Params, Partition, Report, Trace,
};
use rayon::prelude::*;

use crate::config::{Output, SweepSpec};
use crate::error::CliError;

/// Numeric value, closed form and `wrap(analytic − numeric)` of one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCells {
    pub numeric: f64,
    pub analytic: f64,
    pub difference: f64,
}

impl From<Report> for PhaseCells {
    fn from(r: Report) -> Self {
        Self { numeric: r.numeric_phase, analytic: r.analytic_phase, difference: r.difference_mod_2pi }
    }
}

/// One (parameter point, level) result.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub params: Params,
    pub theta: f64,
    pub level: usize,
    pub energy: Option<f64>,
    pub angles: Option<[f64; 3]>,
    /// Indexed like [`Output::ALL`].
    pub phases: [Option<PhaseCells>; 6],
    pub concurrence: Option<f64>,
    pub min_gap: Option<f64>,
    pub converged: Option<bool>,
    pub error: Option<String>,
}

impl ResultRow {
    fn empty(params: Params, theta: f64, level: usize) -> Self {
        Self {
            params,
            theta,
            level,
            energy: None,
            angles: None,
            phases: [None; 6],
            concurrence: None,
            min_gap: None,
            converged: None,
            error: None,
        }
    }

    fn failed(params: Params, theta: f64, level: usize, min_gap: Option<f64>, err: &geophase::Error) -> Self {
        Self { min_gap, error: Some(format!("{}: {err}", err.tag())), ..Self::empty(params, theta, level) }
    }

    pub fn phase(&self, output: Output) -> Option<PhaseCells> {
        self.phases[output_index(output)]
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

fn output_index(output: Output) -> usize {
    Output::ALL.iter().position(|o| *o == output).unwrap()
}

/// Canonical, deduplicated output order.
pub fn normalized_outputs(outputs: &[Output]) -> Vec<Output> {
    Output::ALL.into_iter().filter(|o| outputs.contains(o)).collect()
}

/// Evaluates every requested level at one parameter point.
pub fn evaluate_point(
    params: &Params,
    theta: f64,
    levels: &[usize],
    steps: usize,
    outputs: &[Output],
) -> Vec<ResultRow> {
    let frames = params.validate().and_then(|_| eigenframes(params, 0.0));
    let frames = match frames {
        Ok(f) => f,
        Err(e) => return levels.iter().map(|&j| ResultRow::failed(*params, theta, j, None, &e)).collect(),
    };
    let energies: Vec<f64> = frames.iter().map(|f| f.energy).collect();
    let min_gap = min_adjacent_gap(&energies);

    let needs_trace = outputs.iter().any(|o| matches!(o, Output::BerryMagnetic | Output::MixedPhase));
    let traces = needs_trace.then(|| track_all_levels(params, steps));

    levels
        .iter()
        .map(|&j| {
            let trace = traces.as_ref().map(|t| t.as_ref().map(|t| &t[j - 1]));
            match evaluate_level(params, theta, &frames[j - 1], trace, steps, outputs) {
                Ok(mut row) => {
                    row.min_gap = Some(min_gap);
                    row
                }
                Err(e) => ResultRow::failed(*params, theta, j, Some(min_gap), &e),
            }
        })
        .collect()
}

fn evaluate_level(
    params: &Params,
    theta: f64,
    frame: &Frame,
    trace: Option<Result<&Trace, &geophase::Error>>,
    steps: usize,
    outputs: &[Output],
) -> geophase::Result<ResultRow> {
    let j = frame.label_j;
    let mut row = ResultRow::empty(*params, theta, j);
    row.energy = Some(frame.energy);
    row.angles = frame.angles.map(|a| [a.chi, a.xi, a.eta]);
    let trace = || trace.expect("trace computed for loop outputs").map_err(Clone::clone);
    let mut converged = None::<bool>;
    let mut note = |r: &Report| converged = Some(converged.unwrap_or(true) && r.converged);

    for &out in outputs {
        let cells = match out {
            Output::BerryMagnetic => {
                let r = berry_magnetic_from_trace(trace()?)?;
                note(&r);
                Some(r.into())
            }
            Output::BerryQuantized => {
                let r = berry_quantized_numeric(params, j, steps)?;
                note(&r);
                Some(r.into())
            }
            Output::BerryTwomode => {
                let r = two_mode_berry_numeric(params, j, theta, steps)?;
                note(&r);
                Some(r.into())
            }
            Output::MixedPhase => {
                let r = mixed_phase_numeric(trace()?, Partition::Particle2)?;
                let analytic = r.analytic.unwrap_or(f64::NAN);
                Some(PhaseCells { numeric: r.gamma, analytic, difference: r.difference_mod_2pi.unwrap_or(f64::NAN) })
            }
            Output::MixedTwomode => {
                let r = mixed_phase_two_mode_numeric(params, j, theta, steps)?;
                let analytic = r.analytic.unwrap_or(f64::NAN);
                Some(PhaseCells { numeric: r.gamma, analytic, difference: r.difference_mod_2pi.unwrap_or(f64::NAN) })
            }
            Output::Concurrence => {
                row.concurrence = Some(concurrence_pure(frame));
                None
            }
        };
        if cells.is_some() {
            row.phases[output_index(out)] = cells;
        }
    }
    row.converged = converged;
    Ok(row)
}

/// Runs a validated sweep; rows come out in axis order, then level order,
/// whatever the worker count.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<Vec<ResultRow>, CliError> {
    spec.validate()?;
    let outputs = normalized_outputs(&spec.outputs);
    let mut levels = spec.levels.clone();
    levels.sort_unstable();
    let eval = || -> Vec<ResultRow> {
        spec.values
            .par_iter()
            .map(|&v| {
                let (params, theta) = spec.point(v);
                evaluate_point(&params, theta, &levels, spec.loop_steps, &outputs)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(eval))
        }
        None => Ok(eval()),
    }
}

/// Fixed float formatting: 17 significant digits, `.` decimal point.
pub fn fmt_f64(x: f64) -> String {
    // Collapse −0 so that sign noise cannot change the bytes.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Header for the given outputs, in the order the cells are written.
pub fn columns(outputs: &[Output]) -> Vec<String> {
    let mut cols: Vec<String> =
        ["omega1", "nu", "lambda", "coupling_j", "omega2", "n_photon", "n_prime", "theta", "level"]
            .into_iter()
            .chain(["energy", "chi", "xi", "eta"])
            .map(String::from)
            .collect();
    for o in normalized_outputs(outputs) {
        match o.phase_prefix() {
            Some(p) => cols.extend(["numeric", "analytic", "difference"].map(|s| format!("{p}_{s}"))),
            None => cols.push(o.name().to_string()),
        }
    }
    cols.extend(["min_gap", "converged", "error"].map(String::from));
    cols
}

fn cells(row: &ResultRow, outputs: &[Output]) -> Vec<String> {
    let p = &row.params;
    let mut out = vec![
        fmt_f64(p.omega1),
        fmt_f64(p.nu),
        fmt_f64(p.lambda),
        fmt_f64(p.coupling_j),
        fmt_f64(p.omega2),
        p.n_photon.to_string(),
        p.n_prime.to_string(),
        fmt_f64(row.theta),
        row.level.to_string(),
        opt(row.energy),
    ];
    out.extend((0..3).map(|i| opt(row.angles.map(|a| a[i]))));
    for o in normalized_outputs(outputs) {
        if o.phase_prefix().is_some() {
            let c = row.phase(o);
            out.push(opt(c.map(|c| c.numeric)));
            out.push(opt(c.map(|c| c.analytic)));
            out.push(opt(c.map(|c| c.difference)));
        } else {
            out.push(opt(row.concurrence));
        }
    }
    out.push(opt(row.min_gap));
    out.push(row.converged.map(|c| c.to_string()).unwrap_or_default());
    out.push(row.error.clone().unwrap_or_default());
    out
}

/// Writes header plus one line per row, `\n`-terminated.
pub fn write_csv<W: Write>(rows: &[ResultRow], outputs: &[Output], sink: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(columns(outputs))?;
    for row in rows {
        w.write_record(cells(row, outputs))?;
    }
    w.flush().map_err(|e| CliError::io("csv", e))?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow], outputs: &[Output]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_csv(rows, outputs, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ascii"))
}
