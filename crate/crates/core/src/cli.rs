//! Command-line front end. All numbers come from the library; this module
//! only parses flags, formats results and maps errors to exit codes.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::freqdomain::{bode_rows, comp_sensitivity_tf, log_grid, nyquist_points, robustness_report};
use crate::loop_analysis::{analyze_closed_loop, closed_loop, loop_tf};
use crate::model::{damping_params, tune_pi, PiController, Plant};
use crate::timedomain::{
    analytic_step_tuned, default_horizon, simulate_step, step_metrics, StepResponse, DEFAULT_BAND, DEFAULT_DT,
};
use crate::verify::{verify, CellStatus, CellValue, VerifyOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_SETTLED: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "pitune", version, about = "Critically damped PI tuning for second-order plants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute K and Ti for a plant
    Tune {
        #[command(flatten)]
        plant: PlantArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Closed-loop poles, cancellation check and robustness metrics
    Analyze {
        #[command(flatten)]
        plant: PlantArgs,
        /// Controller gain (defaults to the tuned value)
        #[arg(long, allow_negative_numbers = true, requires = "ti")]
        k: Option<f64>,
        /// Controller integral time (defaults to the tuned value)
        #[arg(long, allow_negative_numbers = true, requires = "k")]
        ti: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Simulate the tuned closed-loop step response
    Simulate {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = DEFAULT_BAND, allow_negative_numbers = true)]
        band: f64,
        /// Write the series t,y,y_analytic as CSV
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Recompute the reference tables and check every cell
    Verify {
        #[arg(long, default_value_t = DEFAULT_DT, allow_negative_numbers = true)]
        dt: f64,
        #[arg(long, default_value_t = DEFAULT_BAND, allow_negative_numbers = true)]
        band: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Export plottable CSV data
    Export {
        #[arg(value_enum)]
        kind: ExportKind,
        #[command(flatten)]
        plant: PlantArgs,
        #[arg(long, allow_negative_numbers = true)]
        wmin: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        wmax: Option<f64>,
        #[arg(long, default_value_t = 500)]
        points: usize,
        #[command(flatten)]
        sim: SimArgs,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct PlantArgs {
    #[arg(long, allow_negative_numbers = true)]
    kp: f64,
    #[arg(long, allow_negative_numbers = true)]
    t1: f64,
    #[arg(long, allow_negative_numbers = true)]
    t2: f64,
}

impl PlantArgs {
    fn plant(&self) -> Result<Plant, Error> {
        Plant::new(self.kp, self.t1, self.t2)
    }
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long, default_value_t = DEFAULT_DT, allow_negative_numbers = true)]
    dt: f64,
    /// Simulation length in seconds (defaults to 30 max(t1, 2 t2))
    #[arg(long, allow_negative_numbers = true)]
    horizon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportKind {
    Nyquist,
    Bode,
    Step,
}

#[derive(Debug)]
enum Failure {
    Domain(Error),
    Io(io::Error),
    VerifyFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Domain(Error::NotSettled { .. }) => EXIT_NOT_SETTLED,
            Failure::Domain(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
            Failure::VerifyFailed => EXIT_VERIFY_FAILED,
        }
    }
}

/// Runs the CLI with explicit arguments and output streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::VerifyFailed) => EXIT_VERIFY_FAILED,
        Err(f) => {
            let msg = match &f {
                Failure::Domain(e) => e.to_string(),
                Failure::Io(e) => format!("I/O error: {e}"),
                Failure::VerifyFailed => unreachable!(),
            };
            let _ = writeln!(err, "error: {msg}");
            f.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Tune { plant, format } => cmd_tune(&plant.plant()?, format, out),
        Command::Analyze { plant, k, ti, format } => {
            let plant = plant.plant()?;
            let ctrl = match (k, ti) {
                (Some(k), Some(ti)) => PiController::new(k, ti)?,
                _ => tune_pi(&plant),
            };
            cmd_analyze(&plant, &ctrl, format, out)
        }
        Command::Simulate {
            plant,
            sim,
            band,
            out: path,
            format,
        } => cmd_simulate(&plant.plant()?, &sim, band, path, format, out),
        Command::Verify { dt, band, format } => cmd_verify(dt, band, format, out),
        Command::Export {
            kind,
            plant,
            wmin,
            wmax,
            points,
            sim,
            out: path,
        } => {
            let plant = plant.plant()?;
            let grid = || {
                log_grid(
                    wmin.unwrap_or(1e-2 / plant.t2()),
                    wmax.unwrap_or(1e2 / plant.t2()),
                    points,
                )
            };
            match path {
                Some(path) => {
                    let file = File::create(&path)?;
                    export(kind, &plant, grid, &sim, file)?;
                }
                None => export(kind, &plant, grid, &sim, &mut *out)?,
            }
            Ok(())
        }
    }
}

/// Six significant digits.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.5}");
    }
    if x.abs() < 1e-4 || x.abs() >= 1e7 {
        return format!("{x:.5e}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "YES"
    } else {
        "NO"
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_tune(plant: &Plant, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let ctrl = tune_pi(plant);
    let d = damping_params(plant, &ctrl)?;
    match format {
        Format::Json => write_json(
            out,
            &json!({ "k": ctrl.k(), "ti": ctrl.ti(), "zeta": d.zeta, "wn": d.wn }),
        ),
        Format::Text => {
            writeln!(out, "K    = {}", sig6(ctrl.k()))?;
            writeln!(out, "Ti   = {} s", sig6(ctrl.ti()))?;
            writeln!(out, "zeta = {}", sig6(d.zeta))?;
            writeln!(out, "wn   = {} rad/s", sig6(d.wn))?;
            Ok(())
        }
    }
}

fn damping_note(plant: &Plant, ctrl: &PiController) -> String {
    match damping_params(plant, ctrl) {
        Ok(d) if (d.zeta - 1.0).abs() <= 1e-9 => format!("zeta = {}: critically damped, monotonic step response", sig6(d.zeta)),
        Ok(d) if d.zeta < 1.0 => format!("zeta = {} < 1: underdamped, overshoot expected", sig6(d.zeta)),
        Ok(d) => format!("zeta = {} > 1: overdamped, slower than the tuned loop", sig6(d.zeta)),
        Err(_) => "Ti does not cancel the slow plant pole; the loop stays third order and zeta is undefined".into(),
    }
}

fn cmd_analyze(plant: &Plant, ctrl: &PiController, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let report = analyze_closed_loop(plant, ctrl)?;
    let freq = robustness_report(plant, ctrl)?;
    let note = damping_note(plant, ctrl);
    match format {
        Format::Json => write_json(
            out,
            &json!({
                "k": ctrl.k(),
                "ti": ctrl.ti(),
                "poles": report.poles.iter().map(|p| json!({ "re": p.re, "im": p.im })).collect::<Vec<_>>(),
                "cancellation": report.cancellation_detected,
                "vieta_residuals": report.vieta_residuals,
                "ms": freq.ms,
                "mt": freq.mt,
                "pm_deg": freq.pm_deg,
                "wgc": freq.wgc,
                "note": note,
            }),
        ),
        Format::Text => {
            writeln!(out, "K  = {}", sig6(ctrl.k()))?;
            writeln!(out, "Ti = {} s", sig6(ctrl.ti()))?;
            let poles: Vec<String> = report
                .poles
                .iter()
                .map(|p| {
                    if p.im == 0.0 {
                        format!("{:.2}", p.re)
                    } else {
                        format!("{:.2}{:+.2}j", p.re, p.im)
                    }
                })
                .collect();
            writeln!(out, "poles = {}", poles.join(", "))?;
            writeln!(out, "cancellation = {}", yes_no(report.cancellation_detected))?;
            let [a, b, c] = report.vieta_residuals;
            writeln!(out, "vieta residuals = {a:.3e}, {b:.3e}, {c:.3e}")?;
            writeln!(out, "Ms  = {:.3}", freq.ms)?;
            writeln!(out, "Mt  = {:.3}", freq.mt)?;
            writeln!(out, "PM  = {:.2} deg", freq.pm_deg)?;
            writeln!(out, "wgc = {} rad/s", sig6(freq.wgc))?;
            writeln!(out, "note: {note}")?;
            Ok(())
        }
    }
}

fn tuned_response(plant: &Plant, sim: &SimArgs) -> Result<StepResponse, Error> {
    let horizon = sim.horizon.unwrap_or_else(|| default_horizon(plant));
    simulate_step(&closed_loop(plant, &tune_pi(plant)), sim.dt, horizon)
}

fn write_step_csv<W: Write>(plant: &Plant, r: &StepResponse, w: W) -> Result<(), Failure> {
    let mut csv = csv_writer(w);
    csv.write_record(["t", "y", "y_analytic"])?;
    for (t, y) in r.times().zip(r.samples()) {
        csv.serialize((t, y, analytic_step_tuned(plant.t2(), t)))?;
    }
    csv.flush()?;
    Ok(())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn cmd_simulate(
    plant: &Plant,
    sim: &SimArgs,
    band: f64,
    path: Option<PathBuf>,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let ctrl = tune_pi(plant);
    let response = tuned_response(plant, sim)?;
    if let Some(path) = path {
        write_step_csv(plant, &response, File::create(path)?)?;
    }
    let m = step_metrics(&response, band)?;
    match format {
        Format::Json => write_json(
            out,
            &json!({
                "k": ctrl.k(),
                "ti": ctrl.ti(),
                "dt": response.dt(),
                "band": band,
                "ts": m.ts,
                "po": m.po,
                "monotonic": m.monotonic,
            }),
        ),
        Format::Text => {
            writeln!(out, "Ts = {:.3} s", m.ts)?;
            writeln!(out, "PO = {:.3} %", m.po)?;
            writeln!(out, "monotonic = {}", yes_no(m.monotonic))?;
            Ok(())
        }
    }
}

fn export<W: Write>(
    kind: ExportKind,
    plant: &Plant,
    grid: impl Fn() -> Result<Vec<f64>, Error>,
    sim: &SimArgs,
    w: W,
) -> Result<(), Failure> {
    let ctrl = tune_pi(plant);
    match kind {
        ExportKind::Step => write_step_csv(plant, &tuned_response(plant, sim)?, w),
        ExportKind::Nyquist => {
            let t = comp_sensitivity_tf(&loop_tf(plant, &ctrl));
            let points = nyquist_points(&t, &grid()?)?;
            let mut csv = csv_writer(w);
            csv.write_record(["omega", "re", "im"])?;
            for p in points {
                csv.serialize((p.omega, p.value.re, p.value.im))?;
            }
            csv.flush()?;
            Ok(())
        }
        ExportKind::Bode => {
            let rows = bode_rows(&loop_tf(plant, &ctrl), &grid()?)?;
            let mut csv = csv_writer(w);
            csv.write_record(["omega", "mag_L", "phase_L_deg", "mag_S", "mag_T"])?;
            for r in rows {
                csv.serialize((r.omega, r.mag_l, r.phase_l_deg, r.mag_s, r.mag_t))?;
            }
            csv.flush()?;
            Ok(())
        }
    }
}

fn cmd_verify(dt: f64, band: f64, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let outcome = verify(dt, band)?;
    match format {
        Format::Json => write_json(out, &outcome)?,
        Format::Text => render_verify(&outcome, out)?,
    }
    if outcome.all_pass {
        Ok(())
    } else {
        Err(Failure::VerifyFailed)
    }
}

fn pass_fail(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn render_verify(o: &VerifyOutcome, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "Table 2: controller parameters and closed-loop poles")?;
    writeln!(
        out,
        "{:<3} {:<22} {:>6} {:>5} {:>7} {:>8}  status",
        "#", "plant", "K", "Ti", "p1", "p2=p3"
    )?;
    for r in &o.table2_rows {
        let p1 = r.cells.iter().find(|c| c.name == "p1").map(cell_number).unwrap_or(f64::NAN);
        let p2 = r.cells.iter().find(|c| c.name == "p2").map(cell_number).unwrap_or(f64::NAN);
        writeln!(
            out,
            "{:<3} {:<22} {:>6.2} {:>5.1} {:>7.2} {:>8.2}  {}",
            r.plant_id,
            r.plant,
            r.k,
            r.ti,
            p1,
            p2,
            pass_fail(r.pass)
        )?;
    }
    writeln!(out)?;
    writeln!(
        out,
        "Table 3: closed-loop performance (dt = {} s, band = {}%)",
        o.dt,
        o.band * 100.0
    )?;
    writeln!(
        out,
        "{:<3} {:<22} {:>7} {:>7} {:>9} {:>6} {:>6} {:>6}  status",
        "#", "plant", "Ts (s)", "PO (%)", "Monotonic", "Mt", "Ms", "PM"
    )?;
    for r in &o.table3_rows {
        writeln!(
            out,
            "{:<3} {:<22} {:>7.3} {:>7.3} {:>9} {:>6.3} {:>6.3} {:>6.2}  {}",
            r.plant_id,
            r.plant,
            r.ts,
            r.po,
            yes_no(r.monotonic),
            r.mt,
            r.ms,
            r.pm_deg,
            pass_fail(r.pass)
        )?;
    }
    writeln!(out)?;
    writeln!(out, "Cell checks")?;
    writeln!(
        out,
        "{:<6} {:<3} {:<10} {:>16} {:>12} {:>11} {:>9}  status",
        "table", "#", "cell", "value", "reference", "delta", "tol"
    )?;
    let t2 = o.table2_rows.iter().flat_map(|r| r.cells.iter().map(move |c| (2, r.plant_id, c)));
    let t3 = o.table3_rows.iter().flat_map(|r| r.cells.iter().map(move |c| (3, r.plant_id, c)));
    for (table, id, c) in t2.chain(t3) {
        let status = match c.status {
            CellStatus::Pass => "PASS",
            CellStatus::Fail => "FAIL",
            CellStatus::NotApplicable => "N/A",
        };
        writeln!(
            out,
            "{:<6} {:<3} {:<10} {:>16} {:>12} {:>11} {:>9}  {}",
            table,
            id,
            c.name,
            render_value(c.value),
            render_value(c.reference),
            c.delta.map(|d| format!("{d:.2e}")).unwrap_or_else(|| "-".into()),
            c.tolerance.map(|d| format!("{d:.1e}")).unwrap_or_else(|| "-".into()),
            status
        )?;
    }
    writeln!(out)?;
    let failures = o.failures().count();
    if o.all_pass {
        writeln!(out, "all cells pass")?;
    } else {
        writeln!(out, "{failures} cell(s) failed")?;
        for (id, c) in o.failures() {
            writeln!(out, "  plant {id}: {} = {}", c.name, render_value(c.value))?;
        }
    }
    Ok(())
}

fn cell_number(c: &crate::verify::Cell) -> f64 {
    match c.value {
        CellValue::Number(x) => x,
        CellValue::Flag(_) => f64::NAN,
    }
}

fn render_value(v: CellValue) -> String {
    match v {
        CellValue::Number(x) => sig6(x),
        CellValue::Flag(b) => yes_no(b).into(),
    }
}
