//! `finslerkit`: tangent-plane scans, geodesics, transport, curvature,
//! observer-space and Cartan diagnostics as CSV/JSON files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use finslerkit::algebra::ModelGroup;
use finslerkit::cartan::{cartan_report, integrability_check, CartanOptions};
use finslerkit::causal::{scan_plane, Plane, ScanSpec};
use finslerkit::curvature::curvature_report;
use finslerkit::finsler::{finsler_function, hessian_metric_gl, normalize_to_shell};
use finslerkit::frame::axis_frame;
use finslerkit::geodesic::{finsler_drift, integrate_geodesic};
use finslerkit::observer::observer_report;
use finslerkit::transport::generalized_lorentz;
use finslerkit::{build_model, Error, ErrorClass, FundamentalModel, TangentPoint, VERSION};
use nalgebra::{Matrix4, Vector4};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    ClassifyPlane,
    Geodesic,
    Transport,
    Curvature,
    Observer,
    Cartan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Group {
    DeSitter,
    Poincare,
    AntiDeSitter,
}

impl Group {
    fn model_group(self) -> ModelGroup {
        match self {
            Group::DeSitter => ModelGroup::DE_SITTER,
            Group::Poincare => ModelGroup::POINCARE,
            Group::AntiDeSitter => ModelGroup::ANTI_DE_SITTER,
        }
    }
}

/// Numerical Finsler spacetime geometry from the command line.
#[derive(Debug, Parser)]
#[command(name = "finslerkit", version)]
struct Cli {
    /// Model spec JSON file, or one of the presets `minkowski`, `flrw`,
    /// `bimetric-flat`, `bimetric-curved`.
    #[arg(long)]
    model: String,
    /// Output file (CSV for classify-plane and geodesic, JSON otherwise).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    cmd: Command,
    /// Scan resolution `NxM`.
    #[arg(long, default_value = "200x200", value_parser = parse_grid)]
    grid: (usize, usize),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Integrator tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Base point `x` as four comma-separated numbers.
    #[arg(long, default_value = "0,0,0,0", value_parser = parse_vec4)]
    x: [f64; 4],
    /// Direction `y`; normalized to the shell where a command needs it.
    #[arg(long, default_value = "1,0,0,0", value_parser = parse_vec4)]
    y: [f64; 4],
    /// Target direction for `transport` (defaults to `y`).
    #[arg(long, value_parser = parse_vec4)]
    y_target: Option<[f64; 4]>,
    /// First and second spanning fiber directions of the scan plane.
    #[arg(long, default_value = "1,0,0,0", value_parser = parse_vec4)]
    e1: [f64; 4],
    #[arg(long, default_value = "0,1,0,0", value_parser = parse_vec4)]
    e2: [f64; 4],
    /// Half-width of the scanned square in plane coordinates.
    #[arg(long, default_value_t = 2.0)]
    extent: f64,
    /// Geodesic parameter span.
    #[arg(long, default_value_t = 10.0)]
    span: f64,
    #[arg(long, value_enum, default_value = "de-sitter")]
    group: Group,
    /// Random samples for the Cartan condition checks.
    #[arg(long, default_value_t = 50)]
    samples: usize,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("grid must look like NxM, got `{s}`"))?;
    let n = a.trim().parse::<usize>().map_err(|e| e.to_string())?;
    let m = b.trim().parse::<usize>().map_err(|e| e.to_string())?;
    if n == 0 || m == 0 {
        return Err("grid dimensions must be positive".into());
    }
    Ok((n, m))
}

fn parse_vec4(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 4 components, got {}", v.len()))
}

/// Failures of the run, each mapped to an exit code.
#[derive(Debug)]
enum RunError {
    Config(String),
    Io(String),
    Model(Error),
}

impl RunError {
    fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Io(_) => 4,
            RunError::Model(e) => match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Domain => 3,
                ErrorClass::Numerical => 4,
            },
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
            RunError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Model(e)
    }
}

/// Resolves `--model` to a model and the JSON that describes it.
fn load_model(arg: &str) -> Result<(FundamentalModel, Value), RunError> {
    let builtin = match arg {
        "minkowski" => Some(FundamentalModel::minkowski()),
        "flrw" => Some(FundamentalModel::flrw()),
        "bimetric-flat" => Some(FundamentalModel::bimetric_flat()),
        "bimetric-curved" => Some(FundamentalModel::bimetric_curved()),
        _ => None,
    };
    if let Some(m) = builtin {
        if !Path::new(arg).exists() {
            return Ok((m, json!({ "preset": arg })));
        }
    }
    let text = fs::read_to_string(arg).map_err(|e| RunError::Config(format!("cannot read model `{arg}`: {e}")))?;
    let spec: Value =
        serde_json::from_str(&text).map_err(|e| RunError::Config(format!("model `{arg}` is not valid JSON: {e}")))?;
    Ok((build_model(&spec)?, spec))
}

/// The resolved run configuration, echoed into every output file.
#[derive(Debug, Serialize)]
struct RunConfig<'a> {
    model: &'a str,
    model_spec: &'a Value,
    cmd: Command,
    grid: [usize; 2],
    seed: u64,
    tol: f64,
    x: [f64; 4],
    y: [f64; 4],
    y_target: [f64; 4],
    e1: [f64; 4],
    e2: [f64; 4],
    extent: f64,
    span: f64,
    group: Group,
    samples: usize,
    threads: Option<usize>,
}

fn csv_header(config: &Value) -> String {
    format!("# finslerkit {VERSION}\n# config {config}\n")
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, config: &Value, body: Value) -> Result<(), RunError> {
    let doc = json!({ "version": VERSION, "config": config, "result": body });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| RunError::Io(e.to_string()))?;
    text.push('\n');
    write_file(path, &text)
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn matrix_rows(m: &Matrix4<f64>) -> Vec<[f64; 4]> {
    (0..4).map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)], m[(i, 3)]]).collect()
}

fn sig_string(sig: &[i8; 4]) -> String {
    sig.iter().map(|s| match s.signum() {
        1 => '+',
        -1 => '-',
        _ => '0',
    }).collect()
}

fn classify_plane(cli: &Cli, model: &FundamentalModel, config: &Value) -> Result<(), RunError> {
    let spec = ScanSpec {
        plane: Plane { x: Vector4::from(cli.x), e1: Vector4::from(cli.e1), e2: Vector4::from(cli.e2) },
        extent: cli.extent,
        nx: cli.grid.0,
        ny: cli.grid.1,
    };
    if !(cli.extent > 0.0) {
        return Err(RunError::Config("extent must be positive".into()));
    }
    let scan = scan_plane(model, &spec)?;
    let mut csv = csv_header(config);
    csv.push_str("y1,y2,sign_l,det_sign,signature,in_omega,in_cone\n");
    for n in &scan.nodes {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            n.y1,
            n.y2,
            n.sign_l,
            n.det_sign,
            sig_string(&n.signature),
            n.in_omega as u8,
            n.in_cone as u8
        );
    }
    write_file(&cli.out, &csv)?;
    write_json(&sidecar(&cli.out), config, to_value(&scan.summary))
}

fn geodesic(cli: &Cli, model: &FundamentalModel, config: &Value) -> Result<(), RunError> {
    let p0 = TangentPoint::from_arrays(cli.x, cli.y);
    let traj = integrate_geodesic(model, &p0, (0.0, cli.span), cli.tol)?;
    let mut csv = csv_header(config);
    csv.push_str("tau,x0,x1,x2,x3,y0,y1,y2,y3,F,detgL\n");
    for s in &traj.samples {
        let (x, y) = (s.point.x, s.point.y);
        let f = finsler_function(model, &s.point)?;
        let det = hessian_metric_gl(model, &s.point)?.det();
        let _ = writeln!(csv, "{},{},{},{},{},{},{},{},{},{},{}", s.tau, x[0], x[1], x[2], x[3], y[0], y[1], y[2], y[3], f, det);
    }
    write_file(&cli.out, &csv)?;
    let summary = json!({
        "samples": traj.samples.len(),
        "accepted_steps": traj.steps,
        "rejected_steps": traj.rejected,
        "f_drift": finsler_drift(model, &traj)?,
    });
    write_json(&sidecar(&cli.out), config, summary)
}

fn transport(cli: &Cli, model: &FundamentalModel, config: &Value) -> Result<(), RunError> {
    let x = Vector4::from(cli.x);
    let p = normalize_to_shell(model, &TangentPoint::new(x, Vector4::from(cli.y)))?;
    let q = normalize_to_shell(model, &TangentPoint::new(x, Vector4::from(cli.y_target.unwrap_or(cli.y))))?;
    let f = axis_frame(model, &p)?;
    let fp = axis_frame(model, &q)?;
    let t = generalized_lorentz(model, &f, &fp)?;
    let body = json!({
        "x": cli.x,
        "y": <[f64; 4]>::from(p.y),
        "y_target": <[f64; 4]>::from(q.y),
        "frame": matrix_rows(&f.f),
        "frame_target": matrix_rows(&fp.f),
        "lambda": matrix_rows(&t.lambda),
        "orthonormality_residual": t.orthonormality_residual,
        "lorentz_residual": t.lorentz_residual,
        "shooting_iterations": t.iterations,
        "shooting_residual": t.shooting_residual,
    });
    write_json(&cli.out, config, body)
}

fn curvature(cli: &Cli, model: &FundamentalModel, config: &Value) -> Result<(), RunError> {
    let r = curvature_report(model, &TangentPoint::from_arrays(cli.x, cli.y))?;
    write_json(&cli.out, config, to_value(&r))
}

fn observer(cli: &Cli, model: &FundamentalModel, config: &Value) -> Result<(), RunError> {
    let p = normalize_to_shell(model, &TangentPoint::from_arrays(cli.x, cli.y))?;
    write_json(&cli.out, config, to_value(&observer_report(model, &p)?))
}

fn cartan(cli: &Cli, model: &FundamentalModel, config: &Value) -> Result<(), RunError> {
    let p = normalize_to_shell(model, &TangentPoint::from_arrays(cli.x, cli.y))?;
    let fr = axis_frame(model, &p)?;
    let opts = CartanOptions { seed: cli.seed, omega_scale: 1.0 };
    let report = cartan_report(model, &fr, cli.group.model_group(), cli.samples, &opts)?;
    let integ = integrability_check(model, &p.x, 4)?;
    let body = json!({ "cartan": to_value(&report), "integrability": to_value(&integ) });
    write_json(&cli.out, config, body)
}

fn threads() -> Result<Option<usize>, RunError> {
    match std::env::var("FINSLERKIT_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(RunError::Config(format!("FINSLERKIT_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn run(cli: &Cli) -> Result<(), RunError> {
    if !(cli.tol > 0.0) {
        return Err(RunError::Config("tol must be positive".into()));
    }
    let threads = threads()?;
    if let Some(n) = threads {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (model, spec) = load_model(&cli.model)?;
    let config = to_value(&RunConfig {
        model: &cli.model,
        model_spec: &spec,
        cmd: cli.cmd,
        grid: [cli.grid.0, cli.grid.1],
        seed: cli.seed,
        tol: cli.tol,
        x: cli.x,
        y: cli.y,
        y_target: cli.y_target.unwrap_or(cli.y),
        e1: cli.e1,
        e2: cli.e2,
        extent: cli.extent,
        span: cli.span,
        group: cli.group,
        samples: cli.samples,
        threads,
    });
    match cli.cmd {
        Command::ClassifyPlane => classify_plane(cli, &model, &config),
        Command::Geodesic => geodesic(cli, &model, &config),
        Command::Transport => transport(cli, &model, &config),
        Command::Curvature => curvature(cli, &model, &config),
        Command::Observer => observer(cli, &model, &config),
        Command::Cartan => cartan(cli, &model, &config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("finslerkit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
