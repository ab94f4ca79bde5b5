//! Command-line frontend. [`run`] parses `argv`, writes the payload to
//! standard output (or `--output`), messages to standard error, and returns
//! the exit code: 0 success, 1 usage error, 2 numeric or convergence
//! failure, 3 I/O error.

mod args;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use sonclust::analytic::{power_law_ball_mass, ConstantsTable};
use sonclust::certificates::{
    detection_interval, lambda1_bisect, lambda1_bounds, lambda1_exact, lambda_star_bisect, verify_kkt,
};
use sonclust::experiments::{
    detection_convergence_experiment, separation_experiment, stochastic_ball_experiment, ExperimentOptions,
};
use sonclust::measure::{read_measure, write_measure_csv, write_measure_json, MeasureFormat};
use sonclust::measure::sampling::{
    cross_polytope_measure, sample_ball, sample_power_law_ball, sample_sphere, sample_two_balls,
};
use sonclust::solver::{check_agglomeration, cluster_path_with_fuse, default_fuse_tol, extract_partition, minimize};
use sonclust::transport::{w1, w_infty};
use sonclust::{Error, Measure, Partition, Solution, SolverOptions};

pub use args::Cli;
use args::{Command, Experiment, ExperimentArgs, Format, Lambda1Method, Order, Sample, SolverArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Numeric(_) => EXIT_NUMERIC,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(s) | Failure::Numeric(s) | Failure::Io(s) => s,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Numeric(_) | Error::NotConverged { .. } => Failure::Numeric(msg),
            Error::Io(_) | Error::Parse(_) => Failure::Io(msg),
            _ => Failure::Usage(msg),
        }
    }
}

/// A payload plus whether the computation it reports fell short (exit 2).
struct Output {
    body: String,
    failed: Option<String>,
}

impl Output {
    fn ok(body: String) -> Self {
        Self { body, failed: None }
    }
}

type Res<T> = std::result::Result<T, Failure>;

pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let _ = stderr.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            if let Err(f) = emit(&cli, &out.body, stdout) {
                let _ = writeln!(stderr, "error: {}", f.message());
                return f.code();
            }
            match out.failed {
                Some(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    EXIT_NUMERIC
                }
                None => EXIT_OK,
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

fn emit(cli: &Cli, body: &str, stdout: &mut dyn Write) -> Res<()> {
    match &cli.output {
        Some(p) => std::fs::write(p, body).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Io(format!("standard output: {e}"))),
    }
}

fn execute(cli: &Cli) -> Res<Output> {
    if let Some(p) = &cli.output {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty());
        if parent.is_some_and(|d| !d.is_dir()) {
            return Err(Failure::Io(format!("{}: output directory does not exist", p.display())));
        }
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        // a second call in the same process (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let fmt = |default: Format| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Solve { measure, lambda, solver } => solve(&load(measure)?, *lambda, solver, fmt(Format::Json)),
        Command::Path {
            measure,
            lambdas,
            log_grid,
            solver,
        } => path(&load(measure)?, lambdas.as_deref(), log_grid.as_deref(), solver, fmt(Format::Json)),
        Command::Lambda1 {
            measure,
            method,
            tol,
            certificate,
            solver,
        } => lambda1(&load(measure)?, *method, *tol, *certificate, solver, fmt(Format::Text)),
        Command::LambdaStar { measure, tol, solver } => lambda_star(&load(measure)?, *tol, solver, fmt(Format::Text)),
        Command::Detect {
            measure,
            partition,
            tol,
            solver,
        } => {
            let m = load(measure)?;
            let labels = load_labels(partition)?;
            detect(&m, &labels, *tol, solver, fmt(Format::Json))
        }
        Command::Verify {
            measure,
            solution,
            partition,
            tol,
            fuse_tol,
            certificate,
        } => {
            let m = load(measure)?;
            let (sol, stored) = load_solution(solution)?;
            let labels = match partition {
                Some(p) => Some(load_labels(p)?),
                None => stored,
            };
            verify(&m, &sol, labels, *tol, *fuse_tol, *certificate, fmt(Format::Json))
        }
        Command::Constants { d } => constants(*d, fmt(Format::Json)),
        Command::Wasserstein { p, a, b, plan } => wasserstein(*p, &load(a)?, &load(b)?, *plan, fmt(Format::Json)),
        Command::Experiment(e) => experiment(e, fmt(Format::Json)),
        Command::Sample(s) => sample(s, fmt(Format::Csv)),
    }
}

// ---------------------------------------------------------------------------
// input

fn open(path: &Path) -> Res<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn with_path(path: &Path, e: Error) -> Failure {
    match Failure::from(e) {
        Failure::Io(m) => Failure::Io(format!("{}: {m}", path.display())),
        Failure::Usage(m) => Failure::Usage(format!("{}: {m}", path.display())),
        f => f,
    }
}

fn load(path: &PathBuf) -> Res<Measure> {
    read_measure(open(path)?, MeasureFormat::from_path(path)).map_err(|e| with_path(path, e))
}

/// Partition files are CSV with a `label` column aligned with the measure.
fn load_labels(path: &Path) -> Res<Vec<usize>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let bad = |m: String| Failure::Io(format!("{}: {m}", path.display()));
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| bad("no `label` column".into()))?;
    let mut labels = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let s = &rec[col];
        labels.push(s.parse().map_err(|_| bad(format!("row {}: bad label `{s}`", row + 1)))?);
    }
    Ok(labels)
}

/// Accepts the JSON written by `solve` or a bare solver result.
fn load_solution(path: &Path) -> Res<(Solution, Option<Vec<usize>>)> {
    let v: Value = serde_json::from_reader(open(path)?).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| Failure::Io(format!("{}: {e}", path.display()));
    let (res, labels) = match v.get("result") {
        Some(r) => (
            r.clone(),
            v.get("partition").and_then(|p| p.get("labels")).cloned(),
        ),
        None => (v, None),
    };
    let sol: Solution = serde_json::from_value(res).map_err(bad)?;
    let labels = labels.map(serde_json::from_value).transpose().map_err(bad)?;
    Ok((sol, labels))
}

fn solver_options(a: &SolverArgs) -> Res<SolverOptions> {
    let mut o = SolverOptions::default();
    if let Some(t) = a.solver_tol {
        o.primal_tol = t;
        o.dual_tol = t;
    }
    if let Some(k) = a.max_iters {
        o.max_iters = k;
    }
    o.validate()?;
    Ok(o)
}

fn fuse(m: &Measure, a: Option<f64>) -> Res<f64> {
    match a {
        Some(t) if !(t >= 0.0 && t.is_finite()) => Err(Failure::Usage("--fuse-tol must be nonnegative".into())),
        Some(t) => Ok(t),
        None => Ok(default_fuse_tol(m)),
    }
}

fn parse_seeds(spec: &str) -> Res<Vec<u64>> {
    let bad = || Failure::Usage(format!("cannot parse seeds `{spec}`; use e.g. `0..10` or `1,2,5`"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            if a >= b {
                return Err(bad());
            }
            out.extend(a..b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// output helpers

fn pretty<S: Serialize>(v: &S) -> Res<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Numeric(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Shortest round-trip representation, so text output is exact.
fn num(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else {
        format!("{v:?}")
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------------------
// commands

fn solve(m: &Measure, lambda: f64, a: &SolverArgs, f: Format) -> Res<Output> {
    let r = minimize(m, lambda, &solver_options(a)?)?;
    let p = extract_partition(m, &r, fuse(m, a.fuse_tol)?)?;
    let body = match f {
        Format::Json => pretty(&json!({ "result": r, "partition": p }))?,
        Format::Csv => {
            let mut s = String::from("atom,label");
            (0..m.dim()).for_each(|k| write!(s, ",u{k}").unwrap());
            s.push('\n');
            for (i, u) in r.u_values.iter().enumerate() {
                write!(s, "{i},{}", p.label(i)).unwrap();
                u.iter().for_each(|&v| write!(s, ",{}", num(v)).unwrap());
                s.push('\n');
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "lambda      {}", num(r.lambda)).unwrap();
            writeln!(s, "objective   {}", num(r.objective)).unwrap();
            writeln!(s, "converged   {} ({} iterations)", r.converged, r.iterations).unwrap();
            writeln!(s, "residuals   {} {}", num(r.residuals.primal), num(r.residuals.dual)).unwrap();
            writeln!(s, "clusters    {}", p.num_clusters()).unwrap();
            for (i, u) in r.u_values.iter().enumerate() {
                writeln!(s, "{i:>6} {:>6}  {}", p.label(i), join(u)).unwrap();
            }
            s
        }
    };
    Ok(Output {
        body,
        failed: (!r.converged).then(|| format!("solver did not converge in {} iterations", r.iterations)),
    })
}

fn path(m: &Measure, lambdas: Option<&[f64]>, log_grid: Option<&[f64]>, a: &SolverArgs, f: Format) -> Res<Output> {
    let grid: Vec<f64> = match (lambdas, log_grid) {
        (Some(l), _) => l.to_vec(),
        (None, Some(&[lo, hi, n])) => {
            if !(lo > 0.0 && hi > lo && n >= 2.0 && n.fract() == 0.0) {
                return Err(Failure::Usage("--log-grid needs 0 < LO < HI and an integer N >= 2".into()));
            }
            let n = n as usize;
            (0..n)
                .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
                .collect()
        }
        _ => return Err(Failure::Usage("give --lambdas or --log-grid".into())),
    };
    let p = cluster_path_with_fuse(m, &grid, &solver_options(a)?, fuse(m, a.fuse_tol)?)?;
    let agg = check_agglomeration(&p);
    let unconverged = p.entries.iter().filter(|e| !e.result.converged).count();
    let body = match f {
        Format::Json => pretty(&json!({ "path": p, "agglomeration": agg }))?,
        Format::Csv | Format::Text => {
            let sep = if f == Format::Csv { "," } else { " " };
            let mut s = ["lambda", "clusters", "converged", "iterations", "objective"].join(sep);
            s.push('\n');
            for (l, e) in p.lambdas.iter().zip(&p.entries) {
                let row = [
                    num(*l),
                    e.partition.num_clusters().to_string(),
                    e.result.converged.to_string(),
                    e.result.iterations.to_string(),
                    num(e.result.objective),
                ];
                s.push_str(&row.join(sep));
                s.push('\n');
            }
            if f == Format::Text {
                writeln!(s, "nested {}", agg.nested).unwrap();
            }
            s
        }
    };
    Ok(Output {
        body,
        failed: (unconverged > 0).then(|| format!("{unconverged} grid points did not converge")),
    })
}

fn lambda1(m: &Measure, method: Lambda1Method, tol: f64, cert: bool, a: &SolverArgs, f: Format) -> Res<Output> {
    let mass = m.total_mass();
    let (value, lower, upper, extra) = match method {
        Lambda1Method::Bounds => {
            let (lo, hi) = lambda1_bounds(m);
            (None, lo, hi, Value::Null)
        }
        Lambda1Method::Exact => {
            let (v, c) = lambda1_exact(m, tol)?;
            let extra = if cert {
                serde_json::to_value(&c).map_err(|e| Failure::Numeric(e.to_string()))?
            } else {
                json!({ "constraint_residual": c.constraint_residual, "iterations": c.iterations })
            };
            (Some(v), c.lower_bound / mass, v, extra)
        }
        Lambda1Method::Bisect => {
            let e = lambda1_bisect(m, tol, &solver_options(a)?)?;
            let extra = json!({ "evaluations": e.evaluations, "ambiguous": e.ambiguous });
            (Some(e.value.to_f64()), e.lower, e.upper.to_f64(), extra)
        }
    };
    let method_name = format!("{method:?}").to_lowercase();
    let body = match f {
        Format::Json => pretty(&json!({
            "method": method_name,
            "lambda1": value,
            "lower": lower,
            "upper": upper,
            "mass": mass,
            "details": extra,
        }))?,
        Format::Csv => format!(
            "method,lambda1,lower,upper\n{method_name},{},{},{}\n",
            value.map(num).unwrap_or_default(),
            num(lower),
            num(upper)
        ),
        Format::Text => match value {
            Some(v) => format!("{}\n", num(v)),
            None => format!("{} {}\n", num(lower), num(upper)),
        },
    };
    Ok(Output::ok(body))
}

fn lambda_star(m: &Measure, tol: f64, a: &SolverArgs, f: Format) -> Res<Output> {
    let e = lambda_star_bisect(m, tol, &solver_options(a)?)?;
    let body = match f {
        Format::Json => pretty(&e)?,
        Format::Csv => format!(
            "lambda_star,lower,upper\n{},{},{}\n",
            e.value,
            num(e.lower),
            e.upper
        ),
        Format::Text => format!("{}\n", e.value),
    };
    Ok(Output {
        body,
        failed: e.ambiguous.then(|| "some probes could not be classified; bracket left wide".into()),
    })
}

fn detect(m: &Measure, labels: &[usize], tol: f64, a: &SolverArgs, f: Format) -> Res<Output> {
    let p = Partition::from_labels(m, labels)?;
    let d = detection_interval(m, &p, tol, &solver_options(a)?)?;
    let body = match f {
        Format::Json => pretty(&d)?,
        Format::Csv => format!("lower,upper,nonempty\n{},{},{}\n", num(d.lower), d.upper, d.nonempty),
        Format::Text => format!("({}, {}){}\n", num(d.lower), d.upper, if d.nonempty { "" } else { " empty" }),
    };
    Ok(Output::ok(body))
}

fn verify(
    m: &Measure,
    sol: &Solution,
    labels: Option<Vec<usize>>,
    tol: f64,
    fuse_tol: Option<f64>,
    cert: bool,
    f: Format,
) -> Res<Output> {
    if sol.u_values.len() != m.len() {
        return Err(Failure::Usage(format!(
            "solution has {} atoms, measure has {}",
            sol.u_values.len(),
            m.len()
        )));
    }
    let p = match labels {
        Some(l) => Partition::from_labels_and_values(m, &l, &sol.u_flat())?,
        None => extract_partition(m, sol, fuse(m, fuse_tol)?)?,
    };
    let c = verify_kkt(m, sol.lambda, sol, &p, tol)?;
    let body = match f {
        Format::Json if cert => pretty(&c)?,
        Format::Json => pretty(&json!({
            "valid": c.valid,
            "lambda": sol.lambda,
            "clusters": p.num_clusters(),
            "max_norm": c.max_norm,
            "stationarity_residual": c.stationarity_residual,
            "sign_residual": c.sign_residual,
            "tol": c.tol,
        }))?,
        Format::Csv => format!(
            "valid,max_norm,stationarity_residual,sign_residual\n{},{},{},{}\n",
            c.valid,
            num(c.max_norm),
            num(c.stationarity_residual),
            num(c.sign_residual)
        ),
        Format::Text => format!(
            "{}\nmax_norm {}\nstationarity {}\nsign {}\n",
            if c.valid { "valid" } else { "invalid" },
            num(c.max_norm),
            num(c.stationarity_residual),
            num(c.sign_residual)
        ),
    };
    Ok(Output {
        body,
        failed: (!c.valid).then(|| "KKT verification failed".into()),
    })
}

fn constants(d: usize, f: Format) -> Res<Output> {
    let t = ConstantsTable::new(d)?;
    let body = match f {
        Format::Json => pretty(&t)?,
        Format::Text => t.to_text(),
        Format::Csv => {
            let v = serde_json::to_value(&t).map_err(|e| Failure::Numeric(e.to_string()))?;
            let mut s = String::from("name,value\n");
            for (k, x) in v.as_object().into_iter().flatten() {
                writeln!(s, "{k},{}", if x.is_null() { String::new() } else { x.to_string() }).unwrap();
            }
            s
        }
    };
    Ok(Output::ok(body))
}

fn wasserstein(p: Order, a: &Measure, b: &Measure, with_plan: bool, f: Format) -> Res<Output> {
    let (value, plan) = match p {
        Order::One => w1(a, b)?,
        Order::Inf => w_infty(a, b)?,
    };
    let body = match f {
        Format::Json if with_plan => pretty(&json!({ "p": plan.p, "value": value, "plan": plan }))?,
        Format::Json => pretty(&json!({ "p": plan.p, "value": value }))?,
        Format::Csv => {
            let mut s = String::from("row,col,mass\n");
            for (i, j, v) in plan.support() {
                writeln!(s, "{i},{j},{}", num(v)).unwrap();
            }
            s
        }
        Format::Text => format!("{}\n", num(value)),
    };
    Ok(Output::ok(body))
}

fn experiment_options(c: &ExperimentArgs) -> Res<ExperimentOptions> {
    if !(c.kkt_tol > 0.0 && c.threshold_tol > 0.0) {
        return Err(Failure::Usage("tolerances must be positive".into()));
    }
    Ok(ExperimentOptions {
        solver: solver_options(&c.solver)?,
        verify_kkt: !c.no_kkt,
        kkt_tol: c.kkt_tol,
        threshold_tol: c.threshold_tol,
        ..ExperimentOptions::default()
    })
}

fn experiment(e: &Experiment, f: Format) -> Res<Output> {
    macro_rules! render {
        ($r:expr) => {{
            let r = $r;
            match f {
                Format::Json => r.to_json()? + "\n",
                Format::Csv => r.to_csv()?,
                Format::Text => pretty(&r.summary)?,
            }
        }};
    }
    let body = match e {
        Experiment::StochBall {
            common,
            n,
            factors,
            mass_report,
            lambda1_rel_tol,
        } => {
            let opts = ExperimentOptions {
                mass_report: *mass_report,
                lambda1_rel_tol: *lambda1_rel_tol,
                ..experiment_options(common)?
            };
            let seeds = parse_seeds(&common.seed)?;
            render!(stochastic_ball_experiment(common.d, common.r.unwrap_or(1.05), *n, &seeds, factors, &opts)?)
        }
        Experiment::Separation { common, n, lambda } => {
            let seeds = parse_seeds(&common.seed)?;
            let opts = experiment_options(common)?;
            render!(separation_experiment(common.d, common.r.unwrap_or(2.0), *n, *lambda, &seeds, &opts)?)
        }
        Experiment::Detection { common, n } => {
            let seeds = parse_seeds(&common.seed)?;
            let opts = experiment_options(common)?;
            render!(detection_convergence_experiment(common.d, common.r.unwrap_or(2.0), n, &seeds, &opts)?)
        }
    };
    Ok(Output::ok(body))
}

fn sample(s: &Sample, f: Format) -> Res<Output> {
    let m: Measure = match *s {
        Sample::TwoBalls { d, r, n, seed } => sample_two_balls(d, r, n, seed)?,
        Sample::Ball { d, n, seed } => sample_ball(d, n, seed)?,
        Sample::Sphere { d, n, seed } => sample_sphere(d, n, seed)?,
        Sample::PowerLaw {
            d,
            radius,
            n,
            seed,
            normalize,
        } => {
            let m = sample_power_law_ball(d, radius, n, seed)?;
            if normalize {
                m.scale_weights(power_law_ball_mass(d, radius)? / m.total_mass())?
            } else {
                m
            }
        }
        Sample::CrossPolytope { d } => cross_polytope_measure(d)?,
    };
    let mut buf = Vec::new();
    match f {
        Format::Csv | Format::Text => write_measure_csv(&m, &mut buf)?,
        Format::Json => {
            write_measure_json(&m, &mut buf)?;
            buf.push(b'\n');
        }
    }
    Ok(Output::ok(String::from_utf8(buf).expect("measure writers emit UTF-8")))
}
