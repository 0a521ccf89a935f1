use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use causal_core::numfmt::sig;
use causal_core::polytope::{
    classify_facets, enumerate_facets, enumerate_strategies, enumerate_vertices, facet_family, facet_report, facets_of_points,
    format_rational, inequalities_to_json, parse_rational, vertices_csv, CausalInequality, FacetFamily, Rational, Scenario,
    DEFAULT_VERTEX_LIMIT,
};
use causal_core::process::{
    correlation_unchecked, mix_wmax, ocb_example_w, standard_instruments, wmax_qubit, InstrumentSet, ProcessDims, ProcessMatrix,
    WmaxVariant, VALIDATION_TOL,
};
use causal_core::seesaw::{boundary_csv, boundary_scan, default_restarts, optimize, Objective, SeeSawOptions, BOUND_KIND};
use causal_core::Error;

use crate::config::{CommandName, JobConfig};

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TooLarge { .. } => 2,
            Error::Optimization(_) => 3,
            _ => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn required<'a, T>(value: &'a Option<T>, flag: &str) -> CliResult<&'a T> {
    value.as_ref().ok_or_else(|| CliError::usage(format!("missing --{flag}")))
}

fn scenario_arg(cfg: &JobConfig) -> CliResult<Scenario> {
    Ok(required(&cfg.scenario, "scenario")?.parse()?)
}

fn dims_arg(cfg: &JobConfig) -> CliResult<ProcessDims> {
    Ok(cfg.dims.as_deref().unwrap_or("2,2,2,2").parse()?)
}

fn dashed(s: &str) -> String {
    s.replace(',', "-")
}

/// `<out>/<command>/<label>/`, created, with the job echoed into `config.json`.
fn job_dir(cfg: &JobConfig, default_label: &str) -> CliResult<PathBuf> {
    let root = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let label = cfg.label.clone().unwrap_or_else(|| default_label.to_string());
    if label.is_empty() || label.contains(['/', '\\']) || label == "." || label == ".." {
        return Err(CliError::usage(format!("invalid label '{label}'")));
    }
    let dir = root.join(cfg.command.dir_name()).join(label);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.json"), cfg.to_json() + "\n")?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, body: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, body)?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

pub fn execute(cfg: &JobConfig) -> CliResult<String> {
    match cfg.command {
        CommandName::Vertices => vertices(cfg),
        CommandName::Facets => facets(cfg),
        CommandName::CheckW => check_w(cfg),
        CommandName::Optimize => with_threads(cfg.threads, || optimize_cmd(cfg)),
        CommandName::Boundary => with_threads(cfg.threads, || boundary(cfg)),
        CommandName::FacetReport => facet_report_cmd(cfg),
    }
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    match threads {
        Some(0) => Err(CliError::usage("--threads must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))?
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    if threads.is_some_and(|n| n > 1) {
        eprintln!("built without parallel support; running on one thread");
    }
    f()
}

fn vertices(cfg: &JobConfig) -> CliResult<String> {
    let s = scenario_arg(cfg)?;
    let strategies = enumerate_strategies(&s, DEFAULT_VERTEX_LIMIT)?;
    let dir = job_dir(cfg, &dashed(&s.to_string()))?;
    write(&dir, "vertices.csv", &vertices_csv(&s, &strategies))?;
    Ok(format!("{} vertices", strategies.len()))
}

/// Rows of comma-separated rationals; blank lines and `#` comments are skipped.
fn parse_points(text: &str) -> CliResult<Vec<Vec<Rational>>> {
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<Rational> = line
            .split(',')
            .map(|v| parse_rational(v.trim()))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::usage(format!("points line {}: {e}", n + 1)))?;
        if points.first().is_some_and(|p: &Vec<Rational>| p.len() != row.len()) {
            return Err(CliError::usage(format!("points line {} has {} columns", n + 1, row.len())));
        }
        points.push(row);
    }
    if points.is_empty() {
        return Err(CliError::usage("no points"));
    }
    Ok(points)
}

fn facets(cfg: &JobConfig) -> CliResult<String> {
    if let Some(path) = &cfg.points {
        let points = parse_points(&read(path)?)?;
        let hs = facets_of_points(&points)?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "points".into());
        let dir = job_dir(cfg, &stem)?;
        let mut csv = String::new();
        for k in 0..points[0].len() {
            let _ = write!(csv, "c{k},");
        }
        csv.push_str("bound\n");
        for h in &hs {
            for c in &h.normal {
                let _ = write!(csv, "{},", format_rational(c));
            }
            let _ = writeln!(csv, "{}", format_rational(&h.offset));
        }
        write(&dir, "facets.csv", &csv)?;
        return Ok(format!("{} facets", hs.len()));
    }
    let s = scenario_arg(cfg)?;
    let tables: Vec<_> = enumerate_vertices(&s)?.into_iter().map(|(_, t)| t).collect();
    let list = enumerate_facets(&tables)?;
    let dir = job_dir(cfg, &dashed(&s.to_string()))?;
    write(&dir, "facets.json", &(inequalities_to_json(&list) + "\n"))?;
    if !s.is_binary() {
        return Ok(format!("{} facets", list.len()));
    }
    let mut orbits: Vec<(FacetFamily, usize)> = classify_facets(&list)?
        .into_iter()
        .map(|o| Ok((facet_family(&list[o[0]])?, o.len())))
        .collect::<Result<_, Error>>()?;
    orbits.sort();
    let summary: Vec<String> = orbits.iter().map(|(f, n)| format!("{n} {f}")).collect();
    Ok(format!("{} facets; orbits: {}", list.len(), summary.join(", ")))
}

fn check_w(cfg: &JobConfig) -> CliResult<String> {
    let w = ProcessMatrix::from_json(&read(required(&cfg.w, "w")?)?)?;
    let alice = InstrumentSet::from_json(&read(required(&cfg.alice, "alice")?)?)?;
    let bob = InstrumentSet::from_json(&read(required(&cfg.bob, "bob")?)?)?;
    let ineq = CausalInequality::from_json(&read(required(&cfg.inequality, "inequality")?)?)?;
    let tol = cfg.tol.unwrap_or(VALIDATION_TOL);
    let s = ineq.scenario();
    if (s.inputs_a, s.outputs_a, s.inputs_b, s.outputs_b) != (alice.inputs(), alice.outcomes(), bob.inputs(), bob.outcomes()) {
        return Err(CliError::usage(format!("inequality scenario {s} does not match the instrument sets")));
    }
    let rw = w.validate()?;
    let ra = alice.validate()?;
    let rb = bob.validate()?;
    let mut out = String::new();
    let _ = writeln!(out, "min_eigenvalue {}", sig(rw.min_eigenvalue));
    let _ = writeln!(out, "trace_error {}", sig(rw.trace_error));
    let _ = writeln!(out, "bob_last {}", sig(rw.bob_last));
    let _ = writeln!(out, "alice_last {}", sig(rw.alice_last));
    let _ = writeln!(out, "no_loops {}", sig(rw.no_loops));
    let _ = writeln!(out, "hermiticity {}", sig(rw.hermiticity));
    let _ = writeln!(out, "alice_instruments min_eigenvalue {} normalization {}", sig(ra.min_eigenvalue), sig(ra.normalization_error));
    let _ = writeln!(out, "bob_instruments min_eigenvalue {} normalization {}", sig(rb.min_eigenvalue), sig(rb.normalization_error));
    let dir = job_dir(cfg, "report")?;
    if !rw.passes(tol) || !ra.passes(tol) || !rb.passes(tol) {
        write(&dir, "report.txt", &out)?;
        print!("{out}");
        return Err(CliError::usage(format!("validation failed at tolerance {}", sig(tol))));
    }
    let lhs = ineq.lhs_f64(&correlation_unchecked(&w, &alice, &bob)?);
    let bound = ineq.bound();
    let bound_f = causal_core::polytope::Probability::to_f64(bound);
    let verdict = if lhs > bound_f + tol { "VIOLATES" } else { "RESPECTS" };
    let _ = write!(out, "lhs {}, bound {}, {verdict}", sig(lhs), format_rational(bound));
    write(&dir, "report.txt", &(out.clone() + "\n"))?;
    Ok(out)
}

/// `gyni`, `lgyni`, `weighted:α:β` or `custom:<inequality file>`.
pub fn parse_objective(spec: &str) -> CliResult<Objective> {
    match spec {
        "gyni" => return Ok(Objective::gyni()),
        "lgyni" => return Ok(Objective::lgyni()),
        _ => {}
    }
    if let Some(rest) = spec.strip_prefix("weighted:") {
        let (a, b) = rest.split_once(':').ok_or_else(|| CliError::usage(format!("objective '{spec}': expected weighted:α:β")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .or_else(|| parse_rational(v).ok().map(|r| causal_core::polytope::Probability::to_f64(&r)))
                .ok_or_else(|| CliError::usage(format!("objective '{spec}': bad weight '{v}'")))
        };
        return Ok(Objective::weighted(parse(a)?, parse(b)?));
    }
    if let Some(path) = spec.strip_prefix("custom:") {
        let path = Path::new(path);
        let ineq = CausalInequality::from_json(&read(path)?)?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "inequality".into());
        return Ok(Objective::custom(&name, &ineq));
    }
    Err(CliError::usage(format!("unknown objective '{spec}'")))
}

fn seesaw_options(cfg: &JobConfig) -> CliResult<SeeSawOptions> {
    let mut opts = SeeSawOptions::default();
    if let Some(t) = cfg.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::usage("--tol must be positive"));
        }
        opts.tol = t;
    }
    Ok(opts)
}

fn optimize_cmd(cfg: &JobConfig) -> CliResult<String> {
    let obj = parse_objective(required(&cfg.objective, "objective")?)?;
    let dims = dims_arg(cfg)?;
    let restarts = cfg.restarts.unwrap_or_else(|| default_restarts(dims));
    let seed = cfg.seed.unwrap_or(0);
    let res = optimize(&obj, dims, restarts, seed, &seesaw_options(cfg)?)?;
    let dir = job_dir(cfg, &res.file_stem())?;
    for p in res.write_files(&dir)? {
        eprintln!("wrote {}", p.display());
    }
    let failed = res.per_restart_values.iter().filter(|v| v.is_none()).count();
    Ok(format!(
        "{} dims {} restarts {} seed {}: best {} ({BOUND_KIND}), restart {}, {} failed",
        res.label,
        dims,
        restarts,
        seed,
        sig(res.best_value),
        res.best_restart,
        failed
    ))
}

/// Restarts per angle when `--restarts` is not given.
const BOUNDARY_RESTARTS: usize = 8;

fn boundary(cfg: &JobConfig) -> CliResult<String> {
    let dims = dims_arg(cfg)?;
    let angles = cfg.angles.unwrap_or(64);
    let restarts = cfg.restarts.unwrap_or(BOUNDARY_RESTARTS);
    let seed = cfg.seed.unwrap_or(0);
    let scan = boundary_scan(dims, angles, restarts, seed, &seesaw_options(cfg)?)?;
    let points: Vec<_> = scan.iter().map(|(p, _)| *p).collect();
    let dir = job_dir(cfg, &format!("{}_n{angles}_seed{seed}", dashed(&dims.to_string())))?;
    write(&dir, "boundary.csv", &boundary_csv(&points))?;
    let best = points.iter().map(|p| (p.pa + p.pb) / 2.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(format!("{} points; max (pa+pb)/2 = {} ({BOUND_KIND})", points.len(), sig(best)))
}

fn facet_report_cmd(cfg: &JobConfig) -> CliResult<String> {
    let ineq = CausalInequality::from_json(&read(required(&cfg.inequality, "inequality")?)?)?;
    let s = match &cfg.scenario {
        Some(text) => text.parse()?,
        None => ineq.scenario(),
    };
    let r = facet_report(&ineq, &s)?;
    let mut out = format!("{} saturating, affine dim {}, ", r.saturating_vertex_count, r.saturating_affine_dim);
    if r.is_facet {
        let _ = write!(out, "facet (dim {} of {})", r.saturating_affine_dim, r.polytope_dim);
    } else {
        out.push_str("NOT a facet");
    }
    let _ = write!(
        out,
        "\nmax lhs {}, bound {}, {}",
        format_rational(&r.max_lhs),
        format_rational(ineq.bound()),
        if r.is_valid { "valid" } else { "NOT valid" }
    );
    let stem = cfg.inequality.as_ref().and_then(|p| p.file_stem()).map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let dir = job_dir(cfg, &stem)?;
    write(&dir, "report.txt", &(out.clone() + "\n"))?;
    Ok(out)
}

/// Writes the bundled example data into `dir`.
pub fn export_data(dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files: Vec<(String, String)> = vec![
        ("simple_w.json".into(), ocb_example_w().to_json()),
        ("standard_instruments.json".into(), standard_instruments().to_json()),
        ("wmax_w.json".into(), wmax_qubit(WmaxVariant::Unprimed)?.to_json()),
        ("wmax_prime_w.json".into(), wmax_qubit(WmaxVariant::Primed)?.to_json()),
        ("wmax_mix_0.3_w.json".into(), mix_wmax(0.3)?.to_json()),
        ("maximally_mixed_w.json".into(), ProcessMatrix::maximally_mixed(ProcessDims::qubits()).to_json()),
        ("gyni.json".into(), CausalInequality::gyni(false, false, false, false).to_json()),
        ("lgyni.json".into(), CausalInequality::lgyni(false, false, false, false).to_json()),
    ];
    let names = ["pp", "pm", "mp", "mm"];
    for (name, ineq) in names.iter().zip(CausalInequality::signaling_plane_family()) {
        files.push((format!("signaling_plane_{name}.json"), ineq.to_json()));
    }
    let mut cube = String::from("# vertices of the unit cube\n");
    for k in 0..8 {
        let _ = writeln!(cube, "{},{},{}", k & 1, (k >> 1) & 1, (k >> 2) & 1);
    }
    let mut out = Vec::new();
    for (name, body) in files {
        out.push(write(dir, &name, &(body + "\n"))?);
    }
    out.push(write(dir, "cube.csv", &cube)?);
    Ok(out)
}
