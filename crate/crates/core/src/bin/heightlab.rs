//! `heightlab` command-line interface.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error, 3 budget exceeded.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use heightlab::bijections::{bijection_check, coloring_bijectivity_check, to_coloring, ColoringDomain};
use heightlab::cutsets::{enumerate_omcut, level_set, RegularityProfile};
use heightlab::height::{make_bc, BcRequest, BoundaryCondition, HeightFunction, Model};
use heightlab::oracle::{exact_distribution, Budget, Statistic};
use heightlab::report::{
    distribution_csv, empirical_csv, histogram_csv, levelset_geometry, table_csv, write_atomic, ExperimentManifest,
};
use heightlab::sampler::{batch_statistics, draw, Method, RandomSource};
use heightlab::torus::{parse_torus, TorusSpec, Vertex};
use heightlab::transforms::{expansion_audit, omega, t1, t2, t_combined, DEFAULT_LAMBDA};
use heightlab::walls::{wall_audit, LinearLayout, WallParams};
use heightlab::Error;

#[derive(Parser, Debug)]
#[command(name = "heightlab", version, about = "Random height functions on tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Space {
    /// Side lengths, e.g. "6", "4x4", "16x16x2x2".
    #[arg(long, default_value = "6")]
    torus: String,
    /// one-point[@v], zero, box, zero-one, or explicit:v=h;v=h.
    #[arg(long, default_value = "one-point")]
    bc: String,
    /// hom or lip.
    #[arg(long, default_value = "hom")]
    model: String,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// "-" for standard output, a file name ending in .csv/.json, or a
    /// directory that receives runs/<timestamp>-<hash>/.
    #[arg(long, default_value = "runs")]
    out: String,
    /// Worker thread cap.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum MethodArg {
    Cftp,
    Mcmc,
    Yadin,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum TransformArg {
    T1,
    T2,
    T,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw samples and summarize statistics.
    Sample {
        #[command(flatten)]
        space: Space,
        #[arg(long, value_enum, default_value = "cftp")]
        method: MethodArg,
        #[arg(long, default_value_t = 1000)]
        sweeps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: u64,
        /// Comma-separated: range, height@v, levelset@v, even-zero, walls.
        #[arg(long, default_value = "range")]
        stats: String,
        /// Also write every sample as JSON lines.
        #[arg(long)]
        dump: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Exact distribution of a statistic by exhaustive enumeration.
    Enumerate {
        #[command(flatten)]
        space: Space,
        #[arg(long, default_value = "range")]
        stat: String,
        #[command(flatten)]
        output: Output,
    },
    /// Odd minimal cutsets separating x from B, or the level sets of a function.
    Cutsets {
        #[command(flatten)]
        space: Space,
        /// Vertex as an index or comma-separated coordinates.
        #[arg(long)]
        x: Option<String>,
        #[arg(long, conflicts_with_all = ["profile", "geometry"])]
        enumerate: bool,
        /// Profile of LS(f, x, B) for the function in --in.
        #[arg(long, requires = "input")]
        profile: bool,
        /// Every level set of the function in --in, as JSON.
        #[arg(long, requires = "input")]
        geometry: bool,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = usize::MAX)]
        max_edges: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Expansion audit of a transformation over Ω_{x,L}.
    Audit {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        x: String,
        #[arg(long = "L")]
        edges: usize,
        #[arg(long, value_enum, default_value = "t1")]
        transform: TransformArg,
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        axis: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Walls on a linear torus: one profile, or exhaustive histograms.
    Walls {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        audit: bool,
        #[arg(long = "in", required_unless_present = "audit")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = WallParams::default().beta)]
        beta: f64,
        #[arg(long, default_value_t = WallParams::default().gamma)]
        gamma: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Exhaustive check of the Lip(G) <-> Hom(G x Z_2) bijection.
    BijectionCheck {
        /// The base torus G.
        #[arg(long, default_value = "4")]
        g: String,
        #[arg(long, default_value = "one-point")]
        bc: String,
        #[command(flatten)]
        output: Output,
    },
    /// f mod 3, or a check of the coloring correspondence.
    Color {
        #[command(flatten)]
        space: Space,
        #[arg(long = "in", required_unless_present = "check")]
        input: Option<PathBuf>,
        /// Compare Hom and proper colorings by enumeration.
        #[arg(long)]
        check: bool,
        /// Run the check on a non-periodic box, one-point BC at its first corner.
        #[arg(long = "box", requires = "check")]
        box_dims: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Ball volumes and boundary sizes around the origin.
    Isoperimetry {
        #[arg(long, default_value = "4x4")]
        torus: String,
        #[arg(long, default_value_t = 4)]
        tmax: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Rerun a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded { .. } | Error::CoalescenceBudgetExceeded(_) => ExitCode::from(3),
                Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(args: Vec<String>) -> CliResult<()> {
    let cli = match Cli::try_parse_from(std::iter::once("heightlab".to_string()).chain(args.iter().cloned())) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(Failure::Usage(e.to_string())),
    };
    let budget = Budget::from_env();
    match cli.command {
        Command::Sample { space, method, sweeps, seed, samples, stats, dump, output } => {
            threads(&output)?;
            let (torus, bc, model) = resolve(&space)?;
            let stats = parse_stats(&stats, &torus)?;
            let method = match method {
                MethodArg::Cftp => Method::Cftp,
                MethodArg::Mcmc => Method::Mcmc { sweeps },
                MethodArg::Yadin => Method::ViaYadin,
            };
            let rng = RandomSource::new(seed);
            let summary = batch_statistics(&bc, model, rng, samples, &stats, &method)?;
            let mut files = vec![("stats.csv".to_string(), empirical_csv(&summary)?.into_bytes())];
            files.push(("summary.json".to_string(), json(&summary).into_bytes()));
            if dump {
                let mut lines = String::new();
                for i in 0..samples {
                    lines.push_str(&draw(&bc, model, rng.child(i), &method)?.to_json());
                    lines.push('\n');
                }
                files.push(("samples.jsonl".to_string(), lines.into_bytes()));
            }
            let mut m = manifest(&args, "sample", &torus, Some(&space));
            m.method = Some(format!("{method:?}"));
            m.seed = Some(seed);
            m.samples = Some(samples);
            m.statistics = stats.iter().map(|s| s.label()).collect();
            emit(&output.out, m, files)
        }
        Command::Enumerate { space, stat, output } => {
            threads(&output)?;
            let (torus, bc, model) = resolve(&space)?;
            let statistic = Statistic::parse(&stat, &torus)?;
            let dist = exact_distribution(&bc, model, &statistic)?;
            let mut m = manifest(&args, "enumerate", &torus, Some(&space));
            m.statistics = vec![statistic.label()];
            emit(&output.out, m, vec![("dist.csv".into(), distribution_csv(&dist)?.into_bytes())])
        }
        Command::Cutsets { space, x, enumerate: _, profile, geometry, input, max_edges, output } => {
            threads(&output)?;
            let (torus, bc, _) = resolve(&space)?;
            let m = manifest(&args, "cutsets", &torus, Some(&space));
            if geometry {
                let f = load_function(input.as_deref(), &torus)?;
                let geo = levelset_geometry(&f, &bc)?;
                return emit(&output.out, m, vec![("levelsets.json".into(), json(&geo).into_bytes())]);
            }
            let x = parse_vertex(x.as_deref().ok_or_else(|| usage("--x is required"))?, &torus)?;
            let mut rows = Vec::new();
            if profile {
                let f = load_function(input.as_deref(), &torus)?;
                if let Some(gamma) = level_set(&f, x, &bc)? {
                    rows.push(profile_row(0, &gamma.profile()));
                }
            } else {
                let mut k = 0;
                enumerate_omcut(&torus, &[x], bc.vertices(), bc.anchor(), max_edges, budget, |gamma| {
                    rows.push(profile_row(k, &gamma.profile()));
                    k += 1;
                    std::ops::ControlFlow::Continue(())
                })?;
            }
            let csv = table_csv(&["index", "edges", "r_total", "exposed", "trivial"], rows)?;
            emit(&output.out, m, vec![("cutsets.csv".into(), csv.into_bytes())])
        }
        Command::Audit { space, x, edges, transform, lambda, axis, output } => {
            threads(&output)?;
            let (torus, bc, _) = resolve(&space)?;
            let x = parse_vertex(&x, &torus)?;
            let members = omega(&bc, x, edges, budget)?;
            let audit = expansion_audit(&bc, &members, |f| {
                Ok(match transform {
                    TransformArg::T1 => t1(f, &bc, x, axis)?.1,
                    TransformArg::T2 => t2(f, &bc, x, axis)?.1,
                    TransformArg::T => t_combined(f, &bc, x, axis, lambda)?.1,
                })
            })?;
            let m = manifest(&args, "audit", &torus, Some(&space));
            emit(&output.out, m, vec![("audit.json".into(), json(&audit).into_bytes())])
        }
        Command::Walls { space, audit, input, beta, gamma, output } => {
            threads(&output)?;
            let (torus, bc, _) = resolve(&space)?;
            let layout = LinearLayout::from_bc(&bc)?;
            let m = manifest(&args, "walls", &torus, Some(&space));
            if audit {
                let report = wall_audit(&bc, WallParams { beta, gamma }, budget)?;
                let files = vec![
                    ("wall_counts.csv".into(), histogram_csv("walls", &report.wall_counts)?.into_bytes()),
                    ("balances.csv".into(), histogram_csv("balance", &report.balances)?.into_bytes()),
                    ("wall_audit.json".into(), json(&report).into_bytes()),
                ];
                return emit(&output.out, m, files);
            }
            let f = load_function(input.as_deref(), &torus)?;
            emit(&output.out, m, vec![("walls.json".into(), json(&layout.profile(&f)).into_bytes())])
        }
        Command::BijectionCheck { g, bc, output } => {
            threads(&output)?;
            let torus = torus_arg(&g)?;
            let base = make_bc(&torus, &parse_bc(&bc, &torus)?, Model::Lip)?;
            let report = bijection_check(&base, budget)?;
            let m = manifest(&args, "bijection-check", &torus, None);
            emit(&output.out, m, vec![("bijection.json".into(), json(&report).into_bytes())])
        }
        Command::Color { space, input, check, box_dims, output } => {
            threads(&output)?;
            let torus = torus_arg(&space.torus)?;
            let m = manifest(&args, "color", &torus, Some(&space));
            if check {
                let domain = match box_dims {
                    Some(dims) => ColoringDomain::Box { dims: parse_dims(&dims)?, boundary: vec![(0, 0)] },
                    None => ColoringDomain::Torus(make_bc(&torus, &parse_bc(&space.bc, &torus)?, Model::Hom)?),
                };
                let report = coloring_bijectivity_check(&domain, budget)?;
                return emit(&output.out, m, vec![("coloring_check.json".into(), json(&report).into_bytes())]);
            }
            let f = load_function(input.as_deref(), &torus)?;
            let coloring = to_coloring(&f);
            #[derive(Serialize)]
            struct ColoringFile<'a> {
                dims: &'a [usize],
                colors: &'a [u8],
                proper: bool,
            }
            let body = ColoringFile {
                dims: f.torus.dims(),
                colors: &coloring.colors,
                proper: coloring.is_proper(&f.torus.to_graph()),
            };
            emit(&output.out, m, vec![("coloring.json".into(), json(&body).into_bytes())])
        }
        Command::Isoperimetry { torus, tmax, output } => {
            let torus = torus_arg(&torus)?;
            let delta = torus.degree() as u64;
            let mut cumulative = 0u64;
            let mut rows = Vec::new();
            for r in 0..=tmax {
                let b = torus.ball_metrics(r);
                cumulative += b.boundary_edges;
                rows.push(vec![
                    r.to_string(),
                    b.volume.to_string(),
                    b.boundary_edges.to_string(),
                    b.top_size.to_string(),
                    (b.boundary_edges == delta * b.top_size).to_string(),
                    cumulative.to_string(),
                    (delta * b.volume <= 2 * cumulative && cumulative <= delta * b.volume).to_string(),
                ]);
            }
            let header = ["r", "volume", "s_r", "top", "s_r_is_delta_top", "cumulative_s", "sandwich"];
            let m = manifest(&args, "isoperimetry", &torus, None);
            emit(&output.out, m, vec![("isoperimetry.csv".into(), table_csv(&header, rows)?.into_bytes())])
        }
        Command::Replay { manifest, out } => {
            let m = ExperimentManifest::load(&manifest)?;
            if m.subcommand == "replay" {
                return Err(usage("a replay manifest cannot be replayed"));
            }
            run(with_out(&m.command, &out))
        }
    }
}

fn usage(msg: &str) -> Failure {
    Failure::Usage(format!("error: {msg}"))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn threads(output: &Output) -> CliResult<()> {
    if let Some(n) = output.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Failure::Run(Error::Precondition(e.to_string())))?;
    }
    Ok(())
}

fn torus_arg(text: &str) -> CliResult<TorusSpec> {
    let (torus, reordered) = parse_torus(text)?;
    if reordered {
        eprintln!("warning: torus sides reordered to {:?}", torus.dims());
    }
    Ok(torus)
}

fn parse_dims(text: &str) -> CliResult<Vec<usize>> {
    text.split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>().map_err(|_| Failure::Run(Error::Parse(format!("bad side '{p}'")))))
        .collect()
}

fn resolve(space: &Space) -> CliResult<(TorusSpec, BoundaryCondition, Model)> {
    let torus = torus_arg(&space.torus)?;
    let model: Model = space.model.parse()?;
    let bc = make_bc(&torus, &parse_bc(&space.bc, &torus)?, model)?;
    Ok((torus, bc, model))
}

fn parse_vertex(text: &str, torus: &TorusSpec) -> CliResult<Vertex> {
    Ok(match Statistic::parse(&format!("height@{text}"), torus)? {
        Statistic::HeightAt(v) => v,
        _ => unreachable!("height@ always parses to HeightAt"),
    })
}

fn parse_bc(text: &str, torus: &TorusSpec) -> CliResult<BcRequest> {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix("one-point@") {
        return Ok(BcRequest::OnePoint(parse_vertex(rest, torus)?));
    }
    if let Some(rest) = t.strip_prefix("explicit:") {
        let pairs = rest
            .split(';')
            .map(|p| {
                let (v, h) = p.split_once('=').ok_or_else(|| Error::Parse(format!("bad pair '{p}'")))?;
                let v = parse_vertex(v, torus).map_err(|_| Error::Parse(format!("bad vertex '{v}'")))?;
                let h: i64 = h.trim().parse().map_err(|_| Error::Parse(format!("bad height '{h}'")))?;
                Ok((v, h))
            })
            .collect::<heightlab::Result<Vec<_>>>()?;
        return Ok(BcRequest::Explicit(pairs));
    }
    match t {
        "one-point" => Ok(BcRequest::OnePoint(0)),
        "zero" => Ok(BcRequest::Zero),
        "box" => Ok(BcRequest::BoxBoundary),
        "zero-one" => Ok(BcRequest::ZeroOne(BoundaryCondition::box_boundary(torus)?.vertices().to_vec())),
        _ => Err(Failure::Run(Error::Parse(format!("unknown boundary condition '{t}'")))),
    }
}

/// Splits on commas, gluing coordinate lists back onto `height@` and
/// `levelset@` tokens.
fn parse_stats(text: &str, torus: &TorusSpec) -> CliResult<Vec<Statistic>> {
    let mut tokens: Vec<String> = Vec::new();
    for part in text.split(',') {
        let glue = part.trim().chars().all(|c| c.is_ascii_digit())
            && tokens.last().is_some_and(|t| t.starts_with("height@") || t.starts_with("levelset@"));
        match tokens.last_mut() {
            Some(last) if glue => {
                last.push(',');
                last.push_str(part.trim());
            }
            _ => tokens.push(part.trim().to_string()),
        }
    }
    Ok(tokens.iter().map(|t| Statistic::parse(t, torus)).collect::<heightlab::Result<_>>()?)
}

fn load_function(path: Option<&Path>, torus: &TorusSpec) -> CliResult<HeightFunction> {
    let path = path.ok_or_else(|| usage("--in is required"))?;
    let f = HeightFunction::from_json(&std::fs::read_to_string(path).map_err(Error::from)?)?;
    if f.torus != *torus {
        return Err(usage(&format!("--in holds a function on {:?}, expected {:?}", f.torus.dims(), torus.dims())));
    }
    Ok(f)
}

fn profile_row(k: usize, p: &RegularityProfile) -> Vec<String> {
    vec![
        k.to_string(),
        p.edge_count.to_string(),
        p.r_total.to_string(),
        p.exposed.to_string(),
        p.trivial.to_string(),
    ]
}

fn manifest(args: &[String], sub: &str, torus: &TorusSpec, space: Option<&Space>) -> ExperimentManifest {
    let mut m = ExperimentManifest::new(args.to_vec(), sub);
    m.torus = torus.dims().to_vec();
    if let Some(s) = space {
        m.bc = Some(s.bc.clone());
        m.model = Some(s.model.clone());
    }
    m
}

/// `args` with the value of `--out` replaced (or appended).
fn with_out(args: &[String], out: &str) -> Vec<String> {
    let mut result = Vec::with_capacity(args.len() + 2);
    let mut i = 0;
    let mut replaced = false;
    while i < args.len() {
        if args[i] == "--out" {
            result.push("--out".to_string());
            result.push(out.to_string());
            replaced = true;
            i += 2;
            continue;
        }
        if args[i].starts_with("--out=") {
            result.push(format!("--out={out}"));
            replaced = true;
        } else {
            result.push(args[i].clone());
        }
        i += 1;
    }
    if !replaced {
        result.push("--out".to_string());
        result.push(out.to_string());
    }
    result
}

/// Writes data files and the manifest according to `--out`.
fn emit(out: &str, mut m: ExperimentManifest, files: Vec<(String, Vec<u8>)>) -> CliResult<()> {
    m.outputs = files.iter().map(|f| f.0.clone()).collect();
    if out == "-" {
        let mut stdout = std::io::stdout().lock();
        let data: Vec<&(String, Vec<u8>)> = files.iter().filter(|f| f.0.ends_with(".csv")).collect();
        let chosen = if data.is_empty() { files.iter().take(1).collect() } else { data };
        for (k, (_, bytes)) in chosen.iter().enumerate() {
            if k > 0 {
                stdout.write_all(b"\n").map_err(Error::from)?;
            }
            stdout.write_all(bytes).map_err(Error::from)?;
        }
        return Ok(());
    }
    let path = Path::new(out);
    let single_file = matches!(path.extension().and_then(|e| e.to_str()), Some("csv" | "json" | "jsonl"));
    if single_file {
        if let (Some(first), Some(name)) = (m.outputs.first_mut(), path.file_name()) {
            *first = name.to_string_lossy().into_owned();
        }
        write_atomic(path, &files[0].1)?;
        for (name, bytes) in files.iter().skip(1) {
            write_atomic(&path.with_file_name(name), bytes)?;
        }
        let mut manifest_path = path.as_os_str().to_owned();
        manifest_path.push(".manifest.json");
        write_atomic(Path::new(&manifest_path), m.to_json().as_bytes())?;
        return Ok(());
    }
    let dir = path.join(m.run_name());
    for (name, bytes) in &files {
        write_atomic(&dir.join(name), bytes)?;
    }
    write_atomic(&dir.join("manifest.json"), m.to_json().as_bytes())?;
    eprintln!("wrote {}", dir.display());
    Ok(())
}
