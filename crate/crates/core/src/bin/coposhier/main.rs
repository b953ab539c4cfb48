mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use coposhier::matrices::{self, DiagScaling, Graph, PsiParams, SymMatrix};
use coposhier::sdp::{sdpa, SdpOptions};
use coposhier::sos::{
    check_batch, check_membership, find_min_level, formulate, lasserre_bound, lower, verify_certificate, Certificate,
    ConeId, Family, MembershipOptions, VerdictKind,
};
use coposhier::zeros::{enumerate_zeros, opt_dmd_report};
use coposhier::Error;

const EXIT_ERROR: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;

#[derive(Parser, Debug, Serialize)]
#[command(name = "coposhier", version, about = "Sum-of-squares certificates for copositive matrices")]
struct Cli {
    /// Render aligned text instead of JSON.
    #[arg(long, global = true)]
    table: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Build a matrix and print it in the matrix JSON schema.
    Construct {
        #[command(flatten)]
        input: MatrixArgs,
    },
    /// Decide membership of a matrix in one cone.
    Membership {
        #[command(flatten)]
        input: MatrixArgs,
        #[command(flatten)]
        cone: ConeArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Include the full certificate or dual witness.
        #[arg(long)]
        certificate: bool,
        /// Also write the lowered SDP in SDPA sparse format.
        #[arg(long)]
        dump_sdp: Option<PathBuf>,
    },
    /// Lasserre lower bounds on min x^T M x over the simplex.
    Bound {
        #[command(flatten)]
        input: MatrixArgs,
        /// Single level to evaluate.
        #[arg(long, conflicts_with = "r_max")]
        r: Option<u32>,
        /// Evaluate every level 1..=r_max.
        #[arg(long)]
        r_max: Option<u32>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        certificate: bool,
    },
    /// Smallest level of a cone family containing the matrix.
    MinLevel {
        #[command(flatten)]
        input: MatrixArgs,
        /// Cone family: K, LASD, LASP, LASS or Q.
        #[arg(long)]
        cone: String,
        #[arg(long, default_value_t = 6)]
        r_max: u32,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Zeros of x^T M x on the standard simplex.
    Zeros {
        #[command(flatten)]
        input: MatrixArgs,
    },
    /// Check the optimality conditions (CQC, SCC, SOSC) at every zero.
    Optcheck {
        #[command(flatten)]
        input: MatrixArgs,
    },
    /// Re-expand a stored certificate against a matrix.
    Verify {
        #[command(flatten)]
        input: MatrixArgs,
        /// Certificate JSON, bare or as emitted by `membership --certificate`.
        #[arg(long)]
        cert: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Membership over a grid of matrices, cone families and levels.
    Sweep {
        #[command(flatten)]
        input: MatrixArgs,
        /// Comma-separated cone families.
        #[arg(long, default_value = "K,LASD,LASP,LASS,Q")]
        cones: String,
        #[arg(long, default_value_t = 2)]
        r_max: u32,
        /// Replace the input matrix by this many seeded random matrices.
        #[arg(long)]
        random: Option<usize>,
        /// Dimension of the random matrices.
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (0 lets the runtime decide).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args, Debug, Serialize, Clone)]
struct MatrixArgs {
    /// Built-in matrix: horn, tpsi, graph:<edge-list>, identity:<n>.
    #[arg(long, conflicts_with = "matrix_file")]
    matrix: Option<String>,
    /// Matrix JSON file (bare or as emitted by `construct`).
    #[arg(long)]
    matrix_file: Option<PathBuf>,
    /// Angles of the T(psi) family, five comma-separated values.
    #[arg(long, value_delimiter = ',')]
    psi: Option<Vec<f64>>,
    /// Positive diagonal D applied as D M D.
    #[arg(long, value_delimiter = ',')]
    scale: Option<Vec<f64>>,
}

#[derive(Args, Debug, Serialize, Clone)]
struct ConeArgs {
    /// Cone family: K, LASD, LASP, LASS or Q.
    #[arg(long)]
    cone: String,
    #[arg(long)]
    r: u32,
}

#[derive(Args, Debug, Serialize, Clone)]
struct SolverArgs {
    /// Relative residual accepted for a certificate.
    #[arg(long, default_value_t = 1e-7)]
    tol_res: f64,
    /// Relative negative eigenvalue accepted for a certificate.
    #[arg(long, default_value_t = 1e-8)]
    tol_eig: f64,
    /// Dual margin required for an infeasibility verdict.
    #[arg(long, default_value_t = 1e-6)]
    tol_sep: f64,
    /// Dual-feasibility violation accepted for a witness.
    #[arg(long, default_value_t = 1e-8)]
    tol_witness: f64,
    /// Interior point stopping tolerance.
    #[arg(long, default_value_t = 1e-9)]
    sdp_tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Largest Gram block accepted before refusing the level.
    #[arg(long, default_value_t = 200)]
    max_block: usize,
    /// Round feasible certificates to exact rationals.
    #[arg(long)]
    rational: bool,
}

impl SolverArgs {
    fn options(&self) -> MembershipOptions {
        MembershipOptions {
            res_tol: self.tol_res,
            eig_tol: self.tol_eig,
            sep_tol: self.tol_sep,
            witness_tol: self.tol_witness,
            rational: self.rational,
            max_block_dim: self.max_block,
            sdp: SdpOptions { tol: self.sdp_tol, max_iters: self.max_iters, ..SdpOptions::default() },
        }
    }
}

struct Outcome {
    result: Value,
    unknown: bool,
}

impl Outcome {
    fn definitive(result: Value) -> Self {
        Outcome { result, unknown: false }
    }
}

fn init_logging() {
    let level = match std::env::var("COPOSHIER_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            emit_error("usage", e.to_string().trim_end(), false);
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let header = json!({
        "tool": "coposhier",
        "version": env!("CARGO_PKG_VERSION"),
        "options": serde_json::to_value(&cli.command).unwrap_or(Value::Null),
    });
    match run(&cli.command) {
        Ok(out) => {
            let doc = json!({ "header": header, "result": out.result });
            if cli.table {
                write_stdout(&table::render(&doc["result"]));
            } else {
                write_stdout(&pretty(&doc));
            }
            if out.unknown {
                ExitCode::from(EXIT_UNKNOWN)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            emit_error(error_kind(&e), &format!("{e:#}"), cli.table);
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn emit_error(kind: &str, message: &str, table: bool) {
    if table {
        eprintln!("error ({kind}): {message}");
    }
    write_stdout(&pretty(&json!({ "error": { "kind": kind, "message": message } })));
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn write_stdout(s: &str) {
    use std::io::Write;
    // a closed pipe downstream is not an error of ours
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    match e.downcast_ref::<Error>() {
        Some(Error::LevelCap(_)) => "level_cap",
        Some(Error::Parse(_)) => "parse",
        Some(Error::Solver(_)) => "solver",
        Some(Error::UnsupportedCone(_)) => "unsupported_cone",
        Some(Error::CertificateShape(_)) => "certificate_shape",
        Some(Error::DimensionMismatch { .. } | Error::NotSymmetric(..)) => "invalid_matrix",
        Some(_) => "invalid_input",
        None if e.downcast_ref::<std::io::Error>().is_some() => "io",
        None => "invalid_input",
    }
}

fn run(cmd: &Command) -> anyhow::Result<Outcome> {
    match cmd {
        Command::Construct { input } => {
            let m = load_matrix(input)?;
            Ok(Outcome::definitive(json!({ "matrix": m.to_json() })))
        }
        Command::Membership { input, cone, solver, certificate, dump_sdp } => {
            let m = load_matrix(input)?;
            let id = ConeId::new(cone.cone.parse()?, cone.r)?;
            if let Some(path) = dump_sdp {
                let lowered = lower(&formulate(&m, id)?);
                std::fs::write(path, sdpa::write(&lowered.sdp))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let res = check_membership(&m, id, &solver.options())?;
            let unknown = res.kind() == VerdictKind::Unknown;
            Ok(Outcome { result: res.to_json(*certificate), unknown })
        }
        Command::Bound { input, r, r_max, solver, certificate } => {
            let m = load_matrix(input)?;
            let levels: Vec<u32> = match (r, r_max) {
                (Some(r), _) => vec![*r],
                (None, Some(rm)) => (1..=*rm).collect(),
                (None, None) => bail!("either --r or --r-max is required"),
            };
            let opts = solver.options();
            let mut out = Vec::new();
            for r in levels {
                out.push(lasserre_bound(&m, r, &opts)?.to_json(*certificate));
            }
            Ok(Outcome::definitive(json!({ "bounds": out })))
        }
        Command::MinLevel { input, cone, r_max, solver } => {
            let m = load_matrix(input)?;
            let family: Family = cone.parse()?;
            let s = find_min_level(&m, family, *r_max, &solver.options())?;
            let per_level: Vec<Value> =
                s.per_level.iter().map(|(r, k)| json!({ "r": r, "verdict": k.to_string() })).collect();
            let unknown = s.level.is_none() && s.per_level.iter().any(|(_, k)| *k == VerdictKind::Unknown);
            Ok(Outcome {
                result: json!({
                    "family": family.name(),
                    "level": s.level,
                    "per_level": per_level,
                    "result": s.result.map(|r| r.to_json(false)),
                }),
                unknown,
            })
        }
        Command::Zeros { input } => {
            let m = load_matrix(input)?;
            match enumerate_zeros(&m) {
                Ok(z) => Ok(Outcome::definitive(json!({ "copositive": true, "zero_set": z.to_json() }))),
                Err(Error::NonCopositive { witness, value }) => Ok(Outcome::definitive(json!({
                    "copositive": false,
                    "witness": witness,
                    "value": value,
                }))),
                Err(e) => Err(e.into()),
            }
        }
        Command::Optcheck { input } => {
            let m = load_matrix(input)?;
            Ok(Outcome::definitive(opt_dmd_report(&m)?.to_json()))
        }
        Command::Verify { input, cert, solver } => {
            let m = load_matrix(input)?;
            let v = read_json(cert)?;
            let body = find_certificate(&v).ok_or_else(|| anyhow!("no certificate object in {}", cert.display()))?;
            let c = Certificate::from_json(body)?;
            let (residual, min_eig) = verify_certificate(&c, &m)?;
            let scale = m.max_abs().max(1.0);
            let valid = residual <= solver.tol_res * scale && min_eig >= -solver.tol_eig * scale;
            Ok(Outcome::definitive(json!({
                "cone": c.cone.to_string(),
                "residual": residual,
                "min_eig": min_eig,
                "exact": c.exact,
                "valid": valid,
            })))
        }
        Command::Sweep { input, cones, r_max, random, dim, seed, jobs, solver } => {
            let mats: Vec<SymMatrix> = match random {
                Some(count) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    (0..*count).map(|_| matrices::random_mixture(&mut rng, *dim)).collect()
                }
                None => vec![load_matrix(input)?],
            };
            let families = cones.split(',').map(str::parse).collect::<Result<Vec<Family>, _>>()?;
            let mut cells = Vec::new();
            for (mi, m) in mats.iter().enumerate() {
                for f in &families {
                    for r in f.levels_up_to(*r_max) {
                        cells.push((mi, m.clone(), ConeId::new(*f, r)?));
                    }
                }
            }
            let queries: Vec<(SymMatrix, ConeId)> = cells.iter().map(|(_, m, c)| (m.clone(), *c)).collect();
            let results = run_pool(*jobs, || check_batch(&queries, &solver.options()))?;
            let mut unknown = false;
            let records = cells
                .iter()
                .zip(results)
                .map(|((mi, _, cone), res)| {
                    let mut rec = json!({ "matrix": mi, "family": cone.family().name(), "r": cone.level() });
                    match res {
                        Ok(r) => {
                            unknown |= r.kind() == VerdictKind::Unknown;
                            rec["verdict"] = json!(r.kind().to_string());
                            rec["lambda"] = json!(r.diagnostics.lambda);
                            rec["residual"] = json!(r.diagnostics.rel_residual);
                            rec["margin"] = json!(r.margin().filter(|x| x.is_finite()));
                        }
                        Err(e) => {
                            rec["verdict"] = json!("error");
                            rec["error"] = json!(e.to_string());
                        }
                    }
                    rec
                })
                .collect::<Vec<_>>();
            let matrices_json: Vec<Value> =
                if random.is_some() { mats.iter().map(SymMatrix::to_json).collect() } else { Vec::new() };
            Ok(Outcome { result: json!({ "records": records, "matrices": matrices_json }), unknown })
        }
    }
}

#[cfg(feature = "parallel")]
fn run_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().context("building worker pool")?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn run_pool<T: Send>(_jobs: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    Ok(f())
}

fn read_json(path: &PathBuf) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())).into())
}

/// Accepts a bare certificate, `{"certificate": ...}` or a full membership document.
fn find_certificate(v: &Value) -> Option<&Value> {
    if v.get("gram").is_some() && v.get("cone").is_some() {
        return Some(v);
    }
    v.get("certificate").or_else(|| v.get("result").and_then(|r| r.get("certificate")))
}

fn load_matrix(a: &MatrixArgs) -> anyhow::Result<SymMatrix> {
    let m = match (&a.matrix, &a.matrix_file) {
        (Some(name), _) => builtin(name, a.psi.as_deref())?,
        (None, Some(path)) => {
            let v = read_json(path)?;
            let body = v.get("matrix").or_else(|| v.get("result").and_then(|r| r.get("matrix"))).unwrap_or(&v);
            SymMatrix::from_json(body)?
        }
        (None, None) => bail!("one of --matrix or --matrix-file is required"),
    };
    match &a.scale {
        Some(d) => Ok(matrices::scale(&m, &DiagScaling::new(d.clone())?)?),
        None => Ok(m),
    }
}

fn builtin(name: &str, psi: Option<&[f64]>) -> anyhow::Result<SymMatrix> {
    let (kind, arg) = name.split_once(':').unwrap_or((name, ""));
    match kind.to_ascii_lowercase().as_str() {
        "horn" => Ok(matrices::horn()),
        "tpsi" => {
            let p = match psi {
                Some(v) => PsiParams::new(v.try_into().map_err(|_| anyhow!("--psi needs five values"))?)?,
                None => PsiParams::uniform_tenth(),
            };
            Ok(matrices::t_psi(&p))
        }
        "graph" => Ok(matrices::graph_matrix(&Graph::parse_edge_list(arg, None)?)?),
        "identity" => {
            let n: usize = arg.parse().map_err(|_| Error::Parse(format!("bad identity size `{arg}`")))?;
            if n == 0 {
                bail!(Error::Parse("identity size must be positive".into()));
            }
            Ok(SymMatrix::identity(n))
        }
        _ => bail!(Error::Parse(format!("unknown built-in matrix `{name}`"))),
    }
}
