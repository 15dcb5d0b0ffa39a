//! `distfe`: generate meshes and certify distributional finite element complexes.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use distfe::oracle::OracleConfig;
use distfe::report::{certify, to_csv, to_json, CertifyOptions};
use distfe::{generate_mesh, load_mesh, ComplexKind, Error, GeneratorKind, SimplicialComplex};

const EXIT_CERTIFICATION: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_ASSEMBLY: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "distfe", version, about = "Distributional Hessian and divdiv complexes with exact certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mesh generation and inspection.
    Mesh {
        #[command(subcommand)]
        command: MeshCommand,
    },
    /// Assemble complexes on a mesh and certify their structure.
    Certify(CertifyArgs),
}

#[derive(Subcommand, Debug)]
enum MeshCommand {
    /// Write a generated suite mesh in the text format.
    Gen {
        /// Generator name, e.g. `cube-with-tunnel`.
        #[arg(long)]
        kind: String,
        /// Cells per axis.
        #[arg(long)]
        res: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print simplex counts and Betti numbers of a mesh.
    Info {
        /// Mesh file or `gen:<kind>:<resolution>`.
        mesh: String,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args, Debug)]
struct CertifyArgs {
    /// Mesh file or `gen:<kind>:<resolution>`.
    #[arg(long)]
    mesh: String,
    /// Comma-separated complex names, or `all` for every complex of the mesh dimension.
    #[arg(long, default_value = "all")]
    kinds: String,
    /// Seed of the oracle's random test fields.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Oracle trials per operator.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Inject a single-entry fault before certifying: `<operator>` adds one
    /// to an entry, `flip-sign[:<operator>]` negates one.
    #[arg(long)]
    fault: Option<String>,
}

/// Failure carrying its process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::Parse { .. } | Error::Invalid(_) | Error::Io(_)) => EXIT_PARSE,
            Some(_) => EXIT_ASSEMBLY,
            None => EXIT_PARSE,
        };
        Failure { code, error }
    }
}

fn resolve_mesh(source: &str) -> anyhow::Result<SimplicialComplex> {
    if let Some(rest) = source.strip_prefix("gen:") {
        let (kind, res) = rest.rsplit_once(':').context("expected `gen:<kind>:<resolution>`")?;
        let kind = GeneratorKind::from_str(kind)?;
        let res: usize = res.parse().map_err(|_| Error::Invalid(format!("bad resolution `{res}`")))?;
        return Ok(generate_mesh(kind, res)?);
    }
    Ok(load_mesh(source)?)
}

fn parse_kinds(list: &str, dim: usize) -> anyhow::Result<Vec<ComplexKind>> {
    if list == "all" {
        return Ok(ComplexKind::for_dim(dim));
    }
    let kinds = list.split(',').map(|s| ComplexKind::from_str(s.trim())).collect::<Result<Vec<_>, _>>()?;
    if let Some(k) = kinds.iter().find(|k| k.dim() != dim) {
        return Err(Error::Invalid(format!("{k} needs a {}D mesh, got {dim}D", k.dim())).into());
    }
    Ok(kinds)
}

fn emit(text: &str, output: Option<&PathBuf>) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Mesh { command: MeshCommand::Gen { kind, res, output } } => {
            let kind = GeneratorKind::from_str(&kind).map_err(anyhow::Error::from)?;
            let mesh = generate_mesh(kind, res).map_err(anyhow::Error::from)?;
            emit(mesh.to_text().trim_end(), Some(&output))?;
            let counts = mesh.counts();
            println!("simplices {:?} interior {:?}", counts.total, counts.interior);
        }
        Command::Mesh { command: MeshCommand::Info { mesh } } => {
            let m = resolve_mesh(&mesh)?;
            let counts = m.counts();
            let info = serde_json::json!({
                "mesh": mesh,
                "dim": counts.dim,
                "simplices": counts.total,
                "interior": counts.interior,
                "betti": distfe::homology_dims(&m, distfe::OrientationVariant::Standard).0,
                "relative_betti": distfe::homology_dims(&m, distfe::OrientationVariant::Relative).0,
            });
            emit(&serde_json::to_string_pretty(&info).map_err(anyhow::Error::from)?, None)?;
        }
        Command::Certify(args) => {
            let mesh = resolve_mesh(&args.mesh)?;
            let kinds = parse_kinds(&args.kinds, mesh.dim())?;
            let opts = CertifyOptions {
                oracle: OracleConfig { trials: args.trials, seed: args.seed, ..OracleConfig::default() },
                fault: args.fault.clone(),
            };
            let reports = certify(&mesh, &args.mesh, &kinds, &opts).map_err(anyhow::Error::from)?;
            let text = match args.format {
                Format::Json => to_json(&reports),
                Format::Csv => to_csv(&reports),
            }
            .map_err(anyhow::Error::from)?;
            emit(text.trim_end(), args.output.as_ref())?;
            for r in reports.iter().filter(|r| !r.pass) {
                log::error!("{} failed certification on {}", r.kind, r.mesh);
            }
            if reports.iter().any(|r| !r.pass) {
                return Err(Failure { code: EXIT_CERTIFICATION, error: anyhow::anyhow!("certification failed") });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BGG_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
