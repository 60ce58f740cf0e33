//! `tropcount`: fans, map validation, moduli complexes, embeddings and curve counts.

mod input;
mod svg;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use tropcount::counting::{count_with_retries, kontsevich_oracle, CountError, CountProblem, CountResult};
use tropcount::maps::{validate, MapJson, TropicalStableMap};
use tropcount::moduli::{assemble_complex, gkm_embedding, ConeComplex, EmbeddedFan};

const EXIT_INVALID: u8 = 2;
const EXIT_NONGENERIC: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "tropcount", version, about = "Tropical stable maps to toric fans and their counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a fan as JSON.
    Fan {
        #[arg(long)]
        fan: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a map JSON file against every condition; exit 2 if any fails.
    Validate {
        #[arg(long)]
        fan: String,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble the moduli cone complex (fan rank at most 2).
    Complex {
        #[command(flatten)]
        data: DataArgs,
        /// Write the embedded fan as SVG (rank-2 embeddings only).
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Leg used for the embedding in the SVG.
        #[arg(long, default_value_t = 1)]
        root: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed the moduli complex as a fan via leg distances and a root position.
    Embed {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 1)]
        root: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count rigid maps through generic constraints.
    Count {
        #[command(flatten)]
        data: DataArgs,
        /// `basis;translation` for the next trivial leg (repeatable); other legs are points.
        #[arg(long)]
        subspace: Vec<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, env = "TROPCOUNT_THREADS")]
        threads: Option<usize>,
        #[arg(long, default_value_t = 5)]
        retries: usize,
        /// Bound on numerators and denominators of random translations.
        #[arg(long, default_value_t = 1000)]
        height: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Independent reference values.
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
}

#[derive(Subcommand, Debug)]
enum Oracle {
    /// Rational plane curves of degree d through 3d - 1 points.
    Kontsevich { degree: u64 },
}

#[derive(Args, Debug)]
struct DataArgs {
    /// p1, p2, p3, p1xp1, or a fan JSON file.
    #[arg(long)]
    fan: String,
    /// Shorthand such as p2-degree:3, or a JSON list of contact vectors.
    #[arg(long)]
    contacts: String,
    /// Number of marked legs with trivial contact.
    #[arg(long, default_value_t = 0)]
    points: usize,
}

fn emit(out: &Option<PathBuf>, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn embedding_json(e: &EmbeddedFan) -> serde_json::Value {
    let text = |v: &Vec<num_bigint::BigInt>| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    json!({
        "schema": tropcount::SCHEMA,
        "ambient_rank": e.ambient_rank,
        "root_label": e.root_label,
        "rays": e.image_rays.iter().map(text).collect::<Vec<_>>(),
        "cones": e.image_cones,
        "maximal": e.maximal,
    })
}

fn build_complex(data: &DataArgs) -> Result<ConeComplex> {
    let fan = input::parse_fan(&data.fan)?;
    let gamma = input::discrete_data(fan, &data.contacts, data.points)?;
    Ok(assemble_complex(&gamma)?)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Fan { fan, out } => {
            let f = input::parse_fan(&fan)?;
            emit(&out, &serde_json::to_value(f.to_json())?)?;
        }
        Command::Validate { fan, map, out } => {
            let f = input::parse_fan(&fan)?;
            let text = std::fs::read_to_string(&map).with_context(|| format!("reading {}", map.display()))?;
            let j: MapJson = serde_json::from_str(&text).context("parsing map JSON")?;
            let m = TropicalStableMap::from_json(&f, &j)?;
            let report = validate(&f, &m);
            let violations: Vec<_> = report
                .violations
                .iter()
                .map(|v| json!({"condition": v.condition(), "detail": v.to_string()}))
                .collect();
            emit(&out, &json!({"schema": tropcount::SCHEMA, "valid": report.is_valid(), "violations": violations}))?;
            if !report.is_valid() {
                for v in &report.violations {
                    eprintln!("violated {}: {v}", v.condition());
                }
                return Ok(EXIT_INVALID);
            }
        }
        Command::Complex { data, svg, root, out } => {
            let c = build_complex(&data)?;
            emit(&out, &serde_json::to_value(c.to_json())?)?;
            if let Some(path) = svg {
                let e = gkm_embedding(&c, root)?;
                if e.ambient_rank != 2 {
                    bail!("SVG output needs a rank-2 embedding, this one has rank {}", e.ambient_rank);
                }
                std::fs::write(&path, svg::fan_svg(&e)).with_context(|| format!("writing {}", path.display()))?;
            }
            eprintln!("f-vector = {:?}", c.f_vector());
        }
        Command::Embed { data, root, out } => {
            let c = build_complex(&data)?;
            let e = gkm_embedding(&c, root)?;
            emit(&out, &embedding_json(&e))?;
        }
        Command::Count { data, subspace, seed, threads, retries, height, out } => {
            let fan = input::parse_fan(&data.fan)?;
            let gamma = input::discrete_data(fan.clone(), &data.contacts, data.points)?;
            let specs = subspace.iter().map(|s| input::parse_subspace(s, fan.rank())).collect::<Result<Vec<_>>>()?;
            let threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let result: CountResult = match count_with_retries(&gamma, &specs, seed, height, retries, threads) {
                Ok(r) => r,
                Err(e @ CountError::NonGeneric(_)) => {
                    eprintln!("error: {e} (after {} seeds)", retries + 1);
                    return Ok(EXIT_NONGENERIC);
                }
                Err(e) => return Err(e.into()),
            };
            let used = seed.wrapping_add(result.rejected_nongeneric as u64);
            let config = tropcount::counting::generate_constraints(&gamma, &specs, used, height)?;
            let problem = CountProblem::new(gamma, config)?;
            emit(&out, &serde_json::to_value(result.to_json(&problem))?)?;
            let summary = format!("degree = {} (types: {}, seed: {})", result.total, result.contributions.len(), used);
            if out.is_some() {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
        }
        Command::Oracle { which: Oracle::Kontsevich { degree } } => {
            if degree == 0 {
                bail!("degree must be positive");
            }
            println!("{}", kontsevich_oracle(degree));
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
