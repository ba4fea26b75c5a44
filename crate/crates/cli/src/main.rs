//! Command-line interface: load a base variety model, run the configuration
//! space pipelines, emit tables and verification reports.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error, 3 resource
//! guard.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use confspace::catalog;
use confspace::e1::{E1Page, Phi};
use confspace::error::Error;
use confspace::linalg::format_rational;
use confspace::model::{model_from_json, VarietyModel};
use confspace::series::{
    e_polynomial, purity_check, verify_splitting_betti, verify_splitting_hodge, verify_vakilwood,
    EPolynomial, HodgeSeries, Verdict,
};
use confspace::spectral::{verify_theorem_c, FamilyPipeline, PipelineOptions};
use confspace::table::HodgeTable;

#[derive(Parser)]
#[command(
    name = "confspace",
    version,
    about = "Exact cohomology of configuration spaces of punctured complex varieties"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute mixed Hodge number tables of ordered or unordered
    /// configuration spaces
    Compute(ComputeArgs),
    /// Verify one of the splitting identities on engine output
    Verify(VerifyArgs),
    /// List the built-in base variety models
    Catalog(CatalogArgs),
}

#[derive(Args)]
struct Source {
    /// Built-in model, e.g. `elliptic`, `affine_space:1`, `curve_open:1,2`
    #[arg(long, value_name = "NAME[:ARGS]")]
    catalog: Option<String>,
    /// Model file (JSON)
    #[arg(long, value_name = "PATH", conflicts_with = "catalog")]
    model: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<VarietyModel, CliError> {
        match (&self.catalog, &self.model) {
            (Some(name), None) => catalog::by_name(name).map_err(CliError::Input),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "model".to_string());
                model_from_json(&name, &text).map_err(CliError::Input)
            }
            _ => Err(CliError::Input(
                "exactly one of --catalog or --model is required".to_string(),
            )),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Space {
    Ordered,
    Unordered,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    source: Source,
    /// Number of punctures r of the base model
    #[arg(long, default_value_t = 0)]
    punctures: usize,
    #[arg(long, value_enum, default_value_t = Space::Unordered)]
    space: Space,
    /// Largest n (defaults to 3 for bases with odd-weight classes, else 5)
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    /// 0 = fast, 1 = structural invariants, 2 = full brute force
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=2))]
    checks: u8,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Assemble tables even without a passing degeneration certificate
    #[arg(long)]
    allow_uncertified: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Identity {
    SplittingHodge,
    SplittingBetti,
    Napolitano,
    Vakilwood,
    TheoremC,
    Purity,
    Phi,
}

impl Identity {
    fn name(&self) -> &'static str {
        match self {
            Identity::SplittingHodge => "splitting-hodge",
            Identity::SplittingBetti => "splitting-betti",
            Identity::Napolitano => "napolitano",
            Identity::Vakilwood => "vakilwood",
            Identity::TheoremC => "theorem-c",
            Identity::Purity => "purity",
            Identity::Phi => "phi",
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Which identity to check
    #[arg(value_enum)]
    identity: Identity,
    #[command(flatten)]
    source: Source,
    /// Punctures of the further-punctured side
    #[arg(long, default_value_t = 1)]
    punctures: usize,
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=2))]
    checks: u8,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    allow_uncertified: bool,
}

#[derive(Args)]
struct CatalogArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

enum CliError {
    Input(String),
    Resource(String),
    Failure(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        match e {
            Error::ResourceGuard(m) => CliError::Resource(m),
            Error::InvalidModel(m) | Error::Input(m) | Error::MismatchedTruncation(m) => {
                CliError::Input(m)
            }
            Error::Uncertified(m) => CliError::Failure(format!(
                "degeneration certificate did not pass ({m}); rerun with --allow-uncertified to proceed"
            )),
            other => CliError::Failure(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(args) => cmd_compute(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Catalog(args) => cmd_catalog(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Failure(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Resource(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn default_n_max(model: &VarietyModel) -> usize {
    let has_odd_weight = model.classes.iter().any(|c| c.hodge.p != c.hodge.q);
    if has_odd_weight {
        3
    } else {
        5
    }
}

fn options(checks: u8, allow_uncertified: bool) -> PipelineOptions {
    // basis-size ceiling per page; CONFSPACE_MAX_BASIS overrides the default
    let max_basis = std::env::var("CONFSPACE_MAX_BASIS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(200_000);
    PipelineOptions {
        max_basis,
        checks,
        allow_uncertified,
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// compute
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TableRow {
    n: usize,
    i: usize,
    p: u32,
    q: u32,
    dim: u64,
}

#[derive(Serialize)]
struct ComputeReport {
    schema: u32,
    command: &'static str,
    model: String,
    dim_c: u32,
    compact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope: Option<String>,
    punctures: usize,
    space: &'static str,
    n_max: usize,
    checks: u8,
    certificate: String,
    warnings: Vec<String>,
    rows: Vec<TableRow>,
}

fn table_rows(table: &HodgeTable) -> Vec<TableRow> {
    table
        .rows
        .iter()
        .map(|(&(n, i, p, q), &dim)| TableRow { n, i, p, q, dim })
        .collect()
}

fn cmd_compute(args: ComputeArgs) -> Result<bool, CliError> {
    let model = args.source.load()?;
    let n_max = args.n_max.unwrap_or_else(|| default_n_max(&model));
    let opts = options(args.checks, args.allow_uncertified);
    let pipeline = FamilyPipeline::run(&model, args.punctures, n_max, &opts)?;
    let table = match args.space {
        Space::Ordered => pipeline.ordered_table(),
        Space::Unordered => pipeline.unordered_table(&opts)?,
    };
    let report = ComputeReport {
        schema: 1,
        command: "compute",
        model: model.name.clone(),
        dim_c: model.dim_c,
        compact: model.compact,
        slope: model.slope.as_ref().map(format_rational),
        punctures: args.punctures,
        space: match args.space {
            Space::Ordered => "ordered",
            Space::Unordered => "unordered",
        },
        n_max,
        checks: args.checks,
        certificate: pipeline.certificate.describe(),
        warnings: pipeline.warnings.clone(),
        rows: table_rows(&table),
    };
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("serializable report"),
        Format::Csv => {
            let mut s = String::from("n,i,p,q,dim\n");
            for row in &report.rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.n, row.i, row.p, row.q, row.dim
                ));
            }
            s.pop();
            s
        }
    };
    write_output(&args.out, &text)?;
    Ok(true)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

/// The base variety the pair of pipelines is built over: the model itself
/// when noncompact, otherwise the model with one point removed so that the
/// comparison theorems apply.
fn verification_base(model: &VarietyModel) -> Result<VarietyModel, CliError> {
    if model.compact {
        catalog::puncture_once(model).map_err(CliError::Input)
    } else {
        Ok(model.clone())
    }
}

#[derive(Serialize)]
struct VerifyReport {
    schema: u32,
    command: &'static str,
    identity: String,
    model: String,
    base: String,
    punctures: usize,
    n_max: usize,
    pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
    details: serde_json::Value,
}

fn cmd_verify(args: VerifyArgs) -> Result<bool, CliError> {
    let model = args.source.load()?;
    let n_max = args.n_max.unwrap_or_else(|| default_n_max(&model));
    let opts = options(args.checks, args.allow_uncertified);
    let identity = args.identity;

    // purity inspects a single family, everything else compares a pair
    let (pass, base_name, warnings, details) = match identity {
        Identity::Purity => {
            let pipeline = FamilyPipeline::run(&model, args.punctures, n_max, &opts)?;
            let table = pipeline.unordered_table(&opts)?;
            let levels = purity_check(&table, None);
            let pass = levels.iter().all(|l| l.pure);
            (
                pass,
                model.name.clone(),
                pipeline.warnings.clone(),
                serde_json::to_value(&levels).expect("serializable"),
            )
        }
        Identity::Phi => {
            if args.punctures == 0 {
                return Err(CliError::Input(
                    "verify phi needs --punctures >= 1".to_string(),
                ));
            }
            let base = verification_base(&model)?;
            let (pass, details) = verify_phi(&model, &base, args.punctures, n_max, &opts)?;
            (pass, base.name.clone(), Vec::new(), details)
        }
        _ => {
            if args.punctures == 0 {
                return Err(CliError::Input(format!(
                    "verify {} needs --punctures >= 1",
                    identity.name()
                )));
            }
            let base = verification_base(&model)?;
            if identity == Identity::Napolitano && base.dim_c != 1 {
                return Err(CliError::Input(
                    "the napolitano identity is about curves (dim_c = 1)".to_string(),
                ));
            }
            // the two pipelines are independent; build them in parallel
            let (x_res, xp_res) = std::thread::scope(|scope| {
                let x =
                    scope.spawn(|| FamilyPipeline::run(&base, args.punctures - 1, n_max, &opts));
                let xp = scope.spawn(|| FamilyPipeline::run(&base, args.punctures, n_max, &opts));
                (
                    x.join().expect("pipeline thread"),
                    xp.join().expect("pipeline thread"),
                )
            });
            let x_pipe = x_res?;
            let xp_pipe = xp_res?;
            let mut warnings = x_pipe.warnings.clone();
            warnings.extend(xp_pipe.warnings.clone());
            let inputs = format!(
                "{} with {} vs {} punctures",
                base.name,
                args.punctures - 1,
                args.punctures
            );
            let (pass, details) = match identity {
                Identity::SplittingHodge | Identity::SplittingBetti | Identity::Napolitano => {
                    let tx = x_pipe.unordered_table(&opts)?;
                    let txp = xp_pipe.unordered_table(&opts)?;
                    let sx = HodgeSeries::from_table(&tx, n_max);
                    let sxp = HodgeSeries::from_table(&txp, n_max);
                    let verdict: Verdict = match identity {
                        Identity::SplittingHodge => {
                            verify_splitting_hodge(&sxp, &sx, base.dim_c, inputs)?
                        }
                        _ => verify_splitting_betti(&sxp, &sx, base.dim_c, inputs)?,
                    };
                    (
                        verdict.pass,
                        serde_json::to_value(&verdict).expect("serializable"),
                    )
                }
                Identity::Vakilwood => {
                    let tx = x_pipe.unordered_table(&opts)?;
                    let txp = xp_pipe.unordered_table(&opts)?;
                    let e_x: Vec<EPolynomial> = (0..=n_max)
                        .map(|n| e_polynomial(&tx, base.dim_c, n))
                        .collect();
                    let e_xp: Vec<EPolynomial> = (0..=n_max)
                        .map(|n| e_polynomial(&txp, base.dim_c, n))
                        .collect();
                    let verdict = verify_vakilwood(&e_xp, &e_x, inputs)?;
                    (
                        verdict.pass,
                        serde_json::to_value(&verdict).expect("serializable"),
                    )
                }
                Identity::TheoremC => {
                    let mut pass = true;
                    let mut per_n = Vec::new();
                    for n in 0..=n_max {
                        let report = verify_theorem_c(&x_pipe, &xp_pipe, n);
                        pass &= report.pass;
                        let failures: Vec<String> = report
                            .levels
                            .iter()
                            .filter(|l| !l.pass)
                            .map(|l| format!("n={} i={} (p,q)=({},{})", l.n, l.i, l.p, l.q))
                            .collect();
                        per_n.push(serde_json::json!({
                            "n": n,
                            "pass": report.pass,
                            "levels_compared": report.levels.len(),
                            "failures": failures,
                        }));
                    }
                    (pass, serde_json::Value::Array(per_n))
                }
                Identity::Purity | Identity::Phi => unreachable!(),
            };
            (pass, base.name.clone(), warnings, details)
        }
    };

    let report = VerifyReport {
        schema: 1,
        command: "verify",
        identity: identity.name().to_string(),
        model: model.name.clone(),
        base: base_name,
        punctures: args.punctures,
        n_max,
        pass,
        warnings,
        details,
    };
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("serializable report"),
        Format::Csv => format!(
            "identity,model,punctures,n_max,pass\n{},{},{},{},{}",
            report.identity, report.model, report.punctures, report.n_max, report.pass
        ),
    };
    write_output(&args.out, &text)?;
    Ok(pass)
}

/// Per-n decomposition checks over the noncompact base; when the model
/// itself is compact the direct pipeline over it is also run, with its
/// commutation outcome reported but not asserted.
fn verify_phi(
    model: &VarietyModel,
    base: &VarietyModel,
    r: usize,
    n_max: usize,
    opts: &PipelineOptions,
) -> Result<(bool, serde_json::Value), CliError> {
    let mut pass = true;
    let mut details = Vec::new();
    let mut run = |over: &VarietyModel, asserted: bool| -> Result<(), CliError> {
        for n in 1..=n_max.max(1) {
            let mut x = E1Page::build(over, r - 1, n, opts.max_basis)?;
            let mut xp = E1Page::build(over, r, n, opts.max_basis)?;
            let mut small = E1Page::build(over, r, n - 1, opts.max_basis)?;
            x.differential()?;
            xp.differential()?;
            small.differential()?;
            let phi = Phi::new(&x, &xp, &small)?;
            let report = phi.check()?;
            let dims = phi.dimension_identity();
            let ok = if asserted {
                report.bijective && dims && report.commutes == Some(true)
            } else {
                report.bijective && dims
            };
            pass &= ok;
            details.push(serde_json::json!({
                "base": over.name,
                "n": n,
                "bijective": report.bijective,
                "dimension_identity": dims,
                "commutes_with_d1": report.commutes,
                "commutation_asserted": asserted,
            }));
        }
        Ok(())
    };
    run(base, true)?;
    if model.compact {
        run(model, false)?;
    }
    Ok((pass, serde_json::Value::Array(details)))
}

// ---------------------------------------------------------------------------
// catalog
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CatalogEntry {
    name: String,
    dim_c: u32,
    compact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope: Option<String>,
    betti: Vec<u64>,
}

fn cmd_catalog(args: CatalogArgs) -> Result<bool, CliError> {
    let entries: Vec<CatalogEntry> = catalog::listing()
        .into_iter()
        .map(|m| CatalogEntry {
            name: m.name.clone(),
            dim_c: m.dim_c,
            compact: m.compact,
            slope: m.slope.as_ref().map(format_rational),
            betti: m.betti(),
        })
        .collect();
    let text = match args.format {
        Format::Json => {
            let mut map = BTreeMap::new();
            map.insert("schema", serde_json::json!(1));
            map.insert("command", serde_json::json!("catalog"));
            map.insert(
                "models",
                serde_json::to_value(&entries).expect("serializable"),
            );
            serde_json::to_string_pretty(&map).expect("serializable")
        }
        Format::Csv => {
            let mut s = String::from("name,dim_c,compact,slope,betti\n");
            for e in &entries {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    e.name,
                    e.dim_c,
                    e.compact,
                    e.slope.clone().unwrap_or_default(),
                    e.betti
                        .iter()
                        .map(|b| b.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                ));
            }
            s.pop();
            s
        }
    };
    write_output(&None, &text)
        .map(|_| true)
}
