//! `spinconc` experiment driver.
//!
//! Exit codes: 0 success, 2 invalid input, 3 a numerical certification
//! failed, 4 an output path could not be written.

mod experiment;
mod run;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use experiment::{load_spec, parse_json, parse_phi, parse_region, ExperimentSpec, Kind, OutFormat, RuleOverride};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Schema(String),
    #[error("{0}")]
    Numerical(#[from] spinconc::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("certification failed: {}", .0.join("; "))]
    Certification(Vec<String>),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use spinconc::Error as E;
        match self {
            CliError::Schema(_) => 2,
            CliError::Numerical(
                E::InvalidArgument(_)
                | E::Schema(_)
                | E::DegreeMismatch { .. }
                | E::NotUnitary { .. }
                | E::WholeSphere
                | E::Overlap { .. }
                | E::EmptyRegion
                | E::ZeroPolynomial
                | E::NotNormalized { .. },
            ) => 2,
            CliError::Numerical(_) | CliError::Certification(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "spinconc", version, about = "Concentration, Wehrl entropy and localization experiments on the Riemann sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Concentration C(P, Ω) against the centered-cap bound.
    Concentrate(Flags),
    /// Concentration deficit C_max - C(P, Ω).
    Deficit(Flags),
    /// Deficit, distance to coherent states, asymmetry and their ratios.
    Stability(Flags),
    /// Fraenkel asymmetry of a region.
    Asymmetry(Flags),
    /// Generalized Wehrl entropies and their gaps.
    Wehrl(Flags),
    /// Super-level measure profile, crossing point and monotone ratios.
    Levelsets(Flags),
    /// Localization spectrum and Schatten norm.
    Schatten(Flags),
    /// Concentration, entropy and distance for density operators.
    Mixed(Flags),
    /// Convergence of rescaled sphere quantities to their Fock limits.
    FockLimit(Flags),
    /// Asymptotic constants of the family (1 + εz)/√(1 + ε²/N).
    Sharpness(Flags),
    /// Run the acceptance suite.
    Acceptance(Flags),
}

/// Flags shared by every subcommand; each one rejects the fields it does not use.
#[derive(clap::Args, Debug, Default)]
struct Flags {
    /// JSON experiment file; flags override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "N-list", value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Polynomial as JSON: {"N": 2, "basis": "monomial", "coeffs": [[re, im], ...]}.
    #[arg(long)]
    poly: Option<String>,
    /// Density operator as JSON: {"N", "matrix"} or {"ensemble": {"weights", "polys"}}.
    #[arg(long)]
    density: Option<String>,
    /// `cap:<center>,measure=<m>` or `cap:<center>,radius=<r>`; `!` complements, `;` unions; or JSON.
    #[arg(long)]
    region: Option<String>,
    /// `xlogx`, `power:<p>`, `hinge:<tau>`, comma separated.
    #[arg(long)]
    phi: Option<String>,
    /// Fock polynomial as JSON: {"coeffs": [[re, im], ...]} in monomials.
    #[arg(long = "fock-poly")]
    fock_poly: Option<String>,
    #[arg(long = "fock-poly-q")]
    fock_poly_q: Option<String>,
    /// Planar disc union as JSON: {"discs": [{"center": [x, y], "radius": r}]}.
    #[arg(long = "planar-region")]
    planar_region: Option<String>,
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Schatten exponent, or `inf`.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Radial node count override.
    #[arg(long = "n-s")]
    n_s: Option<usize>,
    /// Angular node count override.
    #[arg(long = "n-theta")]
    n_theta: Option<usize>,
    /// Quadrature tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "profile-points")]
    profile_points: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<u32>>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (Kind, Flags) {
        match self {
            Command::Concentrate(f) => (Kind::Concentrate, f),
            Command::Deficit(f) => (Kind::Deficit, f),
            Command::Stability(f) => (Kind::Stability, f),
            Command::Asymmetry(f) => (Kind::Asymmetry, f),
            Command::Wehrl(f) => (Kind::Wehrl, f),
            Command::Levelsets(f) => (Kind::Levelsets, f),
            Command::Schatten(f) => (Kind::Schatten, f),
            Command::Mixed(f) => (Kind::Mixed, f),
            Command::FockLimit(f) => (Kind::FockLimit, f),
            Command::Sharpness(f) => (Kind::Sharpness, f),
            Command::Acceptance(f) => (Kind::Acceptance, f),
        }
    }
}

impl Flags {
    fn to_spec(&self) -> Result<ExperimentSpec, CliError> {
        let rule = RuleOverride { n_s: self.n_s, n_theta: self.n_theta, tolerance: self.tol };
        Ok(ExperimentSpec {
            subcommand: None,
            n: self.n,
            n_list: self.n_list.clone(),
            poly: self.poly.as_deref().map(|s| parse_json(s, "poly")).transpose()?,
            density: self.density.as_deref().map(|s| parse_json(s, "density")).transpose()?,
            region: self.region.as_deref().map(parse_region).transpose()?,
            phi: self.phi.as_deref().map(parse_phi).transpose()?,
            fock_poly: self.fock_poly.as_deref().map(|s| parse_json(s, "fock_poly")).transpose()?,
            fock_poly_q: self.fock_poly_q.as_deref().map(|s| parse_json(s, "fock_poly_q")).transpose()?,
            planar_region: self.planar_region.as_deref().map(|s| parse_json(s, "planar_region")).transpose()?,
            eps: self.eps.clone(),
            p: self.p,
            trials: self.trials,
            seed: self.seed,
            rule: (!rule.is_empty()).then_some(rule),
            profile_points: self.profile_points,
            criteria: self.criteria.clone(),
            format: self.format,
            output: self.out.clone(),
        })
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SPINCONC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Schema(format!("SPINCONC_THREADS: expected a positive integer, got {v:?}")))?;
    // fails only if a pool already exists, which cannot happen this early
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn execute(kind: Kind, flags: Flags) -> Result<(), CliError> {
    configure_threads()?;
    let from_file = match &flags.spec {
        Some(p) => load_spec(p)?,
        None => ExperimentSpec::default(),
    };
    let spec = from_file.merge(flags.to_spec()?).normalize(kind)?;
    let out_dir = spec.output.clone().expect("normalized");
    let format = spec.format.expect("normalized");
    let result = run::run(kind, &spec)?;

    std::fs::create_dir_all(&out_dir).map_err(|source| CliError::Io { path: out_dir.clone(), source })?;
    let mut files = Vec::new();
    for (stem, table) in &result.tables {
        let name = format!("{stem}.{}", format.ext());
        write_file(&out_dir.join(&name), &table.render(format.table_format()))?;
        files.push(name);
    }
    // the output location is left out so trees written to different
    // directories compare equal
    let echoed = ExperimentSpec { output: None, ..spec.clone() };
    let manifest = json!({
        "software": {"name": "spinconc", "version": env!("CARGO_PKG_VERSION")},
        "subcommand": kind.name(),
        "spec": echoed,
        "seeds": result.seeds,
        "rules": result.rules,
        "tolerances": result.tolerances,
        "outputs": files,
        "certified": result.failures.is_empty(),
        "failures": result.failures,
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_file(&out_dir.join("manifest.json"), &text)?;

    // a closed stdout (e.g. piped into `head`) is not an error
    let mut so = std::io::stdout().lock();
    for l in &result.lines {
        let _ = writeln!(so, "{l}");
    }
    if kind != Kind::Acceptance {
        if let Some((_, t)) = result.tables.first() {
            let _ = write!(so, "{}", t.render(format.table_format()));
        }
    }
    drop(so);
    eprintln!("wrote {} files to {}", files.len() + 1, out_dir.display());
    if result.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Certification(result.failures))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = cli.command.split();
    match execute(kind, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
