//! Command-line front end: argument parsing, input loading and dispatch.
//!
//! Every command prints a certificate (see [`cert`]) on standard output.
//! Exit codes: 0 success or verified, 1 search failure or rejected
//! certificate, 2 usage or input error.

pub mod cert;
mod commands;
mod verify;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use sumsetlab_core::groups::{build_group, GroupTable};
use sumsetlab_core::rational::{parse_ratio, Rational};
use sumsetlab_core::sets::{Ambient, FpBudget, GroupSubset, IntWindow, IntWindowSet, SetSpec, Subset};

use cert::{fmt_elems, Certificate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable overriding the product-word enumeration budget.
pub const BUDGET_ENV: &str = "SUMSETLAB_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "sumsetlab", version, about = "Finite sumset laboratory with checkable certificates")]
pub struct Cli {
    /// Worker threads (0 = one per core). Never changes the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct SetArgs {
    /// Set file (`window`, `int`, `interval`, `ap`, `mod` directives).
    #[arg(long)]
    pub set: PathBuf,
    /// Group spec (zn:N, dihedral:N, sym:N, alt:N, psl2:Q, cayley:PATH);
    /// without it the set lives in its integer window.
    #[arg(long)]
    pub group: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Upper,
    Lower,
    Banach,
    Averaging,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upper/lower density along a family, windowed Banach density, or the averaging check.
    Density {
        #[command(flatten)]
        input: SetArgs,
        #[arg(long)]
        folner: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Upper)]
        mode: Mode,
        /// Window length for `banach` and `averaging`.
        #[arg(long)]
        n: Option<usize>,
        /// Last family index used (defaults to the whole family).
        #[arg(long)]
        max_index: Option<usize>,
    },
    /// Finite-depth invariant measure on translate intersections.
    BergMeasure {
        #[command(flatten)]
        input: SetArgs,
        #[arg(long)]
        folner: String,
        #[arg(long)]
        depth: usize,
        /// Requested intersections: tuples separated by `;`, elements by `,`.
        #[arg(long)]
        translates: String,
        #[arg(long)]
        max_index: Option<usize>,
    },
    /// Greedy IP-set extraction with product-word verification.
    IpExtract {
        #[command(flatten)]
        input: SetArgs,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_parser = ratio_arg)]
        width_floor: Option<Rational>,
    },
    /// Decomposition F₁⋯Fₙ·B ⊆ A.
    Nathanson {
        #[command(flatten)]
        input: SetArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_parser = ratio_arg)]
        width_floor: Option<Rational>,
    },
    /// Productset B·C ⊆ A with |B| = |C| = k.
    Productset {
        #[command(flatten)]
        input: SetArgs,
        #[arg(long)]
        k: usize,
        /// Restrict B to A·A⁻¹ and record witnesses.
        #[arg(long)]
        constrain_b: bool,
        /// Bound for the exact set-stability annotation (groups only).
        #[arg(long, default_value_t = sumsetlab_core::stability::DEFAULT_EXACT_BOUND)]
        exact_bound: usize,
    },
    /// Checks whether a group subset is product-free.
    ProductFree {
        #[command(flatten)]
        input: SetArgs,
    },
    /// Largest product-free subset of a group.
    MaxProductFree {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = sumsetlab_core::sumsets::DEFAULT_PF_EXACT_BOUND)]
        exact_bound: usize,
    },
    /// Character degrees and the least nontrivial degree.
    QrDegree {
        #[arg(long)]
        group: String,
    },
    /// Random and adversarial sets searched for all products of n elements.
    QrExperiment {
        #[arg(long)]
        group: String,
        #[arg(long, value_parser = ratio_arg)]
        epsilon: Rational,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
    },
    /// Ladder index of a relation file, or of y·x ∈ A for a group set.
    Ladder(RelationArgs),
    /// Equation index of a relation file, or of y·x ∈ A for a group set.
    Equation(RelationArgs),
    /// Ladder index of y·x ∈ A.
    SetStability {
        #[command(flatten)]
        input: SetArgs,
        #[arg(long, default_value_t = sumsetlab_core::stability::DEFAULT_EXACT_BOUND)]
        exact_bound: usize,
    },
    /// Re-checks a certificate without re-running the search.
    Verify { certificate: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct RelationArgs {
    /// 0/1 matrix file with a `dims <l> <r>` header.
    #[arg(long, conflicts_with_all = ["set", "group"])]
    pub relation: Option<PathBuf>,
    #[arg(long, requires = "group")]
    pub set: Option<PathBuf>,
    #[arg(long, requires = "set")]
    pub group: Option<String>,
    #[arg(long, default_value_t = sumsetlab_core::stability::DEFAULT_EXACT_BOUND)]
    pub exact_bound: usize,
}

fn ratio_arg(s: &str) -> Result<Rational, String> {
    parse_ratio(s).ok_or_else(|| format!("expected `num/den`, got `{s}`"))
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {}\n", message.into()),
        }
    }
}

/// Errors that end a command before a certificate is produced.
#[derive(Debug)]
pub(crate) struct UsageError(pub String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

pub(crate) type CmdResult = Result<(i32, String, String), UsageError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(pool) => pool,
        Err(e) => return Output::usage(format!("--jobs: {e}")),
    };
    match pool.install(|| commands::dispatch(&cli)) {
        Ok((code, stdout, stderr)) => Output { code, stdout, stderr },
        Err(UsageError(message)) => Output::usage(message),
    }
}

pub(crate) fn fp_budget() -> Result<FpBudget, UsageError> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(FpBudget)
            .map_err(|_| UsageError(format!("{BUDGET_ENV}: expected a positive integer, got `{v}`"))),
        Err(_) => Ok(FpBudget::default()),
    }
}

pub(crate) fn sha256_file(path: &Path) -> Result<String, UsageError> {
    let bytes = std::fs::read(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Builds a group and records it; `cayley:` groups also record the file hash.
pub(crate) fn load_group(spec: &str, cert: &mut Certificate) -> Result<Arc<GroupTable>, UsageError> {
    let g = build_group(spec).map_err(|e| UsageError(format!("--group: {e}")))?;
    cert.input("group", spec);
    if let Some(path) = spec.strip_prefix("cayley:") {
        cert.input("group-sha256", sha256_file(Path::new(path))?);
    }
    Ok(Arc::new(g))
}

/// Rebuilds the group named by a certificate, checking the file hash.
pub(crate) fn group_from_cert(cert: &Certificate) -> Result<Arc<GroupTable>, String> {
    let spec = cert.require("input.group").map_err(|e| e.to_string())?;
    if let Some(path) = spec.strip_prefix("cayley:") {
        let found = sha256_file(Path::new(path)).map_err(|e| e.0)?;
        if Some(found.as_str()) != cert.get("input.group-sha256") {
            return Err(format!("{path} does not match the recorded hash"));
        }
    }
    build_group(spec).map(Arc::new).map_err(|e| e.to_string())
}

pub(crate) enum Target {
    Int(IntWindowSet),
    Group(GroupSubset),
}

pub(crate) fn ints<A: Ambient>(ambient: &A, elems: &[A::Elem]) -> Vec<i64> {
    elems.iter().map(|&e| ambient.to_int(e)).collect()
}

/// Maps certificate integers back to ambient elements.
pub(crate) fn elems_in<A: Ambient>(ambient: &A, values: &[i64]) -> Result<Vec<A::Elem>, String> {
    values
        .iter()
        .map(|&x| ambient.from_int(x).ok_or_else(|| format!("{x} is not an element")))
        .collect()
}

pub(crate) fn subset_of<A: Ambient>(ambient: &A, values: &[i64]) -> Result<Subset<A>, String> {
    let (set, outside) = Subset::from_elements(ambient.clone(), elems_in(ambient, values)?);
    if outside > 0 {
        return Err(format!("{outside} listed element(s) lie outside the ambient"));
    }
    Ok(set)
}

pub(crate) fn set_runs<A: Ambient>(set: &Subset<A>) -> String {
    fmt_elems(&ints(set.ambient(), &set.to_vec()))
}

/// Loads `--set` (and `--group`), records the materialized set, and warns
/// on standard error about listed points outside the ambient.
pub(crate) fn load_target(args: &SetArgs, cert: &mut Certificate, stderr: &mut String) -> Result<Target, UsageError> {
    let name = args.set.display().to_string();
    let text = std::fs::read_to_string(&args.set).map_err(|e| UsageError(format!("--set: cannot read {name}: {e}")))?;
    let spec = SetSpec::parse(&text, &name)?;
    let (target, outside) = match &args.group {
        Some(g) => {
            let g = load_group(g, cert)?;
            let (set, outside) = spec.build_group(&g, &name)?;
            cert.input("set", set_runs(&set));
            (Target::Group(set), outside)
        }
        None => {
            let (set, outside) = spec.build_int(&name)?;
            cert.input("window", format!("{} {}", set.ambient().lo(), set.ambient().hi()));
            cert.input("set", set_runs(&set));
            (Target::Int(set), outside)
        }
    };
    if outside > 0 {
        stderr.push_str(&format!("note: {outside} listed point(s) of {name} fall outside the ambient\n"));
    }
    Ok(target)
}

/// Rebuilds the recorded set from a certificate.
pub(crate) fn target_from_cert(cert: &Certificate) -> Result<Target, String> {
    let values = cert.elems("input.set").map_err(|e| e.to_string())?;
    if cert.get("input.group").is_some() {
        let g = group_from_cert(cert)?;
        return Ok(Target::Group(subset_of(&g, &values)?));
    }
    let window = cert.require("input.window").map_err(|e| e.to_string())?;
    let bounds: Vec<i64> = window.split_whitespace().filter_map(|t| t.parse().ok()).collect();
    let w = match bounds.as_slice() {
        [lo, hi] => IntWindow::new(*lo, *hi).ok_or("empty window")?,
        _ => return Err(format!("bad window `{window}`")),
    };
    Ok(Target::Int(subset_of(&w, &values)?))
}
