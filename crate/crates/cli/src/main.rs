//! `su11`: build states, tabulate d-functions, write Wigner grids, run the
//! interferometer and the verification suites.
//!
//! Exit status: 0 success, 1 verification failure or failed truncation gate,
//! 2 usage, schema or input error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use su11::io::{DfuncRow, DfuncTable, GridTable, Header, StateSummary};
use su11::verify::{self, Suite, VerifyOptions};
use su11::{
    dfunction, output_state_direct, output_wigner_covariant, wigner_grid, Axis, DFunctionQuery, Error, Folding,
    GridSpec, HalfInteger, InterferometerConfig, PhaseConvention, StateSpec,
};

#[derive(Parser)]
#[command(name = "su11", version, about = "SU(1,1) phase-space toolkit for two-mode states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate d^k_{mu mu'}(tau) as CSV.
    Dfunc(DfuncArgs),
    /// Build a state from a JSON spec and write its irrep decomposition as JSON.
    State(StateArgs),
    /// Evaluate the Wigner function of a state on a grid.
    Wigner(WignerArgs),
    /// Input and output Wigner grids of the balanced interferometer.
    Interferometer(InterferometerArgs),
    /// Run oracle-equivalence suites and write a JSON report.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct DfuncArgs {
    /// Irrep label, e.g. 1/2, 3/2, 2.
    #[arg(long)]
    k: HalfInteger,
    /// Fix mu instead of sweeping k..=mu-max.
    #[arg(long)]
    mu: Option<HalfInteger>,
    /// Fix mu' instead of sweeping k..=mu-max.
    #[arg(long)]
    mu_prime: Option<HalfInteger>,
    /// Largest weight in a sweep (default k + 10).
    #[arg(long)]
    mu_max: Option<HalfInteger>,
    /// Single hyperbolic angle.
    #[arg(long, conflicts_with_all = ["tau_min", "tau_max"])]
    tau: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    tau_min: f64,
    #[arg(long, default_value_t = 3.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 31)]
    tau_count: usize,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct StateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value_t = FoldingArg::Separate)]
    folding: FoldingArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FoldingArg {
    Separate,
    Symmetric,
    UpperOnly,
}

impl From<FoldingArg> for Folding {
    fn from(f: FoldingArg) -> Self {
        match f {
            FoldingArg::Separate => Folding::Separate,
            FoldingArg::Symmetric => Folding::Symmetric,
            FoldingArg::UpperOnly => Folding::UpperOnly,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    PerIrrepNormalized,
    Literal,
}

impl From<ConventionArg> for PhaseConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::PerIrrepNormalized => PhaseConvention::PerIrrepNormalized,
            ConventionArg::Literal => PhaseConvention::Literal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Coords {
    /// `xi = x + i y` on `[-extent, extent]^2`, points outside the disk dropped.
    Disk,
    /// `tau` in `[0, tau-max]` by `chi` in `[-pi, pi]`.
    Polar,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, value_enum, default_value_t = Coords::Disk)]
    coords: Coords,
    /// Samples per axis.
    #[arg(long, default_value_t = 101)]
    count: usize,
    #[arg(long, default_value_t = 1.0)]
    extent: f64,
    #[arg(long, default_value_t = 3.0)]
    tau_max: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::PerIrrepNormalized)]
    convention: ConventionArg,
    #[arg(long, value_enum, default_value_t = FoldingArg::Separate)]
    folding: FoldingArg,
    #[arg(long)]
    no_timestamp: bool,
}

impl GridArgs {
    fn grid(&self) -> Result<GridSpec, Error> {
        let g = match self.coords {
            Coords::Disk => GridSpec::disk(self.extent, self.count)?,
            Coords::Polar => GridSpec::HyperboloidPolar {
                tau: Axis::new(0.0, self.tau_max, self.count)?,
                chi: Axis::new(-std::f64::consts::PI, std::f64::consts::PI, self.count)?,
            },
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Args)]
struct WignerArgs {
    /// State spec JSON file.
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Route {
    /// Pull the input field back through the Möbius map.
    Covariant,
    /// Propagate the Fock amplitudes and evaluate the output state.
    Direct,
}

#[derive(Args)]
struct InterferometerArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    gain: f64,
    #[arg(long, default_value_t = 0.0)]
    pump_phase: f64,
    #[arg(long)]
    total_phase: f64,
    #[arg(long, value_enum, default_value_t = Route::Covariant)]
    route: Route,
    #[command(flatten)]
    grid: GridArgs,
    /// Grid of the input state.
    #[arg(long)]
    input_out: PathBuf,
    /// Grid of the output state.
    #[arg(long)]
    output_out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// dfunc, kernel, wigner, interferometer or all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Reduced sample sizes.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

enum Failure {
    Usage(Error),
    Runtime(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TruncationLeak { .. } => Failure::Runtime(e),
            e => Failure::Usage(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Dfunc(a) => cmd_dfunc(a),
        Command::State(a) => cmd_state(a),
        Command::Wigner(a) => cmd_wigner(a),
        Command::Interferometer(a) => cmd_interferometer(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
    }
}

/// `SU11_THREADS` caps the worker pool; unset or 0 leaves it automatic.
fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("SU11_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("SU11_THREADS must be a non-negative integer, got '{v}'")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

fn timestamp_header(header: &mut Header, disabled: bool) {
    if !disabled {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        header.push("generated_unix", secs.to_string());
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_spec(path: &Path) -> Result<StateSpec, Failure> {
    let text = std::fs::read_to_string(path)?;
    Ok(StateSpec::from_json(&text)?)
}

fn cmd_dfunc(a: DfuncArgs) -> Result<(), Failure> {
    let k = a.k;
    if k.twice() < 1 {
        return Err(Error::InvalidArgument(format!("k must be >= 1/2, got {k}")).into());
    }
    let mu_max = a.mu_max.unwrap_or(k + HalfInteger::from_int(10));
    let weights = |fixed: Option<HalfInteger>| -> Result<Vec<HalfInteger>, Failure> {
        if let Some(m) = fixed {
            return Ok(vec![m]);
        }
        if mu_max < k || !(mu_max - k).is_integer() {
            return Err(Error::InvalidArgument(format!("mu-max {mu_max} is not a weight of k = {k}")).into());
        }
        let n = (mu_max - k).twice() / 2;
        Ok((0..=n).map(|j| k + HalfInteger::from_int(j)).collect())
    };
    let (mus, mups) = (weights(a.mu)?, weights(a.mu_prime)?);
    let taus: Vec<f64> = match a.tau {
        Some(t) => vec![t],
        None => {
            let ax = Axis::new(a.tau_min, a.tau_max, a.tau_count)?;
            (0..ax.count).map(|i| ax.value(i)).collect()
        }
    };
    let mut rows = Vec::with_capacity(taus.len() * mus.len() * mups.len());
    for &tau in &taus {
        for &mu in &mus {
            for &mup in &mups {
                let q = DFunctionQuery::new(k, mu, mup, tau)?;
                rows.push(DfuncRow {
                    twice_k: k.twice(),
                    twice_mu: mu.twice(),
                    twice_mu_prime: mup.twice(),
                    tau,
                    d_value: dfunction(&q),
                });
            }
        }
    }
    let mut header = Header::default();
    header.push("k", k.to_string());
    timestamp_header(&mut header, a.no_timestamp);
    DfuncTable { header, rows }.write(open_out(a.out.as_deref())?)?;
    Ok(())
}

fn cmd_state(a: StateArgs) -> Result<(), Failure> {
    let spec = read_spec(&a.spec)?;
    let d = spec.build::<f64>()?.decomposed(a.folding.into())?;
    let mut out = open_out(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &StateSummary::new(&d)).map_err(Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_wigner(a: WignerArgs) -> Result<(), Failure> {
    let spec = read_spec(&a.spec)?;
    let grid = a.grid.grid()?;
    let d = spec.build::<f64>()?.decomposed(a.grid.folding.into())?;
    let field = wigner_grid(&d, &grid, a.grid.convention.into())?;
    let mut extra = Header::default();
    extra.push("state", serde_json::to_string(&spec).map_err(Error::from)?);
    timestamp_header(&mut extra, a.grid.no_timestamp);
    GridTable::from_field(&field, extra)?.write(open_out(a.out.as_deref())?)?;
    Ok(())
}

fn cmd_interferometer(a: InterferometerArgs) -> Result<(), Failure> {
    let spec = read_spec(&a.spec)?;
    let cfg = InterferometerConfig::new(a.gain, a.pump_phase, a.total_phase)?;
    let grid = a.grid.grid()?;
    let conv: PhaseConvention = a.grid.convention.into();
    let folding: Folding = a.grid.folding.into();
    let built = spec.build::<f64>()?;
    let d = built.decomposed(folding)?;
    let input = wigner_grid(&d, &grid, conv)?;
    let output = match a.route {
        Route::Covariant => output_wigner_covariant(&d, &cfg, &grid, conv)?,
        Route::Direct => {
            let out_state = output_state_direct(&built.fock()?, &cfg)?;
            wigner_grid(&su11::decompose(&out_state, folding)?, &grid, conv)?
        }
    };
    let mut extra = Header::default();
    extra.push("state", serde_json::to_string(&spec).map_err(Error::from)?);
    extra.push("interferometer", serde_json::to_string(&cfg).map_err(Error::from)?);
    let route = match a.route {
        Route::Covariant => "covariant",
        Route::Direct => "direct",
    };
    extra.push("route", route);
    timestamp_header(&mut extra, a.grid.no_timestamp);
    for (field, role, path) in [(&input, "input", &a.input_out), (&output, "output", &a.output_out)] {
        let mut h = extra.clone();
        h.push("role", role);
        GridTable::from_field(field, h)?.write(open_out(Some(path))?)?;
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let suite: Suite = a.suite.parse()?;
    let mut opts = if a.quick { VerifyOptions::quick() } else { VerifyOptions::default() };
    if let Some(s) = a.seed {
        opts.seed = s;
    }
    let report = verify::run(suite, &opts).map_err(Failure::Runtime)?;
    let mut value = serde_json::to_value(&report).map_err(Error::from)?;
    if !a.no_timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        value["generated_unix"] = secs.into();
    }
    let mut out = open_out(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &value).map_err(Error::from)?;
    writeln!(out)?;
    out.flush()?;
    for s in &report.suites {
        for c in &s.checks {
            eprintln!(
                "{} {}/{}: max residual {:e} (tolerance {:e})",
                if c.passed { "ok  " } else { "FAIL" },
                s.suite,
                c.name,
                c.max_residual,
                c.tolerance
            );
        }
        for g in &s.gates {
            eprintln!(
                "{} {}/{} gate: leak {:e}, doubling residual {:e}, cutoff {}",
                if g.passed { "ok  " } else { "FAIL" },
                s.suite,
                g.name,
                g.max_leak,
                g.max_convergence_residual,
                g.max_cutoff
            );
        }
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
