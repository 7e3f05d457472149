use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use invariant_cg::experiments::{
    convergence_study, error_series, perturbed_exact_curve, property_suite, run, solvability_sweep,
    RunConfig, SeriesRow, DEFAULT_L2_POINTS,
};
use invariant_cg::galerkin::{InitialGuess, NewtonConfig, DEFAULT_QUADRATURE_POINTS};
use invariant_cg::invariance::{admissible_samples, augmented_defect, invariance_defect};
use invariant_cg::numerics::gauss_legendre;
use invariant_cg::schemes::{by_name, Scheme};
use invariant_cg::Error;

#[derive(Parser)]
#[command(
    name = "invariant-cg",
    version,
    about = "Continuous Galerkin time stepping with invariantized weak forms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scheme and write sampled pointwise errors as CSV.
    Run(RunArgs),
    /// Errors and convergence orders over halved step sizes.
    Convergence(ConvergenceArgs),
    /// Which schemes complete the domain at each step size.
    Sweep(SweepArgs),
    /// Invariance defect of a scheme on a perturbed exact solution.
    Invariance(InvarianceArgs),
    /// Run the property suite; exits with 4 if any property fails.
    Properties {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Guess {
    Constant,
    Linear,
}

#[derive(Args)]
struct SolverArgs {
    /// Gauss points per element for assembly.
    #[arg(long, default_value_t = DEFAULT_QUADRATURE_POINTS)]
    quad: usize,
    /// Gauss points per element for the L2 error.
    #[arg(long, default_value_t = DEFAULT_L2_POINTS)]
    l2_points: usize,
    #[arg(long, default_value_t = 1e-12)]
    newton_tol: f64,
    /// Starting point of each element's Newton iteration.
    #[arg(long, value_enum, default_value_t = Guess::Constant)]
    guess: Guess,
    #[arg(long)]
    t_start: Option<f64>,
    /// Defaults to the problem's own end time.
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    problem: String,
    #[arg(long)]
    scheme: Scheme,
    #[arg(long, default_value_t = 0)]
    q: usize,
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long)]
    problem: String,
    /// One or more schemes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    scheme: Vec<Scheme>,
    #[arg(long, value_delimiter = ',', required = true)]
    q: Vec<usize>,
    #[arg(long)]
    tau0: f64,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "noproject")]
    problem: String,
    #[arg(long, value_delimiter = ',', default_value = "standard,invariant")]
    schemes: Vec<Scheme>,
    #[arg(long, value_delimiter = ',', required = true)]
    taus: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    q: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct InvarianceArgs {
    #[arg(long)]
    problem: String,
    #[arg(long)]
    scheme: Scheme,
    #[arg(long, default_value_t = 0)]
    q: usize,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size of the random group elements.
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
}

enum Failure {
    Param(Error),
    Solver(String),
    Properties,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_) | Error::Domain(_) => Failure::Param(e),
            other => Failure::Solver(other.to_string()),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| {
        Failure::Param(Error::Parameter(format!(
            "cannot write {}: {e}",
            path.display()
        )))
    })
}

fn config(problem: &str, scheme: Scheme, q: usize, tau: f64, s: &SolverArgs) -> RunConfig {
    let mut cfg = RunConfig::new(problem, scheme, q, tau);
    cfg.t_start = s.t_start;
    cfg.t_end = s.t_end;
    cfg.quad_points = s.quad;
    cfg.l2_points = s.l2_points;
    cfg.newton = NewtonConfig {
        tolerance: s.newton_tol,
        guess: match s.guess {
            Guess::Constant => InitialGuess::Constant,
            Guess::Linear => InitialGuess::LinearExtrapolation,
        },
        ..NewtonConfig::default()
    };
    cfg
}

fn warn_for(problem: &str) {
    if let Some(w) = by_name(problem).ok().and_then(|p| p.warning) {
        eprintln!("warning: {w}");
    }
}

fn run_cmd(a: &RunArgs) -> Result<(), Failure> {
    warn_for(&a.problem);
    let mut cfg = config(&a.problem, a.scheme, a.q, a.tau, &a.solver);
    cfg.seed = a.seed;
    let outcome = run(&cfg)?;
    let series = error_series(&outcome, a.samples)?;
    SeriesRow::write_csv(&series.rows, create(&a.out)?)?;
    let m = outcome.metrics(cfg.l2_points)?;
    println!(
        "{} {} q={} tau={}: max nodal error {:.3e}, L2 error {:.3e}",
        a.problem, a.scheme, a.q, a.tau, m.max_nodal_error, m.l2_error
    );
    match series.failure {
        Some(f) => Err(Failure::Solver(format!(
            "stopped at element {} (t = {}): {}",
            f.element, f.t, f.cause
        ))),
        None => Ok(()),
    }
}

fn convergence_cmd(a: &ConvergenceArgs) -> Result<(), Failure> {
    warn_for(&a.problem);
    let base = config(&a.problem, a.scheme[0], a.q[0], a.tau0, &a.solver);
    let report = convergence_study(&base, &a.scheme, &a.q, a.levels)?;
    report.write_csv(create(&a.out)?)?;
    print!("{}", report.table());
    Ok(())
}

fn sweep_cmd(a: &SweepArgs) -> Result<(), Failure> {
    let base = config(&a.problem, a.schemes[0], a.q, a.taus[0], &a.solver);
    let report = solvability_sweep(&base, &a.schemes, &a.taus)?;
    report.write_csv(create(&a.out)?)?;
    print!("{}", report.table());
    Ok(())
}

fn invariance_cmd(a: &InvarianceArgs) -> Result<(), Failure> {
    let p = by_name(&a.problem)?;
    let wf = p.weak_form(a.scheme, a.q)?;
    let curve = perturbed_exact_curve(&p, 1.0)?;
    let quad = gauss_legendre(16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut worst = 0.0f64;
    for (lo, hi) in [(0.0, 0.5), (0.3, 1.0)] {
        let state = curve.on((p.t_start + lo, p.t_start + hi));
        let samples = admissible_samples(
            wf.as_ref(),
            p.action.as_ref(),
            &state,
            a.q,
            &quad,
            &mut rng,
            a.radius,
            a.samples,
        );
        let d = if a.scheme == Scheme::Augmented {
            let frame = p.frame()?;
            let cfg = NewtonConfig::default();
            augmented_defect(
                wf.as_ref(),
                p.action.as_ref(),
                &frame.cross_section(),
                Some(frame.as_ref()),
                &state,
                a.q,
                &quad,
                &samples,
                &cfg,
            )?
        } else {
            invariance_defect(
                wf.as_ref(),
                p.action.as_ref(),
                p.reduction,
                &state,
                a.q,
                &quad,
                &samples,
            )?
        };
        println!(
            "[{:.3}, {:.3}]: {} samples, defect {d:.3e}",
            p.t_start + lo,
            p.t_start + hi,
            samples.len()
        );
        worst = worst.max(d);
    }
    println!("max defect {worst:.3e}");
    Ok(())
}

fn properties_cmd(seed: u64) -> Result<(), Failure> {
    let outcomes = property_suite(seed);
    for o in &outcomes {
        println!("{o}");
    }
    if outcomes.iter().all(|o| o.passed) {
        Ok(())
    } else {
        Err(Failure::Properties)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run_cmd(a),
        Command::Convergence(a) => convergence_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Invariance(a) => invariance_cmd(a),
        Command::Properties { seed } => properties_cmd(*seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Param(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Properties) => {
            eprintln!("property suite failed");
            ExitCode::from(4)
        }
    }
}
