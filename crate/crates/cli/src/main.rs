//! `lifeplan`: design, evaluate, fit and simulate acceptance sampling plans
//! for truncated life tests under the inverse Weibull model.
//!
//! Exit codes: 0 success, 2 invalid flags or parameters, 3 infeasible
//! design, 4 unreadable or invalid data.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lifeplan::{DoublePlan, GroupPlan, Plan, SearchBounds, SinglePlan};
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "lifeplan", version, about = "Acceptance sampling plans for truncated life tests")]
struct Cli {
    /// Output encoding.
    #[arg(long, value_enum, global = true, env = "LIFEPLAN_FORMAT", default_value = "table")]
    format: Format,

    /// Worker threads for searches and simulations. Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Design the smallest plan meeting both risks.
    Design {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        risk: RiskArgs,
        /// Units per group (group plans only).
        #[arg(long)]
        r: Option<u32>,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Regenerate one of the five standard design grids.
    Tables {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        table: u8,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Fit the inverse Weibull and competing models to failure times.
    Fit {
        /// Data file of positive decimals. Defaults to the bundled 30 kV
        /// insulating-fluid breakdown times.
        path: Option<PathBuf>,
        /// Models to fit, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "inverse-weibull,weibull,lognormal,log-logistic")]
        models: Vec<String>,
    },
    /// Operating characteristic over a range of quality ratios.
    Oc {
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        a: f64,
        /// Quality ratios m/m0 as start:stop:step.
        #[arg(long, value_parser = parse_range)]
        ratios: Ratios,
    },
    /// Acceptance probabilities of a double plan under other true shapes.
    Misspec {
        /// Double plan as n1,n2,c1,c2.
        #[arg(long, value_parser = parse_tuple::<4>)]
        double: [u32; 4],
        #[arg(long)]
        a: f64,
        /// True shape values, comma separated. May be empty.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        gamma0: Vec<f64>,
        #[arg(long)]
        r2: f64,
    },
    /// Run the test procedure by Monte Carlo.
    Simulate {
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        lambda: f64,
        /// Truncation time.
        #[arg(long)]
        t0: f64,
        /// Number of simulated lots.
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Median-table multiplier equivalent to a percentile-based test.
    ConvertPercentile {
        #[arg(long)]
        a_tilde: f64,
        #[arg(long)]
        gamma: f64,
        /// Percentile level in (0, 1).
        #[arg(long)]
        p: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Single,
    Double,
    Group,
}

#[derive(Debug, Args)]
struct RiskArgs {
    /// Shape of the lifetime law.
    #[arg(long)]
    gamma: f64,
    /// Test duration as a multiple of the specified median life.
    #[arg(long)]
    a: f64,
    /// Consumer's risk.
    #[arg(long)]
    beta: f64,
    /// Producer's risk.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Quality ratio at the consumer's risk.
    #[arg(long, default_value_t = 1.0)]
    r1: f64,
    /// Quality ratio at the producer's risk.
    #[arg(long)]
    r2: f64,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = SearchBounds::default().n_max)]
    n_max: u32,
    #[arg(long, default_value_t = SearchBounds::default().c_max)]
    c_max: u32,
    #[arg(long, default_value_t = SearchBounds::default().g_max)]
    g_max: u32,
}

impl BoundsArgs {
    fn bounds(&self) -> SearchBounds {
        SearchBounds {
            n_max: self.n_max,
            c_max: self.c_max,
            g_max: self.g_max,
        }
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct PlanArgs {
    /// Single plan as n,c.
    #[arg(long, value_parser = parse_tuple::<2>)]
    single: Option<[u32; 2]>,
    /// Double plan as n1,n2,c1,c2.
    #[arg(long, value_parser = parse_tuple::<4>)]
    double: Option<[u32; 4]>,
    /// Group plan as g,r,c.
    #[arg(long, value_parser = parse_tuple::<3>)]
    group: Option<[u32; 3]>,
}

impl PlanArgs {
    fn plan(&self) -> lifeplan::Result<Plan> {
        match (self.single, self.double, self.group) {
            (Some([n, c]), _, _) => Ok(SinglePlan::new(n, c)?.into()),
            (_, Some([n1, n2, c1, c2]), _) => Ok(DoublePlan::new(n1, n2, c1, c2)?.into()),
            (_, _, Some([g, r, c])) => Ok(GroupPlan::new(g, r, c)?.into()),
            _ => unreachable!("clap requires one plan flag"),
        }
    }
}

fn parse_tuple<const N: usize>(s: &str) -> Result<[u32; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated integers, got {s:?}"));
    }
    let mut out = [0; N];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part.parse().map_err(|_| format!("not a non-negative integer: {part:?}"))?;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct Ratios(Vec<f64>);

const MAX_RANGE_POINTS: usize = 100_000;

/// Expands `start:stop:step` into `start, start+step, ...` up to `stop`.
fn parse_range(s: &str) -> Result<Ratios, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(format!("expected start:stop:step, got {s:?}"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("not a number: {x:?}"));
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if !(start.is_finite() && stop.is_finite() && start > 0.0 && stop >= start) {
        return Err(format!("need 0 < start <= stop, got {start}:{stop}"));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(format!("step must be positive, got {step}"));
    }
    // Tolerate rounding in (stop - start) / step so the end point is kept.
    let count = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize + 1;
    if count > MAX_RANGE_POINTS {
        return Err(format!("range has {count} points, at most {MAX_RANGE_POINTS} allowed"));
    }
    Ok(Ratios((0..count).map(|i| start + step * i as f64).collect()))
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Infeasible(String),
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Data(_) => 4,
        }
    }
}

impl From<lifeplan::Error> for Failure {
    fn from(e: lifeplan::Error) -> Self {
        use lifeplan::Error::*;
        match e {
            Domain { .. } | InvalidPlan(_) | InvalidGrid(_) => Failure::Usage(e.to_string()),
            InvalidSample(_) | NonConvergent { .. } | Data(_) => Failure::Data(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(String, Option<Failure>), Failure> {
    let report = match cli.command {
        Command::Design { kind, risk, r, bounds } => {
            let spec = lifeplan::RiskSpec::new(risk.beta, risk.alpha, risk.r1, risk.r2, risk.a, risk.gamma)?;
            let (report, feasible) = commands::design(kind, &spec, r, &bounds.bounds())?;
            let text = report.render(cli.format);
            let failure = (!feasible).then(|| Failure::Infeasible("no plan satisfies both risks within the bounds".into()));
            return Ok((text, failure));
        }
        Command::Tables { table, bounds } => commands::tables(table, &bounds.bounds())?,
        Command::Fit { path, models } => commands::fit(path.as_deref(), &models)?,
        Command::Oc { plan, gamma, a, ratios } => commands::oc(&plan.plan()?, gamma, a, &ratios.0)?,
        Command::Misspec { double, a, gamma0, r2 } => {
            let [n1, n2, c1, c2] = double;
            commands::misspec(&DoublePlan::new(n1, n2, c1, c2)?, a, &gamma0, r2)?
        }
        Command::Simulate { plan, gamma, lambda, t0, reps, seed } => {
            commands::simulate(&plan.plan()?, gamma, lambda, t0, reps, seed)?
        }
        Command::ConvertPercentile { a_tilde, gamma, p } => commands::convert_percentile(a_tilde, gamma, p)?,
    };
    Ok((report.render(cli.format), None))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli)) {
        Ok((text, failure)) => {
            print!("{text}");
            match failure {
                None => ExitCode::SUCCESS,
                Some(f) => {
                    report_failure(&f);
                    ExitCode::from(f.code())
                }
            }
        }
        Err(f) => {
            report_failure(&f);
            ExitCode::from(f.code())
        }
    }
}

fn report_failure(f: &Failure) {
    match f {
        Failure::Usage(m) | Failure::Infeasible(m) | Failure::Data(m) => eprintln!("error: {m}"),
    }
}
