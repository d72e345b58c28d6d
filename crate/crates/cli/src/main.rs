use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qmarginal::consistency::{consistency_verdict, MarginalSet};
use qmarginal::criteria::{extension_verdict, ExtensionProblem, Flavor};
use qmarginal::families::{bell_state, werner_state, BellDiagonalParams, WernerParams};
use qmarginal::linalg::{DensityMatrix, SystemLayout, Tolerances};
use qmarginal::oracle::{oracle_feasibility, OracleConfig};
use qmarginal::random::{random_density, seeded};
use qmarginal::statefile::{read_state, write_state};
use qmarginal::sweep::{self, BellCriterion, Table};
use qmarginal::volume::{estimate_volume, polytope_volume_exact, Region};

#[derive(Parser)]
#[command(name = "qmarginal", version, about = "Extension and marginal-consistency checks for bipartite quantum states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Symmetric,
    Bosonic,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::Symmetric => Flavor::Symmetric,
            FlavorArg::Bosonic => Flavor::Bosonic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionArg {
    Polytope,
    Exact,
    Simplex,
}

impl From<RegionArg> for Region {
    fn from(r: RegionArg) -> Self {
        match r {
            RegionArg::Polytope => Region::Polytope,
            RegionArg::Exact => Region::Exact,
            RegionArg::Simplex => Region::Simplex,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Werner,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether a state can have a k-symmetric or k-bosonic extension.
    Check {
        state: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum, default_value = "symmetric")]
        flavor: FlavorArg,
        /// Validation tolerance for Hermiticity, trace and positivity.
        #[arg(long)]
        tol: Option<f64>,
        /// Also run the numerical feasibility oracle.
        #[arg(long)]
        with_oracle: bool,
    },
    /// Test whether marginals rho_AB1, rho_AB2, .. can come from one state.
    Consistency {
        #[arg(required = true, num_args = 2..)]
        states: Vec<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// CSV of Bell-diagonal criteria over the simplex grid with step 1/n.
    BellSweep {
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Comma-separated subset of paper,exact,ssa,ppt.
        #[arg(long, value_delimiter = ',', default_value = "paper,exact,ssa,ppt")]
        criteria: Vec<String>,
    },
    /// CSV of derived-state PPT along the Werner line.
    WernerSweep {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.01)]
        psi_step: f64,
        #[arg(long)]
        with_oracle: bool,
    },
    /// Monte Carlo volume of a Bell-diagonal region, as JSON.
    Volume {
        #[arg(long, value_enum)]
        which: RegionArg,
        #[arg(long, default_value_t = 10_000_000)]
        samples: u64,
        #[arg(long)]
        seed: u64,
    },
    /// CSV of consistency criteria for pairs of marginals from a family.
    ConsistencySweep {
        #[arg(long, value_enum, default_value = "werner")]
        family: Family,
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// CSV of the trace distance to the tilde state and its bound, per k.
    Definetti {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        /// State file; a random d x d state is used when absent.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Write a state file for a Bell-diagonal or Werner state.
    State {
        #[command(subcommand)]
        kind: StateKind,
    },
}

#[derive(Subcommand)]
enum StateKind {
    /// Weights of the four Bell projectors.
    Bell {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
    },
    Werner {
        #[arg(long)]
        d: usize,
        #[arg(long, allow_hyphen_values = true)]
        psi: f64,
    },
    /// Maximally mixed state on the given factors.
    Mixed {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
    },
}

fn tolerances(tol: Option<f64>) -> anyhow::Result<Tolerances> {
    match tol {
        None => Ok(Tolerances::default()),
        Some(t) if t > 0.0 && t.is_finite() => Ok(Tolerances::uniform(t)),
        Some(t) => bail!("--tol must be positive, got {t}"),
    }
}

fn load(path: &Path, tol: Tolerances) -> anyhow::Result<DensityMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_state(&text, tol).with_context(|| format!("invalid state file {}", path.display()))
}

fn print_json(v: &Value) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn print_table(t: &Table) -> anyhow::Result<()> {
    t.write_csv(io::stdout().lock())?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Check {
            state,
            k,
            flavor,
            tol,
            with_oracle,
        } => {
            let rho = load(&state, tolerances(tol)?)?;
            let problem = ExtensionProblem::new(rho, k, flavor.into())?;
            let verdict = extension_verdict(&problem)?;
            let mut out = json!({
                "criterion": verdict.criterion,
                "status": verdict.status,
                "test": verdict.test,
                "boundary": verdict.boundary,
                "witness": verdict.witness,
                "derived_state_min_pt_eig": verdict.min_pt_eigenvalue(),
                "k": k,
                "flavor": problem.flavor(),
            });
            if with_oracle {
                let r = oracle_feasibility(&problem, &OracleConfig::default())?;
                out["oracle"] = serde_json::to_value(r)?;
            }
            print_json(&out)
        }
        Command::Consistency { states, tol } => {
            let tol = tolerances(tol)?;
            let marginals = states
                .iter()
                .map(|p| load(p, tol))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let v = consistency_verdict(&MarginalSet::new(marginals)?)?;
            print_json(&serde_json::to_value(v)?)
        }
        Command::BellSweep { grid, k, criteria } => {
            let criteria = criteria
                .iter()
                .map(|s| s.trim().parse::<BellCriterion>())
                .collect::<Result<Vec<_>, _>>()?;
            print_table(&sweep::bell_sweep(grid, k, &criteria)?)
        }
        Command::WernerSweep {
            d,
            k,
            psi_step,
            with_oracle,
        } => {
            let cfg = OracleConfig::default();
            print_table(&sweep::werner_sweep(d, k, psi_step, with_oracle.then_some(&cfg))?)
        }
        Command::Volume {
            which,
            samples,
            seed,
        } => {
            let region: Region = which.into();
            let est = estimate_volume(region, samples, seed)?;
            let mut out = serde_json::to_value(est)?;
            out["region"] = serde_json::to_value(region)?;
            if region == Region::Polytope {
                out["analytic"] = json!(polytope_volume_exact());
            }
            print_json(&out)
        }
        Command::ConsistencySweep { family, grid } => match family {
            Family::Werner => print_table(&sweep::consistency_sweep(grid)?),
        },
        Command::Definetti {
            d,
            k_max,
            state,
            seed,
            tol,
        } => {
            let rho = match state {
                Some(p) => load(&p, tolerances(tol)?)?,
                None => random_density(SystemLayout::bipartite(d, d)?, &mut seeded(seed)),
            };
            print_table(&sweep::definetti_table(&rho, k_max)?)
        }
        Command::State { kind } => {
            let rho = match kind {
                StateKind::Bell { p } => {
                    let p: [f64; 4] = p
                        .try_into()
                        .map_err(|p: Vec<f64>| anyhow::anyhow!("--p needs 4 weights, got {}", p.len()))?;
                    bell_state(&BellDiagonalParams::new(p)?)
                }
                StateKind::Werner { d, psi } => werner_state(&WernerParams::new(d, psi)?),
                StateKind::Mixed { dims } => DensityMatrix::maximally_mixed(SystemLayout::new(dims)?),
            };
            println!("{}", write_state(&rho));
            Ok(())
        }
    }
}

/// 2 for resource-guard failures, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let guarded = err
        .chain()
        .any(|e| matches!(e.downcast_ref::<qmarginal::Error>(), Some(qmarginal::Error::ResourceLimit { .. })));
    if guarded {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    // clap's own usage-error code (2) would collide with the resource guard.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
