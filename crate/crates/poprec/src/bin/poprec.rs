//! Command-line frontend: every pipeline stage as a subcommand.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical/solver failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use poprec::analysis::{
    self, bounds_csv_row, lecam_pair, lossy_t_bounds, noisy_t_bounds, BoundConstants,
    BOUNDS_CSV_HEADER,
};
use poprec::estimators::SampleBatch;
use poprec::lpsolve::Arithmetic;
use poprec::minimax::{
    delta_of_t_in, delta_tilde_of_t_in, record_line, synthesize_estimator_in, t_of_delta_in,
    FunctionalVector,
};
use poprec::model::{
    build_phi_lossy, build_phi_lossy_exact, build_phi_noisy, build_phi_noisy_exact,
    rational_from_decimal_str, ChannelKind, ChannelModel, TransitionMatrix,
};
use poprec::recovery::{recover_population, RecoveryConfig, SynthesisFactory};
use poprec::simharness::{run_experiment, ExperimentConfig};
use poprec::Error;

#[derive(Parser)]
#[command(
    name = "poprec",
    version,
    about = "Population recovery toolkit: transition matrices, minimax LP estimators, \
             Le Cam bounds, Monte Carlo experiments and prefix-tree recovery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Lossy,
    Noisy,
}

impl ModelArg {
    fn kind(self) -> ChannelKind {
        match self {
            ModelArg::Lossy => ChannelKind::Lossy,
            ModelArg::Noisy => ChannelKind::Noisy,
        }
    }
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel model.
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Per-bit corruption probability (decimal).
    #[arg(long)]
    eps: String,
}

impl ChannelArgs {
    fn eps_f64(&self) -> Result<f64, Error> {
        self.eps
            .parse::<f64>()
            .map_err(|e| Error::InvalidInput(format!("bad --eps {:?}: {e}", self.eps)))
    }

    fn channel(&self) -> Result<ChannelModel, Error> {
        ChannelModel::new(self.kind(), self.eps_f64()?)
    }

    fn kind(&self) -> ChannelKind {
        self.model.kind()
    }

    /// Build Phi: exact mode snaps the decimal text of eps to a rational.
    fn build_phi(&self, d: usize, exact: bool) -> Result<TransitionMatrix, Error> {
        if exact {
            let eps = rational_from_decimal_str(&self.eps)?;
            match self.kind() {
                ChannelKind::Lossy => build_phi_lossy_exact(d, &eps),
                ChannelKind::Noisy => build_phi_noisy_exact(d, &eps),
            }
        } else {
            let eps = self.eps_f64()?;
            match self.kind() {
                ChannelKind::Lossy => build_phi_lossy(d, eps),
                ChannelKind::Noisy => build_phi_noisy(d, eps),
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the weight-transition matrix as CSV.
    Phi {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Dimension (string length).
        #[arg(long)]
        d: usize,
        /// Build in exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize the minimax linear estimator for P_0 at sample size n.
    Synthesize {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u64,
        /// Solve the LP in exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a dual LP: delta(t) for --t, or the min-TV t(delta) for --delta.
    LpValue {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        d: usize,
        /// Separation target for the min-TV LP.
        #[arg(long, conflicts_with = "t")]
        delta: Option<f64>,
        /// Channel-output l1 budget for delta(t).
        #[arg(long)]
        t: Option<f64>,
        /// Solve the centered variant (adds <Delta, 1> = 0).
        #[arg(long)]
        dual_tilde: bool,
        #[arg(long)]
        exact: bool,
    },
    /// Closed-form bound table row (CSV), optionally with the LP value.
    Bounds {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        delta: f64,
        /// Also solve the LP at this dimension and report its value.
        #[arg(long)]
        d: Option<usize>,
    },
    /// Build the Le Cam two-point pair for the lossy lower bound.
    Lecam {
        /// Erasure probability (must exceed 1/2).
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment described by a JSON config.
    Simulate {
        /// Path to the JSON config (requires an explicit seed field).
        #[arg(long)]
        config: PathBuf,
        /// Per-(n, trial) rows CSV.
        #[arg(long)]
        out: PathBuf,
        /// Summary CSV; printed to stdout when omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Recover the full distribution from a sample batch file.
    Recover {
        /// Batch file ({0,1,?} records, optional header).
        #[arg(long)]
        samples: PathBuf,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        delta: f64,
        /// Overall failure budget for median boosting.
        #[arg(long)]
        tau: f64,
        /// Output distribution file; a `.stats.csv` sidecar is written too.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in invariant suite.
    Selftest,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and exit 0.
            if e.kind() == clap::error::ErrorKind::DisplayHelp
                || e.kind() == clap::error::ErrorKind::DisplayVersion
            {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Usage problems exit 1; numerical/solver failures exit 2.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::SolverStalled(_)
        | Error::Infeasible(_)
        | Error::Unbounded
        | Error::DegenerateNoisy
        | Error::ChannelUninvertible => 2,
        _ => 1,
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Phi {
            channel,
            d,
            exact,
            out,
        } => {
            let phi = channel.build_phi(d, exact)?;
            emit(out.as_ref(), &phi.to_csv())
        }
        Command::Synthesize {
            channel,
            d,
            n,
            exact,
            out,
        } => {
            let phi = channel.build_phi(d, exact)?;
            let h = FunctionalVector::e0(d);
            let arith = if exact {
                Arithmetic::Rational
            } else {
                Arithmetic::Float
            };
            let s = synthesize_estimator_in(&phi, &h, n, arith)?;
            let mut text = record_line(
                "synthesize",
                s.value,
                n as f64,
                d,
                channel.eps_f64()?,
                &s.g.g,
            );
            text.push('\n');
            text.push_str(&format!(
                "# bias_bound={} sup_norm={}\n",
                s.bias_bound, s.sup_norm
            ));
            emit(out.as_ref(), &text)
        }
        Command::LpValue {
            channel,
            d,
            delta,
            t,
            dual_tilde,
            exact,
        } => {
            let phi = channel.build_phi(d, exact)?;
            let h = FunctionalVector::e0(d);
            let arith = if exact {
                Arithmetic::Rational
            } else {
                Arithmetic::Float
            };
            let eps = channel.eps_f64()?;
            let (kind, x, result) = match (delta, t) {
                (Some(delta), None) => ("t_of_delta", delta, t_of_delta_in(&phi, delta, arith)?),
                (None, Some(t)) if dual_tilde => {
                    ("delta_tilde", t, delta_tilde_of_t_in(&phi, &h, t, arith)?)
                }
                (None, Some(t)) => ("delta", t, delta_of_t_in(&phi, &h, t, arith)?),
                _ => {
                    return Err(Error::InvalidInput(
                        "exactly one of --delta or --t is required".into(),
                    ))
                }
            };
            println!(
                "{}",
                record_line(kind, result.value, x, d, eps, result.delta.values())
            );
            if let Some(w) = &result.warning {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::Bounds { channel, delta, d } => {
            let eps = channel.eps_f64()?;
            let lp_value = match d {
                Some(dim) => Some(
                    t_of_delta_in(&channel.build_phi(dim, false)?, delta, Arithmetic::Float)?
                        .value,
                ),
                None => None,
            };
            let row = match channel.kind() {
                ChannelKind::Lossy => {
                    let b = lossy_t_bounds(delta, eps)?;
                    if let Some(note) = b.note {
                        eprintln!("note: {note}");
                    }
                    bounds_csv_row("lossy", eps, delta, d, lp_value, b.lower, b.upper, delta)
                }
                ChannelKind::Noisy => {
                    let dim = d.ok_or_else(|| {
                        Error::InvalidInput("noisy bounds need --d (they scale with it)".into())
                    })?;
                    let b = noisy_t_bounds(delta, dim, eps, BoundConstants::default())?;
                    bounds_csv_row(
                        "noisy",
                        eps,
                        delta,
                        d,
                        lp_value,
                        b.lower,
                        b.upper,
                        b.trivial_cap,
                    )
                }
            };
            println!("{BOUNDS_CSV_HEADER}");
            println!("{row}");
            Ok(())
        }
        Command::Lecam { eps, delta, d, out } => {
            let pair = lecam_pair(delta, eps, d)?;
            let mut text = format!(
                "# lecam eps={eps} delta={delta} d={d} separation={} hellinger_sq={} delta0={}\n",
                pair.separation, pair.hellinger_sq, pair.delta0
            );
            text.push_str("weight,pi,pi_prime\n");
            for w in 0..=d {
                text.push_str(&format!(
                    "{w},{},{}\n",
                    pair.pi.prob(w),
                    pair.pi_prime.prob(w)
                ));
            }
            emit(out.as_ref(), &text)
        }
        Command::Simulate {
            config,
            out,
            summary,
        } => {
            let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&config)?)?;
            let result = run_experiment(&cfg)?;
            std::fs::write(&out, result.rows_csv())?;
            match summary {
                Some(path) => std::fs::write(path, result.summary_csv())?,
                None => print!("{}", result.summary_csv()),
            }
            Ok(())
        }
        Command::Recover {
            samples,
            channel,
            delta,
            tau,
            out,
        } => {
            let text = std::fs::read_to_string(&samples)?;
            let (batch, header) = SampleBatch::from_text(&text)?;
            let model = channel.channel()?;
            if let Some(h) = &header {
                if h.model != model.kind || (h.eps - model.epsilon).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "batch header declares model={} eps={}, flags say model={} eps={}",
                        h.model, h.eps, model.kind, model.epsilon
                    )));
                }
            }
            let config = RecoveryConfig::new(delta, tau)?;
            let factory = SynthesisFactory::new(model, batch.n() as u64);
            let result = recover_population(&batch, &config, &factory)?;
            result.estimate.write_file(&out)?;
            let stats_path = out.with_extension("stats.csv");
            std::fs::write(&stats_path, result.stats.to_csv())?;
            eprintln!(
                "recovered {} strings; stats in {}",
                result.survivors.len(),
                stats_path.display()
            );
            Ok(())
        }
        Command::Selftest => selftest(),
    }
}

/// Fast invariant sweep across the pipeline; prints one line per check.
fn selftest() -> Result<(), Error> {
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    // Column stochasticity across both channels.
    let mut ok = true;
    for eps in [0.0, 0.3, 0.75, 1.0] {
        for d in [0usize, 4, 17] {
            for phi in [build_phi_lossy(d, eps)?, build_phi_noisy(d, eps)?] {
                for j in 0..=d {
                    let s: f64 = phi.column(j).iter().sum();
                    ok &= (s - 1.0).abs() <= 1e-12;
                    ok &= phi.column(j).iter().all(|&x| x >= 0.0);
                }
            }
        }
    }
    check("transition columns stochastic", ok);

    // Strong duality on a small grid.
    let mut ok = true;
    for (kind, eps) in [(ChannelKind::Lossy, 0.6), (ChannelKind::Noisy, 0.25)] {
        let phi = ChannelModel::new(kind, eps)?.build_phi(8)?;
        let h = FunctionalVector::e0(8);
        for n in [100u64, 10_000] {
            let s = synthesize_estimator_in(&phi, &h, n, Arithmetic::Float)?;
            let t = 1.0 / (n as f64).sqrt();
            let dual = delta_of_t_in(&phi, &h, t, Arithmetic::Float)?;
            ok &= (s.value - dual.value).abs() <= 1e-7 * s.value.max(1.0);
        }
    }
    check("primal synthesis matches dual LP value", ok);

    // Low-erasure exactness t(delta) = delta.
    let phi = build_phi_lossy(12, 0.4)?;
    let t = t_of_delta_in(&phi, 0.1, Arithmetic::Float)?.value;
    check("lossy low-erasure t(delta) = delta", (t - 0.1).abs() <= 1e-9);

    // Round trip delta(t(delta)) = delta.
    let phi = build_phi_lossy(15, 0.7)?;
    let h = FunctionalVector::e0(15);
    let t = t_of_delta_in(&phi, 0.05, Arithmetic::Float)?.value;
    let back = delta_of_t_in(&phi, &h, t, Arithmetic::Float)?.value;
    check("min-TV round trip", (back - 0.05).abs() <= 1e-6);

    // Unbiased coefficients invert Phi exactly.
    let eps = rational_from_decimal_str("0.75")?;
    check(
        "unbiased estimator inverts the channel exactly",
        poprec::estimators::unbiased_is_exact(20, &eps)?,
    );

    // Smoothed-bias Laguerre identity.
    let bias = poprec::estimators::smoothed_bias_exact(30, 0.75, 2.0)?;
    check(
        "smoothed bias closed form matches matrix product",
        bias.max_disagreement() <= 1e-10,
    );

    // TV / Hellinger bracket on a fixed pair.
    let p = poprec::model::WeightDistribution::new(vec![0.5, 0.3, 0.2])?;
    let q = poprec::model::WeightDistribution::new(vec![0.2, 0.5, 0.3])?;
    let tv = analysis::tv_distance(&p, &q)?;
    let h2 = analysis::hellinger_sq(&p, &q)?;
    check(
        "TV and Hellinger bracket",
        0.5 * h2 <= tv + 1e-12 && tv <= h2.sqrt() * (1.0 - h2 / 4.0).sqrt() + 1e-12,
    );

    // Le Cam pair feasibility at the documented point.
    let pair = lecam_pair(0.05, 0.7, 42)?;
    check(
        "Le Cam pair separation and Hellinger bound",
        pair.separation >= 0.05
            && pair.hellinger_sq
                <= 36.0 * (std::f64::consts::E * 0.05 * (20.0f64).ln()).powf(2.0 * 0.7 / 0.3),
    );

    if failures == 0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{failures} selftest checks failed"
        )))
    }
}
