use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};
use serde_json::{json, Value};

use asymlift_core::diagnostics::{classify, fixed_point_audit};
use asymlift_core::io::{CandidateDocument, ChannelDocument};
use asymlift_core::lift::{build_lift, poisson_boundary, verify_asymptotic_equalities, verify_reversible_lift, wedderburn};
use asymlift_core::markov::{analyze_structure, build_markov_lift, decay_certificate, peripheral_spectrum_check};
use asymlift_core::operator::matrix_to_rows;
use asymlift_core::pipeline::{golden_suite, run_pipeline, DEFAULT_LEVELS};
use asymlift_core::sampling::rng_from_seed;
use asymlift_core::spectral::{eigendecompose, peripheral};
use asymlift_core::{Config, Error};

/// Asymptotic lifts of UCP maps and stochastic matrices.
#[derive(Parser)]
#[command(name = "asymlift", version, about)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// JSON file with tolerance and sampling overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Iterates used by the asymptotic checks.
    #[arg(long, global = true)]
    kmax: Option<usize>,
    /// Random functionals per check.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Matrix levels, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Horizon of the decay certificates.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check complete positivity, unitality and hermiticity preservation.
    Validate { input: PathBuf },
    /// Spectrum, peripheral part and sub-peripheral radius.
    Analyze { input: PathBuf },
    /// Build the asymptotic lift, optionally verifying the asymptotic equalities.
    Lift {
        input: PathBuf,
        #[arg(long)]
        verify: bool,
    },
    /// Check a proposed reversible lift against a channel.
    VerifyLift { channel: PathBuf, candidate: PathBuf },
    /// Cyclic structure, lift and decay certificate of a stochastic matrix.
    Markov { input: PathBuf },
    /// Decide slow oscillation; exits 0 (slowly oscillating), 1 (not) or 2 (inconclusive).
    Classify { input: PathBuf },
    /// Full pipeline producing one analysis bundle.
    Run { input: PathBuf },
    /// Compare pipeline output on a fixture directory with stored expectations.
    Golden {
        dir: PathBuf,
        /// Rewrite missing or drifting expectations.
        #[arg(long)]
        bless: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            error!("{e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(opts: &GlobalOpts) -> Result<Config, Error> {
    let mut cfg = match &opts.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => Config::default(),
    };
    if let Some(v) = opts.seed {
        cfg.seed = v;
    }
    if let Some(v) = opts.kmax {
        cfg.k_max = v;
    }
    if let Some(v) = opts.samples {
        cfg.samples = v;
    }
    if let Some(v) = opts.nmax {
        cfg.n_max = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(opts: &GlobalOpts, value: &Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match &opts.out {
        Some(path) => {
            std::fs::write(path, text)?;
            info!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn read_channel(path: &Path, cfg: &Config) -> Result<asymlift_core::io::ChannelInput, Error> {
    let input = ChannelDocument::read(path)?.to_input(cfg)?;
    info!("loaded {:?} input of dimension {}", input.kind, input.channel.dim());
    Ok(input)
}

fn execute(cli: &Cli) -> Result<u8, Error> {
    let opts = &cli.opts;
    let cfg = load_config(opts)?;
    let levels = opts.levels.clone().unwrap_or_else(|| DEFAULT_LEVELS.to_vec());
    match &cli.command {
        Command::Validate { input } => {
            let ch = read_channel(input, &cfg)?.channel;
            let report = ch.validate(&cfg);
            emit(opts, &json!(report))?;
            if report.is_ucp() {
                Ok(0)
            } else {
                warn!("input is not a UCP map");
                Ok(1)
            }
        }
        Command::Analyze { input } => {
            let ch = read_channel(input, &cfg)?.channel;
            ch.require_ucp(&cfg)?;
            let spec = eigendecompose(ch.superoperator(), &cfg)?;
            let pd = peripheral(&spec, cfg.tol_per)?;
            let eigenvalues: Vec<[f64; 2]> = spec.sorted_eigenvalues().iter().map(|z| [z.re, z.im]).collect();
            emit(
                opts,
                &json!({
                    "eigenvalues": eigenvalues,
                    "peripheral_eigenvalues": pd.peripheral_eigenvalues,
                    "sub_radius": pd.sub_radius,
                    "semisimple": pd.semisimple,
                    "diagonalizable": pd.diagonalizable,
                    "defect_report": spec.defect_report,
                }),
            )?;
            Ok(0)
        }
        Command::Lift { input, verify } => {
            let ch = read_channel(input, &cfg)?.channel;
            let lift = build_lift(&ch, &cfg)?;
            info!("lift has dimension {}", lift.dim());
            let mut rng = rng_from_seed(cfg.seed);
            let mut out = json!({
                "dim": lift.dim(),
                "basis": lift.basis().iter().map(matrix_to_rows).collect::<Vec<_>>(),
                "alpha": matrix_to_rows(&lift.alpha),
                "unit": lift.algebra.unit().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "structure_constants": lift.algebra.structure_constants().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "axiom_residuals": lift.algebra.residuals,
                "invariant_residuals": lift.residuals,
                "wedderburn": wedderburn(&lift.algebra, cfg.tol_alg, &mut rng),
                "poisson_boundary": poisson_boundary(&ch, &lift, &cfg, &mut rng)?,
            });
            let mut code = 0;
            if *verify {
                let report = verify_asymptotic_equalities(&ch, &lift, &levels, &cfg, &mut rng)?;
                if !report.pass {
                    warn!("asymptotic equalities fail");
                    code = 1;
                }
                out["verification"] = json!(report);
            }
            emit(opts, &out)?;
            Ok(code)
        }
        Command::VerifyLift { channel, candidate } => {
            let ch = read_channel(channel, &cfg)?.channel;
            let cand = CandidateDocument::read(candidate)?.to_candidate()?;
            let report = verify_reversible_lift(&cand, &ch, &[], &cfg, &mut rng_from_seed(cfg.seed))?;
            emit(opts, &json!(report))?;
            if !report.inequality_certified && report.pass {
                warn!("inequality holds on the lower bounds but is not certified for every functional");
            }
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Markov { input } => {
            let input = read_channel(input, &cfg)?;
            let p = input
                .stochastic
                .ok_or_else(|| Error::InvalidInput("markov needs a stochastic matrix".into()))?;
            let cs = analyze_structure(&p);
            let mut out = json!({ "structure": cs });
            if cs.irreducible {
                out["peripheral_spectrum"] = json!(peripheral_spectrum_check(&p, &cs, &cfg)?);
                let ml = build_markov_lift(&p, &cs, &cfg)?;
                out["lift"] = json!({
                    "period": ml.period,
                    "indicators": ml.indicators,
                    "alpha": matrix_to_rows(&ml.alpha),
                    "q": matrix_to_rows(&ml.q),
                    "sub_radius": ml.sub_radius,
                    "residuals": ml.residuals,
                });
                out["decay"] = json!(decay_certificate(&p, &ml, cfg.n_max));
            } else {
                info!("chain is reducible; reporting the condensation and closed classes only");
            }
            emit(opts, &out)?;
            Ok(0)
        }
        Command::Classify { input } => {
            let ch = read_channel(input, &cfg)?.channel;
            let lift = build_lift(&ch, &cfg)?;
            let mut rng = rng_from_seed(cfg.seed);
            let report = classify(&ch, &lift, &cfg, &mut rng)?;
            let fixed = fixed_point_audit(&ch, &lift, &cfg, &mut rng)?;
            info!("verdict: {:?}", report.verdict);
            let code = report.verdict.exit_code() as u8;
            emit(opts, &json!({ "report": report, "fixed_point_audit": fixed }))?;
            Ok(code)
        }
        Command::Run { input } => {
            let doc = ChannelDocument::read(input)?;
            let bundle = run_pipeline(&doc, &cfg);
            for e in &bundle.errors {
                warn!("stage {} failed: {}", e.stage, e.message);
            }
            emit(opts, &serde_json::to_value(&bundle)?)?;
            Ok(if bundle.errors.is_empty() { 0 } else { 1 })
        }
        Command::Golden { dir, bless } => {
            let summary = golden_suite(dir, &cfg, *bless)?;
            for d in &summary.drifts {
                warn!("{}: {} drifted", d.file, d.path);
            }
            info!("{} of {} fixtures match", summary.passed, summary.checked);
            emit(opts, &json!(summary))?;
            Ok(if summary.ok() { 0 } else { 1 })
        }
    }
}
