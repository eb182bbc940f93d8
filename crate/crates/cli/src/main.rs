use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phaseless::circulant::sample_random_circulant;
use phaseless::harness::{run, ExperimentConfig, ExperimentKind, ExperimentReport};
use phaseless::injectivity::FunctionalSet;
use phaseless::measurements::simulate;
use phaseless::spectral::{iteration_regular, OperatorFile};
use phaseless::{Error, Result, Tolerance};

#[derive(Parser)]
#[command(
    name = "phaseless",
    version,
    about = "Phaseless dynamical sampling: certificates and recovery experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Injectivity certificates for each location set.
    Certify(RunArgs),
    /// Random-start recovery trials for each location set.
    Reconstruct(RunArgs),
    /// Trial batches over location sets with the success-probability curve.
    Sweep(RunArgs),
    /// Write measurement records for each location set.
    Simulate(RunArgs),
    /// Sample a random unit-modulus circulant and write it as an operator file.
    RandomCirculant(CirculantArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// n = 9 decreasing kernel, I = {1,2,3} and {1,4,7}, noise free.
    Uniqueness,
    /// Certificates for all 3-subsets of Z_9.
    Triples,
    /// Random circulant at n = 15, sigma = 0.01, default location sweep.
    Sweep15,
    /// Random circulant at n = 45, sigma = 0.01, default location sweep.
    Sweep45,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in config.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "PHASELESS_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct CirculantArgs {
    /// Odd dimension.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "PHASELESS_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Also run the iteration-regularity test.
    #[arg(long)]
    check: bool,
}

fn preset_config(p: Preset) -> ExperimentConfig {
    match p {
        Preset::Uniqueness => {
            ExperimentConfig::uniqueness_replica(vec![vec![1, 2, 3], vec![1, 4, 7]])
        }
        Preset::Triples => ExperimentConfig::triples_certificate(),
        Preset::Sweep15 => ExperimentConfig::noisy_sweep(15),
        Preset::Sweep45 => ExperimentConfig::noisy_sweep(45),
    }
}

fn load(args: &RunArgs, kind: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(p)) => preset_config(p),
        (None, None) => return Err(Error::Config("give --config or --preset".into())),
    };
    if let Some(k) = kind {
        cfg.kind = k;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.sigma {
        cfg.sigma = s;
    }
    if let Some(r) = args.radius {
        cfg.solve.radius = r;
    }
    if args.threshold.is_some() {
        cfg.threshold = args.threshold;
    }
    if args.out_dir.is_some() {
        cfg.out_dir = args.out_dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg_dir: Option<&Path>) -> PathBuf {
    cfg_dir.map_or_else(|| PathBuf::from("phaseless-out"), Path::to_path_buf)
}

fn print_summary(report: &ExperimentReport) {
    for c in &report.certificates {
        let verdict = c.verdict.map_or_else(
            || format!("error: {}", c.error.as_deref().unwrap_or("")),
            |v| format!("{v:?}"),
        );
        let extra = match (c.coprime, c.agrees) {
            (Some(cp), Some(a)) => format!(" coprime={cp} agrees={a}"),
            _ => String::new(),
        };
        println!("certificate I={:?} verdict={verdict}{extra}", c.locations);
    }
    for p in &report.curve {
        let fmt = |v: Option<f64>| v.map_or_else(|| "undefined".into(), |x| format!("{x:.4e}"));
        println!(
            "I={:?} successes={}/{} P_I={} mean_err={} threshold={:.3e}",
            p.locations,
            p.successes,
            p.trials,
            fmt(p.p_i),
            fmt(p.mean_err),
            p.threshold
        );
    }
}

fn experiment(args: &RunArgs, kind: ExperimentKind) -> Result<()> {
    let cfg = load(args, Some(kind))?;
    let dir = out_dir(cfg.out_dir.as_deref());
    let report = run(&cfg)?;
    print_summary(&report);
    for p in report.write_outputs(&dir)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn simulate_records(args: &RunArgs) -> Result<()> {
    let cfg = load(args, None)?;
    let dir = out_dir(cfg.out_dir.as_deref());
    std::fs::create_dir_all(&dir)?;
    let spec = cfg.build_operator()?;
    let f = cfg.build_signal();
    for (k, set) in cfg.location_sets.iter().enumerate() {
        let phi = FunctionalSet::standard_basis(cfg.n, set)?;
        let rec = simulate(&spec, &f, &phi, cfg.max_time(), cfg.sigma, cfg.seed)?;
        let path = dir.join(format!("measurements_{k}.txt"));
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
        rec.write_text(&mut w)?;
        w.flush()?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn random_circulant(args: &CirculantArgs) -> Result<()> {
    let tol = Tolerance::default();
    let (model, spec) = sample_random_circulant(args.n, args.seed, &tol)?;
    let dir = out_dir(args.out_dir.as_deref());
    std::fs::create_dir_all(&dir)?;
    let op = dir.join(format!("circulant_n{}_seed{}.json", args.n, args.seed));
    std::fs::write(
        &op,
        serde_json::to_string_pretty(&OperatorFile::from_spec(&spec))? + "\n",
    )?;
    let m = dir.join(format!(
        "circulant_n{}_seed{}_model.json",
        args.n, args.seed
    ));
    std::fs::write(&m, serde_json::to_string_pretty(&model)? + "\n")?;
    println!("wrote {}", op.display());
    println!("wrote {}", m.display());
    if args.check {
        let v = iteration_regular(&spec, &tol)?;
        println!("iteration_regular={} margin={:e}", v.regular, v.margin);
        if let Some(w) = v.witness {
            println!(
                "witness k={} exponents={:?} normalized_det={:e}",
                w.k, w.exponents, w.normalized_det
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Certify(a) => experiment(a, ExperimentKind::Certify),
        Command::Reconstruct(a) => experiment(a, ExperimentKind::Reconstruct),
        Command::Sweep(a) => experiment(a, ExperimentKind::Sweep),
        Command::Simulate(a) => simulate_records(a),
        Command::RandomCirculant(a) => random_circulant(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
