use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fbmc_core::filter::{builtin_filter, format_filter_coeffs, BuiltinFilter};
use fbmc_core::kv::KvFile;
use fbmc_core::metrics::{constraint_values, time_dispersion};
use fbmc_core::optimizer::{run_design, DesignSpec};
use fbmc_core::sim::{ber_csv, persist_ber, persist_pair, run_ber, with_workers, ExperimentSpec, PsdSpec, SweepSpec};
use fbmc_core::svg::{LinePlot, Series};
use fbmc_core::FbmcConfig;

/// QAM-FBMC waveform toolkit.
///
/// Every run subcommand takes a `key = value` file. Results go to the
/// file's output location when one is set, otherwise CSV is printed.
/// Worker threads can be capped with FBMC_WORKERS.
#[derive(Parser)]
#[command(name = "fbmc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a prototype filter by pattern search
    Design { config: PathBuf },
    /// Self-SINR curves over AWGN
    Sinr { config: PathBuf },
    /// Monte Carlo bit error rate
    Ber { config: PathBuf },
    /// Power spectral densities with an OFDM reference
    Psd { config: PathBuf },
    /// Built-in prototype filters
    Filters {
        #[command(subcommand)]
        action: FiltersCommand,
    },
}

#[derive(Subcommand)]
enum FiltersCommand {
    /// Name, target SNR, time dispersion and constraint values
    List,
    /// Coefficient file of one filter, or its time samples with --time
    Dump {
        name: String,
        #[arg(long)]
        time: bool,
        #[arg(long, default_value_t = 128)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        l: usize,
    },
}

enum Failure {
    Config(String),
    Run(String),
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn run_err(e: impl std::fmt::Display) -> Failure {
    Failure::Run(e.to_string())
}

fn load(path: &Path) -> Result<(KvFile, PathBuf), Failure> {
    let kv = KvFile::load(path).map_err(config_err)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((kv, base))
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn write(path: &Path, body: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| run_err(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, body).map_err(|e| run_err(format!("{}: {e}", path.display())))?;
    announce(&[path.to_path_buf()]);
    Ok(())
}

fn design(path: &Path) -> Result<(), Failure> {
    let (kv, base) = load(path)?;
    let spec = DesignSpec::from_kv(&kv, &base).map_err(config_err)?;
    with_workers(|| run_design(&spec.problem, &spec.seed, &spec.options))
        .map_err(config_err)?
        .map_err(|e| match e {
            fbmc_core::Error::InfeasibleSeed(_) | fbmc_core::Error::Config(_) => config_err(e),
            other => run_err(other),
        })
        .and_then(|out| {
            let r = &out.report;
            eprintln!(
                "seed {}: fitness {:.3} dB at target, {:.3} dB noiseless, sigma_t {:.4}, {} evaluations{}",
                spec.seed_label,
                r.fitness_db,
                r.noiseless_sinr_db,
                r.time_dispersion,
                r.evaluations,
                if r.repaired { ", seed repaired" } else { "" }
            );
            let filter = out.filter(spec.problem.config(), "designed").map_err(run_err)?;
            let coeffs = format_filter_coeffs(&filter);
            match &spec.output {
                Some(p) => write(p, &coeffs)?,
                None => print!("{coeffs}"),
            }
            if let Some(h) = &spec.history {
                write(h, &r.history_csv())?;
                let pts = r.history.iter().map(|e| (e.iteration as f64, e.fitness_db)).collect();
                let svg = LinePlot::new("Pattern search convergence", "iteration", "fitness (dB)")
                    .with_series(Series::new("best fitness", pts))
                    .render();
                write(&h.with_extension("svg"), &svg)?;
            }
            Ok(())
        })
}

fn sinr(path: &Path) -> Result<(), Failure> {
    let (kv, base) = load(path)?;
    let spec = SweepSpec::from_kv(&kv, &base).map_err(config_err)?;
    let sweep = spec.run().map_err(run_err)?;
    match &spec.output_dir {
        Some(dir) => announce(&persist_pair(dir, "sinr", sweep.to_csv(), sweep.to_svg()).map_err(run_err)?),
        None => print!("{}", sweep.to_csv()),
    }
    Ok(())
}

fn ber(path: &Path) -> Result<(), Failure> {
    let (kv, base) = load(path)?;
    let spec = ExperimentSpec::from_kv(&kv, &base).map_err(config_err)?;
    let results = with_workers(|| run_ber(&spec)).map_err(config_err)?.map_err(run_err)?;
    if spec.output_dir.is_some() {
        announce(&persist_ber(&spec, &results).map_err(run_err)?);
    } else {
        print!("{}", ber_csv(&results));
    }
    Ok(())
}

fn psd(path: &Path) -> Result<(), Failure> {
    let (kv, base) = load(path)?;
    let spec = PsdSpec::from_kv(&kv, &base).map_err(config_err)?;
    let export = spec.run().map_err(config_err)?;
    match &spec.output_dir {
        Some(dir) => announce(&persist_pair(dir, "psd", export.to_csv(), export.to_svg(spec.span)).map_err(run_err)?),
        None => print!("{}", export.to_csv()),
    }
    Ok(())
}

fn filters(action: FiltersCommand) -> Result<(), Failure> {
    match action {
        FiltersCommand::List => {
            let cfg = FbmcConfig::standard();
            println!("name,target_snr_db,sigma_t,c0,c1,c2");
            for b in BuiltinFilter::ALL {
                let f = builtin_filter(b, &cfg);
                let c = constraint_values(f.coeffs());
                let st = time_dispersion(f.time_samples()).map_err(run_err)?;
                println!("{b},{},{st:.4},{:.4},{:.4},{:.4}", b.target_snr_db(), c.c0, c.c1, c.c2);
            }
        }
        FiltersCommand::Dump { name, time, m, l } => {
            let cfg = FbmcConfig::new(m, l, 15).map_err(config_err)?;
            let b: BuiltinFilter = name.parse().map_err(config_err)?;
            let f = builtin_filter(b, &cfg);
            if time {
                println!("n,re,im");
                for (n, s) in f.time_samples().iter().enumerate() {
                    println!("{n},{:.12e},{:.12e}", s.re, s.im);
                }
            } else {
                print!("{}", format_filter_coeffs(&f));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Design { config } => design(&config),
        Command::Sinr { config } => sinr(&config),
        Command::Ber { config } => ber(&config),
        Command::Psd { config } => psd(&config),
        Command::Filters { action } => filters(action),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("fbmc: configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("fbmc: {msg}");
            ExitCode::FAILURE
        }
    }
}
