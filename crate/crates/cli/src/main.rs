use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symfisher::fim::read_matrix_file;
use symfisher_cli::report::{determinant_audit, eigen_csv, symplectic_csv};
use symfisher_cli::{compare_pairings, decompose, emit_comparison, emit_report, run, CliError, RunConfig, Stage};

#[derive(Parser)]
#[command(name = "symfisher", version, about = "Fisher-information sensitivity spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(samples) = self.samples {
            cfg.samples = samples;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate, normalize, pair and decompose; write the report set.
    Run(Overrides),
    /// Decompose an existing FIM matrix file.
    Decompose {
        #[arg(long)]
        fim: PathBuf,
        /// Pairs as "a:b,c:d" (indices or variable.kind labels);
        /// consecutive pairs when omitted.
        #[arg(long)]
        pairs: Option<String>,
        /// Also write eigen.csv and symplectic.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symplectic spectra of one estimated FIM under several pairings.
    ComparePairings {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long = "pairs", required = true)]
        pairs: Vec<String>,
    },
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(" ")
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(o) => {
            let cfg = o.load()?;
            let report = run(&cfg)?;
            let files = emit_report(&report, &cfg.out)?;
            println!(
                "condition number: raw {:.3e}, {} {:.3e}",
                report.condition_numbers.raw,
                cfg.normalization.as_str(),
                report.condition_numbers.normalized
            );
            println!("lambda: {}", join(&report.eig.eigenvalues));
            println!("d:      {}", join(&report.sym.d));
            println!("wrote {} files to {}", files.len(), cfg.out.display());
        }
        Command::Decompose { fim, pairs, out } => {
            let f = read_matrix_file(&fim).map_err(|e| match e {
                symfisher::Error::Io(source) => CliError::io(&fim, source),
                e if e.is_numerical() => CliError::at(Stage::Decompose)(e),
                other => CliError::Config(format!("{}: {other}", fim.display())),
            })?;
            let (paired, eig, sym) = decompose(&f, pairs.as_deref())?;
            let audit = determinant_audit(&eig, &sym)?;
            println!("lambda: {}", join(&eig.eigenvalues));
            println!("d:      {}", join(&sym.d));
            println!("determinant audit gap: {:.3e}", audit.relative_gap);
            if let Some(dir) = out {
                write_decomposition(&dir, &eig_csv_pair(&paired, &eig, &sym))?;
            }
        }
        Command::ComparePairings { overrides, pairs } => {
            let cfg = overrides.load()?;
            let cmp = compare_pairings(&cfg, &pairs)?;
            println!("lambda: {}", join(&cmp.eigenvalues));
            for (spec, sym) in &cmp.spectra {
                println!("[{spec}] d: {}", join(&sym.d));
            }
            emit_comparison(&cmp, &cfg.out)?;
        }
    }
    Ok(())
}

fn eig_csv_pair(
    paired: &symfisher::FisherMatrix,
    eig: &symfisher::EigenSpectrum,
    sym: &symfisher::SymplecticSpectrum,
) -> [(&'static str, String); 2] {
    [
        ("eigen.csv", eigen_csv(eig, paired.labels())),
        ("symplectic.csv", symplectic_csv(sym, paired.labels())),
    ]
}

fn write_decomposition(dir: &Path, files: &[(&str, String)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (name, contents) in files {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
