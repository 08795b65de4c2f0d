use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use blockade::runner::{resolve_target, run_scenario, RunError};

/// Photon-blockade simulations of a driven two-atom cavity.
///
/// TARGET is a scenario (spectrum, rabi_scan, g2tau, g3tau, pnstat, dressed)
/// or a preset (fig2b, fig2c, fig3a, fig3b, fig4b, fig4c, fig5a, fig5b).
#[derive(Parser, Debug)]
#[command(name = "blockade", version)]
struct Cli {
    target: String,
    /// Scenario file (TOML); overlays a preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Data file to write; `<out>.meta.json` is written alongside.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rerun at n_max + 2 and report relative changes in the metadata.
    #[arg(long)]
    check_truncation: bool,
    /// Worker threads for parameter sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: Cli) -> Result<(), RunError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(RunError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Usage(e.to_string()))?;
    }
    let text = match &cli.config {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| RunError::Usage(format!("cannot read config {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let mut cfg = resolve_target(&cli.target, text.as_deref())?;
    if cli.check_truncation {
        cfg.check_truncation = true;
    }
    let out = cli
        .out
        .or_else(|| cfg.output_path.clone().map(PathBuf::from))
        .ok_or_else(|| RunError::Usage("no output path: pass --out or set output_path".into()))?;
    let report = run_scenario(&cfg, &out)?;
    if report.failures > 0 {
        eprintln!(
            "warning: {} of {} points failed, see {}",
            report.failures,
            report.points,
            report.meta_path.display()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
