mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::Outcome;
use config::RunConfig;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_PASS: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_CHECK: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "wandlab", version, about = "Certified checks for the wandering-domain model map")]
struct Cli {
    /// Run configuration or bare parameter-set JSON.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports, images and the manifest.
    #[arg(long, global = true, default_value = "wandlab-out")]
    out: PathBuf,
    /// Size parameter: disks, orbit steps, levels or a_n count, per command.
    #[arg(long, global = true)]
    n: Option<u64>,
    /// Print the full report as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Cmd {
    /// Graph construction, bounded geometry, tau-size and thin-area sweep.
    Geometry,
    /// Escape condition and the certified real orbit.
    Orbit,
    /// a_n bounds, Koebe constants and disk-map dilatation.
    Disks,
    /// Pullback certificates and parameter adjustment.
    Wander,
    /// Two-map schedule chase.
    Compose,
    /// Classification raster.
    Render,
    /// Every command in turn.
    Report,
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Geometry => "geometry",
            Cmd::Orbit => "orbit",
            Cmd::Disks => "disks",
            Cmd::Wander => "wander",
            Cmd::Compose => "compose",
            Cmd::Render => "render",
            Cmd::Report => "report",
        }
    }
}

fn run_one(cmd: Cmd, cfg: &RunConfig, out: &Path) -> std::io::Result<Outcome> {
    Ok(match cmd {
        Cmd::Geometry => commands::geometry(cfg, out)?,
        Cmd::Orbit => commands::orbit(cfg),
        Cmd::Disks => commands::disks(cfg),
        Cmd::Wander => commands::wander(cfg),
        Cmd::Compose => commands::compose(cfg),
        Cmd::Render => commands::render_cmd(cfg, out)?,
        Cmd::Report => unreachable!(),
    })
}

fn run(cli: &Cli, cfg: &RunConfig) -> std::io::Result<(serde_json::Value, Outcome)> {
    let out = &cli.out;
    std::fs::create_dir_all(out)?;
    let outcome = if cli.cmd == Cmd::Report {
        let mut all = Outcome::default();
        let mut reports = serde_json::Map::new();
        for c in [Cmd::Geometry, Cmd::Orbit, Cmd::Disks, Cmd::Wander, Cmd::Compose, Cmd::Render] {
            // --n means different things per command; the combined report uses defaults
            let mut sub = cfg.clone();
            sub.n = None;
            let o = run_one(c, &sub, out)?;
            for (k, v) in &o.verdicts {
                all.verdicts.insert(format!("{}.{k}", c.name()), *v);
            }
            all.files.extend(o.files);
            reports.insert(c.name().into(), o.report);
        }
        all.report = serde_json::Value::Object(reports);
        all
    } else {
        run_one(cli.cmd, cfg, out)?
    };
    let path = out.join(format!("{}.json", cli.cmd.name()));
    std::fs::write(&path, serde_json::to_vec_pretty(&outcome.report)?)?;
    let mut files: Vec<String> = outcome.files.iter().map(|p| p.display().to_string()).collect();
    files.push(path.display().to_string());
    let manifest = json!({
        "command": cli.cmd.name(),
        "config_source": cfg.source,
        "config_hash": cfg.hash(),
        "config": cfg.resolved(),
        "n": cli.n,
        "versions": { "wandlab": env!("CARGO_PKG_VERSION"), "wandlab_core": wandlab_core::VERSION },
        "verdicts": outcome.verdicts,
        "passed": outcome.passed(),
        "exit_code": if outcome.passed() { EXIT_PASS } else { EXIT_CHECK },
        "outputs": files,
    });
    std::fs::write(out.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    Ok((manifest, outcome))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut cfg = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("usage error: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
        },
        None => RunConfig::default(),
    };
    if cli.n.is_some() {
        cfg.n = cli.n;
    }
    match run(&cli, &cfg) {
        Ok((manifest, outcome)) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&json!({"manifest": manifest, "report": outcome.report})).unwrap());
            } else {
                for (k, v) in &outcome.verdicts {
                    println!("{:<40} {}", k, if *v { "PASS" } else { "FAIL" });
                }
                if let Some(e) = outcome.report.get("error") {
                    println!("error: {}", e.as_str().unwrap_or_default());
                }
                println!("manifest: {}", cli.out.join("manifest.json").display());
            }
            ExitCode::from(if outcome.passed() { EXIT_PASS } else { EXIT_CHECK })
        }
        Err(e) => {
            eprintln!("io error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
