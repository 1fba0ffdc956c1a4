mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::{Check, ConfigError, RunConfig, Settings};
use output::Sink;

#[derive(Parser)]
#[command(name = "normsol", version, about = "Normalized solutions of the mixed-power Schrödinger equation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Flat TOML file with the same keys as the long flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long = "N", global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    q: Option<f64>,
    #[arg(long, global = true)]
    a: Option<f64>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    r_max: Option<f64>,
    /// Node count for explicitly sampled profiles.
    #[arg(long = "n", global = true)]
    nodes: Option<usize>,
    #[arg(long, global = true)]
    stretch: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sobolev, Gagliardo-Nirenberg and soliton constants.
    Constants,
    /// Ground-state soliton and the scaled GN optimizer profiles.
    Soliton,
    /// Aubin-Talenti bubble at one concentration scale.
    Bubble {
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Projection of a Gaussian trial function onto the Pohozaev manifold.
    Project {
        #[arg(long)]
        width: Option<f64>,
    },
    /// All normalized solutions at the configured mass and coupling.
    Solve,
    /// Parameter sweep feeding one asymptotic check.
    Sweep {
        #[arg(long)]
        check: Option<String>,
        #[arg(long)]
        mu_min: Option<f64>,
        #[arg(long)]
        mu_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        eps_min: Option<f64>,
        #[arg(long)]
        eps_max: Option<f64>,
    },
    /// Orders of the cut-off bubble norms in the concentration scale.
    Testfn {
        #[arg(long)]
        eps_min: Option<f64>,
        #[arg(long)]
        eps_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Mass-critical threshold: decreasing energies below, nonexistence above.
    CriticalMass,
}

impl Cli {
    fn settings(&self) -> Settings {
        let g = &self.global;
        let mut s = Settings {
            dim: g.dim,
            q: g.q,
            a: g.a,
            mu: g.mu,
            seed: g.seed,
            output_dir: g.output_dir.clone(),
            r_max: g.r_max,
            nodes: g.nodes,
            stretch: g.stretch,
            ..Default::default()
        };
        match &self.cmd {
            Cmd::Bubble { eps } => s.eps = *eps,
            Cmd::Project { width } => s.width = *width,
            Cmd::Sweep { check, mu_min, mu_max, points, eps_min, eps_max } => {
                s.check = check.clone();
                s.mu_min = *mu_min;
                s.mu_max = *mu_max;
                s.points = *points;
                s.eps_min = *eps_min;
                s.eps_max = *eps_max;
            }
            Cmd::Testfn { eps_min, eps_max, points } => {
                s.eps_min = *eps_min;
                s.eps_max = *eps_max;
                s.points = *points;
            }
            _ => {}
        }
        s
    }
}

fn error_json(kind: &str, message: &str, key: Option<&str>) -> Value {
    let mut e = json!({"kind": kind, "message": message});
    if let Some(k) = key {
        e["key"] = Value::String(k.into());
    }
    json!({ "error": e })
}

fn fail(v: Value) -> ExitCode {
    eprintln!("{}", serde_json::to_string_pretty(&v).expect("JSON values always serialize"));
    ExitCode::from(2)
}

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let base = match &cli.global.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    base.overridden_by(cli.settings()).resolve()
}

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("NLS_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("NLS_THREADS=`{v}` is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(error_json("usage", e.to_string().trim_end(), None)),
    };
    if let Err(m) = threads() {
        return fail(error_json("usage", &m, Some("NLS_THREADS")));
    }
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => return fail(error_json("usage", &e.to_string(), e.key())),
    };
    let mut sink = match Sink::new(&cfg.output_dir) {
        Ok(s) => s,
        Err(e) => return fail(error_json("io", &e.to_string(), Some("output_dir"))),
    };
    let result = match &cli.cmd {
        Cmd::Constants => commands::constants(&cfg, &mut sink),
        Cmd::Soliton => commands::soliton_cmd(&cfg, &mut sink),
        Cmd::Bubble { .. } => commands::bubble_cmd(&cfg, &mut sink),
        Cmd::Project { .. } => commands::project_cmd(&cfg, &mut sink),
        Cmd::Solve => commands::solve_cmd(&cfg, &mut sink),
        Cmd::Sweep { .. } => {
            let Some(check) = cfg.check else {
                return fail(error_json("usage", "sweep needs --check", Some("check")));
            };
            commands::sweep_cmd(&cfg, check, &mut sink)
        }
        Cmd::Testfn { .. } => commands::sweep_cmd(&cfg, Check::Testfn, &mut sink),
        Cmd::CriticalMass => commands::sweep_cmd(&cfg, Check::CriticalMass, &mut sink),
    };
    match result {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report.summary).expect("JSON values always serialize");
            // A closed stdout does not change the verdict; files are already written.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(error_json(e.kind(), &e.to_string(), None)),
    }
}
