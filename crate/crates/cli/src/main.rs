use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tfim_wannier::{InitialStateSpec, ModelSpec, WallSign};
use tfim_wannier_cli::config::{parse_f64_list, parse_usize_list};
use tfim_wannier_cli::{
    emit, figure_config, run_ed, run_experiment, run_vqe, CliError, ConfigOverrides, Experiment, ExperimentConfig,
    Format, Manifest, ResultTable, StartScheme, FIGURES,
};

#[derive(Parser)]
#[command(name = "tfim-wannier", version, about = "Quasiparticle Wannier states of the transverse-field Ising ring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetry-labeled exact spectrum of one model.
    Ed {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One VQE preparation (best of several restarts).
    Vqe {
        #[command(flatten)]
        model: ModelArgs,
        /// Initial product state.
        #[arg(long, value_enum, default_value = "spin-flip")]
        init: InitKind,
        /// Site of the spin flip / first Bell-pair site / domain-wall bond (default: chain center).
        #[arg(long)]
        site: Option<usize>,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "zeros")]
        start: StartScheme,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Runs a named experiment over a parameter grid.
    Sweep {
        /// Experiment to run (may also come from the config file).
        #[arg(long, value_enum)]
        experiment: Option<Experiment>,
        #[command(flatten)]
        params: ExperimentArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Phase and weight statistics over many independent runs.
    PhaseStats {
        #[command(flatten)]
        params: ExperimentArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Regenerates the data behind one figure panel.
    Reproduce {
        /// One of fig2a, fig2b, fig3, fig4a, fig4b, fig5a-profiles, fig5b, figA-phases, figA-weights, figB-spectrum.
        figure: String,
        #[command(flatten)]
        params: ExperimentArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InitKind {
    AllPlus,
    AllMinus,
    SpinFlip,
    DomainWall,
    BellPair,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value_t = 9)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    j: f64,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    /// Flip the sign of the coupling on the bond between sites N and 1.
    #[arg(long)]
    twisted: bool,
}

#[derive(Args, Clone, Serialize)]
struct ExperimentArgs {
    /// TOML file with experiment fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated coupling values.
    #[arg(long)]
    j: Option<String>,
    /// Comma-separated field values.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    twisted: bool,
    #[arg(long)]
    depth: Option<usize>,
    /// Depth list, e.g. `1..8` or `1,2,4`.
    #[arg(long)]
    depths: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    start: Option<StartScheme>,
}

impl ExperimentArgs {
    fn overrides(&self, experiment: Option<Experiment>) -> Result<ConfigOverrides, CliError> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::from_file(path)?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            experiment,
            n: self.n,
            j: self.j.as_deref().map(parse_f64_list).transpose().map_err(|e| flag_error("j", e))?,
            h: self.h.as_deref().map(parse_f64_list).transpose().map_err(|e| flag_error("h", e))?,
            twisted: self.twisted.then_some(true),
            depth: self.depth,
            depths: self.depths.as_deref().map(parse_usize_list).transpose().map_err(|e| flag_error("depths", e))?,
            restarts: self.restarts,
            seed: self.seed,
            start: self.start,
        };
        Ok(file.merged(flags))
    }
}

fn flag_error(flag: &str, message: String) -> CliError {
    CliError::Config(format!("flag `--{flag}`: {message}"))
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Data file; the manifest is written next to it. Defaults to `results/<name>.<ext>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads (default: all logical processors).
    #[arg(long)]
    threads: Option<usize>,
}

/// What the manifest records as the configuration of a run.
#[derive(Serialize)]
#[serde(untagged)]
enum RecordedConfig {
    Experiment(ExperimentConfig),
    Single { model: ModelSpec, init: Option<InitialStateSpec>, depth: Option<usize>, restarts: Option<usize>, start: Option<StartScheme> },
}

fn init_spec(kind: InitKind, site: Option<usize>, n: usize) -> InitialStateSpec {
    let center = n.div_ceil(2);
    match kind {
        InitKind::AllPlus => InitialStateSpec::AllPlus,
        InitKind::AllMinus => InitialStateSpec::AllMinus,
        InitKind::SpinFlip => InitialStateSpec::SpinFlip { x: site.unwrap_or(center) },
        InitKind::DomainWall => InitialStateSpec::DomainWall { sigma: WallSign::Plus, x: site.unwrap_or(n / 2) },
        InitKind::BellPair => {
            let x1 = site.unwrap_or(center);
            InitialStateSpec::BellPair { x1, x2: x1 % n + 1 }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let clock = Instant::now();
    let command_line: Vec<String> = std::env::args().collect();
    let (name, table, recorded, seed, output): (String, ResultTable, RecordedConfig, u64, OutputArgs) = match cli.command {
        Command::Ed { model, output } => {
            configure_threads(output.threads)?;
            let spec = ModelSpec::new(model.n, model.j, model.h, model.twisted)?;
            let table = run_ed(spec)?;
            let rec = RecordedConfig::Single { model: spec, init: None, depth: None, restarts: None, start: None };
            ("ed".into(), table, rec, 0, output)
        }
        Command::Vqe { model, init, site, depth, restarts, seed, start, output } => {
            configure_threads(output.threads)?;
            let spec = ModelSpec::new(model.n, model.j, model.h, model.twisted)?;
            let init = init_spec(init, site, model.n);
            let table = run_vqe(spec, init, depth, restarts, seed, start)?;
            let rec = RecordedConfig::Single {
                model: spec,
                init: Some(init),
                depth: Some(depth),
                restarts: Some(restarts),
                start: Some(start),
            };
            ("vqe".into(), table, rec, seed, output)
        }
        Command::Sweep { experiment, params, output } => {
            configure_threads(output.threads)?;
            let overrides = params.overrides(experiment)?;
            let Some(experiment) = overrides.experiment else {
                return Err(CliError::Config("sweep needs --experiment or an `experiment` field in --config".into()));
            };
            let config = ExperimentConfig::resolve(overrides, experiment)?;
            let table = run_experiment(&config)?;
            (experiment.name().into(), table, RecordedConfig::Experiment(config.clone()), config.seed, output)
        }
        Command::PhaseStats { params, output } => {
            configure_threads(output.threads)?;
            let config = ExperimentConfig::resolve(params.overrides(Some(Experiment::PhaseStats))?, Experiment::PhaseStats)?;
            let table = run_experiment(&config)?;
            ("phase-stats".into(), table, RecordedConfig::Experiment(config.clone()), config.seed, output)
        }
        Command::Reproduce { figure, params, output } => {
            configure_threads(output.threads)?;
            let preset = figure_config(&figure).ok_or_else(|| {
                CliError::Config(format!("unknown figure `{figure}`; expected one of {}", FIGURES.join(", ")))
            })?;
            let base = ConfigOverrides {
                experiment: Some(preset.experiment),
                n: Some(preset.n),
                j: Some(preset.j),
                h: Some(preset.h),
                twisted: Some(preset.twisted),
                depth: Some(preset.depth),
                depths: Some(preset.depths),
                restarts: Some(preset.restarts),
                seed: Some(preset.seed),
                start: Some(preset.start),
            };
            let config = ExperimentConfig::resolve(base.merged(params.overrides(None)?), preset.experiment)?;
            let table = run_experiment(&config)?;
            (figure, table, RecordedConfig::Experiment(config.clone()), config.seed, output)
        }
    };
    let path = output.out.clone().unwrap_or_else(|| PathBuf::from(format!("results/{name}.{}", output.format.extension())));
    let manifest = Manifest {
        artifact: "tfim-wannier",
        version: env!("CARGO_PKG_VERSION"),
        schema_version: tfim_wannier_cli::table::SCHEMA_VERSION,
        command: &command_line.join(" "),
        config: &recorded,
        seed,
        threads: rayon::current_num_threads(),
        format: output.format,
        data_file: path.display().to_string(),
        rows: table.rows.len(),
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
    };
    emit(&table, output.format, &path, &manifest)?;
    eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
    Ok(())
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Config("field `threads`: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        let report = serde_json::json!({ "error": { "category": e.category(), "message": e.to_string() } });
        eprintln!("{report}");
        std::process::exit(e.exit_code());
    }
}
