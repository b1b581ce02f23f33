use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dsthin::config::{Config, RunConfig};
use dsthin::{commands, CliError};

#[derive(Parser)]
#[command(name = "dsthin", version, about = "Difference-set thinned planar array design")]
struct Cli {
    /// TOML configuration; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "DSTHIN_WORKERS")]
    workers: Option<usize>,
    /// Seed for every random generator.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build or check difference-set files.
    #[command(subcommand)]
    Ds(DsCmd),
    /// Predicted samples, oversampled pattern and grating-lobe map.
    Predict(RunArgs),
    /// Metrics for every cyclic shift of a difference set.
    Sweep(RunArgs),
    /// Full design from targets and a catalog of sets.
    Synthesize(RunArgs),
}

#[derive(Subcommand)]
enum DsCmd {
    /// Write a set built from a source such as `twin-prime:17x19` or `singer:10:31x33`.
    Make {
        source: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    Validate {
        file: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    source: Option<String>,
    /// `sx,sy`
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    shift: Option<Vec<i64>>,
    /// `d1x,d1y,d2x,d2y` in wavelengths.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    cell: Option<Vec<f64>>,
    /// `u0,v0`
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    steer: Option<Vec<f64>>,
    #[arg(long)]
    element: Option<String>,
    #[arg(long)]
    oversample: Option<usize>,
    #[arg(long)]
    mainlobe: Option<String>,
    /// `n_theta,n_phi`
    #[arg(long, value_delimiter = ',')]
    quadrature: Option<Vec<usize>>,
    #[arg(long)]
    phi_steps: Option<usize>,
    /// Radians.
    #[arg(long)]
    theta_bar: Option<f64>,
    #[arg(long)]
    theta_bar_d_inf: Option<f64>,
    /// Skip directivity and beamwidth in sweeps.
    #[arg(long)]
    sll_only: bool,
    #[arg(long, allow_negative_numbers = true)]
    sll_db: Option<f64>,
    #[arg(long)]
    d_db: Option<f64>,
    #[arg(long)]
    bw_deg: Option<f64>,
    /// `u,v,level_db`
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    target: Option<Vec<f64>>,
    /// Catalog source; repeatable.
    #[arg(long = "catalog")]
    catalog: Vec<String>,
}

fn arr<T: Copy, const N: usize>(flag: &str, v: &Option<Vec<T>>) -> Result<Option<[T; N]>, CliError> {
    v.as_ref()
        .map(|v| {
            v.as_slice().try_into().map_err(|_| CliError::Config(format!("--{flag} takes {N} comma-separated values")))
        })
        .transpose()
}

impl RunArgs {
    fn overrides(&self, cli: &Cli) -> Result<Config, CliError> {
        let mut c = Config {
            source: self.source.clone(),
            shift: arr("shift", &self.shift)?,
            cell: arr("cell", &self.cell)?,
            steer: arr("steer", &self.steer)?,
            element: self.element.clone(),
            oversample: self.oversample,
            seed: cli.seed,
            workers: cli.workers,
            mainlobe: self.mainlobe.clone(),
            quadrature: arr("quadrature", &self.quadrature)?,
            phi_steps: self.phi_steps,
            theta_bar: self.theta_bar,
            theta_bar_d_inf: self.theta_bar_d_inf,
            full_metrics: self.sll_only.then_some(false),
            ..Config::default()
        };
        let s = &mut c.synthesis;
        s.sll_db = self.sll_db;
        s.d_db = self.d_db;
        s.bw_deg = self.bw_deg;
        s.target = arr("target", &self.target)?;
        s.catalog = self.catalog.clone();
        Ok(c)
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let base = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let global = Config { seed: cli.seed, workers: cli.workers, ..Config::default() };
    let workers = base.clone().overlay(&global).workers;
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Config("workers must be positive".into()));
        }
        // fails only if a pool already exists, which keeps the first setting
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.cmd {
        Cmd::Ds(DsCmd::Make { source, output }) => {
            let seed = base.overlay(&global).seed.unwrap_or(0);
            let ds = commands::ds_make(source, seed, output)?;
            let d = ds.descriptors();
            println!("{} {} {} {}", d.p, d.q, d.h, d.gamma);
        }
        Cmd::Ds(DsCmd::Validate { file }) => {
            let d = commands::ds_validate(file)?.descriptors();
            println!("valid {} {} {} {}", d.p, d.q, d.h, d.gamma);
        }
        Cmd::Predict(a) | Cmd::Sweep(a) | Cmd::Synthesize(a) => {
            let rc = RunConfig::resolve(&base.overlay(&a.overrides(cli)?))?;
            let files = match &cli.cmd {
                Cmd::Predict(_) => commands::predict(&rc, &a.out)?,
                Cmd::Sweep(_) => commands::sweep(&rc, &a.out)?,
                _ => commands::synthesize(&rc, &a.out)?,
            };
            for f in files {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dsthin: {e}");
            if let CliError::Core(dsthin_core::Error::Infeasible { trace }) = &e {
                for t in trace {
                    eprintln!("  step {}: {}", t.step, t.message);
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
