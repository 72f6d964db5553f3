use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use diracosc::scenario::{
    run_compare, run_decompose, run_density, run_oracle_check, run_spins, RunSpec, SpecOverlay,
};
use diracosc::Result;

/// Closed-form time evolution of circular coherent packets in the
/// three-dimensional Dirac oscillator.
#[derive(Parser)]
#[command(name = "diracosc", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spin, angular momentum, and sector weights over a time grid
    Spins(CommonArgs),
    /// Probability density maps over the sphere, one file per time and kind
    Density(CommonArgs),
    /// Energy-branch weights per orbital sector
    Decompose(CommonArgs),
    /// Spin components in all three representations plus closed-form sums
    #[command(name = "compare-representations")]
    CompareRepresentations(CommonArgs),
    /// Closed-form evolution against the block-matrix reference
    #[command(name = "oracle-check")]
    OracleCheck(CommonArgs),
}

/// Flags mirror config file keys and override them.
#[derive(Args)]
struct CommonArgs {
    /// Config file of `key = value` lines; `#` lines with known keys apply too
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file, or directory for density maps (defaults: stdout, `.`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mean excitation of the packet
    #[arg(long = "N")]
    n_mean: Option<f64>,
    /// Rotation frequency in units of the rest energy
    #[arg(long)]
    r: Option<f64>,
    #[arg(long = "alpha_re", alias = "alpha-re")]
    alpha_re: Option<f64>,
    #[arg(long = "alpha_im", alias = "alpha-im")]
    alpha_im: Option<f64>,
    #[arg(long = "beta_re", alias = "beta-re")]
    beta_re: Option<f64>,
    #[arg(long = "beta_im", alias = "beta-im")]
    beta_im: Option<f64>,
    /// dirac, fw, or nonrel
    #[arg(long)]
    representation: Option<String>,
    #[arg(long = "tail_tolerance", alias = "tail-tolerance")]
    tail_tolerance: Option<f64>,
    #[arg(long = "t_start", alias = "t-start")]
    t_start: Option<f64>,
    #[arg(long = "t_end", alias = "t-end")]
    t_end: Option<f64>,
    #[arg(long = "t_steps", alias = "t-steps")]
    t_steps: Option<usize>,
    #[arg(long = "theta_points", alias = "theta-points")]
    theta_points: Option<usize>,
    #[arg(long = "phi_points", alias = "phi-points")]
    phi_points: Option<usize>,
    /// Sphere radius for maps; default is the packet's orbit radius
    #[arg(long)]
    radius: Option<f64>,
    /// Instants for density maps and oracle checks
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// total, component:1..4, sector:positive, sector:negative
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<String>>,
    /// Refuse to run if the packet needs more orbital sectors than this
    #[arg(long = "basis_cap", alias = "basis-cap")]
    basis_cap: Option<usize>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
}

impl CommonArgs {
    fn to_overlay(&self) -> Result<SpecOverlay> {
        let mut o = SpecOverlay {
            n_mean: self.n_mean,
            r: self.r,
            alpha_re: self.alpha_re,
            alpha_im: self.alpha_im,
            beta_re: self.beta_re,
            beta_im: self.beta_im,
            tail_tolerance: self.tail_tolerance,
            t_start: self.t_start,
            t_end: self.t_end,
            t_steps: self.t_steps,
            theta_points: self.theta_points,
            phi_points: self.phi_points,
            radius: self.radius,
            times: self.times.clone(),
            basis_cap: self.basis_cap,
            ..Default::default()
        };
        if let Some(rep) = &self.representation {
            o.representation = Some(rep.parse()?);
        }
        if let Some(kinds) = &self.kinds {
            o.kinds = Some(kinds.iter().map(|k| k.parse()).collect::<Result<_>>()?);
        }
        if let Some(format) = &self.format {
            o.format = Some(format.parse()?);
        }
        Ok(o)
    }

    fn build_spec(&self) -> Result<RunSpec> {
        let mut overlay = SpecOverlay::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            overlay = SpecOverlay::parse(&text)?;
        }
        overlay.merge(self.to_overlay()?).resolve()
    }

    fn open_out(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
            None => Box::new(std::io::BufWriter::new(std::io::stdout())),
        })
    }
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Spins(args) => {
            let spec = args.build_spec()?;
            let mut out = args.open_out()?;
            run_spins(&spec, &mut out)?;
            out.flush()?;
        }
        Command::Density(args) => {
            let spec = args.build_spec()?;
            let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let written = run_density(&spec, &dir)?;
            let mut stdout = std::io::stdout();
            for path in written {
                writeln!(stdout, "{}", path.display())?;
            }
        }
        Command::Decompose(args) => {
            let spec = args.build_spec()?;
            let mut out = args.open_out()?;
            run_decompose(&spec, &mut out)?;
            out.flush()?;
        }
        Command::CompareRepresentations(args) => {
            let spec = args.build_spec()?;
            let mut out = args.open_out()?;
            run_compare(&spec, &mut out)?;
            out.flush()?;
        }
        Command::OracleCheck(args) => {
            let spec = args.build_spec()?;
            let mut out = args.open_out()?;
            let verdict = run_oracle_check(&spec, &mut out)?;
            out.flush()?;
            if !verdict.passed() {
                eprintln!(
                    "oracle check failed: max deviation {:e} above threshold {:e}",
                    verdict.worst, verdict.threshold
                );
                return Ok(2);
            }
            eprintln!("oracle check passed: max deviation {:e}", verdict.worst);
        }
    }
    Ok(0)
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn main() {
    std::process::exit(run());
}
