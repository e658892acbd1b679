use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use photon_wigner::experiment::{auto_cutoff, displaced_statistics, parity_sum};
use photon_wigner::io::{parse_records, serialize_scan, write_analytic, Format};
use photon_wigner::scan::analytic_grid;
use photon_wigner::{
    bs_approximation_error, build_polar_grid, compare_scan, normalization_check, predicted_p,
    run_scan, ChannelParams, Complex64, CountingConfig, Error, FockCutoff, PhaseNoiseModel,
    PhasePoint, SignalSpec,
};

const EXIT_INVALID: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "photon-wigner", version, about = "Wigner function scans from simulated photon counting")]
struct Cli {
    /// Worker threads for grid evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a counting scan over a polar grid and write the table.
    Scan {
        #[command(flatten)]
        scenario: Scenario,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form P(β) over the grid, no sampling.
    Analytic {
        #[command(flatten)]
        scenario: Scenario,
        #[command(flatten)]
        output: Output,
    },
    /// Estimator-vs-exact agreement for a scan file, or a freshly simulated scan.
    Compare {
        /// Scan file (CSV or JSON) produced by `scan`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        scenario: Scenario,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the built-in consistency checks between simulation and closed forms.
    OracleCheck,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StateKind {
    Vacuum,
    Coherent,
    PhaseDiffused,
    Fock,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NoiseKind {
    None,
    Uniform,
    Arcsine,
    Gaussian,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Scenario {
    #[arg(long, value_enum, default_value = "coherent")]
    state: StateKind,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    alpha_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha_im: f64,
    /// Photon number for `--state fock`.
    #[arg(long, default_value_t = 1)]
    fock_n: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    phase_noise: NoiseKind,
    /// Half width (uniform, arcsine) or standard deviation (gaussian), radians.
    #[arg(long, default_value_t = PI)]
    noise_width: f64,
    #[arg(long, default_value_t = 0.70)]
    eta: f64,
    #[arg(long, default_value_t = 0.986)]
    transmission: f64,
    #[arg(long, default_value_t = 20)]
    radii: usize,
    #[arg(long, default_value_t = 50)]
    phases: usize,
    #[arg(long, default_value_t = 2.0)]
    max_radius: f64,
    #[arg(long, default_value_t = 8000)]
    intervals: u64,
    /// Counting interval length in microseconds (recorded only).
    #[arg(long, default_value_t = 40.0)]
    interval_us: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Mode-mismatch envelope exp(-γ|β|²).
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Scenario {
    fn spec(&self) -> Result<SignalSpec, Error> {
        let amplitude = Complex64::new(self.alpha_re, self.alpha_im);
        let spec = match self.state {
            StateKind::Vacuum => SignalSpec::Vacuum,
            StateKind::Coherent => SignalSpec::Coherent { amplitude },
            StateKind::Fock => SignalSpec::Fock { n: self.fock_n },
            StateKind::PhaseDiffused => SignalSpec::PhaseDiffusedCoherent {
                amplitude,
                noise: match self.phase_noise {
                    NoiseKind::None => PhaseNoiseModel::None,
                    NoiseKind::Uniform => PhaseNoiseModel::Uniform {
                        half_width: self.noise_width,
                    },
                    NoiseKind::Arcsine => PhaseNoiseModel::Arcsine {
                        half_width: self.noise_width,
                    },
                    NoiseKind::Gaussian => PhaseNoiseModel::WrappedGaussian { std: self.noise_width },
                },
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    fn channel(&self) -> Result<ChannelParams, Error> {
        ChannelParams::new(self.eta, self.transmission)
    }

    fn config(&self) -> CountingConfig {
        CountingConfig {
            intervals: self.intervals,
            interval_duration_us: self.interval_us,
            master_seed: self.seed,
        }
    }

    fn run(&self) -> Result<photon_wigner::ScanResult, Error> {
        let grid = build_polar_grid(self.radii, self.phases, self.max_radius)?;
        run_scan(&self.spec()?, &grid, &self.channel()?, &self.config(), self.gamma)
    }
}

impl Output {
    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }

    fn sink(&self) -> Result<Box<dyn Write>, Error> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(EXIT_INVALID);
        }
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }

    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Scan { scenario, output } => {
            let result = scenario.run()?;
            serialize_scan(&result, output.format(), output.sink()?)?;
        }
        Command::Analytic { scenario, output } => {
            let grid = build_polar_grid(scenario.radii, scenario.phases, scenario.max_radius)?;
            let records = analytic_grid(&scenario.spec()?, &grid, &scenario.channel()?, scenario.gamma)?;
            write_analytic(&records, output.format(), output.sink()?)?;
        }
        Command::Compare { input, scenario, json } => {
            let records = match input {
                Some(path) => parse_records(&std::fs::read_to_string(path)?)?,
                None => scenario.run()?.records,
            };
            let report = compare_scan(&records);
            let mut out = io::stdout().lock();
            if json {
                serde_json::to_writer_pretty(&mut out, &report)?;
                writeln!(out)?;
            } else {
                writeln!(out, "points          {}", report.points)?;
                writeln!(out, "points_with_se   {}", report.points_with_se)?;
                writeln!(out, "max_abs_z        {:.4}", report.max_abs_z)?;
                writeln!(out, "frac_z_gt2       {:.4}", report.frac_z_gt2)?;
                writeln!(out, "frac_z_gt3       {:.4}", report.frac_z_gt3)?;
                writeln!(out, "identity_rms     {:.3e}", report.identity_rms)?;
            }
        }
        Command::OracleCheck => return oracle_check(),
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_check() -> Result<ExitCode, Error> {
    let mut failures = 0;
    let mut report = |name: &str, ok: bool, detail: String| {
        println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    let specs = [
        SignalSpec::Vacuum,
        SignalSpec::coherent(0.5, 0.0),
        SignalSpec::coherent(1.0, 0.0),
        SignalSpec::coherent(1.5, 0.0),
        SignalSpec::Fock { n: 1 },
        SignalSpec::PhaseDiffusedCoherent {
            amplitude: Complex64::new(1.0, 0.0),
            noise: PhaseNoiseModel::default(),
        },
    ];
    let channels = [
        ChannelParams::lossless(),
        ChannelParams::apparatus_default(),
        ChannelParams::new(0.5, 0.9)?,
    ];
    let grid = build_polar_grid(5, 8, 2.0)?;
    let mut worst: f64 = 0.0;
    for spec in &specs {
        for channel in &channels {
            for index in 0..grid.len() {
                let (_, _, beta) = grid.point(index);
                let stats = displaced_statistics(spec, beta, channel, auto_cutoff(spec, beta, channel))?;
                worst = worst.max((parity_sum(&stats) - predicted_p(spec, beta, channel)?).abs());
            }
        }
    }
    report("parity sum vs closed form", worst < 1e-9, format!("max deviation {worst:.3e}"));

    let cutoff = FockCutoff::new(30);
    let bs = bs_approximation_error(&SignalSpec::coherent(1.0, 0.0), PhasePoint::from_cartesian(1.0, 0.0), 0.986, cutoff)?;
    report("beam splitter vs displacement+loss (coherent)", bs < 1e-10, format!("{bs:.3e}"));

    let channel = ChannelParams::apparatus_default();
    for spec in [SignalSpec::Vacuum, SignalSpec::coherent(1.0, 0.0)] {
        let total = normalization_check(&spec, &channel, 6.0, 64, 0.0)?;
        report(
            "normalization",
            (total - 1.0).abs() < 1e-6,
            format!("{spec:?}: {total:.12}"),
        );
    }

    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NUMERICAL)
    })
}
