//! `opuc`: batch front end for the moment → Verblunsky → kernel pipeline and
//! the entropy and rate experiments.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opuc_core::entropy::{entropy_at, entropy_sup_on_radius, fit_both, geometric_gaps};
use opuc_core::experiments::{
    deviation_grid, figure2_data, polar_grid, rate_from_coefficients, theorem1_sweep, window_exponent, tail_start,
    IndexConvention, PolarGrid, RateConfig, UvGrid,
};
use opuc_core::measures::DEFAULT_MOMENT_TOL;
use opuc_core::parse::{parse_angle, parse_complex, parse_usize_list};
use opuc_core::svg::{loglog_plot, Series};
use opuc_core::*;
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(name = "opuc", version, about = "Orthogonal polynomials on the unit circle: kernels, entropy and rate experiments")]
struct Cli {
    /// Worker threads for parallel evaluation (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Relative moment tolerance (relative to the total mass)
    #[arg(long, global = true, default_value_t = DEFAULT_MOMENT_TOL)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Trigonometric moments c_0 .. c_{n-1}
    Moments(MomentsArgs),
    /// Verblunsky coefficients from a weight or a moment file
    Verblunsky(VerblunskyArgs),
    /// Kernel ratio against the Lebesgue ratio at points near zeta
    KernelRatio(KernelArgs),
    /// Entropy log P[w](z) - P[log w](z) at one point
    Entropy(EntropyArgs),
    /// Entropy profile along a radius with power-law fits
    EntropyFit(EntropyFitArgs),
    /// Deviation D(n) at x_n = 1 - 1/n with exponent candidates
    Rate(RateArgs),
    /// f1 = D(n) against f2 = C n^{-s} for the Hölder weight
    Figure2(Figure2Args),
    /// n · sup |δ_n| for the Poisson weight
    PoissonCheck(PoissonArgs),
    /// Both sides of the main estimate over an n-sweep
    Theorem1(Theorem1Args),
}

#[derive(Args, Debug, Serialize)]
struct WeightArgs {
    /// lebesgue | poisson:<λ> | holder:<s> | samples:<csv path>
    #[arg(long, default_value = "lebesgue")]
    weight: String,
    /// Keep the weight unnormalized
    #[arg(long)]
    raw: bool,
}

impl WeightArgs {
    fn build(&self) -> Result<CircleWeight> {
        make_weight(&self.weight.parse()?, !self.raw)
    }
}

#[derive(Args, Debug, Serialize)]
struct MomentsArgs {
    #[command(flatten)]
    weight: WeightArgs,
    /// Number of moments
    #[arg(long)]
    n: usize,
}

#[derive(Args, Debug, Serialize)]
struct VerblunskyArgs {
    #[command(flatten)]
    weight: WeightArgs,
    /// Number of coefficients a_0 .. a_{n-1}
    #[arg(long, required_unless_present = "moments")]
    n: Option<usize>,
    /// Read moments from a CSV file instead of computing them
    #[arg(long)]
    moments: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct KernelArgs {
    #[command(flatten)]
    weight: WeightArgs,
    /// Read Verblunsky coefficients from a CSV file
    #[arg(long)]
    verblunsky: Option<PathBuf>,
    /// Kernel size
    #[arg(long)]
    n: usize,
    /// Point of the circle, as an angle (e.g. 0.2pi)
    #[arg(long, default_value = "0", value_parser = angle)]
    zeta: f64,
    #[arg(long, value_parser = complex, requires = "z2")]
    z1: Option<Complex64>,
    #[arg(long, value_parser = complex, requires = "z1")]
    z2: Option<Complex64>,
    /// Grid radius A: points in B(zeta, A/n) when z1, z2 are not given
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 4)]
    radii: usize,
    #[arg(long, default_value_t = 8)]
    angles: usize,
    #[arg(long, value_enum, default_value_t = Strategy::CdForm)]
    strategy: Strategy,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Strategy {
    CdForm,
    SumForm,
}

#[derive(Args, Debug, Serialize)]
struct EntropyArgs {
    #[command(flatten)]
    weight: WeightArgs,
    /// Point of the open disk
    #[arg(long, value_parser = complex)]
    z: Complex64,
}

#[derive(Args, Debug, Serialize)]
struct EntropyFitArgs {
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(long, default_value = "0", value_parser = angle)]
    zeta: f64,
    /// Smallest 1 - rho
    #[arg(long, default_value_t = 1e-4)]
    min_gap: f64,
    /// Largest 1 - rho
    #[arg(long, default_value_t = 1e-1)]
    max_gap: f64,
    #[arg(long, default_value_t = 16)]
    points: usize,
    /// Also report sup K over [rho_min, 1)
    #[arg(long)]
    rho_min: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct RateArgs {
    #[command(flatten)]
    weight: WeightArgs,
    /// Largest n
    #[arg(long = "N")]
    n_max: usize,
    #[arg(long, default_value_t = 20)]
    step: usize,
    /// Pair x_n with the kernel of size n - 1, as a dense n × n solve does
    #[arg(long)]
    dense_index: bool,
    /// Read Verblunsky coefficients from a CSV file
    #[arg(long)]
    verblunsky: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct Figure2Args {
    /// Hölder order in (0, 1/2)
    #[arg(long)]
    s: f64,
    #[arg(long = "N")]
    n_max: usize,
    #[arg(long, default_value_t = 20)]
    step: usize,
}

#[derive(Args, Debug, Serialize)]
struct PoissonArgs {
    #[arg(long, value_parser = complex)]
    lambda: Complex64,
    /// Comma-separated list of n
    #[arg(long, value_parser = usize_list, default_value = "100,200,400,800")]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = UvGrid::default().radii)]
    radii: usize,
    #[arg(long, default_value_t = UvGrid::default().angles)]
    angles: usize,
}

#[derive(Args, Debug, Serialize)]
struct Theorem1Args {
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(long, default_value = "0", value_parser = angle)]
    zeta: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, value_parser = usize_list, default_value = "50,100,200,400")]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = PolarGrid::default().radii)]
    radii: usize,
    #[arg(long, default_value_t = PolarGrid::default().angles)]
    angles: usize,
}

fn angle(s: &str) -> std::result::Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

fn complex(s: &str) -> std::result::Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn usize_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    parse_usize_list(s).map_err(|e| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::Parse(_) => 2,
        Error::Io(_) => 4,
        _ => 3,
    }
}

fn unit(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

fn open_csv(path: &PathBuf) -> Result<File> {
    Ok(File::open(path)?)
}

fn verblunsky_for(weight: &WeightArgs, file: &Option<PathBuf>, n: usize, tol: f64) -> Result<VerblunskyCoefficients> {
    match file {
        Some(path) => Ok(io::read_verblunsky(open_csv(path)?)?),
        None => levinson(&compute_moments(&weight.build()?, n + 1, tol)?),
    }
}

fn json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

fn unsupported(format: Format, command: &str) -> Error {
    Error::InvalidParameter(format!("{command} does not support --format {format:?}").to_lowercase())
}

fn run(cli: &Cli, comments: &[String], out: &mut dyn Write) -> Result<()> {
    let tol = cli.tol;
    match &cli.command {
        Command::Moments(args) => {
            let m = compute_moments(&args.weight.build()?, args.n, tol)?;
            match cli.format {
                Format::Csv => io::write_moments(out, comments, &m),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Row {
                        j: usize,
                        value: Complex64,
                        err_estimate: f64,
                    }
                    let rows: Vec<Row> = m
                        .values()
                        .iter()
                        .zip(m.errors())
                        .enumerate()
                        .map(|(j, (v, e))| Row { j, value: *v, err_estimate: *e })
                        .collect();
                    json(out, &rows)
                }
                f => Err(unsupported(f, "moments")),
            }
        }
        Command::Verblunsky(args) => {
            let m = match &args.moments {
                Some(path) => io::read_moments(open_csv(path)?, !args.weight.raw)?,
                None => compute_moments(&args.weight.build()?, args.n.unwrap_or(0) + 1, tol)?,
            };
            let v = levinson(&m)?;
            match cli.format {
                Format::Csv => io::write_verblunsky(out, comments, &v),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out<'a> {
                        coefficients: &'a [Complex64],
                        norms: &'a [f64],
                        residual: f64,
                    }
                    json(out, &Out { coefficients: v.coefficients(), norms: v.norms(), residual: v.residual() })
                }
                f => Err(unsupported(f, "verblunsky")),
            }
        }
        Command::KernelRatio(args) => {
            let v = verblunsky_for(&args.weight, &args.verblunsky, args.n, tol)?;
            let strategy = match args.strategy {
                Strategy::CdForm => KernelStrategy::CdForm,
                Strategy::SumForm => KernelStrategy::SumForm,
            };
            let ctx = KernelContext::new(std::sync::Arc::new(v), args.n)?
                .with_strategy(strategy)
                .with_max_a(args.a.max(opuc_core::kernels::DEFAULT_MAX_A));
            let zeta = unit(args.zeta);
            let samples = match (args.z1, args.z2) {
                (Some(z1), Some(z2)) => vec![ctx.deviation(zeta, z1, z2)?],
                _ => {
                    let points = polar_grid(zeta, args.a / args.n as f64, args.radii, args.angles);
                    deviation_grid(&ctx, zeta, &points)?
                }
            };
            match cli.format {
                Format::Csv => io::write_deviations(out, comments, &samples),
                Format::Json => json(out, &samples),
                f => Err(unsupported(f, "kernel-ratio")),
            }
        }
        Command::Entropy(args) => {
            let value = entropy_at(&args.weight.build()?, args.z)?;
            match cli.format {
                Format::Csv => io::write_table(
                    out,
                    comments,
                    &["re_z", "im_z", "entropy"],
                    [vec![io::fmt_f64(args.z.re), io::fmt_f64(args.z.im), io::fmt_f64(value)]],
                ),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out {
                        z: Complex64,
                        entropy: f64,
                    }
                    json(out, &Out { z: args.z, entropy: value })
                }
                f => Err(unsupported(f, "entropy")),
            }
        }
        Command::EntropyFit(args) => {
            let w = args.weight.build()?;
            let zeta = unit(args.zeta);
            let gaps = geometric_gaps(args.min_gap, args.max_gap, args.points)?;
            let mut profile = entropy_profile(&w, zeta, &gaps)?;
            fit_both(&mut profile)?;
            let sup = args.rho_min.map(|r| entropy_sup_on_radius(&w, zeta, r)).transpose()?;
            let mut comments = comments.to_vec();
            for (name, fit) in [("plain", profile.plain), ("log-corrected", profile.log_corrected)] {
                if let Some(f) = fit {
                    comments.push(format!(
                        "{name} fit: exponent {}, constant {}, max relative residual {}",
                        f.exponent, f.constant, f.max_rel_residual
                    ));
                }
            }
            if let Some(s) = sup {
                comments.push(format!("sup entropy over [{}, 1): {s}", args.rho_min.unwrap_or_default()));
            }
            match cli.format {
                Format::Csv => io::write_entropy_profile(out, &comments, &profile),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out<'a> {
                        profile: &'a EntropyProfile,
                        entropy_sup: Option<f64>,
                    }
                    json(out, &Out { profile: &profile, entropy_sup: sup })
                }
                Format::Svg => {
                    let gaps = profile.one_minus_rho();
                    let mut series = vec![Series {
                        label: "K(rho zeta)",
                        points: gaps.iter().copied().zip(profile.values.iter().copied()).collect(),
                    }];
                    if let Some(f) = profile.plain {
                        series.push(Series {
                            label: "plain fit",
                            points: gaps.iter().map(|g| (*g, f.predict(*g))).collect(),
                        });
                    }
                    out.write_all(loglog_plot("entropy along the radius", "1 - rho", &series)?.as_bytes())?;
                    Ok(())
                }
            }
        }
        Command::Rate(args) => {
            let mut cfg = RateConfig::new(args.n_max, args.step);
            cfg.tol = tol;
            if args.dense_index {
                cfg.convention = IndexConvention::DenseSolve;
            }
            let v = std::sync::Arc::new(verblunsky_for(&args.weight, &args.verblunsky, args.n_max, tol)?);
            let records = rate_from_coefficients(&v, &cfg)?;
            let mut comments = comments.to_vec();
            if let Ok(alpha) = window_exponent(&records, tail_start(args.n_max)) {
                comments.push(format!("tail window exponent (n >= {}): {alpha}", tail_start(args.n_max)));
            }
            match cli.format {
                Format::Csv => io::write_rate(out, &comments, &records),
                Format::Json => json(out, &records),
                Format::Svg => {
                    let series = [Series { label: "D(n)", points: records.iter().map(|r| (r.n as f64, r.d)).collect() }];
                    out.write_all(loglog_plot("kernel ratio deviation at 1 - 1/n", "n", &series)?.as_bytes())?;
                    Ok(())
                }
            }
        }
        Command::Figure2(args) => {
            let mut cfg = RateConfig::new(args.n_max, args.step);
            cfg.tol = tol;
            let table = figure2_data(args.s, &cfg, &MomentCache::new())?;
            let mut comments = comments.to_vec();
            comments.push(format!(
                "C = {}, final alphaCand = {}, f1 >= f2 on n >= {}: {}",
                io::fmt_opt(table.constant),
                io::fmt_opt(table.final_alpha),
                table.tail_start,
                table.f1_dominates_tail.map_or("undefined".into(), |b| b.to_string())
            ));
            match cli.format {
                Format::Csv => io::write_figure2(out, &comments, &table),
                Format::Json => json(out, &table),
                Format::Svg => {
                    let series = [
                        Series { label: "f1", points: table.rows.iter().map(|r| (r.n as f64, r.f1)).collect() },
                        Series {
                            label: "f2",
                            points: table.rows.iter().filter_map(|r| r.f2.map(|f| (r.n as f64, f))).collect(),
                        },
                    ];
                    out.write_all(loglog_plot(&format!("s = {}", args.s), "n", &series)?.as_bytes())?;
                    Ok(())
                }
            }
        }
        Command::PoissonCheck(args) => {
            let grid = UvGrid { radii: args.radii, angles: args.angles };
            let check = poisson_example_check(args.lambda, &args.n_list, grid, tol, &MomentCache::new())?;
            match cli.format {
                Format::Csv => {
                    let mut comments = comments.to_vec();
                    comments.push(format!(
                        "band ratio {}, within band: {}",
                        io::fmt_opt(check.band_ratio),
                        check.within_band
                    ));
                    let rows = check
                        .rows
                        .iter()
                        .map(|r| vec![r.n.to_string(), io::fmt_f64(r.sup), io::fmt_f64(r.n_sup)]);
                    io::write_table(out, &comments, &["n", "sup", "n_sup"], rows)
                }
                Format::Json => json(out, &check),
                f => Err(unsupported(f, "poisson-check")),
            }
        }
        Command::Theorem1(args) => {
            let w = args.weight.build()?;
            let grid = PolarGrid { radii: args.radii, angles: args.angles };
            let sweep = theorem1_sweep(&w, unit(args.zeta), args.a, &args.n_list, grid, tol, &MomentCache::new())?;
            match cli.format {
                Format::Csv => io::write_theorem1(out, comments, &sweep.reports),
                Format::Json => json(out, &sweep),
                f => Err(unsupported(f, "theorem1")),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let invocation = std::env::args().collect::<Vec<_>>().join(" ");
    let config = serde_json::to_string(&cli).unwrap_or_default();
    let comments = vec![invocation, format!("config: {config}")];

    let result = (|| -> Result<()> {
        let mut out: Box<dyn Write> = match &cli.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(std::io::stdout().lock())),
        };
        run(&cli, &comments, &mut out)?;
        out.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
