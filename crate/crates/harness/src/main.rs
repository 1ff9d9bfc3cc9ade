// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lbm4::analysis::{dispersion_expansion, frequency_grid, stability_scan, DispersionConfig};
use lbm4::operators::Variant;
use lbm4_harness::config::{load_preset, parse_variant, Preset};
use lbm4_harness::entropy_demo::{run_entropy_demo, Branches};
use lbm4_harness::euler::{run_euler_riemann, EulerScheme, RiemannConfig};
use lbm4_harness::experiment::{run_experiment, ExperimentSpec};
use lbm4_harness::output::{self, fmt, to_file};
use lbm4_harness::{HarnessError, Result};

#[derive(Parser)]
#[command(name = "lbm4", version, about = "Fourth-order lattice Boltzmann experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdaptiveArg {
    On,
    Off,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Order table of a convergence preset.
    Convergence {
        /// Preset name or path to a preset file.
        #[arg(long)]
        preset: String,
        /// Number of table rows (overrides the preset ladder).
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Skip the per-resolution field snapshots.
        #[arg(long)]
        no_snapshots: bool,
    },
    /// Fixed against entropy-adaptive reflection on an entropy preset.
    EntropyDemo {
        #[arg(long)]
        preset: String,
        /// `on`: adaptive only, `off`: fixed only.
        #[arg(long, value_enum, default_value = "both")]
        adaptive: AdaptiveArg,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Two-dimensional Euler Riemann problem.
    Euler {
        /// Use the shipped four-shock configuration.
        #[arg(long, conflicts_with = "config")]
        config4: bool,
        /// Riemann configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scheme: String,
        /// Grid points per axis.
        #[arg(long, default_value_t = 256)]
        n: usize,
        /// Kinetic speed.
        #[arg(long = "V", default_value_t = 6.21)]
        v: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Trace bound of the linear D1Q2 symbol over speed ratios and frequencies.
    Stability {
        #[arg(long)]
        scheme: String,
        #[arg(long, default_value_t = 0.0)]
        amin: f64,
        #[arg(long, default_value_t = 1.0)]
        amax: f64,
        #[arg(long, default_value_t = 1000)]
        nfreq: usize,
        /// Number of speed ratios in `[amin, amax]`.
        #[arg(long, default_value_t = 101)]
        nratio: usize,
        #[arg(long, default_value_t = 1)]
        kappa: i64,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Low-frequency expansion of the linear D1Q2 symbol.
    Dispersion {
        #[arg(long)]
        scheme: String,
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long = "V")]
        v: f64,
        /// Weight of the initial split `(theta, 1 - theta) u`.
        #[arg(long)]
        theta: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

const INSTABILITY: u8 = 2;

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Convergence { preset, levels, out, no_snapshots } => convergence(&preset, levels, &out, !no_snapshots),
        Command::EntropyDemo { preset, adaptive, out } => entropy_demo(&preset, adaptive, &out),
        Command::Euler { config4, config, scheme, n, v, out } => {
            let cfg = match (config4, config) {
                (_, Some(path)) => RiemannConfig::load(&path)?,
                (true, None) => RiemannConfig::config4()?,
                (false, None) => return Err(HarnessError::Config("pass --config4 or --config <file>".into())),
            };
            euler(&cfg, scheme.parse()?, n, v, &out)
        }
        Command::Stability { scheme, amin, amax, nfreq, nratio, kappa, out } => {
            stability(parse_variant(&scheme)?, amin, amax, nfreq, nratio, kappa, out.as_deref())
        }
        Command::Dispersion { scheme, a, v, theta } => dispersion(parse_variant(&scheme)?, a, v, theta),
    }
}

fn convergence(preset: &str, levels: Option<usize>, out: &Path, snapshots: bool) -> Result<u8> {
    let Preset::Convergence(p) = load_preset(preset)? else {
        return Err(HarnessError::Config(format!("{preset} is not a convergence preset")));
    };
    std::fs::create_dir_all(out)?;
    let mut code = 0;
    for spec in ExperimentSpec::from_preset(&p, levels)? {
        let (report, runs) = run_experiment(&spec)?;
        let stem = format!("{}_{}", p.name, spec.variant.name());
        to_file(&out.join(format!("{stem}.csv")), |f| output::write_convergence(&report, f))?;
        for run in &runs {
            if let (true, Some(field)) = (snapshots, &run.field) {
                to_file(&out.join(format!("{stem}_n{}.csv", run.n)), |f| output::write_field(field, f))?;
            }
            if !run.series.is_empty() {
                to_file(&out.join(format!("{stem}_n{}_series.csv", run.n)), |f| output::write_series(&run.series, f))?;
            }
        }
        println!("{} scheme {} (T = {}, V = {})", p.name, spec.variant.name(), spec.t_final, spec.model.speed());
        print!("{:>12} {:>7}", "dx", "N");
        for c in &report.components {
            print!(" {:>13} {:>7}", format!("err_{c}"), format!("ord_{c}"));
        }
        println!();
        for row in &report.rows {
            print!("{:>12.4e} {:>7}", row.dx, row.n);
            for (e, q) in row.errors.iter().zip(&row.orders) {
                let e = e.map_or("-".to_string(), |e| format!("{e:.4e}"));
                let q = q.map_or(String::new(), |q| format!("{q:.2}"));
                print!(" {e:>13} {q:>7}");
            }
            println!();
        }
        if let Some(meta) = &report.meta {
            for (n, step) in &meta.instabilities {
                println!("  N = {n}: NaN guard fired after macro-step {step}");
                code = INSTABILITY;
            }
        }
    }
    Ok(code)
}

fn entropy_demo(preset: &str, adaptive: AdaptiveArg, out: &Path) -> Result<u8> {
    let Preset::EntropyDemo(p) = load_preset(preset)? else {
        return Err(HarnessError::Config(format!("{preset} is not an entropy-demo preset")));
    };
    let branches = match adaptive {
        AdaptiveArg::On => Branches::Adaptive,
        AdaptiveArg::Off => Branches::Fixed,
        AdaptiveArg::Both => Branches::Both,
    };
    let report = run_entropy_demo(&p, branches)?;
    std::fs::create_dir_all(out)?;
    let mut code = 0;
    for run in &report.runs {
        to_file(&out.join(format!("{}_{}.csv", p.name, run.label)), |f| output::write_series(&run.series, f))?;
        match run.aborted {
            Some((step, t)) => {
                println!("{} {}: NaN guard fired at macro-step {step} (t = {t:.4})", p.name, run.label);
                code = INSTABILITY;
            }
            None => println!(
                "{} {}: reached t = {:.4}, max |Sigma(t) - Sigma(0)| = {:.3e}, fallback rate {:.2e}",
                p.name,
                run.label,
                run.t_reached(),
                run.max_entropy_drift,
                run.stats.fallback_rate()
            ),
        }
    }
    report.check_solver(p.solver_failure_threshold)?;
    Ok(code)
}

fn euler(cfg: &RiemannConfig, scheme: EulerScheme, n: usize, v: f64, out: &Path) -> Result<u8> {
    let report = run_euler_riemann(cfg, n, scheme, v)?;
    println!(
        "{} scheme {scheme:?} on {n}x{n}, V = {v}: {} steps to t = {:.6}",
        report.config, report.steps, report.t_realized
    );
    match (&report.field, report.instability) {
        (Some(field), _) => {
            std::fs::create_dir_all(out)?;
            let path = out.join(format!("{}_{scheme:?}_n{n}.csv", report.config));
            to_file(&path, |f| output::write_field(field, f))?;
            let drift: Vec<String> = report.mass_drift.iter().map(|&d| fmt(d)).collect();
            println!("relative drift of rho, rho u, rho v, E: {}", drift.join(", "));
            println!("min density {:.6}; field written to {}", report.min_density, path.display());
            Ok(0)
        }
        (None, Some(step)) => {
            println!("NaN guard fired after macro-step {step}");
            Ok(INSTABILITY)
        }
        (None, None) => unreachable!("a run without a field has an instability"),
    }
}

fn stability(
    variant: Variant,
    amin: f64,
    amax: f64,
    nfreq: usize,
    nratio: usize,
    kappa: i64,
    out: Option<&Path>,
) -> Result<u8> {
    if !(amin <= amax) || nratio == 0 {
        return Err(HarnessError::Config(format!("empty ratio range [{amin}, {amax}] x {nratio}")));
    }
    let ratios: Vec<f64> = match nratio {
        1 => vec![amin],
        k => (0..k).map(|i| amin + (amax - amin) * i as f64 / (k - 1) as f64).collect(),
    };
    let report = stability_scan(variant, kappa, &ratios, &frequency_grid(nfreq))?;
    match out {
        Some(path) => to_file(path, |f| output::write_scan(&report, f))?,
        None => output::write_scan(&report, std::io::stdout().lock())?,
    }
    let mut err = std::io::stderr().lock();
    for s in report.summaries.iter().filter(|s| s.violations > 0) {
        let _ = writeln!(
            err,
            "a/V = {:.6}: {} violations, max |tr| = {:.6} at xi dx = {:.6}",
            s.a_over_v, s.violations, s.max_abs_trace, s.xi_at_max
        );
    }
    Ok(0)
}

fn dispersion(variant: Variant, a: f64, v: f64, theta: Option<f64>) -> Result<u8> {
    let report = dispersion_expansion(variant, a, v, theta, &DispersionConfig::default())?;
    let z = report.z1;
    println!("scheme {} at a = {a}, V = {v}", variant.name());
    println!(
        "z1 - exp(-i a xi dt) ~ C (xi dt)^p: p = {:.4} (rounded {}), |C| = {:.6e}, C = {:.6e} {:+.6e}i",
        z.exponent,
        z.rounded,
        z.magnitude(),
        z.coefficient.re,
        z.coefficient.im
    );
    if let Some(g) = report.g_hat {
        println!(
            "initial moment response ~ C (xi dt)^p: p = {:.4} (rounded {}), |C| = {:.6e}",
            g.exponent,
            g.rounded,
            g.magnitude()
        );
    }
    println!("implied global order {}", report.implied_order);
    Ok(0)
}
