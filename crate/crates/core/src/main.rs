use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pertprop::analytics::PredictionSet;
use pertprop::config::{apply_overrides, parse_kv};
use pertprop::error::Error;
use pertprop::oracle;
use pertprop::scenario::{run_scenario, write_outputs, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "pertprop",
    about = "Order-by-order perturbative wavepacket propagation and norm-deviation analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run(RunArgs),
    /// Run a sweep scenario (dt_k_sweep, gradient_sweep or chirp_sweep).
    Sweep(RunArgs),
    /// Check the combinatorial identities and print a pass/fail table.
    Oracle(OracleArgs),
    /// Emit analytic norm-deviation predictions aligned to the run's time grid.
    Predict(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the flat key-value config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV files and the manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a config key, e.g. --set dt=0.1 (repeatable).
    #[arg(long = "set")]
    set: Vec<String>,
    /// Worker pool size for parameter points (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    /// Highest order m for the exhaustive identity sweeps.
    #[arg(long, default_value_t = 4)]
    max_m: u32,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit with its own code; keep usage errors at 1
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args, false),
        Command::Sweep(args) => cmd_run(args, true),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Predict(args) => cmd_predict(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{err}");
            match err {
                Error::Guard(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load_config(args: &RunArgs) -> Result<ScenarioConfig, Error> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let mut map = parse_kv(&text)?;
    apply_overrides(&mut map, &args.set)?;
    if let Some(jobs) = args.jobs {
        map.insert("jobs".into(), jobs.to_string());
    }
    ScenarioConfig::from_kv(map)
}

fn cmd_run(args: RunArgs, require_sweep: bool) -> Result<ExitCode, Error> {
    let cfg = load_config(&args)?;
    if require_sweep && !cfg.kind.is_sweep() {
        return Err(Error::Usage(format!(
            "scenario '{}' is not a sweep; use the run subcommand",
            cfg.kind
        )));
    }
    let results = run_scenario(&cfg)?;
    let paths = write_outputs(&cfg, &results, &args.out)?;
    for result in &results {
        let report = result.final_report();
        println!(
            "point {}: {} reports, t_end = {:.6e}, final norm = {:.12e}",
            result.params.label,
            result.reports.len(),
            report.time,
            report.total_norm
        );
        for warning in &result.warnings {
            println!("  warning: {warning}");
        }
    }
    println!(
        "wrote {} files to {} (manifest: {})",
        paths.len(),
        args.out.display(),
        paths.last().expect("manifest path").display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(args: OracleArgs) -> Result<ExitCode, Error> {
    let max_m = args.max_m.clamp(1, 8);
    let mut all_ok = true;
    let mut check = |name: &str, outcome: Result<bool, Error>| {
        let ok = match outcome {
            Ok(v) => v,
            Err(e) => {
                println!("FAIL  {name}: {e}");
                all_ok = false;
                return;
            }
        };
        println!("{}  {name}", if ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    };

    check(
        &format!("xi closed form equals alternating sum for m <= {max_m}"),
        Ok((1..=max_m).all(|m| {
            (m..2 * m).all(|k| oracle::xi_closed(m, k).unwrap() == oracle::xi_direct(m, k))
        })),
    );

    let two_m_cap = (2 * max_m).min(12);
    check(
        &format!("pyramid sum reordering for 2m <= {two_m_cap}, all valid k"),
        Ok((1..=two_m_cap / 2)
            .all(|m| (m..=2 * m).all(|k| oracle::pyramid_reorder_check(2 * m, k).unwrap()))),
    );

    check(
        "alternating sign sums for 0 <= p <= q <= 20",
        Ok((0..=20u32).all(|p| (p..=20).all(|q| oracle::alternating_sum_identity(p, q)))),
    );

    let ann_m_cap = max_m.min(4);
    check(
        &format!("annihilation sign for n <= 3, oscillatory m <= {ann_m_cap}"),
        (|| {
            for n in 1..=3usize {
                for m in 1..=ann_m_cap {
                    for k in m..2 * m {
                        if !oracle::annihilation_check(n, m, k)? {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        })(),
    );

    check(
        &format!("survivor totals equal the counting formula (m <= {ann_m_cap})"),
        (|| {
            for n in 1..=3usize {
                for m in 1..=ann_m_cap {
                    for k in m..2 * m {
                        let groups = oracle::survivor_groups(n, m, k)?;
                        if groups.total_count() != oracle::surviving_bracket_count(n as u64, m, k)?
                        {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        })(),
    );

    check(
        "closed-form wave function equals the iterated recursion (n <= 4, k <= 3)",
        (|| {
            let grid = pertprop::grid::SpatialGrid::new(-10.0, 10.0, 32)?;
            let h = pertprop::propagator::SystemHamiltonian::from_linear(
                grid.clone(),
                1.0,
                &pertprop::propagator::LinearPotentialPair {
                    gradient: 2e-3,
                    offset0: 0.0,
                    offset1: 0.04,
                },
            )?;
            let pulse = pertprop::pulse::LaserPulse::chirped(8e-3, 3e-4, 40.0, 0.31, 1.5e2)?;
            let coupling = pertprop::propagator::CouplingOperator::new(1.0, pulse);
            let psi0 = pertprop::grid::gaussian_packet(&grid, 0.0, 2.6, 0.0, 1)?;
            let dt = 0.2;
            for n in 1..=4usize {
                for k in 0..=3usize {
                    let closed = oracle::closed_form_wavefunction(n, k, dt, &h, &coupling, &psi0)?;
                    let mut ps = pertprop::propagator::PerturbativeState::new(psi0.clone(), k, dt)?;
                    let step = pertprop::propagator::StepOperator::new(&h, dt);
                    for _ in 0..n {
                        ps.advance(&step, &coupling);
                    }
                    if closed.max_pointwise_diff(&ps.reconstruct()) > 1e-12 {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })(),
    );

    check(
        "stationary closed form matches simulation blocks (n = 40, m <= 2)",
        (|| {
            let grid = pertprop::grid::SpatialGrid::new(-10.0, 10.0, 64)?;
            let h = pertprop::propagator::SystemHamiltonian::from_linear(
                grid.clone(),
                1.0,
                &pertprop::propagator::LinearPotentialPair {
                    gradient: 1e-3,
                    offset0: 0.0,
                    offset1: 0.05,
                },
            )?;
            let pulse = pertprop::pulse::LaserPulse::chirped(8e-3, 3e-4, 40.0, 0.31, 1.5e2)?;
            let coupling = pertprop::propagator::CouplingOperator::new(1.0, pulse);
            let psi0 = pertprop::grid::gaussian_packet(&grid, 0.0, 1.5, 0.0, 1)?;
            let dt = 0.15;
            let n = 40;
            let mut ps = pertprop::propagator::PerturbativeState::new(psi0, 5, dt)?;
            let step = pertprop::propagator::StepOperator::new(&h, dt);
            for _ in 0..n {
                ps.advance(&step, &coupling);
            }
            let report = pertprop::norm::norm_orders(&ps)?;
            let w: Vec<f64> = (1..=n)
                .map(|j| coupling.coupling_at(j as f64 * dt))
                .collect();
            for m in 1..=2u32 {
                let closed = oracle::stationary_closed_form(n, m, dt, &w)?;
                let entry = report.entry(m as usize).expect("entry exists");
                if (entry.value - closed).abs() > 1e-12 {
                    return Ok(false);
                }
            }
            Ok(true)
        })(),
    );

    if all_ok {
        println!("all identity checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_predict(args: RunArgs) -> Result<ExitCode, Error> {
    let cfg = load_config(&args)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| Error::Usage(format!("cannot create {}: {e}", args.out.display())))?;
    for point in cfg.points() {
        let pulse = cfg.pulse_with_chirp(point.chirp)?;
        let set = PredictionSet::new(pulse, cfg.mu, point.dt, point.k);
        let total_time = cfg.dt * cfg.n_steps as f64;
        let n_steps = ((total_time / point.dt).round() as usize).max(1);
        let report_period = cfg.report_stride as f64 * cfg.dt;
        let stride = ((report_period / point.dt).round() as usize).max(1);

        let k = point.k as u32;
        let osc_orders: Vec<u32> = (k / 2 + 1..=k).collect();
        let mut csv = String::from("t,stationary_erf,stationary_envelope,stationary_asymptote");
        for m in &osc_orders {
            csv.push_str(&format!(",osc_estimate_N_{}", 2 * m));
        }
        csv.push('\n');
        let mut times = vec![0.0];
        times.extend(
            (1..=n_steps)
                .filter(|i| i % stride == 0 || *i == n_steps)
                .map(|i| i as f64 * point.dt),
        );
        for &t in &times {
            let erf_form = set.stationary_at(t);
            // quadrature prediction on the run's own time grid
            let env_form = pertprop::analytics::stationary_prediction(
                &set.pulse, cfg.mu, point.dt, t, point.dt,
            );
            csv.push_str(&format!(
                "{t:.15e},{erf_form:.15e},{env_form:.15e},{:.15e}",
                set.stationary_asymptote
            ));
            for (_, v) in set.oscillatory_at(t) {
                csv.push_str(&format!(",{v:.15e}"));
            }
            csv.push('\n');
        }
        let path = args.out.join(format!("predict_{}.csv", point.label));
        fs::write(&path, csv)
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))?;
        println!(
            "point {}: w_bar = {:.6e} (order-of-magnitude device), asymptote = {:.6e}, wrote {}",
            point.label,
            set.w_bar,
            set.stationary_asymptote,
            path.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}
