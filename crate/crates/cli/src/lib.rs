//! Command-line front end: scenario files in, CSV curves and JSON reports out.

pub mod config;
pub mod error;
pub mod output;
pub mod units;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use ctdper_core::ctd::{uniform_grid, CtdModel};
use ctdper_core::per::{from_db, IEllMethod, PerEvaluator};
use ctdper_core::presets::{TablePreset, TABLE_PRESETS};
use ctdper_core::simcore::{simulate, McConfig};
use ctdper_core::validate::validate;

use config::{IdleTime, ScenarioFile, SweepVariable};
use error::CliError;
use output::{num, text, Csv};

pub const MIN_VALIDATE_TRIALS: u64 = 10_000;

#[derive(Debug, Parser)]
#[command(name = "ctdper", version, about = "Collision-time distribution and packet error rate under on/off interference")]
pub struct Cli {
    /// Print the scenario schema, units and preset assumptions, then exit.
    #[arg(long)]
    pub explain: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the collision-time CDF curve as CSV.
    Ctd {
        #[command(flatten)]
        common: Common,
        /// Number of grid points.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write a PER sweep as CSV.
    Per {
        #[command(flatten)]
        common: Common,
        /// quadrature, hybrid, qn or gumbel.
        #[arg(long)]
        method: Option<IEllMethod>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare the analytic model against simulation; JSON report on stdout.
    Validate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimFlags,
        /// Also write the report here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Dump simulated trials as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimFlags,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML). Optional when --preset is given.
    pub scenario: Option<PathBuf>,
    /// Use a built-in idle-time preset.
    #[arg(long)]
    pub preset: Option<String>,
    /// Truncation tolerance of the renewal series.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimFlags {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
}

/// What a command produced: text for stdout and an exit code.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

pub fn load(common: &Common) -> Result<ScenarioFile, CliError> {
    let mut file = match &common.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            ScenarioFile::parse(&text).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
                other => other,
            })?
        }
        None => match &common.preset {
            Some(name) => ScenarioFile::with_idle(IdleTime::Preset { name: name.clone() }),
            None => return Err(CliError::Config("give a scenario file or --preset".into())),
        },
    };
    if let Some(name) = &common.preset {
        TablePreset::by_name(name).map_err(CliError::config)?;
        file.interferer.idle_time = IdleTime::Preset { name: name.clone() };
    }
    if let Some(eps) = common.epsilon {
        file.ctd.epsilon = eps;
    }
    Ok(file)
}

fn apply_sim(file: &mut ScenarioFile, sim: &SimFlags) {
    if let Some(s) = sim.seed {
        file.simulation.seed = s;
    }
    if let Some(t) = sim.trials {
        file.simulation.trials = t;
    }
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    if cli.explain {
        return Ok(Outcome {
            stdout: explain(),
            code: 0,
        });
    }
    match cli.command {
        None => Err(CliError::Config("no command given; see --help or --explain".into())),
        Some(Command::Ctd { common, grid, output }) => {
            let mut file = load(&common)?;
            if let Some(g) = grid {
                file.ctd.grid_points = g;
            }
            cmd_ctd(&file, &output)
        }
        Some(Command::Per { common, method, output }) => {
            let mut file = load(&common)?;
            if let Some(m) = method {
                file.per.method = m;
            }
            cmd_per(&file, &output)
        }
        Some(Command::Validate { common, sim, output }) => {
            let mut file = load(&common)?;
            apply_sim(&mut file, &sim);
            cmd_validate(&file, output.as_deref())
        }
        Some(Command::Simulate { common, sim, output }) => {
            let mut file = load(&common)?;
            apply_sim(&mut file, &sim);
            cmd_simulate(&file, &output)
        }
    }
}

fn json_line(v: serde_json::Value) -> String {
    serde_json::to_string_pretty(&v).unwrap() + "\n"
}

pub fn cmd_ctd(file: &ScenarioFile, output: &Path) -> Result<Outcome, CliError> {
    let points = file.ctd.grid_points;
    if points < 2 {
        return Err(CliError::Config(format!("grid needs at least 2 points (got {points})")));
    }
    let scenario = file.scenario()?;
    let model = CtdModel::new(&scenario, file.ctd.epsilon)?;
    let grid = match file.ctd.grid_end {
        Some(end) if end.as_secs() > 0.0 => uniform_grid(end.as_secs(), points),
        Some(end) => return Err(CliError::Config(format!("ctd.grid_end {end} must be positive"))),
        None => model.default_grid(points)?,
    };
    let curve = model.curve(&grid)?;
    let hash = file.hash();
    let mut csv = Csv::new("ctd", &hash, &["x_seconds", "omega0", "omega1", "omega"]);
    for i in 0..grid.len() {
        csv.row(&[
            num(grid[i]),
            num(curve.omega0[i]),
            num(curve.omega1[i]),
            num(curve.omega[i]),
        ]);
    }
    csv.write(output)?;
    Ok(Outcome {
        stdout: json_line(json!({
            "alpha": curve.alpha,
            "omega_at_zero": curve.omega[0],
            "n_max": curve.n_max,
            "grid_points": grid.len(),
            "grid_end_seconds": grid[grid.len() - 1],
            "config_sha256": hash,
        })),
        code: 0,
    })
}

pub fn cmd_per(file: &ScenarioFile, output: &Path) -> Result<Outcome, CliError> {
    let p = &file.per;
    let sweep = p.sweep.points()?;
    let scenario = file.scenario()?;
    let model = CtdModel::new(&scenario, file.ctd.epsilon)?;
    let eval = PerEvaluator::new(&model, file.modulation()?, p.ell_switch, p.ell_max)?;
    let extra = !matches!(p.method, IEllMethod::Quadrature | IEllMethod::Hybrid);

    let mut columns = vec![
        "gamma_i_bar_db",
        "per_quadrature",
        "per_hybrid",
        "tail_mass",
        "gamma_s_db",
        "ell_max",
        "hybrid_clamped_terms",
    ];
    if p.noise_bits.is_some() {
        columns.push("per_noisy_quadrature");
    }
    let method_col = format!("per_{}", p.method);
    let error_col = format!("{}_error", p.method);
    if extra {
        columns.push(&method_col);
        columns.push(&error_col);
    }

    let rows: Vec<Vec<String>> = sweep
        .par_iter()
        .map(|&v| -> Result<Vec<String>, CliError> {
            let (gs_db, gb_db) = match p.sweep.variable {
                SweepVariable::GammaIBar => (p.gamma_s_db, v),
                SweepVariable::GammaS => (v, p.gamma_i_bar_db),
            };
            let (gs, gb) = (from_db(gs_db), from_db(gb_db));
            let quad = eval.per(gs, gb, IEllMethod::Quadrature)?;
            let hybrid = eval.per(gs, gb, IEllMethod::Hybrid)?;
            let mut row = vec![
                num(gb_db),
                num(quad.per),
                num(hybrid.per),
                num(quad.tail_mass),
                num(gs_db),
                quad.ell_max.to_string(),
                hybrid.clamped_terms.to_string(),
            ];
            if let Some(bits) = p.noise_bits {
                row.push(num(eval.per_noisy(gs, gb, bits)?.per));
            }
            if extra {
                match eval.per(gs, gb, p.method) {
                    Ok(r) => row.extend([num(r.per), String::new()]),
                    Err(e) => row.extend([String::new(), text(&e.to_string())]),
                }
            }
            Ok(row)
        })
        .collect::<Result<_, _>>()?;

    let hash = file.hash();
    let mut csv = Csv::new("per", &hash, &columns);
    for r in &rows {
        csv.row(r);
    }
    csv.write(output)?;
    let failed_rows = if extra { rows.iter().filter(|r| !r[r.len() - 1].is_empty()).count() } else { 0 };
    Ok(Outcome {
        stdout: json_line(json!({
            "alpha": model.alpha(),
            "method": p.method.name(),
            "ell_max": eval.bits().ell_max,
            "tail_mass": eval.bits().tail_mass,
            "rows": rows.len(),
            "rows_with_method_error": failed_rows,
            "config_sha256": hash,
        })),
        code: 0,
    })
}

pub fn cmd_validate(file: &ScenarioFile, output: Option<&Path>) -> Result<Outcome, CliError> {
    let trials = file.simulation.trials;
    if trials < MIN_VALIDATE_TRIALS {
        return Err(CliError::Config(format!(
            "validate needs at least {MIN_VALIDATE_TRIALS} trials (got {trials})"
        )));
    }
    let config = McConfig::new(file.scenario()?, trials, file.simulation.seed)?;
    let report = validate(&config, file.ctd.epsilon, file.tolerances())?;
    let body = json_line(json!({
        "config_sha256": file.hash(),
        "report": report,
    }));
    if let Some(path) = output {
        std::fs::write(path, &body)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    if report.passed {
        Ok(Outcome { stdout: body, code: 0 })
    } else {
        // report still goes to stdout; the failing statistics go to stderr via the error
        print!("{body}");
        Err(CliError::Validation(report.failures.join("; ")))
    }
}

pub fn cmd_simulate(file: &ScenarioFile, output: &Path) -> Result<Outcome, CliError> {
    let trials = file.simulation.trials;
    if trials == 0 {
        return Err(CliError::Config("trials must be positive".into()));
    }
    let config = McConfig::new(file.scenario()?, trials, file.simulation.seed)?;
    let results = simulate(&config)?;
    let hash = file.hash();
    let mut csv = Csv::new(
        "simulate",
        &hash,
        &["trial_index", "initial_state", "packet_len_s", "collision_time_s", "renewal_count"],
    );
    for (i, t) in results.iter().enumerate() {
        csv.row(&[
            i.to_string(),
            t.initial_state.as_str().to_string(),
            num(t.packet_len),
            num(t.collision_time),
            t.renewal_count.to_string(),
        ]);
    }
    csv.write(output)?;
    let n = results.len() as f64;
    Ok(Outcome {
        stdout: json_line(json!({
            "trials": trials,
            "seed": file.simulation.seed,
            "empirical_omega_at_zero": results.iter().filter(|t| t.collision_time == 0.0).count() as f64 / n,
            "mean_collision_time_s": results.iter().map(|t| t.collision_time).sum::<f64>() / n,
            "config_sha256": hash,
        })),
        code: 0,
    })
}

pub fn explain() -> String {
    let mut s = String::from(
        "Scenario files are TOML. Unknown keys are rejected. Every time needs a unit:\n\
         \"374 us\", \"374 µs\", \"1.984 ms\" or \"0.04 s\". Times are seconds internally.\n\n\
         [interferer.on_time]   kind = \"constant\", duration = <time>   | kind = \"exponential\", mean = <time>\n\
         \x20                      (default: constant 374 us)\n\
         [interferer.idle_time] kind = \"exponential\", mean = <time> or activity = <alpha in (0,1)>\n\
         \x20                      kind = \"hyperexponential\", phases = [{ probability = p, mean = <time> }, ...]\n\
         \x20                      kind = \"preset\", name = <preset>\n\
         [link]                 mean_packet_time = <time> (1.984 ms), bit_time = <time> (4 us)\n\
         [modulation]           c_m (1), k_m (2); BER = c_m Q(sqrt(k_m SINR))\n\
         [ctd]                  epsilon (1e-9), grid_points (512), grid_end = <time> (automatic)\n\
         [per]                  method (hybrid), gamma_s_db (10), gamma_i_bar_db (10), ell_switch (8),\n\
         \x20                      ell_max (automatic), noise_bits (none)\n\
         [per.sweep]            variable = \"gamma_i_bar\" | \"gamma_s\", start_db, stop_db, step_db (-10, 30, 1)\n\
         [simulation]           trials (1000000), seed (1), ks_tolerance (0.005),\n\
         \x20                      conditional_ks_tolerance (0.01), sigma (3)\n\n\
         Presets: hyperexponential idle laws fitted to measured 2.4 GHz WLAN traffic.\n\
         ASSUMPTION: the published phase means carry no unit; they are read as seconds.\n\
         Probabilities are rescaled to sum to exactly 1 (they are rounded to 1e-3).\n",
    );
    for p in &TABLE_PRESETS {
        let alpha = p.scenario().map(|s| s.activity_factor()).unwrap_or(f64::NAN);
        s.push_str(&format!("  {:<14} alpha = {alpha:.4} (constant 374 us busy time)\n", p.name));
        for (prob, mean) in p.phases {
            s.push_str(&format!("      p = {prob:.3}  mean = {mean} s\n"));
        }
    }
    s.push_str(
        "\nExit codes: 0 ok, 2 configuration or usage error, 3 numerical failure, 4 validation failure.\n\
         CSV files start with a `#` comment carrying the sha256 of the resolved configuration.\n",
    );
    s
}
