//! Subcommand drivers: each builds a [`Table`] from a resolved config.

use crate::config::{Command, FilterChoice, RunConfig};
use crate::output::{Cell, Table};
use crate::AppError;
use memprobe::attenuation::{attenuation, probabilities};
use memprobe::estimation::{error_point, optimal_time, strategy_select, ControlFamily};
use memprobe::filters::ControlFilter;
use memprobe::montecarlo::{crb_check, Protocol};
use memprobe::spectral::NoiseSpectrum;
use memprobe::Error as CoreError;
use rayon::prelude::*;

fn validation(e: CoreError) -> AppError {
    AppError::validation(e.to_string())
}

fn spectrum_of(cfg: &RunConfig) -> Result<NoiseSpectrum, AppError> {
    NoiseSpectrum::new(cfg.effective_g(), cfg.tau_c, cfg.beta).map_err(validation)
}

fn family_of(cfg: &RunConfig) -> ControlFamily {
    match cfg.filter {
        FilterChoice::Free => ControlFamily::FreeEvolution,
        FilterChoice::Hahn => ControlFamily::Cpmg(1),
        FilterChoice::Cpmg => ControlFamily::Cpmg(cfg.n_pulses),
        FilterChoice::Narrowband => ControlFamily::NarrowbandDelta {
            n_pulses: cfg.n_pulses,
            harmonics: cfg.harmonics,
        },
    }
}

fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, AppError> {
    if lo.is_nan() || hi.is_nan() || lo <= 0.0 || hi <= lo || n == 0 {
        return Err(AppError::validation(format!(
            "invalid log grid [{lo}, {hi}] with {n} points"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect())
}

fn nan_row(n: usize) -> Vec<Cell> {
    (0..n).map(|_| Cell::Float(f64::NAN)).collect()
}

/// Resolves `t = auto` (crb uses the optimal probing time).
pub fn finalize(cfg: &mut RunConfig) -> Result<(), AppError> {
    if cfg.command == Command::Crb && cfg.t.is_none() {
        let spec = spectrum_of(cfg)?;
        let opt = optimal_time(&spec, &family_of(cfg), (cfg.t_min, cfg.t_max), cfg.tol)
            .map_err(validation)?;
        cfg.t = Some(opt.t_opt);
    }
    Ok(())
}

pub fn run_command(cfg: &RunConfig) -> Result<Table, AppError> {
    match cfg.command {
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Filter => cmd_filter(cfg),
        Command::Attenuation => cmd_attenuation(cfg),
        Command::ErrorScan => cmd_error_scan(cfg),
        Command::OptimalTime => cmd_optimal_time(cfg),
        Command::CriticalScan => cmd_critical_scan(cfg),
        Command::Strategy => cmd_strategy(cfg),
        Command::Crb => cmd_crb(cfg),
    }
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<Table, AppError> {
    let spec = spectrum_of(cfg)?;
    let omega0 = spec.critical_frequency();
    let mut grid = lin_grid(cfg.omega_min, cfg.omega_max, cfg.omega_points);
    if cfg.omega_points > 1 && omega0 > cfg.omega_min && omega0 < cfg.omega_max {
        grid.push(omega0);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }
    let mut table = Table::new(vec!["omega", "g_spectrum", "dg_dtau", "is_critical"]);
    for w in grid {
        table.push_ok(vec![
            Cell::Float(w),
            Cell::Float(spec.spectrum_at(w)),
            Cell::Float(spec.spectrum_dtau(w)),
            Cell::Int((w == omega0) as i64),
        ]);
    }
    Ok(table)
}

fn cmd_filter(cfg: &RunConfig) -> Result<Table, AppError> {
    let t = cfg
        .t
        .ok_or_else(|| AppError::validation("the filter command needs a duration t".into()))?;
    if cfg.filter == FilterChoice::Narrowband {
        // delta filters have no pointwise density; emit their spikes
        let filter =
            ControlFilter::narrowband(cfg.n_pulses, cfg.harmonics, t).map_err(validation)?;
        let mut table = Table::new(vec!["harmonic", "omega", "weight"]);
        for (i, (w, wt)) in filter.narrowband_terms().unwrap().into_iter().enumerate() {
            table.push_ok(vec![
                Cell::Int(2 * i as i64 + 1),
                Cell::Float(w),
                Cell::Float(wt),
            ]);
        }
        return Ok(table);
    }
    let filter = family_of(cfg).filter_at(t).map_err(validation)?;
    let mut table = Table::new(vec!["omega", "filter_value"]);
    for w in lin_grid(cfg.omega_min, cfg.omega_max, cfg.omega_points) {
        table.push_ok(vec![
            Cell::Float(w),
            Cell::Float(filter.evaluate(w).map_err(validation)?),
        ]);
    }
    Ok(table)
}

fn cmd_attenuation(cfg: &RunConfig) -> Result<Table, AppError> {
    let spec = spectrum_of(cfg)?;
    let family = family_of(cfg);
    let grid = log_grid(cfg.t_min, cfg.t_max, cfg.t_points)?;
    let results: Vec<Result<Vec<Cell>, String>> = grid
        .par_iter()
        .map(|&t| {
            let filter = family.filter_at(t).map_err(|e| e.to_string())?;
            let probe = attenuation(&spec, &filter, cfg.tol).map_err(|e| e.to_string())?;
            let (pp, pm) = probabilities(probe.j).map_err(|e| e.to_string())?;
            Ok(vec![
                Cell::Float(t),
                Cell::Float(probe.j),
                Cell::Float(probe.dj_dtau),
                Cell::Float(pp),
                Cell::Float(pm),
                Cell::Float(probe.abs_error_estimate),
                Cell::Text(probe.method.to_string()),
            ])
        })
        .collect();
    let mut table = Table::new(vec![
        "t",
        "j",
        "dj_dtau",
        "p_plus",
        "p_minus",
        "rel_err_est",
        "method",
    ]);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(cells) => table.push_ok(cells),
            Err(msg) => {
                let mut cells = nan_row(6);
                cells[0] = Cell::Float(grid[i]);
                cells.push(Cell::Text(String::new()));
                table.push_failed(cells, format!("error: {msg}"));
            }
        }
    }
    Ok(table)
}

fn cmd_error_scan(cfg: &RunConfig) -> Result<Table, AppError> {
    let spec = spectrum_of(cfg)?;
    let family = family_of(cfg);
    let grid = log_grid(cfg.t_min, cfg.t_max, cfg.t_points)?;
    let results: Vec<Result<Vec<Cell>, String>> = grid
        .par_iter()
        .map(|&t| {
            let p = error_point(&spec, &family, t, cfg.tol).map_err(|e| e.to_string())?;
            Ok(vec![
                Cell::Float(p.t),
                Cell::Float(p.omega_ctrl),
                Cell::Float(p.j),
                Cell::Float(p.qfi),
                Cell::Float(p.eps),
            ])
        })
        .collect();
    let mut table = Table::new(vec!["t", "omega_ctrl", "j", "qfi", "eps"]);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(cells) => table.push_ok(cells),
            Err(msg) => {
                let mut cells = nan_row(5);
                cells[0] = Cell::Float(grid[i]);
                table.push_failed(cells, format!("error: {msg}"));
            }
        }
    }
    Ok(table)
}

fn cmd_optimal_time(cfg: &RunConfig) -> Result<Table, AppError> {
    let spec = spectrum_of(cfg)?;
    let family = family_of(cfg);
    let mut table = Table::new(vec!["t_opt", "eps_min", "t0", "branch"]);
    match optimal_time(&spec, &family, (cfg.t_min, cfg.t_max), cfg.tol) {
        Ok(opt) => table.push_ok(vec![
            Cell::Float(opt.t_opt),
            Cell::Float(opt.eps_min),
            Cell::Float(family.reference_time(&spec)),
            Cell::Text(opt.branch.to_string()),
        ]),
        Err(CoreError::InvalidParameter(msg)) => {
            return Err(AppError::validation(msg));
        }
        Err(e) => {
            let mut cells = nan_row(3);
            cells.push(Cell::Text(String::new()));
            table.push_failed(cells, format!("error: {e}"));
        }
    }
    Ok(table)
}

fn cmd_critical_scan(cfg: &RunConfig) -> Result<Table, AppError> {
    memprobe::spectral::normalization(cfg.beta).map_err(validation)?;
    let grid = log_grid(cfg.x_min, cfg.x_max, cfg.x_points)?;
    let family = ControlFamily::NarrowbandDelta {
        n_pulses: cfg.n_pulses,
        harmonics: 1,
    };
    let results: Vec<Result<Vec<Cell>, String>> = grid
        .par_iter()
        .map(|&x| {
            let g = x / (2.0 * cfg.n_pulses as f64).sqrt();
            let spec = NoiseSpectrum::new(g, 1.0, cfg.beta).map_err(|e| e.to_string())?;
            let opt =
                optimal_time(&spec, &family, (1e-2, 1e6), cfg.tol).map_err(|e| e.to_string())?;
            let t0 = family.reference_time(&spec);
            Ok(vec![
                Cell::Float(x),
                Cell::Float(g),
                Cell::Float(opt.eps_min),
                Cell::Float(opt.t_opt),
                Cell::Float(t0),
                Cell::Float(opt.t_opt / t0),
                Cell::Text(opt.branch.to_string()),
            ])
        })
        .collect();
    let mut table = Table::new(vec![
        "x", "g", "eps_min", "t_opt", "t0", "t_ratio", "branch",
    ]);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(cells) => table.push_ok(cells),
            Err(msg) => {
                let mut cells = nan_row(6);
                cells[0] = Cell::Float(grid[i]);
                cells.push(Cell::Text(String::new()));
                table.push_failed(cells, format!("error: {msg}"));
            }
        }
    }
    Ok(table)
}

fn cmd_strategy(cfg: &RunConfig) -> Result<Table, AppError> {
    memprobe::spectral::normalization(cfg.beta).map_err(validation)?;
    let grid = log_grid(cfg.gtc_min, cfg.gtc_max, cfg.gtc_points)?;
    let results: Vec<Result<Vec<Cell>, String>> = grid
        .par_iter()
        .map(|&gtc| {
            let choice =
                strategy_select(gtc, cfg.beta, cfg.n_max, cfg.tol).map_err(|e| e.to_string())?;
            Ok(vec![
                Cell::Float(gtc),
                Cell::Int(choice.n_star as i64),
                Cell::Float(choice.eps_min),
                Cell::Float(choice.t_opt),
            ])
        })
        .collect();
    let mut table = Table::new(vec!["g_tau_c", "n_star", "eps_min", "t_opt"]);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(cells) => table.push_ok(cells),
            Err(msg) => {
                let mut cells = nan_row(4);
                cells[0] = Cell::Float(grid[i]);
                table.push_failed(cells, format!("error: {msg}"));
            }
        }
    }
    Ok(table)
}

fn cmd_crb(cfg: &RunConfig) -> Result<Table, AppError> {
    let t = cfg.t.expect("finalize resolved t");
    let g = cfg.effective_g();
    let filter = family_of(cfg).filter_at(t).map_err(validation)?;
    let protocol = Protocol::new(g, cfg.beta, filter);
    let mut table = Table::new(vec![
        "t",
        "shots",
        "n_trials",
        "empirical_rel_std",
        "predicted_rel_err",
        "ratio",
        "mean_estimate",
        "relative_bias",
    ]);
    match crb_check(&protocol, cfg.tau_c, cfg.shots, cfg.n_trials, cfg.seed) {
        Ok(c) => table.push_ok(vec![
            Cell::Float(t),
            Cell::Int(cfg.shots as i64),
            Cell::Int(cfg.n_trials as i64),
            Cell::Float(c.empirical_rel_std),
            Cell::Float(c.predicted_rel_err),
            Cell::Float(c.empirical_rel_std / c.predicted_rel_err),
            Cell::Float(c.mean_estimate),
            Cell::Float(c.relative_bias),
        ]),
        Err(CoreError::InvalidParameter(msg)) => return Err(AppError::validation(msg)),
        Err(e) => {
            let mut cells = nan_row(8);
            cells[0] = Cell::Float(t);
            table.push_failed(cells, format!("error: {e}"));
        }
    }
    Ok(table)
}
