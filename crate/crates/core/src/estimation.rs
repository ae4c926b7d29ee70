//! Fisher information, Cramér-Rao error, optimal probing times and the
//! criticality scans.
//!
//! The probe's quantum Fisher information about `tau_c` is
//! `F_Q = exp(-2J) / (1 - exp(-2J)) * (dJ/dtau_c)^2`, and the per-measurement
//! relative error bound is `eps = 1 / (tau_c sqrt(F_Q))`. Under a tied
//! narrowband control (`omega_ctrl = pi N / t`) the derivative changes sign
//! at `omega_ctrl = omega_0`, so `F_Q` vanishes there and `eps` diverges;
//! the global optimum over `t` then jumps between a short-time (long memory)
//! and a long-time (short memory) branch as `sqrt(2N) g tau_c` crosses ~1.

use crate::attenuation::{attenuation, ProbeResult};
use crate::error::{Error, Result};
use crate::filters::ControlFilter;
use crate::search::{golden_section_minimize, refine_basins};
use crate::spectral::NoiseSpectrum;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Which side of the reference time `t_0 = pi N / omega_0` the optimal
/// probing time falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Long-memory: `t_opt < t_0`, attenuation grows like `t^(beta+1)`.
    LongMemory,
    /// Short-memory: `t_opt > t_0`, attenuation grows linearly in `t`.
    ShortMemory,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::LongMemory => write!(f, "LM"),
            Branch::ShortMemory => write!(f, "SM"),
        }
    }
}

/// One evaluated probing point.
#[derive(Debug, Clone, Copy)]
pub struct ErrorPoint {
    pub t: f64,
    /// `pi N / t` for controlled protocols, 0 for free evolution.
    pub omega_ctrl: f64,
    pub qfi: f64,
    /// Relative error bound; `f64::INFINITY` where no information exists.
    pub eps: f64,
    pub j: f64,
}

/// One row of the criticality scan over `x = sqrt(2N) g tau_c`.
#[derive(Debug, Clone, Copy)]
pub struct CriticalScanRow {
    pub x: f64,
    pub eps_min: f64,
    pub t_opt: f64,
    /// Reference time `pi N / omega_0`.
    pub t0: f64,
    pub branch: Branch,
}

/// Result of a single optimal-time search.
#[derive(Debug, Clone, Copy)]
pub struct OptimalTime {
    pub t_opt: f64,
    pub eps_min: f64,
    pub branch: Branch,
}

/// Control protocol family parameterized by duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlFamily {
    FreeEvolution,
    Cpmg(u32),
    NarrowbandDelta { n_pulses: u32, harmonics: u32 },
}

impl ControlFamily {
    /// Instantiates the family at duration `t`.
    pub fn filter_at(&self, t: f64) -> Result<ControlFilter> {
        match *self {
            ControlFamily::FreeEvolution => ControlFilter::free(t),
            ControlFamily::Cpmg(n) => ControlFilter::cpmg(n, t),
            ControlFamily::NarrowbandDelta {
                n_pulses,
                harmonics,
            } => ControlFilter::narrowband(n_pulses, harmonics, t),
        }
    }

    pub fn pulse_count(&self) -> u32 {
        match *self {
            ControlFamily::FreeEvolution => 0,
            ControlFamily::Cpmg(n) => n,
            ControlFamily::NarrowbandDelta { n_pulses, .. } => n_pulses,
        }
    }

    /// Reference time separating the branches: `pi N / omega_0` for
    /// controlled protocols, `tau_c` for free evolution.
    pub fn reference_time(&self, spec: &NoiseSpectrum) -> f64 {
        match self.pulse_count() {
            0 => spec.tau_c(),
            n => PI * n as f64 / spec.critical_frequency(),
        }
    }
}

/// Fisher information from precomputed attenuation outputs.
///
/// Uses `exp(-2J)/(1-exp(-2J)) = 1/expm1(2J)`, exact for small `J`;
/// returns 0 when the derivative (or `J` itself) vanishes.
pub fn qfi_from_parts(j: f64, dj_dtau: f64) -> f64 {
    if dj_dtau == 0.0 || j == 0.0 {
        return 0.0;
    }
    dj_dtau * dj_dtau / (2.0 * j).exp_m1()
}

fn qfi_from_probe(p: &ProbeResult) -> f64 {
    qfi_from_parts(p.j, p.dj_dtau)
}

/// Quantum Fisher information about `tau_c` at one probing configuration.
pub fn qfi(spec: &NoiseSpectrum, filter: &ControlFilter, tol: f64) -> Result<f64> {
    Ok(qfi_from_probe(&attenuation(spec, filter, tol)?))
}

/// Cramér-Rao relative error `1/(tau_c sqrt(F_Q))`; infinite when `F_Q = 0`.
pub fn relative_error(spec: &NoiseSpectrum, filter: &ControlFilter, tol: f64) -> Result<f64> {
    let f = qfi(spec, filter, tol)?;
    Ok(eps_from_qfi(spec.tau_c(), f))
}

fn eps_from_qfi(tau_c: f64, qfi: f64) -> f64 {
    if qfi > 0.0 {
        (tau_c * qfi.sqrt()).recip()
    } else {
        f64::INFINITY
    }
}

/// Coherence is unmeasurable beyond this attenuation; points provably past
/// it are scored by analytic bounds instead of quadrature.
const SATURATION_J: f64 = 30.0;

/// Rigorous lower bound on `J` for pointwise filters: the filter's total
/// mass is `pi*t` with at most `4(N+1)^2/W` of it outside `[-W, W]`, and
/// `G` is even and nonincreasing in `|omega|`, so
/// `J >= G(W) * (pi*t - 4(N+1)^2/W)`.
fn attenuation_lower_bound(spec: &NoiseSpectrum, n_pulses: u32, t: f64) -> f64 {
    let mass = PI * t;
    let nn = (n_pulses as f64 + 1.0) * (n_pulses as f64 + 1.0);
    let mut best = 0.0_f64;
    for k in [0.5, 1.0, 2.0] {
        let w = k / spec.tau_c();
        let inside = mass - 4.0 * nn / w;
        if inside > 0.0 {
            best = best.max(spec.spectrum_at(w) * inside);
        }
    }
    best
}

/// Full [`ErrorPoint`] at one probing time.
///
/// Probing times where the coherence is provably below `exp(-30)` skip the
/// attenuation integral: such points carry no measurable signal, and the
/// row reports the rigorous bounds instead (`j` is then a lower bound and
/// `eps` a lower bound on the already astronomical error, using
/// `|dJ/dtau_c| <= beta * J / tau_c` and `J <= pi t G(0)`).
pub fn error_point(
    spec: &NoiseSpectrum,
    family: &ControlFamily,
    t: f64,
    tol: f64,
) -> Result<ErrorPoint> {
    let filter = family.filter_at(t)?;
    if !matches!(family, ControlFamily::NarrowbandDelta { .. }) {
        let j_lo = attenuation_lower_bound(spec, family.pulse_count(), t);
        if j_lo > SATURATION_J {
            let j_up = PI * t * spec.spectrum_at(0.0);
            let eps = (2.0 * j_lo).exp_m1().sqrt() / (spec.beta() * j_up);
            let qfi = if eps.is_finite() {
                (spec.tau_c() * eps).powi(2).recip()
            } else {
                0.0
            };
            return Ok(ErrorPoint {
                t,
                omega_ctrl: filter.omega_ctrl().unwrap_or(0.0),
                qfi,
                eps,
                j: j_lo,
            });
        }
    }
    let probe = attenuation(spec, &filter, tol)?;
    let f = qfi_from_probe(&probe);
    Ok(ErrorPoint {
        t,
        omega_ctrl: filter.omega_ctrl().unwrap_or(0.0),
        qfi: f,
        eps: eps_from_qfi(spec.tau_c(), f),
        j: probe.j,
    })
}

/// Number of points in the coarse log-spaced scan of `optimal_time`.
const COARSE_POINTS: usize = 400;

/// Finds the global minimizer of the relative error over probing time.
///
/// Log-spaced coarse scan followed by golden-section refinement of every
/// local basin; among candidates within a relative `tol` of the best value
/// the smallest time wins. The branch label compares `t_opt` against the
/// family's reference time.
pub fn optimal_time(
    spec: &NoiseSpectrum,
    family: &ControlFamily,
    t_range: (f64, f64),
    tol: f64,
) -> Result<OptimalTime> {
    let (t_lo, t_hi) = t_range;
    if t_lo.is_nan() || t_hi.is_nan() || t_lo <= 0.0 || t_hi <= t_lo {
        return Err(Error::InvalidParameter(format!(
            "invalid time range [{t_lo}, {t_hi}]"
        )));
    }
    if t_lo > 1e-2 * spec.tau_c() || t_hi < 1e3 * spec.tau_c() {
        return Err(Error::InvalidParameter(format!(
            "time range [{t_lo}, {t_hi}] must span at least [1e-2, 1e3] tau_c"
        )));
    }

    let log_lo = t_lo.ln();
    let log_hi = t_hi.ln();
    let xs: Vec<f64> = (0..COARSE_POINTS)
        .map(|i| log_lo + (log_hi - log_lo) * i as f64 / (COARSE_POINTS - 1) as f64)
        .collect();
    // a coarse point that fails to evaluate would silently distort the
    // search, so those abort the whole call
    let coarse: Vec<Result<f64>> = xs
        .par_iter()
        .map(|&u| error_point(spec, family, u.exp(), tol).map(|p| p.eps))
        .collect();
    let mut values = Vec::with_capacity(coarse.len());
    for r in coarse {
        values.push(r?);
    }

    let eps_log = |u: f64| -> f64 {
        match error_point(spec, family, u.exp(), tol) {
            Ok(p) => p.eps,
            Err(_) => f64::INFINITY,
        }
    };
    let candidates = refine_basins(eps_log, &xs, &values, 1e-10);
    if candidates.is_empty() {
        return Err(Error::NoInformation(
            "relative error is infinite over the whole time range".into(),
        ));
    }

    let best_val = candidates
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    if !best_val.is_finite() {
        return Err(Error::NoInformation(
            "relative error is infinite over the whole time range".into(),
        ));
    }
    // ties within tol resolved toward the smaller time
    let mut t_opt = f64::INFINITY;
    for &(u, v) in &candidates {
        if v <= best_val * (1.0 + tol) {
            t_opt = t_opt.min(u.exp());
        }
    }
    let eps_min = error_point(spec, family, t_opt, tol)?.eps;

    let t0 = family.reference_time(spec);
    let branch = if t_opt < t0 {
        Branch::LongMemory
    } else {
        Branch::ShortMemory
    };
    Ok(OptimalTime {
        t_opt,
        eps_min,
        branch,
    })
}

/// Evaluates the error landscape on an explicit time grid (the
/// control-frequency scan of the tied protocol: `omega_ctrl = pi N / t`).
pub fn error_vs_control_scan(
    spec: &NoiseSpectrum,
    family: &ControlFamily,
    t_grid: &[f64],
    tol: f64,
) -> Result<Vec<ErrorPoint>> {
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "time grid must be strictly increasing".into(),
        ));
    }
    t_grid
        .par_iter()
        .map(|&t| error_point(spec, family, t, tol))
        .collect()
}

/// Criticality scan: for each `x = sqrt(2N) g tau_c` on the grid, finds the
/// optimal probing time of the tied single-harmonic narrowband protocol and
/// labels its branch. Works in internal units `tau_c = 1`, varying `g`.
pub fn critical_scan(
    beta: f64,
    n_pulses: u32,
    x_grid: &[f64],
    tol: f64,
) -> Result<Vec<CriticalScanRow>> {
    if x_grid.is_empty() || x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "x grid must be nonempty and strictly increasing".into(),
        ));
    }
    if x_grid[0] <= 0.0 {
        return Err(Error::InvalidParameter("x values must be positive".into()));
    }
    let family = ControlFamily::NarrowbandDelta {
        n_pulses,
        harmonics: 1,
    };
    x_grid
        .par_iter()
        .map(|&x| {
            let g = x / (2.0 * n_pulses as f64).sqrt();
            let spec = NoiseSpectrum::new(g, 1.0, beta)?;
            let opt = optimal_time(&spec, &family, (1e-2, 1e6), tol)?;
            Ok(CriticalScanRow {
                x,
                eps_min: opt.eps_min,
                t_opt: opt.t_opt,
                t0: family.reference_time(&spec),
                branch: opt.branch,
            })
        })
        .collect()
}

/// Outcome of the pulse-budget strategy selection.
#[derive(Debug, Clone, Copy)]
pub struct StrategyChoice {
    /// Optimal number of pulses (1 = Hahn echo).
    pub n_star: u32,
    pub eps_min: f64,
    pub t_opt: f64,
}

/// Picks the pulse number `N <= n_max` minimizing the optimal-time error
/// for the narrowband protocol at coupling `g tau_c`. Ties go to smaller N.
pub fn strategy_select(g_tau_c: f64, beta: f64, n_max: u32, tol: f64) -> Result<StrategyChoice> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be >= 1".into()));
    }
    let spec = NoiseSpectrum::new(g_tau_c, 1.0, beta)?;
    let per_n: Vec<Result<OptimalTime>> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let family = ControlFamily::NarrowbandDelta {
                n_pulses: n,
                harmonics: 1,
            };
            optimal_time(&spec, &family, (1e-2, 1e6), tol)
        })
        .collect();
    let mut best: Option<StrategyChoice> = None;
    for (i, r) in per_n.into_iter().enumerate() {
        let opt = r?;
        let replace = match &best {
            None => true,
            Some(b) => opt.eps_min < b.eps_min,
        };
        if replace {
            best = Some(StrategyChoice {
                n_star: i as u32 + 1,
                eps_min: opt.eps_min,
                t_opt: opt.t_opt,
            });
        }
    }
    best.ok_or_else(|| Error::NoInformation("no pulse number produced finite error".into()))
}

/// Minimizes `h(J) = sqrt(exp(2J) - 1) / J`, the short-memory error bound
/// as a function of the attenuation at measurement.
///
/// Returns `(J_0, eps_0)`, numerically `(0.797, 2.485)`.
pub fn ultimate_bound() -> (f64, f64) {
    let h = |j: f64| (2.0 * j).exp_m1().sqrt() / j;
    golden_section_minimize(h, 1e-6, 5.0, 1e-12, 400)
}
