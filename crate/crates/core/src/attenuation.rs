//! Attenuation factor of the probe coherence and measurement probabilities.
//!
//! The coherence decays as `exp(-J)` with
//! `J = integral over omega of F_t(omega) G(omega)`. For pointwise filters
//! the integral is done by adaptive quadrature over `[0, Omega]` (doubled,
//! the integrand is even), with `Omega` pushed out until the analytic
//! power-law tail bound fits inside the error budget. Narrowband filters
//! bypass quadrature and sum their `(frequency, weight)` spikes. The
//! `tau_c` derivative of `J` is computed the same way with `dG/dtau_c` in
//! the integrand.

use crate::error::{Error, Result};
use crate::filters::{ControlFilter, FilterKind};
use crate::quad::AdaptiveQuad;
use crate::spectral::NoiseSpectrum;
use std::f64::consts::PI;

/// How a [`ProbeResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttenuationMethod {
    Quadrature,
    Narrowband,
    ClosedForm,
}

impl std::fmt::Display for AttenuationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttenuationMethod::Quadrature => write!(f, "quadrature"),
            AttenuationMethod::Narrowband => write!(f, "narrowband"),
            AttenuationMethod::ClosedForm => write!(f, "closed-form"),
        }
    }
}

/// Attenuation factor and its `tau_c` sensitivity at one probing point.
#[derive(Debug, Clone, Copy)]
pub struct ProbeResult {
    /// Attenuation factor `J >= 0`.
    pub j: f64,
    /// `dJ/dtau_c`.
    pub dj_dtau: f64,
    pub method: AttenuationMethod,
    /// Achieved relative error estimate on `j` (0 for exact paths).
    pub abs_error_estimate: f64,
}

/// Default relative tolerance for single library calls.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Relaxed tolerance used inside scan drivers.
pub const SCAN_TOL: f64 = 1e-7;

fn validate_tol(tol: f64) -> Result<()> {
    if tol.is_nan() || tol <= 0.0 || tol > 1e-3 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must lie in (0, 1e-3], got {tol}"
        )));
    }
    Ok(())
}

/// Attenuation factor `J` and `dJ/dtau_c` for a spectrum/filter pair.
///
/// `tol` is a relative tolerance: on `J` directly, and relative to the
/// total variation of the signed integrand for the derivative.
pub fn attenuation(spec: &NoiseSpectrum, filter: &ControlFilter, tol: f64) -> Result<ProbeResult> {
    validate_tol(tol)?;
    let t = filter.duration();
    if t == 0.0 {
        return Ok(ProbeResult {
            j: 0.0,
            dj_dtau: 0.0,
            method: AttenuationMethod::Quadrature,
            abs_error_estimate: 0.0,
        });
    }
    match filter.kind() {
        FilterKind::NarrowbandDelta { .. } => {
            let terms = filter.narrowband_terms().expect("kind checked above");
            let mut j = 0.0;
            let mut dj = 0.0;
            for (omega, weight) in terms {
                j += weight * spec.spectrum_at(omega);
                dj += weight * spec.spectrum_dtau(omega);
            }
            Ok(ProbeResult {
                j,
                dj_dtau: dj,
                method: AttenuationMethod::Narrowband,
                abs_error_estimate: 0.0,
            })
        }
        _ => quadrature_attenuation(spec, filter, tol),
    }
}

fn quadrature_attenuation(
    spec: &NoiseSpectrum,
    filter: &ControlFilter,
    tol: f64,
) -> Result<ProbeResult> {
    let t = filter.duration();
    let n = filter.pulse_count() as f64;
    let tau_c = spec.tau_c();
    let beta = spec.beta();
    let g2a = spec.g() * spec.g() * spec.a_beta();
    // filter envelope F <= 2(N+1)^2 / omega^2
    let cf = 2.0 * (n + 1.0) * (n + 1.0);

    let quad = AdaptiveQuad {
        rel_tol: 0.25 * tol,
        abs_tol: 0.0,
        max_panels: 400_000,
        max_panel_width: Some(PI / (4.0 * t)),
    };

    // base region: covers the spectral knee and the leading filter lobes
    let omega_base = (8.0 * PI * (n + 1.0) / t).max(10.0 / tau_c).max(10.0 / t);

    let f_j = |w: f64| filter.evaluate(w).unwrap_or(0.0) * spec.spectrum_at(w);
    let f_dj = |w: f64| filter.evaluate(w).unwrap_or(0.0) * spec.spectrum_dtau(w);

    let base_j = quad.integrate(f_j, 0.0, omega_base)?;
    let base_dj = quad.integrate(f_dj, 0.0, omega_base)?;

    // analytic tail bounds (two-sided):
    //   |F G|        <= cf g^2 A tau_c^(1-beta) w^-(beta+2)
    //   |F dG/dtau|  <= cf g^2 A beta tau_c^-beta w^-(beta+2)   (w tau_c >= 1)
    let tail_j =
        |w: f64| 2.0 * cf * g2a * tau_c.powf(1.0 - beta) * w.powf(-beta - 1.0) / (beta + 1.0);
    let tail_dj =
        |w: f64| 2.0 * cf * g2a * beta * tau_c.powf(-beta) * w.powf(-beta - 1.0) / (beta + 1.0);

    let scale_j = (2.0 * base_j.res_abs).max(f64::MIN_POSITIVE);
    let scale_dj = (2.0 * base_dj.res_abs).max(f64::MIN_POSITIVE);

    let mut omega_max = omega_base.max(2.0 / tau_c);
    let mut doublings = 0;
    while tail_j(omega_max) > 0.5 * tol * scale_j || tail_dj(omega_max) > 0.5 * tol * scale_dj {
        omega_max *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::QuadratureNoConvergence {
                estimate: 2.0 * base_j.value,
                achieved: tail_j(omega_max),
                requested: tol * scale_j,
            });
        }
    }

    let (ext_j, ext_dj) = if omega_max > omega_base {
        (
            quad.integrate(f_j, omega_base, omega_max)?,
            quad.integrate(f_dj, omega_base, omega_max)?,
        )
    } else {
        (
            crate::quad::QuadOutcome {
                value: 0.0,
                abs_error: 0.0,
                res_abs: 0.0,
                panels: 0,
            },
            crate::quad::QuadOutcome {
                value: 0.0,
                abs_error: 0.0,
                res_abs: 0.0,
                panels: 0,
            },
        )
    };

    let j = 2.0 * (base_j.value + ext_j.value);
    let dj = 2.0 * (base_dj.value + ext_dj.value);
    let err_j = 2.0 * (base_j.abs_error + ext_j.abs_error) + tail_j(omega_max);
    let abs_error_estimate = if j > 0.0 { err_j / j } else { err_j };

    Ok(ProbeResult {
        j: j.max(0.0),
        dj_dtau: dj,
        method: AttenuationMethod::Quadrature,
        abs_error_estimate,
    })
}

fn check_beta2(spec: &NoiseSpectrum) -> Result<()> {
    if spec.beta() != 2.0 {
        return Err(Error::InvalidParameter(format!(
            "closed form is only valid for beta = 2, got {}",
            spec.beta()
        )));
    }
    Ok(())
}

/// Exact free-evolution attenuation for the `beta = 2` spectrum:
/// `J = g^2 tau_c^2 (t/tau_c - 1 + exp(-t/tau_c))`.
pub fn free_decay_closed_form(spec: &NoiseSpectrum, t: f64) -> Result<f64> {
    check_beta2(spec)?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    let s = t / spec.tau_c();
    // s - 1 + e^-s without cancellation at small s
    let phi = if s < 1e-3 {
        s * s / 2.0 * (1.0 - s / 3.0 + s * s / 12.0)
    } else {
        s + (-s).exp_m1()
    };
    Ok(spec.g() * spec.g() * spec.tau_c() * spec.tau_c() * phi)
}

/// `dJ/dtau_c` of the free-evolution closed form:
/// `g^2 tau_c (s - 2 + (2 + s) exp(-s))` with `s = t/tau_c`.
pub fn free_decay_dtau_closed_form(spec: &NoiseSpectrum, t: f64) -> Result<f64> {
    check_beta2(spec)?;
    let s = t / spec.tau_c();
    let phi = if s < 1e-2 {
        s * s * s / 6.0 * (1.0 - s / 2.0 + 3.0 * s * s / 20.0 - s * s * s / 30.0)
    } else {
        s - 2.0 + (2.0 + s) * (-s).exp()
    };
    Ok(spec.g() * spec.g() * spec.tau_c() * phi)
}

/// Closed-form [`ProbeResult`] for free evolution at `beta = 2`.
pub fn free_probe_closed_form(spec: &NoiseSpectrum, t: f64) -> Result<ProbeResult> {
    Ok(ProbeResult {
        j: free_decay_closed_form(spec, t)?,
        dj_dtau: free_decay_dtau_closed_form(spec, t)?,
        method: AttenuationMethod::ClosedForm,
        abs_error_estimate: 0.0,
    })
}

/// Measurement probabilities `p± = (1 ± exp(-J)) / 2`.
pub fn probabilities(j: f64) -> Result<(f64, f64)> {
    if j.is_nan() || j < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "attenuation factor must be >= 0, got {j}"
        )));
    }
    let e = (-j).exp();
    // p_minus via expm1 keeps precision at small J
    Ok((0.5 * (1.0 + e), -0.5 * (-j).exp_m1()))
}
