//! Control-dependent filter functions.
//!
//! A dephasing probe under piecewise control samples the environment
//! spectrum through `F_t(omega) = |f~(omega)|^2 / 2`, where `f~` is the
//! finite-time Fourier transform of the modulation function `f(t') = ±1`
//! that flips sign at every pi pulse. Free evolution (no pulses) gives the
//! sinc filter `(t^2/2) sinc^2(omega t / 2)`; an N-pulse CPMG train
//! concentrates the filter at odd harmonics of `omega_ctrl = pi N / t`,
//! and the idealized narrowband (delta) limit replaces the filter by
//! weighted spikes at those harmonics.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Below this value of |omega * t| the closed-form `1/omega` expression for
/// the sequence filter loses digits to cancellation and the piecewise
/// Taylor fallback is used instead.
const SERIES_THRESHOLD: f64 = 1e-6;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // series to machine precision for small arguments
        1.0 - x * x / 6.0 * (1.0 - x * x / 20.0)
    } else {
        x.sin() / x
    }
}

/// Free-evolution filter `(t^2 / 2) * sinc^2(omega t / 2)`.
pub fn free_filter(t: f64, omega: f64) -> f64 {
    let s = sinc(0.5 * omega * t);
    0.5 * t * t * s * s
}

fn validate_pulse_times(pulse_times: &[f64], t: f64) -> Result<()> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "duration must be finite and > 0, got {t}"
        )));
    }
    let mut prev = 0.0;
    for (i, &tp) in pulse_times.iter().enumerate() {
        if !tp.is_finite() || tp <= prev || tp >= t {
            return Err(Error::InvalidParameter(format!(
                "pulse times must be strictly increasing inside (0, {t}); offender #{i} = {tp}"
            )));
        }
        prev = tp;
    }
    Ok(())
}

/// Filter of an arbitrary pi-pulse sequence, `|f~(omega)|^2 / 2`.
///
/// Validates the pulse times; `sequence_filter_unchecked` is the hot-loop
/// variant used once a `ControlFilter` has been constructed.
pub fn sequence_filter(pulse_times: &[f64], t: f64, omega: f64) -> Result<f64> {
    validate_pulse_times(pulse_times, t)?;
    Ok(sequence_filter_unchecked(pulse_times, t, omega))
}

pub(crate) fn sequence_filter_unchecked(pulse_times: &[f64], t: f64, omega: f64) -> f64 {
    if (omega * t).abs() < SERIES_THRESHOLD {
        sequence_filter_series(pulse_times, t, omega)
    } else {
        sequence_filter_closed(pulse_times, t, omega)
    }
}

/// Closed form obtained by telescoping the piecewise integral of
/// `f(t') e^{i omega t'}`:
/// `f~ = [(-1)^N e^{i w t} - 1 + 2 sum_m (-1)^{m-1} e^{i w t_m}] / (i w)`.
pub(crate) fn sequence_filter_closed(pulse_times: &[f64], t: f64, omega: f64) -> f64 {
    let n = pulse_times.len();
    let end_sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let (s, c) = (omega * t).sin_cos();
    let mut re = end_sign * c - 1.0;
    let mut im = end_sign * s;
    let mut sign = 2.0;
    for &tp in pulse_times {
        let (sp, cp) = (omega * tp).sin_cos();
        re += sign * cp;
        im += sign * sp;
        sign = -sign;
    }
    (re * re + im * im) / (2.0 * omega * omega)
}

/// Small-omega fallback: per-segment Taylor expansion of `e^{i omega t'}`
/// through second order, so no division by omega appears.
pub(crate) fn sequence_filter_series(pulse_times: &[f64], t: f64, omega: f64) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    let mut a = 0.0;
    let mut sign = 1.0;
    let w2 = omega * omega;
    for b in pulse_times.iter().copied().chain(std::iter::once(t)) {
        re += sign * ((b - a) - w2 * (b * b * b - a * a * a) / 6.0);
        im += sign * omega * (b * b - a * a) * 0.5;
        a = b;
        sign = -sign;
    }
    0.5 * (re * re + im * im)
}

/// CPMG pulse times `t_j = (j - 1/2) t / n` for `j = 1..n`.
pub fn cpmg_times(n_pulses: u32, t: f64) -> Vec<f64> {
    (1..=n_pulses)
        .map(|j| (j as f64 - 0.5) * t / n_pulses as f64)
        .collect()
}

/// Odd-harmonic frequencies and weights of the narrowband (delta) filter:
/// `(k pi N / t, 8 t / (pi k^2))` for `k = 1, 3, ..., 2K-1`.
///
/// These are the Fourier components of the ±1 square-wave modulation with
/// period `2t/N`; the attenuation factor is approximated by
/// `J ≈ sum_k w_k G(k omega_ctrl)`. `K = 1` is the single-component
/// continuous-wave model.
pub fn narrowband_attenuation_terms(n_pulses: u32, harmonics: u32, t: f64) -> Vec<(f64, f64)> {
    let omega_ctrl = PI * n_pulses as f64 / t;
    (0..harmonics)
        .map(|j| {
            let k = (2 * j + 1) as f64;
            (k * omega_ctrl, 8.0 * t / (PI * k * k))
        })
        .collect()
}

/// The control protocol applied to the probe for a duration `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterKind {
    /// No pulses; the sinc filter centered at omega = 0.
    Free,
    /// Arbitrary strictly increasing pi-pulse times inside (0, t).
    PulseSequence { pulse_times: Vec<f64> },
    /// Idealized delta filter at odd harmonics of `pi N / t`.
    NarrowbandDelta { n_pulses: u32, harmonics: u32 },
}

/// A control protocol together with its duration.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlFilter {
    kind: FilterKind,
    duration: f64,
}

impl ControlFilter {
    pub fn free(t: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "duration must be finite and >= 0, got {t}"
            )));
        }
        Ok(Self {
            kind: FilterKind::Free,
            duration: t,
        })
    }

    pub fn pulse_sequence(pulse_times: Vec<f64>, t: f64) -> Result<Self> {
        validate_pulse_times(&pulse_times, t)?;
        Ok(Self {
            kind: FilterKind::PulseSequence { pulse_times },
            duration: t,
        })
    }

    /// Symmetric CPMG: first pulse at `t/(2N)`, last at `t - t/(2N)`.
    pub fn cpmg(n_pulses: u32, t: f64) -> Result<Self> {
        if n_pulses == 0 {
            return Err(Error::InvalidParameter(
                "CPMG needs at least one pulse".into(),
            ));
        }
        Self::pulse_sequence(cpmg_times(n_pulses, t), t)
    }

    /// Hahn echo, i.e. CPMG with a single pulse.
    pub fn hahn(t: f64) -> Result<Self> {
        Self::cpmg(1, t)
    }

    pub fn narrowband(n_pulses: u32, harmonics: u32, t: f64) -> Result<Self> {
        if n_pulses == 0 || harmonics == 0 {
            return Err(Error::InvalidParameter(
                "narrowband filter needs n_pulses >= 1 and harmonics >= 1".into(),
            ));
        }
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "duration must be finite and > 0, got {t}"
            )));
        }
        Ok(Self {
            kind: FilterKind::NarrowbandDelta {
                n_pulses,
                harmonics,
            },
            duration: t,
        })
    }

    pub fn kind(&self) -> &FilterKind {
        &self.kind
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Number of pi pulses in the protocol (0 for free evolution).
    pub fn pulse_count(&self) -> u32 {
        match &self.kind {
            FilterKind::Free => 0,
            FilterKind::PulseSequence { pulse_times } => pulse_times.len() as u32,
            FilterKind::NarrowbandDelta { n_pulses, .. } => *n_pulses,
        }
    }

    /// Control frequency `pi N / t`; `None` for free evolution.
    pub fn omega_ctrl(&self) -> Option<f64> {
        let n = self.pulse_count();
        if n == 0 {
            None
        } else {
            Some(PI * n as f64 / self.duration)
        }
    }

    /// Pointwise filter value `F_t(omega)`.
    ///
    /// Errors for narrowband filters, which are measures rather than
    /// densities; use [`ControlFilter::narrowband_terms`] for those.
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        match &self.kind {
            FilterKind::Free => Ok(free_filter(self.duration, omega)),
            FilterKind::PulseSequence { pulse_times } => {
                Ok(sequence_filter_unchecked(pulse_times, self.duration, omega))
            }
            FilterKind::NarrowbandDelta { .. } => Err(Error::InvalidParameter(
                "narrowband delta filter has no pointwise density".into(),
            )),
        }
    }

    /// `(frequency, weight)` spikes of a narrowband filter; `None` for the
    /// other kinds.
    pub fn narrowband_terms(&self) -> Option<Vec<(f64, f64)>> {
        match &self.kind {
            FilterKind::NarrowbandDelta {
                n_pulses,
                harmonics,
            } => Some(narrowband_attenuation_terms(
                *n_pulses,
                *harmonics,
                self.duration,
            )),
            _ => None,
        }
    }

    /// Same protocol rescaled to a new duration (pulse sequences keep their
    /// relative timing pattern).
    pub fn with_duration(&self, t: f64) -> Result<Self> {
        match &self.kind {
            FilterKind::Free => Self::free(t),
            FilterKind::PulseSequence { pulse_times } => {
                let scale = t / self.duration;
                Self::pulse_sequence(pulse_times.iter().map(|x| x * scale).collect(), t)
            }
            FilterKind::NarrowbandDelta {
                n_pulses,
                harmonics,
            } => Self::narrowband(*n_pulses, *harmonics, t),
        }
    }
}
