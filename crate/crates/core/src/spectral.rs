//! Generalized Ornstein-Uhlenbeck spectral density family.
//!
//! The environment noise is described by the coupling spectrum
//! `G(omega) = g^2 * A_beta * tau_c / (1 + |omega|^beta * tau_c^beta)`,
//! a Lorentzian for `beta = 2` and flatter-topped, faster-decaying shapes
//! for larger `beta`. The normalization `A_beta` is fixed so that the total
//! noise power `integral of G over all omega` equals `g^2`.
//!
//! The derivative of `G` with respect to the memory time `tau_c` changes
//! sign at the critical frequency `omega_0 = 1 / (tau_c * (beta-1)^(1/beta))`;
//! everything downstream (vanishing Fisher information, error divergence,
//! branch jumps) traces back to that zero crossing.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Environment noise parameters `[g, tau_c, beta]` with the derived
/// normalization cached.
///
/// `g` is the probe-environment coupling strength (1/time), `tau_c` the
/// correlation/memory time, `beta >= 2` the power-law exponent of the
/// spectral tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpectrum {
    g: f64,
    tau_c: f64,
    beta: f64,
    a_beta: f64,
}

/// Normalization factor `A_beta = beta * sin(pi/beta) / (2*pi)`.
///
/// Chosen so that the spectrum integrates to `g^2` over the whole real
/// line: `A_2 = 1/pi`, `A_4 = sqrt(2)/pi`, and `A_beta -> 1/2` as
/// `beta -> infinity`.
pub fn normalization(beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta < 2.0 {
        return Err(Error::InvalidParameter(format!(
            "beta must be finite and >= 2, got {beta}"
        )));
    }
    Ok(beta * (PI / beta).sin() / (2.0 * PI))
}

impl NoiseSpectrum {
    /// Validates `g > 0`, `tau_c > 0`, `beta >= 2` and caches `A_beta`.
    pub fn new(g: f64, tau_c: f64, beta: f64) -> Result<Self> {
        if !g.is_finite() || g <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "coupling g must be finite and > 0, got {g}"
            )));
        }
        if !tau_c.is_finite() || tau_c <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "memory time tau_c must be finite and > 0, got {tau_c}"
            )));
        }
        let a_beta = normalization(beta)?;
        Ok(Self {
            g,
            tau_c,
            beta,
            a_beta,
        })
    }

    /// Same parameters with the memory time replaced; used by estimators
    /// that scan over candidate `tau_c` values.
    pub fn with_tau_c(&self, tau_c: f64) -> Result<Self> {
        Self::new(self.g, tau_c, self.beta)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn a_beta(&self) -> f64 {
        self.a_beta
    }

    /// Spectral density `G(omega)`, even in `omega` and strictly positive.
    pub fn spectrum_at(&self, omega: f64) -> f64 {
        let u = (omega.abs() * self.tau_c).powf(self.beta);
        self.g * self.g * self.a_beta * self.tau_c / (1.0 + u)
    }

    /// Derivative of the spectral density with respect to `tau_c`.
    ///
    /// Closed form `g^2 * A_beta * (1 + (1-beta)*u) / (1+u)^2` with
    /// `u = |omega|^beta * tau_c^beta`. Positive below the critical
    /// frequency, zero at it, negative above.
    pub fn spectrum_dtau(&self, omega: f64) -> f64 {
        let u = (omega.abs() * self.tau_c).powf(self.beta);
        let denom = 1.0 + u;
        self.g * self.g * self.a_beta * (1.0 + (1.0 - self.beta) * u) / (denom * denom)
    }

    /// Critical frequency `omega_0 = 1 / (tau_c * (beta-1)^(1/beta))`
    /// where `spectrum_dtau` crosses zero.
    pub fn critical_frequency(&self) -> f64 {
        (self.tau_c * (self.beta - 1.0).powf(1.0 / self.beta)).recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::AdaptiveQuad;
    use proptest::prelude::*;

    fn spec(g: f64, tau_c: f64, beta: f64) -> NoiseSpectrum {
        NoiseSpectrum::new(g, tau_c, beta).unwrap()
    }

    /// Quadrature oracle for the total noise power: integrates G over
    /// (-inf, inf) by doubling [0, Omega] and bounding the analytic tail.
    fn total_power(s: &NoiseSpectrum) -> f64 {
        let quad = AdaptiveQuad::new(1e-10, 0.0);
        let mut omega_max = 50.0 / s.tau_c();
        // tail of G is g^2 A tau_c^(1-beta) w^-beta; integrated bound below 1e-12 of g^2
        loop {
            let tail = s.g()
                * s.g()
                * s.a_beta()
                * s.tau_c().powf(1.0 - s.beta())
                * omega_max.powf(1.0 - s.beta())
                / (s.beta() - 1.0);
            if tail < 1e-12 * s.g() * s.g() {
                break;
            }
            omega_max *= 2.0;
        }
        let out = quad
            .integrate(|w| s.spectrum_at(w), 0.0, omega_max)
            .unwrap();
        2.0 * out.value
    }

    #[test]
    fn normalization_matches_power_integral() {
        // derived: A_beta is whatever makes the full integral equal g^2
        for &beta in &[2.0, 3.0, 4.0, 6.0] {
            for &g in &[0.5, 1.0, 2.0] {
                for &tau_c in &[0.1, 1.0, 10.0] {
                    let s = spec(g, tau_c, beta);
                    let power = total_power(&s);
                    let rel = (power - g * g).abs() / (g * g);
                    assert!(
                        rel < 1e-6,
                        "beta={beta} g={g} tau_c={tau_c}: power={power}, rel err {rel}"
                    );
                }
            }
        }
    }

    #[test]
    fn normalization_known_values() {
        assert!((normalization(2.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((normalization(4.0).unwrap() - 2.0_f64.sqrt() / PI).abs() < 1e-15);
        // limiting behavior: sin(pi/beta) ~ pi/beta, so A_beta -> 1/2
        assert!((normalization(1e8).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn normalization_rejects_small_beta() {
        assert!(normalization(1.5).is_err());
        assert!(normalization(f64::NAN).is_err());
        assert!(NoiseSpectrum::new(1.0, 1.0, 1.99).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(NoiseSpectrum::new(0.0, 1.0, 2.0).is_err());
        assert!(NoiseSpectrum::new(-1.0, 1.0, 2.0).is_err());
        assert!(NoiseSpectrum::new(1.0, 0.0, 2.0).is_err());
        assert!(NoiseSpectrum::new(1.0, f64::INFINITY, 2.0).is_err());
    }

    #[test]
    fn spectrum_point_values() {
        let s = spec(1.0, 1.0, 2.0);
        assert!((s.spectrum_at(0.0) - 1.0 / PI).abs() < 1e-15);
        assert!((s.spectrum_at(1.0) - 0.5 / PI).abs() < 1e-15);
        // tail law g^2 A w^-beta tau_c^-(beta-1)
        let tail = s.a_beta() * 100.0_f64.powi(-2);
        let rel = (s.spectrum_at(100.0) - tail).abs() / tail;
        assert!(rel < 1e-4, "tail law off by {rel}");
    }

    #[test]
    fn a_beta_recomputation_is_bit_identical() {
        let a = spec(0.7, 3.0, 3.5).a_beta();
        let b = spec(2.0, 0.2, 3.5).a_beta();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn dtau_point_values() {
        let s = spec(1.0, 1.0, 2.0);
        // G is linear in tau_c at omega=0
        assert!((s.spectrum_dtau(0.0) - s.a_beta()).abs() < 1e-15);
        // exact zero at omega_0 = 1 for beta=2, tau_c=1
        assert_eq!(s.spectrum_dtau(1.0), 0.0);
    }

    #[test]
    fn dtau_matches_finite_difference() {
        for &beta in &[2.0, 3.0, 4.0, 6.0] {
            for &tau_c in &[0.3, 1.0, 4.0] {
                let s = spec(1.3, tau_c, beta);
                let h = 1e-6 * tau_c;
                let omega0 = s.critical_frequency();
                for &w in &[
                    0.0,
                    0.1 / tau_c,
                    0.5 * omega0,
                    omega0 * (1.0 - 1e-3),
                    omega0 * (1.0 + 1e-3),
                    2.0 * omega0,
                    10.0 / tau_c,
                ] {
                    let hi = s.with_tau_c(tau_c + h).unwrap().spectrum_at(w);
                    let lo = s.with_tau_c(tau_c - h).unwrap().spectrum_at(w);
                    let fd = (hi - lo) / (2.0 * h);
                    let an = s.spectrum_dtau(w);
                    if an.abs() > 1e-12 {
                        let rel = (fd - an).abs() / an.abs();
                        assert!(
                            rel < 1e-6,
                            "beta={beta} tau_c={tau_c} w={w}: analytic {an} vs fd {fd}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn critical_frequency_values() {
        assert!((spec(1.0, 1.0, 2.0).critical_frequency() - 1.0).abs() < 1e-15);
        assert!((spec(1.0, 2.0, 2.0).critical_frequency() - 0.5).abs() < 1e-15);
        let w0 = spec(1.0, 1.0, 4.0).critical_frequency();
        assert!((w0 - 3.0_f64.powf(-0.25)).abs() < 1e-15);
        // derivative vanishes there to machine precision
        for &beta in &[2.0, 3.0, 4.0, 6.0] {
            let s = spec(1.0, 1.7, beta);
            assert!(s.spectrum_dtau(s.critical_frequency()).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn sign_pattern(
            g in 0.2f64..4.0,
            tau_c in 0.05f64..20.0,
            beta in 2.0f64..8.0,
            w_rel in 0.01f64..100.0,
        ) {
            let s = spec(g, tau_c, beta);
            let omega0 = s.critical_frequency();
            let w = w_rel * omega0;
            let d = s.spectrum_dtau(w);
            if (w_rel - 1.0).abs() > 1e-9 {
                prop_assert_eq!(d > 0.0, w < omega0);
                prop_assert_eq!(d < 0.0, w > omega0);
            }
            // evenness and positivity
            prop_assert_eq!(s.spectrum_at(w).to_bits(), s.spectrum_at(-w).to_bits());
            prop_assert!(s.spectrum_at(w) > 0.0);
        }

        #[test]
        fn scale_covariance(
            tau_c in 0.1f64..10.0,
            w in 0.0f64..50.0,
            lambda in prop::sample::select(vec![0.5f64, 2.0]),
        ) {
            let s = spec(1.0, tau_c, 2.0);
            let scaled = spec(1.0, lambda * tau_c, 2.0);
            let lhs = scaled.spectrum_at(w / lambda);
            let rhs = lambda * s.spectrum_at(w);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
        }
    }
}
