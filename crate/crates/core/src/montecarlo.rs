//! Finite-shot validation of the Cramér-Rao machinery.
//!
//! Simulates binomial measurement records from the probe probabilities,
//! recovers `tau_c` by maximum likelihood, and compares the estimator
//! spread against the `1/sqrt(M F_Q)` prediction.
//!
//! Randomness comes from ChaCha8 seeded with a caller-supplied 64-bit seed;
//! independent trials use ChaCha streams derived from the trial index, so
//! results are bit-reproducible and independent of how trials are scheduled
//! across threads. Binomial sampling uses the inverse CDF up to 1e5 shots
//! and the rounded normal approximation above.

use crate::attenuation::{attenuation, probabilities, SCAN_TOL};
use crate::error::{Error, Result};
use crate::estimation::qfi_from_parts;
use crate::filters::ControlFilter;
use crate::search::golden_section_minimize;
use crate::spectral::NoiseSpectrum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};

/// Probing configuration: spectrum parameters assumed known except
/// `tau_c`, plus the applied control filter (which carries the duration).
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub g: f64,
    pub beta: f64,
    pub filter: ControlFilter,
}

impl Protocol {
    pub fn new(g: f64, beta: f64, filter: ControlFilter) -> Self {
        Self { g, beta, filter }
    }

    /// Probability of the `+` outcome if the memory time were `tau_c`.
    pub fn p_plus(&self, tau_c: f64, tol: f64) -> Result<f64> {
        let spec = NoiseSpectrum::new(self.g, tau_c, self.beta)?;
        let probe = attenuation(&spec, &self.filter, tol)?;
        Ok(probabilities(probe.j)?.0)
    }

    /// Fisher information about `tau_c` at the true value.
    pub fn qfi(&self, tau_c: f64, tol: f64) -> Result<f64> {
        let spec = NoiseSpectrum::new(self.g, tau_c, self.beta)?;
        let probe = attenuation(&spec, &self.filter, tol)?;
        Ok(qfi_from_parts(probe.j, probe.dj_dtau))
    }
}

/// Shot counts of `±` outcomes at one probing configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub shots: u64,
    pub plus_count: u64,
    pub protocol: Protocol,
    pub seed: u64,
}

/// Threshold between exact inverse-CDF sampling and the normal
/// approximation.
const INVERSE_CDF_MAX_SHOTS: u64 = 100_000;

fn sample_binomial(rng: &mut ChaCha8Rng, shots: u64, p: f64) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return shots;
    }
    if shots <= INVERSE_CDF_MAX_SHOTS {
        let u: f64 = rng.gen();
        Binomial::new(p, shots)
            .expect("p validated above")
            .inverse_cdf(u)
    } else {
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let u: f64 = rng.gen();
        let z = normal.inverse_cdf(u.clamp(f64::MIN_POSITIVE, 1.0 - 1e-16));
        let mean = shots as f64 * p;
        let sd = (shots as f64 * p * (1.0 - p)).sqrt();
        (mean + z * sd).round().clamp(0.0, shots as f64) as u64
    }
}

/// Draws a measurement record at the true memory time.
///
/// Identical `(protocol, true_tau_c, shots, seed)` give identical records.
pub fn simulate(
    protocol: &Protocol,
    true_tau_c: f64,
    shots: u64,
    seed: u64,
) -> Result<MeasurementRecord> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be >= 1".into()));
    }
    let p = protocol.p_plus(true_tau_c, SCAN_TOL)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plus_count = sample_binomial(&mut rng, shots, p);
    Ok(MeasurementRecord {
        shots,
        plus_count,
        protocol: protocol.clone(),
        seed,
    })
}

/// Maximum-likelihood estimate of `tau_c`, with a flag raised when the
/// estimate ran into the search boundary (saturated records do that).
#[derive(Debug, Clone, Copy)]
pub struct MleEstimate {
    pub tau_c: f64,
    pub at_boundary: bool,
}

/// Candidate grid size for the likelihood scan.
const MLE_GRID: usize = 256;

fn log_likelihood(p_plus: f64, p_minus: f64, plus: u64, minus: u64) -> f64 {
    let mut ll = 0.0;
    if plus > 0 {
        ll += plus as f64 * p_plus.max(1e-300).ln();
    }
    if minus > 0 {
        ll += minus as f64 * p_minus.max(1e-300).ln();
    }
    ll
}

/// Maximizes the binomial log-likelihood of the record over `tau_c` in
/// `search_range`.
///
/// The probability map `p_plus(tau_c)` is generally non-monotone under
/// controlled probing, so every local maximum of the likelihood on a
/// log-spaced grid is refined by golden section and the best refined value
/// wins; near-exact ties resolve to the smaller `tau_c`.
pub fn mle_tau(record: &MeasurementRecord, search_range: (f64, f64)) -> Result<MleEstimate> {
    let (lo, hi) = search_range;
    if lo.is_nan() || hi.is_nan() || lo <= 0.0 || hi <= lo {
        return Err(Error::InvalidParameter(format!(
            "invalid search range [{lo}, {hi}]"
        )));
    }
    if record.plus_count > record.shots {
        return Err(Error::DegenerateRecord(format!(
            "plus_count {} exceeds shots {}",
            record.plus_count, record.shots
        )));
    }
    let plus = record.plus_count;
    let minus = record.shots - record.plus_count;

    // J(tau_c) for the protocol, cached on the grid below
    let spec0 = NoiseSpectrum::new(record.protocol.g, 1.0, record.protocol.beta)?;
    let j_of = |tau: f64| -> f64 {
        let spec = spec0.with_tau_c(tau).expect("tau > 0 inside range");
        attenuation(&spec, &record.protocol.filter, SCAN_TOL)
            .map(|p| p.j)
            .unwrap_or(f64::INFINITY)
    };
    let ll_of = |tau: f64| -> f64 {
        let j = j_of(tau);
        if !j.is_finite() {
            return f64::NEG_INFINITY;
        }
        let (pp, pm) = probabilities(j).expect("j >= 0 from attenuation");
        log_likelihood(pp, pm, plus, minus)
    };

    let log_lo = lo.ln();
    let log_hi = hi.ln();
    let taus: Vec<f64> = (0..MLE_GRID)
        .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / (MLE_GRID - 1) as f64).exp())
        .collect();
    let lls: Vec<f64> = taus.iter().map(|&t| ll_of(t)).collect();

    let mut best_tau = taus[0];
    let mut best_ll = lls[0];
    for i in 0..MLE_GRID {
        let here = lls[i];
        let left_ok = i == 0 || here >= lls[i - 1];
        let right_ok = i == MLE_GRID - 1 || here >= lls[i + 1];
        if !(left_ok && right_ok) || here == f64::NEG_INFINITY {
            continue;
        }
        let bracket_lo = taus[i.saturating_sub(1)].ln();
        let bracket_hi = taus[(i + 1).min(MLE_GRID - 1)].ln();
        let (u, neg) =
            golden_section_minimize(|u: f64| -ll_of(u.exp()), bracket_lo, bracket_hi, 1e-12, 200);
        let (tau, ll) = (u.exp(), -neg);
        if ll > best_ll + 1e-12 || (ll >= best_ll - 1e-12 && tau < best_tau) {
            best_ll = ll;
            best_tau = tau;
        }
    }

    let width = hi - lo;
    let at_boundary = best_tau <= lo + 1e-9 * width || best_tau >= hi - 1e-9 * width;
    Ok(MleEstimate {
        tau_c: best_tau,
        at_boundary,
    })
}

/// Outcome of a repeated simulate-and-estimate experiment.
#[derive(Debug, Clone, Copy)]
pub struct CrbCheck {
    /// Sample standard deviation of the estimates divided by the true
    /// `tau_c` (spread about the sample mean; bias is reported separately).
    pub empirical_rel_std: f64,
    /// Cramér-Rao prediction `1 / (tau_c sqrt(shots * F_Q))`.
    pub predicted_rel_err: f64,
    /// Mean of the estimates over trials.
    pub mean_estimate: f64,
    /// `(mean - true) / true`.
    pub relative_bias: f64,
}

/// Runs `n_trials` independent simulate + MLE rounds.
///
/// Each trial draws from its own ChaCha stream `(seed, trial index)`; the
/// search range is `[true_tau_c / 3, 3 * true_tau_c]`.
pub fn crb_check(
    protocol: &Protocol,
    true_tau_c: f64,
    shots: u64,
    n_trials: usize,
    seed: u64,
) -> Result<CrbCheck> {
    if n_trials < 100 {
        return Err(Error::InvalidParameter(format!(
            "n_trials must be >= 100, got {n_trials}"
        )));
    }
    let p = protocol.p_plus(true_tau_c, SCAN_TOL)?;
    let range = (true_tau_c / 3.0, 3.0 * true_tau_c);

    let estimates: Vec<f64> = (0..n_trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64 + 1);
            let plus_count = sample_binomial(&mut rng, shots, p);
            let record = MeasurementRecord {
                shots,
                plus_count,
                protocol: protocol.clone(),
                seed,
            };
            Ok(mle_tau(&record, range)?.tau_c)
        })
        .collect::<Result<_>>()?;

    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let var = estimates
        .iter()
        .map(|e| (e - mean) * (e - mean))
        .sum::<f64>()
        / (n - 1.0);
    let qfi = protocol.qfi(true_tau_c, SCAN_TOL)?;
    let predicted = if qfi > 0.0 {
        (true_tau_c * (shots as f64 * qfi).sqrt()).recip()
    } else {
        f64::INFINITY
    };
    Ok(CrbCheck {
        empirical_rel_std: var.sqrt() / true_tau_c,
        predicted_rel_err: predicted,
        mean_estimate: mean,
        relative_bias: (mean - true_tau_c) / true_tau_c,
    })
}
