//! Independent reference computations for the integration suites.

#![allow(dead_code)]

use mixamc::constellation::{Constellation, Scheme};
use num_complex::Complex;

/// `ln ∏_n (1/M) Σ_ℓ exp(-|r(n) - s_ℓ|²/σ²)/(πσ²)` evaluated in the linear
/// domain. Underflows to `-inf` for long or well-separated inputs.
pub fn linear_domain_log_likelihood(r: &[Complex<f64>], points: &[Complex<f64>], sigma2: f64) -> f64 {
    let norm = 1.0 / (std::f64::consts::PI * sigma2 * points.len() as f64);
    r.iter()
        .map(|x| points.iter().map(|s| (-(x - s).norm_sqr() / sigma2).exp()).sum::<f64>() * norm)
        .product::<f64>()
        .ln()
}

/// Superposition point set built directly from `E_s = k/(k+1)`.
pub fn mixed_points(strong: Scheme, weak: Scheme, k: f64) -> Vec<Complex<f64>> {
    let es = k / (k + 1.0);
    let ew = 1.0 / (k + 1.0);
    let mut out = Vec::new();
    for p in Constellation::<f64>::new(strong).points() {
        for q in Constellation::<f64>::new(weak).points() {
            out.push(p * es.sqrt() + q * ew.sqrt());
        }
    }
    out
}

/// Measured SNR in dB from a clean and a noisy sequence.
pub fn empirical_snr_db(clean: &[Complex<f64>], noisy: &[Complex<f64>]) -> f64 {
    let signal: f64 = clean.iter().map(|s| s.norm_sqr()).sum();
    let noise: f64 = clean.iter().zip(noisy).map(|(s, r)| (r - s).norm_sqr()).sum();
    10.0 * (signal / noise).log10()
}
