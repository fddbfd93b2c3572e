//! Lifshitz pressure between two layered mirrors across a liquid.
//!
//! Positive pressures push the mirrors apart (repulsion), negative pull them
//! together. The Lifshitz expression `-kT/π Σ' ∫ k K dk Σ_α rr e^{-2Kd}/(1 - rr e^{-2Kd})`
//! is already in that convention: opposite-sign amplitudes give `P > 0`.
//!
//! The wavevector integral is taken in `y = 2Kd`, for which `k K dk = y² dy / (8 d³)`,
//! from the light-cone edge `y₀ = 2 ξ √ε_liq d / c` to `y₀ + Y_CUT`.

use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT, ZETA_3};
use crate::electrolyte::ScreeningState;
use crate::error::{domain, Error, Result};
use crate::layers::{screened_product, LayerStack, Polarization};
use crate::quadrature::integrate;
use crate::scalar::{lit, Real};
use rayon::prelude::*;

/// Width of the integration window above `y₀`; `y² e^{-y}` is below 1e-16 of its peak there.
const Y_CUT: f64 = 50.0;
/// Matsubara terms evaluated per parallel batch.
const BATCH: usize = 16;
/// Consecutive negligible terms required before truncating the sum.
const QUIET_TERMS: usize = 3;

/// Numerical controls for [`casimir_pressure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings<R> {
    /// Target relative accuracy of the total pressure, in `(0, 1e-3]`.
    pub tolerance: R,
    /// Highest Matsubara index that may be summed.
    pub max_matsubara: usize,
    /// Upper bound on Gauss-Kronrod segments per wavevector integral.
    pub max_segments: usize,
    /// Segments the integration window is split into before adapting.
    pub initial_segments: usize,
    /// A term is negligible when `|term| < truncation_threshold · |running sum|`.
    pub truncation_threshold: R,
}

impl<R: Real> Default for QuadratureSettings<R> {
    fn default() -> Self {
        Self {
            tolerance: lit(1e-6),
            max_matsubara: 5000,
            max_segments: 200,
            initial_segments: 2,
            truncation_threshold: lit(1e-9),
        }
    }
}

impl<R: Real> QuadratureSettings<R> {
    pub fn with_tolerance(tolerance: R) -> Self {
        let mut s = Self::default();
        s.set_tolerance(tolerance);
        s
    }

    /// Changes the accuracy target and the Matsubara truncation that goes with it.
    pub fn set_tolerance(&mut self, tolerance: R) {
        self.tolerance = tolerance;
        self.truncation_threshold = (tolerance * lit(1e-3)).min(lit(1e-9));
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > R::zero() && self.tolerance <= lit(1e-3)) {
            return Err(domain(format!("tolerance must lie in (0, 1e-3], got {}", self.tolerance)));
        }
        if self.max_matsubara == 0 || self.max_segments == 0 || self.initial_segments == 0 {
            return Err(domain("quadrature budgets must be positive"));
        }
        if !(self.truncation_threshold > R::zero()) {
            return Err(domain("truncation threshold must be > 0"));
        }
        Ok(())
    }

    /// Relative accuracy requested from each wavevector integral.
    ///
    /// Floored at 512 ε: evaluating the reflection amplitudes alone costs a few
    /// hundred ulps, which matters in single precision.
    fn integral_tolerance(&self) -> R {
        (self.tolerance * lit(1e-3)).max(lit(1e-13)).max(R::epsilon() * lit(512.0))
    }
}

/// Everything needed to evaluate the pressure at one separation.
#[derive(Debug, Clone)]
pub struct CasimirJob<R> {
    pub top: LayerStack<R>,
    pub bottom: LayerStack<R>,
    /// Gap width, m.
    pub separation: R,
    /// Kelvin.
    pub temperature: R,
    pub screening: ScreeningState<R>,
    pub numerics: QuadratureSettings<R>,
}

impl<R: Real> CasimirJob<R> {
    pub fn new(
        top: LayerStack<R>,
        bottom: LayerStack<R>,
        separation: R,
        temperature: R,
        screening: ScreeningState<R>,
    ) -> Result<Self> {
        let job = Self {
            top,
            bottom,
            separation,
            temperature,
            screening,
            numerics: QuadratureSettings::default(),
        };
        job.validate()?;
        Ok(job)
    }

    /// Name of the intervening liquid.
    pub fn liquid(&self) -> &str {
        &self.top.ambient().name
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separation > R::zero()) || !self.separation.is_finite() {
            return Err(domain(format!("separation must be > 0, got {}", self.separation)));
        }
        if !(self.temperature > R::zero()) {
            return Err(domain(format!("temperature must be > 0 K, got {}", self.temperature)));
        }
        if self.top.ambient().name != self.bottom.ambient().name {
            return Err(Error::InvalidStack(format!(
                "mirrors face different liquids ({} vs {})",
                self.top.ambient().name,
                self.bottom.ambient().name
            )));
        }
        let dt = (self.screening.temperature() - self.temperature).abs();
        if dt > self.temperature * lit(1e-9) {
            return Err(domain(format!(
                "screening state at {} K does not match job temperature {} K",
                self.screening.temperature(),
                self.temperature
            )));
        }
        self.numerics.validate()
    }

    pub fn with_separation(&self, separation: R) -> Self {
        Self {
            separation,
            ..self.clone()
        }
    }
}

/// Thermal and quantum contributions at one separation (Pa, repulsion > 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureDecomposition<R> {
    /// Screened zero-frequency term.
    pub p_n0: R,
    /// Sum over Matsubara indices n ≥ 1.
    pub p_quantum: R,
    /// `p_n0 + p_quantum`.
    pub p_total: R,
    /// Highest Matsubara index included.
    pub n_terms_used: usize,
    pub estimated_error: R,
}

/// `ξ_n = 2π k_B T n / ħ`, rad/s.
pub fn matsubara_frequency<R: Real>(n: usize, temperature: R) -> R {
    lit::<R>(2.0 * std::f64::consts::PI * BOLTZMANN / HBAR) * temperature * lit(n as f64)
}

/// Value and absolute error of one contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermEstimate<R> {
    pub value: R,
    pub abs_error: R,
}

/// Contribution of Matsubara index `n ≥ 1` (both polarizations), Pa.
pub fn pressure_term<R: Real>(job: &CasimirJob<R>, n: usize) -> Result<R> {
    job.validate()?;
    term_estimate(job, n).map(|t| t.value)
}

fn term_estimate<R: Real>(job: &CasimirJob<R>, n: usize) -> Result<TermEstimate<R>> {
    if n == 0 {
        return Err(domain("pressure_term needs n >= 1; use pressure_n0_screened for n = 0"));
    }
    let xi = matsubara_frequency(n, job.temperature);
    let top = job.top.at_frequency(xi)?;
    let bottom = job.bottom.at_frequency(xi)?;
    let eps_liq = top.eps[0];
    let d = job.separation;
    let q = xi / lit(SPEED_OF_LIGHT);
    let y0 = lit::<R>(2.0) * d * q * eps_liq.sqrt();
    let head = (-y0).exp();
    if head == R::zero() {
        return Ok(TermEstimate {
            value: R::zero(),
            abs_error: R::zero(),
        });
    }
    let two_d = lit::<R>(2.0) * d;
    let mut failure = None;
    let integrand = |t: R| -> R {
        let y = y0 + t;
        let big_k = y / two_d;
        // k_par² = K² - ε_liq q², written as a product to keep precision near the light cone
        let k2 = ((big_k - q * eps_liq.sqrt()) * (big_k + q * eps_liq.sqrt())).max(R::zero());
        let k_par = k2.sqrt();
        let decay = (-y).exp();
        let mut acc = R::zero();
        for pol in Polarization::BOTH {
            let rr = match (top.reflection(k_par, pol), bottom.reflection(k_par, pol)) {
                (Ok(a), Ok(b)) => a * b,
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    R::zero()
                }
            };
            debug_assert!(rr.abs() < R::one());
            acc += rr * (-t).exp() / (R::one() - rr * decay);
        }
        y * y * acc
    };
    let s = &job.numerics;
    let quad = integrate(
        integrand,
        R::zero(),
        lit(Y_CUT),
        s.integral_tolerance(),
        R::min_positive_value(),
        s.initial_segments,
        s.max_segments,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let prefactor = -lit::<R>(BOLTZMANN) * job.temperature / R::PI() / (lit::<R>(8.0) * d * d * d) * head;
    let value = prefactor * quad.value;
    if !quad.converged {
        return Err(Error::NonConvergence {
            what: format!("wavevector integral for n = {n}"),
            partial: value.as_f64(),
            detail: format!("error estimate {:e} after {} evaluations", (prefactor * quad.abs_error).abs().as_f64(), quad.evaluations),
        });
    }
    Ok(TermEstimate {
        value,
        abs_error: (prefactor * quad.abs_error).abs(),
    })
}

/// Screened static integral `-(kT/2π) ∫ k K̄ dk  p e^{-2K̄d} / (1 - p e^{-2K̄d})`
/// with `K̄ = sqrt(k² + κ²)` and `p(k)` the product of mirror amplitudes.
///
/// Exposed for idealized mirrors; [`pressure_n0_screened`] supplies `p` from the stacks.
pub fn screened_n0_integral<R: Real, F>(
    separation: R,
    temperature: R,
    kappa: R,
    settings: &QuadratureSettings<R>,
    mut product: F,
) -> Result<TermEstimate<R>>
where
    F: FnMut(R) -> Result<R>,
{
    if !(separation > R::zero()) {
        return Err(domain(format!("separation must be > 0, got {separation}")));
    }
    if !(kappa >= R::zero()) {
        return Err(domain(format!("kappa must be >= 0, got {kappa}")));
    }
    let d = separation;
    let y0 = lit::<R>(2.0) * kappa * d;
    let head = (-y0).exp();
    if head == R::zero() {
        return Ok(TermEstimate {
            value: R::zero(),
            abs_error: R::zero(),
        });
    }
    let two_d = lit::<R>(2.0) * d;
    let mut failure = None;
    let integrand = |t: R| -> R {
        let y = y0 + t;
        let kbar = y / two_d;
        let k_par = ((kbar - kappa) * (kbar + kappa)).max(R::zero()).sqrt();
        if k_par == R::zero() && kappa == R::zero() {
            return R::zero();
        }
        let p = match product(k_par) {
            Ok(p) => p,
            Err(e) => {
                failure.get_or_insert(e);
                R::zero()
            }
        };
        y * y * p * (-t).exp() / (R::one() - p * (-y).exp())
    };
    let quad = integrate(
        integrand,
        R::zero(),
        lit(Y_CUT),
        settings.integral_tolerance(),
        R::min_positive_value(),
        settings.initial_segments,
        settings.max_segments,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let prefactor =
        -lit::<R>(BOLTZMANN) * temperature / (lit::<R>(2.0) * R::PI()) / (lit::<R>(8.0) * d * d * d) * head;
    let value = prefactor * quad.value;
    if !quad.converged {
        return Err(Error::NonConvergence {
            what: "screened n = 0 integral".into(),
            partial: value.as_f64(),
            detail: format!("error estimate {:e}", (prefactor * quad.abs_error).abs().as_f64()),
        });
    }
    Ok(TermEstimate {
        value,
        abs_error: (prefactor * quad.abs_error).abs(),
    })
}

/// Zero-frequency term with ionic screening, Pa.
pub fn pressure_n0_screened<R: Real>(job: &CasimirJob<R>) -> Result<R> {
    job.validate()?;
    n0_estimate(job).map(|t| t.value)
}

fn n0_estimate<R: Real>(job: &CasimirJob<R>) -> Result<TermEstimate<R>> {
    let kappa = job.screening.kappa();
    screened_n0_integral(job.separation, job.temperature, kappa, &job.numerics, |k| {
        screened_product(&job.top, &job.bottom, k, kappa)
    })
}

/// Unscreened zero-frequency pressure for `r̄_t r̄_b = -1`: `3 k_B T ζ(3) / (32 π d³)`.
pub fn pressure_n0_analytic<R: Real>(separation: R, temperature: R) -> R {
    lit::<R>(3.0 * BOLTZMANN * ZETA_3 / 32.0) * temperature / (R::PI() * separation * separation * separation)
}

/// Sum of the n ≥ 1 terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumSum<R> {
    pub value: R,
    pub n_terms_used: usize,
    pub estimated_error: R,
}

/// Sums n ≥ 1 until three consecutive terms are negligible.
///
/// Batches of terms run in parallel; the running sum is accumulated in
/// ascending `n`, so the result does not depend on the thread count.
pub fn quantum_pressure<R: Real>(job: &CasimirJob<R>) -> Result<QuantumSum<R>> {
    job.validate()?;
    let s = &job.numerics;
    let mut sum = R::zero();
    let mut quad_error = R::zero();
    let mut quiet = 0usize;
    let mut prev_abs;
    let mut last_abs = R::zero();
    let mut next = 1usize;
    while next <= s.max_matsubara {
        let end = (next + BATCH - 1).min(s.max_matsubara);
        let batch: Vec<TermEstimate<R>> = (next..=end)
            .into_par_iter()
            .map(|n| term_estimate(job, n))
            .collect::<Result<Vec<_>>>()?;
        for (offset, term) in batch.iter().enumerate() {
            let n = next + offset;
            sum += term.value;
            quad_error += term.abs_error;
            prev_abs = last_abs;
            last_abs = term.value.abs();
            if last_abs <= s.truncation_threshold * sum.abs() {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet >= QUIET_TERMS {
                // geometric tail bound from the last two magnitudes
                let ratio = if prev_abs > R::zero() {
                    (last_abs / prev_abs).min(lit(0.999))
                } else {
                    R::zero()
                };
                let tail = last_abs * ratio / (R::one() - ratio);
                return Ok(QuantumSum {
                    value: sum,
                    n_terms_used: n,
                    estimated_error: quad_error + tail,
                });
            }
        }
        next = end + 1;
    }
    Err(Error::NonConvergence {
        what: format!("Matsubara sum at d = {:e} m", job.separation.as_f64()),
        partial: sum.as_f64(),
        detail: format!("no truncation within {} terms, last |term| = {:e}", s.max_matsubara, last_abs.as_f64()),
    })
}

/// Full decomposition at the job's separation.
pub fn casimir_pressure<R: Real>(job: &CasimirJob<R>) -> Result<PressureDecomposition<R>> {
    job.validate()?;
    let n0 = n0_estimate(job)?;
    let q = quantum_pressure(job)?;
    Ok(PressureDecomposition {
        p_n0: n0.value,
        p_quantum: q.value,
        p_total: n0.value + q.value,
        n_terms_used: q.n_terms_used,
        estimated_error: n0.abs_error + q.estimated_error,
    })
}
