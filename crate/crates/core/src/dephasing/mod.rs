//! Dephasing exponents of the ρ₀₂ coherence, with and without the pulse train.
//!
//! For a bath with spectral density I(ω) = (α/4)·ωⁿ·e^{−ω/ω_c} at temperature T,
//!
//! ```text
//! Γ = ∫₀^∞ I(ω) · |K(ω)|²/2 · coth(ω/2T) dω
//! ```
//!
//! where K is the controlled kernel η, the reference kernel f·ξ, or the exact
//! free-evolution displacement. The coupling constants of the discrete modes
//! are absorbed into I(ω), so every kernel is built from ξ = (2/ω)(1 − e^{iωΔt}).

mod grid;
pub mod kernels;
pub mod quadrature;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::LevelPair;
use crate::error::{invalid, Result};

pub use grid::{decoherence_grid, DecoherenceGrid, GridOptions, GridCell, Slicing};
pub use kernels::{eta_kernel, f_sum, free_exact_kernel, free_kernel, xi_kernel, Channel};
use quadrature::{integrate, QuadratureOptions, QuadratureValue};

/// Spectral density upper limit in units of ω_c; the integrand is below e^{−50} beyond it.
pub const UPPER_CUTOFF: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathSpectrum {
    pub alpha: f64,
    pub n_index: f64,
    pub omega_c: f64,
    pub temperature: f64,
}

impl BathSpectrum {
    pub fn new(alpha: f64, n_index: f64, omega_c: f64, temperature: f64) -> Result<Self> {
        let s = BathSpectrum { alpha, n_index, omega_c, temperature };
        s.validate()?;
        Ok(s)
    }

    /// Spectrum with T given through the ratio ω_c / T (infinite ratio means T = 0).
    pub fn with_cutoff_ratio(alpha: f64, n_index: f64, omega_c: f64, omega_c_over_t: f64) -> Result<Self> {
        if omega_c_over_t.is_nan() || omega_c_over_t <= 0.0 {
            return invalid(format!("omega_c/T must be positive, got {omega_c_over_t}"));
        }
        let temperature = if omega_c_over_t.is_infinite() { 0.0 } else { omega_c / omega_c_over_t };
        Self::new(alpha, n_index, omega_c, temperature)
    }

    /// The low-temperature Ohmic bath used for the decoherence-factor curves.
    pub fn low_temperature_ohmic() -> Self {
        BathSpectrum { alpha: 0.25, n_index: 1.0, omega_c: 1.0, temperature: 0.01 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return invalid(format!("alpha must be finite and non-negative, got {}", self.alpha));
        }
        if !(self.n_index.is_finite() && self.n_index >= 1.0) {
            return invalid(format!(
                "spectral exponent n={} unsupported: the integrand diverges at ω→0 for n<1",
                self.n_index
            ));
        }
        if !(self.omega_c.is_finite() && self.omega_c > 0.0) {
            return invalid(format!("omega_c must be positive, got {}", self.omega_c));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return invalid(format!("temperature must be non-negative, got {}", self.temperature));
        }
        Ok(())
    }

    pub fn density(&self, omega: f64) -> f64 {
        0.25 * self.alpha * omega.powf(self.n_index) * (-omega / self.omega_c).exp()
    }

    /// I(ω)·coth(ω/2T), evaluated without the 0·∞ at ω = 0.
    pub fn thermal_density(&self, omega: f64) -> f64 {
        0.25 * self.alpha
            * omega.powf(self.n_index - 1.0)
            * (-omega / self.omega_c).exp()
            * kernels::omega_coth(omega, self.temperature)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlParams {
    pub delta_t: f64,
    pub n_cycles: usize,
}

impl ControlParams {
    pub fn new(delta_t: f64, n_cycles: usize) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return invalid(format!("delta_t must be positive, got {delta_t}"));
        }
        if n_cycles == 0 {
            return invalid("n_cycles must be at least 1");
        }
        Ok(ControlParams { delta_t, n_cycles })
    }

    /// Splits a total time into N cycles: Δt = t / 3N.
    pub fn from_total_time(total: f64, n_cycles: usize) -> Result<Self> {
        if n_cycles == 0 {
            return invalid("n_cycles must be at least 1");
        }
        Self::new(total / (3.0 * n_cycles as f64), n_cycles)
    }

    pub fn total_time(&self) -> f64 {
        3.0 * self.n_cycles as f64 * self.delta_t
    }
}

/// Which evolution the dephasing exponent describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Periodic twinborn pulses; kernel η.
    Controlled,
    /// Reference exponent Γ′ with kernel f·ξ(Δt).
    Uncontrolled,
    /// No pulses for the whole time 3NΔt; kernel ½(s₀ − s₂)·ξ(3NΔt).
    FreeExact,
}

/// |K(ω)|² for the given regime and channel.
pub fn kernel_norm_sqr(regime: Regime, channel: Channel, omega: f64, ctrl: &ControlParams) -> f64 {
    match regime {
        Regime::Controlled => eta_kernel(channel, omega, ctrl.delta_t, ctrl.n_cycles).norm_sqr(),
        Regime::Uncontrolled => free_kernel(omega, ctrl.delta_t, ctrl.n_cycles).norm_sqr(),
        Regime::FreeExact => free_exact_kernel(channel, omega, ctrl.total_time()).norm_sqr(),
    }
}

/// Dephasing exponent with explicit quadrature options; returns the value and its error estimate.
pub fn gamma_with(
    regime: Regime,
    channel: Channel,
    spectrum: &BathSpectrum,
    ctrl: &ControlParams,
    opts: &QuadratureOptions,
) -> Result<QuadratureValue> {
    spectrum.validate()?;
    ControlParams::new(ctrl.delta_t, ctrl.n_cycles)?;
    if spectrum.alpha == 0.0 {
        return Ok(QuadratureValue { value: 0.0, error: 0.0, panels: 0 });
    }
    let upper = UPPER_CUTOFF * spectrum.omega_c;
    // resolve the finest oscillation of |K|², period 2π/(3NΔt)
    let period = 2.0 * PI / ctrl.total_time();
    let width = (0.5 * spectrum.omega_c).min(0.1 * period);
    let integrand =
        |w: f64| spectrum.thermal_density(w) * 0.5 * kernel_norm_sqr(regime, channel, w, ctrl);
    integrate(integrand, 0.0, upper, width, opts)
}

/// Γ for the pulsed evolution.
pub fn gamma_controlled(channel: Channel, spectrum: &BathSpectrum, ctrl: &ControlParams) -> Result<f64> {
    gamma_with(Regime::Controlled, channel, spectrum, ctrl, &QuadratureOptions::default()).map(|q| q.value)
}

/// Γ′ with kernel f·ξ(Δt).
pub fn gamma_free(channel: Channel, spectrum: &BathSpectrum, ctrl: &ControlParams) -> Result<f64> {
    gamma_with(Regime::Uncontrolled, channel, spectrum, ctrl, &QuadratureOptions::default()).map(|q| q.value)
}

/// Exponent for uninterrupted free evolution over 3NΔt.
pub fn gamma_free_exact(channel: Channel, spectrum: &BathSpectrum, ctrl: &ControlParams) -> Result<f64> {
    gamma_with(Regime::FreeExact, channel, spectrum, ctrl, &QuadratureOptions::default()).map(|q| q.value)
}

pub fn gamma(regime: Regime, channel: Channel, spectrum: &BathSpectrum, ctrl: &ControlParams) -> Result<f64> {
    gamma_with(regime, channel, spectrum, ctrl, &QuadratureOptions::default()).map(|q| q.value)
}

/// Single-mode exponent g²·|K(ω_k)|²/2·coth(ω_k/2T) for a discrete bath mode.
pub fn discrete_gamma(
    regime: Regime,
    channel: Channel,
    omega_k: f64,
    coupling: f64,
    temperature: f64,
    ctrl: &ControlParams,
) -> f64 {
    coupling * coupling * 0.5 * kernel_norm_sqr(regime, channel, omega_k, ctrl)
        * kernels::thermal_factor(omega_k, temperature)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DephasingResult {
    pub gamma1: f64,
    pub gamma2: f64,
    /// |ρ₀₂(t)| / |ρ₀₂(0)| = exp(−Γ₁ − Γ₂).
    pub coherence_magnitude: f64,
    /// Deterministic phase −3Nω₂₀Δt wrapped into (−π, π].
    pub phase: f64,
    pub rho02: Complex64,
}

impl DephasingResult {
    pub fn from_gammas(gamma1: f64, gamma2: f64, ctrl: &ControlParams, omega20: f64, rho02_initial: Complex64) -> Self {
        let coherence_magnitude = (-gamma1 - gamma2).exp();
        let phase = wrap_phase(-omega20 * ctrl.total_time());
        DephasingResult {
            gamma1,
            gamma2,
            coherence_magnitude,
            phase,
            rho02: rho02_initial * Complex64::from_polar(coherence_magnitude, phase),
        }
    }
}

pub fn wrap_phase(phase: f64) -> f64 {
    let w = phase.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Coherence between |0⟩ and |2⟩ after N cycles.
pub fn coherence_trace(
    pair: LevelPair,
    spectrum_k1: &BathSpectrum,
    spectrum_k2: &BathSpectrum,
    ctrl: &ControlParams,
    regime: Regime,
    omega20: f64,
    rho02_initial: Complex64,
) -> Result<DephasingResult> {
    if pair != LevelPair::P20 {
        return invalid("coherence_trace is defined for the (2,0) coherence only");
    }
    let gamma1 = gamma(regime, Channel::K1, spectrum_k1, ctrl)?;
    let gamma2 = gamma(regime, Channel::K2, spectrum_k2, ctrl)?;
    Ok(DephasingResult::from_gammas(gamma1, gamma2, ctrl, omega20, rho02_initial))
}

/// arccos(3/4): the largest ωΔt for which pulsing never increases a mode's dephasing.
pub fn quiet_threshold() -> f64 {
    0.75f64.acos()
}

/// |η|² / |f·ξ|² − 1 for one cycle as a function of x = ωΔt.
pub fn kernel_excess(channel: Channel, x: f64) -> f64 {
    let eta = eta_kernel(channel, x, 1.0, 1).norm_sqr();
    let free = free_kernel(x, 1.0, 1).norm_sqr();
    eta / free - 1.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuietSweep {
    pub channel: Channel,
    /// (ωΔt, |η|²/|f·ξ|²) samples on (0, π].
    pub samples: Vec<(f64, f64)>,
    /// First ωΔt where the pulsed kernel overtakes the free one.
    pub crossover: Option<f64>,
}

/// Samples the kernel ratio on `points` values of ωΔt ∈ (0, π] and bisects the
/// first sign change of |η|² − |f·ξ|².
pub fn locate_quiet_crossover(channel: Channel, points: usize) -> QuietSweep {
    let points = points.max(2);
    let xs: Vec<f64> = (1..=points).map(|k| PI * k as f64 / points as f64).collect();
    let samples: Vec<(f64, f64)> = xs.iter().map(|&x| (x, kernel_excess(channel, x) + 1.0)).collect();
    let mut crossover = None;
    let mut prev = 0.0;
    for &x in &xs {
        if kernel_excess(channel, x) > 0.0 {
            crossover = Some(bisect(|y| kernel_excess(channel, y), prev, x));
            break;
        }
        prev = x;
    }
    QuietSweep { channel, samples, crossover }
}

/// Bisection for the point where `g` turns positive; `g(lo) ≤ 0 < g(hi)`.
fn bisect<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64) -> f64 {
    // lo may be 0 where the ratio is 0/0; nudge it inside
    if lo == 0.0 {
        lo = hi * 1e-6;
    }
    while hi - lo > 1e-14 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
