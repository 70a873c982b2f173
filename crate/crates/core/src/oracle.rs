//! Brute-force evolution of the Λ atom coupled to a few truncated bosonic modes.
//!
//! The composite Hilbert space is ordered system ⊗ mode₀ ⊗ mode₁ ⊗ …, with the
//! system index slowest. Free evolution is exact (eigendecomposition of the
//! total Hamiltonian); pulses are instantaneous unitaries on the system factor.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::algebra::{build_h0, BbElement, Operator3, SystemLevels};
use crate::dephasing::{discrete_gamma, Channel, ControlParams, Regime};
use crate::error::{invalid, Error, Result};
use crate::format::sig;
use crate::schedule::CycleSchedule;

pub type CMatrix = DMatrix<Complex64>;

/// Largest allowed thermal occupation of the top Fock level.
pub const OCCUPANCY_LIMIT: f64 = 1e-10;
pub const MAX_MODES: usize = 3;
pub const MAX_DIMENSION: usize = 3 * 64 * 64 * 64;
pub const COMPARE_TOL: f64 = 1e-6;

/// Coupling convention shared by the oracle Hamiltonian and the discrete analytic side.
pub const CONVENTION: &str = "H_SE = S (x) (g a^dag + g* a) with S = sigma_z^(2,0) (k1) or sigma_z^(2,1) (k2), no 1/2; \
xi = (2g/w)(1 - e^{i w dt}); |rho02(t)/rho02(0)| = exp(-sum_k |K_k|^2/2 coth(w_k/2T))";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedMode {
    pub omega_k: f64,
    pub coupling: Complex64,
    pub channel: Channel,
    pub fock_cutoff: usize,
}

impl TruncatedMode {
    pub fn new(omega_k: f64, coupling: f64, channel: Channel, fock_cutoff: usize) -> Result<Self> {
        Self::with_complex_coupling(omega_k, Complex64::new(coupling, 0.0), channel, fock_cutoff)
    }

    pub fn with_complex_coupling(
        omega_k: f64,
        coupling: Complex64,
        channel: Channel,
        fock_cutoff: usize,
    ) -> Result<Self> {
        if !(omega_k.is_finite() && omega_k > 0.0) {
            return invalid(format!("mode frequency must be positive, got {omega_k}"));
        }
        if !(coupling.re.is_finite() && coupling.im.is_finite()) {
            return invalid("mode coupling must be finite");
        }
        if fock_cutoff < 2 {
            return invalid(format!("fock cutoff must be at least 2, got {fock_cutoff}"));
        }
        Ok(TruncatedMode { omega_k, coupling, channel, fock_cutoff })
    }
}

/// Boltzmann weights on the truncated ladder, renormalized to unit sum.
pub fn thermal_populations(omega: f64, temperature: f64, cutoff: usize) -> Vec<f64> {
    if temperature == 0.0 {
        let mut p = vec![0.0; cutoff];
        p[0] = 1.0;
        return p;
    }
    let beta_omega = omega / temperature;
    let weights: Vec<f64> = (0..cutoff).map(|m| (-(m as f64) * beta_omega).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

fn check_occupancy(mode: &TruncatedMode, temperature: f64) -> std::result::Result<(), Error> {
    let p = thermal_populations(mode.omega_k, temperature, mode.fock_cutoff);
    let top = *p.last().expect("cutoff ≥ 2");
    if top >= OCCUPANCY_LIMIT {
        return Err(Error::TruncationTooSmall { cutoff: mode.fock_cutoff, omega: mode.omega_k, top_occupation: top });
    }
    Ok(())
}

/// Thermal state of one mode; fails when the top Fock level is noticeably occupied.
pub fn thermal_mode_state(mode: &TruncatedMode, temperature: f64) -> Result<CMatrix> {
    if !(temperature.is_finite() && temperature >= 0.0) {
        return invalid(format!("temperature must be non-negative, got {temperature}"));
    }
    check_occupancy(mode, temperature)?;
    Ok(thermal_mode_state_unchecked(mode, temperature))
}

/// Thermal state without the occupancy check.
pub fn thermal_mode_state_unchecked(mode: &TruncatedMode, temperature: f64) -> CMatrix {
    let p = thermal_populations(mode.omega_k, temperature, mode.fock_cutoff);
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        p.len(),
        p.into_iter().map(|x| Complex64::new(x, 0.0)),
    ))
}

pub fn annihilation(cutoff: usize) -> CMatrix {
    let mut a = CMatrix::zeros(cutoff, cutoff);
    for m in 1..cutoff {
        a[(m - 1, m)] = Complex64::new((m as f64).sqrt(), 0.0);
    }
    a
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn operator_to_matrix(op: &Operator3) -> CMatrix {
    CMatrix::from_fn(3, 3, |r, c| op.get(r, c))
}

/// Dimension bookkeeping for system ⊗ modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub mode_dims: Vec<usize>,
}

impl Layout {
    pub fn new(modes: &[TruncatedMode]) -> Result<Self> {
        if modes.len() > MAX_MODES {
            return invalid(format!("at most {MAX_MODES} bath modes supported, got {}", modes.len()));
        }
        let layout = Layout { mode_dims: modes.iter().map(|m| m.fock_cutoff).collect() };
        if layout.dimension() > MAX_DIMENSION {
            return invalid(format!("composite dimension {} exceeds cap {MAX_DIMENSION}", layout.dimension()));
        }
        Ok(layout)
    }

    pub fn bath_dimension(&self) -> usize {
        self.mode_dims.iter().product()
    }

    pub fn dimension(&self) -> usize {
        3 * self.bath_dimension()
    }

    /// `op` acting on mode `k`, identity on the other modes (bath space only).
    fn embed_mode(&self, k: usize, op: &CMatrix) -> CMatrix {
        self.mode_dims.iter().enumerate().fold(CMatrix::identity(1, 1), |acc, (j, &d)| {
            if j == k {
                kron(&acc, op)
            } else {
                kron(&acc, &CMatrix::identity(d, d))
            }
        })
    }
}

/// H = H0 ⊗ 1 + 1 ⊗ Σ ω_k a_k†a_k + Σ_k S_k ⊗ (g_k a_k† + g_k* a_k).
pub fn build_total_hamiltonian(levels: &SystemLevels, modes: &[TruncatedMode]) -> Result<CMatrix> {
    let layout = Layout::new(modes)?;
    let bath_dim = layout.bath_dimension();
    let id_bath = CMatrix::identity(bath_dim, bath_dim);
    let mut h = kron(&operator_to_matrix(&build_h0(levels)), &id_bath);
    let id_sys = CMatrix::identity(3, 3);
    for (k, mode) in modes.iter().enumerate() {
        let a = annihilation(mode.fock_cutoff);
        let a_dag = a.adjoint();
        let number = &a_dag * &a;
        h += kron(&id_sys, &layout.embed_mode(k, &(number * Complex64::new(mode.omega_k, 0.0))));
        let displacement = a_dag * mode.coupling + a * mode.coupling.conj();
        let s = operator_to_matrix(&mode.channel.coupling_operator());
        h += kron(&s, &layout.embed_mode(k, &displacement));
    }
    Ok(h)
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct CompositeState {
    pub rho: CMatrix,
    pub layout: Layout,
}

impl CompositeState {
    /// ρ_S ⊗ ρ_mode₀ ⊗ ρ_mode₁ ⊗ …
    pub fn product(rho_s: &Operator3, mode_states: &[CMatrix]) -> Self {
        let bath = mode_states.iter().fold(CMatrix::identity(1, 1), |acc, m| kron(&acc, m));
        let layout = Layout { mode_dims: mode_states.iter().map(|m| m.nrows()).collect() };
        CompositeState { rho: kron(&operator_to_matrix(rho_s), &bath), layout }
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// Reduced system density matrix: ρ_S[i][j] = Σ_m ρ[(i,m),(j,m)].
    pub fn reduced_system(&self) -> Operator3 {
        let e = self.layout.bath_dimension();
        let mut out = Operator3::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.entries[i][j] = (0..e).map(|m| self.rho[(i * e + m, j * e + m)]).sum();
            }
        }
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Cached eigendecomposition of a Hermitian generator.
pub struct Propagator {
    vectors: CMatrix,
    values: Vec<f64>,
    cache: HashMap<u64, CMatrix>,
}

impl Propagator {
    pub fn new(h: &CMatrix) -> Result<Self> {
        if hermiticity_residual(h) > 1e-12 * (1.0 + h.iter().map(|z| z.norm()).fold(0.0, f64::max)) {
            return Err(Error::Numerical("generator is not Hermitian".into()));
        }
        let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("eigendecomposition did not converge".into()))?;
        Ok(Propagator { vectors: eig.eigenvectors, values: eig.eigenvalues.iter().copied().collect(), cache: HashMap::new() })
    }

    /// exp(−iHt)
    pub fn unitary(&mut self, duration: f64) -> &CMatrix {
        let (v, values) = (&self.vectors, &self.values);
        self.cache.entry(duration.to_bits()).or_insert_with(|| {
            let mut scaled = v.clone();
            for (col, &lambda) in values.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, -lambda * duration);
                scaled.column_mut(col).scale_mut_complex(phase);
            }
            scaled * v.adjoint()
        })
    }

    pub fn evolve(&mut self, state: &mut CompositeState, duration: f64) {
        if duration == 0.0 {
            return;
        }
        let u = self.unitary(duration).clone();
        state.rho = &u * &state.rho * u.adjoint();
    }
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, s: Complex64);
}

impl<S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>> ScaleComplex
    for nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>
{
    fn scale_mut_complex(&mut self, s: Complex64) {
        self.iter_mut().for_each(|z| *z *= s);
    }
}

/// ρ → exp(−iH·duration) ρ exp(iH·duration)
pub fn evolve_segment(state: &CompositeState, h: &CMatrix, duration: f64) -> Result<CompositeState> {
    if !(duration.is_finite() && duration >= 0.0) {
        return invalid(format!("segment duration must be non-negative, got {duration}"));
    }
    let mut out = state.clone();
    if duration > 0.0 {
        Propagator::new(h)?.evolve(&mut out, duration);
    }
    Ok(out)
}

/// ρ → (g ⊗ 1) ρ (g ⊗ 1)†, computed blockwise over the system index.
pub fn apply_pulse(state: &CompositeState, element: BbElement) -> CompositeState {
    apply_system_unitary(state, &element.operator())
}

pub fn apply_system_unitary(state: &CompositeState, g: &Operator3) -> CompositeState {
    let e = state.layout.bath_dimension();
    let mut rho = CMatrix::zeros(3 * e, 3 * e);
    for i in 0..3 {
        for j in 0..3 {
            for p in 0..3 {
                let gip = g.get(i, p);
                if gip.norm() == 0.0 {
                    continue;
                }
                for q in 0..3 {
                    let w = gip * g.get(j, q).conj();
                    if w.norm() == 0.0 {
                        continue;
                    }
                    let src = state.rho.view((p * e, q * e), (e, e));
                    let mut dst = rho.view_mut((i * e, j * e), (e, e));
                    dst.zip_apply(&src, |d, s| *d += w * s);
                }
            }
        }
    }
    CompositeState { rho, layout: state.layout.clone() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruncationPolicy {
    /// Undersized cutoffs are an error.
    Strict,
    /// Undersized cutoffs are reported in the result and the run continues.
    Warn,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    pub temperature: f64,
    /// Apply the schedule's pulses; when false the same timeline runs as free evolution.
    pub pulses: bool,
    pub truncation: TruncationPolicy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// t = 0 and every cycle boundary 3nΔt.
    pub times: Vec<f64>,
    pub rho02: Vec<Complex64>,
    pub rho02_magnitude: Vec<f64>,
    pub rho02_phase: Vec<f64>,
    pub populations: Vec<[f64; 3]>,
    pub max_trace_drift: f64,
    pub max_population_drift: f64,
    pub max_hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub truncation_warning: Option<String>,
}

impl OracleResult {
    /// |ρ₀₂(t)| / |ρ₀₂(0)| at each recorded time.
    pub fn magnitude_ratio(&self) -> Vec<f64> {
        let m0 = self.rho02_magnitude[0];
        self.rho02_magnitude.iter().map(|m| if m0 == 0.0 { 0.0 } else { m / m0 }).collect()
    }

    /// CSV `time,rho02_re,rho02_im,pop0,pop1,pop2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,rho02_re,rho02_im,pop0,pop1,pop2\n");
        for (k, t) in self.times.iter().enumerate() {
            let z = self.rho02[k];
            let p = self.populations[k];
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                sig(*t, 12),
                sig(z.re, 12),
                sig(z.im, 12),
                sig(p[0], 12),
                sig(p[1], 12),
                sig(p[2], 12)
            ));
        }
        out
    }
}

pub fn run_oracle(
    levels: &SystemLevels,
    modes: &[TruncatedMode],
    schedule: &CycleSchedule,
    rho_s_initial: &Operator3,
    config: &OracleConfig,
) -> Result<OracleResult> {
    if !(config.temperature.is_finite() && config.temperature >= 0.0) {
        return invalid(format!("temperature must be non-negative, got {}", config.temperature));
    }
    if rho_s_initial.hermiticity_residual() > 1e-12 || (rho_s_initial.trace() - 1.0).norm() > 1e-12 {
        return invalid("initial system state must be Hermitian with unit trace");
    }
    let mut warning = None;
    for m in modes {
        if let Err(e) = check_occupancy(m, config.temperature) {
            match config.truncation {
                TruncationPolicy::Strict => return Err(e),
                TruncationPolicy::Warn => warning = Some(e.to_string()),
            }
        }
    }
    let mode_states: Vec<CMatrix> =
        modes.iter().map(|m| thermal_mode_state_unchecked(m, config.temperature)).collect();
    let h = build_total_hamiltonian(levels, modes)?;
    let mut propagator = Propagator::new(&h)?;
    let mut state = CompositeState::product(rho_s_initial, &mode_states);

    let initial_pops = diag3(&state.reduced_system());
    let mut result = OracleResult {
        times: Vec::new(),
        rho02: Vec::new(),
        rho02_magnitude: Vec::new(),
        rho02_phase: Vec::new(),
        populations: Vec::new(),
        max_trace_drift: 0.0,
        max_population_drift: 0.0,
        max_hermiticity_residual: 0.0,
        min_eigenvalue: f64::INFINITY,
        truncation_warning: warning,
    };
    record(&mut result, &state, 0.0, &initial_pops);

    let mut now = 0.0;
    let mut events = schedule.events.iter().peekable();
    for c in 1..=schedule.n_cycles {
        let boundary = 3.0 * c as f64 * schedule.delta_t;
        while let Some(e) = events.next_if(|e| e.time <= boundary * (1.0 + 1e-12)) {
            propagator.evolve(&mut state, e.time - now);
            now = e.time;
            if config.pulses {
                state = apply_pulse(&state, e.element);
            }
        }
        propagator.evolve(&mut state, boundary - now);
        now = boundary;
        record(&mut result, &state, now, &initial_pops);
        result.max_hermiticity_residual = result.max_hermiticity_residual.max(hermiticity_residual(&state.rho));
    }
    result.min_eigenvalue = state.min_eigenvalue();
    Ok(result)
}

fn diag3(op: &Operator3) -> [f64; 3] {
    [op.get(0, 0).re, op.get(1, 1).re, op.get(2, 2).re]
}

fn record(result: &mut OracleResult, state: &CompositeState, time: f64, initial_pops: &[f64; 3]) {
    let rs = state.reduced_system();
    let z = rs.get(0, 2);
    let pops = diag3(&rs);
    result.times.push(time);
    result.rho02.push(z);
    result.rho02_magnitude.push(z.norm());
    result.rho02_phase.push(z.arg());
    result.populations.push(pops);
    result.max_trace_drift = result.max_trace_drift.max((state.trace() - 1.0).norm());
    let drift = pops.iter().zip(initial_pops).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    result.max_population_drift = result.max_population_drift.max(drift);
}

/// Discrete-mode analytic |ρ₀₂(t)/ρ₀₂(0)| at t = 0 and each cycle boundary.
pub fn analytic_magnitudes(
    modes: &[TruncatedMode],
    temperature: f64,
    delta_t: f64,
    n_cycles: usize,
    regime: Regime,
) -> Result<Vec<f64>> {
    let mut out = vec![1.0];
    for n in 1..=n_cycles {
        let ctrl = ControlParams::new(delta_t, n)?;
        let gamma: f64 = modes
            .iter()
            .map(|m| discrete_gamma(regime, m.channel, m.omega_k, m.coupling.norm(), temperature, &ctrl))
            .sum();
        out.push((-gamma).exp());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub truncation_warning: Option<String>,
    pub convention: &'static str,
}

impl ComparisonReport {
    pub fn header(&self) -> String {
        format!("# convention: {}\n", self.convention)
    }
}

/// Max |oracle − analytic| coherence-magnitude ratio over the recorded times.
pub fn compare_analytic(oracle: &OracleResult, analytic: &[f64]) -> ComparisonReport {
    let ratios = oracle.magnitude_ratio();
    let max_deviation = if ratios.len() != analytic.len() {
        f64::INFINITY
    } else {
        ratios.iter().zip(analytic).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    ComparisonReport {
        max_deviation,
        tolerance: COMPARE_TOL,
        pass: max_deviation < COMPARE_TOL && oracle.truncation_warning.is_none(),
        truncation_warning: oracle.truncation_warning.clone(),
        convention: CONVENTION,
    }
}

/// Equal superposition (|0⟩ + |1⟩ + |2⟩)/√3 as a density matrix.
pub fn uniform_superposition() -> Operator3 {
    let mut m = Operator3::zero();
    m.entries.iter_mut().flatten().for_each(|z| *z = Complex64::new(1.0 / 3.0, 0.0));
    m
}
